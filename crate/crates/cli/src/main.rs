//! `frns`: command-line driver for the periodic-box fractional-regularity
//! toolkit. Four subcommands:
//!
//! - `params`: the exponent chain implied by a pair `(s, q)`.
//! - `simulate`: a monitored run from a TOML config, with CSV
//!   diagnostics, optional spectra/structure files, checkpoints, and a
//!   manifest that pins the exact configuration.
//! - `analyze`: offline statistics of a checkpoint (or a spectrum file).
//! - `verify`: the identity/inequality suites, reported as JSON.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or
//! configuration error, 3 blow-up abort.

mod config;
mod csvio;
mod verify;

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use frns_core::criterion::{
    delta_max, smallness_check, solve_scaling, theta_p_identity, CriterionMonitor,
};
use frns_core::decay::{derive_params, envelope_report, DecayMonitor};
use frns_core::fracops::FracOrder;
use frns_core::grid::{read_checkpoint, PhysicalField, SpectralField};
use frns_core::solver::{
    make_initial, run, DiagnosticRecord, Monitor, RunOptions, RunStatus, ENERGY_TOLERANCE,
};
use frns_core::turbulence::{
    exceptional_set, fit_spectrum_model, flux_deviation_bound, lim_field, quantile,
    shell_spectrum, structure_functions, tail_fit, ShellSpectrum,
};

use config::RunConfig;
use csvio::fmt;

#[derive(Parser)]
#[command(
    name = "frns",
    version,
    about = "Pseudo-spectral periodic-box Navier-Stokes with fractional regularity monitoring"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the exponent chain for a pair (s, q) and a margin eta
    Params {
        /// Fractional order, in (1/2, 1)
        #[arg(long)]
        s: f64,
        /// Spatial integrability exponent, above the scaling threshold
        #[arg(long)]
        q: f64,
        /// Margin added to the nonlinearity exponent
        #[arg(long, default_value_t = 0.01)]
        eta: f64,
    },
    /// Run a configured simulation with monitors and file outputs
    Simulate {
        /// Path to a TOML run configuration
        config: PathBuf,
        /// Continue from a checkpoint instead of fresh initial data
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Offline analysis of a checkpoint (or of a spectrum CSV with --fit)
    Analyze(AnalyzeArgs),
    /// Run a verification suite and print a JSON summary
    Verify {
        /// Suite name: multifractal, interpolation, commutator, osgood, all
        suite: String,
        /// Directory for per-suite CSV reports (commutator ensemble)
        #[arg(long)]
        report_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Checkpoint file written by `simulate`
    checkpoint: Option<PathBuf>,
    /// Output directory (default: `<checkpoint stem>_analysis` beside it)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fractional order for spectral moments
    #[arg(long, default_value_t = 0.75)]
    s: f64,
    /// Viscosity of the run the checkpoint came from (for dissipation)
    #[arg(long, default_value_t = 0.0)]
    nu: f64,
    /// Logarithmic exponent for model fits and flux bounds
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// First shell of the modeled inertial range
    #[arg(long, default_value_t = 2)]
    k0: usize,
    /// Increment separation in grid cells for intermittency fields
    #[arg(long, default_value_t = 2)]
    sep: usize,
    /// Structure-function moment orders
    #[arg(long, value_delimiter = ',', default_values_t = vec![2.0, 4.0, 6.0])]
    orders: Vec<f64>,
    /// Largest structure-function separation in cells (default n/2 - 1)
    #[arg(long)]
    max_r: Option<usize>,
    /// Exceedance thresholds for the intermittency field
    #[arg(long, value_delimiter = ',', default_values_t = vec![2.0, 5.0, 10.0])]
    thresholds: Vec<f64>,
    /// Shell spectrum, transfer, and flux (the default when nothing is selected)
    #[arg(long)]
    spectra: bool,
    /// Flux deviation bound report (needs --nu > 0)
    #[arg(long)]
    flux: bool,
    /// Structure functions over separations
    #[arg(long)]
    structure: bool,
    /// Local intermittency measure and exceptional-set fractions
    #[arg(long)]
    lim: bool,
    /// Fit the log-corrected spectrum model (needs --nu > 0)
    #[arg(long)]
    fit: bool,
    /// Tail fit of the intermittency distribution
    #[arg(long)]
    tail: bool,
    /// Run every analysis
    #[arg(long)]
    all: bool,
    /// Fit the spectrum model to a CSV with columns k,e_k instead of a checkpoint
    #[arg(long)]
    spectrum_file: Option<PathBuf>,
    /// Dissipation rate accompanying --spectrum-file
    #[arg(long)]
    eps: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<ExitCode> {
    configure_threads()?;
    match cmd {
        Cmd::Params { s, q, eta } => cmd_params(s, q, eta),
        Cmd::Simulate { config, resume } => cmd_simulate(&config, resume.as_deref()),
        Cmd::Analyze(args) => cmd_analyze(args),
        Cmd::Verify { suite, report_dir } => cmd_verify(&suite, report_dir.as_deref()),
    }
}

/// Caps the global worker pool when FRNS_THREADS is set.
fn configure_threads() -> Result<()> {
    if let Ok(raw) = std::env::var("FRNS_THREADS") {
        let n: usize = raw
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .with_context(|| format!("FRNS_THREADS must be a positive integer, got '{raw}'"))?;
        // A second initialization (tests call this repeatedly) is harmless.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// params
// ---------------------------------------------------------------------------

fn cmd_params(s: f64, q: f64, eta: f64) -> Result<ExitCode> {
    let p = solve_scaling(s, q)?;
    let d_max = delta_max(s, q)?;
    let identity = theta_p_identity(s, q)?;
    let chain = derive_params(s, q, eta, 1.0)?;

    println!("{:<22}{}", "quantity", "value");
    let row = |name: &str, value: f64| println!("{:<22}{}", name, fmt(value));
    row("s", s);
    row("q", q);
    row("eta", eta);
    row("p", p);
    row("delta_max", d_max);
    row("theta", chain.theta);
    row("alpha", chain.alpha);
    row("mu", chain.mu);
    row("gamma", chain.gamma);
    row("theta_p", identity.product);
    println!(
        "{:<22}{}",
        "theta_p_equals_2",
        if identity.holds { "yes" } else { "no" }
    );
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

/// Plain CSV emission: one header row, then the data rows.
fn write_rows<I>(path: &Path, header: &[String], rows: I) -> std::io::Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()
}

/// Column label for a moment order: `s2` for integers, `s2.5` otherwise.
fn order_label(p: f64) -> String {
    if p.fract() == 0.0 {
        format!("s{}", p as i64)
    } else {
        format!("s{p}")
    }
}

/// Monitor writing one shell-spectrum CSV per sample.
struct SpectraWriter {
    dir: PathBuf,
    nu: f64,
    order: FracOrder,
    idx: usize,
}

impl SpectraWriter {
    fn new(dir: PathBuf, nu: f64, order: FracOrder) -> std::io::Result<Self> {
        std::fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            nu,
            order,
            idx: 0,
        })
    }
}

impl Monitor for SpectraWriter {
    fn sample(
        &mut self,
        t: f64,
        u: &SpectralField,
        _phys: &PhysicalField,
        rec: &mut DiagnosticRecord,
    ) -> frns_core::Result<()> {
        let mut sp = shell_spectrum(u, self.nu, self.order)?;
        sp.attach_transfer(u);
        rec.extras.insert("diss_rate".to_string(), sp.eps);
        let header: Vec<String> = ["t", "k", "e_k", "t_k", "pi_k"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let rows = sp.k.iter().enumerate().map(|(i, &k)| {
            vec![
                fmt(t),
                format!("{k}"),
                fmt(sp.e_k[i]),
                fmt(sp.t_k[i]),
                fmt(sp.pi_k[i]),
            ]
        });
        write_rows(
            &self.dir.join(format!("spec_{:06}.csv", self.idx)),
            &header,
            rows,
        )?;
        self.idx += 1;
        Ok(())
    }
}

/// Monitor writing one structure-function CSV per sample.
struct StructureWriter {
    dir: PathBuf,
    orders: Vec<f64>,
    max_r: usize,
    idx: usize,
}

impl StructureWriter {
    fn new(dir: PathBuf, orders: Vec<f64>, max_r: usize) -> std::io::Result<Self> {
        std::fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            orders,
            max_r,
            idx: 0,
        })
    }
}

impl Monitor for StructureWriter {
    fn sample(
        &mut self,
        t: f64,
        _u: &SpectralField,
        phys: &PhysicalField,
        _rec: &mut DiagnosticRecord,
    ) -> frns_core::Result<()> {
        let sf = structure_functions(phys, &self.orders, self.max_r)?;
        let mut header = vec!["t".to_string(), "r".to_string()];
        header.extend(self.orders.iter().map(|&p| order_label(p)));
        let rows = (0..sf.r.len()).map(|j| {
            let mut row = vec![fmt(t), fmt(sf.r[j])];
            row.extend(sf.s_p.iter().map(|col| fmt(col[j])));
            row
        });
        write_rows(
            &self.dir.join(format!("struct_{:06}.csv", self.idx)),
            &header,
            rows,
        )?;
        self.idx += 1;
        Ok(())
    }
}

fn cmd_simulate(config_path: &Path, resume: Option<&Path>) -> Result<ExitCode> {
    let cfg = RunConfig::load(config_path)?;
    let spec = cfg.box_spec()?;
    let params = cfg.criterion_params()?;
    let solver_cfg = cfg.solver_config();
    let out_dir = PathBuf::from(&cfg.outputs.directory);
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("cannot create run directory {}", out_dir.display()))?;

    let (u0, t0, resumed_from) = match resume {
        Some(path) => {
            let (phys, t) = read_checkpoint(path)?;
            if phys.box_spec() != spec {
                bail!(
                    "checkpoint grid n = {} does not match the configured n = {}",
                    phys.box_spec().n(),
                    cfg.grid.n
                );
            }
            (
                SpectralField::from_physical(&phys),
                t,
                Some(path.display().to_string()),
            )
        }
        None => (
            make_initial(spec, &cfg.init_spec(), cfg.solver.seed)?,
            0.0,
            None,
        ),
    };
    if solver_cfg.t_end <= t0 {
        bail!(
            "resume time {} is not before the configured t_end = {}",
            t0,
            solver_cfg.t_end
        );
    }

    let smallness = smallness_check(&u0, &params, cfg.criterion.c0)?;

    let mut crit_mon = CriterionMonitor::new(params)?;
    let mut decay_mon = DecayMonitor::new(cfg.criterion.s)?;
    let mut spectra_mon = if cfg.outputs.emit_spectra {
        Some(SpectraWriter::new(
            out_dir.join("spectra"),
            cfg.solver.nu,
            FracOrder::new(cfg.criterion.s)?,
        )?)
    } else {
        None
    };
    let mut structure_mon = if cfg.outputs.emit_structure {
        Some(StructureWriter::new(
            out_dir.join("structure"),
            cfg.outputs.structure_orders.clone(),
            cfg.grid.n / 2 - 1,
        )?)
    } else {
        None
    };

    let opts = RunOptions {
        checkpoint_dir: Some(out_dir.join("checkpoints")),
        checkpoint_every: cfg.outputs.checkpoint_every,
    };

    let output = {
        let mut monitors: Vec<&mut dyn Monitor> = vec![&mut crit_mon, &mut decay_mon];
        if let Some(m) = spectra_mon.as_mut() {
            monitors.push(m);
        }
        if let Some(m) = structure_mon.as_mut() {
            monitors.push(m);
        }
        run(u0, t0, &solver_cfg, &mut monitors, &opts)?
    };

    write_diagnostics(&out_dir.join("diagnostics.csv"), &output.records)?;

    let envelope = match envelope_report(
        decay_mon.samples(),
        cfg.criterion.s,
        cfg.criterion.q,
        cfg.criterion.eta,
        0.1,
    ) {
        Ok(rep) => json!({
            "c_fit": rep.c_fit,
            "beta": rep.beta,
            "ok_fraction": rep.ok_fraction,
            "first_violation": rep.first_violation,
            "calibration_len": rep.calibration_len,
        }),
        Err(_) => serde_json::Value::Null,
    };

    let config_toml = cfg.canonical_toml()?;
    let config_sha = cfg.sha256()?;
    let version = env!("CARGO_PKG_VERSION");
    let manifest = json!({
        "tool": "frns",
        "version": version,
        "stamp": format!("{}-{}", version, &config_sha[..12]),
        "config_sha256": config_sha,
        "config_toml": config_toml,
        "config_path": config_path.display().to_string(),
        "resumed_from": resumed_from,
        "t_initial": t0,
        "t_final": output.t_final,
        "status": match output.status {
            RunStatus::Completed => "completed",
            RunStatus::BlowUp { .. } => "blow_up",
        },
        "blow_up": match output.status {
            RunStatus::BlowUp { t, sup } => json!({ "t": t, "sup": sup }),
            RunStatus::Completed => serde_json::Value::Null,
        },
        "records": output.records.len(),
        "energy_ok": output.energy_ok,
        "energy_max_ratio": output.energy_max_ratio,
        "smallness": {
            "lhs": smallness.lhs,
            "rhs": smallness.rhs,
            "holds": smallness.holds,
        },
        "criterion_integral": crit_mon.state().integral,
        "envelope": envelope,
        "warnings": output.warnings,
    });
    std::fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;

    println!(
        "smallness condition: lhs = {}, rhs = {}, holds = {}",
        fmt(smallness.lhs),
        fmt(smallness.rhs),
        smallness.holds
    );
    println!(
        "criterion integral over [{}, {}]: {}",
        fmt(t0),
        fmt(output.t_final),
        fmt(crit_mon.state().integral)
    );
    match output.status {
        RunStatus::Completed => {
            println!(
                "run complete: t = {}, {} records, energy inequality {}",
                fmt(output.t_final),
                output.records.len(),
                if output.energy_ok { "ok" } else { "VIOLATED" }
            );
            println!("outputs: {}", out_dir.display());
            Ok(ExitCode::SUCCESS)
        }
        RunStatus::BlowUp { t, sup } => {
            eprintln!(
                "blow-up detected at t = {}: sup |u| = {}; diagnostics written to {}",
                fmt(t),
                fmt(sup),
                out_dir.display()
            );
            Ok(ExitCode::from(3))
        }
    }
}

/// Writes the diagnostic series: fixed columns, then every monitor
/// column in sorted order, then the per-row energy verdict.
fn write_diagnostics(path: &Path, records: &[DiagnosticRecord]) -> Result<()> {
    let extra_names: BTreeSet<&str> = records
        .iter()
        .flat_map(|r| r.extras.keys().map(String::as_str))
        .collect();
    let mut header: Vec<String> = ["t", "energy", "grad_sq", "sup", "energy_lhs"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(extra_names.iter().map(|s| s.to_string()));
    header.push("energy_ok".to_string());

    let e0 = records.first().map(|r| r.energy).unwrap_or(0.0);
    let rows = records.iter().map(|r| {
        let mut row = vec![
            fmt(r.t),
            fmt(r.energy),
            fmt(r.grad_sq),
            fmt(r.sup),
            fmt(r.energy_lhs),
        ];
        for name in &extra_names {
            row.push(r.extras.get(*name).map(|&v| fmt(v)).unwrap_or_default());
        }
        row.push(
            (r.energy_lhs <= e0 * (1.0 + ENERGY_TOLERANCE))
                .to_string(),
        );
        row
    });
    write_rows(path, &header, rows).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

fn cmd_analyze(args: AnalyzeArgs) -> Result<ExitCode> {
    // Spectrum-file route: fit the model to tabulated shells and stop.
    if let Some(file) = &args.spectrum_file {
        let (k, e_k) = csvio::read_spectrum_csv(file)?;
        let eps = args
            .eps
            .context("--spectrum-file needs --eps, the dissipation rate of the spectrum")?;
        if !(args.nu > 0.0) {
            bail!("--spectrum-file fitting needs --nu > 0 for the dissipation wavenumber");
        }
        let len = k.len();
        let sp = ShellSpectrum {
            k,
            e_k,
            t_k: vec![0.0; len],
            pi_k: vec![0.0; len],
            eps,
            frac_moment: 0.0,
            s: args.s,
            nu: args.nu,
        };
        let fit = fit_spectrum_model(&sp, args.k0 as f64, args.delta)?;
        let summary = json!({
            "fit": {
                "c_kolm": fit.c_kolm,
                "beta_t": fit.beta_t,
                "residual": fit.residual,
                "band": [fit.band.0, fit.band.1],
            }
        });
        println!("{}", serde_json::to_string_pretty(&summary)?);
        return Ok(ExitCode::SUCCESS);
    }

    let ck_path = args
        .checkpoint
        .as_deref()
        .context("a checkpoint path (or --spectrum-file) is required")?;
    let (phys, t) = read_checkpoint(ck_path)?;
    let u = SpectralField::from_physical(&phys);
    let n = phys.box_spec().n();

    let out_dir = match &args.out {
        Some(dir) => dir.clone(),
        None => {
            let stem = ck_path
                .file_stem()
                .map(|s| s.to_string_lossy().to_string())
                .unwrap_or_else(|| "checkpoint".to_string());
            ck_path
                .parent()
                .unwrap_or_else(|| Path::new("."))
                .join(format!("{stem}_analysis"))
        }
    };
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("cannot create {}", out_dir.display()))?;

    let any = args.spectra || args.flux || args.structure || args.lim || args.fit || args.tail;
    let all = args.all;
    let do_spectra = all || args.spectra || !any;
    let do_flux = all || args.flux;
    let do_structure = all || args.structure;
    let do_lim = all || args.lim;
    let do_fit = all || args.fit;
    let do_tail = all || args.tail;

    let mut summary = serde_json::Map::new();
    summary.insert("checkpoint".into(), json!(ck_path.display().to_string()));
    summary.insert("t".into(), json!(t));
    summary.insert("n".into(), json!(n));

    let mut spectrum = None;
    if do_spectra || do_flux || do_fit {
        let mut sp = shell_spectrum(&u, args.nu, FracOrder::new(args.s)?)?;
        sp.attach_transfer(&u);
        summary.insert("eps".into(), json!(sp.eps));
        summary.insert("frac_moment".into(), json!(sp.frac_moment));
        spectrum = Some(sp);
    }

    if do_spectra {
        let sp = spectrum.as_ref().expect("computed above");
        let header: Vec<String> = ["k", "e_k", "t_k", "pi_k"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let rows = sp.k.iter().enumerate().map(|(i, &k)| {
            vec![
                format!("{k}"),
                fmt(sp.e_k[i]),
                fmt(sp.t_k[i]),
                fmt(sp.pi_k[i]),
            ]
        });
        write_rows(&out_dir.join("spectrum.csv"), &header, rows)?;
    }

    if do_flux {
        let sp = spectrum.as_ref().expect("computed above");
        let report = flux_deviation_bound(&sp.pi_k, sp.eps, args.k0, args.s, args.delta)
            .context("flux deviation bound (is --nu set to the run's viscosity?)")?;
        let header = vec!["k".to_string(), "deviation_ratio".to_string()];
        let rows = report
            .ratios
            .iter()
            .map(|&(k, r)| vec![format!("{k}"), fmt(r)]);
        write_rows(&out_dir.join("flux.csv"), &header, rows)?;
        summary.insert(
            "flux".into(),
            json!({
                "c_max": report.c_max,
                "k_at_max": report.k_at_max,
                "weight_exponent": report.weight_exponent,
            }),
        );
    }

    if do_structure {
        let max_r = args.max_r.unwrap_or(n / 2 - 1);
        let sf = structure_functions(&phys, &args.orders, max_r)?;
        let mut header = vec!["r".to_string()];
        header.extend(args.orders.iter().map(|&p| order_label(p)));
        let rows = (0..sf.r.len()).map(|j| {
            let mut row = vec![fmt(sf.r[j])];
            row.extend(sf.s_p.iter().map(|col| fmt(col[j])));
            row
        });
        write_rows(&out_dir.join("structure.csv"), &header, rows)?;
    }

    let mut lim_values: Option<Vec<f64>> = None;
    if do_lim || do_tail {
        let lim = lim_field(&phys, args.sep)?;
        summary.insert("lim_degenerate".into(), json!(lim.degenerate));
        lim_values = Some(lim.values.iter().cloned().collect());
        if do_lim {
            let values = lim.values;
            let flat = lim_values.as_ref().expect("filled above");
            let header = vec!["threshold".to_string(), "fraction".to_string()];
            let mut rows = Vec::new();
            let mut fractions = serde_json::Map::new();
            for &thr in &args.thresholds {
                let (_, fraction) = exceptional_set(&values, thr)?;
                rows.push(vec![fmt(thr), fmt(fraction)]);
                fractions.insert(format!("{thr}"), json!(fraction));
            }
            write_rows(&out_dir.join("lim.csv"), &header, rows)?;
            let mut quantiles = serde_json::Map::new();
            for &q in &[0.5, 0.9, 0.99, 0.999] {
                quantiles.insert(format!("{q}"), json!(quantile(flat, q)?));
            }
            summary.insert(
                "lim".into(),
                json!({ "fractions": fractions, "quantiles": quantiles }),
            );
        }
    }

    if do_tail {
        let flat = lim_values.as_ref().expect("computed above");
        let fit = tail_fit(flat, args.delta)?;
        summary.insert(
            "tail".into(),
            json!({
                "c": fit.c,
                "c_rate": fit.c_rate,
                "residual": fit.residual,
                "degenerate": fit.degenerate,
            }),
        );
    }

    if do_fit {
        let sp = spectrum.as_ref().expect("computed above");
        let fit = fit_spectrum_model(sp, args.k0 as f64, args.delta)
            .context("spectrum-model fit (is --nu set to the run's viscosity?)")?;
        summary.insert(
            "fit".into(),
            json!({
                "c_kolm": fit.c_kolm,
                "beta_t": fit.beta_t,
                "residual": fit.residual,
                "band": [fit.band.0, fit.band.1],
            }),
        );
    }

    let summary = serde_json::Value::Object(summary);
    std::fs::write(
        out_dir.join("analysis.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

fn cmd_verify(suite: &str, report_dir: Option<&Path>) -> Result<ExitCode> {
    match verify::run_suites(suite, report_dir)? {
        None => {
            eprintln!(
                "unknown suite '{suite}'; available: multifractal, interpolation, \
                 commutator, osgood, all"
            );
            Ok(ExitCode::from(2))
        }
        Some(reports) => {
            println!("{}", serde_json::to_string_pretty(&reports)?);
            Ok(ExitCode::from(verify::verdict_code(&reports)))
        }
    }
}
