//! Run configuration: a sectioned TOML file whose load step re-validates
//! every module-level constraint, so a config that loads is a config that
//! runs. Serialization is canonical (fixed section and key order), which
//! makes the stored hash in a run manifest reproducible.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use frns_core::criterion::CriterionParams;
use frns_core::grid::BoxSpec;
use frns_core::solver::{InitSpec, Scheme, SolverConfig};

/// Complete description of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSection,
    pub solver: SolverSection,
    pub criterion: CriterionSection,
    pub init: InitSection,
    pub outputs: OutputsSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Samples per axis; a power of two, at least 16.
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub nu: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Diagnostics cadence in steps.
    pub output_every: usize,
    /// Seed for stochastic initial data; part of the config so a run is
    /// fully determined by this file.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriterionSection {
    pub s: f64,
    pub q: f64,
    pub delta: f64,
    pub eta: f64,
    /// Constant of the small-data condition evaluated on the initial
    /// state; reported, never enforced.
    pub c0: f64,
}

/// Initial-data family names as they appear in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKindName {
    TaylorGreen,
    Shear,
    RandomSpectrum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSection {
    pub kind: InitKindName,
    pub amplitude: f64,
    /// Spectral slope above the peak; only `random_spectrum` reads it.
    #[serde(default)]
    pub spectrum_slope: f64,
    /// Peak wavenumber; only `random_spectrum` reads it.
    #[serde(default)]
    pub peak_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    /// Run directory; created if missing.
    pub directory: String,
    pub emit_spectra: bool,
    pub emit_structure: bool,
    /// Moment orders for the structure-function files.
    #[serde(default)]
    pub structure_orders: Vec<f64>,
    /// Periodic checkpoint cadence in samples; 0 keeps only the final
    /// checkpoint.
    #[serde(default)]
    pub checkpoint_every: usize,
}

impl RunConfig {
    /// Reads and validates a config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: RunConfig = toml::from_str(&text)
            .with_context(|| format!("cannot parse config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Re-checks every module-level invariant the run will rely on, so
    /// failures surface at load time with the constraint spelled out.
    pub fn validate(&self) -> Result<()> {
        self.box_spec()?;
        self.solver_config().validate()?;
        // Validates s, q, the scaling relation, eta, and in particular
        // delta against its admissible window min{(q-3)/(6q), (2s-1)/(4s)}.
        self.criterion_params()?;
        if !self.criterion.c0.is_finite() || self.criterion.c0 <= 0.0 {
            bail!(
                "smallness constant c0 must be positive and finite, got {}",
                self.criterion.c0
            );
        }
        if !self.init.amplitude.is_finite() || self.init.amplitude == 0.0 {
            bail!(
                "initial amplitude must be finite and nonzero, got {}",
                self.init.amplitude
            );
        }
        if self.init.kind == InitKindName::RandomSpectrum {
            let n = self.grid.n as f64;
            if !(self.init.peak_k >= 1.0 && 3.0 * self.init.peak_k < n) {
                bail!(
                    "random spectrum needs 1 <= peak_k and 3 peak_k < n, \
                     got peak_k = {} on an n = {} grid",
                    self.init.peak_k,
                    self.grid.n
                );
            }
        }
        if self.outputs.emit_structure {
            if self.outputs.structure_orders.is_empty() {
                bail!("emit_structure = true needs a nonempty structure_orders list");
            }
            if let Some(p) = self
                .outputs
                .structure_orders
                .iter()
                .find(|p| !p.is_finite() || **p <= 0.0)
            {
                bail!("structure orders must be positive and finite, got {p}");
            }
        }
        if self.outputs.directory.is_empty() {
            bail!("outputs.directory must not be empty");
        }
        Ok(())
    }

    pub fn box_spec(&self) -> Result<BoxSpec> {
        Ok(BoxSpec::new(self.grid.n)?)
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            nu: self.solver.nu,
            dt: self.solver.dt,
            t_end: self.solver.t_end,
            scheme: Scheme::Rk4IntegratingFactor,
            output_every: self.solver.output_every,
            seed: self.solver.seed,
        }
    }

    pub fn criterion_params(&self) -> Result<CriterionParams> {
        Ok(CriterionParams::new(
            self.criterion.s,
            self.criterion.q,
            self.criterion.delta,
            self.criterion.eta,
            self.solver.nu,
        )?)
    }

    pub fn init_spec(&self) -> InitSpec {
        match self.init.kind {
            InitKindName::TaylorGreen => InitSpec::taylor_green(self.init.amplitude),
            InitKindName::Shear => InitSpec::shear(self.init.amplitude),
            InitKindName::RandomSpectrum => InitSpec::random_spectrum(
                self.init.amplitude,
                self.init.spectrum_slope,
                self.init.peak_k,
            ),
        }
    }

    /// Canonical serialization: fixed section order, shortest
    /// float representation that round-trips.
    pub fn canonical_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn sha256(&self) -> Result<String> {
        Ok(sha256_hex(self.canonical_toml()?.as_bytes()))
    }
}

/// Hex SHA-256 of arbitrary bytes.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}
