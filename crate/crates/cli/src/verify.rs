//! Verification suites: identity and inequality checks over fixed
//! ensembles, reported as machine-readable JSON.
//!
//! Every check is a measured quantity against a bound; pinned regression
//! constants stand in for analytic constants nothing fixes numerically.
//! A suite passing confirms the implementation still reproduces its
//! oracles and its frozen empirical constants, nothing stronger.

use std::path::Path;

use anyhow::Result;
use rayon::prelude::*;
use serde::Serialize;

use frns_core::commutator::{
    default_sigma, lemma21_report, lemma31_report, LEMMA31_ENSEMBLE_RATIO_MAX,
};
use frns_core::decay::{comparison_ode, osgood_bound};
use frns_core::fracops::{gn_ratio, interpolation_ratio, FracOrder};
use frns_core::grid::{random_smooth_field, BoxSpec, ScalarField};
use frns_core::turbulence::{legendre_zeta, zeta_p, MultifractalParams};

use crate::csvio::{fmt, Csv};

/// Empirical torus constant of the fractional Gagliardo-Nirenberg
/// inequality at order 0.75, q = 6, over the standard suite ensemble
/// (10 fields, n = 32, spectral decay exp(-0.15 |k|^2), seeds 100..110).
const GN_ENSEMBLE_PIN: f64 = 1.13438085972768637e-1;

/// One measured quantity against its bound.
#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    /// The quantity the bound applies to (an error, a ratio maximum, ...).
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
    /// Underlying raw value when the measured quantity is a deviation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

impl Check {
    fn bounded(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            bound,
            pass: measured.is_finite() && measured <= bound,
            value: None,
        }
    }

    fn pinned(name: impl Into<String>, value: f64, pin: f64, rel_tol: f64) -> Self {
        let measured = (value - pin).abs() / pin.abs();
        Self {
            name: name.into(),
            measured,
            bound: rel_tol,
            pass: measured.is_finite() && measured <= rel_tol,
            value: Some(value),
        }
    }
}

/// All checks of one named suite.
#[derive(Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub pass: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: &str, checks: Vec<Check>) -> Self {
        Self {
            suite: suite.to_string(),
            pass: checks.iter().all(|c| c.pass),
            checks,
        }
    }
}

/// Process exit code for a set of suite reports: 0 when everything
/// passed, 1 when any check failed.
pub fn verdict_code(reports: &[SuiteReport]) -> u8 {
    if reports.iter().all(|r| r.pass) {
        0
    } else {
        1
    }
}

/// Runs one suite by name, or every suite for "all". `None` means the
/// name is unknown (a usage error, not a verification failure).
pub fn run_suites(name: &str, report_dir: Option<&Path>) -> Result<Option<Vec<SuiteReport>>> {
    let reports = match name {
        "multifractal" => vec![multifractal()?],
        "interpolation" => vec![interpolation()?],
        "commutator" => vec![commutator_suite(report_dir)?],
        "osgood" => vec![osgood()?],
        "all" => vec![
            multifractal()?,
            interpolation()?,
            commutator_suite(report_dir)?,
            osgood()?,
        ],
        _ => return Ok(None),
    };
    Ok(Some(reports))
}

/// Closed-form scaling exponents against their own Legendre transform,
/// and the exact third-order value.
fn multifractal() -> Result<SuiteReport> {
    let mut checks = Vec::new();
    for &s in &[0.6, 0.75, 0.9] {
        for &delta in &[0.01, 0.1, 0.5] {
            let params = MultifractalParams::new(s, delta)?;
            checks.push(Check::bounded(
                format!("zeta3_exact_s{s}_d{delta}"),
                (zeta_p(3.0, &params) - 1.0).abs(),
                1e-12,
            ));
            let mut worst = 0.0f64;
            let mut p = 0.0;
            while p <= 8.0 + 1e-9 {
                let direct = zeta_p(p, &params);
                let transformed = legendre_zeta(p, &params, 129)?;
                worst = worst.max((transformed - direct).abs());
                p += 0.5;
            }
            checks.push(Check::bounded(
                format!("legendre_transform_s{s}_d{delta}"),
                worst,
                1e-6,
            ));
        }
    }
    Ok(SuiteReport::new("multifractal", checks))
}

fn suite_ensemble(seed0: u64, count: u64, decay: f64) -> Vec<frns_core::grid::SpectralField> {
    let spec = BoxSpec::new(32).expect("valid grid");
    (seed0..seed0 + count)
        .into_par_iter()
        .map(|seed| random_smooth_field(spec, seed, decay))
        .collect()
}

/// Frequency-side interpolation (sharp constant 1) and the empirical
/// Gagliardo-Nirenberg constant.
fn interpolation() -> Result<SuiteReport> {
    let fields = suite_ensemble(100, 10, 0.15);
    let mut max_interp = 0.0f64;
    let mut max_gn = 0.0f64;
    let order = FracOrder::new(0.75)?;
    for u in &fields {
        for &(s1, s, s2) in &[(0.25, 0.6, 1.1), (0.2, 0.7, 1.3)] {
            max_interp = max_interp.max(interpolation_ratio(u, s1, s, s2)?);
        }
        max_gn = max_gn.max(gn_ratio(u, order, 6.0)?);
    }
    let checks = vec![
        Check::bounded("interpolation_ratio_max", max_interp, 1.0 + 1e-10),
        Check::pinned("gn_ratio_ensemble_max", max_gn, GN_ENSEMBLE_PIN, 1e-9),
    ];
    Ok(SuiteReport::new("interpolation", checks))
}

/// Commutator estimate ratios on fresh seeds against the pinned ensemble
/// maximum, plus the closed-form scalar commutator oracle.
fn commutator_suite(report_dir: Option<&Path>) -> Result<SuiteReport> {
    let s = 0.75;
    let sigma = default_sigma(s);
    let fields = suite_ensemble(5000, 10, 0.2);
    let reports = fields
        .par_iter()
        .map(|u| lemma31_report(u, s, sigma))
        .collect::<frns_core::Result<Vec<_>>>()?;

    if let Some(dir) = report_dir {
        let mut csv = Csv::create(
            &dir.join("commutator_ensemble.csv"),
            &["field_id", "lhs", "term_a", "term_b", "ratio"],
        )?;
        for (i, r) in reports.iter().enumerate() {
            csv.row(&[
                format!("{}", 5000 + i),
                fmt(r.lhs),
                fmt(r.term_a),
                fmt(r.term_b),
                fmt(r.ratio),
            ])?;
        }
        csv.finish()?;
    }

    let max_ratio = reports.iter().fold(0.0f64, |m, r| m.max(r.ratio));
    let all_finite = reports
        .iter()
        .all(|r| r.lhs.is_finite() && r.term_a.is_finite() && r.term_b.is_finite());

    let spec = BoxSpec::new(16)?;
    let f = ScalarField::from_fn(spec, |x| x[0].sin());
    let scalar = lemma21_report(&f, &f.clone(), s)?;
    let scalar_exact = (0.5 + (1.0 - 4.0f64.powf(s)).powi(2) / 4.0).sqrt();

    let checks = vec![
        Check::bounded(
            "fresh_seed_ratio_max_vs_2x_pin",
            max_ratio,
            2.0 * LEMMA31_ENSEMBLE_RATIO_MAX,
        ),
        Check::bounded("report_entries_finite", if all_finite { 0.0 } else { 1.0 }, 0.5),
        Check::pinned(
            "scalar_commutator_sine_ratio",
            scalar.ratio,
            scalar_exact,
            1e-12,
        ),
    ];
    Ok(SuiteReport::new("commutator", checks))
}

/// Fourth-order integration of the saturated logarithmic ODE
/// `rho' = g rho ln(e + rho)`; the bound evaluator must reproduce it.
fn integrate_log_ode(rho0: f64, g: f64, t_end: f64, steps: usize) -> f64 {
    let f = |r: f64| g * r * (std::f64::consts::E + r).ln();
    let dt = t_end / steps as f64;
    let mut r = rho0;
    for _ in 0..steps {
        let k1 = f(r);
        let k2 = f(r + 0.5 * dt * k1);
        let k3 = f(r + 0.5 * dt * k2);
        let k4 = f(r + dt * k3);
        r += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    r
}

/// The comparison ODE closed form and the Osgood bound against
/// independent finite-difference / time-integration oracles.
fn osgood() -> Result<SuiteReport> {
    let mut checks = Vec::new();

    // Z(t) must satisfy Z' = c Z^{1+mu} by central differences.
    let (y0, mu, c) = (0.5, 0.7, 1.2);
    let mut worst = 0.0f64;
    for &t in &[0.2, 0.8, 1.5] {
        let h = 1e-6;
        let dz = (comparison_ode(y0, mu, c, t + h)? - comparison_ode(y0, mu, c, t - h)?)
            / (2.0 * h);
        let rhs = c * comparison_ode(y0, mu, c, t)?.powf(1.0 + mu);
        worst = worst.max((dz - rhs).abs() / rhs);
    }
    checks.push(Check::bounded("comparison_ode_derivative", worst, 1e-6));

    // The bound evaluator equals the saturated trajectory.
    let mut worst = 0.0f64;
    for &(rho0, g) in &[(0.5, 0.3), (0.5, 1.0), (2.0, 0.3), (2.0, 1.0)] {
        let oracle = integrate_log_ode(rho0, g, 1.0, 20_000);
        let bound = osgood_bound(rho0, g * 1.0)?;
        worst = worst.max((bound - oracle).abs() / oracle);
    }
    checks.push(Check::bounded("osgood_bound_vs_ode", worst, 1e-6));

    Ok(SuiteReport::new("osgood", checks))
}
