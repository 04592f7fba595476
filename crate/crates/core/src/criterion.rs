//! Scale-critical regularity monitoring.
//!
//! The monitored quantity is the time integral of
//!
//! ```text
//!     X(t)^p (1 + ln(e + X(t)))^{-delta},     X(t) = ||(-Lap)^s u(t)||_{L^q},
//! ```
//!
//! where the exponent pair `(p, q)` is tied to the fractional order by
//! the scaling relation `2/p + 3/q = 2s - 1`.  Finiteness of this
//! integral is the regularity signal the monitor reports; the
//! logarithmic weight makes the condition strictly weaker than the
//! unweighted critical one for any `delta` in the admissible window
//! `(0, delta_max)` with `delta_max = min{(q-3)/(6q), (2s-1)/(4s)}`.
//!
//! Natural logarithms throughout: the `e`-offset inside the weight only
//! makes sense in base `e`.
//!
//! [`theta_p_identity`] deserves a note.  The gradient-interpolation
//! weight is `theta = (3/2) q / (3q - 2)`, and one might expect
//! `theta * p = 2` at the scaling relation; direct substitution shows
//! the product generally differs from 2 (for example `s = 0.75, q = 12`
//! gives `theta * p ~ 4.235`).  The operation therefore returns the
//! computed product together with a flag instead of assuming the
//! identity, so the claim is data, not an axiom.

use crate::decay;
use crate::fracops::{frac_laplacian, lq_norm, sobolev_l2_norm, FracOrder};
use crate::grid::{PhysicalField, SpectralField};
use crate::solver::{DiagnosticRecord, Monitor};
use crate::{Error, Result};

/// Temporal exponent from the scaling relation `2/p + 3/q = 2s - 1`:
/// `p = 2 / (2s - 1 - 3/q)`.
///
/// Requires `s` in `(1/2, 1)` and `q > 3/(2s-1)`; at or below that
/// threshold the relation has no positive solution.
pub fn solve_scaling(s: f64, q: f64) -> Result<f64> {
    if !(s > 0.5 && s < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "fractional order s must lie in (1/2, 1), got {s}"
        )));
    }
    if !q.is_finite() || q <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "integrability exponent q must be positive and finite, got {q}"
        )));
    }
    // Pairs within roundoff of the critical line 2s - 1 = 3/q are
    // treated as on it: the nominal p would be astronomically large and
    // meaningless (e.g. s = 0.8, q = 5 lands at denom ~ 1e-16).
    let denom = 2.0 * s - 1.0 - 3.0 / q;
    if denom <= 1e-12 {
        return Err(Error::Domain(format!(
            "no positive temporal exponent: q = {q} is at or below the \
             scaling threshold 3/(2s-1) = {}",
            3.0 / (2.0 * s - 1.0)
        )));
    }
    Ok(2.0 / denom)
}

/// Upper edge of the admissible logarithmic improvement:
/// `delta_max = min{(q-3)/(6q), (2s-1)/(4s)}`.
pub fn delta_max(s: f64, q: f64) -> Result<f64> {
    if !(s > 0.5 && s < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "fractional order s must lie in (1/2, 1), got {s}"
        )));
    }
    if !q.is_finite() || q <= 3.0 {
        return Err(Error::InvalidParameter(format!(
            "integrability exponent q must lie in (3, inf), got {q}"
        )));
    }
    let first = (q - 3.0) / (6.0 * q);
    let second = (2.0 * s - 1.0) / (4.0 * s);
    Ok(first.min(second))
}

/// The product `theta * p` and whether it equals 2.
#[derive(Clone, Copy, Debug)]
pub struct ThetaPReport {
    /// Gradient interpolation weight `(3/2) q / (3q - 2)`.
    pub theta: f64,
    /// Temporal exponent from [`solve_scaling`].
    pub p: f64,
    /// The product `theta * p`.
    pub product: f64,
    /// True when `|theta p - 2| < 1e-10`.  Generally false; see the
    /// module notes.
    pub holds: bool,
}

/// Computes `theta * p` for the pair `(s, q)` and reports whether the
/// product equals 2; the claim is checked, never assumed.
pub fn theta_p_identity(s: f64, q: f64) -> Result<ThetaPReport> {
    let p = solve_scaling(s, q)?;
    let theta = 1.5 * q / (3.0 * q - 2.0);
    let product = theta * p;
    Ok(ThetaPReport {
        theta,
        p,
        product,
        holds: (product - 2.0).abs() < 1e-10,
    })
}

/// Validated parameter set for the regularity monitor.
#[derive(Clone, Copy, Debug)]
pub struct CriterionParams {
    /// Fractional order, in `(1/2, 1)`.
    pub s: f64,
    /// Spatial integrability exponent, in `(3, inf)` and above the
    /// scaling threshold `3/(2s-1)`.
    pub q: f64,
    /// Temporal exponent from the scaling relation.
    pub p: f64,
    /// Logarithmic improvement, in `(0, delta_max)`.
    pub delta: f64,
    /// Margin used by the decay chain; kept here so one parameter set
    /// describes a whole run.
    pub eta: f64,
    /// Kinematic viscosity.
    pub nu: f64,
}

impl CriterionParams {
    /// Derives `p` from the scaling relation and validates every
    /// constraint the monitor relies on.
    pub fn new(s: f64, q: f64, delta: f64, eta: f64, nu: f64) -> Result<Self> {
        let p = solve_scaling(s, q)?;
        let d_max = delta_max(s, q)?;
        if !(delta > 0.0 && delta < d_max) {
            return Err(Error::InvalidParameter(format!(
                "logarithmic exponent delta = {delta} outside the admissible \
                 window (0, {d_max}) = (0, min{{(q-3)/(6q), (2s-1)/(4s)}}) \
                 for s = {s}, q = {q}"
            )));
        }
        // The decay chain shares (s, q, eta); deriving it validates
        // eta > 0 and mu < 1.
        let chain = decay::derive_params(s, q, eta, 1.0)?;
        debug_assert!(chain.mu < 1.0);
        if !nu.is_finite() || nu <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "viscosity must be positive and finite, got {nu}"
            )));
        }
        let params = Self {
            s,
            q,
            p,
            delta,
            eta,
            nu,
        };
        debug_assert!(params.scaling_residual() < 1e-12);
        Ok(params)
    }

    /// `|2/p + 3/q - (2s - 1)|`; zero up to roundoff by construction.
    pub fn scaling_residual(&self) -> f64 {
        (2.0 / self.p + 3.0 / self.q - (2.0 * self.s - 1.0)).abs()
    }
}

/// The weighted integrand value for a given norm `x >= 0`:
/// `x^p (1 + ln(e + x))^{-delta}`.
pub fn integrand_of_norm(x: f64, p: f64, delta: f64) -> f64 {
    debug_assert!(x >= 0.0);
    x.powf(p) * (1.0 + (std::f64::consts::E + x).ln()).powf(-delta)
}

/// Evaluates the monitored integrand on a field:
/// `X = ||(-Lap)^s u||_{L^q}`, returns `X^p (1 + ln(e + X))^{-delta}`.
pub fn criterion_integrand(u: &SpectralField, params: &CriterionParams) -> Result<f64> {
    let order = FracOrder::new(params.s)?;
    let x = lq_norm(&frac_laplacian(u, order), params.q)?;
    Ok(integrand_of_norm(x, params.p, params.delta))
}

/// Running value of the regularity integral, accumulated by the
/// trapezoid rule over monitor samples.
#[derive(Clone, Debug, Default)]
pub struct CriterionState {
    /// The accumulated integral.
    pub integral: f64,
    /// Time of the last accepted sample.
    pub last_t: Option<f64>,
    last_value: f64,
    /// Every accepted `(t, integrand)` pair.
    pub samples: Vec<(f64, f64)>,
}

impl CriterionState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a sample, advancing the trapezoidal integral.  Time must
    /// strictly increase between samples; values must be nonnegative
    /// and finite.
    pub fn accumulate(&mut self, t: f64, value: f64) -> Result<()> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "integrand must be nonnegative and finite, got {value}"
            )));
        }
        if let Some(prev) = self.last_t {
            if t <= prev {
                return Err(Error::NonMonotoneTime { prev, next: t });
            }
            self.integral += 0.5 * (self.last_value + value) * (t - prev);
        }
        self.last_t = Some(t);
        self.last_value = value;
        self.samples.push((t, value));
        Ok(())
    }
}

/// Both sides of the small-data global regularity condition.
#[derive(Clone, Copy, Debug)]
pub struct SmallnessReport {
    /// `||(-Lap)^{s/2} u0||_{L^q}`.
    pub lhs: f64,
    /// `c0 / (1 + ln(e + ||u0||_{H^s}))^delta`.
    pub rhs: f64,
    /// `lhs <= rhs`.
    pub holds: bool,
}

/// Evaluates the smallness condition
/// `||(-Lap)^{s/2} u0||_{L^q} <= c0 / (1 + ln(e + ||u0||_{H^s}))^delta`
/// on initial data.  The constant `c0` is caller-supplied; nothing in
/// the analysis fixes it numerically.
pub fn smallness_check(
    u0: &SpectralField,
    params: &CriterionParams,
    c0: f64,
) -> Result<SmallnessReport> {
    if !c0.is_finite() || c0 <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "smallness constant c0 must be positive, got {c0}"
        )));
    }
    let half_order = FracOrder::new(params.s / 2.0)?;
    let lhs = lq_norm(&frac_laplacian(u0, half_order), params.q)?;
    let hs = sobolev_l2_norm(u0, FracOrder::new(params.s)?);
    let rhs = c0 / (1.0 + (std::f64::consts::E + hs).ln()).powf(params.delta);
    Ok(SmallnessReport {
        lhs,
        rhs,
        holds: lhs <= rhs,
    })
}

/// Run-loop observer accumulating the regularity integral.  Extras
/// columns: `frac_lq` (the norm X), `criterion_integrand`, and
/// `criterion_integral` (running value).
pub struct CriterionMonitor {
    params: CriterionParams,
    order: FracOrder,
    state: CriterionState,
}

impl CriterionMonitor {
    pub fn new(params: CriterionParams) -> Result<Self> {
        Ok(Self {
            params,
            order: FracOrder::new(params.s)?,
            state: CriterionState::new(),
        })
    }

    pub fn state(&self) -> &CriterionState {
        &self.state
    }

    pub fn into_state(self) -> CriterionState {
        self.state
    }
}

impl Monitor for CriterionMonitor {
    fn sample(
        &mut self,
        t: f64,
        u: &SpectralField,
        _phys: &PhysicalField,
        rec: &mut DiagnosticRecord,
    ) -> Result<()> {
        let x = lq_norm(&frac_laplacian(u, self.order), self.params.q)?;
        let value = integrand_of_norm(x, self.params.p, self.params.delta);
        self.state.accumulate(t, value)?;
        rec.extras.insert("frac_lq".to_string(), x);
        rec.extras.insert("criterion_integrand".to_string(), value);
        rec.extras
            .insert("criterion_integral".to_string(), self.state.integral);
        Ok(())
    }
}
