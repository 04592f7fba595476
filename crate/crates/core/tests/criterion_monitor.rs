//! Oracle check for the regularity monitor: on the exactly solvable
//! single-mode shear flow, the trapezoid-accumulated integral must match
//! an independent 1D quadrature of the closed-form integrand.

use frns_core::criterion::{integrand_of_norm, CriterionMonitor, CriterionParams};
use frns_core::grid::{BoxSpec, VOLUME};
use frns_core::solver::{make_initial, run, InitSpec, Monitor, RunOptions, Scheme, SolverConfig};

/// Composite Simpson on a fixed grid; deliberately independent of the
/// library's quadrature code.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    assert!(intervals % 2 == 0);
    let h = (b - a) / intervals as f64;
    let mut acc = f(a) + f(b);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

#[test]
fn monitor_integral_matches_closed_form_quadrature() {
    let spec = BoxSpec::new(16).unwrap();
    let nu = 0.1;
    let t_end = 2.0;
    let params = CriterionParams::new(0.75, 12.0, 0.05, 0.01, nu).unwrap();

    let u0 = make_initial(spec, &InitSpec::shear(1.0), 0).unwrap();
    let mut monitor = CriterionMonitor::new(params).unwrap();
    let cfg = SolverConfig {
        nu,
        dt: 1e-3,
        t_end,
        scheme: Scheme::Rk4IntegratingFactor,
        output_every: 2,
        seed: 0,
    };
    let out = run(
        u0,
        0.0,
        &cfg,
        &mut [&mut monitor as &mut dyn Monitor],
        &RunOptions::default(),
    )
    .unwrap();
    assert!(out.energy_ok);
    let state = monitor.into_state();
    assert_eq!(state.samples.len(), 1001);

    // Closed form: the |k| = 1 mode decays as exp(-nu t), the fractional
    // multiplier is 1, and ||sin||_{L^12}^12 = V * 231/1024 exactly.
    let x0 = (VOLUME * 231.0 / 1024.0).powf(1.0 / 12.0);
    let exact = |t: f64| integrand_of_norm(x0 * (-nu * t).exp(), params.p, params.delta);
    let oracle = simpson(exact, 0.0, t_end, 20_000);

    let rel = ((state.integral - oracle) / oracle).abs();
    assert!(
        rel < 1e-6,
        "monitor integral {:.12e} vs quadrature oracle {:.12e} (rel {rel:.3e})",
        state.integral,
        oracle
    );

    // Sublinear late-time growth: the second half contributes less than
    // the first (decaying integrand).
    let mid = state
        .samples
        .iter()
        .position(|&(t, _)| t >= 1.0)
        .unwrap();
    let first_half: f64 = state.samples[..=mid]
        .windows(2)
        .map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0))
        .sum();
    let second_half = state.integral - first_half;
    assert!(
        second_half < first_half,
        "integral growth not sublinear: {second_half} vs {first_half}"
    );
}
