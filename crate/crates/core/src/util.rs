//! Small shared numerics: adaptive quadrature, line search, least squares.

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance
/// `tol`. The integrand must be finite on the interval.
pub(crate) fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 48)
}

/// Golden-section minimization of a unimodal `f` on `[a, b]`.
/// Returns the abscissa of the minimum to absolute tolerance `tol`.
pub(crate) fn golden_section_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi: f64 = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Ordinary least squares fit `y = intercept + slope * x`.
/// Returns `(intercept, slope, rms_residual)`; `degenerate` is true when
/// the predictor has (numerically) zero variance.
pub(crate) struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub rms_residual: f64,
    pub degenerate: bool,
}

pub(crate) fn fit_line(x: &[f64], y: &[f64]) -> LineFit {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y.iter()) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    let scale = x.iter().map(|v| v * v).sum::<f64>() / n;
    if sxx <= 1e-24 * scale.max(1e-300) {
        return LineFit {
            intercept: my,
            slope: 0.0,
            rms_residual: 0.0,
            degenerate: true,
        };
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss = x
        .iter()
        .zip(y.iter())
        .map(|(&xi, &yi)| {
            let r = yi - intercept - slope * xi;
            r * r
        })
        .sum::<f64>();
    LineFit {
        intercept,
        slope,
        rms_residual: (ss / n).sqrt(),
        degenerate: false,
    }
}

/// Vertex abscissa of the parabola through three points; falls back to the
/// middle point when the points are collinear.
pub(crate) fn parabolic_vertex(x0: f64, y0: f64, x1: f64, y1: f64, x2: f64, y2: f64) -> f64 {
    let d1 = (x1 - x0) * (y1 - y2);
    let d2 = (x1 - x2) * (y1 - y0);
    let denom = 2.0 * (d1 - d2);
    if denom == 0.0 {
        return x1;
    }
    x1 - ((x1 - x0) * d1 - (x1 - x2) * d2) / denom
}
