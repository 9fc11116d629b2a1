//! Small quadrature toolbox: adaptive Simpson for 1D integrals with smooth
//! integrands, Gauss-Legendre rules for fixed-cost inner loops.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("adaptive quadrature failed to reach tolerance (depth limit {0})")]
    DepthExceeded(usize),
    #[error("non-finite integrand value at x = {0}")]
    NonFinite(f64),
}

/// Adaptive Simpson integration of `f` over `[a, b]`.
///
/// The acceptance test mixes the caller's absolute tolerance with a rounding
/// floor tied to the global scale of the integral, so subintervals where the
/// integrand is negligible relative to that scale cannot recurse forever on
/// floating-point noise.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64, QuadError> {
    const MAX_DEPTH: usize = 48;
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    if !fa.is_finite() || !fb.is_finite() || !fm.is_finite() {
        return Err(QuadError::NonFinite(if fa.is_finite() { m } else { a }));
    }
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let floor = whole.abs() * 1e-15;
    simpson_rec(f, a, b, fa, fm, fb, whole, rel_tol, abs_tol, floor, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    rel_tol: f64,
    abs_tol: f64,
    floor: f64,
    depth: usize,
) -> Result<f64, QuadError> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    if !flm.is_finite() || !frm.is_finite() {
        return Err(QuadError::NonFinite(if flm.is_finite() { rm } else { lm }));
    }
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    let tol = abs_tol.max(floor) + rel_tol * (left + right).abs();
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(QuadError::DepthExceeded(48));
    }
    let half_abs = (abs_tol / 2.0).max(floor);
    let l = simpson_rec(f, a, m, fa, flm, fm, left, rel_tol, half_abs, floor, depth - 1)?;
    let r = simpson_rec(f, m, b, fm, frm, fb, right, rel_tol, half_abs, floor, depth - 1)?;
    Ok(l + r)
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence. Deterministic and accurate to machine precision.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Fixed-order Gauss-Legendre integral of `f` over `[a, b]`.
pub fn integrate_gl<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, nodes: &[f64], weights: &[f64]) -> f64 {
    let c = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (&x, &w) in nodes.iter().zip(weights) {
        acc += w * f(mid + c * x);
    }
    acc * c
}
