//! Finite-N conditional spacing-ratio density as a banded determinant.
//!
//! After conditioning the reference eigenvalue at the origin and integrating
//! out all but the NN/NNN pair, the remaining eigenvalues contribute a
//! determinant whose matrix is pentadiagonal for any rotationally invariant
//! weight: entries couple monomial indices only when the angular phases
//! cancel, which forces |j - k| <= 2. The determinant depends on the third
//! point only through its modulus, so its phase integral is trivial.
//!
//! Entries are kept well-scaled by a symmetric row/column normalization
//! absorbed into the a-posteriori density normalization, and the determinant
//! is accumulated in log magnitude, so matrix sizes of several hundred stay
//! inside f64 range.

use super::AnalyticError;
use crate::quad::adaptive_simpson;
use crate::specfun::{ln_gamma, regularized_gamma_q};
use num_complex::Complex64;

/// Rotationally invariant weight entering the radial moment integrals.
pub trait RadialWeight: Sync {
    /// ln of the weight at radius r.
    fn ln_weight(&self, r: f64) -> f64;
    /// Tail moment ∫_rho^∞ r^{2n-1} w(r) dr divided by its full-range scale;
    /// lies in [0, 1] and decreases in rho.
    fn tail_moment_regularized(&self, n: usize, rho: f64) -> f64;
    /// ln of the full-range scale ∫_0^∞ r^{2n-1} w(r) dr.
    fn ln_tail_scale(&self, n: usize) -> f64;
}

/// The Gaussian unit weight w(r) = exp(-r^2).
#[derive(Debug, Clone, Copy, Default)]
pub struct GaussianWeight;

impl RadialWeight for GaussianWeight {
    fn ln_weight(&self, r: f64) -> f64 {
        -r * r
    }

    fn tail_moment_regularized(&self, n: usize, rho: f64) -> f64 {
        regularized_gamma_q(n as f64, rho * rho).expect("valid gamma domain")
    }

    fn ln_tail_scale(&self, n: usize) -> f64 {
        ln_gamma(n as f64) - std::f64::consts::LN_2
    }
}

/// Phase-stripped expansion coefficients of |z~|^2 |z~ - z rho|^2 |z~ - rho|^2
/// in monomials z~^l conj(z~)^m, evaluated at third-point modulus rho.
fn coefficient(l: usize, m: usize, z: Complex64, rho: f64) -> Complex64 {
    let r2 = z.norm_sqr();
    match (l, m) {
        (1, 1) => Complex64::new(rho.powi(4) * r2, 0.0),
        (1, 2) => -(Complex64::new(r2, 0.0) + z) * rho.powi(3),
        (2, 1) => -(Complex64::new(r2, 0.0) + z.conj()) * rho.powi(3),
        (1, 3) => z * rho * rho,
        (3, 1) => z.conj() * rho * rho,
        (2, 2) => Complex64::new(rho * rho * (Complex64::new(1.0, 0.0) + z).norm_sqr(), 0.0),
        (2, 3) => -(Complex64::new(1.0, 0.0) + z) * rho,
        (3, 2) => -(Complex64::new(1.0, 0.0) + z.conj()) * rho,
        (3, 3) => Complex64::new(1.0, 0.0),
        _ => Complex64::new(0.0, 0.0),
    }
}

/// Symmetrically scaled matrix entry (1-based indices). The angular
/// selection rule l + j = m + k makes this exactly zero for |j - k| > 2.
pub fn pentadiagonal_entry<W: RadialWeight>(
    j: usize,
    k: usize,
    z: Complex64,
    rho: f64,
    weight: &W,
) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for l in 1..=3usize {
        for m in 1..=3usize {
            if l + j != m + k {
                continue;
            }
            let reg = weight.tail_moment_regularized(j + l, rho);
            let scale = (weight.ln_tail_scale(j + l)
                - 0.5 * (weight.ln_tail_scale(j + 2) + weight.ln_tail_scale(k + 2)))
            .exp();
            acc += coefficient(l, m, z, rho) * reg * scale;
        }
    }
    acc * 2.0 * std::f64::consts::PI
}

/// Per-dimension scale table exp(ln_scale(j+l) - (ln_scale(j+2) +
/// ln_scale(k+2))/2) reused across every (z, rho) evaluation.
struct ScaleTable {
    // indexed by [j-1][l-1][k-1 clamped to the band]; only l + j = m + k
    // combinations are ever read, so store scale(j, l, k) directly
    ln_scale: Vec<f64>,
}

impl ScaleTable {
    fn new<W: RadialWeight>(dim: usize, weight: &W) -> Self {
        // ln_scale(n) for n = 2 ..= dim + 3
        let ln_scale = (0..=dim + 3)
            .map(|n| if n >= 2 { weight.ln_tail_scale(n) } else { 0.0 })
            .collect();
        Self { ln_scale }
    }

    #[inline]
    fn factor(&self, j: usize, l: usize, k: usize) -> f64 {
        (self.ln_scale[j + l] - 0.5 * (self.ln_scale[j + 2] + self.ln_scale[k + 2])).exp()
    }
}

/// ln |det| of the pentadiagonal matrix of dimension `dim`, by banded LU
/// without pivoting (the matrix is Hermitian positive definite: it is the
/// Gram matrix of monomials against a nonnegative measure). The regularized
/// tail moments are computed once per rho, not per entry.
fn banded_log_det<W: RadialWeight>(
    dim: usize,
    z: Complex64,
    rho: f64,
    weight: &W,
    scales: &ScaleTable,
) -> f64 {
    if dim == 0 {
        return 0.0;
    }
    let tails: Vec<f64> =
        (0..=dim + 3).map(|n| if n >= 2 { weight.tail_moment_regularized(n, rho) } else { 0.0 }).collect();
    // band[i][d] = A_{i+1, i+d-1} in 1-based matrix indices (d = 0..=4)
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut band = vec![[Complex64::new(0.0, 0.0); 5]; dim];
    for (i, row) in band.iter_mut().enumerate() {
        let j = i + 1;
        for (d, slot) in row.iter_mut().enumerate() {
            let col = i as isize + d as isize - 2;
            if col < 0 || (col as usize) >= dim {
                continue;
            }
            let k = col as usize + 1;
            let mut acc = Complex64::new(0.0, 0.0);
            for l in 1..=3usize {
                let m = l + j;
                if m <= k || m - k > 3 {
                    continue;
                }
                let m = m - k;
                acc += coefficient(l, m, z, rho) * tails[j + l] * scales.factor(j, l, k);
            }
            *slot = acc * two_pi;
        }
    }
    let mut ln_abs = 0.0;
    for i in 0..dim {
        let pivot = band[i][2];
        ln_abs += pivot.norm().ln();
        for off in 1..=2usize {
            let r = i + off;
            if r >= dim {
                break;
            }
            let factor = band[r][2 - off] / pivot;
            if factor.norm() == 0.0 {
                continue;
            }
            for cc in 0..=2usize {
                if 2 + cc < 5 && 2 - off + cc < 5 {
                    let sub = factor * band[i][2 + cc];
                    band[r][2 - off + cc] -= sub;
                }
            }
        }
    }
    ln_abs
}

/// Parameters for the finite-N conditional spacing-ratio density.
#[derive(Debug, Clone, Copy)]
pub struct PentadiagonalSpec {
    /// Total eigenvalue count N >= 3; the determinant has dimension N - 3.
    pub n: usize,
    /// Relative tolerance of the radial quadrature.
    pub quad_tol: f64,
}

impl PentadiagonalSpec {
    pub fn new(n: usize) -> Result<Self, AnalyticError> {
        if n < 3 {
            return Err(AnalyticError::Domain("need at least three eigenvalues"));
        }
        Ok(Self { n, quad_tol: 1e-9 })
    }
}

const RHO_MAX: f64 = 14.0;
const SCAN_POINTS: usize = 56;

/// The finite-N conditional spacing-ratio density, normalized to unit mass
/// on the disc at construction time.
pub struct FiniteNConditionalRatio<W: RadialWeight = GaussianWeight> {
    spec: PentadiagonalSpec,
    weight: W,
    scales: ScaleTable,
    ln_norm: f64,
}

impl FiniteNConditionalRatio<GaussianWeight> {
    pub fn new(spec: PentadiagonalSpec) -> Result<Self, AnalyticError> {
        Self::with_weight(spec, GaussianWeight)
    }
}

impl<W: RadialWeight> FiniteNConditionalRatio<W> {
    pub fn with_weight(spec: PentadiagonalSpec, weight: W) -> Result<Self, AnalyticError> {
        if spec.n < 3 {
            return Err(AnalyticError::Domain("need at least three eigenvalues"));
        }
        let scales = ScaleTable::new(spec.n - 3, &weight);
        let mut me = Self { spec, weight, scales, ln_norm: 0.0 };
        me.ln_norm = me.disc_log_integral()?;
        Ok(me)
    }

    pub fn spec(&self) -> &PentadiagonalSpec {
        &self.spec
    }

    /// Normalized density at lambda = x + i y.
    pub fn density(&self, x: f64, y: f64) -> Result<f64, AnalyticError> {
        if x * x + y * y > 1.0 {
            return Ok(0.0);
        }
        let ln_raw = self.ln_raw(Complex64::new(x, y))?;
        Ok((ln_raw - self.ln_norm).exp())
    }

    /// ln of the unnormalized density (ln 0 = -inf at the origin and on the
    /// ratio's zero set).
    ///
    /// The radial integral uses fixed Gauss-Legendre nodes over a cutoff
    /// chosen from a coarse scan: the integrand is analytic and decays like a
    /// Gaussian, so the fixed rule is both accurate and smooth in z, which
    /// matters for the adaptive normalization integral layered on top.
    fn ln_raw(&self, z: Complex64) -> Result<f64, AnalyticError> {
        static NODES: std::sync::OnceLock<(Vec<f64>, Vec<f64>)> = std::sync::OnceLock::new();
        let (nodes, weights) = NODES.get_or_init(|| crate::quad::gauss_legendre(128));
        let dim = self.spec.n - 3;
        let r2 = z.norm_sqr();
        let pref = r2 * (Complex64::new(1.0, 0.0) - z).norm_sqr();
        if pref == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        let r = r2.sqrt();
        let ln_integrand = |rho: f64| -> f64 {
            if rho <= 0.0 {
                return f64::NEG_INFINITY;
            }
            9.0 * rho.ln()
                + self.weight.ln_weight(r * rho)
                + self.weight.ln_weight(rho)
                + banded_log_det(dim, z, rho, &self.weight, &self.scales)
        };
        // locate the peak and a conservative decay cutoff
        let mut ln_max = f64::NEG_INFINITY;
        let mut scan = [0.0f64; SCAN_POINTS];
        for (i, slot) in scan.iter_mut().enumerate() {
            let rho = RHO_MAX * (i as f64 + 1.0) / SCAN_POINTS as f64;
            *slot = ln_integrand(rho);
            ln_max = ln_max.max(*slot);
        }
        if !ln_max.is_finite() {
            return Err(AnalyticError::Overflow("radial integrand degenerate"));
        }
        let mut rho_cut = RHO_MAX;
        let mut past_peak = false;
        for (i, &v) in scan.iter().enumerate() {
            past_peak |= v == ln_max;
            if past_peak && v < ln_max - 50.0 {
                rho_cut = RHO_MAX * (i as f64 + 1.0) / SCAN_POINTS as f64;
                break;
            }
        }
        let mid = 0.5 * rho_cut;
        let mut integral = 0.0;
        for (&x, &w) in nodes.iter().zip(weights) {
            let v = ln_integrand(mid + mid * x) - ln_max;
            if v > -60.0 {
                integral += w * v.exp();
            }
        }
        integral *= mid;
        Ok(pref.ln() + ln_max + integral.ln())
    }

    /// ln of the disc integral of the unnormalized density, in polar
    /// coordinates: periodic trapezoid in the angle, adaptive in the radius.
    fn disc_log_integral(&self) -> Result<f64, AnalyticError> {
        const M_THETA: usize = 48;
        // probe the scale to shift the exponent safely
        let mut shift = f64::NEG_INFINITY;
        for i in 0..8 {
            let r = 0.1 + 0.11 * i as f64;
            for k in 0..4 {
                let t = std::f64::consts::PI * (k as f64 + 0.5) / 4.0;
                let z = Complex64::from_polar(r, t);
                shift = shift.max(self.ln_raw(z)?);
            }
        }
        let ring = |r: f64| -> f64 {
            if r <= 0.0 || r >= 1.0 {
                return 0.0;
            }
            // density is even in the angle
            let dt = std::f64::consts::PI / M_THETA as f64;
            let mut acc = 0.0;
            for k in 0..M_THETA {
                let t = (k as f64 + 0.5) * dt;
                let z = Complex64::from_polar(r, t);
                let v = self.ln_raw(z).unwrap_or(f64::NEG_INFINITY) - shift;
                if v > -300.0 {
                    acc += v.exp();
                }
            }
            2.0 * acc * dt * r
        };
        let integral =
            adaptive_simpson(&ring, 0.0, 1.0, self.spec.quad_tol.max(1e-10), 1e-300)?;
        Ok(shift + integral.ln())
    }
}
