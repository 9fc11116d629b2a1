//! Scalar special functions used by the analytic reference curves.
//!
//! Everything here is plain `f64` (plus `Complex64` where the edge kernel
//! needs entire-function continuations). Incomplete gamma functions follow
//! the classical split: series for `x < a + 1`, Lentz continued fraction
//! otherwise, with log-scale variants for use inside larger log-space
//! assemblies.

use num_complex::Complex64;
use thiserror::Error;

/// Truncation control for series evaluations.
#[derive(Debug, Clone, Copy)]
pub struct SeriesControl {
    /// Relative size at which a term is considered negligible.
    pub rel_tol: f64,
    /// Hard cap on the number of terms before giving up.
    pub max_terms: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self { rel_tol: 1e-14, max_terms: 10_000 }
    }
}

impl SeriesControl {
    pub fn new(rel_tol: f64, max_terms: usize) -> Self {
        assert!(rel_tol > 0.0 && max_terms >= 1);
        Self { rel_tol, max_terms }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecFunError {
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("series did not converge within {terms} terms (last relative term {last_rel:.3e})")]
    Convergence { terms: usize, last_rel: f64 },
    #[error("argument outside supported range: {0}")]
    Range(&'static str),
}

type Result<T> = std::result::Result<T, SpecFunError>;

// Lanczos g=7, n=9 coefficients (Godfrey / Boost / CPython).
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the Gamma function for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma requires x > 0, got {x}");
    if x < 0.5 {
        // reflection keeps the Lanczos argument in its accurate range
        return std::f64::consts::PI.ln()
            - (std::f64::consts::PI * x).sin().ln()
            - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

const GAMMA_MAX_ITER: usize = 600;

/// Series for the regularized lower incomplete gamma, valid for x < a + 1.
/// Returns the sum Σ_{k≥0} x^k Γ(a+1)/Γ(a+1+k), which is ≥ 1.
fn gamma_p_series_sum(a: f64, x: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut denom = a;
    for _ in 0..GAMMA_MAX_ITER {
        denom += 1.0;
        term *= x / denom;
        sum += term;
        if term.abs() < sum.abs() * 1e-16 {
            return Ok(sum);
        }
    }
    Err(SpecFunError::Convergence { terms: GAMMA_MAX_ITER, last_rel: term / sum })
}

/// Modified Lentz continued fraction for the regularized upper incomplete
/// gamma, valid for x ≥ a + 1. Returns the fraction part F such that
/// Q(a,x) = exp(a ln x - x - lnΓ(a)) · F.
fn gamma_q_cf(a: f64, x: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..GAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            return Ok(h);
        }
    }
    Err(SpecFunError::Convergence { terms: GAMMA_MAX_ITER, last_rel: f64::NAN })
}

fn check_gamma_domain(a: f64, x: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(SpecFunError::Domain("incomplete gamma requires a > 0"));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(SpecFunError::Domain("incomplete gamma requires x >= 0"));
    }
    Ok(())
}

/// Regularized upper incomplete gamma Q(a, x) = Γ(a, x)/Γ(a).
pub fn regularized_gamma_q(a: f64, x: f64) -> Result<f64> {
    check_gamma_domain(a, x)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    let ln_pref = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        let p = (ln_pref.exp() / a) * gamma_p_series_sum(a, x)?;
        Ok(1.0 - p)
    } else {
        Ok(ln_pref.exp() * gamma_q_cf(a, x)?)
    }
}

/// Regularized lower incomplete gamma P(a, x) = 1 - Q(a, x).
pub fn regularized_gamma_p(a: f64, x: f64) -> Result<f64> {
    check_gamma_domain(a, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let ln_pref = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        Ok((ln_pref.exp() / a) * gamma_p_series_sum(a, x)?)
    } else {
        Ok(1.0 - ln_pref.exp() * gamma_q_cf(a, x)?)
    }
}

/// ln P(a, x), usable where P underflows (deep left tail).
pub fn ln_gamma_p(a: f64, x: f64) -> Result<f64> {
    check_gamma_domain(a, x)?;
    if x == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let ln_pref = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        Ok(ln_pref - a.ln() + gamma_p_series_sum(a, x)?.ln())
    } else {
        let q = ln_pref.exp() * gamma_q_cf(a, x)?;
        Ok((-q).ln_1p())
    }
}

/// ln Q(a, x), usable where Q underflows (deep right tail).
pub fn ln_gamma_q(a: f64, x: f64) -> Result<f64> {
    check_gamma_domain(a, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let ln_pref = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        let p = (ln_pref.exp() / a) * gamma_p_series_sum(a, x)?;
        Ok((-p).ln_1p())
    } else {
        Ok(ln_pref + gamma_q_cf(a, x)?.ln())
    }
}

/// Unregularized lower incomplete gamma γ(a, x) = Γ(a) P(a, x).
///
/// Saturates to +∞ when Γ(a) overflows; the regularized forms above are the
/// right tool inside large products.
pub fn lower_gamma(a: f64, x: f64) -> Result<f64> {
    check_gamma_domain(a, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok((ln_gamma(a) + ln_gamma_p(a, x)?).exp())
}

/// Truncated exponential e_n(x) = Σ_{j=0}^{n} x^j / j!.
pub fn truncated_exp(n: usize, x: Complex64) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for j in 1..=n {
        term *= x / j as f64;
        sum += term;
    }
    sum
}

/// e^{-x} e_n(x), the complex-argument extension of Q(n+1, x).
///
/// Terms are assembled as exp(j ln x - lnΓ(j+1) - x) so that the partial
/// products never overflow even when |x| is several hundred.
pub fn truncated_exp_scaled(n: usize, x: Complex64) -> Complex64 {
    if x == Complex64::new(0.0, 0.0) {
        return Complex64::new(1.0, 0.0);
    }
    let ln_x = x.ln();
    let mut sum = Complex64::new(0.0, 0.0);
    for j in 0..=n {
        let ln_term = ln_x * j as f64 - ln_gamma(j as f64 + 1.0) - x;
        sum += ln_term.exp();
    }
    sum
}

/// Error function on the real line, via the regularized incomplete gamma.
pub fn erf_real(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let p = regularized_gamma_p(0.5, x * x).expect("erf: gamma domain is valid");
    if x > 0.0 {
        p
    } else {
        -p
    }
}

/// Complementary error function, accurate in the decaying tail.
pub fn erfc_real(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else if x > 0.0 {
        regularized_gamma_q(0.5, x * x).expect("erfc: gamma domain is valid")
    } else {
        1.0 + regularized_gamma_p(0.5, x * x).expect("erfc: gamma domain is valid")
    }
}

/// Maximum modulus accepted by [`erf_complex`]. Edge-kernel arguments stay
/// well inside this at the spacing scales of interest.
pub const ERF_COMPLEX_MAX_MODULUS: f64 = 12.0;

// Beyond this modulus the Maclaurin series loses more digits to alternating
// cancellation than the tolerance allows; switch to the exponential series
// continuation.
const ERF_TAYLOR_MAX_MODULUS: f64 = 3.5;

/// Error function of a complex argument.
///
/// Small moduli use the alternating Taylor series of the entire function with
/// compensated summation; larger moduli (up to [`ERF_COMPLEX_MAX_MODULUS`])
/// use the exponential-series continuation off the real axis, which reduces
/// to `erf_real` exactly on it.
pub fn erf_complex(z: Complex64, ctl: &SeriesControl) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(SpecFunError::Domain("erf_complex requires finite argument"));
    }
    if z.norm() > ERF_COMPLEX_MAX_MODULUS {
        return Err(SpecFunError::Range("erf_complex limited to |z| <= 12"));
    }
    if z.im == 0.0 {
        return Ok(Complex64::new(erf_real(z.re), 0.0));
    }
    if z.norm() <= ERF_TAYLOR_MAX_MODULUS {
        return erf_taylor(z, ctl);
    }
    // reflect into x >= 0, y >= 0
    let mut w = z;
    let mut negate = false;
    if w.re < 0.0 {
        w = -w;
        negate = true;
    }
    let mut conjugate = false;
    if w.im < 0.0 {
        w = w.conj();
        conjugate = true;
    }
    let mut v = erf_expseries(w.re, w.im, ctl)?;
    if conjugate {
        v = v.conj();
    }
    if negate {
        v = -v;
    }
    Ok(v)
}

/// Alternating Maclaurin series with Kahan-compensated summation.
fn erf_taylor(z: Complex64, ctl: &SeriesControl) -> Result<Complex64> {
    let z2 = z * z;
    let mut term = z;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    for k in 0..ctl.max_terms {
        let kf = k as f64;
        if k > 0 {
            term *= -z2 / kf;
        }
        let contrib = term / (2.0 * kf + 1.0);
        // Kahan step
        let y = contrib - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if contrib.norm() <= ctl.rel_tol * sum.norm().max(f64::MIN_POSITIVE) && k > 2 {
            return Ok(sum * 2.0 / std::f64::consts::PI.sqrt());
        }
    }
    Err(SpecFunError::Convergence { terms: ctl.max_terms, last_rel: f64::NAN })
}

/// Exponential-series continuation for x > 0, y > 0 (Abramowitz & Stegun
/// 7.1.29 family). All k-terms carry e^{-k²/4 ± ky} combined in the exponent
/// so nothing overflows for y up to the modulus cap.
fn erf_expseries(x: f64, y: f64, ctl: &SeriesControl) -> Result<Complex64> {
    debug_assert!(x > 0.0 && y > 0.0);
    let expmx2 = (-x * x).exp();
    let (s2, c2) = (2.0 * x * y).sin_cos();
    // 1 - cos(2xy) without cancellation
    let one_m_c2 = 2.0 * (x * y).sin().powi(2);
    let mut re = erf_real(x) + expmx2 / (2.0 * std::f64::consts::PI * x) * one_m_c2;
    let mut im = expmx2 / (2.0 * std::f64::consts::PI * x) * s2;
    let pref = 2.0 / std::f64::consts::PI * expmx2;
    let scale = Complex64::new(re, im).norm().max(1e-300);
    for k in 1..=ctl.max_terms {
        let kf = k as f64;
        let ep = 0.5 * (-0.25 * kf * kf + kf * y).exp();
        let em = 0.5 * (-0.25 * kf * kf - kf * y).exp();
        let ch = ep + em;
        let sh = ep - em;
        let ek = (-0.25 * kf * kf).exp();
        let denom = kf * kf + 4.0 * x * x;
        let fk = 2.0 * x * ek - 2.0 * x * ch * c2 + kf * sh * s2;
        let gk = 2.0 * x * ch * s2 + kf * sh * c2;
        re += pref * fk / denom;
        im += pref * gk / denom;
        let tail = pref * (2.0 * x * (ek + ch) + kf * sh) / denom;
        if kf > 2.0 * y && tail < ctl.rel_tol * scale.max(Complex64::new(re, im).norm()) {
            return Ok(Complex64::new(re, im));
        }
    }
    Err(SpecFunError::Convergence { terms: ctl.max_terms, last_rel: f64::NAN })
}

/// Confluent hypergeometric function ₁F₁(a; b; x).
///
/// Negative arguments go through the Kummer transform
/// ₁F₁(a;b;x) = eˣ ₁F₁(b-a;b;-x) so that the evaluated series has positive
/// terms (or terminates when b-a is a nonpositive integer).
pub fn kummer_1f1(a: f64, b: f64, x: f64, ctl: &SeriesControl) -> Result<f64> {
    if b <= 0.0 && b == b.floor() {
        return Err(SpecFunError::Domain("1F1 requires b not a nonpositive integer"));
    }
    if !x.is_finite() {
        return Err(SpecFunError::Domain("1F1 requires finite x"));
    }
    if x < 0.0 {
        return Ok(x.exp() * kummer_series(b - a, b, -x, ctl)?);
    }
    kummer_series(a, b, x, ctl)
}

fn kummer_series(a: f64, b: f64, x: f64, ctl: &SeriesControl) -> Result<f64> {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 0..ctl.max_terms {
        let kf = k as f64;
        term *= (a + kf) * x / ((b + kf) * (kf + 1.0));
        sum += term;
        if term.abs() <= ctl.rel_tol * sum.abs().max(f64::MIN_POSITIVE) {
            return Ok(sum);
        }
    }
    Err(SpecFunError::Convergence { terms: ctl.max_terms, last_rel: term / sum })
}

/// Double factorial m!! promoted to floating point, with (-1)!! = 0!! = 1.
pub fn double_factorial(m: i64) -> f64 {
    if m <= 0 {
        return 1.0;
    }
    let mut acc: u128 = 1;
    let mut k = m;
    let mut overflowed = 1.0f64;
    while k > 1 {
        match acc.checked_mul(k as u128) {
            Some(v) => acc = v,
            None => overflowed *= k as f64,
        }
        k -= 2;
    }
    overflowed * acc as f64
}

/// ln(m!!) without intermediate overflow; (-1)!! = 0!! = 1.
pub fn ln_double_factorial(m: i64) -> f64 {
    if m <= 0 {
        return 0.0;
    }
    let mf = m as f64;
    if m % 2 == 0 {
        // (2k)!! = 2^k k!
        let k = mf / 2.0;
        k * std::f64::consts::LN_2 + ln_gamma(k + 1.0)
    } else {
        // (2k-1)!! = (2k)! / (2^k k!)
        let k = (mf + 1.0) / 2.0;
        ln_gamma(2.0 * k + 1.0) - k * std::f64::consts::LN_2 - ln_gamma(k + 1.0)
    }
}
