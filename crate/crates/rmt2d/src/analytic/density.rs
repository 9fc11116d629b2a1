//! Finite-size radial spectral densities, rescaled so the limiting support
//! edge sits at radius one and the density integrates to one over the plane.

use super::AnalyticError;
use crate::specfun::{ln_gamma, ln_gamma_p, ln_gamma_q, regularized_gamma_q};

/// Radial density of the complex Ginibre class: Q(N, N r^2) / pi.
pub fn density_ginue(r: f64, n: usize) -> Result<f64, AnalyticError> {
    if !(r >= 0.0) {
        return Err(AnalyticError::Domain("radius must be nonnegative"));
    }
    if n == 0 {
        return Err(AnalyticError::Domain("matrix size must be positive"));
    }
    let nf = n as f64;
    Ok(regularized_gamma_q(nf, nf * r * r)? / std::f64::consts::PI)
}

/// Radial density of the complex symmetric class at finite N.
///
/// The closed form mixes terms whose natural scales differ by hundreds of
/// orders of magnitude, so each term is assembled as (sign, ln magnitude)
/// and combined by log-sum-exp.
pub fn density_ai_dag(r: f64, n: usize) -> Result<f64, AnalyticError> {
    if !(r > 0.0) {
        return Err(AnalyticError::Domain("radius must be strictly positive"));
    }
    if n < 2 {
        return Err(AnalyticError::Domain("matrix size must be at least 2"));
    }
    let nf = n as f64;
    let u = nf * r * r;
    let half = 0.5 * u;

    let ln_q_nu = ln_gamma_q(nf, u)?;
    let ln_gamma_n = ln_gamma(nf);
    // gamma((N+3)/2, u/2) = Gamma((N+3)/2) P((N+3)/2, u/2)
    let a_half = (nf + 3.0) / 2.0;
    let ln_p_half = ln_gamma_p(a_half, half)?;
    let ln_gamma_half = ln_gamma(a_half);

    let ln_sqrt_u2 = 0.5 * (half).ln();
    let n_ln2 = 0.5 * nf * std::f64::consts::LN_2;

    // T1 = sqrt(u/2) u^N e^{-u}
    let t1 = (1.0, ln_sqrt_u2 + nf * u.ln() - u);
    // T2 = sqrt(u/2) (N - u/2) Gamma(N, u)
    let c2 = nf - half;
    let t2 = (c2.signum(), ln_sqrt_u2 + c2.abs().max(f64::MIN_POSITIVE).ln() + ln_gamma_n + ln_q_nu);
    // T3 = 2^{N/2} gamma((N+3)/2, u/2) u^{N/2} e^{-u/2}
    let t3 = (1.0, n_ln2 + ln_gamma_half + ln_p_half + 0.5 * nf * u.ln() - half);
    // T4 = 2^{N/2} gamma((N+3)/2, u/2) (N-1-u) Gamma(N, u) / (2 u^{N/2} e^{-u/2})
    let c4 = nf - 1.0 - u;
    let t4 = (
        c4.signum(),
        n_ln2 + ln_gamma_half + ln_p_half + c4.abs().max(f64::MIN_POSITIVE).ln() + ln_gamma_n
            + ln_q_nu
            - std::f64::consts::LN_2
            - 0.5 * nf * u.ln()
            + half,
    );

    let terms = [t1, t2, t3, t4];
    let ln_max = terms.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    if ln_max == f64::INFINITY {
        return Err(AnalyticError::Overflow("density term exceeded f64 range"));
    }
    let mut acc = 0.0;
    for (sign, ln_t) in terms {
        acc += sign * (ln_t - ln_max).exp();
    }
    // prefactor sqrt(2N) / (pi r Gamma(N+2))
    let ln_pref = 0.5 * (2.0 * nf).ln()
        - std::f64::consts::PI.ln()
        - r.ln()
        - ln_gamma(nf + 2.0);
    let value = acc.max(0.0) * (ln_pref + ln_max).exp();
    if !value.is_finite() {
        return Err(AnalyticError::Overflow("density value exceeded f64 range"));
    }
    Ok(value)
}
