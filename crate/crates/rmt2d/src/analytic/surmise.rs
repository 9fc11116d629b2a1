//! N=3 surmises of the complex spacing ratio for the elliptic Ginibre
//! interpolation (conditional and unconditional variants), the GUE spacing
//! ratio surmises they limit to, and consistency checks between the two.

use super::AnalyticError;
use crate::quad::{adaptive_simpson, gauss_legendre, integrate_gl};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurmiseVariant {
    /// Reference eigenvalue conditioned at the origin.
    Conditional,
    /// Plain ratio over all triples.
    Unconditional,
}

#[derive(Debug, Clone, Copy)]
pub struct SurmiseParams {
    pub tau: f64,
    pub variant: SurmiseVariant,
}

impl SurmiseParams {
    pub fn new(tau: f64, variant: SurmiseVariant) -> Result<Self, AnalyticError> {
        if !(0.0..1.0).contains(&tau) {
            return Err(AnalyticError::Domain("tau must lie in [0, 1)"));
        }
        Ok(Self { tau, variant })
    }
}

/// The N=3 spacing-ratio surmise density at lambda = x + i y.
pub fn surmise_eginue(x: f64, y: f64, p: &SurmiseParams) -> f64 {
    let r2 = x * x + y * y;
    if r2 > 1.0 {
        return 0.0;
    }
    let tau = p.tau;
    let omt = 1.0 - tau * tau;
    let t2 = tau * tau;
    let t4 = t2 * t2;
    match p.variant {
        SurmiseVariant::Conditional => {
            let g = r2 + 1.0;
            let g2 = g * g;
            let a = g2 - 4.0 * y * y;
            let bracket = 8.0 * g2 * g2 + 24.0 * t2 * g2 * a + 3.0 * t4 * a * a;
            let denom = (omt * g2 + 4.0 * t2 * y * y).powf(4.5);
            let k_c = std::f64::consts::PI.powi(2) * omt * (2.0 + t2);
            3.0 * std::f64::consts::PI * omt.powi(5) / k_c * r2 * (g - 2.0 * x) * bracket / denom
        }
        SurmiseVariant::Unconditional => {
            let g = r2 + 1.0 - x;
            let g2 = g * g;
            let a = g2 - 3.0 * y * y;
            let bracket = 8.0 * g2 * g2 + 24.0 * t2 * g2 * a + 3.0 * t4 * a * a;
            let denom = (omt * g2 + 3.0 * t2 * y * y).powf(4.5);
            let k = 18.0 * std::f64::consts::PI.powi(2) * omt;
            729.0 * std::f64::consts::PI * omt.powi(5) / (32.0 * k) * r2 * (g - x) * bracket
                / denom
        }
    }
}

/// The Gaussian-integral positivity certificate A_+ A_- - B^2; strictly
/// positive on the closed disc for every tau in [0, 1).
pub fn surmise_positivity_certificate(x: f64, y: f64, tau: f64, variant: SurmiseVariant) -> f64 {
    let omt = 1.0 - tau * tau;
    match variant {
        SurmiseVariant::Conditional => {
            let g = x * x + y * y + 1.0;
            (omt * g * g + 4.0 * tau * tau * y * y) / (omt * omt)
        }
        SurmiseVariant::Unconditional => {
            let g = x * x + y * y + 1.0 - x;
            4.0 / 9.0 * (omt * g * g + 3.0 * tau * tau * y * y) / (omt * omt)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginalAxis {
    Radial,
    Angular,
}

/// Tabulated marginal of the surmise: radial on (0, 1], angular on (-pi, pi].
/// Both integrate to one in their own variable.
pub fn surmise_marginal(
    p: &SurmiseParams,
    axis: MarginalAxis,
    grid: usize,
) -> Result<Vec<(f64, f64)>, AnalyticError> {
    if grid < 2 {
        return Err(AnalyticError::Domain("grid must have at least two points"));
    }
    let (nodes, weights) = gauss_legendre(96);
    let mut out = Vec::with_capacity(grid);
    match axis {
        MarginalAxis::Radial => {
            for i in 0..grid {
                let r = (i as f64 + 0.5) / grid as f64;
                let val = integrate_gl(
                    |theta: f64| r * surmise_eginue(r * theta.cos(), r * theta.sin(), p),
                    -std::f64::consts::PI,
                    std::f64::consts::PI,
                    &nodes,
                    &weights,
                );
                out.push((r, val));
            }
        }
        MarginalAxis::Angular => {
            for i in 0..grid {
                let theta = -std::f64::consts::PI
                    + (i as f64 + 0.5) * 2.0 * std::f64::consts::PI / grid as f64;
                let (st, ct) = theta.sin_cos();
                let val = integrate_gl(
                    |r: f64| r * surmise_eginue(r * ct, r * st, p),
                    0.0,
                    1.0,
                    &nodes,
                    &weights,
                );
                out.push((theta, val));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GueSurmiseKind {
    /// Ratio of consecutive spacings, supported on x >= 0.
    Consecutive,
    /// NN spacing ratio, supported on [-1, 1].
    Nn,
    /// NN spacing ratio conditioned at the origin, supported on [-1, 1].
    ConditionalNn,
}

/// The N=3 GUE spacing-ratio surmises with their exact normalizations.
pub fn gue_surmise(x: f64, kind: GueSurmiseKind) -> f64 {
    match kind {
        GueSurmiseKind::Consecutive => {
            if x < 0.0 {
                return 0.0;
            }
            let num = x * x * (1.0 + x) * (1.0 + x);
            let den = (1.0 + x + x * x).powi(4);
            // normalization 4 pi / (81 sqrt 3)
            let alpha = 4.0 * std::f64::consts::PI / (81.0 * 3.0f64.sqrt());
            num / den / alpha
        }
        GueSurmiseKind::Nn => {
            if x * x > 1.0 {
                return 0.0;
            }
            let num = x * x * (1.0 - x) * (1.0 - x);
            let den = (1.0 - x + x * x).powi(4);
            // 2 pi / (27 sqrt 3); fixed by unit mass and by the Hermitian
            // limit of the unconditional surmise
            let alpha = 2.0 * std::f64::consts::PI / (27.0 * 3.0f64.sqrt());
            num / den / alpha
        }
        GueSurmiseKind::ConditionalNn => {
            if x * x > 1.0 {
                return 0.0;
            }
            let num = x * x * (1.0 - x) * (1.0 - x);
            let den = (1.0 + x * x).powi(4);
            let alpha = std::f64::consts::PI / 16.0;
            num / den / alpha
        }
    }
}

/// Marginal density of the real part in the Hermitian limit tau -> 1 of the
/// surmises; equals the corresponding GUE NN surmise.
pub fn hermitian_limit_marginal(x: f64, variant: SurmiseVariant) -> f64 {
    if x * x > 1.0 {
        return 0.0;
    }
    match variant {
        SurmiseVariant::Conditional => {
            16.0 / std::f64::consts::PI * x * x * (x - 1.0) * (x - 1.0) / (1.0 + x * x).powi(4)
        }
        SurmiseVariant::Unconditional => {
            27.0 * 3.0f64.sqrt() / (2.0 * std::f64::consts::PI) * x * x * (x - 1.0) * (x - 1.0)
                / (x * x - x + 1.0).powi(4)
        }
    }
}

/// Sup-norm deviation between the y-integrated surmise at tau near one and
/// its Hermitian limit marginal; expected O(1 - tau^2).
pub fn surmise_limit_consistency(
    tau: f64,
    variant: SurmiseVariant,
    grid: usize,
) -> Result<f64, AnalyticError> {
    if !(0.9..1.0).contains(&tau) {
        return Err(AnalyticError::Domain("consistency check intended for tau near one"));
    }
    let p = SurmiseParams::new(tau, variant)?;
    let scale = (1.0 - tau * tau).sqrt();
    let mut worst: f64 = 0.0;
    for i in 1..grid {
        let x = -1.0 + 2.0 * i as f64 / grid as f64;
        let y_lim = (1.0 - x * x).max(0.0).sqrt();
        // substitute y = y_tilde * sqrt(1 - tau^2); integrand decays fast
        let integral = adaptive_simpson(
            &|yt: f64| surmise_eginue(x, yt * scale, &p),
            0.0,
            y_lim / scale,
            1e-9,
            1e-12,
        )? * 2.0
            * scale;
        let limit = hermitian_limit_marginal(x, variant);
        worst = worst.max((integral - limit).abs());
    }
    Ok(worst)
}
