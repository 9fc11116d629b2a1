//! Edge unfolding via the empirical rotationally symmetric density.
//!
//! Distances s around a point z0 are mapped to s' = sqrt(m(s)), where m(s)
//! is the integral of the (probability-normalized) planar density over the
//! disc D_s(z0). With the density normalized to one on the plane, a flat
//! unit-disc bulk has R = 1/pi and the map is the identity there.
//!
//! The density enters as a fine radial histogram; m(s) sums, annulus by
//! annulus, the intersection arc of each bin's central circle with the disc.
//! For wide bin windows the same sum is evaluated in integrated-by-parts form
//! against the cumulative radial mass with Gauss-Legendre nodes, which is
//! orders of magnitude cheaper at one million bins.

use crate::quad::gauss_legendre;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// Default bin count, about one million equal-width annuli.
pub const DEFAULT_RADIAL_BINS: usize = 1 << 20;
/// Default radial range; covers the Gaussian Poisson cloud's tails.
pub const DEFAULT_R_MAX: f64 = 1.5;

// Window size (in bins) below which the exact arc sum is used directly.
const EXACT_WINDOW: usize = 4096;
const GL_NODES: usize = 64;

/// Binned rotationally symmetric empirical density.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadialHistogram {
    r_max: f64,
    counts: Vec<u64>,
    overflow: u64,
    total: u64,
    #[serde(skip)]
    cumulative: OnceLock<Vec<f64>>,
}

impl RadialHistogram {
    pub fn new(bins: usize, r_max: f64) -> Self {
        assert!(bins >= 1 && r_max > 0.0);
        Self { r_max, counts: vec![0; bins], overflow: 0, total: 0, cumulative: OnceLock::new() }
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn total_points(&self) -> u64 {
        self.total
    }

    pub fn overflow_count(&self) -> u64 {
        self.overflow
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    fn bin_width(&self) -> f64 {
        self.r_max / self.counts.len() as f64
    }

    pub fn record(&mut self, r: f64) {
        debug_assert!(self.cumulative.get().is_none(), "histogram already frozen");
        let idx = (r / self.bin_width()) as usize;
        if r >= 0.0 && idx < self.counts.len() {
            self.counts[idx] += 1;
        } else {
            self.overflow += 1;
        }
        self.total += 1;
    }

    pub fn record_spectrum(&mut self, eigenvalues: &[Complex64]) {
        for z in eigenvalues {
            self.record(z.norm());
        }
    }

    /// Merging histograms built over disjoint sample sets equals one build
    /// over the union; counts are integers so the merge is order-free.
    pub fn merge(&mut self, other: &Self) {
        assert_eq!(self.counts.len(), other.counts.len());
        assert_eq!(self.r_max, other.r_max);
        debug_assert!(self.cumulative.get().is_none(), "histogram already frozen");
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.overflow += other.overflow;
        self.total += other.total;
    }

    /// Empirical planar density at the bin containing radius r, normalized so
    /// the density integrates to one over the plane.
    pub fn planar_density(&self, r: f64) -> f64 {
        let dr = self.bin_width();
        let idx = (r / dr) as usize;
        if r < 0.0 || idx >= self.counts.len() || self.total == 0 {
            return 0.0;
        }
        let r0 = idx as f64 * dr;
        let r1 = r0 + dr;
        let area = std::f64::consts::PI * (r1 * r1 - r0 * r0);
        self.counts[idx] as f64 / (self.total as f64 * area)
    }

    /// Cumulative fraction of points with binned radius below the bin
    /// boundary index i (piecewise-linear between boundaries at query time).
    fn cumulative(&self) -> &[f64] {
        self.cumulative.get_or_init(|| {
            let mut cum = Vec::with_capacity(self.counts.len() + 1);
            let mut acc = 0.0f64;
            cum.push(0.0);
            let t = self.total.max(1) as f64;
            for &c in &self.counts {
                acc += c as f64;
                cum.push(acc / t);
            }
            cum
        })
    }

    fn cumulative_at(&self, cum: &[f64], r: f64) -> f64 {
        if r <= 0.0 || self.total == 0 {
            return 0.0;
        }
        let dr = self.bin_width();
        let x = r / dr;
        if x >= self.counts.len() as f64 {
            return cum[self.counts.len()];
        }
        let i = x as usize;
        let frac = x - i as f64;
        cum[i] + (cum[i + 1] - cum[i]) * frac
    }

    /// m(s): integral of the empirical density over the disc of radius `s`
    /// around `z0`.
    pub fn disc_density_integral(&self, z0: Complex64, s: f64) -> f64 {
        assert!(s >= 0.0, "disc radius must be nonnegative");
        if s == 0.0 || self.total == 0 {
            return 0.0;
        }
        let c = z0.norm();
        let dr = self.bin_width();
        let lo_bin = (((c - s) / dr).floor().max(0.0)) as usize;
        let hi_bin = ((((c + s) / dr).ceil()) as usize).min(self.counts.len());
        if hi_bin.saturating_sub(lo_bin) <= EXACT_WINDOW {
            self.arc_sum(c, s, lo_bin, hi_bin)
        } else {
            self.arc_sum_quadrature(c, s)
        }
    }

    /// Exact annulus-by-annulus sum: each bin's central circle contributes
    /// its intersection arc with the disc, i.e. a fraction theta/pi of the
    /// bin's mass, where theta is the half-angle subtended.
    fn arc_sum(&self, c: f64, s: f64, lo_bin: usize, hi_bin: usize) -> f64 {
        let dr = self.bin_width();
        let t = self.total as f64;
        let mut acc = 0.0;
        for b in lo_bin..hi_bin {
            let count = self.counts[b];
            if count == 0 {
                continue;
            }
            let rho = (b as f64 + 0.5) * dr;
            let theta = if rho + c <= s {
                // circle fully contained: full-bin contribution
                std::f64::consts::PI
            } else if (rho - c).abs() >= s {
                0.0
            } else {
                // two-circle angle formula; clamp guards roundoff overshoot
                let cosv = ((rho * rho + c * c - s * s) / (2.0 * rho * c)).clamp(-1.0, 1.0);
                cosv.acos()
            };
            acc += count as f64 * theta;
        }
        acc / (std::f64::consts::PI * t)
    }

    /// Integrated-by-parts form of the same arc sum, for wide windows:
    /// m(s) = (1/pi) ∫ [F(rho+(t)) - F(rho-(t))] dt over the subtended angle,
    /// with F the cumulative radial mass. For c > s the angle is
    /// reparametrized by sin t = (s/c) sin psi, which removes the square-root
    /// endpoint of the direct form and lets Gauss-Legendre converge fast.
    fn arc_sum_quadrature(&self, c: f64, s: f64) -> f64 {
        static NODES: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
        let (nodes, weights) = NODES.get_or_init(|| gauss_legendre(GL_NODES));
        let cum = self.cumulative();
        let mut acc = 0.0;
        if c <= s {
            // disc covers the origin: single branch over the full angle
            let half = 0.5 * std::f64::consts::PI;
            for (&x, &w) in nodes.iter().zip(weights) {
                let t = half + half * x;
                let (st, ct) = t.sin_cos();
                let root = (s * s - c * c * st * st).max(0.0).sqrt();
                let rho = c * ct + root;
                acc += w * self.cumulative_at(cum, rho);
            }
            acc * half / std::f64::consts::PI
        } else {
            let ratio = s / c;
            let half = 0.25 * std::f64::consts::PI;
            for (&x, &w) in nodes.iter().zip(weights) {
                let psi = half + half * x;
                let (sp, cp) = psi.sin_cos();
                let st = ratio * sp;
                let ct = (1.0 - st * st).max(0.0).sqrt();
                let root = s * cp;
                let hi = c * ct + root;
                let lo = c * ct - root;
                let jac = ratio * cp / ct.max(1e-300);
                acc += w * jac * (self.cumulative_at(cum, hi) - self.cumulative_at(cum, lo));
            }
            acc * half / std::f64::consts::PI
        }
    }

    /// Unfolded distance s' = sqrt(m(s)); the identity in a constant-density
    /// unit-disc bulk.
    pub fn unfold_distance(&self, z0: Complex64, s: f64) -> f64 {
        self.disc_density_integral(z0, s).sqrt()
    }
}

/// Accumulate a histogram over a stream of spectra.
pub fn build_radial_histogram<'a, I>(spectra: I, bins: usize, r_max: f64) -> RadialHistogram
where
    I: IntoIterator<Item = &'a [Complex64]>,
{
    let mut hist = RadialHistogram::new(bins, r_max);
    for eigs in spectra {
        hist.record_spectrum(eigs);
    }
    hist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive_simpson;

    /// Deterministic histogram whose counts follow a radial CDF; quantizing
    /// the cumulative (rather than each bin) keeps windowed sums accurate to
    /// one count.
    fn hist_from_cdf(bins: usize, r_max: f64, scale: f64, cdf: impl Fn(f64) -> f64) -> RadialHistogram {
        let mut h = RadialHistogram::new(bins, r_max);
        let dr = r_max / bins as f64;
        let mut prev = 0u64;
        for b in 0..bins {
            let hi = (cdf((b as f64 + 1.0) * dr) * scale).round() as u64;
            h.counts[b] = hi - prev;
            prev = hi;
        }
        // tail mass beyond r_max belongs to the overflow bin and the total
        h.overflow = scale.round() as u64 - prev;
        h.total = prev + h.overflow;
        h
    }

    /// Constant density on the unit disc (annulus-area weights).
    fn uniform_disc_hist(bins: usize, scale: f64) -> RadialHistogram {
        hist_from_cdf(bins, 1.0, scale, |r| (r * r).min(1.0))
    }

    /// Isotropic Gaussian with E|z|^2 = two_sigma_sq.
    fn gaussian_hist(bins: usize, r_max: f64, two_sigma_sq: f64, scale: f64) -> RadialHistogram {
        hist_from_cdf(bins, r_max, scale, |r| 1.0 - (-r * r / two_sigma_sq).exp())
    }

    #[test]
    fn single_point_lands_in_expected_bin() {
        let mut h = RadialHistogram::new(10, 1.0);
        h.record_spectrum(&[Complex64::new(0.0, 0.5)]);
        assert_eq!(h.counts()[5], 1);
        assert_eq!(h.total_points(), 1);
        h.record(2.0);
        assert_eq!(h.overflow_count(), 1);
        assert_eq!(h.total_points(), 2);
    }

    #[test]
    fn merge_equals_joint_build() {
        let s1: Vec<Complex64> = (0..40).map(|i| Complex64::from_polar(i as f64 / 40.0, 1.0)).collect();
        let s2: Vec<Complex64> = (0..25).map(|i| Complex64::from_polar(i as f64 / 30.0, -2.0)).collect();
        let mut a = build_radial_histogram([s1.as_slice()], 64, 1.5);
        let b = build_radial_histogram([s2.as_slice()], 64, 1.5);
        a.merge(&b);
        let joint = build_radial_histogram([s1.as_slice(), s2.as_slice()], 64, 1.5);
        assert_eq!(a.counts(), joint.counts());
        assert_eq!(a.total_points(), joint.total_points());
    }

    #[test]
    fn constant_density_disc_integral_is_s_squared() {
        let h = uniform_disc_hist(200_000, 5e7);
        // disc fully inside the support
        for &(c, s) in &[(0.0, 0.3), (0.4, 0.2), (0.6, 0.05)] {
            let m = h.disc_density_integral(Complex64::new(c, 0.0), s);
            assert!((m - s * s).abs() < 2e-4, "c={c} s={s} m={m}");
        }
        assert_eq!(h.disc_density_integral(Complex64::new(0.5, 0.0), 0.0), 0.0);
    }

    #[test]
    fn unfold_is_identity_in_flat_bulk() {
        let h = uniform_disc_hist(400_000, 5e7);
        for &s in &[0.01, 0.05, 0.1] {
            let sp = h.unfold_distance(Complex64::new(0.3, 0.2), s);
            assert!((sp / s - 1.0).abs() < 1e-3, "s={s} s'={sp}");
        }
    }

    #[test]
    fn gaussian_matches_direct_quadrature() {
        let two_sigma_sq = 0.275;
        let h = gaussian_hist(1 << 20, 1.5, two_sigma_sq, 4e8);
        let z0 = Complex64::new(0.9, 0.0);
        let s = 0.05;
        let m = h.disc_density_integral(z0, s);
        // direct 2D quadrature of the analytic density over the disc, in
        // polar coordinates around z0 where the integrand is smooth
        let density = |r: f64| (-r * r / two_sigma_sq).exp() / (std::f64::consts::PI * two_sigma_sq);
        let (nodes, weights) = crate::quad::gauss_legendre(64);
        let oracle = adaptive_simpson(
            &|r: f64| {
                let ring = crate::quad::integrate_gl(
                    |phi: f64| density((z0 + Complex64::from_polar(r, phi)).norm()),
                    0.0,
                    2.0 * std::f64::consts::PI,
                    &nodes,
                    &weights,
                );
                r * ring
            },
            0.0,
            s,
            1e-10,
            1e-14,
        )
        .unwrap();
        assert!((m - oracle).abs() < 1e-4 * oracle, "m={m} oracle={oracle}");
    }

    #[test]
    fn quadrature_and_exact_paths_agree() {
        let h = gaussian_hist(1 << 20, 1.5, 0.3, 4e8);
        for &(c, s) in &[(0.9, 0.04), (0.5, 0.09), (0.02, 0.05), (1.0, 0.2)] {
            let z0 = Complex64::new(c, 0.0);
            let dr = h.bin_width();
            let lo = (((c - s) / dr).floor().max(0.0)) as usize;
            let hi = ((((c + s) / dr).ceil()) as usize).min(h.bins());
            let exact = h.arc_sum(c, s, lo, hi);
            let quad = h.arc_sum_quadrature(c, s);
            assert!(
                (exact - quad).abs() < 2e-4 * exact.max(1e-9),
                "c={c} s={s} exact={exact} quad={quad}"
            );
            let public = h.disc_density_integral(z0, s);
            assert!((public - exact).abs() <= (exact - quad).abs() + 1e-12);
        }
    }

    #[test]
    fn containment_threshold_is_continuous() {
        let h = uniform_disc_hist(100_000, 1e7);
        // pick a bin circle radius rho and place the disc so rho + c ~ s
        let dr = 1.0 / 100_000.0;
        let rho = 2000.5 * dr;
        let c = 0.3;
        let s_exact = rho + c;
        let below = h.arc_sum(c, s_exact * (1.0 - 1e-9), 0, 40_000);
        let above = h.arc_sum(c, s_exact * (1.0 + 1e-9), 0, 40_000);
        assert!((below - above).abs() < 1e-7, "below={below} above={above}");
    }

    #[test]
    fn m_is_nondecreasing() {
        let h = gaussian_hist(1 << 16, 1.5, 0.3, 1e7);
        let z0 = Complex64::new(0.95, 0.1);
        let mut prev = 0.0;
        for i in 0..=50 {
            let s = i as f64 * 0.01;
            let m = h.disc_density_integral(z0, s);
            assert!(m + 1e-12 >= prev, "s={s}");
            prev = m;
        }
    }
}
