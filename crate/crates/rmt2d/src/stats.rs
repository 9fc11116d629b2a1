//! Mergeable aggregation of ratio and spacing samples: 2D ratio density,
//! radial/angular marginals, scalar moments with standard errors, spacing
//! histograms with first-moment normalization, and small-s cumulative
//! exponent fits.
//!
//! Standard errors come from batch means over spectra, not over individual
//! eigenvalues: spacings within one spectrum are correlated. Accumulators
//! merge exactly (integer histograms) or to rounding (f64 sums), and the
//! harness folds them in sample order so repeated runs are bit-identical.

use crate::neighbors::{RatioSample, SpacingSample};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatError {
    #[error("insufficient data: {0}")]
    InsufficientData(&'static str),
}

const N_FUNCTIONALS: usize = 6; // r, r^2, cos, cos^2, r cos, sin^2

/// Mean with a batch-means standard error.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MomentStat {
    pub mean: f64,
    pub stderr: f64,
}

/// The scalar moments of the complex spacing ratio lambda = r e^{i phi}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Moments {
    pub r: MomentStat,
    pub r2: MomentStat,
    pub cos_phi: MomentStat,
    pub cos2_phi: MomentStat,
    pub r_cos_phi: MomentStat,
    pub sin2_phi: MomentStat,
    pub count: u64,
    pub spectra: u64,
}

/// One histogram bin of a 1D density estimate.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DensityBin {
    pub center: f64,
    pub density: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatAccumulator {
    ratio_grid: usize,
    marginal_bins: usize,
    hist2d: Vec<u64>,
    radial: Vec<u64>,
    angular: Vec<u64>,
    sums: [f64; N_FUNCTIONALS],
    count: u64,
    // per-spectrum batch cross moments for the ratio-estimator variance
    n_spectra: u64,
    sum_c: f64,
    sum_c2: f64,
    sum_s2: [f64; N_FUNCTIONALS],
    sum_cs: [f64; N_FUNCTIONALS],
    // spacing samples (policy-selected: unfolded where unfolding applies)
    nn: Vec<f64>,
    nnn: Vec<f64>,
}

/// Default 2D ratio grid resolution over [-1, 1]^2.
pub const DEFAULT_RATIO_GRID: usize = 200;
/// Default marginal histogram resolution.
pub const DEFAULT_MARGINAL_BINS: usize = 100;

impl Default for StatAccumulator {
    fn default() -> Self {
        Self::new(DEFAULT_RATIO_GRID, DEFAULT_MARGINAL_BINS)
    }
}

impl StatAccumulator {
    pub fn new(ratio_grid: usize, marginal_bins: usize) -> Self {
        assert!(ratio_grid >= 2 && marginal_bins >= 2);
        Self {
            ratio_grid,
            marginal_bins,
            hist2d: vec![0; ratio_grid * ratio_grid],
            radial: vec![0; marginal_bins],
            angular: vec![0; marginal_bins],
            sums: [0.0; N_FUNCTIONALS],
            count: 0,
            n_spectra: 0,
            sum_c: 0.0,
            sum_c2: 0.0,
            sum_s2: [0.0; N_FUNCTIONALS],
            sum_cs: [0.0; N_FUNCTIONALS],
            nn: Vec::new(),
            nnn: Vec::new(),
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn spectra(&self) -> u64 {
        self.n_spectra
    }

    pub fn nn_spacings(&self) -> &[f64] {
        &self.nn
    }

    pub fn nnn_spacings(&self) -> &[f64] {
        &self.nnn
    }

    pub fn ratio_grid(&self) -> usize {
        self.ratio_grid
    }

    /// Ingest one spectrum's worth of samples. Batch statistics are updated
    /// once per call, so call exactly once per spectrum per region.
    pub fn add_spectrum(&mut self, ratios: &[RatioSample], spacings: &[SpacingSample]) {
        let mut spectrum_sums = [0.0f64; N_FUNCTIONALS];
        for s in ratios {
            let x = s.lambda.re;
            let y = s.lambda.im;
            let r2 = x * x + y * y;
            let r = r2.sqrt();
            let (cos_phi, cos2, sin2) = if r2 > 0.0 {
                (x / r, x * x / r2, y * y / r2)
            } else {
                // measure-zero degenerate ratio; count it with null angle terms
                (0.0, 0.0, 0.0)
            };
            let f = [r, r2, cos_phi, cos2, r * cos_phi, sin2];
            for (acc, v) in spectrum_sums.iter_mut().zip(f) {
                *acc += v;
            }
            // 2D grid over [-1,1]^2
            let g = self.ratio_grid as f64;
            let ix = (((x + 1.0) * 0.5 * g) as usize).min(self.ratio_grid - 1);
            let iy = (((y + 1.0) * 0.5 * g) as usize).min(self.ratio_grid - 1);
            self.hist2d[iy * self.ratio_grid + ix] += 1;
            let mb = self.marginal_bins as f64;
            let ir = ((r * mb) as usize).min(self.marginal_bins - 1);
            self.radial[ir] += 1;
            let theta = y.atan2(x);
            let it = (((theta + std::f64::consts::PI) / (2.0 * std::f64::consts::PI) * mb)
                as usize)
                .min(self.marginal_bins - 1);
            self.angular[it] += 1;
        }
        let c = ratios.len() as f64;
        self.count += ratios.len() as u64;
        self.n_spectra += 1;
        self.sum_c += c;
        self.sum_c2 += c * c;
        for k in 0..N_FUNCTIONALS {
            self.sums[k] += spectrum_sums[k];
            self.sum_s2[k] += spectrum_sums[k] * spectrum_sums[k];
            self.sum_cs[k] += c * spectrum_sums[k];
        }
        for s in spacings {
            self.nn.push(s.s_nn_unfolded);
            self.nnn.push(s.s_nnn_unfolded);
        }
    }

    /// Combine with another accumulator built over different spectra.
    pub fn merge(&mut self, other: &Self) {
        assert_eq!(self.ratio_grid, other.ratio_grid);
        assert_eq!(self.marginal_bins, other.marginal_bins);
        for (a, b) in self.hist2d.iter_mut().zip(&other.hist2d) {
            *a += b;
        }
        for (a, b) in self.radial.iter_mut().zip(&other.radial) {
            *a += b;
        }
        for (a, b) in self.angular.iter_mut().zip(&other.angular) {
            *a += b;
        }
        for k in 0..N_FUNCTIONALS {
            self.sums[k] += other.sums[k];
            self.sum_s2[k] += other.sum_s2[k];
            self.sum_cs[k] += other.sum_cs[k];
        }
        self.count += other.count;
        self.n_spectra += other.n_spectra;
        self.sum_c += other.sum_c;
        self.sum_c2 += other.sum_c2;
        self.nn.extend_from_slice(&other.nn);
        self.nnn.extend_from_slice(&other.nnn);
    }

    /// Scalar moments with ratio-estimator standard errors over spectra.
    pub fn moments(&self) -> Result<Moments, StatError> {
        if self.count < 2 || self.n_spectra < 2 {
            return Err(StatError::InsufficientData("moments need at least two samples"));
        }
        let c_tot = self.sum_c;
        let stat = |k: usize| {
            let mean = self.sums[k] / c_tot;
            // linearized variance of the ratio estimator sum_s / sum_c
            let var =
                (self.sum_s2[k] - 2.0 * mean * self.sum_cs[k] + mean * mean * self.sum_c2).max(0.0);
            MomentStat { mean, stderr: var.sqrt() / c_tot }
        };
        Ok(Moments {
            r: stat(0),
            r2: stat(1),
            cos_phi: stat(2),
            cos2_phi: stat(3),
            r_cos_phi: stat(4),
            sin2_phi: stat(5),
            count: self.count,
            spectra: self.n_spectra,
        })
    }

    /// Radial and angular marginal densities of the ratio distribution, each
    /// normalized to unit integral; per-bin errors are Poisson.
    pub fn marginals(&self) -> Result<(Vec<DensityBin>, Vec<DensityBin>), StatError> {
        if self.count < self.marginal_bins as u64 {
            return Err(StatError::InsufficientData("marginals need count >= bins"));
        }
        let n = self.count as f64;
        let dr = 1.0 / self.marginal_bins as f64;
        let radial = self
            .radial
            .iter()
            .enumerate()
            .map(|(i, &c)| DensityBin {
                center: (i as f64 + 0.5) * dr,
                density: c as f64 / (n * dr),
                stderr: (c as f64).sqrt() / (n * dr),
            })
            .collect();
        let dt = 2.0 * std::f64::consts::PI / self.marginal_bins as f64;
        let angular = self
            .angular
            .iter()
            .enumerate()
            .map(|(i, &c)| DensityBin {
                center: -std::f64::consts::PI + (i as f64 + 0.5) * dt,
                density: c as f64 / (n * dt),
                stderr: (c as f64).sqrt() / (n * dt),
            })
            .collect();
        Ok((radial, angular))
    }

    /// The 2D ratio density on its Cartesian grid over [-1,1]^2, normalized
    /// to unit integral. Returns (x, y, density) per cell.
    pub fn ratio_density_2d(&self) -> Vec<(f64, f64, f64)> {
        let g = self.ratio_grid;
        let w = 2.0 / g as f64;
        let n = self.count.max(1) as f64;
        let mut out = Vec::with_capacity(g * g);
        for iy in 0..g {
            for ix in 0..g {
                let x = -1.0 + (ix as f64 + 0.5) * w;
                let y = -1.0 + (iy as f64 + 0.5) * w;
                let d = self.hist2d[iy * g + ix] as f64 / (n * w * w);
                out.push((x, y, d));
            }
        }
        out
    }

    /// Empirical mean of the NN spacings; the first-moment normalization
    /// factor is its reciprocal.
    pub fn nn_mean(&self) -> Result<f64, StatError> {
        if self.nn.is_empty() {
            return Err(StatError::InsufficientData("no NN spacings recorded"));
        }
        Ok(self.nn.iter().sum::<f64>() / self.nn.len() as f64)
    }

    /// NN and NNN spacing densities. With `first_moment_normalize` the NN
    /// mean is rescaled to one and the same factor is applied to the NNN
    /// distances. Returns (nn bins, nnn bins, rescale factor).
    pub fn spacing_histograms(
        &self,
        first_moment_normalize: bool,
        bins: usize,
        s_max: f64,
    ) -> Result<(Vec<DensityBin>, Vec<DensityBin>, f64), StatError> {
        if self.nn.len() < 1000 {
            return Err(StatError::InsufficientData("spacing histograms need >= 1000 samples"));
        }
        let factor = if first_moment_normalize { 1.0 / self.nn_mean()? } else { 1.0 };
        let hist = |vals: &[f64]| {
            let mut counts = vec![0u64; bins];
            let mut inside = 0u64;
            for &v in vals {
                let s = v * factor;
                let idx = (s / s_max * bins as f64) as usize;
                if idx < bins {
                    counts[idx] += 1;
                    inside += 1;
                }
            }
            let ds = s_max / bins as f64;
            let n = inside.max(1) as f64;
            counts
                .iter()
                .enumerate()
                .map(|(i, &c)| DensityBin {
                    center: (i as f64 + 0.5) * ds,
                    density: c as f64 / (n * ds),
                    stderr: (c as f64).sqrt() / (n * ds),
                })
                .collect::<Vec<_>>()
        };
        Ok((hist(&self.nn), hist(&self.nnn), factor))
    }

    /// Sorted NN spacings after first-moment normalization.
    pub fn nn_sorted_normalized(&self) -> Result<Vec<f64>, StatError> {
        let factor = 1.0 / self.nn_mean()?;
        let mut v: Vec<f64> = self.nn.iter().map(|s| s * factor).collect();
        v.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(v)
    }

    /// Sorted NNN spacings rescaled by the NN first-moment factor.
    pub fn nnn_sorted_normalized(&self) -> Result<Vec<f64>, StatError> {
        let factor = 1.0 / self.nn_mean()?;
        let mut v: Vec<f64> = self.nnn.iter().map(|s| s * factor).collect();
        v.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(v)
    }

    /// Least-squares slope of log E_NN(s) against log s over the exact
    /// empirical cumulative (no binning), restricted to s <= s_max_fit on the
    /// first-moment-normalized scale. For a density ~ s^p the slope is p + 1.
    ///
    /// The fit is inverse-variance weighted: Var(log E_hat at the i-th order
    /// statistic) ~ 1/(i+1), and the few smallest spacings would otherwise
    /// dominate the slope through their leverage.
    pub fn small_s_exponent(&self, s_max_fit: f64) -> Result<(f64, f64, f64), StatError> {
        let sorted = self.nn_sorted_normalized()?;
        let n_total = sorted.len() as f64;
        let below = sorted.partition_point(|&s| s <= s_max_fit);
        if below < 100 {
            return Err(StatError::InsufficientData("need >= 100 spacings below the fit cutoff"));
        }
        let mut xs = Vec::with_capacity(below);
        let mut ys = Vec::with_capacity(below);
        let mut ws = Vec::with_capacity(below);
        for (i, &s) in sorted[..below].iter().enumerate() {
            if s <= 0.0 {
                continue;
            }
            xs.push(s.ln());
            ys.push(((i as f64 + 1.0) / n_total).ln());
            ws.push(i as f64 + 1.0);
        }
        let wsum: f64 = ws.iter().sum();
        let mx = xs.iter().zip(&ws).map(|(x, w)| x * w).sum::<f64>() / wsum;
        let my = ys.iter().zip(&ws).map(|(y, w)| y * w).sum::<f64>() / wsum;
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        for ((x, y), w) in xs.iter().zip(&ys).zip(&ws) {
            sxx += w * (x - mx) * (x - mx);
            sxy += w * (x - mx) * (y - my);
        }
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let mut ss_res = 0.0;
        for ((x, y), w) in xs.iter().zip(&ys).zip(&ws) {
            let r = y - (intercept + slope * x);
            ss_res += w * r * r;
        }
        let n = xs.len() as f64;
        let stderr = (ss_res / (n - 2.0) / sxx).sqrt();
        Ok((slope, intercept, stderr))
    }
}

/// Kolmogorov-Smirnov distance between a sorted sample and an analytic CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i as f64 + 1.0) / n - f).abs());
    }
    d
}

/// CSV row writer shared by the export surfaces; full round-trip precision.
pub fn write_density_csv<W: std::io::Write>(
    w: &mut W,
    label: &str,
    kind: &str,
    bins: &[DensityBin],
) -> std::io::Result<()> {
    for b in bins {
        writeln!(w, "{label},{kind},{},{},{}", b.center, b.density, b.stderr)?;
    }
    Ok(())
}
