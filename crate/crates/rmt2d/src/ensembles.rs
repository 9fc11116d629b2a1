//! Gaussian random-matrix ensembles for the three non-Hermitian symmetry
//! classes plus the 2D Poisson reference process.
//!
//! Normalization puts the limiting spectral support on the unit disc: entry
//! variance 1/dim, where dim is the full matrix dimension (2N for the
//! self-dual class). Sampling is deterministic per `(seed, sample_index)`,
//! with one independent ChaCha stream per sample so workers never share RNG
//! state.

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Symmetry class selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassTag {
    /// Complex Ginibre: i.i.d. complex Gaussian entries, no symmetry.
    A,
    /// Elliptic Ginibre, interpolating A (tau = 0) towards GUE (tau -> 1).
    EGinUe,
    /// Complex symmetric, J = J^T.
    AiDag,
    /// Complex self-dual, J = Σ J^T Σ; spectra come in Kramers pairs.
    AiiDag,
    /// Independent complex Gaussian points (no matrix, no repulsion).
    PoissonGauss,
}

impl ClassTag {
    pub fn label(self) -> &'static str {
        match self {
            ClassTag::A => "A",
            ClassTag::EGinUe => "eGinUE",
            ClassTag::AiDag => "AI_dag",
            ClassTag::AiiDag => "AII_dag",
            ClassTag::PoissonGauss => "poisson_gauss",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnsembleError {
    #[error("invalid ensemble spec: {0}")]
    InvalidSpec(String),
    #[error("degeneracy collapse failed: pair distance {dist:.3e} exceeds tolerance {tol:.3e} (spectral scale {scale:.3e})")]
    PairingFailure { dist: f64, tol: f64, scale: f64 },
}

/// Everything needed to reproduce one sample of one ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub class_tag: ClassTag,
    /// Matrix size N; the self-dual class builds a 2N x 2N matrix from N x N blocks.
    pub n: usize,
    /// Ellipticity, only meaningful for `EGinUe`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    pub seed: u64,
    pub sample_index: u64,
}

impl EnsembleSpec {
    pub fn new(class_tag: ClassTag, n: usize, seed: u64) -> Self {
        Self { class_tag, n, tau: None, seed, sample_index: 0 }
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = Some(tau);
        self
    }

    pub fn with_sample_index(mut self, idx: u64) -> Self {
        self.sample_index = idx;
        self
    }

    pub fn validate(&self) -> Result<(), EnsembleError> {
        if self.n < 2 {
            return Err(EnsembleError::InvalidSpec(format!("n must be >= 2, got {}", self.n)));
        }
        match (self.class_tag, self.tau) {
            (ClassTag::EGinUe, Some(t)) if !(0.0..1.0).contains(&t) => Err(
                EnsembleError::InvalidSpec(format!("tau must lie in [0, 1), got {t}")),
            ),
            (ClassTag::EGinUe, None) => {
                Err(EnsembleError::InvalidSpec("eGinUE requires tau".into()))
            }
            (ClassTag::EGinUe, Some(_)) => Ok(()),
            (_, Some(_)) => Err(EnsembleError::InvalidSpec(format!(
                "tau is only meaningful for eGinUE, not {}",
                self.class_tag.label()
            ))),
            (_, None) => Ok(()),
        }
    }

    /// Full matrix dimension (2N for the self-dual class).
    pub fn matrix_dim(&self) -> usize {
        match self.class_tag {
            ClassTag::AiiDag => 2 * self.n,
            _ => self.n,
        }
    }

    /// Dimension entering the edge-region radii, so that 1 - 1/sqrt(dim)
    /// takes the same numerical value across classes at matched matrix size.
    pub fn effective_dim(&self) -> usize {
        self.matrix_dim()
    }
}

/// One sample's eigenvalues plus provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub spec: EnsembleSpec,
    /// Set once Kramers pairs of the self-dual class have been reduced to one
    /// representative each.
    pub degeneracy_collapsed: bool,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-sample RNG: a ChaCha stream keyed by splitmix64 mixing of
/// (master seed, sample index). Distinct indices give independent streams.
pub fn sample_rng(seed: u64, sample_index: u64) -> ChaCha8Rng {
    let mut state = seed ^ 0x6a09_e667_f3bc_c909u64.wrapping_mul(sample_index.wrapping_add(1));
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Marsaglia polar transform: two independent standard normals.
fn gaussian_pair<R: Rng>(rng: &mut R) -> (f64, f64) {
    loop {
        let u: f64 = 2.0 * rng.random::<f64>() - 1.0;
        let v: f64 = 2.0 * rng.random::<f64>() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            let m = (-2.0 * s.ln() / s).sqrt();
            return (u * m, v * m);
        }
    }
}

/// Complex Gaussian with E|z|^2 = var (each component has variance var/2).
fn complex_gaussian<R: Rng>(rng: &mut R, var: f64) -> Complex64 {
    let (a, b) = gaussian_pair(rng);
    let s = (0.5 * var).sqrt();
    Complex64::new(a * s, b * s)
}

/// Hermitian GUE-normalized matrix: E|H_jk|^2 = 1/n for all entries.
fn gue_matrix<R: Rng>(rng: &mut R, n: usize) -> Array2<Complex64> {
    let mut h = Array2::<Complex64>::zeros((n, n));
    let off = (0.5 / n as f64).sqrt();
    let diag = (1.0 / n as f64).sqrt();
    for i in 0..n {
        let (g, _) = gaussian_pair(rng);
        h[[i, i]] = Complex64::new(g * diag, 0.0);
        for j in (i + 1)..n {
            let (a, b) = gaussian_pair(rng);
            let z = Complex64::new(a * off, b * off);
            h[[i, j]] = z;
            h[[j, i]] = z.conj();
        }
    }
    h
}

/// Draw the random matrix for a matrix-valued class (everything but Poisson).
pub fn sample_matrix(spec: &EnsembleSpec) -> Result<Array2<Complex64>, EnsembleError> {
    spec.validate()?;
    let mut rng = sample_rng(spec.seed, spec.sample_index);
    match spec.class_tag {
        ClassTag::PoissonGauss => Err(EnsembleError::InvalidSpec(
            "Poisson points are drawn directly; use sample_poisson".into(),
        )),
        // Class A is eGinUE at tau = 0 through the same generator path, so
        // fixed-seed samples agree bit for bit between the two tags.
        ClassTag::A => Ok(elliptic_matrix(&mut rng, spec.n, 0.0)),
        ClassTag::EGinUe => Ok(elliptic_matrix(&mut rng, spec.n, spec.tau.unwrap())),
        ClassTag::AiDag => Ok(symmetric_matrix(&mut rng, spec.n)),
        ClassTag::AiiDag => Ok(self_dual_matrix(&mut rng, spec.n)),
    }
}

/// J = sqrt((1+tau)/2) H1 + i sqrt((1-tau)/2) H2 with independent Hermitian
/// H1, H2; gives E|J_jk|^2 = 1/N, E[J_jk J_kj] = tau/N.
fn elliptic_matrix<R: Rng>(rng: &mut R, n: usize, tau: f64) -> Array2<Complex64> {
    let h1 = gue_matrix(rng, n);
    let h2 = gue_matrix(rng, n);
    let cp = ((1.0 + tau) / 2.0).sqrt();
    let cm = ((1.0 - tau) / 2.0).sqrt();
    let mut j = Array2::<Complex64>::zeros((n, n));
    for r in 0..n {
        for c in 0..n {
            j[[r, c]] = cp * h1[[r, c]] + Complex64::i() * cm * h2[[r, c]];
        }
    }
    j
}

/// (G + G^T)/sqrt(2) with G i.i.d. complex Gaussian of entry variance 1/N;
/// off-diagonal variance 1/N, exact symmetry by construction.
fn symmetric_matrix<R: Rng>(rng: &mut R, n: usize) -> Array2<Complex64> {
    let var = 1.0 / n as f64;
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut j = Array2::<Complex64>::zeros((n, n));
    for r in 0..n {
        for c in 0..n {
            let g = complex_gaussian(rng, var) * inv_sqrt2;
            j[[r, c]] += g;
            j[[c, r]] += g;
        }
    }
    j
}

/// Block form [[A, B], [C, A^T]] with antisymmetric B, C; satisfies
/// J = Σ J^T Σ exactly. Entry variance 1/(2N) so the 2N x 2N spectrum fills
/// the unit disc.
fn self_dual_matrix<R: Rng>(rng: &mut R, n: usize) -> Array2<Complex64> {
    let m = 2 * n;
    let var = 1.0 / m as f64;
    let mut j = Array2::<Complex64>::zeros((m, m));
    for r in 0..n {
        for c in 0..n {
            let a = complex_gaussian(rng, var);
            j[[r, c]] = a;
            j[[n + c, n + r]] = a;
        }
    }
    for r in 0..n {
        for c in (r + 1)..n {
            let b = complex_gaussian(rng, var);
            j[[r, n + c]] = b;
            j[[c, n + r]] = -b;
            let cc = complex_gaussian(rng, var);
            j[[n + r, c]] = cc;
            j[[n + c, r]] = -cc;
        }
    }
    j
}

/// Variance parameter of the 2D Poisson cloud: 2σ² chosen so the probability
/// inside the typical edge radius 1 - 1/sqrt(N) equals the ratio of the areas
/// of edge disc and unit disc.
pub fn poisson_two_sigma_squared(n: usize) -> f64 {
    let r = 1.0 - 1.0 / (n as f64).sqrt();
    let r2 = r * r;
    -r2 / (1.0 - r2).ln()
}

/// N independent rotationally symmetric Gaussian points.
pub fn sample_poisson(spec: &EnsembleSpec) -> Result<Spectrum, EnsembleError> {
    spec.validate()?;
    if spec.class_tag != ClassTag::PoissonGauss {
        return Err(EnsembleError::InvalidSpec(format!(
            "sample_poisson expects the Poisson class, got {}",
            spec.class_tag.label()
        )));
    }
    let mut rng = sample_rng(spec.seed, spec.sample_index);
    let var = poisson_two_sigma_squared(spec.n);
    let points = (0..spec.n).map(|_| complex_gaussian(&mut rng, var)).collect();
    Ok(Spectrum { eigenvalues: points, spec: *spec, degeneracy_collapsed: false })
}

/// Reduce the doubly degenerate spectrum of the self-dual class to one
/// representative per Kramers pair.
///
/// Pairs greedily by nearest unpaired partner; errors if any pairing distance
/// exceeds `tol` times the mean eigenvalue modulus, which signals eigensolver
/// trouble rather than genuine spectra.
pub fn collapse_degeneracy(spectrum: Spectrum, tol: f64) -> Result<Spectrum, EnsembleError> {
    let eigs = &spectrum.eigenvalues;
    if spectrum.spec.class_tag != ClassTag::AiiDag {
        return Err(EnsembleError::InvalidSpec(
            "degeneracy collapse applies to the self-dual class only".into(),
        ));
    }
    if eigs.len() % 2 != 0 {
        return Err(EnsembleError::InvalidSpec(format!(
            "expected an even eigenvalue count, got {}",
            eigs.len()
        )));
    }
    let scale = (eigs.iter().map(|z| z.norm()).sum::<f64>() / eigs.len().max(1) as f64).max(1e-300);
    let mut used = vec![false; eigs.len()];
    let mut kept = Vec::with_capacity(eigs.len() / 2);
    for i in 0..eigs.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let mut best = f64::INFINITY;
        let mut partner = usize::MAX;
        for (j, &u) in used.iter().enumerate() {
            if !u {
                let d = (eigs[i] - eigs[j]).norm();
                if d < best {
                    best = d;
                    partner = j;
                }
            }
        }
        if partner == usize::MAX || best > tol * scale {
            return Err(EnsembleError::PairingFailure { dist: best, tol: tol * scale, scale });
        }
        used[partner] = true;
        kept.push(eigs[i]);
    }
    Ok(Spectrum { eigenvalues: kept, spec: spectrum.spec, degeneracy_collapsed: true })
}

/// Default pairing tolerance, relative to the mean eigenvalue modulus.
pub const COLLAPSE_TOL: f64 = 1e-8;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_rules() {
        assert!(EnsembleSpec::new(ClassTag::A, 1, 0).validate().is_err());
        assert!(EnsembleSpec::new(ClassTag::EGinUe, 8, 0).validate().is_err());
        assert!(EnsembleSpec::new(ClassTag::EGinUe, 8, 0).with_tau(1.0).validate().is_err());
        assert!(EnsembleSpec::new(ClassTag::EGinUe, 8, 0).with_tau(0.5).validate().is_ok());
        assert!(EnsembleSpec::new(ClassTag::A, 8, 0).with_tau(0.5).validate().is_err());
        assert!(sample_matrix(&EnsembleSpec::new(ClassTag::PoissonGauss, 8, 0)).is_err());
        assert!(sample_poisson(&EnsembleSpec::new(ClassTag::A, 8, 0)).is_err());
    }

    #[test]
    fn reproducibility_bit_exact() {
        let spec = EnsembleSpec::new(ClassTag::AiDag, 16, 42).with_sample_index(7);
        let a = sample_matrix(&spec).unwrap();
        let b = sample_matrix(&spec).unwrap();
        assert_eq!(a, b);
        let other = sample_matrix(&spec.with_sample_index(8)).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn symmetric_class_is_exactly_symmetric() {
        let spec = EnsembleSpec::new(ClassTag::AiDag, 4, 123);
        let j = sample_matrix(&spec).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(j[[r, c]], j[[c, r]]);
            }
        }
    }

    #[test]
    fn self_dual_symmetry_exact() {
        let n = 3;
        let spec = EnsembleSpec::new(ClassTag::AiiDag, n, 9);
        let j = sample_matrix(&spec).unwrap();
        let m = 2 * n;
        assert_eq!(j.dim(), (m, m));
        // Σ J^T Σ with Σ = [[0, -i I], [i I, 0]]: (Σ J^T Σ)[r][c] checked entrywise
        let sigma = {
            let mut s = Array2::<Complex64>::zeros((m, m));
            for k in 0..n {
                s[[k, n + k]] = Complex64::new(0.0, -1.0);
                s[[n + k, k]] = Complex64::new(0.0, 1.0);
            }
            s
        };
        let jt = j.t().to_owned();
        let recon = sigma.dot(&jt).dot(&sigma);
        for r in 0..m {
            for c in 0..m {
                assert!((recon[[r, c]] - j[[r, c]]).norm() == 0.0, "deviation at ({r},{c})");
            }
        }
    }

    #[test]
    fn eginue_tau_zero_equals_class_a() {
        let a = sample_matrix(&EnsembleSpec::new(ClassTag::A, 12, 5).with_sample_index(3)).unwrap();
        let e = sample_matrix(
            &EnsembleSpec::new(ClassTag::EGinUe, 12, 5).with_tau(0.0).with_sample_index(3),
        )
        .unwrap();
        assert_eq!(a, e);
    }

    #[test]
    fn class_a_trace_normalization() {
        // E Tr J J^dag = N when E|J_jk|^2 = 1/N
        let n = 256;
        let samples = 100;
        let mut vals = Vec::with_capacity(samples);
        for k in 0..samples {
            let spec = EnsembleSpec::new(ClassTag::A, n, 77).with_sample_index(k as u64);
            let j = sample_matrix(&spec).unwrap();
            vals.push(j.iter().map(|z| z.norm_sqr()).sum::<f64>());
        }
        let mean = vals.iter().sum::<f64>() / samples as f64;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (samples - 1) as f64;
        let se = (var / samples as f64).sqrt();
        assert!(
            (mean - n as f64).abs() < 3.0 * se.max(1e-6),
            "mean {mean} vs {n}, se {se}"
        );
    }

    #[test]
    fn entry_streams_uncorrelated_across_samples() {
        let n = 32;
        let a = sample_matrix(&EnsembleSpec::new(ClassTag::A, n, 1).with_sample_index(0)).unwrap();
        let b = sample_matrix(&EnsembleSpec::new(ClassTag::A, n, 1).with_sample_index(1)).unwrap();
        let mut dot = 0.0;
        let mut na = 0.0;
        let mut nb = 0.0;
        for (x, y) in a.iter().zip(b.iter()) {
            dot += x.re * y.re + x.im * y.im;
            na += x.norm_sqr();
            nb += y.norm_sqr();
        }
        let corr = dot / (na * nb).sqrt();
        assert!(corr.abs() < 0.15, "corr = {corr}");
    }

    #[test]
    fn poisson_variance_formula() {
        // direct evaluation at N = 1024: r = 0.96875, r^2 = 0.9384765625,
        // -r^2 / ln(1 - r^2) = 0.33657...
        let v = poisson_two_sigma_squared(1024);
        assert!((v - 0.336_566).abs() < 1e-5, "2 sigma^2 = {v}");
        // defining property: P(|z| < r) = r^2
        let r: f64 = 0.96875;
        assert!(((1.0 - (-r * r / v).exp()) - r * r).abs() < 1e-12);
    }

    #[test]
    fn poisson_cloud_statistics() {
        let n = 1024;
        let samples = 200;
        let r_edge = 1.0 - 1.0 / (n as f64).sqrt();
        let mut inside = 0usize;
        let mut mean = Complex64::new(0.0, 0.0);
        for k in 0..samples {
            let spec = EnsembleSpec::new(ClassTag::PoissonGauss, n, 11).with_sample_index(k);
            let s = sample_poisson(&spec).unwrap();
            assert_eq!(s.eigenvalues.len(), n);
            inside += s.eigenvalues.iter().filter(|z| z.norm() < r_edge).count();
            mean += s.eigenvalues.iter().sum::<Complex64>();
        }
        let total = (n as u64 * samples) as f64;
        let frac = inside as f64 / total;
        let expect = r_edge * r_edge;
        // binomial MC error
        let se = (expect * (1.0 - expect) / total).sqrt();
        assert!((frac - expect).abs() < 4.0 * se, "frac {frac} vs {expect} (se {se})");
        let sigma = (poisson_two_sigma_squared(n) / 2.0).sqrt();
        let mean_se = sigma / total.sqrt();
        assert!(mean.re.abs() / total < 3.0 * mean_se);
        assert!(mean.im.abs() / total < 3.0 * mean_se);
    }

    #[test]
    fn collapse_exact_and_tolerant() {
        let spec = EnsembleSpec::new(ClassTag::AiiDag, 2, 0);
        let a = Complex64::new(0.3, -0.1);
        let b = Complex64::new(-0.7, 0.4);
        let exact = Spectrum {
            eigenvalues: vec![a, a, b, b],
            spec,
            degeneracy_collapsed: false,
        };
        let collapsed = collapse_degeneracy(exact, COLLAPSE_TOL).unwrap();
        assert_eq!(collapsed.eigenvalues, vec![a, b]);
        assert!(collapsed.degeneracy_collapsed);

        let eps = Complex64::new(1e-12, 0.0);
        let perturbed = Spectrum {
            eigenvalues: vec![a, b, a + eps, b - eps],
            spec,
            degeneracy_collapsed: false,
        };
        assert_eq!(collapse_degeneracy(perturbed, 1e-8).unwrap().eigenvalues.len(), 2);

        let broken = Spectrum {
            eigenvalues: vec![a, a, b, b + Complex64::new(1e-3, 0.0)],
            spec,
            degeneracy_collapsed: false,
        };
        assert!(matches!(
            collapse_degeneracy(broken, 1e-8),
            Err(EnsembleError::PairingFailure { .. })
        ));
    }
}
