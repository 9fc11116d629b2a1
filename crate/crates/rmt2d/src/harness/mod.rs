//! Parallel Monte Carlo driver: sampling, eigensolving, degeneracy collapse,
//! region classification, unfolding and accumulation, with deterministic
//! seeding, optional checkpoints and a persistable spectrum archive.
//!
//! The run is two-pass. Pass one builds the radial histogram over all
//! samples, which the edge unfolding needs in full before any distance can
//! be unfolded. Pass two recomputes (or replays from memory or archive) the
//! spectra, turns them into ratio and spacing samples, and accumulates per
//! region. Workers own nothing: samples are generated from per-index RNG
//! streams, mapped in parallel, and folded in index order, so results are
//! bit-identical for any worker count.

mod archive;

pub use archive::{load_archive, save_archive, ArchiveError, ArchiveHeader};

use crate::eigensolve;
use crate::ensembles::{
    collapse_degeneracy, sample_matrix, sample_poisson, ClassTag, EnsembleSpec, Spectrum,
};
use crate::neighbors::{NeighborGrid, RatioSample, Region, RegionBounds, SpacingSample};
use crate::stats::StatAccumulator;
use crate::unfold::{RadialHistogram, DEFAULT_RADIAL_BINS, DEFAULT_R_MAX};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("sample {sample_index} failed: {reason}")]
    Worker { sample_index: u64, reason: String },
    #[error(transparent)]
    Archive(#[from] ArchiveError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}

/// Which regions have their spacing distances unfolded by the empirical
/// density integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnfoldPolicy {
    None,
    /// Edge and extended-edge points only; the flat bulk of the matrix
    /// classes needs no unfolding.
    EdgeOnly,
    /// Additionally unfold bulk points (the Poisson cloud has no flat bulk).
    EdgeAndPoissonBulk,
}

/// How pass two obtains the spectra produced in pass one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectraRetention {
    /// Recompute from the per-sample seeds (no memory or disk footprint).
    Replay,
    /// Keep eigenvalues in memory between the passes.
    InMemory,
    /// Persist eigenvalues to `<output_dir>/spectra.bin` and read them back.
    Archive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub class_tag: ClassTag,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    pub seed: u64,
    pub samples: u64,
    /// Region radii; derived from the matrix dimension when absent.
    #[serde(default)]
    pub bounds: Option<RegionBounds>,
    #[serde(default = "default_unfold")]
    pub unfold: UnfoldPolicy,
    /// 0 means use all available cores. The RMT2D_WORKERS environment
    /// variable overrides whatever is configured.
    #[serde(default)]
    pub workers: usize,
    /// Checkpoint the pass-two accumulators every this many samples
    /// (0 disables checkpointing).
    #[serde(default)]
    pub checkpoint_every: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_radial_bins")]
    pub radial_bins: usize,
    #[serde(default = "default_r_max")]
    pub r_max: f64,
    #[serde(default = "default_retention")]
    pub retention: SpectraRetention,
    #[serde(default = "default_collapse_tol")]
    pub collapse_tol: f64,
    #[serde(default = "default_ratio_grid")]
    pub ratio_grid: usize,
    #[serde(default = "default_marginal_bins")]
    pub marginal_bins: usize,
}

fn default_unfold() -> UnfoldPolicy {
    UnfoldPolicy::EdgeOnly
}
fn default_radial_bins() -> usize {
    DEFAULT_RADIAL_BINS
}
fn default_r_max() -> f64 {
    DEFAULT_R_MAX
}
fn default_retention() -> SpectraRetention {
    SpectraRetention::Replay
}
fn default_collapse_tol() -> f64 {
    crate::ensembles::COLLAPSE_TOL
}
fn default_ratio_grid() -> usize {
    crate::stats::DEFAULT_RATIO_GRID
}
fn default_marginal_bins() -> usize {
    crate::stats::DEFAULT_MARGINAL_BINS
}

impl ExperimentConfig {
    pub fn new(class_tag: ClassTag, n: usize, samples: u64, seed: u64) -> Self {
        Self {
            class_tag,
            n,
            tau: None,
            seed,
            samples,
            bounds: None,
            unfold: default_unfold(),
            workers: 0,
            checkpoint_every: 0,
            output_dir: None,
            radial_bins: default_radial_bins(),
            r_max: default_r_max(),
            retention: default_retention(),
            collapse_tol: default_collapse_tol(),
            ratio_grid: default_ratio_grid(),
            marginal_bins: default_marginal_bins(),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.samples < 1 {
            return Err(HarnessError::InvalidConfig("samples must be >= 1".into()));
        }
        self.ensemble_spec(0)
            .validate()
            .map_err(|e| HarnessError::InvalidConfig(e.to_string()))?;
        if self.retention == SpectraRetention::Archive && self.output_dir.is_none() {
            return Err(HarnessError::InvalidConfig(
                "archive retention needs an output directory".into(),
            ));
        }
        Ok(())
    }

    fn ensemble_spec(&self, sample_index: u64) -> EnsembleSpec {
        EnsembleSpec {
            class_tag: self.class_tag,
            n: self.n,
            tau: self.tau,
            seed: self.seed,
            sample_index,
        }
    }

    pub fn region_bounds(&self) -> RegionBounds {
        self.bounds
            .unwrap_or_else(|| RegionBounds::for_dimension(self.ensemble_spec(0).effective_dim()))
    }

    pub fn effective_workers(&self) -> usize {
        if let Ok(v) = std::env::var("RMT2D_WORKERS") {
            if let Ok(n) = v.parse::<usize>() {
                if n >= 1 {
                    return n;
                }
            }
        }
        if self.workers >= 1 {
            self.workers
        } else {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        }
    }

    /// Stable fingerprint for checkpoint compatibility checks; worker count
    /// and checkpoint cadence do not affect results, so they are excluded.
    fn fingerprint(&self) -> String {
        let mut c = self.clone();
        c.workers = 0;
        c.checkpoint_every = 0;
        c.output_dir = None;
        serde_json::to_string(&c).expect("config serializes")
    }
}

/// Everything a run produces.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunOutput {
    pub bulk: StatAccumulator,
    pub edge: StatAccumulator,
    pub edge_ext: StatAccumulator,
    pub neither_count: u64,
    pub total_ratio_samples: u64,
    pub histogram: RadialHistogram,
    pub bounds: RegionBounds,
}

/// Draw and diagonalize (or for the Poisson class, draw directly) one sample.
pub fn spectrum_for(config: &ExperimentConfig, idx: u64) -> Result<Spectrum, HarnessError> {
    let spec = config.ensemble_spec(idx);
    let fail = |reason: String| HarnessError::Worker { sample_index: idx, reason };
    if spec.class_tag == ClassTag::PoissonGauss {
        return sample_poisson(&spec).map_err(|e| fail(e.to_string()));
    }
    let j = sample_matrix(&spec).map_err(|e| fail(e.to_string()))?;
    let report = eigensolve::eigenvalues(&j).map_err(|e| fail(e.to_string()))?;
    let spectrum =
        Spectrum { eigenvalues: report.eigenvalues, spec, degeneracy_collapsed: false };
    if spec.class_tag == ClassTag::AiiDag {
        collapse_degeneracy(spectrum, config.collapse_tol).map_err(|e| fail(e.to_string()))
    } else {
        Ok(spectrum)
    }
}

/// Ratio and spacing samples of one spectrum, with unfolding applied
/// according to the policy, plus the count of excluded mid-band points.
fn analyze_spectrum(
    eigenvalues: &[Complex64],
    bounds: &RegionBounds,
    hist: &RadialHistogram,
    policy: UnfoldPolicy,
    idx: u64,
) -> Result<(Vec<RatioSample>, Vec<SpacingSample>), HarnessError> {
    let grid = NeighborGrid::new(eigenvalues)
        .map_err(|e| HarnessError::Worker { sample_index: idx, reason: e.to_string() })?;
    let mut ratios = Vec::with_capacity(eigenvalues.len());
    let mut spacings = Vec::with_capacity(eigenvalues.len());
    for k in 0..eigenvalues.len() {
        let ratio = grid.ratio(k, bounds);
        let mut spacing = grid.spacing(k, bounds);
        let unfold_this = match (policy, spacing.region) {
            (UnfoldPolicy::None, _) => false,
            (_, Region::Neither) => false,
            (UnfoldPolicy::EdgeOnly, Region::Bulk) => false,
            (UnfoldPolicy::EdgeOnly, _) => true,
            (UnfoldPolicy::EdgeAndPoissonBulk, _) => true,
        };
        if unfold_this {
            let z = eigenvalues[k];
            spacing.s_nn_unfolded = hist.unfold_distance(z, spacing.s_nn);
            spacing.s_nnn_unfolded = hist.unfold_distance(z, spacing.s_nnn);
        }
        ratios.push(ratio);
        spacings.push(spacing);
    }
    Ok((ratios, spacings))
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    fingerprint: String,
    next_sample: u64,
    bulk: StatAccumulator,
    edge: StatAccumulator,
    edge_ext: StatAccumulator,
    neither_count: u64,
    total_ratio_samples: u64,
    histogram: RadialHistogram,
}

fn checkpoint_path(config: &ExperimentConfig) -> Option<PathBuf> {
    if config.checkpoint_every == 0 {
        return None;
    }
    config.output_dir.as_ref().map(|d| d.join("checkpoint.json"))
}

/// Execute the full two-pass pipeline.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput, HarnessError> {
    run_inner(config, None)
}

/// `interrupt_after` aborts pass 2 once that many samples are folded (right
/// after the checkpoint write), simulating a killed process for resume tests.
fn run_inner(
    config: &ExperimentConfig,
    interrupt_after: Option<u64>,
) -> Result<RunOutput, HarnessError> {
    config.validate()?;
    let bounds = config.region_bounds();
    let workers = config.effective_workers();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::InvalidConfig(e.to_string()))?;

    // resume pass 2 directly when a compatible checkpoint exists
    let mut resume: Option<Checkpoint> = None;
    if let Some(path) = checkpoint_path(config) {
        if path.exists() {
            let text = std::fs::read_to_string(&path)?;
            let cp: Checkpoint = serde_json::from_str(&text)
                .map_err(|e| HarnessError::Checkpoint(e.to_string()))?;
            if cp.fingerprint == config.fingerprint() {
                resume = Some(cp);
            }
        }
    }

    let chunk = if config.checkpoint_every > 0 {
        config.checkpoint_every
    } else {
        (256u64).min(config.samples).max(1)
    };

    // pass 1: radial histogram over all samples (integer counts merge
    // exactly, so parallel order never matters)
    let mut retained: Vec<Vec<Complex64>> = Vec::new();
    let mut histogram = match &resume {
        Some(cp) => cp.histogram.clone(),
        None => RadialHistogram::new(config.radial_bins, config.r_max),
    };
    if resume.is_none() {
        let mut start = 0u64;
        while start < config.samples {
            let end = (start + chunk).min(config.samples);
            let spectra: Result<Vec<Spectrum>, HarnessError> = pool.install(|| {
                (start..end).into_par_iter().map(|idx| spectrum_for(config, idx)).collect()
            });
            let spectra = spectra?;
            for s in &spectra {
                histogram.record_spectrum(&s.eigenvalues);
            }
            if config.retention != SpectraRetention::Replay {
                retained.extend(spectra.into_iter().map(|s| s.eigenvalues));
            }
            start = end;
        }
        if config.retention == SpectraRetention::Archive {
            let dir = config.output_dir.as_ref().expect("validated");
            std::fs::create_dir_all(dir)?;
            let echo = serde_json::to_value(config).expect("config serializes");
            save_archive(&dir.join("spectra.bin"), echo, &retained)?;
            retained.clear();
        }
    }

    // pass 2: ratios, spacings, unfolding, accumulation in sample order.
    // After a resume the retained spectra are gone, so fall back to replay.
    let archived: Option<Vec<Vec<Complex64>>> = match (&resume, config.retention) {
        (None, SpectraRetention::Archive) => {
            let dir = config.output_dir.as_ref().expect("validated");
            Some(load_archive(&dir.join("spectra.bin"))?.1)
        }
        _ => None,
    };
    let use_retained = resume.is_none() && config.retention == SpectraRetention::InMemory;
    let (mut bulk, mut edge, mut edge_ext, mut neither_count, mut total, mut start) = match resume
    {
        Some(cp) => {
            (cp.bulk, cp.edge, cp.edge_ext, cp.neither_count, cp.total_ratio_samples, cp.next_sample)
        }
        None => (
            StatAccumulator::new(config.ratio_grid, config.marginal_bins),
            StatAccumulator::new(config.ratio_grid, config.marginal_bins),
            StatAccumulator::new(config.ratio_grid, config.marginal_bins),
            0u64,
            0u64,
            0u64,
        ),
    };

    while start < config.samples {
        let end = (start + chunk).min(config.samples);
        let results: Result<Vec<(Vec<RatioSample>, Vec<SpacingSample>)>, HarnessError> =
            pool.install(|| {
                (start..end)
                    .into_par_iter()
                    .map(|idx| {
                        let eigs: Vec<Complex64> = if let Some(all) = &archived {
                            all[idx as usize].clone()
                        } else if use_retained {
                            retained[idx as usize].clone()
                        } else {
                            spectrum_for(config, idx)?.eigenvalues
                        };
                        analyze_spectrum(&eigs, &bounds, &histogram, config.unfold, idx)
                    })
                    .collect()
            });
        for (ratios, spacings) in results? {
            total += ratios.len() as u64;
            let pick = |region_match: &dyn Fn(Region) -> bool| {
                let r: Vec<RatioSample> =
                    ratios.iter().copied().filter(|s| region_match(s.region)).collect();
                let sp: Vec<SpacingSample> =
                    spacings.iter().copied().filter(|s| region_match(s.region)).collect();
                (r, sp)
            };
            let (rb, sb) = pick(&|r| r == Region::Bulk);
            bulk.add_spectrum(&rb, &sb);
            let (re, se) = pick(&|r| r == Region::Edge);
            edge.add_spectrum(&re, &se);
            let (rx, sx) = pick(&|r| r == Region::Edge || r == Region::EdgeExt);
            edge_ext.add_spectrum(&rx, &sx);
            neither_count += ratios.iter().filter(|s| s.region == Region::Neither).count() as u64;
        }
        start = end;
        if let Some(path) = checkpoint_path(config) {
            if let Some(dir) = path.parent() {
                std::fs::create_dir_all(dir)?;
            }
            let cp = Checkpoint {
                fingerprint: config.fingerprint(),
                next_sample: start,
                bulk: bulk.clone(),
                edge: edge.clone(),
                edge_ext: edge_ext.clone(),
                neither_count,
                total_ratio_samples: total,
                histogram: histogram.clone(),
            };
            let tmp = path.with_extension("json.tmp");
            std::fs::write(&tmp, serde_json::to_string(&cp).expect("checkpoint serializes"))?;
            std::fs::rename(&tmp, &path)?;
        }
        if let Some(limit) = interrupt_after {
            if start >= limit && start < config.samples {
                return Err(HarnessError::Worker {
                    sample_index: start,
                    reason: "interrupted for checkpoint testing".into(),
                });
            }
        }
    }

    Ok(RunOutput {
        bulk,
        edge,
        edge_ext,
        neither_count,
        total_ratio_samples: total,
        histogram,
        bounds,
    })
}
