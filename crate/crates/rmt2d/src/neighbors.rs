//! Nearest- and next-to-nearest-neighbour search in the complex plane,
//! complex spacing ratios, and bulk/edge region classification.
//!
//! Point sets here are near-uniform on a disc, so a uniform cell grid with an
//! expanding ring search beats tree structures. Ties are broken towards the
//! lower index, identically in the grid and the brute-force paths.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NeighborError {
    #[error("need at least 3 points for NN/NNN statistics, got {0}")]
    TooFewPoints(usize),
    #[error("invalid region bounds: require 0 < r_bulk < r_edge_ext < r_edge < 1, got bulk={r_bulk} edge_ext={r_edge_ext} edge={r_edge}")]
    BadBounds { r_bulk: f64, r_edge_ext: f64, r_edge: f64 },
}

/// Region of the reference eigenvalue. `Edge` lies inside `EdgeExt`, so
/// edge samples also belong to every extended-edge statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Bulk,
    Edge,
    EdgeExt,
    Neither,
}

/// Radii separating bulk, edge and extended-edge regions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionBounds {
    pub r_bulk: f64,
    pub r_edge: f64,
    pub r_edge_ext: f64,
    /// Matrix dimension the radii were derived from (2N for the self-dual
    /// class, so the numerical radii match across classes).
    pub n_effective: usize,
}

impl RegionBounds {
    pub fn new(
        r_bulk: f64,
        r_edge: f64,
        r_edge_ext: f64,
        n_effective: usize,
    ) -> Result<Self, NeighborError> {
        if !(r_bulk > 0.0 && r_bulk < r_edge_ext && r_edge_ext < r_edge && r_edge < 1.0) {
            return Err(NeighborError::BadBounds { r_bulk, r_edge_ext, r_edge });
        }
        Ok(Self { r_bulk, r_edge, r_edge_ext, n_effective })
    }

    /// Default radii: bulk below 0.8, edge beyond 1 - 1/sqrt(dim), extended
    /// edge beyond 1 - 2/sqrt(dim). For small dimensions the bulk radius is
    /// pulled in so the ordering stays valid.
    pub fn for_dimension(n_effective: usize) -> Self {
        let sqrt_n = (n_effective as f64).sqrt();
        let r_edge = 1.0 - 1.0 / sqrt_n;
        let r_edge_ext = 1.0 - 2.0 / sqrt_n;
        let r_bulk = 0.8f64.min(0.75 * r_edge_ext);
        Self { r_bulk, r_edge, r_edge_ext, n_effective }
    }

    pub fn classify(&self, z: Complex64) -> Region {
        let r = z.norm();
        if r > self.r_edge {
            Region::Edge
        } else if r > self.r_edge_ext {
            Region::EdgeExt
        } else if r < self.r_bulk {
            Region::Bulk
        } else {
            Region::Neither
        }
    }
}

/// One complex spacing ratio sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioSample {
    /// lambda = (z_nn - z) / (z_nnn - z), inside the closed unit disc.
    pub lambda: Complex64,
    /// |z| of the reference eigenvalue.
    pub ref_radius: f64,
    pub region: Region,
    pub nn_dist: f64,
    pub nnn_dist: f64,
}

/// Raw and unfolded NN/NNN radial distances of one reference eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacingSample {
    pub s_nn: f64,
    pub s_nnn: f64,
    /// Equal to the raw distances when no unfolding applies.
    pub s_nn_unfolded: f64,
    pub s_nnn_unfolded: f64,
    pub region: Region,
}

/// Uniform-grid spatial index over an immutable point set.
pub struct NeighborGrid<'a> {
    points: &'a [Complex64],
    cells: Vec<Vec<u32>>,
    nx: usize,
    ny: usize,
    x0: f64,
    y0: f64,
    inv_cw: f64,
    inv_ch: f64,
    min_cell_dim: f64,
}

impl<'a> NeighborGrid<'a> {
    pub fn new(points: &'a [Complex64]) -> Result<Self, NeighborError> {
        if points.len() < 3 {
            return Err(NeighborError::TooFewPoints(points.len()));
        }
        let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in points {
            xmin = xmin.min(p.re);
            xmax = xmax.max(p.re);
            ymin = ymin.min(p.im);
            ymax = ymax.max(p.im);
        }
        // ~4 points per cell on average keeps ring scans short
        let n = points.len();
        let side = (((n as f64) / 4.0).sqrt().ceil() as usize).max(1);
        let w = (xmax - xmin).max(1e-12);
        let h = (ymax - ymin).max(1e-12);
        let nx = side;
        let ny = side;
        let cw = w / nx as f64;
        let ch = h / ny as f64;
        let mut cells = vec![Vec::new(); nx * ny];
        let inv_cw = 1.0 / cw;
        let inv_ch = 1.0 / ch;
        for (i, p) in points.iter().enumerate() {
            let cx = (((p.re - xmin) * inv_cw) as usize).min(nx - 1);
            let cy = (((p.im - ymin) * inv_ch) as usize).min(ny - 1);
            cells[cy * nx + cx].push(i as u32);
        }
        Ok(Self {
            points,
            cells,
            nx,
            ny,
            x0: xmin,
            y0: ymin,
            inv_cw,
            inv_ch,
            min_cell_dim: cw.min(ch),
        })
    }

    /// Indices of the nearest and second-nearest points to `points[k]`,
    /// excluding `k`; exact distance ties resolve to the lower index.
    pub fn nn_nnn(&self, k: usize) -> (usize, usize) {
        let p = self.points[k];
        let cx = (((p.re - self.x0) * self.inv_cw) as usize).min(self.nx - 1);
        let cy = (((p.im - self.y0) * self.inv_ch) as usize).min(self.ny - 1);
        let mut best = (f64::INFINITY, u32::MAX);
        let mut second = (f64::INFINITY, u32::MAX);
        let max_ring = self.nx.max(self.ny);
        for ring in 0..=max_ring {
            // points in any farther ring are at least this far away
            if ring >= 2 {
                let lower = (ring - 1) as f64 * self.min_cell_dim;
                if second.0 < lower * lower {
                    break;
                }
            }
            self.scan_ring(cx, cy, ring, |idx| {
                if idx as usize == k {
                    return;
                }
                let q = self.points[idx as usize];
                let dx = q.re - p.re;
                let dy = q.im - p.im;
                let d2 = dx * dx + dy * dy;
                let cand = (d2, idx);
                if cand < best {
                    second = best;
                    best = cand;
                } else if cand < second {
                    second = cand;
                }
            });
        }
        debug_assert!(second.1 != u32::MAX);
        (best.1 as usize, second.1 as usize)
    }

    fn scan_ring<F: FnMut(u32)>(&self, cx: usize, cy: usize, ring: usize, mut visit: F) {
        let x_lo = cx.saturating_sub(ring);
        let x_hi = (cx + ring).min(self.nx - 1);
        let y_lo = cy.saturating_sub(ring);
        let y_hi = (cy + ring).min(self.ny - 1);
        for y in y_lo..=y_hi {
            for x in x_lo..=x_hi {
                // only cells at Chebyshev distance exactly `ring`
                let dx = x.abs_diff(cx);
                let dy = y.abs_diff(cy);
                if dx.max(dy) != ring {
                    continue;
                }
                for &idx in &self.cells[y * self.nx + x] {
                    visit(idx);
                }
            }
        }
    }

    /// Complex spacing ratio of point `k`, with the region taken from the
    /// reference point only (never from where NN/NNN land).
    pub fn ratio(&self, k: usize, bounds: &RegionBounds) -> RatioSample {
        let (nn, nnn) = self.nn_nnn(k);
        let z = self.points[k];
        let dn = self.points[nn] - z;
        let dnn = self.points[nnn] - z;
        let mut lambda = dn / dnn;
        // |lambda| <= 1 by construction; clip roundoff overshoot
        let norm = lambda.norm();
        if norm > 1.0 {
            lambda /= norm;
        }
        RatioSample {
            lambda,
            ref_radius: z.norm(),
            region: bounds.classify(z),
            nn_dist: dn.norm(),
            nnn_dist: dnn.norm(),
        }
    }

    /// Raw NN/NNN distances of point `k` (unfolded fields start out raw).
    pub fn spacing(&self, k: usize, bounds: &RegionBounds) -> SpacingSample {
        let (nn, nnn) = self.nn_nnn(k);
        let z = self.points[k];
        let s_nn = (self.points[nn] - z).norm();
        let s_nnn = (self.points[nnn] - z).norm();
        SpacingSample {
            s_nn,
            s_nnn,
            s_nn_unfolded: s_nn,
            s_nnn_unfolded: s_nnn,
            region: bounds.classify(z),
        }
    }
}

/// O(n) scan reference used by the grid's tests and oracles.
pub fn nn_nnn_brute(points: &[Complex64], k: usize) -> Result<(usize, usize), NeighborError> {
    if points.len() < 3 {
        return Err(NeighborError::TooFewPoints(points.len()));
    }
    let p = points[k];
    let mut best = (f64::INFINITY, u32::MAX);
    let mut second = (f64::INFINITY, u32::MAX);
    for (i, q) in points.iter().enumerate() {
        if i == k {
            continue;
        }
        let dx = q.re - p.re;
        let dy = q.im - p.im;
        let cand = (dx * dx + dy * dy, i as u32);
        if cand < best {
            second = best;
            best = cand;
        } else if cand < second {
            second = cand;
        }
    }
    Ok((best.1 as usize, second.1 as usize))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn hand_geometry() {
        let pts = vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 2.0), c(5.0, 0.0)];
        let g = NeighborGrid::new(&pts).unwrap();
        assert_eq!(g.nn_nnn(0), (1, 2));
        assert_eq!(nn_nnn_brute(&pts, 0).unwrap(), (1, 2));
    }

    #[test]
    fn tie_breaks_to_lower_index() {
        let pts = vec![c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(3.0, 0.0)];
        let g = NeighborGrid::new(&pts).unwrap();
        assert_eq!(g.nn_nnn(0), (1, 2));
        assert_eq!(nn_nnn_brute(&pts, 0).unwrap(), (1, 2));
    }

    #[test]
    fn too_few_points() {
        let pts = vec![c(0.0, 0.0), c(1.0, 0.0)];
        assert!(matches!(NeighborGrid::new(&pts), Err(NeighborError::TooFewPoints(2))));
        assert!(nn_nnn_brute(&pts, 0).is_err());
    }

    #[test]
    fn ratio_arithmetic() {
        let bounds = RegionBounds::for_dimension(1024);
        let pts = vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 2.0), c(9.0, 9.0)];
        let g = NeighborGrid::new(&pts).unwrap();
        let r = g.ratio(0, &bounds);
        // lambda = 1 / 2i = -0.5 i
        assert!((r.lambda - c(0.0, -0.5)).norm() < 1e-15);
        assert_eq!(r.region, Region::Bulk);
        assert!(r.nn_dist <= r.nnn_dist);
    }

    #[test]
    fn equidistant_ratio_has_unit_modulus() {
        let bounds = RegionBounds::for_dimension(1024);
        let pts = vec![c(0.0, 0.0), c(1e-9, 0.0), c(0.0, 1e-9), c(4.0, 4.0)];
        let g = NeighborGrid::new(&pts).unwrap();
        let r = g.ratio(0, &bounds);
        assert!((r.lambda.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn region_classification_n1024() {
        let b = RegionBounds::for_dimension(1024);
        assert!((b.r_edge - 0.96875).abs() < 1e-15);
        assert!((b.r_edge_ext - 0.9375).abs() < 1e-15);
        assert_eq!(b.classify(c(0.5, 0.0)), Region::Bulk);
        assert_eq!(b.classify(c(0.97, 0.0)), Region::Edge);
        assert_eq!(b.classify(c(0.9, 0.0)), Region::Neither);
        assert_eq!(b.classify(c(0.0, 0.95)), Region::EdgeExt);
    }

    #[test]
    fn small_dimension_bounds_stay_ordered() {
        let b = RegionBounds::for_dimension(16);
        assert!(b.r_bulk > 0.0 && b.r_bulk < b.r_edge_ext && b.r_edge_ext < b.r_edge);
        assert!(RegionBounds::new(0.8, 0.75, 0.5, 16).is_err());
        assert!(RegionBounds::new(0.4, 0.75, 0.5, 16).is_ok());
    }

    #[test]
    fn grid_matches_brute_force_many_instances() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20_240_217);
        for case in 0..1000 {
            let n = 3 + (case % 16) * 32 + (case % 7);
            let pts: Vec<Complex64> = (0..n)
                .map(|_| c(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0))
                .collect();
            let g = NeighborGrid::new(&pts).unwrap();
            let k = case % n;
            assert_eq!(g.nn_nnn(k), nn_nnn_brute(&pts, k).unwrap(), "case {case} n {n}");
        }
    }

    proptest! {
        #[test]
        fn ratio_in_unit_disc_and_ordered(seed in any::<u64>(), n in 3usize..80) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<Complex64> = (0..n)
                .map(|_| c(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0))
                .collect();
            let bounds = RegionBounds::for_dimension(1024);
            let g = NeighborGrid::new(&pts).unwrap();
            for k in 0..n {
                let r = g.ratio(k, &bounds);
                prop_assert!(r.lambda.norm() <= 1.0 + 1e-12);
                prop_assert!(r.nn_dist <= r.nnn_dist);
                let (nn, nnn) = nn_nnn_brute(&pts, k).unwrap();
                let expect = (pts[nn] - pts[k]) / (pts[nnn] - pts[k]);
                prop_assert!((r.lambda - expect).norm() < 1e-12);
            }
        }

        #[test]
        fn ratio_invariant_under_rigid_motions(seed in any::<u64>()) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = 40;
            let pts: Vec<Complex64> = (0..n)
                .map(|_| c(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0))
                .collect();
            let shift = c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            let phase = Complex64::from_polar(1.0, rng.random::<f64>() * 6.28);
            let scale = 0.1 + 3.0 * rng.random::<f64>();
            let moved: Vec<Complex64> = pts.iter().map(|p| (p + shift) * phase).collect();
            let scaled: Vec<Complex64> = pts.iter().map(|p| p * scale).collect();
            let bounds = RegionBounds::for_dimension(1024);
            let g0 = NeighborGrid::new(&pts).unwrap();
            let g1 = NeighborGrid::new(&moved).unwrap();
            let g2 = NeighborGrid::new(&scaled).unwrap();
            for k in 0..n {
                let a = g0.ratio(k, &bounds).lambda;
                let b = g1.ratio(k, &bounds).lambda;
                prop_assert!((a - b).norm() < 1e-9);
                let s = g2.ratio(k, &bounds).lambda;
                prop_assert!((a.norm() - s.norm()).abs() < 1e-9);
            }
        }
    }
}
