//! Spectral statistics of non-Hermitian random matrices in the complex plane.
//!
//! The crate samples the three conjectured-universal symmetry classes of
//! non-Hermitian Gaussian random matrices (complex Ginibre, complex symmetric,
//! complex self-dual) together with a 2D Poisson reference process, computes
//! complex spacing ratios and nearest-neighbour spacing distributions in the
//! bulk and at the spectral edge (with density-based edge unfolding), and
//! provides the corresponding closed-form reference curves: finite-size radial
//! densities, Ginibre conditional spacing laws, N=3 spacing-ratio surmises for
//! the elliptic Ginibre interpolation, their Hermitian limits, and the
//! first-order Fredholm expansion of the conditional gap probability at the
//! edge.

pub mod analytic;
pub mod edgegap;
pub mod eigensolve;
pub mod ensembles;
pub mod harness;
pub mod neighbors;
pub mod quad;
pub mod specfun;
pub mod stats;
pub mod unfold;

pub use num_complex::Complex64;
