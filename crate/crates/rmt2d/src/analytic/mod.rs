//! Closed-form reference curves: finite-size radial densities, Ginibre
//! conditional NN/NNN spacing laws, 2D Poisson laws, the N=3 elliptic-Ginibre
//! spacing-ratio surmises with their Hermitian limits, and the finite-N
//! pentadiagonal representation of the conditional spacing ratio.

mod density;
mod pentadiagonal;
mod spacing;
mod surmise;

pub use density::{density_ai_dag, density_ginue};
pub use pentadiagonal::{
    pentadiagonal_entry, FiniteNConditionalRatio, GaussianWeight, PentadiagonalSpec, RadialWeight,
};
pub use spacing::{poisson_nn, poisson_nn_cdf, poisson_nnn, poisson_nnn_cdf, GinibreSpacingLaw};
pub use surmise::{
    gue_surmise, hermitian_limit_marginal, surmise_eginue, surmise_limit_consistency,
    surmise_marginal, surmise_positivity_certificate, GueSurmiseKind, MarginalAxis, SurmiseParams,
    SurmiseVariant,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("intermediate scale exceeded the representable range: {0}")]
    Overflow(&'static str),
    #[error("quadrature failure: {0}")]
    Quadrature(#[from] crate::quad::QuadError),
    #[error(transparent)]
    SpecFun(#[from] crate::specfun::SpecFunError),
}
