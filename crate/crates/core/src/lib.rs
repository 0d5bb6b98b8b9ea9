//! Numerical toolkit for submodules of the Hardy space over the bidisk.

pub mod blaschke;
pub mod blocks;
pub mod domain;
pub mod error;
pub mod invariants;
pub mod lattice;
pub mod lift;
pub mod linalg;
pub mod nevanlinna;
pub mod report;
pub mod series;
pub mod submodule;
pub mod zw;

pub use num_complex::Complex64;

pub use blaschke::{blaschke_taylor, model_space_basis, BlaschkeProduct, ModelSpaceBasis};
pub use domain::{BiPoint, RadiusGuard, Variable};
pub use error::{BdkError, Result};
pub use invariants::{InvariantValue, Truncation};
pub use lift::{lift, LiftedSubmodule};
pub use report::{PointPair, Report};
pub use series::{
    compose_pair, evaluate, geometric_weight, inner_product, multiply, Caps, Series1D, Series2D,
};
pub use submodule::{
    build_submodule, wedge, CoreOperatorMatrix, GeneratorSource, SubmoduleApprox, WedgeBasis,
};
