//! Independent validators and synthetic data generators.
//!
//! Nothing here is needed to compute scores. The checks re-derive quantities
//! along a second route (explicit features, Jacobi rotations, closed forms) so
//! the main pipeline can be tested against them.

mod jacobi;
mod mixture;
mod prop1;
pub mod scenarios;
mod theorem1;

pub use jacobi::jacobi_eigen;
pub use mixture::{component_moments, sample_mixture, ConditionalGenerator, MixtureSpec};
pub use prop1::{
    check_proposition1, explicit_feature_covariance, reference_entropy, FeatureCovariance,
    Prop1Report,
};
pub use theorem1::{check_theorem1, Theorem1Config, Theorem1Report};
