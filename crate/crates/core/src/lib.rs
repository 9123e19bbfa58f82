//! Multiscale stochastic differential equations on matrix Lie groups and
//! their homogenized limits on reductive homogeneous spaces.

pub mod effective;
pub mod error;
pub mod lie;
pub mod reductive;
pub mod rng;
pub mod sim;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use lie::{make_group, AlgebraVector, GroupElement, GroupId, GroupSpec, Manifold, Mat};
