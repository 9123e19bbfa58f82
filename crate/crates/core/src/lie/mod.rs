//! Matrix Lie group kernel: catalog, algebra vectors, group elements,
//! exponentials, adjoint actions, Haar sampling and projections.

mod algebra;
mod element;
pub mod expm;
mod group;
mod haar;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub use algebra::AlgebraVector;
pub use element::GroupElement;
pub use group::{
    make_group, minkowski, GroupId, GroupSpec, Manifold, Relation, Subgroup, MAX_AMBIENT_DIM,
    MEMBERSHIP_TOL,
};
pub use haar::haar_rotation;

/// Complex ambient matrix; real groups carry zero imaginary parts.
pub type Mat = DMatrix<Complex64>;

/// `Re tr(AB*)`.
pub fn inner_product(a: &Mat, b: &Mat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x.re * y.re + x.im * y.im)
        .sum()
}
