use nalgebra::DVector;

use super::expm::expm;
use super::{AlgebraVector, GroupSpec, Mat};
use crate::error::{Error, Result};

/// A matrix in G together with the defect of its defining relation.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    matrix: Mat,
    residual: f64,
}

impl GroupElement {
    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn into_matrix(self) -> Mat {
        self.matrix
    }
}

impl GroupSpec {
    /// Wraps a matrix after checking the defining relation against the
    /// configured membership tolerance.
    pub fn element(&self, m: Mat) -> Result<GroupElement> {
        self.element_with_tol(m, self.membership_tol())
    }

    pub fn element_with_tol(&self, m: Mat, tol: f64) -> Result<GroupElement> {
        let residual = self.residual(&m);
        if residual.is_nan() || residual > tol {
            return Err(Error::NotInGroup { residual, tol });
        }
        Ok(GroupElement {
            matrix: m,
            residual,
        })
    }

    pub fn identity(&self) -> GroupElement {
        let n = self.ambient_dim();
        GroupElement {
            matrix: Mat::identity(n, n),
            residual: 0.0,
        }
    }

    /// `exp(tX)`.
    pub fn exp(&self, x: &AlgebraVector, t: f64) -> GroupElement {
        let m = expm(&(x.matrix() * num_complex::Complex64::new(t, 0.0)));
        let residual = self.residual(&m);
        GroupElement {
            matrix: m,
            residual,
        }
    }

    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.element(a.matrix() * b.matrix())
    }

    pub fn inverse(&self, g: &GroupElement) -> GroupElement {
        GroupElement {
            matrix: self.inverse_matrix(g.matrix()),
            residual: g.residual,
        }
    }

    /// Point `g·o` on the model manifold (Hopf map for SU(2)).
    pub fn project(&self, g: &GroupElement) -> DVector<f64> {
        self.project_matrix(g.matrix())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{make_group, GroupId};
    use num_complex::Complex64;

    #[test]
    fn exp_zero_is_identity() {
        for id in [
            GroupId::Su2Hopf,
            GroupId::Sphere { n: 3 },
            GroupId::Hyperbolic { n: 2 },
        ] {
            let spec = make_group(id).unwrap();
            let g = spec.exp(&spec.zero_vector(), 1.7);
            assert_eq!(g.matrix(), spec.identity().matrix());
        }
    }

    #[test]
    fn exp_pauli_x1_is_diagonal_phase() {
        let spec = make_group(GroupId::Su2Hopf).unwrap();
        let t = 1.3;
        let g = spec.exp(&spec.basis_vector(0), t);
        let m = g.matrix();
        assert!((m[(0, 0)] - Complex64::new(0.0, t).exp()).norm() < 1e-15);
        assert!((m[(1, 1)] - Complex64::new(0.0, -t).exp()).norm() < 1e-15);
        assert!(g.residual() < 1e-11);
    }

    #[test]
    fn non_member_rejected() {
        let spec = make_group(GroupId::Sphere { n: 2 }).unwrap();
        let m = Mat::identity(3, 3) * Complex64::new(2.0, 0.0);
        assert!(matches!(spec.element(m), Err(Error::NotInGroup { .. })));
        let mut flip = Mat::identity(3, 3);
        flip[(0, 0)] = Complex64::new(-1.0, 0.0);
        assert!(spec.element(flip).is_err());
    }

    #[test]
    fn lorentz_inverse() {
        let spec = make_group(GroupId::Hyperbolic { n: 3 }).unwrap();
        let x = spec.vector(&[0.2, -0.5, 0.3, 1.1, -0.4, 0.9]).unwrap();
        let g = spec.exp(&x, 1.0);
        assert!(g.residual() < 1e-12);
        let prod = g.matrix() * spec.inverse(&g).matrix();
        assert!((prod - Mat::identity(4, 4)).norm() < 1e-12);
    }
}
