use nalgebra::{DMatrix, DVector};

use super::{GroupElement, GroupSpec, Mat};
use crate::error::{Error, Result};

/// Closure tolerance for re-expressing commutators and conjugates.
const CLOSURE_TOL: f64 = 1e-11;

/// Element of the Lie algebra with coordinates in the full `h ++ m` basis of
/// its [`GroupSpec`] and the cached ambient matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraVector {
    coeffs: DVector<f64>,
    matrix: Mat,
}

impl AlgebraVector {
    pub fn coeffs(&self) -> &DVector<f64> {
        &self.coeffs
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    /// Squared norm; the basis is orthonormal so this is ⟨X,X⟩.
    pub fn norm_squared(&self) -> f64 {
        self.coeffs.norm_squared()
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }

    pub fn dot(&self, other: &AlgebraVector) -> f64 {
        self.coeffs.dot(&other.coeffs)
    }

    /// Coordinates of the h-part.
    pub fn h_coords(&self, spec: &GroupSpec) -> DVector<f64> {
        self.coeffs.rows(0, spec.dim_h()).into_owned()
    }

    /// Coordinates of the m-part in the m-basis.
    pub fn m_coords(&self, spec: &GroupSpec) -> DVector<f64> {
        self.coeffs.rows(spec.dim_h(), spec.dim_m()).into_owned()
    }

    pub fn scale(&self, s: f64) -> AlgebraVector {
        AlgebraVector {
            coeffs: &self.coeffs * s,
            matrix: &self.matrix * num_complex::Complex64::new(s, 0.0),
        }
    }

    pub fn add(&self, other: &AlgebraVector) -> AlgebraVector {
        AlgebraVector {
            coeffs: &self.coeffs + &other.coeffs,
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }
}

impl GroupSpec {
    /// Algebra vector from full-basis coordinates.
    pub fn vector(&self, coeffs: &[f64]) -> Result<AlgebraVector> {
        if coeffs.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: coeffs.len(),
            });
        }
        Ok(AlgebraVector {
            coeffs: DVector::from_column_slice(coeffs),
            matrix: self.combine(coeffs),
        })
    }

    pub fn zero_vector(&self) -> AlgebraVector {
        AlgebraVector {
            coeffs: DVector::zeros(self.dim()),
            matrix: Mat::zeros(self.ambient_dim(), self.ambient_dim()),
        }
    }

    /// Vector in h from coordinates in the h-basis.
    pub fn h_vector(&self, coords: &[f64]) -> Result<AlgebraVector> {
        if coords.len() != self.dim_h() {
            return Err(Error::DimensionMismatch {
                expected: self.dim_h(),
                got: coords.len(),
            });
        }
        let mut full = vec![0.0; self.dim()];
        full[..coords.len()].copy_from_slice(coords);
        self.vector(&full)
    }

    /// Vector in m from coordinates in the m-basis.
    pub fn m_vector(&self, coords: &[f64]) -> Result<AlgebraVector> {
        if coords.len() != self.dim_m() {
            return Err(Error::DimensionMismatch {
                expected: self.dim_m(),
                got: coords.len(),
            });
        }
        let mut full = vec![0.0; self.dim()];
        full[self.dim_h()..].copy_from_slice(coords);
        self.vector(&full)
    }

    /// i-th vector of the full basis.
    pub fn basis_vector(&self, i: usize) -> AlgebraVector {
        let mut full = vec![0.0; self.dim()];
        full[i] = 1.0;
        self.vector(&full).expect("index in range")
    }

    /// j-th vector of the m-basis.
    pub fn m_basis_vector(&self, j: usize) -> AlgebraVector {
        self.basis_vector(self.dim_h() + j)
    }

    /// Re-expresses an ambient matrix in basis coordinates.
    pub fn from_matrix(&self, m: &Mat) -> Result<AlgebraVector> {
        let (coeffs, residual) = self.decompose(m);
        if residual > CLOSURE_TOL * (1.0 + m.norm()) {
            return Err(Error::ClosureViolation { residual });
        }
        Ok(AlgebraVector {
            coeffs,
            matrix: m.clone(),
        })
    }

    /// Checks membership in h, returning the m-leak on failure.
    pub fn require_h(&self, x: &AlgebraVector) -> Result<()> {
        let leak = x.m_coords(self).norm();
        if leak > 1e-12 * (1.0 + x.norm()) {
            Err(Error::InputNotInH { leak })
        } else {
            Ok(())
        }
    }

    pub fn require_m(&self, x: &AlgebraVector) -> Result<()> {
        let leak = x.h_coords(self).norm();
        if leak > 1e-12 * (1.0 + x.norm()) {
            Err(Error::InputNotInM { leak })
        } else {
            Ok(())
        }
    }

    /// Matrix commutator `XY - YX` in basis coordinates.
    pub fn bracket(&self, x: &AlgebraVector, y: &AlgebraVector) -> Result<AlgebraVector> {
        let comm = x.matrix() * y.matrix() - y.matrix() * x.matrix();
        self.from_matrix(&comm)
    }

    /// Matrix of ad(X) on basis coordinates, from the cached structure constants.
    pub fn ad_matrix(&self, x: &AlgebraVector) -> DMatrix<f64> {
        let dim = self.dim();
        let mut out = DMatrix::zeros(dim, dim);
        for (i, &c) in x.coeffs().iter().enumerate() {
            if c != 0.0 {
                out += self.ad_basis(i) * c;
            }
        }
        out
    }

    /// Block of ad(X) mapping m-coordinates to m-coordinates.
    pub fn ad_on_m(&self, x: &AlgebraVector) -> DMatrix<f64> {
        let p = self.dim_h();
        let q = self.dim_m();
        self.ad_matrix(x).view((p, p), (q, q)).into_owned()
    }

    /// Adjoint action `g Y g⁻¹`.
    pub fn adjoint(&self, g: &GroupElement, y: &AlgebraVector) -> Result<AlgebraVector> {
        let conj = self.conjugate(g.matrix(), y.matrix());
        self.from_matrix(&conj)
    }

    /// `g Y g⁻¹` on raw matrices.
    pub fn conjugate(&self, g: &Mat, y: &Mat) -> Mat {
        g * y * self.inverse_matrix(g)
    }

    /// Matrix of Ad(h) on m-coordinates, for h in H. Column l holds the
    /// coordinates of `h Y_l h⁻¹`.
    pub fn adjoint_on_m(&self, h: &Mat) -> DMatrix<f64> {
        let q = self.dim_m();
        let hinv = self.inverse_matrix(h);
        let mut out = DMatrix::zeros(q, q);
        for (l, y) in self.m_basis().iter().enumerate() {
            let moved = h * y * &hinv;
            for (k, b) in self.m_basis().iter().enumerate() {
                out[(k, l)] = self.inner(&moved, b);
            }
        }
        out
    }

    /// m-coordinates of a matrix known to lie in m (no closure check).
    pub fn m_coords_of(&self, m: &Mat) -> DVector<f64> {
        DVector::from_iterator(
            self.dim_m(),
            self.m_basis().iter().map(|b| self.inner(m, b)),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{make_group, GroupId};
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn bracket_of_self_is_zero() {
        let spec = make_group(GroupId::Sphere { n: 4 }).unwrap();
        let x = spec
            .vector(
                &(0..spec.dim())
                    .map(|i| (i as f64).sin())
                    .collect::<Vec<_>>(),
            )
            .unwrap();
        assert!(spec.bracket(&x, &x).unwrap().norm() == 0.0);
    }

    #[test]
    fn pauli_bracket_from_matrices() {
        let spec = make_group(GroupId::Su2Hopf).unwrap();
        let x1 = spec.basis_vector(0);
        let x2 = spec.basis_vector(1);
        let b = spec.bracket(&x1, &x2).unwrap();
        // X1 X2 - X2 X1 evaluates to +2 X3 for these matrices.
        assert!((b.coeffs()[2] - 2.0).abs() < 1e-15);
        assert!(b.coeffs()[0].abs() < 1e-15 && b.coeffs()[1].abs() < 1e-15);
    }

    #[test]
    fn so4_bracket_a12_a13() {
        let spec = make_group(GroupId::So4So3).unwrap();
        // h-basis order: A12, A13, A23
        let b = spec
            .bracket(&spec.basis_vector(0), &spec.basis_vector(1))
            .unwrap();
        assert!((b.coeffs()[2] + FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(b
            .coeffs()
            .iter()
            .enumerate()
            .all(|(i, c)| i == 2 || c.abs() < 1e-15));
    }

    #[test]
    fn reconstructs_matrix() {
        let spec = make_group(GroupId::Hyperbolic { n: 3 }).unwrap();
        let c: Vec<f64> = (0..spec.dim()).map(|i| 0.3 * i as f64 - 0.7).collect();
        let v = spec.vector(&c).unwrap();
        let again = spec.from_matrix(v.matrix()).unwrap();
        assert!((again.coeffs() - v.coeffs()).norm() < 1e-13);
        assert!((v.norm_squared() - spec.inner(v.matrix(), v.matrix())).abs() < 1e-12);
    }

    #[test]
    fn closure_violation_detected() {
        let spec = make_group(GroupId::Sphere { n: 2 }).unwrap();
        let sym = Mat::identity(3, 3);
        assert!(matches!(
            spec.from_matrix(&sym),
            Err(Error::ClosureViolation { .. })
        ));
    }

    #[test]
    fn dimension_checks() {
        let spec = make_group(GroupId::Su2Hopf).unwrap();
        assert!(matches!(
            spec.m_vector(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(spec.require_h(&spec.m_basis_vector(0)).is_err());
        assert!(spec.require_m(&spec.m_basis_vector(0)).is_ok());
    }
}
