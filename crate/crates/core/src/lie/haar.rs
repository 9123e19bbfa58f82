use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::expm::expm;
use super::{GroupElement, GroupSpec, Mat, Subgroup};

/// Haar-distributed element of SO(m).
///
/// Gaussian matrix → QR, columns re-signed so that R has a positive
/// diagonal (Haar on O(m)), then a fixed column swap moves the det = -1
/// coset onto SO(m).
pub fn haar_rotation<R: Rng + ?Sized>(m: usize, rng: &mut R) -> DMatrix<f64> {
    if m == 1 {
        return DMatrix::identity(1, 1);
    }
    let gauss = DMatrix::<f64>::from_fn(m, m, |_, _| rng.sample(StandardNormal));
    let qr = gauss.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..m {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.swap_columns(0, 1);
    }
    q
}

impl GroupSpec {
    /// Haar sample of H embedded in G, as a raw matrix.
    pub fn haar_matrix<R: Rng + ?Sized>(&self, rng: &mut R) -> Mat {
        match self.subgroup() {
            Subgroup::Circle { generator } => {
                let theta = rng.random::<f64>() * TAU;
                expm(&(generator * Complex64::new(theta, 0.0)))
            }
            Subgroup::RotationBlock { offset, size } => {
                let n = self.ambient_dim();
                let block = haar_rotation(*size, rng);
                let mut g = Mat::identity(n, n);
                for i in 0..*size {
                    for j in 0..*size {
                        g[(offset + i, offset + j)] = Complex64::new(block[(i, j)], 0.0);
                    }
                }
                g
            }
        }
    }

    /// Haar sample of H with its membership residual.
    pub fn haar_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupElement {
        self.element(self.haar_matrix(rng))
            .expect("Haar samples are group elements")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{make_group, GroupId};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn so3_det_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let q = haar_rotation(3, &mut rng);
            assert!((q.determinant() - 1.0).abs() < 1e-12);
            assert!((q.transpose() * &q - DMatrix::identity(3, 3)).norm() < 1e-12);
        }
    }

    #[test]
    fn entry_moments() {
        // Every entry has mean 0 and second moment 1/3 on SO(3).
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 200_000;
        let mut sum = DMatrix::<f64>::zeros(3, 3);
        let mut sq = DMatrix::<f64>::zeros(3, 3);
        for _ in 0..n {
            let q = haar_rotation(3, &mut rng);
            sum += &q;
            sq += q.component_mul(&q);
        }
        let bound = 4.0 / (n as f64).sqrt();
        for v in sum.iter() {
            assert!((v / n as f64).abs() < bound);
        }
        // SE of a squared entry: sqrt(4/45)/sqrt(N)
        let se = (4.0f64 / 45.0).sqrt() / (n as f64).sqrt();
        for v in sq.iter() {
            assert!((v / n as f64 - 1.0 / 3.0).abs() < 4.0 * se);
        }
    }

    #[test]
    fn embedded_samples_are_in_h() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for id in [
            GroupId::Su2Hopf,
            GroupId::Stiefel { n: 5, k: 2 },
            GroupId::Hyperbolic { n: 3 },
        ] {
            let spec = make_group(id).unwrap();
            for _ in 0..50 {
                let h = spec.haar_sample(&mut rng);
                assert!(h.residual() < 1e-12);
                let moved = h.matrix() * spec.base_point();
                let fixed = if id == GroupId::Su2Hopf {
                    (moved[(0, 0)].norm() - 1.0).abs() + moved[(1, 0)].norm()
                } else {
                    (moved - spec.base_point()).norm()
                };
                assert!(fixed < 1e-12, "{id}");
            }
        }
    }
}
