//! Casimir operator of the driving fields on m, its isotypic decomposition,
//! the eigenvalue from the trace form, and the Haar average of Ad(h)Y₀.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie::{AlgebraVector, GroupSpec};
use crate::rng::Purpose;
use crate::stats::{haar_mc, Estimate};

/// Relative gap below which Casimir eigenvalues are grouped together.
pub const CLUSTER_TOL: f64 = 1e-8;

/// Eigenvalues below this are treated as zero (the fixed space m₀).
pub const ZERO_TOL: f64 = 1e-10;

/// `½ Σ ad²(A_k) + ad(A₀)` restricted to m, in m-basis coordinates.
#[derive(Clone, Debug)]
pub struct CasimirOperator {
    pub matrix: DMatrix<f64>,
    /// Number of generators summed.
    pub generator_count: usize,
    pub includes_drift: bool,
}

/// One eigenspace of −C. `basis` holds orthonormal m-coordinate vectors.
#[derive(Clone, Debug, Serialize)]
pub struct IsotypicComponent {
    pub lambda: f64,
    pub basis: Vec<DVector<f64>>,
    pub is_fixed_space: bool,
}

impl IsotypicComponent {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Columns are the basis vectors.
    pub fn basis_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_columns(&self.basis)
    }

    /// Orthogonal projection of m-coordinates onto this component.
    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(v.len());
        for b in &self.basis {
            out += b * b.dot(v);
        }
        out
    }
}

/// Builds the Casimir operator from generators in h and an optional drift.
pub fn casimir(
    generators: &[AlgebraVector],
    drift: Option<&AlgebraVector>,
    spec: &GroupSpec,
) -> Result<CasimirOperator> {
    let q = spec.dim_m();
    let mut matrix = DMatrix::zeros(q, q);
    for a in generators {
        spec.require_h(a)?;
        let ad = spec.ad_on_m(a);
        matrix += (&ad * &ad) * 0.5;
    }
    let mut includes_drift = false;
    if let Some(a0) = drift {
        spec.require_h(a0)?;
        if !a0.is_zero() {
            includes_drift = true;
            matrix += spec.ad_on_m(a0);
        }
    }
    Ok(CasimirOperator {
        matrix,
        generator_count: generators.len(),
        includes_drift,
    })
}

/// Orthonormal basis of h as algebra vectors.
pub fn full_h_basis(spec: &GroupSpec) -> Vec<AlgebraVector> {
    (0..spec.dim_h()).map(|i| spec.basis_vector(i)).collect()
}

/// Eigendecomposition of −C grouped into components, sorted by λ ascending.
pub fn isotypic_decompose(c: &CasimirOperator) -> Result<Vec<IsotypicComponent>> {
    let asymmetry = (&c.matrix - c.matrix.transpose()).norm();
    if asymmetry > 1e-10 {
        return Err(Error::NonSymmetricOperator { asymmetry });
    }
    let sym = (&c.matrix + c.matrix.transpose()) * -0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut components: Vec<IsotypicComponent> = Vec::new();
    let mut start = f64::NAN;
    let mut values: Vec<f64> = Vec::new();
    for &i in &order {
        let lam = eig.eigenvalues[i];
        let v = eig.eigenvectors.column(i).into_owned();
        let new_cluster = components.is_empty() || lam - start > CLUSTER_TOL * start.abs().max(1.0);
        if new_cluster {
            if let Some(last) = components.last_mut() {
                finish_cluster(last, &values);
            }
            components.push(IsotypicComponent {
                lambda: lam,
                basis: vec![v],
                is_fixed_space: false,
            });
            start = lam;
            values = vec![lam];
        } else {
            components.last_mut().unwrap().basis.push(v);
            values.push(lam);
        }
    }
    if let Some(last) = components.last_mut() {
        finish_cluster(last, &values);
    }
    Ok(components)
}

fn finish_cluster(c: &mut IsotypicComponent, values: &[f64]) {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if mean.abs() <= ZERO_TOL {
        c.lambda = 0.0;
        c.is_fixed_space = true;
    } else {
        c.lambda = mean;
    }
}

/// Decomposition of m under the Casimir of a full orthonormal basis of h;
/// its components are Ad_H-invariant.
pub fn invariant_components(spec: &GroupSpec) -> Result<Vec<IsotypicComponent>> {
    isotypic_decompose(&casimir(&full_h_basis(spec), None, spec)?)
}

/// λ of a component from the trace form B(X,X) = tr(ad(X)²|_{m_l}).
///
/// `h_basis` must be orthonormal. The form is required to be
/// non-degenerate (faithful action) and proportional to the inner product,
/// in which case λ = −B(A₁,A₁)·dim h / (2·dim m_l).
pub fn lambda_via_bilinear_form(
    h_basis: &[AlgebraVector],
    component: &IsotypicComponent,
    spec: &GroupSpec,
) -> Result<f64> {
    let p = h_basis.len();
    if p == 0 {
        return Err(Error::InvalidArgument("empty h basis".into()));
    }
    let basis = component.basis_matrix();
    let restricted: Vec<DMatrix<f64>> = h_basis
        .iter()
        .map(|a| basis.transpose() * spec.ad_on_m(a) * &basis)
        .collect();
    let form = DMatrix::from_fn(p, p, |i, j| -(&restricted[i] * &restricted[j]).trace());
    let min_eig = form.clone().symmetric_eigenvalues().min();
    if min_eig < 1e-12 {
        return Err(Error::NonFaithfulAction { min_eig });
    }
    let b11 = form[(0, 0)];
    let spread = (&form - DMatrix::identity(p, p) * b11).norm();
    if spread > 1e-10 * b11.max(1.0) {
        return Err(Error::NonProportionalForm { spread });
    }
    Ok(b11 * p as f64 / (2.0 * component.dim() as f64))
}

/// Dimension of the space of symmetric forms on a component invariant
/// under the generators. One means H averages every y⊗y to a multiple of
/// the identity; several equivalent copies or a splitting raise it.
pub fn invariant_symmetric_forms(
    generators: &[AlgebraVector],
    component: &IsotypicComponent,
    spec: &GroupSpec,
) -> usize {
    let d = component.dim();
    let basis = component.basis_matrix();
    let restricted: Vec<DMatrix<f64>> = generators
        .iter()
        .map(|a| basis.transpose() * spec.ad_on_m(a) * &basis)
        .collect();
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|i| (i..d).map(move |j| (i, j))).collect();
    // column k holds the commutators [R, S_k] for the k-th symmetric basis matrix
    let mut system = DMatrix::zeros((restricted.len() * d * d).max(1), pairs.len());
    for (k, &(i, j)) in pairs.iter().enumerate() {
        let mut s = DMatrix::zeros(d, d);
        s[(i, j)] = 1.0;
        s[(j, i)] = 1.0;
        for (r, ad) in restricted.iter().enumerate() {
            let c = ad * &s - &s * ad;
            for (e, v) in c.iter().enumerate() {
                system[(r * d * d + e, k)] = *v;
            }
        }
    }
    let sv = system.singular_values();
    let tol = 1e-10 * sv.max().max(1.0);
    pairs.len() - sv.iter().filter(|&&x| x > tol).count()
}

/// Monte Carlo estimate of Ȳ = ∫_H Ad(h)Y₀ dh.
#[derive(Clone, Debug, Serialize)]
pub struct MeanAd {
    /// Full-basis coordinates of the estimate.
    pub mean: DVector<f64>,
    /// Per-coordinate standard errors; zero when `exact`.
    pub se: DVector<f64>,
    pub exact: bool,
    pub samples: usize,
}

impl MeanAd {
    pub fn estimates(&self) -> Vec<Estimate> {
        self.mean
            .iter()
            .zip(self.se.iter())
            .map(|(&v, &s)| {
                if self.exact {
                    Estimate::exact(v)
                } else {
                    Estimate::mc(v, s)
                }
            })
            .collect()
    }
}

/// Averages Ad(h)Y₀ over `n` Haar samples; returns Y₀ itself, exactly,
/// when Y₀ lies in the fixed space m₀.
pub fn mean_ad(y0: &AlgebraVector, spec: &GroupSpec, n: usize, seed: u64) -> Result<MeanAd> {
    spec.require_m(y0)?;
    let dim = spec.dim();
    let m0 = fixed_space_mass(y0, spec)?;
    if m0.1 <= 1e-12 * (1.0 + y0.norm()) {
        return Ok(MeanAd {
            mean: y0.coeffs().clone(),
            se: DVector::zeros(dim),
            exact: true,
            samples: 0,
        });
    }
    if n < 2 {
        return Err(Error::InvalidArgument(
            "need at least 2 Haar samples".into(),
        ));
    }
    let p = spec.dim_h();
    let q = spec.dim_m();
    let y = y0.matrix().clone();
    let acc = haar_mc(spec, n, seed, Purpose::Haar, q, |h, out| {
        let v = spec.m_coords_of(&spec.conjugate(h, &y));
        out.copy_from_slice(v.as_slice());
    });
    let mut mean = DVector::zeros(dim);
    let mut se = DVector::zeros(dim);
    for j in 0..q {
        mean[p + j] = acc.mean()[j];
        se[p + j] = acc.se(j);
    }
    Ok(MeanAd {
        mean,
        se,
        exact: false,
        samples: n,
    })
}

/// Norms of the (m₀, complement) parts of Y₀ in m.
pub fn fixed_space_mass(y0: &AlgebraVector, spec: &GroupSpec) -> Result<(f64, f64)> {
    let v = y0.m_coords(spec);
    let mut fixed = DVector::zeros(v.len());
    for c in invariant_components(spec)? {
        if c.is_fixed_space {
            fixed += c.project(&v);
        }
    }
    let rest = &v - &fixed;
    Ok((fixed.norm(), rest.norm()))
}
