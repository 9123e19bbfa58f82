//! Effective generator coefficients a_ij(Y₀), the effective SDE realizing
//! them, and the projected Brownian scale on G/H.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie::{AlgebraVector, GroupElement, GroupSpec};
use crate::reductive::{
    casimir, full_h_basis, invariant_components, invariant_symmetric_forms, mean_ad,
    IsotypicComponent,
};
use crate::rng::Purpose;
use crate::stats::{haar_mc, Estimate};

/// Relative tolerance for deciding that Y₀ has no mass in a component.
const MASS_TOL: f64 = 1e-12;

/// Tolerance of the algebraic projection checks.
pub const GEOMETRY_TOL: f64 = 1e-11;

/// Samples used for the centring check inside [`coeffs_spectral`].
pub const CENTRING_SAMPLES: usize = 100_000;

/// `⟨Ad(h)Y₀, Y_j⟩`.
pub fn alpha(y0: &AlgebraVector, yj: &AlgebraVector, h: &GroupElement, spec: &GroupSpec) -> f64 {
    spec.inner(&spec.conjugate(h.matrix(), y0.matrix()), yj.matrix())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    ClosedForm,
    SpectralMc,
    GeneratorSubset,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Classification {
    Isotropic { c: f64 },
    Diagonal,
    General,
}

/// Coefficients of Σ a_ij L_{Y_i} L_{Y_j} in an orthonormal basis {Y_i}
/// of the components carrying Y₀.
#[derive(Clone, Debug, Serialize)]
pub struct EffectiveGenerator {
    /// Components of the Ad_H-invariant decomposition that Y₀ touches.
    pub components: Vec<IsotypicComponent>,
    /// Columns are the basis vectors Y_i in m-coordinates.
    pub basis: DMatrix<f64>,
    /// Eigenvalue attached to each basis vector.
    pub lambdas: Vec<f64>,
    /// Coordinates c_m of Y₀ in `basis`.
    pub y0_coords: DVector<f64>,
    /// Symmetric part of `a_raw`; the diffusion coefficients.
    pub a: DMatrix<f64>,
    /// The integral as computed, before symmetrization.
    pub a_raw: DMatrix<f64>,
    pub route: Route,
    /// Entrywise standard errors of `a_raw`, absent for exact routes.
    pub mc_se: Option<DMatrix<f64>>,
    /// Standard errors of `a`, from the symmetrized samples (a_ij and a_ji
    /// share samples, so they cannot be combined as independent).
    pub mc_sym_se: Option<DMatrix<f64>>,
    pub trace: Estimate,
    pub classification: Classification,
    pub projected_scale: Option<f64>,
    pub samples: usize,
}

impl EffectiveGenerator {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Σ_m c_m²/λ_m, the value trace(a) must take.
    pub fn predicted_trace(&self) -> f64 {
        self.y0_coords
            .iter()
            .zip(&self.lambdas)
            .map(|(c, l)| c * c / l)
            .sum()
    }

    /// Entry of `a` with its standard error.
    pub fn entry(&self, i: usize, j: usize) -> Estimate {
        match &self.mc_sym_se {
            None => Estimate::exact(self.a[(i, j)]),
            Some(se) => Estimate::mc(self.a[(i, j)], se[(i, j)]),
        }
    }

    pub fn raw_entry(&self, i: usize, j: usize) -> Estimate {
        match &self.mc_se {
            None => Estimate::exact(self.a_raw[(i, j)]),
            Some(se) => Estimate::mc(self.a_raw[(i, j)], se[(i, j)]),
        }
    }

    fn max_se(&self) -> f64 {
        self.mc_se.as_ref().map_or(0.0, |s| s.max())
    }

    /// Basis vector Y_i as an algebra vector.
    pub fn basis_vector(&self, i: usize, spec: &GroupSpec) -> AlgebraVector {
        spec.m_vector(self.basis.column(i).as_slice())
            .expect("basis has m-dimension")
    }
}

/// Ad_H-invariant components carrying Y₀, with Y₀'s norm in each.
fn touched_components(y0: &AlgebraVector, spec: &GroupSpec) -> Result<Vec<IsotypicComponent>> {
    spec.require_m(y0)?;
    let v = y0.m_coords(spec);
    let scale = MASS_TOL * (1.0 + v.norm());
    let mut touched = Vec::new();
    for c in invariant_components(spec)? {
        let mass = c.project(&v).norm();
        if mass > scale {
            if c.is_fixed_space {
                return Err(Error::ZeroEigenvalueComponent { mass });
            }
            touched.push(c);
        }
    }
    if touched.is_empty() {
        return Err(Error::InvalidArgument("Y0 is zero".into()));
    }
    Ok(touched)
}

/// a = |Y₀|²/(d·λ)·Id for Y₀ inside one component, with the full
/// orthonormal basis of h as generators.
pub fn coeffs_closed_form(y0: &AlgebraVector, spec: &GroupSpec) -> Result<EffectiveGenerator> {
    let touched = touched_components(y0, spec)?;
    if touched.len() > 1 {
        return Err(Error::MixedComponentInput {
            count: touched.len(),
        });
    }
    let comp = touched.into_iter().next().unwrap();
    let forms = invariant_symmetric_forms(&full_h_basis(spec), &comp, spec);
    if forms != 1 {
        return Err(Error::ReducibleComponent { forms });
    }
    let d = comp.dim();
    let basis = comp.basis_matrix();
    let lambda = comp.lambda;
    let c = y0.norm_squared() / (d as f64 * lambda);
    let a = DMatrix::identity(d, d) * c;
    let y0_coords = basis.transpose() * y0.m_coords(spec);
    let mut gen = EffectiveGenerator {
        components: vec![comp],
        basis,
        lambdas: vec![lambda; d],
        y0_coords,
        a_raw: a.clone(),
        a,
        route: Route::ClosedForm,
        mc_se: None,
        mc_sym_se: None,
        trace: Estimate::exact(c * d as f64),
        classification: Classification::Isotropic { c },
        projected_scale: None,
        samples: 0,
    };
    gen.projected_scale = projected_scale(&gen, spec).ok();
    Ok(gen)
}

/// Monte Carlo evaluation of a_ij = Σ_m (c_m/λ_m) ∫ α(Y₀,Y_i) α(Y_m,Y_j) dh.
///
/// `generators` must lie in h; the eigenbasis of their Casimir restricted to
/// the components carrying Y₀ is the output basis. Passing the full h basis
/// gives the `SpectralMc` route, a proper subset `GeneratorSubset`.
pub fn coeffs_spectral(
    y0: &AlgebraVector,
    generators: &[AlgebraVector],
    spec: &GroupSpec,
    n: usize,
    seed: u64,
) -> Result<EffectiveGenerator> {
    let touched = touched_components(y0, spec)?;
    let centring = mean_ad(y0, spec, n.min(CENTRING_SAMPLES), seed)?;
    let norm = centring.mean.norm();
    let bound = 4.0 * centring.se.norm();
    if norm > bound {
        return Err(Error::CentringViolation { norm, bound });
    }

    let span = DMatrix::from_columns(
        &touched
            .iter()
            .flat_map(|c| c.basis.iter().cloned())
            .collect::<Vec<_>>(),
    );
    let c = casimir(generators, None, spec)?;
    let restricted = span.transpose() * &c.matrix * &span;
    let leak = (&c.matrix * &span - &span * &restricted).norm();
    if leak > 1e-10 {
        return Err(Error::InvalidArgument(format!(
            "generator Casimir does not preserve the components of Y0 (leak {leak:.3e})"
        )));
    }
    let eig = SymmetricEigen::new(-(&restricted + restricted.transpose()) * 0.5);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let lambdas: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    if let Some(&l) = lambdas.iter().find(|&&l| l <= 1e-10) {
        return Err(Error::ZeroEigenvalueComponent { mass: l });
    }
    let basis = &span
        * DMatrix::from_columns(
            &order
                .iter()
                .map(|&i| eig.eigenvectors.column(i).into_owned())
                .collect::<Vec<_>>(),
        );

    let full = generators.len() == spec.dim_h() && {
        let g = DMatrix::from_fn(generators.len(), generators.len(), |i, j| {
            generators[i].dot(&generators[j])
        });
        (g - DMatrix::identity(spec.dim_h(), spec.dim_h())).norm() < 1e-12
    };
    let route = if full {
        Route::SpectralMc
    } else {
        Route::GeneratorSubset
    };
    let y0_coords = basis.transpose() * y0.m_coords(spec);
    let mut gen = coeffs_from_eigenpairs(&y0_coords, &basis, &lambdas, spec, n, seed)?;
    gen.components = touched;
    gen.route = route;
    gen.projected_scale = projected_scale(&gen, spec).ok();
    Ok(gen)
}

/// Monte Carlo kernel behind [`coeffs_spectral`] with the eigenpairs given.
///
/// `basis` columns are orthonormal m-coordinate vectors spanning an
/// Ad_H-invariant subspace, `lambdas` the eigenvalues attached to them and
/// `y0_coords` the coordinates of Y₀ in that basis. The eigenvalues are
/// taken as given; this is how fixtures with prescribed spectra are built.
pub fn coeffs_from_eigenpairs(
    y0_coords: &DVector<f64>,
    basis: &DMatrix<f64>,
    lambdas: &[f64],
    spec: &GroupSpec,
    n: usize,
    seed: u64,
) -> Result<EffectiveGenerator> {
    let d = basis.ncols();
    if basis.nrows() != spec.dim_m() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim_m(),
            got: basis.nrows(),
        });
    }
    if lambdas.len() != d || y0_coords.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: lambdas.len().min(y0_coords.len()),
        });
    }
    if lambdas.iter().any(|&l| l <= 0.0) {
        return Err(Error::ZeroEigenvalueComponent { mass: 0.0 });
    }
    if n < 2 {
        return Err(Error::InvalidArgument(
            "need at least 2 Haar samples".into(),
        ));
    }
    let weights: Vec<f64> = (0..d).map(|m| y0_coords[m] / lambdas[m]).collect();
    let bt = basis.transpose();
    // d² raw entries, d² symmetrized entries, then the trace
    let acc = haar_mc(
        spec,
        n,
        seed,
        Purpose::Coefficients,
        2 * d * d + 1,
        |h, out| {
            let p = &bt * spec.adjoint_on_m(h) * basis;
            let alpha0 = &p * y0_coords;
            let mut tr = 0.0;
            for i in 0..d {
                for j in 0..d {
                    let mut s = 0.0;
                    for m in 0..d {
                        s += weights[m] * p[(j, m)];
                    }
                    let v = alpha0[i] * s;
                    out[i * d + j] = v;
                    if i == j {
                        tr += v;
                    }
                }
            }
            for i in 0..d {
                for j in 0..d {
                    out[d * d + i * d + j] = 0.5 * (out[i * d + j] + out[j * d + i]);
                }
            }
            out[2 * d * d] = tr;
        },
    );
    let a_raw = DMatrix::from_fn(d, d, |i, j| acc.mean()[i * d + j]);
    let se = DMatrix::from_fn(d, d, |i, j| acc.se(i * d + j));
    let sym_se = DMatrix::from_fn(d, d, |i, j| acc.se(d * d + i * d + j));
    let a = (&a_raw + a_raw.transpose()) * 0.5;
    let mut gen = EffectiveGenerator {
        components: Vec::new(),
        basis: basis.clone(),
        lambdas: lambdas.to_vec(),
        y0_coords: y0_coords.clone(),
        a,
        a_raw,
        route: Route::SpectralMc,
        mc_se: Some(se),
        mc_sym_se: Some(sym_se),
        trace: acc.estimate(2 * d * d),
        classification: Classification::General,
        projected_scale: None,
        samples: n,
    };
    gen.classification = classify(&gen);
    Ok(gen)
}

/// Isotropic if a ≈ c·Id, diagonal if off-diagonals vanish, within 4·SE
/// for Monte Carlo routes and 1e-12 for exact ones.
pub fn classify(gen: &EffectiveGenerator) -> Classification {
    let d = gen.dim();
    let tol = |i: usize, j: usize| match gen.mc_se {
        None => 1e-12,
        Some(_) => 4.0 * gen.entry(i, j).se_or_zero() + 1e-15,
    };
    let off_ok = (0..d).all(|i| (0..d).all(|j| i == j || gen.a[(i, j)].abs() <= tol(i, j)));
    if !off_ok {
        return Classification::General;
    }
    let c = gen.a.trace() / d as f64;
    // within 4 SE of the mean diagonal, with the mean's own error folded in
    let iso = (0..d).all(|i| (gen.a[(i, i)] - c).abs() <= tol(i, i) * 1.25);
    if iso {
        Classification::Isotropic { c }
    } else {
        Classification::Diagonal
    }
}

/// Driving fields of the effective SDE dū = Σ V_k(ū)∘dB^k + V₀(ū)dt.
#[derive(Clone, Debug)]
pub struct EffectiveSde {
    pub fields: Vec<AlgebraVector>,
    /// Σ_{i<j} w_ij [Y_i,Y_j] with w the antisymmetric part of `a_raw`;
    /// zero whenever `a_raw` is symmetric.
    pub drift: AlgebraVector,
}

/// Realizes Σ a_ij L_{Y_i} L_{Y_j} as ½Σ L_{V_k}² + L_{V₀} with
/// V = Y·√(2a) (symmetric root). Eigenvalues of a below zero are clipped
/// when within 4·SE (1e-12 for exact input), rejected otherwise.
pub fn build_effective_sde(gen: &EffectiveGenerator, spec: &GroupSpec) -> Result<EffectiveSde> {
    let d = gen.dim();
    let root = psd_sqrt(&(&gen.a * 2.0), 2.0 * (4.0 * gen.max_se()).max(1e-12))?;
    let ys: Vec<AlgebraVector> = (0..d).map(|i| gen.basis_vector(i, spec)).collect();
    let mut fields = Vec::with_capacity(d);
    for k in 0..d {
        let mut v = spec.zero_vector();
        for (i, y) in ys.iter().enumerate() {
            if root[(i, k)] != 0.0 {
                v = v.add(&y.scale(root[(i, k)]));
            }
        }
        fields.push(v);
    }
    let mut drift = spec.zero_vector();
    for i in 0..d {
        for j in i + 1..d {
            let w = 0.5 * (gen.a_raw[(i, j)] - gen.a_raw[(j, i)]);
            if w != 0.0 {
                drift = drift.add(&spec.bracket(&ys[i], &ys[j])?.scale(w));
            }
        }
    }
    Ok(EffectiveSde { fields, drift })
}

/// Symmetric square root of a symmetric matrix, clipping eigenvalues in
/// [-tol, 0) to zero.
pub fn psd_sqrt(m: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let min_eig = eig.eigenvalues.min();
    if min_eig < -tol {
        return Err(Error::IndefiniteCoefficients { min_eig, tol });
    }
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose())
}

/// Outcome of the algebraic conditions under which the projected limit is
/// a scaled Brownian motion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ValidityReport {
    pub trace_ad_zero: bool,
    pub naturally_reductive: bool,
    pub u_trace_zero: bool,
    pub max_trace_ad: f64,
    pub max_reductive_defect: f64,
    pub max_u_trace: f64,
}

impl ValidityReport {
    pub fn all(&self) -> bool {
        self.trace_ad_zero && self.naturally_reductive && self.u_trace_zero
    }
}

/// Evaluates trace_{m_l} ad(Z) for Z in the full basis, natural
/// reductivity over m-basis triples and Σ_i U(Y_i,Y_i).
pub fn check_projection_validity(
    spec: &GroupSpec,
    component: &IsotypicComponent,
) -> ValidityReport {
    let p = spec.dim_h();
    let q = spec.dim_m();
    let basis = component.basis_matrix();

    let mut max_trace_ad: f64 = 0.0;
    for z in 0..spec.dim() {
        let ad_m = spec.ad_basis(z).view((p, p), (q, q)).into_owned();
        let tr = (basis.transpose() * ad_m * &basis).trace();
        max_trace_ad = max_trace_ad.max(tr.abs());
    }

    // m-part of [Y_a, Y_b] in m-coordinates, from the structure constants
    let bracket_m = |a: usize, b: usize| -> DVector<f64> {
        spec.ad_basis(p + a)
            .view((p, p + b), (q, 1))
            .column(0)
            .into_owned()
    };
    let mut max_reductive: f64 = 0.0;
    for x in 0..q {
        for y in 0..q {
            let xy = bracket_m(x, y);
            for z in 0..q {
                let xz = bracket_m(x, z);
                max_reductive = max_reductive.max((xy[z] + xz[y]).abs());
            }
        }
    }

    // 2⟨U(Y_i,Y_i),Z⟩ = 2⟨Y_i,[Z,Y_i]_m⟩
    let mut max_u: f64 = 0.0;
    for z in 0..q {
        let s: f64 = (0..q).map(|i| 2.0 * bracket_m(z, i)[i]).sum();
        max_u = max_u.max((0.5 * s).abs());
    }

    ValidityReport {
        trace_ad_zero: max_trace_ad <= GEOMETRY_TOL,
        naturally_reductive: max_reductive <= GEOMETRY_TOL,
        u_trace_zero: max_u <= GEOMETRY_TOL,
        max_trace_ad,
        max_reductive_defect: max_reductive,
        max_u_trace: max_u,
    }
}

/// Scale c' of the projected Brownian motion (generator ½c'Δ on G/H with
/// the metric induced by the inner product on m); equals 2c for a = c·Id.
pub fn projected_scale(gen: &EffectiveGenerator, spec: &GroupSpec) -> Result<f64> {
    let c = match gen.classification {
        Classification::Isotropic { c } => c,
        _ => return Err(Error::NotIsotropic),
    };
    if gen.components.len() != 1 || gen.dim() != spec.dim_m() {
        return Err(Error::GeometricCheckFailed(
            "effective generator does not span m".into(),
        ));
    }
    let report = check_projection_validity(spec, &gen.components[0]);
    if !report.all() {
        return Err(Error::GeometricCheckFailed(format!("{report:?}")));
    }
    Ok(2.0 * c)
}

/// Monte Carlo estimates of ∫⟨Y_i,Ad(h)Y_k⟩⟨Y_j,Ad(h)Y_l⟩dh over a component.
#[derive(Clone, Debug, Serialize)]
pub struct PeterWeylReport {
    pub dim: usize,
    /// Indexed `((i*d + j)*d + k)*d + l`.
    pub estimates: Vec<Estimate>,
    pub max_deviation: f64,
    pub samples: usize,
}

impl PeterWeylReport {
    pub fn target(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        if i == j && k == l {
            1.0 / self.dim as f64
        } else {
            0.0
        }
    }
}

pub fn peter_weyl_check(
    component: &IsotypicComponent,
    spec: &GroupSpec,
    n: usize,
    seed: u64,
) -> PeterWeylReport {
    let d = component.dim();
    let basis = component.basis_matrix();
    let bt = basis.transpose();
    let acc = haar_mc(spec, n, seed, Purpose::PeterWeyl, d.pow(4), |h, out| {
        let p = &bt * spec.adjoint_on_m(h) * &basis;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        out[((i * d + j) * d + k) * d + l] = p[(i, k)] * p[(j, l)];
                    }
                }
            }
        }
    });
    let mut report = PeterWeylReport {
        dim: d,
        estimates: (0..d.pow(4)).map(|i| acc.estimate(i)).collect(),
        max_deviation: 0.0,
        samples: n,
    };
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let e = report.estimates[((i * d + j) * d + k) * d + l];
                    let dev = (e.value - report.target(i, j, k, l)).abs();
                    report.max_deviation = report.max_deviation.max(dev);
                }
            }
        }
    }
    report
}

/// Effective coefficients with the full h basis as generators.
pub fn coeffs_full(
    y0: &AlgebraVector,
    spec: &GroupSpec,
    n: usize,
    seed: u64,
) -> Result<EffectiveGenerator> {
    coeffs_spectral(y0, &full_h_basis(spec), spec, n, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{make_group, GroupId};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn alpha_at_identity_and_rotation() {
        let spec = make_group(GroupId::Su2Hopf).unwrap();
        let x2 = spec.m_basis_vector(0);
        let x3 = spec.m_basis_vector(1);
        assert_eq!(alpha(&x2, &x2, &spec.identity(), &spec), 1.0);
        assert_eq!(alpha(&x2, &x3, &spec.identity(), &spec), 0.0);
        for theta in [0.0, 0.3, 1.1, 2.9, -0.7] {
            let h = spec.exp(&spec.basis_vector(0), theta);
            let v = alpha(&x2, &x2, &h, &spec);
            assert!((v - (2.0 * theta).cos()).abs() < 1e-14);
            // norm preserved
            let w = alpha(&x2, &x3, &h, &spec);
            assert!((v * v + w * w - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn closed_form_catalog_values() {
        let spec = make_group(GroupId::Su2Hopf).unwrap();
        let gen = coeffs_closed_form(&spec.m_basis_vector(0), &spec).unwrap();
        assert_eq!(gen.classification, Classification::Isotropic { c: 0.25 });
        assert_eq!(gen.projected_scale, Some(0.5));
        for n in 2..=6usize {
            let spec = make_group(GroupId::Sphere { n }).unwrap();
            let gen = coeffs_closed_form(&spec.m_basis_vector(n - 1), &spec).unwrap();
            let c = 4.0 / (n * (n - 1)) as f64;
            assert!((gen.a.clone() - DMatrix::identity(n, n) * c).norm() < 1e-12);
            let s = gen.projected_scale.unwrap();
            assert!((s - 8.0 / (n * (n - 1)) as f64).abs() < 1e-12);
        }
        let spec = make_group(GroupId::Hyperbolic { n: 3 }).unwrap();
        let gen = coeffs_closed_form(&spec.m_basis_vector(0), &spec).unwrap();
        assert!((gen.projected_scale.unwrap() - 8.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_trace_identity_exact() {
        let spec = make_group(GroupId::Sphere { n: 4 }).unwrap();
        let y0 = spec.m_vector(&[0.3, -1.2, 0.5, 0.1]).unwrap();
        let gen = coeffs_closed_form(&y0, &spec).unwrap();
        assert!((gen.trace.value - gen.predicted_trace()).abs() < 1e-12);
    }

    #[test]
    fn closed_form_rejects_fixed_and_mixed() {
        let spec = make_group(GroupId::Stiefel { n: 4, k: 2 }).unwrap();
        let mut c = vec![0.0; spec.dim_m()];
        c[0] = 1.0;
        let fixed = spec.m_vector(&c).unwrap();
        assert!(matches!(
            coeffs_closed_form(&fixed, &spec),
            Err(Error::ZeroEigenvalueComponent { .. })
        ));
        let comps = invariant_components(&spec).unwrap();
        let nonzero: Vec<_> = comps.iter().filter(|c| !c.is_fixed_space).collect();
        if nonzero.len() > 1 {
            let v = &nonzero[0].basis[0] + &nonzero[1].basis[0];
            let y = spec.m_vector(v.as_slice()).unwrap();
            assert!(matches!(
                coeffs_closed_form(&y, &spec),
                Err(Error::MixedComponentInput { .. })
            ));
        }
    }

    #[test]
    fn hopf_spectral_matches_closed_form() {
        let spec = make_group(GroupId::Su2Hopf).unwrap();
        let y0 = spec.m_basis_vector(0);
        let gen = coeffs_full(&y0, &spec, 50_000, 3).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let target = if i == j { 0.25 } else { 0.0 };
                assert!(gen.entry(i, j).within(target, 4.0), "{i}{j}");
            }
        }
        assert!((gen.trace.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sqrt_reconstructs_random_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        use rand::Rng;
        for d in 1..6 {
            let b = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
            let a = &b * b.transpose();
            let r = psd_sqrt(&(&a * 2.0), 1e-12).unwrap();
            assert!((&r * r.transpose() * 0.5 - &a).norm() < 1e-12);
        }
        let bad = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -0.1]));
        assert!(matches!(
            psd_sqrt(&bad, 1e-12),
            Err(Error::IndefiniteCoefficients { .. })
        ));
    }

    #[test]
    fn isotropic_fields_are_scaled_basis() {
        let spec = make_group(GroupId::Sphere { n: 3 }).unwrap();
        let gen = coeffs_closed_form(&spec.m_basis_vector(0), &spec).unwrap();
        let sde = build_effective_sde(&gen, &spec).unwrap();
        let s = (2.0 * 4.0 / 6.0f64).sqrt();
        for (k, v) in sde.fields.iter().enumerate() {
            let expect = gen.basis_vector(k, &spec).scale(s);
            assert!((v.coeffs() - expect.coeffs()).norm() < 1e-12);
        }
        assert!(sde.drift.is_zero());
    }

    #[test]
    fn validity_on_catalog() {
        for id in [
            GroupId::Sphere { n: 3 },
            GroupId::Su2Hopf,
            GroupId::Hyperbolic { n: 3 },
        ] {
            let spec = make_group(id).unwrap();
            let comps = invariant_components(&spec).unwrap();
            let r = check_projection_validity(&spec, &comps[0]);
            assert!(r.all(), "{id}: {r:?}");
        }
    }

    #[test]
    fn diagonal_peter_weyl_entry() {
        let spec = make_group(GroupId::Sphere { n: 3 }).unwrap();
        let comp = &invariant_components(&spec).unwrap()[0];
        let r = peter_weyl_check(comp, &spec, 20_000, 11);
        let e = r.estimates[0];
        assert!(e.within(1.0 / 3.0, 4.0));
    }
}
