//! Catalog of matrix groups with a reductive split `g = h ⊕ m`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{inner_product, Mat};
use crate::error::{Error, Result};

/// Largest ambient matrix size the catalog builds.
pub const MAX_AMBIENT_DIM: usize = 8;

/// Default tolerance on the defining relation of a group element.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Catalog identifier plus integer parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum GroupId {
    /// SU(2) over U(1), projected by the Hopf map onto S²(1/2).
    Su2Hopf,
    /// SO(n+1) over SO(n), projected onto the unit sphere S^n.
    #[serde(rename = "so_n1-sphere")]
    Sphere { n: usize },
    /// SO(4) over SO(3); same split as `Sphere { n: 3 }`.
    So4So3,
    /// SO(n) over SO(n-k), projected onto k-frames in R^n.
    Stiefel { n: usize, k: usize },
    /// Identity component of O(1,n) over SO(n), projected onto the hyperboloid.
    Hyperbolic { n: usize },
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupId::Su2Hopf => write!(f, "su2-hopf"),
            GroupId::Sphere { n } => write!(f, "so_n1-sphere({n})"),
            GroupId::So4So3 => write!(f, "so4-so3"),
            GroupId::Stiefel { n, k } => write!(f, "stiefel({n},{k})"),
            GroupId::Hyperbolic { n } => write!(f, "hyperbolic({n})"),
        }
    }
}

impl GroupId {
    /// Parses `su2-hopf`, `so4-so3`, `so_n1-sphere(n)`, `stiefel(n,k)`, `hyperbolic(n)`.
    pub fn parse(s: &str) -> Result<GroupId> {
        let s = s.trim();
        let (head, args) = match s.find('(') {
            Some(open) => {
                let close = s
                    .strip_suffix(')')
                    .ok_or_else(|| Error::UnknownName(s.to_string()))?;
                let args: std::result::Result<Vec<usize>, _> = close[open + 1..]
                    .split(',')
                    .map(|a| a.trim().parse::<usize>())
                    .collect();
                (
                    &s[..open],
                    args.map_err(|_| Error::UnknownName(s.to_string()))?,
                )
            }
            None => (s, Vec::new()),
        };
        let arity = |k: usize| -> Result<()> {
            if args.len() == k {
                Ok(())
            } else {
                Err(Error::UnknownName(s.to_string()))
            }
        };
        match head {
            "su2-hopf" => arity(0).map(|_| GroupId::Su2Hopf),
            "so4-so3" => arity(0).map(|_| GroupId::So4So3),
            "so_n1-sphere" | "sphere" => arity(1).map(|_| GroupId::Sphere { n: args[0] }),
            "stiefel" => arity(2).map(|_| GroupId::Stiefel {
                n: args[0],
                k: args[1],
            }),
            "hyperbolic" => arity(1).map(|_| GroupId::Hyperbolic { n: args[0] }),
            _ => Err(Error::UnknownName(s.to_string())),
        }
    }
}

/// Defining relation of the ambient matrix group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    /// gᵀg = I, det g = 1, real entries.
    SpecialOrthogonal,
    /// g*g = I, det g = 1.
    SpecialUnitary,
    /// gᵀSg = S, det g = 1, g₀₀ ≥ 1 with S = diag(-1, I).
    IndefiniteOrthogonal,
}

/// How the compact subgroup H sits inside G; drives Haar sampling.
#[derive(Clone, Debug)]
pub enum Subgroup {
    /// One-parameter circle `θ ↦ exp(θ X)` with period 2π.
    Circle { generator: Mat },
    /// SO(size) acting on the coordinate block `offset..offset+size`.
    RotationBlock { offset: usize, size: usize },
}

/// Model manifold that projected points live on.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Manifold {
    /// Round sphere of the given radius in R^{dim+1}.
    Sphere { dim: usize, radius: f64 },
    /// Upper sheet of F(x,x) = -1 in R^{1,dim}.
    Hyperboloid { dim: usize },
    /// Orthonormal k-frames in R^n, stored column-major.
    Frames { n: usize, k: usize },
}

impl fmt::Display for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Manifold::Sphere { dim, radius } => write!(f, "S^{dim}(r={radius})"),
            Manifold::Hyperboloid { dim } => write!(f, "H^{dim}"),
            Manifold::Frames { n, k } => write!(f, "V_{k}(R^{n})"),
        }
    }
}

impl Manifold {
    /// Distance of an ambient vector from the manifold's defining equations.
    pub fn defect(&self, x: &DVector<f64>) -> f64 {
        match self {
            Manifold::Sphere { radius, .. } => (x.norm() - radius).abs(),
            Manifold::Hyperboloid { .. } => {
                let f = minkowski(x, x);
                let sheet = if x[0] >= 1.0 - 1e-9 {
                    0.0
                } else {
                    f64::INFINITY
                };
                (f + 1.0).abs() + sheet
            }
            Manifold::Frames { n, k } => {
                let frame = DMatrix::from_column_slice(*n, *k, x.as_slice());
                (frame.transpose() * &frame - DMatrix::<f64>::identity(*k, *k)).norm()
            }
        }
    }

    /// Length of the projected coordinate vector.
    pub fn ambient_len(&self) -> usize {
        match self {
            Manifold::Sphere { dim, .. } | Manifold::Hyperboloid { dim } => dim + 1,
            Manifold::Frames { n, k } => n * k,
        }
    }
}

/// Minkowski form F(x,y) = -x₀y₀ + Σ xᵢyᵢ.
pub fn minkowski(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    -x[0] * y[0] + x.rows(1, x.len() - 1).dot(&y.rows(1, y.len() - 1))
}

/// Immutable descriptor of a matrix Lie group G with subgroup H and
/// reductive complement m.
///
/// The full basis is `h_basis ++ m_basis` and is orthonormal for
/// `⟨A,B⟩ = κ·Re tr(AB*)`. Coordinates of algebra vectors always refer to
/// that ordering, so the first `dim_h()` entries are the h-part.
#[derive(Clone, Debug)]
pub struct GroupSpec {
    id: GroupId,
    ambient_dim: usize,
    relation: Relation,
    h_basis: Vec<Mat>,
    m_basis: Vec<Mat>,
    kappa: f64,
    base_point: Mat,
    subgroup: Subgroup,
    manifold: Manifold,
    membership_tol: f64,
    /// `ad[i]` is the matrix of ad(B_i) in basis coordinates.
    ad: Vec<DMatrix<f64>>,
}

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// (E_ij - E_ji)/√2 in an n×n real matrix.
fn rotation_generator(n: usize, i: usize, j: usize) -> Mat {
    let mut m = Mat::zeros(n, n);
    m[(i, j)] = re(FRAC_1_SQRT_2);
    m[(j, i)] = re(-FRAC_1_SQRT_2);
    m
}

/// (E_0k + E_k0)/√2, the boost generators of so(1,n).
fn boost_generator(n: usize, k: usize) -> Mat {
    let mut m = Mat::zeros(n, n);
    m[(0, k)] = re(FRAC_1_SQRT_2);
    m[(k, 0)] = re(FRAC_1_SQRT_2);
    m
}

fn unit_columns(n: usize, cols: &[usize]) -> Mat {
    let mut m = Mat::zeros(n, cols.len());
    for (c, &row) in cols.iter().enumerate() {
        m[(row, c)] = re(1.0);
    }
    m
}

fn unsupported(id: &GroupId, detail: &str) -> Error {
    Error::UnsupportedDimension {
        name: id.to_string(),
        detail: detail.to_string(),
    }
}

/// Builds a catalog group from its identifier.
pub fn make_group(id: GroupId) -> Result<GroupSpec> {
    match id {
        GroupId::Su2Hopf => {
            let i = Complex64::new(0.0, 1.0);
            let z = re(0.0);
            let x1 = Mat::from_row_slice(2, 2, &[i, z, z, -i]);
            let x2 = Mat::from_row_slice(2, 2, &[z, re(1.0), re(-1.0), z]);
            let x3 = Mat::from_row_slice(2, 2, &[z, i, i, z]);
            GroupSpec::assemble(
                id,
                Relation::SpecialUnitary,
                vec![x1.clone()],
                vec![x2, x3],
                0.5,
                unit_columns(2, &[0]),
                Subgroup::Circle { generator: x1 },
                Manifold::Sphere {
                    dim: 2,
                    radius: 0.5,
                },
            )
        }
        GroupId::Sphere { n } | GroupId::Hyperbolic { n } if !(2..MAX_AMBIENT_DIM).contains(&n) => {
            Err(unsupported(&id, "need 2 <= n <= 7"))
        }
        GroupId::Sphere { n } => sphere_pair(id, n),
        GroupId::So4So3 => sphere_pair(id, 3),
        GroupId::Stiefel { n, k } => {
            if !(3..=MAX_AMBIENT_DIM).contains(&n) || k == 0 || k + 2 > n {
                return Err(unsupported(&id, "need 3 <= n <= 8 and 1 <= k <= n-2"));
            }
            let mut h = Vec::new();
            for i in k..n {
                for j in i + 1..n {
                    h.push(rotation_generator(n, i, j));
                }
            }
            // m = S-block (so(k), the fixed part) followed by the C-block.
            let mut m = Vec::new();
            for i in 0..k {
                for j in i + 1..k {
                    m.push(rotation_generator(n, i, j));
                }
            }
            for i in 0..k {
                for j in k..n {
                    m.push(rotation_generator(n, i, j));
                }
            }
            GroupSpec::assemble(
                id,
                Relation::SpecialOrthogonal,
                h,
                m,
                1.0,
                unit_columns(n, &(0..k).collect::<Vec<_>>()),
                Subgroup::RotationBlock {
                    offset: k,
                    size: n - k,
                },
                Manifold::Frames { n, k },
            )
        }
        GroupId::Hyperbolic { n } => {
            let dim = n + 1;
            let mut h = Vec::new();
            for i in 1..dim {
                for j in i + 1..dim {
                    h.push(rotation_generator(dim, i, j));
                }
            }
            let m = (1..dim).map(|k| boost_generator(dim, k)).collect();
            GroupSpec::assemble(
                id,
                Relation::IndefiniteOrthogonal,
                h,
                m,
                1.0,
                unit_columns(dim, &[0]),
                Subgroup::RotationBlock { offset: 1, size: n },
                Manifold::Hyperboloid { dim: n },
            )
        }
    }
}

fn sphere_pair(id: GroupId, n: usize) -> Result<GroupSpec> {
    let dim = n + 1;
    let mut h = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            h.push(rotation_generator(dim, i, j));
        }
    }
    let m = (0..n).map(|k| rotation_generator(dim, k, n)).collect();
    GroupSpec::assemble(
        id,
        Relation::SpecialOrthogonal,
        h,
        m,
        1.0,
        unit_columns(dim, &[n]),
        Subgroup::RotationBlock { offset: 0, size: n },
        Manifold::Sphere {
            dim: n,
            radius: 1.0,
        },
    )
}

impl GroupSpec {
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        id: GroupId,
        relation: Relation,
        h_basis: Vec<Mat>,
        m_basis: Vec<Mat>,
        kappa: f64,
        base_point: Mat,
        subgroup: Subgroup,
        manifold: Manifold,
    ) -> Result<GroupSpec> {
        let ambient_dim = base_point.nrows();
        let mut spec = GroupSpec {
            id,
            ambient_dim,
            relation,
            h_basis,
            m_basis,
            kappa,
            base_point,
            subgroup,
            manifold,
            membership_tol: MEMBERSHIP_TOL,
            ad: Vec::new(),
        };
        let dim = spec.dim();
        let mut ad = Vec::with_capacity(dim);
        for i in 0..dim {
            let bi = spec.basis_matrix(i).clone();
            let mut col = DMatrix::zeros(dim, dim);
            for j in 0..dim {
                let bj = spec.basis_matrix(j);
                let comm = &bi * bj - bj * &bi;
                let (coords, residual) = spec.decompose(&comm);
                if residual > 1e-12 {
                    return Err(Error::ClosureViolation { residual });
                }
                col.set_column(j, &coords);
            }
            ad.push(col);
        }
        spec.ad = ad;
        Ok(spec)
    }

    pub fn id(&self) -> GroupId {
        self.id
    }

    pub fn name(&self) -> String {
        self.id.to_string()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn relation(&self) -> Relation {
        self.relation
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn h_basis(&self) -> &[Mat] {
        &self.h_basis
    }

    pub fn m_basis(&self) -> &[Mat] {
        &self.m_basis
    }

    pub fn dim_h(&self) -> usize {
        self.h_basis.len()
    }

    pub fn dim_m(&self) -> usize {
        self.m_basis.len()
    }

    pub fn dim(&self) -> usize {
        self.h_basis.len() + self.m_basis.len()
    }

    /// Base point `o` (one column per frame vector).
    pub fn base_point(&self) -> &Mat {
        &self.base_point
    }

    pub fn subgroup(&self) -> &Subgroup {
        &self.subgroup
    }

    pub fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    pub fn membership_tol(&self) -> f64 {
        self.membership_tol
    }

    /// Copy of this descriptor with a different membership tolerance.
    pub fn with_membership_tol(&self, tol: f64) -> GroupSpec {
        GroupSpec {
            membership_tol: tol,
            ..self.clone()
        }
    }

    /// i-th matrix of the full basis `h ++ m`.
    pub fn basis_matrix(&self, i: usize) -> &Mat {
        let p = self.h_basis.len();
        if i < p {
            &self.h_basis[i]
        } else {
            &self.m_basis[i - p]
        }
    }

    /// Matrix of ad(B_i) acting on basis coordinates.
    pub fn ad_basis(&self, i: usize) -> &DMatrix<f64> {
        &self.ad[i]
    }

    /// `⟨A,B⟩ = κ Re tr(AB*)`.
    pub fn inner(&self, a: &Mat, b: &Mat) -> f64 {
        self.kappa * inner_product(a, b)
    }

    /// Coordinates of a matrix against the full basis, plus the norm of
    /// what the basis fails to reproduce.
    pub fn decompose(&self, m: &Mat) -> (DVector<f64>, f64) {
        let dim = self.dim();
        let mut coords = DVector::zeros(dim);
        let mut rebuilt = Mat::zeros(self.ambient_dim, self.ambient_dim);
        for i in 0..dim {
            let b = self.basis_matrix(i);
            let c = self.inner(m, b);
            coords[i] = c;
            rebuilt += b * re(c);
        }
        let residual = (m - rebuilt).norm();
        (coords, residual)
    }

    /// Σ cᵢ Bᵢ over the full basis.
    pub fn combine(&self, coeffs: &[f64]) -> Mat {
        let mut out = Mat::zeros(self.ambient_dim, self.ambient_dim);
        for (i, &c) in coeffs.iter().enumerate() {
            if c != 0.0 {
                out += self.basis_matrix(i) * re(c);
            }
        }
        out
    }

    /// Membership residual of the defining relation.
    pub fn residual(&self, g: &Mat) -> f64 {
        let n = self.ambient_dim;
        if g.nrows() != n || g.ncols() != n {
            return f64::INFINITY;
        }
        let eye = Mat::identity(n, n);
        match self.relation {
            Relation::SpecialUnitary => {
                let orth = (g.adjoint() * g - eye).norm();
                orth.max((g.determinant() - re(1.0)).norm())
            }
            Relation::SpecialOrthogonal => {
                let imag: f64 = g.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
                let orth = (g.transpose() * g - eye).norm();
                orth.max(imag).max((g.determinant() - re(1.0)).norm())
            }
            Relation::IndefiniteOrthogonal => {
                let s = self.signature();
                let imag: f64 = g.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
                let scale = g.norm_squared().max(1.0);
                let rel = (g.transpose() * &s * g - &s).norm() / scale;
                let det = (g.determinant() - re(1.0)).norm() / scale;
                let sheet = if g[(0, 0)].re >= 1.0 - 1e-9 {
                    0.0
                } else {
                    f64::INFINITY
                };
                rel.max(det).max(imag) + sheet
            }
        }
    }

    fn signature(&self) -> Mat {
        let mut s = Mat::identity(self.ambient_dim, self.ambient_dim);
        s[(0, 0)] = re(-1.0);
        s
    }

    /// Group inverse using the defining relation.
    pub fn inverse_matrix(&self, g: &Mat) -> Mat {
        match self.relation {
            Relation::SpecialOrthogonal | Relation::SpecialUnitary => g.adjoint(),
            Relation::IndefiniteOrthogonal => {
                let mut inv = g.transpose();
                // S gᵀ S flips the sign of the first row and first column, twice at (0,0).
                let n = self.ambient_dim;
                for k in 1..n {
                    inv[(0, k)] = -inv[(0, k)];
                    inv[(k, 0)] = -inv[(k, 0)];
                }
                inv
            }
        }
    }

    /// Projection g ↦ g·o onto the model manifold, flattened column-major.
    pub fn project_matrix(&self, g: &Mat) -> DVector<f64> {
        let go = g * &self.base_point;
        match self.id {
            GroupId::Su2Hopf => {
                let z = go[(0, 0)];
                let w = go[(1, 0)];
                let zw = z * w.conj();
                DVector::from_vec(vec![0.5 * (w.norm_sqr() - z.norm_sqr()), zw.re, zw.im])
            }
            _ => DVector::from_iterator(go.len(), go.iter().map(|z| z.re)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalog() -> Vec<GroupSpec> {
        let ids = [
            GroupId::Su2Hopf,
            GroupId::So4So3,
            GroupId::Sphere { n: 2 },
            GroupId::Sphere { n: 5 },
            GroupId::Stiefel { n: 4, k: 2 },
            GroupId::Stiefel { n: 5, k: 1 },
            GroupId::Hyperbolic { n: 2 },
            GroupId::Hyperbolic { n: 3 },
        ];
        ids.iter().map(|&id| make_group(id).unwrap()).collect()
    }

    fn in_algebra(spec: &GroupSpec, x: &Mat) -> f64 {
        match spec.relation() {
            Relation::SpecialUnitary => (x.adjoint() + x).norm() + x.trace().norm(),
            Relation::SpecialOrthogonal => (x.transpose() + x).norm(),
            Relation::IndefiniteOrthogonal => {
                let s = spec.signature();
                (x.transpose() * &s + &s * x).norm()
            }
        }
    }

    #[test]
    fn parse_roundtrips_display() {
        for spec in catalog() {
            assert_eq!(GroupId::parse(&spec.name()).unwrap(), spec.id());
        }
        assert!(matches!(
            GroupId::parse("so3-weird"),
            Err(Error::UnknownName(_))
        ));
        assert!(matches!(
            GroupId::parse("stiefel(4)"),
            Err(Error::UnknownName(_))
        ));
    }

    #[test]
    fn unsupported_dimensions_rejected() {
        for id in [
            GroupId::Sphere { n: 1 },
            GroupId::Sphere { n: 8 },
            GroupId::Hyperbolic { n: 9 },
            GroupId::Stiefel { n: 4, k: 3 },
            GroupId::Stiefel { n: 9, k: 2 },
        ] {
            assert!(
                matches!(make_group(id), Err(Error::UnsupportedDimension { .. })),
                "{id}"
            );
        }
    }

    #[test]
    fn bases_satisfy_algebra_relation() {
        for spec in catalog() {
            for i in 0..spec.dim() {
                assert!(
                    in_algebra(&spec, spec.basis_matrix(i)) < 1e-12,
                    "{}",
                    spec.name()
                );
            }
        }
    }

    #[test]
    fn gram_matrix_is_identity() {
        for spec in catalog() {
            for i in 0..spec.dim() {
                for j in 0..spec.dim() {
                    let g = spec.inner(spec.basis_matrix(i), spec.basis_matrix(j));
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((g - expect).abs() < 1e-12, "{} ({i},{j})", spec.name());
                }
            }
        }
    }

    #[test]
    fn ad_h_is_skew_and_preserves_m() {
        for spec in catalog() {
            let p = spec.dim_h();
            for z in 0..p {
                let ad = spec.ad_basis(z);
                assert!((ad + ad.transpose()).norm() < 1e-12, "{}", spec.name());
                for j in p..spec.dim() {
                    let leak = ad.column(j).rows(0, p).norm();
                    assert!(leak < 1e-12, "{}", spec.name());
                }
            }
        }
    }

    #[test]
    fn base_point_fixed_by_h() {
        for spec in catalog() {
            for a in spec.h_basis() {
                let v = a * spec.base_point();
                let tol = if spec.id() == GroupId::Su2Hopf {
                    // Hopf: H moves o only by a phase.
                    (v - spec.base_point() * Complex64::new(0.0, 1.0)).norm()
                } else {
                    v.norm()
                };
                assert!(tol < 1e-14, "{}", spec.name());
            }
        }
    }

    #[test]
    fn identity_projects_to_base_point() {
        let hopf = make_group(GroupId::Su2Hopf).unwrap();
        let x = hopf.project_matrix(&Mat::identity(2, 2));
        assert_eq!(x.as_slice(), &[-0.5, 0.0, 0.0]);
        let sphere = make_group(GroupId::Sphere { n: 3 }).unwrap();
        assert_eq!(
            sphere.project_matrix(&Mat::identity(4, 4)).as_slice(),
            &[0.0, 0.0, 0.0, 1.0]
        );
        let hyp = make_group(GroupId::Hyperbolic { n: 3 }).unwrap();
        let e0 = hyp.project_matrix(&Mat::identity(4, 4));
        assert_eq!(minkowski(&e0, &e0), -1.0);
        assert_eq!(hyp.manifold().defect(&e0), 0.0);
    }

    #[test]
    fn dimensions() {
        let hopf = make_group(GroupId::Su2Hopf).unwrap();
        assert_eq!((hopf.dim_h(), hopf.dim_m()), (1, 2));
        let s3 = make_group(GroupId::Sphere { n: 3 }).unwrap();
        assert_eq!((s3.dim_h(), s3.dim_m()), (3, 3));
        let st = make_group(GroupId::Stiefel { n: 4, k: 2 }).unwrap();
        assert_eq!((st.dim_h(), st.dim_m()), (1, 5));
        let h = make_group(GroupId::Hyperbolic { n: 4 }).unwrap();
        assert_eq!((h.dim_h(), h.dim_m()), (6, 4));
    }
}
