//! Fixed-size 3×3 tensor algebra.
//!
//! Deformation gradients and stresses are plain `nalgebra` 3×3 matrices.
//! [`SymMat3`] wraps a matrix that is symmetric by construction and is the
//! carrier for left Cauchy-Green tensors, Cauchy stresses and strains.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use crate::error::{Error, Result};

pub type Mat3 = Matrix3<f64>;
pub type Vec3 = Vector3<f64>;

/// Ratio σ₂/σ₁ of singular values below which a matrix is treated as rank one.
pub const RANK_ONE_TOL: f64 = 1e-9;

/// A symmetric 3×3 tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMat3(Mat3);

impl SymMat3 {
    /// Builds the tensor from its six independent components.
    pub fn new(xx: f64, yy: f64, zz: f64, xy: f64, xz: f64, yz: f64) -> Self {
        SymMat3(Mat3::new(xx, xy, xz, xy, yy, yz, xz, yz, zz))
    }

    pub fn identity() -> Self {
        SymMat3(Mat3::identity())
    }

    pub fn zeros() -> Self {
        SymMat3(Mat3::zeros())
    }

    pub fn from_diagonal(d: [f64; 3]) -> Self {
        SymMat3::new(d[0], d[1], d[2], 0.0, 0.0, 0.0)
    }

    /// Symmetric part `(M + Mᵀ)/2`.
    pub fn sym_part(m: &Mat3) -> Self {
        SymMat3((m + m.transpose()) * 0.5)
    }

    /// Accepts `m` only if `‖M − Mᵀ‖ ≤ tol·max(1, ‖M‖)`.
    pub fn try_from_mat(m: &Mat3, tol: f64) -> Result<Self> {
        let skew = (m - m.transpose()).norm();
        if skew > tol * m.norm().max(1.0) {
            return Err(Error::Argument(format!("matrix is not symmetric (‖M − Mᵀ‖ = {skew:e})")));
        }
        Ok(SymMat3::sym_part(m))
    }

    /// Left Cauchy-Green tensor `F Fᵀ`.
    pub fn left_cauchy_green(f: &Mat3) -> Self {
        SymMat3::sym_part(&(f * f.transpose()))
    }

    pub fn as_mat(&self) -> &Mat3 {
        &self.0
    }

    pub fn into_mat(self) -> Mat3 {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    /// Components in the order (11, 22, 33, 12, 13, 23).
    pub fn components(&self) -> [f64; 6] {
        let m = &self.0;
        [m[(0, 0)], m[(1, 1)], m[(2, 2)], m[(0, 1)], m[(0, 2)], m[(1, 2)]]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn scale(&self, s: f64) -> Self {
        SymMat3(self.0 * s)
    }

    pub fn add(&self, other: &SymMat3) -> Self {
        SymMat3(self.0 + other.0)
    }

    pub fn sub(&self, other: &SymMat3) -> Self {
        SymMat3(self.0 - other.0)
    }

    /// Deviatoric part `A − (tr A / 3) I`.
    pub fn deviator(&self) -> Self {
        SymMat3(self.0 - Mat3::identity() * (self.trace() / 3.0))
    }

    /// Eigenvalues in ascending order with the matching orthonormal eigenvectors as columns.
    pub fn eigen(&self) -> ([f64; 3], Mat3) {
        let eig = SymmetricEigen::new(self.0);
        let mut order = [0usize, 1, 2];
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let values = order.map(|i| eig.eigenvalues[i]);
        let vectors = Mat3::from_columns(&order.map(|i| eig.eigenvectors.column(i).into_owned()));
        (values, vectors)
    }

    /// Fails with [`Error::NotPositiveDefinite`] unless every eigenvalue is positive.
    pub fn check_positive_definite(&self) -> Result<()> {
        if !self.0.iter().all(|x| x.is_finite()) {
            return Err(Error::Argument("non-finite tensor entry".into()));
        }
        let (values, _) = self.eigen();
        if values[0] <= 0.0 {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: values[0] });
        }
        Ok(())
    }

    pub fn inverse(&self) -> Result<Self> {
        self.0
            .try_inverse()
            .map(|m| SymMat3::sym_part(&m))
            .ok_or_else(|| Error::Singular("symmetric tensor is not invertible".into()))
    }
}

/// Principal invariants of a symmetric positive-definite tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Invariants {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
}

impl Invariants {
    pub const IDENTITY: Invariants = Invariants { i1: 3.0, i2: 3.0, i3: 1.0 };
}

/// `I1 = tr B`, `I2 = tr(Cof B)`, `I3 = det B`.
pub fn invariants(b: &SymMat3) -> Result<Invariants> {
    b.check_positive_definite()?;
    Ok(invariants_unchecked(b))
}

pub(crate) fn invariants_unchecked(b: &SymMat3) -> Invariants {
    Invariants { i1: b.trace(), i2: cofactor(b.as_mat()).trace(), i3: det(b.as_mat()) }
}

/// Unique SPD square root `V` with `V V = B`, computed from the eigendecomposition.
pub fn spd_sqrt(b: &SymMat3) -> Result<SymMat3> {
    let (values, q) = b.eigen();
    if values[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: values[0] });
    }
    let root = Mat3::from_diagonal(&Vec3::from(values.map(f64::sqrt)));
    Ok(SymMat3::sym_part(&(q * root * q.transpose())))
}

/// Determinant by cofactor expansion along the first row.
pub fn det(m: &Mat3) -> f64 {
    m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
        - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
        + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
}

/// Cofactor matrix; equals `det(M) M⁻ᵀ` whenever `M` is invertible.
pub fn cofactor(m: &Mat3) -> Mat3 {
    let c = |r0: usize, r1: usize, c0: usize, c1: usize| m[(r0, c0)] * m[(r1, c1)] - m[(r0, c1)] * m[(r1, c0)];
    Mat3::new(
        c(1, 2, 1, 2),
        -c(1, 2, 0, 2),
        c(1, 2, 0, 1),
        -c(0, 2, 1, 2),
        c(0, 2, 0, 2),
        -c(0, 2, 0, 1),
        c(0, 1, 1, 2),
        -c(0, 1, 0, 2),
        c(0, 1, 0, 1),
    )
}

/// Outcome of a rank-one factorisation `D = a ⊗ n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankOne {
    pub a: Vec3,
    /// Unit normal, zero when `degenerate`.
    pub n: Vec3,
    /// Set when the input is the zero matrix.
    pub degenerate: bool,
}

impl RankOne {
    pub fn outer(&self) -> Mat3 {
        self.a * self.n.transpose()
    }
}

/// Factorises `D = a ⊗ n` with `‖n‖ = 1` when `D` has numerical rank one.
///
/// Rank one means σ₂ ≤ [`RANK_ONE_TOL`]·σ₁. The normal is taken from the
/// dominant row of `D` and oriented so its first nonzero component is
/// positive; `a = D n` carries magnitude and sign. The zero matrix yields
/// a degenerate zero factorisation. Any other rank gives `None`.
pub fn rank_one_decompose(d: &Mat3) -> Option<RankOne> {
    if d.iter().all(|&x| x == 0.0) {
        return Some(RankOne { a: Vec3::zeros(), n: Vec3::zeros(), degenerate: true });
    }
    let mut sv = d.singular_values();
    sv.as_mut_slice().sort_by(|x, y| y.total_cmp(x));
    if sv[1] > RANK_ONE_TOL * sv[0] {
        return None;
    }

    let row = (0..3).map(|i| d.row(i).transpose()).max_by(|x, y| x.norm().total_cmp(&y.norm())).expect("three rows");
    let mut n = row / row.norm();
    let scale = n.amax();
    if let Some(first) = n.iter().find(|c| c.abs() > 1e-12 * scale) {
        if *first < 0.0 {
            n = -n;
        }
    }
    let a = d * n;
    Some(RankOne { a, n, degenerate: false })
}

/// `‖RᵀR − I‖ ≤ tol` and `|det R − 1| ≤ tol`.
pub fn is_rotation(r: &Mat3, tol: f64) -> bool {
    (r.transpose() * r - Mat3::identity()).amax() <= tol && (det(r) - 1.0).abs() <= tol
}

/// Affine displacement `u(X) = a X + b` on one tetrahedron.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub a: Mat3,
    pub b: Vec3,
}

impl AffineMap {
    pub fn zero() -> Self {
        AffineMap { a: Mat3::zeros(), b: Vec3::zeros() }
    }

    /// Displacement of the deformation `y(X) = F X + t`.
    pub fn from_deformation(f: &Mat3, t: &Vec3) -> Self {
        AffineMap { a: f - Mat3::identity(), b: *t }
    }

    pub fn displacement(&self, x: &Vec3) -> Vec3 {
        self.a * x + self.b
    }

    pub fn deformation(&self, x: &Vec3) -> Vec3 {
        x + self.displacement(x)
    }

    /// `F = I + a`.
    pub fn gradient(&self) -> Mat3 {
        Mat3::identity() + self.a
    }
}
