//! Piecewise-affine kinematics on a cuboid split into right-angled tetrahedra.
//!
//! Every cell of the `m × m × m` lattice is cut into six tetrahedra that share
//! the main diagonal from the cell's lowest corner to its highest one (Kuhn
//! subdivision). Each tetrahedron is an orthoscheme: its three path edges are
//! mutually orthogonal, so every tetrahedron is right-angled. Because every
//! cell uses the same table, neighbouring cells cut their common square face
//! along the same diagonal and the mesh is conforming.

pub mod export;

use std::collections::HashMap;

use crate::constitutive::{cauchy_stress_of_gradient, MaterialParams};
use crate::error::{Error, Result};
use crate::phase::rank_one_condition;
use crate::tensor::{AffineMap, Mat3, SymMat3, Vec3};

/// Cell-local corner table. Corner `c` sits at offset `(c & 1, (c >> 1) & 1, (c >> 2) & 1)`.
///
/// Row `p` is the path `0 → e_i → e_i + e_j → 7` for one permutation `(i, j, l)`
/// of the axes, with the two middle vertices swapped for odd permutations so
/// that every tetrahedron is positively oriented.
pub const KUHN_TETS: [[usize; 4]; 6] = [
    [0, 1, 3, 7], // x, y, z
    [0, 5, 1, 7], // x, z, y
    [0, 3, 2, 7], // y, x, z
    [0, 2, 6, 7], // y, z, x
    [0, 4, 5, 7], // z, x, y
    [0, 6, 4, 7], // z, y, x
];

#[derive(Debug, Clone, PartialEq)]
pub struct CuboidPartition {
    pub m: usize,
    pub dims: [f64; 3],
    pub vertices: Vec<Vec3>,
    pub tets: Vec<[usize; 4]>,
}

impl CuboidPartition {
    pub fn vertex_index(&self, i: usize, j: usize, k: usize) -> usize {
        let n = self.m + 1;
        i + n * (j + n * k)
    }

    /// Lattice coordinates of vertex `v`.
    pub fn lattice(&self, v: usize) -> [usize; 3] {
        let n = self.m + 1;
        [v % n, (v / n) % n, v / (n * n)]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.lattice(v).iter().any(|&c| c == 0 || c == self.m)
    }

    pub fn tet_vertices(&self, t: usize) -> [Vec3; 4] {
        self.tets[t].map(|v| self.vertices[v])
    }

    pub fn tet_volume(&self, t: usize) -> f64 {
        signed_volume(&self.tet_vertices(t))
    }

    pub fn tet_centroid(&self, t: usize) -> Vec3 {
        self.tet_vertices(t).iter().sum::<Vec3>() / 4.0
    }

    pub fn volume(&self) -> f64 {
        self.dims.iter().product()
    }

    /// Faces shared by two tetrahedra.
    pub fn interior_faces(&self) -> Vec<Face> {
        self.face_incidence()
            .into_iter()
            .filter_map(|(verts, tets)| match tets.as_slice() {
                [t0, t1] => Some(Face { verts, tets: (*t0, *t1) }),
                _ => None,
            })
            .collect()
    }

    /// Every triangular face with the tetrahedra that contain it, sorted by vertex triple.
    pub fn face_incidence(&self) -> Vec<([usize; 3], Vec<usize>)> {
        let mut faces: HashMap<[usize; 3], Vec<usize>> = HashMap::new();
        for (t, tet) in self.tets.iter().enumerate() {
            for skip in 0..4 {
                let mut f = [0usize; 3];
                let mut n = 0;
                for (i, &v) in tet.iter().enumerate() {
                    if i != skip {
                        f[n] = v;
                        n += 1;
                    }
                }
                f.sort_unstable();
                faces.entry(f).or_default().push(t);
            }
        }
        let mut out: Vec<_> = faces.into_iter().collect();
        out.sort_unstable_by_key(|f| f.0);
        out
    }
}

/// A triangular face shared by two tetrahedra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Face {
    pub verts: [usize; 3],
    pub tets: (usize, usize),
}

pub fn signed_volume(x: &[Vec3; 4]) -> f64 {
    crate::tensor::det(&Mat3::from_columns(&[x[1] - x[0], x[2] - x[0], x[3] - x[0]])) / 6.0
}

/// Lattice of `(m+1)³` vertices on `[0, d₁]×[0, d₂]×[0, d₃]`, six tetrahedra per cell.
pub fn kuhn_partition(m: usize, dims: [f64; 3]) -> Result<CuboidPartition> {
    if m == 0 {
        return Err(Error::Argument("m must be at least 1".into()));
    }
    if !dims.iter().all(|d| d.is_finite() && *d > 0.0) {
        return Err(Error::Argument(format!("cuboid dimensions must be positive, got {dims:?}")));
    }
    let n = m + 1;
    let h = dims.map(|d| d / m as f64);
    let coord = |i: usize, axis: usize| if i == m { dims[axis] } else { i as f64 * h[axis] };

    let mut vertices = Vec::with_capacity(n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                vertices.push(Vec3::new(coord(i, 0), coord(j, 1), coord(k, 2)));
            }
        }
    }

    let mut part = CuboidPartition { m, dims, vertices, tets: Vec::with_capacity(6 * m * m * m) };
    for k in 0..m {
        for j in 0..m {
            for i in 0..m {
                let corner = |c: usize| part.vertex_index(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
                let cell: Vec<[usize; 4]> = KUHN_TETS.iter().map(|t| t.map(corner)).collect();
                part.tets.extend(cell);
            }
        }
    }
    Ok(part)
}

/// Relative threshold on the homogeneous 4×4 determinant below which four points count as coplanar.
pub const COPLANAR_TOL: f64 = 1e-10;

fn homogeneous(x: &[Vec3; 4]) -> nalgebra::Matrix4<f64> {
    nalgebra::Matrix4::from_fn(|r, c| if c == 3 { 1.0 } else { x[r][c] })
}

/// Affine displacement through four vertex values.
///
/// Solves `u(Xᵥ) = a Xᵥ + b` at the four vertices by Cramer's rule: with `H`
/// the matrix of rows `[X₁ X₂ X₃ 1]`, `aᵢⱼ` is `det H` with column `j`
/// replaced by the values `uᵢ`, divided by `det H`; `bᵢ` replaces column 4.
pub fn affine_from_vertex_data(x: &[Vec3; 4], u: &[Vec3; 4]) -> Result<AffineMap> {
    let h = homogeneous(x);
    let denom = h.determinant();
    let lo = x.iter().fold(Vec3::repeat(f64::INFINITY), |acc, p| acc.inf(p));
    let hi = x.iter().fold(Vec3::repeat(f64::NEG_INFINITY), |acc, p| acc.sup(p));
    let scale = (hi - lo).norm();
    if !(denom.abs() > COPLANAR_TOL * scale.powi(3)) {
        return Err(Error::Singular(format!("vertices are coplanar (det = {denom:e})")));
    }
    let mut a = Mat3::zeros();
    let mut b = Vec3::zeros();
    for i in 0..3 {
        for col in 0..4 {
            let mut hc = h;
            for r in 0..4 {
                hc[(r, col)] = u[r][i];
            }
            let value = hc.determinant() / denom;
            if col < 3 {
                a[(i, col)] = value;
            } else {
                b[i] = value;
            }
        }
    }
    Ok(AffineMap { a, b })
}

/// `F = I + a`.
pub fn deformation_gradient(map: &AffineMap) -> Mat3 {
    map.gradient()
}

/// One affine displacement per tetrahedron of a partition.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseAffineField {
    pub partition: CuboidPartition,
    pub maps: Vec<AffineMap>,
}

impl PiecewiseAffineField {
    /// The same map on every tetrahedron.
    pub fn uniform(partition: CuboidPartition, map: AffineMap) -> Self {
        let maps = vec![map; partition.tets.len()];
        PiecewiseAffineField { partition, maps }
    }

    pub fn gradients(&self) -> Vec<Mat3> {
        self.maps.iter().map(AffineMap::gradient).collect()
    }

    /// Vertex displacements, taken from the first tetrahedron containing each vertex.
    pub fn vertex_displacements(&self) -> Vec<Vec3> {
        let mut out: Vec<Option<Vec3>> = vec![None; self.partition.vertices.len()];
        for (t, tet) in self.partition.tets.iter().enumerate() {
            for &v in tet {
                out[v].get_or_insert_with(|| self.maps[t].displacement(&self.partition.vertices[v]));
            }
        }
        out.into_iter().map(|u| u.unwrap_or_else(Vec3::zeros)).collect()
    }
}

/// Lattice-plane tolerance relative to the cell height.
const LATTICE_TOL: f64 = 1e-9;

/// Laminate `y = F X` below the plane `X₂ = c` and `y = F̂ X − c a` above it.
///
/// Requires `F̂ − F = a ⊗ e₂`, so both pieces agree on the plane; the plane
/// must coincide with a lattice plane so that no tetrahedron is cut.
pub fn build_two_phase_field(
    part: CuboidPartition,
    f: &Mat3,
    f_hat: &Mat3,
    plane_offset: f64,
) -> Result<PiecewiseAffineField> {
    let jump = f_hat - f;
    let check = rank_one_condition(f, f_hat);
    if !(check.holds || check.degenerate) {
        return Err(Error::Argument("F̂ − F is not rank-one".into()));
    }
    let a = jump.column(1).into_owned();
    if (jump - a * Vec3::y().transpose()).amax() > 1e-12 * jump.amax().max(1.0) {
        return Err(Error::Argument("F̂ − F must be of the form a ⊗ e₂".into()));
    }

    let h = part.dims[1] / part.m as f64;
    let layers = plane_offset / h;
    if !(plane_offset >= 0.0 && plane_offset <= part.dims[1]) || (layers - layers.round()).abs() > LATTICE_TOL {
        return Err(Error::Argument(format!("plane X₂ = {plane_offset} is not a lattice plane (spacing {h})")));
    }

    let below = AffineMap::from_deformation(f, &Vec3::zeros());
    let above = AffineMap::from_deformation(f_hat, &(-plane_offset * a));
    let maps =
        (0..part.tets.len()).map(|t| if part.tet_centroid(t)[1] < plane_offset { below } else { above }).collect();
    Ok(PiecewiseAffineField { partition: part, maps })
}

/// Largest displacement mismatch at a vertex between the first tetrahedron
/// containing it and any other tetrahedron containing it.
pub fn check_continuity(field: &PiecewiseAffineField) -> f64 {
    let part = &field.partition;
    let mut first: Vec<Option<Vec3>> = vec![None; part.vertices.len()];
    let mut worst = 0.0f64;
    for (t, tet) in part.tets.iter().enumerate() {
        for &v in tet {
            let u = field.maps[t].displacement(&part.vertices[v]);
            let reference = *first[v].get_or_insert(u);
            worst = worst.max((u - reference).norm());
        }
    }
    worst
}

/// Largest mismatch of the two affine pieces across every interior face,
/// sampled at the face vertices, edge midpoints and centroid.
pub fn face_trace_mismatch(field: &PiecewiseAffineField) -> f64 {
    let part = &field.partition;
    part.interior_faces()
        .iter()
        .map(|face| {
            let [p, q, r] = face.verts.map(|v| part.vertices[v]);
            let samples = [p, q, r, (p + q) / 2.0, (q + r) / 2.0, (r + p) / 2.0, (p + q + r) / 3.0];
            let (m0, m1) = (&field.maps[face.tets.0], &field.maps[face.tets.1]);
            samples.iter().map(|x| (m0.displacement(x) - m1.displacement(x)).norm()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Outcome of asking whether two affine maps can agree on a set of shared vertices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlanarityVerdict {
    /// Agreement is possible. `normal` is the interface normal, absent when `F = F̂`.
    Compatible { normal: Option<Vec3> },
    /// The agreement system forces `F = F̂`; `system_rank` is the rank of the 12 identities.
    Incompatible { system_rank: usize },
    /// Fewer than four shared vertices.
    Inconclusive,
}

/// Decides whether continuous pieces with gradients `F` and `F̂` can share `shared`.
///
/// Agreement at every `X` in `shared` reads `(F − F̂) X + (b − b̂) = 0`. With
/// `H` the matrix of rows `[X 1]` the twelve identities have rank `3·rank H`;
/// four non-coplanar points give rank 12 and force `F = F̂`. For coplanar
/// points the system is solvable exactly when `F − F̂` annihilates every
/// in-plane difference `X − X₀`.
pub fn planarity_theorem_check(shared: &[Vec3], f: &Mat3, f_hat: &Mat3) -> PlanarityVerdict {
    if shared.len() < 4 {
        return PlanarityVerdict::Inconclusive;
    }
    let d = f - f_hat;
    let centroid = shared.iter().sum::<Vec3>() / shared.len() as f64;
    let scale = shared.iter().map(|x| (x - centroid).norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);

    let rank_h = homogeneous_rank(shared, centroid, scale);
    if d.amax() <= 1e-14 * f.amax().max(1.0) {
        return PlanarityVerdict::Compatible { normal: plane_normal(shared, centroid).filter(|_| rank_h == 3) };
    }
    if rank_h == 4 {
        return PlanarityVerdict::Incompatible { system_rank: 12 };
    }
    let x0 = shared[0];
    let misfit = shared.iter().map(|x| (d * (x - x0)).norm()).fold(0.0, f64::max);
    if misfit > COPLANAR_TOL * d.norm() * scale {
        return PlanarityVerdict::Incompatible { system_rank: 3 * rank_h };
    }
    let normal = crate::tensor::rank_one_decompose(&d)
        .filter(|r| !r.degenerate)
        .map(|r| r.n)
        .or_else(|| plane_normal(shared, centroid));
    PlanarityVerdict::Compatible { normal }
}

fn homogeneous_rank(points: &[Vec3], centroid: Vec3, scale: f64) -> usize {
    let centered = nalgebra::DMatrix::from_fn(points.len(), 3, |r, c| (points[r][c] - centroid[c]) / scale);
    let sv = centered.singular_values();
    1 + sv.iter().filter(|s| **s > COPLANAR_TOL).count()
}

fn plane_normal(points: &[Vec3], centroid: Vec3) -> Option<Vec3> {
    let centered = nalgebra::DMatrix::from_fn(points.len(), 3, |r, c| points[r][c] - centroid[c]);
    let svd = centered.svd(false, true);
    let v_t = svd.v_t?;
    let (idx, _) = svd.singular_values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1))?;
    let mut n = Vec3::new(v_t[(idx, 0)], v_t[(idx, 1)], v_t[(idx, 2)]);
    if let Some(first) = n.iter().find(|c| c.abs() > 1e-12) {
        if *first < 0.0 {
            n = -n;
        }
    }
    Some(n)
}

/// Degree-of-freedom bookkeeping for the `m³` partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofAccount {
    /// `3(m+1)³` vertex displacement components.
    pub total: u64,
    /// `18(m−1)² + 36(m−1) + 24` equations from boundary vertices.
    pub boundary_eqs: u64,
    /// `3(m−1)³` interior components.
    pub interior: u64,
    /// Equations still needed after the boundary data, equal to `interior`.
    pub det_constraints_needed: u64,
    /// Tetrahedra without a boundary vertex, where a determinant constraint can be imposed.
    pub closure_tets: u64,
    /// Affine coefficients over the whole partition, `12 · 6m³`.
    pub affine_coefficients: u64,
}

impl DofAccount {
    pub fn identity_holds(&self) -> bool {
        self.total.checked_sub(self.boundary_eqs) == Some(self.interior)
    }
}

pub fn dof_accounting(m: u64) -> Result<DofAccount> {
    if m == 0 {
        return Err(Error::Argument("m must be at least 1".into()));
    }
    let interior = 3 * (m - 1).pow(3);
    Ok(DofAccount {
        total: 3 * (m + 1).pow(3),
        boundary_eqs: 18 * (m - 1).pow(2) + 36 * (m - 1) + 24,
        interior,
        det_constraints_needed: interior,
        closure_tets: 6 * m.saturating_sub(2).pow(3),
        affine_coefficients: 72 * m.pow(3),
    })
}

/// Which tetrahedra the determinant residuals are reported for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetScope {
    /// Tetrahedra with no boundary vertex.
    Closure,
    All,
}

/// `(tet index, det(I + a) − d)` for every tetrahedron in `scope`.
pub fn det_constraint_residuals(field: &PiecewiseAffineField, d: f64, scope: DetScope) -> Result<Vec<(usize, f64)>> {
    if !(d > 0.0) {
        return Err(Error::Argument(format!("target determinant must be positive, got {d}")));
    }
    let part = &field.partition;
    Ok(field
        .maps
        .iter()
        .enumerate()
        .filter(|(t, _)| scope == DetScope::All || !part.tets[*t].iter().any(|&v| part.is_boundary_vertex(v)))
        .map(|(t, map)| (t, crate::tensor::det(&map.gradient()) - d))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TractionCheck {
    /// `max ‖(σ₊ − σ₋) n‖` over interior faces.
    pub max_traction_jump: f64,
    /// Largest stress norm over all tetrahedra.
    pub max_stress: f64,
    pub equilibrium_ok: bool,
}

/// Absolute traction tolerance is `TRACTION_TOL · (1 + max ‖σ‖)`.
pub const TRACTION_TOL: f64 = 1e-10;

/// `‖(σ_t − σ_s) n‖` for every interior face shared by tetrahedra `t` and `s`,
/// with `n` the unit face normal in the reference configuration.
pub fn face_traction_jumps(field: &PiecewiseAffineField, p: &MaterialParams) -> Result<Vec<(Face, f64)>> {
    let stresses = tet_stresses(field, p)?;
    Ok(traction_jumps_from(&field.partition, &stresses))
}

fn tet_stresses(field: &PiecewiseAffineField, p: &MaterialParams) -> Result<Vec<SymMat3>> {
    field.maps.iter().map(|m| cauchy_stress_of_gradient(&m.gradient(), p)).collect()
}

fn traction_jumps_from(part: &CuboidPartition, stresses: &[SymMat3]) -> Vec<(Face, f64)> {
    part.interior_faces()
        .into_iter()
        .map(|face| {
            let [p0, p1, p2] = face.verts.map(|v| part.vertices[v]);
            let n = (p1 - p0).cross(&(p2 - p0)).normalize();
            let jump = stresses[face.tets.0].sub(&stresses[face.tets.1]);
            (face, (jump.as_mat() * n).norm())
        })
        .collect()
}

/// Piecewise-constant stress is divergence free inside every tetrahedron,
/// so equilibrium without body force reduces to continuity of `σ n` across
/// interior faces.
pub fn traction_and_equilibrium_check(field: &PiecewiseAffineField, p: &MaterialParams) -> Result<TractionCheck> {
    let stresses = tet_stresses(field, p)?;
    let max_stress = stresses.iter().map(SymMat3::norm).fold(0.0, f64::max);
    let max_traction_jump =
        traction_jumps_from(&field.partition, &stresses).iter().map(|(_, j)| *j).fold(0.0, f64::max);
    Ok(TractionCheck {
        max_traction_jump,
        max_stress,
        equilibrium_ok: max_traction_jump <= TRACTION_TOL * (1.0 + max_stress),
    })
}
