//! Two rank-one connected homogeneous phases under one Cauchy stress.
//!
//! The pair
//!
//! ```text
//! F = [k  sa 0; 0 a 0; 0 0 1/a],   F̂ = [k −sa 0; 0 a 0; 0 0 1/a]
//! ```
//!
//! differs by `−2sa e₁ ⊗ e₂`. Both left Cauchy-Green tensors share
//! `I1 = k² + s²a² + a² + 1/a²` and `I3 = k²`, hence the same β coefficients,
//! and their stresses coincide exactly when `β₁(k) = 0`. The common stress is
//! then the pressure `β₀ I`.

use crate::constitutive::{betas_model, energy, stress_from_betas, BetaCoeffs, MaterialParams};
use crate::error::{Error, Result};
use crate::tensor::{det, rank_one_decompose, Invariants, Mat3, RankOne, SymMat3, Vec3};

/// Parameters `(k, s, a)` of the phase pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseParams {
    pub k: f64,
    pub s: f64,
    pub a: f64,
}

impl PhaseParams {
    /// Strictly positive `k`, `s`, `a`.
    pub fn new(k: f64, s: f64, a: f64) -> Result<Self> {
        for (name, v) in [("k", k), ("s", s), ("a", a)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Argument(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(PhaseParams { k, s, a })
    }

    /// `C = s²a² + a² + 1/a²`; β₁ depends on `(s, a)` only through this sum.
    pub fn stretch_sum(&self) -> f64 {
        stretch_sum(self.s, self.a)
    }

    /// Shared invariants of `B` and `B̂`.
    pub fn invariants(&self) -> Invariants {
        let k2 = self.k * self.k;
        let c = self.stretch_sum();
        let a2 = self.a * self.a;
        // I2 = sum of principal 2×2 minors of B
        let (b11, b12, b22, b33) = (k2 + self.s * self.s * a2, self.s * a2, a2, 1.0 / a2);
        let i2 = b11 * b22 - b12 * b12 + b11 * b33 + b22 * b33;
        Invariants { i1: k2 + c, i2, i3: k2 }
    }
}

fn stretch_sum(s: f64, a: f64) -> f64 {
    s * s * a * a + a * a + 1.0 / (a * a)
}

/// `β₁(k) = μ k^(-5/3) + μ̃ k⁻¹ (k² + C − 3)`.
pub fn beta1_phase(k: f64, s: f64, a: f64, p: &MaterialParams) -> f64 {
    p.mu * k.powf(-5.0 / 3.0) + p.mu_tilde / k * (k * k + stretch_sum(s, a) - 3.0)
}

/// `β₀(k) = −μ/3 k^(-5/3) (k² + C) + κ (k − 1)`.
pub fn beta0_phase(k: f64, s: f64, a: f64, p: &MaterialParams) -> f64 {
    -p.mu / 3.0 * k.powf(-5.0 / 3.0) * (k * k + stretch_sum(s, a)) + p.kappa * (k - 1.0)
}

/// The gradients `(F, F̂)`.
pub fn phase_gradients(pp: &PhaseParams) -> (Mat3, Mat3) {
    let PhaseParams { k, s, a } = *pp;
    let f = Mat3::new(k, s * a, 0.0, 0.0, a, 0.0, 0.0, 0.0, 1.0 / a);
    let f_hat = Mat3::new(k, -s * a, 0.0, 0.0, a, 0.0, 0.0, 0.0, 1.0 / a);
    (f, f_hat)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankOneCheck {
    /// Rank of `F̂ − F` is exactly one.
    pub holds: bool,
    /// `F = F̂`.
    pub degenerate: bool,
    /// `|(F₁₁−F̂₁₁)(F₂₂−F̂₂₂) − (F₁₂−F̂₁₂)(F₂₁−F̂₂₁)|`.
    pub residual: f64,
    /// `F̂ − F = a ⊗ n`, when it exists.
    pub decomposition: Option<RankOne>,
}

/// Rank-one connectivity of `F` and `F̂`: the in-plane 2×2 minor condition
/// together with the full rank test on `F̂ − F`.
pub fn rank_one_condition(f: &Mat3, f_hat: &Mat3) -> RankOneCheck {
    let d = f_hat - f;
    let residual = ((f[(0, 0)] - f_hat[(0, 0)]) * (f[(1, 1)] - f_hat[(1, 1)])
        - (f[(0, 1)] - f_hat[(0, 1)]) * (f[(1, 0)] - f_hat[(1, 0)]))
        .abs();
    let decomposition = rank_one_decompose(&d);
    let degenerate = decomposition.is_some_and(|r| r.degenerate);
    RankOneCheck { holds: decomposition.is_some() && !degenerate, degenerate, residual, decomposition }
}

/// Parameter window in which `β₁` has roots in `(0, 1)` for a given `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibleRegion {
    /// `((3 − a² − 1/a²)/4)^(4/3)`, the upper bound on `μ/(3μ̃)`.
    pub mu_ratio_bound: f64,
    /// Supremum of admissible `s`.
    pub s_max: f64,
}

/// Admissible region for `a`, or `None` when `3 − a² − 1/a² ≤ 0` or `μ/(3μ̃)` is too large.
pub fn admissible_smax(a: f64, p: &MaterialParams) -> Option<AdmissibleRegion> {
    if !(a > 0.0) {
        return None;
    }
    let slack = 3.0 - a * a - 1.0 / (a * a);
    if !(slack > 0.0) {
        return None;
    }
    let ratio = p.mu / (3.0 * p.mu_tilde);
    let mu_ratio_bound = (slack / 4.0).powf(4.0 / 3.0);
    if !(ratio < mu_ratio_bound) {
        return None;
    }
    let s_max = (3.0 - 4.0 * ratio.powf(0.75) - a * a - 1.0 / (a * a)).sqrt() / a;
    Some(AdmissibleRegion { mu_ratio_bound, s_max })
}

/// Uniform sampling of a closed interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl UniformGrid {
    pub fn new(lo: f64, hi: f64, points: usize) -> Self {
        UniformGrid { lo, hi, points }
    }

    pub fn step(&self) -> f64 {
        if self.points < 2 {
            0.0
        } else {
            (self.hi - self.lo) / (self.points - 1) as f64
        }
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            self.hi
        } else {
            self.lo + i as f64 * self.step()
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(move |i| self.point(i))
    }
}

/// Default k-scan: 10⁴ points on `[10⁻⁴, 1 − 10⁻⁴]`.
pub const K_SCAN: UniformGrid = UniformGrid { lo: 1e-4, hi: 1.0 - 1e-4, points: 10_000 };

/// Bisection stops once `|β₁| ≤ ROOT_TOL`.
pub const ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KRoot {
    pub k: f64,
    pub beta0: f64,
    pub beta1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootScan {
    /// Roots in ascending order.
    pub roots: Vec<KRoot>,
    /// Set when the scan found no sign change.
    pub diagnostic: Option<String>,
}

/// All roots of `β₁(k)` in `(0, 1)` for admissible `(s, a)`, on the default grid.
pub fn find_k_roots(s: f64, a: f64, p: &MaterialParams) -> Result<RootScan> {
    find_k_roots_on(s, a, p, &K_SCAN)
}

/// Sign-change scan of `β₁` over `grid` followed by bisection of every bracket.
pub fn find_k_roots_on(s: f64, a: f64, p: &MaterialParams, grid: &UniformGrid) -> Result<RootScan> {
    let region = admissible_smax(a, p)
        .ok_or_else(|| Error::Inadmissible(format!("no admissible s for a = {a} with this material")))?;
    if !(s > 0.0 && s < region.s_max) {
        return Err(Error::Inadmissible(format!("s = {s} outside the open interval (0, {})", region.s_max)));
    }
    if grid.points < 2 {
        return Err(Error::Argument("root scan needs at least two grid points".into()));
    }

    let beta1 = |k: f64| beta1_phase(k, s, a, p);
    let (lo_val, hi_val) = (beta1(grid.lo), beta1(grid.hi));
    if !(lo_val > 0.0 && hi_val > 0.0) {
        return Err(Error::Numerical(format!(
            "expected β₁ > 0 at both scan ends, got β₁({}) = {lo_val:e}, β₁({}) = {hi_val:e}",
            grid.lo, grid.hi
        )));
    }

    let mut roots = Vec::new();
    let mut prev = (grid.lo, lo_val);
    for k in grid.iter().skip(1) {
        let val = beta1(k);
        if val == 0.0 {
            roots.push(k);
        } else if prev.1 != 0.0 && (prev.1 < 0.0) != (val < 0.0) {
            roots.push(bisect(&beta1, prev.0, k, ROOT_TOL)?);
        }
        prev = (k, val);
    }

    let roots = roots
        .into_iter()
        .map(|k| {
            let root = KRoot { k, beta0: beta0_phase(k, s, a, p), beta1: beta1(k) };
            if !(root.beta0 < 0.0) {
                return Err(Error::Numerical(format!("β₀ = {} is not negative at root k = {k}", root.beta0)));
            }
            Ok(root)
        })
        .collect::<Result<Vec<_>>>()?;

    let diagnostic = roots.is_empty().then(|| {
        let min = grid.iter().map(beta1).fold(f64::INFINITY, f64::min);
        format!("no sign change of β₁ on {} grid points; min β₁ = {min:e}", grid.points)
    });
    Ok(RootScan { roots, diagnostic })
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut f_lo = f(lo);
    loop {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid.abs() <= tol {
            return Ok(mid);
        }
        if mid <= lo || mid >= hi {
            return Err(Error::Numerical(format!(
                "bisection stalled at k = {mid} with |β₁| = {:e} > {tol:e}",
                f_mid.abs()
            )));
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
}

/// Absolute componentwise differences `|σ(B) − σ(B̂)|` in the order 11, 22, 33, 12, 13, 23.
pub fn stress_equality_residuals(b: &SymMat3, b_hat: &SymMat3, p: &MaterialParams) -> Result<[f64; 6]> {
    let sigma = crate::constitutive::cauchy_stress(b, p)?;
    let sigma_hat = crate::constitutive::cauchy_stress(b_hat, p)?;
    Ok(sigma.sub(&sigma_hat).components().map(f64::abs))
}

/// Both phases at one root of `β₁`, with their common stress.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhaseState {
    pub params: PhaseParams,
    pub f: Mat3,
    pub f_hat: Mat3,
    pub b: SymMat3,
    pub b_hat: SymMat3,
    pub sigma: SymMat3,
    pub beta0: f64,
    pub beta1: f64,
}

impl TwoPhaseState {
    /// State at an arbitrary `k`, root or not.
    pub fn at(pp: PhaseParams, p: &MaterialParams) -> Result<Self> {
        let (f, f_hat) = phase_gradients(&pp);
        let b = SymMat3::left_cauchy_green(&f);
        let b_hat = SymMat3::left_cauchy_green(&f_hat);
        let BetaCoeffs { beta0, beta1, beta_m1 } = betas_model(&pp.invariants(), p);
        let sigma = stress_from_betas(&b, &BetaCoeffs { beta0, beta1, beta_m1 })?;
        Ok(TwoPhaseState { params: pp, f, f_hat, b, b_hat, sigma, beta0, beta1 })
    }

    /// Laminate direction `F̂ − F = a ⊗ n`.
    pub fn jump(&self) -> Mat3 {
        self.f_hat - self.f
    }
}

/// Builds the state at the `root_index`-th root (ascending) of `β₁`.
pub fn build_two_phase_state(s: f64, a: f64, root_index: usize, p: &MaterialParams) -> Result<TwoPhaseState> {
    let scan = find_k_roots(s, a, p)?;
    let root = scan.roots.get(root_index).ok_or_else(|| {
        Error::Argument(format!("root index {root_index} out of range ({} roots found)", scan.roots.len()))
    })?;
    TwoPhaseState::at(PhaseParams::new(root.k, s, a)?, p)
}

/// `β₁` along a path of phase parameters.
pub fn linear_limit_scan(path: &[PhaseParams], p: &MaterialParams) -> Vec<f64> {
    path.iter().map(|pp| beta1_phase(pp.k, pp.s, pp.a, p)).collect()
}

/// Point where `t ↦ W(F₀ + t a⊗n)` fails to be convex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexityWitness {
    pub t: f64,
    pub second_derivative: f64,
}

/// Probe of the model energy along the rank-one line `F₀ + t a⊗n`.
pub fn rank_one_convexity_probe(
    p: &MaterialParams,
    f0: &Mat3,
    a: &Vec3,
    n: &Vec3,
    t_grid: &UniformGrid,
) -> Result<Option<ConvexityWitness>> {
    rank_one_convexity_probe_with(|f| energy(f, p), f0, a, n, t_grid)
}

/// Returns the first grid point whose central second difference of
/// `g(t) = W(F₀ + t a⊗n)` is negative.
pub fn rank_one_convexity_probe_with(
    w: impl Fn(&Mat3) -> Result<f64>,
    f0: &Mat3,
    a: &Vec3,
    n: &Vec3,
    t_grid: &UniformGrid,
) -> Result<Option<ConvexityWitness>> {
    Ok(energy_along_line(w, f0, a, n, t_grid)?.into_iter().find_map(|s| {
        s.second_difference.filter(|d| *d < 0.0).map(|d| ConvexityWitness { t: s.t, second_derivative: d })
    }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSample {
    pub t: f64,
    pub energy: f64,
    /// Central second difference; absent at the two end points.
    pub second_difference: Option<f64>,
}

/// Samples `g(t) = W(F₀ + t a⊗n)` and its central second difference.
pub fn energy_along_line(
    w: impl Fn(&Mat3) -> Result<f64>,
    f0: &Mat3,
    a: &Vec3,
    n: &Vec3,
    t_grid: &UniformGrid,
) -> Result<Vec<LineSample>> {
    let dir = a * n.transpose();
    let g = t_grid
        .iter()
        .map(|t| {
            let f = f0 + dir * t;
            let j = det(&f);
            if !(j > 0.0) {
                return Err(Error::Argument(format!("det(F₀ + t a⊗n) = {j:e} ≤ 0 at t = {t}")));
            }
            Ok((t, w(&f)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let h = t_grid.step();
    Ok((0..g.len())
        .map(|i| LineSample {
            t: g[i].0,
            energy: g[i].1,
            second_difference: (i > 0 && i + 1 < g.len()).then(|| (g[i + 1].1 - 2.0 * g[i].1 + g[i - 1].1) / (h * h)),
        })
        .collect())
}

/// Default probe: the segment from `F` (t = 0) to `F̂` (t = 1) of a two-phase state.
pub fn probe_laminate(state: &TwoPhaseState, p: &MaterialParams, points: usize) -> Result<Option<ConvexityWitness>> {
    let (a, n) = laminate_direction(state);
    rank_one_convexity_probe(p, &state.f, &a, &n, &UniformGrid::new(0.0, 1.0, points))
}

/// `(a, n)` with `F̂ − F = a ⊗ n`; for the phase pair `n = e₂`.
pub fn laminate_direction(state: &TwoPhaseState) -> (Vec3, Vec3) {
    match rank_one_decompose(&state.jump()) {
        Some(r) if !r.degenerate => (r.a, r.n),
        _ => (Vec3::zeros(), Vec3::y()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> MaterialParams {
        MaterialParams::new(1.0, 3.0, 1.0).unwrap()
    }

    #[test]
    fn gradients_reduce_to_identity() {
        let (f, f_hat) = phase_gradients(&PhaseParams { k: 1.0, s: 0.0, a: 1.0 });
        assert_eq!(f, Mat3::identity());
        assert_eq!(f_hat, Mat3::identity());
    }

    #[test]
    fn gradients_structure() {
        let pp = PhaseParams::new(0.7, 0.3, 1.0).unwrap();
        let (f, f_hat) = phase_gradients(&pp);
        assert_relative_eq!(f[(0, 1)], 0.3);
        assert_relative_eq!(f_hat[(0, 1)], -0.3);
        let d = f_hat - f;
        for i in 0..3 {
            for j in 0..3 {
                if (i, j) != (0, 1) {
                    assert_eq!(d[(i, j)], 0.0);
                }
            }
        }
        assert_relative_eq!(d[(0, 1)], -0.6);
        assert_eq!(det(&f), 0.7);
    }

    #[test]
    fn rank_one_condition_cases() {
        let (f, f_hat) = phase_gradients(&PhaseParams::new(0.7, 0.3, 1.0).unwrap());
        let c = rank_one_condition(&f, &f_hat);
        assert!(c.holds && !c.degenerate);
        assert_eq!(c.residual, 0.0);
        let r = c.decomposition.unwrap();
        assert_relative_eq!(r.n, Vec3::y());
        assert_relative_eq!(r.a, Vec3::new(-0.6, 0.0, 0.0), epsilon = 1e-15);

        let c = rank_one_condition(&f, &f);
        assert!(c.degenerate && !c.holds);
        assert_eq!(c.residual, 0.0);

        let c = rank_one_condition(&f, &(f + Mat3::from_diagonal(&Vec3::new(1.0, 1.0, 0.0))));
        assert!(!c.holds);
        assert_eq!(c.residual, 1.0);
    }

    #[test]
    fn admissible_region_cases() {
        let r = admissible_smax(1.0, &params()).unwrap();
        assert_relative_eq!(r.mu_ratio_bound, 0.25f64.powf(4.0 / 3.0), max_relative = 1e-15);
        assert_relative_eq!(r.s_max, (1.0 - 4.0 * 9f64.powf(-0.75)).sqrt(), max_relative = 1e-15);
        assert!((r.s_max - 0.48).abs() < 0.005);
        assert!(admissible_smax(2.0, &params()).is_none());
        assert!(admissible_smax(1.0, &MaterialParams::new(1.0, 1.0, 1.0).unwrap()).is_none());
    }

    #[test]
    fn roots_at_reference_parameters() {
        let scan = find_k_roots(0.3, 1.0, &params()).unwrap();
        assert_eq!(scan.roots.len(), 2);
        assert!(scan.diagnostic.is_none());
        let (k1, k2) = (scan.roots[0].k, scan.roots[1].k);
        assert!(k1 > 0.2 && k1 < 0.3, "k1 = {k1}");
        assert!(k2 > 0.65 && k2 < 0.75, "k2 = {k2}");
        for r in &scan.roots {
            assert!(r.beta1.abs() <= ROOT_TOL);
            assert!(r.beta0 < 0.0);
        }
    }

    #[test]
    fn roots_reject_inadmissible() {
        let p = params();
        assert!(matches!(find_k_roots(0.0, 1.0, &p), Err(Error::Inadmissible(_))));
        assert!(matches!(find_k_roots(0.49, 1.0, &p), Err(Error::Inadmissible(_))));
        assert!(matches!(find_k_roots(0.1, 2.0, &p), Err(Error::Inadmissible(_))));
        assert!(matches!(build_two_phase_state(0.0, 1.0, 0, &p), Err(Error::Inadmissible(_))));
    }

    #[test]
    fn roots_merge_near_smax() {
        let p = params();
        let s_max = admissible_smax(1.0, &p).unwrap().s_max;
        let k_star = (p.mu / (3.0 * p.mu_tilde)).powf(3.0 / 8.0);
        let scan = find_k_roots(s_max * (1.0 - 1e-6), 1.0, &p).unwrap();
        assert_eq!(scan.roots.len(), 2);
        let (k1, k2) = (scan.roots[0].k, scan.roots[1].k);
        assert!(k2 - k1 < 1e-2, "gap {}", k2 - k1);
        assert!(k1 < k_star && k_star < k2);
    }

    #[test]
    fn identity_is_never_a_root() {
        assert_eq!(beta1_phase(1.0, 0.0, 1.0, &params()), params().mu);
    }

    #[test]
    fn root_index_out_of_range() {
        assert!(matches!(build_two_phase_state(0.3, 1.0, 2, &params()), Err(Error::Argument(_))));
    }

    #[test]
    fn phase_invariants_match_tensors() {
        let pp = PhaseParams::new(0.63, 0.21, 1.15).unwrap();
        let (f, f_hat) = phase_gradients(&pp);
        for b in [SymMat3::left_cauchy_green(&f), SymMat3::left_cauchy_green(&f_hat)] {
            let inv = crate::tensor::invariants(&b).unwrap();
            let expected = pp.invariants();
            assert_relative_eq!(inv.i1, expected.i1, max_relative = 1e-14);
            assert_relative_eq!(inv.i2, expected.i2, max_relative = 1e-14);
            assert_relative_eq!(inv.i3, expected.i3, max_relative = 1e-14);
        }
    }

    #[test]
    fn off_diagonal_residual_away_from_root() {
        let p = params();
        let pp = PhaseParams::new(0.5, 0.3, 1.2).unwrap();
        let (f, f_hat) = phase_gradients(&pp);
        let res = stress_equality_residuals(&SymMat3::left_cauchy_green(&f), &SymMat3::left_cauchy_green(&f_hat), &p)
            .unwrap();
        let beta1 = beta1_phase(0.5, 0.3, 1.2, &p);
        assert_relative_eq!(res[3], 2.0 * beta1.abs() * 0.3 * 1.44, max_relative = 1e-12);
        assert!(res[0] < 1e-14 && res[1] < 1e-14 && res[2] < 1e-14 && res[4] == 0.0 && res[5] == 0.0);
    }

    #[test]
    fn residuals_vanish_for_equal_tensors() {
        let b = SymMat3::new(2.0, 1.5, 0.8, 0.1, -0.2, 0.05);
        assert_eq!(stress_equality_residuals(&b, &b, &params()).unwrap(), [0.0; 6]);
    }

    #[test]
    fn probe_degenerate_direction() {
        let w = probe_laminate_with_zero();
        assert!(w.is_none());
    }

    fn probe_laminate_with_zero() -> Option<ConvexityWitness> {
        rank_one_convexity_probe(
            &params(),
            &Mat3::identity(),
            &Vec3::zeros(),
            &Vec3::y(),
            &UniformGrid::new(0.0, 1.0, 101),
        )
        .unwrap()
    }

    #[test]
    fn probe_reports_orientation_loss() {
        let err = rank_one_convexity_probe(
            &params(),
            &Mat3::identity(),
            &Vec3::new(-2.0, 0.0, 0.0),
            &Vec3::x(),
            &UniformGrid::new(0.0, 1.0, 11),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Argument(ref m) if m.contains("t = 0.5")), "{err}");
    }
}
