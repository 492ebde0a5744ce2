//! Constitutive relations.
//!
//! The compressible isotropic energy used throughout the crate is
//!
//! ```text
//! W = μ/2 (I3^(-1/3) I1 − 3) + μ̃/4 (I1 − 3)² + κ/2 (I3^(1/2) − 1)²
//! ```
//!
//! written in the invariants of `B = F Fᵀ`. It is not rank-one convex, which
//! is what lets two distinct rank-one connected gradients carry the same
//! Cauchy stress. The module also carries linear isotropic elasticity and
//! its inverse for comparison in the small-strain limit.

use crate::error::{Error, Result};
use crate::tensor::{self, det, invariants, is_rotation, spd_sqrt, AffineMap, Invariants, Mat3, SymMat3, Vec3};

/// Moduli of the model energy: shear `mu`, quadratic `mu_tilde`, bulk `kappa`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    pub mu: f64,
    pub mu_tilde: f64,
    pub kappa: f64,
}

impl MaterialParams {
    pub fn new(mu: f64, mu_tilde: f64, kappa: f64) -> Result<Self> {
        let p = MaterialParams { mu, mu_tilde, kappa };
        p.validate()?;
        Ok(p)
    }

    /// Shear and bulk moduli of the small-strain limit, `(μ, κ + 2μ̃)`.
    ///
    /// `(I1 − 3)² ≈ 4 (tr ε)²`, so the quadratic term stiffens the volumetric
    /// response on top of `κ`.
    pub fn linearized_moduli(&self) -> (f64, f64) {
        (self.mu, self.kappa + 2.0 * self.mu_tilde)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("mu", self.mu), ("mu_tilde", self.mu_tilde), ("kappa", self.kappa)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Argument(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

/// Coefficients of `σ = β₀ I + β₁ B + β₋₁ B⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaCoeffs {
    pub beta0: f64,
    pub beta1: f64,
    pub beta_m1: f64,
}

/// Partial derivatives of `W(I1, I2, I3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyDerivs {
    pub dw_di1: f64,
    pub dw_di2: f64,
    pub dw_di3: f64,
}

fn check_orientation(f: &Mat3) -> Result<f64> {
    let j = det(f);
    if !(j > 0.0) {
        return Err(Error::Orientation { det: j });
    }
    Ok(j)
}

/// Energy as a function of the invariants.
pub fn energy_from_invariants(inv: &Invariants, p: &MaterialParams) -> f64 {
    let Invariants { i1, i3, .. } = *inv;
    0.5 * p.mu * (i3.powf(-1.0 / 3.0) * i1 - 3.0)
        + 0.25 * p.mu_tilde * (i1 - 3.0).powi(2)
        + 0.5 * p.kappa * (i3.sqrt() - 1.0).powi(2)
}

/// Stored energy `W(F)` evaluated through the invariants of `B = F Fᵀ`.
pub fn energy(f: &Mat3, p: &MaterialParams) -> Result<f64> {
    check_orientation(f)?;
    let inv = tensor::invariants_unchecked(&SymMat3::left_cauchy_green(f));
    Ok(energy_from_invariants(&inv, p))
}

/// The same energy in Frobenius-norm form, `‖F / J^(1/3)‖²` etc.
pub fn energy_frobenius(f: &Mat3, p: &MaterialParams) -> Result<f64> {
    let j = check_orientation(f)?;
    let iso = (f / j.cbrt()).norm_squared();
    let fro = f.norm_squared();
    Ok(0.5 * p.mu * (iso - 3.0) + 0.25 * p.mu_tilde * (fro - 3.0).powi(2) + 0.5 * p.kappa * (j - 1.0).powi(2))
}

pub fn energy_derivs(inv: &Invariants, p: &MaterialParams) -> EnergyDerivs {
    let Invariants { i1, i3, .. } = *inv;
    EnergyDerivs {
        dw_di1: 0.5 * p.mu * i3.powf(-1.0 / 3.0) + 0.5 * p.mu_tilde * (i1 - 3.0),
        dw_di2: 0.0,
        dw_di3: -p.mu / 6.0 * i1 * i3.powf(-4.0 / 3.0) + 0.5 * p.kappa * i3.powf(-0.5) * (i3.sqrt() - 1.0),
    }
}

/// Representation coefficients for any isotropic energy, from its invariant derivatives.
pub fn betas_general(inv: &Invariants, d: &EnergyDerivs) -> BetaCoeffs {
    let root = inv.i3.sqrt();
    BetaCoeffs {
        beta0: 2.0 / root * (inv.i2 * d.dw_di2 + inv.i3 * d.dw_di3),
        beta1: 2.0 / root * d.dw_di1,
        beta_m1: -2.0 * root * d.dw_di2,
    }
}

/// Closed-form coefficients of the model energy; `beta_m1` vanishes identically.
pub fn betas_model(inv: &Invariants, p: &MaterialParams) -> BetaCoeffs {
    let Invariants { i1, i3, .. } = *inv;
    let i3_56 = i3.powf(-5.0 / 6.0);
    BetaCoeffs {
        beta0: -p.mu / 3.0 * i1 * i3_56 + p.kappa * (i3.sqrt() - 1.0),
        beta1: p.mu * i3_56 + p.mu_tilde * i3.powf(-0.5) * (i1 - 3.0),
        beta_m1: 0.0,
    }
}

/// `β₀ I + β₁ B + β₋₁ B⁻¹`. The inverse is only formed when `β₋₁ ≠ 0`.
pub fn stress_from_betas(b: &SymMat3, betas: &BetaCoeffs) -> Result<SymMat3> {
    let mut sigma = SymMat3::identity().scale(betas.beta0).add(&b.scale(betas.beta1));
    if betas.beta_m1 != 0.0 {
        sigma = sigma.add(&b.inverse()?.scale(betas.beta_m1));
    }
    Ok(sigma)
}

/// Cauchy stress of the model energy at the left Cauchy-Green tensor `B`.
pub fn cauchy_stress(b: &SymMat3, p: &MaterialParams) -> Result<SymMat3> {
    let inv = invariants(b)?;
    stress_from_betas(b, &betas_model(&inv, p))
}

/// Cauchy stress from a deformation gradient.
pub fn cauchy_stress_of_gradient(f: &Mat3, p: &MaterialParams) -> Result<SymMat3> {
    check_orientation(f)?;
    cauchy_stress(&SymMat3::left_cauchy_green(f), p)
}

/// Tolerance on `|det B − 1|` for the incompressible branch.
pub const INCOMPRESSIBLE_DET_TOL: f64 = 1e-8;

/// Incompressible response `−p I + β₁ B + β₋₁ B⁻¹` for a supplied pressure.
pub fn cauchy_stress_incompressible(b: &SymMat3, pressure: f64, beta1: f64, beta_m1: f64) -> Result<SymMat3> {
    let d = det(b.as_mat());
    if (d - 1.0).abs() > INCOMPRESSIBLE_DET_TOL {
        return Err(Error::Constraint(format!("incompressibility requires det B = 1, got {d}")));
    }
    stress_from_betas(b, &BetaCoeffs { beta0: -pressure, beta1, beta_m1 })
}

/// First Piola-Kirchhoff stress `∂W/∂F`:
///
/// ```text
/// S₁ = μ J^(-2/3) (F − I1/3 F⁻ᵀ) + μ̃ (I1 − 3) F + κ (J − 1) J F⁻ᵀ
/// ```
///
/// with `J = det F` and `I1 = ‖F‖²`.
pub fn piola_kirchhoff(f: &Mat3, p: &MaterialParams) -> Result<Mat3> {
    let j = check_orientation(f)?;
    let i1 = f.norm_squared();
    // F⁻ᵀ = Cof F / J
    let f_inv_t = tensor::cofactor(f) / j;
    Ok((f - f_inv_t * (i1 / 3.0)) * (p.mu * j.powf(-2.0 / 3.0))
        + f * (p.mu_tilde * (i1 - 3.0))
        + f_inv_t * (p.kappa * (j - 1.0) * j))
}

/// Linear isotropic law `σ = 2μ dev ε + κ tr(ε) I`.
pub fn linear_stress(eps: &SymMat3, mu: f64, kappa: f64) -> SymMat3 {
    eps.deviator().scale(2.0 * mu).add(&SymMat3::identity().scale(kappa * eps.trace()))
}

/// Inverse of [`linear_stress`]: `ε = dev σ / 2μ + tr σ / 9κ I`.
pub fn linear_inverse(sigma: &SymMat3, mu: f64, kappa: f64) -> Result<SymMat3> {
    if !(mu > 0.0 && kappa > 0.0) {
        return Err(Error::Argument(format!(
            "linear law is invertible only for mu > 0 and kappa > 0 (mu = {mu}, kappa = {kappa})"
        )));
    }
    Ok(sigma.deviator().scale(0.5 / mu).add(&SymMat3::identity().scale(sigma.trace() / (9.0 * kappa))))
}

/// Displacement `u(X) = (ε̄ + Ā) X + b̄` under the constant stress `σ̄`, with `Ā` skew.
pub fn linear_displacement(sigma_bar: &SymMat3, a_bar: &Mat3, b_bar: &Vec3, mu: f64, kappa: f64) -> Result<AffineMap> {
    if (a_bar + a_bar.transpose()).norm() > 1e-12 {
        return Err(Error::Argument("infinitesimal rotation must be skew-symmetric".into()));
    }
    let eps = linear_inverse(sigma_bar, mu, kappa)?;
    Ok(AffineMap { a: eps.as_mat() + a_bar, b: *b_bar })
}

/// Homogeneous deformation `φ(X) = (V̄ R̄) X + b̄` with `V̄ = √B̄`, returned as a displacement map.
pub fn homogeneous_deformation_from_stress(b_bar: &SymMat3, r_bar: &Mat3, b_trans: &Vec3) -> Result<AffineMap> {
    if !is_rotation(r_bar, 1e-10) {
        return Err(Error::Argument("R̄ must be a proper rotation".into()));
    }
    let v = spd_sqrt(b_bar)?;
    Ok(AffineMap::from_deformation(&(v.as_mat() * r_bar), b_trans))
}
