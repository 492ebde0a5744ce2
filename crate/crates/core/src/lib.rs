//! Homogeneous Cauchy stress carried by non-homogeneous, rank-one connected
//! deformations of an isotropic hyperelastic material that is not rank-one
//! convex.
//!
//! * [`tensor`]: 3×3 algebra (invariants, SPD square root, rank-one factorisation).
//! * [`constitutive`]: the model energy, its stresses, and linear elasticity.
//! * [`phase`]: the two-phase pair, the roots of `β₁`, and the convexity probe.
//! * [`mesh`]: the tetrahedral cuboid partition and the piecewise-affine laminate.
//! * [`cli`]: configuration, reports and the command-line driver.

// `!(x > 0.0)` is used on purpose so that NaN is rejected alongside non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod constitutive;
pub mod error;
pub mod mesh;
pub mod phase;
pub mod tensor;

pub use error::{Error, Result};
