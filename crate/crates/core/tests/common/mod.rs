//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use homstress::constitutive::MaterialParams;
use homstress::tensor::{Mat3, SymMat3, Vec3};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

pub fn material() -> MaterialParams {
    MaterialParams::new(1.0, 3.0, 1.0).unwrap()
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// `I + P` with entries of `P` in `[-spread, spread]`, resampled until `det ≥ 0.2`.
pub fn random_gradient(rng: &mut StdRng, spread: f64) -> Mat3 {
    loop {
        let f = Mat3::identity() + Mat3::from_fn(|_, _| rng.random_range(-spread..=spread));
        if f.determinant() >= 0.2 {
            return f;
        }
    }
}

pub fn random_vec(rng: &mut StdRng, lo: f64, hi: f64) -> Vec3 {
    Vec3::from_fn(|_, _| rng.random_range(lo..=hi))
}

/// Rotation from a normalised quaternion.
pub fn random_rotation(rng: &mut StdRng) -> Mat3 {
    let q = nalgebra::Vector4::from_fn(|_, _| rng.random_range(-1.0..=1.0_f64)).normalize();
    let (w, x, y, z) = (q[0], q[1], q[2], q[3]);
    Mat3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        1.0 - 2.0 * (x * x + y * y),
    )
}

/// Central differences of a scalar function of a matrix, entry by entry.
pub fn fd_gradient(w: impl Fn(&Mat3) -> f64, f: &Mat3, h: f64) -> Mat3 {
    Mat3::from_fn(|i, j| {
        let mut fp = *f;
        let mut fm = *f;
        fp[(i, j)] += h;
        fm[(i, j)] -= h;
        (w(&fp) - w(&fm)) / (2.0 * h)
    })
}

/// Coefficients of the characteristic polynomial from the eigenvalues.
pub fn invariants_from_eigenvalues(l: [f64; 3]) -> [f64; 3] {
    [l[0] + l[1] + l[2], l[0] * l[1] + l[1] * l[2] + l[0] * l[2], l[0] * l[1] * l[2]]
}

/// Denman–Beavers iteration for the principal square root.
pub fn sqrt_denman_beavers(b: &Mat3) -> Mat3 {
    let mut y = *b;
    let mut z = Mat3::identity();
    for _ in 0..100 {
        let y_next = 0.5 * (y + z.try_inverse().unwrap());
        let z_next = 0.5 * (z + y.try_inverse().unwrap());
        let done = (y_next - y).norm() <= 1e-15 * y.norm();
        y = y_next;
        z = z_next;
        if done {
            break;
        }
    }
    y
}

/// Phase pair written out entry by entry.
pub fn phase_pair(k: f64, s: f64, a: f64) -> (Mat3, Mat3) {
    let f = Mat3::new(k, s * a, 0.0, 0.0, a, 0.0, 0.0, 0.0, 1.0 / a);
    let f_hat = Mat3::new(k, -s * a, 0.0, 0.0, a, 0.0, 0.0, 0.0, 1.0 / a);
    (f, f_hat)
}

/// `β₁` of the phase pair, from the closed form in `k`.
pub fn beta1_oracle(k: f64, s: f64, a: f64, p: &MaterialParams) -> f64 {
    let c = s * s * a * a + a * a + 1.0 / (a * a);
    p.mu * k.powf(-5.0 / 3.0) + p.mu_tilde / k * (k * k + c - 3.0)
}

pub fn sym_max_abs_diff(x: &SymMat3, y: &SymMat3) -> f64 {
    (x.as_mat() - y.as_mat()).amax()
}
