//! Reference models used by the scenario registry, the tests and the demo.

use super::{DiffusionSpec, LrModel, StateSpace};
use crate::numerics::{Matrix, Vector};

fn v(x: &[f64]) -> Vector {
    Vector::from_row_slice(x)
}

/// `dZ = (1 − Z/2)dt + √Z dW`, `ζ = e^{−0.05t}(1 + Z)`, `Z₀ = 1`.
pub fn sqrt_diffusion() -> LrModel {
    LrModel::new(
        v(&[1.0]),
        Matrix::from_element(1, 1, -0.5),
        0.05,
        1.0,
        v(&[1.0]),
        v(&[1.0]),
        DiffusionSpec::new(vec![v(&[1.0])], vec![0.0], vec![v(&[1.0])]),
        StateSpace::NonnegOrthant,
    )
    .expect("valid model")
}

/// LG process `dZ₁ = Z₂dt`, `dZ₂ = cZ₂dt + √Z₂ dW`, `ζ = e^{−αt}(Z₁ + Z₂)`,
/// `Z₀ = (1, 1)`. Zero is absorbing for `Z₂`.
pub fn nonreducible_lg(c: f64, alpha: f64) -> LrModel {
    LrModel::new(
        Vector::zeros(2),
        Matrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, c]),
        alpha,
        0.0,
        v(&[1.0, 1.0]),
        v(&[1.0, 1.0]),
        DiffusionSpec::new(vec![v(&[0.0, 1.0])], vec![0.0], vec![v(&[0.0, 1.0])]),
        StateSpace::NonnegOrthant,
    )
    .expect("valid model")
}

/// Deterministic rotation plus decay, `Z₀ = (1, 1, 1)`, `φ = 1`,
/// `ψ = (½, ½, 1)`, so that `ζ_t = e^{−αt}(1 + cos(ωt) + e^{−κt})`.
pub fn oscillatory(omega: f64, kappa: f64, alpha: f64) -> LrModel {
    LrModel::deterministic(
        Vector::zeros(3),
        Matrix::from_row_slice(3, 3, &[0.0, omega, 0.0, -omega, 0.0, 0.0, 0.0, 0.0, -kappa]),
        alpha,
        1.0,
        v(&[0.5, 0.5, 1.0]),
        v(&[1.0, 1.0, 1.0]),
    )
    .expect("valid model")
}

/// `dZ = (b + βZ)dt`, `ζ = e^{−αt}(φ + ψZ)`.
pub fn deterministic_scalar(b: f64, beta: f64, alpha: f64, phi: f64, psi: f64, z0: f64) -> LrModel {
    LrModel::deterministic(
        v(&[b]),
        Matrix::from_element(1, 1, beta),
        alpha,
        phi,
        v(&[psi]),
        v(&[z0]),
    )
    .expect("valid model")
}
