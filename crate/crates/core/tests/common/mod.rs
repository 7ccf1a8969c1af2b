#![allow(dead_code)]

use lrlab::models::LrModel;
use lrlab::numerics::{Matrix, Vector};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rand_distr::{Distribution, StandardNormal};

pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lo + (hi - lo) * u
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.0)
    }

    pub fn index(&mut self, n: usize) -> usize {
        (self.0.next_u64() % n as u64) as usize
    }

    pub fn matrix(&mut self, r: usize, c: usize) -> Matrix {
        Matrix::from_fn(r, c, |_, _| self.normal())
    }

    pub fn vector(&mut self, n: usize) -> Vector {
        Vector::from_fn(n, |_, _| self.normal())
    }

    /// Orthogonal factor of a Gaussian matrix.
    pub fn orthogonal(&mut self, n: usize) -> Matrix {
        self.matrix(n, n).qr().q()
    }
}

/// Deterministic model with `φ + ψᵀz₀ > 0`.
pub fn deterministic(b: Vector, beta: Matrix, alpha: f64, phi: f64, psi: Vector, z0: Vector) -> LrModel {
    LrModel::deterministic(b, beta, alpha, phi, psi, z0).expect("valid model")
}

/// Sample mean and standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    lrlab::simulation::mean_se(xs)
}
