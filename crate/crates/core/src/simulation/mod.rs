//! Monte Carlo paths of the factor process and the diagnostics built on them.

mod diagnostics;

pub use diagnostics::{
    check_lg_martingale, density_logarithm, mean_se, forward_density, long_bond, long_forward_diagnostic,
    spd_path, LongBond, LongForwardDiagnostic, LongForwardVerdict, MartingaleDiagnostic,
    PathValues,
};

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{LrModel, StateSpace};
use crate::numerics::expm::augment;
use crate::numerics::{expm, Vector};
use crate::pricing::format_real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    ExactDeterministic,
    FullTruncationEuler,
}

/// Simulated factor paths observed on a common time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryBatch {
    pub num_paths: usize,
    pub dim: usize,
    pub time_grid: Vec<f64>,
    /// Path-major: state `k` of path `p` starts at `(p·len(grid) + k)·dim`.
    pub states: Vec<f64>,
    pub seed: u64,
    pub scheme: Scheme,
}

impl TrajectoryBatch {
    pub fn num_times(&self) -> usize {
        self.time_grid.len()
    }

    pub fn state_slice(&self, path: usize, k: usize) -> &[f64] {
        let start = (path * self.num_times() + k) * self.dim;
        &self.states[start..start + self.dim]
    }

    pub fn state(&self, path: usize, k: usize) -> Vector {
        Vector::from_column_slice(self.state_slice(path, k))
    }

    /// Batch of `(1; Z)`, the state of the LG embedding.
    pub fn embedded(&self) -> TrajectoryBatch {
        let dim = self.dim + 1;
        let mut states = Vec::with_capacity(self.states.len() / self.dim.max(1) * dim);
        for z in self.states.chunks(self.dim.max(1)) {
            states.push(1.0);
            states.extend_from_slice(&z[..self.dim]);
        }
        TrajectoryBatch {
            num_paths: self.num_paths,
            dim,
            time_grid: self.time_grid.clone(),
            states,
            seed: self.seed,
            scheme: self.scheme,
        }
    }

    /// CSV with header `path,t,z_1,...,z_m,zeta`.
    pub fn to_csv(&self, model: &LrModel) -> Result<String> {
        if model.dim() != self.dim {
            return Err(Error::Dimension("model does not match the batch".into()));
        }
        let mut out = String::from("path,t");
        for i in 1..=self.dim {
            out.push_str(&format!(",z_{i}"));
        }
        out.push_str(",zeta\n");
        for p in 0..self.num_paths {
            for (k, &t) in self.time_grid.iter().enumerate() {
                let z = self.state_slice(p, k);
                out.push_str(&p.to_string());
                out.push(',');
                out.push_str(&format_real(t));
                for x in z {
                    out.push(',');
                    out.push_str(&format_real(*x));
                }
                out.push(',');
                out.push_str(&format_real(model.spd(t, &Vector::from_column_slice(z))));
                out.push('\n');
            }
        }
        Ok(out)
    }
}

/// Grid `0, dt, 2dt, …` up to `horizon`, with the last point exactly `horizon`.
pub fn uniform_grid(horizon: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0) || !(horizon >= 0.0) || !horizon.is_finite() {
        return Err(Error::Argument(format!("invalid grid: horizon {horizon}, dt {dt}")));
    }
    let n = (horizon / dt - 1e-9).ceil().max(0.0) as usize;
    Ok((0..=n).map(|k| if k == n { horizon } else { k as f64 * dt }).collect())
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.first() != Some(&0.0) {
        return Err(Error::Argument("time grid must start at 0".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::Argument("time grid must be finite and increasing".into()));
    }
    Ok(())
}

/// Simulates `num_paths` paths observed on `time_grid`, one Euler step per grid
/// interval. See [`simulate_with_step`].
pub fn simulate(
    model: &LrModel,
    num_paths: usize,
    time_grid: &[f64],
    seed: u64,
) -> Result<TrajectoryBatch> {
    simulate_with_step(model, num_paths, time_grid, seed, f64::INFINITY)
}

/// Simulates the factor process.
///
/// Deterministic models are propagated exactly with the matrix exponential.
/// Otherwise each grid interval is split into equal substeps no longer than
/// `max_step` and advanced by full-truncation Euler: the drift uses the raw state,
/// each volatility uses `√max(a_j + c_jᵀZ/s, 0)` with `s = e^{γt}`. On the
/// orthant a coordinate that reaches zero with no noise and no inward drift is
/// held at zero.
///
/// Path `p` draws its normals from ChaCha8 seeded with `seed` on stream `p`, so
/// the batch does not depend on thread count or scheduling.
pub fn simulate_with_step(
    model: &LrModel,
    num_paths: usize,
    time_grid: &[f64],
    seed: u64,
    max_step: f64,
) -> Result<TrajectoryBatch> {
    check_grid(time_grid)?;
    if num_paths == 0 {
        return Err(Error::Argument("num_paths must be at least 1".into()));
    }
    if !(max_step > 0.0) {
        return Err(Error::Argument(format!("max_step must be positive, got {max_step}")));
    }
    let m = model.dim();
    let len = time_grid.len() * m;
    let mut states = vec![0.0; num_paths * len];

    if model.is_deterministic() {
        let aug = augment(&model.beta, &model.b);
        let mut lifted = Vector::zeros(m + 1);
        lifted.rows_mut(0, m).copy_from(&model.z0);
        lifted[m] = 1.0;
        let mut path = Vec::with_capacity(len);
        for &t in time_grid {
            let z = expm(&aug, t)? * &lifted;
            path.extend(z.rows(0, m).iter());
        }
        for chunk in states.chunks_mut(len) {
            chunk.copy_from_slice(&path);
        }
        return Ok(TrajectoryBatch {
            num_paths,
            dim: m,
            time_grid: time_grid.to_vec(),
            states,
            seed,
            scheme: Scheme::ExactDeterministic,
        });
    }

    let stepper = Euler::new(model, time_grid, max_step);
    let run = |(p, chunk): (usize, &mut [f64])| stepper.path(seed, p as u64, chunk);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        states.par_chunks_mut(len).enumerate().for_each(run);
    }
    #[cfg(not(feature = "parallel"))]
    states.chunks_mut(len).enumerate().for_each(run);

    if states.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("simulated states"));
    }
    Ok(TrajectoryBatch {
        num_paths,
        dim: m,
        time_grid: time_grid.to_vec(),
        states,
        seed,
        scheme: Scheme::FullTruncationEuler,
    })
}

/// Flat copies of the model data for the inner loop.
struct Euler<'a> {
    m: usize,
    b: Vec<f64>,
    beta: Vec<f64>,
    loadings: Vec<Vec<f64>>,
    offsets: Vec<f64>,
    slopes: Vec<Vec<f64>>,
    gamma: f64,
    orthant: bool,
    z0: Vec<f64>,
    grid: &'a [f64],
    substeps: Vec<usize>,
}

impl<'a> Euler<'a> {
    fn new(model: &LrModel, grid: &'a [f64], max_step: f64) -> Self {
        let m = model.dim();
        let d = &model.diffusion;
        let substeps = grid
            .windows(2)
            .map(|w| ((w[1] - w[0]) / max_step - 1e-9).ceil().max(1.0) as usize)
            .collect();
        Self {
            m,
            b: model.b.iter().copied().collect(),
            beta: (0..m * m).map(|i| model.beta[(i / m, i % m)]).collect(),
            loadings: d.loadings.iter().map(|v| v.iter().copied().collect()).collect(),
            offsets: d.vol_offsets.clone(),
            slopes: d.vol_slopes.iter().map(|v| v.iter().copied().collect()).collect(),
            gamma: model.diffusion_time_exponent,
            orthant: model.state_space == StateSpace::NonnegOrthant,
            z0: model.z0.iter().copied().collect(),
            grid,
            substeps,
        }
    }

    fn drift_i(&self, z: &[f64], i: usize) -> f64 {
        let row = &self.beta[i * self.m..(i + 1) * self.m];
        self.b[i] + row.iter().zip(z).map(|(a, x)| a * x).sum::<f64>()
    }

    fn variance(&self, j: usize, z: &[f64], scale: f64) -> f64 {
        let c: f64 = self.slopes[j].iter().zip(z).map(|(a, x)| a * x).sum();
        (self.offsets[j] + c / scale).max(0.0)
    }

    fn path(&self, seed: u64, p: u64, out: &mut [f64]) {
        let m = self.m;
        let nd = self.loadings.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(p);
        let mut z = self.z0.clone();
        let mut next = vec![0.0; m];
        let mut shocks = vec![0.0; nd];
        out[..m].copy_from_slice(&z);
        for (k, w) in self.grid.windows(2).enumerate() {
            let n = self.substeps[k];
            let h = (w[1] - w[0]) / n as f64;
            let sqrt_h = h.sqrt();
            for s in 0..n {
                let t = w[0] + s as f64 * h;
                let scale = (self.gamma * t).exp();
                for j in 0..nd {
                    let xi: f64 = StandardNormal.sample(&mut rng);
                    shocks[j] = scale * self.variance(j, &z, scale).sqrt() * sqrt_h * xi;
                }
                for i in 0..m {
                    let noise: f64 = (0..nd).map(|j| self.loadings[j][i] * shocks[j]).sum();
                    next[i] = z[i] + self.drift_i(&z, i) * h + noise;
                }
                if self.orthant {
                    let t_next = t + h;
                    for i in 0..m {
                        if next[i] <= 0.0 && self.absorbing(&next, i, t_next) {
                            next[i] = 0.0;
                        }
                    }
                }
                std::mem::swap(&mut z, &mut next);
            }
            out[(k + 1) * m..(k + 2) * m].copy_from_slice(&z);
        }
    }

    /// Coordinate `i` at zero has no noise and no inward drift.
    fn absorbing(&self, z: &[f64], i: usize, t: f64) -> bool {
        let mut at_zero = z.to_vec();
        at_zero[i] = 0.0;
        if self.drift_i(&at_zero, i) > 0.0 {
            return false;
        }
        let scale = (self.gamma * t).exp();
        (0..self.loadings.len())
            .all(|j| self.loadings[j][i] == 0.0 || self.variance(j, &at_zero, scale) == 0.0)
    }
}
