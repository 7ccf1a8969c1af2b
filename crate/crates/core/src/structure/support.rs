use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{expm, range_basis, Matrix, Vector};
use crate::simulation::TrajectoryBatch;

const MAX_SAMPLES: usize = 4096;

/// Numerical rank and spanning basis of a sampled support.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportEstimate {
    pub rank: usize,
    #[serde(serialize_with = "crate::serde_util::vectors")]
    pub basis: Vec<Vector>,
}

fn sample_indices(batch: &TrajectoryBatch) -> Vec<(usize, usize)> {
    let total = batch.num_paths * batch.time_grid.len();
    let stride = total.div_ceil(MAX_SAMPLES).max(1);
    (0..total)
        .step_by(stride)
        .map(|i| (i / batch.time_grid.len(), i % batch.time_grid.len()))
        .collect()
}

fn estimate(batch: &TrajectoryBatch, beta: Option<&Matrix>, affine: bool, tol: f64) -> Result<SupportEstimate> {
    if batch.num_paths == 0 || batch.time_grid.is_empty() {
        return Err(Error::Argument("empty trajectory batch".into()));
    }
    let m = batch.dim;
    if let Some(b) = beta {
        if b.nrows() != m || b.ncols() != m {
            return Err(Error::Dimension("beta does not match the batch dimension".into()));
        }
    }
    let weights = match beta {
        Some(b) => batch
            .time_grid
            .iter()
            .map(|&t| expm(b, -t))
            .collect::<Result<Vec<_>>>()?,
        None => Vec::new(),
    };
    let sample = |p: usize, k: usize| -> Vector {
        let z = batch.state(p, k);
        match beta {
            Some(_) => &weights[k] * z,
            None => z,
        }
    };
    let origin = sample(0, 0);
    let cols: Vec<Vector> = sample_indices(batch)
        .into_iter()
        .map(|(p, k)| {
            let z = sample(p, k);
            if affine {
                z - &origin
            } else {
                z
            }
        })
        .collect();
    let basis = range_basis(&Matrix::from_columns(&cols), tol)?;
    Ok(SupportEstimate {
        rank: basis.len(),
        basis,
    })
}

/// Rank of the stacked sampled states, optionally weighted by `e^{−βt}`.
/// Large batches are thinned to at most 4096 samples by a fixed stride.
pub fn estimate_linear_support(
    batch: &TrajectoryBatch,
    discount_by: Option<&Matrix>,
    tol: f64,
) -> Result<SupportEstimate> {
    estimate(batch, discount_by, false, tol)
}

/// As [`estimate_linear_support`] with the first sample subtracted.
pub fn estimate_affine_support(batch: &TrajectoryBatch, tol: f64) -> Result<SupportEstimate> {
    estimate(batch, None, true, tol)
}
