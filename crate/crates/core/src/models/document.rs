use serde::{Deserialize, Serialize};

use super::{DiffusionSpec, LrModel, StateSpace};
use crate::error::{Error, Result};
use crate::numerics::{matrix_from_rows, Matrix, Vector};

/// JSON form of a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub dim: usize,
    pub b: Vec<f64>,
    pub beta: BetaDocument,
    pub alpha: f64,
    pub phi: f64,
    pub psi: Vec<f64>,
    pub z0: Vec<f64>,
    #[serde(default)]
    pub diffusion: DiffusionDocument,
    pub state_space: StateSpace,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub diffusion_time_exponent: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

/// `beta` as nested rows, or flat in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaDocument {
    Rows(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffusionDocument {
    #[serde(default)]
    pub loadings: Vec<Vec<f64>>,
    #[serde(default)]
    pub vol_offsets: Vec<f64>,
    #[serde(default)]
    pub vol_slopes: Vec<Vec<f64>>,
}

impl ModelDocument {
    pub fn from_model(model: &LrModel) -> Self {
        let rows = (0..model.dim())
            .map(|i| model.beta.row(i).iter().copied().collect())
            .collect();
        let d = &model.diffusion;
        Self {
            dim: model.dim(),
            b: model.b.iter().copied().collect(),
            beta: BetaDocument::Rows(rows),
            alpha: model.alpha,
            phi: model.phi,
            psi: model.psi.iter().copied().collect(),
            z0: model.z0.iter().copied().collect(),
            diffusion: DiffusionDocument {
                loadings: d.loadings.iter().map(|l| l.iter().copied().collect()).collect(),
                vol_offsets: d.vol_offsets.clone(),
                vol_slopes: d.vol_slopes.iter().map(|l| l.iter().copied().collect()).collect(),
            },
            state_space: model.state_space,
            diffusion_time_exponent: model.diffusion_time_exponent,
        }
    }

    pub fn into_model(self) -> Result<LrModel> {
        let m = self.dim;
        let beta = match self.beta {
            BetaDocument::Rows(rows) => matrix_from_rows(&rows)?,
            BetaDocument::Flat(flat) => {
                if flat.len() != m * m {
                    return Err(Error::Dimension(format!(
                        "flat beta has {} entries, expected {}",
                        flat.len(),
                        m * m
                    )));
                }
                Matrix::from_row_slice(m, m, &flat)
            }
        };
        if self.b.len() != m {
            return Err(Error::Dimension(format!(
                "dim is {m} but b has length {}",
                self.b.len()
            )));
        }
        let vecs = |xs: Vec<Vec<f64>>| xs.into_iter().map(Vector::from_vec).collect();
        let diffusion = DiffusionSpec::new(
            vecs(self.diffusion.loadings),
            self.diffusion.vol_offsets,
            vecs(self.diffusion.vol_slopes),
        );
        LrModel::new(
            Vector::from_vec(self.b),
            beta,
            self.alpha,
            self.phi,
            Vector::from_vec(self.psi),
            Vector::from_vec(self.z0),
            diffusion,
            self.state_space,
        )?
        .with_time_exponent(self.diffusion_time_exponent)
    }
}
