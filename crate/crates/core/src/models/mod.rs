//! Model definitions: linear-rational (LR) models, linearity-generating (LG)
//! processes, their JSON form, validation, embeddings and the κ-block algebra.

mod document;
pub mod examples;
mod embed;
mod kappa;
mod validate;

pub use document::ModelDocument;
pub use embed::{embed_lr_to_lg, embed_lr_to_lg_tilted};
pub use kappa::{lg_kappa_blocks, q_drift_coefficients, KappaBlocks, QDrift};
pub use validate::{validate, Finding, Level, ValidationReport};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Vector};

/// Declared state space of the factor process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateSpace {
    NonnegOrthant,
    WholeSpace,
    CustomHalfspace,
}

/// Martingale part `dM_t = Σ_j s(t) Λ_j √max(a_j + c_jᵀZ_t/s(t), 0) dW_j`, where
/// `s(t) = e^{γt}` is the diffusion time scale of the owning model (1 unless the
/// model comes from a tilted embedding).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiffusionSpec {
    pub loadings: Vec<Vector>,
    pub vol_offsets: Vec<f64>,
    pub vol_slopes: Vec<Vector>,
}

impl DiffusionSpec {
    pub fn deterministic() -> Self {
        Self::default()
    }

    pub fn new(loadings: Vec<Vector>, vol_offsets: Vec<f64>, vol_slopes: Vec<Vector>) -> Self {
        Self {
            loadings,
            vol_offsets,
            vol_slopes,
        }
    }

    pub fn num_drivers(&self) -> usize {
        self.loadings.len()
    }

    pub fn is_deterministic(&self) -> bool {
        self.loadings.is_empty()
    }

    /// Variance argument `a_j + c_jᵀz` of driver `j`, before clipping.
    pub fn variance_argument(&self, j: usize, z: &Vector) -> f64 {
        self.vol_offsets[j] + self.vol_slopes[j].dot(z)
    }

    fn check(&self, m: usize) -> Result<()> {
        let d = self.loadings.len();
        if self.vol_offsets.len() != d || self.vol_slopes.len() != d {
            return Err(Error::Dimension(format!(
                "diffusion has {d} loadings, {} offsets and {} slopes",
                self.vol_offsets.len(),
                self.vol_slopes.len()
            )));
        }
        for j in 0..d {
            if self.loadings[j].len() != m || self.vol_slopes[j].len() != m {
                return Err(Error::Dimension(format!(
                    "diffusion driver {j} does not have length {m}"
                )));
            }
            if !self.vol_offsets[j].is_finite()
                || self.loadings[j].iter().chain(self.vol_slopes[j].iter()).any(|x| !x.is_finite())
            {
                return Err(Error::NonFinite("diffusion"));
            }
        }
        Ok(())
    }
}

/// `dZ = (b + βZ)dt + dM`, `ζ_t = e^{−αt}(φ + ψᵀZ_t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LrModel {
    pub b: Vector,
    pub beta: Matrix,
    pub alpha: f64,
    pub phi: f64,
    pub psi: Vector,
    pub z0: Vector,
    pub diffusion: DiffusionSpec,
    pub state_space: StateSpace,
    /// γ in the diffusion time scale `e^{γt}`.
    pub diffusion_time_exponent: f64,
}

impl LrModel {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        b: Vector,
        beta: Matrix,
        alpha: f64,
        phi: f64,
        psi: Vector,
        z0: Vector,
        diffusion: DiffusionSpec,
        state_space: StateSpace,
    ) -> Result<Self> {
        let model = Self {
            b,
            beta,
            alpha,
            phi,
            psi,
            z0,
            diffusion,
            state_space,
            diffusion_time_exponent: 0.0,
        };
        model.check()?;
        Ok(model)
    }

    /// Deterministic model on the whole space.
    pub fn deterministic(
        b: Vector,
        beta: Matrix,
        alpha: f64,
        phi: f64,
        psi: Vector,
        z0: Vector,
    ) -> Result<Self> {
        Self::new(
            b,
            beta,
            alpha,
            phi,
            psi,
            z0,
            DiffusionSpec::deterministic(),
            StateSpace::WholeSpace,
        )
    }

    pub fn with_time_exponent(mut self, gamma: f64) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(Error::NonFinite("diffusion time exponent"));
        }
        self.diffusion_time_exponent = gamma;
        Ok(self)
    }

    /// Structural checks: dimensions agree and every entry is finite.
    pub fn check(&self) -> Result<()> {
        let m = self.b.len();
        if m == 0 {
            return Err(Error::Dimension("model dimension must be at least 1".into()));
        }
        if self.beta.shape() != (m, m) {
            return Err(Error::Dimension(format!(
                "beta is {}x{}, expected {m}x{m}",
                self.beta.nrows(),
                self.beta.ncols()
            )));
        }
        if self.psi.len() != m || self.z0.len() != m {
            return Err(Error::Dimension(format!(
                "psi has length {}, z0 has length {}, expected {m}",
                self.psi.len(),
                self.z0.len()
            )));
        }
        let finite = self
            .b
            .iter()
            .chain(self.beta.iter())
            .chain(self.psi.iter())
            .chain(self.z0.iter())
            .all(|x| x.is_finite())
            && self.alpha.is_finite()
            && self.phi.is_finite()
            && self.diffusion_time_exponent.is_finite();
        if !finite {
            return Err(Error::NonFinite("model parameters"));
        }
        self.diffusion.check(m)
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn is_deterministic(&self) -> bool {
        self.diffusion.is_deterministic()
    }

    /// `b = 0` and `φ = 0` exactly.
    pub fn is_lg(&self) -> bool {
        self.phi == 0.0 && self.b.iter().all(|&x| x == 0.0)
    }

    /// `φ + ψᵀz`.
    pub fn density_numerator(&self, z: &Vector) -> f64 {
        self.phi + self.psi.dot(z)
    }

    /// `ζ_t = e^{−αt}(φ + ψᵀz)`.
    pub fn spd(&self, t: f64, z: &Vector) -> f64 {
        (-self.alpha * t).exp() * self.density_numerator(z)
    }

    pub fn zeta0(&self) -> f64 {
        self.density_numerator(&self.z0)
    }

    pub fn drift(&self, z: &Vector) -> Vector {
        &self.b + &self.beta * z
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        doc.into_model()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ModelDocument::from_model(self))
            .expect("model document serializes")
    }
}

/// An LR model with `b = 0` and `φ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LgProcess(LrModel);

impl LgProcess {
    pub fn new(model: LrModel) -> Result<Self> {
        model.check()?;
        if !model.is_lg() {
            return Err(Error::Argument(
                "an LG process needs b = 0 and phi = 0 exactly".into(),
            ));
        }
        let z = model.zeta0();
        if z <= 0.0 {
            return Err(Error::InvalidState(z));
        }
        Ok(Self(model))
    }

    pub fn model(&self) -> &LrModel {
        &self.0
    }

    pub fn into_model(self) -> LrModel {
        self.0
    }
}

impl std::ops::Deref for LgProcess {
    type Target = LrModel;

    fn deref(&self) -> &LrModel {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    #[test]
    fn rejects_ragged_dimensions() {
        let r = LrModel::deterministic(
            v(&[0.0, 0.0]),
            Matrix::zeros(2, 2),
            0.0,
            1.0,
            v(&[1.0]),
            v(&[1.0, 1.0]),
        );
        assert!(matches!(r, Err(Error::Dimension(_))));
    }

    #[test]
    fn lg_requires_zero_intercepts() {
        let m = LrModel::deterministic(v(&[0.0]), Matrix::zeros(1, 1), 0.0, 1.0, v(&[1.0]), v(&[1.0]))
            .unwrap();
        assert!(LgProcess::new(m).is_err());
        let m = LrModel::deterministic(v(&[0.0]), Matrix::zeros(1, 1), 0.0, 0.0, v(&[1.0]), v(&[1.0]))
            .unwrap();
        assert!(LgProcess::new(m).is_ok());
    }
}
