use super::{DiffusionSpec, LgProcess, LrModel};
use crate::error::Result;
use crate::numerics::{Matrix, Vector};

fn lift(x: &Vector, first: f64) -> Vector {
    let mut out = Vector::zeros(x.len() + 1);
    out[0] = first;
    out.rows_mut(1, x.len()).copy_from(x);
    out
}

fn lifted_beta(model: &LrModel) -> Matrix {
    let m = model.dim();
    let mut beta = Matrix::zeros(m + 1, m + 1);
    beta.view_mut((1, 0), (m, 1)).copy_from(&model.b);
    beta.view_mut((1, 1), (m, m)).copy_from(&model.beta);
    beta
}

fn lifted_diffusion(d: &DiffusionSpec) -> DiffusionSpec {
    DiffusionSpec::new(
        d.loadings.iter().map(|l| lift(l, 0.0)).collect(),
        d.vol_offsets.clone(),
        d.vol_slopes.iter().map(|c| lift(c, 0.0)).collect(),
    )
}

/// `(m+1)`-dimensional LG process with state `(1; Z)`, drift matrix
/// `[[0, 0], [b, β]]` and `ψ′ = (φ; ψ)`.
pub fn embed_lr_to_lg(model: &LrModel) -> Result<LgProcess> {
    let lifted = LrModel {
        b: Vector::zeros(model.dim() + 1),
        beta: lifted_beta(model),
        alpha: model.alpha,
        phi: 0.0,
        psi: lift(&model.psi, model.phi),
        z0: lift(&model.z0, 1.0),
        diffusion: lifted_diffusion(&model.diffusion),
        state_space: model.state_space,
        diffusion_time_exponent: model.diffusion_time_exponent,
    };
    LgProcess::new(lifted)
}

/// LG process with state `e^{(α−α′)t}(1; Z)` and drift matrix
/// `(α−α′)I + [[0, 0], [b, β]]`.
///
/// The density of the result is `e^{−(2α−α′)t} ψ′ᵀZ′`, which equals the source
/// density `e^{−αt}(φ + ψᵀZ)` along every path. The diffusion time scale grows by
/// `α − α′`.
pub fn embed_lr_to_lg_tilted(model: &LrModel, alpha_prime: f64) -> Result<LgProcess> {
    let tilt = model.alpha - alpha_prime;
    let mut lg = embed_lr_to_lg(model)?.into_model();
    if tilt != 0.0 {
        for i in 0..lg.dim() {
            lg.beta[(i, i)] += tilt;
        }
        lg.alpha = 2.0 * model.alpha - alpha_prime;
        lg.diffusion_time_exponent += tilt;
    }
    LgProcess::new(lg)
}
