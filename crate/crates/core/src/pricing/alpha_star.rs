use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{LrModel, StateSpace};

/// Which term of the max attains α*.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaStarTerm {
    /// `ψᵀb/φ`
    Intercept,
    /// `ψᵀβ_i/ψ_i` for column `i`
    Column(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaStarReport {
    pub finite: bool,
    pub alpha_star: Option<f64>,
    pub binding_index: Option<AlphaStarTerm>,
    pub condition_holds: bool,
}

/// `α* = sup_{z ≥ 0} ψᵀ(b + βz)/(φ + ψᵀz)` on the nonnegative orthant.
///
/// With `I = {i : ψ_i > 0}`, the condition `ψᵀβ_i ≤ 0` for all `i ∉ I` makes α*
/// finite and equal to `max{ψᵀb/φ, ψᵀβ_i/ψ_i : i ∈ I}`. The condition is only
/// sufficient, so the report abstains when it fails.
pub fn alpha_star(model: &LrModel) -> Result<AlphaStarReport> {
    if model.state_space != StateSpace::NonnegOrthant {
        return Err(Error::Unsupported(
            "alpha* is defined for the nonnegative orthant only".into(),
        ));
    }
    if !(model.phi > 0.0) || model.psi.iter().any(|&x| x < 0.0) {
        return Err(Error::Unsupported(
            "alpha* needs phi > 0 and psi in the nonnegative orthant".into(),
        ));
    }
    let m = model.dim();
    let col = |i: usize| model.psi.dot(&model.beta.column(i));
    let condition_holds = (0..m).all(|i| model.psi[i] > 0.0 || col(i) <= 0.0);
    if !condition_holds {
        return Ok(AlphaStarReport {
            finite: false,
            alpha_star: None,
            binding_index: None,
            condition_holds,
        });
    }
    let mut best = model.psi.dot(&model.b) / model.phi;
    let mut term = AlphaStarTerm::Intercept;
    for i in (0..m).filter(|&i| model.psi[i] > 0.0) {
        let v = col(i) / model.psi[i];
        if v > best {
            best = v;
            term = AlphaStarTerm::Column(i);
        }
    }
    Ok(AlphaStarReport {
        finite: true,
        alpha_star: Some(best),
        binding_index: Some(term),
        condition_holds,
    })
}
