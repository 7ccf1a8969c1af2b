use serde::Serialize;

use crate::error::Result;
use crate::models::{embed_lr_to_lg, LgProcess, LrModel};
use crate::numerics::{eigenvalues, matrix_kernel, Matrix};
use crate::structure::{constant_short_rate, is_proper, reducibility, shift_to_lg};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LongTermRationale {
    /// The short rate is constant, so every yield equals it.
    ConstantShortRate,
    /// Proper model with every eigenvalue of β in the open left half-plane.
    ProperStable,
    /// Reducible LG form whose certificate eigenvalue dominates.
    Reducible,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LongTermYield {
    pub value: Option<f64>,
    pub rationale: LongTermRationale,
}

impl LongTermYield {
    fn undetermined() -> Self {
        Self {
            value: None,
            rationale: LongTermRationale::Undetermined,
        }
    }
}

/// Long-term yield `y_∞` where a sufficient criterion applies.
///
/// A reducible certificate `(v, λ)` only fixes `y_∞ = α − λ` when λ is a simple
/// eigenvalue strictly dominating the real parts of the others and the leading
/// term `e^{λτ}(ψᵀr)(vᵀz₀)/(vᵀr)` of `ψᵀe^{βτ}z₀` is positive, `r` the right
/// eigenvector. Anything else is reported undetermined.
pub fn long_term_yield_analytic(model: &LrModel, tol: f64) -> LongTermYield {
    analytic(model, tol).unwrap_or_else(|_| LongTermYield::undetermined())
}

fn analytic(model: &LrModel, tol: f64) -> Result<LongTermYield> {
    if let Some(lambda) = constant_short_rate(model, tol) {
        return Ok(LongTermYield {
            value: Some(model.alpha - lambda),
            rationale: LongTermRationale::ConstantShortRate,
        });
    }
    let properness = is_proper(model, tol)?;
    if properness.proper {
        let top = eigenvalues(&model.beta)?
            .iter()
            .map(|l| l.re)
            .fold(f64::NEG_INFINITY, f64::max);
        if top < 0.0 {
            return Ok(LongTermYield {
                value: Some(model.alpha),
                rationale: LongTermRationale::ProperStable,
            });
        }
    }
    let lg = if model.is_lg() {
        LgProcess::new(model.clone())?
    } else if let Some(q) = properness.witness_q.as_ref() {
        shift_to_lg(model, q, tol.max(1e-9))?
    } else {
        embed_lr_to_lg(model)?
    };
    let cert = reducibility(&lg, tol)?;
    let (Some(v), Some(lambda)) = (cert.v, cert.lambda) else {
        return Ok(LongTermYield::undetermined());
    };
    let gap = tol.max(1e-8) * (1.0 + lambda.abs());
    let vals = eigenvalues(&lg.beta)?;
    let near = vals.iter().filter(|l| (l.re - lambda).abs() <= gap && l.im.abs() <= gap).count();
    let dominated = vals
        .iter()
        .filter(|l| !((l.re - lambda).abs() <= gap && l.im.abs() <= gap))
        .all(|l| l.re < lambda - gap);
    if near != 1 || !dominated {
        return Ok(LongTermYield::undetermined());
    }
    let m = lg.dim();
    let shifted = &lg.beta - Matrix::identity(m, m) * lambda;
    let right = matrix_kernel(&shifted, tol.max(1e-8))?;
    let Some(r) = right.first() else {
        return Ok(LongTermYield::undetermined());
    };
    let vr = v.dot(r);
    let lead = lg.psi.dot(r) * v.dot(&lg.z0) / vr;
    if !(lead > 0.0) || !lead.is_finite() {
        return Ok(LongTermYield::undetermined());
    }
    Ok(LongTermYield {
        value: Some(lg.alpha - lambda),
        rationale: LongTermRationale::Reducible,
    })
}
