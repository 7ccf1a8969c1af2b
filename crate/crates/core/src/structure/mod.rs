//! Term-structure kernel, properness, reducibility, observational equivalence
//! and the constructive reductions.

mod equivalence;
mod kernel;
mod reducibility;
mod reductions;
mod support;

pub use equivalence::{equivalence_certificate, Equivalence, EquivalenceCertificate};
pub use kernel::{
    active_loadings, affine_support_directions, constant_short_rate, is_constant_short_rate,
    is_proper, krylov_rows, krylov_span, linear_support, term_structure_kernel, Properness,
};
pub use reducibility::{check_certificate, reduce, reducibility, shift_to_lg, Reducibility};
pub use reductions::{
    minimal_representation, reduce_affine_support, reduce_tsk_quotient, MinimalForm,
};
pub use support::{estimate_affine_support, estimate_linear_support, SupportEstimate};

use serde::Serialize;

use crate::error::Result;
use crate::models::{LgProcess, LrModel};
use crate::numerics::Vector;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureReport {
    #[serde(serialize_with = "crate::serde_util::vectors")]
    pub tsk_basis: Vec<Vector>,
    pub constant_short_rate: bool,
    pub proper: bool,
    #[serde(serialize_with = "crate::serde_util::opt_vector")]
    pub witness_q: Option<Vector>,
    pub reducible: bool,
    #[serde(serialize_with = "crate::serde_util::opt_vector")]
    pub v: Option<Vector>,
    pub lambda: Option<f64>,
    pub lin_rank: usize,
    pub aff_rank: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub caveat: Option<String>,
}

impl StructureReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Runs every structural check on a model.
///
/// Reducibility is tested on the LG form: the model itself when `b = φ = 0`,
/// the witness translation `Z − q` when the model is not proper. A proper model
/// is not an LG process of the same dimension and is reported not reducible.
pub fn analyze(model: &LrModel, tol: f64) -> Result<StructureReport> {
    let m = model.dim();
    let tsk_basis = term_structure_kernel(model, tol)?;
    let constant = is_constant_short_rate(model, tol);
    let properness = is_proper(model, tol)?;
    let lin_rank = linear_support(model, tol)?.len();
    let aff_rank = affine_support_directions(model, tol)?.len();
    let mut caveats = Vec::new();

    let lg = if model.is_lg() {
        Some(LgProcess::new(model.clone())?)
    } else if let Some(q) = properness.witness_q.as_ref() {
        caveats.push("reducibility certificate refers to the translated state Z - q".to_string());
        Some(shift_to_lg(model, q, tol.max(1e-9))?)
    } else {
        None
    };
    let red = match &lg {
        Some(lg) => reducibility(lg, tol)?,
        None => Reducibility {
            reducible: false,
            v: None,
            lambda: None,
            caveat: None,
        },
    };
    if let Some(c) = red.caveat.clone() {
        caveats.push(c);
    }
    if red.reducible && (!tsk_basis.is_empty() || lin_rank < m) {
        caveats.push(
            "equivalence to a lower-dimensional model assumes zero kernel and full linear support"
                .to_string(),
        );
    }
    Ok(StructureReport {
        tsk_basis,
        constant_short_rate: constant,
        proper: properness.proper,
        witness_q: properness.witness_q,
        reducible: red.reducible,
        v: red.v,
        lambda: red.lambda,
        lin_rank,
        aff_rank,
        caveat: (!caveats.is_empty()).then(|| caveats.join("; ")),
    })
}
