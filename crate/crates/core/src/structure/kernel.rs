use serde::Serialize;

use crate::error::Result;
use crate::models::LrModel;
use crate::numerics::{canonical_basis, kernel_basis, range_basis, solve_linear, Matrix, Vector};

/// `Some(λ)` when the short rate is constant: `ψᵀβ = λψᵀ` and `ψᵀb = λφ`.
pub fn constant_short_rate(model: &LrModel, tol: f64) -> Option<f64> {
    let psi = &model.psi;
    let pn = psi.norm();
    if pn == 0.0 {
        // ψ = 0 gives r = α
        return Some(0.0);
    }
    let row = model.beta.transpose() * psi;
    let lambda = row.dot(psi) / (pn * pn);
    let scale = model.beta.norm().max(1.0);
    if (&row - psi * lambda).norm() > tol * scale * pn {
        return None;
    }
    let lhs = psi.dot(&model.b);
    let rhs = lambda * model.phi;
    let mag = 1.0 + pn * model.b.norm() + (lambda * model.phi).abs();
    ((lhs - rhs).abs() <= tol * mag).then_some(lambda)
}

pub fn is_constant_short_rate(model: &LrModel, tol: f64) -> bool {
    constant_short_rate(model, tol).is_some()
}

/// Rows `ψᵀβ^k / ‖ψᵀβ^k‖` for `k < m`, zero rows dropped.
pub fn krylov_rows(beta: &Matrix, psi: &Vector) -> Vec<Vector> {
    let m = psi.len();
    let bt = beta.transpose();
    let mut rows = Vec::with_capacity(m);
    let mut r = psi.clone();
    for k in 0..m {
        if k > 0 {
            r = &bt * &r;
        }
        let n = r.norm();
        if n == 0.0 {
            break;
        }
        r /= n;
        rows.push(r.clone());
    }
    rows
}

/// Term-structure kernel `𝒰`: the joint kernel of `ψᵀβ^k`, `k < m`, or all of
/// `ℝ^m` when the short rate is constant.
pub fn term_structure_kernel(model: &LrModel, tol: f64) -> Result<Vec<Vector>> {
    let m = model.dim();
    if is_constant_short_rate(model, tol) {
        return Ok(canonical_basis(m));
    }
    kernel_basis(&krylov_rows(&model.beta, &model.psi), tol, Some(m))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Properness {
    pub proper: bool,
    #[serde(serialize_with = "crate::serde_util::opt_vector")]
    pub witness_q: Option<Vector>,
}

/// Proper iff `[β; ψᵀ] q = (−b; −φ)` has no solution.
pub fn is_proper(model: &LrModel, tol: f64) -> Result<Properness> {
    let m = model.dim();
    let mut a = Matrix::zeros(m + 1, m);
    a.view_mut((0, 0), (m, m)).copy_from(&model.beta);
    a.view_mut((m, 0), (1, m)).copy_from(&model.psi.transpose());
    let mut y = Vector::zeros(m + 1);
    y.rows_mut(0, m).copy_from(&(-&model.b));
    y[m] = -model.phi;
    if y.iter().all(|&x| x == 0.0) {
        return Ok(Properness {
            proper: false,
            witness_q: Some(Vector::zeros(m)),
        });
    }
    let sol = solve_linear(&a, &y, tol)?;
    Ok(match sol.solution() {
        Some(q) => Properness {
            proper: false,
            witness_q: Some(q.clone()),
        },
        None => Properness {
            proper: true,
            witness_q: None,
        },
    })
}

/// Orthonormal basis of the Krylov span `{β^k w : w ∈ seeds, k < m}`.
pub fn krylov_span(beta: &Matrix, seeds: &[Vector], tol: f64) -> Result<Vec<Vector>> {
    let m = beta.nrows();
    let mut cols: Vec<Vector> = Vec::new();
    for w in seeds {
        let mut x = w.clone();
        for k in 0..m {
            if k > 0 {
                x = beta * &x;
            }
            let n = x.norm();
            if n == 0.0 {
                break;
            }
            x /= n;
            cols.push(x.clone());
        }
    }
    if cols.is_empty() {
        return Ok(Vec::new());
    }
    let a = Matrix::from_columns(&cols);
    range_basis(&a, tol)
}

/// Diffusion directions whose volatility is not identically zero.
pub fn active_loadings(model: &LrModel) -> Vec<Vector> {
    let d = &model.diffusion;
    (0..d.num_drivers())
        .filter(|&j| {
            d.loadings[j].norm() > 0.0
                && (d.vol_offsets[j] != 0.0 || d.vol_slopes[j].norm() > 0.0)
        })
        .map(|j| d.loadings[j].clone())
        .collect()
}

/// Direction space of the affine support, `span` of the Krylov sequences of
/// `b + βz₀` and the active loadings. This is the smallest β-invariant subspace
/// containing every direction the dynamics can move in, so it bounds the
/// support from above and equals it for generic noise.
pub fn affine_support_directions(model: &LrModel, tol: f64) -> Result<Vec<Vector>> {
    let mut seeds = vec![model.drift(&model.z0)];
    seeds.extend(active_loadings(model));
    krylov_span(&model.beta, &seeds, tol)
}

/// Basis of the linear support `span{z₀} + affine directions`.
pub fn linear_support(model: &LrModel, tol: f64) -> Result<Vec<Vector>> {
    let mut cols = affine_support_directions(model, tol)?;
    if model.z0.norm() > 0.0 {
        cols.push(model.z0.normalize());
    }
    if cols.is_empty() {
        return Ok(cols);
    }
    range_basis(&Matrix::from_columns(&cols), tol)
}
