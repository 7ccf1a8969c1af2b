use super::kernel::{affine_support_directions, constant_short_rate, term_structure_kernel};
use crate::error::{Error, Result};
use crate::models::{DiffusionSpec, LrModel, StateSpace};
use crate::numerics::{linalg::orthogonal_complement, rank, Matrix, Vector};

/// Restricts a model to an invariant affine subspace `{q + Qz′}`.
///
/// The new state is `Z′ = P(Z − q)` with `P = (QᵀQ)⁻¹Qᵀ`, drift
/// `P(b + βq) + PβQ Z′` and density `φ + ψᵀq + (Qᵀψ)ᵀZ′`.
pub fn reduce_affine_support(
    model: &LrModel,
    support_basis: &Matrix,
    support_point: &Vector,
    tol: f64,
) -> Result<LrModel> {
    let m = model.dim();
    let k = support_basis.ncols();
    if support_basis.nrows() != m || support_point.len() != m {
        return Err(Error::Dimension("support basis or point does not match the model".into()));
    }
    if k == 0 || rank(support_basis, tol)? < k {
        return Err(Error::Singular("support basis is rank deficient".into()));
    }
    let gram = support_basis.transpose() * support_basis;
    let p = gram
        .try_inverse()
        .ok_or_else(|| Error::Singular("support basis Gram matrix".into()))?
        * support_basis.transpose();
    let proj = support_basis * &p;
    let outside = |x: &Vector| (x - &proj * x).norm() > tol.max(1e-9) * x.norm().max(1.0);

    let q = support_point;
    let drift0 = &model.b + &model.beta * q;
    if outside(&drift0) || outside(&(&model.z0 - q)) {
        return Err(Error::Argument("support is not invariant under the drift".into()));
    }
    let bq = &model.beta * support_basis;
    for j in 0..k {
        if outside(&bq.column(j).into_owned()) {
            return Err(Error::Argument("support is not invariant under beta".into()));
        }
    }

    let d = &model.diffusion;
    let gamma = model.diffusion_time_exponent;
    let (mut loadings, mut offsets, mut slopes) = (Vec::new(), Vec::new(), Vec::new());
    for j in 0..d.num_drivers() {
        let offset_shift = d.vol_slopes[j].dot(q);
        let slope = support_basis.transpose() * &d.vol_slopes[j];
        let silent = d.loadings[j].norm() == 0.0
            || (d.vol_offsets[j] == 0.0 && offset_shift == 0.0 && slope.norm() == 0.0);
        if silent {
            continue;
        }
        if outside(&d.loadings[j]) {
            return Err(Error::Argument(format!(
                "loading {j} leaves the declared support"
            )));
        }
        if gamma != 0.0 && offset_shift != 0.0 {
            return Err(Error::Unrepresentable(format!(
                "driver {j}: the volatility offset would vary in time"
            )));
        }
        loadings.push(&p * &d.loadings[j]);
        offsets.push(d.vol_offsets[j] + offset_shift);
        slopes.push(slope);
    }

    let selects_axes = (0..k).all(|j| {
        let c = support_basis.column(j);
        let i = c.iamax();
        c[i] > 0.0 && c.iter().enumerate().all(|(r, &x)| r == i || x == 0.0) && q[i] == 0.0
    });
    let state_space = if selects_axes && model.state_space == StateSpace::NonnegOrthant {
        StateSpace::NonnegOrthant
    } else {
        StateSpace::WholeSpace
    };
    LrModel::new(
        &p * drift0,
        &p * bq,
        model.alpha,
        model.phi + model.psi.dot(q),
        support_basis.transpose() * &model.psi,
        &p * (&model.z0 - q),
        DiffusionSpec::new(loadings, offsets, slopes),
        state_space,
    )?
    .with_time_exponent(gamma)
}

/// Quotients out the term-structure kernel `𝒰`.
///
/// `P₁` has orthonormal rows spanning `𝒰^⊥`, so `Q₁ = P₁ᵀ`. Since `𝒰` is
/// β-invariant and `ψ ⊥ 𝒰`, `Z′ = P₁Z` is autonomous with drift
/// `P₁b + P₁βQ₁Z′` and density `φ + (Q₁ᵀψ)ᵀZ′`.
pub fn reduce_tsk_quotient(model: &LrModel, tol: f64) -> Result<LrModel> {
    if constant_short_rate(model, tol).is_some() {
        return Err(Error::Unsupported(
            "constant short rate: the term structure kernel is the whole space".into(),
        ));
    }
    let u = term_structure_kernel(model, tol)?;
    if u.is_empty() {
        return Err(Error::Argument("the term structure kernel is already zero".into()));
    }
    let m = model.dim();
    let rows = orthogonal_complement(&u, m, tol)?;
    let p1 = Matrix::from_fn(rows.len(), m, |i, j| rows[i][j]);
    let q1 = p1.transpose();
    let q2 = Matrix::from_columns(&u);

    let d = &model.diffusion;
    let (mut loadings, mut offsets, mut slopes) = (Vec::new(), Vec::new(), Vec::new());
    for j in 0..d.num_drivers() {
        let l = &p1 * &d.loadings[j];
        if l.norm() <= tol * d.loadings[j].norm() {
            continue;
        }
        let hidden = q2.transpose() * &d.vol_slopes[j];
        if hidden.norm() > tol * d.vol_slopes[j].norm().max(1.0) {
            return Err(Error::Unrepresentable(format!(
                "driver {j}: volatility depends on kernel directions"
            )));
        }
        loadings.push(l);
        offsets.push(d.vol_offsets[j]);
        slopes.push(&p1 * &d.vol_slopes[j]);
    }
    let reduced = LrModel::new(
        &p1 * &model.b,
        &p1 * &model.beta * &q1,
        model.alpha,
        model.phi,
        &p1 * &model.psi,
        &p1 * &model.z0,
        DiffusionSpec::new(loadings, offsets, slopes),
        StateSpace::WholeSpace,
    )?
    .with_time_exponent(model.diffusion_time_exponent)?;
    if !term_structure_kernel(&reduced, tol)?.is_empty() {
        return Err(Error::Convergence {
            what: "term structure kernel quotient",
            residual: f64::NAN,
        });
    }
    Ok(reduced)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimalForm {
    pub model: LrModel,
    /// The source had a constant short rate and was mapped to the 1-dimensional
    /// canonical form `ζ_t/ζ₀ = e^{−(α−λ)t}`.
    pub constant_rate: bool,
    pub steps: Vec<&'static str>,
}

fn constant_rate_form(model: &LrModel, lambda: f64) -> Result<LrModel> {
    LrModel::deterministic(
        Vector::zeros(1),
        Matrix::zeros(1, 1),
        model.alpha - lambda,
        1.0,
        Vector::zeros(1),
        Vector::zeros(1),
    )
}

/// Alternates affine-support restriction and term-structure-kernel quotients
/// until the model has full affine support and zero kernel. Each step strictly
/// lowers the dimension.
pub fn minimal_representation(model: &LrModel, tol: f64) -> Result<MinimalForm> {
    let mut current = model.clone();
    let mut steps = Vec::new();
    loop {
        if let Some(lambda) = constant_short_rate(&current, tol) {
            steps.push("constant_rate");
            return Ok(MinimalForm {
                model: constant_rate_form(&current, lambda)?,
                constant_rate: true,
                steps,
            });
        }
        let m = current.dim();
        let dirs = affine_support_directions(&current, tol)?;
        if dirs.len() < m {
            if dirs.is_empty() {
                // the state never moves, so r = α
                steps.push("constant_state");
                return Ok(MinimalForm {
                    model: constant_rate_form(&current, 0.0)?,
                    constant_rate: true,
                    steps,
                });
            }
            let basis = Matrix::from_columns(&dirs);
            current = reduce_affine_support(&current, &basis, &current.z0.clone(), tol)?;
            steps.push("affine_support");
            continue;
        }
        if !term_structure_kernel(&current, tol)?.is_empty() {
            current = reduce_tsk_quotient(&current, tol)?;
            steps.push("tsk_quotient");
            continue;
        }
        return Ok(MinimalForm {
            model: current,
            constant_rate: false,
            steps,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quotient_drops_decoupled_coordinate() {
        let m = LrModel::deterministic(
            Vector::zeros(2),
            Matrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -2.0]),
            0.0,
            1.0,
            Vector::from_vec(vec![1.0, 0.0]),
            Vector::from_vec(vec![1.0, 1.0]),
        )
        .unwrap();
        let r = reduce_tsk_quotient(&m, 1e-10).unwrap();
        assert_eq!(r.dim(), 1);
        assert!((r.beta[(0, 0)] + 1.0).abs() < 1e-15);
        assert!((r.psi[0].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_kernel_fails_precondition() {
        let m = LrModel::deterministic(
            Vector::zeros(1),
            Matrix::from_element(1, 1, -1.0),
            0.0,
            1.0,
            Vector::from_element(1, 1.0),
            Vector::from_element(1, 1.0),
        )
        .unwrap();
        assert!(matches!(reduce_tsk_quotient(&m, 1e-10), Err(Error::Argument(_))));
    }
}
