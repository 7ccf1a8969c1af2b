use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{DiffusionSpec, LgProcess, LrModel, StateSpace};
use crate::numerics::{eig, kernel_basis, real_left_eigenspaces, Matrix, Vector};

/// Reducibility verdict with its certificate `(v, λ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reducibility {
    pub reducible: bool,
    #[serde(serialize_with = "crate::serde_util::opt_vector")]
    pub v: Option<Vector>,
    pub lambda: Option<f64>,
    pub caveat: Option<String>,
}

impl Reducibility {
    fn no(caveat: Option<String>) -> Self {
        Self {
            reducible: false,
            v: None,
            lambda: None,
            caveat,
        }
    }
}

/// Looks for a real left eigenpair `(v, λ)` of β with `vᵀΛ_j = 0` for every
/// loading and `vᵀz₀ ≠ 0`, largest λ first. Within an eigenspace the candidate
/// is the projection of `z₀` onto the directions that annihilate every loading;
/// `v` is unit length with `vᵀz₀ > 0`.
pub fn reducibility(lg: &LgProcess, tol: f64) -> Result<Reducibility> {
    let m = lg.dim();
    let loadings = &lg.diffusion.loadings;
    let z0 = &lg.z0;
    let z_scale = z0.norm().max(f64::MIN_POSITIVE);
    for space in real_left_eigenspaces(&lg.beta, tol)? {
        let k = space.basis.len();
        // coefficients a with (Ba)ᵀΛ_j = 0
        let rows: Vec<Vector> = loadings
            .iter()
            .filter(|l| l.norm() > 0.0)
            .map(|l| {
                let r = Vector::from_fn(k, |i, _| space.basis[i].dot(l));
                r / l.norm()
            })
            .collect();
        let coeffs = if rows.is_empty() || rows.iter().all(|r| r.amax() <= tol) {
            crate::numerics::canonical_basis(k)
        } else {
            kernel_basis(&rows, tol, Some(k))?
                .into_iter()
                .filter(|a| rows.iter().all(|r| r.dot(a).abs() <= tol.max(1e-12)))
                .collect()
        };
        let mut v = Vector::zeros(m);
        for a in &coeffs {
            let dir = (0..k).fold(Vector::zeros(m), |acc, i| acc + &space.basis[i] * a[i]);
            v += &dir * dir.dot(z0);
        }
        let vn = v.norm();
        if vn <= tol * z_scale.max(1.0) || v.dot(z0).abs() <= tol * z_scale {
            continue;
        }
        v /= vn;
        if v.dot(z0) < 0.0 {
            v = -v;
        }
        let lambda = v.dot(&(lg.beta.transpose() * &v));
        return Ok(Reducibility {
            reducible: true,
            v: Some(v),
            lambda: Some(lambda),
            caveat: None,
        });
    }
    let caveat = eig(&lg.beta, tol)
        .map(|d| d.defective)
        .unwrap_or(true)
        .then(|| "drift matrix is defective; no usable real left eigenpair".to_string());
    Ok(Reducibility::no(caveat))
}

/// Checks a reducibility certificate against the process.
pub fn check_certificate(lg: &LgProcess, v: &Vector, lambda: f64, tol: f64) -> Result<()> {
    let m = lg.dim();
    if v.len() != m {
        return Err(Error::Certificate(format!("v has length {}, expected {m}", v.len())));
    }
    let vn = v.norm();
    if vn == 0.0 {
        return Err(Error::Certificate("v is zero".into()));
    }
    let tol = tol.max(1e-8);
    let res = (lg.beta.transpose() * v - v * lambda).norm();
    if res > tol * lg.beta.norm().max(1.0) * vn {
        return Err(Error::Certificate(format!(
            "v is not a left eigenvector for {lambda} (residual {res:e})"
        )));
    }
    if !(v.dot(&lg.z0) > 0.0) {
        return Err(Error::Certificate("v'z0 must be positive".into()));
    }
    for (j, l) in lg.diffusion.loadings.iter().enumerate() {
        if v.dot(l).abs() > tol * vn * l.norm() {
            return Err(Error::Certificate(format!("v does not annihilate loading {j}")));
        }
    }
    Ok(())
}

/// Reduces a reducible LG process to an observationally equivalent
/// `(m−1)`-dimensional LR model.
///
/// With `Q` invertible with first row `vᵀ`, the process `Z̃ = e^{−λt}QZ/(vᵀz₀)`
/// has first coordinate 1; the remaining coordinates are the new state. Drift
/// data come from `Q(β − λI)Q⁻¹`, density coefficients from `Q⁻ᵀψ`.
pub fn reduce(lg: &LgProcess, v: &Vector, lambda: f64, tol: f64) -> Result<LrModel> {
    let m = lg.dim();
    if m < 2 {
        return Err(Error::Argument("reduce needs dimension at least 2".into()));
    }
    check_certificate(lg, v, lambda, tol)?;
    let vz = v.dot(&lg.z0);
    let pivot = v.iamax();
    let mut q = Matrix::zeros(m, m);
    q.row_mut(0).copy_from(&v.transpose());
    let mut r = 1;
    for i in (0..m).filter(|&i| i != pivot) {
        q[(r, i)] = 1.0;
        r += 1;
    }
    let q_inv = q
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("completion of the certificate row".into()))?;
    let n = m - 1;
    let k = &q * (&lg.beta - Matrix::identity(m, m) * lambda) * &q_inv;
    let b = k.view((1, 0), (n, 1)).column(0).into_owned();
    let beta = k.view((1, 1), (n, n)).into_owned();
    let w = q_inv.transpose() * &lg.psi;
    let z_tilde = &q * &lg.z0 / vz;

    let gamma = lg.diffusion_time_exponent - lambda;
    let d = &lg.diffusion;
    let mut loadings = Vec::new();
    let mut offsets = Vec::new();
    let mut slopes = Vec::new();
    for j in 0..d.num_drivers() {
        let l = (&q * &d.loadings[j] / vz).rows(1, n).into_owned();
        let c = q_inv.transpose() * &d.vol_slopes[j] * vz;
        let mut offset = d.vol_offsets[j];
        if gamma == 0.0 {
            offset += c[0];
        } else if c[0].abs() > tol * c.norm().max(f64::MIN_POSITIVE) {
            return Err(Error::Unrepresentable(format!(
                "driver {j}: the volatility offset would vary in time"
            )));
        }
        loadings.push(l);
        offsets.push(offset);
        slopes.push(c.rows(1, n).into_owned());
    }
    let scaled_axis = (0..m).all(|i| i == pivot || v[i].abs() <= tol * v[pivot].abs());
    let state_space = if scaled_axis && lg.state_space == StateSpace::NonnegOrthant {
        StateSpace::NonnegOrthant
    } else {
        StateSpace::WholeSpace
    };
    LrModel::new(
        b,
        beta,
        lg.alpha - lambda,
        w[0],
        w.rows(1, n).into_owned(),
        z_tilde.rows(1, n).into_owned(),
        DiffusionSpec::new(loadings, offsets, slopes),
        state_space,
    )?
    .with_time_exponent(gamma)
}

/// Translation `Z′ = Z − q` for a witness `q` of non-properness, giving an LG
/// process of the same dimension.
pub fn shift_to_lg(model: &LrModel, q: &Vector, tol: f64) -> Result<LgProcess> {
    let drift = &model.b + &model.beta * q;
    let intercept = model.phi + model.psi.dot(q);
    let scale = 1.0 + model.b.norm() + model.beta.norm() * q.norm();
    let dscale = 1.0 + model.phi.abs() + model.psi.norm() * q.norm();
    if drift.norm() > tol * scale || intercept.abs() > tol * dscale {
        return Err(Error::Argument("q does not satisfy b + beta q = 0 and phi + psi'q = 0".into()));
    }
    let d = &model.diffusion;
    let mut offsets = Vec::with_capacity(d.num_drivers());
    for j in 0..d.num_drivers() {
        let shift = d.vol_slopes[j].dot(q);
        if model.diffusion_time_exponent != 0.0 && shift != 0.0 {
            return Err(Error::Unrepresentable(format!(
                "driver {j}: the volatility offset would vary in time"
            )));
        }
        offsets.push(d.vol_offsets[j] + shift);
    }
    let shifted = LrModel {
        b: Vector::zeros(model.dim()),
        beta: model.beta.clone(),
        alpha: model.alpha,
        phi: 0.0,
        psi: model.psi.clone(),
        z0: &model.z0 - q,
        diffusion: DiffusionSpec::new(d.loadings.clone(), offsets, d.vol_slopes.clone()),
        state_space: StateSpace::WholeSpace,
        diffusion_time_exponent: model.diffusion_time_exponent,
    };
    LgProcess::new(shifted)
}
