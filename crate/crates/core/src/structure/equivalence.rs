use serde::Serialize;

use super::kernel::{active_loadings, krylov_span, term_structure_kernel};
use crate::error::{Error, Result};
use crate::models::LrModel;
use crate::numerics::{condition_number, expm, expm_integral, Matrix, Vector};
use crate::numerics::expm::augment;

const MAX_CONDITION: f64 = 1e12;

/// Algebraic relation `Z_t + p = (ζ₀/ζ′₀) e^{(α−α′)t} (q + Q Z′_t)` between two
/// observationally equivalent models.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceCertificate {
    #[serde(serialize_with = "crate::serde_util::vector")]
    pub p: Vector,
    #[serde(serialize_with = "crate::serde_util::vector")]
    pub q: Vector,
    #[serde(rename = "Q", serialize_with = "crate::serde_util::matrix")]
    pub big_q: Matrix,
    pub alpha_pair: (f64, f64),
    pub zeta0_ratio: f64,
    pub max_residual: f64,
    pub taus: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Equivalence {
    Equivalent(EquivalenceCertificate),
    NotEquivalent { max_residual: f64 },
}

impl Equivalence {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Equivalence::Equivalent(_))
    }

    pub fn max_residual(&self) -> f64 {
        match self {
            Equivalence::Equivalent(c) => c.max_residual,
            Equivalence::NotEquivalent { max_residual } => *max_residual,
        }
    }
}

/// `g(τ) = e^{−ατ}(φ + ψᵀ∫₀^τ e^{βs}b ds)` and `h(τ) = e^{−ατ}e^{βᵀτ}ψ`, so that
/// `E_t[ζ_{t+τ}]/e^{−αt} = g(τ) + h(τ)ᵀZ_t`.
fn pricing_coefficients(model: &LrModel, tau: f64) -> Result<(f64, Vector)> {
    let m = model.dim();
    let e = expm(&augment(&model.beta, &model.b), tau)?;
    let mut w = Vector::zeros(m + 1);
    w.rows_mut(0, m).copy_from(&model.psi);
    w[m] = model.phi;
    let row = e.transpose() * w;
    let disc = (-model.alpha * tau).exp();
    Ok((row[m] * disc, row.rows(0, m) * disc))
}

fn stacked(model: &LrModel, taus: &[f64]) -> Result<(Vector, Matrix)> {
    let m = model.dim();
    let mut g = Vector::zeros(taus.len());
    let mut h = Matrix::zeros(taus.len(), m);
    for (i, &tau) in taus.iter().enumerate() {
        let (gi, hi) = pricing_coefficients(model, tau)?;
        g[i] = gi;
        h.row_mut(i).copy_from(&hi.transpose());
    }
    Ok((g, h))
}

fn default_taus(m: usize) -> Vec<f64> {
    (0..m).map(|i| i as f64 / 2.0).collect()
}

/// Tries to certify that `b` is observationally equivalent to `a`.
///
/// Stacking the pricing identity `g_a(τ) + h_a(τ)ᵀZ = ρ_t(g_b(τ) + h_b(τ)ᵀZ′)`,
/// `ρ_t = (ζ₀/ζ′₀)e^{(α−α′)t}`, at τ values with independent rows `h_a(τ_i)`
/// gives `p = H⁻¹G`, `q = H⁻¹G′`, `Q = H⁻¹H′`. The relation is then checked on
/// 4m further tenors at several times, on the states `b` can reach at each time
/// (mean path plus the Krylov span of its noise loadings), and at the initial
/// states.
pub fn equivalence_certificate(
    a: &LrModel,
    b: &LrModel,
    taus: Option<&[f64]>,
    tol: f64,
) -> Result<Equivalence> {
    let m = a.dim();
    if !term_structure_kernel(a, tol)?.is_empty() {
        return Err(Error::Argument(
            "the first model must have a zero term structure kernel".into(),
        ));
    }
    let mut grid = taus.map(<[f64]>::to_vec).unwrap_or_else(|| default_taus(m));
    if grid.len() < m || grid.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::Argument(format!(
            "need at least {m} nonnegative tenors, got {}",
            grid.len()
        )));
    }
    let (mut g, mut h) = stacked(a, &grid)?;
    let mut cond = condition_number(&h)?;
    let mut extra = 0;
    while cond > MAX_CONDITION && extra < 4 * m {
        extra += 1;
        let next = grid.iter().copied().fold(0.0, f64::max) + 0.5;
        grid.push(next);
        let s = stacked(a, &grid)?;
        g = s.0;
        h = s.1;
        cond = condition_number(&h)?;
    }
    if cond > MAX_CONDITION {
        return Err(Error::IllConditioned(format!(
            "stacked pricing rows have condition number {cond:e}; choose different tenors"
        )));
    }
    let (gb, hb) = stacked(b, &grid)?;
    let svd = h.clone().svd(true, true);
    let solve = |rhs: &Matrix| -> Result<Matrix> {
        svd.solve(rhs, 0.0).map_err(|e| Error::Singular(e.to_string()))
    };
    let p = solve(&Matrix::from_column_slice(g.len(), 1, g.as_slice()))?.column(0).into_owned();
    let q = solve(&Matrix::from_column_slice(gb.len(), 1, gb.as_slice()))?
        .column(0)
        .into_owned();
    let big_q = solve(&hb)?;

    let zeta0_ratio = a.zeta0() / b.zeta0();
    if !(zeta0_ratio > 0.0) || !zeta0_ratio.is_finite() {
        return Err(Error::InvalidState(zeta0_ratio));
    }

    let mut max_residual = 0.0_f64;
    // initial states
    let lhs = &a.z0 + &p;
    let rhs = (&q + &big_q * &b.z0) * zeta0_ratio;
    let scale = a.z0.norm() + p.norm() + rhs.norm();
    max_residual = max_residual.max((lhs - &rhs).norm() / scale.max(f64::MIN_POSITIVE));

    let top = grid.iter().copied().fold(0.0, f64::max);
    let checks: Vec<f64> = (1..=4 * m)
        .map(|i| top * (i as f64) / (4 * m) as f64 + 0.37 * i as f64 / (4 * m) as f64)
        .collect();
    // states b can reach at time t: the mean path plus the span its noise
    // generates under β
    let spread = krylov_span(&b.beta, &active_loadings(b), tol)?;
    for &tau in &checks {
        let (ga, ha) = pricing_coefficients(a, tau)?;
        let (gbt, hbt) = pricing_coefficients(b, tau)?;
        for &t in &[0.0, 0.5, 1.0, 2.0] {
            let rho = zeta0_ratio * ((a.alpha - b.alpha) * t).exp();
            let mean = expm(&b.beta, t)? * &b.z0 + expm_integral(&b.beta, &b.b, t)?;
            let unit = 1.0 + mean.norm();
            let mut states = vec![mean.clone()];
            if t > 0.0 {
                states.extend(spread.iter().map(|d| &mean + d * unit));
            }
            for z in &states {
                let inner = &q + &big_q * z;
                let left = ga - ha.dot(&p) + rho * ha.dot(&inner);
                let right = rho * (gbt + hbt.dot(z));
                let scale = ga.abs()
                    + ha.dot(&p).abs()
                    + rho * ha.dot(&inner).abs()
                    + rho * gbt.abs()
                    + rho * hbt.dot(z).abs();
                max_residual =
                    max_residual.max((left - right).abs() / scale.max(f64::MIN_POSITIVE));
            }
        }
    }
    if max_residual > tol {
        return Ok(Equivalence::NotEquivalent { max_residual });
    }
    Ok(Equivalence::Equivalent(EquivalenceCertificate {
        p,
        q,
        big_q,
        alpha_pair: (a.alpha, b.alpha),
        zeta0_ratio,
        max_residual,
        taus: grid,
    }))
}
