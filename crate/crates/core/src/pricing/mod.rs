//! Closed-form bond prices, yields, short rates, the nonnegativity bound α* and
//! long-term yields.

mod alpha_star;
mod long_term;

pub use alpha_star::{alpha_star, AlphaStarReport, AlphaStarTerm};
pub use long_term::{long_term_yield_analytic, LongTermYield, LongTermRationale};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::LrModel;
use crate::numerics::expm::augment;
use crate::numerics::{expm_scaled, Vector};

/// Bond price at a fixed tenor as an affine form in the state.
///
/// For a tenor `τ` the numerator of the bond price is
/// `φ + ψᵀ∫₀^τ e^{βs}b ds + ψᵀe^{βτ}z = (ψ; φ)ᵀ exp([[β, b], [0, 0]]τ) (z; 1)`,
/// held here as `e^{log_scale}(coefᵀz + constant)`.
#[derive(Debug, Clone)]
pub struct DiscountForm {
    pub tau: f64,
    alpha: f64,
    phi: f64,
    psi: Vector,
    coef: Vector,
    constant: f64,
    log_scale: f64,
}

impl DiscountForm {
    pub fn new(model: &LrModel, tau: f64) -> Result<Self> {
        if !(tau >= 0.0) || !tau.is_finite() {
            return Err(Error::Argument(format!("tenor must be finite and >= 0, got {tau}")));
        }
        let m = model.dim();
        let aug = augment(&model.beta, &model.b);
        let scaled = expm_scaled(&aug, tau)?;
        // Prefer the unscaled exponential whenever it is representable.
        let (e, log_scale) = match scaled.to_matrix() {
            Ok(e) => (e, 0.0),
            Err(Error::Overflow(_)) => (scaled.mantissa.clone(), scaled.log_scale()),
            Err(e) => return Err(e),
        };
        let mut weights = Vector::zeros(m + 1);
        weights.rows_mut(0, m).copy_from(&model.psi);
        weights[m] = model.phi;
        let row = e.transpose() * weights;
        Ok(Self {
            tau,
            alpha: model.alpha,
            phi: model.phi,
            psi: model.psi.clone(),
            coef: row.rows(0, m).into_owned(),
            constant: row[m],
            log_scale,
        })
    }

    /// `coefᵀz + constant`, the numerator up to the factor `e^{log_scale}`.
    pub fn scaled_numerator(&self, z: &Vector) -> f64 {
        self.coef.dot(z) + self.constant
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// `log(φ + ψᵀ∫e^{βs}b ds + ψᵀe^{βτ}z)`.
    pub fn log_numerator(&self, z: &Vector) -> Result<f64> {
        let n = self.scaled_numerator(z);
        if !(n > 0.0) {
            return Err(Error::InvalidState(n));
        }
        Ok(n.ln() + self.log_scale)
    }

    fn denominator(&self, z: &Vector) -> Result<f64> {
        let d = self.phi + self.psi.dot(z);
        if !(d > 0.0) {
            return Err(Error::InvalidState(d));
        }
        Ok(d)
    }

    /// Ratio `E_t[ζ_{t+τ}]/ζ_t` without the discount, i.e. `num/den`, as a log.
    fn log_ratio(&self, z: &Vector) -> Result<f64> {
        let den = self.denominator(z)?;
        let num = self.scaled_numerator(z);
        if !(num > 0.0) {
            return Err(Error::InvalidState(num));
        }
        if self.log_scale == 0.0 {
            Ok((num / den).ln())
        } else {
            Ok(num.ln() - den.ln() + self.log_scale)
        }
    }

    /// `P(t, t+τ)` at state `z`.
    pub fn price(&self, z: &Vector) -> Result<f64> {
        let den = self.denominator(z)?;
        let num = self.scaled_numerator(z);
        if self.log_scale == 0.0 {
            let p = (-self.alpha * self.tau).exp() * num / den;
            if p.is_finite() {
                return Ok(p);
            }
        }
        if !(num > 0.0) {
            return Err(Error::InvalidState(num));
        }
        let p = (-self.alpha * self.tau + self.log_ratio(z)?).exp();
        if p.is_finite() {
            Ok(p)
        } else {
            Err(Error::Overflow(format!("bond price at tenor {}", self.tau)))
        }
    }

    /// `−log P(t, t+τ)/τ`; needs `τ > 0`.
    pub fn yield_at(&self, z: &Vector) -> Result<f64> {
        if self.tau == 0.0 {
            return Err(Error::Argument("yield at zero tenor is undefined".into()));
        }
        Ok(self.alpha - self.log_ratio(z)? / self.tau)
    }
}

fn check_state(model: &LrModel, state: &Vector) -> Result<()> {
    if state.len() != model.dim() {
        return Err(Error::Dimension(format!(
            "state has length {}, model dimension is {}",
            state.len(),
            model.dim()
        )));
    }
    Ok(())
}

/// `P(t, T)` at state `Z_t = state`.
pub fn bond_price(model: &LrModel, state: &Vector, t: f64, maturity: f64) -> Result<f64> {
    check_state(model, state)?;
    if maturity < t {
        return Err(Error::Argument(format!("maturity {maturity} precedes t = {t}")));
    }
    DiscountForm::new(model, maturity - t)?.price(state)
}

/// `r = α − ψᵀ(b + βz)/(φ + ψᵀz)`.
pub fn short_rate(model: &LrModel, state: &Vector) -> Result<f64> {
    check_state(model, state)?;
    let den = model.density_numerator(state);
    if !(den > 0.0) {
        return Err(Error::InvalidState(den));
    }
    Ok(model.alpha - model.psi.dot(&model.drift(state)) / den)
}

/// Discount factors and yields at a common valuation time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YieldCurve {
    pub t: f64,
    pub maturities: Vec<f64>,
    pub discount_factors: Vec<f64>,
    /// `None` at zero tenor.
    pub yields: Vec<Option<f64>>,
}

impl YieldCurve {
    /// CSV with header `maturity,discount_factor,yield`; the zero-tenor yield is
    /// left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("maturity,discount_factor,yield\n");
        for i in 0..self.maturities.len() {
            out.push_str(&format_real(self.maturities[i]));
            out.push(',');
            out.push_str(&format_real(self.discount_factors[i]));
            out.push(',');
            if let Some(y) = self.yields[i] {
                out.push_str(&format_real(y));
            }
            out.push('\n');
        }
        out
    }
}

/// Seventeen significant digits, which round-trips every binary64 value.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn yield_curve(
    model: &LrModel,
    state: &Vector,
    t: f64,
    maturities: &[f64],
) -> Result<YieldCurve> {
    check_state(model, state)?;
    let mut discount_factors = Vec::with_capacity(maturities.len());
    let mut yields = Vec::with_capacity(maturities.len());
    for &maturity in maturities {
        if !(maturity >= t) {
            return Err(Error::Argument(format!("maturity {maturity} precedes t = {t}")));
        }
        let form = DiscountForm::new(model, maturity - t)?;
        discount_factors.push(form.price(state)?);
        yields.push(if maturity > t {
            Some(form.yield_at(state)?)
        } else {
            None
        });
    }
    Ok(YieldCurve {
        t,
        maturities: maturities.to_vec(),
        discount_factors,
        yields,
    })
}

/// `−log P(t, T)/(T − t)` along `horizons`; no limit is asserted.
pub fn long_term_yield_numeric(
    model: &LrModel,
    state: &Vector,
    t: f64,
    horizons: &[f64],
) -> Result<Vec<f64>> {
    check_state(model, state)?;
    if horizons.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Argument("horizons must be increasing".into()));
    }
    horizons
        .iter()
        .map(|&maturity| {
            if !(maturity > t) {
                return Err(Error::Argument(format!("horizon {maturity} must exceed t = {t}")));
            }
            DiscountForm::new(model, maturity - t)?.yield_at(state)
        })
        .collect()
}
