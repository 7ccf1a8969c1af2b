use serde::Serialize;

use super::TrajectoryBatch;
use crate::error::{Error, Result};
use crate::models::{LgProcess, LrModel};
use crate::numerics::{expm, Vector};
use crate::pricing::DiscountForm;

/// One scalar per path and grid time, path-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PathValues {
    pub num_paths: usize,
    pub time_grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Entries whose defining quantity was not positive.
    pub invalid: usize,
}

impl PathValues {
    fn zeros(batch: &TrajectoryBatch) -> Self {
        Self {
            num_paths: batch.num_paths,
            time_grid: batch.time_grid.clone(),
            values: vec![0.0; batch.num_paths * batch.num_times()],
            invalid: 0,
        }
    }

    pub fn get(&self, path: usize, k: usize) -> f64 {
        self.values[path * self.time_grid.len() + k]
    }

    fn set(&mut self, path: usize, k: usize, x: f64) {
        let n = self.time_grid.len();
        self.values[path * n + k] = x;
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.num_paths).map(|p| self.get(p, k)).collect()
    }

    /// Sample mean and standard error at grid index `k`.
    pub fn mean_se(&self, k: usize) -> (f64, f64) {
        mean_se(&self.column(k))
    }
}

/// Sample mean and standard error, summed in path order.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MartingaleDiagnostic {
    pub statistic_name: String,
    pub times: Vec<f64>,
    pub sample_means: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub pass: bool,
}

impl MartingaleDiagnostic {
    /// Passes iff `|mean(t) − mean(0)| ≤ 3·SE(t)` at every time, with a
    /// `1e−10` relative allowance for rounding in noise-free statistics.
    pub fn from_values(statistic_name: impl Into<String>, values: &PathValues) -> Self {
        let (means, ses): (Vec<f64>, Vec<f64>) =
            (0..values.time_grid.len()).map(|k| values.mean_se(k)).unzip();
        let base = means[0];
        let pass = means
            .iter()
            .zip(&ses)
            .all(|(m, s)| (m - base).abs() <= 3.0 * s + 1e-10 * (1.0 + base.abs()));
        Self {
            statistic_name: statistic_name.into(),
            times: values.time_grid.clone(),
            sample_means: means,
            standard_errors: ses,
            pass,
        }
    }
}

fn check_batch(model: &LrModel, batch: &TrajectoryBatch) -> Result<()> {
    if model.dim() != batch.dim {
        return Err(Error::Dimension(format!(
            "model dimension {} does not match batch dimension {}",
            model.dim(),
            batch.dim
        )));
    }
    if batch.num_paths == 0 || batch.time_grid.is_empty() {
        return Err(Error::Argument("empty trajectory batch".into()));
    }
    Ok(())
}

/// `ζ_t = e^{−αt}(φ + ψᵀZ_t)` along every path; nonpositive values are counted
/// in `invalid` and kept.
pub fn spd_path(model: &LrModel, batch: &TrajectoryBatch) -> Result<PathValues> {
    check_batch(model, batch)?;
    let mut out = PathValues::zeros(batch);
    for p in 0..batch.num_paths {
        for (k, &t) in batch.time_grid.iter().enumerate() {
            let z = batch.state(p, k);
            let zeta = model.spd(t, &z);
            if !(zeta > 0.0) {
                out.invalid += 1;
            }
            out.set(p, k, zeta);
        }
    }
    Ok(out)
}

/// Constancy test of the sample means of each component of `e^{−βt}Z_t`.
pub fn check_lg_martingale(lg: &LgProcess, batch: &TrajectoryBatch) -> Result<Vec<MartingaleDiagnostic>> {
    check_batch(lg, batch)?;
    let m = lg.dim();
    let weights = batch
        .time_grid
        .iter()
        .map(|&t| expm(&lg.beta, -t))
        .collect::<Result<Vec<_>>>()?;
    let mut comps: Vec<PathValues> = (0..m).map(|_| PathValues::zeros(batch)).collect();
    for p in 0..batch.num_paths {
        for k in 0..batch.num_times() {
            let n = &weights[k] * batch.state(p, k);
            for i in 0..m {
                comps[i].set(p, k, n[i]);
            }
        }
    }
    Ok(comps
        .iter()
        .enumerate()
        .map(|(i, v)| MartingaleDiagnostic::from_values(format!("exp(-beta t) Z_t[{}]", i + 1), v))
        .collect())
}

/// Numerators `E_t[ζ_T]e^{αT}` at grid index `k` for every path, with the
/// common log scale of the form.
fn conditional_numerators(
    model: &LrModel,
    batch: &TrajectoryBatch,
    k: usize,
    maturity: f64,
) -> Result<(Vec<f64>, f64)> {
    let form = DiscountForm::new(model, maturity - batch.time_grid[k])?;
    let nums = (0..batch.num_paths)
        .map(|p| form.scaled_numerator(&batch.state(p, k)))
        .collect();
    Ok((nums, form.log_scale()))
}

fn forward_density_at(
    model: &LrModel,
    batch: &TrajectoryBatch,
    k: usize,
    maturity: f64,
    denominator: (f64, f64),
) -> Result<(Vec<f64>, usize)> {
    // M(t, T) = M(T, T) for t > T
    let k = if batch.time_grid[k] > maturity {
        batch.time_grid.iter().rposition(|&t| t <= maturity).unwrap_or(0)
    } else {
        k
    };
    let (nums, scale) = conditional_numerators(model, batch, k, maturity)?;
    let (den, den_scale) = denominator;
    let factor = if scale == den_scale { 1.0 } else { (scale - den_scale).exp() };
    let invalid = nums.iter().filter(|n| !(**n > 0.0)).count();
    Ok((nums.iter().map(|n| n / den * factor).collect(), invalid))
}

fn forward_denominator(model: &LrModel, batch: &TrajectoryBatch, maturity: f64) -> Result<(f64, f64)> {
    let (nums, scale) = conditional_numerators(model, batch, 0, maturity)?;
    let den = nums.iter().sum::<f64>() / nums.len() as f64;
    if !(den > 0.0) {
        return Err(Error::InvalidState(den));
    }
    Ok((den, scale))
}

/// `M(t, T) = E*_t[ζ_T]/E*[ζ_T]` along every path, with the conditional
/// expectation in closed form and `E*[ζ_T]` averaged over the initial states.
pub fn forward_density(model: &LrModel, batch: &TrajectoryBatch, maturity: f64) -> Result<PathValues> {
    check_batch(model, batch)?;
    if !(maturity >= 0.0) {
        return Err(Error::Argument(format!("maturity must be >= 0, got {maturity}")));
    }
    let den = forward_denominator(model, batch, maturity)?;
    let mut out = PathValues::zeros(batch);
    for k in 0..batch.num_times() {
        let (vals, invalid) = forward_density_at(model, batch, k, maturity, den)?;
        out.invalid += invalid;
        for (p, v) in vals.into_iter().enumerate() {
            out.set(p, k, v);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LongForwardVerdict {
    ConsistentWithLongForward,
    Inconsistent,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LongForwardDiagnostic {
    pub t: f64,
    pub horizons: Vec<f64>,
    pub l1_deviations: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub verdict: LongForwardVerdict,
}

/// Deviations below this are treated as zero.
const L1_FLOOR: f64 = 1e-6;

/// Estimates `E|M(t, T) − 1|` at the last grid time for each horizon.
///
/// The verdict looks at the longest horizon: a deviation within `3·SE + 1e−6`
/// of zero is consistent with a long forward measure; a deviation that is
/// clearly positive and no longer falling significantly (by more than three
/// combined standard errors from the previous horizon) is inconsistent.
/// Anything else is inconclusive.
pub fn long_forward_diagnostic(
    model: &LrModel,
    batch: &TrajectoryBatch,
    horizons: &[f64],
) -> Result<LongForwardDiagnostic> {
    check_batch(model, batch)?;
    if horizons.is_empty() || horizons.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Argument("horizons must be nonempty and increasing".into()));
    }
    let k = batch.num_times() - 1;
    let mut devs = Vec::with_capacity(horizons.len());
    let mut ses = Vec::with_capacity(horizons.len());
    for &maturity in horizons {
        let den = forward_denominator(model, batch, maturity)?;
        let (vals, _) = forward_density_at(model, batch, k, maturity, den)?;
        let abs: Vec<f64> = vals.iter().map(|m| (m - 1.0).abs()).collect();
        let (d, s) = mean_se(&abs);
        devs.push(d);
        ses.push(s);
    }
    let last = devs.len() - 1;
    let verdict = if devs[last] <= 3.0 * ses[last] + L1_FLOOR {
        LongForwardVerdict::ConsistentWithLongForward
    } else if last > 0 && devs[last - 1] - devs[last] <= 3.0 * (ses[last - 1] + ses[last]) {
        LongForwardVerdict::Inconsistent
    } else {
        LongForwardVerdict::Inconclusive
    };
    Ok(LongForwardDiagnostic {
        t: batch.time_grid[k],
        horizons: horizons.to_vec(),
        l1_deviations: devs,
        standard_errors: ses,
        verdict,
    })
}

/// `P(t, T)/P(0, T)` per path at the last grid time, one row per horizon,
/// next to `ζ₀/ζ_t`, its limit under the long forward measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LongBond {
    pub t: f64,
    pub horizons: Vec<f64>,
    pub ratios: Vec<Vec<f64>>,
    pub reference: Vec<f64>,
}

fn log_price(model: &LrModel, form: &DiscountForm, z: &Vector) -> Result<f64> {
    let den = model.density_numerator(z);
    if !(den > 0.0) {
        return Err(Error::InvalidState(den));
    }
    Ok(-model.alpha * form.tau + form.log_numerator(z)? - den.ln())
}

pub fn long_bond(model: &LrModel, batch: &TrajectoryBatch, horizons: &[f64]) -> Result<LongBond> {
    check_batch(model, batch)?;
    let k = batch.num_times() - 1;
    let t = batch.time_grid[k];
    if horizons.iter().any(|&h| !(h >= t)) {
        return Err(Error::Argument(format!("horizons must be at least t = {t}")));
    }
    let mut ratios = Vec::with_capacity(horizons.len());
    for &maturity in horizons {
        let now = DiscountForm::new(model, maturity - t)?;
        let start = DiscountForm::new(model, maturity)?;
        let row = (0..batch.num_paths)
            .map(|p| {
                let a = log_price(model, &now, &batch.state(p, k))?;
                let b = log_price(model, &start, &batch.state(p, 0))?;
                Ok((a - b).exp())
            })
            .collect::<Result<Vec<f64>>>()?;
        ratios.push(row);
    }
    let reference = (0..batch.num_paths)
        .map(|p| model.spd(0.0, &batch.state(p, 0)) / model.spd(t, &batch.state(p, k)))
        .collect();
    Ok(LongBond {
        t,
        horizons: horizons.to_vec(),
        ratios,
        reference,
    })
}

/// Cumulative `L^D_t` with increments `ψᵀ(ΔZ − (b + βZ)Δt)/(φ + ψᵀZ)` taken at
/// the left grid point; increments at a nonpositive density are counted in
/// `invalid` and set to zero. The compensator has an `O(Δt)` bias per unit time,
/// so the observation grid should match the integration step.
pub fn density_logarithm(model: &LrModel, batch: &TrajectoryBatch) -> Result<PathValues> {
    check_batch(model, batch)?;
    let mut out = PathValues::zeros(batch);
    for p in 0..batch.num_paths {
        let mut acc = 0.0;
        for k in 1..batch.num_times() {
            let dt = batch.time_grid[k] - batch.time_grid[k - 1];
            let z = batch.state(p, k - 1);
            let den = model.density_numerator(&z);
            if den > 0.0 {
                let dz = batch.state(p, k) - &z - model.drift(&z) * dt;
                acc += model.psi.dot(&dz) / den;
            } else {
                out.invalid += 1;
            }
            out.set(p, k, acc);
        }
    }
    Ok(out)
}
