use serde::Serialize;

use super::{LrModel, StateSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Pass,
    Warn,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Finding {
    pub level: Level,
    pub check: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.findings.iter().all(|f| f.level != Level::Fail)
    }

    pub fn worst(&self) -> Level {
        self.findings.iter().map(|f| f.level).max().unwrap_or(Level::Pass)
    }

    pub fn has(&self, check: &str, level: Level) -> bool {
        self.findings.iter().any(|f| f.check == check && f.level == level)
    }

    fn push(&mut self, level: Level, check: &'static str, message: impl Into<String>) {
        self.findings.push(Finding {
            level,
            check,
            message: message.into(),
        });
    }
}

/// Checks the model invariants and the sign conventions of the declared state
/// space. All findings go into the report.
pub fn validate(model: &LrModel) -> ValidationReport {
    let mut r = ValidationReport { findings: Vec::new() };
    let m = model.dim();
    let psi_zero = model.psi.iter().all(|&x| x == 0.0);

    if model.phi == 0.0 && psi_zero {
        r.push(Level::Fail, "nondegenerate_density", "phi and psi are both zero");
    } else if psi_zero {
        r.push(
            Level::Warn,
            "nondegenerate_density",
            "psi = 0: the short rate is constant and equal to alpha",
        );
    } else {
        r.push(Level::Pass, "nondegenerate_density", "psi is nonzero");
    }

    let zeta0 = model.zeta0();
    if zeta0 > 0.0 {
        r.push(Level::Pass, "initial_density", format!("phi + psi'z0 = {zeta0:e}"));
    } else {
        r.push(
            Level::Fail,
            "initial_density",
            format!("phi + psi'z0 = {zeta0:e} is not positive"),
        );
    }

    match model.state_space {
        StateSpace::NonnegOrthant => {
            if let Some(i) = (0..m).find(|&i| model.psi[i] < 0.0) {
                r.push(
                    Level::Fail,
                    "psi_nonneg",
                    format!("psi[{i}] = {} < 0 on the nonnegative orthant", model.psi[i]),
                );
            } else {
                r.push(Level::Pass, "psi_nonneg", "psi lies in the nonnegative orthant");
            }
            if let Some(i) = (0..m).find(|&i| model.z0[i] < 0.0) {
                r.push(
                    Level::Fail,
                    "z0_in_state_space",
                    format!("z0[{i}] = {} is outside the orthant", model.z0[i]),
                );
            } else {
                r.push(Level::Pass, "z0_in_state_space", "z0 lies in the orthant");
            }
            if model.phi > 0.0 {
                r.push(Level::Pass, "phi_positive", "phi > 0");
            } else {
                r.push(
                    Level::Warn,
                    "phi_positive",
                    "phi <= 0: positivity of the density on the orthant boundary relies on the dynamics",
                );
            }
            let inward_b = (0..m).all(|i| model.b[i] >= 0.0);
            let inward_beta = (0..m).all(|i| (0..m).all(|j| i == j || model.beta[(i, j)] >= 0.0));
            if inward_b && inward_beta {
                r.push(Level::Pass, "inward_drift", "b >= 0 and off-diagonal beta >= 0");
            } else {
                r.push(
                    Level::Warn,
                    "inward_drift",
                    "drift may point out of the orthant (negative b or off-diagonal beta entry)",
                );
            }
        }
        StateSpace::WholeSpace => {
            if psi_zero {
                r.push(Level::Pass, "density_sign", "density is constant");
            } else {
                r.push(
                    Level::Warn,
                    "density_sign",
                    "psi'z is unbounded below on the whole space; positivity relies on the dynamics",
                );
            }
        }
        StateSpace::CustomHalfspace => {
            r.push(
                Level::Pass,
                "density_sign",
                "state space declared inside the half-space psi'z >= 0",
            );
        }
    }

    let d = &model.diffusion;
    for j in 0..d.num_drivers() {
        let arg = d.variance_argument(j, &model.z0);
        if arg < 0.0 {
            r.push(
                Level::Warn,
                "variance_at_z0",
                format!("driver {j} has negative variance argument {arg:e} at z0"),
            );
        }
    }
    r
}
