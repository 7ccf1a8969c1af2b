//! Command-line front end. [`run`] is the whole program minus process exit, so
//! tests can drive it in-process.

mod scenarios;

pub use scenarios::{scenario, scenarios, FactOutcome, Scenario};

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::error::Error;
use crate::models::{embed_lr_to_lg, validate, Level, LgProcess, LrModel, ModelDocument};
use crate::numerics::{Vector, DEFAULT_TOL};
use crate::pricing::yield_curve;
use crate::simulation::{check_lg_martingale, simulate_with_step, spd_path, uniform_grid};
use crate::structure::{
    analyze, equivalence_certificate, minimal_representation, reduce, reducibility,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_UNKNOWN: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "lrlab", version, about = "Linear-rational term-structure models")]
pub struct Cli {
    /// Relative tolerance for rank and residual decisions.
    #[arg(long, global = true, env = "LRLAB_TOL")]
    pub tol: Option<f64>,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a model file for admissibility.
    Validate { model: PathBuf },
    /// Discount factors and yields as CSV.
    Price {
        model: PathBuf,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t: f64,
        /// State at time t, comma separated; defaults to the initial state.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        state: Option<Vec<f64>>,
        /// Maturities, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        maturities: Vec<f64>,
    },
    /// Structural report as JSON.
    Analyze { model: PathBuf },
    /// Lower-dimensional equivalent model and its equivalence certificate.
    Reduce { model: PathBuf },
    /// Simulated paths as CSV plus diagnostics as JSON.
    Simulate {
        model: PathBuf,
        #[arg(long, default_value_t = 1000)]
        paths: usize,
        /// Observation grid spacing.
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest Euler step; defaults to dt.
        #[arg(long)]
        max_step: Option<f64>,
    },
    /// Run the registered example checks.
    Scenario {
        name: Option<String>,
        #[arg(long, conflicts_with = "name")]
        list: bool,
        #[arg(long, conflicts_with_all = ["name", "list"])]
        all: bool,
    },
}

/// Failure carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::new(EXIT_INPUT, e.to_string())
    }
}

type CmdResult = std::result::Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn tolerance(cli: &Cli) -> std::result::Result<f64, Failure> {
    match cli.tol {
        None => Ok(DEFAULT_TOL),
        Some(t) if t > 0.0 && t < 1.0 => Ok(t),
        Some(t) => Err(Failure::new(EXIT_INPUT, format!("tolerance must lie in (0, 1), got {t}"))),
    }
}

fn load(path: &Path) -> std::result::Result<LrModel, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        let code = if e.kind() == std::io::ErrorKind::NotFound {
            EXIT_UNKNOWN
        } else {
            EXIT_INPUT
        };
        Failure::new(code, format!("{}: {e}", path.display()))
    })?;
    LrModel::from_json(&text).map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn emit(cli: &Cli, stdout: &mut dyn Write, text: &str) -> std::result::Result<(), Failure> {
    match &cli.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Failure::new(EXIT_INPUT, e.to_string())),
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let tol = tolerance(cli)?;
    match &cli.command {
        Command::Validate { model } => {
            let model = load(model)?;
            let report = validate(&model);
            emit(cli, stdout, &pretty(&report))?;
            Ok(if report.worst() == Level::Fail { EXIT_FAILED } else { EXIT_OK })
        }
        Command::Price {
            model,
            t,
            state,
            maturities,
        } => {
            let model = load(model)?;
            let state = state
                .as_ref()
                .map(|s| Vector::from_column_slice(s))
                .unwrap_or_else(|| model.z0.clone());
            let curve = yield_curve(&model, &state, *t, maturities)?;
            emit(cli, stdout, &curve.to_csv())?;
            Ok(EXIT_OK)
        }
        Command::Analyze { model } => {
            let model = load(model)?;
            emit(cli, stdout, &pretty(&analyze(&model, tol)?))?;
            Ok(EXIT_OK)
        }
        Command::Reduce { model } => cmd_reduce(cli, &load(model)?, tol, stdout),
        Command::Simulate {
            model,
            paths,
            dt,
            horizon,
            seed,
            max_step,
        } => {
            let model = load(model)?;
            let grid = uniform_grid(*horizon, *dt)?;
            let batch = simulate_with_step(&model, *paths, &grid, *seed, max_step.unwrap_or(*dt))?;
            let spd = spd_path(&model, &batch)?;
            let lg = embed_lr_to_lg(&model)?;
            let martingale = check_lg_martingale(&lg, &batch.embedded())?;
            let diagnostics = json!({
                "scheme": batch.scheme,
                "num_paths": batch.num_paths,
                "seed": batch.seed,
                "nonpositive_spd": spd.invalid,
                "martingale": martingale,
            });
            emit(cli, stdout, &batch.to_csv(&model)?)?;
            // diagnostics go to stdout when the batch went to a file
            let sink: &mut dyn Write = if cli.out.is_some() { stdout } else { stderr };
            sink.write_all(pretty(&diagnostics).as_bytes())
                .map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))?;
            Ok(EXIT_OK)
        }
        Command::Scenario { name, list, all } => cmd_scenario(cli, name.as_deref(), *list, *all, tol, stdout),
    }
}

/// An LG input is reduced by its reducibility certificate when it has one;
/// otherwise the model is brought to minimal form. The certificate relates the
/// result (first) to the input (second).
fn cmd_reduce(cli: &Cli, model: &LrModel, tol: f64, stdout: &mut dyn Write) -> CmdResult {
    let mut steps: Vec<&str> = Vec::new();
    let mut reduced = None;
    if model.is_lg() && model.dim() > 1 {
        let lg = LgProcess::new(model.clone())?;
        let cert = reducibility(&lg, tol)?;
        if let (Some(v), Some(lambda)) = (cert.v, cert.lambda) {
            reduced = Some(reduce(&lg, &v, lambda, tol)?);
            steps.push("reducible_lg");
        }
    }
    let reduced = match reduced {
        Some(r) => {
            let minimal = minimal_representation(&r, tol)?;
            steps.extend(minimal.steps);
            minimal.model
        }
        None => {
            let minimal = minimal_representation(model, tol)?;
            steps.extend(minimal.steps);
            minimal.model
        }
    };
    let (certificate, code) = match equivalence_certificate(&reduced, model, None, tol.max(1e-9)) {
        Ok(e) => {
            let code = if e.is_equivalent() { EXIT_OK } else { EXIT_FAILED };
            (serde_json::to_value(&e).expect("serializable"), code)
        }
        Err(e) => (json!({ "verdict": "unavailable", "reason": e.to_string() }), EXIT_OK),
    };
    let out = json!({
        "model": ModelDocument::from_model(&reduced),
        "steps": steps,
        "certificate": certificate,
    });
    emit(cli, stdout, &pretty(&out))?;
    Ok(code)
}

fn cmd_scenario(
    cli: &Cli,
    name: Option<&str>,
    list: bool,
    all: bool,
    tol: f64,
    stdout: &mut dyn Write,
) -> CmdResult {
    let mut text = String::new();
    if list || (name.is_none() && !all) {
        for s in scenarios() {
            text.push_str(&format!("{}\t{}\n", s.name, s.anchor));
        }
        emit(cli, stdout, &text)?;
        return Ok(EXIT_OK);
    }
    let selected: Vec<Scenario> = match name {
        Some(n) => vec![scenario(n).ok_or_else(|| Failure::new(EXIT_UNKNOWN, format!("unknown scenario '{n}'")))?],
        None => scenarios(),
    };
    let mut failed = 0;
    for s in &selected {
        for outcome in s.run(tol) {
            let status = if outcome.pass { "ok  " } else { "FAIL" };
            if !outcome.pass {
                failed += 1;
            }
            text.push_str(&format!("{status} {}: {} ({})\n", s.name, outcome.fact, outcome.detail));
        }
    }
    text.push_str(&format!("{failed} failed\n"));
    emit(cli, stdout, &text)?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_FAILED })
}
