//! Command-line front end: reads a tensor file, runs one analysis and
//! writes a JSON report.
//!
//! Exit status is 0 when a report was produced (including cycles and
//! context-dependent limits), 1 for unreadable or invalid input and bad
//! flags, 2 when a budget or capacity limit stopped the computation.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use hmarkov::classify::classify;
use hmarkov::format::{outcome_to_json, parse_joint, parse_tensor, reduced_to_json};
use hmarkov::limits::{
    evolve, kstep, limit_tensor, limiting_distribution_eig, LimitKind, DEFAULT_CYCLE_WINDOW,
    DEFAULT_LIMIT_TOL, DEFAULT_MAX_ITER,
};
use hmarkov::reduced::build_reduced;
use hmarkov::simulate::{empirical_distribution, sample_path};
use hmarkov::tensor::DEFAULT_STOCHASTIC_TOL;
use hmarkov::{Caps, Error, JointDistribution, LimitOptions, MultiIndex, StochasticTensor};
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_LIMIT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "hmarkov",
    version,
    about = "Analyse higher-order Markov chains"
)]
pub struct CommandConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check entries and fiber sums; exits 1 when the tensor is not stochastic.
    Validate(CommonArgs),
    /// Transition matrix of the reduced first-order chain.
    Reduce(CommonArgs),
    /// The k-step transition tensor.
    Power {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        k: usize,
    },
    /// Irreducibility, ergodicity and regularity with witnesses.
    Classify(CommonArgs),
    /// Limit of the k-step tensors.
    Limit {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        iteration: IterationArgs,
    },
    /// Marginal distributions of the next states.
    Evolve {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        steps: u64,
        /// Joint distribution file, or the first m-1 states oldest first
        /// (e.g. `1,2`). Defaults to the uniform distribution.
        #[arg(long)]
        initial: Option<String>,
    },
    /// Sample a trajectory and its empirical distribution.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of states drawn after the initial history.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        steps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Leading positions of the trajectory left out of the empirical
        /// distribution.
        #[arg(long, default_value_t = 0)]
        burn_in: usize,
        /// First m-1 states, oldest first. Defaults to all ones.
        #[arg(long)]
        initial: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Tensor JSON file.
    pub input: PathBuf,
    /// Write the report here instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Tolerance for entry ranges and fiber sums.
    #[arg(long, default_value_t = DEFAULT_STOCHASTIC_TOL, value_parser = positive_f64)]
    pub stoch_tol: f64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_entries: Option<u64>,
    /// Largest allowed side of the reduced matrix.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_side: Option<u64>,
    /// Largest state count for subset enumeration.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_subset_states: Option<u64>,
    /// Steps allowed when looking for a repeated pattern.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub pattern_budget: Option<u64>,
}

#[derive(Debug, Args)]
pub struct IterationArgs {
    #[arg(long, default_value_t = DEFAULT_LIMIT_TOL, value_parser = positive_f64)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER, value_parser = positive_usize)]
    pub max_iter: usize,
    /// Past iterates compared against when looking for cycles.
    #[arg(long, default_value_t = DEFAULT_CYCLE_WINDOW, value_parser = positive_usize)]
    pub window: usize,
    /// Confirming steps before a limit or cycle is reported. Defaults to 2m.
    #[arg(long, value_parser = positive_usize)]
    pub patience: Option<usize>,
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(_) => Err(format!("{s} is not a positive number")),
        Err(e) => Err(e.to_string()),
    }
}

fn positive_usize(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `args` (program name first) and runs the command.
pub fn run_from_args<I, T>(args: I) -> RunOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match CommandConfig::try_parse_from(args) {
        Ok(config) => run(&config),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let (stdout, stderr) = if e.use_stderr() {
                (String::new(), text)
            } else {
                (text, String::new())
            };
            RunOutput {
                code,
                stdout,
                stderr,
            }
        }
    }
}

enum Failure {
    Core(Error),
    Io(String),
    /// A report was produced but the command still fails.
    Rejected(Value, String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

pub fn run(config: &CommandConfig) -> RunOutput {
    let common = config.common();
    let (report, code, stderr) = match execute(config) {
        Ok(v) => (Some(v), EXIT_OK, String::new()),
        Err(Failure::Core(e)) => {
            let code = if e.is_resource_limit() {
                EXIT_LIMIT
            } else {
                EXIT_INPUT
            };
            (None, code, format!("error: {e}\n"))
        }
        Err(Failure::Io(msg)) => (None, EXIT_INPUT, format!("error: {msg}\n")),
        Err(Failure::Rejected(v, msg)) => (Some(v), EXIT_INPUT, format!("error: {msg}\n")),
    };
    let Some(report) = report else {
        return RunOutput {
            code,
            stdout: String::new(),
            stderr,
        };
    };
    let mut text = serde_json::to_string_pretty(&report).expect("reports serialize");
    text.push('\n');
    match &common.output {
        None => RunOutput {
            code,
            stdout: text,
            stderr,
        },
        Some(path) => match std::fs::write(path, &text) {
            Ok(()) => RunOutput {
                code,
                stdout: String::new(),
                stderr,
            },
            Err(e) => RunOutput {
                code: EXIT_INPUT,
                stdout: String::new(),
                stderr: format!("{stderr}error: cannot write {}: {e}\n", path.display()),
            },
        },
    }
}

impl CommandConfig {
    fn common(&self) -> &CommonArgs {
        match &self.command {
            Command::Validate(c) | Command::Reduce(c) | Command::Classify(c) => c,
            Command::Power { common, .. }
            | Command::Limit { common, .. }
            | Command::Evolve { common, .. }
            | Command::Simulate { common, .. } => common,
        }
    }
}

impl CommonArgs {
    fn caps(&self) -> Caps {
        let mut caps = Caps::default();
        if let Some(v) = self.max_entries {
            caps.max_entries = v as usize;
        }
        if let Some(v) = self.max_side {
            caps.max_reduced_side = v as usize;
        }
        if let Some(v) = self.max_subset_states {
            caps.max_subset_states = v as usize;
        }
        if let Some(v) = self.pattern_budget {
            caps.pattern_budget = Some(v as usize);
        }
        caps
    }

    fn read_tensor(&self) -> Result<StochasticTensor, Failure> {
        let text = read_file(&self.input)?;
        Ok(parse_tensor(&text, &self.caps())?)
    }

    fn read_stochastic(&self) -> Result<StochasticTensor, Failure> {
        let t = self.read_tensor()?;
        t.require_stochastic(self.stoch_tol)?;
        Ok(t)
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))
}

/// `1,2,3` or `(1,2,3)`; `None` when the text is not of that shape.
fn parse_history(text: &str) -> Option<Vec<usize>> {
    let inner = text.trim();
    let inner = inner
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .unwrap_or(inner);
    inner
        .split(',')
        .map(|s| s.trim().parse::<usize>().ok())
        .collect()
}

fn history_literal(text: &str, t: &StochasticTensor) -> Result<MultiIndex, Failure> {
    let states = parse_history(text).ok_or_else(|| {
        Failure::Core(Error::Argument(format!(
            "initial history {text:?} is not a comma-separated list of states"
        )))
    })?;
    if states.len() != t.order() - 1 {
        return Err(Error::Argument(format!(
            "initial history has {} states, expected {}",
            states.len(),
            t.order() - 1
        ))
        .into());
    }
    Ok(MultiIndex::new(states, t.dim())?)
}

fn execute(config: &CommandConfig) -> Result<Value, Failure> {
    match &config.command {
        Command::Validate(common) => {
            let t = common.read_tensor()?;
            let report = t.validate(common.stoch_tol);
            let value = json!({ "valid": report.is_valid(), "report": report });
            if report.is_valid() {
                Ok(value)
            } else {
                let msg = Error::NotStochastic(Box::new(report)).to_string();
                Err(Failure::Rejected(value, msg))
            }
        }
        Command::Reduce(common) => {
            let t = common.read_stochastic()?;
            Ok(reduced_to_json(&build_reduced(&t, &common.caps())?))
        }
        Command::Power { common, k } => {
            let t = common.read_stochastic()?;
            Ok(json!(kstep(&t, *k)?))
        }
        Command::Classify(common) => {
            let t = common.read_stochastic()?;
            Ok(json!(classify(&t, &common.caps())?))
        }
        Command::Limit { common, iteration } => {
            let t = common.read_stochastic()?;
            let opts = LimitOptions {
                tol: iteration.tol,
                max_iter: iteration.max_iter,
                window: iteration.window,
                patience: iteration.patience,
                stoch_tol: common.stoch_tol,
                caps: common.caps(),
            };
            let outcome = limit_tensor(&t, &opts)?;
            let mut value = outcome_to_json(&outcome);
            if let LimitKind::RankOne { pi, .. } = &outcome.kind {
                let eig = limiting_distribution_eig(&t, &opts)?;
                let obj = value.as_object_mut().expect("object");
                obj.insert("pi_limit".into(), json!(pi));
                obj.insert("pi_eig".into(), json!(eig));
            }
            Ok(value)
        }
        Command::Evolve {
            common,
            steps,
            initial,
        } => {
            let t = common.read_stochastic()?;
            let (order, dim) = (t.order(), t.dim());
            let y = match initial {
                None => JointDistribution::uniform(order, dim)?,
                Some(text) if parse_history(text).is_some() => {
                    JointDistribution::from_history(order, dim, &history_literal(text, &t)?)?
                }
                Some(path) => parse_joint(&read_file(Path::new(path))?, common.stoch_tol)?,
            };
            let xs = evolve(&t, &y, *steps as usize)?;
            let first = order;
            let records: Vec<Value> = xs
                .iter()
                .enumerate()
                .map(|(k, x)| json!({ "t": first + k, "x": x }))
                .collect();
            Ok(json!({ "order": order, "dim": dim, "marginals": records }))
        }
        Command::Simulate {
            common,
            steps,
            seed,
            burn_in,
            initial,
        } => {
            let t = common.read_stochastic()?;
            let lag = t.order() - 1;
            let history = match initial {
                Some(text) => history_literal(text, &t)?,
                None => MultiIndex::new(vec![1; lag], t.dim())?,
            };
            let length = lag
                .checked_add(*steps as usize)
                .ok_or_else(|| Error::Argument("trajectory length overflows".into()))?;
            if *burn_in >= length {
                return Err(Error::Argument(format!(
                    "burn-in {burn_in} leaves nothing of a trajectory of length {length}"
                ))
                .into());
            }
            let traj = sample_path(&t, &history, length, *seed)?;
            let emp = empirical_distribution(&traj, *burn_in)?;
            Ok(json!({ "trajectory": traj, "burn_in": burn_in, "empirical": emp }))
        }
    }
}
