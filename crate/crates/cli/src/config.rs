//! Command-line flags, the optional TOML config file, and the resolved run.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use homogenizer::{Coupling, Limits, TaskDirection, DEFAULT_EXACT_QUBIT_CAP, DEFAULT_GRID_CAP};
use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};

use crate::Failure;

#[derive(Parser, Debug)]
#[command(name = "homogenizer", version, about = "Deterministic sweeps over the qubit homogenizer")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// epsilon, delta and R over an N x n grid
    Surface,
    /// Same grid, computed by the exact density-matrix engine
    Exact,
    /// Approximate vs exact along N = n = 1..k
    Compare,
    /// Summed reservoir entropy over an N x n grid
    Entropy,
    /// Minimum reservoir size for n uses at accuracy eps
    Resources,
    /// Number of uses an N-qubit machine survives at accuracy eps
    Lifetime,
    /// Possibility verdict from the diagonal N = n = 1..k
    Classify,
    /// Run the acceptance checks
    Selftest,
}

impl Command {
    pub fn label(self) -> &'static str {
        match self {
            Command::Surface => "surface",
            Command::Exact => "exact",
            Command::Compare => "compare",
            Command::Entropy => "entropy",
            Command::Resources => "resources",
            Command::Lifetime => "lifetime",
            Command::Classify => "classify",
            Command::Selftest => "selftest",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectionArg {
    P2m,
    M2p,
    Both,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineArg {
    Approx,
    Exact,
    Both,
}

impl EngineArg {
    pub fn label(self) -> &'static str {
        match self {
            EngineArg::Approx => "approx",
            EngineArg::Exact => "exact",
            EngineArg::Both => "both",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Inclusive integer range written `a..b`, `a..=b` or `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Span {
    pub lo: usize,
    pub hi: usize,
}

impl Span {
    pub fn iter(self) -> std::ops::RangeInclusive<usize> {
        self.lo..=self.hi
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

impl FromStr for Span {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("'{s}' is not a range like 1..60"))
        };
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.strip_prefix('=').unwrap_or(b))?),
            None => {
                let v = parse(s)?;
                (v, v)
            }
        };
        if lo > hi {
            return Err(format!("range '{s}' is empty"));
        }
        Ok(Span { lo, hi })
    }
}

impl<'de> Deserialize<'de> for Span {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(usize),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(Span { lo: v, hi: v }),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<f64>>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        One(f64),
        Many(Vec<f64>),
    }
    Ok(Some(match Raw::deserialize(d)? {
        Raw::One(v) => vec![v],
        Raw::Many(v) => v,
    }))
}

/// Flags shared by every subcommand. The config file uses the same names.
#[derive(Args, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Options {
    /// Task direction
    #[arg(long, global = true, value_enum)]
    pub direction: Option<DirectionArg>,
    /// Coupling strengths, comma separated, each in (0, pi/2]
    #[arg(long, global = true, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub eta: Option<Vec<f64>>,
    /// Reservoir sizes, e.g. 1..60
    #[arg(long = "N", global = true, value_name = "RANGE")]
    #[serde(rename = "N")]
    pub reservoir: Option<Span>,
    /// Iteration counts, e.g. 1..60
    #[arg(long = "n", global = true, value_name = "RANGE")]
    #[serde(rename = "n")]
    pub iterations: Option<Span>,
    /// Accuracy threshold epsilon*
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Largest diagonal point N = n = k
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Engine used by `surface`
    #[arg(long, global = true, value_enum)]
    pub engine: Option<EngineArg>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when absent
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Flat TOML file with the same keys as the flags; flags win
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Worker threads; 0 or absent uses all cores
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Cap on N * n for recurrence runs
    #[arg(long, global = true)]
    pub grid_cap: Option<usize>,
    /// Cap on N for the exact engine
    #[arg(long, global = true)]
    pub exact_cap: Option<usize>,
}

impl Options {
    fn or(self, file: Options) -> Options {
        Options {
            direction: self.direction.or(file.direction),
            eta: self.eta.or(file.eta),
            reservoir: self.reservoir.or(file.reservoir),
            iterations: self.iterations.or(file.iterations),
            eps: self.eps.or(file.eps),
            k: self.k.or(file.k),
            engine: self.engine.or(file.engine),
            format: self.format.or(file.format),
            output: self.output.or(file.output),
            config: self.config,
            threads: self.threads.or(file.threads),
            grid_cap: self.grid_cap.or(file.grid_cap),
            exact_cap: self.exact_cap.or(file.exact_cap),
        }
    }
}

fn read_config_file(path: &Path) -> Result<Options, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::Usage(format!("bad config {}: {e}", path.display())))
}

/// A fully resolved run. Everything except the output path and the thread
/// count enters the config hash.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub directions: Vec<TaskDirection>,
    pub etas: Vec<f64>,
    pub reservoir: Option<Span>,
    pub iterations: Option<Span>,
    pub epsilon_star: Option<f64>,
    pub k: Option<usize>,
    pub engine: EngineArg,
    pub format: Format,
    pub grid_cap: usize,
    pub exact_cap: usize,
    #[serde(skip)]
    pub output: Option<PathBuf>,
    #[serde(skip)]
    pub threads: usize,
}

fn usage<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

impl RunConfig {
    pub fn resolve(cli: Cli) -> Result<RunConfig, Failure> {
        let command = cli.command;
        let options = match cli.options.config.clone() {
            Some(path) => {
                let file = read_config_file(&path)?;
                cli.options.or(file)
            }
            None => cli.options,
        };

        let directions = match options.direction.unwrap_or(DirectionArg::Both) {
            DirectionArg::P2m => vec![TaskDirection::PureToMixed],
            DirectionArg::M2p => vec![TaskDirection::MixedToPure],
            DirectionArg::Both => TaskDirection::BOTH.to_vec(),
        };

        let mut etas = options.eta.unwrap_or_default();
        for &eta in &etas {
            Coupling::new(eta).map_err(|e| Failure::Usage(e.to_string()))?;
        }
        etas.sort_by(f64::total_cmp);
        etas.dedup();

        let engine = match (command, options.engine) {
            (Command::Exact, None | Some(EngineArg::Exact)) => EngineArg::Exact,
            (Command::Exact, Some(other)) => {
                return usage(format!("`exact` always uses the exact engine, got --engine {}", other.label()))
            }
            (Command::Surface, e) => e.unwrap_or(EngineArg::Approx),
            (_, None | Some(EngineArg::Approx)) => EngineArg::Approx,
            (_, Some(other)) => {
                return usage(format!("--engine {} only applies to `surface`", other.label()))
            }
        };

        let config = RunConfig {
            command,
            directions,
            etas,
            reservoir: options.reservoir,
            iterations: options.iterations,
            epsilon_star: options.eps,
            k: options.k,
            engine,
            format: options.format.unwrap_or(Format::Csv),
            grid_cap: options.grid_cap.unwrap_or(DEFAULT_GRID_CAP),
            exact_cap: options.exact_cap.unwrap_or(DEFAULT_EXACT_QUBIT_CAP),
            output: options.output,
            threads: options.threads.unwrap_or(0),
        };
        config.check_required()?;
        Ok(config)
    }

    fn check_required(&self) -> Result<(), Failure> {
        let cmd = self.command.label();
        let need_etas = self.command != Command::Selftest;
        if need_etas && self.etas.is_empty() {
            return usage(format!("`{cmd}` needs --eta"));
        }
        let (reservoir, iterations, eps, k) = match self.command {
            Command::Surface | Command::Exact | Command::Entropy => (true, true, false, false),
            Command::Compare | Command::Classify => (false, false, false, true),
            Command::Resources => (false, true, true, false),
            Command::Lifetime => (true, false, true, false),
            Command::Selftest => (false, false, false, false),
        };
        if reservoir && self.reservoir.is_none() {
            return usage(format!("`{cmd}` needs --N"));
        }
        if iterations && self.iterations.is_none() {
            return usage(format!("`{cmd}` needs --n"));
        }
        if eps && self.epsilon_star.is_none() {
            return usage(format!("`{cmd}` needs --eps"));
        }
        if k && self.k.is_none() {
            return usage(format!("`{cmd}` needs --k"));
        }
        if self.reservoir.is_some_and(|s| s.lo == 0) {
            return usage("--N must start at 1 or above");
        }
        // Zero iterations is meaningful only for the entropy surface.
        if self.command != Command::Entropy && self.iterations.is_some_and(|s| s.lo == 0) {
            return usage("--n must start at 1 or above");
        }
        Ok(())
    }

    pub fn limits(&self) -> Limits {
        Limits {
            grid_cap: self.grid_cap,
            exact_qubit_cap: self.exact_cap,
        }
    }

    /// Hex SHA-256 of the canonical JSON form of the resolved config.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(canonical.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
