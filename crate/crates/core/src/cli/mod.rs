//! Command-line front end.
//!
//! Every command writes fixed file names into `--out`. A JSON config
//! (`--config`) supplies defaults keyed by flag name; flags given on the
//! command line win.

mod commands;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::parser::ValueSource;
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

use conceptrel::{Error, Result};

pub use commands::run;

#[derive(Debug, Parser)]
#[command(
    name = "conceptrel",
    version,
    about = "Concept bases, relationship metrics and basis-aided intervention"
)]
pub struct Cli {
    /// Seed for every random choice the command makes.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "conceptrel-out")]
    pub out: PathBuf,
    /// JSON file of flag defaults, e.g. {"seed": 3, "t": 1}.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset directory.
    Gen(GenArgs),
    /// Build a basis or validate an imported basis file.
    Basis(BasisArgs),
    /// Score a basis with the relationship metrics.
    Metrics(MetricsArgs),
    /// Train desk-scale predictors and run intervention sweeps.
    #[command(subcommand)]
    Intervene(InterveneCommand),
    /// Monte Carlo checks of the co-occurrence guarantees.
    #[command(subcommand)]
    Theory(TheoryCommand),
    /// Ward clustering of concept vectors.
    Cluster(ClusterArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Generator {
    /// Two-coordinate mixture with four threshold concepts.
    AppendixI,
    /// Digit/colour one-hot pairs.
    Pairs,
    /// Gaussian-copula concepts with pairwise correlations.
    Weak,
    /// Samples from a profile distribution file.
    Profile,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    pub generator: Generator,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub digits: usize,
    #[arg(long, default_value_t = 1.0)]
    pub rate: f64,
    #[arg(long, default_value_t = 0.2)]
    pub noise: f64,
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    /// Pairwise correlation `i,j,phi` with 1-based indices (repeatable).
    #[arg(long = "pair")]
    pub pairs: Vec<String>,
    /// Profile distribution JSON: {"profiles": [{"pattern": [1, 0], "p": 0.5}, ...]}.
    #[arg(long)]
    pub profiles: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisKind {
    Label,
    C2v,
    Import,
}

#[derive(Debug, Args)]
pub struct BasisArgs {
    pub kind: BasisKind,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub file: Option<PathBuf>,
    #[command(flatten)]
    pub c2v: C2vArgs,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct C2vArgs {
    #[arg(long, default_value_t = 16)]
    pub embed_dim: usize,
    #[arg(long, default_value_t = 25)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.05)]
    pub lr: f64,
    #[arg(long, default_value_t = 1)]
    pub negatives: usize,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// `label`, `c2v`, or a basis file (a fixed basis ignores the data).
    #[arg(long, default_value = "label")]
    pub basis: String,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "stability,robustness,responsiveness,faithfulness"
    )]
    pub metrics: Vec<String>,
    /// Neighbourhood size; defaults to 1 for paired layouts (two equal
    /// concept groups) and 3 otherwise.
    #[arg(long)]
    pub t: Option<usize>,
    #[arg(long, default_value = "euclidean")]
    pub delta_v: String,
    #[arg(long, value_delimiter = ',', default_value = "0.01")]
    pub flip_rates: Vec<f64>,
    /// Feature noise for robustness; defaults to 50/255 of the feature range.
    #[arg(long)]
    pub noise_std: Option<f64>,
    /// Number of seeds (`seed`, `seed + 1`, ...).
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    /// `halves` (concept j pairs with j + k/2) or `1:11,2:12,...`.
    #[arg(long, default_value = "halves")]
    pub pairing: String,
    #[arg(long)]
    pub dataset_name: Option<String>,
    #[command(flatten)]
    pub c2v: C2vArgs,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct PipelineArgs {
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    #[arg(long, default_value_t = 100)]
    pub g_epochs: usize,
    #[arg(long, default_value_t = 0.5)]
    pub g_lr: f64,
    #[arg(long, default_value_t = 200)]
    pub f_epochs: usize,
    #[arg(long, default_value_t = 1.0)]
    pub f_lr: f64,
}

#[derive(Debug, Args)]
pub struct PolicyArgs {
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "predictor_only,basis_hard"
    )]
    pub policies: Vec<String>,
    #[arg(long, default_value_t = 10)]
    pub q: usize,
    /// Distance for basis_hard; basis_weighted always uses cosine.
    #[arg(long, default_value = "euclidean")]
    pub delta_v: String,
}

#[derive(Debug, Subcommand)]
pub enum InterveneCommand {
    /// Intervention sweep over fractions on a dataset directory.
    Sweep(SweepArgs),
    /// Fresh pairs datasets and predictors per correlation rate.
    Correlation(CorrelationArgs),
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "label")]
    pub basis: String,
    #[arg(long, value_delimiter = ',', default_value = "0,0.2,0.4,0.6,0.8,1")]
    pub fractions: Vec<f64>,
    /// Intervene on whole concept groups.
    #[arg(long)]
    pub groups: bool,
    #[arg(long, default_value_t = 3)]
    pub seeds: u64,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[command(flatten)]
    pub c2v: C2vArgs,
}

#[derive(Debug, Args)]
pub struct CorrelationArgs {
    #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
    pub rates: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub digits: usize,
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub noise: f64,
    #[arg(long, default_value_t = 0.5)]
    pub fraction: f64,
    #[arg(long, default_value_t = 3)]
    pub seeds: u64,
    #[arg(long, default_value = "basis_hard")]
    pub policy: String,
    #[arg(long, default_value_t = 10)]
    pub q: usize,
    #[arg(long, default_value = "euclidean")]
    pub delta_v: String,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Debug, Subcommand)]
pub enum TheoryCommand {
    /// Estimation error of the label-basis co-occurrence estimate at n*.
    Theorem1(Theorem1Args),
    /// Regret of noisy co-occurrence argmax against its bound.
    Theorem2(Theorem2Args),
}

#[derive(Debug, Args)]
pub struct Theorem1Args {
    /// Profile distribution JSON; defaults to {(1,1): 0.5, (1,0): 0.5}.
    #[arg(long)]
    pub profiles: Option<PathBuf>,
    #[arg(long, default_value_t = 0.2)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 500)]
    pub trials: usize,
    /// Sample size; defaults to the threshold n*.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct Theorem2Args {
    /// Profile distribution JSON; defaults to a random one with `--random-k` concepts.
    #[arg(long)]
    pub profiles: Option<PathBuf>,
    #[arg(long, default_value_t = 6)]
    pub random_k: usize,
    /// 1-based intervened concepts; defaults to the first half.
    #[arg(long, value_delimiter = ',')]
    pub intervened: Vec<usize>,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[arg(long, conflicts_with = "data")]
    pub basis: Option<PathBuf>,
    /// Cluster the label basis of this dataset directory.
    #[arg(long)]
    pub data: Option<PathBuf>,
}

pub enum ParseError {
    Clap(clap::Error),
    Config(Error),
}

impl From<clap::Error> for ParseError {
    fn from(e: clap::Error) -> Self {
        ParseError::Clap(e)
    }
}

/// Parses `args`, filling flags missing from the command line with values
/// from the `--config` file.
pub fn parse(mut args: Vec<OsString>) -> std::result::Result<Cli, ParseError> {
    let cmd = Cli::command();
    let matches = cmd.clone().try_get_matches_from(&args)?;
    let Some(path) = matches.get_one::<PathBuf>("config").cloned() else {
        return Ok(Cli::from_arg_matches(&matches)?);
    };
    let extra = config_flags(&cmd, &matches, &path).map_err(ParseError::Config)?;
    args.extend(extra);
    let matches = cmd.try_get_matches_from(&args)?;
    Ok(Cli::from_arg_matches(&matches)?)
}

fn config_flags(
    root: &clap::Command,
    matches: &clap::ArgMatches,
    path: &PathBuf,
) -> Result<Vec<OsString>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })?;
    let parse_err = |m: String| Error::Parse {
        path: path.clone(),
        message: m,
    };
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| parse_err(e.to_string()))?;
    let serde_json::Value::Object(entries) = value else {
        return Err(parse_err("config must be a JSON object".into()));
    };

    let mut leaf_cmd = root;
    let mut leaf = matches;
    while let Some((name, sub)) = leaf.subcommand() {
        leaf_cmd = leaf_cmd
            .find_subcommand(name)
            .expect("matched subcommand exists");
        leaf = sub;
    }

    let mut out = Vec::new();
    for (key, v) in entries {
        let id = key.replace('-', "_");
        let global = root.get_arguments().find(|a| a.get_id() == id.as_str());
        let (arg, m) = match global {
            Some(a) => (a, matches),
            None => match leaf_cmd.get_arguments().find(|a| a.get_id() == id.as_str()) {
                Some(a) => (a, leaf),
                None => return Err(parse_err(format!("unknown config key `{key}`"))),
            },
        };
        if id == "config" {
            continue;
        }
        if m.value_source(&id) == Some(ValueSource::CommandLine) {
            continue;
        }
        let Some(long) = arg.get_long() else {
            return Err(parse_err(format!(
                "`{key}` is positional and cannot come from config"
            )));
        };
        let flag = format!("--{long}");
        match v {
            serde_json::Value::Bool(true) => out.push(flag.into()),
            serde_json::Value::Bool(false) | serde_json::Value::Null => {}
            serde_json::Value::Array(items) => {
                let joined: Vec<String> = items.iter().map(scalar).collect::<Result<_>>()?;
                out.push(flag.into());
                out.push(joined.join(",").into());
            }
            other => {
                out.push(flag.into());
                out.push(scalar(&other)?.into());
            }
        }
    }
    Ok(out)
}

fn scalar(v: &serde_json::Value) -> Result<String> {
    match v {
        serde_json::Value::String(s) => Ok(s.clone()),
        serde_json::Value::Number(n) => Ok(n.to_string()),
        serde_json::Value::Bool(b) => Ok(b.to_string()),
        other => Err(Error::InvalidParameter(format!(
            "unsupported config value {other}"
        ))),
    }
}
