//! Batch pipeline around the `deptrigger` library: feature extraction,
//! training, threshold tuning, prediction and evaluation driven by one
//! configuration file.

pub mod commands;
pub mod config;
pub mod error;
pub mod features;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use config::{RunConfig, Split};
pub use error::CliError;

const AFTER_HELP: &str = "\
Configuration:
  --config reads an INI-style file of `key = value` lines under [train], [dev],
  [test], [resources], [features], [params] and [output] sections. Relative
  paths are resolved against the file's directory.

  Any key can be overridden by an environment variable GTRIG_<SECTION>_<KEY>
  (for example GTRIG_PARAMS_M=2) or by --set section.key=value. Flags beat the
  environment, which beats the file.

Parses:
  Each split's `conllu` file holds one block per sentence. With an `index`
  file (two columns: block sent_id or 1-based ordinal, then QuestionID or
  SentenceID) blocks are matched by id. Without one, blocks are aligned by
  position: first every question in order of first appearance, then every
  candidate sentence in file order.";

#[derive(Debug, Parser)]
#[command(name = "deptrigger", version, about = "Answer triggering with dependency-graph alignment features", after_help = AFTER_HELP)]
pub struct Cli {
    /// Configuration file.
    #[arg(short, long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Override one configuration key.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    pub overrides: Vec<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build word, pair and triplet document-frequency tables from the training parses.
    BuildDf,
    /// Write the feature table of one split.
    Featurize {
        #[arg(long, default_value = "train")]
        split: Split,
        /// Output path (default: [<split>] features, else <output.dir>/<split>.features.tsv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the logistic combiner on the training features.
    Train,
    /// Pick the F1-maximizing threshold on the dev features.
    Tune {
        /// Store the tuned threshold in the model file.
        #[arg(long)]
        write: bool,
    },
    /// Write per-pair trigger probabilities.
    Predict {
        #[arg(long, default_value = "test")]
        split: Split,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report MAP, MRR and question-level precision, recall and F1.
    Evaluate {
        #[arg(long, default_value = "test")]
        split: Split,
        /// Use this threshold instead of the model's.
        #[arg(long)]
        threshold: Option<f64>,
        /// Report path (default: <output.dir>/<split>.report.txt).
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

/// Runs one command and returns what it prints on success.
pub fn run<I>(cli: Cli, env: I, cwd: &Path) -> Result<String, CliError>
where
    I: IntoIterator<Item = (String, String)>,
{
    let file = cli.config.as_ref().map(|p| cwd.join(p));
    let cfg = RunConfig::load(file.as_deref(), env, &cli.overrides, cwd)?;
    match cli.command {
        Command::BuildDf => commands::build_df(&cfg),
        Command::Featurize { split, out } => commands::featurize(&cfg, split, out.map(|p| cwd.join(p))),
        Command::Train => commands::train(&cfg),
        Command::Tune { write } => commands::tune(&cfg, write),
        Command::Predict { split, out } => commands::predict(&cfg, split, out.map(|p| cwd.join(p))),
        Command::Evaluate {
            split,
            threshold,
            report,
        } => commands::evaluate(&cfg, split, threshold, report.map(|p| cwd.join(p))),
    }
}
