use std::io;
use std::path::PathBuf;

use deptrigger::baselines::EmbeddingError;
use deptrigger::combiner::CombinerError;
use deptrigger::corpus::CorpusError;
use deptrigger::eval::EvalError;
use deptrigger::ged::GedError;
use deptrigger::graphsim::DfError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Corpus {
        path: String,
        #[source]
        source: CorpusError,
    },
    #[error(transparent)]
    PosCosts(#[from] GedError),
    #[error(transparent)]
    Df(#[from] DfError),
    #[error(transparent)]
    Embeddings(#[from] EmbeddingError),
    #[error(transparent)]
    Combiner(#[from] CombinerError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{path} line {line}: {message}")]
    FeatureFile {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl CliError {
    /// Short machine-readable tag printed as `error[<category>]`.
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Corpus { .. } => "corpus",
            CliError::PosCosts(_) | CliError::Df(_) | CliError::Embeddings(_) => "resource",
            CliError::Combiner(e) => match e {
                CombinerError::EmptyManifest
                | CombinerError::UnknownFeature(_)
                | CombinerError::MissingResource { .. }
                | CombinerError::MissingScore { .. }
                | CombinerError::Unparsed { .. } => "feature",
                _ => "model",
            },
            CliError::Eval(_) => "eval",
            CliError::FeatureFile { .. } => "features",
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn corpus(path: impl std::fmt::Display, source: CorpusError) -> Self {
        CliError::Corpus {
            path: path.to_string(),
            source,
        }
    }
}
