//! Run configuration: an INI-style file, then `GTRIG_*` environment
//! variables, then `--set section.key=value` flags, later sources winning.
//!
//! Relative paths in the file resolve against the file's directory; relative
//! paths from the environment or flags resolve against the working directory.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use deptrigger::baselines::{Bm25Params, SEMANTIC_THRESHOLD};
use deptrigger::combiner::{TrainParams, DEFAULT_THRESHOLD};
use deptrigger::graphsim::{Alphas, Level};
use deptrigger::{Feature, FeatureManifest};
use ini::{Ini, ParseOption};

use crate::error::CliError;

pub const ENV_PREFIX: &str = "GTRIG_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Dev, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Split::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown split {s:?} (expected train, dev or test)"))
    }
}

const SPLIT_KEYS: &[&str] = &["wikiqa", "conllu", "index", "scores", "features"];
const RESOURCE_KEYS: &[&str] = &["embeddings", "df_word", "df_pair", "df_triplet", "pos_costs", "model"];
const FEATURE_KEYS: &[&str] = &["manifest", "baselines"];
const PARAM_KEYS: &[&str] = &[
    "alpha_word",
    "alpha_pair",
    "alpha_triplet",
    "m",
    "k1",
    "b",
    "n_max",
    "lr",
    "epochs",
    "l2",
    "seed",
    "threshold",
    "edge_weight",
    "del_cost",
    "sem_threshold",
    "bm25_threshold",
    "ngram_threshold",
];
const OUTPUT_KEYS: &[&str] = &["dir"];

fn known_keys(section: &str) -> Option<&'static [&'static str]> {
    match section {
        "train" | "dev" | "test" => Some(SPLIT_KEYS),
        "resources" => Some(RESOURCE_KEYS),
        "features" => Some(FEATURE_KEYS),
        "params" => Some(PARAM_KEYS),
        "output" => Some(OUTPUT_KEYS),
        _ => None,
    }
}

#[derive(Debug, Clone)]
struct Value {
    text: String,
    /// Directory that relative paths in `text` are resolved against.
    base: PathBuf,
}

/// Flat `(section, key) -> value` map with source-aware path resolution.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    values: BTreeMap<(String, String), Value>,
}

impl RawConfig {
    fn set(&mut self, section: &str, key: &str, text: &str, base: &Path, origin: &str) -> Result<(), CliError> {
        let keys = known_keys(section)
            .ok_or_else(|| CliError::Config(format!("{origin}: unknown section [{section}]")))?;
        if !keys.contains(&key) {
            return Err(CliError::Config(format!(
                "{origin}: unknown key {key:?} in [{section}]"
            )));
        }
        self.values.insert(
            (section.to_string(), key.to_string()),
            Value {
                text: text.trim().to_string(),
                base: base.to_path_buf(),
            },
        );
        Ok(())
    }

    pub fn parse_file(&mut self, path: &Path) -> Result<(), CliError> {
        let content = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        self.parse_str(&content, &base, &path.display().to_string())
    }

    pub fn parse_str(&mut self, content: &str, base: &Path, origin: &str) -> Result<(), CliError> {
        let opts = ParseOption {
            enabled_escape: false,
            ..ParseOption::default()
        };
        let ini = Ini::load_from_str_opt(content, opts)
            .map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
        for (section, props) in ini.iter() {
            for (key, value) in props.iter() {
                match section {
                    Some(s) => self.set(s, key, value, base, origin)?,
                    None => {
                        return Err(CliError::Config(format!(
                            "{origin}: key {key:?} appears before any [section]"
                        )))
                    }
                }
            }
        }
        Ok(())
    }

    /// Applies `GTRIG_<SECTION>_<KEY>` variables; other variables are ignored.
    pub fn apply_env<I: IntoIterator<Item = (String, String)>>(&mut self, vars: I, cwd: &Path) -> Result<(), CliError> {
        let mut vars: Vec<(String, String)> = vars
            .into_iter()
            .filter(|(k, _)| k.starts_with(ENV_PREFIX))
            .collect();
        vars.sort();
        for (name, value) in vars {
            let rest = name[ENV_PREFIX.len()..].to_lowercase();
            let (section, key) = rest
                .split_once('_')
                .ok_or_else(|| CliError::Config(format!("{name}: expected {ENV_PREFIX}<SECTION>_<KEY>")))?;
            self.set(section, key, &value, cwd, &name)?;
        }
        Ok(())
    }

    /// Applies one `section.key=value` override.
    pub fn apply_override(&mut self, item: &str, cwd: &Path) -> Result<(), CliError> {
        let origin = format!("--set {item}");
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("{origin}: expected section.key=value")))?;
        let (section, key) = name
            .trim()
            .split_once('.')
            .ok_or_else(|| CliError::Config(format!("{origin}: expected section.key=value")))?;
        self.set(section, key, value, cwd, &origin)
    }

    fn text(&self, section: &str, key: &str) -> Option<&str> {
        self.values
            .get(&(section.to_string(), key.to_string()))
            .map(|v| v.text.as_str())
            .filter(|s| !s.is_empty())
    }

    /// Like `text`, but keeps a key that is present with an empty value.
    fn raw_text(&self, section: &str, key: &str) -> Option<&str> {
        self.values
            .get(&(section.to_string(), key.to_string()))
            .map(|v| v.text.as_str())
    }

    fn path(&self, section: &str, key: &str) -> Option<PathBuf> {
        let v = self.values.get(&(section.to_string(), key.to_string()))?;
        if v.text.is_empty() {
            return None;
        }
        Some(v.base.join(&v.text))
    }

    fn number<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        match self.text("params", key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| CliError::Config(format!("params.{key}: {s:?} is not a valid number"))),
        }
    }

    fn optional_number(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.text("params", key)
            .map(|s| {
                s.parse()
                    .map_err(|_| CliError::Config(format!("params.{key}: {s:?} is not a valid number")))
            })
            .transpose()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SplitPaths {
    pub wikiqa: Option<PathBuf>,
    pub conllu: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub scores: Option<PathBuf>,
    pub features: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub alphas: Alphas,
    pub max_path_edges: usize,
    pub bm25: Bm25Params,
    pub n_max: usize,
    pub train: TrainParams,
    pub threshold: f64,
    pub edge_weight: f64,
    pub del_cost: f64,
    pub sem_threshold: f64,
    pub bm25_threshold: Option<f64>,
    pub ngram_threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub splits: BTreeMap<Split, SplitPaths>,
    pub embeddings: Option<PathBuf>,
    pub df: BTreeMap<Level, PathBuf>,
    pub pos_costs: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub manifest: FeatureManifest,
    /// Baseline scorers written to feature files and reported by `evaluate`.
    pub baselines: Vec<Feature>,
    pub params: Params,
    pub output_dir: PathBuf,
}

impl RunConfig {
    /// Builds a configuration from an optional file, environment variables
    /// and `--set` overrides.
    pub fn load<I>(file: Option<&Path>, env: I, overrides: &[String], cwd: &Path) -> Result<Self, CliError>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut raw = RawConfig::default();
        if let Some(path) = file {
            raw.parse_file(path)?;
        }
        raw.apply_env(env, cwd)?;
        for o in overrides {
            raw.apply_override(o, cwd)?;
        }
        let default_base = file
            .and_then(Path::parent)
            .map(Path::to_path_buf)
            .unwrap_or_else(|| cwd.to_path_buf());
        Self::from_raw(&raw, &default_base)
    }

    pub fn from_raw(raw: &RawConfig, default_base: &Path) -> Result<Self, CliError> {
        let splits = Split::ALL
            .into_iter()
            .map(|s| {
                let n = s.name();
                let paths = SplitPaths {
                    wikiqa: raw.path(n, "wikiqa"),
                    conllu: raw.path(n, "conllu"),
                    index: raw.path(n, "index"),
                    scores: raw.path(n, "scores"),
                    features: raw.path(n, "features"),
                };
                (s, paths)
            })
            .collect();
        let df = Level::ALL
            .into_iter()
            .filter_map(|l| raw.path("resources", &format!("df_{}", l.name())).map(|p| (l, p)))
            .collect();
        let manifest = match raw.raw_text("features", "manifest") {
            Some(list) => FeatureManifest::parse(list)?,
            None => FeatureManifest::default(),
        };
        let baselines = match raw.text("features", "baselines") {
            Some(list) => {
                let parsed = FeatureManifest::parse(list)?;
                if let Some(f) = parsed.features().iter().find(|f| !f.is_baseline()) {
                    return Err(CliError::Config(format!(
                        "features.baselines: {f} is not a baseline (expected bm25, ngram or semvec)"
                    )));
                }
                parsed.features().to_vec()
            }
            None => Vec::new(),
        };

        let defaults = TrainParams::default();
        let params = Params {
            alphas: Alphas {
                word: raw.number("alpha_word", Alphas::default().word)?,
                pair: raw.number("alpha_pair", Alphas::default().pair)?,
                triplet: raw.number("alpha_triplet", Alphas::default().triplet)?,
            },
            max_path_edges: raw.number("m", 3usize)?,
            bm25: Bm25Params {
                k1: raw.number("k1", Bm25Params::default().k1)?,
                b: raw.number("b", Bm25Params::default().b)?,
            },
            n_max: raw.number("n_max", 3usize)?,
            train: TrainParams {
                learning_rate: raw.number("lr", defaults.learning_rate)?,
                epochs: raw.number("epochs", defaults.epochs)?,
                l2: raw.number("l2", defaults.l2)?,
                seed: raw.number("seed", defaults.seed)?,
            },
            threshold: raw.number("threshold", DEFAULT_THRESHOLD)?,
            edge_weight: raw.number("edge_weight", 0.5)?,
            del_cost: raw.number("del_cost", 1.0)?,
            sem_threshold: raw.number("sem_threshold", SEMANTIC_THRESHOLD)?,
            bm25_threshold: raw.optional_number("bm25_threshold")?,
            ngram_threshold: raw.optional_number("ngram_threshold")?,
        };
        params.validate()?;

        Ok(RunConfig {
            splits,
            embeddings: raw.path("resources", "embeddings"),
            df,
            pos_costs: raw.path("resources", "pos_costs"),
            model: raw.path("resources", "model"),
            manifest,
            baselines,
            params,
            output_dir: raw.path("output", "dir").unwrap_or_else(|| default_base.join("out")),
        })
    }

    pub fn split(&self, split: Split) -> &SplitPaths {
        &self.splits[&split]
    }

    /// Manifest features followed by any extra baselines, in canonical order.
    pub fn extraction_manifest(&self) -> FeatureManifest {
        FeatureManifest::new(self.manifest.features().iter().chain(&self.baselines).copied())
    }

    pub fn features_path(&self, split: Split) -> PathBuf {
        self.split(split)
            .features
            .clone()
            .unwrap_or_else(|| self.output_dir.join(format!("{split}.features.tsv")))
    }

    pub fn model_path(&self) -> PathBuf {
        self.model.clone().unwrap_or_else(|| self.output_dir.join("model.txt"))
    }

    /// Where `build-df` writes a table when no path is configured.
    pub fn df_output_path(&self, level: Level) -> PathBuf {
        self.df
            .get(&level)
            .cloned()
            .unwrap_or_else(|| self.output_dir.join(format!("df_{}.tsv", level.name())))
    }
}

impl Params {
    fn validate(&self) -> Result<(), CliError> {
        let check = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(CliError::Config(format!("params.{what}")))
            }
        };
        let a = &self.alphas;
        check(a.word >= 0.0, "alpha_word must be >= 0")?;
        check(a.pair >= 0.0, "alpha_pair must be >= 0")?;
        check(a.triplet >= 0.0, "alpha_triplet must be >= 0")?;
        check(self.bm25.k1 >= 0.0, "k1 must be >= 0")?;
        check((0.0..=1.0).contains(&self.bm25.b), "b must lie in [0, 1]")?;
        check(self.n_max >= 1, "n_max must be >= 1")?;
        check(self.train.learning_rate > 0.0, "lr must be > 0")?;
        check(self.train.l2 >= 0.0, "l2 must be >= 0")?;
        check(self.threshold.is_finite(), "threshold must be finite")?;
        check(self.edge_weight >= 0.0, "edge_weight must be >= 0")?;
        check(self.del_cost >= 0.0, "del_cost must be >= 0")?;
        check(self.sem_threshold.is_finite(), "sem_threshold must be finite")?;
        Ok(())
    }
}
