use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use deptrigger::baselines::EmbeddingTable;
use deptrigger::combiner::{self, FeatureExtractor, Resources, TriggerModel};
use deptrigger::corpus::{self, QuestionGroup};
use deptrigger::eval::{triggering_report, tune_threshold, EvalReport, ScoredGroup};
use deptrigger::ged::{GedConfig, PosCostTable};
use deptrigger::graphsim::{DfTable, DfTables, Level};
use deptrigger::{DependencyGraph, Feature, FeatureManifest};

use crate::config::{RunConfig, Split};
use crate::error::CliError;
use crate::features::{FeatureRow, FeatureTable};

fn create_parent(path: &Path) -> Result<(), CliError> {
    match path.parent().filter(|d| !d.as_os_str().is_empty()) {
        Some(dir) => fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e)),
        None => Ok(()),
    }
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    create_parent(path)?;
    fs::write(path, content).map_err(|e| CliError::io(path, e))
}

/// Loads a split's questions and, when `with_parses`, attaches its CoNLL-U
/// parses (through the index file if one is configured).
pub fn load_split(cfg: &RunConfig, split: Split, with_parses: bool) -> Result<Vec<QuestionGroup>, CliError> {
    let paths = cfg.split(split);
    let tsv = paths
        .wikiqa
        .as_ref()
        .ok_or_else(|| CliError::Config(format!("[{split}] wikiqa is not set")))?;
    let groups = corpus::load_wikiqa(tsv).map_err(|e| CliError::corpus(tsv.display(), e))?;
    if !with_parses {
        return Ok(groups);
    }
    let conllu = paths
        .conllu
        .as_ref()
        .ok_or_else(|| CliError::Config(format!("[{split}] conllu is not set but graph features need parses")))?;
    corpus::attach_parses(groups, conllu, paths.index.as_deref())
        .map_err(|e| CliError::corpus(conllu.display(), e))
}

fn split_graphs(groups: &[QuestionGroup]) -> Vec<DependencyGraph> {
    groups
        .iter()
        .flat_map(|g| std::iter::once(&g.question).chain(g.candidates.iter().map(|c| &c.sentence)))
        .map(DependencyGraph::build)
        .collect()
}

fn train_df_tables(cfg: &RunConfig) -> Result<DfTables, CliError> {
    let groups = load_split(cfg, Split::Train, true)?;
    let graphs = split_graphs(&groups);
    Ok(DfTables::build(graphs.iter())?)
}

/// Writes word, pair and triplet DF tables built from the training parses.
pub fn build_df(cfg: &RunConfig) -> Result<String, CliError> {
    let tables = train_df_tables(cfg)?;
    let mut out = String::new();
    for level in Level::ALL {
        let path = cfg.df_output_path(level);
        let table = tables.get(level);
        let mut buf = Vec::new();
        table.write(&mut buf).map_err(|e| CliError::io(&path, e))?;
        write_file(&path, &String::from_utf8(buf).expect("DF tables are UTF-8"))?;
        writeln!(out, "{level}: {} keys over {} documents -> {}", table.df.len(), table.n_docs, path.display()).unwrap();
    }
    Ok(out)
}

fn df_tables(cfg: &RunConfig) -> Result<DfTables, CliError> {
    match cfg.df.len() {
        0 => train_df_tables(cfg),
        3 => {
            let load = |level| DfTable::load(&cfg.df[&level], level);
            Ok(DfTables {
                word: load(Level::Word)?,
                pair: load(Level::Pair)?,
                triplet: load(Level::Triplet)?,
            })
        }
        _ => Err(CliError::Config(
            "set all of resources.df_word, df_pair and df_triplet, or none of them".into(),
        )),
    }
}

/// Loads exactly the resources the enabled features use.
pub fn resources(cfg: &RunConfig, manifest: &FeatureManifest, split: Split) -> Result<Resources, CliError> {
    let p = &cfg.params;
    let pos_costs = match &cfg.pos_costs {
        Some(path) => PosCostTable::load(path)?,
        None => PosCostTable::default(),
    };
    let needs_df = [Feature::SimWord, Feature::SimPair, Feature::SimTriplet]
        .iter()
        .any(|&f| manifest.contains(f));
    let embeddings = if manifest.contains(Feature::Semvec) {
        let path = cfg
            .embeddings
            .as_ref()
            .ok_or_else(|| CliError::Config("semvec needs resources.embeddings".into()))?;
        Some(EmbeddingTable::load(path)?)
    } else {
        None
    };
    let scores = if manifest.contains(Feature::ExtScore) {
        let path = cfg
            .split(split)
            .scores
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("ext_score needs [{split}] scores")))?;
        Some(corpus::load_scores(path).map_err(|e| CliError::corpus(path.display(), e))?)
    } else {
        None
    };
    Ok(Resources {
        ged: GedConfig {
            pos_costs,
            edge_weight: p.edge_weight,
            node_indel_cost: p.del_cost,
        },
        df_tables: if needs_df { Some(df_tables(cfg)?) } else { None },
        alphas: p.alphas,
        max_path_edges: p.max_path_edges,
        bm25: p.bm25,
        ngram_max: p.n_max,
        embeddings,
        scores,
    })
}

/// Computes the feature table of one split.
pub fn featurize_table(cfg: &RunConfig, split: Split) -> Result<FeatureTable, CliError> {
    let manifest = cfg.extraction_manifest();
    let res = resources(cfg, &manifest, split)?;
    let extractor = FeatureExtractor::new(&res, &manifest)?;
    let groups = load_split(cfg, split, manifest.needs_parses())?;
    let vectors = extractor.extract_corpus(&groups)?;
    let rows = groups
        .iter()
        .zip(vectors)
        .flat_map(|(g, vs)| {
            g.candidates.iter().zip(vs).map(|(c, v)| FeatureRow {
                question_id: g.question_id.clone(),
                candidate_id: c.candidate_id.clone(),
                label: c.label,
                values: v.values,
            })
        })
        .collect();
    Ok(FeatureTable {
        path: cfg.features_path(split),
        names: manifest.names(),
        rows,
    })
}

pub fn featurize(cfg: &RunConfig, split: Split, out: Option<PathBuf>) -> Result<String, CliError> {
    let mut table = featurize_table(cfg, split)?;
    if let Some(p) = out {
        table.path = p;
    }
    table.save(&table.path)?;
    let questions = table.scored_groups(&vec![0.0; table.rows.len()]).len();
    Ok(format!(
        "{split}: {questions} questions, {} pairs, {} features -> {}\n",
        table.rows.len(),
        table.names.len(),
        table.path.display()
    ))
}

pub fn train(cfg: &RunConfig) -> Result<String, CliError> {
    let table = FeatureTable::load(&cfg.features_path(Split::Train))?;
    let names = cfg.manifest.names();
    let rows = table.select(&names)?;
    let labels = table.labels();
    let outcome = combiner::train(&rows, &labels, &names, &cfg.params.train, cfg.params.threshold)?;
    let accuracy = outcome.model.accuracy(&rows, &labels)?;
    let path = cfg.model_path();
    create_parent(&path)?;
    outcome.model.save(&path)?;
    Ok(format!(
        "trained on {} pairs with {} features for {} epochs\nfinal loss {}\ntrain accuracy {}\nmodel -> {}\n",
        rows.len(),
        names.len(),
        cfg.params.train.epochs,
        outcome.final_loss(),
        accuracy,
        path.display()
    ))
}

fn model_scores(model: &TriggerModel, table: &FeatureTable) -> Result<Vec<f64>, CliError> {
    table
        .select(&model.feature_names)?
        .iter()
        .map(|x| model.probability(x).map_err(CliError::from))
        .collect()
}

fn load_model(cfg: &RunConfig) -> Result<(TriggerModel, PathBuf), CliError> {
    let path = cfg.model_path();
    Ok((TriggerModel::load(&path)?, path))
}

pub fn tune(cfg: &RunConfig, write: bool) -> Result<String, CliError> {
    let (mut model, path) = load_model(cfg)?;
    let table = FeatureTable::load(&cfg.features_path(Split::Dev))?;
    let groups = table.scored_groups(&model_scores(&model, &table)?);
    let (threshold, f1) = tune_threshold(&groups)?;
    let mut out = format!("tuned threshold {threshold} (dev F1 {f1:.2}%)\n");
    if write {
        model.threshold = threshold;
        model.save(&path)?;
        writeln!(out, "model threshold updated -> {}", path.display()).unwrap();
    }
    writeln!(out, "threshold={threshold}\nf1={f1}").unwrap();
    Ok(out)
}

pub fn predict(cfg: &RunConfig, split: Split, out: Option<PathBuf>) -> Result<String, CliError> {
    let (model, _) = load_model(cfg)?;
    let table = FeatureTable::load(&cfg.features_path(split))?;
    let scores = model_scores(&model, &table)?;
    let mut text = String::new();
    for (r, s) in table.rows.iter().zip(&scores) {
        writeln!(text, "{}\t{}\t{s}", r.question_id, r.candidate_id).unwrap();
    }
    let path = out.unwrap_or_else(|| cfg.output_dir.join(format!("{split}.scores.tsv")));
    write_file(&path, &text)?;
    Ok(format!("{} scores -> {}\n", scores.len(), path.display()))
}

fn column_groups(table: &FeatureTable, name: &str) -> Result<Vec<ScoredGroup>, CliError> {
    let i = table.column(name)?;
    let scores: Vec<f64> = table.rows.iter().map(|r| r.values[i]).collect();
    Ok(table.scored_groups(&scores))
}

/// Threshold for a raw baseline score: the configured value, else tuned on
/// the dev features.
fn baseline_threshold(cfg: &RunConfig, feature: Feature) -> Result<f64, CliError> {
    let fixed = match feature {
        Feature::Semvec => Some(cfg.params.sem_threshold),
        Feature::Bm25 => cfg.params.bm25_threshold,
        Feature::Ngram => cfg.params.ngram_threshold,
        _ => unreachable!("only baselines are reported"),
    };
    match fixed {
        Some(t) => Ok(t),
        None => {
            let dev = FeatureTable::load(&cfg.features_path(Split::Dev))?;
            Ok(tune_threshold(&column_groups(&dev, feature.name())?)?.0)
        }
    }
}

/// Reports for the model and each configured baseline on `split`.
pub fn evaluate_reports(cfg: &RunConfig, split: Split, threshold: Option<f64>) -> Result<Vec<(String, EvalReport)>, CliError> {
    let (model, _) = load_model(cfg)?;
    let table = FeatureTable::load(&cfg.features_path(split))?;
    let groups = table.scored_groups(&model_scores(&model, &table)?);
    let mut reports = vec![(
        "model".to_string(),
        triggering_report(&groups, threshold.unwrap_or(model.threshold)),
    )];
    for &b in &cfg.baselines {
        let t = baseline_threshold(cfg, b)?;
        reports.push((b.name().to_string(), triggering_report(&column_groups(&table, b.name())?, t)));
    }
    Ok(reports)
}

pub fn evaluate(cfg: &RunConfig, split: Split, threshold: Option<f64>, report: Option<PathBuf>) -> Result<String, CliError> {
    let reports = evaluate_reports(cfg, split, threshold)?;
    let mut human = String::new();
    let mut machine = String::new();
    for (name, r) in &reports {
        writeln!(human, "== {name} ({split})\n{r}\n").unwrap();
        write!(machine, "[{name}]\n{}", r.key_values()).unwrap();
    }
    let path = report.unwrap_or_else(|| cfg.output_dir.join(format!("{split}.report.txt")));
    write_file(&path, &machine)?;
    Ok(format!("{human}{machine}"))
}

/// Parses a report file back into named sections.
pub fn parse_report(text: &str) -> Vec<(String, EvalReport)> {
    let mut out = Vec::new();
    for chunk in text.split('[').filter(|c| !c.trim().is_empty()) {
        if let Some((name, body)) = chunk.split_once(']') {
            if let Some(r) = EvalReport::parse_key_values(body) {
                out.push((name.to_string(), r));
            }
        }
    }
    out
}
