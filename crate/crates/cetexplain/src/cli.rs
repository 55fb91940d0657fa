//! Command-line orchestration of the full pipeline.
//!
//! Subcommands: `bench` (synthetic dataset with planted answer keys),
//! `build` (graph artifacts from raw files), `train` (cross-validated
//! R-GCN training with checkpoints), `explain` (per-target edge
//! rankings), `gt` (ground-truth construction plus size histogram), and
//! `eval` (metrics report). Every command is a pure function of the
//! config, input files and seed; re-running reproduces artifacts byte for
//! byte.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::evalmetrics::{evaluate_method, MetricsReport};
use crate::explainer::{
    explain_cet, explain_counterfactual, explain_mi_only, Explanation, Method,
};
use crate::files;
use crate::graph::{
    assemble_graph, binarize_responses, build_similarity_triples, HeteroGraph, NodeKind, RelKind,
    Triple,
};
use crate::groundtruth::{build_ground_truth, size_histogram};
use crate::model::{
    link_probability, load_checkpoint, rgcn_forward, sample_negatives, save_checkpoint,
    train_detailed, RgcnModel, TrainOptions,
};
use crate::synth;
use crate::{Error, Result};

/// Explain multi-relational link predictions with edge-type-aware masks.
#[derive(Debug, Parser)]
#[command(name = "cetex", version)]
pub struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override a config key, e.g. `--set train.epochs=200`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic benchmark dataset with planted explanations.
    Bench,
    /// Build graph artifacts (triples plus manifest) from raw inputs.
    Build,
    /// Train the link predictor with cross-validation.
    Train,
    /// Produce per-target edge rankings for one method.
    Explain {
        /// CETE, GNNE or EXPN.
        #[arg(long)]
        method: String,
        /// Checkpoint file; defaults to the fold's last checkpoint.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Fold whose training graph and targets are used.
        #[arg(long, default_value_t = 0)]
        fold: usize,
        /// Output JSONL; defaults into the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Construct ground-truth sets and their size histogram.
    Gt,
    /// Evaluate explanation files against a ground-truth file.
    Eval {
        /// Explanation JSONL files (one per method).
        #[arg(long, required = true, num_args = 1..)]
        explanations: Vec<PathBuf>,
        /// Ground-truth JSONL.
        #[arg(long)]
        gt: PathBuf,
        /// Paired runs for the stability column, matched by method tag.
        #[arg(long, num_args = 0..)]
        paired: Vec<PathBuf>,
        /// Output basename (writes `<out>.json` and `<out>.csv`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Entry point used by the binary: dispatch and map errors to exit codes.
pub fn run(cli: Cli) -> Result<()> {
    let config_path = cli.config.as_deref().ok_or_else(|| {
        Error::Config("--config is required (a TOML run configuration)".into())
    })?;
    let cfg = RunConfig::load(config_path, &cli.overrides)?;
    match cli.command {
        Command::Bench => cmd_bench(&cfg),
        Command::Build => cmd_build(&cfg).map(|_| ()),
        Command::Train => cmd_train(&cfg).map(|_| ()),
        Command::Explain { method, checkpoint, fold, out } => {
            let method = parse_method(&method)?;
            cmd_explain(&cfg, method, checkpoint.as_deref(), fold, out.as_deref()).map(|_| ())
        }
        Command::Gt => cmd_gt(&cfg).map(|_| ()),
        Command::Eval { explanations, gt, paired, out } => {
            cmd_eval(&cfg, &explanations, &gt, &paired, out.as_deref()).map(|_| ())
        }
    }
}

pub fn parse_method(tag: &str) -> Result<Method> {
    match tag {
        "CETE" => Ok(Method::Cete),
        "GNNE" => Ok(Method::Gnne),
        "EXPN" => Ok(Method::Expn),
        other => Err(Error::Config(format!(
            "unknown method '{other}' (expected CETE, GNNE or EXPN)"
        ))),
    }
}

/// Counts and identifying hashes for one built graph.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub cells: usize,
    pub drugs: usize,
    pub triples_per_relation: BTreeMap<String, usize>,
    pub duplicates_dropped: usize,
}

fn triples_path(cfg: &RunConfig) -> PathBuf {
    cfg.paths.output_dir.join("triples.tsv")
}

fn folds_path(cfg: &RunConfig) -> PathBuf {
    cfg.paths.output_dir.join("folds.json")
}

fn checkpoint_path(cfg: &RunConfig, fold: usize, epoch: usize) -> PathBuf {
    cfg.paths
        .output_dir
        .join(format!("checkpoint_fold{fold}_epoch{epoch}.json"))
}

/// Build the heterogeneous graph directly from the raw input files.
pub fn build_graph(cfg: &RunConfig) -> Result<(HeteroGraph, usize)> {
    let cell_features = files::read_features(&cfg.paths.cell_features, 'c')?;
    let drug_features = files::read_features(&cfg.paths.drug_features, 'd')?;
    let records = files::read_responses(&cfg.paths.responses)?;
    let cell_sim = build_similarity_triples(
        &cell_features,
        NodeKind::CellLine,
        cfg.graph.cell_sim_mode()?,
    )?;
    let drug_sim =
        build_similarity_triples(&drug_features, NodeKind::Drug, cfg.graph.drug_sim_mode()?)?;
    let responses = binarize_responses(&records, cfg.graph.threshold_source())?;
    let (g, stats) =
        assemble_graph(&responses, &cell_sim, &drug_sim, cell_features, drug_features)?;
    Ok((g, stats.duplicates_dropped))
}

/// `build`: write the triple table and a manifest into the output dir.
pub fn cmd_build(cfg: &RunConfig) -> Result<Manifest> {
    fs::create_dir_all(&cfg.paths.output_dir)?;
    let (g, duplicates_dropped) = build_graph(cfg)?;
    files::write_triples(&triples_path(cfg), g.triples())?;
    let counts = g.count_by_rel();
    let manifest = Manifest {
        config_hash: cfg.hash(),
        cells: g.cell_num(),
        drugs: g.drug_num(),
        triples_per_relation: RelKind::ALL
            .iter()
            .map(|r| (r.name().to_string(), counts[r.code()]))
            .collect(),
        duplicates_dropped,
    };
    fs::write(
        cfg.paths.output_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    log::info!(
        "built graph: {} cells, {} drugs, {:?} triples",
        manifest.cells,
        manifest.drugs,
        counts
    );
    Ok(manifest)
}

/// Load the graph back from `build` artifacts (triples plus features).
pub fn load_built_graph(cfg: &RunConfig) -> Result<HeteroGraph> {
    let triples = files::read_triples(&triples_path(cfg))?;
    assemble_from_triples(cfg, &triples)
}

fn assemble_from_triples(cfg: &RunConfig, triples: &[Triple]) -> Result<HeteroGraph> {
    let cell_features = files::read_features(&cfg.paths.cell_features, 'c')?;
    let drug_features = files::read_features(&cfg.paths.drug_features, 'd')?;
    let mut resp = Vec::new();
    let mut csim = Vec::new();
    let mut dsim = Vec::new();
    for t in triples {
        match t.rel {
            RelKind::Sen | RelKind::Res => resp.push(*t),
            RelKind::Csim => csim.push(*t),
            RelKind::Dsim => dsim.push(*t),
        }
    }
    Ok(assemble_graph(&resp, &csim, &dsim, cell_features, drug_features)?.0)
}

/// Seeded fold assignment: a shuffled round-robin over triple indices.
/// With `folds = 1` the triples are still split five ways, but only
/// partition 0 is used as the hold-out (a single 80/20 split).
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let parts = partition_count(folds);
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0xF01D);
    order.shuffle(&mut rng);
    let mut assignment = vec![0usize; n];
    for (pos, &idx) in order.iter().enumerate() {
        assignment[idx] = pos % parts;
    }
    assignment
}

fn partition_count(folds: usize) -> usize {
    if folds == 1 {
        5
    } else {
        folds
    }
}

fn run_fold_count(folds: usize) -> usize {
    if folds == 1 {
        1
    } else {
        folds
    }
}

/// Training/test triples of one fold under an assignment.
pub fn split_fold(triples: &[Triple], assignment: &[usize], fold: usize) -> (Vec<Triple>, Vec<Triple>) {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (t, &a) in triples.iter().zip(assignment) {
        if a == fold {
            test.push(*t);
        } else {
            train.push(*t);
        }
    }
    (train, test)
}

/// `train`: per-fold training with checkpoints and a log.
pub fn cmd_train(cfg: &RunConfig) -> Result<Vec<RgcnModel>> {
    let all = files::read_triples(&triples_path(cfg))?;
    if all.is_empty() {
        return Err(Error::Validation("no triples to train on; run `build` first".into()));
    }
    let assignment = fold_assignment(all.len(), cfg.folds, cfg.seed);
    files::write_folds(&folds_path(cfg), &assignment)?;
    let mut final_models = Vec::new();
    for fold in 0..run_fold_count(cfg.folds) {
        let (train_triples, test_triples) = split_fold(&all, &assignment, fold);
        let g = assemble_from_triples(cfg, &train_triples)?;
        let neg = sample_negatives(&g, &test_triples, 1, cfg.seed ^ 0xAC)?;
        let mut train_cfg = cfg.train.clone();
        train_cfg.seed = cfg.seed.wrapping_add(fold as u64);
        let opts = TrainOptions {
            holdout: Some((test_triples, neg)),
            config_hash: cfg.hash(),
        };
        let outcome = train_detailed(&g, &train_cfg, &opts)?;
        for ckpt in &outcome.checkpoints {
            save_checkpoint(ckpt, &checkpoint_path(cfg, fold, ckpt.epoch))?;
        }
        // The final epoch is always available as a checkpoint.
        if !outcome.checkpoints.iter().any(|c| c.epoch == outcome.model.epoch) {
            save_checkpoint(&outcome.model, &checkpoint_path(cfg, fold, outcome.model.epoch))?;
        }
        files::write_training_log(
            &cfg.paths.output_dir.join(format!("training_log_fold{fold}.csv")),
            &outcome.log,
        )?;
        if let Some(stat) = outcome.log.last() {
            log::info!(
                "fold {fold}: final loss {:.4}, AUC {:?}",
                stat.loss,
                stat.auc
            );
        }
        final_models.push(outcome.model);
    }
    Ok(final_models)
}

/// Resolve the target list for `explain`/`gt`: an explicit targets file
/// wins; otherwise held-out response triples the model scores above 0.5.
pub fn resolve_targets(
    cfg: &RunConfig,
    g: &HeteroGraph,
    model: &RgcnModel,
    test_triples: &[Triple],
) -> Result<Vec<Triple>> {
    if let Some(path) = &cfg.paths.targets {
        return files::read_triples(path);
    }
    let embeddings = rgcn_forward(model, g, None)?;
    let mut out = Vec::new();
    for t in test_triples {
        if !t.rel.is_response() {
            continue;
        }
        if !g.node_exists(t.head) || !g.node_exists(t.tail) {
            continue;
        }
        if link_probability(model, g, &embeddings, t)? > 0.5 {
            out.push(*t);
        }
    }
    out.sort();
    Ok(out)
}

fn fold_test_triples(cfg: &RunConfig, fold: usize) -> Result<(Vec<Triple>, Vec<Triple>)> {
    let all = files::read_triples(&triples_path(cfg))?;
    let assignment = files::read_folds(&folds_path(cfg))?;
    if assignment.len() != all.len() {
        return Err(Error::Validation(format!(
            "fold file covers {} triples but the graph has {}",
            assignment.len(),
            all.len()
        )));
    }
    Ok(split_fold(&all, &assignment, fold))
}

/// `explain`: one JSONL record per resolved target.
pub fn cmd_explain(
    cfg: &RunConfig,
    method: Method,
    checkpoint: Option<&Path>,
    fold: usize,
    out: Option<&Path>,
) -> Result<Vec<Explanation>> {
    if fold >= run_fold_count(cfg.folds) {
        return Err(Error::Validation(format!(
            "fold {fold} out of range for {} folds",
            cfg.folds
        )));
    }
    let (train_triples, test_triples) = fold_test_triples(cfg, fold)?;
    let g = assemble_from_triples(cfg, &train_triples)?;
    let default_path;
    let ckpt_path = match checkpoint {
        Some(p) => p,
        None => {
            let epoch = last_checkpoint_epoch(cfg);
            default_path = checkpoint_path(cfg, fold, epoch);
            &default_path
        }
    };
    let model = load_checkpoint(ckpt_path)?;
    let targets = resolve_targets(cfg, &g, &model, &test_triples)?;
    if targets.is_empty() {
        log::warn!("no explanation targets resolved; writing an empty file");
    }
    let mut explain_cfg = cfg.explain.clone();
    explain_cfg.seed = cfg.seed;
    let mut explanations = Vec::with_capacity(targets.len());
    for (i, target) in targets.iter().enumerate() {
        let e = match method {
            Method::Cete => explain_cet(&model, &g, target, &explain_cfg)?,
            Method::Gnne => explain_mi_only(&model, &g, target, &explain_cfg)?,
            Method::Expn => explain_counterfactual(&model, &g, target, &explain_cfg)?,
        };
        log::debug!("explained {}/{}: {target}", i + 1, targets.len());
        explanations.push(e);
    }
    let default_out;
    let out_path = match out {
        Some(p) => p,
        None => {
            default_out = cfg.paths.output_dir.join(format!(
                "explanations_{}_fold{fold}_epoch{}.jsonl",
                method_tag(method),
                model.epoch
            ));
            &default_out
        }
    };
    files::write_explanations(out_path, &explanations)?;
    log::info!("wrote {} explanations to {}", explanations.len(), out_path.display());
    Ok(explanations)
}

pub fn method_tag(m: Method) -> &'static str {
    match m {
        Method::Cete => "CETE",
        Method::Gnne => "GNNE",
        Method::Expn => "EXPN",
    }
}

fn last_checkpoint_epoch(cfg: &RunConfig) -> usize {
    cfg.train
        .checkpoint_epochs
        .iter()
        .copied()
        .filter(|&e| e <= cfg.train.epochs)
        .max()
        .unwrap_or(cfg.train.epochs)
}

/// `gt`: ground truth for every resolved target plus the size histogram.
pub fn cmd_gt(cfg: &RunConfig) -> Result<Vec<crate::groundtruth::GroundTruthSet>> {
    let g = load_built_graph(cfg)?;
    let targets: Vec<Triple> = match &cfg.paths.targets {
        Some(path) => files::read_triples(path)?,
        None => {
            let mut all: Vec<Triple> = g
                .triples()
                .iter()
                .filter(|t| t.rel.is_response())
                .copied()
                .collect();
            all.sort();
            all
        }
    };
    let mut sets = Vec::with_capacity(targets.len());
    for t in &targets {
        sets.push(build_ground_truth(&g, t)?);
    }
    fs::create_dir_all(&cfg.paths.output_dir)?;
    files::write_ground_truth(&cfg.paths.output_dir.join("gt.jsonl"), &sets)?;
    let sizes: Vec<usize> = sets.iter().map(|s| s.len()).collect();
    let hist = size_histogram(&sizes, 10, 10)?;
    files::write_histogram(&cfg.paths.output_dir.join("gt_histogram.csv"), &hist)?;
    log::info!("wrote ground truth for {} targets", sets.len());
    Ok(sets)
}

/// `eval`: score explanation files against a ground-truth file.
pub fn cmd_eval(
    cfg: &RunConfig,
    explanation_paths: &[PathBuf],
    gt_path: &Path,
    paired_paths: &[PathBuf],
    out: Option<&Path>,
) -> Result<MetricsReport> {
    let gt_sets = files::read_ground_truth(gt_path)?;
    let gt: BTreeMap<Triple, crate::groundtruth::GroundTruthSet> =
        gt_sets.into_iter().map(|s| (s.target, s)).collect();
    let mut paired: BTreeMap<&'static str, Vec<Explanation>> = BTreeMap::new();
    for p in paired_paths {
        let es = files::read_explanations(p)?;
        if let Some(first) = es.first() {
            paired.insert(method_tag(first.method), es);
        }
    }
    let mut report = MetricsReport { per_method: Vec::new() };
    for path in explanation_paths {
        let es = files::read_explanations(path)?;
        let Some(first) = es.first() else {
            log::warn!("{} holds no explanations; skipped", path.display());
            continue;
        };
        let tag = method_tag(first.method);
        if !cfg.eval.methods.iter().any(|m| m == tag) {
            log::warn!("method {tag} not in eval.methods; skipped");
            continue;
        }
        let metrics = evaluate_method(
            tag,
            &es,
            &gt,
            paired.get(tag).map(|v| v.as_slice()),
            cfg.eval.k,
        )?;
        report.per_method.push(metrics);
    }
    let default_out;
    let base = match out {
        Some(p) => p,
        None => {
            default_out = cfg.paths.output_dir.join("metrics");
            &default_out
        }
    };
    if let Some(dir) = base.parent() {
        fs::create_dir_all(dir)?;
    }
    files::write_metrics(
        &base.with_extension("json"),
        &base.with_extension("csv"),
        &report,
    )?;
    Ok(report)
}

/// `bench`: write the synthetic dataset, targets, planted answer key and
/// a ready-to-run pipeline config into the output directory.
pub fn cmd_bench(cfg: &RunConfig) -> Result<()> {
    let data = synth::generate(&cfg.synth, cfg.seed)?;
    let dir = &cfg.paths.output_dir;
    fs::create_dir_all(dir)?;
    files::write_features(&dir.join("cell_features.csv"), &data.cell_features, 'c')?;
    files::write_features(&dir.join("drug_features.csv"), &data.drug_features, 'd')?;
    files::write_responses(&dir.join("responses.tsv"), &data.responses)?;
    files::write_triples(&dir.join("targets.tsv"), &data.targets)?;
    files::write_ground_truth(&dir.join("answer_key.jsonl"), &data.answer_keys)?;
    let pipeline = bench_pipeline_config(cfg);
    fs::write(dir.join("run.toml"), pipeline.to_toml()?)?;
    log::info!(
        "benchmark: {} cells, {} drugs, {} responses, {} targets",
        data.cell_count(),
        data.drug_count(),
        data.responses.len(),
        data.targets.len()
    );
    Ok(())
}

/// The pipeline config `bench` emits next to its dataset: same seed and
/// hyperparameters, paths wired to the generated files, similarity
/// thresholds matching the planted geometry.
pub fn bench_pipeline_config(cfg: &RunConfig) -> RunConfig {
    let dir = &cfg.paths.output_dir;
    let mut out = cfg.clone();
    out.folds = 1;
    out.paths.cell_features = dir.join("cell_features.csv");
    out.paths.drug_features = dir.join("drug_features.csv");
    out.paths.responses = dir.join("responses.tsv");
    out.paths.targets = Some(dir.join("targets.tsv"));
    out.paths.output_dir = dir.clone();
    out.graph.sim_mode = "threshold".to_string();
    out.graph.cell_sim_value = cfg.synth.cell_sim_threshold;
    out.graph.drug_sim_value = cfg.synth.drug_sim_threshold;
    out.graph.ic50_threshold = Some(cfg.synth.ic50_threshold);
    out
}
