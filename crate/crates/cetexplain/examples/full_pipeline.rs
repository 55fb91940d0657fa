//! Drive the whole file-based pipeline exactly as the `cetex` binary does.
//!
//! Generates a benchmark dataset into a temporary directory, then runs
//! the build → train → explain → gt → eval sequence through the same
//! command functions the CLI dispatches to, and prints the resulting
//! metrics report. Every artifact written here is byte-reproducible from
//! the config and seed.
//!
//! Run with: `cargo run --example full_pipeline`

use cetexplain::cli::{
    bench_pipeline_config, cmd_bench, cmd_build, cmd_eval, cmd_explain, cmd_gt, cmd_train,
};
use cetexplain::config::RunConfig;
use cetexplain::explainer::Method;
use cetexplain::synth::SynthSpec;
use cetexplain::Result;

fn main() -> Result<()> {
    let dir = tempfile::tempdir()?;

    // A reduced benchmark so the example runs in seconds.
    let mut cfg = RunConfig::default();
    cfg.seed = 7;
    cfg.paths.output_dir = dir.path().to_path_buf();
    cfg.synth = SynthSpec { hubs: 4, noise_cells: 3, deadend_drugs: 6, noise_responses: 8, ..SynthSpec::default() };
    cfg.train.epochs = 400;
    cfg.train.dim = 16;
    cfg.train.eval_interval = 100;
    cfg.train.checkpoint_epochs = vec![400];
    cfg.explain.iterations = 150;

    // bench: dataset files, targets, answer key, pipeline config.
    cmd_bench(&cfg)?;
    let pipeline = bench_pipeline_config(&cfg);

    // build: graph triples plus manifest.
    let manifest = cmd_build(&pipeline)?;
    let triples: usize = manifest.triples_per_relation.values().sum();
    println!(
        "built graph: {} cells, {} drugs, {} triples (config {})",
        manifest.cells, manifest.drugs, triples, manifest.config_hash
    );

    // train: cross-validated checkpoints and logs.
    cmd_train(&pipeline)?;

    // explain: one ranking file per method.
    let mut explanation_paths = Vec::new();
    for method in [Method::Cete, Method::Gnne, Method::Expn] {
        let out = dir.path().join(format!("expl_{}.jsonl", method.tag()));
        let expls = cmd_explain(&pipeline, method, None, 0, Some(&out))?;
        println!("{}: explained {} targets", method.tag(), expls.len());
        explanation_paths.push(out);
    }

    // gt + eval: rule-based ground truth, then the metrics table.
    cmd_gt(&pipeline)?;
    let report = cmd_eval(
        &pipeline,
        &explanation_paths,
        &dir.path().join("gt.jsonl"),
        &[],
        Some(&dir.path().join("metrics")),
    )?;
    for m in &report.per_method {
        println!(
            "{}  P@{} {:.3}  R@{} {:.3}  F1@{} {:.3}",
            m.method, m.k, m.precision, m.k, m.recall, m.k, m.f1
        );
    }
    Ok(())
}
