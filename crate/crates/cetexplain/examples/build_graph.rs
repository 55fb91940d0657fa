//! Assemble a heterogeneous cell/drug graph from raw-shaped inputs.
//!
//! Generates a small synthetic dataset (node features plus an IC50
//! response table), derives similarity edges from feature cosines,
//! binarizes responses at a global threshold, and prints what the
//! resulting graph looks like.
//!
//! Run with: `cargo run --example build_graph`

use cetexplain::graph::{
    assemble_graph, binarize_responses, build_similarity_triples, NodeKind, RelKind, SimMode,
    ThresholdSource,
};
use cetexplain::synth::{generate, SynthSpec};
use cetexplain::Result;

fn main() -> Result<()> {
    let spec = SynthSpec {
        hubs: 4,
        noise_cells: 3,
        deadend_drugs: 5,
        noise_responses: 8,
        ..SynthSpec::default()
    };
    let data = generate(&spec, 11)?;
    println!(
        "raw dataset: {} cells, {} drugs, {} response records",
        data.cell_count(),
        data.drug_count(),
        data.responses.len()
    );

    // The same three steps `cetex build` performs.
    let cell_sim = build_similarity_triples(
        &data.cell_features,
        NodeKind::CellLine,
        SimMode::Threshold(spec.cell_sim_threshold),
    )?;
    let drug_sim = build_similarity_triples(
        &data.drug_features,
        NodeKind::Drug,
        SimMode::Threshold(spec.drug_sim_threshold),
    )?;
    let responses = binarize_responses(&data.responses, ThresholdSource::Global(spec.ic50_threshold))?;
    let (g, stats) = assemble_graph(
        &responses,
        &cell_sim,
        &drug_sim,
        data.cell_features.clone(),
        data.drug_features.clone(),
    )?;

    println!(
        "graph: {} nodes, {} directed triples ({} duplicate records dropped)",
        g.node_count(),
        g.triples().len(),
        stats.duplicates_dropped
    );
    let by_rel = g.count_by_rel();
    for rel in [RelKind::Res, RelKind::Sen, RelKind::Dsim, RelKind::Csim] {
        println!("  {:4}: {}", rel.name(), by_rel[rel.code()]);
    }
    Ok(())
}
