//! Seeded synthetic benchmark with planted explanation motifs.
//!
//! The generator emits raw dataset files in the same shape as real data
//! (node features plus an IC50 response table) together with an answer
//! key. Signal is organized in small "hubs": a few mutually similar cell
//! lines crossed with a few mutually similar drugs, all sharing one
//! response relation. Two responses per hub are designated as explanation
//! targets; the remaining hub edges form the planted ground truth for
//! them. Outside the hubs, noise cells and dead-end drugs contribute
//! response edges that carry no signal toward any target.
//!
//! Feature geometry makes similarity construction exact: every node gets
//! a private basis direction, and hub members mix a shared hub direction
//! with their private one so that within-hub cosine similarity lands
//! above the configured threshold while every other pair is orthogonal.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{NodeId, NodeKind, RelKind, ResponseRecord, Triple};
use crate::groundtruth::{GtMember, GroundTruthSet, Situation};
use crate::numerics::Matrix;
use crate::{Error, Result};

/// Shape parameters for the synthetic benchmark.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SynthSpec {
    /// Number of signal hubs; each hub contributes two planted targets.
    pub hubs: usize,
    /// Noise cells with responses only toward dead-end drugs.
    pub noise_cells: usize,
    /// Dead-end drugs: response sinks with no similarity partners.
    pub deadend_drugs: usize,
    /// Benign distractor edges per target cell (responses into dead-end
    /// drugs; they sit inside target neighborhoods but carry no signal).
    pub benign_per_target: usize,
    /// Noise responses from noise cells into dead-end drugs.
    pub noise_responses: usize,
    /// Cosine threshold for cell similarity, matched by the geometry.
    pub cell_sim_threshold: f64,
    /// Cosine threshold for drug similarity.
    pub drug_sim_threshold: f64,
    /// IC50 below the global threshold (sensitive edges).
    pub sensitive_ic50: f64,
    /// IC50 above the global threshold (resistant edges).
    pub resistant_ic50: f64,
    /// Global IC50 binarization threshold.
    pub ic50_threshold: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            hubs: 15,
            noise_cells: 8,
            deadend_drugs: 17,
            benign_per_target: 2,
            noise_responses: 30,
            cell_sim_threshold: 0.95,
            drug_sim_threshold: 0.85,
            sensitive_ic50: 0.5,
            resistant_ic50: 2.0,
            ic50_threshold: 1.0,
        }
    }
}

/// One generated dataset plus its planted answer keys.
#[derive(Clone, Debug)]
pub struct SynthData {
    pub cell_features: Matrix,
    pub drug_features: Matrix,
    pub responses: Vec<ResponseRecord>,
    /// Planted explanation targets, ordered by hub.
    pub targets: Vec<Triple>,
    /// Planted ground truth per target, parallel to `targets`.
    pub answer_keys: Vec<GroundTruthSet>,
    /// Similarity triples the feature geometry is designed to induce
    /// (one direction per pair; the builder materializes both).
    pub expected_sim_pairs: Vec<Triple>,
}

impl SynthData {
    pub fn cell_count(&self) -> usize {
        self.cell_features.rows()
    }

    pub fn drug_count(&self) -> usize {
        self.drug_features.rows()
    }
}

struct Hub {
    cells: Vec<usize>,
    drugs: Vec<usize>,
    rel: RelKind,
}

/// Generate a benchmark dataset. Deterministic in `(spec, seed)`.
pub fn generate(spec: &SynthSpec, seed: u64) -> Result<SynthData> {
    if spec.hubs == 0 {
        return Err(Error::Config("synthetic benchmark needs at least one hub".into()));
    }
    if !(0.0..1.0).contains(&spec.cell_sim_threshold)
        || !(0.0..1.0).contains(&spec.drug_sim_threshold)
    {
        return Err(Error::Config("similarity thresholds must lie in [0, 1)".into()));
    }
    if spec.sensitive_ic50 >= spec.ic50_threshold || spec.resistant_ic50 <= spec.ic50_threshold {
        return Err(Error::Config(
            "IC50 levels must bracket the binarization threshold".into(),
        ));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);

    // Hub shapes: mostly 3 cells x 2 drugs (distractor similarity edges
    // are then low-weight Csim), a few transposed for variety. Relation
    // alternates so both response types get signal.
    let mut hubs = Vec::with_capacity(spec.hubs);
    let mut next_cell = 0usize;
    let mut next_drug = 0usize;
    for h in 0..spec.hubs {
        let (n_cells, n_drugs) = if h % 4 == 3 { (2, 3) } else { (3, 2) };
        let cells: Vec<usize> = (next_cell..next_cell + n_cells).collect();
        let drugs: Vec<usize> = (next_drug..next_drug + n_drugs).collect();
        next_cell += n_cells;
        next_drug += n_drugs;
        hubs.push(Hub {
            cells,
            drugs,
            rel: if h % 2 == 0 { RelKind::Sen } else { RelKind::Res },
        });
    }
    let noise_cell_base = next_cell;
    let deadend_drug_base = next_drug;
    let n_cells = next_cell + spec.noise_cells;
    let n_drugs = next_drug + spec.deadend_drugs;

    let cell_features = hub_features(
        n_cells,
        spec.hubs,
        spec.cell_sim_threshold,
        hubs.iter().map(|h| h.cells.as_slice()),
    );
    let drug_features = hub_features(
        n_drugs,
        spec.hubs,
        spec.drug_sim_threshold,
        hubs.iter().map(|h| h.drugs.as_slice()),
    );

    let ic50_for = |rel: RelKind| match rel {
        RelKind::Sen => spec.sensitive_ic50,
        _ => spec.resistant_ic50,
    };
    let mut responses = Vec::new();
    let push_response = |cell: usize, drug: usize, rel: RelKind, responses: &mut Vec<ResponseRecord>| {
        responses.push(ResponseRecord {
            cell: NodeId::cell(cell),
            drug: NodeId::drug(drug),
            ic50: ic50_for(rel),
            threshold: spec.ic50_threshold,
        });
    };

    let mut targets = Vec::new();
    let mut answer_keys = Vec::new();
    let mut expected_sim_pairs = Vec::new();
    let mut deadend_cursor = 0usize;

    for hub in &hubs {
        // Full bipartite responses within the hub.
        for &c in &hub.cells {
            for &d in &hub.drugs {
                push_response(c, d, hub.rel, &mut responses);
            }
        }
        // Expected similarity pairs: all within-hub pairs, one direction.
        for (i, &a) in hub.cells.iter().enumerate() {
            for &b in &hub.cells[i + 1..] {
                expected_sim_pairs.push(Triple::new(
                    NodeId::cell(a),
                    RelKind::Csim,
                    NodeId::cell(b),
                ));
            }
        }
        for (i, &a) in hub.drugs.iter().enumerate() {
            for &b in &hub.drugs[i + 1..] {
                expected_sim_pairs.push(Triple::new(
                    NodeId::drug(a),
                    RelKind::Dsim,
                    NodeId::drug(b),
                ));
            }
        }
        // Two planted targets per hub on distinct cells and drugs.
        let target_pairs = [(hub.cells[0], hub.drugs[0]), (hub.cells[1], hub.drugs[1])];
        for &(tc, td) in &target_pairs {
            let target = Triple::new(NodeId::cell(tc), hub.rel, NodeId::drug(td));
            answer_keys.push(planted_key(hub, &target));
            targets.push(target);
            // Benign distractors: resistance responses from the target
            // cell into shared dead-end drugs. They sit inside the
            // target's neighborhood but carry no signal toward it.
            for _ in 0..spec.benign_per_target {
                if spec.deadend_drugs == 0 {
                    break;
                }
                let dd = deadend_drug_base + deadend_cursor % spec.deadend_drugs;
                deadend_cursor += 1;
                push_response(tc, dd, RelKind::Res, &mut responses);
            }
        }
    }

    // Noise responses live entirely outside hub neighborhoods.
    if spec.noise_responses > 0 && (spec.noise_cells == 0 || spec.deadend_drugs == 0) {
        return Err(Error::Config(
            "noise responses require noise cells and dead-end drugs".into(),
        ));
    }
    let mut noise_slots: Vec<(usize, usize)> = Vec::new();
    for c in 0..spec.noise_cells {
        for d in 0..spec.deadend_drugs {
            noise_slots.push((noise_cell_base + c, deadend_drug_base + d));
        }
    }
    noise_slots.shuffle(&mut rng);
    for &(c, d) in noise_slots.iter().take(spec.noise_responses) {
        push_response(c, d, RelKind::Res, &mut responses);
    }

    Ok(SynthData {
        cell_features,
        drug_features,
        responses,
        targets,
        answer_keys,
        expected_sim_pairs,
    })
}

/// Features with one private basis direction per node plus a shared hub
/// direction mixed in for hub members. Within-hub pairs then have cosine
/// `mix^2`, chosen to clear `threshold`; all other pairs are orthogonal.
fn hub_features<'a>(
    nodes: usize,
    hubs: usize,
    threshold: f64,
    membership: impl Iterator<Item = &'a [usize]>,
) -> Matrix {
    // cos^2(psi) sits halfway between the threshold and 1.
    let pair_cos = (threshold + 1.0) / 2.0;
    let mix = pair_cos.sqrt();
    let ortho = (1.0 - mix * mix).sqrt();
    let dim = hubs + nodes;
    let mut m = Matrix::zeros(nodes, dim);
    for i in 0..nodes {
        m.set(i, hubs + i, 1.0);
    }
    for (h, members) in membership.enumerate() {
        for &i in members {
            m.set(i, hubs + i, ortho);
            m.set(i, h, mix);
        }
    }
    m
}

/// The planted ground truth for one target: every other response in its
/// hub plus both directions of each similarity pair touching the target's
/// endpoints. Derived from the hub layout, independently of the graph
/// builder.
fn planted_key(hub: &Hub, target: &Triple) -> GroundTruthSet {
    let mut members = Vec::new();
    let (tc, td) = (target.head, target.tail);
    for &c in &hub.cells {
        for &d in &hub.drugs {
            let t = Triple::new(NodeId::cell(c), hub.rel, NodeId::drug(d));
            if t == *target {
                continue;
            }
            let same_cell = t.head == tc;
            let same_drug = t.tail == td;
            let situation = match (same_cell, same_drug) {
                (true, false) => Situation::Sit1,
                (false, true) => Situation::Sit2,
                (false, false) => Situation::Sit3,
                (true, true) => unreachable!("target was skipped"),
            };
            members.push(GtMember { triple: t, situations: vec![situation] });
        }
    }
    // Similarity chains touching the target endpoints, both directions.
    for &c in &hub.cells {
        let other = NodeId::cell(c);
        if other == tc {
            continue;
        }
        for (a, b) in [(other, tc), (tc, other)] {
            members.push(GtMember {
                triple: Triple::new(a, RelKind::Csim, b),
                situations: vec![Situation::Sit2, Situation::Sit3],
            });
        }
    }
    for &d in &hub.drugs {
        let other = NodeId::drug(d);
        if other == td {
            continue;
        }
        for (a, b) in [(other, td), (td, other)] {
            members.push(GtMember {
                triple: Triple::new(a, RelKind::Dsim, b),
                situations: vec![Situation::Sit1, Situation::Sit3],
            });
        }
    }
    members.sort_by_key(|m| m.triple);
    GroundTruthSet { target: *target, members }
}

/// Assemble the generated dataset into a graph exactly as the build
/// pipeline would: cosine similarity at the spec thresholds plus global
/// IC50 binarization.
pub fn assemble(
    spec: &SynthSpec,
    data: &SynthData,
) -> Result<(crate::graph::HeteroGraph, crate::graph::AssembleStats)> {
    use crate::graph::{assemble_graph, binarize_responses, build_similarity_triples, SimMode, ThresholdSource};
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
    let resp = binarize_responses(&data.responses, ThresholdSource::Global(spec.ic50_threshold))?;
    assemble_graph(&resp, &cell_sim, &drug_sim, data.cell_features.clone(), data.drug_features.clone())
}
