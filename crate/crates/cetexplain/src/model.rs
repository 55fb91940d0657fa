//! R-GCN encoder with a DistMult decoder for link prediction.
//!
//! The forward pass follows the standard relational propagation rule: each
//! node aggregates incoming messages per relation, normalized by the
//! in-degree under that relation (computed on the unscaled graph), plus a
//! self-loop term, with ReLU on hidden layers and a linear final layer. An
//! optional per-edge scale multiplies every message before aggregation —
//! this is the hook the explainer's mask drives.
//!
//! Gradients are hand-derived: the pipeline is a short fixed chain
//! (input projection → L propagation layers → DistMult → sigmoid → BCE), so
//! a general tape is not needed.

use std::collections::HashMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{HeteroGraph, Neighborhood, NodeId, NodeKind, RelKind, Triple, REL_COUNT};
use crate::numerics::{accumulate_row_matmul, dot, matmul, sigmoid, AdamState, Matrix};
use crate::{Error, Result};

/// One propagation layer: a weight per relation plus the self-loop weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RgcnLayer {
    pub w_rel: Vec<Matrix>,
    pub w_self: Matrix,
}

/// Trained link predictor: input projections, propagation layers and
/// per-relation DistMult vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RgcnModel {
    pub version: u32,
    /// Layer dimensions d(0)..d(L).
    pub dims: Vec<usize>,
    pub proj_cell: Matrix,
    pub proj_drug: Matrix,
    pub layers: Vec<RgcnLayer>,
    /// `REL_COUNT × d(L)` decoder vectors.
    pub rel_vecs: Matrix,
    pub epoch: usize,
    pub config_hash: String,
}

impl RgcnModel {
    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn embed_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    /// Random initialization sized for `g`'s feature tables.
    pub fn init(g: &HeteroGraph, layers: usize, dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let dims = vec![dim; layers + 1];
        let proj_cell = Matrix::glorot(g.cell_features().cols(), dim, &mut rng);
        let proj_drug = Matrix::glorot(g.drug_features().cols(), dim, &mut rng);
        let layer_weights = (0..layers)
            .map(|_| RgcnLayer {
                w_rel: (0..REL_COUNT).map(|_| Matrix::glorot(dim, dim, &mut rng)).collect(),
                w_self: Matrix::glorot(dim, dim, &mut rng),
            })
            .collect();
        let rel_vecs = Matrix::random_uniform(REL_COUNT, dim, 0.5, &mut rng);
        RgcnModel {
            version: 1,
            dims,
            proj_cell,
            proj_drug,
            layers: layer_weights,
            rel_vecs,
            epoch: 0,
            config_hash: String::new(),
        }
    }

    /// All parameter matrices in a fixed order (shared with [`ParamGrads`]).
    pub fn params(&self) -> Vec<&Matrix> {
        let mut out = vec![&self.proj_cell, &self.proj_drug];
        for layer in &self.layers {
            out.extend(layer.w_rel.iter());
            out.push(&layer.w_self);
        }
        out.push(&self.rel_vecs);
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut Matrix> {
        let mut out: Vec<&mut Matrix> = vec![&mut self.proj_cell, &mut self.proj_drug];
        for layer in &mut self.layers {
            out.extend(layer.w_rel.iter_mut());
            out.push(&mut layer.w_self);
        }
        out.push(&mut self.rel_vecs);
        out
    }

    fn validate(&self) -> Result<()> {
        let l = self.layers.len();
        if self.dims.len() != l + 1 {
            return Err(Error::Validation(format!(
                "dims length {} does not match layer count {}",
                self.dims.len(),
                l
            )));
        }
        let check = |m: &Matrix, rows: usize, cols: usize, what: &str| -> Result<()> {
            if m.rows() != rows || m.cols() != cols {
                return Err(Error::Validation(format!(
                    "{what} has shape {}x{}, declared {}x{}",
                    m.rows(),
                    m.cols(),
                    rows,
                    cols
                )));
            }
            m.assert_finite(what)
        };
        check(&self.proj_cell, self.proj_cell.rows(), self.dims[0], "proj_cell")?;
        check(&self.proj_drug, self.proj_drug.rows(), self.dims[0], "proj_drug")?;
        for (i, layer) in self.layers.iter().enumerate() {
            if layer.w_rel.len() != REL_COUNT {
                return Err(Error::Validation(format!(
                    "layer {i} has {} relation weights, expected {REL_COUNT}",
                    layer.w_rel.len()
                )));
            }
            for (r, w) in layer.w_rel.iter().enumerate() {
                check(w, self.dims[i], self.dims[i + 1], &format!("layer {i} W_r[{r}]"))?;
            }
            check(&layer.w_self, self.dims[i], self.dims[i + 1], &format!("layer {i} W_0"))?;
        }
        check(&self.rel_vecs, REL_COUNT, *self.dims.last().unwrap(), "rel_vecs")
    }
}

/// Training hyperparameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub dim: usize,
    pub layers: usize,
    pub negative_ratio: usize,
    pub seed: u64,
    pub l2: f64,
    pub eval_interval: usize,
    pub checkpoint_epochs: Vec<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 5000,
            lr: 0.01,
            dim: 32,
            layers: 2,
            negative_ratio: 2,
            seed: 0,
            l2: 1e-4,
            eval_interval: 100,
            checkpoint_epochs: vec![4000, 5000],
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(Error::Config("epochs must be >= 1".into()));
        }
        if self.negative_ratio < 1 {
            return Err(Error::Config("negative_ratio must be >= 1".into()));
        }
        if self.layers < 1 {
            return Err(Error::Config("layers must be >= 1".into()));
        }
        Ok(())
    }
}

/// The node/edge subset a forward pass runs over, with local indexing and
/// fixed per-(node, relation) in-degree normalizers.
#[derive(Clone, Debug)]
pub struct GraphView {
    pub nodes: Vec<NodeId>,
    local: HashMap<NodeId, usize>,
    pub edges: Vec<ViewEdge>,
    indeg: Vec<[f64; REL_COUNT]>,
}

#[derive(Clone, Copy, Debug)]
pub struct ViewEdge {
    pub head: usize,
    pub rel: RelKind,
    pub tail: usize,
    /// Index of the triple in the parent graph.
    pub source: usize,
}

impl GraphView {
    fn build(nodes: Vec<NodeId>, edge_iter: impl Iterator<Item = (usize, Triple)>) -> GraphView {
        let local: HashMap<NodeId, usize> =
            nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let mut edges = Vec::new();
        let mut indeg = vec![[0.0; REL_COUNT]; nodes.len()];
        for (source, t) in edge_iter {
            let head = local[&t.head];
            let tail = local[&t.tail];
            edges.push(ViewEdge { head, rel: t.rel, tail, source });
            indeg[tail][t.rel.code()] += 1.0;
        }
        GraphView { nodes, local, edges, indeg }
    }

    /// Whole graph, nodes in global order (cells then drugs).
    pub fn full(g: &HeteroGraph) -> GraphView {
        let nodes: Vec<NodeId> = (0..g.cell_num())
            .map(NodeId::cell)
            .chain((0..g.drug_num()).map(NodeId::drug))
            .collect();
        GraphView::build(nodes, g.triples().iter().copied().enumerate())
    }

    /// Restriction to a neighborhood; edge order follows the neighborhood.
    pub fn neighborhood(n: &Neighborhood) -> GraphView {
        let nodes: Vec<NodeId> = n.nodes.iter().copied().collect();
        GraphView::build(nodes, n.edges.iter().copied())
    }

    pub fn local_index(&self, n: NodeId) -> Option<usize> {
        self.local.get(&n).copied()
    }

    pub fn len_nodes(&self) -> usize {
        self.nodes.len()
    }
}

/// Cached activations from a forward pass: `h[0]` is the projected input,
/// `h[L]` the final embedding; `z` are pre-activations per layer.
#[derive(Clone, Debug)]
pub struct ForwardTrace {
    pub h: Vec<Matrix>,
    pub z: Vec<Matrix>,
}

impl ForwardTrace {
    pub fn embeddings(&self) -> &Matrix {
        self.h.last().unwrap()
    }
}

/// Gradients with the same layout as [`RgcnModel::params`].
#[derive(Clone, Debug)]
pub struct ParamGrads {
    pub proj_cell: Matrix,
    pub proj_drug: Matrix,
    pub layers: Vec<RgcnLayer>,
    pub rel_vecs: Matrix,
}

impl ParamGrads {
    pub fn zeros_like(model: &RgcnModel) -> Self {
        ParamGrads {
            proj_cell: Matrix::zeros(model.proj_cell.rows(), model.proj_cell.cols()),
            proj_drug: Matrix::zeros(model.proj_drug.rows(), model.proj_drug.cols()),
            layers: model
                .layers
                .iter()
                .map(|l| RgcnLayer {
                    w_rel: l.w_rel.iter().map(|w| Matrix::zeros(w.rows(), w.cols())).collect(),
                    w_self: Matrix::zeros(l.w_self.rows(), l.w_self.cols()),
                })
                .collect(),
            rel_vecs: Matrix::zeros(model.rel_vecs.rows(), model.rel_vecs.cols()),
        }
    }

    pub fn params(&self) -> Vec<&Matrix> {
        let mut out = vec![&self.proj_cell, &self.proj_drug];
        for layer in &self.layers {
            out.extend(layer.w_rel.iter());
            out.push(&layer.w_self);
        }
        out.push(&self.rel_vecs);
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut Matrix> {
        let mut out: Vec<&mut Matrix> = vec![&mut self.proj_cell, &mut self.proj_drug];
        for layer in &mut self.layers {
            out.extend(layer.w_rel.iter_mut());
            out.push(&mut layer.w_self);
        }
        out.push(&mut self.rel_vecs);
        out
    }
}

fn check_scale(view: &GraphView, scale: Option<&[f64]>) -> Result<()> {
    if let Some(s) = scale {
        if s.len() != view.edges.len() {
            return Err(Error::Dimension(format!(
                "edge scale length {} does not match {} view edges",
                s.len(),
                view.edges.len()
            )));
        }
    }
    Ok(())
}

/// Forward pass over a view. `scale` (if given) aligns with `view.edges`.
pub fn forward_view(
    model: &RgcnModel,
    g: &HeteroGraph,
    view: &GraphView,
    scale: Option<&[f64]>,
) -> Result<ForwardTrace> {
    check_scale(view, scale)?;
    let n = view.len_nodes();
    let d0 = model.dims[0];
    // Input projection per node kind.
    let mut h0 = Matrix::zeros(n, d0);
    for (i, &node) in view.nodes.iter().enumerate() {
        let proj = match node.kind {
            NodeKind::CellLine => &model.proj_cell,
            NodeKind::Drug => &model.proj_drug,
        };
        let feats = g.feature_row(node);
        if feats.len() != proj.rows() {
            return Err(Error::Dimension(format!(
                "feature length {} does not match projection rows {}",
                feats.len(),
                proj.rows()
            )));
        }
        accumulate_row_matmul(feats, proj, 1.0, h0.row_mut(i));
    }
    let mut h = vec![h0];
    let mut z_all = Vec::new();
    let last = model.layers.len() - 1;
    for (l, layer) in model.layers.iter().enumerate() {
        let hl = &h[l];
        // Self-loop term for every node.
        let mut z = matmul(hl, &layer.w_self)?;
        // Per-relation messages.
        let msgs: Vec<Matrix> = layer
            .w_rel
            .iter()
            .map(|w| matmul(hl, w))
            .collect::<Result<_>>()?;
        for (e, edge) in view.edges.iter().enumerate() {
            let c = view.indeg[edge.tail][edge.rel.code()];
            let m = scale.map_or(1.0, |s| s[e]);
            let coef = m / c;
            if coef != 0.0 {
                let src = msgs[edge.rel.code()].row(edge.head).to_vec();
                for (zt, &v) in z.row_mut(edge.tail).iter_mut().zip(&src) {
                    *zt += coef * v;
                }
            }
        }
        let hn = if l < last { z.map(|v| v.max(0.0)) } else { z.clone() };
        z_all.push(z);
        h.push(hn);
    }
    Ok(ForwardTrace { h, z: z_all })
}

/// Backward pass: given d(loss)/d(final embeddings), produce parameter
/// gradients (projections + layer weights; decoder gradients are the
/// caller's job) and, when requested, d(loss)/d(edge scale).
pub fn backward_view(
    model: &RgcnModel,
    g: &HeteroGraph,
    view: &GraphView,
    trace: &ForwardTrace,
    d_final: &Matrix,
    scale: Option<&[f64]>,
    want_scale_grads: bool,
) -> Result<(ParamGrads, Option<Vec<f64>>)> {
    check_scale(view, scale)?;
    let mut grads = ParamGrads::zeros_like(model);
    let mut scale_grads = if want_scale_grads {
        Some(vec![0.0; view.edges.len()])
    } else {
        None
    };
    let last = model.layers.len() - 1;
    let mut d_h = d_final.clone();
    for l in (0..model.layers.len()).rev() {
        let layer = &model.layers[l];
        let hl = &trace.h[l];
        // Activation derivative: ReLU on hidden layers, identity on the last.
        let d_z = if l < last {
            let z = &trace.z[l];
            Matrix::from_fn(d_h.rows(), d_h.cols(), |i, j| {
                if z.get(i, j) > 0.0 {
                    d_h.get(i, j)
                } else {
                    0.0
                }
            })
        } else {
            d_h.clone()
        };
        // Self-loop.
        grads.layers[l]
            .w_self
            .add_scaled(&matmul(&hl.transpose(), &d_z)?, 1.0)?;
        let mut d_h_prev = matmul(&d_z, &layer.w_self.transpose())?;
        // Relational messages: accumulate upstream gradient per source node,
        // then push through the relation weight in one matmul.
        for rel in RelKind::ALL {
            let r = rel.code();
            let mut d_msg = Matrix::zeros(hl.rows(), d_z.cols());
            let mut any = false;
            // Recomputed messages are needed only for scale gradients.
            let msg = if want_scale_grads {
                Some(matmul(hl, &layer.w_rel[r])?)
            } else {
                None
            };
            for (e, edge) in view.edges.iter().enumerate() {
                if edge.rel != rel {
                    continue;
                }
                any = true;
                let c = view.indeg[edge.tail][r];
                let m = scale.map_or(1.0, |s| s[e]);
                let coef = m / c;
                if coef != 0.0 {
                    let dzt = d_z.row(edge.tail).to_vec();
                    for (dm, &v) in d_msg.row_mut(edge.head).iter_mut().zip(&dzt) {
                        *dm += coef * v;
                    }
                }
                if let (Some(sg), Some(msg)) = (scale_grads.as_mut(), msg.as_ref()) {
                    sg[e] += dot(msg.row(edge.head), d_z.row(edge.tail)) / c;
                }
            }
            if any {
                grads.layers[l].w_rel[r].add_scaled(&matmul(&hl.transpose(), &d_msg)?, 1.0)?;
                d_h_prev.add_scaled(&matmul(&d_msg, &layer.w_rel[r].transpose())?, 1.0)?;
            }
        }
        d_h = d_h_prev;
    }
    // Input projections.
    for (i, &node) in view.nodes.iter().enumerate() {
        let feats = g.feature_row(node);
        let d_row = d_h.row(i).to_vec();
        let target = match node.kind {
            NodeKind::CellLine => &mut grads.proj_cell,
            NodeKind::Drug => &mut grads.proj_drug,
        };
        for (a, &x) in feats.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for (b, &d) in d_row.iter().enumerate() {
                let cur = target.get(a, b);
                target.set(a, b, cur + x * d);
            }
        }
    }
    Ok((grads, scale_grads))
}

/// Full-graph forward: returns final embeddings in global node order.
pub fn rgcn_forward(
    model: &RgcnModel,
    g: &HeteroGraph,
    edge_scale: Option<&[f64]>,
) -> Result<Matrix> {
    let view = GraphView::full(g);
    let mut trace = forward_view(model, g, &view, edge_scale)?;
    Ok(trace.h.pop().unwrap())
}

/// Raw DistMult score for local rows of an embedding matrix.
pub fn distmult_score(model: &RgcnModel, h: &Matrix, head: usize, rel: RelKind, tail: usize) -> f64 {
    let r = model.rel_vecs.row(rel.code());
    h.row(head)
        .iter()
        .zip(r)
        .zip(h.row(tail))
        .map(|((&eh, &rv), &et)| eh * rv * et)
        .sum()
}

/// `sigmoid(DistMult(head, rel, tail))` with embeddings in global node order.
pub fn link_probability(
    model: &RgcnModel,
    g: &HeteroGraph,
    embeddings: &Matrix,
    triple: &Triple,
) -> Result<f64> {
    for endpoint in [triple.head, triple.tail] {
        if !g.node_exists(endpoint) {
            return Err(Error::Validation(format!(
                "triple endpoint {endpoint} out of range"
            )));
        }
    }
    let h = g.global_index(triple.head);
    let t = g.global_index(triple.tail);
    Ok(sigmoid(distmult_score(model, embeddings, h, triple.rel, t)))
}

/// Per positive, `ratio` corrupted triples: uniformly pick head or tail and
/// replace with a uniform node of the same kind; resample until the result
/// is absent from `g`. Deterministic under `seed`.
pub fn sample_negatives(
    g: &HeteroGraph,
    positives: &[Triple],
    ratio: usize,
    seed: u64,
) -> Result<Vec<Triple>> {
    if ratio < 1 {
        return Err(Error::Config("negative ratio must be >= 1".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(positives.len() * ratio);
    const MAX_TRIES: usize = 500;
    for pos in positives {
        for _ in 0..ratio {
            let mut found = None;
            for _ in 0..MAX_TRIES {
                let corrupt_head = rng.gen_bool(0.5);
                let replace = |kind: NodeKind, rng: &mut ChaCha20Rng| match kind {
                    NodeKind::CellLine => NodeId::cell(rng.gen_range(0..g.cell_num())),
                    NodeKind::Drug => NodeId::drug(rng.gen_range(0..g.drug_num())),
                };
                let cand = if corrupt_head {
                    Triple::new(replace(pos.head.kind, &mut rng), pos.rel, pos.tail)
                } else {
                    Triple::new(pos.head, pos.rel, replace(pos.tail.kind, &mut rng))
                };
                if cand.rel.is_similarity() && cand.head == cand.tail {
                    continue;
                }
                if !g.contains(&cand) {
                    found = Some(cand);
                    break;
                }
            }
            match found {
                Some(t) => out.push(t),
                None => {
                    return Err(Error::Sampling(format!(
                        "could not corrupt {pos} after {MAX_TRIES} tries; candidate space exhausted"
                    )))
                }
            }
        }
    }
    Ok(out)
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-(x.abs())).exp().ln_1p()
}

/// Mean binary cross-entropy over `(triple, label)` samples plus gradients
/// for every model parameter (L2 excluded; the trainer adds it).
pub fn bce_loss_and_grads(
    model: &RgcnModel,
    g: &HeteroGraph,
    view: &GraphView,
    trace: &ForwardTrace,
    samples: &[(Triple, f64)],
) -> Result<(f64, ParamGrads)> {
    if samples.is_empty() {
        return Err(Error::Validation("no training samples".into()));
    }
    let h = trace.embeddings();
    let inv_n = 1.0 / samples.len() as f64;
    let mut loss = 0.0;
    let mut d_h = Matrix::zeros(h.rows(), h.cols());
    let mut d_rel = Matrix::zeros(REL_COUNT, model.embed_dim());
    for (t, label) in samples {
        let hi = view
            .local_index(t.head)
            .ok_or_else(|| Error::Validation(format!("sample head {} not in view", t.head)))?;
        let ti = view
            .local_index(t.tail)
            .ok_or_else(|| Error::Validation(format!("sample tail {} not in view", t.tail)))?;
        let s = distmult_score(model, h, hi, t.rel, ti);
        // BCE in the numerically stable softplus form.
        loss += inv_n * if *label > 0.5 { softplus(-s) } else { softplus(s) };
        let ds = inv_n * (sigmoid(s) - label);
        let r = t.rel.code();
        for k in 0..model.embed_dim() {
            let eh = h.get(hi, k);
            let et = h.get(ti, k);
            let rv = model.rel_vecs.get(r, k);
            d_h.set(hi, k, d_h.get(hi, k) + ds * rv * et);
            d_h.set(ti, k, d_h.get(ti, k) + ds * rv * eh);
            d_rel.set(r, k, d_rel.get(r, k) + ds * eh * et);
        }
    }
    let (mut grads, _) = backward_view(model, g, view, trace, &d_h, None, false)?;
    grads.rel_vecs.add_scaled(&d_rel, 1.0)?;
    Ok((loss, grads))
}

/// Training loss (BCE + L2) at the current parameters, no gradients. Used
/// by finite-difference checks.
pub fn training_loss(
    model: &RgcnModel,
    g: &HeteroGraph,
    samples: &[(Triple, f64)],
    l2: f64,
) -> Result<f64> {
    let view = GraphView::full(g);
    let trace = forward_view(model, g, &view, None)?;
    let h = trace.embeddings();
    let inv_n = 1.0 / samples.len() as f64;
    let mut loss = 0.0;
    for (t, label) in samples {
        let hi = view.local_index(t.head).unwrap();
        let ti = view.local_index(t.tail).unwrap();
        let s = distmult_score(model, h, hi, t.rel, ti);
        loss += inv_n * if *label > 0.5 { softplus(-s) } else { softplus(s) };
    }
    for p in model.params() {
        loss += l2 * p.sq_norm();
    }
    Ok(loss)
}

/// One epoch/evaluation record from training.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EpochStat {
    pub epoch: usize,
    pub loss: f64,
    pub auc: Option<f64>,
}

/// Extra knobs for [`train_detailed`].
#[derive(Clone, Debug, Default)]
pub struct TrainOptions {
    /// Held-out positives/negatives scored for the AUC column of the log.
    pub holdout: Option<(Vec<Triple>, Vec<Triple>)>,
    pub config_hash: String,
}

/// Training output: the final model, requested checkpoints and the log.
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: RgcnModel,
    pub checkpoints: Vec<RgcnModel>,
    pub log: Vec<EpochStat>,
}

fn derive_seed(base: u64, stream: u64) -> u64 {
    // splitmix64 step over the combined value.
    let mut z = base ^ stream.wrapping_mul(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Full-batch Adam training on all triples of `g` as positives, with fresh
/// filtered negatives each epoch. Deterministic under `cfg.seed`.
pub fn train_detailed(
    g: &HeteroGraph,
    cfg: &TrainConfig,
    opts: &TrainOptions,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if g.triples().is_empty() {
        return Err(Error::Validation("cannot train on an empty graph".into()));
    }
    let mut model = RgcnModel::init(g, cfg.layers, cfg.dim, derive_seed(cfg.seed, 1));
    model.config_hash = opts.config_hash.clone();
    let view = GraphView::full(g);
    let positives = g.triples().to_vec();
    let mut adam: Vec<AdamState> = model
        .params()
        .iter()
        .map(|p| AdamState::new(p.len(), cfg.lr))
        .collect();
    let mut checkpoints = Vec::new();
    let mut log = Vec::new();
    for epoch in 1..=cfg.epochs {
        let negs = sample_negatives(g, &positives, cfg.negative_ratio, derive_seed(cfg.seed, 1000 + epoch as u64))?;
        let samples: Vec<(Triple, f64)> = positives
            .iter()
            .map(|&t| (t, 1.0))
            .chain(negs.into_iter().map(|t| (t, 0.0)))
            .collect();
        let trace = forward_view(&model, g, &view, None)?;
        let (bce, mut grads) = bce_loss_and_grads(&model, g, &view, &trace, &samples)?;
        let mut loss = bce;
        for (gm, pm) in grads.params_mut().into_iter().zip(model.params()) {
            loss += cfg.l2 * pm.sq_norm();
            gm.add_scaled(pm, 2.0 * cfg.l2)?;
        }
        if !loss.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite training loss {loss} at epoch {epoch}"
            )));
        }
        for ((pm, gm), state) in model
            .params_mut()
            .into_iter()
            .zip(grads.params())
            .zip(adam.iter_mut())
        {
            state.update(pm, gm)?;
        }
        model.epoch = epoch;
        log::debug!("epoch {epoch}: loss {loss:.6}");
        if epoch % cfg.eval_interval == 0 || epoch == cfg.epochs {
            let auc = match &opts.holdout {
                Some((pos, neg)) if !pos.is_empty() && !neg.is_empty() => {
                    let emb = {
                        let t = forward_view(&model, g, &view, None)?;
                        t.h.last().unwrap().clone()
                    };
                    let score = |t: &Triple| {
                        distmult_score(
                            &model,
                            &emb,
                            g.global_index(t.head),
                            t.rel,
                            g.global_index(t.tail),
                        )
                    };
                    let pos_s: Vec<f64> = pos.iter().map(score).collect();
                    let neg_s: Vec<f64> = neg.iter().map(score).collect();
                    Some(auc_rank(&pos_s, &neg_s))
                }
                _ => None,
            };
            log.push(EpochStat { epoch, loss, auc });
        }
        if cfg.checkpoint_epochs.contains(&epoch) {
            checkpoints.push(model.clone());
        }
    }
    Ok(TrainOutcome { model, checkpoints, log })
}

/// Convenience wrapper returning only the trained model.
pub fn train(g: &HeteroGraph, cfg: &TrainConfig) -> Result<RgcnModel> {
    train_detailed(g, cfg, &TrainOptions::default()).map(|o| o.model)
}

/// Rank-based AUC with tie handling via midranks.
pub fn auc_rank(pos: &[f64], neg: &[f64]) -> f64 {
    let mut all: Vec<(f64, bool)> = pos
        .iter()
        .map(|&s| (s, true))
        .chain(neg.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // Midranks over tie groups.
    let n = all.len();
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && all[j].0 == all[i].0 {
            j += 1;
        }
        let midrank = (i + j + 1) as f64 / 2.0; // ranks are 1-based
        for item in &all[i..j] {
            if item.1 {
                rank_sum_pos += midrank;
            }
        }
        i = j;
    }
    let np = pos.len() as f64;
    let nn = neg.len() as f64;
    (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn)
}

/// Write the model as versioned JSON; round-trip is bit-exact.
pub fn save_checkpoint(model: &RgcnModel, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(model)?;
    std::fs::write(path, json)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<RgcnModel> {
    let text = std::fs::read_to_string(path)?;
    let model: RgcnModel = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: e.line(),
        msg: e.to_string(),
    })?;
    model.validate().map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: 0,
        msg: e.to_string(),
    })?;
    Ok(model)
}
