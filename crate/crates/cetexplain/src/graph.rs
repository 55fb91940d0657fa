//! Heterogeneous triple store over cell-line and drug nodes.
//!
//! Four relation kinds connect the two node kinds: `Sen`/`Res` run
//! CellLine→Drug, `Dsim` Drug→Drug and `Csim` CellLine→CellLine. Similarity
//! triples are materialized in both directions. The store keeps insertion
//! order and an adjacency index per relation for both directions.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::numerics::Matrix;
use crate::{Error, Result};

pub const REL_COUNT: usize = 4;

/// Relation kinds with their stable file codes: 0=Res, 1=Sen, 2=Dsim, 3=Csim.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum RelKind {
    Res,
    Sen,
    Dsim,
    Csim,
}

impl RelKind {
    pub const ALL: [RelKind; REL_COUNT] = [RelKind::Res, RelKind::Sen, RelKind::Dsim, RelKind::Csim];

    pub fn code(self) -> usize {
        match self {
            RelKind::Res => 0,
            RelKind::Sen => 1,
            RelKind::Dsim => 2,
            RelKind::Csim => 3,
        }
    }

    pub fn from_code(code: usize) -> Result<Self> {
        match code {
            0 => Ok(RelKind::Res),
            1 => Ok(RelKind::Sen),
            2 => Ok(RelKind::Dsim),
            3 => Ok(RelKind::Csim),
            _ => Err(Error::Validation(format!("unknown relation code {code}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RelKind::Res => "Res",
            RelKind::Sen => "Sen",
            RelKind::Dsim => "Dsim",
            RelKind::Csim => "Csim",
        }
    }

    pub fn is_similarity(self) -> bool {
        matches!(self, RelKind::Dsim | RelKind::Csim)
    }

    pub fn is_response(self) -> bool {
        matches!(self, RelKind::Sen | RelKind::Res)
    }
}

impl fmt::Display for RelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Res" => Ok(RelKind::Res),
            "Sen" => Ok(RelKind::Sen),
            "Dsim" => Ok(RelKind::Dsim),
            "Csim" => Ok(RelKind::Csim),
            other => Err(Error::Validation(format!("unknown relation '{other}'"))),
        }
    }
}

impl From<RelKind> for String {
    fn from(r: RelKind) -> String {
        r.name().to_string()
    }
}

impl TryFrom<String> for RelKind {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeKind {
    CellLine,
    Drug,
}

/// Node identity: kind plus a dense per-kind index. Rendered as `c<i>` /
/// `d<i>` in files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct NodeId {
    pub kind: NodeKind,
    pub index: usize,
}

impl NodeId {
    pub fn cell(index: usize) -> Self {
        NodeId {
            kind: NodeKind::CellLine,
            index,
        }
    }

    pub fn drug(index: usize) -> Self {
        NodeId {
            kind: NodeKind::Drug,
            index,
        }
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.kind {
            NodeKind::CellLine => 'c',
            NodeKind::Drug => 'd',
        };
        write!(f, "{prefix}{}", self.index)
    }
}

impl FromStr for NodeId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.chars();
        let kind = match chars.next() {
            Some('c') => NodeKind::CellLine,
            Some('d') => NodeKind::Drug,
            _ => {
                return Err(Error::Validation(format!(
                    "node id '{s}' must start with 'c' or 'd'"
                )))
            }
        };
        let index = chars
            .as_str()
            .parse::<usize>()
            .map_err(|_| Error::Validation(format!("node id '{s}' has a non-numeric index")))?;
        Ok(NodeId { kind, index })
    }
}

impl From<NodeId> for String {
    fn from(n: NodeId) -> String {
        n.to_string()
    }
}

impl TryFrom<String> for NodeId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// A directed labelled edge `(head, rel, tail)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    pub head: NodeId,
    pub rel: RelKind,
    pub tail: NodeId,
}

impl Triple {
    pub fn new(head: NodeId, rel: RelKind, tail: NodeId) -> Self {
        Triple { head, rel, tail }
    }

    /// Endpoint-kind constraints: Sen/Res are CellLine→Drug, Dsim is
    /// Drug→Drug, Csim CellLine→CellLine; no self-loops in similarity.
    pub fn validate_kinds(&self) -> Result<()> {
        let ok = match self.rel {
            RelKind::Sen | RelKind::Res => {
                self.head.kind == NodeKind::CellLine && self.tail.kind == NodeKind::Drug
            }
            RelKind::Dsim => self.head.kind == NodeKind::Drug && self.tail.kind == NodeKind::Drug,
            RelKind::Csim => {
                self.head.kind == NodeKind::CellLine && self.tail.kind == NodeKind::CellLine
            }
        };
        if !ok {
            return Err(Error::Validation(format!(
                "triple {self} violates endpoint kinds for {}",
                self.rel
            )));
        }
        if self.rel.is_similarity() && self.head == self.tail {
            return Err(Error::Validation(format!(
                "similarity self-loop {self} is not allowed"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.head, self.rel, self.tail)
    }
}

/// One IC50 measurement with its sensitivity threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub cell: NodeId,
    pub drug: NodeId,
    pub ic50: f64,
    pub threshold: f64,
}

/// Where the binarization threshold comes from.
#[derive(Clone, Copy, Debug)]
pub enum ThresholdSource {
    /// Use the per-drug threshold carried by each record.
    PerRecord,
    /// Ignore record thresholds and apply one global value.
    Global(f64),
}

/// How similarity edges are selected from pairwise cosine.
#[derive(Clone, Copy, Debug)]
pub enum SimMode {
    /// Keep pairs with cosine at or above `t`.
    Threshold(f64),
    /// Pick a cutoff so the selected ordered pairs are ≈ this fraction of
    /// all ordered pairs.
    Quantile(f64),
}

/// Immutable multi-relational triple store plus node features.
#[derive(Clone, Debug)]
pub struct HeteroGraph {
    triples: Vec<Triple>,
    cell_features: Matrix,
    drug_features: Matrix,
    out_adj: Vec<HashMap<NodeId, Vec<(NodeId, usize)>>>,
    in_adj: Vec<HashMap<NodeId, Vec<(NodeId, usize)>>>,
    triple_index: HashMap<Triple, usize>,
}

/// Side facts from [`assemble_graph`].
#[derive(Clone, Copy, Debug, Default)]
pub struct AssembleStats {
    pub duplicates_dropped: usize,
}

impl HeteroGraph {
    pub fn cell_num(&self) -> usize {
        self.cell_features.rows()
    }

    pub fn drug_num(&self) -> usize {
        self.drug_features.rows()
    }

    pub fn node_count(&self) -> usize {
        self.cell_num() + self.drug_num()
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn triple(&self, idx: usize) -> Triple {
        self.triples[idx]
    }

    pub fn cell_features(&self) -> &Matrix {
        &self.cell_features
    }

    pub fn drug_features(&self) -> &Matrix {
        &self.drug_features
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.triple_index.contains_key(t)
    }

    pub fn index_of(&self, t: &Triple) -> Option<usize> {
        self.triple_index.get(t).copied()
    }

    pub fn node_exists(&self, n: NodeId) -> bool {
        match n.kind {
            NodeKind::CellLine => n.index < self.cell_num(),
            NodeKind::Drug => n.index < self.drug_num(),
        }
    }

    /// Global dense index: cells first, then drugs.
    pub fn global_index(&self, n: NodeId) -> usize {
        match n.kind {
            NodeKind::CellLine => n.index,
            NodeKind::Drug => self.cell_num() + n.index,
        }
    }

    pub fn node_from_global(&self, g: usize) -> NodeId {
        if g < self.cell_num() {
            NodeId::cell(g)
        } else {
            NodeId::drug(g - self.cell_num())
        }
    }

    pub fn feature_row(&self, n: NodeId) -> &[f64] {
        match n.kind {
            NodeKind::CellLine => self.cell_features.row(n.index),
            NodeKind::Drug => self.drug_features.row(n.index),
        }
    }

    /// Outgoing `(tail, triple_index)` pairs under `rel`.
    pub fn out_neighbors(&self, head: NodeId, rel: RelKind) -> &[(NodeId, usize)] {
        self.out_adj[rel.code()]
            .get(&head)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    /// Incoming `(head, triple_index)` pairs under `rel`.
    pub fn in_neighbors(&self, tail: NodeId, rel: RelKind) -> &[(NodeId, usize)] {
        self.in_adj[rel.code()]
            .get(&tail)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    /// All stored triples under `rel` between `a` and `b`, either direction.
    pub fn triples_between(&self, a: NodeId, b: NodeId, rel: RelKind) -> Vec<Triple> {
        let mut found = Vec::new();
        for &(tail, idx) in self.out_neighbors(a, rel) {
            if tail == b {
                found.push(self.triples[idx]);
            }
        }
        for &(head, idx) in self.in_neighbors(a, rel) {
            if head == b {
                found.push(self.triples[idx]);
            }
        }
        found.sort();
        found.dedup();
        found
    }

    /// Similarity partners of `node` under `rel`, matching either stored
    /// direction, deduplicated.
    pub fn sim_partners(&self, node: NodeId, rel: RelKind) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = self
            .out_neighbors(node, rel)
            .iter()
            .map(|&(n, _)| n)
            .chain(self.in_neighbors(node, rel).iter().map(|&(n, _)| n))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Undirected neighbors across all relations, deduplicated.
    pub fn undirected_neighbors(&self, node: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        for rel in RelKind::ALL {
            for &(n, _) in self.out_neighbors(node, rel) {
                out.push(n);
            }
            for &(n, _) in self.in_neighbors(node, rel) {
                out.push(n);
            }
        }
        out.sort();
        out.dedup();
        out
    }

    pub fn count_by_rel(&self) -> [usize; REL_COUNT] {
        let mut counts = [0usize; REL_COUNT];
        for t in &self.triples {
            counts[t.rel.code()] += 1;
        }
        counts
    }
}

/// Subgraph within `hops` undirected hops of a target link's endpoints.
/// The target triple itself is excluded from `edges`.
#[derive(Clone, Debug)]
pub struct Neighborhood {
    pub center: (NodeId, NodeId),
    pub hops: usize,
    /// `(index in parent graph, triple)` pairs, in parent order.
    pub edges: Vec<(usize, Triple)>,
    pub nodes: BTreeSet<NodeId>,
}

impl Neighborhood {
    pub fn triples(&self) -> impl Iterator<Item = Triple> + '_ {
        self.edges.iter().map(|&(_, t)| t)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na = crate::numerics::dot(a, a).sqrt();
    let nb = crate::numerics::dot(b, b).sqrt();
    crate::numerics::dot(a, b) / (na * nb)
}

/// Emit both directed similarity triples for every unordered feature-row
/// pair selected by `mode`. Zero-norm rows are skipped with a warning.
pub fn build_similarity_triples(
    features: &Matrix,
    kind: NodeKind,
    mode: SimMode,
) -> Result<Vec<Triple>> {
    if features.rows() < 2 {
        return Err(Error::Validation(format!(
            "similarity construction needs at least 2 rows, got {}",
            features.rows()
        )));
    }
    match mode {
        SimMode::Threshold(t) if !(-1.0..=1.0).contains(&t) => {
            return Err(Error::Config(format!(
                "cosine threshold {t} outside [-1, 1]"
            )));
        }
        SimMode::Quantile(f) if !(f > 0.0 && f < 1.0) => {
            return Err(Error::Config(format!("quantile fraction {f} outside (0, 1)")));
        }
        _ => {}
    }
    let rel = match kind {
        NodeKind::CellLine => RelKind::Csim,
        NodeKind::Drug => RelKind::Dsim,
    };
    let make = |i: usize| match kind {
        NodeKind::CellLine => NodeId::cell(i),
        NodeKind::Drug => NodeId::drug(i),
    };
    let mut usable = Vec::new();
    for i in 0..features.rows() {
        if crate::numerics::dot(features.row(i), features.row(i)) == 0.0 {
            log::warn!("excluding zero-norm feature row {} from similarity pairing", make(i));
        } else {
            usable.push(i);
        }
    }
    // All unordered pairs with their cosine, in deterministic order.
    let mut pairs = Vec::new();
    for (p, &i) in usable.iter().enumerate() {
        for &j in &usable[p + 1..] {
            pairs.push((i, j, cosine(features.row(i), features.row(j))));
        }
    }
    let selected: Vec<(usize, usize)> = match mode {
        SimMode::Threshold(t) => pairs
            .iter()
            .filter(|&&(_, _, c)| c >= t)
            .map(|&(i, j, _)| (i, j))
            .collect(),
        SimMode::Quantile(f) => {
            // Ordered pairs are twice the unordered count, so the fraction
            // carries over directly to unordered pairs.
            let take = ((f * pairs.len() as f64).round() as usize).min(pairs.len());
            let mut sorted = pairs.clone();
            sorted.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap().then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
            let mut sel: Vec<(usize, usize)> =
                sorted[..take].iter().map(|&(i, j, _)| (i, j)).collect();
            sel.sort();
            sel
        }
    };
    let mut triples = Vec::with_capacity(selected.len() * 2);
    for (i, j) in selected {
        triples.push(Triple::new(make(i), rel, make(j)));
        triples.push(Triple::new(make(j), rel, make(i)));
    }
    Ok(triples)
}

/// IC50 below the threshold → Sen, otherwise Res (boundary is Res).
pub fn binarize_responses(
    records: &[ResponseRecord],
    source: ThresholdSource,
) -> Result<Vec<Triple>> {
    let mut out = Vec::with_capacity(records.len());
    for rec in records {
        if !rec.ic50.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite IC50 for ({}, {})",
                rec.cell, rec.drug
            )));
        }
        let threshold = match source {
            ThresholdSource::Global(t) => t,
            ThresholdSource::PerRecord => {
                if !rec.threshold.is_finite() {
                    return Err(Error::Config(format!(
                        "missing IC50 threshold for drug {}",
                        rec.drug
                    )));
                }
                rec.threshold
            }
        };
        let rel = if rec.ic50 < threshold {
            RelKind::Sen
        } else {
            RelKind::Res
        };
        out.push(Triple::new(rec.cell, rel, rec.drug));
    }
    Ok(out)
}

/// Combine response and similarity triples into a validated, deduplicated
/// store with a consistent adjacency index.
pub fn assemble_graph(
    response: &[Triple],
    cell_sim: &[Triple],
    drug_sim: &[Triple],
    cell_features: Matrix,
    drug_features: Matrix,
) -> Result<(HeteroGraph, AssembleStats)> {
    let cell_num = cell_features.rows();
    let drug_num = drug_features.rows();
    let in_range = |n: NodeId| match n.kind {
        NodeKind::CellLine => n.index < cell_num,
        NodeKind::Drug => n.index < drug_num,
    };
    let mut triples = Vec::new();
    let mut triple_index = HashMap::new();
    let mut out_adj: Vec<HashMap<NodeId, Vec<(NodeId, usize)>>> = vec![HashMap::new(); REL_COUNT];
    let mut in_adj: Vec<HashMap<NodeId, Vec<(NodeId, usize)>>> = vec![HashMap::new(); REL_COUNT];
    let mut stats = AssembleStats::default();
    for &t in response.iter().chain(cell_sim).chain(drug_sim) {
        t.validate_kinds()?;
        if !in_range(t.head) || !in_range(t.tail) {
            return Err(Error::Validation(format!(
                "triple {t} references a node outside the feature tables ({cell_num} cells, {drug_num} drugs)"
            )));
        }
        if triple_index.contains_key(&t) {
            stats.duplicates_dropped += 1;
            continue;
        }
        let idx = triples.len();
        triples.push(t);
        triple_index.insert(t, idx);
        out_adj[t.rel.code()].entry(t.head).or_default().push((t.tail, idx));
        in_adj[t.rel.code()].entry(t.tail).or_default().push((t.head, idx));
    }
    if stats.duplicates_dropped > 0 {
        log::debug!("assemble_graph dropped {} duplicate triples", stats.duplicates_dropped);
    }
    Ok((
        HeteroGraph {
            triples,
            cell_features,
            drug_features,
            out_adj,
            in_adj,
            triple_index,
        },
        stats,
    ))
}

/// K-hop neighborhood of a target link: nodes reachable within `k`
/// undirected hops from either endpoint, and every graph triple with both
/// endpoints inside, minus the target itself.
pub fn extract_neighborhood(g: &HeteroGraph, target: &Triple, k: usize) -> Result<Neighborhood> {
    for endpoint in [target.head, target.tail] {
        if !g.node_exists(endpoint) {
            return Err(Error::Validation(format!(
                "target endpoint {endpoint} not present in graph"
            )));
        }
    }
    let mut nodes = BTreeSet::new();
    let mut queue = VecDeque::new();
    for start in [target.head, target.tail] {
        if nodes.insert(start) {
            queue.push_back((start, 0usize));
        }
    }
    while let Some((node, depth)) = queue.pop_front() {
        if depth == k {
            continue;
        }
        for nb in g.undirected_neighbors(node) {
            if nodes.insert(nb) {
                queue.push_back((nb, depth + 1));
            }
        }
    }
    let mut edges = Vec::new();
    for (idx, t) in g.triples().iter().enumerate() {
        if t == target {
            continue;
        }
        if nodes.contains(&t.head) && nodes.contains(&t.tail) {
            edges.push((idx, *t));
        }
    }
    Ok(Neighborhood {
        center: (target.head, target.tail),
        hops: k,
        edges,
        nodes,
    })
}
