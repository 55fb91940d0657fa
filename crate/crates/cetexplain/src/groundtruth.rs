//! Ground-truth construction for response-link explanations.
//!
//! A target `(c, ρ, d)` with ρ ∈ {Sen, Res} is justified by same-relation
//! response evidence among one-hop similarity neighbors, in three
//! situations:
//!
//! * Sit1: `(c, ρ, d')` with `d'` drug-similar to `d`,
//! * Sit2: `(c', ρ, d)` with `c'` cell-similar to `c`,
//! * Sit3: `(c', ρ, d')` with `c'` cell-similar to `c` and `d'`
//!   drug-similar to `d`.
//!
//! Each situation contributes its response triple plus every stored
//! similarity triple on the chain (either direction). The result is a flat
//! triple set with per-member situation tags.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::graph::{HeteroGraph, RelKind, Triple};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Situation {
    Sit1,
    Sit2,
    Sit3,
}

/// One member triple with the situations that justify it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GtMember {
    pub triple: Triple,
    pub situations: Vec<Situation>,
}

/// Ground-truth triple set for one target link.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroundTruthSet {
    pub target: Triple,
    pub members: Vec<GtMember>,
}

impl GroundTruthSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn triple_set(&self) -> BTreeSet<Triple> {
        self.members.iter().map(|m| m.triple).collect()
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.members.iter().any(|m| m.triple == *t)
    }
}

/// Construct the ground truth for a Sen/Res target from one-hop similarity
/// neighbors with same-relation response evidence.
pub fn build_ground_truth(g: &HeteroGraph, target: &Triple) -> Result<GroundTruthSet> {
    if !target.rel.is_response() {
        return Err(Error::Validation(format!(
            "ground truth is only defined for Sen/Res targets, got {}",
            target.rel
        )));
    }
    for endpoint in [target.head, target.tail] {
        if !g.node_exists(endpoint) {
            return Err(Error::Validation(format!(
                "target endpoint {endpoint} not present in graph"
            )));
        }
    }
    let rho = target.rel;
    let cell = target.head;
    let drug = target.tail;
    let mut acc: BTreeMap<Triple, BTreeSet<Situation>> = BTreeMap::new();
    let add = |t: Triple, sit: Situation, acc: &mut BTreeMap<Triple, BTreeSet<Situation>>| {
        acc.entry(t).or_default().insert(sit);
    };

    let drug_partners = g.sim_partners(drug, RelKind::Dsim);
    let cell_partners = g.sim_partners(cell, RelKind::Csim);

    // Sit1: (c, ρ, d') with d' ~Dsim~ d.
    for &(d_alt, idx) in g.out_neighbors(cell, rho) {
        if d_alt == drug || !drug_partners.contains(&d_alt) {
            continue;
        }
        add(g.triple(idx), Situation::Sit1, &mut acc);
        for t in g.triples_between(d_alt, drug, RelKind::Dsim) {
            add(t, Situation::Sit1, &mut acc);
        }
    }
    // Sit2: (c', ρ, d) with c' ~Csim~ c.
    for &(c_alt, idx) in g.in_neighbors(drug, rho) {
        if c_alt == cell || !cell_partners.contains(&c_alt) {
            continue;
        }
        add(g.triple(idx), Situation::Sit2, &mut acc);
        for t in g.triples_between(c_alt, cell, RelKind::Csim) {
            add(t, Situation::Sit2, &mut acc);
        }
    }
    // Sit3: (c', ρ, d') with both endpoints similar to the target's.
    for &c_alt in &cell_partners {
        if c_alt == cell {
            continue;
        }
        for &(d_alt, idx) in g.out_neighbors(c_alt, rho) {
            if d_alt == drug || !drug_partners.contains(&d_alt) {
                continue;
            }
            add(g.triple(idx), Situation::Sit3, &mut acc);
            for t in g.triples_between(c_alt, cell, RelKind::Csim) {
                add(t, Situation::Sit3, &mut acc);
            }
            for t in g.triples_between(d_alt, drug, RelKind::Dsim) {
                add(t, Situation::Sit3, &mut acc);
            }
        }
    }
    acc.remove(target); // the target never justifies itself
    Ok(GroundTruthSet {
        target: *target,
        members: acc
            .into_iter()
            .map(|(triple, sits)| GtMember {
                triple,
                situations: sits.into_iter().collect(),
            })
            .collect(),
    })
}

/// Histogram of ground-truth sizes binned Table-1 style: fixed-width bins
/// from `bin_start`, with an underflow bin for smaller sizes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Histogram {
    pub bins: Vec<HistogramBin>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: usize,
    pub hi: usize,
    pub count: usize,
    pub proportion: f64,
}

pub fn size_histogram(sizes: &[usize], bin_width: usize, bin_start: usize) -> Result<Histogram> {
    if bin_width < 1 {
        return Err(Error::Config("bin width must be >= 1".into()));
    }
    if sizes.is_empty() {
        return Ok(Histogram { bins: Vec::new() });
    }
    let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for &s in sizes {
        let key = if s < bin_start {
            (0, bin_start.saturating_sub(1))
        } else {
            let b = (s - bin_start) / bin_width;
            (bin_start + b * bin_width, bin_start + (b + 1) * bin_width - 1)
        };
        *counts.entry(key).or_insert(0) += 1;
    }
    let total = sizes.len() as f64;
    Ok(Histogram {
        bins: counts
            .into_iter()
            .map(|((lo, hi), count)| HistogramBin {
                lo,
                hi,
                count,
                proportion: count as f64 / total,
            })
            .collect(),
    })
}

/// GT-size distribution over a batch of targets.
pub fn gt_distribution(
    g: &HeteroGraph,
    targets: &[Triple],
    bin_width: usize,
) -> Result<Histogram> {
    let sizes: Vec<usize> = targets
        .iter()
        .map(|t| build_ground_truth(g, t).map(|gt| gt.len()))
        .collect::<Result<_>>()?;
    // Table-1 bin convention: bins start at 10.
    size_histogram(&sizes, bin_width, 10)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{assemble_graph, NodeId};
    use crate::numerics::Matrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;
    use std::collections::HashSet;

    fn feats(n: usize) -> Matrix {
        Matrix::from_fn(n, 3, |i, j| (i * 5 + j + 1) as f64)
    }

    #[test]
    fn sit1_two_triple_case() {
        // (c0, Sen, d1) and d1 ~Dsim~ d0; target (c0, Sen, d0).
        let resp = Triple::new(NodeId::cell(0), RelKind::Sen, NodeId::drug(1));
        let dsim = Triple::new(NodeId::drug(1), RelKind::Dsim, NodeId::drug(0));
        let (g, _) = assemble_graph(&[resp], &[], &[dsim], feats(1), feats(2)).unwrap();
        let target = Triple::new(NodeId::cell(0), RelKind::Sen, NodeId::drug(0));
        let gt = build_ground_truth(&g, &target).unwrap();
        assert_eq!(gt.len(), 2);
        assert!(gt.contains(&resp) && gt.contains(&dsim));
        for m in &gt.members {
            assert_eq!(m.situations, vec![Situation::Sit1]);
        }
    }

    #[test]
    fn no_similarity_edges_means_empty_gt() {
        let resp = Triple::new(NodeId::cell(1), RelKind::Sen, NodeId::drug(0));
        let (g, _) = assemble_graph(&[resp], &[], &[], feats(2), feats(1)).unwrap();
        let target = Triple::new(NodeId::cell(0), RelKind::Sen, NodeId::drug(0));
        let gt = build_ground_truth(&g, &target).unwrap();
        assert!(gt.is_empty());
    }

    #[test]
    fn similarity_target_is_rejected() {
        let (g, _) = assemble_graph(&[], &[], &[], feats(2), feats(2)).unwrap();
        let target = Triple::new(NodeId::cell(0), RelKind::Csim, NodeId::cell(1));
        assert!(build_ground_truth(&g, &target).is_err());
    }

    fn random_graph(seed: u64, cells: usize, drugs: usize, n: usize) -> HeteroGraph {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut resp = Vec::new();
        let mut csim = Vec::new();
        let mut dsim = Vec::new();
        let mut seen = HashSet::new();
        while resp.len() + csim.len() + dsim.len() < n {
            let roll = rng.gen_range(0..4);
            let t = match roll {
                0 | 1 => Triple::new(
                    NodeId::cell(rng.gen_range(0..cells)),
                    if roll == 0 { RelKind::Sen } else { RelKind::Res },
                    NodeId::drug(rng.gen_range(0..drugs)),
                ),
                2 => {
                    let a = rng.gen_range(0..cells);
                    let b = rng.gen_range(0..cells);
                    if a == b {
                        continue;
                    }
                    Triple::new(NodeId::cell(a), RelKind::Csim, NodeId::cell(b))
                }
                _ => {
                    let a = rng.gen_range(0..drugs);
                    let b = rng.gen_range(0..drugs);
                    if a == b {
                        continue;
                    }
                    Triple::new(NodeId::drug(a), RelKind::Dsim, NodeId::drug(b))
                }
            };
            if !seen.insert(t) {
                continue;
            }
            match t.rel {
                RelKind::Sen | RelKind::Res => resp.push(t),
                RelKind::Csim => csim.push(t),
                RelKind::Dsim => dsim.push(t),
            }
        }
        assemble_graph(&resp, &csim, &dsim, feats(cells), feats(drugs)).unwrap().0
    }

    /// Brute-force nested-loop oracle over the raw triple list.
    fn gt_oracle(g: &HeteroGraph, target: &Triple) -> BTreeSet<Triple> {
        let rho = target.rel;
        let (c, d) = (target.head, target.tail);
        let sim = |a: NodeId, b: NodeId, rel: RelKind| -> Vec<Triple> {
            g.triples()
                .iter()
                .filter(|t| {
                    t.rel == rel
                        && ((t.head == a && t.tail == b) || (t.head == b && t.tail == a))
                })
                .copied()
                .collect()
        };
        let mut out = BTreeSet::new();
        for t in g.triples() {
            if t.rel != rho || *t == *target {
                continue;
            }
            // Sit1
            if t.head == c && t.tail != d {
                let links = sim(t.tail, d, RelKind::Dsim);
                if !links.is_empty() {
                    out.insert(*t);
                    out.extend(links);
                }
            }
            // Sit2
            if t.tail == d && t.head != c {
                let links = sim(t.head, c, RelKind::Csim);
                if !links.is_empty() {
                    out.insert(*t);
                    out.extend(links);
                }
            }
            // Sit3
            if t.head != c && t.tail != d {
                let clinks = sim(t.head, c, RelKind::Csim);
                let dlinks = sim(t.tail, d, RelKind::Dsim);
                if !clinks.is_empty() && !dlinks.is_empty() {
                    out.insert(*t);
                    out.extend(clinks);
                    out.extend(dlinks);
                }
            }
        }
        out.remove(target);
        out
    }

    #[test]
    fn matches_brute_force_enumeration_on_random_graphs() {
        for seed in 0..5 {
            let g = random_graph(seed, 30, 30, 400);
            let targets: Vec<Triple> = g
                .triples()
                .iter()
                .filter(|t| t.rel.is_response())
                .take(50)
                .copied()
                .collect();
            for target in &targets {
                let gt = build_ground_truth(&g, target).unwrap();
                assert_eq!(gt.triple_set(), gt_oracle(&g, target), "target {target}");
                // Every member carries at least one situation tag.
                for m in &gt.members {
                    assert!(!m.situations.is_empty());
                }
            }
        }
    }

    #[test]
    fn invariant_to_triple_ordering() {
        let g = random_graph(9, 15, 15, 200);
        let target = *g.triples().iter().find(|t| t.rel.is_response()).unwrap();
        let gt1 = build_ground_truth(&g, &target).unwrap();
        // Rebuild the graph with triples reversed.
        let mut resp = Vec::new();
        let mut csim = Vec::new();
        let mut dsim = Vec::new();
        for t in g.triples().iter().rev() {
            match t.rel {
                RelKind::Sen | RelKind::Res => resp.push(*t),
                RelKind::Csim => csim.push(*t),
                RelKind::Dsim => dsim.push(*t),
            }
        }
        let (g2, _) = assemble_graph(
            &resp,
            &csim,
            &dsim,
            g.cell_features().clone(),
            g.drug_features().clone(),
        )
        .unwrap();
        let gt2 = build_ground_truth(&g2, &target).unwrap();
        assert_eq!(gt1.triple_set(), gt2.triple_set());
    }

    #[test]
    fn monotone_under_graph_growth() {
        let g_small = random_graph(10, 12, 12, 100);
        // Grow: same triples plus more.
        let g_big = {
            let big = random_graph(11, 12, 12, 150);
            let mut resp = Vec::new();
            let mut csim = Vec::new();
            let mut dsim = Vec::new();
            for t in g_small.triples().iter().chain(big.triples()) {
                match t.rel {
                    RelKind::Sen | RelKind::Res => resp.push(*t),
                    RelKind::Csim => csim.push(*t),
                    RelKind::Dsim => dsim.push(*t),
                }
            }
            assemble_graph(
                &resp,
                &csim,
                &dsim,
                g_small.cell_features().clone(),
                g_small.drug_features().clone(),
            )
            .unwrap()
            .0
        };
        for target in g_small.triples().iter().filter(|t| t.rel.is_response()).take(20) {
            let small = build_ground_truth(&g_small, target).unwrap().triple_set();
            let big = build_ground_truth(&g_big, target).unwrap().triple_set();
            assert!(small.is_subset(&big));
        }
    }

    #[test]
    fn members_are_near_the_target() {
        // Sit1/Sit2 members within 2 undirected hops of a target endpoint.
        let g = random_graph(12, 15, 15, 250);
        let target = *g.triples().iter().find(|t| t.rel.is_response()).unwrap();
        let n = crate::graph::extract_neighborhood(&g, &target, 2).unwrap();
        let gt = build_ground_truth(&g, &target).unwrap();
        for m in &gt.members {
            if m.situations.iter().any(|s| *s != Situation::Sit3) {
                assert!(n.nodes.contains(&m.triple.head) && n.nodes.contains(&m.triple.tail));
            }
        }
    }

    #[test]
    fn histogram_single_target_bin() {
        let h = size_histogram(&[15], 1000, 10).unwrap();
        assert_eq!(h.bins.len(), 1);
        assert_eq!((h.bins[0].lo, h.bins[0].hi), (10, 1009));
        assert_eq!(h.bins[0].count, 1);
        assert!((h.bins[0].proportion - 1.0).abs() < 1e-12);
    }

    #[test]
    fn histogram_empty_and_counting_oracle() {
        assert!(size_histogram(&[], 100, 10).unwrap().bins.is_empty());
        let mut rng = ChaCha20Rng::seed_from_u64(13);
        let sizes: Vec<usize> = (0..100).map(|_| rng.gen_range(0..500)).collect();
        let h = size_histogram(&sizes, 50, 10).unwrap();
        let total: usize = h.bins.iter().map(|b| b.count).sum();
        assert_eq!(total, 100);
        let prop: f64 = h.bins.iter().map(|b| b.proportion).sum();
        assert!((prop - 1.0).abs() < 1e-4);
        // One-pass counting oracle per bin.
        for b in &h.bins {
            let want = sizes.iter().filter(|&&s| s >= b.lo && s <= b.hi).count();
            assert_eq!(b.count, want);
        }
    }

    #[test]
    fn res_targets_mirror_sen_construction() {
        let resp = Triple::new(NodeId::cell(0), RelKind::Res, NodeId::drug(1));
        let dsim = Triple::new(NodeId::drug(1), RelKind::Dsim, NodeId::drug(0));
        // A Sen edge on the same chain must NOT count for a Res target.
        let sen = Triple::new(NodeId::cell(0), RelKind::Sen, NodeId::drug(1));
        let (g, _) = assemble_graph(&[resp, sen], &[], &[dsim], feats(1), feats(2)).unwrap();
        let target = Triple::new(NodeId::cell(0), RelKind::Res, NodeId::drug(0));
        let gt = build_ground_truth(&g, &target).unwrap();
        assert!(gt.contains(&resp));
        assert!(!gt.contains(&sen));
    }
}
