//! Quantitative evaluation of explanations against ground-truth sets.
//!
//! All set metrics operate on the ranked triple lists produced by the
//! explainers and the triple sets produced by the ground-truth
//! constructor. Precision@k divides by `min(k, |ranking|)`, Recall@k
//! measures ground-truth edges recovered anywhere in the top-k against
//! those the ranking misses entirely, and Stability counts ranked triples
//! shared by two runs on the same target.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::explainer::Explanation;
use crate::graph::{RelKind, Triple};
use crate::groundtruth::GroundTruthSet;
use crate::{Error, Result};

/// Precision@k: fraction of the top-`min(k, n)` ranked triples that are in
/// the ground truth. `None` when the ranking is empty.
pub fn precision_at_k(ranked: &[Triple], gt: &BTreeSet<Triple>, k: usize) -> Option<f64> {
    if ranked.is_empty() || k == 0 {
        return None;
    }
    let take = k.min(ranked.len());
    let hits = ranked[..take].iter().filter(|t| gt.contains(t)).count();
    Some(hits as f64 / take as f64)
}

/// Recall@k: TP@k / (TP@k + FN), where FN counts ground-truth triples the
/// ranking misses entirely. `None` when the ground truth is empty; the
/// cutoff may not exceed the ranking length (the explanation budget).
pub fn recall_at_k(ranked: &[Triple], gt: &BTreeSet<Triple>, k: usize) -> Result<Option<f64>> {
    if !ranked.is_empty() && k > ranked.len() {
        return Err(Error::Validation(format!(
            "recall cutoff k={k} exceeds the ranking length {}",
            ranked.len()
        )));
    }
    if gt.is_empty() {
        return Ok(None);
    }
    let take = k.min(ranked.len());
    let tp = ranked[..take].iter().filter(|t| gt.contains(t)).count();
    let found_anywhere: BTreeSet<&Triple> = ranked.iter().filter(|t| gt.contains(t)).collect();
    let fn_ = gt.len() - found_anywhere.len();
    let denom = tp + fn_;
    if denom == 0 {
        return Ok(Some(0.0));
    }
    Ok(Some(tp as f64 / denom as f64))
}

/// Harmonic mean of precision and recall; `None` if either is undefined,
/// 0 if both are 0.
pub fn f1_at_k(ranked: &[Triple], gt: &BTreeSet<Triple>, k: usize) -> Result<Option<f64>> {
    let p = precision_at_k(ranked, gt, k);
    let r = recall_at_k(ranked, gt, k.min(ranked.len().max(1)))?;
    Ok(match (p, r) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        (Some(_), Some(_)) => Some(0.0),
        _ => None,
    })
}

/// Stability: number of triples shared between the top-k of two runs on
/// the same target. Errors if the targets differ.
pub fn stability(a: &Explanation, b: &Explanation, k: usize) -> Result<usize> {
    if a.target != b.target {
        return Err(Error::Validation(format!(
            "stability compares runs on the same target; got {} vs {}",
            a.target, b.target
        )));
    }
    let set_a: BTreeSet<Triple> = a.ranked.iter().take(k).map(|r| r.triple).collect();
    let set_b: BTreeSet<Triple> = b.ranked.iter().take(k).map(|r| r.triple).collect();
    Ok(set_a.intersection(&set_b).count())
}

/// Pooled edge-type proportions over the top-k of many explanations.
pub fn edge_type_distribution(explanations: &[Explanation], k: usize) -> [f64; 4] {
    let mut counts = [0usize; 4];
    for e in explanations {
        for r in e.ranked.iter().take(k) {
            counts[r.triple.rel.code()] += 1;
        }
    }
    let total: usize = counts.iter().sum();
    if total == 0 {
        return [0.0; 4];
    }
    let mut out = [0.0; 4];
    for (o, c) in out.iter_mut().zip(counts) {
        *o = c as f64 / total as f64;
    }
    out
}

/// Aggregated metrics for one method at one k.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MethodMetrics {
    pub method: String,
    pub k: usize,
    /// Mean over targets where the metric is defined.
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Mean top-k overlap with the paired runs, when pairs are given.
    pub stability: Option<f64>,
    /// Pooled edge-type proportions of top-k triples: [Res, Sen, Dsim, Csim].
    pub edge_type_proportions: [f64; 4],
    /// Number of targets that contributed to precision/recall/f1.
    pub evaluated_targets: usize,
}

/// Full evaluation report across methods and cutoffs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetricsReport {
    pub per_method: Vec<MethodMetrics>,
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Evaluate one method's explanations against per-target ground truth.
///
/// `paired` optionally supplies a second run per target for stability.
pub fn evaluate_method(
    method: &str,
    explanations: &[Explanation],
    ground_truth: &BTreeMap<Triple, GroundTruthSet>,
    paired: Option<&[Explanation]>,
    k: usize,
) -> Result<MethodMetrics> {
    let mut precisions = Vec::new();
    let mut recalls = Vec::new();
    let mut f1s = Vec::new();
    let mut used = 0usize;
    for e in explanations {
        let Some(gt) = ground_truth.get(&e.target) else {
            continue;
        };
        let gt_set = gt.triple_set();
        let ranked: Vec<Triple> = e.ranked.iter().map(|r| r.triple).collect();
        let p = precision_at_k(&ranked, &gt_set, k);
        let r = recall_at_k(&ranked, &gt_set, k.min(ranked.len()))?;
        if let (Some(p), Some(r)) = (p, r) {
            precisions.push(p);
            recalls.push(r);
            f1s.push(if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 });
            used += 1;
        }
    }
    let stability_mean = match paired {
        Some(other) => {
            let by_target: BTreeMap<Triple, &Explanation> =
                other.iter().map(|e| (e.target, e)).collect();
            let mut overlaps = Vec::new();
            for e in explanations {
                if let Some(o) = by_target.get(&e.target) {
                    overlaps.push(stability(e, o, k)? as f64);
                }
            }
            if overlaps.is_empty() {
                None
            } else {
                Some(mean(&overlaps))
            }
        }
        None => None,
    };
    Ok(MethodMetrics {
        method: method.to_string(),
        k,
        precision: mean(&precisions),
        recall: mean(&recalls),
        f1: mean(&f1s),
        stability: stability_mean,
        edge_type_proportions: edge_type_distribution(explanations, k),
        evaluated_targets: used,
    })
}

/// Edge-type proportion label order used in reports.
pub const REL_LABELS: [&str; 4] = ["prop_res", "prop_sen", "prop_dsim", "prop_csim"];

/// Lookup a relation's position in [`REL_LABELS`].
pub fn rel_slot(rel: RelKind) -> usize {
    rel.code()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explainer::{Method, RankedTriple};
    use crate::graph::NodeId;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn t(h: usize, rel: RelKind, tl: usize) -> Triple {
        let head = match rel {
            RelKind::Dsim => NodeId::drug(h),
            _ => NodeId::cell(h),
        };
        let tail = match rel {
            RelKind::Csim => NodeId::cell(tl),
            _ => NodeId::drug(tl),
        };
        Triple::new(head, rel, tail)
    }

    fn expl(target: Triple, ranked: &[Triple]) -> Explanation {
        Explanation {
            target,
            method: Method::Cete,
            predictor_epoch: 0,
            seed: 0,
            ranked: ranked
                .iter()
                .enumerate()
                .map(|(i, &triple)| RankedTriple {
                    triple,
                    importance: 1.0 - i as f64 * 0.01,
                })
                .collect(),
        }
    }

    #[test]
    fn hand_worked_precision_recall() {
        // GT = {a, b, c}; ranking = [a, x, b, y] (n = 4).
        let a = t(0, RelKind::Sen, 0);
        let b = t(0, RelKind::Sen, 1);
        let c = t(0, RelKind::Sen, 2);
        let x = t(1, RelKind::Sen, 0);
        let y = t(1, RelKind::Sen, 1);
        let gt: BTreeSet<Triple> = [a, b, c].into_iter().collect();
        let ranked = vec![a, x, b, y];
        // k=2: top-2 = [a, x], 1 hit -> P = 0.5.
        assert_eq!(precision_at_k(&ranked, &gt, 2), Some(0.5));
        // Recall@2: TP=1; ranking contains {a,b}, so FN = |{c}| = 1 -> 1/2.
        assert_eq!(recall_at_k(&ranked, &gt, 2).unwrap(), Some(0.5));
        // Full ranking (k = n = 4): 2 hits -> P = 2/4; recall = 2/(2+1).
        assert_eq!(precision_at_k(&ranked, &gt, 10), Some(0.5));
        assert_eq!(recall_at_k(&ranked, &gt, 4).unwrap(), Some(2.0 / 3.0));
        // A cutoff beyond the explanation budget is an argument error.
        assert!(recall_at_k(&ranked, &gt, 5).is_err());
        // F1 clamps the recall cutoff to the budget.
        let f = f1_at_k(&ranked, &gt, 10).unwrap().unwrap();
        let want = 2.0 * 0.5 * (2.0 / 3.0) / (0.5 + 2.0 / 3.0);
        assert!((f - want).abs() < 1e-12);
    }

    #[test]
    fn empty_cases_are_undefined() {
        let gt: BTreeSet<Triple> = [t(0, RelKind::Sen, 0)].into_iter().collect();
        assert_eq!(precision_at_k(&[], &gt, 5), None);
        assert_eq!(recall_at_k(&[t(0, RelKind::Sen, 0)], &BTreeSet::new(), 1).unwrap(), None);
        assert_eq!(f1_at_k(&[], &gt, 5).unwrap(), None);
    }

    #[test]
    fn perfect_and_disjoint_rankings() {
        let gt_vec: Vec<Triple> = (0..5).map(|i| t(0, RelKind::Sen, i)).collect();
        let gt: BTreeSet<Triple> = gt_vec.iter().copied().collect();
        assert_eq!(precision_at_k(&gt_vec, &gt, 5), Some(1.0));
        assert_eq!(recall_at_k(&gt_vec, &gt, 5).unwrap(), Some(1.0));
        let miss: Vec<Triple> = (0..5).map(|i| t(9, RelKind::Res, i)).collect();
        assert_eq!(precision_at_k(&miss, &gt, 5), Some(0.0));
        assert_eq!(recall_at_k(&miss, &gt, 5).unwrap(), Some(0.0));
        assert_eq!(f1_at_k(&miss, &gt, 5).unwrap(), Some(0.0));
    }

    /// Independent oracle built purely on set operations.
    fn set_oracle(ranked: &[Triple], gt: &BTreeSet<Triple>, k: usize) -> (f64, f64) {
        let take = k.min(ranked.len());
        let top: BTreeSet<Triple> = ranked[..take].iter().copied().collect();
        let all: BTreeSet<Triple> = ranked.iter().copied().collect();
        let tp = top.intersection(gt).count() as f64;
        let fn_ = gt.difference(&all).count() as f64;
        (tp / take as f64, tp / (tp + fn_))
    }

    #[test]
    fn random_rankings_match_set_oracle() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        for _ in 0..50 {
            let pool: Vec<Triple> = (0..30)
                .map(|i| t(i % 6, RelKind::ALL[i % 4], (i * 7) % 6))
                .collect();
            let mut ranked: Vec<Triple> = Vec::new();
            for &p in &pool {
                if rng.gen_bool(0.5) && !ranked.contains(&p) {
                    ranked.push(p);
                }
            }
            if ranked.is_empty() {
                continue;
            }
            let gt: BTreeSet<Triple> = pool
                .iter()
                .filter(|_| rng.gen_bool(0.4))
                .copied()
                .collect();
            if gt.is_empty() {
                continue;
            }
            let k = rng.gen_range(1..=ranked.len());
            let (po, ro) = set_oracle(&ranked, &gt, k);
            let p = precision_at_k(&ranked, &gt, k).unwrap();
            let r = recall_at_k(&ranked, &gt, k).unwrap().unwrap();
            if (po + ro).is_finite() {
                assert!((p - po).abs() < 1e-12);
                assert!((r - ro).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn recall_is_monotone_in_k() {
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        for _ in 0..20 {
            let ranked: Vec<Triple> = (0..20)
                .map(|i| t(i, RelKind::ALL[rng.gen_range(0..4) as usize], i + 1))
                .collect();
            let gt: BTreeSet<Triple> = ranked
                .iter()
                .filter(|_| rng.gen_bool(0.3))
                .copied()
                .collect();
            if gt.is_empty() {
                continue;
            }
            let mut prev = 0.0;
            for k in 1..=ranked.len() {
                let r = recall_at_k(&ranked, &gt, k).unwrap().unwrap();
                assert!(r >= prev - 1e-15, "recall dipped at k={k}");
                prev = r;
            }
        }
    }

    #[test]
    fn stability_identity_and_disjoint() {
        let target = t(0, RelKind::Sen, 0);
        let ranked: Vec<Triple> = (1..8).map(|i| t(i, RelKind::Res, i)).collect();
        let e = expl(target, &ranked);
        assert_eq!(stability(&e, &e, 5).unwrap(), 5);
        assert_eq!(stability(&e, &e, 100).unwrap(), ranked.len());
        let other: Vec<Triple> = (10..17).map(|i| t(i, RelKind::Res, i)).collect();
        let e2 = expl(target, &other);
        assert_eq!(stability(&e, &e2, 5).unwrap(), 0);
        // Order within top-k must not matter.
        let mut shuffled = ranked.clone();
        shuffled[..5].reverse();
        let e3 = expl(target, &shuffled);
        assert_eq!(stability(&e, &e3, 5).unwrap(), 5);
    }

    #[test]
    fn stability_rejects_mismatched_targets() {
        let e1 = expl(t(0, RelKind::Sen, 0), &[t(1, RelKind::Res, 1)]);
        let e2 = expl(t(0, RelKind::Sen, 1), &[t(1, RelKind::Res, 1)]);
        assert!(stability(&e1, &e2, 5).is_err());
    }

    #[test]
    fn edge_type_distribution_counts() {
        let e1 = expl(
            t(0, RelKind::Sen, 0),
            &[t(1, RelKind::Sen, 1), t(2, RelKind::Res, 2), t(0, RelKind::Csim, 1)],
        );
        let e2 = expl(t(0, RelKind::Sen, 1), &[t(3, RelKind::Sen, 3)]);
        let props = edge_type_distribution(&[e1, e2], 10);
        // Pool: 2 Sen, 1 Res, 1 Csim out of 4.
        assert_eq!(props[RelKind::Res.code()], 0.25);
        assert_eq!(props[RelKind::Sen.code()], 0.5);
        assert_eq!(props[RelKind::Dsim.code()], 0.0);
        assert_eq!(props[RelKind::Csim.code()], 0.25);
        assert_eq!(edge_type_distribution(&[], 10), [0.0; 4]);
    }

    #[test]
    fn evaluate_method_aggregates_means() {
        let target1 = t(0, RelKind::Sen, 0);
        let target2 = t(1, RelKind::Sen, 1);
        let gt1: Vec<Triple> = vec![t(2, RelKind::Res, 2)];
        let gt2: Vec<Triple> = vec![t(3, RelKind::Res, 3)];
        let mut gts = BTreeMap::new();
        for (tg, v) in [(target1, &gt1), (target2, &gt2)] {
            gts.insert(
                tg,
                GroundTruthSet {
                    target: tg,
                    members: v
                        .iter()
                        .map(|&triple| crate::groundtruth::GtMember {
                            triple,
                            situations: vec![],
                        })
                        .collect(),
                },
            );
        }
        // e1 finds its GT at rank 1 (P=1, R=1); e2 misses (P=0, R=0).
        let e1 = expl(target1, &gt1);
        let e2 = expl(target2, &[t(9, RelKind::Csim, 9)]);
        let m = evaluate_method("CETE", &[e1.clone(), e2.clone()], &gts, Some(&[e1, e2]), 1)
            .unwrap();
        assert_eq!(m.evaluated_targets, 2);
        assert!((m.precision - 0.5).abs() < 1e-12);
        assert!((m.recall - 0.5).abs() < 1e-12);
        assert!((m.f1 - 0.5).abs() < 1e-12);
        assert_eq!(m.stability, Some(1.0));
    }
}
