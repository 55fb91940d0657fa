//! On-disk artifact formats: TSV/CSV tables and JSON-lines records.
//!
//! Every reader reports failures with the offending path and line number;
//! every writer emits rows in a deterministic order so identical inputs
//! produce byte-identical files. Floating-point values are written with
//! Rust's shortest round-trip formatting.

use std::fs;
use std::path::Path;

use crate::evalmetrics::MetricsReport;
use crate::explainer::Explanation;
use crate::graph::{NodeId, RelKind, ResponseRecord, Triple};
use crate::groundtruth::{GroundTruthSet, Histogram};
use crate::model::EpochStat;
use crate::numerics::Matrix;
use crate::{Error, Result};

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

fn read_to_lines(path: &Path) -> Result<Vec<String>> {
    Ok(fs::read_to_string(path)?
        .lines()
        .map(str::to_string)
        .collect())
}

/// Read a triple TSV: `head_id<TAB>relation_code<TAB>tail_id` per line.
pub fn read_triples(path: &Path) -> Result<Vec<Triple>> {
    let mut out = Vec::new();
    for (i, line) in read_to_lines(path)?.iter().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(parse_err(
                path,
                lineno,
                format!("expected 3 tab-separated fields, got {}", fields.len()),
            ));
        }
        let head: NodeId = fields[0]
            .parse()
            .map_err(|e: Error| parse_err(path, lineno, e.to_string()))?;
        let code: usize = fields[1]
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad relation code '{}'", fields[1])))?;
        let rel =
            RelKind::from_code(code).map_err(|e| parse_err(path, lineno, e.to_string()))?;
        let tail: NodeId = fields[2]
            .parse()
            .map_err(|e: Error| parse_err(path, lineno, e.to_string()))?;
        let triple = Triple::new(head, rel, tail);
        triple
            .validate_kinds()
            .map_err(|e| parse_err(path, lineno, e.to_string()))?;
        out.push(triple);
    }
    Ok(out)
}

/// Write a triple TSV in the given order.
pub fn write_triples(path: &Path, triples: &[Triple]) -> Result<()> {
    let mut buf = String::new();
    for t in triples {
        buf.push_str(&format!("{}\t{}\t{}\n", t.head, t.rel.code(), t.tail));
    }
    fs::write(path, buf)?;
    Ok(())
}

/// Read a feature CSV: first column node id, remaining columns features.
/// All ids must share `prefix` ('c' or 'd') and be densely numbered from
/// zero; rows are returned in index order.
pub fn read_features(path: &Path, prefix: char) -> Result<Matrix> {
    let lines = read_to_lines(path)?;
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut width = None;
    for (i, line) in lines.iter().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let id = fields.next().unwrap().trim();
        let node: NodeId = id
            .parse()
            .map_err(|e: Error| parse_err(path, lineno, e.to_string()))?;
        let expect_prefix = if node.kind == crate::graph::NodeKind::CellLine { 'c' } else { 'd' };
        if expect_prefix != prefix {
            return Err(parse_err(
                path,
                lineno,
                format!("expected '{prefix}' ids in this file, got '{id}'"),
            ));
        }
        let mut values = Vec::new();
        for f in fields {
            let v: f64 = f
                .trim()
                .parse()
                .map_err(|_| parse_err(path, lineno, format!("bad feature value '{f}'")))?;
            if !v.is_finite() {
                return Err(parse_err(path, lineno, format!("non-finite feature value '{f}'")));
            }
            values.push(v);
        }
        if values.is_empty() {
            return Err(parse_err(path, lineno, "feature row has no values"));
        }
        match width {
            None => width = Some(values.len()),
            Some(w) if w != values.len() => {
                return Err(parse_err(
                    path,
                    lineno,
                    format!("feature width {} differs from first row's {w}", values.len()),
                ))
            }
            _ => {}
        }
        rows.push((node.index, values));
    }
    if rows.is_empty() {
        return Err(parse_err(path, 0, "feature file is empty"));
    }
    rows.sort_by_key(|(idx, _)| *idx);
    let n = rows.len();
    for (want, (got, _)) in rows.iter().enumerate() {
        if *got != want {
            return Err(parse_err(
                path,
                0,
                format!("node indices must be dense starting at 0; missing {prefix}{want}"),
            ));
        }
    }
    let w = width.unwrap();
    let mut data = Vec::with_capacity(n * w);
    for (_, values) in rows {
        data.extend(values);
    }
    Matrix::from_vec(n, w, data)
}

/// Write a feature CSV, one row per node in index order.
pub fn write_features(path: &Path, features: &Matrix, prefix: char) -> Result<()> {
    let mut buf = String::new();
    for i in 0..features.rows() {
        buf.push_str(&format!("{prefix}{i}"));
        for v in features.row(i) {
            buf.push_str(&format!(",{v}"));
        }
        buf.push('\n');
    }
    fs::write(path, buf)?;
    Ok(())
}

/// Read a response TSV: `cell_id<TAB>drug_id<TAB>ic50<TAB>threshold`.
pub fn read_responses(path: &Path) -> Result<Vec<ResponseRecord>> {
    let mut out = Vec::new();
    for (i, line) in read_to_lines(path)?.iter().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(parse_err(
                path,
                lineno,
                format!("expected 4 tab-separated fields, got {}", fields.len()),
            ));
        }
        let cell: NodeId = fields[0]
            .parse()
            .map_err(|e: Error| parse_err(path, lineno, e.to_string()))?;
        let drug: NodeId = fields[1]
            .parse()
            .map_err(|e: Error| parse_err(path, lineno, e.to_string()))?;
        let ic50: f64 = fields[2]
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad IC50 '{}'", fields[2])))?;
        let threshold: f64 = fields[3]
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad threshold '{}'", fields[3])))?;
        out.push(ResponseRecord { cell, drug, ic50, threshold });
    }
    if out.is_empty() {
        return Err(parse_err(path, 0, "response file is empty"));
    }
    Ok(out)
}

/// Write a response TSV.
pub fn write_responses(path: &Path, records: &[ResponseRecord]) -> Result<()> {
    let mut buf = String::new();
    for r in records {
        buf.push_str(&format!("{}\t{}\t{}\t{}\n", r.cell, r.drug, r.ic50, r.threshold));
    }
    fs::write(path, buf)?;
    Ok(())
}

/// Read explanations from JSON lines, one record per target.
pub fn read_explanations(path: &Path) -> Result<Vec<Explanation>> {
    let mut out = Vec::new();
    for (i, line) in read_to_lines(path)?.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let e: Explanation = serde_json::from_str(line)
            .map_err(|e| parse_err(path, i + 1, e.to_string()))?;
        out.push(e);
    }
    Ok(out)
}

/// Write explanations as JSON lines.
pub fn write_explanations(path: &Path, explanations: &[Explanation]) -> Result<()> {
    let mut buf = String::new();
    for e in explanations {
        buf.push_str(&serde_json::to_string(e)?);
        buf.push('\n');
    }
    fs::write(path, buf)?;
    Ok(())
}

/// Read ground-truth sets from JSON lines.
pub fn read_ground_truth(path: &Path) -> Result<Vec<GroundTruthSet>> {
    let mut out = Vec::new();
    for (i, line) in read_to_lines(path)?.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let g: GroundTruthSet = serde_json::from_str(line)
            .map_err(|e| parse_err(path, i + 1, e.to_string()))?;
        out.push(g);
    }
    Ok(out)
}

/// Write ground-truth sets as JSON lines.
pub fn write_ground_truth(path: &Path, sets: &[GroundTruthSet]) -> Result<()> {
    let mut buf = String::new();
    for g in sets {
        buf.push_str(&serde_json::to_string(g)?);
        buf.push('\n');
    }
    fs::write(path, buf)?;
    Ok(())
}

/// Write a GT-size histogram CSV: `bin_lo,bin_hi,count,proportion`.
pub fn write_histogram(path: &Path, histogram: &Histogram) -> Result<()> {
    let mut buf = String::from("bin_lo,bin_hi,count,proportion\n");
    for b in &histogram.bins {
        buf.push_str(&format!("{},{},{},{}\n", b.lo, b.hi, b.count, b.proportion));
    }
    fs::write(path, buf)?;
    Ok(())
}

/// Write a metrics report as pretty JSON plus the flat CSV summary
/// `method,k,precision,recall,f1,stability,prop_res,prop_sen,prop_dsim,prop_csim`.
pub fn write_metrics(json_path: &Path, csv_path: &Path, report: &MetricsReport) -> Result<()> {
    fs::write(json_path, serde_json::to_string_pretty(report)?)?;
    let mut buf =
        String::from("method,k,precision,recall,f1,stability,prop_res,prop_sen,prop_dsim,prop_csim\n");
    for m in &report.per_method {
        let stability = m
            .stability
            .map(|s| s.to_string())
            .unwrap_or_default();
        buf.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            m.method,
            m.k,
            m.precision,
            m.recall,
            m.f1,
            stability,
            m.edge_type_proportions[0],
            m.edge_type_proportions[1],
            m.edge_type_proportions[2],
            m.edge_type_proportions[3],
        ));
    }
    fs::write(csv_path, buf)?;
    Ok(())
}

/// Write a training log CSV: `epoch,loss,auc` (AUC blank when no holdout
/// evaluation ran at that epoch).
pub fn write_training_log(path: &Path, log: &[EpochStat]) -> Result<()> {
    let mut buf = String::from("epoch,loss,auc\n");
    for s in log {
        let auc = s.auc.map(|a| a.to_string()).unwrap_or_default();
        buf.push_str(&format!("{},{},{}\n", s.epoch, s.loss, auc));
    }
    fs::write(path, buf)?;
    Ok(())
}

/// Per-triple fold assignment for cross-validation.
pub fn write_folds(path: &Path, assignment: &[usize]) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(assignment)?)?;
    Ok(())
}

pub fn read_folds(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
