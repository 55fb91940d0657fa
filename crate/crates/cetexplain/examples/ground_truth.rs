//! Construct rule-based ground-truth explanation sets.
//!
//! For every response triple in a synthetic graph, collects the
//! neighborhood edges justified by one of the three supporting
//! situations (shared drug response by a similar cell, shared cell
//! response to a similar drug, or a response linked through both
//! similarities), then prints the size histogram of the resulting sets.
//!
//! Run with: `cargo run --example ground_truth`

use cetexplain::groundtruth::{build_ground_truth, size_histogram};
use cetexplain::synth::{assemble, generate, SynthSpec};
use cetexplain::Result;

fn main() -> Result<()> {
    let spec = SynthSpec::default();
    let data = generate(&spec, 7)?;
    let (g, _) = assemble(&spec, &data)?;

    let mut sizes = Vec::new();
    for t in g.triples().iter().filter(|t| t.rel.is_response()) {
        sizes.push(build_ground_truth(&g, t)?.len());
    }
    println!("constructed ground truth for {} response triples", sizes.len());

    // One worked example with the situation tags visible.
    let gt = build_ground_truth(&g, &data.targets[0])?;
    println!("\ntarget {:?} has {} ground-truth edges:", gt.target, gt.len());
    for m in gt.members.iter().take(6) {
        println!("  {:?}  via {:?}", m.triple, m.situations);
    }
    if gt.len() > 6 {
        println!("  ... {} more", gt.len() - 6);
    }

    let hist = size_histogram(&sizes, 10, 10)?;
    println!("\nset-size histogram (bin, count, proportion):");
    for b in &hist.bins {
        println!("  {:3}-{:3}  {:4}  {:.3}", b.lo, b.hi, b.count, b.proportion);
    }
    Ok(())
}
