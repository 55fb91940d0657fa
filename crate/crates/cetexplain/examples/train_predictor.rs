//! Train the R-GCN/DistMult link predictor on a synthetic graph.
//!
//! Tracks loss and held-out AUC during training, then scores a few
//! positive triples and corrupted negatives with the final model.
//!
//! Run with: `cargo run --example train_predictor`

use cetexplain::model::{
    link_probability, rgcn_forward, sample_negatives, train_detailed, TrainConfig, TrainOptions,
};
use cetexplain::synth::{assemble, generate, SynthSpec};
use cetexplain::Result;

fn main() -> Result<()> {
    let spec = SynthSpec {
        hubs: 5,
        noise_cells: 4,
        ..SynthSpec::default()
    };
    let data = generate(&spec, 3)?;
    let (g, _) = assemble(&spec, &data)?;

    let cfg = TrainConfig {
        epochs: 400,
        dim: 16,
        eval_interval: 100,
        checkpoint_epochs: vec![],
        seed: 3,
        ..TrainConfig::default()
    };
    // Hold a few triples out so the AUC column means something.
    let held = g.triples()[..8].to_vec();
    let holdout_neg = sample_negatives(&g, &held, 1, 99)?;
    let opts = TrainOptions {
        holdout: Some((held, holdout_neg)),
        ..TrainOptions::default()
    };
    let out = train_detailed(&g, &cfg, &opts)?;
    for stat in &out.log {
        match stat.auc {
            Some(auc) => println!("epoch {:4}  loss {:.4}  auc {auc:.3}", stat.epoch, stat.loss),
            None => println!("epoch {:4}  loss {:.4}", stat.epoch, stat.loss),
        }
    }

    let h = rgcn_forward(&out.model, &g, None)?;
    let negatives = sample_negatives(&g, &g.triples()[..4], 1, 7)?;
    println!("\ntriple scores under the trained model:");
    for t in g.triples().iter().take(4) {
        println!("  pos {t:?} -> {:.3}", link_probability(&out.model, &g, &h, t)?);
    }
    for t in &negatives {
        println!("  neg {t:?} -> {:.3}", link_probability(&out.model, &g, &h, t)?);
    }
    Ok(())
}
