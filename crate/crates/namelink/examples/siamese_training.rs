//! Trains the Siamese LSTM on a small synthetic set and shows that the
//! saved model reloads bit-exactly.
//!
//! cargo run --release --example siamese_training -- [epochs]

use namelink::data::compute_metrics;
use namelink::data::split::stratified_sample;
use namelink::data::synth::{synth_generate, SynthConfig};
use namelink::siamese::{SiameseConfig, SiameseModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> namelink::Result<()> {
    let epochs = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let ds = synth_generate(&SynthConfig { seed: 3, ..Default::default() }, 1500)?;
    let labels = ds.labels();
    let all: Vec<usize> = (0..ds.len()).collect();
    let train = stratified_sample(&all, &labels, 0.8, &mut ChaCha8Rng::seed_from_u64(3));
    let test: Vec<usize> = all.iter().copied().filter(|i| train.binary_search(i).is_err()).collect();
    let (tr, te) = (ds.subset(&train), ds.subset(&test));

    let config = SiameseConfig { epochs, batch_size: 16, ..Default::default() };
    let (model, report) = SiameseModel::train(&tr.names_a(), &tr.names_b(), &tr.labels(), config)?;
    for (e, l) in report.loss_history.iter().enumerate().step_by((epochs / 10).max(1)) {
        println!("epoch {e:3}  loss {l:.4}");
    }
    let probs = model.predict_many(&te.names_a(), &te.names_b());
    let r = compute_metrics(&probs, &te.labels(), 0.5)?;
    println!("test BA {:.3}  F1 {:.3}  MCC {:.3}", r.ba, r.f1, r.mcc);

    let d = model.distance_features("ACME SPA", "ACME S.P.A.");
    println!("distances ACME SPA / ACME S.P.A.: L1 {:.3} L2 {:.3} Linf {:.3} cos {:.3}", d.l1, d.l2, d.linf, d.cosine_distance);
    println!("p(match) = {:.3}, swapped = {:.3}", model.predict("ACME SPA", "ACME S.P.A."), model.predict("ACME S.P.A.", "ACME SPA"));

    let path = std::env::temp_dir().join("namelink-siamese-example.json");
    model.save(&path)?;
    let back = SiameseModel::load(&path)?;
    println!("reloaded model identical: {}", back == model);
    Ok(())
}
