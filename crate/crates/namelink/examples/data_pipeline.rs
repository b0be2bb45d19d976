//! Synthetic pair generation, the three-fold split with nested training sets,
//! the JW-adversarial test set, and the metrics report, written to a directory.

use namelink::data::jo::build_jo_testset;
use namelink::data::split::stratified_folds;
use namelink::data::synth::{synth_generate_detailed, SynthConfig};
use namelink::data::{compute_metrics, load_pairs};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::temp_dir().join("namelink-data-example");
    std::fs::create_dir_all(&out)?;
    let synth = synth_generate_detailed(&SynthConfig { seed: 11, ..Default::default() }, 9000)?;
    let ds = &synth.dataset;
    println!("{} pairs, {} positives, corpus of {} names", ds.len(), ds.positives(), synth.corpus.len());
    for r in ds.records().iter().take(6) {
        println!("  {} | {} | {} ({})", r.name_a, r.name_b, r.label, r.source);
    }
    let path = out.join("pairs.csv");
    ds.write_csv(&path)?;
    let reloaded = load_pairs(&path)?;
    assert_eq!(&reloaded, ds);

    let plan = stratified_folds(ds, 3, 11)?;
    for (f, fold) in plan.folds.iter().enumerate() {
        let test = ds.subset(&fold.test);
        let jo = build_jo_testset(&test);
        println!("fold {f}: test {} large {} medium {} small {}  JO {}", fold.test.len(), fold.large.len(), fold.medium.len(), fold.small.len(), jo.indices.len());
    }

    // a predictor that says "match" for everything
    let report = compute_metrics(&vec![1.0; ds.len()], &ds.labels(), 0.5)?;
    println!("always-match: BA {:.3} F1 {:.3} MCC {:.3} flags {:?}", report.ba, report.f1, report.mcc, report.flags);
    println!("files in {}", out.display());
    Ok(())
}
