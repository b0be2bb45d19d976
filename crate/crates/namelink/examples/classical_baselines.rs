//! Single-metric stumps and the Random Forest on synthetic data, scored on a
//! random-order test set (RO) and a JW-adversarial one (JO).

use namelink::data::jo::build_jo_testset;
use namelink::data::split::stratified_folds;
use namelink::data::synth::{synth_generate, SynthConfig};
use namelink::data::compute_metrics;
use namelink::learner::{LearnerKind, Model, PairSet};
use namelink::metrics::{MetricKind, FEATURE_NAMES};
use namelink::trees::ForestParams;

fn main() -> namelink::Result<()> {
    let ds = synth_generate(&SynthConfig { seed: 7, ..Default::default() }, 4500)?;
    let plan = stratified_folds(&ds, 3, 7)?;
    let fold = &plan.folds[0];
    let labels = ds.labels();
    let set = PairSet::from_dataset(&ds);
    let jo = build_jo_testset(&ds.subset(&fold.test));
    let jo_idx: Vec<usize> = jo.indices.iter().map(|&k| fold.test[k]).collect();
    let y = |idx: &[usize]| idx.iter().map(|&i| labels[i]).collect::<Vec<u8>>();

    println!("train L {} / M {} / S {}, test {} (JO {})", fold.large.len(), fold.medium.len(), fold.small.len(), fold.test.len(), jo_idx.len());
    println!("{:26} {:>6} {:>6} {:>6} {:>6}", "learner", "S-RO", "L-RO", "S-JO", "L-JO");
    let mut learners: Vec<LearnerKind> = MetricKind::ALL.iter().map(|&m| LearnerKind::Stump { metric: m }).collect();
    learners.push(LearnerKind::Forest(ForestParams::default()));
    for l in &learners {
        let mut cells = Vec::new();
        let mut last = None;
        for train in [&fold.small, &fold.large] {
            let m = l.fit(&set, train, &y(train))?;
            let ro = compute_metrics(&m.predict(&set, &fold.test), &y(&fold.test), 0.5)?.ba;
            let jb = compute_metrics(&m.predict(&set, &jo_idx), &y(&jo_idx), 0.5)?.ba;
            cells.push((ro, jb));
            last = Some(m);
        }
        println!("{:26} {:6.3} {:6.3} {:6.3} {:6.3}", l.name(), cells[0].0, cells[1].0, cells[0].1, cells[1].1);
        if let Some(Model::Forest(f)) = last {
            let imp = f.mdi_importance().importance;
            for (name, v) in FEATURE_NAMES.iter().zip(imp) {
                println!("  importance {name:16} {v:.3}");
            }
        }
    }
    Ok(())
}
