//! Least-confident vs random querying with a Random Forest and stored labels,
//! printing the history CSV of each run.

use namelink::active::{AlConfig, AlRun, BatchSchedule, EvalSet, QueryStrategy, StoredOracle};
use namelink::data::split::stratified_sample;
use namelink::data::synth::{synth_generate, SynthConfig, SynthProfile};
use namelink::learner::{LearnerKind, PairSet};
use namelink::trees::ForestParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> namelink::Result<()> {
    let ds = synth_generate(&SynthConfig { seed: 100, profile: SynthProfile::NoisyFreeText, ..Default::default() }, 7500)?;
    let labels = ds.labels();
    let all: Vec<usize> = (0..ds.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let uni = stratified_sample(&all, &labels, 0.8, &mut rng);
    let test: Vec<usize> = all.iter().copied().filter(|i| uni.binary_search(i).is_err()).collect();
    let (uset, tset) = (ds.subset(&uni), ds.subset(&test));
    let truth = uset.labels();
    let positions: Vec<usize> = (0..uset.len()).collect();
    let seed_idx = stratified_sample(&positions, &truth, 100.0 / uset.len() as f64, &mut rng);
    let seed: Vec<(usize, u8)> = seed_idx.iter().map(|&i| (i, truth[i])).collect();
    let universe = PairSet::from_dataset(&uset);
    let tests = vec![EvalSet { name: "test".into(), pairs: PairSet::from_dataset(&tset), labels: tset.labels() }];

    for strategy in [QueryStrategy::default(), QueryStrategy::Random] {
        let config = AlConfig {
            schedule: BatchSchedule::standard(),
            strategy: strategy.clone(),
            learner: LearnerKind::Forest(ForestParams::default()),
            seed: 0,
            early_stop: None,
            threshold: 0.5,
        };
        let mut run = AlRun::start(config, universe.clone(), &seed, tests.clone())?.with_pool_truth(truth.clone());
        run.run_to_end(&mut StoredOracle::new(truth.clone()), None)?;
        println!("# strategy {}\n{}", strategy.name(), run.history_csv());
    }
    Ok(())
}
