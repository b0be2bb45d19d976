//! Command-line entry points. The binary only forwards `argv` here.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::active::{AlRun, StoredOracle};
use crate::checkpoint::write_atomic;
use crate::data::jo::build_jo_testset;
use crate::data::split::stratified_folds;
use crate::data::synth::{synth_generate, SynthConfig, SynthProfile};
use crate::data::{compute_metrics, load_pairs};
use crate::error::{Error, Result};
use crate::learner::{LearnerKind, Model, PairSet};
use crate::metrics::{feature_vector, MetricKind, FEATURE_NAMES};
use crate::nn::Readout;
use crate::run::RunConfig;
use crate::service::{default_port, ServiceHandle};
use crate::siamese::SiameseConfig;
use crate::trees::ForestParams;

#[derive(Debug, Parser)]
#[command(name = "namelink", version, about = "Decide whether two company names denote the same entity")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LearnerArg {
    Stump,
    Forest,
    Siamese,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ProfileArg {
    Standard,
    Noisy,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ReadoutArg {
    LastToken,
    Padded,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the five similarity scores of one pair.
    Metrics {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Fit a classifier on a labelled pair CSV.
    Train {
        #[arg(long)]
        train: PathBuf,
        #[arg(long, value_enum, default_value = "forest")]
        learner: LearnerArg,
        /// Score used by the stump.
        #[arg(long, default_value = "jaro_winkler")]
        metric: MetricKind,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long, value_enum)]
        readout: Option<ReadoutArg>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write the per-epoch loss of a Siamese model.
        #[arg(long)]
        loss_history: Option<PathBuf>,
    },
    /// Match probabilities for one pair or a CSV of pairs.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, requires = "b", conflicts_with = "pairs")]
        a: Option<String>,
        #[arg(long, requires = "a")]
        b: Option<String>,
        #[arg(long, requires = "out")]
        pairs: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// BA, F1 and MCC of a model on a labelled CSV.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        /// Evaluate on the JW-adversarial subset instead.
        #[arg(long)]
        jo: bool,
    },
    /// Stratified folds with nested large/medium/small training sets and JO test sets.
    Split {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Generate a synthetic labelled pair set.
    Synth {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "standard")]
        profile: ProfileArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Headless active-learning run with stored labels.
    AlRun {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Continue from `--checkpoint` instead of starting over.
        #[arg(long, requires = "checkpoint")]
        resume: bool,
    },
    /// Labeling service for a human annotator.
    Serve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Defaults to $NAMELINK_PORT, then 8080.
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, requires = "checkpoint")]
        resume: bool,
    },
}

/// Parses `args` and runs the command. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
            1
        }
    }
}

fn print_json(v: &serde_json::Value) -> Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", serde_json::to_string_pretty(v)?).map_err(|e| Error::io("<stdout>", e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    write_atomic(path, text.as_bytes())
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Metrics { a, b } => {
            let row = feature_vector(&a, &b).to_array();
            let mut obj = serde_json::Map::new();
            for m in MetricKind::ALL {
                obj.insert(m.name().into(), json!(row[m.feature_index()]));
            }
            for (i, name) in FEATURE_NAMES.iter().enumerate().skip(MetricKind::ALL.len()) {
                obj.insert((*name).into(), json!(row[i]));
            }
            print_json(&serde_json::Value::Object(obj))
        }
        Command::Train { train, learner, metric, epochs, batch_size, readout, seed, out, loss_history } => {
            let ds = load_pairs(&train)?;
            let set = PairSet::from_dataset(&ds);
            let idx: Vec<usize> = (0..set.len()).collect();
            let labels = ds.labels();
            let kind = match learner {
                LearnerArg::Stump => LearnerKind::Stump { metric },
                LearnerArg::Forest => LearnerKind::Forest(ForestParams { seed, ..Default::default() }),
                LearnerArg::Siamese => {
                    let d = SiameseConfig::default();
                    let cfg = SiameseConfig {
                        seed,
                        epochs: epochs.unwrap_or(d.epochs),
                        batch_size: batch_size.unwrap_or(d.batch_size),
                        readout: match readout {
                            Some(ReadoutArg::Padded) => Readout::Padded,
                            Some(ReadoutArg::LastToken) => Readout::LastToken,
                            None => d.readout,
                        },
                        ..d
                    };
                    if let Some(path) = &loss_history {
                        let (m, report) = crate::siamese::SiameseModel::train(&set.a, &set.b, &labels, cfg)?;
                        let mut text = String::from("epoch,loss\n");
                        for (e, l) in report.loss_history.iter().enumerate() {
                            text.push_str(&format!("{e},{l}\n"));
                        }
                        write_text(path, &text)?;
                        let model = Model::Siamese(Box::new(m));
                        model.save(&out)?;
                        return print_json(&json!({ "model": out, "learner": "siamese", "pairs": set.len() }));
                    }
                    LearnerKind::Siamese(cfg)
                }
            };
            let model = kind.fit(&set, &idx, &labels)?;
            model.save(&out)?;
            print_json(&json!({ "model": out, "learner": kind.name(), "pairs": set.len() }))
        }
        Command::Predict { model, a, b, pairs, out } => {
            let m = Model::load(&model)?;
            match (a, b, pairs, out) {
                (Some(a), Some(b), None, _) => print_json(&json!({ "a": a, "b": b, "probability": m.predict_pair(&a, &b) })),
                (None, None, Some(p), Some(out)) => {
                    let ds = load_pairs(&p)?;
                    let set = PairSet::from_dataset(&ds);
                    let probs = m.predict_all(&set);
                    let mut w = csv::Writer::from_writer(Vec::new());
                    w.write_record(["name_a", "name_b", "probability"])?;
                    for ((x, y), p) in set.a.iter().zip(&set.b).zip(&probs) {
                        w.write_record([x.as_str(), y.as_str(), &p.to_string()])?;
                    }
                    let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
                    write_atomic(&out, &bytes)?;
                    print_json(&json!({ "predictions": out, "pairs": probs.len() }))
                }
                _ => Err(Error::InvalidArgument("give either --a and --b, or --pairs with --out".into())),
            }
        }
        Command::Eval { model, test, threshold, jo } => {
            let m = Model::load(&model)?;
            let mut ds = load_pairs(&test)?;
            if jo {
                ds = build_jo_testset(&ds).dataset;
            }
            let probs = m.predict_all(&PairSet::from_dataset(&ds));
            let report = compute_metrics(&probs, &ds.labels(), threshold)?;
            print_json(&serde_json::to_value(report)?)
        }
        Command::Split { data, k, seed, out_dir } => {
            let ds = load_pairs(&data)?;
            let plan = stratified_folds(&ds, k, seed)?;
            std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
            for (f, fold) in plan.folds.iter().enumerate() {
                let test = ds.subset(&fold.test);
                test.write_csv(&out_dir.join(format!("fold{f}_test_ro.csv")))?;
                build_jo_testset(&test).dataset.write_csv(&out_dir.join(format!("fold{f}_test_jo.csv")))?;
                ds.subset(&fold.large).write_csv(&out_dir.join(format!("fold{f}_train_large.csv")))?;
                ds.subset(&fold.medium).write_csv(&out_dir.join(format!("fold{f}_train_medium.csv")))?;
                ds.subset(&fold.small).write_csv(&out_dir.join(format!("fold{f}_train_small.csv")))?;
            }
            write_text(&out_dir.join("plan.json"), &serde_json::to_string_pretty(&plan)?)?;
            print_json(&json!({ "folds": k, "out_dir": out_dir }))
        }
        Command::Synth { n, profile, seed, out } => {
            let profile = match profile {
                ProfileArg::Standard => SynthProfile::Standard,
                ProfileArg::Noisy => SynthProfile::NoisyFreeText,
            };
            let ds = synth_generate(&SynthConfig { seed, profile, ..Default::default() }, n)?;
            ds.write_csv(&out)?;
            print_json(&json!({ "pairs": ds.len(), "positives": ds.positives(), "out": out }))
        }
        Command::AlRun { config, seed, out, checkpoint, resume } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let prepared = match (&checkpoint, resume) {
                (Some(c), true) => cfg.resume(c)?,
                _ => cfg.prepare()?,
            };
            let mut run: AlRun = prepared.run;
            let mut oracle = StoredOracle::new(prepared.truth);
            run.run_to_end(&mut oracle, checkpoint.as_deref())?;
            write_text(&out, &run.history_csv())?;
            let last = run.state.history.last().expect("step 0 is always recorded");
            print_json(&json!({ "history": out, "steps": run.state.history.len(), "n_labelled": last.n_labelled }))
        }
        Command::Serve { config, seed, port, checkpoint, resume } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let prepared = match (&checkpoint, resume) {
                (Some(c), true) => cfg.resume(c)?,
                _ => cfg.prepare()?,
            };
            let port = port.unwrap_or_else(default_port);
            let run_id = format!("{}-seed{}", config.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(), cfg.seed);
            let handle = ServiceHandle::spawn(run_id, prepared.run, checkpoint);
            let rt = tokio::runtime::Runtime::new().map_err(|e| Error::io("<runtime>", e))?;
            eprintln!("listening on http://127.0.0.1:{port}/api/run");
            rt.block_on(crate::service::serve(handle, port)).map_err(|e| Error::io(format!("127.0.0.1:{port}"), e))
        }
    }
}
