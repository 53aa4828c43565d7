//! Repeated training runs, run summaries and reader comparison tables.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use mqnlp_core::circuit::AnsatzConfig;
use mqnlp_core::data::{synth_structured, synth_unstructured, DataError, Dataset, FeatureScaler, VocabSpec};
use mqnlp_core::multimodal::TaskLayout;
use mqnlp_core::readers::{Lexicon, ReaderKind, ReaderOptions};
use mqnlp_core::training::{train, ModelConfig, SpsaConfig, TrainConfig, TrainError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::io::{self, IoError};
use crate::parallel::Parallel;

/// Synthetic data in place of a samples file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub layout: TaskLayout,
    /// Number of samples; structured data comes in pairs, so it must be even.
    pub n: usize,
    pub seed: u64,
    /// Defaults to the preset for `layout`.
    #[serde(default)]
    pub vocab: Option<VocabSpec>,
}

impl SynthSpec {
    pub fn generate(&self) -> Result<Dataset, ExperimentError> {
        let vocab = self
            .vocab
            .clone()
            .unwrap_or_else(|| VocabSpec::for_layout(self.layout));
        match self.layout {
            TaskLayout::Structured if self.n % 2 == 1 => Err(ExperimentError::Config(format!(
                "structured data comes in pairs, {} samples requested",
                self.n
            ))),
            TaskLayout::Structured => Ok(synth_structured(self.n / 2, &vocab, self.seed)?),
            TaskLayout::Unstructured => Ok(synth_unstructured(self.n, &vocab, self.seed)?),
        }
    }
}

/// SPSA gains; the per-run seed comes from the experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpsaGains {
    pub a: f64,
    pub c: f64,
    #[serde(rename = "A")]
    pub big_a: f64,
    pub alpha: f64,
    pub gamma: f64,
}

impl SpsaGains {
    /// The standard gains for a run of `epochs` epochs.
    pub fn for_epochs(epochs: usize) -> Self {
        let c = SpsaConfig::for_epochs(epochs, 0);
        SpsaGains {
            a: c.a,
            c: c.c,
            big_a: c.big_a,
            alpha: c.alpha,
            gamma: c.gamma,
        }
    }

    pub fn with_seed(&self, seed: u64) -> SpsaConfig {
        SpsaConfig {
            a: self.a,
            c: self.c,
            big_a: self.big_a,
            alpha: self.alpha,
            gamma: self.gamma,
            seed,
        }
    }
}

/// A JSON experiment description. Exactly one of `dataset_path` and `synth`
/// must be given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub reader: ReaderKind,
    #[serde(default)]
    pub reader_options: ReaderOptions,
    #[serde(default = "yes")]
    pub mirrored: bool,
    #[serde(default)]
    pub dataset_path: Option<PathBuf>,
    #[serde(default)]
    pub synth: Option<SynthSpec>,
    /// Word-role file; the built-in lexicon when absent.
    #[serde(default)]
    pub lexicon_path: Option<PathBuf>,
    #[serde(default)]
    pub ansatz: AnsatzConfig,
    /// Defaults to the standard gains for `train.epochs`.
    #[serde(default)]
    pub spsa: Option<SpsaGains>,
    pub train: TrainConfig,
    /// Run `i` trains with seed `seed + i`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "five")]
    pub repetitions: usize,
    pub out_dir: PathBuf,
}

fn yes() -> bool {
    true
}

fn five() -> usize {
    5
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = fs::read_to_string(path).map_err(|source| IoError::File {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))
    }

    /// Fills in every defaulted setting so that the config fully describes
    /// the experiment.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        c.spsa.get_or_insert_with(|| SpsaGains::for_epochs(c.train.epochs));
        if let Some(s) = &mut c.synth {
            s.vocab.get_or_insert_with(|| VocabSpec::for_layout(s.layout));
        }
        c
    }

    pub fn check(&self) -> Result<(), ExperimentError> {
        if self.repetitions == 0 {
            return Err(ExperimentError::Config("repetitions must be at least 1".into()));
        }
        if self.dataset_path.is_some() == self.synth.is_some() {
            return Err(ExperimentError::Config(
                "give exactly one of `dataset_path` and `synth`".into(),
            ));
        }
        Ok(())
    }

    fn model(&self) -> ModelConfig {
        ModelConfig {
            reader: self.reader,
            reader_options: self.reader_options,
            ansatz: self.ansatz,
            mirrored: self.mirrored,
        }
    }

    fn dataset(&self) -> Result<Dataset, ExperimentError> {
        match (&self.dataset_path, &self.synth) {
            (Some(path), _) => Ok(io::load_dataset(path)?),
            (None, Some(spec)) => spec.generate(),
            (None, None) => Err(ExperimentError::Config("no data source".into())),
        }
    }

    fn lexicon(&self) -> Result<Lexicon, ExperimentError> {
        match &self.lexicon_path {
            None => Ok(Lexicon::builtin()),
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|source| IoError::File {
                    path: path.clone(),
                    source,
                })?;
                Lexicon::parse(&text)
                    .map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))
            }
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("run {run}: {message}")]
    Run { run: usize, message: String },
    #[error("{0}")]
    Inconsistent(String),
}

impl From<std::io::Error> for ExperimentError {
    fn from(e: std::io::Error) -> Self {
        ExperimentError::Io(IoError::Io(e))
    }
}

/// Result of one repetition; `error` is set when it did not complete.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run: usize,
    pub seed: u64,
    pub test_acc: Option<f64>,
    pub final_train_acc: Option<f64>,
    pub final_val_acc: Option<f64>,
    /// Train, validation and test sizes.
    pub split_sizes: Option<[usize; 3]>,
    pub n_trainable: Option<usize>,
    /// Min–max statistics fitted on this run's training split.
    pub scaler: Option<FeatureScaler>,
    pub error: Option<String>,
}

/// Everything `summary.json` records. Timings live in `timing.json` so that
/// the summary of a given config is reproducible byte for byte.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config: ExperimentConfig,
    pub provenance: String,
    pub n_samples: usize,
    pub class_balance: [usize; 2],
    /// Wire order fed to the comparison box.
    pub tensor_order: String,
    pub runs: Vec<RunSummary>,
    /// Mean and maximum test accuracy over completed runs.
    pub average: Option<f64>,
    pub best: Option<f64>,
}

impl Summary {
    pub fn failures(&self) -> impl Iterator<Item = &RunSummary> {
        self.runs.iter().filter(|r| r.error.is_some())
    }

    /// The first failed run as an error, if any.
    pub fn ok(&self) -> Result<(), ExperimentError> {
        match self.failures().next() {
            Some(r) => Err(ExperimentError::Run {
                run: r.run,
                message: r.error.clone().unwrap_or_default(),
            }),
            None => Ok(()),
        }
    }
}

#[derive(Serialize)]
struct Timing {
    total_s: f64,
    runs_s: Vec<f64>,
}

fn tensor_order(layout: Option<TaskLayout>) -> String {
    match layout {
        Some(TaskLayout::Structured) => "sentence_0, sentence_1, image".into(),
        Some(TaskLayout::Unstructured) => "sentence, image_0, image_1".into(),
        None => String::new(),
    }
}

/// Runs every repetition (in parallel) and writes `run_<i>/history.csv`,
/// `iterations.csv`, `summary.json` and `timing.json` under `out_dir`.
///
/// Setup problems are errors; a failing repetition is recorded in the
/// summary instead, so check [`Summary::ok`].
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Summary, ExperimentError> {
    let start = Instant::now();
    let cfg = cfg.resolved();
    cfg.check()?;
    let data = cfg.dataset()?;
    let lexicon = cfg.lexicon()?;
    let model = cfg.model();
    let gains = cfg.spsa.expect("resolved");
    fs::create_dir_all(&cfg.out_dir)?;

    let results: Vec<(RunSummary, f64)> = (0..cfg.repetitions)
        .into_par_iter()
        .map(|run| {
            let t = Instant::now();
            let seed = cfg.seed + run as u64;
            let outcome = train(&model, &lexicon, &data, &gains.with_seed(seed), &cfg.train, &Parallel)
                .map_err(|e: TrainError| e.to_string())
                .and_then(|o| {
                    let dir = cfg.out_dir.join(format!("run_{run}"));
                    fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
                    io::save_history(&o.history, &dir.join("history.csv")).map_err(|e| e.to_string())?;
                    Ok(o)
                });
            let summary = match outcome {
                Ok(o) => {
                    let last = o.history.records.last();
                    RunSummary {
                        run,
                        seed,
                        test_acc: Some(o.history.test_acc),
                        final_train_acc: last.map(|r| r.train_acc),
                        final_val_acc: last.map(|r| r.val_acc),
                        split_sizes: Some(o.split_sizes),
                        n_trainable: Some(o.params.n_trainable()),
                        scaler: Some(o.scaler),
                        error: None,
                    }
                }
                Err(message) => RunSummary {
                    run,
                    seed,
                    test_acc: None,
                    final_train_acc: None,
                    final_val_acc: None,
                    split_sizes: None,
                    n_trainable: None,
                    scaler: None,
                    error: Some(message),
                },
            };
            (summary, t.elapsed().as_secs_f64())
        })
        .collect();

    let (runs, runs_s): (Vec<RunSummary>, Vec<f64>) = results.into_iter().unzip();
    let accs: Vec<f64> = runs.iter().filter_map(|r| r.test_acc).collect();
    let summary = Summary {
        provenance: data.provenance.clone(),
        n_samples: data.len(),
        class_balance: data.class_balance(),
        tensor_order: tensor_order(data.layout()),
        average: (!accs.is_empty()).then(|| accs.iter().sum::<f64>() / accs.len() as f64),
        best: accs.iter().copied().reduce(f64::max),
        runs,
        config: cfg,
    };
    write_iterations(&summary, &summary.config.out_dir.join("iterations.csv"))?;
    write_json(&summary, &summary.config.out_dir.join("summary.json"))?;
    let timing = Timing {
        total_s: start.elapsed().as_secs_f64(),
        runs_s,
    };
    write_json(&timing, &summary.config.out_dir.join("timing.json"))?;
    Ok(summary)
}

fn write_json(value: &impl Serialize, path: &Path) -> Result<(), ExperimentError> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::from)?;
    text.push('\n');
    fs::write(path, text).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}

const GAP: &str = "NA";

fn cell(x: Option<f64>) -> String {
    x.map_or_else(|| GAP.to_string(), |v| v.to_string())
}

/// `run,seed,train_acc,val_acc,test_acc`, one row per repetition.
fn write_iterations(s: &Summary, path: &Path) -> Result<(), ExperimentError> {
    let mut text = String::from("run,seed,train_acc,val_acc,test_acc\n");
    for r in &s.runs {
        let _ = writeln!(
            text,
            "{},{},{},{},{}",
            r.run,
            r.seed,
            cell(r.final_train_acc),
            cell(r.final_val_acc),
            cell(r.test_acc)
        );
    }
    fs::write(path, text)?;
    Ok(())
}

/// One row per reader: test accuracy (percent) of every run, then the mean.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    pub n_runs: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub reader: String,
    /// `None` marks a run that is missing or failed.
    pub runs: Vec<Option<f64>>,
    pub average: Option<f64>,
}

impl Comparison {
    pub fn from_summaries(summaries: &[Summary]) -> Self {
        let n_runs = summaries.iter().map(|s| s.config.repetitions).max().unwrap_or(0);
        let rows = summaries
            .iter()
            .map(|s| {
                let mut runs = vec![None; n_runs];
                for r in &s.runs {
                    if r.run < n_runs {
                        runs[r.run] = r.test_acc.map(|a| 100.0 * a);
                    }
                }
                let done: Vec<f64> = runs.iter().flatten().copied().collect();
                ComparisonRow {
                    reader: s.config.reader.to_string(),
                    average: (!done.is_empty()).then(|| done.iter().sum::<f64>() / done.len() as f64),
                    runs,
                }
            })
            .collect();
        Comparison { rows, n_runs }
    }

    fn header(&self) -> Vec<String> {
        let mut h = vec!["reader".to_string()];
        h.extend((1..=self.n_runs).map(|i| format!("run_{i}")));
        h.push("average".into());
        h
    }

    fn cells(row: &ComparisonRow) -> Vec<String> {
        let fmt = |x: &Option<f64>| x.map_or_else(|| GAP.to_string(), |v| format!("{v:.2}"));
        let mut c = vec![row.reader.clone()];
        c.extend(row.runs.iter().map(fmt));
        c.push(fmt(&row.average));
        c
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header().join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&Self::cells(row).join(","));
            out.push('\n');
        }
        out
    }

    /// Right-aligned columns, reader names left-aligned.
    pub fn to_text(&self) -> String {
        let mut table = vec![self.header()];
        table.extend(self.rows.iter().map(Self::cells));
        let widths: Vec<usize> = (0..table[0].len())
            .map(|j| table.iter().map(|r| r[j].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in &table {
            let line: Vec<String> = row
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(j, (c, &w))| if j == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}

/// Configs compared side by side may differ only in the reader and output
/// directory.
fn comparable(a: &ExperimentConfig, b: &ExperimentConfig) -> bool {
    let strip = |c: &ExperimentConfig| ExperimentConfig {
        reader: ReaderKind::Discocat,
        out_dir: PathBuf::new(),
        ..c.resolved()
    };
    strip(a) == strip(b)
}

/// Runs (or reuses the stored summary of) each config and tabulates test
/// accuracy per reader. A stored `summary.json` is reused only when it echoes
/// exactly the resolved config.
pub fn compare_readers(cfgs: &[ExperimentConfig]) -> Result<(Comparison, Vec<Summary>), ExperimentError> {
    let Some(first) = cfgs.first() else {
        return Err(ExperimentError::Config("no configs to compare".into()));
    };
    for c in cfgs {
        if !comparable(first, c) {
            return Err(ExperimentError::Inconsistent(format!(
                "configs for `{}` and `{}` differ beyond the reader and output directory",
                first.reader, c.reader
            )));
        }
    }
    let mut summaries = Vec::new();
    for c in cfgs {
        let stored = fs::read_to_string(c.out_dir.join("summary.json"))
            .ok()
            .and_then(|t| serde_json::from_str::<Summary>(&t).ok())
            .filter(|s| s.config == c.resolved());
        summaries.push(match stored {
            Some(s) => s,
            None => run_experiment(c)?,
        });
    }
    Ok((Comparison::from_summaries(&summaries), summaries))
}

/// Where run `run` of an experiment writes its history.
pub fn history_path(out_dir: &Path, run: usize) -> PathBuf {
    out_dir.join(format!("run_{run}")).join("history.csv")
}
