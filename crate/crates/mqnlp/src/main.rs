use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use mqnlp::experiment::{SpsaGains, SynthSpec};
use mqnlp::io;
use mqnlp::{compare_readers, run_experiment, ExperimentConfig};
use mqnlp_core::multimodal::TaskLayout;
use mqnlp_core::readers::ReaderKind;

#[derive(Parser)]
#[command(name = "mqnlp", version, about = "Multimodal quantum NLP experiments on a statevector simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a reader for several seeded repetitions and write a summary.
    Run(RunArgs),
    /// Generate a synthetic samples file (JSON Lines).
    Synth {
        layout: TaskLayout,
        /// Number of samples (even for structured data).
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tabulate test accuracy of experiments that differ only in the reader.
    Compare {
        /// Glob matching experiment config files.
        #[arg(long)]
        configs: String,
        /// Directory for comparison.csv.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

/// Every flag overrides the config field of the same name.
#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    reader: Option<ReaderKind>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    eval_every: Option<usize>,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dataset_path: Option<PathBuf>,
    #[arg(long)]
    mirrored: Option<bool>,
    #[arg(long)]
    stratify: Option<bool>,
    #[arg(long)]
    explicit_prep: Option<bool>,
    #[arg(long)]
    spsa_a: Option<f64>,
    #[arg(long)]
    spsa_c: Option<f64>,
    /// Stability offset `A`.
    #[arg(long = "spsa-A")]
    spsa_big_a: Option<f64>,
    #[arg(long)]
    spsa_alpha: Option<f64>,
    #[arg(long)]
    spsa_gamma: Option<f64>,
}

impl RunArgs {
    fn apply(&self, mut c: ExperimentConfig) -> ExperimentConfig {
        macro_rules! set {
            ($flag:ident => $($field:ident).+) => {
                if let Some(v) = self.$flag.clone() {
                    c.$($field).+ = v;
                }
            };
        }
        set!(reader => reader);
        set!(seed => seed);
        set!(epochs => train.epochs);
        set!(batch_size => train.batch_size);
        set!(eval_every => train.eval_every);
        set!(repetitions => repetitions);
        set!(out => out_dir);
        set!(mirrored => mirrored);
        set!(stratify => train.stratify);
        set!(explicit_prep => reader_options.explicit_prep);
        if let Some(p) = &self.dataset_path {
            c.dataset_path = Some(p.clone());
            c.synth = None;
        }
        // gains default from the (possibly overridden) epoch count
        let mut c = c.resolved();
        let g: &mut SpsaGains = c.spsa.as_mut().expect("resolved");
        for (flag, field) in [
            (self.spsa_a, &mut g.a),
            (self.spsa_c, &mut g.c),
            (self.spsa_big_a, &mut g.big_a),
            (self.spsa_alpha, &mut g.alpha),
            (self.spsa_gamma, &mut g.gamma),
        ] {
            if let Some(v) = flag {
                *field = v;
            }
        }
        c
    }
}

fn run(args: &RunArgs) -> Result<()> {
    let cfg = ExperimentConfig::load(&args.config)?;
    let cfg = args.apply(cfg);
    let summary = run_experiment(&cfg)?;
    for r in &summary.runs {
        match (&r.test_acc, &r.error) {
            (Some(acc), _) => println!("run {} (seed {}): test accuracy {:.4}", r.run, r.seed, acc),
            (None, Some(e)) => eprintln!("run {} (seed {}) failed: {e}", r.run, r.seed),
            (None, None) => {}
        }
    }
    if let (Some(avg), Some(best)) = (summary.average, summary.best) {
        println!("average {avg:.4}, best {best:.4}");
    }
    println!("wrote {}", cfg.out_dir.join("summary.json").display());
    summary.ok()?;
    Ok(())
}

fn synth(layout: TaskLayout, n: usize, seed: u64, out: &Path) -> Result<()> {
    let spec = SynthSpec {
        layout,
        n,
        seed,
        vocab: None,
    };
    let data = spec.generate()?;
    io::save_dataset(&data, out)?;
    let [zeros, ones] = data.class_balance();
    println!("wrote {} samples to {} (labels {zeros}/{ones})", data.len(), out.display());
    Ok(())
}

fn compare(pattern: &str, out: &PathBuf) -> Result<()> {
    let mut paths: Vec<PathBuf> = glob::glob(pattern)
        .with_context(|| format!("bad pattern `{pattern}`"))?
        .collect::<Result<_, _>>()?;
    paths.sort();
    if paths.is_empty() {
        bail!("no config matches `{pattern}`");
    }
    let cfgs = paths
        .iter()
        .map(|p| ExperimentConfig::load(p))
        .collect::<Result<Vec<_>, _>>()?;
    let (table, summaries) = compare_readers(&cfgs)?;
    fs::create_dir_all(out)?;
    let path = out.join("comparison.csv");
    fs::write(&path, table.to_csv()).with_context(|| format!("writing {}", path.display()))?;
    print!("{}", table.to_text());
    for s in &summaries {
        for r in s.failures() {
            eprintln!("{} run {}: {}", s.config.reader, r.run, r.error.as_deref().unwrap_or(""));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run(args),
        Command::Synth { layout, n, seed, out } => synth(*layout, *n, *seed, out),
        Command::Compare { configs, out } => compare(configs, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
