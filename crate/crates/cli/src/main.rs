use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use pastewatch_core::engine::batch::{analyze, canonical_json, eval_on, mine, train_on};
use pastewatch_core::engine::{serve, Engine, EngineConfig};
use pastewatch_core::learn::{load_model, save_model, synthetic, ModelKind};
use pastewatch_core::metrics::catalog;
use pastewatch_core::miner::{load_dataset, write_dataset, ScoreWeights};

#[derive(Parser)]
#[command(name = "pastewatch", version, about = "Extract Method recommendations for pasted Java code")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Logistic,
    Forest,
    Bayes,
}

impl From<Kind> for ModelKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Logistic => ModelKind::Logistic,
            Kind::Forest => ModelKind::Forest,
            Kind::Bayes => ModelKind::Bayes,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    Separable,
    Overlap,
}

#[derive(Subcommand)]
enum Command {
    /// Speak the JSON line protocol on stdin/stdout.
    Serve {
        /// Config file; defaults to $PASTEWATCH_CONFIG.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        virtual_time: bool,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        delay_ms: Option<u64>,
        #[arg(long)]
        expiry_ms: Option<u64>,
        #[arg(long)]
        decision_threshold: Option<f64>,
        #[arg(long)]
        similarity_threshold: Option<f64>,
    },
    /// Rank extraction opportunities in every Java file under a directory.
    Analyze {
        root: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Write the full report as JSON to this file.
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long, default_value_t = 0.5)]
        decision_threshold: f64,
        #[arg(long, default_value_t = 0.8)]
        similarity_threshold: f64,
    },
    /// Train a classifier on a dataset file.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        model_out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate a model, optionally by out-of-sample bootstrap.
    Eval {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Bootstrap iterations; retrains the model's configuration.
        #[arg(long)]
        bootstrap: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
    },
    /// Build a balanced dataset from positives and mined negatives.
    Mine {
        #[arg(long)]
        root: PathBuf,
        #[arg(long)]
        positives: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Negatives to sample; defaults to the number of positives.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Scoring weights as `length,depth,live_in,live_out`.
        #[arg(long, default_value = "1,1,0.2,0.4")]
        weights: ScoreWeights,
    },
    /// Print the metric catalog.
    Catalog,
    /// Write a synthetic dataset.
    Synth {
        #[arg(long, value_enum)]
        kind: SynthKind,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot write {}", path.display()))?,
    ))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Serve {
            config,
            virtual_time,
            model,
            delay_ms,
            expiry_ms,
            decision_threshold,
            similarity_threshold,
        } => {
            let mut c = EngineConfig::load(config.as_deref())?;
            c.virtual_time |= virtual_time;
            if let Some(m) = model {
                c.model_path = Some(m);
            }
            if let Some(v) = delay_ms {
                c.delay_ms = v;
            }
            if let Some(v) = expiry_ms {
                c.expiry_ms = v;
            }
            if let Some(v) = decision_threshold {
                c.set("decision_threshold", &v.to_string())?;
            }
            if let Some(v) = similarity_threshold {
                c.set("similarity_threshold", &v.to_string())?;
            }
            let model = match &c.model_path {
                Some(p) => Some(Arc::new(load_model(p)?)),
                None => None,
            };
            let engine = Engine::new(c, model);
            serve(engine, BufReader::new(io::stdin()), io::stdout())?;
        }
        Command::Analyze {
            root,
            model,
            json,
            decision_threshold,
            similarity_threshold,
        } => {
            let model = load_model(&model)?;
            let report = analyze(&root, &model, decision_threshold, similarity_threshold)?;
            if let Some(p) = json {
                let mut w = create(&p)?;
                writeln!(w, "{}", canonical_json(&report))?;
                w.flush()?;
            }
            print!("{}", report.summary());
        }
        Command::Train {
            dataset,
            kind,
            model_out,
            seed,
        } => {
            let ds = load_dataset(&dataset)?;
            let (model, report) = train_on(&ds, kind.into(), seed, 0.5)?;
            save_model(&model, &model_out)?;
            let m = report.metrics;
            println!(
                "trained {} on {} records (seed {seed}); training fit: precision {:.4} recall {:.4} f {:.4} pr-auc {:.4}",
                model.kind(),
                ds.records.len(),
                m.precision,
                m.recall,
                m.f_measure,
                m.pr_auc
            );
        }
        Command::Eval {
            dataset,
            model,
            bootstrap,
            seed,
            threshold,
        } => {
            if !(threshold > 0.0 && threshold <= 1.0) {
                bail!("threshold must lie in (0, 1]");
            }
            let ds = load_dataset(&dataset)?;
            let model = load_model(&model)?;
            let out = eval_on(&ds, &model, bootstrap, seed, threshold)?;
            println!("{}", canonical_json(&out));
        }
        Command::Mine {
            root,
            positives,
            out,
            n,
            seed,
            weights,
        } => {
            let (ds, report) = mine(&root, &positives, n, seed, &weights)?;
            let mut w = create(&out)?;
            write_dataset(&mut w, &weights, ds.seed, &ds.records)?;
            w.flush()?;
            println!(
                "wrote {} positives and {} negatives (seed {seed}, weights {weights}) to {}",
                report.positives,
                report.negatives,
                out.display()
            );
            for (line, reason) in &report.skipped_positives {
                println!("skipped positives line {line}: {reason}");
            }
            for u in &report.unparsed {
                println!("unparsed {}: {}", u.path, u.error);
            }
        }
        Command::Catalog => {
            let mut out = io::stdout().lock();
            for m in catalog() {
                writeln!(out, "{}\t{}\t{}\t{}", m.index, m.name, m.group, m.description)?;
            }
        }
        Command::Synth { kind, n, seed, out } => {
            let records = match kind {
                SynthKind::Separable => synthetic::separable(n, seed),
                SynthKind::Overlap => synthetic::overlap(n, seed),
            };
            let mut w = create(&out)?;
            write_dataset(&mut w, &ScoreWeights::default(), Some(seed), &records)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // Some causes already spell out their source; skip the repeats.
            let mut msg = String::new();
            for cause in e.chain().map(|c| c.to_string()) {
                if !msg.contains(&cause) {
                    msg += if msg.is_empty() { "" } else { ": " };
                    msg += &cause;
                }
            }
            eprintln!("pastewatch: {msg}");
            ExitCode::FAILURE
        }
    }
}
