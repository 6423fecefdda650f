use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ecg_arrhythmia::classifiers::{ModelKind, Target, TrainedModel};
use ecg_arrhythmia::evaluation::{report_table, write_results_tsv, MethodRow, MetricTriple};
use ecg_arrhythmia::pipeline::{atomic_write, read_feature_subset, Pipeline, PipelineConfig, Split};
use ecg_arrhythmia::wfdb::{AamiClass, DS1, DS2, PACED};
use ecg_arrhythmia::{Error, Result};

#[derive(Parser)]
#[command(name = "ecgbeat", version, about = "MIT-BIH heartbeat classification pipeline")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalOpts {
    /// Directory holding the WFDB records (.hea/.dat/.atr).
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    /// Stage artifact cache.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Plain-text `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Three DS1 and three DS2 records only.
    #[arg(long, global = true)]
    quick: bool,
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand)]
enum Command {
    /// Parse records and print per-record and per-split beat counts.
    Ingest,
    /// Filter and resample every DS1/DS2 record into the cache.
    Preprocess,
    /// Extract features; optionally write ds1.tsv and ds2.tsv.
    Extract {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Forward feature selection on DS1.
    Select {
        #[arg(long, default_value = "lda")]
        classifier: ModelKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a model on DS1.
    Train {
        #[arg(long)]
        model: ModelKind,
        /// `all`, a selection trace (.json) or a file with one feature per line.
        #[arg(long, default_value = "all")]
        features: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a trained model on a split.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "ds2")]
        split: Split,
        #[arg(long, default_value = "both")]
        target: String,
        /// Machine-readable results file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train on DS1, test on DS2 and write the comparison report.
    Reproduce {
        /// Use the published feature subsets instead of running selection.
        #[arg(long)]
        paper_subsets: bool,
        #[arg(long, default_value = "reproduction")]
        out: PathBuf,
    },
    /// Write a synthetic WFDB database with MIT-BIH record names.
    Synth {
        #[arg(long)]
        out: PathBuf,
        /// Seconds per record.
        #[arg(long, default_value_t = 120.0)]
        duration: f64,
        /// Comma-separated ids; default is every DS1 and DS2 record.
        #[arg(long, value_delimiter = ',')]
        records: Vec<String>,
    },
}

fn config(g: &GlobalOpts) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::default();
    if let Some(p) = &g.config {
        cfg.load_file(p)?;
    }
    if let Some(d) = &g.data_dir {
        cfg.data_dir = d.clone();
    }
    if let Some(d) = &g.cache_dir {
        cfg.cache_dir = d.clone();
    }
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    cfg.quick |= g.quick;
    Ok(cfg)
}

fn targets(s: &str) -> Result<Vec<Target>> {
    match s {
        "sveb" => Ok(vec![Target::Sveb]),
        "veb" => Ok(vec![Target::Veb]),
        "both" => Ok(Target::BOTH.to_vec()),
        other => Err(Error::InvalidParameter(format!("unknown target `{other}`"))),
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = config(&cli.global)?;
    match cli.command {
        Command::Synth { out, duration, records } => {
            let ids: Vec<String> = if records.is_empty() {
                DS1.iter().chain(&DS2).map(|s| s.to_string()).collect()
            } else {
                records
            };
            let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
            std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            ecg_arrhythmia::synth::write_synthetic_database(&out, &refs, cfg.seed, duration)?;
            println!("wrote {} synthetic records to {}", ids.len(), out.display());
        }
        Command::Ingest => {
            let p = Pipeline::new(cfg)?;
            let ids = p.available_records();
            if ids.is_empty() {
                return Err(Error::MissingData(format!("no MIT-BIH records in {}", p.config().data_dir.display())));
            }
            let mut totals = [[0usize; 5]; 3];
            println!("record\tsplit\tN\tS\tV\tF\tQ");
            for id in &ids {
                let (_, s) = p.ingest(id)?;
                let (k, name) = if DS1.contains(&id.as_str()) {
                    (0, "ds1")
                } else if DS2.contains(&id.as_str()) {
                    (1, "ds2")
                } else {
                    debug_assert!(PACED.contains(&id.as_str()));
                    (2, "paced")
                };
                totals[k].iter_mut().zip(s.class_counts).for_each(|(t, c)| *t += c);
                let c = s.class_counts;
                println!("{id}\t{name}\t{}\t{}\t{}\t{}\t{}", c[0], c[1], c[2], c[3], c[4]);
            }
            for (name, t) in ["ds1", "ds2", "paced"].iter().zip(totals) {
                println!("total\t{name}\t{}\t{}\t{}\t{}\t{}", t[0], t[1], t[2], t[3], t[4]);
            }
        }
        Command::Preprocess => {
            let p = Pipeline::new(cfg)?;
            for split in [Split::Ds1, Split::Ds2] {
                let ids = p.records(split);
                p.check_data(&ids)?;
                for id in &ids {
                    let (e, pre) = p.preprocess(id)?;
                    println!("{id}\t{}\t{} samples\t{} beats", if e.hit { "cached" } else { "done" }, pre.signal.len(), pre.beats.len());
                }
            }
        }
        Command::Extract { out } => {
            let p = Pipeline::new(cfg)?;
            for split in [Split::Ds1, Split::Ds2] {
                let f = p.features(split)?;
                let r = f.report;
                println!(
                    "{split}: {} records, {} annotated beats, {} extracted, {} dropped at edges, \
                     QRS fallback {}, T fallback {}, P window clipped {}, morphology imputed {}",
                    r.records, r.annotated_beats, r.extracted_beats, r.dropped_edge, r.qrs_fallback, r.t_fallback,
                    r.p_window_clipped, r.morph_imputed
                );
                let counts = AamiClass::ALL.map(|c| f.matrix.meta().iter().filter(|m| m.label == c).count());
                println!("{split}: N {} S {} V {} F {} Q {}", counts[0], counts[1], counts[2], counts[3], counts[4]);
                if let Some(dir) = &out {
                    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
                    f.matrix.write_tsv(&dir.join(format!("{split}.tsv")))?;
                }
            }
        }
        Command::Select { classifier, out } => {
            let p = Pipeline::new(cfg)?;
            let (_, trace) = p.select(classifier)?;
            for (k, s) in trace.steps.iter().enumerate() {
                println!("{}\t{}\t{:.4}", k + 1, s.feature, s.score);
            }
            println!("stop: {}", trace.stop);
            trace.save(&out)?;
        }
        Command::Train { model, features, out } => {
            let p = Pipeline::new(cfg)?;
            let names = read_feature_subset(&features)?;
            let (e, m) = p.train(model, &names)?;
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|err| Error::io(dir, err))?;
            }
            m.save(&out)?;
            println!("{model} on {} features ({}), written to {}", names.len(), if e.hit { "cached" } else { "trained" }, out.display());
        }
        Command::Evaluate { model, split, target, out } => {
            let targets = targets(&target)?;
            let m = TrainedModel::load(&model)?;
            cfg.scheme = m.scheme;
            let p = Pipeline::new(cfg)?;
            let e = p.evaluate(&m, split)?;
            for t in &targets {
                let b = e.combined.target(*t);
                let c = b.counts;
                let f = |x: Option<f64>| x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.2}"));
                println!(
                    "{t}: Se {} Sp {} PPV {} FPR {} F {} (TP {} FN {} FP {} TN {})",
                    f(b.se), f(b.sp), f(b.ppv), f(b.fpr), f(b.f_measure), c.tp, c.fn_, c.fp, c.tn
                );
            }
            let row = MethodRow {
                method: format!("{} ({} features)", m.model.kind(), m.features.len()),
                published: false,
                sveb: MetricTriple::from_metrics(&e.combined.sveb),
                veb: MetricTriple::from_metrics(&e.combined.veb),
            };
            if let Some(out) = out {
                let mut buf = Vec::new();
                write_results_tsv(std::slice::from_ref(&row), &mut buf)?;
                atomic_write(&out, &buf)?;
            }
            print!("{}", report_table(&[row]));
        }
        Command::Reproduce { paper_subsets, out } => {
            cfg.paper_subsets |= paper_subsets;
            let p = Pipeline::new(cfg)?;
            let r = p.reproduce(&out)?;
            print!("{}", r.report);
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    if e.is_numeric_error() {
        3
    } else if matches!(e, Error::InvalidParameter(_)) {
        1
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
