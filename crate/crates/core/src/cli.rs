//! Command-line front end. Every subcommand shares `--config`, `--seed`
//! and `--jobs`; exit status is 0 on success, 1 for usage errors and 2 for
//! data errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};

use crate::analytics::{
    evaluate_manifest, manifest_features, pca_scatter, read_confusion, read_metrics, train_baseline, write_curve, write_evaluation,
    LinearModel, ReportTable, CONFUSION_FILE, CURVE_FILE, METRICS_FILE,
};
use crate::config::Config;
use crate::dataset::{generate_dataset, ingest_real, split, write_split, BackgroundMode, DatasetManifest};
use crate::{Error, Label, Result};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "deformsynth", version, about = "Synthetic deformation datasets: generate, split, train, evaluate")]
struct Cli {
    /// TOML config; unset keys take the defaults listed below.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `seed` from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores). Never changes outputs.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render a balanced dataset.
    Generate {
        #[arg(short = 'n', long)]
        n: u64,
        /// `black` or `pool` (needs `paths.background_dir`).
        #[arg(long, default_value = "black")]
        background: BackgroundMode,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Build a manifest from `deformed/` and `non_deformed/` photo folders.
    Ingest {
        src: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Stratified train/test split written next to the manifest.
    Split {
        manifest: PathBuf,
        /// Train fraction; defaults to `dataset.split_fraction`.
        #[arg(long)]
        fraction: Option<f64>,
    },
    /// Train the logistic baseline; with `--test` also evaluate it.
    Train {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: Option<PathBuf>,
        /// Directory for model.json, curve.csv and evaluation files.
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a saved model on a manifest.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Joint PCA projection of several manifests, tagged per dataset.
    Pca {
        /// `path` or `tag=path`.
        #[arg(required = true)]
        manifests: Vec<String>,
        #[arg(long, default_value = "pca.csv")]
        out: PathBuf,
        #[arg(short = 'k', long, default_value_t = 2)]
        k: usize,
        /// Append `:deformed` / `:non_deformed` to each tag.
        #[arg(long)]
        by_label: bool,
    },
    /// Collect evaluation directories into one metrics table.
    Report {
        /// `name=eval_dir`, one column each.
        #[arg(required = true)]
        evaluations: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check every file digest listed in a manifest.
    Verify { manifest: PathBuf },
}

fn load_config(cli: &Cli) -> Result<Config> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn tagged(arg: &str) -> (String, PathBuf) {
    if let Some((tag, path)) = arg.split_once('=') {
        return (tag.to_string(), PathBuf::from(path));
    }
    let path = PathBuf::from(arg);
    let dir = path
        .parent()
        .and_then(|p| p.file_name())
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let tag = match (dir.is_empty(), stem.as_str()) {
        (false, "manifest") => dir,
        (false, _) => format!("{dir}/{stem}"),
        (true, _) => stem,
    };
    (tag, path)
}

fn class_counts(m: &DatasetManifest) -> String {
    format!("{} deformed, {} non_deformed", m.count(Label::Deformed), m.count(Label::NonDeformed))
}

fn execute(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Generate { n, background, out } => {
            let summary = generate_dataset(&cfg, *n, *background, out, cli.jobs)?;
            let m = &summary.manifest;
            println!("generated {} samples ({}) -> {}", m.len(), class_counts(m), out.join("manifest.jsonl").display());
            if let Some(c) = summary.changed {
                println!("{c} files changed");
            }
        }
        Command::Ingest { src, out } => {
            let m = ingest_real(src, out, cfg.camera.image_size)?;
            println!("ingested {} images ({}) -> {}", m.len(), class_counts(&m), out.join("manifest.jsonl").display());
        }
        Command::Split { manifest, fraction } => {
            let m = DatasetManifest::load(manifest)?;
            let s = split(&m, fraction.unwrap_or(cfg.dataset.split_fraction), cfg.seed)?;
            let (train, test) = write_split(&m, manifest, &s)?;
            println!("train {} -> {}", s.train.len(), train.display());
            println!("test {} -> {}", s.test.len(), test.display());
        }
        Command::Train { train, test, out } => {
            let train_m = DatasetManifest::load(train)?;
            // Load the test set up front so a bad path fails before training.
            let test_m = test.as_deref().map(DatasetManifest::load).transpose()?;
            let trained = train_baseline(&train_m, &cfg.baseline, cfg.seed)?;
            std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
            trained.model.save(&out.join("model.json"))?;
            write_curve(&out.join(CURVE_FILE), &trained.curve)?;
            if let Some(last) = trained.curve.last() {
                println!("trained on {} samples: loss {:.4}, train accuracy {:.4}", train_m.len(), last.loss, last.accuracy);
            }
            if let Some(m) = test_m {
                evaluate_into(&trained.model, &m, out)?;
            }
        }
        Command::Eval { model, manifest, out } => {
            let model = LinearModel::load(model)?;
            evaluate_into(&model, &DatasetManifest::load(manifest)?, out)?;
        }
        Command::Pca { manifests, out, k, by_label } => {
            let mut sets: Vec<(String, Vec<Vec<f64>>)> = Vec::new();
            for arg in manifests {
                let (tag, path) = tagged(arg);
                let m = DatasetManifest::load(&path)?;
                if m.is_empty() {
                    return Err(Error::Data(format!("{} lists no samples", path.display())));
                }
                let (xs, labels) = manifest_features(&m)?;
                if *by_label {
                    for l in [Label::Deformed, Label::NonDeformed] {
                        let rows: Vec<_> = xs.iter().zip(&labels).filter(|(_, &y)| y == l).map(|(x, _)| x.clone()).collect();
                        if !rows.is_empty() {
                            sets.push((format!("{tag}:{l}"), rows));
                        }
                    }
                } else {
                    sets.push((tag, xs));
                }
            }
            let scatter = pca_scatter(&sets, *k)?;
            scatter.save(out)?;
            println!("projected {} samples from {} datasets -> {}", scatter.tags.len(), sets.len(), out.display());
        }
        Command::Report { evaluations, out } => {
            std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
            let mut columns = Vec::new();
            for arg in evaluations {
                let (name, dir) = match arg.split_once('=') {
                    Some((n, d)) => (n.to_string(), PathBuf::from(d)),
                    None => (tagged(arg).0, PathBuf::from(arg)),
                };
                columns.push((name.clone(), read_metrics(&dir.join(METRICS_FILE))?));
                let cm = read_confusion(&dir.join(CONFUSION_FILE))?;
                let dest = out.join(format!("confusion_{}.csv", name.replace(['/', '\\', ':'], "_")));
                std::fs::write(&dest, crate::analytics::confusion_csv(&cm)).map_err(|e| Error::io(&dest, e))?;
            }
            let table = ReportTable { columns };
            let csv_path = out.join("report.csv");
            std::fs::write(&csv_path, table.to_csv()).map_err(|e| Error::io(&csv_path, e))?;
            print!("{}", table.to_text());
        }
        Command::Verify { manifest } => {
            let m = DatasetManifest::load(manifest)?;
            let bad = m.verify();
            for (path, reason) in &bad {
                println!("{path}: {reason}");
            }
            println!("{} files changed", bad.len());
            if !bad.is_empty() {
                return Err(Error::Data(format!("{} of the files listed in {} do not match", bad.len(), manifest.display())));
            }
        }
    }
    Ok(())
}

fn evaluate_into(model: &LinearModel, manifest: &DatasetManifest, out: &Path) -> Result<()> {
    let (cm, report) = evaluate_manifest(model, manifest)?;
    write_evaluation(out, &cm, &report)?;
    println!(
        "accuracy {:.4}  f1 {:.4}  recall {:.4}  precision {:.4}  (tp {} fp {} fn {} tn {})",
        report.accuracy, report.f1, report.recall, report.precision, cm.tp, cm.fp, cm.fn_, cm.tn
    );
    Ok(())
}

fn command() -> clap::Command {
    Cli::command().after_long_help(format!("Config keys and defaults:\n{}", Config::describe_defaults()))
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return EXIT_USAGE;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                EXIT_USAGE
            } else {
                EXIT_DATA
            }
        }
    }
}
