use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use bayeswords::config::{parse_range, ClassifierKind, Config};
use bayeswords::error::{Stage, StageExt};
use bayeswords::features::{block_features, format_feature_dump, window_features};
use bayeswords::io::{load_dataset, load_image, write_dataset, write_manifest, ManifestEntry};
use bayeswords::persist::{load_model, save_discretizer, save_model};
use bayeswords::pipeline::{
    class_count, ensure_splits, evaluate, extract_block_features, extract_window_features,
    fit_block_discretizers, fit_window_codebooks, subset, train_dbn, train_static, Model,
};
use bayeswords::report::{format_state_curves, ReportDocument};
use bayeswords_core::eval::ranking;
use bayeswords_core::imaging::{LabeledSample, Split};
use bayeswords_core::synth::generate_synthetic;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bayeswords",
    version,
    about = "Handwritten word recognition with discrete Bayesian networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone)]
struct Common {
    /// `key = value` configuration file; flags below override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_parser = clap::value_parser!(ClassifierKind))]
    classifier: Option<ClassifierKind>,
    #[arg(long, global = true)]
    blocks: Option<usize>,
    #[arg(long, global = true)]
    window: Option<usize>,
    #[arg(long = "codebook-k", global = true)]
    codebook_k: Option<usize>,
    #[arg(long = "q-range", global = true, value_parser = parse_range)]
    q_range: Option<(usize, usize)>,
    /// Any other configuration key.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic labeled dataset.
    Synth {
        #[arg(long, default_value_t = 18)]
        classes: usize,
        #[arg(long, default_value_t = 200)]
        per_class: usize,
        #[arg(long, default_value_t = 0.95)]
        separability: f64,
    },
    /// Assign stratified train/validation/test splits.
    Split { manifest: PathBuf },
    /// Dump block (or, with --classifier dbn, window) feature vectors.
    Features { manifest: PathBuf },
    /// Fit codebooks on the training split.
    Codebook { manifest: PathBuf },
    /// Train an NB, TAN or FAN classifier.
    TrainStatic { manifest: PathBuf },
    /// Train coupled HMMs, optionally selecting state counts with --q-range.
    TrainDbn { manifest: PathBuf },
    /// Score the test split with a saved model and write the report.
    Evaluate { model: PathBuf, manifest: PathBuf },
    /// Rank classes for individual images.
    Predict {
        model: PathBuf,
        #[arg(required = true)]
        images: Vec<PathBuf>,
    },
    /// Print a saved JSON report as a table.
    Report { report: PathBuf },
}

impl Common {
    fn config(&self) -> anyhow::Result<Config> {
        let mut cfg = match &self.config {
            Some(path) => Config::from_file(path)?,
            None => Config::default(),
        };
        let mut set = |key: &str, value: String| {
            cfg.set(key, &value)
                .map_err(|m| anyhow::anyhow!("--{key}: {m}"))
        };
        if let Some(v) = self.seed {
            set("seed", v.to_string())?;
        }
        if let Some(v) = self.classifier {
            set("classifier", v.to_string())?;
        }
        if let Some(v) = self.blocks {
            set("blocks", v.to_string())?;
        }
        if let Some(v) = self.window {
            set("window", v.to_string())?;
        }
        if let Some(v) = self.codebook_k {
            set("codebook_k", v.to_string())?;
        }
        if let Some((a, b)) = self.q_range {
            set("q_range", format!("{a}..{b}"))?;
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .with_context(|| format!("--set `{kv}` is not KEY=VALUE"))?;
            cfg.set(k, v).map_err(|m| anyhow::anyhow!("--set: {m}"))?;
        }
        Ok(cfg)
    }

    fn out_dir(&self) -> anyhow::Result<&Path> {
        fs::create_dir_all(&self.out)
            .with_context(|| format!("creating {}", self.out.display()))?;
        Ok(&self.out)
    }
}

fn write(path: PathBuf, text: &str) -> anyhow::Result<()> {
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn load_split(manifest: &Path, cfg: &Config) -> anyhow::Result<Vec<LabeledSample>> {
    let samples = load_dataset(manifest).stage(Stage::Load)?;
    if samples.is_empty() {
        bail!("[load] {} lists no images", manifest.display());
    }
    Ok(ensure_splits(samples, cfg)?)
}

fn save_config(dir: &Path, cfg: &Config) -> anyhow::Result<()> {
    write(dir.join("config.txt"), &cfg.to_text())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = cli.common.config()?;
    let common = &cli.common;
    match cli.command {
        Command::Synth {
            classes,
            per_class,
            separability,
        } => {
            let samples = generate_synthetic(classes, per_class, separability, cfg.seed)
                .stage(Stage::Load)?;
            let manifest = write_dataset(&samples, common.out_dir()?)?;
            log::info!("wrote {} images and {}", samples.len(), manifest.display());
        }
        Command::Split { manifest } => {
            let samples = load_dataset(&manifest).stage(Stage::Load)?;
            let base = manifest
                .parent()
                .unwrap_or(Path::new("."))
                .canonicalize()
                .context("resolving manifest directory")?;
            let paths: Vec<PathBuf> = samples.iter().map(|s| base.join(&s.id)).collect();
            let cleared = samples
                .into_iter()
                .map(|s| LabeledSample { split: None, ..s })
                .collect();
            let split = ensure_splits(cleared, &cfg)?;
            let entries: Vec<ManifestEntry> = split
                .iter()
                .zip(paths)
                .map(|(s, path)| ManifestEntry {
                    path,
                    class: s.class,
                    split: s.split,
                })
                .collect();
            let out = common.out_dir()?.join("manifest.tsv");
            write_manifest(&out, &entries)?;
            log::info!("wrote {}", out.display());
        }
        Command::Features { manifest } => {
            let samples = load_dataset(&manifest).stage(Stage::Load)?;
            let dir = common.out_dir()?;
            if cfg.classifier == ClassifierKind::Dbn {
                let windows = samples
                    .iter()
                    .map(|s| {
                        window_features(&s.image, cfg.binarization, cfg.window, cfg.zernike)
                            .map(|f| f.features)
                    })
                    .collect::<bayeswords::Result<Vec<_>>>()?;
                for (axis, name) in ["horizontal", "vertical"].iter().enumerate() {
                    let dump = format_feature_dump(
                        samples
                            .iter()
                            .zip(&windows)
                            .map(|(s, w)| (s.id.as_str(), &w[axis][..])),
                    );
                    write(dir.join(format!("features-{name}.csv")), &dump)?;
                }
            } else {
                let blocks = samples
                    .iter()
                    .map(|s| {
                        block_features(&s.image, cfg.binarization, cfg.blocks, cfg.zernike)
                            .map(|f| f.features)
                    })
                    .collect::<bayeswords::Result<Vec<_>>>()?;
                let dump = format_feature_dump(
                    samples
                        .iter()
                        .zip(&blocks)
                        .map(|(s, b)| (s.id.as_str(), &b[..])),
                );
                write(dir.join("features.csv"), &dump)?;
            }
        }
        Command::Codebook { manifest } => {
            let samples = load_split(&manifest, &cfg)?;
            let train = subset(&samples, Split::Train);
            let dir = common.out_dir()?;
            if cfg.classifier == ClassifierKind::Dbn {
                let [horizontal, vertical] =
                    fit_window_codebooks(&extract_window_features(&train, &cfg)?, &cfg)?;
                save_discretizer(&horizontal, &dir.join("horizontal.codebook"))
                    .stage(Stage::Persist)?;
                save_discretizer(&vertical, &dir.join("vertical.codebook"))
                    .stage(Stage::Persist)?;
            } else {
                let features = extract_block_features(&train, &cfg)?;
                for (b, d) in fit_block_discretizers(&features, &cfg)?.iter().enumerate() {
                    save_discretizer(d, &dir.join(format!("block-{}.codebook", b + 1)))
                        .stage(Stage::Persist)?;
                }
            }
            log::info!("codebooks written to {}", dir.display());
        }
        Command::TrainStatic { manifest } => {
            if cfg.classifier == ClassifierKind::Dbn {
                bail!("train-static needs --classifier nb, tan or fan; use train-dbn for coupled HMMs");
            }
            let samples = load_split(&manifest, &cfg)?;
            let model = train_static(&subset(&samples, Split::Train), class_count(&samples), &cfg)?;
            let dir = common.out_dir()?;
            save_model(&Model::Static(model), &dir.join("model.static"))?;
            save_config(dir, &cfg)?;
        }
        Command::TrainDbn { manifest } => {
            let cfg = Config {
                classifier: ClassifierKind::Dbn,
                ..cfg
            };
            let samples = load_split(&manifest, &cfg)?;
            let t = train_dbn(
                &subset(&samples, Split::Train),
                &subset(&samples, Split::Validation),
                class_count(&samples),
                &cfg,
            )?;
            let dir = common.out_dir()?;
            if let Some(curves) = &t.curves {
                write(dir.join("state-curves.txt"), &format_state_curves(curves))?;
            }
            save_model(&Model::Dbn(t.model), &dir.join("model.dbn"))?;
            save_config(dir, &cfg)?;
        }
        Command::Evaluate { model, manifest } => {
            let model = load_model(&model)?;
            let cfg = match &model {
                Model::Dbn(_) => Config {
                    classifier: ClassifierKind::Dbn,
                    ..cfg
                },
                Model::Static(m) => Config {
                    classifier: m.kind,
                    ..cfg
                },
            };
            let samples = load_split(&manifest, &cfg)?;
            let report = evaluate(&model, &subset(&samples, Split::Test))?;
            let doc = ReportDocument::new(&cfg, report, model.states());
            let dir = common.out_dir()?;
            write(dir.join("report.json"), &doc.to_json())?;
            let table = doc.to_table();
            write(dir.join("report.txt"), &table)?;
            print!("{table}");
        }
        Command::Predict { model, images } => {
            let model = load_model(&model)?;
            for path in images {
                let img = load_image(&path).stage(Stage::Load)?;
                let scores = model.scores(&img)?;
                let top: Vec<String> = ranking(&scores)
                    .into_iter()
                    .take(4)
                    .map(|c| format!("{}:{}", c + 1, scores[c]))
                    .collect();
                println!("{}\t{}", path.display(), top.join("\t"));
            }
        }
        Command::Report { report } => {
            let text = fs::read_to_string(&report)
                .with_context(|| format!("reading {}", report.display()))?;
            print!("{}", ReportDocument::from_json(&text)?.to_table());
        }
    }
    Ok(())
}
