//! End-to-end training and evaluation for both classifier families.

use bayeswords_core::dbn::{
    classify, select_states_from, train_class_model, ClassModelBank, ObservationPair, StatePoint,
    TrainConfig,
};
use bayeswords_core::eval::{compute_report, split_dataset, EvaluationReport, SplitConfig};
use bayeswords_core::imaging::{Binarization, GrayImage, LabeledSample, Split};
use bayeswords_core::moments::{FeatureVector, ZernikeIndex};
use bayeswords_core::quantize::{Discretization, Discretizer};
use bayeswords_core::staticbn::{
    build_fan_with, build_nb, build_tan, image_posterior, DiscreteBnClassifier, DiscreteDataset,
    DiscreteSample, FanConfig, TanRoot,
};
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ClassifierKind, Config};
use crate::error::{Error, Result, Stage, StageExt};
use crate::features::{block_features, window_features};

/// Per-block discretizers and NB/TAN/FAN classifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticModel {
    pub kind: ClassifierKind,
    pub classes: usize,
    pub blocks: usize,
    pub binarization: Binarization,
    pub zernike: [ZernikeIndex; 5],
    /// One per block position, right to left.
    pub discretizers: Vec<Discretizer>,
    pub classifiers: Vec<DiscreteBnClassifier>,
}

/// Window codebooks plus one coupled HMM per class.
#[derive(Debug, Clone, PartialEq)]
pub struct DbnModel {
    pub classes: usize,
    pub window: usize,
    pub binarization: Binarization,
    pub zernike: [ZernikeIndex; 5],
    pub horizontal: Discretizer,
    pub vertical: Discretizer,
    pub bank: ClassModelBank,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Static(StaticModel),
    Dbn(DbnModel),
}

impl StaticModel {
    fn posterior(&self, blocks: &[FeatureVector]) -> Result<Vec<f64>> {
        let posteriors = blocks
            .iter()
            .zip(self.discretizers.iter().zip(&self.classifiers))
            .map(|(v, (d, c))| c.block_posterior(&d.encode(v.as_slice())?))
            .collect::<bayeswords_core::Result<Vec<_>>>()
            .stage(Stage::Evaluate)?;
        image_posterior(&posteriors).stage(Stage::Evaluate)
    }

    /// Word posterior over classes.
    pub fn scores(&self, img: &GrayImage) -> Result<Vec<f64>> {
        let f = block_features(img, self.binarization, self.blocks, self.zernike)?;
        self.posterior(&f.features)
    }
}

fn encode_sequence(d: &Discretizer, seq: &[FeatureVector]) -> bayeswords_core::Result<Vec<usize>> {
    seq.iter()
        .map(|v| d.encode(v.as_slice()).map(|l| l[0]))
        .collect()
}

impl DbnModel {
    fn observation(&self, windows: &[Vec<FeatureVector>; 2]) -> Result<ObservationPair> {
        let y1 = encode_sequence(&self.horizontal, &windows[0]).stage(Stage::Quantize)?;
        let y2 = encode_sequence(&self.vertical, &windows[1]).stage(Stage::Quantize)?;
        ObservationPair::new(y1, y2).stage(Stage::Quantize)
    }

    pub fn observations(&self, img: &GrayImage) -> Result<ObservationPair> {
        let f = window_features(img, self.binarization, self.window, self.zernike)?;
        self.observation(&f.features)
    }

    /// Per-class log-likelihoods.
    pub fn scores(&self, img: &GrayImage) -> Result<Vec<f64>> {
        let obs = self.observations(img)?;
        Ok(classify(&self.bank, &obs).stage(Stage::Evaluate)?.1)
    }
}

impl Model {
    /// `[Q1, Q2]` per class for coupled HMMs.
    pub fn states(&self) -> Option<Vec<[usize; 2]>> {
        match self {
            Model::Static(_) => None,
            Model::Dbn(m) => Some(m.bank.q_per_class.clone()),
        }
    }

    pub fn classes(&self) -> usize {
        match self {
            Model::Static(m) => m.classes,
            Model::Dbn(m) => m.classes,
        }
    }

    pub fn scores(&self, img: &GrayImage) -> Result<Vec<f64>> {
        match self {
            Model::Static(m) => m.scores(img),
            Model::Dbn(m) => m.scores(img),
        }
    }
}

/// Class count implied by the largest class id.
pub fn class_count(samples: &[LabeledSample]) -> usize {
    samples.iter().map(|s| s.class + 1).max().unwrap_or(0)
}

/// Returns the samples with splits assigned: unchanged when every sample
/// already has one, otherwise a fresh stratified split of all of them.
pub fn ensure_splits(samples: Vec<LabeledSample>, cfg: &Config) -> Result<Vec<LabeledSample>> {
    if samples.iter().all(|s| s.split.is_some()) {
        return Ok(samples);
    }
    let [train, validation, test] = cfg.split_fractions;
    split_dataset(
        samples,
        &SplitConfig {
            train,
            validation,
            test,
            seed: cfg.seed,
        },
    )
    .stage(Stage::Split)
}

pub fn subset(samples: &[LabeledSample], split: Split) -> Vec<&LabeledSample> {
    samples.iter().filter(|s| s.split == Some(split)).collect()
}

fn warn_blank(id: &str, blank: usize) {
    if blank > 0 {
        warn!("{id}: {blank} blank region(s) replaced by zero feature vectors");
    }
}

/// Block feature vectors of every sample, in input order.
pub fn extract_block_features(
    samples: &[&LabeledSample],
    cfg: &Config,
) -> Result<Vec<Vec<FeatureVector>>> {
    samples
        .par_iter()
        .map(|s| {
            let f = block_features(&s.image, cfg.binarization, cfg.blocks, cfg.zernike)?;
            warn_blank(&s.id, f.blank);
            Ok(f.features)
        })
        .collect()
}

pub fn extract_window_features(
    samples: &[&LabeledSample],
    cfg: &Config,
) -> Result<Vec<[Vec<FeatureVector>; 2]>> {
    samples
        .par_iter()
        .map(|s| {
            let f = window_features(&s.image, cfg.binarization, cfg.window, cfg.zernike)?;
            warn_blank(&s.id, f.blank);
            Ok(f.features)
        })
        .collect()
}

/// Fits one discretizer per block position on training features.
pub fn fit_block_discretizers(
    train: &[Vec<FeatureVector>],
    cfg: &Config,
) -> Result<Vec<Discretizer>> {
    (0..cfg.blocks)
        .into_par_iter()
        .map(|b| {
            let data: Vec<Vec<f64>> = train.iter().map(|f| f[b].0.to_vec()).collect();
            Discretizer::fit(
                &data,
                cfg.discretization,
                cfg.codebook_k,
                cfg.pca_components,
                cfg.seed.wrapping_add(b as u64),
            )
            .stage(Stage::Quantize)
        })
        .collect()
}

/// Trains the NB/TAN/FAN classifier selected by `cfg.classifier` on the
/// given training samples.
pub fn train_static(train: &[&LabeledSample], classes: usize, cfg: &Config) -> Result<StaticModel> {
    let kind = cfg.classifier;
    if kind == ClassifierKind::Dbn {
        return Err(Error::Config {
            origin: "classifier".into(),
            message: "dbn is not a block classifier".into(),
        });
    }
    let features = extract_block_features(train, cfg)?;
    let discretizers = fit_block_discretizers(&features, cfg)?;
    let classifiers = (0..cfg.blocks)
        .into_par_iter()
        .map(|b| {
            let d = &discretizers[b];
            let samples = train
                .iter()
                .zip(&features)
                .map(|(s, f)| {
                    Ok(DiscreteSample {
                        attributes: d.encode(f[b].as_slice())?,
                        class: s.class,
                    })
                })
                .collect::<bayeswords_core::Result<Vec<_>>>()
                .stage(Stage::Quantize)?;
            let data = DiscreteDataset::new(samples, d.cardinalities(), classes)
                .stage(Stage::Structure)?;
            match kind {
                ClassifierKind::Nb => build_nb(&data),
                ClassifierKind::Tan => {
                    let root = cfg.tan_root.map_or(
                        TanRoot::Random(cfg.seed.wrapping_add(b as u64)),
                        TanRoot::Attribute,
                    );
                    build_tan(&data, root)
                }
                _ => build_fan_with(
                    &data,
                    &FanConfig {
                        significance: cfg.fan_significance,
                    },
                ),
            }
            .stage(Stage::Structure)
        })
        .collect::<Result<Vec<_>>>()?;
    for (b, c) in classifiers.iter().enumerate() {
        info!(
            "block {b}: {} augmenting edge(s)",
            c.structure.edges().len()
        );
    }
    Ok(StaticModel {
        kind,
        classes,
        blocks: cfg.blocks,
        binarization: cfg.binarization,
        zernike: cfg.zernike,
        discretizers,
        classifiers,
    })
}

/// Outcome of coupled-HMM training.
#[derive(Debug, Clone, PartialEq)]
pub struct DbnTraining {
    pub model: DbnModel,
    /// Rate-vs-Q curve per class when a state range was searched.
    pub curves: Option<Vec<Vec<StatePoint>>>,
}

fn train_config(cfg: &Config, class: usize) -> TrainConfig {
    TrainConfig {
        seed: cfg.seed.wrapping_add(class as u64),
        max_iters: cfg.em_max_iters,
        tol: cfg.em_tol,
        restarts: cfg.restarts,
        floor: cfg.em_floor,
    }
}

fn fit_window_codebook(
    train: &[[Vec<FeatureVector>; 2]],
    axis: usize,
    cfg: &Config,
) -> Result<Discretizer> {
    let data: Vec<Vec<f64>> = train
        .iter()
        .flat_map(|w| w[axis].iter().map(|v| v.0.to_vec()))
        .collect();
    let pca = Some(
        cfg.pca_components
            .unwrap_or(bayeswords_core::moments::FEATURE_LEN),
    );
    Discretizer::fit(
        &data,
        Discretization::PerVector,
        cfg.window_codebook_k,
        pca,
        cfg.seed.wrapping_add(axis as u64),
    )
    .stage(Stage::Quantize)
}

/// Horizontal and vertical window codebooks: whole-vector k-means after
/// standardization and PCA.
pub fn fit_window_codebooks(
    train: &[[Vec<FeatureVector>; 2]],
    cfg: &Config,
) -> Result<[Discretizer; 2]> {
    Ok([
        fit_window_codebook(train, 0, cfg)?,
        fit_window_codebook(train, 1, cfg)?,
    ])
}

/// Trains window codebooks and one coupled HMM per class. With
/// `cfg.q_range` set, the state count of each class is chosen on the
/// validation samples; otherwise `Q1 = Q2 = cfg.states`.
pub fn train_dbn(
    train: &[&LabeledSample],
    validation: &[&LabeledSample],
    classes: usize,
    cfg: &Config,
) -> Result<DbnTraining> {
    let train_windows = extract_window_features(train, cfg)?;
    let [horizontal, vertical] = fit_window_codebooks(&train_windows, cfg)?;
    let symbols = [horizontal.codebooks[0].k(), vertical.codebooks[0].k()];
    let mut model = DbnModel {
        classes,
        window: cfg.window,
        binarization: cfg.binarization,
        zernike: cfg.zernike,
        horizontal,
        vertical,
        bank: ClassModelBank {
            models: Vec::new(),
            q_per_class: Vec::new(),
        },
    };
    let by_class = |samples: &[&LabeledSample],
                    windows: &[[Vec<FeatureVector>; 2]]|
     -> Result<Vec<Vec<ObservationPair>>> {
        let mut out = vec![Vec::new(); classes];
        for (s, w) in samples.iter().zip(windows) {
            out[s.class].push(model.observation(w)?);
        }
        Ok(out)
    };
    let train_obs = by_class(train, &train_windows)?;
    let qs: Vec<usize> = match cfg.q_range {
        Some((a, b)) => (a..=b).collect(),
        None => vec![cfg.states],
    };
    let jobs: Vec<(usize, usize)> = qs
        .iter()
        .flat_map(|&q| (0..classes).map(move |c| (q, c)))
        .collect();
    let mut trained = jobs
        .par_iter()
        .map(|&(q, c)| {
            let t = train_class_model(&train_obs[c], [q, q], symbols, &train_config(cfg, c))?;
            info!(
                "class {c}, Q = {q}: log-likelihood {:.3} after {} iteration(s)",
                t.log_likelihood, t.iterations
            );
            Ok(t.model)
        })
        .collect::<bayeswords_core::Result<Vec<_>>>()
        .stage(Stage::Train)?;
    let mut per_q = Vec::with_capacity(qs.len());
    for _ in &qs {
        let rest = trained.split_off(classes);
        per_q.push(std::mem::replace(&mut trained, rest));
    }
    let curves = if cfg.q_range.is_some() {
        let validation_windows = extract_window_features(validation, cfg)?;
        let validation_obs = by_class(validation, &validation_windows)?;
        let selection = select_states_from(&qs, per_q, &validation_obs).stage(Stage::Train)?;
        model.bank = selection.bank;
        Some(selection.curves)
    } else {
        model.bank = ClassModelBank::new(per_q.remove(0)).stage(Stage::Train)?;
        None
    };
    Ok(DbnTraining { model, curves })
}

/// Scores every sample and summarizes the ranking quality.
pub fn evaluate(model: &Model, samples: &[&LabeledSample]) -> Result<EvaluationReport> {
    let scores = samples
        .par_iter()
        .map(|s| model.scores(&s.image))
        .collect::<Result<Vec<_>>>()?;
    let truth: Vec<usize> = samples.iter().map(|s| s.class).collect();
    compute_report(&truth, &scores, model.classes()).stage(Stage::Evaluate)
}

/// Trained model, its test-split report and, for a state search, the
/// rate-vs-Q curves.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub model: Model,
    pub report: EvaluationReport,
    pub curves: Option<Vec<Vec<StatePoint>>>,
}

struct Prepared {
    samples: Vec<LabeledSample>,
    classes: usize,
}

impl Prepared {
    fn new(samples: Vec<LabeledSample>, cfg: &Config) -> Result<Self> {
        let samples = ensure_splits(samples, cfg)?;
        let classes = class_count(&samples);
        info!(
            "{classes} classes: {} train, {} validation, {} test",
            subset(&samples, Split::Train).len(),
            subset(&samples, Split::Validation).len(),
            subset(&samples, Split::Test).len()
        );
        Ok(Self { samples, classes })
    }

    fn split(&self, split: Split) -> Vec<&LabeledSample> {
        subset(&self.samples, split)
    }
}

/// Splits (when needed), trains the NB/TAN/FAN classifier named by
/// `cfg.classifier` on the training split and reports on the test split.
pub fn run_static_pipeline(samples: Vec<LabeledSample>, cfg: &Config) -> Result<Outcome> {
    let data = Prepared::new(samples, cfg)?;
    let model = Model::Static(train_static(&data.split(Split::Train), data.classes, cfg)?);
    let report = evaluate(&model, &data.split(Split::Test))?;
    Ok(Outcome {
        model,
        report,
        curves: None,
    })
}

/// Splits (when needed), trains coupled HMMs on the training split, selects
/// state counts on the validation split when `cfg.q_range` is set and
/// reports on the test split.
pub fn run_dbn_pipeline(samples: Vec<LabeledSample>, cfg: &Config) -> Result<Outcome> {
    let data = Prepared::new(samples, cfg)?;
    let t = train_dbn(
        &data.split(Split::Train),
        &data.split(Split::Validation),
        data.classes,
        cfg,
    )?;
    let model = Model::Dbn(t.model);
    let report = evaluate(&model, &data.split(Split::Test))?;
    Ok(Outcome {
        model,
        report,
        curves: t.curves,
    })
}

/// Runs the pipeline of `cfg.classifier`.
pub fn run(samples: Vec<LabeledSample>, cfg: &Config) -> Result<Outcome> {
    match cfg.classifier {
        ClassifierKind::Dbn => run_dbn_pipeline(samples, cfg),
        _ => run_static_pipeline(samples, cfg),
    }
}
