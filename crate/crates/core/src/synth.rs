//! Seeded generator of synthetic word images.
//!
//! Each class owns a fixed layout of 2–4 elliptical ink blobs per block
//! region. A sample redraws that layout with Gaussian jitter on blob
//! position, size and orientation; the jitter scales with
//! `1 - separability`.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // inherent f64 methods shadow these when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dbn::CoupledHmm;
use crate::error::{Error, Result};
use crate::imaging::{GrayImage, LabeledSample};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub classes: usize,
    pub per_class: usize,
    /// In `[0, 1]`; 1 yields identical images within a class.
    pub separability: f64,
    pub seed: u64,
    /// Block regions per word, laid out right to left.
    pub blocks: usize,
    pub block_width: usize,
    pub height: usize,
}

impl SynthConfig {
    pub fn new(classes: usize, per_class: usize, separability: f64, seed: u64) -> Self {
        Self {
            classes,
            per_class,
            separability,
            seed,
            blocks: 3,
            block_width: 48,
            height: 48,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Blob {
    cx: f64,
    cy: f64,
    semi_major: f64,
    semi_minor: f64,
    angle: f64,
}

const BACKGROUND_LEVEL: f64 = 225.0;
const INK_LEVEL: f64 = 35.0;
const LEVEL_NOISE: f64 = 12.0;

fn class_layout(rng: &mut ChaCha8Rng, cfg: &SynthConfig) -> Vec<Vec<Blob>> {
    let (bw, h) = (cfg.block_width as f64, cfg.height as f64);
    (0..cfg.blocks)
        .map(|_| {
            let count = rng.random_range(2..=4);
            (0..count)
                .map(|_| {
                    let semi_major = rng.random_range(0.10..0.28) * bw.min(h);
                    let semi_minor = semi_major * rng.random_range(0.25..0.9);
                    Blob {
                        cx: rng.random_range(0.25..0.75) * bw,
                        cy: rng.random_range(0.2..0.8) * h,
                        semi_major,
                        semi_minor,
                        angle: rng.random_range(0.0..PI),
                    }
                })
                .collect()
        })
        .collect()
}

fn jitter(blob: &Blob, noise: f64, size: f64, rng: &mut ChaCha8Rng) -> Blob {
    if noise == 0.0 {
        return *blob;
    }
    // Normal::new only fails on a non-finite or negative deviation
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let scale = (noise * 0.4 * unit.sample(rng)).exp();
    Blob {
        cx: blob.cx + noise * 0.25 * size * unit.sample(rng),
        cy: blob.cy + noise * 0.25 * size * unit.sample(rng),
        semi_major: (blob.semi_major * scale).max(1.0),
        semi_minor: (blob.semi_minor * scale).max(1.0),
        angle: blob.angle + noise * PI * 0.5 * unit.sample(rng),
    }
}

fn render(blocks: &[Vec<Blob>], cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Result<GrayImage> {
    let width = cfg.blocks * cfg.block_width;
    let mut levels = Vec::with_capacity(width * cfg.height);
    for _ in 0..width * cfg.height {
        levels.push(BACKGROUND_LEVEL + rng.random_range(-LEVEL_NOISE..LEVEL_NOISE));
    }
    for (b, blobs) in blocks.iter().enumerate() {
        // block 0 is the rightmost region
        let offset = (width - (b + 1) * cfg.block_width) as f64;
        for blob in blobs {
            let (s, c) = (blob.angle.sin(), blob.angle.cos());
            let reach = blob.semi_major.ceil() as isize + 1;
            let (cx, cy) = (blob.cx + offset, blob.cy);
            let (x0, y0) = (cx.round() as isize, cy.round() as isize);
            for y in (y0 - reach).max(0)..(y0 + reach + 1).min(cfg.height as isize) {
                for x in (x0 - reach).max(0)..(x0 + reach + 1).min(width as isize) {
                    let dx = x as f64 - cx;
                    let dy = y as f64 - cy;
                    let u = (c * dx + s * dy) / blob.semi_major;
                    let v = (-s * dx + c * dy) / blob.semi_minor;
                    if u * u + v * v <= 1.0 {
                        levels[y as usize * width + x as usize] = INK_LEVEL;
                    }
                }
            }
        }
    }
    let pixels = levels
        .into_iter()
        .map(|l| {
            let l = if l == INK_LEVEL {
                l + rng.random_range(-LEVEL_NOISE..LEVEL_NOISE)
            } else {
                l
            };
            l.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    GrayImage::new(width, cfg.height, pixels)
}

/// Generates `classes × per_class` labeled images, deterministic in `seed`.
/// Samples are grouped by class; splits are left unassigned.
pub fn generate_synthetic(
    classes: usize,
    per_class: usize,
    separability: f64,
    seed: u64,
) -> Result<Vec<LabeledSample>> {
    generate_with(&SynthConfig::new(classes, per_class, separability, seed))
}

pub fn generate_with(cfg: &SynthConfig) -> Result<Vec<LabeledSample>> {
    if cfg.classes < 2 {
        return Err(Error::Parameter(
            "synthetic data needs at least two classes".into(),
        ));
    }
    if !(0.0..=1.0).contains(&cfg.separability) {
        return Err(Error::Parameter(format!(
            "separability {} outside [0, 1]",
            cfg.separability
        )));
    }
    if cfg.blocks == 0 || cfg.block_width < 8 || cfg.height < 8 {
        return Err(Error::Parameter(
            "synthetic image geometry too small".into(),
        ));
    }
    let noise = 1.0 - cfg.separability;
    let size = cfg.block_width.min(cfg.height) as f64;
    let mut samples = Vec::with_capacity(cfg.classes * cfg.per_class);
    for class in 0..cfg.classes {
        let mut layout_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        layout_rng.set_stream(2 * class as u64);
        let layout = class_layout(&mut layout_rng, cfg);

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(2 * class as u64 + 1);
        for i in 0..cfg.per_class {
            let blocks: Vec<Vec<Blob>> = layout
                .iter()
                .map(|blobs| {
                    blobs
                        .iter()
                        .map(|b| jitter(b, noise, size, &mut rng))
                        .collect()
                })
                .collect();
            samples.push(LabeledSample {
                id: format!("c{:02}_{:04}", class + 1, i),
                image: render(&blocks, cfg, &mut rng)?,
                class,
                split: None,
            });
        }
    }
    Ok(samples)
}

fn peaked_row(len: usize, hot: usize, peak: f64) -> impl Iterator<Item = f64> {
    let (peak, rest) = if len == 1 {
        (1.0, 0.0)
    } else {
        (peak, (1.0 - peak) / (len - 1) as f64)
    };
    (0..len).map(move |k| if k == hot { peak } else { rest })
}

/// Coupled HMMs (`Q1 = Q2 = states`) for `classes` classes that share their
/// emissions and differ only in their dynamics. State `j` of either chain
/// emits symbol `j` with probability `emission_peak`; every transition row
/// puts `transition_peak` on a random target state. Initial distributions
/// are uniform.
pub fn coupled_model_family(
    classes: usize,
    states: usize,
    symbols: usize,
    transition_peak: f64,
    emission_peak: f64,
    seed: u64,
) -> Result<Vec<CoupledHmm>> {
    if states == 0 || symbols < states {
        return Err(Error::Parameter(
            "need at least one state and no fewer symbols than states".into(),
        ));
    }
    if !(0.0..=1.0).contains(&transition_peak) || !(0.0..=1.0).contains(&emission_peak) {
        return Err(Error::Parameter(
            "peak probabilities must lie in [0, 1]".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let emit: Vec<f64> = (0..states)
        .flat_map(|j| peaked_row(symbols, j, emission_peak))
        .collect();
    let pi = alloc::vec![1.0 / states as f64; states];
    (0..classes)
        .map(|_| {
            let mut trans = [Vec::new(), Vec::new()];
            for t in &mut trans {
                for _ in 0..states * states {
                    t.extend(peaked_row(
                        states,
                        rng.random_range(0..states),
                        transition_peak,
                    ));
                }
            }
            CoupledHmm::new(
                [states, states],
                [symbols, symbols],
                [pi.clone(), pi.clone()],
                trans,
                [emit.clone(), emit.clone()],
            )
        })
        .collect()
}
