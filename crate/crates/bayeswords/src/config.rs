//! Experiment configuration: a flat `key = value` text file. Later
//! assignments (including command-line overrides) replace earlier ones.

use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use bayeswords_core::imaging::Binarization;
use bayeswords_core::moments::{ZernikeIndex, DEFAULT_ZERNIKE_INDICES};
use bayeswords_core::quantize::{Discretization, DEFAULT_K};
use serde::{Deserialize, Serialize};

use crate::error::{io_error, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Nb,
    Tan,
    Fan,
    Dbn,
}

impl ClassifierKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Nb => "nb",
            ClassifierKind::Tan => "tan",
            ClassifierKind::Fan => "fan",
            ClassifierKind::Dbn => "dbn",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "nb" => Ok(ClassifierKind::Nb),
            "tan" => Ok(ClassifierKind::Tan),
            "fan" => Ok(ClassifierKind::Fan),
            "dbn" => Ok(ClassifierKind::Dbn),
            _ => Err(format!(
                "unknown classifier `{s}` (expected nb, tan, fan or dbn)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub seed: u64,
    pub classifier: ClassifierKind,
    pub binarization: Binarization,
    pub zernike: [ZernikeIndex; 5],
    pub split_fractions: [f64; 3],
    // block classifiers
    pub blocks: usize,
    pub codebook_k: usize,
    pub discretization: Discretization,
    pub pca_components: Option<usize>,
    /// TAN root attribute; `None` draws it from the seed.
    pub tan_root: Option<usize>,
    pub fan_significance: Option<f64>,
    // coupled HMM
    pub window: usize,
    pub window_codebook_k: usize,
    pub states: usize,
    pub q_range: Option<(usize, usize)>,
    pub em_max_iters: usize,
    pub em_tol: f64,
    pub restarts: usize,
    pub em_floor: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 0,
            classifier: ClassifierKind::Fan,
            binarization: Binarization::Otsu,
            zernike: DEFAULT_ZERNIKE_INDICES,
            split_fractions: [0.5, 0.25, 0.25],
            blocks: 3,
            codebook_k: DEFAULT_K,
            discretization: Discretization::PerAttribute,
            pca_components: None,
            tan_root: None,
            fan_significance: Some(0.05),
            window: 8,
            window_codebook_k: 24,
            states: 4,
            q_range: None,
            em_max_iters: 100,
            em_tol: 1e-4,
            restarts: 3,
            em_floor: 1e-6,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("invalid value `{value}` for `{key}`"))
}

fn optional<T: FromStr>(key: &str, value: &str) -> std::result::Result<Option<T>, String> {
    if value == "none" {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

/// Parses `A..B` (inclusive).
pub fn parse_range(value: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = value
        .split_once("..")
        .ok_or_else(|| format!("range `{value}` is not of the form A..B"))?;
    let (a, b): (usize, usize) = (parse("range", a.trim())?, parse("range", b.trim())?);
    if a == 0 || a > b {
        return Err(format!("range `{value}` must satisfy 1 <= A <= B"));
    }
    Ok((a, b))
}

fn parse_zernike(value: &str) -> std::result::Result<[ZernikeIndex; 5], String> {
    let pairs: Vec<ZernikeIndex> = value
        .split(',')
        .map(|p| {
            let (n, m) = p
                .trim()
                .split_once(':')
                .ok_or_else(|| format!("zernike index `{p}` is not n:m"))?;
            Ok((parse("zernike", n)?, parse("zernike", m)?))
        })
        .collect::<std::result::Result<_, String>>()?;
    pairs
        .try_into()
        .map_err(|_| "zernike needs exactly five n:m indices".to_string())
}

impl Config {
    /// Applies one assignment.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let value = value.trim();
        match key.trim() {
            "seed" => self.seed = parse(key, value)?,
            "classifier" => self.classifier = value.parse()?,
            "binarization" => {
                self.binarization = match value.strip_prefix("fixed:") {
                    Some(t) => Binarization::Fixed(parse(key, t)?),
                    None if value == "otsu" => Binarization::Otsu,
                    None => {
                        return Err(format!(
                            "binarization `{value}` is neither otsu nor fixed:T"
                        ))
                    }
                }
            }
            "zernike" => self.zernike = parse_zernike(value)?,
            "split" => {
                let parts: Vec<f64> = value
                    .split(',')
                    .map(|p| parse(key, p.trim()))
                    .collect::<std::result::Result<_, _>>()?;
                self.split_fractions = parts.try_into().map_err(|_| {
                    "split needs three fractions: train,validation,test".to_string()
                })?;
            }
            "blocks" => self.blocks = parse(key, value)?,
            "codebook_k" => self.codebook_k = parse(key, value)?,
            "discretization" => {
                self.discretization = match value {
                    "per-attribute" => Discretization::PerAttribute,
                    "per-vector" => Discretization::PerVector,
                    _ => {
                        return Err(format!(
                            "discretization `{value}` is neither per-attribute nor per-vector"
                        ))
                    }
                }
            }
            "pca_components" => self.pca_components = optional(key, value)?,
            "tan_root" => {
                self.tan_root = if value == "random" {
                    None
                } else {
                    Some(parse(key, value)?)
                }
            }
            "fan_significance" => self.fan_significance = optional(key, value)?,
            "window" => self.window = parse(key, value)?,
            "window_codebook_k" => self.window_codebook_k = parse(key, value)?,
            "states" => self.states = parse(key, value)?,
            "q_range" => {
                self.q_range = if value == "none" {
                    None
                } else {
                    Some(parse_range(value)?)
                }
            }
            "em_max_iters" => self.em_max_iters = parse(key, value)?,
            "em_tol" => self.em_tol = parse(key, value)?,
            "restarts" => self.restarts = parse(key, value)?,
            "em_floor" => self.em_floor = parse(key, value)?,
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    /// Applies every `key = value` line of `text`; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Config {
                origin: format!("{origin}:{}", i + 1),
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected key = value".into()))?;
            self.set(key, value).map_err(err)?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_error(path))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text, &path.display().to_string())?;
        Ok(cfg)
    }

    /// Renders every key; parsing the result reproduces `self`.
    pub fn to_text(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "none".into());
        let binarization = match self.binarization {
            Binarization::Otsu => "otsu".to_string(),
            Binarization::Fixed(t) => format!("fixed:{t}"),
        };
        let zernike: Vec<String> = self
            .zernike
            .iter()
            .map(|(n, m)| format!("{n}:{m}"))
            .collect();
        let discretization = match self.discretization {
            Discretization::PerAttribute => "per-attribute",
            Discretization::PerVector => "per-vector",
        };
        let [tr, va, te] = self.split_fractions;
        let mut out = String::new();
        let lines = [
            ("seed", self.seed.to_string()),
            ("classifier", self.classifier.to_string()),
            ("binarization", binarization),
            ("zernike", zernike.join(",")),
            ("split", format!("{tr},{va},{te}")),
            ("blocks", self.blocks.to_string()),
            ("codebook_k", self.codebook_k.to_string()),
            ("discretization", discretization.into()),
            (
                "pca_components",
                opt(self.pca_components.map(|v| v.to_string())),
            ),
            (
                "tan_root",
                self.tan_root.map_or("random".into(), |v| v.to_string()),
            ),
            (
                "fan_significance",
                opt(self.fan_significance.map(|v| v.to_string())),
            ),
            ("window", self.window.to_string()),
            ("window_codebook_k", self.window_codebook_k.to_string()),
            ("states", self.states.to_string()),
            (
                "q_range",
                opt(self.q_range.map(|(a, b)| format!("{a}..{b}"))),
            ),
            ("em_max_iters", self.em_max_iters.to_string()),
            ("em_tol", self.em_tol.to_string()),
            ("restarts", self.restarts.to_string()),
            ("em_floor", self.em_floor.to_string()),
        ];
        for (k, v) in lines {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut cfg = Config::default();
        cfg.apply_text(
            "seed = 9\nclassifier = tan # comment\nq_range = 2..6\npca_components = 6\nbinarization = fixed:100\nzernike = 1:1,2:0,2:2,3:1,4:2\n",
            "t",
        )
        .unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.classifier, ClassifierKind::Tan);
        assert_eq!(cfg.q_range, Some((2, 6)));
        assert_eq!(cfg.zernike[4], (4, 2));
        let mut again = Config::default();
        again.apply_text(&cfg.to_text(), "t").unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn errors_name_the_line() {
        let mut cfg = Config::default();
        let err = cfg
            .apply_text("seed = 1\nblocks = many\n", "exp.cfg")
            .unwrap_err();
        assert!(err.to_string().contains("exp.cfg:2"), "{err}");
        assert!(cfg.apply_text("colour = red", "x").is_err());
        assert!(cfg.apply_text("q_range = 5..2", "x").is_err());
    }
}
