//! Stratified data splits and recognition reports (Top-N rates, confusion
//! matrix, average recognition rate).

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::imaging::{LabeledSample, Split};

/// Largest N reported for Top-N rates.
pub const TOP_N: usize = 4;
pub const MIN_CLASS_SIZE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SplitConfig {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            train: 0.5,
            validation: 0.25,
            test: 0.25,
            seed: 0,
        }
    }
}

impl SplitConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let parts = [self.train, self.validation, self.test];
        if parts.iter().any(|f| !(0.0..=1.0).contains(f))
            || (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(Error::Parameter(
                "split fractions must lie in [0, 1] and sum to 1".into(),
            ));
        }
        Ok(())
    }

    /// `(train, validation, test)` sizes for a class of `n` samples.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let validation = (n as f64 * self.validation).round() as usize;
        let test = ((n as f64 * self.test).round() as usize).min(n - validation);
        (n - validation - test, validation, test)
    }
}

/// Per-sample split assignment for class labels `classes`, stratified by
/// class, shuffled with `cfg.seed` (one stream per class).
pub fn split_indices(classes: &[usize], cfg: &SplitConfig) -> Result<Vec<Split>> {
    cfg.validate()?;
    let n_classes = classes.iter().max().map_or(0, |&c| c + 1);
    let mut members = vec![Vec::new(); n_classes];
    for (i, &c) in classes.iter().enumerate() {
        members[c].push(i);
    }
    let mut out = vec![Split::Train; classes.len()];
    for (class, idx) in members.iter_mut().enumerate() {
        if idx.is_empty() {
            continue;
        }
        if idx.len() < MIN_CLASS_SIZE {
            return Err(Error::ClassTooSmall {
                class,
                count: idx.len(),
                required: MIN_CLASS_SIZE,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(class as u64);
        idx.shuffle(&mut rng);
        let (train, validation, _) = cfg.sizes(idx.len());
        for (k, &i) in idx.iter().enumerate() {
            out[i] = if k < train {
                Split::Train
            } else if k < train + validation {
                Split::Validation
            } else {
                Split::Test
            };
        }
    }
    Ok(out)
}

/// Assigns a split to every sample, overwriting any existing one.
pub fn split_dataset(
    mut samples: Vec<LabeledSample>,
    cfg: &SplitConfig,
) -> Result<Vec<LabeledSample>> {
    let classes: Vec<usize> = samples.iter().map(|s| s.class).collect();
    for (s, split) in samples.iter_mut().zip(split_indices(&classes, cfg)?) {
        s.split = Some(split);
    }
    Ok(samples)
}

/// Classes ordered by decreasing score, lower index first on ties.
pub fn ranking(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvaluationReport {
    pub classes: usize,
    /// Per class, percent of its samples whose true class is among the
    /// 1..=4 highest scores. Zero for classes without samples.
    pub per_class_top_n: Vec<[f64; TOP_N]>,
    /// The same over all samples.
    pub overall_top_n: [f64; TOP_N],
    /// Row = true class, column = predicted class, in percent of the row.
    pub confusion: Vec<Vec<f64>>,
    /// Mean of the per-class Top-1 rates over classes with samples.
    pub t_m: f64,
    pub counts: Vec<usize>,
}

impl EvaluationReport {
    pub fn top1(&self) -> f64 {
        self.overall_top_n[0]
    }
}

/// Builds the report from true classes and per-sample score vectors over
/// all `classes`.
pub fn compute_report(
    truth: &[usize],
    scores: &[Vec<f64>],
    classes: usize,
) -> Result<EvaluationReport> {
    if truth.len() != scores.len() {
        return Err(Error::LengthMismatch {
            left: truth.len(),
            right: scores.len(),
        });
    }
    let mut hits = vec![[0usize; TOP_N]; classes];
    let mut predicted = vec![vec![0usize; classes]; classes];
    let mut counts = vec![0usize; classes];
    for (&t, s) in truth.iter().zip(scores) {
        if t >= classes {
            return Err(Error::ClassOutOfRange { class: t, classes });
        }
        if s.len() != classes {
            return Err(Error::DimensionMismatch {
                expected: classes,
                found: s.len(),
            });
        }
        let order = ranking(s);
        let rank = order
            .iter()
            .position(|&c| c == t)
            .expect("true class is ranked");
        for (n, h) in hits[t].iter_mut().enumerate() {
            if rank <= n {
                *h += 1;
            }
        }
        predicted[t][order[0]] += 1;
        counts[t] += 1;
    }
    let percent = |part: usize, whole: usize| {
        if whole == 0 {
            0.0
        } else {
            100.0 * part as f64 / whole as f64
        }
    };
    let per_class_top_n: Vec<[f64; TOP_N]> = hits
        .iter()
        .zip(&counts)
        .map(|(h, &n)| core::array::from_fn(|k| percent(h[k], n)))
        .collect();
    let total = truth.len();
    let overall_top_n = core::array::from_fn(|k| percent(hits.iter().map(|h| h[k]).sum(), total));
    let confusion = predicted
        .iter()
        .zip(&counts)
        .map(|(row, &n)| row.iter().map(|&p| percent(p, n)).collect())
        .collect();
    let observed: Vec<f64> = per_class_top_n
        .iter()
        .zip(&counts)
        .filter(|(_, &n)| n > 0)
        .map(|(r, _)| r[0])
        .collect();
    Ok(EvaluationReport {
        classes,
        per_class_top_n,
        overall_top_n,
        confusion,
        t_m: average_recognition_rate(&observed),
        counts,
    })
}

/// `T_m = (Σ Tᵢ) / n` over per-class recognition rates.
pub fn average_recognition_rate(rates: &[f64]) -> f64 {
    if rates.is_empty() {
        0.0
    } else {
        rates.iter().sum::<f64>() / rates.len() as f64
    }
}

pub fn row_sums(matrix: &[Vec<f64>]) -> Vec<f64> {
    matrix.iter().map(|r| r.iter().sum()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_sizes() {
        let cfg = SplitConfig::default();
        assert_eq!(cfg.sizes(200), (100, 50, 50));
        assert_eq!(cfg.sizes(4), (2, 1, 1));
        assert_eq!(cfg.sizes(7), (3, 2, 2));
        let classes: Vec<usize> = (0..600).map(|i| i / 200).collect();
        let splits = split_indices(&classes, &SplitConfig::with_seed(3)).unwrap();
        for c in 0..3 {
            let of = |s: Split| {
                (0..600)
                    .filter(|&i| classes[i] == c && splits[i] == s)
                    .count()
            };
            assert_eq!(
                (of(Split::Train), of(Split::Validation), of(Split::Test)),
                (100, 50, 50)
            );
        }
    }

    #[test]
    fn split_is_seeded() {
        let classes: Vec<usize> = (0..40).map(|i| i % 4).collect();
        let a = split_indices(&classes, &SplitConfig::with_seed(1)).unwrap();
        assert_eq!(
            a,
            split_indices(&classes, &SplitConfig::with_seed(1)).unwrap()
        );
        assert_ne!(
            a,
            split_indices(&classes, &SplitConfig::with_seed(2)).unwrap()
        );
    }

    #[test]
    fn split_rejects_small_classes_and_bad_fractions() {
        assert_eq!(
            split_indices(&[0, 0, 0, 0, 1, 1, 1], &SplitConfig::default()),
            Err(Error::ClassTooSmall {
                class: 1,
                count: 3,
                required: 4
            })
        );
        let bad = SplitConfig {
            train: 0.6,
            ..SplitConfig::default()
        };
        assert!(split_indices(&[0; 8], &bad).is_err());
    }

    #[test]
    fn perfect_predictor() {
        let truth = [0, 1, 2, 1];
        let scores: Vec<Vec<f64>> = truth
            .iter()
            .map(|&t| (0..3).map(|c| if c == t { 1.0 } else { 0.0 }).collect())
            .collect();
        let r = compute_report(&truth, &scores, 3).unwrap();
        assert_eq!(r.overall_top_n, [100.0; 4]);
        assert_eq!(r.t_m, 100.0);
        for (c, row) in r.confusion.iter().enumerate() {
            for (p, &v) in row.iter().enumerate() {
                assert_eq!(v, if c == p { 100.0 } else { 0.0 });
            }
        }
        assert_eq!(r.counts, vec![1, 2, 1]);
    }

    #[test]
    fn top_n_and_ties() {
        // true class 2 ranked third; ties go to the lower index
        let r = compute_report(&[2], &[vec![0.5, 0.5, 0.5, 0.1]], 4).unwrap();
        assert_eq!(r.overall_top_n, [0.0, 0.0, 100.0, 100.0]);
        assert_eq!(r.confusion[2][0], 100.0);
        assert_eq!(ranking(&[0.1, 0.3, 0.3]), vec![1, 2, 0]);
    }

    #[test]
    fn report_errors() {
        assert!(matches!(
            compute_report(&[0, 1], &[vec![1.0, 0.0]], 2),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            compute_report(&[0], &[vec![1.0]], 2),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn average_rate() {
        assert_eq!(average_recognition_rate(&[80.0, 90.0, 100.0]), 90.0);
        assert_eq!(average_recognition_rate(&[]), 0.0);
        assert_eq!(row_sums(&[vec![1.0, 2.0], vec![3.0]]), vec![3.0, 3.0]);
    }
}
