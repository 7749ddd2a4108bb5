//! Per-image feature extraction for both classifier families, and the
//! feature dump format.

use std::fmt::Write as _;

use bayeswords_core::imaging::{
    binarize, sliding_windows, split_blocks, Axis, Binarization, GrayImage,
};
use bayeswords_core::moments::{FeatureExtractor, FeatureVector, ZernikeIndex};

use crate::error::{Result, Stage, StageExt};

/// Feature vectors of one image plus the number of blank regions that were
/// replaced by zero vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Extracted<T> {
    pub features: T,
    pub blank: usize,
}

fn extract_all(
    extractor: &FeatureExtractor,
    parts: &[GrayImage],
    blank: &mut usize,
) -> Result<Vec<FeatureVector>> {
    parts
        .iter()
        .map(|p| {
            let (v, was_blank) = extractor.extract_or_zero(p)?;
            *blank += usize::from(was_blank);
            Ok(v)
        })
        .collect()
}

/// One feature vector per block, right to left.
pub fn block_features(
    img: &GrayImage,
    binarization: Binarization,
    blocks: usize,
    zernike: [ZernikeIndex; 5],
) -> Result<Extracted<Vec<FeatureVector>>> {
    let bin = binarize(img, binarization).stage(Stage::Binarize)?;
    let set = split_blocks(&bin, blocks).stage(Stage::Features)?;
    let extractor = FeatureExtractor::new(zernike).stage(Stage::Features)?;
    let mut blank = 0;
    let features = extract_all(&extractor, &set.blocks, &mut blank).stage(Stage::Features)?;
    Ok(Extracted { features, blank })
}

/// Horizontal-scan and vertical-scan window feature sequences.
pub fn window_features(
    img: &GrayImage,
    binarization: Binarization,
    window: usize,
    zernike: [ZernikeIndex; 5],
) -> Result<Extracted<[Vec<FeatureVector>; 2]>> {
    let bin = binarize(img, binarization).stage(Stage::Binarize)?;
    let extractor = FeatureExtractor::new(zernike).stage(Stage::Features)?;
    let mut blank = 0;
    let mut scan = |axis| -> Result<Vec<FeatureVector>> {
        let seq = sliding_windows(&bin, axis, window).stage(Stage::Features)?;
        extract_all(&extractor, &seq.windows, &mut blank).stage(Stage::Features)
    };
    let features = [scan(Axis::Horizontal)?, scan(Axis::Vertical)?];
    Ok(Extracted { features, blank })
}

/// `sample_id,index,v1,…,v12` per vector with 9 significant digits.
pub fn format_feature_dump<'a>(
    records: impl IntoIterator<Item = (&'a str, &'a [FeatureVector])>,
) -> String {
    let mut out = String::new();
    for (id, vectors) in records {
        for (i, v) in vectors.iter().enumerate() {
            let _ = write!(out, "{id},{i}");
            for x in v.as_slice() {
                let _ = write!(out, ",{x:.8e}");
            }
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use bayeswords_core::moments::DEFAULT_ZERNIKE_INDICES;

    fn word() -> GrayImage {
        GrayImage::from_fn(30, 20, |x, y| {
            if (4..9).contains(&y) && x < 20 {
                20
            } else {
                230
            }
        })
        .unwrap()
    }

    #[test]
    fn blank_blocks_become_zero_vectors() {
        let out = block_features(&word(), Binarization::Otsu, 3, DEFAULT_ZERNIKE_INDICES).unwrap();
        // the rightmost strip (columns 20..30) has no ink
        assert_eq!(out.blank, 1);
        assert_eq!(out.features[0], FeatureVector::ZERO);
        assert_ne!(out.features[1], FeatureVector::ZERO);
    }

    #[test]
    fn windows_follow_both_axes() {
        let out = window_features(&word(), Binarization::Otsu, 4, DEFAULT_ZERNIKE_INDICES).unwrap();
        assert_eq!(out.features[0].len(), 8);
        assert_eq!(out.features[1].len(), 5);
    }

    #[test]
    fn dump_format() {
        let mut v = FeatureVector::ZERO;
        v.0[0] = 0.125;
        v.0[11] = -1.0 / 3.0;
        let text = format_feature_dump([("s1", &[v][..])]);
        assert!(text.starts_with("s1,0,1.25000000e-1,"), "{text}");
        assert!(text.trim_end().ends_with(",-3.33333333e-1"));
        assert_eq!(text.trim_end().split(',').count(), 14);
    }

    #[test]
    fn errors_carry_the_stage() {
        let err =
            block_features(&word(), Binarization::Otsu, 31, DEFAULT_ZERNIKE_INDICES).unwrap_err();
        assert!(err.to_string().starts_with("[features]"), "{err}");
    }
}
