//! Grayscale images, binarization and the two geometric decompositions used
//! by the classifiers: fixed blocks (static path) and sliding windows
//! (dynamic path).
//!
//! Pixels are 8-bit intensities with dark ink on a light background. After
//! binarization every pixel is either [`INK`] or [`BACKGROUND`].

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

#[allow(unused_imports)] // inherent f64 methods shadow these when std is linked
use num_traits::Float;

use crate::error::{Error, Result};

/// Pixel value of ink after binarization.
pub const INK: u8 = 0;
/// Pixel value of background after binarization.
pub const BACKGROUND: u8 = 255;

/// Intensities strictly below this count as ink for moment computation.
pub const INK_CUTOFF: u8 = 128;

/// Row-major 8-bit grayscale image.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(Error::Dimension {
                width,
                height,
                pixels: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.pixels[y * self.width + x] = value;
    }

    #[inline]
    pub fn is_ink(&self, x: usize, y: usize) -> bool {
        self.get(x, y) < INK_CUTOFF
    }

    pub fn ink_count(&self) -> usize {
        self.pixels.iter().filter(|&&p| p < INK_CUTOFF).count()
    }

    /// Copies the rectangle `columns × rows` into a new image.
    pub fn crop(&self, columns: Range<usize>, rows: Range<usize>) -> Result<Self> {
        if columns.end > self.width
            || rows.end > self.height
            || columns.is_empty()
            || rows.is_empty()
        {
            return Err(Error::Parameter(format!(
                "crop {columns:?}x{rows:?} outside {}x{}",
                self.width, self.height
            )));
        }
        let width = columns.len();
        let mut pixels = Vec::with_capacity(width * rows.len());
        for y in rows.clone() {
            let start = y * self.width;
            pixels.extend_from_slice(&self.pixels[start + columns.start..start + columns.end]);
        }
        Self::new(width, rows.len(), pixels)
    }

    /// Mirror about the vertical axis (left and right swapped).
    pub fn mirror_horizontal(&self) -> Self {
        let mut out = self.clone();
        for y in 0..self.height {
            for x in 0..self.width {
                out.set(self.width - 1 - x, y, self.get(x, y));
            }
        }
        out
    }

    /// Rotation by 90° clockwise; an exact permutation of the pixel grid.
    pub fn rotate90(&self) -> Self {
        let (w, h) = (self.width, self.height);
        let mut pixels = vec![0u8; w * h];
        for y in 0..h {
            for x in 0..w {
                // (x, y) -> (h - 1 - y, x) in a h-wide image
                pixels[x * h + (h - 1 - y)] = self.get(x, y);
            }
        }
        Self {
            width: h,
            height: w,
            pixels,
        }
    }

    /// Shifts the content by `(dx, dy)`, filling uncovered pixels with `fill`.
    /// Content pushed past the border is lost.
    pub fn translate(&self, dx: isize, dy: isize, fill: u8) -> Self {
        let mut out = Self {
            width: self.width,
            height: self.height,
            pixels: vec![fill; self.pixels.len()],
        };
        for y in 0..self.height {
            for x in 0..self.width {
                let nx = x as isize + dx;
                let ny = y as isize + dy;
                if nx >= 0 && ny >= 0 && (nx as usize) < self.width && (ny as usize) < self.height {
                    out.set(nx as usize, ny as usize, self.get(x, y));
                }
            }
        }
        out
    }

    /// Nearest-neighbour upscaling by an integer factor.
    pub fn scale_nearest(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::Parameter("scale factor must be positive".into()));
        }
        Self::from_fn(self.width * factor, self.height * factor, |x, y| {
            self.get(x / factor, y / factor)
        })
    }

    /// Rotation by an arbitrary angle (radians) about the image centre with
    /// nearest-neighbour resampling. Output has the same size; pixels mapping
    /// outside the source receive `fill`.
    pub fn rotate(&self, angle: f64, fill: u8) -> Self {
        let cx = (self.width as f64 - 1.0) / 2.0;
        let cy = (self.height as f64 - 1.0) / 2.0;
        let (s, c) = (angle.sin(), angle.cos());
        let mut out = Self {
            width: self.width,
            height: self.height,
            pixels: vec![fill; self.pixels.len()],
        };
        for y in 0..self.height {
            for x in 0..self.width {
                let dx = x as f64 - cx;
                let dy = y as f64 - cy;
                // inverse mapping: rotate destination back into the source
                let sx = (c * dx + s * dy + cx).round();
                let sy = (-s * dx + c * dy + cy).round();
                if sx >= 0.0
                    && sy >= 0.0
                    && (sx as usize) < self.width
                    && (sy as usize) < self.height
                {
                    out.set(x, y, self.get(sx as usize, sy as usize));
                }
            }
        }
        out
    }
}

/// Binarization rule. Pixels at or below the threshold become ink.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Binarization {
    Fixed(u8),
    #[default]
    Otsu,
}

/// Threshold used by Otsu's method when the histogram has a single level.
const DEGENERATE_THRESHOLD: u8 = 127;

/// Otsu threshold `t`: the split `{v <= t} | {v > t}` maximizing the
/// between-class variance. Ties go to the lowest `t`; a histogram with no
/// valid split falls back to 127.
pub fn otsu_threshold(img: &GrayImage) -> u8 {
    let mut hist = [0u64; 256];
    for &p in img.pixels() {
        hist[p as usize] += 1;
    }
    let total = img.pixels().len() as f64;
    let sum_all: f64 = hist
        .iter()
        .enumerate()
        .map(|(v, &n)| v as f64 * n as f64)
        .sum();

    let mut best = (0.0f64, DEGENERATE_THRESHOLD);
    let mut weight_lo = 0.0;
    let mut sum_lo = 0.0;
    for t in 0..255usize {
        weight_lo += hist[t] as f64;
        sum_lo += t as f64 * hist[t] as f64;
        let weight_hi = total - weight_lo;
        if weight_lo == 0.0 || weight_hi == 0.0 {
            continue;
        }
        let mean_lo = sum_lo / weight_lo;
        let mean_hi = (sum_all - sum_lo) / weight_hi;
        let diff = mean_lo - mean_hi;
        let between = weight_lo * weight_hi * diff * diff;
        if between > best.0 {
            best = (between, t as u8);
        }
    }
    best.1
}

pub fn binarize(img: &GrayImage, method: Binarization) -> Result<GrayImage> {
    let threshold = match method {
        Binarization::Fixed(t) => t,
        Binarization::Otsu => otsu_threshold(img),
    };
    let pixels = img
        .pixels()
        .iter()
        .map(|&p| if p <= threshold { INK } else { BACKGROUND })
        .collect();
    GrayImage::new(img.width(), img.height(), pixels)
}

/// Vertical strips of a word image in reading order (right to left).
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSet {
    pub blocks: Vec<GrayImage>,
    /// Source column range of each block, parallel to `blocks`.
    pub columns: Vec<Range<usize>>,
}

/// Splits `img` into `n` vertical strips ordered right to left.
///
/// Strip widths differ by at most one pixel; the extra pixels of a
/// non-divisible width go to the rightmost strips.
pub fn split_blocks(img: &GrayImage, n: usize) -> Result<BlockSet> {
    if n == 0 {
        return Err(Error::Parameter("block count must be at least 1".into()));
    }
    if n > img.width() {
        return Err(Error::TooManyBlocks {
            width: img.width(),
            blocks: n,
        });
    }
    let base = img.width() / n;
    let extra = img.width() % n;
    let mut blocks = Vec::with_capacity(n);
    let mut columns = Vec::with_capacity(n);
    let mut right = img.width();
    for i in 0..n {
        let width = base + usize::from(i < extra);
        let range = right - width..right;
        blocks.push(img.crop(range.clone(), 0..img.height())?);
        columns.push(range);
        right -= width;
    }
    Ok(BlockSet { blocks, columns })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Axis {
    /// Columns scanned right to left.
    Horizontal,
    /// Rows scanned top to bottom.
    Vertical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowSequence {
    pub axis: Axis,
    /// Window extent along the scan axis; windows do not overlap, so this is
    /// also the stride.
    pub window: usize,
    pub windows: Vec<GrayImage>,
}

/// Cuts `img` into equal non-overlapping windows along `axis`.
///
/// The traversed dimension is first padded with background up to a multiple
/// of `window`: on the left for horizontal scans and at the bottom for
/// vertical scans, so the first windows in reading order are never padded.
pub fn sliding_windows(img: &GrayImage, axis: Axis, window: usize) -> Result<WindowSequence> {
    if window == 0 {
        return Err(Error::Parameter("window size must be positive".into()));
    }
    let (w, h) = (img.width(), img.height());
    let windows = match axis {
        Axis::Horizontal => {
            let padded = w.div_ceil(window) * window;
            let pad = padded - w;
            let canvas = GrayImage::from_fn(padded, h, |x, y| {
                if x < pad {
                    BACKGROUND
                } else {
                    img.get(x - pad, y)
                }
            })?;
            (0..padded / window)
                .map(|i| {
                    let right = padded - i * window;
                    canvas.crop(right - window..right, 0..h)
                })
                .collect::<Result<Vec<_>>>()?
        }
        Axis::Vertical => {
            let padded = h.div_ceil(window) * window;
            let canvas =
                GrayImage::from_fn(
                    w,
                    padded,
                    |x, y| if y < h { img.get(x, y) } else { BACKGROUND },
                )?;
            (0..padded / window)
                .map(|i| canvas.crop(0..w, i * window..(i + 1) * window))
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(WindowSequence {
        axis,
        window,
        windows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "train" => Some(Split::Train),
            "validation" | "valid" | "val" => Some(Split::Validation),
            "test" => Some(Split::Test),
            _ => None,
        }
    }
}

/// A word image with its class. Classes are zero-based here; file formats
/// use one-based class ids.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub id: String,
    pub image: GrayImage,
    pub class: usize,
    pub split: Option<Split>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(width: usize, height: usize) -> GrayImage {
        GrayImage::from_fn(width, height, |x, y| ((x * 7 + y * 13) % 256) as u8).unwrap()
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(matches!(
            GrayImage::new(0, 3, vec![]),
            Err(Error::Dimension { .. })
        ));
        assert!(GrayImage::new(2, 2, vec![0; 3]).is_err());
    }

    #[test]
    fn binarize_constant_images() {
        let white = GrayImage::filled(5, 4, 255).unwrap();
        let black = GrayImage::filled(5, 4, 0).unwrap();
        for method in [Binarization::Otsu, Binarization::Fixed(128)] {
            assert!(binarize(&white, method)
                .unwrap()
                .pixels()
                .iter()
                .all(|&p| p == BACKGROUND));
            assert!(binarize(&black, method)
                .unwrap()
                .pixels()
                .iter()
                .all(|&p| p == INK));
        }
    }

    fn otsu_oracle(img: &GrayImage) -> u8 {
        // exhaustive: evaluate the between-class variance at every threshold
        let px = img.pixels();
        let n = px.len() as f64;
        let mut best = (0.0, DEGENERATE_THRESHOLD);
        for t in 0..=255u16 {
            let lo: Vec<f64> = px
                .iter()
                .filter(|&&p| p as u16 <= t)
                .map(|&p| p as f64)
                .collect();
            let hi: Vec<f64> = px
                .iter()
                .filter(|&&p| p as u16 > t)
                .map(|&p| p as f64)
                .collect();
            if lo.is_empty() || hi.is_empty() {
                continue;
            }
            let (w0, w1) = (lo.len() as f64 / n, hi.len() as f64 / n);
            let m0 = lo.iter().sum::<f64>() / lo.len() as f64;
            let m1 = hi.iter().sum::<f64>() / hi.len() as f64;
            let var = w0 * w1 * (m0 - m1) * (m0 - m1);
            if var > best.0 * (1.0 + 1e-12) {
                best = (var, t as u8);
            }
        }
        best.1
    }

    #[test]
    fn otsu_separates_two_modes() {
        let img = GrayImage::from_fn(16, 16, |x, _| if x < 8 { 50 } else { 200 }).unwrap();
        let t = otsu_threshold(&img);
        assert!((50..200).contains(&t));
        assert_eq!(t, otsu_oracle(&img));
        let bin = binarize(&img, Binarization::Otsu).unwrap();
        assert_eq!(bin.ink_count(), 128);
    }

    #[test]
    fn otsu_matches_exhaustive_search_on_noisy_histogram() {
        let img = GrayImage::from_fn(20, 20, |x, y| {
            let base = if (x + y) % 3 == 0 { 40 } else { 180 };
            (base + (x * 31 + y * 17) % 37) as u8
        })
        .unwrap();
        assert_eq!(otsu_threshold(&img), otsu_oracle(&img));
    }

    #[test]
    fn split_exact_and_remainder() {
        let img = ramp(300, 4);
        let set = split_blocks(&img, 3).unwrap();
        assert!(set.blocks.iter().all(|b| b.width() == 100));

        let img = ramp(301, 4);
        let set = split_blocks(&img, 3).unwrap();
        let widths: Vec<_> = set.blocks.iter().map(|b| b.width()).collect();
        assert_eq!(widths, vec![101, 100, 100]);
        assert_eq!(set.columns[0], 200..301);
    }

    #[test]
    fn split_identity_and_errors() {
        let img = ramp(17, 5);
        let set = split_blocks(&img, 1).unwrap();
        assert_eq!(set.blocks[0], img);
        assert!(matches!(
            split_blocks(&img, 18),
            Err(Error::TooManyBlocks { .. })
        ));
        assert!(split_blocks(&img, 0).is_err());
    }

    #[test]
    fn blocks_reassemble_source() {
        for width in [7usize, 30, 31, 32, 97] {
            for n in 1..=6.min(width) {
                let img = ramp(width, 3);
                let set = split_blocks(&img, n).unwrap();
                let widths: Vec<_> = set.blocks.iter().map(|b| b.width()).collect();
                let (lo, hi) = (widths.iter().min().unwrap(), widths.iter().max().unwrap());
                assert!(hi - lo <= 1);
                // reading order is right to left, so reverse to rebuild
                for y in 0..img.height() {
                    let row: Vec<u8> = set
                        .blocks
                        .iter()
                        .rev()
                        .flat_map(|b| (0..b.width()).map(move |x| b.get(x, y)))
                        .collect();
                    assert_eq!(&row[..], &img.pixels()[y * width..(y + 1) * width]);
                }
            }
        }
    }

    #[test]
    fn horizontal_windows_run_right_to_left() {
        let img = ramp(100, 6);
        let seq = sliding_windows(&img, Axis::Horizontal, 10).unwrap();
        assert_eq!(seq.windows.len(), 10);
        assert_eq!(seq.windows[0], img.crop(90..100, 0..6).unwrap());
        assert_eq!(seq.windows[9], img.crop(0..10, 0..6).unwrap());
    }

    #[test]
    fn vertical_windows_run_top_down() {
        let img = ramp(8, 60);
        let seq = sliding_windows(&img, Axis::Vertical, 20).unwrap();
        assert_eq!(seq.windows.len(), 3);
        assert_eq!(seq.windows[0], img.crop(0..8, 0..20).unwrap());
    }

    #[test]
    fn window_identity_and_zero() {
        let img = ramp(13, 4);
        let seq = sliding_windows(&img, Axis::Horizontal, 13).unwrap();
        assert_eq!(seq.windows, vec![img.clone()]);
        assert!(matches!(
            sliding_windows(&img, Axis::Vertical, 0),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn padding_goes_left_and_bottom() {
        let img = ramp(25, 7);
        let seq = sliding_windows(&img, Axis::Horizontal, 10).unwrap();
        assert_eq!(seq.windows.len(), 3);
        assert_eq!(seq.windows[0], img.crop(15..25, 0..7).unwrap());
        // last window: 5 padded columns then source columns 0..5
        let last = &seq.windows[2];
        assert!((0..7).all(|y| (0..5).all(|x| last.get(x, y) == BACKGROUND)));
        assert_eq!(
            last.crop(5..10, 0..7).unwrap(),
            img.crop(0..5, 0..7).unwrap()
        );

        let seq = sliding_windows(&img, Axis::Vertical, 3).unwrap();
        assert_eq!(seq.windows.len(), 3);
        assert_eq!(seq.windows[0], img.crop(0..25, 0..3).unwrap());
        let last = &seq.windows[2];
        assert!((0..25).all(|x| last.get(x, 1) == BACKGROUND && last.get(x, 2) == BACKGROUND));
    }

    #[test]
    fn windows_cover_every_pixel_once() {
        let img = ramp(23, 11);
        for axis in [Axis::Horizontal, Axis::Vertical] {
            for window in [1usize, 4, 5, 11, 30] {
                let seq = sliding_windows(&img, axis, window).unwrap();
                let covered: usize = seq.windows.iter().map(|w| w.width() * w.height()).sum();
                let padded = match axis {
                    Axis::Horizontal => 23usize.div_ceil(window) * window * 11,
                    Axis::Vertical => 11usize.div_ceil(window) * window * 23,
                };
                assert_eq!(covered, padded);
                let sum: u64 = seq
                    .windows
                    .iter()
                    .flat_map(|w| w.pixels())
                    .map(|&p| p as u64)
                    .sum();
                let pad = (padded - 23 * 11) as u64 * BACKGROUND as u64;
                assert_eq!(
                    sum,
                    img.pixels().iter().map(|&p| p as u64).sum::<u64>() + pad
                );
            }
        }
    }

    #[test]
    fn rotate90_four_times_is_identity() {
        let img = ramp(9, 5);
        let r = img.rotate90();
        assert_eq!((r.width(), r.height()), (5, 9));
        assert_eq!(r.rotate90().rotate90().rotate90(), img);
        assert_eq!(img.mirror_horizontal().mirror_horizontal(), img);
    }
}
