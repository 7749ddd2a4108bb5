//! Moment descriptors: central moments, the seven Hu invariants and Zernike
//! magnitudes, combined into the 12-component block feature vector.
//!
//! Every ink pixel (intensity below [`INK_CUTOFF`](crate::imaging::INK_CUTOFF))
//! carries unit mass, so `v_00` is the ink area.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // inherent f64 methods shadow these when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::imaging::GrayImage;

/// Central moments `v_pq` for `p + q <= 3`, taken about the ink centroid.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralMoments {
    mu: [[f64; 4]; 4],
    centroid: (f64, f64),
}

impl CentralMoments {
    /// `v_pq`; zero for `p + q > 3`.
    pub fn get(&self, p: usize, q: usize) -> f64 {
        if p + q > 3 {
            0.0
        } else {
            self.mu[p][q]
        }
    }

    pub fn mass(&self) -> f64 {
        self.mu[0][0]
    }

    /// Ink centroid as `(x, y)` in pixel coordinates.
    pub fn centroid(&self) -> (f64, f64) {
        self.centroid
    }

    /// Scale-normalized moment `u_pq = v_pq / v_00^(1 + (p+q)/2)`.
    pub fn normalized(&self, p: usize, q: usize) -> f64 {
        let exponent = 1.0 + (p + q) as f64 / 2.0;
        self.get(p, q) / self.mass().powf(exponent)
    }
}

fn ink_pixels(img: &GrayImage) -> impl Iterator<Item = (usize, usize)> + '_ {
    (0..img.height()).flat_map(move |y| {
        (0..img.width())
            .filter(move |&x| img.is_ink(x, y))
            .map(move |x| (x, y))
    })
}

/// Central moments of the ink in `img`.
///
/// The offsets from the centroid are accumulated exactly as integers
/// `N·x − Σx`, so translating, mirroring or rotating by 90° reproduces the
/// moments bit for bit (up to sign), whatever the pixel visiting order.
pub fn central_moments(img: &GrayImage) -> Result<CentralMoments> {
    let mut n: i128 = 0;
    let (mut sx, mut sy): (i128, i128) = (0, 0);
    for (x, y) in ink_pixels(img) {
        n += 1;
        sx += x as i128;
        sy += y as i128;
    }
    if n == 0 {
        return Err(Error::EmptyInk);
    }
    let centroid = (sx as f64 / n as f64, sy as f64 / n as f64);

    // |N·x − Σx| <= N·extent; the largest accumulated term is N·(N·extent)^3
    let extent = img.width().max(img.height()) as i128;
    let bound = (n * extent).checked_pow(3).and_then(|c| c.checked_mul(n));
    let mut mu = [[0.0f64; 4]; 4];
    if bound.is_some() {
        let mut sums = [[0i128; 4]; 4];
        for (x, y) in ink_pixels(img) {
            let dx = n * x as i128 - sx;
            let dy = n * y as i128 - sy;
            let px = [1, dx, dx * dx, dx * dx * dx];
            let py = [1, dy, dy * dy, dy * dy * dy];
            for p in 0..4 {
                for q in 0..4 - p {
                    sums[p][q] += px[p] * py[q];
                }
            }
        }
        let nf = n as f64;
        for p in 0..4 {
            for q in 0..4 - p {
                mu[p][q] = sums[p][q] as f64 / nf.powi((p + q) as i32);
            }
        }
    } else {
        for (x, y) in ink_pixels(img) {
            let dx = x as f64 - centroid.0;
            let dy = y as f64 - centroid.1;
            for p in 0..4 {
                for q in 0..4 - p {
                    mu[p][q] += dx.powi(p as i32) * dy.powi(q as i32);
                }
            }
        }
    }
    mu[1][0] = 0.0;
    mu[0][1] = 0.0;
    Ok(CentralMoments { mu, centroid })
}

/// The seven Hu invariants `φ1..φ7`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HuVector(pub [f64; 7]);

pub fn hu_invariants(m: &CentralMoments) -> HuVector {
    let u = |p, q| m.normalized(p, q);
    let (u20, u02, u11) = (u(2, 0), u(0, 2), u(1, 1));
    let (u30, u03, u21, u12) = (u(3, 0), u(0, 3), u(2, 1), u(1, 2));

    let a = u30 - 3.0 * u12;
    let b = 3.0 * u21 - u03;
    let s = u30 + u12;
    let t = u21 + u03;

    let phi1 = u20 + u02;
    let phi2 = (u20 - u02) * (u20 - u02) + 4.0 * u11 * u11;
    let phi3 = a * a + b * b;
    let phi4 = s * s + t * t;
    let phi5 = a * s * (s * s - 3.0 * t * t) + b * t * (3.0 * s * s - t * t);
    let phi6 = (u20 - u02) * (s * s - t * t) + 4.0 * u11 * s * t;
    let phi7 = b * s * (s * s - 3.0 * t * t) - a * t * (3.0 * s * s - t * t);
    HuVector([phi1, phi2, phi3, phi4, phi5, phi6, phi7])
}

/// Order `m` / repetition `n` pair of a Zernike moment.
pub type ZernikeIndex = (u32, i32);

/// Zernike magnitudes appended to the Hu invariants: every order ≤ 3 index
/// with `n >= 0` except the `A_00` normalizer.
pub const DEFAULT_ZERNIKE_INDICES: [ZernikeIndex; 5] = [(1, 1), (2, 0), (2, 2), (3, 1), (3, 3)];

fn check_index(order: u32, repetition: i32) -> Result<()> {
    let n = repetition.unsigned_abs();
    if n > order || !(order - n).is_multiple_of(2) {
        return Err(Error::InvalidZernikeIndex { order, repetition });
    }
    Ok(())
}

fn factorial(k: u32) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// Radial polynomial `R_mn(r)`.
pub fn zernike_radial(order: u32, repetition: i32, r: f64) -> Result<f64> {
    check_index(order, repetition)?;
    let n = repetition.unsigned_abs();
    let mut value = 0.0;
    for s in 0..=(order - n) / 2 {
        let coeff = factorial(order - s)
            / (factorial(s) * factorial((order + n) / 2 - s) * factorial((order - n) / 2 - s));
        let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
        value += sign * coeff * r.powi((order - 2 * s) as i32);
    }
    Ok(value)
}

/// Zernike magnitudes `|A_mn| / |A_00|` for a list of indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ZernikeSet {
    pub indices: Vec<ZernikeIndex>,
    pub magnitudes: Vec<f64>,
}

/// Zernike moments of the ink in `img`.
///
/// The unit disk is centred on the ink centroid with radius equal to the
/// distance of the farthest ink pixel, so no ink falls outside it.
pub fn zernike_moments(img: &GrayImage, indices: &[ZernikeIndex]) -> Result<ZernikeSet> {
    for &(m, n) in indices {
        check_index(m, n)?;
    }
    let moments = central_moments(img)?;
    let (cx, cy) = moments.centroid();

    let mut offsets = Vec::with_capacity(moments.mass() as usize);
    let mut r_max: f64 = 0.0;
    for y in 0..img.height() {
        for x in 0..img.width() {
            if img.is_ink(x, y) {
                let (dx, dy) = (x as f64 - cx, y as f64 - cy);
                r_max = r_max.max((dx * dx + dy * dy).sqrt());
                offsets.push((dx, dy));
            }
        }
    }
    if r_max == 0.0 {
        // a single ink pixel sits at the origin
        r_max = 1.0;
    }
    let area = 1.0 / (r_max * r_max);

    let moment = |order: u32, repetition: i32| -> Result<f64> {
        let (mut re, mut im) = (0.0, 0.0);
        for &(dx, dy) in &offsets {
            let r = (dx * dx + dy * dy).sqrt() / r_max;
            if r > 1.0 {
                continue;
            }
            let radial = zernike_radial(order, repetition, r)?;
            let theta = dy.atan2(dx);
            let phase = repetition as f64 * theta;
            re += radial * phase.cos();
            im += radial * phase.sin();
        }
        let scale = (order as f64 + 1.0) / PI * area;
        Ok(scale * (re * re + im * im).sqrt())
    };

    let a00 = moment(0, 0)?;
    if a00 == 0.0 {
        return Err(Error::EmptyInk);
    }
    let magnitudes = indices
        .iter()
        .map(|&(m, n)| {
            if (m, n) == (0, 0) {
                Ok(1.0)
            } else {
                moment(m, n).map(|a| flush(a / a00))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ZernikeSet {
        indices: indices.to_vec(),
        magnitudes,
    })
}

/// Normalized magnitudes below this are rounding residue. `|A_11|` about
/// the centroid vanishes analytically and lands here.
pub const ZERNIKE_FLUSH: f64 = 1e-12;

fn flush(ratio: f64) -> f64 {
    if ratio < ZERNIKE_FLUSH {
        0.0
    } else {
        ratio
    }
}

pub const FEATURE_LEN: usize = 12;

/// `[φ1..φ7, z1..z5]` for one block or window.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeatureVector(pub [f64; FEATURE_LEN]);

impl FeatureVector {
    pub const ZERO: FeatureVector = FeatureVector([0.0; FEATURE_LEN]);

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Feature extraction with a configurable Zernike index list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeatureExtractor {
    pub zernike: [ZernikeIndex; 5],
}

impl Default for FeatureExtractor {
    fn default() -> Self {
        Self {
            zernike: DEFAULT_ZERNIKE_INDICES,
        }
    }
}

impl FeatureExtractor {
    pub fn new(zernike: [ZernikeIndex; 5]) -> Result<Self> {
        for (m, n) in zernike {
            check_index(m, n)?;
        }
        Ok(Self { zernike })
    }

    pub fn extract(&self, img: &GrayImage) -> Result<FeatureVector> {
        let hu = hu_invariants(&central_moments(img)?);
        let zernike = zernike_moments(img, &self.zernike)?;
        let mut out = [0.0; FEATURE_LEN];
        out[..7].copy_from_slice(&hu.0);
        out[7..].copy_from_slice(&zernike.magnitudes);
        Ok(FeatureVector(out))
    }

    /// Like [`extract`](Self::extract) but maps a blank image to the zero
    /// vector. Returns whether the image was blank.
    pub fn extract_or_zero(&self, img: &GrayImage) -> Result<(FeatureVector, bool)> {
        match self.extract(img) {
            Ok(v) => Ok((v, false)),
            Err(Error::EmptyInk) => Ok((FeatureVector::ZERO, true)),
            Err(e) => Err(e),
        }
    }
}

/// Feature vector with the default Zernike indices.
pub fn feature_vector(img: &GrayImage) -> Result<FeatureVector> {
    FeatureExtractor::default().extract(img)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{BACKGROUND, INK};

    fn disk(size: usize, radius: f64) -> GrayImage {
        let c = (size as f64 - 1.0) / 2.0;
        GrayImage::from_fn(size, size, |x, y| {
            let (dx, dy) = (x as f64 - c, y as f64 - c);
            if dx * dx + dy * dy <= radius * radius {
                INK
            } else {
                BACKGROUND
            }
        })
        .unwrap()
    }

    fn blobs(size: usize) -> GrayImage {
        // asymmetric shape: a bar, an offset blob and a thin arm
        GrayImage::from_fn(size, size, |x, y| {
            let (fx, fy) = (x as f64 / size as f64, y as f64 / size as f64);
            let bar = (0.2..0.7).contains(&fx) && (0.3..0.4).contains(&fy);
            let blob = (fx - 0.6).powi(2) / 0.02 + (fy - 0.65).powi(2) / 0.01 <= 1.0;
            let arm = (0.25..0.3).contains(&fx) && (0.4..0.85).contains(&fy);
            if bar || blob || arm {
                INK
            } else {
                BACKGROUND
            }
        })
        .unwrap()
    }

    #[test]
    fn single_pixel_is_a_point_mass() {
        let mut img = GrayImage::filled(9, 7, BACKGROUND).unwrap();
        img.set(3, 4, INK);
        let m = central_moments(&img).unwrap();
        assert_eq!(m.mass(), 1.0);
        for p in 0..4 {
            for q in 0..4 - p {
                if p + q > 0 {
                    assert_eq!(m.get(p, q), 0.0);
                }
            }
        }
        assert_eq!(m.centroid(), (3.0, 4.0));
    }

    #[test]
    fn empty_ink_is_an_error() {
        let img = GrayImage::filled(4, 4, BACKGROUND).unwrap();
        assert_eq!(central_moments(&img), Err(Error::EmptyInk));
        assert_eq!(feature_vector(&img), Err(Error::EmptyInk));
        let (v, blank) = FeatureExtractor::default().extract_or_zero(&img).unwrap();
        assert!(blank);
        assert_eq!(v, FeatureVector::ZERO);
    }

    #[test]
    fn first_order_central_moments_vanish() {
        let m = central_moments(&blobs(64)).unwrap();
        assert_eq!(m.get(1, 0), 0.0);
        assert_eq!(m.get(0, 1), 0.0);
    }

    #[test]
    fn disk_second_moment_matches_continuous_integral() {
        let r = 100.0;
        let m = central_moments(&disk(256, r)).unwrap();
        // continuous: ∬x² over the disk / area = R²/4
        let ratio = m.get(2, 0) / m.mass();
        assert!((ratio - r * r / 4.0).abs() / (r * r / 4.0) < 0.01);
    }

    #[test]
    fn disk_hu_values() {
        let hu = hu_invariants(&central_moments(&disk(256, 100.0)).unwrap());
        let expected = 1.0 / (2.0 * PI);
        assert!((hu.0[0] - expected).abs() / expected < 0.01, "{}", hu.0[0]);
        for phi in &hu.0[1..] {
            assert!(phi.abs() < 1e-4);
        }
    }

    #[test]
    fn mirror_negates_phi7_exactly() {
        let img = blobs(96);
        let a = hu_invariants(&central_moments(&img).unwrap());
        let b = hu_invariants(&central_moments(&img.mirror_horizontal()).unwrap());
        assert_eq!(a.0[..6], b.0[..6]);
        assert_eq!(a.0[6], -b.0[6]);
        assert!(a.0[6] != 0.0);
    }

    #[test]
    fn translation_is_exact() {
        let img = blobs(96);
        let a = hu_invariants(&central_moments(&img).unwrap());
        let b = hu_invariants(&central_moments(&img.translate(5, -3, BACKGROUND)).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn radial_closed_forms() {
        for i in 0..=100 {
            let r = i as f64 / 100.0;
            assert_eq!(zernike_radial(0, 0, r).unwrap(), 1.0);
            assert!((zernike_radial(1, 1, r).unwrap() - r).abs() < 1e-15);
            assert!((zernike_radial(2, 0, r).unwrap() - (2.0 * r * r - 1.0)).abs() < 1e-15);
            assert!((zernike_radial(2, 2, r).unwrap() - r * r).abs() < 1e-15);
            assert!((zernike_radial(3, 1, r).unwrap() - (3.0 * r.powi(3) - 2.0 * r)).abs() < 1e-14);
            assert_eq!(zernike_radial(2, -2, r), zernike_radial(2, 2, r));
        }
        assert_eq!(zernike_radial(0, 0, 0.37).unwrap(), 1.0);
        assert_eq!(zernike_radial(1, 1, 0.5).unwrap(), 0.5);
        assert_eq!(zernike_radial(2, 0, 0.5).unwrap(), -0.5);
    }

    #[test]
    fn radial_rejects_bad_parity() {
        assert!(matches!(
            zernike_radial(2, 1, 0.5),
            Err(Error::InvalidZernikeIndex { .. })
        ));
        assert!(matches!(
            zernike_radial(1, 3, 0.5),
            Err(Error::InvalidZernikeIndex { .. })
        ));
        assert!(FeatureExtractor::new([(1, 1), (2, 0), (2, 2), (3, 1), (3, 2)]).is_err());
    }

    #[test]
    fn uniform_disk_kills_non_radial_and_second_order() {
        // odd size: the farthest lattice point lies exactly on the circle
        let img = disk(201, 100.0);
        let z = zernike_moments(&img, &[(1, 1), (2, 0), (2, 2)]).unwrap();
        for m in &z.magnitudes {
            assert!(*m < 1e-3, "{:?}", z.magnitudes);
        }
    }

    #[test]
    fn zernike_self_normalization() {
        let z = zernike_moments(&blobs(40), &[(0, 0)]).unwrap();
        assert_eq!(z.magnitudes, [1.0]);
    }

    #[test]
    fn zernike_quarter_turn_invariance() {
        let img = blobs(80);
        let a = zernike_moments(&img, &DEFAULT_ZERNIKE_INDICES).unwrap();
        let mut rotated = img.clone();
        for _ in 0..3 {
            rotated = rotated.rotate90();
            let b = zernike_moments(&rotated, &DEFAULT_ZERNIKE_INDICES).unwrap();
            for (x, y) in a.magnitudes.iter().zip(&b.magnitudes) {
                assert!((x - y).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn discrete_orthogonality_on_dense_grid() {
        // ⟨V_20, V_00⟩ over a dense grid of the unit disk vs ⟨V_00, V_00⟩
        let n = 801;
        let (mut cross, mut own) = (0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let x = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
                let y = -1.0 + 2.0 * j as f64 / (n - 1) as f64;
                let r = (x * x + y * y).sqrt();
                if r <= 1.0 {
                    cross += zernike_radial(2, 0, r).unwrap();
                    own += 1.0;
                }
            }
        }
        assert!(cross.abs() < 1e-3 * own);
    }

    #[test]
    fn feature_vector_layout() {
        let img = blobs(64);
        let v = feature_vector(&img).unwrap();
        assert_eq!(v.as_slice().len(), FEATURE_LEN);
        let hu = hu_invariants(&central_moments(&img).unwrap());
        assert_eq!(v.0[..7], hu.0);
        let z = zernike_moments(&img, &DEFAULT_ZERNIKE_INDICES).unwrap();
        assert_eq!(v.0[7..], z.magnitudes[..]);
        assert_eq!(v, feature_vector(&img).unwrap());
        assert!(v.0.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn doubling_preserves_hu() {
        let img = blobs(128);
        let a = feature_vector(&img).unwrap();
        let b = feature_vector(&img.scale_nearest(2).unwrap()).unwrap();
        for i in 0..7 {
            assert!(
                (a.0[i] - b.0[i]).abs() <= 0.02 * a.0[i].abs(),
                "phi{} {} vs {}",
                i + 1,
                a.0[i],
                b.0[i]
            );
        }
    }
}
