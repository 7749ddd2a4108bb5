//! Standardization, PCA and k-means vector quantization.
//!
//! Continuous feature vectors become discrete labels through k-means
//! codebooks. The number of clusters can be picked by silhouette analysis.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::ops::RangeInclusive;

use nalgebra::{DMatrix, SymmetricEigen};
#[allow(unused_imports)] // inherent f64 methods shadow these when std is linked
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Column-standardized data matrix with the removed statistics.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StandardizedMatrix {
    pub rows: usize,
    pub cols: usize,
    /// Row-major values.
    pub values: Vec<f64>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl StandardizedMatrix {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    /// Standardizes a new row with the stored statistics.
    pub fn apply(&self, row: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.cols, row.len())?;
        Ok(row
            .iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(x, (m, s))| (x - m) / s)
            .collect())
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn check_rectangular(data: &[Vec<f64>]) -> Result<usize> {
    let cols = data
        .first()
        .map(Vec::len)
        .ok_or(Error::Empty("data matrix"))?;
    for row in data {
        check_dim(cols, row.len())?;
    }
    Ok(cols)
}

fn is_constant(mean: f64, std: f64) -> bool {
    !(std > 1e-12 * mean.abs().max(1.0))
}

/// Centres and scales every column to mean 0 and population standard
/// deviation 1.
pub fn standardize(data: &[Vec<f64>]) -> Result<StandardizedMatrix> {
    let cols = check_rectangular(data)?;
    let rows = data.len();
    if rows < 2 {
        return Err(Error::Parameter(
            "standardization needs at least two rows".into(),
        ));
    }
    let n = rows as f64;
    let mut means = vec![0.0; cols];
    let mut stds = vec![0.0; cols];
    for (c, (mean, std)) in means.iter_mut().zip(stds.iter_mut()).enumerate() {
        *mean = data.iter().map(|r| r[c]).sum::<f64>() / n;
        let var = data.iter().map(|r| (r[c] - *mean).powi(2)).sum::<f64>() / n;
        *std = var.sqrt();
        if is_constant(*mean, *std) {
            return Err(Error::ZeroVariance { column: c });
        }
    }
    let values = data
        .iter()
        .flat_map(|r| r.iter().enumerate().map(|(c, x)| (x - means[c]) / stds[c]))
        .collect();
    Ok(StandardizedMatrix {
        rows,
        cols,
        values,
        means,
        stds,
    })
}

/// Principal axes of a standardized matrix.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PcaModel {
    /// `q` orthonormal directions, strongest first.
    pub components: Vec<Vec<f64>>,
    /// Non-increasing eigenvalues of the correlation matrix.
    pub eigenvalues: Vec<f64>,
}

impl PcaModel {
    pub fn retained(&self) -> usize {
        self.components.len()
    }

    pub fn project(&self, row: &[f64]) -> Result<Vec<f64>> {
        let dim = self.components.first().map_or(0, Vec::len);
        check_dim(dim, row.len())?;
        Ok(self.components.iter().map(|c| dot(c, row)).collect())
    }

    /// Maps projected coordinates back into the standardized space.
    pub fn reconstruct(&self, projected: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.retained(), projected.len())?;
        let dim = self.components.first().map_or(0, Vec::len);
        let mut out = vec![0.0; dim];
        for (c, &w) in self.components.iter().zip(projected) {
            for (o, x) in out.iter_mut().zip(c) {
                *o += w * x;
            }
        }
        Ok(out)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Eigendecomposition of the correlation matrix, keeping the top `q` axes.
pub fn pca_fit(data: &StandardizedMatrix, q: usize) -> Result<PcaModel> {
    let p = data.cols;
    if q == 0 || q > p {
        return Err(Error::Parameter(alloc::format!(
            "retained components {q} outside 1..={p}"
        )));
    }
    let n = data.rows as f64;
    let mut corr = DMatrix::<f64>::zeros(p, p);
    for i in 0..data.rows {
        let row = data.row(i);
        for a in 0..p {
            for b in a..p {
                corr[(a, b)] += row[a] * row[b];
            }
        }
    }
    for a in 0..p {
        for b in a..p {
            let v = corr[(a, b)] / n;
            corr[(a, b)] = v;
            corr[(b, a)] = v;
        }
    }
    let eig = SymmetricEigen::new(corr);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });

    let mut components = Vec::with_capacity(q);
    let mut eigenvalues = Vec::with_capacity(q);
    for &k in order.iter().take(q) {
        let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        // sign convention: the largest-magnitude entry is positive
        let pivot = v.iter().copied().fold(
            0.0f64,
            |best, x| if x.abs() > best.abs() { x } else { best },
        );
        if pivot < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        components.push(v);
        eigenvalues.push(eig.eigenvalues[k].max(0.0));
    }
    Ok(PcaModel {
        components,
        eigenvalues,
    })
}

/// K centroids in feature space.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Codebook {
    pub centroids: Vec<Vec<f64>>,
}

impl Codebook {
    pub fn new(centroids: Vec<Vec<f64>>) -> Result<Self> {
        let dim = check_rectangular(&centroids)?;
        if dim == 0 {
            return Err(Error::Parameter(
                "codebook centroids must be non-empty".into(),
            ));
        }
        Ok(Self { centroids })
    }

    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn dim(&self) -> usize {
        self.centroids[0].len()
    }

    /// Index of the nearest centroid; ties go to the lowest index.
    pub fn quantize(&self, v: &[f64]) -> Result<usize> {
        check_dim(self.dim(), v.len())?;
        Ok(nearest(&self.centroids, v).0)
    }
}

pub fn quantize_vector(v: &[f64], codebook: &Codebook) -> Result<usize> {
    codebook.quantize(v)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(centroids: &[Vec<f64>], v: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(c, v);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Restarts used by [`kmeans`]; the lowest-inertia run wins.
pub const KMEANS_RESTARTS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub assignments: Vec<usize>,
    pub codebook: Codebook,
    pub inertia: f64,
    /// Inertia after every assignment step of the winning restart.
    pub history: Vec<f64>,
    pub converged: bool,
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Indices of the first occurrence of each distinct point.
fn distinct_points(points: &[Vec<f64>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| lexicographic(&points[a], &points[b]).then(a.cmp(&b)));
    order.dedup_by(|a, b| lexicographic(&points[*a], &points[*b]).is_eq());
    order.sort_unstable();
    order
}

fn assign(points: &[Vec<f64>], centroids: &[Vec<f64>], labels: &mut [usize]) -> f64 {
    let mut inertia = 0.0;
    for (p, l) in points.iter().zip(labels.iter_mut()) {
        let (j, d) = nearest(centroids, p);
        *l = j;
        inertia += d;
    }
    inertia
}

fn update(points: &[Vec<f64>], labels: &[usize], centroids: &mut [Vec<f64>]) {
    let k = centroids.len();
    let dim = points[0].len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &l) in points.iter().zip(labels) {
        counts[l] += 1;
        for (s, x) in sums[l].iter_mut().zip(p) {
            *s += x;
        }
    }
    let empty: Vec<usize> = (0..k).filter(|&j| counts[j] == 0).collect();
    for j in 0..k {
        if counts[j] > 0 {
            for (c, s) in centroids[j].iter_mut().zip(&sums[j]) {
                *c = s / counts[j] as f64;
            }
        }
    }
    if empty.is_empty() {
        return;
    }
    // reseed each empty cluster with the point farthest from its centroid
    let mut far: Vec<(usize, f64)> = points
        .iter()
        .zip(labels)
        .enumerate()
        .map(|(i, (p, &l))| (i, sq_dist(p, &centroids[l])))
        .collect();
    far.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    for (j, (i, _)) in empty.into_iter().zip(far) {
        centroids[j] = points[i].clone();
    }
}

fn lloyd(points: &[Vec<f64>], mut centroids: Vec<Vec<f64>>, max_iters: usize) -> KMeansFit {
    let mut labels = vec![0; points.len()];
    let mut history = vec![assign(points, &centroids, &mut labels)];
    let mut next = labels.clone();
    let mut converged = false;
    for _ in 0..max_iters {
        update(points, &labels, &mut centroids);
        history.push(assign(points, &centroids, &mut next));
        if next == labels {
            converged = true;
            break;
        }
        core::mem::swap(&mut labels, &mut next);
    }
    let inertia = *history.last().expect("history is non-empty");
    KMeansFit {
        assignments: next,
        codebook: Codebook { centroids },
        inertia,
        history,
        converged,
    }
}

/// Lloyd's k-means with [`KMEANS_RESTARTS`] seeded restarts, each initialized
/// with `k` distinct points drawn uniformly at random.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64, max_iters: usize) -> Result<KMeansFit> {
    let dim = check_rectangular(points)?;
    if dim == 0 {
        return Err(Error::Parameter(
            "points must have at least one coordinate".into(),
        ));
    }
    let distinct = distinct_points(points);
    if k == 0 || k > distinct.len() {
        return Err(Error::Parameter(alloc::format!(
            "k = {k} outside 1..={} distinct points",
            distinct.len()
        )));
    }
    let mut best: Option<KMeansFit> = None;
    for restart in 0..KMEANS_RESTARTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(restart as u64);
        let picks = rand::seq::index::sample(&mut rng, distinct.len(), k);
        let centroids = picks.iter().map(|i| points[distinct[i]].clone()).collect();
        let fit = lloyd(points, centroids, max_iters);
        if best.as_ref().is_none_or(|b| fit.inertia < b.inertia) {
            best = Some(fit);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Per-point silhouette `(b − a) / max(a, b)`; members of singleton
/// clusters score 0.
pub fn silhouette(points: &[Vec<f64>], assignments: &[usize]) -> Result<Vec<f64>> {
    check_rectangular(points)?;
    if points.len() != assignments.len() {
        return Err(Error::LengthMismatch {
            left: points.len(),
            right: assignments.len(),
        });
    }
    let k = assignments.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    for &a in assignments {
        sizes[a] += 1;
    }
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return Err(Error::UndefinedSilhouette);
    }
    let mut out = Vec::with_capacity(points.len());
    let mut sums = vec![0.0; k];
    for (i, p) in points.iter().enumerate() {
        let own = assignments[i];
        if sizes[own] == 1 {
            out.push(0.0);
            continue;
        }
        sums.iter_mut().for_each(|s| *s = 0.0);
        for (q, &c) in points.iter().zip(assignments) {
            sums[c] += sq_dist(p, q).sqrt();
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        out.push(if denom > 0.0 { (b - a) / denom } else { 0.0 });
    }
    Ok(out)
}

/// Silhouette summary of one candidate `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KScore {
    pub k: usize,
    pub mean: f64,
    pub negative_fraction: f64,
}

/// Scores every `k` in the range (values with no defined silhouette are
/// skipped).
pub fn silhouette_scores(
    points: &[Vec<f64>],
    k_range: RangeInclusive<usize>,
    seed: u64,
    max_iters: usize,
) -> Result<Vec<KScore>> {
    let mut scores = Vec::new();
    for k in k_range {
        if k < 2 {
            continue;
        }
        let fit = kmeans(points, k, seed, max_iters)?;
        let s = match silhouette(points, &fit.assignments) {
            Ok(s) => s,
            Err(Error::UndefinedSilhouette) => continue,
            Err(e) => return Err(e),
        };
        let n = s.len() as f64;
        scores.push(KScore {
            k,
            mean: s.iter().sum::<f64>() / n,
            negative_fraction: s.iter().filter(|&&v| v < 0.0).count() as f64 / n,
        });
    }
    Ok(scores)
}

/// Picks the `k` with the highest mean silhouette; ties go to the smaller
/// fraction of negative silhouettes, then to the smaller `k`.
pub fn select_k(points: &[Vec<f64>], k_range: RangeInclusive<usize>, seed: u64) -> Result<usize> {
    let (lo, hi) = (*k_range.start(), *k_range.end());
    if lo > hi {
        return Err(Error::Empty("k range"));
    }
    if lo == hi {
        return Ok(lo);
    }
    let scores = silhouette_scores(points, k_range, seed, DEFAULT_MAX_ITERS)?;
    scores
        .iter()
        .min_by(|a, b| {
            b.mean
                .total_cmp(&a.mean)
                .then(a.negative_fraction.total_cmp(&b.negative_fraction))
                .then(a.k.cmp(&b.k))
        })
        .map(|s| s.k)
        .ok_or(Error::UndefinedSilhouette)
}

pub const DEFAULT_MAX_ITERS: usize = 100;
pub const DEFAULT_K: usize = 22;

/// How feature vectors become discrete attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Discretization {
    /// One scalar codebook per component: a vector yields one label per
    /// component.
    #[default]
    PerAttribute,
    /// One codebook over whole vectors: a vector yields a single label.
    PerVector,
}

/// Optional standardization + PCA applied before clustering. Constant
/// columns carry no information and are dropped first.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Projection {
    /// Input width.
    pub dim: usize,
    /// Input columns that are standardized and projected.
    pub kept: Vec<usize>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub pca: PcaModel,
}

impl Projection {
    /// Keeps `q` axes, or all of them when fewer than `q` columns vary.
    pub fn fit(data: &[Vec<f64>], q: usize) -> Result<Self> {
        let dim = check_rectangular(data)?;
        let n = data.len() as f64;
        let kept: Vec<usize> = (0..dim)
            .filter(|&c| {
                let mean = data.iter().map(|r| r[c]).sum::<f64>() / n;
                let var = data.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / n;
                !is_constant(mean, var.sqrt())
            })
            .collect();
        if kept.is_empty() {
            return Err(Error::ZeroVariance { column: 0 });
        }
        let reduced: Vec<Vec<f64>> = data
            .iter()
            .map(|r| kept.iter().map(|&c| r[c]).collect())
            .collect();
        let std = standardize(&reduced)?;
        let pca = pca_fit(&std, q.min(kept.len()))?;
        Ok(Self {
            dim,
            kept,
            means: std.means,
            stds: std.stds,
            pca,
        })
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, v.len())?;
        let z: Vec<f64> = self
            .kept
            .iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(&c, (m, s))| (v[c] - m) / s)
            .collect();
        self.pca.project(&z)
    }
}

/// Fitted mapping from continuous vectors to discrete attribute labels.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Discretizer {
    pub mode: Discretization,
    pub projection: Option<Projection>,
    /// One scalar codebook per component (per-attribute) or a single
    /// codebook (per-vector).
    pub codebooks: Vec<Codebook>,
    /// Final k-means inertia of each codebook.
    pub inertias: Vec<f64>,
    pub seed: u64,
}

impl Discretizer {
    /// Fits codebooks of at most `k` clusters on training vectors. A
    /// per-attribute codebook shrinks to the number of distinct values when
    /// a component has fewer than `k`.
    pub fn fit(
        data: &[Vec<f64>],
        mode: Discretization,
        k: usize,
        pca_components: Option<usize>,
        seed: u64,
    ) -> Result<Self> {
        check_rectangular(data)?;
        let projection = pca_components
            .map(|q| Projection::fit(data, q))
            .transpose()?;
        let projected: Vec<Vec<f64>> = match &projection {
            Some(p) => data.iter().map(|v| p.apply(v)).collect::<Result<_>>()?,
            None => data.to_vec(),
        };
        let fits: Vec<KMeansFit> = match mode {
            Discretization::PerVector => {
                let distinct = distinct_points(&projected).len();
                vec![kmeans(
                    &projected,
                    k.min(distinct),
                    seed,
                    DEFAULT_MAX_ITERS,
                )?]
            }
            Discretization::PerAttribute => {
                let dim = projected[0].len();
                (0..dim)
                    .map(|c| {
                        let column: Vec<Vec<f64>> = projected.iter().map(|v| vec![v[c]]).collect();
                        let distinct = distinct_points(&column).len();
                        kmeans(
                            &column,
                            k.min(distinct),
                            seed.wrapping_add(c as u64),
                            DEFAULT_MAX_ITERS,
                        )
                    })
                    .collect::<Result<_>>()?
            }
        };
        let inertias = fits.iter().map(|f| f.inertia).collect();
        Ok(Self {
            mode,
            projection,
            codebooks: fits.into_iter().map(|f| f.codebook).collect(),
            inertias,
            seed,
        })
    }

    /// Label count of every output attribute.
    pub fn cardinalities(&self) -> Vec<usize> {
        self.codebooks.iter().map(Codebook::k).collect()
    }

    pub fn encode(&self, v: &[f64]) -> Result<Vec<usize>> {
        let projected;
        let v = match &self.projection {
            Some(p) => {
                projected = p.apply(v)?;
                &projected[..]
            }
            None => v,
        };
        match self.mode {
            Discretization::PerVector => Ok(vec![self.codebooks[0].quantize(v)?]),
            Discretization::PerAttribute => {
                check_dim(self.codebooks.len(), v.len())?;
                self.codebooks
                    .iter()
                    .zip(v)
                    .map(|(cb, x)| cb.quantize(&[*x]))
                    .collect()
            }
        }
    }
}
