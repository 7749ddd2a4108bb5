//! Naive Bayes, tree-augmented (TAN) and forest-augmented (FAN) classifiers
//! over discrete attributes, plus the fusion of block posteriors into a
//! word-level decision.
//!
//! One classifier is trained per block position. Every attribute depends on
//! the class and on at most one other attribute; all tables are estimated
//! with add-one (Laplace) smoothing.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent f64 methods shadow these when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiscreteSample {
    pub attributes: Vec<usize>,
    pub class: usize,
}

/// Validated training set: every label lies within its attribute's
/// cardinality and every class index is below `classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDataset {
    samples: Vec<DiscreteSample>,
    cardinalities: Vec<usize>,
    classes: usize,
}

impl DiscreteDataset {
    pub fn new(
        samples: Vec<DiscreteSample>,
        cardinalities: Vec<usize>,
        classes: usize,
    ) -> Result<Self> {
        if classes == 0 {
            return Err(Error::Parameter("at least one class is required".into()));
        }
        if cardinalities.contains(&0) {
            return Err(Error::Parameter(
                "attribute cardinalities must be positive".into(),
            ));
        }
        for s in &samples {
            if s.attributes.len() != cardinalities.len() {
                return Err(Error::DimensionMismatch {
                    expected: cardinalities.len(),
                    found: s.attributes.len(),
                });
            }
            check_labels(&s.attributes, &cardinalities)?;
            if s.class >= classes {
                return Err(Error::ClassOutOfRange {
                    class: s.class,
                    classes,
                });
            }
        }
        Ok(Self {
            samples,
            cardinalities,
            classes,
        })
    }

    pub fn samples(&self) -> &[DiscreteSample] {
        &self.samples
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cardinalities
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn attributes(&self) -> usize {
        self.cardinalities.len()
    }

    fn class_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.classes];
        for s in &self.samples {
            counts[s.class] += 1;
        }
        counts
    }
}

fn check_labels(labels: &[usize], cardinalities: &[usize]) -> Result<()> {
    for (attribute, (&label, &cardinality)) in labels.iter().zip(cardinalities).enumerate() {
        if label >= cardinality {
            return Err(Error::LabelOutOfRange {
                attribute,
                label,
                cardinality,
            });
        }
    }
    Ok(())
}

/// Add-one estimate `(count + 1) / (total + cardinality)`; the cardinality
/// is `counts.len()`.
pub fn laplace_cpt(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    let denom = (total + counts.len() as u64) as f64;
    counts.iter().map(|&c| (c + 1) as f64 / denom).collect()
}

fn plogp_term(joint: u64, numer: f64, denom: f64, n: f64) -> f64 {
    if joint == 0 {
        0.0
    } else {
        joint as f64 / n * (numer / denom).ln()
    }
}

/// Plug-in estimate of `I(A_i; C)` in nats.
pub fn mutual_information(data: &DiscreteDataset, attribute: usize) -> f64 {
    let card = data.cardinalities[attribute];
    let classes = data.classes;
    let mut joint = vec![0u64; card * classes];
    for s in &data.samples {
        joint[s.attributes[attribute] * classes + s.class] += 1;
    }
    let n = data.samples.len() as f64;
    let class_counts = data.class_counts();
    let mut value = 0.0;
    for a in 0..card {
        let a_count: u64 = joint[a * classes..(a + 1) * classes].iter().sum();
        for c in 0..classes {
            let j = joint[a * classes + c];
            value += plogp_term(j, j as f64 * n, a_count as f64 * class_counts[c] as f64, n);
        }
    }
    value.max(0.0)
}

/// Plug-in estimate of `I(A_i; A_j | C)` in nats.
pub fn conditional_mutual_information(data: &DiscreteDataset, i: usize, j: usize) -> f64 {
    let (ci, cj, classes) = (data.cardinalities[i], data.cardinalities[j], data.classes);
    let mut joint = vec![0u64; ci * cj * classes];
    let mut with_i = vec![0u64; ci * classes];
    let mut with_j = vec![0u64; cj * classes];
    for s in &data.samples {
        let (a, b, c) = (s.attributes[i], s.attributes[j], s.class);
        joint[(a * cj + b) * classes + c] += 1;
        with_i[a * classes + c] += 1;
        with_j[b * classes + c] += 1;
    }
    let n = data.samples.len() as f64;
    let class_counts = data.class_counts();
    let mut value = 0.0;
    for a in 0..ci {
        for b in 0..cj {
            for c in 0..classes {
                let k = joint[(a * cj + b) * classes + c];
                value += plogp_term(
                    k,
                    k as f64 * class_counts[c] as f64,
                    with_i[a * classes + c] as f64 * with_j[b * classes + c] as f64,
                    n,
                );
            }
        }
    }
    value.max(0.0)
}

/// Symmetric matrix of pairwise conditional mutual information.
pub fn cmi_matrix(data: &DiscreteDataset) -> Vec<Vec<f64>> {
    let m = data.attributes();
    let mut out = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in i + 1..m {
            let v = conditional_mutual_information(data, i, j);
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum StructureKind {
    /// Naive Bayes: no attribute-attribute edges.
    None,
    Tree,
    Forest,
}

/// Attribute-to-attribute arcs added on top of the class-to-attribute arcs.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AugmentingStructure {
    pub kind: StructureKind,
    /// Attribute parent of each attribute, if any.
    pub parents: Vec<Option<usize>>,
    /// Attributes without an attribute parent that start a tree.
    pub roots: Vec<usize>,
}

impl AugmentingStructure {
    pub fn naive(attributes: usize) -> Self {
        Self {
            kind: StructureKind::None,
            parents: vec![None; attributes],
            roots: Vec::new(),
        }
    }

    /// Directed `(parent, child)` arcs ordered by child.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.parents
            .iter()
            .enumerate()
            .filter_map(|(child, p)| p.map(|p| (p, child)))
            .collect()
    }

    /// Arcs as sorted `(low, high)` pairs, sorted.
    pub fn undirected_edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<_> = self
            .edges()
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        e.sort_unstable();
        e
    }
}

struct DisjointSets(Vec<usize>);

impl DisjointSets {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Maximum-weight spanning tree of the complete attribute graph under
/// `weights`. Equal weights are taken in lexicographic pair order.
pub fn maximum_spanning_tree(weights: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let m = weights.len();
    let mut pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
        .collect();
    pairs.sort_by(|&(a, b), &(c, d)| {
        weights[c][d]
            .total_cmp(&weights[a][b])
            .then((a, b).cmp(&(c, d)))
    });
    let mut sets = DisjointSets((0..m).collect());
    let mut tree = Vec::with_capacity(m.saturating_sub(1));
    for (i, j) in pairs {
        if sets.union(i, j) {
            tree.push((i, j));
        }
    }
    tree
}

/// Orients undirected `edges` away from the root of each connected
/// component. `preferred` is used as the root of its own component; other
/// components start from their lowest-index vertex.
fn orient(
    m: usize,
    edges: &[(usize, usize)],
    preferred: usize,
) -> (Vec<Option<usize>>, Vec<usize>) {
    let mut adjacency = vec![Vec::new(); m];
    for &(a, b) in edges {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    adjacency.iter_mut().for_each(|n| n.sort_unstable());
    let mut parents = vec![None; m];
    let mut visited = vec![false; m];
    let mut roots = Vec::new();
    let starts = core::iter::once(preferred).chain((0..m).filter(|&v| v != preferred));
    for start in starts {
        if visited[start] {
            continue;
        }
        roots.push(start);
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in &adjacency[v] {
                if !visited[w] {
                    visited[w] = true;
                    parents[w] = Some(v);
                    queue.push_back(w);
                }
            }
        }
    }
    (parents, roots)
}

/// Root choice for TAN.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TanRoot {
    Attribute(usize),
    /// Uniformly random attribute drawn from this seed.
    Random(u64),
}

/// FAN pruning options.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FanConfig {
    /// Family-wise significance level of the independence test every kept
    /// edge must also pass (see [`independence_statistic`]; Bonferroni over
    /// all attribute pairs). `None` keeps every edge at or above the average
    /// threshold.
    pub significance: Option<f64>,
}

impl Default for FanConfig {
    fn default() -> Self {
        Self {
            significance: Some(0.05),
        }
    }
}

/// Conditional probability table `P(a_i | parent, c)` laid out as
/// `[class][parent value][value]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Cpt {
    pub parent: Option<usize>,
    pub parent_cardinality: usize,
    pub cardinality: usize,
    pub probs: Vec<f64>,
}

impl Cpt {
    pub fn row(&self, class: usize, parent_value: usize) -> &[f64] {
        let start = (class * self.parent_cardinality + parent_value) * self.cardinality;
        &self.probs[start..start + self.cardinality]
    }
}

/// Discrete Bayesian network classifier with class prior, per-attribute
/// tables and an augmenting structure.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiscreteBnClassifier {
    pub classes: usize,
    pub cardinalities: Vec<usize>,
    pub structure: AugmentingStructure,
    pub prior: Vec<f64>,
    pub cpts: Vec<Cpt>,
}

fn check_coverage(data: &DiscreteDataset) -> Result<()> {
    match data.class_counts().iter().position(|&c| c == 0) {
        Some(class) => Err(Error::MissingClass { class }),
        None => Ok(()),
    }
}

fn fit_parameters(data: &DiscreteDataset, structure: AugmentingStructure) -> DiscreteBnClassifier {
    let classes = data.classes;
    let prior = laplace_cpt(&data.class_counts());
    let cpts = (0..data.attributes())
        .map(|i| {
            let parent = structure.parents[i];
            let card = data.cardinalities[i];
            let parent_card = parent.map_or(1, |p| data.cardinalities[p]);
            let mut counts = vec![0u64; classes * parent_card * card];
            for s in &data.samples {
                let pv = parent.map_or(0, |p| s.attributes[p]);
                counts[(s.class * parent_card + pv) * card + s.attributes[i]] += 1;
            }
            let probs = counts.chunks(card).flat_map(laplace_cpt).collect();
            Cpt {
                parent,
                parent_cardinality: parent_card,
                cardinality: card,
                probs,
            }
        })
        .collect();
    DiscreteBnClassifier {
        classes,
        cardinalities: data.cardinalities.clone(),
        structure,
        prior,
        cpts,
    }
}

pub fn build_nb(data: &DiscreteDataset) -> Result<DiscreteBnClassifier> {
    check_coverage(data)?;
    Ok(fit_parameters(
        data,
        AugmentingStructure::naive(data.attributes()),
    ))
}

/// Tree-augmented naive Bayes: maximum spanning tree over the conditional
/// mutual information, directed away from `root`.
pub fn build_tan(data: &DiscreteDataset, root: TanRoot) -> Result<DiscreteBnClassifier> {
    let m = data.attributes();
    if m < 2 {
        return Err(Error::TooFewAttributes { attributes: m });
    }
    check_coverage(data)?;
    let root = match root {
        TanRoot::Attribute(r) if r < m => r,
        TanRoot::Attribute(r) => {
            return Err(Error::Parameter(alloc::format!(
                "root {r} outside {m} attributes"
            )))
        }
        TanRoot::Random(seed) => ChaCha8Rng::seed_from_u64(seed).random_range(0..m),
    };
    let tree = maximum_spanning_tree(&cmi_matrix(data));
    let (parents, roots) = orient(m, &tree, root);
    let structure = AugmentingStructure {
        kind: StructureKind::Tree,
        parents,
        roots,
    };
    Ok(fit_parameters(data, structure))
}

/// Learned FAN structure with the quantities that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct FanStructure {
    pub structure: AugmentingStructure,
    /// Undirected spanning-tree edges before pruning.
    pub tree: Vec<(usize, usize)>,
    pub cmi: Vec<Vec<f64>>,
    pub average_cmi: f64,
    pub root: usize,
}

/// Forest-augmented structure: the TAN tree rooted at the attribute most
/// informative about the class, minus every edge whose conditional mutual
/// information is below the average over all attribute pairs.
pub fn learn_fan_structure(data: &DiscreteDataset, config: &FanConfig) -> Result<FanStructure> {
    let m = data.attributes();
    if m < 2 {
        return Err(Error::TooFewAttributes { attributes: m });
    }
    let mut root = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..m {
        let mi = mutual_information(data, i);
        if mi > best {
            best = mi;
            root = i;
        }
    }
    let cmi = cmi_matrix(data);
    let pair_count = m * (m - 1) / 2;
    let average_cmi = cmi.iter().flatten().sum::<f64>() / (m * (m - 1)) as f64;
    let tree = maximum_spanning_tree(&cmi);

    let kept: Vec<(usize, usize)> = tree
        .iter()
        .copied()
        .filter(|&(i, j)| cmi[i][j] >= average_cmi)
        .filter(|&(i, j)| match config.significance {
            None => true,
            Some(alpha) => {
                let (g, df) = independence_statistic(data, i, j);
                df > 0 && g > chi_square_upper_quantile(df as f64, alpha / pair_count as f64)
            }
        })
        .collect();
    let (parents, roots) = orient(m, &kept, root);
    Ok(FanStructure {
        structure: AugmentingStructure {
            kind: StructureKind::Forest,
            parents,
            roots,
        },
        tree,
        cmi,
        average_cmi,
        root,
    })
}

pub fn build_fan(data: &DiscreteDataset) -> Result<DiscreteBnClassifier> {
    build_fan_with(data, &FanConfig::default())
}

pub fn build_fan_with(data: &DiscreteDataset, config: &FanConfig) -> Result<DiscreteBnClassifier> {
    check_coverage(data)?;
    let fan = learn_fan_structure(data, config)?;
    Ok(fit_parameters(data, fan.structure))
}

/// Likelihood-ratio statistic for `A_i ⊥ A_j | C` with its degrees of
/// freedom.
///
/// Summed over classes, the per-class statistic `G_c` adds up to
/// `2·N·I(A_i; A_j | C)`. Each `G_c` is divided by the Williams correction
/// factor of its table, and degrees of freedom count only the levels observed
/// within the class; both keep sparse tables close to their `χ²` reference.
pub fn independence_statistic(data: &DiscreteDataset, i: usize, j: usize) -> (f64, usize) {
    let (ci, cj) = (data.cardinalities[i], data.cardinalities[j]);
    let mut tables = vec![vec![0u64; ci * cj]; data.classes];
    for s in &data.samples {
        tables[s.class][s.attributes[i] * cj + s.attributes[j]] += 1;
    }
    let mut g_total = 0.0;
    let mut df_total = 0;
    for table in &tables {
        let rows: Vec<u64> = table.chunks(cj).map(|r| r.iter().sum()).collect();
        let cols: Vec<u64> = (0..cj)
            .map(|b| (0..ci).map(|a| table[a * cj + b]).sum())
            .collect();
        let n: u64 = rows.iter().sum();
        let observed = |v: &[u64]| v.iter().filter(|&&c| c > 0).count();
        let df = observed(&rows).saturating_sub(1) * observed(&cols).saturating_sub(1);
        if df == 0 {
            continue;
        }
        let n = n as f64;
        let mut g = 0.0;
        for a in 0..ci {
            for b in 0..cj {
                let k = table[a * cj + b];
                if k > 0 {
                    g += 2.0 * k as f64 * (k as f64 * n / (rows[a] as f64 * cols[b] as f64)).ln();
                }
            }
        }
        let inverse_sum = |v: &[u64]| {
            v.iter()
                .filter(|&&c| c > 0)
                .map(|&c| 1.0 / c as f64)
                .sum::<f64>()
        };
        let q = 1.0
            + (n * inverse_sum(&rows) - 1.0) * (n * inverse_sum(&cols) - 1.0)
                / (6.0 * n * df as f64);
        g_total += g / q;
        df_total += df;
    }
    (g_total, df_total)
}

/// Upper-tail standard normal quantile: `z` with `P(Z > z) = p`.
fn normal_upper_quantile(p: f64) -> f64 {
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let tail = 0.5 * libm::erfc(mid / core::f64::consts::SQRT_2);
        if tail > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Wilson–Hilferty approximation of the upper `p` quantile of `χ²(df)`.
fn chi_square_upper_quantile(df: f64, p: f64) -> f64 {
    let z = normal_upper_quantile(p);
    let h = 2.0 / (9.0 * df);
    df * (1.0 - h + z * h.sqrt()).powi(3).max(0.0)
}

/// Posterior over classes for one block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPosterior(pub Vec<f64>);

impl BlockPosterior {
    pub fn probs(&self) -> &[f64] {
        &self.0
    }
}

impl DiscreteBnClassifier {
    pub fn attributes(&self) -> usize {
        self.cardinalities.len()
    }

    /// Unnormalized log scores `ln P(c) + Σ_i ln P(a_i | parent, c)`.
    pub fn log_scores(&self, attributes: &[usize]) -> Result<Vec<f64>> {
        if attributes.len() != self.attributes() {
            return Err(Error::DimensionMismatch {
                expected: self.attributes(),
                found: attributes.len(),
            });
        }
        check_labels(attributes, &self.cardinalities)?;
        Ok((0..self.classes)
            .map(|c| {
                self.prior[c].ln()
                    + self
                        .cpts
                        .iter()
                        .zip(attributes)
                        .map(|(cpt, &a)| {
                            let pv = cpt.parent.map_or(0, |p| attributes[p]);
                            cpt.row(c, pv)[a].ln()
                        })
                        .sum::<f64>()
            })
            .collect())
    }

    pub fn block_posterior(&self, attributes: &[usize]) -> Result<BlockPosterior> {
        Ok(BlockPosterior(normalize_log(&self.log_scores(attributes)?)))
    }
}

/// Softmax of log scores (log-sum-exp normalized).
pub fn normalize_log(log_scores: &[f64]) -> Vec<f64> {
    let max = log_scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = log_scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / total).collect()
}

/// Word posterior: the component-wise mean of the block posteriors.
pub fn image_posterior(blocks: &[BlockPosterior]) -> Result<Vec<f64>> {
    let first = blocks.first().ok_or(Error::Empty("block posteriors"))?;
    let classes = first.0.len();
    let mut out = vec![0.0; classes];
    for b in blocks {
        if b.0.len() != classes {
            return Err(Error::LengthMismatch {
                left: classes,
                right: b.0.len(),
            });
        }
        for (o, p) in out.iter_mut().zip(&b.0) {
            *o += p;
        }
    }
    let n = blocks.len() as f64;
    out.iter_mut().for_each(|o| *o /= n);
    Ok(out)
}

/// Bayes decision: index of the largest entry, lowest index on ties.
pub fn decide(dist: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &p) in dist.iter().enumerate() {
        if best.is_none_or(|b| p > dist[b]) {
            best = Some(i);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(attributes: &[usize], class: usize) -> DiscreteSample {
        DiscreteSample {
            attributes: attributes.to_vec(),
            class,
        }
    }

    /// 8 samples, 4 binary attributes, 2 classes. A1 = A0; within each class
    /// (A0, A2) runs over all four combinations and A3 = A0 xor A2, so every
    /// pair except (A0, A1) is conditionally independent.
    fn one_dependent_pair() -> DiscreteDataset {
        let mut samples = Vec::new();
        for class in 0..2 {
            for (a0, a2) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                samples.push(sample(&[a0, a0, a2, a0 ^ a2], class));
            }
        }
        DiscreteDataset::new(samples, vec![2; 4], 2).unwrap()
    }

    #[test]
    fn laplace_rows() {
        assert_eq!(laplace_cpt(&[0, 0]), vec![0.5, 0.5]);
        assert_eq!(laplace_cpt(&[3, 1]), vec![4.0 / 6.0, 2.0 / 6.0]);
        for counts in [vec![5u64, 0, 2, 9], vec![0], vec![1, 1, 1]] {
            assert!((laplace_cpt(&counts).iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn dataset_validation() {
        assert!(matches!(
            DiscreteDataset::new(vec![sample(&[2], 0)], vec![2], 1),
            Err(Error::LabelOutOfRange { .. })
        ));
        assert!(matches!(
            DiscreteDataset::new(vec![sample(&[1], 3)], vec![2], 2),
            Err(Error::ClassOutOfRange { .. })
        ));
    }

    #[test]
    fn mi_of_class_copy_is_class_entropy() {
        // classes with frequencies 1/2, 1/4, 1/4; attribute copies the class
        let data = DiscreteDataset::new(
            vec![
                sample(&[0, 1], 0),
                sample(&[0, 1], 0),
                sample(&[1, 1], 1),
                sample(&[2, 1], 2),
            ],
            vec![3, 2],
            3,
        )
        .unwrap();
        let entropy = -(0.5f64 * 0.5f64.ln() + 2.0 * 0.25 * 0.25f64.ln());
        assert!((mutual_information(&data, 0) - entropy).abs() < 1e-12);
        assert_eq!(mutual_information(&data, 1), 0.0);
    }

    #[test]
    fn cmi_of_hand_dataset() {
        let data = one_dependent_pair();
        let cmi = cmi_matrix(&data);
        assert!((cmi[0][1] - core::f64::consts::LN_2).abs() < 1e-12);
        for (i, j) in [(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
            assert!(cmi[i][j].abs() < 1e-12, "({i},{j}) = {}", cmi[i][j]);
        }
    }

    #[test]
    fn nb_has_no_augmenting_edges() {
        let nb = build_nb(&one_dependent_pair()).unwrap();
        assert!(nb.structure.edges().is_empty());
        assert_eq!(nb.structure.kind, StructureKind::None);
    }

    #[test]
    fn nb_matches_hand_bayes_rule() {
        // class 0: (0,0), (0,1); class 1: (1,1), (0,1)
        let data = DiscreteDataset::new(
            vec![
                sample(&[0, 0], 0),
                sample(&[0, 1], 0),
                sample(&[1, 1], 1),
                sample(&[0, 1], 1),
            ],
            vec![2, 2],
            2,
        )
        .unwrap();
        let nb = build_nb(&data).unwrap();
        // Laplace: P(c)=3/6 each; P(A0=0|c0)=3/4, P(A0=0|c1)=2/4;
        // P(A1=1|c0)=2/4, P(A1=1|c1)=3/4
        let s0 = 0.5 * 0.75 * 0.5;
        let s1 = 0.5 * 0.5 * 0.75;
        let post = nb.block_posterior(&[0, 1]).unwrap();
        assert!((post.0[0] - s0 / (s0 + s1)).abs() < 1e-12);
        let s0 = 0.5 * 0.25 * 0.5;
        let s1 = 0.5 * 0.5 * 0.25;
        let post = nb.block_posterior(&[1, 0]).unwrap();
        assert!((post.0[0] - s0 / (s0 + s1)).abs() < 1e-12);
    }

    #[test]
    fn nb_requires_every_class() {
        let data = DiscreteDataset::new(vec![sample(&[0], 0)], vec![2], 2).unwrap();
        assert_eq!(build_nb(&data), Err(Error::MissingClass { class: 1 }));
    }

    #[test]
    fn tan_is_a_spanning_tree_and_root_independent() {
        let data = one_dependent_pair();
        let a = build_tan(&data, TanRoot::Attribute(0)).unwrap();
        let b = build_tan(&data, TanRoot::Attribute(3)).unwrap();
        assert_eq!(a.structure.edges().len(), 3);
        assert_eq!(
            a.structure.undirected_edges(),
            b.structure.undirected_edges()
        );
        assert!(a.structure.undirected_edges().contains(&(0, 1)));
        assert_eq!(a.structure.roots, vec![0]);
        assert_eq!(a.structure.parents[0], None);
        assert_eq!(b.structure.parents[3], None);
        assert!(build_tan(&data, TanRoot::Attribute(4)).is_err());
        let single = DiscreteDataset::new(vec![sample(&[0], 0)], vec![2], 1).unwrap();
        assert_eq!(
            build_tan(&single, TanRoot::Attribute(0)),
            Err(Error::TooFewAttributes { attributes: 1 })
        );
    }

    #[test]
    fn fan_keeps_exactly_the_dependent_pair() {
        let data = one_dependent_pair();
        let fan = learn_fan_structure(&data, &FanConfig { significance: None }).unwrap();
        assert!((fan.average_cmi - core::f64::consts::LN_2 / 6.0).abs() < 1e-12);
        assert_eq!(fan.structure.undirected_edges(), vec![(0, 1)]);
        // eight samples are too few for the significance filter; four copies
        // leave every CMI unchanged and pass it
        assert!(learn_fan_structure(&data, &FanConfig::default())
            .unwrap()
            .structure
            .edges()
            .is_empty());
        let copies = data.samples().iter().cycle().take(32).cloned().collect();
        let data = DiscreteDataset::new(copies, vec![2; 4], 2).unwrap();
        let fan = learn_fan_structure(&data, &FanConfig::default()).unwrap();
        assert_eq!(fan.structure.undirected_edges(), vec![(0, 1)]);
    }

    #[test]
    fn independence_statistic_by_hand() {
        // per class: (0,0)×2, (1,1)×2 → G_c = 8 ln 2, Williams q_c = 1 + 9/24
        let (g, df) = independence_statistic(&one_dependent_pair(), 0, 1);
        assert_eq!(df, 2);
        assert!((g - 2.0 * 8.0 * core::f64::consts::LN_2 / 1.375).abs() < 1e-12);
        let (g, df) = independence_statistic(&one_dependent_pair(), 0, 2);
        assert_eq!(df, 2);
        assert!(g.abs() < 1e-12);
    }

    #[test]
    fn fan_orientation_rules() {
        // root attribute 2 is most informative; components without it start
        // at their lowest index
        let (parents, roots) = orient(5, &[(0, 1), (3, 4), (1, 2)], 2);
        assert_eq!(roots, vec![2, 3]);
        assert_eq!(parents, vec![Some(1), Some(2), None, None, Some(3)]);
    }

    #[test]
    fn cpt_rows_are_distributions() {
        let data = one_dependent_pair();
        for model in [
            build_nb(&data).unwrap(),
            build_tan(&data, TanRoot::Random(3)).unwrap(),
            build_fan(&data).unwrap(),
        ] {
            assert!((model.prior.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            for cpt in &model.cpts {
                for c in 0..model.classes {
                    for pv in 0..cpt.parent_cardinality {
                        let row = cpt.row(c, pv);
                        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                        assert!(row.iter().all(|&p| p > 0.0));
                    }
                }
            }
        }
    }

    #[test]
    fn log_space_matches_direct_product() {
        let data = one_dependent_pair();
        let tan = build_tan(&data, TanRoot::Attribute(1)).unwrap();
        let attrs = [1, 0, 1, 1];
        let direct: Vec<f64> = (0..2)
            .map(|c| {
                tan.prior[c]
                    * tan
                        .cpts
                        .iter()
                        .zip(&attrs)
                        .map(|(cpt, &a)| cpt.row(c, cpt.parent.map_or(0, |p| attrs[p]))[a])
                        .product::<f64>()
            })
            .collect();
        let total: f64 = direct.iter().sum();
        let post = tan.block_posterior(&attrs).unwrap();
        for (p, d) in post.0.iter().zip(&direct) {
            assert!((p - d / total).abs() < 1e-10);
        }
        assert!(matches!(
            tan.block_posterior(&[2, 0, 0, 0]),
            Err(Error::LabelOutOfRange { .. })
        ));
    }

    #[test]
    fn uniform_model_gives_uniform_posterior() {
        let data = DiscreteDataset::new(
            vec![
                sample(&[0, 1], 0),
                sample(&[1, 0], 0),
                sample(&[0, 1], 1),
                sample(&[1, 0], 1),
            ],
            vec![2, 2],
            2,
        )
        .unwrap();
        let nb = build_nb(&data).unwrap();
        assert_eq!(nb.block_posterior(&[0, 0]).unwrap().0, vec![0.5, 0.5]);
    }

    #[test]
    fn fusion_is_the_mean() {
        let blocks = [
            BlockPosterior(vec![0.9, 0.1]),
            BlockPosterior(vec![0.6, 0.4]),
            BlockPosterior(vec![0.3, 0.7]),
        ];
        let fused = image_posterior(&blocks).unwrap();
        assert!((fused[0] - 0.6).abs() < 1e-15 && (fused[1] - 0.4).abs() < 1e-15);
        let same = vec![BlockPosterior(vec![0.2, 0.3, 0.5]); 3];
        for (f, e) in image_posterior(&same).unwrap().iter().zip([0.2, 0.3, 0.5]) {
            assert!((f - e).abs() < 1e-15);
        }
        assert!(
            image_posterior(&[BlockPosterior(vec![1.0]), BlockPosterior(vec![0.5, 0.5])]).is_err()
        );
        assert!(image_posterior(&[]).is_err());
    }

    #[test]
    fn decision_rule() {
        assert_eq!(decide(&[0.2, 0.5, 0.3]), Some(1));
        assert_eq!(decide(&[0.5, 0.5]), Some(0));
        assert_eq!(decide(&[]), None);
    }

    #[test]
    fn chi_square_quantiles_are_close() {
        // reference values of the upper 5% point
        for (df, q) in [(1.0, 3.841), (2.0, 5.991), (10.0, 18.307), (100.0, 124.342)] {
            let approx = chi_square_upper_quantile(df, 0.05);
            assert!((approx - q).abs() / q < 0.03, "df {df}: {approx}");
        }
        assert!((normal_upper_quantile(0.025) - 1.959964).abs() < 1e-5);
    }
}
