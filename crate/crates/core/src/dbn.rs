//! Coupled hidden Markov model: two hidden chains whose next states each
//! depend on both current states, each chain emitting its own discrete
//! observation stream.
//!
//! Inference runs forward-backward over the joint chain `z = (x¹, x²)` with
//! `Q1·Q2` states; for this two-chain structure the result is exact.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::RangeInclusive;

#[allow(unused_imports)] // inherent f64 methods shadow these when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const ROW_TOLERANCE: f64 = 1e-9;

/// Parameters of a two-chain coupled HMM, shared across time.
///
/// Chain `l ∈ {0, 1}` stores
/// - `pi[l][i]` = P(X₁ˡ = i)
/// - `trans[l][(i·Q2 + j)·Qₗ + k]` = P(Xₜˡ = k | Xₜ₋₁¹ = i, Xₜ₋₁² = j)
/// - `emit[l][j·Mₗ + k]` = P(Yₜˡ = k | Xₜˡ = j)
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoupledHmm {
    pub states: [usize; 2],
    pub symbols: [usize; 2],
    pub pi: [Vec<f64>; 2],
    pub trans: [Vec<f64>; 2],
    pub emit: [Vec<f64>; 2],
}

fn check_rows(values: &[f64], row_len: usize, what: &str) -> Result<()> {
    if values.iter().any(|&v| !v.is_finite() || v < 0.0) {
        return Err(Error::InvalidDistribution(alloc::format!(
            "{what}: negative or non-finite entry"
        )));
    }
    for (r, row) in values.chunks(row_len).enumerate() {
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_TOLERANCE {
            return Err(Error::InvalidDistribution(alloc::format!(
                "{what}: row {r} sums to {sum}"
            )));
        }
    }
    Ok(())
}

fn random_rows(rng: &mut ChaCha8Rng, rows: usize, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(rows * len);
    for _ in 0..rows {
        let row: Vec<f64> = (0..len).map(|_| rng.random_range(0.01..1.0)).collect();
        let sum: f64 = row.iter().sum();
        out.extend(row.into_iter().map(|v| v / sum));
    }
    out
}

fn draw(rng: &mut ChaCha8Rng, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

impl CoupledHmm {
    pub fn new(
        states: [usize; 2],
        symbols: [usize; 2],
        pi: [Vec<f64>; 2],
        trans: [Vec<f64>; 2],
        emit: [Vec<f64>; 2],
    ) -> Result<Self> {
        if states.contains(&0) || symbols.contains(&0) {
            return Err(Error::Parameter(
                "state and symbol counts must be positive".into(),
            ));
        }
        let pairs = states[0] * states[1];
        for l in 0..2 {
            let expected = [states[l], pairs * states[l], states[l] * symbols[l]];
            let found = [pi[l].len(), trans[l].len(), emit[l].len()];
            for (e, f) in expected.into_iter().zip(found) {
                if e != f {
                    return Err(Error::DimensionMismatch {
                        expected: e,
                        found: f,
                    });
                }
            }
            check_rows(&pi[l], states[l], "initial distribution")?;
            check_rows(&trans[l], states[l], "transition table")?;
            check_rows(&emit[l], symbols[l], "emission table")?;
        }
        Ok(Self {
            states,
            symbols,
            pi,
            trans,
            emit,
        })
    }

    /// Uniform-random positive rows, normalized.
    pub fn random(states: [usize; 2], symbols: [usize; 2], rng: &mut ChaCha8Rng) -> Result<Self> {
        if states.contains(&0) || symbols.contains(&0) {
            return Err(Error::Parameter(
                "state and symbol counts must be positive".into(),
            ));
        }
        let pairs = states[0] * states[1];
        let mut part = |l: usize| {
            (
                random_rows(rng, 1, states[l]),
                random_rows(rng, pairs, states[l]),
                random_rows(rng, states[l], symbols[l]),
            )
        };
        let (p0, a0, b0) = part(0);
        let (p1, a1, b1) = part(1);
        Ok(Self {
            states,
            symbols,
            pi: [p0, p1],
            trans: [a0, a1],
            emit: [b0, b1],
        })
    }

    pub fn joint_states(&self) -> usize {
        self.states[0] * self.states[1]
    }

    pub fn a(&self, chain: usize, i: usize, j: usize, k: usize) -> f64 {
        self.trans[chain][(i * self.states[1] + j) * self.states[chain] + k]
    }

    pub fn b(&self, chain: usize, j: usize, k: usize) -> f64 {
        self.emit[chain][j * self.symbols[chain] + k]
    }

    /// `T(z, z')` over joint states, row-major.
    fn joint_transition(&self) -> Vec<f64> {
        let [q1, q2] = self.states;
        let n = q1 * q2;
        let mut t = vec![0.0; n * n];
        for i in 0..q1 {
            for j in 0..q2 {
                let row = &mut t[(i * q2 + j) * n..(i * q2 + j + 1) * n];
                for k1 in 0..q1 {
                    let a1 = self.a(0, i, j, k1);
                    for k2 in 0..q2 {
                        row[k1 * q2 + k2] = a1 * self.a(1, i, j, k2);
                    }
                }
            }
        }
        t
    }

    fn joint_initial(&self) -> Vec<f64> {
        self.pi[0]
            .iter()
            .flat_map(|&p1| self.pi[1].iter().map(move |&p2| p1 * p2))
            .collect()
    }

    fn joint_emission(&self, y1: usize, y2: usize) -> Vec<f64> {
        let [q1, q2] = self.states;
        (0..q1)
            .flat_map(|i| (0..q2).map(move |j| (i, j)))
            .map(|(i, j)| self.b(0, i, y1) * self.b(1, j, y2))
            .collect()
    }

    fn check_observation(&self, obs: &ObservationPair) -> Result<()> {
        for (chain, seq) in [&obs.y1, &obs.y2].into_iter().enumerate() {
            if let Some(&symbol) = seq.iter().find(|&&s| s >= self.symbols[chain]) {
                return Err(Error::SymbolOutOfRange {
                    chain,
                    symbol,
                    symbols: self.symbols[chain],
                });
            }
        }
        Ok(())
    }

    /// Draws one observation pair of length `len` together with its hidden
    /// joint-state path.
    pub fn sample(
        &self,
        len: usize,
        rng: &mut ChaCha8Rng,
    ) -> (ObservationPair, Vec<(usize, usize)>) {
        let mut path = Vec::with_capacity(len);
        let (mut y1, mut y2) = (Vec::with_capacity(len), Vec::with_capacity(len));
        let [q1, q2] = self.states;
        let [m1, m2] = self.symbols;
        for t in 0..len {
            let (i, j) = if t == 0 {
                (draw(rng, &self.pi[0]), draw(rng, &self.pi[1]))
            } else {
                let (pi, pj) = path[t - 1];
                let base = pi * q2 + pj;
                (
                    draw(rng, &self.trans[0][base * q1..(base + 1) * q1]),
                    draw(rng, &self.trans[1][base * q2..(base + 1) * q2]),
                )
            };
            path.push((i, j));
            y1.push(draw(rng, &self.emit[0][i * m1..(i + 1) * m1]));
            y2.push(draw(rng, &self.emit[1][j * m2..(j + 1) * m2]));
        }
        (ObservationPair { y1, y2 }, path)
    }
}

/// Horizontal-scan and vertical-scan label sequences of equal length.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ObservationPair {
    pub y1: Vec<usize>,
    pub y2: Vec<usize>,
}

impl ObservationPair {
    /// Pads the shorter stream by repeating its last symbol.
    pub fn new(mut y1: Vec<usize>, mut y2: Vec<usize>) -> Result<Self> {
        let (Some(&l1), Some(&l2)) = (y1.last(), y2.last()) else {
            return Err(Error::Empty("observation sequence"));
        };
        let len = y1.len().max(y2.len());
        y1.resize(len, l1);
        y2.resize(len, l2);
        Ok(Self { y1, y2 })
    }

    pub fn len(&self) -> usize {
        self.y1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y1.is_empty()
    }
}

/// Smoothed posteriors from one forward-backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Posteriors {
    pub joint_states: usize,
    pub chain_states: [usize; 2],
    /// `gamma[t·Z + z]` = P(Zₜ = z | obs), with `z = i·Q2 + j`.
    pub gamma: Vec<f64>,
    /// `xi[l][(t−1)·Z·Qₗ + z·Qₗ + k]` = P(Zₜ₋₁ = z, Xₜˡ = k | obs) for
    /// `t ≥ 1`.
    pub xi: [Vec<f64>; 2],
}

impl Posteriors {
    pub fn gamma_at(&self, t: usize) -> &[f64] {
        &self.gamma[t * self.joint_states..(t + 1) * self.joint_states]
    }
}

struct ForwardPass {
    /// Scaled forward variables, each step summing to one.
    alpha: Vec<f64>,
    scale: Vec<f64>,
    emissions: Vec<f64>,
    transition: Vec<f64>,
}

fn forward(m: &CoupledHmm, obs: &ObservationPair) -> Option<ForwardPass> {
    let n = m.joint_states();
    let len = obs.len();
    let transition = m.joint_transition();
    let mut emissions = Vec::with_capacity(len * n);
    for t in 0..len {
        emissions.extend(m.joint_emission(obs.y1[t], obs.y2[t]));
    }
    let mut alpha = vec![0.0; len * n];
    let mut scale = vec![0.0; len];
    for (z, a) in m.joint_initial().into_iter().enumerate() {
        alpha[z] = a * emissions[z];
    }
    for t in 0..len {
        if t > 0 {
            let (prev, cur) = alpha.split_at_mut(t * n);
            let prev = &prev[(t - 1) * n..];
            let cur = &mut cur[..n];
            for (z, &a) in prev.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (c, &tr) in cur.iter_mut().zip(&transition[z * n..(z + 1) * n]) {
                    *c += a * tr;
                }
            }
            for (c, e) in cur.iter_mut().zip(&emissions[t * n..(t + 1) * n]) {
                *c *= e;
            }
        }
        let step = &mut alpha[t * n..(t + 1) * n];
        let c: f64 = step.iter().sum();
        if c <= 0.0 {
            return None;
        }
        step.iter_mut().for_each(|a| *a /= c);
        scale[t] = c;
    }
    Some(ForwardPass {
        alpha,
        scale,
        emissions,
        transition,
    })
}

/// `ln P(y¹, y² | m)`; `-∞` when the observations are impossible under `m`.
pub fn log_likelihood(m: &CoupledHmm, obs: &ObservationPair) -> Result<f64> {
    m.check_observation(obs)?;
    if obs.is_empty() {
        return Ok(0.0);
    }
    Ok(forward(m, obs).map_or(f64::NEG_INFINITY, |f| f.scale.iter().map(|c| c.ln()).sum()))
}

/// Exact log-likelihood and smoothed posteriors. Posteriors are `None` when
/// the sequence has zero probability.
pub fn joint_inference(m: &CoupledHmm, obs: &ObservationPair) -> Result<(f64, Option<Posteriors>)> {
    m.check_observation(obs)?;
    if obs.is_empty() {
        return Err(Error::Empty("observation sequence"));
    }
    let Some(fw) = forward(m, obs) else {
        return Ok((f64::NEG_INFINITY, None));
    };
    let n = m.joint_states();
    let len = obs.len();
    let [q1, q2] = m.states;

    let mut beta = vec![1.0; len * n];
    for t in (0..len - 1).rev() {
        let (cur, next) = beta.split_at_mut((t + 1) * n);
        let cur = &mut cur[t * n..];
        let weighted: Vec<f64> = next[..n]
            .iter()
            .zip(&fw.emissions[(t + 1) * n..(t + 2) * n])
            .map(|(b, e)| b * e / fw.scale[t + 1])
            .collect();
        for (z, c) in cur.iter_mut().enumerate() {
            *c = fw.transition[z * n..(z + 1) * n]
                .iter()
                .zip(&weighted)
                .map(|(tr, w)| tr * w)
                .sum();
        }
    }

    let gamma: Vec<f64> = fw.alpha.iter().zip(&beta).map(|(a, b)| a * b).collect();
    let mut xi = [
        vec![0.0; len.saturating_sub(1) * n * q1],
        vec![0.0; len.saturating_sub(1) * n * q2],
    ];
    for t in 1..len {
        let weighted: Vec<f64> = beta[t * n..(t + 1) * n]
            .iter()
            .zip(&fw.emissions[t * n..(t + 1) * n])
            .map(|(b, e)| b * e / fw.scale[t])
            .collect();
        for z in 0..n {
            let a = fw.alpha[(t - 1) * n + z];
            if a == 0.0 {
                continue;
            }
            let row = &fw.transition[z * n..(z + 1) * n];
            let x1 = &mut xi[0][((t - 1) * n + z) * q1..((t - 1) * n + z + 1) * q1];
            for k1 in 0..q1 {
                x1[k1] += (0..q2)
                    .map(|k2| a * row[k1 * q2 + k2] * weighted[k1 * q2 + k2])
                    .sum::<f64>();
            }
            let x2 = &mut xi[1][((t - 1) * n + z) * q2..((t - 1) * n + z + 1) * q2];
            for k2 in 0..q2 {
                x2[k2] += (0..q1)
                    .map(|k1| a * row[k1 * q2 + k2] * weighted[k1 * q2 + k2])
                    .sum::<f64>();
            }
        }
    }
    let loglik = fw.scale.iter().map(|c| c.ln()).sum();
    Ok((
        loglik,
        Some(Posteriors {
            joint_states: n,
            chain_states: m.states,
            gamma,
            xi,
        }),
    ))
}

fn normalize_rows(counts: &[f64], row_len: usize, floor: f64, previous: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(counts.len());
    for (row, old) in counts.chunks(row_len).zip(previous.chunks(row_len)) {
        let total: f64 = row.iter().map(|c| c + floor).sum();
        if total > 0.0 {
            out.extend(row.iter().map(|c| (c + floor) / total));
        } else {
            out.extend_from_slice(old);
        }
    }
    out
}

/// One EM iteration without smoothing. Rows that received no expected
/// counts keep their previous values. Returns the re-estimated model and
/// the total log-likelihood of `data` under the input model.
pub fn em_step(m: &CoupledHmm, data: &[ObservationPair]) -> Result<(CoupledHmm, f64)> {
    em_step_with_floor(m, data, 0.0)
}

/// EM iteration that adds `floor` to every expected-count cell before
/// renormalizing.
pub fn em_step_with_floor(
    m: &CoupledHmm,
    data: &[ObservationPair],
    floor: f64,
) -> Result<(CoupledHmm, f64)> {
    if data.is_empty() {
        return Err(Error::Empty("training sequences"));
    }
    if !(floor >= 0.0 && floor.is_finite()) {
        return Err(Error::Parameter(
            "count floor must be finite and non-negative".into(),
        ));
    }
    let [q1, q2] = m.states;
    let [m1, m2] = m.symbols;
    let n = q1 * q2;
    let mut pi_counts = [vec![0.0; q1], vec![0.0; q2]];
    let mut trans_counts = [vec![0.0; n * q1], vec![0.0; n * q2]];
    let mut emit_counts = [vec![0.0; q1 * m1], vec![0.0; q2 * m2]];
    let mut total = 0.0;
    for obs in data {
        let (ll, post) = joint_inference(m, obs)?;
        total += ll;
        let Some(post) = post else { continue };
        for t in 0..obs.len() {
            let g = post.gamma_at(t);
            for i in 0..q1 {
                for j in 0..q2 {
                    let p = g[i * q2 + j];
                    if t == 0 {
                        pi_counts[0][i] += p;
                        pi_counts[1][j] += p;
                    }
                    emit_counts[0][i * m1 + obs.y1[t]] += p;
                    emit_counts[1][j * m2 + obs.y2[t]] += p;
                }
            }
        }
        for l in 0..2 {
            let per_step = n * m.states[l];
            for step in post.xi[l].chunks(per_step) {
                for (c, x) in trans_counts[l].iter_mut().zip(step) {
                    *c += x;
                }
            }
        }
    }
    let next = CoupledHmm {
        states: m.states,
        symbols: m.symbols,
        pi: [
            normalize_rows(&pi_counts[0], q1, floor, &m.pi[0]),
            normalize_rows(&pi_counts[1], q2, floor, &m.pi[1]),
        ],
        trans: [
            normalize_rows(&trans_counts[0], q1, floor, &m.trans[0]),
            normalize_rows(&trans_counts[1], q2, floor, &m.trans[1]),
        ],
        emit: [
            normalize_rows(&emit_counts[0], m1, floor, &m.emit[0]),
            normalize_rows(&emit_counts[1], m2, floor, &m.emit[1]),
        ],
    };
    Ok((next, total))
}

/// Sum of per-sequence log-likelihoods.
pub fn total_log_likelihood(m: &CoupledHmm, data: &[ObservationPair]) -> Result<f64> {
    data.iter().map(|o| log_likelihood(m, o)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub seed: u64,
    pub max_iters: usize,
    /// Relative log-likelihood change below which EM stops.
    pub tol: f64,
    pub restarts: usize,
    /// Added to every expected-count cell in each M-step.
    pub floor: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            max_iters: 100,
            tol: 1e-4,
            restarts: 3,
            floor: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub model: CoupledHmm,
    /// Training log-likelihood of the returned model.
    pub log_likelihood: f64,
    /// EM iterations run in the winning restart.
    pub iterations: usize,
}

/// Seeded EM from random starts; keeps the restart with the highest final
/// training log-likelihood (earliest restart on ties).
pub fn train_class_model(
    data: &[ObservationPair],
    states: [usize; 2],
    symbols: [usize; 2],
    cfg: &TrainConfig,
) -> Result<TrainedModel> {
    if data.is_empty() {
        return Err(Error::Empty("training sequences"));
    }
    if cfg.restarts == 0 || cfg.max_iters == 0 {
        return Err(Error::Parameter(
            "restarts and max_iters must be positive".into(),
        ));
    }
    let mut best: Option<TrainedModel> = None;
    for restart in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(restart as u64);
        let mut model = CoupledHmm::random(states, symbols, &mut rng)?;
        let mut ll = f64::NEG_INFINITY;
        let mut iterations = 0;
        while iterations < cfg.max_iters {
            let (next, before) = em_step_with_floor(&model, data, cfg.floor)?;
            model = next;
            ll = total_log_likelihood(&model, data)?;
            iterations += 1;
            let change = (ll - before).abs() / before.abs().max(f64::MIN_POSITIVE);
            if !(change >= cfg.tol) {
                break;
            }
        }
        if best.as_ref().is_none_or(|b| ll > b.log_likelihood) {
            best = Some(TrainedModel {
                model,
                log_likelihood: ll,
                iterations,
            });
        }
    }
    Ok(best.expect("at least one restart"))
}

/// One coupled HMM per class.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassModelBank {
    pub models: Vec<CoupledHmm>,
    pub q_per_class: Vec<[usize; 2]>,
}

impl ClassModelBank {
    pub fn new(models: Vec<CoupledHmm>) -> Result<Self> {
        if models.is_empty() {
            return Err(Error::Empty("model bank"));
        }
        let q_per_class = models.iter().map(|m| m.states).collect();
        Ok(Self {
            models,
            q_per_class,
        })
    }

    pub fn classes(&self) -> usize {
        self.models.len()
    }
}

/// Maximum-likelihood class (lowest index on ties) and the per-class
/// log-likelihoods.
pub fn classify(bank: &ClassModelBank, obs: &ObservationPair) -> Result<(usize, Vec<f64>)> {
    let scores = bank
        .models
        .iter()
        .map(|m| log_likelihood(m, obs))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (c, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = c;
        }
    }
    Ok((best, scores))
}

/// Deterministic stand-in for inference wall time: joint-chain transition
/// work `(Q1·Q2)²` per time step, summed over the scored sequences.
pub fn inference_cost(states: [usize; 2], total_steps: usize) -> u64 {
    let n = (states[0] * states[1]) as u64;
    n * n * total_steps as u64
}

/// Validation outcome of one class at one state count.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StatePoint {
    pub q: usize,
    /// Percent of the class's validation samples recognized.
    pub rate: f64,
    pub cost: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateSelection {
    pub q_per_class: Vec<usize>,
    /// Rate-vs-Q curve per class.
    pub curves: Vec<Vec<StatePoint>>,
    pub bank: ClassModelBank,
}

/// Chooses per-class state counts from models already trained at every
/// `q` (`trained[q_index][class]`, with `Q1 = Q2 = qs[q_index]`).
///
/// At each `q` all classes are scored with the bank of that `q`; a class
/// takes the `q` with the highest validation rate, then the lowest
/// inference cost, then the smallest `q`.
pub fn select_states_from(
    qs: &[usize],
    trained: Vec<Vec<CoupledHmm>>,
    validation: &[Vec<ObservationPair>],
) -> Result<StateSelection> {
    if qs.is_empty() {
        return Err(Error::Empty("state-count range"));
    }
    if trained.len() != qs.len() {
        return Err(Error::LengthMismatch {
            left: qs.len(),
            right: trained.len(),
        });
    }
    let classes = validation.len();
    let steps: Vec<usize> = validation
        .iter()
        .map(|v| v.iter().map(ObservationPair::len).sum())
        .collect();
    let mut curves = vec![Vec::with_capacity(qs.len()); classes];
    for (&q, models) in qs.iter().zip(&trained) {
        if models.len() != classes {
            return Err(Error::LengthMismatch {
                left: classes,
                right: models.len(),
            });
        }
        let bank = ClassModelBank::new(models.clone())?;
        for (c, samples) in validation.iter().enumerate() {
            let mut correct = 0usize;
            for obs in samples {
                if classify(&bank, obs)?.0 == c {
                    correct += 1;
                }
            }
            let rate = if samples.is_empty() {
                0.0
            } else {
                100.0 * correct as f64 / samples.len() as f64
            };
            curves[c].push(StatePoint {
                q,
                rate,
                cost: inference_cost([q, q], steps[c]),
            });
        }
    }
    let mut q_per_class = Vec::with_capacity(classes);
    let mut models = Vec::with_capacity(classes);
    for (c, curve) in curves.iter().enumerate() {
        let (idx, _) = curve
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                b.rate
                    .total_cmp(&a.rate)
                    .then(a.cost.cmp(&b.cost))
                    .then(a.q.cmp(&b.q))
            })
            .expect("non-empty range");
        q_per_class.push(qs[idx]);
        models.push(trained[idx][c].clone());
    }
    Ok(StateSelection {
        q_per_class,
        curves,
        bank: ClassModelBank::new(models)?,
    })
}

/// Trains every class at each `Q1 = Q2 = q` in `q_range` and selects per
/// class by validation recognition rate. Each (class, q) pair trains with
/// seed `cfg.seed + class`.
pub fn select_states(
    train: &[Vec<ObservationPair>],
    validation: &[Vec<ObservationPair>],
    q_range: RangeInclusive<usize>,
    symbols: [usize; 2],
    cfg: &TrainConfig,
) -> Result<StateSelection> {
    if train.len() != validation.len() {
        return Err(Error::LengthMismatch {
            left: train.len(),
            right: validation.len(),
        });
    }
    let qs: Vec<usize> = q_range.collect();
    let mut trained = Vec::with_capacity(qs.len());
    for &q in &qs {
        let models = train
            .iter()
            .enumerate()
            .map(|(c, data)| {
                let cfg = TrainConfig {
                    seed: cfg.seed.wrapping_add(c as u64),
                    ..*cfg
                };
                train_class_model(data, [q, q], symbols, &cfg).map(|t| t.model)
            })
            .collect::<Result<Vec<_>>>()?;
        trained.push(models);
    }
    select_states_from(&qs, trained, validation)
}
