//! Delay processes, effective delay, and the regime probabilities that weight
//! the per-node Riccati recursions.
//!
//! The communication delay `dⁱ_t ∈ {0,…,D}` of each direction is i.i.d. over
//! time. The effective delay `eⁱ_t = min_k (dⁱ_{t−k} + k)` is the true age of
//! the freshest information about plant `i` available to the other
//! controller, and obeys `e_{t+1} = min(d_{t+1}, e_t + 1)`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::infograph::{InfoGraph, NodeId};
use crate::linalg::Mat;
use crate::plant::Plant;

const PMF_TOL: f64 = 1e-12;
const STATIONARY_TOL: f64 = 1e-10;

/// Per-direction delay pmfs over `{0,…,D}`. Direction `i` carries information
/// about plant `i` to the other controller.
#[derive(Clone, Debug, PartialEq)]
pub struct DelayModel {
    delay: usize,
    pmf: [Vec<f64>; 2],
}

impl DelayModel {
    /// Build from `(delay, probability)` pairs. Repeated delays accumulate.
    pub fn new(delay: usize, pmf1: &[(usize, f64)], pmf2: &[(usize, f64)]) -> Result<Self> {
        if delay < 1 {
            return Err(Error::validation("plant.delay", "must be at least 1"));
        }
        let pmf = [
            dense_pmf(delay, pmf1, "delay.pmf1")?,
            dense_pmf(delay, pmf2, "delay.pmf2")?,
        ];
        Ok(DelayModel { delay, pmf })
    }

    /// Both directions always see delay `c`.
    pub fn constant(delay: usize, c: usize) -> Result<Self> {
        Self::new(delay, &[(c, 1.0)], &[(c, 1.0)])
    }

    /// Same pmf in both directions.
    pub fn symmetric(delay: usize, pmf: &[(usize, f64)]) -> Result<Self> {
        Self::new(delay, pmf, pmf)
    }

    pub fn delay(&self) -> usize {
        self.delay
    }

    /// Dense pmf over `{0,…,D}` for direction `plant`.
    pub fn pmf(&self, plant: Plant) -> &[f64] {
        &self.pmf[plant.index()]
    }

    /// `P(dⁱ ≤ k)`, exactly 1 from `k = D` on.
    pub fn cdf(&self, plant: Plant, k: usize) -> f64 {
        if k >= self.delay {
            return 1.0;
        }
        self.pmf(plant).iter().take(k + 1).sum::<f64>().min(1.0)
    }

    pub fn sample<R: Rng + ?Sized>(&self, plant: Plant, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let pmf = self.pmf(plant);
        let mut acc = 0.0;
        for (d, p) in pmf.iter().enumerate() {
            acc += p;
            if u < acc {
                return d;
            }
        }
        // Rounding can leave `acc` a hair below 1; fall back to the largest supported delay.
        pmf.iter().rposition(|p| *p > 0.0).unwrap_or(self.delay)
    }

    /// Sparse `(delay, probability)` listing for serialization.
    pub fn pairs(&self, plant: Plant) -> Vec<(usize, f64)> {
        self.pmf(plant)
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(d, p)| (d, *p))
            .collect()
    }
}

fn dense_pmf(delay: usize, pairs: &[(usize, f64)], field: &str) -> Result<Vec<f64>> {
    let mut pmf = vec![0.0; delay + 1];
    for &(d, p) in pairs {
        if d > delay {
            return Err(Error::validation(
                field,
                format!("delay {d} outside support 0..={delay}"),
            ));
        }
        if !p.is_finite() || p < 0.0 {
            return Err(Error::validation(
                field,
                format!("probability {p} for delay {d} is not a nonnegative number"),
            ));
        }
        pmf[d] += p;
    }
    let total: f64 = pmf.iter().sum();
    if (total - 1.0).abs() > PMF_TOL {
        return Err(Error::validation(
            field,
            format!("probabilities sum to {total}, expected 1"),
        ));
    }
    pmf.iter_mut().for_each(|p| *p /= total);
    Ok(pmf)
}

/// Effective delay from the last `D` delays, oldest first:
/// `window = (d_{t−D+1}, …, d_t)`, result `min_k d_{t−k} + k`.
pub fn effective_delay_windowed(window: &[usize]) -> usize {
    window
        .iter()
        .rev()
        .enumerate()
        .map(|(k, d)| d + k)
        .min()
        .unwrap_or(0)
}

/// Windowed effective delay at every `t` of `seq`, taking `d_τ = D` for `τ < 0`.
pub fn effective_delays_windowed(seq: &[usize], delay: usize) -> Vec<usize> {
    (0..seq.len())
        .map(|t| {
            let window: Vec<usize> = (0..delay)
                .rev()
                .map(|k| if t >= k { seq[t - k] } else { delay })
                .collect();
            effective_delay_windowed(&window)
        })
        .collect()
}

/// One-step form `e_t = min(d_t, e_{t−1} + 1)`.
pub fn effective_delay_step(e_prev: usize, d_new: usize) -> usize {
    d_new.min(e_prev + 1)
}

/// Step recursion over a whole sequence, seeded with `e_0 = d_0`.
pub fn effective_delays_stepped(seq: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(seq.len());
    for (t, &d) in seq.iter().enumerate() {
        let e = if t == 0 { d } else { effective_delay_step(out[t - 1], d) };
        out.push(e);
    }
    out
}

/// Effective-delay pair as seen by the closed loop.
///
/// Nothing has been transmitted at `t = 0`, so the process starts at
/// `e_0 = (D, D)` and the delay drawn for `t = 0` is never used.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EffectiveDelayProcess {
    delay: usize,
    e: [usize; 2],
}

impl EffectiveDelayProcess {
    pub fn new(delay: usize) -> Self {
        EffectiveDelayProcess {
            delay,
            e: [delay, delay],
        }
    }

    pub fn current(&self) -> [usize; 2] {
        self.e
    }

    pub fn advance(&mut self, d: [usize; 2]) -> [usize; 2] {
        for (e, d) in self.e.iter_mut().zip(d) {
            *e = effective_delay_step(*e, d.min(self.delay));
        }
        self.e
    }

    /// Effective delays for `t = 0..len`, using `d_t` for `t ≥ 1` only.
    pub fn trajectory(delay: usize, d: [&[usize]; 2]) -> Vec<[usize; 2]> {
        let len = d[0].len().min(d[1].len());
        let mut proc = EffectiveDelayProcess::new(delay);
        let mut out = Vec::with_capacity(len);
        for (t, (&d1, &d2)) in d[0].iter().zip(d[1]).enumerate() {
            if t > 0 {
                proc.advance([d1, d2]);
            }
            out.push(proc.current());
        }
        out
    }
}

/// How the stationary distribution was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StationaryMethod {
    LinearSolve,
    CesaroAverage,
}

/// Markov chain of `eⁱ_t` under i.i.d. delays.
#[derive(Clone, Debug)]
pub struct EffectiveDelayChain {
    pub plant: Plant,
    pub pmf: Vec<f64>,
    /// `transition[(e, e')] = P(e_{t+1} = e' | e_t = e)`.
    pub transition: Mat,
    pub stationary: Vec<f64>,
    /// States outside the single closed class; they carry no stationary mass.
    pub transient: Vec<usize>,
    pub method: StationaryMethod,
}

impl EffectiveDelayChain {
    pub fn states(&self) -> usize {
        self.stationary.len()
    }

    /// `‖πP − π‖₁`.
    pub fn stationary_residual(&self) -> f64 {
        stationary_residual(&self.transition, &self.stationary)
    }

    /// Stationary `P(e ≤ k)`.
    pub fn occupancy_at_most(&self, k: usize) -> f64 {
        self.stationary.iter().take(k + 1).sum()
    }

    /// `P(e_{t+1} ≤ k | e_t ≥ k)` under the stationary law, or `None` when the
    /// conditioning event has zero mass.
    pub fn absorb_given_live(&self, k: usize) -> Option<f64> {
        let n = self.states();
        let live: f64 = self.stationary[k.min(n)..].iter().sum();
        if live <= 0.0 {
            return None;
        }
        let mut num = 0.0;
        for e in k..n {
            let to_low: f64 = (0..=k.min(n - 1)).map(|e2| self.transition[(e, e2)]).sum();
            num += self.stationary[e] * to_low;
        }
        Some(num / live)
    }

    /// Stationary `P(e_{t+1} = 0)`.
    pub fn fresh_absorption(&self) -> f64 {
        (0..self.states())
            .map(|e| self.stationary[e] * self.transition[(e, 0)])
            .sum()
    }
}

pub fn build_chain(model: &DelayModel, plant: Plant) -> EffectiveDelayChain {
    let delay = model.delay();
    let n = delay + 1;
    let pmf = model.pmf(plant).to_vec();
    let mut p = Mat::zeros(n, n);
    for e in 0..n {
        for (d, &prob) in pmf.iter().enumerate() {
            p[(e, effective_delay_step(e, d).min(delay))] += prob;
        }
    }

    let closed = closed_class(&p, &pmf);
    let transient: Vec<usize> = (0..n).filter(|s| !closed[*s]).collect();

    let (stationary, method) = match solve_stationary(&p) {
        Some(pi) if stationary_residual(&p, &pi) <= STATIONARY_TOL => {
            (pi, StationaryMethod::LinearSolve)
        }
        _ => (cesaro_stationary(&p, &pmf), StationaryMethod::CesaroAverage),
    };

    EffectiveDelayChain {
        plant,
        pmf,
        transition: p,
        stationary,
        transient,
        method,
    }
}

/// States reachable from the smallest supported delay. That state is reachable
/// from everywhere, so this is the unique closed class.
fn closed_class(p: &Mat, pmf: &[f64]) -> Vec<bool> {
    let n = p.nrows();
    let start = pmf.iter().position(|x| *x > 0.0).unwrap_or(0);
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(s) = stack.pop() {
        for s2 in 0..n {
            if p[(s, s2)] > 0.0 && !seen[s2] {
                seen[s2] = true;
                stack.push(s2);
            }
        }
    }
    seen
}

/// `(Pᵀ − I) π = 0` with the last equation replaced by `Σ π = 1`.
fn solve_stationary(p: &Mat) -> Option<Vec<f64>> {
    let n = p.nrows();
    let mut m = p.transpose() - Mat::identity(n, n);
    for j in 0..n {
        m[(n - 1, j)] = 1.0;
    }
    let mut rhs = nalgebra::DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let pi = m.lu().solve(&rhs)?;
    if pi.iter().any(|x| !x.is_finite() || *x < -STATIONARY_TOL) {
        return None;
    }
    let mut pi: Vec<f64> = pi.iter().map(|x| x.max(0.0)).collect();
    let s: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|x| *x /= s);
    Some(pi)
}

fn cesaro_stationary(p: &Mat, start: &[f64]) -> Vec<f64> {
    let n = p.nrows();
    let mut mu = nalgebra::RowDVector::from_row_slice(start);
    let mut acc = nalgebra::RowDVector::zeros(n);
    let mut prev = acc.clone();
    for k in 1..=1_000_000usize {
        acc += &mu;
        mu = &mu * p;
        if k % 1000 == 0 {
            let avg = &acc / k as f64;
            let change = (&avg - &prev).abs().sum();
            prev = avg;
            if change < 1e-13 {
                break;
            }
        }
    }
    let s = acc.sum();
    acc.iter().map(|x| x / s).collect()
}

fn stationary_residual(p: &Mat, pi: &[f64]) -> f64 {
    let row = nalgebra::RowDVector::from_row_slice(pi);
    (&row * p - &row).abs().sum()
}

/// Per-node absorption probabilities `pʳ` and their complements `qʳ`.
///
/// For a branch-`i` node `r`, `pʳ` is the probability that a coordinate
/// living at `r` is absorbed into the root on the next step. A coordinate is
/// only live at `r` when `eⁱ_t ≥ |r|`, so `pʳ` is conditioned on that event.
#[derive(Clone, Debug, PartialEq)]
pub struct RegimeProbabilities {
    delay: usize,
    /// `branch[i][k − 1]` is `pʳ` for the branch-`i` node of size `k`.
    branch: [Vec<f64>; 2],
    /// Probability that fresh noise on plant `i` is shared immediately (`eⁱ = 0`).
    fresh: [f64; 2],
}

impl RegimeProbabilities {
    /// Accept externally estimated probabilities (for example from simulation).
    pub fn from_values(delay: usize, branch: [Vec<f64>; 2], fresh: [f64; 2]) -> Result<Self> {
        for (i, probs) in branch.iter().enumerate() {
            if probs.len() != delay {
                return Err(Error::Dimension {
                    expected: delay,
                    found: probs.len(),
                });
            }
            if let Some(p) = probs.iter().chain([&fresh[i]]).find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(Error::validation(
                    format!("probabilities.branch{}", i + 1),
                    format!("{p} is not a probability"),
                ));
            }
        }
        Ok(RegimeProbabilities {
            delay,
            branch,
            fresh,
        })
    }

    /// Probabilities implied directly by the pmf: `pʳ = P(dⁱ ≤ |r|)`.
    pub fn from_pmf(model: &DelayModel) -> Self {
        let delay = model.delay();
        let branch = Plant::BOTH.map(|pl| (1..=delay).map(|k| model.cdf(pl, k)).collect());
        let fresh = Plant::BOTH.map(|pl| model.pmf(pl)[0]);
        RegimeProbabilities {
            delay,
            branch,
            fresh,
        }
    }

    pub fn delay(&self) -> usize {
        self.delay
    }

    pub fn p(&self, node: NodeId) -> f64 {
        match node {
            NodeId::Root => 1.0,
            NodeId::Branch { plant, size } => self.branch[plant.index()][size - 1],
        }
    }

    pub fn q(&self, node: NodeId) -> f64 {
        1.0 - self.p(node)
    }

    pub fn fresh(&self, plant: Plant) -> f64 {
        self.fresh[plant.index()]
    }

    /// True when every coordinate reaches the root immediately (`d ≡ 0`).
    pub fn is_centralized(&self) -> bool {
        self.fresh.iter().all(|p| *p == 1.0)
    }
}

/// Stationary regime probabilities from the two effective-delay chains.
pub fn regime_probabilities(
    chain1: &EffectiveDelayChain,
    chain2: &EffectiveDelayChain,
    graph: &InfoGraph,
) -> RegimeProbabilities {
    let delay = graph.delay();
    let branch = [chain1, chain2].map(|chain| {
        (1..=delay)
            .map(|k| {
                chain.absorb_given_live(k).unwrap_or_else(|| {
                    // Never live: use the next-step law from the closed class,
                    // which is the pmf CDF.
                    chain.pmf.iter().take(k + 1).sum()
                })
            })
            .collect::<Vec<f64>>()
    });
    let fresh = [chain1.fresh_absorption(), chain2.fresh_absorption()];
    RegimeProbabilities {
        delay,
        branch,
        fresh,
    }
}

/// `(pʳ_t, qʳ_t)` given the current effective delay of `r`'s branch.
pub fn one_step_probs(e_now: usize, model: &DelayModel, node: NodeId) -> (f64, f64) {
    match node {
        NodeId::Root => (1.0, 0.0),
        NodeId::Branch { plant, size } => {
            let p = if e_now < size {
                1.0
            } else {
                model.cdf(plant, size)
            };
            (p, 1.0 - p)
        }
    }
}
