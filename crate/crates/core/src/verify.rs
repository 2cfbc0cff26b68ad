//! Executable invariant suites: effective-delay equivalence, label
//! partition, information nesting and span, state decomposition, zero
//! coordinates, and information-constraint compliance of the controller.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::controller::{Controller, ControllerFault};
use crate::delay::{effective_delays_stepped, effective_delays_windowed, DelayModel, EffectiveDelayProcess};
use crate::error::{Error, Result};
use crate::infograph::{
    check_partition, info_sets, is_private, noise_span, shrink_identity_holds, InfoGraph, LabelFault, LabelTracker,
    NodeId, NoiseId,
};
use crate::linalg::Mat;
use crate::plant::{AggregateSystem, Plant};
use crate::sim::{ControlLaw, EpisodeConfig, Simulator};
use crate::synthesis::{GainTable, Policy};

/// Reconstruction tolerance for the decomposition suite.
pub const DECOMPOSITION_TOL: f64 = 1e-9;

/// Deliberate faults for negative controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Labels and coordinates are never moved into the root.
    SkipAbsorption,
    /// Fresh noise stays on the size-1 node even when already shared.
    KeepFreshPrivate,
}

impl Fault {
    pub const NAMES: [&'static str; 2] = ["skip-absorption", "keep-fresh-private"];

    fn label(self) -> LabelFault {
        match self {
            Fault::SkipAbsorption => LabelFault::SkipAbsorption,
            Fault::KeepFreshPrivate => LabelFault::KeepFreshNoisePrivate,
        }
    }

    fn controller(self) -> ControllerFault {
        match self {
            Fault::SkipAbsorption => ControllerFault::SkipAbsorption,
            Fault::KeepFreshPrivate => ControllerFault::KeepFreshNoisePrivate,
        }
    }
}

impl FromStr for Fault {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "skip-absorption" => Ok(Fault::SkipAbsorption),
            "keep-fresh-private" => Ok(Fault::KeepFreshPrivate),
            _ => Err(Error::validation(
                "fault",
                format!("unknown fault {s:?}; expected one of {}", Fault::NAMES.join(", ")),
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub checks: usize,
    pub failures: usize,
    /// First failing case, rendered for humans.
    pub counterexample: Option<String>,
    /// Free-form summary such as a worst-case error.
    pub detail: String,
}

impl SuiteResult {
    fn new(name: &'static str) -> Self {
        SuiteResult {
            name,
            checks: 0,
            failures: 0,
            counterexample: None,
            detail: String::new(),
        }
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
            if self.counterexample.is_none() {
                self.counterexample = Some(describe());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: {} checks, {} failures", self.name, self.checks, self.failures)?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        if let Some(c) = &self.counterexample {
            write!(f, "\n  counterexample: {c}")?;
        }
        Ok(())
    }
}

fn random_sequence<R: Rng + ?Sized>(rng: &mut R, delay: usize, len: usize) -> Vec<usize> {
    (0..len).map(|_| rng.random_range(0..=delay)).collect()
}

/// Stepped and windowed effective delays agree: every sequence of length
/// `≤ max_len` over `{0..D}` for `D ≤ exhaustive_delay`, then `random`
/// sequences with `D ≤ random_delay`.
pub fn effective_delay_suite<R: Rng + ?Sized>(
    exhaustive_delay: usize,
    max_len: usize,
    random: usize,
    random_delay: usize,
    rng: &mut R,
) -> SuiteResult {
    let mut res = SuiteResult::new("effective delay equivalence");
    let check = |seq: &[usize], d: usize, res: &mut SuiteResult| {
        let a = effective_delays_stepped(seq);
        let b = effective_delays_windowed(seq, d);
        res.record(a == b, || format!("D={d} d={seq:?}: stepped {a:?} vs windowed {b:?}"));
    };
    for d in 1..=exhaustive_delay {
        for len in 1..=max_len {
            let total = (d + 1).pow(len as u32);
            for code in 0..total {
                let mut c = code;
                let seq: Vec<usize> = (0..len)
                    .map(|_| {
                        let v = c % (d + 1);
                        c /= d + 1;
                        v
                    })
                    .collect();
                check(&seq, d, &mut res);
            }
        }
    }
    for _ in 0..random {
        let d = rng.random_range(1..=random_delay.max(1));
        let len = rng.random_range(1..=64);
        let seq = random_sequence(rng, d, len);
        check(&seq, d, &mut res);
    }
    res
}

/// Labels at the root plus the private nodes partition the noise history at
/// every step, and the private side shrinks as the node-set shift says.
pub fn partition_suite<R: Rng + ?Sized>(
    delay: usize,
    sequences: usize,
    horizon: usize,
    fault: Option<Fault>,
    rng: &mut R,
) -> Result<SuiteResult> {
    let graph = InfoGraph::new(delay)?;
    let mut res = SuiteResult::new("label partition");
    for _ in 0..sequences {
        let d = [random_sequence(rng, delay, horizon + 1), random_sequence(rng, delay, horizon + 1)];
        let e = EffectiveDelayProcess::trajectory(delay, [&d[0], &d[1]]);
        let mut tracker = LabelTracker::new(&graph).with_fault(fault.map(Fault::label));
        for t in 0..=horizon {
            if t > 0 {
                let prev = tracker.clone();
                tracker.step(e[t]);
                for p in Plant::BOTH {
                    if e[t][p.index()] >= 1 {
                        res.record(shrink_identity_holds(&prev, &tracker, p), || {
                            format!("D={delay} t={t} plant {p}: private-set shift identity fails; d1={:?} d2={:?}", &d[0][..=t], &d[1][..=t])
                        });
                    }
                }
            }
            let report = check_partition(&tracker);
            res.record(report.holds(), || {
                format!(
                    "D={delay} t={t} e={:?}: {}; d1={:?} d2={:?}",
                    e[t],
                    report.violations[0],
                    &d[0][..=t],
                    &d[1][..=t]
                )
            });
        }
    }
    Ok(res)
}

/// The delay-recursion and effective-delay forms of the information sets
/// agree, and `Iⁱ_τ ⊆ Iʲ_{τ+D}`.
pub fn nestedness_suite<R: Rng + ?Sized>(
    max_delay: usize,
    sequences: usize,
    max_len: usize,
    rng: &mut R,
) -> SuiteResult {
    let mut res = SuiteResult::new("information nestedness");
    for _ in 0..sequences {
        let delay = rng.random_range(1..=max_delay.max(1));
        let len = rng.random_range(1..=max_len.max(1));
        let d = [random_sequence(rng, delay, len), random_sequence(rng, delay, len)];
        let report = info_sets(delay, [&d[0], &d[1]]);
        res.record(report.holds(), || {
            let what = match (report.form_mismatch, report.nesting_violation) {
                (Some((t, p)), _) => format!("forms differ at t={t} for controller {p}"),
                (None, Some((t, p))) => format!("I{p}_{t} not contained in the other set at t+D"),
                _ => unreachable!(),
            };
            format!("D={delay} d1={:?} d2={:?}: {what}", d[0], d[1])
        });
    }
    res
}

/// The noise spanned by each controller's information equals the labels it
/// can see: the root plus its own private nodes.
pub fn span_suite<R: Rng + ?Sized>(
    delay: usize,
    sequences: usize,
    horizon: usize,
    fault: Option<Fault>,
    rng: &mut R,
) -> Result<SuiteResult> {
    let graph = InfoGraph::new(delay)?;
    let mut res = SuiteResult::new("information span");
    for _ in 0..sequences {
        let d = [random_sequence(rng, delay, horizon + 1), random_sequence(rng, delay, horizon + 1)];
        let e = EffectiveDelayProcess::trajectory(delay, [&d[0], &d[1]]);
        let sets = info_sets(delay, [&d[0], &d[1]]).recursive;
        let mut tracker = LabelTracker::new(&graph).with_fault(fault.map(Fault::label));
        for (t, &e_t) in e.iter().enumerate().take(horizon + 1) {
            if t > 0 {
                tracker.step(e_t);
            }
            for p in Plant::BOTH {
                let visible = visible_labels(&tracker, p);
                let span = noise_span(sets.get(t, p));
                res.record(visible == span, || {
                    let diff: Vec<String> = visible.symmetric_difference(&span).map(|n| n.to_string()).collect();
                    format!("D={delay} t={t} controller {p}: labels and span differ on {{{}}}", diff.join(", "))
                });
            }
        }
    }
    Ok(res)
}

fn visible_labels(tracker: &LabelTracker, plant: Plant) -> BTreeSet<NoiseId> {
    let e = tracker.effective_delay();
    let mut out = tracker.label(NodeId::Root).clone();
    for node in tracker.graph().branch(plant) {
        if is_private(node, e) {
            out.extend(tracker.label(node).iter().copied());
        }
    }
    out
}

/// Closed-loop episodes: `x_t = Σ I ζˢ_t` and the shared nodes' coordinates
/// are exactly zero. Returns `(decomposition, zero coordinates)`.
pub fn closed_loop_suites(
    agg: &AggregateSystem,
    model: &DelayModel,
    policy: &Policy,
    episodes: usize,
    horizon: usize,
    seed: u64,
    fault: Option<Fault>,
) -> Result<(SuiteResult, SuiteResult)> {
    let sim = Simulator::new(agg, model)?.with_fault(fault.map(Fault::controller));
    let cfg = EpisodeConfig::average(horizon, seed)?;
    let mut dec = SuiteResult::new("state decomposition");
    let mut zero = SuiteResult::new("zero coordinates");
    let mut worst: f64 = 0.0;
    for ep in 0..episodes as u64 {
        let r = match sim.run_episode(ControlLaw::Distributed(policy), &cfg, ep, false) {
            Ok(r) => r,
            Err(Error::Numerical(msg)) => {
                dec.record(false, || format!("episode {ep}: {msg}"));
                continue;
            }
            Err(e) => return Err(e),
        };
        worst = worst.max(r.max_reconstruction_error);
        dec.record(r.max_reconstruction_error <= DECOMPOSITION_TOL, || {
            format!("seed {seed} episode {ep}: max reconstruction error {:.3e}", r.max_reconstruction_error)
        });
        zero.record(r.zero_violations == 0, || {
            format!("seed {seed} episode {ep}: {} nonzero shared coordinates", r.zero_violations)
        });
    }
    dec.detail = format!("max error {worst:.3e}");
    Ok((dec, zero))
}

/// Shadow run of the controller on impulse inputs: column `c` of every
/// coordinate is its response to the primitive noise `ids[c]`. Checks that
/// `uⁱ_t` only responds to noise in the span of `Iⁱ_t` and that `ζˢ_t` only
/// responds to noise in `Lˢ_t`.
pub fn compliance_suite<R: Rng + ?Sized>(
    agg: &AggregateSystem,
    gains: &GainTable,
    sequences: usize,
    horizon: usize,
    fault: Option<Fault>,
    rng: &mut R,
) -> Result<SuiteResult> {
    let delay = agg.delay;
    let graph = InfoGraph::new(delay)?;
    let controller = Controller::new(agg, &graph)?.with_fault(fault.map(Fault::controller));
    let dims = [agg.n1, agg.n2];

    // Column layout: for each plant, `x_0` then `w_0..w_{T−1}`.
    let mut ids: Vec<NoiseId> = Vec::new();
    let mut first_col = [vec![], vec![]];
    for p in Plant::BOTH {
        for stamp in 0..=horizon {
            let id = if stamp == 0 { NoiseId::init(p) } else { NoiseId::step(p, stamp - 1) };
            first_col[p.index()].push(ids.len());
            ids.extend(std::iter::repeat_n(id, dims[p.index()]));
        }
    }
    let width = ids.len();
    let impulse = |p: Plant, stamp: usize| {
        let mut m = Mat::zeros(dims[p.index()], width);
        let c0 = first_col[p.index()][stamp];
        for r in 0..dims[p.index()] {
            m[(r, c0 + r)] = 1.0;
        }
        m
    };
    let support = |m: &Mat| -> BTreeSet<NoiseId> {
        (0..m.ncols())
            .filter(|&c| m.column(c).iter().any(|v| *v != 0.0))
            .map(|c| ids[c])
            .collect()
    };

    let mut res = SuiteResult::new("information compliance");
    for _ in 0..sequences {
        let d = [random_sequence(rng, delay, horizon + 1), random_sequence(rng, delay, horizon + 1)];
        let e = EffectiveDelayProcess::trajectory(delay, [&d[0], &d[1]]);
        let sets = info_sets(delay, [&d[0], &d[1]]).recursive;
        let mut tracker = LabelTracker::new(&graph);
        let mut state = controller.init_batch(&impulse(Plant::One, 0), &impulse(Plant::Two, 0))?;
        for t in 0..horizon {
            let inputs = controller.compute_inputs(&state, gains);
            for p in Plant::BOTH {
                let r = agg.input_range(p);
                let used = support(&inputs.u.rows(r.start, r.len()).into_owned());
                let allowed = noise_span(sets.get(t, p));
                res.record(used.is_subset(&allowed), || {
                    let extra: Vec<String> = used.difference(&allowed).map(|n| n.to_string()).collect();
                    format!("D={delay} t={t}: u{p} responds to {{{}}} outside its information", extra.join(", "))
                });
            }
            for node in graph.nodes() {
                let used = support(state.zeta(node));
                res.record(used.is_subset(tracker.label(node)), || {
                    let extra: Vec<String> = used.difference(tracker.label(node)).map(|n| n.to_string()).collect();
                    format!("D={delay} t={t}: coordinate at {node} carries {{{}}} outside its label", extra.join(", "))
                });
            }
            state = controller.step(
                &state,
                &inputs,
                e[t + 1],
                &impulse(Plant::One, t + 1),
                &impulse(Plant::Two, t + 1),
            );
            tracker.step(e[t + 1]);
        }
    }
    Ok(res)
}

/// Sizes for [`run_all`].
#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    pub sequences: usize,
    pub horizon: usize,
    pub episodes: usize,
    pub fault: Option<Fault>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0,
            sequences: 100,
            horizon: 200,
            episodes: 50,
            fault: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for suite in &self.suites {
            let _ = writeln!(s, "{suite}");
        }
        let verdict = if self.passed() { "all suites passed" } else { "invariant violation" };
        let _ = writeln!(s, "{verdict}");
        s
    }
}

/// Every suite on one plant and delay model.
pub fn run_all(
    agg: &AggregateSystem,
    model: &DelayModel,
    gains: &GainTable,
    opts: &VerifyOptions,
) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let delay = agg.delay;
    let short = opts.horizon.min(30);
    let mut suites = vec![effective_delay_suite(delay.min(3), 8, 10_000, delay.max(6), &mut rng)];
    suites.push(partition_suite(delay, opts.sequences, opts.horizon, opts.fault, &mut rng)?);
    suites.push(nestedness_suite(delay, opts.sequences * 10, short, &mut rng));
    suites.push(span_suite(delay, opts.sequences, short, opts.fault, &mut rng)?);
    let policy = Policy::Stationary(gains.clone());
    let (dec, zero) = closed_loop_suites(agg, model, &policy, opts.episodes, opts.horizon.min(100), opts.seed, opts.fault)?;
    suites.push(dec);
    suites.push(zero);
    suites.push(compliance_suite(agg, gains, (opts.sequences / 5).max(1), short, opts.fault, &mut rng)?);
    Ok(VerifyReport { suites })
}
