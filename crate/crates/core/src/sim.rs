//! Closed-loop Monte Carlo: sample delays and noise, run the plant and the
//! controller, and accumulate the quadratic cost.
//!
//! Every episode draws from its own ChaCha stream keyed by
//! `(seed, episode)`, and each step consumes randomness in a fixed order
//! (`d¹, d², w¹, w²`) that does not depend on the gains. Two runs that differ
//! only in their gains therefore see identical delays and noise.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::controller::{column, Controller, ControllerFault};
use crate::delay::{effective_delay_step, DelayModel};
use crate::error::{Error, Result};
use crate::infograph::InfoGraph;
use crate::linalg::{max_abs, psd_sqrt, quad_form, Mat, Vector};
use crate::plant::{AggregateSystem, Plant};
use crate::synthesis::{GainTable, Policy};

/// States whose magnitude exceeds this are reported as divergent.
const DIVERGENCE_BOUND: f64 = 1e100;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CostMode {
    /// Time-averaged stage cost over `burn_in..T`.
    Average,
    /// Stage costs over `0..T` plus the terminal cost at `T`.
    Total,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EpisodeConfig {
    pub horizon: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub mode: CostMode,
}

impl EpisodeConfig {
    pub fn new(horizon: usize, burn_in: usize, seed: u64, mode: CostMode) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::validation("simulation.horizon", "must be at least 1"));
        }
        if burn_in >= horizon {
            return Err(Error::validation(
                "simulation.burn_in",
                format!("must be below the horizon {horizon}"),
            ));
        }
        Ok(EpisodeConfig {
            horizon,
            burn_in,
            seed,
            mode,
        })
    }

    /// Long-run average with the default 20% burn-in.
    pub fn average(horizon: usize, seed: u64) -> Result<Self> {
        Self::new(horizon, horizon / 5, seed, CostMode::Average)
    }

    pub fn total(horizon: usize, seed: u64) -> Result<Self> {
        Self::new(horizon, 0, seed, CostMode::Total)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub episodes: usize,
}

impl CostEstimate {
    /// Sample mean and `std / √N`.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(Error::validation("simulation.episodes", "need at least 2 episodes"));
        }
        let mean = compensated_sum(samples.iter().copied()) / n as f64;
        let var = compensated_sum(samples.iter().map(|x| (x - mean) * (x - mean))) / (n - 1) as f64;
        Ok(CostEstimate {
            mean,
            std_error: (var / n as f64).sqrt(),
            episodes: n,
        })
    }

    /// `(mean − predicted) / std_error`; zero when both the error and the
    /// gap vanish.
    pub fn z_score(&self, predicted: f64) -> f64 {
        let gap = self.mean - predicted;
        if self.std_error == 0.0 {
            if gap.abs() <= 1e-12 * predicted.abs().max(1.0) {
                0.0
            } else {
                f64::INFINITY * gap.signum()
            }
        } else {
            gap / self.std_error
        }
    }
}

/// Neumaier summation.
pub fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Who chooses the input.
#[derive(Clone, Copy, Debug)]
pub enum ControlLaw<'a> {
    /// The node-decomposed controller.
    Distributed(&'a Policy),
    /// `u = K x` with full, instantaneous state access.
    StateFeedback(&'a Mat),
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    pub e: [usize; 2],
    pub x: Vector,
    pub u: Vector,
    pub stage_cost: f64,
    /// Frobenius norm of each `ζˢ`, in graph node order.
    pub zeta_norms: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeResult {
    pub cost: f64,
    pub max_reconstruction_error: f64,
    pub zero_violations: usize,
    pub trajectory: Option<Vec<StepRecord>>,
}

/// Precomputed pieces shared by every episode.
#[derive(Clone, Debug)]
pub struct Simulator {
    controller: Controller,
    model: DelayModel,
    noise_sqrt: [Mat; 2],
    init_sqrt: [Mat; 2],
    fault: Option<ControllerFault>,
}

impl Simulator {
    pub fn new(agg: &AggregateSystem, model: &DelayModel) -> Result<Self> {
        if model.delay() != agg.delay {
            return Err(Error::validation(
                "delay",
                format!("delay model horizon {} differs from plant delay {}", model.delay(), agg.delay),
            ));
        }
        let graph = InfoGraph::new(agg.delay)?;
        let controller = Controller::new(agg, &graph)?;
        let block = |m: &Mat, p: Plant| {
            let r = agg.plant_range(p);
            m.view((r.start, r.start), (r.len(), r.len())).into_owned()
        };
        Ok(Simulator {
            controller,
            model: model.clone(),
            noise_sqrt: [psd_sqrt(&agg.w1)?, psd_sqrt(&agg.w2)?],
            init_sqrt: [
                psd_sqrt(&block(&agg.sigma0, Plant::One))?,
                psd_sqrt(&block(&agg.sigma0, Plant::Two))?,
            ],
            fault: None,
        })
    }

    pub fn with_fault(mut self, fault: Option<ControllerFault>) -> Self {
        self.controller = self.controller.with_fault(fault);
        self.fault = fault;
        self
    }

    pub fn aggregate(&self) -> &AggregateSystem {
        self.controller.aggregate()
    }

    pub fn controller(&self) -> &Controller {
        &self.controller
    }

    pub fn model(&self) -> &DelayModel {
        &self.model
    }

    fn gaussian(rng: &mut ChaCha8Rng, sqrt: &Mat) -> Vector {
        let z = Vector::from_fn(sqrt.ncols(), |_, _| rng.sample::<f64, _>(StandardNormal));
        sqrt * z
    }

    /// One closed-loop episode on stream `episode` of `cfg.seed`.
    pub fn run_episode(
        &self,
        law: ControlLaw<'_>,
        cfg: &EpisodeConfig,
        episode: u64,
        record: bool,
    ) -> Result<EpisodeResult> {
        let agg = self.aggregate();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(episode);

        let mu = |p: Plant| {
            let r = agg.plant_range(p);
            agg.mu0.rows(r.start, r.len()).into_owned()
        };
        let x1 = mu(Plant::One) + Self::gaussian(&mut rng, &self.init_sqrt[0]);
        let x2 = mu(Plant::Two) + Self::gaussian(&mut rng, &self.init_sqrt[1]);
        let mut x = agg.noise_vector(&x1, &x2);
        let mut state = self.controller.init_state(&x1, &x2)?;
        let mut e = state.e;

        let mut stage_costs = Vec::with_capacity(cfg.horizon);
        let mut trajectory = record.then(|| Vec::with_capacity(cfg.horizon + 1));
        let mut max_rec: f64 = 0.0;
        let mut zero_violations = 0;

        for t in 0..cfg.horizon {
            let (u, inputs) = match law {
                ControlLaw::Distributed(policy) => {
                    let inputs = self.controller.compute_inputs(&state, policy.at(t));
                    (inputs.u_vector(), Some(inputs))
                }
                ControlLaw::StateFeedback(k) => (k * &x, None),
            };
            let stage = quad_form(&agg.q, &x) + quad_form(&agg.r, &u);
            stage_costs.push(stage);
            if let Some(tr) = trajectory.as_mut() {
                tr.push(StepRecord {
                    t,
                    e,
                    x: x.clone(),
                    u: u.clone(),
                    stage_cost: stage,
                    zeta_norms: self.zeta_norms(&state),
                });
            }

            let d = [
                self.model.sample(Plant::One, &mut rng),
                self.model.sample(Plant::Two, &mut rng),
            ];
            let w1 = Self::gaussian(&mut rng, &self.noise_sqrt[0]);
            let w2 = Self::gaussian(&mut rng, &self.noise_sqrt[1]);
            let e_next = [effective_delay_step(e[0], d[0]), effective_delay_step(e[1], d[1])];
            let x_next = agg.step(&x, &u, &agg.noise_vector(&w1, &w2));
            if !x_next.iter().all(|v| v.is_finite() && v.abs() < DIVERGENCE_BOUND) {
                return Err(Error::Numerical(format!(
                    "closed-loop state diverged at t = {} in episode {episode}",
                    t + 1
                )));
            }

            if let Some(inputs) = inputs {
                let (m1, m2) = self.controller.innovation(&state, &u, &x_next);
                state = self.controller.step(&state, &inputs, e_next, &column(&m1), &column(&m2));
                let rec = self.controller.reconstruct(&state);
                let err = max_abs(&(rec - column(&x_next)));
                max_rec = max_rec.max(err);
                zero_violations += state.zero_violations().len();
            }
            x = x_next;
            e = e_next;
        }

        let terminal = quad_form(&agg.q_terminal, &x);
        if let Some(tr) = trajectory.as_mut() {
            tr.push(StepRecord {
                t: cfg.horizon,
                e,
                x: x.clone(),
                u: Vector::zeros(agg.input_dim()),
                stage_cost: terminal,
                zeta_norms: self.zeta_norms(&state),
            });
        }
        let cost = match cfg.mode {
            CostMode::Average => {
                let kept = &stage_costs[cfg.burn_in..];
                compensated_sum(kept.iter().copied()) / kept.len() as f64
            }
            CostMode::Total => compensated_sum(stage_costs.iter().copied().chain([terminal])),
        };
        Ok(EpisodeResult {
            cost,
            max_reconstruction_error: max_rec,
            zero_violations,
            trajectory,
        })
    }

    fn zeta_norms(&self, state: &crate::controller::ControllerState) -> Vec<f64> {
        self.controller
            .graph()
            .nodes()
            .map(|n| state.zeta(n).norm())
            .collect()
    }

    /// Per-episode costs for episodes `0..n`, in episode order.
    pub fn episode_costs(&self, law: ControlLaw<'_>, cfg: &EpisodeConfig, n: usize) -> Result<Vec<f64>> {
        let run = |i: usize| self.run_episode(law, cfg, i as u64, false).map(|r| r.cost);
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(run).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..n).map(run).collect()
        }
    }

    pub fn monte_carlo_cost(&self, law: ControlLaw<'_>, cfg: &EpisodeConfig, n: usize) -> Result<CostEstimate> {
        if n < 2 {
            return Err(Error::validation("simulation.episodes", "need at least 2 episodes"));
        }
        CostEstimate::from_samples(&self.episode_costs(law, cfg, n)?)
    }

    /// Cost of `K^r + εΔ` for each `ε`, all on the same random streams.
    /// Differences against `ε = 0` use paired standard errors.
    pub fn gain_perturbation_study(
        &self,
        gains: &GainTable,
        node: crate::infograph::NodeId,
        direction: &Mat,
        epsilons: &[f64],
        cfg: &EpisodeConfig,
        episodes: usize,
    ) -> Result<Vec<StudyPoint>> {
        let base_gain = gains.get(node);
        if direction.shape() != base_gain.shape() {
            return Err(Error::Dimension {
                expected: base_gain.len(),
                found: direction.len(),
            });
        }
        let base_policy = Policy::Stationary(gains.clone());
        let base = self.episode_costs(ControlLaw::Distributed(&base_policy), cfg, episodes)?;
        epsilons
            .iter()
            .map(|&eps| {
                let mut g = gains.clone();
                *g.get_mut(node) = base_gain + eps * direction;
                let policy = Policy::Stationary(g);
                let costs = self.episode_costs(ControlLaw::Distributed(&policy), cfg, episodes)?;
                let diffs: Vec<f64> = costs.iter().zip(&base).map(|(c, b)| c - b).collect();
                Ok(StudyPoint {
                    epsilon: eps,
                    cost: CostEstimate::from_samples(&costs)?,
                    difference: CostEstimate::from_samples(&diffs)?,
                })
            })
            .collect()
    }
}

/// One row of a gain perturbation study.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StudyPoint {
    pub epsilon: f64,
    pub cost: CostEstimate,
    /// Paired difference against the unperturbed gains.
    pub difference: CostEstimate,
}

/// A random direction with unit Frobenius norm.
pub fn random_direction<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Mat {
    loop {
        let m = Mat::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = m.norm();
        if n > 1e-12 {
            return m / n;
        }
    }
}

/// `t,e1,e2,x0..,u0..,stage_cost`.
pub fn trajectory_csv(records: &[StepRecord]) -> String {
    let n = records.first().map_or(0, |r| r.x.len());
    let m = records.first().map_or(0, |r| r.u.len());
    let mut s = String::from("t,e1,e2");
    for i in 0..n {
        let _ = write!(s, ",x{i}");
    }
    for i in 0..m {
        let _ = write!(s, ",u{i}");
    }
    s.push_str(",stage_cost\n");
    for r in records {
        let _ = write!(s, "{},{},{}", r.t, r.e[0], r.e[1]);
        for v in r.x.iter().chain(r.u.iter()) {
            let _ = write!(s, ",{v:e}");
        }
        let _ = writeln!(s, ",{:e}", r.stage_cost);
    }
    s
}

/// `epsilon,cost_mean,cost_se`.
pub fn study_csv(points: &[StudyPoint]) -> String {
    let mut s = String::from("epsilon,cost_mean,cost_se\n");
    for p in points {
        let _ = writeln!(s, "{:e},{:e},{:e}", p.epsilon, p.cost.mean, p.cost.std_error);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::{build_aggregate, scalar_spec};
    use crate::synthesis::synthesize;

    fn setup(model: &DelayModel) -> (Simulator, Policy) {
        let agg = build_aggregate(&scalar_spec(model.delay())).unwrap();
        let res = synthesize(&agg, model).unwrap();
        (Simulator::new(&agg, model).unwrap(), res.policy())
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(xs), 2.0);
    }

    #[test]
    fn estimate_statistics() {
        let e = CostEstimate::from_samples(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(e.mean, 2.5);
        // sample variance 5/3 over 4 draws
        assert!((e.std_error - (5.0f64 / 12.0).sqrt()).abs() < 1e-12);
        assert!(CostEstimate::from_samples(&[1.0]).is_err());
    }

    #[test]
    fn burn_in_must_precede_horizon() {
        assert!(EpisodeConfig::new(10, 10, 0, CostMode::Average).is_err());
        assert_eq!(EpisodeConfig::average(500, 0).unwrap().burn_in, 100);
    }

    #[test]
    fn same_seed_same_bits() {
        let (sim, policy) = setup(&DelayModel::symmetric(2, &[(0, 0.5), (2, 0.5)]).unwrap());
        let cfg = EpisodeConfig::average(50, 9).unwrap();
        let a = sim.run_episode(ControlLaw::Distributed(&policy), &cfg, 3, true).unwrap();
        let b = sim.run_episode(ControlLaw::Distributed(&policy), &cfg, 3, true).unwrap();
        assert_eq!(a.cost.to_bits(), b.cost.to_bits());
        assert_eq!(a.trajectory, b.trajectory);
        let c = sim.run_episode(ControlLaw::Distributed(&policy), &cfg, 4, false).unwrap();
        assert_ne!(a.cost, c.cost);
    }

    #[test]
    fn noiseless_episode_costs_nothing() {
        let mut spec = scalar_spec(2);
        for m in [&mut spec.w1, &mut spec.w2, &mut spec.sigma0_1, &mut spec.sigma0_2] {
            m.fill(0.0);
        }
        let agg = build_aggregate(&spec).unwrap();
        let model = DelayModel::constant(2, 1).unwrap();
        let policy = synthesize(&agg, &model).unwrap().policy();
        let sim = Simulator::new(&agg, &model).unwrap();
        let cfg = EpisodeConfig::average(40, 1).unwrap();
        let r = sim.run_episode(ControlLaw::Distributed(&policy), &cfg, 0, false).unwrap();
        assert_eq!(r.cost, 0.0);
    }

    #[test]
    fn decomposition_and_zero_invariant_hold() {
        let (sim, policy) = setup(&DelayModel::symmetric(3, &[(0, 0.3), (1, 0.2), (3, 0.5)]).unwrap());
        let cfg = EpisodeConfig::average(100, 5).unwrap();
        for ep in 0..5 {
            let r = sim.run_episode(ControlLaw::Distributed(&policy), &cfg, ep, false).unwrap();
            assert!(r.max_reconstruction_error <= 1e-9, "{}", r.max_reconstruction_error);
            assert_eq!(r.zero_violations, 0);
        }
    }

    #[test]
    fn parallel_and_serial_agree() {
        let (sim, policy) = setup(&DelayModel::constant(2, 1).unwrap());
        let cfg = EpisodeConfig::average(30, 2).unwrap();
        let all = sim.episode_costs(ControlLaw::Distributed(&policy), &cfg, 16).unwrap();
        for (i, c) in all.iter().enumerate() {
            let one = sim.run_episode(ControlLaw::Distributed(&policy), &cfg, i as u64, false).unwrap();
            assert_eq!(c.to_bits(), one.cost.to_bits());
        }
    }

    #[test]
    fn centralized_trajectory_matches_state_feedback() {
        let model = DelayModel::constant(2, 0).unwrap();
        let agg = build_aggregate(&scalar_spec(2)).unwrap();
        let res = synthesize(&agg, &model).unwrap();
        let sim = Simulator::new(&agg, &model).unwrap();
        let cfg = EpisodeConfig::total(60, 11).unwrap();
        let policy = res.policy();
        let a = sim.run_episode(ControlLaw::Distributed(&policy), &cfg, 0, true).unwrap();
        let ta = a.trajectory.unwrap();
        for rec in &ta[1..ta.len() - 1] {
            let want = &res.root.k * &rec.x;
            assert!((&rec.u - want).amax() < 1e-9);
        }
    }

    #[test]
    fn csv_headers() {
        let (sim, policy) = setup(&DelayModel::constant(2, 1).unwrap());
        let cfg = EpisodeConfig::average(5, 0).unwrap();
        let r = sim.run_episode(ControlLaw::Distributed(&policy), &cfg, 0, true).unwrap();
        let csv = trajectory_csv(r.trajectory.as_ref().unwrap());
        assert!(csv.starts_with("t,e1,e2,x0,x1,x2,x3,u0,u1,stage_cost\n"));
        assert_eq!(csv.lines().count(), 7);
        assert!(study_csv(&[]).starts_with("epsilon,cost_mean,cost_se"));
    }
}
