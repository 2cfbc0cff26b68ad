//! Controller information sets as explicit sets of state identifiers.

use std::collections::BTreeSet;

use super::labels::NoiseId;
use crate::delay::EffectiveDelayProcess;
use crate::plant::Plant;

/// `xⁱ_k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId {
    pub plant: Plant,
    pub k: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfoSets {
    /// `sets[t][i] = Iⁱ_t`.
    pub sets: Vec<[BTreeSet<StateId>; 2]>,
}

impl InfoSets {
    pub fn get(&self, t: usize, plant: Plant) -> &BTreeSet<StateId> {
        &self.sets[t][plant.index()]
    }

    pub fn horizon(&self) -> usize {
        self.sets.len()
    }

    /// Latest `k` with `xʲ_k ∈ Iⁱ_t` for `j ≠ i`.
    pub fn latest_foreign(&self, t: usize, plant: Plant) -> Option<usize> {
        let other = plant.other();
        self.get(t, plant)
            .iter()
            .filter(|s| s.plant == other)
            .map(|s| s.k)
            .max()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfoSetReport {
    /// Sets from the delay recursion `Iⁱ_{t+1} = Iⁱ_t ∪ {xⁱ_{t+1}} ∪ {xʲ_k : k ≤ t+1−dʲ_{t+1}}`.
    pub recursive: InfoSets,
    /// Sets from `Iⁱ_t = Iⁱ_{t−1} ∪ {xⁱ_t} ∪ Iʲ_{t−eʲ_t}`.
    pub effective: InfoSets,
    /// First `(t, i)` where the two forms disagree.
    pub form_mismatch: Option<(usize, Plant)>,
    /// First `(τ, i)` with `Iⁱ_τ ⊄ Iʲ_{τ+D}`.
    pub nesting_violation: Option<(usize, Plant)>,
}

impl InfoSetReport {
    pub fn holds(&self) -> bool {
        self.form_mismatch.is_none() && self.nesting_violation.is_none()
    }
}

/// Build both forms of the information sets for `t = 0..len` and check that
/// they agree and are partially nested. `d[i]` is the delay sequence of
/// direction `i` (information about plant `i`); `d[i][0]` is never used since
/// nothing is in flight at `t = 0`.
pub fn info_sets(delay: usize, d: [&[usize]; 2]) -> InfoSetReport {
    let len = d[0].len().min(d[1].len());
    let recursive = recursive_form(len, d);
    let effective = effective_form(delay, len, d);

    let form_mismatch = (0..len)
        .flat_map(|t| Plant::BOTH.map(|p| (t, p)))
        .find(|&(t, p)| recursive.get(t, p) != effective.get(t, p));

    let nesting_violation = (0..len.saturating_sub(delay))
        .flat_map(|tau| Plant::BOTH.map(|p| (tau, p)))
        .find(|&(tau, p)| {
            !recursive
                .get(tau, p)
                .is_subset(recursive.get(tau + delay, p.other()))
        });

    InfoSetReport {
        recursive,
        effective,
        form_mismatch,
        nesting_violation,
    }
}

fn recursive_form(len: usize, d: [&[usize]; 2]) -> InfoSets {
    let mut sets: Vec<[BTreeSet<StateId>; 2]> = Vec::with_capacity(len);
    if len == 0 {
        return InfoSets { sets };
    }
    sets.push(Plant::BOTH.map(|p| BTreeSet::from([StateId { plant: p, k: 0 }])));
    for t in 0..len - 1 {
        let next = Plant::BOTH.map(|p| {
            let j = p.other();
            let mut s = sets[t][p.index()].clone();
            s.insert(StateId { plant: p, k: t + 1 });
            if let Some(last) = (t + 1).checked_sub(d[j.index()][t + 1]) {
                s.extend((0..=last).map(|k| StateId { plant: j, k }));
            }
            s
        });
        sets.push(next);
    }
    InfoSets { sets }
}

fn effective_form(delay: usize, len: usize, d: [&[usize]; 2]) -> InfoSets {
    let e = EffectiveDelayProcess::trajectory(delay, d);
    let mut sets: Vec<[BTreeSet<StateId>; 2]> = Vec::with_capacity(len);
    for t in 0..len {
        let mut cur = Plant::BOTH.map(|p| {
            let mut s = if t > 0 {
                sets[t - 1][p.index()].clone()
            } else {
                BTreeSet::new()
            };
            s.insert(StateId { plant: p, k: t });
            let j = p.other();
            let lag = e[t][j.index()];
            if lag > 0 {
                if let Some(src) = t.checked_sub(lag) {
                    s.extend(sets[src][j.index()].iter().copied());
                }
            }
            s
        });
        // Zero lag refers to the other controller's set at the same time;
        // take the least fixed point.
        loop {
            let mut changed = false;
            for p in Plant::BOTH {
                let j = p.other();
                if e[t][j.index()] == 0 {
                    let add: Vec<StateId> = cur[j.index()].iter().copied().collect();
                    let before = cur[p.index()].len();
                    cur[p.index()].extend(add);
                    changed |= cur[p.index()].len() != before;
                }
            }
            if !changed {
                break;
            }
        }
        sets.push(cur);
    }
    InfoSets { sets }
}

/// Primitive noise identifiers spanned by a set of states:
/// `xᵏ_0 ↦ xᵏ_0`, `xᵏ_τ ↦ wᵏ_{τ−1}`.
pub fn noise_span(states: &BTreeSet<StateId>) -> BTreeSet<NoiseId> {
    states
        .iter()
        .map(|s| match s.k {
            0 => NoiseId::init(s.plant),
            k => NoiseId::step(s.plant, k - 1),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infograph::{is_private, InfoGraph, LabelTracker, NodeId};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_delay_shares_everything_after_start() {
        let seq = vec![0; 10];
        let rep = info_sets(3, [&seq, &seq]);
        assert!(rep.holds());
        assert_eq!(rep.recursive.get(0, Plant::One).len(), 1);
        for t in 1..10 {
            assert_eq!(rep.recursive.get(t, Plant::One), rep.recursive.get(t, Plant::Two));
            assert_eq!(rep.recursive.get(t, Plant::One).len(), 2 * (t + 1));
        }
    }

    #[test]
    fn maximal_delay_lags_by_d() {
        let d = 3;
        let seq = vec![d; 12];
        let rep = info_sets(d, [&seq, &seq]);
        assert!(rep.holds());
        for t in 0..12 {
            assert_eq!(
                rep.recursive.latest_foreign(t, Plant::One),
                t.checked_sub(d)
            );
        }
    }

    #[test]
    fn unit_delay_is_one_step_sharing() {
        let seq = vec![1; 8];
        let rep = info_sets(1, [&seq, &seq]);
        assert!(rep.holds());
        for t in 1..8 {
            assert_eq!(rep.recursive.latest_foreign(t, Plant::Two), Some(t - 1));
        }
    }

    #[test]
    fn random_sequences_agree_and_nest() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let d = rng.random_range(1..=4);
            let len = rng.random_range(1..=30);
            let s1: Vec<usize> = (0..len).map(|_| rng.random_range(0..=d)).collect();
            let s2: Vec<usize> = (0..len).map(|_| rng.random_range(0..=d)).collect();
            let rep = info_sets(d, [&s1, &s2]);
            assert!(rep.holds(), "{:?} {:?}", rep.form_mismatch, rep.nesting_violation);
        }
    }

    #[test]
    fn labels_span_information_sets() {
        // The root label with controller i's private labels spans exactly the
        // noise controller i can reconstruct from its information set.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for d in 1..=4 {
            let g = InfoGraph::new(d).unwrap();
            let len = 40;
            let s1: Vec<usize> = (0..len).map(|_| rng.random_range(0..=d)).collect();
            let s2: Vec<usize> = (0..len).map(|_| rng.random_range(0..=d)).collect();
            let rep = info_sets(d, [&s1, &s2]);
            let e = EffectiveDelayProcess::trajectory(d, [&s1, &s2]);
            let mut tr = LabelTracker::new(&g);
            for (t, &e_t) in e.iter().enumerate().take(len) {
                if t > 0 {
                    tr.step(e_t);
                }
                for p in Plant::BOTH {
                    let mut ids = tr.label(NodeId::Root).clone();
                    for n in g.branch(p).filter(|n| is_private(*n, e_t)) {
                        ids.extend(tr.label(n).iter().copied());
                    }
                    assert_eq!(ids, noise_span(rep.recursive.get(t, p)), "d={d} t={t} {p}");
                }
            }
        }
    }
}
