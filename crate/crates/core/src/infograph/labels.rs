//! Symbolic label sets `Lˢ_t` over primitive noise identifiers.

use std::collections::BTreeSet;
use std::fmt;

use super::{is_private, node_sets, InfoGraph, NodeId};
use crate::plant::Plant;

/// When a primitive noise term entered the system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stamp {
    /// The initial condition `xⁱ_0`.
    Init,
    /// The process noise `wⁱ_τ`, which first affects `xⁱ_{τ+1}`.
    Step(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NoiseId {
    pub plant: Plant,
    pub stamp: Stamp,
}

impl NoiseId {
    pub fn init(plant: Plant) -> Self {
        NoiseId {
            plant,
            stamp: Stamp::Init,
        }
    }

    pub fn step(plant: Plant, tau: usize) -> Self {
        NoiseId {
            plant,
            stamp: Stamp::Step(tau),
        }
    }

    /// Time at which the identifier entered its size-1 label.
    pub fn injected_at(self) -> usize {
        match self.stamp {
            Stamp::Init => 0,
            Stamp::Step(tau) => tau + 1,
        }
    }
}

impl fmt::Display for NoiseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.stamp {
            Stamp::Init => write!(f, "x{}_0", self.plant),
            Stamp::Step(t) => write!(f, "w{}_{}", self.plant, t),
        }
    }
}

/// Deliberate corruptions of the label recursion, used as negative controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LabelFault {
    /// Never move labels into the root.
    SkipAbsorption,
    /// Leave fresh noise out of the root even when `eⁱ_{t+1} = 0`, as the
    /// recursion is usually written.
    KeepFreshNoisePrivate,
}

/// Label sets `Lˢ_t` for every node, the noise history `H_t`, and the
/// effective-delay pair at time `t`.
#[derive(Clone, Debug)]
pub struct LabelTracker {
    graph: InfoGraph,
    t: usize,
    e: [usize; 2],
    /// `branch[i][k − 1]` holds the label of the branch-`i` node of size `k`.
    branch: [Vec<BTreeSet<NoiseId>>; 2],
    root: BTreeSet<NoiseId>,
    history: BTreeSet<NoiseId>,
    fault: Option<LabelFault>,
}

impl LabelTracker {
    /// State at `t = 0`: `Lⁱ_0 = {xⁱ_0}`, everything else empty, `e_0 = (D, D)`.
    pub fn new(graph: &InfoGraph) -> Self {
        let d = graph.delay();
        let mut branch = [vec![BTreeSet::new(); d], vec![BTreeSet::new(); d]];
        let mut history = BTreeSet::new();
        for p in Plant::BOTH {
            branch[p.index()][0].insert(NoiseId::init(p));
            history.insert(NoiseId::init(p));
        }
        LabelTracker {
            graph: graph.clone(),
            t: 0,
            e: [d, d],
            branch,
            root: BTreeSet::new(),
            history,
            fault: None,
        }
    }

    pub fn with_fault(mut self, fault: Option<LabelFault>) -> Self {
        self.fault = fault;
        self
    }

    pub fn time(&self) -> usize {
        self.t
    }

    pub fn effective_delay(&self) -> [usize; 2] {
        self.e
    }

    pub fn graph(&self) -> &InfoGraph {
        &self.graph
    }

    pub fn label(&self, node: NodeId) -> &BTreeSet<NoiseId> {
        match node {
            NodeId::Root => &self.root,
            NodeId::Branch { plant, size } => &self.branch[plant.index()][size - 1],
        }
    }

    pub fn label_mut(&mut self, node: NodeId) -> &mut BTreeSet<NoiseId> {
        match node {
            NodeId::Root => &mut self.root,
            NodeId::Branch { plant, size } => &mut self.branch[plant.index()][size - 1],
        }
    }

    pub fn history(&self) -> &BTreeSet<NoiseId> {
        &self.history
    }

    /// Advance to `t + 1` given the effective-delay pair `e_{t+1}`.
    ///
    /// Branch labels shift one size up and the size-1 labels receive
    /// `wⁱ_t`. The root absorbs every `Lʳ_t` with `|r| ≥ eⁱ_{t+1}`, and the
    /// fresh `wⁱ_t` itself when `eⁱ_{t+1} = 0`.
    pub fn step(&mut self, e_next: [usize; 2]) {
        let t = self.t;
        for p in Plant::BOTH {
            let i = p.index();
            let e = e_next[i];
            let labels = &mut self.branch[i];
            if self.fault != Some(LabelFault::SkipAbsorption) {
                for (k, label) in labels.iter().enumerate() {
                    if k + 1 >= e {
                        self.root.extend(label.iter().copied());
                    }
                }
            }
            labels.pop();
            let fresh = NoiseId::step(p, t);
            labels.insert(0, BTreeSet::from([fresh]));
            if e == 0 && self.fault.is_none() {
                self.root.insert(fresh);
            }
            self.history.insert(fresh);
        }
        self.t += 1;
        self.e = e_next;
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PartitionViolation {
    /// `id` appears in two members of the family.
    Overlap { id: NoiseId, a: NodeId, b: NodeId },
    /// `id ∈ H_t` is covered by no member.
    Missing { id: NoiseId },
    /// A member contains an identifier outside `H_t`.
    Extra { id: NoiseId, node: NodeId },
}

impl fmt::Display for PartitionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionViolation::Overlap { id, a, b } => {
                write!(f, "{id} appears in both L[{a}] and L[{b}]")
            }
            PartitionViolation::Missing { id } => write!(f, "{id} is not covered"),
            PartitionViolation::Extra { id, node } => {
                write!(f, "{id} in L[{node}] is not in the noise history")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionReport {
    pub t: usize,
    pub violations: Vec<PartitionViolation>,
}

impl PartitionReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check that `L^V_t` and `{Lˢ_t : s ∈ V^{i,−}_t}` partition `H_t`.
pub fn check_partition(tracker: &LabelTracker) -> PartitionReport {
    let graph = tracker.graph();
    let e = tracker.effective_delay();
    let family: Vec<NodeId> = std::iter::once(NodeId::Root)
        .chain(graph.nodes().filter(|n| is_private(*n, e)))
        .collect();
    let mut owner: std::collections::BTreeMap<NoiseId, NodeId> = Default::default();
    let mut violations = Vec::new();
    for &node in &family {
        for &id in tracker.label(node) {
            if !tracker.history().contains(&id) {
                violations.push(PartitionViolation::Extra { id, node });
            }
            if let Some(prev) = owner.insert(id, node) {
                violations.push(PartitionViolation::Overlap { id, a: prev, b: node });
            }
        }
    }
    for &id in tracker.history() {
        if !owner.contains_key(&id) {
            violations.push(PartitionViolation::Missing { id });
        }
    }
    PartitionReport {
        t: tracker.time(),
        violations,
    }
}

/// `∪_{s∈V^{i,−}_{t+1}} Lˢ_{t+1} = ∪_{r∈V^{i,−−}_{t+1}} Lʳ_t ∪ Lⁱ_{t+1}`, where the
/// last term is only part of the private side when `eⁱ_{t+1} ≥ 1`.
pub fn shrink_identity_holds(prev: &LabelTracker, next: &LabelTracker, plant: Plant) -> bool {
    let graph = next.graph();
    let i = plant.index();
    let sets = node_sets(graph, next.effective_delay());
    let lhs: BTreeSet<NoiseId> = sets.minus[i]
        .iter()
        .flat_map(|s| next.label(*s).iter().copied())
        .collect();
    let mut rhs: BTreeSet<NoiseId> = sets.minus_minus[i]
        .iter()
        .flat_map(|r| prev.label(*r).iter().copied())
        .collect();
    if next.effective_delay()[i] >= 1 {
        rhs.extend(next.label(NodeId::branch(plant, 1)).iter().copied());
    }
    lhs == rhs
}
