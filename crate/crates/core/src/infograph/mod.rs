//! The information graph: two size-ordered chains of nodes, one per plant,
//! merging into the root `V`, plus the effective-delay node sets and the
//! symbolic label bookkeeping built on top of it.

mod infosets;
mod labels;

use std::fmt;

use crate::error::{Error, Result};
use crate::plant::{Atom, Plant};

pub use infosets::{info_sets, noise_span, InfoSetReport, InfoSets, StateId};
pub use labels::{
    check_partition, shrink_identity_holds, LabelFault, LabelTracker, NoiseId, PartitionReport,
    PartitionViolation, Stamp,
};

/// A node of the information graph. Branch nodes are identified by plant and
/// size; the root has size `D + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeId {
    Branch { plant: Plant, size: usize },
    Root,
}

impl NodeId {
    pub fn branch(plant: Plant, size: usize) -> Self {
        NodeId::Branch { plant, size }
    }

    pub fn size(self, delay: usize) -> usize {
        match self {
            NodeId::Root => delay + 1,
            NodeId::Branch { size, .. } => size,
        }
    }

    pub fn plant(self) -> Option<Plant> {
        match self {
            NodeId::Root => None,
            NodeId::Branch { plant, .. } => Some(plant),
        }
    }

    /// Short machine-friendly label, e.g. `1:3` or `root`.
    pub fn key(self) -> String {
        match self {
            NodeId::Root => "root".into(),
            NodeId::Branch { plant, size } => format!("{plant}:{size}"),
        }
    }

    pub fn parse_key(s: &str) -> Option<Self> {
        if s == "root" || s == "V" {
            return Some(NodeId::Root);
        }
        let (p, k) = s.split_once(':')?;
        let plant = match p {
            "1" => Plant::One,
            "2" => Plant::Two,
            _ => return None,
        };
        let size = k.parse().ok().filter(|k| *k >= 1)?;
        Some(NodeId::branch(plant, size))
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfoGraph {
    delay: usize,
}

impl InfoGraph {
    pub fn new(delay: usize) -> Result<Self> {
        if delay < 1 {
            return Err(Error::validation("plant.delay", "must be at least 1"));
        }
        Ok(InfoGraph { delay })
    }

    pub fn delay(&self) -> usize {
        self.delay
    }

    pub fn contains(&self, node: NodeId) -> bool {
        match node {
            NodeId::Root => true,
            NodeId::Branch { size, .. } => (1..=self.delay).contains(&size),
        }
    }

    /// Branch 1 by size, branch 2 by size, then the root.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        Plant::BOTH
            .into_iter()
            .flat_map(move |p| self.branch(p))
            .chain(std::iter::once(NodeId::Root))
    }

    pub fn branch(&self, plant: Plant) -> impl Iterator<Item = NodeId> {
        (1..=self.delay).map(move |k| NodeId::branch(plant, k))
    }

    pub fn node_count(&self) -> usize {
        2 * self.delay + 1
    }

    /// The unique `s` with `(r, s) ∈ E`.
    pub fn parent(&self, node: NodeId) -> NodeId {
        match node {
            NodeId::Branch { plant, size } if size < self.delay => {
                NodeId::branch(plant, size + 1)
            }
            _ => NodeId::Root,
        }
    }

    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        self.nodes().map(|r| (r, self.parent(r))).collect()
    }

    /// Atom set of a node, in augmented-state order.
    pub fn atoms(&self, node: NodeId) -> Vec<Atom> {
        let d = self.delay;
        let positions = match node {
            NodeId::Root => 0..d + 1,
            NodeId::Branch {
                plant: Plant::One,
                size,
            } => 0..size,
            NodeId::Branch {
                plant: Plant::Two,
                size,
            } => d + 1 - size..d + 1,
        };
        positions.map(|p| Atom::at_position(p, d)).collect()
    }

    /// Graphviz rendering of the graph.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph info_graph {\n  rankdir=LR;\n");
        for node in self.nodes() {
            let atoms: Vec<String> = self.atoms(node).iter().map(ToString::to_string).collect();
            out.push_str(&format!(
                "  \"{}\" [label=\"{{{}}}\"];\n",
                node.key(),
                atoms.join(",")
            ));
        }
        for (r, s) in self.edges() {
            out.push_str(&format!("  \"{}\" -> \"{}\";\n", r.key(), s.key()));
        }
        out.push_str("}\n");
        out
    }
}

/// The branch-node sets `V^{i,+}`, `V^{i,++}`, `V^{i,−}`, `V^{i,−−}` for an
/// effective-delay pair. The root belongs to none of them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeSets {
    /// `|s| ≥ eⁱ`
    pub plus: [Vec<NodeId>; 2],
    /// `|s| > eⁱ`: shared information, coordinates zero.
    pub plus_plus: [Vec<NodeId>; 2],
    /// `|s| ≤ eⁱ`: private to controller `i`.
    pub minus: [Vec<NodeId>; 2],
    /// `|s| < eⁱ`
    pub minus_minus: [Vec<NodeId>; 2],
}

pub fn node_sets(graph: &InfoGraph, e: [usize; 2]) -> NodeSets {
    let collect = |pred: &dyn Fn(usize, usize) -> bool| {
        Plant::BOTH.map(|p| {
            graph
                .branch(p)
                .filter(|n| pred(n.size(graph.delay()), e[p.index()]))
                .collect::<Vec<_>>()
        })
    };
    NodeSets {
        plus: collect(&|k, e| k >= e),
        plus_plus: collect(&|k, e| k > e),
        minus: collect(&|k, e| k <= e),
        minus_minus: collect(&|k, e| k < e),
    }
}

/// `s ∈ V^{i,−}` for the branch of `s` under effective delay `e`.
pub fn is_private(node: NodeId, e: [usize; 2]) -> bool {
    match node {
        NodeId::Root => false,
        NodeId::Branch { plant, size } => size <= e[plant.index()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delay_four_matches_two_chains() {
        let g = InfoGraph::new(4).unwrap();
        assert_eq!(g.nodes().count(), 9);
        assert_eq!(g.edges().len(), 9);
        let chain: Vec<NodeId> = std::iter::successors(Some(NodeId::branch(Plant::One, 1)), |n| {
            (*n != NodeId::Root).then(|| g.parent(*n))
        })
        .collect();
        assert_eq!(chain.len(), 5);
        assert_eq!(
            g.atoms(chain[3]),
            vec![
                Atom::Plant(Plant::One),
                Atom::Dummy(1),
                Atom::Dummy(2),
                Atom::Dummy(3)
            ]
        );
        assert_eq!(*chain.last().unwrap(), NodeId::Root);
        assert_eq!(
            g.atoms(NodeId::branch(Plant::Two, 2)),
            vec![Atom::Dummy(3), Atom::Plant(Plant::Two)]
        );
    }

    #[test]
    fn unit_delay_graph() {
        let g = InfoGraph::new(1).unwrap();
        let nodes: Vec<_> = g.nodes().collect();
        assert_eq!(nodes.len(), 3);
        assert!(nodes.iter().all(|n| g.parent(*n) == NodeId::Root));
    }

    #[test]
    fn delay_two_parent_of_plant_two_pair() {
        let g = InfoGraph::new(2).unwrap();
        assert_eq!(g.node_count(), 5);
        let n = NodeId::branch(Plant::Two, 2);
        assert_eq!(g.atoms(n), vec![Atom::Dummy(1), Atom::Plant(Plant::Two)]);
        assert_eq!(g.parent(n), NodeId::Root);
    }

    #[test]
    fn zero_delay_rejected() {
        assert!(InfoGraph::new(0).is_err());
    }

    #[test]
    fn edges_grow_size_by_one() {
        for d in 1..=6 {
            let g = InfoGraph::new(d).unwrap();
            for (r, s) in g.edges() {
                if r.size(d) < d + 1 {
                    assert_eq!(s.size(d), r.size(d) + 1);
                }
                assert_eq!(g.atoms(r).len(), r.size(d));
            }
        }
    }

    #[test]
    fn node_sets_example() {
        let g = InfoGraph::new(4).unwrap();
        let sets = node_sets(&g, [3, 2]);
        assert_eq!(sets.plus_plus[0], vec![NodeId::branch(Plant::One, 4)]);
        assert_eq!(
            sets.plus_plus[1],
            vec![NodeId::branch(Plant::Two, 3), NodeId::branch(Plant::Two, 4)]
        );
        assert_eq!(sets.minus[0].len(), 3);
        assert_eq!(sets.minus_minus[1], vec![NodeId::branch(Plant::Two, 1)]);
    }

    #[test]
    fn node_sets_extremes() {
        let g = InfoGraph::new(3).unwrap();
        let s = node_sets(&g, [0, 3]);
        assert!(s.minus[0].is_empty());
        assert_eq!(s.plus_plus[0].len(), 3);
        assert_eq!(s.minus[1].len(), 3);
        assert!(s.plus_plus[1].is_empty());
    }

    #[test]
    fn complementary_sets_partition_branches() {
        let g = InfoGraph::new(5).unwrap();
        for e1 in 0..=5 {
            for e2 in 0..=5 {
                let s = node_sets(&g, [e1, e2]);
                for i in 0..2 {
                    let mut a: Vec<_> = s.plus[i].iter().chain(&s.minus_minus[i]).copied().collect();
                    let mut b: Vec<_> = s.plus_plus[i].iter().chain(&s.minus[i]).copied().collect();
                    a.sort();
                    b.sort();
                    let all: Vec<_> = g.branch(Plant::BOTH[i]).collect();
                    assert_eq!(a, all);
                    assert_eq!(b, all);
                    assert!(s.plus[i].iter().all(|n| !s.minus_minus[i].contains(n)));
                    assert!(s.plus_plus[i].iter().all(|n| !s.minus[i].contains(n)));
                }
            }
        }
    }

    #[test]
    fn node_keys_round_trip() {
        let g = InfoGraph::new(3).unwrap();
        for n in g.nodes() {
            assert_eq!(NodeId::parse_key(&n.key()), Some(n));
        }
        assert_eq!(NodeId::parse_key("3:1"), None);
        assert_eq!(NodeId::parse_key("1:0"), None);
    }

    #[test]
    fn dot_export_lists_every_edge() {
        let dot = InfoGraph::new(2).unwrap().to_dot();
        assert_eq!(dot.matches("->").count(), 5);
        assert!(dot.contains("\"root\" -> \"root\""));
    }
}
