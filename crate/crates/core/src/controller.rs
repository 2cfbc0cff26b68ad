//! The runtime controller: coordinates `ζˢ` on every graph node, the
//! regime-switched update, and the input decomposition `u = φ^V + Σ φˢ`.
//!
//! Coordinates are stored as matrices. The numeric controller uses one
//! column; a batch of impulse columns gives the linear response to each
//! primitive noise, which the compliance checks use.

use crate::error::{Error, Result};
use crate::infograph::{InfoGraph, NodeId};
use crate::linalg::{Mat, Vector};
use crate::plant::{AggregateSystem, Atom, Plant};
use crate::synthesis::{GainTable, GraphOperators};

/// Deliberate corruptions of the update rule, used as negative controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ControllerFault {
    /// Drop coordinates that should move into `ζ^V`.
    SkipAbsorption,
    /// Park fresh noise on the size-1 node even when it is already shared.
    KeepFreshNoisePrivate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ControllerState {
    pub t: usize,
    /// Effective-delay pair `e_t`.
    pub e: [usize; 2],
    pub root: Mat,
    /// `branch[i][k − 1]` is the coordinate of the branch-`i` node of size `k`.
    pub branch: [Vec<Mat>; 2],
}

impl ControllerState {
    pub fn zeta(&self, node: NodeId) -> &Mat {
        match node {
            NodeId::Root => &self.root,
            NodeId::Branch { plant, size } => &self.branch[plant.index()][size - 1],
        }
    }

    pub fn width(&self) -> usize {
        self.root.ncols()
    }

    /// Nodes that should be zero under `e_t` but are not.
    pub fn zero_violations(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        for p in Plant::BOTH {
            for (k, z) in self.branch[p.index()].iter().enumerate() {
                if k + 1 > self.e[p.index()] && z.iter().any(|v| *v != 0.0) {
                    out.push(NodeId::branch(p, k + 1));
                }
            }
        }
        out
    }
}

/// `φʳ = Kʳζʳ` for every node and the resulting stacked input.
#[derive(Clone, Debug)]
pub struct Inputs {
    /// `[u¹; u²]`
    pub u: Mat,
    pub root: Mat,
    pub branch: [Vec<Mat>; 2],
}

impl Inputs {
    pub fn phi(&self, node: NodeId) -> &Mat {
        match node {
            NodeId::Root => &self.root,
            NodeId::Branch { plant, size } => &self.branch[plant.index()][size - 1],
        }
    }

    /// Column 0 of `u` as a vector.
    pub fn u_vector(&self) -> Vector {
        self.u.column(0).into_owned()
    }
}

#[derive(Clone, Debug)]
pub struct Controller {
    agg: AggregateSystem,
    ops: GraphOperators,
    fault: Option<ControllerFault>,
    /// Row offsets of every node's atoms in the augmented state.
    rows: Vec<(NodeId, Vec<std::ops::Range<usize>>)>,
}

impl Controller {
    pub fn new(agg: &AggregateSystem, graph: &InfoGraph) -> Result<Self> {
        let ops = GraphOperators::build(agg, graph)?;
        let rows = graph
            .nodes()
            .map(|n| {
                let ranges = agg
                    .positions(&graph.atoms(n))?
                    .into_iter()
                    .map(|p| agg.state_partition.range(p))
                    .collect();
                Ok((n, ranges))
            })
            .collect::<Result<_>>()?;
        Ok(Controller {
            agg: agg.clone(),
            ops,
            fault: None,
            rows,
        })
    }

    pub fn with_fault(mut self, fault: Option<ControllerFault>) -> Self {
        self.fault = fault;
        self
    }

    pub fn aggregate(&self) -> &AggregateSystem {
        &self.agg
    }

    pub fn graph(&self) -> &InfoGraph {
        &self.ops.graph
    }

    fn delay(&self) -> usize {
        self.agg.delay
    }

    fn node_dim(&self, node: NodeId) -> usize {
        self.ops.get(node).state_dim()
    }

    /// `ζ^{{i}}_0 = xⁱ_0`, everything else zero, `e_0 = (D, D)`.
    pub fn init_state(&self, x1: &Vector, x2: &Vector) -> Result<ControllerState> {
        let m1 = Mat::from_column_slice(x1.len(), 1, x1.as_slice());
        let m2 = Mat::from_column_slice(x2.len(), 1, x2.as_slice());
        self.init_batch(&m1, &m2)
    }

    /// Batched form of [`Controller::init_state`]; both blocks must have the
    /// same number of columns.
    pub fn init_batch(&self, x1: &Mat, x2: &Mat) -> Result<ControllerState> {
        let width = x1.ncols();
        if x2.ncols() != width {
            return Err(Error::Dimension {
                expected: width,
                found: x2.ncols(),
            });
        }
        for (p, x) in [(Plant::One, x1), (Plant::Two, x2)] {
            let n = self.agg.plant_range(p).len();
            if x.nrows() != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: x.nrows(),
                });
            }
        }
        let d = self.delay();
        let mut branch = Plant::BOTH.map(|p| {
            (1..=d)
                .map(|k| Mat::zeros(self.node_dim(NodeId::branch(p, k)), width))
                .collect::<Vec<_>>()
        });
        // The plant atom is the first row block of the size-1 node on both branches.
        for (p, x) in [(Plant::One, x1), (Plant::Two, x2)] {
            branch[p.index()][0].rows_mut(0, x.nrows()).copy_from(x);
        }
        Ok(ControllerState {
            t: 0,
            e: [d, d],
            root: Mat::zeros(self.agg.state_dim(), width),
            branch,
        })
    }

    /// `φʳ = Kʳζʳ`; `uⁱ` is the plant-`i` block of `φ^V` plus `φˢ` over the
    /// private nodes `|s| ≤ eⁱ_t` of branch `i`.
    pub fn compute_inputs(&self, state: &ControllerState, gains: &GainTable) -> Inputs {
        let width = state.width();
        let root = &gains.root * &state.root;
        let mut u = root.clone();
        let branch = Plant::BOTH.map(|p| {
            let i = p.index();
            let range = self.agg.input_range(p);
            state.branch[i]
                .iter()
                .enumerate()
                .map(|(k, z)| {
                    let size = k + 1;
                    if size > state.e[i] {
                        return Mat::zeros(range.len(), width);
                    }
                    let phi = gains.get(NodeId::branch(p, size)) * z;
                    let mut block = u.rows_mut(range.start, range.len());
                    block += &phi;
                    phi
                })
                .collect()
        });
        Inputs { u, root, branch }
    }

    /// Advance to `t + 1` given `e_{t+1}` and the noise `w_t` (one column per
    /// batch entry).
    ///
    /// A branch coordinate at size `k` moves into `ζ^V` when
    /// `k ≥ eⁱ_{t+1}` and otherwise moves to size `k + 1`. The size-1 node
    /// receives `wⁱ_t`, which goes straight to `ζ^V` when `eⁱ_{t+1} = 0`.
    pub fn step(
        &self,
        state: &ControllerState,
        inputs: &Inputs,
        e_next: [usize; 2],
        w1: &Mat,
        w2: &Mat,
    ) -> ControllerState {
        let d = self.delay();
        let width = state.width();
        let agg = &self.agg;
        let mut root = &agg.a * &state.root + &agg.b * &inputs.root;
        let mut branch: [Vec<Mat>; 2] = [Vec::with_capacity(d), Vec::with_capacity(d)];
        for (p, w) in [(Plant::One, w1), (Plant::Two, w2)] {
            let i = p.index();
            let e = e_next[i].min(d);
            let fresh_shared = e == 0 && self.fault != Some(ControllerFault::KeepFreshNoisePrivate);
            let mut leaf = Mat::zeros(self.node_dim(NodeId::branch(p, 1)), width);
            if fresh_shared {
                let r = agg.plant_range(p);
                let mut block = root.rows_mut(r.start, r.len());
                block += w;
            } else {
                leaf.rows_mut(0, w.nrows()).copy_from(w);
            }
            branch[i].push(leaf);
            for k in 1..=d {
                let node = NodeId::branch(p, k);
                let o = self.ops.get(node);
                let z = &state.branch[i][k - 1];
                let phi = &inputs.branch[i][k - 1];
                let live = k <= state.e[i];
                if k >= e {
                    if live && self.fault != Some(ControllerFault::SkipAbsorption) {
                        root += &o.a_root * z + &o.b_root * phi;
                    }
                } else if live {
                    branch[i].push(&o.a_parent * z + &o.b_parent * phi);
                } else {
                    branch[i].push(Mat::zeros(o.a_parent.nrows(), width));
                }
            }
            // Sizes above `e` are zero.
            while branch[i].len() < d {
                let k = branch[i].len() + 1;
                branch[i].push(Mat::zeros(self.node_dim(NodeId::branch(p, k)), width));
            }
        }
        ControllerState {
            t: state.t + 1,
            e: e_next,
            root,
            branch,
        }
    }

    /// `Σ_s I^{V,s} ζˢ`, which equals the plant state.
    pub fn reconstruct(&self, state: &ControllerState) -> Mat {
        let mut x = state.root.clone();
        for (node, ranges) in &self.rows {
            if *node == NodeId::Root {
                continue;
            }
            let z = state.zeta(*node);
            let mut c = 0;
            for r in ranges {
                let mut block = x.rows_mut(r.start, r.len());
                block += z.rows(c, r.len());
                c += r.len();
            }
        }
        x
    }

    /// `w_t = x_{t+1} − A x_t − B u_t` split into its two plant blocks.
    pub fn measured_noise(&self, x: &Vector, u: &Vector, x_next: &Vector) -> (Vector, Vector) {
        let w = x_next - &self.agg.a * x - &self.agg.b * u;
        let r1 = self.agg.plant_range(Plant::One);
        let r2 = self.agg.plant_range(Plant::Two);
        (
            w.rows(r1.start, r1.len()).into_owned(),
            w.rows(r2.start, r2.len()).into_owned(),
        )
    }

    /// `w_t = x_{t+1} − A x̂_t − B u_t` with `x̂_t = Σ_s I^{V,s} ζˢ_t` the
    /// controller's own reconstruction. Equal to [`Controller::measured_noise`]
    /// in exact arithmetic; anchoring on `x̂_t` keeps rounding error in
    /// `x − x̂` from growing at the open-loop rate of `A`.
    pub fn innovation(&self, state: &ControllerState, u: &Vector, x_next: &Vector) -> (Vector, Vector) {
        let x_hat = self.reconstruct(state).column(0).into_owned();
        self.measured_noise(&x_hat, u, x_next)
    }

    /// Atoms of a node; convenience passthrough for reporting.
    pub fn atoms(&self, node: NodeId) -> Vec<Atom> {
        self.ops.graph.atoms(node)
    }
}

/// Column view helper: a vector as a one-column matrix.
pub fn column(v: &Vector) -> Mat {
    Mat::from_column_slice(v.len(), 1, v.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delay::DelayModel;
    use crate::linalg::max_abs;
    use crate::plant::{build_aggregate, scalar_spec};
    use crate::synthesis::synthesize;

    fn setup(delay: usize, model: &DelayModel) -> (Controller, GainTable) {
        let agg = build_aggregate(&scalar_spec(delay)).unwrap();
        let graph = InfoGraph::new(delay).unwrap();
        let gains = synthesize(&agg, model).unwrap().gain_table();
        (Controller::new(&agg, &graph).unwrap(), gains)
    }

    fn v(x: f64) -> Vector {
        Vector::from_element(1, x)
    }

    #[test]
    fn zero_initial_state_is_all_zero() {
        let (c, gains) = setup(3, &DelayModel::constant(3, 2).unwrap());
        let s = c.init_state(&v(0.0), &v(0.0)).unwrap();
        assert!(max_abs(&s.root) == 0.0);
        let inp = c.compute_inputs(&s, &gains);
        assert!(max_abs(&inp.u) == 0.0);
        let s1 = c.step(&s, &inp, [2, 2], &column(&v(0.0)), &column(&v(0.0)));
        assert!(max_abs(&c.reconstruct(&s1)) == 0.0);
    }

    #[test]
    fn initial_reconstruction_places_leaves() {
        let (c, _) = setup(3, &DelayModel::constant(3, 2).unwrap());
        let s = c.init_state(&v(1.5), &v(-2.0)).unwrap();
        let x = c.reconstruct(&s);
        let mut want = vec![0.0; 6];
        want[0] = 1.5;
        want[5] = -2.0;
        assert_eq!(x.as_slice(), want.as_slice());
    }

    #[test]
    fn zero_delay_moves_everything_to_root() {
        let (c, gains) = setup(2, &DelayModel::constant(2, 0).unwrap());
        let s = c.init_state(&v(1.0), &v(2.0)).unwrap();
        let inp = c.compute_inputs(&s, &gains);
        let s1 = c.step(&s, &inp, [0, 0], &column(&v(0.3)), &column(&v(-0.1)));
        for p in Plant::BOTH {
            for z in &s1.branch[p.index()] {
                assert!(max_abs(z) == 0.0);
            }
        }
        assert!(max_abs(&s1.root) > 0.0);
        // With everything shared, u = K^V x.
        let inp1 = c.compute_inputs(&s1, &gains);
        let x1 = c.reconstruct(&s1);
        assert!(max_abs(&(&inp1.u - &gains.root * x1)) < 1e-12);
    }

    #[test]
    fn impulse_walks_down_branch() {
        let d = 3;
        let (c, gains) = setup(d, &DelayModel::constant(d, d).unwrap());
        let mut s = c.init_state(&v(0.0), &v(0.0)).unwrap();
        let zero = column(&v(0.0));
        for t in 0..=d {
            let inp = c.compute_inputs(&s, &gains);
            let w1 = if t == 0 { column(&v(1.0)) } else { zero.clone() };
            s = c.step(&s, &inp, [d, d], &w1, &zero);
            for k in 1..=d {
                let nz = max_abs(&s.branch[0][k - 1]) > 0.0;
                assert_eq!(nz, k == t + 1, "t={t} k={k}");
            }
            assert_eq!(max_abs(&s.root) > 0.0, t + 1 > d);
        }
    }

    #[test]
    fn u1_without_private_nodes_is_root_block() {
        let (c, gains) = setup(2, &DelayModel::symmetric(2, &[(0, 0.5), (2, 0.5)]).unwrap());
        let mut s = c.init_state(&v(1.0), &v(1.0)).unwrap();
        s.e = [0, 2];
        for z in &mut s.branch[0] {
            z.fill(0.0);
        }
        s.root[(0, 0)] = 0.7;
        let inp = c.compute_inputs(&s, &gains);
        assert_eq!(inp.u[(0, 0)], inp.root[(0, 0)]);
    }

    #[test]
    fn fault_breaks_reconstruction() {
        let (c, gains) = setup(2, &DelayModel::constant(2, 1).unwrap());
        let c = c.with_fault(Some(ControllerFault::SkipAbsorption));
        let mut s = c.init_state(&v(1.0), &v(1.0)).unwrap();
        let inp = c.compute_inputs(&s, &gains);
        s = c.step(&s, &inp, [1, 1], &column(&v(0.0)), &column(&v(0.0)));
        // The size-1 coordinate was absorbed and then dropped.
        assert!(max_abs(&c.reconstruct(&s)) == 0.0);
    }

    #[test]
    fn measured_noise_inverts_plant_step() {
        let (c, _) = setup(2, &DelayModel::constant(2, 1).unwrap());
        let agg = c.aggregate();
        let x = Vector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
        let u = Vector::from_vec(vec![0.5, -0.5]);
        let w = agg.noise_vector(&v(0.25), &v(-0.75));
        let x1 = agg.step(&x, &u, &w);
        let (w1, w2) = c.measured_noise(&x, &u, &x1);
        assert!((w1[0] - 0.25).abs() < 1e-14 && (w2[0] + 0.75).abs() < 1e-14);
    }
}
