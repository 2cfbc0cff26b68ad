//! Riccati synthesis: the centralized DARE at the root, the coupled per-node
//! recursions on the branches, the finite-horizon dynamic program, and exact
//! cost evaluation of arbitrary gain sets.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::delay::{build_chain, regime_probabilities, DelayModel, EffectiveDelayChain, RegimeProbabilities};
use crate::error::{Error, Result};
use crate::infograph::{InfoGraph, NodeId};
use crate::linalg::{max_abs, quad_form, spectral_radius, symmetrize, trace_product, Mat};
use crate::plant::{AggregateSystem, Plant};

const DARE_TOL: f64 = 1e-12;
const DARE_MAX_ITER: usize = 100_000;

#[derive(Clone, Debug)]
pub struct DareSolution {
    pub x: Mat,
    pub k: Mat,
    pub iterations: usize,
}

impl DareSolution {
    /// `‖X − (Q + AᵀXA + AᵀXBK)‖_∞` (max-abs entry).
    pub fn residual(&self, a: &Mat, b: &Mat, q: &Mat) -> f64 {
        let x = &self.x;
        let rhs = q + a.transpose() * x * a + a.transpose() * x * b * &self.k;
        max_abs(&(x - rhs))
    }
}

/// `−(R + BᵀXB)⁻¹ BᵀXA`, plus the Schur complement form of the next `X`.
fn lqr_gain(a: &Mat, b: &Mat, r: &Mat, x: &Mat) -> Result<Mat> {
    if b.ncols() == 0 {
        return Ok(Mat::zeros(0, a.ncols()));
    }
    let psi = r + b.transpose() * x * b;
    let rhs = b.transpose() * x * a;
    let chol = psi
        .cholesky()
        .ok_or_else(|| Error::Numerical("R + BᵀXB is not positive definite".into()))?;
    Ok(-chol.solve(&rhs))
}

/// Stabilizing solution of `X = Q + AᵀXA − AᵀXB(R + BᵀXB)⁻¹BᵀXA` by
/// iterating the Riccati recursion from `X = Q`.
pub fn solve_dare(a: &Mat, b: &Mat, q: &Mat, r: &Mat) -> Result<DareSolution> {
    let mut x = q.clone();
    for it in 1..=DARE_MAX_ITER {
        let k = lqr_gain(a, b, r, &x)?;
        let mut next = q + a.transpose() * &x * a + a.transpose() * &x * b * &k;
        symmetrize(&mut next);
        let change = max_abs(&(&next - &x));
        let scale = max_abs(&next).max(1.0);
        if !change.is_finite() {
            return Err(Error::Numerical("Riccati iteration diverged".into()));
        }
        x = next;
        if change <= DARE_TOL * scale {
            let k = lqr_gain(a, b, r, &x)?;
            let rho = spectral_radius(&(a + b * &k));
            if rho >= 1.0 {
                return Err(Error::Numerical(format!(
                    "Riccati limit is not stabilizing (closed-loop spectral radius {rho})"
                )));
            }
            return Ok(DareSolution {
                x,
                k,
                iterations: it,
            });
        }
    }
    Err(Error::Numerical(format!(
        "Riccati iteration did not converge in {DARE_MAX_ITER} steps; check stabilizability and detectability"
    )))
}

/// Block operators seen by one node `r` with successor `s`.
#[derive(Clone, Debug)]
pub struct NodeOperators {
    pub node: NodeId,
    pub parent: NodeId,
    /// `A^{Vr}`, `B^{Vr}`
    pub a_root: Mat,
    pub b_root: Mat,
    /// `A^{sr}`, `B^{sr}`
    pub a_parent: Mat,
    pub b_parent: Mat,
    pub q: Mat,
    pub q_terminal: Mat,
    pub r: Mat,
}

impl NodeOperators {
    pub fn build(agg: &AggregateSystem, graph: &InfoGraph, node: NodeId) -> Result<Self> {
        let atoms = graph.atoms(node);
        let root = graph.atoms(NodeId::Root);
        let parent = graph.parent(node);
        let patoms = graph.atoms(parent);
        Ok(NodeOperators {
            node,
            parent,
            a_root: agg.select_state(&agg.a, &root, &atoms)?,
            b_root: agg.select_input(&agg.b, &root, &atoms)?,
            a_parent: agg.select_state(&agg.a, &patoms, &atoms)?,
            b_parent: agg.select_input(&agg.b, &patoms, &atoms)?,
            q: agg.select_state(&agg.q, &atoms, &atoms)?,
            q_terminal: agg.select_state(&agg.q_terminal, &atoms, &atoms)?,
            r: agg.select_input_cost(&agg.r, &atoms, &atoms)?,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.q.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.r.nrows()
    }
}

/// Operators for every node, indexed like the graph.
#[derive(Clone, Debug)]
pub struct GraphOperators {
    pub graph: InfoGraph,
    pub nodes: BTreeMap<NodeId, NodeOperators>,
}

impl GraphOperators {
    pub fn build(agg: &AggregateSystem, graph: &InfoGraph) -> Result<Self> {
        if graph.delay() != agg.delay {
            return Err(Error::Dimension {
                expected: agg.delay,
                found: graph.delay(),
            });
        }
        let nodes = graph
            .nodes()
            .map(|n| Ok((n, NodeOperators::build(agg, graph, n)?)))
            .collect::<Result<_>>()?;
        Ok(GraphOperators {
            graph: graph.clone(),
            nodes,
        })
    }

    pub fn get(&self, node: NodeId) -> &NodeOperators {
        &self.nodes[&node]
    }

    /// Branch nodes ordered so that every node comes after its successor.
    pub fn branch_order(&self) -> Vec<NodeId> {
        let d = self.graph.delay();
        (1..=d)
            .rev()
            .flat_map(|k| Plant::BOTH.map(|p| NodeId::branch(p, k)))
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct NodeGains {
    pub node: NodeId,
    pub x: Mat,
    pub k: Mat,
    pub lambda: Mat,
    pub psi: Mat,
    pub omega: Mat,
    pub p: f64,
    pub q: f64,
}

/// One step of the per-node recursion given the root and successor values.
fn node_update(ops: &NodeOperators, p: f64, q_stage: &Mat, x_root: &Mat, x_parent: &Mat) -> Result<NodeGains> {
    let q = 1.0 - p;
    let (av, bv, as_, bs) = (&ops.a_root, &ops.b_root, &ops.a_parent, &ops.b_parent);
    let lambda = q_stage + p * av.transpose() * x_root * av + q * as_.transpose() * x_parent * as_;
    let mut psi = &ops.r + p * bv.transpose() * x_root * bv + q * bs.transpose() * x_parent * bs;
    symmetrize(&mut psi);
    let omega = p * av.transpose() * x_root * bv + q * as_.transpose() * x_parent * bs;
    let k = if psi.nrows() == 0 {
        Mat::zeros(0, lambda.nrows())
    } else {
        let chol = psi.clone().cholesky().ok_or_else(|| {
            Error::Numerical(format!("Ψ for node {} is not positive definite", ops.node))
        })?;
        -chol.solve(&omega.transpose())
    };
    let mut x = &lambda + &omega * &k;
    symmetrize(&mut x);
    Ok(NodeGains {
        node: ops.node,
        x,
        k,
        lambda,
        psi,
        omega,
        p,
        q,
    })
}

/// Infinite-horizon gains for every branch node, processed by decreasing
/// size so that each successor's `X` is final before it is used.
pub fn solve_node_gains(
    ops: &GraphOperators,
    probs: &RegimeProbabilities,
    x_root: &Mat,
) -> Result<BTreeMap<NodeId, NodeGains>> {
    let mut out: BTreeMap<NodeId, NodeGains> = BTreeMap::new();
    for node in ops.branch_order() {
        let o = ops.get(node);
        let x_parent = match o.parent {
            NodeId::Root => x_root,
            s => &out[&s].x,
        };
        let g = node_update(o, probs.p(node), &o.q, x_root, x_parent)?;
        out.insert(node, g);
    }
    Ok(out)
}

/// Gain matrices consumed by the controller.
#[derive(Clone, Debug, PartialEq)]
pub struct GainTable {
    pub root: Mat,
    /// `branch[i][k − 1]` is `Kʳ` of the branch-`i` node of size `k`.
    pub branch: [Vec<Mat>; 2],
}

impl GainTable {
    pub fn get(&self, node: NodeId) -> &Mat {
        match node {
            NodeId::Root => &self.root,
            NodeId::Branch { plant, size } => &self.branch[plant.index()][size - 1],
        }
    }

    pub fn get_mut(&mut self, node: NodeId) -> &mut Mat {
        match node {
            NodeId::Root => &mut self.root,
            NodeId::Branch { plant, size } => &mut self.branch[plant.index()][size - 1],
        }
    }

    fn from_fn(graph: &InfoGraph, mut f: impl FnMut(NodeId) -> Mat) -> Self {
        let root = f(NodeId::Root);
        let branch = Plant::BOTH.map(|p| graph.branch(p).map(&mut f).collect());
        GainTable { root, branch }
    }
}

/// Stationary or time-varying gains.
#[derive(Clone, Debug, PartialEq)]
pub enum Policy {
    Stationary(GainTable),
    /// One table per `t = 0..T`.
    TimeVarying(Vec<GainTable>),
}

impl Policy {
    pub fn at(&self, t: usize) -> &GainTable {
        match self {
            Policy::Stationary(g) => g,
            Policy::TimeVarying(v) => &v[t.min(v.len() - 1)],
        }
    }
}

/// `(1 − fᵢ) X^{{i}} + fᵢ X^V_{ii}`: expected value matrix of fresh noise on
/// plant `i`, which lands on node `{i}` unless it is shared immediately.
fn entry_matrix(agg: &AggregateSystem, probs: &RegimeProbabilities, plant: Plant, x_leaf: &Mat, x_root: &Mat) -> Mat {
    let f = probs.fresh(plant);
    let r = agg.plant_range(plant);
    let root_block = x_root.view((r.start, r.start), (r.len(), r.len())).into_owned();
    (1.0 - f) * x_leaf + f * root_block
}

fn noise_cost(agg: &AggregateSystem, probs: &RegimeProbabilities, leaf: [&Mat; 2], x_root: &Mat) -> f64 {
    Plant::BOTH
        .into_iter()
        .map(|p| {
            let entry = entry_matrix(agg, probs, p, leaf[p.index()], x_root);
            trace_product(&entry, agg.noise_cov(p))
        })
        .sum()
}

#[derive(Clone, Debug)]
pub struct SynthesisResult {
    pub graph: InfoGraph,
    pub root: DareSolution,
    pub dare_residual: f64,
    pub nodes: BTreeMap<NodeId, NodeGains>,
    pub probabilities: RegimeProbabilities,
    pub chains: Option<[EffectiveDelayChain; 2]>,
    /// `Σᵢ Tr(X^{entry,i} Wⁱ)`.
    pub predicted_cost: f64,
}

impl SynthesisResult {
    pub fn x(&self, node: NodeId) -> &Mat {
        match node {
            NodeId::Root => &self.root.x,
            n => &self.nodes[&n].x,
        }
    }

    pub fn k(&self, node: NodeId) -> &Mat {
        match node {
            NodeId::Root => &self.root.k,
            n => &self.nodes[&n].k,
        }
    }

    pub fn gain_table(&self) -> GainTable {
        GainTable::from_fn(&self.graph, |n| self.k(n).clone())
    }

    pub fn policy(&self) -> Policy {
        Policy::Stationary(self.gain_table())
    }

    /// `Σᵢ Tr(X^{{i}} Wⁱ)` with the leaf matrices alone; equals
    /// [`SynthesisResult::predicted_cost`] when no delay can be zero.
    pub fn leaf_cost(&self, agg: &AggregateSystem) -> f64 {
        Plant::BOTH
            .into_iter()
            .map(|p| trace_product(self.x(NodeId::branch(p, 1)), agg.noise_cov(p)))
            .sum()
    }
}

/// Full infinite-horizon synthesis from a delay model, with probabilities
/// taken from the stationary effective-delay chains.
pub fn synthesize(agg: &AggregateSystem, model: &DelayModel) -> Result<SynthesisResult> {
    if model.delay() != agg.delay {
        return Err(Error::validation(
            "delay",
            format!("delay model horizon {} differs from plant delay {}", model.delay(), agg.delay),
        ));
    }
    let graph = InfoGraph::new(agg.delay)?;
    let chains = [build_chain(model, Plant::One), build_chain(model, Plant::Two)];
    let probs = regime_probabilities(&chains[0], &chains[1], &graph);
    let mut res = synthesize_with(agg, &graph, probs)?;
    res.chains = Some(chains);
    Ok(res)
}

/// Infinite-horizon synthesis with externally supplied probabilities.
pub fn synthesize_with(agg: &AggregateSystem, graph: &InfoGraph, probs: RegimeProbabilities) -> Result<SynthesisResult> {
    let root = solve_dare(&agg.a, &agg.b, &agg.q, &agg.r)?;
    let dare_residual = root.residual(&agg.a, &agg.b, &agg.q);
    let ops = GraphOperators::build(agg, graph)?;
    let nodes = solve_node_gains(&ops, &probs, &root.x)?;
    let leaf = Plant::BOTH.map(|p| &nodes[&NodeId::branch(p, 1)].x);
    let predicted_cost = noise_cost(agg, &probs, leaf, &root.x);
    Ok(SynthesisResult {
        graph: graph.clone(),
        root,
        dare_residual,
        nodes,
        probabilities: probs,
        chains: None,
        predicted_cost,
    })
}

/// `Σᵢ Tr(X^{entry,i} Wⁱ)` for a finished synthesis.
pub fn predicted_cost(result: &SynthesisResult, agg: &AggregateSystem) -> f64 {
    let leaf = Plant::BOTH.map(|p| result.x(NodeId::branch(p, 1)));
    noise_cost(agg, &result.probabilities, leaf, &result.root.x)
}

/// Value matrices for every node at one time.
#[derive(Clone, Debug)]
pub struct ValueTable {
    pub root: Mat,
    pub branch: [Vec<Mat>; 2],
}

impl ValueTable {
    pub fn get(&self, node: NodeId) -> &Mat {
        match node {
            NodeId::Root => &self.root,
            NodeId::Branch { plant, size } => &self.branch[plant.index()][size - 1],
        }
    }

    fn terminal(ops: &GraphOperators, agg: &AggregateSystem) -> Self {
        ValueTable {
            root: agg.q_terminal.clone(),
            branch: Plant::BOTH.map(|p| {
                ops.graph
                    .branch(p)
                    .map(|n| ops.get(n).q_terminal.clone())
                    .collect()
            }),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FiniteHorizonResult {
    pub horizon: usize,
    /// `values[t]` for `t = 0..=T`; `values[T]` is the terminal weight.
    pub values: Vec<ValueTable>,
    /// `gains[t]` for `t = 0..T`.
    pub gains: Vec<GainTable>,
    /// `c[t]` for `t = 0..=T`, `c[T] = 0`.
    pub constants: Vec<f64>,
    /// Optimal expected total cost `V_0`.
    pub value: f64,
}

impl FiniteHorizonResult {
    pub fn policy(&self) -> Policy {
        Policy::TimeVarying(self.gains.clone())
    }
}

/// Backward dynamic program over `t = T−1, …, 0`.
///
/// The absorption probability of a live coordinate at branch node `r` is
/// `P(d ≤ |r|)` whatever the current effective delay, so the gains depend on
/// `t` only.
pub fn finite_horizon_dp(
    agg: &AggregateSystem,
    graph: &InfoGraph,
    probs: &RegimeProbabilities,
    horizon: usize,
) -> Result<FiniteHorizonResult> {
    if horizon < 1 {
        return Err(Error::validation("horizon", "finite horizon must be at least 1"));
    }
    let ops = GraphOperators::build(agg, graph)?;
    let mut values = vec![ValueTable::terminal(&ops, agg)];
    let mut gains = Vec::with_capacity(horizon);
    let mut constants = vec![0.0];
    for _ in 0..horizon {
        let next = values.last().unwrap();
        let root_k = lqr_gain(&agg.a, &agg.b, &agg.r, &next.root)?;
        let mut root_x = &agg.q + agg.a.transpose() * &next.root * &agg.a
            + agg.a.transpose() * &next.root * &agg.b * &root_k;
        symmetrize(&mut root_x);
        let mut table = GainTable {
            root: root_k,
            branch: [Vec::new(), Vec::new()],
        };
        let mut xs = ValueTable {
            root: root_x,
            branch: [Vec::new(), Vec::new()],
        };
        for p in Plant::BOTH {
            for node in graph.branch(p) {
                let o = ops.get(node);
                let g = node_update(o, probs.p(node), &o.q, &next.root, next.get(o.parent))?;
                table.branch[p.index()].push(g.k);
                xs.branch[p.index()].push(g.x);
            }
        }
        let leaf = Plant::BOTH.map(|p| next.get(NodeId::branch(p, 1)));
        let c = constants.last().unwrap() + noise_cost(agg, probs, leaf, &next.root);
        constants.push(c);
        values.push(xs);
        gains.push(table);
    }
    values.reverse();
    gains.reverse();
    constants.reverse();
    let value = initial_value(agg, &values[0], constants[0]);
    Ok(FiniteHorizonResult {
        horizon,
        values,
        gains,
        constants,
        value,
    })
}

/// `Σᵢ μᵢᵀ X^{{i}}_0 μᵢ + Tr(X^{{i}}_0 Σᵢ) + c_0`. The initial state sits on the
/// size-1 nodes since nothing is shared at `t = 0`.
fn initial_value(agg: &AggregateSystem, x0: &ValueTable, c0: f64) -> f64 {
    let mut v = c0;
    for p in Plant::BOTH {
        let r = agg.plant_range(p);
        let mu = agg.mu0.rows(r.start, r.len()).into_owned();
        let sigma = agg.sigma0.view((r.start, r.start), (r.len(), r.len())).into_owned();
        let x = x0.get(NodeId::branch(p, 1));
        v += quad_form(x, &mu) + trace_product(x, &sigma);
    }
    v
}

/// Closed-loop cost matrix of one node under arbitrary gain `k`.
fn node_policy_value(ops: &NodeOperators, p: f64, k: &Mat, y_root: &Mat, y_parent: &Mat) -> Mat {
    let q = 1.0 - p;
    let av = &ops.a_root + &ops.b_root * k;
    let as_ = &ops.a_parent + &ops.b_parent * k;
    let mut y = &ops.q + k.transpose() * &ops.r * k
        + p * av.transpose() * y_root * &av
        + q * as_.transpose() * y_parent * &as_;
    symmetrize(&mut y);
    y
}

/// `Y = M + FᵀYF` by Smith doubling; `F` must be Schur stable.
fn stein_solve(f: &Mat, m: &Mat) -> Result<Mat> {
    let rho = spectral_radius(f);
    if rho >= 1.0 {
        return Err(Error::Numerical(format!(
            "closed loop is unstable (spectral radius {rho})"
        )));
    }
    let mut y = m.clone();
    let mut fk = f.clone();
    for _ in 0..200 {
        let inc = fk.transpose() * &y * &fk;
        y += &inc;
        fk = &fk * &fk;
        if max_abs(&inc) <= 1e-16 * max_abs(&y).max(1e-300) {
            break;
        }
    }
    symmetrize(&mut y);
    Ok(y)
}

/// Exact long-run average cost of the stationary controller driven by
/// `gains`, which need not be optimal.
pub fn evaluate_stationary(
    agg: &AggregateSystem,
    graph: &InfoGraph,
    probs: &RegimeProbabilities,
    gains: &GainTable,
) -> Result<f64> {
    let ops = GraphOperators::build(agg, graph)?;
    let acl = &agg.a + &agg.b * &gains.root;
    let y_root = stein_solve(&acl, &(&agg.q + gains.root.transpose() * &agg.r * &gains.root))?;
    let mut ys: BTreeMap<NodeId, Mat> = BTreeMap::new();
    for node in ops.branch_order() {
        let o = ops.get(node);
        let y_parent = match o.parent {
            NodeId::Root => &y_root,
            s => &ys[&s],
        };
        let y = node_policy_value(o, probs.p(node), gains.get(node), &y_root, y_parent);
        ys.insert(node, y);
    }
    let leaf = Plant::BOTH.map(|p| &ys[&NodeId::branch(p, 1)]);
    Ok(noise_cost(agg, probs, leaf, &y_root))
}

/// Exact expected total cost over `T = policy.len()` steps of a time-varying
/// controller.
pub fn evaluate_finite(
    agg: &AggregateSystem,
    graph: &InfoGraph,
    probs: &RegimeProbabilities,
    policy: &[GainTable],
) -> Result<f64> {
    let ops = GraphOperators::build(agg, graph)?;
    let mut next = ValueTable::terminal(&ops, agg);
    let mut c = 0.0;
    for gains in policy.iter().rev() {
        let acl = &agg.a + &agg.b * &gains.root;
        let mut root = &agg.q + gains.root.transpose() * &agg.r * &gains.root
            + acl.transpose() * &next.root * &acl;
        symmetrize(&mut root);
        let branch = Plant::BOTH.map(|p| {
            graph
                .branch(p)
                .map(|node| {
                    let o = ops.get(node);
                    node_policy_value(o, probs.p(node), gains.get(node), &next.root, next.get(o.parent))
                })
                .collect()
        });
        let leaf = Plant::BOTH.map(|p| next.get(NodeId::branch(p, 1)));
        c += noise_cost(agg, probs, leaf, &next.root);
        next = ValueTable { root, branch };
    }
    Ok(initial_value(agg, &next, c))
}

/// Human-readable synthesis summary.
pub fn render_report(result: &SynthesisResult, agg: &AggregateSystem) -> String {
    let mut s = String::new();
    let d = result.graph.delay();
    let _ = writeln!(s, "delay D = {d}, augmented state dimension {}", agg.state_dim());
    let regime = if result.probabilities.is_centralized() {
        "centralized-equivalent"
    } else {
        "delayed-sharing"
    };
    let _ = writeln!(s, "regime: {regime}");
    if let Some(chains) = &result.chains {
        for c in chains {
            let pi: Vec<String> = c.stationary.iter().map(|x| format!("{x:.12}")).collect();
            let _ = writeln!(
                s,
                "effective delay e{} stationary pi = ({}), residual {:.3e}",
                c.plant,
                pi.join(", "),
                c.stationary_residual()
            );
            if !c.transient.is_empty() {
                let _ = writeln!(s, "  transient states: {:?}", c.transient);
            }
        }
    }
    let _ = writeln!(
        s,
        "DARE residual {:.3e} after {} iterations",
        result.dare_residual, result.root.iterations
    );
    for node in result.graph.nodes() {
        let (p, q) = (result.probabilities.p(node), result.probabilities.q(node));
        let _ = writeln!(s, "node {node}: p = {p:.12}, q = {q:.12}");
        let _ = writeln!(s, "  X = {}", fmt_matrix(result.x(node)));
        let _ = writeln!(s, "  K = {}", fmt_matrix(result.k(node)));
    }
    let _ = writeln!(s, "predicted average cost {:.12}", result.predicted_cost);
    s
}

/// Nine decimals, without a sign on values that round to zero.
fn fmt_entry(v: f64) -> String {
    let s = format!("{v:.9}");
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

fn fmt_matrix(m: &Mat) -> String {
    let rows: Vec<String> = (0..m.nrows())
        .map(|i| {
            let r: Vec<String> = (0..m.ncols()).map(|j| fmt_entry(m[(i, j)])).collect();
            format!("[{}]", r.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

/// Long-format CSV of every node's `X` and `K`: `node,matrix,row,col,value`.
pub fn matrices_csv(result: &SynthesisResult) -> String {
    let mut s = String::from("node,matrix,row,col,value\n");
    for node in result.graph.nodes() {
        for (name, m) in [("X", result.x(node)), ("K", result.k(node))] {
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    let _ = writeln!(s, "{},{name},{i},{j},{:e}", node.key(), m[(i, j)]);
                }
            }
        }
    }
    s
}

/// `node,p,q` for every node.
pub fn probabilities_csv(result: &SynthesisResult) -> String {
    let mut s = String::from("node,p,q\n");
    for node in result.graph.nodes() {
        let _ = writeln!(
            s,
            "{},{},{}",
            node.key(),
            result.probabilities.p(node),
            result.probabilities.q(node)
        );
    }
    s
}
