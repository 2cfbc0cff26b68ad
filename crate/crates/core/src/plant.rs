//! The two-subsystem plant and its augmented state space.
//!
//! The augmented state is ordered `[x¹; δ¹; …; δ^{D−1}; x²]` where the dummy
//! atom `δᵏ = [x¹_{t−k}; x²_{t−(D−k)}]` carries the in-flight part of the
//! propagation delay between the plants. Inputs share the same atom
//! partition, with zero-width dummy blocks.

use std::collections::VecDeque;
use std::fmt;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::linalg::{is_symmetric, min_eigenvalue, Mat, Vector};

const PSD_TOL: f64 = 1e-10;

/// One of the two physical subsystems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Plant {
    One,
    Two,
}

impl Plant {
    pub const BOTH: [Plant; 2] = [Plant::One, Plant::Two];

    pub fn index(self) -> usize {
        match self {
            Plant::One => 0,
            Plant::Two => 1,
        }
    }

    pub fn other(self) -> Plant {
        match self {
            Plant::One => Plant::Two,
            Plant::Two => Plant::One,
        }
    }

    pub fn number(self) -> u8 {
        self.index() as u8 + 1
    }
}

impl fmt::Display for Plant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// Atom labels of the augmented state: the two plants and the dummy delay nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    Plant(Plant),
    /// `δᵏ`, valid for `1 ≤ k ≤ D − 1`.
    Dummy(usize),
}

impl Atom {
    /// Position of the atom in `[x¹; δ¹; …; δ^{D−1}; x²]`.
    pub fn position(self, delay: usize) -> Result<usize> {
        match self {
            Atom::Plant(Plant::One) => Ok(0),
            Atom::Plant(Plant::Two) => Ok(delay),
            Atom::Dummy(k) if (1..delay).contains(&k) => Ok(k),
            Atom::Dummy(_) => Err(Error::UnknownAtom(self.to_string())),
        }
    }

    pub fn at_position(pos: usize, delay: usize) -> Atom {
        if pos == 0 {
            Atom::Plant(Plant::One)
        } else if pos == delay {
            Atom::Plant(Plant::Two)
        } else {
            Atom::Dummy(pos)
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Plant(p) => write!(f, "{p}"),
            Atom::Dummy(k) => write!(f, "δ{k}"),
        }
    }
}

/// Contiguous block partition of one matrix dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    offsets: Vec<usize>,
}

impl Partition {
    pub fn from_sizes(sizes: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(sizes.len() + 1);
        offsets.push(0);
        for s in sizes {
            offsets.push(offsets.last().unwrap() + s);
        }
        Partition { offsets }
    }

    pub fn blocks(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn range(&self, block: usize) -> Range<usize> {
        self.offsets[block]..self.offsets[block + 1]
    }

    pub fn size(&self, block: usize) -> usize {
        self.offsets[block + 1] - self.offsets[block]
    }

    /// Total width of the listed blocks.
    pub fn dim_of(&self, blocks: &[usize]) -> usize {
        blocks.iter().map(|&b| self.size(b)).sum()
    }
}

/// `M^{s,v}`: the blocks `(i, j)` with `i ∈ s`, `j ∈ v`, stacked in the given order.
pub fn block_select(
    m: &Mat,
    rows: &Partition,
    cols: &Partition,
    s: &[usize],
    v: &[usize],
) -> Result<Mat> {
    if m.nrows() != rows.dim() {
        return Err(Error::Dimension {
            expected: rows.dim(),
            found: m.nrows(),
        });
    }
    if m.ncols() != cols.dim() {
        return Err(Error::Dimension {
            expected: cols.dim(),
            found: m.ncols(),
        });
    }
    for &b in s {
        if b >= rows.blocks() {
            return Err(Error::UnknownAtom(format!("row block {b}")));
        }
    }
    for &b in v {
        if b >= cols.blocks() {
            return Err(Error::UnknownAtom(format!("column block {b}")));
        }
    }
    let mut out = Mat::zeros(rows.dim_of(s), cols.dim_of(v));
    let mut r0 = 0;
    for &bi in s {
        let ri = rows.range(bi);
        let mut c0 = 0;
        for &bj in v {
            let cj = cols.range(bj);
            out.view_mut((r0, c0), (ri.len(), cj.len()))
                .copy_from(&m.view((ri.start, cj.start), (ri.len(), cj.len())));
            c0 += cj.len();
        }
        r0 += ri.len();
    }
    Ok(out)
}

/// User-facing description of the two subsystems.
///
/// `q` and `r` act on the augmented state and the stacked input `[u¹; u²]`.
/// [`PlantSpec::local_state_cost`] builds a `q` that weights only the plant
/// atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct PlantSpec {
    pub delay: usize,
    pub a11: Mat,
    pub a12: Mat,
    pub a21: Mat,
    pub a22: Mat,
    pub b1: Mat,
    pub b2: Mat,
    pub q: Mat,
    pub r: Mat,
    pub w1: Mat,
    pub w2: Mat,
    pub mu0_1: Vector,
    pub mu0_2: Vector,
    pub sigma0_1: Mat,
    pub sigma0_2: Mat,
    /// Terminal weight for finite horizons; `q` when absent.
    pub q_terminal: Option<Mat>,
}

impl PlantSpec {
    pub fn n1(&self) -> usize {
        self.a11.nrows()
    }

    pub fn n2(&self) -> usize {
        self.a22.nrows()
    }

    pub fn m1(&self) -> usize {
        self.b1.ncols()
    }

    pub fn m2(&self) -> usize {
        self.b2.ncols()
    }

    pub fn state_dim(&self) -> usize {
        self.delay * (self.n1() + self.n2())
    }

    /// Block-diagonal augmented state cost with zero weight on dummy atoms.
    pub fn local_state_cost(delay: usize, q1: &Mat, q2: &Mat) -> Mat {
        let n1 = q1.nrows();
        let n2 = q2.nrows();
        let n = delay.max(1) * (n1 + n2);
        let mut q = Mat::zeros(n, n);
        q.view_mut((0, 0), (n1, n1)).copy_from(q1);
        q.view_mut((n - n2, n - n2), (n2, n2)).copy_from(q2);
        q
    }

    pub fn validate(&self) -> Result<()> {
        if self.delay < 1 {
            return Err(Error::validation("plant.delay", "must be at least 1"));
        }
        let (n1, n2, m1, m2) = (self.n1(), self.n2(), self.m1(), self.m2());
        if n1 == 0 || n2 == 0 {
            return Err(Error::validation(
                if n1 == 0 { "plant.a11" } else { "plant.a22" },
                "subsystem state must be non-empty",
            ));
        }
        check_shape("plant.a11", &self.a11, n1, n1)?;
        check_shape("plant.a22", &self.a22, n2, n2)?;
        check_shape("plant.a12", &self.a12, n1, n2)?;
        check_shape("plant.a21", &self.a21, n2, n1)?;
        check_shape("plant.b1", &self.b1, n1, m1)?;
        check_shape("plant.b2", &self.b2, n2, m2)?;
        let n = self.state_dim();
        check_shape("plant.q", &self.q, n, n)?;
        check_psd("plant.q", &self.q)?;
        check_shape("plant.r", &self.r, m1 + m2, m1 + m2)?;
        if !is_symmetric(&self.r, PSD_TOL) {
            return Err(Error::validation("plant.r", "must be symmetric"));
        }
        if m1 + m2 > 0 && min_eigenvalue(&self.r) <= 0.0 {
            return Err(Error::validation("plant.r", "must be positive definite"));
        }
        check_shape("plant.w1", &self.w1, n1, n1)?;
        check_psd("plant.w1", &self.w1)?;
        check_shape("plant.w2", &self.w2, n2, n2)?;
        check_psd("plant.w2", &self.w2)?;
        check_shape("plant.sigma0_1", &self.sigma0_1, n1, n1)?;
        check_psd("plant.sigma0_1", &self.sigma0_1)?;
        check_shape("plant.sigma0_2", &self.sigma0_2, n2, n2)?;
        check_psd("plant.sigma0_2", &self.sigma0_2)?;
        if self.mu0_1.len() != n1 {
            return Err(Error::validation(
                "plant.mu0_1",
                format!("expected length {n1}, found {}", self.mu0_1.len()),
            ));
        }
        if self.mu0_2.len() != n2 {
            return Err(Error::validation(
                "plant.mu0_2",
                format!("expected length {n2}, found {}", self.mu0_2.len()),
            ));
        }
        if let Some(qt) = &self.q_terminal {
            check_shape("plant.q_terminal", qt, n, n)?;
            check_psd("plant.q_terminal", qt)?;
        }
        Ok(())
    }
}

fn check_shape(field: &str, m: &Mat, rows: usize, cols: usize) -> Result<()> {
    if m.nrows() != rows || m.ncols() != cols {
        return Err(Error::validation(
            field,
            format!(
                "expected {rows}x{cols}, found {}x{}",
                m.nrows(),
                m.ncols()
            ),
        ));
    }
    Ok(())
}

fn check_psd(field: &str, m: &Mat) -> Result<()> {
    if !is_symmetric(m, PSD_TOL) {
        return Err(Error::validation(field, "must be symmetric"));
    }
    if min_eigenvalue(m) < -PSD_TOL {
        return Err(Error::validation(field, "must be positive semi-definite"));
    }
    Ok(())
}

/// The augmented plant `x_{t+1} = A x_t + B u_t + w_t`.
#[derive(Clone, Debug)]
pub struct AggregateSystem {
    pub delay: usize,
    pub n1: usize,
    pub n2: usize,
    pub m1: usize,
    pub m2: usize,
    pub state_partition: Partition,
    pub input_partition: Partition,
    pub a: Mat,
    pub b: Mat,
    pub q: Mat,
    pub q_terminal: Mat,
    pub r: Mat,
    /// Augmented noise covariance; zero outside the plant atoms.
    pub w: Mat,
    pub w1: Mat,
    pub w2: Mat,
    pub mu0: Vector,
    pub sigma0: Mat,
}

/// Build the augmented plant. Validates `spec` first.
pub fn build_aggregate(spec: &PlantSpec) -> Result<AggregateSystem> {
    spec.validate()?;
    let d = spec.delay;
    let (n1, n2, m1, m2) = (spec.n1(), spec.n2(), spec.m1(), spec.m2());
    let mut state_sizes = vec![n1];
    state_sizes.extend(std::iter::repeat_n(n1 + n2, d - 1));
    state_sizes.push(n2);
    let mut input_sizes = vec![m1];
    input_sizes.extend(std::iter::repeat_n(0, d - 1));
    input_sizes.push(m2);
    let sp = Partition::from_sizes(&state_sizes);
    let ip = Partition::from_sizes(&input_sizes);
    let n = sp.dim();

    // Coordinates of the delayed neighbour states inside the augmented vector.
    let x1 = sp.range(0);
    let x2 = sp.range(d);
    let x2_delayed = if d == 1 {
        x2.clone()
    } else {
        let r = sp.range(1);
        r.start + n1..r.end
    };
    let x1_delayed = if d == 1 {
        x1.clone()
    } else {
        let r = sp.range(d - 1);
        r.start..r.start + n1
    };

    let mut a = Mat::zeros(n, n);
    a.view_mut((x1.start, x1.start), (n1, n1)).copy_from(&spec.a11);
    a.view_mut((x1.start, x2_delayed.start), (n1, n2))
        .copy_from(&spec.a12);
    a.view_mut((x2.start, x2.start), (n2, n2)).copy_from(&spec.a22);
    a.view_mut((x2.start, x1_delayed.start), (n2, n1))
        .copy_from(&spec.a21);
    for k in 1..d {
        let dk = sp.range(k);
        // x¹ part of δᵏ comes from the x¹ part of δ^{k−1} (or x¹ itself).
        let src1 = if k == 1 { x1.start } else { sp.range(k - 1).start };
        for c in 0..n1 {
            a[(dk.start + c, src1 + c)] = 1.0;
        }
        // x² part of δᵏ comes from the x² part of δ^{k+1} (or x² itself).
        let src2 = if k == d - 1 {
            x2.start
        } else {
            sp.range(k + 1).start + n1
        };
        for c in 0..n2 {
            a[(dk.start + n1 + c, src2 + c)] = 1.0;
        }
    }

    let mut b = Mat::zeros(n, m1 + m2);
    b.view_mut((x1.start, 0), (n1, m1)).copy_from(&spec.b1);
    b.view_mut((x2.start, m1), (n2, m2)).copy_from(&spec.b2);

    let mut w = Mat::zeros(n, n);
    w.view_mut((x1.start, x1.start), (n1, n1)).copy_from(&spec.w1);
    w.view_mut((x2.start, x2.start), (n2, n2)).copy_from(&spec.w2);

    let mut mu0 = Vector::zeros(n);
    mu0.rows_mut(x1.start, n1).copy_from(&spec.mu0_1);
    mu0.rows_mut(x2.start, n2).copy_from(&spec.mu0_2);
    let mut sigma0 = Mat::zeros(n, n);
    sigma0
        .view_mut((x1.start, x1.start), (n1, n1))
        .copy_from(&spec.sigma0_1);
    sigma0
        .view_mut((x2.start, x2.start), (n2, n2))
        .copy_from(&spec.sigma0_2);

    Ok(AggregateSystem {
        delay: d,
        n1,
        n2,
        m1,
        m2,
        state_partition: sp,
        input_partition: ip,
        a,
        b,
        q: spec.q.clone(),
        q_terminal: spec.q_terminal.clone().unwrap_or_else(|| spec.q.clone()),
        r: spec.r.clone(),
        w,
        w1: spec.w1.clone(),
        w2: spec.w2.clone(),
        mu0,
        sigma0,
    })
}

impl AggregateSystem {
    pub fn state_dim(&self) -> usize {
        self.state_partition.dim()
    }

    pub fn input_dim(&self) -> usize {
        self.m1 + self.m2
    }

    pub fn atoms(&self) -> Vec<Atom> {
        (0..=self.delay)
            .map(|p| Atom::at_position(p, self.delay))
            .collect()
    }

    pub fn positions(&self, atoms: &[Atom]) -> Result<Vec<usize>> {
        atoms.iter().map(|a| a.position(self.delay)).collect()
    }

    /// `M^{s,v}` for a state×state matrix such as `A` or `Q`.
    pub fn select_state(&self, m: &Mat, s: &[Atom], v: &[Atom]) -> Result<Mat> {
        block_select(
            m,
            &self.state_partition,
            &self.state_partition,
            &self.positions(s)?,
            &self.positions(v)?,
        )
    }

    /// `B^{s,v}`: state rows of `s`, input columns of `v`.
    pub fn select_input(&self, m: &Mat, s: &[Atom], v: &[Atom]) -> Result<Mat> {
        block_select(
            m,
            &self.state_partition,
            &self.input_partition,
            &self.positions(s)?,
            &self.positions(v)?,
        )
    }

    /// `R^{s,v}` for an input×input matrix.
    pub fn select_input_cost(&self, m: &Mat, s: &[Atom], v: &[Atom]) -> Result<Mat> {
        block_select(
            m,
            &self.input_partition,
            &self.input_partition,
            &self.positions(s)?,
            &self.positions(v)?,
        )
    }

    pub fn state_dim_of(&self, atoms: &[Atom]) -> Result<usize> {
        Ok(self.state_partition.dim_of(&self.positions(atoms)?))
    }

    pub fn input_dim_of(&self, atoms: &[Atom]) -> Result<usize> {
        Ok(self.input_partition.dim_of(&self.positions(atoms)?))
    }

    /// `I^{V,s} z`: place `z` on the coordinates of `s`, zero elsewhere.
    pub fn embed(&self, s: &[Atom], z: &Vector) -> Result<Vector> {
        embed_into(&self.state_partition, &self.positions(s)?, z)
    }

    /// Input-space counterpart of [`AggregateSystem::embed`].
    pub fn embed_input(&self, s: &[Atom], z: &Vector) -> Result<Vector> {
        embed_into(&self.input_partition, &self.positions(s)?, z)
    }

    /// The 0/1 injection matrix `I^{V,s}`.
    pub fn injection(&self, s: &[Atom]) -> Result<Mat> {
        let pos = self.positions(s)?;
        let cols = self.state_partition.dim_of(&pos);
        let mut m = Mat::zeros(self.state_dim(), cols);
        let mut c = 0;
        for p in pos {
            for row in self.state_partition.range(p) {
                m[(row, c)] = 1.0;
                c += 1;
            }
        }
        Ok(m)
    }

    pub fn plant_range(&self, plant: Plant) -> Range<usize> {
        match plant {
            Plant::One => self.state_partition.range(0),
            Plant::Two => self.state_partition.range(self.delay),
        }
    }

    pub fn input_range(&self, plant: Plant) -> Range<usize> {
        match plant {
            Plant::One => 0..self.m1,
            Plant::Two => self.m1..self.m1 + self.m2,
        }
    }

    pub fn noise_cov(&self, plant: Plant) -> &Mat {
        match plant {
            Plant::One => &self.w1,
            Plant::Two => &self.w2,
        }
    }

    /// Full-dimension noise vector with `w¹`, `w²` on the plant atoms.
    pub fn noise_vector(&self, w1: &Vector, w2: &Vector) -> Vector {
        let mut w = Vector::zeros(self.state_dim());
        let r1 = self.plant_range(Plant::One);
        let r2 = self.plant_range(Plant::Two);
        w.rows_mut(r1.start, r1.len()).copy_from(w1);
        w.rows_mut(r2.start, r2.len()).copy_from(w2);
        w
    }

    pub fn step(&self, x: &Vector, u: &Vector, w: &Vector) -> Vector {
        &self.a * x + &self.b * u + w
    }

    /// Assemble the augmented state from local histories, newest first:
    /// `hist1[k] = x¹_{t−k}`, `hist2[k] = x²_{t−k}` for `k = 0..D`.
    pub fn state_from_history(&self, hist1: &[Vector], hist2: &[Vector]) -> Result<Vector> {
        let d = self.delay;
        if hist1.len() < d || hist2.len() < d {
            return Err(Error::Dimension {
                expected: d,
                found: hist1.len().min(hist2.len()),
            });
        }
        let mut x = Vector::zeros(self.state_dim());
        x.rows_mut(0, self.n1).copy_from(&hist1[0]);
        for k in 1..d {
            let r = self.state_partition.range(k);
            x.rows_mut(r.start, self.n1).copy_from(&hist1[k]);
            x.rows_mut(r.start + self.n1, self.n2)
                .copy_from(&hist2[d - k]);
        }
        let r2 = self.plant_range(Plant::Two);
        x.rows_mut(r2.start, self.n2).copy_from(&hist2[0]);
        Ok(x)
    }
}

fn embed_into(partition: &Partition, blocks: &[usize], z: &Vector) -> Result<Vector> {
    let need = partition.dim_of(blocks);
    if z.len() != need {
        return Err(Error::Dimension {
            expected: need,
            found: z.len(),
        });
    }
    let mut out = Vector::zeros(partition.dim());
    let mut c = 0;
    for &b in blocks {
        let r = partition.range(b);
        out.rows_mut(r.start, r.len())
            .copy_from(&z.rows(c, r.len()));
        c += r.len();
    }
    Ok(out)
}

/// The pair of local recursions
/// `xⁱ_{t+1} = A_ii xⁱ_t + A_ij xʲ_{t−(D−1)} + B_i uⁱ_t + wⁱ_t`
/// driven through explicit delay buffers.
#[derive(Clone, Debug)]
pub struct LocalRecursion {
    spec: PlantSpec,
    /// Newest first, `D` entries per plant.
    hist: [VecDeque<Vector>; 2],
}

impl LocalRecursion {
    /// `hist1[k] = x¹_{−k}`, `hist2[k] = x²_{−k}`, `k = 0..D`.
    pub fn new(spec: &PlantSpec, hist1: Vec<Vector>, hist2: Vec<Vector>) -> Result<Self> {
        spec.validate()?;
        let d = spec.delay;
        if hist1.len() != d || hist2.len() != d {
            return Err(Error::Dimension {
                expected: d,
                found: hist1.len().min(hist2.len()),
            });
        }
        Ok(LocalRecursion {
            spec: spec.clone(),
            hist: [hist1.into(), hist2.into()],
        })
    }

    pub fn current(&self, plant: Plant) -> &Vector {
        &self.hist[plant.index()][0]
    }

    pub fn history(&self, plant: Plant) -> Vec<Vector> {
        self.hist[plant.index()].iter().cloned().collect()
    }

    pub fn step(&mut self, u1: &Vector, u2: &Vector, w1: &Vector, w2: &Vector) {
        let d = self.spec.delay;
        let s = &self.spec;
        let x1 = &self.hist[0][0];
        let x2 = &self.hist[1][0];
        let x1_old = &self.hist[0][d - 1];
        let x2_old = &self.hist[1][d - 1];
        let next1 = &s.a11 * x1 + &s.a12 * x2_old + &s.b1 * u1 + w1;
        let next2 = &s.a22 * x2 + &s.a21 * x1_old + &s.b2 * u2 + w2;
        for (h, next) in self.hist.iter_mut().zip([next1, next2]) {
            h.push_front(next);
            h.truncate(d);
        }
    }
}

#[cfg(test)]
pub(crate) use tests::scalar_spec;

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn scalar_spec(delay: usize) -> PlantSpec {
        let one = Mat::from_element(1, 1, 1.0);
        PlantSpec {
            delay,
            a11: Mat::from_element(1, 1, 0.9),
            a12: Mat::from_element(1, 1, 0.3),
            a21: Mat::from_element(1, 1, -0.2),
            a22: Mat::from_element(1, 1, 1.1),
            b1: one.clone(),
            b2: one.clone(),
            q: PlantSpec::local_state_cost(delay, &one, &one),
            r: Mat::identity(2, 2),
            w1: one.clone(),
            w2: one.clone(),
            mu0_1: Vector::zeros(1),
            mu0_2: Vector::zeros(1),
            sigma0_1: one.clone(),
            sigma0_2: one,
            q_terminal: None,
        }
    }

    #[test]
    fn augmented_dimension_counts_dummy_coordinates() {
        let agg = build_aggregate(&scalar_spec(4)).unwrap();
        assert_eq!(agg.state_dim(), 8);
        assert_eq!(agg.state_partition.blocks(), 5);
        assert_eq!(agg.input_dim(), 2);
    }

    #[test]
    fn unit_delay_has_no_dummies() {
        let spec = scalar_spec(1);
        let agg = build_aggregate(&spec).unwrap();
        let expected = Mat::from_row_slice(2, 2, &[0.9, 0.3, -0.2, 1.1]);
        assert_eq!(agg.a, expected);
        assert_eq!(agg.state_partition.blocks(), 2);
    }

    #[test]
    fn inputs_and_noise_live_on_plant_atoms() {
        let agg = build_aggregate(&scalar_spec(3)).unwrap();
        for k in 1..3 {
            let r = agg.state_partition.range(k);
            for row in r {
                assert!(agg.b.row(row).iter().all(|v| *v == 0.0));
                assert!(agg.w.row(row).iter().all(|v| *v == 0.0));
            }
        }
    }

    #[test]
    fn decoupled_plant_two_stays_at_rest() {
        let mut spec = scalar_spec(3);
        spec.a12[(0, 0)] = 0.0;
        spec.a21[(0, 0)] = 0.0;
        let agg = build_aggregate(&spec).unwrap();
        let mut x = Vector::zeros(agg.state_dim());
        x[0] = 1.0;
        let u = Vector::zeros(2);
        let w = Vector::zeros(agg.state_dim());
        let r2 = agg.plant_range(Plant::Two);
        for _ in 0..20 {
            x = agg.step(&x, &u, &w);
            assert_eq!(x[r2.start], 0.0);
        }
    }

    #[test]
    fn dimension_errors_name_the_field() {
        let mut spec = scalar_spec(2);
        spec.b2 = Mat::zeros(2, 1);
        let err = build_aggregate(&spec).unwrap_err();
        assert!(err.to_string().contains("plant.b2"), "{err}");

        let mut spec = scalar_spec(2);
        spec.r = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(build_aggregate(&spec).unwrap_err().to_string().contains("plant.r"));

        let mut spec = scalar_spec(2);
        spec.w1 = Mat::from_element(1, 1, -1.0);
        assert!(build_aggregate(&spec).unwrap_err().to_string().contains("plant.w1"));
    }

    #[test]
    fn three_by_two_block_selection() {
        // M_{ij} = 10 i + j on a 3-block partition of unit blocks.
        let p = Partition::from_sizes(&[1, 1, 1]);
        let m = Mat::from_fn(3, 3, |i, j| (10 * (i + 1) + j + 1) as f64);
        let sel = block_select(&m, &p, &p, &[0, 1, 2], &[0, 1]).unwrap();
        let expected = Mat::from_row_slice(3, 2, &[11.0, 12.0, 21.0, 22.0, 31.0, 32.0]);
        assert_eq!(sel, expected);
        assert_eq!(block_select(&m, &p, &p, &[0, 1, 2], &[0, 1, 2]).unwrap(), m);
    }

    #[test]
    fn identity_selection() {
        let agg = build_aggregate(&scalar_spec(3)).unwrap();
        let eye = Mat::identity(agg.state_dim(), agg.state_dim());
        let s = [Atom::Plant(Plant::One), Atom::Dummy(1)];
        let v = [Atom::Dummy(2), Atom::Plant(Plant::Two)];
        let ss = agg.select_state(&eye, &s, &s).unwrap();
        assert_eq!(ss, Mat::identity(3, 3));
        let sv = agg.select_state(&eye, &s, &v).unwrap();
        assert!(sv.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn unknown_atom_is_rejected() {
        let agg = build_aggregate(&scalar_spec(2)).unwrap();
        let err = agg
            .select_state(&agg.a, &[Atom::Dummy(2)], &[Atom::Dummy(1)])
            .unwrap_err();
        assert!(matches!(err, Error::UnknownAtom(_)));
        assert!(agg.embed(&[Atom::Dummy(0)], &Vector::zeros(2)).is_err());
    }

    #[test]
    fn embed_places_coordinates_in_atom_order() {
        let agg = build_aggregate(&scalar_spec(2)).unwrap();
        let z = Vector::from_vec(vec![1.0, 2.0, 3.0]);
        let full = agg
            .embed(&[Atom::Plant(Plant::One), Atom::Dummy(1)], &z)
            .unwrap();
        assert_eq!(full, Vector::from_vec(vec![1.0, 2.0, 3.0, 0.0]));
        let all = agg.atoms();
        let z4 = Vector::from_vec(vec![4.0, 3.0, 2.0, 1.0]);
        assert_eq!(agg.embed(&all, &z4).unwrap(), z4);
        assert!(agg.embed(&all, &z).is_err());
    }

    #[test]
    fn injection_matches_embed() {
        let agg = build_aggregate(&scalar_spec(3)).unwrap();
        let s = [Atom::Dummy(1), Atom::Dummy(2), Atom::Plant(Plant::Two)];
        let z = Vector::from_vec(vec![1.0, -1.0, 2.0, 0.5, 7.0]);
        assert_eq!(agg.injection(&s).unwrap() * &z, agg.embed(&s, &z).unwrap());
    }
}
