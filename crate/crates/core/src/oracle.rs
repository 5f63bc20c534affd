//! Exact small-scale ground truth.
//!
//! The invariant measure of an irreducible stochastic matrix is computed two
//! independent ways: summing arborescence weights (Matrix Tree Theorem) and
//! principal minors of the Laplacian `I - A`. Both back the checks of the
//! iterative solvers in [`crate::kernel`].

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::kernel::{IterOptions, Kernel, KernelConfig, RankVector};
use crate::weights::{Temperature, WeightFunction};

/// Largest dimension handled by arborescence enumeration.
pub const ENUMERATION_MAX_N: usize = 8;
/// Largest dimension handled by the Laplacian backend.
pub const LAPLACIAN_MAX_N: usize = 500;
/// Above this size the Laplacian backend uses one minor and the adjugate
/// identity instead of `n` separate determinants.
const DIRECT_MINORS_MAX_N: usize = 64;
/// Limits closer than this (L1) are merged by the multistart search.
pub const DISTINCT_THRESHOLD: f64 = 1e-4;
/// Cells of the 2x2 sign-change scan.
pub const SCAN_CELLS: usize = 10_000;

/// A spanning arborescence rooted at `root`: every other node has exactly one
/// outgoing edge and following edges always reaches the root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arborescence {
    pub root: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Arborescence {
    /// Structural invariant check against an `n`-node vertex set.
    pub fn validate(&self, n: usize) -> bool {
        if self.root >= n || self.edges.len() + 1 != n {
            return false;
        }
        let mut parent = vec![usize::MAX; n];
        for &(i, j) in &self.edges {
            if i >= n || j >= n || i == self.root || parent[i] != usize::MAX {
                return false;
            }
            parent[i] = j;
        }
        (0..n).all(|start| {
            let mut v = start;
            for _ in 0..n {
                if v == self.root {
                    return true;
                }
                v = parent[v];
            }
            v == self.root
        })
    }
}

/// Calls `visit(parent)` for every spanning arborescence rooted at `root`,
/// where `parent[i]` is the head of the edge leaving `i` (`usize::MAX` at the
/// root). `out[i]` lists the candidate heads of node `i`, self-loops excluded.
fn for_each_arborescence<F: FnMut(&[usize])>(out: &[Vec<usize>], root: usize, mut visit: F) {
    let n = out.len();
    let others: Vec<usize> = (0..n).filter(|&i| i != root).collect();
    if others.iter().any(|&i| out[i].is_empty()) {
        return;
    }
    let mut choice = vec![0usize; others.len()];
    let mut parent = vec![usize::MAX; n];
    let mut state = vec![0u8; n];
    loop {
        for (slot, &i) in others.iter().enumerate() {
            parent[i] = out[i][choice[slot]];
        }
        if reaches_root(&parent, root, &mut state) {
            visit(&parent);
        }
        // odometer increment
        let mut slot = 0;
        loop {
            if slot == others.len() {
                return;
            }
            choice[slot] += 1;
            if choice[slot] < out[others[slot]].len() {
                break;
            }
            choice[slot] = 0;
            slot += 1;
        }
    }
}

/// True when every node's parent chain ends at `root` (no cycles).
fn reaches_root(parent: &[usize], root: usize, state: &mut [u8]) -> bool {
    // 0 = unknown, 1 = on current path, 2 = reaches root
    state.iter_mut().for_each(|s| *s = 0);
    state[root] = 2;
    for start in 0..parent.len() {
        let mut v = start;
        while state[v] == 0 {
            state[v] = 1;
            v = parent[v];
        }
        if state[v] == 1 {
            return false;
        }
        let mut u = start;
        while state[u] == 1 {
            state[u] = 2;
            u = parent[u];
        }
    }
    true
}

fn check_enumeration_size(n: usize) -> Result<()> {
    if n > ENUMERATION_MAX_N {
        return Err(Error::TooLarge {
            what: "arborescence enumeration",
            n,
            max: ENUMERATION_MAX_N,
        });
    }
    Ok(())
}

fn out_lists(pattern: impl Fn(usize, usize) -> bool, n: usize) -> Vec<Vec<usize>> {
    (0..n)
        .map(|i| (0..n).filter(|&j| j != i && pattern(i, j)).collect())
        .collect()
}

/// All spanning arborescences of `g` rooted at `root` (`n <= 8`).
pub fn spanning_arborescences(g: &Graph, root: usize) -> Result<Vec<Arborescence>> {
    let n = g.n();
    check_enumeration_size(n)?;
    if root >= n {
        return Err(Error::IndexOutOfRange { index: root, n });
    }
    let out = out_lists(|i, j| g.weight(i, j) > 0.0, n);
    let mut result = Vec::new();
    for_each_arborescence(&out, root, |parent| {
        let edges = (0..n)
            .filter(|&i| i != root)
            .map(|i| (i, parent[i]))
            .collect();
        result.push(Arborescence { root, edges });
    });
    Ok(result)
}

/// `v_r = sum over arborescences R rooted at r of prod_{(i,j) in R} A_ij`.
pub fn arborescence_weights(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = square_dim(a)?;
    check_enumeration_size(n)?;
    let out = out_lists(|i, j| a[(i, j)] > 0.0, n);
    Ok((0..n)
        .map(|r| {
            let mut total = 0.0;
            for_each_arborescence(&out, r, |parent| {
                total += (0..n)
                    .filter(|&i| i != r)
                    .map(|i| a[(i, parent[i])])
                    .product::<f64>();
            });
            total
        })
        .collect())
}

/// `v_r = det` of the Laplacian `I - A` with row and column `r` removed
/// (Markov chain tree theorem).
pub fn laplacian_minor_weights(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = square_dim(a)?;
    if n > LAPLACIAN_MAX_N {
        return Err(Error::TooLarge {
            what: "Laplacian minors",
            n,
            max: LAPLACIAN_MAX_N,
        });
    }
    if n == 1 {
        return Ok(vec![1.0]);
    }
    let laplacian = DMatrix::identity(n, n) - a;
    let minor = |r: usize| {
        laplacian
            .clone()
            .remove_row(r)
            .remove_column(r)
            .determinant()
    };
    if n <= DIRECT_MINORS_MAX_N {
        return Ok((0..n).map(minor).collect());
    }
    // adj(L) = 1 v^T for a Laplacian with zero row sums, so v solves v L = 0;
    // fix v_{n-1} by its minor and solve for the rest.
    let last = n - 1;
    let v_last = minor(last);
    let reduced = laplacian.view((0, 0), (last, last)).transpose();
    let rhs = -laplacian.view((last, 0), (1, last)).transpose() * v_last;
    let head = reduced.lu().solve(&rhs).ok_or(Error::Reducible)?;
    let mut v: Vec<f64> = head.iter().copied().collect();
    v.push(v_last);
    Ok(v)
}

fn square_dim(a: &DMatrix<f64>) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::NonSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if a.nrows() == 0 {
        return Err(Error::EmptyInput);
    }
    Ok(a.nrows())
}

fn normalize(v: Vec<f64>) -> Result<RankVector> {
    if v.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::Reducible);
    }
    RankVector::from_weights(v)
}

/// Which Matrix-Tree backend to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MttBackend {
    Enumeration,
    Laplacian,
    /// Both where enumeration is feasible (cross-checked), else Laplacian.
    Both,
}

/// Invariant measure of an irreducible row-stochastic matrix via the Matrix
/// Tree Theorem. For `n <= 8` both backends run and must agree within 1e-10.
pub fn mtt_invariant(a: &DMatrix<f64>) -> Result<RankVector> {
    mtt_invariant_with(a, MttBackend::Both)
}

pub fn mtt_invariant_with(a: &DMatrix<f64>, backend: MttBackend) -> Result<RankVector> {
    let n = square_dim(a)?;
    for i in 0..n {
        let s: f64 = a.row(i).iter().sum();
        if (s - 1.0).abs() > 1e-9 || a.row(i).iter().any(|&v| v < 0.0) {
            return Err(Error::NotStochastic(format!("row {i} sums to {s}")));
        }
    }
    if n > LAPLACIAN_MAX_N {
        return Err(Error::TooLarge {
            what: "mtt_invariant",
            n,
            max: LAPLACIAN_MAX_N,
        });
    }
    let pattern = Graph::from_matrix(a)?;
    if !pattern.analyze_structure().strongly_connected {
        return Err(Error::Reducible);
    }
    match backend {
        MttBackend::Enumeration => normalize(arborescence_weights(a)?),
        MttBackend::Laplacian => normalize(laplacian_minor_weights(a)?),
        MttBackend::Both => {
            let lap = normalize(laplacian_minor_weights(a)?)?;
            if n <= ENUMERATION_MAX_N {
                let enu = normalize(arborescence_weights(a)?)?;
                let gap = enu.l1_distance(&lap);
                if gap > 1e-10 {
                    return Err(Error::OracleDisagreement(gap));
                }
            }
            Ok(lap)
        }
    }
}

/// Unnormalized invariant vector of `M_T(x)`:
/// `h_r = (sum_k C_rk g(x_k)) * sum_{R rooted at r} prod_{(i,j) in R} C_ij g(x_j)`.
pub fn h_vector(g: &Graph, w: &WeightFunction, t: Temperature, x: &RankVector) -> Result<Vec<f64>> {
    let n = g.n();
    check_enumeration_size(n)?;
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    if !g.analyze_structure().strongly_connected {
        return Err(Error::Reducible);
    }
    let gx: Vec<f64> = x
        .as_slice()
        .iter()
        .map(|&v| w.g_eval(t, v.clamp(0.0, 1.0)))
        .collect::<Result<_>>()?;
    let weighted = DMatrix::from_fn(n, n, |i, j| g.weight(i, j) * gx[j]);
    let trees = arborescence_weights(&weighted)?;
    Ok((0..n)
        .map(|r| weighted.row(r).iter().sum::<f64>() * trees[r])
        .collect())
}

/// Distinct fixed points found by a search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointSet {
    pub points: Vec<RankVector>,
    pub residuals: Vec<f64>,
    pub distinct_threshold: f64,
    /// For each start, the index of the point its run converged to.
    pub assignments: Vec<Option<usize>>,
    /// Starts whose run did not converge.
    pub dropped: usize,
}

impl FixedPointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Runs the u-iteration from every start (falling back to the f-iteration
/// when the inner solve fails) and merges limits closer than
/// [`DISTINCT_THRESHOLD`]. Starts run in parallel; merging follows start order.
pub fn multistart_fixed_points(
    g: &Graph,
    w: &WeightFunction,
    cfg: &KernelConfig,
    starts: &[RankVector],
    opts: &IterOptions,
) -> Result<FixedPointSet> {
    let kernel = Kernel::new(g, w, cfg.clone())?;
    let outcomes: Vec<Option<(RankVector, f64)>> = starts
        .par_iter()
        .map(|start| {
            let run = match kernel.iterate_u(start, opts) {
                Ok(r) => Ok(r),
                Err(Error::NotConverged { .. }) => kernel.iterate_f(start, opts),
                Err(e) => Err(e),
            };
            match run {
                Ok((x, report)) if report.converged => Some((x, report.last_residual())),
                _ => None,
            }
        })
        .collect();

    let mut set = FixedPointSet {
        points: Vec::new(),
        residuals: Vec::new(),
        distinct_threshold: DISTINCT_THRESHOLD,
        assignments: Vec::with_capacity(starts.len()),
        dropped: 0,
    };
    for outcome in outcomes {
        match outcome {
            None => {
                set.dropped += 1;
                set.assignments.push(None);
            }
            Some((x, residual)) => {
                let existing = set
                    .points
                    .iter()
                    .position(|p| p.l1_distance(&x) < DISTINCT_THRESHOLD);
                let idx = existing.unwrap_or_else(|| {
                    set.points.push(x);
                    set.residuals.push(residual);
                    set.points.len() - 1
                });
                set.assignments.push(Some(idx));
            }
        }
    }
    Ok(set)
}

/// `u_T((t, 1 - t))_1 - t` for a 2x2 irreducible `C`.
fn phi_2x2(c: &[[f64; 2]; 2], w: &WeightFunction, temp: Temperature, t: f64) -> f64 {
    let e = (w.log_g(temp, 1.0 - t) - w.log_g(temp, t)).exp();
    // M_12 and M_21, written to stay finite when e over- or underflows
    let m12 = 1.0 / (1.0 + c[0][0] / (c[0][1] * e));
    let m21 = 1.0 / (1.0 + c[1][1] * e / c[1][0]);
    m21 / (m21 + m12) - t
}

/// All fixed points of `u_T` for a 2x2 irreducible `C`, found by a sign-change
/// scan of `phi(t) = u_T((t, 1-t))_1 - t` over 10^4 cells and bisection to 1e-12.
pub fn fixed_points_2x2(
    c: [[f64; 2]; 2],
    w: &WeightFunction,
    temp: Temperature,
) -> Result<FixedPointSet> {
    if c.iter().flatten().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidConfig(
            "2x2 matrix entries must be finite and nonnegative".into(),
        ));
    }
    if !(c[0][1] > 0.0 && c[1][0] > 0.0) {
        return Err(Error::Reducible);
    }
    let phi = |t: f64| phi_2x2(&c, w, temp, t);
    let mut roots = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for k in 0..=SCAN_CELLS {
        let t = k as f64 / SCAN_CELLS as f64;
        let v = phi(t);
        if v == 0.0 {
            roots.push(t);
            prev = None;
            continue;
        }
        if let Some((t0, v0)) = prev {
            if v0.signum() != v.signum() {
                let (mut lo, mut hi) = (t0, t);
                while hi - lo > 1e-12 {
                    let mid = 0.5 * (lo + hi);
                    let vm = phi(mid);
                    if vm == 0.0 {
                        lo = mid;
                        hi = mid;
                    } else if vm.signum() == v0.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
        }
        prev = Some((t, v));
    }
    let points: Vec<RankVector> = roots
        .iter()
        .map(|&t| RankVector::new(vec![t, 1.0 - t]))
        .collect::<Result<_>>()?;
    let residuals = roots.iter().map(|&t| 2.0 * phi(t).abs()).collect();
    Ok(FixedPointSet {
        assignments: (0..points.len()).map(Some).collect(),
        points,
        residuals,
        distinct_threshold: 2e-12,
        dropped: 0,
    })
}
