//! The rank-dependent transition operator and the T-PageRank iterations.
//!
//! For a ranking `x`, the (damped) transition matrix is
//!
//! ```text
//! M(x)_ij = gamma * C_ij g_T1(x_j) / sum_k C_ik g_T1(x_k)
//!         + (1 - gamma) * d_j g_T2(x_j) / sum_k d_k g_T2(x_k)
//! ```
//!
//! and is never materialized: [`FrozenKernel`] caches the per-row normalizers
//! for a fixed `x` and applies `v -> v M(x)` row by row. Weights are handled
//! in log space with a global shift, falling back to a per-row shift when a
//! row's shifted mass underflows.
//!
//! Two fixed-point iterations are provided: `x <- u(x)` (invariant measure of
//! `M(x)`, [`Kernel::iterate_u`]) and `x <- x M(x)` ([`Kernel::iterate_f`]).

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::weights::{Temperature, WeightFunction};

/// Stochastic row vector on the simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RankVector(Vec<f64>);

const STOCHASTIC_TOL: f64 = 1e-9;

impl RankVector {
    /// Accepts a nonnegative vector whose entries sum to 1 (within 1e-9) and
    /// renormalizes it exactly.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let sum = check_nonnegative(&values)?;
        if (sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::NotStochastic(format!("entries sum to {sum}")));
        }
        Ok(Self::normalized(values, sum))
    }

    /// Normalizes any nonnegative vector with positive sum.
    pub fn from_weights(values: Vec<f64>) -> Result<Self> {
        let sum = check_nonnegative(&values)?;
        if sum <= 0.0 {
            return Err(Error::NotStochastic("entries sum to zero".into()));
        }
        Ok(Self::normalized(values, sum))
    }

    fn normalized(mut values: Vec<f64>, sum: f64) -> Self {
        if sum != 1.0 {
            values.iter_mut().for_each(|v| *v /= sum);
        }
        Self(values)
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    /// Dirac mass on vertex `i` of the simplex.
    pub fn vertex(n: usize, i: usize) -> Self {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        Self(v)
    }

    /// Mass `mass` on node `i`, the rest spread uniformly over the others.
    pub fn concentrated(n: usize, i: usize, mass: f64) -> Self {
        if n == 1 {
            return Self(vec![1.0]);
        }
        let rest = (1.0 - mass) / (n - 1) as f64;
        let mut v = vec![rest; n];
        v[i] = mass;
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn l1_distance(&self, other: &RankVector) -> f64 {
        l1(&self.0, &other.0)
    }

    pub fn max_entry(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_entry(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Index of the largest entry, lowest index on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.0.iter().enumerate() {
            if v > self.0[best] {
                best = i;
            }
        }
        best
    }
}

impl std::ops::Index<usize> for RankVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

fn check_nonnegative(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::NotStochastic("empty vector".into()));
    }
    let mut sum = 0.0;
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::NotStochastic(format!("entry {i} is {v}")));
        }
        sum += v;
    }
    Ok(sum)
}

pub(crate) fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Personalization (teleportation) vector `d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Personalization {
    Uniform,
    Vector(Vec<f64>),
}

impl Personalization {
    pub fn resolve(&self, n: usize) -> Result<Vec<f64>> {
        match self {
            Self::Uniform => Ok(vec![1.0; n]),
            Self::Vector(d) => {
                if d.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: d.len(),
                    });
                }
                if let Some(i) = d.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
                    return Err(Error::InvalidConfig(format!(
                        "personalization entry {i} must be positive, got {}",
                        d[i]
                    )));
                }
                Ok(d.clone())
            }
        }
    }
}

/// Temperatures, damping and personalization selecting the operator.
/// `gamma = 1` is the plain kernel (`t2` and `d` unused).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub t1: Temperature,
    pub t2: Temperature,
    pub gamma: f64,
    pub d: Personalization,
}

impl KernelConfig {
    pub fn plain(t: Temperature) -> Self {
        Self {
            t1: t,
            t2: Temperature::INFINITE,
            gamma: 1.0,
            d: Personalization::Uniform,
        }
    }

    pub fn damped(t1: Temperature, t2: Temperature, gamma: f64, d: Personalization) -> Self {
        Self { t1, t2, gamma, d }
    }

    pub fn is_damped(&self) -> bool {
        self.gamma < 1.0
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::InvalidConfig(format!(
                "gamma = {} outside [0, 1]",
                self.gamma
            )));
        }
        if self.is_damped() {
            self.d.resolve(n)?;
        }
        Ok(())
    }

    /// The same operator at temperature `t`. The personalization term follows
    /// the graph term unless its temperature is infinite.
    pub fn at_temperature(&self, t: Temperature) -> Self {
        let mut cfg = self.clone();
        cfg.t1 = t;
        if !cfg.t2.is_infinite() {
            cfg.t2 = t;
        }
        cfg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// `x <- u(x)`, invariant measure of `M(x)`.
    U,
    /// `x <- x M(x)`.
    F,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResidualNorm {
    L1,
    /// Hilbert projective distance; infinite on boundary iterates.
    Hilbert,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIterations,
    Oscillation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub scheme: Scheme,
    pub outer_iterations: usize,
    pub inner_iterations_total: usize,
    pub residual_trace: Vec<f64>,
    pub converged: bool,
    pub termination: Termination,
}

impl IterationReport {
    pub fn last_residual(&self) -> f64 {
        self.residual_trace.last().copied().unwrap_or(f64::INFINITY)
    }

    /// Maps a non-converged run to the matching error.
    pub fn ensure_converged(&self) -> Result<()> {
        match self.termination {
            Termination::Converged => Ok(()),
            Termination::Oscillation => Err(Error::Oscillation {
                iterations: self.outer_iterations,
            }),
            Termination::MaxIterations => Err(Error::NotConverged {
                iterations: self.outer_iterations,
                residual: self.last_residual(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterOptions {
    /// Outer tolerance (u scheme) or step tolerance (f scheme).
    pub tol: f64,
    pub inner_tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub max_f_steps: usize,
    pub residual: ResidualNorm,
}

impl IterOptions {
    /// 1e-12 up to 10^3 nodes, 1e-9 above; inner tolerance a tenth of that.
    pub fn for_size(n: usize) -> Self {
        let tol = if n <= 1000 { 1e-12 } else { 1e-9 };
        Self::with_tol(tol)
    }

    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            inner_tol: tol / 10.0,
            max_outer: 10_000,
            max_inner: 100_000,
            max_f_steps: 100_000,
            residual: ResidualNorm::L1,
        }
    }
}

/// Consecutive period-2 patterns required before reporting oscillation.
pub const OSCILLATION_WINDOW: usize = 50;
/// Largest relative shrinkage of the one-step residual over the window that
/// still counts as a persistent oscillation.
const OSCILLATION_DECAY: f64 = 1e-3;

/// Rows with at least this many stored entries are applied in parallel.
const PARALLEL_NNZ: usize = 1 << 17;
/// Below this shifted row mass the row is renormalized with its own shift.
const UNDERFLOW_GUARD: f64 = 1e-250;

/// The transition operator for a graph, weight family and configuration.
#[derive(Debug, Clone)]
pub struct Kernel<'a> {
    graph: &'a Graph,
    weights: &'a WeightFunction,
    config: KernelConfig,
    d: Vec<f64>,
    columns: Option<Arc<Columns>>,
}

/// Column-major copy of the graph, used by the parallel apply. Sources in
/// each column are increasing, so a gather over a column adds the terms in
/// the same order as the sequential row scatter.
#[derive(Debug)]
struct Columns {
    offsets: Vec<usize>,
    sources: Vec<usize>,
    weights: Vec<f64>,
}

impl Columns {
    fn new(graph: &Graph) -> Self {
        let n = graph.n();
        let mut offsets = vec![0usize; n + 1];
        for (_, j, _) in graph.edges() {
            offsets[j + 1] += 1;
        }
        for j in 0..n {
            offsets[j + 1] += offsets[j];
        }
        let mut fill = offsets.clone();
        let mut sources = vec![0usize; graph.nnz()];
        let mut weights = vec![0.0; graph.nnz()];
        for (i, j, w) in graph.edges() {
            sources[fill[j]] = i;
            weights[fill[j]] = w;
            fill[j] += 1;
        }
        Self {
            offsets,
            sources,
            weights,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum RowNorm {
    Global { inv_sum: f64 },
    Shifted { shift: f64, inv_sum: f64 },
}

/// `M(x)` for one frozen ranking `x`.
#[derive(Debug, Clone)]
pub struct FrozenKernel<'k, 'a> {
    kernel: &'k Kernel<'a>,
    log_w: Vec<f64>,
    node_w: Vec<f64>,
    rows: Vec<RowNorm>,
    teleport: Vec<f64>,
}

impl<'a> Kernel<'a> {
    pub fn new(
        graph: &'a Graph,
        weights: &'a WeightFunction,
        config: KernelConfig,
    ) -> Result<Self> {
        config.validate(graph.n())?;
        if config.gamma > 0.0 {
            if let Some(i) = graph.has_zero_row() {
                return Err(Error::ZeroRow(i));
            }
        }
        let d = if config.is_damped() {
            config.d.resolve(graph.n())?
        } else {
            Vec::new()
        };
        let columns = (config.gamma > 0.0 && graph.nnz() >= PARALLEL_NNZ)
            .then(|| Arc::new(Columns::new(graph)));
        Ok(Self {
            graph,
            weights,
            config,
            d,
            columns,
        })
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn graph(&self) -> &'a Graph {
        self.graph
    }

    pub fn weights(&self) -> &'a WeightFunction {
        self.weights
    }

    pub fn config(&self) -> &KernelConfig {
        &self.config
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: len,
            });
        }
        Ok(())
    }

    /// Caches the row normalizers of `M(x)`.
    pub fn freeze(&self, x: &RankVector) -> Result<FrozenKernel<'_, 'a>> {
        self.check_dim(x.len())?;
        Ok(self.freeze_slice(x.as_slice()))
    }

    fn freeze_slice(&self, x: &[f64]) -> FrozenKernel<'_, 'a> {
        let n = self.n();
        let cfg = &self.config;
        let clamp = |v: f64| v.clamp(0.0, 1.0);

        let (log_w, node_w, rows) = if cfg.gamma > 0.0 {
            let log_w: Vec<f64> = x
                .iter()
                .map(|&v| self.weights.log_g(cfg.t1, clamp(v)))
                .collect();
            let top = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let node_w: Vec<f64> = log_w.iter().map(|&l| (l - top).exp()).collect();
            let rows = (0..n)
                .map(|i| {
                    let (targets, weights) = self.graph.row_slices(i);
                    let s: f64 = targets
                        .iter()
                        .zip(weights)
                        .map(|(&j, &c)| c * node_w[j])
                        .sum();
                    if s >= UNDERFLOW_GUARD && s.is_finite() {
                        RowNorm::Global { inv_sum: 1.0 / s }
                    } else {
                        let shift = targets
                            .iter()
                            .map(|&j| log_w[j])
                            .fold(f64::NEG_INFINITY, f64::max);
                        let s: f64 = targets
                            .iter()
                            .zip(weights)
                            .map(|(&j, &c)| c * (log_w[j] - shift).exp())
                            .sum();
                        RowNorm::Shifted {
                            shift,
                            inv_sum: 1.0 / s,
                        }
                    }
                })
                .collect();
            (log_w, node_w, rows)
        } else {
            (Vec::new(), Vec::new(), Vec::new())
        };

        let teleport = if cfg.is_damped() {
            let lw: Vec<f64> = x
                .iter()
                .map(|&v| self.weights.log_g(cfg.t2, clamp(v)))
                .collect();
            let top = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let q: Vec<f64> = lw
                .iter()
                .zip(&self.d)
                .map(|(&l, &d)| d * (l - top).exp())
                .collect();
            let total: f64 = q.iter().sum();
            q.into_iter().map(|v| v / total).collect()
        } else {
            Vec::new()
        };

        FrozenKernel {
            kernel: self,
            log_w,
            node_w,
            rows,
            teleport,
        }
    }

    /// `v M(x)`.
    pub fn apply(&self, x: &RankVector, v: &RankVector) -> Result<RankVector> {
        self.check_dim(v.len())?;
        let frozen = self.freeze(x)?;
        let mut out = vec![0.0; self.n()];
        frozen.apply_into(v.as_slice(), &mut out);
        Ok(renormalized(out))
    }

    /// `f(x) = x M(x)`, renormalized to the simplex.
    pub fn f_map(&self, x: &RankVector) -> Result<RankVector> {
        self.apply(x, x)
    }

    /// `u(x)`: the invariant measure of `M(x)`.
    pub fn u_map(&self, x: &RankVector, tol: f64) -> Result<RankVector> {
        Ok(self.invariant_measure(x, tol)?.0)
    }

    /// `||f(x) - x||_1`.
    pub fn fixed_point_residual(&self, x: &RankVector) -> Result<f64> {
        Ok(self.f_map(x)?.l1_distance(x))
    }

    /// Invariant measure of `M(x)` by power iteration, started from `x`.
    /// Returns the measure and the number of inner steps.
    pub fn invariant_measure(&self, x: &RankVector, tol: f64) -> Result<(RankVector, usize)> {
        self.invariant_measure_from(x, x, tol, 100_000)
    }

    /// As [`Kernel::invariant_measure`] with an explicit start and step cap.
    /// The undamped chain is iterated through the lazy operator `(I + M) / 2`,
    /// which has the same invariant measure and is aperiodic.
    pub fn invariant_measure_from(
        &self,
        x: &RankVector,
        start: &RankVector,
        tol: f64,
        max_inner: usize,
    ) -> Result<(RankVector, usize)> {
        self.check_dim(start.len())?;
        let frozen = self.freeze(x)?;
        let lazy = !self.config.is_damped();
        let n = self.n();
        let mut v = start.as_slice().to_vec();
        let mut w = vec![0.0; n];
        let mut residual = f64::INFINITY;
        for step in 1..=max_inner {
            frozen.apply_into(&v, &mut w);
            residual = l1(&v, &w);
            if residual <= tol {
                return Ok((renormalized(w), step));
            }
            if lazy {
                for (a, b) in v.iter_mut().zip(&w) {
                    *a = 0.5 * (*a + b);
                }
            } else {
                std::mem::swap(&mut v, &mut w);
            }
            normalize_in_place(&mut v);
        }
        Err(Error::NotConverged {
            iterations: max_inner,
            residual,
        })
    }

    fn residual(&self, a: &RankVector, b: &RankVector, norm: ResidualNorm) -> f64 {
        match norm {
            ResidualNorm::L1 => a.l1_distance(b),
            ResidualNorm::Hilbert => crate::metrics::hilbert_distance(a.as_slice(), b.as_slice())
                .unwrap_or(f64::INFINITY),
        }
    }

    /// Iterates `x <- u(x)` until `||x_{s+1} - x_s|| <= tol`. Exhausting
    /// `max_outer` is reported through the report, not as an error; a failing
    /// inner solve is an error.
    pub fn iterate_u(
        &self,
        x0: &RankVector,
        opts: &IterOptions,
    ) -> Result<(RankVector, IterationReport)> {
        self.check_dim(x0.len())?;
        let mut x = x0.clone();
        let mut report = IterationReport {
            scheme: Scheme::U,
            outer_iterations: 0,
            inner_iterations_total: 0,
            residual_trace: Vec::new(),
            converged: false,
            termination: Termination::MaxIterations,
        };
        let mut best = (f64::INFINITY, x.clone());
        for _ in 0..opts.max_outer {
            let (next, inner) =
                self.invariant_measure_from(&x, &x, opts.inner_tol, opts.max_inner)?;
            report.outer_iterations += 1;
            report.inner_iterations_total += inner;
            let residual = self.residual(&next, &x, opts.residual);
            report.residual_trace.push(residual);
            x = next;
            if residual <= opts.tol {
                report.converged = true;
                report.termination = Termination::Converged;
                return Ok((x, report));
            }
            if residual < best.0 {
                best = (residual, x.clone());
            }
        }
        Ok((best.1, report))
    }

    /// Iterates `x <- x M(x)` (renormalized) until `||x_{s+1} - x_s|| <= tol`.
    /// A persistent period-2 pattern stops the run with
    /// [`Termination::Oscillation`].
    pub fn iterate_f(
        &self,
        x0: &RankVector,
        opts: &IterOptions,
    ) -> Result<(RankVector, IterationReport)> {
        self.check_dim(x0.len())?;
        let n = self.n();
        let mut report = IterationReport {
            scheme: Scheme::F,
            outer_iterations: 0,
            inner_iterations_total: 0,
            residual_trace: Vec::new(),
            converged: false,
            termination: Termination::MaxIterations,
        };
        let mut prev: Option<Vec<f64>> = None;
        let mut x = x0.as_slice().to_vec();
        let mut next = vec![0.0; n];
        let mut streak = 0usize;
        let mut streak_start = 0.0;
        for _ in 0..opts.max_f_steps {
            self.freeze_slice(&x).apply_into(&x, &mut next);
            normalize_in_place(&mut next);
            report.outer_iterations += 1;
            let residual = match opts.residual {
                ResidualNorm::L1 => l1(&next, &x),
                ResidualNorm::Hilbert => {
                    crate::metrics::hilbert_distance(&next, &x).unwrap_or(f64::INFINITY)
                }
            };
            report.residual_trace.push(residual);
            if residual <= opts.tol {
                report.converged = true;
                report.termination = Termination::Converged;
                return Ok((RankVector(next), report));
            }
            // x_{s+2} = next, x_{s+1} = x, x_s = prev
            if let Some(p) = &prev {
                let two_step = l1(&next, p);
                let one_step = l1(&x, p);
                if two_step < opts.tol && one_step > 100.0 * opts.tol {
                    if streak == 0 {
                        streak_start = one_step;
                    }
                    streak += 1;
                    if streak >= OSCILLATION_WINDOW {
                        // a slowly damped alternation still shrinks its step
                        if one_step >= (1.0 - OSCILLATION_DECAY) * streak_start {
                            report.termination = Termination::Oscillation;
                            return Ok((RankVector(next), report));
                        }
                        streak = 0;
                    }
                } else {
                    streak = 0;
                }
            }
            let old = std::mem::replace(&mut x, std::mem::take(&mut next));
            next = prev.take().unwrap_or_else(|| vec![0.0; n]);
            prev = Some(old);
        }
        Ok((RankVector(x), report))
    }

    /// Dense `M(x)`, assembled row by row from basis probes `e_i M(x)`.
    /// Intended for small `n` (oracles and metrics).
    pub fn transition_matrix(&self, x: &RankVector) -> Result<DMatrix<f64>> {
        let frozen = self.freeze(x)?;
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        let mut probe = vec![0.0; n];
        let mut out = vec![0.0; n];
        for i in 0..n {
            probe[i] = 1.0;
            frozen.apply_into(&probe, &mut out);
            probe[i] = 0.0;
            for j in 0..n {
                m[(i, j)] = out[j];
            }
        }
        Ok(m)
    }
}

impl FrozenKernel<'_, '_> {
    /// `out = v M(x)` (no renormalization).
    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        let k = self.kernel;
        let gamma = k.config.gamma;
        out.iter_mut().for_each(|o| *o = 0.0);
        if gamma > 0.0 {
            let threads = rayon::current_num_threads();
            match &k.columns {
                Some(cols) if threads > 1 => self.gather_columns(v, cols, gamma, out),
                _ => self.scatter_rows(v, gamma, out),
            }
        }
        if k.config.is_damped() {
            let mass: f64 = v.iter().sum::<f64>() * (1.0 - gamma);
            for (o, p) in out.iter_mut().zip(&self.teleport) {
                *o += mass * p;
            }
        }
    }

    fn gather_columns(&self, v: &[f64], cols: &Columns, gamma: f64, out: &mut [f64]) {
        let coeff: Vec<f64> = (0..v.len())
            .into_par_iter()
            .map(|i| match self.rows[i] {
                RowNorm::Global { inv_sum } | RowNorm::Shifted { inv_sum, .. } => {
                    gamma * v[i] * inv_sum
                }
            })
            .collect();
        out.par_chunks_mut(4096).enumerate().for_each(|(c, chunk)| {
            for (dj, o) in chunk.iter_mut().enumerate() {
                let j = c * 4096 + dj;
                let range = cols.offsets[j]..cols.offsets[j + 1];
                let mut acc = 0.0;
                for (&i, &w) in cols.sources[range.clone()].iter().zip(&cols.weights[range]) {
                    if v[i] == 0.0 {
                        continue;
                    }
                    let c = coeff[i];
                    acc += match self.rows[i] {
                        RowNorm::Global { .. } => c * w * self.node_w[j],
                        RowNorm::Shifted { shift, .. } => c * w * (self.log_w[j] - shift).exp(),
                    };
                }
                *o = acc;
            }
        });
    }

    fn scatter_rows(&self, v: &[f64], gamma: f64, out: &mut [f64]) {
        let graph = self.kernel.graph;
        for i in 0..v.len() {
            let vi = v[i];
            if vi == 0.0 {
                continue;
            }
            let (targets, weights) = graph.row_slices(i);
            match self.rows[i] {
                RowNorm::Global { inv_sum } => {
                    let c = gamma * vi * inv_sum;
                    for (&j, &w) in targets.iter().zip(weights) {
                        out[j] += c * w * self.node_w[j];
                    }
                }
                RowNorm::Shifted { shift, inv_sum } => {
                    let c = gamma * vi * inv_sum;
                    for (&j, &w) in targets.iter().zip(weights) {
                        out[j] += c * w * (self.log_w[j] - shift).exp();
                    }
                }
            }
        }
    }

    /// Personalization probabilities `d_j g_T2(x_j) / sum_k d_k g_T2(x_k)`.
    pub fn teleport(&self) -> &[f64] {
        &self.teleport
    }
}

fn normalize_in_place(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    if s > 0.0 && s != 1.0 {
        v.iter_mut().for_each(|a| *a /= s);
    }
}

fn renormalized(mut v: Vec<f64>) -> RankVector {
    normalize_in_place(&mut v);
    RankVector(v)
}

/// Classical (temperature-free) PageRank: the fixed point of
/// `gamma diag(C1)^-1 C + (1 - gamma) 1 d^T / sum d`. For `gamma = 1` this is
/// the invariant measure of `diag(C1)^-1 C`.
pub fn classical_pagerank(
    graph: &Graph,
    gamma: f64,
    d: &Personalization,
    tol: f64,
) -> Result<RankVector> {
    let weights = WeightFunction::exp_identity();
    let cfg = KernelConfig::damped(
        Temperature::INFINITE,
        Temperature::INFINITE,
        gamma,
        d.clone(),
    );
    let kernel = Kernel::new(graph, &weights, cfg)?;
    let start = RankVector::uniform(graph.n());
    if gamma >= 1.0 {
        return Ok(kernel.invariant_measure(&start, tol)?.0);
    }
    let (x, report) = kernel.iterate_f(&start, &IterOptions::with_tol(tol))?;
    report.ensure_converged()?;
    Ok(x)
}
