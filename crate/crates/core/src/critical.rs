//! Critical-temperature machinery.
//!
//! For the complete graph with `g_T(x) = exp(x / T)` every fixed point takes
//! at most two values `y < z` with `y exp(-y/T) = z exp(-z/T)`, and uniqueness
//! holds exactly above
//!
//! ```text
//! T*(n) = sup_{alpha > 1} (1 - 1/alpha) / ln((alpha - 1) n + 1)
//! ```
//!
//! (`T*(2) = 1/2`). For general graphs a lower bound is obtained by the
//! homotopy procedure in [`homotopy_critical_estimate`]; [`temperature_sweep`]
//! follows one warm-started branch across a monotone schedule.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::kernel::{IterOptions, Kernel, KernelConfig, RankVector, Termination};
use crate::report::top_k;
use crate::rng::{random_simplex, seeded, sub_seed};
use crate::weights::{Temperature, WeightFunction};

/// Two limits closer than this (L1) are considered the same fixed point.
pub const COINCIDENCE_TOL: f64 = 1e-8;
pub const DEFAULT_RATIO: f64 = 1.05;
pub const DEFAULT_RESTARTS: usize = 20;
/// Per-temperature f-step budget of a sweep.
pub const SWEEP_MAX_F_STEPS: usize = 100_000;

const GOLDEN_TOL: f64 = 1e-12;

fn objective(n: f64, alpha: f64) -> f64 {
    (1.0 - 1.0 / alpha) / ((alpha - 1.0) * n + 1.0).ln()
}

/// `T*(n)`, the critical temperature of the `n`-node complete graph.
pub fn tstar_complete(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("T*(n) needs n >= 2, got {n}")));
    }
    if n == 2 {
        return Ok(0.5);
    }
    // maximize over s = ln(alpha - 1); the objective is unimodal in alpha
    let nf = n as f64;
    let f = |s: f64| objective(nf, 1.0 + s.exp());
    let mut s = 0.0;
    let mut step = 1.0;
    if f(s - step) > f(s) {
        step = -step;
    }
    while f(s + step) > f(s) {
        s += step;
        step *= 2.0;
    }
    let (mut a, mut b) = if step > 0.0 {
        (s - step.abs() / 2.0, s + step)
    } else {
        (s + step, s - step.abs() / 2.0)
    };
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    let a = a.min(s - 1.0);
    let b = b.max(s + 1.0);
    let best = golden_max(&f, a, b);
    Ok(f(best))
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > GOLDEN_TOL {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Temperature at which the complete graph has a fixed point with `k` low
/// coordinates equal to `1 / (n alpha)`:
/// `(1 - 1/alpha) / ((n - k) ln((alpha - 1) n / (n - k) + 1))`.
pub fn t_alpha_k(n: usize, alpha: f64, k: usize) -> Result<f64> {
    if n < 2 || k == 0 || k >= n {
        return Err(Error::InvalidConfig(format!(
            "need 1 <= k < n, got k = {k}, n = {n}"
        )));
    }
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::InvalidConfig(format!("need alpha > 1, got {alpha}")));
    }
    let (nf, m) = (n as f64, (n - k) as f64);
    Ok((1.0 - 1.0 / alpha) / (m * ((alpha - 1.0) * nf / m + 1.0).ln()))
}

/// A two-valued fixed point of the complete graph: `k` coordinates equal to
/// `y`, the other `n - k` equal to `z`. The uniform point has `k = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompleteGraphSolution {
    pub k: usize,
    pub y: f64,
    pub z: f64,
    /// `|y exp(-y/T) - z exp(-z/T)|`.
    pub residual: f64,
}

impl CompleteGraphSolution {
    pub fn is_uniform(&self) -> bool {
        self.k == 0
    }

    /// Representative vector: the first `k` entries low.
    pub fn to_rank(&self, n: usize) -> RankVector {
        let values = (0..n)
            .map(|i| if i < self.k { self.y } else { self.z })
            .collect();
        RankVector::from_weights(values).expect("positive solution")
    }
}

/// Every fixed point of `u_T` on the `n`-node complete graph up to
/// permutation, uniform point first. Requires `g_T(x) = exp(x / T)`.
pub fn complete_fixed_points(
    n: usize,
    t: Temperature,
    w: &WeightFunction,
) -> Result<Vec<CompleteGraphSolution>> {
    if !w.is_exp_identity() {
        return Err(Error::UnsupportedWeight(format!(
            "complete-graph theory needs exp(x/T), got {}",
            w.label()
        )));
    }
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let uniform = 1.0 / n as f64;
    let mut solutions = vec![CompleteGraphSolution {
        k: 0,
        y: uniform,
        z: uniform,
        residual: 0.0,
    }];
    if t.is_infinite() {
        return Ok(solutions);
    }
    let temp = t.value();
    let upper = temp.min(uniform) * (1.0 - 1e-12);
    let lambda = |v: f64| v.ln() - v / temp;
    for k in 1..n {
        let (kf, m) = (k as f64, (n - k) as f64);
        let z_of = |y: f64| (1.0 - kf * y) / m;
        let gap = |y: f64| lambda(y) - lambda(z_of(y));

        let mut grid: Vec<f64> = (0..=600)
            .map(|i| (1e-300f64).ln() + (upper.ln() - (1e-300f64).ln()) * i as f64 / 600.0)
            .map(f64::exp)
            .collect();
        grid.extend((1..=2000).map(|i| upper * i as f64 / 2000.0));
        grid.sort_by(f64::total_cmp);
        grid.dedup();

        let mut prev: Option<(f64, f64)> = None;
        for &y in &grid {
            let v = gap(y);
            if let Some((y0, v0)) = prev {
                if v0.signum() != v.signum() && v0 != 0.0 {
                    let root = bisect_log(&gap, y0, y, v0);
                    let z = z_of(root);
                    if z - root > 1e-8 {
                        let residual = (root * (-root / temp).exp() - z * (-z / temp).exp()).abs();
                        solutions.push(CompleteGraphSolution {
                            k,
                            y: root,
                            z,
                            residual,
                        });
                    }
                }
            }
            prev = Some((y, v));
        }
    }
    Ok(solutions)
}

/// Bisection in `ln y` (geometric midpoint) on a sign-changing bracket.
fn bisect_log<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    for _ in 0..400 {
        let mid = (lo * hi).sqrt();
        let mid = if mid <= lo || mid >= hi {
            0.5 * (lo + hi)
        } else {
            mid
        };
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v == 0.0 {
            return mid;
        }
        if v.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Geometric temperature schedule from `start` toward `end` with factor
/// `ratio > 1` per step (divided when decreasing). `end` is always included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricSchedule {
    pub start: f64,
    pub end: f64,
    pub ratio: f64,
}

impl GeometricSchedule {
    pub fn new(start: f64, end: f64, ratio: f64) -> Result<Self> {
        if !(start > 0.0 && end > 0.0 && start.is_finite() && end.is_finite()) {
            return Err(Error::InvalidConfig(
                "schedule endpoints must be positive and finite".into(),
            ));
        }
        if !(ratio > 1.0 && ratio.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "schedule ratio must exceed 1, got {ratio}"
            )));
        }
        Ok(Self { start, end, ratio })
    }

    pub fn is_increasing(&self) -> bool {
        self.end >= self.start
    }

    pub fn temperatures(&self) -> Vec<f64> {
        let mut out = vec![self.start];
        let up = self.is_increasing();
        let mut t = self.start;
        loop {
            t = if up { t * self.ratio } else { t / self.ratio };
            let past = if up {
                t >= self.end * (1.0 - 1e-12)
            } else {
                t <= self.end * (1.0 + 1e-12)
            };
            if past {
                if self.end != self.start {
                    out.push(self.end);
                }
                return out;
            }
            out.push(t);
        }
    }
}

impl std::str::FromStr for GeometricSchedule {
    type Err = Error;

    /// `start:end:ratio`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidConfig(format!("schedule `{s}` is not `start:end:ratio`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let v: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        Self::new(v[0], v[1], v[2])
    }
}

/// One restart round of the homotopy procedure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomotopyRound {
    pub seed: u64,
    /// Largest schedule temperature at which the two limits were distinct.
    pub last_distinct: Option<f64>,
    /// First schedule temperature at which the two limits coincided.
    pub coincidence: Option<f64>,
    /// Times the u-iteration replaced an oscillating or stalled f-iteration.
    pub fallbacks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomotopyEstimate {
    /// Lower bound on the critical temperature: the largest temperature at
    /// which two distinct fixed points were observed. Falls back to the
    /// schedule start when no round ever saw distinct limits, and to the
    /// schedule top when some round never coincided.
    pub estimate: f64,
    pub never_distinct: bool,
    pub exhausted: bool,
    pub rounds: Vec<HomotopyRound>,
}

fn solve_branch(
    kernel: &Kernel<'_>,
    x: &RankVector,
    opts: &IterOptions,
    fallbacks: &mut usize,
) -> Result<RankVector> {
    let (fx, report) = kernel.iterate_f(x, opts)?;
    if report.termination != Termination::Oscillation {
        return Ok(fx);
    }
    *fallbacks += 1;
    let (ux, _) = kernel.iterate_u(x, opts)?;
    Ok(ux)
}

/// Lower bound on the critical temperature by warm-started homotopy: two
/// random starts are iterated at the schedule start, then the temperature is
/// raised geometrically (re-iterating from the previous limits) until the
/// limits coincide. Rounds use independent sub-seeds of `seed` and run in
/// parallel; the result is the maximum over rounds.
pub fn homotopy_critical_estimate(
    g: &Graph,
    w: &WeightFunction,
    cfg: &KernelConfig,
    seed: u64,
    schedule: &GeometricSchedule,
    restarts: usize,
    opts: &IterOptions,
) -> Result<HomotopyEstimate> {
    if restarts == 0 {
        return Err(Error::InvalidConfig("restarts must be at least 1".into()));
    }
    let starts = (0..restarts as u64)
        .map(|r| {
            let seed = sub_seed(seed, r);
            let mut rng = seeded(seed);
            let a = random_simplex(&mut rng, g.n());
            let b = random_simplex(&mut rng, g.n());
            (seed, a, b)
        })
        .collect();
    homotopy_from_starts(g, w, cfg, starts, schedule, opts)
}

/// The homotopy procedure from caller-chosen start pairs, each tagged with
/// an identifier reported as the round seed. Random simplex starts on large
/// graphs sit close to the uniform vector and may never reach a localized
/// branch; concentrated starts such as [`RankVector::vertex`] do.
pub fn homotopy_from_starts(
    g: &Graph,
    w: &WeightFunction,
    cfg: &KernelConfig,
    starts: Vec<(u64, RankVector, RankVector)>,
    schedule: &GeometricSchedule,
    opts: &IterOptions,
) -> Result<HomotopyEstimate> {
    if starts.is_empty() {
        return Err(Error::InvalidConfig("restarts must be at least 1".into()));
    }
    for (_, a, b) in &starts {
        for x in [a, b] {
            if x.len() != g.n() {
                return Err(Error::DimensionMismatch {
                    expected: g.n(),
                    got: x.len(),
                });
            }
        }
    }
    if !schedule.is_increasing() {
        return Err(Error::InvalidConfig(
            "homotopy schedule must be increasing".into(),
        ));
    }
    if !cfg.is_damped() && !g.analyze_structure().strongly_connected {
        return Err(Error::Reducible);
    }
    // validate once up front
    Kernel::new(g, w, cfg.clone())?;
    let temps = schedule.temperatures();

    let rounds: Vec<HomotopyRound> = starts
        .into_par_iter()
        .map(|(seed, mut a, mut b)| -> Result<HomotopyRound> {
            let mut round = HomotopyRound {
                seed,
                last_distinct: None,
                coincidence: None,
                fallbacks: 0,
            };
            for &t in &temps {
                let cfg_t = cfg.at_temperature(Temperature::new(t)?);
                let kernel = Kernel::new(g, w, cfg_t)?;
                a = solve_branch(&kernel, &a, opts, &mut round.fallbacks)?;
                b = solve_branch(&kernel, &b, opts, &mut round.fallbacks)?;
                if a.l1_distance(&b) < COINCIDENCE_TOL {
                    round.coincidence = Some(t);
                    break;
                }
                round.last_distinct = Some(t);
            }
            Ok(round)
        })
        .collect::<Result<_>>()?;

    let exhausted = rounds.iter().any(|r| r.coincidence.is_none());
    let best = rounds
        .iter()
        .filter_map(|r| r.last_distinct)
        .fold(None, |acc: Option<f64>, t| {
            Some(acc.map_or(t, |a| a.max(t)))
        });
    let (estimate, never_distinct) = if exhausted {
        (schedule.end, best.is_none())
    } else {
        match best {
            Some(t) => (t, false),
            None => (schedule.start, true),
        }
    };
    Ok(HomotopyEstimate {
        estimate,
        never_distinct,
        exhausted,
        rounds,
    })
}

/// Fixed points followed across a monotone temperature schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTrajectory {
    pub temperatures: Vec<f64>,
    pub ranks: Vec<RankVector>,
    pub converged: Vec<bool>,
    pub iterations: Vec<usize>,
    /// Set by [`SweepTrajectory::with_coincidence`]: first temperature of this
    /// sweep at which it meets another trajectory.
    pub coincidence_temperature: Option<f64>,
}

impl SweepTrajectory {
    /// First temperature (in this sweep's order) where the ranks of both
    /// trajectories at the same temperature are within `tol` (L1).
    pub fn merge_temperature(&self, other: &SweepTrajectory, tol: f64) -> Option<f64> {
        self.temperatures
            .iter()
            .zip(&self.ranks)
            .find_map(|(&t, r)| {
                other
                    .temperatures
                    .iter()
                    .position(|&s| (s - t).abs() <= 1e-12 * t.abs().max(s.abs()))
                    .filter(|&j| other.ranks[j].l1_distance(r) < tol)
                    .map(|_| t)
            })
    }

    pub fn with_coincidence(mut self, other: &SweepTrajectory, tol: f64) -> Self {
        self.coincidence_temperature = self.merge_temperature(other, tol);
        self
    }

    /// CSV with `#`-prefixed header lines, then `T,converged,` followed by
    /// either every rank entry or, with `top`, the indices of the top entries.
    pub fn write_csv<W: Write>(
        &self,
        mut out: W,
        header: &[String],
        top: Option<usize>,
    ) -> Result<()> {
        for line in header {
            writeln!(out, "# {line}")?;
        }
        let n = self.ranks.first().map_or(0, RankVector::len);
        let columns: Vec<String> = match top {
            Some(k) => (1..=k.min(n)).map(|i| format!("top{i}")).collect(),
            None => (0..n).map(|i| format!("x{i}")).collect(),
        };
        writeln!(out, "T,converged,{}", columns.join(","))?;
        for ((t, rank), ok) in self
            .temperatures
            .iter()
            .zip(&self.ranks)
            .zip(&self.converged)
        {
            let cells: Vec<String> = match top {
                Some(k) => top_k(rank.as_slice(), k.min(n))?
                    .iter()
                    .map(usize::to_string)
                    .collect(),
                None => rank.as_slice().iter().map(|v| format!("{v:e}")).collect(),
            };
            writeln!(out, "{t},{ok},{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// Warm-started chain of f-iterations over a strictly monotone schedule.
/// Each temperature gets the `max_f_steps` budget of `opts`; non-convergence
/// is recorded and the sweep continues from the last iterate.
pub fn temperature_sweep(
    g: &Graph,
    w: &WeightFunction,
    cfg: &KernelConfig,
    schedule: &[f64],
    x0: &RankVector,
    opts: &IterOptions,
) -> Result<SweepTrajectory> {
    if schedule.is_empty() {
        return Err(Error::InvalidConfig("empty temperature schedule".into()));
    }
    let increasing = schedule.windows(2).all(|p| p[1] > p[0]);
    let decreasing = schedule.windows(2).all(|p| p[1] < p[0]);
    if !(increasing || decreasing) {
        return Err(Error::NonMonotoneSchedule);
    }
    let mut traj = SweepTrajectory {
        temperatures: Vec::with_capacity(schedule.len()),
        ranks: Vec::with_capacity(schedule.len()),
        converged: Vec::with_capacity(schedule.len()),
        iterations: Vec::with_capacity(schedule.len()),
        coincidence_temperature: None,
    };
    let mut x = x0.clone();
    for &t in schedule {
        let kernel = Kernel::new(g, w, cfg.at_temperature(Temperature::new(t)?))?;
        let (next, report) = kernel.iterate_f(&x, opts)?;
        traj.temperatures.push(t);
        traj.converged.push(report.converged);
        traj.iterations.push(report.outer_iterations);
        traj.ranks.push(next.clone());
        x = next;
    }
    Ok(traj)
}

/// Options for a sweep: size-based tolerance with the sweep step budget.
pub fn sweep_options(n: usize) -> IterOptions {
    let mut opts = IterOptions::for_size(n);
    opts.max_f_steps = SWEEP_MAX_F_STEPS;
    opts
}
