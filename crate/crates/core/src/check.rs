//! Seeded self-validation suites: kernel power iteration against the
//! Matrix-Tree oracle, uniqueness in the certified regime, the contraction
//! inequalities and row stochasticity of the kernel.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::{generators, Graph};
use crate::kernel::{l1, IterOptions, Kernel, KernelConfig, RankVector};
use crate::metrics::{birkhoff_coefficient, hilbert_distance, kernel_distance_bound};
use crate::oracle::{h_vector, mtt_invariant_with, multistart_fixed_points, MttBackend};
use crate::rng::{random_simplex, seeded, sub_seed, SeededRng};
use crate::weights::{Temperature, WeightFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    pub seed: u64,
    /// Largest graph size drawn by the suites (at least 2).
    pub n_max: usize,
    /// Cases per suite.
    pub cases: usize,
    /// Test hook: perturbs every probed kernel row so that the row sums are
    /// no longer 1. The suites must then fail.
    pub break_normalization: bool,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_max: 6,
            cases: 50,
            break_normalization: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckFailure {
    pub case: usize,
    pub invariant: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub cases: usize,
    pub failures: Vec<CheckFailure>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub config: CheckConfig,
    pub suites: Vec<SuiteResult>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = (&str, &CheckFailure)> {
        self.suites
            .iter()
            .flat_map(|s| s.failures.iter().map(move |f| (s.name.as_str(), f)))
    }
}

const TEMPERATURES: [f64; 3] = [0.1, 1.0, 10.0];

struct Ctx<'c> {
    cfg: &'c CheckConfig,
}

impl Ctx<'_> {
    fn rng(&self, suite: u64, case: usize) -> SeededRng {
        seeded(sub_seed(sub_seed(self.cfg.seed, suite), case as u64))
    }

    fn size(&self, rng: &mut SeededRng) -> usize {
        rng.gen_range(2..=self.cfg.n_max.max(2))
    }

    fn matrix(&self, kernel: &Kernel<'_>, x: &RankVector) -> Result<DMatrix<f64>> {
        let mut m = kernel.transition_matrix(x)?;
        if self.cfg.break_normalization {
            for i in 0..m.nrows() {
                m[(i, 0)] += 1e-3;
            }
        }
        Ok(m)
    }
}

fn fail(case: usize, invariant: &str, detail: String) -> CheckFailure {
    CheckFailure {
        case,
        invariant: invariant.into(),
        detail,
    }
}

fn temperature(v: f64) -> Temperature {
    Temperature::new(v).expect("positive temperature")
}

/// Runs every suite and collects named failures. Errors from the library
/// during a case are reported as failures rather than aborting the run.
pub fn run_checks(cfg: &CheckConfig) -> CheckReport {
    let ctx = Ctx { cfg };
    let suites = vec![
        run_suite("row_stochasticity", cfg.cases, |case| {
            row_stochasticity(&ctx, case)
        }),
        run_suite("mtt_vs_power", cfg.cases, |case| mtt_vs_power(&ctx, case)),
        run_suite("certified_uniqueness", cfg.cases, |case| {
            certified_uniqueness(&ctx, case)
        }),
        run_suite("contraction", cfg.cases, |case| contraction(&ctx, case)),
    ];
    CheckReport {
        config: cfg.clone(),
        suites,
    }
}

fn run_suite<F>(name: &str, cases: usize, mut body: F) -> SuiteResult
where
    F: FnMut(usize) -> Result<Vec<CheckFailure>>,
{
    let mut failures = Vec::new();
    for case in 0..cases {
        match body(case) {
            Ok(f) => failures.extend(f),
            Err(e) => failures.push(fail(case, "no_error", e.to_string())),
        }
    }
    SuiteResult {
        name: name.into(),
        cases,
        failures,
    }
}

fn row_stochasticity(ctx: &Ctx<'_>, case: usize) -> Result<Vec<CheckFailure>> {
    let mut rng = ctx.rng(1, case);
    let n = ctx.size(&mut rng);
    let g = generators::random_irreducible(n, 0.4, &mut rng);
    let w = WeightFunction::exp_identity();
    let mut out = Vec::new();
    for t in TEMPERATURES {
        let kernel = Kernel::new(&g, &w, KernelConfig::plain(temperature(t)))?;
        let x = random_simplex(&mut rng, n);
        let m = ctx.matrix(&kernel, &x)?;
        for i in 0..n {
            let s: f64 = m.row(i).iter().sum();
            if (s - 1.0).abs() > 1e-12 {
                out.push(fail(
                    case,
                    "row_sum_one",
                    format!("T = {t}, row {i} sums to {s}"),
                ));
            }
        }
    }
    Ok(out)
}

fn mtt_vs_power(ctx: &Ctx<'_>, case: usize) -> Result<Vec<CheckFailure>> {
    let mut rng = ctx.rng(2, case);
    let n = ctx.size(&mut rng);
    let g = generators::random_irreducible(n, 0.4, &mut rng);
    let w = WeightFunction::exp_identity();
    let mut out = Vec::new();
    for t in TEMPERATURES {
        let temp = temperature(t);
        let kernel = Kernel::new(&g, &w, KernelConfig::plain(temp))?;
        let x = random_simplex(&mut rng, n);
        let (power, _) = kernel.invariant_measure(&x, 1e-14)?;
        let m = ctx.matrix(&kernel, &x)?;
        let laplacian = match mtt_invariant_with(&m, MttBackend::Laplacian) {
            Ok(v) => v,
            Err(e) => {
                out.push(fail(case, "mtt_input_stochastic", format!("T = {t}: {e}")));
                continue;
            }
        };
        let d = power.l1_distance(&laplacian);
        if d > 1e-8 {
            out.push(fail(
                case,
                "power_equals_mtt",
                format!("T = {t}, L1 = {d:e}"),
            ));
        }
        if n <= crate::oracle::ENUMERATION_MAX_N {
            let trees = mtt_invariant_with(&m, MttBackend::Enumeration)?;
            let d = trees.l1_distance(&laplacian);
            if d > 1e-10 {
                out.push(fail(
                    case,
                    "mtt_backends_agree",
                    format!("T = {t}, L1 = {d:e}"),
                ));
            }
        }
        let h = h_vector(&g, &w, temp, &x)?;
        let total: f64 = h.iter().sum();
        let normalized: Vec<f64> = h.iter().map(|v| v / total).collect();
        let d = l1(&normalized, power.as_slice());
        if d > 1e-8 {
            out.push(fail(
                case,
                "h_vector_normalization",
                format!("T = {t}, L1 = {d:e}"),
            ));
        }
    }
    Ok(out)
}

fn certified_uniqueness(ctx: &Ctx<'_>, case: usize) -> Result<Vec<CheckFailure>> {
    let mut rng = ctx.rng(3, case);
    let n = ctx.size(&mut rng);
    let g = generators::random_irreducible(n, 0.4, &mut rng);
    let w = WeightFunction::exp_identity();
    // n L+ = n / T <= 1
    let temp = temperature(n as f64 * rng.gen_range(1.0..3.0));
    let starts: Vec<RankVector> = (0..4).map(|_| random_simplex(&mut rng, n)).collect();
    let set = multistart_fixed_points(
        &g,
        &w,
        &KernelConfig::plain(temp),
        &starts,
        &IterOptions::for_size(n),
    )?;
    let mut out = Vec::new();
    if set.len() != 1 || set.dropped > 0 {
        out.push(fail(
            case,
            "single_fixed_point",
            format!(
                "T = {}, {} points, {} dropped",
                temp.value(),
                set.len(),
                set.dropped
            ),
        ));
    }
    Ok(out)
}

fn contraction(ctx: &Ctx<'_>, case: usize) -> Result<Vec<CheckFailure>> {
    let mut rng = ctx.rng(4, case);
    let n = ctx.size(&mut rng);
    let g: Graph = generators::random_positive(n, 0.2, 2.0, &mut rng);
    let tau = birkhoff_coefficient(&g.to_dense())?;
    // 2 / T < 1 - tau
    let temp = temperature(2.0 / (1.0 - tau) * rng.gen_range(1.05..3.0));
    let rate = 2.0 / temp.value();
    let w = WeightFunction::exp_identity();
    let cfg = KernelConfig::plain(temp);
    let kernel = Kernel::new(&g, &w, cfg.clone())?;
    let mut out = Vec::new();
    for _ in 0..20 {
        let x = random_simplex(&mut rng, n);
        let y = random_simplex(&mut rng, n);
        let dxy = hilbert_distance(x.as_slice(), y.as_slice())?;
        let fx = crate::metrics::row_times(x.as_slice(), &ctx.matrix(&kernel, &x)?);
        let fy = crate::metrics::row_times(y.as_slice(), &ctx.matrix(&kernel, &y)?);
        let lhs = hilbert_distance(&fx, &fy)?;
        if lhs > (tau + rate) * dxy + 1e-9 {
            out.push(fail(
                case,
                "f_contracts",
                format!("{lhs:e} > ({tau} + {rate}) * {dxy:e}"),
            ));
        }
        let bound = kernel_distance_bound(&g, &w, &cfg, &x, &y)?;
        if bound > rate * dxy + 1e-9 {
            out.push(fail(
                case,
                "kernel_lipschitz",
                format!("{bound:e} > {rate} * {dxy:e}"),
            ));
        }
    }
    if ctx.cfg.break_normalization {
        // the perturbed kernel is no longer stochastic: f(x) leaves the simplex
        let x = random_simplex(&mut rng, n);
        let fx = crate::metrics::row_times(x.as_slice(), &ctx.matrix(&kernel, &x)?);
        let s: f64 = fx.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            out.push(fail(case, "f_preserves_mass", format!("sum = {s}")));
        }
    }
    Ok(out)
}
