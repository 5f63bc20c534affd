//! Execution of a resolved [`RunConfig`].

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use tpagerank::check::{run_checks, CheckConfig, CheckReport};
use tpagerank::critical::{
    homotopy_critical_estimate, sweep_options, temperature_sweep, tstar_complete,
    GeometricSchedule, HomotopyRound,
};
use tpagerank::kernel::classical_pagerank;
use tpagerank::report::{rank_cdf, top_k, write_cdf_csv};
use tpagerank::{IterOptions, IterationReport, Kernel, Scheme};

use crate::config::{read_rank_artifact, CommandKind, RunConfig};

pub const EXIT_ERROR: u8 = 1;
pub const EXIT_NOT_CONVERGED: u8 = 2;
pub const EXIT_CHECK_FAILED: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    NotConverged,
    CheckFailed,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        match s {
            Status::Ok => ExitCode::SUCCESS,
            Status::NotConverged => ExitCode::from(EXIT_NOT_CONVERGED),
            Status::CheckFailed => ExitCode::from(EXIT_CHECK_FAILED),
        }
    }
}

pub fn execute(cfg: &RunConfig, out: Option<&Path>) -> Result<Status> {
    if let Some(threads) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cfg.command {
        CommandKind::Rank => rank(cfg, out),
        CommandKind::Classic => classic(cfg, out),
        CommandKind::Sweep => sweep(cfg, out),
        CommandKind::Critical => critical(cfg, out),
        CommandKind::Check => check(cfg, out),
        CommandKind::Cdf => cdf(cfg, out),
        CommandKind::Topk => topk(cfg, out),
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            Ok(stdout.flush()?)
        }
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_vec_pretty(value)?;
    text.push(b'\n');
    emit(out, &text)
}

fn options(cfg: &RunConfig, n: usize) -> IterOptions {
    match cfg.tol {
        Some(tol) => IterOptions::with_tol(tol),
        None => IterOptions::for_size(n),
    }
}

#[derive(Serialize)]
struct RankArtifact<'a> {
    config: &'a RunConfig,
    n: usize,
    rank: &'a [f64],
    converged: bool,
    fixed_point_residual: Option<f64>,
    report: Option<&'a IterationReport>,
}

fn rank(cfg: &RunConfig, out: Option<&Path>) -> Result<Status> {
    let g = cfg.load_graph()?;
    let w = cfg.weights()?;
    let kernel = Kernel::new(&g, &w, cfg.kernel_config()?)?;
    let x0 = cfg.initial_rank(g.n())?;
    let opts = options(cfg, g.n());
    let (x, report) = match Scheme::from(cfg.scheme) {
        Scheme::U => kernel.iterate_u(&x0, &opts)?,
        Scheme::F => kernel.iterate_f(&x0, &opts)?,
    };
    let residual = kernel.fixed_point_residual(&x)?;
    emit_json(
        out,
        &RankArtifact {
            config: cfg,
            n: g.n(),
            rank: x.as_slice(),
            converged: report.converged,
            fixed_point_residual: Some(residual),
            report: Some(&report),
        },
    )?;
    if let Err(e) = report.ensure_converged() {
        eprintln!("error: {e}");
        return Ok(Status::NotConverged);
    }
    Ok(Status::Ok)
}

fn classic(cfg: &RunConfig, out: Option<&Path>) -> Result<Status> {
    let g = cfg.load_graph()?;
    let tol = cfg.tol.unwrap_or_else(|| IterOptions::for_size(g.n()).tol);
    let x = classical_pagerank(&g, cfg.gamma, &cfg.personalization()?, tol)?;
    emit_json(
        out,
        &RankArtifact {
            config: cfg,
            n: g.n(),
            rank: x.as_slice(),
            converged: true,
            fixed_point_residual: None,
            report: None,
        },
    )?;
    Ok(Status::Ok)
}

fn schedule(cfg: &RunConfig) -> Result<GeometricSchedule> {
    let Some(spec) = cfg.schedule.as_deref() else {
        bail!("--schedule is required");
    };
    Ok(spec.parse()?)
}

fn sweep(cfg: &RunConfig, out: Option<&Path>) -> Result<Status> {
    let g = cfg.load_graph()?;
    let w = cfg.weights()?;
    let model = cfg.kernel_config()?;
    let x0 = cfg.initial_rank(g.n())?;
    let mut opts = sweep_options(g.n());
    if let Some(tol) = cfg.tol {
        opts.tol = tol;
        opts.inner_tol = tol / 10.0;
    }
    let temps = schedule(cfg)?.temperatures();
    let traj = temperature_sweep(&g, &w, &model, &temps, &x0, &opts)?;
    let mut buf = Vec::new();
    traj.write_csv(&mut buf, &[cfg.header_line()], cfg.topk)?;
    emit(out, &buf)?;
    let stalled = traj.converged.iter().filter(|&&c| !c).count();
    if stalled > 0 {
        eprintln!(
            "error: {stalled} of {} temperatures did not converge",
            temps.len()
        );
        return Ok(Status::NotConverged);
    }
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct CriticalArtifact<'a> {
    config: &'a RunConfig,
    n: usize,
    estimate: f64,
    never_distinct: bool,
    exhausted: bool,
    complete_graph_reference: f64,
    rounds: &'a [HomotopyRound],
}

fn critical(cfg: &RunConfig, out: Option<&Path>) -> Result<Status> {
    let g = cfg.load_graph()?;
    let w = cfg.weights()?;
    let model = cfg.kernel_config()?;
    let sched = schedule(cfg)?;
    let est = homotopy_critical_estimate(
        &g,
        &w,
        &model,
        cfg.seed,
        &sched,
        cfg.restarts,
        &options(cfg, g.n()),
    )?;
    let reference = if g.n() >= 2 {
        tstar_complete(g.n())?
    } else {
        f64::NAN
    };
    let artifact = CriticalArtifact {
        config: cfg,
        n: g.n(),
        estimate: est.estimate,
        never_distinct: est.never_distinct,
        exhausted: est.exhausted,
        complete_graph_reference: reference,
        rounds: &est.rounds,
    };
    emit_json(out, &artifact)?;
    if out.is_some() {
        println!("estimate {}", est.estimate);
        println!("complete-graph reference T*({}) = {reference}", g.n());
        for (i, r) in est.rounds.iter().enumerate() {
            let show = |t: Option<f64>| t.map_or("-".to_string(), |v| v.to_string());
            println!(
                "restart {i}: last distinct {}, coincidence {}",
                show(r.last_distinct),
                show(r.coincidence)
            );
        }
    }
    if est.never_distinct {
        eprintln!("note: limits coincided at the start of the schedule; lower it to get a bound");
    }
    if est.exhausted {
        eprintln!("error: schedule exhausted before the limits coincided");
        return Ok(Status::NotConverged);
    }
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct CheckArtifact<'a> {
    config: &'a RunConfig,
    passed: bool,
    report: &'a CheckReport,
}

fn check(cfg: &RunConfig, out: Option<&Path>) -> Result<Status> {
    let report = run_checks(&CheckConfig {
        seed: cfg.seed,
        n_max: cfg.n_max,
        cases: cfg.cases,
        break_normalization: cfg.break_normalization,
    });
    emit_json(
        out,
        &CheckArtifact {
            config: cfg,
            passed: report.passed(),
            report: &report,
        },
    )?;
    for (suite, f) in report.failures() {
        eprintln!("FAIL {suite}/{} case {}: {}", f.invariant, f.case, f.detail);
    }
    Ok(if report.passed() {
        Status::Ok
    } else {
        Status::CheckFailed
    })
}

fn cdf(cfg: &RunConfig, out: Option<&Path>) -> Result<Status> {
    let input = cfg.inputs.first().context("cdf needs an input artifact")?;
    let rank = read_rank_artifact(Path::new(input))?;
    let points = rank_cdf(rank.as_slice(), cfg.points)?;
    let mut buf = Vec::new();
    write_cdf_csv(&mut buf, &[cfg.header_line()], &points)?;
    emit(out, &buf)?;
    Ok(Status::Ok)
}

fn topk(cfg: &RunConfig, out: Option<&Path>) -> Result<Status> {
    let k = cfg.topk.context("--topk is required")?;
    let lists = cfg
        .inputs
        .iter()
        .map(|p| Ok(top_k(read_rank_artifact(Path::new(p))?.as_slice(), k)?))
        .collect::<Result<Vec<_>>>()?;
    let mut buf = Vec::new();
    writeln!(buf, "# {}", cfg.header_line())?;
    writeln!(buf, "position,{}", cfg.inputs.join(","))?;
    for pos in 0..k {
        let row: Vec<String> = lists.iter().map(|l| l[pos].to_string()).collect();
        writeln!(buf, "{},{}", pos + 1, row.join(","))?;
    }
    emit(out, &buf)?;
    Ok(Status::Ok)
}
