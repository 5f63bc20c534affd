//! `tpagerank`: rank computation, temperature sweeps, critical-temperature
//! estimation, self-checks and rank reports.

mod commands;
mod config;
mod expr;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tpagerank::Temperature;

use config::{CommandKind, GraphFormat, RunConfig, SchemeArg};

#[derive(Parser)]
#[command(
    name = "tpagerank",
    version,
    about = "Temperature-dependent nonlinear PageRank"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a T-PageRank by the u- or f-iteration.
    Rank {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = SchemeArg::F)]
        scheme: SchemeArg,
        /// `uniform`, `vertex:<i>`, `a,b,c` (entries may use + - * /) or a rank artifact.
        #[arg(long, default_value = "uniform")]
        x0: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Classical PageRank of the damped or undamped chain.
    Classic {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 0.85)]
        gamma: f64,
        #[arg(long, default_value = "uniform")]
        d: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Follow fixed points across a monotone temperature schedule (CSV).
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        /// `start:end:ratio`; decreasing when end < start.
        #[arg(long)]
        schedule: String,
        #[arg(long, default_value = "uniform")]
        x0: String,
        /// Report the top-k indices per temperature instead of full ranks.
        #[arg(long)]
        topk: Option<usize>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Homotopy lower bound on the critical temperature.
    Critical {
        #[command(flatten)]
        model: ModelArgs,
        /// `lo:hi:ratio`, increasing.
        #[arg(long, default_value = "0.01:2:1.05")]
        schedule: String,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Seeded oracle cross-validation suites.
    Check {
        #[arg(long, default_value_t = 6)]
        n_max: usize,
        #[arg(long, default_value_t = 50)]
        cases: usize,
        /// Test hook: corrupt kernel row sums so the suites must fail.
        #[arg(long)]
        break_normalization: bool,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Complementary CDF of a rank artifact (CSV).
    Cdf {
        input: PathBuf,
        #[arg(long, default_value_t = 50)]
        points: usize,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Top-k indices of one or more rank artifacts (CSV, one column each).
    Topk {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        topk: usize,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Re-run the configuration recorded in an output header.
    Replay {
        output: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Args)]
struct GraphArgs {
    /// Graph file, or `complete:<n>`, `ring:<n>`, `cycle:<n>`, `random:<n>:<p>:<seed>`.
    #[arg(long)]
    graph: String,
    #[arg(long, value_enum, default_value_t = GraphFormat::Edgelist)]
    format: GraphFormat,
}

#[derive(Args)]
struct ModelArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Temperature of the graph part (`inf` for classical weights).
    #[arg(long = "T", default_value = "1")]
    t1: Temperature,
    /// Temperature of the teleportation part; defaults to --T.
    #[arg(long = "T2")]
    t2: Option<Temperature>,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// `uniform` or a file of personalization weights.
    #[arg(long, default_value = "uniform")]
    d: String,
    /// `identity` or `custom-table:<path>` (CSV rows `x,E(x),E'(x)`).
    #[arg(long, default_value = "identity")]
    energy: String,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 1 gives bit-reproducible output.
    #[arg(long)]
    threads: Option<usize>,
}

fn base(command: CommandKind, run: &RunArgs) -> RunConfig {
    RunConfig {
        command,
        graph: None,
        format: GraphFormat::Edgelist,
        energy: "identity".into(),
        t1: Temperature::INFINITE,
        t2: Temperature::INFINITE,
        gamma: 1.0,
        d: "uniform".into(),
        scheme: SchemeArg::F,
        x0: "uniform".into(),
        tol: run.tol,
        seed: run.seed,
        schedule: None,
        restarts: 0,
        threads: run.threads,
        topk: None,
        points: 0,
        inputs: Vec::new(),
        n_max: 0,
        cases: 0,
        break_normalization: false,
    }
}

fn with_model(mut cfg: RunConfig, model: ModelArgs) -> RunConfig {
    cfg.graph = Some(model.graph.graph);
    cfg.format = model.graph.format;
    cfg.t1 = model.t1;
    cfg.t2 = model.t2.unwrap_or(model.t1);
    cfg.gamma = model.gamma;
    cfg.d = model.d;
    cfg.energy = model.energy;
    cfg
}

fn resolve(command: Command) -> anyhow::Result<(RunConfig, Option<PathBuf>)> {
    Ok(match command {
        Command::Rank {
            model,
            scheme,
            x0,
            run,
        } => {
            let mut cfg = with_model(base(CommandKind::Rank, &run), model);
            cfg.scheme = scheme;
            cfg.x0 = x0;
            (cfg, run.out)
        }
        Command::Classic {
            graph,
            gamma,
            d,
            run,
        } => {
            let mut cfg = base(CommandKind::Classic, &run);
            cfg.graph = Some(graph.graph);
            cfg.format = graph.format;
            cfg.gamma = gamma;
            cfg.d = d;
            (cfg, run.out)
        }
        Command::Sweep {
            model,
            schedule,
            x0,
            topk,
            run,
        } => {
            let mut cfg = with_model(base(CommandKind::Sweep, &run), model);
            cfg.schedule = Some(schedule);
            cfg.x0 = x0;
            cfg.topk = topk;
            (cfg, run.out)
        }
        Command::Critical {
            model,
            schedule,
            restarts,
            run,
        } => {
            let mut cfg = with_model(base(CommandKind::Critical, &run), model);
            cfg.schedule = Some(schedule);
            cfg.restarts = restarts;
            (cfg, run.out)
        }
        Command::Check {
            n_max,
            cases,
            break_normalization,
            run,
        } => {
            let mut cfg = base(CommandKind::Check, &run);
            cfg.n_max = n_max;
            cfg.cases = cases;
            cfg.break_normalization = break_normalization;
            (cfg, run.out)
        }
        Command::Cdf { input, points, run } => {
            let mut cfg = base(CommandKind::Cdf, &run);
            cfg.inputs = vec![input.display().to_string()];
            cfg.points = points;
            (cfg, run.out)
        }
        Command::Topk { inputs, topk, run } => {
            let mut cfg = base(CommandKind::Topk, &run);
            cfg.inputs = inputs.iter().map(|p| p.display().to_string()).collect();
            cfg.topk = Some(topk);
            (cfg, run.out)
        }
        Command::Replay {
            output,
            out,
            threads,
        } => {
            let mut cfg = RunConfig::from_output(&output)?;
            if threads.is_some() {
                cfg.threads = threads;
            }
            (cfg, out)
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result =
        resolve(cli.command).and_then(|(cfg, out)| commands::execute(&cfg, out.as_deref()));
    match result {
        Ok(status) => status.into(),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::EXIT_ERROR)
        }
    }
}
