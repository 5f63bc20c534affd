//! The resolved run configuration and the inputs it refers to.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use tpagerank::graph::{generators, load_edge_list, load_matrix_market, EdgeWeights};
use tpagerank::rng::seeded;
use tpagerank::weights::EnergyTable;
use tpagerank::{
    Energy, Graph, KernelConfig, Personalization, RankVector, Scheme, Temperature, WeightFunction,
};

use crate::expr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Rank,
    Classic,
    Sweep,
    Critical,
    Check,
    Cdf,
    Topk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GraphFormat {
    #[default]
    Edgelist,
    Mtx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SchemeArg {
    U,
    #[default]
    F,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::U => Scheme::U,
            SchemeArg::F => Scheme::F,
        }
    }
}

/// Everything needed to reproduce a run. Echoed in the header of every
/// output; `tpagerank replay` re-executes it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub graph: Option<String>,
    pub format: GraphFormat,
    pub energy: String,
    pub t1: Temperature,
    pub t2: Temperature,
    pub gamma: f64,
    pub d: String,
    pub scheme: SchemeArg,
    pub x0: String,
    pub tol: Option<f64>,
    pub seed: u64,
    pub schedule: Option<String>,
    pub restarts: usize,
    pub threads: Option<usize>,
    pub topk: Option<usize>,
    pub points: usize,
    pub inputs: Vec<String>,
    pub n_max: usize,
    pub cases: usize,
    pub break_normalization: bool,
}

impl RunConfig {
    pub fn header_line(&self) -> String {
        format!(
            "config {}",
            serde_json::to_string(self).expect("serializable config")
        )
    }

    /// Recovers the configuration from a JSON artifact (`config` field) or a
    /// CSV output (`# config {...}` line).
    pub fn from_output(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        if let Ok(value) = serde_json::from_str::<serde_json::Value>(&text) {
            let config = value
                .get("config")
                .ok_or_else(|| anyhow!("{} has no config", path.display()))?;
            return Ok(serde_json::from_value(config.clone())?);
        }
        for line in text.lines() {
            if let Some(json) = line.strip_prefix("# config ") {
                return Ok(serde_json::from_str(json)?);
            }
        }
        bail!("{} has no config header", path.display())
    }

    pub fn graph_source(&self) -> Result<&str> {
        self.graph
            .as_deref()
            .ok_or_else(|| anyhow!("--graph is required for `{:?}`", self.command))
    }

    /// Loads or generates the graph and replaces dangling rows by all-ones rows.
    pub fn load_graph(&self) -> Result<Graph> {
        let source = self.graph_source()?;
        let g = match parse_generator(source)? {
            Some(g) => g,
            None => {
                let file = File::open(source).with_context(|| format!("opening graph {source}"))?;
                let reader = BufReader::new(file);
                match self.format {
                    GraphFormat::Edgelist => load_edge_list(reader, EdgeWeights::Weighted),
                    GraphFormat::Mtx => load_matrix_market(reader),
                }
                .with_context(|| format!("parsing graph {source}"))?
            }
        };
        let dangling = g.has_zero_row().is_some();
        if dangling {
            eprintln!("note: dangling rows replaced by all-ones rows");
        }
        Ok(g.normalize_dangling())
    }

    pub fn weights(&self) -> Result<WeightFunction> {
        if self.energy == "identity" {
            return Ok(WeightFunction::exp_identity());
        }
        let path = self
            .energy
            .strip_prefix("custom-table:")
            .ok_or_else(|| anyhow!("--energy must be `identity` or `custom-table:<path>`"))?;
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading energy table {path}"))?;
        let table = EnergyTable::from_csv(&text)?;
        Ok(WeightFunction::exp_energy(Energy::from_table(path, table))?)
    }

    pub fn personalization(&self) -> Result<Personalization> {
        if self.d == "uniform" {
            return Ok(Personalization::Uniform);
        }
        let text =
            std::fs::read_to_string(&self.d).with_context(|| format!("reading --d {}", self.d))?;
        let values = text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .with_context(|| format!("bad personalization entry `{s}`"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Personalization::Vector(values))
    }

    pub fn kernel_config(&self) -> Result<KernelConfig> {
        Ok(if self.gamma < 1.0 {
            KernelConfig::damped(self.t1, self.t2, self.gamma, self.personalization()?)
        } else {
            KernelConfig::plain(self.t1)
        })
    }

    /// `uniform`, `vertex:<i>`, a comma-separated literal (entries may use
    /// arithmetic), or the path of a rank artifact.
    pub fn initial_rank(&self, n: usize) -> Result<RankVector> {
        parse_x0(&self.x0, n)
    }
}

pub fn parse_x0(spec: &str, n: usize) -> Result<RankVector> {
    let x = if spec == "uniform" {
        RankVector::uniform(n)
    } else if let Some(i) = spec.strip_prefix("vertex:") {
        let i: usize = i
            .parse()
            .with_context(|| format!("bad vertex index in `{spec}`"))?;
        if i >= n {
            bail!("vertex {i} out of range for n = {n}");
        }
        RankVector::vertex(n, i)
    } else if Path::new(spec).is_file() {
        read_rank_artifact(Path::new(spec))?
    } else {
        let values = spec
            .split(',')
            .map(expr::eval)
            .collect::<Result<Vec<_>>>()?;
        RankVector::new(values)?
    };
    if x.len() != n {
        bail!("x0 has {} entries, graph has {n} nodes", x.len());
    }
    Ok(x)
}

pub fn read_rank_artifact(path: &Path) -> Result<RankVector> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let rank = value
        .get("rank")
        .ok_or_else(|| anyhow!("{} is not a rank artifact", path.display()))?;
    let values: Vec<f64> = serde_json::from_value(rank.clone())?;
    if values.is_empty() {
        bail!("{} holds an empty rank", path.display());
    }
    Ok(RankVector::new(values)?)
}

/// `complete:<n>`, `ring:<n>`, `cycle:<n>` or `random:<n>:<p>:<seed>`.
fn parse_generator(source: &str) -> Result<Option<Graph>> {
    let parts: Vec<&str> = source.split(':').collect();
    let size = |s: &str| {
        s.parse::<usize>()
            .with_context(|| format!("bad size in `{source}`"))
    };
    let g = match parts.as_slice() {
        ["complete", n] => generators::complete(size(n)?),
        ["ring", n] => generators::ring(size(n)?),
        ["cycle", n] => generators::cycle(size(n)?),
        ["random", n, p, seed] => {
            let p: f64 = p
                .parse()
                .with_context(|| format!("bad probability in `{source}`"))?;
            let seed: u64 = seed
                .parse()
                .with_context(|| format!("bad seed in `{source}`"))?;
            generators::random(size(n)?, p, &mut seeded(seed))
        }
        _ => return Ok(None),
    };
    if g.n() == 0 {
        bail!("generated graph `{source}` is empty");
    }
    Ok(Some(g))
}
