//! Benchmark grids read from TOML.

use std::time::Duration;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use delphic::domains::{self, Domain, DomainParams};
use delphic::planner::{solve, Semantics, SolveOptions, SolveResult};
use delphic::taskio::StatsRow;

fn default_timeout() -> f64 {
    600.0
}

fn default_bound() -> usize {
    10
}

fn default_semantics() -> Vec<String> {
    vec!["delphic".into(), "kripke".into()]
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    /// Per run, in seconds.
    #[serde(default = "default_timeout")]
    pub timeout: f64,
    #[serde(default = "default_bound")]
    pub max_bound: usize,
    #[serde(default)]
    pub dedup: bool,
    #[serde(default)]
    pub contract: bool,
    #[serde(default = "default_semantics")]
    pub semantics: Vec<String>,
    #[serde(default)]
    pub grid: Vec<GridEntry>,
}

/// Missing lists fall back to the domain's smallest valid value.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridEntry {
    pub domain: String,
    pub agents: Option<Vec<usize>>,
    pub rooms: Option<Vec<usize>>,
    pub boxes: Option<Vec<usize>>,
    pub depth: Option<Vec<usize>>,
    pub goals: Option<Vec<usize>>,
}

pub struct Run {
    pub params: DomainParams,
    pub semantics: Semantics,
}

impl BenchConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: BenchConfig = toml::from_str(text).context("invalid bench config")?;
        if cfg.timeout.is_nan() || cfg.timeout <= 0.0 {
            bail!("timeout must be positive");
        }
        for s in &cfg.semantics {
            s.parse::<Semantics>().map_err(anyhow::Error::msg)?;
        }
        Ok(cfg)
    }

    pub fn options(&self) -> SolveOptions {
        SolveOptions {
            max_bound: self.max_bound,
            timeout: Some(Duration::from_secs_f64(self.timeout)),
            dedup: self.dedup,
            contract: self.contract,
        }
    }

    /// Cartesian product of every grid entry, in file order. Combinations the
    /// generator rejects are reported through `skipped` and left out.
    pub fn runs(&self, mut skipped: impl FnMut(String)) -> Result<Vec<Run>> {
        let sems: Vec<Semantics> = self
            .semantics
            .iter()
            .map(|s| s.parse().expect("checked in parse"))
            .collect();
        let mut runs = Vec::new();
        for entry in &self.grid {
            let domain: Domain = entry.domain.parse().map_err(anyhow::Error::msg)?;
            let base = DomainParams::new(domain);
            let list = |v: &Option<Vec<usize>>, d: usize| v.clone().unwrap_or_else(|| vec![d]);
            let goals = entry
                .goals
                .clone()
                .unwrap_or_else(|| (0..domains::goal_count(domain)).collect());
            for &n in &list(&entry.agents, base.agents) {
                for &k in &list(&entry.rooms, base.rooms) {
                    for &m in &list(&entry.boxes, base.boxes) {
                        for &d in &list(&entry.depth, base.depth) {
                            for &g in &goals {
                                let p = base.agents(n).rooms(k).boxes(m).depth(d).goal(g);
                                if let Err(e) = domains::generate(&p) {
                                    skipped(format!("skipping {domain} {}: {e}", p.label()));
                                    continue;
                                }
                                for &semantics in &sems {
                                    runs.push(Run {
                                        params: p,
                                        semantics,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(runs)
    }
}

pub fn stats_row(domain: &str, params: &str, semantics: Semantics, r: &SolveResult) -> StatsRow {
    let timed_out = matches!(r.outcome, delphic::planner::SolveOutcome::Timeout { .. });
    StatsRow {
        domain: domain.to_string(),
        params: params.to_string(),
        semantics: semantics.to_string(),
        plan_length: r.outcome.plan().map(|p| p.len()),
        bound: r.stats.bound_reached,
        time_ms: if timed_out {
            None
        } else {
            Some(r.stats.time_ms)
        },
        nodes: Some(r.stats.total_nodes),
        edges: Some(r.stats.total_edges),
        expanded: Some(r.stats.expanded),
        status: r.outcome.status().to_string(),
    }
}

pub fn run_all(cfg: &BenchConfig, runs: &[Run]) -> Vec<StatsRow> {
    let options = cfg.options();
    runs.iter()
        .map(|run| {
            let task = domains::build(&run.params).expect("validated when the grid was built");
            let result = solve(&task, run.semantics, &options);
            stats_row(
                run.params.domain.name(),
                &run.params.label(),
                run.semantics,
                &result,
            )
        })
        .collect()
}
