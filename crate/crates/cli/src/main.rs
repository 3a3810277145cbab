mod bench;
mod dot;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use delphic::domains::{self, Domain, DomainParams};
use delphic::equivalence::{self, Verdict};
use delphic::planner::{
    replay, solve, trace_delphic, trace_kripke, validate_plan, PlanningTask, Semantics,
    SolveOptions, SolveOutcome, StepError,
};
use delphic::taskio::{self, StatsRow};

const CB_TOY: &str = include_str!("../tasks/cb_toy.task");

const EXIT_PLAN: u8 = 0;
const EXIT_NO_PLAN: u8 = 1;
const EXIT_TIMEOUT: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "delphic",
    version,
    about = "Epistemic planning with Kripke and possibility semantics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find a shortest plan.
    Solve {
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        stats: StatsArgs,
    },
    /// Solve, or replay a plan, under both semantics side by side.
    Compare {
        #[command(flatten)]
        search: SearchArgs,
        /// Comma-separated action names to replay instead of searching.
        #[arg(long)]
        plan: Option<String>,
        #[command(flatten)]
        stats: StatsArgs,
    },
    /// Validate a plan, cross-check a task, or run the random oracles.
    Verify(VerifyArgs),
    /// Write a benchmark or random task file.
    Gen(GenArgs),
    /// Write one DOT graph per visited state.
    Viz {
        #[command(flatten)]
        search: SearchArgs,
        /// Plan to draw. Without it the task is solved first.
        #[arg(long)]
        plan: Option<String>,
        #[arg(long, value_name = "DIR")]
        dot_out: PathBuf,
    },
    /// Run a grid of benchmark instances described by a TOML file.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        stats: StatsArgs,
    },
}

#[derive(Args)]
struct SearchArgs {
    /// Task file, or the built-in `cb_toy`.
    #[arg(long)]
    task: String,
    #[arg(long, default_value = "delphic")]
    sem: Semantics,
    #[arg(long, default_value_t = 10)]
    max_bound: usize,
    /// Seconds.
    #[arg(long)]
    timeout: Option<f64>,
    #[arg(long)]
    dedup: bool,
    #[arg(long)]
    contract: bool,
}

impl SearchArgs {
    fn options(&self) -> Result<SolveOptions> {
        let timeout = match self.timeout {
            Some(t) if t.is_finite() && t >= 0.0 => Some(Duration::from_secs_f64(t)),
            Some(t) => bail!("invalid timeout {t}"),
            None => None,
        };
        Ok(SolveOptions {
            max_bound: self.max_bound,
            timeout,
            dedup: self.dedup,
            contract: self.contract,
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StatsFormat {
    Csv,
    Json,
    Table,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long, value_enum)]
    stats: Option<StatsFormat>,
    /// Write statistics here instead of standard output.
    #[arg(long, value_name = "PATH")]
    stats_out: Option<PathBuf>,
}

impl StatsArgs {
    fn emit(&self, rows: &[StatsRow], default: Option<StatsFormat>) -> Result<()> {
        let Some(format) = self.stats.or(default) else {
            return Ok(());
        };
        let text = match format {
            StatsFormat::Csv => taskio::write_stats_csv(rows),
            StatsFormat::Json => taskio::write_stats_json(rows) + "\n",
            StatsFormat::Table => taskio::write_stats_table(rows),
        };
        match &self.stats_out {
            Some(path) => {
                fs::write(path, text).with_context(|| format!("writing {}", path.display()))
            }
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Oracle {
    Truth,
    Update,
    Identity,
    All,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, required_unless_present = "oracle")]
    task: Option<String>,
    /// Plan to validate. Without it the task is solved and cross-checked.
    #[arg(long, requires = "task")]
    plan: Option<String>,
    /// Restrict plan validation to one semantics.
    #[arg(long)]
    sem: Option<Semantics>,
    #[arg(long, default_value_t = 10)]
    max_bound: usize,
    #[arg(long)]
    timeout: Option<f64>,
    #[arg(long, value_enum, conflicts_with = "task")]
    oracle: Option<Oracle>,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, required_unless_present = "random")]
    domain: Option<Domain>,
    #[arg(long)]
    agents: Option<usize>,
    #[arg(long)]
    rooms: Option<usize>,
    #[arg(long)]
    boxes: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, default_value_t = 0)]
    goal: usize,
    /// A small random task instead of a benchmark domain.
    #[arg(long, conflicts_with = "domain")]
    random: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_task(source: &str) -> Result<PlanningTask> {
    let text = if source == "cb_toy" && !Path::new(source).exists() {
        CB_TOY.to_string()
    } else {
        fs::read_to_string(source).with_context(|| format!("cannot read task `{source}`"))?
    };
    taskio::parse_task(&text).map_err(|e| anyhow!("{source}: {e}"))
}

fn split_plan(plan: &str) -> Vec<&str> {
    plan.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect()
}

fn outcome_code(outcome: &SolveOutcome) -> u8 {
    match outcome {
        SolveOutcome::Plan(_) => EXIT_PLAN,
        SolveOutcome::NoPlanUpTo(_) => EXIT_NO_PLAN,
        SolveOutcome::Timeout { .. } => EXIT_TIMEOUT,
    }
}

fn describe(outcome: &SolveOutcome) -> String {
    match outcome {
        SolveOutcome::Plan(p) => format!("plan: {p}"),
        SolveOutcome::NoPlanUpTo(b) => format!("no plan up to bound {b}"),
        SolveOutcome::Timeout { bound } => format!("t.o. at bound {bound}"),
    }
}

fn task_label(source: &str) -> String {
    Path::new(source)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| source.to_string())
}

fn cmd_solve(search: &SearchArgs, stats: &StatsArgs) -> Result<u8> {
    let task = load_task(&search.task)?;
    let options = search.options()?;
    let result = solve(&task, search.sem, &options);
    println!("{}", describe(&result.outcome));
    let row = bench::stats_row(&task_label(&search.task), "-", search.sem, &result);
    stats.emit(&[row], None)?;
    Ok(outcome_code(&result.outcome))
}

fn cmd_compare(search: &SearchArgs, plan: Option<&str>, stats: &StatsArgs) -> Result<u8> {
    let task = load_task(&search.task)?;
    if let Some(plan) = plan {
        let names = split_plan(plan);
        let k = replay(&task, &names, Semantics::Kripke).map_err(anyhow::Error::from)?;
        let d = replay(&task, &names, Semantics::Delphic).map_err(anyhow::Error::from)?;
        println!(
            "{:<5} {:<24} {:>14} {:>14}",
            "step", "action", "kripke", "delphic"
        );
        for (t, (ks, ds)) in k.states.iter().zip(&d.states).enumerate() {
            let action = if t == 0 { "(initial)" } else { names[t - 1] };
            println!(
                "{t:<5} {action:<24} {:>14} {:>14}",
                format!("{}/{}", ks.0, ks.1),
                format!("{}/{}", ds.0, ds.1)
            );
        }
        println!(
            "total nodes: kripke {} delphic {}",
            k.total_nodes, d.total_nodes
        );
        println!(
            "node ratio: {:.4}",
            d.total_nodes as f64 / k.total_nodes.max(1) as f64
        );
        println!(
            "goal reached: kripke {} delphic {}",
            k.goal_reached, d.goal_reached
        );
        return Ok(if k.goal_reached && d.goal_reached {
            EXIT_PLAN
        } else {
            EXIT_NO_PLAN
        });
    }
    let options = search.options()?;
    let label = task_label(&search.task);
    let results: Vec<_> = Semantics::ALL
        .iter()
        .map(|&s| (s, solve(&task, s, &options)))
        .collect();
    let rows: Vec<StatsRow> = results
        .iter()
        .map(|(s, r)| bench::stats_row(&label, "-", *s, r))
        .collect();
    for (s, r) in &results {
        println!("{s}: {}", describe(&r.outcome));
    }
    stats.emit(&rows, Some(StatsFormat::Table))?;
    let nodes = |s: Semantics| {
        results
            .iter()
            .find(|r| r.0 == s)
            .expect("both ran")
            .1
            .stats
            .total_nodes
    };
    println!(
        "node ratio: {:.4}",
        nodes(Semantics::Delphic) as f64 / nodes(Semantics::Kripke).max(1) as f64
    );
    Ok(results
        .iter()
        .map(|(_, r)| outcome_code(&r.outcome))
        .max()
        .unwrap_or(EXIT_PLAN))
}

fn cmd_verify(args: &VerifyArgs) -> Result<u8> {
    if let Some(oracle) = args.oracle {
        let which: &[Oracle] = match oracle {
            Oracle::All => &[Oracle::Truth, Oracle::Update, Oracle::Identity],
            Oracle::Truth => &[Oracle::Truth],
            Oracle::Update => &[Oracle::Update],
            Oracle::Identity => &[Oracle::Identity],
        };
        let mut ok = true;
        for o in which {
            let (name, report) = match o {
                Oracle::Truth => (
                    "truth",
                    equivalence::check_truth_equiv(args.seed, args.trials),
                ),
                Oracle::Update => (
                    "update",
                    equivalence::check_update_equiv(args.seed, args.trials),
                ),
                _ => (
                    "identity",
                    equivalence::check_solution_identity(args.seed, args.trials),
                ),
            };
            ok &= report.passed();
            println!(
                "{}",
                serde_json::json!({ "oracle": name, "report": report })
            );
        }
        return Ok(if ok { EXIT_PLAN } else { EXIT_NO_PLAN });
    }
    let source = args.task.as_deref().expect("clap requires a task here");
    let task = load_task(source)?;
    if let Some(plan) = &args.plan {
        let names = split_plan(plan);
        let sems: Vec<Semantics> = match args.sem {
            Some(s) => vec![s],
            None => Semantics::ALL.to_vec(),
        };
        let mut ok = true;
        for s in sems {
            match validate_plan(&task, &names, s) {
                Ok(true) => println!("{s}: valid"),
                Ok(false) => {
                    ok = false;
                    println!("{s}: goal not reached");
                }
                Err(e @ StepError::UnknownAction(_)) => return Err(e.into()),
                Err(e) => {
                    ok = false;
                    println!("{s}: {e}");
                }
            }
        }
        return Ok(if ok { EXIT_PLAN } else { EXIT_NO_PLAN });
    }
    let timeout = args.timeout.map(Duration::from_secs_f64);
    let report = equivalence::check_plan_equiv(&task, args.max_bound, timeout);
    println!(
        "{}",
        serde_json::to_string_pretty(&report).map_err(anyhow::Error::from)?
    );
    Ok(match report.verdict {
        Verdict::Agree => EXIT_PLAN,
        Verdict::Disagree => EXIT_NO_PLAN,
        Verdict::Inconclusive => EXIT_TIMEOUT,
    })
}

fn cmd_gen(args: &GenArgs) -> Result<u8> {
    let text = if args.random {
        taskio::write_task(&equivalence::random_task(args.seed)).map_err(anyhow::Error::from)?
    } else {
        let domain = args.domain.expect("clap requires a domain here");
        let base = DomainParams::new(domain);
        let p = DomainParams {
            agents: args.agents.unwrap_or(base.agents),
            rooms: args.rooms.unwrap_or(base.rooms),
            boxes: args.boxes.unwrap_or(base.boxes),
            depth: args.depth.unwrap_or(base.depth),
            goal: args.goal,
            ..base
        };
        domains::generate(&p).map_err(anyhow::Error::from)?
    };
    match &args.out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(EXIT_PLAN)
}

fn cmd_viz(search: &SearchArgs, plan: Option<&str>, dir: &Path) -> Result<u8> {
    let task = load_task(&search.task)?;
    let owned;
    let names: Vec<&str> = match plan {
        Some(p) => split_plan(p),
        None => {
            let result = solve(&task, search.sem, &search.options()?);
            match result.outcome {
                SolveOutcome::Plan(p) => {
                    owned = p;
                    owned.names()
                }
                other => {
                    println!("{}", describe(&other));
                    return Ok(outcome_code(&other));
                }
            }
        }
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let write = |name: String, text: String| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    };
    let goal_reached = match search.sem {
        Semantics::Kripke => {
            let (states, goal) = trace_kripke(&task, &names).map_err(anyhow::Error::from)?;
            for (t, s) in states.iter().enumerate() {
                write(
                    format!("state_{t:02}.dot"),
                    dot::kripke_state(&task.vocab, s, t),
                )?;
            }
            println!("wrote {} states to {}", states.len(), dir.display());
            goal
        }
        Semantics::Delphic => {
            let trace = trace_delphic(&task, &names).map_err(anyhow::Error::from)?;
            for (t, s) in trace.states.iter().enumerate() {
                write(
                    format!("state_{t:02}.dot"),
                    dot::possibility_state(&task.vocab, &trace.store, s, t),
                )?;
            }
            write(
                "trace.dot".into(),
                dot::possibility_trace(&task.vocab, &trace.store, &trace.states),
            )?;
            println!(
                "wrote {} states and trace.dot to {}",
                trace.states.len(),
                dir.display()
            );
            trace.goal_reached
        }
    };
    if !goal_reached {
        println!("goal does not hold after the plan");
    }
    Ok(EXIT_PLAN)
}

fn cmd_bench(config: &Path, stats: &StatsArgs) -> Result<u8> {
    let text =
        fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let cfg = bench::BenchConfig::parse(&text)?;
    let runs = cfg.runs(|msg| eprintln!("warning: {msg}"))?;
    let rows = bench::run_all(&cfg, &runs);
    stats.emit(&rows, Some(StatsFormat::Table))?;
    Ok(EXIT_PLAN)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                EXIT_INPUT
            } else {
                EXIT_PLAN
            });
        }
    };
    let result = match &cli.command {
        Command::Solve { search, stats } => cmd_solve(search, stats),
        Command::Compare {
            search,
            plan,
            stats,
        } => cmd_compare(search, plan.as_deref(), stats),
        Command::Verify(args) => cmd_verify(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Viz {
            search,
            plan,
            dot_out,
        } => cmd_viz(search, plan.as_deref(), dot_out),
        Command::Bench { config, stats } => cmd_bench(config, stats),
    };
    let _ = std::io::stdout().flush();
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
