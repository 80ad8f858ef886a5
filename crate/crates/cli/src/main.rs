use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use spath::bench::{run_scenario, write_report, BenchConfig};
use spath::clock::ClockKind;
use spath::envgen::{connectivity_check, generate, read_env_dir, write_env_dir, FloorSpec, Scenario};
use spath::pipeline::{replan, run, setup, Endpoint, Environment, Mode, PlanResult, Query, SolutionCache};
use spath::planners::PlannerKind;

#[derive(Parser)]
#[command(name = "spath", version, about = "Scene-graph guided path planning and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClockArg {
    Virtual,
    Wall,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic office floor into an environment directory.
    GenEnv {
        /// Floor spec JSON; omitted fields take their defaults.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Plan one query.
    Plan {
        #[arg(long)]
        env: PathBuf,
        /// `x,y` or a room id.
        #[arg(long)]
        start: String,
        #[arg(long)]
        goal: String,
        #[arg(long, default_value = "spath-par")]
        mode: Mode,
        #[arg(long, default_value = "bitstar")]
        planner: PlannerKind,
        /// Total planning budget in milliseconds.
        #[arg(long, default_value_t = 1000.0)]
        ttp: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, value_enum, default_value = "virtual")]
        clock: ClockArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replan a stored result after a doorway turns out to be closed.
    Replan {
        #[arg(long)]
        result: PathBuf,
        #[arg(long)]
        block: String,
        /// Defaults to overwriting `--result`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the benchmark protocol on a scenario file.
    Bench {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Measure parallel speedup with this many workers.
        #[arg(long)]
        speedup_workers: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// A plan result together with the environment state it was computed in.
#[derive(Serialize, Deserialize)]
struct ResultFile {
    env: PathBuf,
    #[serde(default)]
    blocked: Vec<String>,
    #[serde(default)]
    reused: Vec<(String, String)>,
    result: PlanResult,
}

impl ResultFile {
    fn environment(&self) -> Result<Environment> {
        let mut env = load_env(&self.env)?;
        for d in &self.blocked {
            env = env.with_doorway_state(d, false)?;
        }
        Ok(env.with_reuse(self.reused.clone()))
    }
}

fn load_env(dir: &Path) -> Result<Environment> {
    let (sg, grid) = read_env_dir(dir).with_context(|| format!("loading environment {}", dir.display()))?;
    Ok(setup(sg, grid)?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn summarize(r: &PlanResult) {
    match r.length() {
        Some(l) if r.success => {
            println!("success: length {l:.3} m, {} waypoints", r.path.as_ref().map_or(0, |p| p.waypoints.len()))
        }
        _ => println!("no solution"),
    }
    println!("legs {} (cache hits {}), cpu {:.3} s, wall {:.3} s", r.legs.len(), r.cache_hits, r.cpu_time, r.wall_time);
    for line in &r.instructions {
        println!("  {line}");
    }
}

fn gen_env(spec: Option<PathBuf>, seed: Option<u64>, out: PathBuf) -> Result<()> {
    let mut fs_spec = match spec {
        Some(p) => {
            let bytes = fs::read(&p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_slice::<FloorSpec>(&bytes).with_context(|| format!("parsing {}", p.display()))?
        }
        None => FloorSpec::default(),
    };
    if let Some(s) = seed {
        fs_spec.seed = s;
    }
    let (sg, grid) = generate(&fs_spec)?;
    let report = connectivity_check(&sg, &grid, fs_spec.robot_radius);
    if !report.is_clean() {
        bail!("generated floor failed its connectivity check: {report:?}");
    }
    write_env_dir(&out, &sg, &grid)?;
    println!(
        "{} rooms, {} doorways, {}x{} cells -> {}",
        sg.rooms.len(),
        sg.doorways.len(),
        grid.width,
        grid.height,
        out.display()
    );
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::GenEnv { spec, seed, out } => gen_env(spec, seed, out),
        Command::Plan { env, start, goal, mode, planner, ttp, seed, threads, clock, out } => {
            let environment = load_env(&env)?;
            let start: Endpoint = start.parse().map_err(anyhow::Error::msg)?;
            let goal: Endpoint = goal.parse().map_err(anyhow::Error::msg)?;
            if !(ttp > 0.0) {
                bail!("--ttp must be positive");
            }
            let mut q = Query::new(start, goal, ttp / 1e3, mode, planner).with_seed(seed);
            if let Some(t) = threads {
                q = q.with_workers(t.max(1));
            }
            q.planner = q.planner.with_clock(match clock {
                ClockArg::Virtual => ClockKind::Virtual,
                ClockArg::Wall => ClockKind::Wall,
            });
            let result = run(&environment, &q, &SolutionCache::new())?;
            summarize(&result);
            if let Some(out) = out {
                let env = fs::canonicalize(&env).unwrap_or(env);
                write_json(&out, &ResultFile { env, blocked: Vec::new(), reused: Vec::new(), result })?;
            }
            Ok(())
        }
        Command::Replan { result, block, out } => {
            let bytes = fs::read(&result).with_context(|| format!("reading {}", result.display()))?;
            let prev: ResultFile =
                serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", result.display()))?;
            let env = prev.environment()?;
            let cache = SolutionCache::from_result(&prev.result);
            let (env2, next) = replan(&env, &block, &prev.result, &cache)?;
            summarize(&next);
            let mut blocked = prev.blocked.clone();
            blocked.push(block);
            let file = ResultFile { env: prev.env, blocked, reused: env2.reused.clone(), result: next };
            write_json(out.as_deref().unwrap_or(&result), &file)
        }
        Command::Bench { scenario, trials, points, seed, speedup_workers, out } => {
            let sc = Scenario::load(&scenario)?;
            let mut cfg = BenchConfig::default();
            if let Some(t) = trials {
                cfg.sweep.trials = t;
            }
            if let Some(p) = points {
                cfg.sweep.points = p;
            }
            if let Some(s) = seed {
                cfg.sweep.seed = s;
            }
            cfg.speedup_workers = speedup_workers;
            let base = scenario.parent().unwrap_or(Path::new("."));
            let (report, timing) = run_scenario(&sc, base, &cfg)?;
            write_report(&out, &report, &timing)?;
            for t in &report.efficiency {
                println!("{} / {}:", t.query, t.planner.name());
                for r in &t.rows {
                    let bar = r.eta_bar.map_or("n/a".to_string(), |v| format!("{v:.2}"));
                    println!("  {:<10} ttp95 {} ms  eta_bar {bar}", r.ablation, r.ttp95.to_ms_string());
                }
            }
            println!("report written to {}", out.display());
            Ok(())
        }
    }
}
