//! Benchmark protocol: success-rate curves over log-spaced budgets,
//! ttp95 / l95 / l_conv estimates, efficiency gains relative to global
//! planning, replanning reuse and parallel speedup.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::ClockKind;
use crate::decompose::share;
use crate::envgen::{EnvGenError, Scenario};
use crate::pipeline::{
    leg_seed, prepare, replan, run, setup, Endpoint, Environment, Mode, PipelineError, Query, SolutionCache,
};
use crate::planners::{plan_anytime, PlannerConfig, PlannerKind, Workspace};
use crate::rng::derive_seed;
use crate::semantic::SemanticError;
use crate::Scalar;

/// Success rate that defines ttp95.
pub const TARGET_RATE: f64 = 0.95;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    EnvGen(#[from] EnvGenError),
    #[error("bad sweep parameters: {0}")]
    Params(String),
    #[error("efficiency needs ablation I with a finite ttp95")]
    NoBaseline,
    #[error("unknown query `{0}` in blockage")]
    UnknownQuery(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// `n` budgets spaced evenly in log10 between `min` and `max` inclusive.
pub fn log_space(min: f64, max: f64, n: usize) -> Vec<f64> {
    let (a, b) = (min.log10(), max.log10());
    (0..n)
        .map(|k| match k {
            0 => min,
            k if k + 1 == n => max,
            k => 10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    /// Budget in seconds.
    pub ttp: f64,
    pub success_rate: f64,
    /// Median length of the successful trials.
    pub median_length: Option<f64>,
    pub min_length: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessCurve {
    pub samples: Vec<CurveSample>,
    pub trials: usize,
}

fn median(v: &mut [f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    pub ttp_min: f64,
    pub ttp_max: f64,
    pub points: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self { ttp_min: 0.001, ttp_max: 6.0, points: 12, trials: 30, seed: 1 }
    }
}

impl SweepParams {
    fn check(&self) -> Result<(), BenchError> {
        if !(0.0 < self.ttp_min && self.ttp_min < self.ttp_max) {
            return Err(BenchError::Params("need 0 < ttp_min < ttp_max".into()));
        }
        if self.points < 2 || self.trials < 1 {
            return Err(BenchError::Params("need at least 2 points and 1 trial".into()));
        }
        Ok(())
    }
}

/// Seed of one trial. Independent of ablation and planner, so all variants
/// of a query see common random numbers.
pub fn trial_seed(master: u64, trial: usize) -> u64 {
    derive_seed(master, trial as u64)
}

/// Success-rate curve of one query under one ablation and planner.
///
/// Each trial runs every leg once up to its share of `ttp_max` and reads the
/// intermediate budgets off checkpoints; with the virtual clock this is
/// identical to a separate [`run`] per budget with a fresh cache.
pub fn sweep(
    env: &Environment,
    start: &Endpoint,
    goal: &Endpoint,
    mode: Mode,
    planner: &PlannerConfig,
    p: &SweepParams,
) -> Result<SuccessCurve, BenchError> {
    p.check()?;
    let ttps = log_space(p.ttp_min, p.ttp_max, p.points);
    let q = Query {
        start: start.clone(),
        goal: goal.clone(),
        ttp: p.ttp_max,
        mode,
        planner: planner.clone(),
        seed: 0,
        workers: 1,
    };
    let prepared = prepare(env, &q)?;
    let subs = &prepared.subproblems;
    let total: f64 = subs.iter().map(|s| s.effort).sum();
    let checkpoints: Vec<Vec<f64>> =
        subs.iter().map(|s| ttps.iter().map(|&t| share(t, s.effort, total, subs.len())).collect()).collect();

    let mut lengths: Vec<Vec<f64>> = vec![Vec::new(); ttps.len()];
    for trial in 0..p.trials {
        let seed = trial_seed(p.seed, trial);
        let mut ok = vec![true; ttps.len()];
        let mut len = vec![0.0; ttps.len()];
        for (i, sub) in subs.iter().enumerate() {
            let mut cfg = planner.clone().with_budget(sub.budget).with_seed(leg_seed(seed, i));
            cfg.robot_radius = env.config.robot_radius;
            let ws = Workspace { df: &env.df, mask: &sub.contour.mask };
            let outs = plan_anytime(sub.start, sub.goal, ws, &cfg, &checkpoints[i]).map_err(PipelineError::from)?;
            for (j, out) in outs.iter().enumerate() {
                match out.length() {
                    Some(l) => len[j] += l,
                    None => ok[j] = false,
                }
            }
        }
        for j in 0..ttps.len() {
            if ok[j] {
                lengths[j].push(len[j]);
            }
        }
    }
    let samples = ttps
        .iter()
        .zip(lengths.iter_mut())
        .map(|(&ttp, ls)| CurveSample {
            ttp,
            success_rate: ls.len() as f64 / p.trials as f64,
            min_length: ls.iter().copied().min_by(f64::total_cmp),
            median_length: median(ls),
        })
        .collect();
    Ok(SuccessCurve { samples, trials: p.trials })
}

/// ttp95 estimate: a budget, or a marker that the target rate was not
/// reached within the sampled range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ttp95<T> {
    At(T),
    AboveMax(T),
}

impl<T: Scalar> Ttp95<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            Ttp95::At(t) => Some(t),
            Ttp95::AboveMax(_) => None,
        }
    }

    /// Milliseconds with two decimals, or `> max` for the marker.
    pub fn to_ms_string(self) -> String {
        match self {
            Ttp95::At(t) => format!("{:.2}", t.to_f64_lossy() * 1e3),
            Ttp95::AboveMax(t) => format!("> {:.2}", t.to_f64_lossy() * 1e3),
        }
    }
}

/// Smallest budget at which the success rate, linearly interpolated in
/// log10(ttp) between samples, first reaches 95%. Raw rates are used as
/// given, without smoothing.
pub fn ttp95<T: Scalar>(samples: &[(T, T)]) -> Ttp95<T> {
    let target = T::lit(TARGET_RATE);
    let Some(k) = samples.iter().position(|&(_, r)| r >= target) else {
        return Ttp95::AboveMax(samples.last().map_or(T::zero(), |s| s.0));
    };
    if k == 0 {
        return Ttp95::At(samples[0].0);
    }
    let ((t0, r0), (t1, r1)) = (samples[k - 1], samples[k]);
    let (x0, x1) = (t0.log10(), t1.log10());
    let x = x0 + (target - r0) / (r1 - r0) * (x1 - x0);
    Ttp95::At(T::lit(10.0).powf(x))
}

impl SuccessCurve {
    pub fn ttp95(&self) -> Ttp95<f64> {
        ttp95(&self.samples.iter().map(|s| (s.ttp, s.success_rate)).collect::<Vec<_>>())
    }

    /// Median successful length at the first sample at or above ttp95.
    pub fn l95(&self) -> Option<f64> {
        let t = self.ttp95().finite()?;
        self.samples.iter().find(|s| s.ttp >= t * (1.0 - 1e-12))?.median_length
    }

    /// Shortest length observed at the largest budget.
    pub fn l_conv(&self) -> Option<f64> {
        self.samples.last()?.min_length
    }
}

/// Per-ablation inputs of the efficiency table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyInput<T> {
    pub ablation: String,
    pub ttp95: Ttp95<T>,
    pub l95: Option<T>,
    pub l_conv: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyRow<T> {
    pub ablation: String,
    pub ttp95: Ttp95<T>,
    pub l95: Option<T>,
    pub l_conv: Option<T>,
    pub eta_ttp: Option<T>,
    pub eta_l: Option<T>,
    pub eta: Option<T>,
    pub eta_bar: Option<T>,
}

/// Time, length and combined efficiency of each ablation relative to the
/// one labelled `I`. Rows whose ttp95 is the above-range marker carry no
/// ratios.
pub fn efficiency<T: Scalar>(rows: &[EfficiencyInput<T>]) -> Result<Vec<EfficiencyRow<T>>, BenchError> {
    let base = rows.iter().find(|r| r.ablation == Mode::Baseline.label()).ok_or(BenchError::NoBaseline)?;
    let base_ttp = base.ttp95.finite().ok_or(BenchError::NoBaseline)?;
    let eta_of = |r: &EfficiencyInput<T>| -> (Option<T>, Option<T>, Option<T>) {
        let eta_ttp = r.ttp95.finite().map(|t| base_ttp / t);
        let eta_l = r.l_conv.zip(r.l95).map(|(c, l)| c / l);
        (eta_ttp, eta_l, eta_l.zip(eta_ttp).map(|(l, t)| l * t))
    };
    let eta_base = eta_of(base).2;
    Ok(rows
        .iter()
        .map(|r| {
            let (eta_ttp, eta_l, eta) = eta_of(r);
            EfficiencyRow {
                ablation: r.ablation.clone(),
                ttp95: r.ttp95,
                l95: r.l95,
                l_conv: r.l_conv,
                eta_ttp,
                eta_l,
                eta,
                eta_bar: eta.zip(eta_base).map(|(e, b)| e / b),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedupRow {
    pub query: String,
    pub subproblems: usize,
    pub sequential_wall: f64,
    pub parallel_wall: f64,
    pub speedup: f64,
}

/// Wall time of S-Path(s) over S-Path for each query, with wall-clock
/// budgets, identical seeds and fresh caches.
pub fn speedup(
    env: &Environment,
    queries: &[(String, Endpoint, Endpoint)],
    ttp: f64,
    planner: PlannerKind,
    workers: usize,
    seed: u64,
) -> Result<Vec<SpeedupRow>, BenchError> {
    if workers < 2 {
        return Err(BenchError::Params("speedup needs at least 2 workers".into()));
    }
    let mut rows = Vec::with_capacity(queries.len());
    for (name, s, g) in queries {
        let mut q =
            Query::new(s.clone(), g.clone(), ttp, Mode::SpathSeq, planner).with_seed(seed).with_workers(workers);
        q.planner.clock = ClockKind::Wall;
        let seq = run(env, &q, &SolutionCache::new())?;
        let par = run(env, &q.clone().with_mode(Mode::SpathPar), &SolutionCache::new())?;
        rows.push(SpeedupRow {
            query: name.clone(),
            subproblems: seq.legs.len(),
            sequential_wall: seq.wall_time,
            parallel_wall: par.wall_time,
            speedup: seq.wall_time / par.wall_time,
        });
    }
    Ok(rows)
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub sweep: SweepParams,
    pub planners: Vec<PlannerKind>,
    pub ablations: Vec<Mode>,
    /// Budget of the single plans used for replanning and speedup.
    pub fixed_ttp: f64,
    /// Worker count for speedup measurements; none skips them.
    pub speedup_workers: Option<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sweep: SweepParams::default(),
            planners: vec![PlannerKind::RrtStar, PlannerKind::PrmStar, PlannerKind::BitStar],
            ablations: vec![Mode::Baseline, Mode::Restricted, Mode::SpathSeq],
            fixed_ttp: 1.0,
            speedup_workers: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveReport {
    pub query: String,
    pub planner: PlannerKind,
    pub ablation: String,
    pub curve: SuccessCurve,
    pub ttp95: Ttp95<f64>,
    pub l95: Option<f64>,
    pub l_conv: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyTable {
    pub query: String,
    pub planner: PlannerKind,
    pub rows: Vec<EfficiencyRow<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplanReport {
    pub query: String,
    pub doorway: String,
    pub planner: PlannerKind,
    pub initial_success: bool,
    pub replan_success: bool,
    pub initial_cpu: f64,
    pub replan_cpu: f64,
    pub cache_hits: usize,
    pub planner_invocations: usize,
    pub rerun_cache_hits: usize,
    pub rerun_legs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: String,
    pub config: BenchConfig,
    pub interpolation: String,
    pub l95_rule: String,
    pub curves: Vec<CurveReport>,
    pub efficiency: Vec<EfficiencyTable>,
    pub replans: Vec<ReplanReport>,
}

/// Wall-clock measurements, kept apart from the reproducible report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub speedup: Vec<SpeedupRow>,
    pub bench_wall_seconds: f64,
}

/// Runs the whole protocol on a scenario. `base` resolves relative
/// environment paths.
pub fn run_scenario(sc: &Scenario, base: &Path, cfg: &BenchConfig) -> Result<(Report, Timing), BenchError> {
    let started = std::time::Instant::now();
    let (sg, grid) = sc.environment(base)?;
    let env = setup(sg, grid)?;
    let parse = |s: &str| s.parse::<Endpoint>().map_err(BenchError::Params);
    let queries: Vec<(String, Endpoint, Endpoint)> = sc
        .queries
        .iter()
        .map(|q| Ok((q.name.clone(), parse(&q.start)?, parse(&q.goal)?)))
        .collect::<Result<_, BenchError>>()?;

    let mut curves = Vec::new();
    let mut efficiency_tables = Vec::new();
    for (qi, (name, s, g)) in queries.iter().enumerate() {
        for &planner in &cfg.planners {
            let pcfg = PlannerConfig::new(planner);
            let params = SweepParams { seed: derive_seed(cfg.sweep.seed, qi as u64), ..cfg.sweep.clone() };
            let mut inputs = Vec::new();
            for &mode in &cfg.ablations {
                let curve = sweep(&env, s, g, mode, &pcfg, &params)?;
                let (t, l95, lc) = (curve.ttp95(), curve.l95(), curve.l_conv());
                inputs.push(EfficiencyInput { ablation: mode.label().to_string(), ttp95: t, l95, l_conv: lc });
                curves.push(CurveReport {
                    query: name.clone(),
                    planner,
                    ablation: mode.label().to_string(),
                    curve,
                    ttp95: t,
                    l95,
                    l_conv: lc,
                });
            }
            if let Ok(rows) = efficiency(&inputs) {
                efficiency_tables.push(EfficiencyTable { query: name.clone(), planner, rows });
            }
        }
    }

    let mut replans = Vec::new();
    for b in &sc.blockages {
        let (qi, (_, s, g)) = queries
            .iter()
            .enumerate()
            .find(|(_, q)| q.0 == b.query)
            .ok_or_else(|| BenchError::UnknownQuery(b.query.clone()))?;
        for &planner in &cfg.planners {
            let q = Query::new(s.clone(), g.clone(), cfg.fixed_ttp, Mode::SpathSeq, planner)
                .with_seed(derive_seed(cfg.sweep.seed, qi as u64));
            let cache = SolutionCache::new();
            let first = run(&env, &q, &cache)?;
            let (env2, second) = match replan(&env, &b.doorway, &first, &cache) {
                Ok(r) => r,
                Err(PipelineError::Semantic(SemanticError::Unreachable(..))) => {
                    replans.push(ReplanReport {
                        query: b.query.clone(),
                        doorway: b.doorway.clone(),
                        planner,
                        initial_success: first.success,
                        replan_success: false,
                        initial_cpu: first.cpu_time,
                        replan_cpu: 0.0,
                        cache_hits: 0,
                        planner_invocations: 0,
                        rerun_cache_hits: 0,
                        rerun_legs: 0,
                    });
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            let rerun = run(&env2, &second.query, &cache)?;
            replans.push(ReplanReport {
                query: b.query.clone(),
                doorway: b.doorway.clone(),
                planner,
                initial_success: first.success,
                replan_success: second.success,
                initial_cpu: first.cpu_time,
                replan_cpu: second.cpu_time,
                cache_hits: second.cache_hits,
                planner_invocations: second.planner_invocations,
                rerun_cache_hits: rerun.cache_hits,
                rerun_legs: rerun.legs.len(),
            });
        }
    }

    let speedup_rows = match cfg.speedup_workers {
        Some(w) => speedup(&env, &queries, cfg.fixed_ttp, PlannerKind::PrmStar, w, cfg.sweep.seed)?,
        None => Vec::new(),
    };
    let report = Report {
        scenario: sc.name.clone(),
        config: cfg.clone(),
        interpolation: "linear in log10(ttp) on raw success rates".into(),
        l95_rule: "median successful length at the first sample with ttp >= ttp95; l_conv = minimum length at ttp_max"
            .into(),
        curves,
        efficiency: efficiency_tables,
        replans,
    };
    let timing = Timing { speedup: speedup_rows, bench_wall_seconds: started.elapsed().as_secs_f64() };
    Ok((report, timing))
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"))
}

fn file_stem(parts: &[&str]) -> String {
    parts.join("_").chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '-' }).collect()
}

/// Curve as `ttp_ms,success_rate,median_length_m` CSV.
pub fn curve_csv(c: &SuccessCurve) -> String {
    let mut s = String::from("ttp_ms,success_rate,median_length_m\n");
    for p in &c.samples {
        let _ = writeln!(s, "{:.6},{:.6},{}", p.ttp * 1e3, p.success_rate, opt(p.median_length));
    }
    s
}

pub fn efficiency_csv(tables: &[EfficiencyTable]) -> String {
    let mut s = String::from("query,planner,ablation,ttp95_ms,l95_m,l_conv_m,eta_ttp,eta_l,eta,eta_bar\n");
    for t in tables {
        for r in &t.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                t.query,
                t.planner.name(),
                r.ablation,
                r.ttp95.to_ms_string(),
                opt(r.l95),
                opt(r.l_conv),
                opt(r.eta_ttp),
                opt(r.eta_l),
                opt(r.eta),
                opt(r.eta_bar)
            );
        }
    }
    s
}

/// Writes `report.json`, `timing.json`, `efficiency.csv` and one CSV per
/// curve under `curves/`.
pub fn write_report(dir: &Path, report: &Report, timing: &Timing) -> Result<(), BenchError> {
    let io = |p: &Path| {
        let path = p.display().to_string();
        move |source| BenchError::Io { path, source }
    };
    let curves_dir = dir.join("curves");
    fs::create_dir_all(&curves_dir).map_err(io(&curves_dir))?;
    let mut files: BTreeMap<std::path::PathBuf, Vec<u8>> = BTreeMap::new();
    files.insert(dir.join("report.json"), serde_json::to_vec_pretty(report).expect("report serializes"));
    files.insert(dir.join("timing.json"), serde_json::to_vec_pretty(timing).expect("timing serializes"));
    files.insert(dir.join("efficiency.csv"), efficiency_csv(&report.efficiency).into_bytes());
    for c in &report.curves {
        let name = format!("{}.csv", file_stem(&[&c.query, c.planner.name(), &c.ablation]));
        files.insert(curves_dir.join(name), curve_csv(&c.curve).into_bytes());
    }
    for (path, bytes) in files {
        fs::write(&path, bytes).map_err(io(&path))?;
    }
    Ok(())
}
