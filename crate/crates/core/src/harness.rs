//! Subcommand drivers, report envelopes and golden comparisons.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloring::{
    balance_repair, cut_size, miscolored_fraction, run_schedule, ColoringAssignment, ColoringError, LocalRun, Perception,
    SeedTable,
};
use crate::config::{ConfigError, ExperimentConfig};
use crate::graph::{count_cycles, fixtures, poisson_mean, sample_regular_graph, treelike_fraction, Graph, GraphError, SampleMeta};
use crate::partition::{check_internal, exhaustive_internal_partition, internal_search, Partition, PartitionError};
use crate::recolor::{recolor, Direction, RecolorError, RecolorReport};
use crate::rng::{self, Purpose, GENERATOR_ID};
use crate::tree::io::{ScheduleError, ScheduleFile};
use crate::tree::{CutStatistics, Mode, TreeEngine, TreeError, TreeReport};
use crate::types::StepParams;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Coloring(#[from] ColoringError),
    #[error(transparent)]
    Recolor(#[from] RecolorError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("schedule is for d={schedule_d}, graph has d={graph_d}")]
    DegreeMismatch { schedule_d: usize, graph_d: usize },
    #[error("no reference values for 1/eps={inv_eps} in {mode} mode")]
    NoGolden { inv_eps: f64, mode: Mode },
    #[error("cannot write {path}: {reason}")]
    Output { path: PathBuf, reason: String },
}

/// One row of reference values for the d=5 tree run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Golden {
    pub inv_eps: f64,
    pub mode: Mode,
    pub cut_per_vertex: f64,
    pub miscolored_measure: f64,
    pub improved_cut_per_vertex: f64,
    pub tolerance: f64,
}

pub const GOLDEN: [Golden; 4] = [
    Golden {
        inv_eps: 1e3,
        mode: Mode::Exact,
        cut_per_vertex: 0.501778,
        miscolored_measure: 0.0199445,
        improved_cut_per_vertex: 0.501257,
        tolerance: 5e-6,
    },
    Golden {
        inv_eps: 1e4,
        mode: Mode::Exact,
        cut_per_vertex: 0.503125,
        miscolored_measure: 0.0190561,
        improved_cut_per_vertex: 0.497012,
        tolerance: 5e-6,
    },
    Golden {
        inv_eps: 5e4,
        mode: Mode::Exact,
        cut_per_vertex: 0.502832,
        miscolored_measure: 0.0187139,
        improved_cut_per_vertex: 0.496488,
        tolerance: 5e-6,
    },
    Golden {
        inv_eps: 5e4,
        mode: Mode::Simplified,
        cut_per_vertex: 0.502803,
        miscolored_measure: 0.018679,
        improved_cut_per_vertex: 0.496488,
        tolerance: 1e-4,
    },
];

/// Tolerance on the improved-cut column at 1/eps = 5e4.
pub const IMPROVED_TOLERANCE: f64 = 2e-4;

pub fn golden_for(d: usize, eps: f64, mode: Mode) -> Option<Golden> {
    if d != 5 {
        return None;
    }
    GOLDEN
        .iter()
        .copied()
        .find(|g| g.mode == mode && (g.inv_eps * eps - 1.0).abs() < 1e-9)
}

/// Outcome of one comparison in `--check` mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn within(name: &str, got: f64, expected: f64, tol: f64) -> Check {
        Check {
            name: name.to_string(),
            pass: (got - expected).abs() <= tol,
            detail: format!("got {got:.7}, expected {expected} +- {tol:e} (diff {:.2e})", got - expected),
        }
    }

    pub fn flag(name: &str, pass: bool, detail: String) -> Check {
        Check {
            name: name.to_string(),
            pass,
            detail,
        }
    }
}

/// Wall-clock data, kept apart so that the rest of a report is reproducible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub timestamp_unix: u64,
    pub elapsed_seconds: f64,
}

impl RunInfo {
    pub fn since(start: Instant) -> Self {
        RunInfo {
            timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            elapsed_seconds: start.elapsed().as_secs_f64(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report<T> {
    pub tool: String,
    pub version: String,
    pub generator: String,
    pub config: ExperimentConfig,
    pub schedule_sha256: Option<String>,
    pub result: T,
    pub checks: Vec<Check>,
    pub run: RunInfo,
}

impl<T> Report<T> {
    pub fn new(config: &ExperimentConfig, schedule_sha256: Option<String>, result: T, start: Instant) -> Self {
        Report {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            generator: GENERATOR_ID.to_string(),
            config: config.clone(),
            schedule_sha256,
            result,
            checks: Vec::new(),
            run: RunInfo::since(start),
        }
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn output_error(path: &Path, reason: impl ToString) -> HarnessError {
    HarnessError::Output {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| output_error(dir, e))?;
    }
    let text = serde_json::to_string_pretty(value).map_err(|e| output_error(path, e))?;
    fs::write(path, text + "\n").map_err(|e| output_error(path, e))
}

pub fn write_csv<R: Serialize>(path: &Path, rows: &[R]) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| output_error(dir, e))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| output_error(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| output_error(path, e))?;
    }
    w.flush().map_err(|e| output_error(path, e))
}

/// Seed of repetition `rep`.
pub fn repetition_seed(master: u64, rep: usize) -> u64 {
    rng::hash_key(master, Purpose::Repetition, rep as u64, 0)
}

// ---------------------------------------------------------------- tree

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeSummaryRow {
    pub d: usize,
    pub inv_eps: f64,
    pub mode: Mode,
    pub steps: usize,
    pub cut_per_vertex: f64,
    pub miscolored_measure: f64,
    pub eligible_measure: f64,
    pub improvement: Option<f64>,
    pub improved_cut_per_vertex: Option<f64>,
    pub completed_cut_per_vertex: f64,
    pub completed_miscolored_measure: f64,
}

impl From<&TreeReport> for TreeSummaryRow {
    fn from(r: &TreeReport) -> Self {
        TreeSummaryRow {
            d: r.d,
            inv_eps: 1.0 / r.eps,
            mode: r.mode,
            steps: r.steps_taken,
            cut_per_vertex: r.cut_per_vertex,
            miscolored_measure: r.miscolored_measure,
            eligible_measure: r.eligible_measure,
            improvement: r.improvement,
            improved_cut_per_vertex: r.improved_cut_per_vertex,
            completed_cut_per_vertex: r.completed.cut_per_vertex,
            completed_miscolored_measure: r.completed.miscolored_measure,
        }
    }
}

pub fn tree_engine(cfg: &ExperimentConfig) -> Result<TreeEngine, HarnessError> {
    Ok(TreeEngine::new(cfg.d, cfg.mode)?.with_prune_threshold(cfg.prune_threshold))
}

pub fn cmd_tree(cfg: &ExperimentConfig) -> Result<(TreeReport, ScheduleFile), HarnessError> {
    let report = tree_engine(cfg)?.run(cfg.eps)?;
    let schedule = ScheduleFile::new(cfg.d, cfg.eps, cfg.mode, &report.schedule);
    Ok((report, schedule))
}

/// Table comparisons for a d=5 tree report.
pub fn check_tree(r: &TreeReport) -> Result<Vec<Check>, HarnessError> {
    let g = golden_for(r.d, r.eps, r.mode).ok_or(HarnessError::NoGolden {
        inv_eps: 1.0 / r.eps,
        mode: r.mode,
    })?;
    let mut checks = vec![
        Check::within("cut_per_vertex", r.cut_per_vertex, g.cut_per_vertex, g.tolerance),
        Check::within("miscolored_measure", r.miscolored_measure, g.miscolored_measure, g.tolerance),
    ];
    if g.inv_eps == 5e4 {
        checks.push(Check::within(
            "improved_cut_per_vertex",
            r.improved_cut_per_vertex.unwrap_or(f64::NAN),
            g.improved_cut_per_vertex,
            IMPROVED_TOLERANCE,
        ));
    }
    Ok(checks)
}

// ---------------------------------------------------------------- schedules

/// A schedule to replay on graphs, with the tree values it predicts when it
/// was computed here rather than loaded.
#[derive(Clone, Debug)]
pub struct ScheduleSource {
    pub file: ScheduleFile,
    pub params: Vec<StepParams>,
    pub sha256: String,
    pub prediction: Option<TreePrediction>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreePrediction {
    /// Statistics after the fair-coin completion, which is what a finite
    /// graph run produces.
    pub completed: CutStatistics,
    pub improved_cut_per_vertex: Option<f64>,
}

pub fn load_or_build_schedule(cfg: &ExperimentConfig) -> Result<ScheduleSource, HarnessError> {
    let (file, prediction) = match &cfg.schedule {
        Some(path) => (ScheduleFile::read(path)?, None),
        None => {
            let (report, file) = cmd_tree(cfg)?;
            let prediction = TreePrediction {
                completed: report.completed,
                improved_cut_per_vertex: report.improved_cut_per_vertex,
            };
            (file, Some(prediction))
        }
    };
    if file.header.d != cfg.d {
        return Err(HarnessError::DegreeMismatch {
            schedule_d: file.header.d,
            graph_d: cfg.d,
        });
    }
    let params = file.params()?;
    let sha256 = file.sha256()?;
    Ok(ScheduleSource {
        file,
        params,
        sha256,
        prediction,
    })
}

// ---------------------------------------------------------------- graph

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphRun {
    pub rep: usize,
    pub seed: u64,
    pub sample: SampleMeta,
    pub n: usize,
    pub edges: usize,
    /// Vertices colored at each greedy step, then by the terminal coin.
    pub newly_colored: Vec<usize>,
    pub cut_phase1: usize,
    pub miscolored_fraction: f64,
    pub red_phase1: usize,
    pub blue_phase1: usize,
    pub repair_moves: usize,
    pub cut_repaired: usize,
    pub recolor: RecolorReport,
    pub cut_final: usize,
    pub red_final: usize,
    pub blue_final: usize,
    /// Every flip changed the cut by at most -1 and the total decrease is
    /// at least the number of flips.
    pub certificate_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphRunRow {
    pub rep: usize,
    pub seed: u64,
    pub n: usize,
    pub cut_phase1_per_vertex: f64,
    pub miscolored_fraction: f64,
    pub repair_moves: usize,
    pub cut_repaired_per_vertex: f64,
    pub swapped: usize,
    pub cut_final_per_vertex: f64,
    pub imbalance: usize,
    pub certificate_ok: bool,
}

impl From<&GraphRun> for GraphRunRow {
    fn from(r: &GraphRun) -> Self {
        let n = r.n as f64;
        GraphRunRow {
            rep: r.rep,
            seed: r.seed,
            n: r.n,
            cut_phase1_per_vertex: r.cut_phase1 as f64 / n,
            miscolored_fraction: r.miscolored_fraction,
            repair_moves: r.repair_moves,
            cut_repaired_per_vertex: r.cut_repaired as f64 / n,
            swapped: r.recolor.swapped,
            cut_final_per_vertex: r.cut_final as f64 / n,
            imbalance: r.red_final.abs_diff(r.blue_final),
            certificate_ok: r.certificate_ok,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphReport {
    pub schedule_steps: usize,
    pub prediction: Option<TreePrediction>,
    pub mean_cut_repaired_per_vertex: f64,
    pub mean_cut_final_per_vertex: f64,
    pub mean_miscolored_fraction: f64,
    pub runs: Vec<GraphRun>,
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (s, c) = xs.into_iter().fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    if c == 0 {
        0.0
    } else {
        s / c as f64
    }
}

fn sample(cfg: &ExperimentConfig, seed: u64) -> Result<(Graph, SampleMeta), HarnessError> {
    Ok(sample_regular_graph(cfg.n, cfg.d, seed, cfg.sample_mode)?)
}

/// One bisection repetition on a freshly sampled graph. Returns the run and
/// the final coloring.
pub fn graph_repetition(
    cfg: &ExperimentConfig,
    schedule: &[StepParams],
    rep: usize,
) -> Result<(GraphRun, Graph, ColoringAssignment), HarnessError> {
    let seed = repetition_seed(cfg.master_seed, rep);
    let (g, meta) = sample(cfg, seed)?;
    let seeds = SeedTable::new(seed);
    let run = LocalRun::new(&g, schedule, &seeds, Perception::Normal)?;
    let (coloring, newly_colored) = run.finish();
    let cut_phase1 = cut_size(&g, &coloring)?;
    let (red_phase1, blue_phase1, _) = coloring.class_sizes();
    let mis = miscolored_fraction(&g, &coloring);
    let (repaired, repair_moves) = balance_repair(&coloring, seed)?;
    let cut_repaired = cut_size(&g, &repaired)?;
    let (out, rec, deltas) = recolor(&g, &repaired, cfg.criterion, cfg.strategy, Direction::Minimize, seed)?;
    let cut_final = cut_size(&g, &out)?;
    let (red_final, blue_final, _) = out.class_sizes();
    let decrease = cut_repaired as i64 - cut_final as i64;
    let certificate_ok = deltas.iter().all(|&x| x <= -1)
        && decrease == -deltas.iter().sum::<i64>()
        && decrease >= deltas.len() as i64;
    let run = GraphRun {
        rep,
        seed,
        sample: meta,
        n: g.n(),
        edges: g.edge_count(),
        newly_colored,
        cut_phase1,
        miscolored_fraction: mis,
        red_phase1,
        blue_phase1,
        repair_moves,
        cut_repaired,
        recolor: rec,
        cut_final,
        red_final,
        blue_final,
        certificate_ok,
    };
    Ok((run, g, out))
}

pub fn cmd_graph(cfg: &ExperimentConfig, src: &ScheduleSource) -> Result<GraphReport, HarnessError> {
    let runs = (0..cfg.repetitions)
        .into_par_iter()
        .map(|rep| graph_repetition(cfg, &src.params, rep).map(|(r, _, _)| r))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GraphReport {
        schedule_steps: src.params.len(),
        prediction: src.prediction,
        mean_cut_repaired_per_vertex: mean(runs.iter().map(|r| r.cut_repaired as f64 / r.n as f64)),
        mean_cut_final_per_vertex: mean(runs.iter().map(|r| r.cut_final as f64 / r.n as f64)),
        mean_miscolored_fraction: mean(runs.iter().map(|r| r.miscolored_fraction)),
        runs,
    })
}

/// Tolerances for graph runs against the tree prediction.
pub const GRAPH_CUT_TOLERANCE: f64 = 0.01;
pub const GRAPH_MISCOLORED_TOLERANCE: f64 = 0.005;

pub fn check_graph(r: &GraphReport) -> Vec<Check> {
    let mut checks = vec![Check::flag(
        "swap_certificate",
        r.runs.iter().all(|x| x.certificate_ok),
        format!("{} runs", r.runs.len()),
    )];
    if let Some(p) = r.prediction {
        let worst_cut = r
            .runs
            .iter()
            .map(|x| (x.cut_repaired as f64 / x.n as f64 - p.completed.cut_per_vertex).abs())
            .fold(0.0, f64::max);
        let worst_mis = r
            .runs
            .iter()
            .map(|x| (x.miscolored_fraction - p.completed.miscolored_measure).abs())
            .fold(0.0, f64::max);
        checks.push(Check::flag(
            "cut_matches_tree",
            worst_cut <= GRAPH_CUT_TOLERANCE,
            format!("tree {:.5}, worst deviation {worst_cut:.5}", p.completed.cut_per_vertex),
        ));
        checks.push(Check::flag(
            "miscolored_matches_tree",
            worst_mis <= GRAPH_MISCOLORED_TOLERANCE,
            format!("tree {:.5}, worst deviation {worst_mis:.5}", p.completed.miscolored_measure),
        ));
    }
    checks
}

// ---------------------------------------------------------------- maxcut

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxcutRun {
    pub rep: usize,
    pub seed: u64,
    pub n: usize,
    pub edges: usize,
    pub cut_a: usize,
    pub cut_b_phase1: usize,
    pub recolor: RecolorReport,
    pub cut_b: usize,
    /// Every flip added at least one cut edge.
    pub certificate_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxcutRow {
    pub rep: usize,
    pub seed: u64,
    pub n: usize,
    pub cut_a_per_vertex: f64,
    pub cut_b_phase1_per_vertex: f64,
    pub swapped: usize,
    pub cut_b_per_vertex: f64,
    pub certificate_ok: bool,
}

impl From<&MaxcutRun> for MaxcutRow {
    fn from(r: &MaxcutRun) -> Self {
        let n = r.n as f64;
        MaxcutRow {
            rep: r.rep,
            seed: r.seed,
            n: r.n,
            cut_a_per_vertex: r.cut_a as f64 / n,
            cut_b_phase1_per_vertex: r.cut_b_phase1 as f64 / n,
            swapped: r.recolor.swapped,
            cut_b_per_vertex: r.cut_b as f64 / n,
            certificate_ok: r.certificate_ok,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxcutReport {
    pub schedule_steps: usize,
    pub mean_cut_a_per_vertex: f64,
    pub mean_cut_b_per_vertex: f64,
    pub runs: Vec<MaxcutRun>,
}

pub fn maxcut_repetition(cfg: &ExperimentConfig, schedule: &[StepParams], rep: usize) -> Result<MaxcutRun, HarnessError> {
    let seed = repetition_seed(cfg.master_seed, rep);
    let (g, _) = sample(cfg, seed)?;
    let seeds = SeedTable::new(seed);
    let normal = run_schedule(&g, schedule, &seeds, Perception::Normal)?;
    let blind = run_schedule(&g, schedule, &seeds, Perception::Colorblind)?;
    let cut_a = cut_size(&g, &normal)?;
    let cut_b_phase1 = cut_size(&g, &blind)?;
    let (out, rec, deltas) = recolor(&g, &blind, cfg.criterion, cfg.strategy, Direction::Maximize, seed)?;
    let cut_b = cut_size(&g, &out)?;
    let gain = cut_b as i64 - cut_b_phase1 as i64;
    let certificate_ok = deltas.iter().all(|&x| x >= 1) && gain == deltas.iter().sum::<i64>() && gain >= deltas.len() as i64;
    Ok(MaxcutRun {
        rep,
        seed,
        n: g.n(),
        edges: g.edge_count(),
        cut_a,
        cut_b_phase1,
        recolor: rec,
        cut_b,
        certificate_ok,
    })
}

pub fn cmd_maxcut(cfg: &ExperimentConfig, src: &ScheduleSource) -> Result<MaxcutReport, HarnessError> {
    let runs = (0..cfg.repetitions)
        .into_par_iter()
        .map(|rep| maxcut_repetition(cfg, &src.params, rep))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MaxcutReport {
        schedule_steps: src.params.len(),
        mean_cut_a_per_vertex: mean(runs.iter().map(|r| r.cut_a as f64 / r.n as f64)),
        mean_cut_b_per_vertex: mean(runs.iter().map(|r| r.cut_b as f64 / r.n as f64)),
        runs,
    })
}

pub const MAXCUT_FLOOR: f64 = 2.0;
pub const MAXCUT_SUCCESS_FRACTION: f64 = 0.9;

pub fn check_maxcut(r: &MaxcutReport) -> Vec<Check> {
    let above = r.runs.iter().filter(|x| x.cut_b as f64 / x.n as f64 >= MAXCUT_FLOOR).count();
    let need = (MAXCUT_SUCCESS_FRACTION * r.runs.len() as f64).ceil() as usize;
    vec![
        Check::flag(
            "cut_floor",
            above >= need,
            format!("{above} of {} runs reach cut/n >= {MAXCUT_FLOOR} (need {need})", r.runs.len()),
        ),
        Check::flag(
            "flip_certificate",
            r.runs.iter().all(|x| x.certificate_ok),
            format!("{} runs", r.runs.len()),
        ),
    ]
}

// ---------------------------------------------------------------- cycles

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleSample {
    pub rep: usize,
    pub seed: u64,
    pub counts: Vec<u64>,
    /// Fraction of vertices whose radius-2 ball is a tree.
    pub treelike_radius2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleStat {
    pub k: usize,
    pub mean: f64,
    pub std_error: f64,
    pub lambda: f64,
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CyclesReport {
    pub n: usize,
    pub d: usize,
    pub kmax: usize,
    pub stats: Vec<CycleStat>,
    pub samples: Vec<CycleSample>,
}

pub fn cmd_cycles(cfg: &ExperimentConfig) -> Result<CyclesReport, HarnessError> {
    let samples = (0..cfg.repetitions)
        .into_par_iter()
        .map(|rep| -> Result<CycleSample, HarnessError> {
            let seed = repetition_seed(cfg.master_seed, rep);
            let (g, _) = sample(cfg, seed)?;
            let census = count_cycles(&g, cfg.kmax)?;
            Ok(CycleSample {
                rep,
                seed,
                counts: (3..=cfg.kmax).map(|k| census.get(k)).collect(),
                treelike_radius2: treelike_fraction(&g, 2),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let m = samples.len() as f64;
    let stats = (3..=cfg.kmax)
        .map(|k| {
            let xs: Vec<f64> = samples.iter().map(|s| s.counts[k - 3] as f64).collect();
            let mu = mean(xs.iter().copied());
            let var = if xs.len() > 1 {
                xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (m - 1.0)
            } else {
                0.0
            };
            let std_error = (var / m).sqrt();
            let lambda = poisson_mean(cfg.d, k);
            CycleStat {
                k,
                mean: mu,
                std_error,
                lambda,
                z: if std_error > 0.0 { (mu - lambda) / std_error } else { 0.0 },
            }
        })
        .collect();
    Ok(CyclesReport {
        n: cfg.n,
        d: cfg.d,
        kmax: cfg.kmax,
        stats,
        samples,
    })
}

pub fn check_cycles(r: &CyclesReport) -> Vec<Check> {
    r.stats
        .iter()
        .filter(|s| s.k <= 4)
        .map(|s| {
            Check::flag(
                &format!("x{}_mean", s.k),
                s.z.abs() <= 3.0,
                format!("mean {:.4} +- {:.4}, lambda {:.4}, z {:.2}", s.mean, s.std_error, s.lambda, s.z),
            )
        })
        .collect()
}

// ---------------------------------------------------------------- internal

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixtureCertificate {
    pub name: String,
    pub expected_internal: bool,
    pub internal: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InternalRun {
    pub rep: usize,
    pub seed: u64,
    pub start_violations: usize,
    pub ok: bool,
    pub class_a: usize,
    pub class_b: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InternalReport {
    pub fixtures: Vec<FixtureCertificate>,
    pub success_rate: f64,
    pub runs: Vec<InternalRun>,
}

/// Certificates for the small fixtures: K4 and K3,3 have no internal
/// partition, the pair split of C4 is internal.
pub fn fixture_certificates() -> Result<Vec<FixtureCertificate>, HarnessError> {
    let k4 = exhaustive_internal_partition(&fixtures::complete(4))?.is_some();
    let k33 = exhaustive_internal_partition(&fixtures::complete_bipartite(3))?.is_some();
    let c4 = check_internal(&fixtures::cycle(4), &Partition::new(vec![true, true, false, false]))?.ok;
    let pet = exhaustive_internal_partition(&fixtures::petersen())?.is_some();
    Ok(vec![
        FixtureCertificate {
            name: "K4".into(),
            expected_internal: false,
            internal: k4,
        },
        FixtureCertificate {
            name: "K3,3".into(),
            expected_internal: false,
            internal: k33,
        },
        FixtureCertificate {
            name: "C4 pair split".into(),
            expected_internal: true,
            internal: c4,
        },
        FixtureCertificate {
            name: "Petersen".into(),
            expected_internal: true,
            internal: pet,
        },
    ])
}

pub fn cmd_internal(cfg: &ExperimentConfig, src: &ScheduleSource) -> Result<InternalReport, HarnessError> {
    let runs = (0..cfg.repetitions)
        .into_par_iter()
        .map(|rep| -> Result<InternalRun, HarnessError> {
            let (run, g, coloring) = graph_repetition(cfg, &src.params, rep)?;
            let start = Partition::from_coloring(&coloring)?;
            let start_violations = check_internal(&g, &start)?.violations.len();
            let found = internal_search(&g, &start, cfg.max_moves, run.seed)?;
            let (ok, class_a, class_b) = match &found {
                Some(p) => {
                    let c = check_internal(&g, p)?;
                    (c.ok, c.class_sizes.0, c.class_sizes.1)
                }
                None => (false, 0, 0),
            };
            Ok(InternalRun {
                rep,
                seed: run.seed,
                start_violations,
                ok,
                class_a,
                class_b,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let success_rate = runs.iter().filter(|r| r.ok).count() as f64 / runs.len().max(1) as f64;
    Ok(InternalReport {
        fixtures: fixture_certificates()?,
        success_rate,
        runs,
    })
}

pub fn check_internal_report(r: &InternalReport) -> Vec<Check> {
    r.fixtures
        .iter()
        .map(|f| {
            Check::flag(
                &format!("fixture {}", f.name),
                f.internal == f.expected_internal,
                format!("internal={} expected={}", f.internal, f.expected_internal),
            )
        })
        .collect()
}
