use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand as ClapSubcommand};

use regbisect::config::{Defaults, ExperimentConfig, Section, Subcommand};
use regbisect::graph::SampleMode;
use regbisect::harness::{self, Check, GraphRunRow, HarnessError, MaxcutRow, Report, TreeSummaryRow};
use regbisect::recolor::{Criterion, Strategy};
use regbisect::tree::Mode;

const EXIT_CONFIG: u8 = 2;
const EXIT_CHECK: u8 = 3;

#[derive(Parser)]
#[command(name = "regbisect", version, about = "Local bisection and max-cut algorithm for random regular graphs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(ClapSubcommand)]
enum Cmd {
    /// Evolve the tree measure, write the schedule and the cut statistics.
    Tree(Opts),
    /// Replay a schedule on random regular graphs and recolor (bisection).
    Graph(Opts),
    /// Colorblind replay for large cuts, coupled with the normal run.
    Maxcut(Opts),
    /// Short cycle counts of random regular graphs.
    Cycles(Opts),
    /// Search for internal partitions starting from the bisection.
    Internal(Opts),
}

#[derive(Args, Clone, Debug)]
struct Opts {
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    criterion: Option<Criterion>,
    #[arg(long)]
    strategy: Option<Strategy>,
    #[arg(long)]
    schedule: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "sample-mode")]
    sample_mode: Option<SampleMode>,
    #[arg(long)]
    kmax: Option<usize>,
    #[arg(long = "max-moves")]
    max_moves: Option<usize>,
    #[arg(long = "prune-threshold")]
    prune_threshold: Option<f64>,
    /// Defaults file replacing the built-in one.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Compare against reference values; exit with status 3 on a breach.
    #[arg(long)]
    check: bool,
}

impl Opts {
    fn section(&self) -> Section {
        Section {
            d: self.d,
            eps: self.eps,
            mode: self.mode,
            prune_threshold: self.prune_threshold,
            n: self.n,
            seed: self.seed,
            reps: self.reps,
            criterion: self.criterion,
            strategy: self.strategy,
            sample_mode: self.sample_mode,
            kmax: self.kmax,
            max_moves: self.max_moves,
            schedule: self.schedule.clone(),
            out: self.out.clone(),
        }
    }
}

fn print_checks(checks: &[Check]) {
    for c in checks {
        println!("check {:<28} {}  {}", c.name, if c.pass { "PASS" } else { "FAIL" }, c.detail);
    }
}

/// Returns whether all checks passed.
fn run(cmd: Subcommand, opts: &Opts) -> Result<bool, HarnessError> {
    let defaults = match &opts.config {
        Some(path) => Defaults::read(path)?,
        None => Defaults::builtin(),
    };
    let cfg = ExperimentConfig::resolve(cmd, &defaults, &opts.section())?;
    let start = Instant::now();
    let out = cfg.out.clone();
    match cmd {
        Subcommand::Tree => {
            let (tree, schedule) = harness::cmd_tree(&cfg)?;
            std::fs::create_dir_all(&out).map_err(|e| HarnessError::Output {
                path: out.clone(),
                reason: e.to_string(),
            })?;
            let sha = schedule.sha256()?;
            schedule.write(&out.join("schedule.json"))?;
            println!(
                "d={} 1/eps={} mode={} steps={}",
                tree.d,
                (1.0 / tree.eps).round(),
                tree.mode,
                tree.steps_taken
            );
            println!("cut_per_vertex          {:.6}", tree.cut_per_vertex);
            println!("miscolored_measure      {:.7}", tree.miscolored_measure);
            if let Some(x) = tree.improved_cut_per_vertex {
                println!("improved_cut_per_vertex {x:.6}");
            }
            let checks = if opts.check { harness::check_tree(&tree)? } else { Vec::new() };
            harness::write_csv(&out.join("tree_summary.csv"), &[TreeSummaryRow::from(&tree)])?;
            let mut report = Report::new(&cfg, Some(sha), tree, start);
            report.checks = checks;
            harness::write_json(&out.join("tree_report.json"), &report)?;
            print_checks(&report.checks);
            Ok(report.all_checks_pass())
        }
        Subcommand::Graph => {
            let src = harness::load_or_build_schedule(&cfg)?;
            let result = harness::cmd_graph(&cfg, &src)?;
            let rows: Vec<GraphRunRow> = result.runs.iter().map(GraphRunRow::from).collect();
            harness::write_csv(&out.join("graph_runs.csv"), &rows)?;
            println!(
                "n={} reps={} steps={} cut/n repaired {:.5} final {:.5} miscolored {:.5}",
                cfg.n,
                cfg.repetitions,
                result.schedule_steps,
                result.mean_cut_repaired_per_vertex,
                result.mean_cut_final_per_vertex,
                result.mean_miscolored_fraction
            );
            if let Some(p) = result.prediction {
                println!(
                    "tree prediction cut/n {:.5} miscolored {:.5}",
                    p.completed.cut_per_vertex, p.completed.miscolored_measure
                );
            }
            let checks = if opts.check { harness::check_graph(&result) } else { Vec::new() };
            let mut report = Report::new(&cfg, Some(src.sha256.clone()), result, start);
            report.checks = checks;
            harness::write_json(&out.join("graph_report.json"), &report)?;
            print_checks(&report.checks);
            Ok(report.all_checks_pass())
        }
        Subcommand::Maxcut => {
            let src = harness::load_or_build_schedule(&cfg)?;
            let result = harness::cmd_maxcut(&cfg, &src)?;
            let rows: Vec<MaxcutRow> = result.runs.iter().map(MaxcutRow::from).collect();
            harness::write_csv(&out.join("maxcut_runs.csv"), &rows)?;
            println!(
                "n={} reps={} cut_A/n {:.5} cut_B/n {:.5}",
                cfg.n, cfg.repetitions, result.mean_cut_a_per_vertex, result.mean_cut_b_per_vertex
            );
            let checks = if opts.check { harness::check_maxcut(&result) } else { Vec::new() };
            let mut report = Report::new(&cfg, Some(src.sha256.clone()), result, start);
            report.checks = checks;
            harness::write_json(&out.join("maxcut_report.json"), &report)?;
            print_checks(&report.checks);
            Ok(report.all_checks_pass())
        }
        Subcommand::Cycles => {
            let result = harness::cmd_cycles(&cfg)?;
            harness::write_csv(&out.join("cycles_stats.csv"), &result.stats)?;
            for s in &result.stats {
                println!(
                    "X{}: mean {:.4} +- {:.4} lambda {:.4} z {:+.2}",
                    s.k, s.mean, s.std_error, s.lambda, s.z
                );
            }
            let checks = if opts.check { harness::check_cycles(&result) } else { Vec::new() };
            let mut report = Report::new(&cfg, None, result, start);
            report.checks = checks;
            harness::write_json(&out.join("cycles_report.json"), &report)?;
            print_checks(&report.checks);
            Ok(report.all_checks_pass())
        }
        Subcommand::Internal => {
            let src = harness::load_or_build_schedule(&cfg)?;
            let result = harness::cmd_internal(&cfg, &src)?;
            harness::write_csv(&out.join("internal_runs.csv"), &result.runs)?;
            for f in &result.fixtures {
                println!("fixture {:<14} internal={}", f.name, f.internal);
            }
            println!("n={} reps={} success rate {:.3}", cfg.n, cfg.repetitions, result.success_rate);
            let checks = if opts.check { harness::check_internal_report(&result) } else { Vec::new() };
            let mut report = Report::new(&cfg, Some(src.sha256.clone()), result, start);
            report.checks = checks;
            harness::write_json(&out.join("internal_report.json"), &report)?;
            print_checks(&report.checks);
            Ok(report.all_checks_pass())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, opts) = match &cli.cmd {
        Cmd::Tree(o) => (Subcommand::Tree, o),
        Cmd::Graph(o) => (Subcommand::Graph, o),
        Cmd::Maxcut(o) => (Subcommand::Maxcut, o),
        Cmd::Cycles(o) => (Subcommand::Cycles, o),
        Cmd::Internal(o) => (Subcommand::Internal, o),
    };
    match run(cmd, opts) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
