use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use pikan_bench::config::{check_paper_row, ArchRow, Mode, SuiteConfig};
use pikan_bench::report::{claims, emit_results};
use pikan_bench::suite::{execute, load_runs, RunRecord};
use pikan_bench::{build_records, curves, run_suite, tables, HarnessError};
use pikan_core::{NetworkKind, ProblemId};

#[derive(Parser)]
#[command(name = "pikan", version, about = "Train and compare PINNs and PIKANs on ODE/PDE benchmarks")]
struct Cli {
    /// Worker threads for suite runs (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory (default: the config's `out`, else ./pikan-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Number of seeds per architecture.
    #[arg(long, global = true)]
    seeds: Option<usize>,
    /// EMA smoothing factor for loss curves, in (0, 1].
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Full benchmark schedules with parameter-count checks.
    #[arg(long, global = true, conflicts_with = "desk")]
    paper: bool,
    /// Reduced seeds, iterations and PDE collocation.
    #[arg(long, global = true)]
    desk: bool,
    /// Flat key = value suite configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Record wall-clock times (makes outputs non-reproducible).
    #[arg(long, global = true)]
    timing: bool,
    #[arg(long, global = true)]
    iterations: Option<usize>,
    #[arg(long, global = true)]
    lr: Option<f64>,
    /// Number of collocation points (a perfect square for PDEs).
    #[arg(long, global = true)]
    collocation: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a single architecture for one seed.
    Run(RunArgs),
    /// Train every configured architecture and seed, then report.
    Suite {
        /// Comma-separated problem subset.
        #[arg(long, value_delimiter = ',')]
        problems: Option<Vec<ProblemId>>,
    },
    /// Aggregate stored runs into results.json, summary.csv and tables.
    Report,
    /// Write best-seed loss curves for stored runs.
    Curves,
    /// Recompute every tabulated parameter count.
    PaperCheck,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    problem: ProblemId,
    /// mlp/pinn or kan/pikan.
    #[arg(long)]
    method: NetworkKind,
    #[arg(long)]
    hidden: usize,
    #[arg(long)]
    width: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    order: Option<usize>,
}

const EXIT_ABORTED: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e.downcast_ref::<HarnessError>().is_some_and(|h| matches!(h, HarnessError::Usage(_)));
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}

fn mode(cli: &Cli) -> Mode {
    if cli.desk {
        Mode::Desk
    } else {
        Mode::Paper
    }
}

fn suite_config(cli: &Cli) -> anyhow::Result<SuiteConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            SuiteConfig::parse(&text, mode(cli))?
        }
        None => SuiteConfig::preset(mode(cli)),
    };
    if cli.paper {
        cfg.mode = Mode::Paper;
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if let Some(n) = cli.seeds {
        cfg.seeds = n;
    }
    cfg.overrides.iterations = cli.iterations.or(cfg.overrides.iterations);
    cfg.overrides.learning_rate = cli.lr.or(cfg.overrides.learning_rate);
    cfg.overrides.collocation = cli.collocation.or(cfg.overrides.collocation);
    Ok(cfg)
}

fn dispatch(cli: &Cli) -> anyhow::Result<ExitCode> {
    match &cli.command {
        Command::PaperCheck => paper_check(),
        Command::Run(args) => run(cli, args),
        Command::Suite { problems } => {
            let mut cfg = suite_config(cli)?;
            if let Some(p) = problems {
                cfg.problems = p.clone();
            }
            let runs = run_suite(&cfg, cli.threads, cli.timing)?;
            finish(cli, &cfg.out, &runs)
        }
        Command::Report => {
            let out = suite_config(cli)?.out;
            let runs = load_runs(&out)?;
            finish(cli, &out, &runs)
        }
        Command::Curves => {
            let out = suite_config(cli)?.out;
            let runs = load_runs(&out)?;
            if runs.is_empty() {
                return Err(HarnessError::Usage(format!("no runs under {}", out.display())).into());
            }
            for path in curves::emit_curves(&out, &runs, cli.alpha, true)? {
                println!("{}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn paper_check() -> anyhow::Result<ExitCode> {
    let checks = tables::paper_check();
    let mut mismatches = 0;
    for c in &checks {
        if !c.ok() {
            mismatches += 1;
            let r = c.row;
            println!(
                "MISMATCH table {} {} {} H={} W={}: computed {} printed {}",
                tables::table_number(r.problem),
                r.problem,
                r.method.method_name(),
                r.hidden,
                r.width,
                c.computed,
                r.params
            );
        }
    }
    println!("{} rows checked, {} mismatches", checks.len(), mismatches);
    Ok(if mismatches == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn run(cli: &Cli, args: &RunArgs) -> anyhow::Result<ExitCode> {
    if args.method == NetworkKind::Mlp && (args.grid.is_some() || args.order.is_some()) {
        return Err(HarnessError::Usage("--grid/--order apply to KAN architectures only".into()).into());
    }
    let cfg = suite_config(cli)?;
    let row = ArchRow {
        method: args.method,
        hidden: args.hidden,
        width: args.width,
        grid: args.grid,
        order: args.order,
    };
    let train_cfg = cfg.train_config(args.problem, &row)?;
    if cli.paper {
        check_paper_row(args.problem, &row, &train_cfg.spec)?;
    }
    let record = execute(&train_cfg, args.seed, &cfg.out, cli.timing)?;
    println!("{}", serde_json::to_string(&record.errors)?);
    let records = build_records(std::slice::from_ref(&record))?;
    emit_results(&cfg.out, &records)?;
    Ok(abort_code(&[record]))
}

fn finish(cli: &Cli, out: &std::path::Path, runs: &[RunRecord]) -> anyhow::Result<ExitCode> {
    let records = build_records(runs)?;
    emit_results(out, &records)?;
    curves::emit_curves(out, runs, cli.alpha, true)?;
    for c in claims(&records) {
        println!(
            "{}: best PINN {} {:.2e}% vs best PIKAN {} {:.2e}% -> {}",
            c.problem,
            c.pinn.slug(),
            c.pinn_rel_l2.mean,
            c.pikan.slug(),
            c.pikan_rel_l2.mean,
            if c.holds() { "PIKAN lower" } else { "PIKAN NOT lower" }
        );
    }
    println!("{} runs, {} architectures, results in {}", runs.len(), records.len(), out.display());
    Ok(abort_code(runs))
}

fn abort_code(runs: &[RunRecord]) -> ExitCode {
    let aborted: Vec<_> = runs.iter().filter(|r| r.aborted.is_some()).collect();
    for r in &aborted {
        eprintln!("aborted: {} {} seed {}: {}", r.arch.problem, r.arch.slug(), r.seed, r.aborted.as_deref().unwrap_or(""));
    }
    if aborted.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_ABORTED)
    }
}
