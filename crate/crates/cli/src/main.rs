use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use shocklab::runner::{
    builtin, catalog, parse_config, parse_grid, read_records, render_summary, run_all, write_run, RunConfig,
    RunOptions, DEFAULT_GRID,
};

/// Numerical lab for Burgers' equation: weak solutions, entropy production,
/// Hopf-Lax potentials and quantitative estimate checks.
#[derive(Debug, Parser)]
#[command(name = "shocklab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a config file, a built-in scenario id, or `all` for the whole catalog.
    Run {
        target: String,
        /// Default grid as NTxNX node counts; scenarios with their own grid keep it.
        #[arg(long, value_parser = grid_arg)]
        grid: Option<(usize, usize)>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Reserved; nothing in the pipeline is randomised.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (defaults to all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Also write u.csv and h_bar.csv per scenario.
        #[arg(long)]
        dump_fields: bool,
    },
    /// List the built-in scenarios.
    Catalog,
    /// Re-render the summary table of a finished run.
    Report { dir: PathBuf },
}

fn grid_arg(s: &str) -> Result<(usize, usize), String> {
    parse_grid(s).map_err(|e| e.to_string())
}

/// Resolves the run target. Config-relative paths are taken relative to the config file.
fn load(target: &str) -> Result<(RunConfig, PathBuf)> {
    let path = Path::new(target);
    if path.is_file() {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        let cfg = parse_config(&text, &base).with_context(|| format!("in {}", path.display()))?;
        if cfg.scenarios.is_empty() {
            bail!("{} defines no [scenario]", path.display());
        }
        return Ok((cfg, base));
    }
    let scenarios = if target == "all" { catalog() } else { vec![builtin(target)?] };
    Ok((RunConfig { scenarios, ..RunConfig::default() }, PathBuf::from(".")))
}

fn run(target: &str, grid: Option<(usize, usize)>, out: Option<PathBuf>, dump_fields: bool) -> Result<bool> {
    let (cfg, base) = load(target)?;
    let opts = RunOptions {
        grid: grid.or(cfg.grid).unwrap_or(DEFAULT_GRID),
        entropies: cfg.entropies.clone(),
    };
    let out = out
        .or_else(|| cfg.out.as_ref().map(|o| base.join(o)))
        .unwrap_or_else(|| PathBuf::from("shocklab-out"));
    let outcomes = run_all(&cfg.scenarios, &opts)?;
    let summary = write_run(&out, &outcomes, dump_fields || cfg.dump_fields)
        .with_context(|| format!("writing results to {}", out.display()))?;
    print!("{}", render_summary(&read_records(&out)?));
    println!("results in {}", out.display());
    Ok(summary.all_passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Catalog => {
            for s in catalog() {
                println!("{:<26} {}", s.id, s.description);
            }
            Ok(true)
        }
        Command::Report { dir } => read_records(&dir)
            .with_context(|| format!("reading {}", dir.display()))
            .map(|records| {
                print!("{}", render_summary(&records));
                records.iter().all(|r| r.passed())
            }),
        Command::Run { target, grid, out, seed: _, jobs, dump_fields } => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build();
            match pool {
                Ok(pool) => pool.install(|| run(&target, grid, out, dump_fields)),
                Err(e) => Err(e.into()),
            }
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
