use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use gaplab_cli::output::fmt_float;
use gaplab_cli::{run_gap_and_bounds, run_scaling, run_sweep, run_verify, ExperimentConfig, ResultRecord, RunOptions};

#[derive(Parser)]
#[command(name = "gaplab", version, about = "Exact spectral gaps and gap bounds for reversible particle systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the comparison-measure axioms, the second-difference
    /// identities, detailed balance and the Bakry-Emery characterization
    Verify(Common),
    /// Exact gap, certified constant and the closed-form bounds
    Gap(Common),
    /// One record per point of the parameter grids
    Sweep(Common),
    /// Gap times squared diameter over a list of segment lengths
    Scaling(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// output directory (default: `output.dir` of the config, else ./gaplab-out)
    #[arg(long)]
    out: Option<PathBuf>,
    /// grid points run concurrently
    #[arg(long)]
    workers: Option<usize>,
    /// seed for random test functions, overriding the config
    #[arg(long)]
    seed: Option<u64>,
}

fn report(r: &ResultRecord) {
    let status = if r.passed { "PASS" } else { "FAIL" };
    let point: Vec<String> = r.point.iter().map(|(k, v)| format!("{k}={v}")).collect();
    let gap = r.gap_value().map(fmt_float).unwrap_or_else(|| "-".into());
    println!(
        "{status} {} [{}] states={} gap={gap} hash={}",
        r.model.kind,
        point.join(" "),
        r.model.states,
        &r.config_hash[..12]
    );
    for c in r.failed_checks() {
        println!("  failed: {} ({} > {})", c.name, fmt_float(c.lhs), fmt_float(c.rhs));
    }
    for n in &r.notes {
        println!("  note: {n}");
    }
}

fn run(cli: Cli) -> Result<bool> {
    let (Command::Verify(common) | Command::Gap(common) | Command::Sweep(common) | Command::Scaling(common)) =
        &cli.command;
    let mut config = ExperimentConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        config.seed = Some(seed);
    }
    let out = common
        .out
        .clone()
        .or_else(|| config.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("gaplab-out"));
    std::fs::create_dir_all(&out)?;
    let mut opts = RunOptions {
        out_dir: Some(out),
        ..RunOptions::default()
    };
    if let Some(w) = common.workers {
        opts.workers = w;
    }
    let records = match &cli.command {
        Command::Verify(_) => vec![run_verify(&config, &opts)?],
        Command::Gap(_) => vec![run_gap_and_bounds(&config, &opts)?],
        Command::Sweep(_) => run_sweep(&config, &opts)?,
        Command::Scaling(_) => {
            let (records, s) = run_scaling(&config, &opts)?;
            println!(
                "gap*diam^2 over L in {:?}: min {} max {} ratio {}",
                s.sizes,
                fmt_float(s.min_gap_diam2),
                fmt_float(s.max_gap_diam2),
                fmt_float(s.ratio)
            );
            records
        }
    };
    records.iter().for_each(report);
    Ok(records.iter().all(|r| r.passed))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
