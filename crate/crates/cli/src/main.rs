//! `alloc`: batch runner for the shared x-haul allocation simulator.
//!
//! Exit codes: 0 ok, 1 usage, 2 validation, 3 runtime.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use xhaul_alloc::runner::{
    compare, oracle_report, run_scenario, summarize_csv, write_assignments, write_csv,
};
use xhaul_alloc::scenario::{load_config, parse_seed_override, ScenarioConfig};
use xhaul_alloc::Error;

#[derive(Debug, Parser)]
#[command(name = "alloc", version, about = "Multi-tenant O-RAN x-haul allocation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every (demand, seed, mechanism) cell of a config and write results.csv.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory, created if missing.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Also write assignments.json with every assignment.
        #[arg(long)]
        dump_assignments: bool,
        /// Worker threads (defaults to all cores).
        #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
        jobs: Option<u16>,
    },
    /// Per-demand-level outage and cost deltas (b - a) between two results files.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Only use rows of this mechanism from `a`.
        #[arg(long)]
        mech_a: Option<String>,
        /// Only use rows of this mechanism from `b`.
        #[arg(long)]
        mech_b: Option<String>,
    },
    /// Compare the heuristics with exhaustive search (small instances only).
    Oracle {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Failure classes, mapped onto exit codes.
#[derive(Debug)]
enum Failure {
    Usage(anyhow::Error),
    Validation(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Usage(e) | Failure::Validation(e) | Failure::Runtime(e) => e,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. }
            | Error::Validation(_)
            | Error::Schema(_)
            | Error::InvalidParameter(_)
            | Error::InfeasibleSpec(_)
            | Error::InstanceTooLarge { .. } => Failure::Validation(e.into()),
            _ => Failure::Runtime(e.into()),
        }
    }
}

fn runtime(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Runtime(e.into())
}

fn config_with_overrides(path: &Path) -> Result<ScenarioConfig, Failure> {
    let mut cfg = load_config(path).map_err(|e| match e {
        // unreadable input is a usage problem, not a bad document
        Error::Io(io) => Failure::Usage(anyhow::Error::new(io).context(format!("reading {}", path.display()))),
        other => other.into(),
    })?;
    if let Ok(value) = std::env::var("ALLOC_SEED") {
        cfg.seeds = parse_seed_override(&value)?;
    }
    Ok(cfg)
}

fn cmd_run(config: &Path, out: &Path, dump: bool, jobs: Option<u16>) -> Result<(), Failure> {
    let cfg = config_with_overrides(config)?;
    let report = run_scenario(&cfg, jobs.map(usize::from))?;
    std::fs::create_dir_all(out)
        .with_context(|| format!("creating {}", out.display()))
        .map_err(runtime)?;

    let csv_path = out.join("results.csv");
    let file = File::create(&csv_path)
        .with_context(|| format!("creating {}", csv_path.display()))
        .map_err(runtime)?;
    write_csv(&report.rows, cfg.n_mno(), BufWriter::new(file))?;

    if dump {
        let path = out.join("assignments.json");
        let file = File::create(&path)
            .with_context(|| format!("creating {}", path.display()))
            .map_err(runtime)?;
        write_assignments(&report.records, BufWriter::new(file))?;
    }

    let failed = report.failures();
    eprintln!("{} rows written to {}", report.rows.len(), csv_path.display());
    if failed > 0 {
        for row in report.rows.iter().filter(|r| r.status.as_str() == "error") {
            eprintln!(
                "error: {} at {} Gbps, seed {}: {}",
                row.mechanism,
                row.demand_gbps,
                row.seed,
                row.message.as_deref().unwrap_or("")
            );
        }
        return Err(Failure::Runtime(anyhow::anyhow!("{failed} run(s) failed")));
    }
    Ok(())
}

fn open_csv(path: &Path) -> Result<File, Failure> {
    File::open(path)
        .with_context(|| format!("opening {}", path.display()))
        .map_err(Failure::Usage)
}

fn cmd_compare(a: &Path, b: &Path, mech_a: Option<&str>, mech_b: Option<&str>) -> Result<(), Failure> {
    let sa = summarize_csv(open_csv(a)?, mech_a)?;
    let sb = summarize_csv(open_csv(b)?, mech_b)?;
    let lines = compare(&sa, &sb);
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    w.write_record([
        "demand_gbps",
        "outage_a",
        "outage_b",
        "outage_delta",
        "cost_a",
        "cost_b",
        "cost_delta",
        "a_outage_le_b",
        "a_cost_le_b",
    ])
    .map_err(runtime)?;
    for l in &lines {
        w.write_record([
            l.demand_gbps.to_string(),
            l.a.outage.to_string(),
            l.b.outage.to_string(),
            l.outage_delta.to_string(),
            l.a.cost.to_string(),
            l.b.cost.to_string(),
            l.cost_delta.to_string(),
            l.a_outage_le_b.to_string(),
            l.a_cost_le_b.to_string(),
        ])
        .map_err(runtime)?;
    }
    w.flush().map_err(runtime)?;
    Ok(())
}

fn cmd_oracle(config: &Path) -> Result<(), Failure> {
    let cfg = config_with_overrides(config)?;
    let lines = oracle_report(&cfg)?;
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    for line in &lines {
        w.serialize(line).map_err(runtime)?;
    }
    w.flush().map_err(runtime)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Run { config, out, dump_assignments, jobs } => cmd_run(config, out, *dump_assignments, *jobs),
        Command::Compare { a, b, mech_a, mech_b } => cmd_compare(a, b, mech_a.as_deref(), mech_b.as_deref()),
        Command::Oracle { config } => cmd_oracle(config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let _ = writeln!(io::stderr(), "alloc: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}
