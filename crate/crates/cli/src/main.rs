use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use rayon::prelude::*;

use gerbe_core::scenarios::{
    compare_backends, run_scenario, BackendSelection, ConfigOverrides, ScenarioConfig, ScenarioId, VerificationReport,
};

#[derive(Parser)]
#[command(name = "gerbe", version, about = "Characteristic gerbes of flat families: scenario runner and verifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run scenarios and verify every check
    Run(RunArgs),
    /// List the built-in scenarios
    List,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Scenario id, e.g. ex7_1, ex7_8(k=3), or a custom .json file; repeat for several, or `all`
    #[arg(long, value_parser = parse_id_or_all)]
    scenario: Vec<IdArg>,

    /// exact | numeric | formal | all
    #[arg(long, value_parser = parse_backend)]
    backend: Option<BackendSelection>,

    /// Gauss–Legendre order of the numeric backend
    #[arg(long)]
    quad_order: Option<usize>,

    /// Tolerance for numeric checks
    #[arg(long)]
    tolerance: Option<f64>,

    /// Arcs per circle in the fibre covers
    #[arg(long)]
    cover_arcs: Option<usize>,

    /// JSON config file; command-line flags override it
    #[arg(long)]
    config: Option<PathBuf>,

    /// Only report cross-backend deltas
    #[arg(long)]
    compare: bool,

    /// Record wall-clock timings in the report
    #[arg(long)]
    timings: bool,

    /// Write the JSON report here
    #[arg(long)]
    report: Option<PathBuf>,

    /// Write form coefficient tables as CSV into this directory
    #[arg(long)]
    csv: Option<PathBuf>,

    /// Worker threads for running several scenarios
    #[arg(long, env = "GERBE_WORKERS")]
    workers: Option<usize>,
}

#[derive(Clone)]
enum IdArg {
    One(ScenarioId),
    All,
}

fn parse_id_or_all(s: &str) -> std::result::Result<IdArg, String> {
    if s == "all" {
        return Ok(IdArg::All);
    }
    s.parse().map(IdArg::One).map_err(|e: gerbe_core::Error| e.to_string())
}

fn parse_backend(s: &str) -> std::result::Result<BackendSelection, String> {
    s.parse().map_err(|e: gerbe_core::Error| e.to_string())
}

fn configs(args: &RunArgs) -> Result<Vec<ScenarioConfig>> {
    let file = match &args.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
            serde_json::from_str::<ConfigOverrides>(&text).with_context(|| format!("parsing config {}", p.display()))?
        }
        None => ConfigOverrides::default(),
    };
    let mut ids: Vec<Option<ScenarioId>> = Vec::new();
    for a in &args.scenario {
        match a {
            IdArg::One(id) => ids.push(Some(id.clone())),
            IdArg::All => ids.extend(ScenarioId::builtin().into_iter().map(Some)),
        }
    }
    if ids.is_empty() {
        ids.push(None);
    }
    ids.into_iter()
        .map(|id| {
            let flags = ConfigOverrides {
                scenario: id,
                backend: args.backend,
                tolerance: args.tolerance,
                cover_arcs: args.cover_arcs,
                quad_order: args.quad_order,
                timings: args.timings.then_some(true),
            };
            Ok(flags.over(file.clone()).into_config()?)
        })
        .collect()
}

fn csv_name(scenario: &str, table: &str) -> String {
    let clean: String = scenario.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' }).collect();
    format!("{}_{table}.csv", clean.trim_end_matches('_'))
}

fn write_csv(dir: &Path, reports: &[VerificationReport]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for r in reports {
        for t in &r.tables {
            let path = dir.join(csv_name(&r.scenario, &t.name));
            let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
            w.write_record(gerbe_core::scenarios::FormTable::HEADER)?;
            for row in &t.rows {
                w.write_record(row)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn print_report(r: &VerificationReport) {
    println!("== {}", r.scenario);
    for c in &r.checks {
        println!("{} {} (residual {:e})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.residual);
        if !c.pass {
            println!("     expected: {}", c.expected);
            println!("     computed: {}", c.computed);
        }
    }
    if let Some(t) = &r.timings_ms {
        for (stage, ms) in t {
            println!("     {stage}: {ms} ms");
        }
    }
}

fn run(args: RunArgs) -> Result<bool> {
    let cfgs = configs(&args)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.workers.unwrap_or(0)).build()?;
    let results: Vec<_> = pool.install(|| {
        cfgs.par_iter().map(|cfg| if args.compare { compare_backends(cfg) } else { run_scenario(cfg) }).collect()
    });
    let mut reports = Vec::new();
    for (cfg, r) in cfgs.iter().zip(results) {
        reports.push(r.with_context(|| format!("scenario {}", cfg.scenario))?);
    }
    for r in &reports {
        print_report(r);
    }
    if let Some(path) = &args.report {
        let json = if reports.len() == 1 { serde_json::to_string_pretty(&reports[0])? } else { serde_json::to_string_pretty(&reports)? };
        fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(dir) = &args.csv {
        write_csv(dir, &reports)?;
    }
    let failed: usize = reports.iter().map(|r| r.failures().count()).sum();
    let total: usize = reports.iter().map(|r| r.checks.len()).sum();
    println!("{} of {total} checks passed", total - failed);
    Ok(failed == 0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::List => {
            for id in ScenarioId::builtin() {
                println!("{id}\t{:?}", id.supported());
            }
            Ok(true)
        }
        Command::Run(args) => {
            if args.scenario.is_empty() && args.config.is_none() {
                Err(anyhow::anyhow!("no scenario given; pass --scenario <id> (see `gerbe list`)"))
            } else {
                run(args)
            }
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
