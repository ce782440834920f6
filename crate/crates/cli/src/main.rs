//! Command-line front end for the sidelink simulator.
//!
//! Three subcommands: `simulate` runs the full PRR sweep and writes every
//! CSV, `cdf` produces only the pathloss distribution datasets, and
//! `validate` parses a config and prints it back fully resolved. Errors
//! go to stderr as one `category: message` line; the process exits 0 on
//! success, 2 for configuration problems and 1 for runtime failures.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sidesim_core::config::{ConfigError, SimConfig};
use sidesim_core::export;
use sidesim_core::kpi::{CdfDataset, PrrReport};
use sidesim_core::sweep::{self, SweepError, SweepOutput};

#[derive(Parser)]
#[command(
    name = "sidesim",
    version,
    about = "Monte-Carlo packet-reception simulator for direct V2V sidelink on a highway"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the model x bandwidth x density sweep and write all CSVs.
    Simulate(RunArgs),
    /// Build only the pathloss CDF datasets and write their CSVs.
    Cdf(RunArgs),
    /// Parse and validate a config, printing it back fully resolved.
    Validate(ConfigArg),
}

#[derive(Args)]
struct ConfigArg {
    /// TOML run configuration (an empty file means all defaults).
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Worker threads; defaults to all cores. Results are identical for
    /// any value.
    #[arg(long)]
    jobs: Option<usize>,
    /// Override the configured random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the configured output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct CliError {
    category: &'static str,
    message: String,
    code: u8,
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        let (category, message) = match &e {
            ConfigError::Parse(m) => ("config-parse", m.clone()),
            ConfigError::Invalid { field, reason } => {
                ("config-invalid", format!("{field}: {reason}"))
            }
            ConfigError::Io(err) => ("io", err.to_string()),
            ConfigError::McsTable(err) => ("config-invalid", format!("mcs table: {err}")),
        };
        CliError {
            category,
            message,
            code: 2,
        }
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Config(c) => c.into(),
            other => CliError {
                category: "simulation",
                message: other.to_string(),
                code: 1,
            },
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError {
            category: "io",
            message: e.to_string(),
            code: 1,
        }
    }
}

/// Writes one line to stdout. A closed pipe (the downstream consumer
/// exited early) silently stops the reporting, never the work or the
/// result files.
fn print_line(line: &str) -> Result<(), CliError> {
    use std::io::Write as _;
    let mut out = std::io::stdout().lock();
    match out
        .write_all(line.as_bytes())
        .and_then(|()| out.write_all(b"\n"))
    {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => other.map_err(CliError::from),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}: {}", e.category, e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate(args) => {
            let cfg = SimConfig::from_file(&args.config)?;
            print_line(cfg.to_toml_string().trim_end_matches('\n'))
        }
        Command::Simulate(args) => {
            let (cfg, out_dir) = load_run_config(&args)?;
            let output = thread_pool(args.jobs)?.install(|| sweep::run_sweep(&cfg))?;
            for report in &output.reports {
                print_report(report)?;
            }
            let clamped: u64 = output.reports.iter().map(|r| r.clamped_links).sum();
            if clamped > 0 {
                print_line(&format!(
                    "note: {clamped} link evaluations used distances clamped to a model validity bound"
                ))?;
            }
            write_outputs(&out_dir, &output)
        }
        Command::Cdf(args) => {
            let (cfg, out_dir) = load_run_config(&args)?;
            let datasets = thread_pool(args.jobs)?.install(|| sweep::cdf_datasets(&cfg))?;
            for ds in &datasets {
                print_dataset(ds)?;
            }
            write_outputs(
                &out_dir,
                &SweepOutput {
                    reports: Vec::new(),
                    datasets,
                },
            )
        }
    }
}

fn load_run_config(args: &RunArgs) -> Result<(SimConfig, PathBuf), CliError> {
    let mut cfg = SimConfig::from_file(&args.config.config)?;
    if let Some(seed) = args.seed {
        cfg.sweep.seed = seed;
    }
    let out_dir = args
        .out
        .clone()
        .unwrap_or_else(|| cfg.sweep.output_dir.clone());
    Ok((cfg, out_dir))
}

fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError {
            category: "simulation",
            message: e.to_string(),
            code: 1,
        })
}

fn write_outputs(out_dir: &PathBuf, output: &SweepOutput) -> Result<(), CliError> {
    let paths = export::write_all(out_dir, output)?;
    for path in paths {
        print_line(&format!("wrote {}", path.display()))?;
    }
    Ok(())
}

fn print_report(r: &PrrReport) -> Result<(), CliError> {
    let mcs = r
        .mcs
        .map(|m| m.index.to_string())
        .unwrap_or_else(|| "-".to_string());
    let prr = r
        .prr
        .map(|p| format!("{p:.4}"))
        .unwrap_or_else(|| "na".to_string());
    let per_tx = r
        .per_tx_prr
        .map(|p| format!("{p:.4}"))
        .unwrap_or_else(|| "na".to_string());
    let note = if r.infeasible() {
        "  [capacity infeasible]"
    } else {
        ""
    };
    print_line(&format!(
        "{:<9} bw={:>4} MHz ivd={:>4} m mcs={:>2} se_req={:.4} prr={} per_tx={}{}",
        r.model.tag(),
        r.bandwidth_hz / 1e6,
        r.ivd_m,
        mcs,
        r.required_se,
        prr,
        per_tx,
        note
    ))
}

fn print_dataset(ds: &CdfDataset) -> Result<(), CliError> {
    print_line(&format!(
        "cdf {} ({}, shadowing {}): {} samples over [{}, {}] m, median loss {:.2} dB, {} clamped",
        ds.spec.model.tag(),
        match ds.spec.los_state {
            sidesim_core::LosState::Los => "LOS",
            sidesim_core::LosState::Nlos => "NLOS",
        },
        if ds.spec.shadowing { "on" } else { "off" },
        ds.samples.len(),
        ds.spec.d_min_m,
        ds.spec.d_max_m,
        ds.quantile(0.5),
        ds.clamped
    ))
}
