use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lagcoh_cli::commands::{self, ParsevalRequest};
use lagcoh_cli::config::{BinSelection, Config};
use lagcoh_cli::dataset::write_file;
use lagcoh_cli::{CliError, Result};

#[derive(Parser)]
#[command(name = "lagcoh", version, about = "Coherence, phase synchronization and their lagged variants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute measures per frequency bin.
    Analyze(RunArgs),
    /// Generate a synthetic dataset from a scenario config.
    Simulate(SimulateArgs),
    /// Check Re(S_ZZ) against the time-domain covariance of the filtered series.
    VerifyParseval(ParsevalArgs),
    /// Compute measures with segment-permutation p-values.
    Test(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    input: PathBuf,
    /// JSON header sidecar (default: <input>.json).
    #[arg(long)]
    header: Option<PathBuf>,
    /// Flat key = value config; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated measure ids, or `all`.
    #[arg(long)]
    measures: Option<String>,
    #[arg(long, value_parser = ["vector", "variable"])]
    normalization: Option<String>,
    /// `all`, `full`, or a list such as `1,4-8`.
    #[arg(long)]
    bins: Option<String>,
    #[arg(long, value_parser = ["ensemble", "per_segment", "both", "none"])]
    centering: Option<String>,
    #[arg(long)]
    permutations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    ridge: Option<f64>,
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Write here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Override a config key, e.g. `--set noise_std=0.5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Payload path; the header is written to <output>.json.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct ParsevalArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    header: Option<PathBuf>,
    #[arg(long, default_value = "all")]
    bins: String,
    /// Remove the ensemble mean on both paths first.
    #[arg(long)]
    centered: bool,
    #[arg(long)]
    include_edge_bins: bool,
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn run_config(args: &RunArgs) -> Result<Config> {
    let mut c = match &args.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let flags = [
        ("measures", args.measures.clone()),
        ("normalization", args.normalization.clone()),
        ("bins", args.bins.clone()),
        ("centering", args.centering.clone()),
        ("permutations", args.permutations.map(|v| v.to_string())),
        ("seed", args.seed.map(|v| v.to_string())),
        ("ridge", args.ridge.map(|v| v.to_string())),
        ("format", args.format.clone()),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            c.set(k, v);
        }
    }
    Ok(c)
}

fn write_output(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => write_file(p, text.as_bytes()),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze(args) => {
            let out = commands::analyze(&run_config(&args)?, &args.input, args.header.as_deref())?;
            write_output(args.output.as_deref(), &out)
        }
        Command::Test(args) => {
            let out = commands::permutation(&run_config(&args)?, &args.input, args.header.as_deref())?;
            write_output(args.output.as_deref(), &out)
        }
        Command::Simulate(args) => {
            let mut c = Config::load(&args.config)?;
            c.apply_overrides(args.overrides.iter().map(String::as_str))?;
            if let Some(s) = args.seed {
                c.set("seed", s.to_string());
            }
            commands::simulate(&c, &args.output)?;
            Ok(())
        }
        Command::VerifyParseval(args) => {
            let req = ParsevalRequest {
                bins: BinSelection::parse(&args.bins)
                    .ok_or_else(|| CliError::Config(format!("invalid bins `{}`", args.bins)))?,
                centered: args.centered,
                include_edge_bins: args.include_edge_bins,
                format: commands::format_or_default(args.format.as_deref())?,
            };
            let (out, ok) = commands::verify_parseval(&req, &args.input, args.header.as_deref())?;
            write_output(args.output.as_deref(), &out)?;
            if ok {
                Ok(())
            } else {
                Err(CliError::Verification("identity violated at one or more bins".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let msg = msg.trim_start_matches("error: ").trim_end();
            eprintln!("lagcoh-error: {msg}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let mut msg = e.to_string();
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                if !msg.contains(&s.to_string()) {
                    msg.push_str(": ");
                    msg.push_str(&s.to_string());
                }
                source = s.source();
            }
            eprintln!("lagcoh-error: {msg}");
            ExitCode::FAILURE
        }
    }
}
