use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use meanvalue::config::{parse_override, DEFAULT_OUT, DEFAULT_SEED};
use meanvalue::experiments::GLOBAL_PARAMS;
use meanvalue::{CliError, ExperimentConfig, FileConfig, Format, Params, EXPERIMENTS};

#[derive(Parser)]
#[command(name = "meanvalue", version, about = "Reproducible experiments on general-mean value functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment, or `all`.
    Run {
        experiment: String,
        /// Parameter override, repeatable.
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        /// Output directory; artifacts go to OUT/<experiment>/.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// TOML file with `out`, `seed`, `format` and a `[params]` table.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// List experiment ids and their parameters.
    List,
}

fn list() {
    for e in EXPERIMENTS {
        println!("{:<14} {}", e.id, e.anchor);
        for p in e.params {
            println!("    {:<20} default {:<12} {}", p.key, p.default, p.help);
        }
    }
    println!("{:<14} every experiment above, in order", "all");
    println!("\nparameters accepted by every experiment:");
    for p in GLOBAL_PARAMS {
        println!("    {:<20} default {:<12} {}", p.key, p.default, p.help);
    }
}

fn run(
    experiment: String,
    params: Vec<String>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    config: Option<PathBuf>,
    format: Option<Format>,
) -> Result<bool, CliError> {
    let file = match &config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let overrides = params.iter().map(|raw| parse_override(raw)).collect::<Result<Vec<_>, _>>()?;
    let cfg = ExperimentConfig {
        id: experiment,
        params: Params::from_sources(&file, &overrides)?,
        out: out.or(file.out.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
        seed: seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        format: format.or(file.format).unwrap_or_default(),
    };
    let reports = meanvalue::run(&cfg)?;
    for r in &reports {
        print!("{}", r.summary());
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed()).map(|r| r.id.as_str()).collect();
    if reports.len() > 1 {
        println!("{} of {} experiments passed", reports.len() - failed.len(), reports.len());
    }
    if cfg.format == Format::Csv {
        println!("artifacts in {}", cfg.out.display());
    }
    Ok(failed.is_empty())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match cli.command {
        Command::List => {
            list();
            ExitCode::SUCCESS
        }
        Command::Run { experiment, params, out, seed, config, format } => {
            match run(experiment, params, out, seed, config, format) {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => ExitCode::from(1),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}
