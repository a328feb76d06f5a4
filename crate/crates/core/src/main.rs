use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use horoextreme::harness::config::{parse_config_file, parse_list};
use horoextreme::harness::{run, Experiment, ExperimentConfig, Format, Overrides};

const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_CELL_FAILURE: u8 = 4;

/// Monte Carlo checks for cusp excursions of the unipotent flow on the space
/// of unimodular planar lattices.
#[derive(Debug, Parser)]
#[command(name = "horoextreme", version)]
struct Cli {
    /// hit-prob, evl, moments, tail, siegel-check, lemma-checks or ky-integral
    #[arg(value_parser = parse_experiment)]
    experiment: Experiment,
    /// Comma-separated r values
    #[arg(long = "r", allow_hyphen_values = true, value_name = "LIST")]
    r: Option<String>,
    /// Comma-separated flow horizons
    #[arg(long = "T", value_name = "LIST")]
    horizons: Option<String>,
    #[arg(long)]
    samples: Option<u64>,
    /// Defaults to $HOROEXTREME_SEED, then 1
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Tail upper constant used for reporting
    #[arg(long)]
    c1: Option<f64>,
    /// Output file; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = parse_format)]
    format: Option<Format>,
    /// File of key=value lines using the long flag names
    #[arg(long)]
    config: Option<PathBuf>,
}

fn parse_experiment(s: &str) -> Result<Experiment, String> {
    s.parse().map_err(|e: horoextreme::Error| e.to_string())
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: horoextreme::Error| e.to_string())
}

fn usage_error(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("horoextreme: {message}");
    ExitCode::from(EXIT_USAGE)
}

fn flag_overrides(cli: &Cli) -> horoextreme::Result<Overrides> {
    Ok(Overrides {
        r_values: cli.r.as_deref().map(|s| parse_list("r", s)).transpose()?,
        t_values: cli.horizons.as_deref().map(|s| parse_list("T", s)).transpose()?,
        samples: cli.samples,
        seed: cli.seed,
        workers: cli.workers,
        c1_parameter: cli.c1,
        output_path: cli.out.clone(),
        format: cli.format,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut config = ExperimentConfig::new(cli.experiment);

    match Overrides::from_env() {
        Ok(env) => config.apply(&env),
        Err(e) => return usage_error(e),
    }
    if let Some(path) = &cli.config {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("horoextreme: cannot read {}: {e}", path.display());
                return ExitCode::from(EXIT_IO);
            }
        };
        match parse_config_file(&text) {
            Ok(file) => config.apply(&file),
            Err(e) => return usage_error(e),
        }
    }
    match flag_overrides(&cli) {
        Ok(flags) => config.apply(&flags),
        Err(e) => return usage_error(e),
    }

    let report = match run(&config) {
        Ok(r) => r,
        Err(e) => return usage_error(e),
    };
    if let Err(e) = report.emit(config.format, config.output_path.as_deref()) {
        eprintln!("horoextreme: cannot write report: {e}");
        return ExitCode::from(EXIT_IO);
    }
    if report.has_failures() {
        for row in report.rows.iter().filter(|r| r.is_failure()) {
            eprintln!("horoextreme: {} failed: {}", row.experiment, row.target_source);
        }
        return ExitCode::from(EXIT_CELL_FAILURE);
    }
    ExitCode::SUCCESS
}
