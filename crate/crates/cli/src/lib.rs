//! Command-line front end. Exit codes: 0 success, 1 validation or usage
//! error, 2 runtime or convergence error, 3 I/O error.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use spdc_core::pipeline::{run_all, run_scenario, ExperimentConfig, Scenario, ScenarioReport, CONFIG_ENV};
use spdc_core::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "spdc", version, about = "Type-II SPDC in multimode PPKTP waveguides")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Experiment configuration (TOML); the shipped default when absent.
    #[arg(long, global = true, env = CONFIG_ENV, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Output directory; each scenario writes into its own subdirectory.
    #[arg(long, global = true, default_value = "out", value_name = "DIR")]
    out: PathBuf,

    /// Override a config value, e.g. --set pump.wavelength_nm=400.7
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Monte Carlo seed; only counting scenarios use it.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Expected rates only: no sampling, dark counts or accidentals.
    #[arg(long, global = true)]
    noiseless: bool,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Guided modes at the degenerate and pump wavelengths.
    Modes,
    /// Phase-matching band map over (λ_H, λ_V).
    Bands,
    /// Islands along the fixed-pump line and their separation.
    Islands,
    /// Heralded single-photon spectra with Gaussian fits.
    Spectra,
    /// Pump wavelength that maximizes the compensated exchange overlap.
    TunePump,
    /// Hong-Ou-Mandel delay scan with counts and dip fit.
    Hom,
    /// Polarizer fringes in the four conjugate bases.
    Fringes,
    /// Every scenario in turn.
    Experiment,
    /// Fitted visibilities and brightness per filter.
    Summary,
    /// Check the configuration and report every problem.
    Validate,
}

fn exit_code(err: &Error) -> i32 {
    match err.root() {
        Error::Validation(_) | Error::InvalidInput(_) => EXIT_VALIDATION,
        Error::Io { .. } => EXIT_IO,
        _ => EXIT_RUNTIME,
    }
}

fn load_config(common: &Common) -> Result<ExperimentConfig, Error> {
    let mut overrides = common.overrides.clone();
    if let Some(seed) = common.seed {
        overrides.push(format!("monte_carlo.seed={seed}"));
    }
    if common.noiseless {
        overrides.push("monte_carlo.noiseless=true".into());
    }
    match &common.config {
        Some(path) => ExperimentConfig::from_path(path, &overrides),
        None => ExperimentConfig::from_toml_str(ExperimentConfig::default_text(), &overrides),
    }
}

fn print_report(report: &ScenarioReport) {
    println!("[{}] wrote {}", report.scenario, report.dir.display());
    for line in &report.lines {
        println!("  {line}");
    }
}

fn dispatch(cli: &Cli) -> Result<(), Error> {
    let config = load_config(&cli.common)?;
    let scenario = match cli.command {
        Command::Validate => {
            println!("configuration valid (hash {})", config.hash());
            return Ok(());
        }
        Command::Experiment => {
            for report in run_all(&config, &cli.common.out)? {
                print_report(&report);
            }
            return Ok(());
        }
        Command::Modes => Scenario::Modes,
        Command::Bands => Scenario::Bands,
        Command::Islands => Scenario::Islands,
        Command::Spectra => Scenario::Heralded,
        Command::TunePump => Scenario::TunePump,
        Command::Hom => Scenario::Hom,
        Command::Fringes => Scenario::Fringes,
        Command::Summary => Scenario::Summary,
    };
    print_report(&run_scenario(&config, scenario, &cli.common.out)?);
    Ok(())
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to standard error.
pub fn parse_and_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    let level = match cli.common.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).try_init();

    match dispatch(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
