use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use excitonscope::config::{load_config_as, Scenario};
use excitonscope::output::Format;
use excitonscope::scenario::{run_scenario, MANIFEST_NAME};
use excitonscope::Error;

#[derive(Parser)]
#[command(name = "excitonscope", version, about = "Entangled two-photon excitation and coincidence detection of exciton aggregates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exciton energies, dipoles, widths and transport matrices.
    ModelInfo(Common),
    /// Joint spectral intensity of the configured photon pair.
    Jsa(Common),
    /// Two-exciton population prepared by the configured source.
    Excite(Common),
    /// Prepared populations for a list of targets.
    ExciteScan(Common),
    /// Two-exciton transport snapshots.
    Propagate(Common),
    /// Filtered two-photon coincidence signal on a detector grid.
    Coincidence(Common),
    /// Coincidence signal for the six-panel variation set.
    PanelStudy(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    /// Run configuration (JSON).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory; overrides the config.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads; overrides the config.
    #[arg(long, value_name = "N", env = "EXCITONSCOPE_THREADS")]
    threads: Option<usize>,
    /// Table format for data artifacts.
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

fn split(cmd: Command) -> (Scenario, Common) {
    match cmd {
        Command::ModelInfo(c) => (Scenario::ModelInfo, c),
        Command::Jsa(c) => (Scenario::Jsa, c),
        Command::Excite(c) => (Scenario::Excite, c),
        Command::ExciteScan(c) => (Scenario::ExciteScan, c),
        Command::Propagate(c) => (Scenario::Propagate, c),
        Command::Coincidence(c) => (Scenario::Coincidence, c),
        Command::PanelStudy(c) => (Scenario::PanelStudy, c),
    }
}

fn run(scenario: Scenario, args: Common) -> excitonscope::Result<PathBuf> {
    let mut cfg = load_config_as(&args.config, Some(scenario))?;
    if let Some(out) = args.out {
        cfg.output_dir = out;
    }
    if let Some(n) = args.threads {
        cfg.threads = Some(n);
    }
    let problems = cfg.problems();
    if !problems.is_empty() {
        return Err(Error::Config(problems));
    }
    let format = match args.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    let manifest = run_scenario(&cfg, format)?;
    for w in &manifest.warnings {
        log::warn!("{w}");
    }
    Ok(cfg.output_dir.join(MANIFEST_NAME))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (scenario, args) = split(cli.command);
    match run(scenario, args) {
        Ok(manifest) => {
            println!("{}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            match &e {
                Error::Config(problems) => {
                    eprintln!("config error:");
                    for p in problems {
                        eprintln!("  {p}");
                    }
                }
                other => eprintln!("error: {other}"),
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
