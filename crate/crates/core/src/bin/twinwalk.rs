use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use twinwalk::report::{self, Command, CommandOutput, RunConfig, ScanMode, TimeSpec, EXIT_INPUT};
use twinwalk::walk::{DEFAULT_GRID, DEFAULT_LPST_TOL, DEFAULT_Q_MAX};
use twinwalk::Error;

#[derive(Parser, Debug)]
#[command(
    name = "twinwalk",
    version,
    about = "Laplacian quantum walks on twin-edge perturbed graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// List twin vertex pairs.
    Twins(Common),
    /// Check transfer (or periodicity when --from equals --to) at one time.
    Check(Common),
    /// Search for the best transfer time.
    Scan(Common),
    /// Build a family and verify its expected witnesses.
    Family(Common),
    /// Measure deviations of the twin-pair identities.
    VerifyIdentities(Common),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Pst,
    Pgst,
}

#[derive(Args, Debug)]
struct Common {
    /// Graph or family JSON file.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    from: Option<usize>,
    #[arg(long)]
    to: Option<usize>,
    /// A real, or JSON such as '{"pi_multiple": 0.5}'.
    #[arg(long, conflicts_with = "pi_multiple")]
    time: Option<String>,
    /// Time as a multiple of pi.
    #[arg(long)]
    pi_multiple: Option<f64>,
    #[arg(long, value_enum, default_value = "pst")]
    mode: Mode,
    #[arg(long, default_value_t = DEFAULT_LPST_TOL)]
    tol: f64,
    /// Upper end of the pst scan window (real or pi-multiple JSON); default 2 pi.
    #[arg(long)]
    t_max: Option<String>,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    #[arg(long, default_value_t = DEFAULT_Q_MAX)]
    q_max: u64,
    /// Comma-separated, strictly decreasing.
    #[arg(long, value_delimiter = ',', default_values_t = [1e-1, 1e-2, 1e-3])]
    epsilons: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// Write JSON here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn build_config(command: Command, c: &Common) -> Result<RunConfig, Error> {
    let input = match &c.input {
        Some(path) => Some(
            fs::read_to_string(path)
                .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?,
        ),
        None => None,
    };
    let time = match (&c.time, c.pi_multiple) {
        (Some(s), _) => Some(TimeSpec::parse(s)?),
        (None, Some(m)) => Some(TimeSpec::PiMultiple(m)),
        (None, None) => None,
    };
    let defaults = RunConfig::default();
    Ok(RunConfig {
        command,
        input,
        from: c.from,
        to: c.to,
        time,
        mode: match c.mode {
            Mode::Pst => ScanMode::Pst,
            Mode::Pgst => ScanMode::Pgst,
        },
        lpst_tol: c.tol,
        t_max: match &c.t_max {
            Some(s) => TimeSpec::parse(s)?,
            None => defaults.t_max,
        },
        grid: c.grid,
        q_max: c.q_max,
        epsilons: c.epsilons.clone(),
        seed: c.seed,
        trials: c.trials,
    })
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let (command, common) = match &cli.command {
        Cmd::Twins(c) => (Command::Twins, c),
        Cmd::Check(c) => (Command::Check, c),
        Cmd::Scan(c) => (Command::Scan, c),
        Cmd::Family(c) => (Command::Family, c),
        Cmd::VerifyIdentities(c) => (Command::VerifyIdentities, c),
    };
    let output = match build_config(command, common) {
        Ok(cfg) => report::run(&cfg),
        Err(e) => CommandOutput::from_error(&e),
    };
    let text = serde_json::to_string_pretty(&output.json).expect("JSON values always serialize");
    match &common.out {
        Some(path) => {
            if let Err(e) = fs::write(path, text + "\n") {
                eprintln!("cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_INPUT as u8);
            }
        }
        None => println!("{text}"),
    }
    ExitCode::from(output.exit_code as u8)
}
