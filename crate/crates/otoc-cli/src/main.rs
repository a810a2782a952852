//! `otoc` — drive operator-spreading runs from JSON configs.
//!
//! Eight subcommands, one config schema (see [`config::RunConfig`]):
//! three that evolve a local operator as an MPO (`evolve`, `otoc`,
//! `entanglement`), two that analyze a recorded `t,x,C` data set (`fit`,
//! `collapse`), and three independent cross-checks (`oracle-ed`,
//! `oracle-free`, `bound-check`).
//!
//! Exit codes: 0 success; 2 the config or an input file was rejected
//! before any compute; 3 the run started and failed (or an artifact could
//! not be written); 4 the fit finished without converging (its best
//! parameters are still written).

mod config;
mod emit;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use run::{Failure, Outcome};

#[derive(Parser)]
#[command(
    name = "otoc",
    version,
    about = "Operator spreading in spin-1/2 chains: MPO evolution, OTOC and \
             entanglement grids, wavefront fits, and exact cross-checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a local operator, recording any of: OTOC grid, entanglement
    /// profile, checkpoint
    Evolve(ConfigArg),
    /// Record the squared-commutator grid C(x, t) over a set of probe sites
    Otoc(ConfigArg),
    /// Record operator entanglement (von Neumann and second Renyi) across
    /// a set of cuts
    Entanglement(ConfigArg),
    /// Fit the wavefront form exp(-lambda (x - v_B t - x0)^(1+p) / t^p)
    /// to a t,x,C data set
    Fit(ConfigArg),
    /// Rescale a t,x,C data set onto the front coordinate
    /// u = (x - v_B t - x0) / t^(p/(1+p)) implied by its own fit
    Collapse(ConfigArg),
    /// The otoc grid computed by exact diagonalization (small chains)
    OracleEd(ConfigArg),
    /// The otoc grid computed from the free-fermion closed form of the
    /// transverse-field chain
    OracleFree(ConfigArg),
    /// Dense check of the Renyi-entropy/commutator bound (small chains)
    BoundCheck(ConfigArg),
}

#[derive(Args)]
struct ConfigArg {
    /// Path to the JSON run config
    #[arg(short, long)]
    config: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, arg) = match &cli.command {
        Command::Evolve(a) => ("evolve", a),
        Command::Otoc(a) => ("otoc", a),
        Command::Entanglement(a) => ("entanglement", a),
        Command::Fit(a) => ("fit", a),
        Command::Collapse(a) => ("collapse", a),
        Command::OracleEd(a) => ("oracle-ed", a),
        Command::OracleFree(a) => ("oracle-free", a),
        Command::BoundCheck(a) => ("bound-check", a),
    };
    match dispatch(name, &arg.config) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::FitNotConverged) => {
            eprintln!("fit did not converge; the best parameters found were still written");
            ExitCode::from(4)
        }
        Err(Failure::Validation(message)) => {
            eprintln!("config error: {message}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(message)) => {
            eprintln!("run error: {message}");
            ExitCode::from(3)
        }
    }
}

fn dispatch(name: &str, config_path: &Path) -> Result<Outcome, Failure> {
    let config = RunConfig::load(config_path)?;
    config.check_command(name)?;
    match name {
        "evolve" => run::cmd_evolve(&config),
        "otoc" => run::cmd_otoc(&config),
        "entanglement" => run::cmd_entanglement(&config),
        "fit" => run::cmd_fit(&config),
        "collapse" => run::cmd_collapse(&config),
        "oracle-ed" => run::cmd_oracle_ed(&config),
        "oracle-free" => run::cmd_oracle_free(&config),
        "bound-check" => run::cmd_bound_check(&config),
        other => unreachable!("unmapped subcommand {other}"),
    }
}
