mod catalog;
mod commands;
mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{CommandFactory, Parser, Subcommand};

use crate::commands::Outcome;
use crate::config::{CountArgs, ExpsumArgs, FileConfig, NondegenArgs, SeriesArgs, TypicalityArgs};

/// Counting, nondegeneracy and typicality experiments for Diophantine
/// approximation on polynomial graph manifolds.
#[derive(Parser)]
#[command(name = "khintype", version)]
struct Cli {
    /// TOML file with a table per subcommand; flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact counts A(q, kappa, theta) against q^d max(kappa, phi(q))^m (CSV)
    Count(CountArgs),
    /// Exact counts against the exponential-sum majorant (CSV)
    Expsum(ExpsumArgs),
    /// Nondegeneracy conditions of the Hessian pencil at points of K (JSON)
    Nondegen(NondegenArgs),
    /// Monte Carlo phase diagram of the rank-2 and same-sign conditions (JSON)
    Typicality(TypicalityArgs),
    /// Which rate theorem applies and whether the g-series converges (JSON)
    Series(SeriesArgs),
    /// Builtin manifolds and constructions with their known verdicts
    Catalog {
        /// Recompute each verdict at the center of K
        #[arg(long)]
        verify: bool,
    },
}

/// Sizes the global pool from `KHINTYPE_THREADS`; unset means all cores.
fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("KHINTYPE_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .with_context(|| format!("KHINTYPE_THREADS must be a positive integer, got `{v}`"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    init_threads()?;
    let file = FileConfig::load(cli.config.as_deref())?;
    let outcome: Outcome = match cli.command {
        Command::Count(a) => commands::count(a.overlay(file.count))?,
        Command::Expsum(a) => commands::expsum(a.overlay(file.expsum))?,
        Command::Nondegen(a) => commands::nondegen(a.overlay(file.nondegen))?,
        Command::Typicality(a) => commands::typicality(a.overlay(file.typicality))?,
        Command::Series(a) => commands::series(a.overlay(file.series))?,
        Command::Catalog { verify } => {
            let _ = write!(std::io::stdout(), "{}", catalog::listing(verify)?);
            return Ok(ExitCode::SUCCESS);
        }
    };
    output::emit(&outcome.bytes, outcome.output.as_deref())?;
    // the summary goes wherever the data does not
    let _ = if outcome.output.is_some() {
        write!(std::io::stdout(), "{}", outcome.summary)
    } else {
        write!(std::io::stderr(), "{}", outcome.summary)
    };
    if outcome.inconclusive_dominated() {
        eprintln!("{} of {} searched verdicts inconclusive", outcome.inconclusive, outcome.searched);
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    if std::env::args_os().len() <= 1 {
        let _ = Cli::command().print_help();
        let _ = writeln!(std::io::stdout());
        return ExitCode::SUCCESS;
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
