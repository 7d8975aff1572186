use std::path::PathBuf;
use std::process::ExitCode;

use atomlaser::config::{load_constants, MethodSel, RunConfig};
use atomlaser::run::{cmd_convolve, cmd_dfun, cmd_profile, prepare, Overrides};
use atomlaser::selftest::{self, Suite};
use atomlaser::CliError;
use atomlaser_core::model::ConstantsTable;
use atomlaser_core::quadrature::QuadSpec;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "atomlaser", version, about = "Outcoupled atom-laser beams and BEC spectral resolution functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Alternative physical-constants table (JSON).
    #[arg(long, global = true, hide = true)]
    constants: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Beam density over a detector grid for both methods.
    Profile(RunArgs),
    /// Spectral resolution function D(nu) per detector.
    Dfun(RunArgs),
    /// Convolve D with a noise spectrum.
    Convolve(RunArgs),
    /// Run the invariant suites.
    Selftest {
        #[arg(value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Relative tolerance for suites that integrate numerically.
        #[arg(long)]
        tol: Option<f64>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Relative quadrature tolerance, overriding the config.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum)]
    method: Option<MethodSel>,
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let table = match &cli.constants {
        Some(p) => load_constants(p)?,
        None => ConstantsTable::CODATA_2018,
    };
    let (args, command): (RunArgs, fn(&_) -> _) = match cli.command {
        Command::Selftest { suite, tol } => {
            let tol = tol.unwrap_or(QuadSpec::default().rel_tol);
            let checks = selftest::run(suite, &table, tol);
            let failed = checks.iter().filter(|c| !c.pass).count();
            for c in &checks {
                println!("{}", serde_json::to_string(c).expect("check serializes"));
            }
            println!(
                "{}",
                serde_json::json!({ "passed": checks.len() - failed, "failed": failed })
            );
            return if failed == 0 { Ok(()) } else { Err(CliError::SelfTest { failed }) };
        }
        Command::Profile(a) => (a, cmd_profile),
        Command::Dfun(a) => (a, cmd_dfun),
        Command::Convolve(a) => (a, cmd_convolve),
    };
    let config = RunConfig::load(&args.config)?;
    let overrides = Overrides { out: args.out, threads: args.threads, rel_tol: args.tol, method: args.method };
    let run = prepare(config, &overrides, &table)?;
    for p in command(&run)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
