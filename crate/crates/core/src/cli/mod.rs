//! `sparseweak` command line front end.
//!
//! Exit codes: 0 success, 1 failed invariant (`verify`), 2 bad config,
//! parameter or IO, 3 non-integrable weight, 4 violated hypothesis,
//! 5 degenerate fit.

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use config::Config;

#[derive(Parser, Debug)]
#[command(name = "sparseweak", version, about = "Sparse dyadic operators and weighted weak-type bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// JSON config (a previous report is accepted too).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for random instances.
    #[arg(long)]
    seed: Option<u64>,
    /// Lattice depth K.
    #[arg(long)]
    depth: Option<u32>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-check lines (`verify`) and written paths.
    #[arg(long, short)]
    verbose: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Weight characteristics of the configured `w` and `sigma`.
    Char(Common),
    /// Evaluate the sparse operator on the configured function.
    Apply(Common),
    /// Lower bound, testing constant and closed-form bounds.
    Testing(Common),
    /// Exponent-recovery sweeps over the theta grid.
    Sharpness(Common),
    /// Built-in invariant checks.
    Verify(Common),
}

pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NON_INTEGRABLE: i32 = 3;
pub const EXIT_HYPOTHESIS: i32 = 4;
pub const EXIT_DEGENERATE: i32 = 5;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonIntegrable { .. } => EXIT_NON_INTEGRABLE,
        Error::Hypothesis(_) => EXIT_HYPOTHESIS,
        Error::DegenerateFit(_) => EXIT_DEGENERATE,
        _ => EXIT_CONFIG,
    }
}

fn load(c: &Common, is_testing: bool) -> Result<(Config, crate::ExponentParams), (i32, String)> {
    let mut cfg = match &c.config {
        Some(p) => Config::load(p).map_err(|e| (EXIT_CONFIG, e))?,
        None => Config::default(),
    };
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(d) = c.depth {
        cfg.depth = d;
        if is_testing {
            cfg.testing.depth = d;
        }
    }
    if c.verbose {
        cfg.verify.verbose = true;
    }
    cfg.resolve().map_err(|e| (exit_code(&e), e.to_string()))
}

fn execute(cmd: Command) -> Result<(), (i32, String)> {
    let (common, name) = match &cmd {
        Command::Char(c) => (c, "char"),
        Command::Apply(c) => (c, "apply"),
        Command::Testing(c) => (c, "testing"),
        Command::Sharpness(c) => (c, "sharpness"),
        Command::Verify(c) => (c, "verify"),
    };
    let (cfg, prm) = load(common, name == "testing")?;
    if name == "verify" {
        let outcomes = verify::run_checks(&cfg);
        let mut first = None;
        for o in &outcomes {
            if cfg.verify.verbose {
                match &o.result {
                    Ok(()) => println!("ok   {}", o.name),
                    Err(e) => println!("FAIL {}: {e}", o.name),
                }
            }
            if first.is_none() {
                if let Err(e) = &o.result {
                    first = Some(format!("{}: {e}", o.name));
                }
            }
        }
        return match first {
            Some(msg) => Err((EXIT_INVARIANT, format!("check failed: {msg}"))),
            None => {
                println!("all {} checks passed", outcomes.len());
                Ok(())
            }
        };
    }
    let run = match name {
        "char" => commands::char(&cfg, &prm),
        "apply" => commands::apply(&cfg, &prm),
        "testing" => commands::testing(&cfg, &prm),
        _ => commands::sharpness(&cfg, &prm),
    };
    let done = run.map_err(|e| (exit_code(&e), e.to_string()))?;
    println!("{}", done.summary);
    // `char` prints to stdout only unless an output directory is requested.
    let out = match (&common.out, name) {
        (Some(o), _) => Some(o.clone()),
        (None, "char") => None,
        (None, _) => Some(PathBuf::from("sparseweak-out")),
    };
    if let Some(dir) = out {
        let written = done
            .outputs
            .write_all(&dir)
            .map_err(|e| (EXIT_CONFIG, format!("cannot write {}: {e}", dir.display())))?;
        if common.verbose {
            for p in written {
                eprintln!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}

/// Parses `args` (program name first) and runs the command; returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    }
}
