mod args;
mod commands;
mod io;

use std::io::Write;
use std::process::ExitCode;

use anyhow::{anyhow, Result};
use clap::parser::ValueSource;
use clap::{CommandFactory, FromArgMatches};
use smollision_core::protocols::{ANALYTIC_TOL, SDP_TOL};

use args::{Cli, Command};
use commands::Outcome;

const THREADS_VAR: &str = "SMOLLISION_THREADS";

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v.trim().parse().map_err(|_| anyhow!("{THREADS_VAR}={v:?} is not a thread count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: &Cli, seed_given: bool) -> Result<Outcome> {
    configure_threads()?;
    let c = &cli.common;
    if !(c.tol > 0.0) {
        return Err(anyhow!("--tol must be positive"));
    }
    let banner = |seed: u64| {
        eprintln!(
            "seed {seed}; solver tol {:e}; analytic slack {ANALYTIC_TOL:e}; sdp slack {SDP_TOL:e}; unit {}",
            c.tol,
            c.unit().name()
        )
    };
    if let Command::Verify(a) = &cli.command {
        let (out, seed) = commands::verify(a, c, seed_given)?;
        banner(seed);
        return Ok(out);
    }
    banner(c.seed);
    match &cli.command {
        Command::Divergence(a) => commands::divergence(a, c),
        Command::Entropy(a) => commands::entropy(a, c),
        Command::PaSim(a) => commands::pa_sim(a, c),
        Command::DecoupleSim(a) => commands::decouple_sim(a, c),
        Command::IidTrend(a) => commands::iid_trend(a, c),
        Command::SdpSolve(a) => commands::sdp_solve(a, c),
        Command::HashAudit(a) => commands::hash_audit(a),
        Command::Verify(_) => unreachable!(),
    }
}

fn main() -> ExitCode {
    let matches = match Cli::command().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let seed_given = matches
        .subcommand()
        .and_then(|(_, sub)| sub.value_source("seed"))
        .is_some_and(|s| s == ValueSource::CommandLine)
        || matches.value_source("seed") == Some(ValueSource::CommandLine);
    match run(&cli, seed_given) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.stdout.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            if out.failed {
                eprintln!("one or more bounds failed");
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
