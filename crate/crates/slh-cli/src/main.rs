//! `slh`: command-line front end for the quantum input-output calculus.
//!
//! Subcommands: validate, ito, stratonovich, series, concat, reduce,
//! evolve, sweep, wire, parity. Exit codes: 0 success, 2 model or usage
//! failure, 3 numerical failure; every error is one `CLASS: message` line
//! on stderr.

mod commands;
mod csvout;
mod error;
mod flags;
mod model;

use std::process::ExitCode;

use error::{CliError, CliResult};
use flags::Flags;

const USAGE: &str = "usage: slh <command> [args]

commands:
  validate <model>                      check a model file against its invariants
  ito <stratonovich-model>              Stratonovich coefficients -> Ito (S, L, H)
  stratonovich <slh-model>              Ito (S, L, H) -> Stratonovich coefficients
  series <upstream> <downstream>        series product of two components
  concat <first> <second>               concatenation of two components
  reduce <network-model>                reduce a network to one component
  evolve <model> --t-end T --dt DT      integrate the master equation (CSV)
      [--observables FILE]
  sweep <linear-passive-model>          frequency response over a grid (CSV)
      --omega-min A --omega-max B --omega-steps N
  wire --epsilon E --grid-half-width X  propagate a wire packet (CSV)
      --grid-spacing H --packet-center C --packet-width W --times T1,T2,...
  parity <fermi-model>                  Fermi parity-table diagnostics

common flags: --tol TOL (default 1e-10), --out PATH (default stdout)";

fn dispatch(command: &str, flags: Flags) -> CliResult<()> {
    match command {
        "validate" => commands::cmd_validate(flags),
        "ito" => commands::cmd_ito(flags),
        "stratonovich" => commands::cmd_stratonovich(flags),
        "series" => commands::cmd_series(flags),
        "concat" => commands::cmd_concat(flags),
        "reduce" => commands::cmd_reduce(flags),
        "evolve" => commands::cmd_evolve(flags),
        "sweep" => commands::cmd_sweep(flags),
        "wire" => commands::cmd_wire(flags),
        "parity" => commands::cmd_parity(flags),
        other => Err(CliError::usage(format!(
            "unknown command {other:?} (try `slh help`)"
        ))),
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(command) = args.first() else {
        eprintln!("{USAGE}");
        return ExitCode::from(2);
    };
    if command == "help" || command == "--help" || command == "-h" {
        println!("{USAGE}");
        return ExitCode::SUCCESS;
    }
    let flags = match Flags::parse(&args[1..]) {
        Ok(flags) => flags,
        Err(err) => {
            eprintln!("{err}");
            return ExitCode::from(err.exit_code as u8);
        }
    };
    match dispatch(command, flags) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.exit_code as u8)
        }
    }
}
