//! The `probeforge` command line: curate → rewire → probe → eval, plus
//! sweeps and a fixture demo. Every command writes one `manifest.json` into
//! its output directory.
//!
//! Exit codes: 0 success, 1 runtime or validation failure, 2 usage error.

pub mod curate;
pub mod demo;
pub mod eval;
pub mod manifest;
pub mod probe;
pub mod rewire;
pub mod sweep;

use std::ffi::OsString;

use clap::{Parser, Subcommand};

pub use manifest::{RunManifest, MANIFEST_FILE};

use crate::error::Result;

#[derive(Parser, Debug)]
#[command(name = "probeforge", version, about = "Cloze-style knowledge probing toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build full/hard cloze datasets from a triple dump.
    Curate(curate::CurateArgs),
    /// Contrastively rewire an encoder on raw sentences.
    Rewire(rewire::RewireArgs),
    /// Rank answers for every query with one probing strategy.
    Probe(probe::ProbeArgs),
    /// Score predictions: acc@k, length bins, expert rescoring.
    Eval(eval::EvalArgs),
    /// Repeat rewire/probe/eval over one axis and merge the results.
    Sweep(sweep::SweepArgs),
    /// Write the synthetic fixtures.
    Fixtures(demo::FixturesArgs),
    /// Run the whole pipeline on generated fixtures.
    Demo(demo::DemoArgs),
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Curate(a) => curate::run_curate(&a),
        Command::Rewire(a) => rewire::run_rewire(&a),
        Command::Probe(a) => probe::run_probe(&a),
        Command::Eval(a) => eval::run_eval(&a).map(|_| ()),
        Command::Sweep(a) => sweep::run_sweep(&a),
        Command::Fixtures(a) => demo::run_fixtures(&a),
        Command::Demo(a) => demo::run_demo(&a),
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Err(e) => {
            let _ = e.print();
            e.exit_code()
        }
        Ok(cli) => match run(cli) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("error: {e}");
                1
            }
        },
    }
}
