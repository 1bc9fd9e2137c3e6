//! The `clubench` command-line tool: list benchmark data, run built-in or
//! external clustering methods, score stored results, plot and inspect
//! partitions.

mod args;
pub mod commands;
pub mod external;
pub mod plot;
pub mod report;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use args::{Cli, Command, Selection};

/// Parses `args` (including the program name), executes the command and
/// returns the process exit code: 0 success, 1 partial failure, 2 usage or
/// environment error.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            2
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<u8> {
    use commands::*;
    match &cli.command {
        Command::List { selection } => list(data_root(&cli.data)?, selection, out, err),
        Command::Run {
            selection,
            method,
            name,
            seed,
            workers,
            timeout,
        } => run(
            data_root(&cli.data)?,
            results_root(&cli.results)?,
            selection,
            &RunOptions {
                method,
                name: name.as_deref(),
                seed: *seed,
                workers: *workers,
                timeout: *timeout,
            },
            out,
            err,
        ),
        Command::Score {
            selection,
            methods,
            metrics,
            format,
            workers,
        } => score(
            data_root(&cli.data)?,
            results_root(&cli.results)?,
            selection,
            &ScoreOptions {
                methods,
                metrics,
                format: *format,
                workers: *workers,
            },
            out,
            err,
        ),
        Command::Plot {
            battery,
            dataset,
            labels,
            method,
            k,
            out: path,
        } => {
            let source = match (method, k) {
                (Some(method), Some(k)) => PlotSource::Stored {
                    results_root: results_root(&cli.results)?,
                    method,
                    k: *k,
                },
                _ => PlotSource::Reference(labels.unwrap_or(0)),
            };
            plot(data_root(&cli.data)?, battery, dataset, source, path, out)
        }
        Command::Confusion {
            method,
            battery,
            dataset,
            k,
        } => confusion(
            data_root(&cli.data)?,
            results_root(&cli.results)?,
            method,
            battery,
            dataset,
            *k,
            out,
        ),
    }
}
