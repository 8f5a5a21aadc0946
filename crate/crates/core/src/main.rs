use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ruinlab::config::ExperimentConfig;
use ruinlab::runner::{exit_code_for, run_approx, run_convergence, run_selftest, CsvTable};

#[derive(Parser)]
#[command(
    name = "ruinlab",
    version,
    about = "Finite-time ruin probabilities for heavy-tailed compound Poisson risk"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Terms of the second-order approximation on the (u, x) grid.
    Approx(Io),
    /// Monte Carlo against first- and second-order approximations.
    Convergence(Io),
    /// Cross-module invariant checks.
    Selftest(Io),
}

#[derive(Args)]
struct Io {
    #[arg(long)]
    config: PathBuf,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn sink(out: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit(io_args: &Io, text: &str) -> ExitCode {
    let written = sink(&io_args.out).and_then(|mut w| {
        w.write_all(text.as_bytes())?;
        w.flush()
    });
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: cannot write output: {e}");
            ExitCode::from(1)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let io_args = match &cli.command {
        Command::Approx(a) | Command::Convergence(a) | Command::Selftest(a) => a,
    };
    let cfg = match ExperimentConfig::from_path(&io_args.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let table = |r: ruinlab::Result<CsvTable>| match r {
        Ok(t) => emit(io_args, &t.to_csv_string()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e) as u8)
        }
    };
    match cli.command {
        Command::Approx(_) => table(run_approx(&cfg)),
        Command::Convergence(_) => table(run_convergence(&cfg)),
        Command::Selftest(_) => match run_selftest(&cfg) {
            Ok(report) => {
                let code = emit(io_args, &report.render());
                if report.passed() {
                    code
                } else {
                    eprintln!("selftest failures: {}", report.failures().join(", "));
                    ExitCode::from(3)
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(exit_code_for(&e) as u8)
            }
        },
    }
}
