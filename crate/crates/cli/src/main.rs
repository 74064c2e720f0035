use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use theme_lab::{run, Command, Format, JobSpec};

/// Exact classification of themes and their families.
///
/// Exit status: 0 ok, 1 parse or validation error, 2 inconclusive,
/// 3 precision exhausted.
#[derive(Parser, Debug)]
#[command(name = "theme-lab", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Input document(s): TOML for computations, a JSON report for verify.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Working precision (number of b-adic coefficients), at least 8.
    #[arg(long)]
    prec: Option<usize>,
    /// Emit the JSON report instead of text.
    #[arg(long)]
    json: bool,
    /// Grid axis for scan, e.g. "z=-2..2 step 1/2"; may be repeated.
    #[arg(long)]
    grid: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let spec = JobSpec {
        command: cli.command,
        inputs: cli.inputs,
        prec: cli.prec,
        format: if cli.json { Format::Json } else { Format::Text },
        grid: cli.grid,
    };
    let out = run(&spec);
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    let _ = std::io::stdout().flush();
    ExitCode::from(out.code as u8)
}
