use std::path::PathBuf;
use std::process::ExitCode;

use catoptrica::{load_config, run, Command, Fault, Format, RunOptions, EXIT_CONFIG};
use clap::{Parser, ValueEnum};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Reflect,
    Focal,
    Wavefront,
    Verify,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SignsArg {
    All,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FaultArg {
    ReflectionSign,
}

/// Reflected congruences, wavefronts and caustics of a point source in a
/// cylindrical mirror.
#[derive(Debug, Parser)]
#[command(name = "catoptrica", version)]
struct Cli {
    #[arg(value_enum)]
    command: Cmd,
    #[arg(long)]
    config: PathBuf,
    /// Also run the numeric focal pipeline (`focal` only).
    #[arg(long)]
    numeric: bool,
    /// Sweep all four normal/source-ray sign choices.
    #[arg(long, value_enum)]
    signs: Option<SignsArg>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum, hide = true)]
    inject_fault: Option<FaultArg>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            return ExitCode::from(code as u8);
        }
    };
    let cfg = match load_config(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    if cli.threads == Some(0) {
        eprintln!("error: --threads must be positive");
        return ExitCode::from(EXIT_CONFIG as u8);
    }
    let command = match cli.command {
        Cmd::Reflect => Command::Reflect,
        Cmd::Focal => Command::Focal,
        Cmd::Wavefront => Command::Wavefront,
        Cmd::Verify => Command::Verify,
    };
    let opts = RunOptions {
        numeric: cli.numeric,
        signs_all: cli.signs.is_some(),
        threads: cli.threads,
        out: cli.out,
        format: cli.format.map(|f| match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }),
        fault: cli
            .inject_fault
            .map(|FaultArg::ReflectionSign| Fault::ReflectionSign),
    };
    ExitCode::from(run(command, &cfg, &opts) as u8)
}
