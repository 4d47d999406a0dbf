use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use spacelike_cli::config::{Command, FlagConfig, Overrides, RunConfig};
use spacelike_core::io::Encoding;

#[derive(Parser, Debug)]
#[command(name = "spacelike", version, about = "Spacelike CMC graph solves and verification reports")]
struct Cli {
    command: Command,
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Problem JSON, or a `.field.json` header for analyze, verify-estimate and codim2.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Run directory (overrides SPACELIKE_OUT_DIR).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    deterministic: bool,
    /// Nodes per axis; a comma-separated list is accepted.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<usize>>,
    #[arg(long = "H", allow_negative_numbers = true)]
    mean_curvature: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    a_list: Option<Vec<f64>>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    fields: Option<usize>,
    #[arg(long, value_parser = parse_encoding)]
    encoding: Option<Encoding>,
}

fn parse_encoding(s: &str) -> Result<Encoding, String> {
    match s {
        "csv" => Ok(Encoding::Csv),
        "binary" | "bin" => Ok(Encoding::Binary),
        _ => Err(format!("unknown encoding {s:?} (csv or binary)")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { spacelike_cli::EXIT_SCHEMA } else { 0 };
            return ExitCode::from(code as u8);
        }
    };
    let flags = FlagConfig {
        config: cli.config,
        input: cli.input,
        out: cli.out,
        seed: cli.seed,
        deterministic: cli.deterministic,
        overrides: Overrides {
            grid: cli.grid,
            mean_curvature: cli.mean_curvature,
            c: cli.c,
            a_list: cli.a_list,
            tol: cli.tol,
            samples: cli.samples,
            fields: cli.fields,
        },
        encoding: cli.encoding,
    };
    let code = match RunConfig::resolve(cli.command, flags) {
        Ok(cfg) => spacelike_cli::run(&cfg),
        Err(e) => {
            eprintln!("spacelike: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
