use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pickgeom::Tolerances;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

mod commands;

use commands::{CliError, CliResult, SymbolSource};

/// Complete Pick spaces and point configurations in the complex unit ball.
#[derive(Parser)]
#[command(name = "pickgeom", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Equality tolerance.
    #[arg(long, global = true)]
    tol_eq: Option<f64>,
    /// Positive semidefiniteness tolerance.
    #[arg(long, global = true)]
    tol_psd: Option<f64>,
    /// Write the JSON report here instead of standard output.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Full invariant report for a Gram matrix.
    Analyze {
        /// Gram JSON file, or `-` for standard input.
        input: Option<String>,
        /// Point (1-based) at which invariant data are anchored.
        #[arg(long, default_value_t = 1)]
        basepoint: usize,
        /// Analyze every `.json` file in a directory.
        #[arg(long, conflicts_with = "input")]
        batch: Option<PathBuf>,
        /// Include embedding coordinates when the space has the complete Pick property.
        #[arg(long)]
        emit_points: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Points in the ball realizing a Gram matrix (or invariant data).
    Embed {
        input: String,
        #[command(flatten)]
        common: Common,
    },
    /// Classify a triple, or test a larger configuration.
    Classify {
        input: String,
        #[command(flatten)]
        common: Common,
    },
    /// Decide whether two point sets are congruent.
    Congruent {
        first: String,
        second: String,
        #[command(flatten)]
        common: Common,
    },
    /// Tree kernel, spine embedding and norm checks.
    Tree {
        input: String,
        #[command(flatten)]
        common: Common,
    },
    /// Extremal multiplier data of a Gram matrix, or the reverse.
    Hartz {
        input: String,
        /// Read multiplier data and rebuild the Gram matrix.
        #[arg(long)]
        reconstruct: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Norm of a multiplier.
    Multnorm {
        input: String,
        /// JSON array of `[re, im]` values, one per point.
        #[arg(long, conflicts_with = "extremal")]
        symbol: Option<String>,
        /// Extremal multiplier `x,y` (1-based): value `δ` at `x`, zero at `y`.
        #[arg(long)]
        extremal: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

fn tolerances(common: &Common) -> CliResult<Tolerances> {
    let mut tol = Tolerances::default();
    if let Some(eq) = common.tol_eq {
        tol = tol.with_eq(eq);
    }
    if let Some(psd) = common.tol_psd {
        tol = tol.with_psd(psd);
    }
    Ok(tol.validated()?)
}

fn pair_arg(text: &str) -> CliResult<(usize, usize)> {
    let parts: Vec<&str> = text.split(',').collect();
    let parse = |s: &str| s.trim().parse::<usize>().ok().filter(|&i| i > 0).map(|i| i - 1);
    match parts.as_slice() {
        [a, b] => match (parse(a), parse(b)) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(CliError::Input(format!("bad index pair {text:?}"))),
        },
        _ => Err(CliError::Input(format!("expected two indices, got {text:?}"))),
    }
}

fn symbol_arg(symbol: Option<String>, extremal: Option<String>) -> CliResult<SymbolSource> {
    match (symbol, extremal) {
        (Some(s), None) => {
            let text = if s.trim_start().starts_with('[') { s } else { commands::read_input(&s)? };
            Ok(SymbolSource::Values(text))
        }
        (None, Some(e)) => {
            let (x, y) = pair_arg(&e)?;
            Ok(SymbolSource::Extremal(x, y))
        }
        _ => Err(CliError::Input("give exactly one of --symbol or --extremal".into())),
    }
}

fn analyze_batch(dir: &Path, tol: &Tolerances, basepoint: usize, emit_points: bool) -> CliResult<(Value, i32)> {
    let files = commands::batch_inputs(dir)?;
    let results: Vec<(String, Value, i32)> = files
        .par_iter()
        .map(|path| {
            let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let outcome = fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
                .and_then(|text| commands::analyze(&text, tol, basepoint, emit_points));
            match outcome {
                Ok(report) => (name, report, 0),
                Err(e) => (name, json!({ "error": e.to_string(), "exit_code": e.exit_code() }), e.exit_code()),
            }
        })
        .collect();
    let code = results.iter().map(|r| r.2).max().unwrap_or(0);
    let map: Map<String, Value> = results.into_iter().map(|(name, v, _)| (name, v)).collect();
    Ok((Value::Object(map), code))
}

fn run(cli: Cli) -> CliResult<(Value, i32, Option<PathBuf>)> {
    let (value, code, common) = match cli.command {
        Command::Analyze { input, basepoint, batch, emit_points, common } => {
            let tol = tolerances(&common)?;
            if basepoint == 0 {
                return Err(CliError::Input("--basepoint is 1-based".into()));
            }
            match (batch, input) {
                (Some(dir), _) => {
                    let (v, code) = analyze_batch(&dir, &tol, basepoint - 1, emit_points)?;
                    (v, code, common)
                }
                (None, Some(input)) => {
                    (commands::analyze(&commands::read_input(&input)?, &tol, basepoint - 1, emit_points)?, 0, common)
                }
                (None, None) => return Err(CliError::Input("an input file or --batch directory is required".into())),
            }
        }
        Command::Embed { input, common } => {
            (commands::embed(&commands::read_input(&input)?, &tolerances(&common)?)?, 0, common)
        }
        Command::Classify { input, common } => {
            (commands::classify(&commands::read_input(&input)?, &tolerances(&common)?)?, 0, common)
        }
        Command::Congruent { first, second, common } => {
            let tol = tolerances(&common)?;
            let v = commands::congruence(&commands::read_input(&first)?, &commands::read_input(&second)?, &tol)?;
            (v, 0, common)
        }
        Command::Tree { input, common } => {
            (commands::tree(&commands::read_input(&input)?, &tolerances(&common)?)?, 0, common)
        }
        Command::Hartz { input, reconstruct, common } => {
            (commands::hartz(&commands::read_input(&input)?, &tolerances(&common)?, reconstruct)?, 0, common)
        }
        Command::Multnorm { input, symbol, extremal, common } => {
            let tol = tolerances(&common)?;
            let source = symbol_arg(symbol, extremal)?;
            (commands::multnorm(&commands::read_input(&input)?, source, &tol)?, 0, common)
        }
    };
    Ok((value, code, common.output))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((value, code, output)) => {
            let text = serde_json::to_string_pretty(&value).expect("reports serialize") + "\n";
            match output {
                Some(path) => {
                    if let Err(e) = fs::write(&path, text) {
                        eprintln!("error: {}: {e}", path.display());
                        return ExitCode::from(1);
                    }
                }
                None => print!("{text}"),
            }
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
