use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use entangle_cli::error::{CliError, Result, EXIT_OK};
use entangle_cli::input::{
    counts_to_csv, matrix_to_json, parse_input_str, parse_matrix_str, parse_params_str,
    read_source, resolve_settings, to_json,
};
use entangle_cli::report::{analyze, decompose, tomography, AnalyzeOptions, VerdictReport};
use entangle_cli::Payload;
use entangle_core::entanglement::DEFAULT_BOUNDARY_TOL;
use entangle_core::simulate::{ideal_counts, sample_counts, RngSeed, SimulationPlan};
use entangle_core::states::{validate_density, x_state_to_density, DEFAULT_NOISE_FLOOR, STATE_TOL};

/// Entanglement verdicts for two-photon polarization states.
#[derive(Parser)]
#[command(name = "entangle-verdict", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Io {
    /// Input file; stdin when absent or `-`.
    #[arg(long, short)]
    input: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
#[group(multiple = false)]
struct Format {
    /// Compact JSON (default).
    #[arg(long)]
    json: bool,
    /// Indented JSON.
    #[arg(long)]
    pretty: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Judge a density matrix (JSON) or coincidence counts (CSV).
    Analyze {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        format: Format,
        #[arg(long, default_value_t = DEFAULT_NOISE_FLOOR)]
        noise_floor: f64,
        #[arg(long, default_value_t = DEFAULT_BOUNDARY_TOL)]
        boundary_tol: f64,
        /// Settings the counts must cover: `standard16` or a CSV file.
        #[arg(long)]
        settings: Option<String>,
        /// Analyze every .json/.csv file in a directory.
        #[arg(long, conflicts_with = "input")]
        batch: Option<PathBuf>,
        #[arg(long, hide = true)]
        inject_contradiction: bool,
    },
    /// Eight-term product decomposition of symmetric X-form parameters.
    Decompose {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        format: Format,
    },
    /// Reconstruct a density matrix from counts.
    Tomo {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        format: Format,
        #[arg(long)]
        settings: Option<String>,
        /// Skip the projection onto physical states.
        #[arg(long)]
        raw: bool,
    },
    /// Simulate coincidence counts for a matrix or X-parameter file.
    Simulate {
        #[command(flatten)]
        io: Io,
        /// Mean coincidences per setting.
        #[arg(long, short = 'n')]
        counts: u64,
        #[arg(long, env = "ENTANGLE_VERDICT_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "standard16")]
        settings: String,
        /// Rounded expected counts instead of Poisson samples.
        #[arg(long)]
        ideal: bool,
    },
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

fn analyze_path(path: Option<&Path>, options: &AnalyzeOptions) -> Result<VerdictReport> {
    let (id, text) = read_source(path)?;
    analyze(&parse_input_str(&id, &text)?, options)
}

fn batch_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let io_err = |source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err)? {
        let path = entry.map_err(io_err)?.path();
        let ext = path.extension().and_then(|e| e.to_str());
        if path.is_file() && matches!(ext, Some("json") | Some("csv")) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Analyze {
            io,
            format,
            noise_floor,
            boundary_tol,
            settings,
            batch,
            inject_contradiction,
        } => {
            let options = AnalyzeOptions {
                noise_floor,
                boundary_tol,
                settings: settings.as_deref().map(resolve_settings).transpose()?,
                inject_contradiction,
            };
            if let Some(dir) = batch {
                let results: Vec<_> = batch_files(&dir)?
                    .par_iter()
                    .map(|p| (p.clone(), analyze_path(Some(p), &options)))
                    .collect();
                let mut code = EXIT_OK;
                let mut reports = Vec::new();
                for (path, result) in results {
                    match result {
                        Ok(r) => reports.push(r),
                        Err(e) => {
                            eprintln!("{}: {e}", path.display());
                            code = code.max(e.exit_code());
                        }
                    }
                }
                write_output(io.output.as_deref(), &to_json(&reports, format.pretty))?;
                return Ok(code);
            }
            let report = analyze_path(io.input.as_deref(), &options)?;
            write_output(io.output.as_deref(), &to_json(&report, format.pretty))?;
        }
        Command::Decompose { io, format } => {
            let (_, text) = read_source(io.input.as_deref())?;
            let report = decompose(&parse_params_str(&text)?)?;
            write_output(io.output.as_deref(), &to_json(&report, format.pretty))?;
        }
        Command::Tomo {
            io,
            format,
            settings,
            raw,
        } => {
            let (id, text) = read_source(io.input.as_deref())?;
            let doc = parse_input_str(&id, &text)?;
            if let (Some(spec), Payload::Counts(records)) = (settings, &doc.payload) {
                let missing: Vec<_> = resolve_settings(&spec)?
                    .into_iter()
                    .filter(|s| !records.iter().any(|r| r.setting == *s))
                    .collect();
                if !missing.is_empty() {
                    return Err(entangle_core::Error::IncompleteSettings(missing).into());
                }
            }
            let m = tomography(&doc, !raw)?;
            write_output(io.output.as_deref(), &matrix_to_json(&m, format.pretty))?;
        }
        Command::Simulate {
            io,
            counts,
            seed,
            settings,
            ideal,
        } => {
            let (id, text) = read_source(io.input.as_deref())?;
            let state = if text.contains("\"matrix\"") {
                let Payload::Matrix(m) = parse_matrix_str(&id, &text)?.payload else {
                    unreachable!("matrix parser yields a matrix payload")
                };
                validate_density(&m, STATE_TOL)?
            } else {
                x_state_to_density(&parse_params_str(&text)?)?
            };
            let plan =
                SimulationPlan::new(state, resolve_settings(&settings)?, counts, RngSeed(seed))?;
            let records = if ideal {
                ideal_counts(&plan)
            } else {
                sample_counts(&plan)
            };
            write_output(io.output.as_deref(), &counts_to_csv(&records))?;
        }
    }
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
