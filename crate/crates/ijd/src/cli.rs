//! `ijd check | simulate | verify | examples`.
//!
//! Exit codes: 0 pass, 2 condition failure, 1 tool error, 64 usage error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use ijd_core::checker::run_full_report;
use ijd_core::examples::list_examples;
use ijd_core::sim::{Scheme, SimConfig, Simulator};

use crate::io::{write_binary, write_csv, EnsembleData};
use crate::report::{render_bundle, render_report};
use crate::spec::{example_spec, ModelSpecFile, Overrides};
use crate::verifier::verify;
use crate::{parallel, IjdError, Result};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAIL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

pub const SCHEMA_HELP: &str = r#"spec file (JSON, "spec_version": 1):
  model:  {"builtin": {"kind": "circle_model" | "ball_model" | "ou_cone" | "subordinator", ...}}
          or {"affine": {"generator", "alpha", "sigma", "jump_directions"}}
  chart:  {"builtin": {"kind": "circle" | "ball_annulus" | "cone" | "interval", ...}}
          or {"affine": {"offset", "basis", "ranges", "half_space"}}
  extra_charts: [chart, ...]            (optional)
  levy:   {"components": [{"density", "atoms", "singularity", "support"}]}   (optional)
  plan:   {"interior_points", "boundary_points", "random_marks", "seed", "tolerances", "cone"}
  sim:    {"dt", "horizon", "n_paths", "seed", "truncation_epsilon", "scheme", "start"}"#;

#[derive(Debug, Parser)]
#[command(name = "ijd", version, about = "Invariance checks and simulation for jump-diffusions on manifolds")]
struct Cli {
    /// Seed for sampling and simulation.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of simulated paths.
    #[arg(long, global = true)]
    paths: Option<usize>,
    /// Time step.
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Tangency and closure tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the invariance conditions.
    Check {
        spec: PathBuf,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
        /// Also write the JSON report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate an ensemble and export it.
    Simulate {
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t = SchemeArg::Ambient)]
        scheme: SchemeArg,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Conditions, both schemes and a refinement table.
    Verify {
        spec: PathBuf,
        /// Write the bundle as JSON to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Builtin examples.
    Examples {
        #[command(subcommand)]
        action: ExamplesAction,
    },
}

#[derive(Debug, Subcommand)]
enum ExamplesAction {
    List,
    /// Print the spec file of an example.
    Show { name: String },
    Run {
        name: String,
        /// Write the bundle as JSON to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SchemeArg {
    Ambient,
    Chart,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Binary,
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| IjdError::Format(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn load(path: &Path, o: &Overrides) -> Result<ModelSpecFile> {
    let mut spec = ModelSpecFile::from_path(path).map_err(|e| match e {
        IjdError::Spec { message, line, column } => {
            IjdError::Spec { message: format!("{}: {message}", path.display()), line, column }
        }
        other => other,
    })?;
    spec.apply(o);
    Ok(spec)
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    let o = Overrides { seed: cli.seed, paths: cli.paths, dt: cli.dt, tol: cli.tol };
    match cli.command {
        Command::Check { spec, json, out: file } => {
            let r = load(&spec, &o)?.resolve()?;
            let mut report = run_full_report(&r.model, &r.atlas, &r.plan);
            report.provenance.model_hash = Some(r.hash.clone());
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&report).map_err(|e| IjdError::Format(e.to_string()))?)?;
            } else {
                write!(out, "{}", render_report(&report))?;
            }
            if let Some(f) = file {
                write_json(&f, &report)?;
            }
            Ok(if report.passed() { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Simulate { spec, scheme, out: file, format } => {
            let r = load(&spec, &o)?.resolve()?;
            let scheme = match scheme {
                SchemeArg::Ambient => Scheme::Ambient,
                SchemeArg::Chart => Scheme::ChartProjected,
            };
            let config = SimConfig { scheme, ..r.sim };
            let sim = Simulator::new(&r.model, &r.atlas, &r.plan, r.start.clone(), config)?;
            let ensemble = parallel::simulate(&sim);
            let data = EnsembleData::from(&ensemble);
            let w = BufWriter::new(File::create(&file)?);
            match format {
                Format::Csv => write_csv(&data, w)?,
                Format::Binary => write_binary(&data, w)?,
            }
            writeln!(
                out,
                "wrote {} paths to {} ({} truncated)",
                ensemble.paths.len(),
                file.display(),
                ensemble.truncated()
            )?;
            Ok(EXIT_PASS)
        }
        Command::Verify { spec, out: file } => {
            let r = load(&spec, &o)?.resolve()?;
            let bundle = verify(&r);
            write!(out, "{}", render_bundle(&bundle))?;
            if let Some(f) = file {
                write_json(&f, &bundle)?;
            }
            Ok(if bundle.passed() { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Examples { action: ExamplesAction::List } => {
            for (name, description) in list_examples() {
                writeln!(out, "{name:<16} {description}")?;
            }
            Ok(EXIT_PASS)
        }
        Command::Examples { action: ExamplesAction::Show { name } } => {
            writeln!(out, "{}", example_spec(&name)?.to_json())?;
            Ok(EXIT_PASS)
        }
        Command::Examples { action: ExamplesAction::Run { name, out: file } } => {
            let mut spec = example_spec(&name)?;
            spec.apply(&o);
            let r = spec.resolve()?;
            let bundle = verify(&r);
            write!(out, "{}", render_bundle(&bundle))?;
            if let Some(f) = file {
                write_json(&f, &bundle)?;
            }
            Ok(if bundle.passed() { EXIT_PASS } else { EXIT_FAIL })
        }
    }
}

/// Runs the command line and returns the process exit code.
pub fn cli_main<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_PASS
                }
                _ => {
                    let _ = write!(err, "{e}");
                    let _ = writeln!(err, "\n{SCHEMA_HELP}");
                    EXIT_USAGE
                }
            };
        }
    };
    match run(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}
