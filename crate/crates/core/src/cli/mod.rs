//! Command-line front end.
//!
//! Every command prints a JSON run report (or a CSV table with
//! `--output csv`) and exits with 0 on success, 1 on input errors, 2 on
//! mathematical infeasibility and 3 when an internal cross-check fails.

mod commands;

pub use commands::{
    apply_lambda_rule, cmd_constant, cmd_demo_pointmass, cmd_dual_check, cmd_gen, cmd_witness,
    dirac_instance, random_test_family, CommandOutput, ConstantMethod, DualRow, Exit, GenSpec,
    LambdaRule, Settings, WitnessConstant, DEMO_CONSTANTS,
};

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::error::Error;
use crate::instance::{load_instance_file, Instance};
use crate::sparse::WitnessMode;

#[derive(Debug, Parser)]
#[command(
    name = "carleson",
    version,
    about = "Carleson constants and sparse witnesses"
)]
pub struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub output: OutputFormat,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tolerance: f64,
    /// Largest set count for enumeration-based checks.
    #[arg(long, global = true, default_value_t = 20)]
    pub budget: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Fractional,
    Integral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Cubes,
    Rectangles,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the Carleson constant and an extremal subcollection.
    Constant {
        instance: PathBuf,
        /// Enumerate every subcollection.
        #[arg(long)]
        exact: bool,
        /// Min-cut ratio search (default).
        #[arg(long)]
        flow: bool,
        /// Run both and require agreement.
        #[arg(long)]
        both: bool,
        /// Also evaluate the union formulation.
        #[arg(long)]
        unions: bool,
    },
    /// Build and verify a sparse witness.
    Witness {
        instance: PathBuf,
        #[arg(long = "C", conflicts_with = "auto")]
        c: Option<f64>,
        /// Use the least feasible constant.
        #[arg(long)]
        auto: bool,
        #[arg(long, value_enum, default_value_t = ModeArg::Fractional)]
        mode: ModeArg,
        /// Write the solved flow network, one arc per line.
        #[arg(long)]
        dump_flow: Option<PathBuf>,
    },
    /// Sample the dual estimate at the computed constant.
    DualCheck {
        instance: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Generate a dyadic instance.
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
        #[arg(long, default_value_t = 1)]
        dimension: usize,
        #[arg(long, default_value_t = 0)]
        depth: u32,
        #[arg(long)]
        depth_x: Option<u32>,
        #[arg(long)]
        depth_y: Option<u32>,
        /// mass | unit | random | random(N)
        #[arg(long, default_value = "mass")]
        lambda: LambdaRule,
        /// Write the instance here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Point-mass obstruction, end to end.
    DemoPointmass,
}

#[derive(Debug, Serialize)]
pub struct Digest {
    pub atoms: usize,
    pub sets: usize,
    pub total_mass: f64,
}

impl Digest {
    pub fn of(inst: &Instance) -> Self {
        Digest {
            atoms: inst.system.measure().len(),
            sets: inst.system.len(),
            total_mass: inst.system.measure().total_mass(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance: Option<Digest>,
    pub result: Value,
    pub elapsed_ms: f64,
    pub version: &'static str,
}

fn write_csv(out: &mut dyn Write, table: &[Vec<String>]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in table {
        w.write_record(row)?;
    }
    w.flush()
}

fn execute(
    cli: &Cli,
    err: &mut dyn Write,
) -> Result<(Option<Digest>, CommandOutput, Option<String>), Error> {
    let settings = Settings {
        seed: cli.seed,
        tolerance: cli.tolerance,
        budget: cli.budget,
    };
    match &cli.command {
        Command::Constant {
            instance,
            exact,
            flow,
            both,
            unions,
        } => {
            let inst = load_instance_file(instance)?;
            let method = match (*exact, *flow, *both) {
                (_, _, true) | (true, true, _) => ConstantMethod::Both,
                (true, false, false) => ConstantMethod::Exact,
                _ => ConstantMethod::Flow,
            };
            let out = cmd_constant(&inst, method, *unions, &settings)?;
            Ok((Some(Digest::of(&inst)), out, None))
        }
        Command::Witness {
            instance,
            c,
            auto,
            mode,
            dump_flow,
        } => {
            let inst = load_instance_file(instance)?;
            let constant = match (c, auto) {
                (Some(c), false) => WitnessConstant::Fixed(*c),
                (None, true) => WitnessConstant::Auto,
                _ => {
                    return Err(Error::InvalidParameter(
                        "give exactly one of --C <value> or --auto".into(),
                    ))
                }
            };
            let mode = match mode {
                ModeArg::Fractional => WitnessMode::Fractional,
                ModeArg::Integral => WitnessMode::Integral,
            };
            let out = cmd_witness(&inst, constant, mode, dump_flow.as_deref(), &settings)?;
            Ok((Some(Digest::of(&inst)), out, None))
        }
        Command::DualCheck { instance, samples } => {
            let inst = load_instance_file(instance)?;
            let out = cmd_dual_check(&inst, *samples, &settings)?;
            Ok((Some(Digest::of(&inst)), out, None))
        }
        Command::Gen {
            kind,
            dimension,
            depth,
            depth_x,
            depth_y,
            lambda,
            out,
        } => {
            let spec = match kind {
                GenKind::Cubes => GenSpec::Cubes {
                    dimension: *dimension,
                    depth: *depth,
                },
                GenKind::Rectangles => GenSpec::Rectangles {
                    depth_x: depth_x.unwrap_or(*depth),
                    depth_y: depth_y.unwrap_or(*depth),
                },
            };
            let inst = cmd_gen(spec, *lambda, &settings)?;
            let json = inst.to_json();
            let digest = Digest::of(&inst);
            match out {
                Some(path) => {
                    std::fs::write(path, &json).map_err(|e| {
                        Error::InvalidParameter(format!("cannot write {}: {e}", path.display()))
                    })?;
                    let payload = serde_json::json!({ "written": path.display().to_string() });
                    let output = CommandOutput {
                        payload,
                        table: vec![
                            vec!["path".into(), "atoms".into(), "sets".into()],
                            vec![
                                path.display().to_string(),
                                digest.atoms.to_string(),
                                digest.sets.to_string(),
                            ],
                        ],
                        exit: Exit::Success,
                    };
                    Ok((Some(digest), output, None))
                }
                None => {
                    let output = CommandOutput {
                        payload: Value::Null,
                        table: Vec::new(),
                        exit: Exit::Success,
                    };
                    Ok((Some(digest), output, Some(json)))
                }
            }
        }
        Command::DemoPointmass => {
            let out = cmd_demo_pointmass(&settings)?;
            for row in &out.table {
                let _ = writeln!(
                    err,
                    "{:<12} {:<20} {:>8}  {}",
                    row[0], row[1], row[2], row[3]
                );
            }
            Ok((None, out, None))
        }
    }
}

/// Parses `args` (including the program name) and runs one command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    Exit::Input as i32
                }
            };
            return code;
        }
    };
    let started = Instant::now();
    let (digest, output, raw) = match execute(&cli, err) {
        Ok(done) => done,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            let code = match e {
                Error::NoConvergence(_) | Error::Numerical(_) => Exit::Internal,
                _ => Exit::Input,
            };
            return code as i32;
        }
    };
    let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;

    if let Some(raw) = raw {
        let _ = writeln!(out, "{raw}");
        return output.exit as i32;
    }
    let written = match cli.output {
        OutputFormat::Csv => write_csv(out, &output.table),
        OutputFormat::Json => {
            let report = RunReport {
                command: args
                    .iter()
                    .skip(1)
                    .map(|a| a.to_string_lossy().into_owned())
                    .collect(),
                instance: digest,
                result: output.payload,
                elapsed_ms,
                version: env!("CARGO_PKG_VERSION"),
            };
            serde_json::to_writer_pretty(&mut *out, &report)
                .map_err(std::io::Error::from)
                .and_then(|_| writeln!(out))
        }
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: cannot write output: {e}");
        return Exit::Internal as i32;
    }
    output.exit as i32
}
