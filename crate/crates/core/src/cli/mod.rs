//! Command-line front end: argument parsing, dispatch and exit codes.
//!
//! Every subcommand produces a table. JSON output wraps it with an echo of
//! the parameters and a diagnostics record; CSV output is the bare table.

mod commands;
mod output;

use std::ffi::OsString;
use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::error::Error;
use crate::qmodel::StateLabel;
use crate::spectra::Regime;

pub use output::{fixed, render, Report};

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_COMPUTATION: i32 = 3;
pub const EXIT_IO: i32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Adiabatic,
    #[value(alias = "rotating")]
    Nonadiabatic,
}

impl From<RegimeArg> for Regime {
    fn from(r: RegimeArg) -> Self {
        match r {
            RegimeArg::Adiabatic => Regime::Adiabatic,
            RegimeArg::Nonadiabatic => Regime::Nonadiabatic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Closed,
    Lattice,
}

#[derive(Debug, Parser)]
#[command(name = "qubit-topo", version, about = "Berry phases, Chern numbers and phase diagrams of a driven two-site spin qubit")]
pub struct Cli {
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,

    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for parallel sweeps (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct DriveArgs {
    #[arg(long, default_value = "2")]
    pub b: f64,
    #[arg(long = "t-lr", default_value = "1")]
    pub t_lr: f64,
    /// Phase difference between the site drives (radians, or `pi`, `pi/2`, `3pi/4`, ...).
    #[arg(long, default_value = "pi", value_parser = parse_angle, allow_hyphen_values = true)]
    pub phi: f64,
    #[arg(long, default_value = "0")]
    pub omega: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energies (adiabatic) or quasienergies (rotating frame) versus θ.
    Spectrum(SpectrumArgs),
    /// Berry or A-A phases versus θ: numerical, closed form and their difference.
    Berry(BerryArgs),
    /// Per-band Chern numbers by the lattice and closed-form methods.
    Chern(ChernArgs),
    /// One-period evolution of the cyclic states and the phases they pick up.
    Evolve(EvolveArgs),
    /// Topological class over a (B, Ω) grid.
    PhaseDiagram(PhaseDiagramArgs),
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub drive: DriveArgs,
    #[arg(long, value_enum, default_value = "adiabatic")]
    pub regime: RegimeArg,
    /// Single polar angle; overrides --theta-steps.
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Number of θ samples spanning [0, π] inclusive.
    #[arg(long, default_value = "200")]
    pub theta_steps: usize,
}

#[derive(Debug, Args)]
pub struct BerryArgs {
    #[command(flatten)]
    pub drive: DriveArgs,
    #[arg(long, value_enum, default_value = "adiabatic")]
    pub regime: RegimeArg,
    /// Comma-separated λ = 2t_LR/B values; each sets t_LR = λB/2.
    #[arg(long, value_delimiter = ',')]
    pub lambda: Vec<f64>,
    #[arg(long, default_value = "65")]
    pub theta_steps: usize,
    #[arg(long, default_value_t = crate::geometry::DEFAULT_WILSON_STEPS)]
    pub wilson_steps: usize,
}

#[derive(Debug, Args)]
pub struct ChernArgs {
    #[command(flatten)]
    pub drive: DriveArgs,
    #[arg(long, value_enum, default_value = "adiabatic")]
    pub regime: RegimeArg,
    /// Lattice points along θ and along varphi.
    #[arg(long, default_value_t = crate::phasescan::DEFAULT_LATTICE_RESOLUTION)]
    pub resolution: usize,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub drive: DriveArgs,
    #[arg(long, default_value = "pi/3", value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta: f64,
    /// Restrict to one band, e.g. `m1+_m2-`.
    #[arg(long)]
    pub label: Option<StateLabel>,
    #[arg(long, default_value = "100000")]
    pub rk4_steps: usize,
}

#[derive(Debug, Args)]
pub struct PhaseDiagramArgs {
    #[arg(long = "t-lr", default_value = "1")]
    pub t_lr: f64,
    #[arg(long, default_value = "pi", value_parser = parse_angle, allow_hyphen_values = true)]
    pub phi: f64,
    #[arg(long, default_value = "0")]
    pub b_min: f64,
    #[arg(long, default_value = "6")]
    pub b_max: f64,
    #[arg(long, default_value = "0")]
    pub omega_min: f64,
    #[arg(long, default_value = "6")]
    pub omega_max: f64,
    #[arg(long, default_value = "60")]
    pub n_b: usize,
    #[arg(long, default_value = "60")]
    pub n_omega: usize,
    #[arg(long, value_enum, default_value = "closed")]
    pub method: MethodArg,
    #[arg(long, default_value_t = crate::phasescan::DEFAULT_LATTICE_RESOLUTION)]
    pub resolution: usize,
}

/// Parses radians given as a decimal or as a rational multiple of π
/// (`pi`, `-pi/2`, `2pi/3`, `3*pi/4`).
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let s = text.trim().to_ascii_lowercase();
    let bad = || format!("cannot read `{text}` as an angle");
    let value = match s.find("pi") {
        Some(at) => {
            let coef = s[..at].trim_end_matches('*');
            let coef = match coef {
                "" | "+" => 1.0,
                "-" => -1.0,
                c => c.parse::<f64>().map_err(|_| bad())?,
            };
            let rest = &s[at + 2..];
            let denom = if rest.is_empty() {
                1.0
            } else {
                rest.strip_prefix('/').ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?
            };
            if denom == 0.0 {
                return Err(bad());
            }
            coef * PI / denom
        }
        None => s.parse::<f64>().map_err(|_| bad())?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

pub fn execute(cli: &Cli) -> Result<Report, Error> {
    match &cli.command {
        Command::Spectrum(a) => commands::spectrum(a),
        Command::Berry(a) => commands::berry(a),
        Command::Chern(a) => commands::chern(a),
        Command::Evolve(a) => commands::evolve(a),
        Command::PhaseDiagram(a) => commands::phase_diagram(a),
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidParameter { .. } | Error::UnsupportedPhase { .. } | Error::ZeroFrequency => EXIT_VALIDATION,
        _ => EXIT_COMPUTATION,
    }
}

fn report_error(kind: &str, message: &str, code: i32) -> i32 {
    let record = json!({ "error": kind, "message": message, "exit_code": code });
    let mut line = output::to_json_bytes(&record);
    line.push(b'\n');
    let _ = std::io::stderr().write_all(&line);
    code
}

/// Parses `args`, runs the command and writes its output; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => return report_error("InvalidParameter", e.render().to_string().trim(), EXIT_VALIDATION),
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return report_error("InvalidParameter", "--threads must be at least 1", EXIT_VALIDATION);
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let report = match execute(&cli) {
        Ok(r) => r,
        Err(e) => return report_error(e.kind(), &e.to_string(), exit_code(&e)),
    };
    let bytes = render(&report, cli.format);
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &bytes),
        None => std::io::stdout().write_all(&bytes),
    };
    match written {
        Ok(()) => 0,
        Err(e) => report_error("Io", &e.to_string(), EXIT_IO),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles_accept_pi_multiples() {
        let cases = [
            ("pi", PI),
            ("pi/2", PI / 2.0),
            ("-pi/4", -PI / 4.0),
            ("2pi/3", 2.0 * PI / 3.0),
            ("3*pi/4", 3.0 * PI / 4.0),
            ("PI", PI),
            ("0.25", 0.25),
            ("-1e-3", -1e-3),
        ];
        for (text, want) in cases {
            assert_eq!(parse_angle(text).unwrap(), want, "{text}");
        }
        for text in ["", "pi/0", "tau", "pi2", "1/2", "nan", "inf"] {
            assert!(parse_angle(text).is_err(), "{text}");
        }
    }

    #[test]
    fn validation_errors_map_to_exit_two() {
        assert_eq!(exit_code(&Error::ZeroFrequency), EXIT_VALIDATION);
        assert_eq!(exit_code(&Error::invalid("b", "x")), EXIT_VALIDATION);
        assert_eq!(exit_code(&Error::OnTransition { detail: String::new() }), EXIT_COMPUTATION);
    }

    #[test]
    fn arguments_parse() {
        let cli = Cli::try_parse_from(["qubit-topo", "--format", "csv", "spectrum", "--phi", "-pi/2", "--theta-steps", "5"]).unwrap();
        assert_eq!(cli.format, Format::Csv);
        match cli.command {
            Command::Spectrum(a) => {
                assert_eq!(a.drive.phi, -PI / 2.0);
                assert_eq!(a.theta_steps, 5);
            }
            _ => panic!("wrong subcommand"),
        }
        let cli = Cli::try_parse_from(["qubit-topo", "berry", "--lambda", "0,0.6,1.2", "--format", "json"]).unwrap();
        match cli.command {
            Command::Berry(a) => assert_eq!(a.lambda, vec![0.0, 0.6, 1.2]),
            _ => panic!("wrong subcommand"),
        }
    }
}
