mod lattice;
mod report;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hharmonic::hankel::{hardy_gate, HardyClass};
use hharmonic::hermite::{hermite_gate, mehler_kernel, CartesianGrid, MehlerParams};
use hharmonic::heisenberg::{heat_kernel, heat_kernel_lambda};
use hharmonic::htype::{htype_gate, htype_heat_kernel};
use hharmonic::propagator::uniqueness_gate;
use hharmonic::suites::{Check, Suite};
use hharmonic::{Error, Gate, HPoint, Point, Time};
use num_complex::Complex;
use rayon::prelude::*;

use report::SuiteReport;

/// Heat kernels, propagators and uniqueness gates on the Heisenberg group.
///
/// Exit status: 0 success, 1 failed check, 2 usage error, 3 numerical failure.
/// `HH_QUAD_BUDGET` overrides the adaptive quadrature subinterval budget.
#[derive(Debug, Parser)]
#[command(name = "hh", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a kernel along a radial grid; CSV `r,re,im` on stdout.
    Kernel(KernelArgs),
    /// Run a verification suite and report as JSON.
    Verify(VerifyArgs),
    /// Sweep a uniqueness gate over a parameter lattice; CSV on stdout.
    Gate(GateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Group {
    Heisenberg,
    Htype,
    Mehler,
}

#[derive(Debug, clap::Args)]
struct KernelArgs {
    #[arg(long, value_enum)]
    group: Group,
    /// Complex dimension of the Heisenberg factor.
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Center dimension of an H-type group.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Heat time; for `mehler`, the propagator time.
    #[arg(long, allow_hyphen_values = true)]
    s: f64,
    /// Propagator time added as the imaginary part of the heat time.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    imag: f64,
    /// Evaluate the λ-slice instead of the full kernel.
    #[arg(long)]
    slice_lambda: Option<f64>,
    /// Radii |z| (or |v|, or x): a value, a list `a,b` or a range `lo:hi:count`.
    #[arg(long, alias = "v-norm", default_value = "0")]
    r: String,
    /// Central coordinate t (or |t|).
    #[arg(long, alias = "t-norm", default_value_t = 0.0, allow_hyphen_values = true)]
    t: f64,
    /// Second Mehler argument.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    y: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct VerifyArgs {
    /// Suite name or `all`.
    #[arg(long, value_parser = suite_names())]
    suite: String,
    /// Also write the report to this file.
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn suite_names() -> Vec<&'static str> {
    Suite::ALL.iter().map(|s| s.name()).chain(["all"]).collect()
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Which {
    Heisenberg,
    Hermite,
    Htype,
    Hardy,
}

#[derive(Debug, clap::Args)]
struct GateArgs {
    #[arg(long, value_enum)]
    which: Which,
    /// Each lattice axis takes a value, a list `a,b` or a range `lo:hi:count`.
    #[arg(long)]
    a: String,
    #[arg(long)]
    b: String,
    #[arg(long, default_value = "1")]
    s0: String,
    /// Only the Heisenberg gate depends on λ and ε.
    #[arg(long, default_value = "0")]
    lambda: String,
    #[arg(long, default_value = "0")]
    eps: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Numerical(String),
    Checks,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Checks => 1,
            Failure::Usage(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

/// Bad inputs are usage errors; everything else is a numerical breakdown.
impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_)
            | Error::InvalidOrder(..)
            | Error::UnsupportedDimension(_)
            | Error::DimensionMismatch(..)
            | Error::ZeroLambda => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Kernel(args) => kernel(&args),
        Command::Verify(args) => verify(&args),
        Command::Gate(args) => gate(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Numerical(m) => eprintln!("numerical failure: {m}"),
                Failure::Checks => eprintln!("verification failed"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Numerical(format!("stdout: {e}"))),
    }
}

fn axis(name: &str, spec: &str) -> Result<Vec<f64>, Failure> {
    lattice::parse(spec).map_err(|m| Failure::Usage(format!("--{name}: {m}")))
}

fn kernel(args: &KernelArgs) -> Result<(), Failure> {
    let radii = axis("r", &args.r)?;
    let zeta = Time::new(args.s, args.imag)?;
    let mut csv = String::from("r,re,im\n");
    for &r in &radii {
        let v: Complex<f64> = match args.group {
            Group::Heisenberg => match args.slice_lambda {
                Some(lambda) => heat_kernel_lambda(zeta, lambda, r, args.n)?,
                None => {
                    let mut z = vec![Complex::new(0.0, 0.0); args.n.max(1)];
                    z[0].re = r;
                    heat_kernel(zeta, &Point::new(z, args.t)?)?
                }
            },
            Group::Htype => {
                let mut v = vec![0.0; 2 * args.n];
                let mut t = vec![0.0; args.k];
                if let (Some(v0), Some(t0)) = (v.first_mut(), t.first_mut()) {
                    (*v0, *t0) = (r, args.t);
                }
                Complex::new(htype_heat_kernel(args.s, &HPoint::new(v, t)?)?, 0.0)
            }
            Group::Mehler => {
                let params = MehlerParams::new(args.s, CartesianGrid::new(args.n, 1.0, 4)?)?;
                let mut x = vec![0.0; args.n];
                let mut y = vec![0.0; args.n];
                x[0] = r;
                y[0] = args.y;
                mehler_kernel(&params, &x, &y)?
            }
        };
        let _ = writeln!(csv, "{r:.16e},{:.16e},{:.16e}", v.re, v.im);
    }
    emit(&csv, args.out.as_ref())
}

fn verify(args: &VerifyArgs) -> Result<(), Failure> {
    let suites: Vec<Suite> = match Suite::from_name(&args.suite) {
        Some(s) => vec![s],
        None => Suite::ALL.to_vec(),
    };
    let runs: Vec<_> = suites.par_iter().map(|s| s.run(args.seed)).collect();
    let mut checks: Vec<Check> = Vec::new();
    for run in runs {
        checks.extend(run.map_err(|e| Failure::Numerical(e.to_string()))?);
    }
    let report = SuiteReport::new(&args.suite, &checks);
    let json = serde_json::to_string_pretty(&report).map_err(|e| Failure::Numerical(e.to_string()))? + "\n";
    if let Some(path) = &args.json {
        emit(&json, Some(path))?;
    }
    emit(&json, None)?;
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn gate(args: &GateArgs) -> Result<(), Failure> {
    let (a_s, b_s, s0_s) = (axis("a", &args.a)?, axis("b", &args.b)?, axis("s0", &args.s0)?);
    let (l_s, e_s) = (axis("lambda", &args.lambda)?, axis("eps", &args.eps)?);
    let mut csv = String::from("a,b,s0,lambda,eps,margin,decision\n");
    for &a in &a_s {
        for &b in &b_s {
            for &s0 in &s0_s {
                for &lambda in &l_s {
                    for &eps in &e_s {
                        let (margin, forced) = gate_row(args.which, a, b, s0, lambda, eps)?;
                        let decision = if forced { "supercritical" } else { "subcritical" };
                        let _ = writeln!(
                            csv,
                            "{a:.16e},{b:.16e},{s0:.16e},{lambda:.16e},{eps:.16e},{margin:.16e},{decision}"
                        );
                    }
                }
            }
        }
    }
    emit(&csv, args.out.as_ref())
}

/// Margin and whether the solution is forced to vanish. Only the Heisenberg
/// margin depends on λ and ε; the others are the closed-form thresholds.
fn gate_row(which: Which, a: f64, b: f64, s0: f64, lambda: f64, eps: f64) -> Result<(f64, bool), Failure> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Failure::Usage("decay rates a, b must be > 0".into()));
    }
    Ok(match which {
        Which::Heisenberg => {
            let g = uniqueness_gate(Gate::new(a, b, s0, eps, lambda)?);
            (g.margin, g.supercritical)
        }
        Which::Hermite => {
            let g = hermite_gate(a, b, s0);
            (g.margin, g.zero_forced)
        }
        Which::Htype => (s0 * s0 - a * b, htype_gate(a, b, s0)),
        Which::Hardy => (a * b - 0.25, hardy_gate(a, b) == HardyClass::Supercritical),
    })
}
