mod commands;
mod render;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use klgamma::Complex;

#[derive(Parser, Debug)]
#[command(
    name = "klgamma",
    version,
    about = "Gamma-function products, Kontorovich-Lebedev identities and a Fokker-Planck solver"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Absolute quadrature tolerance.
    #[arg(long, global = true)]
    abs_tol: Option<f64>,
    /// Relative quadrature tolerance.
    #[arg(long, global = true)]
    rel_tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Human,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BesselKind {
    I,
    K,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FpMethodArg {
    Single,
    Double,
    Fd,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Gamma(z+is) Gamma(z-is).
    Gamma {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        z: Complex,
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
    },
    /// I_nu(x) or K_nu(x) for complex order.
    Bessel {
        #[arg(long, value_enum)]
        kind: BesselKind,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        order: Complex,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
    },
    /// The renormalized kernel Psi_n(x).
    Psi {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        z: Complex,
        #[arg(long)]
        n: u32,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
    },
    /// Identity sweep; exits 1 if any report misses its tolerance.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        /// JSON grid file, or `builtin`.
        #[arg(long, default_value = "builtin")]
        grid: String,
        /// Override every report tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Table of the Fourier transform of |Gamma(a+is)|^2.
    Fourier {
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        /// LO:HI:STEP
        #[arg(long, allow_hyphen_values = true)]
        xi_grid: String,
        /// Strip index for a < 0; inferred when omitted.
        #[arg(long)]
        n: Option<u32>,
    },
    /// U_p(t, y) for the Fokker-Planck problem.
    Fp {
        #[arg(long, allow_hyphen_values = true)]
        p: f64,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
        #[arg(long, value_enum, default_value_t = FpMethodArg::Single)]
        method: FpMethodArg,
        #[arg(long)]
        n: Option<u32>,
    },
}

fn parse_complex(s: &str) -> Result<Complex, String> {
    let mut parts = s.split(',');
    let re = parts.next().unwrap_or("");
    let im = parts.next();
    if parts.next().is_some() {
        return Err(format!("expected RE or RE,IM, got {s:?}"));
    }
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("expected RE or RE,IM, got {s:?}"));
    Ok(Complex::new(num(re)?, im.map(num).transpose()?.unwrap_or(0.0)))
}

/// Failure modes of a run, mapped onto exit codes.
pub enum Failure {
    /// Bad arguments or parameters outside an operation's domain.
    Usage(String),
    /// A verification sweep ran but some report missed its tolerance.
    Verification(String),
}

impl From<klgamma::Error> for Failure {
    fn from(e: klgamma::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn threads_from_env() -> Result<(), Failure> {
    let Ok(v) = std::env::var("KLGAMMA_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("KLGAMMA_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    threads_from_env()?;
    let mut spec = klgamma::identities::default_spec();
    if let Some(t) = cli.abs_tol {
        spec.abs_tol = t;
    }
    if let Some(t) = cli.rel_tol {
        spec.rel_tol = t;
    }
    spec.validate()?;
    let (doc, verdict) = match cli.command {
        Command::Gamma { z, s } => (commands::gamma(z, s)?, Ok(())),
        Command::Bessel { kind, order, x } => (commands::bessel(kind, order, x)?, Ok(())),
        Command::Psi { z, n, x } => (commands::psi(z, n, x)?, Ok(())),
        Command::Verify { suite, grid, tol } => commands::verify(&suite, &grid, tol, &spec)?,
        Command::Fourier { a, xi_grid, n } => (commands::fourier(a, &xi_grid, n, &spec)?, Ok(())),
        Command::Fp { p, t, y, method, n } => (commands::fp(p, t, y, method, n)?, Ok(())),
    };
    let text = render::render(&doc, cli.format).map_err(Failure::Usage)?;
    match &cli.output {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?
        }
        None => {
            let mut out = std::io::stdout().lock();
            // A closed pipe is not worth a diagnostic.
            let _ = out.write_all(text.as_bytes());
        }
    }
    verdict
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let rendered = e.render().to_string();
            eprintln!("{}", rendered.lines().next().unwrap_or("error: invalid arguments"));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("verify: {msg}");
            ExitCode::from(1)
        }
    }
}
