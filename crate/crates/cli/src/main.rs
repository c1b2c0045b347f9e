//! `modprod`: command-line front end for the q-series, Weil representation,
//! repackaging and product-expansion machinery of the `modprod` crate.

mod commands;
mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use modprod::Error;

use report::Report;

#[derive(Debug, Parser)]
#[command(name = "modprod", version, about = "Exact q-series and product expansions for weight 1/2 module data")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Decimal digits for numeric evaluation (at least 20).
    #[arg(long, global = true, env = "MODPROD_DIGITS", default_value_t = 60)]
    digits: u32,

    /// Worker threads for per-class and per-form work.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    /// Output format; CSV exports the coefficient tables only.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coefficients of f_3 = q^-3 - 248 q + ...
    F0 {
        #[arg(long, default_value_t = 20)]
        prec: i64,
    },
    /// The echelon basis f_D of the weight 1/2 plus space.
    PlusBasis {
        #[arg(long)]
        dmax: i64,
        #[arg(long, default_value_t = 20)]
        prec: i64,
    },
    /// The product expansion of j from f_3.
    Jproduct {
        #[arg(long, default_value_t = 6)]
        prec: i64,
    },
    /// Weil representation of L_(m,N).
    Weil {
        #[arg(long, allow_negative_numbers = true)]
        m: i64,
        #[arg(long)]
        n: u64,
        /// Verify the defining relations.
        #[arg(long)]
        check: bool,
        /// Include rho(S) and rho(T).
        #[arg(long)]
        matrices: bool,
    },
    /// Repackage a family {F^(n)} into Fcheck.
    Repackage {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        engine: Option<PathBuf>,
        /// Rational truncation order; defaults to the family's known range.
        #[arg(long)]
        prec: Option<String>,
        /// Use the T-shifted completions of (c, d) to SL_2(Z).
        #[arg(long)]
        shifted: bool,
    },
    /// Frame shape and consistency checks for the traces of one element.
    FrameShape {
        #[arg(long)]
        input: PathBuf,
    },
    /// Class number H^W, weights and leading exponents.
    Classnum {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        plugin: Option<PathBuf>,
        #[arg(long)]
        dmax: Option<i64>,
    },
    /// Graded traces on the Fock space, checked against Psi/eta.
    Sq {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 10)]
        prec: i64,
        #[arg(long)]
        character_table: Option<PathBuf>,
        #[arg(long)]
        dmax: Option<i64>,
    },
    /// Twisted product over Q(sqrt D1).
    Twisted {
        #[arg(long = "D1")]
        d1: i64,
        #[arg(long = "r1")]
        r1: i64,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 6)]
        prec: i64,
        #[arg(long, default_value = "1A")]
        class: String,
        #[arg(long)]
        dmax: Option<i64>,
    },
    /// Twisted trace of singular moduli.
    Trace {
        #[arg(long = "D1")]
        d1: i64,
        #[arg(long = "r1")]
        r1: i64,
        #[arg(long = "D0", allow_negative_numbers = true)]
        d0: Option<i64>,
        #[arg(long = "r0")]
        r0: Option<i64>,
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        mult: i64,
        /// Take the divisor from the singular part of this W instead.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Also recover C(D1 n^2, r1 n) for n up to this bound.
        #[arg(long)]
        invert: Option<i64>,
    },
    /// Replication identity at the CM points of one discriminant.
    Replication {
        #[arg(long, allow_negative_numbers = true)]
        disc: i64,
        #[arg(long, default_value_t = 5)]
        prec: i64,
    },
    /// Validate an input file without computing products.
    Validate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        dmax: Option<i64>,
    },
}

/// Failure modes of a run, with their exit codes.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Json(_)
            | Error::InvalidInput(_)
            | Error::InvalidCharacterData(_)
            | Error::PlusSupport(_)
            | Error::NoSuchBasisElement(_)
            | Error::NotVirtualModule(_)
            | Error::MissingClassNumber { .. }
            | Error::Unsupported(_)
            | Error::EngineGap(_) => Failure::Input(e.to_string()),
            _ => Failure::Compute(e.to_string()),
        }
    }
}

fn emit(cli: &Cli, report: &Report) -> io::Result<()> {
    let mut w: Box<dyn Write> = match &cli.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match cli.format {
        Format::Json => report.write_json(&mut *w)?,
        Format::Csv => report.write_csv(&mut *w)?,
    }
    w.flush()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match commands::run(&cli) {
        Ok(r) => r,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("check failed: {msg}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = emit(&cli, &report) {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(2);
    }
    let failed = report.failed();
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        for c in failed {
            eprintln!("check failed: {}: {}", c.name, c.detail);
        }
        ExitCode::from(1)
    }
}
