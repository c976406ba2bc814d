mod commands;
mod report;
mod suite;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Finite groupoid operator algebras: norms, multipliers, witnesses.
#[derive(Parser, Debug)]
#[command(name = "gcb", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol: f64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = gcb::groupoid::MAX_ELEMENTS)]
    pub max_elements: usize,
    /// Add wall time to the report (the report is then not reproducible).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate a groupoid file and its weight.
    Validate {
        #[arg(long)]
        groupoid: PathBuf,
    },
    /// Build a groupoid from components such as pair:3, cyclic:2, s3.
    Build {
        #[arg(required = true)]
        parts: Vec<String>,
        /// Comma-separated unit weights, e.g. 1/3,2/3.
        #[arg(long)]
        mu: Option<String>,
        /// Also write the groupoid file here.
        #[arg(long)]
        write: Option<PathBuf>,
    },
    /// I-norm and reduced norm of a function.
    Norm {
        #[arg(long)]
        groupoid: PathBuf,
        #[arg(long)]
        f: PathBuf,
    },
    /// Positive-definiteness, GNS bundle and B(𝒢) bound of φ.
    Posdef {
        #[arg(long)]
        groupoid: PathBuf,
        #[arg(long)]
        phi: PathBuf,
    },
    /// Schur multiplier norm of a matrix, with certificate.
    SchurNorm {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// M₀A(𝒢) norm of φ.
    M0a {
        #[arg(long)]
        groupoid: PathBuf,
        #[arg(long)]
        phi: PathBuf,
    },
    /// Weak amenability constant with the Godement witness.
    LambdaCb {
        #[arg(long)]
        groupoid: PathBuf,
    },
    /// Fell absorption, initial subspace and trace-weight identities.
    FellCheck {
        #[arg(long)]
        groupoid: PathBuf,
        #[arg(long)]
        rep: Option<PathBuf>,
        /// Largest groupoid allowed in tensor constructions.
        #[arg(long, default_value_t = gcb::fell::TENSOR_CAP)]
        tensor_cap: usize,
    },
    /// Check a CBAP witness and run it through the equality pipeline.
    Cbap {
        #[arg(long)]
        groupoid: PathBuf,
        #[arg(long)]
        witness: PathBuf,
    },
    /// φ_T from an A-linear operator.
    PhiFromOp {
        #[arg(long)]
        groupoid: PathBuf,
        #[arg(long)]
        op: PathBuf,
    },
    /// Transformation groupoid of a partial action, with the Δ and coaction checks.
    PaBuild {
        #[arg(long)]
        action: PathBuf,
        #[arg(long)]
        write: Option<PathBuf>,
    },
    /// Partial-action pipeline from a CBAP witness (identity by default).
    PaEquality {
        #[arg(long)]
        action: PathBuf,
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Validate an inverse semigroup and its regular representations.
    IsgValidate {
        #[arg(long)]
        semigroup: PathBuf,
    },
    /// Groupoid of germs of an inverse semigroup action.
    Germ {
        #[arg(long)]
        action: PathBuf,
        #[arg(long)]
        write: Option<PathBuf>,
    },
    /// Universal groupoid of an inverse semigroup.
    Universal {
        #[arg(long)]
        semigroup: PathBuf,
        #[arg(long)]
        write: Option<PathBuf>,
    },
    /// Exactness of the ideal/quotient sequence for closed invariant F.
    InnerExact {
        #[arg(long)]
        groupoid: PathBuf,
        /// Comma-separated unit names of F; every invariant set when absent.
        #[arg(long)]
        units: Option<String>,
    },
    /// Property suite over the built-in zoo and any extra files.
    Suite {
        #[arg(long)]
        filter: Option<String>,
        files: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os()))
}

pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    commands::execute(cli)
}
