use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use egfp::pencils::{BandClass, Family, Structure};

#[derive(Debug, Parser)]
#[command(name = "egfp", version, about = "Build, solve and verify extended generalized Fiedler pencils")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON tolerance file. Falls back to $EGFP_TOLERANCES, then to built-in values.
    #[arg(long, global = true, value_name = "FILE")]
    pub tol: Option<PathBuf>,

    /// Seed for every random choice (free decoration blocks, suite sampling).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Output file, or directory for `--format mm`. Defaults to stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Jsonl,
    /// Matrix Market files plus a JSON tag sidecar.
    Mm,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a pencil description against the construction rules.
    Validate {
        #[arg(long, value_name = "FILE")]
        spec: PathBuf,
    },
    /// Emit the symbolic block pencil, or a dense one when matrices are supplied.
    Build {
        #[arg(long, value_name = "FILE")]
        spec: PathBuf,
        #[command(flatten)]
        input: OptionalInput,
    },
    /// Eigenvalues of the dense pencil with recovered eigenvectors and residuals.
    Solve {
        #[arg(long, value_name = "FILE")]
        spec: PathBuf,
        #[command(flatten)]
        input: RequiredInput,
    },
    /// List every valid pencil description of a given degree, one JSON object per line.
    Enumerate {
        #[arg(long)]
        m: u32,
        /// Maximum length of each decoration tuple.
        #[arg(long, default_value_t = 2)]
        cap: usize,
        #[arg(long, value_enum)]
        family: Option<FamilyArg>,
        #[arg(long, value_enum)]
        band: Option<BandArg>,
        #[arg(long, value_enum)]
        structure: Option<StructureArg>,
    },
    /// Run a named verification suite.
    Verify {
        #[arg(long)]
        suite: String,
    },
}

#[derive(Debug, Args)]
#[group(multiple = false)]
pub struct OptionalInput {
    /// Matrix polynomial as JSON `{"P": [A0, A1, ...]}`.
    #[arg(long, value_name = "FILE")]
    pub poly: Option<PathBuf>,
    /// Polynomial plus state-space matrices `A, E, B, C`.
    #[arg(long, value_name = "FILE")]
    pub realization: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct RequiredInput {
    #[arg(long, value_name = "FILE")]
    pub poly: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub realization: Option<PathBuf>,
}

impl OptionalInput {
    pub fn path(&self) -> Option<&PathBuf> {
        self.poly.as_ref().or(self.realization.as_ref())
    }
}

impl RequiredInput {
    pub fn path(&self) -> &PathBuf {
        self.poly.as_ref().or(self.realization.as_ref()).expect("clap enforces one input")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Fp,
    Gfp,
    Fpr,
    Gfpr,
    /// Pencils outside every smaller family.
    Egfp,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Fp => Family::Fp,
            FamilyArg::Gfp => Family::Gfp,
            FamilyArg::Fpr => Family::Fpr,
            FamilyArg::Gfpr => Family::Gfpr,
            FamilyArg::Egfp => Family::EgfpProper,
        }
    }
}

/// Upper bound on the predicted block bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BandArg {
    Tridiagonal,
    Pentadiagonal,
    Wider,
}

impl From<BandArg> for BandClass {
    fn from(b: BandArg) -> Self {
        match b {
            BandArg::Tridiagonal => BandClass::Tridiagonal,
            BandArg::Pentadiagonal => BandClass::Pentadiagonal,
            BandArg::Wider => BandClass::Wider,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StructureArg {
    Symmetric,
    SkewSymmetric,
    TEven,
    TOdd,
    TPalindromic,
}

impl From<StructureArg> for Structure {
    fn from(s: StructureArg) -> Self {
        match s {
            StructureArg::Symmetric => Structure::Symmetric,
            StructureArg::SkewSymmetric => Structure::SkewSymmetric,
            StructureArg::TEven => Structure::TEven,
            StructureArg::TOdd => Structure::TOdd,
            StructureArg::TPalindromic => Structure::TPalindromic,
        }
    }
}
