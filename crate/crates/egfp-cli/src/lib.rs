//! Command-line front end. [`main_with`] parses arguments and maps the outcome
//! to an exit code: 0 on success, 1 when a check fails, 2 on bad usage or input.

pub mod args;
pub mod solve;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;
use egfp::io::{self, IoError, PencilExport, RealizationDoc, SpecDoc, TagSidecar};
use egfp::oracle::{OracleError, Tolerances};
use egfp::pencils::{self, BandPrediction, BlockPencil, DensePencil, EgfpSpec, EnumerationFilter, Requirement};
use egfp::rational::{self, Realization};
use egfp::{expr::Sym, sample, suites};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

pub use args::{Cli, Command, Format};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

/// Names the state-space matrices occupy in a bordered pencil.
const STATE_NAMES: [&str; 4] = [rational::STATE_A, rational::STATE_E, rational::INPUT_B, rational::OUTPUT_C];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Input { path: PathBuf, source: IoError },
    #[error("cannot build the pencil: {0}")]
    Build(String),
    #[error(transparent)]
    Tolerances(#[from] OracleError),
    #[error(transparent)]
    Output(#[from] std::io::Error),
}

/// Whether every check of a successful run passed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Passed,
    Failed,
}

impl Status {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Passed
        } else {
            Status::Failed
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(rendered.as_bytes()) } else { out.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    match run(&cli, out) {
        Ok(Status::Passed) => EXIT_OK,
        Ok(Status::Failed) => EXIT_CHECK_FAILED,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<Status, CliError> {
    let tol = match &cli.tol {
        Some(path) => Tolerances::from_file(path)?,
        None => Tolerances::from_env()?,
    };
    let seed = cli.seed.unwrap_or(0);
    match &cli.command {
        Command::Validate { spec } => validate(cli, &read_spec(spec)?, out),
        Command::Build { spec, input } => {
            let spec = read_spec(spec)?;
            match input.path() {
                None => build_symbolic(cli, &spec, out),
                Some(path) => build_dense(cli, &bind(&spec, &read_doc(path)?, seed)?, out),
            }
        }
        Command::Solve { spec, input } => {
            let spec = read_spec(spec)?;
            let doc = read_doc(input.path())?;
            if doc.size() == 0 {
                let report = solve::SolveReport {
                    m: spec.m,
                    n: 0,
                    r: 0,
                    singular: false,
                    finite: Vec::new(),
                    infinite: solve::InfiniteEntry::default(),
                    max_residual: 0.0,
                    tolerance: tol.residual,
                    passed: true,
                };
                emit_json(cli, &report, out)?;
                return Ok(Status::Passed);
            }
            let bound = bind(&spec, &doc, seed)?;
            let report = solve::solve(&spec, &bound.real, &bound.dense, &tol)?;
            emit_json(cli, &report, out)?;
            Ok(Status::from_bool(report.passed))
        }
        Command::Enumerate { m, cap, family, band, structure } => {
            let filter = EnumerationFilter {
                decoration_cap: *cap,
                band: band.map(Into::into),
                family: family.map(Into::into),
                structure: structure.map(Into::into),
            };
            enumerate(cli, *m, &filter, out)
        }
        Command::Verify { suite } => verify(cli, suite, &tol, out),
    }
}

// ---------------------------------------------------------------- input

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input { path: path.into(), source: e.into() })
}

fn read_spec(path: &Path) -> Result<EgfpSpec, CliError> {
    io::spec_from_json(&read_text(path)?).map_err(|source| CliError::Input { path: path.into(), source })
}

fn read_doc(path: &Path) -> Result<RealizationDoc, CliError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::Input { path: path.into(), source: e.into() })
}

fn family_names(spec: &EgfpSpec) -> Vec<String> {
    pencils::classify(spec).iter().map(ToString::to_string).collect()
}

fn prediction_name(spec: &EgfpSpec) -> String {
    match pencils::predict_bandwidth(spec) {
        BandPrediction::Class(c) => c.to_string(),
        BandPrediction::NotApplicable => "not-applicable".into(),
    }
}

// ---------------------------------------------------------------- output

fn emit(cli: &Cli, text: &str, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.out {
        Some(path) => std::fs::write(path, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_json(cli: &Cli, value: &impl Serialize, out: &mut dyn Write) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(std::io::Error::from)?;
    emit(cli, &(text + "\n"), out)
}

fn json_only(cli: &Cli, command: &str) -> Result<(), CliError> {
    match cli.format {
        None | Some(Format::Json) => Ok(()),
        Some(f) => Err(CliError::Usage(format!("{command} does not support --format {f:?}").to_lowercase())),
    }
}

// ---------------------------------------------------------------- validate

#[derive(Debug, Serialize)]
struct ValidateReport {
    valid: bool,
    violations: Vec<String>,
    /// Coefficients of `P` the pencil will need to invert.
    requirements: Vec<&'static str>,
    operation_free_hypothesis: bool,
    families: Vec<String>,
    predicted_bandwidth: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    bandwidth: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    operation_free: Option<bool>,
}

fn validate(cli: &Cli, spec: &EgfpSpec, out: &mut dyn Write) -> Result<Status, CliError> {
    json_only(cli, "validate")?;
    let v = spec.validate();
    let built = v.is_valid().then(|| pencils::build(spec).ok()).flatten();
    let report = ValidateReport {
        valid: v.is_valid(),
        violations: v.violations.iter().map(ToString::to_string).collect(),
        requirements: v
            .requirements
            .iter()
            .map(|r| match r {
                Requirement::LeadingInvertible => "leading coefficient invertible",
                Requirement::TrailingInvertible => "trailing coefficient invertible",
            })
            .collect(),
        operation_free_hypothesis: v.operation_free,
        families: if v.is_valid() { family_names(spec) } else { Vec::new() },
        predicted_bandwidth: if v.is_valid() { prediction_name(spec) } else { "not-applicable".into() },
        bandwidth: built.as_ref().map(BlockPencil::bandwidth),
        operation_free: built.as_ref().map(BlockPencil::is_operation_free),
    };
    emit_json(cli, &report, out)?;
    Ok(Status::from_bool(report.valid))
}

// ---------------------------------------------------------------- build

#[derive(Debug, Serialize)]
struct SymbolicPencil {
    m: u32,
    #[serde(rename = "L1")]
    l1: Vec<Vec<String>>,
    #[serde(rename = "L0")]
    l0: Vec<Vec<String>>,
    bandwidth: usize,
    operation_free: bool,
}

fn grid(b: &egfp::blockmat::BlockMatrix) -> Vec<Vec<String>> {
    (0..b.order()).map(|i| (0..b.order()).map(|j| b.get(i, j).to_string()).collect()).collect()
}

fn build_symbolic(cli: &Cli, spec: &EgfpSpec, out: &mut dyn Write) -> Result<Status, CliError> {
    json_only(cli, "symbolic build")?;
    let pencil = pencils::build(spec).map_err(|e| CliError::Build(e.to_string()))?;
    let doc = SymbolicPencil {
        m: spec.m,
        l1: grid(&pencil.l1),
        l0: grid(&pencil.l0),
        bandwidth: pencil.bandwidth(),
        operation_free: pencil.is_operation_free(),
    };
    emit_json(cli, &doc, out)?;
    Ok(Status::Passed)
}

/// A pencil description realized with concrete matrices.
pub struct Bound {
    pub real: Realization,
    pub block: BlockPencil,
    pub border: Option<(usize, usize)>,
    pub dense: DensePencil<Complex64>,
}

/// Free names of the symbolic pencil, excluding the state-space matrices of a bordered one.
fn free_names(block: &BlockPencil, bordered: bool) -> Vec<String> {
    let mut names: Vec<String> = block
        .symbols()
        .into_iter()
        .filter_map(|s| match s {
            Sym::Var(v) | Sym::VarInv(v) => Some(v.name()),
            _ => None,
        })
        .filter(|name| !(bordered && STATE_NAMES.contains(&name.as_str())))
        .collect();
    names.dedup();
    names
}

/// Realizes `spec` on the matrices of `doc`. Free blocks missing from
/// `doc.bindings` get seeded random well-conditioned values, in name order.
pub fn bind(spec: &EgfpSpec, doc: &RealizationDoc, seed: u64) -> Result<Bound, CliError> {
    let real = doc.realization().map_err(|source| CliError::Input { path: "realization".into(), source })?;
    if real.poly.degree() != spec.m {
        return Err(CliError::Usage(format!("polynomial has degree {}, the pencil description has m = {}", real.poly.degree(), spec.m)));
    }
    let (n, r) = (real.size(), real.state_dim());
    let (block, border) = if r > 0 {
        if let Some(clash) = spec.named_blocks().into_iter().find(|name| STATE_NAMES.contains(&name.as_str())) {
            return Err(CliError::Usage(format!("decoration block {clash} clashes with a state-space matrix")));
        }
        let b = rational::build_rational(spec).map_err(|e| CliError::Build(e.to_string()))?;
        (b.pencil, Some((b.c_row, b.b_col)))
    } else {
        (pencils::build(spec).map_err(|e| CliError::Build(e.to_string()))?, None)
    };
    let supplied: BTreeMap<String, DMatrix<Complex64>> =
        doc.bound_matrices().map_err(|source| CliError::Input { path: "bindings".into(), source })?;
    let mut bindings = real.bindings();
    let mut rng = sample::rng(seed);
    for name in free_names(&block, r > 0) {
        let value = match supplied.get(&name) {
            Some(v) if v.shape() != (n, n) => {
                return Err(CliError::Usage(format!("binding {name} is {}x{}, expected {n}x{n}", v.nrows(), v.ncols())));
            }
            Some(v) => v.clone(),
            None => sample::well_conditioned(n, &mut rng),
        };
        bindings.bind(&name, value);
    }
    let dense = block.realize(&bindings, n, r).map_err(|e| CliError::Build(e.to_string()))?;
    Ok(Bound { real, block, border, dense })
}

#[derive(Debug, Serialize)]
struct DenseDoc<'a> {
    tags: &'a TagSidecar,
    #[serde(rename = "L1")]
    l1: io::MatrixDoc,
    #[serde(rename = "L0")]
    l0: io::MatrixDoc,
}

fn build_dense(cli: &Cli, bound: &Bound, out: &mut dyn Write) -> Result<Status, CliError> {
    let tags = TagSidecar::new(&bound.block, bound.block.l1.poly_blocks() as u32, bound.real.size(), bound.real.state_dim(), bound.border);
    match cli.format {
        Some(Format::Mm) => {
            let dir = cli.out.as_ref().ok_or_else(|| CliError::Usage("--format mm needs --out DIR".into()))?;
            let export = PencilExport { tags, dense: bound.dense.clone() };
            export.write_dir(dir).map_err(|source| CliError::Input { path: dir.clone(), source })?;
        }
        Some(Format::Jsonl) => return Err(CliError::Usage("build does not support --format jsonl".into())),
        None | Some(Format::Json) => {
            let doc =
                DenseDoc { tags: &tags, l1: io::MatrixDoc::from_matrix(&bound.dense.l1), l0: io::MatrixDoc::from_matrix(&bound.dense.l0) };
            emit_json(cli, &doc, out)?;
        }
    }
    Ok(Status::Passed)
}

// ---------------------------------------------------------------- enumerate

#[derive(Debug, Serialize)]
struct EnumLine {
    spec: SpecDoc,
    families: Vec<String>,
    predicted_bandwidth: String,
    bandwidth: usize,
    operation_free: bool,
}

/// Largest degree [`enumerate`] accepts; the count grows factorially.
const MAX_ENUMERATE_DEGREE: u32 = 8;

fn enumerate(cli: &Cli, m: u32, filter: &EnumerationFilter, out: &mut dyn Write) -> Result<Status, CliError> {
    if !(2..=MAX_ENUMERATE_DEGREE).contains(&m) {
        return Err(CliError::Usage(format!("--m must lie in 2..={MAX_ENUMERATE_DEGREE}, got {m}")));
    }
    let lines = pencils::enumerate_specs(m, filter).map(|spec| {
        let pencil = pencils::build(&spec).map_err(|e| CliError::Build(e.to_string()))?;
        Ok(EnumLine {
            spec: SpecDoc::from(&spec),
            families: family_names(&spec),
            predicted_bandwidth: prediction_name(&spec),
            bandwidth: pencil.bandwidth(),
            operation_free: pencil.is_operation_free(),
        })
    });
    match cli.format {
        None | Some(Format::Jsonl) => {
            let mut text = String::new();
            for line in lines {
                text += &serde_json::to_string(&line?).map_err(std::io::Error::from)?;
                text.push('\n');
            }
            emit(cli, &text, out)?;
        }
        Some(Format::Json) => emit_json(cli, &lines.collect::<Result<Vec<_>, CliError>>()?, out)?,
        Some(Format::Mm) => return Err(CliError::Usage("enumerate does not support --format mm".into())),
    }
    Ok(Status::Passed)
}

// ---------------------------------------------------------------- verify

fn verify(cli: &Cli, suite: &str, tol: &Tolerances, out: &mut dyn Write) -> Result<Status, CliError> {
    if cli.format == Some(Format::Mm) {
        return Err(CliError::Usage("verify does not support --format mm".into()));
    }
    let outcomes = suites::run_named(suite, cli.seed, tol)
        .ok_or_else(|| CliError::Usage(format!("unknown suite {suite:?}; known suites: {}", suites::SUITE_NAMES.join(", "))))?;
    let passed = outcomes.iter().all(|o| o.passed);
    match cli.format {
        Some(Format::Json) => emit_json(cli, &outcomes, out)?,
        _ => {
            let text: String = outcomes.iter().map(|o| format!("{o}\n")).collect();
            emit(cli, &text, out)?;
        }
    }
    Ok(Status::from_bool(passed))
}
