//! Interchange formats: JSON for pencil descriptions and realizations, Matrix Market
//! (coordinate, complex) for dense pencils, and a JSON sidecar carrying block tags.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blockmat::{AssignedBlock, BlockError, BlockMatrix, MatrixAssignment, MatrixPolynomial};
use crate::expr::{Expr, Tag};
use crate::pencils::{BlockPencil, Decoration, DensePencil, EgfpSpec};
use crate::rational::{RationalError, Realization};
use crate::tuples::IndexTuple;

/// Largest degree accepted from a JSON pencil description.
pub const MAX_DEGREE: u32 = 1024;
/// Largest entry count accepted from a Matrix Market header.
pub const MAX_MM_ENTRIES: usize = 1 << 24;

const TRIVIAL: &str = "trivial";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    File(#[from] std::io::Error),
    #[error("degree {0} exceeds the supported maximum {MAX_DEGREE}")]
    Degree(u32),
    #[error("assignment `{key}`: {reason}")]
    Assignment { key: String, reason: String },
    #[error("matrix market line {line}: {reason}")]
    MatrixMarket { line: usize, reason: String },
    #[error("shape: {0}")]
    Shape(String),
    #[error(transparent)]
    Polynomial(#[from] BlockError),
    #[error(transparent)]
    Realization(#[from] RationalError),
}

// ---------------------------------------------------------------- descriptions

/// Wire form of [`EgfpSpec`]. Decorations without an `assignments` entry are trivial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDoc {
    pub m: u32,
    pub sigma: IndexTuple,
    pub tau: IndexTuple,
    #[serde(default, skip_serializing_if = "IndexTuple::is_empty")]
    pub sigma1: IndexTuple,
    #[serde(default, skip_serializing_if = "IndexTuple::is_empty")]
    pub sigma2: IndexTuple,
    #[serde(default, skip_serializing_if = "IndexTuple::is_empty")]
    pub tau1: IndexTuple,
    #[serde(default, skip_serializing_if = "IndexTuple::is_empty")]
    pub tau2: IndexTuple,
    /// Per decoration, one entry per index: `"trivial"`, a free name, or a fixed
    /// expression such as `"-A3"`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub assignments: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub swap_decorations: bool,
}

const DECORATIONS: [Decoration; 4] = [Decoration::LeftSigma, Decoration::RightSigma, Decoration::LeftTau, Decoration::RightTau];

fn block_label(b: &AssignedBlock) -> String {
    match b {
        AssignedBlock::Trivial => TRIVIAL.to_string(),
        AssignedBlock::Named(name) => name.clone(),
        AssignedBlock::Fixed(e) => e.to_string(),
    }
}

fn parse_block(key: &str, text: &str) -> Result<AssignedBlock, IoError> {
    if text.trim() == TRIVIAL {
        return Ok(AssignedBlock::Trivial);
    }
    let e: Expr = text.parse().map_err(|err| IoError::Assignment { key: key.into(), reason: format!("{err}") })?;
    // A lone name is a free block; `-X` or `X^-1` stay fixed expressions.
    if let Tag::Assigned { var, negative: false } = e.tag() {
        return Ok(AssignedBlock::Named(var.name()));
    }
    Ok(AssignedBlock::Fixed(e))
}

impl From<&EgfpSpec> for SpecDoc {
    fn from(spec: &EgfpSpec) -> Self {
        let mut assignments = BTreeMap::new();
        for which in DECORATIONS {
            let a = spec.decoration(which);
            if !a.is_trivial() {
                assignments.insert(which.to_string(), a.blocks().iter().map(block_label).collect());
            }
        }
        Self {
            m: spec.m,
            sigma: spec.sigma.clone(),
            tau: spec.tau.clone(),
            sigma1: spec.sigma1().clone(),
            sigma2: spec.sigma2().clone(),
            tau1: spec.tau1().clone(),
            tau2: spec.tau2().clone(),
            assignments,
            swap_decorations: spec.swap_decorations,
        }
    }
}

impl TryFrom<SpecDoc> for EgfpSpec {
    type Error = IoError;

    fn try_from(doc: SpecDoc) -> Result<Self, IoError> {
        if doc.m > MAX_DEGREE {
            return Err(IoError::Degree(doc.m));
        }
        if let Some(key) = doc.assignments.keys().find(|k| !DECORATIONS.iter().any(|d| d.to_string() == **k)) {
            return Err(IoError::Assignment { key: key.clone(), reason: "unknown decoration".into() });
        }
        let mut spec = EgfpSpec::core(doc.m, doc.sigma, doc.tau);
        spec.swap_decorations = doc.swap_decorations;
        for (which, tuple) in DECORATIONS.into_iter().zip([doc.sigma1, doc.sigma2, doc.tau1, doc.tau2]) {
            let key = which.to_string();
            let assignment = match doc.assignments.get(&key) {
                None => MatrixAssignment::trivial(tuple),
                Some(labels) => {
                    let blocks = labels.iter().map(|l| parse_block(&key, l)).collect::<Result<Vec<_>, _>>()?;
                    MatrixAssignment::new(tuple, blocks).map_err(|e| IoError::Assignment { key: key.clone(), reason: e.to_string() })?
                }
            };
            spec = spec.with(which, assignment);
        }
        Ok(spec)
    }
}

pub fn spec_from_json(text: &str) -> Result<EgfpSpec, IoError> {
    serde_json::from_str::<SpecDoc>(text)?.try_into()
}

pub fn spec_to_json(spec: &EgfpSpec) -> String {
    serde_json::to_string_pretty(&SpecDoc::from(spec)).expect("spec documents always serialize")
}

// ---------------------------------------------------------------- dense matrices

/// A matrix entry on the wire: a bare number or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EntryDoc {
    Real(f64),
    Complex(Complex64),
}

impl From<EntryDoc> for Complex64 {
    fn from(e: EntryDoc) -> Self {
        match e {
            EntryDoc::Real(re) => Complex64::new(re, 0.0),
            EntryDoc::Complex(z) => z,
        }
    }
}

/// Dense matrix as a list of rows.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixDoc(pub Vec<Vec<EntryDoc>>);

impl MatrixDoc {
    pub fn from_matrix(m: &DMatrix<Complex64>) -> Self {
        let entry = |z: Complex64| if z.im == 0.0 { EntryDoc::Real(z.re) } else { EntryDoc::Complex(z) };
        Self((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| entry(m[(i, j)])).collect()).collect())
    }

    /// `cols_if_empty` fixes the column count of a matrix with no rows.
    pub fn to_matrix(&self, what: &str, cols_if_empty: usize) -> Result<DMatrix<Complex64>, IoError> {
        let rows = self.0.len();
        let cols = self.0.first().map_or(cols_if_empty, Vec::len);
        if let Some(bad) = self.0.iter().position(|r| r.len() != cols) {
            return Err(IoError::Shape(format!("{what}: row {bad} has {} entries, expected {cols}", self.0[bad].len())));
        }
        Ok(DMatrix::from_fn(rows, cols, |i, j| self.0[i][j].into()))
    }
}

// ---------------------------------------------------------------- realizations

/// Wire form of a polynomial or of a realization `P(λ) + C(λE - A)^{-1}B`.
///
/// `A`, `E`, `B`, `C` are given together or not at all. `bindings` supplies
/// values for free decoration blocks of a description.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealizationDoc {
    #[serde(rename = "P")]
    pub p: Vec<MatrixDoc>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<MatrixDoc>,
    #[serde(rename = "E", default, skip_serializing_if = "Option::is_none")]
    pub e: Option<MatrixDoc>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<MatrixDoc>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<MatrixDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub bindings: BTreeMap<String, MatrixDoc>,
}

impl RealizationDoc {
    pub fn from_realization(real: &Realization) -> Self {
        let state = real.state_dim() > 0;
        let opt = |m: &DMatrix<Complex64>| state.then(|| MatrixDoc::from_matrix(m));
        Self {
            p: real.poly.coeffs().iter().map(MatrixDoc::from_matrix).collect(),
            a: opt(&real.a),
            e: opt(&real.e),
            b: opt(&real.b),
            c: opt(&real.c),
            bindings: BTreeMap::new(),
        }
    }

    pub fn from_polynomial(p: &MatrixPolynomial) -> Self {
        Self { p: p.coeffs().iter().map(MatrixDoc::from_matrix).collect(), ..Self::default() }
    }

    /// Size `n` of `P`, read from the first coefficient; `0` when there is none.
    pub fn size(&self) -> usize {
        self.p.first().map_or(0, |c| c.0.len())
    }

    pub fn polynomial(&self) -> Result<MatrixPolynomial, IoError> {
        let n = self.size();
        let coeffs = self.p.iter().enumerate().map(|(j, c)| c.to_matrix(&format!("P[{j}]"), n)).collect::<Result<Vec<_>, _>>()?;
        Ok(MatrixPolynomial::new(coeffs)?)
    }

    pub fn realization(&self) -> Result<Realization, IoError> {
        let poly = self.polynomial()?;
        let n = poly.size();
        match (&self.a, &self.e, &self.b, &self.c) {
            (None, None, None, None) => Ok(Realization::polynomial(poly)),
            (Some(a), Some(e), Some(b), Some(c)) => {
                let a = a.to_matrix("A", 0)?;
                let e = e.to_matrix("E", 0)?;
                let b = b.to_matrix("B", n)?;
                let c = c.to_matrix("C", 0)?;
                Ok(Realization::new(poly, a, e, b, c)?)
            }
            _ => Err(IoError::Shape("A, E, B and C must be given together".into())),
        }
    }

    pub fn bound_matrices(&self) -> Result<BTreeMap<String, DMatrix<Complex64>>, IoError> {
        let n = self.size();
        self.bindings.iter().map(|(k, v)| Ok((k.clone(), v.to_matrix(k, n)?))).collect()
    }
}

pub fn realization_from_json(text: &str) -> Result<Realization, IoError> {
    serde_json::from_str::<RealizationDoc>(text)?.realization()
}

pub fn realization_to_json(real: &Realization) -> String {
    serde_json::to_string_pretty(&RealizationDoc::from_realization(real)).expect("realizations always serialize")
}

// ---------------------------------------------------------------- Matrix Market

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MmSymmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

/// Writes `m` in coordinate complex general format, listing nonzero entries column by column.
pub fn write_matrix_market(m: &DMatrix<Complex64>, comment: &str) -> String {
    let mut out = String::from("%%MatrixMarket matrix coordinate complex general\n");
    for line in comment.lines() {
        let _ = writeln!(out, "% {line}");
    }
    let nnz = m.iter().filter(|z| **z != Complex64::new(0.0, 0.0)).count();
    let _ = writeln!(out, "{} {} {}", m.nrows(), m.ncols(), nnz);
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if z != Complex64::new(0.0, 0.0) {
                let _ = writeln!(out, "{} {} {} {}", i + 1, j + 1, z.re, z.im);
            }
        }
    }
    out
}

/// Reads coordinate or array files with real, integer or complex fields and any of the
/// general, symmetric, skew-symmetric and hermitian qualifiers. Duplicate coordinates add up.
pub fn read_matrix_market(text: &str) -> Result<DMatrix<Complex64>, IoError> {
    let err = |line: usize, reason: &str| IoError::MatrixMarket { line, reason: reason.to_string() };
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty input"))?;
    let words: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(err(1, "expected `%%MatrixMarket matrix <format> <field> <symmetry>`"));
    }
    let coordinate = match words[2].as_str() {
        "coordinate" => true,
        "array" => false,
        _ => return Err(err(1, "format must be coordinate or array")),
    };
    let complex = match words[3].as_str() {
        "complex" => true,
        "real" | "integer" | "double" => false,
        _ => return Err(err(1, "field must be real, integer or complex")),
    };
    let symmetry = match words[4].as_str() {
        "general" => MmSymmetry::General,
        "symmetric" => MmSymmetry::Symmetric,
        "skew-symmetric" => MmSymmetry::SkewSymmetric,
        "hermitian" if complex => MmSymmetry::Hermitian,
        _ => return Err(err(1, "unsupported symmetry qualifier")),
    };

    let mut data = lines.filter(|(_, l)| !l.trim_start().starts_with('%') && !l.trim().is_empty());
    let (size_line, size) = data.next().ok_or_else(|| err(1, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()
        .map_err(|_| err(size_line, "size entries must be nonnegative integers"))?;
    let (rows, cols, count) = match (coordinate, dims.as_slice()) {
        (true, &[r, c, nnz]) => (r, c, nnz),
        (false, &[r, c]) => (r, c, 0),
        _ => return Err(err(size_line, "wrong number of size entries")),
    };
    let total = rows.checked_mul(cols).filter(|&t| t <= MAX_MM_ENTRIES).ok_or_else(|| err(size_line, "matrix too large"))?;
    if symmetry != MmSymmetry::General && rows != cols {
        return Err(err(size_line, "symmetric storage needs a square matrix"));
    }
    let mut m = DMatrix::<Complex64>::zeros(rows, cols);

    let width = if complex { 2 } else { 1 };
    let parse_value = |line: usize, fields: &[&str]| -> Result<Complex64, IoError> {
        let nums = fields.iter().map(|f| f.parse::<f64>().map_err(|_| err(line, "bad numeric value"))).collect::<Result<Vec<_>, _>>()?;
        Ok(Complex64::new(nums[0], if complex { nums[1] } else { 0.0 }))
    };
    let mut place = |i: usize, j: usize, z: Complex64| {
        m[(i, j)] += z;
        if i != j {
            match symmetry {
                MmSymmetry::General => {}
                MmSymmetry::Symmetric => m[(j, i)] += z,
                MmSymmetry::SkewSymmetric => m[(j, i)] -= z,
                MmSymmetry::Hermitian => m[(j, i)] += z.conj(),
            }
        }
    };

    if coordinate {
        if count > total.max(1) * 2 {
            return Err(err(size_line, "more entries than matrix positions"));
        }
        let mut seen = 0;
        for (line, l) in data {
            let fields: Vec<&str> = l.split_whitespace().collect();
            if fields.len() != 2 + width {
                return Err(err(line, "wrong number of fields in entry"));
            }
            let index = |s: &str, hi: usize| s.parse::<usize>().ok().filter(|&k| (1..=hi).contains(&k)).map(|k| k - 1);
            let (Some(i), Some(j)) = (index(fields[0], rows), index(fields[1], cols)) else {
                return Err(err(line, "index out of range"));
            };
            if symmetry != MmSymmetry::General && i < j {
                return Err(err(line, "symmetric storage lists the lower triangle only"));
            }
            if symmetry == MmSymmetry::SkewSymmetric && i == j {
                return Err(err(line, "skew-symmetric storage has no diagonal entries"));
            }
            seen += 1;
            if seen > count {
                return Err(err(line, "more entries than declared"));
            }
            place(i, j, parse_value(line, &fields[2..])?);
        }
        if seen != count {
            return Err(err(size_line, "fewer entries than declared"));
        }
    } else {
        let mut positions = (0..cols).flat_map(|j| (0..rows).map(move |i| (i, j))).filter(|&(i, j)| match symmetry {
            MmSymmetry::General => true,
            MmSymmetry::SkewSymmetric => i > j,
            _ => i >= j,
        });
        for (line, l) in data {
            let fields: Vec<&str> = l.split_whitespace().collect();
            if fields.len() != width {
                return Err(err(line, "wrong number of fields in entry"));
            }
            let (i, j) = positions.next().ok_or_else(|| err(line, "more entries than declared"))?;
            place(i, j, parse_value(line, &fields)?);
        }
        if positions.next().is_some() {
            return Err(err(size_line, "fewer entries than declared"));
        }
    }
    Ok(m)
}

// ---------------------------------------------------------------- tag sidecar

/// Provenance label of one block: `zero`, `identity`, `A3`, `A3^-1`, `assigned(X)`, with
/// a leading `-` for negated blocks, or `compound(<expr>)` for anything else.
pub fn tag_label(e: &Expr) -> String {
    let sign = |negative: bool| if negative { "-" } else { "" };
    match e.tag() {
        Tag::Zero => "zero".into(),
        Tag::Identity { negative } => format!("{}identity", sign(negative)),
        Tag::Coef { index, negative } => format!("{}A{index}", sign(negative)),
        Tag::CoefInv { index, negative } => format!("{}A{index}^-1", sign(negative)),
        Tag::Assigned { var, negative } => format!("{}assigned({})", sign(negative), var.name()),
        Tag::AssignedInv { var, negative } => format!("{}assigned({})^-1", sign(negative), var.name()),
        Tag::Compound => format!("compound({e})"),
    }
}

/// Block layout of an exported pencil `λ L1 - L0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TagSidecar {
    pub m: u32,
    /// Size of the polynomial blocks.
    pub n: usize,
    /// Size of the trailing state block; `0` for polynomial pencils.
    pub r: usize,
    /// First scalar row and column of the state block, present when `r > 0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub border_offset: Option<usize>,
    /// 0-based block row holding `C` and block column holding `B`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub border_blocks: Option<(usize, usize)>,
    pub l1: Vec<Vec<String>>,
    pub l0: Vec<Vec<String>>,
}

fn label_grid(b: &BlockMatrix) -> Vec<Vec<String>> {
    (0..b.order()).map(|i| (0..b.order()).map(|j| tag_label(b.get(i, j))).collect()).collect()
}

impl TagSidecar {
    pub fn new(pencil: &BlockPencil, m: u32, n: usize, r: usize, border_blocks: Option<(usize, usize)>) -> Self {
        Self {
            m,
            n,
            r,
            border_offset: (r > 0).then_some(m as usize * n),
            border_blocks,
            l1: label_grid(&pencil.l1),
            l0: label_grid(&pencil.l0),
        }
    }

    /// Scalar order `m n + r`.
    pub fn dim(&self) -> usize {
        self.m as usize * self.n + self.r
    }

    /// Checks internal consistency: grid orders and the border offset.
    pub fn check(&self) -> Result<(), IoError> {
        let order = self.m as usize + usize::from(self.r > 0);
        for (name, g) in [("l1", &self.l1), ("l0", &self.l0)] {
            if g.len() != order || g.iter().any(|row| row.len() != order) {
                return Err(IoError::Shape(format!("{name} tag grid is not {order}x{order}")));
            }
        }
        let expected = (self.r > 0).then_some(self.m as usize * self.n);
        if self.border_offset != expected {
            return Err(IoError::Shape(format!("border offset {:?}, expected {expected:?}", self.border_offset)));
        }
        Ok(())
    }
}

/// A dense pencil together with its tags, as written to disk.
#[derive(Debug, Clone, PartialEq)]
pub struct PencilExport {
    pub tags: TagSidecar,
    pub dense: DensePencil<Complex64>,
}

pub const L1_FILE: &str = "L1.mtx";
pub const L0_FILE: &str = "L0.mtx";
pub const TAGS_FILE: &str = "tags.json";

impl PencilExport {
    pub fn write_dir(&self, dir: &Path) -> Result<(), IoError> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(L1_FILE), write_matrix_market(&self.dense.l1, "L1 of the pencil lambda*L1 - L0"))?;
        std::fs::write(dir.join(L0_FILE), write_matrix_market(&self.dense.l0, "L0 of the pencil lambda*L1 - L0"))?;
        std::fs::write(dir.join(TAGS_FILE), serde_json::to_string_pretty(&self.tags)? + "\n")?;
        Ok(())
    }

    pub fn read_dir(dir: &Path) -> Result<Self, IoError> {
        Self::from_texts(
            &std::fs::read_to_string(dir.join(L1_FILE))?,
            &std::fs::read_to_string(dir.join(L0_FILE))?,
            &std::fs::read_to_string(dir.join(TAGS_FILE))?,
        )
    }

    pub fn from_texts(l1: &str, l0: &str, tags: &str) -> Result<Self, IoError> {
        let tags: TagSidecar = serde_json::from_str(tags)?;
        tags.check()?;
        let l1 = read_matrix_market(l1)?;
        let l0 = read_matrix_market(l0)?;
        let d = tags.dim();
        for (name, mat) in [("L1", &l1), ("L0", &l0)] {
            if mat.shape() != (d, d) {
                return Err(IoError::Shape(format!("{name} is {}x{}, tags describe order {d}", mat.nrows(), mat.ncols())));
            }
        }
        Ok(Self { tags, dense: DensePencil { l1, l0 } })
    }
}
