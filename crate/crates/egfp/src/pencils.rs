//! EGFP descriptions, symbolic assembly, family classification and bandwidth.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::blockmat::{AssignedBlock, Bindings, BlockError, BlockMatrix, Entry, MatrixAssignment};
use crate::expr::{Expr, Sym};
use crate::tuples::{IndexTuple, SignClass, SignedIndex, TupleError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("invalid EGFP description: {0}")]
    Invalid(ValidationReport),
    #[error(transparent)]
    Block(#[from] BlockError),
    #[error(transparent)]
    Tuple(#[from] TupleError),
    #[error("no {kind} template for degree {m}")]
    UnsupportedTemplate { kind: Structure, m: u32 },
    #[error("polynomial degree {found} does not match description degree {expected}")]
    DegreeMismatch { expected: u32, found: u32 },
}

/// Which decoration of the pencil.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Decoration {
    LeftSigma,
    RightSigma,
    LeftTau,
    RightTau,
}

impl fmt::Display for Decoration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decoration::LeftSigma => "sigma1",
            Decoration::RightSigma => "sigma2",
            Decoration::LeftTau => "tau1",
            Decoration::RightTau => "tau2",
        })
    }
}

/// `(σ, τ, σ1, σ2, τ1, τ2)` with assignments `X1, X2, Y1, Y2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EgfpSpec {
    pub m: u32,
    pub sigma: IndexTuple,
    pub tau: IndexTuple,
    pub x1: MatrixAssignment,
    pub x2: MatrixAssignment,
    pub y1: MatrixAssignment,
    pub y2: MatrixAssignment,
    /// Places the σ decorations outside the τ decorations. Experimental, off by default.
    pub swap_decorations: bool,
}

impl EgfpSpec {
    /// Generalized Fiedler core with no decorations.
    pub fn core(m: u32, sigma: IndexTuple, tau: IndexTuple) -> Self {
        Self {
            m,
            sigma,
            tau,
            x1: MatrixAssignment::default(),
            x2: MatrixAssignment::default(),
            y1: MatrixAssignment::default(),
            y2: MatrixAssignment::default(),
            swap_decorations: false,
        }
    }

    pub fn with(mut self, which: Decoration, assignment: MatrixAssignment) -> Self {
        *self.decoration_mut(which) = assignment;
        self
    }

    pub fn decoration(&self, which: Decoration) -> &MatrixAssignment {
        match which {
            Decoration::LeftSigma => &self.x1,
            Decoration::RightSigma => &self.x2,
            Decoration::LeftTau => &self.y1,
            Decoration::RightTau => &self.y2,
        }
    }

    fn decoration_mut(&mut self, which: Decoration) -> &mut MatrixAssignment {
        match which {
            Decoration::LeftSigma => &mut self.x1,
            Decoration::RightSigma => &mut self.x2,
            Decoration::LeftTau => &mut self.y1,
            Decoration::RightTau => &mut self.y2,
        }
    }

    pub fn sigma1(&self) -> &IndexTuple {
        self.x1.tuple()
    }

    pub fn sigma2(&self) -> &IndexTuple {
        self.x2.tuple()
    }

    pub fn tau1(&self) -> &IndexTuple {
        self.y1.tuple()
    }

    pub fn tau2(&self) -> &IndexTuple {
        self.y2.tuple()
    }

    pub fn has_decorations(&self) -> bool {
        [&self.x1, &self.x2, &self.y1, &self.y2].iter().any(|a| !a.tuple().is_empty())
    }

    /// Names of the free decoration blocks, which must be bound before realizing.
    pub fn named_blocks(&self) -> BTreeSet<String> {
        [&self.x1, &self.x2, &self.y1, &self.y2]
            .iter()
            .flat_map(|a| a.blocks())
            .filter_map(|b| match b {
                AssignedBlock::Named(name) => Some(name.clone()),
                _ => None,
            })
            .collect()
    }

    /// `(σ1, σ, σ2)`.
    pub fn sigma_chain(&self) -> IndexTuple {
        IndexTuple::concat([self.sigma1(), &self.sigma, self.sigma2()])
    }

    /// `(τ1, τ, τ2)`.
    pub fn tau_chain(&self) -> IndexTuple {
        IndexTuple::concat([self.tau1(), &self.tau, self.tau2()])
    }

    /// `ω = -τ` as a nonnegative tuple.
    pub fn omega(&self) -> IndexTuple {
        self.tau.neg()
    }

    /// Hypothesis under which the pencil is guaranteed operation free.
    pub fn operation_free_hypothesis(&self) -> bool {
        let m = self.m;
        let sigma_clash = m > 0 && self.sigma.contains(SignedIndex::plus(m - 1)) && self.sigma.contains(SignedIndex::plus(m));
        let tau_clash = self.tau.contains(SignedIndex::minus(1)) && self.tau.contains(SignedIndex::minus(0));
        !sigma_clash && !tau_clash
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }
}

/// One violated clause of the EGFP definition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DegreeBelowTwo(u32),
    SigmaNotNonnegative,
    TauNotNonpositive,
    /// `(σ, -τ)` misses or repeats some of `{0:m}`.
    NotPermutation {
        missing: Vec<u32>,
        repeated: Vec<u32>,
    },
    ForbiddenDecorationIndex {
        decoration: Decoration,
        index: SignedIndex,
    },
    ChainViolatesSip {
        chain: &'static str,
    },
    AssignmentLength {
        decoration: Decoration,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DegreeBelowTwo(m) => write!(f, "degree {m} is below 2"),
            Violation::SigmaNotNonnegative => f.write_str("sigma must contain nonnegative indices only"),
            Violation::TauNotNonpositive => f.write_str("tau must contain nonpositive indices only"),
            Violation::NotPermutation { missing, repeated } => {
                write!(f, "(sigma, -tau) is not a permutation of {{0:m}}: missing {missing:?}, repeated {repeated:?}")
            }
            Violation::ForbiddenDecorationIndex { decoration, index } => {
                write!(f, "{decoration} contains the forbidden index {index}")
            }
            Violation::ChainViolatesSip { chain } => write!(f, "{chain} does not satisfy the SIP"),
            Violation::AssignmentLength { decoration } => write!(f, "{decoration} assignment length mismatch"),
        }
    }
}

/// Nonsingularity that realizing the pencil will require of `P`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Requirement {
    /// `m ∈ σ` puts `A_m^{-1}` into `L0`.
    LeadingInvertible,
    /// `-0 ∈ τ` puts `A_0^{-1}` into `L1`.
    TrailingInvertible,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub requirements: Vec<Requirement>,
    pub operation_free: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn validate(spec: &EgfpSpec) -> ValidationReport {
    let m = spec.m;
    let mut violations = Vec::new();
    if m < 2 {
        violations.push(Violation::DegreeBelowTwo(m));
    }
    let sigma_ok = spec.sigma.iter().all(|i| !i.is_minus());
    let tau_ok = spec.tau.iter().all(|i| i.is_minus());
    if !sigma_ok {
        violations.push(Violation::SigmaNotNonnegative);
    }
    if !tau_ok {
        violations.push(Violation::TauNotNonpositive);
    }
    let mut counts = vec![0usize; m as usize + 1];
    let mut out_of_range = Vec::new();
    for i in spec.sigma.iter().chain(spec.tau.iter()) {
        match counts.get_mut(i.magnitude() as usize) {
            Some(c) => *c += 1,
            None => out_of_range.push(i.magnitude()),
        }
    }
    let missing: Vec<u32> = (0..=m).filter(|&k| counts[k as usize] == 0).collect();
    let mut repeated: Vec<u32> = (0..=m).filter(|&k| counts[k as usize] > 1).collect();
    repeated.extend(out_of_range);
    if !missing.is_empty() || !repeated.is_empty() {
        violations.push(Violation::NotPermutation { missing, repeated });
    }

    let sigma_allowed = |i: SignedIndex| !i.is_minus() && spec.sigma.contains(i) && i.magnitude() + 1 < m;
    let tau_allowed = |i: SignedIndex| i.is_minus() && spec.tau.contains(i) && i.magnitude() > 1;
    for (which, allowed) in [
        (Decoration::LeftSigma, &sigma_allowed as &dyn Fn(SignedIndex) -> bool),
        (Decoration::RightSigma, &sigma_allowed),
        (Decoration::LeftTau, &tau_allowed),
        (Decoration::RightTau, &tau_allowed),
    ] {
        let a = spec.decoration(which);
        if a.tuple().len() != a.blocks().len() {
            violations.push(Violation::AssignmentLength { decoration: which });
        }
        for i in a.tuple().iter() {
            if !allowed(i) {
                violations.push(Violation::ForbiddenDecorationIndex { decoration: which, index: i });
            }
        }
    }
    for (chain, name) in [(spec.sigma_chain(), "(sigma1, sigma, sigma2)"), (spec.tau_chain(), "(tau1, tau, tau2)")] {
        if chain.class() != SignClass::Mixed && !chain.satisfies_sip().unwrap_or(false) {
            violations.push(Violation::ChainViolatesSip { chain: name });
        }
    }

    let mut requirements = Vec::new();
    if spec.sigma.contains(SignedIndex::plus(m)) {
        requirements.push(Requirement::LeadingInvertible);
    }
    if spec.tau.contains(SignedIndex::minus(0)) {
        requirements.push(Requirement::TrailingInvertible);
    }
    ValidationReport { violations, requirements, operation_free: spec.operation_free_hypothesis() }
}

/// `λ L1 - L0` as a pair of symbolic block matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPencil {
    pub l1: BlockMatrix,
    pub l0: BlockMatrix,
}

/// Dense realization of `λ L1 - L0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensePencil<T: Entry> {
    pub l1: DMatrix<T>,
    pub l0: DMatrix<T>,
}

impl<T: Entry> DensePencil<T> {
    pub fn eval(&self, lambda: T) -> DMatrix<T> {
        &self.l1 * lambda - &self.l0
    }

    pub fn dim(&self) -> usize {
        self.l1.nrows()
    }
}

impl BlockPencil {
    pub fn bandwidth(&self) -> usize {
        self.l1.bandwidth().into_iter().chain(self.l0.bandwidth()).max().unwrap_or(0)
    }

    pub fn is_operation_free(&self) -> bool {
        self.l1.is_operation_free() && self.l0.is_operation_free()
    }

    pub fn realize<T: Entry>(&self, bindings: &Bindings<T>, n: usize, r: usize) -> Result<DensePencil<T>, BlockError> {
        Ok(DensePencil { l1: self.l1.realize(bindings, n, r)?, l0: self.l0.realize(bindings, n, r)? })
    }

    pub fn map(&self, f: impl Fn(&BlockMatrix) -> BlockMatrix) -> Self {
        Self { l1: f(&self.l1), l0: f(&self.l0) }
    }

    /// Symbols appearing anywhere in the pencil.
    pub fn symbols(&self) -> BTreeSet<Sym> {
        self.l1.blocks().iter().chain(self.l0.blocks()).flat_map(|e| e.symbols()).collect()
    }
}

fn factors(a: &MatrixAssignment, m: u32) -> Vec<(SignedIndex, Expr)> {
    a.tuple().iter().zip(a.exprs(m)).collect()
}

/// Symbolic `M_{τ1}(Y1) M_{σ1}(X1) (λ M^P_τ - M^P_σ) M_{σ2}(X2) M_{τ2}(Y2)`.
pub fn build(spec: &EgfpSpec) -> Result<BlockPencil, SpecError> {
    let report = validate(spec);
    if !report.is_valid() {
        return Err(SpecError::Invalid(report));
    }
    let m = spec.m;
    let (left, right) = decoration_factors(spec);
    let assemble = |core: &IndexTuple| -> Result<BlockMatrix, SpecError> {
        let mut out = BlockMatrix::identity(m as usize);
        for (i, w) in &left {
            out.mul_elementary_right(*i, w, m)?;
        }
        for i in core.iter() {
            out.mul_elementary_right(i, &crate::blockmat::trivial_value(i, m), m)?;
        }
        for (i, w) in &right {
            out.mul_elementary_right(*i, w, m)?;
        }
        Ok(out)
    };
    Ok(BlockPencil { l1: assemble(&spec.tau)?, l0: assemble(&spec.sigma)? })
}

/// Elementary factors `M_j(W)` in multiplication order.
pub type Factors = Vec<(SignedIndex, Expr)>;

/// Ordered left and right decoration factors.
pub fn decoration_factors(spec: &EgfpSpec) -> (Factors, Factors) {
    let m = spec.m;
    let (x1, x2, y1, y2) = (factors(&spec.x1, m), factors(&spec.x2, m), factors(&spec.y1, m), factors(&spec.y2, m));
    if spec.swap_decorations {
        ([x1, y1].concat(), [y2, x2].concat())
    } else {
        ([y1, x1].concat(), [x2, y2].concat())
    }
}

/// Numeric pencil for `P` with named assignment values in `bindings`.
pub fn build_dense<T: Entry>(spec: &EgfpSpec, bindings: &Bindings<T>, n: usize) -> Result<DensePencil<T>, SpecError> {
    for a in [&spec.x1, &spec.x2, &spec.y1, &spec.y2] {
        for (i, b) in a.tuple().iter().zip(a.blocks()) {
            if let AssignedBlock::Named(name) = b {
                let v = bindings.value(name).ok_or_else(|| BlockError::Unbound(name.clone()))?;
                if T::try_invert(v).is_none() {
                    return Err(BlockError::NotInvertible { index: i, value: name.clone() }.into());
                }
            }
        }
    }
    Ok(build(spec)?.realize(bindings, n, 0)?)
}

/// Families of the classification remark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Fp,
    Gfp,
    Fpr,
    Gfpr,
    EgfpProper,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Fp => "FP",
            Family::Gfp => "GFP",
            Family::Fpr => "FPR",
            Family::Gfpr => "GFPR",
            Family::EgfpProper => "EGFP",
        })
    }
}

fn is_permutation_of(t: &IndexTuple, lo: u32, hi: u32, minus: bool) -> bool {
    let mut seen: Vec<u32> = t.iter().filter(|i| i.is_minus() == minus).map(|i| i.magnitude()).collect();
    if seen.len() != t.len() {
        return false;
    }
    seen.sort_unstable();
    seen == (lo..=hi).collect::<Vec<_>>()
}

pub fn classify(spec: &EgfpSpec) -> BTreeSet<Family> {
    let m = spec.m;
    let mut out = BTreeSet::new();
    let undecorated = !spec.has_decorations();
    if undecorated {
        out.insert(Family::Gfp);
        if is_permutation_of(&spec.sigma, 0, m - 1, false) && spec.tau == IndexTuple::nonpositive(&[m]) {
            out.insert(Family::Fp);
        }
    }
    let split = (0..m).any(|h| is_permutation_of(&spec.sigma, 0, h, false) && is_permutation_of(&spec.tau, h + 1, m, true));
    if split {
        out.insert(Family::Gfpr);
        if [&spec.x1, &spec.x2, &spec.y1, &spec.y2].iter().all(|a| a.is_trivial()) {
            out.insert(Family::Fpr);
        }
    }
    if out.is_empty() {
        out.insert(Family::EgfpProper);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BandClass {
    Tridiagonal,
    Pentadiagonal,
    Wider,
}

impl BandClass {
    pub fn of_bandwidth(b: usize) -> Self {
        match b {
            0 | 1 => BandClass::Tridiagonal,
            2 => BandClass::Pentadiagonal,
            _ => BandClass::Wider,
        }
    }
}

impl fmt::Display for BandClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BandClass::Tridiagonal => "tridiagonal",
            BandClass::Pentadiagonal => "pentadiagonal",
            BandClass::Wider => "wider",
        })
    }
}

/// Bandwidth predicted from consecutions and inversions of the decorated chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandPrediction {
    Class(BandClass),
    /// Some run has length 1 but a decoration contains an end index, so the
    /// pentadiagonal characterization does not apply.
    NotApplicable,
}

/// Largest consecution or inversion at `t` and `-t` for `1 <= t <= m-1`.
///
/// Runs are measured with `m` dropped from the `σ` chain and `-0` dropped from
/// the `τ` chain: those factors act on the same end block as `m-1` (resp. `-1`),
/// so extending a run into them never widens the pencil.
pub fn max_interior_run(spec: &EgfpSpec) -> i64 {
    let m = spec.m;
    let sc = spec.sigma_chain().filter(|i| i != SignedIndex::plus(m));
    let tc = spec.tau_chain().filter(|i| i != SignedIndex::minus(0));
    let mut worst = -1;
    for t in 1..spec.m {
        for v in [
            sc.consecutions(SignedIndex::plus(t)),
            sc.inversions(SignedIndex::plus(t)),
            tc.consecutions(SignedIndex::minus(t)),
            tc.inversions(SignedIndex::minus(t)),
        ] {
            worst = worst.max(v.unwrap_or(-1));
        }
    }
    worst
}

/// Whether no decoration contains an end index of `σ` (resp. `τ`).
pub fn end_index_hypothesis(spec: &EgfpSpec) -> bool {
    let sigma_ends = spec.sigma.end_indices(spec.m).unwrap_or_default();
    let tau_ends = spec.tau.end_indices(spec.m).unwrap_or_default();
    let clean = |a: &IndexTuple, ends: &BTreeSet<SignedIndex>| a.iter().all(|i| !ends.contains(&i));
    clean(spec.sigma1(), &sigma_ends) && clean(spec.sigma2(), &sigma_ends) && clean(spec.tau1(), &tau_ends) && clean(spec.tau2(), &tau_ends)
}

pub fn predict_bandwidth(spec: &EgfpSpec) -> BandPrediction {
    match max_interior_run(spec) {
        i64::MIN..=0 => BandPrediction::Class(BandClass::Tridiagonal),
        1 if end_index_hypothesis(spec) => BandPrediction::Class(BandClass::Pentadiagonal),
        1 => BandPrediction::NotApplicable,
        _ => BandPrediction::Class(BandClass::Wider),
    }
}

/// Matrix structures with stored templates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Structure {
    Symmetric,
    SkewSymmetric,
    TEven,
    TOdd,
    TPalindromic,
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Structure::Symmetric => "symmetric",
            Structure::SkewSymmetric => "skew-symmetric",
            Structure::TEven => "T-even",
            Structure::TOdd => "T-odd",
            Structure::TPalindromic => "T-palindromic",
        })
    }
}

impl Structure {
    /// `A_j^T` for a polynomial with this structure, as a symbol rule.
    pub fn coefficient_transpose(self, m: u32) -> impl Fn(Sym) -> Expr {
        move |s| {
            let (j, inv) = match s {
                Sym::Coef(j) => (j, false),
                Sym::CoefInv(j) => (j, true),
                other => return Expr::sym(other),
            };
            let (k, negative) = match self {
                Structure::Symmetric => (j, false),
                Structure::SkewSymmetric => (j, true),
                Structure::TEven => (j, j % 2 == 1),
                Structure::TOdd => (j, j % 2 == 0),
                Structure::TPalindromic => (m - j, false),
            };
            let base = Expr::sym(if inv { Sym::CoefInv(k) } else { Sym::Coef(k) });
            if negative {
                -base
            } else {
                base
            }
        }
    }

    /// Whether `λ L1 - L0` carries this structure blockwise, with assigned
    /// matrices treated as symmetric.
    pub fn holds_for(self, pencil: &BlockPencil, m: u32) -> bool {
        let rule = self.coefficient_transpose(m);
        let (t1, t0) = (pencil.l1.transpose_with(&rule), pencil.l0.transpose_with(&rule));
        match self {
            Structure::Symmetric => t1 == pencil.l1 && t0 == pencil.l0,
            Structure::SkewSymmetric => t1 == pencil.l1.scale(-1) && t0 == pencil.l0.scale(-1),
            Structure::TEven => t1 == pencil.l1.scale(-1) && t0 == pencil.l0,
            Structure::TOdd => t1 == pencil.l1 && t0 == pencil.l0.scale(-1),
            Structure::TPalindromic => t0 == pencil.l1.scale(-1),
        }
    }
}

/// A structure-preserving pencil: `Q L(λ)` where `Q` is a block sign matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredPencil {
    pub pencil: BlockPencil,
    /// Block signs of `Q`; `None` when no left multiplier is used.
    pub q: Option<Vec<i64>>,
    /// Generating description when the template is an EGFP.
    pub spec: Option<EgfpSpec>,
}

impl StructuredPencil {
    /// The structured pencil `Q L(λ)`.
    pub fn structured(&self) -> BlockPencil {
        match &self.q {
            Some(q) => self.pencil.map(|b| b.scale_rows(q)),
            None => self.pencil.clone(),
        }
    }
}

fn tuple(s: &str) -> IndexTuple {
    s.parse().expect("template tuples are well formed")
}

/// Example pencil of degree 5: `(λ M^P_{(-5,-1)} - M^P_{(3,4,2,0)}) M_3(X)`.
pub fn degree_five_example(x: AssignedBlock) -> EgfpSpec {
    let x2 = MatrixAssignment::new(tuple("(3)"), vec![x]).expect("lengths match");
    EgfpSpec::core(5, tuple("(3,4,2,0)"), tuple("(-5,-1)")).with(Decoration::RightSigma, x2)
}

/// Symmetric degree-6 pencil `(λ M^P_{(-6,-3,-2,-4,-0)} - M^P_{(1,5)}) M^P_{-3}`.
pub fn degree_six_symmetric() -> EgfpSpec {
    EgfpSpec::core(6, tuple("(1,5)"), tuple("(-6,-3,-2,-4,-0)")).with(Decoration::RightTau, MatrixAssignment::trivial(tuple("(-3)")))
}

/// Symmetric block-pentadiagonal degree-8 pencil with one free symmetric matrix `X`.
pub fn degree_eight_symmetric_penta(x: &str) -> EgfpSpec {
    let free = || AssignedBlock::Named(x.to_string());
    EgfpSpec::core(8, tuple("(1,0,2,4)"), tuple("(-3,-6,-5,-7,-8)"))
        .with(Decoration::LeftSigma, MatrixAssignment::new(tuple("(0)"), vec![free()]).expect("lengths match"))
        .with(Decoration::RightSigma, MatrixAssignment::new(tuple("(1,0)"), vec![AssignedBlock::Trivial, free()]).expect("lengths match"))
        .with(Decoration::LeftTau, MatrixAssignment::trivial(tuple("(-8)")))
        .with(Decoration::RightTau, MatrixAssignment::trivial(tuple("(-6)")))
}

/// Anti-block-pentadiagonal `T`-palindromic pencil of degree 7, stored as a reference grid.
pub fn degree_seven_palindromic() -> BlockPencil {
    crate::golden::load("degree7_palindromic").expect("embedded").pencil
}

/// Structure-preserving template of the given kind and degree.
pub fn structured_generator(kind: Structure, m: u32) -> Result<StructuredPencil, SpecError> {
    let from_spec = |spec: EgfpSpec, q: Option<Vec<i64>>| -> Result<StructuredPencil, SpecError> {
        Ok(StructuredPencil { pencil: build(&spec)?, q, spec: Some(spec) })
    };
    match (kind, m) {
        (Structure::Symmetric, 5) => from_spec(degree_five_example(AssignedBlock::Trivial), None),
        (Structure::Symmetric, 6) => from_spec(degree_six_symmetric(), None),
        (Structure::Symmetric, 8) => from_spec(degree_eight_symmetric_penta("X"), None),
        (Structure::TEven, 5) => from_spec(degree_five_example(AssignedBlock::Trivial), Some(vec![1, -1, 1, -1, 1])),
        (Structure::TOdd, 5) => from_spec(degree_five_example(AssignedBlock::Trivial), Some(vec![1, -1, -1, 1, 1])),
        (Structure::SkewSymmetric, 5) => from_spec(degree_five_example(AssignedBlock::Trivial), Some(vec![1, 1, -1, -1, 1])),
        (Structure::TPalindromic, 7) => Ok(StructuredPencil { pencil: degree_seven_palindromic(), q: None, spec: None }),
        _ => Err(SpecError::UnsupportedTemplate { kind, m }),
    }
}

/// Constraints for [`enumerate_specs`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumerationFilter {
    /// Maximum length of each decoration tuple.
    pub decoration_cap: usize,
    pub band: Option<BandClass>,
    pub family: Option<Family>,
    pub structure: Option<Structure>,
}

impl Default for EnumerationFilter {
    fn default() -> Self {
        Self { decoration_cap: 2, band: None, family: None, structure: None }
    }
}

fn permutations(items: &[SignedIndex]) -> Vec<Vec<SignedIndex>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (k, &first) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(k);
        for mut tail in permutations(&rest) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

fn words(alphabet: &[SignedIndex], max_len: usize) -> Vec<IndexTuple> {
    let mut out = vec![IndexTuple::empty()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for &a in alphabet {
                let mut v: Vec<SignedIndex> = w.clone();
                v.push(a);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned().map(IndexTuple::new));
        frontier = next;
    }
    out
}

fn decorate(which: Decoration, t: &IndexTuple) -> MatrixAssignment {
    let prefix = match which {
        Decoration::LeftSigma => "X1_",
        Decoration::RightSigma => "X2_",
        Decoration::LeftTau => "Y1_",
        Decoration::RightTau => "Y2_",
    };
    MatrixAssignment::free(t.clone(), prefix)
}

/// All valid descriptions of degree `m` (decorations as free assignments),
/// in a deterministic order, restricted by `filter`.
pub fn enumerate_specs(m: u32, filter: &EnumerationFilter) -> impl Iterator<Item = EgfpSpec> + '_ {
    let cap = filter.decoration_cap;
    (0u32..(1 << (m + 1)))
        .flat_map(move |mask| {
            let sigma_set: Vec<SignedIndex> = (0..=m).filter(|k| mask & (1 << k) != 0).map(SignedIndex::plus).collect();
            let tau_set: Vec<SignedIndex> = (0..=m).rev().filter(|k| mask & (1 << k) == 0).map(SignedIndex::minus).collect();
            let sigmas = permutations(&sigma_set);
            let taus = permutations(&tau_set);
            sigmas.into_iter().flat_map(move |s| {
                let taus = taus.clone();
                taus.into_iter().map(move |t| (IndexTuple::new(s.clone()), IndexTuple::new(t)))
            })
        })
        .flat_map(move |(sigma, tau)| decorated(m, sigma, tau, cap))
        .filter(move |spec| spec_matches(spec, filter))
}

fn decorated(m: u32, sigma: IndexTuple, tau: IndexTuple, cap: usize) -> Vec<EgfpSpec> {
    let sig_alpha: Vec<SignedIndex> = sigma.iter().filter(|i| i.magnitude() + 1 < m).collect();
    let tau_alpha: Vec<SignedIndex> = tau.iter().filter(|i| i.magnitude() > 1).collect();
    let sip = |t: &IndexTuple| t.satisfies_sip().unwrap_or(false);
    let sig_words = words(&sig_alpha, cap);
    let tau_words = words(&tau_alpha, cap);
    let mut sig_pairs = Vec::new();
    for a in &sig_words {
        for b in &sig_words {
            if sip(&IndexTuple::concat([a, &sigma, b])) {
                sig_pairs.push((a.clone(), b.clone()));
            }
        }
    }
    let mut tau_pairs = Vec::new();
    for a in &tau_words {
        for b in &tau_words {
            if sip(&IndexTuple::concat([a, &tau, b])) {
                tau_pairs.push((a.clone(), b.clone()));
            }
        }
    }
    let mut out = Vec::with_capacity(sig_pairs.len() * tau_pairs.len());
    for (s1, s2) in &sig_pairs {
        for (t1, t2) in &tau_pairs {
            out.push(
                EgfpSpec::core(m, sigma.clone(), tau.clone())
                    .with(Decoration::LeftSigma, decorate(Decoration::LeftSigma, s1))
                    .with(Decoration::RightSigma, decorate(Decoration::RightSigma, s2))
                    .with(Decoration::LeftTau, decorate(Decoration::LeftTau, t1))
                    .with(Decoration::RightTau, decorate(Decoration::RightTau, t2)),
            );
        }
    }
    out
}

fn spec_matches(spec: &EgfpSpec, filter: &EnumerationFilter) -> bool {
    if let Some(band) = filter.band {
        let ok = match predict_bandwidth(spec) {
            BandPrediction::Class(c) => c <= band,
            BandPrediction::NotApplicable => band == BandClass::Wider,
        };
        if !ok {
            return false;
        }
    }
    if let Some(f) = filter.family {
        if !classify(spec).contains(&f) {
            return false;
        }
    }
    if let Some(s) = filter.structure {
        match build(spec) {
            Ok(p) => {
                if !s.holds_for(&p, spec.m) {
                    return false;
                }
            }
            Err(_) => return false,
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(rows: &[&[&str]]) -> Vec<Expr> {
        rows.iter().flat_map(|r| r.iter().map(|s| s.parse::<Expr>().unwrap())).collect()
    }

    #[test]
    fn degree_five_example_layout() {
        let p = build(&degree_five_example(AssignedBlock::Named("X".into()))).unwrap();
        let l1 = grid(&[
            &["A5", "0", "0", "0", "0"],
            &["0", "X", "I", "0", "0"],
            &["0", "I", "0", "0", "0"],
            &["0", "0", "0", "0", "I"],
            &["0", "0", "0", "I", "A1"],
        ]);
        let l0 = grid(&[
            &["-A4", "X", "I", "0", "0"],
            &["-A3", "-A2", "0", "I", "0"],
            &["I", "0", "0", "0", "0"],
            &["0", "I", "0", "0", "0"],
            &["0", "0", "0", "0", "-A0"],
        ]);
        assert_eq!(p.l1.blocks(), &l1[..]);
        assert_eq!(p.l0.blocks(), &l0[..]);
        assert!(p.is_operation_free());
    }

    #[test]
    fn templates_carry_their_structure() {
        for (kind, m) in [
            (Structure::Symmetric, 5),
            (Structure::Symmetric, 6),
            (Structure::Symmetric, 8),
            (Structure::TEven, 5),
            (Structure::TOdd, 5),
            (Structure::SkewSymmetric, 5),
            (Structure::TPalindromic, 7),
        ] {
            let t = structured_generator(kind, m).unwrap();
            assert!(kind.holds_for(&t.structured(), m), "{kind} m={m}");
        }
        let t = structured_generator(Structure::TEven, 5).unwrap();
        assert!(!Structure::Symmetric.holds_for(&t.structured(), 5));
        assert!(matches!(structured_generator(Structure::TOdd, 4), Err(SpecError::UnsupportedTemplate { .. })));
    }

    #[test]
    fn degree_eight_template_is_pentadiagonal() {
        let spec = degree_eight_symmetric_penta("X");
        assert_eq!(build(&spec).unwrap().bandwidth(), 2);
        assert_eq!(predict_bandwidth(&spec), BandPrediction::Class(BandClass::Pentadiagonal));
        assert_eq!(classify(&spec), [Family::EgfpProper].into());
    }

    #[test]
    fn validation_clauses() {
        let ok = degree_five_example(AssignedBlock::Named("X".into()));
        assert!(validate(&ok).is_valid());

        let bad = EgfpSpec::core(4, tuple("(0,1)"), tuple("(-4)"));
        assert!(matches!(validate(&bad).violations[0], Violation::NotPermutation { .. }));

        let forbidden =
            EgfpSpec::core(4, tuple("(0,1,2,3)"), tuple("(-4)")).with(Decoration::LeftSigma, MatrixAssignment::trivial(tuple("(3)")));
        assert!(validate(&forbidden)
            .violations
            .contains(&Violation::ForbiddenDecorationIndex { decoration: Decoration::LeftSigma, index: SignedIndex::plus(3) }));

        let not_sip =
            EgfpSpec::core(4, tuple("(3,2,1,0)"), tuple("(-4)")).with(Decoration::RightSigma, MatrixAssignment::trivial(tuple("(1)")));
        assert!(validate(&not_sip).violations.contains(&Violation::ChainViolatesSip { chain: "(sigma1, sigma, sigma2)" }));

        let all_sigma = EgfpSpec::core(3, tuple("(0,1,2,3)"), IndexTuple::empty());
        let report = validate(&all_sigma);
        assert!(report.is_valid());
        assert_eq!(report.requirements, vec![Requirement::LeadingInvertible]);
    }

    #[test]
    fn classification() {
        let proper = degree_five_example(AssignedBlock::Named("X".into()));
        assert_eq!(classify(&proper), [Family::EgfpProper].into());
        let fp = EgfpSpec::core(4, tuple("(2,0,1,3)"), tuple("(-4)"));
        assert_eq!(classify(&fp), [Family::Fp, Family::Gfp, Family::Fpr, Family::Gfpr].into());
        let fpr =
            EgfpSpec::core(4, tuple("(1,0)"), tuple("(-4,-3,-2)")).with(Decoration::LeftSigma, MatrixAssignment::trivial(tuple("(0)")));
        assert!(classify(&fpr).contains(&Family::Fpr));
        let gfp_only = EgfpSpec::core(3, tuple("(0,2)"), tuple("(-3,-1)"));
        assert_eq!(classify(&gfp_only), [Family::Gfp].into());
    }

    #[test]
    fn fiedler_pencil_leading_block() {
        let fp = EgfpSpec::core(3, tuple("(2,1,0)"), tuple("(-3)"));
        let p = build(&fp).unwrap();
        assert_eq!(p.l1, BlockMatrix::fiedler(SignedIndex::minus(3), 3).unwrap());
        assert_eq!(p.l0, BlockMatrix::fiedler_product(&tuple("(2,1,0)"), 3).unwrap());
    }

    #[test]
    fn operation_free_counterexample() {
        let spec =
            EgfpSpec::core(3, tuple("(3)"), tuple("(-2,-1,-0)")).with(Decoration::RightTau, MatrixAssignment::trivial(tuple("(-2)")));
        assert!(!spec.operation_free_hypothesis());
        let p = build(&spec).unwrap();
        assert!(!p.is_operation_free());
        assert_eq!(p.l1.get(1, 2), &"-A2*A0^-1".parse::<Expr>().unwrap());
    }

    #[test]
    fn enumeration_counts_fiedler_pencils() {
        let filter = EnumerationFilter { family: Some(Family::Fp), ..Default::default() };
        assert_eq!(enumerate_specs(3, &filter).count(), 6);
        assert_eq!(enumerate_specs(4, &filter).count(), 24);
    }

    #[test]
    fn tridiagonal_filter_is_inside_pentadiagonal() {
        let tri = EnumerationFilter { band: Some(BandClass::Tridiagonal), ..Default::default() };
        let penta = EnumerationFilter { band: Some(BandClass::Pentadiagonal), ..Default::default() };
        let t: BTreeSet<String> = enumerate_specs(3, &tri).map(|s| format!("{s:?}")).collect();
        let p: BTreeSet<String> = enumerate_specs(3, &penta).map(|s| format!("{s:?}")).collect();
        assert!(!t.is_empty() && t.is_subset(&p) && t.len() < p.len());
    }
}
