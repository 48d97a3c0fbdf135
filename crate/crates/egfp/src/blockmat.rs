//! Elementary and Fiedler block matrices, assignment products, and the sparse
//! block-row/column action kernel.
//!
//! Block positions are 1-based in the public kernel API (`e_{m-i}` addresses block
//! `m - i`) and 0-based in grid accessors. For `1 <= k <= m-1` the factor `M_{±k}`
//! acts on blocks `m-k` and `m-k+1`; `M_0`, `M_{-0}` act on block `m` and
//! `M_m`, `M_{-m}` on block `1`.

use std::collections::HashMap;
use std::ops::Neg;

use nalgebra::{ClosedAddAssign, ClosedMulAssign, ClosedSubAssign, DMatrix, Scalar};
use num_complex::Complex64;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::expr::{Expr, Sym, Tag, VarId};
use crate::tuples::{IndexTuple, Sign, SignedIndex, TupleError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BlockError {
    #[error("index {index} out of range for degree {m}")]
    IndexOutOfRange { index: SignedIndex, m: u32 },
    #[error("factor {index} needs the inverse of {value}, which is not invertible")]
    NotInvertible { index: SignedIndex, value: String },
    #[error("singular matrix bound to {0}")]
    SingularBinding(String),
    #[error("no value bound to {0}")]
    Unbound(String),
    #[error("assignment has {values} matrices for a tuple of length {len}")]
    LengthMismatch { len: usize, values: usize },
    #[error("matrix polynomial: {0}")]
    BadPolynomial(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Tuple(#[from] TupleError),
}

/// Scalars a symbolic block matrix can be realized over.
pub trait Entry:
    Scalar + Copy + Zero + One + ClosedAddAssign + ClosedSubAssign + ClosedMulAssign + Neg<Output = Self> + Send + Sync
{
    fn from_i64(v: i64) -> Self;
    fn try_invert(m: &DMatrix<Self>) -> Option<DMatrix<Self>>;
}

impl Entry for Complex64 {
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }

    fn try_invert(m: &DMatrix<Self>) -> Option<DMatrix<Self>> {
        m.clone().try_inverse()
    }
}

impl Entry for i64 {
    fn from_i64(v: i64) -> Self {
        v
    }

    /// Exact inverse, available only when it is itself an integer matrix.
    fn try_invert(m: &DMatrix<Self>) -> Option<DMatrix<Self>> {
        let inv = m.map(|x| x as f64).try_inverse()?;
        let rounded = inv.map(|x| x.round() as i64);
        (m * &rounded == DMatrix::identity(m.nrows(), m.ncols())).then_some(rounded)
    }
}

/// `P(λ) = Σ_{j=0}^{m} λ^j A_j` with square coefficients of equal size, `m >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPolynomial<T: Entry = Complex64> {
    coeffs: Vec<DMatrix<T>>,
}

impl<T: Entry> MatrixPolynomial<T> {
    pub fn new(coeffs: Vec<DMatrix<T>>) -> Result<Self, BlockError> {
        if coeffs.len() < 3 {
            return Err(BlockError::BadPolynomial(format!("degree {} below 2", coeffs.len() as i64 - 1)));
        }
        let n = coeffs[0].nrows();
        if n == 0 || coeffs.iter().any(|a| a.nrows() != n || a.ncols() != n) {
            return Err(BlockError::BadPolynomial("coefficients must be square of one nonzero size".into()));
        }
        if coeffs.last().is_some_and(|a| a.iter().all(|x| x.is_zero())) {
            return Err(BlockError::BadPolynomial("leading coefficient is zero".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn degree(&self) -> u32 {
        self.coeffs.len() as u32 - 1
    }

    pub fn size(&self) -> usize {
        self.coeffs[0].nrows()
    }

    pub fn coeff(&self, j: u32) -> &DMatrix<T> {
        &self.coeffs[j as usize]
    }

    pub fn coeffs(&self) -> &[DMatrix<T>] {
        &self.coeffs
    }

    pub fn eval(&self, lambda: T) -> DMatrix<T> {
        let mut acc = self.coeffs.last().expect("nonempty").clone();
        for a in self.coeffs.iter().rev().skip(1) {
            acc = acc * lambda + a;
        }
        acc
    }

    pub fn map<U: Entry>(&self, f: impl Fn(T) -> U) -> MatrixPolynomial<U> {
        MatrixPolynomial { coeffs: self.coeffs.iter().map(|a| a.map(&f)).collect() }
    }
}

impl MatrixPolynomial<Complex64> {
    pub fn frobenius_norm(&self) -> f64 {
        self.coeffs.iter().map(|a| a.norm_squared()).sum::<f64>().sqrt()
    }

    /// Reversal `λ^m P(1/λ)`.
    pub fn reversal(&self) -> Self {
        Self { coeffs: self.coeffs.iter().rev().cloned().collect() }
    }
}

/// Numeric values for the symbols of a block matrix.
#[derive(Debug, Clone)]
pub struct Bindings<T: Entry = Complex64> {
    coeffs: Vec<DMatrix<T>>,
    vars: HashMap<VarId, DMatrix<T>>,
}

impl<T: Entry> Bindings<T> {
    pub fn new(p: &MatrixPolynomial<T>) -> Self {
        Self { coeffs: p.coeffs.clone(), vars: HashMap::new() }
    }

    pub fn without_polynomial() -> Self {
        Self { coeffs: Vec::new(), vars: HashMap::new() }
    }

    pub fn bind(&mut self, name: &str, value: DMatrix<T>) -> &mut Self {
        self.vars.insert(VarId::named(name), value);
        self
    }

    pub fn with(mut self, name: &str, value: DMatrix<T>) -> Self {
        self.bind(name, value);
        self
    }

    pub fn value(&self, name: &str) -> Option<&DMatrix<T>> {
        self.vars.get(&VarId::named(name))
    }

    fn base(&self, s: Sym) -> Result<&DMatrix<T>, BlockError> {
        match s {
            Sym::Coef(j) | Sym::CoefInv(j) => self.coeffs.get(j as usize).ok_or_else(|| BlockError::Unbound(format!("A{j}"))),
            Sym::Var(v) | Sym::VarInv(v) => self.vars.get(&v).ok_or_else(|| BlockError::Unbound(v.name())),
        }
    }

    fn symbol_value(&self, s: Sym, cache: &mut HashMap<Sym, DMatrix<T>>) -> Result<DMatrix<T>, BlockError> {
        if let Some(v) = cache.get(&s) {
            return Ok(v.clone());
        }
        let base = self.base(s)?;
        let v = match s {
            Sym::Coef(_) | Sym::Var(_) => base.clone(),
            Sym::CoefInv(_) | Sym::VarInv(_) => T::try_invert(base).ok_or_else(|| BlockError::SingularBinding(s.inverse().to_string()))?,
        };
        cache.insert(s, v.clone());
        Ok(v)
    }

    /// Dense value of `e` as a `rows × cols` block.
    pub fn eval(&self, e: &Expr, rows: usize, cols: usize) -> Result<DMatrix<T>, BlockError> {
        self.eval_cached(e, rows, cols, &mut HashMap::new())
    }

    fn eval_cached(&self, e: &Expr, rows: usize, cols: usize, cache: &mut HashMap<Sym, DMatrix<T>>) -> Result<DMatrix<T>, BlockError> {
        let mut out = DMatrix::<T>::zeros(rows, cols);
        for (w, c) in e.terms() {
            let mut term = if w.is_empty() {
                if rows != cols {
                    return Err(BlockError::Dimension(format!("identity term in a {rows}x{cols} block")));
                }
                DMatrix::identity(rows, cols)
            } else {
                let mut acc = self.symbol_value(w[0], cache)?;
                for s in &w[1..] {
                    let v = self.symbol_value(*s, cache)?;
                    if acc.ncols() != v.nrows() {
                        return Err(BlockError::Dimension(format!("cannot multiply through {s}")));
                    }
                    acc *= v;
                }
                acc
            };
            if term.shape() != (rows, cols) {
                return Err(BlockError::Dimension(format!("term of shape {:?} in a {rows}x{cols} block", term.shape())));
            }
            term *= T::from_i64(c);
            out += term;
        }
        Ok(out)
    }
}

/// Trivial assignment value: `M_i(value) = M^P_i`.
pub fn trivial_value(index: SignedIndex, m: u32) -> Expr {
    let k = index.magnitude();
    match index.sign() {
        Sign::Plus if k == m => Expr::coef(m),
        Sign::Plus => -Expr::coef(k),
        Sign::Minus if k == 0 => -Expr::coef(0),
        Sign::Minus => Expr::coef(k),
    }
}

/// One entry of a matrix assignment.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AssignedBlock {
    /// The coefficient choice making the factor a Fiedler matrix.
    Trivial,
    /// A free matrix bound by name at realization time.
    Named(String),
    /// A fixed symbolic value, e.g. `-A3`.
    Fixed(Expr),
}

impl AssignedBlock {
    pub fn expr(&self, index: SignedIndex, m: u32) -> Expr {
        match self {
            AssignedBlock::Trivial => trivial_value(index, m),
            AssignedBlock::Named(name) => Expr::var(name),
            AssignedBlock::Fixed(e) => e.clone(),
        }
    }
}

/// A tuple together with one assigned block per entry.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct MatrixAssignment {
    tuple: IndexTuple,
    blocks: Vec<AssignedBlock>,
}

impl MatrixAssignment {
    pub fn new(tuple: IndexTuple, blocks: Vec<AssignedBlock>) -> Result<Self, BlockError> {
        if tuple.len() != blocks.len() {
            return Err(BlockError::LengthMismatch { len: tuple.len(), values: blocks.len() });
        }
        Ok(Self { tuple, blocks })
    }

    pub fn trivial(tuple: IndexTuple) -> Self {
        let blocks = vec![AssignedBlock::Trivial; tuple.len()];
        Self { tuple, blocks }
    }

    /// Free matrices named `{prefix}{k}` for `k = 1, 2, …`.
    pub fn free(tuple: IndexTuple, prefix: &str) -> Self {
        let blocks = (1..=tuple.len()).map(|k| AssignedBlock::Named(format!("{prefix}{k}"))).collect();
        Self { tuple, blocks }
    }

    pub fn tuple(&self) -> &IndexTuple {
        &self.tuple
    }

    pub fn blocks(&self) -> &[AssignedBlock] {
        &self.blocks
    }

    pub fn is_trivial(&self) -> bool {
        self.blocks.iter().all(|b| *b == AssignedBlock::Trivial)
    }

    pub fn exprs(&self, m: u32) -> Vec<Expr> {
        self.tuple.iter().zip(&self.blocks).map(|(i, b)| b.expr(i, m)).collect()
    }
}

/// Sizes of grid blocks: `n` for the polynomial part, `r` for a trailing state block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockDim {
    Poly,
    State,
}

/// Square grid of symbolic blocks; the first `m` block rows/columns have size `n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockMatrix {
    dims: Vec<BlockDim>,
    blocks: Vec<Expr>,
}

/// Where factor `index` acts, as 0-based block positions.
enum Action {
    /// `[[W, I], [I, 0]]` on blocks `(p, p+1)`.
    Upper(usize),
    /// `[[0, I], [I, W]]` on blocks `(p, p+1)`.
    Lower(usize),
    /// `W` on one diagonal block.
    Diag(usize),
    /// `W^{-1}` on one diagonal block.
    DiagInverse(usize),
}

fn action(index: SignedIndex, m: u32) -> Result<Action, BlockError> {
    let k = index.magnitude();
    if k > m {
        return Err(BlockError::IndexOutOfRange { index, m });
    }
    let last = m as usize - 1;
    Ok(match (index.sign(), k) {
        (Sign::Plus, 0) => Action::Diag(last),
        (Sign::Minus, 0) => Action::DiagInverse(last),
        (Sign::Minus, k) if k == m => Action::Diag(0),
        (Sign::Plus, k) if k == m => Action::DiagInverse(0),
        (Sign::Plus, k) => Action::Upper((m - k - 1) as usize),
        (Sign::Minus, k) => Action::Lower((m - k - 1) as usize),
    })
}

fn inverse_of(index: SignedIndex, w: &Expr) -> Result<Expr, BlockError> {
    w.inverse().ok_or_else(|| BlockError::NotInvertible { index, value: w.to_string() })
}

impl BlockMatrix {
    pub fn identity(m: usize) -> Self {
        let mut out = Self::zeros(vec![BlockDim::Poly; m]);
        for i in 0..m {
            out.set(i, i, Expr::identity());
        }
        out
    }

    pub fn zeros(dims: Vec<BlockDim>) -> Self {
        let k = dims.len();
        Self { dims, blocks: vec![Expr::zero(); k * k] }
    }

    pub fn from_blocks(dims: Vec<BlockDim>, blocks: Vec<Expr>) -> Result<Self, BlockError> {
        if blocks.len() != dims.len() * dims.len() {
            return Err(BlockError::Dimension(format!("{} blocks for a {}-block grid", blocks.len(), dims.len())));
        }
        Ok(Self { dims, blocks })
    }

    pub fn dims(&self) -> &[BlockDim] {
        &self.dims
    }

    /// Number of block rows (and columns).
    pub fn order(&self) -> usize {
        self.dims.len()
    }

    /// Number of polynomial-sized blocks.
    pub fn poly_blocks(&self) -> usize {
        self.dims.iter().filter(|d| **d == BlockDim::Poly).count()
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.blocks[i * self.order() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, e: Expr) {
        let k = self.order();
        self.blocks[i * k + j] = e;
    }

    pub fn blocks(&self) -> &[Expr] {
        &self.blocks
    }

    /// `M_i(W)` of order `m`.
    pub fn elementary(index: SignedIndex, w: &Expr, m: u32) -> Result<Self, BlockError> {
        let mut out = Self::identity(m as usize);
        out.mul_elementary_right(index, w, m)?;
        Ok(out)
    }

    /// Fiedler matrix `M^P_i`.
    pub fn fiedler(index: SignedIndex, m: u32) -> Result<Self, BlockError> {
        Self::elementary(index, &trivial_value(index, m), m)
    }

    /// `M_{t_1}(W_1) ⋯ M_{t_r}(W_r)`; the identity for an empty tuple.
    pub fn product(tuple: &IndexTuple, values: &[Expr], m: u32) -> Result<Self, BlockError> {
        if tuple.len() != values.len() {
            return Err(BlockError::LengthMismatch { len: tuple.len(), values: values.len() });
        }
        let mut out = Self::identity(m as usize);
        for (i, w) in tuple.iter().zip(values) {
            out.mul_elementary_right(i, w, m)?;
        }
        Ok(out)
    }

    pub fn assignment_product(assignment: &MatrixAssignment, m: u32) -> Result<Self, BlockError> {
        Self::product(assignment.tuple(), &assignment.exprs(m), m)
    }

    pub fn fiedler_product(tuple: &IndexTuple, m: u32) -> Result<Self, BlockError> {
        Self::assignment_product(&MatrixAssignment::trivial(tuple.clone()), m)
    }

    /// `self ← self · M_index(W)`, touching only the first `m` block columns.
    pub fn mul_elementary_right(&mut self, index: SignedIndex, w: &Expr, m: u32) -> Result<(), BlockError> {
        let act = action(index, m)?;
        let inv = match act {
            Action::DiagInverse(_) => Some(inverse_of(index, w)?),
            _ => None,
        };
        for r in 0..self.order() {
            match act {
                Action::Upper(p) => {
                    let (a, b) = (self.get(r, p).clone(), self.get(r, p + 1).clone());
                    self.set(r, p, &(&a * w) + &b);
                    self.set(r, p + 1, a);
                }
                Action::Lower(p) => {
                    let (a, b) = (self.get(r, p).clone(), self.get(r, p + 1).clone());
                    self.set(r, p + 1, &a + &(&b * w));
                    self.set(r, p, b);
                }
                Action::Diag(p) => {
                    let v = self.get(r, p) * w;
                    self.set(r, p, v);
                }
                Action::DiagInverse(p) => {
                    let v = self.get(r, p) * inv.as_ref().expect("computed above");
                    self.set(r, p, v);
                }
            }
        }
        Ok(())
    }

    /// `self ← M_index(W) · self`, touching only the first `m` block rows.
    pub fn mul_elementary_left(&mut self, index: SignedIndex, w: &Expr, m: u32) -> Result<(), BlockError> {
        let act = action(index, m)?;
        let inv = match act {
            Action::DiagInverse(_) => Some(inverse_of(index, w)?),
            _ => None,
        };
        for c in 0..self.order() {
            match act {
                Action::Upper(p) => {
                    let (a, b) = (self.get(p, c).clone(), self.get(p + 1, c).clone());
                    self.set(p, c, &(w * &a) + &b);
                    self.set(p + 1, c, a);
                }
                Action::Lower(p) => {
                    let (a, b) = (self.get(p, c).clone(), self.get(p + 1, c).clone());
                    self.set(p + 1, c, &a + &(w * &b));
                    self.set(p, c, b);
                }
                Action::Diag(p) => {
                    let v = w * self.get(p, c);
                    self.set(p, c, v);
                }
                Action::DiagInverse(p) => {
                    let v = inv.as_ref().expect("computed above") * self.get(p, c);
                    self.set(p, c, v);
                }
            }
        }
        Ok(())
    }

    /// Symbolic block product.
    pub fn mul(&self, other: &Self) -> Result<Self, BlockError> {
        if self.dims != other.dims {
            return Err(BlockError::Dimension("block partitions differ".into()));
        }
        let k = self.order();
        let mut out = Self::zeros(self.dims.clone());
        for i in 0..k {
            for j in 0..k {
                let mut acc = Expr::zero();
                for l in 0..k {
                    let (a, b) = (self.get(i, l), other.get(l, j));
                    if !a.is_zero() && !b.is_zero() {
                        acc = &acc + &(a * b);
                    }
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Self {
        Self { dims: self.dims.clone(), blocks: self.blocks.iter().map(f).collect() }
    }

    pub fn scale(&self, c: i64) -> Self {
        self.map(|e| e * &Expr::scalar(c))
    }

    /// Block transpose with `rule` giving the transpose of each symbol.
    pub fn transpose_with(&self, rule: &impl Fn(Sym) -> Expr) -> Self {
        let k = self.order();
        let mut out = Self::zeros(self.dims.clone());
        for i in 0..k {
            for j in 0..k {
                out.set(j, i, self.get(i, j).transpose_with(rule));
            }
        }
        out
    }

    /// `diag(signs) · self` for a sign per block row.
    pub fn scale_rows(&self, signs: &[i64]) -> Self {
        let k = self.order();
        assert!(signs.len() >= k, "one sign per block row");
        let mut out = self.clone();
        for (i, &s) in signs.iter().enumerate().take(k) {
            for j in 0..k {
                out.set(i, j, &Expr::scalar(s) * self.get(i, j));
            }
        }
        out
    }

    /// Largest `|i - j|` over nonzero blocks; `None` for the zero matrix.
    pub fn bandwidth(&self) -> Option<usize> {
        let k = self.order();
        (0..k * k).filter(|&t| !self.blocks[t].is_zero()).map(|t| (t / k).abs_diff(t % k)).max()
    }

    pub fn tags(&self) -> Vec<Tag> {
        self.blocks.iter().map(Expr::tag).collect()
    }

    /// Every block is `0`, `±I`, `±A_j`, `±A_j^{-1}` or a signed assigned matrix.
    pub fn is_operation_free(&self) -> bool {
        self.blocks.iter().all(|e| e.tag().is_elementary())
    }

    /// Dense matrix with `n × n` polynomial blocks and an `r × r` state block.
    pub fn realize<T: Entry>(&self, bindings: &Bindings<T>, n: usize, r: usize) -> Result<DMatrix<T>, BlockError> {
        let size = |d: BlockDim| if d == BlockDim::Poly { n } else { r };
        let offsets: Vec<usize> = self
            .dims
            .iter()
            .scan(0, |acc, &d| {
                let o = *acc;
                *acc += size(d);
                Some(o)
            })
            .collect();
        let total: usize = self.dims.iter().map(|&d| size(d)).sum();
        let mut out = DMatrix::<T>::zeros(total, total);
        let mut cache = HashMap::new();
        let k = self.order();
        for i in 0..k {
            for j in 0..k {
                let e = self.get(i, j);
                if e.is_zero() {
                    continue;
                }
                let (h, w) = (size(self.dims[i]), size(self.dims[j]));
                let v = bindings.eval_cached(e, h, w, &mut cache)?;
                out.view_mut((offsets[i], offsets[j]), (h, w)).copy_from(&v);
            }
        }
        Ok(out)
    }
}

/// Dense `M_index(W)` built directly from its definition.
pub fn dense_elementary<T: Entry>(index: SignedIndex, w: &DMatrix<T>, m: u32) -> Result<DMatrix<T>, BlockError> {
    let n = w.nrows();
    let mut out = DMatrix::<T>::identity(m as usize * n, m as usize * n);
    let mut put = |bi: usize, bj: usize, v: &DMatrix<T>| out.view_mut((bi * n, bj * n), (n, n)).copy_from(v);
    let id = DMatrix::<T>::identity(n, n);
    let zero = DMatrix::<T>::zeros(n, n);
    match action(index, m)? {
        Action::Upper(p) => {
            put(p, p, w);
            put(p, p + 1, &id);
            put(p + 1, p, &id);
            put(p + 1, p + 1, &zero);
        }
        Action::Lower(p) => {
            put(p, p, &zero);
            put(p, p + 1, &id);
            put(p + 1, p, &id);
            put(p + 1, p + 1, w);
        }
        Action::Diag(p) => put(p, p, w),
        Action::DiagInverse(p) => {
            let inv = T::try_invert(w).ok_or_else(|| BlockError::SingularBinding(index.to_string()))?;
            put(p, p, &inv);
        }
    }
    Ok(out)
}

/// Dense Fiedler matrix `M^P_index` built directly from the coefficients.
pub fn dense_fiedler<T: Entry>(index: SignedIndex, p: &MatrixPolynomial<T>) -> Result<DMatrix<T>, BlockError> {
    let m = p.degree();
    let k = index.magnitude();
    if k > m {
        return Err(BlockError::IndexOutOfRange { index, m });
    }
    let a = p.coeff(k);
    let w = match index.sign() {
        Sign::Plus if k == m => a.clone(),
        Sign::Plus => -a.clone(),
        Sign::Minus if k == 0 => -a.clone(),
        Sign::Minus => a.clone(),
    };
    dense_elementary(index, &w, m)
}

/// Sparse block row or column: `(1-based block, coefficient)` pairs, sorted by block.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SparseBlockVector(pub Vec<(usize, Expr)>);

impl SparseBlockVector {
    pub fn unit(block: usize) -> Self {
        Self(vec![(block, Expr::identity())])
    }

    fn accumulate(entries: impl IntoIterator<Item = (usize, Expr)>) -> Self {
        let mut map: std::collections::BTreeMap<usize, Expr> = Default::default();
        for (b, e) in entries {
            let slot = map.entry(b).or_default();
            *slot = &*slot + &e;
        }
        Self(map.into_iter().filter(|(_, e)| !e.is_zero()).collect())
    }
}

/// Nonzero blocks of block row `m - i` of `M_j(W)`, read off the action tables.
///
/// Block columns of `M_j(W)` have the same pattern, so the table also gives column `m - i`.
pub fn elementary_row(i: u32, j: SignedIndex, w: &Expr, m: u32) -> Result<Vec<(usize, Expr)>, BlockError> {
    if j.magnitude() > m {
        return Err(BlockError::IndexOutOfRange { index: j, m });
    }
    let row = (m - i) as usize;
    let id = Expr::identity;
    let k = j.magnitude();
    Ok(match j.sign() {
        Sign::Plus => {
            if k == 0 && i == 0 {
                vec![(m as usize, w.clone())]
            } else if k == m && i == m - 1 {
                vec![(1, inverse_of(j, w)?)]
            } else if k >= 1 && k < m && i == k {
                vec![(row, w.clone()), (row + 1, id())]
            } else if k >= 1 && k < m && i + 1 == k {
                vec![(row - 1, id())]
            } else {
                vec![(row, id())]
            }
        }
        Sign::Minus => {
            if k == m && i == m - 1 {
                vec![(1, w.clone())]
            } else if k == 0 && i == 0 {
                vec![(m as usize, inverse_of(j, w)?)]
            } else if k >= 1 && k < m && i == k {
                vec![(row + 1, id())]
            } else if k >= 1 && k < m && i + 1 == k {
                vec![(row - 1, id()), (row, w.clone())]
            } else {
                vec![(row, id())]
            }
        }
    })
}

fn check_kernel_input(s: u32, alpha: &IndexTuple, values: &[Expr], m: u32) -> Result<(), BlockError> {
    if s >= m {
        return Err(BlockError::IndexOutOfRange { index: SignedIndex::plus(s), m });
    }
    if alpha.len() != values.len() {
        return Err(BlockError::LengthMismatch { len: alpha.len(), values: values.len() });
    }
    if !alpha.satisfies_sip()? {
        return Err(TupleError::SipViolated(alpha.clone()).into());
    }
    Ok(())
}

/// `(e^T_{m-s} ⊗ I) M_α(X)` by propagating a sparse block row through each factor.
pub fn symbolic_row_action(s: u32, alpha: &IndexTuple, values: &[Expr], m: u32) -> Result<SparseBlockVector, BlockError> {
    check_kernel_input(s, alpha, values, m)?;
    let mut row = SparseBlockVector::unit((m - s) as usize);
    for (j, w) in alpha.iter().zip(values) {
        let mut next = Vec::new();
        for (block, coeff) in &row.0 {
            for (col, f) in elementary_row(m - *block as u32, j, w, m)? {
                next.push((col, coeff * &f));
            }
        }
        row = SparseBlockVector::accumulate(next);
    }
    Ok(row)
}

/// `M_α(X) (e_{m-s} ⊗ I)` by propagating a sparse block column through each factor.
pub fn symbolic_col_action(s: u32, alpha: &IndexTuple, values: &[Expr], m: u32) -> Result<SparseBlockVector, BlockError> {
    check_kernel_input(s, alpha, values, m)?;
    let mut col = SparseBlockVector::unit((m - s) as usize);
    for (j, w) in alpha.iter().zip(values).rev() {
        let mut next = Vec::new();
        for (block, coeff) in &col.0 {
            for (row, f) in elementary_row(m - *block as u32, j, w, m)? {
                next.push((row, &f * coeff));
            }
        }
        col = SparseBlockVector::accumulate(next);
    }
    Ok(col)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> Expr {
        s.parse().unwrap()
    }

    fn t(s: &str) -> IndexTuple {
        s.parse().unwrap()
    }

    #[test]
    fn elementary_layouts() {
        let m = 4;
        let x = e("X");
        let m1 = BlockMatrix::elementary(SignedIndex::plus(1), &x, m).unwrap();
        assert_eq!(m1.get(2, 2), &x);
        assert_eq!(m1.get(2, 3), &Expr::identity());
        assert_eq!(m1.get(3, 2), &Expr::identity());
        assert!(m1.get(3, 3).is_zero());
        assert_eq!(m1.get(0, 0), &Expr::identity());

        let mm = BlockMatrix::elementary(SignedIndex::minus(4), &x, m).unwrap();
        assert_eq!(mm.get(0, 0), &x);
        assert_eq!(mm.get(1, 1), &Expr::identity());
    }

    #[test]
    fn inverse_pairs_multiply_to_identity() {
        let m = 5;
        let x = e("X");
        for k in 1..m {
            let a = BlockMatrix::elementary(SignedIndex::plus(k), &x, m).unwrap();
            let b = BlockMatrix::elementary(SignedIndex::minus(k), &-&x, m).unwrap();
            assert_eq!(a.mul(&b).unwrap(), BlockMatrix::identity(m as usize));
        }
        let m0 = BlockMatrix::fiedler(SignedIndex::plus(0), m).unwrap();
        let mm0 = BlockMatrix::fiedler(SignedIndex::minus(0), m).unwrap();
        assert_eq!(m0.mul(&mm0).unwrap(), BlockMatrix::identity(m as usize));
        let mm = BlockMatrix::fiedler(SignedIndex::plus(m), m).unwrap();
        let mnm = BlockMatrix::fiedler(SignedIndex::minus(m), m).unwrap();
        assert_eq!(mm.mul(&mnm).unwrap(), BlockMatrix::identity(m as usize));
    }

    #[test]
    fn fiedler_diagonal_factors() {
        let m = 3;
        let f0 = BlockMatrix::fiedler(SignedIndex::plus(0), m).unwrap();
        assert_eq!(f0.get(2, 2), &e("-A0"));
        let fm0 = BlockMatrix::fiedler(SignedIndex::minus(0), m).unwrap();
        assert_eq!(fm0.get(2, 2), &e("-A0^-1"));
        let fnm = BlockMatrix::fiedler(SignedIndex::minus(3), m).unwrap();
        assert_eq!(fnm.get(0, 0), &e("A3"));
    }

    #[test]
    fn empty_product_is_identity() {
        assert_eq!(BlockMatrix::fiedler_product(&IndexTuple::empty(), 4).unwrap(), BlockMatrix::identity(4));
    }

    #[test]
    fn distant_factors_commute() {
        let m = 5;
        let (x, y) = (e("X"), e("Y"));
        for (i, j) in [(0u32, 2u32), (1, 3), (2, 4), (0, 5)] {
            for (si, sj) in [
                (SignedIndex::plus(i), SignedIndex::plus(j)),
                (SignedIndex::minus(i), SignedIndex::plus(j)),
                (SignedIndex::minus(i), SignedIndex::minus(j)),
            ] {
                let ab = BlockMatrix::product(&IndexTuple::new(vec![si, sj]), &[x.clone(), y.clone()], m).unwrap();
                let ba = BlockMatrix::product(&IndexTuple::new(vec![sj, si]), &[y.clone(), x.clone()], m).unwrap();
                assert_eq!(ab, ba, "{si} {sj}");
            }
        }
    }

    #[test]
    fn row_action_unit_when_tuple_starts_with_successor() {
        // (2, 1, 3): the subtuple on {1, 2} starts with 2 and c_2 = 1.
        let m = 5;
        let alpha = t("(2,1,3)");
        let vals: Vec<Expr> = (0..alpha.len()).map(|k| e(&format!("Z{k}"))).collect();
        let row = symbolic_row_action(1, &alpha, &vals, m).unwrap();
        let c = alpha.consecutions(SignedIndex::plus(2)).unwrap() as usize;
        assert_eq!(row, SparseBlockVector::unit(m as usize - (1 + 1 + c)));
        let empty = symbolic_row_action(2, &IndexTuple::empty(), &[], m).unwrap();
        assert_eq!(empty, SparseBlockVector::unit(3));
    }

    #[test]
    fn row_and_column_actions_match_grid_product() {
        let m = 4;
        for s in ["(0,1,2,0,1)", "(-4,-3,-2)", "(3,2,1,0)", "(-1,-0,-2)"] {
            let alpha = t(s);
            let vals: Vec<Expr> = (0..alpha.len()).map(|k| e(&format!("W{k}"))).collect();
            let grid = BlockMatrix::product(&alpha, &vals, m).unwrap();
            for i in 0..m {
                let row = symbolic_row_action(i, &alpha, &vals, m).unwrap();
                let r = (m - i - 1) as usize;
                let dense_row: Vec<(usize, Expr)> =
                    (0..m as usize).filter(|&c| !grid.get(r, c).is_zero()).map(|c| (c + 1, grid.get(r, c).clone())).collect();
                assert_eq!(row.0, dense_row, "{s} row {i}");
                let col = symbolic_col_action(i, &alpha, &vals, m).unwrap();
                let dense_col: Vec<(usize, Expr)> =
                    (0..m as usize).filter(|&c| !grid.get(c, r).is_zero()).map(|c| (c + 1, grid.get(c, r).clone())).collect();
                assert_eq!(col.0, dense_col, "{s} col {i}");
            }
        }
    }

    #[test]
    fn realization_matches_dense_fiedler_product() {
        let a: Vec<DMatrix<i64>> = (0..4).map(|j| DMatrix::from_row_slice(2, 2, &[1, j as i64 + 1, 0, 1])).collect();
        let p = MatrixPolynomial::new(a).unwrap();
        let alpha = t("(1,0,2,1,3)");
        let symbolic = BlockMatrix::fiedler_product(&alpha, 3).unwrap().realize(&Bindings::new(&p), 2, 0).unwrap();
        let mut dense = DMatrix::<i64>::identity(6, 6);
        for i in alpha.iter() {
            dense *= dense_fiedler(i, &p).unwrap();
        }
        assert_eq!(symbolic, dense);
    }

    #[test]
    fn integer_inverse_only_when_unimodular() {
        let u = DMatrix::from_row_slice(2, 2, &[2i64, 1, 1, 1]);
        assert_eq!(i64::try_invert(&u).unwrap(), DMatrix::from_row_slice(2, 2, &[1, -1, -1, 2]));
        assert!(i64::try_invert(&DMatrix::from_row_slice(2, 2, &[2i64, 0, 0, 1])).is_none());
    }
}
