//! Recovery of eigenvectors, eigenvectors at infinity, minimal bases and
//! minimal indices of `P`, `S` and `G` from those of an EGFP.
//!
//! Every map selects one block row of a null basis of `L`, optionally followed
//! by a solve with `A_m`, `A_0` or their transposes. The selectors come from
//! case tables on the consecution and inversion numbers of the tuples; which
//! case fired is recorded in [`Branch`] for reporting.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::blockmat::MatrixPolynomial;
use crate::oracle::{PolyVector, Side};
use crate::pencils::EgfpSpec;
use crate::rational::{self, RationalError, Realization};
use crate::tuples::{IndexTuple, SignedIndex, TupleError};

#[derive(Debug, Error)]
pub enum RecoveryError {
    #[error("recovery maps are only defined for the standard decoration order")]
    SwappedDecorations,
    #[error("{0} is singular, so the recovery map does not exist")]
    SingularCoefficient(Premultiplier),
    #[error("recovery at infinity needs -m in tau")]
    MissingMinusM,
    #[error("minimal-basis recovery needs 0 in sigma and -m in tau")]
    NotBorderable,
    #[error("basis has {found} rows, expected {expected}")]
    Rows { found: usize, expected: usize },
    #[error("selection kept rank {kept} of {columns} columns")]
    RankLoss { kept: usize, columns: usize },
    #[error(transparent)]
    Tuple(#[from] TupleError),
    #[error(transparent)]
    Rational(#[from] RationalError),
}

/// Linear solve applied after selecting a block row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Premultiplier {
    LeadingInverse,
    TrailingInverse,
    LeadingInverseTranspose,
    TrailingInverseTranspose,
}

impl fmt::Display for Premultiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Premultiplier::LeadingInverse => "A_m^-1",
            Premultiplier::TrailingInverse => "A_0^-1",
            Premultiplier::LeadingInverseTranspose => "A_m^-T",
            Premultiplier::TrailingInverseTranspose => "A_0^-T",
        })
    }
}

impl Premultiplier {
    fn coefficient(self, p: &MatrixPolynomial) -> &DMatrix<Complex64> {
        match self {
            Premultiplier::LeadingInverse | Premultiplier::LeadingInverseTranspose => p.coeff(p.degree()),
            Premultiplier::TrailingInverse | Premultiplier::TrailingInverseTranspose => p.coeff(0),
        }
    }

    fn transposed(self) -> bool {
        matches!(self, Premultiplier::LeadingInverseTranspose | Premultiplier::TrailingInverseTranspose)
    }
}

/// Which row of the case table produced a selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// `0 ∈ σ`, run from 0 shorter than `m`.
    ZeroInSigma,
    /// `0 ∈ σ`, run from 0 reaching `m`.
    ZeroInSigmaFullRun,
    /// `0 ∈ ω`, run continues into `σ` and stops before `m`.
    RunIntoSigma,
    /// `0 ∈ ω`, run continues into `σ` and reaches `m`.
    RunIntoSigmaFullRun,
    /// `0 ∈ ω`, run stays in `ω` and stops before `m`.
    RunInOmega,
    /// `0 ∈ ω`, run reaches `m` inside `ω`.
    RunInOmegaFullRun,
    /// Eigenvalue at infinity, run from `-m` shorter than `m`.
    Infinity,
    /// Eigenvalue at infinity, run from `-m` reaching `-0`.
    InfinityFullRun,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant serializes");
        f.write_str(s.as_str().expect("string"))
    }
}

/// `M (e^T_block ⊗ I_n)`, with `block` 1-based and `M` an optional solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RowSelector {
    pub block: usize,
    pub premultiplier: Option<Premultiplier>,
    pub branch: Branch,
}

impl RowSelector {
    fn unit(block: i64, branch: Branch) -> Self {
        Self { block: block as usize, premultiplier: None, branch }
    }

    fn solved(block: i64, by: Premultiplier, branch: Branch) -> Self {
        Self { block: block as usize, premultiplier: Some(by), branch }
    }

    /// Applies the selector to the columns of `z`, which has `m·n` (or `m·n + r`) rows.
    pub fn apply(&self, p: &MatrixPolynomial, z: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>, RecoveryError> {
        let (m, n) = (p.degree() as usize, p.size());
        if z.nrows() < m * n {
            return Err(RecoveryError::Rows { found: z.nrows(), expected: m * n });
        }
        let rows = z.rows((self.block - 1) * n, n).into_owned();
        match self.premultiplier {
            None => Ok(rows),
            Some(by) => solve(by, p, &rows),
        }
    }
}

/// Relative singularity threshold for the `A_0`/`A_m` solves.
const SOLVE_RCOND: f64 = 1e-13;

fn solve(by: Premultiplier, p: &MatrixPolynomial, rhs: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>, RecoveryError> {
    let coeff = by.coefficient(p);
    let a = if by.transposed() { coeff.transpose() } else { coeff.clone() };
    let s = a.singular_values();
    if s.min() <= SOLVE_RCOND * s.max() {
        return Err(RecoveryError::SingularCoefficient(by));
    }
    a.lu().solve(rhs).ok_or(RecoveryError::SingularCoefficient(by))
}

fn plus(k: i64) -> SignedIndex {
    SignedIndex::plus(k as u32)
}

fn minus(k: i64) -> SignedIndex {
    SignedIndex::minus(k as u32)
}

fn standard_order(spec: &EgfpSpec) -> Result<(), RecoveryError> {
    if spec.swap_decorations {
        Err(RecoveryError::SwappedDecorations)
    } else {
        Ok(())
    }
}

/// Right eigenvector recovery at a finite eigenvalue.
pub fn right_selector(spec: &EgfpSpec) -> Result<RowSelector, RecoveryError> {
    standard_order(spec)?;
    let m = spec.m as i64;
    let sigma = &spec.sigma;
    if sigma.contains(SignedIndex::plus(0)) {
        let c0 = sigma.consecutions(plus(0))?;
        return Ok(if c0 < m {
            let c = IndexTuple::concat([sigma, spec.sigma2()]).consecutions(plus(0))?;
            RowSelector::unit(m - c, Branch::ZeroInSigma)
        } else {
            RowSelector::solved(1, Premultiplier::LeadingInverse, Branch::ZeroInSigmaFullRun)
        });
    }
    let i0 = spec.omega().inversions(plus(0))?;
    let next = i0 + 1;
    if next <= m && sigma.contains(plus(next)) {
        let s = i0 + sigma.consecutions(plus(next))? + 1;
        if s < m {
            let p = i0 + IndexTuple::concat([sigma, spec.sigma2()]).consecutions(plus(next))? + 1;
            Ok(RowSelector::unit(m - p, Branch::RunIntoSigma))
        } else {
            let p = spec.tau2().consecutions(minus(m - 1))? + 2;
            Ok(RowSelector::solved(p, Premultiplier::LeadingInverse, Branch::RunIntoSigmaFullRun))
        }
    } else if i0 < m {
        let p = i0 - spec.tau2().consecutions(minus(i0))? - 1;
        Ok(RowSelector::unit(m - p, Branch::RunInOmega))
    } else {
        Ok(RowSelector::solved(m, Premultiplier::TrailingInverse, Branch::RunInOmegaFullRun))
    }
}

/// Left eigenvector recovery at a finite eigenvalue; mirror of [`right_selector`]
/// with consecutions and inversions exchanged.
pub fn left_selector(spec: &EgfpSpec) -> Result<RowSelector, RecoveryError> {
    standard_order(spec)?;
    let m = spec.m as i64;
    let sigma = &spec.sigma;
    if sigma.contains(SignedIndex::plus(0)) {
        let i0 = sigma.inversions(plus(0))?;
        return Ok(if i0 < m {
            let i = IndexTuple::concat([spec.sigma1(), sigma]).inversions(plus(0))?;
            RowSelector::unit(m - i, Branch::ZeroInSigma)
        } else {
            RowSelector::solved(1, Premultiplier::LeadingInverseTranspose, Branch::ZeroInSigmaFullRun)
        });
    }
    let c0 = spec.omega().consecutions(plus(0))?;
    let next = c0 + 1;
    if next <= m && sigma.contains(plus(next)) {
        let s = c0 + sigma.inversions(plus(next))? + 1;
        if s < m {
            let p = c0 + IndexTuple::concat([spec.sigma1(), sigma]).inversions(plus(next))? + 1;
            Ok(RowSelector::unit(m - p, Branch::RunIntoSigma))
        } else {
            let p = spec.tau1().inversions(minus(m - 1))? + 2;
            Ok(RowSelector::solved(p, Premultiplier::LeadingInverseTranspose, Branch::RunIntoSigmaFullRun))
        }
    } else if c0 < m {
        let p = c0 - spec.tau1().inversions(minus(c0))? - 1;
        Ok(RowSelector::unit(m - p, Branch::RunInOmega))
    } else {
        Ok(RowSelector::solved(m, Premultiplier::TrailingInverseTranspose, Branch::RunInOmegaFullRun))
    }
}

pub fn selector(spec: &EgfpSpec, side: Side) -> Result<RowSelector, RecoveryError> {
    match side {
        Side::Right => right_selector(spec),
        Side::Left => left_selector(spec),
    }
}

/// `(right, left)` selectors for the eigenvalue at infinity.
pub fn infinity_selectors(spec: &EgfpSpec) -> Result<(RowSelector, RowSelector), RecoveryError> {
    standard_order(spec)?;
    let m = spec.m as i64;
    let tau = &spec.tau;
    let top = minus(m);
    if !tau.contains(top) {
        return Err(RecoveryError::MissingMinusM);
    }
    let right = if tau.consecutions(top)? < m {
        RowSelector::unit(IndexTuple::concat([tau, spec.tau2()]).consecutions(top)? + 1, Branch::Infinity)
    } else {
        RowSelector::solved(m, Premultiplier::TrailingInverse, Branch::InfinityFullRun)
    };
    let left = if tau.inversions(top)? < m {
        RowSelector::unit(IndexTuple::concat([spec.tau1(), tau]).inversions(top)? + 1, Branch::Infinity)
    } else {
        RowSelector::solved(m, Premultiplier::TrailingInverseTranspose, Branch::InfinityFullRun)
    };
    Ok((right, left))
}

fn check_rank(x: &DMatrix<Complex64>, columns: usize) -> Result<(), RecoveryError> {
    if columns == 0 {
        return Ok(());
    }
    let s = x.singular_values();
    let threshold = x.nrows().max(x.ncols()) as f64 * f64::EPSILON * s.max() * 1e3;
    let kept = s.iter().filter(|&&v| v > threshold).count();
    if kept < columns {
        return Err(RecoveryError::RankLoss { kept, columns });
    }
    Ok(())
}

/// Basis of `N_r(P(μ))` or `N_l(P(μ))` from a basis `z` of the same null space of `L(μ)`.
pub fn recover_eigenvectors(
    spec: &EgfpSpec,
    p: &MatrixPolynomial,
    z: &DMatrix<Complex64>,
    side: Side,
) -> Result<(DMatrix<Complex64>, RowSelector), RecoveryError> {
    let sel = selector(spec, side)?;
    let x = sel.apply(p, z)?;
    check_rank(&x, z.ncols())?;
    Ok((x, sel))
}

/// Basis of the eigenspace of `P` at infinity, i.e. of the null space of `A_m`
/// (or its transpose), from that of `L1`.
pub fn recover_at_infinity(
    spec: &EgfpSpec,
    p: &MatrixPolynomial,
    z: &DMatrix<Complex64>,
    side: Side,
) -> Result<(DMatrix<Complex64>, RowSelector), RecoveryError> {
    let (right, left) = infinity_selectors(spec)?;
    let sel = match side {
        Side::Right => right,
        Side::Left => left,
    };
    let x = sel.apply(p, z)?;
    check_rank(&x, z.ncols())?;
    Ok((x, sel))
}

/// 1-based block row carrying a minimal basis of `P`: `m - c_0(σ, σ2)` on the
/// right and `m - i_0(σ1, σ)` on the left.
pub fn minimal_basis_block(spec: &EgfpSpec, side: Side) -> Result<usize, RecoveryError> {
    standard_order(spec)?;
    let m = spec.m as i64;
    if !spec.sigma.contains(SignedIndex::plus(0)) || !spec.tau.contains(minus(m)) {
        return Err(RecoveryError::NotBorderable);
    }
    let run = match side {
        Side::Right => IndexTuple::concat([&spec.sigma, spec.sigma2()]).consecutions(plus(0))?,
        Side::Left => IndexTuple::concat([spec.sigma1(), &spec.sigma]).inversions(plus(0))?,
    };
    Ok((m - run) as usize)
}

/// Minimal basis of `P` from a minimal basis of `L`.
pub fn recover_minimal_bases(spec: &EgfpSpec, n: usize, z: &[PolyVector], side: Side) -> Result<Vec<PolyVector>, RecoveryError> {
    let block = minimal_basis_block(spec, side)?;
    let expected = spec.m as usize * n;
    z.iter()
        .map(|v| {
            let rows = v.0.first().map_or(0, |c| c.len());
            if rows < expected {
                return Err(RecoveryError::Rows { found: rows, expected });
            }
            Ok(v.rows((block - 1) * n, n))
        })
        .collect()
}

/// Amounts subtracted from the minimal indices of `L` to get those of `P`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MinimalIndexShift {
    /// Subtracted from right indices.
    pub i_l: usize,
    /// Subtracted from left indices.
    pub c_l: usize,
}

impl MinimalIndexShift {
    pub fn apply(&self, indices: &[usize], side: Side) -> Vec<usize> {
        let shift = match side {
            Side::Right => self.i_l,
            Side::Left => self.c_l,
        };
        indices.iter().map(|&e| e.saturating_sub(shift)).collect()
    }
}

/// With `τ = (τ_l, -m, τ_r)`, the totals of `(-rev(τ_l), σ, -rev(τ_r))`, a permutation of `{0:m-1}`.
pub fn minimal_index_shift(spec: &EgfpSpec) -> Result<MinimalIndexShift, RecoveryError> {
    let m = spec.m as i64;
    let tau = spec.tau.entries();
    let split = tau.iter().position(|&t| t == minus(m)).ok_or(RecoveryError::MissingMinusM)?;
    let left = IndexTuple::new(tau[..split].to_vec()).rev().neg();
    let right = IndexTuple::new(tau[split + 1..].to_vec()).rev().neg();
    let alpha = IndexTuple::concat([&left, &spec.sigma, &right]);
    Ok(MinimalIndexShift { i_l: alpha.total_inversions()?, c_l: alpha.total_consecutions()? })
}

/// Recovery for `S` from a bordered EGFP, then for `G` by keeping the first `n` rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemRecovery {
    /// Basis for `S`, with `n + r` rows.
    pub system: DMatrix<Complex64>,
    /// Basis for `G`, the first `n` rows of [`Self::system`].
    pub transfer: DMatrix<Complex64>,
}

/// Eigenvector recovery for `S(μ)` and `G(μ)` from a basis `z` of the null space of the
/// bordered pencil at `μ`: the minimal-basis block row on the first `m·n` rows and the
/// identity on the last `r`.
pub fn recover_system(spec: &EgfpSpec, real: &Realization, z: &DMatrix<Complex64>, side: Side) -> Result<SystemRecovery, RecoveryError> {
    rational::border_positions(spec)?;
    let (m, n, r) = (spec.m as usize, real.size(), real.state_dim());
    if z.nrows() != m * n + r {
        return Err(RecoveryError::Rows { found: z.nrows(), expected: m * n + r });
    }
    let block = minimal_basis_block(spec, side)?;
    let mut system = DMatrix::zeros(n + r, z.ncols());
    system.rows_mut(0, n).copy_from(&z.rows((block - 1) * n, n));
    system.rows_mut(n, r).copy_from(&z.rows(m * n, r));
    check_rank(&system, z.ncols())?;
    let transfer = system.rows(0, n).into_owned();
    Ok(SystemRecovery { system, transfer })
}

/// Minimal-basis recovery for `S` from a minimal basis of the bordered pencil.
pub fn recover_system_minimal_bases(
    spec: &EgfpSpec,
    real: &Realization,
    z: &[PolyVector],
    side: Side,
) -> Result<Vec<PolyVector>, RecoveryError> {
    rational::border_positions(spec)?;
    let (m, n, r) = (spec.m as usize, real.size(), real.state_dim());
    let block = minimal_basis_block(spec, side)?;
    Ok(z.iter()
        .map(|v| {
            let coeffs =
                v.0.iter()
                    .map(|c| {
                        let mut out = nalgebra::DVector::zeros(n + r);
                        out.rows_mut(0, n).copy_from(&c.rows((block - 1) * n, n));
                        out.rows_mut(n, r).copy_from(&c.rows(m * n, r));
                        out
                    })
                    .collect();
            PolyVector(coeffs).rows(0, n + r)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::golden;
    use crate::pencils::EgfpSpec;

    fn spec(name: &str) -> EgfpSpec {
        golden::generating_spec(name).unwrap()
    }

    fn unit(block: usize, branch: Branch) -> RowSelector {
        RowSelector { block, premultiplier: None, branch }
    }

    #[test]
    fn two_free_decorations() {
        let s = spec("degree6_two_free");
        assert_eq!(right_selector(&s).unwrap(), unit(4, Branch::RunIntoSigma));
        assert_eq!(left_selector(&s).unwrap(), unit(5, Branch::RunIntoSigma));
    }

    #[test]
    fn trailing_zero_in_omega() {
        let s = spec("degree5_trailing_inverse");
        assert_eq!(right_selector(&s).unwrap(), unit(2, Branch::RunIntoSigma));
        assert_eq!(left_selector(&s).unwrap(), unit(5, Branch::RunInOmega));
    }

    #[test]
    fn full_run_needs_leading_solve() {
        let s = spec("degree3_not_operation_free");
        let r = right_selector(&s).unwrap();
        assert_eq!(r.block, 2);
        assert_eq!(r.premultiplier, Some(Premultiplier::LeadingInverse));
        assert_eq!(left_selector(&s).unwrap(), unit(3, Branch::RunInOmega));
    }

    #[test]
    fn infinity_rows() {
        let (r, l) = infinity_selectors(&spec("degree5_infinite")).unwrap();
        assert_eq!((r.block, l.block), (2, 2));
        let fp = EgfpSpec::core(4, "(0,1,2,3)".parse().unwrap(), "(-4)".parse().unwrap());
        let (r, l) = infinity_selectors(&fp).unwrap();
        assert_eq!((r.block, l.block), (1, 1));
    }

    #[test]
    fn shift_of_fiedler_pencils_counts_sigma() {
        let s = EgfpSpec::core(4, "(2,0,1,3)".parse().unwrap(), "(-4)".parse().unwrap());
        // (2,0,1,3): 0 before 1, 1 after 2, 2 before 3.
        assert_eq!(minimal_index_shift(&s).unwrap(), MinimalIndexShift { i_l: 1, c_l: 2 });
        let ascending = EgfpSpec::core(3, "(0,1,2)".parse().unwrap(), "(-3)".parse().unwrap());
        assert_eq!(minimal_index_shift(&ascending).unwrap().i_l, 0);
    }

    #[test]
    fn minimal_basis_rows_follow_border() {
        let s = spec("degree5_rational");
        let (c_row, b_col) = rational::border_positions(&s).unwrap();
        assert_eq!(minimal_basis_block(&s, Side::Right).unwrap(), b_col + 1);
        assert_eq!(minimal_basis_block(&s, Side::Left).unwrap(), c_row + 1);
    }

    #[test]
    fn branch_names() {
        assert_eq!(Branch::RunIntoSigmaFullRun.to_string(), "run-into-sigma-full-run");
    }
}
