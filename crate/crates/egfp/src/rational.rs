//! Realizations `G(λ) = P(λ) + C(λE - A)^{-1}B`, their system matrices and
//! bordered EGFPs.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::blockmat::{Bindings, BlockDim, BlockError, BlockMatrix, MatrixPolynomial};
use crate::expr::Expr;
use crate::oracle::{self, Tolerances};
use crate::pencils::{self, BandClass, BandPrediction, BlockPencil, DensePencil, EgfpSpec, SpecError};
use crate::tuples::SignedIndex;

#[derive(Debug, Error)]
pub enum RationalError {
    #[error("realization: {0}")]
    Dimension(String),
    #[error("E is singular")]
    SingularE,
    #[error("bordered pencils need 0 in sigma and -m in tau")]
    MissingBorderIndex,
    /// `c_0(σ, σ2) = m` would put `B` in block column 0, which is undefined.
    #[error("c_0(sigma, sigma2) = m leaves no block column for B")]
    UnsupportedBorder,
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Block(#[from] BlockError),
    #[error(transparent)]
    Oracle(#[from] oracle::OracleError),
}

/// Names the state-space matrices take in symbolic bordered pencils.
pub const STATE_A: &str = "A";
pub const STATE_E: &str = "E";
pub const INPUT_B: &str = "B";
pub const OUTPUT_C: &str = "C";

#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub poly: MatrixPolynomial,
    pub a: DMatrix<Complex64>,
    pub e: DMatrix<Complex64>,
    /// `r × n`.
    pub b: DMatrix<Complex64>,
    /// `n × r`.
    pub c: DMatrix<Complex64>,
}

impl Realization {
    pub fn new(
        poly: MatrixPolynomial,
        a: DMatrix<Complex64>,
        e: DMatrix<Complex64>,
        b: DMatrix<Complex64>,
        c: DMatrix<Complex64>,
    ) -> Result<Self, RationalError> {
        let (n, r) = (poly.size(), a.nrows());
        let shapes = [("A", a.shape(), (r, r)), ("E", e.shape(), (r, r)), ("B", b.shape(), (r, n)), ("C", c.shape(), (n, r))];
        for (name, found, want) in shapes {
            if found != want {
                return Err(RationalError::Dimension(format!("{name} is {found:?}, expected {want:?}")));
            }
        }
        if r > 0 && e.clone().try_inverse().is_none() {
            return Err(RationalError::SingularE);
        }
        Ok(Self { poly, a, e, b, c })
    }

    /// `r = 0`.
    pub fn polynomial(poly: MatrixPolynomial) -> Self {
        let n = poly.size();
        Self { poly, a: DMatrix::zeros(0, 0), e: DMatrix::zeros(0, 0), b: DMatrix::zeros(0, n), c: DMatrix::zeros(n, 0) }
    }

    pub fn size(&self) -> usize {
        self.poly.size()
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    /// Coefficients, `A_j`, and the state matrices under their symbolic names.
    pub fn bindings(&self) -> Bindings {
        Bindings::new(&self.poly)
            .with(STATE_A, self.a.clone())
            .with(STATE_E, self.e.clone())
            .with(INPUT_B, self.b.clone())
            .with(OUTPUT_C, self.c.clone())
    }

    pub fn system_matrix(&self) -> SystemMatrix<'_> {
        SystemMatrix { real: self }
    }
}

/// `S(λ) = [[P(λ), C], [B, A - λE]]`.
#[derive(Debug, Clone, Copy)]
pub struct SystemMatrix<'a> {
    real: &'a Realization,
}

impl SystemMatrix<'_> {
    pub fn eval(&self, lambda: Complex64) -> DMatrix<Complex64> {
        let (n, r) = (self.real.size(), self.real.state_dim());
        let mut s = DMatrix::zeros(n + r, n + r);
        s.view_mut((0, 0), (n, n)).copy_from(&self.real.poly.eval(lambda));
        s.view_mut((0, n), (n, r)).copy_from(&self.real.c);
        s.view_mut((n, 0), (r, n)).copy_from(&self.real.b);
        s.view_mut((n, n), (r, r)).copy_from(&(&self.real.a - &self.real.e * lambda));
        s
    }

    /// `S` as a matrix polynomial of the same degree as `P`.
    pub fn as_polynomial(&self) -> MatrixPolynomial {
        let real = self.real;
        let (n, r, m) = (real.size(), real.state_dim(), real.poly.degree());
        let coeffs = (0..=m)
            .map(|j| {
                let mut s = DMatrix::zeros(n + r, n + r);
                s.view_mut((0, 0), (n, n)).copy_from(real.poly.coeff(j));
                match j {
                    0 => {
                        s.view_mut((0, n), (n, r)).copy_from(&real.c);
                        s.view_mut((n, 0), (r, n)).copy_from(&real.b);
                        s.view_mut((n, n), (r, r)).copy_from(&real.a);
                    }
                    1 => s.view_mut((n, n), (r, r)).copy_from(&-&real.e),
                    _ => {}
                }
                s
            })
            .collect();
        MatrixPolynomial::new(coeffs).expect("leading block is the nonzero A_m")
    }
}

/// Rank tests of `[A - λE, B]` and `[A - λE; C]` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimalityProbe {
    pub lambda: Complex64,
    pub controllable: bool,
    pub observable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimalityReport {
    pub probes: Vec<MinimalityProbe>,
}

impl MinimalityReport {
    pub fn is_minimal(&self) -> bool {
        self.probes.iter().all(|p| p.controllable && p.observable)
    }
}

fn full_rank(m: &DMatrix<Complex64>, rank: usize, factor: f64, dim: usize) -> bool {
    if rank == 0 {
        return true;
    }
    let s = m.singular_values();
    let threshold = factor * dim as f64 * f64::EPSILON * s.max();
    s.iter().filter(|&&x| x > threshold).count() >= rank
}

/// Minimality is checked at every eigenvalue of `(A, E)` plus two fixed probes.
pub fn check_minimality(real: &Realization, tol: &Tolerances) -> Result<MinimalityReport, RationalError> {
    let (n, r) = (real.size(), real.state_dim());
    if r == 0 {
        return Ok(MinimalityReport { probes: Vec::new() });
    }
    let poles = oracle::generalized_eigs(&real.a, &real.e, tol)?;
    let mut points = poles.finite;
    points.extend([Complex64::new(0.37, 0.91), Complex64::new(-1.3, 0.2)]);
    let dim = n.max(r);
    let probes = points
        .into_iter()
        .map(|lambda| {
            let core = &real.a - &real.e * lambda;
            let mut ctrl = DMatrix::zeros(r, r + n);
            ctrl.view_mut((0, 0), (r, r)).copy_from(&core);
            ctrl.view_mut((0, r), (r, n)).copy_from(&real.b);
            let mut obs = DMatrix::zeros(r + n, r);
            obs.view_mut((0, 0), (r, r)).copy_from(&core);
            obs.view_mut((r, 0), (n, r)).copy_from(&real.c);
            MinimalityProbe {
                lambda,
                controllable: full_rank(&ctrl, r, tol.minimality_factor, dim),
                observable: full_rank(&obs, r, tol.minimality_factor, dim),
            }
        })
        .collect();
    Ok(MinimalityReport { probes })
}

/// `[[L, e_{m-i_0} ⊗ C], [e^T_{m-c_0} ⊗ B, A - λE]]` over a symbolic EGFP.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BorderedPencil {
    /// Order `m + 1`; the last block is the state block.
    pub pencil: BlockPencil,
    pub m: u32,
    /// 0-based block row holding `C`.
    pub c_row: usize,
    /// 0-based block column holding `B`.
    pub b_col: usize,
}

impl BorderedPencil {
    pub fn realize(&self, real: &Realization) -> Result<DensePencil<Complex64>, RationalError> {
        Ok(self.pencil.realize(&real.bindings(), real.size(), real.state_dim())?)
    }

    pub fn bandwidth(&self) -> usize {
        let m = self.m as usize;
        let core = |b: &BlockMatrix| {
            (0..m)
                .flat_map(|i| (0..m).map(move |j| (i, j)))
                .filter(|&(i, j)| !b.get(i, j).is_zero())
                .map(|(i, j)| i.abs_diff(j))
                .max()
                .unwrap_or(0)
        };
        let border = (m - self.c_row).max(m - self.b_col);
        core(&self.pencil.l1).max(core(&self.pencil.l0)).max(border)
    }
}

/// Block positions `(C row, B column)`, 0-based.
pub fn border_positions(spec: &EgfpSpec) -> Result<(usize, usize), RationalError> {
    let m = spec.m;
    if !spec.sigma.contains(SignedIndex::plus(0)) || !spec.tau.contains(SignedIndex::minus(m)) {
        return Err(RationalError::MissingBorderIndex);
    }
    let zero = SignedIndex::plus(0);
    let left = crate::tuples::IndexTuple::concat([spec.sigma1(), &spec.sigma]);
    let right = crate::tuples::IndexTuple::concat([&spec.sigma, spec.sigma2()]);
    let i0 = left.inversions(zero).map_err(SpecError::from)? as usize;
    let c0 = right.consecutions(zero).map_err(SpecError::from)? as usize;
    if c0 >= m as usize || i0 >= m as usize {
        return Err(RationalError::UnsupportedBorder);
    }
    Ok((m as usize - i0 - 1, m as usize - c0 - 1))
}

pub fn build_rational(spec: &EgfpSpec) -> Result<BorderedPencil, RationalError> {
    let (c_row, b_col) = border_positions(spec)?;
    let core = pencils::build(spec)?;
    let m = spec.m as usize;
    let mut dims = vec![BlockDim::Poly; m];
    dims.push(BlockDim::State);
    let border = |inner: &BlockMatrix| {
        let mut out = BlockMatrix::zeros(dims.clone());
        for i in 0..m {
            for j in 0..m {
                out.set(i, j, inner.get(i, j).clone());
            }
        }
        out
    };
    let mut l1 = border(&core.l1);
    let mut l0 = border(&core.l0);
    l1.set(m, m, -Expr::var(STATE_E));
    l0.set(m, m, -Expr::var(STATE_A));
    l0.set(c_row, m, -Expr::var(OUTPUT_C));
    l0.set(m, b_col, -Expr::var(INPUT_B));
    Ok(BorderedPencil { pencil: BlockPencil { l1, l0 }, m: spec.m, c_row, b_col })
}

/// Band class of the bordered pencil: the polynomial prediction combined with
/// how far `C` and `B` sit from the state block.
pub fn predict_bandwidth_rational(spec: &EgfpSpec) -> Result<BandPrediction, RationalError> {
    let (c_row, b_col) = border_positions(spec)?;
    let m = spec.m as usize;
    let border = BandClass::of_bandwidth((m - c_row).max(m - b_col));
    Ok(match pencils::predict_bandwidth(spec) {
        BandPrediction::Class(c) => BandPrediction::Class(c.max(border)),
        BandPrediction::NotApplicable if border == BandClass::Wider => BandPrediction::Class(BandClass::Wider),
        BandPrediction::NotApplicable => BandPrediction::NotApplicable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockmat::MatrixAssignment;
    use crate::golden;
    use crate::pencils::Decoration;

    fn rational_example() -> EgfpSpec {
        golden::generating_spec("degree5_rational").unwrap()
    }

    #[test]
    fn bordered_example_matches_reference() {
        let b = build_rational(&rational_example()).unwrap();
        assert_eq!((b.c_row, b.b_col), (3, 3));
        let g = golden::load("degree5_rational").unwrap();
        assert!(golden::differing_blocks(&b.pencil, &g.pencil).is_empty());
        assert_eq!(b.bandwidth(), 2);
        assert_eq!(predict_bandwidth_rational(&rational_example()).unwrap(), BandPrediction::Class(BandClass::Pentadiagonal));
    }

    #[test]
    fn border_needs_zero_and_minus_m() {
        let spec = EgfpSpec::core(3, "(1,2)".parse().unwrap(), "(-3,-0)".parse().unwrap());
        assert!(matches!(build_rational(&spec), Err(RationalError::MissingBorderIndex)));
    }

    #[test]
    fn tridiagonal_core_with_offset_border() {
        let spec = EgfpSpec::core(2, "(0,1)".parse().unwrap(), "(-2)".parse().unwrap());
        assert_eq!(pencils::predict_bandwidth(&spec), BandPrediction::Class(BandClass::Tridiagonal));
        let b = build_rational(&spec).unwrap();
        assert_eq!(b.bandwidth(), 2);
        assert_eq!(predict_bandwidth_rational(&spec).unwrap(), BandPrediction::Class(BandClass::Pentadiagonal));
    }

    #[test]
    fn decoupled_system_matrix() {
        let p = MatrixPolynomial::new(vec![DMatrix::identity(2, 2) * Complex64::new(2.0, 0.0); 3]).unwrap();
        let z = DMatrix::zeros(1, 2);
        let real = Realization::new(p.clone(), DMatrix::identity(1, 1), DMatrix::identity(1, 1), z.clone(), z.transpose()).unwrap();
        let lam = Complex64::new(0.5, 0.25);
        let s = real.system_matrix().eval(lam);
        assert_eq!(s.view((0, 0), (2, 2)), p.eval(lam));
        assert_eq!(s[(2, 2)], Complex64::new(1.0, 0.0) - lam);
        assert_eq!(real.system_matrix().as_polynomial().eval(lam), s);
        let report = check_minimality(&real, &Tolerances::default()).unwrap();
        assert!(!report.is_minimal());
        assert!(check_minimality(&Realization::polynomial(p), &Tolerances::default()).unwrap().is_minimal());
    }

    #[test]
    fn rejects_bad_shapes() {
        let p = MatrixPolynomial::new(vec![DMatrix::identity(2, 2); 3]).unwrap();
        let r = Realization::new(p.clone(), DMatrix::identity(1, 1), DMatrix::zeros(1, 1), DMatrix::zeros(1, 2), DMatrix::zeros(2, 1));
        assert!(matches!(r, Err(RationalError::SingularE)));
        let r = Realization::new(p, DMatrix::identity(1, 1), DMatrix::identity(1, 1), DMatrix::zeros(2, 1), DMatrix::zeros(2, 1));
        assert!(matches!(r, Err(RationalError::Dimension(_))));
    }

    #[test]
    fn decorations_move_the_border() {
        let spec = EgfpSpec::core(3, "(1,0)".parse().unwrap(), "(-3,-2)".parse().unwrap())
            .with(Decoration::RightSigma, MatrixAssignment::trivial("(1)".parse().unwrap()));
        let (c_row, b_col) = border_positions(&spec).unwrap();
        assert_eq!((c_row, b_col), (1, 1));
    }
}
