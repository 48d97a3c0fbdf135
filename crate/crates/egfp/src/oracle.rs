//! Reference computations the theorems are checked against.
//!
//! Nothing here goes through [`crate::pencils`]: the companion form is coded
//! directly, so agreement with an EGFP spectrum is evidence rather than a tautology.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blockmat::MatrixPolynomial;
use crate::rational::Realization;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("generalized eigensolver did not converge")]
    NoConvergence,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is singular at the evaluation point")]
    Singular,
    #[error("tolerance file {path}: {reason}")]
    Config { path: String, reason: String },
}

/// Every numeric tolerance in one place.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Recovered vectors must satisfy `‖P(μ)x‖ <= residual · ‖P‖_F · ‖x‖`.
    pub residual: f64,
    /// Relative eigenvalue agreement `|λ - μ| <= eigenvalue · max(1, |μ|)`.
    pub eigenvalue: f64,
    /// Instances with a larger eigenvalue condition number are skipped in spectral checks.
    pub max_condition: f64,
    /// Null-space threshold is `rank_factor · max(rows, cols) · ε · σ_1`.
    pub rank_factor: f64,
    /// Minimality threshold is `minimality_factor · max(r, n) · ε · σ_1`.
    pub minimality_factor: f64,
    /// An eigenvalue is infinite when `|β| <= infinite · |(α, β)|` on the normalized pencil.
    pub infinite: f64,
    /// Largest principal angle accepted between subspaces that should coincide.
    pub subspace_angle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: 1e-8,
            eigenvalue: 1e-8,
            max_condition: 1e6,
            rank_factor: 1.0,
            minimality_factor: 64.0,
            infinite: 1e-10,
            subspace_angle: 1e-8,
        }
    }
}

impl Tolerances {
    /// Environment variable naming a JSON tolerance file.
    pub const ENV_VAR: &'static str = "EGFP_TOLERANCES";

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn from_file(path: &Path) -> Result<Self, OracleError> {
        let err = |reason: String| OracleError::Config { path: path.display().to_string(), reason };
        let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        Self::from_json(&text).map_err(|e| err(e.to_string()))
    }

    /// Defaults, overridden by the file named in [`Self::ENV_VAR`] when set.
    pub fn from_env() -> Result<Self, OracleError> {
        match std::env::var_os(Self::ENV_VAR) {
            Some(p) if !p.is_empty() => Self::from_file(Path::new(&p)),
            _ => Ok(Self::default()),
        }
    }
}

/// Spectrum of a square pencil `λ L1 - L0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenResult {
    pub finite: Vec<Complex64>,
    pub infinite: usize,
    /// True when `det(λ L1 - L0)` vanishes identically; the split above is then meaningless.
    pub singular: bool,
}

impl EigenResult {
    pub fn dim(&self) -> usize {
        self.finite.len() + self.infinite
    }
}

fn to_faer(m: &DMatrix<Complex64>) -> faer::Mat<faer::c64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Generalized eigenvalues of `λ L1 - L0` by the QZ algorithm.
///
/// The backing solver is reentrant, so no lock is taken.
pub fn generalized_eigs(l0: &DMatrix<Complex64>, l1: &DMatrix<Complex64>, tol: &Tolerances) -> Result<EigenResult, OracleError> {
    let n = l0.nrows();
    if l0.shape() != (n, n) || l1.shape() != (n, n) {
        return Err(OracleError::Dimension(format!("pencil blocks {:?} and {:?}", l0.shape(), l1.shape())));
    }
    if n == 0 {
        return Ok(EigenResult { finite: Vec::new(), infinite: 0, singular: false });
    }
    let singular = normal_rank(l0, l1, tol) < n;
    let s0 = frobenius(l0).max(f64::MIN_POSITIVE);
    let s1 = frobenius(l1).max(f64::MIN_POSITIVE);
    let mut a = to_faer(&l0.unscale(s0));
    let mut b = to_faer(&l1.unscale(s1));
    let mut alpha = faer::diag::Diag::<faer::c64>::zeros(n);
    let mut beta = faer::diag::Diag::<faer::c64>::zeros(n);
    // Eigenvalues only: the eigenvector path under-reserves scratch for n = 1.
    let par = faer::Par::Seq;
    let no = faer::linalg::evd::ComputeEigenvectors::No;
    let req = faer::linalg::gevd::gevd_scratch::<faer::c64>(n, no, no, par, Default::default());
    let mut buf = faer::dyn_stack::MemBuffer::new(req);
    faer::linalg::gevd::gevd_cplx(
        a.as_mut(),
        b.as_mut(),
        alpha.as_mut(),
        beta.as_mut(),
        None,
        None,
        par,
        faer::dyn_stack::MemStack::new(&mut buf),
        Default::default(),
    )
    .map_err(|_| OracleError::NoConvergence)?;
    let (alpha, beta) = (alpha.column_vector(), beta.column_vector());
    let mut finite = Vec::with_capacity(n);
    let mut infinite = 0;
    for k in 0..n {
        let (al, be) = (alpha[k], beta[k]);
        let scale = (al.norm_sqr() + be.norm_sqr()).sqrt();
        if be.norm() <= tol.infinite * scale || scale == 0.0 {
            infinite += 1;
        } else {
            finite.push(al / be * (s0 / s1));
        }
    }
    Ok(EigenResult { finite, infinite, singular })
}

fn frobenius(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// First companion form `λ diag(A_m, I, …, I) + [[A_{m-1} … A_0], [-I 0 …], …]`, as `(L0, L1)`
/// of `λ L1 - L0`.
pub fn first_companion(p: &MatrixPolynomial) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let (m, n) = (p.degree() as usize, p.size());
    let mut l1 = DMatrix::<Complex64>::identity(m * n, m * n);
    l1.view_mut((0, 0), (n, n)).copy_from(p.coeff(m as u32));
    let mut l0 = DMatrix::<Complex64>::zeros(m * n, m * n);
    for k in 0..m {
        let coeff = p.coeff((m - 1 - k) as u32);
        l0.view_mut((0, k * n), (n, n)).copy_from(&-coeff);
    }
    for k in 1..m {
        l0.view_mut((k * n, (k - 1) * n), (n, n)).fill_with_identity();
    }
    (l0, l1)
}

/// Eigenvalues of `P` through its first companion form.
pub fn companion_eigs(p: &MatrixPolynomial, tol: &Tolerances) -> Result<EigenResult, OracleError> {
    let (l0, l1) = first_companion(p);
    generalized_eigs(&l0, &l1, tol)
}

/// `Σ j λ^{j-1} A_j`.
pub fn derivative_eval(p: &MatrixPolynomial, lambda: Complex64) -> DMatrix<Complex64> {
    let n = p.size();
    let mut acc = DMatrix::<Complex64>::zeros(n, n);
    for j in (1..=p.degree()).rev() {
        acc = acc * lambda + p.coeff(j) * Complex64::new(j as f64, 0.0);
    }
    acc
}

/// Mixed condition number of a simple eigenvalue `λ` of `P`:
/// `(Σ |λ|^j ‖A_j‖) ‖x‖ ‖y‖ / (max(1, |λ|) |y^* P'(λ) x|)` with `x`, `y` the
/// singular vectors of `P(λ)` for its smallest singular value.
pub fn eigenvalue_condition(p: &MatrixPolynomial, lambda: Complex64) -> f64 {
    let svd = p.eval(lambda).svd(true, true);
    let k = argmin(&svd.singular_values);
    let (Some(u), Some(v_t)) = (svd.u, svd.v_t) else { return f64::INFINITY };
    let x = v_t.row(k).adjoint();
    let y = u.column(k).into_owned();
    let dp = derivative_eval(p, lambda);
    let denom = (y.adjoint() * dp * x)[(0, 0)].norm() * lambda.norm().max(1.0);
    let weight: f64 = (0..=p.degree()).map(|j| lambda.norm().powi(j as i32) * p.coeff(j).norm()).sum();
    if denom == 0.0 {
        f64::INFINITY
    } else {
        weight / denom
    }
}

fn argmin(v: &nalgebra::DVector<f64>) -> usize {
    v.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(k, _)| k).unwrap_or(0)
}

/// Which null space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `M x = 0`.
    Right,
    /// `y^T M = 0` (transpose, not conjugate transpose).
    Left,
}

/// Numerical rank with threshold `rank_factor · max(rows, cols) · ε · σ_1`.
pub fn numerical_rank(m: &DMatrix<Complex64>, tol: &Tolerances) -> usize {
    if m.is_empty() {
        return 0;
    }
    let s = m.singular_values();
    let threshold = rank_threshold(m, s.max(), tol.rank_factor);
    s.iter().filter(|&&x| x > threshold).count()
}

fn rank_threshold(m: &DMatrix<Complex64>, sigma1: f64, factor: f64) -> f64 {
    factor * m.nrows().max(m.ncols()) as f64 * f64::EPSILON * sigma1
}

/// Orthonormal basis of the right or left null space, as columns.
pub fn null_basis(m: &DMatrix<Complex64>, side: Side, tol: &Tolerances) -> DMatrix<Complex64> {
    let target = match side {
        Side::Right => m.clone(),
        Side::Left => m.transpose(),
    };
    let cols = target.ncols();
    if target.nrows() == 0 {
        return DMatrix::identity(cols, cols);
    }
    // Pad to at least as many rows as columns so the SVD returns a full V.
    let padded = if target.nrows() < cols {
        let mut p = DMatrix::<Complex64>::zeros(cols, cols);
        p.view_mut((0, 0), target.shape()).copy_from(&target);
        p
    } else {
        target
    };
    let svd = padded.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let threshold = rank_threshold(&padded, svd.singular_values.max(), tol.rank_factor);
    let null: Vec<usize> = (0..cols).filter(|&k| svd.singular_values[k] <= threshold).collect();
    let mut out = DMatrix::<Complex64>::zeros(cols, null.len());
    for (c, &k) in null.iter().enumerate() {
        out.set_column(c, &v_t.row(k).adjoint());
    }
    out
}

/// Null space of `M` at a computed eigenvalue: singular directions with
/// `σ <= relative · σ_1`, and at least the smallest one.
pub fn eigenspace_basis(m: &DMatrix<Complex64>, side: Side, relative: f64) -> DMatrix<Complex64> {
    let target = match side {
        Side::Right => m.clone(),
        Side::Left => m.transpose(),
    };
    let svd = target.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let s = &svd.singular_values;
    let smallest = argmin(s);
    let keep: Vec<usize> = (0..s.len()).filter(|&k| k == smallest || s[k] <= relative * s.max()).collect();
    let mut out = DMatrix::<Complex64>::zeros(v_t.ncols(), keep.len());
    for (c, &k) in keep.iter().enumerate() {
        out.set_column(c, &v_t.row(k).adjoint());
    }
    out
}

/// Rank of `λ L1 - L0` at generic `λ`.
pub fn normal_rank(l0: &DMatrix<Complex64>, l1: &DMatrix<Complex64>, tol: &Tolerances) -> usize {
    PolyMatrix::pencil(l0, l1).normal_rank(tol)
}

/// `Σ λ^j C_j` with possibly rectangular coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMatrix(pub Vec<DMatrix<Complex64>>);

impl PolyMatrix {
    /// `λ L1 - L0`.
    pub fn pencil(l0: &DMatrix<Complex64>, l1: &DMatrix<Complex64>) -> Self {
        Self(vec![-l0, l1.clone()])
    }

    pub fn from_polynomial(p: &MatrixPolynomial) -> Self {
        Self(p.coeffs().to_vec())
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0[0].shape()
    }

    pub fn eval(&self, lambda: Complex64) -> DMatrix<Complex64> {
        let mut acc = self.0.last().expect("at least one coefficient").clone();
        for c in self.0.iter().rev().skip(1) {
            acc = acc * lambda + c;
        }
        acc
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.iter().map(|c| c.transpose()).collect())
    }

    fn oriented(&self, side: Side) -> Self {
        match side {
            Side::Right => self.clone(),
            Side::Left => self.transpose(),
        }
    }

    /// Block Toeplitz matrix mapping the coefficients of a degree `<= d` vector
    /// polynomial to those of its product with `self`.
    fn convolution(&self, d: usize) -> DMatrix<Complex64> {
        let (r, c) = self.shape();
        let k = self.0.len() - 1;
        let mut t = DMatrix::<Complex64>::zeros((d + k + 1) * r, (d + 1) * c);
        for j in 0..=d {
            for (i, coeff) in self.0.iter().enumerate() {
                t.view_mut(((i + j) * r, j * c), (r, c)).copy_from(coeff);
            }
        }
        t
    }

    /// Rank at generic `λ`: the largest rank over a few fixed irrational probes.
    pub fn normal_rank(&self, tol: &Tolerances) -> usize {
        PROBES.iter().map(|&(re, im)| numerical_rank(&self.eval(Complex64::new(re, im)), tol)).max().unwrap_or(0)
    }

    /// Degree cap for kernel searches: indices of a `r × c` polynomial of degree `k`
    /// sum to at most `k · min(r, c)`.
    fn degree_cap(&self) -> usize {
        let (r, c) = self.shape();
        (self.0.len() - 1) * r.min(c)
    }
}

/// Generic evaluation points, chosen away from any structured value.
const PROBES: [(f64, f64); 3] = [(0.577_215_664_9, 1.306_562_9), (-1.732_050_807, 0.291_402_7), (2.593_748_2, -0.712_890_6)];

/// A vector polynomial, lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyVector(pub Vec<DVector<Complex64>>);

impl PolyVector {
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn eval(&self, lambda: Complex64) -> DVector<Complex64> {
        let mut acc = self.0.last().expect("at least one coefficient").clone();
        for c in self.0.iter().rev().skip(1) {
            acc = acc * lambda + c;
        }
        acc
    }

    /// Rows `start..start + len` of every coefficient, with vanishing top coefficients dropped.
    pub fn rows(&self, start: usize, len: usize) -> Self {
        let mut coeffs: Vec<_> = self.0.iter().map(|c| c.rows(start, len).into_owned()).collect();
        let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.norm() <= 1e3 * f64::EPSILON * scale) {
            coeffs.pop();
        }
        Self(coeffs)
    }

    /// Coefficients stacked into one column, padded with zeros to degree `d`.
    fn stacked(&self, shift: usize, d: usize) -> DVector<Complex64> {
        let len = self.0[0].len();
        let mut out = DVector::zeros((d + 1) * len);
        for (k, c) in self.0.iter().enumerate() {
            out.rows_mut((k + shift) * len, len).copy_from(c);
        }
        out
    }
}

/// Minimal indices by rank growth of convolution matrices.
///
/// With `n_d` the kernel dimension at degree `d`, `n_d - n_{d-1}` counts the
/// indices `<= d`.
pub fn minimal_indices(p: &PolyMatrix, side: Side, tol: &Tolerances) -> Vec<usize> {
    minimal_basis(p, side, tol).iter().map(PolyVector::degree).collect()
}

pub fn minimal_indices_pencil(l0: &DMatrix<Complex64>, l1: &DMatrix<Complex64>, side: Side, tol: &Tolerances) -> Vec<usize> {
    minimal_indices(&PolyMatrix::pencil(l0, l1), side, tol)
}

/// A minimal basis of the right (or left) rational null space, in order of degree.
///
/// Degree-`d` vectors are the directions of the degree-`d` convolution kernel
/// orthogonal to the shifts of the lower-degree vectors already chosen.
pub fn minimal_basis(p: &PolyMatrix, side: Side, tol: &Tolerances) -> Vec<PolyVector> {
    let p = p.oriented(side);
    let cols = p.shape().1;
    let expected = cols - p.normal_rank(tol).min(cols);
    let mut basis: Vec<PolyVector> = Vec::with_capacity(expected);
    for d in 0..=p.degree_cap() {
        if basis.len() >= expected {
            break;
        }
        let kernel = null_basis(&p.convolution(d), Side::Right, tol);
        let shifts: Vec<DVector<Complex64>> = basis.iter().flat_map(|v| (0..=d - v.degree()).map(move |j| v.stacked(j, d))).collect();
        let fresh = kernel.ncols().saturating_sub(shifts.len());
        if fresh == 0 {
            continue;
        }
        let mut residual = kernel;
        if !shifts.is_empty() {
            let q = orthonormalize(&DMatrix::from_columns(&shifts), tol);
            residual -= &q * (q.adjoint() * &residual);
        }
        let svd = residual.svd(true, false);
        let u = svd.u.expect("requested U");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        for &k in order.iter().take(fresh) {
            let col = u.column(k);
            basis.push(PolyVector((0..=d).map(|j| col.rows(j * cols, cols).into_owned()).collect()));
        }
    }
    basis
}

/// `G(λ) = P(λ) + C (λE - A)^{-1} B`, by a linear solve.
pub fn transfer_eval(real: &Realization, lambda: Complex64) -> Result<DMatrix<Complex64>, OracleError> {
    let mut g = real.poly.eval(lambda);
    if real.state_dim() == 0 {
        return Ok(g);
    }
    let pencil = &real.e * lambda - &real.a;
    let solved = pencil.lu().solve(&real.b).ok_or(OracleError::Singular)?;
    g += &real.c * solved;
    Ok(g)
}

/// Greedy nearest-neighbour pairing; returns the largest `|λ - μ| / max(1, |μ|)`,
/// or infinity when the multisets differ in size.
pub fn match_spectra(found: &[Complex64], reference: &[Complex64]) -> f64 {
    if found.len() != reference.len() {
        return f64::INFINITY;
    }
    let mut pool: Vec<Complex64> = found.to_vec();
    let mut worst = 0.0f64;
    for mu in reference {
        let (k, d) = pool
            .iter()
            .enumerate()
            .map(|(k, l)| (k, (l - mu).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("pool has as many entries as reference");
        pool.swap_remove(k);
        worst = worst.max(d / mu.norm().max(1.0));
    }
    worst
}

/// Largest `min_λ |λ - μ| / max(1, |μ|)` over the reference values `μ`.
pub fn worst_nearest(found: &[Complex64], reference: &[Complex64]) -> f64 {
    reference.iter().map(|mu| found.iter().map(|l| (l - mu).norm()).fold(f64::INFINITY, f64::min) / mu.norm().max(1.0)).fold(0.0, f64::max)
}

/// Sine of the largest principal angle between the column spans of `a` and `b`.
pub fn subspace_distance(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, tol: &Tolerances) -> f64 {
    let qa = orthonormalize(a, tol);
    let qb = orthonormalize(b, tol);
    if qa.ncols() != qb.ncols() {
        return 1.0;
    }
    if qa.ncols() == 0 {
        return 0.0;
    }
    let residual = &qb - &qa * (qa.adjoint() * &qb);
    residual.singular_values().max().min(1.0)
}

/// Orthonormal basis of the column span.
pub fn orthonormalize(a: &DMatrix<Complex64>, tol: &Tolerances) -> DMatrix<Complex64> {
    if a.ncols() == 0 || a.nrows() == 0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let threshold = rank_threshold(a, svd.singular_values.max(), tol.rank_factor.max(1.0) * 16.0);
    let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&k| svd.singular_values[k] > threshold).collect();
    DMatrix::from_fn(a.nrows(), keep.len(), |i, j| u[(i, keep[j])])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn scalar_poly(coeffs: &[f64]) -> MatrixPolynomial {
        MatrixPolynomial::new(coeffs.iter().map(|&x| DMatrix::from_element(1, 1, c(x))).collect()).unwrap()
    }

    #[test]
    fn quadratic_roots() {
        let p = scalar_poly(&[-1.0, 0.0, 1.0]);
        let e = companion_eigs(&p, &Tolerances::default()).unwrap();
        assert_eq!(e.infinite, 0);
        assert!(match_spectra(&e.finite, &[c(1.0), c(-1.0)]) < 1e-12);
    }

    #[test]
    fn diagonal_pencil() {
        let l0 = DMatrix::from_diagonal(&nalgebra::dvector![c(2.0), c(-3.0), c(1.0)]);
        let l1 = DMatrix::from_diagonal(&nalgebra::dvector![c(1.0), c(1.0), c(0.0)]);
        let e = generalized_eigs(&l0, &l1, &Tolerances::default()).unwrap();
        assert_eq!(e.infinite, 1);
        assert!(!e.singular);
        assert!(match_spectra(&e.finite, &[c(2.0), c(-3.0)]) < 1e-14);
    }

    #[test]
    fn singular_pencil_is_flagged() {
        let l0 = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        let l1 = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)]);
        assert!(generalized_eigs(&l0, &l1, &Tolerances::default()).unwrap().singular);
    }

    #[test]
    fn null_bases_of_extremes() {
        let tol = Tolerances::default();
        assert_eq!(null_basis(&DMatrix::identity(3, 3), Side::Right, &tol).ncols(), 0);
        assert_eq!(null_basis(&DMatrix::zeros(3, 3), Side::Left, &tol).ncols(), 3);
        let wide = DMatrix::from_row_slice(1, 2, &[c(1.0), c(-1.0)]);
        let z = null_basis(&wide, Side::Right, &tol);
        assert_eq!(z.ncols(), 1);
        assert!((&wide * &z).norm() < 1e-14);
    }

    #[test]
    fn kronecker_blocks() {
        let tol = Tolerances::default();
        // L_eps is eps x (eps+1): λ [I 0] - [0 I], right index eps.
        for eps in 0..=2usize {
            let mut l1 = DMatrix::<Complex64>::zeros(eps, eps + 1);
            let mut l0 = DMatrix::<Complex64>::zeros(eps, eps + 1);
            for i in 0..eps {
                l1[(i, i)] = c(1.0);
                l0[(i, i + 1)] = c(1.0);
            }
            assert_eq!(minimal_indices_pencil(&l0, &l1, Side::Right, &tol), vec![eps]);
            assert!(minimal_indices_pencil(&l0, &l1, Side::Left, &tol).is_empty());
        }
        let regular = minimal_indices_pencil(&DMatrix::identity(1, 1), &DMatrix::identity(1, 1), Side::Right, &tol);
        assert!(regular.is_empty());
    }

    #[test]
    fn transfer_without_state_is_polynomial() {
        let p = scalar_poly(&[1.0, 2.0, 3.0]);
        let real = Realization::polynomial(p.clone());
        let z = Complex64::new(0.3, -1.1);
        assert!((transfer_eval(&real, z).unwrap() - p.eval(z)).norm() < 1e-15);
    }

    #[test]
    fn tolerance_file_overrides_defaults() {
        let t = Tolerances::from_json(r#"{"residual": 1e-6}"#).unwrap();
        assert_eq!(t.residual, 1e-6);
        assert_eq!(t.eigenvalue, Tolerances::default().eigenvalue);
        assert!(Tolerances::from_json(r#"{"resid": 1}"#).is_err());
    }
}
