//! `egfp solve`: eigenvalues of the dense pencil, eigenvectors of `P` (or of
//! `S` and `G` for a bordered pencil) recovered from those of the pencil, and
//! the residual of every recovered vector.

use egfp::blockmat::MatrixPolynomial;
use egfp::oracle::{self, Side, Tolerances};
use egfp::pencils::{DensePencil, EgfpSpec};
use egfp::rational::Realization;
use egfp::recovery::{self, RowSelector};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

/// Relative threshold for the numerical null space of `L(μ)` at a computed eigenvalue.
const EIGENSPACE_THRESHOLD: f64 = 1e-6;
/// Same for `L1` at infinity, where the rank drop is exact up to rounding.
const INFINITE_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub m: u32,
    pub n: usize,
    pub r: usize,
    /// `det(λ L1 - L0) ≡ 0`: the spectrum is not defined and nothing is checked.
    pub singular: bool,
    pub finite: Vec<EigenEntry>,
    pub infinite: InfiniteEntry,
    /// Largest residual over checked eigenvalues.
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenEntry {
    pub mu: Complex64,
    /// Condition number of `μ` as an eigenvalue of `P` (or `S`).
    pub condition: Option<f64>,
    /// Well-conditioned eigenvalues count toward pass/fail.
    pub checked: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub right: Option<SideReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub left: Option<SideReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SideReport {
    /// `max ‖P(μ)x‖ / (‖P‖_F ‖x‖)` over the recovered basis, or the same for `S`.
    pub residual: f64,
    /// Residual for the transfer function `G(μ)` on the first `n` rows.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transfer_residual: Option<f64>,
    pub vectors: usize,
    /// 1-based block row the vectors were read from.
    pub block: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub premultiplier: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct InfiniteEntry {
    pub multiplicity: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub right: Option<SideReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub left: Option<SideReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn residual(mat: &DMatrix<Complex64>, x: &DMatrix<Complex64>, scale: f64) -> f64 {
    (0..x.ncols()).map(|c| (mat * x.column(c)).norm() / (scale * x.column(c).norm())).fold(0.0, f64::max)
}

fn oriented(m: DMatrix<Complex64>, side: Side) -> DMatrix<Complex64> {
    match side {
        Side::Right => m,
        Side::Left => m.transpose(),
    }
}

fn from_selector(residual: f64, vectors: usize, sel: RowSelector) -> SideReport {
    SideReport {
        residual,
        transfer_residual: None,
        vectors,
        block: sel.block,
        premultiplier: sel.premultiplier.map(|p| p.to_string()),
        branch: Some(sel.branch.to_string()),
    }
}

/// Polynomial pencil: recovery through the selector table.
fn polynomial_side(
    spec: &EgfpSpec,
    p: &MatrixPolynomial,
    l: &DensePencil<Complex64>,
    mu: Complex64,
    side: Side,
) -> Result<SideReport, String> {
    let z = oracle::eigenspace_basis(&l.eval(mu), side, EIGENSPACE_THRESHOLD);
    let (x, sel) = recovery::recover_eigenvectors(spec, p, &z, side).map_err(|e| e.to_string())?;
    let r = residual(&oriented(p.eval(mu), side), &x, p.frobenius_norm());
    Ok(from_selector(r, x.ncols(), sel))
}

/// Bordered pencil: the minimal-basis block row plus the state rows.
fn rational_side(
    spec: &EgfpSpec,
    real: &Realization,
    s: &MatrixPolynomial,
    l: &DensePencil<Complex64>,
    mu: Complex64,
    side: Side,
) -> Result<SideReport, String> {
    let z = oracle::eigenspace_basis(&l.eval(mu), side, EIGENSPACE_THRESHOLD);
    let rec = recovery::recover_system(spec, real, &z, side).map_err(|e| e.to_string())?;
    let block = recovery::minimal_basis_block(spec, side).map_err(|e| e.to_string())?;
    let s_norm = s.frobenius_norm();
    let rs = residual(&oriented(real.system_matrix().eval(mu), side), &rec.system, s_norm);
    // G has a pole where E μ - A is singular; its residual is then undefined.
    let rg = (&real.e * mu - &real.a).try_inverse().and_then(|resolvent| {
        let g = oracle::transfer_eval(real, mu).ok()?;
        Some(residual(&oriented(g, side), &rec.transfer, s_norm * (1.0 + resolvent.norm())))
    });
    Ok(SideReport { residual: rs, transfer_residual: rg, vectors: rec.system.ncols(), block, premultiplier: None, branch: None })
}

fn infinite_entry(spec: &EgfpSpec, real: &Realization, l: &DensePencil<Complex64>, multiplicity: usize) -> InfiniteEntry {
    let mut entry = InfiniteEntry { multiplicity, ..InfiniteEntry::default() };
    if multiplicity == 0 {
        return entry;
    }
    if real.state_dim() > 0 {
        entry.note = Some("eigenvector recovery at infinity is only available for polynomial pencils".into());
        return entry;
    }
    let p = &real.poly;
    for side in [Side::Right, Side::Left] {
        let z = oracle::eigenspace_basis(&l.l1, side, INFINITE_THRESHOLD);
        match recovery::recover_at_infinity(spec, p, &z, side) {
            Ok((x, sel)) => {
                let r = residual(&oriented(p.coeff(spec.m).clone(), side), &x, p.frobenius_norm());
                let report = Some(from_selector(r, x.ncols(), sel));
                match side {
                    Side::Right => entry.right = report,
                    Side::Left => entry.left = report,
                }
            }
            Err(e) => {
                entry.note = Some(format!("unavailable: {e}"));
                break;
            }
        }
    }
    entry
}

pub fn solve(
    spec: &EgfpSpec,
    real: &Realization,
    l: &DensePencil<Complex64>,
    tol: &Tolerances,
) -> Result<SolveReport, oracle::OracleError> {
    let (n, r) = (real.size(), real.state_dim());
    let mut report = SolveReport {
        m: spec.m,
        n,
        r,
        singular: false,
        finite: Vec::new(),
        infinite: InfiniteEntry::default(),
        max_residual: 0.0,
        tolerance: tol.residual,
        passed: true,
    };
    if n == 0 {
        return Ok(report);
    }
    let eigs = oracle::generalized_eigs(&l.l0, &l.l1, tol)?;
    report.singular = eigs.singular;
    if eigs.singular {
        report.finite = eigs
            .finite
            .iter()
            .map(|&mu| EigenEntry { mu, condition: None, checked: false, right: None, left: None, errors: Vec::new() })
            .collect();
        report.infinite.multiplicity = eigs.infinite;
        report.infinite.note = Some("singular pencil: eigenvalues are not defined".into());
        return Ok(report);
    }

    // The eigenvalue condition is measured on P itself, or on S for a bordered pencil.
    let target = if r > 0 { real.system_matrix().as_polynomial() } else { real.poly.clone() };
    for &mu in &eigs.finite {
        let condition = oracle::eigenvalue_condition(&target, mu);
        let checked = condition <= tol.max_condition;
        let mut entry =
            EigenEntry { mu, condition: condition.is_finite().then_some(condition), checked, right: None, left: None, errors: Vec::new() };
        for side in [Side::Right, Side::Left] {
            let result =
                if r > 0 { rational_side(spec, real, &target, l, mu, side) } else { polynomial_side(spec, &real.poly, l, mu, side) };
            match result {
                Ok(s) => {
                    if checked {
                        let worst = s.residual.max(s.transfer_residual.unwrap_or(0.0));
                        report.max_residual = report.max_residual.max(worst);
                        report.passed &= worst <= tol.residual;
                    }
                    match side {
                        Side::Right => entry.right = Some(s),
                        Side::Left => entry.left = Some(s),
                    }
                }
                Err(e) => {
                    report.passed &= !checked;
                    entry.errors.push(format!("{side:?}: {e}"));
                }
            }
        }
        report.finite.push(entry);
    }
    report.infinite = infinite_entry(spec, real, l, eigs.infinite);
    for s in [&report.infinite.right, &report.infinite.left].into_iter().flatten() {
        report.max_residual = report.max_residual.max(s.residual);
        report.passed &= s.residual <= tol.residual;
    }
    Ok(report)
}
