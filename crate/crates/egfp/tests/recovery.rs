use std::collections::BTreeMap;

use egfp::blockmat::{elementary_row, Bindings};
use egfp::expr::Expr;
use egfp::oracle::{self, Side, Tolerances};
use egfp::pencils::{self, EgfpSpec, EnumerationFilter};
use egfp::recovery::{self, RowSelector};
use egfp::sample;

fn undecorated(spec: &EgfpSpec) -> EgfpSpec {
    EgfpSpec::core(spec.m, spec.sigma.clone(), spec.tau.clone())
}

/// Sparse block row (or column) times a product of elementary factors.
fn propagate(start: usize, factors: &[(egfp::tuples::SignedIndex, Expr)], m: u32, row: bool) -> BTreeMap<usize, Expr> {
    let mut vec = BTreeMap::from([(start, Expr::identity())]);
    let ordered: Vec<_> = if row { factors.iter().collect() } else { factors.iter().rev().collect() };
    for (j, w) in ordered {
        let mut next: BTreeMap<usize, Expr> = BTreeMap::new();
        for (block, coeff) in &vec {
            for (to, f) in elementary_row(m - *block as u32, *j, w, m).unwrap() {
                let term = if row { coeff * &f } else { &f * coeff };
                let slot = next.entry(to).or_default();
                *slot = &*slot + &term;
            }
        }
        next.retain(|_, e| !e.is_zero());
        vec = next;
    }
    vec
}

/// Pushes the undecorated selector row through the decorations and compares with the table.
fn table_agrees(spec: &EgfpSpec, side: Side) -> bool {
    let gf = recovery::selector(&undecorated(spec), side).unwrap();
    let egfp = recovery::selector(spec, side).unwrap();
    let (left, right) = pencils::decoration_factors(spec);
    let moved = match side {
        Side::Right => propagate(gf.block, &right, spec.m, true),
        Side::Left => propagate(gf.block, &left, spec.m, false),
    };
    gf.premultiplier == egfp.premultiplier && moved == BTreeMap::from([(egfp.block, Expr::identity())])
}

#[test]
fn case_tables_match_symbolic_propagation() {
    let filter = EnumerationFilter::default();
    let mut checked = 0;
    for m in 2..=4 {
        for spec in pencils::enumerate_specs(m, &filter) {
            for side in [Side::Right, Side::Left] {
                assert!(table_agrees(&spec, side), "{side:?} table disagrees for {spec:?}");
            }
            checked += 1;
        }
    }
    assert!(checked > 6000);
}

fn recovered_residual(spec: &EgfpSpec, n: usize, seed: u64) -> Option<(f64, usize)> {
    let tol = Tolerances::default();
    let mut rng = sample::rng(seed);
    let p = sample::polynomial(spec.m, n, &mut rng);
    let mut bindings = Bindings::new(&p);
    sample::bind_decorations(spec, &mut bindings, n, &mut rng);
    let l = pencils::build_dense(spec, &bindings, n).unwrap();
    let eigs = oracle::generalized_eigs(&l.l0, &l.l1, &tol).unwrap();
    let mut worst = 0.0f64;
    let mut count = 0;
    for &mu in &eigs.finite {
        if oracle::eigenvalue_condition(&p, mu) > tol.max_condition {
            continue;
        }
        for side in [Side::Right, Side::Left] {
            let z = oracle::eigenspace_basis(&l.eval(mu), side, 1e-6);
            let (x, _) = recovery::recover_eigenvectors(spec, &p, &z, side).unwrap();
            let pm = match side {
                Side::Right => p.eval(mu),
                Side::Left => p.eval(mu).transpose(),
            };
            for c in 0..x.ncols() {
                let v = x.column(c);
                worst = worst.max((&pm * v).norm() / (p.frobenius_norm() * v.norm()));
                count += 1;
            }
        }
    }
    Some((worst, count))
}

#[test]
fn random_recovery_residuals() {
    let mut rng = sample::rng(2024);
    for k in 0..200u64 {
        let m = 2 + (k % 4) as u32;
        let n = 1 + (k % 3) as usize;
        let spec = sample::spec(m, 2, &mut rng);
        let (worst, count) = recovered_residual(&spec, n, k).unwrap();
        assert!(count > 0);
        assert!(worst <= 1e-8, "residual {worst:e} for {spec:?} (n = {n})");
    }
}

#[test]
fn every_branch_is_reached() {
    use std::collections::BTreeSet;
    let mut seen = BTreeSet::new();
    for m in 2..=4 {
        for spec in pencils::enumerate_specs(m, &EnumerationFilter::default()) {
            for side in [Side::Right, Side::Left] {
                let s: RowSelector = recovery::selector(&spec, side).unwrap();
                seen.insert(format!("{side:?}/{}", s.branch));
            }
        }
    }
    assert_eq!(seen.len(), 12, "{seen:?}");
}

#[test]
fn eigenvectors_at_infinity() {
    let tol = Tolerances::default();
    let mut rng = sample::rng(99);
    let mut tested = 0;
    while tested < 60 {
        let m = 2 + (tested % 4) as u32;
        let n = 2 + (tested % 2) as usize;
        let spec = sample::spec(m, 2, &mut rng);
        let report = spec.validate();
        if !spec.tau.contains(egfp::tuples::SignedIndex::minus(m)) || report.requirements.contains(&pencils::Requirement::LeadingInvertible)
        {
            continue;
        }
        let p = sample::polynomial_with_singular_leading(m, n, 1, &mut rng);
        let mut bindings = Bindings::new(&p);
        sample::bind_decorations(&spec, &mut bindings, n, &mut rng);
        let l = pencils::build_dense(&spec, &bindings, n).unwrap();
        for side in [Side::Right, Side::Left] {
            let z = oracle::eigenspace_basis(&l.l1, side, 1e-10);
            assert_eq!(z.ncols(), 1);
            let (x, _) = recovery::recover_at_infinity(&spec, &p, &z, side).unwrap();
            let lead = match side {
                Side::Right => p.coeff(m).clone(),
                Side::Left => p.coeff(m).transpose(),
            };
            let v = x.column(0);
            assert!((&lead * v).norm() <= tol.residual * p.frobenius_norm() * v.norm(), "{spec:?}");
        }
        tested += 1;
    }
}

#[test]
fn decorations_do_not_move_recovered_subspace() {
    let tol = Tolerances::default();
    let mut rng = sample::rng(5);
    let p = sample::polynomial(4, 2, &mut rng);
    let mu = oracle::companion_eigs(&p, &tol).unwrap().finite[0];
    let all: Vec<EgfpSpec> = pencils::enumerate_specs(4, &EnumerationFilter::default()).collect();
    let mut groups: BTreeMap<String, Vec<&EgfpSpec>> = BTreeMap::new();
    for s in &all {
        groups.entry(format!("{} {}", s.sigma, s.tau)).or_default().push(s);
    }
    let variants = groups.into_values().max_by_key(|g| g.len()).unwrap();
    assert!(variants.len() >= 4);
    let mut reference = None;
    for &spec in variants.iter().take(12) {
        for side in [Side::Right, Side::Left] {
            let mut bindings = Bindings::new(&p);
            sample::bind_decorations(spec, &mut bindings, 2, &mut rng);
            let l = pencils::build_dense(spec, &bindings, 2).unwrap();
            let z = oracle::eigenspace_basis(&l.eval(mu), side, 1e-6);
            let (x, _) = recovery::recover_eigenvectors(spec, &p, &z, side).unwrap();
            if side == Side::Left {
                let direct = oracle::eigenspace_basis(&p.eval(mu), Side::Left, 1e-6);
                assert!(oracle::subspace_distance(&direct, &x, &tol) <= tol.subspace_angle);
                continue;
            }
            match &reference {
                None => reference = Some(x),
                Some(x0) => assert!(oracle::subspace_distance(x0, &x, &tol) <= tol.subspace_angle),
            }
        }
    }
}
