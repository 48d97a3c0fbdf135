use egfp::oracle::{self, Side, Tolerances};
use egfp::pencils::EgfpSpec;
use egfp::rational::{self, Realization};
use egfp::recovery;
use egfp::sample::{self, SampleRng};
use nalgebra::DMatrix;
use num_complex::Complex64;

fn borderable(m: u32, rng: &mut SampleRng) -> EgfpSpec {
    loop {
        let s = sample::spec(m, 2, rng);
        if rational::border_positions(&s).is_ok() {
            return s;
        }
    }
}

fn residual(mat: &DMatrix<Complex64>, x: &DMatrix<Complex64>, scale: f64) -> f64 {
    (0..x.ncols()).map(|c| (mat * x.column(c)).norm() / (scale * x.column(c).norm())).fold(0.0, f64::max)
}

#[test]
fn bordered_pencils_carry_the_system_spectrum() {
    let tol = Tolerances::default();
    let mut rng = sample::rng(31);
    for k in 0..25u64 {
        let m = 2 + (k % 3) as u32;
        let (n, r) = (1 + (k % 3) as usize, 1 + (k % 2) as usize);
        let spec = borderable(m, &mut rng);
        let p = sample::polynomial(m, n, &mut rng);
        let real = sample::realization(p, r, &mut rng);
        assert!(rational::check_minimality(&real, &tol).unwrap().is_minimal());
        let bordered = rational::build_rational(&spec).unwrap();
        let mut bindings = real.bindings();
        sample::bind_decorations(&spec, &mut bindings, n, &mut rng);
        let l = bordered.pencil.realize(&bindings, n, r).unwrap();
        let eigs = oracle::generalized_eigs(&l.l0, &l.l1, &tol).unwrap();
        let s_poly = real.system_matrix().as_polynomial();
        let reference = oracle::companion_eigs(&s_poly, &tol).unwrap();
        // det S has degree mn + r; the companion of S also reports perturbed
        // infinite eigenvalues, so it is compared only where well conditioned.
        assert_eq!(eigs.finite.len(), m as usize * n + r, "{spec:?}");
        let well = |v: &[Complex64]| -> Vec<Complex64> {
            v.iter().copied().filter(|&mu| oracle::eigenvalue_condition(&s_poly, mu) <= tol.max_condition).collect()
        };
        assert!(oracle::worst_nearest(&eigs.finite, &well(&reference.finite)) <= tol.eigenvalue);
        assert!(oracle::worst_nearest(&reference.finite, &well(&eigs.finite)) <= tol.eigenvalue);

        let s_norm = s_poly.frobenius_norm();
        for &mu in &eigs.finite {
            if oracle::eigenvalue_condition(&s_poly, mu) > tol.max_condition {
                continue;
            }
            for side in [Side::Right, Side::Left] {
                let z = oracle::eigenspace_basis(&l.eval(mu), side, 1e-6);
                let rec = recovery::recover_system(&spec, &real, &z, side).unwrap();
                let (s_mu, g_mu) = (real.system_matrix().eval(mu), oracle::transfer_eval(&real, mu).unwrap());
                let (s_mu, g_mu) = match side {
                    Side::Right => (s_mu, g_mu),
                    Side::Left => (s_mu.transpose(), g_mu.transpose()),
                };
                assert!(residual(&s_mu, &rec.system, s_norm) <= tol.residual, "{side:?} {spec:?}");
                let g_scale = s_norm * (1.0 + (&real.e * mu - &real.a).try_inverse().unwrap().norm());
                assert!(residual(&g_mu, &rec.transfer, g_scale) <= tol.residual, "{side:?} {spec:?}");
            }
        }
    }
}

#[test]
fn zero_coupling_reduces_to_polynomial_recovery() {
    let tol = Tolerances::default();
    let mut rng = sample::rng(32);
    let spec = egfp::golden::generating_spec("degree5_rational").unwrap();
    let p = sample::polynomial(5, 2, &mut rng);
    let r = 2;
    let real = Realization::new(
        p.clone(),
        sample::complex_matrix(r, r, &mut rng),
        DMatrix::identity(r, r),
        DMatrix::zeros(r, 2),
        DMatrix::zeros(2, r),
    )
    .unwrap();
    let l = rational::build_rational(&spec).unwrap().realize(&real).unwrap();
    let mu = oracle::companion_eigs(&p, &tol).unwrap().finite[3];
    let z = oracle::eigenspace_basis(&l.eval(mu), Side::Right, 1e-6);
    let rec = recovery::recover_system(&spec, &real, &z, Side::Right).unwrap();
    assert!(rec.system.rows(2, r).norm() <= 1e-10 * rec.system.norm());
    let poly = egfp::pencils::build_dense(&spec, &egfp::blockmat::Bindings::new(&p), 2).unwrap();
    let zp = oracle::eigenspace_basis(&poly.eval(mu), Side::Right, 1e-6);
    let (x, _) = recovery::recover_eigenvectors(&spec, &p, &zp, Side::Right).unwrap();
    assert!(oracle::subspace_distance(&x, &rec.transfer, &tol) <= tol.subspace_angle);
}
