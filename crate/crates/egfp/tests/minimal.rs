use egfp::blockmat::{Bindings, MatrixPolynomial};
use egfp::oracle::{self, PolyMatrix, Side, Tolerances};
use egfp::pencils::{self, EgfpSpec};
use egfp::recovery;
use egfp::sample::{self, SampleRng};
use egfp::tuples::SignedIndex;
use num_complex::Complex64;

fn gfpr_shaped(m: u32, rng: &mut SampleRng) -> EgfpSpec {
    loop {
        let s = sample::spec(m, 2, rng);
        if s.sigma.contains(SignedIndex::plus(0)) && s.tau.contains(SignedIndex::minus(m)) {
            return s;
        }
    }
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

struct Case {
    p: MatrixPolynomial,
    right: Vec<usize>,
    left: Vec<usize>,
}

fn case(k: usize, rng: &mut SampleRng) -> Case {
    const SHAPES: [(&[usize], &[usize]); 5] = [(&[0], &[0]), (&[1], &[0]), (&[0], &[2]), (&[1], &[1]), (&[2, 0], &[0, 1])];
    let (right, left) = SHAPES[k % SHAPES.len()];
    let m = 2 + (k % 3) as u32;
    let p = sample::singular_polynomial(m, right, left, 1, rng);
    Case { p, right: sorted(right.to_vec()), left: sorted(left.to_vec()) }
}

#[test]
fn convolution_oracle_reads_constructed_indices() {
    let tol = Tolerances::default();
    let mut rng = sample::rng(11);
    for k in 0..10 {
        let c = case(k, &mut rng);
        let poly = PolyMatrix::from_polynomial(&c.p);
        assert_eq!(sorted(oracle::minimal_indices(&poly, Side::Right, &tol)), c.right);
        assert_eq!(sorted(oracle::minimal_indices(&poly, Side::Left, &tol)), c.left);
    }
}

#[test]
fn shifted_pencil_indices_match_construction() {
    let tol = Tolerances::default();
    let mut rng = sample::rng(12);
    for k in 0..20 {
        let c = case(k, &mut rng);
        let (m, n) = (c.p.degree(), c.p.size());
        let spec = gfpr_shaped(m, &mut rng);
        let mut bindings = Bindings::new(&c.p);
        sample::bind_integer_decorations(&spec, &mut bindings, n, &mut rng);
        let l = pencils::build_dense(&spec, &bindings, n).unwrap();
        let shift = recovery::minimal_index_shift(&spec).unwrap();
        for (side, truth) in [(Side::Right, &c.right), (Side::Left, &c.left)] {
            let of_l = oracle::minimal_indices_pencil(&l.l0, &l.l1, side, &tol);
            assert_eq!(&sorted(shift.apply(&of_l, side)), truth, "{side:?} {spec:?}");
        }
    }
}

#[test]
fn recovered_minimal_bases_annihilate_p() {
    let tol = Tolerances::default();
    let mut rng = sample::rng(13);
    let probe = Complex64::new(0.3, -0.7);
    for k in 0..10 {
        let c = case(k, &mut rng);
        let (m, n) = (c.p.degree(), c.p.size());
        let spec = gfpr_shaped(m, &mut rng);
        let mut bindings = Bindings::new(&c.p);
        sample::bind_integer_decorations(&spec, &mut bindings, n, &mut rng);
        let l = pencils::build_dense(&spec, &bindings, n).unwrap();
        for (side, truth) in [(Side::Right, &c.right), (Side::Left, &c.left)] {
            let z = oracle::minimal_basis(&PolyMatrix::pencil(&l.l0, &l.l1), side, &tol);
            let x = recovery::recover_minimal_bases(&spec, n, &z, side).unwrap();
            let degrees = sorted(x.iter().map(|v| v.degree()).collect());
            assert_eq!(&degrees, truth, "{side:?} {spec:?}");
            let pm = match side {
                Side::Right => c.p.eval(probe),
                Side::Left => c.p.eval(probe).transpose(),
            };
            for v in &x {
                let xv = v.eval(probe);
                assert!((&pm * &xv).norm() <= 1e-10 * c.p.frobenius_norm() * xv.norm());
            }
        }
    }
}

#[test]
fn zero_block_kernel_is_the_last_unit_vector() {
    let tol = Tolerances::default();
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let coeffs = (0..=3).map(|j| nalgebra::DMatrix::from_row_slice(2, 2, &[Complex64::new(j as f64 + 1.0, 0.0), z, z, z])).collect();
    let p = MatrixPolynomial::new(coeffs).unwrap();
    let spec = EgfpSpec::core(3, "(0,1)".parse().unwrap(), "(-3,-2)".parse().unwrap());
    let l = pencils::build_dense(&spec, &Bindings::new(&p), 2).unwrap();
    let basis = oracle::minimal_basis(&PolyMatrix::pencil(&l.l0, &l.l1), Side::Right, &tol);
    let x = recovery::recover_minimal_bases(&spec, 2, &basis, Side::Right).unwrap();
    assert_eq!(x.len(), 1);
    assert_eq!(x[0].degree(), 0);
    let v = &x[0].0[0];
    assert!(v[0].norm() < 1e-14 && (v[1].norm() - one.norm()).abs() < 1e-14);
}
