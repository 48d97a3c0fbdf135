//! Invariants checked over random inputs.

use egfp::blockmat::{dense_elementary, Bindings, BlockMatrix};
use egfp::expr::{Expr, Sym};
use egfp::io::{self, RealizationDoc};
use egfp::oracle::{self, Tolerances};
use egfp::pencils::{self, BandClass, BandPrediction};
use egfp::sample;
use egfp::tuples::{IndexTuple, SignedIndex, StandardForm};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn signed_index() -> impl Strategy<Value = SignedIndex> {
    (any::<bool>(), 0u32..50).prop_map(|(minus, k)| if minus { SignedIndex::minus(k) } else { SignedIndex::plus(k) })
}

/// Nonnegative tuples over `{0:4}` satisfying the SIP.
fn sip_tuple() -> impl Strategy<Value = IndexTuple> {
    prop::collection::vec(0u32..5, 0..8)
        .prop_map(|v| IndexTuple::nonnegative(&v))
        .prop_filter("SIP", |t| t.satisfies_sip().unwrap_or(false))
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        Just(Expr::identity()),
        Just(Expr::zero()),
        (0u32..6).prop_map(Expr::coef),
        (0u32..6).prop_map(|j| Expr::sym(Sym::CoefInv(j))),
        prop::sample::select(vec!["X", "Y2", "W_1"]).prop_map(Expr::var),
        (-3i64..=3).prop_map(Expr::scalar),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), inner).prop_map(|(a, b)| a - b),
        ]
    })
}

fn complex_matrix(max: usize) -> impl Strategy<Value = DMatrix<Complex64>> {
    (0..=max, 0..=max, any::<u64>()).prop_map(|(r, c, seed)| {
        let mut rng = sample::rng(seed);
        let mut m = sample::complex_matrix(r, c, &mut rng);
        // Exact zeros must survive the sparse writer.
        if r > 0 && c > 0 {
            m[(0, 0)] = Complex64::new(0.0, 0.0);
        }
        m
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn signed_index_text_round_trip(i in signed_index()) {
        prop_assert_eq!(i.to_string().parse::<SignedIndex>().unwrap(), i);
        let json = serde_json::to_string(&i).unwrap();
        prop_assert_eq!(serde_json::from_str::<SignedIndex>(&json).unwrap(), i);
    }

    #[test]
    fn tuple_text_round_trip(v in prop::collection::vec(signed_index(), 0..10)) {
        let t = IndexTuple::new(v);
        prop_assert_eq!(t.to_string().parse::<IndexTuple>().unwrap(), t.clone());
        prop_assert_eq!(serde_json::from_str::<IndexTuple>(&serde_json::to_string(&t).unwrap()).unwrap(), t);
    }

    #[test]
    fn standard_forms_are_canonical(t in sip_tuple()) {
        let csf = t.standard_form(StandardForm::Column).unwrap();
        let rsf = t.standard_form(StandardForm::Row).unwrap();
        prop_assert_eq!(csf.standard_form(StandardForm::Column).unwrap(), csf.clone());
        prop_assert_eq!(rsf.standard_form(StandardForm::Column).unwrap(), csf.clone());
        prop_assert!(t.is_equivalent(&rsf).unwrap());
        prop_assert!(csf.satisfies_sip().unwrap());
        prop_assert_eq!(csf.len(), t.len());
        // Totals are only defined for permutations.
        if let Ok(c) = t.total_consecutions() {
            prop_assert_eq!(csf.total_consecutions().unwrap(), c);
            prop_assert_eq!(csf.total_inversions().unwrap(), t.total_inversions().unwrap());
        }
    }

    #[test]
    fn equivalent_tuples_have_equal_products(t in sip_tuple()) {
        let csf = t.standard_form(StandardForm::Column).unwrap();
        prop_assert_eq!(BlockMatrix::fiedler_product(&t, 5).unwrap(), BlockMatrix::fiedler_product(&csf, 5).unwrap());
    }

    #[test]
    fn expr_text_round_trip(e in expr()) {
        prop_assert_eq!(e.to_string().parse::<Expr>().unwrap(), e);
    }

    #[test]
    fn expr_parser_is_total(s in "\\PC{0,40}") {
        let _ = s.parse::<Expr>();
        let _ = s.parse::<IndexTuple>();
    }

    #[test]
    fn monomial_inverse(j in 0u32..6, name in prop::sample::select(vec!["X", "Y"])) {
        for e in [Expr::coef(j) * Expr::var(name), -Expr::var(name), Expr::sym(Sym::CoefInv(j))] {
            let inv = e.inverse().expect("monomials are invertible");
            prop_assert_eq!(&inv * &e, Expr::identity());
            prop_assert_eq!(&e * &inv, Expr::identity());
        }
    }

    #[test]
    fn symbolic_elementary_matches_dense(m in 2u32..6, k in 0u32..6, minus in any::<bool>(), n in 1usize..3, seed in any::<u64>()) {
        prop_assume!(k <= m);
        let index = if minus { SignedIndex::minus(k) } else { SignedIndex::plus(k) };
        let w = sample::well_conditioned(n, &mut sample::rng(seed));
        let symbolic = BlockMatrix::elementary(index, &Expr::var("W"), m).unwrap();
        let bindings = Bindings::without_polynomial().with("W", w.clone());
        let dense = symbolic.realize(&bindings, n, 0).unwrap();
        prop_assert_eq!(dense, dense_elementary(index, &w, m).unwrap());
    }

    #[test]
    fn matrix_market_round_trip(m in complex_matrix(6)) {
        let back = io::read_matrix_market(&io::write_matrix_market(&m, "property")).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn matrix_market_reader_is_total(s in "(%%MatrixMarket matrix (coordinate|array) (real|complex|integer) (general|symmetric)\n)?[0-9 .e\\-\n]{0,60}") {
        let _ = io::read_matrix_market(&s);
    }

    #[test]
    fn realization_json_round_trip(m in 2u32..5, n in 1usize..3, r in 0usize..3, seed in any::<u64>()) {
        let mut rng = sample::rng(seed);
        let real = sample::realization(sample::polynomial(m, n, &mut rng), r, &mut rng);
        let text = io::realization_to_json(&real);
        let back = io::realization_from_json(&text).unwrap();
        prop_assert_eq!(io::realization_to_json(&back), text);
        prop_assert_eq!(RealizationDoc::from_realization(&back).size(), n);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sampled_specs_validate_and_round_trip(m in 2u32..6, cap in 0usize..3, seed in any::<u64>()) {
        let spec = sample::spec(m, cap, &mut sample::rng(seed));
        prop_assert!(spec.validate().is_valid(), "{:?}", spec);
        prop_assert_eq!(io::spec_from_json(&io::spec_to_json(&spec)).unwrap(), spec.clone());
        let pencil = pencils::build(&spec).unwrap();
        if let BandPrediction::Class(c) = pencils::predict_bandwidth(&spec) {
            prop_assert_eq!(BandClass::of_bandwidth(pencil.bandwidth()), c);
        }
        if spec.operation_free_hypothesis() {
            prop_assert!(pencil.is_operation_free());
        }
    }

    #[test]
    fn pencils_share_the_companion_spectrum(m in 2u32..5, n in 1usize..3, seed in any::<u64>()) {
        let tol = Tolerances::default();
        let mut rng = sample::rng(seed);
        let spec = sample::spec(m, 2, &mut rng);
        let p = sample::polynomial(m, n, &mut rng);
        let mut bindings = Bindings::new(&p);
        sample::bind_decorations(&spec, &mut bindings, n, &mut rng);
        let l = pencils::build_dense(&spec, &bindings, n).unwrap();
        let eigs = oracle::generalized_eigs(&l.l0, &l.l1, &tol).unwrap();
        let reference = oracle::companion_eigs(&p, &tol).unwrap();
        prop_assert_eq!(eigs.finite.len(), reference.finite.len());
        let checked: Vec<Complex64> = reference
            .finite
            .iter()
            .copied()
            .filter(|&mu| oracle::eigenvalue_condition(&p, mu) <= tol.max_condition)
            .collect();
        prop_assert!(oracle::worst_nearest(&eigs.finite, &checked) <= tol.eigenvalue);
    }
}
