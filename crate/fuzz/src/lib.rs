//! Checks shared by the fuzz targets and the corpus replay test in the main
//! workspace. Each one takes raw bytes, must never panic on malformed input,
//! and asserts a round trip whenever the input parses.

use egfp::expr::Expr;
use egfp::io::{self, PencilExport};
use egfp::oracle::Tolerances;
use egfp::pencils;
use egfp::tuples::{IndexTuple, SignedIndex};

/// Largest degree worth building symbolically inside a fuzz iteration.
const MAX_BUILD_DEGREE: u32 = 8;
/// Longest decoration chain worth building.
const MAX_BUILD_CHAIN: usize = 24;

fn text(data: &[u8]) -> Option<&str> {
    std::str::from_utf8(data).ok()
}

pub fn spec_json(data: &[u8]) {
    let Some(s) = text(data) else { return };
    let Ok(spec) = io::spec_from_json(s) else { return };
    let again = io::spec_from_json(&io::spec_to_json(&spec)).expect("printed specs parse");
    assert_eq!(again, spec);
    let report = spec.validate();
    let small = spec.m <= MAX_BUILD_DEGREE && spec.sigma_chain().len() + spec.tau_chain().len() <= MAX_BUILD_CHAIN;
    if report.is_valid() && small {
        let pencil = pencils::build(&spec).expect("valid specs build");
        assert_eq!(pencil.l1.poly_blocks(), spec.m as usize);
    }
}

pub fn realization_json(data: &[u8]) {
    let Some(s) = text(data) else { return };
    let Ok(real) = io::realization_from_json(s) else { return };
    let printed = io::realization_to_json(&real);
    let again = io::realization_from_json(&printed).expect("printed realizations parse");
    assert_eq!(io::realization_to_json(&again), printed);
}

pub fn matrix_market(data: &[u8]) {
    let Some(s) = text(data) else { return };
    let Ok(m) = io::read_matrix_market(s) else { return };
    // NaN never compares equal, so only finite matrices are round-tripped.
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        let again = io::read_matrix_market(&io::write_matrix_market(&m, "fuzz")).expect("printed matrices parse");
        assert_eq!(again, m);
    }
}

/// Input is `L1 \0 L0 \0 tags`.
pub fn pencil_import(data: &[u8]) {
    let Some(s) = text(data) else { return };
    let parts: Vec<&str> = s.splitn(3, '\0').collect();
    let [l1, l0, tags] = parts[..] else { return };
    let Ok(export) = PencilExport::from_texts(l1, l0, tags) else { return };
    let d = export.tags.dim();
    assert_eq!(export.dense.l1.shape(), (d, d));
    assert_eq!(export.dense.l0.shape(), (d, d));
}

pub fn golden_text(data: &[u8]) {
    let Some(s) = text(data) else { return };
    if let Ok(g) = egfp::golden::parse(s) {
        assert_eq!(g.pencil.l1.order(), g.pencil.l0.order());
    }
}

pub fn block_expr(data: &[u8]) {
    let Some(s) = text(data) else { return };
    if let Ok(e) = s.parse::<Expr>() {
        assert_eq!(e.to_string().parse::<Expr>().expect("printed expressions parse"), e);
    }
    if let Ok(t) = s.parse::<IndexTuple>() {
        assert_eq!(t.to_string().parse::<IndexTuple>().expect("printed tuples parse"), t);
        let _ = t.satisfies_sip();
    }
    if let Ok(i) = s.parse::<SignedIndex>() {
        assert_eq!(i.to_string().parse::<SignedIndex>().expect("printed indices parse"), i);
    }
}

pub fn tolerances(data: &[u8]) {
    let Some(s) = text(data) else { return };
    if let Ok(t) = Tolerances::from_json(s) {
        let printed = serde_json::to_string(&t).expect("tolerances serialize");
        // Non-finite values print as null and cannot come back.
        if let Ok(again) = Tolerances::from_json(&printed) {
            assert_eq!(again, t);
        }
    }
}
