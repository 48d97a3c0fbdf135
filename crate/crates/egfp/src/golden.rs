//! Reference pencils transcribed as text grids, and the parser for that format.
//!
//! ```text
//! # comment
//! m: 5
//! q: 1,-1,1,-1,1      optional block signs of a left multiplier
//! state: 1            optional trailing state blocks
//! pencil:             rows of `&`-separated entries; `lam` marks the λ terms
//! ...
//! ```
//!
//! Instead of `pencil:` a file may give `l1:` followed by `l0:` (the pencil is
//! `λ L1 - L0`) or by `l0+:` (the pencil is `λ L1 + L0'`).

use thiserror::Error;

use crate::blockmat::{AssignedBlock, MatrixAssignment};
use crate::blockmat::{BlockDim, BlockMatrix};
use crate::expr::{Expr, ExprParseError, Sym, VarId};
use crate::pencils::{self, BlockPencil, Decoration, EgfpSpec};
use crate::tuples::IndexTuple;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GoldenError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("line {line}: {source}")]
    Entry { line: usize, source: ExprParseError },
    #[error("missing {0}")]
    Missing(&'static str),
    #[error("grid is {rows}x{cols}, expected {expected}x{expected}")]
    Shape { rows: usize, cols: usize, expected: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldenPencil {
    pub m: u32,
    pub q: Option<Vec<i64>>,
    pub state_blocks: usize,
    /// `λ L1 - L0` exactly as displayed, so already multiplied by `q` if present.
    pub pencil: BlockPencil,
}

const LAMBDA: &str = "lam";

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Header,
    Pencil,
    L1,
    L0,
    L0Plus,
}

pub fn parse(text: &str) -> Result<GoldenPencil, GoldenError> {
    let mut m = None;
    let mut q = None;
    let mut state_blocks = 0usize;
    let mut section = Section::Header;
    let mut grids: [Vec<(usize, Vec<&str>)>; 4] = Default::default();
    let mut plus_form = false;

    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let syntax = |reason: &str| GoldenError::Syntax { line: line_no, reason: reason.to_string() };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line {
            "pencil:" => {
                section = Section::Pencil;
                continue;
            }
            "l1:" => {
                section = Section::L1;
                continue;
            }
            "l0:" => {
                section = Section::L0;
                continue;
            }
            "l0+:" => {
                section = Section::L0Plus;
                plus_form = true;
                continue;
            }
            _ => {}
        }
        if section == Section::Header {
            let (key, value) = line.split_once(':').ok_or_else(|| syntax("expected `key: value`"))?;
            let value = value.trim();
            match key.trim() {
                "m" => {
                    let d = value.parse::<u32>().map_err(|_| syntax("bad degree"))?;
                    if d > crate::io::MAX_DEGREE {
                        return Err(syntax("degree too large"));
                    }
                    m = Some(d);
                }
                "q" => {
                    let signs = value
                        .split(',')
                        .map(|s| match s.trim() {
                            "1" | "+1" => Ok(1),
                            "-1" => Ok(-1),
                            _ => Err(syntax("q entries must be 1 or -1")),
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    q = Some(signs);
                }
                // A bordered pencil has exactly one state block.
                "state" => {
                    state_blocks = match value {
                        "0" => 0,
                        "1" => 1,
                        _ => return Err(syntax("state block count must be 0 or 1")),
                    }
                }
                _ => return Err(syntax("unknown header key")),
            }
            continue;
        }
        let slot = match section {
            Section::Pencil => 0,
            Section::L1 => 1,
            Section::L0 => 2,
            Section::L0Plus => 3,
            Section::Header => unreachable!(),
        };
        grids[slot].push((line_no, line.split('&').map(str::trim).collect()));
    }
    let m = m.ok_or(GoldenError::Missing("degree `m:`"))?;
    let order = m as usize + state_blocks;
    let mut dims = vec![BlockDim::Poly; m as usize];
    dims.extend(std::iter::repeat_n(BlockDim::State, state_blocks));

    let parse_grid = |rows: &[(usize, Vec<&str>)]| -> Result<Vec<(usize, Expr)>, GoldenError> {
        let cols = rows.iter().map(|(_, r)| r.len()).find(|&c| c != order).unwrap_or(order);
        if rows.len() != order || cols != order {
            return Err(GoldenError::Shape { rows: rows.len(), cols, expected: order });
        }
        let mut out = Vec::with_capacity(order * order);
        for (line, row) in rows {
            for entry in row {
                let e = entry.parse::<Expr>().map_err(|source| GoldenError::Entry { line: *line, source })?;
                out.push((*line, e));
            }
        }
        Ok(out)
    };

    let (l1_blocks, l0_blocks) = if !grids[0].is_empty() {
        let lam = Sym::Var(VarId::named(LAMBDA));
        let mut l1 = Vec::new();
        let mut l0 = Vec::new();
        for (line, e) in parse_grid(&grids[0])? {
            let mut a = Expr::zero();
            let mut b = Expr::zero();
            for (word, c) in e.terms() {
                if word.contains(&lam.inverse()) {
                    return Err(GoldenError::Syntax { line, reason: "entry is not linear in lam".into() });
                }
                match word.iter().position(|s| *s == lam) {
                    Some(p) => {
                        let mut rest = word.clone();
                        rest.remove(p);
                        if rest.contains(&lam) {
                            return Err(GoldenError::Syntax { line, reason: "entry is not linear in lam".into() });
                        }
                        a = &a + &Expr::monomial(c, rest);
                    }
                    None => b = &b - &Expr::monomial(c, word.clone()),
                }
            }
            l1.push(a);
            l0.push(b);
        }
        (l1, l0)
    } else {
        let l1 = parse_grid(&grids[1])?.into_iter().map(|(_, e)| e).collect();
        let l0_rows = if plus_form { &grids[3] } else { &grids[2] };
        if l0_rows.is_empty() {
            return Err(GoldenError::Missing("`pencil:` or `l1:`/`l0:` sections"));
        }
        let factor = Expr::scalar(if plus_form { -1 } else { 1 });
        let l0 = parse_grid(l0_rows)?.into_iter().map(|(_, e)| &e * &factor).collect();
        (l1, l0)
    };

    let build = |blocks| BlockMatrix::from_blocks(dims.clone(), blocks).map_err(|e| GoldenError::Syntax { line: 0, reason: e.to_string() });
    if let Some(signs) = &q {
        if signs.len() != order {
            return Err(GoldenError::Shape { rows: signs.len(), cols: 1, expected: order });
        }
    }
    Ok(GoldenPencil { m, q, state_blocks, pencil: BlockPencil { l1: build(l1_blocks)?, l0: build(l0_blocks)? } })
}

macro_rules! golden_files {
    ($($name:literal),* $(,)?) => {
        /// Embedded reference pencils by name.
        pub const FILES: &[(&str, &str)] = &[
            $(($name, include_str!(concat!("../golden/", $name, ".txt")))),*
        ];
    };
}

golden_files!(
    "degree3_not_operation_free",
    "degree5_decorated",
    "degree5_infinite",
    "degree5_rational",
    "degree5_skew",
    "degree5_t_even",
    "degree5_t_odd",
    "degree5_trailing_inverse",
    "degree6_symmetric",
    "degree6_two_free",
    "degree7_palindromic",
    "degree8_symmetric_penta",
);

/// The EGFP a reference pencil was generated from, for the polynomial part.
pub fn generating_spec(name: &str) -> Option<EgfpSpec> {
    let t = |s: &str| s.parse::<IndexTuple>().expect("well-formed tuple");
    let named = |tuple: &str, x: &str| MatrixAssignment::new(t(tuple), vec![AssignedBlock::Named(x.into())]).expect("lengths match");
    let fixed_x = AssignedBlock::Fixed(-Expr::coef(3));
    Some(match name {
        "degree3_not_operation_free" => {
            EgfpSpec::core(3, t("(3)"), t("(-2,-1,-0)")).with(Decoration::RightTau, MatrixAssignment::trivial(t("(-2)")))
        }
        "degree5_decorated" => pencils::degree_five_example(AssignedBlock::Named("X".into())),
        "degree5_infinite" => EgfpSpec::core(5, t("(0,2)"), t("(-4,-5,-3,-1)")).with(Decoration::RightTau, named("(-4)", "X")),
        "degree5_rational" => {
            EgfpSpec::core(5, t("(4,1,2,0)"), t("(-5,-3)")).with(Decoration::RightSigma, MatrixAssignment::trivial(t("(1)")))
        }
        "degree5_skew" => pencils::degree_five_example(AssignedBlock::Trivial),
        "degree5_t_even" | "degree5_t_odd" => pencils::degree_five_example(fixed_x),
        "degree5_trailing_inverse" => EgfpSpec::core(5, t("(4,2,3)"), t("(-5,-1,-0)")).with(Decoration::RightSigma, named("(2)", "X")),
        "degree6_symmetric" => pencils::degree_six_symmetric(),
        "degree6_two_free" => EgfpSpec::core(6, t("(1,2,5)"), t("(-6,-3,-4,-0)"))
            .with(Decoration::LeftTau, named("(-4)", "X"))
            .with(Decoration::RightSigma, named("(1)", "Y")),
        "degree8_symmetric_penta" => pencils::degree_eight_symmetric_penta("X"),
        _ => return None,
    })
}

/// `(part, row, col, expected, found)` for every block where the pencils differ.
pub fn differing_blocks(found: &BlockPencil, expected: &BlockPencil) -> Vec<(&'static str, usize, usize, String, String)> {
    let mut out = Vec::new();
    for (part, a, b) in [("L1", &found.l1, &expected.l1), ("L0", &found.l0, &expected.l0)] {
        if a.order() != b.order() {
            out.push((part, a.order(), b.order(), "order".into(), "order".into()));
            continue;
        }
        for i in 0..a.order() {
            for j in 0..a.order() {
                if a.get(i, j) != b.get(i, j) {
                    out.push((part, i, j, b.get(i, j).to_string(), a.get(i, j).to_string()));
                }
            }
        }
    }
    out
}

pub fn load(name: &str) -> Option<GoldenPencil> {
    FILES.iter().find(|(n, _)| *n == name).map(|(_, text)| parse(text).expect("embedded reference pencils parse"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_embedded_file_parses() {
        for (name, text) in FILES {
            let g = parse(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(g.pencil.l1.order(), g.m as usize + g.state_blocks);
        }
    }

    #[test]
    fn generated_pencils_match_references() {
        for (name, _) in FILES {
            let Some(spec) = generating_spec(name) else { continue };
            let g = load(name).unwrap();
            if g.state_blocks > 0 {
                continue;
            }
            let built = pencils::build(&spec).unwrap();
            let built = match &g.q {
                Some(q) => built.map(|b| b.scale_rows(q)),
                None => built,
            };
            let diffs = differing_blocks(&built, &g.pencil);
            assert!(diffs.is_empty(), "{name}: {diffs:?}");
        }
    }

    #[test]
    fn lam_splits_terms() {
        let g = parse("m: 2\npencil:\nlam*A2 + A1 & -I\n-I & lam*I + 2*A0").unwrap();
        assert_eq!(g.pencil.l1.get(0, 0), &Expr::coef(2));
        assert_eq!(g.pencil.l0.get(0, 0), &-Expr::coef(1));
        assert_eq!(g.pencil.l0.get(1, 0), &Expr::identity());
        assert_eq!(g.pencil.l0.get(1, 1), &(&Expr::coef(0) * &Expr::scalar(-2)));
    }

    #[test]
    fn malformed_inputs_are_errors() {
        assert!(matches!(parse("pencil:\n0"), Err(GoldenError::Missing(_))));
        assert!(matches!(parse("m: 2\npencil:\n0 & 0"), Err(GoldenError::Shape { .. })));
        assert!(matches!(parse("m: 2\npencil:\nlam*lam & 0\n0 & 0"), Err(GoldenError::Syntax { .. })));
        assert!(matches!(parse("m: 2\nfoo: 1"), Err(GoldenError::Syntax { .. })));
    }
}
