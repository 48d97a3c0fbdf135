//! Noncommutative integer polynomials in the coefficient and assignment symbols.
//!
//! Every block of a symbolic pencil is an [`Expr`]. Words are reduced so that a
//! symbol is never adjacent to its own inverse.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use thiserror::Error;

/// Interned name of a free (assigned or realization) matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(u32);

fn interner() -> &'static Mutex<Vec<String>> {
    static NAMES: OnceLock<Mutex<Vec<String>>> = OnceLock::new();
    NAMES.get_or_init(|| Mutex::new(Vec::new()))
}

impl VarId {
    pub fn named(name: &str) -> Self {
        let mut names = interner().lock().expect("interner poisoned");
        if let Some(i) = names.iter().position(|n| n == name) {
            return VarId(i as u32);
        }
        names.push(name.to_string());
        VarId(names.len() as u32 - 1)
    }

    pub fn name(self) -> String {
        interner().lock().expect("interner poisoned")[self.0 as usize].clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sym {
    /// Coefficient `A_j` of the matrix polynomial.
    Coef(u32),
    CoefInv(u32),
    Var(VarId),
    VarInv(VarId),
}

impl Sym {
    pub fn inverse(self) -> Self {
        match self {
            Sym::Coef(j) => Sym::CoefInv(j),
            Sym::CoefInv(j) => Sym::Coef(j),
            Sym::Var(v) => Sym::VarInv(v),
            Sym::VarInv(v) => Sym::Var(v),
        }
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sym::Coef(j) => write!(f, "A{j}"),
            Sym::CoefInv(j) => write!(f, "A{j}^-1"),
            Sym::Var(v) => write!(f, "{}", v.name()),
            Sym::VarInv(v) => write!(f, "{}^-1", v.name()),
        }
    }
}

pub type Word = Vec<Sym>;

/// Finite sum `Σ c_w · w` over reduced words `w`; the empty word is the identity.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Expr {
    terms: BTreeMap<Word, i64>,
}

/// Single-symbol classification of a block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tag {
    Zero,
    Identity { negative: bool },
    Coef { index: u32, negative: bool },
    CoefInv { index: u32, negative: bool },
    Assigned { var: VarId, negative: bool },
    AssignedInv { var: VarId, negative: bool },
    Compound,
}

impl Tag {
    /// Blocks allowed in an operation-free pencil.
    pub fn is_elementary(&self) -> bool {
        !matches!(self, Tag::Compound | Tag::AssignedInv { .. })
    }
}

impl Expr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity() -> Self {
        Self::scalar(1)
    }

    pub fn scalar(c: i64) -> Self {
        Self::monomial(c, Vec::new())
    }

    pub fn sym(s: Sym) -> Self {
        Self::monomial(1, vec![s])
    }

    pub fn coef(j: u32) -> Self {
        Self::sym(Sym::Coef(j))
    }

    pub fn var(name: &str) -> Self {
        Self::sym(Sym::Var(VarId::named(name)))
    }

    pub fn monomial(c: i64, word: Word) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0 {
            terms.insert(reduce(word), c);
        }
        Self { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, i64)> {
        self.terms.iter().map(|(w, &c)| (w, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn symbols(&self) -> impl Iterator<Item = Sym> + '_ {
        self.terms.keys().flat_map(|w| w.iter().copied())
    }

    /// Inverse of a signed single word `±w`; `None` for sums.
    pub fn inverse(&self) -> Option<Self> {
        if self.terms.len() != 1 {
            return None;
        }
        let (w, &c) = self.terms.iter().next()?;
        if c.abs() != 1 {
            return None;
        }
        Some(Self::monomial(c, w.iter().rev().map(|s| s.inverse()).collect()))
    }

    /// Blockwise transpose under a rule giving `s^T` for each symbol.
    pub fn transpose_with(&self, rule: &impl Fn(Sym) -> Expr) -> Self {
        let mut out = Expr::zero();
        for (w, c) in self.terms() {
            let mut t = Expr::scalar(c);
            for s in w.iter().rev() {
                t = &t * &rule(*s);
            }
            out = &out + &t;
        }
        out
    }

    /// Replaces every symbol by an expression.
    pub fn substitute(&self, rule: &impl Fn(Sym) -> Expr) -> Self {
        let mut out = Expr::zero();
        for (w, c) in self.terms() {
            let mut t = Expr::scalar(c);
            for s in w {
                t = &t * &rule(*s);
            }
            out = &out + &t;
        }
        out
    }

    pub fn tag(&self) -> Tag {
        let mut it = self.terms.iter();
        let Some((w, &c)) = it.next() else { return Tag::Zero };
        if it.next().is_some() || c.abs() != 1 {
            return Tag::Compound;
        }
        let negative = c < 0;
        match w.as_slice() {
            [] => Tag::Identity { negative },
            [Sym::Coef(index)] => Tag::Coef { index: *index, negative },
            [Sym::CoefInv(index)] => Tag::CoefInv { index: *index, negative },
            [Sym::Var(var)] => Tag::Assigned { var: *var, negative },
            [Sym::VarInv(var)] => Tag::AssignedInv { var: *var, negative },
            _ => Tag::Compound,
        }
    }

    fn add_term(&mut self, w: &[Sym], c: i64) {
        if c == 0 {
            return;
        }
        let slot = self.terms.entry(w.to_vec()).or_insert(0);
        *slot += c;
        if *slot == 0 {
            self.terms.remove(w);
        }
    }
}

/// Cancels adjacent `s · s^{-1}` pairs.
fn reduce(word: Word) -> Word {
    let mut out: Word = Vec::with_capacity(word.len());
    for s in word {
        if out.last().is_some_and(|&l| l == s.inverse()) {
            out.pop();
        } else {
            out.push(s);
        }
    }
    out
}

fn concat(a: &[Sym], b: &[Sym]) -> Word {
    let mut out: Word = a.to_vec();
    for &s in b {
        if out.last().is_some_and(|&l| l == s.inverse()) {
            out.pop();
        } else {
            out.push(s);
        }
    }
    out
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        let mut out = self.clone();
        for (w, c) in rhs.terms() {
            out.add_term(w, c);
        }
        out
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        let mut out = self.clone();
        for (w, c) in rhs.terms() {
            out.add_term(w, -c);
        }
        out
    }
}

impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        let mut out = Expr::zero();
        for (a, ca) in self.terms() {
            for (b, cb) in rhs.terms() {
                out.add_term(&concat(a, b), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr { terms: self.terms.iter().map(|(w, &c)| (w.clone(), -c)).collect() }
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        &self + &rhs
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        &self - &rhs
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        &self * &rhs
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (w, &c)) in self.terms.iter().enumerate() {
            let mag = c.unsigned_abs();
            match (i, c < 0) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if w.is_empty() {
                if mag == 1 {
                    f.write_str("I")?;
                } else {
                    write!(f, "{mag}*I")?;
                }
                continue;
            }
            if mag != 1 {
                write!(f, "{mag}*")?;
            }
            for (k, s) in w.iter().enumerate() {
                if k > 0 {
                    f.write_str("*")?;
                }
                write!(f, "{s}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse block expression {input:?}: {reason}")]
pub struct ExprParseError {
    pub input: String,
    pub reason: &'static str,
}

/// Bound on parsed integer coefficients, so that sums of parsed terms cannot overflow.
const MAX_PARSED_COEFFICIENT: u64 = 1 << 31;

impl FromStr for Expr {
    type Err = ExprParseError;

    /// Grammar: signed terms joined by `+`/`-`; a term is an optional integer
    /// followed by `*`-separated factors `I`, `A<j>`, `A<j>^-1`, `<name>`, `<name>^-1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason| ExprParseError { input: s.to_string(), reason };
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() || compact == "0" {
            return Ok(Expr::zero());
        }
        let mut out = Expr::zero();
        let bytes = compact.as_bytes();
        let mut start = 0;
        let mut pieces = Vec::new();
        for i in 1..=bytes.len() {
            let boundary = i == bytes.len() || ((bytes[i] == b'+' || bytes[i] == b'-') && bytes[i - 1] != b'^');
            if boundary {
                pieces.push(&compact[start..i]);
                start = i;
            }
        }
        for piece in pieces {
            let (sign, body) = match piece.as_bytes()[0] {
                b'-' => (-1, &piece[1..]),
                b'+' => (1, &piece[1..]),
                _ => (1, piece),
            };
            if body.is_empty() {
                return Err(err("dangling sign"));
            }
            let mut coeff = sign;
            let mut word = Vec::new();
            for (k, factor) in body.split('*').enumerate() {
                if factor.is_empty() {
                    return Err(err("empty factor"));
                }
                if k == 0 {
                    if let Ok(v) = factor.parse::<i64>() {
                        if v.unsigned_abs() > MAX_PARSED_COEFFICIENT {
                            return Err(err("coefficient too large"));
                        }
                        coeff *= v;
                        continue;
                    }
                }
                let (base, inv) = match factor.strip_suffix("^-1") {
                    Some(b) => (b, true),
                    None => (factor, false),
                };
                if base == "I" {
                    if inv {
                        return Err(err("inverse of identity"));
                    }
                    continue;
                }
                let sym = match base.strip_prefix('A').map(str::parse::<u32>) {
                    Some(Ok(j)) => Sym::Coef(j),
                    // A leading digit would read back as a coefficient.
                    _ if !base.starts_with(|c: char| c.is_ascii_digit())
                        && base.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '[' || c == ']') =>
                    {
                        Sym::Var(VarId::named(base))
                    }
                    _ => return Err(err("unrecognized factor")),
                };
                word.push(if inv { sym.inverse() } else { sym });
            }
            out = &out + &Expr::monomial(coeff, word);
        }
        // Collected terms must print back as parseable coefficients.
        if out.terms().any(|(_, c)| c.unsigned_abs() > MAX_PARSED_COEFFICIENT) {
            return Err(err("coefficient too large"));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> Expr {
        s.parse().unwrap()
    }

    #[test]
    fn inverse_cancels_adjacent() {
        let a = e("A0");
        let inv = a.inverse().unwrap();
        assert_eq!(&a * &inv, Expr::identity());
        assert_eq!(e("-A2*A0^-1").inverse().unwrap(), e("-A0*A2^-1"));
        assert!(e("A1 + A2").inverse().is_none());
    }

    #[test]
    fn tags() {
        assert_eq!(e("0").tag(), Tag::Zero);
        assert_eq!(e("-I").tag(), Tag::Identity { negative: true });
        assert_eq!(e("A3").tag(), Tag::Coef { index: 3, negative: false });
        assert_eq!(e("-A0^-1").tag(), Tag::CoefInv { index: 0, negative: true });
        assert_eq!(e("X").tag(), Tag::Assigned { var: VarId::named("X"), negative: false });
        assert_eq!(e("A2*A0^-1").tag(), Tag::Compound);
        assert_eq!(e("2*A1").tag(), Tag::Compound);
    }

    #[test]
    fn display_parse_round_trip() {
        for s in ["0", "I", "-I", "A3 - A4", "-A2*A0^-1", "X - 2*A1*Y^-1 + I"] {
            let x = e(s);
            assert_eq!(e(&x.to_string()), x, "{s}");
        }
    }

    #[test]
    fn parse_rejects_unprintable_values() {
        assert!("12".parse::<Expr>().is_ok());
        assert!("X*12".parse::<Expr>().is_err());
        assert!("2147483648*X + 2147483648*X".parse::<Expr>().is_err());
        assert!("99999999999999999999*X".parse::<Expr>().is_err());
    }

    #[test]
    fn noncommutative() {
        assert_ne!(e("A1*A2"), e("A2*A1"));
        assert_eq!(&e("A1 + I") * &e("A1 - I"), e("A1*A1 - I"));
    }
}
