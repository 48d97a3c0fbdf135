//! Index tuples over `{±0, ±1, …, ±m}` and their combinatorics.
//!
//! A tuple whose entries are all nonnegative (resp. all nonpositive) is said to
//! live in the nonnegative (resp. nonpositive) sign class. Successor arithmetic
//! in both classes runs on the integer line through [`SignedIndex::key`], so the
//! successor of `-s` is `-(s-1)` and the successor of `-1` is `-0`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TupleError {
    #[error("tuple {0} mixes nonnegative and nonpositive indices")]
    MixedSign(IndexTuple),
    #[error("index {index} is not in the sign class of tuple {tuple}")]
    ClassMismatch { tuple: IndexTuple, index: SignedIndex },
    #[error("tuple {0} does not satisfy the successor infix property")]
    SipViolated(IndexTuple),
    #[error("tuple {tuple} is not a permutation of {{0:{top}}}")]
    NotPermutation { tuple: IndexTuple, top: i64 },
    #[error("shifting {tuple} by {shift} leaves its sign class")]
    ShiftOutOfClass { tuple: IndexTuple, shift: i64 },
    #[error("cannot parse index tuple from {0:?}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

/// A block index `+k` or `-k`; `+0` and `-0` are distinct.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedIndex {
    sign: Sign,
    magnitude: u32,
}

impl SignedIndex {
    pub const fn plus(magnitude: u32) -> Self {
        Self { sign: Sign::Plus, magnitude }
    }

    pub const fn minus(magnitude: u32) -> Self {
        Self { sign: Sign::Minus, magnitude }
    }

    pub const fn sign(self) -> Sign {
        self.sign
    }

    pub const fn magnitude(self) -> u32 {
        self.magnitude
    }

    pub const fn is_minus(self) -> bool {
        matches!(self.sign, Sign::Minus)
    }

    pub const fn negate(self) -> Self {
        match self.sign {
            Sign::Plus => Self::minus(self.magnitude),
            Sign::Minus => Self::plus(self.magnitude),
        }
    }

    /// Position on the integer line: `+k ↦ k`, `-k ↦ -k`, so `±0 ↦ 0`.
    pub const fn key(self) -> i64 {
        match self.sign {
            Sign::Plus => self.magnitude as i64,
            Sign::Minus => -(self.magnitude as i64),
        }
    }

    /// Inverse of [`key`](Self::key) within a sign class.
    pub fn from_key(key: i64, sign: Sign) -> Option<Self> {
        match sign {
            Sign::Plus if key >= 0 => Some(Self::plus(key as u32)),
            Sign::Minus if key <= 0 => Some(Self::minus((-key) as u32)),
            _ => None,
        }
    }

    /// Whether the elementary factors of the two indices commute.
    pub fn commutes_with(self, other: Self) -> bool {
        (self.magnitude as i64 - other.magnitude as i64).abs() > 1
    }
}

impl fmt::Display for SignedIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            Sign::Plus => write!(f, "{}", self.magnitude),
            Sign::Minus => write!(f, "-{}", self.magnitude),
        }
    }
}

impl FromStr for SignedIndex {
    type Err = TupleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let (sign, digits) = match t.strip_prefix('-') {
            Some(rest) => (Sign::Minus, rest.trim()),
            None => (Sign::Plus, t.strip_prefix('+').unwrap_or(t).trim()),
        };
        let magnitude = digits.parse::<u32>().map_err(|_| TupleError::Parse(s.to_string()))?;
        Ok(Self { sign, magnitude })
    }
}

impl Serialize for SignedIndex {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.is_minus() && self.magnitude == 0 {
            serializer.serialize_str("-0")
        } else {
            serializer.serialize_i64(self.key())
        }
    }
}

impl<'de> Deserialize<'de> for SignedIndex {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct IndexVisitor;

        impl Visitor<'_> for IndexVisitor {
            type Value = SignedIndex;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a signed integer or a string such as \"-0\"")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<SignedIndex, E> {
                let magnitude = u32::try_from(v.unsigned_abs()).map_err(E::custom)?;
                Ok(if v < 0 { SignedIndex::minus(magnitude) } else { SignedIndex::plus(magnitude) })
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<SignedIndex, E> {
                Ok(SignedIndex::plus(u32::try_from(v).map_err(E::custom)?))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<SignedIndex, E> {
                v.parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(IndexVisitor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignClass {
    Empty,
    Nonnegative,
    Nonpositive,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StandardForm {
    Column,
    Row,
}

/// An ordered sequence of signed block indices, possibly empty.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexTuple(Vec<SignedIndex>);

impl IndexTuple {
    pub fn new(entries: Vec<SignedIndex>) -> Self {
        Self(entries)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Tuple `(k_1, k_2, …)` of nonnegative indices.
    pub fn nonnegative(magnitudes: &[u32]) -> Self {
        Self(magnitudes.iter().map(|&k| SignedIndex::plus(k)).collect())
    }

    /// Tuple `(-k_1, -k_2, …)` of nonpositive indices.
    pub fn nonpositive(magnitudes: &[u32]) -> Self {
        Self(magnitudes.iter().map(|&k| SignedIndex::minus(k)).collect())
    }

    pub fn entries(&self) -> &[SignedIndex] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = SignedIndex> + ExactSizeIterator + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, index: SignedIndex) -> bool {
        self.0.contains(&index)
    }

    pub fn class(&self) -> SignClass {
        let mut plus = false;
        let mut minus = false;
        for e in &self.0 {
            match e.sign {
                Sign::Plus => plus = true,
                Sign::Minus => minus = true,
            }
        }
        match (plus, minus) {
            (false, false) => SignClass::Empty,
            (true, false) => SignClass::Nonnegative,
            (false, true) => SignClass::Nonpositive,
            (true, true) => SignClass::Mixed,
        }
    }

    pub fn rev(&self) -> Self {
        Self(self.0.iter().rev().copied().collect())
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|e| e.negate()).collect())
    }

    /// Adds `q` to every key while keeping each entry's sign.
    pub fn shift(&self, q: i64) -> Result<Self, TupleError> {
        self.0
            .iter()
            .map(|e| SignedIndex::from_key(e.key() + q, e.sign))
            .collect::<Option<Vec<_>>>()
            .map(Self)
            .ok_or_else(|| TupleError::ShiftOutOfClass { tuple: self.clone(), shift: q })
    }

    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a IndexTuple>) -> Self {
        Self(parts.into_iter().flat_map(|p| p.0.iter().copied()).collect())
    }

    /// Subtuple of the entries satisfying `keep`, in order.
    pub fn filter(&self, mut keep: impl FnMut(SignedIndex) -> bool) -> Self {
        Self(self.0.iter().copied().filter(|&e| keep(e)).collect())
    }

    fn single_class(&self) -> Result<SignClass, TupleError> {
        match self.class() {
            SignClass::Mixed => Err(TupleError::MixedSign(self.clone())),
            c => Ok(c),
        }
    }

    fn check_index_class(&self, t: SignedIndex) -> Result<(), TupleError> {
        let ok = match self.single_class()? {
            SignClass::Empty => true,
            SignClass::Nonnegative => t.sign == Sign::Plus,
            SignClass::Nonpositive => t.sign == Sign::Minus,
            SignClass::Mixed => unreachable!(),
        };
        if ok {
            Ok(())
        } else {
            Err(TupleError::ClassMismatch { tuple: self.clone(), index: t })
        }
    }

    fn keys(&self) -> Vec<i64> {
        self.0.iter().map(|e| e.key()).collect()
    }

    /// `c_t`: largest `p` with `(t, t+1, …, t+p)` a subtuple, or `-1` when `t` is absent.
    pub fn consecutions(&self, t: SignedIndex) -> Result<i64, TupleError> {
        self.check_index_class(t)?;
        Ok(ascending_run(self.0.iter().map(|e| e.key()), t.key()))
    }

    /// `i_t`: largest `q` with `(t+q, …, t+1, t)` a subtuple, or `-1` when `t` is absent.
    pub fn inversions(&self, t: SignedIndex) -> Result<i64, TupleError> {
        self.check_index_class(t)?;
        Ok(ascending_run(self.0.iter().rev().map(|e| e.key()), t.key()))
    }

    fn permutation_size(&self) -> Result<usize, TupleError> {
        let n = self.0.len();
        let mut seen = vec![false; n];
        for e in &self.0 {
            let k = e.magnitude as usize;
            if e.sign != Sign::Plus || k >= n || seen[k] {
                return Err(TupleError::NotPermutation { tuple: self.clone(), top: n as i64 - 1 });
            }
            seen[k] = true;
        }
        Ok(n)
    }

    /// Number of `k` such that `k` precedes `k+1`, for a permutation of `{0:len-1}`.
    pub fn total_consecutions(&self) -> Result<usize, TupleError> {
        let n = self.permutation_size()?;
        let mut pos = vec![0usize; n];
        for (i, e) in self.0.iter().enumerate() {
            pos[e.magnitude as usize] = i;
        }
        Ok((0..n.saturating_sub(1)).filter(|&k| pos[k] < pos[k + 1]).count())
    }

    pub fn total_inversions(&self) -> Result<usize, TupleError> {
        let c = self.total_consecutions()?;
        Ok(self.0.len().saturating_sub(1) - c)
    }

    /// Every repeated index has its successor strictly between consecutive repetitions.
    pub fn satisfies_sip(&self) -> Result<bool, TupleError> {
        self.single_class()?;
        Ok(sip_keys(&self.keys()))
    }

    pub fn standard_form(&self, kind: StandardForm) -> Result<Self, TupleError> {
        let class = self.single_class()?;
        if !sip_keys(&self.keys()) {
            return Err(TupleError::SipViolated(self.clone()));
        }
        let sign = if class == SignClass::Nonpositive { Sign::Minus } else { Sign::Plus };
        let keys = match kind {
            StandardForm::Column => column_form_keys(&self.keys()),
            StandardForm::Row => {
                let mut rev = self.keys();
                rev.reverse();
                let mut f = column_form_keys(&rev);
                f.reverse();
                f
            }
        };
        Ok(Self(keys.into_iter().map(|k| SignedIndex::from_key(k, sign).expect("keys stay in class")).collect()))
    }

    /// Equality of column standard forms; both tuples must satisfy the SIP.
    pub fn is_equivalent(&self, other: &Self) -> Result<bool, TupleError> {
        let (a, b) = (self.class(), other.class());
        if a != SignClass::Empty && b != SignClass::Empty && a != b {
            let culprit = other.0.first().copied().expect("nonempty");
            return Err(TupleError::ClassMismatch { tuple: self.clone(), index: culprit });
        }
        Ok(self.standard_form(StandardForm::Column)? == other.standard_form(StandardForm::Column)?)
    }

    /// End indices of a sub-permutation of `{0:m-1}` or of `{-m:-1}`.
    ///
    /// Entries outside those ranges (`m`, `-0`) are ignored.
    pub fn end_indices(&self, m: u32) -> Result<BTreeSet<SignedIndex>, TupleError> {
        let class = self.single_class()?;
        let mut out = BTreeSet::new();
        match class {
            SignClass::Empty => {}
            SignClass::Nonnegative => {
                let present = |k: i64| k >= 0 && k < m as i64 && self.contains(SignedIndex::plus(k as u32));
                for e in &self.0 {
                    let k = e.key();
                    if k == 0 || k >= m as i64 {
                        continue;
                    }
                    if !present(k - 1) || !present(k + 1) {
                        out.insert(*e);
                    }
                }
            }
            SignClass::Nonpositive => {
                let present = |t: i64| t >= 1 && t <= m as i64 && self.contains(SignedIndex::minus(t as u32));
                for e in &self.0 {
                    let t = e.magnitude as i64;
                    if t == 0 || t >= m as i64 {
                        continue;
                    }
                    if !present(t - 1) || !present(t + 1) {
                        out.insert(*e);
                    }
                }
            }
            SignClass::Mixed => unreachable!(),
        }
        Ok(out)
    }
}

impl fmt::Display for IndexTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str(")")
    }
}

impl FromStr for IndexTuple {
    type Err = TupleError;

    /// Accepts `(3,4,-0)`, `3,4,-0`, `()` and the empty string.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let inner = t.strip_prefix('(').and_then(|r| r.strip_suffix(')')).unwrap_or(t);
        if inner.trim().is_empty() {
            return Ok(Self::empty());
        }
        inner.split(',').map(str::parse).collect::<Result<Vec<_>, _>>().map(Self)
    }
}

impl FromIterator<SignedIndex> for IndexTuple {
    fn from_iter<I: IntoIterator<Item = SignedIndex>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Greedy earliest matching of `start, start+1, …` as a subsequence.
fn ascending_run(keys: impl Iterator<Item = i64>, start: i64) -> i64 {
    let mut want = start;
    for k in keys {
        if k == want {
            want += 1;
        }
    }
    want - start - 1
}

fn sip_keys(keys: &[i64]) -> bool {
    for (a, &k) in keys.iter().enumerate() {
        if let Some(b) = keys[a + 1..].iter().position(|&x| x == k) {
            if !keys[a + 1..a + 1 + b].contains(&(k + 1)) {
                return false;
            }
        }
    }
    true
}

/// Column standard form `(a_s:b_s, …, a_1:b_1)`, `b_1 < … < b_s`, built right to left
/// by moving commuting entries to the tail. Assumes the SIP.
fn column_form_keys(keys: &[i64]) -> Vec<i64> {
    let mut alive = vec![true; keys.len()];
    let mut tail = Vec::with_capacity(keys.len());
    let found = extend_tail(keys, &mut alive, &mut tail, None);
    assert!(found, "tuple satisfying the SIP has a column standard form");
    tail.reverse();
    tail
}

/// Block state while reading the form right to left: `(top of block, last key taken)`.
fn extend_tail(keys: &[i64], alive: &mut [bool], tail: &mut Vec<i64>, block: Option<(i64, i64)>) -> bool {
    if tail.len() == keys.len() {
        return true;
    }
    let mut candidates: Vec<usize> = Vec::new();
    for p in (0..keys.len()).rev() {
        if !alive[p] {
            continue;
        }
        let movable = (p + 1..keys.len()).all(|q| !alive[q] || (keys[p] - keys[q]).abs() > 1);
        if movable {
            candidates.push(p);
        }
    }
    // Continuing the current block is tried first, then new blocks with increasing top.
    candidates.sort_by_key(|&p| {
        let k = keys[p];
        match block {
            Some((_, last)) if k == last - 1 => (0, k),
            _ => (1, k),
        }
    });
    for p in candidates {
        let k = keys[p];
        let next = match block {
            Some((top, last)) if k == last - 1 => Some((top, k)),
            Some((top, _)) if k > top => Some((k, k)),
            Some(_) => None,
            None => Some((k, k)),
        };
        let Some(next) = next else { continue };
        alive[p] = false;
        tail.push(k);
        if extend_tail(keys, alive, tail, Some(next)) {
            return true;
        }
        tail.pop();
        alive[p] = true;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> IndexTuple {
        s.parse().unwrap()
    }

    const P: fn(u32) -> SignedIndex = SignedIndex::plus;
    const M: fn(u32) -> SignedIndex = SignedIndex::minus;

    #[test]
    fn consecution_inversion_table() {
        let alpha = t("(1,0,2,1,3,2,4,1,3,2,1)");
        assert_eq!(alpha.consecutions(P(0)).unwrap(), 3);
        assert_eq!(alpha.consecutions(P(3)).unwrap(), 1);
        assert_eq!(alpha.inversions(P(0)).unwrap(), 1);
        assert_eq!(alpha.inversions(P(1)).unwrap(), 3);
        assert_eq!(alpha.inversions(P(3)).unwrap(), 1);
        assert_eq!(alpha.consecutions(P(5)).unwrap(), -1);
        assert_eq!(alpha.inversions(P(5)).unwrap(), -1);
        assert_eq!(IndexTuple::empty().consecutions(P(2)).unwrap(), -1);
        assert_eq!(t("(0,1,2)").inversions(P(0)).unwrap(), 0);
    }

    #[test]
    fn negative_class_successor_runs_toward_minus_zero() {
        let tau = t("(-3,-2,-1,-0)");
        assert_eq!(tau.consecutions(M(3)).unwrap(), 3);
        assert_eq!(tau.inversions(M(0)).unwrap(), 0);
        assert_eq!(t("(-0,-1)").inversions(M(1)).unwrap(), 1);
        assert!(matches!(tau.consecutions(P(1)), Err(TupleError::ClassMismatch { .. })));
        assert!(matches!(t("(1,-2)").consecutions(P(1)), Err(TupleError::MixedSign(_))));
    }

    #[test]
    fn totals() {
        for (s, c, i) in [("(0,1,2,3)", 3, 0), ("(3,2,1,0)", 0, 3), ("(1,0,2,3)", 2, 1)] {
            assert_eq!(t(s).total_consecutions().unwrap(), c);
            assert_eq!(t(s).total_inversions().unwrap(), i);
        }
        assert!(t("(0,2)").total_consecutions().is_err());
    }

    #[test]
    fn sip_cases() {
        assert!(t("(1,0,2,1)").satisfies_sip().unwrap());
        assert!(t("(0,1,0)").satisfies_sip().unwrap());
        assert!(!t("(1,0,1)").satisfies_sip().unwrap());
        assert!(!t("(0,0)").satisfies_sip().unwrap());
        assert!(IndexTuple::empty().satisfies_sip().unwrap());
        assert!(t("(-2,-1,-2)").satisfies_sip().unwrap());
        assert!(!t("(-1,-2,-1)").satisfies_sip().unwrap());
    }

    #[test]
    fn standard_forms() {
        assert_eq!(t("(0,1)").standard_form(StandardForm::Column).unwrap(), t("(0,1)"));
        assert_eq!(t("(1,0,2,1)").standard_form(StandardForm::Column).unwrap(), t("(1,2,0,1)"));
        assert_eq!(t("(3,2,1,0)").standard_form(StandardForm::Column).unwrap(), t("(3,2,1,0)"));
        assert_eq!(t("(3,2,1,0)").standard_form(StandardForm::Row).unwrap(), t("(3,2,1,0)"));
        assert_eq!(t("(0,1,2)").standard_form(StandardForm::Row).unwrap(), t("(0,1,2)"));
        assert_eq!(t("(-5,-1)").standard_form(StandardForm::Column).unwrap(), t("(-1,-5)"));
        assert_eq!(t("(-5,-1)").standard_form(StandardForm::Row).unwrap(), t("(-5,-1)"));
        assert!(t("(1,0,1)").standard_form(StandardForm::Column).is_err());
    }

    #[test]
    fn equivalence() {
        assert!(t("(0,2)").is_equivalent(&t("(2,0)")).unwrap());
        assert!(!t("(0,1)").is_equivalent(&t("(1,0)")).unwrap());
        assert!(t("(1,0,2,1)").is_equivalent(&t("(1,2,0,1)")).unwrap());
    }

    #[test]
    fn end_index_sets() {
        assert_eq!(t("(0,1,2)").end_indices(6).unwrap(), [P(2)].into());
        assert!(t("(0)").end_indices(6).unwrap().is_empty());
        assert_eq!(t("(-6,-3)").end_indices(6).unwrap(), [M(3)].into());
    }

    #[test]
    fn json_round_trip_keeps_minus_zero() {
        let tau = t("(-5,-1,-0,3)");
        let s = serde_json::to_string(&tau).unwrap();
        assert_eq!(s, r#"[-5,-1,"-0",3]"#);
        assert_eq!(serde_json::from_str::<IndexTuple>(&s).unwrap(), tau);
        let from_strings: IndexTuple = serde_json::from_str(r#"["-5","-1"]"#).unwrap();
        assert_eq!(from_strings, t("(-5,-1)"));
    }

    #[test]
    fn shift_respects_class() {
        let a = t("(0,2)");
        assert_eq!(a.shift(3).unwrap().shift(-3).unwrap(), a);
        assert!(a.shift(-1).is_err());
        assert_eq!(t("(-5,-1)").shift(1).unwrap(), t("(-4,-0)"));
    }
}
