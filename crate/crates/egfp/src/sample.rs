//! Seeded random instances for property checks, the acceptance suite and the CLI.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::blockmat::{Bindings, MatrixAssignment, MatrixPolynomial};
use crate::pencils::{Decoration, EgfpSpec};
use crate::rational::Realization;
use crate::tuples::{IndexTuple, SignedIndex};

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries with real and imaginary parts uniform in `[-1, 1]`.
pub fn complex_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// `I + R / (2 sqrt(n))`: singular values stay within `[1/2, 3/2]`.
pub fn well_conditioned(n: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    let r = complex_matrix(n, n, rng);
    let scale = 0.5 / (2.0 * n.max(1) as f64).sqrt();
    DMatrix::identity(n, n) + r * Complex64::new(scale, 0.0)
}

pub fn polynomial(m: u32, n: usize, rng: &mut impl Rng) -> MatrixPolynomial {
    MatrixPolynomial::new((0..=m).map(|_| complex_matrix(n, n, rng)).collect()).expect("random leading block is nonzero")
}

/// Random `P` whose leading coefficient has rank `n - deficiency`, with `deficiency < n`.
pub fn polynomial_with_singular_leading(m: u32, n: usize, deficiency: usize, rng: &mut impl Rng) -> MatrixPolynomial {
    assert!(deficiency < n, "the leading coefficient must stay nonzero");
    let mut coeffs: Vec<_> = (0..=m).map(|_| complex_matrix(n, n, rng)).collect();
    let rank = n - deficiency;
    coeffs[m as usize] = complex_matrix(n, rank, rng) * complex_matrix(rank, n, rng);
    MatrixPolynomial::new(coeffs).expect("leading coefficient has rank at least one")
}

/// Unit upper triangular with entries in `{-1, 0, 1}` above the diagonal, so
/// its inverse is integral too.
pub fn integer_unimodular(n: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => Complex64::new(1.0, 0.0),
        std::cmp::Ordering::Less => Complex64::new(rng.gen_range(-1..=1) as f64, 0.0),
        std::cmp::Ordering::Greater => Complex64::new(0.0, 0.0),
    })
}

/// Singular `P = U diag(r_1, …, r_k, L_{ε_1}, …, L_{η_1}^T, …) V` of degree `m` with
/// integer coefficients, where `r_i` are scalar polynomials of degree `m`,
/// `L_ε = λ[I 0] - [0 I]` is `ε × (ε+1)` and `U`, `V` are integer unimodular.
///
/// Right minimal indices are `right`, left ones `left`; the two lists must have equal
/// length for the result to be square.
pub fn singular_polynomial(m: u32, right: &[usize], left: &[usize], regular: usize, rng: &mut impl Rng) -> MatrixPolynomial {
    assert_eq!(right.len(), left.len(), "Kronecker blocks must pair up to a square matrix");
    assert!(regular > 0, "a regular part of degree m keeps the leading coefficient nonzero");
    let rows = regular + right.iter().sum::<usize>() + left.iter().map(|h| h + 1).sum::<usize>();
    let cols = regular + right.iter().map(|e| e + 1).sum::<usize>() + left.iter().sum::<usize>();
    debug_assert_eq!(rows, cols);
    let n = rows;
    let mut coeffs = vec![DMatrix::<Complex64>::zeros(n, n); m as usize + 1];
    let one = Complex64::new(1.0, 0.0);
    for k in 0..regular {
        for c in coeffs.iter_mut() {
            c[(k, k)] = Complex64::new(rng.gen_range(-3..=3) as f64, 0.0);
        }
        coeffs[m as usize][(k, k)] = Complex64::new(rng.gen_range(1..=3) as f64, 0.0);
    }
    let (mut r0, mut c0) = (regular, regular);
    for &e in right {
        for i in 0..e {
            coeffs[1][(r0 + i, c0 + i)] += one;
            coeffs[0][(r0 + i, c0 + i + 1)] -= one;
        }
        r0 += e;
        c0 += e + 1;
    }
    for &h in left {
        for i in 0..h {
            coeffs[1][(r0 + i, c0 + i)] += one;
            coeffs[0][(r0 + i + 1, c0 + i)] -= one;
        }
        r0 += h + 1;
        c0 += h;
    }
    let u = integer_unimodular(n, rng);
    let v = integer_unimodular(n, rng).transpose();
    let coeffs = coeffs.into_iter().map(|c| &u * c * &v).collect();
    MatrixPolynomial::new(coeffs).expect("regular part has a nonzero leading coefficient")
}

/// Binds every free decoration block of `spec` to an integer unimodular matrix.
pub fn bind_integer_decorations(spec: &EgfpSpec, bindings: &mut Bindings, n: usize, rng: &mut impl Rng) {
    for name in spec.named_blocks() {
        bindings.bind(&name, integer_unimodular(n, rng));
    }
}

/// Binds every free decoration block of `spec` to a well-conditioned random matrix.
pub fn bind_decorations(spec: &EgfpSpec, bindings: &mut Bindings, n: usize, rng: &mut impl Rng) {
    for name in spec.named_blocks() {
        bindings.bind(&name, well_conditioned(n, rng));
    }
}

fn shuffled(mut items: Vec<SignedIndex>, rng: &mut impl Rng) -> IndexTuple {
    items.shuffle(rng);
    IndexTuple::new(items)
}

fn word(alphabet: &[SignedIndex], cap: usize, rng: &mut impl Rng) -> IndexTuple {
    if alphabet.is_empty() {
        return IndexTuple::empty();
    }
    let len = rng.gen_range(0..=cap);
    (0..len).map(|_| *alphabet.choose(rng).expect("nonempty")).collect()
}

/// Uniformly random `(σ, τ)` split with decoration words of length `<= cap`,
/// redrawn until the description is valid. Decorations are free assignments.
pub fn spec(m: u32, cap: usize, rng: &mut impl Rng) -> EgfpSpec {
    loop {
        let mask: u32 = rng.gen_range(0..(1 << (m + 1)));
        let sigma = shuffled((0..=m).filter(|k| mask & (1 << k) != 0).map(SignedIndex::plus).collect(), rng);
        let tau = shuffled((0..=m).filter(|k| mask & (1 << k) == 0).map(SignedIndex::minus).collect(), rng);
        let sig_alpha: Vec<_> = sigma.iter().filter(|i| i.magnitude() + 1 < m).collect();
        let tau_alpha: Vec<_> = tau.iter().filter(|i| i.magnitude() > 1).collect();
        let mut s = EgfpSpec::core(m, sigma, tau);
        for (which, alphabet, prefix) in [
            (Decoration::LeftSigma, &sig_alpha, "X1_"),
            (Decoration::RightSigma, &sig_alpha, "X2_"),
            (Decoration::LeftTau, &tau_alpha, "Y1_"),
            (Decoration::RightTau, &tau_alpha, "Y2_"),
        ] {
            s = s.with(which, MatrixAssignment::free(word(alphabet, cap, rng), prefix));
        }
        if s.validate().is_valid() {
            return s;
        }
    }
}

/// `(A, E, B, C)` with `E` well conditioned; minimal with probability one.
pub fn realization(poly: MatrixPolynomial, r: usize, rng: &mut impl Rng) -> Realization {
    let n = poly.size();
    let a = complex_matrix(r, r, rng);
    let e = well_conditioned(r, rng);
    let b = complex_matrix(r, n, rng);
    let c = complex_matrix(n, r, rng);
    Realization::new(poly, a, e, b, c).expect("shapes agree and E is nonsingular")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_streams_repeat() {
        let a = polynomial(3, 2, &mut rng(7));
        let b = polynomial(3, 2, &mut rng(7));
        assert_eq!(a, b);
    }

    #[test]
    fn random_specs_are_valid() {
        let mut r = rng(1);
        for m in 2..=5 {
            for _ in 0..50 {
                assert!(spec(m, 2, &mut r).validate().is_valid());
            }
        }
    }

    #[test]
    fn leading_rank_deficiency() {
        let p = polynomial_with_singular_leading(3, 4, 2, &mut rng(3));
        let s = p.coeff(3).singular_values();
        assert!(s[2].min(s[3]) < 1e-12 * s.max());
    }
}
