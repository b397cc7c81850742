//! The long-word Bruhat cell: corner minors, the factorization
//! `A = u_L · w0 · diag(t) · u_R`, characters of the unipotent factors, and
//! normal forms of `U(Z) \ A / U(Z)`.
//!
//! With `c_k = M_{{n-k+1..n},{1..k}}` (the bottom-left `k × k` corner minor)
//! the factors are minor quotients:
//!
//! * `t = (c_1, c_2/c_1, …, c_{n-1}/c_{n-2}, 1/c_{n-1})`,
//! * `u_L(i, j) = M_{{i} ∪ {j+1..n}, {1..n-j+1}} / c_{n-j+1}`,
//! * `u_R(i, j) = M_{{n-i+1..n}, {1..i-1} ∪ {j}} / c_i`.
//!
//! For `n = 4, 5` these are exactly the tabulated quotients
//! `⟨e*_I, A e_J⟩ / c_k`; every decomposition is checked by multiplying back.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::exactnum::{gcd_many, Phase, Rational};
use crate::matrix::{IndexPair, IntMatrix, Matrix, RatMatrix};
use crate::weyl::long_word_matrix;
use crate::{Error, Result};

/// The corner data `(c_1, …, c_{n-1})` of a big-cell matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModuliVector {
    c: Vec<BigInt>,
}

impl ModuliVector {
    /// Rejects empty vectors and zero entries.
    pub fn new(c: Vec<BigInt>) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(k) = c.iter().position(|v| v.is_zero()) {
            return Err(Error::NotInBigCell(format!("c_{} = 0", k + 1)));
        }
        Ok(ModuliVector { c })
    }

    pub fn from_i64(c: &[i64]) -> Result<Self> {
        Self::new(c.iter().map(|&v| BigInt::from(v)).collect())
    }

    pub fn values(&self) -> &[BigInt] {
        &self.c
    }

    /// Matrix size `n = len + 1`.
    pub fn rank(&self) -> usize {
        self.c.len() + 1
    }

    pub fn is_positive(&self) -> bool {
        self.c.iter().all(|v| v.is_positive())
    }

    /// `(c_1, c_2/c_1, …, 1/c_{n-1})`; the product is 1.
    pub fn t_values(&self) -> Vec<Rational> {
        let mut out = Vec::with_capacity(self.c.len() + 1);
        let mut prev = BigInt::one();
        for v in &self.c {
            out.push(Rational::new(v.clone(), prev.clone()));
            prev = v.clone();
        }
        out.push(Rational::new(BigInt::one(), prev));
        out
    }

    pub fn t_matrix(&self) -> RatMatrix {
        RatMatrix::diagonal(&self.t_values())
    }
}

fn range(lo: usize, hi: usize) -> Vec<usize> {
    (lo..=hi).collect()
}

fn minor_of(a: &IntMatrix, rows: Vec<usize>, cols: Vec<usize>) -> BigInt {
    let idx = IndexPair::new(rows, cols).expect("generated index sets are valid");
    a.minor(&idx).expect("generated index sets are in range")
}

/// `c_k = M_{{n-k+1..n},{1..k}}` for `k = 1..n-1`, zeros included.
pub fn corner_minors(a: &IntMatrix) -> Vec<BigInt> {
    let n = a.size();
    (1..n)
        .map(|k| minor_of(a, range(n - k + 1, n), range(1, k)))
        .collect()
}

/// The corner minors of a rank-4 or rank-5 matrix: `(A41, M_{34,12},
/// M_{234,123})` or `(A51, M_{45,12}, M_{345,123}, M_{2345,1234})`.
pub fn t_from_minors(a: &IntMatrix) -> Result<ModuliVector> {
    match a.size() {
        4 | 5 => t_from_minors_any(a),
        n => Err(Error::BadRank(n)),
    }
}

/// [`t_from_minors`] for any size `n ≥ 2`.
pub fn t_from_minors_any(a: &IntMatrix) -> Result<ModuliVector> {
    if a.size() < 2 {
        return Err(Error::BadRank(a.size()));
    }
    ModuliVector::new(corner_minors(a))
}

/// `A = u_left · weyl · diag(t) · u_right`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BruhatDecomposition {
    pub u_left: RatMatrix,
    pub t: Vec<Rational>,
    pub u_right: RatMatrix,
    pub weyl: IntMatrix,
}

impl BruhatDecomposition {
    pub fn reconstruct(&self) -> RatMatrix {
        let w = self.weyl.to_rational();
        let t = RatMatrix::diagonal(&self.t);
        RatMatrix::product([&self.u_left, &w, &t, &self.u_right]).expect("factors share one size")
    }
}

/// Factorization of a rank-4 or rank-5 big-cell matrix.
pub fn decompose(a: &IntMatrix) -> Result<BruhatDecomposition> {
    match a.size() {
        4 | 5 => decompose_any(a),
        n => Err(Error::BadRank(n)),
    }
}

/// [`decompose`] for any size `n ≥ 2`.
pub fn decompose_any(a: &IntMatrix) -> Result<BruhatDecomposition> {
    let n = a.size();
    let det = a.det();
    if !det.is_one() {
        return Err(Error::NotSpecialLinear(det));
    }
    let moduli = t_from_minors_any(a)?;
    let c = moduli.values();
    let mut u_left = RatMatrix::identity(n);
    let mut u_right = RatMatrix::identity(n);
    for i in 1..n {
        for j in i + 1..=n {
            let k = n - j + 1;
            let mut rows = alloc::vec![i];
            rows.extend(j + 1..=n);
            u_left[(i - 1, j - 1)] =
                Rational::new(minor_of(a, rows, range(1, k)), c[k - 1].clone());

            let mut cols = range(1, i - 1);
            cols.push(j);
            u_right[(i - 1, j - 1)] =
                Rational::new(minor_of(a, range(n - i + 1, n), cols), c[i - 1].clone());
        }
    }
    let dec = BruhatDecomposition {
        u_left,
        t: moduli.t_values(),
        u_right,
        weyl: long_word_matrix(n)?,
    };
    if dec.reconstruct() != a.to_rational() {
        return Err(Error::InternalInconsistency(String::from(
            "u_L · w0 · t · u_R does not reproduce the input",
        )));
    }
    Ok(dec)
}

/// `ψ(u) = Σ_i character[i] · u_{i,i+1}` reduced mod 1.
pub fn psi(character: &[i64], u: &RatMatrix) -> Result<Phase> {
    if character.len() + 1 != u.size() {
        return Err(Error::SizeMismatch {
            left: character.len() + 1,
            right: u.size(),
        });
    }
    let mut acc = Rational::zero();
    for (i, &m) in character.iter().enumerate() {
        acc += &u[(i, i + 1)] * Rational::from_integer(BigInt::from(m));
    }
    Ok(Phase::new(acc))
}

/// `ψ_m(u_L) + ψ_n(u_R)`: the summand attached to a double coset.
pub fn coset_phase(dec: &BruhatDecomposition, m: &[i64], n: &[i64]) -> Result<Phase> {
    Ok(&psi(m, &dec.u_left)? + &psi(n, &dec.u_right)?)
}

/// The unique element of `U(Z) · u` with every entry above the diagonal in
/// `[0, 1)`.
pub fn reduce_left(u: &RatMatrix) -> RatMatrix {
    let n = u.size();
    let mut out = u.clone();
    // row i of γu only depends on row i of γ; columns left to right
    for i in 0..n {
        for j in i + 1..n {
            let shift = out[(i, j)].floor();
            if shift.is_zero() {
                continue;
            }
            // subtract shift · (row j of out) from row i
            for l in j..n {
                let v = &shift * &out[(j, l)];
                out[(i, l)] -= v;
            }
        }
    }
    out
}

/// The unique element of `u · U(Z)` with every entry above the diagonal in
/// `[0, 1)`.
pub fn reduce_right(u: &RatMatrix) -> RatMatrix {
    reduce_left(&u.transpose_anti()).transpose_anti()
}

impl RatMatrix {
    /// Reflection in the antidiagonal, `(r, c) ↦ (n-1-c, n-1-r)`; maps
    /// left-multiplication by unipotents to right-multiplication.
    pub fn transpose_anti(&self) -> RatMatrix {
        let n = self.size();
        Matrix::from_fn(n, |r, c| self[(n - 1 - c, n - 1 - r)].clone())
    }
}

/// Normal form of the double coset `U(Z) A U(Z)` of a big-cell matrix.
pub fn canonical_form(a: &IntMatrix) -> Result<BruhatDecomposition> {
    let mut dec = decompose_any(a)?;
    dec.u_left = reduce_left(&dec.u_left);
    dec.u_right = reduce_right(&dec.u_right);
    Ok(dec)
}

/// The integral normal-form representative of `U(Z) A U(Z)`.
pub fn canonical_matrix(a: &IntMatrix) -> Result<IntMatrix> {
    canonical_form(a)?
        .reconstruct()
        .to_integer()
        .ok_or_else(|| Error::InternalInconsistency(String::from("normal form is not integral")))
}

/// `gcd(A_{n,1}, …, A_{n,n-1})`.
pub fn bottom_row_gcd(a: &IntMatrix) -> BigInt {
    let n = a.size();
    let row: Vec<BigInt> = (0..n - 1).map(|c| a[(n - 1, c)].clone()).collect();
    gcd_many(&row).unwrap_or_default()
}

/// gcd of the order-`(n-1)` minors on columns `1..n-1` whose row set omits
/// one of `1..n-1`.
pub fn corner_column_minor_gcd(a: &IntMatrix) -> BigInt {
    let n = a.size();
    let minors: Vec<BigInt> = (1..n)
        .map(|skip| {
            let rows: Vec<usize> = (1..=n).filter(|&r| r != skip).collect();
            minor_of(a, rows, range(1, n - 1))
        })
        .collect();
    gcd_many(&minors).unwrap_or_default()
}

/// The gcd of the bottom row (without its last entry) equals the gcd of the
/// complementary order-`(n-1)` minors.
pub fn gcd_lemma_holds(a: &IntMatrix) -> bool {
    bottom_row_gcd(a) == corner_column_minor_gcd(a)
}

/// `E_{ij}(k)`: identity plus `k` at 0-based `(i, j)`, `i ≠ j`.
pub fn elementary(n: usize, i: usize, j: usize, k: i64) -> IntMatrix {
    let mut e = IntMatrix::identity(n);
    e[(i, j)] = BigInt::from(k);
    e
}

/// A product of 8 to 20 elementary matrices `E_{ij}(k)` with `k ∈ [-3, 3]`,
/// redrawn until every corner minor is nonzero.
pub fn random_big_cell<R: Rng + ?Sized>(n: usize, rng: &mut R) -> IntMatrix {
    assert!(n >= 2, "rank must be at least 2");
    loop {
        let steps = rng.gen_range(8..=20);
        let mut a = IntMatrix::identity(n);
        for _ in 0..steps {
            let i = rng.gen_range(0..n);
            let mut j = rng.gen_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let k = rng.gen_range(-3i64..=3);
            // left-multiplying by E_ij(k) adds k · row j to row i
            for c in 0..n {
                let v = &a[(j, c)] * BigInt::from(k);
                a[(i, c)] += v;
            }
        }
        if corner_minors(&a).iter().all(|v| !v.is_zero()) {
            return a;
        }
    }
}

/// A random element of `U(Z)` with entries above the diagonal in
/// `[-bound, bound]`.
pub fn random_unipotent<R: Rng + ?Sized>(n: usize, bound: i64, rng: &mut R) -> IntMatrix {
    Matrix::from_fn(n, |r, c| match r.cmp(&c) {
        core::cmp::Ordering::Equal => BigInt::one(),
        core::cmp::Ordering::Less => BigInt::from(rng.gen_range(-bound..=bound)),
        core::cmp::Ordering::Greater => BigInt::zero(),
    })
}
