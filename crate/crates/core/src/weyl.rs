//! The Weyl group of `SL_n` as permutations, words in simple reflections,
//! and their signed matrix realizations.
//!
//! A permutation `w` acts on basis vectors by `e_j ↦ e_{w(j)}`; a signed
//! monomial matrix projects to the permutation it induces on coordinate
//! lines. The simple reflection `s_i` is realized as the block
//! `[[0, -1], [1, 0]]` on coordinates `i, i+1`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::matrix::{IntMatrix, Matrix, Scalar};
use crate::{Error, Result};

/// A bijection of `{1..n}`, stored as its images.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n + 1];
        for &v in &images {
            if v == 0 || v > n || seen[v] {
                return Err(Error::BadIndexSet(format!(
                    "{:?} is not a permutation of 1..{}",
                    images, n
                )));
            }
            seen[v] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (1..=n).collect(),
        }
    }

    /// The transposition `(i, i+1)`.
    pub fn simple(i: usize, n: usize) -> Result<Self> {
        if i == 0 || i >= n {
            return Err(Error::BadLetter { letter: i, rank: n });
        }
        let mut p = Self::identity(n);
        p.images.swap(i - 1, i);
        Ok(p)
    }

    /// `i ↦ n + 1 - i`.
    pub fn longest(n: usize) -> Self {
        Permutation {
            images: (1..=n).rev().collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.images.len()
    }

    /// `w(i)`, 1-based.
    pub fn apply(&self, i: usize) -> usize {
        self.images[i - 1]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// `self ∘ other`, i.e. apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.size() != other.size() {
            return Err(Error::SizeMismatch {
                left: self.size(),
                right: other.size(),
            });
        }
        Ok(Permutation {
            images: other.images.iter().map(|&j| self.images[j - 1]).collect(),
        })
    }

    /// Number of pairs `i < j` with `w(i) > w(j)`; equals the Coxeter length.
    pub fn inversions(&self) -> usize {
        let n = self.size();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.images[i] > self.images[j])
            .count()
    }

    /// The unsigned permutation matrix, `P e_j = e_{w(j)}`.
    pub fn to_matrix(&self) -> IntMatrix {
        Matrix::from_fn(self.size(), |r, c| {
            if self.images[c] == r + 1 {
                BigInt::one()
            } else {
                BigInt::zero()
            }
        })
    }
}

/// A word in the simple reflections `s_1, …, s_{n-1}`.
///
/// Any letter sequence is accepted; [`ReducedWord::is_reduced`] compares the
/// length with the inversion count of the product.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ReducedWord {
    letters: Vec<usize>,
}

impl ReducedWord {
    pub fn new(letters: Vec<usize>) -> Self {
        ReducedWord { letters }
    }

    /// Parses `"1,2,1"`; whitespace is ignored and the empty string is the
    /// empty word.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Self::new(Vec::new()));
        }
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Unsupported(format!("bad word letter {:?}", t)))
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    /// `s_1 (s_2 s_1) (s_3 s_2 s_1) ⋯ (s_{n-1} ⋯ s_1)`.
    pub fn staircase(n: usize) -> Self {
        let mut letters = Vec::new();
        for k in 1..n {
            letters.extend((1..=k).rev());
        }
        Self::new(letters)
    }

    pub fn letters(&self) -> &[usize] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    fn check_letters(&self, n: usize) -> Result<()> {
        match self.letters.iter().find(|&&l| l == 0 || l >= n) {
            Some(&letter) => Err(Error::BadLetter { letter, rank: n }),
            None => Ok(()),
        }
    }

    /// Product of the letters as permutations, left to right.
    pub fn to_permutation(&self, n: usize) -> Result<Permutation> {
        self.check_letters(n)?;
        let mut p = Permutation::identity(n);
        for &l in &self.letters {
            p = p.compose(&Permutation::simple(l, n)?)?;
        }
        Ok(p)
    }

    pub fn is_reduced(&self, n: usize) -> Result<bool> {
        Ok(self.to_permutation(n)?.inversions() == self.len())
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, l) in self.letters.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", l)?;
        }
        Ok(())
    }
}

/// A positive root `e_i - e_j` (`i < j`) of `SL_n`, stored as its coordinate
/// vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RootLabel {
    coords: Vec<i8>,
}

impl RootLabel {
    /// Validates a coordinate vector: one `+1`, a later `-1`, zeros elsewhere.
    pub fn from_coords(coords: Vec<i8>) -> Result<Self> {
        let n = coords.len();
        let plus: Vec<usize> = (0..n).filter(|&k| coords[k] == 1).collect();
        let minus: Vec<usize> = (0..n).filter(|&k| coords[k] == -1).collect();
        let zeros = coords.iter().filter(|&&v| v == 0).count();
        if plus.len() != 1 || minus.len() != 1 || zeros + 2 != n || plus[0] > minus[0] {
            return Err(Error::BadRoot {
                rank: n,
                detail: format!("{:?} is not a positive root", coords),
            });
        }
        Ok(RootLabel { coords })
    }

    /// `e_i - e_j` in rank `n`, 1-based.
    pub fn positive(i: usize, j: usize, n: usize) -> Result<Self> {
        if i == 0 || i >= j || j > n {
            return Err(Error::BadRoot {
                rank: n,
                detail: format!("no positive root e_{} - e_{}", i, j),
            });
        }
        let mut coords = vec![0i8; n];
        coords[i - 1] = 1;
        coords[j - 1] = -1;
        Ok(RootLabel { coords })
    }

    /// The `k`-th simple root `e_k - e_{k+1}`: α, β, γ, δ for k = 1..4.
    pub fn simple(k: usize, n: usize) -> Result<Self> {
        Self::positive(k, k + 1, n)
    }

    pub fn alpha(n: usize) -> Self {
        Self::simple(1, n).expect("rank at least 2")
    }

    pub fn beta(n: usize) -> Self {
        Self::simple(2, n).expect("rank at least 3")
    }

    pub fn gamma(n: usize) -> Self {
        Self::simple(3, n).expect("rank at least 4")
    }

    pub fn delta(n: usize) -> Self {
        Self::simple(4, n).expect("rank at least 5")
    }

    pub fn rank(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[i8] {
        &self.coords
    }

    /// The 1-based coordinates `(i, j)` of `e_i - e_j`.
    pub fn position(&self) -> (usize, usize) {
        let i = self.coords.iter().position(|&v| v == 1).unwrap_or(0);
        let j = self.coords.iter().position(|&v| v == -1).unwrap_or(0);
        (i + 1, j + 1)
    }
}

/// The signed antidiagonal matrix of the longest element: row `i` carries
/// `(-1)^{n-i}` in column `n + 1 - i`, so the bottom-left entry is 1 and the
/// determinant is 1.
pub fn long_word_matrix(n: usize) -> Result<IntMatrix> {
    if n < 2 {
        return Err(Error::BadRank(n));
    }
    Ok(Matrix::from_fn(n, |r, c| {
        if r + c + 1 == n {
            if (n - 1 - r).is_multiple_of(2) {
                BigInt::one()
            } else {
                -BigInt::one()
            }
        } else {
            BigInt::zero()
        }
    }))
}

/// The sign `(-1)^{n-i}` of the long-word entry in row `i` (1-based).
pub fn long_word_sign(n: usize, i: usize) -> i64 {
    if (n - i).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// The identity of size `root.rank()` with `g` placed on rows and columns
/// `(i, j)` of the root `e_i - e_j`.
pub fn embed<T: Scalar>(root: &RootLabel, g: &Matrix<T>) -> Result<Matrix<T>> {
    if g.size() != 2 {
        return Err(Error::SizeMismatch {
            left: 2,
            right: g.size(),
        });
    }
    let n = root.rank();
    let (i, j) = root.position();
    let (i, j) = (i - 1, j - 1);
    let mut out = Matrix::<T>::identity(n);
    out[(i, i)] = g[(0, 0)].clone();
    out[(i, j)] = g[(0, 1)].clone();
    out[(j, i)] = g[(1, 0)].clone();
    out[(j, j)] = g[(1, 1)].clone();
    Ok(out)
}

/// [`embed`] with an explicit target rank, rejecting roots of another rank.
pub fn embed_in<T: Scalar>(root: &RootLabel, g: &Matrix<T>, n: usize) -> Result<Matrix<T>> {
    if root.rank() != n {
        return Err(Error::BadRoot {
            rank: n,
            detail: format!("root {:?} has rank {}", root.coords(), root.rank()),
        });
    }
    embed(root, g)
}

/// `[[0, -1], [1, 0]]`.
pub fn rotation() -> IntMatrix {
    IntMatrix::from_i64_rows(&[&[0, -1], &[1, 0]]).expect("2x2 literal")
}

/// The signed simple reflection `s_k` of rank `n`.
pub fn s_matrix(k: usize, n: usize) -> Result<IntMatrix> {
    if n < 2 {
        return Err(Error::BadRank(n));
    }
    if k == 0 || k >= n {
        return Err(Error::BadLetter { letter: k, rank: n });
    }
    embed(&RootLabel::simple(k, n)?, &rotation())
}

/// Product of the signed simple reflections in word order.
pub fn word_to_matrix(word: &ReducedWord, n: usize) -> Result<IntMatrix> {
    if n < 2 {
        return Err(Error::BadRank(n));
    }
    let mut acc = IntMatrix::identity(n);
    for &l in word.letters() {
        acc = acc.mat_mul(&s_matrix(l, n)?)?;
    }
    Ok(acc)
}

/// The permutation underlying a signed monomial matrix (entries in {0, ±1},
/// one nonzero per row and column).
pub fn forget_signs(m: &IntMatrix) -> Result<Permutation> {
    let n = m.size();
    let mut images = Vec::with_capacity(n);
    for c in 0..n {
        let rows: Vec<usize> = (0..n).filter(|&r| !m[(r, c)].is_zero()).collect();
        if rows.len() != 1 || !m[(rows[0], c)].abs().is_one() {
            return Err(Error::Unsupported(String::from(
                "matrix is not a signed permutation matrix",
            )));
        }
        images.push(rows[0] + 1);
    }
    Permutation::new(images)
}
