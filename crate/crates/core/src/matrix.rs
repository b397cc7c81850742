//! Exact square matrices over `BigInt` and `Rational`, with the minor
//! convention `M_{I,J}` = determinant of the submatrix on rows `I` and
//! columns `J` (both 1-based, strictly increasing).

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::exactnum::Rational;
use crate::{Error, Result};

/// Operations every entry type supports.
pub trait Scalar:
    Clone
    + PartialEq
    + Zero
    + One
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
{
}

impl Scalar for BigInt {}
impl Scalar for Rational {}

/// A dense `n × n` matrix stored row-major.
///
/// `m[(r, c)]` indexes from 0; [`Matrix::entry`] takes the 1-based `(i, j)`
/// used in formulas.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

pub type IntMatrix = Matrix<BigInt>;
pub type RatMatrix = Matrix<Rational>;

impl<T> Matrix<T> {
    pub fn size(&self) -> usize {
        self.n
    }

    /// Builds from rows; every row must have length `rows.len()`.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::SizeMismatch {
                    left: n,
                    right: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(Matrix { n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                data.push(f(r, c));
            }
        }
        Matrix { n, data }
    }

    /// 1-based entry access. Panics when out of range.
    pub fn entry(&self, i: usize, j: usize) -> &T {
        &self[(i - 1, j - 1)]
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.n..(r + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks(self.n)
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix {
            n: self.n,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<T>>
    where
        T: Clone,
    {
        self.rows().map(|r| r.to_vec()).collect()
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        assert!(r < self.n && c < self.n, "matrix index out of range");
        &self.data[r * self.n + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        assert!(r < self.n && c < self.n, "matrix index out of range");
        &mut self.data[r * self.n + c]
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |r, c| if r == c { T::one() } else { T::zero() })
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_fn(n, |_, _| T::zero())
    }

    pub fn diagonal(values: &[T]) -> Self {
        Self::from_fn(values.len(), |r, c| {
            if r == c {
                values[r].clone()
            } else {
                T::zero()
            }
        })
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |r, c| self[(c, r)].clone())
    }

    /// Exact product.
    pub fn mat_mul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::SizeMismatch {
                left: self.n,
                right: other.n,
            });
        }
        let n = self.n;
        Ok(Self::from_fn(n, |r, c| {
            let mut acc = T::zero();
            for k in 0..n {
                let a = &self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                acc = acc + &(a.clone() * &other[(k, c)]);
            }
            acc
        }))
    }

    /// Product of a non-empty sequence of equally sized matrices.
    pub fn product<'a>(factors: impl IntoIterator<Item = &'a Self>) -> Result<Self>
    where
        T: 'a,
    {
        let mut iter = factors.into_iter();
        let first = iter.next().ok_or(Error::EmptyInput)?.clone();
        iter.try_fold(first, |acc, m| acc.mat_mul(m))
    }

    pub fn scale(&self, k: &T) -> Self {
        self.map(|v| v.clone() * k)
    }

    /// Upper triangular with unit diagonal.
    pub fn is_unipotent_upper(&self) -> bool {
        (0..self.n).all(|r| {
            (0..self.n).all(|c| {
                let v = &self[(r, c)];
                match r.cmp(&c) {
                    core::cmp::Ordering::Equal => v.is_one(),
                    core::cmp::Ordering::Greater => v.is_zero(),
                    core::cmp::Ordering::Less => true,
                }
            })
        })
    }

    /// Submatrix on the selected rows and columns.
    pub fn submatrix(&self, idx: &IndexPair) -> Result<Self> {
        idx.check_bound(self.n)?;
        let k = idx.rows.len();
        Ok(Self::from_fn(k, |r, c| {
            self[(idx.rows[r] - 1, idx.cols[c] - 1)].clone()
        }))
    }
}

impl IntMatrix {
    pub fn from_i64_rows(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
                .collect(),
        )
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> BigInt {
        let n = self.n;
        let mut m: Vec<Vec<BigInt>> = self.to_rows();
        let mut sign = false;
        let mut prev = BigInt::one();
        for k in 0..n {
            if m[k][k].is_zero() {
                match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                    Some(r) => {
                        m.swap(k, r);
                        sign = !sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                    m[i][j] = v / &prev;
                }
            }
            prev = m[k][k].clone();
        }
        let d = m[n - 1][n - 1].clone();
        if sign {
            -d
        } else {
            d
        }
    }

    /// `M_{I,J}`.
    pub fn minor(&self, idx: &IndexPair) -> Result<BigInt> {
        Ok(self.submatrix(idx)?.det())
    }

    pub fn to_rational(&self) -> RatMatrix {
        self.map(|v| Rational::from_integer(v.clone()))
    }
}

impl RatMatrix {
    /// Determinant by Gaussian elimination over the rationals.
    pub fn det(&self) -> Rational {
        let n = self.n;
        let mut m: Vec<Vec<Rational>> = self.to_rows();
        let mut det = Rational::one();
        for k in 0..n {
            let Some(p) = (k..n).find(|&r| !m[r][k].is_zero()) else {
                return Rational::zero();
            };
            if p != k {
                m.swap(k, p);
                det = -det;
            }
            let pivot = m[k][k].clone();
            det *= &pivot;
            for i in k + 1..n {
                if m[i][k].is_zero() {
                    continue;
                }
                let factor = &m[i][k] / &pivot;
                for j in k..n {
                    let v = &m[k][j] * &factor;
                    m[i][j] -= v;
                }
            }
        }
        det
    }

    pub fn minor(&self, idx: &IndexPair) -> Result<Rational> {
        Ok(self.submatrix(idx)?.det())
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|v| v.is_integer())
    }

    /// The integer matrix with the same entries, if every entry is integral.
    pub fn to_integer(&self) -> Option<IntMatrix> {
        if !self.is_integral() {
            return None;
        }
        Some(self.map(|v| v.to_integer()))
    }
}

/// Row and column selections for a minor; both strictly increasing, 1-based,
/// non-empty, of equal size.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IndexPair {
    rows: Vec<usize>,
    cols: Vec<usize>,
}

impl IndexPair {
    pub fn new(rows: Vec<usize>, cols: Vec<usize>) -> Result<Self> {
        if rows.len() != cols.len() {
            return Err(Error::BadIndexSet(format!(
                "row set {:?} and column set {:?} differ in size",
                rows, cols
            )));
        }
        for set in [&rows, &cols] {
            if set.is_empty() {
                return Err(Error::BadIndexSet(String::from("empty index set")));
            }
            if set[0] == 0 || set.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::BadIndexSet(format!(
                    "{:?} is not a strictly increasing set of 1-based indices",
                    set
                )));
            }
        }
        Ok(IndexPair { rows, cols })
    }

    /// `IndexPair::digits("234", "123")` selects rows 2,3,4 and columns 1,2,3.
    pub fn digits(rows: &str, cols: &str) -> Result<Self> {
        fn parse(s: &str) -> Result<Vec<usize>> {
            s.chars()
                .map(|ch| {
                    ch.to_digit(10)
                        .map(|d| d as usize)
                        .ok_or_else(|| Error::BadIndexSet(format!("bad index digit {:?}", ch)))
                })
                .collect()
        }
        Self::new(parse(rows)?, parse(cols)?)
    }

    /// Both sets equal to `{1..n}`.
    pub fn full(n: usize) -> Self {
        let all: Vec<usize> = (1..=n).collect();
        IndexPair {
            rows: all.clone(),
            cols: all,
        }
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    fn check_bound(&self, n: usize) -> Result<()> {
        let max = self
            .rows
            .iter()
            .chain(&self.cols)
            .copied()
            .max()
            .unwrap_or(0);
        if max > n {
            return Err(Error::BadIndexSet(format!(
                "index {} exceeds matrix size {}",
                max, n
            )));
        }
        Ok(())
    }
}

/// Shorthand for `M_{I,J}` with digit-string index sets. Panics on malformed
/// sets, so only use it with literal indices.
pub fn minor_digits(a: &IntMatrix, rows: &str, cols: &str) -> BigInt {
    let idx = IndexPair::digits(rows, cols).expect("literal index set");
    a.minor(&idx).expect("literal index set within bounds")
}

impl<T: fmt::Display> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (r, row) in self.data.chunks(self.n).enumerate() {
            if r > 0 {
                writeln!(f)?;
            }
            write!(f, "[")?;
            for (c, v) in row.iter().enumerate() {
                if c > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", v)?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.data.chunks(self.n)).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_i64_rows(rows).unwrap()
    }

    fn w0_4() -> IntMatrix {
        m(&[&[0, 0, 0, -1], &[0, 0, 1, 0], &[0, -1, 0, 0], &[1, 0, 0, 0]])
    }

    /// Leibniz expansion over all permutations.
    fn leibniz(a: &IntMatrix) -> BigInt {
        fn perms(n: usize) -> Vec<Vec<usize>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for p in perms(n - 1) {
                for pos in 0..n {
                    let mut q = p.clone();
                    q.insert(pos, n - 1);
                    out.push(q);
                }
            }
            out
        }
        let n = a.size();
        let mut total = BigInt::zero();
        for p in perms(n) {
            let inversions = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .filter(|&(i, j)| p[i] > p[j])
                .count();
            let mut term = BigInt::one();
            for (r, &c) in p.iter().enumerate() {
                term *= &a[(r, c)];
            }
            if inversions % 2 == 1 {
                term = -term;
            }
            total += term;
        }
        total
    }

    #[test]
    fn det_examples() {
        assert_eq!(IntMatrix::identity(4).det(), BigInt::one());
        assert_eq!(w0_4().det(), BigInt::one());
        assert_eq!(leibniz(&w0_4()), BigInt::one());
        assert_eq!(m(&[&[0, -1], &[1, 0]]).det(), BigInt::one());
        assert_eq!(w0_4().to_rational().det(), Rational::one());
    }

    #[test]
    fn minor_selects_rows_and_columns() {
        let a = m(&[
            &[1, 2, 3, 4],
            &[5, 6, 7, 8],
            &[9, 10, 11, 13],
            &[2, 0, 1, 7],
        ]);
        // rows 2..4, columns 1..3
        let sub = m(&[&[5, 6, 7], &[9, 10, 11], &[2, 0, 1]]);
        assert_eq!(minor_digits(&a, "234", "123"), sub.det());
        assert_eq!(minor_digits(&a, "34", "12"), BigInt::from(-20));
        let id = IntMatrix::identity(4);
        assert_eq!(minor_digits(&id, "123", "123"), BigInt::one());
        assert_eq!(minor_digits(&id, "234", "123"), BigInt::zero());
    }

    #[test]
    fn bad_index_sets() {
        assert!(matches!(
            IndexPair::new(vec![2, 1], vec![1, 2]),
            Err(Error::BadIndexSet(_))
        ));
        assert!(matches!(
            IndexPair::new(vec![1], vec![1, 2]),
            Err(Error::BadIndexSet(_))
        ));
        assert!(matches!(
            IndexPair::new(vec![0, 1], vec![1, 2]),
            Err(Error::BadIndexSet(_))
        ));
        let idx = IndexPair::new(vec![1, 5], vec![1, 2]).unwrap();
        assert!(matches!(
            IntMatrix::identity(4).minor(&idx),
            Err(Error::BadIndexSet(_))
        ));
    }

    #[test]
    fn mat_mul_examples() {
        let a = w0_4();
        assert_eq!(IntMatrix::identity(4).mat_mul(&a).unwrap(), a);
        let s_alpha = m(&[&[0, -1, 0, 0], &[1, 0, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 1]]);
        let sq = s_alpha.mat_mul(&s_alpha).unwrap();
        assert_eq!(
            sq,
            m(&[&[-1, 0, 0, 0], &[0, -1, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 1]])
        );
        assert_eq!(
            IntMatrix::identity(3).mat_mul(&IntMatrix::identity(4)),
            Err(Error::SizeMismatch { left: 3, right: 4 })
        );
    }

    #[test]
    fn integrality_conversion() {
        let r = w0_4().to_rational();
        assert_eq!(r.to_integer().unwrap(), w0_4());
        let mut half = r.clone();
        half[(0, 0)] = crate::exactnum::rat(1, 2);
        assert!(half.to_integer().is_none());
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn small4() -> impl Strategy<Value = IntMatrix> {
        proptest::collection::vec(-9i64..=9, 16)
            .prop_map(|v| IntMatrix::from_fn(4, |r, c| BigInt::from(v[4 * r + c])))
    }

    /// Products of elementary matrices land in SL4(Z).
    fn sl4() -> impl Strategy<Value = IntMatrix> {
        proptest::collection::vec((0usize..4, 0usize..4, -3i64..=3), 1..16).prop_map(|ops| {
            let mut a = IntMatrix::identity(4);
            for (i, j, k) in ops {
                if i != j {
                    // row_i += k * row_j
                    for c in 0..4 {
                        let v = &a[(j, c)] * BigInt::from(k);
                        a[(i, c)] += v;
                    }
                }
            }
            a
        })
    }

    proptest! {
        #[test]
        fn det_is_multiplicative(a in small4(), b in small4()) {
            prop_assert_eq!(a.mat_mul(&b).unwrap().det(), a.det() * b.det());
        }

        #[test]
        fn full_minor_is_det(a in small4()) {
            prop_assert_eq!(a.minor(&IndexPair::full(4)).unwrap(), a.det());
            prop_assert_eq!(a.to_rational().det(), Rational::from_integer(a.det()));
        }

        #[test]
        fn laplace_along_last_row(a in sl4()) {
            let mut total = BigInt::zero();
            for j in 1..=4usize {
                let cols: Vec<usize> = (1..=4).filter(|&c| c != j).collect();
                let idx = IndexPair::new(alloc::vec![1, 2, 3], cols).unwrap();
                let cof = a.entry(4, j) * a.minor(&idx).unwrap();
                if (4 + j) % 2 == 0 { total += cof } else { total -= cof }
            }
            prop_assert_eq!(total, BigInt::one());
        }
    }
}
