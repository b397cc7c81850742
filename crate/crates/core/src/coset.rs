//! Exhaustive enumeration of `U(Z) \ Ω(c) / U(Z)`: the integral matrices
//! `A = u_L · w0 · t(c) · u_R` whose unipotent factors have every entry above
//! the diagonal in `[0, 1)`.
//!
//! Each such `A` is the normal form of exactly one double coset, so the
//! representatives are in bijection with the cosets. The search fixes `A`
//! one column at a time. Column `j` of `A` depends on column `j` of `u_R`
//! and on `u_L` entries `(i, l)` with `l ≥ n-1-j` (0-based), and every
//! entry of the column is affine in exactly one still-unknown coordinate
//! with a nonzero coefficient `α`. For that coordinate `z ∈ [0, 1)` the
//! admissible values are `z = (k - β) / α` for the integers `k` in
//! `[β, β + α)` (or `(β + α, β]`), and `A_ij = k`. Integrality therefore
//! prunes the tree at every step, and the leaves are exactly the
//! representatives.
//!
//! Arithmetic runs in checked `Ratio<i128>`; a shard that overflows is
//! recomputed in `BigRational`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, ToPrimitive, Zero};

use crate::exactnum::{Phase, PhaseSum, Rational};
use crate::matrix::{IntMatrix, Matrix, RatMatrix};
use crate::weyl::long_word_matrix;
use crate::{Error, Result};

/// Default cap on explored search nodes.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// A shared node counter. Exceeding `limit` aborts every enumeration that
/// draws from it.
#[derive(Debug)]
pub struct Budget {
    limit: u64,
    used: AtomicU64,
}

impl Budget {
    pub fn new(limit: u64) -> Self {
        Budget {
            limit,
            used: AtomicU64::new(0),
        }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn used(&self) -> u64 {
        self.used.load(Ordering::Relaxed)
    }

    fn charge(&self, nodes: u64) -> Result<()> {
        let total = self.used.fetch_add(nodes, Ordering::Relaxed) + nodes;
        if total > self.limit {
            return Err(Error::BudgetExceeded { budget: self.limit });
        }
        Ok(())
    }

    fn refund(&self, nodes: u64) {
        self.used.fetch_sub(nodes, Ordering::Relaxed);
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(DEFAULT_BUDGET)
    }
}

/// The columns of `A` fixed so far, handed to pruning filters.
#[derive(Clone, Copy, Debug)]
pub struct ColumnView<'a> {
    n: usize,
    columns: usize,
    data: &'a [i128],
}

impl ColumnView<'_> {
    pub fn size(&self) -> usize {
        self.n
    }

    /// Number of leading columns already fixed.
    pub fn columns(&self) -> usize {
        self.columns
    }

    /// 0-based entry; only meaningful for `c < columns()`.
    pub fn get(&self, r: usize, c: usize) -> i128 {
        self.data[r * self.n + c]
    }

    pub fn to_int_matrix(&self) -> IntMatrix {
        Matrix::from_fn(self.n, |r, c| BigInt::from(self.get(r, c)))
    }
}

/// A pruning predicate: `accept(view)` is called whenever a column is
/// complete and must be monotone (rejecting a prefix rejects every
/// extension).
pub trait ColumnFilter: Sync {
    fn accept(&self, view: &ColumnView<'_>) -> bool;
}

/// Accepts everything.
pub struct NoFilter;

impl ColumnFilter for NoFilter {
    fn accept(&self, _: &ColumnView<'_>) -> bool {
        true
    }
}

impl<F: Fn(&ColumnView<'_>) -> bool + Sync> ColumnFilter for F {
    fn accept(&self, view: &ColumnView<'_>) -> bool {
        self(view)
    }
}

/// One double coset: its integral normal form and the superdiagonals of
/// its unipotent factors as numerators over the set's common denominator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Representative {
    pub matrix: Vec<i128>,
    pub left: Vec<i128>,
    pub right: Vec<i128>,
}

impl Representative {
    pub fn to_int_matrix(&self, n: usize) -> IntMatrix {
        Matrix::from_fn(n, |r, c| BigInt::from(self.matrix[r * n + c]))
    }
}

/// All normal forms found by one enumeration, in search order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepresentativeSet {
    n: usize,
    c: Vec<u64>,
    denominator: i128,
    reps: Vec<Representative>,
}

impl RepresentativeSet {
    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn moduli(&self) -> &[u64] {
        &self.c
    }

    /// `lcm(c)`; every superdiagonal entry is a multiple of its inverse.
    pub fn denominator(&self) -> i128 {
        self.denominator
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn representatives(&self) -> &[Representative] {
        &self.reps
    }

    /// Keeps the representatives satisfying `keep`.
    pub fn filtered(&self, mut keep: impl FnMut(&Representative) -> bool) -> RepresentativeSet {
        RepresentativeSet {
            n: self.n,
            c: self.c.clone(),
            denominator: self.denominator,
            reps: self.reps.iter().filter(|r| keep(r)).cloned().collect(),
        }
    }

    /// `Σ_reps e(ψ_m(u_L) + ψ_n(u_R))`.
    pub fn phase_sum(&self, m: &[i64], n: &[i64]) -> Result<PhaseSum> {
        let k = self.n - 1;
        if m.len() != k || n.len() != k {
            return Err(Error::SizeMismatch {
                left: k,
                right: if m.len() != k { m.len() } else { n.len() },
            });
        }
        let q = self.denominator;
        let mr: Vec<i128> = m.iter().map(|&v| i128::from(v).rem_euclid(q)).collect();
        let nr: Vec<i128> = n.iter().map(|&v| i128::from(v).rem_euclid(q)).collect();
        let mut counts: BTreeMap<i128, i64> = BTreeMap::new();
        for rep in &self.reps {
            let mut acc: i128 = 0;
            for i in 0..k {
                acc = (acc + mr[i] * rep.left[i] % q + nr[i] * rep.right[i] % q) % q;
            }
            *counts.entry(acc).or_insert(0) += 1;
        }
        let den = BigInt::from(q);
        Ok(counts
            .into_iter()
            .map(|(r, mult)| (Phase::from_fraction(BigInt::from(r), den.clone()), mult))
            .collect())
    }

    /// Merges shard outputs in the given order.
    pub fn concat(parts: Vec<RepresentativeSet>) -> Result<RepresentativeSet> {
        let mut iter = parts.into_iter();
        let mut first = iter.next().ok_or(Error::EmptyInput)?;
        for p in iter {
            if p.n != first.n || p.c != first.c {
                return Err(Error::InternalInconsistency(String::from(
                    "merging representative sets of different moduli",
                )));
            }
            first.reps.extend(p.reps);
        }
        Ok(first)
    }
}

#[derive(Clone, Copy, Debug)]
enum Step {
    /// `u_R(k, j)` via row `i = n-1-k`.
    SolveRight { i: usize, k: usize, j: usize },
    /// Row `i = n-1-j`: no unknowns left.
    Check { i: usize, j: usize },
    /// `u_L(i, l)` with `l = n-1-j`.
    SolveLeft { i: usize, l: usize, j: usize },
}

impl Step {
    fn cell(&self) -> (usize, usize) {
        match *self {
            Step::SolveRight { i, j, .. } | Step::Check { i, j } | Step::SolveLeft { i, j, .. } => {
                (i, j)
            }
        }
    }
}

/// Enumerator of `U(Z) \ Ω(c) / U(Z)` for positive `c` of length `n - 1`.
#[derive(Clone, Debug)]
pub struct CosetEnumerator {
    n: usize,
    c: Vec<u64>,
    signs: Vec<i128>,
    steps: Vec<Step>,
    first_solve: usize,
}

impl CosetEnumerator {
    pub fn new(c: &[u64]) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(&bad) = c.iter().find(|&&v| v == 0) {
            return Err(Error::NonPositive(BigInt::from(bad)));
        }
        let n = c.len() + 1;
        let w = long_word_matrix(n)?;
        let signs = (0..n)
            .map(|i| w[(i, n - 1 - i)].to_i128().unwrap_or(1))
            .collect();
        let mut steps = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in (0..n).rev() {
                steps.push(match (i + j + 1).cmp(&n) {
                    core::cmp::Ordering::Greater => Step::SolveRight { i, k: n - 1 - i, j },
                    core::cmp::Ordering::Equal => Step::Check { i, j },
                    core::cmp::Ordering::Less => Step::SolveLeft { i, l: n - 1 - j, j },
                });
            }
        }
        let first_solve = steps
            .iter()
            .position(|s| !matches!(s, Step::Check { .. }))
            .expect("rank at least 2 has a free coordinate");
        Ok(CosetEnumerator {
            n,
            c: c.to_vec(),
            signs,
            steps,
            first_solve,
        })
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn moduli(&self) -> &[u64] {
        &self.c
    }

    /// Number of independent shards: the choices for the first free
    /// coordinate, `u_L(n-2, n-1) ∈ {0, 1/c_1, …}`.
    pub fn shard_count(&self) -> usize {
        self.c[0] as usize
    }

    fn denominator(&self) -> i128 {
        self.c.iter().fold(1i128, |acc, &v| acc.lcm(&i128::from(v)))
    }

    fn empty_set(&self) -> RepresentativeSet {
        RepresentativeSet {
            n: self.n,
            c: self.c.clone(),
            denominator: self.denominator(),
            reps: Vec::new(),
        }
    }

    /// Every representative, shard by shard.
    pub fn enumerate(
        &self,
        filter: &dyn ColumnFilter,
        budget: &Budget,
    ) -> Result<RepresentativeSet> {
        let parts = (0..self.shard_count())
            .map(|s| self.enumerate_shard(s, filter, budget))
            .collect::<Result<Vec<_>>>()?;
        RepresentativeSet::concat(parts)
    }

    /// The representatives whose first free coordinate takes its
    /// `shard`-th admissible value.
    pub fn enumerate_shard(
        &self,
        shard: usize,
        filter: &dyn ColumnFilter,
        budget: &Budget,
    ) -> Result<RepresentativeSet> {
        let mut out = self.empty_set();
        let mut nodes = 0u64;
        match self.run::<Ratio<i128>>(shard, filter, budget, &mut nodes, &mut out.reps) {
            Ok(()) => return Ok(out),
            Err(Abort::Error(e)) => return Err(e),
            Err(Abort::Overflow) => {}
        }
        budget.refund(nodes);
        out.reps.clear();
        let mut nodes = 0u64;
        match self.run::<Rational>(shard, filter, budget, &mut nodes, &mut out.reps) {
            Ok(()) => Ok(out),
            Err(Abort::Error(e)) => Err(e),
            Err(Abort::Overflow) => Err(Error::Unsupported(String::from(
                "matrix entries exceed the 128-bit range",
            ))),
        }
    }

    fn run<F: Field>(
        &self,
        shard: usize,
        filter: &dyn ColumnFilter,
        budget: &Budget,
        nodes: &mut u64,
        out: &mut Vec<Representative>,
    ) -> Result<(), Abort> {
        let n = self.n;
        let mut t = Vec::with_capacity(n);
        let mut prev = 1i128;
        for &v in &self.c {
            t.push(F::frac(i128::from(v), prev)?);
            prev = i128::from(v);
        }
        t.push(F::frac(1, prev)?);
        let mut search = Search {
            en: self,
            t,
            a: vec![F::zero(); n * n],
            b: vec![F::zero(); n * n],
            w: vec![F::zero(); n * n],
            mat: vec![0i128; n * n],
            shard,
            filter,
            budget,
            nodes,
            pending: 0,
            denominator: self.denominator(),
            out,
        };
        let r = search.dfs(0);
        let pending = search.pending;
        *search.nodes += pending;
        r?;
        budget.charge(pending).map_err(Abort::Error)
    }
}

enum Abort {
    Overflow,
    Error(Error),
}

impl From<Overflow> for Abort {
    fn from(_: Overflow) -> Self {
        Abort::Overflow
    }
}

struct Overflow;

/// Exact field operations with overflow reporting.
trait Field: Clone {
    fn zero() -> Self;
    fn frac(n: i128, d: i128) -> Result<Self, Overflow>;
    fn add(&self, o: &Self) -> Result<Self, Overflow>;
    fn sub(&self, o: &Self) -> Result<Self, Overflow>;
    fn mul(&self, o: &Self) -> Result<Self, Overflow>;
    fn div(&self, o: &Self) -> Result<Self, Overflow>;
    fn from_int(v: i128) -> Self;
    fn ceil_int(&self) -> Result<i128, Overflow>;
    fn floor_int(&self) -> Result<i128, Overflow>;
    fn as_int(&self) -> Option<i128>;
    fn positive(&self) -> bool;
    fn is_zero(&self) -> bool;
    fn scaled_int(&self, q: i128) -> Option<i128>;
}

impl Field for Ratio<i128> {
    fn zero() -> Self {
        Zero::zero()
    }
    fn frac(n: i128, d: i128) -> Result<Self, Overflow> {
        Ok(Ratio::new(n, d))
    }
    fn add(&self, o: &Self) -> Result<Self, Overflow> {
        self.checked_add(o).ok_or(Overflow)
    }
    fn sub(&self, o: &Self) -> Result<Self, Overflow> {
        self.checked_sub(o).ok_or(Overflow)
    }
    fn mul(&self, o: &Self) -> Result<Self, Overflow> {
        self.checked_mul(o).ok_or(Overflow)
    }
    fn div(&self, o: &Self) -> Result<Self, Overflow> {
        self.checked_div(o).ok_or(Overflow)
    }
    fn from_int(v: i128) -> Self {
        Ratio::from_integer(v)
    }
    fn ceil_int(&self) -> Result<i128, Overflow> {
        Ok(self.numer().div_ceil(self.denom()))
    }
    fn floor_int(&self) -> Result<i128, Overflow> {
        Ok(self.numer().div_floor(self.denom()))
    }
    fn as_int(&self) -> Option<i128> {
        self.is_integer().then(|| *self.numer())
    }
    fn positive(&self) -> bool {
        self.is_positive()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn scaled_int(&self, q: i128) -> Option<i128> {
        let (num, den) = (self.numer(), self.denom());
        if q % den != 0 {
            return None;
        }
        i128::checked_mul(*num, q / den)
    }
}

impl Field for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn frac(n: i128, d: i128) -> Result<Self, Overflow> {
        Ok(Rational::new(BigInt::from(n), BigInt::from(d)))
    }
    fn add(&self, o: &Self) -> Result<Self, Overflow> {
        Ok(self + o)
    }
    fn sub(&self, o: &Self) -> Result<Self, Overflow> {
        Ok(self - o)
    }
    fn mul(&self, o: &Self) -> Result<Self, Overflow> {
        Ok(self * o)
    }
    fn div(&self, o: &Self) -> Result<Self, Overflow> {
        Ok(self / o)
    }
    fn from_int(v: i128) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn ceil_int(&self) -> Result<i128, Overflow> {
        self.ceil().to_integer().to_i128().ok_or(Overflow)
    }
    fn floor_int(&self) -> Result<i128, Overflow> {
        self.floor().to_integer().to_i128().ok_or(Overflow)
    }
    fn as_int(&self) -> Option<i128> {
        if self.is_integer() {
            self.to_integer().to_i128()
        } else {
            None
        }
    }
    fn positive(&self) -> bool {
        self.is_positive()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn scaled_int(&self, q: i128) -> Option<i128> {
        let v = self * Rational::from_integer(BigInt::from(q));
        if v.is_integer() {
            v.to_integer().to_i128()
        } else {
            None
        }
    }
}

struct Search<'a, F: Field> {
    en: &'a CosetEnumerator,
    t: Vec<F>,
    a: Vec<F>,
    b: Vec<F>,
    /// `w[l][j] = s_l · t_{n-1-l} · u_R(n-1-l, j)`, kept per column so
    /// backtracking never reads a later column's values.
    w: Vec<F>,
    mat: Vec<i128>,
    shard: usize,
    filter: &'a dyn ColumnFilter,
    budget: &'a Budget,
    nodes: &'a mut u64,
    pending: u64,
    denominator: i128,
    out: &'a mut Vec<Representative>,
}

impl<F: Field> Search<'_, F> {
    fn tick(&mut self) -> Result<(), Abort> {
        self.pending += 1;
        if self.pending == 4096 {
            *self.nodes += self.pending;
            let p = core::mem::take(&mut self.pending);
            self.budget.charge(p).map_err(Abort::Error)?;
        }
        Ok(())
    }

    /// `Σ_{l > from} a[i][l] · w[l][j]`.
    fn row_tail(&self, i: usize, j: usize, from: usize) -> Result<F, Overflow> {
        let n = self.en.n;
        let mut acc = F::zero();
        for l in from + 1..n {
            let w = &self.w[l * n + j];
            if w.is_zero() || self.a[i * n + l].is_zero() {
                continue;
            }
            acc = acc.add(&self.a[i * n + l].mul(w)?)?;
        }
        Ok(acc)
    }

    fn dfs(&mut self, s: usize) -> Result<(), Abort> {
        let n = self.en.n;
        if s == self.en.steps.len() {
            return self.emit();
        }
        match self.en.steps[s] {
            Step::Check { i, j } => {
                let sign = F::from_int(self.en.signs[i]);
                self.w[i * n + j] = sign.mul(&self.t[j])?;
                let v = self.w[i * n + j].add(&self.row_tail(i, j, i)?)?;
                let Some(k) = v.as_int() else {
                    return Ok(());
                };
                self.mat[i * n + j] = k;
                self.after(s, i, j)
            }
            Step::SolveRight { i, k, j } => {
                let alpha = F::from_int(self.en.signs[i]).mul(&self.t[k])?;
                let beta = self.row_tail(i, j, i)?;
                self.solve(s, &alpha, &beta, |me, z| {
                    me.w[i * n + j] = alpha.mul(z)?;
                    me.b[k * n + j] = z.clone();
                    Ok(())
                })
            }
            Step::SolveLeft { i, l, j } => {
                let alpha = self.w[l * n + j].clone();
                let beta = self.row_tail(i, j, l)?;
                self.w[i * n + j] = F::zero();
                self.solve(s, &alpha, &beta, |me, z| {
                    me.a[i * n + l] = z.clone();
                    Ok(())
                })
            }
        }
    }

    /// Runs `set(z)` and recurses for each `z ∈ [0, 1)` with `αz + β ∈ Z`.
    fn solve(
        &mut self,
        s: usize,
        alpha: &F,
        beta: &F,
        mut set: impl FnMut(&mut Self, &F) -> Result<(), Overflow>,
    ) -> Result<(), Abort> {
        let n = self.en.n;
        let (i, j) = self.en.steps[s].cell();
        let end = beta.add(alpha)?;
        let (lo, hi) = if alpha.positive() {
            (beta.ceil_int()?, end.ceil_int()? - 1)
        } else {
            (end.floor_int()? + 1, beta.floor_int()?)
        };
        for (idx, k) in (lo..=hi).enumerate() {
            if s == self.en.first_solve && idx != self.shard {
                continue;
            }
            self.tick()?;
            let z = F::from_int(k).sub(beta)?.div(alpha)?;
            set(self, &z)?;
            self.mat[i * n + j] = k;
            self.after(s, i, j)?;
        }
        Ok(())
    }

    fn after(&mut self, s: usize, i: usize, j: usize) -> Result<(), Abort> {
        if i == 0 {
            let view = ColumnView {
                n: self.en.n,
                columns: j + 1,
                data: &self.mat,
            };
            if !self.filter.accept(&view) {
                return Ok(());
            }
        }
        self.dfs(s + 1)
    }

    fn emit(&mut self) -> Result<(), Abort> {
        let n = self.en.n;
        let q = self.denominator;
        let scaled = |v: &F| -> Result<i128, Abort> {
            v.scaled_int(q).ok_or_else(|| {
                Abort::Error(Error::InternalInconsistency(format!(
                    "a unipotent entry is not a multiple of 1/{}",
                    q
                )))
            })
        };
        let mut left = Vec::with_capacity(n - 1);
        let mut right = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            left.push(scaled(&self.a[i * n + i + 1])?);
            right.push(scaled(&self.b[i * n + i + 1])?);
        }
        self.out.push(Representative {
            matrix: self.mat.clone(),
            left,
            right,
        });
        Ok(())
    }
}

/// Reference enumeration over the full grid: every `u_L(i, j) = k / c_{n-j+1}`
/// and `u_R(i, j) = k / c_i` with `0 ≤ k < c`, keeping the integral
/// products. Exponential in the number of coordinates, so only for tiny
/// moduli; `budget` caps the grid size.
pub fn enumerate_grid(c: &[u64], budget: u64) -> Result<Vec<IntMatrix>> {
    let n = c.len() + 1;
    let mut coords: Vec<(bool, usize, usize, u64)> = Vec::new();
    for i in 1..n {
        for j in i + 1..=n {
            coords.push((true, i, j, c[n - j]));
            coords.push((false, i, j, c[i - 1]));
        }
    }
    let size = coords
        .iter()
        .try_fold(1u64, |acc, &(_, _, _, m)| acc.checked_mul(m))
        .unwrap_or(u64::MAX);
    if size > budget {
        return Err(Error::BudgetExceeded { budget });
    }
    let moduli = crate::bruhat::ModuliVector::new(c.iter().map(|&v| BigInt::from(v)).collect())?;
    let wt = long_word_matrix(n)?
        .to_rational()
        .mat_mul(&moduli.t_matrix())?;
    let mut out = Vec::new();
    let mut digits = vec![0u64; coords.len()];
    loop {
        let mut ul = RatMatrix::identity(n);
        let mut ur = RatMatrix::identity(n);
        for (&(left, i, j, m), &k) in coords.iter().zip(&digits) {
            let v = Rational::new(BigInt::from(k), BigInt::from(m));
            if left {
                ul[(i - 1, j - 1)] = v;
            } else {
                ur[(i - 1, j - 1)] = v;
            }
        }
        let a = RatMatrix::product([&ul, &wt, &ur])?;
        if let Some(ai) = a.to_integer() {
            out.push(ai);
        }
        // odometer
        let mut pos = 0;
        loop {
            if pos == digits.len() {
                return Ok(out);
            }
            digits[pos] += 1;
            if digits[pos] < coords[pos].3 {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

/// `e(ψ_m(u_L) + ψ_n(u_R))` summed over explicit big-cell matrices, each
/// decomposed from its minors. Used to cross-check [`RepresentativeSet`].
pub fn phase_sum_of_matrices(mats: &[IntMatrix], m: &[i64], n: &[i64]) -> Result<PhaseSum> {
    let mut s = PhaseSum::new();
    for a in mats {
        let dec = crate::bruhat::decompose_any(a)?;
        s.add_term(crate::bruhat::coset_phase(&dec, m, n)?, 1);
    }
    Ok(s)
}
