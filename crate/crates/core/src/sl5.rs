//! Rank-5 fine cells: the ten-factor parametrization, its unipotent
//! factors, the character phase and a small-scale oracle.
//!
//! There is no closed form at this rank. Several entries of the unipotent
//! factors have no coordinate expression and are computed as minor
//! quotients of the built matrix.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;

use crate::bruhat::t_from_minors;
use crate::coset::{Budget, ColumnFilter, ColumnView, CosetEnumerator};
use crate::exactnum::{Phase, Rational};
use crate::matrix::{minor_digits, IntMatrix, RatMatrix};
use crate::sl4::{parse_list, GammaFactor, KloostermanResult, Method};
use crate::weyl::{embed, long_word_matrix, RootLabel};
use crate::{Error, Result};

fn big(v: u64) -> BigInt {
    BigInt::from(v)
}

fn q(num: BigInt, den: BigInt) -> Rational {
    Rational::new(num, den)
}

/// The rank-5 cell `(d1, …, d9, f)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sl5FineCellLabel {
    pub d: [u64; 9],
    pub f: u64,
}

impl Sl5FineCellLabel {
    pub fn new(d: [u64; 9], f: u64) -> Result<Self> {
        if d.contains(&0) || f == 0 {
            return Err(Error::NegativeCellData(format!("d = {:?}, f = {}", d, f)));
        }
        Ok(Sl5FineCellLabel { d, f })
    }

    pub fn trivial() -> Self {
        Sl5FineCellLabel { d: [1; 9], f: 1 }
    }

    /// `d_i`, 1-based.
    pub fn di(&self, i: usize) -> u64 {
        self.d[i - 1]
    }

    /// `(d7 d8 d9, d4 d5 d6 d8 d9, d2 d3 d5 d6 d9, d1 d3 d6)`.
    pub fn big_d(&self) -> [u64; 4] {
        let d = |i| self.di(i);
        [
            d(7) * d(8) * d(9),
            d(4) * d(5) * d(6) * d(8) * d(9),
            d(2) * d(3) * d(5) * d(6) * d(9),
            d(1) * d(3) * d(6),
        ]
    }

    pub fn moduli(&self) -> [u64; 4] {
        self.big_d().map(|v| v * self.f)
    }

    /// Number of parameters, `f` included, different from 1.
    pub fn nontrivial_count(&self) -> usize {
        self.d
            .iter()
            .chain(core::iter::once(&self.f))
            .filter(|&&v| v != 1)
            .count()
    }

    pub fn as_vec(&self) -> Vec<u64> {
        let mut v = self.d.to_vec();
        v.push(self.f);
        v
    }

    fn b(&self, i: usize) -> BigInt {
        big(self.di(i))
    }
}

impl fmt::Display for Sl5FineCellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.d {
            write!(f, "{},", v)?;
        }
        write!(f, "{}", self.f)
    }
}

impl FromStr for Sl5FineCellLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let v: Vec<u64> = parse_list(s)?;
        if v.len() != 10 {
            return Err(Error::Unsupported(format!(
                "a rank-5 cell needs ten entries d1..d9,f; got {:?}",
                s
            )));
        }
        Sl5FineCellLabel::new(core::array::from_fn(|i| v[i]), v[9])
    }
}

/// `u1..u4`, `v1..v4` of a rank-5 parametrization.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sl5AuxQuantities {
    pub u: [BigInt; 4],
    pub v: [BigInt; 4],
}

impl Sl5AuxQuantities {
    pub fn compute(cell: &Sl5FineCellLabel, g: &[GammaFactor; 10]) -> Self {
        let d = |i| cell.b(i);
        let x = |i: usize| &g[i - 1].x;
        let y = |i: usize| &g[i - 1].y;
        let u = [
            d(1) * x(2) + d(2) * x(3) * y(1),
            d(2) * x(4) + d(4) * x(5) * y(2),
            d(4) * x(7) + d(7) * x(8) * y(4),
            d(6) * x(9) * y(5) + d(9) * x(10) * y(6),
        ];
        let v = [
            d(1) * x(2) * y(3) + d(2) * y(1),
            d(2) * x(4) * y(5) + d(4) * y(2),
            d(4) * x(7) * y(8) + d(7) * y(4),
            d(6) * x(9) * y(10) + d(9) * x(5) * y(6),
        ];
        Sl5AuxQuantities { u, v }
    }
}

fn check_gammas(cell: &Sl5FineCellLabel, g: &[GammaFactor; 10]) -> Result<()> {
    for (i, gamma) in g.iter().enumerate() {
        let det = gamma.det();
        if !det.is_one() {
            return Err(Error::NotUnimodular { index: i + 1, det });
        }
        let expected = if i == 9 { big(cell.f) } else { cell.b(i + 1) };
        if gamma.d != expected {
            return Err(Error::CellMismatch {
                index: i + 1,
                expected,
                found: gamma.d.clone(),
            });
        }
    }
    Ok(())
}

/// `ι_α(γ1) ι_β(γ3) ι_α(γ2) ι_γ(γ6) ι_β(γ5) ι_α(γ4) ι_δ(γ10) ι_γ(γ9) ι_β(γ8) ι_α(γ7)`.
pub fn sl5_build_from_gammas(cell: &Sl5FineCellLabel, g: &[GammaFactor; 10]) -> Result<IntMatrix> {
    check_gammas(cell, g)?;
    let roots = [
        RootLabel::alpha(5),
        RootLabel::beta(5),
        RootLabel::gamma(5),
        RootLabel::delta(5),
    ];
    // (simple root index, factor index), both 0-based
    const WORD: [(usize, usize); 10] = [
        (0, 0),
        (1, 2),
        (0, 1),
        (2, 5),
        (1, 4),
        (0, 3),
        (3, 9),
        (2, 8),
        (1, 7),
        (0, 6),
    ];
    let factors = WORD
        .iter()
        .map(|&(r, k)| embed(&roots[r], &g[k].to_matrix()))
        .collect::<Result<Vec<_>>>()?;
    IntMatrix::product(&factors)
}

/// Random unimodular factors compatible with `cell`.
pub fn sl5_random_gammas<R: Rng + ?Sized>(
    cell: &Sl5FineCellLabel,
    bound: i64,
    rng: &mut R,
) -> [GammaFactor; 10] {
    core::array::from_fn(|i| {
        let d = if i == 9 { cell.f } else { cell.d[i] };
        GammaFactor::random(d, bound, rng)
    })
}

/// `u_L`, the torus and `u_R` of a built matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sl5Factors {
    pub u_left: RatMatrix,
    pub torus: Vec<Rational>,
    pub u_right: RatMatrix,
}

impl Sl5Factors {
    pub fn product(&self) -> RatMatrix {
        let w = long_word_matrix(5).expect("rank 5").to_rational();
        RatMatrix::product([
            &self.u_left,
            &w,
            &RatMatrix::diagonal(&self.torus),
            &self.u_right,
        ])
        .expect("5x5 factors")
    }
}

/// The unipotent factors with every entry that has a coordinate expression
/// written in the coordinates and the rest as minor quotients of the built
/// matrix. The `(3, 4)` entry of `u_L` has denominator `d4 d5 d6`.
pub fn sl5_unipotent_factors(cell: &Sl5FineCellLabel, g: &[GammaFactor; 10]) -> Result<Sl5Factors> {
    let a = sl5_build_from_gammas(cell, g)?;
    t_from_minors(&a)?;
    let d = |i| cell.b(i);
    let f = big(cell.f);
    let x = |i: usize| g[i - 1].x.clone();
    let y = |i: usize| g[i - 1].y.clone();
    let Sl5AuxQuantities { u, v } = Sl5AuxQuantities::compute(cell, g);
    let [u1, u2, u3, u4] = u;
    let [v1, v2, v3, v4] = v;
    let c: Vec<BigInt> = cell.moduli().iter().map(|&v| big(v)).collect();

    let mut ul = RatMatrix::identity(5);
    ul[(0, 1)] = q(x(1), d(1));
    ul[(0, 2)] = q(x(1) * &u1 - d(2) * x(3), d(1) * d(2) * d(3));
    ul[(0, 3)] = q(minor_digits(&a, "15", "12"), c[1].clone());
    ul[(0, 4)] = q(a[(0, 0)].clone(), c[0].clone());
    ul[(1, 2)] = q(u1.clone(), d(2) * d(3));
    ul[(1, 3)] = q(minor_digits(&a, "25", "12"), c[1].clone());
    ul[(1, 4)] = q(a[(1, 0)].clone(), c[0].clone());
    ul[(2, 3)] = q(d(3) * &u2 + d(4) * d(5) * x(6) * y(3), d(4) * d(5) * d(6));
    ul[(2, 4)] = q(a[(2, 0)].clone(), c[0].clone());
    ul[(3, 4)] = q(
        d(5) * d(6) * &u3 + d(7) * d(8) * &u4,
        d(7) * d(8) * d(9) * &f,
    );

    let mut ur = RatMatrix::identity(5);
    ur[(0, 1)] = q(y(7), d(7));
    ur[(0, 2)] = q(y(8), d(7) * d(8));
    ur[(0, 3)] = q(y(9), d(7) * d(8) * d(9));
    ur[(0, 4)] = q(y(10), d(7) * d(8) * d(9) * &f);
    ur[(1, 2)] = q(v3, d(4) * d(8));
    ur[(1, 3)] = q(
        d(5) * y(9) * &u3 + d(7) * d(8) * y(5),
        d(4) * d(5) * d(8) * d(9),
    );
    ur[(1, 4)] = q(minor_digits(&a, "45", "15"), c[1].clone());
    ur[(2, 3)] = q(d(8) * &v2 + d(2) * d(5) * x(8) * y(9), d(2) * d(5) * d(9));
    ur[(2, 4)] = q(minor_digits(&a, "345", "125"), c[2].clone());
    ur[(3, 4)] = q(
        d(5) * d(9) * &v1 + d(1) * d(3) * &v4,
        d(1) * d(3) * d(6) * &f,
    );

    let torus = vec![
        q(d(7) * d(8) * d(9) * &f, BigInt::one()),
        q(d(4) * d(5) * d(6), d(7)),
        q(d(2) * d(3), d(4) * d(8)),
        q(d(1), d(2) * d(5) * d(9)),
        q(BigInt::one(), d(1) * d(3) * d(6) * &f),
    ];
    let out = Sl5Factors {
        u_left: ul,
        torus,
        u_right: ur,
    };
    if out.product() != a.to_rational() {
        return Err(Error::InternalInconsistency(format!(
            "rank-5 factors do not reconstruct the built matrix for cell {}",
            cell
        )));
    }
    Ok(out)
}

/// How the `(4, 5)` superdiagonal entries are weighted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum PsiConvention {
    /// `ψ_n(u) = e(n1 u12 + n2 u23 + n3 u34 + n4 u45)`.
    #[default]
    Corrected,
    /// `ψ_n(u) = e(n1 u12 + n2 u23 + n3 u34 + n3 u45)`, ignoring `n4`.
    StrictPaper,
}

impl PsiConvention {
    /// The character vector that makes the standard pairing agree with this
    /// convention.
    pub fn effective(&self, n: &[i64; 4]) -> [i64; 4] {
        match self {
            PsiConvention::Corrected => *n,
            PsiConvention::StrictPaper => [n[0], n[1], n[2], n[2]],
        }
    }
}

/// The phase of `ψ_m(u_L) ψ_n(u_R)` from the coordinate expressions of the
/// superdiagonals.
pub fn sl5_character_phase(
    cell: &Sl5FineCellLabel,
    g: &[GammaFactor; 10],
    m: &[i64; 4],
    n: &[i64; 4],
    convention: PsiConvention,
) -> Phase {
    let (m, n) = (convention.effective(m), convention.effective(n));
    let d = |i| cell.b(i);
    let f = big(cell.f);
    let x = |i: usize| &g[i - 1].x;
    let y = |i: usize| &g[i - 1].y;
    let Sl5AuxQuantities { u, v } = Sl5AuxQuantities::compute(cell, g);
    let terms = [
        (m[0], q(x(1).clone(), d(1))),
        (m[1], q(u[0].clone(), d(2) * d(3))),
        (
            m[2],
            q(d(3) * &u[1] + d(4) * d(5) * x(6) * y(3), d(4) * d(5) * d(6)),
        ),
        (
            m[3],
            q(
                d(5) * d(6) * &u[2] + d(7) * d(8) * &u[3],
                d(7) * d(8) * d(9) * &f,
            ),
        ),
        (n[0], q(y(7).clone(), d(7))),
        (n[1], q(v[2].clone(), d(4) * d(8))),
        (
            n[2],
            q(d(8) * &v[1] + d(2) * d(5) * x(8) * y(9), d(2) * d(5) * d(9)),
        ),
        (
            n[3],
            q(
                d(5) * d(9) * &v[0] + d(1) * d(3) * &v[3],
                d(1) * d(3) * d(6) * &f,
            ),
        ),
    ];
    let mut acc = Rational::zero();
    for (k, r) in terms {
        acc += r * Rational::from_integer(BigInt::from(k));
    }
    Phase::new(acc)
}

/// Restricts `Ω(c)` to `gcd(A51, …, A54) = f`.
pub struct BottomRowGcdFilter {
    f: i128,
}

impl BottomRowGcdFilter {
    pub fn new(f: u64) -> Self {
        BottomRowGcdFilter { f: i128::from(f) }
    }
}

impl ColumnFilter for BottomRowGcdFilter {
    fn accept(&self, v: &ColumnView<'_>) -> bool {
        let n = v.size();
        if v.columns() != n - 1 {
            return true;
        }
        let g = (0..n - 1).fold(0i128, |g, c| g.gcd(&v.get(n - 1, c)));
        g == self.f
    }
}

/// Largest number of non-unit parameters the rank-5 oracle accepts.
pub const SL5_MAX_NONTRIVIAL: usize = 2;

/// The fine sum over `Ω(D1, D2, D3, D4, f)` with `D` read off `cell`: every
/// double coset with corner minors `(D1 f, …, D4 f)` and bottom-row gcd `f`.
pub fn sl5_fine_sum_oracle(
    cell: &Sl5FineCellLabel,
    m: &[i64; 4],
    n: &[i64; 4],
    convention: PsiConvention,
    budget: &Budget,
) -> Result<KloostermanResult> {
    if cell.nontrivial_count() > SL5_MAX_NONTRIVIAL {
        return Err(Error::Unsupported(format!(
            "rank-5 oracle takes at most {} non-unit parameters, cell {} has {}",
            SL5_MAX_NONTRIVIAL,
            cell,
            cell.nontrivial_count()
        )));
    }
    let c = cell.moduli();
    let reps = CosetEnumerator::new(&c)?.enumerate(&BottomRowGcdFilter::new(cell.f), budget)?;
    let exact = reps.phase_sum(&convention.effective(m), &convention.effective(n))?;
    let mut r = KloostermanResult::new(exact, Method::Oracle, c.to_vec(), m, n);
    r.cell = Some(cell.as_vec());
    r.representatives = Some(reps.len());
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bruhat::{coset_phase, decompose, gcd_lemma_holds};
    use crate::exactnum::PhaseSum;
    use crate::weyl::{word_to_matrix, ReducedWord};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_cells() -> Vec<Sl5FineCellLabel> {
        let mut out = vec![Sl5FineCellLabel::trivial()];
        for i in 0..10 {
            let mut v = [1u64; 10];
            v[i] = 2;
            out.push(Sl5FineCellLabel::new(core::array::from_fn(|k| v[k]), v[9]).unwrap());
            for j in i + 1..10 {
                let mut w = v;
                w[j] = 3;
                out.push(Sl5FineCellLabel::new(core::array::from_fn(|k| w[k]), w[9]).unwrap());
            }
        }
        out
    }

    #[test]
    fn trivial_build_is_long_word() {
        let g: [GammaFactor; 10] = core::array::from_fn(|_| GammaFactor::rotation());
        let a = sl5_build_from_gammas(&Sl5FineCellLabel::trivial(), &g).unwrap();
        assert_eq!(a, long_word_matrix(5).unwrap());
        let w = word_to_matrix(&ReducedWord::parse("1,2,1,3,2,1,4,3,2,1").unwrap(), 5).unwrap();
        assert_eq!(w, a);
        let fac = sl5_unipotent_factors(&Sl5FineCellLabel::trivial(), &g).unwrap();
        assert_eq!(fac.u_left, RatMatrix::identity(5));
        assert_eq!(fac.u_right, RatMatrix::identity(5));
        let zero = sl5_character_phase(
            &Sl5FineCellLabel::trivial(),
            &g,
            &[1, 2, 3, 4],
            &[5, 6, 7, 8],
            PsiConvention::Corrected,
        );
        assert!(zero.is_zero());
    }

    #[test]
    fn build_rejects_bad_factors() {
        let cell = Sl5FineCellLabel::trivial();
        let mut g: [GammaFactor; 10] = core::array::from_fn(|_| GammaFactor::rotation());
        g[9] = GammaFactor::from_i64(1, 0, 2, 1);
        assert!(matches!(
            sl5_build_from_gammas(&cell, &g),
            Err(Error::CellMismatch { index: 10, .. })
        ));
        g[9] = GammaFactor::from_i64(2, 0, 1, 1);
        assert!(matches!(
            sl5_build_from_gammas(&cell, &g),
            Err(Error::NotUnimodular { index: 10, .. })
        ));
    }

    #[test]
    fn factors_reconstruct_and_match_decomposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for cell in small_cells() {
            for _ in 0..3 {
                let g = sl5_random_gammas(&cell, 6, &mut rng);
                let a = sl5_build_from_gammas(&cell, &g).unwrap();
                assert_eq!(a.det(), BigInt::one());
                assert_eq!(a[(4, 0)], big(cell.moduli()[0]));
                let t = t_from_minors(&a).unwrap();
                let want: Vec<BigInt> = cell.moduli().iter().map(|&v| big(v)).collect();
                assert_eq!(t.values(), &want[..]);
                assert!(gcd_lemma_holds(&a));
                let fac = sl5_unipotent_factors(&cell, &g).unwrap();
                let dec = decompose(&a).unwrap();
                assert_eq!(fac.u_left, dec.u_left, "{}", cell);
                assert_eq!(fac.u_right, dec.u_right, "{}", cell);
                assert_eq!(fac.torus, dec.t);
                let (m, n) = ([1, -1, 2, 3], [2, 0, -3, 1]);
                let phase = coset_phase(&dec, &m, &n).unwrap();
                assert_eq!(
                    sl5_character_phase(&cell, &g, &m, &n, PsiConvention::Corrected),
                    phase
                );
                let strict = coset_phase(&dec, &[1, -1, 2, 2], &[2, 0, -3, -3]).unwrap();
                assert_eq!(
                    sl5_character_phase(&cell, &g, &m, &n, PsiConvention::StrictPaper),
                    strict
                );
            }
        }
    }

    #[test]
    fn oracle_small_cells() {
        let budget = Budget::default();
        let r = sl5_fine_sum_oracle(
            &Sl5FineCellLabel::trivial(),
            &[1, 2, 3, 4],
            &[4, 3, 2, 1],
            PsiConvention::Corrected,
            &budget,
        )
        .unwrap();
        assert_eq!(r.exact, PhaseSum::constant(1));
        let cell = Sl5FineCellLabel::new([1; 9], 2).unwrap();
        let r = sl5_fine_sum_oracle(&cell, &[0; 4], &[0; 4], PsiConvention::Corrected, &budget)
            .unwrap();
        let count = r.representatives.unwrap() as i64;
        assert!(count > 0);
        assert_eq!(r.exact, PhaseSum::constant(count));
        let wide = Sl5FineCellLabel::new([2, 2, 2, 1, 1, 1, 1, 1, 1], 1).unwrap();
        assert!(matches!(
            sl5_fine_sum_oracle(&wide, &[0; 4], &[0; 4], PsiConvention::Corrected, &budget),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn strict_convention_ignores_fourth_component() {
        let budget = Budget::default();
        let cell = Sl5FineCellLabel::new([1, 1, 1, 1, 1, 1, 1, 1, 1], 2).unwrap();
        let a = sl5_fine_sum_oracle(
            &cell,
            &[1, 0, 1, 0],
            &[0, 1, 1, 1],
            PsiConvention::StrictPaper,
            &budget,
        )
        .unwrap();
        let b = sl5_fine_sum_oracle(
            &cell,
            &[1, 0, 1, 5],
            &[0, 1, 1, -3],
            PsiConvention::StrictPaper,
            &budget,
        )
        .unwrap();
        assert_eq!(a.exact, b.exact);
    }
}
