//! Rank-4 fine Kloosterman cells.
//!
//! A fine cell is a label `(d1, …, d5, f)` of positive integers. The six
//! factor product
//!
//! `A = ι_α(γ1) ι_β(γ3) ι_α(γ2) ι_γ(γ6) ι_β(γ5) ι_α(γ4)`,
//! `γi = [[xi, bi], [di, yi]]`, `γ6 = [[x6, b6], [f, y6]]`
//!
//! lands in the long-word cell with corner minors
//! `c = (d4 d5 f, d2 d3 d5 f, d1 d3 f)`, and the label is recovered from
//! `A` by gcds of its bottom row and of its corner `3 × 3` minors.
//!
//! The module carries two evaluators of the fine sum
//! `Σ e(ψ_m(u_L) + ψ_n(u_R))` over `U(Z) \ Ω / U(Z)`: an exhaustive
//! enumeration restricted to the cell, and the closed form as a weighted
//! sum of products of two classical sums. They disagree on most cells with
//! nontrivial data; the enumeration is the reference and the comparison
//! harness reports each mismatch as a [`Discrepancy`].

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{Float, One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::bruhat::{bottom_row_gcd, corner_column_minor_gcd};
use crate::classical::kloosterman;
use crate::coset::{Budget, ColumnFilter, ColumnView, CosetEnumerator, RepresentativeSet};
use crate::exactnum::{
    divisor_tau, divisors, gcd_u64, mod_inverse, values_agree, Phase, PhaseSum, Rational,
};
use crate::matrix::{minor_digits, IntMatrix, Matrix, RatMatrix};
use crate::weyl::{embed, long_word_matrix, RootLabel};
use crate::{Error, Result};

fn big(v: u64) -> BigInt {
    BigInt::from(v)
}

fn q(num: BigInt, den: BigInt) -> Rational {
    Rational::new(num, den)
}

/// Parses `"a,b,c"` into integers.
pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<T>()
                .map_err(|_| Error::Unsupported(format!("cannot parse {:?} in {:?}", t.trim(), s)))
        })
        .collect()
}

/// The fine cell `(d1, d2, d3, d4, d5, f)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FineCellLabel {
    pub d: [u64; 5],
    pub f: u64,
}

impl FineCellLabel {
    pub fn new(d: [u64; 5], f: u64) -> Result<Self> {
        if d.contains(&0) || f == 0 {
            return Err(Error::NegativeCellData(format!("d = {:?}, f = {}", d, f)));
        }
        Ok(FineCellLabel { d, f })
    }

    /// The cell with every parameter 1.
    pub fn trivial() -> Self {
        FineCellLabel { d: [1; 5], f: 1 }
    }

    /// `d_i`, 1-based.
    pub fn di(&self, i: usize) -> u64 {
        self.d[i - 1]
    }

    /// `(D1, D2, D3) = (d4 d5, d2 d3 d5, d1 d3)`.
    pub fn big_d(&self) -> [u64; 3] {
        let [d1, d2, d3, d4, d5] = self.d;
        [d4 * d5, d2 * d3 * d5, d1 * d3]
    }

    /// `c = (D1 f, D2 f, D3 f)`.
    pub fn moduli(&self) -> [u64; 3] {
        let [a, b, c] = self.big_d();
        [a * self.f, b * self.f, c * self.f]
    }

    /// `d1 d2 d3 d4 d5 f`.
    pub fn full_modulus(&self) -> u64 {
        self.d.iter().product::<u64>() * self.f
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

impl fmt::Display for FineCellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d, e] = self.d;
        write!(f, "{},{},{},{},{},{}", a, b, c, d, e, self.f)
    }
}

impl FromStr for FineCellLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let v: Vec<u64> = parse_list(s)?;
        if v.len() != 6 {
            return Err(Error::Unsupported(format!(
                "a cell needs six entries d1,d2,d3,d4,d5,f; got {:?}",
                s
            )));
        }
        FineCellLabel::new([v[0], v[1], v[2], v[3], v[4]], v[5])
    }
}

/// `[[x, b], [d, y]]` with `x y - b d = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GammaFactor {
    pub x: BigInt,
    pub b: BigInt,
    pub d: BigInt,
    pub y: BigInt,
}

impl GammaFactor {
    pub fn new(x: BigInt, b: BigInt, d: BigInt, y: BigInt) -> Self {
        GammaFactor { x, b, d, y }
    }

    pub fn from_i64(x: i64, b: i64, d: i64, y: i64) -> Self {
        Self::new(x.into(), b.into(), d.into(), y.into())
    }

    /// `[[0, -1], [1, 0]]`.
    pub fn rotation() -> Self {
        Self::from_i64(0, -1, 1, 0)
    }

    pub fn det(&self) -> BigInt {
        &self.x * &self.y - &self.b * &self.d
    }

    pub fn to_matrix(&self) -> IntMatrix {
        Matrix::from_rows(vec![
            vec![self.x.clone(), self.b.clone()],
            vec![self.d.clone(), self.y.clone()],
        ])
        .expect("2x2")
    }

    /// A factor with lower-left entry `d > 0`: `x` uniform in
    /// `[-bound, bound]` coprime to `d`, `y ≡ x^{-1} (mod d)` shifted by a
    /// random multiple of `d`.
    pub fn random<R: Rng + ?Sized>(d: u64, bound: i64, rng: &mut R) -> Self {
        let dd = big(d);
        loop {
            let x = BigInt::from(rng.gen_range(-bound..=bound));
            let Ok(inv) = mod_inverse(&x, &dd) else {
                continue;
            };
            let y = inv + &dd * BigInt::from(rng.gen_range(-2i64..=2));
            let b = (&x * &y - BigInt::one()) / &dd;
            return GammaFactor::new(x, b, dd, y);
        }
    }
}

/// The residue data `x1..x6`, `y1..y6` of a parametrization.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Coordinates {
    pub x: [BigInt; 6],
    pub y: [BigInt; 6],
}

impl Coordinates {
    pub fn from_gammas(g: &[GammaFactor; 6]) -> Self {
        Coordinates {
            x: core::array::from_fn(|i| g[i].x.clone()),
            y: core::array::from_fn(|i| g[i].y.clone()),
        }
    }

    pub fn from_i64(x: [i64; 6], y: [i64; 6]) -> Self {
        Coordinates {
            x: x.map(BigInt::from),
            y: y.map(BigInt::from),
        }
    }

    /// `x_i`, 1-based.
    pub fn xi(&self, i: usize) -> &BigInt {
        &self.x[i - 1]
    }

    /// `y_i`, 1-based.
    pub fn yi(&self, i: usize) -> &BigInt {
        &self.y[i - 1]
    }
}

/// `u1, u2, v1, v2, S, T` of a parametrization.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AuxQuantities {
    pub u1: BigInt,
    pub u2: BigInt,
    pub v1: BigInt,
    pub v2: BigInt,
    pub s: BigInt,
    pub t: BigInt,
}

impl AuxQuantities {
    pub fn compute(cell: &FineCellLabel, c: &Coordinates) -> Self {
        let (d1, d2, d3, d4, d5) = (cell.b(1), cell.b(2), cell.b(3), cell.b(4), cell.b(5));
        let x = |i| c.xi(i);
        let y = |i| c.yi(i);
        let u1 = &d1 * x(2) + &d2 * x(3) * y(1);
        let u2 = &d2 * x(4) + &d4 * x(5) * y(2);
        let v1 = &d1 * x(2) * y(3) + &d2 * y(1);
        let v2 = &d2 * x(4) * y(5) + &d4 * y(2);
        let t = &d3 * &u2 + &d4 * &d5 * x(6) * y(3);
        let s = &d2 * &d4 * &d5 * x(6) * y(1) * (x(3) * y(3) - BigInt::one())
            + &d3 * (&u1 * &u2 - &d1 * &d4 * x(5));
        AuxQuantities {
            u1,
            u2,
            v1,
            v2,
            s,
            t,
        }
    }
}

/// The parametrized product for a cell; fails if a factor is not unimodular
/// or its lower-left entry disagrees with the cell.
pub fn build_from_gammas(cell: &FineCellLabel, g: &[GammaFactor; 6]) -> Result<IntMatrix> {
    for (i, gamma) in g.iter().enumerate() {
        let det = gamma.det();
        if !det.is_one() {
            return Err(Error::NotUnimodular { index: i + 1, det });
        }
        let expected = if i == 5 { big(cell.f) } else { cell.b(i + 1) };
        if gamma.d != expected {
            return Err(Error::CellMismatch {
                index: i + 1,
                expected,
                found: gamma.d.clone(),
            });
        }
    }
    let (a, b, c) = (RootLabel::alpha(4), RootLabel::beta(4), RootLabel::gamma(4));
    // word order α β α γ β α with factors γ1 γ3 γ2 γ6 γ5 γ4
    let order = [(&a, 0), (&b, 2), (&a, 1), (&c, 5), (&b, 4), (&a, 3)];
    let factors = order
        .iter()
        .map(|(root, k)| embed(root, &g[*k].to_matrix()))
        .collect::<Result<Vec<_>>>()?;
    IntMatrix::product(&factors)
}

/// Random unimodular factors compatible with `cell`, entries near `bound`.
pub fn random_gammas<R: Rng + ?Sized>(
    cell: &FineCellLabel,
    bound: i64,
    rng: &mut R,
) -> [GammaFactor; 6] {
    core::array::from_fn(|i| {
        let d = if i == 5 { cell.f } else { cell.d[i] };
        GammaFactor::random(d, bound, rng)
    })
}

/// Random factors additionally satisfying the hypotheses of
/// [`unit_congruence_check`]: `x1, x3, y4` prime to `N = d1 d2 d3 d4 d5 f` and
/// `x3 y3 ≡ 1 (mod N)`.
pub fn random_gammas_with_units<R: Rng + ?Sized>(
    cell: &FineCellLabel,
    bound: i64,
    rng: &mut R,
) -> [GammaFactor; 6] {
    let n = big(cell.full_modulus());
    let mut g = random_gammas(cell, bound, rng);
    // x1 and y4 prime to N
    for (idx, use_x) in [(0usize, true), (3, false)] {
        let d = cell.b(idx + 1);
        loop {
            let unit = BigInt::from(rng.gen_range(-bound..=bound));
            if !unit.gcd(&n).is_one() {
                continue;
            }
            let Ok(inv) = mod_inverse(&unit, &d) else {
                continue;
            };
            let other = inv + &d * BigInt::from(rng.gen_range(-2i64..=2));
            let (x, y) = if use_x { (unit, other) } else { (other, unit) };
            let b = (&x * &y - BigInt::one()) / &d;
            g[idx] = GammaFactor::new(x, b, d, y);
            break;
        }
    }
    // x3 y3 ≡ 1 mod N
    let d3 = cell.b(3);
    loop {
        let x3 = BigInt::from(rng.gen_range(-bound..=bound));
        let Ok(inv) = mod_inverse(&x3, &n) else {
            continue;
        };
        let y3 = inv + &n * BigInt::from(rng.gen_range(-1i64..=1));
        let b3 = (&x3 * &y3 - BigInt::one()) / &d3;
        g[2] = GammaFactor::new(x3, b3, d3, y3);
        break;
    }
    g
}

/// The factors of `A = u_L · w0 · T · u_R` written in the coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoordinateFactors {
    pub u_left: RatMatrix,
    pub torus: Vec<Rational>,
    pub u_right: RatMatrix,
}

impl CoordinateFactors {
    /// `u_L · w0 · T · u_R`, possibly non-integral.
    pub fn product(&self) -> RatMatrix {
        let w = long_word_matrix(4).expect("rank 4").to_rational();
        RatMatrix::product([
            &self.u_left,
            &w,
            &RatMatrix::diagonal(&self.torus),
            &self.u_right,
        ])
        .expect("4x4 factors")
    }
}

/// The unipotent and torus factors as explicit functions of the coordinates.
pub fn coordinate_factors(cell: &FineCellLabel, c: &Coordinates) -> CoordinateFactors {
    let (d1, d2, d3, d4, d5, f) = (
        cell.b(1),
        cell.b(2),
        cell.b(3),
        cell.b(4),
        cell.b(5),
        big(cell.f),
    );
    let aux = AuxQuantities::compute(cell, c);
    let AuxQuantities {
        u1,
        u2,
        v1,
        v2,
        s,
        t,
    } = &aux;
    let x = |i| c.xi(i);
    let y = |i| c.yi(i);
    let d123 = &d1 * &d2 * &d3;
    let d45f = &d4 * &d5 * &f;

    let mut ul = RatMatrix::identity(4);
    ul[(0, 1)] = q(x(1).clone(), d1.clone());
    ul[(0, 2)] = q(x(1) * u1 - &d2 * x(3), d123.clone());
    ul[(0, 3)] = q(
        x(1) * s - &d2 * x(3) * t + &d2 * &d4 * &d5 * x(6),
        &d123 * &d45f,
    );
    ul[(1, 2)] = q(u1.clone(), &d2 * &d3);
    ul[(1, 3)] = q(s.clone(), &d2 * &d3 * &d45f);
    ul[(2, 3)] = q(t.clone(), d45f.clone());

    let mut ur = RatMatrix::identity(4);
    ur[(0, 1)] = q(y(4).clone(), d4.clone());
    ur[(0, 2)] = q(y(5).clone(), &d4 * &d5);
    ur[(0, 3)] = q(y(6).clone(), d45f.clone());
    ur[(1, 2)] = q(v2.clone(), &d2 * &d5);
    ur[(1, 3)] = q(&d4 * &d5 * y(3) + &d3 * y(6) * u2, &d2 * &d3 * &d5 * &f);
    ur[(2, 3)] = q(&d5 * v1 + &d1 * &d3 * x(5) * y(6), &d1 * &d3 * &f);

    let torus = vec![
        q(&d45f * BigInt::one(), BigInt::one()),
        q(&d2 * &d3, d4.clone()),
        q(d1.clone(), &d2 * &d5),
        q(BigInt::one(), &d1 * &d3 * &f),
    ];
    CoordinateFactors {
        u_left: ul,
        torus,
        u_right: ur,
    }
}

/// `ψ_m(u_L) + ψ_n(u_R)` read off the coordinate factors.
pub fn character_phase(cell: &FineCellLabel, c: &Coordinates, m: &[i64; 3], n: &[i64; 3]) -> Phase {
    let fac = coordinate_factors(cell, c);
    let mut acc = Rational::zero();
    for i in 0..3 {
        acc += &fac.u_left[(i, i + 1)] * Rational::from_integer(BigInt::from(m[i]));
        acc += &fac.u_right[(i, i + 1)] * Rational::from_integer(BigInt::from(n[i]));
    }
    Phase::new(acc)
}

/// Recovers the label of a big-cell matrix from gcds of its entries and
/// minors.
pub fn cell_of(a: &IntMatrix) -> Result<FineCellLabel> {
    if a.size() != 4 {
        return Err(Error::BadRank(a.size()));
    }
    let a41 = a[(3, 0)].clone();
    let m34_12 = minor_digits(a, "34", "12");
    let m234 = minor_digits(a, "234", "123");
    if a41.is_zero() || m34_12.is_zero() || m234.is_zero() {
        return Err(Error::NotInBigCell(String::from("a corner minor vanishes")));
    }
    let m134 = minor_digits(a, "134", "123");
    let f = bottom_row_gcd(a);
    let g45 = a41.gcd(&a[(3, 1)]);
    let d5 = &g45 / &f;
    let d4 = &a41 / &g45;
    let g3 = m234.gcd(&m134);
    if !(&g3 % &f).is_zero() {
        return Err(Error::NonIntegralRefinement(format!(
            "gcd(M_234,123, M_134,123) = {} is not a multiple of f = {}",
            g3, f
        )));
    }
    let d3 = &g3 / &f;
    let d1 = &m234 / &g3;
    let denom = &d3 * &d5 * &f;
    if !(&m34_12 % &denom).is_zero() {
        return Err(Error::NonIntegralRefinement(format!(
            "M_34,12 = {} is not divisible by d3 d5 f = {}",
            m34_12, denom
        )));
    }
    let d2 = &m34_12 / &denom;
    let values = [&d1, &d2, &d3, &d4, &d5];
    if values.iter().any(|v| !v.is_positive()) {
        return Err(Error::NegativeCellData(format!(
            "recovered d = ({}, {}, {}, {}, {})",
            d1, d2, d3, d4, d5
        )));
    }
    let to_u64 = |v: &BigInt| {
        v.to_u64()
            .ok_or_else(|| Error::Unsupported(format!("cell parameter {} is too large", v)))
    };
    FineCellLabel::new(
        [
            to_u64(&d1)?,
            to_u64(&d2)?,
            to_u64(&d3)?,
            to_u64(&d4)?,
            to_u64(&d5)?,
        ],
        to_u64(&f)?,
    )
}

/// Pass/fail of the statements checked by [`lemma_checks`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaReport {
    /// `gcd(A41, A42, A43) = gcd(M_234,123, M_134,123, M_124,123)`.
    pub gcd_equality: bool,
    /// `A44 · M_123,123 ≡ 1 (mod f)`.
    pub inverse_mod_f: bool,
    /// `gcd(A44, f) = gcd(M_123,123, f) = 1`.
    pub units_mod_f: bool,
    pub f: BigInt,
}

impl LemmaReport {
    pub fn all_pass(&self) -> bool {
        self.gcd_equality && self.inverse_mod_f && self.units_mod_f
    }
}

pub fn lemma_checks(a: &IntMatrix) -> Result<LemmaReport> {
    crate::bruhat::t_from_minors(a)?;
    if a.size() != 4 {
        return Err(Error::BadRank(a.size()));
    }
    let f = bottom_row_gcd(a);
    let a44 = a[(3, 3)].clone();
    let m123 = minor_digits(a, "123", "123");
    Ok(LemmaReport {
        gcd_equality: f == corner_column_minor_gcd(a),
        inverse_mod_f: (&a44 * &m123 - BigInt::one()).mod_floor(&f).is_zero(),
        units_mod_f: a44.gcd(&f).is_one() && m123.gcd(&f).is_one(),
        f,
    })
}

/// One integrality condition: `lhs ≡ 0 (mod modulus)` makes entry
/// `entry` (1-based) of the coordinate product integral.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CongruenceResidual {
    pub entry: (usize, usize),
    pub lhs: BigInt,
    pub modulus: BigInt,
    /// `lhs mod modulus`, in `[0, modulus)`.
    pub residual: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CongruenceReport {
    pub conditions: Vec<CongruenceResidual>,
}

impl CongruenceReport {
    pub fn satisfied(&self) -> bool {
        self.conditions.iter().all(|c| c.residual.is_zero())
    }

    pub fn get(&self, entry: (usize, usize)) -> Option<&CongruenceResidual> {
        self.conditions.iter().find(|c| c.entry == entry)
    }
}

/// The eleven congruences under which the coordinate product is integral.
/// Entry `(i, j)` of the product equals `lhs / modulus` of its condition;
/// `A31` and the bottom row are integral for all coordinates.
pub fn congruence_system(cell: &FineCellLabel, c: &Coordinates) -> CongruenceReport {
    let (d1, d2, d3, d4, d5, f) = (
        cell.b(1),
        cell.b(2),
        cell.b(3),
        cell.b(4),
        cell.b(5),
        big(cell.f),
    );
    let AuxQuantities {
        u1,
        u2,
        v1,
        v2,
        s,
        t,
    } = AuxQuantities::compute(cell, c);
    let x = |i| c.xi(i);
    let y = |i| c.yi(i);
    let one = BigInt::one();

    let k = &d2 * &d4 * &d5 * x(6) - &t * &d2 * x(3) + &s * x(1);
    let r = &d3 * &u2 * y(6) + &d4 * &d5 * y(3);
    let w = &d1 * &d3 * &d4 * x(5) * y(6) - &u1 * &r + &d4 * &d5 * &v1 + &s * y(6);
    let e = &d2 * x(3) - x(1) * &u1;

    let d23 = &d2 * &d3;
    let d45f = &d4 * &d5 * &f;
    let list: Vec<((usize, usize), BigInt, BigInt)> = vec![
        ((1, 1), k.clone(), &d1 * &d23),
        ((2, 1), s.clone(), d23.clone()),
        ((1, 2), y(4) * &k + &d23 * &e, &d1 * &d23 * &d4),
        ((2, 2), &s * y(4) - &d23 * &u1, &d23 * &d4),
        ((3, 2), &t * y(4) - &d23, d4.clone()),
        (
            (1, 3),
            y(5) * &k + &v2 * &d3 * &e + &d1 * &d3 * &d4 * x(1),
            &d1 * &d23 * &d4 * &d5,
        ),
        (
            (2, 3),
            &d1 * &d3 * &d4 - &d3 * &u1 * &v2 + &s * y(5),
            &d23 * &d4 * &d5,
        ),
        ((3, 3), &t * y(5) - &d3 * &v2, &d4 * &d5),
        ((3, 4), -&r + &t * y(6), d45f.clone()),
        ((2, 4), w.clone(), &d23 * &d45f),
        (
            (1, 4),
            x(1) * &w
                + &d2 * &d4 * &d5 * x(3) * y(3)
                + &d2 * &d4 * &d5 * (x(6) * y(6) - &one)
                + &d23 * &u2 * x(3) * y(6)
                - &t * &d2 * x(3) * y(6),
            &d1 * &d23 * &d45f,
        ),
    ];
    CongruenceReport {
        conditions: list
            .into_iter()
            .map(|(entry, lhs, modulus)| CongruenceResidual {
                entry,
                residual: lhs.mod_floor(&modulus),
                lhs,
                modulus,
            })
            .collect(),
    }
}

/// The four consequences of the integrality system under unit hypotheses,
/// each as `lhs - rhs` reduced by its modulus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitCongruenceReport {
    pub residuals: [BigInt; 4],
    pub system_satisfied: bool,
}

impl UnitCongruenceReport {
    pub fn all_pass(&self) -> bool {
        self.residuals.iter().all(|r| r.is_zero())
    }
}

/// Checks, with `x̄1, ȳ4` inverses mod `N = d1 d2 d3 d4 d5 f`:
///
/// 1. `d2 d3 u1 ≡ d2² d3 x̄1 x3 (mod d1 d2 d3)`
/// 2. `d3 u2 + d4 d5 x6 y3 ≡ d2 d3 ȳ4 (mod d4)`
/// 3. `d3 v2 ≡ d2 d3 ȳ4 y5 (mod d4)`
/// 4. `d2 d3 d4 (d5 v1 + d1 d3 x5 y6) ≡ d2² d3 d4 d5 x̄1 (mod d2 d3)`
///
/// Requires `x1, x3, y4` prime to `N` and `x3 y3 ≡ 1 (mod N)`.
pub fn unit_congruence_check(
    cell: &FineCellLabel,
    c: &Coordinates,
) -> Result<UnitCongruenceReport> {
    let n = big(cell.full_modulus());
    for (name, v) in [("x1", c.xi(1)), ("x3", c.xi(3)), ("y4", c.yi(4))] {
        if !v.gcd(&n).is_one() {
            return Err(Error::NotCoprime(format!(
                "{} = {} shares a factor with {}",
                name, v, n
            )));
        }
    }
    if !(c.xi(3) * c.yi(3) - BigInt::one()).mod_floor(&n).is_zero() {
        return Err(Error::NotCoprime(format!("x3 y3 is not 1 modulo {}", n)));
    }
    let x1bar = mod_inverse(c.xi(1), &n)?;
    let y4bar = mod_inverse(c.yi(4), &n)?;
    let (d1, d2, d3, d4, d5) = (cell.b(1), cell.b(2), cell.b(3), cell.b(4), cell.b(5));
    let AuxQuantities { u1, u2, v1, v2, .. } = AuxQuantities::compute(cell, c);
    let x = |i| c.xi(i);
    let y = |i| c.yi(i);
    let d23 = &d2 * &d3;
    let residuals = [
        (&d23 * &u1 - &d2 * &d23 * &x1bar * x(3)).mod_floor(&(&d1 * &d23)),
        (&d3 * &u2 + &d4 * &d5 * x(6) * y(3) - &d23 * &y4bar).mod_floor(&d4),
        (&d3 * &v2 - &d23 * &y4bar * y(5)).mod_floor(&d4),
        (&d23 * &d4 * (&d5 * &v1 + &d1 * &d3 * x(5) * y(6)) - &d2 * &d23 * &d4 * &d5 * &x1bar)
            .mod_floor(&d23),
    ];
    Ok(UnitCongruenceReport {
        residuals,
        system_satisfied: congruence_system(cell, c).satisfied(),
    })
}

/// Which evaluator produced a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Oracle,
    ClosedForm,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Oracle => "oracle",
            Method::ClosedForm => "closed_form",
        }
    }
}

/// An exact sum with its value and the query that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct KloostermanResult {
    pub exact: PhaseSum,
    pub value: Complex64,
    pub method: Method,
    pub moduli: Vec<u64>,
    /// Cell parameters `d…, f`, when the sum is over one fine cell.
    pub cell: Option<Vec<u64>>,
    pub m: Vec<i64>,
    pub n: Vec<i64>,
    /// Number of double cosets summed, for enumerated results.
    pub representatives: Option<usize>,
}

impl KloostermanResult {
    pub fn new(exact: PhaseSum, method: Method, moduli: Vec<u64>, m: &[i64], n: &[i64]) -> Self {
        KloostermanResult {
            value: exact.eval(),
            exact,
            method,
            moduli,
            cell: None,
            m: m.to_vec(),
            n: n.to_vec(),
            representatives: None,
        }
    }
}

/// Prunes the enumeration of `Ω(c)` to one fine cell: after two columns
/// `gcd(A41, A42) = d5 f`, after three the full label.
pub struct CellFilter {
    cell: FineCellLabel,
}

impl CellFilter {
    pub fn new(cell: FineCellLabel) -> Self {
        CellFilter { cell }
    }
}

impl ColumnFilter for CellFilter {
    fn accept(&self, v: &ColumnView<'_>) -> bool {
        match v.columns() {
            2 => v.get(3, 0).gcd(&v.get(3, 1)) == i128::from(self.cell.d[4] * self.cell.f),
            3 => {
                let mut a = v.to_int_matrix();
                // the label only reads columns 1..3; pin column 4 to a
                // value that keeps the matrix well defined
                for r in 0..4 {
                    a[(r, 3)] = BigInt::zero();
                }
                matches!(cell_of(&a), Ok(l) if l == self.cell)
            }
            _ => true,
        }
    }
}

/// The double cosets of one fine cell, ready to be summed against any
/// pair of characters.
#[derive(Clone, Debug)]
pub struct FineCellOracle {
    pub cell: FineCellLabel,
    pub reps: RepresentativeSet,
}

impl FineCellOracle {
    pub fn enumerate(cell: FineCellLabel, budget: &Budget) -> Result<Self> {
        let en = CosetEnumerator::new(&cell.moduli())?;
        let reps = en.enumerate(&CellFilter::new(cell), budget)?;
        Ok(FineCellOracle { cell, reps })
    }

    pub fn sum(&self, m: &[i64; 3], n: &[i64; 3]) -> Result<KloostermanResult> {
        let exact = self.reps.phase_sum(m, n)?;
        let mut r =
            KloostermanResult::new(exact, Method::Oracle, self.cell.moduli().to_vec(), m, n);
        r.cell = Some(self.cell.as_vec());
        r.representatives = Some(self.reps.len());
        Ok(r)
    }
}

/// The fine sum by exhaustive enumeration of the cell's double cosets.
pub fn fine_sum_oracle(
    cell: &FineCellLabel,
    m: &[i64; 3],
    n: &[i64; 3],
    budget: &Budget,
) -> Result<KloostermanResult> {
    FineCellOracle::enumerate(*cell, budget)?.sum(m, n)
}

/// The four divisibility hypotheses of the closed form.
pub fn closed_form_conditions(cell: &FineCellLabel, m: &[i64; 3], n: &[i64; 3]) -> [bool; 4] {
    let [d1, d2, d3, d4, d5] = self_d(cell);
    let f = cell.f as i128;
    let (m2, m3, n2, n3) = (m[1] as i128, m[2] as i128, n[1] as i128, n[2] as i128);
    [
        (m2 * d1).rem_euclid(d2 * d3) == 0,
        m3.rem_euclid(d5 * f) == 0,
        (n2 * d4).rem_euclid(d2 * d3 * d5) == 0,
        n3.rem_euclid(d1 * d3 * d4 * f) == 0,
    ]
}

fn self_d(cell: &FineCellLabel) -> [i128; 5] {
    cell.d.map(i128::from)
}

/// `d1³ d2² d3² d4² d5⁴ f⁴`.
pub fn closed_form_prefactor(cell: &FineCellLabel) -> Option<i64> {
    let [d1, d2, d3, d4, d5] = cell.d;
    let f = cell.f;
    let mut acc: i64 = 1;
    for (base, exp) in [(d1, 3), (d2, 2), (d3, 2), (d4, 2), (d5, 4), (f, 4)] {
        acc = acc.checked_mul(i64::try_from(base).ok()?.checked_pow(exp)?)?;
    }
    Some(acc)
}

/// The closed form: zero unless all four hypotheses hold, otherwise
/// `d1³ d2² d3² d4² d5⁴ f⁴ Σ_{x3 mod d3, y5 mod d5}
/// S(m1, (m2 d1 f x3 + n3 d2 d5)/(d3 f); d1) · S(n1, (n2 d4 f y5 + m3 d2 d3)/(d5 f); d4)`.
pub fn fine_sum_closed_form(
    cell: &FineCellLabel,
    m: &[i64; 3],
    n: &[i64; 3],
) -> Result<KloostermanResult> {
    let mut result = KloostermanResult::new(
        PhaseSum::new(),
        Method::ClosedForm,
        cell.moduli().to_vec(),
        m,
        n,
    );
    result.cell = Some(cell.as_vec());
    if !closed_form_conditions(cell, m, n).iter().all(|&ok| ok) {
        return Ok(result);
    }
    let [d1, d2, d3, d4, d5] = self_d(cell);
    let f = cell.f as i128;
    let (m1, m2, m3) = (m[0], m[1] as i128, m[2] as i128);
    let (n1, n2, n3) = (n[0], n[1] as i128, n[2] as i128);
    let prefactor = closed_form_prefactor(cell)
        .ok_or_else(|| Error::Unsupported(String::from("closed-form prefactor exceeds 64 bits")))?;
    let argument = |num: i128, den: i128, what: &str| -> Result<i64> {
        if num % den != 0 {
            return Err(Error::NonIntegralArgument(format!(
                "{} = {}/{}",
                what, num, den
            )));
        }
        i64::try_from(num / den)
            .map_err(|_| Error::Unsupported(String::from("argument exceeds 64 bits")))
    };
    let mut total = PhaseSum::new();
    for x3 in 0..d3 {
        let left_arg = argument(m2 * d1 * f * x3 + n3 * d2 * d5, d3 * f, "left argument")?;
        let left = kloosterman(m1, left_arg, d1 as i64)?;
        for y5 in 0..d5 {
            let right_arg = argument(n2 * d4 * f * y5 + m3 * d2 * d3, d5 * f, "right argument")?;
            let right = kloosterman(n1, right_arg, d4 as i64)?;
            total += left.product(&right);
        }
    }
    result.exact = total.scaled(prefactor);
    result.value = result.exact.eval();
    Ok(result)
}

/// Oracle and closed form side by side.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub cell: FineCellLabel,
    pub m: [i64; 3],
    pub n: [i64; 3],
    pub oracle: KloostermanResult,
    pub closed: KloostermanResult,
    pub hypotheses_hold: bool,
    pub agree: bool,
}

/// A machine-readable record of an oracle/closed-form mismatch; the oracle
/// value is the reference.
#[derive(Clone, Debug, PartialEq)]
pub struct Discrepancy {
    pub cell: FineCellLabel,
    pub m: [i64; 3],
    pub n: [i64; 3],
    pub oracle: Complex64,
    pub closed: Complex64,
    pub oracle_representatives: usize,
}

impl Comparison {
    pub fn discrepancy(&self) -> Option<Discrepancy> {
        (!self.agree).then(|| Discrepancy {
            cell: self.cell,
            m: self.m,
            n: self.n,
            oracle: self.oracle.value,
            closed: self.closed.value,
            oracle_representatives: self.oracle.representatives.unwrap_or(0),
        })
    }
}

impl fmt::Display for Discrepancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "cell {} m {:?} n {:?}: oracle {:.6}{:+.6}i, closed form {:.6}{:+.6}i",
            self.cell,
            self.m,
            self.n,
            self.oracle.re,
            self.oracle.im,
            self.closed.re,
            self.closed.im
        )
    }
}

/// Compares both evaluators on one cell, reusing enumerated cosets.
pub fn compare(oracle: &FineCellOracle, m: &[i64; 3], n: &[i64; 3]) -> Result<Comparison> {
    let o = oracle.sum(m, n)?;
    let c = fine_sum_closed_form(&oracle.cell, m, n)?;
    let mass = o.exact.total_mass() + c.exact.total_mass();
    Ok(Comparison {
        cell: oracle.cell,
        m: *m,
        n: *n,
        agree: values_agree(o.value, c.value, mass),
        hypotheses_hold: closed_form_conditions(&oracle.cell, m, n)
            .iter()
            .all(|&b| b),
        oracle: o,
        closed: c,
    })
}

/// Every cell `(d, f)` with `f | gcd(c)`, `d4 d5 = c1/f`, `d2 d3 d5 = c2/f`
/// and `d1 d3 = c3/f`, in lexicographic order of `(f, d5, d3)`.
pub fn admissible_cells(c: &[u64; 3]) -> Vec<FineCellLabel> {
    let g = gcd_u64(gcd_u64(c[0], c[1]), c[2]);
    let mut out = Vec::new();
    if g == 0 {
        return out;
    }
    for f in divisors(g) {
        let (c1, c2, c3) = (c[0] / f, c[1] / f, c[2] / f);
        for d5 in divisors(c1) {
            let d4 = c1 / d5;
            for d3 in divisors(c3) {
                if c2 % (d3 * d5) != 0 {
                    continue;
                }
                let d1 = c3 / d3;
                let d2 = c2 / (d3 * d5);
                out.push(FineCellLabel {
                    d: [d1, d2, d3, d4, d5],
                    f,
                });
            }
        }
    }
    out
}

/// The double cosets of `Ω(c)` split by fine cell.
#[derive(Clone, Debug)]
pub struct CoarsePartition {
    pub moduli: [u64; 3],
    pub all: RepresentativeSet,
    /// One entry per admissible cell, in [`admissible_cells`] order.
    pub cells: Vec<(FineCellLabel, RepresentativeSet)>,
    /// Representatives whose label could not be recovered, with the error.
    pub unlabeled: Vec<(usize, Error)>,
    /// Representatives labeled with a cell outside the admissible list.
    pub stray: Vec<(usize, FineCellLabel)>,
}

impl CoarsePartition {
    /// Every representative has exactly one admissible label and the cells
    /// cover `Ω(c)`.
    pub fn is_partition(&self) -> bool {
        let total: usize = self.cells.iter().map(|(_, r)| r.len()).sum();
        self.unlabeled.is_empty() && self.stray.is_empty() && total == self.all.len()
    }
}

pub fn partition_by_cell(c: &[u64; 3], budget: &Budget) -> Result<CoarsePartition> {
    let all = CosetEnumerator::new(c)?.enumerate(&crate::coset::NoFilter, budget)?;
    partition_representatives(c, all)
}

/// Splits an enumerated `Ω(c)` by [`cell_of`].
pub fn partition_representatives(c: &[u64; 3], all: RepresentativeSet) -> Result<CoarsePartition> {
    let cells = admissible_cells(c);
    let mut labels = Vec::with_capacity(all.len());
    let mut unlabeled = Vec::new();
    let mut stray = Vec::new();
    for (k, rep) in all.representatives().iter().enumerate() {
        match cell_of(&rep.to_int_matrix(4)) {
            Ok(l) => {
                if !cells.contains(&l) {
                    stray.push((k, l));
                }
                labels.push(Some(l));
            }
            Err(e) => {
                unlabeled.push((k, e));
                labels.push(None);
            }
        }
    }
    let per_cell = cells
        .iter()
        .map(|&cell| {
            let mut k = 0;
            let set = all.filtered(|_| {
                let keep = labels[k] == Some(cell);
                k += 1;
                keep
            });
            (cell, set)
        })
        .collect();
    Ok(CoarsePartition {
        moduli: *c,
        all,
        cells: per_cell,
        unlabeled,
        stray,
    })
}

/// The coarse sum over `Ω(c)`: by enumeration of all double cosets, or as
/// the sum of closed-form fine sums over the admissible cells.
pub fn coarse_sum(
    c: &[u64; 3],
    m: &[i64; 3],
    n: &[i64; 3],
    method: Method,
    budget: &Budget,
) -> Result<KloostermanResult> {
    if c.contains(&0) {
        return Err(Error::NonPositive(BigInt::zero()));
    }
    match method {
        Method::Oracle => {
            let all = CosetEnumerator::new(c)?.enumerate(&crate::coset::NoFilter, budget)?;
            let mut r =
                KloostermanResult::new(all.phase_sum(m, n)?, Method::Oracle, c.to_vec(), m, n);
            r.representatives = Some(all.len());
            Ok(r)
        }
        Method::ClosedForm => {
            let mut total = PhaseSum::new();
            for cell in admissible_cells(c) {
                total += fine_sum_closed_form(&cell, m, n)?.exact;
            }
            Ok(KloostermanResult::new(
                total,
                Method::ClosedForm,
                c.to_vec(),
                m,
                n,
            ))
        }
    }
}

/// Both sides of the long-word bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `|S| ≤ c1³ c2² c3² (c2+1) (m1,c3)^{1/2} (n1,c1)^{1/2} √(c1 c3)
/// τ((c1,c2,c3)) τ(c1) τ(c3)`.
pub fn longword_bound_holds(
    c: &[u64; 3],
    m: &[i64; 3],
    n: &[i64; 3],
    value: Complex64,
) -> Result<BoundReport> {
    let [c1, c2, c3] = c.map(|v| v as f64);
    let gm = (m[0].unsigned_abs()).gcd(&c[2]) as f64;
    let gn = (n[0].unsigned_abs()).gcd(&c[0]) as f64;
    let g = gcd_u64(gcd_u64(c[0], c[1]), c[2]);
    let tau = |v: u64| -> Result<f64> { Ok(divisor_tau(v as i64)? as f64) };
    let rhs = c1.powi(3)
        * c2.powi(2)
        * c3.powi(2)
        * (c2 + 1.0)
        * Float::sqrt(gm)
        * Float::sqrt(gn)
        * Float::sqrt(c1 * c3)
        * tau(g)?
        * tau(c[0])?
        * tau(c[2])?;
    let lhs = value.norm();
    Ok(BoundReport {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + 1e-12),
    })
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "oracle" => Ok(Method::Oracle),
            "closed" | "closed_form" => Ok(Method::ClosedForm),
            other => Err(Error::Unsupported(other.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bruhat::{decompose, t_from_minors};
    use crate::coset::enumerate_grid;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cells_up_to(bound: u64) -> Vec<FineCellLabel> {
        let mut out = Vec::new();
        let r = 1..=bound;
        for d1 in r.clone() {
            for d2 in r.clone() {
                for d3 in r.clone() {
                    for d4 in r.clone() {
                        for d5 in r.clone() {
                            for f in r.clone() {
                                out.push(FineCellLabel {
                                    d: [d1, d2, d3, d4, d5],
                                    f,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn trivial_gammas_give_long_word() {
        let g: [GammaFactor; 6] = core::array::from_fn(|_| GammaFactor::rotation());
        let a = build_from_gammas(&FineCellLabel::trivial(), &g).unwrap();
        assert_eq!(a, long_word_matrix(4).unwrap());
        assert_eq!(cell_of(&a).unwrap(), FineCellLabel::trivial());
    }

    #[test]
    fn build_rejects_bad_factors() {
        let cell = FineCellLabel::trivial();
        let mut g: [GammaFactor; 6] = core::array::from_fn(|_| GammaFactor::rotation());
        g[2] = GammaFactor::from_i64(1, 1, 1, 1);
        assert!(matches!(
            build_from_gammas(&cell, &g),
            Err(Error::NotUnimodular { index: 3, .. })
        ));
        g[2] = GammaFactor::from_i64(1, 0, 2, 1);
        assert!(matches!(
            build_from_gammas(&cell, &g),
            Err(Error::CellMismatch { index: 3, .. })
        ));
    }

    #[test]
    fn parametrization_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for cell in cells_up_to(3).into_iter().step_by(7) {
            for _ in 0..5 {
                let g = random_gammas(&cell, 5, &mut rng);
                let a = build_from_gammas(&cell, &g).unwrap();
                let [d1, d2, d3, d4, d5] = cell.d.map(big);
                let f = big(cell.f);
                let c = Coordinates::from_gammas(&g);
                assert_eq!(a.det(), BigInt::one());
                assert_eq!(a[(3, 0)], &d4 * &d5 * &f);
                assert_eq!(a[(3, 1)], &d5 * &f * c.yi(4));
                assert_eq!(a[(3, 2)], &f * c.yi(5));
                assert_eq!(a[(3, 3)], *c.yi(6));
                assert_eq!(minor_digits(&a, "234", "123"), &d1 * &d3 * &f);
                assert_eq!(minor_digits(&a, "134", "123"), &d3 * &f * c.xi(1));
                assert_eq!(minor_digits(&a, "124", "123"), &f * c.xi(3));
                assert_eq!(minor_digits(&a, "123", "123"), *c.xi(6));
                assert_eq!(minor_digits(&a, "34", "12"), &d2 * &d3 * &d5 * &f);
                let t = t_from_minors(&a).unwrap();
                let want: Vec<BigInt> = cell.moduli().iter().map(|&v| big(v)).collect();
                assert_eq!(t.values(), &want[..]);
                assert_eq!(cell_of(&a).unwrap(), cell);
                // unit conditions
                assert!(c.yi(4).gcd(&d4).is_one() && c.xi(1).gcd(&d1).is_one());
                assert!(c.yi(5).gcd(&d5).is_one() && c.xi(3).gcd(&d3).is_one());
                let _ = d2;
            }
        }
    }

    #[test]
    fn coordinate_factors_match_minor_quotients() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for cell in cells_up_to(3).into_iter().step_by(5) {
            let g = random_gammas(&cell, 6, &mut rng);
            let a = build_from_gammas(&cell, &g).unwrap();
            let c = Coordinates::from_gammas(&g);
            let fac = coordinate_factors(&cell, &c);
            let dec = decompose(&a).unwrap();
            assert_eq!(fac.u_left, dec.u_left);
            assert_eq!(fac.u_right, dec.u_right);
            assert_eq!(fac.torus, dec.t);
            assert_eq!(fac.product().to_integer().unwrap(), a);
            let (m, n) = ([1, -2, 3], [2, 5, -1]);
            let phase = crate::bruhat::coset_phase(&dec, &m, &n).unwrap();
            assert_eq!(character_phase(&cell, &c, &m, &n), phase);
        }
    }

    #[test]
    fn congruences_hold_on_built_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for cell in cells_up_to(3).into_iter().step_by(3) {
            let g = random_gammas(&cell, 6, &mut rng);
            let c = Coordinates::from_gammas(&g);
            let report = congruence_system(&cell, &c);
            assert_eq!(report.conditions.len(), 11);
            assert!(report.satisfied(), "{:?} {:?}", cell, report);
        }
    }

    #[test]
    fn congruence_lhs_is_entry_times_modulus() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for cell in cells_up_to(2) {
            // arbitrary coordinates, not necessarily from unimodular factors
            let x: [i64; 6] = core::array::from_fn(|_| rng.gen_range(-4..=4));
            let y: [i64; 6] = core::array::from_fn(|_| rng.gen_range(-4..=4));
            let c = Coordinates::from_i64(x, y);
            let prod = coordinate_factors(&cell, &c).product();
            let report = congruence_system(&cell, &c);
            for cond in &report.conditions {
                let (i, j) = cond.entry;
                let entry = &prod[(i - 1, j - 1)] * Rational::from_integer(cond.modulus.clone());
                assert_eq!(
                    entry,
                    Rational::from_integer(cond.lhs.clone()),
                    "{:?} {:?}",
                    cell,
                    cond.entry
                );
            }
            for (i, j) in [(3, 1), (4, 1), (4, 2), (4, 3), (4, 4)] {
                assert!(prod[(i - 1, j - 1)].is_integer());
            }
        }
    }

    #[test]
    fn congruence_examples() {
        let c = Coordinates::from_i64([3, 1, 2, 0, 5, 1], [1, 4, 1, 7, 2, 3]);
        assert!(congruence_system(&FineCellLabel::trivial(), &c).satisfied());
        // d4 = 2; T y4 - d2 d3 = (d3 u2 + d4 d5 x6 y3) y4 - 1 with u2 = x4 + 2 x5 y2
        let cell = FineCellLabel::new([1, 1, 1, 2, 1], 1).unwrap();
        let c = Coordinates::from_i64([1, 0, 1, 0, 0, 0], [0, 0, 0, 1, 0, 0]);
        let r = congruence_system(&cell, &c);
        let cond = r.get((3, 2)).unwrap();
        assert!(cond.residual.is_one());
        assert!(!r.satisfied());
    }

    #[test]
    fn lemma_checks_pass_on_built_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!(lemma_checks(&long_word_matrix(4).unwrap())
            .unwrap()
            .all_pass());
        for cell in cells_up_to(3).into_iter().step_by(11) {
            let g = random_gammas(&cell, 5, &mut rng);
            let a = build_from_gammas(&cell, &g).unwrap();
            let r = lemma_checks(&a).unwrap();
            assert!(r.all_pass(), "{:?}", r);
            assert_eq!(r.f, big(cell.f));
        }
        let mut a = IntMatrix::identity(4);
        a[(3, 3)] = BigInt::one();
        assert!(matches!(lemma_checks(&a), Err(Error::NotInBigCell(_))));
    }

    #[test]
    fn unit_congruences_on_unit_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for cell in cells_up_to(3).into_iter().step_by(4) {
            let g = random_gammas_with_units(&cell, 40, &mut rng);
            let c = Coordinates::from_gammas(&g);
            let r = unit_congruence_check(&cell, &c).unwrap();
            assert!(r.system_satisfied);
            assert!(r.all_pass(), "{:?} {:?}", cell, r);
        }
        let cell = FineCellLabel::new([2, 1, 1, 1, 1], 1).unwrap();
        let c = Coordinates::from_i64([2, 0, 1, 0, 0, 0], [0, 0, 1, 1, 0, 0]);
        assert!(matches!(
            unit_congruence_check(&cell, &c),
            Err(Error::NotCoprime(_))
        ));
        let r = unit_congruence_check(
            &FineCellLabel::trivial(),
            &Coordinates::from_i64([1; 6], [1; 6]),
        )
        .unwrap();
        assert!(r.all_pass());
    }

    #[test]
    fn cell_of_errors() {
        assert!(matches!(
            cell_of(&IntMatrix::identity(4)),
            Err(Error::NotInBigCell(_))
        ));
        // negate the last column and first row: A41 < 0
        let mut a = long_word_matrix(4).unwrap();
        a[(3, 0)] = -BigInt::one();
        a[(0, 3)] = BigInt::one();
        assert!(matches!(cell_of(&a), Err(Error::NegativeCellData(_))));
    }

    #[test]
    fn trivial_cell_sums_are_one() {
        let oracle =
            FineCellOracle::enumerate(FineCellLabel::trivial(), &Budget::default()).unwrap();
        for (m, n) in [([0, 0, 0], [0, 0, 0]), ([1, 2, 3], [-4, 5, 6])] {
            let o = oracle.sum(&m, &n).unwrap();
            let c = fine_sum_closed_form(&FineCellLabel::trivial(), &m, &n).unwrap();
            assert_eq!(o.exact, PhaseSum::constant(1));
            assert_eq!(c.exact, PhaseSum::constant(1));
        }
    }

    #[test]
    fn closed_form_examples() {
        let cell = FineCellLabel::new([1; 5], 2).unwrap();
        let r = fine_sum_closed_form(&cell, &[0, 0, 0], &[0, 0, 0]).unwrap();
        assert_eq!(r.exact, PhaseSum::constant(16));
        let r = fine_sum_closed_form(&cell, &[0, 0, 1], &[0, 0, 0]).unwrap();
        assert!(r.exact.is_empty());
    }

    #[test]
    fn closed_form_arguments_are_integral() {
        for cell in cells_up_to(2) {
            for k in 0..729 {
                let digits: Vec<i64> = (0..6).map(|p| (k / 3i64.pow(p)) % 3).collect();
                let m = [digits[0], digits[1], digits[2]];
                let n = [digits[3], digits[4], digits[5]];
                assert!(fine_sum_closed_form(&cell, &m, &n).is_ok());
            }
        }
    }

    #[test]
    fn oracle_cell_matches_grid_filter() {
        let cell = FineCellLabel::new([1, 1, 1, 1, 1], 2).unwrap();
        let grid: Vec<IntMatrix> = enumerate_grid(&cell.moduli(), 1 << 20)
            .unwrap()
            .into_iter()
            .filter(|a| cell_of(a).ok() == Some(cell))
            .collect();
        let oracle = FineCellOracle::enumerate(cell, &Budget::default()).unwrap();
        assert_eq!(oracle.reps.len(), grid.len());
        let zero = oracle.sum(&[0, 0, 0], &[0, 0, 0]).unwrap();
        assert_eq!(zero.exact, PhaseSum::constant(grid.len() as i64));
    }

    #[test]
    fn shifted_character_gives_same_sum() {
        // u_L(1,2) = x1/d1, so shifting m1 by a multiple of the lcm of the
        // superdiagonal denominators changes nothing
        let cell = FineCellLabel::new([2, 1, 1, 1, 2], 1).unwrap();
        let oracle = FineCellOracle::enumerate(cell, &Budget::default()).unwrap();
        let q = oracle.reps.denominator() as i64;
        let a = oracle.sum(&[1, 1, 0], &[1, 0, 1]).unwrap();
        let b = oracle.sum(&[1 + q, 1, 0], &[1, 0, 1 - 3 * q]).unwrap();
        assert_eq!(a.exact, b.exact);
    }

    #[test]
    fn admissible_cells_cover_moduli() {
        for c1 in 1..=6 {
            for c2 in 1..=6 {
                for c3 in 1..=6 {
                    for cell in admissible_cells(&[c1, c2, c3]) {
                        assert_eq!(cell.moduli(), [c1, c2, c3]);
                    }
                }
            }
        }
        assert_eq!(admissible_cells(&[1, 1, 1]), vec![FineCellLabel::trivial()]);
    }

    #[test]
    fn partition_small_moduli() {
        let budget = Budget::new(u64::MAX);
        for c in [[2, 2, 2], [2, 4, 2], [4, 2, 4], [3, 3, 3]] {
            let p = partition_by_cell(&c, &budget).unwrap();
            assert!(p.is_partition(), "{:?}", c);
            for (cell, set) in &p.cells {
                let direct = FineCellOracle::enumerate(*cell, &budget).unwrap();
                assert_eq!(direct.reps.len(), set.len(), "{:?}", cell);
            }
        }
    }

    #[test]
    fn coarse_methods_on_trivial_moduli() {
        let budget = Budget::default();
        for method in [Method::Oracle, Method::ClosedForm] {
            let r = coarse_sum(&[1, 1, 1], &[1, 2, 3], &[3, 2, 1], method, &budget).unwrap();
            assert_eq!(r.exact, PhaseSum::constant(1));
        }
    }

    #[test]
    fn bound_examples() {
        let r =
            longword_bound_holds(&[1, 1, 1], &[0; 3], &[0; 3], Complex64::new(1.0, 0.0)).unwrap();
        assert!(r.holds && r.rhs >= 2.0);
        let budget = Budget::default();
        let v = coarse_sum(&[2, 2, 2], &[0; 3], &[0; 3], Method::Oracle, &budget).unwrap();
        assert!(
            longword_bound_holds(&[2, 2, 2], &[0; 3], &[0; 3], v.value)
                .unwrap()
                .holds
        );
    }
}
