//! Exact scalars: rationals, phases modulo one, and finite ℤ-combinations of
//! roots of unity.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, AddAssign};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Float, One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// Exact rational number, always stored reduced with a positive denominator.
pub type Rational = BigRational;

/// Builds a rational from machine integers. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Integer as a rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// A rational reduced modulo 1 into `[0, 1)`; `e(phase) = exp(2πi·phase)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Phase(Rational);

impl Phase {
    pub fn new(value: Rational) -> Self {
        let floor = value.floor();
        Phase(value - floor)
    }

    pub fn zero() -> Self {
        Phase(Rational::zero())
    }

    /// `num / den` reduced mod 1. Panics if `den == 0`.
    pub fn from_fraction(num: BigInt, den: BigInt) -> Self {
        Phase::new(Rational::new(num, den))
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// `e(self)` in double precision.
    ///
    /// The angle is folded into `[0, π/4]` with exact rational arithmetic
    /// before calling `sin`/`cos`, so quarter turns come out exact.
    pub fn root_of_unity(&self) -> Complex64 {
        if self.0.is_zero() {
            return Complex64::new(1.0, 0.0);
        }
        let num = self.0.numer();
        let den = self.0.denom();
        let four = BigInt::from(4);
        let quadrant = (num * &four).div_floor(den);
        // offset in [0, 1/4)
        let offset = Rational::new(num * &four - &quadrant * den, den * &four);
        let eighth = Rational::new(BigInt::one(), BigInt::from(8));
        // (cos, sin) of the offset angle
        let (c, s) = if offset > eighth {
            let complement = Rational::new(BigInt::one(), four.clone()) - &offset;
            turn_sin_cos(&complement)
        } else {
            let (s, c) = turn_sin_cos(&offset);
            (c, s)
        };
        let (re, im) = match quadrant.to_u8().unwrap_or(0) {
            0 => (c, s),
            1 => (-s, c),
            2 => (-c, -s),
            _ => (s, -c),
        };
        Complex64::new(clean_zero(re), clean_zero(im))
    }
}

/// `(sin, cos)` of `2π · turns`.
fn turn_sin_cos(turns: &Rational) -> (f64, f64) {
    if turns.is_zero() {
        return (0.0, 1.0);
    }
    let angle = core::f64::consts::TAU * turns.to_f64().unwrap_or(0.0);
    Float::sin_cos(angle)
}

fn clean_zero(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

impl fmt::Debug for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Phase({})", self.0)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Add for &Phase {
    type Output = Phase;
    fn add(self, rhs: &Phase) -> Phase {
        Phase::new(&self.0 + &rhs.0)
    }
}

/// An exact finite sum `Σ mult · e(phase)`.
///
/// Zero multiplicities are never stored. Two sums that are equal as complex
/// numbers may still differ as maps (`e(0) + e(1/2)` versus the empty sum);
/// compare values with [`PhaseSum::numerically_equal`].
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct PhaseSum {
    terms: BTreeMap<Phase, i64>,
}

impl PhaseSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(phase: Phase) -> Self {
        let mut s = Self::new();
        s.add_term(phase, 1);
        s
    }

    /// `count · e(0)`.
    pub fn constant(count: i64) -> Self {
        let mut s = Self::new();
        s.add_term(Phase::zero(), count);
        s
    }

    pub fn add_term(&mut self, phase: Phase, mult: i64) {
        if mult == 0 {
            return;
        }
        let entry = self.terms.entry(phase);
        match entry {
            alloc::collections::btree_map::Entry::Vacant(v) => {
                v.insert(mult);
            }
            alloc::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += mult;
                if *o.get() == 0 {
                    o.remove();
                }
            }
        }
    }

    /// Builds `Σ_k counts[k] · e(k / modulus)`.
    pub fn from_residue_counts(modulus: u64, counts: &[i64]) -> Self {
        let mut s = Self::new();
        let m = BigInt::from(modulus);
        for (k, &count) in counts.iter().enumerate() {
            if count != 0 {
                s.add_term(Phase::from_fraction(BigInt::from(k), m.clone()), count);
            }
        }
        s
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Phase, i64)> {
        self.terms.iter().map(|(p, &m)| (p, m))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Σ |multiplicity|, an upper bound for the modulus of the value.
    pub fn total_mass(&self) -> u64 {
        self.terms.values().map(|m| m.unsigned_abs()).sum()
    }

    /// Σ multiplicity, i.e. the value at the trivial character.
    pub fn signed_count(&self) -> i64 {
        self.terms.values().sum()
    }

    pub fn scaled(&self, k: i64) -> Self {
        if k == 0 {
            return Self::new();
        }
        PhaseSum {
            terms: self
                .terms
                .iter()
                .map(|(p, &m)| (p.clone(), m * k))
                .collect(),
        }
    }

    /// Product of two sums: phases add, multiplicities multiply.
    pub fn product(&self, other: &PhaseSum) -> Self {
        let mut out = Self::new();
        for (p, &a) in &self.terms {
            for (q, &b) in &other.terms {
                out.add_term(p + q, a * b);
            }
        }
        out
    }

    /// Numeric value, summed in ascending phase order.
    pub fn eval(&self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (p, &m) in &self.terms {
            acc += p.root_of_unity() * (m as f64);
        }
        Complex64::new(clean_zero(acc.re), clean_zero(acc.im))
    }

    /// Equality of values within `1e-6 · (1 + mass)`, mass being the total
    /// multiplicity of both operands.
    pub fn numerically_equal(&self, other: &PhaseSum) -> bool {
        values_agree(
            self.eval(),
            other.eval(),
            self.total_mass() + other.total_mass(),
        )
    }
}

/// The tolerance rule behind [`PhaseSum::numerically_equal`].
pub fn values_agree(a: Complex64, b: Complex64, mass: u64) -> bool {
    (a - b).norm() < 1e-6 * (1.0 + mass as f64)
}

/// Numeric value of a phase sum.
pub fn phase_sum_eval(s: &PhaseSum) -> Complex64 {
    s.eval()
}

impl fmt::Debug for PhaseSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.terms.iter().map(|(p, m)| (p.value(), m)))
            .finish()
    }
}

impl AddAssign<&PhaseSum> for PhaseSum {
    fn add_assign(&mut self, rhs: &PhaseSum) {
        for (p, &m) in &rhs.terms {
            self.add_term(p.clone(), m);
        }
    }
}

impl AddAssign for PhaseSum {
    fn add_assign(&mut self, rhs: PhaseSum) {
        if self.terms.is_empty() {
            *self = rhs;
            return;
        }
        for (p, m) in rhs.terms {
            self.add_term(p, m);
        }
    }
}

impl Add for PhaseSum {
    type Output = PhaseSum;
    fn add(mut self, rhs: PhaseSum) -> PhaseSum {
        self += rhs;
        self
    }
}

impl FromIterator<(Phase, i64)> for PhaseSum {
    fn from_iter<I: IntoIterator<Item = (Phase, i64)>>(iter: I) -> Self {
        let mut s = PhaseSum::new();
        for (p, m) in iter {
            s.add_term(p, m);
        }
        s
    }
}

pub fn gcd(a: &BigInt, b: &BigInt) -> BigInt {
    a.gcd(b)
}

/// Nonnegative gcd of all values; the gcd of an all-zero input is 0.
pub fn gcd_many<'a, I>(values: I) -> Result<BigInt>
where
    I: IntoIterator<Item = &'a BigInt>,
{
    let mut iter = values.into_iter();
    let first = iter.next().ok_or(Error::EmptyInput)?;
    Ok(iter.fold(first.abs(), |acc, v| acc.gcd(v)))
}

/// Bezout coefficients: returns `(g, x, y)` with `a·x + b·y = g = gcd(a, b)`.
pub fn extended_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let e = a.extended_gcd(b);
    (e.gcd, e.x, e.y)
}

/// The inverse of `a` modulo `modulus`, in `[0, modulus)`. Modulus 1 gives 0.
pub fn mod_inverse(a: &BigInt, modulus: &BigInt) -> Result<BigInt> {
    if !modulus.is_positive() {
        return Err(Error::NonPositive(modulus.clone()));
    }
    if modulus.is_one() {
        return Ok(BigInt::zero());
    }
    let (g, x, _) = extended_gcd(&a.mod_floor(modulus), modulus);
    if !g.is_one() {
        return Err(Error::NotInvertible {
            value: a.clone(),
            modulus: modulus.clone(),
        });
    }
    Ok(x.mod_floor(modulus))
}

/// Inverse for machine-sized moduli, used by the hot loops.
pub fn mod_inverse_u64(a: u64, modulus: u64) -> Option<u64> {
    if modulus == 1 {
        return Some(0);
    }
    let (mut r0, mut r1) = (modulus as i128, (a % modulus) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 != 1 {
        return None;
    }
    Some(s0.rem_euclid(modulus as i128) as u64)
}

/// Number of positive divisors.
pub fn divisor_tau(c: i64) -> Result<u64> {
    if c <= 0 {
        return Err(Error::NonPositive(BigInt::from(c)));
    }
    Ok(factorize(c as u64)
        .iter()
        .map(|&(_, e)| u64::from(e) + 1)
        .product())
}

/// Euler's totient.
pub fn euler_phi(c: i64) -> Result<u64> {
    if c <= 0 {
        return Err(Error::NonPositive(BigInt::from(c)));
    }
    let n = c as u64;
    Ok(factorize(n)
        .iter()
        .fold(n, |acc, &(p, _)| acc / p * (p - 1)))
}

/// Positive divisors in increasing order.
pub fn divisors(c: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= c {
        if c.is_multiple_of(d) {
            small.push(d);
            if d * d != c {
                large.push(c / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Trial-division factorization `[(p, e)]`, primes ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn b(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn gcd_many_examples() {
        assert_eq!(gcd_many(&[b(12), b(18)]).unwrap(), b(6));
        assert_eq!(gcd_many(&[b(1), b(0), b(0)]).unwrap(), b(1));
        assert_eq!(gcd_many(&[b(0), b(0)]).unwrap(), b(0));
        assert_eq!(gcd_many(&[b(-4), b(6)]).unwrap(), b(2));
        assert_eq!(gcd_many(&[] as &[BigInt]), Err(Error::EmptyInput));
    }

    #[test]
    fn mod_inverse_examples() {
        assert_eq!(mod_inverse(&b(3), &b(7)).unwrap(), b(5));
        assert_eq!(mod_inverse(&b(1), &b(1)).unwrap(), b(0));
        assert_eq!(mod_inverse(&b(-3), &b(7)).unwrap(), b(2));
        assert!(matches!(
            mod_inverse(&b(2), &b(4)),
            Err(Error::NotInvertible { .. })
        ));
        assert_eq!(mod_inverse_u64(3, 7), Some(5));
        assert_eq!(mod_inverse_u64(2, 4), None);
    }

    #[test]
    fn tau_and_phi() {
        assert_eq!(divisor_tau(12).unwrap(), 6);
        assert_eq!(divisor_tau(1).unwrap(), 1);
        assert_eq!(divisor_tau(7).unwrap(), 2);
        assert!(matches!(divisor_tau(0), Err(Error::NonPositive(_))));
        assert_eq!(euler_phi(6).unwrap(), 2);
        assert_eq!(euler_phi(1).unwrap(), 1);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
    }

    #[test]
    fn tau_is_multiplicative() {
        for a in 1..=100i64 {
            for c in 1..=100i64 {
                if a.gcd(&c) == 1 {
                    assert_eq!(
                        divisor_tau(a * c).unwrap(),
                        divisor_tau(a).unwrap() * divisor_tau(c).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn eval_examples() {
        let mut s = PhaseSum::new();
        s.add_term(Phase::new(rat(1, 2)), 1);
        s.add_term(Phase::new(rat(1, 2)), 1);
        assert_eq!(s.len(), 1);
        assert_eq!(s.eval(), Complex64::new(-2.0, 0.0));

        let s: PhaseSum = [(Phase::new(rat(1, 3)), 1), (Phase::new(rat(2, 3)), 1)]
            .into_iter()
            .collect();
        let v = s.eval();
        assert!((v.re + 1.0).abs() < 1e-12 && v.im.abs() < 1e-12);

        assert_eq!(PhaseSum::new().eval(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn quarter_turns_are_exact() {
        assert_eq!(
            Phase::new(rat(1, 4)).root_of_unity(),
            Complex64::new(0.0, 1.0)
        );
        assert_eq!(
            Phase::new(rat(3, 4)).root_of_unity(),
            Complex64::new(0.0, -1.0)
        );
        assert_eq!(
            Phase::new(rat(-1, 2)).root_of_unity(),
            Complex64::new(-1.0, 0.0)
        );
        let z = Phase::new(rat(5, 12)).root_of_unity();
        let want = Complex64::new(
            (core::f64::consts::TAU * 5.0 / 12.0).cos(),
            (core::f64::consts::TAU * 5.0 / 12.0).sin(),
        );
        assert!((z - want).norm() < 1e-15);
    }

    #[test]
    fn phases_reduce_mod_one() {
        assert_eq!(Phase::new(rat(7, 3)), Phase::new(rat(1, 3)));
        assert_eq!(Phase::new(rat(-1, 3)), Phase::new(rat(2, 3)));
        assert!(Phase::new(int(5)).is_zero());
    }

    #[test]
    fn cancelling_terms_are_removed() {
        let mut s = PhaseSum::single(Phase::new(rat(1, 5)));
        s.add_term(Phase::new(rat(6, 5)), -1);
        assert!(s.is_empty());
    }

    #[test]
    fn product_of_sums() {
        // (e(1/4) + 1)(e(3/4) + 1) = 2 + e(1/4) + e(3/4) = 2
        let a: PhaseSum = [(Phase::new(rat(1, 4)), 1), (Phase::zero(), 1)]
            .into_iter()
            .collect();
        let c: PhaseSum = [(Phase::new(rat(3, 4)), 1), (Phase::zero(), 1)]
            .into_iter()
            .collect();
        let p = a.product(&c);
        assert_eq!(p.eval(), Complex64::new(2.0, 0.0));
        assert_eq!(p.signed_count(), 4);
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn phase_terms() -> impl Strategy<Value = Vec<(i64, i64, i64)>> {
        proptest::collection::vec((-20i64..20, 1i64..13, -4i64..5), 0..12)
    }

    fn build(terms: &[(i64, i64, i64)]) -> PhaseSum {
        terms
            .iter()
            .map(|&(n, d, m)| (Phase::new(rat(n, d)), m))
            .collect()
    }

    proptest! {
        #[test]
        fn merge_is_order_independent(a in phase_terms(), b in phase_terms(), c in phase_terms()) {
            let (x, y, z) = (build(&a), build(&b), build(&c));
            let left = (x.clone() + y.clone()) + z.clone();
            let right = x + (z + y);
            prop_assert_eq!(left, right);
        }

        #[test]
        fn value_bounded_by_mass(a in phase_terms()) {
            let s = build(&a);
            prop_assert!(s.eval().norm() <= s.total_mass() as f64 + 1e-9);
        }

        #[test]
        fn inverse_roundtrip(a in -500i64..500, m in 2i64..400) {
            let (a, m) = (BigInt::from(a), BigInt::from(m));
            if a.gcd(&m).is_one() {
                let inv = mod_inverse(&a, &m).unwrap();
                prop_assert!((a * inv).mod_floor(&m).is_one());
            }
        }
    }
}
