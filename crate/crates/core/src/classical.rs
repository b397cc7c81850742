//! Classical Kloosterman sums `S(m, n; c) = Σ_{a d ≡ 1 (c)} e((m a + n d) / c)`
//! and the Weil bound `|S(m, n; c)| ≤ (m, n, c)^{1/2} c^{1/2} τ(c)`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_integer::Integer;
use num_traits::Float;

use crate::exactnum::{divisor_tau, mod_inverse_u64, PhaseSum};
use crate::{Error, Result};

/// `S(m, n; c)`, exactly. Negative `m`, `n` are reduced mod `c`.
pub fn kloosterman(m: i64, n: i64, c: i64) -> Result<PhaseSum> {
    let table = UnitTable::new(c)?;
    Ok(PhaseSum::from_residue_counts(table.c, &table.counts(m, n)))
}

/// Units mod `c` with their inverses and the `c`-th roots of unity, shared
/// by every `(m, n)` at that modulus.
#[derive(Clone, Debug)]
pub struct UnitTable {
    c: u64,
    pairs: Vec<(u64, u64)>,
    roots: Vec<Complex64>,
}

impl UnitTable {
    pub fn new(c: i64) -> Result<Self> {
        if c <= 0 {
            return Err(Error::NonPositive(c.into()));
        }
        let c = c as u64;
        let pairs = (0..c)
            .filter_map(|a| mod_inverse_u64(a, c).map(|d| (a, d)))
            .collect();
        let roots = (0..c)
            .map(|k| {
                let theta = core::f64::consts::TAU * (k as f64) / (c as f64);
                let (s, co) = Float::sin_cos(theta);
                Complex64::new(co, s)
            })
            .collect();
        Ok(UnitTable { c, pairs, roots })
    }

    pub fn modulus(&self) -> u64 {
        self.c
    }

    /// `counts[r]` = number of units `a` with `m a + n ā ≡ r (mod c)`.
    pub fn counts(&self, m: i64, n: i64) -> Vec<i64> {
        let c = self.c;
        let m = m.rem_euclid(c as i64) as u64;
        let n = n.rem_euclid(c as i64) as u64;
        let mut counts = vec![0i64; c as usize];
        for &(a, d) in &self.pairs {
            let r = (m * a % c + n * d % c) % c;
            counts[r as usize] += 1;
        }
        counts
    }

    /// Double-precision value of `S(m, n; c)`.
    pub fn value(&self, m: i64, n: i64) -> Complex64 {
        self.counts(m, n)
            .iter()
            .zip(&self.roots)
            .filter(|(&k, _)| k != 0)
            .map(|(&k, z)| z * (k as f64))
            .sum()
    }
}

/// Both sides of the Weil bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeilReport {
    pub m: i64,
    pub n: i64,
    pub c: i64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

fn weil_rhs(m: i64, n: i64, c: i64) -> Result<f64> {
    let g = m.gcd(&n).gcd(&c);
    let tau = divisor_tau(c)?;
    Ok(Float::sqrt(g as f64) * Float::sqrt(c as f64) * tau as f64)
}

fn report(table: &UnitTable, m: i64, n: i64) -> Result<WeilReport> {
    let c = table.modulus() as i64;
    let lhs = table.value(m, n).norm();
    let rhs = weil_rhs(m, n, c)?;
    Ok(WeilReport {
        m,
        n,
        c,
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-9,
    })
}

/// Evaluates `|S(m, n; c)| ≤ (m, n, c)^{1/2} c^{1/2} τ(c)`.
pub fn weil_bound_holds(m: i64, n: i64, c: i64) -> Result<WeilReport> {
    report(&UnitTable::new(c)?, m, n)
}

/// Summary of a Weil-bound sweep.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeilGrid {
    pub checked: u64,
    pub failures: Vec<WeilReport>,
    /// Largest `lhs / rhs` seen.
    pub worst_ratio: f64,
}

impl WeilGrid {
    pub fn merge(&mut self, other: WeilGrid) {
        self.checked += other.checked;
        self.failures.extend(other.failures);
        self.worst_ratio = self.worst_ratio.max(other.worst_ratio);
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks the bound for `c` in `cs` and `|m|, |n| ≤ max_mn`.
pub fn weil_grid(cs: impl IntoIterator<Item = i64>, max_mn: i64) -> Result<WeilGrid> {
    let mut grid = WeilGrid::default();
    for c in cs {
        let table = UnitTable::new(c)?;
        for m in -max_mn..=max_mn {
            for n in -max_mn..=max_mn {
                let r = report(&table, m, n)?;
                grid.checked += 1;
                grid.worst_ratio = grid.worst_ratio.max(r.lhs / r.rhs);
                if !r.holds {
                    grid.failures.push(r);
                }
            }
        }
    }
    Ok(grid)
}
