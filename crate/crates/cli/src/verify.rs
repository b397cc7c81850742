//! Verification suites. Each returns a [`SuiteReport`] whose summary is a
//! JSON document; randomized suites take an explicit seed.

use std::collections::BTreeMap;

use kloosterman_core::bruhat::{decompose, gcd_lemma_holds, random_big_cell};
use kloosterman_core::classical::{kloosterman, weil_grid, WeilGrid};
use kloosterman_core::coset::{Budget, NoFilter};
use kloosterman_core::exactnum::{euler_phi, PhaseSum};
use kloosterman_core::groups::{
    is_symplectic, random_symplectic_word, signed_permutation_matrices, so4_relations,
    sp4_minor_relations,
};
use kloosterman_core::sl4::{
    build_from_gammas, cell_of, closed_form_conditions, compare, congruence_system,
    coordinate_factors, fine_sum_closed_form, lemma_checks, longword_bound_holds,
    partition_representatives, random_gammas, random_gammas_with_units, unit_congruence_check,
    CellFilter, Coordinates, FineCellLabel, FineCellOracle,
};
use kloosterman_core::weyl::{long_word_matrix, word_to_matrix, ReducedWord};
use kloosterman_core::Result;
use num_complex::Complex64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::enumerate_parallel;
use crate::output::round_value;

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: bool,
    pub summary: Value,
    /// Machine-readable records of evaluator disagreements.
    pub discrepancies: Vec<Value>,
}

impl SuiteReport {
    fn new(name: &'static str, passed: bool, summary: Value) -> Self {
        SuiteReport {
            name,
            passed,
            summary,
            discrepancies: Vec::new(),
        }
    }

    pub fn to_value(&self, inline_discrepancies: bool) -> Value {
        let mut doc = json!({
            "suite": self.name,
            "passed": self.passed,
            "summary": self.summary,
            "discrepancy_count": self.discrepancies.len(),
        });
        if inline_discrepancies && !self.discrepancies.is_empty() {
            doc["discrepancies"] = Value::Array(self.discrepancies.clone());
        }
        doc
    }
}

/// Every label with each parameter in `values`.
pub fn cells_over(values: &[u64]) -> Vec<FineCellLabel> {
    let mut out = Vec::new();
    let k = values.len();
    for idx in 0..k.pow(6) {
        let pick = |p: u32| values[(idx / k.pow(p)) % k];
        out.push(FineCellLabel {
            d: [pick(0), pick(1), pick(2), pick(3), pick(4)],
            f: pick(5),
        });
    }
    out
}

/// Every triple with entries in `1..=max`.
pub fn moduli_up_to(max: u64) -> Vec<[u64; 3]> {
    let mut out = Vec::new();
    for c1 in 1..=max {
        for c2 in 1..=max {
            for c3 in 1..=max {
                out.push([c1, c2, c3]);
            }
        }
    }
    out
}

/// Every `(m, n)` with all six components in `values`.
pub fn character_pairs(values: &[i64]) -> Vec<([i64; 3], [i64; 3])> {
    let k = values.len();
    (0..k.pow(6))
        .map(|idx| {
            let pick = |p: u32| values[(idx / k.pow(p)) % k];
            ([pick(0), pick(1), pick(2)], [pick(3), pick(4), pick(5)])
        })
        .collect()
}

/// `S(m, n; c)` straight from the definition, in floating point.
pub fn naive_kloosterman(m: i64, n: i64, c: i64) -> Complex64 {
    let mut acc = Complex64::zero();
    for a in 0..c {
        for d in 0..c {
            if (a * d).rem_euclid(c) == 1 % c {
                let theta =
                    std::f64::consts::TAU * ((m * a + n * d).rem_euclid(c) as f64) / c as f64;
                acc += Complex64::new(theta.cos(), theta.sin());
            }
        }
    }
    acc
}

pub fn classical_values() -> Result<SuiteReport> {
    let mut cases = vec![(1, 1, 2, 1.0), (1, 1, 3, -1.0), (1, 0, 4, 0.0)];
    for c in 1..=50 {
        cases.push((0, 0, c, euler_phi(c)? as f64));
    }
    let mut failures = Vec::new();
    for &(m, n, c, want) in &cases {
        let exact = kloosterman(m, n, c)?.eval();
        let naive = naive_kloosterman(m, n, c);
        let ok = (exact - Complex64::new(want, 0.0)).norm() < 1e-9 && (exact - naive).norm() < 1e-9;
        if !ok {
            failures.push(json!({"m": m, "n": n, "c": c, "expected": want, "exact_re": exact.re, "naive_re": naive.re}));
        }
    }
    Ok(SuiteReport::new(
        "classical",
        failures.is_empty(),
        json!({"checked": cases.len(), "failures": failures}),
    ))
}

pub fn weil(max_c: u64, max_mn: i64) -> Result<SuiteReport> {
    let grid = (1..=max_c as i64)
        .into_par_iter()
        .map(|c| weil_grid([c], max_mn))
        .try_reduce(WeilGrid::default, |mut a, b| {
            a.merge(b);
            Ok(a)
        })?;
    let failures: Vec<Value> = grid
        .failures
        .iter()
        .take(20)
        .map(|r| json!({"m": r.m, "n": r.n, "c": r.c, "lhs": r.lhs, "rhs": r.rhs}))
        .collect();
    Ok(SuiteReport::new(
        "weil",
        grid.passed(),
        json!({
            "max_c": max_c,
            "max_mn": max_mn,
            "checked": grid.checked,
            "failure_count": grid.failures.len(),
            "failures": failures,
            "worst_ratio": round_value(grid.worst_ratio),
        }),
    ))
}

pub fn long_word() -> Result<SuiteReport> {
    let word = ReducedWord::parse("1,2,1,3,2,1")?;
    let rank4 = word_to_matrix(&word, 4)? == long_word_matrix(4)?;
    let mut staircase = BTreeMap::new();
    for n in 2..=5usize {
        let w = ReducedWord::staircase(n);
        let ok = w.is_reduced(n)?
            && w.len() == n * (n - 1) / 2
            && word_to_matrix(&w, n)? == long_word_matrix(n)?;
        staircase.insert(n.to_string(), ok);
    }
    let passed = rank4 && staircase.values().all(|&b| b);
    Ok(SuiteReport::new(
        "longword",
        passed,
        json!({"rank4_word": rank4, "staircase": staircase}),
    ))
}

pub fn bruhat(seed: u64, count4: usize, count5: usize) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut summary = BTreeMap::new();
    let mut passed = true;
    for (n, count) in [(4usize, count4), (5, count5)] {
        let mut reconstructed = 0;
        let mut gcd_ok = 0;
        for _ in 0..count {
            let a = random_big_cell(n, &mut rng);
            if decompose(&a)?.reconstruct() == a.to_rational() {
                reconstructed += 1;
            }
            if gcd_lemma_holds(&a) {
                gcd_ok += 1;
            }
        }
        passed &= reconstructed == count && gcd_ok == count;
        summary.insert(
            format!("rank{}", n),
            json!({"samples": count, "reconstructed": reconstructed, "gcd_lemma": gcd_ok}),
        );
    }
    Ok(SuiteReport::new("bruhat", passed, json!(summary)))
}

pub fn lemmas(seed: u64, count: usize) -> Result<SuiteReport> {
    let cells = cells_over(&[1, 2, 3]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut inverse, mut gcd_eq, mut units, mut round_trip, mut congruences, mut unit) =
        (0, 0, 0, 0, 0, 0);
    for _ in 0..count {
        let cell = cells[rng.gen_range(0..cells.len())];
        let g = random_gammas(&cell, 5, &mut rng);
        let a = build_from_gammas(&cell, &g)?;
        let r = lemma_checks(&a)?;
        inverse += r.inverse_mod_f as usize;
        gcd_eq += r.gcd_equality as usize;
        units += r.units_mod_f as usize;
        round_trip += (cell_of(&a)? == cell) as usize;
        congruences += congruence_system(&cell, &Coordinates::from_gammas(&g)).satisfied() as usize;
        let gu = random_gammas_with_units(&cell, 50, &mut rng);
        unit += unit_congruence_check(&cell, &Coordinates::from_gammas(&gu))?.all_pass() as usize;
    }
    let all = [inverse, gcd_eq, units, round_trip, congruences, unit];
    Ok(SuiteReport::new(
        "lemmas",
        all.iter().all(|&k| k == count),
        json!({
            "samples": count,
            "a44_m123_inverse_mod_f": inverse,
            "gcd_equality": gcd_eq,
            "units_mod_f": units,
            "cell_round_trip": round_trip,
            "congruences_on_built": congruences,
            "unit_congruences": unit,
        }),
    ))
}

/// Integrality of `u_L · w0 · T · u_R` against the congruence system over
/// coordinate candidates: every residue of `x1, x3, y4, y5` modulo its
/// `d`, the free coordinates `x2, x4, x5, y1, y2, y3, x6, y6` over a 0/1
/// box, and `random` seeded points with entries in `[-N, N]`.
pub fn congruences(seed: u64, random: usize) -> Result<SuiteReport> {
    let cells = cells_over(&[1, 2]);
    let per_cell: Vec<(FineCellLabel, [usize; 3])> = cells
        .par_iter()
        .enumerate()
        .map(|(k, cell)| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed ^ (k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let mut counts = [0usize; 3];
            let mut check = |c: Coordinates| {
                let integral = coordinate_factors(cell, &c).product().is_integral();
                let satisfied = congruence_system(cell, &c).satisfied();
                counts[integral as usize] += 1;
                if integral != satisfied {
                    counts[2] += 1;
                }
            };
            let [d1, _, d3, d4, d5] = cell.d.map(|v| v as i64);
            for x1 in 0..d1 {
                for x3 in 0..d3 {
                    for y4 in 0..d4 {
                        for y5 in 0..d5 {
                            for bits in 0..256u32 {
                                let b = |i: u32| i64::from((bits >> i) & 1);
                                check(Coordinates::from_i64(
                                    [x1, b(0), x3, b(1), b(2), b(6)],
                                    [b(3), b(4), b(5), y4, y5, b(7)],
                                ));
                            }
                        }
                    }
                }
            }
            let bound = cell.full_modulus() as i64;
            for _ in 0..random {
                let x: [i64; 6] = std::array::from_fn(|_| rng.gen_range(-bound..=bound));
                let y: [i64; 6] = std::array::from_fn(|_| rng.gen_range(-bound..=bound));
                check(Coordinates::from_i64(x, y));
            }
            (*cell, counts)
        })
        .collect();
    let (mut non_integral, mut integral, mut mismatches) = (0, 0, 0);
    let mut failing = Vec::new();
    for (cell, [a, b, c]) in &per_cell {
        non_integral += a;
        integral += b;
        mismatches += c;
        if *c > 0 {
            failing.push(json!(cell.to_string()));
        }
    }
    Ok(SuiteReport::new(
        "congruences",
        mismatches == 0 && per_cell.len() == cells.len(),
        json!({
            "cells": per_cell.len(),
            "candidates": integral + non_integral,
            "integral": integral,
            "non_integral": non_integral,
            "mismatches": mismatches,
            "mismatched_cells": failing,
        }),
    ))
}

pub fn trivial_cell(seed: u64, count: usize, budget: u64) -> Result<SuiteReport> {
    let cell = FineCellLabel::trivial();
    let oracle = FineCellOracle::enumerate(cell, &Budget::new(budget))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut exact_ones = 0;
    let one = PhaseSum::constant(1);
    for _ in 0..count {
        let m: [i64; 3] = std::array::from_fn(|_| rng.gen_range(-10..=10));
        let n: [i64; 3] = std::array::from_fn(|_| rng.gen_range(-10..=10));
        let o = oracle.sum(&m, &n)?;
        let c = fine_sum_closed_form(&cell, &m, &n)?;
        exact_ones += (o.exact == one && c.exact == one) as usize;
    }
    Ok(SuiteReport::new(
        "trivial",
        exact_ones == count,
        json!({"pairs": count, "both_exactly_one": exact_ones}),
    ))
}

/// The fine-cell representatives for `cell`, enumerated in parallel.
pub fn cell_oracle(cell: FineCellLabel, budget: &Budget) -> Result<FineCellOracle> {
    let reps = enumerate_parallel(&cell.moduli(), &CellFilter::new(cell), budget)?;
    Ok(FineCellOracle { cell, reps })
}

/// Oracle against closed form on every cell with `d_i, f ∈ {1, 2}` and
/// every character pair with entries in `{0, 1, 2}` meeting the closed
/// form's hypotheses. The suite passes when every cell is evaluated; each
/// disagreement becomes a discrepancy record.
pub fn closed_form(budget: u64) -> Result<SuiteReport> {
    let cells = cells_over(&[1, 2]);
    let pairs = character_pairs(&[0, 1, 2]);
    let rows: Vec<Result<(Value, Vec<Value>)>> = cells
        .par_iter()
        .map(|&cell| {
            let oracle = cell_oracle(cell, &Budget::new(budget))?;
            let mut compared = 0usize;
            let mut agreed = 0usize;
            let mut records = Vec::new();
            for (m, n) in &pairs {
                if !closed_form_conditions(&cell, m, n).iter().all(|&b| b) {
                    continue;
                }
                let cmp = compare(&oracle, m, n)?;
                compared += 1;
                if cmp.agree {
                    agreed += 1;
                } else if let Some(d) = cmp.discrepancy() {
                    records.push(json!({
                        "cell": d.cell.as_vec(),
                        "m": d.m,
                        "n": d.n,
                        "oracle": [round_value(d.oracle.re), round_value(d.oracle.im)],
                        "closed_form": [round_value(d.closed.re), round_value(d.closed.im)],
                        "oracle_representatives": d.oracle_representatives,
                    }));
                }
            }
            let row = json!({
                "cell": cell.to_string(),
                "representatives": oracle.reps.len(),
                "compared": compared,
                "agreed": agreed,
            });
            Ok((row, records))
        })
        .collect();
    let mut matrix = Vec::new();
    let mut discrepancies = Vec::new();
    let mut errors = Vec::new();
    for (cell, row) in cells.iter().zip(rows) {
        match row {
            Ok((r, d)) => {
                matrix.push(r);
                discrepancies.extend(d);
            }
            Err(e) => errors.push(json!({"cell": cell.to_string(), "error": e.to_string()})),
        }
    }
    let compared: u64 = matrix
        .iter()
        .map(|r| r["compared"].as_u64().unwrap_or(0))
        .sum();
    let agreed: u64 = matrix
        .iter()
        .map(|r| r["agreed"].as_u64().unwrap_or(0))
        .sum();
    let cells_agreeing = matrix
        .iter()
        .filter(|r| r["compared"] == r["agreed"])
        .count();
    let complete = errors.is_empty() && matrix.len() == cells.len();
    let mut report = SuiteReport::new(
        "closed-form",
        complete && (agreed as usize + discrepancies.len()) as u64 == compared,
        json!({
            "cells": cells.len(),
            "cells_evaluated": matrix.len(),
            "cells_fully_agreeing": cells_agreeing,
            "pairs_compared": compared,
            "pairs_agreeing": agreed,
            "pairs_disagreeing": discrepancies.len(),
            "errors": errors,
            "agreement_matrix": matrix,
        }),
    );
    report.discrepancies = discrepancies;
    Ok(report)
}

fn sum_in_order(
    parts: &[&kloosterman_core::coset::RepresentativeSet],
    m: &[i64; 3],
    n: &[i64; 3],
) -> Result<PhaseSum> {
    let mut total = PhaseSum::new();
    for p in parts {
        total += p.phase_sum(m, n)?;
    }
    Ok(total)
}

/// Splits each `Ω(c)` by fine cell, checks the split is a partition and
/// that aggregating fine sums gives the same coarse sum in any order.
pub fn partition(max_c: u64, budget: u64) -> Result<SuiteReport> {
    let characters = [
        ([0, 0, 0], [0, 0, 0]),
        ([1, 0, 2], [2, 1, 1]),
        ([1, 1, 1], [1, 1, 1]),
        ([-1, 2, 0], [0, -2, 1]),
    ];
    let rows: Vec<Result<Value>> = moduli_up_to(max_c)
        .into_par_iter()
        .map(|c| {
            let all = enumerate_parallel(&c, &NoFilter, &Budget::new(budget))?;
            let p = partition_representatives(&c, all)?;
            let forward: Vec<_> = p.cells.iter().map(|(_, r)| r).collect();
            let reverse: Vec<_> = forward.iter().rev().copied().collect();
            let interleaved: Vec<_> = forward
                .iter()
                .step_by(2)
                .chain(forward.iter().skip(1).step_by(2))
                .copied()
                .collect();
            let mut order_invariant = true;
            for (m, n) in &characters {
                let a = sum_in_order(&forward, m, n)?;
                order_invariant &= a == sum_in_order(&reverse, m, n)?
                    && a == sum_in_order(&interleaved, m, n)?
                    && a == p.all.phase_sum(m, n)?;
            }
            Ok(json!({
                "c": c,
                "representatives": p.all.len(),
                "cells": p.cells.len(),
                "nonempty_cells": p.cells.iter().filter(|(_, r)| !r.is_empty()).count(),
                "unlabeled": p.unlabeled.len(),
                "stray": p.stray.len(),
                "partition": p.is_partition(),
                "order_invariant": order_invariant,
            }))
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let bad: Vec<&Value> = rows
        .iter()
        .filter(|r| r["partition"] != json!(true) || r["order_invariant"] != json!(true))
        .collect();
    Ok(SuiteReport::new(
        "partition",
        bad.is_empty(),
        json!({
            "moduli": rows.len(),
            "representatives": rows.iter().map(|r| r["representatives"].as_u64().unwrap_or(0)).sum::<u64>(),
            "failures": bad,
        }),
    ))
}

/// The long-word bound on oracle coarse sums.
pub fn bound(max_c: u64, max_mn: i64, budget: u64) -> Result<SuiteReport> {
    let values: Vec<i64> = (-max_mn..=max_mn).collect();
    let pairs = character_pairs(&values);
    let rows: Vec<Result<(u64, Vec<Value>, f64)>> = moduli_up_to(max_c)
        .into_par_iter()
        .map(|c| {
            let all = enumerate_parallel(&c, &NoFilter, &Budget::new(budget))?;
            let mut failures = Vec::new();
            let mut worst = 0f64;
            for (m, n) in &pairs {
                let value = all.phase_sum(m, n)?.eval();
                let r = longword_bound_holds(&c, m, n, value)?;
                worst = worst.max(r.lhs / r.rhs);
                if !r.holds {
                    failures.push(json!({"c": c, "m": m, "n": n, "lhs": r.lhs, "rhs": r.rhs}));
                }
            }
            Ok((pairs.len() as u64, failures, worst))
        })
        .collect();
    let mut checked = 0;
    let mut failures = Vec::new();
    let mut worst = 0f64;
    for r in rows {
        let (k, f, w) = r?;
        checked += k;
        failures.extend(f);
        worst = worst.max(w);
    }
    Ok(SuiteReport::new(
        "bound",
        failures.is_empty(),
        json!({
            "max_c": max_c,
            "max_mn": max_mn,
            "checked": checked,
            "failure_count": failures.len(),
            "failures": failures.into_iter().take(20).collect::<Vec<_>>(),
            "worst_ratio": round_value(worst),
        }),
    ))
}

pub fn groups(seed: u64, count: usize) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut symplectic = 0;
    let mut relations = 0;
    for _ in 0..count {
        let len = rng.gen_range(1..=8);
        let a = random_symplectic_word(len, &mut rng);
        symplectic += is_symplectic(&a)? as usize;
        relations += sp4_minor_relations(&a)?.iter().all(|(_, v)| v.is_zero()) as usize;
    }
    let mut det_one = 0;
    let mut vanishing_on_det_one = 0;
    let mut vanishing_on_det_minus_one = 0;
    for a in signed_permutation_matrices(4) {
        let zero = so4_relations(&a)?.all_zero();
        if a.det() == num_bigint::BigInt::from(1) {
            det_one += 1;
            vanishing_on_det_one += zero as usize;
        } else {
            vanishing_on_det_minus_one += zero as usize;
        }
    }
    Ok(SuiteReport::new(
        "groups",
        symplectic == count
            && relations == count
            && vanishing_on_det_one == det_one
            && vanishing_on_det_minus_one == 0,
        json!({
            "symplectic_words": count,
            "symplectic": symplectic,
            "sp4_relations_vanish": relations,
            "signed_permutations_det_one": det_one,
            "so4_relations_vanish_det_one": vanishing_on_det_one,
            "so4_relations_vanish_det_minus_one": vanishing_on_det_minus_one,
        }),
    ))
}
