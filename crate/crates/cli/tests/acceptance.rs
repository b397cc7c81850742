//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Runs without the libtest harness so the lines always
//! reach the terminal.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use kloosterman_cli::output::strip_timing;
use kloosterman_cli::verify::{self, SuiteReport};
use kloosterman_core::coset::DEFAULT_BUDGET;
use serde_json::Value;

const SEED: u64 = 20_240_607;

struct Line {
    id: u32,
    title: &'static str,
    passed: bool,
    detail: String,
    elapsed: Duration,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn suite_line(
    id: u32,
    title: &'static str,
    limit: Option<Duration>,
    run: impl FnOnce() -> kloosterman_core::Result<SuiteReport>,
    detail: impl FnOnce(&SuiteReport) -> String,
) -> Line {
    let (report, elapsed) = timed(run);
    match report {
        Ok(r) => {
            let in_time = limit.is_none_or(|l| elapsed < l);
            let mut text = detail(&r);
            if !in_time {
                text.push_str(&format!("; over the {:?} limit", limit.unwrap()));
            }
            Line {
                id,
                title,
                passed: r.passed && in_time,
                detail: text,
                elapsed,
            }
        }
        Err(e) => Line {
            id,
            title,
            passed: false,
            detail: format!("error: {}", e),
            elapsed,
        },
    }
}

fn field(r: &SuiteReport, path: &str) -> String {
    let v = path.split('.').fold(&r.summary, |v, k| &v[k]);
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn cli(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_kloosterman"))
        .args(args)
        .env_remove("KLOOSTERMAN_CACHE")
        .output()
        .expect("binary runs");
    let doc = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap_or(-1), doc)
}

fn determinism() -> (bool, String) {
    let seed = SEED.to_string();
    let queries: [&[&str]; 4] = [
        &[
            "verify", "--suite", "bruhat", "--seed", &seed, "--count", "100",
        ],
        &[
            "verify", "--suite", "lemmas", "--seed", &seed, "--count", "100",
        ],
        &[
            "sl4",
            "fine",
            "--cell",
            "1,1,1,1,1,2",
            "-m",
            "1,0,1",
            "-n",
            "0,1,1",
            "--method",
            "both",
        ],
        &["classical", "-m", "3", "-n", "-7", "-c", "97"],
    ];
    for q in queries {
        let (code_a, mut a) = cli(q);
        let (code_b, mut b) = cli(q);
        strip_timing(&mut a);
        strip_timing(&mut b);
        if code_a != 0
            || code_b != 0
            || a != b
            || serde_json::to_string(&a).unwrap() != serde_json::to_string(&b).unwrap()
        {
            return (false, format!("`{}` differs between runs", q.join(" ")));
        }
    }

    let dir = tempfile::tempdir().expect("temp dir");
    let cache = dir.path().join("cache.jsonl");
    let cache = cache.to_str().unwrap();
    let q = [
        "--cache",
        cache,
        "sl4",
        "fine",
        "--cell",
        "1,1,1,1,1,2",
        "-m",
        "1,2,0",
        "-n",
        "0,0,1",
    ];
    let (_, miss) = cli(&q);
    let (_, hit) = cli(&q);
    let (_, fresh) = cli(&[&["--no-cache"], &q[2..]].concat());
    if miss["cache"] != "miss" || hit["cache"] != "hit" {
        return (
            false,
            format!("cache states {} then {}", miss["cache"], hit["cache"]),
        );
    }
    for key in ["exact_phases", "value_re", "value_im"] {
        if miss[key] != hit[key] || hit[key] != fresh[key] || hit[key].is_null() {
            return (false, format!("{} differs on the cache path", key));
        }
    }
    (
        true,
        String::from(
            "4 queries byte-identical across runs; cache miss/hit/no-cache phases identical",
        ),
    )
}

fn main() -> ExitCode {
    let mut lines = vec![
        suite_line(
            1,
            "classical values",
            Some(Duration::from_secs(1)),
            verify::classical_values,
            |r| format!("{} values checked against enumeration", field(r, "checked")),
        ),
        suite_line(
            2,
            "Weil bound grid",
            Some(Duration::from_secs(30)),
            || verify::weil(500, 20),
            |r| {
                format!(
                    "{} triples, worst |S|/bound {}",
                    field(r, "checked"),
                    field(r, "worst_ratio")
                )
            },
        ),
        suite_line(
            3,
            "long-word matrix",
            Some(Duration::from_secs(1)),
            verify::long_word,
            |_| String::from("rank-4 word and staircase words n = 2..5"),
        ),
    ];

    let (bruhat, elapsed) = timed(|| verify::bruhat(SEED, 1000, 200));
    match bruhat {
        Ok(r) => {
            let in_time = elapsed < Duration::from_secs(60);
            lines.push(Line {
                id: 4,
                title: "Bruhat reconstruction",
                passed: r.passed && in_time,
                detail: format!(
                    "{} rank-4 and {} rank-5 reconstructed",
                    field(&r, "rank4.reconstructed"),
                    field(&r, "rank5.reconstructed")
                ),
                elapsed,
            });
            let gcd_ok =
                field(&r, "rank4.gcd_lemma") == "1000" && field(&r, "rank5.gcd_lemma") == "200";
            lines.push(Line {
                id: 5,
                title: "bottom-row gcd equals corner-minor gcd",
                passed: gcd_ok,
                detail: format!(
                    "{} / 1000 rank-4, {} / 200 rank-5",
                    field(&r, "rank4.gcd_lemma"),
                    field(&r, "rank5.gcd_lemma")
                ),
                elapsed: Duration::ZERO,
            });
        }
        Err(e) => {
            for (id, title) in [
                (4, "Bruhat reconstruction"),
                (5, "bottom-row gcd equals corner-minor gcd"),
            ] {
                lines.push(Line {
                    id,
                    title,
                    passed: false,
                    detail: format!("error: {}", e),
                    elapsed,
                });
            }
        }
    }

    lines.push(suite_line(
        6,
        "A44 inverts M_{123,123} mod f",
        None,
        || verify::lemmas(SEED, 500),
        |r| {
            format!(
                "{} / {} built matrices",
                field(r, "a44_m123_inverse_mod_f"),
                field(r, "samples")
            )
        },
    ));
    lines.push(suite_line(
        7,
        "integrality iff congruences",
        Some(Duration::from_secs(120)),
        || verify::congruences(SEED, 64),
        |r| {
            format!(
                "{} candidates over {} cells, {} integral, {} mismatches",
                field(r, "candidates"),
                field(r, "cells"),
                field(r, "integral"),
                field(r, "mismatches")
            )
        },
    ));
    lines.push(suite_line(
        8,
        "trivial cell sums to 1",
        None,
        || verify::trivial_cell(SEED, 20, DEFAULT_BUDGET),
        |r| {
            format!(
                "{} / {} character pairs",
                field(r, "both_exactly_one"),
                field(r, "pairs")
            )
        },
    ));
    lines.push(suite_line(
        9,
        "fine closed form vs oracle",
        Some(Duration::from_secs(600)),
        || verify::closed_form(DEFAULT_BUDGET),
        |r| {
            format!(
                "{} / {} cells evaluated, {} pairs compared, {} agree, {} discrepancy records",
                field(r, "cells_evaluated"),
                field(r, "cells"),
                field(r, "pairs_compared"),
                field(r, "pairs_agreeing"),
                r.discrepancies.len()
            )
        },
    ));
    lines.push(suite_line(
        10,
        "coarse sum partitions into fine cells",
        None,
        || verify::partition(4, DEFAULT_BUDGET),
        |r| {
            format!(
                "{} moduli, {} representatives",
                field(r, "moduli"),
                field(r, "representatives")
            )
        },
    ));
    lines.push(suite_line(
        11,
        "long-word coarse bound",
        None,
        || verify::bound(4, 2, DEFAULT_BUDGET),
        |r| {
            format!(
                "{} evaluations, worst lhs/rhs {}",
                field(r, "checked"),
                field(r, "worst_ratio")
            )
        },
    ));
    lines.push(suite_line(
        12,
        "Sp4 and SO4 relations",
        None,
        || verify::groups(SEED, 200),
        |r| {
            format!(
                "{} symplectic words; {} of {} det-1 signed permutations",
                field(r, "sp4_relations_vanish"),
                field(r, "so4_relations_vanish_det_one"),
                field(r, "signed_permutations_det_one")
            )
        },
    ));

    let ((passed, detail), elapsed) = timed(determinism);
    lines.push(Line {
        id: 13,
        title: "determinism and cache round trip",
        passed,
        detail,
        elapsed,
    });

    let mut all = true;
    for l in &lines {
        all &= l.passed;
        println!(
            "criterion {:>2} {} {} ({:.2}s): {}",
            l.id,
            if l.passed { "PASS" } else { "FAIL" },
            l.title,
            l.elapsed.as_secs_f64(),
            l.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
