use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use kloosterman_core::bruhat::{canonical_matrix, corner_minors, decompose};
use kloosterman_core::classical::{kloosterman, weil_bound_holds};
use kloosterman_core::coset::{Budget, NoFilter};
use kloosterman_core::exactnum::values_agree;
use kloosterman_core::groups::{is_symplectic, so4_relations, sp4_minor_relations};
use kloosterman_core::sl4::{
    closed_form_conditions, coarse_sum, compare, FineCellLabel, KloostermanResult, Method,
};
use kloosterman_core::sl5::{sl5_fine_sum_oracle, PsiConvention, Sl5FineCellLabel};
use kloosterman_core::{IntMatrix, Matrix, VERSION_TAG};
use num_bigint::BigInt;
use serde_json::{json, Value};

use crate::args::{
    Cli, Command, GroupKind, GroupsCommand, MethodArg, Sl4Command, Sl5Command, Suite, VerifyArgs,
};
use crate::cache::Cache;
use crate::enumerate_parallel;
use crate::output::{
    int_matrix_value, phases_from_value, rat_matrix_value, render, result_value, round_value,
};
use crate::verify::{self, cell_oracle, SuiteReport};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Domain(#[from] kloosterman_core::Error),
    #[error("bad input in {path}: {detail}")]
    Input { path: PathBuf, detail: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "Usage",
            CliError::Domain(e) => e.code(),
            CliError::Input { .. } => "BadInput",
            CliError::Io { .. } => "Io",
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// A finished command: the document and whether it reports success.
struct Outcome {
    doc: Value,
    ok: bool,
}

impl Outcome {
    fn ok(doc: Value) -> Self {
        Outcome { doc, ok: true }
    }
}

/// Parses `argv`, runs the command and writes the document to `out`.
/// Returns the process exit code: 0 success, 1 domain error or failed
/// suite, 2 usage error.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{}", text)
            } else {
                write!(err, "{}", text)
            };
            return code;
        }
    };
    let start = Instant::now();
    match execute(&cli, err) {
        Ok(Outcome { mut doc, ok }) => {
            if let Value::Object(map) = &mut doc {
                let ms = start.elapsed().as_secs_f64() * 1e3;
                map.insert("elapsed_ms".into(), json!((ms * 1e3).round() / 1e3));
            }
            let _ = out.write_all(render(&doc, cli.format).as_bytes());
            if ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let doc = json!({"error": {"code": e.code(), "message": e.to_string()}});
            let _ = out.write_all(render(&doc, cli.format).as_bytes());
            let _ = writeln!(err, "error: {}", e);
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli, err: &mut dyn Write) -> CliResult<Outcome> {
    let cache = match (&cli.cache, cli.no_cache) {
        (Some(p), false) => Some(Cache::new(p)),
        _ => None,
    };
    let budget = cli.budget;
    match &cli.command {
        Command::Classical(a) => {
            let query = json!({"kind": "classical", "m": a.m, "n": a.n, "c": a.c});
            cached(cache.as_ref(), query, err, || {
                let s = kloosterman(a.m, a.n, a.c)?;
                let v = s.eval();
                let w = weil_bound_holds(a.m, a.n, a.c)?;
                Ok(json!({
                    "method": "exact",
                    "exact_phases": crate::output::phases_value(&s),
                    "value_re": round_value(v.re),
                    "value_im": round_value(v.im),
                    "weil": {"lhs": round_value(w.lhs), "rhs": round_value(w.rhs), "holds": w.holds},
                }))
            })
        }
        Command::Decompose(a) => decompose_command(&a.matrix, a.rank, a.canonical).map(Outcome::ok),
        Command::Sl4 { command } => match command {
            Sl4Command::Fine { cell, m, n, method } => {
                let cell: FineCellLabel = cell.parse().map_err(usage)?;
                let (m, n) = (triple(m)?, triple(n)?);
                let query = json!({
                    "kind": "sl4-fine", "cell": cell.as_vec(), "m": m, "n": n, "method": method_name(*method),
                });
                cached(cache.as_ref(), query, err, || {
                    sl4_fine(cell, m, n, *method, budget)
                })
            }
            Sl4Command::Coarse { c, m, n, method } => {
                let c = positive_triple(c)?;
                let (m, n) = (triple(m)?, triple(n)?);
                let query = json!({"kind": "sl4-coarse", "c": c, "m": m, "n": n, "method": method_name(*method)});
                cached(cache.as_ref(), query, err, || {
                    sl4_coarse(c, m, n, *method, budget)
                })
            }
        },
        Command::Sl5 { command } => match command {
            Sl5Command::Fine { cell, m, n, method } => {
                if *method != MethodArg::Oracle {
                    return Err(CliError::Usage(String::from(
                        "rank 5 has only the oracle method",
                    )));
                }
                let cell: Sl5FineCellLabel = cell.parse().map_err(usage)?;
                let (m, n) = (quadruple(m)?, quadruple(n)?);
                let convention = if cli.strict_paper_psi {
                    PsiConvention::StrictPaper
                } else {
                    PsiConvention::Corrected
                };
                let psi = match convention {
                    PsiConvention::Corrected => "corrected",
                    PsiConvention::StrictPaper => "strict_paper",
                };
                let query = json!({
                    "kind": "sl5-fine", "cell": cell.as_vec(), "m": m, "n": n, "method": "oracle", "psi": psi,
                });
                cached(cache.as_ref(), query, err, || {
                    let r = sl5_fine_sum_oracle(&cell, &m, &n, convention, &Budget::new(budget))?;
                    let mut doc = result_value(&r);
                    doc["moduli"] = json!(r.moduli);
                    Ok(doc)
                })
            }
        },
        Command::Groups { command } => match command {
            GroupsCommand::Check { kind, matrix } => groups_command(*kind, matrix).map(Outcome::ok),
        },
        Command::Verify(a) => verify_command(a, budget),
    }
}

fn usage(e: kloosterman_core::Error) -> CliError {
    CliError::Usage(e.to_string())
}

fn method_name(m: MethodArg) -> &'static str {
    match m {
        MethodArg::Oracle => "oracle",
        MethodArg::Closed => "closed_form",
        MethodArg::Both => "both",
    }
}

fn list(s: &str, len: usize) -> CliResult<Vec<i64>> {
    let v: Vec<i64> = kloosterman_core::sl4::parse_list(s).map_err(usage)?;
    if v.len() != len {
        return Err(CliError::Usage(format!(
            "expected {} comma-separated integers, got {:?}",
            len, s
        )));
    }
    Ok(v)
}

fn triple(s: &str) -> CliResult<[i64; 3]> {
    let v = list(s, 3)?;
    Ok([v[0], v[1], v[2]])
}

fn quadruple(s: &str) -> CliResult<[i64; 4]> {
    let v = list(s, 4)?;
    Ok([v[0], v[1], v[2], v[3]])
}

fn positive_triple(s: &str) -> CliResult<[u64; 3]> {
    let v = triple(s)?;
    if v.iter().any(|&x| x <= 0) {
        return Err(CliError::Usage(format!(
            "moduli must be positive, got {:?}",
            s
        )));
    }
    Ok(v.map(|x| x as u64))
}

/// Serves `query` from the cache when possible; otherwise computes and
/// appends. The stored document carries no timing.
fn cached(
    cache: Option<&Cache>,
    query: Value,
    err: &mut dyn Write,
    compute: impl FnOnce() -> CliResult<Value>,
) -> CliResult<Outcome> {
    let key = serde_json::to_string(&query).expect("values serialize");
    let io_err = |c: &Cache, source| CliError::Io {
        path: c.path().to_path_buf(),
        source,
    };
    if let Some(c) = cache {
        if let Some(mut doc) = c.lookup(&key, err).map_err(|e| io_err(c, e))? {
            if doc
                .get("exact_phases")
                .is_none_or(|p| phases_from_value(p).is_some())
            {
                doc["cache"] = json!("hit");
                return Ok(Outcome::ok(doc));
            }
            let _ = writeln!(
                err,
                "warning: cached record for {} has malformed phases; recomputing",
                key
            );
        }
    }
    let mut doc = compute()?;
    doc["query"] = query;
    doc["version"] = json!(VERSION_TAG);
    if let Some(c) = cache {
        c.store(&key, &doc).map_err(|e| io_err(c, e))?;
        doc["cache"] = json!("miss");
    }
    Ok(Outcome::ok(doc))
}

fn discrepancy_value(cmp: &kloosterman_core::sl4::Comparison) -> Value {
    match cmp.discrepancy() {
        None => Value::Null,
        Some(d) => json!({
            "cell": d.cell.as_vec(),
            "m": d.m,
            "n": d.n,
            "oracle": [round_value(d.oracle.re), round_value(d.oracle.im)],
            "closed_form": [round_value(d.closed.re), round_value(d.closed.im)],
            "oracle_representatives": d.oracle_representatives,
        }),
    }
}

fn sl4_fine(
    cell: FineCellLabel,
    m: [i64; 3],
    n: [i64; 3],
    method: MethodArg,
    budget: u64,
) -> CliResult<Value> {
    let closed = || kloosterman_core::sl4::fine_sum_closed_form(&cell, &m, &n);
    let conditions = closed_form_conditions(&cell, &m, &n);
    let mut doc = match method {
        MethodArg::Closed => result_value(&closed()?),
        MethodArg::Oracle => result_value(&cell_oracle(cell, &Budget::new(budget))?.sum(&m, &n)?),
        MethodArg::Both => {
            let oracle = cell_oracle(cell, &Budget::new(budget))?;
            let cmp = compare(&oracle, &m, &n)?;
            json!({
                "method": "both",
                "results": {"oracle": result_value(&cmp.oracle), "closed_form": result_value(&cmp.closed)},
                "agree": cmp.agree,
                "discrepancy": discrepancy_value(&cmp),
            })
        }
    };
    doc["moduli"] = json!(cell.moduli());
    doc["closed_form_hypotheses"] = json!(conditions);
    Ok(doc)
}

fn sl4_coarse(
    c: [u64; 3],
    m: [i64; 3],
    n: [i64; 3],
    method: MethodArg,
    budget: u64,
) -> CliResult<Value> {
    let oracle = || -> CliResult<KloostermanResult> {
        let all = enumerate_parallel(&c, &NoFilter, &Budget::new(budget))?;
        let mut r =
            KloostermanResult::new(all.phase_sum(&m, &n)?, Method::Oracle, c.to_vec(), &m, &n);
        r.representatives = Some(all.len());
        Ok(r)
    };
    let closed = || coarse_sum(&c, &m, &n, Method::ClosedForm, &Budget::new(budget));
    Ok(match method {
        MethodArg::Oracle => result_value(&oracle()?),
        MethodArg::Closed => result_value(&closed()?),
        MethodArg::Both => {
            let (o, k) = (oracle()?, closed()?);
            let agree = values_agree(
                o.value,
                k.value,
                o.exact.total_mass() + k.exact.total_mass(),
            );
            json!({
                "method": "both",
                "results": {"oracle": result_value(&o), "closed_form": result_value(&k)},
                "agree": agree,
            })
        }
    })
}

fn read_matrix(path: &Path) -> CliResult<IntMatrix> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let bad = |detail: String| CliError::Input {
        path: path.to_path_buf(),
        detail,
    };
    let v: Value = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    let n = v["n"]
        .as_u64()
        .ok_or_else(|| bad(String::from("missing integer field \"n\"")))? as usize;
    let rows = v["entries"]
        .as_array()
        .ok_or_else(|| bad(String::from("missing array field \"entries\"")))?;
    let parse = |x: &Value| -> Option<BigInt> {
        match x {
            Value::Number(k) => k.as_i64().map(BigInt::from),
            Value::String(s) => s.parse().ok(),
            _ => None,
        }
    };
    let rows = rows
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| bad(String::from("each row must be an array")))?
                .iter()
                .map(|x| parse(x).ok_or_else(|| bad(format!("{} is not an integer", x))))
                .collect::<CliResult<Vec<_>>>()
        })
        .collect::<CliResult<Vec<_>>>()?;
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(bad(format!("entries are not {}x{}", n, n)));
    }
    Ok(Matrix::from_rows(rows)?)
}

fn decompose_command(path: &Path, rank: Option<u64>, canonical: bool) -> CliResult<Value> {
    let a = read_matrix(path)?;
    if let Some(r) = rank.filter(|&r| r as usize != a.size()) {
        return Err(CliError::Usage(format!(
            "--rank {} but the matrix is {}x{}",
            r,
            a.size(),
            a.size()
        )));
    }
    let dec = decompose(&a)?;
    let t: Vec<String> = dec.t.iter().map(|q| q.to_string()).collect();
    let minors: Vec<String> = corner_minors(&a).iter().map(|v| v.to_string()).collect();
    let mut doc = json!({
        "query": {"kind": "decompose", "matrix": int_matrix_value(&a)},
        "corner_minors": minors,
        "t": t,
        "u_L": rat_matrix_value(&dec.u_left),
        "u_R": rat_matrix_value(&dec.u_right),
        "reconstructed": dec.reconstruct() == a.to_rational(),
    });
    if canonical {
        doc["canonical"] = int_matrix_value(&canonical_matrix(&a)?);
    }
    Ok(doc)
}

fn groups_command(kind: GroupKind, path: &Path) -> CliResult<Value> {
    let a = read_matrix(path)?;
    Ok(match kind {
        GroupKind::Sp4 => {
            let residuals = sp4_minor_relations(&a)?;
            let map: serde_json::Map<String, Value> = residuals
                .iter()
                .map(|(k, v)| (k.to_string(), json!(v.to_string())))
                .collect();
            json!({
                "query": {"kind": "groups-sp4", "matrix": int_matrix_value(&a)},
                "symplectic": is_symplectic(&a)?,
                "minor_residuals": map,
                "relations_vanish": residuals.iter().all(|(_, v)| v == &BigInt::from(0)),
            })
        }
        GroupKind::So4 => {
            let r = so4_relations(&a)?;
            let products: serde_json::Map<String, Value> = r
                .column_products
                .iter()
                .map(|((j, k), v)| (format!("{}{}", j, k), json!(v.to_string())))
                .collect();
            json!({
                "query": {"kind": "groups-so4", "matrix": int_matrix_value(&a)},
                "column_norm_residuals": r.column_norms.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                "column_products": products,
                "det_residual": r.det.to_string(),
                "member": r.all_zero(),
            })
        }
    })
}

fn need_seed(a: &VerifyArgs) -> CliResult<u64> {
    a.seed.ok_or_else(|| {
        CliError::Usage(String::from("this suite is randomized and requires --seed"))
    })
}

fn run_suite(suite: Suite, a: &VerifyArgs, budget: u64) -> CliResult<Vec<SuiteReport>> {
    Ok(match suite {
        Suite::Classical => vec![verify::classical_values()?],
        Suite::Weil => vec![verify::weil(
            a.max_c.unwrap_or(500),
            a.max_mn.unwrap_or(20),
        )?],
        Suite::Longword => vec![verify::long_word()?],
        Suite::Bruhat => {
            let count = a.count.unwrap_or(1000);
            vec![verify::bruhat(need_seed(a)?, count, count.div_ceil(5))?]
        }
        Suite::Lemmas => vec![verify::lemmas(need_seed(a)?, a.count.unwrap_or(500))?],
        Suite::Congruences => vec![verify::congruences(need_seed(a)?, a.count.unwrap_or(64))?],
        Suite::Trivial => vec![verify::trivial_cell(
            need_seed(a)?,
            a.count.unwrap_or(20),
            budget,
        )?],
        Suite::ClosedForm => vec![verify::closed_form(budget)?],
        Suite::Partition => vec![verify::partition(a.max_c.unwrap_or(4), budget)?],
        Suite::Bound => vec![verify::bound(
            a.max_c.unwrap_or(4),
            a.max_mn.unwrap_or(2),
            budget,
        )?],
        Suite::Groups => vec![verify::groups(need_seed(a)?, a.count.unwrap_or(200))?],
        Suite::All => {
            need_seed(a)?;
            let mut out = Vec::new();
            for s in [
                Suite::Classical,
                Suite::Weil,
                Suite::Longword,
                Suite::Bruhat,
                Suite::Lemmas,
                Suite::Congruences,
                Suite::Trivial,
                Suite::ClosedForm,
                Suite::Partition,
                Suite::Bound,
                Suite::Groups,
            ] {
                let defaults = VerifyArgs {
                    suite: s,
                    seed: a.seed,
                    max_c: None,
                    max_mn: None,
                    count: None,
                    discrepancies: None,
                };
                out.extend(run_suite(s, &defaults, budget)?);
            }
            out
        }
    })
}

fn verify_command(a: &VerifyArgs, budget: u64) -> CliResult<Outcome> {
    let reports = run_suite(a.suite, a, budget)?;
    if let Some(path) = &a.discrepancies {
        let mut text = String::new();
        for r in &reports {
            for d in &r.discrepancies {
                text.push_str(&serde_json::to_string(d).expect("values serialize"));
                text.push('\n');
            }
        }
        fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
    }
    let inline = a.discrepancies.is_none();
    let ok = reports.iter().all(|r| r.passed);
    let mut doc = if reports.len() == 1 {
        reports[0].to_value(inline)
    } else {
        json!({
            "suite": "all",
            "passed": ok,
            "suites": reports.iter().map(|r| r.to_value(inline)).collect::<Vec<_>>(),
        })
    };
    doc["seed"] = json!(a.seed);
    doc["version"] = json!(VERSION_TAG);
    Ok(Outcome { doc, ok })
}
