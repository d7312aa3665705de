use std::f64::consts::PI;
use std::io::Read;

use clap::ValueEnum;
use mublab::bloch::{bloch_vector, complement_dimension, simplex_check};
use mublab::constructions::{
    dim4_triple, fourier_complete_set, pauli_triple, qr_basis_1mod4, qr_basis_3mod4, qr_triple, s6_pair,
    wh_candidate_set,
};
use mublab::cv::{complete_cv_triple, cv_fourth_basis_residual, symmetric_triple, CvGrid};
use mublab::extender::{
    classify_extendibility, entropy_witness_bound, search_unbiased_vector, ExtendibilityLevel, SearchConfig, Verdict,
};
use mublab::io::{set_from_str, set_to_value};
use mublab::linalg::{fourier_basis, validate_mub_set, Basis, MubSet};
use mublab::MubError;
use serde_json::{json, Value};

use crate::output::{fnv1a, Outcome, RunManifest, EXIT_NEGATIVE, EXIT_OK};
use crate::{BranchArg, ConstructArgs, CvCommand, FileArgs, Global, Kind, SearchArgs};

type CmdResult = Result<Outcome, String>;

fn err(e: MubError) -> String {
    e.to_string()
}

fn need<T>(v: Option<T>, flag: &str, kind: &str) -> Result<T, String> {
    v.ok_or_else(|| format!("construct {kind} requires --{flag}"))
}

/// The set plus its labels and note, readable back by `verify`.
fn set_body(s: &MubSet) -> Value {
    let mut v = set_to_value(s);
    let m = v.as_object_mut().expect("set serializes to an object");
    m.insert("labels".into(), json!(s.bases().iter().map(Basis::label).collect::<Vec<_>>()));
    if let Some(n) = s.note() {
        m.insert("note".into(), json!(n));
    }
    v
}

pub fn construct(g: &Global, a: &ConstructArgs) -> CmdResult {
    let kind = a.kind.to_possible_value().expect("no skipped variants").get_name().to_string();
    let set = match a.kind {
        Kind::Fourier => {
            let d = need(a.d, "d", &kind)?;
            let f = fourier_basis(d).map_err(err)?;
            if a.pair {
                MubSet::new(vec![Basis::identity(d), f])
            } else {
                MubSet::new(vec![f])
            }
        }
        Kind::Qr3mod4 | Kind::Qr1mod4 => {
            let p = need(a.p, "p", &kind)?;
            if a.triple {
                // qr_triple dispatches on the class; keep the requested one strict
                let check = if a.kind == Kind::Qr3mod4 { qr_basis_3mod4(p) } else { qr_basis_1mod4(p) };
                check.and_then(|_| qr_triple(p))
            } else if a.kind == Kind::Qr3mod4 {
                qr_basis_3mod4(p).and_then(|b| MubSet::new(vec![b]))
            } else {
                qr_basis_1mod4(p).and_then(|b| MubSet::new(vec![b]))
            }
        }
        Kind::WhSet => wh_candidate_set(need(a.d, "d", &kind)?),
        Kind::Dim4Triple => dim4_triple(need(a.a, "a", &kind)?, need(a.b, "b", &kind)?),
        Kind::S6Pair => Ok(s6_pair()),
        Kind::CompleteSet => fourier_complete_set(need(a.d, "d", &kind)?),
    }
    .map_err(err)?;
    let params = json!({
        "kind": kind, "d": a.d, "p": a.p, "a": a.a, "b": a.b, "pair": a.pair, "triple": a.triple,
    });
    Ok(Outcome { manifest: RunManifest::new("construct", params, g.seed), body: set_body(&set), code: EXIT_OK })
}

fn read_set(path: &std::path::Path) -> Result<(MubSet, Value), String> {
    let mut text = String::new();
    if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut text).map_err(|e| e.to_string())?;
    } else {
        text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    let set = set_from_str(&text).map_err(err)?;
    let input = json!({"path": path.display().to_string(), "fnv1a": fnv1a(text.as_bytes())});
    Ok((set, input))
}

pub fn verify(g: &Global, a: &FileArgs) -> CmdResult {
    let (set, input) = read_set(&a.file)?;
    let report = validate_mub_set(&set, g.tol).map_err(err)?;
    let code = if report.ok { EXIT_OK } else { EXIT_NEGATIVE };
    Ok(Outcome {
        manifest: RunManifest::new("verify", json!({"input": input, "tol": g.tol}), g.seed),
        body: json!({"dimension": set.dim(), "bases": set.len(), "report": report}),
        code,
    })
}

fn config(g: &Global, a: &SearchArgs) -> SearchConfig {
    SearchConfig {
        restarts: g.restarts,
        max_iterations: a.max_iterations,
        grad_tol: a.grad_tol,
        hit_threshold: a.hit_threshold,
        dedup_threshold: a.dedup_threshold,
        orthogonality_tol: a.orthogonality_tol,
        seed: g.seed,
        threads: g.threads,
    }
}

fn search_manifest(name: &str, g: &Global, cfg: &SearchConfig, input: Value) -> RunManifest {
    RunManifest::new(name, json!({"input": input, "config": cfg}), g.seed)
}

pub fn search(g: &Global, a: &SearchArgs) -> CmdResult {
    let (set, input) = read_set(&a.file)?;
    let cfg = config(g, a);
    let report = search_unbiased_vector(&set, &cfg).map_err(err)?;
    let code = if report.verdict == Verdict::Found { EXIT_OK } else { EXIT_NEGATIVE };
    Ok(Outcome {
        manifest: search_manifest("search", g, &cfg, input),
        body: serde_json::to_value(&report).map_err(|e| e.to_string())?,
        code,
    })
}

pub fn classify(g: &Global, a: &SearchArgs) -> CmdResult {
    let (set, input) = read_set(&a.file)?;
    let cfg = config(g, a);
    let verdict = classify_extendibility(&set, &cfg).map_err(err)?;
    let mut body = serde_json::to_value(&verdict).map_err(|e| e.to_string())?;
    if verdict.level == ExtendibilityLevel::ExtendsByBasis {
        let extended = verdict.extended_set(&set).map_err(err)?;
        body["extended_set"] = set_body(&extended);
        body["extended_report"] = json!(validate_mub_set(&extended, cfg.orthogonality_tol).map_err(err)?);
    }
    let code = if verdict.level == ExtendibilityLevel::NoVectorFound { EXIT_NEGATIVE } else { EXIT_OK };
    Ok(Outcome { manifest: search_manifest("classify", g, &cfg, input), body, code })
}

pub fn entropy(g: &Global, a: &SearchArgs) -> CmdResult {
    let (set, input) = read_set(&a.file)?;
    let cfg = config(g, a);
    let w = entropy_witness_bound(&set, &cfg).map_err(err)?;
    Ok(Outcome {
        manifest: search_manifest("entropy", g, &cfg, input),
        body: json!({"witness": w, "gap": w.ceiling - w.bits}),
        code: EXIT_OK,
    })
}

pub fn bloch(g: &Global, a: &FileArgs) -> CmdResult {
    let (set, input) = read_set(&a.file)?;
    let d = set.dim();
    let mut bases = Vec::new();
    let mut vectors = Vec::new();
    for b in set.bases() {
        let vs = b.rows().iter().map(bloch_vector).collect::<mublab::Result<Vec<_>>>().map_err(err)?;
        bases.push(json!({
            "label": b.label(),
            "simplex": simplex_check(b),
            "vectors": vs.iter().map(|v| v.coords.clone()).collect::<Vec<_>>(),
        }));
        vectors.push(vs);
    }
    let mut cross = 0.0f64;
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            for u in &vectors[i] {
                for v in &vectors[j] {
                    cross = cross.max(u.dot(v).map_err(err)?.abs());
                }
            }
        }
    }
    let complement: Vec<Value> =
        (1..=d + 1).map(|m| json!({"bases": m, "complement_dimension": complement_dimension(d, m).ok()})).collect();
    Ok(Outcome {
        manifest: RunManifest::new("bloch", json!({"input": input}), g.seed),
        body: json!({
            "dimension": d,
            "bases": bases,
            "max_cross_basis_dot": cross,
            "complement": complement,
        }),
        code: EXIT_OK,
    })
}

pub fn cv(g: &Global, c: &CvCommand) -> CmdResult {
    match *c {
        CvCommand::Complete { r, theta } => {
            let (plus, minus) = complete_cv_triple(r, theta).map_err(err)?;
            let ok = [plus, minus].iter().all(|t| mublab::cv::verify_cv_triple(t, g.tol));
            Ok(Outcome {
                manifest: RunManifest::new("cv complete", json!({"r": r, "theta": theta, "tol": g.tol}), g.seed),
                body: json!({
                    "plus": plus, "minus": minus,
                    "defects": [plus.defect(), minus.defect()],
                    "verified": ok,
                }),
                code: if ok { EXIT_OK } else { EXIT_NEGATIVE },
            })
        }
        CvCommand::Residual { r, theta, branch, grid } => {
            let triple = match (r, theta) {
                (Some(r), Some(theta)) => {
                    let (plus, minus) = complete_cv_triple(r, theta).map_err(err)?;
                    if branch == BranchArg::Plus {
                        plus
                    } else {
                        minus
                    }
                }
                _ => symmetric_triple(),
            };
            let spec = CvGrid { t_steps: grid, nu_steps: grid, ..CvGrid::default() };
            let res = cv_fourth_basis_residual(&triple, &spec).map_err(err)?;
            let params = json!({"r": r, "theta": theta, "branch": format!("{branch:?}").to_lowercase(), "grid": spec});
            Ok(Outcome {
                manifest: RunManifest::new("cv residual", params, g.seed),
                body: json!({"triple": triple, "residual": res, "fourth_basis_excluded": res.violation > 0.0}),
                code: EXIT_OK,
            })
        }
    }
}

struct Row {
    d: usize,
    set: &'static str,
    expected: &'static str,
    build: fn() -> mublab::Result<MubSet>,
}

const ROWS: [Row; 7] = [
    Row { d: 2, set: "pauli triple", expected: "3", build: pauli_triple },
    Row { d: 3, set: "complete set", expected: "4", build: || fourier_complete_set(3) },
    Row { d: 4, set: "dim4 triple a=pi/3 b=pi/5", expected: "3", build: || dim4_triple(PI / 3.0, PI / 5.0) },
    Row { d: 5, set: "complete set", expected: "6", build: || fourier_complete_set(5) },
    Row { d: 6, set: "{I, S6}", expected: "2", build: || Ok(s6_pair()) },
    Row { d: 7, set: "{I, F7, QR7}", expected: "<= 3", build: || qr_triple(7) },
    Row { d: 16, set: "Weyl-Heisenberg candidates", expected: "<= 3", build: || wh_candidate_set(16) },
];

pub fn table1(g: &Global) -> CmdResult {
    let cfg = SearchConfig::default().with_restarts(g.restarts).with_seed(g.seed).with_threads(g.threads);
    let mut rows = Vec::new();
    for row in &ROWS {
        let set = (row.build)().map_err(err)?;
        let report = validate_mub_set(&set, g.tol).map_err(err)?;
        let v = classify_extendibility(&set, &cfg).map_err(err)?;
        rows.push(json!({
            "d": row.d,
            "set": row.set,
            "set_size": set.len(),
            "valid": report.ok,
            "expected_minimal_size": row.expected,
            "level": v.level,
            "total_bases": v.total_bases,
            "best_residual": v.search.best_residual,
            "found_vectors": v.search.found_vectors.len(),
        }));
    }
    Ok(Outcome {
        manifest: RunManifest::new("table1", json!({"tol": g.tol, "config": cfg}), g.seed),
        body: json!({"rows": rows}),
        code: EXIT_OK,
    })
}
