//! Run manifests, output rendering, and exit codes.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;
use serde_json::{Map, Value};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NEGATIVE: u8 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Text,
}

/// Everything that determines a run's output.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub params: Value,
    pub seed: u64,
    /// Only present with `--timing`; breaks byte-identical reruns.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration_seconds: Option<f64>,
}

impl RunManifest {
    pub fn new(subcommand: impl Into<String>, params: Value, seed: u64) -> Self {
        RunManifest {
            tool: "mublab",
            version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.into(),
            params,
            seed,
            duration_seconds: None,
        }
    }
}

/// The result of a subcommand before rendering.
pub struct Outcome {
    pub manifest: RunManifest,
    pub body: Value,
    pub code: u8,
}

pub struct Sink {
    pub format: Format,
    pub out: Option<PathBuf>,
    pub timing: bool,
    pub started: Instant,
}

impl Sink {
    pub fn emit(&self, mut outcome: Outcome) -> Result<u8, String> {
        if self.timing {
            outcome.manifest.duration_seconds = Some(self.started.elapsed().as_secs_f64());
        }
        let mut doc = match outcome.body {
            Value::Object(m) => m,
            other => {
                let mut m = Map::new();
                m.insert("result".into(), other);
                m
            }
        };
        doc.insert("manifest".into(), serde_json::to_value(&outcome.manifest).map_err(|e| e.to_string())?);
        let doc = Value::Object(doc);
        let mut text = match self.format {
            Format::Json => serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?,
            Format::Text => render_text(&doc),
        };
        if !text.ends_with('\n') {
            text.push('\n');
        }
        match &self.out {
            Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))?,
            None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string())?,
        }
        Ok(outcome.code)
    }
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("null".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => u.to_string(),
            (_, Some(i)) => i.to_string(),
            _ => fmt_f64(n.as_f64().unwrap_or(f64::NAN)),
        }),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

/// Scalars, and arrays nesting scalars at most two deep (a row of complex
/// entries), print inline; everything else nests by indentation.
fn inline(v: &Value) -> Option<String> {
    if let Some(s) = scalar(v) {
        return Some(s);
    }
    let Value::Array(items) = v else { return None };
    let flat = |x: &Value| -> Option<String> {
        let Value::Array(inner) = x else { return None };
        let parts: Option<Vec<String>> = inner.iter().map(scalar).collect();
        parts.map(|p| format!("[{}]", p.join(", ")))
    };
    let parts: Option<Vec<String>> = items.iter().map(|x| scalar(x).or_else(|| flat(x))).collect();
    parts.map(|p| format!("[{}]", p.join(", ")))
}

pub fn render_text(v: &Value) -> String {
    let mut out = String::new();
    walk(v, 0, &mut out);
    out
}

fn walk(v: &Value, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                match inline(x) {
                    Some(s) => {
                        let _ = writeln!(out, "{pad}{k}: {s}");
                    }
                    None => {
                        let _ = writeln!(out, "{pad}{k}:");
                        walk(x, depth + 1, out);
                    }
                }
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                match inline(x) {
                    Some(s) => {
                        let _ = writeln!(out, "{pad}- {s}");
                    }
                    None => {
                        let _ = writeln!(out, "{pad}- [{i}]");
                        walk(x, depth + 1, out);
                    }
                }
            }
        }
        other => {
            let _ = writeln!(out, "{pad}{}", scalar(other).unwrap_or_default());
        }
    }
}

/// FNV-1a, used to tie a manifest to the exact input bytes.
pub fn fnv1a(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}
