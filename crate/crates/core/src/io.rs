//! JSON interchange for basis sets, and a plain-text matrix reader.
//!
//! JSON layout, row-major, each entry a `[re, im]` pair:
//!
//! ```json
//! {"dimension": 2, "bases": [[[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]]}
//! ```
//!
//! Unknown top-level keys are ignored on input. The text format holds one
//! matrix row per line with tab-separated entries such as `0.5`, `-1j` or
//! `0.25-0.5j`; blank lines separate bases.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{MubError, Result};
use crate::linalg::{Basis, CVec, MubSet, C64};

impl Serialize for CVec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.entries().iter().map(|z| [z.re, z.im]))
    }
}

impl<'de> Deserialize<'de> for CVec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<[f64; 2]>::deserialize(d)?;
        CVec::new(raw.into_iter().map(|[re, im]| C64::new(re, im)).collect()).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct SetRepr {
    dimension: usize,
    bases: Vec<Vec<CVec>>,
}

pub fn set_to_value(s: &MubSet) -> serde_json::Value {
    serde_json::to_value(SetRepr { dimension: s.dim(), bases: s.bases().iter().map(|b| b.rows().to_vec()).collect() })
        .expect("finite numbers serialize")
}

pub fn set_to_json(s: &MubSet) -> String {
    set_to_value(s).to_string()
}

pub fn set_from_value(v: serde_json::Value) -> Result<MubSet> {
    let repr: SetRepr = serde_json::from_value(v).map_err(|e| MubError::Parse(e.to_string()))?;
    let bases = repr
        .bases
        .into_iter()
        .enumerate()
        .map(|(i, rows)| {
            let b = Basis::from_rows(rows, format!("B{}", i + 1))?;
            if b.dim() != repr.dimension {
                return Err(MubError::DimensionMismatch { expected: repr.dimension, found: b.dim() });
            }
            Ok(b)
        })
        .collect::<Result<Vec<_>>>()?;
    MubSet::new(bases)
}

pub fn set_from_json(text: &str) -> Result<MubSet> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| MubError::Parse(e.to_string()))?;
    set_from_value(v)
}

/// Parses `re`, `imj`, `re+imj` or `re-imj` (`i` accepted for `j`).
pub fn parse_complex(token: &str) -> Result<C64> {
    let t: String = token.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || MubError::Parse(format!("invalid complex number '{token}'"));
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix(['j', 'i']) else {
        return t.parse::<f64>().map(|re| C64::new(re, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not the leading one and not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let parse_im = |s: &str| match s {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => s.parse::<f64>().map_err(|_| bad()),
    };
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().map_err(|_| bad())?;
            Ok(C64::new(re, parse_im(&body[k..])?))
        }
        None => Ok(C64::new(0.0, parse_im(body)?)),
    }
}

pub fn set_from_text(text: &str) -> Result<MubSet> {
    let mut bases = Vec::new();
    let mut rows: Vec<Vec<C64>> = Vec::new();
    let flush = |rows: &mut Vec<Vec<C64>>, bases: &mut Vec<Basis>| -> Result<()> {
        if !rows.is_empty() {
            let label = format!("B{}", bases.len() + 1);
            bases.push(Basis::from_entries(std::mem::take(rows), label)?);
        }
        Ok(())
    };
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            flush(&mut rows, &mut bases)?;
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        rows.push(line.split('\t').map(parse_complex).collect::<Result<Vec<_>>>()?);
    }
    flush(&mut rows, &mut bases)?;
    MubSet::new(bases)
}

/// JSON when the text starts with `{`, the tab-separated format otherwise.
pub fn set_from_str(text: &str) -> Result<MubSet> {
    if text.trim_start().starts_with('{') {
        set_from_json(text)
    } else {
        set_from_text(text)
    }
}

/// Tab-separated rendering with 17 significant digits.
pub fn set_to_text(s: &MubSet) -> String {
    let fmt = |z: &C64| {
        let sign = if z.im.is_sign_negative() { '-' } else { '+' };
        format!("{:.16e}{}{:.16e}j", z.re, sign, z.im.abs())
    };
    s.bases()
        .iter()
        .map(|b| {
            b.rows()
                .iter()
                .map(|r| r.entries().iter().map(fmt).collect::<Vec<_>>().join("\t"))
                .collect::<Vec<_>>()
                .join("\n")
        })
        .collect::<Vec<_>>()
        .join("\n\n")
        + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{fourier_basis, validate_mub_set};
    use proptest::prelude::*;

    #[test]
    fn complex_tokens() {
        let cases = [
            ("1", C64::new(1.0, 0.0)),
            ("-0.5", C64::new(-0.5, 0.0)),
            ("1j", C64::new(0.0, 1.0)),
            ("-j", C64::new(0.0, -1.0)),
            ("0.5+0.25j", C64::new(0.5, 0.25)),
            ("0.5-0.25j", C64::new(0.5, -0.25)),
            ("-1e-3+2E-4j", C64::new(-1e-3, 2e-4)),
            ("1e+2-1e+1i", C64::new(100.0, -10.0)),
            ("+3-j", C64::new(3.0, -1.0)),
        ];
        for (t, want) in cases {
            assert_eq!(parse_complex(t).unwrap(), want, "{t}");
        }
        for t in ["", "abc", "1+", "j1", "1..0j"] {
            assert!(parse_complex(t).is_err(), "{t}");
        }
    }

    #[test]
    fn text_input() {
        let text = "1\t0\n0\t1\n\n0.7071067811865476\t0.7071067811865476\n0.7071067811865476\t-0.7071067811865476\n";
        let s = set_from_str(text).unwrap();
        assert_eq!(s.len(), 2);
        assert!(validate_mub_set(&s, 1e-10).unwrap().ok);
        assert!(set_from_text("1\t0\n0\n").is_err());
    }

    #[test]
    fn json_layout() {
        let s = MubSet::new(vec![Basis::identity(2)]).unwrap();
        assert_eq!(set_to_json(&s), r#"{"bases":[[[[1.0,0.0],[0.0,0.0]],[[0.0,0.0],[1.0,0.0]]]],"dimension":2}"#);
    }

    #[test]
    fn json_errors() {
        assert!(matches!(set_from_json("{\"dimension\": 2"), Err(MubError::Parse(_))));
        assert!(matches!(set_from_json("{\"dimension\": 2, \"bases\": []}"), Err(MubError::Domain(_))));
        let wrong = r#"{"dimension": 3, "bases": [[[[1,0],[0,0]],[[0,0],[1,0]]]]}"#;
        assert!(matches!(set_from_json(wrong), Err(MubError::DimensionMismatch { .. })));
    }

    #[test]
    fn text_output_round_trips() {
        let s = MubSet::new(vec![Basis::identity(3), fourier_basis(3).unwrap()]).unwrap();
        let back = set_from_text(&set_to_text(&s)).unwrap();
        assert_eq!(back.bases()[1].to_matrix(), s.bases()[1].to_matrix());
    }

    proptest! {
        #[test]
        fn json_round_trip_is_exact(entries in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 9)) {
            let rows = entries.chunks(3).map(|c| c.iter().map(|&(a, b)| C64::new(a, b)).collect()).collect();
            let s = MubSet::new(vec![Basis::from_entries(rows, "x").unwrap()]).unwrap();
            let back = set_from_json(&set_to_json(&s)).unwrap();
            prop_assert_eq!(back.bases()[0].to_matrix(), s.bases()[0].to_matrix());
        }
    }
}
