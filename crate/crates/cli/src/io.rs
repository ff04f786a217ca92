use std::path::Path;

use anyhow::{anyhow, Context, Result};
use serde::de::DeserializeOwned;
use serde_json::{Map, Value};
use smollision_core::linalg::HermitianOperator;
use smollision_core::protocols::{BoundReport, CSV_HEADER};
use smollision_core::states::{embed_cq, CQState};

use crate::args::Unit;

/// A state file: an operator, or a classical-quantum state when the top
/// level has a `p` key.
pub enum StateFile {
    Operator(HermitianOperator),
    Cq(CQState),
}

impl StateFile {
    pub fn into_operator(self) -> HermitianOperator {
        match self {
            StateFile::Operator(h) => h,
            StateFile::Cq(s) => embed_cq(&s).into_op(),
        }
    }
}

/// `(line, column)` of the first occurrence of `"key"`, both 1-based.
fn locate(text: &str, key: &str) -> (usize, usize) {
    let Some(at) = text.find(&format!("\"{key}\"")) else { return (1, 1) };
    let before = &text[..at];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(at, |nl| at - nl - 1) + 1;
    (line, col)
}

/// Errors raised while validating a parsed value carry no position;
/// those are pinned to the key the value came from.
fn parse_error(path: &Path, text: &str, e: serde_json::Error, key: &str) -> anyhow::Error {
    let full = e.to_string();
    let msg = full.rsplit_once(" at line ").map_or(full.as_str(), |(m, _)| m);
    let (line, col) = if e.line() == 0 { locate(text, key) } else { (e.line(), e.column()) };
    anyhow!("{}:{line}:{col}: {msg}", path.display())
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|e| parse_error(path, &text, e, ""))
}

pub fn load_state(path: &Path) -> Result<StateFile> {
    let text = read(path)?;
    let probe: Value = serde_json::from_str(&text).map_err(|e| parse_error(path, &text, e, ""))?;
    // typed re-parse, so shape errors keep their position
    if let Some(p) = probe.get("p") {
        let p_ok = p.as_array().is_some_and(|v| {
            let w: Vec<f64> = v.iter().filter_map(Value::as_f64).collect();
            w.len() == v.len() && w.iter().all(|&x| x >= 0.0) && (w.iter().sum::<f64>() - 1.0).abs() <= 1e-9
        });
        let key = if p_ok { "blocks" } else { "p" };
        Ok(StateFile::Cq(serde_json::from_str(&text).map_err(|e| parse_error(path, &text, e, key))?))
    } else {
        let h: HermitianOperator = serde_json::from_str(&text).map_err(|e| parse_error(path, &text, e, "re"))?;
        h.check_psd().map_err(|e| {
            let (line, col) = locate(&text, "re");
            anyhow!("{}:{line}:{col}: {e}", path.display())
        })?;
        Ok(StateFile::Operator(h))
    }
}

pub fn load_cq(path: &Path) -> Result<CQState> {
    match load_state(path)? {
        StateFile::Cq(s) => Ok(s),
        StateFile::Operator(_) => Err(anyhow!("{}: expected a classical-quantum state {{p, blocks}}", path.display())),
    }
}

/// Rounds to 12 significant digits.
pub fn sig(x: f64) -> f64 {
    if x.is_finite() && x != 0.0 {
        format!("{x:.11e}").parse().expect("formatted float parses")
    } else {
        x
    }
}

pub fn fmt(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.11e}")
    }
}

/// JSON number rounded to 12 significant digits; non-finite values as strings.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::from(sig(x))
    } else {
        Value::from(fmt(x))
    }
}

/// Rounds every float inside a JSON tree.
pub fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => num(n.as_f64().expect("f64 number")),
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_floats(v))).collect::<Map<_, _>>()),
        other => other,
    }
}

pub fn to_json_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

/// One row per report under the versioned header. Information quantities
/// are converted to `unit`; other values are printed as computed.
pub fn reports_csv(reports: &[BoundReport], unit: Unit) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "name", "passed", "lhs", "rhs", "slack", "tolerance", "unit", "eps", "mu", "delta", "alpha", "k", "z", "dims",
        "seed", "instance", "provenance", "note",
    ])?;
    for r in reports {
        let (conv, u): (&dyn Fn(f64) -> f64, &str) =
            if r.is_information() { (&|v| unit.from_nats(v), unit.name()) } else { (&|v| v, "") };
        let p = &r.parameters;
        let dims = p.dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("x");
        w.write_record([
            r.name.clone(),
            r.passed().to_string(),
            fmt(conv(r.lhs)),
            fmt(conv(r.rhs)),
            fmt(conv(r.slack)),
            fmt(conv(r.tolerance)),
            u.to_string(),
            opt(p.eps),
            opt(p.mu),
            opt(p.delta),
            opt(p.alpha),
            opt(p.k),
            p.z.map(|z| z.to_string()).unwrap_or_default(),
            dims,
            p.seed.map(|s| s.to_string()).unwrap_or_default(),
            p.instance.map(|i| i.to_string()).unwrap_or_default(),
            r.provenance.clone(),
            r.note.clone().unwrap_or_default(),
        ])?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| anyhow!("{e}"))?)?;
    Ok(format!("{CSV_HEADER}\n{body}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_are_located() {
        assert_eq!(locate("{\n  \"p\": [1],\n \"blocks\": []}", "blocks"), (3, 2));
        assert_eq!(locate("{\"re\": 1}", "re"), (1, 2));
        assert_eq!(locate("{}", "re"), (1, 1));
    }

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt(std::f64::consts::PI), "3.14159265359e0");
        assert_eq!(sig(1.0 / 3.0), 0.333333333333);
        assert_eq!(fmt(f64::NEG_INFINITY), "-inf");
        assert_eq!(num(f64::INFINITY), Value::from("inf"));
    }

    #[test]
    fn nested_floats_are_rounded() {
        let v = serde_json::json!({"a": [0.1 + 0.2, 3], "b": {"c": 2.0 / 3.0}});
        let r = round_floats(v);
        assert_eq!(r["a"][0], Value::from(0.3));
        assert_eq!(r["a"][1], Value::from(3));
        assert_eq!(r["b"]["c"], Value::from(0.666666666667));
    }
}
