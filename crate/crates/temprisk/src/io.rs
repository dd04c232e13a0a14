//! File formats: CSV/JSON signals, cost samples, histograms, run manifests.
//!
//! Signal CSV: header `t,x1,...,xn`, one row per step, strictly increasing
//! integer `t` with no gaps. Reals are written with 17 significant digits,
//! which round-trips every f64 exactly. The JSON form carries `dt`, `t_min`,
//! and the per-step sample vectors under `columns`.

use crate::risk::SampleSet;
use crate::signal::Signal;
use crate::Error;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

/// Writes an f64 with 17 significant digits (exact round-trip).
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Signal to CSV text.
pub fn signal_to_csv(s: &Signal) -> String {
    let mut out = String::new();
    out.push('t');
    for i in 1..=s.n() {
        let _ = write!(out, ",x{i}");
    }
    out.push('\n');
    for t in s.t_min()..=s.t_max() {
        let _ = write!(out, "{t}");
        for v in s.sample(t) {
            let _ = write!(out, ",{}", fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

/// Parses the CSV signal format. `dt` is not part of the CSV; pass the
/// intended seconds-per-step (1.0 when unknown).
pub fn signal_from_csv(text: &str, dt: f64) -> Result<Signal, Error> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Validation("empty signal file".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.is_empty() || cols[0] != "t" {
        return Err(Error::Validation("signal header must start with 't'".into()));
    }
    let n = cols.len() - 1;
    for (i, c) in cols.iter().skip(1).enumerate() {
        let expect = format!("x{}", i + 1);
        if *c != expect {
            return Err(Error::Validation(format!(
                "signal header column {} is '{c}', expected '{expect}'",
                i + 2
            )));
        }
    }
    if n == 0 {
        return Err(Error::Validation("signal has no components".into()));
    }
    let mut t_min = None;
    let mut expected_t = 0i64;
    let mut columns = Vec::new();
    for (line_no, line) in lines {
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != n + 1 {
            return Err(Error::Validation(format!(
                "line {}: {} fields, expected {}",
                line_no + 1,
                parts.len(),
                n + 1
            )));
        }
        let t: i64 = parts[0].parse().map_err(|_| {
            Error::Validation(format!("line {}: bad time index '{}'", line_no + 1, parts[0]))
        })?;
        if t_min.is_none() {
            t_min = Some(t);
            expected_t = t;
        }
        if t != expected_t {
            return Err(Error::Validation(format!(
                "line {}: time {} out of order (expected {})",
                line_no + 1,
                t,
                expected_t
            )));
        }
        expected_t += 1;
        let mut col = Vec::with_capacity(n);
        for p in &parts[1..] {
            let v: f64 = p.parse().map_err(|_| {
                Error::Validation(format!("line {}: bad value '{p}'", line_no + 1))
            })?;
            col.push(v);
        }
        columns.push(col);
    }
    let t_min = t_min.ok_or_else(|| Error::Validation("signal has no rows".into()))?;
    Signal::new(n, t_min, columns, dt)
}

#[derive(Serialize, Deserialize)]
struct SignalJson {
    schema: u32,
    dt: f64,
    t_min: i64,
    columns: Vec<Vec<f64>>,
}

/// Signal to the JSON form.
pub fn signal_to_json(s: &Signal) -> String {
    let doc = SignalJson {
        schema: 1,
        dt: s.dt(),
        t_min: s.t_min(),
        columns: (s.t_min()..=s.t_max()).map(|t| s.sample(t).to_vec()).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("serializable")
}

/// Parses the JSON signal form.
pub fn signal_from_json(text: &str) -> Result<Signal, Error> {
    let doc: SignalJson =
        serde_json::from_str(text).map_err(|e| Error::Validation(format!("signal json: {e}")))?;
    let n = doc
        .columns
        .first()
        .map(|c| c.len())
        .ok_or_else(|| Error::Validation("signal json has no columns".into()))?;
    Signal::new(n, doc.t_min, doc.columns, doc.dt)
}

/// Cost samples, one per line, ascending.
pub fn samples_to_csv(z: &SampleSet) -> String {
    let mut out = String::from("cost\n");
    for v in z.values() {
        let _ = writeln!(out, "{}", fmt_f64(*v));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub schema: u32,
    /// Left edge of the first bin.
    pub start: i64,
    pub bin_width: i64,
    pub counts: Vec<u64>,
}

/// Integer-bin histogram (width 1) of the cost samples.
pub fn histogram(z: &SampleSet) -> Histogram {
    let lo = z.values().first().copied().unwrap_or(0.0).floor() as i64;
    let hi = z.values().last().copied().unwrap_or(0.0).floor() as i64;
    let mut counts = vec![0u64; (hi - lo + 1) as usize];
    for &v in z.values() {
        let bin = (v.floor() as i64 - lo) as usize;
        counts[bin] += 1;
    }
    Histogram {
        schema: 1,
        start: lo,
        bin_width: 1,
        counts,
    }
}

/// Risk report as one CSV row (plus header): the bracket per requested
/// level, then the estimates and counts.
pub fn report_to_csv(r: &crate::risk::RiskReport) -> String {
    let mut header = String::from("kind,n,r");
    let mut row = format!("{},{},{}", r.kind, r.n, r.r);
    for v in &r.var {
        header.push_str(&format!(",var_upper_{0},var_lower_{0}", v.beta));
        match (v.upper, v.lower) {
            (Some(u), Some(l)) => row.push_str(&format!(",{},{}", fmt_f64(u), fmt_f64(l))),
            _ => row.push_str(",,"),
        }
    }
    for cv in &r.cvar {
        header.push_str(&format!(",cvar_{}", cv.beta));
        row.push_str(&format!(",{}", fmt_f64(cv.value)));
    }
    header.push_str(",expectation,violations,saturated");
    row.push_str(&format!(
        ",{},{},{}",
        fmt_f64(r.expectation),
        r.violation_count,
        r.saturated_count
    ));
    format!("{header}\n{row}\n")
}

/// Run provenance: what command produced an output directory, from which
/// configuration, and how long it took. The digest is computed over a
/// canonical (key-sorted) rendering of the configuration, so it does not
/// depend on field order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: u32,
    pub command: String,
    pub config_digest: String,
    pub seed: u64,
    pub tool_version: String,
    /// Wall time; excluded from the digest and from report files so that
    /// reruns with the same seed produce byte-identical reports.
    pub wall_ms: u64,
}

impl RunManifest {
    pub fn new(command: String, config: &serde_json::Value, seed: u64, wall_ms: u64) -> Self {
        RunManifest {
            schema: 1,
            command,
            config_digest: format!("{:016x}", digest_value(config)),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_ms,
        }
    }
}

/// FNV-1a over a canonical rendering of a JSON value (object keys sorted).
pub fn digest_value(v: &serde_json::Value) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            hash ^= b as u64;
            hash = hash.wrapping_mul(0x100000001b3);
        }
    };
    fn canonical(v: &serde_json::Value, out: &mut String) {
        match v {
            serde_json::Value::Object(map) => {
                let mut keys: Vec<&String> = map.keys().collect();
                keys.sort();
                out.push('{');
                for k in keys {
                    out.push_str(k);
                    out.push(':');
                    canonical(&map[k], out);
                    out.push(',');
                }
                out.push('}');
            }
            serde_json::Value::Array(items) => {
                out.push('[');
                for item in items {
                    canonical(item, out);
                    out.push(',');
                }
                out.push(']');
            }
            other => out.push_str(&other.to_string()),
        }
    }
    let mut text = String::new();
    canonical(v, &mut text);
    eat(text.as_bytes());
    hash
}

/// Reads a whole file, mapping missing files to `Error::Io`.
pub fn read_file(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Writes a file, creating parent directories.
pub fn write_file(path: &Path, contents: &str) -> Result<(), Error> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| Error::Io(format!("{}: {e}", parent.display())))?;
        }
    }
    std::fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn awkward_signal() -> Signal {
        Signal::new(
            2,
            -3,
            vec![
                vec![1.0 / 3.0, -2.5e-17],
                vec![std::f64::consts::PI, 1e300],
                vec![-0.1, 0.3 + 0.3 + 0.3],
            ],
            0.1,
        )
        .unwrap()
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let s = awkward_signal();
        let text = signal_to_csv(&s);
        let back = signal_from_csv(&text, s.dt()).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn json_roundtrip_is_exact() {
        let s = awkward_signal();
        let back = signal_from_json(&signal_to_json(&s)).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn csv_rejects_gaps_and_disorder() {
        assert!(signal_from_csv("t,x1\n0,1.0\n2,2.0\n", 1.0).is_err());
        assert!(signal_from_csv("t,x1\n1,1.0\n0,2.0\n", 1.0).is_err());
        assert!(signal_from_csv("t,x2\n0,1.0\n", 1.0).is_err());
    }

    #[test]
    fn histogram_bins() {
        let z = SampleSet::new(vec![-2.0, -2.0, -1.0, 0.0, 0.0, 0.0, 2.0]).unwrap();
        let h = histogram(&z);
        assert_eq!(h.start, -2);
        assert_eq!(h.counts, vec![2, 1, 3, 0, 1]);
        assert_eq!(h.counts.iter().sum::<u64>() as usize, z.len());
    }

    #[test]
    fn digest_ignores_key_order() {
        let a: serde_json::Value =
            serde_json::from_str(r#"{"b": 1, "a": {"y": [1,2], "x": 3}}"#).unwrap();
        let b: serde_json::Value =
            serde_json::from_str(r#"{"a": {"x": 3, "y": [1,2]}, "b": 1}"#).unwrap();
        assert_eq!(digest_value(&a), digest_value(&b));
        let c: serde_json::Value = serde_json::from_str(r#"{"a": {"x": 4}, "b": 1}"#).unwrap();
        assert_ne!(digest_value(&a), digest_value(&c));
    }
}
