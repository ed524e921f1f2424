//! Census reports: a versioned JSON document and a line-oriented text form.
//! Both parse back to the same record.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::MatSpace;

use super::census::{SpaceKind, UNCLASSIFIED};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusConfig {
    pub q: u8,
    pub n: usize,
    pub p: usize,
    pub r: usize,
    pub dim: usize,
    pub kind: SpaceKind,
    pub workers: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusReport {
    pub schema_version: u32,
    pub config: CensusConfig,
    /// Spaces enumerated.
    pub total: u64,
    /// Spaces with upper-rank at most `r`.
    pub passing: u64,
    /// Certified survivors per bucket, including empty buckets.
    pub classes: BTreeMap<String, u64>,
    pub unclassified: u64,
    /// Survivors whose bucket was backed by a verified witness.
    pub certified: u64,
    pub counterexamples: Vec<MatSpace>,
    pub wall_time_ms: u64,
}

impl CensusReport {
    /// The theorem-census pass condition.
    pub fn passed(&self) -> bool {
        self.unclassified == 0 && self.certified == self.passing
    }

    /// Buckets with a nonzero count.
    pub fn nonzero_classes(&self) -> impl Iterator<Item = (&str, u64)> {
        self.classes.iter().filter(|(_, &c)| c > 0).map(|(k, &c)| (k.as_str(), c))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
}

pub fn emit_report(report: &CensusReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => serde_json::to_string_pretty(report).expect("serializable") + "\n",
        ReportFormat::Text => emit_text(report),
    }
}

fn emit_text(r: &CensusReport) -> String {
    let c = &r.config;
    let mut s = String::new();
    writeln!(s, "census schema={}", r.schema_version).unwrap();
    writeln!(s, "q={} n={} p={} r={} dim={} kind={} workers={}", c.q, c.n, c.p, c.r, c.dim, c.kind, c.workers).unwrap();
    writeln!(s, "total: {}", r.total).unwrap();
    writeln!(s, "passing: {}", r.passing).unwrap();
    for (k, v) in &r.classes {
        writeln!(s, "class {k}: {v}").unwrap();
    }
    writeln!(s, "{UNCLASSIFIED}: {}", r.unclassified).unwrap();
    writeln!(s, "certified: {}", r.certified).unwrap();
    writeln!(s, "wall_time_ms: {}", r.wall_time_ms).unwrap();
    for m in &r.counterexamples {
        writeln!(s, "counterexample: {}", serde_json::to_string(m).expect("serializable")).unwrap();
    }
    s
}

/// Parses either emitted form; JSON is recognized by a leading `{`.
pub fn parse_report(text: &str) -> Result<CensusReport> {
    if text.trim_start().starts_with('{') {
        return serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() });
    }
    parse_text(text)
}

fn parse_text(text: &str) -> Result<CensusReport> {
    let err = |line: usize, msg: &str| Error::Parse { line, msg: msg.to_string() };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let (ln, head) = lines.next().ok_or_else(|| err(1, "empty report"))?;
    let schema_version = head
        .strip_prefix("census schema=")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| err(ln, "expected `census schema=N`"))?;
    let (ln, cfg) = lines.next().ok_or_else(|| err(ln + 1, "missing configuration line"))?;
    let mut kv = BTreeMap::new();
    for tok in cfg.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or_else(|| err(ln, "expected key=value"))?;
        kv.insert(k, v);
    }
    let num = |k: &str| -> Result<usize> {
        kv.get(k).and_then(|v| v.parse().ok()).ok_or_else(|| err(ln, &format!("missing or bad {k}")))
    };
    let config = CensusConfig {
        q: num("q")? as u8,
        n: num("n")?,
        p: num("p")?,
        r: num("r")?,
        dim: num("dim")?,
        kind: kv.get("kind").ok_or_else(|| err(ln, "missing kind"))?.parse()?,
        workers: num("workers")?,
    };
    let mut report = CensusReport {
        schema_version,
        config,
        total: 0,
        passing: 0,
        classes: BTreeMap::new(),
        unclassified: 0,
        certified: 0,
        counterexamples: Vec::new(),
        wall_time_ms: 0,
    };
    for (ln, line) in lines {
        let (key, value) = line.split_once(": ").ok_or_else(|| err(ln, "expected `key: value`"))?;
        if key == "counterexample" {
            let m = serde_json::from_str(value).map_err(|e| err(ln, &e.to_string()))?;
            report.counterexamples.push(m);
            continue;
        }
        let v: u64 = value.parse().map_err(|_| err(ln, "expected an integer"))?;
        match key {
            "total" => report.total = v,
            "passing" => report.passing = v,
            "certified" => report.certified = v,
            "wall_time_ms" => report.wall_time_ms = v,
            k if k == UNCLASSIFIED => report.unclassified = v,
            k => match k.strip_prefix("class ") {
                Some(name) => {
                    report.classes.insert(name.to_string(), v);
                }
                None => return Err(err(ln, &format!("unknown key {k:?}"))),
            },
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use crate::verify::census::{census, CensusSpec};

    fn empty() -> CensusReport {
        CensusReport {
            schema_version: SCHEMA_VERSION,
            config: CensusConfig { q: 2, n: 2, p: 2, r: 1, dim: 5, kind: SpaceKind::Linear, workers: 1 },
            total: 0,
            passing: 0,
            classes: BTreeMap::new(),
            unclassified: 0,
            certified: 0,
            counterexamples: Vec::new(),
            wall_time_ms: 0,
        }
    }

    #[test]
    fn empty_round_trip() {
        let r = empty();
        for fmt in [ReportFormat::Text, ReportFormat::Json] {
            let doc = emit_report(&r, fmt);
            assert_eq!(parse_report(&doc).unwrap(), r);
        }
        assert!(emit_report(&r, ReportFormat::Text).contains("total: 0"));
    }

    #[test]
    fn census_round_trip_with_counterexamples() {
        let mut r = census(&CensusSpec::new(FieldSpec::f2(), 2, 2, 1, 2, SpaceKind::Affine)).unwrap();
        r.counterexamples.push(MatSpace::full(FieldSpec::f2(), 2, 2));
        for fmt in [ReportFormat::Text, ReportFormat::Json] {
            assert_eq!(parse_report(&emit_report(&r, fmt)).unwrap(), r);
        }
        let v: serde_json::Value = serde_json::from_str(&emit_report(&r, ReportFormat::Json)).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["config"]["kind"], "affine");
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_report("").is_err());
        assert!(parse_report("census schema=1\nq=2\n").is_err());
        assert!(parse_report("{ not json").is_err());
    }
}
