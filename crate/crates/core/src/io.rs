//! Text and JSON formats for spaces and maps.
//!
//! ```text
//! matspace 1
//! q=3 n=2 p=2 kind=linear dim=1
//! base:
//! 0 0
//! 0 0
//! gen 1:
//! 1 0
//! 0 1
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Map files add lines
//! `F(base): v..` and `F(gen i): v..`, with the vector either on the same
//! line or on the next one. A document starting with `{` is read as JSON.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::matrix::{format_vector, parse_vector, Matrix, Vector};
use crate::rangecompat::AffineMap;
use crate::space::{MatSpace, MatSpaceDoc};

const MAGIC: &str = "matspace 1";

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Significant lines with their 1-based line numbers.
fn significant(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

struct Header {
    field: FieldSpec,
    n: usize,
    p: usize,
    linear: bool,
    dim: usize,
}

fn parse_header(line: usize, text: &str) -> Result<Header> {
    let mut q = None;
    let mut n = None;
    let mut p = None;
    let mut kind = None;
    let mut dim = None;
    for tok in text.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or_else(|| err(line, format!("expected key=value, got {tok:?}")))?;
        let num = || v.parse::<usize>().map_err(|_| err(line, format!("bad value for {k}: {v:?}")));
        match k {
            "q" => q = Some(num()?),
            "n" => n = Some(num()?),
            "p" => p = Some(num()?),
            "dim" => dim = Some(num()?),
            "kind" => {
                kind = Some(match v {
                    "linear" => true,
                    "affine" => false,
                    _ => return Err(err(line, format!("unknown kind {v:?}"))),
                })
            }
            _ => return Err(err(line, format!("unknown key {k:?}"))),
        }
    }
    let missing = |name: &str| err(line, format!("missing {name}"));
    let q = q.ok_or_else(|| missing("q"))?;
    Ok(Header {
        field: FieldSpec::new(q as u32).map_err(|e| err(line, e.to_string()))?,
        n: n.ok_or_else(|| missing("n"))?,
        p: p.ok_or_else(|| missing("p"))?,
        linear: kind.ok_or_else(|| missing("kind"))?,
        dim: dim.ok_or_else(|| missing("dim"))?,
    })
}

/// Parsed space description before canonicalization.
struct RawSpace<'a> {
    header: Header,
    base: Matrix,
    gens: Vec<Matrix>,
    /// `F(...)` lines, kept for map files.
    values: Vec<(usize, &'a str)>,
}

fn parse_raw(text: &str) -> Result<RawSpace<'_>> {
    let lines = significant(text);
    let mut values = Vec::new();
    let mut body = Vec::new();
    let mut it = lines.into_iter().peekable();
    while let Some((no, l)) = it.next() {
        if l.starts_with("F(") {
            values.push((no, l));
            // vector on the following line
            if l.ends_with(':') {
                if let Some(&(no2, next)) = it.peek() {
                    values.push((no2, next));
                    it.next();
                }
            }
        } else {
            body.push((no, l));
        }
    }
    let mut pos = 0;
    let next = |pos: &mut usize| -> Result<(usize, &str)> {
        let r = body.get(*pos).copied().ok_or_else(|| err(0, "unexpected end of input"))?;
        *pos += 1;
        Ok(r)
    };
    let (no, magic) = next(&mut pos)?;
    if magic != MAGIC {
        return Err(err(no, format!("expected {MAGIC:?}")));
    }
    let (no, h) = next(&mut pos)?;
    let header = parse_header(no, h)?;
    let read_matrix = |pos: &mut usize, label: &str| -> Result<Matrix> {
        let (no, l) = next(pos)?;
        if l != label {
            return Err(err(no, format!("expected {label:?}, got {l:?}")));
        }
        if header.p == 0 {
            return Ok(Matrix::zeros(header.field, header.n, 0));
        }
        let mut data = Vec::with_capacity(header.n * header.p);
        for _ in 0..header.n {
            let (no, row) = next(pos)?;
            let v = parse_vector(header.field, row).map_err(|e| err(no, e.to_string()))?;
            if v.len() != header.p {
                return Err(err(no, format!("expected {} entries, got {}", header.p, v.len())));
            }
            data.extend(v);
        }
        Matrix::from_vec(header.field, header.n, header.p, data)
    };
    let base = read_matrix(&mut pos, "base:")?;
    let mut gens = Vec::new();
    for i in 1..=header.dim {
        gens.push(read_matrix(&mut pos, &format!("gen {i}:"))?);
    }
    if let Some(&(no, l)) = body.get(pos) {
        return Err(err(no, format!("unexpected line {l:?}")));
    }
    Ok(RawSpace { header, base, gens, values })
}

fn build_space(raw: &RawSpace<'_>) -> Result<MatSpace> {
    let h = &raw.header;
    let s = MatSpace::new(h.field, h.n, h.p, &raw.base, &raw.gens, h.linear)?;
    if s.dim() != h.dim {
        return Err(err(2, format!("dim={} but the generators span {} dimensions", h.dim, s.dim())));
    }
    Ok(s)
}

pub fn parse_space(text: &str) -> Result<MatSpace> {
    if text.trim_start().starts_with('{') {
        let doc: MatSpaceDoc = serde_json::from_str(text).map_err(|e| err(e.line(), e.to_string()))?;
        return MatSpace::try_from(doc);
    }
    let raw = parse_raw(text)?;
    if let Some(&(no, _)) = raw.values.first() {
        return Err(err(no, "map values in a space file"));
    }
    build_space(&raw)
}

fn write_matrix(out: &mut String, label: &str, m: &Matrix) {
    out.push_str(label);
    out.push('\n');
    if m.cols() > 0 {
        out.push_str(&m.to_string());
    }
}

fn write_space(out: &mut String, s: &MatSpace) {
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&format!(
        "q={} n={} p={} kind={} dim={}\n",
        s.field().q(),
        s.n(),
        s.p(),
        if s.is_linear() { "linear" } else { "affine" },
        s.dim()
    ));
    write_matrix(out, "base:", s.base());
    for (i, b) in s.basis().iter().enumerate() {
        write_matrix(out, &format!("gen {}:", i + 1), b);
    }
}

pub fn format_space(s: &MatSpace) -> String {
    let mut out = String::new();
    write_space(&mut out, s);
    out
}

pub fn space_to_json(s: &MatSpace) -> String {
    serde_json::to_string_pretty(s).expect("serializable")
}

#[derive(Serialize, Deserialize)]
struct MapDoc {
    domain: MatSpace,
    at_base: Vector,
    on_basis: Vec<Vector>,
}

pub fn parse_map(text: &str) -> Result<AffineMap> {
    if text.trim_start().starts_with('{') {
        let doc: MapDoc = serde_json::from_str(text).map_err(|e| err(e.line(), e.to_string()))?;
        return AffineMap::new(doc.domain, doc.at_base, doc.on_basis);
    }
    let raw = parse_raw(text)?;
    let h = &raw.header;
    let mut base_value: Option<Vector> = None;
    let mut gen_values: Vec<Option<Vector>> = vec![None; h.dim];
    let mut pending: Option<(usize, String)> = None;
    for &(no, l) in &raw.values {
        let (label, rest) = match pending.take() {
            Some((_, label)) => (label, l),
            None => {
                let (label, rest) = l.split_once(':').ok_or_else(|| err(no, "expected `F(...):`"))?;
                let rest = rest.trim();
                if rest.is_empty() {
                    pending = Some((no, label.to_string()));
                    continue;
                }
                (label.to_string(), rest)
            }
        };
        let v = parse_vector(h.field, rest).map_err(|e| err(no, e.to_string()))?;
        if v.len() != h.n {
            return Err(err(no, format!("expected {} entries, got {}", h.n, v.len())));
        }
        let slot = match label.trim() {
            "F(base)" => &mut base_value,
            other => {
                let i: usize = other
                    .strip_prefix("F(gen ")
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|k| k.trim().parse().ok())
                    .filter(|&k| (1..=h.dim).contains(&k))
                    .ok_or_else(|| err(no, format!("unknown label {other:?}")))?;
                &mut gen_values[i - 1]
            }
        };
        if slot.replace(v).is_some() {
            return Err(err(no, format!("duplicate {}", label.trim())));
        }
    }
    if let Some((no, label)) = pending {
        return Err(err(no, format!("missing vector for {label}")));
    }
    let base_value = base_value.ok_or_else(|| err(0, "missing F(base)"))?;
    let gen_values: Vec<Vector> = gen_values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| err(0, format!("missing F(gen {})", i + 1))))
        .collect::<Result<_>>()?;
    let map = AffineMap::from_generators(&raw.base, &base_value, &raw.gens, &gen_values)?;
    if map.domain().dim() != h.dim {
        return Err(err(2, format!("dim={} but the generators span {} dimensions", h.dim, map.domain().dim())));
    }
    if h.linear != map.domain().is_linear() {
        return Err(err(2, "kind does not match the base"));
    }
    Ok(map)
}

pub fn format_map(f: &AffineMap) -> String {
    let mut out = String::new();
    write_space(&mut out, f.domain());
    out.push_str(&format!("F(base): {}\n", format_vector(f.at_base())));
    for (i, v) in f.on_basis().iter().enumerate() {
        out.push_str(&format!("F(gen {}): {}\n", i + 1, format_vector(v)));
    }
    out
}

pub fn map_to_json(f: &AffineMap) -> String {
    let doc = MapDoc { domain: f.domain().clone(), at_base: f.at_base().to_vec(), on_basis: f.on_basis().to_vec() };
    serde_json::to_string_pretty(&doc).expect("serializable")
}
