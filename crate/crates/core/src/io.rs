//! Artifact files and flat CSV reports.
//!
//! An artifact is a magic line, one line of JSON metadata, and a block of
//! little-endian `f64` values. Complex values are stored as `(re, im)` pairs
//! in storage order.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::diffraction::{
    validate_intensities, Autocorrelation2D, DiffractionPattern, FrequencyGrid, KadecNorm, Mask2D,
};
use crate::error::{Error, Result};
use crate::object::Object3D;
use crate::schemes::Scheme;
use crate::xray::{Direction, Family, Projection2D};

pub const MAGIC: &str = "TOMOPHASE-ARTIFACT";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArtifactKind {
    Object,
    Mask,
    Scheme,
    Projection,
    Pattern,
    Report,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    format_version: u32,
    kind: ArtifactKind,
    metadata: BTreeMap<String, Value>,
    payload_len: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub kind: ArtifactKind,
    pub metadata: BTreeMap<String, Value>,
    pub payload: Vec<f64>,
}

fn malformed(position: usize, reason: impl Into<String>) -> Error {
    Error::MalformedFile {
        position,
        reason: reason.into(),
    }
}

impl Artifact {
    pub fn new(kind: ArtifactKind) -> Self {
        Self {
            kind,
            metadata: BTreeMap::new(),
            payload: Vec::new(),
        }
    }

    fn with(mut self, key: &str, value: Value) -> Self {
        self.metadata.insert(key.to_string(), value);
        self
    }

    pub fn encode(&self) -> Vec<u8> {
        let header = Header {
            format_version: FORMAT_VERSION,
            kind: self.kind,
            metadata: self.metadata.clone(),
            payload_len: self.payload.len(),
        };
        let mut out = format!("{MAGIC} v{FORMAT_VERSION}\n").into_bytes();
        out.extend(serde_json::to_vec(&header).expect("header serializes"));
        out.push(b'\n');
        for v in &self.payload {
            out.extend(v.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let line_end = |from: usize| {
            bytes[from..]
                .iter()
                .position(|&b| b == b'\n')
                .map(|i| from + i)
                .ok_or_else(|| malformed(bytes.len(), "unterminated header line"))
        };
        let first = line_end(0)?;
        let magic = std::str::from_utf8(&bytes[..first]).map_err(|e| malformed(e.valid_up_to(), "magic line is not UTF-8"))?;
        let version = magic
            .strip_prefix(MAGIC)
            .and_then(|rest| rest.strip_prefix(" v"))
            .ok_or_else(|| malformed(0, "missing magic line"))?;
        let version: u32 = version.parse().map_err(|_| malformed(MAGIC.len() + 2, "bad version number"))?;
        if version != FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                expected: FORMAT_VERSION,
                found: version,
            });
        }
        let second = line_end(first + 1)?;
        let header: Header = serde_json::from_slice(&bytes[first + 1..second])
            .map_err(|e| malformed(first + 1 + e.column().saturating_sub(1), format!("header: {e}")))?;
        if header.format_version != FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                expected: FORMAT_VERSION,
                found: header.format_version,
            });
        }
        let start = second + 1;
        let body = &bytes[start..];
        let expected = header.payload_len * 8;
        if body.len() != expected {
            return Err(malformed(
                start + body.len().min(expected),
                format!("payload has {} bytes, header promises {expected}", body.len()),
            ));
        }
        let payload = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        Ok(Self {
            kind: header.kind,
            metadata: header.metadata,
            payload,
        })
    }

    fn expect_kind(&self, kind: ArtifactKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(malformed(0, format!("expected a {kind:?} artifact, found {:?}", self.kind)))
        }
    }

    fn usize_field(&self, key: &str) -> Result<usize> {
        self.metadata
            .get(key)
            .and_then(Value::as_u64)
            .map(|v| v as usize)
            .ok_or_else(|| malformed(0, format!("metadata field `{key}` missing or not an integer")))
    }

    fn opt_u64(&self, key: &str) -> Option<u64> {
        self.metadata.get(key).and_then(Value::as_u64)
    }

    fn str_field(&self, key: &str) -> Option<&str> {
        self.metadata.get(key).and_then(Value::as_str)
    }

    fn require_len(&self, len: usize) -> Result<()> {
        if self.payload.len() == len {
            Ok(())
        } else {
            Err(malformed(0, format!("payload holds {} values, expected {len}", self.payload.len())))
        }
    }
}

fn push_complex(out: &mut Vec<f64>, values: &[Complex64]) {
    for v in values {
        out.push(v.re);
        out.push(v.im);
    }
}

fn complex_values(payload: &[f64]) -> Vec<Complex64> {
    payload.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect()
}

fn parse_family(s: &str) -> Result<Family> {
    s.parse().map_err(|_| malformed(0, format!("unknown family `{s}`")))
}

/// Conversion between an entity and its artifact representation.
pub trait Codec: Sized {
    fn to_artifact(&self) -> Artifact;
    fn from_artifact(a: &Artifact) -> Result<Self>;

    fn encode(&self) -> Vec<u8> {
        self.to_artifact().encode()
    }

    fn decode(bytes: &[u8]) -> Result<Self> {
        Self::from_artifact(&Artifact::decode(bytes)?)
    }
}

impl Codec for Object3D {
    fn to_artifact(&self) -> Artifact {
        let mut a = Artifact::new(ArtifactKind::Object)
            .with("n", json!(self.n()))
            .with("p", json!(self.p()));
        push_complex(&mut a.payload, self.values());
        a
    }

    fn from_artifact(a: &Artifact) -> Result<Self> {
        a.expect_kind(ArtifactKind::Object)?;
        let (n, p) = (a.usize_field("n")?, a.usize_field("p")?);
        a.require_len(2 * n * n * n)?;
        Object3D::from_values(n, p, complex_values(&a.payload))
    }
}

impl Codec for Mask2D {
    fn to_artifact(&self) -> Artifact {
        let mut a = Artifact::new(ArtifactKind::Mask).with("p", json!(self.p()));
        if let Some(seed) = self.seed {
            a = a.with("seed", json!(seed));
        }
        a.payload = self.phases().to_vec();
        a
    }

    fn from_artifact(a: &Artifact) -> Result<Self> {
        a.expect_kind(ArtifactKind::Mask)?;
        let p = a.usize_field("p")?;
        a.require_len(p * p)?;
        let mut mask = Mask2D::from_phases(p, a.payload.clone())?;
        mask.seed = a.opt_u64("seed");
        Ok(mask)
    }
}

impl Codec for Scheme {
    fn to_artifact(&self) -> Artifact {
        let mut a = Artifact::new(ArtifactKind::Scheme)
            .with("family", json!(self.family.name()))
            .with("n", json!(self.n))
            .with("p", json!(self.p))
            .with("slopes", json!(self.slopes.len()))
            .with("extra", json!(self.extra.is_some()));
        for &(x, y) in self.slopes.iter().chain(&self.extra) {
            a.payload.push(x);
            a.payload.push(y);
        }
        a
    }

    fn from_artifact(a: &Artifact) -> Result<Self> {
        a.expect_kind(ArtifactKind::Scheme)?;
        let family = parse_family(a.str_field("family").unwrap_or(""))?;
        let (n, p, m) = (a.usize_field("n")?, a.usize_field("p")?, a.usize_field("slopes")?);
        let has_extra = a.metadata.get("extra").and_then(Value::as_bool).unwrap_or(false);
        a.require_len(2 * (m + usize::from(has_extra)))?;
        let pairs: Vec<(f64, f64)> = a.payload.chunks_exact(2).map(|c| (c[0], c[1])).collect();
        let s = Scheme {
            family,
            slopes: pairs[..m].to_vec(),
            extra: has_extra.then(|| pairs[m]),
            n,
            p,
        };
        s.validate()?;
        Ok(s)
    }
}

impl Codec for Projection2D {
    fn to_artifact(&self) -> Artifact {
        let mut a = Artifact::new(ArtifactKind::Projection).with("p", json!(self.p()));
        push_complex(&mut a.payload, self.values());
        if let Some(d) = self.provenance {
            a = a.with("provenance", json!(d.family.name()));
            a.payload.push(d.alpha);
            a.payload.push(d.beta);
        }
        a
    }

    fn from_artifact(a: &Artifact) -> Result<Self> {
        a.expect_kind(ArtifactKind::Projection)?;
        let p = a.usize_field("p")?;
        let provenance = a.str_field("provenance").map(parse_family).transpose()?;
        a.require_len(2 * p * p + if provenance.is_some() { 2 } else { 0 })?;
        let mut g = Projection2D::from_values(p, complex_values(&a.payload[..2 * p * p]))?;
        if let Some(family) = provenance {
            let d = Direction {
                family,
                alpha: a.payload[2 * p * p],
                beta: a.payload[2 * p * p + 1],
            };
            d.validate()?;
            g.provenance = Some(d);
        }
        Ok(g)
    }
}

impl Codec for Autocorrelation2D {
    fn to_artifact(&self) -> Artifact {
        self.field()
            .to_artifact()
            .with("content", json!("autocorrelation"))
            .with("source_p", json!(self.p()))
    }

    fn from_artifact(a: &Artifact) -> Result<Self> {
        if a.str_field("content") != Some("autocorrelation") {
            return Err(malformed(0, "projection artifact does not hold an autocorrelation"));
        }
        Autocorrelation2D::from_field(a.usize_field("source_p")?, Projection2D::from_artifact(a)?)
    }
}

impl Codec for DiffractionPattern {
    fn to_artifact(&self) -> Artifact {
        let norm = match self.kadec_norm {
            KadecNorm::Euclidean => "euclidean",
            KadecNorm::Sup => "sup",
        };
        let mut a = Artifact::new(ArtifactKind::Pattern)
            .with("p", json!(self.p))
            .with("kadec_norm", json!(norm))
            .with("forced", json!(self.forced))
            .with("grid", json!(if matches!(self.grid, FrequencyGrid::Regular) { "regular" } else { "irregular" }));
        if let Some(seed) = self.mask_seed {
            a = a.with("mask_seed", json!(seed));
        }
        a.payload = self.intensities.clone();
        if let FrequencyGrid::Irregular(nodes) = &self.grid {
            a.payload.extend(nodes.iter().flatten());
        }
        a
    }

    fn from_artifact(a: &Artifact) -> Result<Self> {
        a.expect_kind(ArtifactKind::Pattern)?;
        let p = a.usize_field("p")?;
        let q = 2 * p - 1;
        let count = q * q;
        let irregular = match a.str_field("grid") {
            Some("regular") => false,
            Some("irregular") => true,
            other => return Err(malformed(0, format!("unknown grid {other:?}"))),
        };
        a.require_len(if irregular { 3 * count } else { count })?;
        let mut intensities = a.payload[..count].to_vec();
        validate_intensities(&mut intensities)?;
        let grid = if irregular {
            FrequencyGrid::Irregular(a.payload[count..].chunks_exact(2).map(|c| [c[0], c[1]]).collect())
        } else {
            FrequencyGrid::Regular
        };
        let kadec_norm = match a.str_field("kadec_norm") {
            Some("sup") => KadecNorm::Sup,
            _ => KadecNorm::Euclidean,
        };
        Ok(DiffractionPattern {
            p,
            grid,
            intensities,
            mask_seed: a.opt_u64("mask_seed"),
            kadec_norm,
            forced: a.metadata.get("forced").and_then(Value::as_bool).unwrap_or(false),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Flat check report, one row per check.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn push(&mut self, name: impl Into<String>, value: f64, threshold: f64, pass: bool) {
        self.rows.push(ReportRow {
            name: name.into(),
            value,
            threshold,
            pass,
        });
    }

    /// Adds a row passing when `value <= threshold`.
    pub fn at_most(&mut self, name: impl Into<String>, value: f64, threshold: f64) {
        self.push(name, value, threshold, value <= threshold);
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,value,threshold,pass\n");
        for r in &self.rows {
            // `{:?}` prints the shortest representation that parses back exactly
            let _ = writeln!(out, "{},{:?},{:?},{}", r.name.replace(',', ";"), r.value, r.threshold, r.pass);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some("name,value,threshold,pass") {
            return Err(malformed(0, "missing report header"));
        }
        let mut report = Report::default();
        let mut position = "name,value,threshold,pass\n".len();
        for line in lines {
            let fields: Vec<&str> = line.split(',').collect();
            let parsed = match fields.as_slice() {
                [name, value, threshold, pass] => value
                    .parse()
                    .ok()
                    .zip(threshold.parse().ok())
                    .zip(pass.parse().ok())
                    .map(|((v, t), ok)| (name.to_string(), v, t, ok)),
                _ => None,
            };
            let (name, value, threshold, pass) = parsed.ok_or_else(|| malformed(position, format!("bad report row `{line}`")))?;
            report.push(name, value, threshold, pass);
            position += line.len() + 1;
        }
        Ok(report)
    }
}

impl Codec for Report {
    fn to_artifact(&self) -> Artifact {
        let names: Vec<&str> = self.rows.iter().map(|r| r.name.as_str()).collect();
        let passes: Vec<bool> = self.rows.iter().map(|r| r.pass).collect();
        let mut a = Artifact::new(ArtifactKind::Report)
            .with("names", json!(names))
            .with("pass", json!(passes));
        a.payload = self.rows.iter().flat_map(|r| [r.value, r.threshold]).collect();
        a
    }

    fn from_artifact(a: &Artifact) -> Result<Self> {
        a.expect_kind(ArtifactKind::Report)?;
        let names: Vec<String> = a
            .metadata
            .get("names")
            .cloned()
            .and_then(|v| serde_json::from_value(v).ok())
            .ok_or_else(|| malformed(0, "report names missing"))?;
        let passes: Vec<bool> = a
            .metadata
            .get("pass")
            .cloned()
            .and_then(|v| serde_json::from_value(v).ok())
            .ok_or_else(|| malformed(0, "report pass flags missing"))?;
        if passes.len() != names.len() {
            return Err(malformed(0, "report names and flags differ in length"));
        }
        a.require_len(2 * names.len())?;
        let mut report = Report::default();
        for ((name, pass), vt) in names.into_iter().zip(passes).zip(a.payload.chunks_exact(2)) {
            report.push(name, vt[0], vt[1], pass);
        }
        Ok(report)
    }
}
