//! CSV and JSON sidecar for [`SpectralData`].
//!
//! ```text
//! # logweyl spectrum
//! # dimension = 1
//! # half_width = 3.2000000000000000e2
//! # ...
//! 1.8775...e0
//! ```
//!
//! Floats are written with 17 significant digits, so reading a file back
//! gives the same bits.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use super::{DiscretizationConfig, OperatorKind, SchemeOrder, SpectralData};
use crate::numfmt::{fmt_f64, parse_f64, FlatJson};
use crate::{Error, Result};

const MAGIC: &str = "# logweyl spectrum";

impl SpectralData {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(MAGIC);
        out.push('\n');
        for (k, v) in self.header_fields() {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        for v in &self.eigenvalues {
            out.push_str(&fmt_f64(*v));
            out.push('\n');
        }
        out
    }

    fn header_fields(&self) -> Vec<(&'static str, String)> {
        let mut f = Vec::new();
        if let Some(c) = &self.config {
            f.push(("dimension", c.dimension.to_string()));
            f.push(("half_width", fmt_f64(c.half_width)));
            f.push(("grid_points", c.grid_points.to_string()));
            f.push(("scheme_order", c.scheme_order.as_int().to_string()));
            f.push(("operator", c.operator.as_str().to_owned()));
        }
        f.push(("count", self.eigenvalues.len().to_string()));
        f.push(("trusted_count", self.trusted_count.to_string()));
        f.push(("power", fmt_f64(self.power)));
        f.push(("complete", self.complete.to_string()));
        f
    }

    pub fn sidecar_json(&self) -> String {
        let mut j = FlatJson::new();
        if let Some(c) = &self.config {
            j.int("dimension", c.dimension as i64)
                .num("half_width", c.half_width)
                .int("grid_points", c.grid_points as i64)
                .int("scheme_order", c.scheme_order.as_int() as i64)
                .str("operator", c.operator.as_str());
        }
        j.int("count", self.eigenvalues.len() as i64)
            .int("trusted_count", self.trusted_count as i64)
            .num("power", self.power)
            .boolean("complete", self.complete);
        j.render()
    }

    pub fn from_csv_str(text: &str, origin: &Path) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(MAGIC) {
            return Err(Error::parse(origin, format!("first line must be `{MAGIC}`")));
        }
        let mut header = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let (k, v) = rest
                    .split_once('=')
                    .ok_or_else(|| Error::parse(origin, format!("header line {} lacks `=`", lineno + 2)))?;
                header.push((k.trim().to_owned(), v.trim().to_owned()));
            } else {
                let v = parse_f64(line)
                    .ok_or_else(|| Error::parse(origin, format!("line {}: not a number: {line}", lineno + 2)))?;
                values.push(v);
            }
        }
        let get = |key: &str| header.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let config = match get("dimension") {
            None => None,
            Some(d) => Some(DiscretizationConfig {
                dimension: parse_int(d, "dimension", origin)?,
                half_width: get("half_width")
                    .and_then(parse_f64)
                    .ok_or_else(|| Error::parse(origin, "missing half_width"))?,
                grid_points: parse_int(get("grid_points").unwrap_or(""), "grid_points", origin)?,
                scheme_order: SchemeOrder::from_int(parse_int(get("scheme_order").unwrap_or(""), "scheme_order", origin)? as u32)?,
                operator: OperatorKind::parse(get("operator").unwrap_or("model"))?,
            }),
        };
        let trusted = parse_int(get("trusted_count").unwrap_or(""), "trusted_count", origin)?;
        if let Some(c) = get("count") {
            let c = parse_int(c, "count", origin)?;
            if c != values.len() {
                return Err(Error::parse(origin, format!("header says {c} eigenvalues, found {}", values.len())));
            }
        }
        let power = get("power").map_or(Some(1.0), parse_f64).ok_or_else(|| Error::parse(origin, "bad power"))?;
        let complete = match get("complete") {
            None | Some("false") => false,
            Some("true") => true,
            Some(other) => return Err(Error::parse(origin, format!("bad `complete` flag: {other}"))),
        };
        SpectralData::new(values, config, trusted, power, complete)
    }

    /// Writes `path` and the JSON sidecar next to it (same stem, `.json`).
    pub fn write_files(&self, path: &Path) -> Result<PathBuf> {
        fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))?;
        let side = sidecar_path(path);
        fs::write(&side, self.sidecar_json()).map_err(|e| Error::io(&side, e))?;
        Ok(side)
    }

    /// Reads a CSV written by [`SpectralData::write_files`]; when the
    /// sidecar exists its metadata must agree with the CSV header.
    pub fn read_files(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let spec = Self::from_csv_str(&text, path)?;
        let side = sidecar_path(path);
        if side.exists() {
            let raw = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
            let json: Value = serde_json::from_str(&raw).map_err(|e| Error::parse(&side, e.to_string()))?;
            let expected: Value = serde_json::from_str(&spec.sidecar_json()).expect("sidecar JSON is well formed");
            if json != expected {
                return Err(Error::parse(&side, "sidecar disagrees with the CSV header"));
            }
        }
        Ok(spec)
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn parse_int(s: &str, what: &str, origin: &Path) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::parse(origin, format!("bad {what}: `{s}`")))
}
