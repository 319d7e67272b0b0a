//! Fixed-precision number formatting and a minimal flat JSON writer.
//!
//! Every float written by this crate goes through [`fmt_f64`], which prints
//! 17 significant digits. That is enough to round-trip any `f64` exactly and
//! keeps repeated runs byte-identical.

use std::fmt::Write as _;

/// Formats `x` with 17 significant digits in scientific notation.
///
/// Non-finite values become `NaN`, `inf` and `-inf`; [`FlatJson`] maps them
/// to `null` since JSON has no spelling for them.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_owned()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_owned()
    } else {
        format!("{x:.16e}")
    }
}

/// Parses what [`fmt_f64`] writes (plus anything `str::parse::<f64>` accepts).
pub fn parse_f64(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        "NaN" => Some(f64::NAN),
        t => t.parse().ok(),
    }
}

/// Builder for a flat JSON object with keys kept in insertion order.
#[derive(Debug, Default, Clone)]
pub struct FlatJson {
    entries: Vec<(String, String)>,
}

impl FlatJson {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num(&mut self, key: &str, value: f64) -> &mut Self {
        let v = if value.is_finite() {
            fmt_f64(value)
        } else {
            "null".to_owned()
        };
        self.push(key, v)
    }

    pub fn int(&mut self, key: &str, value: i64) -> &mut Self {
        self.push(key, value.to_string())
    }

    pub fn boolean(&mut self, key: &str, value: bool) -> &mut Self {
        self.push(key, value.to_string())
    }

    pub fn str(&mut self, key: &str, value: &str) -> &mut Self {
        let v = serde_json::Value::String(value.to_owned()).to_string();
        self.push(key, v)
    }

    /// Numeric array, formatted like [`FlatJson::num`].
    pub fn nums(&mut self, key: &str, values: &[f64]) -> &mut Self {
        let items: Vec<String> = values
            .iter()
            .map(|&x| {
                if x.is_finite() {
                    fmt_f64(x)
                } else {
                    "null".to_owned()
                }
            })
            .collect();
        self.push(key, format!("[{}]", items.join(", ")))
    }

    fn push(&mut self, key: &str, rendered: String) -> &mut Self {
        self.entries.push((key.to_owned(), rendered));
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::from("{\n");
        for (i, (k, v)) in self.entries.iter().enumerate() {
            let key = serde_json::Value::String(k.clone()).to_string();
            let sep = if i + 1 == self.entries.len() { "" } else { "," };
            let _ = writeln!(out, "  {key}: {v}{sep}");
        }
        out.push_str("}\n");
        out
    }
}
