use std::fmt;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde_json::Value;

use crate::numfmt::{parse_f64, FlatJson};
use crate::spectrum::{counting_function, SpectralData};
use crate::{Error, Result};

/// Fewest sample points accepted per fitted coefficient.
pub const MIN_POINTS_PER_COEFF: usize = 4;

/// Singular-value ratio below which the scaled design matrix is treated as
/// rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-13;

/// Basis function `λ^{a − k} (log λ)^j` of a log-polyhomogeneous counting
/// expansion with leading exponent `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisTag {
    pub k: u32,
    pub j: u32,
}

impl BasisTag {
    pub const fn new(k: u32, j: u32) -> Self {
        Self { k, j }
    }

    /// JSON key `w_j_k`.
    pub fn key(self) -> String {
        format!("w_{}_{}", self.j, self.k)
    }

    fn eval(self, exponent: f64, lambda: f64) -> f64 {
        lambda.powf(exponent - self.k as f64) * lambda.ln().powi(self.j as i32)
    }
}

impl fmt::Display for BasisTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.key())
    }
}

/// Tags for `n_levels` levels: `(0,1), (0,0)` then `(1,1), (1,0)`.
pub fn level_tags(n_levels: u32) -> Result<Vec<BasisTag>> {
    if !(1..=2).contains(&n_levels) {
        return Err(Error::invalid(format!("levels must be 1 or 2, got {n_levels}")));
    }
    Ok((0..n_levels)
        .flat_map(|k| [BasisTag::new(k, 1), BasisTag::new(k, 0)])
        .collect())
}

/// Least-squares fit of a counting function in a log-polyhomogeneous
/// basis.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylFit {
    /// Leading exponent `a = d/m`.
    pub exponent: f64,
    /// In the order the basis was requested.
    pub coefficients: Vec<(BasisTag, f64)>,
    pub fit_window: (f64, f64),
    pub residual_sup: f64,
    pub n_points: usize,
    /// `σ_max / σ_min` of the scaled, weighted design matrix.
    pub condition: f64,
}

impl WeylFit {
    pub fn coefficient(&self, k: u32, j: u32) -> Option<f64> {
        self.coefficients
            .iter()
            .find(|(t, _)| *t == BasisTag::new(k, j))
            .map(|(_, c)| *c)
    }

    pub fn tags(&self) -> Vec<BasisTag> {
        self.coefficients.iter().map(|(t, _)| *t).collect()
    }

    /// The fitted expansion at `λ`.
    pub fn evaluate(&self, lambda: f64) -> f64 {
        self.coefficients
            .iter()
            .map(|(t, c)| c * t.eval(self.exponent, lambda))
            .sum()
    }

    pub fn to_json(&self) -> String {
        let mut j = FlatJson::new();
        j.num("exponent", self.exponent);
        for (t, c) in &self.coefficients {
            j.num(&t.key(), *c);
        }
        j.num("window_min", self.fit_window.0)
            .num("window_max", self.fit_window.1)
            .num("residual_sup", self.residual_sup)
            .int("n_points", self.n_points as i64)
            .num("condition", self.condition);
        j.render()
    }

    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::parse(origin, e.to_string()))?;
        let obj = v
            .as_object()
            .ok_or_else(|| Error::parse(origin, "expected a JSON object"))?;
        let num = |k: &str| -> Result<f64> {
            obj.get(k)
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::parse(origin, format!("missing number `{k}`")))
        };
        let mut coefficients = Vec::new();
        for (key, val) in obj {
            let Some(rest) = key.strip_prefix("w_") else { continue };
            let (j, k) = rest
                .split_once('_')
                .and_then(|(j, k)| Some((j.parse().ok()?, k.parse().ok()?)))
                .ok_or_else(|| Error::parse(origin, format!("bad coefficient key `{key}`")))?;
            let c = val
                .as_f64()
                .ok_or_else(|| Error::parse(origin, format!("`{key}` is not a number")))?;
            coefficients.push((BasisTag::new(k, j), c));
        }
        Ok(Self {
            exponent: num("exponent")?,
            coefficients,
            fit_window: (num("window_min")?, num("window_max")?),
            residual_sup: num("residual_sup")?,
            n_points: num("n_points")? as usize,
            condition: obj.get("condition").and_then(Value::as_f64).unwrap_or(f64::NAN),
        })
    }
}

/// Fits `N(λ) ≈ Σ w_{jk} λ^{a−k} (log λ)^j` over `tags`.
///
/// Rows are weighted by `λ^{−a}` so every point carries comparable relative
/// weight, columns are scaled to unit sup norm, and the system is solved by
/// SVD. `residual_sup` is the unweighted `max |N_i − fit(λ_i)|`.
pub fn fit_basis(points: &[(f64, f64)], exponent: f64, tags: &[BasisTag]) -> Result<WeylFit> {
    if tags.is_empty() {
        return Err(Error::invalid("empty basis"));
    }
    if !(exponent > 0.0) || !exponent.is_finite() {
        return Err(Error::invalid(format!("exponent must be positive, got {exponent}")));
    }
    if points.len() < MIN_POINTS_PER_COEFF * tags.len() {
        return Err(Error::invalid(format!(
            "{} points for {} coefficients; need at least {}",
            points.len(),
            tags.len(),
            MIN_POINTS_PER_COEFF * tags.len()
        )));
    }
    if points.iter().any(|(l, n)| !l.is_finite() || !n.is_finite()) {
        return Err(Error::invalid("fit points must be finite"));
    }
    let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    if !(lo > 1.0) {
        return Err(Error::invalid(format!("fit window must start above λ = 1, got {lo}")));
    }

    let (m, p) = (points.len(), tags.len());
    let mut a = DMatrix::from_fn(m, p, |i, c| {
        let l = points[i].0;
        tags[c].eval(exponent, l) * l.powf(-exponent)
    });
    let b = DVector::from_fn(m, |i, _| points[i].1 * points[i].0.powf(-exponent));
    let scale: Vec<f64> = (0..p).map(|c| a.column(c).amax()).collect();
    if scale.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::RankDeficient("a basis column vanishes on the window".into()));
    }
    for (c, s) in scale.iter().enumerate() {
        a.column_mut(c).scale_mut(1.0 / s);
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > RANK_TOLERANCE * smax) {
        return Err(Error::RankDeficient(format!(
            "singular value ratio {:e} over [{lo}, {hi}]",
            smin / smax
        )));
    }
    let y = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::no_convergence(format!("SVD solve failed: {e}")))?;
    let coefficients: Vec<(BasisTag, f64)> = tags
        .iter()
        .enumerate()
        .map(|(c, t)| (*t, y[c] / scale[c]))
        .collect();
    let mut fit = WeylFit {
        exponent,
        coefficients,
        fit_window: (lo, hi),
        residual_sup: 0.0,
        n_points: m,
        condition: smax / smin,
    };
    fit.residual_sup = points
        .iter()
        .map(|(l, n)| (n - fit.evaluate(*l)).abs())
        .fold(0.0, f64::max);
    Ok(fit)
}

/// [`fit_basis`] on the standard tags of `n_levels` levels.
pub fn fit_log_weyl(points: &[(f64, f64)], exponent: f64, n_levels: u32) -> Result<WeylFit> {
    fit_basis(points, exponent, &level_tags(n_levels)?)
}

/// `(λ, N(λ))` at midpoints between consecutive distinct trusted
/// eigenvalues, skipping the first `skip_fraction` of the trusted range.
/// Points with `λ ≤ 1` are dropped.
pub fn counting_points(spec: &SpectralData, skip_fraction: f64) -> Result<Vec<(f64, f64)>> {
    if !(0.0..1.0).contains(&skip_fraction) {
        return Err(Error::invalid(format!("skip fraction must lie in [0, 1), got {skip_fraction}")));
    }
    let t = spec.trusted();
    let start = (skip_fraction * t.len() as f64).floor() as usize;
    let mut pts = Vec::new();
    for i in start..t.len().saturating_sub(1) {
        if t[i + 1] > t[i] {
            let l = 0.5 * (t[i] + t[i + 1]);
            if l > 1.0 {
                pts.push((l, counting_function(spec, l)? as f64));
            }
        }
    }
    Ok(pts)
}

/// Default window: the upper two thirds of the trusted spectrum.
pub const DEFAULT_SKIP_FRACTION: f64 = 1.0 / 3.0;

/// Two-column `λ,N` CSV; blank lines and `#` lines are ignored.
pub fn read_points_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_points_csv(&text, path)
}

pub fn parse_points_csv(text: &str, origin: &Path) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split(',');
        let (Some(a), Some(b), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(Error::parse(origin, format!("line {}: expected two columns", i + 1)));
        };
        let (Some(l), Some(n)) = (parse_f64(a), parse_f64(b)) else {
            return Err(Error::parse(origin, format!("line {}: not numeric: {line}", i + 1)));
        };
        out.push((l, n));
    }
    Ok(out)
}
