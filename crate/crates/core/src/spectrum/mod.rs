//! Finite-difference spectra of the model operator and validation hooks.
//!
//! The model operator `Q = ⟨x⟩²(1 − Δ)` is discretised through its
//! symmetric conjugate `A = ⟨x⟩(1 − Δ_h)⟨x⟩` on a Dirichlet grid over
//! `[−L, L]^d`. Eigenvalues are those of `Q`; the first-order operator
//! `P = ⟨x⟩⟨D⟩` has eigenvalues `√μ` (see [`SpectralData::powered`]).

mod band;
mod eigen;
mod io;

use std::fmt;

pub use band::{BandCholesky, SymBandMatrix};
pub use eigen::{bisection_lowest, lanczos_lowest, LanczosOptions};

use crate::symbols::japanese_bracket;
use crate::{Error, Result};

/// Relative eigenvalue change under `n → 2n` below which an eigenvalue is
/// trusted.
pub const TRUST_TOLERANCE: f64 = 1e-3;

/// Smallest admissible number of grid points per axis.
pub const MIN_GRID_POINTS: usize = 8;

/// Truncation of the Gaussian smoothing kernel, in standard deviations.
const SMOOTHING_CUTOFF: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeOrder {
    Second,
    Fourth,
}

impl SchemeOrder {
    pub fn from_int(order: u32) -> Result<Self> {
        match order {
            2 => Ok(SchemeOrder::Second),
            4 => Ok(SchemeOrder::Fourth),
            _ => Err(Error::invalid(format!("scheme order must be 2 or 4, got {order}"))),
        }
    }

    pub fn as_int(self) -> u32 {
        match self {
            SchemeOrder::Second => 2,
            SchemeOrder::Fourth => 4,
        }
    }

    /// Off-diagonal reach of the 1-d stencil.
    fn reach(self) -> usize {
        match self {
            SchemeOrder::Second => 1,
            SchemeOrder::Fourth => 2,
        }
    }
}

/// Which operator is assembled. Everything except [`OperatorKind::Model`]
/// is a validation hook with a known spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    /// `⟨x⟩(1 − Δ_h)⟨x⟩`.
    Model,
    /// Weight replaced by 1: `1 − Δ_h`.
    UnitWeight,
    /// `−Δ_h + |x|²`.
    Harmonic,
}

impl OperatorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OperatorKind::Model => "model",
            OperatorKind::UnitWeight => "unit-weight",
            OperatorKind::Harmonic => "harmonic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "model" => Ok(OperatorKind::Model),
            "unit-weight" => Ok(OperatorKind::UnitWeight),
            "harmonic" => Ok(OperatorKind::Harmonic),
            _ => Err(Error::invalid(format!(
                "unknown operator `{s}` (expected model, unit-weight or harmonic)"
            ))),
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Grid over `[−L, L]^d` with `n` interior points per axis and homogeneous
/// Dirichlet data; `x_i = −L + (i + 1) h`, `h = 2L/(n + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretizationConfig {
    pub dimension: usize,
    pub half_width: f64,
    pub grid_points: usize,
    pub scheme_order: SchemeOrder,
    pub operator: OperatorKind,
}

impl DiscretizationConfig {
    pub fn new(dimension: usize, half_width: f64, grid_points: usize, scheme_order: SchemeOrder) -> Result<Self> {
        let cfg = Self {
            dimension,
            half_width,
            grid_points,
            scheme_order,
            operator: OperatorKind::Model,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_operator(mut self, operator: OperatorKind) -> Self {
        self.operator = operator;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.dimension) {
            return Err(Error::invalid(format!(
                "dimension must be 1 or 2 for grid spectra, got {}",
                self.dimension
            )));
        }
        if !(self.half_width > 0.0) || !self.half_width.is_finite() {
            return Err(Error::invalid(format!(
                "half-width must be positive and finite, got {}",
                self.half_width
            )));
        }
        if self.grid_points < MIN_GRID_POINTS {
            return Err(Error::invalid(format!(
                "need at least {MIN_GRID_POINTS} grid points per axis, got {}",
                self.grid_points
            )));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.grid_points + 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.grid_points)
            .map(|i| -self.half_width + (i + 1) as f64 * h)
            .collect()
    }

    pub fn matrix_dim(&self) -> usize {
        self.grid_points.pow(self.dimension as u32)
    }

    /// Same box, twice the points per axis.
    pub fn refined(&self) -> Self {
        Self {
            grid_points: 2 * self.grid_points,
            ..*self
        }
    }

    /// Whether eigenfunctions at eigenvalue `mu` (of the assembled matrix)
    /// have decayed before the artificial boundary.
    ///
    /// * model: `⟨L⟩ ≥ 2√μ`, i.e. twice the corresponding eigenvalue of
    ///   `⟨x⟩⟨D⟩`;
    /// * harmonic: `L ≥ √μ + 2`, two units past the turning point;
    /// * unit weight: the box is the problem itself, always confined.
    pub fn is_confined(&self, mu: f64) -> bool {
        let l = self.half_width;
        match self.operator {
            OperatorKind::Model => japanese_bracket(&[l]) >= 2.0 * mu.max(0.0).sqrt(),
            OperatorKind::Harmonic => l >= mu.max(0.0).sqrt() + 2.0,
            OperatorKind::UnitWeight => true,
        }
    }

    /// Largest confined eigenvalue of the assembled matrix.
    pub fn confinement_limit(&self) -> f64 {
        let l = self.half_width;
        match self.operator {
            OperatorKind::Model => (1.0 + l * l) / 4.0,
            OperatorKind::Harmonic => {
                if l > 2.0 {
                    (l - 2.0) * (l - 2.0)
                } else {
                    0.0
                }
            }
            OperatorKind::UnitWeight => f64::INFINITY,
        }
    }
}

/// `(−Δ_h)` as a symmetric band on one axis: diagonal coefficients per
/// node plus off-diagonals `c_k` at distance `k`.
fn negative_laplacian_1d(n: usize, h: f64, order: SchemeOrder) -> (Vec<f64>, Vec<f64>) {
    let h2 = h * h;
    match order {
        SchemeOrder::Second => (vec![2.0 / h2; n], vec![-1.0 / h2]),
        SchemeOrder::Fourth => {
            // (u_{i−2} − 16u_{i−1} + 30u_i − 16u_{i+1} + u_{i+2}) / 12h²,
            // odd reflection u_{−1} = −u_1 across each Dirichlet end
            let mut diag = vec![30.0 / (12.0 * h2); n];
            diag[0] -= 1.0 / (12.0 * h2);
            diag[n - 1] -= 1.0 / (12.0 * h2);
            (diag, vec![-16.0 / (12.0 * h2), 1.0 / (12.0 * h2)])
        }
    }
}

/// Band matrix `K = c₀ + V − Δ_h` on the tensor grid, with lexicographic
/// index `i₀ + n·i₁`.
fn assemble_kernel(cfg: &DiscretizationConfig, mass: f64, potential: impl Fn(&[f64]) -> f64) -> SymBandMatrix {
    let n = cfg.grid_points;
    let d = cfg.dimension;
    let (diag1, off) = negative_laplacian_1d(n, cfg.spacing(), cfg.scheme_order);
    let reach = cfg.scheme_order.reach();
    let stride = if d == 1 { 1 } else { n };
    let mut a = SymBandMatrix::zeros(cfg.matrix_dim(), reach * stride);
    let nodes = cfg.nodes();
    let mut x = vec![0.0; d];
    for p in 0..cfg.matrix_dim() {
        let idx: Vec<usize> = (0..d).map(|ax| (p / n.pow(ax as u32)) % n).collect();
        for ax in 0..d {
            x[ax] = nodes[idx[ax]];
        }
        let lap: f64 = idx.iter().map(|&i| diag1[i]).sum();
        a.set(p, p, mass + potential(&x) + lap);
        for ax in 0..d {
            let step = n.pow(ax as u32);
            for (k, &c) in off.iter().enumerate() {
                let k = k + 1;
                if idx[ax] >= k {
                    a.set(p, p - k * step, c);
                }
            }
        }
    }
    a
}

/// Diagonal weight `⟨x⟩` at every grid node (all ones for the hooks that
/// drop it).
pub fn grid_weight(cfg: &DiscretizationConfig) -> Vec<f64> {
    let n = cfg.grid_points;
    let nodes = cfg.nodes();
    (0..cfg.matrix_dim())
        .map(|p| {
            let x: Vec<f64> = (0..cfg.dimension)
                .map(|ax| nodes[(p / n.pow(ax as u32)) % n])
                .collect();
            match cfg.operator {
                OperatorKind::Model => japanese_bracket(&x),
                _ => 1.0,
            }
        })
        .collect()
}

/// Unweighted part `K` of the assembled operator: `1 − Δ_h` for the model
/// and the unit-weight hook, `−Δ_h + |x|²` for the harmonic hook.
pub fn assemble_kernel_matrix(cfg: &DiscretizationConfig) -> Result<SymBandMatrix> {
    cfg.validate()?;
    Ok(match cfg.operator {
        OperatorKind::Model | OperatorKind::UnitWeight => assemble_kernel(cfg, 1.0, |_| 0.0),
        OperatorKind::Harmonic => assemble_kernel(cfg, 0.0, |x| x.iter().map(|v| v * v).sum()),
    })
}

/// `A = W K W` with `W = diag(⟨x_p⟩)` for the model operator, `K` alone for
/// the hooks. Symmetric by storage.
pub fn assemble_model_matrix(cfg: &DiscretizationConfig) -> Result<SymBandMatrix> {
    let mut a = assemble_kernel_matrix(cfg)?;
    if cfg.operator == OperatorKind::Model {
        let w = grid_weight(cfg);
        let bw = a.bandwidth();
        for i in 0..a.dim() {
            for k in 0..=bw.min(i) {
                let v = a.get(i, i - k);
                if v != 0.0 {
                    a.set(i, i - k, w[i] * v * w[i - k]);
                }
            }
        }
    }
    Ok(a)
}

/// Sorted eigenvalues with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    eigenvalues: Vec<f64>,
    config: Option<DiscretizationConfig>,
    trusted_count: usize,
    /// The eigenvalues are those of the assembled matrix raised to this
    /// power (1 for `Q`, 1/2 for `P = ⟨x⟩⟨D⟩`).
    power: f64,
    /// The list is the entire spectrum in its range (exact fixtures), so
    /// counting is meaningful for every λ.
    complete: bool,
}

impl SpectralData {
    pub fn new(
        eigenvalues: Vec<f64>,
        config: Option<DiscretizationConfig>,
        trusted_count: usize,
        power: f64,
        complete: bool,
    ) -> Result<Self> {
        if trusted_count > eigenvalues.len() {
            return Err(Error::invalid(format!(
                "trusted count {trusted_count} exceeds {} eigenvalues",
                eigenvalues.len()
            )));
        }
        if eigenvalues.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::invalid("eigenvalues must be positive and finite"));
        }
        if eigenvalues.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("eigenvalues must be sorted ascending"));
        }
        if !(power > 0.0) || !power.is_finite() {
            return Err(Error::invalid(format!("power must be positive, got {power}")));
        }
        if let Some(cfg) = &config {
            cfg.validate()?;
        }
        Ok(Self {
            eigenvalues,
            config,
            trusted_count,
            power,
            complete,
        })
    }

    /// A fully trusted list that is taken to be the whole spectrum, e.g. a
    /// closed-form fixture.
    pub fn from_exact(mut eigenvalues: Vec<f64>) -> Result<Self> {
        eigenvalues.sort_by(f64::total_cmp);
        let n = eigenvalues.len();
        Self::new(eigenvalues, None, n, 1.0, true)
    }

    pub fn empty(config: Option<DiscretizationConfig>) -> Self {
        Self {
            eigenvalues: Vec::new(),
            config,
            trusted_count: 0,
            power: 1.0,
            complete: false,
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn trusted(&self) -> &[f64] {
        &self.eigenvalues[..self.trusted_count]
    }

    pub fn config(&self) -> Option<&DiscretizationConfig> {
        self.config.as_ref()
    }

    pub fn trusted_count(&self) -> usize {
        self.trusted_count
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Eigenvalues raised to `p` (e.g. `p = 1/2` turns `Q`-eigenvalues into
    /// those of `⟨x⟩⟨D⟩`).
    pub fn powered(&self, p: f64) -> Result<Self> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::invalid(format!("power must be positive, got {p}")));
        }
        Ok(Self {
            eigenvalues: self.eigenvalues.iter().map(|v| v.powf(p)).collect(),
            power: self.power * p,
            ..self.clone()
        })
    }

    /// Upper end of the window in which counting is meaningful.
    pub fn window_top(&self) -> f64 {
        if self.complete {
            f64::INFINITY
        } else if self.trusted_count == 0 {
            f64::NEG_INFINITY
        } else {
            self.eigenvalues[self.trusted_count - 1]
        }
    }

    fn check_window(&self, lambda: f64) -> Result<()> {
        if lambda.is_nan() {
            return Err(Error::invalid("λ is NaN"));
        }
        if lambda > self.window_top() && !(self.is_empty() && self.complete) {
            return Err(Error::domain(format!(
                "λ = {lambda} lies above the trusted window (top {})",
                self.window_top()
            )));
        }
        Ok(())
    }
}

/// Lowest `count` eigenvalues of the assembled matrix and their trust
/// level under grid refinement.
///
/// d=1 uses bisection on LDLᵀ inertia counts (banded, linear cost per
/// count); d=2 uses shift-invert Lanczos at σ = 0. The refined grid is
/// solved with a looser tolerance because only relative changes of order
/// [`TRUST_TOLERANCE`] matter there.
pub fn compute_spectrum(cfg: &DiscretizationConfig, count: usize) -> Result<SpectralData> {
    cfg.validate()?;
    if count > cfg.matrix_dim() {
        return Err(Error::invalid(format!(
            "count {count} exceeds the matrix dimension {}",
            cfg.matrix_dim()
        )));
    }
    if count == 0 {
        return Ok(SpectralData::empty(Some(*cfg)));
    }
    let coarse = lowest(cfg, count, 1e-11)?;
    let fine = lowest(&cfg.refined(), count, 1e-7)?;
    let trusted = trusted_prefix(cfg, &coarse, &fine);
    SpectralData::new(coarse, Some(*cfg), trusted, 1.0, false)
}

fn lowest(cfg: &DiscretizationConfig, count: usize, tol: f64) -> Result<Vec<f64>> {
    let a = assemble_model_matrix(cfg)?;
    match cfg.dimension {
        1 => bisection_lowest(&a, count, tol),
        _ => lanczos_lowest(
            &a,
            count,
            LanczosOptions {
                tol: tol.max(1e-12),
                ..LanczosOptions::default()
            },
        ),
    }
}

/// Leading run of eigenvalues that are grid-converged and confined.
pub fn trusted_prefix(cfg: &DiscretizationConfig, coarse: &[f64], fine: &[f64]) -> usize {
    coarse
        .iter()
        .zip(fine)
        .take_while(|(c, f)| ((*c - *f) / *f).abs() <= TRUST_TOLERANCE && cfg.is_confined(**c))
        .count()
}

/// `N(λ) = #{j : λ_j < λ}` over the trusted eigenvalues.
pub fn counting_function(spec: &SpectralData, lambda: f64) -> Result<usize> {
    spec.check_window(lambda)?;
    let t = spec.trusted();
    Ok(t.partition_point(|&v| v < lambda))
}

/// `(N ∗ ρ_T)(λ)` with `ρ` the standard Gaussian truncated at `±8` and
/// renormalised: `Σ_j R(T(λ − λ_j))`, `R` the kernel's distribution function.
pub fn smoothed_counting(spec: &SpectralData, width: f64, lambda: f64) -> Result<f64> {
    if !(width > 0.0) || width.is_nan() {
        return Err(Error::invalid(format!("smoothing width must be positive, got {width}")));
    }
    if spec.is_empty() {
        return Ok(0.0);
    }
    if lambda.is_infinite() && lambda > 0.0 {
        return Ok(spec.trusted_count as f64);
    }
    spec.check_window(lambda)?;
    Ok(spec.trusted().iter().map(|&l| truncated_gaussian_cdf(width * (lambda - l))).sum())
}

fn truncated_gaussian_cdf(u: f64) -> f64 {
    let a = SMOOTHING_CUTOFF;
    if u <= -a {
        return 0.0;
    }
    if u >= a {
        return 1.0;
    }
    let phi = |t: f64| 0.5 * libm::erfc(-t / std::f64::consts::SQRT_2);
    let lo = phi(-a);
    (phi(u) - lo) / (phi(a) - lo)
}
