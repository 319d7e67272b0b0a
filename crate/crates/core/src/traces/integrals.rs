use std::f64::consts::PI;

use super::{TraceMethod, TraceValue};
use crate::quadrature::{GaussLegendre, SphereRule};
use crate::symbols::PrincipalSymbolTriple;
use crate::{Error, Result};

/// Quadrature settings for the trace functionals.
#[derive(Debug, Clone)]
pub struct TraceQuadrature {
    /// Convergence target between successive angular refinements, relative
    /// to `max(1, |value|)`.
    pub tol: f64,
    /// Highest [`SphereRule`] level tried before giving up.
    pub max_level: usize,
    /// Gauss–Legendre nodes per radial panel.
    pub radial_nodes: usize,
    /// Panel width in `log r` on `[1, τ]`.
    pub radial_panel: f64,
    /// Truncation radii for the log-subtracted integrals.
    pub taus: Vec<f64>,
    /// Acceptance threshold on the Richardson error estimate, relative to
    /// `max(1, |value|)`.
    pub extrapolation_tol: f64,
}

impl Default for TraceQuadrature {
    fn default() -> Self {
        Self {
            tol: 1e-11,
            max_level: 8,
            radial_nodes: 24,
            radial_panel: 0.5,
            taus: (4..=10).map(|k| 2f64.powi(k)).collect(),
            extrapolation_tol: 1e-8,
        }
    }
}

/// `γ₂`, `γ₁` obtained by quadrature, with the pieces they are assembled from.
#[derive(Debug, Clone, Copy)]
pub struct WeylCoefficients {
    pub gamma2: TraceValue,
    pub gamma1: TraceValue,
    pub tr: TraceValue,
    pub wtr_theta: TraceValue,
    pub wtr_psi: TraceValue,
    pub wtr_e: TraceValue,
}

fn check_dimension(sym: &PrincipalSymbolTriple, d: usize) -> Result<()> {
    if sym.dimension() != d {
        return Err(Error::invalid(format!(
            "symbol lives on R^{} but d = {d} was requested",
            sym.dimension()
        )));
    }
    Ok(())
}

fn scaled_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(1.0)
}

/// Neville extrapolation to `h = 0` of samples `(h_i, y_i)`. Returns the
/// limit and the gap between the last two diagonal entries of the table.
fn richardson_to_zero(h: &[f64], y: &[f64]) -> (f64, f64) {
    let n = y.len();
    if n < 2 {
        return (y.first().copied().unwrap_or(f64::NAN), f64::INFINITY);
    }
    let mut table = y.to_vec();
    let mut diagonal = vec![y[0]];
    for level in 1..n {
        for i in (level..n).rev() {
            let (hi, ho) = (h[i], h[i - level]);
            table[i] = (ho * table[i] - hi * table[i - 1]) / (ho - hi);
        }
        diagonal.push(table[level]);
    }
    let best = diagonal[n - 1];
    (best, (best - diagonal[n - 2]).abs())
}

impl TraceQuadrature {
    /// Corner integral `(2π)^{-d} ∬ f(p_ψe(ω, θ)) dω dθ`, refined until two
    /// successive sphere levels agree.
    fn corner_integral(
        &self,
        sym: &PrincipalSymbolTriple,
        label: &str,
        f: impl Fn(f64) -> f64,
    ) -> Result<TraceValue> {
        let d = sym.dimension();
        let norm = (2.0 * PI).powi(-(d as i32));
        let eval = |level: usize| -> Result<f64> {
            let rule = SphereRule::new(d, level)?;
            let mut total = 0.0;
            for (w, &ww) in rule.points.iter().zip(&rule.weights) {
                let mut inner = 0.0;
                for (t, &wt) in rule.points.iter().zip(&rule.weights) {
                    inner += wt * f(sym.p_psie(w, t));
                }
                total += ww * inner;
            }
            Ok(norm * total)
        };
        let mut prev = eval(1)?;
        for level in 2..=self.max_level.max(2) {
            let cur = eval(level)?;
            let gap = (cur - prev).abs();
            if gap <= self.tol * cur.abs().max(1.0) {
                return Ok(TraceValue {
                    value: cur,
                    estimated_error: gap,
                    method: TraceMethod::Quadrature,
                    truncation: None,
                });
            }
            prev = cur;
        }
        Err(Error::no_convergence(format!(
            "{label}: corner quadrature did not settle by level {}",
            self.max_level
        )))
    }

    /// `(2π)^{-d} ∬_{S^{d-1}×S^{d-1}} p_ψe(ω, θ)^{-s} dω dθ`.
    pub fn tr_corner(&self, sym: &PrincipalSymbolTriple, s: f64) -> Result<TraceValue> {
        if !s.is_finite() {
            return Err(Error::invalid(format!("exponent s must be finite, got {s}")));
        }
        self.corner_integral(sym, "TR", |p| p.powf(-s))
    }

    /// `(2π)^{-d} ∬ p_ψe^{-d} log(p_ψe^{-d}) dω dθ`.
    pub fn wtr_theta(&self, sym: &PrincipalSymbolTriple, d: usize) -> Result<TraceValue> {
        check_dimension(sym, d)?;
        let dd = d as f64;
        self.corner_integral(sym, "wTR_theta", |p| {
            let q = p.powf(-dd);
            q * q.ln()
        })
    }

    /// Log-subtracted base-infinity integral
    ///
    /// `(2π)^{-d} lim_τ [ ∫_{S^{d-1}} ∫_{|ξ|≤τ} p_e(θ, ξ)^{-d} dξ dθ − log τ ∬ p_ψe^{-d} ]`,
    ///
    /// sampled at each `τ` of `taus` and extrapolated to `τ = ∞` in `τ^{-2}`.
    pub fn wtr_e(&self, sym: &PrincipalSymbolTriple, d: usize, taus: &[f64]) -> Result<TraceValue> {
        check_dimension(sym, d)?;
        if taus.len() < 2 {
            return Err(Error::invalid("wTR_e needs at least two truncation radii"));
        }
        if taus[0] <= 1.0 || taus.windows(2).any(|w| !(w[1] > w[0])) || taus.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid(
                "truncation radii must be finite, strictly increasing and > 1",
            ));
        }
        let corner = self.tr_corner(sym, d as f64)?;
        let norm = (2.0 * PI).powi(-(d as i32));
        let h: Vec<f64> = taus.iter().map(|t| t.powi(-2)).collect();

        let mut prev: Option<(f64, f64)> = None;
        for level in 1..=self.max_level {
            let balls = self.truncated_ball_integrals(sym, d, level, taus)?;
            let samples: Vec<f64> = balls
                .iter()
                .zip(taus)
                .map(|(b, t)| norm * b - t.ln() * corner.value)
                .collect();
            let (limit, extrap_err) = richardson_to_zero(&h, &samples);
            if !limit.is_finite() || extrap_err > self.extrapolation_tol * limit.abs().max(1.0) {
                return Err(Error::no_convergence(format!(
                    "wTR_e: τ → ∞ extrapolation unstable (estimate {limit:e}, spread {extrap_err:e}); \
                     the log subtraction does not regularise this symbol"
                )));
            }
            if let Some((p, _)) = prev {
                if scaled_gap(limit, p) <= self.tol.max(extrap_err) {
                    let ang = (limit - p).abs();
                    return Ok(TraceValue {
                        value: limit,
                        estimated_error: extrap_err + ang + corner.estimated_error * taus.last().unwrap().ln(),
                        method: TraceMethod::Quadrature,
                        truncation: taus.last().copied(),
                    });
                }
            }
            prev = Some((limit, extrap_err));
        }
        Err(Error::no_convergence(format!(
            "wTR_e: angular quadrature did not settle by level {}",
            self.max_level
        )))
    }

    /// The `x`-side mirror of [`TraceQuadrature::wtr_e`], evaluated on the
    /// role-swapped triple.
    pub fn wtr_psi(&self, sym: &PrincipalSymbolTriple, d: usize, taus: &[f64]) -> Result<TraceValue> {
        self.wtr_e(&sym.swapped(), d, taus)
    }

    /// `∫_{S^{d-1}} ∫_{|ξ| ≤ τ} p_e(θ, ξ)^{-d} dξ dθ` for every `τ`, in polar
    /// coordinates `ξ = r η`. The radial integral is split at `r = 1`;
    /// `[1, τ]` is integrated in `u = log r`, where the integrand tends to a
    /// constant for symbols of order one in `ξ`.
    fn truncated_ball_integrals(
        &self,
        sym: &PrincipalSymbolTriple,
        d: usize,
        level: usize,
        taus: &[f64],
    ) -> Result<Vec<f64>> {
        let rule = SphereRule::new(d, level)?;
        let gl = GaussLegendre::new(self.radial_nodes);
        let dd = d as f64;

        // radial nodes/weights per segment [0,1], [1,τ_0], [τ_0,τ_1], ...
        let mut segments: Vec<Vec<(f64, f64)>> = Vec::with_capacity(taus.len() + 1);
        let unit_seg: Vec<(f64, f64)> = gl
            .nodes
            .iter()
            .zip(&gl.weights)
            .map(|(&x, &w)| {
                let r = 0.5 * (x + 1.0);
                (r, 0.5 * w * r.powi(d as i32 - 1))
            })
            .collect();
        segments.push(unit_seg);
        let mut u_lo = 0.0;
        for &tau in taus {
            let u_hi = tau.ln();
            let panels = ((u_hi - u_lo) / self.radial_panel).ceil().max(1.0) as usize;
            let width = (u_hi - u_lo) / panels as f64;
            let mut seg = Vec::with_capacity(panels * gl.nodes.len());
            for p in 0..panels {
                let a = u_lo + width * p as f64;
                for (&x, &w) in gl.nodes.iter().zip(&gl.weights) {
                    let u = a + 0.5 * width * (x + 1.0);
                    let r = u.exp();
                    // dr = r du, Jacobian r^{d-1}
                    seg.push((r, 0.5 * width * w * r.powf(dd)));
                }
            }
            segments.push(seg);
            u_lo = u_hi;
        }

        let mut seg_totals = vec![0.0; segments.len()];
        let mut xi = vec![0.0; d];
        for (theta, &wt) in rule.points.iter().zip(&rule.weights) {
            for (eta, &we) in rule.points.iter().zip(&rule.weights) {
                for (total, seg) in seg_totals.iter_mut().zip(&segments) {
                    let mut acc = 0.0;
                    for &(r, w) in seg {
                        for (x, e) in xi.iter_mut().zip(eta) {
                            *x = r * e;
                        }
                        acc += w * sym.p_e(theta, &xi).powf(-dd);
                    }
                    *total += wt * we * acc;
                }
            }
        }
        let mut out = Vec::with_capacity(taus.len());
        let mut running = seg_totals[0];
        for t in &seg_totals[1..] {
            running += t;
            out.push(running);
        }
        Ok(out)
    }

    /// `(γ₂, γ₁)` of the logarithmic Weyl law for an operator of order
    /// `(m, m)` with principal symbol `sym`.
    ///
    /// The computation runs on `sym^{1/m}` (order `(1, 1)`):
    /// `γ₂ = TR/(m d)` and `γ₁ = wTR_θ − wTR_ψ − wTR_e − TR/d²`.
    pub fn gamma_coeffs(&self, sym: &PrincipalSymbolTriple, d: usize, m: f64) -> Result<WeylCoefficients> {
        check_dimension(sym, d)?;
        let orders = sym.orders();
        if !(m > 0.0) || (orders.psi - m).abs() > 1e-12 * m || (orders.e - m).abs() > 1e-12 * m {
            return Err(Error::invalid(format!(
                "γ coefficients need m_ψ = m_e = m; got orders ({}, {}) and m = {m}",
                orders.psi, orders.e
            )));
        }
        let root = sym.powered(1.0 / m)?;
        let dd = d as f64;
        let tr = self.tr_corner(&root, dd)?;
        let w_theta = self.wtr_theta(&root, d)?;
        let w_psi = self.wtr_psi(&root, d, &self.taus)?;
        let w_e = self.wtr_e(&root, d, &self.taus)?;

        let gamma2 = TraceValue {
            value: tr.value / (m * dd),
            estimated_error: tr.estimated_error / (m * dd),
            method: TraceMethod::Quadrature,
            truncation: None,
        };
        let gamma1 = TraceValue {
            value: w_theta.value - w_psi.value - w_e.value - tr.value / (dd * dd),
            estimated_error: w_theta.estimated_error
                + w_psi.estimated_error
                + w_e.estimated_error
                + tr.estimated_error / (dd * dd),
            method: TraceMethod::Quadrature,
            truncation: w_e.truncation,
        };
        Ok(WeylCoefficients {
            gamma2,
            gamma1,
            tr,
            wtr_theta: w_theta,
            wtr_psi: w_psi,
            wtr_e: w_e,
        })
    }
}

/// [`TraceQuadrature::tr_corner`] with default settings.
pub fn tr_corner(sym: &PrincipalSymbolTriple, s: f64) -> Result<TraceValue> {
    TraceQuadrature::default().tr_corner(sym, s)
}

/// [`TraceQuadrature::wtr_e`] with default settings.
pub fn wtr_e(sym: &PrincipalSymbolTriple, d: usize, taus: &[f64]) -> Result<TraceValue> {
    TraceQuadrature::default().wtr_e(sym, d, taus)
}

/// [`TraceQuadrature::wtr_psi`] with default settings.
pub fn wtr_psi(sym: &PrincipalSymbolTriple, d: usize, taus: &[f64]) -> Result<TraceValue> {
    TraceQuadrature::default().wtr_psi(sym, d, taus)
}

/// [`TraceQuadrature::wtr_theta`] with default settings.
pub fn wtr_theta(sym: &PrincipalSymbolTriple, d: usize) -> Result<TraceValue> {
    TraceQuadrature::default().wtr_theta(sym, d)
}

/// [`TraceQuadrature::gamma_coeffs`] with default settings, returning `(γ₂, γ₁)`.
pub fn gamma_coeffs_general(sym: &PrincipalSymbolTriple, d: usize, m: f64) -> Result<(TraceValue, TraceValue)> {
    let c = TraceQuadrature::default().gamma_coeffs(sym, d, m)?;
    Ok((c.gamma2, c.gamma1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{model_symbol, Orders};
    use crate::traces::{digamma, gamma1_closed, gamma2_closed, EULER_GAMMA};

    fn unit_orders() -> Orders {
        Orders { psi: 1.0, e: 1.0 }
    }

    #[test]
    fn neville_recovers_polynomial_in_h() {
        let h: Vec<f64> = (1..=5).map(|k| 1.0 / k as f64).collect();
        let y: Vec<f64> = h.iter().map(|x| 3.0 + 2.0 * x - x * x).collect();
        let (lim, err) = richardson_to_zero(&h, &y);
        assert!((lim - 3.0).abs() < 1e-12, "{lim}");
        assert!(err < 1e-12);
    }

    #[test]
    fn tr_corner_examples() {
        let m2 = model_symbol(2).unwrap();
        assert!((tr_corner(&m2, 2.0).unwrap().value - 1.0).abs() < 1e-13);
        let m1 = model_symbol(1).unwrap();
        assert!((tr_corner(&m1, 1.0).unwrap().value - 2.0 / PI).abs() < 1e-15);
        let two = PrincipalSymbolTriple::constant(2, 1.0, 1.0, 2.0, unit_orders()).unwrap();
        assert!((tr_corner(&two, 2.0).unwrap().value - 0.25).abs() < 1e-13);
    }

    #[test]
    fn tr_corner_scaling() {
        // non-constant corner symbol on S^1 × S^1 and S^2 × S^2
        for d in [2usize, 3] {
            let base = PrincipalSymbolTriple::new(
                d,
                |_, _| 1.0,
                |_, _| 1.0,
                |w, t| 1.5 + 0.5 * w.iter().zip(t).map(|(a, b)| a * b).sum::<f64>(),
                unit_orders(),
            )
            .unwrap();
            let c = 1.7;
            let scaled = PrincipalSymbolTriple::new(
                d,
                |_, _| 1.0,
                |_, _| 1.0,
                move |w, t| c * (1.5 + 0.5 * w.iter().zip(t).map(|(a, b)| a * b).sum::<f64>()),
                unit_orders(),
            )
            .unwrap();
            for s in [1.0, 2.0, 3.5] {
                let a = tr_corner(&base, s).unwrap();
                let b = tr_corner(&scaled, s).unwrap();
                let expect = c.powf(-s) * a.value;
                assert!(
                    (b.value - expect).abs() <= 1e-12 * expect.abs().max(1.0),
                    "d = {d}, s = {s}"
                );
            }
        }
    }

    #[test]
    fn tr_corner_nonconstant_against_exact() {
        // d = 2, p_ψe = 2 + cos(α − β): ∬ p^{-1} = 2π · 2π/√3
        let sym = PrincipalSymbolTriple::new(
            2,
            |_, _| 1.0,
            |_, _| 1.0,
            |w, t| 2.0 + w[0] * t[0] + w[1] * t[1],
            unit_orders(),
        )
        .unwrap();
        let got = tr_corner(&sym, 1.0).unwrap();
        let exact = (2.0 * PI) * (2.0 * PI / 3f64.sqrt()) / (2.0 * PI).powi(2);
        assert!((got.value - exact).abs() < 1e-12, "{} vs {exact}", got.value);
        assert!(got.estimated_error >= 0.0);
    }

    #[test]
    fn wtr_e_model_values() {
        let taus = TraceQuadrature::default().taus;
        let v1 = wtr_e(&model_symbol(1).unwrap(), 1, &taus).unwrap();
        let expect1 = (2.0 / PI) * 2f64.ln();
        assert!((v1.value - expect1).abs() < 1e-9, "{} vs {expect1}", v1.value);
        assert!((v1.value - 0.441_271_2).abs() < 1e-7);
        assert_eq!(v1.truncation, Some(1024.0));

        let v2 = wtr_e(&model_symbol(2).unwrap(), 2, &taus).unwrap();
        assert!(v2.value.abs() < 1e-9, "{}", v2.value);

        let v3 = wtr_e(&model_symbol(3).unwrap(), 3, &taus).unwrap();
        let pref = crate::traces::model_prefactor(3).unwrap();
        let expect3 = -0.5 * pref * (digamma(1.5).unwrap() + EULER_GAMMA);
        assert!((v3.value - expect3).abs() < 1e-9, "{} vs {expect3}", v3.value);
    }

    #[test]
    fn wtr_e_flags_divergence() {
        let flat = PrincipalSymbolTriple::constant(1, 1.0, 1.0, 1.0, unit_orders()).unwrap();
        let taus = TraceQuadrature::default().taus;
        assert!(matches!(wtr_e(&flat, 1, &taus), Err(Error::NonConvergence(_))));
    }

    #[test]
    fn wtr_e_validates_taus() {
        let m = model_symbol(1).unwrap();
        assert!(wtr_e(&m, 1, &[16.0]).is_err());
        assert!(wtr_e(&m, 1, &[16.0, 8.0]).is_err());
        assert!(wtr_e(&m, 1, &[0.5, 8.0]).is_err());
        assert!(wtr_e(&m, 2, &[8.0, 16.0]).is_err());
    }

    #[test]
    fn wtr_theta_examples() {
        for d in 1..=3 {
            assert!(wtr_theta(&model_symbol(d).unwrap(), d).unwrap().value.abs() < 1e-15);
        }
        let e = PrincipalSymbolTriple::constant(1, 1.0, 1.0, std::f64::consts::E, unit_orders()).unwrap();
        let v = wtr_theta(&e, 1).unwrap().value;
        let expect = -(4.0 / (2.0 * PI) * (-1.0f64).exp());
        assert!((v - expect).abs() < 1e-15);
        assert!((v + 0.234_199_33).abs() < 1e-6);
    }

    #[test]
    fn mirror_symmetry_for_model() {
        let q = TraceQuadrature::default();
        for d in 1..=3 {
            let m = model_symbol(d).unwrap();
            let a = q.wtr_e(&m, d, &q.taus).unwrap();
            let b = q.wtr_psi(&m, d, &q.taus).unwrap();
            assert!((a.value - b.value).abs() <= a.estimated_error + b.estimated_error + 1e-14);
        }
    }

    #[test]
    fn quadrature_matches_closed_forms() {
        for d in 1..=3 {
            let (g2, g1) = gamma_coeffs_general(&model_symbol(d).unwrap(), d, 1.0).unwrap();
            let (c2, c1) = (gamma2_closed(d).unwrap(), gamma1_closed(d).unwrap());
            assert!((g2.value - c2).abs() <= 1e-10, "d = {d}: γ₂ {} vs {c2}", g2.value);
            assert!((g1.value - c1).abs() <= 1e-8, "d = {d}: γ₁ {} vs {c1}", g1.value);
            assert!((g1.value - c1).abs() <= g1.estimated_error.max(1e-12) * 10.0);
        }
    }

    #[test]
    fn order_two_symbol_halves_gamma2() {
        // Q = <x>²<D>² has order (2, 2); γ₂(Q) = γ₂(P)/2 and γ₁(Q) = γ₁(P).
        let q = model_symbol(2).unwrap().powered(2.0).unwrap();
        let (g2, g1) = gamma_coeffs_general(&q, 2, 2.0).unwrap();
        assert!((g2.value - 0.25).abs() < 1e-12);
        assert!((g1.value + 0.25).abs() < 1e-8);
        assert!(gamma_coeffs_general(&q, 2, 1.0).is_err());
    }
}
