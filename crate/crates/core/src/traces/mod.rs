//! Trace coefficients of the logarithmic Weyl law.
//!
//! Two routes are provided and checked against each other:
//!
//! * closed forms for the model operator, in terms of `|S^{d-1}|` and the
//!   digamma function ([`gamma2_closed`], [`gamma1_closed`] and the
//!   finite-sum variant [`gamma1_finite_sum`]);
//! * quadrature of the principal symbol triple on the corner and on
//!   log-subtracted truncated balls ([`TraceQuadrature`]).

mod integrals;
mod special;

use std::f64::consts::PI;

pub use integrals::{tr_corner, wtr_e, wtr_psi, wtr_theta, gamma_coeffs_general, TraceQuadrature, WeylCoefficients};
pub use special::{digamma, sphere_volume, EULER_GAMMA};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceMethod {
    ClosedForm,
    Quadrature,
}

impl TraceMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceMethod::ClosedForm => "closed_form",
            TraceMethod::Quadrature => "quadrature",
        }
    }
}

/// A trace-type coefficient together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceValue {
    pub value: f64,
    /// Non-negative error estimate (zero for closed forms).
    pub estimated_error: f64,
    pub method: TraceMethod,
    /// Largest truncation radius `τ` used by log-subtracted integrals.
    pub truncation: Option<f64>,
}

impl TraceValue {
    pub fn closed(value: f64) -> Self {
        Self {
            value,
            estimated_error: 0.0,
            method: TraceMethod::ClosedForm,
            truncation: None,
        }
    }
}

/// `|S^{d-1}|² / (2π)^d`, the common factor of both model coefficients.
pub fn model_prefactor(d: usize) -> Result<f64> {
    let vol = sphere_volume(d)?;
    Ok(vol * vol / (2.0 * PI).powi(d as i32))
}

/// `γ₂ = |S^{d-1}|² / (2π)^d · 1/d` for `<x><D>` on `R^d`.
pub fn gamma2_closed(d: usize) -> Result<f64> {
    Ok(model_prefactor(d)? / d as f64)
}

/// `γ₁ = |S^{d-1}|² / (2π)^d · (Ψ(d/2) + γ − 1/d²)` for `<x><D>` on `R^d`.
pub fn gamma1_closed(d: usize) -> Result<f64> {
    let pref = model_prefactor(d)?;
    let dd = d as f64;
    Ok(pref * (digamma(dd / 2.0)? + EULER_GAMMA - 1.0 / (dd * dd)))
}

/// `γ₁` through the finite-sum values of `Ψ(d/2)` at integers and
/// half-integers:
///
/// * odd `d`:  `−pref · (2 log 2 + 1/d² − 2 Σ_{k=1}^{(d−1)/2} 1/(2k−1))`
/// * even `d`: `−pref · (1/d² − Σ_{k=1}^{d/2−1} 1/k)`
pub fn gamma1_finite_sum(d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::invalid("gamma1 needs d >= 1"));
    }
    let pref = model_prefactor(d)?;
    let inv_d2 = 1.0 / (d * d) as f64;
    let bracket = if d % 2 == 1 {
        let odd_sum: f64 = (1..=(d - 1) / 2).map(|k| 1.0 / (2 * k - 1) as f64).sum();
        2.0 * 2f64.ln() + inv_d2 - 2.0 * odd_sum
    } else {
        let harmonic: f64 = (1..d / 2).map(|k| 1.0 / k as f64).sum();
        inv_d2 - harmonic
    };
    Ok(-pref * bracket)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    #[allow(clippy::approx_constant)]
    fn gamma2_values() {
        assert_relative_eq!(gamma2_closed(1).unwrap(), 2.0 / PI, max_relative = 1e-15);
        assert!((gamma2_closed(1).unwrap() - 0.636_619_77).abs() < 1e-8);
        assert_relative_eq!(gamma2_closed(2).unwrap(), 0.5, max_relative = 1e-15);
        assert_relative_eq!(gamma2_closed(3).unwrap(), 2.0 / (3.0 * PI), max_relative = 1e-14);
        assert!((gamma2_closed(3).unwrap() - 0.212_206_5).abs() < 1e-7);
    }

    #[test]
    fn gamma1_values() {
        let d1 = -(2.0 / PI) * (2.0 * 2f64.ln() + 1.0);
        assert!((gamma1_closed(1).unwrap() - d1).abs() < 1e-14);
        assert!((gamma1_closed(1).unwrap() + 1.519_173_1).abs() < 1e-4);
        assert!((gamma1_closed(2).unwrap() + 0.25).abs() < 1e-15);
        assert!((gamma1_closed(4).unwrap() - 15.0 / 64.0).abs() < 1e-14);
    }

    #[test]
    fn finite_sum_form_agrees_up_to_twenty() {
        for d in 1..=20 {
            let a = gamma1_closed(d).unwrap();
            let b = gamma1_finite_sum(d).unwrap();
            assert!((a - b).abs() <= 1e-12, "d = {d}: {a} vs {b}");
        }
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(gamma2_closed(0).is_err());
        assert!(gamma1_closed(0).is_err());
        assert!(gamma1_finite_sum(0).is_err());
    }
}
