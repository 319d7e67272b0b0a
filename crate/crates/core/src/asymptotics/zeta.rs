use nalgebra::{DMatrix, DVector};

use super::fit::WeylFit;
use crate::spectrum::SpectralData;
use crate::{Error, Result};

/// Order-2 and order-1 Laurent coefficients of `ζ` at `s = d − k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaurentData {
    pub k: u32,
    pub a2: f64,
    pub a1: f64,
}

/// Candidate pole of `ζ` and the largest order it can have.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleCandidate {
    pub s: f64,
    pub max_order: u32,
}

/// Abscissa of convergence implied by a spectrum's metadata: `d / (2p)` for
/// eigenvalues of the second-order grid operator raised to the power `p`,
/// and 0 for fixtures without a grid.
pub fn default_abscissa(spec: &SpectralData) -> f64 {
    match spec.config() {
        Some(c) => c.dimension as f64 / (2.0 * spec.power()),
        None => 0.0,
    }
}

/// `Σ_j λ_j^{−s}` over the trusted eigenvalues.
///
/// With a tail fit, the last trusted eigenvalue `Λ` gets weight ½ and
/// `∫_Λ^∞ λ^{−s} dN_fit(λ)` is added in closed form, so the staircase and
/// the smooth tail meet at the jump's midpoint.
///
/// `s` must exceed the abscissa: the tail's exponent when a tail is given,
/// otherwise [`default_abscissa`].
pub fn zeta_partial(spec: &SpectralData, s: f64, tail: Option<&WeylFit>) -> Result<f64> {
    let abscissa = tail.map_or_else(|| default_abscissa(spec), |f| f.exponent);
    if !(s > abscissa) {
        return Err(Error::domain(format!(
            "s = {s} is not above the abscissa of convergence {abscissa}"
        )));
    }
    let t = spec.trusted();
    match tail {
        None => Ok(t.iter().map(|l| l.powf(-s)).sum()),
        Some(fit) => {
            let Some((&last, head)) = t.split_last() else {
                return Err(Error::invalid("tail correction needs at least one trusted eigenvalue"));
            };
            let sum: f64 = head.iter().map(|l| l.powf(-s)).sum();
            Ok(sum + 0.5 * last.powf(-s) + tail_integral(fit, s, last)?)
        }
    }
}

/// `∫_Λ^∞ λ^{−s} dN_fit(λ)`, term by term:
///
/// * `d(λ^b)`:         `b Λ^{b−s} / (s−b)`
/// * `d(λ^b log λ)`:   `Λ^{b−s} [b log Λ / (s−b) + b/(s−b)² + 1/(s−b)]`
pub fn tail_integral(fit: &WeylFit, s: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::invalid(format!("tail start must be positive, got {lambda}")));
    }
    let log_l = lambda.ln();
    let mut total = 0.0;
    for (tag, w) in &fit.coefficients {
        let b = fit.exponent - tag.k as f64;
        let gap = s - b;
        if !(gap > 0.0) {
            return Err(Error::domain(format!("tail term λ^{b} diverges at s = {s}")));
        }
        let p = lambda.powf(b - s);
        let term = match tag.j {
            0 => b * p / gap,
            1 => p * (b * log_l / gap + b / (gap * gap) + 1.0 / gap),
            j => {
                return Err(Error::invalid(format!("log power {j} has no closed-form tail here")));
            }
        };
        total += w * term;
    }
    Ok(total)
}

/// Laurent coefficients at `s = d − k` from the counting expansion:
/// `A₂ = (d−k) w_{1k}`, `A₁ = w_{1k} + (d−k) w_{0k}`.
pub fn laurent_from_weyl(fit: &WeylFit, d: usize, k: u32) -> Result<LaurentData> {
    let (Some(w1), Some(w0)) = (fit.coefficient(k, 1), fit.coefficient(k, 0)) else {
        return Err(Error::invalid(format!("fit lacks w_1_{k} or w_0_{k}")));
    };
    let dk = d as f64 - k as f64;
    Ok(LaurentData {
        k,
        a2: dk * w1,
        a1: w1 + dk * w0,
    })
}

/// Candidate poles `(d−j)/m_ψ` and `(d−k)/m_e` for `j, k < count`, sorted
/// descending and merged. Order 2 is possible where a point of one family
/// coincides with a point `(d−i)/m` of the other family for some integer
/// `i ≥ 0`.
pub fn pole_locations(d: usize, m_psi: f64, m_e: f64, count: usize) -> Result<Vec<PoleCandidate>> {
    if !(m_psi > 0.0 && m_e > 0.0) || !m_psi.is_finite() || !m_e.is_finite() {
        return Err(Error::invalid("orders must be positive and finite"));
    }
    let dd = d as f64;
    let in_family = |s: f64, m: f64| {
        let i = dd - s * m;
        let r = i.round();
        r >= 0.0 && (i - r).abs() <= 1e-12 * dd.max(1.0)
    };
    let mut out: Vec<PoleCandidate> = Vec::new();
    let first = (0..count).map(|j| (dd - j as f64) / m_psi);
    let second = (0..count).map(|k| (dd - k as f64) / m_e);
    for s in first.chain(second) {
        if out.iter().any(|p| (p.s - s).abs() <= 1e-12 * s.abs().max(1.0)) {
            continue;
        }
        let order = if in_family(s, m_psi) && in_family(s, m_e) { 2 } else { 1 };
        out.push(PoleCandidate { s, max_order: order });
    }
    out.sort_by(|a, b| b.s.total_cmp(&a.s));
    Ok(out)
}

/// Diagnostic only: least-squares fit of `(s−a)² ζ(s) ≈ A₂ + A₁ (s−a) + c (s−a)²`
/// on a mesh of `s > a`, with `ζ` from [`zeta_partial`].
pub fn laurent_diagnostic(spec: &SpectralData, tail: &WeylFit, mesh: &[f64]) -> Result<(f64, f64)> {
    let a = tail.exponent;
    if mesh.len() < 3 {
        return Err(Error::invalid("Laurent diagnostic needs at least three mesh points"));
    }
    let mut rows = Vec::with_capacity(mesh.len());
    for &s in mesh {
        let z = zeta_partial(spec, s, Some(tail))?;
        rows.push((s - a, (s - a).powi(2) * z));
    }
    let m = DMatrix::from_fn(rows.len(), 3, |i, c| rows[i].0.powi(c as i32));
    let b = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
    let x = m
        .svd(true, true)
        .solve(&b, 0.0)
        .map_err(|e| Error::no_convergence(format!("SVD solve failed: {e}")))?;
    Ok((x[0], x[1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::fit::{fit_log_weyl, BasisTag};
    use std::f64::consts::PI;

    fn fit_with(exponent: f64, coeffs: &[((u32, u32), f64)]) -> WeylFit {
        WeylFit {
            exponent,
            coefficients: coeffs.iter().map(|((k, j), c)| (BasisTag::new(*k, *j), *c)).collect(),
            fit_window: (2.0, 10.0),
            residual_sup: 0.0,
            n_points: 40,
            condition: 1.0,
        }
    }

    #[test]
    fn finite_sums() {
        let one = SpectralData::from_exact(vec![1.0]).unwrap();
        assert_eq!(zeta_partial(&one, 2.0, None).unwrap(), 1.0);
        let three = SpectralData::from_exact(vec![1.0, 2.0, 4.0]).unwrap();
        assert_eq!(zeta_partial(&three, 1.0, None).unwrap(), 1.75);
    }

    #[test]
    fn abscissa_is_enforced() {
        let three = SpectralData::from_exact(vec![1.0, 2.0, 4.0]).unwrap();
        let f = fit_with(1.0, &[((0, 1), 1.0)]);
        assert!(matches!(zeta_partial(&three, 1.0, Some(&f)), Err(Error::Domain(_))));
        assert!(matches!(zeta_partial(&three, 0.0, None), Err(Error::Domain(_))));
    }

    #[test]
    fn tail_integral_matches_quadrature() {
        let f = fit_with(1.0, &[((0, 1), 0.6), ((0, 0), 0.3), ((1, 1), -0.2), ((1, 0), 0.1)]);
        let (s, lam) = (2.7, 5.0);
        let closed = tail_integral(&f, s, lam).unwrap();
        // ∫_Λ^∞ λ^{−s} N'(λ) dλ with λ = Λ e^u, midpoint rule in u
        let dn = |l: f64| {
            let ll = l.ln();
            0.6 * (ll + 1.0) + 0.3 - 0.2 / l
        };
        let n = 400_000;
        let du = 40.0 / n as f64;
        let mut num = 0.0;
        for i in 0..n {
            let u = (i as f64 + 0.5) * du;
            let l = lam * u.exp();
            num += l.powf(-s) * dn(l) * l * du;
        }
        assert!((closed - num).abs() < 1e-9 * num.abs(), "{closed} vs {num}");
    }

    #[test]
    fn tail_reproduces_continuous_model() {
        // eigenvalues j = 1, 2, ...: N(λ) ≈ λ − 1/2, ζ = Riemann ζ(s)
        let eig: Vec<f64> = (1..=2000).map(|j| j as f64).collect();
        let spec = SpectralData::from_exact(eig).unwrap();
        let tail = fit_with(1.0, &[((0, 0), 1.0), ((1, 0), -0.5)]);
        let z = zeta_partial(&spec, 2.0, Some(&tail)).unwrap();
        assert!((z - PI * PI / 6.0).abs() < 1e-6, "{z}");
    }

    #[test]
    fn dictionary_examples() {
        let w10 = 2.0 / PI;
        let w00 = -(2.0 / PI) * (2.0 * 2f64.ln() + 1.0);
        let l = laurent_from_weyl(&fit_with(1.0, &[((0, 1), w10), ((0, 0), w00)]), 1, 0).unwrap();
        assert_eq!(l.a2, w10);
        assert_eq!(l.a1, w10 + w00);

        let l = laurent_from_weyl(&fit_with(2.0, &[((0, 1), 0.0), ((0, 0), 0.7)]), 2, 0).unwrap();
        assert_eq!((l.a2, l.a1), (0.0, 1.4));

        let f = fit_with(3.0, &[((0, 1), 1.0), ((0, 0), 1.0), ((1, 1), 0.3), ((1, 0), 0.0)]);
        let l = laurent_from_weyl(&f, 3, 1).unwrap();
        assert_eq!((l.a2, l.a1), (0.6, 0.3));

        assert!(laurent_from_weyl(&fit_with(1.0, &[((0, 1), 1.0)]), 1, 0).is_err());
        assert!(laurent_from_weyl(&f, 3, 2).is_err());
    }

    #[test]
    fn pole_examples() {
        let p = pole_locations(2, 1.0, 1.0, 3).unwrap();
        assert_eq!(
            p,
            vec![
                PoleCandidate { s: 2.0, max_order: 2 },
                PoleCandidate { s: 1.0, max_order: 2 },
                PoleCandidate { s: 0.0, max_order: 2 },
            ]
        );
        let p = pole_locations(2, 1.0, 2.0, 2).unwrap();
        assert_eq!(
            p,
            vec![
                PoleCandidate { s: 2.0, max_order: 1 },
                PoleCandidate { s: 1.0, max_order: 2 },
                PoleCandidate { s: 0.5, max_order: 1 },
            ]
        );
        assert_eq!(pole_locations(1, 1.0, 1.0, 1).unwrap(), vec![PoleCandidate { s: 1.0, max_order: 2 }]);
        assert!(pole_locations(1, 1.0, 1.0, 0).unwrap().is_empty());
        assert!(pole_locations(1, 0.0, 1.0, 1).is_err());
    }

    #[test]
    fn diagnostic_sees_simple_pole_of_riemann_zeta() {
        let spec = SpectralData::from_exact((1..=4000).map(|j| j as f64).collect()).unwrap();
        let pts = crate::asymptotics::fit::counting_points(&spec, 1.0 / 3.0).unwrap();
        let fit = fit_log_weyl(&pts, 1.0, 2).unwrap();
        let (a2, a1) = laurent_diagnostic(&spec, &fit, &[1.05, 1.1, 1.15, 1.2, 1.25, 1.3]).unwrap();
        assert!(a2.abs() < 1e-3, "{a2}");
        assert!((a1 - 1.0).abs() < 1e-2, "{a1}");
    }
}
