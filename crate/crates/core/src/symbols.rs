//! Principal symbols of SG-classical operators as evaluable triples.
//!
//! An SG-classical symbol of order `(m_ψ, m_e)` has three boundary
//! restrictions on the compactified phase space: the fiber component `p_ψ`
//! (covariable at infinity), the base component `p_e` (variable at infinity)
//! and the corner component `p_ψe`. Each is stored here as a closure on
//! unit-sphere representatives:
//!
//! | component | arguments                     |
//! |-----------|-------------------------------|
//! | `p_ψ`     | `x ∈ R^d`, `θ ∈ S^{d-1}`      |
//! | `p_e`     | `ω ∈ S^{d-1}`, `ξ ∈ R^d`      |
//! | `p_ψe`    | `ω ∈ S^{d-1}`, `θ ∈ S^{d-1}`  |

use std::fmt;
use std::sync::Arc;

use crate::{Error, Result};

/// A symbol component: a pure function of a pair of points in `R^d`.
pub type Component = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

/// The SG orders `(m_ψ, m_e)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orders {
    pub psi: f64,
    pub e: f64,
}

impl Orders {
    pub fn new(psi: f64, e: f64) -> Result<Self> {
        if !(psi > 0.0 && e > 0.0 && psi.is_finite() && e.is_finite()) {
            return Err(Error::invalid(format!(
                "orders must be positive and finite, got ({psi}, {e})"
            )));
        }
        Ok(Self { psi, e })
    }
}

#[derive(Clone)]
pub struct PrincipalSymbolTriple {
    dimension: usize,
    p_psi: Component,
    p_e: Component,
    p_psie: Component,
    orders: Orders,
}

impl fmt::Debug for PrincipalSymbolTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PrincipalSymbolTriple")
            .field("dimension", &self.dimension)
            .field("orders", &self.orders)
            .finish_non_exhaustive()
    }
}

impl PrincipalSymbolTriple {
    /// Wraps three user-supplied components. Classicality is not checked;
    /// see [`PrincipalSymbolTriple::check_positive`] for a sampled
    /// ellipticity test.
    pub fn new<A, B, C>(dimension: usize, p_psi: A, p_e: B, p_psie: C, orders: Orders) -> Result<Self>
    where
        A: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
        B: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
        C: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    {
        if dimension == 0 {
            return Err(Error::invalid("symbol dimension must be at least 1"));
        }
        Ok(Self {
            dimension,
            p_psi: Arc::new(p_psi),
            p_e: Arc::new(p_e),
            p_psie: Arc::new(p_psie),
            orders,
        })
    }

    /// A symbol whose three components are the given constants. Handy for
    /// quadrature checks with hand-computable integrals.
    pub fn constant(dimension: usize, psi: f64, e: f64, psie: f64, orders: Orders) -> Result<Self> {
        Self::new(
            dimension,
            move |_, _| psi,
            move |_, _| e,
            move |_, _| psie,
            orders,
        )
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn orders(&self) -> Orders {
        self.orders
    }

    /// `p_ψ(x, θ)` with `θ` a unit covariable.
    pub fn p_psi(&self, x: &[f64], theta: &[f64]) -> f64 {
        (self.p_psi)(x, theta)
    }

    /// `p_e(ω, ξ)` with `ω` a unit variable.
    pub fn p_e(&self, omega: &[f64], xi: &[f64]) -> f64 {
        (self.p_e)(omega, xi)
    }

    /// `p_ψe(ω, θ)` on the corner `S^{d-1} × S^{d-1}`.
    pub fn p_psie(&self, omega: &[f64], theta: &[f64]) -> f64 {
        (self.p_psie)(omega, theta)
    }

    /// Exchanges the roles of variables and covariables:
    /// `p_ψ ↔ p_e` with arguments swapped, `p_ψe(ω, θ) → p_ψe(θ, ω)`.
    pub fn swapped(&self) -> Self {
        let (p_psi, p_e, p_psie) = (self.p_psi.clone(), self.p_e.clone(), self.p_psie.clone());
        Self {
            dimension: self.dimension,
            p_psi: Arc::new(move |x, theta| p_e(theta, x)),
            p_e: Arc::new(move |omega, xi| p_psi(xi, omega)),
            p_psie: Arc::new(move |omega, theta| p_psie(theta, omega)),
            orders: Orders {
                psi: self.orders.e,
                e: self.orders.psi,
            },
        }
    }

    /// Principal symbol of the real power `P^exponent`: each component
    /// raised to `exponent`, orders scaled accordingly.
    pub fn powered(&self, exponent: f64) -> Result<Self> {
        if !(exponent > 0.0 && exponent.is_finite()) {
            return Err(Error::invalid(format!("power exponent must be positive, got {exponent}")));
        }
        if exponent == 1.0 {
            return Ok(self.clone());
        }
        let (p_psi, p_e, p_psie) = (self.p_psi.clone(), self.p_e.clone(), self.p_psie.clone());
        Ok(Self {
            dimension: self.dimension,
            p_psi: Arc::new(move |a, b| p_psi(a, b).powf(exponent)),
            p_e: Arc::new(move |a, b| p_e(a, b).powf(exponent)),
            p_psie: Arc::new(move |a, b| p_psie(a, b).powf(exponent)),
            orders: Orders {
                psi: self.orders.psi * exponent,
                e: self.orders.e * exponent,
            },
        })
    }

    /// Spot-checks ellipticity: every component must be strictly positive
    /// (and finite) at `samples` pseudo-random points drawn from `seed`.
    /// Returns the first offending evaluation as an error.
    pub fn check_positive(&self, samples: usize, seed: u64) -> Result<()> {
        use rand::{Rng, SeedableRng};
        use rand_distr::StandardNormal;

        let d = self.dimension;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut gauss = |scale: f64| -> Vec<f64> {
            (0..d).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
        };
        for i in 0..samples {
            let scale = 10f64.powf((i % 7) as f64 - 2.0);
            let x = gauss(scale);
            let y = gauss(scale);
            let (u, v) = (unit(&gauss(1.0)), unit(&gauss(1.0)));
            let checks = [
                ("p_psi", self.p_psi(&x, &u)),
                ("p_e", self.p_e(&v, &y)),
                ("p_psie", self.p_psie(&u, &v)),
            ];
            for (name, value) in checks {
                if !(value > 0.0 && value.is_finite()) {
                    return Err(Error::domain(format!(
                        "{name} is not positive at sample {i}: {value}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `<z> = sqrt(1 + |z|^2)`.
pub fn japanese_bracket(z: &[f64]) -> f64 {
    (1.0 + norm_sq(z)).sqrt()
}

pub(crate) fn norm_sq(z: &[f64]) -> f64 {
    z.iter().map(|v| v * v).sum()
}

pub(crate) fn unit(z: &[f64]) -> Vec<f64> {
    let n = norm_sq(z).sqrt();
    z.iter().map(|v| v / n).collect()
}

/// Principal symbol triple of `<x><D>` on `R^d`: `p_ψ = <x>|θ|`,
/// `p_e = |ω|<ξ>` and `p_ψe = |ω||θ|`, i.e. `<x>`, `<ξ>` and `1` on unit
/// spheres. Orders `(1, 1)`.
pub fn model_symbol(d: usize) -> Result<PrincipalSymbolTriple> {
    if d == 0 {
        return Err(Error::invalid("model symbol needs d >= 1"));
    }
    PrincipalSymbolTriple::new(
        d,
        |x, theta| japanese_bracket(x) * norm_sq(theta).sqrt(),
        |omega, xi| norm_sq(omega).sqrt() * japanese_bracket(xi),
        |omega, theta| (norm_sq(omega) * norm_sq(theta)).sqrt(),
        Orders { psi: 1.0, e: 1.0 },
    )
}

/// Generalised binomial coefficient `C(1/2, j)`.
fn binom_half(j: u32) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (0.5 - i as f64) / (i as f64 + 1.0))
}

/// Coefficient of `|x|^{1-2j} |ξ|^{1-2k}` in the corner expansion of
/// `<x><ξ>`: `C(1/2, j) C(1/2, k)`, from
/// `<x> = |x| (1 + |x|^{-2})^{1/2}`. The signs alternate through the
/// binomials themselves, starting at order 2.
pub fn corner_expansion_coeff(j: u32, k: u32) -> f64 {
    binom_half(j) * binom_half(k)
}

/// Truncated corner expansion `Σ_{j<terms_x, k<terms_xi} c_{jk} r^{1-2j} ρ^{1-2k}`
/// at `|x| = r`, `|ξ| = ρ`.
pub fn corner_expansion(r: f64, rho: f64, terms_x: u32, terms_xi: u32) -> f64 {
    let mut total = 0.0;
    for j in 0..terms_x {
        for k in 0..terms_xi {
            total += corner_expansion_coeff(j, k)
                * r.powi(1 - 2 * j as i32)
                * rho.powi(1 - 2 * k as i32);
        }
    }
    total
}
