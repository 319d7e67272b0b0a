//! Gauss–Legendre nodes and product rules on low-dimensional spheres.

use std::f64::consts::PI;

use crate::{Error, Result};

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule, nodes ascending. Newton iteration on `P_n` from the
    /// Tricomi initial guesses; exact for polynomials of degree `2n - 1`.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "Gauss–Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() <= 1e-16 * z.abs().max(1.0) {
                    dp = legendre_with_derivative(n, z).1;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Quadrature rule on `S^{d-1}` with respect to surface measure.
#[derive(Debug, Clone)]
pub struct SphereRule {
    pub dimension: usize,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    /// Rule at refinement `level >= 1`:
    ///
    /// * `d = 1`: the two points of `S^0` with unit weights (exact; level ignored);
    /// * `d = 2`: periodic trapezoid with `8·level` equispaced angles;
    /// * `d = 3`: `4·level`-point Gauss–Legendre in `cos φ` times an
    ///   `8·level`-point periodic trapezoid in the azimuth.
    pub fn new(dimension: usize, level: usize) -> Result<Self> {
        let level = level.max(1);
        let (points, weights) = match dimension {
            1 => (vec![vec![-1.0], vec![1.0]], vec![1.0, 1.0]),
            2 => {
                let m = 8 * level;
                let h = 2.0 * PI / m as f64;
                let pts = (0..m)
                    .map(|k| {
                        let a = h * k as f64;
                        vec![a.cos(), a.sin()]
                    })
                    .collect();
                (pts, vec![h; m])
            }
            3 => {
                let gl = GaussLegendre::new(4 * level);
                let m = 8 * level;
                let h = 2.0 * PI / m as f64;
                let mut pts = Vec::with_capacity(gl.nodes.len() * m);
                let mut wts = Vec::with_capacity(gl.nodes.len() * m);
                for (&z, &wz) in gl.nodes.iter().zip(&gl.weights) {
                    let s = (1.0 - z * z).sqrt();
                    for k in 0..m {
                        let a = h * k as f64;
                        pts.push(vec![s * a.cos(), s * a.sin(), z]);
                        wts.push(wz * h);
                    }
                }
                (pts, wts)
            }
            _ => {
                return Err(Error::invalid(format!(
                    "sphere quadrature is implemented for d in {{1, 2, 3}}, got {dimension}"
                )))
            }
        };
        Ok(Self {
            dimension,
            points,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, &w)| w * f(p))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_exactness() {
        for n in 1..=20 {
            let gl = GaussLegendre::new(n);
            assert_relative_eq!(gl.weights.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
            let deg = 2 * n - 1;
            // ∫_{-1}^{1} x^{deg-1} dx for the highest even power below 2n
            let p = if deg % 2 == 0 { deg } else { deg - 1 };
            let exact = 2.0 / (p as f64 + 1.0);
            let got = gl.integrate(-1.0, 1.0, |x| x.powi(p as i32));
            assert_relative_eq!(got, exact, max_relative = 1e-13);
        }
    }

    #[test]
    fn gauss_legendre_nodes_sorted_and_symmetric() {
        let gl = GaussLegendre::new(9);
        assert!(gl.nodes.windows(2).all(|w| w[0] < w[1]));
        for i in 0..9 {
            assert!((gl.nodes[i] + gl.nodes[8 - i]).abs() < 1e-15);
        }
    }

    #[test]
    fn sphere_areas() {
        let s1 = SphereRule::new(1, 1).unwrap();
        assert_eq!(s1.integrate(|_| 1.0), 2.0);
        let s2 = SphereRule::new(2, 1).unwrap();
        assert_relative_eq!(s2.integrate(|_| 1.0), 2.0 * PI, max_relative = 1e-14);
        let s3 = SphereRule::new(3, 2).unwrap();
        assert_relative_eq!(s3.integrate(|_| 1.0), 4.0 * PI, max_relative = 1e-14);
        // ∫_{S^2} z^2 = 4π/3
        assert_relative_eq!(s3.integrate(|p| p[2] * p[2]), 4.0 * PI / 3.0, max_relative = 1e-14);
        assert!(SphereRule::new(4, 1).is_err());
    }

    #[test]
    fn sphere_points_are_unit() {
        for d in 1..=3 {
            for p in &SphereRule::new(d, 2).unwrap().points {
                let n: f64 = p.iter().map(|v| v * v).sum();
                assert!((n - 1.0).abs() < 1e-14);
            }
        }
    }
}
