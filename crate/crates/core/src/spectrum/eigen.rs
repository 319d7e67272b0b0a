//! Lowest eigenvalues of symmetric band matrices.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use super::band::{SymBandMatrix, LANES};
use crate::{Error, Result};

/// Lowest `count` eigenvalues (with multiplicity) by bisection on inertia
/// counts.
///
/// Every count `c = #{λ < σ}` tightens all brackets at once: `hi[j] ≤ σ`
/// for `j < c` and `lo[j] ≥ σ` otherwise. Brackets stop once
/// `hi − lo ≤ rel_tol · max(|lo|, |hi|)` or the midpoint stops moving.
pub fn bisection_lowest(a: &SymBandMatrix, count: usize, rel_tol: f64) -> Result<Vec<f64>> {
    if count > a.dim() {
        return Err(Error::invalid(format!(
            "requested {count} eigenvalues of a {n}×{n} matrix",
            n = a.dim()
        )));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let (g_lo, g_hi) = a.gershgorin();
    let pad = 1e-12 * g_lo.abs().max(g_hi.abs()).max(1.0);
    let mut lo = vec![g_lo - pad; count];
    let mut hi = vec![g_hi + pad; count];

    let done = |l: f64, h: f64| {
        let mid = 0.5 * (l + h);
        h - l <= rel_tol * l.abs().max(h.abs()) || mid <= l || mid >= h
    };

    let mut shifts = Vec::with_capacity(LANES);
    let mut counts = [0usize; LANES];
    loop {
        // distinct open brackets in ascending order
        let mut open: Vec<(f64, f64)> = Vec::new();
        for j in 0..count {
            if done(lo[j], hi[j]) {
                continue;
            }
            if open.last() != Some(&(lo[j], hi[j])) {
                open.push((lo[j], hi[j]));
            }
        }
        if open.is_empty() {
            break;
        }
        shifts.clear();
        if open.len() >= LANES {
            shifts.extend(open.iter().take(LANES).map(|(l, h)| 0.5 * (l + h)));
        } else {
            // multisection: spread the spare lanes over the open brackets
            let per = LANES / open.len();
            for (l, h) in &open {
                for p in 1..=per {
                    shifts.push(l + (h - l) * p as f64 / (per + 1) as f64);
                }
            }
        }
        a.count_below_batch(&shifts, &mut counts[..shifts.len()]);
        for (&s, &c) in shifts.iter().zip(&counts) {
            for h in hi.iter_mut().take(c.min(count)) {
                if s < *h {
                    *h = s;
                }
            }
            for l in lo.iter_mut().skip(c) {
                if s > *l {
                    *l = s;
                }
            }
        }
    }
    Ok(lo.iter().zip(&hi).map(|(l, h)| 0.5 * (l + h)).collect())
}

/// Settings for [`lanczos_lowest`].
#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Spectral shift `σ`; `A − σI` must be positive definite.
    pub shift: f64,
    /// Relative residual bound on converged Ritz values.
    pub tol: f64,
    pub seed: u64,
    /// Cap on the Krylov dimension; 0 means `dim`.
    pub max_steps: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            shift: 0.0,
            tol: 1e-12,
            seed: 0x5eed,
            max_steps: 0,
        }
    }
}

/// Lowest `count` eigenvalues (with multiplicity) through shift-invert
/// Lanczos with full reorthogonalisation.
///
/// Lanczos sees each eigenspace once, so multiplicities are read off from
/// inertia counts just below and above each converged value. A gap between
/// those counts and the number of values found means the Krylov space missed
/// something; iteration then continues.
pub fn lanczos_lowest(a: &SymBandMatrix, count: usize, opts: LanczosOptions) -> Result<Vec<f64>> {
    let n = a.dim();
    if count > n {
        return Err(Error::invalid(format!(
            "requested {count} eigenvalues of a {n}×{n} matrix"
        )));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let chol = a.cholesky(opts.shift)?;
    let max_steps = if opts.max_steps == 0 { n } else { opts.max_steps.min(n) };

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(opts.seed);
    let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    normalize(&mut v);

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut next_check = (2 * count + 20).min(max_steps);

    loop {
        basis.push(v.clone());
        let mut w = v.clone();
        chol.solve_in_place(&mut w);
        let al = dot(&w, &v);
        alpha.push(al);
        // two passes of classical Gram–Schmidt against the whole basis
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                axpy(-c, q, &mut w);
            }
        }
        let b = norm(&w);
        let m = alpha.len();
        let breakdown = b <= 1e-14 * al.abs().max(1e-300);
        if m >= next_check || m == max_steps || breakdown {
            if let Some(vals) = ritz_check(a, &alpha, &beta, b, count, opts, breakdown || m == max_steps)? {
                return Ok(vals);
            }
            if m == max_steps {
                return Err(Error::no_convergence(format!(
                    "Lanczos did not resolve {count} eigenvalues within {m} steps"
                )));
            }
            next_check = (m + m / 2 + 10).min(max_steps);
        }
        if breakdown {
            // invariant subspace: restart orthogonal to it
            let mut fresh: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(&fresh, q);
                    axpy(-c, q, &mut fresh);
                }
            }
            normalize(&mut fresh);
            beta.push(0.0);
            v = fresh;
        } else {
            beta.push(b);
            w.iter_mut().for_each(|x| *x /= b);
            v = w;
        }
    }
}

/// Converged Ritz values mapped back to `A`, expanded by multiplicity, or
/// `None` when more steps are needed.
fn ritz_check(
    a: &SymBandMatrix,
    alpha: &[f64],
    beta: &[f64],
    b_next: f64,
    count: usize,
    opts: LanczosOptions,
    exhausted: bool,
) -> Result<Option<Vec<f64>>> {
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));

    // Ritz values of the inverse, largest first, with converged flags
    let mut values = Vec::new();
    for &i in &order {
        let theta = eig.eigenvalues[i];
        if !(theta > 0.0) {
            break;
        }
        let resid = (b_next * eig.eigenvectors[(m - 1, i)]).abs();
        if resid > opts.tol * theta && !exhausted {
            break;
        }
        values.push(opts.shift + 1.0 / theta);
    }
    // cluster numerically equal values
    let mut distinct: Vec<f64> = Vec::new();
    for v in values {
        match distinct.last() {
            Some(&p) if (v - p).abs() <= 1e-9 * v.abs().max(1.0) => {}
            _ => distinct.push(v),
        }
    }
    let mut out = Vec::with_capacity(count);
    let mut below = a.count_below(opts.shift);
    if below != 0 {
        return Err(Error::no_convergence("shift is not below the spectrum"));
    }
    for (idx, &mu) in distinct.iter().enumerate() {
        let delta = 1e-7 * mu.abs().max(1.0);
        let lower = a.count_below(mu - delta);
        if lower != below {
            // an eigenvalue between the previous value and this one was missed
            return Ok(None);
        }
        let upper = a.count_below(mu + delta);
        let mult = upper - lower;
        if mult == 0 {
            return Err(Error::no_convergence(format!(
                "Ritz value {mu} is not an eigenvalue to relative accuracy 1e-7"
            )));
        }
        for _ in 0..mult {
            out.push(mu);
        }
        below = upper;
        if out.len() >= count {
            out.truncate(count);
            return Ok(Some(out));
        }
        if idx + 1 == distinct.len() && exhausted {
            break;
        }
    }
    Ok(None)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: &mut [f64]) {
    let s = norm(a);
    a.iter_mut().for_each(|x| *x /= s);
}

fn axpy(c: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += c * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn dense_lowest(a: &SymBandMatrix, k: usize) -> Vec<f64> {
        let mut e: Vec<f64> = a.to_dense().symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e.truncate(k);
        e
    }

    fn spd_band(n: usize, w: usize, seed: u64) -> SymBandMatrix {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut a = SymBandMatrix::zeros(n, w);
        for i in 0..n {
            for k in 1..=w.min(i) {
                a.set(i, i - k, rng.gen_range(-1.0..1.0));
            }
            a.set(i, i, 2.0 * w as f64 + 1.0 + rng.gen_range(0.0..3.0));
        }
        a
    }

    #[test]
    fn bisection_matches_dense() {
        for (w, seed) in [(1, 1), (2, 2), (4, 3)] {
            let a = spd_band(60, w, seed);
            let got = bisection_lowest(&a, 25, 1e-13).unwrap();
            let want = dense_lowest(&a, 25);
            for (g, e) in got.iter().zip(&want) {
                assert!((g - e).abs() <= 1e-11 * e.abs(), "w = {w}: {g} vs {e}");
            }
        }
    }

    #[test]
    fn bisection_handles_multiplicity() {
        let mut a = SymBandMatrix::zeros(6, 1);
        for (i, v) in [3.0, 1.0, 3.0, 2.0, 3.0, 5.0].iter().enumerate() {
            a.set(i, i, *v);
        }
        let got = bisection_lowest(&a, 5, 1e-14).unwrap();
        let want = [1.0, 2.0, 3.0, 3.0, 3.0];
        for (g, e) in got.iter().zip(&want) {
            assert!((g - e).abs() < 1e-13);
        }
        assert!(bisection_lowest(&a, 7, 1e-14).is_err());
        assert!(bisection_lowest(&a, 0, 1e-14).unwrap().is_empty());
    }

    #[test]
    fn lanczos_matches_dense() {
        let a = spd_band(120, 6, 9);
        let got = lanczos_lowest(&a, 15, LanczosOptions::default()).unwrap();
        let want = dense_lowest(&a, 15);
        for (g, e) in got.iter().zip(&want) {
            assert!((g - e).abs() <= 1e-9 * e.abs(), "{g} vs {e}");
        }
    }

    #[test]
    fn lanczos_recovers_degenerate_levels() {
        // 2-d grid Laplacian: symmetric in x ↔ y, so off-diagonal levels
        // are doubly degenerate
        let n = 10;
        let mut a = SymBandMatrix::zeros(n * n, n);
        for j in 0..n {
            for i in 0..n {
                let p = i + n * j;
                a.set(p, p, 4.0);
                if i > 0 {
                    a.set(p, p - 1, -1.0);
                }
                if j > 0 {
                    a.set(p, p - n, -1.0);
                }
            }
        }
        let got = lanczos_lowest(&a, 12, LanczosOptions::default()).unwrap();
        let want = dense_lowest(&a, 12);
        for (g, e) in got.iter().zip(&want) {
            assert!((g - e).abs() <= 1e-9 * e.abs(), "{got:?}\n{want:?}");
        }
        assert_eq!(got[1], got[2]);
    }
}
