//! Symmetric band matrices: storage, inertia counts and Cholesky solves.

use nalgebra::DMatrix;

use crate::{Error, Result};

/// Shifts evaluated per sweep by the batched inertia kernels. Independent
/// recurrences keep the divider pipeline busy.
pub const LANES: usize = 8;

/// Symmetric `n × n` matrix with half-bandwidth `w`; only the lower band is
/// stored, so `A[i][j] == A[j][i]` holds bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBandMatrix {
    n: usize,
    w: usize,
    /// `data[i * (w + 1) + k] = A[i][i - k]`
    data: Vec<f64>,
}

impl SymBandMatrix {
    pub fn zeros(n: usize, w: usize) -> Self {
        Self {
            n,
            w,
            data: vec![0.0; n * (w + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.w
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let k = hi - lo;
        if k > self.w {
            0.0
        } else {
            self.data[hi * (self.w + 1) + k]
        }
    }

    /// Sets `A[i][j]` and `A[j][i]`.
    ///
    /// # Panics
    /// If `|i - j|` exceeds the bandwidth.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let k = hi - lo;
        assert!(k <= self.w, "entry ({i}, {j}) outside bandwidth {}", self.w);
        self.data[hi * (self.w + 1) + k] = v;
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.data[i * (self.w + 1)]).collect()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let w = self.w;
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n {
            let row = &self.data[i * (w + 1)..(i + 1) * (w + 1)];
            y[i] += row[0] * x[i];
            for k in 1..=w.min(i) {
                let a = row[k];
                y[i] += a * x[i - k];
                y[i - k] += a * x[i];
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut radius = vec![0.0; self.n];
        for i in 0..self.n {
            for k in 1..=self.w.min(i) {
                let a = self.data[i * (self.w + 1) + k].abs();
                radius[i] += a;
                radius[i - k] += a;
            }
        }
        let diag = self.diagonal();
        let lo = diag.iter().zip(&radius).map(|(d, r)| d - r).fold(f64::INFINITY, f64::min);
        let hi = diag.iter().zip(&radius).map(|(d, r)| d + r).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Smallest admissible pivot magnitude in the inertia recurrences;
    /// smaller pivots are replaced by `-pivmin`.
    fn pivmin(&self) -> f64 {
        f64::MIN_POSITIVE * self.max_abs().powi(2).max(1.0)
    }

    /// Number of eigenvalues strictly below `sigma` (Sylvester's law of
    /// inertia on `A − σI = L D Lᵀ`).
    pub fn count_below(&self, sigma: f64) -> usize {
        let mut out = [0usize; 1];
        self.count_below_batch(&[sigma], &mut out);
        out[0]
    }

    /// [`SymBandMatrix::count_below`] for several shifts at once.
    pub fn count_below_batch(&self, shifts: &[f64], out: &mut [usize]) {
        assert_eq!(shifts.len(), out.len());
        for (s, o) in shifts.chunks(LANES).zip(out.chunks_mut(LANES)) {
            match self.w {
                0 => {
                    let diag = self.diagonal();
                    for (sv, ov) in s.iter().zip(o.iter_mut()) {
                        *ov = diag.iter().filter(|&&a| a < *sv).count();
                    }
                }
                1 => self.sturm_tridiagonal(s, o),
                2 => self.ldl_pentadiagonal(s, o),
                _ => {
                    for (sv, ov) in s.iter().zip(o.iter_mut()) {
                        *ov = self.ldl_general(*sv);
                    }
                }
            }
        }
    }

    fn sturm_tridiagonal(&self, shifts: &[f64], out: &mut [usize]) {
        let lanes = shifts.len();
        let mut sig = [0.0; LANES];
        sig[..lanes].copy_from_slice(shifts);
        let pivmin = self.pivmin();
        let mut q = [0.0f64; LANES];
        let mut neg = [0u32; LANES];
        for l in 0..LANES {
            q[l] = self.data[0] - sig[l];
            neg[l] = (q[l] < 0.0) as u32;
        }
        for i in 1..self.n {
            let a = self.data[2 * i];
            let b = self.data[2 * i + 1];
            let b2 = b * b;
            for l in 0..LANES {
                let prev = if q[l].abs() < pivmin { -pivmin } else { q[l] };
                q[l] = (a - sig[l]) - b2 / prev;
                neg[l] += (q[l] < 0.0) as u32;
            }
        }
        for l in 0..lanes {
            out[l] = neg[l] as usize;
        }
    }

    fn ldl_pentadiagonal(&self, shifts: &[f64], out: &mut [usize]) {
        let lanes = shifts.len();
        let mut sig = [0.0; LANES];
        sig[..lanes].copy_from_slice(shifts);
        let pivmin = self.pivmin();
        // per lane: pivots d_{i-1}, d_{i-2}, and L[i-1][i-2]
        let mut d1 = [1.0f64; LANES];
        let mut d2 = [1.0f64; LANES];
        let mut l1 = [0.0f64; LANES]; // L[i-1][i-2]
        let mut neg = [0u32; LANES];
        for i in 0..self.n {
            let row = &self.data[3 * i..3 * i + 3];
            let a0 = row[0];
            let a1 = if i >= 1 { row[1] } else { 0.0 };
            let a2 = if i >= 2 { row[2] } else { 0.0 };
            for l in 0..LANES {
                // u_{i-2} = a2; L[i][i-2] = u_{i-2}/d2
                let u2 = a2;
                let li2 = u2 / d2[l];
                // u_{i-1} = a1 − u_{i-2} L[i-1][i-2]
                let u1 = a1 - u2 * l1[l];
                let li1 = if i >= 1 { u1 / d1[l] } else { 0.0 };
                let mut d = (a0 - sig[l]) - u2 * li2 - u1 * li1;
                if d.abs() < pivmin {
                    d = -pivmin;
                }
                neg[l] += (d < 0.0) as u32;
                d2[l] = d1[l];
                d1[l] = d;
                l1[l] = li1;
            }
        }
        for l in 0..lanes {
            out[l] = neg[l] as usize;
        }
    }

    fn ldl_general(&self, sigma: f64) -> usize {
        let (n, w) = (self.n, self.w);
        let pivmin = self.pivmin();
        // ring buffers: rows of L (columns i-w..i-1) and pivots
        let mut lrows = vec![0.0f64; (w + 1) * w];
        let mut piv = vec![0.0f64; w + 1];
        let mut u = vec![0.0f64; w];
        let mut neg = 0usize;
        for i in 0..n {
            let lo = i.saturating_sub(w);
            let width = i - lo;
            let slot = i % (w + 1);
            // u_j = A[i][j] − Σ_{lo ≤ k < j} u_k L[j][k], for j in lo..i
            // (lo ≥ j − w, so the whole prefix lo..j lies in row j's band)
            for t in 0..width {
                let j = lo + t;
                let jrow = &lrows[(j % (w + 1)) * w..][..w];
                let base = lo + w - j;
                let acc = self.data[i * (w + 1) + (i - j)] - dot(&u[..t], &jrow[base..base + t]);
                u[t] = acc;
            }
            let mut d = self.data[i * (w + 1)] - sigma;
            for t in 0..width {
                let j = lo + t;
                let lij = u[t] / piv[j % (w + 1)];
                // store L[i][j] at column offset j - i + w
                lrows[slot * w + (j + w - i)] = lij;
                d -= u[t] * lij;
            }
            if d.abs() < pivmin {
                d = -pivmin;
            }
            if d < 0.0 {
                neg += 1;
            }
            piv[slot] = d;
        }
        neg
    }

    /// Cholesky factor of `A − σI`; fails unless that matrix is positive
    /// definite.
    pub fn cholesky(&self, sigma: f64) -> Result<BandCholesky> {
        let (n, w) = (self.n, self.w);
        // factor stored like self: l[i*(w+1)+k] = L[i][i-k]
        let mut l = self.data.clone();
        for i in 0..n {
            l[i * (w + 1)] -= sigma;
        }
        for i in 0..n {
            let lo = i.saturating_sub(w);
            for j in lo..=i {
                let mut acc = l[i * (w + 1) + (i - j)];
                let kl = lo.max(j.saturating_sub(w));
                // both rows are stored with decreasing column index
                let ri = &l[i * (w + 1) + (i - j + 1)..i * (w + 1) + (i - kl) + 1];
                let rj = &l[j * (w + 1) + 1..j * (w + 1) + (j - kl) + 1];
                acc -= dot(ri, rj);
                if j == i {
                    if !(acc > 0.0) {
                        return Err(Error::no_convergence(format!(
                            "A − σI is not positive definite (σ = {sigma}, pivot {i} = {acc:e})"
                        )));
                    }
                    l[i * (w + 1)] = acc.sqrt();
                } else {
                    l[i * (w + 1) + (i - j)] = acc / l[j * (w + 1)];
                }
            }
        }
        Ok(BandCholesky { n, w, l })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four accumulators so the loop vectorises
    let mut acc = [0.0f64; 4];
    let (ca, ra) = a.split_at(a.len() / 4 * 4);
    let (cb, rb) = b.split_at(ca.len());
    for (x, y) in ca.chunks_exact(4).zip(cb.chunks_exact(4)) {
        for l in 0..4 {
            acc[l] += x[l] * y[l];
        }
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    w: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    /// Solves `(A − σI) x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, w) = (self.n, self.w);
        for i in 0..n {
            let mut acc = b[i];
            for k in 1..=w.min(i) {
                acc -= self.l[i * (w + 1) + k] * b[i - k];
            }
            b[i] = acc / self.l[i * (w + 1)];
        }
        for i in (0..n).rev() {
            let x = b[i] / self.l[i * (w + 1)];
            b[i] = x;
            for k in 1..=w.min(i) {
                b[i - k] -= self.l[i * (w + 1) + k] * x;
            }
        }
    }
}
