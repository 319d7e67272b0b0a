//! Hamiltonian flow of the model corner symbol on `S^{d-1} × S^{d-1}`.
//!
//! For `p_ψe(x, ξ) = |x||ξ|` the directions `ω = x/|x|`, `θ = ξ/|ξ|` obey
//!
//! ```text
//! ω' = −c ω + θ
//! θ' = −ω + c θ        c = <ω, θ> (conserved)
//! ```
//!
//! Componentwise this is `υ' = A υ` with `A = [[−c, 1], [−1, c]]`, whose
//! eigenvalues are `±i √(1 − c²)`. Every state with `c² < 1` is therefore
//! periodic with period `2π / √(1 − c²)`; states with `c = ±1` are fixed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::symbols::{norm_sq, unit};
use crate::{Error, Result};

/// Allowed deviation of `|ω|`, `|θ|` from one for validated states.
pub const UNIT_TOLERANCE: f64 = 1e-12;

/// Default local-error tolerance for [`flow_numeric`].
pub const DEFAULT_FLOW_TOL: f64 = 1e-9;

/// A point `(ω, θ)` of the corner.
#[derive(Debug, Clone, PartialEq)]
pub struct CornerState {
    omega: Vec<f64>,
    theta: Vec<f64>,
}

impl CornerState {
    /// Validates that both vectors share a dimension `d >= 1` and have unit
    /// length to within [`UNIT_TOLERANCE`].
    pub fn new(omega: Vec<f64>, theta: Vec<f64>) -> Result<Self> {
        if omega.is_empty() || omega.len() != theta.len() {
            return Err(Error::invalid(format!(
                "corner state needs two vectors of equal dimension >= 1, got {} and {}",
                omega.len(),
                theta.len()
            )));
        }
        for (name, v) in [("omega", &omega), ("theta", &theta)] {
            let n = norm_sq(v).sqrt();
            if !((n - 1.0).abs() <= UNIT_TOLERANCE) {
                return Err(Error::invalid(format!("{name} is not a unit vector (|{name}| = {n})")));
            }
        }
        Ok(Self { omega, theta })
    }

    /// Projects both vectors onto the unit sphere first.
    pub fn normalized(omega: &[f64], theta: &[f64]) -> Result<Self> {
        if norm_sq(omega) == 0.0 || norm_sq(theta) == 0.0 {
            return Err(Error::invalid("cannot normalise a zero vector"));
        }
        Self::new(unit(omega), unit(theta))
    }

    /// Uniform sample from the product of unit spheres (normalised Gaussians).
    pub fn sample<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("corner states need d >= 1"));
        }
        loop {
            let w: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let t: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            if norm_sq(&w) > 1e-300 && norm_sq(&t) > 1e-300 {
                return Self::normalized(&w, &t);
            }
        }
    }

    /// A state on `S^{d-1} × S^{d-1}` with prescribed `c = <ω, θ>`:
    /// `ω = e_1`, `θ = c e_1 + √(1 − c²) e_2`. Needs `d >= 2` unless `c = ±1`.
    pub fn with_angle(d: usize, c: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&c) {
            return Err(Error::invalid(format!("c must lie in [-1, 1], got {c}")));
        }
        if d == 0 || (d == 1 && c.abs() != 1.0) {
            return Err(Error::invalid(format!("no state with c = {c} exists for d = {d}")));
        }
        let mut omega = vec![0.0; d];
        let mut theta = vec![0.0; d];
        omega[0] = 1.0;
        theta[0] = c;
        if d > 1 {
            theta[1] = (1.0 - c * c).sqrt();
        }
        Self::new(omega, theta)
    }

    fn from_raw(omega: Vec<f64>, theta: Vec<f64>) -> Self {
        Self { omega, theta }
    }

    pub fn dimension(&self) -> usize {
        self.omega.len()
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Sup-norm distance over all `2d` coordinates.
    pub fn distance(&self, other: &CornerState) -> f64 {
        self.omega
            .iter()
            .chain(&self.theta)
            .zip(other.omega.iter().chain(&other.theta))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `max(| |ω| − 1 |, | |θ| − 1 |)`. Zero up to rounding for validated
    /// states; numeric trajectories report their drift here.
    pub fn norm_defect(&self) -> f64 {
        let a = (norm_sq(&self.omega).sqrt() - 1.0).abs();
        let b = (norm_sq(&self.theta).sqrt() - 1.0).abs();
        a.max(b)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `c = <ω, θ>`, clamped to `[-1, 1]`.
pub fn conserved_angle(z: &CornerState) -> f64 {
    dot(&z.omega, &z.theta).clamp(-1.0, 1.0)
}

/// Right-hand side `(−c ω + θ, −ω + c θ)` with `c = <ω, θ>`.
pub fn hamiltonian_rhs(z: &CornerState) -> (Vec<f64>, Vec<f64>) {
    let c = conserved_angle(z);
    let dw = z.omega.iter().zip(&z.theta).map(|(w, t)| -c * w + t).collect();
    let dt = z.omega.iter().zip(&z.theta).map(|(w, t)| -w + c * t).collect();
    (dw, dt)
}

/// Exact flow: applies `exp(tA)` to every pair `(ω_i, θ_i)`.
///
/// For `c² < 1`, `exp(tA) = cos(νt) I + sin(νt)/ν · A` with `ν = √(1 − c²)`;
/// for `c² = 1`, `A² = 0` and `exp(tA) = I + tA` (which fixes `(ω, ±ω)`).
pub fn flow_closed(z: &CornerState, t: f64) -> CornerState {
    let c = conserved_angle(z);
    let nu2 = 1.0 - c * c;
    let (a, b) = if nu2 > 0.0 {
        let nu = nu2.sqrt();
        ((nu * t).cos(), (nu * t).sin() / nu)
    } else {
        (1.0, t)
    };
    // exp(tA) = [[a − b c, b], [−b, a + b c]]
    let mut omega = Vec::with_capacity(z.dimension());
    let mut theta = Vec::with_capacity(z.dimension());
    for (&w, &th) in z.omega.iter().zip(&z.theta) {
        omega.push((a - b * c) * w + b * th);
        theta.push(-b * w + (a + b * c) * th);
    }
    CornerState::from_raw(omega, theta)
}

/// Minimal positive return time, following the fixed-point convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReturnTime {
    /// `2π / √(1 − c²)` for `c² < 1`.
    Period(f64),
    /// `c² = 1`: the state is stationary; its return time is reported as 0.
    FixedPoint,
    /// The state never comes back.
    Never,
}

impl ReturnTime {
    /// Numeric value: the period, `0` for fixed points, `+∞` for `Never`.
    pub fn value(self) -> f64 {
        match self {
            ReturnTime::Period(p) => p,
            ReturnTime::FixedPoint => 0.0,
            ReturnTime::Never => f64::INFINITY,
        }
    }

    pub fn is_fixed_point(self) -> bool {
        matches!(self, ReturnTime::FixedPoint)
    }
}

/// Return time of the model corner flow.
pub fn return_time(z: &CornerState) -> ReturnTime {
    let c = conserved_angle(z);
    if c * c == 1.0 {
        ReturnTime::FixedPoint
    } else {
        ReturnTime::Period(2.0 * std::f64::consts::PI / (1.0 - c * c).sqrt())
    }
}

// Dormand–Prince 5(4) tableau; the system is autonomous so the nodes `c_i`
// are not needed.
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus the embedded fourth-order ones.
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Vector field on raw `R^{2d}` coordinates `[ω, θ]` with `c` held at its
/// initial value. Nothing is renormalised.
///
/// Recomputing `c = ⟨ω, θ⟩` from the current point would give an ambient
/// extension with `d|ω|²/dt = 2c(1 − |ω|²)`, which repels from one of the
/// two unit spheres at rate `2|c|`; roundoff would then grow like
/// `e^{2|c|t}`. With `c` fixed the system is linear and neutrally stable.
fn raw_rhs(c: f64, y: &[f64], out: &mut [f64]) {
    let d = y.len() / 2;
    let (w, t) = y.split_at(d);
    for i in 0..d {
        out[i] = -c * w[i] + t[i];
        out[d + i] = -w[i] + c * t[i];
    }
}

/// Statistics of one adaptive integration.
#[derive(Debug, Clone, Copy, Default)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Adaptive Dormand–Prince integration over `[0, t]` (or `[t, 0]`),
/// controlling the local error per unit time: a step of size `h` is
/// accepted when its error estimate is at most `tol · |h|`.
fn integrate(c: f64, y0: &[f64], t: f64, tol: f64) -> Result<(Vec<f64>, StepStats)> {
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut stats = StepStats::default();
    if t == 0.0 {
        return Ok((y, stats));
    }
    let dir = t.signum();
    let span = t.abs();
    let mut done = 0.0;
    let mut h = (0.1f64).min(span);
    let mut k = vec![vec![0.0; n]; 7];
    let mut stage = vec![0.0; n];
    raw_rhs(c, &y, &mut k[0]);

    while done < span {
        let last = span - done <= h + 1e-12 * span;
        if last {
            h = span - done;
        }
        if !last && h < 1e-14 * span.max(1.0) {
            return Err(Error::no_convergence(format!(
                "step size underflow at t = {} (h = {h:e})",
                dir * done
            )));
        }
        let hs = dir * h;
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += hs * DP_A[s][j] * kj[i];
                }
                stage[i] = acc;
            }
            raw_rhs(c, &stage, &mut k[s]);
        }
        // stage now holds the 5th-order solution (FSAL row)
        let err = (0..n)
            .map(|i| (k.iter().zip(DP_E).map(|(kj, e)| e * kj[i]).sum::<f64>() * hs).abs())
            .fold(0.0, f64::max);
        let target = tol * h;
        if err <= target {
            // land exactly on `span` so roundoff cannot leave a sliver step
            done = if last { span } else { done + h };
            y.copy_from_slice(&stage);
            k.swap(0, 6);
            stats.accepted += 1;
        } else {
            stats.rejected += 1;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * (target / err).powf(0.25)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    Ok((y, stats))
}

/// Numerical solution of the corner system at time `t` with local error per
/// unit time at most `tol`. The state is not renormalised along the way, so
/// [`CornerState::norm_defect`] of the result measures integrator drift.
pub fn flow_numeric(z: &CornerState, t: f64, tol: f64) -> Result<CornerState> {
    flow_numeric_with_stats(z, t, tol).map(|(s, _)| s)
}

pub fn flow_numeric_with_stats(z: &CornerState, t: f64, tol: f64) -> Result<(CornerState, StepStats)> {
    if !(tol > 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!("need tol > 0 and finite t (tol = {tol}, t = {t})")));
    }
    let d = z.dimension();
    let y0: Vec<f64> = z.omega.iter().chain(&z.theta).copied().collect();
    let (y, stats) = integrate(conserved_angle(z), &y0, t, tol)?;
    Ok((CornerState::from_raw(y[..d].to_vec(), y[d..].to_vec()), stats))
}

/// Numeric trajectory sampled at `samples + 1` equally spaced times in
/// `[0, t]`, integrating segment by segment.
pub fn trajectory_numeric(z: &CornerState, t: f64, tol: f64, samples: usize) -> Result<Vec<(f64, CornerState)>> {
    let samples = samples.max(1);
    let dt = t / samples as f64;
    let mut out = Vec::with_capacity(samples + 1);
    if !(tol > 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!("need tol > 0 and finite t (tol = {tol}, t = {t})")));
    }
    let d = z.dimension();
    let c = conserved_angle(z);
    let mut y: Vec<f64> = z.omega.iter().chain(&z.theta).copied().collect();
    out.push((0.0, z.clone()));
    for i in 1..=samples {
        y = integrate(c, &y, dt, tol)?.0;
        out.push((dt * i as f64, CornerState::from_raw(y[..d].to_vec(), y[d..].to_vec())));
    }
    Ok(out)
}

/// A flow on the corner that knows its own return times.
pub trait CornerFlow {
    fn evolve(&self, z: &CornerState, t: f64) -> CornerState;
    fn return_time(&self, z: &CornerState) -> ReturnTime;
}

/// The exact flow of the model corner symbol `|x||ξ|`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ModelCornerFlow;

impl CornerFlow for ModelCornerFlow {
    fn evolve(&self, z: &CornerState, t: f64) -> CornerState {
        flow_closed(z, t)
    }

    fn return_time(&self, z: &CornerState) -> ReturnTime {
        return_time(z)
    }
}

/// Outcome of a periodic-point census.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureEstimate {
    pub samples: usize,
    /// Samples classified periodic, fixed points included.
    pub periodic: usize,
    pub fixed_points: usize,
    /// Largest distance between a periodic sample and its image after one period.
    pub max_return_gap: f64,
}

impl MeasureEstimate {
    pub fn fraction(&self) -> f64 {
        self.periodic as f64 / self.samples as f64
    }
}

/// Sample `index` of the census drawn from `seed`: one ChaCha stream per
/// index, so the draw does not depend on how samples are partitioned.
pub fn census_sample(d: usize, seed: u64, index: u64) -> Result<CornerState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    CornerState::sample(d, &mut rng)
}

/// Classifies `n_samples` uniform corner points as periodic when the flow
/// brings them back within `tol` (sup norm) at their return time `≤ t_max`.
/// Fixed points count as periodic (return time 0).
pub fn periodic_measure<F: CornerFlow + ?Sized>(
    flow: &F,
    d: usize,
    seed: u64,
    n_samples: usize,
    t_max: f64,
    tol: f64,
) -> Result<MeasureEstimate> {
    if n_samples == 0 {
        return Err(Error::invalid("periodic measure needs at least one sample"));
    }
    if !(tol > 0.0) || !(t_max > 0.0) {
        return Err(Error::invalid("periodic measure needs tol > 0 and t_max > 0"));
    }
    let mut est = MeasureEstimate {
        samples: n_samples,
        periodic: 0,
        fixed_points: 0,
        max_return_gap: 0.0,
    };
    for i in 0..n_samples {
        let z = census_sample(d, seed, i as u64)?;
        match flow.return_time(&z) {
            ReturnTime::FixedPoint => {
                est.periodic += 1;
                est.fixed_points += 1;
            }
            ReturnTime::Period(p) if p <= t_max => {
                let gap = flow.evolve(&z, p).distance(&z);
                if gap <= tol {
                    est.periodic += 1;
                    est.max_return_gap = est.max_return_gap.max(gap);
                }
            }
            ReturnTime::Period(_) | ReturnTime::Never => {}
        }
    }
    Ok(est)
}

/// Fraction of periodic points of the model corner flow in `n_samples`
/// uniform draws on `S^{d-1} × S^{d-1}`.
pub fn periodic_measure_estimate(d: usize, seed: u64, n_samples: usize, t_max: f64, tol: f64) -> Result<f64> {
    periodic_measure(&ModelCornerFlow, d, seed, n_samples, t_max, tol).map(|e| e.fraction())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn st(w: &[f64], t: &[f64]) -> CornerState {
        CornerState::new(w.to_vec(), t.to_vec()).unwrap()
    }

    #[test]
    fn state_validation() {
        assert!(CornerState::new(vec![1.0, 0.0], vec![0.5, 0.5]).is_err());
        assert!(CornerState::new(vec![1.0], vec![0.0, 1.0]).is_err());
        assert!(CornerState::new(vec![], vec![]).is_err());
        assert!(CornerState::normalized(&[3.0, 4.0], &[0.0, 2.0]).is_ok());
        assert!(CornerState::normalized(&[0.0, 0.0], &[0.0, 2.0]).is_err());
        assert!(CornerState::with_angle(1, 0.3).is_err());
        assert!(CornerState::with_angle(1, -1.0).is_ok());
    }

    #[test]
    fn conserved_angle_examples() {
        let s = 0.5f64.sqrt();
        assert!((conserved_angle(&st(&[s, s], &[s, s])) - 1.0).abs() < 1e-15);
        assert_eq!(conserved_angle(&st(&[1.0, 0.0], &[0.0, 1.0])), 0.0);
        let c = conserved_angle(&st(&[1.0, 0.0], &[3f64.sqrt() / 2.0, 0.5]));
        assert!((c - 3f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn rhs_examples() {
        let (dw, dt) = hamiltonian_rhs(&st(&[0.0, 1.0], &[0.0, 1.0]));
        assert_eq!((dw, dt), (vec![0.0, 0.0], vec![0.0, 0.0]));
        let (dw, dt) = hamiltonian_rhs(&st(&[1.0, 0.0], &[0.0, 1.0]));
        assert_eq!(dw, vec![0.0, 1.0]);
        assert_eq!(dt, vec![-1.0, 0.0]);
        // orthogonal in 3d: (θ, −ω)
        let (dw, dt) = hamiltonian_rhs(&st(&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]));
        assert_eq!(dw, vec![1.0, 0.0, 0.0]);
        assert_eq!(dt, vec![0.0, 0.0, -1.0]);
    }

    #[test]
    fn closed_flow_examples() {
        let z = st(&[1.0, 0.0], &[0.0, 1.0]);
        assert_eq!(flow_closed(&z, 0.0), z);
        assert!(flow_closed(&z, 2.0 * PI).distance(&z) < 1e-14);
        let half = flow_closed(&z, PI);
        assert!(half.distance(&st(&[-1.0, 0.0], &[0.0, -1.0])) < 1e-15);

        let c = 3f64.sqrt() / 2.0;
        let y = CornerState::with_angle(3, c).unwrap();
        assert!((return_time(&y).value() - 4.0 * PI).abs() < 1e-12);
        assert!(flow_closed(&y, 4.0 * PI).distance(&y) < 1e-12);
    }

    #[test]
    fn fixed_points() {
        let z = CornerState::with_angle(2, 1.0).unwrap();
        assert_eq!(return_time(&z), ReturnTime::FixedPoint);
        assert_eq!(return_time(&z).value(), 0.0);
        assert!(flow_closed(&z, 17.0).distance(&z) < 1e-15);
        let anti = CornerState::with_angle(2, -1.0).unwrap();
        assert!(flow_closed(&anti, 3.0).distance(&anti) < 1e-15);
        assert!(flow_numeric(&anti, 3.0, 1e-9).unwrap().distance(&anti) < 1e-15);
    }

    #[test]
    fn return_time_examples() {
        assert!((return_time(&CornerState::with_angle(2, 0.0).unwrap()).value() - 2.0 * PI).abs() < 1e-15);
        assert!((return_time(&CornerState::with_angle(2, 3f64.sqrt() / 2.0).unwrap()).value() - 4.0 * PI).abs() < 1e-12);
        assert!(ReturnTime::Never.value().is_infinite());
    }

    #[test]
    fn numeric_flow_examples() {
        let z = st(&[1.0, 0.0], &[0.0, 1.0]);
        assert_eq!(flow_numeric(&z, 0.0, 1e-9).unwrap(), z);
        let back = flow_numeric(&z, 2.0 * PI, 1e-9).unwrap();
        assert!(back.distance(&z) < 1e-7, "{}", back.distance(&z));
        let half = flow_numeric(&z, PI, 1e-9).unwrap();
        assert!(half.distance(&st(&[-1.0, 0.0], &[0.0, -1.0])) < 1e-7);
        assert!(flow_numeric(&z, 1.0, 0.0).is_err());
    }

    #[test]
    fn numeric_flow_runs_backwards() {
        let z = CornerState::with_angle(2, 0.4).unwrap();
        let fwd = flow_numeric(&z, 3.0, 1e-10).unwrap();
        let back = flow_numeric(&fwd, -3.0, 1e-10).unwrap();
        assert!(back.distance(&z) < 1e-8);
        assert!(flow_closed(&z, -3.0).distance(&flow_numeric(&z, -3.0, 1e-10).unwrap()) < 1e-8);
    }

    #[test]
    fn census_is_partition_invariant() {
        let a = census_sample(3, 11, 5).unwrap();
        let b = census_sample(3, 11, 5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, census_sample(3, 11, 6).unwrap());
    }

    #[test]
    fn model_measure_is_one() {
        for d in 1..=3 {
            let f = periodic_measure_estimate(d, 2024, 1000, 1e12, 1e-8).unwrap();
            assert_eq!(f, 1.0, "d = {d}");
        }
    }

    #[test]
    fn degenerate_single_sample() {
        // on S^0 × S^0 every point has c = ±1
        let est = periodic_measure(&ModelCornerFlow, 1, 3, 1, 1.0, 1e-8).unwrap();
        assert_eq!(est.fixed_points, 1);
        assert_eq!(est.fraction(), 1.0);
    }

    struct Drift;
    impl CornerFlow for Drift {
        fn evolve(&self, z: &CornerState, t: f64) -> CornerState {
            flow_closed(z, t * 1.0001)
        }
        fn return_time(&self, _: &CornerState) -> ReturnTime {
            ReturnTime::Never
        }
    }

    #[test]
    fn flow_without_returns_has_measure_zero() {
        let est = periodic_measure(&Drift, 2, 1, 500, 100.0, 1e-8).unwrap();
        assert_eq!(est.fraction(), 0.0);
    }

    #[test]
    fn short_horizon_excludes_long_periods() {
        // t_max below 2π: nothing but fixed points can return
        let est = periodic_measure(&ModelCornerFlow, 2, 9, 200, 6.0, 1e-8).unwrap();
        assert_eq!(est.periodic, est.fixed_points);
    }
}
