//! The cubic Blaschke product `f_t(z) = e^{2πit} z² (z−3)/(1−3z)`, whose
//! restriction to the unit circle is a critical circle map with a double
//! critical point at `z = 1`.
//!
//! Angles are in turns. The circle restriction has the closed-form lift
//! `F(x) = x + t − β(2πx)/π` with `β(θ) = atan2(sin θ / 3, 1 − cos θ / 3)`,
//! continuous in `x` with `F(x+1) = F(x) + 1`, so no branch tracking is needed.

use crate::contfrac::{convergents, CFExpansion, ContFracError};
use crate::scalar::Real;
use num_complex::Complex;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BlaschkeError {
    #[error("z = 1/3 is the pole of the Blaschke product")]
    Pole,
    #[error("non-finite value while iterating the circle lift")]
    NonFinite,
    #[error("lift is not monotone at x = {x}")]
    NotMonotone { x: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("inverse step failed to bracket y = {y}")]
    Bracketing { y: f64 },
    #[error(transparent)]
    ContFrac(#[from] ContFracError),
}

/// Degree-1 lift of a circle map, in turns.
pub trait CircleLift<T: Real> {
    fn lift(&self, x: T) -> T;
}

/// `f_t` for a parameter `t ∈ [0,1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlaschkeModel<T: Real> {
    t: T,
    lambda: Complex<T>,
}

impl<T: Real> BlaschkeModel<T> {
    /// Parameters outside `[0,1)` are reduced mod 1.
    pub fn new(t: T) -> Self {
        let t = t - t.floor();
        let angle = T::TAU() * t;
        BlaschkeModel { t, lambda: Complex::new(angle.cos(), angle.sin()) }
    }

    pub fn t(&self) -> T {
        self.t
    }

    pub fn lambda(&self) -> Complex<T> {
        self.lambda
    }

    fn check_pole(z: Complex<T>) -> Result<Complex<T>, BlaschkeError> {
        let den = Complex::new(T::one(), T::zero()) - z * T::lit(3.0);
        if den.norm_sqr() == T::zero() {
            Err(BlaschkeError::Pole)
        } else {
            Ok(den)
        }
    }

    pub fn eval(&self, z: Complex<T>) -> Result<Complex<T>, BlaschkeError> {
        let den = Self::check_pole(z)?;
        Ok(self.lambda * z * z * (z - T::lit(3.0)) / den)
    }

    /// `f_t'(z) = −6λ z (z−1)² / (1−3z)²`.
    pub fn derivative(&self, z: Complex<T>) -> Result<Complex<T>, BlaschkeError> {
        let den = Self::check_pole(z)?;
        let w = z - T::one();
        Ok(self.lambda * z * w * w * T::lit(-6.0) / (den * den))
    }

    /// Lift increment of the circle restriction at angle `x`: `F(x) − x − t`.
    #[inline]
    fn twist(x: T) -> T {
        let th = T::TAU() * x;
        let third = T::one() / T::lit(3.0);
        -(th.sin() * third).atan2(T::one() - th.cos() * third) / T::PI()
    }
}

impl<T: Real> CircleLift<T> for BlaschkeModel<T> {
    #[inline]
    fn lift(&self, x: T) -> T {
        x + self.t + Self::twist(x)
    }
}

/// The rigid rotation `x ↦ x + α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidRotation<T: Real> {
    pub alpha: T,
}

impl<T: Real> CircleLift<T> for RigidRotation<T> {
    #[inline]
    fn lift(&self, x: T) -> T {
        x + self.alpha
    }
}

/// Orbit of 0 under a lift, with the fractional part and the integer winding
/// accumulated separately so precision does not degrade with `n`.
#[derive(Debug, Clone, Copy)]
struct LiftOrbit<T> {
    frac: T,
    winding: i64,
}

impl<T: Real> LiftOrbit<T> {
    fn start() -> Self {
        LiftOrbit { frac: T::zero(), winding: 0 }
    }

    #[inline]
    fn step<L: CircleLift<T>>(&mut self, map: &L) -> Result<(), BlaschkeError> {
        let y = map.lift(self.frac);
        if !y.is_finite() {
            return Err(BlaschkeError::NonFinite);
        }
        let k = y.floor();
        self.winding += k.to_i64().ok_or(BlaschkeError::NonFinite)?;
        self.frac = y - k;
        Ok(())
    }

    /// `F^n(0) − n·alpha` as `f64`, combining the integer parts first.
    fn excess(&self, n: u64, alpha: f64) -> f64 {
        let na = n as f64 * alpha;
        let whole = na.floor();
        (self.winding as f64 - whole) + (self.frac.as_f64() - (na - whole))
    }

    fn value_over(&self, n: u64) -> f64 {
        (self.winding as f64 + self.frac.as_f64()) / n as f64
    }
}

/// Birkhoff estimate of a rotation number with its certified error bound
/// `|rho − ρ| < error_bound = 1/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationEstimate {
    pub rho: f64,
    pub error_bound: f64,
    pub n_iter: u64,
}

/// `(F^n(0) − 0)/n` for any degree-1 monotone lift.
pub fn rotation_number_of<T: Real, L: CircleLift<T>>(map: &L, n_iter: u64) -> Result<RotationEstimate, BlaschkeError> {
    if n_iter == 0 {
        return Err(BlaschkeError::InvalidArgument("n_iter must be at least 1".into()));
    }
    let mut orbit = LiftOrbit::start();
    for _ in 0..n_iter {
        orbit.step(map)?;
    }
    Ok(RotationEstimate { rho: orbit.value_over(n_iter), error_bound: 1.0 / n_iter as f64, n_iter })
}

/// Rotation number of the circle restriction of `f_t`.
pub fn rotation_number<T: Real>(t: T, n_iter: u64) -> Result<RotationEstimate, BlaschkeError> {
    rotation_number_of(&BlaschkeModel::new(t), n_iter)
}

/// Check `F(x_{i+1}) ≥ F(x_i)` and `F(x+1) = F(x) + 1` on a uniform grid.
pub fn check_lift<T: Real, L: CircleLift<T>>(map: &L, samples: usize) -> Result<(), BlaschkeError> {
    let mut prev = map.lift(T::zero());
    for i in 1..=samples {
        let x = T::from_count(i) / T::from_count(samples);
        let y = map.lift(x);
        if !y.is_finite() {
            return Err(BlaschkeError::NonFinite);
        }
        if y < prev {
            return Err(BlaschkeError::NotMonotone { x: x.as_f64() });
        }
        prev = y;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Longest orbit used for a single certified comparison.
    pub max_orbit: u64,
    pub max_bisections: u32,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { max_orbit: 100_000_000, max_bisections: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum SolveStatus {
    Converged,
    /// The target is rational: the whole interval `[t_lo, t_hi]` (sampled
    /// estimate) has this rotation number.
    Plateau {
        p: u64,
        q: u64,
        t_lo: f64,
        t_hi: f64,
    },
    BudgetExhausted,
}

/// Result of solving `ρ(t) = alpha` by bisection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationSolve {
    pub t: f64,
    pub rho_achieved: f64,
    /// Certified bound on `|ρ(t) − alpha|`.
    pub residual: f64,
    /// Total lift evaluations.
    pub iterations: u64,
    pub bracket: (f64, f64),
    pub status: SolveStatus,
}

impl RotationSolve {
    pub fn warning(&self) -> Option<String> {
        match &self.status {
            SolveStatus::Plateau { p, q, .. } => {
                Some(format!("rotation number {p}/{q} is rational: mode-locked on an interval of parameters"))
            }
            SolveStatus::BudgetExhausted => Some("iteration budget exhausted".into()),
            SolveStatus::Converged => None,
        }
    }
}

enum Comparison {
    Above,
    Below,
    Within { estimate: f64, n: u64 },
    Unresolved { estimate: f64, n: u64 },
}

/// Decide the sign of `ρ(t) − alpha`, doubling the orbit length until
/// `|F^n(0) − nα| ≥ 1` or `n` reaches `need` (then `|ρ − α| < 2/n`).
fn compare<T: Real>(t: T, alpha: f64, need: u64, cap: u64, work: &mut u64) -> Result<Comparison, BlaschkeError> {
    let model = BlaschkeModel::new(t);
    let top = need.min(cap);
    let mut orbit = LiftOrbit::start();
    let mut n = 0u64;
    let mut next = 64u64.min(top);
    loop {
        while n < next {
            orbit.step(&model)?;
            n += 1;
        }
        *work += n;
        let e = orbit.excess(n, alpha);
        if e >= 1.0 {
            return Ok(Comparison::Above);
        }
        if e <= -1.0 {
            return Ok(Comparison::Below);
        }
        if n >= top {
            let estimate = orbit.value_over(n);
            return Ok(if n >= need {
                Comparison::Within { estimate, n }
            } else {
                Comparison::Unresolved { estimate, n }
            });
        }
        next = (next * 2).min(top);
    }
}

/// Rational `p/q` with `q ≤ 10⁴` equal to `alpha` up to rounding, if any.
fn exact_rational(alpha: f64) -> Option<(u64, u64)> {
    let tol = 8.0 * f64::EPSILON;
    for q in 1..=10_000u64 {
        let p = (alpha * q as f64).round();
        if (p / q as f64 - alpha).abs() <= tol && p >= 0.0 {
            return Some((p as u64, q));
        }
    }
    None
}

/// Sampled extremes of `F_t^q(x) − x − p` over `x ∈ [0,1)`.
fn periodic_gap<T: Real>(t: T, p: u64, q: u64, samples: usize) -> (f64, f64) {
    let model = BlaschkeModel::new(t);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..samples {
        let x0 = T::from_count(i) / T::from_count(samples);
        let mut x = x0;
        for _ in 0..q {
            x = model.lift(x);
        }
        let g = (x - x0).as_f64() - p as f64;
        lo = lo.min(g);
        hi = hi.max(g);
    }
    (lo, hi)
}

/// Solve `ρ(t) = alpha` for `t ∈ [0,1]`, relying on monotonicity of
/// `t ↦ ρ(t)`. The residual is certified by the `1/n` bound.
pub fn solve_parameter<T: Real>(alpha: T, tol: T, opts: SolveOptions) -> Result<RotationSolve, BlaschkeError> {
    let a = alpha.as_f64();
    let tol_f = tol.as_f64();
    if !(a > 0.0 && a < 1.0) {
        return Err(BlaschkeError::InvalidArgument(format!("alpha = {a} is not in (0,1)")));
    }
    if !(tol_f > 0.0) {
        return Err(BlaschkeError::InvalidArgument("tol must be positive".into()));
    }
    if let Some((p, q)) = exact_rational(a) {
        return solve_plateau::<T>(p, q, opts);
    }
    let need = (2.0 / tol_f).ceil() as u64;
    let (mut lo, mut hi) = (T::zero(), T::one());
    let mut work = 0u64;
    let mut best: Option<(T, f64, u64)> = None;
    for _ in 0..opts.max_bisections {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        match compare(mid, a, need, opts.max_orbit, &mut work)? {
            Comparison::Above => hi = mid,
            Comparison::Below => lo = mid,
            Comparison::Within { estimate, n } => {
                let residual = (estimate - a).abs() + 1.0 / n as f64;
                return Ok(RotationSolve {
                    t: mid.as_f64(),
                    rho_achieved: estimate,
                    residual,
                    iterations: work,
                    bracket: (lo.as_f64(), hi.as_f64()),
                    status: SolveStatus::Converged,
                });
            }
            Comparison::Unresolved { estimate, n } => {
                best = Some((mid, estimate, n));
                break;
            }
        }
    }
    let (t, rho, n) = best.unwrap_or(((lo + hi) / T::lit(2.0), f64::NAN, 0));
    let residual = if n > 0 { (rho - a).abs() + 1.0 / n as f64 } else { f64::INFINITY };
    Ok(RotationSolve {
        t: t.as_f64(),
        rho_achieved: rho,
        residual,
        iterations: work,
        bracket: (lo.as_f64(), hi.as_f64()),
        status: SolveStatus::BudgetExhausted,
    })
}

fn solve_plateau<T: Real>(p: u64, q: u64, opts: SolveOptions) -> Result<RotationSolve, BlaschkeError> {
    const SAMPLES: usize = 512;
    let mut work = 0u64;
    // max_x G is increasing in t and crosses 0 at the left end of the plateau
    let edge = |use_max: bool, work: &mut u64| {
        let (mut lo, mut hi) = (T::zero(), T::one());
        for _ in 0..opts.max_bisections.min(60) {
            let mid = (lo + hi) / T::lit(2.0);
            let (gmin, gmax) = periodic_gap(mid, p, q, SAMPLES);
            *work += SAMPLES as u64 * q;
            let g = if use_max { gmax } else { gmin };
            if g >= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        ((lo + hi) / T::lit(2.0)).as_f64()
    };
    let t_lo = edge(true, &mut work);
    let t_hi = edge(false, &mut work);
    let t = T::from_f64(0.5 * (t_lo + t_hi)).unwrap();
    let n = 1u64 << 16;
    let est = rotation_number(t, n)?;
    work += n;
    let target = p as f64 / q as f64;
    Ok(RotationSolve {
        t: t.as_f64(),
        rho_achieved: est.rho,
        residual: (est.rho - target).abs() + est.error_bound,
        iterations: work,
        bracket: (t_lo, t_hi),
        status: SolveStatus::Plateau { p, q, t_lo, t_hi },
    })
}

/// A point `x_j` of the circle with `f^j(x_j) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionPoint {
    pub j: u64,
    /// Angle in turns, in `[0,1)`.
    pub theta: f64,
    pub point: (f64, f64),
    /// `|f^j(point) − 1|` evaluated with the complex formula.
    pub forward_residual: f64,
}

/// Solve `F(x) ≡ y (mod 1)` by bisection on the lift.
fn inverse_step<T: Real>(model: &BlaschkeModel<T>, y: T, tol: T) -> Result<T, BlaschkeError> {
    // |F(x) − x − t| < 0.11, so the preimage lies within a quarter turn of y − t
    let c = y - model.t();
    let mut lo = c - T::lit(0.25);
    let mut hi = c + T::lit(0.25);
    if !(model.lift(lo) <= y && model.lift(hi) >= y) {
        return Err(BlaschkeError::Bracketing { y: y.as_f64() });
    }
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            break;
        }
        if model.lift(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = (lo + hi) / T::lit(2.0);
    Ok(x - x.floor())
}

fn forward_residual<T: Real>(model: &BlaschkeModel<T>, theta: T, j: u64) -> Result<T, BlaschkeError> {
    let ang = T::TAU() * theta;
    let mut z = Complex::new(ang.cos(), ang.sin());
    for _ in 0..j {
        z = model.eval(z)?;
        // stay on the circle: |f(z)| = 1 there, renormalize rounding drift
        z = z / z.norm();
    }
    Ok((z - Complex::new(T::one(), T::zero())).norm())
}

/// Backward orbit `x_0 = 1, x_1, ..., x_{count−1}` of the critical value
/// preimages, each inverse step solved to `tol / 16` in turns.
pub fn preimage_orbit<T: Real>(
    model: &BlaschkeModel<T>,
    count: u64,
    tol: T,
) -> Result<Vec<PartitionPoint>, BlaschkeError> {
    if !(tol > T::zero()) {
        return Err(BlaschkeError::InvalidArgument("tol must be positive".into()));
    }
    let step_tol = tol / T::lit(16.0);
    let mut out = Vec::with_capacity(count as usize);
    let mut theta = T::zero();
    for j in 0..count {
        if j > 0 {
            theta = inverse_step(model, theta, step_tol)?;
        }
        let ang = T::TAU() * theta;
        out.push(PartitionPoint {
            j,
            theta: theta.as_f64(),
            point: (ang.cos().as_f64(), ang.sin().as_f64()),
            forward_residual: forward_residual(model, theta, j)?.as_f64(),
        });
    }
    Ok(out)
}

/// The single point `x_j`.
pub fn preimage_point<T: Real>(model: &BlaschkeModel<T>, j: u64, tol: T) -> Result<PartitionPoint, BlaschkeError> {
    Ok(preimage_orbit(model, j + 1, tol)?.pop().unwrap())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionRow {
    pub n: usize,
    pub q: u64,
    pub theta: f64,
    /// Chord length `|x_{q_n} − 1|`.
    pub length: f64,
    /// `log(ℓ_n / ℓ_{n+1})`; absent on the last row.
    pub log_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionLengths {
    pub rows: Vec<PartitionRow>,
    pub min_log_ratio: f64,
    pub max_log_ratio: f64,
}

/// Closest-return lengths `ℓ_n = |x_{q_n} − 1|` for `n = 1..=n_max`.
pub fn partition_lengths<T: Real>(
    model: &BlaschkeModel<T>,
    alpha: &CFExpansion,
    n_max: usize,
    tol: T,
) -> Result<PartitionLengths, BlaschkeError> {
    partition_lengths_from(model, alpha, 1, n_max, tol)
}

/// As [`partition_lengths`] restricted to levels `n_min..=n_max`.
pub fn partition_lengths_from<T: Real>(
    model: &BlaschkeModel<T>,
    alpha: &CFExpansion,
    n_min: usize,
    n_max: usize,
    tol: T,
) -> Result<PartitionLengths, BlaschkeError> {
    if n_min == 0 || n_max < n_min {
        return Err(BlaschkeError::InvalidArgument("need 1 <= n_min <= n_max".into()));
    }
    let cs = convergents(alpha, n_max)?;
    let q_top = cs[n_max - 1]
        .q
        .to_u64()
        .filter(|&q| q <= 50_000_000)
        .ok_or_else(|| BlaschkeError::InvalidArgument("q_n exceeds the preimage budget".into()))?;
    let orbit = preimage_orbit(model, q_top + 1, tol)?;
    let mut rows: Vec<PartitionRow> = cs[n_min - 1..]
        .iter()
        .map(|c| {
            let q = c.q.to_u64().unwrap();
            let pt = &orbit[q as usize];
            let length = ((pt.point.0 - 1.0).powi(2) + pt.point.1.powi(2)).sqrt();
            PartitionRow { n: c.n, q, theta: pt.theta, length, log_ratio: None }
        })
        .collect();
    for i in 0..rows.len().saturating_sub(1) {
        rows[i].log_ratio = Some((rows[i].length / rows[i + 1].length).ln());
    }
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.log_ratio).collect();
    Ok(PartitionLengths {
        min_log_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        max_log_ratio: ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type C = Complex<f64>;
    const GOLDEN: f64 = 0.618_033_988_749_894_8;

    fn golden_model() -> BlaschkeModel<f64> {
        static T: std::sync::OnceLock<f64> = std::sync::OnceLock::new();
        let t = *T.get_or_init(|| solve_parameter(GOLDEN, 1e-7, SolveOptions::default()).unwrap().t);
        BlaschkeModel::new(t)
    }

    #[test]
    fn eval_examples() {
        let m = BlaschkeModel::new(0.3);
        assert!((m.eval(C::new(1.0, 0.0)).unwrap() - m.lambda()).norm() < 1e-15);
        assert_eq!(m.eval(C::new(0.0, 0.0)).unwrap(), C::new(0.0, 0.0));
        assert_eq!(m.eval(C::new(3.0, 0.0)).unwrap().norm(), 0.0);
        assert_eq!(m.eval(C::new(1.0 / 3.0, 0.0)), Err(BlaschkeError::Pole));
        assert!((m.lambda().norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn derivative_matches_central_difference() {
        let m = BlaschkeModel::new(0.17);
        assert!(m.derivative(C::new(1.0, 0.0)).unwrap().norm() < 1e-15);
        assert_eq!(m.derivative(C::new(0.0, 0.0)).unwrap().norm(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = 1e-5;
        let mut n = 0;
        while n < 100 {
            let z = C::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            if (z - C::new(1.0 / 3.0, 0.0)).norm() < 0.3 {
                continue;
            }
            let fd = (m.eval(z + h).unwrap() - m.eval(z - h).unwrap()) / (2.0 * h);
            let an = m.derivative(z).unwrap();
            assert!((fd - an).norm() <= 1e-6 * an.norm().max(1.0), "z={z} fd={fd} an={an}");
            n += 1;
        }
    }

    #[test]
    fn modulus_one_on_circle() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let m = BlaschkeModel::new(rng.gen::<f64>());
            let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let w = m.eval(C::from_polar(1.0, th)).unwrap();
            assert!((w.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lift_matches_complex_argument() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let m = BlaschkeModel::new(rng.gen::<f64>());
            let x: f64 = rng.gen();
            let w = m.eval(C::from_polar(1.0, std::f64::consts::TAU * x)).unwrap();
            let turns = w.arg() / std::f64::consts::TAU;
            let d = m.lift(x) - turns;
            assert!((d - d.round()).abs() < 1e-12);
        }
        let m = BlaschkeModel::new(0.25);
        assert_eq!(m.lift(0.0), 0.25);
        // double critical point: F'(0) = 0 and F''(0) = 0
        let h = 1e-5;
        assert!((m.lift(h) - m.lift(-h)) / (2.0 * h) < 1e-7);
    }

    #[test]
    fn lift_periodic_and_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let m = BlaschkeModel::new(rng.gen::<f64>());
            let x: f64 = rng.gen_range(-3.0..3.0);
            assert!((m.lift(x + 1.0) - m.lift(x) - 1.0).abs() < 1e-12);
            check_lift(&m, 1000).unwrap();
        }
        check_lift(&BlaschkeModel::new(0.4f32), 1000).unwrap();
    }

    #[test]
    fn rotation_number_examples() {
        let r = rotation_number(0.0, 1000).unwrap();
        assert_eq!(r.rho, 0.0);
        assert_eq!(r.error_bound, 1e-3);
        let rot = RigidRotation { alpha: GOLDEN };
        let e = rotation_number_of(&rot, 10_000).unwrap();
        assert!((e.rho - GOLDEN).abs() < e.error_bound);
        assert!(rotation_number(0.5, 0).is_err());
    }

    #[test]
    fn rotation_number_nondecreasing_in_t() {
        let n = 4096;
        let rhos: Vec<f64> = (0..100).map(|i| rotation_number(i as f64 / 100.0, n).unwrap().rho).collect();
        for w in rhos.windows(2) {
            assert!(w[1] >= w[0], "{} < {}", w[1], w[0]);
        }
        assert!(rhos[99] > 0.9);
    }

    #[test]
    fn solve_golden_closed_loop() {
        let s = solve_parameter(GOLDEN, 1e-7, SolveOptions::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Converged);
        assert!(s.residual <= 1e-7);
        assert!(s.t > 0.0 && s.t < 1.0);
        assert!(s.bracket.0 <= s.t && s.t <= s.bracket.1);
        let check = rotation_number(s.t, 10_000_000).unwrap();
        assert!((check.rho - GOLDEN).abs() < 1e-7 + check.error_bound);
    }

    #[test]
    fn solve_small_alpha_sequence() {
        let ts: Vec<f64> = [0.2, 0.1, 0.05, 0.02]
            .iter()
            .map(|&a: &f64| {
                let a = a + 1e-3 * std::f64::consts::SQRT_2;
                solve_parameter(a, 1e-4, SolveOptions::default()).unwrap().t
            })
            .collect();
        for w in ts.windows(2) {
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn solve_rational_reports_plateau() {
        let s = solve_parameter(0.5, 1e-6, SolveOptions::default()).unwrap();
        match s.status {
            SolveStatus::Plateau { p, q, t_lo, t_hi } => {
                assert_eq!((p, q), (1, 2));
                assert!(t_hi > t_lo);
                assert!(t_lo <= s.t && s.t <= t_hi);
                for t in [t_lo + 0.1 * (t_hi - t_lo), t_hi - 0.1 * (t_hi - t_lo)] {
                    assert!((rotation_number(t, 100_000).unwrap().rho - 0.5).abs() < 1e-4);
                }
            }
            other => panic!("expected plateau, got {other:?}"),
        }
        assert!(s.warning().is_some());
    }

    #[test]
    fn solve_budget_exhaustion() {
        let opts = SolveOptions { max_orbit: 1000, max_bisections: 200 };
        let s = solve_parameter(GOLDEN, 1e-9, opts).unwrap();
        assert_eq!(s.status, SolveStatus::BudgetExhausted);
        assert!(s.bracket.0 < s.bracket.1);
    }

    #[test]
    fn preimage_examples() {
        let m = golden_model();
        let x0 = preimage_point(&m, 0, 1e-12).unwrap();
        assert_eq!((x0.theta, x0.point), (0.0, (1.0, 0.0)));
        let x1 = preimage_point(&m, 1, 1e-12).unwrap();
        assert!(x1.forward_residual <= 1e-10);
    }

    #[test]
    fn preimages_ordered_like_rotation() {
        let m = golden_model();
        let orbit = preimage_orbit(&m, 89, 1e-13).unwrap();
        for q in [5usize, 8, 13, 21, 34, 55, 89] {
            let mut model_order: Vec<usize> = (0..q).collect();
            model_order.sort_by(|&a, &b| orbit[a].theta.partial_cmp(&orbit[b].theta).unwrap());
            let mut rot_order: Vec<usize> = (0..q).collect();
            let rot = |j: usize| {
                let v = -(j as f64) * GOLDEN;
                v - v.floor()
            };
            rot_order.sort_by(|&a, &b| rot(a).partial_cmp(&rot(b)).unwrap());
            assert_eq!(model_order, rot_order, "q = {q}");
        }
    }

    #[test]
    fn closest_returns() {
        let m = golden_model();
        let orbit = preimage_orbit(&m, 56, 1e-13).unwrap();
        let fib = [1usize, 2, 3, 5, 8, 13, 21, 34, 55];
        for &q in &fib[..8] {
            assert!(orbit[q].forward_residual < 1e-6, "q={q} {}", orbit[q].forward_residual);
            let signed = |th: f64| if th > 0.5 { th - 1.0 } else { th };
            let xq = signed(orbit[q].theta);
            for xj in &orbit[1..q] {
                let s = signed(xj.theta);
                let between = if xq > 0.0 { s > 0.0 && s < xq } else { s < 0.0 && s > xq };
                assert!(!between, "x_{} between 1 and x_{q}", xj.j);
            }
        }
    }

    #[test]
    fn golden_partition_lengths() {
        let m = golden_model();
        let pl = partition_lengths_from(&m, &CFExpansion::golden(), 3, 10, 1e-13).unwrap();
        for w in pl.rows.windows(2) {
            assert!(w[1].length < w[0].length);
        }
        assert!(pl.min_log_ratio > 0.0);
        // baseline from the first run; guarded to 20%
        let spread = pl.max_log_ratio / pl.min_log_ratio;
        assert!((spread / GOLDEN_SPREAD_BASELINE - 1.0).abs() < 0.2, "spread {spread}");
    }

    /// max/min of the golden log-ratios for n = 3..10 at the first run.
    const GOLDEN_SPREAD_BASELINE: f64 = 1.1107;

    proptest! {
        #[test]
        fn lift_degree_one(t in 0.0f64..1.0, x in -5.0f64..5.0) {
            let m = BlaschkeModel::new(t);
            prop_assert!((m.lift(x + 1.0) - m.lift(x) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn circle_preserved(t in 0.0f64..1.0, th in 0.0f64..std::f64::consts::TAU) {
            let m = BlaschkeModel::new(t);
            prop_assert!((m.eval(C::from_polar(1.0, th)).unwrap().norm() - 1.0).abs() < 1e-12);
        }
    }
}
