use super::fate::OrbitFate;
use super::sampling::{area_fraction_stream, AreaFraction};
use super::DynamicsError;
use crate::scalar::Real;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub scale: usize,
    pub radius: f64,
    pub frac_escaped: f64,
    pub frac_captured: f64,
    pub frac_undecided: f64,
    pub samples: u64,
    pub ci_halfwidth: f64,
}

impl ScanRow {
    fn new(scale: usize, radius: f64, a: &AreaFraction) -> Self {
        ScanRow {
            scale,
            radius,
            frac_escaped: a.escaped,
            frac_captured: a.captured,
            frac_undecided: a.undecided,
            samples: a.samples,
            ci_halfwidth: a.ci_halfwidth,
        }
    }
}

/// Area fractions on balls `B(center, r0·factor^k)`, `k < n_scales`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityScan {
    pub center: (f64, f64),
    pub rows: Vec<ScanRow>,
}

impl DensityScan {
    pub fn radii(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.radius).collect()
    }
}

/// Default iteration budget at radius `r`: `base` down to `2⁻⁸`, doubling
/// with every halving below.
pub fn scan_budget(base: u64, r: f64) -> u64 {
    let floor = 2f64.powi(-8);
    if r >= floor {
        return base;
    }
    let halvings = (floor / r).log2().ceil().min(40.0) as u32;
    base.saturating_mul(1u64 << halvings)
}

/// `fate_fn(z, radius)` receives the current ball radius so that
/// scale-dependent budgets or synthetic sets can be expressed.
pub fn density_scan<T, F>(
    center: Complex<T>,
    r0: T,
    factor: T,
    n_scales: usize,
    fate_fn: F,
    grid_n: usize,
    seed: u64,
) -> Result<DensityScan, DynamicsError>
where
    T: Real,
    F: Fn(Complex<T>, T) -> OrbitFate + Sync,
{
    if !(factor > T::zero() && factor < T::one()) {
        return Err(DynamicsError::InvalidArgument("shrink factor must lie in (0,1)".into()));
    }
    if n_scales < 2 {
        return Err(DynamicsError::InvalidArgument("at least 2 scales are required".into()));
    }
    if !(r0 > T::zero()) {
        return Err(DynamicsError::InvalidArgument("r0 must be positive".into()));
    }
    if grid_n < 16 {
        return Err(DynamicsError::InvalidArgument("grid_n must be at least 16".into()));
    }
    let mut rows = Vec::with_capacity(n_scales);
    let mut r = r0;
    for k in 0..n_scales {
        let f = |z: Complex<T>| fate_fn(z, r);
        let a = area_fraction_stream(center, r, &f, grid_n, seed, (k as u64) << 32);
        rows.push(ScanRow::new(k, r.as_f64(), &a));
        r = r * factor;
    }
    Ok(DensityScan { center: (center.re.as_f64(), center.im.as_f64()), rows })
}

/// Least-squares fit of `log(escaped·πr²)` against `log r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeficiencyFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub n_scales: usize,
}

pub fn deficiency_exponent(scan: &DensityScan) -> Result<DeficiencyFit, DynamicsError> {
    let pts: Vec<(f64, f64)> = scan
        .rows
        .iter()
        .filter(|r| r.frac_escaped > 0.0)
        .map(|r| (r.radius.ln(), (r.frac_escaped * std::f64::consts::PI * r.radius * r.radius).ln()))
        .collect();
    if pts.is_empty() {
        return Err(DynamicsError::NoDeficiency);
    }
    if pts.len() < 3 {
        return Err(DynamicsError::InsufficientScales { found: pts.len() });
    }
    let (slope, intercept, stderr) = linear_fit(&pts);
    Ok(DeficiencyFit { slope, stderr, intercept, n_scales: pts.len() })
}

/// Ordinary least squares `y = a x + b`; returns `(a, b, stderr(a))`.
pub(crate) fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let a = sxy / sxx;
    let b = my - a * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - a * p.0 - b).powi(2)).sum();
    let stderr = if pts.len() > 2 { (rss / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    (a, b, stderr)
}
