//! Hyperbolic metrics on the upper half-plane and on the exterior of the
//! closed unit disk, related by the universal covering `p(w) = e^{−iw}`.
//!
//! Densities use the curvature −1 normalization: `1/Im w` on ℍ,
//! `2/(1−|z|²)` on the unit disk.

use crate::scalar::Real;
use num_complex::Complex;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HyperbolicError {
    #[error("point {0} is not in the upper half-plane")]
    NotInUpperHalfPlane(String),
    #[error("point {0} is not outside the closed unit disk")]
    NotInExterior(String),
    #[error("minimum over deck translates attained at the window edge k = {k}")]
    WindowEdge { k: i64 },
    #[error("domain is not a strict subdomain of the disk exterior")]
    NotStrict,
    #[error("sample {0} is not inside the domain")]
    OffDomain(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HPoint<T: Real> {
    w: Complex<T>,
}

impl<T: Real> HPoint<T> {
    pub fn new(w: Complex<T>) -> Result<Self, HyperbolicError> {
        if w.im > T::zero() && w.re.is_finite() && w.im.is_finite() {
            Ok(HPoint { w })
        } else {
            Err(HyperbolicError::NotInUpperHalfPlane(w.to_string()))
        }
    }

    pub fn w(&self) -> Complex<T> {
        self.w
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExteriorPoint<T: Real> {
    z: Complex<T>,
}

impl<T: Real> ExteriorPoint<T> {
    pub fn new(z: Complex<T>) -> Result<Self, HyperbolicError> {
        if z.norm() > T::one() && z.re.is_finite() && z.im.is_finite() {
            Ok(ExteriorPoint { z })
        } else {
            Err(HyperbolicError::NotInExterior(z.to_string()))
        }
    }

    pub fn z(&self) -> Complex<T> {
        self.z
    }

    /// Principal lift `w = i·Log z`, so `p(w) = e^{−iw} = z` and `Im w = log|z|`.
    pub fn lift(&self) -> HPoint<T> {
        let i = Complex::new(T::zero(), T::one());
        HPoint { w: i * self.z.ln() }
    }
}

/// Covering map `p(w) = e^{−iw}` from ℍ onto the disk exterior.
pub fn cover<T: Real>(w: HPoint<T>) -> ExteriorPoint<T> {
    let i = Complex::new(T::zero(), T::one());
    ExteriorPoint { z: (-i * w.w).exp() }
}

pub fn density_h<T: Real>(w: HPoint<T>) -> T {
    T::one() / w.w.im
}

/// `1/(|z| log|z|)`.
pub fn density_ext<T: Real>(z: ExteriorPoint<T>) -> T {
    let r = z.z.norm();
    T::one() / (r * r.ln())
}

/// `arccosh(1 + |w1−w2|² / (2 Im w1 Im w2))`.
pub fn dist_h<T: Real>(a: HPoint<T>, b: HPoint<T>) -> T {
    dist_from_parts((a.w - b.w).norm_sqr(), a.w.im, b.w.im)
}

#[inline]
fn dist_from_parts<T: Real>(d2: T, ya: T, yb: T) -> T {
    let two = T::lit(2.0);
    // arccosh(1 + x) = 2 asinh(sqrt(x/2)), stable for small x
    let x = d2 / (two * ya * yb);
    two * (x / two).sqrt().asinh()
}

/// Distance in the disk exterior: minimum of `dist_h` over deck translates
/// `w2 + 2πk`, `|k| ≤ k_window`.
pub fn dist_ext<T: Real>(a: ExteriorPoint<T>, b: ExteriorPoint<T>, k_window: u32) -> Result<T, HyperbolicError> {
    let (wa, wb) = (a.lift().w, b.lift().w);
    // built from the difference so that swapping a and b only flips signs
    let delta = wa - wb;
    let dy2 = delta.im * delta.im;
    let kw = k_window.max(1) as i64;
    let mut best = T::infinity();
    let mut arg = 0i64;
    for k in -kw..=kw {
        let dx = delta.re + T::TAU() * T::from_i64(k).unwrap();
        let d = dist_from_parts(dx * dx + dy2, wa.im, wb.im);
        if d < best {
            best = d;
            arg = k;
        }
    }
    if arg.abs() == kw {
        return Err(HyperbolicError::WindowEdge { k: arg });
    }
    Ok(best)
}

/// [`dist_ext`] starting from 8 translates and doubling on edge minima.
pub fn dist_ext_auto<T: Real>(a: ExteriorPoint<T>, b: ExteriorPoint<T>) -> T {
    let mut k = 8u32;
    loop {
        match dist_ext(a, b, k) {
            Ok(d) => return d,
            Err(_) => k = k.saturating_mul(2),
        }
    }
}

type BoundaryDistance<T> = Box<dyn Fn(Complex<T>) -> Option<T> + Send + Sync>;

/// Hyperbolic subdomain of the disk exterior.
pub enum Domain<T: Real> {
    /// `{|z| > radius}`.
    ExteriorOfDisk { radius: T },
    /// `{|z − center| < radius}`.
    Disk { center: Complex<T>, radius: T },
    /// Simply connected domain given by the distance to its boundary
    /// (`None` outside the domain).
    SimplyConnected { boundary_distance: BoundaryDistance<T> },
}

impl<T: Real> Domain<T> {
    fn validate(&self) -> Result<(), HyperbolicError> {
        match self {
            Domain::ExteriorOfDisk { radius } => {
                if *radius < T::one() || !radius.is_finite() {
                    Err(HyperbolicError::InvalidDomain("radius below 1".into()))
                } else if *radius == T::one() {
                    Err(HyperbolicError::NotStrict)
                } else {
                    Ok(())
                }
            }
            Domain::Disk { center, radius } => {
                if !(*radius > T::zero()) || center.norm() - *radius < T::one() {
                    Err(HyperbolicError::InvalidDomain("disk meets the closed unit disk".into()))
                } else {
                    Ok(())
                }
            }
            Domain::SimplyConnected { .. } => Ok(()),
        }
    }

    /// Certified bracket `[lo, hi]` for the density at `z`; exact for disks
    /// and disk exteriors.
    pub fn density_bracket(&self, z: Complex<T>) -> Result<(T, T), HyperbolicError> {
        let off = || HyperbolicError::OffDomain(z.to_string());
        match self {
            Domain::ExteriorOfDisk { radius } => {
                let r = z.norm();
                if r <= *radius {
                    return Err(off());
                }
                let v = T::one() / (r * (r / *radius).ln());
                Ok((v, v))
            }
            Domain::Disk { center, radius } => {
                let d2 = (z - center).norm_sqr();
                let s2 = *radius * *radius;
                if d2 >= s2 {
                    return Err(off());
                }
                let v = T::lit(2.0) * *radius / (s2 - d2);
                Ok((v, v))
            }
            Domain::SimplyConnected { boundary_distance } => {
                let d = boundary_distance(z).filter(|d| *d > T::zero()).ok_or_else(off)?;
                Ok((T::one() / (T::lit(2.0) * d), T::lit(2.0) / d))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionReport {
    /// Largest certified upper bound on `ρ_ext / ρ_D`.
    pub max_norm: f64,
    pub samples: usize,
    pub all_below_one: bool,
}

/// Norm of the inclusion `D ↪ ℂ∖D̄` at each sample, `ρ_ext(x)/ρ_D(x)`, using
/// the lower density bracket for `ρ_D`.
pub fn contraction_check<T: Real>(
    domain: &Domain<T>,
    samples: &[Complex<T>],
) -> Result<ContractionReport, HyperbolicError> {
    domain.validate()?;
    let mut max_norm = 0.0f64;
    for &z in samples {
        let ext = density_ext(ExteriorPoint::new(z)?);
        let (lo, _) = domain.density_bracket(z)?;
        max_norm = max_norm.max((ext / lo).as_f64());
    }
    Ok(ContractionReport { max_norm, samples: samples.len(), all_below_one: max_norm < 1.0 })
}
