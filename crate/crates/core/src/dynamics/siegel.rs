use super::fate::{ModelP, OrbitFate};
use super::DynamicsError;
use crate::scalar::Real;
use num_complex::Complex;

/// Star-shaped polygon about 0 fitted to the critical orbit, standing in for
/// the closed Siegel disk.
#[derive(Debug, Clone)]
pub struct SiegelApprox<T: Real> {
    pub orbit: Vec<Complex<T>>,
    /// Vertices in increasing argument order.
    pub hull: Vec<Complex<T>>,
    pub angle_bins: usize,
    /// Largest distance from `P(m)` to the polygon boundary over edge midpoints `m`.
    pub invariance_residual: T,
    pub diameter: T,
    /// Radius of a disk about 0 contained in the polygon.
    inner_radius: T,
    outer_radius: T,
    angles: Vec<T>,
}

/// Distance from `p` to the segment `[a, b]`.
fn segment_distance<T: Real>(p: Complex<T>, a: Complex<T>, b: Complex<T>) -> T {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    let s = if len2 > T::zero() {
        (((p - a).re * ab.re + (p - a).im * ab.im) / len2).max(T::zero()).min(T::one())
    } else {
        T::zero()
    };
    (p - (a + ab * s)).norm()
}

impl<T: Real> SiegelApprox<T> {
    fn edges(&self) -> impl Iterator<Item = (Complex<T>, Complex<T>)> + '_ {
        let n = self.hull.len();
        (0..n).map(move |i| (self.hull[i], self.hull[(i + 1) % n]))
    }

    pub fn boundary_distance(&self, p: Complex<T>) -> T {
        self.edges().map(|(a, b)| segment_distance(p, a, b)).fold(T::infinity(), T::min)
    }

    /// Point-in-polygon by locating the edge that spans `arg p`.
    pub fn contains(&self, p: Complex<T>) -> bool {
        let r2 = p.norm_sqr();
        if r2 <= self.inner_radius * self.inner_radius {
            return true;
        }
        if r2 > self.outer_radius * self.outer_radius {
            return false;
        }
        let th = p.im.atan2(p.re);
        let n = self.angles.len();
        let i = self.angles.partition_point(|&a| a <= th);
        let (a, b) = if i == 0 || i == n { (self.hull[n - 1], self.hull[0]) } else { (self.hull[i - 1], self.hull[i]) };
        // p inside the triangle (0, a, b) iff on the origin side of [a, b]
        let cross = |u: Complex<T>, v: Complex<T>| u.re * v.im - u.im * v.re;
        cross(b - a, p - a) >= T::zero()
    }

    /// Euclidean distance to the closed polygon (0 inside).
    pub fn distance(&self, p: Complex<T>) -> T {
        if self.contains(p) {
            T::zero()
        } else {
            self.boundary_distance(p)
        }
    }

    pub fn outer_radius(&self) -> T {
        self.outer_radius
    }
}

/// Critical orbit `P^k(−λ/2)`, `k < n_orbit`, and its star-shaped hull.
pub fn siegel_boundary<T: Real>(
    model: &ModelP<T>,
    n_orbit: usize,
    angle_bins: usize,
) -> Result<SiegelApprox<T>, DynamicsError> {
    if n_orbit < 3 {
        return Err(DynamicsError::InvalidArgument("n_orbit must be at least 3".into()));
    }
    let bins = angle_bins.max(8);
    let r2 = model.escape_radius() * model.escape_radius();
    let mut orbit = Vec::with_capacity(n_orbit);
    let mut z = model.critical_point();
    for k in 0..n_orbit {
        if !(z.norm_sqr() <= r2) {
            return Err(DynamicsError::OrbitEscaped { step: k });
        }
        orbit.push(z);
        z = model.eval(z);
    }
    // outermost orbit point per angular bin
    let mut best: Vec<Option<Complex<T>>> = vec![None; bins];
    let tau = T::TAU();
    for &p in &orbit {
        let th = p.im.atan2(p.re) + T::PI();
        let b = ((th / tau * T::from_count(bins)).to_usize().unwrap_or(0)).min(bins - 1);
        if best[b].is_none_or(|q| p.norm_sqr() > q.norm_sqr()) {
            best[b] = Some(p);
        }
    }
    let mut hull: Vec<Complex<T>> = best.into_iter().flatten().collect();
    hull.sort_by(|a, b| a.im.atan2(a.re).partial_cmp(&b.im.atan2(b.re)).unwrap());
    if hull.len() < 3 {
        return Err(DynamicsError::InvalidArgument("critical orbit too concentrated".into()));
    }
    let angles: Vec<T> = hull.iter().map(|p| p.im.atan2(p.re)).collect();
    // 0 must be interior: consecutive vertices less than a half turn apart
    let n = hull.len();
    for i in 0..n {
        let gap = if i + 1 < n { angles[i + 1] - angles[i] } else { angles[0] + tau - angles[n - 1] };
        if gap >= T::PI() {
            return Err(DynamicsError::InvalidArgument("hull does not surround 0".into()));
        }
    }
    let outer_radius = hull.iter().map(|p| p.norm()).fold(T::zero(), T::max);
    let zero = Complex::new(T::zero(), T::zero());
    let inner_radius = (0..n).map(|i| segment_distance(zero, hull[i], hull[(i + 1) % n])).fold(T::infinity(), T::min);
    let mut diameter = T::zero();
    for a in &hull {
        for b in &hull {
            diameter = diameter.max((*a - *b).norm());
        }
    }
    let mut approx = SiegelApprox {
        orbit,
        hull,
        angle_bins: bins,
        invariance_residual: T::zero(),
        diameter,
        inner_radius,
        outer_radius,
        angles,
    };
    let two = T::lit(2.0);
    let residual =
        approx.edges().map(|(a, b)| approx.boundary_distance(model.eval((a + b) / two))).fold(T::zero(), T::max);
    approx.invariance_residual = residual;
    Ok(approx)
}

/// Fate with respect to `K_r(P)`: escaped once the orbit is farther than `r`
/// from the hull.
pub fn member_k_r_p<T: Real>(
    model: &ModelP<T>,
    siegel: &SiegelApprox<T>,
    r: T,
    z: Complex<T>,
    budget: u64,
) -> Result<OrbitFate, DynamicsError> {
    if siegel.distance(z) > r {
        return Err(DynamicsError::OutsideNeighborhood);
    }
    Ok(k_r_fate(model, siegel, r, z, budget))
}

/// As [`member_k_r_p`] without the precondition: a start farther than `r`
/// counts as escaped at step 0.
pub(crate) fn k_r_fate<T: Real>(
    model: &ModelP<T>,
    siegel: &SiegelApprox<T>,
    r: T,
    z: Complex<T>,
    budget: u64,
) -> OrbitFate {
    let far = (siegel.outer_radius + r) * (siegel.outer_radius + r);
    let mut z = z;
    for k in 0..=budget {
        let m = z.norm_sqr();
        if m > far || !m.is_finite() || siegel.distance(z) > r {
            return OrbitFate::Escaped { exit_step: k };
        }
        if k < budget {
            z = model.eval(z);
        }
    }
    OrbitFate::Undecided { budget }
}
