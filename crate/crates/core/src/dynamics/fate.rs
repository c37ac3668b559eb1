use super::DynamicsError;
use crate::blaschke::BlaschkeModel;
use crate::scalar::Real;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

/// Outcome of iterating a point under a budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitFate {
    Escaped { exit_step: u64 },
    Captured { entry_step: u64 },
    Undecided { budget: u64 },
}

impl OrbitFate {
    /// Undecided points count as members.
    pub fn is_member(&self) -> bool {
        !matches!(self, OrbitFate::Escaped { .. })
    }

    pub fn is_escaped(&self) -> bool {
        matches!(self, OrbitFate::Escaped { .. })
    }

    /// Pixel code: 0 escaped, 128 undecided, 255 captured.
    pub fn code(&self) -> u8 {
        match self {
            OrbitFate::Escaped { .. } => 0,
            OrbitFate::Undecided { .. } => 128,
            OrbitFate::Captured { .. } => 255,
        }
    }
}

/// Fate under the model map: the closed unit disk is forward invariant, so
/// `|z| ≤ 1` is captured; `|z| > 1 + r` has left `D_{1+r}`; in between the
/// exterior formula `f_t` is iterated.
pub fn classify_f<T: Real>(model: &BlaschkeModel<T>, r: T, z: Complex<T>, budget: u64) -> OrbitFate {
    let outer = (T::one() + r) * (T::one() + r);
    let lambda = model.lambda();
    let three = T::lit(3.0);
    let one = Complex::new(T::one(), T::zero());
    let mut z = z;
    let mut k = 0u64;
    loop {
        let m = z.norm_sqr();
        if m <= T::one() {
            return OrbitFate::Captured { entry_step: k };
        }
        if m > outer || !m.is_finite() {
            return OrbitFate::Escaped { exit_step: k };
        }
        if k == budget {
            return OrbitFate::Undecided { budget };
        }
        // the pole 1/3 lies inside the captured disk
        z = lambda * z * z * (z - three) / (one - z * three);
        k += 1;
    }
}

/// `P(z) = λz + z²` with `λ = e^{2πiα}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelP<T: Real> {
    alpha: T,
    lambda: Complex<T>,
    escape_radius: T,
}

impl<T: Real> ModelP<T> {
    pub fn new(alpha: T) -> Self {
        let a = T::TAU() * alpha;
        ModelP { alpha, lambda: Complex::new(a.cos(), a.sin()), escape_radius: T::lit(3.0) }
    }

    /// Radii below 2 do not certify escape.
    pub fn with_escape_radius(alpha: T, radius: T) -> Result<Self, DynamicsError> {
        if !(radius >= T::lit(2.0)) {
            return Err(DynamicsError::InvalidArgument("escape radius must be at least 2".into()));
        }
        Ok(ModelP { escape_radius: radius, ..Self::new(alpha) })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn lambda(&self) -> Complex<T> {
        self.lambda
    }

    pub fn escape_radius(&self) -> T {
        self.escape_radius
    }

    #[inline]
    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        (self.lambda + z) * z
    }

    /// Critical point `−λ/2`.
    pub fn critical_point(&self) -> Complex<T> {
        -self.lambda / T::lit(2.0)
    }
}

/// Escaped once `|P^k(z)| > R`; otherwise undecided (counted as a member).
pub fn classify_p<T: Real>(model: &ModelP<T>, z: Complex<T>, budget: u64) -> OrbitFate {
    let r2 = model.escape_radius * model.escape_radius;
    let mut z = z;
    for k in 0..=budget {
        let m = z.norm_sqr();
        if m > r2 || !m.is_finite() {
            return OrbitFate::Escaped { exit_step: k };
        }
        if k < budget {
            z = model.eval(z);
        }
    }
    OrbitFate::Undecided { budget }
}

/// Membership in `{e^{−iw} : |Re w| ≤ l, |Im w| ≤ l}` via the principal
/// branch `w = i·Log z`.
pub fn in_s_l<T: Real>(z: Complex<T>, l: T) -> Result<bool, DynamicsError> {
    if z.norm_sqr() == T::zero() {
        return Err(DynamicsError::InvalidArgument("z = 0 has no logarithm".into()));
    }
    if !(l > T::zero() && l < T::PI()) {
        return Err(DynamicsError::InvalidArgument("l must lie in (0, π)".into()));
    }
    // Re w = −arg z, Im w = log|z|; the closed square absorbs 4 ulps of rounding
    let edge = l * (T::one() + T::lit(4.0) * T::epsilon());
    Ok(z.arg().abs() <= edge && z.norm().ln().abs() <= edge)
}
