//! Scalar abstractions shared by the numerical modules.
//!
//! Floating-point code is written against [`Real`], which is implemented for
//! `f32` and `f64`. Exact code (continued fractions, covering certificates)
//! works with [`Rational`], a big-integer rational.

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, One, Signed, ToPrimitive, Zero};
use std::fmt::{Debug, Display};

/// Exact rational with arbitrary-precision numerator and denominator.
pub type Rational = BigRational;

/// Floating-point scalar used by the dynamical and metric modules.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Convert an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Convert a count into the scalar type.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Outcome of a comparison whose operands are only known within certified
/// rational brackets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certified {
    True,
    False,
    Indeterminate,
}

impl Certified {
    pub fn holds(self) -> bool {
        matches!(self, Certified::True)
    }

    pub fn from_bool(b: bool) -> Self {
        if b {
            Certified::True
        } else {
            Certified::False
        }
    }

    /// Conjunction: false dominates, then indeterminate.
    pub fn and(self, other: Certified) -> Certified {
        match (self, other) {
            (Certified::False, _) | (_, Certified::False) => Certified::False,
            (Certified::True, Certified::True) => Certified::True,
            _ => Certified::Indeterminate,
        }
    }
}

/// Closed rational interval `[lo, hi]` containing an irrational constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bracket {
    pub lo: Rational,
    pub hi: Rational,
}

impl Bracket {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        assert!(lo <= hi, "bracket endpoints out of order");
        Bracket { lo, hi }
    }

    pub fn exact(v: Rational) -> Self {
        Bracket { lo: v.clone(), hi: v }
    }

    /// Product of two brackets with nonnegative endpoints.
    pub fn mul_nonneg(&self, other: &Bracket) -> Bracket {
        debug_assert!(!self.lo.is_negative() && !other.lo.is_negative());
        Bracket::new(&self.lo * &other.lo, &self.hi * &other.hi)
    }

    /// Scale by a rational factor of either sign.
    pub fn scale(&self, k: &Rational) -> Bracket {
        if k.is_negative() {
            Bracket::new(&self.hi * k, &self.lo * k)
        } else {
            Bracket::new(&self.lo * k, &self.hi * k)
        }
    }

    /// Reciprocal of a strictly positive bracket.
    pub fn recip_pos(&self) -> Bracket {
        assert!(self.lo.is_positive(), "reciprocal of non-positive bracket");
        Bracket::new(self.hi.recip(), self.lo.recip())
    }

    /// `value <= self` certified against the bracket.
    pub fn ge_value(&self, value: &Rational) -> Certified {
        if value <= &self.lo {
            Certified::True
        } else if value > &self.hi {
            Certified::False
        } else {
            Certified::Indeterminate
        }
    }

    /// `value >= self` certified against the bracket.
    pub fn le_value(&self, value: &Rational) -> Certified {
        if value >= &self.hi {
            Certified::True
        } else if value < &self.lo {
            Certified::False
        } else {
            Certified::Indeterminate
        }
    }

    pub fn midpoint_f64(&self) -> f64 {
        ((&self.lo + &self.hi) / Rational::from_integer(2.into())).to_f64().unwrap_or(f64::NAN)
    }
}

/// Rational bracket of pi, width below 1e-30.
pub fn pi_bracket() -> Bracket {
    // 3.1415926535897932384626433832795028841971...
    let num: BigInt = "31415926535897932384626433832795028".parse().unwrap();
    let den = BigInt::from(10u32).pow(34);
    let lo = Rational::new(num.clone(), den.clone());
    let hi = Rational::new(num + BigInt::one(), den);
    Bracket::new(lo, hi)
}

/// Rational bracket of sqrt(2) obtained from consecutive Pell convergents.
pub fn sqrt2_bracket() -> Bracket {
    // convergents of [1; 2, 2, 2, ...] alternate around sqrt(2)
    let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
    let (mut p1, mut q1) = (BigInt::one(), BigInt::one());
    for _ in 0..60 {
        let p2 = BigInt::from(2) * &p1 + &p0;
        let q2 = BigInt::from(2) * &q1 + &q0;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
    let a = Rational::new(p0, q0);
    let b = Rational::new(p1, q1);
    if a <= b {
        Bracket::new(a, b)
    } else {
        Bracket::new(b, a)
    }
}

/// Exact rational value of a finite `f64`.
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// Natural logarithm of a big unsigned integer, accurate to f64 precision.
pub fn ln_biguint(a: &BigUint) -> f64 {
    if a.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = a.bits();
    if bits <= 1000 {
        return a.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (a >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `ln(q) / q` for a positive big integer (underflows gracefully to 0).
pub fn ln_over(q: &BigUint) -> f64 {
    let l = ln_biguint(q);
    match q.to_f64() {
        Some(v) if v.is_finite() => l / v,
        _ => 0.0,
    }
}

pub(crate) fn bigint_from_biguint(u: &BigUint) -> BigInt {
    BigInt::from_biguint(Sign::Plus, u.clone())
}


/// Serde adapters writing big integers as JSON numbers when they fit in a
/// `u64` and as decimal strings otherwise.
pub(crate) mod big_serde {
    use num_bigint::BigUint;
    use num_traits::ToPrimitive;
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Small(u64),
        Text(String),
    }

    fn to_repr(a: &BigUint) -> Repr {
        match a.to_u64() {
            Some(v) => Repr::Small(v),
            None => Repr::Text(a.to_str_radix(10)),
        }
    }

    fn from_repr<E: Error>(r: Repr) -> Result<BigUint, E> {
        match r {
            Repr::Small(v) => Ok(BigUint::from(v)),
            Repr::Text(s) => s.parse().map_err(|_| E::custom(format!("invalid integer {s:?}"))),
        }
    }

    pub fn serialize<S: Serializer>(a: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        to_repr(a).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        from_repr(Repr::deserialize(d)?)
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
            v.iter().map(to_repr).collect::<Vec<_>>().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigUint>, D::Error> {
            Vec::<Repr>::deserialize(d)?.into_iter().map(from_repr).collect()
        }
    }
}
