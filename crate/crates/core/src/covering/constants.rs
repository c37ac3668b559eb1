use super::CoveringError;
use crate::scalar::{pi_bracket, rational_from_f64, sqrt2_bracket, Bracket, Certified, Rational};
use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

/// Constants of the covering lemma for a pair `(c, η)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaConstants {
    pub c: f64,
    pub eta: f64,
    /// Smallest odd `M` with `1/M < 1/(5√2(c+2))`.
    #[serde(rename = "M")]
    pub m: u32,
    /// Smallest `n0 ≥ 1` with `η^{n0} < 1/M`.
    pub n0: u32,
    pub zeta: f64,
    pub lambda: f64,
    #[serde(skip)]
    c_exact: Rational,
    #[serde(skip)]
    eta_exact: Rational,
}

impl LemmaConstants {
    pub fn c_exact(&self) -> &Rational {
        &self.c_exact
    }

    pub fn eta_exact(&self) -> &Rational {
        &self.eta_exact
    }

    /// `(1/2 + (c+2)M)²`, so that `ζ = 1/(4π M² X)`.
    fn zeta_core(&self) -> Rational {
        let m = Rational::from_integer(self.m.into());
        let half = Rational::new(1.into(), 2.into());
        let x = half + (&self.c_exact + Rational::from_integer(2.into())) * &m;
        &m * &m * &x * &x
    }

    /// Certified rational bracket of `ζ`.
    pub fn zeta_bracket(&self) -> Bracket {
        let four_core = self.zeta_core() * Rational::from_integer(4.into());
        let denom = pi_bracket().scale(&four_core);
        denom.recip_pos()
    }

    /// `ζ · a ≤ b` for nonnegative rationals, certified against the π bracket.
    pub fn zeta_times_le(&self, a: &Rational, b: &Rational) -> Certified {
        let z = self.zeta_bracket();
        if &(&z.hi * a) <= b {
            Certified::True
        } else if &(&z.lo * a) > b {
            Certified::False
        } else {
            Certified::Indeterminate
        }
    }

    /// The chain `η^{n0} < 1/M < 1/(5√2(c+2))`: the left inequality exactly,
    /// the right one both exactly (by squaring) and against the √2 bracket.
    pub fn verify_chain(&self) -> ChainCheck {
        let m = Rational::from_integer(self.m.into());
        let left = pow(&self.eta_exact, self.n0) * &m < Rational::one();
        let c2 = &self.c_exact + Rational::from_integer(2.into());
        let right_exact = &m * &m > Rational::from_integer(50.into()) * &c2 * &c2;
        let five_c2 = Rational::from_integer(5.into()) * &c2;
        let s = sqrt2_bracket().scale(&five_c2);
        let right_bracket = if m > s.hi {
            Certified::True
        } else if m <= s.lo {
            Certified::False
        } else {
            Certified::Indeterminate
        };
        ChainCheck { left, right_exact, right_bracket }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainCheck {
    pub left: bool,
    pub right_exact: bool,
    pub right_bracket: Certified,
}

impl ChainCheck {
    pub fn holds(&self) -> bool {
        self.left && self.right_exact && self.right_bracket.holds()
    }
}

pub(crate) fn pow(x: &Rational, n: u32) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..n {
        acc *= x;
    }
    acc
}

/// Minimal odd `M`, then minimal `n0`, then `ζ` and `λ = (1 − ζ/2)^{1/(2 n0)}`.
pub fn lemma1_constants(c: f64, eta: f64) -> Result<LemmaConstants, CoveringError> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(CoveringError::InvalidArgument("c must be positive".into()));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(CoveringError::InvalidArgument("eta must lie in (0,1)".into()));
    }
    let c_exact = rational_from_f64(c).unwrap();
    let eta_exact = rational_from_f64(eta).unwrap();
    let c2 = &c_exact + Rational::from_integer(2.into());
    let bound = Rational::from_integer(50.into()) * &c2 * &c2;
    // start just below 5√2(c+2)
    let mut m = ((5.0 * std::f64::consts::SQRT_2 * (c + 2.0)).floor() as i64 - 2).max(1);
    if m % 2 == 0 {
        m -= 1;
    }
    let m = loop {
        let mr = Rational::from_integer(BigInt::from(m.max(1)));
        if m >= 1 && &mr * &mr > bound {
            break m as u32;
        }
        m += 2;
        if m > 1_000_000 {
            return Err(CoveringError::InvalidArgument("c too large".into()));
        }
    };
    let mr = Rational::from_integer(m.into());
    let mut n0 = 1u32;
    let mut p = eta_exact.clone();
    while !(&p * &mr < Rational::one()) {
        p *= &eta_exact;
        n0 += 1;
    }
    let mf = m as f64;
    let x = 0.5 + (c + 2.0) * mf;
    let zeta = 1.0 / (4.0 * std::f64::consts::PI * mf * mf * x * x);
    let lambda = ((-zeta / 2.0).ln_1p() / (2.0 * n0 as f64)).exp();
    Ok(LemmaConstants { c, eta, m, n0, zeta, lambda, c_exact, eta_exact })
}
