//! Continued fractions: expansion, exact convergents, arithmetic statistics
//! and the block-insertion machinery for the class of rotation numbers built
//! from a Petersen–Zakeri expansion with long bounded blocks.

use crate::scalar::{bigint_from_biguint, ln_biguint, Rational, Real};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContFracError {
    #[error("value {0} is outside the open unit interval")]
    OutOfRange(String),
    #[error("continued fraction has no entries")]
    Empty,
    #[error("entry {index} is zero; entries must be positive")]
    NonPositiveEntry { index: usize },
    #[error("requested {requested} entries but only {available} are available")]
    NotEnoughEntries { requested: usize, available: usize },
    #[error("invalid witness: {0}")]
    InvalidWitness(String),
    #[error("expansion count must be at least 1")]
    ZeroCount,
}

/// How the entry list continues past the stored prefix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailTag {
    /// The stored entries repeat forever (purely periodic tail).
    Periodic(#[serde(with = "crate::scalar::big_serde::vec")] Vec<BigUint>),
    /// Expansion stopped because further entries were not certified.
    Truncated,
}

/// Prefix `[a_1, ..., a_n]` of a (possibly infinite) continued fraction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CFExpansion {
    #[serde(with = "crate::scalar::big_serde::vec")]
    entries: Vec<BigUint>,
    #[serde(default)]
    tail: Option<TailTag>,
}

impl CFExpansion {
    /// Finite expansion. Every entry must be at least 1.
    pub fn finite(entries: Vec<BigUint>) -> Result<Self, ContFracError> {
        if let Some(i) = entries.iter().position(|a| a.is_zero()) {
            return Err(ContFracError::NonPositiveEntry { index: i + 1 });
        }
        Ok(CFExpansion { entries, tail: None })
    }

    pub fn from_u64s(entries: &[u64]) -> Result<Self, ContFracError> {
        Self::finite(entries.iter().map(|&a| BigUint::from(a)).collect())
    }

    /// `[pre..., period, period, ...]`.
    pub fn periodic(pre: &[u64], period: &[u64]) -> Result<Self, ContFracError> {
        if period.is_empty() {
            return Err(ContFracError::Empty);
        }
        let mut cf = Self::from_u64s(pre)?;
        let period: Vec<BigUint> = period.iter().map(|&a| BigUint::from(a)).collect();
        if let Some(i) = period.iter().position(|a| a.is_zero()) {
            return Err(ContFracError::NonPositiveEntry { index: pre.len() + i + 1 });
        }
        cf.entries.extend(period.iter().cloned());
        cf.tail = Some(TailTag::Periodic(period));
        Ok(cf)
    }

    /// Golden mean `[1, 1, 1, ...]`.
    pub fn golden() -> Self {
        Self::periodic(&[], &[1]).unwrap()
    }

    /// Silver mean `[2, 2, 2, ...]`.
    pub fn silver() -> Self {
        Self::periodic(&[], &[2]).unwrap()
    }

    pub fn entries(&self) -> &[BigUint] {
        &self.entries
    }

    pub fn tail(&self) -> Option<&TailTag> {
        self.tail.as_ref()
    }

    pub fn is_truncated(&self) -> bool {
        matches!(self.tail, Some(TailTag::Truncated))
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.tail, Some(TailTag::Periodic(_)))
    }

    /// Number of entries available: unbounded for periodic expansions.
    pub fn available(&self) -> Option<usize> {
        match self.tail {
            Some(TailTag::Periodic(_)) => None,
            _ => Some(self.entries.len()),
        }
    }

    /// Entry `a_k` (1-based), extending periodic tails on demand.
    pub fn entry(&self, k: usize) -> Option<BigUint> {
        if k == 0 {
            return None;
        }
        if k <= self.entries.len() {
            return Some(self.entries[k - 1].clone());
        }
        match &self.tail {
            Some(TailTag::Periodic(period)) => {
                let pre = self.entries.len() - period.len();
                Some(period[(k - 1 - pre) % period.len()].clone())
            }
            _ => None,
        }
    }

    /// First `n` entries as a plain vector.
    pub fn take(&self, n: usize) -> Result<Vec<BigUint>, ContFracError> {
        if let Some(avail) = self.available() {
            if n > avail {
                return Err(ContFracError::NotEnoughEntries { requested: n, available: avail });
            }
        }
        Ok((1..=n).map(|k| self.entry(k).unwrap()).collect())
    }

    /// Finite prefix of length `n`.
    pub fn prefix(&self, n: usize) -> Result<CFExpansion, ContFracError> {
        Ok(CFExpansion { entries: self.take(n)?, tail: None })
    }

    /// Floating-point value from a deep convergent.
    pub fn approx_value<T: Real>(&self) -> Result<T, ContFracError> {
        let n = self.available().unwrap_or(256);
        if n == 0 {
            return Err(ContFracError::Empty);
        }
        let v = value(&self.prefix(n)?)?;
        Ok(T::from_f64(rational_to_f64(&v)).unwrap())
    }
}

/// Convergent `p_n / q_n` of a continued fraction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergentPair {
    pub n: usize,
    #[serde(with = "crate::scalar::big_serde")]
    pub p: BigUint,
    #[serde(with = "crate::scalar::big_serde")]
    pub q: BigUint,
}

impl ConvergentPair {
    pub fn as_rational(&self) -> Rational {
        Rational::new(bigint_from_biguint(&self.p), bigint_from_biguint(&self.q))
    }
}

/// First `n` entries of the expansion of a real `x` in (0,1) whose value is
/// only known to within `precision` (absolute).
///
/// Interval arithmetic tracks every point compatible with the input; the
/// expansion stops with a [`TailTag::Truncated`] marker as soon as the next
/// integer part is no longer the same across the interval.
pub fn expand<T: Real>(x: T, n: usize, precision: T) -> Result<CFExpansion, ContFracError> {
    if n == 0 {
        return Err(ContFracError::ZeroCount);
    }
    if !(x > T::zero() && x < T::one()) {
        return Err(ContFracError::OutOfRange(format!("{x}")));
    }
    let grow = T::one() + T::lit(4.0) * T::epsilon();
    let shrink = T::one() - T::lit(4.0) * T::epsilon();
    let eps = precision.abs().max(x * T::epsilon());
    let mut lo = x - eps;
    let mut hi = x + eps;
    let mut entries = Vec::with_capacity(n);
    let mut truncated = false;
    while entries.len() < n {
        if lo <= T::zero() {
            truncated = true;
            break;
        }
        // 1/x over [lo, hi], widened outward for rounding
        let inv_lo = (T::one() / hi) * shrink;
        let inv_hi = (T::one() / lo) * grow;
        let a_lo = inv_lo.floor();
        let a_hi = inv_hi.floor();
        if a_lo != a_hi || a_lo < T::one() || !inv_hi.is_finite() {
            truncated = true;
            break;
        }
        let a = a_lo.to_u128().map(BigUint::from);
        let Some(a) = a else {
            truncated = true;
            break;
        };
        entries.push(a);
        lo = inv_lo - a_lo;
        hi = inv_hi - a_lo;
    }
    Ok(CFExpansion { entries, tail: truncated.then_some(TailTag::Truncated) })
}

/// Exact expansion of a rational in (0,1) by the Euclidean algorithm. The
/// result is canonical: its last entry is at least 2 unless it equals `[1]`.
pub fn expand_rational(x: &Rational, n: usize) -> Result<CFExpansion, ContFracError> {
    if n == 0 {
        return Err(ContFracError::ZeroCount);
    }
    if !(x.is_positive() && x < &Rational::one()) {
        return Err(ContFracError::OutOfRange(x.to_string()));
    }
    let mut num = x.numer().clone();
    let mut den = x.denom().clone();
    let mut entries = Vec::new();
    while !num.is_zero() && entries.len() < n {
        let (a, r) = den.div_rem(&num);
        entries.push(a.to_biguint().unwrap());
        den = num;
        num = r;
    }
    let tail = (!num.is_zero()).then_some(TailTag::Truncated);
    Ok(CFExpansion { entries, tail })
}

/// Exact value `[a_1, ..., a_n]` evaluated bottom-up.
pub fn value(cf: &CFExpansion) -> Result<Rational, ContFracError> {
    let entries = cf.entries();
    if entries.is_empty() {
        return Err(ContFracError::Empty);
    }
    let mut acc = Rational::zero();
    for a in entries.iter().rev() {
        acc = (Rational::from_integer(bigint_from_biguint(a)) + acc).recip();
    }
    Ok(acc)
}

/// Convergents `p_k / q_k` for `k = 1..=n`.
pub fn convergents(cf: &CFExpansion, n: usize) -> Result<Vec<ConvergentPair>, ContFracError> {
    let entries = cf.take(n)?;
    let mut out = Vec::with_capacity(n);
    // (p_{-1}, q_{-1}) = (1, 0), (p_0, q_0) = (0, 1)
    let (mut p_prev, mut q_prev) = (BigUint::one(), BigUint::zero());
    let (mut p, mut q) = (BigUint::zero(), BigUint::one());
    for (i, a) in entries.iter().enumerate() {
        let p_next = a * &p + &p_prev;
        let q_next = a * &q + &q_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
        out.push(ConvergentPair { n: i + 1, p: p.clone(), q: q.clone() });
    }
    Ok(out)
}

/// Denominators `q_0 = 1, q_1, ..., q_n`.
pub fn denominators(cf: &CFExpansion, n: usize) -> Result<Vec<BigUint>, ContFracError> {
    let mut qs = vec![BigUint::one()];
    qs.extend(convergents(cf, n)?.into_iter().map(|c| c.q));
    Ok(qs)
}

/// `p_n q_{n-1} - p_{n-1} q_n` with the seed `(p_0, q_0) = (0, 1)`.
pub fn determinant(prev: Option<&ConvergentPair>, cur: &ConvergentPair) -> BigInt {
    let (pp, qp) = match prev {
        Some(c) => (bigint_from_biguint(&c.p), bigint_from_biguint(&c.q)),
        None => (BigInt::zero(), BigInt::one()),
    };
    bigint_from_biguint(&cur.p) * qp - pp * bigint_from_biguint(&cur.q)
}

/// `max_{1<=k<=n} log(a_k) / sqrt(k)`.
pub fn pz_statistic(cf: &CFExpansion, n: usize) -> Result<f64, ContFracError> {
    if n == 0 {
        return Err(ContFracError::ZeroCount);
    }
    let entries = cf.take(n)?;
    Ok(entries.iter().enumerate().map(|(i, a)| ln_biguint(a) / ((i + 1) as f64).sqrt()).fold(0.0, f64::max))
}

/// Partial Brjuno sum `sum_{k=0}^{n-1} log(q_{k+1}) / q_k`.
pub fn brjuno_partial(cf: &CFExpansion, n: usize) -> Result<f64, ContFracError> {
    Ok(brjuno_partials(cf, n)?.last().copied().unwrap_or(0.0))
}

/// All partial sums `B_0 = 0, B_1, ..., B_n`.
pub fn brjuno_partials(cf: &CFExpansion, n: usize) -> Result<Vec<f64>, ContFracError> {
    let qs = if n == 0 { vec![BigUint::one()] } else { denominators(cf, n)? };
    let mut sums = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    sums.push(acc);
    for k in 0..n {
        let qk = &qs[k];
        let l = ln_biguint(&qs[k + 1]);
        acc += match qk.to_f64() {
            Some(v) if v.is_finite() => l / v,
            _ => 0.0,
        };
        sums.push(acc);
    }
    Ok(sums)
}

/// Witness for membership of an expansion in the block class: a base
/// expansion `theta`, a block bound `m`, block starts `s_j` and block ends
/// `t_j`, and the universal constant `c` of the gap condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct E0Witness {
    pub theta: CFExpansion,
    #[serde(rename = "M")]
    pub m: u64,
    pub s: Vec<usize>,
    pub t: Vec<usize>,
    #[serde(rename = "C")]
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum E0Clause {
    /// `s_j < t_j < s_{j+1}`.
    WitnessOrder,
    /// `t_j - s_j > C s_j`.
    WitnessGap,
    /// `c_k <= a_k` for `k <= s_1`.
    Prefix,
    /// `c_k <= M` for `s_j < k <= t_j`.
    BlockBound,
    /// `c_k <= a_{k - t_j}` for `t_j < k <= s_{j+1}`.
    ShiftedTail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
pub enum E0Verdict {
    Holds { checked_through: usize },
    Violation { index: usize, clause: E0Clause },
}

impl E0Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, E0Verdict::Holds { .. })
    }
}

/// Check a finite witness against the prefix of a candidate expansion.
///
/// The checked range ends at `s_{J+1}` when the witness lists one more block
/// start than block ends, and at `t_J` otherwise.
pub fn verify_e0(candidate: &CFExpansion, w: &E0Witness) -> Result<E0Verdict, ContFracError> {
    if w.s.is_empty() {
        return Err(ContFracError::InvalidWitness("no block starts".into()));
    }
    if !(w.t.len() == w.s.len() || w.t.len() + 1 == w.s.len()) {
        return Err(ContFracError::InvalidWitness(format!("{} block starts and {} block ends", w.s.len(), w.t.len())));
    }
    if !(w.c > 0.0) {
        return Err(ContFracError::InvalidWitness("C must be positive".into()));
    }
    if w.s[0] == 0 {
        return Err(ContFracError::InvalidWitness("s_1 must be positive".into()));
    }
    for j in 0..w.t.len() {
        let (s, t) = (w.s[j], w.t[j]);
        let next_ok = w.s.get(j + 1).is_none_or(|&sn| t < sn);
        if !(s < t && next_ok) {
            return Ok(E0Verdict::Violation { index: t, clause: E0Clause::WitnessOrder });
        }
        if !((t - s) as f64 > w.c * s as f64) {
            return Ok(E0Verdict::Violation { index: t, clause: E0Clause::WitnessGap });
        }
    }
    let end = if w.s.len() > w.t.len() { *w.s.last().unwrap() } else { *w.t.last().unwrap() };
    let need = |cf: &CFExpansion, k: usize| {
        cf.entry(k).ok_or(ContFracError::NotEnoughEntries { requested: k, available: cf.entries().len() })
    };
    let bound = BigUint::from(w.m);
    for k in 1..=end {
        let ck = need(candidate, k)?;
        let (ok, clause) = if k <= w.s[0] {
            (ck <= need(&w.theta, k)?, E0Clause::Prefix)
        } else {
            // locate block j with s_j < k <= s_{j+1}
            let j = w.s.iter().rposition(|&s| s < k).unwrap();
            let t = w.t[j];
            if k <= t {
                (ck <= bound, E0Clause::BlockBound)
            } else {
                (ck <= need(&w.theta, k - t)?, E0Clause::ShiftedTail)
            }
        };
        if !ok {
            return Ok(E0Verdict::Violation { index: k, clause });
        }
    }
    Ok(E0Verdict::Holds { checked_through: end })
}

/// Parameters of the block-insertion construction: base expansion, block
/// bound, block starts `s_j`, block lengths `t_j` and the gap constant.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockRecipe {
    pub theta: CFExpansion,
    pub m: u64,
    pub s: Vec<usize>,
    pub t: Vec<usize>,
    pub c: f64,
}

/// Expansion produced by [`insert_blocks`] with the membership witness that
/// certifies it.
#[derive(Debug, Clone, PartialEq)]
pub struct InsertedBlocks {
    pub expansion: CFExpansion,
    pub witness: E0Witness,
}

/// First `n` entries of `c_k`: `c_k = a_k` for `k <= s_1`, `c_k = M` on the
/// inserted stretch `s_j < k <= s_j + t_j`, and afterwards
/// `c_k = a_{k - (t_1 + ... + t_j)}` until `s_{j+1}`.
///
/// The returned witness uses block ends `s_j + t_j` and an envelope base
/// expansion `a'_i = max(c_k)` over the indices `k` that the shifted-tail
/// clause compares with `a'_i`.
pub fn insert_blocks(recipe: &BlockRecipe, n: usize) -> Result<InsertedBlocks, ContFracError> {
    let BlockRecipe { theta, m, s, t, c } = recipe;
    if s.is_empty() || t.len() != s.len() {
        return Err(ContFracError::InvalidWitness("need one block length per block start".into()));
    }
    if *m == 0 || !(*c > 0.0) {
        return Err(ContFracError::InvalidWitness("M and C must be positive".into()));
    }
    if s[0] == 0 {
        return Err(ContFracError::InvalidWitness("s_1 must be positive".into()));
    }
    for j in 0..s.len() {
        if !((t[j] as f64) > (c + 1.0) * s[j] as f64) {
            return Err(ContFracError::InvalidWitness(format!(
                "t_{} = {} does not exceed (C+1) s_{} = {}",
                j + 1,
                t[j],
                j + 1,
                (c + 1.0) * s[j] as f64
            )));
        }
        if let Some(&next) = s.get(j + 1) {
            if s[j] + t[j] >= next {
                return Err(ContFracError::InvalidWitness(format!(
                    "s_{} + t_{} = {} is not below s_{} = {}",
                    j + 1,
                    j + 1,
                    s[j] + t[j],
                    j + 2,
                    next
                )));
            }
        }
    }
    let fill = BigUint::from(*m);
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        let ck = if k <= s[0] {
            theta.entry(k)
        } else {
            let j = s.iter().rposition(|&sj| sj < k).unwrap();
            if k <= s[j] + t[j] {
                Some(fill.clone())
            } else {
                let shift: usize = t[..=j].iter().sum();
                theta.entry(k - shift)
            }
        };
        let ck = ck.ok_or(ContFracError::NotEnoughEntries { requested: k, available: theta.entries().len() })?;
        out.push(ck);
    }
    let expansion = CFExpansion::finite(out)?;

    // definition-form witness: block ends s_j + t_j, envelope base expansion
    let ends: Vec<usize> = s.iter().zip(t).map(|(a, b)| a + b).collect();
    let mut starts = Vec::new();
    let mut block_ends = Vec::new();
    for j in 0..s.len() {
        if ends[j] <= n {
            starts.push(s[j]);
            block_ends.push(ends[j]);
        } else {
            break;
        }
    }
    if starts.is_empty() {
        return Err(ContFracError::InvalidWitness(format!("n = {n} does not reach the end of the first block")));
    }
    let j_last = starts.len();
    let checked_end = match s.get(j_last) {
        Some(&next) if next <= n => {
            starts.push(next);
            next
        }
        _ => *block_ends.last().unwrap(),
    };
    let mut envelope = vec![BigUint::one(); checked_end.max(1)];
    let entries = expansion.entries();
    for k in 1..=checked_end.min(n) {
        let i = if k <= starts[0] {
            Some(k)
        } else {
            let j = starts.iter().rposition(|&sj| sj < k).unwrap();
            block_ends.get(j).and_then(|&te| (k > te).then(|| k - te))
        };
        if let Some(i) = i {
            if entries[k - 1] > envelope[i - 1] {
                envelope[i - 1] = entries[k - 1].clone();
            }
        }
    }
    let witness = E0Witness { theta: CFExpansion::finite(envelope)?, m: *m, s: starts, t: block_ends, c: *c };
    Ok(InsertedBlocks { expansion, witness })
}

/// First `m` entries of `[a_1, ..., a_n, A, b_1, b_2, ...]`.
pub fn perturbed_alpha(
    prefix: &CFExpansion,
    n: usize,
    big_a: &BigUint,
    tail: &CFExpansion,
    m: usize,
) -> Result<CFExpansion, ContFracError> {
    if big_a.is_zero() {
        return Err(ContFracError::NonPositiveEntry { index: n + 1 });
    }
    let mut entries = prefix.take(n)?;
    entries.push(big_a.clone());
    if m > n + 1 {
        entries.extend(tail.take(m - n - 1)?);
    }
    entries.truncate(m);
    CFExpansion::finite(entries)
}

pub(crate) fn rational_to_f64(r: &Rational) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // scale down very large numerators/denominators
    let n = r.numer().abs();
    let d = r.denom().clone();
    let shift = n.bits().max(d.bits()).saturating_sub(1000);
    let nf = (n >> shift).to_f64().unwrap();
    let df = (d >> shift).to_f64().unwrap();
    if r.is_negative() {
        -nf / df
    } else {
        nf / df
    }
}
