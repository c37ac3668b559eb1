use super::cellset::{CellSetE, HypothesisReport};
use super::constants::{pow, LemmaConstants};
use super::rational_str;
use super::region::{Region, TwoCopies};
use super::square::{LatticeBox, MadicSquare};
use super::CoveringError;
use crate::scalar::{Certified, Rational};
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};

/// `R^n` of a square: the largest `r̃_n` (lattice units) over member cells inside it.
pub fn generation_statistics(
    e: &CellSetE,
    k: &LemmaConstants,
    square: &MadicSquare,
    n: usize,
) -> Result<i64, CoveringError> {
    check_generation(e, k, n)?;
    if square.base != e.base() || square.depth() > e.depth() {
        return Err(CoveringError::InvalidArgument("square not in E's tree".into()));
    }
    let shift = (e.base() as u64).pow((e.depth() - square.depth()) as u32);
    let (sc, sr) = square.col_row();
    e.cells()
        .iter()
        .filter(|c| c.col as u64 / shift == sc && c.row as u64 / shift == sr)
        .map(|c| CellSetE::r_tilde(c, n, k.n0))
        .max()
        .ok_or(CoveringError::DisjointSquare)
}

fn check_generation(e: &CellSetE, k: &LemmaConstants, n: usize) -> Result<(), CoveringError> {
    if e.base() != k.m {
        return Err(CoveringError::InvalidArgument(format!("E uses base {} but M = {}", e.base(), k.m)));
    }
    let n_tilde = e.levels() / k.n0 as usize;
    if n == 0 || n > n_tilde {
        return Err(CoveringError::InvalidArgument(format!("generation {n} outside 1..={n_tilde}")));
    }
    Ok(())
}

/// `R ≤ √2·l/M^k`, decided exactly by squaring.
pub(crate) fn within_threshold(e: &CellSetE, r: i64, k: usize) -> bool {
    let m = e.base() as i128;
    let unit = super::CELL_UNITS as i128;
    let kk = e.depth();
    let r2 = (r as i128) * (r as i128);
    if k <= kk {
        let side = unit * m.pow((kk - k) as u32);
        r2 <= 2 * side * side
    } else {
        r2 * m.pow(2 * (k - kk) as u32) <= 2 * unit * unit
    }
}

/// Per-depth maxima of `r̃_n` keyed by `(col, row)` at that depth.
fn aggregate(e: &CellSetE, n: usize, n0: u32) -> Vec<HashMap<(u64, u64), i64>> {
    let m = e.base() as u64;
    let kk = e.depth();
    let mut out = vec![HashMap::new(); kk + 1];
    for c in e.cells() {
        let r = CellSetE::r_tilde(c, n, n0);
        let (mut col, mut row) = (c.col as u64, c.row as u64);
        for d in (0..=kk).rev() {
            let v = out[d].entry((col, row)).or_insert(r);
            *v = (*v).max(r);
            col /= m;
            row /= m;
        }
    }
    out
}

/// Admissible squares of generation `n` and the number of member cells
/// whose admissible square would lie below depth `K`.
pub(crate) fn classify_counted(e: &CellSetE, k: &LemmaConstants, n: usize) -> (Vec<MadicSquare>, usize) {
    let m = e.base() as u64;
    let kk = e.depth();
    let agg = aggregate(e, n, k.n0);
    let mut children: Vec<BTreeMap<(u64, u64), Vec<(u64, u64)>>> = vec![BTreeMap::new(); kk + 1];
    for d in 1..=kk {
        for &(c, r) in agg[d].keys() {
            children[d - 1].entry((c / m, r / m)).or_default().push((c, r));
        }
    }
    let mut admissible = Vec::new();
    let mut unresolved = 0;
    let mut stack: Vec<(usize, (u64, u64))> = vec![(0, (0, 0))];
    while let Some((d, key)) = stack.pop() {
        for &ch in children[d].get(&key).map(|v| v.as_slice()).unwrap_or(&[]) {
            let j = d + 1;
            let r = agg[j][&ch];
            if within_threshold(e, r, j + 1) {
                if j == kk {
                    unresolved += 1;
                } else {
                    stack.push((j, ch));
                }
            } else if within_threshold(e, r, j) {
                admissible.push(MadicSquare::from_col_row(e.base(), j, ch.0, ch.1));
            } else {
                // R exceeds even the depth-j threshold: no admissible ancestor chain
                unresolved += count_cells(&agg, &children, j, ch);
            }
        }
    }
    admissible.sort();
    (admissible, unresolved)
}

fn count_cells(
    agg: &[HashMap<(u64, u64), i64>],
    children: &[BTreeMap<(u64, u64), Vec<(u64, u64)>>],
    d: usize,
    key: (u64, u64),
) -> usize {
    if d + 1 == agg.len() {
        return 1;
    }
    children[d].get(&key).map_or(0, |v| v.iter().map(|&c| count_cells(agg, children, d + 1, c)).sum())
}

/// Squares `S_{i1…ik}` meeting `E` with `√2 l/M^{k+1} < R^n ≤ √2 l/M^k` and
/// `R^n_{i1…ij} ≤ √2 l/M^{j+1}` for every proper ancestor, in path order.
pub fn classify_admissible(e: &CellSetE, k: &LemmaConstants, n: usize) -> Result<Vec<MadicSquare>, CoveringError> {
    check_generation(e, k, n)?;
    Ok(classify_counted(e, k, n).0)
}

/// The lexicographically smallest depth-`(k+1)` square disjoint from `E`
/// within `√2(c+1)·l/M^k` of the admissible square.
pub fn select_f_square(
    admissible: &MadicSquare,
    e: &CellSetE,
    k: &LemmaConstants,
) -> Result<MadicSquare, CoveringError> {
    select_in(admissible, &e.region(), k.c_exact())
}

pub(crate) fn select_in(adm: &MadicSquare, region: &Region, c: &Rational) -> Result<MadicSquare, CoveringError> {
    let target = adm.depth() + 1;
    // lengths in units of the target side
    let abox = LatticeBox::of(adm, target, 1);
    let c1 = c + Rational::one();
    let bound = Rational::from_integer(2.into()) * &c1 * &c1 * Rational::from_integer(BigInt::from(abox.side).pow(2));
    let fits = |b: &LatticeBox| Rational::from_integer(b.dist2(&abox).into()) <= bound;
    fn dfs(
        sq: &MadicSquare,
        target: usize,
        region: &Region,
        fits: &dyn Fn(&LatticeBox) -> bool,
    ) -> Option<MadicSquare> {
        for d in 1..=sq.base * sq.base {
            let ch = sq.child(d);
            if !fits(&LatticeBox::of(&ch, target, 1)) || region.covers(&ch) {
                continue;
            }
            if ch.depth() == target {
                if region.misses(&ch) {
                    return Some(ch);
                }
            } else if let Some(found) = dfs(&ch, target, region, fits) {
                return Some(found);
            }
        }
        None
    }
    dfs(&MadicSquare::root(adm.base), target, region, &fits).ok_or_else(|| {
        CoveringError::HypothesisViolation(format!("no empty square near admissible square {:?}", adm.path))
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FChoice {
    /// Admissible square of generation `n+1` inside a center child.
    pub square: MadicSquare,
    pub f: MadicSquare,
}

#[derive(Debug, Clone, Serialize)]
pub struct GenerationData {
    pub n: usize,
    pub admissible: Vec<MadicSquare>,
    /// F-squares used in `F^n`; empty for the last generation.
    pub f_squares: Vec<FChoice>,
    #[serde(with = "rational_str")]
    pub area_s: Rational,
    #[serde(with = "rational_str::opt")]
    pub area_f: Option<Rational>,
    /// Area of `F̃_n` in `S ∪ (S + 2l)`.
    #[serde(with = "rational_str::opt")]
    pub area_f_tilde: Option<Rational>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GenerationDecomposition {
    pub n0_tilde: usize,
    pub generations: Vec<GenerationData>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyVerdict {
    pub property: String,
    pub holds: Certified,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl PropertyVerdict {
    fn new(property: &str, holds: Certified, detail: Option<String>) -> Self {
        PropertyVerdict { property: property.into(), holds, detail }
    }
}

/// Outcome of [`certify_lemma1`]. Areas are fractions of `area(S)`.
#[derive(Debug, Clone, Serialize)]
pub struct Lemma1Report {
    /// `area(E) ≤ λ^N·area(S)`, decided as `Q^{2n0} ≤ (1 − ζ/2)^N`.
    pub bound_holds: bool,
    pub bound_certified: Certified,
    #[serde(with = "rational_str")]
    pub area_e: Rational,
    pub area_e_f64: f64,
    pub lambda_n_area_s: f64,
    /// `area(Ẽ) ≤ (1 − ζ/2)^{N0−1}·area(S̃)`, the bound the construction yields.
    pub chain_bound: Certified,
    pub chain_exponent: usize,
    pub n: usize,
    pub constants: LemmaConstants,
    pub hypotheses: HypothesisReport,
    pub decomposition: GenerationDecomposition,
    pub appendix_a: Vec<PropertyVerdict>,
    pub translated: Vec<PropertyVerdict>,
    pub representation: &'static str,
}

impl Lemma1Report {
    pub fn all_properties_hold(&self) -> bool {
        self.appendix_a.iter().chain(&self.translated).all(|p| p.holds.holds())
    }
}

fn holds_if(b: bool) -> Certified {
    Certified::from_bool(b)
}

/// Runs the admissible-square construction on `E` for `N` scales and checks
/// properties (1)–(5), their translated forms and the final inequality.
pub fn certify_lemma1(e: &CellSetE, k: &LemmaConstants, n_scales: usize) -> Result<Lemma1Report, CoveringError> {
    let n0 = k.n0 as usize;
    if n_scales < 2 * n0 {
        return Err(CoveringError::Unsupported(format!("N = {n_scales} below 2·n0 = {}", 2 * n0)));
    }
    if n_scales > e.levels() {
        return Err(CoveringError::InvalidArgument(format!("E tabulates {} scales, N = {n_scales}", e.levels())));
    }
    if e.is_empty() {
        return Err(CoveringError::InvalidArgument("E is empty".into()));
    }
    if e.base() != k.m {
        return Err(CoveringError::InvalidArgument(format!("E uses base {} but M = {}", e.base(), k.m)));
    }
    let hypotheses = e.verify_hypotheses(k);
    if !hypotheses.holds() {
        return Err(CoveringError::HypothesisViolation(hypotheses.first_failure.clone().unwrap_or_default()));
    }
    let base = e.base();
    let nt = n_scales / n0;
    let e_region = e.region();
    let mut adm = Vec::with_capacity(nt);
    for n in 1..=nt {
        let (list, unresolved) = classify_counted(e, k, n);
        if unresolved > 0 {
            return Err(CoveringError::ResolutionExceeded { n, depth: e.depth(), cells: unresolved });
        }
        adm.push(list);
    }
    let s_regions: Vec<Region> = adm.iter().map(|l| Region::from_squares(base, l)).collect();

    // F^n = F^{n1} ∪ (F^{n2} \ F^{n3}) for n < N0
    let fine = e.depth() + 1;
    let mut f_regions = Vec::new();
    let mut f_choices = Vec::new();
    let mut interior_ok = true;
    for n in 1..nt {
        let centers: Vec<MadicSquare> = adm[n - 1].iter().map(MadicSquare::center_child).collect();
        let f2 = Region::from_squares(base, &centers);
        let inner: Vec<&MadicSquare> = adm[n].iter().filter(|s| centers.iter().any(|c| s.within(c))).collect();
        let f3 = Region::from_squares(base, inner.iter().copied());
        let mut f1 = Region::empty(base);
        let mut choices = Vec::new();
        for s in &inner {
            let f = select_in(s, &e_region, k.c_exact())?;
            f1.insert(&f);
            choices.push(FChoice { square: (*s).clone(), f });
        }
        // each piece must sit in the open interior of its generation-n square
        for parent in &adm[n - 1] {
            let pb = LatticeBox::of(parent, fine, 1);
            let cc = parent.center_child();
            interior_ok &= pb.strictly_contains(&LatticeBox::of(&cc, fine, 1));
            for ch in choices.iter().filter(|ch| ch.square.within(&cc)) {
                interior_ok &= pb.strictly_contains(&LatticeBox::of(&ch.f, fine, 1));
            }
        }
        f_regions.push(f1.union(&f2.difference(&f3)));
        f_choices.push(choices);
    }

    // translation S + 2l: copy1 receives the part of F^n already covered
    let mut f_tilde: Vec<TwoCopies> = Vec::new();
    let mut covered0 = Region::empty(base);
    for f in &f_regions {
        let first = f.difference(&covered0);
        let second = f.intersection(&covered0);
        covered0 = covered0.union(&first);
        f_tilde.push(TwoCopies { copy0: first, copy1: second });
    }
    let s_tilde: Vec<TwoCopies> = s_regions.iter().map(TwoCopies::doubled).collect();
    let e_tilde = TwoCopies::doubled(&e_region);

    let mut props = Vec::new();
    let decreasing = s_regions.windows(2).all(|w| w[1].subset_of(&w[0]));
    props.push(PropertyVerdict::new("(1) S^n decreasing", holds_if(decreasing), None));
    let covers = s_regions.iter().all(|s| e_region.subset_of(s));
    props.push(PropertyVerdict::new("(2) E inside every S^n", holds_if(covers), None));
    let disjoint_e = f_regions.iter().all(|f| f.intersection(&e_region).is_empty());
    props.push(PropertyVerdict::new(
        "(3) F^n misses E and lies in the interior of S^n",
        holds_if(disjoint_e && interior_ok),
        (!interior_ok).then(|| "a piece of F^n touches the boundary of S^n".into()),
    ));
    let mut triple_free = true;
    for i in 0..f_regions.len() {
        for j in i + 1..f_regions.len() {
            let ij = f_regions[i].intersection(&f_regions[j]);
            for fl in &f_regions[j + 1..] {
                triple_free &= ij.intersection(fl).is_empty();
            }
        }
    }
    props.push(PropertyVerdict::new(
        "(4) each point lies in at most two F^n",
        holds_if(triple_free),
        Some("up to null sets".into()),
    ));
    let mut p5 = Certified::True;
    for (f, s) in f_regions.iter().zip(&s_regions) {
        let (af, as_) = (f.area(), s.area());
        p5 = p5.and(k.zeta_times_le(&as_, &af)).and(holds_if(af <= as_));
    }
    props.push(PropertyVerdict::new("(5) zeta·area(S^n) ≤ area(F^n) ≤ area(S^n)", p5, None));

    let mut tr = Vec::new();
    let dec_t = s_tilde.windows(2).all(|w| w[1].difference(&w[0]).is_empty());
    tr.push(PropertyVerdict::new("(1') S~^n decreasing", holds_if(dec_t), None));
    let cov_t = s_tilde.iter().all(|s| e_tilde.difference(s).is_empty());
    tr.push(PropertyVerdict::new("(2') E~ inside every S~^n", holds_if(cov_t), None));
    let in_t =
        f_tilde.iter().zip(&s_tilde).all(|(f, s)| f.difference(s).is_empty() && f.intersection(&e_tilde).is_empty());
    tr.push(PropertyVerdict::new("(3') F~_n inside S~^n and misses E~", holds_if(in_t), None));
    let mut pair_free = true;
    for i in 0..f_tilde.len() {
        for j in i + 1..f_tilde.len() {
            pair_free &= f_tilde[i].intersection(&f_tilde[j]).is_empty();
        }
    }
    tr.push(PropertyVerdict::new("(4') F~_i pairwise disjoint", holds_if(pair_free), None));
    let mut p5t = Certified::True;
    let two = Rational::from_integer(2.into());
    for (f, s) in f_tilde.iter().zip(&s_tilde) {
        let (af, as_) = (f.area(), s.area());
        p5t = p5t.and(k.zeta_times_le(&as_, &(&two * &af))).and(holds_if(af <= as_));
    }
    tr.push(PropertyVerdict::new("(5') (zeta/2)·area(S~^n) ≤ area(F~_n) ≤ area(S~^n)", p5t, None));
    let doubled = e_tilde.area() == &two * e.area();
    tr.push(PropertyVerdict::new("area(E~) = 2·area(E)", holds_if(doubled), None));

    // area(S~^{N0−1} \ ∪ F~_j) ≤ (1 − ζ/2)^{N0−1}·area(S~)
    let mut rest = s_tilde[nt - 2].clone();
    for f in &f_tilde {
        rest = rest.difference(f);
    }
    let contains_e = e_tilde.difference(&rest).is_empty();
    let zb = k.zeta_bracket();
    let half = Rational::new(1.into(), 2.into());
    let one = Rational::one();
    let factor_lo = &one - &zb.hi * &half;
    let factor_hi = &one - &zb.lo * &half;
    let exp = (nt - 1) as u32;
    let a_rest = rest.area();
    let chain = if !contains_e {
        Certified::False
    } else if a_rest <= &two * pow(&factor_lo, exp) {
        Certified::True
    } else if a_rest > &two * pow(&factor_hi, exp) {
        Certified::False
    } else {
        Certified::Indeterminate
    };

    let q = e.area();
    let q_pow = pow(&q, 2 * k.n0);
    let n_u = n_scales as u32;
    let bound_certified = if q_pow <= pow(&factor_lo, n_u) {
        Certified::True
    } else if q_pow > pow(&factor_hi, n_u) {
        Certified::False
    } else {
        Certified::Indeterminate
    };

    let generations = (1..=nt)
        .map(|n| GenerationData {
            n,
            admissible: adm[n - 1].clone(),
            f_squares: f_choices.get(n - 1).cloned().unwrap_or_default(),
            area_s: s_regions[n - 1].area(),
            area_f: f_regions.get(n - 1).map(Region::area),
            area_f_tilde: f_tilde.get(n - 1).map(TwoCopies::area),
        })
        .collect();
    Ok(Lemma1Report {
        bound_holds: bound_certified.holds(),
        bound_certified,
        area_e_f64: q.to_f64().unwrap_or(f64::NAN),
        area_e: q,
        lambda_n_area_s: k.lambda.powi(n_scales as i32),
        chain_bound: chain,
        chain_exponent: nt - 1,
        n: n_scales,
        constants: k.clone(),
        hypotheses,
        decomposition: GenerationDecomposition { n0_tilde: nt, generations },
        appendix_a: props,
        translated: tr,
        representation: "E is a finite union of depth-K cells with piecewise-constant exclusion data",
    })
}
