use super::cellset::{validate_path, CELL_UNITS};
use super::lemma1::PropertyVerdict;
use super::rational_str;
use super::region::Region;
use super::square::MadicSquare;
use super::CoveringError;
use crate::scalar::{pi_bracket, rational_from_f64, Certified, Rational};
use num_bigint::BigInt;
use num_integer::Roots;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// `E` as depth-`K` cells of the dyadic tree with a constant radius `r` per
/// cell, in units of `l / 2^{K+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DensityFile", into = "DensityFile")]
pub struct DensityCellSet {
    depth: usize,
    /// `(col, row, r)` in row-major order.
    cells: Vec<(u32, u32, i64)>,
}

#[derive(Serialize, Deserialize)]
struct DensityFile {
    l: String,
    base: u32,
    depth: usize,
    unit: String,
    cells: Vec<Vec<u32>>,
    r_map: Vec<i64>,
}

impl From<DensityCellSet> for DensityFile {
    fn from(e: DensityCellSet) -> Self {
        DensityFile {
            l: "1".into(),
            base: 2,
            depth: e.depth,
            unit: format!("1/{}", e.l_units()),
            cells: e
                .cells
                .iter()
                .map(|&(c, r, _)| MadicSquare::from_col_row(2, e.depth, c as u64, r as u64).path)
                .collect(),
            r_map: e.cells.iter().map(|c| c.2).collect(),
        }
    }
}

impl TryFrom<DensityFile> for DensityCellSet {
    type Error = CoveringError;

    fn try_from(f: DensityFile) -> Result<Self, CoveringError> {
        if f.base != 2 {
            return Err(CoveringError::InvalidInstance("density instances use base 2".into()));
        }
        if f.cells.len() != f.r_map.len() {
            return Err(CoveringError::InvalidInstance("cells and r_map differ in length".into()));
        }
        let mut cells = Vec::with_capacity(f.cells.len());
        for (p, r) in f.cells.into_iter().zip(f.r_map) {
            let (c, w) = validate_path(2, f.depth, p)?.col_row();
            cells.push((c as u32, w as u32, r));
        }
        DensityCellSet::new(f.depth, cells)
    }
}

impl DensityCellSet {
    pub fn new(depth: usize, mut cells: Vec<(u32, u32, i64)>) -> Result<Self, CoveringError> {
        if depth == 0 || depth > 24 {
            return Err(CoveringError::InvalidArgument("depth must lie in 1..=24".into()));
        }
        let n = 1u64 << depth;
        cells.sort_by_key(|&(c, r, _)| (r, c));
        if cells.windows(2).any(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(CoveringError::InvalidInstance("duplicate cell".into()));
        }
        if cells.iter().any(|&(c, r, _)| c as u64 >= n || r as u64 >= n) {
            return Err(CoveringError::InvalidInstance("cell outside S".into()));
        }
        Ok(DensityCellSet { depth, cells })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn cells(&self) -> &[(u32, u32, i64)] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn l_units(&self) -> i64 {
        CELL_UNITS << self.depth
    }

    pub fn area(&self) -> Rational {
        Rational::new(BigInt::from(self.len()), BigInt::from(1u64 << self.depth).pow(2))
    }

    /// Per cell, an upper bound on `#{cells meeting B(x, r)}` over `x` in the cell.
    fn neighbour_counts(&self) -> Vec<u64> {
        let n = 1usize << self.depth;
        // row-wise prefix sums of occupancy
        let mut pre = vec![0u32; n * (n + 1)];
        for &(c, r, _) in &self.cells {
            pre[r as usize * (n + 1) + c as usize + 1] = 1;
        }
        for row in 0..n {
            for c in 0..n {
                pre[row * (n + 1) + c + 1] += pre[row * (n + 1) + c];
            }
        }
        self.cells
            .iter()
            .map(|&(c, r, rad)| {
                let r2 = (rad as i128) * (rad as i128);
                let reach = rad / CELL_UNITS + 1;
                let mut total = 0u64;
                for dr in -reach..=reach {
                    let row = r as i64 + dr;
                    if row < 0 || row >= n as i64 {
                        continue;
                    }
                    let dy = (CELL_UNITS * dr.abs() - CELL_UNITS).max(0) as i128;
                    if dy * dy >= r2 {
                        continue;
                    }
                    // box gap dx = 2|dc| − 2 must satisfy dx ≤ s with s² < r² − dy²
                    let s = ((r2 - dy * dy - 1) as u128).sqrt() as i64;
                    let w = (s + CELL_UNITS) / CELL_UNITS;
                    let lo = (c as i64 - w).max(0) as usize;
                    let hi = (c as i64 + w).min(n as i64 - 1) as usize;
                    let base = row as usize * (n + 1);
                    total += (pre[base + hi + 1] - pre[base + lo]) as u64;
                }
                total
            })
            .collect()
    }

    /// Cells for which `area(B(x, r)∩E) ≤ λ·π r²` is certified for all `x` in the cell.
    pub fn density_verified(&self, lambda: &Rational) -> Vec<bool> {
        let pi_lo = pi_bracket().lo;
        let cell_area = Rational::from_integer((CELL_UNITS * CELL_UNITS).into());
        self.neighbour_counts()
            .into_iter()
            .zip(&self.cells)
            .map(|(cnt, &(_, _, r))| {
                let lhs = Rational::from_integer(cnt.into()) * &cell_area;
                lhs <= lambda * &pi_lo * Rational::from_integer(((r as i128) * (r as i128)).into())
            })
            .collect()
    }
}

/// Outcome of [`certify_lemma2`]. Areas are fractions of `area(S)`.
#[derive(Debug, Clone, Serialize)]
pub struct Lemma2Report {
    /// `area(E) ≤ 8π·λ·area(S)`.
    pub bound_holds: Certified,
    #[serde(with = "rational_str")]
    pub area_e: Rational,
    /// `area(E) / area(S)`.
    pub measured_ratio: f64,
    pub lambda: f64,
    /// Local density was certified for every cell rather than assumed.
    pub density_verified: bool,
    pub admissible_squares: usize,
    /// Deepest admissible square, counting squares below the cell resolution.
    pub max_depth: usize,
    pub properties: Vec<PropertyVerdict>,
}

#[derive(Debug, Clone)]
struct Admissible {
    square: MadicSquare,
    /// Depth of the admissible squares; exceeds `square.depth()` when the
    /// whole cell splits into `4^{extra}` admissible subsquares.
    depth: usize,
}

fn within(r: i64, l_units: i64, k: usize) -> bool {
    // r ≤ √2·l/2^k  ⟺  r²·4^k ≤ 2 l²
    let r2 = (r as i128) * (r as i128);
    let l2 = (l_units as i128) * (l_units as i128);
    if 2 * k < 120 {
        r2 << (2 * k) <= 2 * l2
    } else {
        false
    }
}

fn decompose(e: &DensityCellSet) -> Vec<Admissible> {
    let kk = e.depth;
    let l = e.l_units();
    let mut agg: Vec<HashMap<(u64, u64), i64>> = vec![HashMap::new(); kk + 1];
    for &(c, r, rad) in &e.cells {
        for (d, level) in agg.iter_mut().enumerate() {
            let key = ((c >> (kk - d)) as u64, (r >> (kk - d)) as u64);
            let v = level.entry(key).or_insert(rad);
            *v = (*v).max(rad);
        }
    }
    let mut out = Vec::new();
    let mut stack = vec![(0usize, (0u64, 0u64))];
    while let Some((d, (c, r))) = stack.pop() {
        for (dc, dr) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            let ch = (2 * c + dc, 2 * r + dr);
            let j = d + 1;
            let Some(&rad) = agg[j].get(&ch) else { continue };
            if !within(rad, l, j) {
                // R_j > √2 l/2^j and every ancestor passed: admissible at depth j
                out.push(Admissible { square: MadicSquare::from_col_row(2, j, ch.0, ch.1), depth: j });
            } else if j == kk {
                // uniform radius inside the cell: first depth with r > √2 l/2^k
                let k = (kk + 1..).find(|&k| !within(rad, l, k)).unwrap();
                out.push(Admissible { square: MadicSquare::from_col_row(2, j, ch.0, ch.1), depth: k });
            } else {
                stack.push((j, ch));
            }
        }
    }
    out.sort_by(|a, b| a.square.cmp(&b.square));
    out
}

/// Dyadic admissible-square decomposition of `E` and the bound
/// `area(E) ≤ 8π·λ·area(S)`. With `assume_density` the local density
/// hypothesis is taken on trust; otherwise it is certified cell by cell.
pub fn certify_lemma2(e: &DensityCellSet, lambda: f64, assume_density: bool) -> Result<Lemma2Report, CoveringError> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(CoveringError::InvalidArgument("lambda must be positive".into()));
    }
    let l = e.l_units();
    if e.cells.iter().any(|&(_, _, r)| r <= 0 || r >= l) {
        return Err(CoveringError::InvalidArgument("r must lie in (0, l) on every cell".into()));
    }
    let lam = rational_from_f64(lambda).unwrap();
    let density_verified = if assume_density {
        false
    } else {
        let ok = e.density_verified(&lam);
        if let Some(i) = ok.iter().position(|v| !v) {
            let (c, r, _) = e.cells[i];
            return Err(CoveringError::HypothesisViolation(format!("local density above lambda at cell ({c}, {r})")));
        }
        true
    };
    let adm = decompose(e);
    let kk = e.depth;
    let e_region = Region::from_squares(
        2,
        &e.cells.iter().map(|&(c, r, _)| MadicSquare::from_col_row(2, kk, c as u64, r as u64)).collect::<Vec<_>>(),
    );
    let as_region = Region::from_squares(2, adm.iter().map(|a| &a.square));
    let p1 = e_region.subset_of(&as_region);
    // no admissible square contains another
    let p2 = adm.iter().enumerate().all(|(i, a)| {
        adm.iter().enumerate().all(|(j, b)| i == j || !(a.square.within(&b.square) || b.square.within(&a.square)))
    });
    let pi = pi_bracket();
    let eight_lam = Rational::from_integer(8.into()) * &lam;
    let (c_lo, c_hi) = (&eight_lam * &pi.lo, &eight_lam * &pi.hi);
    let cert_le = |ratio: &Rational| {
        if ratio <= &c_lo {
            Certified::True
        } else if ratio > &c_hi {
            Certified::False
        } else {
            Certified::Indeterminate
        }
    };
    let mut p3 = Certified::True;
    for a in &adm {
        // area(Sq∩E)/area(Sq): cells inside a square, or 1 below the resolution
        let ratio = if a.depth > kk {
            Rational::one()
        } else {
            e_region.intersection(&Region::from_squares(2, [&a.square])).area() * BigInt::from(4u32).pow(a.depth as u32)
        };
        p3 = p3.and(cert_le(&ratio));
    }
    let area_e = e.area();
    let properties = vec![
        PropertyVerdict {
            property: "(1) E inside the union of admissible squares".into(),
            holds: Certified::from_bool(p1),
            detail: None,
        },
        PropertyVerdict {
            property: "(2) admissible squares have disjoint interiors".into(),
            holds: Certified::from_bool(p2),
            detail: None,
        },
        PropertyVerdict { property: "(3) area(Sq∩E) ≤ 8π·λ·area(Sq)".into(), holds: p3, detail: None },
    ];
    Ok(Lemma2Report {
        bound_holds: cert_le(&area_e),
        measured_ratio: area_e.to_f64().unwrap_or(f64::NAN),
        area_e,
        lambda,
        density_verified,
        admissible_squares: adm.len(),
        max_depth: adm.iter().map(|a| a.depth).max().unwrap_or(0),
        properties,
    })
}

/// Random cell set of resolution `depth` satisfying the density hypothesis
/// with constant `lambda`: cells whose density cannot be certified are
/// removed until every survivor passes.
pub fn synth_lemma2(seed: u64, depth: usize, lambda: f64) -> Result<DensityCellSet, CoveringError> {
    if !(1..=12).contains(&depth) {
        return Err(CoveringError::InvalidArgument("depth must lie in 1..=12".into()));
    }
    let lam = rational_from_f64(lambda).ok_or_else(|| CoveringError::InvalidArgument("lambda".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 1u32 << depth;
    let l = CELL_UNITS << depth;
    // sparse enough that most cells pass the cell-count density bound
    let p: f64 = rng.gen_range(0.2..0.6) * lambda.min(1.0);
    let mut cells = Vec::new();
    for row in 0..n {
        for col in 0..n {
            if rng.gen_bool(p) {
                let u: f64 = rng.gen_range(0.3..(depth as f64 - 1.5).max(0.5));
                let r = ((l as f64) * (-u).exp2()).floor() as i64;
                cells.push((col, row, r.clamp(1, l - 1)));
            }
        }
    }
    let mut e = DensityCellSet::new(depth, cells)?;
    loop {
        let ok = e.density_verified(&lam);
        if ok.iter().all(|&v| v) {
            return Ok(e);
        }
        let kept = e.cells.iter().zip(&ok).filter(|(_, &v)| v).map(|(c, _)| *c).collect();
        e = DensityCellSet::new(depth, kept)?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_counts(e: &DensityCellSet) -> Vec<u64> {
        e.cells
            .iter()
            .map(|&(c, r, rad)| {
                let a = super::super::square::LatticeBox { x0: c as i64 * 2, y0: r as i64 * 2, side: 2 };
                e.cells
                    .iter()
                    .filter(|&&(c2, r2, _)| {
                        let b = super::super::square::LatticeBox { x0: c2 as i64 * 2, y0: r2 as i64 * 2, side: 2 };
                        a.dist2(&b) < (rad as i128) * (rad as i128)
                    })
                    .count() as u64
            })
            .collect()
    }

    #[test]
    fn neighbour_counts_match_brute_force() {
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cells: Vec<_> = (0..16u32)
                .flat_map(|r| (0..16u32).map(move |c| (c, r)))
                .filter(|_| rng.gen_bool(0.4))
                .map(|(c, r)| (c, r, 1 + (c as i64 * 7 + r as i64 * 3) % 31))
                .collect();
            let e = DensityCellSet::new(4, cells).unwrap();
            assert_eq!(e.neighbour_counts(), brute_counts(&e));
        }
    }

    #[test]
    fn single_cell_half_radius() {
        // l = 2^{K+1} units; r = l/2
        let e = DensityCellSet::new(3, vec![(3, 4, 8)]).unwrap();
        let rep = certify_lemma2(&e, 0.05, false).unwrap();
        assert_eq!(rep.max_depth, 2);
        assert!(rep.properties[0].holds.holds() && rep.properties[1].holds.holds());
        assert_eq!(rep.bound_holds, Certified::True);
        assert!(certify_lemma2(&e, 0.001, false).is_err());
        let bad = DensityCellSet::new(3, vec![(0, 0, 16)]).unwrap();
        assert!(matches!(certify_lemma2(&bad, 1.0, true), Err(CoveringError::InvalidArgument(_))));
    }

    #[test]
    fn lambda_one_is_trivial() {
        let cells = (0..8u32).flat_map(|r| (0..8u32).map(move |c| (c, r, 5))).collect();
        let e = DensityCellSet::new(3, cells).unwrap();
        let rep = certify_lemma2(&e, 1.0, true).unwrap();
        assert_eq!(rep.bound_holds, Certified::True);
        assert!(rep.properties.iter().all(|p| p.holds.holds()));
    }

    #[test]
    fn sub_resolution_radii_split_cells() {
        let e = DensityCellSet::new(2, vec![(1, 1, 1)]).unwrap();
        // the cell-count bound cannot certify a ball smaller than one cell
        assert!(certify_lemma2(&e, 1.0, false).is_err());
        let rep = certify_lemma2(&e, 1.0, true).unwrap();
        assert!(!rep.density_verified);
        // r = l/8 ≤ √2 l/4 so subsquares of depth 4 are admissible
        assert_eq!(rep.max_depth, 4);
        assert!(rep.properties.iter().all(|p| p.holds.holds()));
    }

    #[test]
    fn json_round_trip() {
        let e = synth_lemma2(3, 4, 0.3).unwrap();
        let s = serde_json::to_string(&e).unwrap();
        assert_eq!(serde_json::from_str::<DensityCellSet>(&s).unwrap(), e);
    }

    #[test]
    fn periodic_grid_density() {
        // every other row and column: local density near 1/4 in large balls
        let cells: Vec<_> = (0..32u32)
            .flat_map(|r| (0..32u32).map(move |c| (c, r)))
            .filter(|&(c, r)| c % 2 == 0 && r % 2 == 0)
            .map(|(c, r)| (c, r, 16))
            .collect();
        let e = DensityCellSet::new(5, cells).unwrap();
        let pi_lo = pi_bracket().lo.to_f64().unwrap();
        let worst = e.neighbour_counts().iter().map(|&n| n as f64 * 4.0 / (pi_lo * 256.0)).fold(0.0, f64::max);
        let lambda = worst * (1.0 + 1e-9);
        let rep = certify_lemma2(&e, lambda, false).unwrap();
        assert!(rep.density_verified && rep.properties.iter().all(|p| p.holds.holds()));
        assert_eq!(rep.measured_ratio, 0.25);
        assert!(rep.measured_ratio <= 8.0 * std::f64::consts::PI * lambda);
    }

    proptest::proptest! {
        #[test]
        fn generated_instances_certify(seed in 0u64..10_000, depth in 4usize..=6, lambda in 0.02f64..0.5) {
            let e = synth_lemma2(seed, depth, lambda).unwrap();
            let rep = certify_lemma2(&e, lambda, false).unwrap();
            proptest::prop_assert!(rep.properties.iter().all(|p| p.holds.holds()));
            proptest::prop_assert_eq!(rep.bound_holds, Certified::True);
        }
    }
}
