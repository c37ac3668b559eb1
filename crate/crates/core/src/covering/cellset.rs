use super::constants::LemmaConstants;
use super::region::Region;
use super::square::{LatticeBox, MadicSquare};
use super::CoveringError;
use crate::scalar::Rational;
use num_bigint::BigInt;
use num_integer::Roots;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};

/// Side of a depth-`K` cell in lattice units; cell centers are lattice points.
pub const CELL_UNITS: i64 = 2;

/// One member cell with its exclusion data for scales `1..=N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExclusionCell {
    pub col: u32,
    pub row: u32,
    /// `r_n` in lattice units, index `n − 1`.
    pub r: Vec<i64>,
    /// `y_n` in lattice units, index `n − 1`.
    pub y: Vec<[i64; 2]>,
}

impl ExclusionCell {
    pub fn lattice_box(&self) -> LatticeBox {
        LatticeBox { x0: self.col as i64 * CELL_UNITS, y0: self.row as i64 * CELL_UNITS, side: CELL_UNITS }
    }
}

/// `E` as a union of depth-`K` cells of the `M`-adic tree of `S = [0, l]²`,
/// with piecewise-constant `r_n`, `y_n`. Lengths are integers in units of
/// `l / (2·M^K)`; areas are fractions of `area(S)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CellSetFile", into = "CellSetFile")]
pub struct CellSetE {
    base: u32,
    depth: usize,
    levels: usize,
    cells: Vec<ExclusionCell>,
}

#[derive(Serialize, Deserialize)]
struct ScaleRecord {
    r: i64,
    y: [i64; 2],
}

#[derive(Serialize, Deserialize)]
struct CellSetFile {
    l: String,
    base: u32,
    depth: usize,
    levels: usize,
    /// Length of one lattice unit as a fraction of `l`.
    unit: String,
    cells: Vec<Vec<u32>>,
    r_tables: Vec<Vec<ScaleRecord>>,
}

impl From<CellSetE> for CellSetFile {
    fn from(e: CellSetE) -> Self {
        let unit = format!("1/{}", e.l_units());
        let cells = e.cells.iter().map(|c| e.square_of(c).path).collect();
        let r_tables =
            e.cells.iter().map(|c| c.r.iter().zip(&c.y).map(|(&r, &y)| ScaleRecord { r, y }).collect()).collect();
        CellSetFile { l: "1".into(), base: e.base, depth: e.depth, levels: e.levels, unit, cells, r_tables }
    }
}

impl TryFrom<CellSetFile> for CellSetE {
    type Error = CoveringError;

    fn try_from(f: CellSetFile) -> Result<Self, CoveringError> {
        if f.cells.len() != f.r_tables.len() {
            return Err(CoveringError::InvalidInstance("cells and r_tables differ in length".into()));
        }
        let mut e = CellSetE::new(f.base, f.depth, f.levels)?;
        for (path, table) in f.cells.into_iter().zip(f.r_tables) {
            let sq = validate_path(f.base, f.depth, path)?;
            let (col, row) = sq.col_row();
            let r = table.iter().map(|s| s.r).collect();
            let y = table.iter().map(|s| s.y).collect();
            e.push(ExclusionCell { col: col as u32, row: row as u32, r, y })?;
        }
        Ok(e)
    }
}

pub(crate) fn validate_path(base: u32, depth: usize, path: Vec<u32>) -> Result<MadicSquare, CoveringError> {
    if path.len() != depth || path.iter().any(|&d| d < 1 || d > base * base) {
        return Err(CoveringError::InvalidInstance(format!("bad cell path {path:?}")));
    }
    Ok(MadicSquare { base, path })
}

impl CellSetE {
    pub fn new(base: u32, depth: usize, levels: usize) -> Result<Self, CoveringError> {
        if base < 2 || depth == 0 {
            return Err(CoveringError::InvalidArgument("base ≥ 2 and depth ≥ 1 required".into()));
        }
        if (base as f64).powi(depth as i32) * CELL_UNITS as f64 > 4.0e15 {
            return Err(CoveringError::InvalidArgument("resolution too fine for the lattice".into()));
        }
        Ok(CellSetE { base, depth, levels, cells: Vec::new() })
    }

    /// Adds a cell, keeping row-major order; duplicates are rejected.
    pub fn push(&mut self, cell: ExclusionCell) -> Result<(), CoveringError> {
        let n = self.cells_per_side();
        if cell.col as u64 >= n || cell.row as u64 >= n {
            return Err(CoveringError::InvalidInstance("cell outside S".into()));
        }
        if cell.r.len() != self.levels || cell.y.len() != self.levels {
            return Err(CoveringError::InvalidInstance("exclusion table length differs from N".into()));
        }
        let key = |c: &ExclusionCell| (c.row, c.col);
        match self.cells.binary_search_by_key(&key(&cell), key) {
            Ok(_) => Err(CoveringError::InvalidInstance("duplicate cell".into())),
            Err(i) => {
                self.cells.insert(i, cell);
                Ok(())
            }
        }
    }

    pub(crate) fn from_sorted(base: u32, depth: usize, levels: usize, cells: Vec<ExclusionCell>) -> Self {
        debug_assert!(cells.windows(2).all(|w| (w[0].row, w[0].col) < (w[1].row, w[1].col)));
        CellSetE { base, depth, levels, cells }
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Number of scales `N` tabulated.
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[ExclusionCell] {
        &self.cells
    }

    pub fn cells_per_side(&self) -> u64 {
        (self.base as u64).pow(self.depth as u32)
    }

    /// `l` in lattice units.
    pub fn l_units(&self) -> i64 {
        CELL_UNITS * self.cells_per_side() as i64
    }

    pub fn square_of(&self, c: &ExclusionCell) -> MadicSquare {
        MadicSquare::from_col_row(self.base, self.depth, c.col as u64, c.row as u64)
    }

    /// `area(E) / area(S) = #cells / M^{2K}`.
    pub fn area(&self) -> Rational {
        Rational::new(BigInt::from(self.len()), BigInt::from(self.cells_per_side()).pow(2))
    }

    pub fn region(&self) -> Region {
        let mut r = Region::empty(self.base);
        for c in &self.cells {
            r.insert(&self.square_of(c));
        }
        r
    }

    /// `r̃_n = r_{n·n0}` for `1 ≤ n ≤ N0`.
    pub fn r_tilde(c: &ExclusionCell, n: usize, n0: u32) -> i64 {
        c.r[n * n0 as usize - 1]
    }

    pub fn y_tilde(c: &ExclusionCell, n: usize, n0: u32) -> [i64; 2] {
        c.y[n * n0 as usize - 1]
    }

    pub(crate) fn occupancy(&self) -> Occupancy {
        let mut o = Occupancy::default();
        for c in &self.cells {
            o.insert(c.col, c.row);
        }
        o
    }

    /// Re-verifies (a)–(d) and their regrouped forms (ã)–(d̃) on the tables.
    pub fn verify_hypotheses(&self, k: &LemmaConstants) -> HypothesisReport {
        let mut rep = HypothesisReport::default();
        let fail = |rep: &mut HypothesisReport, what: String| {
            if rep.first_failure.is_none() {
                rep.first_failure = Some(what);
            }
        };
        let eta = k.eta_exact();
        let c2 = k.c_exact() * k.c_exact();
        let l = BigInt::from(self.l_units());
        let n0 = k.n0 as usize;
        let n_tilde = self.levels / n0;
        let r_of = |v: i64| Rational::from_integer(v.into());
        let occ = self.occupancy();
        let mut balls_seen = HashSet::new();
        for c in &self.cells {
            let bx = c.lattice_box();
            for n in 0..self.levels {
                let r = c.r[n];
                let ok_a = n > 0 || (r > 0 && r_of(r) <= eta * Rational::from_integer(l.clone()));
                let ok_b = r > 0 && (n == 0 || r_of(r) <= eta * r_of(c.r[n - 1]));
                let [yx, yy] = c.y[n];
                let far = Rational::from_integer(bx.point_far2(yx, yy).into());
                let ok_c = far <= &c2 * r_of(r) * r_of(r);
                let ok_d = !balls_seen.insert((yx, yy, r)) || occ.ball_count([yx, yy], r) == 0;
                for (ok, tag) in [(ok_a, "a"), (ok_b, "b"), (ok_c, "c"), (ok_d, "d")] {
                    if !ok {
                        match tag {
                            "a" => rep.a = false,
                            "b" => rep.b = false,
                            "c" => rep.c = false,
                            _ => rep.d = false,
                        }
                        let what = format!("({tag}) fails at cell ({}, {}), n = {}", c.col, c.row, n + 1);
                        fail(&mut rep, what);
                    }
                }
            }
            let m = Rational::from_integer(k.m.into());
            for n in 1..=n_tilde {
                let rt = r_of(Self::r_tilde(c, n, k.n0));
                let ok = if n == 1 {
                    rt.clone() * &m <= Rational::from_integer(l.clone())
                } else {
                    rt * &m <= r_of(Self::r_tilde(c, n - 1, k.n0))
                };
                if !ok {
                    rep.ab_tilde = false;
                    fail(&mut rep, format!("regrouped radii fail at cell ({}, {}), n = {n}", c.col, c.row));
                }
            }
        }
        rep
    }
}

/// Outcome of the hypothesis re-check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub a: bool,
    pub b: bool,
    pub c: bool,
    pub d: bool,
    /// `0 < r̃_1 ≤ l/M` and `r̃_{n+1} ≤ r̃_n / M`.
    pub ab_tilde: bool,
    pub first_failure: Option<String>,
}

impl Default for HypothesisReport {
    fn default() -> Self {
        HypothesisReport { a: true, b: true, c: true, d: true, ab_tilde: true, first_failure: None }
    }
}

impl HypothesisReport {
    pub fn holds(&self) -> bool {
        self.a && self.b && self.c && self.d && self.ab_tilde
    }
}

const BLOCK: u32 = 64;

/// Cell bitmap in 64×64 blocks for open-ball queries.
#[derive(Debug, Clone, Default)]
pub(crate) struct Occupancy {
    blocks: HashMap<(u32, u32), [u64; BLOCK as usize]>,
    count: usize,
}

impl Occupancy {
    pub fn insert(&mut self, col: u32, row: u32) {
        let b = self.blocks.entry((col / BLOCK, row / BLOCK)).or_insert([0; BLOCK as usize]);
        let w = &mut b[(row % BLOCK) as usize];
        let bit = 1u64 << (col % BLOCK);
        if *w & bit == 0 {
            *w |= bit;
            self.count += 1;
        }
    }

    pub fn contains(&self, col: u32, row: u32) -> bool {
        self.blocks
            .get(&(col / BLOCK, row / BLOCK))
            .is_some_and(|b| b[(row % BLOCK) as usize] >> (col % BLOCK) & 1 == 1)
    }

    #[cfg(test)]
    pub fn len(&self) -> usize {
        self.count
    }

    /// Calls `f` on every member cell whose interior meets the open ball `B(y, r)`.
    fn for_ball(&self, y: [i64; 2], r: i64, mut f: impl FnMut(u32, u32)) {
        if r <= 0 || self.count == 0 {
            return;
        }
        let [yx, yy] = y;
        let r2 = (r as i128) * (r as i128);
        let lo = |v: i64| (v - r).div_euclid(CELL_UNITS).max(0);
        let hi = |v: i64| (v + r).div_euclid(CELL_UNITS);
        let (c0, c1, r0, r1) = (lo(yx), hi(yx), lo(yy), hi(yy));
        if c1 < 0 || r1 < 0 {
            return;
        }
        let bw = BLOCK as i64;
        let (bx0, bx1, by0, by1) = (c0 / bw, c1 / bw, r0 / bw, r1 / bw);
        let nblocks = (bx1 - bx0 + 1) as u128 * (by1 - by0 + 1) as u128;
        let mut visit = |(bx, by): (u32, u32), rows: &[u64; BLOCK as usize]| {
            for (j, &bits) in rows.iter().enumerate() {
                if bits == 0 {
                    continue;
                }
                let row = by as i64 * bw + j as i64;
                let y0 = row * CELL_UNITS;
                let dy = (y0 - yy).max(yy - y0 - CELL_UNITS).max(0) as i128;
                if dy * dy >= r2 {
                    continue;
                }
                // dx ≤ s with s² < r² − dy²
                let s = ((r2 - dy * dy - 1) as u128).sqrt() as i64;
                let a0 = (yx - s - 1).div_euclid(CELL_UNITS).max(bx as i64 * bw);
                let a1 = (yx + s).div_euclid(CELL_UNITS).min(bx as i64 * bw + bw - 1);
                if a1 < a0 {
                    continue;
                }
                let (lo_b, hi_b) = ((a0 - bx as i64 * bw) as u32, (a1 - bx as i64 * bw) as u32);
                let mask = if hi_b == 63 { u64::MAX } else { (1u64 << (hi_b + 1)) - 1 } & !((1u64 << lo_b) - 1);
                let mut hit = bits & mask;
                while hit != 0 {
                    let t = hit.trailing_zeros();
                    hit &= hit - 1;
                    f(bx * BLOCK + t, row as u32);
                }
            }
        };
        if nblocks > self.blocks.len() as u128 {
            for (&key, rows) in &self.blocks {
                let (bx, by) = (key.0 as i64, key.1 as i64);
                if bx >= bx0 && bx <= bx1 && by >= by0 && by <= by1 {
                    visit(key, rows);
                }
            }
        } else {
            for bx in bx0..=bx1 {
                for by in by0..=by1 {
                    if let Some(rows) = self.blocks.get(&(bx as u32, by as u32)) {
                        visit((bx as u32, by as u32), rows);
                    }
                }
            }
        }
    }

    pub fn ball_count(&self, y: [i64; 2], r: i64) -> usize {
        let mut n = 0;
        self.for_ball(y, r, |_, _| n += 1);
        n
    }

    /// Removes and returns the member cells meeting the open ball.
    pub fn remove_ball(&mut self, y: [i64; 2], r: i64) -> Vec<(u32, u32)> {
        let mut hit = Vec::new();
        self.for_ball(y, r, |c, r| hit.push((c, r)));
        for &(c, r) in &hit {
            let b = self.blocks.get_mut(&(c / BLOCK, r / BLOCK)).unwrap();
            b[(r % BLOCK) as usize] &= !(1u64 << (c % BLOCK));
        }
        self.count -= hit.len();
        hit
    }
}
