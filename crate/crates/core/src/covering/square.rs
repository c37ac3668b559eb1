use serde::{Deserialize, Serialize};

/// Square of the `base`-adic tree of `S`: digit `i = p·base + q` with
/// `0 < q ≤ base` selects row `p+1` and column `q` of the parent. Rows are
/// counted from `y = 0` upward, columns from `x = 0` rightward.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MadicSquare {
    pub base: u32,
    pub path: Vec<u32>,
}

impl MadicSquare {
    pub fn root(base: u32) -> Self {
        MadicSquare { base, path: Vec::new() }
    }

    pub fn depth(&self) -> usize {
        self.path.len()
    }

    /// Zero-based `(row, col)` inside the parent for a digit.
    pub fn decode(base: u32, digit: u32) -> (u32, u32) {
        debug_assert!(digit >= 1 && digit <= base * base);
        let p = (digit - 1) / base;
        let q = digit - p * base;
        (p, q - 1)
    }

    pub fn encode(base: u32, row: u32, col: u32) -> u32 {
        row * base + col + 1
    }

    /// Zero-based `(col, row)` among all squares of the same depth.
    pub fn col_row(&self) -> (u64, u64) {
        let b = self.base as u64;
        self.path.iter().fold((0, 0), |(c, r), &d| {
            let (p, q) = Self::decode(self.base, d);
            (c * b + q as u64, r * b + p as u64)
        })
    }

    pub fn from_col_row(base: u32, depth: usize, col: u64, row: u64) -> Self {
        let b = base as u64;
        let mut path = vec![0; depth];
        let (mut c, mut r) = (col, row);
        for i in (0..depth).rev() {
            path[i] = Self::encode(base, (r % b) as u32, (c % b) as u32);
            c /= b;
            r /= b;
        }
        MadicSquare { base, path }
    }

    pub fn child(&self, digit: u32) -> Self {
        let mut path = self.path.clone();
        path.push(digit);
        MadicSquare { base: self.base, path }
    }

    /// Child with digit `(base² + 1)/2` (base odd).
    pub fn center_child(&self) -> Self {
        self.child((self.base * self.base).div_ceil(2))
    }

    pub fn prefix(&self, k: usize) -> Self {
        MadicSquare { base: self.base, path: self.path[..k].to_vec() }
    }

    /// `self ⊆ other`.
    pub fn within(&self, other: &MadicSquare) -> bool {
        other.path.len() <= self.path.len() && self.path[..other.path.len()] == other.path[..]
    }

    /// Lower-left corner and side in lattice units where a depth-`k_res`
    /// square has side `unit`.
    pub fn bounds(&self, k_res: usize, unit: i64) -> (i64, i64, i64) {
        let side = unit * (self.base as i64).pow((k_res - self.depth().min(k_res)) as u32);
        let (c, r) = self.col_row();
        (c as i64 * side, r as i64 * side, side)
    }
}

/// Axis-aligned box `[x0, x0+s] × [y0, y0+s]` in lattice units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeBox {
    pub x0: i64,
    pub y0: i64,
    pub side: i64,
}

impl LatticeBox {
    pub fn of(sq: &MadicSquare, k_res: usize, unit: i64) -> Self {
        let (x0, y0, side) = sq.bounds(k_res, unit);
        LatticeBox { x0, y0, side }
    }

    fn gap(a0: i64, a1: i64, b0: i64, b1: i64) -> i128 {
        (b0 - a1).max(a0 - b1).max(0) as i128
    }

    /// Squared distance between two closed boxes.
    pub fn dist2(&self, o: &LatticeBox) -> i128 {
        let dx = Self::gap(self.x0, self.x0 + self.side, o.x0, o.x0 + o.side);
        let dy = Self::gap(self.y0, self.y0 + self.side, o.y0, o.y0 + o.side);
        dx * dx + dy * dy
    }

    /// Squared distance from a point to the closed box.
    pub fn point_dist2(&self, px: i64, py: i64) -> i128 {
        let dx = Self::gap(self.x0, self.x0 + self.side, px, px);
        let dy = Self::gap(self.y0, self.y0 + self.side, py, py);
        dx * dx + dy * dy
    }

    /// Squared distance from a point to the farthest point of the box.
    pub fn point_far2(&self, px: i64, py: i64) -> i128 {
        let fx = (px - self.x0).abs().max((px - self.x0 - self.side).abs()) as i128;
        let fy = (py - self.y0).abs().max((py - self.y0 - self.side).abs()) as i128;
        fx * fx + fy * fy
    }

    /// `o` lies in the open interior of `self`.
    pub fn strictly_contains(&self, o: &LatticeBox) -> bool {
        o.x0 > self.x0 && o.y0 > self.y0 && o.x0 + o.side < self.x0 + self.side && o.y0 + o.side < self.y0 + self.side
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn digit_rule() {
        // i = p·M + q, 0 < q ≤ M: row p+1, column q
        assert_eq!(MadicSquare::decode(23, 1), (0, 0));
        assert_eq!(MadicSquare::decode(23, 23), (0, 22));
        assert_eq!(MadicSquare::decode(23, 24), (1, 0));
        assert_eq!(MadicSquare::decode(23, 529), (22, 22));
        let center = MadicSquare::root(23).center_child();
        assert_eq!(center.path, vec![265]);
        assert_eq!(MadicSquare::decode(23, 265), (11, 11));
        assert_eq!(MadicSquare::decode(2, 3), (1, 0));
    }

    #[test]
    fn children_tile_parent() {
        let base = 5u32;
        let parent = MadicSquare { base, path: vec![7, 13] };
        let pb = LatticeBox::of(&parent, 3, 2);
        let mut covered = std::collections::HashSet::new();
        for d in 1..=base * base {
            let b = LatticeBox::of(&parent.child(d), 3, 2);
            assert_eq!(b.side * base as i64, pb.side);
            assert!(b.x0 >= pb.x0 && b.x0 + b.side <= pb.x0 + pb.side);
            assert!(b.y0 >= pb.y0 && b.y0 + b.side <= pb.y0 + pb.side);
            assert!(covered.insert((b.x0, b.y0)));
        }
        assert_eq!(covered.len(), 25);
    }

    proptest! {
        #[test]
        fn col_row_round_trip(base in prop::sample::select(vec![2u32, 3, 23, 29]), depth in 0usize..4, seed in 0u64..1_000_000) {
            let n = (base as u64).pow(depth as u32);
            let (c, r) = (seed % n.max(1), (seed / 7) % n.max(1));
            let sq = MadicSquare::from_col_row(base, depth, c, r);
            prop_assert_eq!(sq.col_row(), (c, r));
            prop_assert!(sq.path.iter().all(|&d| d >= 1 && d <= base * base));
        }
    }
}
