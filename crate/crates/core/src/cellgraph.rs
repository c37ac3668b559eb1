//! Imbedded graphs in the upper half-plane induced by the backward orbit of
//! `1` under the Blaschke model (`Γ`) and under the rigid rotation (`Γ′`):
//! cells, strip heights and a piecewise-affine comparison of corresponding
//! cells.

use crate::blaschke::{preimage_orbit, BlaschkeError, BlaschkeModel};
use crate::contfrac::{denominators, CFExpansion, ContFracError};
use crate::dynamics::linear_fit;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CellGraphError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Solver(#[from] BlaschkeError),
    #[error(transparent)]
    ContFrac(#[from] ContFracError),
    #[error("partition levels are inconsistent: {0}")]
    InconsistentLevels(String),
    #[error("cells have different combinatorics: {0}")]
    MismatchedCells(String),
    #[error("too few levels: {0}")]
    TooFewLevels(String),
}

/// Source of the points `x_j` with `g^j(x_j) = 1`.
#[derive(Debug, Clone, Copy)]
pub enum CircleSource<'a> {
    Blaschke {
        model: &'a BlaschkeModel<f64>,
        tol: f64,
    },
    /// `x′_j = e^{−2πijα}`.
    Rotation {
        alpha: f64,
    },
}

/// Largest `q_n` the cell graph will materialize.
pub const MAX_POINTS: u64 = 1 << 20;

/// A point of `Q̃_n`: the lift `θ_j + shift` of `x_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiftedPoint {
    pub x: f64,
    pub j: u64,
    pub shift: i64,
}

impl LiftedPoint {
    fn label(&self) -> (u64, i64) {
        (self.j, self.shift)
    }
}

/// `Q_n` and its lift to the window `[−2, 3)`, sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynPartition {
    pub n: usize,
    pub q: u64,
    /// `θ_j ∈ [0, 1)` for `j < q_n`.
    pub angles: Vec<f64>,
    pub lifted: Vec<LiftedPoint>,
}

impl DynPartition {
    fn from_angles(n: usize, angles: Vec<f64>) -> Self {
        let mut lifted: Vec<LiftedPoint> = (-2..=2)
            .flat_map(|s| {
                angles.iter().enumerate().map(move |(j, &t)| LiftedPoint { x: t + s as f64, j: j as u64, shift: s })
            })
            .collect();
        lifted.sort_by(|a, b| a.x.total_cmp(&b.x));
        DynPartition { n, q: angles.len() as u64, angles, lifted }
    }

    /// Indices `j` in counterclockwise order starting at `x_0 = 1`.
    pub fn cyclic_order(&self) -> Vec<u64> {
        let mut idx: Vec<u64> = (0..self.q).collect();
        idx.sort_by(|&a, &b| self.angles[a as usize].total_cmp(&self.angles[b as usize]));
        idx
    }
}

fn q_values(cf: &CFExpansion, n_max: usize) -> Result<Vec<u64>, CellGraphError> {
    let qs = denominators(cf, n_max)?;
    qs.iter()
        .map(|q| q.to_u64().filter(|&v| v <= MAX_POINTS))
        .collect::<Option<Vec<u64>>>()
        .ok_or_else(|| CellGraphError::InvalidArgument(format!("q_n exceeds {MAX_POINTS}")))
}

fn source_angles(source: CircleSource<'_>, count: u64) -> Result<Vec<f64>, CellGraphError> {
    Ok(match source {
        CircleSource::Blaschke { model, tol } => {
            preimage_orbit(model, count, tol)?.into_iter().map(|p| p.theta).collect()
        }
        CircleSource::Rotation { alpha } => (0..count)
            .map(|j| {
                let v = -(j as f64) * alpha;
                let f = v - v.floor();
                if f >= 1.0 {
                    0.0
                } else {
                    f
                }
            })
            .collect(),
    })
}

/// `Q_n` for the source and the `n`-th denominator of `cf`.
pub fn build_partition(source: CircleSource<'_>, cf: &CFExpansion, n: usize) -> Result<DynPartition, CellGraphError> {
    let q = q_values(cf, n)?[n];
    Ok(DynPartition::from_angles(n, source_angles(source, q)?))
}

/// `Q_0, …, Q_{n_max}` from one backward orbit.
pub fn build_partitions(
    source: CircleSource<'_>,
    cf: &CFExpansion,
    n_max: usize,
) -> Result<Vec<DynPartition>, CellGraphError> {
    let qs = q_values(cf, n_max)?;
    let all = source_angles(source, qs[n_max])?;
    Ok(qs.iter().enumerate().map(|(n, &q)| DynPartition::from_angles(n, all[..q as usize].to_vec())).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EdgeKind {
    /// `[z_n(x̃), z_{n+1}(x̃)]`.
    Vertical { n: usize },
    /// `[z_n(x̃), z_n(ỹ)]` for adjacent points of `Q̃_n`.
    Horizontal { n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    #[serde(flatten)]
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub x: f64,
    pub y: f64,
    pub j: u64,
    pub shift: i64,
    /// Levels `n` with `z_n(x̃)` at this vertex.
    pub levels: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Level {
    points: Vec<LiftedPoint>,
    /// `M_n`; `None` at the window ends where a neighbor is missing.
    m: Vec<Option<f64>>,
    /// Vertex index per point.
    vertex: Vec<Option<usize>>,
    /// Whether `M_n ≠ M_{n+1}` (neighbors change); false on the last level.
    changes: Vec<bool>,
}

/// `Γ` over the window `[−2, 3)` for levels `0..=n_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphGamma {
    pub n_max: usize,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    levels: Vec<Level>,
}

/// Vertices, vertical edges where `M_n ≠ M_{n+1}` and non-vertical edges
/// between adjacent points; doubly labelled vertices are merged.
pub fn build_graph(parts: &[DynPartition]) -> Result<GraphGamma, CellGraphError> {
    if parts.is_empty() {
        return Err(CellGraphError::InconsistentLevels("no levels".into()));
    }
    for (i, p) in parts.iter().enumerate() {
        if p.n != i {
            return Err(CellGraphError::InconsistentLevels(format!("level {} at position {i}", p.n)));
        }
        if i > 0 {
            let prev = &parts[i - 1];
            if p.q < prev.q || p.angles[..prev.angles.len()] != prev.angles[..] {
                return Err(CellGraphError::InconsistentLevels(format!("Q_{} does not extend Q_{}", i, i - 1)));
            }
        }
    }
    let n_max = parts.len() - 1;
    let mut levels: Vec<Level> = parts
        .iter()
        .map(|p| {
            let pts = p.lifted.clone();
            let len = pts.len();
            let m = (0..len).map(|i| (i > 0 && i + 1 < len).then(|| (pts[i + 1].x - pts[i - 1].x) / 2.0)).collect();
            Level { points: pts, m, vertex: vec![None; len], changes: vec![false; len] }
        })
        .collect();
    // neighbor labels per level for the doubly-labelled test
    let nbrs: Vec<HashMap<(u64, i64), ((u64, i64), (u64, i64))>> = levels
        .iter()
        .map(|lv| {
            (1..lv.points.len().saturating_sub(1))
                .map(|i| (lv.points[i].label(), (lv.points[i - 1].label(), lv.points[i + 1].label())))
                .collect()
        })
        .collect();
    let mut vertices: Vec<Vertex> = Vec::new();
    let mut edges = Vec::new();
    let mut prev_vertex: HashMap<(u64, i64), usize> = HashMap::new();
    for n in 0..=n_max {
        let mut cur = HashMap::new();
        for i in 0..levels[n].points.len() {
            let Some(m) = levels[n].m[i] else { continue };
            let p = levels[n].points[i];
            let same = n > 0 && nbrs[n - 1].get(&p.label()) == nbrs[n].get(&p.label());
            let id = match prev_vertex.get(&p.label()) {
                Some(&v) if same => {
                    vertices[v].levels.push(n);
                    v
                }
                prev => {
                    vertices.push(Vertex { x: p.x, y: m, j: p.j, shift: p.shift, levels: vec![n] });
                    let v = vertices.len() - 1;
                    if let Some(&u) = prev {
                        edges.push(Edge { from: u, to: v, kind: EdgeKind::Vertical { n: n - 1 } });
                    }
                    v
                }
            };
            levels[n].vertex[i] = Some(id);
            cur.insert(p.label(), id);
        }
        if n > 0 {
            let lv = &mut levels[n - 1];
            for i in 0..lv.points.len() {
                if lv.vertex[i].is_some() {
                    let l = lv.points[i].label();
                    lv.changes[i] = cur.get(&l) != prev_vertex.get(&l);
                }
            }
        }
        for i in 1..levels[n].points.len() {
            if let (Some(a), Some(b)) = (levels[n].vertex[i - 1], levels[n].vertex[i]) {
                edges.push(Edge { from: a, to: b, kind: EdgeKind::Horizontal { n } });
            }
        }
        prev_vertex = cur;
    }
    Ok(GraphGamma { n_max, vertices, edges, levels })
}

impl GraphGamma {
    /// `M_n` at the lifted point with label `(j, shift)`.
    pub fn m_at(&self, n: usize, j: u64, shift: i64) -> Option<f64> {
        let lv = self.levels.get(n)?;
        let i = lv.points.iter().position(|p| p.j == j && p.shift == shift)?;
        lv.m[i]
    }

    /// Points of `Q̃_n` in the window with their `M_n`.
    pub fn level_points(&self, n: usize) -> Vec<(LiftedPoint, Option<f64>)> {
        self.levels[n].points.iter().copied().zip(self.levels[n].m.iter().copied()).collect()
    }

    /// Level-`n` polyline height over `x` (piecewise linear through `z_n`).
    pub fn polyline(&self, n: usize, x: f64) -> Option<f64> {
        let lv = &self.levels[n];
        let i = lv.points.partition_point(|p| p.x < x);
        if i < lv.points.len() && lv.points[i].x == x {
            return lv.m[i];
        }
        if i == 0 || i >= lv.points.len() {
            return None;
        }
        let (a, b) = (lv.points[i - 1], lv.points[i]);
        let (ya, yb) = (lv.m[i - 1]?, lv.m[i]?);
        let s = (x - a.x) / (b.x - a.x);
        Some(ya + s * (yb - ya))
    }

    /// Largest `|slope|` among non-vertical edges with an endpoint in `[0, 1)`.
    pub fn max_slope(&self) -> f64 {
        self.edges
            .iter()
            .filter(|e| matches!(e.kind, EdgeKind::Horizontal { .. }))
            .filter_map(|e| {
                let (a, b) = (&self.vertices[e.from], &self.vertices[e.to]);
                ((0.0..1.0).contains(&a.x) || (0.0..1.0).contains(&b.x)).then(|| ((b.y - a.y) / (b.x - a.x)).abs())
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "shape")]
pub enum CellClass {
    Triangle,
    Trapezoid,
    Polygon { sides: usize },
}

/// An `n`-cell: top `[z_n(x), z_n(y)]`, bottom chain through `[x, y] ∩ Q̃_{n+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub n: usize,
    pub x: LiftedPoint,
    pub y: LiftedPoint,
    /// Number of bottom edges.
    pub k: usize,
    pub class: CellClass,
    /// Boundary counterclockwise from `z_{n+1}(x)`: bottom chain, then
    /// `z_n(y)`, `z_n(x)`, with merged vertices listed once.
    pub boundary: Vec<(f64, f64)>,
}

impl Cell {
    pub fn top_height(&self) -> f64 {
        self.boundary.iter().map(|p| p.1).fold(0.0, f64::max)
    }

    /// Shoelace area.
    pub fn area(&self) -> f64 {
        let b = &self.boundary;
        let n = b.len();
        (0..n).map(|i| b[i].0 * b[(i + 1) % n].1 - b[(i + 1) % n].0 * b[i].1).sum::<f64>() / 2.0
    }
}

/// The `n`-cells whose left corner lies in `[0, 1)`.
pub fn enumerate_cells(graph: &GraphGamma, n: usize) -> Vec<Cell> {
    if n >= graph.n_max {
        return Vec::new();
    }
    let (lv, next) = (&graph.levels[n], &graph.levels[n + 1]);
    let pos: HashMap<(u64, i64), usize> = next.points.iter().enumerate().map(|(i, p)| (p.label(), i)).collect();
    let mut out = Vec::new();
    for i in 1..lv.points.len() {
        let (px, py) = (lv.points[i - 1], lv.points[i]);
        if !(0.0..1.0).contains(&px.x) || lv.m[i - 1].is_none() || lv.m[i].is_none() {
            continue;
        }
        if !(lv.changes[i - 1] || lv.changes[i]) {
            continue;
        }
        let (a, b) = (pos[&px.label()], pos[&py.label()]);
        let k = b - a;
        let mut boundary: Vec<(f64, f64)> = Vec::with_capacity(k + 3);
        let mut ok = true;
        for t in a..=b {
            match next.m[t] {
                Some(m) => boundary.push((next.points[t].x, m)),
                None => ok = false,
            }
        }
        if !ok {
            continue;
        }
        let top_y = (py.x, lv.m[i].unwrap());
        let top_x = (px.x, lv.m[i - 1].unwrap());
        if lv.changes[i] {
            boundary.push(top_y);
        }
        if lv.changes[i - 1] {
            boundary.push(top_x);
        }
        let class = match (k, lv.changes[i - 1] && lv.changes[i]) {
            (1, true) => CellClass::Trapezoid,
            (1, false) => CellClass::Triangle,
            _ => CellClass::Polygon { sides: k + 3 },
        };
        out.push(Cell { n, x: px, y: py, k, class, boundary });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripHeights {
    /// `h_n` for `n = 0..n_max−1`: the top of all `m`-cells, `m ≥ n`.
    pub heights: Vec<f64>,
    pub slope: f64,
    /// `exp(slope)` of `log h_n` against `n`.
    pub sigma: f64,
}

/// Strip heights over the enumerated levels and their log-linear fit.
pub fn strip_height(graph: &GraphGamma) -> Result<StripHeights, CellGraphError> {
    let per: Vec<f64> = (0..graph.n_max)
        .into_par_iter()
        .map(|n| enumerate_cells(graph, n).iter().map(Cell::top_height).fold(0.0, f64::max))
        .collect();
    let mut heights = per.clone();
    for n in (0..heights.len().saturating_sub(1)).rev() {
        heights[n] = heights[n].max(heights[n + 1]);
    }
    let pts: Vec<(f64, f64)> =
        heights.iter().enumerate().filter(|(_, &h)| h > 0.0).map(|(n, &h)| (n as f64, h.ln())).collect();
    if pts.len() < 3 {
        return Err(CellGraphError::TooFewLevels(format!("{} levels with cells", pts.len())));
    }
    let (slope, _, _) = linear_fit(&pts);
    Ok(StripHeights { heights, slope, sigma: slope.exp() })
}

/// Dilatation `(σ₁/σ₂)` of the affine map taking triangle `a` onto `b`.
pub fn affine_dilatation(a: [(f64, f64); 3], b: [(f64, f64); 3]) -> Option<f64> {
    let (u1, u2) = ((a[1].0 - a[0].0, a[1].1 - a[0].1), (a[2].0 - a[0].0, a[2].1 - a[0].1));
    let (v1, v2) = ((b[1].0 - b[0].0, b[1].1 - b[0].1), (b[2].0 - b[0].0, b[2].1 - b[0].1));
    let det_a = u1.0 * u2.1 - u2.0 * u1.1;
    let det_b = v1.0 * v2.1 - v2.0 * v1.1;
    if det_a == 0.0 || det_b == 0.0 {
        return None;
    }
    // L = V·U⁻¹
    let inv = [[u2.1 / det_a, -u2.0 / det_a], [-u1.1 / det_a, u1.0 / det_a]];
    let l = [
        [v1.0 * inv[0][0] + v2.0 * inv[1][0], v1.0 * inv[0][1] + v2.0 * inv[1][1]],
        [v1.1 * inv[0][0] + v2.1 * inv[1][0], v1.1 * inv[0][1] + v2.1 * inv[1][1]],
    ];
    let fro = l[0][0].powi(2) + l[0][1].powi(2) + l[1][0].powi(2) + l[1][1].powi(2);
    let det = (l[0][0] * l[1][1] - l[0][1] * l[1][0]).abs();
    // σ₁/σ₂ + σ₂/σ₁ = ‖L‖²_F / |det L|
    let s = fro / det;
    Some((s + (s * s - 4.0).max(0.0).sqrt()) / 2.0)
}

/// PL-fan dilatation: the boundary correspondence vertex to vertex, extended
/// affinely on the triangles from each cell's vertex centroid.
pub fn boundary_extension_dilatation(g: &Cell, g2: &Cell) -> Result<f64, CellGraphError> {
    if g.n != g2.n || g.k != g2.k || g.class != g2.class || g.boundary.len() != g2.boundary.len() {
        return Err(CellGraphError::MismatchedCells(format!("{:?}/{} vs {:?}/{}", g.class, g.n, g2.class, g2.n)));
    }
    let centroid = |b: &[(f64, f64)]| {
        let n = b.len() as f64;
        (b.iter().map(|p| p.0).sum::<f64>() / n, b.iter().map(|p| p.1).sum::<f64>() / n)
    };
    let (c, c2) = (centroid(&g.boundary), centroid(&g2.boundary));
    let n = g.boundary.len();
    let mut worst: f64 = 1.0;
    for i in 0..n {
        let t = [c, g.boundary[i], g.boundary[(i + 1) % n]];
        let t2 = [c2, g2.boundary[i], g2.boundary[(i + 1) % n]];
        let k = affine_dilatation(t, t2)
            .ok_or_else(|| CellGraphError::MismatchedCells("degenerate fan triangle".into()))?;
        worst = worst.max(k);
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilatationLevel {
    pub n: usize,
    pub cells: usize,
    pub max: f64,
    pub mean: f64,
}

/// Per-level PL-fan dilatation statistics between corresponding cells of `Γ` and `Γ′`.
pub fn dilatation_statistics(gamma: &GraphGamma, gamma2: &GraphGamma) -> Result<Vec<DilatationLevel>, CellGraphError> {
    (0..gamma.n_max.min(gamma2.n_max))
        .map(|n| {
            let a = enumerate_cells(gamma, n);
            let b: HashMap<(u64, i64), Cell> =
                enumerate_cells(gamma2, n).into_iter().map(|c| (c.x.label(), c)).collect();
            let ks = a
                .par_iter()
                .map(|c| {
                    let d = b.get(&c.x.label()).ok_or_else(|| {
                        CellGraphError::MismatchedCells(format!("no partner for the {n}-cell at j = {}", c.x.j))
                    })?;
                    boundary_extension_dilatation(c, d)
                })
                .collect::<Result<Vec<f64>, _>>()?;
            let max = ks.iter().copied().fold(0.0, f64::max);
            let mean = if ks.is_empty() { 0.0 } else { ks.iter().sum::<f64>() / ks.len() as f64 };
            Ok(DilatationLevel { n, cells: ks.len(), max, mean })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpAreas {
    /// Raster estimate of `area(exp(∪_{n ≤ m < n_max} m-cells))` per `n`.
    pub areas: Vec<f64>,
    /// `exp` of the slope of `log area` against `n`, when fittable.
    pub rate: Option<f64>,
    pub grid: usize,
}

/// Rasterized areas of the images under `z ↦ e^{2πiz}` of the cell unions
/// below each level polyline, over a `grid × grid` sampling of `[−1, 1]²`.
pub fn exp_cell_region_area(graph: &GraphGamma, grid: usize) -> Result<ExpAreas, CellGraphError> {
    if grid < 8 {
        return Err(CellGraphError::InvalidArgument("grid must be at least 8".into()));
    }
    let h = 2.0 / grid as f64;
    let levels = graph.n_max;
    let counts: Vec<u64> = (0..grid)
        .into_par_iter()
        .map(|row| {
            let mut c = vec![0u64; levels];
            for col in 0..grid {
                let w = (-1.0 + (col as f64 + 0.5) * h, -1.0 + (row as f64 + 0.5) * h);
                let r = (w.0 * w.0 + w.1 * w.1).sqrt();
                if r >= 1.0 || r == 0.0 {
                    continue;
                }
                let y = -r.ln() / std::f64::consts::TAU;
                let t = w.1.atan2(w.0) / std::f64::consts::TAU;
                let x = t - t.floor();
                let Some(floor) = graph.polyline(levels, x) else { continue };
                if y < floor {
                    continue;
                }
                for (n, cn) in c.iter_mut().enumerate() {
                    match graph.polyline(n, x) {
                        Some(top) if y <= top => *cn += 1,
                        _ => break,
                    }
                }
            }
            c
        })
        .reduce(|| vec![0u64; levels], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect());
    let areas: Vec<f64> = counts.iter().map(|&c| c as f64 * h * h).collect();
    let pts: Vec<(f64, f64)> =
        areas.iter().enumerate().filter(|(_, &a)| a > 0.0).map(|(n, &a)| (n as f64, a.ln())).collect();
    let rate = (pts.len() >= 3).then(|| linear_fit(&pts).0.exp());
    Ok(ExpAreas { areas, rate, grid })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blaschke::{solve_parameter, SolveOptions};

    const GOLDEN: f64 = 0.618_033_988_749_894_8;

    fn rotation_graph(cf: &CFExpansion, n_max: usize) -> GraphGamma {
        let alpha: f64 = cf.approx_value().unwrap();
        build_graph(&build_partitions(CircleSource::Rotation { alpha }, cf, n_max).unwrap()).unwrap()
    }

    /// Integral over `[0,1]` of a level polyline, exact for piecewise-linear data.
    fn polyline_integral(g: &GraphGamma, n: usize) -> f64 {
        let mut xs: Vec<f64> = g.level_points(n).iter().map(|p| p.0.x).filter(|x| (0.0..=1.0).contains(x)).collect();
        xs.push(0.0);
        xs.push(1.0);
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs.windows(2).map(|w| (w[1] - w[0]) * (g.polyline(n, w[0]).unwrap() + g.polyline(n, w[1]).unwrap()) / 2.0).sum()
    }

    #[test]
    fn rotation_points_and_cardinality() {
        let cf = CFExpansion::golden();
        let parts = build_partitions(CircleSource::Rotation { alpha: GOLDEN }, &cf, 8).unwrap();
        let qs = [1u64, 1, 2, 3, 5, 8, 13, 21, 34];
        for (p, &q) in parts.iter().zip(&qs) {
            assert_eq!(p.q, q);
            assert_eq!(p.lifted.len() as u64, 5 * q);
            for (j, &t) in p.angles.iter().enumerate() {
                let v = -(j as f64) * GOLDEN;
                assert_eq!(t, v - v.floor());
            }
        }
        assert_eq!(build_partition(CircleSource::Rotation { alpha: GOLDEN }, &cf, 5).unwrap(), parts[5]);
    }

    #[test]
    fn golden_graph_structure() {
        let g = rotation_graph(&CFExpansion::golden(), 10);
        for (p, m) in g.level_points(0) {
            if let Some(m) = m {
                assert_eq!(m, 1.0, "x = {}", p.x);
            }
        }
        let ms: Vec<f64> = (1..=10).map(|n| g.m_at(n, 0, 0).unwrap()).collect();
        assert!(ms.windows(2).all(|w| w[1] < w[0]), "{ms:?}");
        // vertical edges exactly where neighbors change
        for n in 0..10 {
            for (p, m) in g.level_points(n) {
                if m.is_none() || g.m_at(n + 1, p.j, p.shift).is_none() {
                    continue;
                }
                let change = g.m_at(n, p.j, p.shift) != g.m_at(n + 1, p.j, p.shift);
                let has_edge = g.edges.iter().any(|e| {
                    e.kind == EdgeKind::Vertical { n }
                        && g.vertices[e.from].j == p.j
                        && g.vertices[e.from].shift == p.shift
                });
                assert_eq!(change, has_edge, "n {n} j {}", p.j);
            }
        }
        // doubly labelled vertices carry every level at which they appear
        assert!(g.vertices.iter().any(|v| v.levels.len() > 1));
        for v in &g.vertices {
            let ms: Vec<f64> = v.levels.iter().map(|&n| g.m_at(n, v.j, v.shift).unwrap()).collect();
            assert!(ms.iter().all(|&m| m == v.y));
        }
    }

    #[test]
    fn rotation_cells_and_slopes() {
        let g = rotation_graph(&CFExpansion::golden(), 10);
        for n in 0..10 {
            for c in enumerate_cells(&g, n) {
                assert!(c.k == 1 || c.k == 2, "{c:?}");
                if let CellClass::Polygon { sides } = c.class {
                    assert_eq!(sides, c.k + 3);
                    assert_eq!(c.boundary.len(), sides);
                }
                assert!(c.area() > 0.0);
            }
        }
        assert!(g.max_slope() <= 0.5, "{}", g.max_slope());
        let cf5 = CFExpansion::periodic(&[1, 5], &[1]).unwrap();
        let g5 = rotation_graph(&cf5, 6);
        let level1 = enumerate_cells(&g5, 1);
        assert!(!level1.is_empty());
        assert!(level1.iter().all(|c| c.k == 5 || c.k == 6), "{:?}", level1.iter().map(|c| c.k).collect::<Vec<_>>());
        assert!(g5.max_slope() <= 0.5);
    }

    #[test]
    fn cells_tile_the_strip_once() {
        for cf in [CFExpansion::golden(), CFExpansion::silver(), CFExpansion::periodic(&[2, 5], &[1, 3]).unwrap()] {
            let g = rotation_graph(&cf, 7);
            let total: f64 = (0..7).flat_map(|n| enumerate_cells(&g, n)).map(|c| c.area()).sum();
            let want = polyline_integral(&g, 0) - polyline_integral(&g, 7);
            assert!((total - want).abs() < 1e-12, "{total} vs {want}");
            // polylines are nested: P_n ≥ P_{n+1}
            for n in 0..7 {
                for (p, _) in g.level_points(n + 1) {
                    if let (Some(a), Some(b)) = (g.polyline(n, p.x), g.polyline(n + 1, p.x)) {
                        assert!(a >= b - 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn strip_heights_and_exp_areas() {
        let g = rotation_graph(&CFExpansion::golden(), 12);
        let s = strip_height(&g).unwrap();
        assert!(s.heights.windows(2).all(|w| w[1] <= w[0]));
        assert!(s.sigma > 0.0 && s.sigma < 1.0);
        // gaps of Q′_n are ‖q_{n−1}α‖-scale
        let qs = [1u64, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89];
        for n in 2..10 {
            let gap = (qs[n - 1] as f64 * GOLDEN - (qs[n - 1] as f64 * GOLDEN).round()).abs();
            assert!(s.heights[n] <= 2.0 * gap && s.heights[n] >= gap / 4.0, "n {n}");
        }
        let a = exp_cell_region_area(&g, 256).unwrap();
        assert!(a.areas.windows(2).all(|w| w[1] <= w[0]));
        let annulus = std::f64::consts::PI * (1.0 - (-2.0 * std::f64::consts::TAU).exp());
        assert!(a.areas[0] <= annulus);
        assert!(a.rate.unwrap() < 1.0);
        assert!(strip_height(&rotation_graph(&CFExpansion::golden(), 2)).is_err());
    }

    #[test]
    fn affine_dilatations() {
        let t = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)];
        let sheared = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)];
        let k = affine_dilatation(t, sheared).unwrap();
        assert!((k - (3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
        let scaled = [(1.0, 2.0), (4.0, 2.0), (1.0, 5.0)];
        assert!((affine_dilatation(t, scaled).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(affine_dilatation(t, [(0.0, 0.0); 3]), None);
        let g = rotation_graph(&CFExpansion::golden(), 6);
        let cells = enumerate_cells(&g, 3);
        assert_eq!(boundary_extension_dilatation(&cells[0], &cells[0]).unwrap(), 1.0);
        let other = enumerate_cells(&g, 4);
        if let Some(c) = other.iter().find(|c| c.k != cells[0].k || c.n != cells[0].n) {
            assert!(boundary_extension_dilatation(&cells[0], c).is_err());
        }
        let stats = dilatation_statistics(&g, &g).unwrap();
        assert!(stats.iter().all(|s| s.cells == 0 || s.max == 1.0));
    }

    #[test]
    fn blaschke_partition_matches_rotation_order() {
        let sol = solve_parameter(GOLDEN, 1e-6, SolveOptions::default()).unwrap();
        let model = BlaschkeModel::new(sol.t);
        let cf = CFExpansion::golden();
        let src = CircleSource::Blaschke { model: &model, tol: 1e-12 };
        let parts = build_partitions(src, &cf, 10).unwrap();
        let rot = build_partitions(CircleSource::Rotation { alpha: GOLDEN }, &cf, 10).unwrap();
        for (a, b) in parts.iter().zip(&rot) {
            assert_eq!(a.q, b.q);
            assert_eq!(a.cyclic_order(), b.cyclic_order(), "level {}", a.n);
        }
        let g = build_graph(&parts).unwrap();
        let g2 = build_graph(&rot).unwrap();
        for n in 0..10 {
            let cells = enumerate_cells(&g, n);
            assert_eq!(cells.len(), enumerate_cells(&g2, n).len());
            assert!(cells.iter().all(|c| c.k == 1 || c.k == 2));
        }
        let s = strip_height(&g).unwrap();
        assert!(s.sigma > 0.0 && s.sigma < 1.0);
        let dil = dilatation_statistics(&g, &g2).unwrap();
        assert!(dil.iter().all(|d| d.cells == 0 || (d.max >= 1.0 && d.max.is_finite())));
        assert!(build_graph(&[parts[1].clone()]).is_err());
    }
}
