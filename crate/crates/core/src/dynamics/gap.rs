use super::fate::OrbitFate;
use crate::scalar::Real;
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Largest disk inside `B(center, r)` whose pixels share one fate class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapProbe {
    /// Disk radius divided by `r`.
    pub ratio: f64,
    pub radius: f64,
    pub at: (f64, f64),
    /// True when the disk is made of escaped pixels.
    pub escaped: bool,
}

/// One-dimensional squared distance transform (lower envelope of parabolas).
fn dt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let mut first = 0usize;
    while first < n && !f[first].is_finite() {
        first += 1;
    }
    if first == n {
        out.iter_mut().for_each(|o| *o = f64::INFINITY);
        return;
    }
    v[0] = first;
    for q in first + 1..n {
        if !f[q].is_finite() {
            continue;
        }
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] {
                if k == 0 {
                    v[0] = q;
                    z[0] = f64::NEG_INFINITY;
                    z[1] = f64::INFINITY;
                    break;
                }
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Exact squared Euclidean distance (in pixels) to the nearest `true` cell.
pub(crate) fn squared_edt(obstacle: &[bool], w: usize, h: usize) -> Vec<f64> {
    let mut grid: Vec<f64> = obstacle.iter().map(|&o| if o { 0.0 } else { f64::INFINITY }).collect();
    let mut col = vec![0.0; h];
    let mut out = vec![0.0; h.max(w)];
    let mut v = vec![0usize; h.max(w)];
    let mut z = vec![0.0; h.max(w) + 1];
    for x in 0..w {
        for y in 0..h {
            col[y] = grid[y * w + x];
        }
        dt_1d(&col, &mut out[..h], &mut v, &mut z);
        for y in 0..h {
            grid[y * w + x] = out[y];
        }
    }
    let mut row = vec![0.0; w];
    for y in 0..h {
        row.copy_from_slice(&grid[y * w..(y + 1) * w]);
        dt_1d(&row, &mut out[..w], &mut v, &mut z);
        grid[y * w..(y + 1) * w].copy_from_slice(&out[..w]);
    }
    grid
}

/// Rasterize `B(center, r)` at pixel centers of a `grid_n × grid_n` grid and
/// return the largest one-fate disk. Undecided pixels count as members. A
/// pixel's disk radius is `min(d − h/2, r − |p − center|)` with `d` the
/// distance to the nearest pixel of the other class and `h` the pixel size.
pub fn gap_probe<T, F>(center: Complex<T>, r: T, fate_fn: F, grid_n: usize) -> GapProbe
where
    T: Real,
    F: Fn(Complex<T>) -> OrbitFate + Sync,
{
    let n = grid_n.max(1);
    let (cx, cy, rr) = (center.re.as_f64(), center.im.as_f64(), r.as_f64());
    let h = 2.0 * rr / n as f64;
    let pix = |i: usize| -rr + (i as f64 + 0.5) * h;
    let ff = &fate_fn;
    // 0 outside ball, 1 member, 2 escaped
    let classes: Vec<u8> = (0..n)
        .into_par_iter()
        .flat_map_iter(|row| {
            (0..n)
                .map(move |col| {
                    let (dx, dy) = (pix(col), pix(row));
                    if dx * dx + dy * dy > rr * rr {
                        0
                    } else {
                        let z = Complex::new(T::lit(cx + dx), T::lit(cy + dy));
                        if ff(z).is_escaped() {
                            2
                        } else {
                            1
                        }
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let mut best = GapProbe { ratio: 0.0, radius: 0.0, at: (cx, cy), escaped: false };
    for class in [1u8, 2u8] {
        let other: Vec<bool> = classes.iter().map(|&c| c != 0 && c != class).collect();
        let d2 = squared_edt(&other, n, n);
        for (i, &c) in classes.iter().enumerate() {
            if c != class {
                continue;
            }
            let (dx, dy) = (pix(i % n), pix(i / n));
            let d = d2[i].sqrt() * h - h / 2.0;
            let rad = d.min(rr - (dx * dx + dy * dy).sqrt());
            if rad > best.radius {
                best = GapProbe { ratio: rad / rr, radius: rad, at: (cx + dx, cy + dy), escaped: class == 2 };
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type C = Complex<f64>;
    const CAP: OrbitFate = OrbitFate::Captured { entry_step: 0 };
    const ESC: OrbitFate = OrbitFate::Escaped { exit_step: 0 };

    #[test]
    fn edt_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let (w, h) = (23, 17);
        let obstacle: Vec<bool> = (0..w * h).map(|_| rng.gen::<f64>() < 0.05).collect();
        let d = squared_edt(&obstacle, w, h);
        for y in 0..h {
            for x in 0..w {
                let mut best = f64::INFINITY;
                for yy in 0..h {
                    for xx in 0..w {
                        if obstacle[yy * w + xx] {
                            let dd = (x as f64 - xx as f64).powi(2) + (y as f64 - yy as f64).powi(2);
                            best = best.min(dd);
                        }
                    }
                }
                assert_eq!(d[y * w + x], best);
            }
        }
        assert!(squared_edt(&[false; 6], 3, 2).iter().all(|v| v.is_infinite()));
    }

    #[test]
    fn constant_predicate_fills_ball() {
        let g = gap_probe(C::new(0.5, 0.5), 0.1, |_| CAP, 64);
        assert!(g.ratio > 0.97 && g.ratio <= 1.0, "{g:?}");
        assert!(!g.escaped);
    }

    #[test]
    fn checkerboard_at_pixel_scale() {
        let n = 64;
        let (c, r) = (C::new(0.0, 0.0), 1.0);
        let h = 2.0 * r / n as f64;
        let board = move |z: C| {
            let i = ((z.re + r) / h).floor() as i64;
            let j = ((z.im + r) / h).floor() as i64;
            if (i + j) % 2 == 0 {
                ESC
            } else {
                CAP
            }
        };
        let g = gap_probe(c, r, board, n);
        assert!((g.ratio - 1.0 / n as f64).abs() < 1e-9, "{g:?}");
    }

    #[test]
    fn half_disk_gap() {
        let g = gap_probe(C::new(0.0, 0.0), 1.0, |z: C| if z.re > 0.0 { ESC } else { CAP }, 128);
        // the largest disk in a half-disk has radius 1/2
        assert!((g.ratio - 0.5).abs() < 0.03, "{g:?}");
    }
}
