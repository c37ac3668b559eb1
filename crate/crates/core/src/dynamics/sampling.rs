use super::fate::OrbitFate;
use crate::scalar::Real;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Integer fate counters; merging is associative and commutative.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub escaped: u64,
    pub captured: u64,
    pub undecided: u64,
}

impl Counts {
    pub fn total(&self) -> u64 {
        self.escaped + self.captured + self.undecided
    }

    fn add(&mut self, fate: OrbitFate) {
        match fate {
            OrbitFate::Escaped { .. } => self.escaped += 1,
            OrbitFate::Captured { .. } => self.captured += 1,
            OrbitFate::Undecided { .. } => self.undecided += 1,
        }
    }

    fn merge(self, o: Counts) -> Counts {
        Counts {
            escaped: self.escaped + o.escaped,
            captured: self.captured + o.captured,
            undecided: self.undecided + o.undecided,
        }
    }
}

/// Fate fractions over a ball with the 95% Wald half-width of the escaped
/// fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaFraction {
    pub counts: Counts,
    pub escaped: f64,
    pub captured: f64,
    pub undecided: f64,
    pub samples: u64,
    pub ci_halfwidth: f64,
}

impl AreaFraction {
    fn from_counts(counts: Counts) -> Self {
        let n = counts.total();
        let nf = n.max(1) as f64;
        let escaped = counts.escaped as f64 / nf;
        AreaFraction {
            counts,
            escaped,
            captured: counts.captured as f64 / nf,
            undecided: counts.undecided as f64 / nf,
            samples: n,
            ci_halfwidth: 1.96 * (escaped * (1.0 - escaped) / nf).sqrt(),
        }
    }

    pub fn member(&self) -> f64 {
        self.captured + self.undecided
    }
}

/// Stratified-jittered sampling of `B(center, radius)`: one uniform sample
/// in each cell of a `grid_n × grid_n` grid over the bounding square, kept
/// when it falls in the ball. Row `i` draws from stream `stream_base + i` of
/// a ChaCha8 generator seeded with `seed`, so results do not depend on the
/// number of worker threads.
pub fn area_fraction<T, F>(center: Complex<T>, radius: T, fate_fn: F, grid_n: usize, seed: u64) -> AreaFraction
where
    T: Real,
    F: Fn(Complex<T>) -> OrbitFate + Sync,
{
    area_fraction_stream(center, radius, &fate_fn, grid_n, seed, 0)
}

pub(crate) fn area_fraction_stream<T, F>(
    center: Complex<T>,
    radius: T,
    fate_fn: &F,
    grid_n: usize,
    seed: u64,
    stream_base: u64,
) -> AreaFraction
where
    T: Real,
    F: Fn(Complex<T>) -> OrbitFate + Sync,
{
    let n = grid_n.max(1);
    let h = radius.as_f64() * 2.0 / n as f64;
    let (cx, cy, r) = (center.re.as_f64(), center.im.as_f64(), radius.as_f64());
    let counts = (0..n)
        .into_par_iter()
        .map(|row| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream_base + row as u64);
            let mut c = Counts::default();
            for col in 0..n {
                let dx = -r + (col as f64 + rng.gen::<f64>()) * h;
                let dy = -r + (row as f64 + rng.gen::<f64>()) * h;
                if dx * dx + dy * dy <= r * r {
                    let z = Complex::new(T::lit(cx + dx), T::lit(cy + dy));
                    c.add(fate_fn(z));
                }
            }
            c
        })
        .reduce(Counts::default, Counts::merge);
    AreaFraction::from_counts(counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;
    const CAP: OrbitFate = OrbitFate::Captured { entry_step: 0 };
    const ESC: OrbitFate = OrbitFate::Escaped { exit_step: 0 };

    #[test]
    fn constant_predicate() {
        let a = area_fraction(C::new(0.3, -0.2), 0.1, |_| CAP, 64, 1);
        assert_eq!(a.captured, 1.0);
        assert_eq!(a.ci_halfwidth, 0.0);
        assert!(a.samples > 3000);
    }

    #[test]
    fn half_plane_and_half_radius() {
        let c = C::new(1.0, 0.5);
        let a = area_fraction(c, 0.25, |z: C| if z.re > c.re { ESC } else { CAP }, 256, 2);
        assert!((a.escaped - 0.5).abs() <= 3.0 * a.ci_halfwidth, "{a:?}");
        let b = area_fraction(c, 0.25, |z: C| if (z - c).norm() < 0.125 { ESC } else { CAP }, 256, 3);
        assert!((b.escaped - 0.25).abs() <= 3.0 * b.ci_halfwidth, "{b:?}");
        assert!((b.escaped + b.captured + b.undecided - 1.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_across_pools() {
        let f = |z: C| if (z.re * 37.0).sin() > z.im { ESC } else { CAP };
        let a = area_fraction(C::new(0.0, 0.0), 1.0, f, 128, 9);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| area_fraction(C::new(0.0, 0.0), 1.0, f, 128, 9));
        assert_eq!(a, b);
        let c = area_fraction(C::new(0.0, 0.0), 1.0, f, 128, 10);
        assert_ne!(a.counts, c.counts);
    }

    #[test]
    fn f32_scalar() {
        let a = area_fraction(
            Complex::new(0.0f32, 0.0),
            1.0f32,
            |z: Complex<f32>| {
                if z.re > 0.0 {
                    ESC
                } else {
                    CAP
                }
            },
            128,
            4,
        );
        assert!((a.escaped - 0.5).abs() <= 3.0 * a.ci_halfwidth);
    }
}
