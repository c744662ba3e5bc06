//! Deterministic point sets on `[0,1]^d` for sup-norm measurements.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Hard limit on the number of points a sampler may produce.
pub const MAX_POINTS: usize = 50_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SamplerSpec {
    /// Tensor grid with `per_axis` equispaced points `i/(per_axis−1)`.
    Grid { per_axis: usize },
    /// Tensor grid with `2^level + 1` points per axis, all dyadic rationals.
    DyadicGrid { level: u32 },
    /// Halton sequence with a seeded random shift modulo 1.
    Halton { count: usize, seed: u64 },
}

impl SamplerSpec {
    /// Tensor grids for `d ≤ 2` (10001 points on a line, 101 per axis in
    /// the plane), `10^5` shifted Halton points otherwise.
    pub fn default_for(d: usize) -> Self {
        match d {
            1 => SamplerSpec::Grid { per_axis: 10_001 },
            2 => SamplerSpec::Grid { per_axis: 101 },
            _ => SamplerSpec::Halton { count: 100_000, seed: 0 },
        }
    }

    pub fn len(&self, d: usize) -> Result<usize> {
        let n = match *self {
            SamplerSpec::Grid { per_axis } => checked_pow(per_axis, d)?,
            SamplerSpec::DyadicGrid { level } => {
                if level > 40 {
                    return Err(Error::Config(format!("dyadic level {level} too large")));
                }
                checked_pow((1usize << level) + 1, d)?
            }
            SamplerSpec::Halton { count, .. } => count,
        };
        if n > MAX_POINTS {
            return Err(Error::CapExceeded { what: "sample point count", cap: MAX_POINTS as u64 });
        }
        Ok(n)
    }

    pub fn is_empty(&self, d: usize) -> Result<bool> {
        Ok(self.len(d)? == 0)
    }

    /// All points, row by row; grids vary the last coordinate fastest.
    pub fn points(&self, d: usize) -> Result<Vec<Vec<f64>>> {
        if d == 0 {
            return Err(Error::Config("sampling dimension must be at least 1".into()));
        }
        let n = self.len(d)?;
        match *self {
            SamplerSpec::Grid { per_axis } => {
                if per_axis < 2 {
                    return Err(Error::Config("a grid needs at least 2 points per axis".into()));
                }
                let axis: Vec<f64> = (0..per_axis).map(|i| i as f64 / (per_axis - 1) as f64).collect();
                Ok(tensor(&axis, d, n))
            }
            SamplerSpec::DyadicGrid { level } => {
                let k = 1usize << level;
                let axis: Vec<f64> = (0..=k).map(|i| i as f64 / k as f64).collect();
                Ok(tensor(&axis, d, n))
            }
            SamplerSpec::Halton { count, seed } => {
                if d > PRIMES.len() {
                    return Err(Error::Envelope(format!("Halton sampling supports d ≤ {}", PRIMES.len())));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let shift: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
                Ok((1..=count as u64)
                    .map(|i| {
                        (0..d)
                            .map(|j| {
                                let v = radical_inverse(i, PRIMES[j]) + shift[j];
                                if v >= 1.0 {
                                    v - 1.0
                                } else {
                                    v
                                }
                            })
                            .collect()
                    })
                    .collect())
            }
        }
    }
}

fn checked_pow(base: usize, d: usize) -> Result<usize> {
    let exp = u32::try_from(d).map_err(|_| Error::Config("dimension too large".into()))?;
    base.checked_pow(exp)
        .ok_or(Error::CapExceeded { what: "sample point count", cap: MAX_POINTS as u64 })
}

fn tensor(axis: &[f64], d: usize, n: usize) -> Vec<Vec<f64>> {
    let k = axis.len();
    (0..n)
        .map(|mut flat| {
            let mut p = vec![0.0; d];
            for slot in p.iter_mut().rev() {
                *slot = axis[flat % k];
                flat /= k;
            }
            p
        })
        .collect()
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_layout() {
        let pts = SamplerSpec::Grid { per_axis: 3 }.points(2).unwrap();
        assert_eq!(pts.len(), 9);
        assert_eq!(pts[0], vec![0.0, 0.0]);
        assert_eq!(pts[1], vec![0.0, 0.5]);
        assert_eq!(pts[8], vec![1.0, 1.0]);
    }

    #[test]
    fn dyadic_grid_hits_midpoints() {
        let pts = SamplerSpec::DyadicGrid { level: 4 }.points(1).unwrap();
        assert_eq!(pts.len(), 17);
        assert!(pts.iter().any(|p| p[0] == 0.5 / 8.0));
    }

    #[test]
    fn halton_is_seeded_and_in_range() {
        let s = SamplerSpec::Halton { count: 1000, seed: 4 };
        let a = s.points(3).unwrap();
        assert_eq!(a, s.points(3).unwrap());
        assert_ne!(a, SamplerSpec::Halton { count: 1000, seed: 5 }.points(3).unwrap());
        assert!(a.iter().flatten().all(|&v| (0.0..1.0).contains(&v)));
        // low discrepancy: every octant of the cube gets close to 1/8 of the points
        let mut counts = [0usize; 8];
        for p in &a {
            let k = p.iter().enumerate().map(|(j, &v)| ((v >= 0.5) as usize) << j).sum::<usize>();
            counts[k] += 1;
        }
        assert!(counts.iter().all(|&c| (110..=140).contains(&c)), "{counts:?}");
    }

    #[test]
    fn radical_inverse_values() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(5, 3) - 7.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn caps_and_defaults() {
        assert!(SamplerSpec::Grid { per_axis: 10_000 }.points(3).is_err());
        assert_eq!(SamplerSpec::default_for(1).len(1).unwrap(), 10_001);
        assert_eq!(SamplerSpec::default_for(2).len(2).unwrap(), 10_201);
        assert_eq!(SamplerSpec::default_for(3).len(3).unwrap(), 100_000);
        let json = serde_json::to_string(&SamplerSpec::Halton { count: 5, seed: 1 }).unwrap();
        assert_eq!(json, r#"{"kind":"halton","count":5,"seed":1}"#);
    }
}
