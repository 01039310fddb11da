//! Deterministic quasi-uniform point sets on the upper half of `S^{m-1}`.
//!
//! Every objective minimized here is invariant under `t ↦ -t`, so only one
//! point of each antipodal pair is generated.

use std::f64::consts::PI;

use crate::scalar::Scalar;

const PRIMES: [u32; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

#[derive(Clone, Debug)]
pub struct SphereGrid<T> {
    m: usize,
    points: Vec<T>,
    /// Typical distance between neighbouring points (radians).
    spacing: f64,
}

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while i > 0 {
        out += (i % b) as f64 * f;
        i /= b;
        f *= inv;
    }
    out
}

impl<T: Scalar> SphereGrid<T> {
    /// About `n` points (exactly one for `m = 1`).
    pub fn new(m: usize, n: usize) -> Self {
        assert!(m >= 1 && n >= 1);
        let mut pts: Vec<f64> = Vec::new();
        match m {
            1 => pts.push(1.0),
            2 => {
                for j in 0..n {
                    let a = PI * (j as f64 + 0.5) / n as f64;
                    pts.extend([a.cos(), a.sin()]);
                }
            }
            3 => {
                let golden = PI * (3.0 - 5.0f64.sqrt());
                for j in 0..n {
                    let z = (j as f64 + 0.5) / n as f64;
                    let r = (1.0 - z * z).sqrt();
                    let phi = golden * j as f64;
                    pts.extend([r * phi.cos(), r * phi.sin(), z]);
                }
            }
            _ => {
                let mut u = vec![0.0; m + m % 2];
                let mut x = vec![0.0; m];
                for j in 1..=n as u64 {
                    for (c, ui) in u.iter_mut().enumerate() {
                        let p = PRIMES[c % PRIMES.len()];
                        // beyond the prime table, scramble by offsetting the index
                        let shift = (c / PRIMES.len()) as u64 * 7919;
                        *ui = radical_inverse(j + shift, p);
                    }
                    for c in (0..u.len()).step_by(2) {
                        let r = (-2.0 * (1.0 - u[c]).ln()).sqrt();
                        let th = 2.0 * PI * u[c + 1];
                        x[c] = r * th.cos();
                        if c + 1 < m {
                            x[c + 1] = r * th.sin();
                        }
                    }
                    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if norm == 0.0 {
                        continue;
                    }
                    let sign = if x[0] < 0.0 { -1.0 } else { 1.0 };
                    pts.extend(x.iter().map(|v| sign * v / norm));
                }
            }
        }
        let count = pts.len() / m;
        // area of the half sphere divided among the points
        let half_area = PI.powf(m as f64 / 2.0) / gamma_half(m);
        let spacing = if m == 1 {
            PI
        } else {
            (half_area / count as f64).powf(1.0 / (m as f64 - 1.0))
        };
        Self {
            m,
            points: pts.into_iter().map(T::of).collect(),
            spacing,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.m
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.points[i * self.m..(i + 1) * self.m]
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }
}

/// `Γ(m/2)`.
fn gamma_half(m: usize) -> f64 {
    // Γ(1/2) = √π, Γ(1) = 1, Γ(x+1) = x Γ(x)
    let (mut g, mut x) = if m % 2 == 0 { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    while x < m as f64 / 2.0 - 1e-9 {
        g *= x;
        x += 1.0;
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_are_unit_and_in_upper_half() {
        for m in 1..=7 {
            let g: SphereGrid<f64> = SphereGrid::new(m, 500);
            assert!(g.len() >= 1);
            for i in 0..g.len() {
                let p = g.point(i);
                let n: f64 = p.iter().map(|v| v * v).sum();
                assert!((n - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn circle_grid_is_equispaced() {
        let g: SphereGrid<f64> = SphereGrid::new(2, 4);
        let p = g.point(0);
        assert!((p[0] - (PI / 8.0).cos()).abs() < 1e-15);
        assert!((g.spacing() - PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_values() {
        assert!((gamma_half(2) - 1.0).abs() < 1e-15);
        assert!((gamma_half(3) - PI.sqrt() / 2.0).abs() < 1e-15);
        assert!((gamma_half(6) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn covering_in_four_dimensions() {
        // every random direction should have a grid point within a few spacings
        let g: SphereGrid<f64> = SphereGrid::new(4, 4000);
        let probes: SphereGrid<f64> = SphereGrid::new(4, 50);
        for i in 0..probes.len() {
            let q: Vec<f64> = probes.point(i).iter().map(|v| -v * 0.8 + 0.1).collect();
            let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
            let best = (0..g.len())
                .map(|j| {
                    let dot: f64 = g.point(j).iter().zip(&q).map(|(a, b)| a * b / n).sum();
                    dot.abs().min(1.0).acos()
                })
                .fold(f64::INFINITY, f64::min);
            assert!(best < 3.0 * g.spacing(), "{best} vs {}", g.spacing());
        }
    }
}
