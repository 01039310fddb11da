//! Certified upper bound for `1 + max_{α∈L} ‖f′(α)‖`, where `‖·‖` is the
//! operator norm induced by the max norm (largest absolute row sum of the
//! Jacobian).
//!
//! Branch and bound: every box carries an interval-arithmetic upper bound,
//! box centers give attained lower bounds, and the box with the largest upper
//! bound is bisected along its widest side until the two bounds are within
//! half a percent.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{FastPoly, ManifoldSpec, Rectangle};

const REL_GAP: f64 = 0.005;
const MAX_BOXES: usize = 200_000;

struct Cell {
    upper: f64,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Cell {}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.upper
            .total_cmp(&other.upper)
            .then_with(|| other.lo.partial_cmp(&self.lo).unwrap_or(Ordering::Equal))
    }
}

fn row_sum_upper(jac: &[Vec<FastPoly>], lo: &[f64], hi: &[f64]) -> f64 {
    jac.iter()
        .map(|row| {
            row.iter()
                .map(|p| {
                    let (a, b) = p.eval_interval(lo, hi);
                    a.abs().max(b.abs())
                })
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

fn row_sum_at(jac: &[Vec<FastPoly>], x: &[f64]) -> f64 {
    jac.iter()
        .map(|row| row.iter().map(|p| p.eval(x).abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `C₁ = 1 + max_{α∈L} ‖f′(α)‖`, returned as an upper bound that is within
/// 1% of the true value.
pub fn lipschitz_c1(spec: &ManifoldSpec, l: &Rectangle) -> f64 {
    let jac = spec.map.fast_jacobian();
    if spec.map.is_zero() {
        return 1.0;
    }
    let lo = l.lo_f64();
    let hi = l.hi_f64();
    let center = |lo: &[f64], hi: &[f64]| -> Vec<f64> {
        lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect()
    };

    let mut best_lower = row_sum_at(jac, &center(&lo, &hi));
    // corners are cheap and often where the maximum sits
    let d = lo.len();
    if d <= 10 {
        for mask in 0..(1usize << d) {
            let x: Vec<f64> = (0..d)
                .map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] })
                .collect();
            best_lower = best_lower.max(row_sum_at(jac, &x));
        }
    }

    let mut heap = BinaryHeap::new();
    heap.push(Cell {
        upper: row_sum_upper(jac, &lo, &hi),
        lo,
        hi,
    });
    let mut boxes = 1;
    while let Some(cell) = heap.pop() {
        if 1.0 + cell.upper <= (1.0 + best_lower) * (1.0 + REL_GAP) || boxes >= MAX_BOXES {
            return 1.0 + cell.upper;
        }
        let axis = (0..d)
            .max_by(|&a, &b| {
                (cell.hi[a] - cell.lo[a])
                    .total_cmp(&(cell.hi[b] - cell.lo[b]))
                    .then(b.cmp(&a))
            })
            .unwrap();
        let mid = 0.5 * (cell.lo[axis] + cell.hi[axis]);
        for half in 0..2 {
            let mut lo = cell.lo.clone();
            let mut hi = cell.hi.clone();
            if half == 0 {
                hi[axis] = mid;
            } else {
                lo[axis] = mid;
            }
            best_lower = best_lower.max(row_sum_at(jac, &center(&lo, &hi)));
            let upper = row_sum_upper(jac, &lo, &hi);
            heap.push(Cell { upper, lo, hi });
            boxes += 1;
        }
    }
    1.0 + best_lower
}
