//! Rational points `(a+λ)/q` of a box whose image lies within `κ/q` of a
//! shifted lattice point `(b+γ)/q`, counted exactly.

mod exact;
mod sweep;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::manifold::ManifoldSpec;
use crate::scalar::{log_floor1, rational_from_f64};

pub use exact::{Component, ExactInt, Prepared};
pub use sweep::{bound_sweep, hc_partial_sum, HcSum, KappaRule, SweepRow, SweepTable};

/// Shift `θ = (λ, γ)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Theta {
    pub lambda: Vec<BigRational>,
    pub gamma: Vec<BigRational>,
}

impl Theta {
    pub fn zero(d: usize, m: usize) -> Self {
        Self {
            lambda: vec![BigRational::zero(); d],
            gamma: vec![BigRational::zero(); m],
        }
    }

    /// Split a flat list of `d + m` values into `λ` and `γ`.
    pub fn from_flat(d: usize, m: usize, values: Vec<BigRational>) -> Result<Self> {
        if values.len() != d + m {
            return Err(Error::DimensionMismatch {
                expected: d + m,
                actual: values.len(),
            });
        }
        let mut lambda = values;
        let gamma = lambda.split_off(d);
        Ok(Self { lambda, gamma })
    }

    pub fn is_zero(&self) -> bool {
        self.lambda.iter().chain(&self.gamma).all(Zero::is_zero)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CountQuery {
    pub q: u64,
    pub kappa: BigRational,
    pub theta: Theta,
}

impl CountQuery {
    pub fn new(q: u64, kappa: BigRational, theta: Theta) -> Result<Self> {
        if q == 0 {
            return Err(Error::invalid("q must be at least 1"));
        }
        if !kappa.is_positive() {
            return Err(Error::invalid("kappa must be positive"));
        }
        Ok(Self { q, kappa, theta })
    }

    fn check(&self, spec: &ManifoldSpec) -> Result<()> {
        if self.theta.lambda.len() != spec.d() {
            return Err(Error::DimensionMismatch {
                expected: spec.d(),
                actual: self.theta.lambda.len(),
            });
        }
        if self.theta.gamma.len() != spec.m() {
            return Err(Error::DimensionMismatch {
                expected: spec.m(),
                actual: self.theta.gamma.len(),
            });
        }
        Ok(())
    }
}

/// A counted point `(a, b)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct LatticePoint {
    pub a: Vec<i64>,
    pub b: Vec<BigInt>,
}

#[derive(Clone, Debug)]
pub struct CountResult {
    pub query: CountQuery,
    /// Sorted lexicographically by `(a, b)`.
    pub points: Vec<LatticePoint>,
    pub count: u64,
}

/// Calls `f` on every `a` of the box with fixed first coordinate `a0`, in
/// lexicographic order.
fn for_each_in_slab(ranges: &[(i64, i64)], a0: i64, mut f: impl FnMut(&[i64])) {
    if ranges.iter().any(|(lo, hi)| lo > hi) {
        return;
    }
    let mut a: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    a[0] = a0;
    let d = a.len();
    loop {
        f(&a);
        let mut i = d;
        loop {
            if i == 1 {
                return;
            }
            i -= 1;
            if a[i] < ranges[i].1 {
                a[i] += 1;
                break;
            }
            a[i] = ranges[i].0;
        }
    }
}

fn first_coordinates(prep: &Prepared) -> Vec<i64> {
    match prep.a_ranges.first() {
        Some(&(lo, hi)) if lo <= hi && prep.a_ranges.iter().all(|r| r.0 <= r.1) => (lo..=hi).collect(),
        _ => Vec::new(),
    }
}

/// Lists `R(q, κ, θ)` in lexicographic order.
pub fn enumerate_r(spec: &ManifoldSpec, query: &CountQuery) -> Result<CountResult> {
    query.check(spec)?;
    let prep = Prepared::new(spec, query);
    let slabs: Vec<Vec<LatticePoint>> = first_coordinates(&prep)
        .into_par_iter()
        .map(|a0| {
            let mut out = Vec::new();
            let mut scratch = Vec::new();
            for_each_in_slab(&prep.a_ranges, a0, |a| {
                let windows = prep.windows(a, &mut scratch);
                if windows.iter().any(|(lo, hi)| hi < lo) {
                    return;
                }
                let mut b: Vec<BigInt> = windows.iter().map(|w| w.0.clone()).collect();
                loop {
                    out.push(LatticePoint {
                        a: a.to_vec(),
                        b: b.clone(),
                    });
                    let mut j = b.len();
                    let advanced = loop {
                        if j == 0 {
                            break false;
                        }
                        j -= 1;
                        if b[j] < windows[j].1 {
                            b[j] += 1;
                            break true;
                        }
                        b[j] = windows[j].0.clone();
                    };
                    if !advanced {
                        break;
                    }
                }
            });
            out
        })
        .collect();
    let points: Vec<LatticePoint> = slabs.into_iter().flatten().collect();
    Ok(CountResult {
        query: query.clone(),
        count: points.len() as u64,
        points,
    })
}

/// `A(q, κ, θ)` without materializing the points.
pub fn count_r(spec: &ManifoldSpec, query: &CountQuery) -> Result<u64> {
    query.check(spec)?;
    let prep = Prepared::new(spec, query);
    let total: u128 = first_coordinates(&prep)
        .into_par_iter()
        .map(|a0| {
            let mut scratch = Vec::new();
            let mut acc: u128 = 0;
            for_each_in_slab(&prep.a_ranges, a0, |a| acc += prep.count_at(a, &mut scratch));
            acc
        })
        .sum();
    u64::try_from(total).map_err(|_| Error::invalid("count exceeds u64"))
}

/// Critical scale `(Log²(q)/q)^{k/(2m+k)}` with `Log = max(1, ln)`. Accepts
/// real `q ≥ 1` so it can be probed between integers.
pub fn phi(q: f64, m: usize, k: usize) -> f64 {
    let l = log_floor1(q);
    (l * l / q).powf(k as f64 / (2 * m + k) as f64)
}

/// Exact dyadic value of a float, for parameters that are only known
/// numerically.
pub fn exact_kappa(x: f64) -> Result<BigRational> {
    match rational_from_f64(x) {
        Some(r) if r.is_positive() => Ok(r),
        _ => Err(Error::invalid(format!("kappa {x} is not a positive finite number"))),
    }
}
