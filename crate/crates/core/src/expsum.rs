//! Trigonometric kernel bounds and the exponential-sum majorant for
//! `A(q, κ, θ)`.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::counting::{count_r, CountQuery, Theta};
use crate::error::{Error, Result};
use crate::manifold::ManifoldSpec;

/// Distance to the nearest integer (ties to even, so `‖1/2‖ = 1/2` either way).
pub fn dist_to_int(x: f64) -> f64 {
    (x - x.round_ties_even()).abs()
}

/// `Σ_{|h|≤H} (H - |h|) e(hx) = (sin(Hπx)/sin(πx))²`.
pub fn fejer(h: u64, x: f64) -> f64 {
    let y = x - x.round_ties_even();
    let s = (PI * y).sin();
    if s.abs() < 1e-300 {
        return (h * h) as f64;
    }
    let v = (h as f64 * PI * y).sin() / s;
    v * v
}

/// `Σ_{|h|≤H} e(hx) = sin((2H+1)πx)/sin(πx)`.
pub fn dirichlet(h: u64, x: f64) -> f64 {
    let y = x - x.round_ties_even();
    let s = (PI * y).sin();
    if s.abs() < 1e-300 {
        return (2 * h + 1) as f64;
    }
    ((2 * h + 1) as f64 * PI * y).sin() / s
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelReport {
    pub h: u64,
    pub points: usize,
    /// `min_x` of `fejer - (2H/π)²·[‖x‖ ≤ 1/(2H)]`.
    pub fejer_slack: f64,
    pub fejer_worst_x: f64,
    /// `min_x` of `min(2H+1, 1/(2‖x‖)) - dirichlet`.
    pub dirichlet_slack: f64,
    pub dirichlet_worst_x: f64,
}

impl KernelReport {
    pub fn worst_slack(&self) -> f64 {
        self.fejer_slack.min(self.dirichlet_slack)
    }
}

/// Checks both kernel inequalities at every `x`.
pub fn kernel_check(h: u64, xs: &[f64]) -> Result<KernelReport> {
    if h == 0 {
        return Err(Error::invalid("H must be at least 1"));
    }
    let hf = h as f64;
    let lower = (2.0 * hf / PI).powi(2);
    let mut rep = KernelReport {
        h,
        points: xs.len(),
        fejer_slack: f64::INFINITY,
        fejer_worst_x: f64::NAN,
        dirichlet_slack: f64::INFINITY,
        dirichlet_worst_x: f64::NAN,
    };
    for &x in xs {
        let n = dist_to_int(x);
        let bound = if n <= 1.0 / (2.0 * hf) { lower } else { 0.0 };
        let s = fejer(h, x) - bound;
        if s < rep.fejer_slack {
            rep.fejer_slack = s;
            rep.fejer_worst_x = x;
        }
        let cap = if n == 0.0 {
            2.0 * hf + 1.0
        } else {
            (2.0 * hf + 1.0).min(1.0 / (2.0 * n))
        };
        let s = cap - dirichlet(h, x);
        if s < rep.dirichlet_slack {
            rep.dirichlet_slack = s;
            rep.dirichlet_worst_x = x;
        }
    }
    Ok(rep)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MajorantParams {
    pub h: u64,
    pub r: u64,
    pub delta: f64,
}

impl MajorantParams {
    /// `H = ⌊1/(4κ)⌋`, `r = ⌊(δqκ)^{1/2}⌋`; both must be at least 1.
    pub fn new(q: u64, kappa: &BigRational, delta: f64) -> Result<Self> {
        if !kappa.is_positive() {
            return Err(Error::invalid("kappa must be positive"));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::invalid("delta must lie in (0, 1]"));
        }
        let h = Integer::div_floor(kappa.denom(), &(kappa.numer() * BigInt::from(4)))
            .to_u64()
            .unwrap_or(u64::MAX);
        let x = delta * q as f64 * kappa.to_f64().unwrap_or(f64::INFINITY);
        let mut r = x.sqrt().floor().max(0.0) as u64;
        while r > 0 && (r * r) as f64 > x {
            r -= 1;
        }
        while ((r + 1) * (r + 1)) as f64 <= x {
            r += 1;
        }
        if h < 1 || r < 1 {
            return Err(Error::OutOfRegime { h, r });
        }
        Ok(Self { h, r, delta })
    }
}

/// Jacobians of `f` at the vertices and midpoints of a uniform grid on `K`.
struct Grid<'a> {
    spec: &'a ManifoldSpec,
    n: usize,
    lo: Vec<f64>,
    step: Vec<f64>,
    vertex_jac: Vec<f64>,
    mid_jac: Vec<f64>,
}

const MAX_CELLS: usize = 1 << 24;

fn unrank(mut idx: usize, base: usize, out: &mut [usize]) {
    for o in out.iter_mut().rev() {
        *o = idx % base;
        idx /= base;
    }
}

impl<'a> Grid<'a> {
    fn new(spec: &'a ManifoldSpec, n: usize) -> Result<Self> {
        if n < 8 {
            return Err(Error::invalid("quadrature grid must have at least 8 cells per axis"));
        }
        let d = spec.d();
        let cells = n.checked_pow(d as u32).filter(|&c| c <= MAX_CELLS);
        if cells.is_none() {
            return Err(Error::invalid(format!("grid {n}^{d} is too large")));
        }
        let (lo, hi) = (spec.rect.lo_f64(), spec.rect.hi_f64());
        let step: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| (h - l) / n as f64).collect();
        let md = spec.m() * d;
        let sample = |count: usize, base: usize, offset: f64| -> Vec<f64> {
            let mut out = vec![0.0; count * md];
            out.par_chunks_mut(md).enumerate().for_each(|(idx, slot)| {
                let mut ix = vec![0; d];
                unrank(idx, base, &mut ix);
                let x: Vec<f64> = (0..d).map(|i| lo[i] + (ix[i] as f64 + offset) * step[i]).collect();
                spec.map.jacobian_f64_into(&x, slot);
            });
            out
        };
        let vertex_jac = sample((n + 1).pow(d as u32), n + 1, 0.0);
        let mid_jac = sample(n.pow(d as u32), n, 0.5);
        Ok(Self {
            spec,
            n,
            lo,
            step,
            vertex_jac,
            mid_jac,
        })
    }

    fn d(&self) -> usize {
        self.spec.d()
    }

    fn integrate(&self, h: &[i64], r: u64) -> f64 {
        let d = self.d();
        let m = self.spec.m();
        let md = m * d;
        let rf = r as f64;
        let value = |jac: &[f64]| -> f64 {
            let mut p = 1.0;
            for i in 0..d {
                let s: f64 = (0..m).map(|j| h[j] as f64 * jac[j * d + i]).sum();
                let n = dist_to_int(s);
                if rf * n > 1.0 {
                    p /= rf * n;
                }
            }
            p
        };
        let cells = self.n.pow(d as u32);
        let cell_vol: f64 = self.step.iter().product();
        let sub_vol = cell_vol / (1usize << d) as f64;
        let sums: Vec<f64> = (0..cells)
            .into_par_iter()
            .with_min_len(256)
            .map(|c| {
                let mut ix = vec![0; d];
                unrank(c, self.n, &mut ix);
                let mid = value(&self.mid_jac[c * md..(c + 1) * md]);
                let (mut lo, mut hi) = (mid, mid);
                for bits in 0..(1usize << d) {
                    let mut v = 0;
                    for (i, &x) in ix.iter().enumerate() {
                        v = v * (self.n + 1) + x + ((bits >> (d - 1 - i)) & 1);
                    }
                    let f = value(&self.vertex_jac[v * md..(v + 1) * md]);
                    lo = lo.min(f);
                    hi = hi.max(f);
                }
                if hi <= 4.0 * lo {
                    return mid * cell_vol;
                }
                // one dyadic refinement level
                let mut jac = vec![0.0; md];
                let mut acc = 0.0;
                for bits in 0..(1usize << d) {
                    let x: Vec<f64> = (0..d)
                        .map(|i| {
                            let quarter = if (bits >> i) & 1 == 1 { 0.75 } else { 0.25 };
                            self.lo[i] + (ix[i] as f64 + quarter) * self.step[i]
                        })
                        .collect();
                    self.spec.map.jacobian_f64_into(&x, &mut jac);
                    acc += value(&jac);
                }
                acc * sub_vol
            })
            .collect();
        sums.iter().sum()
    }
}

/// `∫_K Π_i min(1, 1/(r‖h·∂_i f(α)‖)) dα` by midpoint quadrature with one
/// refinement level on cells where the integrand varies by more than 4×.
pub fn product_integral(spec: &ManifoldSpec, h: &[i64], r: u64, grid: usize) -> Result<f64> {
    if r == 0 {
        return Err(Error::invalid("r must be at least 1"));
    }
    if h.len() != spec.m() {
        return Err(Error::DimensionMismatch {
            expected: spec.m(),
            actual: h.len(),
        });
    }
    Ok(Grid::new(spec, grid)?.integrate(h, r))
}

#[derive(Clone, Debug, Serialize)]
pub struct Majorant {
    pub params: MajorantParams,
    pub value: f64,
}

/// `q^d H^{-m} Σ_{|h|∞ ≤ H} ∫_K Π_i min(1, 1/(r‖h·∂_i f‖)) dα`.
pub fn majorant(spec: &ManifoldSpec, q: u64, kappa: &BigRational, delta: f64, grid: usize) -> Result<Majorant> {
    let params = MajorantParams::new(q, kappa, delta)?;
    let g = Grid::new(spec, grid)?;
    let m = spec.m();
    let side = 2 * params.h as usize + 1;
    let total = side.checked_pow(m as u32).ok_or_else(|| Error::invalid("too many frequencies"))?;
    let mut h = vec![0i64; m];
    let mut sum = 0.0;
    for idx in 0..total {
        let mut rest = idx;
        for hj in h.iter_mut().rev() {
            *hj = (rest % side) as i64 - params.h as i64;
            rest /= side;
        }
        sum += g.integrate(&h, params.r);
    }
    let value = (q as f64).powi(spec.d() as i32) * (params.h as f64).powi(-(m as i32)) * sum;
    Ok(Majorant { params, value })
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareRow {
    pub q: u64,
    #[serde(serialize_with = "ser_rational")]
    pub kappa: BigRational,
    pub theta_id: usize,
    pub count: u64,
    /// `None` when `(q, κ, δ)` is out of regime.
    pub majorant: Option<Majorant>,
}

fn ser_rational<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

impl CompareRow {
    pub fn ratio(&self) -> Option<f64> {
        self.majorant.as_ref().map(|mj| self.count as f64 / mj.value)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareTable {
    pub delta: f64,
    pub grid: usize,
    pub rows: Vec<CompareRow>,
}

impl CompareTable {
    /// Smallest `C` with `A ≤ C · majorant` on every in-regime row.
    pub fn constant(&self) -> Option<f64> {
        self.rows
            .iter()
            .filter_map(CompareRow::ratio)
            .fold(None, |acc, x| Some(acc.map_or(x, |a: f64| a.max(x))))
    }

    pub fn in_regime(&self) -> usize {
        self.rows.iter().filter(|r| r.majorant.is_some()).count()
    }
}

/// Exact counts against the majorant. The majorant does not depend on `θ`
/// and is computed once per `(q, κ)`.
pub fn compare_sweep(spec: &ManifoldSpec, queries: &[CountQuery], delta: f64, grid: usize) -> Result<CompareTable> {
    let mut thetas: Vec<Theta> = Vec::new();
    let mut cache: HashMap<(u64, BigRational), Option<Majorant>> = HashMap::new();
    let mut rows = Vec::with_capacity(queries.len());
    for query in queries {
        let theta_id = match thetas.iter().position(|t| *t == query.theta) {
            Some(i) => i,
            None => {
                thetas.push(query.theta.clone());
                thetas.len() - 1
            }
        };
        let key = (query.q, query.kappa.clone());
        let mj = match cache.get(&key) {
            Some(v) => v.clone(),
            None => {
                let v = match majorant(spec, query.q, &query.kappa, delta, grid) {
                    Ok(mj) => Some(mj),
                    Err(Error::OutOfRegime { .. }) => None,
                    Err(e) => return Err(e),
                };
                cache.insert(key, v.clone());
                v
            }
        };
        rows.push(CompareRow {
            q: query.q,
            kappa: query.kappa.clone(),
            theta_id,
            count: count_r(spec, query)?,
            majorant: mj,
        });
    }
    Ok(CompareTable { delta, grid, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{builtin, zero_map};

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn direct_fejer(h: u64, x: f64) -> f64 {
        let h = h as i64;
        (-h..=h).map(|k| (h - k.abs()) as f64 * (2.0 * PI * k as f64 * x).cos()).sum()
    }

    fn direct_dirichlet(h: u64, x: f64) -> f64 {
        let h = h as i64;
        (-h..=h).map(|k| (2.0 * PI * k as f64 * x).cos()).sum()
    }

    #[test]
    fn closed_forms_match_direct_sums() {
        for h in [1, 2, 5, 13] {
            for i in 0..200 {
                let x = i as f64 / 199.0 - 0.3;
                assert!((fejer(h, x) - direct_fejer(h, x)).abs() < 1e-9 * (h * h) as f64);
                assert!((dirichlet(h, x) - direct_dirichlet(h, x)).abs() < 1e-9 * h as f64);
            }
        }
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(fejer(1, 0.0), 1.0);
        assert_eq!(dirichlet(1, 0.0), 3.0);
        let rep = kernel_check(1, &[0.0]).unwrap();
        assert!(rep.worst_slack() >= 0.0);
        let v = fejer(4, 0.125);
        assert!((v - 1.0 / (PI / 8.0).sin().powi(2)).abs() < 1e-12);
        assert!(v >= (8.0 / PI).powi(2));
        for h in 1..10 {
            assert!((dirichlet(h, 0.5).abs() - 1.0).abs() < 1e-12);
        }
        assert!(kernel_check(0, &[0.1]).is_err());
    }

    #[test]
    fn regime_parameters() {
        assert!(matches!(
            MajorantParams::new(100, &r(1, 2), 0.01),
            Err(Error::OutOfRegime { h: 0, .. })
        ));
        assert!(matches!(
            MajorantParams::new(400, &r(1, 8), 0.01),
            Err(Error::OutOfRegime { h: 2, r: 0 })
        ));
        let p = MajorantParams::new(400, &r(1, 8), 1.0).unwrap();
        assert_eq!((p.h, p.r), (2, 7));
        // δqκ = 4 exactly
        assert_eq!(MajorantParams::new(16, &r(1, 4), 1.0).unwrap().r, 2);
        assert_eq!(MajorantParams::new(16, &r(1, 5), 1.0).unwrap().r, 1);
    }

    #[test]
    fn trivial_integrals() {
        let spec = builtin("tracefree2").unwrap();
        assert!((product_integral(&spec, &[0, 0], 5, 16).unwrap() - 1.0).abs() < 1e-12);
        let z = zero_map(2, 1);
        assert!((product_integral(&z, &[3], 5, 16).unwrap() - 1.0).abs() < 1e-12);
        assert!(product_integral(&z, &[3], 5, 4).is_err());
        assert!(product_integral(&z, &[3, 1], 5, 16).is_err());
    }

    #[test]
    fn parabola_integral_matches_reference() {
        // ∫₀¹ min(1, 1/(10‖2α‖)) dα by a fine midpoint rule
        let n = 1_000_000;
        let reference: f64 = (0..n)
            .map(|i| {
                let a = (i as f64 + 0.5) / n as f64;
                (1.0f64).min(1.0 / (10.0 * dist_to_int(2.0 * a)))
            })
            .sum::<f64>()
            / n as f64;
        let spec = builtin("parabola").unwrap();
        let v = product_integral(&spec, &[1], 10, 256).unwrap();
        assert!((v - reference).abs() < 0.01 * reference, "{v} vs {reference}");
        // closed form: (1/5)(1 + ln 5)
        assert!((reference - 0.2 * (1.0 + 5f64.ln())).abs() < 1e-4);
    }

    #[test]
    fn zero_map_majorant() {
        let spec = zero_map(2, 2);
        let mj = majorant(&spec, 1000, &r(1, 16), 0.5, 8).unwrap();
        let (h, q) = (mj.params.h as f64, 1000f64);
        let expected = q * q * ((2.0 * h + 1.0) / h).powi(2);
        assert!((mj.value - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn majorant_is_theta_independent_and_dominates() {
        let spec = builtin("parabola").unwrap();
        let thetas = [
            Theta::zero(1, 1),
            Theta { lambda: vec![r(1, 3)], gamma: vec![r(1, 7)] },
            Theta { lambda: vec![r(1, 2)], gamma: vec![r(2, 5)] },
        ];
        let queries: Vec<CountQuery> = thetas
            .iter()
            .map(|t| CountQuery::new(2000, r(1, 16), t.clone()).unwrap())
            .collect();
        let table = compare_sweep(&spec, &queries, 0.1, 64).unwrap();
        assert_eq!(table.in_regime(), 3);
        let v: Vec<f64> = table.rows.iter().map(|r| r.majorant.as_ref().unwrap().value).collect();
        assert!(v.windows(2).all(|w| w[0] == w[1]));
        assert_eq!(table.rows[2].theta_id, 2);
        assert!(table.constant().unwrap() > 0.0);
    }

    #[test]
    fn empty_count_has_zero_ratio() {
        let spec = zero_map(1, 1);
        let theta = Theta { lambda: vec![r(0, 1)], gamma: vec![r(1, 2)] };
        let q = CountQuery::new(4000, r(1, 1000), theta).unwrap();
        let t = compare_sweep(&spec, &[q], 1.0, 8).unwrap();
        assert_eq!(t.rows[0].count, 0);
        assert_eq!(t.rows[0].ratio(), Some(0.0));
    }
}
