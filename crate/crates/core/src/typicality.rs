//! Monte Carlo phase diagram for the pencil conditions on random linear maps
//! `Sym²R^d → R^m`, plus the explicit constructions used to populate it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::{tracefree_source, PolyMap};
use crate::nondegen::{
    check_drv_with, check_rank_k_with, check_surjective, default_budget, RankReport, SearchOptions, SphereGrid,
    Verdict,
};
use crate::scalar::binomial;
use crate::symspace::{dense::singular_values, middle_eigenvalue, SymMatrix, SymPencil};

pub const GAUSSIAN: &str = "gaussian-upper";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OperatorSample {
    pub pencil: SymPencil<f64>,
    pub seed: u64,
    pub distribution: String,
}

impl OperatorSample {
    pub fn fixed(pencil: SymPencil<f64>, tag: &str) -> Self {
        Self {
            pencil,
            seed: 0,
            distribution: tag.to_string(),
        }
    }
}

/// `m` symmetric `d×d` matrices with independent standard normal entries on
/// and above the diagonal.
pub fn sample_operator(d: usize, m: usize, seed: u64) -> Result<OperatorSample> {
    if d == 0 || m == 0 {
        return Err(Error::invalid("d and m must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gens = (0..m)
        .map(|_| {
            let packed = (0..d * (d + 1) / 2).map(|_| StandardNormal.sample(&mut rng)).collect();
            SymMatrix::from_packed(d, packed).expect("packed length")
        })
        .collect();
    Ok(OperatorSample {
        pencil: SymPencil::new(gens)?,
        seed,
        distribution: GAUSSIAN.to_string(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Membership {
    pub verdict: Verdict,
    pub surjective: bool,
    /// Absent when surjectivity already failed or the dimension rules the
    /// condition out.
    pub search: Option<RankReport<f64>>,
}

impl Membership {
    fn fail(surjective: bool) -> Self {
        Self {
            verdict: Verdict::Fail,
            surjective,
            search: None,
        }
    }
}

fn cell_grid(m: usize, budget: usize) -> SphereGrid<f64> {
    SphereGrid::new(m, budget.max(1))
}

fn membership_with(
    a: &OperatorSample,
    grid: &SphereGrid<f64>,
    opts: &SearchOptions,
    drv: bool,
) -> Result<Membership> {
    let p = &a.pencil;
    let (surjective, _) = check_surjective(p);
    if !surjective || p.d() < 2 {
        return Ok(Membership::fail(surjective));
    }
    let report = if drv {
        check_drv_with(p, grid, opts)?
    } else {
        check_rank_k_with(p, 2, grid, opts)?
    };
    Ok(Membership {
        verdict: report.verdict,
        surjective,
        search: Some(report),
    })
}

/// Injective and every nonzero combination has rank at least two.
pub fn membership_u(a: &OperatorSample, budget: usize) -> Result<Membership> {
    membership_with(a, &cell_grid(a.pencil.m(), budget), &SearchOptions::default(), false)
}

/// Injective and every nonzero combination has two nonzero eigenvalues of
/// the same sign.
pub fn membership_utilde(a: &OperatorSample, budget: usize) -> Result<Membership> {
    membership_with(a, &cell_grid(a.pencil.m(), budget), &SearchOptions::default(), true)
}

pub const CONSTRUCTIONS: &[&str] = &["posdef-pad", "shear", "diag-squares", "tracefree-basis"];

fn sym_unit(d: usize, i: usize, j: usize) -> SymMatrix<f64> {
    let mut g = SymMatrix::zeros(d);
    g.set(i, j, 1.0);
    g
}

/// Named pencils:
/// * `posdef-pad`: `(I, 0, …, 0)` with `l` generators;
/// * `shear`: `E_id + E_di` for `i < l`, with `l < d`;
/// * `diag-squares`: `E_ii` for `i < min(l, d)`, padded with zeros to `l`;
/// * `tracefree-basis`: Hessians of the trace-free family (`l` ignored).
pub fn construct(name: &str, d: usize, l: usize) -> Result<OperatorSample> {
    if d == 0 {
        return Err(Error::invalid("d must be at least 1"));
    }
    let need_l = |ok: bool, what: &str| {
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("{name} needs {what} (got d = {d}, l = {l})")))
        }
    };
    let gens: Vec<SymMatrix<f64>> = match name {
        "posdef-pad" => {
            need_l(l >= 1, "l >= 1")?;
            let mut g = vec![SymMatrix::identity(d)];
            g.extend((1..l).map(|_| SymMatrix::zeros(d)));
            g
        }
        "shear" => {
            need_l(l >= 1 && l < d, "1 <= l < d")?;
            (0..l).map(|i| sym_unit(d, i, d - 1)).collect()
        }
        "diag-squares" => {
            need_l(l >= 1, "l >= 1")?;
            (0..l)
                .map(|i| if i < d { sym_unit(d, i, i) } else { SymMatrix::zeros(d) })
                .collect()
        }
        "tracefree-basis" => {
            need_l(d >= 2, "d >= 2")?;
            let m = binomial(d + 1, 2) - 1;
            let map = PolyMap::parse(&tracefree_source(d), d, m)?;
            return Ok(OperatorSample::fixed(map.hessian(&vec![0.0; d]), name));
        }
        _ => return Err(Error::UnknownConstruction(name.to_string())),
    };
    Ok(OperatorSample::fixed(SymPencil::new(gens)?, name))
}

#[derive(Clone, Debug, Serialize)]
pub struct AnnihilatorReport {
    pub found: bool,
    /// `min_{|v|=1} Σ_i Q_i(v)²`.
    pub min_value: f64,
    pub witness_v: Vec<f64>,
    pub threshold: f64,
}

fn sum_of_squares(p: &SymPencil<f64>, v: &[f64]) -> f64 {
    p.generators().iter().map(|g| g.quadratic_form(v).powi(2)).sum()
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

/// Projected Gauss–Newton on the residuals `Q_i(v)` over the sphere.
fn refine_annihilator(p: &SymPencil<f64>, v0: &[f64]) -> (f64, Vec<f64>) {
    let d = p.d();
    let mut v = v0.to_vec();
    let mut best = sum_of_squares(p, &v);
    let mut mu = 1e-3;
    for _ in 0..100 {
        // rows: tangent-projected gradients of Q_i
        let rows: Vec<Vec<f64>> = p
            .generators()
            .iter()
            .map(|g| {
                let mut grad: Vec<f64> = (0..d).map(|i| 2.0 * (0..d).map(|j| g.get(i, j) * v[j]).sum::<f64>()).collect();
                let radial: f64 = grad.iter().zip(&v).map(|(a, b)| a * b).sum();
                grad.iter_mut().zip(&v).for_each(|(gi, vi)| *gi -= radial * vi);
                grad
            })
            .collect();
        let res: Vec<f64> = p.generators().iter().map(|g| g.quadratic_form(&v)).collect();
        let mut jtj = vec![vec![0.0; d]; d];
        let mut jtr = vec![0.0; d];
        for (row, r) in rows.iter().zip(&res) {
            for i in 0..d {
                jtr[i] += row[i] * r;
                for j in 0..d {
                    jtj[i][j] += row[i] * row[j];
                }
            }
        }
        let mut improved = false;
        for _ in 0..8 {
            let mut a = jtj.clone();
            for (i, row) in a.iter_mut().enumerate() {
                row[i] += mu * (1.0 + row[i]);
            }
            let Some(step) = crate::symspace::dense::solve(&a, &jtr) else {
                mu *= 10.0;
                continue;
            };
            let mut cand: Vec<f64> = v.iter().zip(&step).map(|(x, s)| x - s).collect();
            normalize(&mut cand);
            let val = sum_of_squares(p, &cand);
            if val < best {
                best = val;
                v = cand;
                mu = (mu * 0.3).max(1e-12);
                improved = true;
                break;
            }
            mu *= 10.0;
        }
        if !improved || best < 1e-300 {
            break;
        }
    }
    (best, v)
}

/// Looks for a unit `v` with `Q_i(v) = 0` for every generator.
pub fn annihilator_zero_search(omega: &OperatorSample, budget: usize) -> Result<AnnihilatorReport> {
    let p = &omega.pencil;
    let d = p.d();
    let grid: SphereGrid<f64> = SphereGrid::new(d, budget.max(1));
    let mut seeds: Vec<(f64, usize)> = (0..grid.len()).map(|i| (sum_of_squares(p, grid.point(i)), i)).collect();
    seeds.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut best = (f64::INFINITY, vec![0.0; d]);
    for &(_, i) in seeds.iter().take(8) {
        let (val, v) = refine_annihilator(p, grid.point(i));
        if val < best.0 {
            best = (val, v);
        }
    }
    let threshold = (1e-8 * p.scale()).powi(2);
    Ok(AnnihilatorReport {
        found: best.0 <= threshold,
        min_value: best.0,
        witness_v: best.1,
        threshold,
    })
}

/// The forms `ω` vanishing on the span of the generators: a Frobenius
/// orthonormal basis of its orthogonal complement in `Sym²R^d`. `None` when
/// the generators span everything; an error when they are dependent.
pub fn annihilator(a: &OperatorSample) -> Result<Option<OperatorSample>> {
    let p = &a.pencil;
    let d = p.d();
    let dim = d * (d + 1) / 2;
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let scale = p.scale();
    let push = |mut v: Vec<f64>, basis: &mut Vec<Vec<f64>>, tol: f64| -> bool {
        // two passes of Gram–Schmidt for stability
        for _ in 0..2 {
            for b in basis.iter() {
                let c = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let n = dot(&v, &v).sqrt();
        if n <= tol {
            return false;
        }
        basis.push(v.into_iter().map(|x| x / n).collect());
        true
    };
    for g in p.flattened() {
        if !push(g, &mut basis, 1e-10 * scale) {
            return Err(Error::invalid("generators are linearly dependent"));
        }
    }
    let m = basis.len();
    for k in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut e = vec![0.0; dim];
        e[k] = 1.0;
        push(e, &mut basis, 1e-6);
    }
    if basis.len() == m {
        return Ok(None);
    }
    let inv_root2 = std::f64::consts::FRAC_1_SQRT_2;
    let forms = basis[m..]
        .iter()
        .map(|c| {
            let mut k = 0;
            SymMatrix::from_fn(d, |i, j| {
                let v = if i == j { c[k] } else { c[k] * inv_root2 };
                k += 1;
                v
            })
        })
        .collect();
    Ok(Some(OperatorSample::fixed(SymPencil::new(forms)?, "annihilator")))
}

/// Searches for a unit `v` with `vvᵀ` in the span of the generators, which
/// happens exactly when some nonzero combination has rank at most one.
pub fn rank_one_in_span(a: &OperatorSample, budget: usize) -> Result<AnnihilatorReport> {
    match annihilator(a)? {
        None => {
            let mut v = vec![0.0; a.pencil.d()];
            v[0] = 1.0;
            Ok(AnnihilatorReport {
                found: true,
                min_value: 0.0,
                witness_v: v,
                threshold: 0.0,
            })
        }
        Some(omega) => annihilator_zero_search(&omega, budget),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MiddleZero {
    pub t: Vec<f64>,
    pub gamma: f64,
    pub iterations: usize,
}

/// For `d = 3`, `m = 2`: a unit `t` where the middle eigenvalue of
/// `t₁G₁ + t₂G₂` vanishes. The middle eigenvalue is odd in `t`, so it changes
/// sign on the half circle from `t₀ = (1, 0)` to `-t₀`, and bisection finds
/// the zero.
pub fn find_zero_middle_eig(a: &OperatorSample) -> Result<MiddleZero> {
    let p = &a.pencil;
    if p.d() != 3 || p.m() != 2 {
        return Err(Error::invalid(format!("need d = 3 and m = 2, got d = {}, m = {}", p.d(), p.m())));
    }
    let at = |theta: f64| -> Result<(Vec<f64>, f64)> {
        let t = vec![theta.cos(), theta.sin()];
        let g = middle_eigenvalue(&p.contract(&t)?)?;
        Ok((t, g))
    };
    let (t0, g0) = at(0.0)?;
    if g0 == 0.0 {
        return Ok(MiddleZero { t: t0, gamma: 0.0, iterations: 0 });
    }
    let (mut lo, mut hi) = (0.0, std::f64::consts::PI);
    let mut best = (t0, g0);
    let mut iterations = 0;
    while iterations < 200 {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (t, g) = at(mid)?;
        if g.abs() < best.1.abs() {
            best = (t, g);
        }
        if g == 0.0 {
            break;
        }
        if (g > 0.0) == (g0 > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(MiddleZero {
        t: best.0,
        gamma: best.1,
        iterations,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    Empty,
    NotDense,
    DenseConull,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Empty => "EMPTY",
            Regime::NotDense => "NOT_DENSE",
            Regime::DenseConull => "DENSE_CONULL",
        }
    }
}

pub fn predicted_u(d: usize, m: usize) -> Regime {
    if m >= binomial(d + 1, 2) {
        Regime::Empty
    } else if m <= binomial(d, 2) {
        Regime::DenseConull
    } else {
        Regime::NotDense
    }
}

pub fn predicted_utilde(d: usize, m: usize) -> Regime {
    if m > binomial(d, 2) || (d, m) == (3, 2) {
        Regime::Empty
    } else if d >= 1 && m <= binomial(d - 1, 2) {
        Regime::DenseConull
    } else {
        Regime::NotDense
    }
}

/// Whether an observed frequency is consistent with a regime. For `U` the
/// not-dense regime is also nonempty, so both outcomes must appear; for `Ũ`
/// only non-density is asserted.
fn agrees(regime: Regime, members: usize, total: usize, nonempty_known: bool) -> bool {
    match regime {
        Regime::Empty => members == 0,
        Regime::DenseConull => total > 0 && members == total,
        Regime::NotDense if nonempty_known => members > 0 && members < total,
        Regime::NotDense => members < total,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseReport {
    pub d: usize,
    pub m: usize,
    pub n: usize,
    #[serde(rename = "freq_U")]
    pub freq_u: f64,
    #[serde(rename = "freq_Utilde")]
    pub freq_utilde: f64,
    pub n_inconclusive: usize,
    #[serde(rename = "predicted_U")]
    pub predicted_u: Regime,
    #[serde(rename = "predicted_Utilde")]
    pub predicted_utilde: Regime,
    pub agree: bool,
    #[serde(rename = "n_in_U")]
    pub n_in_u: usize,
    #[serde(rename = "n_in_Utilde")]
    pub n_in_utilde: usize,
    /// Samples classified for `U` / `Ũ` (inconclusive ones excluded).
    #[serde(rename = "n_decided_U")]
    pub n_decided_u: usize,
    #[serde(rename = "n_decided_Utilde")]
    pub n_decided_utilde: usize,
    #[serde(rename = "n_inconclusive_U")]
    pub n_inconclusive_u: usize,
    #[serde(rename = "n_inconclusive_Utilde")]
    pub n_inconclusive_utilde: usize,
    /// Samples in `Ũ` but not in `U`; always zero when the checks are sound.
    pub implication_violations: usize,
    pub budget: usize,
}

/// Independent per-sample seed derived from the run seed and the cell.
pub fn sample_seed(seed: u64, d: usize, m: usize, i: usize) -> u64 {
    let mut z = seed ^ ((d as u64) << 56) ^ ((m as u64) << 48) ^ i as u64;
    // splitmix64 finalizer
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Classifies `n_samples` Gaussian operators for one `(d, m)` cell.
pub fn phase_cell(d: usize, m: usize, n_samples: usize, budget: Option<usize>, seed: u64) -> Result<PhaseReport> {
    if d == 0 || m == 0 || n_samples == 0 {
        return Err(Error::invalid("d, m and the sample count must be positive"));
    }
    let budget = budget.unwrap_or_else(|| default_budget(m));
    let grid = cell_grid(m, budget);
    let opts = SearchOptions {
        parallel: false,
        ..SearchOptions::default()
    };
    let outcomes: Vec<(Verdict, Verdict)> = (0..n_samples)
        .into_par_iter()
        .map(|i| -> Result<(Verdict, Verdict)> {
            let a = sample_operator(d, m, sample_seed(seed, d, m, i))?;
            let u = membership_with(&a, &grid, &opts, false)?;
            let ut = membership_with(&a, &grid, &opts, true)?;
            Ok((u.verdict, ut.verdict))
        })
        .collect::<Result<_>>()?;
    let count = |f: &dyn Fn(&(Verdict, Verdict)) -> bool| outcomes.iter().filter(|o| f(o)).count();
    let n_in_u = count(&|o| o.0 == Verdict::Pass);
    let n_in_ut = count(&|o| o.1 == Verdict::Pass);
    let inc_u = count(&|o| o.0 == Verdict::Inconclusive);
    let inc_ut = count(&|o| o.1 == Verdict::Inconclusive);
    let inc_any = count(&|o| o.0 == Verdict::Inconclusive || o.1 == Verdict::Inconclusive);
    let violations = count(&|o| o.1 == Verdict::Pass && o.0 == Verdict::Fail);
    let (dec_u, dec_ut) = (n_samples - inc_u, n_samples - inc_ut);
    let freq = |k: usize, n: usize| if n == 0 { f64::NAN } else { k as f64 / n as f64 };
    let (pu, put) = (predicted_u(d, m), predicted_utilde(d, m));
    let agree = agrees(pu, n_in_u, dec_u, true) && agrees(put, n_in_ut, dec_ut, (d, m) == (2, 1));
    Ok(PhaseReport {
        d,
        m,
        n: n_samples,
        freq_u: freq(n_in_u, dec_u),
        freq_utilde: freq(n_in_ut, dec_ut),
        n_inconclusive: inc_any,
        predicted_u: pu,
        predicted_utilde: put,
        agree,
        n_in_u: n_in_u,
        n_in_utilde: n_in_ut,
        n_decided_u: dec_u,
        n_decided_utilde: dec_ut,
        n_inconclusive_u: inc_u,
        n_inconclusive_utilde: inc_ut,
        implication_violations: violations,
        budget,
    })
}

/// Every cell `d ≤ d_max`, `1 ≤ m ≤ C(d+1, 2)`.
pub fn phase_scan(d_max: usize, n_samples: usize, budget: Option<usize>, seed: u64) -> Result<Vec<PhaseReport>> {
    if d_max == 0 || d_max > 4 {
        return Err(Error::invalid("d_max must lie in 1..=4"));
    }
    if n_samples < 100 {
        return Err(Error::invalid("at least 100 samples per cell are required"));
    }
    let mut out = Vec::new();
    for d in 1..=d_max {
        for m in 1..=binomial(d + 1, 2) {
            out.push(phase_cell(d, m, n_samples, budget, seed)?);
        }
    }
    Ok(out)
}

/// Numerical rank of the derivative of `(v, w) ↦ vvᵀ - wwᵀ` at `(v, w)`.
pub fn g_jacobian_rank(v: &[f64], w: &[f64]) -> usize {
    let d = v.len();
    // columns: perturbations of v_k and w_k; rows: packed upper entries
    let mut rows = Vec::with_capacity(d * (d + 1) / 2);
    for i in 0..d {
        for j in i..d {
            let mut row = vec![0.0; 2 * d];
            for k in 0..d {
                let dv = (if i == k { v[j] } else { 0.0 }) + (if j == k { v[i] } else { 0.0 });
                let dw = (if i == k { w[j] } else { 0.0 }) + (if j == k { w[i] } else { 0.0 });
                row[k] = dv;
                row[d + k] = -dw;
            }
            rows.push(row);
        }
    }
    let sv = singular_values(&rows);
    let tol = 1e-10 * sv.first().copied().unwrap_or(0.0).max(1.0);
    sv.iter().filter(|&&s| s > tol).count()
}

/// Largest Jacobian rank of `(v, w) ↦ vvᵀ - wwᵀ` over `(e₁, e₂)` and 20
/// random points.
pub fn dim_s_check(d: usize, seed: u64) -> Result<usize> {
    if d < 2 {
        return Err(Error::invalid("d must be at least 2"));
    }
    let mut e1 = vec![0.0; d];
    let mut e2 = vec![0.0; d];
    e1[0] = 1.0;
    e2[1] = 1.0;
    let mut best = g_jacobian_rank(&e1, &e2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..20 {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let w: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        best = best.max(g_jacobian_rank(&v, &w));
    }
    Ok(best)
}
