//! The sphere search behind the quantified pencil conditions.

use rayon::prelude::*;

use crate::error::Result;
use crate::scalar::Scalar;
use crate::symspace::dense::solve;
use crate::symspace::{EigenWork, SymPencil};

use super::{RankReport, SearchOptions, SphereGrid, Verdict};

const CHUNK: usize = 4096;
const GN_MAX_ITER: usize = 80;
const DESCENT_MAX_EVALS: usize = 4000;

/// Which condition is being minimized over the sphere.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    /// `σ_k`: the k-th largest `|λ|`.
    RankK(usize),
    /// `max(λ₍₂₎, -λ₍d-1₎)` with eigenvalues sorted in decreasing order;
    /// positive exactly when two nonzero eigenvalues share a sign.
    Drv,
}

impl Objective {
    /// Condition value from eigenvalues sorted ascending.
    pub fn margin<T: Scalar>(&self, eig: &[T], scratch: &mut Vec<T>) -> T {
        let d = eig.len();
        match *self {
            Objective::RankK(k) => {
                scratch.clear();
                scratch.extend(eig.iter().map(|x| x.abs()));
                scratch.sort_by(|a, b| b.partial_cmp(a).unwrap());
                scratch[k - 1]
            }
            Objective::Drv => {
                if d < 2 {
                    T::zero()
                } else {
                    eig[d - 2].max(-eig[1])
                }
            }
        }
    }

    /// Indices (into the ascending spectrum) of the eigenvalues that all
    /// vanish where the condition fails. `None` when the failure set is not
    /// cut out that way (planar same-sign condition).
    fn residual_indices<T: Scalar>(&self, eig: &[T], out: &mut Vec<usize>) -> bool {
        let d = eig.len();
        out.clear();
        match *self {
            Objective::RankK(k) => {
                out.extend(0..d);
                out.sort_by(|&a, &b| eig[a].abs().partial_cmp(&eig[b].abs()).unwrap().then(a.cmp(&b)));
                out.truncate(d - k + 1);
                true
            }
            Objective::Drv => {
                if d >= 3 {
                    out.extend(1..d - 1);
                    true
                } else {
                    false
                }
            }
        }
    }

    fn has_residuals(&self, d: usize) -> bool {
        match self {
            Objective::RankK(_) => true,
            Objective::Drv => d >= 3,
        }
    }

    /// Smooth stand-in ranking seeds for refinement.
    fn surrogate<T: Scalar>(&self, eig: &[T], margin: T, idx: &mut Vec<usize>) -> T {
        if self.residual_indices(eig, idx) {
            idx.iter().map(|&i| eig[i] * eig[i]).sum()
        } else {
            margin
        }
    }
}

struct Evaluator<'a, T: Scalar> {
    pencil: &'a SymPencil<T>,
    objective: Objective,
    work: EigenWork<T>,
    packed: Vec<T>,
    scratch: Vec<T>,
    idx: Vec<usize>,
    evals: usize,
}

impl<'a, T: Scalar> Evaluator<'a, T> {
    fn new(pencil: &'a SymPencil<T>, objective: Objective) -> Self {
        let d = pencil.d();
        Self {
            pencil,
            objective,
            work: EigenWork::new(d),
            packed: vec![T::zero(); d * (d + 1) / 2],
            scratch: Vec::with_capacity(d),
            idx: Vec::with_capacity(d),
            evals: 0,
        }
    }

    /// `(margin, surrogate)` at `t`.
    fn eval(&mut self, t: &[T]) -> (T, T) {
        self.evals += 1;
        self.pencil.contract_into(t, &mut self.packed);
        self.work.load_packed(&self.packed);
        let eig = self.work.eigenvalues();
        let margin = self.objective.margin(eig, &mut self.scratch);
        let sur = self.objective.surrogate(eig, margin, &mut self.idx);
        (margin, sur)
    }

    /// Screening version of [`Evaluator::eval`] for the grid pass.
    fn eval_fast(&mut self, t: &[T]) -> (T, T) {
        self.evals += 1;
        self.pencil.contract_into(t, &mut self.packed);
        self.work.load_packed(&self.packed);
        let eig = self.work.eigenvalues_fast();
        let margin = self.objective.margin(eig, &mut self.scratch);
        let sur = self.objective.surrogate(eig, margin, &mut self.idx);
        (margin, sur)
    }

    /// Margin, squared residual norm, residuals and their gradients in `t`.
    ///
    /// The residuals are the entries of `VᵀB(t)V`, where `V` holds the
    /// eigenvectors of the eigenvalues that must vanish together. At `t` this
    /// block is diagonal, so the residual norm is the sum of their squares,
    /// but unlike single eigenvalues the block stays smooth where those
    /// eigenvalues collide.
    fn linearize(&mut self, t: &[T], r: &mut Vec<T>, jac: &mut Vec<Vec<T>>) -> (T, T) {
        self.evals += 1;
        let d = self.pencil.d();
        self.pencil.contract_into(t, &mut self.packed);
        self.work.load_packed(&self.packed);
        let (eig, vecs) = self.work.decompose();
        let margin = self.objective.margin(eig, &mut self.scratch);
        self.objective.residual_indices(eig, &mut self.idx);
        r.clear();
        jac.clear();
        let column = |i: usize| -> Vec<T> { (0..d).map(|row| vecs[row * d + i]).collect() };
        let cols: Vec<Vec<T>> = self.idx.iter().map(|&i| column(i)).collect();
        for (a, &i) in self.idx.iter().enumerate() {
            r.push(eig[i]);
            // dλ/dt_k = vᵀ G_k v
            jac.push(
                self.pencil
                    .generators()
                    .iter()
                    .map(|g| packed_bilinear(g.packed(), d, &cols[a], &cols[a]))
                    .collect(),
            );
        }
        let w = T::of(std::f64::consts::SQRT_2);
        for a in 0..cols.len() {
            for b in (a + 1)..cols.len() {
                r.push(T::zero());
                jac.push(
                    self.pencil
                        .generators()
                        .iter()
                        .map(|g| w * packed_bilinear(g.packed(), d, &cols[a], &cols[b]))
                        .collect(),
                );
            }
        }
        let f = r.iter().map(|&x| x * x).sum();
        (margin, f)
    }
}

/// `uᵀ G v` for `G` in packed upper form.
fn packed_bilinear<T: Scalar>(packed: &[T], d: usize, u: &[T], v: &[T]) -> T {
    let mut acc = T::zero();
    let mut k = 0;
    for i in 0..d {
        acc += packed[k] * u[i] * v[i];
        k += 1;
        for j in (i + 1)..d {
            acc += packed[k] * (u[i] * v[j] + u[j] * v[i]);
            k += 1;
        }
    }
    acc
}

fn normalize<T: Scalar>(t: &mut [T]) {
    let n = t.iter().map(|&x| x * x).sum::<T>().sqrt();
    if n > T::zero() {
        t.iter_mut().for_each(|x| *x /= n);
    }
}

/// Running minimum with deterministic tie-breaking on the seed index.
#[derive(Clone)]
struct Best<T> {
    value: T,
    t: Vec<T>,
}

impl<T: Scalar> Best<T> {
    fn offer(&mut self, value: T, t: &[T]) {
        if value < self.value {
            self.value = value;
            self.t.clear();
            self.t.extend_from_slice(t);
        }
    }
}

struct ChunkResult<T> {
    best_margin: (T, usize),
    /// Lowest surrogates as `(value, seed index)`, ascending.
    starts: Vec<(T, usize)>,
    evals: usize,
}

fn keep_lowest<T: Scalar>(list: &mut Vec<(T, usize)>, item: (T, usize), cap: usize) {
    if cap == 0 {
        return;
    }
    let less = |a: &(T, usize), b: &(T, usize)| a.0 < b.0 || (a.0 == b.0 && a.1 < b.1);
    if list.len() == cap && !less(&item, list.last().unwrap()) {
        return;
    }
    let pos = list.iter().position(|x| less(&item, x)).unwrap_or(list.len());
    list.insert(pos, item);
    list.truncate(cap);
}

fn scan_chunk<T: Scalar>(
    pencil: &SymPencil<T>,
    objective: Objective,
    grid: &SphereGrid<T>,
    range: std::ops::Range<usize>,
    cap: usize,
) -> ChunkResult<T> {
    let mut ev = Evaluator::new(pencil, objective);
    let mut best = (T::infinity(), usize::MAX);
    let mut starts = Vec::with_capacity(cap + 1);
    for i in range {
        let (margin, sur) = ev.eval_fast(grid.point(i));
        if margin < best.0 {
            best = (margin, i);
        }
        keep_lowest(&mut starts, (sur, i), cap);
    }
    ChunkResult {
        best_margin: best,
        starts,
        evals: ev.evals,
    }
}

pub(super) fn run<T: Scalar>(
    pencil: &SymPencil<T>,
    objective: Objective,
    grid: &SphereGrid<T>,
    opts: &SearchOptions,
) -> Result<RankReport<T>> {
    if grid.m() != pencil.m() {
        return Err(crate::error::Error::DimensionMismatch {
            expected: pencil.m(),
            actual: grid.m(),
        });
    }
    let threshold = pencil.scale() * T::of(opts.eps_rel);
    let n = grid.len();
    let cap = opts.refine_starts;
    let chunks: Vec<std::ops::Range<usize>> = (0..n)
        .step_by(CHUNK)
        .map(|s| s..(s + CHUNK).min(n))
        .collect();
    let results: Vec<ChunkResult<T>> = if opts.parallel && chunks.len() > 1 {
        chunks
            .into_par_iter()
            .map(|r| scan_chunk(pencil, objective, grid, r, cap))
            .collect()
    } else {
        chunks
            .into_iter()
            .map(|r| scan_chunk(pencil, objective, grid, r, cap))
            .collect()
    };

    let mut evals = 0;
    let mut best_seed = (T::infinity(), usize::MAX);
    let mut starts: Vec<(T, usize)> = Vec::new();
    for c in results {
        evals += c.evals;
        let b = c.best_margin;
        if b.0 < best_seed.0 || (b.0 == best_seed.0 && b.1 < best_seed.1) {
            best_seed = b;
        }
        for s in c.starts {
            keep_lowest(&mut starts, s, cap);
        }
    }
    // the grid pass screens with closed-form eigenvalues; the reported
    // margin only ever comes from the full solver
    let mut ev = Evaluator::new(pencil, objective);
    let seed_t = grid.point(best_seed.1).to_vec();
    let mut best = Best {
        value: ev.eval(&seed_t).0,
        t: seed_t,
    };

    if pencil.m() > 1 && best.value > T::zero() {
        for &(_, i) in &starts {
            refine(&mut ev, grid.point(i), grid.spacing(), &mut best);
            if best.value <= T::zero() {
                break;
            }
        }
    }
    evals += ev.evals;

    normalize(&mut best.t);
    Ok(RankReport {
        passes: best.value > threshold,
        verdict: Verdict::from_margin(best.value, threshold),
        k: match objective {
            Objective::RankK(k) => k,
            Objective::Drv => 2,
        },
        margin: best.value,
        threshold,
        witness_t: best.t,
        budget_used: evals,
    })
}

fn refine<T: Scalar>(ev: &mut Evaluator<'_, T>, start: &[T], spacing: f64, best: &mut Best<T>) {
    if ev.objective.has_residuals(ev.pencil.d()) {
        gauss_newton(ev, start, best);
    } else {
        coordinate_descent(ev, start, spacing, best);
    }
}

/// Levenberg–Marquardt on the residual eigenvalues, restricted to the
/// tangent space of the sphere.
fn gauss_newton<T: Scalar>(ev: &mut Evaluator<'_, T>, start: &[T], best: &mut Best<T>) {
    let m = start.len();
    let mut t = start.to_vec();
    let mut r = Vec::new();
    let mut jac = Vec::new();
    let (margin, mut f) = ev.linearize(&t, &mut r, &mut jac);
    best.offer(margin, &t);
    let tiny = T::of(1e-30);
    let mut mu = T::of(1e-6);
    let mut trial_r = Vec::new();
    let mut trial_jac = Vec::new();
    for _ in 0..GN_MAX_ITER {
        if f <= tiny {
            break;
        }
        // project each gradient onto the tangent space at t
        let proj: Vec<Vec<T>> = jac
            .iter()
            .map(|row: &Vec<T>| {
                let along: T = row.iter().zip(&t).map(|(&a, &b)| a * b).sum();
                row.iter().zip(&t).map(|(&a, &b)| a - along * b).collect()
            })
            .collect();
        let mut normal = vec![vec![T::zero(); m]; m];
        let mut rhs = vec![T::zero(); m];
        let mut diag_scale = T::zero();
        for (row, &ri) in proj.iter().zip(&r) {
            for a in 0..m {
                rhs[a] -= row[a] * ri;
                for b in 0..m {
                    normal[a][b] += row[a] * row[b];
                }
            }
        }
        for (a, row) in normal.iter().enumerate() {
            diag_scale = diag_scale.max(row[a]);
        }
        let diag_scale = diag_scale.max(tiny);
        let mut accepted = false;
        while mu < T::of(1e12) {
            let mut damped = normal.clone();
            for (a, row) in damped.iter_mut().enumerate() {
                row[a] += mu * diag_scale;
            }
            let Some(mut step) = solve(&damped, &rhs) else {
                mu *= T::of(10.0);
                continue;
            };
            let len = step.iter().map(|&x| x * x).sum::<T>().sqrt();
            if len > T::of(0.5) {
                let s = T::of(0.5) / len;
                step.iter_mut().for_each(|x| *x *= s);
            }
            let mut trial: Vec<T> = t.iter().zip(&step).map(|(&a, &b)| a + b).collect();
            normalize(&mut trial);
            let (trial_margin, trial_f) = ev.linearize(&trial, &mut trial_r, &mut trial_jac);
            best.offer(trial_margin, &trial);
            if trial_f < f {
                let small_step = len < T::of(1e-14);
                t = trial;
                std::mem::swap(&mut r, &mut trial_r);
                std::mem::swap(&mut jac, &mut trial_jac);
                let decrease = f - trial_f;
                f = trial_f;
                mu = (mu / T::of(10.0)).max(T::of(1e-12));
                accepted = !small_step && decrease > T::of(1e-14) * f;
                break;
            }
            mu *= T::of(10.0);
        }
        if !accepted {
            break;
        }
    }
}

/// Derivative-free descent on the margin itself: try `t ± h e_i`, halve `h`
/// when no move helps.
fn coordinate_descent<T: Scalar>(ev: &mut Evaluator<'_, T>, start: &[T], spacing: f64, best: &mut Best<T>) {
    let m = start.len();
    let mut t = start.to_vec();
    let (mut cur, _) = ev.eval(&t);
    best.offer(cur, &t);
    let mut step = T::of(spacing);
    let stop = T::of(1e-10);
    let budget_end = ev.evals + DESCENT_MAX_EVALS;
    let mut trial = vec![T::zero(); m];
    while step > stop && ev.evals < budget_end {
        let mut improved = false;
        for i in 0..m {
            for sign in [T::one(), -T::one()] {
                trial.copy_from_slice(&t);
                trial[i] += sign * step;
                normalize(&mut trial);
                let (v, _) = ev.eval(&trial);
                if v < cur {
                    cur = v;
                    t.copy_from_slice(&trial);
                    best.offer(v, &t);
                    improved = true;
                }
            }
        }
        if !improved {
            step = step * T::of(0.5);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symspace::SymMatrix;

    #[test]
    fn objective_values() {
        let mut s = Vec::new();
        let eig = [-3.0, 0.5, 2.0];
        assert_eq!(Objective::RankK(1).margin(&eig, &mut s), 3.0);
        assert_eq!(Objective::RankK(2).margin(&eig, &mut s), 2.0);
        assert_eq!(Objective::RankK(3).margin(&eig, &mut s), 0.5);
        assert_eq!(Objective::Drv.margin(&eig, &mut s), 0.5);
        assert_eq!(Objective::Drv.margin(&[-1.0, 1.0], &mut s), -1.0);
        assert_eq!(Objective::Drv.margin(&[1.0, 2.0], &mut s), 1.0);
        assert_eq!(Objective::Drv.margin(&[-2.0, -1.0], &mut s), 1.0);
    }

    #[test]
    fn antipodal_margins_agree() {
        let p = SymPencil::new(vec![
            SymMatrix::from_fn(3, |i, j| (i as f64 - 0.7 * j as f64).sin()),
            SymMatrix::from_fn(3, |i, j| (i * j) as f64 * 0.3 - 0.2),
        ])
        .unwrap();
        for obj in [Objective::RankK(2), Objective::Drv] {
            let mut ev = Evaluator::new(&p, obj);
            let t = [0.6, -0.8];
            let (a, _) = ev.eval(&t);
            let (b, _) = ev.eval(&[-0.6, 0.8]);
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn eigenvalue_gradient_matches_finite_difference() {
        let p = SymPencil::new(vec![
            SymMatrix::from_fn(3, |i, j| 1.0 + (i + 2 * j) as f64),
            SymMatrix::from_fn(3, |i, j| ((i + 1) * (j + 2)) as f64 * 0.1),
        ])
        .unwrap();
        let mut ev = Evaluator::new(&p, Objective::Drv);
        let (mut r, mut jac) = (Vec::new(), Vec::new());
        let t = [0.3, 0.9];
        ev.linearize(&t, &mut r, &mut jac);
        let h = 1e-6;
        let (mut r2, mut j2) = (Vec::new(), Vec::new());
        ev.linearize(&[0.3 + h, 0.9], &mut r2, &mut j2);
        let fd = (r2[0] - r[0]) / h;
        assert!((fd - jac[0][0]).abs() < 1e-4, "{fd} {}", jac[0][0]);
    }

    #[test]
    fn lowest_list_is_sorted_and_capped() {
        let mut l = Vec::new();
        for (v, i) in [(3.0, 0), (1.0, 1), (2.0, 2), (1.0, 3), (0.5, 4)] {
            keep_lowest(&mut l, (v, i), 3);
        }
        assert_eq!(l, vec![(0.5, 4), (1.0, 1), (1.0, 3)]);
    }
}
