//! Nondegeneracy conditions on a Hessian pencil `t ↦ Σ t_k G_k`.
//!
//! The pointwise conditions (`det1`, `det2`, surjectivity) are linear
//! algebra. The quantified ones ("for every t ≠ 0, rank ≥ k" and the
//! same-sign eigenvalue condition) are decided by a budgeted search over the
//! unit sphere: a quasi-uniform seed grid, then Gauss–Newton refinement of
//! the eigenvalues that must vanish for the condition to fail. The reported
//! margin is the smallest value of the condition's own objective seen at any
//! evaluated `t`.

mod search;
mod sphere;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::symspace::dense::{determinant, singular_values};
use crate::symspace::{SymPencil, DEFAULT_EPS_REL};

pub use search::Objective;
pub use sphere::SphereGrid;

/// Default number of sphere seeds for a pencil with `m` generators.
pub fn default_budget(m: usize) -> usize {
    match m {
        0..=3 => 20_000,
        4..=6 => 200_000,
        _ => 500_000,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    /// The search passed, but by less than ten times the threshold.
    Inconclusive,
}

impl Verdict {
    pub fn from_margin<T: Scalar>(margin: T, threshold: T) -> Self {
        if margin <= threshold {
            Verdict::Fail
        } else if margin <= T::of(10.0) * threshold {
            Verdict::Inconclusive
        } else {
            Verdict::Pass
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

/// Outcome of a quantified pencil condition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankReport<T> {
    /// `margin > threshold`.
    pub passes: bool,
    pub verdict: Verdict,
    pub k: usize,
    /// Smallest objective value found over the unit sphere.
    pub margin: T,
    pub threshold: T,
    /// Unit vector where `margin` was attained.
    pub witness_t: Vec<T>,
    /// Number of `t` evaluations spent.
    pub budget_used: usize,
}

/// Tuning for the sphere searches.
#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub eps_rel: f64,
    /// Seeds refined after the grid pass.
    pub refine_starts: usize,
    /// Spread the grid pass over the rayon pool.
    pub parallel: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            eps_rel: DEFAULT_EPS_REL,
            refine_starts: 8,
            parallel: true,
        }
    }
}

/// `eps_rel * max(1, largest generator spectral norm)`.
pub fn pencil_threshold<T: Scalar>(pencil: &SymPencil<T>, eps_rel: T) -> T {
    eps_rel * pencil.scale()
}

/// The `m × m` matrix `(f_j''[e_1, e_i])_{i,j}` and whether its determinant
/// is nonzero. Requires `m ≤ d`.
pub fn check_det1<T: Scalar>(pencil: &SymPencil<T>) -> Result<(bool, T)> {
    check_det1_eps(pencil, T::of(DEFAULT_EPS_REL))
}

pub fn check_det1_eps<T: Scalar>(pencil: &SymPencil<T>, eps_rel: T) -> Result<(bool, T)> {
    let (d, m) = (pencil.d(), pencil.m());
    if m > d {
        return Err(Error::invalid(format!("det1 needs m <= d, got m = {m}, d = {d}")));
    }
    let g = pencil.generators();
    let rows: Vec<Vec<T>> = (0..m)
        .map(|i| (0..m).map(|j| g[j].get(0, i)).collect())
        .collect();
    let det = determinant(&rows);
    Ok((det.abs() > eps_rel, det))
}

/// Whether the single generator is nonsingular. Requires `m = 1`.
pub fn check_det2<T: Scalar>(pencil: &SymPencil<T>) -> Result<(bool, T)> {
    check_det2_eps(pencil, T::of(DEFAULT_EPS_REL))
}

pub fn check_det2_eps<T: Scalar>(pencil: &SymPencil<T>, eps_rel: T) -> Result<(bool, T)> {
    if pencil.m() != 1 {
        return Err(Error::invalid(format!("det2 needs m = 1, got m = {}", pencil.m())));
    }
    let det = determinant(&pencil.generators()[0].to_dense());
    Ok((det.abs() > eps_rel, det))
}

/// Whether the generators are linearly independent, i.e. the map
/// `Sym²R^d → R^m` they define is onto. Returns `σ_m` of the flattened
/// generator matrix.
pub fn check_surjective<T: Scalar>(pencil: &SymPencil<T>) -> (bool, T) {
    check_surjective_eps(pencil, T::of(DEFAULT_EPS_REL))
}

pub fn check_surjective_eps<T: Scalar>(pencil: &SymPencil<T>, eps_rel: T) -> (bool, T) {
    let m = pencil.m();
    let dim = pencil.d() * (pencil.d() + 1) / 2;
    if m > dim {
        return (false, T::zero());
    }
    let sv = singular_values(&pencil.flattened());
    let smallest = sv[m - 1];
    (smallest > eps_rel * sv[0].max(T::one()), smallest)
}

/// `min_{|t|=1} σ_k(Σ t_j G_j) > threshold`, searched with `budget` seeds.
pub fn check_rank_k<T: Scalar>(pencil: &SymPencil<T>, k: usize, budget: usize) -> Result<RankReport<T>> {
    if budget == 0 {
        return Err(Error::invalid("budget must be at least 1"));
    }
    let grid = SphereGrid::new(pencil.m(), budget);
    check_rank_k_with(pencil, k, &grid, &SearchOptions::default())
}

pub fn check_rank_k_with<T: Scalar>(
    pencil: &SymPencil<T>,
    k: usize,
    grid: &SphereGrid<T>,
    opts: &SearchOptions,
) -> Result<RankReport<T>> {
    if k == 0 || k > pencil.d() {
        return Err(Error::invalid(format!(
            "rank k = {k} must lie in 1..={}",
            pencil.d()
        )));
    }
    search::run(pencil, Objective::RankK(k), grid, opts)
}

/// Same-sign eigenvalue condition: for every unit `t`, at least two nonzero
/// eigenvalues of `Σ t_j G_j` share a sign.
pub fn check_drv<T: Scalar>(pencil: &SymPencil<T>, budget: usize) -> Result<RankReport<T>> {
    if budget == 0 {
        return Err(Error::invalid("budget must be at least 1"));
    }
    let grid = SphereGrid::new(pencil.m(), budget);
    check_drv_with(pencil, &grid, &SearchOptions::default())
}

pub fn check_drv_with<T: Scalar>(
    pencil: &SymPencil<T>,
    grid: &SphereGrid<T>,
    opts: &SearchOptions,
) -> Result<RankReport<T>> {
    search::run(pencil, Objective::Drv, grid, opts)
}
