//! Symmetric matrices and linear pencils of them.
//!
//! [`SymMatrix`] stores only the upper triangle, so symmetry is structural.
//! Storage is generic over any ring-like element (exact Hessians use
//! rationals); the spectral operations need a floating-point [`Scalar`].
//!
//! Every verdict about rank or inertia is made against the threshold
//! `eps_rel * max(1, ‖M‖₂)`. Eigenvalues whose magnitude does not strictly
//! exceed it count as zero.

pub mod dense;
pub mod eigen;

use std::ops::{Add, Mul};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use eigen::{Eigen, EigenWork};

/// Default relative tolerance for rank and signature decisions.
pub const DEFAULT_EPS_REL: f64 = 1e-8;

#[inline]
fn packed_len(dim: usize) -> usize {
    dim * (dim + 1) / 2
}

#[inline]
fn packed_index(dim: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * (2 * dim - i + 1) / 2 + (j - i)
}

/// A `dim × dim` symmetric matrix stored as its packed upper triangle
/// (row-major: `(0,0) (0,1) … (0,d-1) (1,1) …`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix<T> {
    dim: usize,
    upper: Vec<T>,
}

impl<T: Clone + Zero> SymMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "symmetric matrix dimension must be at least 1");
        Self {
            dim,
            upper: vec![T::zero(); packed_len(dim)],
        }
    }

    /// Builds from `f(i, j)` evaluated for `i <= j` only.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(dim >= 1, "symmetric matrix dimension must be at least 1");
        let mut upper = Vec::with_capacity(packed_len(dim));
        for i in 0..dim {
            for j in i..dim {
                upper.push(f(i, j));
            }
        }
        Self { dim, upper }
    }

    /// Builds from packed upper-triangle storage.
    pub fn from_packed(dim: usize, upper: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("symmetric matrix dimension must be at least 1"));
        }
        if upper.len() != packed_len(dim) {
            return Err(Error::DimensionMismatch {
                expected: packed_len(dim),
                actual: upper.len(),
            });
        }
        Ok(Self { dim, upper })
    }

    pub fn diagonal(diag: &[T]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { diag[i].clone() } else { T::zero() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn packed(&self) -> &[T] {
        &self.upper
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.upper[self.index(i, j)].clone()
    }

    pub fn set(&mut self, i: usize, j: usize, value: T) {
        let k = self.index(i, j);
        self.upper[k] = value;
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        assert!(i < self.dim && j < self.dim, "index ({i},{j}) out of range");
        packed_index(self.dim, i, j)
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn map<U: Clone + Zero>(&self, f: impl Fn(&T) -> U) -> SymMatrix<U> {
        SymMatrix {
            dim: self.dim,
            upper: self.upper.iter().map(f).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.upper.iter().all(Zero::is_zero)
    }
}

impl<T: Clone + Zero + PartialEq> SymMatrix<T> {
    /// Builds from full rows, rejecting any asymmetry (compared exactly).
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::invalid("symmetric matrix dimension must be at least 1"));
        }
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: row.len(),
                });
            }
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::invalid(format!("matrix not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(Self::from_fn(dim, |i, j| rows[i][j].clone()))
    }
}

impl<T: Clone + Zero + One> SymMatrix<T> {
    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { T::one() } else { T::zero() })
    }

    /// Matrix with a single stored entry `(i, j) = (j, i) = 1`.
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim);
        m.set(i, j, T::one());
        m
    }
}

impl<T> SymMatrix<T>
where
    T: Clone + Zero + Add<Output = T> + Mul<Output = T>,
{
    pub fn scaled(&self, c: &T) -> Self {
        SymMatrix {
            dim: self.dim,
            upper: self.upper.iter().map(|x| c.clone() * x.clone()).collect(),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: other.dim,
            });
        }
        Ok(SymMatrix {
            dim: self.dim,
            upper: self
                .upper
                .iter()
                .zip(&other.upper)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        })
    }

    /// Quadratic form `vᵀ M v`.
    pub fn quadratic_form(&self, v: &[T]) -> T {
        let mut acc = T::zero();
        for i in 0..self.dim {
            for j in i..self.dim {
                let term = self.get(i, j) * v[i].clone() * v[j].clone();
                acc = if i == j { acc + term } else { acc + term.clone() + term };
            }
        }
        acc
    }
}

impl<T: Scalar> SymMatrix<T> {
    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<T> {
        eigen::eigenvalues(self)
    }

    pub fn eigh(&self) -> Eigen<T> {
        eigen::eigh(self)
    }

    pub fn spectral_norm(&self) -> T {
        spectral_norm_of(&self.eigenvalues())
    }

    pub fn frobenius_norm(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.dim {
            for j in i..self.dim {
                let x = self.get(i, j);
                acc += if i == j { x * x } else { T::of(2.0) * x * x };
            }
        }
        acc.sqrt()
    }
}

fn spectral_norm_of<T: Scalar>(ascending: &[T]) -> T {
    match (ascending.first(), ascending.last()) {
        (Some(&lo), Some(&hi)) => lo.abs().max(hi.abs()),
        _ => T::zero(),
    }
}

/// Inertia of a symmetric matrix at a given tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub n_pos: usize,
    pub n_neg: usize,
    pub n_zero: usize,
}

impl Signature {
    pub fn dim(&self) -> usize {
        self.n_pos + self.n_neg + self.n_zero
    }

    pub fn rank(&self) -> usize {
        self.n_pos + self.n_neg
    }
}

/// How the spectrum splits around the zero band, with margins on both sides.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralSplit<T> {
    pub rank: usize,
    pub signature: Signature,
    pub threshold: T,
    /// Smallest |λ| counted as nonzero (`None` when the rank is 0).
    pub smallest_retained: Option<T>,
    /// Largest |λ| counted as zero (`None` at full rank).
    pub largest_discarded: Option<T>,
}

/// Classifies the spectrum of `m` against `eps_rel * max(1, ‖m‖₂)`.
pub fn spectral_split<T: Scalar>(m: &SymMatrix<T>, eps_rel: T) -> SpectralSplit<T> {
    split_from_eigenvalues(&m.eigenvalues(), eps_rel)
}

pub(crate) fn split_from_eigenvalues<T: Scalar>(ascending: &[T], eps_rel: T) -> SpectralSplit<T> {
    let norm = spectral_norm_of(ascending);
    let threshold = eps_rel * norm.max(T::one());
    let mut sig = Signature {
        n_pos: 0,
        n_neg: 0,
        n_zero: 0,
    };
    let mut smallest_retained: Option<T> = None;
    let mut largest_discarded: Option<T> = None;
    for &lam in ascending {
        let a = lam.abs();
        if a > threshold {
            if lam > T::zero() {
                sig.n_pos += 1;
            } else {
                sig.n_neg += 1;
            }
            smallest_retained = Some(smallest_retained.map_or(a, |s| s.min(a)));
        } else {
            sig.n_zero += 1;
            largest_discarded = Some(largest_discarded.map_or(a, |s| s.max(a)));
        }
    }
    SpectralSplit {
        rank: sig.rank(),
        signature: sig,
        threshold,
        smallest_retained,
        largest_discarded,
    }
}

/// Number of eigenvalues with `|λ| > eps_rel * max(1, ‖M‖₂)`.
pub fn rank_eps<T: Scalar>(m: &SymMatrix<T>, eps_rel: T) -> usize {
    spectral_split(m, eps_rel).rank
}

pub fn signature<T: Scalar>(m: &SymMatrix<T>, eps_rel: T) -> Signature {
    spectral_split(m, eps_rel).signature
}

/// The middle eigenvalue of a 3 × 3 symmetric matrix.
pub fn middle_eigenvalue<T: Scalar>(m: &SymMatrix<T>) -> Result<T> {
    if m.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            actual: m.dim(),
        });
    }
    Ok(m.eigenvalues()[1])
}

/// Submatrix keeping rows `rows` and columns `cols` (0-based).
pub fn minor<T: Clone + Zero>(m: &SymMatrix<T>, rows: &[usize], cols: &[usize]) -> Result<Vec<Vec<T>>> {
    if rows.len() != cols.len() {
        return Err(Error::UnequalIndexSets {
            rows: rows.len(),
            cols: cols.len(),
        });
    }
    if rows.len() > m.dim() {
        return Err(Error::invalid(format!(
            "minor of size {} exceeds dimension {}",
            rows.len(),
            m.dim()
        )));
    }
    for set in [rows, cols] {
        for (pos, &idx) in set.iter().enumerate() {
            if idx >= m.dim() {
                return Err(Error::IndexOutOfRange {
                    index: idx,
                    dim: m.dim(),
                });
            }
            if set[..pos].contains(&idx) {
                return Err(Error::invalid(format!("repeated index {idx}")));
            }
        }
    }
    Ok(rows
        .iter()
        .map(|&i| cols.iter().map(|&j| m.get(i, j)).collect())
        .collect())
}

/// A linear family `t ↦ Σ t_k G_k` of symmetric `d × d` matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymPencil<T> {
    dim: usize,
    generators: Vec<SymMatrix<T>>,
}

impl<T: Clone + Zero> SymPencil<T> {
    pub fn new(generators: Vec<SymMatrix<T>>) -> Result<Self> {
        let first = generators
            .first()
            .ok_or_else(|| Error::invalid("a pencil needs at least one generator"))?;
        let dim = first.dim();
        for g in &generators {
            if g.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: g.dim(),
                });
            }
        }
        Ok(Self { dim, generators })
    }

    pub fn zero(dim: usize, m: usize) -> Self {
        assert!(m >= 1);
        Self {
            dim,
            generators: vec![SymMatrix::zeros(dim); m],
        }
    }

    /// Matrix dimension `d`.
    pub fn d(&self) -> usize {
        self.dim
    }

    /// Number of generators `m`.
    pub fn m(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[SymMatrix<T>] {
        &self.generators
    }

    pub fn map<U: Clone + Zero>(&self, f: impl Fn(&T) -> U) -> SymPencil<U> {
        SymPencil {
            dim: self.dim,
            generators: self.generators.iter().map(|g| g.map(&f)).collect(),
        }
    }
}

impl<T> SymPencil<T>
where
    T: Clone + Zero + Add<Output = T> + Mul<Output = T>,
{
    /// `Σ_k t_k G_k`.
    pub fn contract(&self, t: &[T]) -> Result<SymMatrix<T>> {
        if t.len() != self.m() {
            return Err(Error::DimensionMismatch {
                expected: self.m(),
                actual: t.len(),
            });
        }
        let mut upper = vec![T::zero(); packed_len(self.dim)];
        for (tk, g) in t.iter().zip(&self.generators) {
            if tk.is_zero() {
                continue;
            }
            for (acc, x) in upper.iter_mut().zip(g.packed()) {
                *acc = acc.clone() + tk.clone() * x.clone();
            }
        }
        Ok(SymMatrix {
            dim: self.dim,
            upper,
        })
    }
}

/// Free-function form of [`SymPencil::contract`].
pub fn contract<T>(pencil: &SymPencil<T>, t: &[T]) -> Result<SymMatrix<T>>
where
    T: Clone + Zero + Add<Output = T> + Mul<Output = T>,
{
    pencil.contract(t)
}

impl<T: Scalar> SymPencil<T> {
    /// Writes the packed contraction into `out` without allocating.
    #[inline]
    pub fn contract_into(&self, t: &[T], out: &mut [T]) {
        debug_assert_eq!(t.len(), self.m());
        out.iter_mut().for_each(|x| *x = T::zero());
        for (&tk, g) in t.iter().zip(&self.generators) {
            for (acc, &x) in out.iter_mut().zip(g.packed()) {
                *acc += tk * x;
            }
        }
    }

    /// Largest generator spectral norm, floored at 1. Scale for thresholds.
    pub fn scale(&self) -> T {
        self.generators
            .iter()
            .map(|g| g.spectral_norm())
            .fold(T::one(), |a, b| a.max(b))
    }

    /// Each generator as a vector in `R^{d(d+1)/2}`, off-diagonal entries
    /// scaled by √2 so the Euclidean product matches the Frobenius product.
    pub fn flattened(&self) -> Vec<Vec<T>> {
        let root2 = T::of(2.0).sqrt();
        self.generators
            .iter()
            .map(|g| {
                let mut row = Vec::with_capacity(packed_len(self.dim));
                for i in 0..self.dim {
                    for j in i..self.dim {
                        let x = g.get(i, j);
                        row.push(if i == j { x } else { x * root2 });
                    }
                }
                row
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e_sym(d: usize, i: usize, j: usize) -> SymMatrix<f64> {
        // E_ij + E_ji, or 2 E_ii on the diagonal
        let mut m = SymMatrix::zeros(d);
        m.set(i, j, if i == j { 2.0 } else { 1.0 });
        m
    }

    fn veronese5() -> SymPencil<f64> {
        SymPencil::new(vec![e_sym(5, 0, 0), e_sym(5, 0, 1), e_sym(5, 1, 1)]).unwrap()
    }

    #[test]
    fn packed_layout() {
        let m = SymMatrix::from_fn(3, |i, j| (10 * i + j) as f64);
        assert_eq!(m.packed(), &[0.0, 1.0, 2.0, 11.0, 12.0, 22.0]);
        assert_eq!(m.get(2, 1), 12.0);
        assert_eq!(m.get(1, 2), 12.0);
    }

    #[test]
    fn contraction_examples() {
        let p = veronese5();
        let c = p.contract(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(c, e_sym(5, 0, 0));
        assert!(p.contract(&[0.0, 0.0, 0.0]).unwrap().is_zero());

        let id = SymPencil::new(vec![SymMatrix::<f64>::identity(4)]).unwrap();
        assert_eq!(id.contract(&[2.5]).unwrap(), SymMatrix::diagonal(&[2.5; 4]));

        assert!(matches!(
            p.contract(&[1.0, 0.0]),
            Err(Error::DimensionMismatch { expected: 3, actual: 2 })
        ));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank_eps(&SymMatrix::<f64>::zeros(4), 1e-8), 0);
        assert_eq!(rank_eps(&SymMatrix::diagonal(&[1.0, -1.0]), 1e-8), 2);
        let c = veronese5().contract(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(rank_eps(&c, 1e-8), 1);
    }

    #[test]
    fn tie_at_threshold_counts_as_zero() {
        // norm 1 => threshold exactly eps_rel
        let m = SymMatrix::diagonal(&[1.0, 0.25]);
        assert_eq!(rank_eps(&m, 0.25), 1);
        let split = spectral_split(&m, 0.25);
        assert_eq!(split.largest_discarded, Some(0.25));
        assert_eq!(split.smallest_retained, Some(1.0));
    }

    #[test]
    fn signature_examples() {
        let s = signature(&SymMatrix::<f64>::identity(3), 1e-8);
        assert_eq!((s.n_pos, s.n_neg, s.n_zero), (3, 0, 0));
        let s = signature(&SymMatrix::diagonal(&[1.0, -1.0, 0.0]), 1e-8);
        assert_eq!((s.n_pos, s.n_neg, s.n_zero), (1, 1, 1));
        // [[2 t1, t2], [t2, -2 t1]] at t = (1, 0)
        let p = SymPencil::new(vec![
            SymMatrix::diagonal(&[2.0, -2.0]),
            SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap(),
        ])
        .unwrap();
        let s = signature(&p.contract(&[1.0, 0.0]).unwrap(), 1e-8);
        assert_eq!((s.n_pos, s.n_neg, s.n_zero), (1, 1, 0));
    }

    #[test]
    fn middle_eigenvalue_examples() {
        assert_eq!(middle_eigenvalue(&SymMatrix::<f64>::identity(3)).unwrap(), 1.0);
        assert_eq!(middle_eigenvalue(&SymMatrix::diagonal(&[2.0, 0.0, -1.0])).unwrap(), 0.0);
        assert!(middle_eigenvalue(&SymMatrix::<f64>::identity(2)).is_err());
    }

    #[test]
    fn minor_examples() {
        let m = SymMatrix::diagonal(&[1.0, 2.0, 3.0]);
        assert_eq!(minor(&m, &[0, 1, 2], &[0, 1, 2]).unwrap(), m.to_dense());
        assert_eq!(minor(&m, &[1], &[1]).unwrap(), vec![vec![2.0]]);
        let off = e_sym(2, 0, 1);
        assert_eq!(minor(&off, &[0], &[1]).unwrap(), vec![vec![1.0]]);
        assert!(matches!(minor(&m, &[0, 1], &[0]), Err(Error::UnequalIndexSets { .. })));
        assert!(matches!(minor(&m, &[3], &[0]), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn rows_must_be_symmetric() {
        assert!(SymMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 1.0]]).is_err());
    }

    #[test]
    fn frobenius_matches_flattening() {
        let m = SymMatrix::from_fn(3, |i, j| (i + 2 * j) as f64 - 1.5);
        let p = SymPencil::new(vec![m.clone()]).unwrap();
        let flat: f64 = p.flattened()[0].iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((flat - m.frobenius_norm()).abs() < 1e-14);
    }
}
