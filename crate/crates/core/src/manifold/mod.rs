//! Graph manifolds `{(α, f(α)) : α ∈ K}` for polynomial `f`.

mod lipschitz;
mod parser;
pub mod poly;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::{binomial, PolyScalar};
use crate::symspace::{SymMatrix, SymPencil};

pub use lipschitz::lipschitz_c1;
pub use poly::{FastPoly, Poly};

/// Closed axis-aligned box with rational corners.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rectangle {
    lo: Vec<BigRational>,
    hi: Vec<BigRational>,
}

impl Rectangle {
    pub fn new(lo: Vec<BigRational>, hi: Vec<BigRational>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                actual: hi.len(),
            });
        }
        if lo.is_empty() {
            return Err(Error::invalid("rectangle must have dimension at least 1"));
        }
        if let Some(i) = (0..lo.len()).find(|&i| lo[i] >= hi[i]) {
            return Err(Error::invalid(format!("empty side {i}: lo >= hi")));
        }
        Ok(Self { lo, hi })
    }

    /// `[0, 1]^d`.
    pub fn unit(d: usize) -> Self {
        Self {
            lo: vec![BigRational::zero(); d],
            hi: vec![BigRational::one(); d],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[BigRational] {
        &self.lo
    }

    pub fn hi(&self) -> &[BigRational] {
        &self.hi
    }

    pub fn lo_f64(&self) -> Vec<f64> {
        self.lo.iter().map(|x| x.to_f64().unwrap()).collect()
    }

    pub fn hi_f64(&self) -> Vec<f64> {
        self.hi.iter().map(|x| x.to_f64().unwrap()).collect()
    }

    pub fn volume(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| (h - l).to_f64().unwrap())
            .product()
    }

    pub fn contains<T: PolyScalar>(&self, x: &[T]) -> bool {
        x.len() == self.dim()
            && x.iter().enumerate().all(|(i, xi)| {
                *xi >= T::from_rational(&self.lo[i]) && *xi <= T::from_rational(&self.hi[i])
            })
    }

    pub fn contains_rect(&self, other: &Rectangle) -> bool {
        self.dim() == other.dim()
            && (0..self.dim()).all(|i| self.lo[i] <= other.lo[i] && other.hi[i] <= self.hi[i])
    }

    /// Each side grown by `frac` times its width at both ends.
    pub fn inflate(&self, frac: &BigRational) -> Self {
        let (lo, hi) = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| {
                let pad = (h - l) * frac;
                (l - &pad, h + &pad)
            })
            .unzip();
        Self { lo, hi }
    }

    /// The enlarged rectangle used when counting near the boundary:
    /// 10% of each width added on both sides.
    pub fn enlarged(&self) -> Self {
        self.inflate(&BigRational::new(1.into(), 10.into()))
    }
}

/// `f = (f_1, …, f_m)` with precomputed first and second derivatives.
#[derive(Clone, Debug)]
pub struct PolyMap {
    d: usize,
    components: Vec<Poly>,
    /// `jacobian[j][i] = ∂f_j/∂a_i`.
    jacobian: Vec<Vec<Poly>>,
    /// `hessian[j]` packed upper triangle of `∂²f_j/∂a_i∂a_k`.
    hessian: Vec<Vec<Poly>>,
    fast_jacobian: Vec<Vec<FastPoly>>,
}

impl PolyMap {
    pub fn new(d: usize, components: Vec<Poly>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("a map needs at least one component"));
        }
        for p in &components {
            if p.nvars() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: p.nvars(),
                });
            }
        }
        let jacobian: Vec<Vec<Poly>> = components
            .iter()
            .map(|p| (0..d).map(|i| p.derivative(i)).collect())
            .collect();
        let hessian = jacobian
            .iter()
            .map(|row| {
                let mut packed = Vec::with_capacity(d * (d + 1) / 2);
                for i in 0..d {
                    for k in i..d {
                        packed.push(row[i].derivative(k));
                    }
                }
                packed
            })
            .collect();
        let fast_jacobian = jacobian
            .iter()
            .map(|row| row.iter().map(FastPoly::new).collect())
            .collect();
        Ok(Self {
            d,
            components,
            jacobian,
            hessian,
            fast_jacobian,
        })
    }

    /// Parses `m` semicolon-separated polynomials in `a1..a{d}`.
    pub fn parse(source: &str, d: usize, m: usize) -> Result<Self> {
        Self::new(d, parser::parse_components(source, d, m)?)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    pub fn jacobian_polys(&self) -> &[Vec<Poly>] {
        &self.jacobian
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Poly::is_zero)
    }

    pub fn value<T: PolyScalar>(&self, x: &[T]) -> Vec<T> {
        self.components.iter().map(|p| p.eval(x)).collect()
    }

    /// `m × d` Jacobian.
    pub fn jacobian<T: PolyScalar>(&self, x: &[T]) -> Vec<Vec<T>> {
        self.jacobian
            .iter()
            .map(|row| row.iter().map(|p| p.eval(x)).collect())
            .collect()
    }

    /// Jacobian in `f64`, written row-major into `out` (`m * d` entries).
    pub fn jacobian_f64_into(&self, x: &[f64], out: &mut [f64]) {
        let d = self.d;
        for (j, row) in self.fast_jacobian.iter().enumerate() {
            for (i, p) in row.iter().enumerate() {
                out[j * d + i] = p.eval(x);
            }
        }
    }

    pub(crate) fn fast_jacobian(&self) -> &[Vec<FastPoly>] {
        &self.fast_jacobian
    }

    /// The Hessian pencil `(f_j''(x))_j`.
    pub fn hessian<T: PolyScalar>(&self, x: &[T]) -> SymPencil<T> {
        let gens = self
            .hessian
            .iter()
            .map(|packed| {
                SymMatrix::from_packed(self.d, packed.iter().map(|p| p.eval(x)).collect())
                    .expect("packed length matches")
            })
            .collect();
        SymPencil::new(gens).expect("m >= 1, shared dimension")
    }

    /// Canonical text form, components joined by `; `.
    pub fn to_source(&self) -> String {
        self.components
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// A named pair `(K, f)`.
#[derive(Clone, Debug)]
pub struct ManifoldSpec {
    pub name: String,
    pub rect: Rectangle,
    pub map: PolyMap,
}

impl ManifoldSpec {
    pub fn new(name: impl Into<String>, rect: Rectangle, map: PolyMap) -> Result<Self> {
        if rect.dim() != map.d() {
            return Err(Error::DimensionMismatch {
                expected: map.d(),
                actual: rect.dim(),
            });
        }
        Ok(Self {
            name: name.into(),
            rect,
            map,
        })
    }

    /// Parses a map and places it on `[0, 1]^d`.
    pub fn from_source(name: impl Into<String>, source: &str, d: usize, m: usize) -> Result<Self> {
        Self::new(name, Rectangle::unit(d), PolyMap::parse(source, d, m)?)
    }

    pub fn d(&self) -> usize {
        self.map.d()
    }

    pub fn m(&self) -> usize {
        self.map.m()
    }

    /// Same map on a different rectangle.
    pub fn with_rect(&self, rect: Rectangle) -> Result<Self> {
        Self::new(self.name.clone(), rect, self.map.clone())
    }
}

/// Value, Jacobian and Hessian pencil of `f` at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation<T> {
    pub value: Vec<T>,
    pub jacobian: Vec<Vec<T>>,
    pub hessian: SymPencil<T>,
    /// Set when the point lies outside the declared rectangle. The values are
    /// still valid: polynomials extend to all of `R^d`.
    pub outside_rect: bool,
}

pub fn eval_all<T: PolyScalar>(spec: &ManifoldSpec, alpha: &[T]) -> Result<Evaluation<T>> {
    if alpha.len() != spec.d() {
        return Err(Error::DimensionMismatch {
            expected: spec.d(),
            actual: alpha.len(),
        });
    }
    Ok(Evaluation {
        value: spec.map.value(alpha),
        jacobian: spec.map.jacobian(alpha),
        hessian: spec.map.hessian(alpha),
        outside_rect: !spec.rect.contains(alpha),
    })
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: &[&str] = &["veronese5", "tracefree2", "tracefree(d)", "parabola"];

/// Source text for the trace-free family in dimension `d`:
/// `a_i^2 - a_{i+1}^2` for `i < d`, then `a_i*a_j` for `i < j`.
pub fn tracefree_source(d: usize) -> String {
    let mut parts = Vec::new();
    for i in 1..d {
        parts.push(format!("a{}^2 - a{}^2", i, i + 1));
    }
    for i in 1..=d {
        for j in (i + 1)..=d {
            parts.push(format!("a{i}*a{j}"));
        }
    }
    parts.join("; ")
}

pub fn builtin(name: &str) -> Result<ManifoldSpec> {
    let name = name.trim();
    match name {
        "veronese5" => ManifoldSpec::from_source(name, "a1^2; a1*a2; a2^2", 5, 3),
        "parabola" => ManifoldSpec::from_source(name, "a1^2", 1, 1),
        "tracefree2" => tracefree(2, name),
        _ => {
            let d = name
                .strip_prefix("tracefree(")
                .and_then(|rest| rest.strip_suffix(')'))
                .and_then(|inner| inner.trim().parse::<usize>().ok())
                .filter(|d| (2..=6).contains(d))
                .ok_or_else(|| Error::UnknownManifold(name.to_string()))?;
            tracefree(d, name)
        }
    }
}

fn tracefree(d: usize, name: &str) -> Result<ManifoldSpec> {
    ManifoldSpec::from_source(name, &tracefree_source(d), d, binomial(d + 1, 2) - 1)
}

/// The zero map `R^d → R^m` on `[0, 1]^d`.
pub fn zero_map(d: usize, m: usize) -> ManifoldSpec {
    let map = PolyMap::new(d, vec![Poly::zero(d); m]).expect("m >= 1");
    ManifoldSpec::new("zero", Rectangle::unit(d), map).expect("dimensions agree")
}
