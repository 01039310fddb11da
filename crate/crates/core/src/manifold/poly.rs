//! Multivariate polynomials with exact rational coefficients.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::scalar::PolyScalar;

/// A polynomial in `nvars` variables `a1..a{nvars}`, stored as a map from
/// exponent vectors to nonzero coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// The variable `a{index+1}`.
    pub fn var(nvars: usize, index: usize) -> Self {
        assert!(index < nvars);
        let mut e = vec![0; nvars];
        e[index] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, BigRational::one());
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, BigRational)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars);
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, exps: Vec<u32>, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&exps) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&exps);
                }
            }
            None => {
                self.terms.insert(exps, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &BigRational)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Highest power of each variable.
    pub fn max_exponents(&self) -> Vec<u32> {
        let mut out = vec![0; self.nvars];
        for e in self.terms.keys() {
            for (o, &x) in out.iter_mut().zip(e) {
                *o = (*o).max(x);
            }
        }
        out
    }

    /// The constant value, if the polynomial has no variable terms.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                e.iter().all(|&x| x == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &BigRational) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * s);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, mut n: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::constant(self.nvars, BigRational::one());
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Partial derivative with respect to variable `var` (0-based).
    pub fn derivative(&self, var: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[var] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[var] -= 1;
            out.add_term(e2, c * BigRational::from_integer(e[var].into()));
        }
        out
    }

    /// Evaluates at `x` in any ring that rationals embed into.
    pub fn eval<T: PolyScalar>(&self, x: &[T]) -> T {
        assert_eq!(x.len(), self.nvars);
        let mut acc = T::zero();
        for (e, c) in &self.terms {
            let mut term = T::from_rational(c);
            for (xi, &k) in x.iter().zip(e) {
                for _ in 0..k {
                    term = term * xi.clone();
                }
            }
            acc = acc + term;
        }
        acc
    }

    /// Graded reverse order used by the canonical printer: higher total
    /// degree first, then lexicographically larger exponents first.
    fn print_order(a: &[u32], b: &[u32]) -> Ordering {
        let da: u32 = a.iter().sum();
        let db: u32 = b.iter().sum();
        db.cmp(&da).then_with(|| b.cmp(a))
    }
}

fn write_coefficient(f: &mut fmt::Formatter<'_>, c: &BigRational) -> fmt::Result {
    if c.is_integer() {
        write!(f, "{}", c.numer())
    } else {
        write!(f, "{}/{}", c.numer(), c.denom())
    }
}

/// Canonical form: sorted monomials, every coefficient explicit,
/// e.g. `1*a1^2 - 1*a2^2`.
impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut keys: Vec<&Vec<u32>> = self.terms.keys().collect();
        keys.sort_by(|a, b| Poly::print_order(a, b));
        for (n, e) in keys.into_iter().enumerate() {
            let c = &self.terms[e];
            let mag = c.abs();
            if n == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            write_coefficient(f, &mag)?;
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*a{}", i + 1)?,
                    _ => write!(f, "*a{}^{}", i + 1, k)?,
                }
            }
        }
        Ok(())
    }
}

/// Polynomial with `f64` coefficients and a per-variable power table, for
/// hot loops where exactness is not required.
#[derive(Clone, Debug)]
pub struct FastPoly {
    terms: Vec<(f64, Vec<u32>)>,
    max_exp: Vec<u32>,
}

impl FastPoly {
    pub fn new(p: &Poly) -> Self {
        Self {
            terms: p
                .terms()
                .map(|(e, c)| (c.to_f64().unwrap_or(f64::NAN), e.to_vec()))
                .collect(),
            max_exp: p.max_exponents(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (c, e) in &self.terms {
            let mut t = *c;
            for (&xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    t *= xi.powi(k as i32);
                }
            }
            acc += t;
        }
        acc
    }

    /// Interval enclosure over the box `[lo, hi]`.
    pub fn eval_interval(&self, lo: &[f64], hi: &[f64]) -> (f64, f64) {
        let (mut a, mut b) = (0.0, 0.0);
        for (c, e) in &self.terms {
            let (mut tl, mut th) = (*c, *c);
            for i in 0..e.len() {
                if e[i] == 0 {
                    continue;
                }
                let (pl, ph) = pow_interval(lo[i], hi[i], e[i]);
                let cands = [tl * pl, tl * ph, th * pl, th * ph];
                tl = cands.iter().copied().fold(f64::INFINITY, f64::min);
                th = cands.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            }
            a += tl;
            b += th;
        }
        // outward padding for accumulated rounding
        let pad = 1e-12 * (1.0 + a.abs().max(b.abs()));
        (a - pad, b + pad)
    }

    pub fn max_exponents(&self) -> &[u32] {
        &self.max_exp
    }
}

fn pow_interval(lo: f64, hi: f64, k: u32) -> (f64, f64) {
    let (pl, ph) = (lo.powi(k as i32), hi.powi(k as i32));
    if k % 2 == 1 {
        (pl, ph)
    } else if lo <= 0.0 && hi >= 0.0 {
        (0.0, pl.max(ph))
    } else {
        (pl.min(ph), pl.max(ph))
    }
}
