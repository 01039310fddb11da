//! Integer form of the counting inequalities.
//!
//! With `x_i = (a_i + λ_i)/q = N_i/(qL)` (`L` the common denominator of `λ`)
//! each component becomes `f_j(x) = I_j(N) / P_j` for an integer polynomial
//! `I_j` and a positive integer `P_j`. The condition
//! `|q f_j(x) - b_j - γ_j| < κ` then reads
//!
//! ```text
//! α I_j(N) + β_lo  <  b δ  <  α I_j(N) + β_hi
//! ```
//!
//! with integer constants, so the admissible `b_j` form an integer interval
//! computed by floor/ceil division.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::manifold::{ManifoldSpec, Poly};

use super::CountQuery;

/// Integer arithmetic with overflow reporting. `BigInt` never overflows.
pub trait ExactInt: Clone + Sized {
    fn from_big(x: &BigInt) -> Option<Self>;
    fn from_i64(x: i64) -> Self;
    fn add(&self, o: &Self) -> Option<Self>;
    fn mul(&self, o: &Self) -> Option<Self>;
    /// `floor(self / d)` for `d > 0`.
    fn div_floor(&self, d: &Self) -> Self;
    fn neg(&self) -> Option<Self>;
    fn to_big(&self) -> BigInt;
}

impl ExactInt for i128 {
    fn from_big(x: &BigInt) -> Option<Self> {
        x.to_i128()
    }
    fn from_i64(x: i64) -> Self {
        x as i128
    }
    fn add(&self, o: &Self) -> Option<Self> {
        self.checked_add(*o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        self.checked_mul(*o)
    }
    fn div_floor(&self, d: &Self) -> Self {
        self.div_euclid(*d)
    }
    fn neg(&self) -> Option<Self> {
        self.checked_neg()
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl ExactInt for BigInt {
    fn from_big(x: &BigInt) -> Option<Self> {
        Some(x.clone())
    }
    fn from_i64(x: i64) -> Self {
        BigInt::from(x)
    }
    fn add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn div_floor(&self, d: &Self) -> Self {
        Integer::div_floor(self, d)
    }
    fn neg(&self) -> Option<Self> {
        Some(-self)
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
}

/// Constants for one component in a given integer type.
#[derive(Clone, Debug)]
pub struct Component<I> {
    terms: Vec<(I, Vec<u32>)>,
    alpha: I,
    beta_lo: I,
    beta_hi: I,
    delta: I,
}

impl<I: ExactInt> Component<I> {
    fn convert(big: &Component<BigInt>) -> Option<Self> {
        Some(Self {
            terms: big
                .terms
                .iter()
                .map(|(c, e)| I::from_big(c).map(|c| (c, e.clone())))
                .collect::<Option<_>>()?,
            alpha: I::from_big(&big.alpha)?,
            beta_lo: I::from_big(&big.beta_lo)?,
            beta_hi: I::from_big(&big.beta_hi)?,
            delta: I::from_big(&big.delta)?,
        })
    }

    fn poly(&self, n: &[I]) -> Option<I> {
        let mut acc = I::from_i64(0);
        for (c, e) in &self.terms {
            let mut t = c.clone();
            for (ni, &k) in n.iter().zip(e) {
                for _ in 0..k {
                    t = t.mul(ni)?;
                }
            }
            acc = acc.add(&t)?;
        }
        Some(acc)
    }

    /// Inclusive range of admissible `b`; empty when `lo > hi`.
    pub fn window(&self, n: &[I]) -> Option<(I, I)> {
        let v = self.alpha.mul(&self.poly(n)?)?;
        let lo = v.add(&self.beta_lo)?.div_floor(&self.delta).add(&I::from_i64(1))?;
        // ceil(x/δ) - 1 = -floor(-x/δ) - 1
        let hi = v
            .add(&self.beta_hi)?
            .neg()?
            .div_floor(&self.delta)
            .neg()?
            .add(&I::from_i64(-1))?;
        Some((lo, hi))
    }
}

/// A query compiled to integer constants.
#[derive(Clone, Debug)]
pub struct Prepared {
    /// Inclusive range of each `a_i`.
    pub a_ranges: Vec<(i64, i64)>,
    /// `L` and `λ_i L`.
    scale: BigInt,
    lambda_scaled: Vec<BigInt>,
    big: Vec<Component<BigInt>>,
    small: Option<(i128, Vec<i128>, Vec<Component<i128>>)>,
}

fn lcm_of_denominators<'a>(it: impl Iterator<Item = &'a BigRational>) -> BigInt {
    it.fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

fn ceil_int(r: &BigRational) -> i64 {
    r.ceil().to_integer().to_i64().expect("lattice range fits in i64")
}

fn floor_int(r: &BigRational) -> i64 {
    r.floor().to_integer().to_i64().expect("lattice range fits in i64")
}

fn compile_component(p: &Poly, ql: &BigInt, q: &BigInt, gamma: &BigRational, kappa: &BigRational) -> Component<BigInt> {
    let deg = p.degree();
    let c = lcm_of_denominators(p.terms().map(|(_, c)| c));
    let terms = p
        .terms()
        .map(|(e, coef)| {
            let lift = num_traits::pow(ql.clone(), (deg - e.iter().sum::<u32>()) as usize);
            let int = (coef * BigRational::from_integer(&c * lift)).to_integer();
            (int, e.to_vec())
        })
        .collect();
    let p_scale = &c * num_traits::pow(ql.clone(), deg as usize);
    let (gn, gd) = (gamma.numer().clone(), gamma.denom().clone());
    let (kn, kd) = (kappa.numer().clone(), kappa.denom().clone());
    let w = &p_scale * &gd;
    let shift = &kd * &gn * &p_scale;
    let spread = &kn * &w;
    Component {
        terms,
        alpha: &kd * q * &gd,
        beta_lo: -&shift - &spread,
        beta_hi: -&shift + &spread,
        delta: &w * &kd,
    }
}

impl Prepared {
    pub fn new(spec: &ManifoldSpec, query: &CountQuery) -> Self {
        let d = spec.d();
        let q = BigInt::from(query.q);
        let qr = BigRational::from_integer(q.clone());
        let lambda = &query.theta.lambda;
        let scale = lcm_of_denominators(lambda.iter());
        let lambda_scaled: Vec<BigInt> = lambda
            .iter()
            .map(|l| (l * BigRational::from_integer(scale.clone())).to_integer())
            .collect();
        let a_ranges = (0..d)
            .map(|i| {
                let lo = &qr * &spec.rect.lo()[i] - &lambda[i];
                let hi = &qr * &spec.rect.hi()[i] - &lambda[i];
                (ceil_int(&lo), floor_int(&hi))
            })
            .collect();
        let ql = &q * &scale;
        let big: Vec<Component<BigInt>> = spec
            .map
            .components()
            .iter()
            .zip(&query.theta.gamma)
            .map(|(p, g)| compile_component(p, &ql, &q, g, &query.kappa))
            .collect();
        let small = (|| {
            let s = scale.to_i128()?;
            let ls = lambda_scaled.iter().map(|x| x.to_i128()).collect::<Option<Vec<_>>>()?;
            let comps = big.iter().map(Component::<i128>::convert).collect::<Option<Vec<_>>>()?;
            Some((s, ls, comps))
        })();
        Self {
            a_ranges,
            scale,
            lambda_scaled,
            big,
            small,
        }
    }

    pub fn m(&self) -> usize {
        self.big.len()
    }

    /// Admissible `b` interval per component at lattice point `a`.
    pub fn windows(&self, a: &[i64], n_small: &mut Vec<i128>) -> Vec<(BigInt, BigInt)> {
        if let Some(w) = self.windows_small(a, n_small) {
            return w.into_iter().map(|(l, h)| (BigInt::from(l), BigInt::from(h))).collect();
        }
        self.windows_big(a)
    }

    /// Number of admissible `b` vectors at `a`.
    pub fn count_at(&self, a: &[i64], n_small: &mut Vec<i128>) -> u128 {
        if let Some((s, ls, comps)) = &self.small {
            if self.fill_small(a, *s, ls, n_small) {
                let mut total: u128 = 1;
                let mut ok = true;
                for c in comps {
                    match c.window(n_small) {
                        Some((lo, hi)) => {
                            if hi < lo {
                                return 0;
                            }
                            total *= (hi - lo + 1) as u128;
                        }
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    return total;
                }
            }
        }
        let mut total: u128 = 1;
        for (lo, hi) in self.windows_big(a) {
            if hi < lo {
                return 0;
            }
            total *= (hi - lo + 1u32).to_u128().expect("window size fits in u128");
        }
        total
    }

    fn fill_small(&self, a: &[i64], s: i128, ls: &[i128], n: &mut Vec<i128>) -> bool {
        n.clear();
        for (&ai, &li) in a.iter().zip(ls) {
            match (ai as i128).checked_mul(s).and_then(|x| x.checked_add(li)) {
                Some(v) => n.push(v),
                None => return false,
            }
        }
        true
    }

    fn windows_small(&self, a: &[i64], n: &mut Vec<i128>) -> Option<Vec<(i128, i128)>> {
        let (s, ls, comps) = self.small.as_ref()?;
        if !self.fill_small(a, *s, ls, n) {
            return None;
        }
        comps.iter().map(|c| c.window(n)).collect()
    }

    fn windows_big(&self, a: &[i64]) -> Vec<(BigInt, BigInt)> {
        let n: Vec<BigInt> = a
            .iter()
            .zip(&self.lambda_scaled)
            .map(|(&ai, li)| BigInt::from(ai) * &self.scale + li)
            .collect();
        self.big
            .iter()
            .map(|c| c.window(&n).expect("BigInt arithmetic cannot overflow"))
            .collect()
    }
}
