//! Brute-force reference for the counting problem: walk every `a` near the
//! box, evaluate `q f((a+λ)/q) - γ` in exact rationals term by term, and try
//! every integer `b` within `κ + 1` of it.

#![allow(dead_code)]

use khintype::counting::Theta;
use khintype::manifold::{ManifoldSpec, PolyMap};
use khintype::Rectangle;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Point = (Vec<i64>, Vec<BigInt>);

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn eval_naive(spec: &ManifoldSpec, j: usize, x: &[BigRational]) -> BigRational {
    let mut acc = BigRational::zero();
    for (exps, coef) in spec.map.components()[j].terms() {
        let mut t = coef.clone();
        for (xi, &e) in x.iter().zip(exps) {
            for _ in 0..e {
                t *= xi;
            }
        }
        acc += t;
    }
    acc
}

/// Every `(a, b)` with `(a+λ)/q ∈ K` and `|q f_j((a+λ)/q) - b_j - γ_j| < κ`,
/// sorted.
pub fn naive_points(spec: &ManifoldSpec, q: u64, kappa: &BigRational, theta: &Theta) -> Vec<Point> {
    let d = spec.d();
    let qr = BigRational::from_integer(q.into());
    let ranges: Vec<(i64, i64)> = (0..d)
        .map(|i| {
            let lo = (&qr * &spec.rect.lo()[i] - &theta.lambda[i]).floor().to_integer();
            let hi = (&qr * &spec.rect.hi()[i] - &theta.lambda[i]).ceil().to_integer();
            (i64::try_from(lo).unwrap() - 2, i64::try_from(hi).unwrap() + 2)
        })
        .collect();
    let mut out = Vec::new();
    let mut a: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    'outer: loop {
        let x: Vec<BigRational> = a
            .iter()
            .zip(&theta.lambda)
            .map(|(&ai, l)| (BigRational::from_integer(ai.into()) + l) / &qr)
            .collect();
        let inside = (0..d).all(|i| spec.rect.lo()[i] <= x[i] && x[i] <= spec.rect.hi()[i]);
        if inside {
            let mut choices: Vec<Vec<BigInt>> = Vec::new();
            for (j, g) in theta.gamma.iter().enumerate() {
                let y = &qr * eval_naive(spec, j, &x) - g;
                let mut bs = Vec::new();
                let mut b: BigInt = (&y - kappa).floor().to_integer() - 1;
                let top = (&y + kappa).ceil().to_integer() + 1;
                while b <= top {
                    if (&y - BigRational::from_integer(b.clone())).abs() < *kappa {
                        bs.push(b.clone());
                    }
                    b += 1;
                }
                choices.push(bs);
            }
            let mut partial: Vec<Vec<BigInt>> = vec![Vec::new()];
            for bs in &choices {
                partial = partial
                    .into_iter()
                    .flat_map(|p| {
                        bs.iter().map(move |b| {
                            let mut p = p.clone();
                            p.push(b.clone());
                            p
                        })
                    })
                    .collect();
            }
            for b in partial {
                out.push((a.clone(), b));
            }
        }
        let mut i = d;
        loop {
            if i == 0 {
                break 'outer;
            }
            i -= 1;
            if a[i] < ranges[i].1 {
                a[i] += 1;
                break;
            }
            a[i] = ranges[i].0;
        }
    }
    out.sort();
    out
}

/// A random counting problem.
pub struct Case {
    pub spec: ManifoldSpec,
    pub q: u64,
    pub kappa: BigRational,
    pub theta: Theta,
}

fn small_rational(rng: &mut ChaCha8Rng, num: i64, den: i64) -> BigRational {
    ratio(rng.random_range(-num..=num), rng.random_range(1..=den))
}

/// Polynomials of degree at most 3 with small rational coefficients on a
/// random sub-box of `[-1, 2]^d`, with random `q ≤ q_max`, `κ` and `θ`.
pub fn random_case(seed: u64, d: usize, m: usize, q_max: u64) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut comps = Vec::new();
    for _ in 0..m {
        let mut terms = Vec::new();
        for _ in 0..rng.random_range(1..=4) {
            let c = small_rational(&mut rng, 5, 4);
            let mut mono = c.to_string();
            let mut left = 3u32;
            for v in 1..=d {
                let e = rng.random_range(0..=left);
                left -= e;
                if e > 0 {
                    mono.push_str(&format!("*a{v}^{e}"));
                }
            }
            terms.push(format!("({mono})"));
        }
        comps.push(terms.join(" + "));
    }
    let source = comps.join("; ");
    let map = PolyMap::parse(&source, d, m).unwrap_or_else(|e| panic!("{source}: {e}"));
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for _ in 0..d {
        let a = ratio(rng.random_range(-4..=2), 4);
        let b = &a + ratio(rng.random_range(1..=6), 4);
        lo.push(a);
        hi.push(b);
    }
    let spec = ManifoldSpec::new("random", Rectangle::new(lo, hi).unwrap(), map).unwrap();
    let q = rng.random_range(1..=q_max);
    let kappa = ratio(rng.random_range(1..=12), rng.random_range(1..=16));
    let mut shift = |_| {
        if rng.random_bool(0.3) {
            BigRational::zero()
        } else {
            ratio(rng.random_range(-6..=6), rng.random_range(1..=7))
        }
    };
    let lambda = (0..d).map(&mut shift).collect();
    let gamma = (0..m).map(&mut shift).collect();
    Case {
        spec,
        q,
        kappa,
        theta: Theta { lambda, gamma },
    }
}
