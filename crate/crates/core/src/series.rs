//! Power-law gauges and approximation functions, exact convergence
//! classification of
//!
//! ```text
//! Σ_q q^n g(q^{-1} (q^{-1} log² q)^{k/(2m+k)}),   g(ρ) = ρ^s,
//! ```
//!
//! and numerical partial-sum probes for the related series.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{binomial, log_floor1};

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `g(ρ) = ρ^s · Log(1/ρ)^b` with `Log = max(1, ln)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DimensionFunction {
    pub s: BigRational,
    pub log_power: i32,
}

impl DimensionFunction {
    pub fn power(s: BigRational) -> Result<Self> {
        if !s.is_positive() {
            return Err(Error::invalid("gauge exponent s must be positive"));
        }
        Ok(Self { s, log_power: 0 })
    }

    pub fn with_log(s: BigRational, log_power: i32) -> Result<Self> {
        let mut g = Self::power(s)?;
        g.log_power = log_power;
        Ok(g)
    }

    pub fn is_pure_power(&self) -> bool {
        self.log_power == 0
    }

    /// `ln g(ρ)` for `ρ > 0`.
    pub fn ln_eval(&self, rho: f64) -> f64 {
        let mut v = to_f64(&self.s) * rho.ln();
        if self.log_power != 0 {
            v += self.log_power as f64 * log_floor1(1.0 / rho).ln();
        }
        v
    }

    pub fn eval(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            0.0
        } else {
            self.ln_eval(rho).exp()
        }
    }

    /// `ḡ(ρ) = g(ρ) / ρ^m`.
    pub fn quotient(&self, rho: f64, m: usize) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        (self.ln_eval(rho) - m as f64 * rho.ln()).exp()
    }
}

/// `ψ(q) = c · q^{-τ}`; `c = 0` gives the zero function.
#[derive(Clone, Debug, PartialEq)]
pub struct ApproxFunction {
    pub c: BigRational,
    pub tau: BigRational,
}

impl ApproxFunction {
    pub fn new(c: BigRational, tau: BigRational) -> Result<Self> {
        if c.is_negative() {
            return Err(Error::invalid("approximation constant c must be nonnegative"));
        }
        if !tau.is_positive() {
            return Err(Error::invalid("approximation exponent tau must be positive"));
        }
        Ok(Self { c, tau })
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_zero()
    }

    pub fn eval(&self, q: u64) -> f64 {
        to_f64(&self.c) * (q as f64).powf(-to_f64(&self.tau))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Convergence {
    Converges,
    Diverges,
}

impl fmt::Display for Convergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convergence::Converges => "CONVERGES",
            Convergence::Diverges => "DIVERGES",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GSeriesClass {
    pub verdict: Convergence,
    /// `s (1 + k/(2m+k)) = n + 1` exactly.
    pub critical: bool,
    /// `s (1 + k/(2m+k))` as `"p/q"`.
    pub lhs: String,
    pub rhs: u64,
    pub explanation: String,
}

fn rational_string(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Exact test of `s (1 + k/(2m+k)) > n + 1`. At equality the terms behave
/// like `q^{-1} (log² q)^{sk/(2m+k)}`, whose sum diverges.
pub fn classify_gseries(s: &BigRational, n: u64, m: u64, k: u64) -> Result<GSeriesClass> {
    if !s.is_positive() || n == 0 || m == 0 || k == 0 {
        return Err(Error::invalid("s, n, m, k must all be positive"));
    }
    let ratio = BigRational::new(BigInt::from(k), BigInt::from(2 * m + k));
    let lhs = s * (BigRational::one() + &ratio);
    let rhs = BigRational::from_integer(BigInt::from(n + 1));
    let critical = lhs == rhs;
    let verdict = if lhs > rhs {
        Convergence::Converges
    } else {
        Convergence::Diverges
    };
    let explanation = if critical {
        format!(
            "CRITICAL: s(1 + k/(2m+k)) = n + 1 exactly; terms are q^-1 (log^2 q)^({}), a divergent tail",
            rational_string(&(s * &ratio))
        )
    } else {
        format!(
            "terms decay like q^(-{}) up to log factors",
            rational_string(&(&lhs - BigRational::from_integer(BigInt::from(n))))
        )
    };
    Ok(GSeriesClass {
        verdict,
        critical,
        lhs: rational_string(&lhs),
        rhs: n + 1,
        explanation,
    })
}

/// Which version of the main rate theorem covers `(d, m, k, s)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Applicability {
    pub d: u64,
    pub m: u64,
    pub k: u64,
    pub n: u64,
    pub s: String,
    /// `k = 1` and `m < d - 1`.
    pub case1: bool,
    /// `k = 2` and `m < C(d+1, 2)`.
    pub case2: bool,
    pub gseries: GSeriesClass,
    /// `m ≤ C(d, 2)`: the rank-2 condition holds for almost every operator.
    pub rank2_typical: bool,
    pub summary: String,
}

pub fn applicability(d: u64, m: u64, k: u64, s: &BigRational) -> Result<Applicability> {
    if d == 0 || m == 0 || k == 0 {
        return Err(Error::invalid("d, m, k must be positive"));
    }
    let n = d + m;
    let case1 = k == 1 && m + 1 < d;
    let case2 = k == 2 && (m as usize) < binomial(d as usize + 1, 2);
    let gseries = classify_gseries(s, n, m, k)?;
    let rank2_typical = (m as usize) <= binomial(d as usize, 2);
    let case_text = match (case1, case2) {
        (true, _) => "Case 1 applies".to_string(),
        (_, true) => "Case 2 applies".to_string(),
        _ => "no case applies".to_string(),
    };
    let mut summary = format!("{case_text}; {}", gseries.verdict);
    if gseries.critical {
        summary.push_str(" (CRITICAL)");
    }
    if k >= 2 {
        summary.push_str(if rank2_typical {
            "; rank-2 condition typical (m <= C(d,2))"
        } else {
            "; rank-2 condition not typical (m > C(d,2))"
        });
    }
    Ok(Applicability {
        d,
        m,
        k,
        n,
        s: rational_string(s),
        case1,
        case2,
        gseries,
        rank2_typical,
        summary,
    })
}

/// A series that can be summed numerically.
#[derive(Clone, Debug)]
pub enum SeriesSpec {
    /// `Σ ψ(q)^n`.
    Khinchin { psi: ApproxFunction, n: u64 },
    /// `Σ q^n g(ψ(q)/q)`.
    Jarnik {
        psi: ApproxFunction,
        g: DimensionFunction,
        n: u64,
    },
    /// `Σ q^n g(q^{-1} (q^{-1} log² q)^{k/(2m+k)})`.
    GSeries {
        g: DimensionFunction,
        n: u64,
        m: u64,
        k: u64,
    },
}

impl SeriesSpec {
    pub fn term(&self, q: u64) -> f64 {
        let qf = q as f64;
        match self {
            SeriesSpec::Khinchin { psi, n } => psi.eval(q).powi(*n as i32),
            SeriesSpec::Jarnik { psi, g, n } => {
                let p = psi.eval(q);
                if p <= 0.0 {
                    0.0
                } else {
                    (*n as f64 * qf.ln() + g.ln_eval(p / qf)).exp()
                }
            }
            SeriesSpec::GSeries { g, n, m, k } => {
                let l = qf.ln();
                if l <= 0.0 {
                    return 0.0;
                }
                let e = *k as f64 / (2 * m + k) as f64;
                // ln of q^{-1} (q^{-1} log² q)^e
                let ln_rho = -l + e * (2.0 * l.ln() - l);
                (*n as f64 * l + g.ln_eval(ln_rho.exp())).exp()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport {
    pub q: u64,
    pub sum_quarter: f64,
    pub sum_half: f64,
    pub sum_full: f64,
    /// `(S(Q) - S(Q/2)) / (S(Q/2) - S(Q/4))`.
    pub tail_ratio: f64,
    pub verdict: Convergence,
    pub label: &'static str,
}

/// Partial sums at `Q/4`, `Q/2`, `Q` and a tail-ratio guess: the last
/// dyadic block shrinking relative to the one before suggests convergence.
pub fn partial_sum_probe(spec: &SeriesSpec, q: u64) -> Result<ProbeReport> {
    if q < 100 {
        return Err(Error::invalid("probe needs Q >= 100"));
    }
    let (q4, q2) = (q / 4, q / 2);
    let mut acc = 0.0;
    let (mut s4, mut s2) = (0.0, 0.0);
    // Kahan summation keeps the tail increments meaningful at large Q
    let mut comp = 0.0;
    for n in 1..=q {
        let y = spec.term(n) - comp;
        let t = acc + y;
        comp = (t - acc) - y;
        acc = t;
        if n == q4 {
            s4 = acc;
        }
        if n == q2 {
            s2 = acc;
        }
    }
    let (upper, lower) = (acc - s2, s2 - s4);
    let tail_ratio = if lower > 0.0 { upper / lower } else if upper > 0.0 { f64::INFINITY } else { 0.0 };
    Ok(ProbeReport {
        q,
        sum_quarter: s4,
        sum_half: s2,
        sum_full: acc,
        tail_ratio,
        verdict: if tail_ratio < 1.0 {
            Convergence::Converges
        } else {
            Convergence::Diverges
        },
        label: "NON-RIGOROUS",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int_rational;

    fn r(n: i64, d: i64) -> BigRational {
        int_rational(n) / int_rational(d)
    }

    #[test]
    fn closed_form_for_s_equal_n() {
        for d in 1..=6u64 {
            for m in 1..=6u64 {
                for k in 1..=2u64 {
                    let n = d + m;
                    let c = classify_gseries(&int_rational(n as i64), n, m, k).unwrap();
                    let expected = 2 * m < k * (n - 1);
                    assert_eq!(c.verdict == Convergence::Converges, expected, "{d} {m} {k}");
                }
            }
        }
    }

    #[test]
    fn critical_case_diverges() {
        // n = 3, m = 1, k = 1: s * 4/3 = 4 at s = 3
        let c = classify_gseries(&int_rational(3), 3, 1, 1).unwrap();
        assert_eq!(c.verdict, Convergence::Diverges);
        assert!(c.critical);
        assert!(c.explanation.starts_with("CRITICAL"));
    }

    #[test]
    fn large_s_converges() {
        let c = classify_gseries(&int_rational(7), 5, 2, 2).unwrap();
        assert_eq!(c.verdict, Convergence::Converges);
    }

    #[test]
    fn applicability_examples() {
        let a = applicability(4, 1, 1, &int_rational(5)).unwrap();
        assert!(a.case1);
        assert_eq!(a.gseries.verdict, Convergence::Converges);
        assert_eq!(a.gseries.lhs, "20/3");
        assert!(a.summary.starts_with("Case 1 applies; CONVERGES"));

        let a = applicability(1, 1, 1, &int_rational(2)).unwrap();
        assert!(!a.case1 && !a.case2);
        let a = applicability(1, 1, 2, &int_rational(2)).unwrap();
        assert!(!a.case1 && !a.case2);
        assert!(a.summary.starts_with("no case applies"));

        let a = applicability(2, 2, 2, &int_rational(4)).unwrap();
        assert!(a.case2);
        assert_eq!(a.gseries.verdict, Convergence::Converges);
    }

    #[test]
    fn basel_probe() {
        let psi = ApproxFunction::new(int_rational(1), int_rational(2)).unwrap();
        let p = partial_sum_probe(&SeriesSpec::Khinchin { psi, n: 1 }, 10_000).unwrap();
        let target = std::f64::consts::PI.powi(2) / 6.0;
        assert!((p.sum_full - target).abs() < 1e-4);
        assert_eq!(p.verdict, Convergence::Converges);
        assert_eq!(p.label, "NON-RIGOROUS");
    }

    #[test]
    fn probe_flags_critical_divergence() {
        let g = DimensionFunction::power(int_rational(3)).unwrap();
        let spec = SeriesSpec::GSeries { g, n: 3, m: 1, k: 1 };
        let p = partial_sum_probe(&spec, 100_000).unwrap();
        assert_eq!(p.verdict, Convergence::Diverges);
    }

    #[test]
    fn zero_psi_and_gauges() {
        let psi = ApproxFunction::new(int_rational(0), int_rational(1)).unwrap();
        assert!(psi.is_zero());
        assert_eq!(psi.eval(10), 0.0);
        let g = DimensionFunction::power(r(3, 2)).unwrap();
        assert!((g.eval(0.25) - 0.125).abs() < 1e-15);
        assert!((g.quotient(0.25, 1) - 0.5).abs() < 1e-15);
        assert!(DimensionFunction::power(int_rational(0)).is_err());
        assert!(ApproxFunction::new(int_rational(-1), int_rational(1)).is_err());
    }
}
