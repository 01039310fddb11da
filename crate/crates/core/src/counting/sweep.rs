use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::{lipschitz_c1, ManifoldSpec, Rectangle};
use crate::nondegen::{check_rank_k, default_budget, Verdict};
use crate::series::{ApproxFunction, DimensionFunction};

use super::{count_r, exact_kappa, phi, CountQuery, Theta};

/// How `κ` is chosen for a given `q`.
#[derive(Clone, Debug, PartialEq)]
pub enum KappaRule {
    Fixed(BigRational),
    /// `c · φ(q)`.
    ScaledPhi(BigRational),
}

impl KappaRule {
    pub fn phi() -> Self {
        KappaRule::ScaledPhi(BigRational::one())
    }

    /// Parses `1/4`, `0.1`, `phi`, `phi/4` or `phi*3/2`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::invalid(format!("cannot parse kappa `{s}`"));
        if let Some(rest) = s.strip_prefix("phi") {
            let factor = if rest.is_empty() {
                BigRational::one()
            } else if let Some(den) = rest.strip_prefix('/') {
                let den = crate::scalar::parse_rational(den).ok_or_else(bad)?;
                if den <= BigRational::from_integer(0.into()) {
                    return Err(bad());
                }
                den.recip()
            } else if let Some(f) = rest.strip_prefix('*') {
                crate::scalar::parse_rational(f).ok_or_else(bad)?
            } else {
                return Err(bad());
            };
            if factor <= BigRational::from_integer(0.into()) {
                return Err(bad());
            }
            return Ok(KappaRule::ScaledPhi(factor));
        }
        let v = crate::scalar::parse_rational(s).ok_or_else(bad)?;
        if v <= BigRational::from_integer(0.into()) {
            return Err(bad());
        }
        Ok(KappaRule::Fixed(v))
    }

    pub fn label(&self) -> String {
        match self {
            KappaRule::Fixed(v) => v.to_string(),
            KappaRule::ScaledPhi(c) if c.is_one() => "phi".to_string(),
            KappaRule::ScaledPhi(c) if c.numer().is_one() => format!("phi/{}", c.denom()),
            KappaRule::ScaledPhi(c) => format!("phi*{c}"),
        }
    }

    /// The exact `κ` used for `q`, and whether it had to be rounded to a
    /// dyadic rational.
    pub fn resolve(&self, q: u64, m: usize, k: usize) -> Result<(BigRational, bool)> {
        match self {
            KappaRule::Fixed(v) => Ok((v.clone(), false)),
            KappaRule::ScaledPhi(c) => {
                let v = c.to_f64().unwrap_or(f64::NAN) * phi(q as f64, m, k);
                Ok((exact_kappa(v)?, true))
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub q: u64,
    #[serde(serialize_with = "ser_rational")]
    pub kappa: BigRational,
    pub kappa_label: String,
    pub theta_id: usize,
    pub count: u64,
    pub envelope: f64,
    pub ratio: f64,
}

fn ser_rational<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub warnings: Vec<String>,
}

impl SweepTable {
    /// Largest ratio among rows with `lo ≤ q < hi`.
    pub fn block_max(&self, lo: u64, hi: u64) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.q >= lo && r.q < hi)
            .map(|r| r.ratio)
            .fold(None, |acc, x| Some(acc.map_or(x, |a: f64| a.max(x))))
    }

    /// `(q, max ratio)` in increasing `q`.
    pub fn max_ratio_by_q(&self) -> Vec<(u64, f64)> {
        let mut qs: Vec<u64> = self.rows.iter().map(|r| r.q).collect();
        qs.sort_unstable();
        qs.dedup();
        qs.into_iter()
            .map(|q| (q, self.block_max(q, q + 1).unwrap_or(f64::NAN)))
            .collect()
    }
}

/// `q^d · max(κ, φ(q))^m`.
pub fn envelope(q: u64, d: usize, m: usize, k: usize, kappa: f64) -> f64 {
    (q as f64).powi(d as i32) * kappa.max(phi(q as f64, m, k)).powi(m as i32)
}

/// A few points spread through the box (center first).
fn sample_points(rect: &Rectangle) -> Vec<Vec<f64>> {
    let (lo, hi) = (rect.lo_f64(), rect.hi_f64());
    let d = lo.len();
    let mut out = vec![(0..d).map(|i| 0.5 * (lo[i] + hi[i])).collect::<Vec<_>>()];
    for j in 0..4 {
        out.push(
            (0..d)
                .map(|i| {
                    let frac = ((2 * j + 1 + 3 * i) % 8) as f64 / 8.0 + 1.0 / 16.0;
                    lo[i] + (hi[i] - lo[i]) * frac
                })
                .collect(),
        );
    }
    out
}

/// Counts `A(q, κ, θ)` over the grid `qs × thetas × kappas` and compares each
/// with the envelope `q^d max(κ, φ(q))^m`.
pub fn bound_sweep(
    spec: &ManifoldSpec,
    k: usize,
    qs: &[u64],
    kappas: &[KappaRule],
    thetas: &[Theta],
) -> Result<SweepTable> {
    let (d, m) = (spec.d(), spec.m());
    if k == 0 || k > d {
        return Err(Error::invalid(format!("rank parameter k = {k} must lie in 1..={d}")));
    }
    let mut table = SweepTable::default();
    for alpha in sample_points(&spec.rect) {
        let report = check_rank_k(&spec.map.hessian::<f64>(&alpha), k, default_budget(m))?;
        if report.verdict != Verdict::Pass {
            table.warnings.push(format!(
                "rank-{k} condition not confirmed at alpha = {alpha:?}: {} (margin {:e}); the envelope need not hold",
                report.verdict.as_str(),
                report.margin
            ));
            break;
        }
    }
    let mut rounded = false;
    for &q in qs {
        for (theta_id, theta) in thetas.iter().enumerate() {
            for rule in kappas {
                let (kappa, approx) = rule.resolve(q, m, k)?;
                rounded |= approx;
                let kf = kappa.to_f64().unwrap_or(f64::NAN);
                let count = count_r(spec, &CountQuery::new(q, kappa.clone(), theta.clone())?)?;
                let env = envelope(q, d, m, k, kf);
                table.rows.push(SweepRow {
                    q,
                    kappa,
                    kappa_label: rule.label(),
                    theta_id,
                    count,
                    envelope: env,
                    ratio: count as f64 / env,
                });
            }
        }
    }
    if rounded {
        table
            .warnings
            .push("kappa values derived from phi(q) were rounded to the nearest double and counted exactly at that value".into());
    }
    Ok(table)
}

#[derive(Clone, Debug, Serialize)]
pub struct HcSum {
    pub total: f64,
    /// The last (up to) ten `(q, term)` pairs.
    pub last_increments: Vec<(u64, f64)>,
    pub c1: f64,
}

/// `Σ_{q ≤ Q} A_L(q, C₁ψ(q), θ) · ḡ(ψ(q)/q)` with counts over the enlarged
/// rectangle `L` and `C₁` the Lipschitz constant of `f` on `L`.
pub fn hc_partial_sum(
    spec: &ManifoldSpec,
    psi: &ApproxFunction,
    g: &DimensionFunction,
    theta: &Theta,
    q_max: u64,
) -> Result<HcSum> {
    if q_max == 0 {
        return Err(Error::invalid("Q must be at least 1"));
    }
    let l = spec.rect.enlarged();
    let c1 = lipschitz_c1(spec, &l);
    let spec_l = spec.with_rect(l)?;
    let m = spec.m();
    let mut total = 0.0;
    let mut comp = 0.0;
    let mut last = Vec::new();
    for q in 1..=q_max {
        let p = psi.eval(q);
        let term = if psi.is_zero() || p <= 0.0 {
            0.0
        } else {
            let kappa = exact_kappa(c1 * p)?;
            let count = count_r(&spec_l, &CountQuery::new(q, kappa, theta.clone())?)?;
            count as f64 * g.quotient(p / q as f64, m)
        };
        // Kahan summation
        let y = term - comp;
        let t = total + y;
        comp = (t - total) - y;
        total = t;
        if q + 10 > q_max {
            last.push((q, term));
        }
    }
    Ok(HcSum {
        total,
        last_increments: last,
        c1,
    })
}
