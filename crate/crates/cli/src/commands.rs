use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Result};
use khintype::counting::{bound_sweep, CountQuery};
use khintype::expsum::{compare_sweep, MajorantParams};
use khintype::nondegen::{
    check_det1, check_det2, check_drv, check_rank_k, check_surjective, default_budget, RankReport, Verdict,
};
use khintype::series::{applicability, partial_sum_probe, DimensionFunction, SeriesSpec};
use khintype::typicality::{phase_cell, phase_scan, PhaseReport};
use khintype::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::*;
use crate::output::{csv_bytes, json_bytes, Stamp};

/// What a subcommand produced. `searched` counts verdicts that came from a
/// sphere search (the only kind that can be inconclusive).
pub struct Outcome {
    pub bytes: Vec<u8>,
    pub summary: String,
    pub output: Option<PathBuf>,
    pub inconclusive: usize,
    pub searched: usize,
}

impl Outcome {
    /// At least half of the searched verdicts are inconclusive.
    pub fn inconclusive_dominated(&self) -> bool {
        self.inconclusive > 0 && 2 * self.inconclusive >= self.searched
    }
}

impl Outcome {
    fn new(bytes: Vec<u8>, summary: String, output: Option<PathBuf>) -> Self {
        Self {
            bytes,
            summary,
            output,
            inconclusive: 0,
            searched: 0,
        }
    }
}

fn default_k(d: usize) -> usize {
    d.min(2)
}

#[derive(Serialize)]
struct SweepConfig {
    manifold: ManifoldDesc,
    k: usize,
    q: Vec<u64>,
    kappa: Vec<String>,
    theta: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<usize>,
}

pub fn count(a: CountArgs) -> Result<Outcome> {
    let (spec, desc) = resolve_manifold(
        a.manifold.as_deref(),
        a.source.as_deref(),
        a.d,
        a.m,
        a.rect.as_deref(),
    )?;
    let (d, m) = (spec.d(), spec.m());
    let k = a.k.unwrap_or(default_k(d));
    let qs = parse_q_list(a.q.as_deref().unwrap_or("64..1024x2"))?;
    let kappas = parse_kappa_list(a.kappa.as_deref().unwrap_or("phi"))?;
    let thetas = parse_theta_list(a.theta.as_deref().unwrap_or("0"), d, m)?;
    let resolved = SweepConfig {
        manifold: desc,
        k,
        q: qs.clone(),
        kappa: kappas.iter().map(|r| r.label()).collect(),
        theta: thetas.iter().map(theta_text).collect(),
        delta: None,
        grid: None,
    };
    let stamp = Stamp::new("count", &resolved);
    let table = bound_sweep(&spec, k, &qs, &kappas, &thetas)?;

    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            vec![
                r.q.to_string(),
                r.kappa.numer().to_string(),
                r.kappa.denom().to_string(),
                r.theta_id.to_string(),
                r.count.to_string(),
                r.envelope.to_string(),
                r.ratio.to_string(),
            ]
        })
        .collect();
    let mut notes: Vec<String> = table.warnings.iter().map(|w| format!("warning: {w}")).collect();
    for (i, t) in resolved.theta.iter().enumerate() {
        notes.push(format!("theta {i}: {t}"));
    }
    let bytes = csv_bytes(
        &stamp,
        &notes,
        &["q", "kappa_num", "kappa_den", "theta_id", "A", "envelope", "ratio"],
        &rows,
    )?;

    let mut s = format!("{}: A(q,kappa,theta) / (q^{d} max(kappa, phi(q))^{m}), k = {k}\n", resolved.manifold.name);
    for (q, r) in table.max_ratio_by_q() {
        writeln!(s, "  q = {q:>6}  max ratio {r:.4}")?;
    }
    if let Some(max) = table.rows.iter().map(|r| r.ratio).reduce(f64::max) {
        writeln!(s, "sweep-wide max ratio {max:.4} over {} rows", table.rows.len())?;
    }
    for w in &table.warnings {
        writeln!(s, "warning: {w}")?;
    }
    Ok(Outcome::new(bytes, s, a.output))
}

pub fn expsum(a: ExpsumArgs) -> Result<Outcome> {
    let (spec, desc) = resolve_manifold(
        a.manifold.as_deref(),
        a.source.as_deref(),
        a.d,
        a.m,
        a.rect.as_deref(),
    )?;
    let (d, m) = (spec.d(), spec.m());
    let k = a.k.unwrap_or(default_k(d));
    let qs = parse_q_list(a.q.as_deref().unwrap_or("64..1024x2"))?;
    let kappas = parse_kappa_list(a.kappa.as_deref().unwrap_or("1/4,1/16"))?;
    let thetas = parse_theta_list(a.theta.as_deref().unwrap_or("0"), d, m)?;
    let deltas = parse_f64_list(a.delta.as_deref().unwrap_or("0.01"), "delta")?;
    let grid = a.grid.unwrap_or(64);
    let resolved = SweepConfig {
        manifold: desc,
        k,
        q: qs.clone(),
        kappa: kappas.iter().map(|r| r.label()).collect(),
        theta: thetas.iter().map(theta_text).collect(),
        delta: Some(deltas.clone()),
        grid: Some(grid),
    };
    let stamp = Stamp::new("expsum", &resolved);

    let mut queries = Vec::new();
    for &q in &qs {
        for theta in &thetas {
            for rule in &kappas {
                let (kappa, _) = rule.resolve(q, m, k)?;
                queries.push(CountQuery::new(q, kappa, theta.clone())?);
            }
        }
    }
    let mut rows = Vec::new();
    let mut s = format!("{}: exact counts against the exponential-sum majorant, grid {grid}\n", resolved.manifold.name);
    let mut constants = Vec::new();
    for &delta in &deltas {
        let table = compare_sweep(&spec, &queries, delta, grid)?;
        for r in &table.rows {
            let (h, rr) = match &r.majorant {
                Some(mj) => (mj.params.h, mj.params.r),
                None => match MajorantParams::new(r.q, &r.kappa, delta) {
                    Err(Error::OutOfRegime { h, r }) => (h, r),
                    Err(e) => return Err(e.into()),
                    Ok(p) => (p.h, p.r),
                },
            };
            rows.push(vec![
                r.q.to_string(),
                r.kappa.numer().to_string(),
                r.kappa.denom().to_string(),
                r.theta_id.to_string(),
                r.count.to_string(),
                r.majorant.as_ref().map(|mj| mj.value.to_string()).unwrap_or_default(),
                r.ratio().map(|x| x.to_string()).unwrap_or_default(),
                h.to_string(),
                rr.to_string(),
                delta.to_string(),
            ]);
        }
        match table.constant() {
            Some(c) => {
                writeln!(s, "  delta = {delta}: C = {c:.6} over {} of {} rows in regime", table.in_regime(), table.rows.len())?;
                constants.push(c);
            }
            None => writeln!(s, "  delta = {delta}: no rows in regime")?,
        }
    }
    if constants.len() > 1 {
        let hi = constants.iter().copied().fold(f64::MIN, f64::max);
        let lo = constants.iter().copied().fold(f64::MAX, f64::min);
        writeln!(s, "variation of C across delta: {:.3}x", hi / lo)?;
    }
    let notes = vec!["empty majorant and ratio mark rows outside the regime H >= 1, r >= 1".to_string()];
    let bytes = csv_bytes(
        &stamp,
        &notes,
        &["q", "kappa_num", "kappa_den", "theta_id", "A", "majorant", "ratio", "H", "r", "delta"],
        &rows,
    )?;
    Ok(Outcome::new(bytes, s, a.output))
}

#[derive(Serialize)]
struct NondegenConfig {
    manifold: ManifoldDesc,
    k: usize,
    samples: usize,
    seed: u64,
    budget: usize,
}

#[derive(Serialize)]
struct CheckOutcome {
    name: String,
    verdict: Verdict,
    /// |det| for the determinant checks, the smallest singular value for
    /// surjectivity, the search margin otherwise.
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness_t: Option<Vec<f64>>,
}

impl CheckOutcome {
    fn flag(name: &str, holds: bool, value: f64) -> Self {
        Self {
            name: name.into(),
            verdict: if holds { Verdict::Pass } else { Verdict::Fail },
            value: value.abs(),
            threshold: None,
            witness_t: None,
        }
    }

    fn search(name: String, r: RankReport<f64>) -> Self {
        Self {
            name,
            verdict: r.verdict,
            value: r.margin,
            threshold: Some(r.threshold),
            witness_t: Some(r.witness_t),
        }
    }
}

#[derive(Serialize)]
struct PointReport {
    alpha: Vec<f64>,
    checks: Vec<CheckOutcome>,
}

#[derive(Serialize)]
struct Aggregate {
    name: String,
    /// PASS or FAIL when every point agrees, MIXED when they differ,
    /// INCONCLUSIVE when any point is.
    verdict: &'static str,
    pass: usize,
    fail: usize,
    inconclusive: usize,
}

#[derive(Serialize)]
struct NondegenResult {
    points: Vec<PointReport>,
    summary: Vec<Aggregate>,
    not_applicable: Vec<String>,
}

pub fn nondegen(a: NondegenArgs) -> Result<Outcome> {
    let (spec, desc) = resolve_manifold(
        a.manifold.as_deref(),
        a.source.as_deref(),
        a.d,
        a.m,
        a.rect.as_deref(),
    )?;
    let (d, m) = (spec.d(), spec.m());
    let k = a.k.unwrap_or(default_k(d));
    if k == 0 || k > d {
        bail!("k = {k} must lie in 1..={d}");
    }
    let samples = a.samples.unwrap_or(5);
    if samples == 0 {
        bail!("--samples must be at least 1");
    }
    let seed = a.seed.unwrap_or(0);
    let budget = a.budget.unwrap_or(default_budget(m));
    let resolved = NondegenConfig {
        manifold: desc,
        k,
        samples,
        seed,
        budget,
    };
    let stamp = Stamp::new("nondegen", &resolved);

    // the center of K, then uniform points
    let (lo, hi) = (spec.rect.lo_f64(), spec.rect.hi_f64());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut alphas = vec![lo.iter().zip(&hi).map(|(l, h)| 0.5 * (l + h)).collect::<Vec<_>>()];
    for _ in 1..samples {
        alphas.push(lo.iter().zip(&hi).map(|(l, h)| l + (h - l) * rng.random::<f64>()).collect());
    }

    let mut not_applicable = Vec::new();
    if m > d {
        not_applicable.push(format!("det1 (needs m <= d, here m = {m}, d = {d})"));
    }
    if m != 1 {
        not_applicable.push(format!("det2 (needs m = 1, here m = {m})"));
    }
    let mut points = Vec::new();
    for alpha in alphas {
        let pencil = spec.map.hessian::<f64>(&alpha);
        let mut checks = Vec::new();
        if m <= d {
            let (ok, det) = check_det1(&pencil)?;
            checks.push(CheckOutcome::flag("det1", ok, det));
        }
        if m == 1 {
            let (ok, det) = check_det2(&pencil)?;
            checks.push(CheckOutcome::flag("det2", ok, det));
        }
        let (ok, sigma) = check_surjective(&pencil);
        checks.push(CheckOutcome::flag("surjective", ok, sigma));
        checks.push(CheckOutcome::search(format!("rank{k}"), check_rank_k(&pencil, k, budget)?));
        checks.push(CheckOutcome::search("drv".into(), check_drv(&pencil, budget)?));
        points.push(PointReport { alpha, checks });
    }

    let mut summary = Vec::new();
    for (i, c) in points[0].checks.iter().enumerate() {
        let count = |v: Verdict| points.iter().filter(|p| p.checks[i].verdict == v).count();
        let (pass, fail, inconclusive) = (count(Verdict::Pass), count(Verdict::Fail), count(Verdict::Inconclusive));
        let verdict = if inconclusive > 0 {
            "INCONCLUSIVE"
        } else if fail == 0 {
            "PASS"
        } else if pass == 0 {
            "FAIL"
        } else {
            "MIXED"
        };
        summary.push(Aggregate {
            name: c.name.clone(),
            verdict,
            pass,
            fail,
            inconclusive,
        });
    }
    let inconclusive: usize = summary.iter().map(|g| g.inconclusive).sum();
    let searched = points
        .iter()
        .flat_map(|p| &p.checks)
        .filter(|c| c.threshold.is_some())
        .count();

    let mut s = format!(
        "{}: Hessian pencil conditions at {} point(s) of K\n",
        resolved.manifold.name,
        points.len()
    );
    for g in &summary {
        writeln!(s, "  {:<11} {:<12} pass {} fail {} inconclusive {}", g.name, g.verdict, g.pass, g.fail, g.inconclusive)?;
    }
    for n in &not_applicable {
        writeln!(s, "  not applicable: {n}")?;
    }
    let result = NondegenResult {
        points,
        summary,
        not_applicable,
    };
    let mut out = Outcome::new(json_bytes(&stamp, &result)?, s, a.output);
    out.inconclusive = inconclusive;
    out.searched = searched;
    Ok(out)
}

#[derive(Serialize)]
struct TypicalityConfig {
    cells: String,
    n: usize,
    seed: u64,
    budget: Option<usize>,
}

#[derive(Serialize)]
struct TypicalityResult {
    all_agree: bool,
    cells: Vec<PhaseReport>,
}

pub fn typicality(a: TypicalityArgs) -> Result<Outcome> {
    let n = a.n.unwrap_or(1000);
    let seed = a.seed.unwrap_or(0);
    let cells = match (a.d, a.m, a.dmax) {
        (Some(d), Some(m), None) => format!("d={d},m={m}"),
        (None, None, dmax) => format!("dmax={}", dmax.unwrap_or(3)),
        (_, _, Some(_)) => bail!("give either --dmax or --d with --m"),
        _ => bail!("--d and --m go together"),
    };
    let resolved = TypicalityConfig {
        cells,
        n,
        seed,
        budget: a.budget,
    };
    let stamp = Stamp::new("typicality", &resolved);
    let reports = match (a.d, a.m) {
        (Some(d), Some(m)) => vec![phase_cell(d, m, n, a.budget, seed)?],
        _ => phase_scan(a.dmax.unwrap_or(3), n, a.budget, seed)?,
    };

    let mut s = String::from("typicality: Gaussian operators classified for U (rank-2) and U~ (drv)\n");
    for r in &reports {
        writeln!(
            s,
            "  d={} m={}  freq U {:.3} ({})  freq U~ {:.3} ({})  inconclusive {}  agree {}",
            r.d,
            r.m,
            r.freq_u,
            r.predicted_u.as_str(),
            r.freq_utilde,
            r.predicted_utilde.as_str(),
            r.n_inconclusive,
            r.agree
        )?;
    }
    let inconclusive = reports.iter().map(|r| r.n_inconclusive_u + r.n_inconclusive_utilde).sum();
    let searched = reports.iter().map(|r| 2 * r.n).sum();
    let result = TypicalityResult {
        all_agree: reports.iter().all(|r| r.agree),
        cells: reports,
    };
    let mut out = Outcome::new(json_bytes(&stamp, &result)?, s, a.output);
    out.inconclusive = inconclusive;
    out.searched = searched;
    Ok(out)
}

#[derive(Serialize)]
struct SeriesConfig {
    d: u64,
    m: u64,
    k: u64,
    s: String,
    log_power: i32,
    probe: Option<u64>,
}

#[derive(Serialize)]
struct SeriesResult {
    applicability: khintype::series::Applicability,
    #[serde(skip_serializing_if = "Option::is_none")]
    probe: Option<khintype::series::ProbeReport>,
}

pub fn series(a: SeriesArgs) -> Result<Outcome> {
    let (Some(d), Some(m), Some(k)) = (a.d, a.m, a.k) else {
        bail!("series needs --d, --m and --k");
    };
    let (d, m, k) = (d as u64, m as u64, k as u64);
    let s = match &a.s {
        Some(text) => parse_rational_arg(text)?,
        None => khintype::Rational::from_integer((d + m).into()),
    };
    let log_power = a.log_power.unwrap_or(0);
    let resolved = SeriesConfig {
        d,
        m,
        k,
        s: s.to_string(),
        log_power,
        probe: a.probe,
    };
    let stamp = Stamp::new("series", &resolved);
    let app = applicability(d, m, k, &s)?;
    let mut text = format!("{}\n", app.summary);
    if log_power != 0 {
        writeln!(text, "note: the exact classifier covers pure powers; the log factor only enters the probe")?;
    }
    let probe = match a.probe {
        Some(q) => {
            let g = DimensionFunction::with_log(s.clone(), log_power)?;
            let spec = SeriesSpec::GSeries { g, n: d + m, m, k };
            let p = partial_sum_probe(&spec, q)?;
            writeln!(
                text,
                "probe to Q = {q}: partial sum {:.6e}, tail ratio {:.4}, looks {}",
                p.sum_full,
                p.tail_ratio,
                p.verdict
            )?;
            Some(p)
        }
        None => None,
    };
    let result = SeriesResult {
        applicability: app,
        probe,
    };
    Ok(Outcome::new(json_bytes(&stamp, &result)?, text, a.output))
}
