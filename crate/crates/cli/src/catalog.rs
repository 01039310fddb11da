use std::fmt::Write as _;

use anyhow::Result;
use khintype::manifold::builtin;
use khintype::nondegen::{check_det1, check_det2, check_drv, check_rank_k, check_surjective, default_budget, Verdict};

use crate::output::{TOOL, VERSION};

/// Known verdicts for each builtin, in the order they are listed.
const MANIFOLDS: &[(&str, &str, &[(&str, bool)])] = &[
    (
        "veronese5",
        "a1^2; a1*a2; a2^2 on [0,1]^5 (d = 5, m = 3)",
        &[("surjective", true), ("det1", false), ("rank2", false)],
    ),
    (
        "tracefree2",
        "a1^2 - a2^2; a1*a2 on [0,1]^2 (d = 2, m = 2)",
        &[("rank2", true), ("drv", false)],
    ),
    (
        "tracefree(3)",
        "trace-free quadratic forms in 3 variables (m = 5)",
        &[("rank2", true)],
    ),
    (
        "tracefree(4)",
        "trace-free quadratic forms in 4 variables (m = 9)",
        &[("rank2", true)],
    ),
    (
        "parabola",
        "a1^2 on [0,1] (d = 1, m = 1)",
        &[("surjective", true), ("det1", true), ("det2", true)],
    ),
];

const CONSTRUCTIONS: &[(&str, &str)] = &[
    ("posdef-pad", "(I, 0, ..., 0) with l generators; surjective only for l = 1"),
    ("shear", "E_id + E_di for i < l < d; every contraction has rank 2 and mixed signs"),
    ("diag-squares", "E_ii for i < min(l, d), padded with zero generators to l"),
    ("tracefree-basis", "Hessians of tracefree(d)"),
];

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Recomputes a check at the center of the box. `None` for a search that
/// came back inconclusive.
fn compute(name: &str, check: &str) -> Result<Option<bool>> {
    let spec = builtin(name)?;
    let center: Vec<f64> = spec
        .rect
        .lo_f64()
        .iter()
        .zip(spec.rect.hi_f64())
        .map(|(l, h)| 0.5 * (l + h))
        .collect();
    let pencil = spec.map.hessian::<f64>(&center);
    let budget = default_budget(spec.m());
    let searched = |v: Verdict| match v {
        Verdict::Pass => Some(true),
        Verdict::Fail => Some(false),
        Verdict::Inconclusive => None,
    };
    Ok(match check {
        "surjective" => Some(check_surjective(&pencil).0),
        "det1" => Some(check_det1(&pencil)?.0),
        "det2" => Some(check_det2(&pencil)?.0),
        "rank2" => searched(check_rank_k(&pencil, 2, budget)?.verdict),
        "drv" => searched(check_drv(&pencil, budget)?.verdict),
        other => unreachable!("no check named {other}"),
    })
}

pub fn listing(verify: bool) -> Result<String> {
    let mut s = format!("# {TOOL} {VERSION} catalog\nmanifolds:\n");
    for (name, desc, verdicts) in MANIFOLDS {
        let known: Vec<String> = verdicts.iter().map(|(c, v)| format!("{c}={}", yes_no(*v))).collect();
        writeln!(s, "{name}: {}", known.join(" "))?;
        writeln!(s, "    {desc}")?;
        if verify {
            let mut got = Vec::new();
            for (check, _) in *verdicts {
                let v = compute(name, check)?.map_or("inconclusive", yes_no);
                got.push(format!("{check}={v}"));
            }
            writeln!(s, "    computed at the center: {}", got.join(" "))?;
        }
    }
    writeln!(s, "tracefree(d): rank2=yes for d = 2..6")?;
    writeln!(s, "constructions:")?;
    for (name, desc) in CONSTRUCTIONS {
        writeln!(s, "{name}: {desc}")?;
    }
    Ok(s)
}
