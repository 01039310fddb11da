//! Run configuration: an optional TOML file with one table per subcommand,
//! overridden field by field by command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use khintype::counting::{KappaRule, Theta};
use khintype::manifold::{builtin, ManifoldSpec, PolyMap, Rectangle};
use khintype::scalar::parse_rational;
use khintype::Rational;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Declares a flag/TOML section where every field is optional, plus
/// `overlay`, which keeps `self`'s values and fills the gaps from `lower`.
macro_rules! section {
    ($(#[$meta:meta])* $name:ident { $( $(#[$fmeta:meta])* $field:ident : $ty:ty ),* $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Default, Clone, clap::Args, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            $( $(#[$fmeta])* #[arg(long)] pub $field: Option<$ty>, )*
        }

        impl $name {
            pub fn overlay(self, lower: Self) -> Self {
                Self { $( $field: self.$field.or(lower.$field), )* }
            }
        }
    };
}

section!(CountArgs {
    /// Builtin manifold name (see `catalog`)
    manifold: String,
    /// Polynomial map, components separated by `;`, variables a1..ad
    source: String,
    /// Dimension of the domain (with --source)
    d: usize,
    /// Number of components (with --source)
    m: usize,
    /// Box as `lo:hi,lo:hi,...` (default [0,1]^d)
    rect: String,
    /// Rank parameter entering phi(q) (default min(d, 2))
    k: usize,
    /// q values: `64..1024x2`, `10..50`, `10..50+5` or a comma list
    q: String,
    /// Comma list of kappa rules: `1/4`, `0.1`, `phi`, `phi/4`, `scaled-phi:c`
    kappa: String,
    /// `;`-separated shifts, each `0` or d+m comma-separated rationals
    theta: String,
    /// Output file (default stdout)
    output: PathBuf,
});

section!(ExpsumArgs {
    /// Builtin manifold name (see `catalog`)
    manifold: String,
    /// Polynomial map, components separated by `;`, variables a1..ad
    source: String,
    /// Dimension of the domain (with --source)
    d: usize,
    /// Number of components (with --source)
    m: usize,
    /// Box as `lo:hi,lo:hi,...` (default [0,1]^d)
    rect: String,
    /// Rank parameter entering phi(q) (default min(d, 2))
    k: usize,
    /// q values: `64..1024x2`, `10..50`, `10..50+5` or a comma list
    q: String,
    /// Comma list of kappa rules: `1/4`, `0.1`, `phi`, `phi/4`, `scaled-phi:c`
    kappa: String,
    /// `;`-separated shifts, each `0` or d+m comma-separated rationals
    theta: String,
    /// Comma list of delta values in (0, 1] (default 0.01)
    delta: String,
    /// Quadrature cells per axis (default 64)
    grid: usize,
    /// Output file (default stdout)
    output: PathBuf,
});

section!(NondegenArgs {
    /// Builtin manifold name (see `catalog`)
    manifold: String,
    /// Polynomial map, components separated by `;`, variables a1..ad
    source: String,
    /// Dimension of the domain (with --source)
    d: usize,
    /// Number of components (with --source)
    m: usize,
    /// Box as `lo:hi,lo:hi,...` (default [0,1]^d)
    rect: String,
    /// Rank for the rank-k check (default min(d, 2))
    k: usize,
    /// Points of the box to test: the center plus random ones (default 5)
    samples: usize,
    /// Seed for the random points (default 0)
    seed: u64,
    /// Sphere seeds per search (default depends on m)
    budget: usize,
    /// Output file (default stdout)
    output: PathBuf,
});

section!(TypicalityArgs {
    /// Scan every cell with d <= dmax (default 3)
    dmax: usize,
    /// Single cell: domain dimension (with --m)
    d: usize,
    /// Single cell: number of generators (with --d)
    m: usize,
    /// Samples per cell (default 1000)
    n: usize,
    /// Run seed (default 0)
    seed: u64,
    /// Sphere seeds per search (default depends on m)
    budget: usize,
    /// Output file (default stdout)
    output: PathBuf,
});

section!(SeriesArgs {
    /// Domain dimension
    d: usize,
    /// Codimension
    m: usize,
    /// Rank parameter
    k: usize,
    /// Gauge exponent s in g(r) = r^s (log r)^b (default n = d + m)
    s: String,
    /// Log power b of the gauge (default 0)
    log_power: i32,
    /// Also sum the g-series numerically up to this Q (at least 100)
    probe: u64,
    /// Output file (default stdout)
    output: PathBuf,
});

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub count: CountArgs,
    #[serde(default)]
    pub expsum: ExpsumArgs,
    #[serde(default)]
    pub nondegen: NondegenArgs,
    #[serde(default)]
    pub typicality: TypicalityArgs,
    #[serde(default)]
    pub series: SeriesArgs,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// SHA-256 of the canonical JSON form of a resolved configuration.
pub fn config_hash<T: Serialize>(resolved: &T) -> String {
    let bytes = serde_json::to_vec(resolved).expect("configs serialize");
    hex::encode(Sha256::digest(&bytes))
}

/// Resolved manifold, recorded in outputs by source text so that a hash
/// identifies the map even for builtins.
#[derive(Clone, Debug, Serialize)]
pub struct ManifoldDesc {
    pub name: String,
    pub source: String,
    pub d: usize,
    pub m: usize,
    pub rect: String,
}

pub fn resolve_manifold(
    name: Option<&str>,
    source: Option<&str>,
    d: Option<usize>,
    m: Option<usize>,
    rect: Option<&str>,
) -> Result<(ManifoldSpec, ManifoldDesc)> {
    let spec = match (name, source) {
        (Some(_), Some(_)) => bail!("give either --manifold or --source, not both"),
        (None, None) => bail!("a manifold is required (--manifold NAME or --source EXPR --d D --m M)"),
        (Some(name), None) => {
            if d.is_some() || m.is_some() {
                bail!("--d and --m only apply to --source");
            }
            builtin(name)?
        }
        (None, Some(src)) => {
            let (Some(d), Some(m)) = (d, m) else {
                bail!("--source needs --d and --m");
            };
            ManifoldSpec::new("custom", Rectangle::unit(d), PolyMap::parse(src, d, m)?)?
        }
    };
    let spec = match rect {
        Some(r) => spec.with_rect(parse_rect(r, spec.d())?)?,
        None => spec,
    };
    let rect_text = spec
        .rect
        .lo()
        .iter()
        .zip(spec.rect.hi())
        .map(|(lo, hi)| format!("{lo}:{hi}"))
        .collect::<Vec<_>>()
        .join(",");
    let desc = ManifoldDesc {
        name: spec.name.clone(),
        source: spec.map.to_source(),
        d: spec.d(),
        m: spec.m(),
        rect: rect_text,
    };
    Ok((spec, desc))
}

fn rational(s: &str) -> Result<Rational> {
    parse_rational(s).with_context(|| format!("`{}` is not a rational number", s.trim()))
}

pub fn parse_rect(text: &str, d: usize) -> Result<Rectangle> {
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for side in text.split(',') {
        let (a, b) = side
            .split_once(':')
            .with_context(|| format!("rectangle side `{side}` is not `lo:hi`"))?;
        lo.push(rational(a)?);
        hi.push(rational(b)?);
    }
    if lo.len() != d {
        bail!("rectangle has {} sides, the map has d = {d}", lo.len());
    }
    Ok(Rectangle::new(lo, hi)?)
}

/// Parses `a..bxf` (geometric), `a..b+s` (arithmetic), `a..b` and plain
/// values, joined by commas. Duplicates are kept in order.
pub fn parse_q_list(text: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim) {
        let int = |s: &str| -> Result<u64> {
            s.trim().parse::<u64>().with_context(|| format!("`{s}` is not a positive integer in q list"))
        };
        if let Some((start, rest)) = part.split_once("..") {
            let start = int(start)?;
            if let Some((end, factor)) = rest.split_once('x') {
                let (end, factor) = (int(end)?, int(factor)?);
                if factor < 2 || start == 0 {
                    bail!("geometric q range `{part}` needs start >= 1 and factor >= 2");
                }
                let mut q = start;
                while q <= end {
                    out.push(q);
                    q = q.checked_mul(factor).context("q overflow")?;
                }
            } else {
                let (end, step) = match rest.split_once('+') {
                    Some((e, s)) => (int(e)?, int(s)?),
                    None => (int(rest)?, 1),
                };
                if step == 0 {
                    bail!("q range `{part}` has step 0");
                }
                out.extend((start..=end).step_by(step as usize));
            }
        } else {
            out.push(int(part)?);
        }
    }
    if out.is_empty() || out.contains(&0) {
        bail!("q list `{text}` must be nonempty and positive");
    }
    Ok(out)
}

pub fn parse_kappa_list(text: &str) -> Result<Vec<KappaRule>> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            match s.strip_prefix("scaled-phi:") {
                Some(c) => {
                    let c = rational(c)?;
                    if c <= Rational::from_integer(0.into()) {
                        bail!("scaled-phi factor must be positive");
                    }
                    Ok(KappaRule::ScaledPhi(c))
                }
                None => Ok(KappaRule::parse(s)?),
            }
        })
        .collect()
}

pub fn parse_theta_list(text: &str, d: usize, m: usize) -> Result<Vec<Theta>> {
    text.split(';')
        .map(|t| {
            let t = t.trim();
            if t == "0" {
                return Ok(Theta::zero(d, m));
            }
            let values = t.split(',').map(rational).collect::<Result<Vec<_>>>()?;
            Ok(Theta::from_flat(d, m, values)?)
        })
        .collect()
}

pub fn theta_text(theta: &Theta) -> String {
    if theta.is_zero() {
        return "0".into();
    }
    theta
        .lambda
        .iter()
        .chain(&theta.gamma)
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

pub fn parse_f64_list(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .with_context(|| format!("`{s}` is not a number in {what} list"))
        })
        .collect()
}

pub fn parse_rational_arg(text: &str) -> Result<Rational> {
    rational(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_ranges() {
        assert_eq!(parse_q_list("64..1024x2").unwrap(), vec![64, 128, 256, 512, 1024]);
        assert_eq!(parse_q_list("3..6").unwrap(), vec![3, 4, 5, 6]);
        assert_eq!(parse_q_list("10..30+10, 7").unwrap(), vec![10, 20, 30, 7]);
        assert!(parse_q_list("0").is_err());
        assert!(parse_q_list("4..8x1").is_err());
        assert!(parse_q_list("a").is_err());
    }

    #[test]
    fn kappa_and_theta_lists() {
        let k = parse_kappa_list("1/4, phi, scaled-phi:1/4").unwrap();
        assert_eq!(k.len(), 3);
        assert_eq!(k[2].label(), "phi/4");
        assert!(parse_kappa_list("scaled-phi:0").is_err());
        let t = parse_theta_list("0; 0.3,0.7,0.1,0.9", 2, 2).unwrap();
        assert!(t[0].is_zero());
        assert_eq!(theta_text(&t[1]), "3/10,7/10,1/10,9/10");
        assert!(parse_theta_list("1/2", 2, 2).is_err());
    }

    #[test]
    fn file_sections_and_overlay() {
        let cfg: FileConfig = toml::from_str("[count]\nmanifold = \"parabola\"\nq = \"8\"\n").unwrap();
        let flags = CountArgs {
            q: Some("16".into()),
            ..CountArgs::default()
        };
        let merged = flags.overlay(cfg.count);
        assert_eq!(merged.q.as_deref(), Some("16"));
        assert_eq!(merged.manifold.as_deref(), Some("parabola"));
        assert!(toml::from_str::<FileConfig>("[count]\ngrid = 3\n").is_err());
        assert!(toml::from_str::<FileConfig>("seed = 3\n").is_err());
    }

    #[test]
    fn manifold_resolution() {
        let (spec, desc) = resolve_manifold(None, Some("a1^2 + a2"), Some(2), Some(1), Some("0:1,1/2:1")).unwrap();
        assert_eq!(spec.d(), 2);
        assert_eq!(desc.rect, "0:1,1/2:1");
        assert!(resolve_manifold(Some("parabola"), Some("a1"), None, None, None).is_err());
        assert!(resolve_manifold(Some("nope"), None, None, None, None).is_err());
        assert!(resolve_manifold(None, Some("a1"), Some(1), None, None).is_err());
    }
}
