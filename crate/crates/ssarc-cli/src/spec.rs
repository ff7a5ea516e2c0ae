//! Figure spec files and τ specifications.
//!
//! A figure spec is JSON, either explicit
//! `{"vertices": [["0","0"], ["1/3","0"], …], "q": 2, "zero_corners": [],
//! "xy_rational": null}` (coordinates as numbers or expression strings),
//! or a family member `{"family": {"tau": "2001/2000"}}`.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Deserialize;
use sha2::{Digest, Sha256};
use ssarc::dio::{construct, Construction, QuadraticSurd, Tau, DEFAULT_BUDGET_BITS};
use ssarc::family::{build_omega_tau, FamilyError, OmegaTau};
use ssarc::geom::{build_basic_figure_annotated, Annotations, ValidationReport};
use ssarc::{BasicFigure, Complex};

use crate::expr;

#[derive(Deserialize)]
#[serde(untagged)]
enum Coord {
    Num(f64),
    Expr(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilySpec {
    tau: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FigureFile {
    vertices: Option<Vec<[Coord; 2]>>,
    q: Option<usize>,
    #[serde(default)]
    zero_corners: Vec<usize>,
    xy_rational: Option<bool>,
    family: Option<FamilySpec>,
}

pub struct Loaded {
    pub figure: BasicFigure,
    pub omega: Option<OmegaTau>,
    /// Every coordinate came from an exact expression.
    pub exact: bool,
    pub digest: String,
}

pub enum LoadError {
    Invalid(ValidationReport),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for LoadError {
    fn from(e: anyhow::Error) -> Self {
        LoadError::Other(e)
    }
}

fn coord(c: &Coord) -> Result<expr::Value> {
    match c {
        Coord::Num(v) => Ok(expr::Value {
            v: *v,
            exact: v.fract() == 0.0,
        }),
        Coord::Expr(s) => expr::eval(s),
    }
}

pub fn load_figure(path: &Path) -> Result<Loaded, LoadError> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: FigureFile =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if let Some(fam) = file.family {
        if file.vertices.is_some() || file.q.is_some() {
            return Err(anyhow!("a family spec takes no vertices or q").into());
        }
        let tau = parse_tau(&fam.tau)?;
        let w = build_omega_tau(&tau).map_err(|e| match e {
            FamilyError::Invalid(r) => LoadError::Invalid(r),
            other => LoadError::Other(anyhow!(other)),
        })?;
        let digest = digest(&w.figure);
        return Ok(Loaded {
            figure: w.figure.clone(),
            omega: Some(w),
            exact: true,
            digest,
        });
    }
    let verts = file
        .vertices
        .ok_or_else(|| anyhow!("spec needs \"vertices\" or \"family\""))?;
    let q = file
        .q
        .ok_or_else(|| anyhow!("spec needs the apex index \"q\""))?;
    let mut exact = true;
    let mut pts = Vec::with_capacity(verts.len());
    for (i, [re, im]) in verts.iter().enumerate() {
        let re = coord(re).with_context(|| format!("vertex {i}, real part"))?;
        let im = coord(im).with_context(|| format!("vertex {i}, imaginary part"))?;
        exact &= re.exact && im.exact;
        pts.push(Complex::new(re.v, im.v));
    }
    let ann = Annotations {
        zero_corners: file.zero_corners,
        xy_rational: file.xy_rational,
        family: None,
    };
    let figure = build_basic_figure_annotated(&pts, q, ann).map_err(LoadError::Invalid)?;
    let digest = digest(&figure);
    Ok(Loaded {
        figure,
        omega: None,
        exact,
        digest,
    })
}

/// SHA-256 over the normalized vertices, apex and annotations.
pub fn digest(fig: &BasicFigure) -> String {
    let mut h = Sha256::new();
    for z in &fig.vertices {
        h.update(z.re.to_bits().to_le_bytes());
        h.update(z.im.to_bits().to_le_bytes());
    }
    h.update((fig.q as u64).to_le_bytes());
    for p in &fig.annotations.zero_corners {
        h.update((*p as u64).to_le_bytes());
    }
    h.update(format!("{:?}", fig.annotations.xy_rational).as_bytes());
    if let Some(f) = &fig.annotations.family {
        h.update(f.tau.describe().as_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Exact rational from `p/q`, an integer, or a finite decimal.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p
            .trim()
            .parse()
            .map_err(|_| anyhow!("bad numerator in {s:?}"))?;
        let q: BigInt = q
            .trim()
            .parse()
            .map_err(|_| anyhow!("bad denominator in {s:?}"))?;
        if q.is_zero() {
            bail!("zero denominator in {s:?}");
        }
        return Ok(BigRational::new(p, q));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty()
        || !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit())
    {
        bail!("not a rational: {s:?}");
    }
    let digits: BigInt = format!("{int}{frac}")
        .parse()
        .unwrap_or_else(|_| BigInt::zero());
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(digits, den);
    Ok(if neg { -r } else { r })
}

fn kv(params: &str) -> Result<Vec<(String, String)>> {
    params
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| anyhow!("expected key=value, got {p:?}"))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

/// `7.11|7.12|7.13|7.14` with `a0=…` or `a0_log2=p/q`, `nu=…`, `terms=…`,
/// `budget=…`.
pub fn parse_construction(kind: &str, params: &str) -> Result<Tau> {
    let mut a0: Option<BigRational> = None;
    let mut nu = 8u64;
    let mut terms = None;
    let mut budget = DEFAULT_BUDGET_BITS;
    for (k, v) in kv(params)? {
        match k.as_str() {
            "a0" => {
                let x: f64 = v.parse().map_err(|_| anyhow!("bad a0 {v:?}"))?;
                if !(x > 0.0 && x.is_finite()) {
                    bail!("a0 must be positive");
                }
                a0 = BigRational::from_float(x / std::f64::consts::LN_2);
            }
            "a0_log2" => a0 = Some(parse_rational(&v)?),
            "nu" => nu = v.parse().map_err(|_| anyhow!("bad nu {v:?}"))?,
            "terms" => terms = Some(v.parse().map_err(|_| anyhow!("bad terms {v:?}"))?),
            "budget" => budget = v.parse().map_err(|_| anyhow!("bad budget {v:?}"))?,
            _ => bail!("unknown parameter {k:?}"),
        }
    }
    let need_a0 = || -> Result<BigRational> {
        let c = a0
            .clone()
            .ok_or_else(|| anyhow!("construction {kind} needs a0 or a0_log2"))?;
        if c <= BigRational::zero() {
            bail!("a0 must be positive");
        }
        Ok(c)
    };
    let c = match kind {
        "7.11" => Construction::T711 { c: need_a0()? },
        "7.12" => Construction::T712 { c: need_a0()? },
        "7.13" => Construction::T713,
        "7.14" => Construction::T714,
        _ => bail!("unknown construction {kind:?} (expected 7.11, 7.12, 7.13 or 7.14)"),
    };
    if matches!(c, Construction::T713 | Construction::T714) && a0.is_some() {
        bail!("construction {kind} takes no a0");
    }
    Ok(Tau::Stream(construct(c, nu, terms, budget)?))
}

/// τ as `p/q`, a decimal (exact), `<decimal>@<digits>` (radius 10^−digits),
/// `sqrt2`, `surd:a,b,d,c` for (a + b√d)/c, or a construction
/// `7.1x[:params]`.
pub fn parse_tau(s: &str) -> Result<Tau> {
    let s = s.trim();
    for kind in ["7.11", "7.12", "7.13", "7.14"] {
        if s == kind {
            return parse_construction(kind, "");
        }
        if let Some(rest) = s.strip_prefix(kind).and_then(|r| r.strip_prefix(':')) {
            return parse_construction(kind, rest);
        }
    }
    if s == "sqrt2" {
        return Ok(Tau::Surd(QuadraticSurd::sqrt2()));
    }
    if let Some(rest) = s.strip_prefix("surd:") {
        let v: Vec<i64> = rest
            .split(',')
            .map(|x| {
                x.trim()
                    .parse()
                    .map_err(|_| anyhow!("bad surd component {x:?}"))
            })
            .collect::<Result<_>>()?;
        let [a, b, d, c] = v[..] else {
            bail!("surd needs a,b,d,c")
        };
        if d <= 0 {
            bail!("surd needs d > 0");
        }
        return Ok(Tau::Surd(QuadraticSurd::new(a, b, d as u64, c)?));
    }
    if let Some((v, digits)) = s.split_once('@') {
        let digits: usize = digits
            .parse()
            .map_err(|_| anyhow!("bad precision {digits:?}"))?;
        let radius = BigRational::new(BigInt::one(), num_traits::pow(BigInt::from(10), digits));
        return Ok(Tau::Decimal {
            value: parse_rational(v)?,
            radius,
        });
    }
    Ok(Tau::Rational(parse_rational(s)?))
}

pub fn exponents_as_strings(v: &[BigUint]) -> Vec<String> {
    v.iter().map(|n| n.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_forms() {
        assert_eq!(
            parse_tau("2001/2000").unwrap(),
            Tau::Rational(BigRational::new(2001.into(), 2000.into()))
        );
        assert_eq!(
            parse_tau("1.0005").unwrap(),
            Tau::Rational(BigRational::new(2001.into(), 2000.into()))
        );
        assert!(matches!(
            parse_tau("1.0004@12").unwrap(),
            Tau::Decimal { .. }
        ));
        assert!(matches!(parse_tau("sqrt2").unwrap(), Tau::Surd(_)));
        let Tau::Stream(s) = parse_tau("7.11:a0_log2=1/512,nu=8,terms=2").unwrap() else {
            panic!()
        };
        assert_eq!(exponents_as_strings(s.exponents()), ["9", "20"]);
        let Tau::Stream(s) = parse_tau("7.14:nu=8").unwrap() else {
            panic!()
        };
        assert_eq!(s.terms(), 3);
        assert!(parse_tau("7.11:nu=8").is_err());
        assert!(parse_tau("7.13:a0=1").is_err());
        assert!(parse_tau("1/0").is_err() && parse_tau("abc").is_err());
    }
}
