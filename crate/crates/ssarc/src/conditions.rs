//! Angle profile, Conditions W_p and Q_p^t at every corner, and empirical
//! estimators for the quasi-arc constant and the Whitney modulus.
//!
//! A positive corner angle settles both conditions analytically. At a zero
//! corner the conditions reduce to growth questions about
//! v(j, k) = u − jx + ky, which are answered with bounded scans and never
//! reported as proofs.

use std::f64::consts::LN_2;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex;
use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::arc::{ArcSystem, SubarcOracle};
use crate::dio::{structured_offset, structured_witness, Index, Log2Range, Tau};
use crate::family::ZETA;
use crate::geom::{classify_corner, eta1, eta2, log_params, vertex_angle, AngleClass, BasicFigure};
use crate::spectrum::f_values;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CondError {
    #[error("corner angle θ_{0} is unresolved")]
    Unresolved(usize),
    #[error("corner angle θ_{0} is positive")]
    AnglePositive(usize),
    #[error("corner index {0} out of range")]
    BadCorner(usize),
}

// ---------------------------------------------------------------------------
// angles

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngleEntry {
    pub p: usize,
    pub value: f64,
    pub radius: f64,
    pub class: AngleClass,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AngleProfile {
    pub theta: Vec<AngleEntry>,
    pub eta1: f64,
    pub eta2: f64,
    pub eta0: f64,
    pub theta_min: f64,
    /// ξ = θ_min + η₀.
    pub xi: f64,
    /// ϱ_p, angle at z_p between z_{p−1} and z_{p+1}.
    pub rho: Vec<f64>,
    /// ψ_p = min(θ_p, ϱ_p).
    pub psi: Vec<f64>,
    pub unresolved: Vec<usize>,
}

impl AngleProfile {
    /// ξ > 0, or `None` while any corner is unresolved.
    pub fn regular(&self) -> Option<bool> {
        if self.unresolved.is_empty() {
            Some(self.xi > 0.0)
        } else {
            None
        }
    }
}

pub fn angle_profile(fig: &BasicFigure<f64>) -> AngleProfile {
    let mut theta = Vec::new();
    let mut unresolved = Vec::new();
    let mut rho = Vec::new();
    let mut psi = Vec::new();
    for p in 1..fig.ell() {
        let (a, class) = classify_corner(fig, p);
        let value = if class == AngleClass::Zero {
            0.0
        } else {
            a.value
        };
        if class == AngleClass::Unresolved {
            unresolved.push(p);
        }
        theta.push(AngleEntry {
            p,
            value,
            radius: a.radius,
            class,
        });
        let r = vertex_angle(fig, p).value;
        rho.push(r);
        psi.push(value.min(r));
    }
    let e1 = eta1(fig).value;
    let e2 = eta2(fig).value;
    let theta_min = theta.iter().map(|t| t.value).fold(f64::INFINITY, f64::min);
    let eta0 = e1.min(e2);
    AngleProfile {
        theta,
        eta1: e1,
        eta2: e2,
        eta0,
        theta_min,
        xi: theta_min + eta0,
        rho,
        psi,
        unresolved,
    }
}

// ---------------------------------------------------------------------------
// Diophantine parameters

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiophantineParams {
    pub p: usize,
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub mu: f64,
    pub x: f64,
    pub y: f64,
    pub u: f64,
    /// Common direction of Z_j − z_p and W_k − z_p.
    pub iota: Complex<f64>,
    /// Exact rationality of x/y when declared.
    pub xy_rational: Option<bool>,
}

fn check_corner(fig: &BasicFigure<f64>, p: usize) -> Result<AngleClass, CondError> {
    if p == 0 || p >= fig.ell() {
        return Err(CondError::BadCorner(p));
    }
    Ok(classify_corner(fig, p).1)
}

pub fn diophantine_params(
    fig: &BasicFigure<f64>,
    p: usize,
) -> Result<DiophantineParams, CondError> {
    match check_corner(fig, p)? {
        AngleClass::Positive => return Err(CondError::AnglePositive(p)),
        AngleClass::Unresolved => return Err(CondError::Unresolved(p)),
        AngleClass::Zero => {}
    }
    let lp = log_params(fig, p);
    Ok(DiophantineParams {
        p,
        alpha: lp.alpha,
        beta: lp.beta,
        lambda: lp.lambda,
        mu: lp.mu,
        x: lp.x,
        y: lp.y,
        u: lp.u,
        iota: lp.iota,
        xy_rational: fig.annotations.xy_rational,
    })
}

// ---------------------------------------------------------------------------
// verdicts

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    HoldsAnalytic,
    HoldsRationalRatio,
    EvidenceFor,
    EvidenceAgainst,
    Unknown,
}

impl Status {
    /// Larger is weaker.
    pub fn weakness(self) -> u8 {
        match self {
            Status::HoldsAnalytic => 0,
            Status::HoldsRationalRatio => 1,
            Status::EvidenceFor => 2,
            Status::Unknown => 3,
            Status::EvidenceAgainst => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Status::HoldsAnalytic => "HoldsAnalytic",
            Status::HoldsRationalRatio => "HoldsRationalRatio",
            Status::EvidenceFor => "EvidenceFor",
            Status::EvidenceAgainst => "EvidenceAgainst",
            Status::Unknown => "Unknown",
        }
    }
}

/// A (j, k) pair and the log2 of the tested ratio there.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub j: Index,
    pub k: Index,
    pub log2_value: Log2Range,
    /// From the construction's witness set rather than the dense scan.
    pub structured: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    W,
    Q,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub condition: Condition,
    pub p: usize,
    pub t: f64,
    pub status: Status,
    pub bound: u64,
    /// Positive corner used for an analytic verdict.
    pub angle_p: Option<usize>,
    /// (N′, natural log of the running maximum up to N′).
    pub checkpoints: Vec<(u64, f64)>,
    /// W only: natural log of the block maxima on (N/8, N/4], (N/4, N/2], (N/2, N].
    pub block_maxima: Vec<f64>,
    /// Records of the running maximum, in scan order.
    pub witnesses: Vec<Witness>,
    /// Natural log of max ratio seen: log M for Q, log sup ρ for W.
    pub log_estimate: Option<f64>,
    /// Empirical stand-in for Υ (non-rigorous).
    pub upsilon: Option<f64>,
    pub note: String,
}

impl Verdict {
    fn analytic(condition: Condition, p: usize, t: f64, n: u64) -> Self {
        Self {
            condition,
            p,
            t,
            status: Status::HoldsAnalytic,
            bound: n,
            angle_p: Some(p),
            checkpoints: vec![],
            block_maxima: vec![],
            witnesses: vec![],
            log_estimate: None,
            upsilon: None,
            note: format!("θ_{p} > 0"),
        }
    }
}

const LN_1PCT: f64 = 0.009_950_330_853_168_083; // ln 1.01

/// How v(j, k) = u − jx + ky is evaluated.
enum Gap {
    Numeric {
        u: f64,
        x: f64,
        y: f64,
    },
    /// Ω_τ with irrational τ: v = (ζ/τ)(k + 1 − jτ).
    Family {
        tau: Tau,
        tv: f64,
        terr: f64,
    },
}

#[derive(Clone, Debug)]
struct Entry {
    j: u64,
    k: BigInt,
    /// Natural log of the tested ratio.
    ln_val: f64,
}

impl Gap {
    fn for_figure(fig: &BasicFigure<f64>, dp: &DiophantineParams) -> Self {
        match fig.annotations.family.as_ref().map(|f| &f.tau) {
            Some(tau @ (Tau::Stream(_) | Tau::Surd(_) | Tau::Decimal { .. })) => {
                let terr = match tau {
                    Tau::Decimal { radius, .. } => radius.to_f64().unwrap_or(f64::INFINITY),
                    _ => 4.0 * f64::EPSILON,
                };
                Gap::Family {
                    tau: tau.clone(),
                    tv: tau.approx(),
                    terr,
                }
            }
            Some(tau @ Tau::Rational(_)) => {
                let t = tau.approx();
                let nu = t - (t - 1.0) / std::f64::consts::SQRT_2;
                Gap::Numeric {
                    u: ZETA / nu,
                    x: ZETA,
                    y: ZETA / t,
                }
            }
            None => Gap::Numeric {
                u: dp.u,
                x: dp.x,
                y: dp.y,
            },
        }
    }

    fn xyu(&self) -> (f64, f64, f64) {
        match self {
            Gap::Numeric { u, x, y } => (*x, *y, *u),
            Gap::Family { tv, .. } => (ZETA, ZETA / tv, ZETA / tv),
        }
    }

    /// Candidate (k, v, ln|v|) near the minimizing k for row j. `None`
    /// when some |v| cannot be separated from 0.
    fn row(&self, j: u64, n: u64, window: i64) -> Option<Vec<(u64, f64, f64)>> {
        match self {
            Gap::Numeric { u, x, y } => {
                let jf = j as f64;
                let kstar = ((jf * x - u) / y).round() as i64;
                let mut out = Vec::new();
                for dk in -window..=window {
                    let k = kstar + dk;
                    if k < 0 || k as u64 > n {
                        continue;
                    }
                    let kf = k as f64;
                    let v = u - jf * x + kf * y;
                    let err = 8.0 * f64::EPSILON * (u.abs() + jf * x + kf * y) + 1e-300;
                    if v.abs() <= err {
                        return None;
                    }
                    out.push((k as u64, v, v.abs().ln()));
                }
                if out.is_empty() {
                    let k = if kstar < 0 { 0 } else { n };
                    let v = u - jf * x + k as f64 * y;
                    out.push((k, v, v.abs().ln()));
                }
                Some(out)
            }
            Gap::Family { tau, tv, terr } => {
                let c = ZETA / tv;
                if j == 0 {
                    return Some(vec![(0, c, c.ln())]);
                }
                let jt = j as f64 * tv;
                let frac = jt - jt.round();
                if frac.abs() > 1e-4 && (j as f64) * terr < 1e-9 {
                    let k = jt.round() as u64 - 1;
                    if k > n {
                        return Some(vec![]);
                    }
                    let v = -c * frac;
                    return Some(vec![(k, v, v.abs().ln())]);
                }
                let (kk, l2) = tau.nearest_integer(j)?;
                if kk.is_negative() || kk == BigInt::from(0) {
                    return Some(vec![]);
                }
                let k = (kk.clone() - 1u32).to_u64()?;
                if k > n {
                    return Some(vec![]);
                }
                let ln_abs = c.ln() + l2.approx() * LN_2;
                let vf = c * (kk.to_f64()? - j as f64 * tv);
                let v = if ln_abs > -20.0 {
                    vf
                } else {
                    vf.signum() * ln_abs.exp()
                };
                Some(vec![(k, v, ln_abs)])
            }
        }
    }
}

fn lse(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// ln|e^v − 1| with a tiny-|v| fallback on ln|v|.
fn ln_expm1_abs(v: f64, ln_abs: f64) -> f64 {
    if ln_abs < -30.0 {
        ln_abs
    } else {
        v.exp_m1().abs().ln()
    }
}

struct ScanSetup {
    cond: Condition,
    x: f64,
    y: f64,
    u: f64,
    t: f64,
    s: f64,
    beta: f64,
}

impl ScanSetup {
    fn ln_value(&self, j: u64, k: u64, v: f64, ln_abs: f64) -> f64 {
        let jf = j as f64;
        let kf = k as f64;
        match self.cond {
            Condition::Q => -jf * (self.t - 1.0) * self.x - ln_abs,
            Condition::W => {
                self.s * lse(-jf * self.x, -kf * self.y) - self.beta.ln() + kf * self.y
                    - ln_expm1_abs(v, ln_abs)
            }
        }
    }

    /// log2 of the tested ratio at a structured witness j = 2^{n}, with
    /// k + 1 = jτ to within 2^{offset}.
    fn structured_log2(&self, n_exp: &BigUint, offset: &Log2Range, tv: f64) -> Log2Range {
        let rel = 1e-13;
        let coef = match self.cond {
            Condition::Q => (self.t - 1.0) * self.x / LN_2,
            Condition::W => (self.s - 1.0) * self.x / LN_2,
        };
        let decay = Log2Range::scale_pow2(coef * (1.0 - rel), coef * (1.0 + rel), n_exp).neg();
        let ln_c = (ZETA / tv).ln();
        let log2_v = Log2Range::from_f64(ln_c / LN_2, 1e-12).add(offset);
        let konst = match self.cond {
            Condition::Q => Log2Range::from_f64(0.0, 0.0),
            Condition::W => {
                let v = self.s * (1.0 + self.u.exp()).ln() - self.beta.ln() - self.u;
                Log2Range::from_f64(v / LN_2, 1e-9)
            }
        };
        decay.add(&konst).sub(&log2_v).widen(1e-6)
    }
}

fn scan(fig: &BasicFigure<f64>, dp: &DiophantineParams, setup: ScanSetup, n: u64) -> Verdict {
    let gap = Gap::for_figure(fig, dp);
    let window = if setup.cond == Condition::W { 2 } else { 1 };
    let rows: Vec<Option<Option<Entry>>> = (0..=n)
        .into_par_iter()
        .map(|j| {
            let cands = gap.row(j, n, window)?;
            let best = cands
                .into_iter()
                .map(|(k, v, la)| Entry {
                    j,
                    k: BigInt::from(k),
                    ln_val: setup.ln_value(j, k, v, la),
                })
                .max_by(|a, b| a.ln_val.partial_cmp(&b.ln_val).unwrap());
            Some(best)
        })
        .collect();
    let mut verdict = Verdict {
        condition: setup.cond,
        p: dp.p,
        t: setup.t,
        status: Status::Unknown,
        bound: n,
        angle_p: None,
        checkpoints: vec![],
        block_maxima: vec![],
        witnesses: vec![],
        log_estimate: None,
        upsilon: None,
        note: String::new(),
    };
    if let Some(j) = rows.iter().position(|r| r.is_none()) {
        verdict.note = format!("|u − jx + ky| not separated from 0 near j = {j}");
        return verdict;
    }
    let entries: Vec<Entry> = rows.into_iter().flatten().flatten().collect();
    let marks = [n / 8, n / 4, n / 2, n];
    let mut running = f64::NEG_INFINITY;
    let mut records: Vec<Witness> = Vec::new();
    let mut mi = 0;
    let mut checkpoints = Vec::new();
    let mut blocks = [f64::NEG_INFINITY; 3];
    for e in &entries {
        while mi < marks.len() && e.j > marks[mi] {
            checkpoints.push((marks[mi], running));
            mi += 1;
        }
        if e.ln_val > running {
            running = e.ln_val;
            records.push(Witness {
                j: Index::Small(e.j),
                k: Index::Big(e.k.to_biguint().unwrap_or_default()),
                log2_value: Log2Range::from_f64(e.ln_val / LN_2, 1e-9 * e.ln_val.abs().max(1.0)),
                structured: false,
            });
        }
        for (b, w) in blocks.iter_mut().enumerate() {
            if e.j > marks[b] && e.j <= marks[b + 1] {
                *w = w.max(e.ln_val);
            }
        }
    }
    while mi < marks.len() {
        checkpoints.push((marks[mi], running));
        mi += 1;
    }
    let dense_records = records.len();
    let mut late = Log2Range::from_f64(running / LN_2, 1e-9 * running.abs().max(1.0));
    if let Gap::Family {
        tau: Tau::Stream(s),
        tv,
        ..
    } = &gap
    {
        for i in 1..s.terms() {
            let ni = &s.exponents()[i - 1];
            let Some(nu) = ni.to_u64() else { break };
            if nu > s.budget_bits() || (nu < 64 && (1u64 << nu) <= n) {
                continue;
            }
            let val = setup.structured_log2(ni, &structured_offset(s, i), *tv);
            if late.below(&val) {
                let k = structured_witness(s, i)
                    .map(|(_, k)| k - 1u32)
                    .unwrap_or_default();
                records.push(Witness {
                    j: Index::Pow2(ni.clone()),
                    k: Index::Big(k),
                    log2_value: val.clone(),
                    structured: true,
                });
                late = val;
            }
        }
    }
    let ln_at = |m: u64| {
        checkpoints
            .iter()
            .find(|c| c.0 == m)
            .map(|c| c.1)
            .unwrap_or(f64::NEG_INFINITY)
    };
    let half = Log2Range::from_f64(ln_at(n / 2) / LN_2, 1e-9 * ln_at(n / 2).abs().max(1.0));
    let grew_late = late.lo_f64() - half.hi_f64() >= LN_1PCT / LN_2;
    let structured_growth = records.len() > dense_records;
    let status = if records.len() >= 3 && grew_late {
        Status::EvidenceAgainst
    } else if structured_growth {
        Status::Unknown
    } else {
        match setup.cond {
            Condition::Q => {
                let c: Vec<f64> = marks.iter().map(|&m| ln_at(m)).collect();
                let stable = n >= 8 && c.windows(2).all(|w| (w[1] - w[0]).abs() < LN_1PCT);
                if stable {
                    Status::EvidenceFor
                } else {
                    Status::Unknown
                }
            }
            Condition::W => {
                let decay = n >= 8
                    && blocks.iter().all(|b| b.is_finite())
                    && blocks[0] > blocks[1]
                    && blocks[1] > blocks[2];
                if decay {
                    Status::EvidenceFor
                } else {
                    Status::Unknown
                }
            }
        }
    };
    verdict.status = status;
    verdict.checkpoints = checkpoints;
    if setup.cond == Condition::W {
        verdict.block_maxima = blocks.to_vec();
    }
    verdict.log_estimate = Some(late.approx() * LN_2);
    verdict.witnesses = records;
    verdict
}

/// Condition W_p with dimension s, scanning 0 ≤ j ≤ n.
pub fn check_w(fig: &BasicFigure<f64>, p: usize, s: f64, n: u64) -> Result<Verdict, CondError> {
    match check_corner(fig, p)? {
        AngleClass::Positive => return Ok(Verdict::analytic(Condition::W, p, s, n)),
        AngleClass::Unresolved => return Err(CondError::Unresolved(p)),
        AngleClass::Zero => {}
    }
    let dp = diophantine_params(fig, p)?;
    let gap = Gap::for_figure(fig, &dp);
    let (x, y, u) = gap.xyu();
    let setup = ScanSetup {
        cond: Condition::W,
        x,
        y,
        u,
        t: s,
        s,
        beta: dp.beta,
    };
    let mut v = scan(fig, &dp, setup, n);
    v.upsilon = upsilon_estimate(fig, p, 5);
    v.note = format!(
        "ρ(j,k) = (λ^j+μ^k)^s/|αλ^j−βμ^k| scanned for j ≤ {n}; {}",
        v.note
    );
    Ok(v)
}

/// Condition Q_p^t, scanning 0 ≤ j ≤ n.
pub fn check_q(fig: &BasicFigure<f64>, p: usize, t: f64, n: u64) -> Result<Verdict, CondError> {
    match check_corner(fig, p)? {
        AngleClass::Positive => return Ok(Verdict::analytic(Condition::Q, p, t, n)),
        AngleClass::Unresolved => return Err(CondError::Unresolved(p)),
        AngleClass::Zero => {}
    }
    let dp = diophantine_params(fig, p)?;
    let gap = Gap::for_figure(fig, &dp);
    let (x, y, u) = gap.xyu();
    let t_eff = t.max(1.0);
    let setup = ScanSetup {
        cond: Condition::Q,
        x,
        y,
        u,
        t: t_eff,
        s: 0.0,
        beta: dp.beta,
    };
    let mut v = scan(fig, &dp, setup, n);
    v.t = t;
    v.upsilon = upsilon_estimate(fig, p, 5);
    if t_eff == 1.0 {
        match dp.xy_rational {
            Some(true) => {
                v.status = Status::HoldsRationalRatio;
                v.note = "x/y rational: u − jx + ky stays away from 0".into();
            }
            Some(false) => {
                v.status = Status::EvidenceAgainst;
                v.note = "x/y irrational: {jx − ky} is dense, so no M exists at t = 1".into();
            }
            None => {}
        }
    }
    if v.note.is_empty() {
        v.note = format!("M = max e^(−j(t−1)x)/|u−jx+ky| scanned for j ≤ {n}");
    }
    Ok(v)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GlobalVerdict {
    pub condition: Condition,
    pub status: Status,
    /// Corner carrying the weakest verdict.
    pub cited_p: Option<usize>,
    pub implications: Vec<String>,
}

/// Conjunction over corners; the weakest status wins.
pub fn global_verdict(condition: Condition, verdicts: &[Verdict], t: f64, s: f64) -> GlobalVerdict {
    let worst = verdicts
        .iter()
        .max_by_key(|v| (v.status.weakness(), std::cmp::Reverse(v.p)));
    let status = worst.map(|v| v.status).unwrap_or(Status::HoldsAnalytic);
    let cited_p = worst
        .filter(|v| v.status != Status::HoldsAnalytic)
        .map(|v| v.p);
    let holds = matches!(
        status,
        Status::HoldsAnalytic | Status::HoldsRationalRatio | Status::EvidenceFor
    );
    let qual = if status == Status::EvidenceFor {
        " (bounded evidence)"
    } else {
        ""
    };
    let mut implications = Vec::new();
    if holds {
        match condition {
            Condition::W => implications.push(format!("s-quasi-arc{qual}")),
            Condition::Q if t < s => implications.push(format!("f is Whitney{qual}")),
            Condition::Q => {}
        }
    }
    GlobalVerdict {
        condition,
        status,
        cited_p,
        implications,
    }
}

/// Checks that verdicts listed in increasing t never get weaker.
pub fn monotone_in_t(verdicts: &[Verdict]) -> bool {
    let mut best: Option<u8> = None;
    for v in verdicts {
        let w = v.status.weakness();
        if let Some(b) = best {
            if b <= Status::EvidenceFor.weakness() && w > b.max(Status::EvidenceFor.weakness()) {
                return false;
            }
        }
        best = Some(best.map_or(w, |b| b.min(w)));
    }
    true
}

// ---------------------------------------------------------------------------
// empirical scans

pub const PAIR_CAP: u64 = 2_000_000;

/// Vertex-index pairs around each zero corner that pair Z_j with W_k.
pub fn straddling_pairs(fig: &BasicFigure<f64>, depth: usize) -> Vec<(usize, usize)> {
    let ell = fig.ell();
    let q = fig.q;
    let n = ell.pow(depth as u32);
    let mut out = Vec::new();
    for p in 1..ell {
        if classify_corner(fig, p).1 != AngleClass::Zero {
            continue;
        }
        let mut zs = Vec::new();
        let mut ws = Vec::new();
        for j in 0..depth.saturating_sub(1) {
            let d = j + 2;
            let lj = ell.pow(j as u32);
            let idx = (((p - 1) * lj + lj - 1) * ell + q) * ell.pow((depth - d) as u32);
            zs.push(idx);
            let widx = (p * ell.pow(j as u32 + 1) + q) * ell.pow((depth - d) as u32);
            ws.push(widx);
        }
        for &z in &zs {
            for &w in &ws {
                for dz in -2i64..=2 {
                    for dw in -2i64..=2 {
                        let a = z as i64 + dz;
                        let b = w as i64 + dw;
                        if a >= 0 && b as usize <= n && a < b {
                            out.push((a as usize, b as usize));
                        }
                    }
                }
            }
        }
        let zp = p * ell.pow(depth as u32 - 1);
        for a in 1..=8 {
            for b in 1..=8 {
                if zp >= a && zp + b <= n {
                    out.push((zp - a, zp + b));
                }
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Pairs to scan at a depth: all of them under the cap, otherwise seeded
/// random rows swept to the end plus the straddling pairs.
pub fn pair_plan(
    n_vertices: usize,
    cap: u64,
    seed: u64,
    extra: &[(usize, usize)],
) -> (Vec<(usize, usize)>, bool) {
    let total = (n_vertices as u64) * (n_vertices as u64 - 1) / 2;
    if total <= cap {
        let v = (0..n_vertices)
            .flat_map(|a| (a + 1..n_vertices).map(move |b| (a, b)))
            .collect();
        return (v, false);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = std::collections::BTreeSet::new();
    let mut budget = 0u64;
    while budget < cap && rows.len() < n_vertices - 1 {
        let a = rng.gen_range(0..n_vertices - 1);
        if rows.insert(a) {
            budget += (n_vertices - 1 - a) as u64;
        }
    }
    let mut v: Vec<(usize, usize)> = rows
        .iter()
        .flat_map(|&a| (a + 1..n_vertices).map(move |b| (a, b)))
        .collect();
    v.extend_from_slice(extra);
    v.sort_unstable();
    v.dedup();
    (v, true)
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuasiRow {
    pub depth: usize,
    pub pairs: u64,
    pub sampled: bool,
    pub sup_lower: f64,
    pub sup_upper: f64,
    /// Vertex pair realizing `sup_lower`.
    pub argmax: (usize, usize),
}

/// sup of L(x, y) = |Λ(x, y)|^t / |x − y| over vertex pairs, per depth.
pub fn empirical_quasi(
    sys: &ArcSystem<f64>,
    fig: Option<&BasicFigure<f64>>,
    t: f64,
    depths: std::ops::RangeInclusive<usize>,
    refine: usize,
    seed: u64,
) -> Vec<QuasiRow> {
    let oracle = SubarcOracle::new(sys.clone(), *depths.end(), refine);
    depths
        .map(|k| {
            let grid = crate::arc::vertices(sys, k);
            let n = grid.points.len();
            let extra = fig.map(|f| straddling_pairs(f, k)).unwrap_or_default();
            let (pairs, sampled) = pair_plan(n, PAIR_CAP, seed ^ k as u64, &extra);
            let (lo, hi, arg) = pairs
                .par_iter()
                .map(|&(a, b)| {
                    let d = (grid.points[a] - grid.points[b]).norm();
                    let (l, u) = oracle.bounds(a, b, k);
                    (l.powf(t) / d, u.powf(t) / d, (a, b))
                })
                .reduce(
                    || (0.0, 0.0, (0, 0)),
                    |x, y| {
                        let (l, a) = if y.0 > x.0 || (y.0 == x.0 && y.2 < x.2) {
                            (y.0, y.2)
                        } else {
                            (x.0, x.2)
                        };
                        (l, x.1.max(y.1), a)
                    },
                );
            QuasiRow {
                depth: k,
                pairs: pairs.len() as u64,
                sampled,
                sup_lower: lo,
                sup_upper: hi,
                argmax: arg,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModulusBin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
    /// sup |f(x) − f(y)| / |x − y| over pairs in the bin.
    pub sup: f64,
}

/// Per-scale suprema of |f(x) − f(y)|/|x − y| over depth-k vertex pairs.
pub fn empirical_whitney_modulus(
    sys: &ArcSystem<f64>,
    fig: Option<&BasicFigure<f64>>,
    s: f64,
    depth: usize,
    bins: usize,
    seed: u64,
) -> Vec<ModulusBin> {
    let grid = crate::arc::vertices(sys, depth);
    let f = f_values(sys, s, depth);
    let n = grid.points.len();
    let extra = fig.map(|g| straddling_pairs(g, depth)).unwrap_or_default();
    let (pairs, _) = pair_plan(n, PAIR_CAP, seed, &extra);
    let samples: Vec<(f64, f64)> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let d = (grid.points[a] - grid.points[b]).norm();
            (d, (f[b] - f[a]).abs() / d)
        })
        .collect();
    let (dmin, dmax) = samples
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &(d, _)| {
            (lo.min(d), hi.max(d))
        });
    let (l0, l1) = (dmin.ln(), dmax.ln());
    let width = ((l1 - l0) / bins as f64).max(1e-12);
    let mut out: Vec<ModulusBin> = (0..bins)
        .map(|i| ModulusBin {
            lo: (l0 + width * i as f64).exp(),
            hi: (l0 + width * (i + 1) as f64).exp(),
            count: 0,
            sup: 0.0,
        })
        .collect();
    for (d, r) in samples {
        let i = (((d.ln() - l0) / width) as usize).min(bins - 1);
        out[i].count += 1;
        out[i].sup = out[i].sup.max(r);
    }
    out
}

/// Empirical max of |Z_j − W_k| / |x − y| over depth-`depth` vertices x
/// near Z_j and y near W_k (j, k ≤ 3). Non-rigorous.
pub fn upsilon_estimate(fig: &BasicFigure<f64>, p: usize, depth: usize) -> Option<f64> {
    let ell = fig.ell();
    let q = fig.q;
    if depth < 3 || classify_corner(fig, p).1 != AngleClass::Zero {
        return None;
    }
    let sys = ArcSystem::from_figure(fig);
    let grid = crate::arc::vertices(&sys, depth);
    let pts = &grid.points;
    let scale = |idx: usize, d: usize| idx * ell.pow((depth - d) as u32);
    let z_idx = |j: usize| {
        let lj = ell.pow(j as u32);
        scale(((p - 1) * lj + lj - 1) * ell + q, j + 2)
    };
    let w_idx = |k: usize| scale(p * ell.pow(k as u32 + 1) + q, k + 2);
    let jmax = (depth - 2).min(3);
    let mut best = 0.0f64;
    for j in 0..jmax {
        for k in 0..jmax {
            let (zj, zn) = (z_idx(j), z_idx(j + 1));
            let (wk, wn) = (w_idx(k), w_idx(k + 1));
            let zw = (pts[zj] - pts[wk]).norm();
            let xs: Vec<usize> = (zj..=zn)
                .filter(|&i| (pts[i] - pts[zj]).norm() <= (pts[i] - pts[zn]).norm())
                .collect();
            let ys: Vec<usize> = (wn..=wk)
                .filter(|&i| (pts[i] - pts[wk]).norm() <= (pts[i] - pts[wn]).norm())
                .collect();
            for &a in &xs {
                for &b in &ys {
                    let d = (pts[a] - pts[b]).norm();
                    if d > 0.0 {
                        best = best.max(zw / d);
                    }
                }
            }
        }
    }
    Some(best)
}
