//! The heptagon family Ω_τ = ABCDEFG and the classification of Λ_τ as a
//! t-quasi-arc through the approximation property J_{(t−1)ζ}.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use num_complex::Complex;
use thiserror::Error;

use crate::conditions::{check_q, DiophantineParams, Status, Verdict};
use crate::dio::{j_a_evidence, Evidence, JaReport, Tau};
use crate::geom::{
    build_basic_figure_annotated, Annotations, BasicFigure, FamilyTag, ValidationReport,
};

/// ζ = log(15/7).
pub const ZETA: f64 = 0.762_140_052_046_896_8;

/// Accepted τ range (lower, upper), both exclusive.
pub const TAU_RANGE: (f64, f64) = (1.0, 1.01);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FamilyError {
    #[error("τ = {0} outside ({lo}, {hi})", lo = TAU_RANGE.0, hi = TAU_RANGE.1)]
    TauOutOfRange(f64),
    #[error("construction failed validation: {0}")]
    Invalid(ValidationReport),
}

/// How ν was obtained from τ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NuRule {
    /// ν = τ (irrational τ).
    Equal,
    /// ν = τ − (τ − 1)/√2 (rational τ).
    Shifted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OmegaTau {
    pub tau: Tau,
    pub tau_value: f64,
    pub nu: f64,
    pub nu_rule: NuRule,
    /// A, B, C, D, E, F, G.
    pub vertices: [Complex<f64>; 7],
    pub figure: BasicFigure<f64>,
}

impl OmegaTau {
    /// Projection E′ of E onto the baseline.
    pub fn e_projection(&self) -> f64 {
        self.vertices[4].re
    }
}

pub fn nu_of(tau: &Tau) -> (f64, NuRule) {
    let t = tau.approx();
    match tau {
        Tau::Rational(_) => (t - (t - 1.0) / SQRT_2, NuRule::Shifted),
        _ => (t, NuRule::Equal),
    }
}

pub fn build_omega_tau(tau: &Tau) -> Result<OmegaTau, FamilyError> {
    let t = tau.approx();
    if !(t > TAU_RANGE.0 && t < TAU_RANGE.1) {
        return Err(FamilyError::TauOutOfRange(t));
    }
    let (nu, nu_rule) = nu_of(tau);
    let r = 7.0f64 / 15.0;
    let a = Complex::new(0.0, 0.0);
    let b = Complex::new(r.powf(1.0 / t), 0.0);
    let cd = 0.5 * (PI / 18.0).tan();
    let cpt = Complex::new(0.5, cd);
    let d = Complex::new(0.5, 0.0);
    // ray DC points straight up; E sits π/9 clockwise from it
    let ang = FRAC_PI_2 - PI / 9.0;
    let e = d + Complex::from_polar(r.powf(1.0 / nu) * cd, ang);
    let f = Complex::new(8.0 / 15.0, 0.0);
    let g = Complex::new(1.0, 0.0);
    let vertices = [a, b, cpt, d, e, f, g];
    let ann = Annotations {
        zero_corners: vec![3],
        xy_rational: tau.is_irrational().map(|irr| !irr),
        family: Some(FamilyTag { tau: tau.clone() }),
    };
    let figure = build_basic_figure_annotated(&vertices, 2, ann).map_err(FamilyError::Invalid)?;
    Ok(OmegaTau {
        tau: tau.clone(),
        tau_value: t,
        nu,
        nu_rule,
        vertices,
        figure,
    })
}

/// Closed-form x = ζ, y = ζ/τ, u = ζ/ν together with α, β, λ, μ.
pub fn family_params(w: &OmegaTau) -> DiophantineParams {
    let r = 7.0f64 / 15.0;
    let cd = 0.5 * (PI / 18.0).tan();
    let ac = 0.5 / (PI / 18.0).cos();
    let de = r.powf(1.0 / w.nu) * cd;
    DiophantineParams {
        p: 3,
        alpha: cd * ac,
        beta: de * ac,
        lambda: r,
        mu: r.powf(1.0 / w.tau_value),
        x: ZETA,
        y: ZETA / w.tau_value,
        u: ZETA / w.nu,
        iota: Complex::from_polar(1.0, 8.0 * PI / 18.0),
        xy_rational: w.tau.is_irrational().map(|i| !i),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassifyReport {
    pub tau: String,
    pub t: f64,
    pub bound: u64,
    /// Verdict of the approximation-property route.
    pub number_theoretic: Status,
    pub ja: Option<JaReport>,
    /// check_Q at p = 3.
    pub geometric: Verdict,
    pub consistent: bool,
    pub note: String,
}

fn polarity(s: Status) -> Option<bool> {
    match s {
        Status::HoldsAnalytic | Status::HoldsRationalRatio | Status::EvidenceFor => Some(true),
        Status::EvidenceAgainst => Some(false),
        Status::Unknown => None,
    }
}

/// Runs J_{(t−1)ζ} evidence and check_Q(p = 3, t) and compares them.
pub fn classify(tau: &Tau, t: f64, n: u64) -> Result<ClassifyReport, FamilyError> {
    let w = build_omega_tau(tau)?;
    let (geometric, (number_theoretic, ja, note)) = rayon::join(
        || check_q(&w.figure, 3, t, n).expect("θ₃ is annotated zero"),
        || number_theoretic_route(tau, t, n),
    );
    let consistent = match (polarity(number_theoretic), polarity(geometric.status)) {
        (Some(x), Some(y)) => x == y,
        _ => true,
    };
    Ok(ClassifyReport {
        tau: tau.describe(),
        t,
        bound: n,
        number_theoretic,
        ja,
        geometric,
        consistent,
        note,
    })
}

fn number_theoretic_route(tau: &Tau, t: f64, n: u64) -> (Status, Option<JaReport>, String) {
    if t <= 1.0 {
        match tau.is_irrational() {
            Some(false) => (
                Status::HoldsRationalRatio,
                None,
                "x/y = τ rational: 1-quasi-arc".to_string(),
            ),
            Some(true) => (
                Status::EvidenceAgainst,
                None,
                "x/y = τ irrational: not a 1-quasi-arc".to_string(),
            ),
            None => (
                Status::Unknown,
                None,
                "rationality of a declared-precision τ is undecided".to_string(),
            ),
        }
    } else {
        match tau {
            Tau::Rational(_) => (
                Status::HoldsRationalRatio,
                None,
                "rational τ: 1-quasi-arc, hence t-quasi for every t ≥ 1".to_string(),
            ),
            _ => {
                let a = (t - 1.0) * ZETA;
                let rep = j_a_evidence(tau, a, n.max(1)).expect("irrational τ");
                let st = match rep.verdict {
                    Evidence::For => Status::EvidenceFor,
                    Evidence::Against => Status::EvidenceAgainst,
                    Evidence::Unknown => Status::Unknown,
                };
                (st, Some(rep), format!("J_a with a = (t−1)ζ = {a}"))
            }
        }
    }
}

/// log(|CD|·|CG| / (|DE|·|AC|)) evaluated on the built vertices.
pub fn geometric_u(w: &OmegaTau) -> f64 {
    let [a, _, c, d, e, _, g] = w.vertices;
    ((c - d).norm() * (c - g).norm() / ((d - e).norm() * (c - a).norm())).ln()
}
