//! One line per acceptance criterion, then a single assertion over all.

use std::f64::consts::{FRAC_PI_3, LN_2, PI};
use std::io::Write;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;
use ssarc::arc::{arc_check, ArcSystem, Certificate, Word};
use ssarc::conditions::{
    angle_profile, check_q, check_w, empirical_quasi, empirical_whitney_modulus, Status,
};
use ssarc::dio::{
    j_a_structured, structured_offset, tau_7_11, tau_7_11_exact, tau_7_12_exact, tau_7_13,
    tau_7_14, truncation_value, Index, Log2Range, Tau,
};
use ssarc::family::{build_omega_tau, family_params, ZETA};
use ssarc::geom::{build_basic_figure, koch_vertices};
use ssarc::spectrum::{
    all_words, check_cylinder_inequality, check_forget, cylinder_measure, epsilon_sequence,
    f_values, hausdorff_dimension, iterate_system, whitney_measure_cylinder, whitney_weights,
    WhitneyWeights,
};
use ssarc::{BasicFigure, Complex};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn koch() -> BasicFigure {
    build_basic_figure(&koch_vertices(), 2).unwrap()
}

fn omega_rational() -> BasicFigure {
    build_omega_tau(&Tau::Rational(BigRational::new(2001.into(), 2000.into())))
        .unwrap()
        .figure
}

fn statuses(fig: &BasicFigure, s: f64) -> Vec<Status> {
    let mut out = Vec::new();
    for p in 1..fig.ell() {
        out.push(check_w(fig, p, s, 256).unwrap().status);
        for t in [1.0, 2.0] {
            out.push(check_q(fig, p, t, 256).unwrap().status);
        }
    }
    out
}

fn c1_koch_pipeline() -> Outcome {
    let fig = build_basic_figure(&koch_vertices(), 2).map_err(|e| format!("validate: {e}"))?;
    let s: f64 = hausdorff_dimension(&fig.ratios).s;
    let want = 4f64.ln() / 3f64.ln();
    ensure((s - want).abs() < 1e-10, format!("s = {s}"))?;
    let prof = angle_profile(&fig);
    ensure(
        prof.eta1.abs() < 1e-12 && prof.eta2.abs() < 1e-12,
        format!("η = {} {}", prof.eta1, prof.eta2),
    )?;
    // independent oracle: S_j(z) = z_{j−1} + (z_j − z_{j−1}) z on the raw vertices
    let v: Vec<Complex<f64>> = koch_vertices();
    let img = |j: usize| v[j - 1] + (v[j] - v[j - 1]) * v[2];
    let th1 = ((img(1) - v[1]) / (img(2) - v[1]))
        .arg()
        .rem_euclid(2.0 * PI);
    ensure(
        (th1 - FRAC_PI_3).abs() < 1e-10,
        format!("oracle θ₁ = {th1}"),
    )?;
    ensure(
        (prof.theta[0].value - FRAC_PI_3).abs() < 1e-10,
        format!("θ₁ = {}", prof.theta[0].value),
    )?;
    let st = statuses(&fig, s);
    ensure(
        st.iter().all(|&x| x == Status::HoldsAnalytic),
        format!("verdicts {st:?}"),
    )?;
    Ok(format!(
        "s = {s:.12}, θ₁ = {:.12}, {} verdicts HoldsAnalytic",
        prof.theta[0].value,
        st.len()
    ))
}

fn measure_suite(fig: &BasicFigure) -> Result<f64, String> {
    let s = hausdorff_dimension(&fig.ratios).s;
    let ell = fig.ell();
    let mut worst = 0.0f64;
    for d in 0..=5 {
        for w in all_words(ell, d) {
            let parent = cylinder_measure(&fig.ratios, &w, s);
            let kids: f64 = (1..=ell as u16)
                .map(|j| cylinder_measure(&fig.ratios, &w.push(j), s))
                .sum();
            worst = worst.max((kids - parent).abs());
        }
    }
    ensure(worst <= 1e-12, format!("additivity defect {worst:e}"))?;
    let f = f_values(&ArcSystem::from_figure(fig), s, 6);
    ensure(
        f.windows(2).all(|p| p[0] < p[1]),
        "f not strictly increasing",
    )?;
    ensure(
        f[0] == 0.0 && *f.last().unwrap() == 1.0,
        format!("f endpoints {} {}", f[0], f.last().unwrap()),
    )?;
    Ok(worst)
}

fn c2_measure() -> Outcome {
    let a = measure_suite(&koch())?;
    let b = measure_suite(&omega_rational())?;
    Ok(format!(
        "additivity defects {a:.1e} (Koch), {b:.1e} (Ω); f strictly increasing, f(end) = 1"
    ))
}

fn perturbed(w: &WhitneyWeights<f64>, shift: f64) -> WhitneyWeights<f64> {
    let mut bad = w.clone();
    let ell = w.ratios.len();
    for row in bad.table.iter_mut() {
        for j in 1..ell - 1 {
            row[j] = w.ratios[j].powf(w.s_prime + shift);
        }
    }
    bad
}

fn c3_whitney_measure() -> Outcome {
    let base = ArcSystem::from_figure(&koch());
    let it = iterate_system(&base, 2);
    ensure(
        it.ratios.len() == 16 && it.ratios.iter().all(|r| (r - 1.0 / 9.0).abs() < 1e-15),
        "iterated ratios",
    )?;
    let (ok, margin) = check_forget(&it.ratios, 1.1);
    ensure(ok, format!("check_forget margin {margin}"))?;
    let eps = epsilon_sequence(&it.system, 6, 2).map_err(|e| e.to_string())?;
    let w4 = whitney_weights(&it.ratios, 1.1, &eps, 4).map_err(|e| e.to_string())?;
    let want = 14f64.ln() / 9f64.ln();
    ensure(
        (w4.s_prime - want).abs() < 1e-12,
        format!("s′ = {}", w4.s_prime),
    )?;
    let s = hausdorff_dimension(&it.ratios).s;
    for k in 1..=4 {
        let tk = w4.tau[k - 1];
        let cap = (1.0f64 / 9.0).powf(s).min(eps[k - 1].powf(1.1));
        ensure(
            tk <= cap,
            format!("(i) fails at level {k}: τ = {tk}, cap = {cap}"),
        )?;
        for d in [1u16, 16] {
            let word = Word(vec![d; k]);
            let mu = whitney_measure_cylinder(&word, &w4).unwrap();
            let prod = w4.tau[..k].iter().fold(1.0, |a, b| a * b);
            ensure(
                mu == prod,
                format!("(iv) fails at level {k}: {mu} vs {prod}"),
            )?;
        }
    }
    let w6 = whitney_weights(&it.ratios, 1.1, &eps, 6).map_err(|e| e.to_string())?;
    let good = check_cylinder_inequality(&w6, 3, 3).map_err(|e| e.to_string())?;
    ensure(
        good.violations == 0,
        format!("cylinder inequality: {} violations", good.violations),
    )?;
    let bad = check_cylinder_inequality(&perturbed(&w6, -0.3), 3, 3).map_err(|e| e.to_string())?;
    ensure(bad.violations > 0, "negative control not flagged")?;
    Ok(format!(
        "s′ = {:.12}, cylinder inequality {} pairs clean (slack {:.3e}), control {} violations",
        w4.s_prime, good.pairs, good.worst_slack, bad.violations
    ))
}

fn c4_family_geometry() -> Outcome {
    let c = BigRational::new(BigInt::one(), BigInt::from(512));
    let taus = vec![
        (
            "2001/2000",
            Tau::Rational(BigRational::new(2001.into(), 2000.into())),
        ),
        (
            "7.11",
            Tau::Stream(tau_7_11_exact(c.clone(), 8, 3, 1_000_000).unwrap()),
        ),
        (
            "7.12",
            Tau::Stream(tau_7_12_exact(c, 8, 3, 1_000_000).unwrap()),
        ),
        ("7.13", Tau::Stream(tau_7_13(8, 3).unwrap())),
        ("7.14", Tau::Stream(tau_7_14(8, 3).unwrap())),
    ];
    let mut worst = 0.0f64;
    for (name, tau) in taus {
        let w = build_omega_tau(&tau).map_err(|e| format!("{name}: {e}"))?;
        let th3 = angle_profile(&w.figure).theta[2].value;
        ensure(th3.abs() < 1e-12, format!("{name}: θ₃ = {th3}"))?;
        let f = family_params(&w);
        let d = ssarc::conditions::diophantine_params(&w.figure, 3).map_err(|e| e.to_string())?;
        for (a, b) in [
            (f.alpha, d.alpha),
            (f.beta, d.beta),
            (f.lambda, d.lambda),
            (f.mu, d.mu),
            (f.x, d.x),
            (f.y, d.y),
            (f.u, d.u),
        ] {
            worst = worst.max((a - b).abs());
        }
        let v = arc_check(&w.figure, 1000).map_err(|e| format!("{name}: {e}"))?;
        ensure(
            v.certificates
                .iter()
                .any(|(p, c)| *p == 3 && *c == Certificate::FamilyAnalytic),
            format!("{name}: no FamilyAnalytic certificate"),
        )?;
    }
    ensure(worst < 1e-10, format!("parameter mismatch {worst:e}"))?;
    Ok(format!(
        "5 instances built, θ₃ = 0, params agree to {worst:.1e}, FamilyAnalytic"
    ))
}

fn c5_rational_ratio() -> Outcome {
    let fig = omega_rational();
    let v = check_q(&fig, 3, 1.0, 10_000).map_err(|e| e.to_string())?;
    ensure(
        v.status == Status::HoldsRationalRatio,
        format!("status {:?}", v.status),
    )?;
    let rows = empirical_quasi(&ArcSystem::from_figure(&fig), Some(&fig), 1.0, 3..=6, 1, 0);
    let sups: Vec<f64> = rows.iter().map(|r| r.sup_lower).collect();
    let (a, b) = (sups[2], sups[3]);
    ensure((a - b).abs() <= 0.1 * a.max(b), format!("suprema {sups:?}"))?;
    Ok(format!(
        "HoldsRationalRatio; sup L by depth 3..6 = {sups:.4?}"
    ))
}

fn c6_failure_witnesses() -> Outcome {
    let s = tau_7_14(8, 3).unwrap();
    let ws = j_a_structured(&s, ZETA).map_err(|e| e.to_string())?;
    ensure(ws.len() >= 2, format!("{} computable witnesses", ws.len()))?;
    ensure(ws[1].log2_q.below(&ws[0].log2_q), "q not decreasing")?;
    // |j_i τ − k_i| < 2^{−j_i²+1}, with j_i² = 2^{2n_i}
    for i in 1..=2 {
        let jsq = BigInt::one() << (2 * s.exponents()[i - 1].to_string().parse::<usize>().unwrap());
        ensure(
            structured_offset(&s, i) == Log2Range::int_span(-jsq.clone(), -jsq + 1),
            format!("offset at i = {i}"),
        )?;
    }
    // exact check of the first witness on the two-term truncation
    let j1 = BigRational::from_integer(BigInt::from(512));
    let k1 = BigRational::from_integer(BigInt::from(513));
    let gap = &j1 * truncation_value(&s, 2).unwrap() - k1;
    let bound = BigRational::new(BigInt::from(2), BigInt::one() << 262_144usize);
    ensure(
        gap > BigRational::from_integer(0.into()) && gap < bound,
        "exact witness bound",
    )?;
    let v = check_q(
        &build_omega_tau(&Tau::Stream(s)).unwrap().figure,
        3,
        2.0,
        100_000,
    )
    .map_err(|e| e.to_string())?;
    ensure(
        v.status == Status::EvidenceAgainst,
        format!("status {:?}", v.status),
    )?;
    let has = |n: u32| {
        v.witnesses.iter().any(|w| match &w.j {
            Index::Small(j) => *j == 1u64 << n.min(63) && n < 64,
            Index::Pow2(e) => *e == BigUint::from(n),
            _ => false,
        })
    };
    ensure(
        has(9) && has(262_153),
        "witnesses at 2^9 and 2^262153 missing",
    )?;
    Ok(format!(
        "log2 q = {} > {}; check_Q(t=2) EvidenceAgainst with j ∈ {{2^9, 2^262153}}",
        ws[0].log2_q.describe(),
        ws[1].log2_q.describe()
    ))
}

fn c7_goldens() -> Outcome {
    let e = |v: &[BigUint]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    let a = e(tau_7_11(LN_2 / 512.0, 8, 2).unwrap().exponents());
    let b = e(tau_7_13(8, 2).unwrap().exponents());
    let c = e(tau_7_14(8, 2).unwrap().exponents());
    ensure(
        a == "9,20" && b == "16,272" && c == "9,262153",
        format!("{a} | {b} | {c}"),
    )?;
    Ok(format!("7.11 ({a}), 7.13 ({b}), 7.14 ({c})"))
}

fn c8_negative_control() -> Outcome {
    let seg = ArcSystem::segment();
    let bins = empirical_whitney_modulus(&seg, None, 1.0, 10, 8, 0);
    for b in &bins {
        ensure(
            b.count > 0 && (b.sup - 1.0).abs() < 1e-9,
            format!("bin {b:?}"),
        )?;
    }
    let rows = empirical_quasi(&seg, None, 1.0, 3..=8, 1, 0);
    for r in &rows {
        ensure(
            (r.sup_lower - 1.0).abs() < 1e-12,
            format!("sup L = {} at depth {}", r.sup_lower, r.depth),
        )?;
    }
    Ok(format!(
        "{} modulus bins with sup = 1, sup L = 1 at depths 3..8",
        bins.len()
    ))
}

fn c9_scale_invariance() -> Outcome {
    let a = Complex::from_polar(2.0, PI / 7.0);
    let moved: Vec<Complex<f64>> = koch_vertices::<f64>().iter().map(|z| a * z + 3.0).collect();
    let fig2 = build_basic_figure(&moved, 2).map_err(|e| e.to_string())?;
    let fig1 = koch();
    let (p1, p2) = (angle_profile(&fig1), angle_profile(&fig2));
    let mut worst = (p1.eta1 - p2.eta1).abs().max((p1.eta2 - p2.eta2).abs());
    for (x, y) in p1.theta.iter().zip(&p2.theta) {
        worst = worst.max((x.value - y.value).abs());
    }
    ensure(worst <= 1e-10, format!("angle drift {worst:e}"))?;
    let s = hausdorff_dimension(&fig1.ratios).s;
    ensure(statuses(&fig1, s) == statuses(&fig2, s), "verdicts differ")?;
    Ok(format!("max angle drift {worst:.1e}, verdicts unchanged"))
}

#[test]
fn acceptance() {
    let criteria: Vec<(&str, Option<u64>, fn() -> Outcome)> = vec![
        ("1 Koch pipeline", Some(5), c1_koch_pipeline),
        ("2 measure suite", Some(30), c2_measure),
        ("3 Whitney measure suite", Some(60), c3_whitney_measure),
        ("4 Ω_τ geometry", None, c4_family_geometry),
        ("5 rational-ratio route", None, c5_rational_ratio),
        ("6 failure witnesses", Some(60), c6_failure_witnesses),
        ("7 constructor goldens", None, c7_goldens),
        ("8 negative control", None, c8_negative_control),
        ("9 scale invariance", None, c9_scale_invariance),
    ];
    let mut out = std::io::stdout().lock();
    writeln!(out).unwrap();
    let mut failed = Vec::new();
    for (name, limit, run) in criteria {
        let t0 = Instant::now();
        let mut res = run();
        let dt = t0.elapsed();
        if let (Ok(_), Some(l)) = (&res, limit) {
            if dt > Duration::from_secs(l) {
                res = Err(format!("runtime {dt:.2?} over {l} s"));
            }
        }
        match &res {
            Ok(msg) => writeln!(out, "PASS  criterion {name} ({dt:.2?}): {msg}").unwrap(),
            Err(msg) => {
                writeln!(out, "FAIL  criterion {name} ({dt:.2?}): {msg}").unwrap();
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}
