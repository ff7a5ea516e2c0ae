use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Map, Value};
use ssarc::arc::{arc_check, vertices, ArcStatus, Certificate, DEFAULT_ARC_BOUND};
use ssarc::conditions::{
    angle_profile, check_q, check_w, empirical_quasi, empirical_whitney_modulus, global_verdict,
    monotone_in_t, CondError, Condition, Status, Verdict, Witness,
};
use ssarc::dio::{Evidence, JaReport, Log2Range, Tau};
use ssarc::family::{build_omega_tau, classify as classify_family, NuRule};
use ssarc::geom::AngleClass;
use ssarc::spectrum::{
    check_cylinder_inequality, check_forget, epsilon_sequence, f_values, hausdorff_dimension,
    iterate_system, whitney_f_values, whitney_weights,
};
use ssarc::{ArcSystem, BasicFigure, Complex};

use crate::spec::{self, exponents_as_strings, LoadError, Loaded};
use crate::{ConditionsArgs, MeasureArgs};

pub struct Ctx {
    pub argv: Vec<String>,
    pub seed: u64,
}

pub struct Outcome {
    pub report: Value,
    pub code: u8,
}

const ASSUMPTIONS: &[&str] = &[
    "H^s is normalized so that the attractor has measure 1; cylinder measures are r_w^s",
    "θ_p = 0 only where declared (zero_corners or family membership)",
    "EvidenceFor and EvidenceAgainst summarize a bounded scan, not a proof",
    "Υ values and empirical suprema are sampled estimates",
];

fn report(ctx: &Ctx, digest: Option<&str>, bounds: Value, result: Value) -> Outcome {
    let mut m = Map::new();
    m.insert("command".into(), json!(ctx.argv));
    if let Some(d) = digest {
        m.insert("digest".into(), json!(d));
    }
    m.insert("assumptions".into(), json!(ASSUMPTIONS));
    m.insert("bounds".into(), bounds);
    m.insert("result".into(), result);
    Outcome {
        report: Value::Object(m),
        code: 0,
    }
}

fn load(path: &Path) -> Result<Loaded> {
    spec::load_figure(path).map_err(|e| match e {
        LoadError::Invalid(r) => anyhow!(
            "{} is not a basic figure: {}",
            path.display(),
            r.to_string().trim()
        ),
        LoadError::Other(e) => e,
    })
}

fn point(z: Complex<f64>) -> Value {
    json!([z.re, z.im])
}

fn log2_json(r: &Log2Range) -> Value {
    let fin = |v: f64| if v.is_finite() { json!(v) } else { Value::Null };
    json!({ "approx": r.describe(), "lo": fin(r.lo_f64()), "hi": fin(r.hi_f64()) })
}

fn witness_json(w: &Witness) -> Value {
    json!({
        "j": w.j.to_string(),
        "k": w.k.to_string(),
        "log2_value": log2_json(&w.log2_value),
        "structured": w.structured,
    })
}

fn cond_name(c: Condition) -> &'static str {
    match c {
        Condition::W => "W",
        Condition::Q => "Q",
    }
}

fn verdict_json(v: &Verdict) -> Value {
    json!({
        "condition": cond_name(v.condition),
        "p": v.p,
        "t": v.t,
        "status": v.status.name(),
        "bound": v.bound,
        "angle_p": v.angle_p,
        "checkpoints": v.checkpoints.iter().map(|(n, l)| json!({ "n": n, "ln_max": l })).collect::<Vec<_>>(),
        "block_maxima_ln": v.block_maxima,
        "witnesses": v.witnesses.iter().map(witness_json).collect::<Vec<_>>(),
        "log_estimate": v.log_estimate,
        "upsilon_empirical": v.upsilon,
        "note": v.note,
    })
}

fn class_name(c: AngleClass) -> &'static str {
    match c {
        AngleClass::Zero => "Zero",
        AngleClass::Positive => "Positive",
        AngleClass::Unresolved => "Unresolved",
    }
}

fn figure_json(fig: &BasicFigure) -> Value {
    json!({
        "ell": fig.ell(),
        "q": fig.q,
        "vertices": fig.vertices.iter().map(|&z| point(z)).collect::<Vec<_>>(),
        "ratios": fig.ratios,
        "zero_corners": fig.annotations.zero_corners,
        "xy_rational": fig.annotations.xy_rational,
        "family_tau": fig.annotations.family.as_ref().map(|f| f.tau.describe()),
    })
}

pub fn validate(ctx: &Ctx, path: &Path) -> Result<Outcome> {
    let loaded = match spec::load_figure(path) {
        Ok(l) => l,
        Err(LoadError::Other(e)) => return Err(e),
        Err(LoadError::Invalid(r)) => {
            let violations: Vec<Value> = r
                .violations
                .iter()
                .map(|v| json!({ "clause": format!("{:?}", v.clause), "indices": v.indices, "margin": v.margin }))
                .collect();
            let mut out = report(
                ctx,
                None,
                json!({}),
                json!({ "pass": false, "violations": violations }),
            );
            out.code = 1;
            return Ok(out);
        }
    };
    let fig = &loaded.figure;
    let arc = match arc_check(fig, DEFAULT_ARC_BOUND) {
        Ok(v) => {
            let certs: Vec<Value> = v
                .certificates
                .iter()
                .map(|(p, c)| match c {
                    Certificate::AnglePositive => json!({ "p": p, "kind": "AnglePositive" }),
                    Certificate::FamilyAnalytic => json!({ "p": p, "kind": "FamilyAnalytic" }),
                    Certificate::BoundedDiophantine { n, min_margin } => {
                        json!({ "p": p, "kind": "BoundedDiophantine", "n": n, "min_margin": min_margin })
                    }
                })
                .collect();
            let status = match v.status {
                ArcStatus::Arc => "Arc",
                ArcStatus::NotArc => "NotArc",
                ArcStatus::ArcUpToBound => "ArcUpToBound",
                ArcStatus::Unknown => "Unknown",
            };
            json!({ "status": status, "certificates": certs, "witness": v.witness })
        }
        Err(e) => json!({ "status": "Unknown", "error": e.to_string() }),
    };
    Ok(report(
        ctx,
        Some(&loaded.digest),
        json!({ "arc_scan_bound": DEFAULT_ARC_BOUND }),
        json!({
            "pass": true,
            "exact_input": loaded.exact,
            "figure": figure_json(fig),
            "family_nu": loaded.omega.as_ref().map(|w| w.nu),
            "arc": arc,
        }),
    ))
}

fn fmt6(v: f64) -> String {
    let s = format!("{v:.6}");
    if s.trim_start_matches('-')
        .bytes()
        .all(|b| b == b'0' || b == b'.')
    {
        "0.000000".to_string()
    } else {
        s
    }
}

pub fn render(ctx: &Ctx, path: &Path, depth: usize, out: &Path) -> Result<Outcome> {
    let loaded = load(path)?;
    let sys = ArcSystem::from_figure(&loaded.figure);
    let count = (loaded.figure.ell() as f64).powi(depth as i32) + 1.0;
    if count > 2e7 {
        bail!("depth {depth} gives {count:e} vertices; pick a smaller depth");
    }
    let pts = vertices(&sys, depth).points;
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for z in &pts {
        x0 = x0.min(z.re);
        x1 = x1.max(z.re);
        y0 = y0.min(-z.im);
        y1 = y1.max(-z.im);
    }
    let pad = 0.02 * (x1 - x0).max(y1 - y0);
    let mut svg = String::new();
    writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{} {} {} {}">"#,
        fmt6(x0 - pad),
        fmt6(y0 - pad),
        fmt6(x1 - x0 + 2.0 * pad),
        fmt6(y1 - y0 + 2.0 * pad)
    )?;
    svg.push_str(r#"<polyline fill="none" stroke="black" stroke-width="0.002" points=""#);
    for (i, z) in pts.iter().enumerate() {
        if i > 0 {
            svg.push(' ');
        }
        write!(svg, "{},{}", fmt6(z.re), fmt6(-z.im))?;
    }
    svg.push_str("\"/>\n</svg>\n");
    std::fs::write(out, svg).with_context(|| format!("writing {}", out.display()))?;
    Ok(report(
        ctx,
        Some(&loaded.digest),
        json!({ "depth": depth }),
        json!({ "out": out.display().to_string(), "vertex_count": pts.len() }),
    ))
}

pub fn dimension(ctx: &Ctx, path: &Path) -> Result<Outcome> {
    let loaded = load(path)?;
    let d = hausdorff_dimension(&loaded.figure.ratios);
    Ok(report(
        ctx,
        Some(&loaded.digest),
        json!({}),
        json!({ "s": d.s, "residual": d.residual, "ratios": loaded.figure.ratios }),
    ))
}

pub fn angles(ctx: &Ctx, path: &Path) -> Result<Outcome> {
    let loaded = load(path)?;
    let a = angle_profile(&loaded.figure);
    let theta: Vec<Value> = a
        .theta
        .iter()
        .map(|e| json!({ "p": e.p, "value": e.value, "radius": e.radius, "class": class_name(e.class) }))
        .collect();
    Ok(report(
        ctx,
        Some(&loaded.digest),
        json!({}),
        json!({
            "theta": theta,
            "eta1": a.eta1,
            "eta2": a.eta2,
            "eta0": a.eta0,
            "theta_min": a.theta_min,
            "xi": a.xi,
            "rho": a.rho,
            "psi": a.psi,
            "regular": a.regular(),
            "unresolved": a.unresolved,
        }),
    ))
}

pub fn conditions(ctx: &Ctx, args: &ConditionsArgs) -> Result<Outcome> {
    let loaded = load(&args.spec)?;
    let fig = &loaded.figure;
    let s = hausdorff_dimension(&fig.ratios).s;
    let mut ts = args.t.clone();
    if ts.iter().any(|t| !(t.is_finite() && *t >= 1.0)) {
        bail!("every t must be a finite number ≥ 1");
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup();

    let mut errors: Vec<Value> = Vec::new();
    let mut note_err = |cond: &str, p: usize, t: Option<f64>, e: CondError| {
        errors.push(json!({ "condition": cond, "p": p, "t": t, "error": e.to_string() }));
    };
    let mut w_all = Vec::new();
    let mut q_by_t: Vec<Vec<Verdict>> = vec![Vec::new(); ts.len()];
    let mut corners = Vec::new();
    for p in 1..fig.ell() {
        let w = check_w(fig, p, s, args.bound);
        let qs: Vec<Result<Verdict, CondError>> =
            ts.iter().map(|&t| check_q(fig, p, t, args.bound)).collect();
        let mut entry = Map::new();
        entry.insert("p".into(), json!(p));
        match w {
            Ok(v) => {
                entry.insert("W".into(), verdict_json(&v));
                w_all.push(v);
            }
            Err(e) => note_err("W", p, None, e),
        }
        let mut qj = Vec::new();
        let mut ok_q = Vec::new();
        for (i, q) in qs.into_iter().enumerate() {
            match q {
                Ok(v) => {
                    qj.push(verdict_json(&v));
                    ok_q.push(v.clone());
                    q_by_t[i].push(v);
                }
                Err(e) => note_err("Q", p, Some(ts[i]), e),
            }
        }
        entry.insert("Q".into(), Value::Array(qj));
        entry.insert("monotone_in_t".into(), json!(monotone_in_t(&ok_q)));
        corners.push(Value::Object(entry));
    }

    let degrade = |g: ssarc::conditions::GlobalVerdict, failed: bool| {
        let status = if failed {
            Status::Unknown.name()
        } else {
            g.status.name()
        };
        json!({
            "condition": cond_name(g.condition),
            "status": status,
            "cited_p": g.cited_p,
            "implications": if failed { vec![] } else { g.implications },
        })
    };
    let w_failed = errors.iter().any(|e| e["condition"] == "W");
    let global_w = degrade(global_verdict(Condition::W, &w_all, 1.0, s), w_failed);
    let global_q: Vec<Value> = ts
        .iter()
        .zip(&q_by_t)
        .map(|(&t, vs)| {
            let failed = errors
                .iter()
                .any(|e| e["condition"] == "Q" && e["t"] == json!(t));
            let mut g = degrade(global_verdict(Condition::Q, vs, t, s), failed);
            g["t"] = json!(t);
            g
        })
        .collect();

    let mut result = json!({
        "s": s,
        "corners": corners,
        "errors": errors,
        "global": { "W": global_w, "Q": global_q },
    });

    if args.depth >= 3 {
        let sys = ArcSystem::from_figure(fig);
        let quasi: Vec<Value> = ts
            .iter()
            .map(|&t| {
                let rows = empirical_quasi(&sys, Some(fig), t, 3..=args.depth, 2, ctx.seed);
                let rows: Vec<Value> = rows
                    .iter()
                    .map(|r| {
                        json!({
                            "depth": r.depth, "pairs": r.pairs, "sampled": r.sampled,
                            "sup_lower": r.sup_lower, "sup_upper": r.sup_upper, "argmax": [r.argmax.0, r.argmax.1],
                        })
                    })
                    .collect();
                json!({ "t": t, "rows": rows })
            })
            .collect();
        let bins: Vec<Value> =
            empirical_whitney_modulus(&sys, Some(fig), s, args.depth, 8, ctx.seed)
                .iter()
                .map(|b| json!({ "lo": b.lo, "hi": b.hi, "count": b.count, "sup": b.sup }))
                .collect();
        result["empirical"] = json!({ "quasi_arc": quasi, "whitney_modulus": bins });
    }

    if let Some(path) = &args.csv {
        let mut w =
            csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record([
            "condition",
            "p",
            "t",
            "status",
            "bound",
            "log_estimate",
            "witnesses",
        ])?;
        let rows = w_all.iter().chain(q_by_t.iter().flatten());
        let mut rows: Vec<&Verdict> = rows.collect();
        rows.sort_by(|a, b| {
            (cond_name(a.condition), a.p)
                .cmp(&(cond_name(b.condition), b.p))
                .then(a.t.total_cmp(&b.t))
        });
        for v in rows {
            let wit: Vec<String> = v
                .witnesses
                .iter()
                .map(|x| format!("({},{})", x.j, x.k))
                .collect();
            w.write_record([
                cond_name(v.condition).to_string(),
                v.p.to_string(),
                v.t.to_string(),
                v.status.name().to_string(),
                v.bound.to_string(),
                v.log_estimate.map(|x| x.to_string()).unwrap_or_default(),
                wit.join(" "),
            ])?;
        }
        w.flush()?;
    }

    Ok(report(
        ctx,
        Some(&loaded.digest),
        json!({ "scan_bound": args.bound, "empirical_depth": args.depth, "seed": ctx.seed }),
        result,
    ))
}

fn evidence_name(e: Evidence) -> &'static str {
    match e {
        Evidence::For => "For",
        Evidence::Against => "Against",
        Evidence::Unknown => "Unknown",
    }
}

fn ja_json(r: &JaReport) -> Value {
    json!({
        "a": r.a,
        "j_max": r.j_max,
        "verdict": evidence_name(r.verdict),
        "min_log2_q": r.min_log2_q.as_ref().map(log2_json),
        "witnesses": r.witnesses.iter().map(|w| json!({
            "j": w.j.to_string(), "k": w.k.to_string(),
            "log2_q": log2_json(&w.log2_q), "structured": w.structured,
        })).collect::<Vec<_>>(),
        "unresolved": r.unresolved,
    })
}

pub fn classify(ctx: &Ctx, tau_src: &str, t: f64, bound: u64) -> Result<Outcome> {
    if !(t.is_finite() && t >= 1.0) {
        bail!("t must be a finite number ≥ 1");
    }
    let tau = spec::parse_tau(tau_src)?;
    let w = build_omega_tau(&tau)?;
    let rep = classify_family(&tau, t, bound)?;
    let nu_rule = match w.nu_rule {
        NuRule::Equal => "nu = tau",
        NuRule::Shifted => "nu = tau - (tau - 1)/sqrt(2)",
    };
    Ok(report(
        ctx,
        Some(&spec::digest(&w.figure)),
        json!({ "scan_bound": bound }),
        json!({
            "tau": rep.tau,
            "tau_value": w.tau_value,
            "nu": w.nu,
            "nu_rule": nu_rule,
            "t": t,
            "vertices": w.vertices.iter().map(|&z| point(z)).collect::<Vec<_>>(),
            "number_theoretic": { "status": rep.number_theoretic.name(), "ja": rep.ja.as_ref().map(ja_json) },
            "geometric": verdict_json(&rep.geometric),
            "consistent": rep.consistent,
            "note": rep.note,
        }),
    ))
}

pub fn construct(ctx: &Ctx, kind: &str, params: &str) -> Result<Outcome> {
    let Tau::Stream(s) = spec::parse_construction(kind, params)? else {
        unreachable!("constructions produce streams")
    };
    let gaps: Vec<String> = (1..=s.terms()).map(|i| s.gap(i).to_string()).collect();
    let first = s.exponents().first().map(|n| n.to_string());
    Ok(report(
        ctx,
        None,
        json!({ "budget_bits": s.budget_bits() }),
        json!({
            "construction": s.construction().name(),
            "nu": s.nu(),
            "terms": s.terms(),
            "exponents": exponents_as_strings(s.exponents()),
            "gaps": gaps,
            "materializable_terms": s.materializable_terms(),
            "approx": s.approx(),
            "first_exponent": first,
        }),
    ))
}

pub fn measure(ctx: &Ctx, args: &MeasureArgs) -> Result<Outcome> {
    let loaded = load(&args.spec)?;
    let fig = &loaded.figure;
    let sys = ArcSystem::from_figure(fig);
    let count = (fig.ell() as f64).powi(args.depth as i32) + 1.0;
    if count > 2e7 {
        bail!(
            "depth {} gives {count:e} vertices; pick a smaller depth",
            args.depth
        );
    }
    let s = hausdorff_dimension(&fig.ratios).s;
    let f = f_values(&sys, s, args.depth);
    let mut result = json!({ "s": s, "depth": args.depth, "f": f });
    let mut whitney_f: Option<(usize, Vec<f64>)> = None;

    if args.whitney {
        if args.iterate == 0 || args.levels == 0 {
            bail!("--iterate and --levels must be at least 1");
        }
        let it = iterate_system(&sys, args.iterate);
        let (forget, margin) = check_forget(&it.ratios, args.stilde);
        let eps = epsilon_sequence(&it.system, args.levels, args.refine)?;
        let w = whitney_weights(&it.ratios, args.stilde, &eps, args.levels)?;
        let ell = it.ratios.len();
        let table: Vec<Vec<f64>> = (1..=w.levels())
            .map(|k| (1..=ell).map(|j| w.weight(j, k)).collect())
            .collect();
        let depth = args.depth.min(w.levels());
        let wf = whitney_f_values(&it.system, &w, depth)?;
        let mut wj = json!({
            "iterate": args.iterate,
            "ell": ell,
            "forget_hypothesis": { "holds": forget, "margin": margin },
            "s_tilde": w.s_tilde,
            "s_prime": w.s_prime,
            "gamma": w.gamma,
            "eps": w.eps,
            "tau": w.tau,
            "tau_prime": w.tau_prime,
            "s_k": w.s_k,
            "weights": table,
            "f_depth": depth,
            "f": wf,
        });
        if args.check_depth > 0 {
            let c = check_cylinder_inequality(&w, args.check_depth, args.check_depth)?;
            wj["cylinder_inequality"] = json!({
                "prefix_depth": args.check_depth,
                "e_depth": args.check_depth,
                "pairs": c.pairs,
                "violations": c.violations,
                "max_ratio": c.max_ratio,
                "worst_slack": c.worst_slack,
            });
        }
        whitney_f = Some((depth, wf));
        result["whitney"] = wj;
    }

    if let Some(path) = &args.csv {
        let mut w =
            csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(["j", "f", "whitney_f"])?;
        for (j, v) in f.iter().enumerate() {
            let wv = match &whitney_f {
                // iterate-m vertices at depth d are the original vertices at depth m·d
                Some((d, wf)) if d * args.iterate == args.depth => wf[j].to_string(),
                _ => String::new(),
            };
            w.write_record([j.to_string(), v.to_string(), wv])?;
        }
        w.flush()?;
    }

    Ok(report(
        ctx,
        Some(&loaded.digest),
        json!({ "depth": args.depth, "levels": args.levels, "refine": args.refine }),
        result,
    ))
}
