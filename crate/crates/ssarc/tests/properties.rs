use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use proptest::prelude::*;
use ssarc::arc::{g_eval, ordered_maps, subarc_diameter, vertices, word_map, ArcSystem, Word};
use ssarc::conditions::{
    angle_profile, check_q, check_w, diophantine_params, empirical_quasi, monotone_in_t, Status,
};
use ssarc::dio::{
    dist_to_integer, j_a_evidence, structured_witness, tau_7_11, tau_7_12, tau_7_13,
    truncation_value, DioError, DyadicStream, QuadraticSurd, Tau,
};
use ssarc::family::{build_omega_tau, family_params};
use ssarc::geom::{build_basic_figure, koch_vertices, normalize, AngleClass, Similitude};
use ssarc::spectrum::{
    all_words, cylinder_measure, epsilon_sequence, f_values, hausdorff_dimension, iterate_system,
    whitney_measure_cylinder, whitney_weights,
};
use ssarc::{BasicFigure, Complex};

fn koch() -> BasicFigure {
    build_basic_figure(&koch_vertices(), 2).unwrap()
}

fn omega(p: i64, q: i64) -> BasicFigure {
    build_omega_tau(&Tau::Rational(BigRational::new(p.into(), q.into())))
        .unwrap()
        .figure
}

fn test_figures() -> Vec<BasicFigure> {
    vec![koch(), omega(2001, 2000)]
}

fn cplx() -> impl Strategy<Value = Complex<f64>> {
    (-10.0..10.0f64, -10.0..10.0f64).prop_map(|(a, b)| Complex::new(a, b))
}

fn nonzero_cplx() -> impl Strategy<Value = Complex<f64>> {
    (0.05..5.0f64, -3.2..3.2f64).prop_map(|(r, t)| Complex::from_polar(r, t))
}

fn rational_tau() -> impl Strategy<Value = Tau> {
    (1001u64..20_000).prop_flat_map(|q| {
        (1u64..=q / 1000)
            .prop_map(move |d| Tau::Rational(BigRational::new((q + d).into(), q.into())))
    })
}

fn exact_tail_ok(s: &DyadicStream) {
    let mat = s.materializable_terms();
    let n = s.exponents();
    let full = truncation_value(s, mat).unwrap();
    for i in 1..mat {
        let ti = truncation_value(s, i).unwrap();
        let diff = &full - &ti;
        assert!(diff.is_positive());
        // tail beyond term `mat` is below 2^{−n_{mat+1}+1} ≤ 2^{−n_mat}
        let tail_hi: BigRational = BigRational::new(
            BigInt::one(),
            BigInt::one() << n[mat - 1].to_usize().unwrap(),
        );
        let bound: BigRational =
            BigRational::new(BigInt::from(2), BigInt::one() << n[i].to_usize().unwrap());
        assert!(diff + tail_hi <= bound);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn similitude_scales_distances(a in nonzero_cplx(), b in cplx(), u in cplx(), v in cplx()) {
        let s = Similitude::new(a, b);
        let (su, sv) = (s.apply(u), s.apply(v));
        let lhs = (su - sv).norm();
        let rhs = s.ratio() * (u - v).norm();
        let scale = su.norm() + sv.norm() + rhs;
        prop_assert!((lhs - rhs).abs() <= 4.0 * f64::EPSILON * scale);
    }

    #[test]
    fn compose_is_a_homomorphism(
        a1 in nonzero_cplx(), b1 in cplx(), a2 in nonzero_cplx(), b2 in cplx(),
        a3 in nonzero_cplx(), b3 in cplx(), z in cplx(),
    ) {
        let (s, t, r) = (Similitude::new(a1, b1), Similitude::new(a2, b2), Similitude::new(a3, b3));
        let left = s.compose(&t).compose(&r);
        let right = s.compose(&t.compose(&r));
        let tol = 1e-12 * (1.0 + left.b.norm() + left.a.norm());
        prop_assert!((left.a - right.a).norm() < tol && (left.b - right.b).norm() < tol);
        prop_assert!((s.compose(&t).ratio() - s.ratio() * t.ratio()).abs() < 1e-13 * s.ratio() * t.ratio());
        let w = s.compose(&t).apply(z);
        prop_assert!((w - s.apply(t.apply(z))).norm() < 1e-12 * (1.0 + w.norm()));
    }

    #[test]
    fn normalization_idempotent(a in nonzero_cplx(), b in cplx(), which in 0usize..2) {
        let base = test_figures()[which].vertices.clone();
        let moved: Vec<_> = base.iter().map(|z| a * z + b).collect();
        let once = normalize(&moved).unwrap();
        let twice = normalize(&once).unwrap();
        for (x, y) in once.iter().zip(&twice) {
            prop_assert!((x - y).norm() < 1e-15);
        }
        for (x, y) in once.iter().zip(&base) {
            prop_assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn vertex_refinement_consistent(which in 0usize..3, k in 0usize..5, dm in 1usize..3) {
        let sys = match which {
            0 => ArcSystem::from_figure(&koch()),
            1 => ArcSystem::from_figure(&omega(2001, 2000)),
            _ => ArcSystem::segment(),
        };
        let m = (k + dm).min(6);
        let coarse = vertices(&sys, k);
        let fine = vertices(&sys, m);
        let step = sys.ell().pow((m - k) as u32);
        for (j, z) in coarse.points.iter().enumerate() {
            prop_assert_eq!(*z, fine.points[j * step]);
        }
    }

    #[test]
    fn g_eval_error_contract(x in 0.0..1.0f64, m in 0usize..9, which in 0usize..2) {
        let sys = ArcSystem::from_figure(&test_figures()[which]);
        let (p0, r0) = g_eval(&sys, x, m);
        let (p1, _) = g_eval(&sys, x, m + 1);
        prop_assert!((p0 - p1).norm() <= r0 * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn subarc_sandwich(i in 0usize..16, len in 1usize..16) {
        let sys = ArcSystem::from_figure(&koch());
        let j = (i + len).min(16);
        prop_assume!(i < j);
        let mut prev = (0.0, f64::INFINITY);
        for m in 0..4 {
            let (lo, hi) = subarc_diameter(&sys, i, j, 2, m).unwrap();
            prop_assert!(lo >= prev.0 && hi <= prev.1 && lo <= hi);
            prev = (lo, hi);
        }
    }

    #[test]
    fn cylinder_additivity(word in proptest::collection::vec(1u16..5, 0..6), which in 0usize..2) {
        let fig = &test_figures()[which];
        let word: Vec<u16> = word.into_iter().map(|d| 1 + (d - 1) % fig.ell() as u16).collect();
        let s = hausdorff_dimension(&fig.ratios).s;
        let w = Word(word);
        let parent = cylinder_measure(&fig.ratios, &w, s);
        let kids: f64 = (1..=fig.ell() as u16).map(|d| cylinder_measure(&fig.ratios, &w.push(d), s)).sum();
        prop_assert!((kids - parent).abs() < 1e-12);
    }

    #[test]
    fn dimension_residual(ratios in proptest::collection::vec(0.02..0.7f64, 2..7)) {
        let d = hausdorff_dimension(&ratios);
        let sum: f64 = ratios.iter().map(|r| r.powf(d.s)).sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn dimension_equal_ratios(ell in 2usize..9, r in 0.01..0.49f64) {
        let d = hausdorff_dimension(&vec![r; ell]);
        prop_assert!((d.s - (ell as f64).ln() / (1.0 / r).ln()).abs() < 1e-12);
    }

    #[test]
    fn scale_invariance(a in nonzero_cplx(), b in cplx()) {
        let base = koch();
        let moved = build_basic_figure(&koch_vertices::<f64>().iter().map(|z| a * z + b).collect::<Vec<_>>(), 2).unwrap();
        let (p0, p1) = (angle_profile(&base), angle_profile(&moved));
        for (x, y) in p0.theta.iter().zip(&p1.theta) {
            prop_assert!((x.value - y.value).abs() < 1e-10 && x.class == y.class);
        }
        prop_assert!((p0.eta1 - p1.eta1).abs() < 1e-10 && (p0.eta2 - p1.eta2).abs() < 1e-10);
        let s = hausdorff_dimension(&base.ratios).s;
        let f0 = f_values(&ArcSystem::from_figure(&base), s, 3);
        let f1 = f_values(&ArcSystem::from_figure(&moved), s, 3);
        for (x, y) in f0.iter().zip(&f1) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        for p in 1..4 {
            prop_assert_eq!(check_q(&base, p, 1.0, 64).unwrap().status, check_q(&moved, p, 1.0, 64).unwrap().status);
        }
    }

    #[test]
    fn grid_identity(tau in rational_tau(), j in 0i32..200, k in 0i32..200) {
        let w = build_omega_tau(&tau).unwrap();
        let d = diophantine_params(&w.figure, 3).unwrap();
        let v = d.u - j as f64 * d.x + k as f64 * d.y;
        let direct = (d.alpha * d.lambda.powi(j) / (d.beta * d.mu.powi(k))).ln();
        prop_assert!((v.abs() - direct.abs()).abs() < 1e-10);
    }

    #[test]
    fn family_instance_invariants(tau in rational_tau()) {
        let w = build_omega_tau(&tau).unwrap();
        let prof = angle_profile(&w.figure);
        for t in &prof.theta {
            if t.p == 3 {
                prop_assert!(t.class == AngleClass::Zero && t.value.abs() < 1e-12);
            } else {
                prop_assert!(t.class == AngleClass::Positive);
            }
        }
        prop_assert!(prof.eta0 > 0.0 && prof.xi > 0.0);
        let f = family_params(&w);
        let d = diophantine_params(&w.figure, 3).unwrap();
        for (a, b) in [(f.alpha, d.alpha), (f.beta, d.beta), (f.lambda, d.lambda), (f.mu, d.mu), (f.x, d.x), (f.y, d.y), (f.u, d.u)] {
            prop_assert!((a - b).abs() < 1e-10);
        }
        let dim = hausdorff_dimension(&w.figure.ratios);
        prop_assert!(dim.s > 1.0 && dim.residual.abs() <= 1e-12);
    }

    #[test]
    fn rational_distance_matches_modular(p in 1u64..10_000, q in 1u64..10_000, j in 1u64..1_000_000) {
        let tau = Tau::Rational(BigRational::new(p.into(), q.into()));
        let r = (j as u128 * p as u128 % q as u128) as u64;
        let want = BigRational::new(r.min(q - r).into(), q.into());
        prop_assert_eq!(dist_to_integer(j, &tau, None).exact.unwrap(), want);
        prop_assert!(matches!(j_a_evidence(&tau, 0.5, 10), Err(DioError::IrrationalRequired)));
    }

    #[test]
    fn distance_brackets_nest(j in 1u64..5_000_000, nu in 1u64..9) {
        let s = tau_7_13(nu, 3).unwrap();
        let tau = Tau::Stream(s);
        let b1 = dist_to_integer(j, &tau, Some(1)).log2;
        let b2 = dist_to_integer(j, &tau, Some(2)).log2;
        if let (Some(b1), Some(b2)) = (b1, b2) {
            prop_assert!(b1.contains(&b2));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn stream_tails_exact(nu in 1u64..12, shift in 5u32..11) {
        let a0 = std::f64::consts::LN_2 / f64::from(1u32 << shift);
        exact_tail_ok(&tau_7_11(a0, nu, 3).unwrap());
        exact_tail_ok(&tau_7_12(a0, nu, 3).unwrap());
        exact_tail_ok(&tau_7_13(nu, 3).unwrap());
    }

    #[test]
    fn witnesses_are_integers(nu in 1u64..12, shift in 5u32..11) {
        let a0 = std::f64::consts::LN_2 / f64::from(1u32 << shift);
        let s = tau_7_11(a0, nu, 3).unwrap();
        for i in 1..s.materializable_terms() {
            let (j, k) = structured_witness(&s, i).unwrap();
            let ji = BigRational::from_integer(BigInt::from(j.clone()));
            let prod = ji * truncation_value(&s, i).unwrap();
            prop_assert!(prod.is_integer());
            prop_assert_eq!(prod.to_integer(), BigInt::from(k.clone()));
            let jt = BigRational::from_integer(BigInt::from(j)) * truncation_value(&s, s.materializable_terms()).unwrap();
            prop_assert!(jt > BigRational::from_integer(BigInt::from(k)));
        }
    }

    #[test]
    fn whitney_weights_invariants(s_tilde in 1.0..1.2f64, e0 in 0.05..0.9f64, decay in 0.1..0.9f64) {
        let ratios = vec![1.0 / 9.0; 16];
        let eps: Vec<f64> = (0..5).map(|k| e0 * decay.powi(k)).collect();
        let Ok(w) = whitney_weights(&ratios, s_tilde, &eps, 5) else { return Ok(()); };
        for k in 0..5 {
            prop_assert!(w.s_prime < w.s_k[k]);
            if k > 0 {
                prop_assert!(w.s_k[k] <= w.s_k[k - 1]);
            }
            let sum: f64 = w.table[k].iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12);
        }
        for word in all_words(16, 2).iter().step_by(7) {
            let parent = whitney_measure_cylinder(word, &w).unwrap();
            let kids: f64 = (1..=16).map(|d| whitney_measure_cylinder(&word.push(d), &w).unwrap()).sum();
            prop_assert!((kids - parent).abs() <= 1e-12);
        }
    }
}

#[test]
fn ordered_maps_enumerate_cells() {
    for fig in test_figures() {
        let sys = ArcSystem::from_figure(&fig);
        for k in 0..5 {
            let words = ordered_maps(&sys, k);
            let mut uniq = words.clone();
            uniq.sort();
            uniq.dedup();
            assert_eq!(uniq.len(), sys.ell().pow(k as u32));
            let grid = vertices(&sys, k);
            for (i, w) in words.iter().enumerate() {
                let z = word_map(&sys, w).apply(sys.start);
                let z1 = word_map(&sys, w).apply(sys.end);
                assert!(
                    (z - grid.points[i]).norm() < 1e-12 && (z1 - grid.points[i + 1]).norm() < 1e-12
                );
            }
            let s = hausdorff_dimension(&sys.maps.iter().map(|m| m.ratio()).collect::<Vec<_>>()).s;
            let f = f_values(&sys, s, k);
            assert!(f.windows(2).all(|p| p[0] < p[1]));
            assert_eq!((f[0], *f.last().unwrap()), (0.0, 1.0));
        }
    }
}

#[test]
fn analytic_corners_hold_for_all_t() {
    let f = koch();
    let s = hausdorff_dimension(&f.ratios).s;
    for p in 1..4 {
        for t in [1.0, 1.5, 2.0, 5.0] {
            assert_eq!(
                check_q(&f, p, t, 128).unwrap().status,
                Status::HoldsAnalytic
            );
        }
        assert_eq!(
            check_w(&f, p, s, 128).unwrap().status,
            Status::HoldsAnalytic
        );
    }
}

#[test]
fn quasi_estimates_bracket_and_refine() {
    let sys = ArcSystem::from_figure(&koch());
    let r1 = empirical_quasi(&sys, None, 1.0, 2..=3, 1, 0);
    let r2 = empirical_quasi(&sys, None, 1.0, 2..=3, 3, 0);
    for (a, b) in r1.iter().zip(&r2) {
        assert!(a.sup_lower <= a.sup_upper && b.sup_lower <= b.sup_upper);
        assert!(b.sup_lower >= a.sup_lower * (1.0 - 1e-12));
        assert!(b.sup_upper <= a.sup_upper * (1.0 + 1e-12));
    }
}

#[test]
fn verdicts_monotone_in_t() {
    let s = tau_7_11(0.5, 8, 3).unwrap();
    let fig = build_omega_tau(&Tau::Stream(s)).unwrap().figure;
    let vs: Vec<_> = [1.0, 1.25, 1.5, 2.0, 3.0]
        .iter()
        .map(|&t| check_q(&fig, 3, t, 4096).unwrap())
        .collect();
    assert!(monotone_in_t(&vs));
    assert_eq!(vs[0].status, Status::EvidenceAgainst);
    assert_eq!(vs[4].status, Status::EvidenceFor);
}

#[test]
fn sqrt2_records_at_convergents() {
    let denoms = [1u64, 2, 5, 12, 29, 70, 169, 408, 985, 2378, 5741];
    let tau = Tau::Surd(QuadraticSurd::sqrt2());
    for a in [1e-4, 1e-3, 0.1] {
        let rep = j_a_evidence(&tau, a, 10_000).unwrap();
        for w in &rep.witnesses {
            assert!(denoms.contains(&w.j.as_u64().unwrap()), "{}", w.j);
        }
    }
}

#[test]
fn epsilon_sequence_decreases() {
    let sys = ArcSystem::from_figure(&koch());
    let eps = epsilon_sequence(&sys, 3, 2).unwrap();
    assert!(eps.windows(2).all(|w| w[1] <= w[0]) && eps.iter().all(|&e| e > 0.0));
    let it = iterate_system(&sys, 2);
    assert_eq!(it.ratios.len(), 16);
    assert!(BigUint::zero() < BigUint::one());
}
