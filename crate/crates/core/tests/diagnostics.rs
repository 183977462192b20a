use lowrank::diagnostics::*;
use lowrank::linalg::*;
use lowrank::objectives::*;
use lowrank::rng::{gaussian_matrix, haar_frame, seeded};
use lowrank::solvers::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;

fn point<R: Rng>(n: usize, sigma: &[f64], rng: &mut R) -> FactoredMatrix {
    let r = sigma.len();
    FactoredMatrix::new(
        haar_frame(n, r, rng),
        DVector::from_column_slice(sigma),
        haar_frame(n, r, rng),
    )
    .unwrap()
}

const CERT: CertifyParams = CertifyParams {
    eps: 1e-6,
    gamma: 1e-6,
    epsilon_t: 1e-2,
    eta: 0.3,
};

#[test]
fn relative_error_examples() {
    let mut rng = seeded(1);
    let x_star = point(5, &[2.0, 1.0], &mut rng);
    assert_eq!(relative_error(&x_star, &x_star).unwrap(), 0.0);
    let doubled = FactoredMatrix::new(x_star.u().clone(), x_star.sigma() * 2.0, x_star.v().clone()).unwrap();
    assert!((relative_error(&doubled, &x_star).unwrap() - 1.0).abs() < 1e-14);
    for _ in 0..20 {
        let x = point(5, &[1.5, 0.3], &mut rng);
        let direct = (x.dense() - x_star.dense()).norm() / x_star.dense().norm();
        assert!((relative_error(&x, &x_star).unwrap() - direct).abs() < 1e-14);
    }
    let zero = FactoredMatrix::zeros(5, 5, 2);
    assert!(relative_error(&x_star, &zero).is_err());
}

#[test]
fn optimum_is_certified() {
    let mut rng = seeded(2);
    for _ in 0..10 {
        let x_star = point(5, &[2.0, 1.0], &mut rng);
        let f = quadratic_objective(&x_star);
        let c = certify_second_order(&x_star, &f, &CERT).unwrap();
        assert_eq!(c.classification, Classification::SecondOrderMinimizer);
        assert!(c.grad_norm.unwrap() < 1e-12);
        assert!(c.min_eig.unwrap() > 0.0);
    }
}

#[test]
fn invariant_saddle_has_negative_curvature() {
    let inst = invariant_saddle(&[4.0, 3.0, 2.0, 0.0], 2).unwrap();
    let f = &inst.objective;
    let c = certify_second_order(&inst.saddle, f, &CERT).unwrap();
    assert_eq!(c.classification, Classification::Saddle);
    assert!(c.grad_norm.unwrap() < 1e-12);
    assert!((c.min_eig.unwrap() - inst.min_eig).abs() < 1e-6);

    let (lmin, dir) = pullback_hessian_min_eig(f, &inst.saddle).unwrap();
    let f0 = f.value(&inst.saddle.dense());
    for t in [1e-3, 1e-2, 1e-1] {
        let y = retract_dense(&inst.saddle, &dir.scaled(t)).unwrap();
        let drop = f0 - f.value(&y);
        assert!(drop > 0.0);
        assert!((drop / (t * t) + 0.5 * lmin).abs() < 0.05);
    }
}

#[test]
fn near_optimal_certificates_localize_the_minimizer() {
    // Quadratic: L = mu = 1, so a point certified with gamma = (3 mu - L)/4
    // lies within 4 eps / (3 mu - L) = 2 eps of X*.
    let mut rng = seeded(3);
    let mut checked = 0;
    for i in 0..100 {
        let x_star = point(6, &[3.0, 2.0, 1.0], &mut rng);
        let f = quadratic_objective(&x_star);
        let scale = 10f64.powf(rng.random_range(-6.0..-1.0));
        let s = TangentVector::random_sphere(&x_star, scale, &mut rng).unwrap();
        let mut x = retract(&x_star, &s).unwrap().dense();
        if i % 2 == 0 {
            let (up, vp) = x_star.complements();
            x += up * gaussian_matrix(3, 3, &mut rng) * vp.transpose() * (0.1 * scale);
        }
        let x = project_rank_r(&x, 3).unwrap();
        let c = certify_second_order(&x, &f, &CERT).unwrap();
        let (g, e) = (c.grad_norm.unwrap(), c.min_eig.unwrap());
        if e >= -0.5 {
            checked += 1;
            let dist = (x.dense() - x_star.dense()).norm();
            assert!(dist <= 2.0 * g + 1e-8, "dist {dist} vs 2 eps {}", 2.0 * g);
        }
    }
    assert_eq!(checked, 100);
}

#[test]
fn certificates_below_search_rank_use_the_ambient_gradient() {
    let mut rng = seeded(4);
    let x_star = point(5, &[2.0], &mut rng).with_search_rank(2).unwrap();
    let f = quadratic_objective(&x_star);
    let c = certify_second_order(&x_star, &f, &CERT).unwrap();
    assert_eq!(c.grad_norm, None);
    assert_eq!(c.classification, Classification::AmbientStationary);
}

#[test]
fn descent_lemma_on_quadratics() {
    let mut rng = seeded(5);
    let x_star = point(8, &[3.0, 2.0, 1.0, 0.5], &mut rng);
    let target = x_star.dense() + gaussian_matrix(8, 8, &mut rng) * 0.1;
    let weights = DMatrix::from_fn(8, 8, |_, _| rng.random_range(0.7..1.3));
    let fs: [(Box<dyn Objective>, f64); 2] = [
        (Box::new(Quadratic::new(target.clone())), 1.0),
        (Box::new(WeightedQuadratic::new(target, weights).unwrap()), 1.3),
    ];
    for (f, l) in &fs {
        let x0 = point(8, &[1.0, 1.0, 1.0, 1.0], &mut rng);
        let mut cfg = SolverConfig::new(0.3, 1000);
        cfg.tol_rel_err = 0.0;
        let t = run_solver(Algorithm::ProjGd, f.as_ref(), &x0, None, &cfg).unwrap();
        let report = check_descent_lemma(&t, f.as_ref(), *l, 0.3);
        assert!(report.applicable);
        assert_eq!(report.checked, 1000);
        assert_eq!(report.violations, 0, "worst slack {}", report.worst_slack);
    }
}

#[test]
fn descent_lemma_not_applicable_for_long_steps() {
    let mut rng = seeded(6);
    let x_star = point(5, &[2.0, 1.0], &mut rng);
    let f = quadratic_objective(&x_star);
    let t = run_solver(Algorithm::ProjGd, &f, &x_star, None, &SolverConfig::new(1.5, 5)).unwrap();
    let report = check_descent_lemma(&t, &f, 1.0, 1.5);
    assert!(!report.applicable);
    assert_eq!(report.checked, 0);
}

#[test]
fn descent_lemma_holds_with_equality_at_fixed_points() {
    let mut rng = seeded(7);
    let x_star = point(5, &[2.0, 1.0], &mut rng);
    let f = quadratic_objective(&x_star);
    let t = run_solver(Algorithm::ProjGd, &f, &x_star, None, &SolverConfig::new(0.3, 3)).unwrap();
    let report = check_descent_lemma(&t, &f, 1.0, 0.3);
    assert_eq!(report.violations, 0);
    assert!(report.worst_slack.abs() < 1e-20);
}

#[test]
fn projection_lemma_trivial_cases() {
    let mut rng = seeded(8);
    let x = point(6, &[2.0, 1.0], &mut rng);
    let p = project_rank_r(&x.dense(), 2).unwrap();
    assert!((p.dense() - x.dense()).norm() < 1e-13);
    for _ in 0..50 {
        let s = TangentVector::random_sphere(&x, 1e-3, &mut rng).unwrap();
        let y = x.dense() + s.to_dense();
        let lhs = (project_rank_r(&y, 2).unwrap().dense() - x.dense()).norm();
        // Curvature of the manifold costs O(|S| / sigma_r) against the tangent length.
        let ratio = lhs / s.norm();
        assert!(ratio >= 2.0 / 3.0 && (ratio - 1.0).abs() < 1e-2, "ratio {ratio}");
    }
}

#[test]
fn projection_lemma_randomized() {
    let report = check_projection_lemma(10_000, 6, 2, 9, 2.0 / 3.0);
    println!(
        "projection lemma: min ratio {:.6}, max-form min ratio {:.6}",
        report.min_ratio, report.min_ratio_max_form
    );
    assert!(report.passed());
    assert!(report.min_ratio >= 2.0 / 3.0 - 1e-9);
    // The sampler reaches ratios well below 0.9, so a checker with 0.9 in
    // place of 2/3 must report violations.
    assert!(report.min_ratio < 0.9);
    assert!(!check_projection_lemma(10_000, 6, 2, 9, 0.9).passed());
}

#[test]
fn gradient_deviation_on_quadratics() {
    let mut rng = seeded(10);
    let x_star = point(6, &[2.0, 1.0], &mut rng);
    let exact = check_gradient_deviation(&quadratic_objective(&x_star), &x_star.dense(), 2, 1000, 1).unwrap();
    assert_eq!(exact.kappa0, 0.0);
    assert!(exact.max_ratio < 1e-14);
    assert_eq!(exact.violations, 0);

    let weights = DMatrix::from_fn(6, 6, |_, _| rng.random_range(0.7..1.3));
    let weights = {
        let mut w = weights;
        w[(0, 0)] = 0.7;
        w[(1, 1)] = 1.3;
        w
    };
    let f = WeightedQuadratic::new(x_star.dense(), weights).unwrap();
    let report = check_gradient_deviation(&f, &x_star.dense(), 2, 1000, 2).unwrap();
    assert!((report.kappa0 - 0.3).abs() < 1e-12);
    assert_eq!(report.violations, 0);
    assert!(report.max_ratio > 0.1);
}

#[test]
fn deviation_needs_known_constants() {
    let p = generate_sensing(SensingParams {
        n: 4,
        r: 1,
        r_star: 1,
        kappa: 1.0,
        m: 20,
        seed: 0,
        psd: false,
    })
    .unwrap();
    let f = sensing_objective(&p);
    assert!(check_gradient_deviation(&f, &p.ground_truth().dense(), 1, 10, 0).is_none());
}

#[test]
fn stop_guarantee_at_termination() {
    let mut rng = seeded(11);
    for trial in 0..10 {
        let x_star = point(5, &[2.0], &mut rng).with_search_rank(2).unwrap();
        let f = quadratic_objective(&x_star);
        let x0 = point(5, &[1.0, 0.5], &mut rng);
        let eta = 0.3;
        let params = PprojParams::from_epsilon(1e-3, eta);
        let mut cfg = SolverConfig::new(eta, 500);
        cfg.pproj = Some(params);
        cfg.seed = trial;
        let (x, t) = pprojgd(&f, &x0, Some(&x_star), &cfg).unwrap();
        assert_eq!(t.status, Status::SecondOrderStop);
        let g = check_stop_guarantee(&x, &f, params.epsilon, params.epsilon_t, eta);
        assert!(g.holds, "{g:?}");
    }
}

#[test]
fn rate_of_projgd_in_the_local_basin() {
    let mut rng = seeded(12);
    let eta = 1.0 / 3.0;
    let bound = 1.0 - 4.0 / 27.0 * (eta - eta * eta);
    for _ in 0..10 {
        let x_star = point(6, &[3.0, 2.0, 1.0], &mut rng);
        let f = quadratic_objective(&x_star);
        let s = TangentVector::random_sphere(&x_star, 0.05, &mut rng).unwrap();
        let x0 = retract(&x_star, &s).unwrap();
        let mut cfg = SolverConfig::new(eta, 30);
        cfg.tol_rel_err = 0.0;
        let t = run_solver(Algorithm::ProjGd, &f, &x0, Some(&x_star), &cfg).unwrap();
        let rate = estimate_linear_rate(&t, 20).unwrap();
        assert!(rate <= bound, "rate {rate} vs {bound}");
    }
}

#[test]
fn rate_needs_enough_records() {
    let mut rng = seeded(13);
    let x_star = point(5, &[2.0, 1.0], &mut rng);
    let f = quadratic_objective(&x_star);
    let t = run_solver(Algorithm::ProjGd, &f, &x_star, Some(&x_star), &SolverConfig::new(0.3, 5)).unwrap();
    assert!(estimate_linear_rate(&t, 3).is_err());
    assert!(estimate_linear_rate(&t, 0).is_err());
}

#[test]
fn probe_finds_one_minimizer_and_saddles() {
    let mut rng = seeded(14);
    let target = point(3, &[3.0, 2.0, 1.0], &mut rng);
    let f = quadratic_objective(&target);
    let x_star = project_rank_r(&target.dense(), 1).unwrap();
    let pts = landscape_probe(&f, 3, 1, &ProbeConfig::default()).unwrap();
    let minimizers: Vec<&ProbePoint> = pts
        .iter()
        .filter(|p| p.certificate.classification == Classification::SecondOrderMinimizer)
        .collect();
    assert_eq!(minimizers.len(), 1);
    assert!((minimizers[0].x.dense() - x_star.dense()).norm() < 1e-8);
    let saddles: Vec<&ProbePoint> = pts
        .iter()
        .filter(|p| p.certificate.classification == Classification::Saddle)
        .collect();
    assert_eq!(saddles.len(), 2);
    for s in saddles {
        assert!(s.certificate.min_eig.unwrap() < 0.0);
        assert!(s.f_value > minimizers[0].f_value);
    }
}

#[test]
fn probe_minimizer_value_is_zero_when_exactly_parameterized() {
    let mut rng = seeded(15);
    let x_star = point(3, &[1.5], &mut rng);
    let f = quadratic_objective(&x_star);
    let cfg = ProbeConfig {
        levels: 3,
        frames: 4,
        ..ProbeConfig::default()
    };
    let pts = landscape_probe(&f, 3, 1, &cfg).unwrap();
    let best = &pts[0];
    assert_eq!(best.certificate.classification, Classification::SecondOrderMinimizer);
    assert!(best.f_value.abs() < 1e-12);
    assert!(pts
        .iter()
        .skip(1)
        .all(|p| p.certificate.classification != Classification::SecondOrderMinimizer));
}

#[test]
fn probe_locates_the_invariant_saddle() {
    let inst = invariant_saddle(&[4.0, 3.0, 2.0, 0.0], 2).unwrap();
    let pts = landscape_probe(&inst.objective, 4, 2, &ProbeConfig::default()).unwrap();
    let found = pts
        .iter()
        .find(|p| (p.x.dense() - inst.saddle.dense()).norm() < 1e-8)
        .expect("saddle among the probe's stationary points");
    assert_eq!(found.certificate.classification, Classification::Saddle);
    assert!((found.certificate.min_eig.unwrap() - inst.min_eig).abs() < 1e-6);
}

#[test]
fn probe_rejects_large_or_expensive_requests() {
    let f = Quadratic::new(DMatrix::identity(5, 5));
    assert!(matches!(
        landscape_probe(&f, 5, 1, &ProbeConfig::default()),
        Err(lowrank::error::Error::ProbeTooLarge { .. })
    ));
    let f = Quadratic::new(DMatrix::identity(4, 4));
    let cfg = ProbeConfig {
        max_evals: 10,
        ..ProbeConfig::default()
    };
    assert!(matches!(
        landscape_probe(&f, 4, 2, &cfg),
        Err(lowrank::error::Error::BudgetExceeded { .. })
    ));
}

#[test]
fn escape_decrease_is_monotone_in_epsilon() {
    let a = escape_decrease(1e-4, 1e-2, 0.25, 0.0, 3.0);
    let b = escape_decrease(1e-3, 1e-2, 0.25, 0.0, 3.0);
    assert!(a > 0.0 && b > a);
    let expected = (1e-12f64 / (6.0 / 1e-4)).sqrt() / (50.0 * 0.25f64.powi(3));
    assert!((a - expected).abs() < 1e-12 * expected);
}

proptest! {
    #[test]
    fn rate_is_scale_invariant(
        ratios in prop::collection::vec(0.1f64..1.0, 10..40),
        scale in 1e-6f64..1e6,
    ) {
        let mut gaps = vec![1.0];
        for q in &ratios {
            let last = *gaps.last().unwrap();
            gaps.push(last * q);
        }
        let scaled: Vec<f64> = gaps.iter().map(|g| g * scale).collect();
        let w = ratios.len() / 2;
        let a = linear_rate_from_gaps(&gaps, w).unwrap();
        let b = linear_rate_from_gaps(&scaled, w).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
    }

    #[test]
    fn classification_replays_from_stored_numbers(
        grad in prop::option::of(0.0f64..1e-3),
        eig in prop::option::of(-1.0f64..1.0),
        ambient in 0.0f64..1.0,
    ) {
        let first = classify(grad, eig, ambient, 1e-7, &CERT);
        let cert = SecondOrderCertificate {
            grad_norm: grad,
            min_eig: eig,
            sigma_r: 1.0,
            ambient_grad_norm: ambient,
            ambient_grad_norm_fro: ambient,
            eig_zero_tol: 1e-7,
            classification: first,
        };
        let json = serde_json::to_string(&cert).unwrap();
        let back: SecondOrderCertificate = serde_json::from_str(&json).unwrap();
        let again = classify(back.grad_norm, back.min_eig, back.ambient_grad_norm, back.eig_zero_tol, &CERT);
        prop_assert_eq!(again, back.classification);
        let minimizer = matches!((grad, eig), (Some(g), Some(e)) if g <= CERT.eps && e >= -CERT.gamma);
        prop_assert_eq!(first == Classification::SecondOrderMinimizer, minimizer);
    }
}
