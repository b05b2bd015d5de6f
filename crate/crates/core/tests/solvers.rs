use l0pd::baselines::{cdss_solve_traced, solve_baseline, BaselineKind};
use l0pd::incremental::solve_traced;
use l0pd::model::primal_objective;
use l0pd::oracle::enumerate_solve;
use l0pd::synth::{generate, standardize, SyntheticSpec};
use l0pd::{DenseMatrix, InnerConfig, OuterConfig, ProblemSpec, SquaredLoss, Stage};
use proptest::prelude::*;

fn synthetic(n: usize, p: usize, seed: u64, lam: (f64, f64, f64)) -> ProblemSpec {
    let spec = SyntheticSpec {
        n,
        p,
        support_frac: 3.0 / p as f64,
        seed,
        ..SyntheticSpec::default()
    };
    let ds = generate(&spec).unwrap();
    let (x, y, _) = standardize(&ds.x, &ds.y);
    ProblemSpec::with_lambdas(x, y, lam.0, lam.1, lam.2).unwrap()
}

fn tight() -> OuterConfig {
    let mut cfg = OuterConfig {
        xi: 1e-10,
        record_duals: true,
        init_size: Some(4),
        ..OuterConfig::default()
    };
    cfg.inner.eps = 1e-12;
    cfg.inner.zeta = 1e-14;
    cfg.inner.step_size = 1.0;
    cfg.inner.max_iters = 2000;
    cfg
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn outer_trace_invariants(seed in 0u64..10_000, l0 in 0.0..0.05f64, l2 in 0.5..5.0f64) {
        let prob = synthetic(25, 20, seed, (l0, 0.01, l2));
        let loss = SquaredLoss;
        let mut steps = Vec::new();
        let sol = solve_traced(&prob, &tight(), &loss, &mut |s| steps.push(s.clone())).unwrap();
        prop_assert!(!steps.is_empty());

        let mut stopped_adding = false;
        let mut last_active = 0;
        let mut last_primal = f64::INFINITY;
        for s in &steps {
            prop_assert!(s.gap >= -1e-9, "gap {}", s.gap);
            prop_assert!((s.gap - (s.primal - s.dual)).abs() <= 1e-12 * (1.0 + s.primal.abs()));
            if s.stage != Stage::Screen {
                prop_assert!(s.primal <= last_primal + 1e-9 * (1.0 + last_primal.abs()));
                last_primal = s.primal;
            }
            if stopped_adding {
                prop_assert!(s.active_size <= last_active);
            }
            if s.stage == Stage::Pursue {
                stopped_adding = true;
            }
            last_active = s.active_size;
        }

        if sol.gap <= 1e-10 {
            let a_hat = &sol.alpha;
            for s in &steps {
                let a = s.alpha.as_ref().expect("recorded duals");
                let dist = a.iter().zip(a_hat).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
                prop_assert!(dist <= s.radius + 1e-6, "step {} dist {dist} radius {}", s.step, s.radius);
            }
        }
    }

    #[test]
    fn screened_features_are_zero_in_reference(seed in 0u64..10_000) {
        let prob = synthetic(25, 20, seed, (0.01, 0.01, 2.0));
        let loss = SquaredLoss;
        let sol = solve_traced(&prob, &tight(), &loss, &mut |_| {}).unwrap();
        let reference = solve_traced(&prob, &OuterConfig { screening: false, ..tight() }, &loss, &mut |_| {}).unwrap();
        prop_assume!(reference.gap <= 1e-10);
        for ev in &sol.screened {
            prop_assert_eq!(reference.beta[ev.feature], 0.0, "feature {}", ev.feature);
        }
    }

    #[test]
    fn cdss_primal_is_non_increasing(seed in 0u64..10_000) {
        let prob = synthetic(30, 15, seed, (0.02, 0.02, 0.5));
        let loss = SquaredLoss;
        let mut primals = Vec::new();
        cdss_solve_traced(&prob, 1e-10, 1e-14, 500, &loss, &mut |s| primals.push(s.primal)).unwrap();
        for w in primals.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12 * (1.0 + w[0].abs()));
        }
    }

    #[test]
    fn oracle_is_permutation_invariant(seed in 0u64..10_000, shift in 1usize..8) {
        let prob = synthetic(20, 8, seed, (0.03, 0.02, 1.0));
        let p = prob.p();
        let perm: Vec<usize> = (0..p).map(|j| (j + shift) % p).collect();
        let x = prob.x().select_columns(&perm);
        let pen = *prob.penalty();
        let permuted = ProblemSpec::with_lambdas(x, prob.y().to_vec(), pen.lambda0, pen.lambda1, pen.lambda2).unwrap();
        let a = enumerate_solve(&prob, 14).unwrap();
        let b = enumerate_solve(&permuted, 14).unwrap();
        prop_assert!((a.best_objective - b.best_objective).abs() <= 1e-10);
    }

    #[test]
    fn oracle_support_shrinks_with_lambda0(seed in 0u64..10_000) {
        let prob = synthetic(20, 8, seed, (0.0, 0.02, 1.0));
        let mut last = usize::MAX;
        for l0 in [0.0, 0.01, 0.03, 0.1, 0.3, 1.0, 10.0] {
            let pen = *prob.penalty();
            let q = prob.with_penalty(l0pd::Penalty::new(l0, pen.lambda1, pen.lambda2).unwrap());
            let size = enumerate_solve(&q, 14).unwrap().best_support.len();
            prop_assert!(size <= last, "lambda0 {l0}: {size} > {last}");
            last = size;
        }
    }
}

#[test]
fn baselines_share_the_problem_interface() {
    let prob = synthetic(30, 12, 5, (0.03, 0.02, 1.0));
    let loss = SquaredLoss;
    let cfg = InnerConfig {
        max_iters: 500,
        ..InnerConfig::default()
    };
    for kind in [
        BaselineKind::DualAscent,
        BaselineKind::Cdss,
        BaselineKind::Diht { k: 3 },
    ] {
        let mut rows = 0;
        let sol = solve_baseline(&prob, kind, &cfg, &loss, &mut |_| rows += 1).unwrap();
        assert!(rows > 0, "{kind:?}");
        assert_eq!(sol.beta.len(), 12);
        assert!(sol.gap >= -1e-9);
        let p = primal_objective(&prob, &sol.beta, &loss).unwrap();
        assert!((p - sol.primal).abs() <= 1e-9 * (1.0 + p.abs()));
        if let BaselineKind::Diht { k } = kind {
            assert!(sol.support.len() <= k);
        }
    }
    assert!(solve_baseline(
        &prob,
        BaselineKind::Diht { k: 13 },
        &cfg,
        &loss,
        &mut |_| {}
    )
    .is_err());
    assert!(solve_baseline(&prob, BaselineKind::Diht { k: 0 }, &cfg, &loss, &mut |_| {}).is_err());
}

#[test]
fn incremental_matches_oracle_on_orthonormal_design() {
    let x = DenseMatrix::identity(6);
    let y = vec![2.0, -1.5, 0.1, 0.0, 1.4, -0.05];
    let prob = ProblemSpec::with_lambdas(x, y, 0.1, 0.05, 0.5).unwrap();
    let loss = SquaredLoss;
    let sol = solve_traced(&prob, &tight(), &loss, &mut |_| {}).unwrap();
    let best = enumerate_solve(&prob, 14).unwrap();
    assert!(sol.gap <= 1e-10, "gap {}", sol.gap);
    assert!((sol.primal - best.best_objective).abs() <= 1e-9);
    assert_eq!(sol.support, best.best_support);
}

#[test]
fn synthetic_generation_is_reproducible() {
    let spec = SyntheticSpec {
        n: 50,
        p: 40,
        support_frac: 0.1,
        seed: 17,
        ..SyntheticSpec::default()
    };
    let a = generate(&spec).unwrap();
    let b = generate(&spec).unwrap();
    assert_eq!(a.x, b.x);
    assert_eq!(a.y, b.y);
    assert_eq!(a.beta_true, b.beta_true);
    let c = generate(&SyntheticSpec { seed: 18, ..spec }).unwrap();
    assert_ne!(a.y, c.y);
}

#[test]
fn achieved_snr_matches_request() {
    // Averaging over replicates keeps the Monte-Carlo error small.
    let mut ratios = Vec::new();
    for seed in 0..40 {
        let spec = SyntheticSpec {
            n: 400,
            p: 30,
            support_frac: 0.2,
            snr: 5.0,
            seed,
            ..SyntheticSpec::default()
        };
        let ds = generate(&spec).unwrap();
        let signal = ds.x.mul_vec(&ds.beta_true);
        let noise: Vec<f64> = ds.y.iter().zip(&signal).map(|(y, s)| y - s).collect();
        let var = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / v.len() as f64
        };
        ratios.push(var(&signal) / var(&noise));
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    assert!((mean - 5.0).abs() < 0.3, "mean achieved snr {mean}");
}
