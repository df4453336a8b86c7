use linmtl_core::conditions::{certifies, cycle_sign};
use linmtl_core::{
    brute_force_condition, check_c1, check_c2, classify_point, compute_optimal_predictors,
    irreducible_losses, min_norm_element, run_mgda, run_randomized_sweep, run_sweep,
    sample_feasible_region, scalarization_optimum, train_scalarized_gd, DMatrix, DVector,
    MgdaConfig, MgdaVariant, OptimalPredictors, SignPattern, SurfaceKind, SurfaceSet, TaskDataset,
    WeightVector,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

fn instance(k: usize, seed: u64) -> OptimalPredictors {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    OptimalPredictors::from_predictions(gaussian(k + 3, k, &mut rng)).unwrap()
}

fn weights(k: usize, seed: u64) -> WeightVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    WeightVector::from_unnormalized((0..k).map(|_| 0.05 + rng.random::<f64>()).collect()).unwrap()
}

fn regression(n: usize, p: usize, k: usize, seed: u64) -> TaskDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    TaskDataset::new(gaussian(n, p, &mut rng), gaussian(n, k, &mut rng))
        .unwrap()
        .mean_scaled()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn orthogonality_decomposition(seed in any::<u64>(), k in 2usize..6, q in 1usize..5) {
        let data = regression(4 * k + 6, k + 2, k, seed);
        let preds = compute_optimal_predictors(&data).unwrap();
        let offsets = irreducible_losses(&data, &preds);
        let w = weights(k, seed);
        let sol = scalarization_optimum(&preds, &offsets, &w, q).unwrap();
        let lambda = w.as_vector();
        let lhs = lambda.dot(&sol.mse);
        let rhs = lambda.dot(&(preds.sq_norms() - &sol.objective)) + lambda.dot(&offsets);
        prop_assert!((lhs - rhs).abs() < 1e-8);
        let basis = sol.basis(&preds);
        for i in 0..k {
            let resid = data.y().column(i) - &basis * (basis.transpose() * preds.yhat().column(i));
            prop_assert!((resid.norm_squared() - sol.mse[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn weight_scaling_leaves_objective_unchanged(seed in any::<u64>(), k in 2usize..6, e in -8i32..8) {
        let preds = instance(k, seed);
        let offsets = DVector::zeros(k);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<f64> = (0..k).map(|_| 0.05 + rng.random::<f64>()).collect();
        let base = scalarization_optimum(&preds, &offsets, &WeightVector::from_unnormalized(raw.clone()).unwrap(), 1).unwrap();
        let c = 2f64.powi(e);
        let scaled_raw: Vec<f64> = raw.iter().map(|x| x * c).collect();
        let scaled = scalarization_optimum(&preds, &offsets, &WeightVector::from_unnormalized(scaled_raw).unwrap(), 1).unwrap();
        prop_assert_eq!(&base.objective, &scaled.objective);
        let odd: Vec<f64> = raw.iter().map(|x| x * 3.7).collect();
        let odd = scalarization_optimum(&preds, &offsets, &WeightVector::from_unnormalized(odd).unwrap(), 1).unwrap();
        prop_assert!((&base.objective - &odd.objective).amax() < 1e-12);
    }

    #[test]
    fn orthant_bound_and_surface_coverage(seed in any::<u64>(), k in 3usize..7) {
        let preds = instance(k, seed);
        let t = preds.sq_norms();
        let e_set = SurfaceSet::new(&preds, SurfaceKind::E).unwrap();
        let i_set = SurfaceSet::new(&preds, SurfaceKind::I).unwrap();
        for p in sample_feasible_region(&preds, SurfaceKind::E, 300, seed).unwrap() {
            prop_assert!(p.v.iter().zip(t.iter()).all(|(v, t)| *v >= 0.0 && *v <= t * (1.0 + 1e-12)));
            prop_assert!(e_set.min_abs_residual(&p.v).unwrap() < 1e-9);
            prop_assert!(i_set.min_abs_residual(&(t - &p.v)).unwrap() < 1e-9);
        }
        for p in sample_feasible_region(&preds, SurfaceKind::I, 300, seed).unwrap() {
            prop_assert!(i_set.min_abs_residual(&p.v).unwrap() < 1e-9);
            prop_assert!(e_set.min_abs_residual(&(t - &p.v)).unwrap() < 1e-9);
        }
    }

    #[test]
    fn condition_checks_match_the_oracle(seed in any::<u64>(), k in 3usize..10) {
        let preds = instance(k, seed);
        let c1 = check_c1(&preds);
        let c2 = check_c2(&preds).unwrap();
        prop_assert_eq!(c1.holds, brute_force_condition(preds.gram()).unwrap().holds);
        prop_assert_eq!(c2.holds, brute_force_condition(preds.gram_inv()).unwrap().holds);
        for (report, m) in [(&c1, preds.gram()), (&c2, preds.gram_inv())] {
            if report.holds {
                prop_assert!(certifies(m, report.certificate.as_ref().unwrap()));
            } else {
                prop_assert_eq!(cycle_sign(m, report.witness.as_ref().unwrap()), -1);
            }
        }
    }

    #[test]
    fn planted_sign_structure_is_found(seed in any::<u64>(), k in 3usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let signs: Vec<f64> = (0..k).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        let yhat = gaussian(k + 3, k, &mut rng).map(f64::abs) * DMatrix::from_diagonal(&DVector::from_vec(signs));
        let preds = OptimalPredictors::from_predictions(yhat).unwrap();
        let c1 = check_c1(&preds);
        prop_assert!(c1.holds);
        prop_assert!(certifies(preds.gram(), c1.certificate.as_ref().unwrap()));
    }

    #[test]
    fn c1_is_invariant_to_positive_rescaling(seed in any::<u64>(), k in 3usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let yhat = gaussian(k + 3, k, &mut rng);
        let scales: Vec<f64> = (0..k).map(|_| 0.01 + 100.0 * rng.random::<f64>()).collect();
        let scaled = &yhat * DMatrix::from_diagonal(&DVector::from_vec(scales));
        let a = check_c1(&OptimalPredictors::from_predictions(yhat).unwrap());
        let b = check_c1(&OptimalPredictors::from_predictions(scaled).unwrap());
        prop_assert_eq!(a.holds, b.holds);
        prop_assert_eq!(a.certificate, b.certificate);
    }

    #[test]
    fn min_norm_is_optimal_and_feasible(seed in any::<u64>(), k in 1usize..6, d in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grads: Vec<DVector<f64>> = (0..k)
            .map(|_| DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal)))
            .collect();
        let r = min_norm_element(&grads, 250, 1e-12).unwrap();
        prop_assert!((r.alpha.sum() - 1.0).abs() < 1e-10);
        prop_assert!(r.alpha.iter().all(|a| *a >= 0.0));
        let nn = r.norm * r.norm;
        for g in &grads {
            prop_assert!(g.dot(&r.combined) >= nn - 1e-8);
        }
    }

    #[test]
    fn sweep_objectives_are_feasible_and_deterministic(seed in any::<u64>(), k in 3usize..6) {
        let preds = instance(k, seed);
        let offsets = DVector::zeros(k);
        let a = run_sweep(&preds, &offsets, 1, 200, seed).unwrap();
        let b = run_sweep(&preds, &offsets, 1, 200, seed).unwrap();
        prop_assert_eq!(&a.losses, &b.losses);
        for v in &a.objectives {
            prop_assert!(!classify_point(&preds, SurfaceKind::E, v, 1e-8).unwrap().is_empty());
        }
        let r1 = run_randomized_sweep(&preds, &offsets, 1, 200, seed).unwrap();
        let r2 = run_randomized_sweep(&preds, &offsets, 1, 200, seed).unwrap();
        prop_assert_eq!(&r1.losses, &r2.losses);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn eckart_young_beats_sampled_bases(seed in any::<u64>(), k in 2usize..6, q_off in 1usize..5) {
        let q = k.saturating_sub(q_off).max(1);
        prop_assume!(q < k);
        let preds = instance(k, seed);
        let w = weights(k, seed);
        let sol = scalarization_optimum(&preds, &DVector::zeros(k), &w, q).unwrap();
        let best = w.as_vector().dot(&sol.objective);
        let r = preds.span_coords();
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        for _ in 0..10_000 {
            let basis = gaussian(k, q, &mut rng).qr().q();
            let proj = basis.transpose() * r;
            let value: f64 = (0..k).map(|i| w.as_slice()[i] * proj.column(i).norm_squared()).sum();
            prop_assert!(value <= best + 1e-8, "sampled {value} beats {best}");
        }
    }

    #[test]
    fn min_norm_never_exceeds_the_grid_oracle(seed in any::<u64>(), k in 2usize..5, d in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grads: Vec<DVector<f64>> = (0..k)
            .map(|_| DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal)))
            .collect();
        let gram = DMatrix::from_fn(k, k, |i, j| grads[i].dot(&grads[j]));
        let steps = 200usize;
        let mut best = f64::INFINITY;
        let mut counts = vec![0usize; k];
        loop {
            let used: usize = counts[..k - 1].iter().sum();
            if used <= steps {
                counts[k - 1] = steps - used;
                let a = DVector::from_iterator(k, counts.iter().map(|c| *c as f64 / steps as f64));
                best = best.min(a.dot(&(&gram * &a)));
            }
            let mut pos = 0;
            while pos < k - 1 {
                counts[pos] += 1;
                if counts[..k - 1].iter().sum::<usize>() <= steps {
                    break;
                }
                counts[pos] = 0;
                pos += 1;
            }
            if pos == k - 1 {
                break;
            }
        }
        let r = min_norm_element(&grads, 250, 1e-12).unwrap();
        prop_assert!(r.norm * r.norm <= best + 1e-6);
    }

    #[test]
    fn gradient_descent_never_beats_the_closed_form(seed in any::<u64>(), k in 2usize..4) {
        let data = regression(20, 4, k, seed);
        let preds = compute_optimal_predictors(&data).unwrap();
        let offsets = irreducible_losses(&data, &preds);
        let w = weights(k, seed);
        for q in 1..=k {
            let closed = scalarization_optimum(&preds, &offsets, &w, q).unwrap().weighted_loss();
            let gd = train_scalarized_gd(&data, &w, q, 0.2, 2_000, seed).unwrap();
            prop_assert!(gd.history.iter().all(|l| *l >= closed - 1e-9));
        }
    }

    #[test]
    fn mgda_trace_is_reproducible(seed in any::<u64>(), ub in any::<bool>()) {
        let data = regression(30, 4, 3, seed);
        let variant = if ub { MgdaVariant::Ub } else { MgdaVariant::Full };
        let config = MgdaConfig::new(1, variant, seed);
        let a = run_mgda(&data, &config).unwrap();
        let b = run_mgda(&data, &config).unwrap();
        prop_assert_eq!(&a.min_norms, &b.min_norms);
        prop_assert_eq!(&a.iterate_losses, &b.iterate_losses);
        prop_assert_eq!(a.min_norms.len(), a.epochs_run);
        prop_assert_eq!(a.iterate_losses.len(), a.epochs_run);
        if a.converged {
            prop_assert!(*a.min_norms.last().unwrap() < config.stop_tol);
        }
    }
}

#[test]
fn diagonal_gram_collapses_to_one_surface() {
    let yhat = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 0.5, 1.5]));
    let preds = OptimalPredictors::from_predictions(yhat).unwrap();
    let identity = SignPattern::identity(4);
    for p in sample_feasible_region(&preds, SurfaceKind::E, 500, 3).unwrap() {
        let ids = classify_point(&preds, SurfaceKind::E, &p.v, 1e-9).unwrap();
        assert_eq!(ids.len(), 8, "all patterns coincide when G is diagonal");
        assert!(ids.iter().any(|id| id.pattern == identity));
    }
}

#[test]
fn mgda_ub_converges_despite_irreducible_noise() {
    let data = regression(60, 5, 3, 11);
    let preds = compute_optimal_predictors(&data).unwrap();
    assert!(irreducible_losses(&data, &preds).min() > 0.1);
    for seed in 0..5 {
        let full = run_mgda(&data, &MgdaConfig::new(1, MgdaVariant::Full, seed)).unwrap();
        let ub = run_mgda(&data, &MgdaConfig::new(1, MgdaVariant::Ub, seed)).unwrap();
        assert!(full.converged && ub.converged, "seed {seed}");
    }
}
