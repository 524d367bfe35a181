//! Cross-checks against independent computations and Monte-Carlo trends.

use hrpca_core::baselines::{pca_baseline, pp_approx};
use hrpca_core::datagen::{generate, GenSpec};
use hrpca_core::hrpca::{run, HrPcaConfig};
use hrpca_core::kernel::run_kernel;
use hrpca_core::linalg::dot;
use hrpca_core::metrics::rve;
use hrpca_core::sampling::mix_seed;
use hrpca_core::tailbound::{asymptotic_bound, KappaGrid};
use hrpca_core::{BoundQuery, KernelFn, TailModel};

fn dense_bound(model: &TailModel, lambda: f64, r: f64, points: usize) -> f64 {
    let (lo, hi) = (1e-4f64.ln(), 1e4f64.ln());
    let mut best = 0.0f64;
    for i in 0..points {
        let k = (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp();
        let arg = 1.0 - lambda * (1.0 + k) / ((1.0 - lambda) * k);
        best = best.max(model.tail_weight(arg) / (1.0 + k));
    }
    let c = lambda / (1.0 - lambda);
    best * model.tail_weight(r - c) / model.tail_weight(r)
}

#[test]
fn bound_matches_dense_kappa_grid() {
    let g = TailModel::gaussian();
    let oracle = dense_bound(&g, 0.2, 0.8, 100_000);
    let got = asymptotic_bound(&g, &BoundQuery::new(0.2, 0.8)).unwrap();
    assert!((got - oracle).abs() < 1e-4, "{got} vs {oracle}");
    assert!(got > 0.0 && got < 1.0);

    let mut fine = BoundQuery::new(0.2, 0.8);
    fine.kappa = KappaGrid {
        points: 20_000,
        ..KappaGrid::default()
    };
    let refined = asymptotic_bound(&g, &fine).unwrap();
    assert!((refined - got).abs() < 1e-4);
}

#[test]
fn gaussian_tail_weight_at_half() {
    let v = TailModel::gaussian().tail_weight(0.5);
    assert!((v - 0.0713).abs() < 1e-3, "{v}");
}

#[test]
fn projection_pursuit_trails_robust_pca_in_high_dimension() {
    let (mut pp, mut hr) = (0.0, 0.0);
    for trial in 0..20u64 {
        let seed = mix_seed(31, 0, trial);
        let (data, truth) = generate(&GenSpec::new(200, 200, 1, 0.2, 2.0, 10.0, seed)).unwrap();
        pp += truth.score(&pp_approx(&data, 100, 1).unwrap()).unwrap().ev;
        let cfg = HrPcaConfig::defaults(200, 1, seed);
        hr += truth.score(&run(&data, &cfg).unwrap().basis).unwrap().ev;
    }
    assert!(pp < hr, "pp {pp} vs robust {hr}");
}

#[test]
fn robust_ev_weakly_decreases_with_contamination() {
    let mut means = Vec::new();
    for (cell, lambda) in [0.1, 0.2, 0.3, 0.4].into_iter().enumerate() {
        let mut ev = 0.0;
        for trial in 0..20u64 {
            let seed = mix_seed(77, cell as u64, trial);
            let (data, truth) = generate(&GenSpec::new(100, 50, 1, lambda, 3.0, 10.0, seed)).unwrap();
            let cfg = HrPcaConfig::defaults(100, 1, seed);
            ev += truth.score(&run(&data, &cfg).unwrap().basis).unwrap().ev / 20.0;
        }
        means.push(ev);
    }
    for w in means.windows(2) {
        assert!(w[1] <= w[0] + 0.05, "{means:?}");
    }
}

#[test]
fn champion_is_best_candidate_and_rescored_on_full_set() {
    for seed in 0..5 {
        let (data, _) = generate(&GenSpec::new(60, 10, 2, 0.25, 3.0, 8.0, seed)).unwrap();
        let cfg = HrPcaConfig::defaults(60, 2, seed);
        let out = run(&data, &cfg).unwrap();
        let best = out
            .trace
            .iterations
            .iter()
            .map(|r| r.candidate_value)
            .fold(0.0, f64::max);
        assert_eq!(out.opt, best);
        assert!((rve(&out.basis, &data, cfg.t_hat).unwrap() - out.opt).abs() < 1e-10);
        let removed = out.trace.removed_indices();
        let mut uniq = removed.clone();
        uniq.sort_unstable();
        uniq.dedup();
        assert_eq!(uniq.len(), removed.len());
    }
}

#[test]
fn linear_kernel_directions_match_input_space_basis() {
    let (data, _) = generate(&GenSpec::new(50, 8, 2, 0.2, 3.0, 6.0, 4)).unwrap();
    let cfg = HrPcaConfig::defaults(50, 2, 9);
    let linear = run(&data, &cfg).unwrap();
    let kernel = run_kernel(&data, &KernelFn::Linear, &cfg).unwrap();
    let dirs = kernel.model.linear_directions().unwrap();
    for (j, w) in dirs.iter().enumerate() {
        assert!((dot(w, linear.basis.vector(j)).abs() - 1.0).abs() < 1e-8);
    }
}

#[test]
fn clean_data_single_pass_recovers_signal() {
    let (data, truth) = generate(&GenSpec::new(200, 20, 3, 0.0, 10.0, 1.0, 12)).unwrap();
    let ev = truth.score(&pca_baseline(&data, 3).unwrap()).unwrap().ev;
    assert!(ev > 0.99, "{ev}");
}
