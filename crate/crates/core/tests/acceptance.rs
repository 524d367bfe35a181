//! Acceptance gate. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hrpca_core::baselines::{mvt, pca_baseline};
use hrpca_core::datagen::{generate, noise_explosion_report, GenSpec};
use hrpca_core::hrpca::{run, HrPcaConfig};
use hrpca_core::kernel::{center_gram, kernel_pca, run_kernel};
use hrpca_core::linalg::{dot, gram, orthonormalize};
use hrpca_core::metrics::rve;
use hrpca_core::sampling::{mix_seed, removal_rng, sample_weighted, stream_rng};
use hrpca_core::tailbound::{asymptotic_bound, bound_curve, TrimLevel};
use hrpca_core::{BoundQuery, Error, KernelFn, Mat, ObservationSet, TailModel};
use rand::Rng;
use rand_distr::StandardNormal;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn random_points<R: Rng>(rng: &mut R, n: usize, m: usize) -> ObservationSet {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..m).map(|_| rng.sample::<f64, _>(StandardNormal) * 3.0).collect())
        .collect();
    ObservationSet::from_points(&rows).unwrap()
}

fn linear_kernel_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = stream_rng(2024, 11);
    let mut worst = 0.0f64;
    for case in 0..20u64 {
        let n = rng.random_range(10..=200);
        let m = rng.random_range(2..=50);
        let d = rng.random_range(1..=3.min(m));
        let data = if case % 2 == 0 {
            let spec = GenSpec::new(n, m, d, 0.2, 4.0, 8.0, case);
            generate(&spec).map_err(|e| e.to_string())?.0
        } else {
            random_points(&mut rng, n, m)
        };
        let mut cfg = HrPcaConfig::defaults(n, d, 100 + case);
        cfg.t_bar = cfg.t_bar.min(rng.random_range(5..=n));
        cfg.t_hat = rng.random_range(n / 2..=n);
        let linear = run(&data, &cfg).map_err(|e| e.to_string())?;
        let kernel = run_kernel(&data, &KernelFn::Linear, &cfg).map_err(|e| e.to_string())?;
        check(
            linear.trace.removed_indices() == kernel.trace.removed_indices(),
            format!("case {case}: removal traces differ"),
        )?;
        for (a, b) in linear.trace.iterations.iter().zip(&kernel.trace.iterations) {
            worst = worst.max((a.candidate_value - b.candidate_value).abs());
        }
        worst = worst.max((linear.opt - kernel.opt).abs());
    }
    let elapsed = start.elapsed();
    check(worst <= 1e-8, format!("RVE gap {worst:e}"))?;
    check(elapsed < Duration::from_secs(30), format!("took {elapsed:?}"))?;
    Ok(format!("20 datasets, max RVE gap {worst:.1e}, {elapsed:.2?}"))
}

fn rve_brute_force() -> Outcome {
    let mut rng = stream_rng(7, 3);
    for case in 0..100 {
        let n = rng.random_range(1..=20);
        let m = rng.random_range(1..=6);
        let d = rng.random_range(1..=m);
        let t_hat = rng.random_range(1..=n);
        let data = random_points(&mut rng, n, m);
        let dirs: Vec<Vec<f64>> = (0..d)
            .map(|_| (0..m).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        let basis = orthonormalize(&dirs).map_err(|e| e.to_string())?;
        let expected: f64 = basis
            .iter()
            .map(|w| {
                let mut sq: Vec<f64> = data.iter().map(|y| dot(w, y).powi(2)).collect();
                sq.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let mut s = 0.0;
                for v in &sq[..t_hat] {
                    s += v;
                }
                s / n as f64
            })
            .sum();
        let got = rve(&basis, &data, t_hat).map_err(|e| e.to_string())?;
        check(got == expected, format!("case {case}: {got} != {expected}"))?;
    }
    Ok("100 random triples match exactly".into())
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize) -> f64 {
    let h = (b - a) / intervals as f64;
    let mut s = f(a) + f(b);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

fn tail_weight_closed_forms() -> Outcome {
    let gauss = TailModel::gaussian();
    let uni = TailModel::uniform();
    let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut worst_u = 0.0f64;
    let mut worst_g = 0.0f64;
    for k in 1..=99 {
        let a = k as f64 / 100.0;
        worst_u = worst_u.max((uni.tail_weight(a) - a.powi(3)).abs());
        let c = gauss.c_alpha(a).map_err(|e| e.to_string())?;
        let closed = a - 2.0 * c * phi(c);
        let quad = simpson(|x| x * x * phi(x), -c, c, 20_000);
        worst_g = worst_g.max((gauss.tail_weight(a) - closed).abs());
        worst_g = worst_g.max((gauss.tail_weight(a) - quad).abs());
    }
    check(worst_u <= 1e-10, format!("uniform error {worst_u:e}"))?;
    check(worst_g <= 1e-8, format!("gaussian error {worst_g:e}"))?;
    for model in [&gauss, &uni] {
        check(model.tail_weight(0.0) == 0.0, "V(0) != 0")?;
        check(model.tail_weight(1.0) == 1.0, "V(1) != 1")?;
    }
    Ok(format!("uniform {worst_u:.1e}, gaussian {worst_g:.1e}, endpoints exact"))
}

fn bound_endpoints() -> Outcome {
    let lambdas: Vec<f64> = (0..=90).map(|k| k as f64 * 0.005).collect();
    let mut summary = Vec::new();
    for model in [TailModel::gaussian(), TailModel::uniform()] {
        let at_zero = asymptotic_bound(&model, &BoundQuery::new(0.0, 0.5)).map_err(|e| e.to_string())?;
        check((at_zero - 1.0).abs() <= 1e-3, format!("{}: bound(0) = {at_zero}", model.name()))?;
        let curve = bound_curve(&model, &lambdas, TrimLevel::OfTotal(0.5)).map_err(|e| e.to_string())?;
        check((curve[0].1 - 1.0).abs() <= 1e-3, "curve does not start at 1")?;
        for &(l, b) in &curve {
            check(b > 0.0, format!("{}: bound({l}) = {b}", model.name()))?;
        }
        for w in curve.windows(2) {
            check(w[1].1 <= w[0].1 + 1e-12, format!("{}: increases at {}", model.name(), w[1].0))?;
        }
        summary.push(format!("{} bound(0.45) = {:.2e}", model.name(), curve.last().unwrap().1));
    }
    Ok(summary.join(", "))
}

fn robustness_gap() -> Outcome {
    let start = Instant::now();
    let (mut hr, mut pca) = (0.0, 0.0);
    for trial in 0..20u64 {
        let seed = mix_seed(5, 0, trial);
        let (data, truth) = generate(&GenSpec::new(100, 100, 1, 0.3, 5.0, 10.0, seed)).map_err(|e| e.to_string())?;
        let cfg = HrPcaConfig::defaults(100, 1, seed);
        hr += truth.score(&run(&data, &cfg).map_err(|e| e.to_string())?.basis).unwrap().ev;
        pca += truth.score(&pca_baseline(&data, 1).unwrap()).unwrap().ev;
    }
    hr /= 20.0;
    pca /= 20.0;
    let elapsed = start.elapsed();
    check(hr - pca >= 0.2, format!("gap {:.3}", hr - pca))?;
    check(hr >= 0.5, format!("robust EV {hr:.3}"))?;
    check(elapsed < Duration::from_secs(120), format!("took {elapsed:?}"))?;
    Ok(format!("robust EV {hr:.3}, PCA EV {pca:.3}, {elapsed:.2?}"))
}

fn zero_contamination() -> Outcome {
    let mut mean_ev = 0.0;
    for trial in 0..20u64 {
        let seed = mix_seed(6, 0, trial);
        let (data, truth) = generate(&GenSpec::new(100, 100, 1, 0.0, 10.0, 1.0, seed)).map_err(|e| e.to_string())?;
        let cfg = HrPcaConfig {
            d: 1,
            t_bar: 0,
            t_hat: 100,
            seed,
            center: false,
        };
        let robust = run(&data, &cfg).map_err(|e| e.to_string())?.basis;
        let plain = pca_baseline(&data, 1).unwrap();
        check(robust == plain, format!("trial {trial}: output differs from PCA"))?;
        mean_ev += truth.score(&robust).unwrap().ev / 20.0;
    }
    check(mean_ev >= 0.9, format!("mean EV {mean_ev:.3}"))?;
    Ok(format!("identical to PCA on 20 trials, mean EV {mean_ev:.4}"))
}

fn noise_explosion() -> Outcome {
    let (mut ratio, mut cos) = (0.0, 0.0);
    for trial in 0..5u64 {
        let (data, truth) = generate(&GenSpec::new(100, 1000, 1, 0.0, 2.0, 1.0, mix_seed(7, 0, trial))).map_err(|e| e.to_string())?;
        let r = noise_explosion_report(&truth, &data).map_err(|e| e.to_string())?;
        ratio += r.noise_norm_ratio / 5.0;
        cos += r.mean_abs_cos / 5.0;
    }
    check((0.95..=1.05).contains(&ratio), format!("noise norm ratio {ratio:.4}"))?;
    check(cos <= 0.2, format!("mean |cos| {cos:.4}"))?;
    Ok(format!("noise norm / sqrt(m) = {ratio:.4}, mean |cos| = {cos:.4}"))
}

fn mvt_breakdown() -> Outcome {
    let (square, _) = generate(&GenSpec::new(100, 100, 1, 0.2, 5.0, 10.0, 8)).map_err(|e| e.to_string())?;
    match mvt(&square, 0.05, 10, 1) {
        Err(Error::IllConditioned { .. }) => {}
        other => return Err(format!("n = m: expected ill-conditioned, got {other:?}")),
    }
    let (tall, truth) = generate(&GenSpec::new(100, 5, 1, 0.2, 5.0, 10.0, 8)).map_err(|e| e.to_string())?;
    let out = mvt(&tall, 0.05, 10, 1).map_err(|e| e.to_string())?;
    let ev = truth.score(&out.basis).unwrap().ev;
    check(ev.is_finite(), "non-finite EV")?;
    Ok(format!("ill-conditioned at n = m = 100, EV {ev:.3} at n = 100, m = 5"))
}

fn removal_law() -> Outcome {
    let weights = [3.0, 1.0, 0.0];
    let mut rng = removal_rng(9);
    let mut counts = [0usize; 3];
    let draws = 100_000;
    for _ in 0..draws {
        counts[sample_weighted(&weights, &mut rng).index] += 1;
    }
    let freq: Vec<f64> = counts.iter().map(|&c| c as f64 / draws as f64).collect();
    check((freq[0] - 0.75).abs() <= 0.01, format!("freq {freq:?}"))?;
    check((freq[1] - 0.25).abs() <= 0.01, format!("freq {freq:?}"))?;
    check(counts[2] == 0, "zero-weight point drawn")?;
    Ok(format!("frequencies {:.4} / {:.4} / {:.4}", freq[0], freq[1], freq[2]))
}

fn normalization_gap(alpha: &[f64], k: &Mat) -> f64 {
    (dot(alpha, &k.mat_vec(alpha).unwrap()) - 1.0).abs()
}

fn kernel_normalization() -> Outcome {
    let mut worst = 0.0f64;
    let mut emitted = 0usize;
    let kernels = [
        KernelFn::Linear,
        KernelFn::Rbf { gamma: 0.1 },
        KernelFn::Polynomial { degree: 2, offset: 1.0 },
    ];
    let mut rng = stream_rng(10, 0);
    for seed in 0..6u64 {
        let (data, _) = generate(&GenSpec::new(40, 6, 2, 0.2, 3.0, 5.0, seed)).map_err(|e| e.to_string())?;
        for k in &kernels {
            for center in [false, true] {
                let mut g = gram(&data, k).unwrap();
                if center {
                    center_gram(&mut g);
                }
                let pcs = kernel_pca(&g, 3).map_err(|e| e.to_string())?;
                for a in &pcs.alphas {
                    worst = worst.max(normalization_gap(a, &g));
                    emitted += 1;
                }

                let mut cfg = HrPcaConfig::defaults(40, 2, seed);
                cfg.center = center;
                cfg.t_bar = rng.random_range(0..=cfg.t_bar);
                let out = run_kernel(&data, k, &cfg).map_err(|e| e.to_string())?;
                let support = gram(&out.model.support_points, &out.model.kernel).unwrap();
                for a in &out.model.coefficients {
                    worst = worst.max(normalization_gap(a, &support));
                    emitted += 1;
                }
            }
        }
    }
    check(worst <= 1e-8, format!("worst |a^T K a - 1| = {worst:e}"))?;
    Ok(format!("{emitted} coefficient vectors, worst deviation {worst:.1e}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("linear-kernel oracle equivalence", linear_kernel_equivalence),
        ("robust variance brute-force oracle", rve_brute_force),
        ("tail-weight closed forms", tail_weight_closed_forms),
        ("bound endpoints", bound_endpoints),
        ("robustness gap over PCA", robustness_gap),
        ("zero-contamination optimality", zero_contamination),
        ("noise explosion diagnostic", noise_explosion),
        ("iterative trimming breakdown", mvt_breakdown),
        ("removal-probability law", removal_law),
        ("kernel normalization", kernel_normalization),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(msg)
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
