use laplace_kinetics::telegraph::*;
use laplace_kinetics::verhulst::{solve_delta, InitialDensity, MixedDistribution1D, VerhulstParams};
use proptest::prelude::*;

fn params() -> VerhulstParams {
    VerhulstParams::new(-2.0, 0.5).unwrap()
}

/// Classical RK4 with a fixed fine step, for `dx/dτ = x + c x²`.
fn rk4(x0: f64, c: f64, dt: f64, steps: usize) -> f64 {
    let f = |x: f64| x + c * x * x;
    let h = dt / steps as f64;
    let mut x = x0;
    for _ in 0..steps {
        let k1 = f(x);
        let k2 = f(x + 0.5 * h * k1);
        let k3 = f(x + 0.5 * h * k2);
        let k4 = f(x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    x
}

proptest! {
    #[test]
    fn flow_matches_integrator(x0 in 0.01f64..1.5, c in -3.0f64..-0.2, dt in 0.0f64..3.0) {
        let exact = flow_exact(x0, c, dt).unwrap();
        let a = rk4(x0, c, dt, 4000);
        let b = rk4(x0, c, dt, 8000);
        // the two resolutions agree far below the target, so `b` is a valid reference
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((exact - b).abs() < 1e-10);
    }
}

#[test]
fn deterministic_across_batch_sizes_and_threads() {
    let init = InitialDensity::uniform(0.2, 0.5).unwrap();
    let mut cfg = McConfig::new(params(), init, 5000, vec![0.3, 1.0, 2.5], 99);
    cfg.batch_size = 7;
    let a = simulate(&cfg).unwrap();
    cfg.batch_size = 5000;
    let b = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| simulate(&cfg).unwrap());
    cfg.batch_size = 613;
    let c = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap().install(|| simulate(&cfg).unwrap());
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert!(a.samples.iter().all(|s| s.len() == 5000 && s.windows(2).all(|w| w[0] <= w[1])));
}

#[test]
fn noiseless_limit_is_deterministic_logistic() {
    let p = VerhulstParams::new_unchecked(-2.0, 0.0);
    let cfg = McConfig::new(p, InitialDensity::delta(0.3).unwrap(), 500, vec![0.5, 2.0], 3);
    let e = simulate(&cfg).unwrap();
    for (k, &tau) in cfg.checkpoints.iter().enumerate() {
        let target = flow_exact(0.3, -2.0, tau).unwrap();
        assert!(e.at(k).iter().all(|&x| (x - target).abs() < 1e-14));
    }
}

#[test]
fn noiseless_limit_pushes_forward_smooth_data() {
    let p = VerhulstParams::new_unchecked(-2.0, 0.0);
    let init = InitialDensity::uniform(0.1, 0.3).unwrap();
    let cfg = McConfig::new(p, init, 20000, vec![1.0], 8);
    let e = simulate(&cfg).unwrap();
    // the law at τ is uniform initial data carried by the flow: CDF(x) = (x̂ − 0.1)/0.2
    let cdf = |x: f64| {
        let back = x / (1f64.exp() + -2.0 * x * 1f64.exp_m1());
        ((back - 0.1) / 0.2).clamp(0.0, 1.0)
    };
    let n = e.paths as f64;
    let d = e
        .at(0)
        .iter()
        .enumerate()
        .map(|(i, &x)| (cdf(x) - i as f64 / n).abs().max((cdf(x) - (i + 1) as f64 / n).abs()))
        .fold(0.0, f64::max);
    assert!(d < 1.63 / n.sqrt() * 1.5, "{d}");
}

#[test]
fn mean_matches_exact_moment() {
    let cfg = McConfig::new(params(), InitialDensity::delta(0.5).unwrap(), 40000, vec![0.25, 1.0, 3.0], 21);
    let e = simulate(&cfg).unwrap();
    for (k, &tau) in cfg.checkpoints.iter().enumerate() {
        let exact = solve_delta(0.5, tau, &params()).unwrap().moment(1).unwrap();
        assert!((e.mean(k) - exact).abs() < 4.0 * e.std_error(k), "tau {tau}: {} vs {exact}", e.mean(k));
    }
}

#[test]
fn kolmogorov_distance_shrinks_like_inverse_root_n() {
    let tau = 1.0;
    let exact = solve_delta(0.5, tau, &params()).unwrap();
    let mut dists = Vec::new();
    for paths in [1_000, 10_000, 100_000] {
        let cfg = McConfig::new(params(), InitialDensity::delta(0.5).unwrap(), paths, vec![tau], 1234);
        let e = simulate(&cfg).unwrap();
        let d = kolmogorov_distance(e.at(0), &exact).unwrap();
        assert!(d * (paths as f64).sqrt() < 2.0, "paths {paths}: {d}");
        dists.push(d);
    }
    assert!(dists[2] < dists[0]);
}

#[test]
fn kolmogorov_trivial_cases() {
    let e = vec![0.5; 64];
    assert_eq!(kolmogorov_distance(&e, &solve_delta(0.5, 0.0, &params()).unwrap()).unwrap(), 0.0);
    let s = [0.11, 0.2, 0.35, 0.35, 0.9];
    assert_eq!(kolmogorov_distance(&s, &MixedDistribution1D::empirical(&s)).unwrap(), 0.0);
    // atoms are compared from both sides
    let d = kolmogorov_distance(&[0.2], &MixedDistribution1D::empirical(&[0.3])).unwrap();
    assert_eq!(d, 1.0);
}

#[test]
fn noise_correlation_decays_at_twice_the_flip_rate() {
    let lags: Vec<f64> = (1..=10).map(|i| 0.1 * i as f64).collect();
    let corr = noise_autocorrelation(1.0, &lags, 100_000, 17);
    let rate = fit_decay_rate(&lags, &corr);
    assert!((rate - 2.0).abs() < 0.2, "rate {rate}");
    let corr = noise_autocorrelation(2.5, &lags, 100_000, 17);
    assert!((fit_decay_rate(&lags, &corr) - 5.0).abs() < 0.5);
}

#[test]
fn blow_up_is_reported() {
    // a positive quadratic coefficient reaches infinity in finite time
    let p = VerhulstParams::new_unchecked(1.0, 0.5);
    let cfg = McConfig::new(p, InitialDensity::delta(0.5).unwrap(), 100, vec![5.0], 1);
    assert!(matches!(simulate(&cfg), Err(TelegraphError::Flagged { .. })));
}
