mod common;

use levcap::mc::{martingale_check, simulate_functionals, McConfig};
use levcap::Discount;

fn config(n_paths: usize, dt: f64, seed: u64) -> McConfig {
    McConfig {
        n_paths,
        dt,
        seed,
        ..McConfig::default()
    }
}

#[test]
fn recovery_term_matches_gamma() {
    let m = common::case1();
    let (b, y) = (3.0, 1.0);
    let est = simulate_functionals(&m, b + y, b, &config(40_000, 1e-3, 11)).unwrap();
    let gamma = m.evaluator(Discount::RatePlusRetirement).gamma(y).unwrap();
    let closed = (b + y).exp() - b.exp() * gamma;
    assert!(est.gamma_term.z_score(closed) < 3.0, "{:?} vs {closed}", est.gamma_term);
}

#[test]
fn halving_the_step_moves_means_by_less_than_one_standard_error() {
    let m = common::case2();
    let (x, b) = (common::x0(), 3.64);
    let coarse = simulate_functionals(&m, x, b, &config(50_000, 2e-3, 5)).unwrap();
    let fine = simulate_functionals(&m, x, b, &config(50_000, 1e-3, 5)).unwrap();
    for ((name, c), (_, f)) in coarse.named().into_iter().zip(fine.named()) {
        let se = c.std_error.max(f.std_error);
        assert!((c.mean - f.mean).abs() < se, "{name}: {} vs {} (s.e. {se})", c.mean, f.mean);
    }
}

#[test]
fn discounted_asset_value_is_a_martingale() {
    for lambda in [0.5, 1.0] {
        let levy = common::levy_with(lambda);
        let est = martingale_check(&levy, &common::market(), common::x0(), 1.0, 200_000, 3);
        assert!(est.z_score(100.0) < 3.0, "lambda={lambda}: {est:?}");
    }
}

#[test]
fn identical_configs_give_identical_estimates() {
    let m = common::case1();
    let cfg = config(2_000, 1e-3, 42);
    let a = simulate_functionals(&m, 4.6, 3.61, &cfg).unwrap();
    let b = simulate_functionals(&m, 4.6, 3.61, &cfg).unwrap();
    assert_eq!(a, b);
    let other = simulate_functionals(&m, 4.6, 3.61, &config(2_000, 1e-3, 43)).unwrap();
    assert_ne!(a, other);
}

#[test]
fn remote_barrier_leaves_only_the_running_flow() {
    let m = common::case1();
    let x = common::x0();
    let est = simulate_functionals(&m, x, x - 30.0, &config(4_000, 1e-3, 9)).unwrap();
    assert!(est.lambda_r.mean < 1e-6);
    assert!(est.lambda_rm.mean < 1e-6);
    let riskless = m.f1() / m.rate(Discount::RatePlusRetirement);
    assert!((est.m1_rm.mean - riskless).abs() < 1e-3 * riskless);
}
