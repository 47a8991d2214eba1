//! Worked examples, each checked against a hand evaluation or an oracle.

use approx::assert_abs_diff_eq;
use sensorpath::metrics::{fr_lower, fr_upper, mutual_info_bits, sr_lower, sr_upper};
use sensorpath::oracle::{brute_force_power, brute_force_waterfill, mc_af_mse, McConfig, DEFAULT_SEED};
use sensorpath::planner::candidate_costs;
use sensorpath::power_alloc::{fr_bounds_opt, solve_lambda_fr, solve_lambda_sr, sr_lower_opt, sr_upper_opt};
use sensorpath::rate_distortion::{
    remote_rd_distortion, ru_eigen, sufficient_stat_params, vector_rd_exact, vector_rd_highrate, water_fill,
};
use sensorpath::scenarios::bundled;
use sensorpath::{evaluate, FrLowerMode, MetricSpec, NetworkParams64, PowerAllocation64, PowerInput, Scenario64};

fn net(alpha: &[f64], beta: &[f64]) -> NetworkParams64 {
    NetworkParams64::with_unit_weights(alpha.to_vec(), beta.to_vec()).unwrap()
}

fn powers(p: &NetworkParams64, v: &[f64]) -> PowerAllocation64 {
    PowerAllocation64::new(v.to_vec(), p.r()).unwrap()
}

#[test]
fn fixed_power_values() {
    let one = net(&[1.0], &[1.0]);
    let pair = net(&[1.0, 1.0], &[1.0, 1.0]);
    let a1 = powers(&one, &[1.0]);
    let a2 = powers(&pair, &[1.0, 1.0]);
    assert_abs_diff_eq!(sr_upper(&one, &a1).unwrap().distortion, 0.75, epsilon = 1e-15);
    assert_abs_diff_eq!(sr_lower(&one, &a1).unwrap().distortion, 0.75, epsilon = 1e-15);
    assert_abs_diff_eq!(sr_upper(&pair, &a2).unwrap().distortion, 0.5, epsilon = 1e-15);
    assert_abs_diff_eq!(fr_upper(&one, &a1).unwrap().distortion, 1.0, epsilon = 1e-15);
    for mode in [FrLowerMode::HighRate, FrLowerMode::Exact] {
        assert_abs_diff_eq!(fr_lower(&one, &a1, mode).unwrap().distortion, 1.0, epsilon = 1e-15);
        let half = powers(&one, &[0.5]);
        assert_abs_diff_eq!(fr_lower(&one, &half, mode).unwrap().distortion, 4.0 / 3.0, epsilon = 1e-14);
    }
    let big = powers(&pair, &[1e8, 1e8]);
    assert_abs_diff_eq!(sr_lower(&pair, &big).unwrap().distortion, 1.0 / 3.0, epsilon = 1e-6);
}

#[test]
fn zero_power_gives_priors() {
    let p = net(&[0.3, 0.8], &[1.0, 1.0]).with_gamma(vec![1.0, 4.0]).unwrap();
    let z = powers(&p, &[0.0, 0.0]);
    assert_eq!(sr_upper(&p, &z).unwrap().distortion, 1.0);
    assert_eq!(sr_lower(&p, &z).unwrap().distortion, 1.0);
    assert_abs_diff_eq!(fr_upper(&p, &z).unwrap().distortion, 10.0, epsilon = 1e-13);
    let one = net(&[1.0], &[1.0]);
    let z1 = powers(&one, &[0.0]);
    assert_eq!(fr_lower(&one, &z1, FrLowerMode::Exact).unwrap().distortion, 2.0);
}

#[test]
fn information_values() {
    assert_eq!(mutual_info_bits(1.0).unwrap(), 0.0);
    assert_abs_diff_eq!(mutual_info_bits(0.25).unwrap(), 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(mutual_info_bits(0.75).unwrap(), 0.2075187496394219, epsilon = 1e-15);
}

#[test]
fn evaluate_dispatches() {
    let one = net(&[1.0], &[1.0]);
    let a1 = powers(&one, &[1.0]);
    let spec: MetricSpec = "sr-upper-fixed".parse().unwrap();
    assert_eq!(evaluate(&spec, &one, PowerInput::Fixed(&a1)).unwrap().distortion, 0.75);
    let spec: MetricSpec = "sr-lower-opt".parse().unwrap();
    assert_abs_diff_eq!(evaluate(&spec, &one, PowerInput::Budget(1.0)).unwrap().distortion, 0.75, epsilon = 1e-15);
    assert!(evaluate(&spec, &one, PowerInput::Fixed(&a1)).is_err());
}

#[test]
fn monte_carlo_brackets_closed_forms() {
    let one = net(&[1.0], &[1.0]);
    let pair = net(&[1.0, 1.0], &[1.0, 1.0]);
    let cases = [(one.clone(), powers(&one, &[1.0]), 0.75), (pair.clone(), powers(&pair, &[1.0, 1.0]), 0.5)];
    for (p, a, want) in cases {
        let est = mc_af_mse(&p, &a, McConfig::new(1_000_000, DEFAULT_SEED)).unwrap();
        assert!((est.sr_mse - want).abs() <= 3.0 * est.sr_se, "{} vs {want}", est.sr_mse);
    }
    let z = powers(&pair, &[0.0, 0.0]);
    let est = mc_af_mse(&pair, &z, McConfig::new(1_000_000, DEFAULT_SEED)).unwrap();
    assert!((est.sr_mse - 1.0).abs() <= 3.0 * est.sr_se);
    for (mse, se) in est.fr_mse.iter().zip(&est.fr_se) {
        assert!((mse - 2.0).abs() <= 3.0 * se);
    }
}

#[test]
fn remote_source_coding() {
    assert_eq!(remote_rd_distortion(&[0.4, 2.0], 0.0), 1.0);
    assert_abs_diff_eq!(remote_rd_distortion(&[1.0], 0.5), 0.75, epsilon = 1e-15);
    assert_abs_diff_eq!(remote_rd_distortion(&[1.0, 1.0], 200.0), 1.0 / 3.0, epsilon = 1e-15);
    let p = sufficient_stat_params(&[1.0, 1.0, 1.0]);
    assert_abs_diff_eq!(p.sigma_t_sq, 0.75, epsilon = 1e-15);
    assert_abs_diff_eq!(p.d_est, 0.25, epsilon = 1e-15);
    let p = sufficient_stat_params(&[1e-6]);
    assert!(p.sigma_t_sq < 1e-11 && p.d_est > 1.0 - 1e-11);
}

#[test]
fn field_source_coding() {
    let eig = ru_eigen(&[1.0, 1.0], &[1.0, 1.0]).unwrap();
    assert_abs_diff_eq!(eig.lambdas()[0], 1.0, epsilon = 1e-14);
    assert_abs_diff_eq!(eig.lambdas()[1], 3.0, epsilon = 1e-14);
    let r = 0.5 * 12f64.log2();
    assert_abs_diff_eq!(vector_rd_exact(&eig, r), 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(vector_rd_highrate(&eig, r), 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(water_fill(&eig, r).theta, 0.5, epsilon = 1e-12);
    assert_abs_diff_eq!(vector_rd_exact(&eig, 0.0), 4.0, epsilon = 1e-14);
    assert_abs_diff_eq!(vector_rd_highrate(&eig, 0.0), 2.0 * 3f64.sqrt(), epsilon = 1e-14);
    let brute = brute_force_waterfill(eig.lambdas(), eig.gamma_prime(), r, 1e-3).unwrap();
    assert_abs_diff_eq!(brute, 1.0, epsilon = 1e-3);

    let skew = ru_eigen(&[3.0, 4.0], &[1.0, 2.0]).unwrap();
    assert!(skew.gamma_prime().iter().product::<f64>() >= 2.0 - 1e-12);
}

#[test]
fn multipliers() {
    assert_abs_diff_eq!(solve_lambda_sr(&net(&[1.0], &[1.0])).unwrap().value, 1.0, epsilon = 1e-13);
    let pair = net(&[1.0, 1.0], &[1.0, 1.0]);
    assert_abs_diff_eq!(solve_lambda_sr(&pair).unwrap().value, 2.0 / 3.0, epsilon = 1e-13);
    let roots = solve_lambda_fr(&pair, 2.0).unwrap();
    assert_abs_diff_eq!(roots.lambda2.value, 2.0 / 3.0, epsilon = 1e-13);
    let scaled = pair.clone().with_r(vec![3.0, 3.0]).unwrap();
    assert_abs_diff_eq!(solve_lambda_sr(&scaled).unwrap().value, 2.0, epsilon = 1e-12);
}

#[test]
fn optimised_values() {
    let one = net(&[1.0], &[1.0]);
    let pair = net(&[1.0, 1.0], &[1.0, 1.0]);
    for res in [sr_lower_opt(&one, 1.0).unwrap(), sr_upper_opt(&one, 1.0).unwrap()] {
        assert_abs_diff_eq!(res.value, 0.75, epsilon = 1e-14);
        assert_eq!(res.allocation.p(), &[1.0]);
    }
    let res = sr_lower_opt(&pair, 2.0).unwrap();
    assert_abs_diff_eq!(res.value, 0.5, epsilon = 1e-14);
    assert_abs_diff_eq!(res.allocation.p()[0], 1.0, epsilon = 1e-14);
    assert_abs_diff_eq!(res.allocation.p()[1], 1.0, epsilon = 1e-14);
    assert_abs_diff_eq!(sr_lower_opt(&pair, 1e9).unwrap().value, 1.0 / 3.0, epsilon = 1e-8);

    let (upper, lower) = fr_bounds_opt(&one, 1.0).unwrap();
    assert_abs_diff_eq!(upper.value, 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(lower.value, 2.0, epsilon = 1e-12);
    assert!(!lower.valid);
    let (upper, lower) = fr_bounds_opt(&pair, 1e6).unwrap();
    let (_, lower_more) = fr_bounds_opt(&pair, 1e8).unwrap();
    assert_abs_diff_eq!(lower.value, 2.0 * (2e-6f64).sqrt(), epsilon = 1e-15);
    assert!(lower_more.value < lower.value && lower.value <= upper.value);
}

#[test]
fn optimised_source_lower_matches_grid_search() {
    let p = net(&[1.0, 2.0], &[2.0, 1.0]);
    let (best, _) = brute_force_power(|a| sr_lower(&p, a).unwrap().distortion, p.r(), 10.0, 1e-3).unwrap();
    assert_abs_diff_eq!(sr_lower_opt(&p, 10.0).unwrap().value, best, epsilon = 1e-3);
}

#[test]
fn gains_from_geometry() {
    let s: Scenario64 = bundled("topology-1").unwrap().unwrap();
    let mut t = s.clone();
    t.b = 10.0;
    t.a = 10.0;
    t.source_pos = [1.5, 0.0];
    t.sensor_pos = vec![[0.5, 0.0], [1.0, 0.0]];
    t.per_sensor_power = Some(vec![1.0, 1.0]);
    t.gamma = None;
    t.r = None;
    let (p, warn) = sensorpath::build_network_params(&t, [-1.0, 0.0]).unwrap();
    assert!(warn.is_empty());
    assert_eq!(p.beta()[0], 10.0);
    assert_eq!(p.alpha()[1], 2.5);
    let (p, warn) = sensorpath::build_network_params(&t, [1.0, 0.0]).unwrap();
    assert_eq!(warn.len(), 1);
    assert_eq!(p.alpha()[1], 10.0 / 1e-12);
}

#[test]
fn planner_candidates() {
    let s: Scenario64 = bundled("symmetric").unwrap().unwrap();
    let spec: MetricSpec = "fr-upper-fixed".parse().unwrap();
    let c = candidate_costs(&s, spec, [0.3, 0.0]).unwrap();
    let (up, down) = (c[3].cost, c[4].cost);
    assert!((up - down).abs() <= 1e-12 * up.abs().max(1.0));

    let corner = [s.grid.x_max, s.grid.y_max];
    assert_eq!(candidate_costs(&s, spec, corner).unwrap().len(), 3);

    let mut silent = s.clone();
    silent.per_sensor_power = Some(vec![0.0, 0.0]);
    let spec: MetricSpec = "sr-upper-fixed".parse().unwrap();
    assert!(candidate_costs(&silent, spec, [0.3, 0.0]).unwrap().iter().all(|c| c.cost == 1.0));
}
