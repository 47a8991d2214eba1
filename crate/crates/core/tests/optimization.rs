use approx::assert_abs_diff_eq;
use sensorpath::metrics::{fr_lower, fr_upper, sr_lower, sr_upper};
use sensorpath::oracle::brute_force_power;
use sensorpath::power_alloc::{
    allocation_broadcast_view, fr_bounds_opt, fr_lower_opt, fr_upper_opt, sr_lower_opt, sr_upper_opt,
};
use sensorpath::{FrLowerMode, NetworkParams64, PowerAllocation64};

const RES: f64 = 1e-3;

fn brute(f: impl Fn(&PowerAllocation64) -> f64 + Sync, p: &NetworkParams64, total: f64) -> (f64, PowerAllocation64) {
    brute_force_power(f, p.r(), total, RES).unwrap()
}

#[test]
fn asymmetric_pair_matches_brute_force_for_every_family() {
    let p = NetworkParams64::with_unit_weights(vec![1.0, 2.0], vec![2.0, 1.0]).unwrap();
    let total = 10.0;
    let cases = [
        (sr_upper_opt(&p, total).unwrap().value, brute(|a| sr_upper(&p, a).unwrap().distortion, &p, total).0),
        (sr_lower_opt(&p, total).unwrap().value, brute(|a| sr_lower(&p, a).unwrap().distortion, &p, total).0),
        (fr_upper_opt(&p, total).unwrap().value, brute(|a| fr_upper(&p, a).unwrap().distortion, &p, total).0),
        (
            fr_lower_opt(&p, total, FrLowerMode::Exact).unwrap().value,
            brute(|a| fr_lower(&p, a, FrLowerMode::Exact).unwrap().distortion, &p, total).0,
        ),
    ];
    for (closed, search) in cases {
        assert!((closed - search).abs() < 1e-3, "{closed} vs {search}");
        assert!(search >= closed - 1e-12);
    }
}

#[test]
fn symmetric_field_optimum_matches_brute_force() {
    let p = NetworkParams64::with_unit_weights(vec![1.0; 2], vec![1.0; 2]).unwrap();
    let (upper, _) = fr_bounds_opt(&p, 2.0).unwrap();
    let (best, alloc) = brute(|a| fr_upper(&p, a).unwrap().distortion, &p, 2.0);
    assert_abs_diff_eq!(upper.value, best, epsilon = 1e-3);
    assert_abs_diff_eq!(alloc.p()[0], 1.0, epsilon = 2.0 * RES * 2.0);
}

#[test]
fn symmetric_brute_force_allocation_is_uniform() {
    let p = NetworkParams64::with_unit_weights(vec![0.7; 2], vec![0.4; 2]).unwrap();
    for f in [sr_upper, sr_lower, fr_upper] {
        let (_, a) = brute(|a| f(&p, a).unwrap().distortion, &p, 4.0);
        assert_abs_diff_eq!(a.p()[0], a.p()[1], epsilon = 4.0 * RES * 2.0);
    }
}

#[test]
fn optimised_allocations_spend_the_budget() {
    let p = NetworkParams64::new(vec![0.2, 0.9, 0.5], vec![0.8, 0.3, 0.6], vec![1.0; 3], vec![0.5, 1.5, 1.0]).unwrap();
    for total in [0.1, 3.0, 50.0] {
        for res in [
            sr_upper_opt(&p, total).unwrap(),
            sr_lower_opt(&p, total).unwrap(),
            fr_upper_opt(&p, total).unwrap(),
            fr_lower_opt(&p, total, FrLowerMode::Exact).unwrap(),
        ] {
            assert_abs_diff_eq!(res.allocation.weighted_total(), total, epsilon = 1e-12 * total);
            let bc = allocation_broadcast_view(&res).unwrap();
            assert_eq!(bc.recompute(&p), res.allocation.p());
        }
    }
}

#[test]
fn weak_sensor_is_switched_off_and_budget_respread() {
    // The second sensor's power cost exceeds the source multiplier by a
    // factor that drives its share far below the floor.
    let p = NetworkParams64::with_unit_weights(vec![1.0, 1e-9], vec![1.0, 1e-9]).unwrap();
    let res = sr_lower_opt(&p, 1.0).unwrap();
    assert_eq!(res.allocation.p()[1], 0.0);
    assert_abs_diff_eq!(res.allocation.p()[0], 1.0, epsilon = 1e-15);
}
