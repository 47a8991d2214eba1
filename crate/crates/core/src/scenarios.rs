//! Scenario files shipped with the crate.

use crate::error::Result;
use crate::model::Scenario;
use crate::scalar::Scalar;

/// `(name, JSON text)` of every bundled scenario.
pub const BUNDLED: &[(&str, &str)] = &[
    ("topology-1", include_str!("../scenarios/topology-1.json")),
    ("topology-2-small-comm", include_str!("../scenarios/topology-2-small-comm.json")),
    ("topology-2-small-sensing", include_str!("../scenarios/topology-2-small-sensing.json")),
    ("m1-unit", include_str!("../scenarios/m1-unit.json")),
    ("symmetric", include_str!("../scenarios/symmetric.json")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}

/// Parsed and validated bundled scenario, or `None` for an unknown name.
pub fn bundled<T: Scalar>(name: &str) -> Option<Result<Scenario<T>>> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| Scenario::from_json_validated(text))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{sr_lower, sr_upper};
    use crate::model::build_network_params;

    #[test]
    fn all_bundled_scenarios_are_valid() {
        for name in names() {
            let s: Scenario<f64> = bundled(name).unwrap().unwrap();
            assert_eq!(s.name.as_deref(), Some(name));
        }
        assert!(bundled::<f64>("nope").is_none());
    }

    #[test]
    fn unit_scenarios_hit_their_gains() {
        for (name, value) in [("m1-unit", 0.75), ("symmetric", 0.5)] {
            let s: Scenario<f64> = bundled(name).unwrap().unwrap();
            let (p, _) = build_network_params(&s, s.av_start).unwrap();
            for (&a, &b) in p.alpha().iter().zip(p.beta()) {
                assert!((a - 1.0).abs() < 1e-15 && (b - 1.0).abs() < 1e-15);
            }
            let pw = s.fixed_powers().unwrap();
            assert!((sr_upper(&p, &pw).unwrap().distortion - value).abs() < 1e-15);
            assert!((sr_lower(&p, &pw).unwrap().distortion - value).abs() < 1e-15);
        }
    }
}
