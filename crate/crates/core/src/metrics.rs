//! Distortion bounds at a fixed power vector.
//!
//! Upper bounds come from amplify-and-forward: sensor `m` sends
//! `sqrt(P_m / (1 + beta_m^2)) U_m` and the receiver applies the LMMSE
//! estimator to `Y`. Lower bounds invert a rate-distortion function at the
//! largest rate the MAC can deliver, `R = 1/2 log2(1 + B + A^2)` where
//!
//! * `c_m = alpha_m sqrt(P_m / (1 + beta_m^2))` is the effective amplitude,
//! * `A = sum beta_m c_m` is the coherent source term,
//! * `B = sum c_m^2` is the forwarded sensing noise.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Bound, FrLowerMode, MetricSpec, NetworkParams, Objective, PowerAllocation, PowerMode};
use crate::power_alloc;
use crate::rate_distortion::{
    highrate_level, remote_rd_distortion, ru_eigen, vector_rd_exact, vector_rd_highrate,
};
use crate::scalar::{sum, Scalar};

/// A distortion bound value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundValue<T> {
    pub distortion: T,
    /// Per-sensor distortions `J_m` (field upper bound only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<T>>,
    /// False when the formula was evaluated outside its validity regime.
    pub valid: bool,
}

impl<T> BoundValue<T> {
    fn plain(distortion: T) -> Self {
        Self {
            distortion,
            components: None,
            valid: true,
        }
    }
}

/// Second-order statistics of the AF link for one power vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkStats<T> {
    pub amplitudes: Vec<T>,
    pub coherent: T,
    pub noise: T,
    pub sensing_energy: T,
}

impl<T: Scalar> LinkStats<T> {
    pub fn new(params: &NetworkParams<T>, p: &PowerAllocation<T>) -> Result<Self> {
        if p.len() != params.len() {
            return Err(Error::InvalidParams(format!(
                "power vector has length {}, network has {} sensors",
                p.len(),
                params.len()
            )));
        }
        let amplitudes: Vec<T> = (0..params.len())
            .map(|m| {
                let b = params.beta()[m];
                params.alpha()[m] * (p.p()[m] / (T::one() + b * b)).sqrt()
            })
            .collect();
        let coherent = sum(amplitudes.iter().zip(params.beta()).map(|(&c, &b)| b * c));
        let noise = sum(amplitudes.iter().map(|&c| c * c));
        Ok(Self {
            amplitudes,
            coherent,
            noise,
            sensing_energy: params.sensing_energy(),
        })
    }

    /// `E[Y^2] = 1 + A^2 + B`.
    pub fn output_power(&self) -> T {
        T::one() + self.coherent * self.coherent + self.noise
    }

    /// Largest rate the MAC supports with linear encoders, in bits.
    pub fn rate_bits(&self) -> T {
        T::lit(0.5) * self.output_power().log2()
    }
}

/// Total received SNR `1 + A^2 + B` at the given powers.
pub fn received_snr<T: Scalar>(params: &NetworkParams<T>, p: &PowerAllocation<T>) -> Result<T> {
    Ok(LinkStats::new(params, p)?.output_power())
}

/// Source-reconstruction MSE achieved by amplify-and-forward.
pub fn sr_upper<T: Scalar>(params: &NetworkParams<T>, p: &PowerAllocation<T>) -> Result<BoundValue<T>> {
    let l = LinkStats::new(params, p)?;
    Ok(BoundValue::plain((T::one() + l.noise) / l.output_power()))
}

/// Source-reconstruction converse: no scheme beats this MSE at these powers.
pub fn sr_lower<T: Scalar>(params: &NetworkParams<T>, p: &PowerAllocation<T>) -> Result<BoundValue<T>> {
    let l = LinkStats::new(params, p)?;
    let s = l.sensing_energy;
    let d = (T::one() + s / l.output_power()) / (T::one() + s);
    Ok(BoundValue::plain(d))
}

/// Same value as [`sr_lower`], computed by composing the remote
/// rate-distortion function with the MAC rate.
pub fn sr_lower_via_rate<T: Scalar>(params: &NetworkParams<T>, p: &PowerAllocation<T>) -> Result<T> {
    let l = LinkStats::new(params, p)?;
    Ok(remote_rd_distortion(params.beta(), l.rate_bits()))
}

/// Weighted field MSE achieved by amplify-and-forward, with per-sensor terms.
pub fn fr_upper<T: Scalar>(params: &NetworkParams<T>, p: &PowerAllocation<T>) -> Result<BoundValue<T>> {
    let l = LinkStats::new(params, p)?;
    let ey2 = l.output_power();
    let components: Vec<T> = (0..params.len())
        .map(|m| {
            let b = params.beta()[m];
            let cross = l.amplitudes[m] + b * l.coherent;
            T::one() + b * b - cross * cross / ey2
        })
        .collect();
    let distortion = sum(components.iter().zip(params.gamma()).map(|(&j, &g)| g * j));
    Ok(BoundValue {
        distortion,
        components: Some(components),
        valid: true,
    })
}

/// Unit-weight field upper bound in its expanded form
/// `M + S - (B + (2 + S) A^2) / (1 + A^2 + B)`; ignores `gamma`.
pub fn fr_upper_unit_weights<T: Scalar>(params: &NetworkParams<T>, p: &PowerAllocation<T>) -> Result<T> {
    let l = LinkStats::new(params, p)?;
    let m = T::from_usize(params.len()).expect("sensor count fits");
    let s = l.sensing_energy;
    let a2 = l.coherent * l.coherent;
    Ok(m + s - (l.noise + (T::lit(2.0) + s) * a2) / l.output_power())
}

/// Field-reconstruction converse at these powers.
///
/// `Exact` reverse water-fills at the MAC rate and is valid everywhere.
/// `HighRate` is the closed form assuming every eigen-component is coded;
/// it is flagged invalid when the implied water level breaks that.
pub fn fr_lower<T: Scalar>(
    params: &NetworkParams<T>,
    p: &PowerAllocation<T>,
    mode: FrLowerMode,
) -> Result<BoundValue<T>> {
    let l = LinkStats::new(params, p)?;
    let eig = ru_eigen(params.beta(), params.gamma())?;
    let rate = l.rate_bits();
    Ok(match mode {
        FrLowerMode::Exact => BoundValue::plain(vector_rd_exact(&eig, rate)),
        FrLowerMode::HighRate => {
            let bottom = eig.weighted_variances().into_iter().fold(T::infinity(), T::min);
            BoundValue {
                distortion: vector_rd_highrate(&eig, rate),
                components: None,
                valid: highrate_level(&eig, rate) <= bottom * (T::one() + T::tol(1e-12)),
            }
        }
    })
}

/// Mutual information `I(S; S_hat) = -1/2 log2 D` of a source-reconstruction MSE.
pub fn mutual_info_bits<T: Scalar>(distortion: T) -> Result<T> {
    if !(distortion > T::zero() && distortion <= T::one()) {
        return Err(Error::Domain {
            what: "distortion",
            range: "(0, 1]",
            value: distortion.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(-T::lit(0.5) * distortion.log2())
}

/// Power argument of [`evaluate`].
#[derive(Debug, Clone, Copy)]
pub enum PowerInput<'a, T> {
    Fixed(&'a PowerAllocation<T>),
    Budget(T),
}

/// Dispatches to the bound selected by `spec`.
pub fn evaluate<T: Scalar>(
    spec: &MetricSpec,
    params: &NetworkParams<T>,
    power: PowerInput<'_, T>,
) -> Result<BoundValue<T>> {
    let mode = spec.fr_lower_mode.unwrap_or_default();
    match (spec.power, power) {
        (PowerMode::Fixed, PowerInput::Fixed(p)) => match (spec.objective, spec.bound) {
            (Objective::Sr, Bound::Upper) => sr_upper(params, p),
            (Objective::Sr, Bound::Lower) => sr_lower(params, p),
            (Objective::Fr, Bound::Upper) => fr_upper(params, p),
            (Objective::Fr, Bound::Lower) => fr_lower(params, p, mode),
        },
        (PowerMode::Optimized, PowerInput::Budget(total)) => {
            let opt = match (spec.objective, spec.bound) {
                (Objective::Sr, Bound::Upper) => power_alloc::sr_upper_opt(params, total)?,
                (Objective::Sr, Bound::Lower) => power_alloc::sr_lower_opt(params, total)?,
                (Objective::Fr, Bound::Upper) => power_alloc::fr_upper_opt(params, total)?,
                (Objective::Fr, Bound::Lower) => power_alloc::fr_lower_opt(params, total, mode)?,
            };
            Ok(BoundValue {
                distortion: opt.value,
                components: None,
                valid: opt.valid,
            })
        }
        (PowerMode::Fixed, PowerInput::Budget(_)) => Err(Error::PowerFormMismatch {
            expected: "a fixed per-sensor",
        }),
        (PowerMode::Optimized, PowerInput::Fixed(_)) => Err(Error::PowerFormMismatch {
            expected: "a total-budget",
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit(m: usize) -> NetworkParams<f64> {
        NetworkParams::with_unit_weights(vec![1.0; m], vec![1.0; m]).unwrap()
    }

    fn powers(params: &NetworkParams<f64>, p: &[f64]) -> PowerAllocation<f64> {
        PowerAllocation::new(p.to_vec(), params.r()).unwrap()
    }

    /// Direct transcription of the expanded weighted field upper bound.
    fn fr_upper_expanded(params: &NetworkParams<f64>, p: &[f64]) -> f64 {
        let (a, b, g) = (params.alpha(), params.beta(), params.gamma());
        let m = a.len();
        let c: Vec<f64> = (0..m).map(|i| a[i] * (p[i] / (1.0 + b[i] * b[i])).sqrt()).collect();
        let big_a: f64 = (0..m).map(|i| b[i] * c[i]).sum();
        let noise: f64 = c.iter().map(|x| x * x).sum();
        let num = (0..m).map(|i| g[i] * c[i] * c[i]).sum::<f64>()
            + big_a * big_a * (0..m).map(|i| g[i] * b[i] * b[i]).sum::<f64>()
            + 2.0 * big_a * (0..m).map(|i| g[i] * b[i] * c[i]).sum::<f64>();
        let prior: f64 = (0..m).map(|i| g[i] * (1.0 + b[i] * b[i])).sum();
        prior - num / (1.0 + big_a * big_a + noise)
    }

    #[test]
    fn sr_upper_examples() {
        let p1 = unit(1);
        assert_abs_diff_eq!(sr_upper(&p1, &powers(&p1, &[1.0])).unwrap().distortion, 0.75, epsilon = 1e-15);
        let p2 = unit(2);
        assert_abs_diff_eq!(sr_upper(&p2, &powers(&p2, &[1.0, 1.0])).unwrap().distortion, 0.5, epsilon = 1e-15);
        let p = NetworkParams::with_unit_weights(vec![0.3, 2.0], vec![1.7, 0.2]).unwrap();
        assert_eq!(sr_upper(&p, &PowerAllocation::zeros(&p)).unwrap().distortion, 1.0);
    }

    #[test]
    fn sr_lower_examples() {
        let p = NetworkParams::with_unit_weights(vec![0.3, 2.0], vec![1.7, 0.2]).unwrap();
        assert_abs_diff_eq!(sr_lower(&p, &PowerAllocation::zeros(&p)).unwrap().distortion, 1.0, epsilon = 1e-15);
        let p1 = unit(1);
        assert_abs_diff_eq!(sr_lower(&p1, &powers(&p1, &[1.0])).unwrap().distortion, 0.75, epsilon = 1e-15);
        let p2 = unit(2);
        let big = sr_lower(&p2, &powers(&p2, &[1e8, 1e8])).unwrap().distortion;
        assert_abs_diff_eq!(big, 1.0 / 3.0, epsilon = 1e-6);
        assert_abs_diff_eq!(sr_lower(&p2, &powers(&p2, &[1.0, 1.0])).unwrap().distortion, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn sr_lower_routes_agree() {
        let p = NetworkParams::with_unit_weights(vec![0.3, 2.0, 0.9], vec![1.7, 0.2, 0.4]).unwrap();
        let alloc = powers(&p, &[0.5, 3.0, 7.0]);
        let direct = sr_lower(&p, &alloc).unwrap().distortion;
        let composed = sr_lower_via_rate(&p, &alloc).unwrap();
        assert_abs_diff_eq!(direct, composed, epsilon = 1e-14);
    }

    #[test]
    fn fr_upper_examples() {
        let p1 = unit(1);
        let v = fr_upper(&p1, &powers(&p1, &[1.0])).unwrap();
        assert_abs_diff_eq!(v.distortion, 1.0, epsilon = 1e-15);
        let p = NetworkParams::with_unit_weights(vec![0.3, 2.0], vec![1.7, 0.2]).unwrap();
        let prior = 2.0 + 1.7 * 1.7 + 0.2 * 0.2;
        assert_abs_diff_eq!(fr_upper(&p, &PowerAllocation::zeros(&p)).unwrap().distortion, prior, epsilon = 1e-14);
        let p = unit(2).with_gamma(vec![1.0, 4.0]).unwrap();
        assert_abs_diff_eq!(fr_upper(&p, &PowerAllocation::zeros(&p)).unwrap().distortion, 10.0, epsilon = 1e-15);
    }

    #[test]
    fn fr_upper_matches_expanded_forms() {
        let p = NetworkParams::new(vec![0.3, 2.0, 0.9], vec![1.7, 0.2, 0.4], vec![1.0, 3.0, 0.5], vec![1.0; 3]).unwrap();
        let pw = [0.5, 3.0, 7.0];
        let v = fr_upper(&p, &powers(&p, &pw)).unwrap();
        assert_abs_diff_eq!(v.distortion, fr_upper_expanded(&p, &pw), epsilon = 1e-12);
        let comps = v.components.unwrap();
        let weighted: f64 = comps.iter().zip(p.gamma()).map(|(j, g)| j * g).sum();
        assert_abs_diff_eq!(weighted, v.distortion, epsilon = 1e-12);

        let unit_g = p.clone().with_gamma(vec![1.0; 3]).unwrap();
        let v = fr_upper(&unit_g, &powers(&unit_g, &pw)).unwrap().distortion;
        assert_abs_diff_eq!(v, fr_upper_unit_weights(&unit_g, &powers(&unit_g, &pw)).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn fr_lower_examples() {
        let p1 = unit(1);
        for mode in [FrLowerMode::Exact, FrLowerMode::HighRate] {
            let v = fr_lower(&p1, &powers(&p1, &[1.0]), mode).unwrap();
            assert_abs_diff_eq!(v.distortion, 1.0, epsilon = 1e-14);
        }
        let v = fr_lower(&p1, &PowerAllocation::zeros(&p1), FrLowerMode::Exact).unwrap();
        assert_abs_diff_eq!(v.distortion, 2.0, epsilon = 1e-15);
        let half = powers(&p1, &[0.5]);
        for mode in [FrLowerMode::Exact, FrLowerMode::HighRate] {
            let v = fr_lower(&p1, &half, mode).unwrap();
            assert_abs_diff_eq!(v.distortion, 4.0 / 3.0, epsilon = 1e-14);
            assert!(v.valid);
        }
    }

    #[test]
    fn fr_lower_highrate_flags_inactive_regime() {
        let p2 = unit(2);
        let low = powers(&p2, &[0.01, 0.01]);
        let hr = fr_lower(&p2, &low, FrLowerMode::HighRate).unwrap();
        let ex = fr_lower(&p2, &low, FrLowerMode::Exact).unwrap();
        assert!(!hr.valid);
        assert!(ex.valid);
        assert!(hr.distortion < ex.distortion);
    }

    #[test]
    fn mutual_information() {
        assert_eq!(mutual_info_bits(1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(mutual_info_bits(0.25).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(mutual_info_bits(0.75f64).unwrap(), 0.2075187496394219, epsilon = 1e-15);
        assert!(mutual_info_bits(0.0).is_err());
        assert!(mutual_info_bits(1.5).is_err());
    }

    #[test]
    fn evaluate_delegates() {
        use crate::model::{Bound, Objective, PowerMode};
        let p1 = unit(1);
        let alloc = powers(&p1, &[1.0]);
        let spec = MetricSpec::new(Objective::Sr, Bound::Upper, PowerMode::Fixed);
        assert_eq!(
            evaluate(&spec, &p1, PowerInput::Fixed(&alloc)).unwrap(),
            sr_upper(&p1, &alloc).unwrap()
        );
        let p = NetworkParams::with_unit_weights(vec![0.3, 2.0], vec![1.7, 0.2]).unwrap();
        let spec = MetricSpec::new(Objective::Fr, Bound::Upper, PowerMode::Fixed);
        let v = evaluate(&spec, &p, PowerInput::Fixed(&PowerAllocation::zeros(&p))).unwrap();
        assert_abs_diff_eq!(v.distortion, 2.0 + 1.7 * 1.7 + 0.04, epsilon = 1e-14);
        let spec = MetricSpec::new(Objective::Sr, Bound::Lower, PowerMode::Optimized);
        let v = evaluate(&spec, &p1, PowerInput::Budget(1.0)).unwrap();
        assert_abs_diff_eq!(v.distortion, 0.75, epsilon = 1e-12);
        assert!(evaluate(&spec, &p1, PowerInput::Fixed(&alloc)).is_err());
    }
}
