//! Optimal power allocation under `sum_m r_m P_m <= P_T`.
//!
//! Every bound depends on the powers only through the effective amplitudes
//! `c_m = alpha_m sqrt(P_m / (1 + beta_m^2))`, and the budget reads
//! `sum_m w_m c_m^2 = P_T` with `w_m = r_m (1 + beta_m^2) / alpha_m^2`.
//! In all four families the optimal amplitudes have the form
//! `c_m ∝ beta_m / (w_m + shift)`, so each sensor can recompute its own
//! power from `(alpha_m, beta_m, r_m)` and a few broadcast constants:
//!
//! | family      | shift            |
//! |-------------|------------------|
//! | source, AF  | `P_T`            |
//! | source, low | `-lambda`        |
//! | field, AF   | `lambda_1`       |
//! | field, low  | `-lambda_2`      |
//!
//! The multipliers are roots of secular equations with poles at
//! `-w_m`. Roots are found by bisection on the distance to the nearest pole,
//! which keeps `w_m + shift` accurate even when a root hugs that pole.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{back_substitute_transposed, cholesky, forward_substitute, symmetric_eigen, SquareMatrix};
use crate::metrics::fr_upper;
use crate::model::{FrLowerMode, NetworkParams, PowerAllocation};
use crate::rate_distortion::{ru_eigen, vector_rd_exact};
use crate::scalar::{sum, Scalar};

/// Powers below this are switched off and the budget re-spread.
pub const ZERO_POWER_FLOOR: f64 = 1e-15;

const MAX_BISECTION_STEPS: usize = 200;

/// A multiplier together with its distance to the nearest pole of the
/// secular equation it solves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Root<T> {
    pub value: T,
    pub gap: T,
    pub residual: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Multipliers<T> {
    /// The AF source optimum is a Rayleigh quotient with no multiplier.
    None,
    Sr { lambda: T },
    Fr { lambda1: T, lambda2: T },
}

/// Constants the collector broadcasts so sensors can set their own power.
///
/// Sensor `m` computes `w = r (1 + beta^2) / alpha^2`,
/// `d = (w - pivot) + offset`, `f = beta^2 (1 + beta^2) / (alpha^2 d^2)` and
/// transmits at `gain * f`, or stays silent when `f < cutoff`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Broadcast<T> {
    pub multipliers: Multipliers<T>,
    pub pivot: T,
    pub offset: T,
    pub gain: T,
    pub cutoff: T,
}

impl<T: Scalar> Broadcast<T> {
    fn shape(&self, alpha: T, beta: T, r: T) -> T {
        let b2 = beta * beta;
        let w = r * (T::one() + b2) / (alpha * alpha);
        let d = (w - self.pivot) + self.offset;
        b2 * (T::one() + b2) / (alpha * alpha * d * d)
    }

    /// Power of one sensor from its local parameters.
    pub fn local_power(&self, alpha: T, beta: T, r: T) -> T {
        let f = self.shape(alpha, beta, r);
        if f < self.cutoff {
            T::zero()
        } else {
            self.gain * f
        }
    }

    pub fn recompute(&self, params: &NetworkParams<T>) -> Vec<T> {
        (0..params.len())
            .map(|m| self.local_power(params.alpha()[m], params.beta()[m], params.r()[m]))
            .collect()
    }
}

/// Optimised bound value with its certified allocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptResult<T> {
    pub value: T,
    pub allocation: PowerAllocation<T>,
    pub multipliers: Multipliers<T>,
    /// Largest secular-equation residual behind the multipliers.
    pub residual: T,
    /// False when a closed form is used outside its regime.
    pub valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub broadcast: Option<Broadcast<T>>,
}

fn check_budget<T: Scalar>(total: T) -> Result<()> {
    if total.is_finite() && total > T::zero() {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "total power",
            range: "(0, inf)",
            value: total.to_f64().unwrap_or(f64::NAN),
        })
    }
}

struct Costs<T> {
    /// `w_m - pivot`, exactly zero at the cheapest sensor.
    offsets: Vec<T>,
    pivot: T,
    beta_sq: Vec<T>,
}

fn costs<T: Scalar>(params: &NetworkParams<T>) -> Costs<T> {
    let w: Vec<T> = (0..params.len()).map(|m| params.power_cost(m)).collect();
    let pivot = w.iter().copied().fold(T::infinity(), T::min);
    Costs {
        offsets: w.iter().map(|&x| x - pivot).collect(),
        pivot,
        beta_sq: params.beta().iter().map(|&b| b * b).collect(),
    }
}

impl<T: Scalar> Costs<T> {
    /// `sum beta_m^2 / (offset_m + gap)`.
    fn secular_sum(&self, gap: T) -> T {
        sum(self.offsets.iter().zip(&self.beta_sq).map(|(&o, &b2)| b2 / (o + gap)))
    }
}

/// Bisection for a function that is positive near `lo` and negative at `hi`.
fn bisect_decreasing<T: Scalar>(mut lo: T, mut hi: T, f: impl Fn(T) -> T) -> T {
    let two = T::lit(2.0);
    let mut best = (hi, f(hi).abs());
    for _ in 0..MAX_BISECTION_STEPS {
        let mid = lo + (hi - lo) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v.abs() < best.1 {
            best = (mid, v.abs());
        }
        if v == T::zero() {
            break;
        }
        if v > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    best.0
}

/// Residual of the source multiplier equation at `gap` (`lambda = pivot - gap`):
/// `lambda * sum beta^2 / (w - lambda) - 1`.
fn sr_residual<T: Scalar>(c: &Costs<T>, gap: T) -> T {
    (c.pivot - gap) * c.secular_sum(gap) - T::one()
}

fn solve_sr_root<T: Scalar>(c: &Costs<T>, equation: &'static str) -> Result<Root<T>> {
    if !(c.pivot.is_finite() && c.pivot > T::zero()) {
        return Err(Error::BracketFailure { equation });
    }
    let gap = bisect_decreasing(T::zero(), c.pivot, |g| sr_residual(c, g));
    if !(gap > T::zero() && gap < c.pivot) {
        return Err(Error::BracketFailure { equation });
    }
    Ok(Root {
        value: c.pivot - gap,
        gap,
        residual: sr_residual(c, gap).abs(),
    })
}

/// Multiplier `lambda` of the source lower-bound optimum: the unique root of
/// `sum alpha^2 beta^2 / (r (1 + beta^2) - lambda alpha^2) = 1 / lambda`
/// in `(0, min_m r_m (1 + beta_m^2) / alpha_m^2)`.
///
/// Independent of the budget.
pub fn solve_lambda_sr<T: Scalar>(params: &NetworkParams<T>) -> Result<Root<T>> {
    solve_sr_root(&costs(params), "source multiplier")
}

/// Residual of the source multiplier equation at an arbitrary `lambda`,
/// evaluated directly from the network parameters.
pub fn lambda_sr_residual<T: Scalar>(params: &NetworkParams<T>, lambda: T) -> T {
    let s = sum((0..params.len()).map(|m| {
        let (a, b, r) = (params.alpha()[m], params.beta()[m], params.r()[m]);
        a * a * b * b / (r + r * b * b - lambda * a * a)
    }));
    lambda * s - T::one()
}

/// `lambda sum beta^2 / (w - lambda) - 1` at `lambda`: the source
/// multiplier equation divided through by `alpha_m^2`.
pub fn sr_multiplier_residual<T: Scalar>(params: &NetworkParams<T>, lambda: T) -> T {
    let s = sum((0..params.len()).map(|m| {
        let b = params.beta()[m];
        b * b / (params.power_cost(m) - lambda)
    }));
    lambda * s - T::one()
}

fn allocate<T: Scalar>(
    params: &NetworkParams<T>,
    c: &Costs<T>,
    offset: T,
    total: T,
    multipliers: Multipliers<T>,
) -> Result<(PowerAllocation<T>, Broadcast<T>)> {
    let mut bc = Broadcast {
        multipliers,
        pivot: c.pivot,
        offset,
        gain: T::one(),
        cutoff: T::zero(),
    };
    let shapes: Vec<T> = (0..params.len())
        .map(|m| bc.shape(params.alpha()[m], params.beta()[m], params.r()[m]))
        .collect();
    let weighted = |cutoff: T| {
        sum(shapes
            .iter()
            .zip(params.r())
            .filter(|(&f, _)| f >= cutoff)
            .map(|(&f, &r)| f * r))
    };
    let gain0 = total / weighted(T::zero());
    bc.cutoff = T::lit(ZERO_POWER_FLOOR) / gain0;
    bc.gain = total / weighted(bc.cutoff);
    let alloc = PowerAllocation::new(bc.recompute(params), params.r())?;
    Ok((alloc, bc))
}

/// Optimised source lower bound
/// `(1 + S / (1 + P_T / lambda)) / (1 + S)` with its allocation.
pub fn sr_lower_opt<T: Scalar>(params: &NetworkParams<T>, total: T) -> Result<OptResult<T>> {
    check_budget(total)?;
    let c = costs(params);
    let root = solve_sr_root(&c, "source multiplier")?;
    let s = params.sensing_energy();
    let value = (T::one() + s / (T::one() + total / root.value)) / (T::one() + s);
    let multipliers = Multipliers::Sr { lambda: root.value };
    let (allocation, bc) = allocate(params, &c, root.gap, total, multipliers)?;
    Ok(OptResult {
        value,
        allocation,
        multipliers,
        residual: root.residual,
        valid: true,
        broadcast: Some(bc),
    })
}

/// `lambda_2` of the source lower-bound allocation, i.e. twice the square
/// root of the broadcast gain.
pub fn sr_lower_scale<T: Scalar>(result: &OptResult<T>) -> Option<T> {
    result.broadcast.map(|b| T::lit(2.0) * b.gain.sqrt())
}

/// Optimised AF source MSE
/// `(1 + P_T sum alpha^2 beta^2 / (r + r beta^2 + P_T alpha^2))^{-1}`.
///
/// The maximiser of `A^2 / (1 + B)` on the budget ellipsoid is
/// `c ∝ beta_m / (w_m + P_T)`; the returned allocation is that point.
pub fn sr_upper_opt<T: Scalar>(params: &NetworkParams<T>, total: T) -> Result<OptResult<T>> {
    check_budget(total)?;
    let c = costs(params);
    let q = sum((0..params.len()).map(|m| {
        let (a, b, r) = (params.alpha()[m], params.beta()[m], params.r()[m]);
        a * a * b * b / (r + r * b * b + total * a * a)
    }));
    let value = T::one() / (T::one() + total * q);
    let (allocation, bc) = allocate(params, &c, c.pivot + total, total, Multipliers::None)?;
    Ok(OptResult {
        value,
        allocation,
        multipliers: Multipliers::None,
        residual: T::zero(),
        valid: true,
        broadcast: Some(bc),
    })
}

/// Multipliers of the unit-weight field optimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrRoots<T> {
    /// Root of the AF field equation; `gap` is `lambda_1 + min w`.
    pub lambda1: Root<T>,
    /// Same equation as the source multiplier.
    pub lambda2: Root<T>,
    /// Whether `lambda_1` fell in `(0, P_T)`. At low budgets it is
    /// negative; the root is then taken on the extended bracket.
    pub in_primary_bracket: bool,
}

/// `((1 + S)(P_T - lambda_1) - lambda_1) sum beta^2 / (w + lambda_1) - 1`,
/// which is `lambda_1` times the difference of the two sides of
/// `(-1 - (1 - P_T/lambda_1)(1 + S)) sum alpha^2 beta^2 / (r + r beta^2 + lambda_1 alpha^2) = 1/lambda_1`.
fn fr_residual<T: Scalar>(c: &Costs<T>, s: T, total: T, gap: T) -> T {
    let l1 = gap - c.pivot;
    ((T::one() + s) * (total - l1) - l1) * c.secular_sum(gap) - T::one()
}

/// Residual of the field AF multiplier equation at an arbitrary `lambda_1`,
/// evaluated directly from the network parameters.
pub fn lambda_fr_residual<T: Scalar>(params: &NetworkParams<T>, total: T, lambda1: T) -> T {
    let s = params.sensing_energy();
    let q = sum((0..params.len()).map(|m| {
        let (a, b, r) = (params.alpha()[m], params.beta()[m], params.r()[m]);
        a * a * b * b / (r + r * b * b + lambda1 * a * a)
    }));
    let lhs = (-T::one() - (T::one() - total / lambda1) * (T::one() + s)) * q;
    lambda1 * (lhs - T::one() / lambda1)
}

/// `((1 + S)(P_T - lambda_1) - lambda_1) sum beta^2 / (w + lambda_1) - 1`
/// at `lambda_1`: the field AF multiplier equation multiplied by `lambda_1`
/// and divided through by `alpha_m^2`.
pub fn fr_multiplier_residual<T: Scalar>(params: &NetworkParams<T>, total: T, lambda1: T) -> T {
    let s = params.sensing_energy();
    let q = sum((0..params.len()).map(|m| {
        let b = params.beta()[m];
        b * b / (params.power_cost(m) + lambda1)
    }));
    ((T::one() + s) * (total - lambda1) - lambda1) * q - T::one()
}

/// Solves for `(lambda_1, lambda_2)`.
///
/// On `(-min w, (1 + S) P_T / (2 + S))` the residual falls strictly from
/// `+inf` to `-1`, so the root is unique there. It lies in `(0, P_T)` once
/// the budget is large enough for the AF optimum to beat `M + S - 1`.
pub fn solve_lambda_fr<T: Scalar>(params: &NetworkParams<T>, total: T) -> Result<FrRoots<T>> {
    check_budget(total)?;
    let c = costs(params);
    let lambda2 = solve_sr_root(&c, "field lower multiplier")?;
    let s = params.sensing_energy();
    let top = (T::one() + s) * total / (T::lit(2.0) + s);
    let hi = c.pivot + top;
    if !(hi.is_finite() && hi > T::zero()) {
        return Err(Error::BracketFailure {
            equation: "field AF multiplier",
        });
    }
    let gap = bisect_decreasing(T::zero(), hi, |g| fr_residual(&c, s, total, g));
    if !(gap > T::zero() && gap < hi) {
        return Err(Error::FixedPointDivergence {
            equation: "field AF multiplier",
        });
    }
    let value = gap - c.pivot;
    let lambda1 = Root {
        value,
        gap,
        residual: fr_residual(&c, s, total, gap).abs(),
    };
    Ok(FrRoots {
        lambda1,
        lambda2,
        in_primary_bracket: value > T::zero() && value < total,
    })
}

/// Unit-weight field bounds at the optimal allocation:
/// upper `M + S + P_T / (lambda_1 - P_T)` and lower
/// `M ((1 + S) lambda_2 / P_T)^{1/M}`.
///
/// The lower value is the high-power closed form; it is flagged invalid when
/// its implied water level exceeds the smallest eigenvalue. Its allocation is
/// the source lower-bound allocation, which maximises the MAC rate.
pub fn fr_bounds_opt<T: Scalar>(params: &NetworkParams<T>, total: T) -> Result<(OptResult<T>, OptResult<T>)> {
    if !params.has_unit_gamma() {
        return Err(Error::NonUnitGamma);
    }
    let roots = solve_lambda_fr(params, total)?;
    let c = costs(params);
    let s = params.sensing_energy();
    let m = T::from_usize(params.len()).expect("sensor count fits");
    let multipliers = Multipliers::Fr {
        lambda1: roots.lambda1.value,
        lambda2: roots.lambda2.value,
    };
    let residual = roots.lambda1.residual.max(roots.lambda2.residual);

    let upper_value = m + s + total / (roots.lambda1.value - total);
    let (up_alloc, up_bc) = allocate(params, &c, roots.lambda1.gap, total, multipliers)?;
    let upper = OptResult {
        value: upper_value,
        allocation: up_alloc,
        multipliers,
        residual,
        valid: true,
        broadcast: Some(up_bc),
    };

    let lower_value = m * ((T::one() + s) * roots.lambda2.value / total).powf(T::one() / m);
    let (lo_alloc, lo_bc) = allocate(params, &c, roots.lambda2.gap, total, multipliers)?;
    let lower = OptResult {
        value: lower_value,
        allocation: lo_alloc,
        multipliers,
        residual,
        valid: lower_value / m <= T::one(),
        broadcast: Some(lo_bc),
    };
    Ok((upper, lower))
}

/// Optimised AF field MSE for any weights.
///
/// Unit weights use the closed form of [`fr_bounds_opt`]; otherwise the
/// generalised eigenproblem of [`fr_upper_opt_weighted`] is solved.
pub fn fr_upper_opt<T: Scalar>(params: &NetworkParams<T>, total: T) -> Result<OptResult<T>> {
    if params.has_unit_gamma() {
        Ok(fr_bounds_opt(params, total)?.0)
    } else {
        fr_upper_opt_weighted(params, total)
    }
}

/// Optimised AF field MSE by direct maximisation of the explained energy.
///
/// On the budget surface the explained weighted energy is the Rayleigh
/// quotient `c^T N c / c^T D c` with
/// `N = diag(gamma) + beta g^T + g beta^T + (beta^T diag(gamma) beta) beta beta^T`,
/// `g = diag(gamma) beta`, and `D = diag(1 + w / P_T) + beta beta^T`.
/// The optimum is the top generalised eigenpair.
pub fn fr_upper_opt_weighted<T: Scalar>(params: &NetworkParams<T>, total: T) -> Result<OptResult<T>> {
    check_budget(total)?;
    let n = params.len();
    let (beta, gamma) = (params.beta(), params.gamma());
    let g: Vec<T> = beta.iter().zip(gamma).map(|(&b, &gm)| b * gm).collect();
    let sgb = sum(beta.iter().zip(&g).map(|(&b, &x)| b * x));
    let num = SquareMatrix::from_fn(n, |i, j| {
        let diag = if i == j { gamma[i] } else { T::zero() };
        diag + beta[i] * g[j] + g[i] * beta[j] + sgb * beta[i] * beta[j]
    });
    let den = SquareMatrix::from_fn(n, |i, j| {
        let diag = if i == j { T::one() + params.power_cost(i) / total } else { T::zero() };
        diag + beta[i] * beta[j]
    });
    let l = cholesky(&den).ok_or_else(|| Error::InvalidParams("budget metric not positive definite".into()))?;
    let half = forward_substitute(&l, &num);
    let sym = forward_substitute(&l, &half.transpose());
    let (evals, evecs) = symmetric_eigen(&sym);
    let top = (0..n)
        .max_by(|&a, &b| evals[a].partial_cmp(&evals[b]).expect("finite eigenvalues"))
        .expect("non-empty network");
    let mut amp = back_substitute_transposed(&l, &evecs.column(top));
    if sum(amp.iter().zip(beta).map(|(&x, &b)| x * b)) < T::zero() {
        amp.iter_mut().for_each(|x| *x = -*x);
    }
    // Amplitudes are non-negative at the optimum; clip rounding noise.
    amp.iter_mut().for_each(|x| *x = x.max(T::zero()));
    let spent = sum((0..n).map(|m| params.power_cost(m) * amp[m] * amp[m]));
    let scale = (total / spent).sqrt();
    let p: Vec<T> = (0..n)
        .map(|m| {
            let (a, b) = (params.alpha()[m], beta[m]);
            let c = amp[m] * scale;
            c * c * (T::one() + b * b) / (a * a)
        })
        .collect();
    let allocation = PowerAllocation::new(p, params.r())?;
    let value = fr_upper(params, &allocation)?.distortion;
    Ok(OptResult {
        value,
        allocation,
        multipliers: Multipliers::None,
        residual: T::zero(),
        valid: true,
        broadcast: None,
    })
}

/// Optimised field lower bound for any weights.
///
/// The lower bound falls with the MAC rate alone, so the source lower-bound
/// allocation is optimal. `HighRate` reports
/// `M ((1 + S) prod gamma' lambda_2 / P_T)^{1/M}`, which reduces to the
/// unit-weight closed form; `Exact` water-fills at `1/2 log2(1 + P_T / lambda_2)`.
pub fn fr_lower_opt<T: Scalar>(params: &NetworkParams<T>, total: T, mode: FrLowerMode) -> Result<OptResult<T>> {
    check_budget(total)?;
    let c = costs(params);
    let root = solve_sr_root(&c, "field lower multiplier")?;
    let eig = ru_eigen(params.beta(), params.gamma())?;
    let m = T::from_usize(params.len()).expect("sensor count fits");
    let wv = eig.weighted_variances();
    let bottom = wv.iter().copied().fold(T::infinity(), T::min);
    let (value, valid) = match mode {
        FrLowerMode::HighRate => {
            let log_sum = sum(wv.iter().map(|v| v.ln()));
            let v = m * ((log_sum + (root.value / total).ln()) / m).exp();
            (v, v / m <= bottom)
        }
        FrLowerMode::Exact => {
            let rate = T::lit(0.5) * (T::one() + total / root.value).log2();
            (vector_rd_exact(&eig, rate), true)
        }
    };
    let multipliers = Multipliers::Sr { lambda: root.value };
    let (allocation, bc) = allocate(params, &c, root.gap, total, multipliers)?;
    Ok(OptResult {
        value,
        allocation,
        multipliers,
        residual: root.residual,
        valid,
        broadcast: Some(bc),
    })
}

/// Broadcast constants from which every sensor recomputes its own power.
///
/// `None` for the weighted field optimum, whose allocation is not of the
/// local form.
pub fn allocation_broadcast_view<T: Scalar>(result: &OptResult<T>) -> Option<Broadcast<T>> {
    result.broadcast
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{fr_lower, sr_lower, sr_upper};
    use approx::assert_abs_diff_eq;

    fn unit(m: usize) -> NetworkParams<f64> {
        NetworkParams::with_unit_weights(vec![1.0; m], vec![1.0; m]).unwrap()
    }

    #[test]
    fn lambda_sr_by_hand() {
        let r1 = solve_lambda_sr(&unit(1)).unwrap();
        assert_abs_diff_eq!(r1.value, 1.0, epsilon = 1e-14);
        let r2 = solve_lambda_sr(&unit(2)).unwrap();
        assert_abs_diff_eq!(r2.value, 2.0 / 3.0, epsilon = 1e-14);
        assert!(r2.residual < 1e-14);
        assert!(lambda_sr_residual(&unit(2), r2.value).abs() < 1e-14);
    }

    #[test]
    fn lambda_sr_scales_with_r() {
        let p = NetworkParams::with_unit_weights(vec![0.4, 0.9, 0.2], vec![0.7, 0.1, 0.5]).unwrap();
        let base = solve_lambda_sr(&p).unwrap().value;
        for k in [0.5, 3.0, 10.0] {
            let scaled = p.clone().with_r(vec![k; 3]).unwrap();
            let l = solve_lambda_sr(&scaled).unwrap().value;
            assert_abs_diff_eq!(l / base, k, epsilon = 1e-12);
        }
    }

    #[test]
    fn sr_lower_opt_single_sensor() {
        let res = sr_lower_opt(&unit(1), 1.0).unwrap();
        assert_abs_diff_eq!(res.value, 0.75, epsilon = 1e-14);
        assert_abs_diff_eq!(res.allocation.p()[0], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn sr_lower_opt_symmetric() {
        let p = unit(2);
        let res = sr_lower_opt(&p, 2.0).unwrap();
        assert_abs_diff_eq!(res.value, 0.5, epsilon = 1e-14);
        for x in res.allocation.p() {
            assert_abs_diff_eq!(*x, 1.0, epsilon = 1e-14);
        }
        let again = sr_lower(&p, &res.allocation).unwrap().distortion;
        assert_abs_diff_eq!(again, res.value, epsilon = 1e-12);
    }

    #[test]
    fn sr_upper_opt_examples() {
        assert_abs_diff_eq!(sr_upper_opt(&unit(1), 1.0).unwrap().value, 0.75, epsilon = 1e-14);
        let res = sr_upper_opt(&unit(2), 2.0).unwrap();
        assert_abs_diff_eq!(res.value, 0.5, epsilon = 1e-14);
        let p = NetworkParams::with_unit_weights(vec![0.3, 2.0], vec![1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(sr_upper_opt(&p, 1e12).unwrap().value, 1.0 / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn sr_upper_allocation_reaches_closed_form() {
        let p = NetworkParams::new(vec![0.3, 2.0, 0.8], vec![1.1, 0.4, 0.9], vec![1.0; 3], vec![1.0, 2.0, 0.5]).unwrap();
        for total in [0.1, 1.0, 10.0, 300.0] {
            let res = sr_upper_opt(&p, total).unwrap();
            assert_abs_diff_eq!(res.allocation.weighted_total(), total, epsilon = 1e-9 * total);
            let again = sr_upper(&p, &res.allocation).unwrap().distortion;
            assert_abs_diff_eq!(again, res.value, epsilon = 1e-12);
        }
    }

    #[test]
    fn lambda_fr_examples() {
        let roots = solve_lambda_fr(&unit(1), 1.0).unwrap();
        assert_abs_diff_eq!(roots.lambda2.value, 1.0, epsilon = 1e-14);
        let roots = solve_lambda_fr(&unit(2), 2.0).unwrap();
        assert_abs_diff_eq!(roots.lambda2.value, 2.0 / 3.0, epsilon = 1e-14);
        assert!(roots.lambda1.residual < 1e-12);
        assert!(lambda_fr_residual(&unit(2), 2.0, roots.lambda1.value).abs() < 1e-12);
    }

    #[test]
    fn fr_bounds_single_sensor() {
        let (upper, lower) = fr_bounds_opt(&unit(1), 1.0).unwrap();
        assert_abs_diff_eq!(upper.value, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(upper.allocation.p()[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(lower.value, 2.0, epsilon = 1e-12);
        assert!(!lower.valid);
    }

    #[test]
    fn fr_bounds_high_power_ordering() {
        let (upper, lower) = fr_bounds_opt(&unit(2), 1e6).unwrap();
        assert!(lower.value < 1e-2);
        assert!(lower.valid);
        assert!(lower.value <= upper.value);
        // AF cannot remove the sensing noise orthogonal to the source.
        assert!(upper.value > 0.9);
    }

    #[test]
    fn fr_upper_allocation_reaches_closed_form() {
        let p = NetworkParams::with_unit_weights(vec![0.3, 2.0, 0.8], vec![1.1, 0.4, 0.9]).unwrap();
        for total in [0.01, 0.5, 3.0, 30.0, 1e4] {
            let (upper, _) = fr_bounds_opt(&p, total).unwrap();
            let again = fr_upper(&p, &upper.allocation).unwrap().distortion;
            assert_abs_diff_eq!(again, upper.value, epsilon = 1e-9);
            assert_abs_diff_eq!(upper.allocation.weighted_total(), total, epsilon = 1e-9 * total);
        }
    }

    #[test]
    fn weighted_route_matches_closed_form_at_unit_weights() {
        let p = NetworkParams::new(vec![0.3, 2.0, 0.8], vec![1.1, 0.4, 0.9], vec![1.0; 3], vec![1.0, 0.7, 2.0]).unwrap();
        for total in [0.05, 1.0, 20.0] {
            let closed = fr_bounds_opt(&p, total).unwrap().0;
            let general = fr_upper_opt_weighted(&p, total).unwrap();
            assert_abs_diff_eq!(closed.value, general.value, epsilon = 1e-9);
            for (a, b) in closed.allocation.p().iter().zip(general.allocation.p()) {
                assert_abs_diff_eq!(*a, *b, epsilon = 1e-6 * total);
            }
        }
    }

    #[test]
    fn non_unit_gamma_is_rejected() {
        let p = unit(2).with_gamma(vec![1.0, 4.0]).unwrap();
        assert_eq!(fr_bounds_opt(&p, 1.0).unwrap_err(), Error::NonUnitGamma);
        assert!(fr_upper_opt(&p, 1.0).is_ok());
    }

    #[test]
    fn fr_lower_opt_modes() {
        let p = NetworkParams::with_unit_weights(vec![0.3, 2.0, 0.8], vec![1.1, 0.4, 0.9]).unwrap();
        let hr = fr_lower_opt(&p, 50.0, FrLowerMode::HighRate).unwrap();
        let (_, closed) = fr_bounds_opt(&p, 50.0).unwrap();
        assert_abs_diff_eq!(hr.value, closed.value, epsilon = 1e-12);
        let ex = fr_lower_opt(&p, 50.0, FrLowerMode::Exact).unwrap();
        let again = fr_lower(&p, &ex.allocation, FrLowerMode::Exact).unwrap().distortion;
        assert_abs_diff_eq!(ex.value, again, epsilon = 1e-9);
    }

    #[test]
    fn broadcast_reproduces_allocation() {
        let p = unit(2);
        let res = sr_lower_opt(&p, 2.0).unwrap();
        let bc = allocation_broadcast_view(&res).unwrap();
        assert_eq!(bc.multipliers, Multipliers::Sr { lambda: res.multipliers_lambda() });
        assert_abs_diff_eq!(bc.recompute(&p)[0], 1.0, epsilon = 1e-14);
        let res = sr_lower_opt(&unit(1), 3.5).unwrap();
        assert_abs_diff_eq!(allocation_broadcast_view(&res).unwrap().recompute(&unit(1))[0], 3.5, epsilon = 1e-12);
    }

    #[test]
    fn broadcast_is_local_under_permutation() {
        let p = NetworkParams::new(vec![0.3, 2.0, 0.8], vec![1.1, 0.4, 0.9], vec![1.0; 3], vec![1.0, 0.7, 2.0]).unwrap();
        let perm = [2, 0, 1];
        let q = p.permuted(&perm).unwrap();
        for (a, b) in [
            (sr_lower_opt(&p, 5.0).unwrap(), sr_lower_opt(&q, 5.0).unwrap()),
            (sr_upper_opt(&p, 5.0).unwrap(), sr_upper_opt(&q, 5.0).unwrap()),
            (fr_upper_opt(&p, 5.0).unwrap(), fr_upper_opt(&q, 5.0).unwrap()),
        ] {
            for (i, &j) in perm.iter().enumerate() {
                assert_abs_diff_eq!(b.allocation.p()[i], a.allocation.p()[j], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn low_budget_field_root_leaves_primary_bracket() {
        let p = NetworkParams::with_unit_weights(vec![0.2, 0.3], vec![0.3, 0.2]).unwrap();
        let roots = solve_lambda_fr(&p, 0.01).unwrap();
        assert!(!roots.in_primary_bracket);
        assert!(roots.lambda1.value < 0.0);
        assert!(roots.lambda1.residual < 1e-10);
        let (upper, _) = fr_bounds_opt(&p, 0.01).unwrap();
        let again = fr_upper(&p, &upper.allocation).unwrap().distortion;
        assert_abs_diff_eq!(again, upper.value, epsilon = 1e-9);
    }

    impl OptResult<f64> {
        fn multipliers_lambda(&self) -> f64 {
            match self.multipliers {
                Multipliers::Sr { lambda } => lambda,
                _ => panic!("not a source multiplier"),
            }
        }
    }
}
