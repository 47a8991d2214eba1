//! Gaussian rate-distortion functions behind the lower bounds.
//!
//! * Remote (CEO-style) compression of a hidden unit-variance source seen
//!   through `U = beta S + W`: the MSE splits into the irreducible LMMSE
//!   error plus the rate-distortion term of the sufficient statistic.
//! * Weighted vector coding of `U` itself: diagonalise
//!   `R_U = I + beta beta^T`, transform the weights, reverse water-fill.
//!
//! Rates are in bits at every public boundary.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{householder_to_last, SquareMatrix};
use crate::scalar::{product, sum, Scalar};

/// Variance of the sufficient statistic `T = E[S | U]` and the estimation
/// floor `E[(S - T)^2]`. The two always add up to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RemoteRdParams<T> {
    pub sigma_t_sq: T,
    pub d_est: T,
}

pub fn sufficient_stat_params<T: Scalar>(beta: &[T]) -> RemoteRdParams<T> {
    let s = sum(beta.iter().map(|&b| b * b));
    let denom = T::one() + s;
    RemoteRdParams {
        sigma_t_sq: s / denom,
        d_est: T::one() / denom,
    }
}

/// `D(R) = D_est + sigma_T^2 2^{-2R}`, evaluated as
/// `1 - sigma_T^2 (1 - 2^{-2R})` so that `D(0) = 1` exactly. Negative rates
/// are treated as zero.
pub fn remote_rd_distortion<T: Scalar>(beta: &[T], rate_bits: T) -> T {
    let p = sufficient_stat_params(beta);
    let rate = rate_bits.max(T::zero());
    let captured = -(-T::lit(2.0) * rate * T::LN_2()).exp_m1();
    T::one() - p.sigma_t_sq * captured
}

/// Eigen-structure of `R_U = I + beta beta^T` and the transformed weights.
///
/// `q` is the Householder reflection sending the last basis vector to
/// `beta / |beta|`; it is symmetric, so `R_U = q diag(lambdas) q`.
/// `lambdas = (1, .., 1, 1 + sum beta^2)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenStructure<T> {
    lambdas: Vec<T>,
    q: SquareMatrix<T>,
    gamma_prime: Vec<T>,
}

impl<T: Scalar> EigenStructure<T> {
    pub fn lambdas(&self) -> &[T] {
        &self.lambdas
    }

    pub fn q(&self) -> &SquareMatrix<T> {
        &self.q
    }

    pub fn gamma_prime(&self) -> &[T] {
        &self.gamma_prime
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// `q^T diag(lambdas) q`.
    pub fn reconstruct(&self) -> SquareMatrix<T> {
        let n = self.len();
        let scaled = SquareMatrix::from_fn(n, |i, j| self.lambdas[i] * self.q[(i, j)]);
        self.q.transpose().matmul(&scaled)
    }

    /// Per-component thresholds `Lambda_m gamma'_m`.
    pub fn weighted_variances(&self) -> Vec<T> {
        self.lambdas
            .iter()
            .zip(&self.gamma_prime)
            .map(|(&l, &g)| l * g)
            .collect()
    }

    /// Distortion with no rate, `sum gamma'_m Lambda_m`.
    pub fn prior_distortion(&self) -> T {
        sum(self.weighted_variances())
    }
}

pub fn ru_eigen<T: Scalar>(beta: &[T], gamma: &[T]) -> Result<EigenStructure<T>> {
    let m = beta.len();
    if m == 0 || gamma.len() != m {
        return Err(Error::InvalidParams(format!(
            "beta has length {m}, gamma has length {}",
            gamma.len()
        )));
    }
    let s = sum(beta.iter().map(|&b| b * b));
    let norm = s.sqrt();
    let q = if norm > T::zero() {
        let u: Vec<T> = beta.iter().map(|&b| b / norm).collect();
        householder_to_last(&u)
    } else {
        SquareMatrix::identity(m)
    };
    let mut lambdas = vec![T::one(); m];
    lambdas[m - 1] = T::one() + s;
    let gamma_prime = (0..m)
        .map(|k| sum((0..m).map(|j| q[(j, k)] * q[(j, k)] * gamma[j])))
        .collect();
    Ok(EigenStructure {
        lambdas,
        q,
        gamma_prime,
    })
}

/// Solution of the reverse water-filling problem at a given rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaterFill<T> {
    /// Water level; component `m` gets `min(theta / gamma'_m, Lambda_m)`.
    pub theta: T,
    pub distortions: Vec<T>,
    /// `sum gamma'_m D_m`.
    pub total: T,
    /// Whether every component is coded (`theta <= min Lambda gamma'`).
    pub all_active: bool,
}

/// Rate in bits spent at water level `theta`.
pub fn waterfill_rate_bits<T: Scalar>(weighted_variances: &[T], theta: T) -> T {
    let half = T::lit(0.5);
    sum(weighted_variances
        .iter()
        .map(|&v| if v > theta { half * (v / theta).log2() } else { T::zero() }))
}

/// Reverse water-filling on the transformed components at `rate_bits`.
///
/// The level is bracketed in log-space and bisected until the rate matches
/// to `1e-12`; the active set found that way then gives the level in closed
/// form.
pub fn water_fill<T: Scalar>(eig: &EigenStructure<T>, rate_bits: T) -> WaterFill<T> {
    let wv = eig.weighted_variances();
    let rate = rate_bits.max(T::zero());
    let top = wv.iter().copied().fold(T::zero(), T::max);
    let bottom = wv.iter().copied().fold(T::infinity(), T::min);
    let theta = if rate == T::zero() {
        top
    } else {
        let tol = T::tol(1e-12) * rate.max(T::one());
        let two = T::lit(2.0);
        // rate(top) = 0 and rate(top 2^{-2R}) >= R.
        let mut hi = top.ln();
        let mut lo = hi - two * rate * T::LN_2();
        for _ in 0..200 {
            let mid = (lo + hi) / two;
            let r_mid = waterfill_rate_bits(&wv, mid.exp());
            if (r_mid - rate).abs() <= tol || hi - lo <= T::epsilon() * hi.abs().max(T::one()) {
                lo = mid;
                hi = mid;
                break;
            }
            if r_mid > rate {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let approx = ((lo + hi) / two).exp();
        refine_level(&wv, rate, approx).unwrap_or(approx)
    };
    let distortions: Vec<T> = eig
        .gamma_prime
        .iter()
        .zip(&eig.lambdas)
        .map(|(&g, &l)| (theta / g).min(l))
        .collect();
    let total = sum(distortions.iter().zip(&eig.gamma_prime).map(|(&d, &g)| d * g));
    WaterFill {
        theta,
        distortions,
        total,
        all_active: theta <= bottom,
    }
}

/// Closed-form level for the active set implied by `approx`, if consistent.
fn refine_level<T: Scalar>(wv: &[T], rate: T, approx: T) -> Option<T> {
    let active: Vec<T> = wv.iter().copied().filter(|&v| v > approx).collect();
    if active.is_empty() {
        return None;
    }
    let k = T::from_usize(active.len())?;
    let log_sum = sum(active.iter().map(|v| v.log2()));
    let theta = T::lit(2.0).powf((log_sum - T::lit(2.0) * rate) / k);
    let consistent = wv.iter().all(|&v| {
        let in_set = v > approx;
        if in_set {
            v >= theta
        } else {
            v <= theta * (T::one() + T::tol(1e-9))
        }
    });
    consistent.then_some(theta)
}

/// Minimum weighted distortion at `rate_bits` (reverse water-filling).
pub fn vector_rd_exact<T: Scalar>(eig: &EigenStructure<T>, rate_bits: T) -> T {
    water_fill(eig, rate_bits).total
}

/// High-rate closed form `M (prod Lambda gamma')^{1/M} 2^{-2R/M}`.
///
/// Never exceeds [`vector_rd_exact`]; the two agree once every component
/// is active.
pub fn vector_rd_highrate<T: Scalar>(eig: &EigenStructure<T>, rate_bits: T) -> T {
    let m = T::from_usize(eig.len()).expect("dimension fits");
    let rate = rate_bits.max(T::zero());
    let geo = sum(eig.weighted_variances().iter().map(|v| v.ln())) / m;
    m * geo.exp() * T::lit(2.0).powf(-T::lit(2.0) * rate / m)
}

/// Water level implied by the high-rate form, `theta = D / M`.
pub fn highrate_level<T: Scalar>(eig: &EigenStructure<T>, rate_bits: T) -> T {
    vector_rd_highrate(eig, rate_bits) / T::from_usize(eig.len()).expect("dimension fits")
}

/// `prod gamma'_m` (at least `prod gamma_m` by majorization).
pub fn transformed_weight_product<T: Scalar>(eig: &EigenStructure<T>) -> T {
    product(eig.gamma_prime.iter().copied())
}
