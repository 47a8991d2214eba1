//! Independent ground truth: Monte Carlo simulation of the AF scheme and
//! exhaustive searches over power and rate simplices.
//!
//! Random streams: a `ChaCha8Rng` seeded with `seed_from_u64(seed)` and
//! switched to stream `k` for shard `k`. Shards hold a fixed number of
//! draws and are reduced in index order, so results do not depend on the
//! thread count. Normal variates use the Marsaglia polar method; uniform
//! variates on `(0, 1]` are `1 - u` with `u` the standard `[0, 1)` draw.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::{fr_lower, fr_upper, sr_lower, sr_upper};
use crate::model::{FrLowerMode, NetworkParams, PowerAllocation};
use crate::power_alloc::{fr_lower_opt, fr_upper_opt, sr_lower_opt, sr_upper_opt};

/// Seed used by validation runs unless overridden.
pub const DEFAULT_SEED: u64 = 0x5eed_2718;

/// Draws per Monte Carlo shard.
pub const MC_SHARD: u64 = 1 << 13;

/// Trials per experiment shard.
pub const TRIAL_SHARD: usize = 256;

/// Largest network for the exhaustive searches.
pub const MAX_BRUTE_DIM: usize = 3;

/// Generator for shard `shard` of the stream rooted at `seed`.
pub fn shard_rng(seed: u64, shard: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}

/// Uniform draw on `(0, 1]`.
pub fn uniform_open0<R: Rng>(rng: &mut R) -> f64 {
    1.0 - rng.gen::<f64>()
}

/// Standard normal sampler (Marsaglia polar method, spare cached).
#[derive(Debug, Default, Clone)]
pub struct PolarNormal {
    spare: Option<f64>,
}

impl PolarNormal {
    pub fn sample<R: Rng>(&mut self, rng: &mut R) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * rng.gen::<f64>() - 1.0;
            let v = 2.0 * rng.gen::<f64>() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let k = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * k);
                return u * k;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McConfig {
    pub n_samples: u64,
    pub seed: u64,
    /// Variance of the MAC noise. The model has unit variance; other values
    /// let harness tests corrupt the simulation deliberately.
    pub noise_variance: f64,
}

impl McConfig {
    pub fn new(n_samples: u64, seed: u64) -> Self {
        Self {
            n_samples,
            seed,
            noise_variance: 1.0,
        }
    }

    /// Same stream with the channel noise variance replaced by `var`.
    pub fn with_noise_variance(mut self, var: f64) -> Self {
        self.noise_variance = var;
        self
    }

    fn noise_sd(&self) -> f64 {
        self.noise_variance.sqrt()
    }
}

/// Empirical AF mean squared errors with their standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate {
    pub sr_mse: f64,
    pub sr_se: f64,
    pub fr_mse: Vec<f64>,
    pub fr_se: Vec<f64>,
    pub n_samples: u64,
}

#[derive(Clone)]
struct Moments {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl Moments {
    fn zeros(k: usize) -> Self {
        Self {
            sum: vec![0.0; k],
            sum_sq: vec![0.0; k],
        }
    }

    fn push(&mut self, i: usize, x: f64) {
        self.sum[i] += x;
        self.sum_sq[i] += x * x;
    }

    fn merge(mut self, other: &Self) -> Self {
        for i in 0..self.sum.len() {
            self.sum[i] += other.sum[i];
            self.sum_sq[i] += other.sum_sq[i];
        }
        self
    }

    fn mean_se(&self, i: usize, n: f64) -> (f64, f64) {
        let mean = self.sum[i] / n;
        let var = ((self.sum_sq[i] - n * mean * mean) / (n - 1.0)).max(0.0);
        (mean, (var / n).sqrt())
    }
}

/// Simulates `U_m = beta_m S + W_m`, `X_m = sqrt(P_m / (1 + beta_m^2)) U_m`,
/// `Y = sum alpha_m X_m + Z` and applies the LMMSE estimators of `S` and of
/// each `U_m` from `Y`, with coefficients computed from the model.
pub fn mc_af_mse(params: &NetworkParams<f64>, p: &PowerAllocation<f64>, cfg: McConfig) -> Result<McEstimate> {
    let m = params.len();
    if p.len() != m {
        return Err(Error::InvalidParams("power vector length differs from network".into()));
    }
    if cfg.n_samples < 2 {
        return Err(Error::InvalidParams("at least two samples are needed".into()));
    }
    let (alpha, beta) = (params.alpha(), params.beta());
    let c: Vec<f64> = (0..m).map(|i| alpha[i] * (p.p()[i] / (1.0 + beta[i] * beta[i])).sqrt()).collect();
    let scale: Vec<f64> = (0..m).map(|i| (p.p()[i] / (1.0 + beta[i] * beta[i])).sqrt()).collect();
    let coherent: f64 = (0..m).map(|i| beta[i] * c[i]).sum();
    let noise: f64 = c.iter().map(|x| x * x).sum();
    let output_power = 1.0 + coherent * coherent + noise;
    let k_src = coherent / output_power;
    let k_obs: Vec<f64> = (0..m).map(|i| (beta[i] * coherent + c[i]) / output_power).collect();
    let z_sd = cfg.noise_sd();

    let shards = cfg.n_samples.div_ceil(MC_SHARD);
    let parts: Vec<Moments> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let mut rng = shard_rng(cfg.seed, shard);
            let mut normal = PolarNormal::default();
            let count = MC_SHARD.min(cfg.n_samples - shard * MC_SHARD);
            let mut acc = Moments::zeros(m + 1);
            let mut u = vec![0.0; m];
            for _ in 0..count {
                let s = normal.sample(&mut rng);
                let mut y = 0.0;
                for i in 0..m {
                    u[i] = beta[i] * s + normal.sample(&mut rng);
                    y += alpha[i] * scale[i] * u[i];
                }
                y += z_sd * normal.sample(&mut rng);
                let e = s - k_src * y;
                acc.push(0, e * e);
                for i in 0..m {
                    let e = u[i] - k_obs[i] * y;
                    acc.push(i + 1, e * e);
                }
            }
            acc
        })
        .collect();
    let total = parts.iter().fold(Moments::zeros(m + 1), |a, b| a.merge(b));
    let n = cfg.n_samples as f64;
    let (sr_mse, sr_se) = total.mean_se(0, n);
    let (fr_mse, fr_se) = (1..=m).map(|i| total.mean_se(i, n)).unzip();
    Ok(McEstimate {
        sr_mse,
        sr_se,
        fr_mse,
        fr_se,
        n_samples: cfg.n_samples,
    })
}

/// Exhaustive minimum of `bound_fn` over `{sum r_m P_m = P_T, P >= 0}`.
///
/// The simplex is gridded in budget shares `r_m P_m / P_T` with step
/// `resolution`; ties keep the first grid point in lexicographic order.
pub fn brute_force_power<F>(
    bound_fn: F,
    r: &[f64],
    total: f64,
    resolution: f64,
) -> Result<(f64, PowerAllocation<f64>)>
where
    F: Fn(&PowerAllocation<f64>) -> f64 + Sync,
{
    let m = r.len();
    if m == 0 || m > MAX_BRUTE_DIM {
        return Err(Error::DimensionTooLarge { got: m, max: MAX_BRUTE_DIM });
    }
    if !(resolution > 0.0 && resolution <= 1.0) || total.is_nan() || total <= 0.0 {
        return Err(Error::InvalidParams("resolution must lie in (0, 1] and the budget be positive".into()));
    }
    let n = (1.0 / resolution).round() as usize;
    let build = |shares: &[usize]| -> PowerAllocation<f64> {
        let p = shares
            .iter()
            .zip(r)
            .map(|(&k, &rm)| k as f64 / n as f64 * total / rm)
            .collect();
        PowerAllocation::new(p, r).expect("grid point is a valid allocation")
    };
    let pick = |a: (f64, Vec<usize>), b: (f64, Vec<usize>)| if b.0 < a.0 { b } else { a };
    let best = match m {
        1 => (bound_fn(&build(&[n])), vec![n]),
        2 => (0..=n)
            .into_par_iter()
            .map(|i| (bound_fn(&build(&[i, n - i])), vec![i, n - i]))
            .reduce_with(pick)
            .expect("non-empty grid"),
        _ => (0..=n)
            .into_par_iter()
            .map(|i| {
                (0..=n - i)
                    .map(|j| {
                        let k = vec![i, j, n - i - j];
                        (bound_fn(&build(&k)), k)
                    })
                    .reduce(pick)
                    .expect("non-empty row")
            })
            .reduce_with(pick)
            .expect("non-empty grid"),
    };
    Ok((best.0, build(&best.1)))
}

/// Exhaustive minimum of `sum gamma'_m D_m` over `D_m = Lambda_m 2^{-2 R_m}`
/// with `R_m >= 0` and `sum R_m = R`.
///
/// Rate splits are gridded in shares of `R` with step `resolution`, so the
/// rate constraint holds exactly at every grid point.
pub fn brute_force_waterfill(lambdas: &[f64], gamma_prime: &[f64], rate_bits: f64, resolution: f64) -> Result<f64> {
    let m = lambdas.len();
    if m == 0 || m > MAX_BRUTE_DIM {
        return Err(Error::DimensionTooLarge { got: m, max: MAX_BRUTE_DIM });
    }
    if gamma_prime.len() != m {
        return Err(Error::InvalidParams("lambdas and gamma' differ in length".into()));
    }
    if !(resolution > 0.0 && resolution <= 1.0) || rate_bits < 0.0 {
        return Err(Error::InvalidParams("resolution must lie in (0, 1] and the rate be non-negative".into()));
    }
    let n = (1.0 / resolution).round() as usize;
    let value = |shares: &[usize]| -> f64 {
        shares
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                let r = rate_bits * k as f64 / n as f64;
                gamma_prime[i] * lambdas[i] * (-2.0 * r).exp2()
            })
            .sum()
    };
    let best = match m {
        1 => value(&[n]),
        2 => (0..=n).map(|i| value(&[i, n - i])).fold(f64::INFINITY, f64::min),
        _ => (0..=n)
            .into_par_iter()
            .map(|i| (0..=n - i).map(|j| value(&[i, j, n - i - j])).fold(f64::INFINITY, f64::min))
            .reduce(|| f64::INFINITY, f64::min),
    };
    Ok(best)
}

/// Which power policies an experiment evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepPower {
    /// Every sensor transmits at the sweep value `P`.
    Uniform,
    /// Budget `P_T = M P` shared optimally.
    Optimized,
    Both,
}

impl SweepPower {
    fn uniform(self) -> bool {
        matches!(self, Self::Uniform | Self::Both)
    }

    fn optimized(self) -> bool {
        matches!(self, Self::Optimized | Self::Both)
    }
}

/// Log-spaced per-sensor powers `10^lo ..= 10^hi` with `per_decade` points
/// per decade.
pub fn log_sweep(lo: i32, hi: i32, per_decade: usize) -> Vec<f64> {
    let steps = (hi - lo) as usize * per_decade;
    (0..=steps)
        .map(|k| 10f64.powf(lo as f64 + k as f64 / per_decade as f64))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n_trials: usize,
    pub seed: u64,
    pub power: SweepPower,
    /// Per-sensor powers; optimized runs use the budget `M P`.
    pub sweep: Vec<f64>,
}

impl ExperimentConfig {
    pub fn new(m: usize, n_trials: usize, seed: u64, power: SweepPower) -> Self {
        Self {
            m,
            n_trials,
            seed,
            power,
            sweep: log_sweep(-1, 3, 2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Pairing {
    /// Larger sensing gain paired with larger channel gain.
    Matched,
    /// Reverse order.
    Mismatched,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PowerPolicy {
    Uniform,
    Optimized,
}

/// Mean bounds over trials at one sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapRow {
    pub power: f64,
    pub policy: PowerPolicy,
    pub pairing: Pairing,
    pub sr_upper: f64,
    pub sr_lower: f64,
    pub fr_upper: f64,
    pub fr_lower: f64,
    pub sr_gap: f64,
    pub sr_gap_se: f64,
    pub fr_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub rows: Vec<GapRow>,
}

impl ExperimentResult {
    pub fn row(&self, power_index: usize, policy: PowerPolicy, pairing: Pairing) -> Option<&GapRow> {
        let p = *self.config.sweep.get(power_index)?;
        self.rows
            .iter()
            .find(|r| r.power == p && r.policy == policy && r.pairing == pairing)
    }
}

const BOUNDS: usize = 4;

/// Bounds of one network at every sweep point for one policy:
/// `[sr_upper, sr_lower, fr_upper, fr_lower]`.
fn trial_bounds(params: &NetworkParams<f64>, sweep: &[f64], policy: PowerPolicy) -> Result<Vec<[f64; BOUNDS]>> {
    let m = params.len() as f64;
    sweep
        .iter()
        .map(|&p| match policy {
            PowerPolicy::Uniform => {
                let a = PowerAllocation::uniform(params, p)?;
                Ok([
                    sr_upper(params, &a)?.distortion,
                    sr_lower(params, &a)?.distortion,
                    fr_upper(params, &a)?.distortion,
                    fr_lower(params, &a, FrLowerMode::Exact)?.distortion,
                ])
            }
            PowerPolicy::Optimized => {
                let total = m * p;
                Ok([
                    sr_upper_opt(params, total)?.value,
                    sr_lower_opt(params, total)?.value,
                    fr_upper_opt(params, total)?.value,
                    fr_lower_opt(params, total, FrLowerMode::Exact)?.value,
                ])
            }
        })
        .collect()
}

/// Draws `(alpha, beta)` uniformly on `(0, 1]^M` per trial, pairs them in
/// matched and reversed order and averages the four bounds per sweep point.
///
/// Both pairings use the same draws. Trials are sharded like the Monte
/// Carlo streams, so results do not depend on the thread count.
pub fn matched_mismatched_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    if cfg.m == 0 || cfg.n_trials == 0 || cfg.sweep.is_empty() {
        return Err(Error::InvalidParams("experiment needs sensors, trials and sweep points".into()));
    }
    let mut policies = Vec::new();
    if cfg.power.uniform() {
        policies.push(PowerPolicy::Uniform);
    }
    if cfg.power.optimized() {
        policies.push(PowerPolicy::Optimized);
    }
    let pairings = [Pairing::Matched, Pairing::Mismatched];
    let slots = policies.len() * pairings.len() * cfg.sweep.len();
    // Per slot: sums of the four bounds, of the SR gap and of its square.
    let width = BOUNDS + 2;

    let shards = cfg.n_trials.div_ceil(TRIAL_SHARD);
    let parts: Vec<Result<Vec<f64>>> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let mut rng = shard_rng(cfg.seed, shard as u64);
            let mut acc = vec![0.0; slots * width];
            let count = TRIAL_SHARD.min(cfg.n_trials - shard * TRIAL_SHARD);
            for _ in 0..count {
                let mut alpha: Vec<f64> = (0..cfg.m).map(|_| uniform_open0(&mut rng)).collect();
                let mut beta: Vec<f64> = (0..cfg.m).map(|_| uniform_open0(&mut rng)).collect();
                alpha.sort_by(f64::total_cmp);
                beta.sort_by(f64::total_cmp);
                let matched = NetworkParams::with_unit_weights(alpha.clone(), beta.clone())?;
                alpha.reverse();
                let mismatched = NetworkParams::with_unit_weights(alpha, beta)?;
                let mut slot = 0;
                for &policy in &policies {
                    for net in [&matched, &mismatched] {
                        for b in trial_bounds(net, &cfg.sweep, policy)? {
                            let base = slot * width;
                            for k in 0..BOUNDS {
                                acc[base + k] += b[k];
                            }
                            let gap = b[0] - b[1];
                            acc[base + BOUNDS] += gap;
                            acc[base + BOUNDS + 1] += gap * gap;
                            slot += 1;
                        }
                    }
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = vec![0.0; slots * width];
    for part in parts {
        for (t, x) in total.iter_mut().zip(part?) {
            *t += x;
        }
    }
    let n = cfg.n_trials as f64;
    let mut rows = Vec::with_capacity(slots);
    let mut slot = 0;
    for &policy in &policies {
        for pairing in pairings {
            for &power in &cfg.sweep {
                let s = &total[slot * width..(slot + 1) * width];
                let gap = s[BOUNDS] / n;
                let var = if n > 1.0 {
                    ((s[BOUNDS + 1] - n * gap * gap) / (n - 1.0)).max(0.0)
                } else {
                    0.0
                };
                rows.push(GapRow {
                    power,
                    policy,
                    pairing,
                    sr_upper: s[0] / n,
                    sr_lower: s[1] / n,
                    fr_upper: s[2] / n,
                    fr_lower: s[3] / n,
                    sr_gap: gap,
                    sr_gap_se: (var / n).sqrt(),
                    fr_gap: (s[2] - s[3]) / n,
                });
                slot += 1;
            }
        }
    }
    Ok(ExperimentResult {
        config: cfg.clone(),
        rows,
    })
}
