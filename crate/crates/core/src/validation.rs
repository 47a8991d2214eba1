//! Oracle cross-checks with fixed tolerances, shared by the command-line
//! `validate` command and the acceptance test suite.

use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::metrics::{fr_lower, fr_upper, sr_lower, sr_upper};
use crate::model::{Bound, FrLowerMode, MetricSpec, NetworkParams, Objective, PowerAllocation, PowerMode, Scenario};
use crate::oracle::{
    brute_force_power, brute_force_waterfill, matched_mismatched_experiment, mc_af_mse, shard_rng, uniform_open0,
    ExperimentConfig, McConfig, Pairing, PowerPolicy, SweepPower,
};
use crate::planner::{distance, greedy_plan, greedy_plan_mutual_info, nearest_sensor, PathResult};
use crate::power_alloc::{
    fr_bounds_opt, fr_lower_opt, fr_multiplier_residual, fr_upper_opt, fr_upper_opt_weighted, lambda_fr_residual,
    lambda_sr_residual, solve_lambda_fr, solve_lambda_sr, sr_lower_opt, sr_multiplier_residual, sr_upper_opt,
};
use crate::rate_distortion::{remote_rd_distortion, ru_eigen, vector_rd_exact, vector_rd_highrate, water_fill};
use crate::scenarios::bundled;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    /// Reduced sample sizes for fast feedback.
    Quick,
    /// The acceptance sample sizes.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Options {
    pub level: Level,
    pub seed: u64,
    /// Replaces the simulated channel noise variance, which the Monte Carlo
    /// check must then detect. Harness sanity only.
    pub corrupt_noise_variance: Option<f64>,
}

impl Options {
    pub fn new(level: Level, seed: u64) -> Self {
        Self {
            level,
            seed,
            corrupt_noise_variance: None,
        }
    }

    fn full(&self) -> bool {
        self.level == Level::Full
    }
}

/// The acceptance checks, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    BoundOrdering,
    ExactnessIdentities,
    MonteCarlo,
    OptimizationOracle,
    RootResiduals,
    RateDistortion,
    MatchedMismatched,
    TopologyPaths,
    PathInvariants,
}

impl Check {
    pub const ALL: [Check; 9] = [
        Check::BoundOrdering,
        Check::ExactnessIdentities,
        Check::MonteCarlo,
        Check::OptimizationOracle,
        Check::RootResiduals,
        Check::RateDistortion,
        Check::MatchedMismatched,
        Check::TopologyPaths,
        Check::PathInvariants,
    ];

    pub fn number(self) -> usize {
        Self::ALL.iter().position(|&c| c == self).expect("listed") + 1
    }

    pub fn name(self) -> &'static str {
        match self {
            Check::BoundOrdering => "bound-ordering",
            Check::ExactnessIdentities => "exactness-identities",
            Check::MonteCarlo => "monte-carlo",
            Check::OptimizationOracle => "optimization-oracle",
            Check::RootResiduals => "root-residuals",
            Check::RateDistortion => "rate-distortion",
            Check::MatchedMismatched => "matched-mismatched",
            Check::TopologyPaths => "topology-paths",
            Check::PathInvariants => "path-invariants",
        }
    }

    /// Wall-time budget in seconds.
    pub fn budget_secs(self) -> f64 {
        match self {
            Check::BoundOrdering => 5.0,
            Check::ExactnessIdentities => 1.0,
            Check::MonteCarlo => 60.0,
            Check::OptimizationOracle => 120.0,
            Check::RootResiduals => 2.0,
            Check::RateDistortion => 30.0,
            Check::MatchedMismatched => 600.0,
            Check::TopologyPaths => 60.0,
            Check::PathInvariants => 10.0,
        }
    }

    fn stream(self) -> u64 {
        0x100 + self.number() as u64
    }
}

/// One measured sub-check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measurement {
    pub what: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Measurement {
    fn at_most(what: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            what: what.into(),
            measured,
            tolerance,
            passed: measured <= tolerance,
        }
    }

    fn below(what: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            what: what.into(),
            measured,
            tolerance,
            passed: measured < tolerance,
        }
    }

    /// Reported without a gate.
    fn info(what: impl Into<String>, measured: f64) -> Self {
        Self {
            what: what.into(),
            measured,
            tolerance: f64::INFINITY,
            passed: true,
        }
    }

    fn flag(what: impl Into<String>, ok: bool) -> Self {
        Self {
            what: what.into(),
            measured: if ok { 0.0 } else { 1.0 },
            tolerance: 0.0,
            passed: ok,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub check: Check,
    pub number: usize,
    pub name: &'static str,
    pub passed: bool,
    pub seconds: f64,
    pub budget_secs: f64,
    pub measurements: Vec<Measurement>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckResult {
    /// One-line human summary.
    pub fn line(&self) -> String {
        let worst = self
            .measurements
            .iter()
            .find(|m| !m.passed)
            .or_else(|| self.measurements.first());
        let detail = match (&self.error, worst) {
            (Some(e), _) => format!("error: {e}"),
            (None, Some(m)) => format!("{}: {:.3e} (tol {:.1e})", m.what, m.measured, m.tolerance),
            (None, None) => String::new(),
        };
        format!(
            "[{}] {} {} ({:.2}s / {:.0}s) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.number,
            self.name,
            self.seconds,
            self.budget_secs,
            detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub options: Options,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

/// Runs every check.
pub fn run_all(opts: &Options) -> Report {
    let checks: Vec<CheckResult> = Check::ALL.iter().map(|&c| run_check(c, opts)).collect();
    Report {
        options: *opts,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

/// Runs one check and times it. Errors from the library fail the check.
pub fn run_check(check: Check, opts: &Options) -> CheckResult {
    let start = Instant::now();
    let outcome = match check {
        Check::BoundOrdering => bound_ordering(opts),
        Check::ExactnessIdentities => exactness_identities(opts),
        Check::MonteCarlo => monte_carlo(opts),
        Check::OptimizationOracle => optimization_oracle(opts),
        Check::RootResiduals => root_residuals(opts),
        Check::RateDistortion => rate_distortion(opts),
        Check::MatchedMismatched => matched_mismatched(opts),
        Check::TopologyPaths => topology_paths(),
        Check::PathInvariants => path_invariants(),
    };
    let seconds = start.elapsed().as_secs_f64();
    let budget = check.budget_secs();
    let (mut measurements, error) = match outcome {
        Ok(m) => (m, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    measurements.push(Measurement::below("wall time [s]", seconds, budget));
    CheckResult {
        check,
        number: check.number(),
        name: check.name(),
        passed: error.is_none() && measurements.iter().all(|m| m.passed),
        seconds,
        budget_secs: budget,
        measurements,
        error,
    }
}

struct Draw(ChaCha8Rng);

impl Draw {
    fn new(opts: &Options, check: Check) -> Self {
        Self(shard_rng(opts.seed, check.stream()))
    }

    /// Uniform on `(0, hi]`.
    fn up_to(&mut self, hi: f64) -> f64 {
        hi * uniform_open0(&mut self.0)
    }

    /// Uniform on `(lo, hi]`.
    fn between(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * uniform_open0(&mut self.0)
    }

    fn size(&mut self, lo: usize, hi: usize) -> usize {
        self.0.gen_range(lo..=hi)
    }

    fn vec(&mut self, m: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..m).map(|_| self.between(lo, hi)).collect()
    }

    fn seed(&mut self) -> u64 {
        self.0.gen()
    }

    /// `M` in `1..=5`, gains on `(0, 1]`, powers on `(0, 10]`.
    fn instance(&mut self) -> Result<(NetworkParams<f64>, PowerAllocation<f64>)> {
        let m = self.size(1, 5);
        let alpha = self.vec(m, 0.0, 1.0);
        let beta = self.vec(m, 0.0, 1.0);
        let params = NetworkParams::with_unit_weights(alpha, beta)?;
        let p = PowerAllocation::new(self.vec(m, 0.0, 10.0), params.r())?;
        Ok((params, p))
    }
}

fn bound_ordering(opts: &Options) -> Result<Vec<Measurement>> {
    let mut d = Draw::new(opts, Check::BoundOrdering);
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0usize;
    for _ in 0..10_000 {
        let (params, p) = d.instance()?;
        let excess = sr_lower(&params, &p)?.distortion - sr_upper(&params, &p)?.distortion;
        worst = worst.max(excess);
        if excess > 1e-12 {
            violations += 1;
        }
    }
    Ok(vec![
        Measurement::at_most("max(sr_lower - sr_upper)", worst, 1e-12),
        Measurement::at_most("violations", violations as f64, 0.0),
    ])
}

fn exactness_identities(opts: &Options) -> Result<Vec<Measurement>> {
    let mut d = Draw::new(opts, Check::ExactnessIdentities);
    let mut single = 0.0f64;
    let mut symmetric = 0.0f64;
    for _ in 0..1_000 {
        let params = NetworkParams::with_unit_weights(vec![d.up_to(1.0)], vec![d.up_to(1.0)])?;
        let p = PowerAllocation::new(vec![d.up_to(10.0)], params.r())?;
        single = single.max((sr_upper(&params, &p)?.distortion - sr_lower(&params, &p)?.distortion).abs());
    }
    for _ in 0..1_000 {
        let m = d.size(2, 5);
        let (a, b, pw) = (d.up_to(1.0), d.up_to(1.0), d.up_to(10.0));
        let params = NetworkParams::with_unit_weights(vec![a; m], vec![b; m])?;
        let p = PowerAllocation::uniform(&params, pw)?;
        symmetric = symmetric.max((sr_upper(&params, &p)?.distortion - sr_lower(&params, &p)?.distortion).abs());
    }
    Ok(vec![
        Measurement::at_most("single sensor |upper - lower|", single, 1e-12),
        Measurement::at_most("symmetric network |upper - lower|", symmetric, 1e-12),
    ])
}

fn monte_carlo(opts: &Options) -> Result<Vec<Measurement>> {
    let mut d = Draw::new(opts, Check::MonteCarlo);
    let instances = if opts.full() { 100 } else { 10 };
    let n = 100_000;
    let (mut worst_sr, mut worst_fr) = (0.0f64, 0.0f64);
    let (mut sr_out, mut fr_out, mut fr_total) = (0usize, 0usize, 0usize);
    for _ in 0..instances {
        let (params, p) = d.instance()?;
        let mut cfg = McConfig::new(n, d.seed());
        if let Some(v) = opts.corrupt_noise_variance {
            cfg = cfg.with_noise_variance(v);
        }
        let est = mc_af_mse(&params, &p, cfg)?;
        let z = (est.sr_mse - sr_upper(&params, &p)?.distortion).abs() / est.sr_se;
        worst_sr = worst_sr.max(z);
        sr_out += usize::from(z > 3.0);
        let comps = fr_upper(&params, &p)?.components.expect("field upper bound has components");
        for (m, j) in comps.iter().enumerate() {
            let z = (est.fr_mse[m] - j).abs() / est.fr_se[m];
            worst_fr = worst_fr.max(z);
            fr_out += usize::from(z > 3.0);
            fr_total += 1;
        }
    }
    Ok(vec![
        Measurement::at_most(format!("max SR |z| over {instances} instances"), worst_sr, 3.0),
        Measurement::at_most(format!("max FR |z| over {fr_total} sensors"), worst_fr, 3.0),
        Measurement::at_most("SR instances beyond 3 s.e.", sr_out as f64, 0.0),
        Measurement::at_most("FR sensors beyond 3 s.e.", fr_out as f64, 0.0),
    ])
}

const BRUTE_RESOLUTION: f64 = 1e-3;

fn brute<F>(f: F, r: &[f64], total: f64) -> Result<f64>
where
    F: Fn(&PowerAllocation<f64>) -> Result<f64> + Sync,
{
    let value = |p: &PowerAllocation<f64>| f(p).unwrap_or(f64::NAN);
    Ok(brute_force_power(value, r, total, BRUTE_RESOLUTION)?.0)
}

fn optimization_oracle(opts: &Options) -> Result<Vec<Measurement>> {
    let mut d = Draw::new(opts, Check::OptimizationOracle);
    let per = if opts.full() { 20 } else { 2 };
    let names = [
        "sr-upper",
        "sr-lower",
        "fr-upper",
        "fr-lower (exact)",
        "fr-lower (high-rate allocation)",
        "fr-upper (weighted)",
    ];
    let mut worst = [0.0f64; 6];
    let mut beaten = 0.0f64;
    for m in [2usize, 3] {
        for _ in 0..per {
            let alpha = d.vec(m, 0.0, 1.0);
            let beta = d.vec(m, 0.0, 1.0);
            let r = d.vec(m, 0.5, 2.0);
            let gamma = d.vec(m, 0.5, 4.0);
            let total = d.up_to(10.0);
            let params = NetworkParams::new(alpha, beta, vec![1.0; m], r)?;
            let weighted = params.clone().with_gamma(gamma)?;
            let r = params.r();
            let hr_alloc = fr_bounds_opt(&params, total)?.1.allocation;
            let cases: [(f64, f64); 6] = [
                (
                    sr_upper_opt(&params, total)?.value,
                    brute(|p| Ok(sr_upper(&params, p)?.distortion), r, total)?,
                ),
                (
                    sr_lower_opt(&params, total)?.value,
                    brute(|p| Ok(sr_lower(&params, p)?.distortion), r, total)?,
                ),
                (
                    fr_upper_opt(&params, total)?.value,
                    brute(|p| Ok(fr_upper(&params, p)?.distortion), r, total)?,
                ),
                (
                    fr_lower_opt(&params, total, FrLowerMode::Exact)?.value,
                    brute(|p| Ok(fr_lower(&params, p, FrLowerMode::Exact)?.distortion), r, total)?,
                ),
                (
                    fr_lower(&params, &hr_alloc, FrLowerMode::HighRate)?.distortion,
                    brute(|p| Ok(fr_lower(&params, p, FrLowerMode::HighRate)?.distortion), r, total)?,
                ),
                (
                    fr_upper_opt_weighted(&weighted, total)?.value,
                    brute(|p| Ok(fr_upper(&weighted, p)?.distortion), r, total)?,
                ),
            ];
            for (k, (closed, brute)) in cases.iter().enumerate() {
                worst[k] = worst[k].max((closed - brute).abs());
                beaten = beaten.max(closed - brute);
            }
        }
    }
    let mut out: Vec<Measurement> = names
        .iter()
        .zip(worst)
        .map(|(n, w)| Measurement::at_most(format!("{n} |closed - brute|"), w, 1e-3))
        .collect();
    out.push(Measurement::at_most("max(closed - brute)", beaten, 1e-9));
    Ok(out)
}

fn root_residuals(opts: &Options) -> Result<Vec<Measurement>> {
    let mut d = Draw::new(opts, Check::RootResiduals);
    let (mut sr, mut fr1, mut fr2) = (0.0f64, 0.0f64, 0.0f64);
    let (mut sr_lit, mut fr1_lit) = (0.0f64, 0.0f64);
    for _ in 0..1_000 {
        let m = d.size(1, 5);
        let params = NetworkParams::new(d.vec(m, 0.0, 1.0), d.vec(m, 0.0, 1.0), vec![1.0; m], d.vec(m, 0.5, 2.0))?;
        let total = d.up_to(10.0 * m as f64);
        let lambda = solve_lambda_sr(&params)?.value;
        sr = sr.max(sr_multiplier_residual(&params, lambda).abs());
        sr_lit = sr_lit.max(lambda_sr_residual(&params, lambda).abs());
        let roots = solve_lambda_fr(&params, total)?;
        fr1 = fr1.max(fr_multiplier_residual(&params, total, roots.lambda1.value).abs());
        fr1_lit = fr1_lit.max(lambda_fr_residual(&params, total, roots.lambda1.value).abs());
        fr2 = fr2.max(sr_multiplier_residual(&params, roots.lambda2.value).abs());
    }
    Ok(vec![
        Measurement::below("source multiplier residual", sr, 1e-10),
        Measurement::below("field AF multiplier residual", fr1, 1e-10),
        Measurement::below("field lower multiplier residual", fr2, 1e-10),
        Measurement::info("source multiplier residual, unscaled terms", sr_lit),
        Measurement::info("field AF multiplier residual, unscaled terms", fr1_lit),
    ])
}

fn rate_distortion(opts: &Options) -> Result<Vec<Measurement>> {
    let mut d = Draw::new(opts, Check::RateDistortion);
    let brute_cases = if opts.full() { 60 } else { 12 };
    let mut brute_err = 0.0f64;
    for k in 0..brute_cases {
        let m = 1 + k % 3;
        let beta = d.vec(m, 0.0, 2.0);
        let gamma = d.vec(m, 0.5, 4.0);
        let rate = d.between(0.0, 4.0);
        let eig = ru_eigen(&beta, &gamma)?;
        let brute = brute_force_waterfill(eig.lambdas(), eig.gamma_prime(), rate, 1e-3)?;
        brute_err = brute_err.max((vector_rd_exact(&eig, rate) - brute).abs());
    }
    let mut above = f64::NEG_INFINITY;
    let mut active_gap = 0.0f64;
    let mut active_cases = 0usize;
    let mut remote_zero = true;
    for _ in 0..10_000 {
        let m = d.size(1, 5);
        let beta = d.vec(m, 0.0, 2.0);
        let gamma = d.vec(m, 0.5, 4.0);
        let rate = d.between(0.0, 8.0);
        let eig = ru_eigen(&beta, &gamma)?;
        let exact = vector_rd_exact(&eig, rate);
        let high = vector_rd_highrate(&eig, rate);
        above = above.max((high - exact) / exact);
        if water_fill(&eig, rate).all_active {
            active_gap = active_gap.max((high - exact).abs());
            active_cases += 1;
        }
        remote_zero &= remote_rd_distortion(&beta, 0.0) == 1.0;
    }
    Ok(vec![
        Measurement::at_most("|exact - brute water-fill|", brute_err, 1e-3),
        Measurement::at_most("max (high-rate - exact) / exact", above, 1e-12),
        Measurement::at_most(format!("all-active |high-rate - exact| ({active_cases} cases)"), active_gap, 1e-9),
        Measurement::flag("remote distortion at zero rate is exactly 1", remote_zero),
    ])
}

fn matched_mismatched(opts: &Options) -> Result<Vec<Measurement>> {
    let trials = if opts.full() { 10_000 } else { 2_000 };
    let cfg = ExperimentConfig::new(5, trials, opts.seed, SweepPower::Both);
    let res = matched_mismatched_experiment(&cfg)?;
    let mut worst_order = f64::NEG_INFINITY;
    let mut worst_opt = f64::NEG_INFINITY;
    for k in 0..cfg.sweep.len() {
        for policy in [PowerPolicy::Uniform, PowerPolicy::Optimized] {
            let m = res.row(k, policy, Pairing::Matched).expect("row exists");
            let x = res.row(k, policy, Pairing::Mismatched).expect("row exists");
            worst_order = worst_order.max(m.sr_gap - x.sr_gap);
        }
        for pairing in [Pairing::Matched, Pairing::Mismatched] {
            let u = res.row(k, PowerPolicy::Uniform, pairing).expect("row exists");
            let o = res.row(k, PowerPolicy::Optimized, pairing).expect("row exists");
            for (opt, uni) in [
                (o.sr_upper, u.sr_upper),
                (o.sr_lower, u.sr_lower),
                (o.fr_upper, u.fr_upper),
                (o.fr_lower, u.fr_lower),
            ] {
                worst_opt = worst_opt.max(opt - uni);
            }
        }
    }
    Ok(vec![
        Measurement::below("max(matched gap - mismatched gap)", worst_order, 0.0),
        Measurement::at_most("max(optimized - uniform)", worst_opt, 0.0),
    ])
}

fn load(name: &str) -> Result<Scenario<f64>> {
    bundled(name).expect("bundled scenario exists")
}

fn specs_where(f: impl Fn(&MetricSpec) -> bool) -> Vec<MetricSpec> {
    MetricSpec::all().into_iter().filter(f).collect()
}

/// Steps of the topology experiments.
pub const PATH_STEPS: usize = 30;

fn topology_paths() -> Result<Vec<Measurement>> {
    let mut out = Vec::new();
    let t1 = load("topology-1")?;
    let lows: Vec<PathResult<f64>> = specs_where(|s| s.bound == Bound::Lower)
        .into_iter()
        .map(|s| greedy_plan(&t1, s, PATH_STEPS))
        .collect::<Result<_>>()?;
    let same = lows.iter().all(|p| p.positions == lows[0].positions);
    out.push(Measurement::flag("topology-1: lower-bound paths identical", same));
    out.push(Measurement::flag(
        "topology-1: lower-bound paths end nearest sensor-2",
        lows.iter().all(|p| nearest_sensor(&t1, p.final_position()) == 1),
    ));
    for power in [PowerMode::Fixed, PowerMode::Optimized] {
        let spec = MetricSpec::new(Objective::Fr, Bound::Upper, power);
        let p = greedy_plan(&t1, spec, PATH_STEPS)?;
        out.push(Measurement::flag(
            format!("topology-1: {spec} ends nearest sensor-3"),
            nearest_sensor(&t1, p.final_position()) == 2,
        ));
    }
    let comm = load("topology-2-small-comm")?;
    for spec in MetricSpec::all() {
        let p = greedy_plan(&comm, spec, PATH_STEPS)?;
        out.push(Measurement::flag(
            format!("topology-2 (a=1, b=10, P=10): {spec} ends nearest sensor-2"),
            nearest_sensor(&comm, p.final_position()) == 1,
        ));
    }
    let sensing = load("topology-2-small-sensing")?;
    let start = distance(sensing.av_start, sensing.sensor_pos[1]);
    for spec in specs_where(|s| s.bound == Bound::Upper && s.power == PowerMode::Fixed) {
        let p = greedy_plan(&sensing, spec, PATH_STEPS)?;
        let end = distance(p.final_position(), sensing.sensor_pos[1]);
        out.push(Measurement::below(
            format!("topology-2 (a=10, b=1, P=100): {spec} start - end distance to sensor-2"),
            start - end,
            0.0,
        ));
    }
    Ok(out)
}

fn path_invariants() -> Result<Vec<Measurement>> {
    let mut monotone = true;
    let mut paths = 0usize;
    let names = ["topology-1", "topology-2-small-comm", "topology-2-small-sensing", "m1-unit", "symmetric"];
    for name in names {
        let s = load(name)?;
        for spec in MetricSpec::all() {
            let p = greedy_plan(&s, spec, PATH_STEPS)?;
            monotone &= p.costs.windows(2).all(|w| w[1] <= w[0]);
            paths += 1;
        }
    }

    let mut mirrored = true;
    let mut compared_steps = 0usize;
    for name in ["topology-2-small-comm", "topology-2-small-sensing"] {
        let s = load(name)?;
        let r = s.reflected_x();
        for spec in MetricSpec::all() {
            let a = greedy_plan(&s, spec, PATH_STEPS)?;
            let b = greedy_plan(&r, spec, PATH_STEPS)?;
            let upto = [a.first_tie(), b.first_tie()]
                .into_iter()
                .flatten()
                .min()
                .unwrap_or(PATH_STEPS + 1);
            for k in 0..upto.min(PATH_STEPS + 1) {
                let (pa, pb) = (a.positions[k], b.positions[k]);
                mirrored &= pa[0] == pb[0] && pa[1] == -pb[1];
                compared_steps += 1;
            }
        }
    }

    let mut argmin = true;
    for name in names {
        let s = load(name)?;
        for spec in specs_where(|s| s.objective == Objective::Sr) {
            let d = greedy_plan(&s, spec, PATH_STEPS)?;
            let mi = greedy_plan_mutual_info(&s, spec, PATH_STEPS)?;
            argmin &= d.positions == mi.positions;
        }
    }
    Ok(vec![
        Measurement::flag(format!("costs non-increasing on {paths} paths"), monotone),
        Measurement::flag(format!("mirror symmetry over {compared_steps} positions"), mirrored),
        Measurement::flag("distortion and mutual-information paths identical", argmin),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::DEFAULT_SEED;

    #[test]
    fn check_numbers_follow_order() {
        for (i, c) in Check::ALL.iter().enumerate() {
            assert_eq!(c.number(), i + 1);
        }
    }

    #[test]
    fn corrupted_noise_fails_monte_carlo() {
        let mut opts = Options::new(Level::Quick, DEFAULT_SEED);
        opts.corrupt_noise_variance = Some(1.5);
        assert!(!run_check(Check::MonteCarlo, &opts).passed);
    }
}
