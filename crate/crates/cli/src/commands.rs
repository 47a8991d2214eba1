use std::path::Path;
use std::time::Instant;

use anyhow::anyhow;
use serde_json::json;

use sensorpath::metrics::mutual_info_bits;
use sensorpath::oracle::{log_sweep, matched_mismatched_experiment, ExperimentConfig, SweepPower, DEFAULT_SEED};
use sensorpath::planner::{compare_paths, greedy_plan, nearest_sensor, distance, PathEvent, PathResult};
use sensorpath::power_alloc::{fr_lower_opt, fr_upper_opt, sr_lower_opt, sr_upper_opt, Multipliers};
use sensorpath::rate_distortion::{remote_rd_distortion, ru_eigen, vector_rd_exact, vector_rd_highrate, water_fill};
use sensorpath::validation::{run_all, Level, Options};
use sensorpath::{
    build_network_params, evaluate, scenarios, Bound, Error, MetricSpec, Objective, OptResult64, Point, PowerInput,
    PowerMode, Scenario64,
};

use crate::output::{num, Artifact, Sink, Table};
use crate::{Cli, Command, LevelArg, Policy};

pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

#[derive(Debug)]
pub enum Failure {
    /// Unreadable or malformed input, unknown names, bad flags.
    Input(anyhow::Error),
    /// Scenario invariant violations and numerical failures.
    Numeric(anyhow::Error),
    /// At least one acceptance check failed.
    Validation,
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => EXIT_INPUT,
            Failure::Numeric(_) => EXIT_NUMERIC,
            Failure::Validation => EXIT_VALIDATION,
        }
    }

    pub fn message(&self) -> Option<String> {
        match self {
            Failure::Input(e) | Failure::Numeric(e) => Some(format!("{e:#}")),
            Failure::Validation => Some("validation failed".into()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::MissingPower(_) | Error::PowerFormMismatch { .. } | Error::DimensionTooLarge { .. } => {
                Failure::Input(e.into())
            }
            _ => Failure::Numeric(e.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

type CmdResult = Result<(), Failure>;

fn input(msg: impl std::fmt::Display) -> Failure {
    Failure::Input(anyhow!("{msg}"))
}

pub fn run(cli: Cli) -> CmdResult {
    let started = Instant::now();
    let g = &cli.global;
    let mut sink = Sink {
        out: g.out.clone(),
        format: g.format,
        subcommand: "",
        scenario: g.scenario.clone(),
        specs: Vec::new(),
        seed: None,
        started,
    };
    match cli.command {
        Command::Metrics { specs, at } => {
            sink.subcommand = "metrics";
            let scenario = load_scenario(g.scenario.as_deref())?;
            let specs = parse_specs(&specs, default_fixed_specs)?;
            sink.specs = spec_names(&specs);
            metrics(&scenario, &specs, position(&scenario, at)?, &sink)
        }
        Command::Optimize { specs, total, at } => {
            sink.subcommand = "optimize";
            let scenario = load_scenario(g.scenario.as_deref())?;
            let specs = parse_specs(&specs, default_optimized_specs)?;
            if let Some(s) = specs.iter().find(|s| s.power != PowerMode::Optimized) {
                return Err(input(format!("`{s}` is not an optimised metric")));
            }
            sink.specs = spec_names(&specs);
            let total = match total {
                Some(t) => t,
                None => scenario.budget()?,
            };
            optimize(&scenario, &specs, total, position(&scenario, at)?, &sink)
        }
        Command::Sweep {
            m,
            trials,
            policy,
            powers,
            lo,
            hi,
            per_decade,
        } => {
            sink.subcommand = "sweep";
            let seed = resolve_seed(g.seed, g.scenario.as_deref())?;
            sink.seed = Some(seed);
            let power = match policy {
                Policy::Uniform => SweepPower::Uniform,
                Policy::Optimized => SweepPower::Optimized,
                Policy::Both => SweepPower::Both,
            };
            let mut cfg = ExperimentConfig::new(m, trials, seed, power);
            cfg.sweep = if powers.is_empty() {
                if hi < lo || per_decade == 0 {
                    return Err(input("log grid needs lo <= hi and per-decade >= 1"));
                }
                log_sweep(lo, hi, per_decade)
            } else {
                powers
            };
            if cfg.sweep.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
                return Err(input("sweep powers must be positive and finite"));
            }
            if m == 0 || trials == 0 {
                return Err(input("sweep needs at least one sensor and one trial"));
            }
            sweep(&cfg, &sink)
        }
        Command::Plan { specs, steps } => {
            sink.subcommand = "plan";
            let scenario = load_scenario(g.scenario.as_deref())?;
            let specs = parse_specs(&specs, MetricSpec::all)?;
            sink.specs = spec_names(&specs);
            plan(&scenario, &specs, steps, &sink)
        }
        Command::Rd {
            beta,
            gamma,
            rate_max,
            points,
        } => {
            sink.subcommand = "rd";
            rd(g.scenario.as_deref(), beta, gamma, rate_max, points, &sink)
        }
        Command::Validate {
            level,
            corrupt_noise_variance,
        } => {
            sink.subcommand = "validate";
            let seed = g.seed.unwrap_or(DEFAULT_SEED);
            sink.seed = Some(seed);
            let level = match level {
                LevelArg::Quick => Level::Quick,
                LevelArg::Full => Level::Full,
            };
            let mut opts = Options::new(level, seed);
            opts.corrupt_noise_variance = corrupt_noise_variance;
            validate(&opts, &sink)
        }
    }
}

/// Reads a scenario file, or falls back to a bundled scenario of that name.
fn load_scenario(arg: Option<&str>) -> Result<Scenario64, Failure> {
    let name = arg.ok_or_else(|| input("--scenario is required for this command"))?;
    let path = Path::new(name);
    let mut scenario = if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| input(format!("reading {name}: {e}")))?;
        let mut s = Scenario64::from_json(&text)?;
        if s.name.is_none() {
            s.name = path.file_stem().map(|x| x.to_string_lossy().into_owned());
        }
        s
    } else {
        match scenarios::bundled::<f64>(name) {
            Some(s) => s?,
            None => {
                let known: Vec<&str> = scenarios::names().collect();
                return Err(input(format!(
                    "no scenario file or bundled scenario named `{name}` (bundled: {})",
                    known.join(", ")
                )));
            }
        }
    };
    scenario.ensure_valid()?;
    if scenario.name.is_none() {
        scenario.name = Some(name.to_string());
    }
    Ok(scenario)
}

fn resolve_seed(flag: Option<u64>, scenario: Option<&str>) -> Result<u64, Failure> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match scenario {
        Some(_) => Ok(load_scenario(scenario)?.seed.unwrap_or(DEFAULT_SEED)),
        None => Ok(DEFAULT_SEED),
    }
}

fn default_fixed_specs() -> Vec<MetricSpec> {
    MetricSpec::all().into_iter().filter(|s| s.power == PowerMode::Fixed).collect()
}

fn default_optimized_specs() -> Vec<MetricSpec> {
    MetricSpec::all().into_iter().filter(|s| s.power == PowerMode::Optimized).collect()
}

fn parse_specs(names: &[String], default: fn() -> Vec<MetricSpec>) -> Result<Vec<MetricSpec>, Failure> {
    if names.is_empty() {
        return Ok(default());
    }
    names
        .iter()
        .map(|n| n.trim().parse::<MetricSpec>().map_err(Failure::from))
        .collect()
}

fn spec_names(specs: &[MetricSpec]) -> Vec<String> {
    specs.iter().map(|s| s.to_string()).collect()
}

fn position(scenario: &Scenario64, at: Option<Vec<f64>>) -> Result<Point<f64>, Failure> {
    match at.as_deref() {
        None => Ok(scenario.av_start),
        Some([x, y]) if x.is_finite() && y.is_finite() => Ok([*x, *y]),
        Some(_) => Err(input("--at expects two finite numbers `x,y`")),
    }
}

fn scenario_json(scenario: &Scenario64) -> serde_json::Value {
    json!(scenario.name)
}

fn params_at(scenario: &Scenario64, pos: Point<f64>) -> Result<sensorpath::NetworkParams64, Failure> {
    let (params, warnings) = build_network_params(scenario, pos)?;
    for w in warnings {
        eprintln!(
            "warning: sensor {} {:?} distance {:e} clamped",
            w.sensor + 1,
            w.link,
            w.distance
        );
    }
    Ok(params)
}

fn metrics(scenario: &Scenario64, specs: &[MetricSpec], pos: Point<f64>, sink: &Sink) -> CmdResult {
    let params = params_at(scenario, pos)?;
    let mut table = Table::new("metrics", &["spec", "distortion", "valid", "mutual_info_bits"]);
    let mut rows = Vec::new();
    for spec in specs {
        let value = match spec.power {
            PowerMode::Fixed => evaluate(spec, &params, PowerInput::Fixed(&scenario.fixed_powers()?))?,
            PowerMode::Optimized => evaluate(spec, &params, PowerInput::Budget(scenario.budget()?))?,
        };
        let mi = mutual_info_bits(value.distortion)?;
        table.push(vec![spec.to_string(), num(value.distortion), value.valid.to_string(), num(mi)]);
        rows.push(json!({ "spec": spec, "name": spec.to_string(), "bound": value, "mutual_info_bits": mi }));
    }
    let doc = json!({ "scenario": scenario_json(scenario), "position": pos, "metrics": rows });
    Ok(sink.emit(&[Artifact::new("metrics", table, doc)])?)
}

fn optimum(params: &sensorpath::NetworkParams64, spec: &MetricSpec, total: f64) -> Result<OptResult64, Failure> {
    Ok(match (spec.objective, spec.bound) {
        (Objective::Sr, Bound::Upper) => sr_upper_opt(params, total)?,
        (Objective::Sr, Bound::Lower) => sr_lower_opt(params, total)?,
        (Objective::Fr, Bound::Upper) => fr_upper_opt(params, total)?,
        (Objective::Fr, Bound::Lower) => fr_lower_opt(params, total, spec.fr_lower_mode.unwrap_or_default())?,
    })
}

fn optimize(scenario: &Scenario64, specs: &[MetricSpec], total: f64, pos: Point<f64>, sink: &Sink) -> CmdResult {
    let params = params_at(scenario, pos)?;
    let mut table = Table::new(
        "allocation",
        &["spec", "value", "valid", "residual", "lambda1", "lambda2", "sensor", "power"],
    );
    let mut results = Vec::new();
    for spec in specs {
        let res = optimum(&params, spec, total)?;
        let (l1, l2) = match res.multipliers {
            Multipliers::None => (String::new(), String::new()),
            Multipliers::Sr { lambda } => (num(lambda), String::new()),
            Multipliers::Fr { lambda1, lambda2 } => (num(lambda1), num(lambda2)),
        };
        for (m, &p) in res.allocation.p().iter().enumerate() {
            table.push(vec![
                spec.to_string(),
                num(res.value),
                res.valid.to_string(),
                num(res.residual),
                l1.clone(),
                l2.clone(),
                (m + 1).to_string(),
                num(p),
            ]);
        }
        results.push(json!({ "spec": spec, "name": spec.to_string(), "result": res }));
    }
    let doc = json!({
        "scenario": scenario_json(scenario),
        "position": pos,
        "total_power": total,
        "results": results,
    });
    Ok(sink.emit(&[Artifact::new("allocation", table, doc)])?)
}

fn sweep(cfg: &ExperimentConfig, sink: &Sink) -> CmdResult {
    let result = matched_mismatched_experiment(cfg)?;
    let mut table = Table::new(
        "sweep",
        &[
            "power", "policy", "pairing", "sr_upper", "sr_lower", "fr_upper", "fr_lower", "sr_gap", "sr_gap_se", "fr_gap",
        ],
    );
    for r in &result.rows {
        table.push(vec![
            num(r.power),
            label(&r.policy),
            label(&r.pairing),
            num(r.sr_upper),
            num(r.sr_lower),
            num(r.fr_upper),
            num(r.fr_lower),
            num(r.sr_gap),
            num(r.sr_gap_se),
            num(r.fr_gap),
        ]);
    }
    let doc = serde_json::to_value(&result).map_err(anyhow::Error::from)?;
    Ok(sink.emit(&[Artifact::new("sweep", table, doc)])?)
}

/// Serde name of a unit enum variant.
fn label<T: serde::Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        other => format!("{other:?}"),
    }
}

fn file_stem(spec: &str) -> String {
    spec.replace(':', "_")
}

fn stall_step(path: &PathResult<f64>) -> Option<usize> {
    path.events.iter().find_map(|e| match e {
        PathEvent::StallAt { step, .. } => Some(*step),
        _ => None,
    })
}

fn plan(scenario: &Scenario64, specs: &[MetricSpec], steps: usize, sink: &Sink) -> CmdResult {
    let (paths, first_divergence) = if specs.len() == 1 {
        (vec![greedy_plan(scenario, specs[0], steps)?], None)
    } else {
        let cmp = compare_paths(scenario, specs, steps)?;
        (cmp.paths, cmp.first_divergence)
    };
    let mut artifacts = Vec::with_capacity(paths.len() + 1);
    let m = scenario.len();
    let mut header: Vec<String> = [
        "spec",
        "final_x",
        "final_y",
        "final_cost",
        "nearest_sensor",
        "stall_step",
        "first_tie",
        "first_divergence",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((1..=m).map(|k| format!("distance_sensor_{k}")));
    let mut summary = Table {
        schema: "plan-summary",
        header,
        rows: Vec::new(),
    };
    let opt = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
    let mut summaries = Vec::with_capacity(paths.len());
    for path in &paths {
        let mut table = Table::new("path", &["step", "x", "y", "cost", "move"]);
        for (k, (pos, cost)) in path.positions.iter().zip(&path.costs).enumerate() {
            let mv = if k == 0 { "start" } else { path.moves[k - 1].label() };
            table.push(vec![k.to_string(), num(pos[0]), num(pos[1]), num(*cost), mv.to_string()]);
        }
        let end = path.final_position();
        let nearest = nearest_sensor(scenario, end) + 1;
        let mut row = vec![
            path.label.clone(),
            num(end[0]),
            num(end[1]),
            num(*path.costs.last().expect("paths are non-empty")),
            nearest.to_string(),
            opt(stall_step(path)),
            opt(path.first_tie()),
            opt(first_divergence),
        ];
        let distances: Vec<f64> = scenario.sensor_pos.iter().map(|&x| distance(end, x)).collect();
        row.extend(distances.iter().map(|&d| num(d)));
        summary.push(row);
        summaries.push(json!({
            "spec": path.label,
            "final_position": end,
            "final_cost": path.costs.last(),
            "nearest_sensor": nearest,
            "sensor_distances": distances,
            "stall_step": stall_step(path),
            "first_tie": path.first_tie(),
        }));
        let doc = serde_json::to_value(path).map_err(anyhow::Error::from)?;
        artifacts.push(Artifact::new(format!("path-{}", file_stem(&path.label)), table, doc));
    }
    let doc = json!({
        "scenario": scenario_json(scenario),
        "steps": steps,
        "first_divergence": first_divergence,
        "paths": summaries,
    });
    artifacts.push(Artifact::new("summary", summary, doc));
    Ok(sink.emit(&artifacts)?)
}

fn rd(scenario: Option<&str>, beta: Vec<f64>, gamma: Vec<f64>, rate_max: f64, points: usize, sink: &Sink) -> CmdResult {
    let (beta, gamma) = if beta.is_empty() {
        let s = load_scenario(scenario)?;
        let (params, _) = build_network_params(&s, s.av_start)?;
        let gamma = if gamma.is_empty() { params.gamma().to_vec() } else { gamma };
        (params.beta().to_vec(), gamma)
    } else {
        let gamma = if gamma.is_empty() { vec![1.0; beta.len()] } else { gamma };
        (beta, gamma)
    };
    if gamma.len() != beta.len() {
        return Err(input(format!("--gamma has {} entries, --beta has {}", gamma.len(), beta.len())));
    }
    if beta.iter().chain(&gamma).any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(input("--beta and --gamma entries must be positive and finite"));
    }
    if !(rate_max.is_finite() && rate_max >= 0.0) || points < 2 {
        return Err(input("rd needs a finite rate-max >= 0 and at least two points"));
    }
    let eig = ru_eigen(&beta, &gamma)?;
    let mut table = Table::new(
        "rd",
        &["rate_bits", "sr_remote", "fr_exact", "fr_highrate", "fr_highrate_valid"],
    );
    let mut rows = Vec::with_capacity(points);
    for k in 0..points {
        let rate = rate_max * k as f64 / (points - 1) as f64;
        let sr = remote_rd_distortion(&beta, rate);
        let exact = vector_rd_exact(&eig, rate);
        let high = vector_rd_highrate(&eig, rate);
        let valid = water_fill(&eig, rate).all_active;
        table.push(vec![num(rate), num(sr), num(exact), num(high), valid.to_string()]);
        rows.push(json!({
            "rate_bits": rate, "sr_remote": sr, "fr_exact": exact, "fr_highrate": high, "fr_highrate_valid": valid,
        }));
    }
    let doc = json!({
        "beta": beta,
        "gamma": gamma,
        "eigenvalues": eig.lambdas(),
        "gamma_prime": eig.gamma_prime(),
        "curve": rows,
    });
    Ok(sink.emit(&[Artifact::new("rd", table, doc)])?)
}

fn validate(opts: &Options, sink: &Sink) -> CmdResult {
    let report = run_all(opts);
    for c in &report.checks {
        eprintln!("{}", c.line());
    }
    let mut table = Table::new(
        "validation",
        &[
            "check", "name", "check_passed", "seconds", "budget_secs", "measurement", "measured", "tolerance", "passed",
        ],
    );
    for c in &report.checks {
        for m in &c.measurements {
            table.push(vec![
                c.number.to_string(),
                c.name.to_string(),
                c.passed.to_string(),
                num(c.seconds),
                num(c.budget_secs),
                m.what.clone(),
                num(m.measured),
                num(m.tolerance),
                m.passed.to_string(),
            ]);
        }
        if let Some(e) = &c.error {
            table.push(vec![
                c.number.to_string(),
                c.name.to_string(),
                c.passed.to_string(),
                num(c.seconds),
                num(c.budget_secs),
                format!("error: {e}"),
                String::new(),
                String::new(),
                "false".into(),
            ]);
        }
    }
    let doc = serde_json::to_value(&report).map_err(anyhow::Error::from)?;
    sink.emit(&[Artifact::new("validation", table, doc)])?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Validation)
    }
}
