//! Network and scenario data, plus the geometry-to-gain mapping.
//!
//! Gains follow an inverse-square law in planar distance:
//! sensing gain `beta_m = b / |x_s - x_m|^2` and communication gain
//! `alpha_m = a / |x_av - x_m|^2`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{sum, Scalar};

/// Distances below this are clamped before the inverse-square law.
pub const MIN_DISTANCE: f64 = 1e-6;

/// Planar coordinate `[x, y]`.
pub type Point<T> = [T; 2];

/// Per-sensor gains and weights of an `M`-sensor network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams<T> {
    alpha: Vec<T>,
    beta: Vec<T>,
    gamma: Vec<T>,
    r: Vec<T>,
}

impl<T: Scalar> NetworkParams<T> {
    pub fn new(alpha: Vec<T>, beta: Vec<T>, gamma: Vec<T>, r: Vec<T>) -> Result<Self> {
        let m = alpha.len();
        if m == 0 {
            return Err(Error::InvalidParams("network needs at least one sensor".into()));
        }
        for (name, v) in [("beta", &beta), ("gamma", &gamma), ("r", &r)] {
            if v.len() != m {
                return Err(Error::InvalidParams(format!(
                    "{name} has length {}, expected {m}",
                    v.len()
                )));
            }
        }
        for (name, v) in [("alpha", &alpha), ("beta", &beta), ("gamma", &gamma), ("r", &r)] {
            if let Some(i) = v.iter().position(|x| !(x.is_finite() && *x > T::zero())) {
                return Err(Error::InvalidParams(format!(
                    "{name}[{i}] = {} must be finite and positive",
                    v[i]
                )));
            }
        }
        Ok(Self { alpha, beta, gamma, r })
    }

    /// Network with `gamma = r = 1`.
    pub fn with_unit_weights(alpha: Vec<T>, beta: Vec<T>) -> Result<Self> {
        let m = alpha.len();
        Self::new(alpha, beta, vec![T::one(); m], vec![T::one(); m])
    }

    pub fn with_gamma(self, gamma: Vec<T>) -> Result<Self> {
        Self::new(self.alpha, self.beta, gamma, self.r)
    }

    pub fn with_r(self, r: Vec<T>) -> Result<Self> {
        Self::new(self.alpha, self.beta, self.gamma, r)
    }

    /// Number of sensors `M`.
    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn alpha(&self) -> &[T] {
        &self.alpha
    }

    pub fn beta(&self) -> &[T] {
        &self.beta
    }

    pub fn gamma(&self) -> &[T] {
        &self.gamma
    }

    pub fn r(&self) -> &[T] {
        &self.r
    }

    /// `sum_m beta_m^2`.
    pub fn sensing_energy(&self) -> T {
        sum(self.beta.iter().map(|&b| b * b))
    }

    pub fn has_unit_gamma(&self) -> bool {
        self.gamma.iter().all(|&g| g == T::one())
    }

    /// Per-sensor cost of unit effective channel amplitude,
    /// `w_m = r_m (1 + beta_m^2) / alpha_m^2`.
    pub(crate) fn power_cost(&self, m: usize) -> T {
        let (a, b) = (self.alpha[m], self.beta[m]);
        self.r[m] * (T::one() + b * b) / (a * a)
    }

    /// Reorders sensors so that sensor `i` of the result is sensor `perm[i]` here.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let pick = |v: &[T]| perm.iter().map(|&i| v[i]).collect::<Vec<_>>();
        Self::new(pick(&self.alpha), pick(&self.beta), pick(&self.gamma), pick(&self.r))
    }
}

/// Per-sensor transmit powers together with the weighted total `sum r_m p_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation<T> {
    p: Vec<T>,
    weighted_total: T,
}

impl<T: Scalar> PowerAllocation<T> {
    pub fn new(p: Vec<T>, r: &[T]) -> Result<Self> {
        if p.len() != r.len() {
            return Err(Error::InvalidParams(format!(
                "power vector has length {}, expected {}",
                p.len(),
                r.len()
            )));
        }
        if let Some(i) = p.iter().position(|x| !(x.is_finite() && *x >= T::zero())) {
            return Err(Error::InvalidParams(format!("power p[{i}] = {} is negative", p[i])));
        }
        let weighted_total = sum(p.iter().zip(r).map(|(&p, &r)| p * r));
        Ok(Self { p, weighted_total })
    }

    /// Same power `per_sensor` on every sensor of `params`.
    pub fn uniform(params: &NetworkParams<T>, per_sensor: T) -> Result<Self> {
        Self::new(vec![per_sensor; params.len()], params.r())
    }

    /// Splits `total` evenly in weighted terms: `p_m = total / sum r`.
    pub fn uniform_budget(params: &NetworkParams<T>, total: T) -> Result<Self> {
        let per = total / sum(params.r().iter().copied());
        Self::uniform(params, per)
    }

    pub fn zeros(params: &NetworkParams<T>) -> Self {
        Self {
            p: vec![T::zero(); params.len()],
            weighted_total: T::zero(),
        }
    }

    pub fn p(&self) -> &[T] {
        &self.p
    }

    pub fn weighted_total(&self) -> T {
        self.weighted_total
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn within_budget(&self, budget: T) -> bool {
        self.weighted_total <= budget + T::tol(1e-9) * budget.max(T::one())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    /// Source reconstruction: MSE of the hidden source.
    Sr,
    /// Field reconstruction: weighted MSE of the sensor observations.
    Fr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PowerMode {
    Fixed,
    Optimized,
}

/// How the field-reconstruction lower bound inverts the rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrLowerMode {
    /// Closed form that assumes every eigen-component is coded.
    HighRate,
    /// Reverse water-filling at the achievable rate.
    #[default]
    Exact,
}

/// Selects one of the eight bound families (plus the field lower-bound mode).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MetricSpec {
    pub objective: Objective,
    pub bound: Bound,
    pub power: PowerMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fr_lower_mode: Option<FrLowerMode>,
}

impl MetricSpec {
    pub fn new(objective: Objective, bound: Bound, power: PowerMode) -> Self {
        let fr_lower_mode = (objective == Objective::Fr && bound == Bound::Lower)
            .then_some(FrLowerMode::default());
        Self {
            objective,
            bound,
            power,
            fr_lower_mode,
        }
    }

    /// Overrides the field lower-bound mode; ignored for other families.
    pub fn with_fr_lower_mode(mut self, mode: FrLowerMode) -> Self {
        if self.fr_lower_mode.is_some() {
            self.fr_lower_mode = Some(mode);
        }
        self
    }

    /// All eight families in a fixed order, field lower bounds in default mode.
    pub fn all() -> Vec<Self> {
        let mut out = Vec::with_capacity(8);
        for power in [PowerMode::Fixed, PowerMode::Optimized] {
            for objective in [Objective::Sr, Objective::Fr] {
                for bound in [Bound::Upper, Bound::Lower] {
                    out.push(Self::new(objective, bound, power));
                }
            }
        }
        out
    }

    pub fn is_well_formed(&self) -> bool {
        let fr_lower = self.objective == Objective::Fr && self.bound == Bound::Lower;
        fr_lower == self.fr_lower_mode.is_some()
    }
}

impl fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let o = match self.objective {
            Objective::Sr => "sr",
            Objective::Fr => "fr",
        };
        let b = match self.bound {
            Bound::Upper => "upper",
            Bound::Lower => "lower",
        };
        let p = match self.power {
            PowerMode::Fixed => "fixed",
            PowerMode::Optimized => "opt",
        };
        write!(f, "{o}-{b}-{p}")?;
        if self.fr_lower_mode == Some(FrLowerMode::HighRate) {
            write!(f, ":highrate")?;
        }
        Ok(())
    }
}

impl FromStr for MetricSpec {
    type Err = Error;

    /// Parses names such as `sr-upper-fixed`, `fr-lower-opt` or
    /// `fr-lower-fixed:highrate`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unknown metric spec `{s}`"));
        let lower = s.to_ascii_lowercase();
        let (name, mode) = match lower.split_once(':') {
            Some((n, m)) => (n.to_string(), Some(m.to_string())),
            None => (lower, None),
        };
        let parts: Vec<&str> = name.split('-').collect();
        let [o, b, p] = parts.as_slice() else {
            return Err(bad());
        };
        let objective = match *o {
            "sr" => Objective::Sr,
            "fr" => Objective::Fr,
            _ => return Err(bad()),
        };
        let bound = match *b {
            "upper" => Bound::Upper,
            "lower" => Bound::Lower,
            _ => return Err(bad()),
        };
        let power = match *p {
            "fixed" => PowerMode::Fixed,
            "opt" | "optimized" => PowerMode::Optimized,
            _ => return Err(bad()),
        };
        let spec = Self::new(objective, bound, power);
        match mode.as_deref() {
            None => Ok(spec),
            Some(m) if spec.fr_lower_mode.is_none() => {
                Err(Error::Parse(format!("mode `{m}` only applies to fr-lower specs")))
            }
            Some("highrate") => Ok(spec.with_fr_lower_mode(FrLowerMode::HighRate)),
            Some("exact") => Ok(spec.with_fr_lower_mode(FrLowerMode::Exact)),
            Some(_) => Err(bad()),
        }
    }
}

/// Rectangular planner grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec<T> {
    pub x_min: T,
    pub x_max: T,
    pub y_min: T,
    pub y_max: T,
    pub step: T,
}

impl<T: Scalar> Default for GridSpec<T> {
    fn default() -> Self {
        Self {
            x_min: T::lit(-1.5),
            x_max: T::lit(2.0),
            y_min: T::lit(-1.5),
            y_max: T::lit(1.5),
            step: T::lit(0.01),
        }
    }
}

impl<T: Scalar> GridSpec<T> {
    pub fn contains(&self, p: Point<T>) -> bool {
        let slack = self.step * T::lit(1e-6);
        p[0] >= self.x_min - slack
            && p[0] <= self.x_max + slack
            && p[1] >= self.y_min - slack
            && p[1] <= self.y_max + slack
    }
}

fn default_source<T: Scalar>() -> Point<T> {
    [T::lit(1.5), T::zero()]
}

fn default_av_start<T: Scalar>() -> Point<T> {
    [T::lit(-1.0), T::zero()]
}

/// Geometry, propagation constants and power budget of one experiment.
///
/// Serialized as the scenario file format; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Scalar"))]
pub struct Scenario<T> {
    /// Identifier carried into path results and manifests.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default = "default_source")]
    pub source_pos: Point<T>,
    #[serde(rename = "sensors")]
    pub sensor_pos: Vec<Point<T>>,
    #[serde(default = "default_av_start")]
    pub av_start: Point<T>,
    /// Communication propagation constant.
    pub a: T,
    /// Sensing propagation constant.
    pub b: T,
    #[serde(default)]
    pub grid: GridSpec<T>,
    #[serde(rename = "powers", default, skip_serializing_if = "Option::is_none")]
    pub per_sensor_power: Option<Vec<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_power: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A violated scenario invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Diagnostic {
    EmptyNetwork,
    LengthMismatch {
        field: &'static str,
        expected: usize,
        got: usize,
    },
    ConstantNonPositive {
        name: &'static str,
    },
    WeightNonPositive {
        field: &'static str,
        index: usize,
    },
    NonFinite {
        field: &'static str,
    },
    StepNonPositive,
    GridEmpty,
    StartOutsideGrid,
    PowerNegative {
        index: usize,
    },
    TotalPowerNonPositive,
    PowerSpecMissing,
    PowerSpecConflict,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptyNetwork => write!(f, "EmptyNetwork: scenario has no sensors"),
            Self::LengthMismatch { field, expected, got } => {
                write!(f, "LengthMismatch: {field} has {got} entries, expected {expected}")
            }
            Self::ConstantNonPositive { name } => {
                write!(f, "ConstantNonPositive: {name} must be > 0")
            }
            Self::WeightNonPositive { field, index } => {
                write!(f, "WeightNonPositive: {field}[{index}] must be > 0")
            }
            Self::NonFinite { field } => write!(f, "NonFinite: {field} contains a non-finite value"),
            Self::StepNonPositive => write!(f, "StepNonPositive: grid step must be > 0"),
            Self::GridEmpty => write!(f, "GridEmpty: grid minimum exceeds maximum"),
            Self::StartOutsideGrid => write!(f, "StartOutsideGrid: av_start lies outside the grid"),
            Self::PowerNegative { index } => write!(f, "PowerNegative: powers[{index}] < 0"),
            Self::TotalPowerNonPositive => {
                write!(f, "TotalPowerNonPositive: total_power must be > 0")
            }
            Self::PowerSpecMissing => {
                write!(f, "PowerSpecMissing: give either powers or total_power")
            }
            Self::PowerSpecConflict => {
                write!(f, "PowerSpecConflict: give only one of powers and total_power")
            }
        }
    }
}

impl<T: Scalar> Scenario<T> {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("scenario: {e}")))
    }

    /// Parses and rejects scenarios with any diagnostic.
    pub fn from_json_validated(text: &str) -> Result<Self> {
        let s = Self::from_json(text)?;
        s.ensure_valid()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let d = validate_scenario(self);
        if d.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidScenario(d))
        }
    }

    pub fn len(&self) -> usize {
        self.sensor_pos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sensor_pos.is_empty()
    }

    pub fn gamma(&self) -> Vec<T> {
        self.gamma.clone().unwrap_or_else(|| vec![T::one(); self.len()])
    }

    pub fn r(&self) -> Vec<T> {
        self.r.clone().unwrap_or_else(|| vec![T::one(); self.len()])
    }

    /// Fixed per-sensor powers; a scenario that only gives `total_power`
    /// gets the uniform weighted split.
    pub fn fixed_powers(&self) -> Result<PowerAllocation<T>> {
        let r = self.r();
        match (&self.per_sensor_power, self.total_power) {
            (Some(p), _) => PowerAllocation::new(p.clone(), &r),
            (None, Some(total)) => {
                let per = total / sum(r.iter().copied());
                PowerAllocation::new(vec![per; self.len()], &r)
            }
            (None, None) => Err(Error::MissingPower("fixed")),
        }
    }

    /// Weighted sum-power budget; a scenario that only gives per-sensor
    /// powers gets `sum r_m P_m`.
    pub fn budget(&self) -> Result<T> {
        match (self.total_power, &self.per_sensor_power) {
            (Some(t), _) => Ok(t),
            (None, Some(_)) => Ok(self.fixed_powers()?.weighted_total()),
            (None, None) => Err(Error::MissingPower("total")),
        }
    }

    /// Mirror image across the x-axis.
    pub fn reflected_x(&self) -> Self {
        let flip = |p: Point<T>| [p[0], -p[1]];
        let mut s = self.clone();
        s.source_pos = flip(s.source_pos);
        s.av_start = flip(s.av_start);
        s.sensor_pos = s.sensor_pos.iter().map(|&p| flip(p)).collect();
        s.grid.y_min = -self.grid.y_max;
        s.grid.y_max = -self.grid.y_min;
        s
    }

    /// Every coordinate (and the grid) multiplied by `k`.
    pub fn scaled(&self, k: T) -> Self {
        let sc = |p: Point<T>| [p[0] * k, p[1] * k];
        let mut s = self.clone();
        s.source_pos = sc(s.source_pos);
        s.av_start = sc(s.av_start);
        s.sensor_pos = s.sensor_pos.iter().map(|&p| sc(p)).collect();
        s.grid = GridSpec {
            x_min: self.grid.x_min * k,
            x_max: self.grid.x_max * k,
            y_min: self.grid.y_min * k,
            y_max: self.grid.y_max * k,
            step: self.grid.step * k,
        };
        s
    }
}

/// Checks every scenario invariant; an empty list means the scenario is usable.
pub fn validate_scenario<T: Scalar>(s: &Scenario<T>) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let m = s.len();
    if m == 0 {
        out.push(Diagnostic::EmptyNetwork);
    }
    let finite_pt = |p: &Point<T>| p[0].is_finite() && p[1].is_finite();
    if !finite_pt(&s.source_pos) || !finite_pt(&s.av_start) || !s.sensor_pos.iter().all(finite_pt) {
        out.push(Diagnostic::NonFinite { field: "positions" });
    }
    for (name, v) in [("a", s.a), ("b", s.b)] {
        if !v.is_finite() {
            out.push(Diagnostic::NonFinite { field: name });
        } else if v <= T::zero() {
            out.push(Diagnostic::ConstantNonPositive { name });
        }
    }
    for (field, v) in [("gamma", &s.gamma), ("r", &s.r)] {
        if let Some(v) = v {
            if v.len() != m {
                out.push(Diagnostic::LengthMismatch {
                    field,
                    expected: m,
                    got: v.len(),
                });
            }
            for (index, x) in v.iter().enumerate() {
                if !(x.is_finite() && *x > T::zero()) {
                    out.push(Diagnostic::WeightNonPositive { field, index });
                }
            }
        }
    }
    let g = &s.grid;
    if !(g.step.is_finite() && g.step > T::zero()) {
        out.push(Diagnostic::StepNonPositive);
    }
    if !(g.x_min <= g.x_max && g.y_min <= g.y_max) {
        out.push(Diagnostic::GridEmpty);
    } else if !g.contains(s.av_start) {
        out.push(Diagnostic::StartOutsideGrid);
    }
    match (&s.per_sensor_power, s.total_power) {
        (Some(_), Some(_)) => out.push(Diagnostic::PowerSpecConflict),
        (None, None) => out.push(Diagnostic::PowerSpecMissing),
        (Some(p), None) => {
            if p.len() != m {
                out.push(Diagnostic::LengthMismatch {
                    field: "powers",
                    expected: m,
                    got: p.len(),
                });
            }
            for (index, x) in p.iter().enumerate() {
                if !(x.is_finite() && *x >= T::zero()) {
                    out.push(Diagnostic::PowerNegative { index });
                }
            }
        }
        (None, Some(t)) => {
            if !(t.is_finite() && t > T::zero()) {
                out.push(Diagnostic::TotalPowerNonPositive);
            }
        }
    }
    out
}

/// Which link a clamped distance belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    Sensing,
    Communication,
}

/// Warning that a distance was clamped to [`MIN_DISTANCE`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceDegenerate {
    pub sensor: usize,
    pub link: Link,
    pub distance: f64,
}

fn inverse_square<T: Scalar>(k: T, from: Point<T>, to: Point<T>) -> (T, Option<T>) {
    let (dx, dy) = (from[0] - to[0], from[1] - to[1]);
    let d2 = dx * dx + dy * dy;
    let floor = T::lit(MIN_DISTANCE);
    if d2 < floor * floor {
        (k / (floor * floor), Some(d2.sqrt()))
    } else {
        (k / d2, None)
    }
}

/// Gains of `scenario` seen from an AV at `av_pos`.
///
/// The scenario is assumed valid. Distances below [`MIN_DISTANCE`] are
/// clamped and reported alongside the result.
pub fn build_network_params<T: Scalar>(
    scenario: &Scenario<T>,
    av_pos: Point<T>,
) -> Result<(NetworkParams<T>, Vec<DistanceDegenerate>)> {
    let mut warnings = Vec::new();
    let mut alpha = Vec::with_capacity(scenario.len());
    let mut beta = Vec::with_capacity(scenario.len());
    for (m, &x_m) in scenario.sensor_pos.iter().enumerate() {
        let (b, clamped) = inverse_square(scenario.b, scenario.source_pos, x_m);
        if let Some(d) = clamped {
            warnings.push(DistanceDegenerate {
                sensor: m,
                link: Link::Sensing,
                distance: d.as_f64(),
            });
        }
        let (a, clamped) = inverse_square(scenario.a, av_pos, x_m);
        if let Some(d) = clamped {
            warnings.push(DistanceDegenerate {
                sensor: m,
                link: Link::Communication,
                distance: d.as_f64(),
            });
        }
        alpha.push(a);
        beta.push(b);
    }
    let params = NetworkParams::new(alpha, beta, scenario.gamma(), scenario.r())?;
    Ok((params, warnings))
}
