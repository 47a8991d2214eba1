//! Greedy grid path planning for the data collector.
//!
//! Positions live on the lattice `av_start + step * (i, j)`. At every step
//! the cost is evaluated at the current point and its four neighbours that
//! lie inside the grid, and the first candidate in the order
//! stay, +x, -x, +y, -y whose cost is within a relative `1e-12` of the
//! minimum wins. Channel gains to the collector are recomputed at every
//! candidate; sensing gains never change.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::{evaluate, mutual_info_bits, PowerInput};
use crate::model::{build_network_params, MetricSpec, NetworkParams, Point, PowerAllocation, PowerMode, Scenario};
use crate::scalar::Scalar;

/// Relative tolerance under which two candidate costs count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Move {
    #[serde(rename = "stay")]
    Stay,
    #[serde(rename = "+x")]
    PlusX,
    #[serde(rename = "-x")]
    MinusX,
    #[serde(rename = "+y")]
    PlusY,
    #[serde(rename = "-y")]
    MinusY,
}

impl Move {
    /// Evaluation and tie-breaking order.
    pub const ORDER: [Move; 5] = [Move::Stay, Move::PlusX, Move::MinusX, Move::PlusY, Move::MinusY];

    pub fn offset(self) -> (i64, i64) {
        match self {
            Move::Stay => (0, 0),
            Move::PlusX => (1, 0),
            Move::MinusX => (-1, 0),
            Move::PlusY => (0, 1),
            Move::MinusY => (0, -1),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Move::Stay => "stay",
            Move::PlusX => "+x",
            Move::MinusX => "-x",
            Move::PlusY => "+y",
            Move::MinusY => "-y",
        }
    }

    /// The move seen in a mirror across the x-axis.
    pub fn reflected_x(self) -> Self {
        match self {
            Move::PlusY => Move::MinusY,
            Move::MinusY => Move::PlusY,
            m => m,
        }
    }
}

impl std::fmt::Display for Move {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Candidate<T> {
    pub mv: Move,
    pub pos: Point<T>,
    pub cost: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum PathEvent<T> {
    /// Several candidates were within tolerance of the minimum at `step`;
    /// `moves[0]` was taken.
    Tie { step: usize, moves: Vec<Move> },
    /// Staying was optimal at `step`; the path remains at `pos`.
    StallAt { step: usize, pos: Point<T> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathResult<T> {
    /// `steps + 1` positions starting at the scenario's start point.
    pub positions: Vec<Point<T>>,
    /// Cost at each position.
    pub costs: Vec<T>,
    /// Move that led to each position after the first.
    pub moves: Vec<Move>,
    /// Metric behind the costs; `None` for custom cost functions.
    pub spec: Option<MetricSpec>,
    pub label: String,
    pub scenario_id: String,
    pub events: Vec<PathEvent<T>>,
}

impl<T: Scalar> PathResult<T> {
    pub fn final_position(&self) -> Point<T> {
        *self.positions.last().expect("paths hold at least the start")
    }

    pub fn ties(&self) -> impl Iterator<Item = (usize, &[Move])> {
        self.events.iter().filter_map(|e| match e {
            PathEvent::Tie { step, moves } => Some((*step, moves.as_slice())),
            _ => None,
        })
    }

    /// Index of the first step with a tie, if any.
    pub fn first_tie(&self) -> Option<usize> {
        self.ties().map(|(s, _)| s).next()
    }
}

/// Euclidean distance.
pub fn distance<T: Scalar>(a: Point<T>, b: Point<T>) -> T {
    let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
    (dx * dx + dy * dy).sqrt()
}

/// Index of the sensor nearest to `pos` (first on exact ties).
pub fn nearest_sensor<T: Scalar>(scenario: &Scenario<T>, pos: Point<T>) -> usize {
    let d: Vec<T> = scenario.sensor_pos.iter().map(|&x| distance(pos, x)).collect();
    (0..d.len()).fold(0, |best, i| if d[i] < d[best] { i } else { best })
}

fn tied<T: Scalar>(a: T, b: T) -> bool {
    let scale = a.abs().max(b.abs()).max(T::one());
    (a - b).abs() <= T::tol(TIE_TOLERANCE) * scale
}

/// Cost of a metric at a collector position, with powers fixed by the
/// scenario.
struct MetricCost<T> {
    spec: MetricSpec,
    fixed: Option<PowerAllocation<T>>,
    budget: Option<T>,
}

impl<T: Scalar> MetricCost<T> {
    fn new(scenario: &Scenario<T>, spec: MetricSpec) -> Result<Self> {
        if !spec.is_well_formed() {
            return Err(Error::InvalidParams(format!("ill-formed metric {spec}")));
        }
        Ok(match spec.power {
            PowerMode::Fixed => Self {
                spec,
                fixed: Some(scenario.fixed_powers()?),
                budget: None,
            },
            PowerMode::Optimized => Self {
                spec,
                fixed: None,
                budget: Some(scenario.budget()?),
            },
        })
    }

    fn cost(&self, params: &NetworkParams<T>) -> Result<T> {
        let input = match (&self.fixed, self.budget) {
            (Some(p), _) => PowerInput::Fixed(p),
            (None, Some(t)) => PowerInput::Budget(t),
            (None, None) => unreachable!("one power form is always set"),
        };
        Ok(evaluate(&self.spec, params, input)?.distortion)
    }
}

struct Lattice<T> {
    origin: Point<T>,
    step: T,
}

impl<T: Scalar> Lattice<T> {
    fn point(&self, (i, j): (i64, i64)) -> Point<T> {
        let f = |k: i64| T::from_i64(k).expect("lattice index fits");
        [self.origin[0] + f(i) * self.step, self.origin[1] + f(j) * self.step]
    }
}

fn evaluate_candidates<T, F>(scenario: &Scenario<T>, points: Vec<(Move, Point<T>)>, cost_fn: &F) -> Result<Vec<Candidate<T>>>
where
    T: Scalar,
    F: Fn(&NetworkParams<T>) -> Result<T>,
{
    points
        .into_iter()
        .filter(|(_, p)| scenario.grid.contains(*p))
        .map(|(mv, pos)| {
            let (params, _) = build_network_params(scenario, pos)?;
            Ok(Candidate {
                mv,
                pos,
                cost: cost_fn(&params)?,
            })
        })
        .collect()
}

/// Costs of staying at `pos` and of each in-grid neighbour one grid step away.
pub fn candidate_costs<T: Scalar>(scenario: &Scenario<T>, spec: MetricSpec, pos: Point<T>) -> Result<Vec<Candidate<T>>> {
    let metric = MetricCost::new(scenario, spec)?;
    let step = scenario.grid.step;
    let points = Move::ORDER
        .iter()
        .map(|&mv| {
            let (dx, dy) = mv.offset();
            let f = |k: i64| T::from_i64(k).expect("small offset");
            (mv, [pos[0] + f(dx) * step, pos[1] + f(dy) * step])
        })
        .collect();
    evaluate_candidates(scenario, points, &|p: &NetworkParams<T>| metric.cost(p))
}

/// Greedy path with an arbitrary cost of the network seen from the collector.
pub fn greedy_plan_by<T, F>(scenario: &Scenario<T>, steps: usize, label: &str, cost_fn: F) -> Result<PathResult<T>>
where
    T: Scalar,
    F: Fn(&NetworkParams<T>) -> Result<T>,
{
    scenario.ensure_valid()?;
    let lattice = Lattice {
        origin: scenario.av_start,
        step: scenario.grid.step,
    };
    let mut at = (0i64, 0i64);
    let (start_params, _) = build_network_params(scenario, scenario.av_start)?;
    let mut result = PathResult {
        positions: vec![scenario.av_start],
        costs: vec![cost_fn(&start_params)?],
        moves: Vec::with_capacity(steps),
        spec: None,
        label: label.to_string(),
        scenario_id: scenario.name.clone().unwrap_or_else(|| "unnamed".into()),
        events: Vec::new(),
    };
    let mut stalled = false;
    for step in 1..=steps {
        if stalled {
            result.positions.push(result.final_position());
            result.costs.push(*result.costs.last().expect("non-empty"));
            result.moves.push(Move::Stay);
            continue;
        }
        let points = Move::ORDER
            .iter()
            .map(|&mv| {
                let (dx, dy) = mv.offset();
                (mv, lattice.point((at.0 + dx, at.1 + dy)))
            })
            .collect();
        let cands = evaluate_candidates(scenario, points, &cost_fn)?;
        let min = cands.iter().map(|c| c.cost).fold(T::infinity(), T::min);
        let near: Vec<&Candidate<T>> = cands.iter().filter(|c| c.cost <= min || tied(c.cost, min)).collect();
        let chosen = *near[0];
        if near.len() > 1 {
            result.events.push(PathEvent::Tie {
                step,
                moves: near.iter().map(|c| c.mv).collect(),
            });
        }
        if chosen.mv == Move::Stay {
            stalled = true;
            result.events.push(PathEvent::StallAt { step, pos: chosen.pos });
        }
        let (dx, dy) = chosen.mv.offset();
        at = (at.0 + dx, at.1 + dy);
        result.positions.push(chosen.pos);
        result.costs.push(chosen.cost);
        result.moves.push(chosen.mv);
    }
    Ok(result)
}

/// Greedy path that minimises the bound selected by `spec`.
///
/// Fixed-power metrics use the scenario's per-sensor powers; optimised
/// metrics re-solve the allocation at every candidate under the scenario
/// budget.
pub fn greedy_plan<T: Scalar>(scenario: &Scenario<T>, spec: MetricSpec, steps: usize) -> Result<PathResult<T>> {
    let metric = MetricCost::new(scenario, spec)?;
    let mut path = greedy_plan_by(scenario, steps, &spec.to_string(), |p| metric.cost(p))?;
    path.spec = Some(spec);
    Ok(path)
}

/// Greedy path maximising the rate `-1/2 log2 D` of the bound in `spec`.
pub fn greedy_plan_mutual_info<T: Scalar>(scenario: &Scenario<T>, spec: MetricSpec, steps: usize) -> Result<PathResult<T>> {
    let metric = MetricCost::new(scenario, spec)?;
    greedy_plan_by(scenario, steps, &format!("mi:{spec}"), |p| {
        Ok(-mutual_info_bits(metric.cost(p)?)?)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSummary<T> {
    pub label: String,
    pub final_position: Point<T>,
    /// Distance from the final position to each sensor.
    pub sensor_distances: Vec<T>,
    pub nearest_sensor: usize,
    pub final_cost: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathComparison<T> {
    pub paths: Vec<PathResult<T>>,
    pub summaries: Vec<PathSummary<T>>,
    /// First position index at which any two paths differ.
    pub first_divergence: Option<usize>,
}

/// Runs [`greedy_plan`] for every spec and summarises where the paths part
/// and where they end.
pub fn compare_paths<T: Scalar>(scenario: &Scenario<T>, specs: &[MetricSpec], steps: usize) -> Result<PathComparison<T>> {
    if specs.len() < 2 {
        return Err(Error::InvalidParams("comparing paths needs at least two metrics".into()));
    }
    let paths: Vec<PathResult<T>> = specs
        .par_iter()
        .map(|&s| greedy_plan(scenario, s, steps))
        .collect::<Result<_>>()?;
    let first_divergence = (0..=steps).find(|&k| paths.iter().any(|p| p.positions[k] != paths[0].positions[k]));
    let summaries = paths
        .iter()
        .map(|p| {
            let end = p.final_position();
            PathSummary {
                label: p.label.clone(),
                final_position: end,
                sensor_distances: scenario.sensor_pos.iter().map(|&x| distance(end, x)).collect(),
                nearest_sensor: nearest_sensor(scenario, end),
                final_cost: *p.costs.last().expect("non-empty"),
            }
        })
        .collect();
    Ok(PathComparison {
        paths,
        summaries,
        first_divergence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Bound, GridSpec, Objective};

    fn symmetric() -> Scenario<f64> {
        Scenario {
            name: Some("sym".into()),
            source_pos: [1.5, 0.0],
            sensor_pos: vec![[0.5, 0.8], [0.0, 0.0], [0.5, -0.8]],
            av_start: [-1.0, 0.0],
            a: 1.0,
            b: 10.0,
            grid: GridSpec::default(),
            per_sensor_power: Some(vec![10.0; 3]),
            total_power: None,
            gamma: None,
            r: None,
            seed: None,
        }
    }

    fn sr_upper_fixed() -> MetricSpec {
        MetricSpec::new(Objective::Sr, Bound::Upper, PowerMode::Fixed)
    }

    #[test]
    fn mirror_candidates_on_axis() {
        let c = candidate_costs(&symmetric(), sr_upper_fixed(), [-1.0, 0.0]).unwrap();
        assert_eq!(c.len(), 5);
        let py = c.iter().find(|c| c.mv == Move::PlusY).unwrap().cost;
        let my = c.iter().find(|c| c.mv == Move::MinusY).unwrap().cost;
        assert!((py - my).abs() < 1e-12);
    }

    #[test]
    fn corner_has_three_candidates() {
        let s = symmetric();
        let c = candidate_costs(&s, sr_upper_fixed(), [s.grid.x_max, s.grid.y_min]).unwrap();
        let moves: Vec<Move> = c.iter().map(|c| c.mv).collect();
        assert_eq!(moves, vec![Move::Stay, Move::MinusX, Move::PlusY]);
    }

    #[test]
    fn zero_power_costs_are_flat() {
        let s = Scenario {
            per_sensor_power: Some(vec![0.0; 3]),
            ..symmetric()
        };
        for c in candidate_costs(&s, sr_upper_fixed(), [0.3, 0.2]).unwrap() {
            assert_eq!(c.cost, 1.0);
        }
        let path = greedy_plan(&s, sr_upper_fixed(), 5).unwrap();
        assert!(path.positions.iter().all(|&p| p == s.av_start));
        assert!(matches!(path.events.last(), Some(PathEvent::StallAt { step: 1, .. })));
    }

    #[test]
    fn zero_steps_is_just_the_start() {
        let s = symmetric();
        let path = greedy_plan(&s, sr_upper_fixed(), 0).unwrap();
        assert_eq!(path.positions, vec![s.av_start]);
        assert_eq!(path.costs.len(), 1);
    }

    #[test]
    fn path_moves_one_step_at_a_time() {
        let s = symmetric();
        for spec in MetricSpec::all() {
            let path = greedy_plan(&s, spec, 30).unwrap();
            assert_eq!(path.positions.len(), 31);
            for w in path.costs.windows(2) {
                assert!(w[1] <= w[0]);
            }
            for w in path.positions.windows(2) {
                let d = distance(w[0], w[1]);
                assert!(d == 0.0 || (d - s.grid.step).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn compare_identical_specs() {
        let s = symmetric();
        let spec = sr_upper_fixed();
        let cmp = compare_paths(&s, &[spec, spec], 10).unwrap();
        assert_eq!(cmp.first_divergence, None);
        assert!(compare_paths(&s, &[spec], 10).is_err());
    }
}
