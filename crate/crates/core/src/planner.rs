//! End-to-end planning: dual search, candidate harvesting, time sharing, and
//! scoring of plans under the true (radio map) environment.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::dual_solver::{
    ellipsoid_minimize, extract_candidates, CandidateSet, DualState, DualWeights, EllipsoidConfig,
    GainTable, SearchGrid, DEFAULT_TIE_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::robust::{check_durations, worst_case_energy, RobustMode, UncertainReceiver};
use crate::scalar::Scalar;
use crate::scene::{ChannelModel, ChannelParams, Obstacle, Point2, ProbLosParams};
use crate::timeshare_lp::{solve_timeshare, TimeShareProblem, TimeShareSolution};

/// Numerical knobs of the planner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<S> {
    pub grid_resolution: S,
    /// Extra margin around the receivers' uncertainty disks, meters.
    pub grid_pad: S,
    /// Seed for sampled robust evaluation.
    pub seed: u64,
    pub tie_tolerance: S,
    pub max_iters: Option<usize>,
    /// Disk samples per receiver in sampled robust evaluation.
    pub samples: usize,
}

impl<S: Scalar> Default for SolverConfig<S> {
    fn default() -> Self {
        Self {
            grid_resolution: S::lit(0.25),
            grid_pad: S::lit(2.0),
            seed: 0,
            tie_tolerance: S::lit(DEFAULT_TIE_TOLERANCE),
            max_iters: None,
            samples: 4096,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<S> {
    pub receivers: Vec<UncertainReceiver<S>>,
    pub obstacles: Vec<Obstacle<S>>,
    /// UAV altitude, meters.
    pub altitude: S,
    /// Transmit power, watts.
    pub tx_power: S,
    /// Charging duration, seconds.
    pub duration: S,
    pub channel: ChannelParams<S>,
    pub prob_los: ProbLosParams<S>,
    /// Derived from the receivers when absent.
    pub grid: Option<SearchGrid<S>>,
    pub solver: SolverConfig<S>,
}

impl<S: Scalar> Scenario<S> {
    /// Scenario with default channel parameters and solver settings.
    pub fn new(
        receivers: Vec<UncertainReceiver<S>>,
        obstacles: Vec<Obstacle<S>>,
        altitude: S,
        tx_power: S,
        duration: S,
    ) -> Self {
        Self {
            receivers,
            obstacles,
            altitude,
            tx_power,
            duration,
            channel: ChannelParams::default(),
            prob_los: ProbLosParams::default(),
            grid: None,
            solver: SolverConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.receivers.is_empty() {
            return Err(Error::invalid(
                "receivers",
                "at least one receiver required",
            ));
        }
        for (i, r) in self.receivers.iter().enumerate() {
            r.validate(&format!("receivers[{i}]"))?;
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            o.validate(&format!("obstacles[{i}]"))?;
        }
        let positive = |v: S, field: &str| {
            if v > S::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(field, "must be finite and > 0"))
            }
        };
        positive(self.altitude, "altitude")?;
        positive(self.tx_power, "tx_power")?;
        positive(self.duration, "duration")?;
        self.channel.validate("channel")?;
        self.prob_los.validate("prob_los")?;
        if let Some(g) = &self.grid {
            g.validate("grid")?;
        }
        positive(self.solver.grid_resolution, "solver.grid_resolution")?;
        if !(self.solver.grid_pad >= S::zero()) || !self.solver.grid_pad.is_finite() {
            return Err(Error::invalid("solver.grid_pad", "must be finite and >= 0"));
        }
        if !(self.solver.tie_tolerance >= S::zero() && self.solver.tie_tolerance < S::one()) {
            return Err(Error::invalid("solver.tie_tolerance", "must lie in [0, 1)"));
        }
        if self.solver.max_iters == Some(0) {
            return Err(Error::invalid("solver.max_iters", "must be >= 1"));
        }
        if self.solver.samples == 0 {
            return Err(Error::invalid("solver.samples", "must be >= 1"));
        }
        Ok(())
    }

    pub fn search_grid(&self) -> Result<SearchGrid<S>> {
        match self.grid {
            Some(g) => Ok(g),
            None => SearchGrid::around(
                &self.receivers,
                self.solver.grid_pad,
                self.solver.grid_resolution,
            ),
        }
    }

    /// The actual propagation environment: the segmented radio map.
    pub fn true_model(&self) -> ChannelModel<S> {
        ChannelModel::SegmentedRadioMap {
            obstacles: self.obstacles.clone(),
            params: self.channel,
        }
    }

    pub fn model_for(&self, policy: DesignPolicy) -> ChannelModel<S> {
        match policy {
            DesignPolicy::RadioMap => self.true_model(),
            DesignPolicy::AssumeLos => ChannelModel::PureLos {
                alpha0: self.prob_los.alpha0,
                beta0: self.prob_los.beta0,
            },
            DesignPolicy::AssumeProbLos => ChannelModel::ProbabilisticLos(self.prob_los),
        }
    }

    pub fn sampled_mode(&self) -> RobustMode {
        RobustMode::SampledBall {
            samples: self.solver.samples,
            seed: self.solver.seed,
        }
    }

    fn ellipsoid_config(&self) -> EllipsoidConfig {
        EllipsoidConfig {
            max_iters: self.solver.max_iters,
            tie_tolerance: self.solver.tie_tolerance.as_f64(),
            ..EllipsoidConfig::default()
        }
    }

    /// Copy with the two receivers moved symmetrically about their midpoint
    /// so that they are `separation` meters apart.
    pub fn with_separation(&self, separation: S) -> Result<Self> {
        if self.receivers.len() != 2 {
            return Err(Error::invalid(
                "receivers",
                "separation sweeps need exactly two receivers",
            ));
        }
        if !(separation >= S::zero()) || !separation.is_finite() {
            return Err(Error::invalid("separation", "must be finite and >= 0"));
        }
        let (a, b) = (self.receivers[0].approx, self.receivers[1].approx);
        let half = S::lit(0.5);
        let mid = Point2::new((a.x + b.x) * half, (a.y + b.y) * half);
        let len = a.distance(&b);
        let (ux, uy) = if len > S::zero() {
            ((b.x - a.x) / len, (b.y - a.y) / len)
        } else {
            (S::one(), S::zero())
        };
        let off = separation * half;
        let mut out = self.clone();
        out.receivers[0].approx = Point2::new(mid.x - ux * off, mid.y - uy * off);
        out.receivers[1].approx = Point2::new(mid.x + ux * off, mid.y + uy * off);
        Ok(out)
    }

    pub fn with_tx_power(&self, tx_power: S) -> Self {
        Self {
            tx_power,
            ..self.clone()
        }
    }
}

/// Which channel model the planner believes in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DesignPolicy {
    RadioMap,
    AssumeLos,
    AssumeProbLos,
}

impl DesignPolicy {
    pub const ALL: [DesignPolicy; 3] = [
        DesignPolicy::RadioMap,
        DesignPolicy::AssumeLos,
        DesignPolicy::AssumeProbLos,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            DesignPolicy::RadioMap => "radiomap",
            DesignPolicy::AssumeLos => "los",
            DesignPolicy::AssumeProbLos => "plos",
        }
    }
}

impl fmt::Display for DesignPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DesignPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "radiomap" => Ok(DesignPolicy::RadioMap),
            "los" => Ok(DesignPolicy::AssumeLos),
            "plos" => Ok(DesignPolicy::AssumeProbLos),
            other => Err(Error::invalid(
                "policy",
                format!("unknown policy `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stop<S> {
    pub location: Point2<S>,
    /// Seconds.
    pub duration: S,
}

/// Hover locations with durations. Stops are visited in order; travel time
/// is not modelled so any order gives the same energies.
#[derive(Debug, Clone, PartialEq)]
pub struct PositioningPlan<S> {
    pub stops: Vec<Stop<S>>,
    /// Worst-case minimum energy over receivers, joules.
    pub min_energy: S,
    pub per_receiver_energy: Vec<S>,
}

impl<S: Scalar> PositioningPlan<S> {
    pub fn total_duration(&self) -> S {
        self.stops.iter().map(|s| s.duration).sum()
    }

    fn from_timeshare(
        locations: &[Point2<S>],
        power_matrix: &[Vec<S>],
        lp: &TimeShareSolution<S>,
        total: S,
    ) -> Self {
        let floor = total * S::lit(1e-12);
        let kept: Vec<usize> = (0..locations.len())
            .filter(|&g| lp.durations[g] > floor)
            .collect();
        let k = power_matrix[0].len();
        let per_receiver_energy: Vec<S> = (0..k)
            .map(|r| {
                kept.iter()
                    .map(|&g| lp.durations[g] * power_matrix[g][r])
                    .sum()
            })
            .collect();
        let min_energy = per_receiver_energy
            .iter()
            .copied()
            .fold(S::infinity(), S::min);
        Self {
            stops: kept
                .iter()
                .map(|&g| Stop {
                    location: locations[g],
                    duration: lp.durations[g],
                })
                .collect(),
            min_energy,
            per_receiver_energy,
        }
    }
}

/// A plan together with the dual certificate that produced it.
#[derive(Debug, Clone)]
pub struct PlanSolution<S> {
    pub plan: PositioningPlan<S>,
    pub weights: DualWeights<S>,
    /// `T · g(λ*)`, an upper bound on the grid-restricted optimum, joules.
    pub dual_bound: S,
    pub state: DualState<S>,
    pub candidates: CandidateSet<S>,
    pub table: GainTable<S>,
}

impl<S: Scalar> PlanSolution<S> {
    /// `(dual bound − plan energy) / dual bound`.
    pub fn relative_gap(&self) -> S {
        (self.dual_bound - self.plan.min_energy) / self.dual_bound
    }
}

/// Solves the robust max-min problem under the channel model `policy`
/// assumes, returning the certificate alongside the plan.
pub fn solve_p1_detailed<S: Scalar>(
    scenario: &Scenario<S>,
    policy: DesignPolicy,
) -> Result<PlanSolution<S>> {
    scenario.validate()?;
    let model = scenario.model_for(policy);
    let grid = scenario.search_grid()?;
    let table = GainTable::build(
        &model,
        &scenario.receivers,
        scenario.altitude,
        scenario.tx_power,
        grid,
    );
    let state = ellipsoid_minimize(&table, &scenario.ellipsoid_config())?;
    let candidates = extract_candidates(&state, &table, scenario.solver.tie_tolerance);
    let problem = TimeShareProblem::new(candidates.power_matrix.clone(), scenario.duration)?;
    let lp = solve_timeshare(&problem)?;
    let plan = PositioningPlan::from_timeshare(
        &candidates.locations,
        &candidates.power_matrix,
        &lp,
        scenario.duration,
    );
    Ok(PlanSolution {
        plan,
        weights: state.best_weights.clone(),
        dual_bound: scenario.duration * state.best_value,
        state,
        candidates,
        table,
    })
}

pub fn solve_p1<S: Scalar>(
    scenario: &Scenario<S>,
    policy: DesignPolicy,
) -> Result<PositioningPlan<S>> {
    solve_p1_detailed(scenario, policy).map(|s| s.plan)
}

/// Per-receiver worst-case energy of a plan under the true environment.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation<S> {
    pub mode: RobustMode,
    pub per_receiver: Vec<S>,
    pub min_energy: S,
}

pub fn evaluate_plan<S: Scalar>(
    scenario: &Scenario<S>,
    plan: &PositioningPlan<S>,
    mode: RobustMode,
) -> Result<Evaluation<S>> {
    scenario.validate()?;
    check_durations(plan, scenario.duration)?;
    let model = scenario.true_model();
    let per_receiver = scenario
        .receivers
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let mode = match mode {
                RobustMode::ClosedForm => mode,
                RobustMode::SampledBall { samples, seed } => RobustMode::SampledBall {
                    samples,
                    seed: seed.wrapping_add(k as u64),
                },
            };
            worst_case_energy(
                &model,
                plan,
                scenario.duration,
                scenario.altitude,
                r,
                scenario.tx_power,
                mode,
            )
        })
        .collect::<Result<Vec<S>>>()?;
    let min_energy = per_receiver.iter().copied().fold(S::infinity(), S::min);
    Ok(Evaluation {
        mode,
        per_receiver,
        min_energy,
    })
}

/// One policy's plan scored under the true environment.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport<S> {
    pub policy: DesignPolicy,
    pub plan: PositioningPlan<S>,
    /// Minimum energy the policy expects under its own channel model.
    pub planned_energy: S,
    pub achieved_closed: Evaluation<S>,
    pub achieved_sampled: Evaluation<S>,
}

impl<S: Scalar> EvaluationReport<S> {
    pub fn achieved(&self, mode: RobustMode) -> S {
        match mode {
            RobustMode::ClosedForm => self.achieved_closed.min_energy,
            RobustMode::SampledBall { .. } => self.achieved_sampled.min_energy,
        }
    }
}

fn run_policy<S: Scalar>(
    scenario: &Scenario<S>,
    policy: DesignPolicy,
) -> Result<(EvaluationReport<S>, f64)> {
    let start = Instant::now();
    let plan = solve_p1(scenario, policy)?;
    let elapsed = start.elapsed().as_secs_f64();
    let achieved_closed = evaluate_plan(scenario, &plan, RobustMode::ClosedForm)?;
    let achieved_sampled = evaluate_plan(scenario, &plan, scenario.sampled_mode())?;
    Ok((
        EvaluationReport {
            policy,
            planned_energy: plan.min_energy,
            plan,
            achieved_closed,
            achieved_sampled,
        },
        elapsed,
    ))
}

/// Plans with all three policies and scores each under the true radio map.
/// Sorted by achieved (closed-form) energy, best first.
pub fn compare_designs<S: Scalar>(scenario: &Scenario<S>) -> Result<Vec<EvaluationReport<S>>> {
    let mut reports = DesignPolicy::ALL
        .par_iter()
        .map(|&p| run_policy(scenario, p).map(|(r, _)| r))
        .collect::<Result<Vec<_>>>()?;
    reports.sort_by(|a, b| {
        b.achieved_closed
            .min_energy
            .partial_cmp(&a.achieved_closed.min_energy)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.policy.cmp(&b.policy))
    });
    Ok(reports)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Distance between the two receivers, meters.
    Separation,
    /// Transmit power, watts.
    TxPower,
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "separation" => Ok(SweepAxis::Separation),
            "tx_power" | "tx-power" | "power" => Ok(SweepAxis::TxPower),
            other => Err(Error::invalid(
                "axis",
                format!("unknown sweep axis `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<S> {
    pub value: S,
    pub policy: DesignPolicy,
    pub planned_energy: S,
    pub achieved_energy: S,
    pub stop_count: usize,
    pub wall_time_s: f64,
}

/// Runs all three policies at each value of `axis`. Rows come out in value
/// order, then by policy name.
pub fn sweep<S: Scalar>(
    template: &Scenario<S>,
    axis: SweepAxis,
    values: &[S],
    mode: RobustMode,
) -> Result<Vec<SweepRow<S>>> {
    if values.is_empty() {
        return Err(Error::invalid("values", "sweep needs at least one value"));
    }
    let mut rows = Vec::with_capacity(values.len() * 3);
    for &v in values {
        let scenario = match axis {
            SweepAxis::Separation => template.with_separation(v)?,
            SweepAxis::TxPower => template.with_tx_power(v),
        };
        let mut block = DesignPolicy::ALL
            .par_iter()
            .map(|&p| {
                run_policy(&scenario, p).map(|(r, secs)| SweepRow {
                    value: v,
                    policy: p,
                    planned_energy: r.planned_energy,
                    achieved_energy: r.achieved(mode),
                    stop_count: r.plan.stops.len(),
                    wall_time_s: secs,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        block.sort_by(|a, b| a.policy.name().cmp(b.policy.name()));
        rows.extend(block);
    }
    Ok(rows)
}

/// Grid-size guard of the brute-force oracle, points per axis.
pub const ORACLE_MAX_AXIS_POINTS: usize = 20;

fn dominated<S: Scalar>(a: &[S], b: &[S]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// Best plan over every set of at most `max_stops` grid points, each solved
/// to optimality by the time-sharing LP.
///
/// Grid points whose power vector is componentwise dominated by another
/// point's are skipped: swapping a dominated stop for its dominator never
/// lowers the LP value, so the optimum over all subsets is unchanged.
pub fn brute_force_plan_oracle<S: Scalar>(
    scenario: &Scenario<S>,
    policy: DesignPolicy,
    max_stops: usize,
) -> Result<PositioningPlan<S>> {
    scenario.validate()?;
    let grid = scenario.search_grid()?;
    if grid.nx() > ORACLE_MAX_AXIS_POINTS || grid.ny() > ORACLE_MAX_AXIS_POINTS {
        return Err(Error::invalid(
            "grid",
            format!(
                "oracle limited to {0}×{0} grid points",
                ORACLE_MAX_AXIS_POINTS
            ),
        ));
    }
    if !(1..=3).contains(&max_stops) {
        return Err(Error::invalid("max_stops", "must lie in 1..=3"));
    }
    if scenario.receivers.len() > 3 {
        return Err(Error::invalid("receivers", "oracle limited to 3 receivers"));
    }
    let model = scenario.model_for(policy);
    let table = GainTable::build(
        &model,
        &scenario.receivers,
        scenario.altitude,
        scenario.tx_power,
        grid,
    );

    let powers: Vec<Vec<S>> = (0..table.len()).map(|i| table.powers(i)).collect();
    let front: Vec<usize> = (0..powers.len())
        .filter(|&i| {
            !(0..powers.len()).any(|j| {
                j != i && dominated(&powers[i], &powers[j]) && (powers[i] != powers[j] || j < i)
            })
        })
        .collect();

    let mut subsets: Vec<Vec<usize>> = Vec::new();
    for (a, &i) in front.iter().enumerate() {
        subsets.push(vec![i]);
        if max_stops >= 2 {
            for (b, &j) in front.iter().enumerate().skip(a + 1) {
                subsets.push(vec![i, j]);
                if max_stops >= 3 {
                    for &l in &front[b + 1..] {
                        subsets.push(vec![i, j, l]);
                    }
                }
            }
        }
    }

    let solved = subsets
        .par_iter()
        .enumerate()
        .map(|(order, set)| {
            let m: Vec<Vec<S>> = set.iter().map(|&i| powers[i].clone()).collect();
            let lp = solve_timeshare(&TimeShareProblem::new(m, scenario.duration)?)?;
            Ok((order, lp))
        })
        .collect::<Result<Vec<_>>>()?;
    let (order, lp) = solved
        .into_iter()
        .reduce(|a, b| if b.1.energy > a.1.energy { b } else { a })
        .ok_or_else(|| Error::solver("empty candidate front"))?;
    let set = &subsets[order];
    let locations: Vec<Point2<S>> = set.iter().map(|&i| table.points[i]).collect();
    let m: Vec<Vec<S>> = set.iter().map(|&i| powers[i].clone()).collect();
    Ok(PositioningPlan::from_timeshare(
        &locations,
        &m,
        &lp,
        scenario.duration,
    ))
}
