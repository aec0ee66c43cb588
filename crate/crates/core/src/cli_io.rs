//! Scenario and plan documents (TOML), results and trace tables (CSV).
//!
//! Scenario document, version 1:
//!
//! ```toml
//! version = 1
//! altitude = 5.0        # m
//! tx_power = 10.0       # W
//! duration = 60.0       # s
//!
//! [[receivers]]
//! x = -2.0
//! y = 0.0
//! epsilon = 1.0
//!
//! [[obstacles]]         # zero or more boxes standing on the ground
//! x_min = -0.5
//! x_max = 0.5
//! y_min = -1.0
//! y_max = 1.0
//! height = 4.5
//!
//! [channel]             # optional, radio map LoS/NLoS parameters
//! alpha_los = 2.3
//! beta_los = 0.001
//! alpha_nlos = 4.0
//! beta_nlos = 0.0001
//!
//! [prob_los]            # optional, benchmark model parameters
//! alpha0 = 2.0
//! beta0 = 0.001
//! a = 10.0
//! b = 0.6
//! eta = 0.1
//!
//! [grid]                # optional, explicit search rectangle
//! x_lo = -5.0
//! x_hi = 5.0
//! y_lo = -4.0
//! y_hi = 4.0
//! resolution = 0.25
//!
//! [solver]              # optional, every field optional
//! grid_resolution = 0.25
//! grid_pad = 2.0
//! seed = 0
//! tie_tolerance = 1e-6
//! max_iters = 1600
//! samples = 4096
//! ```
//!
//! Results table columns: `sweep_value,policy,planned_energy_J,
//! achieved_energy_J,stop_count,wall_time_s`. Trace columns:
//! `iteration,lambda_1..lambda_K,dual_value_W,x,y`. Reals are written with
//! nine significant digits.

use serde::{Deserialize, Serialize};

use crate::dual_solver::{SearchGrid, TraceRow};
use crate::error::{Error, Result};
use crate::planner::{
    Evaluation, EvaluationReport, PositioningPlan, Scenario, SolverConfig, Stop, SweepRow,
};
use crate::robust::{RobustMode, UncertainReceiver};
use crate::scene::{ChannelParams, Obstacle, Point2, ProbLosParams};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReceiverDoc {
    x: f64,
    y: f64,
    epsilon: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObstacleDoc {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    height: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelDoc {
    alpha_los: f64,
    beta_los: f64,
    alpha_nlos: f64,
    beta_nlos: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProbLosDoc {
    alpha0: f64,
    beta0: f64,
    a: f64,
    b: f64,
    eta: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridDoc {
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
    resolution: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    grid_resolution: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid_pad: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tie_tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    version: u32,
    altitude: f64,
    tx_power: f64,
    duration: f64,
    receivers: Vec<ReceiverDoc>,
    #[serde(default)]
    obstacles: Vec<ObstacleDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    channel: Option<ChannelDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    prob_los: Option<ProbLosDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<GridDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    solver: Option<SolverDoc>,
}

fn check_version(v: u32) -> Result<()> {
    if v != FORMAT_VERSION {
        return Err(Error::invalid(
            "version",
            format!("unsupported document version {v}, expected {FORMAT_VERSION}"),
        ));
    }
    Ok(())
}

fn from_toml<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::Parse(e.to_string().trim_end().to_string()))
}

fn to_toml<T: Serialize>(doc: &T) -> String {
    toml::to_string(doc).expect("document types always serialize")
}

/// Parses and validates a scenario document. Absent optional blocks take
/// their defaults.
pub fn parse_scenario(text: &str) -> Result<Scenario<f64>> {
    let doc: ScenarioDoc = from_toml(text)?;
    check_version(doc.version)?;
    let defaults = SolverConfig::<f64>::default();
    let solver = doc.solver.unwrap_or_default();
    let scenario = Scenario {
        receivers: doc
            .receivers
            .iter()
            .map(|r| UncertainReceiver {
                approx: Point2::new(r.x, r.y),
                epsilon: r.epsilon,
            })
            .collect(),
        obstacles: doc
            .obstacles
            .iter()
            .map(|o| Obstacle {
                x_min: o.x_min,
                x_max: o.x_max,
                y_min: o.y_min,
                y_max: o.y_max,
                height: o.height,
            })
            .collect(),
        altitude: doc.altitude,
        tx_power: doc.tx_power,
        duration: doc.duration,
        channel: doc
            .channel
            .map_or_else(ChannelParams::default, |c| ChannelParams {
                alpha_los: c.alpha_los,
                beta_los: c.beta_los,
                alpha_nlos: c.alpha_nlos,
                beta_nlos: c.beta_nlos,
            }),
        prob_los: doc
            .prob_los
            .map_or_else(ProbLosParams::default, |p| ProbLosParams {
                alpha0: p.alpha0,
                beta0: p.beta0,
                a_param: p.a,
                b_param: p.b,
                eta: p.eta,
            }),
        grid: doc.grid.map(|g| SearchGrid {
            x_lo: g.x_lo,
            x_hi: g.x_hi,
            y_lo: g.y_lo,
            y_hi: g.y_hi,
            resolution: g.resolution,
        }),
        solver: SolverConfig {
            grid_resolution: solver.grid_resolution.unwrap_or(defaults.grid_resolution),
            grid_pad: solver.grid_pad.unwrap_or(defaults.grid_pad),
            seed: solver.seed.unwrap_or(defaults.seed),
            tie_tolerance: solver.tie_tolerance.unwrap_or(defaults.tie_tolerance),
            max_iters: solver.max_iters,
            samples: solver.samples.unwrap_or(defaults.samples),
        },
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Writes a complete scenario document (all optional blocks spelled out).
pub fn write_scenario(s: &Scenario<f64>) -> String {
    let doc = ScenarioDoc {
        version: FORMAT_VERSION,
        altitude: s.altitude,
        tx_power: s.tx_power,
        duration: s.duration,
        receivers: s
            .receivers
            .iter()
            .map(|r| ReceiverDoc {
                x: r.approx.x,
                y: r.approx.y,
                epsilon: r.epsilon,
            })
            .collect(),
        obstacles: s
            .obstacles
            .iter()
            .map(|o| ObstacleDoc {
                x_min: o.x_min,
                x_max: o.x_max,
                y_min: o.y_min,
                y_max: o.y_max,
                height: o.height,
            })
            .collect(),
        channel: Some(ChannelDoc {
            alpha_los: s.channel.alpha_los,
            beta_los: s.channel.beta_los,
            alpha_nlos: s.channel.alpha_nlos,
            beta_nlos: s.channel.beta_nlos,
        }),
        prob_los: Some(ProbLosDoc {
            alpha0: s.prob_los.alpha0,
            beta0: s.prob_los.beta0,
            a: s.prob_los.a_param,
            b: s.prob_los.b_param,
            eta: s.prob_los.eta,
        }),
        grid: s.grid.map(|g| GridDoc {
            x_lo: g.x_lo,
            x_hi: g.x_hi,
            y_lo: g.y_lo,
            y_hi: g.y_hi,
            resolution: g.resolution,
        }),
        solver: Some(SolverDoc {
            grid_resolution: Some(s.solver.grid_resolution),
            grid_pad: Some(s.solver.grid_pad),
            seed: Some(s.solver.seed),
            tie_tolerance: Some(s.solver.tie_tolerance),
            max_iters: s.solver.max_iters,
            samples: Some(s.solver.samples),
        }),
    };
    to_toml(&doc)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StopDoc {
    x: f64,
    y: f64,
    duration: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanDoc {
    version: u32,
    min_energy: f64,
    per_receiver_energy: Vec<f64>,
    stops: Vec<StopDoc>,
}

fn stop_docs(plan: &PositioningPlan<f64>) -> Vec<StopDoc> {
    plan.stops
        .iter()
        .map(|s| StopDoc {
            x: s.location.x,
            y: s.location.y,
            duration: s.duration,
        })
        .collect()
}

pub fn write_plan(plan: &PositioningPlan<f64>) -> String {
    to_toml(&PlanDoc {
        version: FORMAT_VERSION,
        min_energy: plan.min_energy,
        per_receiver_energy: plan.per_receiver_energy.clone(),
        stops: stop_docs(plan),
    })
}

pub fn parse_plan(text: &str) -> Result<PositioningPlan<f64>> {
    let doc: PlanDoc = from_toml(text)?;
    check_version(doc.version)?;
    if doc.stops.is_empty() {
        return Err(Error::invalid("stops", "plan needs at least one stop"));
    }
    for (i, s) in doc.stops.iter().enumerate() {
        if !(s.x.is_finite() && s.y.is_finite()) {
            return Err(Error::invalid(
                format!("stops[{i}]"),
                "location must be finite",
            ));
        }
        if !(s.duration >= 0.0) || !s.duration.is_finite() {
            return Err(Error::invalid(
                format!("stops[{i}].duration"),
                "must be finite and >= 0",
            ));
        }
    }
    Ok(PositioningPlan {
        stops: doc
            .stops
            .iter()
            .map(|s| Stop {
                location: Point2::new(s.x, s.y),
                duration: s.duration,
            })
            .collect(),
        min_energy: doc.min_energy,
        per_receiver_energy: doc.per_receiver_energy,
    })
}

fn mode_label(mode: RobustMode) -> String {
    match mode {
        RobustMode::ClosedForm => "closed".to_string(),
        RobustMode::SampledBall { samples, seed } => {
            format!("sampled(samples={samples},seed={seed})")
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct EvaluationDoc {
    mode: String,
    min_energy: f64,
    per_receiver_energy: Vec<f64>,
}

impl From<&Evaluation<f64>> for EvaluationDoc {
    fn from(e: &Evaluation<f64>) -> Self {
        Self {
            mode: mode_label(e.mode),
            min_energy: e.min_energy,
            per_receiver_energy: e.per_receiver.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct EvaluateDoc {
    version: u32,
    evaluation: EvaluationDoc,
}

/// Evaluation of one plan under the true environment.
pub fn write_evaluation(e: &Evaluation<f64>) -> String {
    to_toml(&EvaluateDoc {
        version: FORMAT_VERSION,
        evaluation: e.into(),
    })
}

#[derive(Debug, Clone, Serialize)]
struct ReportDoc {
    policy: String,
    planned_energy: f64,
    achieved_closed: EvaluationDoc,
    achieved_sampled: EvaluationDoc,
    stops: Vec<StopDoc>,
}

#[derive(Debug, Clone, Serialize)]
struct CompareDoc {
    version: u32,
    reports: Vec<ReportDoc>,
}

/// Policy comparison, in the order given.
pub fn write_reports(reports: &[EvaluationReport<f64>]) -> String {
    to_toml(&CompareDoc {
        version: FORMAT_VERSION,
        reports: reports
            .iter()
            .map(|r| ReportDoc {
                policy: r.policy.name().to_string(),
                planned_energy: r.planned_energy,
                achieved_closed: (&r.achieved_closed).into(),
                achieved_sampled: (&r.achieved_sampled).into(),
                stops: stop_docs(&r.plan),
            })
            .collect(),
    })
}

/// Nine significant digits, scientific notation.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.8e}")
}

pub const RESULTS_HEADER: &str =
    "sweep_value,policy,planned_energy_J,achieved_energy_J,stop_count,wall_time_s";

/// Results table; rows sorted by sweep value (input order preserved) then
/// policy name.
pub fn write_results(rows: &[SweepRow<f64>]) -> String {
    let mut sorted: Vec<&SweepRow<f64>> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        a.value
            .partial_cmp(&b.value)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.policy.name().cmp(b.policy.name()))
    });
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in sorted {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_real(r.value),
            r.policy.name(),
            fmt_real(r.planned_energy),
            fmt_real(r.achieved_energy),
            r.stop_count,
            fmt_real(r.wall_time_s),
        ));
    }
    out
}

/// Dual iteration trace of one ellipsoid run.
pub fn write_trace(trace: &[TraceRow<f64>], receivers: usize) -> String {
    let mut out = String::from("iteration");
    for k in 1..=receivers {
        out.push_str(&format!(",lambda_{k}"));
    }
    out.push_str(",dual_value_W,x,y\n");
    for row in trace {
        out.push_str(&row.iteration.to_string());
        for l in &row.lambda {
            out.push(',');
            out.push_str(&fmt_real(*l));
        }
        out.push_str(&format!(
            ",{},{},{}\n",
            fmt_real(row.value),
            fmt_real(row.maximizer.x),
            fmt_real(row.maximizer.y)
        ));
    }
    out
}
