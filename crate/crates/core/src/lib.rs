//! Robust hover-location planning for a UAV that wirelessly charges ground
//! receivers whose positions are known only to within a radius.
//!
//! The numeric core is generic over the floating-point type ([`Scalar`]);
//! the aliases below fix it to `f64`, which is what the CLI and the file
//! formats use.
//!
//! ```
//! use radiomap_wpt::{solve_p1, DesignPolicy, Point2, Scenario, UncertainReceiver};
//!
//! let receivers = vec![
//!     UncertainReceiver::new(Point2::new(-3.0, 0.0), 1.0).unwrap(),
//!     UncertainReceiver::new(Point2::new(3.0, 0.0), 1.0).unwrap(),
//! ];
//! let scenario = Scenario::new(receivers, vec![], 5.0, 10.0, 60.0);
//! let plan = solve_p1(&scenario, DesignPolicy::RadioMap).unwrap();
//! assert!(plan.min_energy > 0.0);
//! ```

// `!(x > 0.0)` is the deliberate NaN-rejecting form in validators.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli_io;
pub mod dual_solver;
pub mod error;
pub mod planner;
pub mod robust;
pub mod scalar;
pub mod scene;
pub mod timeshare_lp;

pub use dual_solver::{
    dual_subgradient, dual_value, ellipsoid_minimize, extract_candidates, grid_argmax,
    weighted_objective, EllipsoidConfig,
};
pub use error::{Error, Result};
pub use planner::{
    brute_force_plan_oracle, compare_designs, evaluate_plan, solve_p1, solve_p1_detailed, sweep,
    DesignPolicy, SweepAxis,
};
pub use robust::{worst_case_energy, worst_case_location, worst_case_power, RobustMode};
pub use scalar::Scalar;
pub use scene::los_blocked;
pub use timeshare_lp::{solve_timeshare, vertex_enumeration_oracle};

pub type Point2 = scene::Point2<f64>;
pub type Obstacle = scene::Obstacle<f64>;
pub type ChannelParams = scene::ChannelParams<f64>;
pub type ProbLosParams = scene::ProbLosParams<f64>;
pub type ChannelModel = scene::ChannelModel<f64>;
pub type UncertainReceiver = robust::UncertainReceiver<f64>;
pub type SearchGrid = dual_solver::SearchGrid<f64>;
pub type DualWeights = dual_solver::DualWeights<f64>;
pub type DualState = dual_solver::DualState<f64>;
pub type CandidateSet = dual_solver::CandidateSet<f64>;
pub type GainTable = dual_solver::GainTable<f64>;
pub type TimeShareProblem = timeshare_lp::TimeShareProblem<f64>;
pub type TimeShareSolution = timeshare_lp::TimeShareSolution<f64>;
pub type Scenario = planner::Scenario<f64>;
pub type SolverConfig = planner::SolverConfig<f64>;
pub type PositioningPlan = planner::PositioningPlan<f64>;
pub type Stop = planner::Stop<f64>;
pub type PlanSolution = planner::PlanSolution<f64>;
pub type Evaluation = planner::Evaluation<f64>;
pub type EvaluationReport = planner::EvaluationReport<f64>;
pub type SweepRow = planner::SweepRow<f64>;
