//! Worst-case channel evaluation over a receiver's location-error disk.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::planner::PositioningPlan;
use crate::scalar::Scalar;
use crate::scene::{path_power, ChannelModel, Point2};

/// A receiver known to lie within `epsilon` meters of `approx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertainReceiver<S> {
    pub approx: Point2<S>,
    pub epsilon: S,
}

impl<S: Scalar> UncertainReceiver<S> {
    pub fn new(approx: Point2<S>, epsilon: S) -> Result<Self> {
        let r = Self { approx, epsilon };
        r.validate("receiver")?;
        Ok(r)
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        if !self.approx.is_finite() {
            return Err(Error::invalid(field, "location must be finite"));
        }
        if !(self.epsilon >= S::zero()) || !self.epsilon.is_finite() {
            return Err(Error::invalid(
                format!("{field}.epsilon"),
                "must be finite and >= 0",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RobustMode {
    /// Adversary sits at the farthest point of the disk at every instant.
    ClosedForm,
    /// Minimum over `samples` uniform draws from the disk plus the centre
    /// and the closed-form point(s). Deterministic in `seed`.
    SampledBall { samples: usize, seed: u64 },
}

/// Point of the error disk farthest from `q`.
///
/// When `q` coincides with the disk centre every boundary point is equally
/// far; `approx + (epsilon, 0)` is returned.
pub fn worst_case_location<S: Scalar>(q: Point2<S>, r: &UncertainReceiver<S>) -> Point2<S> {
    let dx = r.approx.x - q.x;
    let dy = r.approx.y - q.y;
    let norm = dx.hypot(dy);
    if norm == S::zero() {
        return Point2::new(r.approx.x + r.epsilon, r.approx.y);
    }
    Point2::new(
        r.approx.x + r.epsilon * dx / norm,
        r.approx.y + r.epsilon * dy / norm,
    )
}

/// Uniform draws from the disk of radius `epsilon` around `center`.
pub fn disk_samples<S: Scalar>(
    center: Point2<S>,
    epsilon: S,
    n: usize,
    seed: u64,
) -> Vec<Point2<S>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps = epsilon.as_f64();
    let (cx, cy) = (center.x.as_f64(), center.y.as_f64());
    (0..n)
        .map(|_| {
            let u: f64 = rng.gen();
            let v: f64 = rng.gen();
            let rad = eps * u.sqrt();
            let ang = std::f64::consts::TAU * v;
            Point2::new(S::lit(cx + rad * ang.cos()), S::lit(cy + rad * ang.sin()))
        })
        .collect()
}

/// Worst-case instantaneous power with the receiver at the far edge of its
/// disk: horizontal distance `‖q − w̄‖ + ε`, path loss parameters looked up
/// for the pair `(q, w*)`.
pub fn closed_form_power<S: Scalar>(
    model: &ChannelModel<S>,
    q: Point2<S>,
    altitude: S,
    r: &UncertainReceiver<S>,
    p_tx: S,
) -> S {
    let w_star = worst_case_location(q, r);
    let link = model.link_params(q, altitude, w_star);
    path_power(link, altitude, q.distance(&r.approx) + r.epsilon, p_tx)
}

pub fn worst_case_power<S: Scalar>(
    model: &ChannelModel<S>,
    q: Point2<S>,
    altitude: S,
    r: &UncertainReceiver<S>,
    p_tx: S,
    mode: RobustMode,
) -> S {
    match mode {
        RobustMode::ClosedForm => closed_form_power(model, q, altitude, r, p_tx),
        RobustMode::SampledBall { samples, seed } => {
            let mut pts = disk_samples(r.approx, r.epsilon, samples, seed);
            pts.push(r.approx);
            pts.push(worst_case_location(q, r));
            pts.iter()
                .map(|w| model.rf_power(q, altitude, *w, p_tx))
                .fold(S::infinity(), S::min)
        }
    }
}

pub(crate) fn check_durations<S: Scalar>(plan: &PositioningPlan<S>, total: S) -> Result<()> {
    let sum: S = plan.stops.iter().map(|s| s.duration).sum();
    if (sum - total).abs() > S::tol(1e-9) * total {
        return Err(Error::invalid(
            "plan.stops",
            format!("durations sum to {sum}, expected {total}"),
        ));
    }
    if plan.stops.iter().any(|s| !(s.duration >= S::zero())) {
        return Err(Error::invalid("plan.stops", "durations must be >= 0"));
    }
    Ok(())
}

/// Worst-case energy one receiver collects over a plan.
///
/// `ClosedForm` applies the adversary pointwise in time, a lower bound on
/// what any fixed receiver location collects. `SampledBall` fixes a single
/// receiver location for the whole plan and minimises over the sample set.
pub fn worst_case_energy<S: Scalar>(
    model: &ChannelModel<S>,
    plan: &PositioningPlan<S>,
    total_time: S,
    altitude: S,
    r: &UncertainReceiver<S>,
    p_tx: S,
    mode: RobustMode,
) -> Result<S> {
    check_durations(plan, total_time)?;
    match mode {
        RobustMode::ClosedForm => Ok(plan
            .stops
            .iter()
            .map(|s| s.duration * closed_form_power(model, s.location, altitude, r, p_tx))
            .sum()),
        RobustMode::SampledBall { samples, seed } => {
            let mut pts = disk_samples(r.approx, r.epsilon, samples, seed);
            pts.push(r.approx);
            pts.extend(
                plan.stops
                    .iter()
                    .map(|s| worst_case_location(s.location, r)),
            );
            Ok(pts
                .iter()
                .map(|w| {
                    plan.stops
                        .iter()
                        .map(|s| s.duration * model.rf_power(s.location, altitude, *w, p_tx))
                        .sum::<S>()
                })
                .fold(S::infinity(), S::min))
        }
    }
}
