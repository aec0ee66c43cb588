//! Geometry of the charging area and the three channel models.
//!
//! A link runs from the UAV at `(q.x, q.y, altitude)` down to a receiver at
//! `(w.x, w.y, 0)`. The segmented (radio map) model picks LoS or NLoS path
//! loss parameters by ray casting that segment against box obstacles; the two
//! benchmark models ignore obstacles.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Horizontal position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2<S> {
    pub x: S,
    pub y: S,
}

impl<S: Scalar> Point2<S> {
    pub fn new(x: S, y: S) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Self) -> S {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Axis-aligned box standing on the ground, spanning `z ∈ [0, height]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obstacle<S> {
    pub x_min: S,
    pub x_max: S,
    pub y_min: S,
    pub y_max: S,
    pub height: S,
}

impl<S: Scalar> Obstacle<S> {
    pub fn new(x_min: S, x_max: S, y_min: S, y_max: S, height: S) -> Result<Self> {
        let o = Self {
            x_min,
            x_max,
            y_min,
            y_max,
            height,
        };
        o.validate("obstacle")?;
        Ok(o)
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        let all = [self.x_min, self.x_max, self.y_min, self.y_max, self.height];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(field, "coordinates must be finite"));
        }
        if !(self.x_min < self.x_max) {
            return Err(Error::invalid(
                format!("{field}.x_min"),
                "x_min must be < x_max",
            ));
        }
        if !(self.y_min < self.y_max) {
            return Err(Error::invalid(
                format!("{field}.y_min"),
                "y_min must be < y_max",
            ));
        }
        if !(self.height > S::zero()) {
            return Err(Error::invalid(
                format!("{field}.height"),
                "height must be > 0",
            ));
        }
        Ok(())
    }

    /// Whether the open segment `a → b` passes through the box interior.
    ///
    /// Slab test with open intervals: a segment that only grazes a face,
    /// edge or corner is not counted.
    pub fn segment_hits(&self, a: [S; 3], b: [S; 3]) -> bool {
        let lo = [self.x_min, self.y_min, S::zero()];
        let hi = [self.x_max, self.y_max, self.height];
        let mut t_enter = S::zero();
        let mut t_exit = S::one();
        for axis in 0..3 {
            let d = b[axis] - a[axis];
            if d == S::zero() {
                if !(a[axis] > lo[axis] && a[axis] < hi[axis]) {
                    return false;
                }
                continue;
            }
            let t0 = (lo[axis] - a[axis]) / d;
            let t1 = (hi[axis] - a[axis]) / d;
            let (near, far) = if t0 < t1 { (t0, t1) } else { (t1, t0) };
            t_enter = t_enter.max(near);
            t_exit = t_exit.min(far);
            if !(t_enter < t_exit) {
                return false;
            }
        }
        t_enter < t_exit
    }
}

/// Two-regime (LoS / NLoS) path loss parameters for the radio map model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams<S> {
    pub alpha_los: S,
    pub beta_los: S,
    pub alpha_nlos: S,
    pub beta_nlos: S,
}

impl<S: Scalar> ChannelParams<S> {
    pub fn new(alpha_los: S, beta_los: S, alpha_nlos: S, beta_nlos: S) -> Result<Self> {
        let p = Self {
            alpha_los,
            beta_los,
            alpha_nlos,
            beta_nlos,
        };
        p.validate("channel")?;
        Ok(p)
    }

    /// Blockage may only ever make a link worse: the NLoS exponent is at
    /// least the LoS one and the NLoS reference gain at most the LoS one.
    pub fn validate(&self, field: &str) -> Result<()> {
        let all = [
            self.alpha_los,
            self.beta_los,
            self.alpha_nlos,
            self.beta_nlos,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(field, "parameters must be finite"));
        }
        if !(self.alpha_los > S::zero()) {
            return Err(Error::invalid(format!("{field}.alpha_los"), "must be > 0"));
        }
        if !(self.beta_nlos > S::zero()) {
            return Err(Error::invalid(format!("{field}.beta_nlos"), "must be > 0"));
        }
        if self.alpha_nlos < self.alpha_los {
            return Err(Error::invalid(
                format!("{field}.alpha_nlos"),
                "monotonicity requires alpha_nlos >= alpha_los",
            ));
        }
        if self.beta_nlos > self.beta_los {
            return Err(Error::invalid(
                format!("{field}.beta_nlos"),
                "monotonicity requires beta_nlos <= beta_los",
            ));
        }
        Ok(())
    }
}

impl<S: Scalar> Default for ChannelParams<S> {
    fn default() -> Self {
        Self {
            alpha_los: S::lit(2.3),
            beta_los: S::lit(1e-3),
            alpha_nlos: S::lit(4.0),
            beta_nlos: S::lit(1e-4),
        }
    }
}

/// Elevation-dependent probabilistic LoS model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbLosParams<S> {
    pub alpha0: S,
    pub beta0: S,
    pub a_param: S,
    pub b_param: S,
    /// Extra attenuation applied to the NLoS share, in (0, 1].
    pub eta: S,
}

impl<S: Scalar> ProbLosParams<S> {
    pub fn validate(&self, field: &str) -> Result<()> {
        let all = [
            self.alpha0,
            self.beta0,
            self.a_param,
            self.b_param,
            self.eta,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(field, "parameters must be finite"));
        }
        if !(self.alpha0 > S::zero()) {
            return Err(Error::invalid(format!("{field}.alpha0"), "must be > 0"));
        }
        if !(self.beta0 > S::zero()) {
            return Err(Error::invalid(format!("{field}.beta0"), "must be > 0"));
        }
        if !(self.eta > S::zero() && self.eta <= S::one()) {
            return Err(Error::invalid(format!("{field}.eta"), "must lie in (0, 1]"));
        }
        Ok(())
    }

    /// LoS probability at elevation `theta_deg`.
    pub fn los_probability(&self, theta_deg: S) -> S {
        S::one() / (S::one() + self.a_param * (-self.b_param * (theta_deg - self.a_param)).exp())
    }
}

impl<S: Scalar> Default for ProbLosParams<S> {
    fn default() -> Self {
        Self {
            alpha0: S::lit(2.0),
            beta0: S::lit(1e-3),
            a_param: S::lit(10.0),
            b_param: S::lit(0.6),
            eta: S::lit(0.1),
        }
    }
}

/// Path loss exponent and reference gain (at 1 m) of one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams<S> {
    pub alpha: S,
    pub beta: S,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelModel<S> {
    SegmentedRadioMap {
        obstacles: Vec<Obstacle<S>>,
        params: ChannelParams<S>,
    },
    PureLos {
        alpha0: S,
        beta0: S,
    },
    ProbabilisticLos(ProbLosParams<S>),
}

/// True iff the segment from the UAV at `(q, altitude)` to the ground point
/// `w` crosses the interior of any obstacle.
pub fn los_blocked<S: Scalar>(
    q: Point2<S>,
    altitude: S,
    w: Point2<S>,
    obstacles: &[Obstacle<S>],
) -> bool {
    let a = [q.x, q.y, altitude];
    let b = [w.x, w.y, S::zero()];
    obstacles.iter().any(|o| o.segment_hits(a, b))
}

/// `β p / (h² + r²)^(α/2)` for horizontal distance `r`.
#[inline]
pub(crate) fn path_power<S: Scalar>(link: LinkParams<S>, altitude: S, horizontal: S, p_tx: S) -> S {
    let d2 = altitude * altitude + horizontal * horizontal;
    link.beta * p_tx / d2.powf(link.alpha / S::lit(2.0))
}

impl<S: Scalar> ChannelModel<S> {
    pub fn label(&self) -> &'static str {
        match self {
            ChannelModel::SegmentedRadioMap { .. } => "segmented",
            ChannelModel::PureLos { .. } => "los",
            ChannelModel::ProbabilisticLos(_) => "prob-los",
        }
    }

    pub fn link_params(&self, q: Point2<S>, altitude: S, w: Point2<S>) -> LinkParams<S> {
        match self {
            ChannelModel::SegmentedRadioMap { obstacles, params } => {
                if los_blocked(q, altitude, w, obstacles) {
                    LinkParams {
                        alpha: params.alpha_nlos,
                        beta: params.beta_nlos,
                    }
                } else {
                    LinkParams {
                        alpha: params.alpha_los,
                        beta: params.beta_los,
                    }
                }
            }
            ChannelModel::PureLos { alpha0, beta0 } => LinkParams {
                alpha: *alpha0,
                beta: *beta0,
            },
            ChannelModel::ProbabilisticLos(p) => {
                let d = altitude.hypot(q.distance(&w));
                let ratio = (altitude / d).min(S::one());
                let theta = ratio.asin().to_degrees();
                let p_los = p.los_probability(theta);
                LinkParams {
                    alpha: p.alpha0,
                    beta: p.beta0 * (p_los + p.eta * (S::one() - p_los)),
                }
            }
        }
    }

    /// Instantaneous RF power delivered from `q` to a receiver exactly at `w`.
    pub fn rf_power(&self, q: Point2<S>, altitude: S, w: Point2<S>, p_tx: S) -> S {
        let link = self.link_params(q, altitude, w);
        path_power(link, altitude, q.distance(&w), p_tx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn segmented(obstacles: Vec<Obstacle<f64>>) -> ChannelModel<f64> {
        ChannelModel::SegmentedRadioMap {
            obstacles,
            params: ChannelParams::default(),
        }
    }

    fn wall() -> Obstacle<f64> {
        Obstacle::new(2.0, 3.0, -1.0, 1.0, 4.5).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn blocked_through_box() {
        let q = Point2::new(0.0, 0.0);
        assert!(los_blocked(q, 5.0, Point2::new(5.0, 0.0), &[wall()]));
    }

    #[test]
    fn vertical_link_without_obstacles_is_clear() {
        let q = Point2::new(0.0, 0.0);
        assert!(!los_blocked(q, 5.0, q, &[]));
    }

    #[test]
    fn laterally_offset_box_does_not_block() {
        let o = Obstacle::new(2.0, 3.0, 5.0, 6.0, 4.5).unwrap();
        assert!(!los_blocked(
            Point2::new(0.0, 0.0),
            5.0,
            Point2::new(5.0, 0.0),
            &[o]
        ));
    }

    #[test]
    fn grazing_a_face_is_not_blocked() {
        // Segment runs exactly along the top face plane y = 1.
        let o = Obstacle::new(2.0, 3.0, -1.0, 1.0, 4.5).unwrap();
        assert!(!los_blocked(
            Point2::new(0.0, 1.0),
            5.0,
            Point2::new(5.0, 1.0),
            &[o]
        ));
        // Segment height is exactly 3 at x = 2, the far top edge of the box.
        let o = Obstacle::new(0.5, 2.0, -1.0, 1.0, 3.0).unwrap();
        assert!(!los_blocked(
            Point2::new(0.0, 0.0),
            5.0,
            Point2::new(5.0, 0.0),
            &[o]
        ));
    }

    #[test]
    fn obstacle_validation() {
        assert!(Obstacle::new(1.0, 1.0, 0.0, 1.0, 1.0).is_err());
        assert!(Obstacle::new(0.0, 1.0, 2.0, 1.0, 1.0).is_err());
        assert!(Obstacle::new(0.0, 1.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn channel_params_enforce_monotonicity() {
        assert!(ChannelParams::new(2.3, 1e-3, 2.0, 1e-4).is_err());
        assert!(ChannelParams::new(2.3, 1e-3, 4.0, 1e-2).is_err());
        assert!(ChannelParams::new(2.3, 1e-3, 4.0, 1e-4).is_ok());
    }

    #[test]
    fn link_params_follow_blockage() {
        let m = segmented(vec![wall()]);
        let q = Point2::new(0.0, 0.0);
        let clear = m.link_params(q, 5.0, Point2::new(0.0, 0.0));
        assert_eq!((clear.alpha, clear.beta), (2.3, 1e-3));
        let blocked = m.link_params(q, 5.0, Point2::new(5.0, 0.0));
        assert_eq!((blocked.alpha, blocked.beta), (4.0, 1e-4));
    }

    #[test]
    fn prob_los_overhead_is_nearly_pure_los() {
        let m = ChannelModel::ProbabilisticLos(ProbLosParams::default());
        let q = Point2::new(1.0, 1.0);
        let link = m.link_params(q, 5.0, q);
        assert_eq!(link.alpha, 2.0);
        assert!(rel(link.beta, 1e-3) < 1e-12);
    }

    #[test]
    fn rf_power_reference_values() {
        let q = Point2::new(0.0, 0.0);
        let los = segmented(vec![]).rf_power(q, 5.0, q, 10.0);
        assert!(rel(los, 1e-2 / 5f64.powf(2.3)) < 1e-12);
        assert!(rel(los, 2.468e-4) < 1e-3);

        // Receiver directly under a box whose top is above the UAV's path.
        let cover = Obstacle::new(-1.0, 1.0, -1.0, 1.0, 4.5).unwrap();
        let nlos = segmented(vec![cover]).rf_power(q, 5.0, q, 10.0);
        assert!(rel(nlos, 1.6e-6) < 1e-12);

        let pure = ChannelModel::PureLos {
            alpha0: 2.0,
            beta0: 1e-3,
        }
        .rf_power(q, 5.0, q, 10.0);
        assert!(rel(pure, 4e-4) < 1e-12);
    }

    #[test]
    fn generic_over_f32() {
        let m: ChannelModel<f32> = ChannelModel::PureLos {
            alpha0: 2.0,
            beta0: 1e-3,
        };
        let q = Point2::new(0.0f32, 0.0);
        let p = m.rf_power(q, 5.0, q, 10.0);
        assert!((p - 4e-4).abs() / 4e-4 < 1e-6);
    }

    fn arb_point() -> impl Strategy<Value = Point2<f64>> {
        (-10.0..10.0f64, -10.0..10.0f64).prop_map(|(x, y)| Point2::new(x, y))
    }

    fn arb_box() -> impl Strategy<Value = Obstacle<f64>> {
        (
            -8.0..8.0f64,
            0.1..4.0f64,
            -8.0..8.0f64,
            0.1..4.0f64,
            0.5..8.0f64,
        )
            .prop_map(|(x, dx, y, dy, h)| Obstacle::new(x, x + dx, y, y + dy, h).unwrap())
    }

    proptest! {
        #[test]
        fn blockage_symmetric_in_endpoints(
            a in arb_point(), b in arb_point(), h in 0.5..10.0f64,
            boxes in proptest::collection::vec(arb_box(), 0..4),
        ) {
            let fwd = boxes.iter().any(|o| o.segment_hits([a.x, a.y, h], [b.x, b.y, 0.0]));
            let rev = boxes.iter().any(|o| o.segment_hits([b.x, b.y, 0.0], [a.x, a.y, h]));
            prop_assert_eq!(fwd, rev);
        }

        #[test]
        fn power_decreases_with_distance(w in arb_point(), r1 in 0.0..20.0f64, dr in 0.01..5.0f64) {
            let m = segmented(vec![]);
            let near = m.rf_power(Point2::new(w.x + r1, w.y), 5.0, w, 10.0);
            let far = m.rf_power(Point2::new(w.x + r1 + dr, w.y), 5.0, w, 10.0);
            prop_assert!(far < near);
        }

        #[test]
        fn blocked_never_beats_clear(q in arb_point(), w in arb_point(), o in arb_box()) {
            let params = ChannelParams::<f64>::default();
            let r = q.distance(&w);
            let clear = path_power(LinkParams { alpha: params.alpha_los, beta: params.beta_los }, 5.0, r, 10.0);
            let m = segmented(vec![o]);
            prop_assert!(m.rf_power(q, 5.0, w, 10.0) <= clear);
        }

        #[test]
        fn prob_los_beta_bounded(q in arb_point(), w in arb_point(), h in 0.5..50.0f64) {
            let p = ProbLosParams::<f64>::default();
            let beta = ChannelModel::ProbabilisticLos(p).link_params(q, h, w).beta;
            prop_assert!(beta >= p.eta * p.beta0 * (1.0 - 1e-12));
            prop_assert!(beta <= p.beta0 * (1.0 + 1e-12));
        }
    }
}
