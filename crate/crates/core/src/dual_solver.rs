//! Lagrange dual of the max-min hover problem.
//!
//! For weights `λ` on the probability simplex the dual function is
//! `g(λ) = T · max_q Σ_k λ_k Q̂_k(q)`, where `Q̂_k` is the worst-case power of
//! receiver `k`. The inner maximisation is an exhaustive search over a
//! rectangular grid; `g` is then minimised with the ellipsoid method in the
//! `K − 1` free coordinates `λ_1 … λ_{K−1}` (`λ_K = 1 − Σ_{k<K} λ_k`).
//!
//! Everything here works on *unit transmit power* gains and only multiplies by
//! the transmit power when reporting watts, so the search path, tie-breaks and
//! candidate locations do not depend on the transmit power at all.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::robust::{closed_form_power, UncertainReceiver};
use crate::scalar::Scalar;
use crate::scene::{ChannelModel, Point2};

/// Relative tolerance for harvesting near-optimal grid points.
pub const DEFAULT_TIE_TOLERANCE: f64 = 1e-6;

/// Rectangular search region sampled at `resolution` spacing, starting at
/// `(x_lo, y_lo)`. Grid point `(ix, iy)` has flat index `ix * ny + iy`, so
/// index order is lexicographic `(x, y)` order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchGrid<S> {
    pub x_lo: S,
    pub x_hi: S,
    pub y_lo: S,
    pub y_hi: S,
    pub resolution: S,
}

impl<S: Scalar> SearchGrid<S> {
    pub fn new(x_lo: S, x_hi: S, y_lo: S, y_hi: S, resolution: S) -> Result<Self> {
        let g = Self {
            x_lo,
            x_hi,
            y_lo,
            y_hi,
            resolution,
        };
        g.validate("grid")?;
        Ok(g)
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        let all = [self.x_lo, self.x_hi, self.y_lo, self.y_hi, self.resolution];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(field, "bounds must be finite"));
        }
        if !(self.x_lo < self.x_hi) {
            return Err(Error::invalid(
                format!("{field}.x_lo"),
                "x_lo must be < x_hi",
            ));
        }
        if !(self.y_lo < self.y_hi) {
            return Err(Error::invalid(
                format!("{field}.y_lo"),
                "y_lo must be < y_hi",
            ));
        }
        if !(self.resolution > S::zero()) {
            return Err(Error::invalid(format!("{field}.resolution"), "must be > 0"));
        }
        Ok(())
    }

    /// Bounding box of the approximate receiver locations, grown by each
    /// receiver's error radius and then by `pad` on every side.
    pub fn around(receivers: &[UncertainReceiver<S>], pad: S, resolution: S) -> Result<Self> {
        if receivers.is_empty() {
            return Err(Error::invalid(
                "receivers",
                "at least one receiver required",
            ));
        }
        let mut x_lo = S::infinity();
        let mut x_hi = S::neg_infinity();
        let mut y_lo = S::infinity();
        let mut y_hi = S::neg_infinity();
        for r in receivers {
            x_lo = x_lo.min(r.approx.x - r.epsilon);
            x_hi = x_hi.max(r.approx.x + r.epsilon);
            y_lo = y_lo.min(r.approx.y - r.epsilon);
            y_hi = y_hi.max(r.approx.y + r.epsilon);
        }
        // A single receiver with zero radius and no padding still needs a
        // non-degenerate rectangle.
        let pad = pad.max(S::zero());
        let grow = |lo: S, hi: S| {
            if hi - lo + pad + pad > S::zero() {
                (lo - pad, hi + pad)
            } else {
                (lo - resolution, hi + resolution)
            }
        };
        let (x_lo, x_hi) = grow(x_lo, x_hi);
        let (y_lo, y_hi) = grow(y_lo, y_hi);
        Self::new(x_lo, x_hi, y_lo, y_hi, resolution)
    }

    fn axis_count(lo: S, hi: S, res: S) -> usize {
        let steps = ((hi - lo) / res + S::lit(1e-9)).floor();
        steps.to_usize().unwrap_or(0) + 1
    }

    pub fn nx(&self) -> usize {
        Self::axis_count(self.x_lo, self.x_hi, self.resolution)
    }

    pub fn ny(&self) -> usize {
        Self::axis_count(self.y_lo, self.y_hi, self.resolution)
    }

    pub fn len(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, index: usize) -> Point2<S> {
        let ny = self.ny();
        let (ix, iy) = (index / ny, index % ny);
        Point2::new(
            self.x_lo + S::lit(ix as f64) * self.resolution,
            self.y_lo + S::lit(iy as f64) * self.resolution,
        )
    }

    pub fn points(&self) -> Vec<Point2<S>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }
}

/// Dual weights on the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct DualWeights<S>(Vec<S>);

impl<S: Scalar> DualWeights<S> {
    pub fn new(lambda: Vec<S>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::invalid("lambda", "need at least one weight"));
        }
        if lambda.iter().any(|l| !(*l >= S::zero()) || !l.is_finite()) {
            return Err(Error::invalid("lambda", "weights must be finite and >= 0"));
        }
        let sum: S = lambda.iter().copied().sum();
        if (sum - S::one()).abs() > S::tol(1e-12) * S::lit(lambda.len() as f64) {
            return Err(Error::invalid(
                "lambda",
                format!("weights sum to {sum}, expected 1"),
            ));
        }
        Ok(Self(lambda))
    }

    pub fn uniform(k: usize) -> Self {
        Self(vec![S::one() / S::lit(k as f64); k])
    }

    /// Unit vector on receiver `k`.
    pub fn unit(k: usize, len: usize) -> Self {
        let mut v = vec![S::zero(); len];
        v[k] = S::one();
        Self(v)
    }

    /// Rebuilds the full weight vector from the `K − 1` free coordinates.
    /// Tiny negative round-off is clipped.
    fn from_reduced(reduced: &[S]) -> Self {
        let mut v: Vec<S> = reduced.iter().map(|x| x.max(S::zero())).collect();
        let head: S = v.iter().copied().sum();
        v.push((S::one() - head).max(S::zero()));
        Self(v)
    }

    pub fn as_slice(&self) -> &[S] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Worst-case unit-power gains of every receiver at every grid point.
#[derive(Debug, Clone)]
pub struct GainTable<S> {
    pub grid: SearchGrid<S>,
    pub points: Vec<Point2<S>>,
    pub receivers: usize,
    pub tx_power: S,
    gains: Vec<S>,
}

impl<S: Scalar> GainTable<S> {
    pub fn build(
        model: &ChannelModel<S>,
        receivers: &[UncertainReceiver<S>],
        altitude: S,
        tx_power: S,
        grid: SearchGrid<S>,
    ) -> Self {
        let points = grid.points();
        let gains: Vec<S> = points
            .par_iter()
            .flat_map_iter(|q| {
                receivers
                    .iter()
                    .map(move |r| closed_form_power(model, *q, altitude, r, S::one()))
            })
            .collect();
        Self {
            grid,
            points,
            receivers: receivers.len(),
            tx_power,
            gains,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Unit-power gains of all receivers at grid point `index`.
    pub fn gains(&self, index: usize) -> &[S] {
        &self.gains[index * self.receivers..(index + 1) * self.receivers]
    }

    /// Worst-case powers in watts at grid point `index`.
    pub fn powers(&self, index: usize) -> Vec<S> {
        self.gains(index)
            .iter()
            .map(|g| *g * self.tx_power)
            .collect()
    }

    fn weighted_gain(&self, weights: &[S], index: usize) -> S {
        self.gains(index)
            .iter()
            .zip(weights)
            .fold(S::zero(), |acc, (g, l)| acc + *g * *l)
    }
}

/// `Σ_k λ_k Q̂_k(q)` evaluated directly at an arbitrary location.
pub fn weighted_objective<S: Scalar>(
    weights: &DualWeights<S>,
    q: Point2<S>,
    model: &ChannelModel<S>,
    receivers: &[UncertainReceiver<S>],
    altitude: S,
    tx_power: S,
) -> S {
    receivers
        .iter()
        .zip(weights.as_slice())
        .map(|(r, l)| *l * closed_form_power(model, q, altitude, r, tx_power))
        .sum()
}

/// Result of one exhaustive grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMax<S> {
    pub index: usize,
    pub point: Point2<S>,
    /// Maximum weighted worst-case power, watts.
    pub value: S,
    /// Grid indices within the tie tolerance of the maximum, ascending.
    pub near_optimal: Vec<usize>,
    gain_value: S,
}

/// Exhaustive maximisation of the weighted worst-case power over the grid.
///
/// Ties go to the lexicographically smallest `(x, y)`; the reduction is a
/// total order, so the answer does not depend on evaluation order.
pub fn grid_argmax<S: Scalar>(
    weights: &DualWeights<S>,
    table: &GainTable<S>,
    tie_tolerance: S,
) -> GridMax<S> {
    let w = weights.as_slice();
    let values: Vec<S> = (0..table.len())
        .into_par_iter()
        .map(|i| table.weighted_gain(w, i))
        .collect();
    let (index, best) = values.par_iter().copied().enumerate().reduce(
        || (usize::MAX, S::neg_infinity()),
        |a, b| {
            if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                b
            } else {
                a
            }
        },
    );
    let threshold = best * (S::one() - tie_tolerance);
    let near_optimal = values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v >= threshold)
        .map(|(i, _)| i)
        .collect();
    GridMax {
        index,
        point: table.points[index],
        value: best * table.tx_power,
        near_optimal,
        gain_value: best,
    }
}

/// `max_q Σ λ_k Q̂_k(q)` in watts; multiply by the charging duration for `g(λ)`.
pub fn dual_value<S: Scalar>(weights: &DualWeights<S>, table: &GainTable<S>) -> S {
    grid_argmax(weights, table, S::zero()).value
}

fn reduced_subgradient<S: Scalar>(gains: &[S]) -> Vec<S> {
    let (last, head) = gains.split_last().expect("at least one receiver");
    head.iter().map(|g| *g - *last).collect()
}

/// Subgradient of the per-second dual function in the `K − 1` free
/// coordinates: `Q̂_k(q^λ) − Q̂_K(q^λ)` at the grid maximiser `q^λ`.
pub fn dual_subgradient<S: Scalar>(weights: &DualWeights<S>, table: &GainTable<S>) -> Vec<S> {
    let best = grid_argmax(weights, table, S::zero());
    reduced_subgradient(&table.powers(best.index))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipsoidConfig {
    /// Defaults to `max(200, 80 n (n + 1))` for `n = K − 1`.
    pub max_iters: Option<usize>,
    pub stall_window: usize,
    pub stall_tolerance: f64,
    pub tie_tolerance: f64,
}

impl Default for EllipsoidConfig {
    fn default() -> Self {
        Self {
            max_iters: None,
            stall_window: 50,
            stall_tolerance: 1e-9,
            tie_tolerance: DEFAULT_TIE_TOLERANCE,
        }
    }
}

impl EllipsoidConfig {
    pub fn iteration_limit(&self, receivers: usize) -> usize {
        let n = receivers.saturating_sub(1);
        self.max_iters.unwrap_or_else(|| 200.max(80 * n * (n + 1)))
    }
}

/// A grid point seen as a maximiser during the dual search.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolEntry<S> {
    pub index: usize,
    pub location: Point2<S>,
    /// Worst-case power of each receiver, watts.
    pub powers: Vec<S>,
}

/// One objective evaluation of the ellipsoid loop.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow<S> {
    pub iteration: usize,
    pub lambda: Vec<S>,
    /// Per-second dual value, watts.
    pub value: S,
    pub maximizer: Point2<S>,
}

#[derive(Debug, Clone)]
pub struct DualState<S> {
    /// Free coordinates `λ_1 … λ_{K−1}` of the ellipsoid centre.
    pub center: Vec<S>,
    /// Row-major `(K−1) × (K−1)` shape matrix.
    pub shape: Vec<S>,
    /// Smallest per-second dual value seen, watts.
    pub best_value: S,
    pub best_weights: DualWeights<S>,
    pub candidate_pool: Vec<PoolEntry<S>>,
    pub iteration: usize,
    /// Best value after every objective evaluation, watts.
    pub best_history: Vec<S>,
    pub trace: Vec<TraceRow<S>>,
}

struct Pool<S> {
    seen: HashSet<usize>,
    entries: Vec<PoolEntry<S>>,
}

impl<S: Scalar> Pool<S> {
    fn new() -> Self {
        Self {
            seen: HashSet::new(),
            entries: Vec::new(),
        }
    }

    fn add(&mut self, table: &GainTable<S>, index: usize) {
        if self.seen.insert(index) {
            self.entries.push(PoolEntry {
                index,
                location: table.points[index],
                powers: table.powers(index),
            });
        }
    }

    fn add_all(&mut self, table: &GainTable<S>, m: &GridMax<S>) {
        self.add(table, m.index);
        for &i in &m.near_optimal {
            self.add(table, i);
        }
    }
}

fn check_finite<S: Scalar>(m: &GridMax<S>, lambda: &DualWeights<S>) -> Result<()> {
    if !m.gain_value.is_finite() {
        return Err(Error::solver(format!(
            "non-finite dual objective {} at lambda {:?}",
            m.gain_value,
            lambda.as_slice()
        )));
    }
    Ok(())
}

/// Minimises the dual function over the simplex with the central-cut
/// ellipsoid method.
///
/// Starts from the unit ball around the uniform weights. Centres outside the
/// simplex get a feasibility cut; feasible centres get an objective cut along
/// the dual subgradient. Every objective evaluation's maximiser and its
/// near-optimal grid points are pooled as hover candidates.
pub fn ellipsoid_minimize<S: Scalar>(
    table: &GainTable<S>,
    config: &EllipsoidConfig,
) -> Result<DualState<S>> {
    let k = table.receivers;
    if k == 0 {
        return Err(Error::invalid(
            "receivers",
            "at least one receiver required",
        ));
    }
    let tie = S::lit(config.tie_tolerance);
    let p = table.tx_power;
    let mut pool = Pool::new();

    if k == 1 {
        let w = DualWeights::new(vec![S::one()])?;
        let m = grid_argmax(&w, table, tie);
        check_finite(&m, &w)?;
        pool.add_all(table, &m);
        return Ok(DualState {
            center: vec![],
            shape: vec![],
            best_value: m.value,
            best_weights: w.clone(),
            candidate_pool: pool.entries,
            iteration: 0,
            best_history: vec![m.value],
            trace: vec![TraceRow {
                iteration: 0,
                lambda: w.as_slice().to_vec(),
                value: m.value,
                maximizer: m.point,
            }],
        });
    }

    let n = k - 1;
    let nf = S::lit(n as f64);
    let mut center = vec![S::one() / S::lit(k as f64); n];
    let mut shape = vec![S::zero(); n * n];
    for i in 0..n {
        shape[i * n + i] = S::one();
    }

    let max_iters = config.iteration_limit(k);
    let stall_tol = S::lit(config.stall_tolerance);
    let mut best_gain = S::infinity();
    let mut best_weights = DualWeights::uniform(k);
    let mut reference = S::infinity();
    let mut last_improvement = 0usize;
    let mut history = Vec::new();
    let mut trace = Vec::new();
    let mut iteration = 0usize;

    while iteration < max_iters {
        let head: S = center.iter().copied().sum();
        let most_negative = center
            .iter()
            .enumerate()
            .filter(|(_, c)| **c < S::zero())
            .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite centre"))
            .map(|(i, _)| i);

        let cut: Vec<S> = if let Some(i) = most_negative {
            // keep λ_i ≥ 0
            let mut g = vec![S::zero(); n];
            g[i] = -S::one();
            g
        } else if head > S::one() {
            // keep Σ_{k<K} λ_k ≤ 1
            vec![S::one(); n]
        } else {
            let weights = DualWeights::from_reduced(&center);
            let m = grid_argmax(&weights, table, tie);
            check_finite(&m, &weights)?;
            pool.add_all(table, &m);
            if m.gain_value < best_gain {
                best_gain = m.gain_value;
                best_weights = weights.clone();
            }
            if m.gain_value < reference * (S::one() - stall_tol) {
                reference = m.gain_value;
                last_improvement = iteration;
            }
            history.push(best_gain * p);
            trace.push(TraceRow {
                iteration,
                lambda: weights.as_slice().to_vec(),
                value: m.value,
                maximizer: m.point,
            });
            let sub = reduced_subgradient(table.gains(m.index));
            if sub.iter().all(|s| *s == S::zero()) {
                // centre minimises g exactly
                iteration += 1;
                break;
            }
            sub
        };

        // b = P g / sqrt(gᵀ P g)
        let pg: Vec<S> = (0..n)
            .map(|i| (0..n).fold(S::zero(), |acc, j| acc + shape[i * n + j] * cut[j]))
            .collect();
        let gpg = cut
            .iter()
            .zip(&pg)
            .fold(S::zero(), |acc, (g, v)| acc + *g * *v);
        if !(gpg > S::zero()) || !gpg.is_finite() {
            iteration += 1;
            break;
        }
        let root = gpg.sqrt();
        let b: Vec<S> = pg.iter().map(|v| *v / root).collect();

        if n == 1 {
            // In one dimension the update is plain bisection.
            center[0] = center[0] - b[0] / S::lit(2.0);
            shape[0] = shape[0] / S::lit(4.0);
        } else {
            let step = S::one() / (nf + S::one());
            for (c, bi) in center.iter_mut().zip(&b) {
                *c = *c - step * *bi;
            }
            let scale = nf * nf / (nf * nf - S::one());
            let two_step = S::lit(2.0) * step;
            for i in 0..n {
                for j in 0..n {
                    shape[i * n + j] = scale * (shape[i * n + j] - two_step * b[i] * b[j]);
                }
            }
            for i in 0..n {
                for j in (i + 1)..n {
                    let avg = (shape[i * n + j] + shape[j * n + i]) / S::lit(2.0);
                    shape[i * n + j] = avg;
                    shape[j * n + i] = avg;
                }
            }
        }

        iteration += 1;
        if !history.is_empty() && iteration - last_improvement >= config.stall_window {
            break;
        }
    }

    if history.is_empty() {
        return Err(Error::solver(
            "ellipsoid method never reached a feasible centre",
        ));
    }

    Ok(DualState {
        center,
        shape,
        best_value: best_gain * p,
        best_weights,
        candidate_pool: pool.entries,
        iteration,
        best_history: history,
        trace,
    })
}

/// Hover locations for the time-sharing step together with their worst-case
/// power matrix (`power_matrix[γ][k]`, watts).
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet<S> {
    pub locations: Vec<Point2<S>>,
    pub power_matrix: Vec<Vec<S>>,
}

impl<S: Scalar> CandidateSet<S> {
    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }
}

/// Greedy merge of points closer than `min_separation`: visits points by
/// descending value (ties by input order) and keeps a point only if no kept
/// point lies within `min_separation`. Returns kept input positions in input
/// order.
pub fn merge_close_points<S: Scalar>(points: &[(Point2<S>, S)], min_separation: S) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[b]
            .1
            .partial_cmp(&points[a].1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        if kept
            .iter()
            .all(|&j| points[j].0.distance(&points[i].0) >= min_separation)
        {
            kept.push(i);
        }
    }
    kept.sort_unstable();
    kept
}

/// Near-optimal grid points at the best weights, merged with the pool
/// harvested during the search.
pub fn extract_candidates<S: Scalar>(
    state: &DualState<S>,
    table: &GainTable<S>,
    tie_tolerance: S,
) -> CandidateSet<S> {
    let best = grid_argmax(&state.best_weights, table, tie_tolerance);
    let mut indices: Vec<usize> = best.near_optimal.clone();
    indices.push(best.index);
    indices.extend(state.candidate_pool.iter().map(|e| e.index));
    indices.sort_unstable();
    indices.dedup();

    let w = state.best_weights.as_slice();
    let scored: Vec<(Point2<S>, S)> = indices
        .iter()
        .map(|&i| (table.points[i], table.weighted_gain(w, i)))
        .collect();
    let kept = merge_close_points(&scored, table.grid.resolution / S::lit(2.0));
    let kept: Vec<usize> = kept.into_iter().map(|pos| indices[pos]).collect();

    CandidateSet {
        locations: kept.iter().map(|&i| table.points[i]).collect(),
        power_matrix: kept.iter().map(|&i| table.powers(i)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{ChannelParams, Obstacle};

    fn open_field() -> ChannelModel<f64> {
        ChannelModel::SegmentedRadioMap {
            obstacles: vec![],
            params: ChannelParams::default(),
        }
    }

    fn rx(x: f64, y: f64, eps: f64) -> UncertainReceiver<f64> {
        UncertainReceiver::new(Point2::new(x, y), eps).unwrap()
    }

    fn table(model: &ChannelModel<f64>, rs: &[UncertainReceiver<f64>], res: f64) -> GainTable<f64> {
        let grid = SearchGrid::around(rs, 2.0, res).unwrap();
        GainTable::build(model, rs, 5.0, 10.0, grid)
    }

    #[test]
    fn grid_indexing_is_lexicographic() {
        let g = SearchGrid::new(0.0, 1.0, 0.0, 0.5, 0.25).unwrap();
        assert_eq!((g.nx(), g.ny()), (5, 3));
        let pts = g.points();
        for w in pts.windows(2) {
            assert!((w[0].x, w[0].y) < (w[1].x, w[1].y));
        }
        assert_eq!(pts[14], Point2::new(1.0, 0.5));
    }

    #[test]
    fn invalid_grid_and_weights() {
        assert!(SearchGrid::new(1.0, 0.0, 0.0, 1.0, 0.1).is_err());
        assert!(SearchGrid::new(0.0, 1.0, 0.0, 1.0, 0.0).is_err());
        assert!(DualWeights::new(vec![0.5, 0.4]).is_err());
        assert!(DualWeights::new(vec![1.2, -0.2]).is_err());
        assert!(DualWeights::new(vec![0.25, 0.75]).is_ok());
    }

    #[test]
    fn weighted_objective_single_and_zero_weights() {
        let m = open_field();
        let q = Point2::new(0.3, -1.0);
        let one = DualWeights::new(vec![1.0]).unwrap();
        let r1 = rx(0.0, 0.0, 1.0);
        let v = weighted_objective(&one, q, &m, &[r1], 5.0, 10.0);
        assert_eq!(v, closed_form_power(&m, q, 5.0, &r1, 10.0));

        let w = DualWeights::new(vec![1.0, 0.0]).unwrap();
        let a = weighted_objective(&w, q, &m, &[r1, rx(3.0, 0.0, 1.0)], 5.0, 10.0);
        let b = weighted_objective(&w, q, &m, &[r1, rx(-9.0, 4.0, 1.0)], 5.0, 10.0);
        assert_eq!(a, b);

        let half = DualWeights::new(vec![0.5, 0.5]).unwrap();
        let rs = [rx(-2.0, 0.0, 1.0), rx(2.0, 0.0, 1.0)];
        let mid = Point2::new(0.0, 0.0);
        let v = weighted_objective(&half, mid, &m, &rs, 5.0, 10.0);
        assert!((v - closed_form_power(&m, mid, 5.0, &rs[0], 10.0)).abs() < 1e-18);
    }

    #[test]
    fn single_receiver_argmax_is_receiver() {
        let rs = [rx(1.0, 0.5, 1.0)];
        let t = table(&open_field(), &rs, 0.25);
        let m = grid_argmax(&DualWeights::new(vec![1.0]).unwrap(), &t, 1e-6);
        assert_eq!(m.point, Point2::new(1.0, 0.5));
        assert_eq!(m.near_optimal, vec![m.index]);
        // Fine-resolution brute force with direct evaluation agrees.
        let m0 = open_field();
        let mut best = (f64::NEG_INFINITY, Point2::new(0.0, 0.0));
        for i in -40..=40 {
            for j in -40..=40 {
                let q = Point2::new(1.0 + i as f64 * 0.05, 0.5 + j as f64 * 0.05);
                let v = closed_form_power(&m0, q, 5.0, &rs[0], 10.0);
                if v > best.0 {
                    best = (v, q);
                }
            }
        }
        assert!(best.1.distance(&rs[0].approx) < 1e-9);
        assert!((m.value - best.0).abs() / best.0 < 1e-12);
    }

    #[test]
    fn ties_break_to_smallest_xy() {
        // Receiver halfway between two grid columns.
        let rs = [rx(0.125, 0.0, 0.5)];
        let grid = SearchGrid::new(-1.0, 1.0, -1.0, 1.0, 0.25).unwrap();
        let t = GainTable::build(&open_field(), &rs, 5.0, 10.0, grid);
        let m = grid_argmax(&DualWeights::new(vec![1.0]).unwrap(), &t, 1e-6);
        assert_eq!(m.point, Point2::new(0.0, 0.0));
        assert!(m.near_optimal.len() >= 2);
        assert!(m.near_optimal.contains(&m.index));
    }

    #[test]
    fn wall_pushes_maximizer_off_the_midpoint() {
        let wall = Obstacle::new(-0.5, 0.5, -1.0, 1.0, 4.5).unwrap();
        let m = ChannelModel::SegmentedRadioMap {
            obstacles: vec![wall],
            params: ChannelParams::default(),
        };
        let rs = [rx(-2.0, 0.0, 1.0), rx(2.0, 0.0, 1.0)];
        let t = table(&m, &rs, 0.25);
        let half = DualWeights::uniform(2);
        let best = grid_argmax(&half, &t, 1e-6);
        let mid = weighted_objective(&half, Point2::new(0.0, 0.0), &m, &rs, 5.0, 10.0);
        assert!(best.point.y.abs() > 1.0, "maximizer {:?}", best.point);
        assert!(best.value > 10.0 * mid);
    }

    #[test]
    fn dual_value_on_unit_weights_decouples() {
        let rs = [rx(-3.0, 0.0, 1.0), rx(3.0, 1.0, 1.0)];
        let t = table(&open_field(), &rs, 0.25);
        for k in 0..2 {
            let v = dual_value(&DualWeights::unit(k, 2), &t);
            let single = closed_form_power(&open_field(), rs[k].approx, 5.0, &rs[k], 10.0);
            assert!((v - single).abs() / single < 1e-12);
        }
    }

    #[test]
    fn subgradient_examples() {
        let rs = [rx(-6.0, 0.0, 1.0), rx(6.0, 0.0, 1.0)];
        let t = table(&open_field(), &rs, 0.25);
        let s = dual_subgradient(&DualWeights::unit(0, 2), &t);
        assert_eq!(s.len(), 1);
        assert!(s[0] > 0.0);

        let one = table(&open_field(), &rs[..1], 0.25);
        assert!(dual_subgradient(&DualWeights::new(vec![1.0]).unwrap(), &one).is_empty());

        // Symmetric pair close enough that the midpoint wins: equal powers.
        let close = [rx(-0.5, 0.0, 0.0), rx(0.5, 0.0, 0.0)];
        let t = table(&open_field(), &close, 0.25);
        let s = dual_subgradient(&DualWeights::uniform(2), &t);
        assert_eq!(s[0], 0.0);
    }

    #[test]
    fn ellipsoid_single_receiver_short_circuits() {
        let rs = [rx(0.0, 0.0, 1.0)];
        let t = table(&open_field(), &rs, 0.25);
        let st = ellipsoid_minimize(&t, &EllipsoidConfig::default()).unwrap();
        assert_eq!(st.iteration, 0);
        assert_eq!(st.best_weights.as_slice(), &[1.0]);
        let c = extract_candidates(&st, &t, 1e-6);
        assert_eq!(c.locations, vec![Point2::new(0.0, 0.0)]);
    }

    fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        let r = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let c = b - r * (b - a);
            let d = a + r * (b - a);
            if f(c) <= f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        (a + b) / 2.0
    }

    #[test]
    fn ellipsoid_symmetric_pair_finds_half_weights() {
        let rs = [rx(-4.0, 0.0, 1.0), rx(4.0, 0.0, 1.0)];
        let t = table(&open_field(), &rs, 0.25);
        let st = ellipsoid_minimize(&t, &EllipsoidConfig::default()).unwrap();
        let lam = st.best_weights.as_slice()[0];
        let oracle = golden_section(
            |l| dual_value(&DualWeights::new(vec![l, 1.0 - l]).unwrap(), &t),
            0.0,
            1.0,
        );
        assert!((oracle - 0.5).abs() < 1e-3);
        assert!(
            (lam - oracle).abs() < 1e-3,
            "lambda {lam} vs oracle {oracle}"
        );
        for w in st.best_history.windows(2) {
            assert!(w[1] <= w[0]);
        }
        let c = extract_candidates(&st, &t, 1e-6);
        assert!(c.len() >= 2);
        assert!(c.locations.contains(&Point2::new(-4.0, 0.0)));
        assert!(c.locations.contains(&Point2::new(4.0, 0.0)));
    }

    #[test]
    fn close_points_are_merged() {
        let pts = vec![
            (Point2::new(0.0, 0.0), 1.0),
            (Point2::new(0.05, 0.0), 2.0),
            (Point2::new(1.0, 0.0), 0.5),
        ];
        assert_eq!(merge_close_points(&pts, 0.125), vec![1, 2]);
    }
}
