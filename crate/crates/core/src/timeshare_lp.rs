//! Hover-time allocation over a fixed set of candidate locations.
//!
//! ```txt
//!     maximize   E
//!     subject to Σ_γ τ_γ P[γ][k] ≥ E    for every receiver k
//!                Σ_γ τ_γ = T,  τ ≥ 0,  E ≥ 0
//! ```
//!
//! Solved with a dense two-phase simplex (Bland's rule) after scaling powers
//! by their maximum and time by `T`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct TimeShareProblem<S> {
    /// `power_matrix[γ][k]`: power receiver `k` collects while hovering at
    /// candidate `γ`, watts.
    pub power_matrix: Vec<Vec<S>>,
    pub total_time: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeShareSolution<S> {
    pub durations: Vec<S>,
    pub energy: S,
}

impl<S: Scalar> TimeShareProblem<S> {
    pub fn new(power_matrix: Vec<Vec<S>>, total_time: S) -> Result<Self> {
        let p = Self {
            power_matrix,
            total_time,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.power_matrix.is_empty() {
            return Err(Error::invalid(
                "power_matrix",
                "need at least one candidate",
            ));
        }
        let k = self.power_matrix[0].len();
        if k == 0 {
            return Err(Error::invalid("power_matrix", "need at least one receiver"));
        }
        for (g, row) in self.power_matrix.iter().enumerate() {
            if row.len() != k {
                return Err(Error::invalid(format!("power_matrix[{g}]"), "ragged row"));
            }
            if row.iter().any(|v| !(*v >= S::zero()) || !v.is_finite()) {
                return Err(Error::invalid(
                    format!("power_matrix[{g}]"),
                    "entries must be finite and >= 0",
                ));
            }
        }
        if !(self.total_time > S::zero()) || !self.total_time.is_finite() {
            return Err(Error::invalid("total_time", "must be finite and > 0"));
        }
        Ok(())
    }

    pub fn candidates(&self) -> usize {
        self.power_matrix.len()
    }

    pub fn receivers(&self) -> usize {
        self.power_matrix[0].len()
    }

    fn max_entry(&self) -> S {
        self.power_matrix
            .iter()
            .flatten()
            .fold(S::zero(), |m, v| m.max(*v))
    }

    fn normalized(&self) -> (Vec<Vec<S>>, S) {
        let scale = self.max_entry();
        let m = self
            .power_matrix
            .iter()
            .map(|row| row.iter().map(|v| *v / scale).collect())
            .collect();
        (m, scale)
    }
}

impl<S: Scalar> TimeShareSolution<S> {
    /// Energy each receiver collects under these durations.
    pub fn receiver_energies(&self, problem: &TimeShareProblem<S>) -> Vec<S> {
        (0..problem.receivers())
            .map(|k| {
                self.durations
                    .iter()
                    .zip(&problem.power_matrix)
                    .map(|(t, row)| *t * row[k])
                    .sum()
            })
            .collect()
    }
}

fn all_zero_solution<S: Scalar>(problem: &TimeShareProblem<S>) -> TimeShareSolution<S> {
    let mut durations = vec![S::zero(); problem.candidates()];
    durations[0] = problem.total_time;
    TimeShareSolution {
        durations,
        energy: S::zero(),
    }
}

pub fn solve_timeshare<S: Scalar>(problem: &TimeShareProblem<S>) -> Result<TimeShareSolution<S>> {
    problem.validate()?;
    let (gains, scale) = problem.normalized();
    if scale == S::zero() {
        return Ok(all_zero_solution(problem));
    }
    let n_cand = problem.candidates();
    let k = problem.receivers();
    let e_col = n_cand;

    let mut objective = vec![S::zero(); n_cand + 1];
    objective[e_col] = S::one();
    let mut rows = Vec::with_capacity(k + 1);
    for r in 0..k {
        let mut coeffs: Vec<S> = gains.iter().map(|row| -row[r]).collect();
        coeffs.push(S::one());
        rows.push(Constraint {
            coeffs,
            relation: Relation::Le,
            rhs: S::zero(),
        });
    }
    let mut total = vec![S::one(); n_cand];
    total.push(S::zero());
    rows.push(Constraint {
        coeffs: total,
        relation: Relation::Eq,
        rhs: S::one(),
    });

    let x = simplex::maximize(&objective, &rows)?;
    let durations = x[..n_cand]
        .iter()
        .map(|t| t.max(S::zero()) * problem.total_time)
        .collect();
    Ok(TimeShareSolution {
        durations,
        energy: x[e_col].max(S::zero()) * problem.total_time * scale,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub(crate) struct Constraint<S> {
    pub coeffs: Vec<S>,
    pub relation: Relation,
    pub rhs: S,
}

pub(crate) mod simplex {
    //! Dense tableau two-phase simplex for `max cᵀx, rows, x ≥ 0`.

    use super::{Constraint, Relation};
    use crate::error::{Error, Result};
    use crate::scalar::Scalar;

    struct Tableau<S> {
        /// `m × (cols + 1)`, last column is the right-hand side.
        a: Vec<Vec<S>>,
        basis: Vec<usize>,
        cols: usize,
    }

    impl<S: Scalar> Tableau<S> {
        fn rhs(&self, i: usize) -> S {
            self.a[i][self.cols]
        }

        fn pivot(&mut self, row: usize, col: usize) {
            let p = self.a[row][col];
            for v in self.a[row].iter_mut() {
                *v = *v / p;
            }
            let pivot_row = self.a[row].clone();
            for (i, r) in self.a.iter_mut().enumerate() {
                if i == row {
                    continue;
                }
                let f = r[col];
                if f != S::zero() {
                    for (v, pv) in r.iter_mut().zip(&pivot_row) {
                        *v = *v - f * *pv;
                    }
                    r[col] = S::zero();
                }
            }
            self.basis[row] = col;
        }

        fn reduced_cost(&self, cost: &[S], j: usize) -> S {
            let cb = self
                .basis
                .iter()
                .zip(&self.a)
                .fold(S::zero(), |acc, (&b, r)| acc + cost[b] * r[j]);
            cost[j] - cb
        }

        fn objective(&self, cost: &[S]) -> S {
            self.basis
                .iter()
                .enumerate()
                .fold(S::zero(), |acc, (i, &b)| acc + cost[b] * self.rhs(i))
        }

        /// Runs simplex iterations with Bland's rule until no allowed column
        /// has a positive reduced cost.
        fn optimize(&mut self, cost: &[S], allowed: &[bool]) -> Result<()> {
            let rc_tol = S::tol(1e-10);
            let piv_tol = S::tol(1e-12);
            let limit = 100 * (self.cols + self.a.len()) + 1000;
            for _ in 0..limit {
                let entering = (0..self.cols)
                    .filter(|&j| allowed[j] && !self.basis.contains(&j))
                    .find(|&j| self.reduced_cost(cost, j) > rc_tol);
                let Some(col) = entering else {
                    return Ok(());
                };
                let mut leave: Option<(usize, S)> = None;
                let mut tiny_positive = false;
                for i in 0..self.a.len() {
                    let v = self.a[i][col];
                    if v > piv_tol {
                        let ratio = self.rhs(i).max(S::zero()) / v;
                        leave = match leave {
                            None => Some((i, ratio)),
                            Some((li, lr)) => {
                                let tie = (ratio - lr).abs() <= piv_tol * (S::one() + lr.abs());
                                if ratio < lr && !tie || tie && self.basis[i] < self.basis[li] {
                                    Some((i, ratio))
                                } else {
                                    Some((li, lr))
                                }
                            }
                        };
                    } else if v > S::zero() {
                        tiny_positive = true;
                    }
                }
                match leave {
                    Some((row, _)) => self.pivot(row, col),
                    None if tiny_positive => {
                        return Err(Error::solver(format!(
                            "numerically singular basis: no usable pivot in column {col}"
                        )))
                    }
                    None => return Err(Error::solver("linear program is unbounded")),
                }
            }
            Err(Error::solver("simplex iteration limit reached"))
        }
    }

    pub(crate) fn maximize<S: Scalar>(objective: &[S], rows: &[Constraint<S>]) -> Result<Vec<S>> {
        let n = objective.len();
        let m = rows.len();
        // Flip rows so every right-hand side is non-negative.
        let rows: Vec<Constraint<S>> = rows
            .iter()
            .map(|r| {
                if r.rhs < S::zero() {
                    Constraint {
                        coeffs: r.coeffs.iter().map(|c| -*c).collect(),
                        relation: match r.relation {
                            Relation::Le => Relation::Ge,
                            Relation::Ge => Relation::Le,
                            Relation::Eq => Relation::Eq,
                        },
                        rhs: -r.rhs,
                    }
                } else {
                    r.clone()
                }
            })
            .collect();

        let n_slack = rows.iter().filter(|r| r.relation != Relation::Eq).count();
        let n_art = rows.iter().filter(|r| r.relation != Relation::Le).count();
        let cols = n + n_slack + n_art;
        let mut a = vec![vec![S::zero(); cols + 1]; m];
        let mut basis = vec![0usize; m];
        let mut is_art = vec![false; cols];
        let (mut next_slack, mut next_art) = (n, n + n_slack);
        for (i, r) in rows.iter().enumerate() {
            a[i][..n].copy_from_slice(&r.coeffs);
            a[i][cols] = r.rhs;
            match r.relation {
                Relation::Le => {
                    a[i][next_slack] = S::one();
                    basis[i] = next_slack;
                    next_slack += 1;
                }
                Relation::Ge => {
                    a[i][next_slack] = -S::one();
                    next_slack += 1;
                    a[i][next_art] = S::one();
                    basis[i] = next_art;
                    is_art[next_art] = true;
                    next_art += 1;
                }
                Relation::Eq => {
                    a[i][next_art] = S::one();
                    basis[i] = next_art;
                    is_art[next_art] = true;
                    next_art += 1;
                }
            }
        }
        let mut t = Tableau { a, basis, cols };

        if n_art > 0 {
            let phase1: Vec<S> = is_art
                .iter()
                .map(|&x| if x { -S::one() } else { S::zero() })
                .collect();
            t.optimize(&phase1, &vec![true; cols])?;
            let infeasibility = -t.objective(&phase1);
            if infeasibility > S::tol(1e-9) {
                return Err(Error::solver(format!(
                    "linear program is infeasible (residual {infeasibility})"
                )));
            }
            // Drive zero-level artificials out of the basis where possible;
            // rows where that fails are redundant.
            for i in 0..m {
                if is_art[t.basis[i]] {
                    let col = (0..cols).filter(|&j| !is_art[j]).max_by(|&x, &y| {
                        t.a[i][x]
                            .abs()
                            .partial_cmp(&t.a[i][y].abs())
                            .unwrap_or(std::cmp::Ordering::Equal)
                            .then(y.cmp(&x))
                    });
                    if let Some(j) = col {
                        if t.a[i][j].abs() > S::tol(1e-12) {
                            t.pivot(i, j);
                        }
                    }
                }
            }
        }

        let mut cost = vec![S::zero(); cols];
        cost[..n].copy_from_slice(objective);
        let allowed: Vec<bool> = is_art.iter().map(|x| !x).collect();
        t.optimize(&cost, &allowed)?;

        let mut x = vec![S::zero(); n];
        for (i, &b) in t.basis.iter().enumerate() {
            if b < n {
                x[b] = t.rhs(i);
            }
        }
        Ok(x)
    }
}

/// Largest `Γ + 1` the vertex oracle accepts.
pub const ORACLE_MAX_COLUMNS: usize = 12;

/// Solves `B x = b` by Gaussian elimination with partial pivoting.
fn solve_dense<S: Scalar>(mut b_mat: Vec<Vec<S>>, mut rhs: Vec<S>) -> Option<Vec<S>> {
    let m = rhs.len();
    for c in 0..m {
        let p = (c..m).max_by(|&x, &y| {
            b_mat[x][c]
                .abs()
                .partial_cmp(&b_mat[y][c].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if b_mat[p][c].abs() < S::tol(1e-12) {
            return None;
        }
        b_mat.swap(c, p);
        rhs.swap(c, p);
        for r in (c + 1)..m {
            let f = b_mat[r][c] / b_mat[c][c];
            for j in c..m {
                b_mat[r][j] = b_mat[r][j] - f * b_mat[c][j];
            }
            rhs[r] = rhs[r] - f * rhs[c];
        }
    }
    let mut x = vec![S::zero(); m];
    for c in (0..m).rev() {
        let s = ((c + 1)..m).fold(rhs[c], |acc, j| acc - b_mat[c][j] * x[j]);
        x[c] = s / b_mat[c][c];
    }
    Some(x)
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let m = idx.len();
    for i in (0..m).rev() {
        if idx[i] < n - m + i {
            idx[i] += 1;
            for j in (i + 1)..m {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Exhaustive basic-feasible-solution enumeration of the time-sharing LP in
/// standard form. Test oracle for [`solve_timeshare`]; desk scale only.
pub fn vertex_enumeration_oracle<S: Scalar>(
    problem: &TimeShareProblem<S>,
) -> Result<TimeShareSolution<S>> {
    problem.validate()?;
    let n_cand = problem.candidates();
    if n_cand + 1 > ORACLE_MAX_COLUMNS {
        return Err(Error::invalid(
            "power_matrix",
            format!("oracle limited to {} candidates", ORACLE_MAX_COLUMNS - 1),
        ));
    }
    let (gains, scale) = problem.normalized();
    if scale == S::zero() {
        return Ok(all_zero_solution(problem));
    }
    let k = problem.receivers();
    // Columns: τ_1..τ_Γ, E, s_1..s_K. Rows: K receiver equalities, then Σ τ = 1.
    let n_var = n_cand + 1 + k;
    let m = k + 1;
    let column = |j: usize| -> Vec<S> {
        let mut col = vec![S::zero(); m];
        if j < n_cand {
            for (r, c) in col.iter_mut().take(k).enumerate() {
                *c = gains[j][r];
            }
            col[k] = S::one();
        } else if j == n_cand {
            for c in col.iter_mut().take(k) {
                *c = -S::one();
            }
        } else {
            col[j - n_cand - 1] = -S::one();
        }
        col
    };
    let mut rhs = vec![S::zero(); m];
    rhs[k] = S::one();

    let feas_tol = S::tol(1e-10);
    let mut best: Option<(S, Vec<S>)> = None;
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        let cols: Vec<Vec<S>> = idx.iter().map(|&j| column(j)).collect();
        let b_mat: Vec<Vec<S>> = (0..m)
            .map(|r| cols.iter().map(|c| c[r]).collect())
            .collect();
        if let Some(x) = solve_dense(b_mat, rhs.clone()) {
            if x.iter().all(|v| *v >= -feas_tol) {
                let mut full = vec![S::zero(); n_var];
                for (&j, v) in idx.iter().zip(&x) {
                    full[j] = v.max(S::zero());
                }
                let e = full[n_cand];
                if best.as_ref().is_none_or(|(be, _)| e > *be) {
                    best = Some((e, full));
                }
            }
        }
        if !next_combination(&mut idx, n_var) {
            break;
        }
    }
    let (e, full) = best.ok_or_else(|| Error::solver("no basic feasible solution found"))?;
    Ok(TimeShareSolution {
        durations: full[..n_cand]
            .iter()
            .map(|t| *t * problem.total_time)
            .collect(),
        energy: e * problem.total_time * scale,
    })
}
