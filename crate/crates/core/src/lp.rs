//! Dense two-phase simplex.
//!
//! Small-to-medium linear programs in the form
//!
//! ```text
//! maximize    c^T v
//! subject to  a_i^T v (<= | >= | =) b_i
//!             v >= 0
//! ```
//!
//! solved on a dense tableau. Pricing is Dantzig's rule; after a run of
//! degenerate pivots the solver switches to Bland's rule until progress
//! resumes, which rules out cycling.

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;
const DEGENERATE_RUN: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("infeasible (phase one residual {residual:.3e})")]
    Infeasible { residual: f64 },
    #[error("unbounded")]
    Unbounded,
    #[error("iteration limit {0} reached")]
    IterationLimit(usize),
    #[error("constraint {row} has {got} coefficients, expected {expected}")]
    Shape {
        row: usize,
        got: usize,
        expected: usize,
    },
}

#[derive(Clone, Debug)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Shadow prices: the sensitivity of the optimum to each right-hand side,
    /// in the orientation the constraint was given. Nonnegative for `Le`
    /// rows and nonpositive for `Ge` rows of a maximization.
    pub duals: Vec<f64>,
    pub iterations: usize,
}

impl LinearProgram {
    /// A maximization of `objective · v` over `v >= 0`.
    pub fn maximize(objective: Vec<f64>) -> Self {
        LinearProgram {
            num_vars: objective.len(),
            objective,
            constraints: Vec::new(),
        }
    }

    /// A minimization, stored as maximization of the negated objective.
    /// [`LpSolution::objective`] is reported for the negated problem.
    pub fn minimize(objective: Vec<f64>) -> Self {
        Self::maximize(objective.into_iter().map(|c| -c).collect())
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn add(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        for (row, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != self.num_vars {
                return Err(LpError::Shape {
                    row,
                    got: c.coeffs.len(),
                    expected: self.num_vars,
                });
            }
        }
        Tableau::build(self).run(&self.objective)
    }
}

struct Tableau {
    rows: usize,
    /// Structural + slack/surplus + artificial columns (rhs excluded).
    cols: usize,
    width: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
    num_vars: usize,
    artificial_start: usize,
    /// Column holding `+e_i` in the initial tableau, per row.
    identity_col: Vec<usize>,
    /// Whether row `i` was negated during normalization.
    flipped: Vec<bool>,
    iterations: usize,
    max_iterations: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let m = lp.constraints.len();
        let n = lp.num_vars;

        let mut normalized: Vec<(Vec<f64>, Relation, f64, bool)> = lp
            .constraints
            .iter()
            .map(|c| {
                let flip = c.rhs < 0.0 || (c.rhs == 0.0 && c.relation == Relation::Ge);
                if flip {
                    let rel = match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (c.coeffs.iter().map(|a| -a).collect(), rel, -c.rhs, true)
                } else {
                    (c.coeffs.clone(), c.relation, c.rhs, false)
                }
            })
            .collect();

        let num_slack = normalized.iter().filter(|r| r.1 != Relation::Eq).count();
        let num_art = normalized.iter().filter(|r| r.1 != Relation::Le).count();
        let artificial_start = n + num_slack;
        let cols = artificial_start + num_art;
        let width = cols + 1;
        let mut data = vec![0.0; (m + 1) * width];
        let mut basis = vec![0; m];
        let mut identity_col = vec![0; m];
        let mut flipped = vec![false; m];

        let mut next_slack = n;
        let mut next_art = artificial_start;
        for (i, (coeffs, rel, rhs, flip)) in normalized.iter_mut().enumerate() {
            let row = &mut data[i * width..(i + 1) * width];
            row[..n].copy_from_slice(coeffs);
            row[cols] = *rhs;
            flipped[i] = *flip;
            match rel {
                Relation::Le => {
                    row[next_slack] = 1.0;
                    basis[i] = next_slack;
                    identity_col[i] = next_slack;
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -1.0;
                    next_slack += 1;
                    row[next_art] = 1.0;
                    basis[i] = next_art;
                    identity_col[i] = next_art;
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = 1.0;
                    basis[i] = next_art;
                    identity_col[i] = next_art;
                    next_art += 1;
                }
            }
        }

        Tableau {
            rows: m,
            cols,
            width,
            data,
            basis,
            num_vars: n,
            artificial_start,
            identity_col,
            flipped,
            iterations: 0,
            max_iterations: 200 * (m + cols) + 1000,
        }
    }

    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.width + c]
    }

    fn objective_row(&self) -> &[f64] {
        &self.data[self.rows * self.width..]
    }

    /// Loads cost vector `cost` (indexed by column) into the objective row,
    /// priced out against the current basis.
    fn set_costs(&mut self, cost: &[f64]) {
        let (m, w) = (self.rows, self.width);
        let mut obj = vec![0.0; w];
        for (j, o) in obj.iter_mut().enumerate().take(self.cols) {
            *o = -cost[j];
        }
        for i in 0..m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.data[i * w..(i + 1) * w];
                for (o, a) in obj.iter_mut().zip(row) {
                    *o += cb * a;
                }
            }
        }
        self.data[m * w..].copy_from_slice(&obj);
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width;
        let inv = 1.0 / self.at(pr, pc);
        {
            let row = &mut self.data[pr * w..(pr + 1) * w];
            for a in row.iter_mut() {
                *a *= inv;
            }
            row[pc] = 1.0;
        }
        let pivot_row: Vec<f64> = self.data[pr * w..(pr + 1) * w].to_vec();
        for r in 0..=self.rows {
            if r == pr {
                continue;
            }
            let factor = self.data[r * w + pc];
            if factor == 0.0 {
                continue;
            }
            let row = &mut self.data[r * w..(r + 1) * w];
            for (a, p) in row.iter_mut().zip(&pivot_row) {
                *a -= factor * p;
            }
            row[pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    /// Runs the simplex loop on the loaded objective row. Columns at or past
    /// `eligible_end` never enter the basis.
    fn optimize(&mut self, eligible_end: usize) -> Result<(), LpError> {
        let mut degenerate = 0usize;
        loop {
            if self.iterations >= self.max_iterations {
                return Err(LpError::IterationLimit(self.max_iterations));
            }
            let obj = self.objective_row();
            let bland = degenerate >= DEGENERATE_RUN;
            let mut entering = None;
            let mut best = -COST_TOL;
            for (j, &r) in obj.iter().enumerate().take(eligible_end) {
                if r < best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = r;
                }
            }
            let Some(pc) = entering else {
                return Ok(());
            };

            let rhs_col = self.cols;
            let mut leaving: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a > PIVOT_TOL {
                    let ratio = self.at(r, rhs_col).max(0.0) / a;
                    let better = match leaving {
                        None => true,
                        Some(l) => {
                            ratio < best_ratio - 1e-12
                                || (ratio <= best_ratio + 1e-12 && self.basis[r] < self.basis[l])
                        }
                    };
                    if better {
                        leaving = Some(r);
                        best_ratio = ratio;
                    }
                }
            }
            let Some(pr) = leaving else {
                return Err(LpError::Unbounded);
            };
            if best_ratio <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(pr, pc);
            self.iterations += 1;
        }
    }

    fn run(mut self, objective: &[f64]) -> Result<LpSolution, LpError> {
        let has_artificial = self.artificial_start < self.cols;
        if has_artificial {
            let mut cost = vec![0.0; self.cols];
            for c in cost.iter_mut().skip(self.artificial_start) {
                *c = -1.0;
            }
            self.set_costs(&cost);
            self.optimize(self.cols)?;
            let residual = -self.objective_row()[self.cols];
            let scale = 1.0
                + (0..self.rows)
                    .map(|r| self.at(r, self.cols).abs())
                    .fold(0.0, f64::max);
            if residual > FEAS_TOL * scale {
                return Err(LpError::Infeasible { residual });
            }
            // Drive zero-level artificials out of the basis where possible.
            for r in 0..self.rows {
                if self.basis[r] >= self.artificial_start {
                    let col = (0..self.artificial_start)
                        .filter(|&j| self.at(r, j).abs() > PIVOT_TOL)
                        .max_by(|&a, &b| self.at(r, a).abs().total_cmp(&self.at(r, b).abs()));
                    if let Some(j) = col {
                        self.pivot(r, j);
                    }
                }
            }
        }

        let mut cost = vec![0.0; self.cols];
        cost[..self.num_vars].copy_from_slice(objective);
        self.set_costs(&cost);
        self.optimize(self.artificial_start)?;

        let mut x = vec![0.0; self.num_vars];
        for r in 0..self.rows {
            let b = self.basis[r];
            if b < self.num_vars {
                x[b] = self.at(r, self.cols).max(0.0);
            }
        }
        let obj = self.objective_row();
        let duals = (0..self.rows)
            .map(|i| {
                let pi = obj[self.identity_col[i]];
                if self.flipped[i] {
                    -pi
                } else {
                    pi
                }
            })
            .collect();
        Ok(LpSolution {
            x,
            objective: obj[self.cols],
            duals,
            iterations: self.iterations,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn textbook_max() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36.
        let mut lp = LinearProgram::maximize(vec![3.0, 5.0]);
        lp.add(vec![1.0, 0.0], Relation::Le, 4.0)
            .add(vec![0.0, 2.0], Relation::Le, 12.0)
            .add(vec![3.0, 2.0], Relation::Le, 18.0);
        let s = lp.solve().unwrap();
        assert_abs_diff_eq!(s.objective, 36.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.x[0], 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.x[1], 6.0, epsilon = 1e-9);
        // Known shadow prices (0, 3/2, 1).
        assert_abs_diff_eq!(s.duals[0], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.duals[1], 1.5, epsilon = 1e-9);
        assert_abs_diff_eq!(s.duals[2], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + y s.t. x + 2y >= 4, x - y = 1 -> x = 2, y = 1, value 3.
        let mut lp = LinearProgram::minimize(vec![1.0, 1.0]);
        lp.add(vec![1.0, 2.0], Relation::Ge, 4.0)
            .add(vec![1.0, -1.0], Relation::Eq, 1.0);
        let s = lp.solve().unwrap();
        assert_abs_diff_eq!(-s.objective, 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.x[0], 2.0, epsilon = 1e-9);
        // d(max -x-y)/d(4) = -2/3.
        assert_abs_diff_eq!(s.duals[0], -2.0 / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn negative_rhs_is_normalized() {
        // max -x s.t. -x <= -3 (x >= 3).
        let mut lp = LinearProgram::maximize(vec![-1.0]);
        lp.add(vec![-1.0], Relation::Le, -3.0);
        let s = lp.solve().unwrap();
        assert_abs_diff_eq!(s.x[0], 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.duals[0], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::maximize(vec![1.0]);
        lp.add(vec![1.0], Relation::Le, 1.0)
            .add(vec![1.0], Relation::Ge, 2.0);
        assert!(matches!(lp.solve(), Err(LpError::Infeasible { .. })));

        let mut lp = LinearProgram::maximize(vec![1.0, 0.0]);
        lp.add(vec![0.0, 1.0], Relation::Le, 1.0);
        assert_eq!(lp.solve().unwrap_err(), LpError::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        // Two copies of the same equality leave a zero-level artificial behind.
        let mut lp = LinearProgram::maximize(vec![1.0, 2.0]);
        lp.add(vec![1.0, 1.0], Relation::Eq, 1.0)
            .add(vec![2.0, 2.0], Relation::Eq, 2.0);
        let s = lp.solve().unwrap();
        assert_abs_diff_eq!(s.objective, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Beale's cycling example (cycles under naive Dantzig pricing).
        let mut lp = LinearProgram::maximize(vec![0.75, -150.0, 0.02, -6.0]);
        lp.add(vec![0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0)
            .add(vec![0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0)
            .add(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0);
        let s = lp.solve().unwrap();
        assert_abs_diff_eq!(s.objective, 0.05, epsilon = 1e-9);
    }

    #[test]
    fn shape_mismatch() {
        let mut lp = LinearProgram::maximize(vec![1.0, 1.0]);
        lp.add(vec![1.0], Relation::Le, 1.0);
        assert!(matches!(lp.solve(), Err(LpError::Shape { .. })));
    }
}
