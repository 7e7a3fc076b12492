use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Relation};

/// Largest accepted gap between the two certified bounds.
pub const GAP_TOL: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct MatrixGameSolution {
    pub value: f64,
    pub row_strategy: Vec<f64>,
    pub col_strategy: Vec<f64>,
    /// `max_i (A q)_i − min_j (pᵀA)_j` for the returned strategies `p, q`.
    pub gap: f64,
}

/// Minimax value of the zero-sum game where the row player receives `a[i][j]`.
///
/// Shifts the matrix to be strictly positive and solves the column player's
/// LP `max Σw s.t. A'w ≤ 1`. The row strategy is read off the duals.
pub fn solve_matrix_game(a: &[Vec<f64>]) -> Result<MatrixGameSolution> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 || a.iter().any(|r| r.len() != cols) {
        return Err(Error::Dimension(
            "payoff matrix must be a non-empty rectangle".into(),
        ));
    }
    if a.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "payoff matrix has non-finite entries".into(),
        ));
    }
    let min = a.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let max = a
        .iter()
        .flatten()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if max - min < 1e-15 {
        return Ok(MatrixGameSolution {
            value: min,
            row_strategy: point_mass(rows, 0),
            col_strategy: point_mass(cols, 0),
            gap: 0.0,
        });
    }
    // Scale to a range of roughly 1 so that the tableau is well conditioned.
    let scale = max - min;
    let mut lp = LinearProgram::maximize(vec![1.0; cols]);
    for row in a {
        lp.add(
            row.iter().map(|v| (v - min) / scale + 1.0).collect(),
            Relation::Le,
            1.0,
        );
    }
    let sol = lp.solve()?;
    let total: f64 = sol.x.iter().sum();
    let col_strategy = normalized(&sol.x);
    let row_strategy = normalized(&sol.duals.iter().map(|d| d.max(0.0)).collect::<Vec<_>>());
    let value = (1.0 / total - 1.0) * scale + min;

    let lower = (0..cols)
        .map(|j| (0..rows).map(|i| row_strategy[i] * a[i][j]).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    let upper = a
        .iter()
        .map(|r| r.iter().zip(&col_strategy).map(|(v, q)| v * q).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    let gap = upper - lower;
    if gap > GAP_TOL * scale.max(1.0) {
        return Err(Error::Residual { gap, lower, upper });
    }
    Ok(MatrixGameSolution {
        value,
        row_strategy,
        col_strategy,
        gap: gap.max(0.0),
    })
}

fn point_mass(len: usize, at: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    v[at] = 1.0;
    v
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let clipped: Vec<f64> = v.iter().map(|x| x.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= 0.0 {
        return point_mass(v.len(), 0);
    }
    clipped.iter().map(|x| x / total).collect()
}
