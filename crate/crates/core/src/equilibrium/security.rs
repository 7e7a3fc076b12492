//! The network security game.
//!
//! The state is a vertex `θ` drawn from the posterior `x`; the attacker picks
//! a vertex `a` and gains 1 if `{θ, a}` is an edge; the defender protects a
//! set `D` of `d` vertices and the attacker loses `ρ` for each of `θ, a` in
//! `D`. With a defender marginal `z` and attacker mix `y` the attacker's
//! expected payoff is `xᵀAy − ρ(zᵀx + zᵀy)`.
//!
//! Against a fixed `y` the defender protects the `d` largest entries of
//! `x + y`, so the subgame value is
//!
//! ```text
//! max_y  cᵀy − ρ·topd(x + y)      with c = xᵀA
//! ```
//!
//! and `topd(w) = min_{t ≥ 0, s ≥ 0, s_i ≥ w_i − t} d·t + Σ s_i`. Vertices
//! sharing the same `(x_j, c_j)` are interchangeable, and the objective is
//! concave, so some optimum is constant on each such class. The solver
//! therefore works with one `(y, s)` pair per class, weighted by the class
//! size.

use std::collections::HashMap;

use super::{decompose_matroid_point, solve_matrix_game, EquilibriumResult, SecurityGame};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::lp::{LinearProgram, Relation};

/// Largest accepted gap between the attacker's and the defender's certified
/// guarantees.
pub const SADDLE_TOL: f64 = 1e-7;

/// Enumeration is refused above this many defender pure strategies.
pub const MAX_DEFENDER_SETS: u64 = 100_000;

fn check_len(what: &str, v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::Dimension(format!(
            "{what} has length {}, expected {n}",
            v.len()
        )));
    }
    Ok(())
}

/// `xᵀAy − ρ(zᵀx + zᵀy)`.
pub fn security_payoff(g: &Graph, rho: f64, x: &[f64], y: &[f64], z: &[f64]) -> Result<f64> {
    let n = g.n();
    check_len("posterior", x, n)?;
    check_len("attacker strategy", y, n)?;
    check_len("defender marginal", z, n)?;
    let c = attack_scores(g, x);
    let hit: f64 = c.iter().zip(y).map(|(a, b)| a * b).sum();
    let guarded: f64 = z
        .iter()
        .zip(x.iter().zip(y))
        .map(|(zi, (xi, yi))| zi * (xi + yi))
        .sum();
    Ok(hit - rho * guarded)
}

/// `c_j = Σ_i x_i A_ij`, summed in increasing `i`.
pub fn attack_scores(g: &Graph, x: &[f64]) -> Vec<f64> {
    let mut c = vec![0.0; g.n()];
    for (i, &xi) in x.iter().enumerate() {
        if xi != 0.0 {
            for j in g.neighbors(i) {
                c[j] += xi;
            }
        }
    }
    c
}

/// Indices of the `d` largest entries of `w`, ties to the smaller index,
/// returned in increasing order.
pub fn top_d_indices(w: &[f64], d: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..w.len()).collect();
    idx.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
    idx.truncate(d);
    idx.sort_unstable();
    idx
}

/// Sum of the `d` largest entries of `w`.
pub fn topd_sum(w: &[f64], d: usize) -> f64 {
    top_d_indices(w, d).iter().map(|&i| w[i]).sum()
}

/// The defender's best reply: protect the `d` largest entries of `x + y`.
pub fn defender_best_response(x: &[f64], y: &[f64], d: usize) -> Result<Vec<usize>> {
    check_len("attacker strategy", y, x.len())?;
    let w: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
    Ok(top_d_indices(&w, d))
}

/// Attacker-side and defender-side guarantees of a candidate pair.
fn guarantees(c: &[f64], x: &[f64], y: &[f64], z: &[f64], rho: f64, d: usize) -> (f64, f64) {
    let w: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
    let attacker = c.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() - rho * topd_sum(&w, d);
    let best_reply = c
        .iter()
        .zip(z)
        .map(|(cj, zj)| cj - rho * zj)
        .fold(f64::NEG_INFINITY, f64::max);
    let defender = best_reply - rho * z.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    (attacker, defender)
}

/// Equilibrium of the subgame with posterior `x`, using the class reduction.
pub fn solve_security_subgame(game: &SecurityGame<'_>, x: &[f64]) -> Result<EquilibriumResult> {
    solve_with_classes(game, x, true)
}

/// Same as [`solve_security_subgame`] but with one LP column pair per vertex.
/// Kept as an independent check of the reduction.
pub fn solve_security_subgame_unreduced(
    game: &SecurityGame<'_>,
    x: &[f64],
) -> Result<EquilibriumResult> {
    solve_with_classes(game, x, false)
}

fn solve_with_classes(
    game: &SecurityGame<'_>,
    x: &[f64],
    reduce: bool,
) -> Result<EquilibriumResult> {
    let g = game.graph();
    let n = g.n();
    let (d, rho) = (game.budget(), game.reward());
    check_len("posterior", x, n)?;
    crate::error::check_distribution("posterior", x, crate::game::CONSTRUCT_TOL)?;
    let c = attack_scores(g, x);

    if rho == 0.0 {
        let best = (0..n).fold(0, |b, j| if c[j] > c[b] { j } else { b });
        let mut y = vec![0.0; n];
        y[best] = 1.0;
        return Ok(EquilibriumResult {
            value: c[best],
            attacker_strategy: y,
            // Defending earns nothing, so any d-set is a best response.
            defender_marginal: (0..n).map(|j| if j < d { 1.0 } else { 0.0 }).collect(),
            defender_decomposition: vec![(1.0, (0..d).collect())],
        });
    }

    // Group vertices by the exact bits of (x_j, c_j), in order of first index.
    let mut class_of = vec![0usize; n];
    let mut reps: Vec<usize> = Vec::new();
    let mut sizes: Vec<f64> = Vec::new();
    if reduce {
        let mut seen: HashMap<(u64, u64), usize> = HashMap::new();
        for j in 0..n {
            let key = (x[j].to_bits(), c[j].to_bits());
            let k = *seen.entry(key).or_insert_with(|| {
                reps.push(j);
                sizes.push(0.0);
                reps.len() - 1
            });
            class_of[j] = k;
            sizes[k] += 1.0;
        }
    } else {
        for (j, slot) in class_of.iter_mut().enumerate() {
            *slot = j;
            reps.push(j);
            sizes.push(1.0);
        }
    }
    let classes = reps.len();

    // Variables: y_0..y_K, s_0..s_K, t.
    let vars = 2 * classes + 1;
    let mut objective = vec![0.0; vars];
    for k in 0..classes {
        objective[k] = sizes[k] * c[reps[k]];
        objective[classes + k] = -rho * sizes[k];
    }
    objective[2 * classes] = -rho * d as f64;
    let mut lp = LinearProgram::maximize(objective);
    for k in 0..classes {
        let mut row = vec![0.0; vars];
        row[k] = -1.0;
        row[classes + k] = 1.0;
        row[2 * classes] = 1.0;
        lp.add(row, Relation::Ge, x[reps[k]]);
    }
    let mut mass = vec![0.0; vars];
    mass[..classes].copy_from_slice(&sizes);
    lp.add(mass, Relation::Eq, 1.0);
    let sol = lp.solve()?;

    let mut y: Vec<f64> = (0..n).map(|j| sol.x[class_of[j]].max(0.0)).collect();
    let total: f64 = y.iter().sum();
    y.iter_mut().for_each(|v| *v /= total);

    let mut z: Vec<f64> = (0..n)
        .map(|j| {
            let k = class_of[j];
            (-sol.duals[k] / (rho * sizes[k])).clamp(0.0, 1.0)
        })
        .collect();
    let zsum: f64 = z.iter().sum();
    if zsum > d as f64 {
        let f = d as f64 / zsum;
        z.iter_mut().for_each(|v| *v *= f);
    }

    let (lower, upper) = guarantees(&c, x, &y, &z, rho, d);
    let scale = 1.0 + rho;
    if upper - lower > SADDLE_TOL * scale {
        return Err(Error::Residual {
            gap: upper - lower,
            lower,
            upper,
        });
    }
    let defender_decomposition = decompose_matroid_point(&z, d)?;
    Ok(EquilibriumResult {
        value: sol.objective,
        attacker_strategy: y,
        defender_marginal: z,
        defender_decomposition,
    })
}

/// Exact subgame solution by enumerating every defender set of size `d` and
/// solving the explicit matrix game. Only for small instances.
pub fn solve_security_exact_small(game: &SecurityGame<'_>, x: &[f64]) -> Result<EquilibriumResult> {
    let g = game.graph();
    let n = g.n();
    let (d, rho) = (game.budget().min(n), game.reward());
    check_len("posterior", x, n)?;
    let count = binomial(n as u64, d as u64);
    if count > MAX_DEFENDER_SETS {
        return Err(Error::TooLarge(format!(
            "C({n}, {d}) = {count} defender strategies exceeds {MAX_DEFENDER_SETS}"
        )));
    }
    let sets = k_subsets(n, d);
    let c = attack_scores(g, x);
    let matrix: Vec<Vec<f64>> = (0..n)
        .map(|a| {
            sets.iter()
                .map(|s| {
                    let covered: f64 = s.iter().map(|&i| x[i]).sum();
                    let hit = if s.binary_search(&a).is_ok() {
                        1.0
                    } else {
                        0.0
                    };
                    c[a] - rho * (covered + hit)
                })
                .collect()
        })
        .collect();
    let sol = solve_matrix_game(&matrix)?;
    let mut z = vec![0.0; n];
    let mut decomposition = Vec::new();
    for (w, s) in sol.col_strategy.iter().zip(&sets) {
        if *w > 0.0 {
            for &i in s {
                z[i] += w;
            }
            decomposition.push((*w, s.clone()));
        }
    }
    Ok(EquilibriumResult {
        value: sol.value,
        attacker_strategy: sol.row_strategy,
        defender_marginal: z,
        defender_decomposition: decomposition,
    })
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
        if acc > u64::MAX / 2 {
            return u64::MAX;
        }
    }
    acc
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}
