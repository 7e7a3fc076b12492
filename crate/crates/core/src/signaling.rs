//! Evaluating signaling schemes, the clique-partition scheme and its
//! closed-form lower bound, and a grid oracle for the optimal scheme of a
//! small explicit game.

use serde::Serialize;

use crate::equilibrium::{solve_matrix_game, solve_security_subgame, SecurityGame};
use crate::error::{Error, Result};
use crate::exec::{self, Parallelism};
use crate::game::{
    expected_matrix, scheme_to_decomposition, BayesianZeroSumGame, ConvexDecomposition,
    SignalingScheme,
};
use crate::graph::{Graph, PlantedCoverInstance};

/// Grids larger than this are refused by [`grid_envelope_oracle`].
pub const MAX_GRID_POINTS: u64 = 100_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignalValue {
    pub weight: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchemeEvaluation {
    pub per_signal: Vec<SignalValue>,
    pub total: f64,
}

impl SchemeEvaluation {
    fn from_parts(per_signal: Vec<SignalValue>) -> Self {
        let total = per_signal.iter().map(|s| s.weight * s.value).sum();
        SchemeEvaluation { per_signal, total }
    }
}

/// Row player's expected utility when each signal's subgame is played at its
/// security-game equilibrium.
pub fn evaluate_scheme_security(
    game: &SecurityGame<'_>,
    dec: &ConvexDecomposition,
) -> Result<SchemeEvaluation> {
    evaluate_scheme_security_with(game, dec, Parallelism::default())
}

pub fn evaluate_scheme_security_with(
    game: &SecurityGame<'_>,
    dec: &ConvexDecomposition,
    mode: Parallelism,
) -> Result<SchemeEvaluation> {
    dec.check_prior(game.prior())?;
    let values = exec::map(mode, dec.posteriors(), |x| {
        solve_security_subgame(game, x).map(|r| r.value)
    });
    let per_signal = dec
        .weights()
        .iter()
        .zip(values)
        .map(|(&weight, v)| v.map(|value| SignalValue { weight, value }))
        .collect::<Result<Vec<_>>>()?;
    Ok(SchemeEvaluation::from_parts(per_signal))
}

/// Row player's expected utility in an explicit game under a decomposition.
pub fn evaluate_decomposition_explicit(
    game: &BayesianZeroSumGame,
    dec: &ConvexDecomposition,
) -> Result<SchemeEvaluation> {
    dec.check_prior(game.prior())?;
    let per_signal = dec
        .iter()
        .map(|(weight, x)| {
            let value = solve_matrix_game(&expected_matrix(game, x)?)?.value;
            Ok(SignalValue { weight, value })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SchemeEvaluation::from_parts(per_signal))
}

/// Row player's expected utility in an explicit game under a scheme.
pub fn evaluate_scheme_explicit(
    game: &BayesianZeroSumGame,
    scheme: &SignalingScheme,
) -> Result<SchemeEvaluation> {
    let dec = scheme_to_decomposition(game.prior(), scheme)?;
    evaluate_decomposition_explicit(game, &dec)
}

/// Announces which residual planted set contains the state.
///
/// With `Ŝ_i = S_i \ (S_1 ∪ … ∪ S_{i-1})` and `Ŝ_0` the uncovered vertices,
/// the signals are `Ŝ_0, Ŝ_1, …, Ŝ_r` in that order, empty ones omitted.
/// Each posterior is uniform on its set and carries weight `|Ŝ_i| / n`.
pub fn build_clique_partition_scheme(
    instance: &PlantedCoverInstance,
) -> Result<ConvexDecomposition> {
    let parts = clique_partition(instance.graph.n(), &instance.planted_cliques);
    partition_decomposition(instance.graph.n(), &parts)
}

/// The residual sets `Ŝ_0, Ŝ_1, …` (possibly empty).
pub fn clique_partition(n: usize, cliques: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut owner = vec![0usize; n];
    for (i, s) in cliques.iter().enumerate() {
        for &v in s {
            if owner[v] == 0 {
                owner[v] = i + 1;
            }
        }
    }
    let mut parts = vec![Vec::new(); cliques.len() + 1];
    for (v, &o) in owner.iter().enumerate() {
        parts[o].push(v);
    }
    parts
}

/// Uniform posteriors on the non-empty blocks of a partition of `0..n`.
pub fn partition_decomposition(n: usize, parts: &[Vec<usize>]) -> Result<ConvexDecomposition> {
    let mut weights = Vec::new();
    let mut posteriors = Vec::new();
    for part in parts.iter().filter(|p| !p.is_empty()) {
        let mut x = vec![0.0; n];
        let mass = 1.0 / part.len() as f64;
        for &v in part {
            x[v] = mass;
        }
        weights.push(part.len() as f64 / n as f64);
        posteriors.push(x);
    }
    ConvexDecomposition::with_prior(weights, posteriors, &vec![1.0 / n as f64; n])
}

/// Support of a posterior that is uniform on it.
fn uniform_support(x: &[f64], signal: usize) -> Result<Vec<usize>> {
    let support: Vec<usize> = (0..x.len()).filter(|&i| x[i] > 0.0).collect();
    let mass = 1.0 / support.len() as f64;
    if support.iter().any(|&i| (x[i] - mass).abs() > 1e-12) {
        return Err(Error::NonUniformPosterior { signal });
    }
    Ok(support)
}

/// `Σ_σ α_σ (bden(T_σ, T_σ) − 2dρ/|T_σ|)` where `T_σ` is the support of a
/// posterior uniform on it. Each term is the payoff the attacker secures by
/// attacking uniformly on `T_σ`, so the sum never exceeds the scheme's value.
pub fn scheme_utility_lower_bound(
    instance: &PlantedCoverInstance,
    dec: &ConvexDecomposition,
    d: usize,
    rho: f64,
) -> Result<f64> {
    partition_lower_bound(&instance.graph, dec, d, rho)
}

/// The same bound computed from the public graph alone.
pub fn partition_lower_bound(
    g: &Graph,
    dec: &ConvexDecomposition,
    d: usize,
    rho: f64,
) -> Result<f64> {
    if dec.num_states() != g.n() {
        return Err(Error::Dimension(format!(
            "decomposition over {} states, graph has {} vertices",
            dec.num_states(),
            g.n()
        )));
    }
    let mut total = 0.0;
    for (signal, (alpha, x)) in dec.iter().enumerate() {
        let support = uniform_support(x, signal)?;
        let size = support.len() as f64;
        let self_bidensity = g.count_between(&support, &support) as f64 / (size * size);
        total += alpha * (self_bidensity - 2.0 * d as f64 * rho / size);
    }
    Ok(total)
}

#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeResult {
    /// Best row-player value over grid-supported decompositions.
    pub value: f64,
    pub decomposition: ConvexDecomposition,
    /// Bound on the gap to the true optimum: `2·max|A| · spacing`.
    pub error_bound: f64,
    pub spacing: f64,
    pub grid_points: usize,
}

/// Optimal signaling value of a small explicit game, up to grid resolution.
///
/// Evaluates the subgame value `f` at every point of the simplex grid with
/// spacing `1/⌈1/h⌉`, then picks the best mixture of grid posteriors that
/// averages to the prior.
pub fn grid_envelope_oracle(game: &BayesianZeroSumGame, h: f64) -> Result<EnvelopeResult> {
    grid_envelope_oracle_with(game, h, Parallelism::default())
}

pub fn grid_envelope_oracle_with(
    game: &BayesianZeroSumGame,
    h: f64,
    mode: Parallelism,
) -> Result<EnvelopeResult> {
    if !(h > 0.0 && h <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "grid resolution {h} must lie in (0, 0.5]"
        )));
    }
    let m = game.num_states();
    let steps = (1.0 / h - 1e-9).ceil() as usize;
    let count = grid_size(steps as u64, m as u64);
    if count > MAX_GRID_POINTS {
        return Err(Error::TooLarge(format!(
            "grid with spacing 1/{steps} over {m} states has {count} points (limit {MAX_GRID_POINTS})"
        )));
    }
    let points = simplex_grid(steps, m);
    let values = exec::map(mode, &points, |x| {
        expected_matrix(game, x)
            .and_then(|a| solve_matrix_game(&a))
            .map(|s| s.value)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;

    let mut lp = crate::lp::LinearProgram::maximize(values.clone());
    for theta in 0..m {
        lp.add(
            points.iter().map(|x| x[theta]).collect(),
            crate::lp::Relation::Eq,
            game.prior()[theta],
        );
    }
    let sol = lp.solve()?;
    let (weights, posteriors): (Vec<f64>, Vec<Vec<f64>>) = sol
        .x
        .iter()
        .zip(&points)
        .filter(|(w, _)| **w > 0.0)
        .map(|(w, x)| (*w, x.clone()))
        .unzip();
    let total: f64 = weights.iter().sum();
    let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let decomposition = ConvexDecomposition::with_prior(weights, posteriors, game.prior())?;
    let spacing = 1.0 / steps as f64;
    Ok(EnvelopeResult {
        value: sol.objective,
        decomposition,
        error_bound: 2.0 * game.max_abs_payoff() * spacing,
        spacing,
        grid_points: points.len(),
    })
}

/// Number of points `C(steps + m − 1, m − 1)`, saturating.
fn grid_size(steps: u64, m: u64) -> u64 {
    let mut acc: u64 = 1;
    for i in 1..m {
        acc = acc.saturating_mul(steps + i) / i;
        if acc > MAX_GRID_POINTS * 1000 {
            return u64::MAX;
        }
    }
    acc
}

/// All probability vectors of length `m` with entries in `{0, 1/steps, …, 1}`,
/// in lexicographic order of the integer counts.
fn simplex_grid(steps: usize, m: usize) -> Vec<Vec<f64>> {
    fn rec(left: usize, slots: usize, cur: &mut Vec<usize>, steps: usize, out: &mut Vec<Vec<f64>>) {
        if slots == 1 {
            cur.push(left);
            out.push(cur.iter().map(|&c| c as f64 / steps as f64).collect());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(left - c, slots - 1, cur, steps, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(steps, m, &mut Vec::with_capacity(m), steps, &mut out);
    out
}
