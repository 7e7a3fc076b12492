//! Recovering planted cliques from a good signaling scheme.
//!
//! The pipeline has two stages. [`algorithm1`] turns every signal into a
//! cluster of `⌊ρd/2⌋` vertices that the signal's attacker finds attractive.
//! [`approx_recover_clique`] then looks for a planted clique that overlaps a
//! cluster, by sampling a few cluster vertices, taking their common
//! neighbourhood and pruning it by degree.
//!
//! Ground truth is used only by [`score_candidates`], which compares
//! candidates against the planted sets.

use serde::{Deserialize, Serialize};

use crate::equilibrium::{attack_scores, solve_security_subgame, top_d_indices, SecurityGame};
use crate::error::{Error, Result};
use crate::exec::{self, Parallelism};
use crate::game::ConvexDecomposition;
use crate::graph::{iter_bits, Graph, PlantedCoverInstance};
use crate::lp::{LinearProgram, Relation};
use crate::rng::{self, derive_seed};

/// Entries within this much of the cut-off still count as not overrepresented.
const CUTOFF_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryParams {
    /// Advantage of the scheme over the background density.
    pub epsilon: f64,
    /// Sample size factor: each trial samples `⌈sample_factor · log₂ n⌉`
    /// cluster vertices.
    pub sample_factor: f64,
    /// Random subsamples tried per cluster.
    pub trial_budget: usize,
    pub d: usize,
    pub rho: f64,
    /// Solve the cluster LP with the simplex solver instead of top-m
    /// selection.
    #[serde(default)]
    pub generic_lp: bool,
}

impl RecoveryParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon {} must lie in (0, 1)",
                self.epsilon
            )));
        }
        if !(self.sample_factor > 0.0 && self.sample_factor.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sample factor {} must be positive",
                self.sample_factor
            )));
        }
        if self.trial_budget == 0 {
            return Err(Error::InvalidParameter(
                "trial budget must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// `⌊ρd/2⌋`, the size of every cluster.
    pub fn cluster_size(&self) -> Result<usize> {
        cluster_size(self.d, self.rho)
    }

    /// Vertices sampled per trial on an `n`-vertex graph.
    pub fn sample_size(&self, n: usize) -> usize {
        let log_n = (n.max(2) as f64).log2();
        ((self.sample_factor * log_n).ceil() as usize).max(1)
    }
}

fn cluster_size(d: usize, rho: f64) -> Result<usize> {
    let rho_d = rho * d as f64;
    if rho_d < 2.0 - 1e-9 {
        return Err(Error::DegenerateCluster { rho_d });
    }
    Ok((rho_d / 2.0 + 1e-9).floor() as usize)
}

/// Everything Algorithm 1 computes for one signal.
#[derive(Clone, Debug, Serialize)]
pub struct ClusterDetail {
    pub signal: usize,
    pub weight: f64,
    /// Subgame value `u^σ`.
    pub value: f64,
    pub x_hat: Vec<f64>,
    pub y_hat: Vec<f64>,
    /// The cluster `T_σ`, sorted.
    pub members: Vec<usize>,
    /// Mass per cluster vertex, `2/(ρd)`.
    pub level: f64,
    /// `x̂ᵀAŷ`.
    pub hat_payoff: f64,
    /// `x̂ᵀAz`.
    pub cluster_payoff: f64,
    /// Mass removed from the posterior and the attacker strategy.
    pub removed_mass: f64,
}

impl ClusterDetail {
    pub fn marginal(&self, n: usize) -> Vec<f64> {
        let mut z = vec![0.0; n];
        for &v in &self.members {
            z[v] = self.level;
        }
        z
    }
}

/// Algorithm 1: one cluster per signal whose weight is at least `min_weight`.
pub fn algorithm1(
    g: &Graph,
    dec: &ConvexDecomposition,
    d: usize,
    rho: f64,
    min_weight: f64,
    generic_lp: bool,
    mode: Parallelism,
) -> Result<Vec<ClusterDetail>> {
    let m = cluster_size(d, rho)?;
    if dec.num_states() != g.n() {
        return Err(Error::Dimension(format!(
            "decomposition over {} states, graph has {} vertices",
            dec.num_states(),
            g.n()
        )));
    }
    let game = SecurityGame::new(g, d, rho)?;
    let level = 2.0 / (rho * d as f64);
    let signals: Vec<usize> = (0..dec.num_signals())
        .filter(|&s| dec.weights()[s] >= min_weight)
        .collect();
    exec::map(mode, &signals, |&signal| {
        let x = &dec.posteriors()[signal];
        let eq = solve_security_subgame(&game, x)?;
        let cut = |v: &[f64]| -> (Vec<f64>, f64) {
            let mut removed = 0.0;
            let kept = v
                .iter()
                .map(|&e| {
                    if e > level + CUTOFF_SLACK {
                        removed += e;
                        0.0
                    } else {
                        e
                    }
                })
                .collect();
            (kept, removed)
        };
        let (x_hat, rx) = cut(x);
        let (y_hat, ry) = cut(&eq.attacker_strategy);
        let scores = attack_scores(g, &x_hat);
        let members = if generic_lp {
            cluster_by_lp(&scores, level)?
        } else {
            top_d_indices(&scores, m)
        };
        let dot = |v: &[f64]| scores.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
        let cluster_payoff = level * members.iter().map(|&v| scores[v]).sum::<f64>();
        Ok(ClusterDetail {
            signal,
            weight: dec.weights()[signal],
            value: eq.value,
            hat_payoff: dot(&y_hat),
            x_hat,
            y_hat,
            members,
            level,
            cluster_payoff,
            removed_mass: rx + ry,
        })
    })
    .into_iter()
    .collect()
}

/// `max scoresᵀz` over `0 ≤ z ≤ level`, `Σz ≤ 1`, returning the support of a
/// vertex solution.
fn cluster_by_lp(scores: &[f64], level: f64) -> Result<Vec<usize>> {
    let n = scores.len();
    let mut lp = LinearProgram::maximize(scores.to_vec());
    lp.add(vec![1.0; n], Relation::Le, 1.0);
    for i in 0..n {
        let mut row = vec![0.0; n];
        row[i] = 1.0;
        lp.add(row, Relation::Le, level);
    }
    let sol = lp.solve()?;
    Ok((0..n).filter(|&i| sol.x[i] > 1e-9).collect())
}

/// The clusters `T_σ` of Algorithm 1 over all signals.
pub fn algorithm1_clusters(
    g: &Graph,
    dec: &ConvexDecomposition,
    d: usize,
    rho: f64,
) -> Result<Vec<Vec<usize>>> {
    Ok(
        algorithm1(g, dec, d, rho, 0.0, false, Parallelism::default())?
            .into_iter()
            .map(|c| c.members)
            .collect(),
    )
}

/// True iff every pair of vertices in `s` is adjacent.
pub fn verify_clique(g: &Graph, s: &[usize]) -> bool {
    g.is_clique(s)
}

/// Searches for planted cliques overlapping the cluster `t`.
///
/// Each trial samples `R ⊆ t`, keeps the vertices adjacent to all of `R`
/// (members of `R` need only be adjacent to the rest of `R`), then keeps
/// those with at least `k − 1` neighbours among the survivors. The result is
/// emitted when it is a clique of at least `k` vertices. Emissions are
/// returned sorted and without duplicates, in order of first discovery.
pub fn approx_recover_clique(
    g: &Graph,
    t: &[usize],
    k: usize,
    params: &RecoveryParams,
    seed: u64,
) -> Vec<Vec<usize>> {
    if t.is_empty() || k < 2 {
        return Vec::new();
    }
    let size = params.sample_size(g.n()).min(t.len());
    let mut found: Vec<Vec<usize>> = Vec::new();
    for trial in 0..params.trial_budget {
        let mut rng = rng::stream(seed, "trial", trial as u64);
        let sample = rng::sample_without_replacement(&mut rng, t, size);
        if let Some(s) = filter_trial(g, &sample, k) {
            if !found.contains(&s) {
                found.push(s);
            }
        }
    }
    found
}

fn filter_trial(g: &Graph, sample: &[usize], k: usize) -> Option<Vec<usize>> {
    let sample_mask = g.mask(sample);
    let mut common = vec![!0u64; g.words_per_row()];
    for &u in sample {
        for (c, w) in common.iter_mut().zip(g.row(u)) {
            *c &= w;
        }
    }
    let distinct = sample_mask
        .iter()
        .map(|w| w.count_ones() as usize)
        .sum::<usize>();
    for &u in sample {
        if g.degree_into(u, &sample_mask) + 1 == distinct {
            common[u / 64] |= 1 << (u % 64);
        }
    }
    // Clear padding bits past n.
    if !g.n().is_multiple_of(64) {
        if let Some(last) = common.last_mut() {
            *last &= (1u64 << (g.n() % 64)) - 1;
        }
    }
    let survivors: Vec<usize> = iter_bits(&common).collect();
    let core: Vec<usize> = survivors
        .into_iter()
        .filter(|&v| g.degree_into(v, &common) + 1 >= k)
        .collect();
    (core.len() >= k && g.is_clique(&core)).then_some(core)
}

/// Truth-free part of the pipeline.
#[derive(Clone, Debug, Serialize)]
pub struct CandidateReport {
    pub clusters: Vec<Vec<usize>>,
    /// Deduplicated clique candidates over all clusters, each a certified
    /// clique of at least `k` vertices.
    pub candidates: Vec<Vec<usize>>,
    #[serde(skip)]
    pub details: Vec<ClusterDetail>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RecoveryReport {
    pub clusters: Vec<Vec<usize>>,
    pub candidates: Vec<Vec<usize>>,
    /// Candidates equal to some planted clique.
    pub verified: Vec<Vec<usize>>,
    /// Distinct planted cliques recovered, over the number planted.
    pub fraction_recovered: f64,
    #[serde(skip)]
    pub details: Vec<ClusterDetail>,
}

/// Runs Algorithm 1 and clique recovery on the public graph only. Signals
/// with weight below `1/n²` are ignored.
pub fn recover_candidates(
    g: &Graph,
    dec: &ConvexDecomposition,
    k: usize,
    params: &RecoveryParams,
    seed: u64,
    mode: Parallelism,
) -> Result<CandidateReport> {
    params.validate()?;
    let n = g.n() as f64;
    let details = algorithm1(
        g,
        dec,
        params.d,
        params.rho,
        1.0 / (n * n),
        params.generic_lp,
        mode,
    )?;
    let per_cluster = exec::map(mode, &details, |c| {
        approx_recover_clique(
            g,
            &c.members,
            k,
            params,
            derive_seed(seed, "cluster", c.signal as u64),
        )
    });
    let mut candidates: Vec<Vec<usize>> = Vec::new();
    for s in per_cluster.into_iter().flatten() {
        if !candidates.contains(&s) {
            candidates.push(s);
        }
    }
    Ok(CandidateReport {
        clusters: details.iter().map(|c| c.members.clone()).collect(),
        candidates,
        details,
    })
}

/// Compares candidates with the planted cliques.
pub fn score_candidates(report: CandidateReport, planted: &[Vec<usize>]) -> RecoveryReport {
    let truth: Vec<Vec<usize>> = planted
        .iter()
        .map(|s| {
            let mut s = s.clone();
            s.sort_unstable();
            s
        })
        .collect();
    let verified: Vec<Vec<usize>> = report
        .candidates
        .iter()
        .filter(|c| truth.contains(c))
        .cloned()
        .collect();
    let matched = truth.iter().filter(|s| verified.contains(s)).count();
    let fraction_recovered = if truth.is_empty() {
        0.0
    } else {
        matched as f64 / truth.len() as f64
    };
    RecoveryReport {
        clusters: report.clusters,
        candidates: report.candidates,
        verified,
        fraction_recovered,
        details: report.details,
    }
}

/// Candidate recovery followed by scoring against the instance's truth.
pub fn recover_pipeline(
    instance: &PlantedCoverInstance,
    dec: &ConvexDecomposition,
    params: &RecoveryParams,
    seed: u64,
) -> Result<RecoveryReport> {
    recover_pipeline_with(instance, dec, params, seed, Parallelism::default())
}

pub fn recover_pipeline_with(
    instance: &PlantedCoverInstance,
    dec: &ConvexDecomposition,
    params: &RecoveryParams,
    seed: u64,
    mode: Parallelism,
) -> Result<RecoveryReport> {
    let report = recover_candidates(&instance.graph, dec, instance.params.k, params, seed, mode)?;
    Ok(score_candidates(report, &instance.planted_cliques))
}

/// Worst slack of the inequalities relating a scheme's value to its clusters.
#[derive(Clone, Debug, Default, Serialize)]
pub struct PropertyCheck {
    /// Largest `u^σ − x̂ᵀAŷ − (x(O) + y(O))` over signals.
    pub per_signal_excess: f64,
    /// Largest `u^σ − x̂ᵀAŷ` over signals, meaningful when `ρ ≥ 1`.
    pub per_signal_strict_excess: f64,
    /// `Σ α u^σ − Σ α x̂ᵀAŷ` over the processed signals.
    pub aggregate_excess: f64,
    /// Largest `x̂ᵀAŷ − x̂ᵀAz` over signals.
    pub lp_dominance_excess: f64,
    /// Every cluster has exactly `⌊ρd/2⌋` members at mass `2/(ρd)`.
    pub shape_ok: bool,
}

impl PropertyCheck {
    pub fn holds(&self, rho: f64, tol: f64) -> bool {
        let strict =
            rho < 1.0 || (self.per_signal_strict_excess <= tol && self.aggregate_excess <= tol);
        self.per_signal_excess <= tol && strict && self.lp_dominance_excess <= 1e-9 && self.shape_ok
    }
}

pub fn check_cluster_properties(
    details: &[ClusterDetail],
    d: usize,
    rho: f64,
) -> Result<PropertyCheck> {
    let m = cluster_size(d, rho)?;
    let level = 2.0 / (rho * d as f64);
    let mut check = PropertyCheck {
        per_signal_excess: f64::NEG_INFINITY,
        per_signal_strict_excess: f64::NEG_INFINITY,
        aggregate_excess: 0.0,
        lp_dominance_excess: f64::NEG_INFINITY,
        shape_ok: true,
    };
    for c in details {
        check.per_signal_excess = check
            .per_signal_excess
            .max(c.value - c.hat_payoff - c.removed_mass);
        check.per_signal_strict_excess = check.per_signal_strict_excess.max(c.value - c.hat_payoff);
        check.aggregate_excess += c.weight * (c.value - c.hat_payoff);
        check.lp_dominance_excess = check
            .lp_dominance_excess
            .max(c.hat_payoff - c.cluster_payoff);
        check.shape_ok &= c.members.len() == m && (c.level - level).abs() < 1e-15;
    }
    Ok(check)
}

/// Largest `x̂ᵀA⁻z` over signals, where `A⁻` holds the background edges only.
pub fn background_cluster_payoff(
    instance: &PlantedCoverInstance,
    details: &[ClusterDetail],
) -> f64 {
    details
        .iter()
        .map(|c| {
            let scores = attack_scores(&instance.background, &c.x_hat);
            c.level * c.members.iter().map(|&v| scores[v]).sum::<f64>()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gen_planted_cover;
    use crate::signaling::build_clique_partition_scheme;

    fn params(d: usize, rho: f64) -> RecoveryParams {
        RecoveryParams {
            epsilon: 0.1,
            sample_factor: 1.0,
            trial_budget: 4,
            d,
            rho,
            generic_lp: false,
        }
    }

    #[test]
    fn verify_clique_examples() {
        assert!(verify_clique(&Graph::complete(3), &[0, 1, 2]));
        let path = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(!verify_clique(&path, &[0, 2]));
        assert!(verify_clique(&path, &[2]));
    }

    #[test]
    fn degenerate_cluster_size() {
        let g = Graph::empty(4);
        let dec = ConvexDecomposition::new(vec![1.0], vec![vec![0.25; 4]]).unwrap();
        assert!(matches!(
            algorithm1_clusters(&g, &dec, 1, 1.0),
            Err(Error::DegenerateCluster { .. })
        ));
        assert_eq!(cluster_size(4, 1.0).unwrap(), 2);
        assert_eq!(cluster_size(5, 1.0).unwrap(), 2);
    }

    #[test]
    fn overrepresented_entries_removed() {
        // Threshold 2/(ρd) = 0.5 removes the 0.6 entry only.
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let dec = ConvexDecomposition::new(vec![1.0], vec![vec![0.6, 0.4]]).unwrap();
        let details = algorithm1(&g, &dec, 2, 2.0, 0.0, false, Parallelism::Sequential).unwrap();
        assert_eq!(details[0].x_hat, vec![0.0, 0.4]);
    }

    #[test]
    fn top_m_selection() {
        // Scores (3, 1, 2, 0) come from a star-like posterior.
        let scores = [3.0, 1.0, 2.0, 0.0];
        assert_eq!(top_d_indices(&scores, 2), vec![0, 2]);
        assert_eq!(cluster_by_lp(&scores, 0.5).unwrap(), vec![0, 2]);
    }

    #[test]
    fn generic_lp_matches_selection() {
        let inst = gen_planted_cover(150, 0.5, 15, 10, 2).unwrap();
        let dec = build_clique_partition_scheme(&inst).unwrap();
        let fast = algorithm1(
            &inst.graph,
            &dec,
            8,
            1.0,
            0.0,
            false,
            Parallelism::Sequential,
        )
        .unwrap();
        let slow = algorithm1(
            &inst.graph,
            &dec,
            8,
            1.0,
            0.0,
            true,
            Parallelism::Sequential,
        )
        .unwrap();
        for (a, b) in fast.iter().zip(&slow) {
            // Supports may differ on ties; objective values may not.
            assert!((a.cluster_payoff - b.cluster_payoff).abs() < 1e-9);
            assert_eq!(b.members.len(), 4);
        }
    }

    #[test]
    fn recovers_planted_clique_from_itself() {
        let inst = gen_planted_cover(600, 0.5, 40, 3, 5).unwrap();
        let s = &inst.planted_cliques[0];
        let out = approx_recover_clique(&inst.graph, s, 40, &params(2, 1.0), 1);
        assert!(out.contains(s));
        for c in &out {
            assert!(verify_clique(&inst.graph, c) && c.len() >= 40);
        }
        assert!(approx_recover_clique(&inst.graph, &[], 40, &params(2, 1.0), 1).is_empty());
    }

    #[test]
    fn pipeline_is_sound_and_deterministic() {
        let inst = gen_planted_cover(600, 0.5, 30, 10, 8).unwrap();
        let dec = build_clique_partition_scheme(&inst).unwrap();
        let p = params(10, 1.0);
        let a = recover_pipeline_with(&inst, &dec, &p, 3, Parallelism::Sequential).unwrap();
        let b = recover_pipeline_with(&inst, &dec, &p, 3, Parallelism::Parallel).unwrap();
        assert_eq!(a.candidates, b.candidates);
        assert_eq!(a.fraction_recovered, b.fraction_recovered);
        assert!(a.fraction_recovered > 0.0);
        for v in &a.verified {
            assert!(inst.planted_cliques.iter().any(|s| s == v));
        }
        let props = check_cluster_properties(&a.details, 10, 1.0).unwrap();
        assert!(props.holds(1.0, 1e-6), "{props:?}");
    }

    #[test]
    fn tiny_signals_are_skipped() {
        let inst = gen_planted_cover(50, 0.5, 5, 2, 8).unwrap();
        let mut x = vec![0.0; 50];
        x[0] = 1.0;
        let dec = ConvexDecomposition::new(vec![1.0], vec![x]).unwrap();
        let report = recover_candidates(
            &inst.graph,
            &dec,
            5,
            &params(4, 1.0),
            0,
            Parallelism::Sequential,
        )
        .unwrap();
        assert_eq!(report.clusters.len(), 1);
        let empty = ConvexDecomposition::new(vec![1.0], vec![vec![0.02; 50]]).unwrap();
        let skipped = algorithm1(
            &inst.graph,
            &empty,
            4,
            1.0,
            2.0,
            false,
            Parallelism::Sequential,
        )
        .unwrap();
        assert!(skipped.is_empty());
    }

    #[test]
    fn scoring_counts_distinct_matches() {
        let report = CandidateReport {
            clusters: vec![],
            candidates: vec![vec![0, 1, 2], vec![5, 6, 7], vec![3, 4, 9]],
            details: vec![],
        };
        let truth = vec![
            vec![2, 1, 0],
            vec![3, 4, 8],
            vec![6, 5, 7],
            vec![10, 11, 12],
        ];
        let scored = score_candidates(report, &truth);
        assert_eq!(scored.verified.len(), 2);
        assert_eq!(scored.fraction_recovered, 0.5);
    }
}
