use rand::Rng;
use serde::Serialize;

use super::config::ValidatorConfig;
use super::stats::{ks_two_sample, KsResult};
use crate::error::{Error, Result};
use crate::exec::{self, Parallelism};
use crate::graph::{
    amplify_instance, bidensity, edge_count_distinguisher, gen_gnp, gen_planted_cover, Graph,
    PlantedCoverInstance, Verdict,
};
use crate::rng::{self, derive_seed};

#[derive(Clone, Debug, Serialize)]
pub struct BidensityOutcome {
    pub pass: bool,
    /// Largest bidensity seen over the sampled pairs.
    pub worst: f64,
    pub limit: f64,
    pub samples: usize,
    pub min_size: usize,
    pub max_size: usize,
}

/// Draws G(n, p) and checks that random pairs of large clusters are not much
/// denser than `p`.
pub fn bidensity_validator(
    n: usize,
    p: f64,
    config: &ValidatorConfig,
    seed: u64,
) -> Result<BidensityOutcome> {
    let g = gen_gnp(n, p, derive_seed(seed, "validator-graph", 0))?;
    bidensity_validator_on(&g, p, config, seed)
}

/// The cluster-pair check on a given graph.
pub fn bidensity_validator_on(
    g: &Graph,
    p: f64,
    config: &ValidatorConfig,
    seed: u64,
) -> Result<BidensityOutcome> {
    config.validate()?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "p = {p} must lie in (0, 1)"
        )));
    }
    let n = g.n();
    let min_size = config.min_cluster_size(n);
    let max_size = config.max_cluster_size.unwrap_or(2 * min_size).min(n);
    if min_size > max_size {
        return Err(Error::InvalidParameter(format!(
            "minimum cluster size {min_size} exceeds {max_size} (n = {n})"
        )));
    }
    let vertices: Vec<usize> = (0..n).collect();
    let limit = config.density_slack * p;
    let mut worst: f64 = 0.0;
    for i in 0..config.samples {
        let mut r = rng::stream(seed, "validator-pair", i as u64);
        let a = r.gen_range(min_size..=max_size);
        let b = r.gen_range(min_size..=max_size);
        let s = rng::sample_without_replacement(&mut r, &vertices, a);
        let t = rng::sample_without_replacement(&mut r, &vertices, b);
        worst = worst.max(bidensity(g, &s, &t)?);
    }
    Ok(BidensityOutcome {
        pass: worst <= limit,
        worst,
        limit,
        samples: config.samples,
        min_size,
        max_size,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SeedShare {
    pub pass: bool,
    pub passed: usize,
    pub seeds: usize,
    pub share: f64,
    pub required_share: f64,
    pub worst: f64,
}

impl SeedShare {
    fn tally(outcomes: &[(bool, f64)], required_share: f64, worse: fn(f64, f64) -> f64) -> Self {
        let passed = outcomes.iter().filter(|o| o.0).count();
        let share = passed as f64 / outcomes.len().max(1) as f64;
        SeedShare {
            pass: !outcomes.is_empty() && share >= required_share,
            passed,
            seeds: outcomes.len(),
            share,
            required_share,
            worst: outcomes
                .iter()
                .map(|o| o.1)
                .reduce(worse)
                .unwrap_or(f64::NAN),
        }
    }
}

/// [`bidensity_validator`] over several seeds; passes when at least
/// `seed_pass_share` of them pass.
pub fn bidensity_seeds(
    n: usize,
    p: f64,
    config: &ValidatorConfig,
    seeds: &[u64],
) -> Result<SeedShare> {
    let runs = exec::map(Parallelism::default(), seeds, |&s| {
        bidensity_validator(n, p, config, s)
    });
    let outcomes = runs
        .into_iter()
        .map(|r| r.map(|o| (o.pass, o.worst)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SeedShare::tally(
        &outcomes,
        config.seed_pass_share,
        f64::max,
    ))
}

/// Coverage of fresh planted covers over several seeds.
pub fn coverage_seeds(
    n: usize,
    p: f64,
    k: usize,
    r: usize,
    seeds: &[u64],
    required_share: f64,
) -> Result<SeedShare> {
    let runs = exec::map(Parallelism::default(), seeds, |&s| {
        gen_planted_cover(n, p, k, r, s).map(|inst| {
            let c = coverage_validator(&inst);
            (c >= COVERAGE_TARGET, c)
        })
    });
    let outcomes = runs.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SeedShare::tally(&outcomes, required_share, f64::min))
}

#[derive(Clone, Debug, Serialize)]
pub struct DistinguisherOutcome {
    pub pass: bool,
    pub accuracy: f64,
    pub null_correct: usize,
    pub planted_correct: usize,
    pub trials_per_class: usize,
    pub required_accuracy: f64,
}

/// Runs the edge-count test on one null graph and one planted cover per seed.
pub fn distinguisher_accuracy(
    n: usize,
    p: f64,
    k: usize,
    r: usize,
    seeds: &[u64],
    required_accuracy: f64,
) -> Result<DistinguisherOutcome> {
    let runs = exec::map(
        Parallelism::default(),
        seeds,
        |&s| -> Result<(bool, bool)> {
            let null = gen_gnp(n, p, derive_seed(s, "distinguisher-null", 0))?;
            let planted =
                gen_planted_cover(n, p, k, r, derive_seed(s, "distinguisher-planted", 0))?.graph;
            Ok((
                edge_count_distinguisher(&null, p, k, r)?.verdict == Verdict::Null,
                edge_count_distinguisher(&planted, p, k, r)?.verdict == Verdict::Planted,
            ))
        },
    );
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let null_correct = runs.iter().filter(|r| r.0).count();
    let planted_correct = runs.iter().filter(|r| r.1).count();
    let accuracy = (null_correct + planted_correct) as f64 / (2 * runs.len()).max(1) as f64;
    Ok(DistinguisherOutcome {
        pass: !runs.is_empty() && accuracy >= required_accuracy,
        accuracy,
        null_correct,
        planted_correct,
        trials_per_class: runs.len(),
        required_accuracy,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct AmplificationOutcome {
    pub pass: bool,
    pub edge_counts: KsResult,
    pub max_degrees: KsResult,
    pub significance: f64,
    pub samples: usize,
}

/// Compares planting `r + extra` cliques directly with planting `r` and then
/// amplifying by `extra`, via two-sample KS tests on the edge count and the
/// maximum degree.
pub fn amplification_check(
    n: usize,
    p: f64,
    k: usize,
    r: usize,
    extra: usize,
    seeds: &[u64],
    significance: f64,
) -> Result<AmplificationOutcome> {
    let stats = |g: &Graph| {
        let max_degree = (0..g.n()).map(|v| g.degree(v)).max().unwrap_or(0);
        (g.edge_count() as f64, max_degree as f64)
    };
    let runs = exec::map(
        Parallelism::default(),
        seeds,
        |&s| -> Result<((f64, f64), (f64, f64))> {
            let direct =
                gen_planted_cover(n, p, k, r + extra, derive_seed(s, "amplify-direct", 0))?;
            let base = gen_planted_cover(n, p, k, r, derive_seed(s, "amplify-base", 0))?;
            let amplified =
                amplify_instance(&base.graph, p, k, extra, derive_seed(s, "amplify-extra", 0))?;
            Ok((stats(&direct.graph), stats(&amplified.graph)))
        },
    );
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    type Pairs = Vec<(f64, f64)>;
    let (direct, amplified): (Pairs, Pairs) = runs.into_iter().unzip();
    let (direct_edges, direct_degrees): (Vec<f64>, Vec<f64>) = direct.into_iter().unzip();
    let (amp_edges, amp_degrees): (Vec<f64>, Vec<f64>) = amplified.into_iter().unzip();
    let edge_counts = ks_two_sample(&direct_edges, &amp_edges);
    let max_degrees = ks_two_sample(&direct_degrees, &amp_degrees);
    Ok(AmplificationOutcome {
        pass: edge_counts.p_value > significance && max_degrees.p_value > significance,
        edge_counts,
        max_degrees,
        significance,
        samples: direct_edges.len(),
    })
}

/// Fraction of vertices covered by the planted cliques.
pub fn coverage_validator(instance: &PlantedCoverInstance) -> f64 {
    instance.coverage()
}

pub const COVERAGE_TARGET: f64 = 0.9;

/// Smallest and largest payoff `[{θ,a} ∈ E] − ρ|D ∩ {θ,a}|` over all
/// states `θ`, attacks `a` and defended sets `D` of size `d`.
pub fn payoff_range(g: &Graph, d: usize, rho: f64) -> (f64, f64) {
    let n = g.n();
    let pairs = (n * n.saturating_sub(1) / 2) as u64;
    let edges = g.edge_count();
    // Pair kinds that exist: distinct adjacent, distinct non-adjacent, θ = a.
    let mut kinds: Vec<(f64, usize)> = vec![(0.0, 1)];
    if edges > 0 {
        kinds.push((1.0, 2));
    }
    if edges < pairs {
        kinds.push((0.0, 2));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (hit, size) in kinds {
        let least_guarded = d.saturating_sub(n - size);
        let most_guarded = d.min(size);
        hi = hi.max(hit - rho * least_guarded as f64);
        lo = lo.min(hit - rho * most_guarded as f64);
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gen_planted_cover;

    #[test]
    fn complete_graph_fails() {
        let g = Graph::complete(400);
        let cfg = ValidatorConfig {
            min_cluster_factor: 3.0,
            samples: 20,
            ..ValidatorConfig::default()
        };
        let out = bidensity_validator_on(&g, 0.5, &cfg, 1).unwrap();
        assert!(!out.pass);
        assert!(out.worst > 0.99);
    }

    #[test]
    fn random_graph_passes() {
        let cfg = ValidatorConfig {
            min_cluster_factor: 6.0,
            samples: 50,
            ..ValidatorConfig::default()
        };
        let out = bidensity_validator(600, 0.5, &cfg, 3).unwrap();
        assert!(out.pass, "{out:?}");
        assert!(out.min_size >= 56);
    }

    #[test]
    fn coverage_examples() {
        let none = gen_planted_cover(100, 0.5, 10, 0, 1).unwrap();
        assert_eq!(coverage_validator(&none), 0.0);
        let mut part = gen_planted_cover(100, 0.5, 10, 10, 1).unwrap();
        part.planted_cliques = (0..10).map(|i| (i * 10..i * 10 + 10).collect()).collect();
        assert_eq!(coverage_validator(&part), 1.0);
    }

    #[test]
    fn payoff_range_within_bounds() {
        let g = gen_planted_cover(200, 0.5, 10, 5, 2).unwrap().graph;
        let (lo, hi) = payoff_range(&g, 1, 1.0);
        assert!(lo >= -2.0 && hi <= 1.0);
        assert_eq!((lo, hi), (-1.0, 1.0));
        assert_eq!(payoff_range(&g, 3, 2.0), (-4.0, 1.0));
        assert_eq!(payoff_range(&Graph::complete(3), 3, 1.0), (-1.0, -1.0));
    }
}
