//! Seeded experiment runs: generate, build a scheme, bound and evaluate it,
//! recover cliques, and tabulate.

use std::time::Instant;

use serde::Serialize;

use super::config::{ExperimentConfig, SchemeKind};
use super::stats::mean;
use super::validators::payoff_range;
use crate::equilibrium::SecurityGame;
use crate::error::{Error, Result};
use crate::exec::{self, Parallelism};
use crate::game::ConvexDecomposition;
use crate::graph::{gen_planted_cover, PlantedCoverInstance};
use crate::recovery::{
    background_cluster_payoff, check_cluster_properties, recover_pipeline_with, PropertyCheck,
};
use crate::signaling::{
    build_clique_partition_scheme, evaluate_scheme_security, scheme_utility_lower_bound,
};

/// One CSV row. Column order is fixed.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CsvRow {
    pub seed: u64,
    pub n: usize,
    pub p: f64,
    pub k: usize,
    pub r: usize,
    pub d: usize,
    pub rho: f64,
    pub c: f64,
    pub coverage: Option<f64>,
    pub bound: Option<f64>,
    pub lp_total: Option<f64>,
    pub frac_recovered: Option<f64>,
    pub clusters: Option<usize>,
    pub runtime_ms: Option<u64>,
    pub constants_profile: String,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeedOutcome {
    pub row: CsvRow,
    pub runtime_ms: u64,
    pub false_positives: usize,
    pub cluster_properties: Option<PropertyCheck>,
    /// Largest background-only cluster payoff over signals.
    pub background_cluster_payoff: Option<f64>,
    pub payoff_range: (f64, f64),
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub preset: String,
    pub seeds: usize,
    pub errors: usize,
    pub mean_coverage: f64,
    pub coverage_target: f64,
    pub mean_bound: f64,
    pub bound_target: f64,
    /// Share of seeds reaching both the coverage and the bound target.
    pub bound_share: f64,
    pub mean_lp_total: Option<f64>,
    pub mean_frac_recovered: Option<f64>,
    pub false_positives: usize,
    pub cluster_property_failures: usize,
    pub max_background_cluster_payoff: Option<f64>,
    pub payoff_min: f64,
    pub payoff_max: f64,
    pub pass: bool,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub outcomes: Vec<SeedOutcome>,
    pub summary: Summary,
}

impl ExperimentReport {
    /// CSV with a header line. Deterministic unless runtimes are requested.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for o in &self.outcomes {
            w.serialize(&o.row)
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Wall-clock data kept out of the CSV.
    pub fn meta(&self) -> serde_json::Value {
        serde_json::json!({
            "preset": self.config.preset,
            "runtime_ms": self.outcomes.iter().map(|o| (o.row.seed, o.runtime_ms)).collect::<Vec<_>>(),
            "total_runtime_ms": self.outcomes.iter().map(|o| o.runtime_ms).sum::<u64>(),
            "parallel": self.config.seed_parallelism.is_parallel(),
        })
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let outcomes = exec::map(config.seed_parallelism, &config.seeds, |&seed| {
        run_seed(config, seed)
    });
    let summary = summarize(config, &outcomes);
    Ok(ExperimentReport {
        config: config.clone(),
        outcomes,
        summary,
    })
}

fn base_row(config: &ExperimentConfig, seed: u64) -> CsvRow {
    CsvRow {
        seed,
        n: config.n,
        p: config.p,
        k: config.k,
        r: config.r,
        d: config.d,
        rho: config.rho,
        c: config.c,
        constants_profile: config.constants_profile.clone(),
        ..CsvRow::default()
    }
}

fn run_seed(config: &ExperimentConfig, seed: u64) -> SeedOutcome {
    let start = Instant::now();
    let mut outcome = SeedOutcome {
        row: base_row(config, seed),
        runtime_ms: 0,
        false_positives: 0,
        cluster_properties: None,
        background_cluster_payoff: None,
        payoff_range: (0.0, 0.0),
    };
    if let Err(e) = fill_seed(config, seed, &mut outcome) {
        outcome.row.error = Some(e.to_string());
    }
    outcome.runtime_ms = start.elapsed().as_millis() as u64;
    if config.runtime_in_csv {
        outcome.row.runtime_ms = Some(outcome.runtime_ms);
    }
    outcome
}

fn scheme_for(
    config: &ExperimentConfig,
    instance: &PlantedCoverInstance,
) -> Result<ConvexDecomposition> {
    match config.scheme {
        SchemeKind::CliquePartition => build_clique_partition_scheme(instance),
        SchemeKind::Opaque => {
            let n = config.n;
            ConvexDecomposition::new(vec![1.0], vec![vec![1.0 / n as f64; n]])
        }
    }
}

fn fill_seed(config: &ExperimentConfig, seed: u64, out: &mut SeedOutcome) -> Result<()> {
    let inner = if config.seed_parallelism.is_parallel() && config.seeds.len() > 1 {
        Parallelism::Sequential
    } else {
        Parallelism::Parallel
    };
    let instance =
        crate::graph::gen_planted_cover_with(config.n, config.p, config.k, config.r, seed, inner)?;
    out.row.coverage = Some(instance.coverage());
    out.payoff_range = payoff_range(&instance.graph, config.d, config.rho);

    let dec = scheme_for(config, &instance)?;
    out.row.bound = Some(scheme_utility_lower_bound(
        &instance, &dec, config.d, config.rho,
    )?);
    if config.n <= config.lp_eval_max_n {
        let game = SecurityGame::new(&instance.graph, config.d, config.rho)?;
        out.row.lp_total = Some(evaluate_scheme_security(&game, &dec)?.total);
    }
    if config.recover {
        let report =
            recover_pipeline_with(&instance, &dec, &config.recovery_params(), seed, inner)?;
        out.row.frac_recovered = Some(report.fraction_recovered);
        out.row.clusters = Some(report.clusters.len());
        out.false_positives = report
            .verified
            .iter()
            .filter(|v| !instance.planted_cliques.contains(v))
            .count();
        out.cluster_properties = Some(check_cluster_properties(
            &report.details,
            config.d,
            config.rho,
        )?);
        out.background_cluster_payoff = Some(background_cluster_payoff(&instance, &report.details));
    }
    Ok(())
}

fn summarize(config: &ExperimentConfig, outcomes: &[SeedOutcome]) -> Summary {
    let ok: Vec<&SeedOutcome> = outcomes.iter().filter(|o| o.row.error.is_none()).collect();
    let collect = |f: &dyn Fn(&CsvRow) -> Option<f64>| -> Vec<f64> {
        ok.iter().filter_map(|o| f(&o.row)).collect()
    };
    let coverage = collect(&|r| r.coverage);
    let bounds = collect(&|r| r.bound);
    let lp = collect(&|r| r.lp_total);
    let fracs = collect(&|r| r.frac_recovered);
    let target = config.bound_target();
    let reaching = ok
        .iter()
        .filter(|o| {
            o.row.coverage.is_some_and(|c| c >= config.coverage_target)
                && o.row.bound.is_some_and(|b| b >= target)
        })
        .count();
    let bound_share = reaching as f64 / outcomes.len() as f64;
    let property_failures = ok
        .iter()
        .filter(|o| {
            o.cluster_properties
                .as_ref()
                .is_some_and(|p| !p.holds(config.rho, config.tolerance))
        })
        .count();
    let payoff_min = ok
        .iter()
        .map(|o| o.payoff_range.0)
        .fold(f64::INFINITY, f64::min);
    let payoff_max = ok
        .iter()
        .map(|o| o.payoff_range.1)
        .fold(f64::NEG_INFINITY, f64::max);
    let false_positives = ok.iter().map(|o| o.false_positives).sum();
    let mean_frac = (!fracs.is_empty()).then(|| mean(&fracs));
    let background = ok
        .iter()
        .filter_map(|o| o.background_cluster_payoff)
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));

    let errors = outcomes.len() - ok.len();
    let mut failures = Vec::new();
    if errors > 0 {
        failures.push(format!("{errors} seed(s) failed with an error"));
    }
    let acc = &config.acceptance;
    if let Some(share) = acc.min_bound_share {
        if bound_share < share {
            failures.push(format!("bound share {bound_share:.3} below {share}"));
        }
    }
    if let Some(min) = acc.min_mean_fraction {
        if !mean_frac.is_some_and(|f| f >= min) {
            failures.push(format!("mean recovered fraction {mean_frac:?} below {min}"));
        }
    }
    if let Some(max) = acc.max_mean_fraction {
        if !mean_frac.is_some_and(|f| f <= max) {
            failures.push(format!("mean recovered fraction {mean_frac:?} above {max}"));
        }
    }
    if acc.require_cluster_properties && property_failures > 0 {
        failures.push(format!(
            "cluster inequalities failed on {property_failures} seed(s)"
        ));
    }
    if false_positives > 0 {
        failures.push(format!("{false_positives} false positive(s)"));
    }
    if acc.require_payoff_range
        && (payoff_min < -2.0 * config.rho - 1e-12 || payoff_max > 1.0 + 1e-12)
    {
        failures.push(format!("payoffs span [{payoff_min}, {payoff_max}]"));
    }

    Summary {
        preset: config.preset.clone(),
        seeds: outcomes.len(),
        errors,
        mean_coverage: mean(&coverage),
        coverage_target: config.coverage_target,
        mean_bound: mean(&bounds),
        bound_target: target,
        bound_share,
        mean_lp_total: (!lp.is_empty()).then(|| mean(&lp)),
        mean_frac_recovered: mean_frac,
        false_positives,
        cluster_property_failures: property_failures,
        max_background_cluster_payoff: background,
        payoff_min,
        payoff_max,
        pass: failures.is_empty(),
        failures,
    }
}

/// Builds an instance exactly as an experiment seed would.
pub fn instance_for(config: &ExperimentConfig, seed: u64) -> Result<PlantedCoverInstance> {
    gen_planted_cover(config.n, config.p, config.k, config.r, seed)
}
