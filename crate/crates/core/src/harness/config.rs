use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Parallelism;
use crate::recovery::RecoveryParams;

/// Which scheme an experiment feeds into the pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    CliquePartition,
    Opaque,
}

/// Pass/fail thresholds for a run. Unset fields are not checked.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Acceptance {
    /// Share of seeds that must reach both the coverage and the bound target.
    pub min_bound_share: Option<f64>,
    pub min_mean_fraction: Option<f64>,
    pub max_mean_fraction: Option<f64>,
    /// Require the cluster inequalities on every seed with recovery.
    pub require_cluster_properties: bool,
    /// Require every payoff entry to lie in `[−2ρ, 1]`.
    pub require_payoff_range: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub preset: String,
    pub n: usize,
    pub p: f64,
    pub k: usize,
    pub r: usize,
    pub d: usize,
    pub rho: f64,
    /// The constant tying `ρd` to `k` (`ρd = k/c`). The bound target is
    /// `0.9 − 15/c`.
    pub c: f64,
    pub epsilon: f64,
    pub sample_factor: f64,
    pub trial_budget: usize,
    pub seeds: Vec<u64>,
    pub scheme: SchemeKind,
    pub recover: bool,
    /// Full LP evaluation of the scheme is done only up to this many vertices.
    pub lp_eval_max_n: usize,
    /// Coverage a seed must reach to count toward the bound share.
    pub coverage_target: f64,
    pub acceptance: Acceptance,
    /// Recorded verbatim in the CSV so relaxed constants stay visible.
    pub constants_profile: String,
    /// Seeds are processed in this mode; each seed's pipeline runs inside.
    pub seed_parallelism: Parallelism,
    /// Write wall-clock times into the CSV instead of only the metadata file.
    pub runtime_in_csv: bool,
    pub tolerance: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            preset: "custom".into(),
            n: 500,
            p: 0.5,
            k: 20,
            r: 75,
            d: 10,
            rho: 1.0,
            c: 2.0,
            epsilon: 0.1,
            sample_factor: 1.0,
            trial_budget: 8,
            seeds: (0..5).collect(),
            scheme: SchemeKind::CliquePartition,
            recover: true,
            lp_eval_max_n: 1500,
            coverage_target: 0.9,
            acceptance: Acceptance::default(),
            constants_profile: "custom".into(),
            seed_parallelism: Parallelism::Parallel,
            runtime_in_csv: false,
            tolerance: 1e-6,
        }
    }
}

pub const PRESETS: &[&str] = &[
    "lemma3",
    "theorem2-shape",
    "recovery-desk",
    "opaque-control",
    "smoke",
];

impl ExperimentConfig {
    pub fn preset(name: &str) -> Result<Self> {
        let seeds20: Vec<u64> = (0..20).collect();
        let cfg = match name {
            // ρd = k/150 with d = 1, ρ = 1 and r = 3n/k.
            "lemma3" => ExperimentConfig {
                preset: name.into(),
                n: 25_000,
                k: 150,
                r: 500,
                d: 1,
                rho: 1.0,
                c: 150.0,
                seeds: seeds20,
                recover: false,
                acceptance: Acceptance {
                    min_bound_share: Some(0.95),
                    ..Acceptance::default()
                },
                constants_profile: "reference".into(),
                seed_parallelism: Parallelism::Sequential,
                ..ExperimentConfig::default()
            },
            // d = ⌊k/150⌋ with ρ = 1.
            "theorem2-shape" => ExperimentConfig {
                preset: name.into(),
                n: 25_000,
                k: 150,
                r: 500,
                d: 1,
                rho: 1.0,
                c: 150.0,
                seeds: (0..5).collect(),
                recover: false,
                acceptance: Acceptance {
                    require_payoff_range: true,
                    ..Acceptance::default()
                },
                constants_profile: "reference".into(),
                seed_parallelism: Parallelism::Sequential,
                ..ExperimentConfig::default()
            },
            "recovery-desk" => ExperimentConfig {
                preset: name.into(),
                n: 3000,
                k: 60,
                r: 150,
                d: 20,
                rho: 1.0,
                c: 3.0,
                sample_factor: 1.0,
                trial_budget: 4,
                seeds: seeds20,
                acceptance: Acceptance {
                    min_mean_fraction: Some(0.5),
                    require_cluster_properties: true,
                    ..Acceptance::default()
                },
                constants_profile: "desk:c=3,c_R=1,trials=4".into(),
                ..ExperimentConfig::default()
            },
            "opaque-control" => ExperimentConfig {
                preset: name.into(),
                scheme: SchemeKind::Opaque,
                acceptance: Acceptance {
                    max_mean_fraction: Some(0.1),
                    require_cluster_properties: true,
                    ..Acceptance::default()
                },
                constants_profile: "desk:c=3,c_R=1,trials=4,opaque".into(),
                ..ExperimentConfig::preset("recovery-desk")?
            },
            "smoke" => ExperimentConfig {
                preset: name.into(),
                n: 400,
                k: 30,
                r: 40,
                d: 10,
                rho: 1.0,
                c: 3.0,
                seeds: (0..3).collect(),
                constants_profile: "smoke".into(),
                ..ExperimentConfig::default()
            },
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown preset `{other}` (known: {})",
                    PRESETS.join(", ")
                )))
            }
        };
        Ok(cfg)
    }

    /// `0.9 − 15/c`.
    pub fn bound_target(&self) -> f64 {
        0.9 - 15.0 / self.c
    }

    pub fn recovery_params(&self) -> RecoveryParams {
        RecoveryParams {
            epsilon: self.epsilon,
            sample_factor: self.sample_factor,
            trial_budget: self.trial_budget,
            d: self.d,
            rho: self.rho,
            generic_lp: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.p) {
            return bad(format!("p = {} outside [0, 1]", self.p));
        }
        if self.k == 0 || self.k > self.n {
            return bad(format!("k = {} must lie in 1..={}", self.k, self.n));
        }
        if self.d == 0 || self.d > self.n {
            return bad(format!("d = {} must lie in 1..={}", self.d, self.n));
        }
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return bad(format!("rho = {} must be nonnegative", self.rho));
        }
        if !(self.c > 0.0) {
            return bad(format!("c = {} must be positive", self.c));
        }
        if self.seeds.is_empty() {
            return bad("seed list is empty".into());
        }
        if self.recover {
            self.recovery_params().validate()?;
        }
        Ok(())
    }
}

/// Settings for the random-graph validators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ValidatorConfig {
    /// Clusters fail when their bidensity exceeds `density_slack · p`.
    pub density_slack: f64,
    /// Clusters have at least `⌈min_cluster_factor · log₂ n⌉` vertices.
    pub min_cluster_factor: f64,
    /// Upper end of the sampled cluster sizes; defaults to twice the minimum.
    pub max_cluster_size: Option<usize>,
    pub samples: usize,
    /// Share of seeds that must pass in a multi-seed run.
    pub seed_pass_share: f64,
}

impl Default for ValidatorConfig {
    fn default() -> Self {
        ValidatorConfig {
            density_slack: 1.1,
            min_cluster_factor: 9.2,
            max_cluster_size: None,
            samples: 200,
            seed_pass_share: 0.99,
        }
    }
}

impl ValidatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.density_slack > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "density slack {} must exceed 1",
                self.density_slack
            )));
        }
        if !(self.min_cluster_factor > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "minimum cluster factor {} must be positive",
                self.min_cluster_factor
            )));
        }
        if self.samples == 0 {
            return Err(Error::InvalidParameter(
                "sample count must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn min_cluster_size(&self, n: usize) -> usize {
        ((self.min_cluster_factor * (n.max(2) as f64).log2()).ceil() as usize).max(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for name in PRESETS {
            ExperimentConfig::preset(name).unwrap().validate().unwrap();
        }
        assert!(ExperimentConfig::preset("nope").is_err());
    }

    #[test]
    fn lemma3_target() {
        let cfg = ExperimentConfig::preset("lemma3").unwrap();
        assert!((cfg.bound_target() - 0.8).abs() < 1e-12);
        assert_eq!(cfg.r, 3 * cfg.n / cfg.k);
        assert!((cfg.rho * cfg.d as f64 - cfg.k as f64 / cfg.c).abs() < 1e-12);
    }

    #[test]
    fn partial_json_overrides_defaults() {
        let cfg: ExperimentConfig = serde_json::from_str(r#"{"n": 100, "seeds": [4]}"#).unwrap();
        assert_eq!(cfg.n, 100);
        assert_eq!(cfg.seeds, vec![4]);
        assert_eq!(cfg.k, ExperimentConfig::default().k);
        let v: ValidatorConfig = serde_json::from_str(r#"{"samples": 10}"#).unwrap();
        assert_eq!(v.density_slack, 1.1);
        assert_eq!(v.min_cluster_size(2000), 101);
    }
}
