//! The `signalgame` command line.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use super::config::{ExperimentConfig, ValidatorConfig};
use super::experiment::run_experiment;
use super::fs::{truth_path, AuditedFs};
use super::validators::{
    amplification_check, bidensity_seeds, coverage_seeds, distinguisher_accuracy, payoff_range,
};
use crate::equilibrium::{solve_matrix_game, solve_security_subgame, SecurityGame};
use crate::error::{Error, Result};
use crate::game::{
    expected_matrix, scheme_to_decomposition, BayesianZeroSumGame, ConvexDecomposition,
    SignalingScheme,
};
use crate::graph::io::Truth;
use crate::graph::{gen_planted_cover, Graph};
use crate::recovery::{recover_candidates, score_candidates, verify_clique, RecoveryParams};
use crate::signaling::{
    clique_partition, evaluate_decomposition_explicit, evaluate_scheme_security,
    grid_envelope_oracle, partition_decomposition, partition_lower_bound,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "signalgame",
    version,
    about = "Signaling in zero-sum and network security games"
)]
pub struct Cli {
    /// Base seed. For `experiment` it replaces the preset's seed list.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file, or output directory for `gen` and `experiment`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// JSON file overriding experiment or validator settings.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SchemeChoice {
    CliquePartition,
    Opaque,
    FullRevelation,
    Envelope,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ValidateKind {
    Bidensity,
    Coverage,
    Distinguisher,
    PayoffRange,
    Amplification,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a planted clique cover; writes `<name>.txt` (or `.sgrb`) and
    /// `<name>.truth.json`.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        r: usize,
        #[arg(long, default_value = "instance")]
        name: String,
        /// Write the packed binary graph format.
        #[arg(long)]
        binary: bool,
    },
    /// Solve an explicit game at a posterior, or the security game on a graph.
    Solve {
        #[arg(long, conflicts_with = "graph")]
        game: Option<PathBuf>,
        #[arg(long, requires_all = ["d", "rho"])]
        graph: Option<PathBuf>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        rho: Option<f64>,
        /// JSON array; defaults to the prior (uniform for graphs).
        #[arg(long)]
        posterior: Option<PathBuf>,
    },
    /// Build a signaling scheme.
    Scheme {
        #[arg(long, value_enum)]
        kind: SchemeChoice,
        /// Required for the clique-partition scheme.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Number of states for the opaque and full-revelation schemes.
        #[arg(long)]
        n: Option<usize>,
        /// Explicit game; its prior is used, and it is required for `envelope`.
        #[arg(long)]
        game: Option<PathBuf>,
        /// Grid spacing for `envelope`.
        #[arg(long, default_value_t = 0.01)]
        h: f64,
    },
    /// Evaluate a scheme on a security game or an explicit game.
    Eval {
        #[arg(long)]
        scheme: PathBuf,
        #[arg(long, conflicts_with = "game", requires_all = ["d", "rho"])]
        graph: Option<PathBuf>,
        #[arg(long)]
        game: Option<PathBuf>,
        /// Fills in p, k, r and seed for the CSV row.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        rho: Option<f64>,
        /// Skip the per-signal LPs and report only the partition bound.
        #[arg(long)]
        bound_only: bool,
    },
    /// Recover planted cliques from a graph and a scheme.
    Recover {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        scheme: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 1.0)]
        sample_factor: f64,
        #[arg(long, default_value_t = 4)]
        trials: usize,
        /// Score candidates against this ground truth.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Run an experiment preset over its seeds.
    Experiment {
        #[arg(long, default_value = "smoke")]
        preset: String,
        /// Number of consecutive seeds starting at `--seed`.
        #[arg(long)]
        num_seeds: Option<usize>,
        /// Put wall-clock times in the CSV (breaks byte reproducibility).
        #[arg(long)]
        runtime_in_csv: bool,
    },
    /// Statistical checks on random instances.
    Validate {
        #[arg(value_enum)]
        kind: ValidateKind,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        r: Option<usize>,
        /// Cliques added by amplification.
        #[arg(long, default_value_t = 10)]
        extra: usize,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        /// For `payoff-range`: use this graph instead of generating one.
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        seeds: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    fn from_pass(pass: bool) -> Self {
        if pass {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }

    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 2,
        }
    }
}

struct Ctx<'a> {
    fs: &'a AuditedFs,
    stdout: &'a mut dyn Write,
    out: Option<PathBuf>,
    format: Format,
}

impl Ctx<'_> {
    /// Writes `text` to `--out` when given, else to stdout.
    fn emit(&mut self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => self.fs.write_string(path, text),
            None => self
                .stdout
                .write_all(text.as_bytes())
                .map_err(|e| Error::io("<stdout>", e)),
        }
    }

    fn emit_json<T: Serialize>(&mut self, value: &T) -> Result<()> {
        if self.format == Format::Csv {
            return Err(Error::InvalidParameter(
                "this command only writes JSON".into(),
            ));
        }
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.emit(&text)
    }

    fn say(&mut self, text: &str) -> Result<()> {
        writeln!(self.stdout, "{text}").map_err(|e| Error::io("<stdout>", e))
    }
}

pub fn run(cli: Cli, fs: &AuditedFs, stdout: &mut dyn Write) -> Result<Outcome> {
    let mut ctx = Ctx {
        fs,
        stdout,
        out: cli.out.clone(),
        format: cli.format,
    };
    let seed = cli.seed;
    let config = cli.config.clone();
    match cli.command {
        Command::Gen {
            n,
            p,
            k,
            r,
            name,
            binary,
        } => gen(&mut ctx, n, p, k, r, &name, binary, seed.unwrap_or(0)),
        Command::Solve {
            game,
            graph,
            d,
            rho,
            posterior,
        } => solve(&mut ctx, game, graph, d, rho, posterior),
        Command::Scheme {
            kind,
            truth,
            n,
            game,
            h,
        } => scheme(&mut ctx, kind, truth, n, game, h),
        Command::Eval {
            scheme,
            graph,
            game,
            truth,
            d,
            rho,
            bound_only,
        } => eval(&mut ctx, &scheme, graph, game, truth, d, rho, bound_only),
        Command::Recover {
            graph,
            scheme,
            k,
            d,
            rho,
            epsilon,
            sample_factor,
            trials,
            truth,
        } => {
            let params = RecoveryParams {
                epsilon,
                sample_factor,
                trial_budget: trials,
                d,
                rho,
                generic_lp: false,
            };
            recover(
                &mut ctx,
                &graph,
                &scheme,
                k,
                &params,
                truth,
                seed.unwrap_or(0),
            )
        }
        Command::Experiment {
            preset,
            num_seeds,
            runtime_in_csv,
        } => experiment(
            &mut ctx,
            &preset,
            config.as_deref(),
            seed,
            num_seeds,
            runtime_in_csv,
        ),
        Command::Validate {
            kind,
            n,
            p,
            k,
            r,
            extra,
            d,
            rho,
            graph,
            seeds,
        } => {
            let seeds: Vec<u64> = (0..seeds as u64).map(|i| seed.unwrap_or(0) + i).collect();
            let vconfig: ValidatorConfig = match &config {
                Some(path) => fs.read_json(path)?,
                None => ValidatorConfig::default(),
            };
            validate(
                &mut ctx, kind, n, p, k, r, extra, d, rho, graph, &seeds, &vconfig,
            )
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn gen(
    ctx: &mut Ctx,
    n: usize,
    p: f64,
    k: usize,
    r: usize,
    name: &str,
    binary: bool,
    seed: u64,
) -> Result<Outcome> {
    let instance = gen_planted_cover(n, p, k, r, seed)?;
    let dir = ctx.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let graph_path = dir.join(format!("{name}.{}", if binary { "sgrb" } else { "txt" }));
    let truth = truth_path(&dir, name);
    ctx.fs.write_graph(&graph_path, &instance.graph)?;
    ctx.fs.write_json(&truth, &Truth::of(&instance))?;
    let summary = serde_json::json!({
        "graph": graph_path,
        "truth": truth,
        "n": n,
        "edges": instance.graph.edge_count(),
        "coverage": instance.coverage(),
    });
    ctx.say(&serde_json::to_string_pretty(&summary)?)?;
    Ok(Outcome::Pass)
}

fn solve(
    ctx: &mut Ctx,
    game: Option<PathBuf>,
    graph: Option<PathBuf>,
    d: Option<usize>,
    rho: Option<f64>,
    posterior: Option<PathBuf>,
) -> Result<Outcome> {
    let posterior: Option<Vec<f64>> = posterior.map(|p| ctx.fs.read_json(&p)).transpose()?;
    if let Some(path) = game {
        let game: BayesianZeroSumGame = ctx.fs.read_json(&path)?;
        let x = posterior.unwrap_or_else(|| game.prior().to_vec());
        let sol = solve_matrix_game(&expected_matrix(&game, &x)?)?;
        let out = serde_json::json!({
            "value": sol.value,
            "y": sol.row_strategy,
            "z": sol.col_strategy,
            "decomposition": Value::Null,
            "gap": sol.gap,
        });
        ctx.emit_json(&out)?;
    } else if let Some(path) = graph {
        let g = ctx.fs.read_graph(&path)?;
        let (d, rho) = (d.expect("clap requires d"), rho.expect("clap requires rho"));
        let game = SecurityGame::new(&g, d, rho)?;
        let x = posterior.unwrap_or_else(|| game.prior().to_vec());
        ctx.emit_json(&solve_security_subgame(&game, &x)?)?;
    } else {
        return Err(Error::InvalidParameter(
            "solve needs --game or --graph".into(),
        ));
    }
    Ok(Outcome::Pass)
}

fn scheme(
    ctx: &mut Ctx,
    kind: SchemeChoice,
    truth: Option<PathBuf>,
    n: Option<usize>,
    game: Option<PathBuf>,
    h: f64,
) -> Result<Outcome> {
    let game: Option<BayesianZeroSumGame> = game.map(|p| ctx.fs.read_json(&p)).transpose()?;
    let prior = |n: Option<usize>| -> Result<Vec<f64>> {
        match (&game, n) {
            (Some(g), _) => Ok(g.prior().to_vec()),
            (None, Some(n)) if n > 0 => Ok(vec![1.0 / n as f64; n]),
            _ => Err(Error::InvalidParameter("give --n or --game".into())),
        }
    };
    match kind {
        SchemeChoice::CliquePartition => {
            let path = truth
                .ok_or_else(|| Error::InvalidParameter("clique-partition needs --truth".into()))?;
            let truth: Truth = ctx.fs.read_json(&path)?;
            let n = truth.params.n;
            let dec = partition_decomposition(n, &clique_partition(n, &truth.cliques))?;
            ctx.emit_json(&dec)?;
        }
        SchemeChoice::Opaque | SchemeChoice::FullRevelation => {
            let prior = prior(n)?;
            let m = prior.len();
            let s = if kind == SchemeChoice::Opaque {
                SignalingScheme::opaque(m)
            } else {
                SignalingScheme::full_revelation(m)
            };
            ctx.emit_json(&scheme_to_decomposition(&prior, &s)?)?;
        }
        SchemeChoice::Envelope => {
            let game = game
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("envelope needs --game".into()))?;
            ctx.emit_json(&grid_envelope_oracle(game, h)?)?;
        }
    }
    Ok(Outcome::Pass)
}

/// Reads a decomposition, an object holding one under `decomposition`, or a
/// state-by-signal scheme (converted with `prior`).
fn load_decomposition(fs: &AuditedFs, path: &Path, prior: &[f64]) -> Result<ConvexDecomposition> {
    let mut value: Value = fs.read_json(path)?;
    if let Some(inner) = value.get_mut("decomposition") {
        value = inner.take();
    }
    let bad = |e: serde_json::Error| Error::format(path, e.to_string());
    let dec = if value.get("phi").is_some() {
        let scheme: SignalingScheme = serde_json::from_value(value).map_err(bad)?;
        scheme_to_decomposition(prior, &scheme)?
    } else {
        serde_json::from_value(value).map_err(bad)?
    };
    dec.check_prior(prior)?;
    Ok(dec)
}

#[derive(Serialize)]
struct EvalRow {
    seed: Option<u64>,
    n: usize,
    p: Option<f64>,
    k: Option<usize>,
    r: Option<usize>,
    d: Option<usize>,
    rho: Option<f64>,
    bound: Option<f64>,
    total: Option<f64>,
    runtime_ms: u64,
}

#[allow(clippy::too_many_arguments)]
fn eval(
    ctx: &mut Ctx,
    scheme: &Path,
    graph: Option<PathBuf>,
    game: Option<PathBuf>,
    truth: Option<PathBuf>,
    d: Option<usize>,
    rho: Option<f64>,
    bound_only: bool,
) -> Result<Outcome> {
    let start = Instant::now();
    let truth: Option<Truth> = truth.map(|p| ctx.fs.read_json(&p)).transpose()?;
    let (n, evaluation, bound) = if let Some(path) = game {
        let game: BayesianZeroSumGame = ctx.fs.read_json(&path)?;
        let dec = load_decomposition(ctx.fs, scheme, game.prior())?;
        (
            game.num_states(),
            Some(evaluate_decomposition_explicit(&game, &dec)?),
            None,
        )
    } else if let Some(path) = graph {
        let g: Graph = ctx.fs.read_graph(&path)?;
        let (d, rho) = (d.expect("clap requires d"), rho.expect("clap requires rho"));
        let game = SecurityGame::new(&g, d, rho)?;
        let dec = load_decomposition(ctx.fs, scheme, game.prior())?;
        // The bound only exists for posteriors uniform on their support.
        let bound = partition_lower_bound(&g, &dec, d, rho).ok();
        let evaluation = if bound_only {
            None
        } else {
            Some(evaluate_scheme_security(&game, &dec)?)
        };
        (g.n(), evaluation, bound)
    } else {
        return Err(Error::InvalidParameter(
            "eval needs --game or --graph".into(),
        ));
    };
    let row = EvalRow {
        seed: truth.as_ref().map(|t| t.seed),
        n,
        p: truth.as_ref().map(|t| t.params.p),
        k: truth.as_ref().map(|t| t.params.k),
        r: truth.as_ref().map(|t| t.params.r),
        d,
        rho,
        bound,
        total: evaluation.as_ref().map(|e| e.total),
        runtime_ms: start.elapsed().as_millis() as u64,
    };
    match ctx.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.serialize(&row)
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            let bytes = w
                .into_inner()
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            ctx.emit(&String::from_utf8(bytes).expect("csv output is utf-8"))?;
        }
        Format::Json => {
            ctx.emit_json(&serde_json::json!({ "evaluation": evaluation, "row": row }))?
        }
    }
    Ok(Outcome::Pass)
}

#[derive(Serialize)]
struct RecoverOutput {
    clusters: Vec<Vec<usize>>,
    candidates: Vec<Vec<usize>>,
    /// Whether each candidate is a clique in the input graph.
    certified: Vec<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verified: Option<Vec<Vec<usize>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fraction_recovered: Option<f64>,
}

fn recover(
    ctx: &mut Ctx,
    graph: &Path,
    scheme: &Path,
    k: usize,
    params: &RecoveryParams,
    truth: Option<PathBuf>,
    seed: u64,
) -> Result<Outcome> {
    let g = ctx.fs.read_graph(graph)?;
    let prior = vec![1.0 / g.n().max(1) as f64; g.n()];
    let dec = load_decomposition(ctx.fs, scheme, &prior)?;
    let report = recover_candidates(&g, &dec, k, params, seed, Default::default())?;
    let certified = report
        .candidates
        .iter()
        .map(|c| verify_clique(&g, c))
        .collect();
    let output = match truth {
        Some(path) => {
            let truth: Truth = ctx.fs.read_json(&path)?;
            let scored = score_candidates(report, &truth.cliques);
            RecoverOutput {
                clusters: scored.clusters,
                candidates: scored.candidates,
                certified,
                verified: Some(scored.verified),
                fraction_recovered: Some(scored.fraction_recovered),
            }
        }
        None => RecoverOutput {
            clusters: report.clusters,
            candidates: report.candidates,
            certified,
            verified: None,
            fraction_recovered: None,
        },
    };
    ctx.emit_json(&output)?;
    Ok(Outcome::Pass)
}

/// The preset with the keys of `overlay` replacing its own.
pub fn overlay_config(preset: &str, overlay: Option<Value>) -> Result<ExperimentConfig> {
    let mut value = serde_json::to_value(ExperimentConfig::preset(preset)?)?;
    if let Some(Value::Object(extra)) = overlay {
        let base = value
            .as_object_mut()
            .expect("config serializes to an object");
        for (key, v) in extra {
            base.insert(key, v);
        }
    } else if overlay.is_some() {
        return Err(Error::InvalidParameter(
            "config file must hold a JSON object".into(),
        ));
    }
    Ok(serde_json::from_value(value)?)
}

fn experiment(
    ctx: &mut Ctx,
    preset: &str,
    config: Option<&Path>,
    seed: Option<u64>,
    num_seeds: Option<usize>,
    runtime_in_csv: bool,
) -> Result<Outcome> {
    let overlay: Option<Value> = config.map(|p| ctx.fs.read_json(p)).transpose()?;
    let mut cfg = overlay_config(preset, overlay)?;
    if seed.is_some() || num_seeds.is_some() {
        let start = seed.unwrap_or(0);
        let count = num_seeds.unwrap_or(cfg.seeds.len()) as u64;
        cfg.seeds = (start..start + count).collect();
    }
    cfg.runtime_in_csv |= runtime_in_csv;
    let report = run_experiment(&cfg)?;
    let csv = report.to_csv()?;
    if let Some(dir) = &ctx.out {
        let name = &cfg.preset;
        ctx.fs
            .write_string(&dir.join(format!("{name}.csv")), &csv)?;
        ctx.fs
            .write_json(&dir.join(format!("{name}.summary.json")), &report.summary)?;
        ctx.fs
            .write_json(&dir.join(format!("{name}.meta.json")), &report.meta())?;
    }
    match ctx.format {
        Format::Csv => ctx
            .stdout
            .write_all(csv.as_bytes())
            .map_err(|e| Error::io("<stdout>", e))?,
        Format::Json => ctx.say(&serde_json::to_string_pretty(&report.summary)?)?,
    }
    Ok(Outcome::from_pass(report.summary.pass))
}

#[allow(clippy::too_many_arguments)]
fn validate(
    ctx: &mut Ctx,
    kind: ValidateKind,
    n: Option<usize>,
    p: f64,
    k: Option<usize>,
    r: Option<usize>,
    extra: usize,
    d: usize,
    rho: f64,
    graph: Option<PathBuf>,
    seeds: &[u64],
    vconfig: &ValidatorConfig,
) -> Result<Outcome> {
    let pass = match kind {
        ValidateKind::Bidensity => {
            let out = bidensity_seeds(n.unwrap_or(2000), p, vconfig, seeds)?;
            ctx.emit_json(&out)?;
            out.pass
        }
        ValidateKind::Coverage => {
            let (n, k) = (n.unwrap_or(3000), k.unwrap_or(30));
            let out = coverage_seeds(
                n,
                p,
                k,
                r.unwrap_or(3 * n / k),
                seeds,
                vconfig.seed_pass_share,
            )?;
            ctx.emit_json(&out)?;
            out.pass
        }
        ValidateKind::Distinguisher => {
            let out = distinguisher_accuracy(
                n.unwrap_or(2000),
                p,
                k.unwrap_or(80),
                r.unwrap_or(25),
                seeds,
                0.95,
            )?;
            ctx.emit_json(&out)?;
            out.pass
        }
        ValidateKind::Amplification => {
            let out = amplification_check(
                n.unwrap_or(500),
                p,
                k.unwrap_or(20),
                r.unwrap_or(10),
                extra,
                seeds,
                0.01,
            )?;
            ctx.emit_json(&out)?;
            out.pass
        }
        ValidateKind::PayoffRange => {
            let g = match graph {
                Some(path) => ctx.fs.read_graph(&path)?,
                None => {
                    let (n, k) = (n.unwrap_or(2000), k.unwrap_or(40));
                    gen_planted_cover(
                        n,
                        p,
                        k,
                        r.unwrap_or(3 * n / k),
                        seeds.first().copied().unwrap_or(0),
                    )?
                    .graph
                }
            };
            let (lo, hi) = payoff_range(&g, d, rho);
            let pass = lo >= -2.0 * rho && hi <= 1.0;
            ctx.emit_json(&serde_json::json!({
                "pass": pass, "min": lo, "max": hi, "lower_limit": -2.0 * rho, "upper_limit": 1.0,
            }))?;
            pass
        }
    };
    Ok(Outcome::from_pass(pass))
}
