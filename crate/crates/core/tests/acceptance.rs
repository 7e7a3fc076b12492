//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::Rng;
use signalgame::equilibrium::{
    decompose_matroid_point, solve_matrix_game, solve_security_exact_small, solve_security_subgame,
    SecurityGame,
};
use signalgame::game::{
    decomposition_to_scheme, scheme_to_decomposition, BayesianZeroSumGame, SignalingScheme,
};
use signalgame::graph::{bidensity, density, gen_gnp, gen_planted_cover, Graph};
use signalgame::harness::validators::{bidensity_seeds, distinguisher_accuracy};
use signalgame::harness::{run_experiment, ExperimentConfig, ExperimentReport, ValidatorConfig};
use signalgame::recovery::{approx_recover_clique, RecoveryParams};
use signalgame::rng;
use signalgame::signaling::grid_envelope_oracle;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn random_posterior(r: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut x: Vec<f64> = (0..n)
        .map(|_| if r.gen_bool(0.2) { 0.0 } else { r.gen::<f64>() })
        .collect();
    if x.iter().all(|&v| v == 0.0) {
        x[0] = 1.0;
    }
    let s: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= s);
    x
}

fn security_oracle_agreement() -> Verdict {
    let mut worst: f64 = 0.0;
    let instances = 300;
    for i in 0..instances {
        let mut r = rng::stream(17, "acceptance-security", i);
        let n = r.gen_range(2..=8);
        let g = gen_gnp(n, r.gen_range(0.1..0.9), r.gen()).unwrap();
        let d = r.gen_range(1..=n.min(2));
        let rho = [0.5, 1.0, 2.0][r.gen_range(0..3)];
        let x = random_posterior(&mut r, n);
        let game = SecurityGame::new(&g, d, rho).unwrap();
        let reduced = solve_security_subgame(&game, &x).unwrap().value;
        let exact = solve_security_exact_small(&game, &x).unwrap().value;
        worst = worst.max((reduced - exact).abs());
    }
    verdict(
        worst <= 1e-6,
        format!("{instances} instances, max |reduced - enumerated| = {worst:.2e}"),
    )
}

/// Best-response gap of a claimed saddle point, computed from scratch.
fn saddle_gap(a: &[Vec<f64>], x: &[f64], y: &[f64]) -> f64 {
    let cols = a[0].len();
    let row_guarantee = (0..cols)
        .map(|j| (0..a.len()).map(|i| x[i] * a[i][j]).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    let col_guarantee = a
        .iter()
        .map(|row| row.iter().zip(y).map(|(v, p)| v * p).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    col_guarantee - row_guarantee
}

fn matrix_game_values() -> Verdict {
    let cases: [(Vec<Vec<f64>>, f64); 3] = [
        (vec![vec![1.0, -1.0], vec![-1.0, 1.0]], 0.0),
        (
            vec![
                vec![0.0, -1.0, 1.0],
                vec![1.0, 0.0, -1.0],
                vec![-1.0, 1.0, 0.0],
            ],
            0.0,
        ),
        (vec![vec![3.0, 0.0], vec![1.0, 2.0]], 1.5),
    ];
    let mut worst_value: f64 = 0.0;
    for (a, v) in &cases {
        worst_value = worst_value.max((solve_matrix_game(a).unwrap().value - v).abs());
    }
    let mut worst_gap: f64 = 0.0;
    for i in 0..1000 {
        let mut r = rng::stream(23, "acceptance-matrix", i);
        let a: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..5).map(|_| r.gen_range(-1.0..1.0)).collect())
            .collect();
        let s = solve_matrix_game(&a).unwrap();
        worst_gap = worst_gap.max(saddle_gap(&a, &s.row_strategy, &s.col_strategy));
    }
    verdict(
        worst_value <= 1e-6 && worst_gap <= 1e-6,
        format!(
            "named games off by {worst_value:.2e}, max gap over 1000 random 5x5 = {worst_gap:.2e}"
        ),
    )
}

fn run_preset(name: &str) -> ExperimentReport {
    run_experiment(&ExperimentConfig::preset(name).unwrap()).unwrap()
}

fn clique_partition_bound() -> Verdict {
    let report = run_preset("lemma3");
    let s = &report.summary;
    let reaching = report
        .outcomes
        .iter()
        .filter(|o| {
            o.row.coverage.unwrap_or(0.0) >= 0.9 && o.row.bound.unwrap_or(f64::NEG_INFINITY) >= 0.8
        })
        .count();
    let share = reaching as f64 / report.outcomes.len() as f64;
    let min_bound = report
        .outcomes
        .iter()
        .filter_map(|o| o.row.bound)
        .fold(f64::INFINITY, f64::min);
    verdict(
        share >= 0.95 && s.errors == 0,
        format!(
            "n=25000 k=150 r=500 d=1 rho=1: {reaching}/{} seeds with coverage >= 0.9 and bound >= 0.8 \
             (mean coverage {:.4}, mean bound {:.4}, min bound {min_bound:.4})",
            report.outcomes.len(),
            s.mean_coverage,
            s.mean_bound
        ),
    )
}

fn recovery_pipeline(desk: &ExperimentReport) -> Verdict {
    let start = Instant::now();
    let opaque = run_preset("opaque-control");
    let elapsed =
        start.elapsed() + Duration::from_millis(desk.outcomes.iter().map(|o| o.runtime_ms).sum());
    let frac = desk.summary.mean_frac_recovered.unwrap_or(0.0);
    let control = opaque.summary.mean_frac_recovered.unwrap_or(1.0);
    let fp = desk.summary.false_positives + opaque.summary.false_positives;
    let errors = desk.summary.errors + opaque.summary.errors;
    verdict(
        frac >= 0.5 && control <= 0.1 && fp == 0 && errors == 0 && elapsed < Duration::from_secs(600),
        format!(
            "n=3000 k=60 r=150 d=20 rho=1 over 20 seeds: mean fraction {frac:.4}, opaque {control:.4}, \
             false positives {fp}, about {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn single_cluster_recovery() -> Verdict {
    let (n, k) = (2000, 50);
    let params = |factor: f64| RecoveryParams {
        epsilon: 0.1,
        sample_factor: factor,
        trial_budget: 5,
        d: 2,
        rho: 1.0,
        generic_lp: false,
    };
    let run = |factor: f64| {
        let mut hits = 0;
        let mut silent = 0;
        for seed in 0..100u64 {
            let inst = gen_planted_cover(n, 0.5, k, 1, seed).unwrap();
            let s = &inst.planted_cliques[0];
            if approx_recover_clique(&inst.graph, s, k, &params(factor), seed).contains(s) {
                hits += 1;
            }
            let outside: Vec<usize> = (0..n).filter(|v| s.binary_search(v).is_err()).collect();
            let mut r = rng::stream(seed, "acceptance-disjoint", 0);
            let t = rng::sample_without_replacement(&mut r, &outside, k);
            if approx_recover_clique(&inst.graph, &t, k, &params(factor), seed).is_empty() {
                silent += 1;
            }
        }
        (hits, silent)
    };
    let (hits, silent) = run(1.0);
    let (half_hits, half_silent) = run(0.5);
    verdict(
        hits >= 95 && silent >= 95,
        format!(
            "n=2000 k=50, 11 sampled vertices: clique found {hits}/100, disjoint cluster silent {silent}/100 \
             (with 6 sampled vertices: {half_hits}/100 and {half_silent}/100)"
        ),
    )
}

fn bidensity_check() -> Verdict {
    let seeds: Vec<u64> = (0..100).collect();
    let out = bidensity_seeds(2000, 0.5, &ValidatorConfig::default(), &seeds).unwrap();
    verdict(
        out.share >= 0.99,
        format!(
            "n=2000 p=0.5 slack 1.1: {}/100 seeds pass, worst bidensity {:.4}",
            out.passed, out.worst
        ),
    )
}

fn distinguisher_check() -> Verdict {
    let seeds: Vec<u64> = (0..100).collect();
    let out = distinguisher_accuracy(2000, 0.5, 80, 25, &seeds, 0.95).unwrap();
    verdict(
        out.accuracy >= 0.95,
        format!(
            "n=2000 k=80 r=25: accuracy {:.3} (null {}/100, planted {}/100)",
            out.accuracy, out.null_correct, out.planted_correct
        ),
    )
}

fn envelope_oracle() -> Verdict {
    let toy =
        |payoffs: Vec<Vec<Vec<f64>>>| BayesianZeroSumGame::new(payoffs, vec![0.5, 0.5]).unwrap();
    let convex = toy(vec![vec![vec![1.0], vec![0.0]], vec![vec![0.0], vec![1.0]]]);
    let concave = toy(vec![
        vec![vec![1.0, 0.0], vec![0.0, 0.0]],
        vec![vec![0.0, 0.0], vec![0.0, 1.0]],
    ]);
    let linear = toy(vec![vec![vec![3.0]], vec![vec![-1.0]]]);
    let c = grid_envelope_oracle(&convex, 0.01).unwrap();
    let k = grid_envelope_oracle(&concave, 0.01).unwrap();
    let l = grid_envelope_oracle(&linear, 0.01).unwrap();
    let pass =
        c.value == 1.0 && (k.value - 0.25).abs() <= k.error_bound && (l.value - 1.0).abs() <= 1e-9;
    verdict(
        pass,
        format!(
            "convex {:.12}, concave {:.12} (allowed error {:.3}), linear {:.12}",
            c.value, k.value, k.error_bound, l.value
        ),
    )
}

fn invariant_suites(desk: &ExperimentReport) -> Verdict {
    let mut round_trip: f64 = 0.0;
    let mut matroid: f64 = 0.0;
    let mut identity: f64 = 0.0;
    for i in 0..200u64 {
        let mut r = rng::stream(31, "acceptance-invariants", i);
        let (m, s) = (r.gen_range(1..6), r.gen_range(1..6));
        let mut prior = random_posterior(&mut r, m);
        prior
            .iter_mut()
            .for_each(|p| *p = 0.5 * *p + 0.5 / m as f64);
        let phi: Vec<Vec<f64>> = (0..m).map(|_| random_posterior(&mut r, s)).collect();
        let scheme = SignalingScheme::new(phi.clone()).unwrap();
        let dec = scheme_to_decomposition(&prior, &scheme).unwrap();
        let back = decomposition_to_scheme(&prior, &dec).unwrap();
        // Signals never sent are pruned, so compare the signal usage per state.
        for (theta, row) in phi.iter().enumerate() {
            let mut a: Vec<f64> = row.iter().copied().filter(|v| *v > 1e-12).collect();
            let mut b: Vec<f64> = back.phi()[theta]
                .iter()
                .copied()
                .filter(|v| *v > 1e-12)
                .collect();
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            round_trip = round_trip.max(if a.len() == b.len() {
                a.iter()
                    .zip(&b)
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max)
            } else {
                f64::INFINITY
            });
        }

        let n = r.gen_range(1..12);
        let d = r.gen_range(1..=n);
        let mut z: Vec<f64> = (0..n).map(|_| r.gen::<f64>()).collect();
        // Scale into the base polytope: entries in [0, 1] summing to d.
        for _ in 0..50 {
            let sum: f64 = z.iter().sum();
            z.iter_mut()
                .for_each(|v| *v = (*v * d as f64 / sum).min(1.0));
        }
        let sum: f64 = z.iter().sum();
        if (sum - d as f64).abs() < 1e-9 {
            let parts = decompose_matroid_point(&z, d).unwrap();
            let mut rebuilt = vec![0.0; n];
            for (w, set) in &parts {
                assert!(set.len() <= d);
                set.iter().for_each(|&v| rebuilt[v] += w);
            }
            matroid = matroid.max(
                rebuilt
                    .iter()
                    .zip(&z)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max),
            );
        }

        let gn = r.gen_range(2..80);
        let g: Graph = gen_gnp(gn, r.gen(), r.gen()).unwrap();
        let pool: Vec<usize> = (0..gn).collect();
        let size = r.gen_range(2..=gn);
        let set = rng::sample_without_replacement(&mut r, &pool, size);
        let lhs = bidensity(&g, &set, &set).unwrap();
        let rhs = density(&g, &set).unwrap() * (1.0 - 1.0 / size as f64);
        identity = identity.max((lhs - rhs).abs());
    }
    let property_failures = desk.summary.cluster_property_failures;
    let checked = desk
        .outcomes
        .iter()
        .filter(|o| o.cluster_properties.is_some())
        .count();
    verdict(
        round_trip <= 1e-7 && matroid <= 1e-7 && identity <= 1e-12 && property_failures == 0 && checked == 20,
        format!(
            "round trip {round_trip:.2e}, matroid {matroid:.2e}, self-bidensity identity {identity:.2e}, \
             cluster inequalities failed on {property_failures} of {checked} desk runs"
        ),
    )
}

fn main() {
    let desk = run_preset("recovery-desk");
    type Check<'a> = Box<dyn Fn() -> Verdict + 'a>;
    let criteria: Vec<(&str, Check)> = vec![
        (
            "security equilibrium oracle equivalence",
            Box::new(security_oracle_agreement),
        ),
        (
            "matrix game values and duality gaps",
            Box::new(matrix_game_values),
        ),
        (
            "clique-partition attacker bound",
            Box::new(clique_partition_bound),
        ),
        (
            "recovery pipeline and opaque control",
            Box::new(|| recovery_pipeline(&desk)),
        ),
        (
            "single cluster clique recovery",
            Box::new(single_cluster_recovery),
        ),
        ("random graph bidensity", Box::new(bidensity_check)),
        ("edge-count distinguisher", Box::new(distinguisher_check)),
        ("grid envelope oracle", Box::new(envelope_oracle)),
        ("invariant suites", Box::new(|| invariant_suites(&desk))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {}: {} - {name}: {} [{:.1}s]",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
