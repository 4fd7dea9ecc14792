//! Statistical acceptance suite for the whole pipeline.
//!
//! Twelve criteria cover the guarantees the library is built around: exact
//! weight conservation and marginal preservation of weighted pipage
//! rounding, negative correlation and concentration of the rounded
//! coordinates, convexity probes of the multilinear extension, optimality
//! inheritance and 2-approximate feasibility extension of the truncating
//! reduction, and end-to-end approximation ratios of the three solve
//! pipelines against the brute-force oracle.
//!
//! The criteria run sequentially inside one test so each runtime budget is
//! measured honestly on a single core; every criterion prints one
//! `PASS`/`FAIL` line (visible with `-- --nocapture`) and the test fails if
//! any check or time budget is missed. All seeds are fixed, so the suite is
//! fully deterministic.

use std::time::Instant;

use rand::Rng;

use fairknap::fixtures;
use fairknap::fractional::{self, GreedyConfig};
use fairknap::model::{self, GeneratorParams, ObjectiveKind, FEASIBILITY_TOL};
use fairknap::oracle;
use fairknap::relaxed::{self, RelaxedConfig};
use fairknap::rounding::{self, Rounder};
use fairknap::seeding;
use fairknap::stats::MeanStat;
use fairknap::submodular;
use fairknap::truncation;
use fairknap::{FractionalVector, Instance};

/// `1/e`, the constant behind the approximation targets.
const E_INV: f64 = 1.0 / std::f64::consts::E;

type Check = fn() -> Result<String, String>;

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, u64, Check); 12] = [
        ("weight conservation", 10, weight_conservation),
        ("marginal preservation", 30, marginal_preservation),
        ("expected objective", 60, expected_objective),
        ("negative correlation", 60, negative_correlation),
        ("concentration bound", 60, concentration_bound),
        ("convexity probes", 10, convexity_probes),
        ("optimality inheritance", 120, optimality_inheritance),
        ("feasibility extension", 120, feasibility_extension),
        ("truncating pipeline ratio", 300, truncating_pipeline_ratio),
        (
            "expected-fairness pipeline",
            300,
            expected_fairness_pipeline,
        ),
        (
            "expected-knapsack pipeline",
            300,
            expected_knapsack_pipeline,
        ),
        ("fractional guarantee", 60, fractional_guarantee),
    ];

    let mut failures = Vec::new();
    for (index, (name, limit_secs, run)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = run();
        let elapsed = started.elapsed().as_secs_f64();
        let in_time = elapsed <= *limit_secs as f64;
        let (ok, detail) = match outcome {
            Ok(detail) if in_time => (true, detail),
            Ok(detail) => (false, format!("{detail} [over the {limit_secs}s budget]")),
            Err(detail) => (false, detail),
        };
        println!(
            "[{:>2}/12] {}  {:<26} {:>6.2}s/{:>3}s  {}",
            index + 1,
            if ok { "PASS" } else { "FAIL" },
            name,
            elapsed,
            limit_secs,
            detail
        );
        if !ok {
            failures.push(format!("{name}: {detail}"));
        }
    }

    assert!(
        failures.is_empty(),
        "{} of 12 acceptance criteria failed:\n  {}",
        failures.len(),
        failures.join("\n  ")
    );
}

/// A deterministic batch of generated instances; `n` cycles through
/// `sizes`.
fn suite(
    count: usize,
    sizes: &[usize],
    k: usize,
    tightness: f64,
    slack: f64,
    objective: ObjectiveKind,
    base_seed: u64,
) -> Result<Vec<Instance>, String> {
    (0..count)
        .map(|i| {
            let params = GeneratorParams {
                n: sizes[i % sizes.len()],
                k,
                weight_range: (0.5, 2.0),
                bound_tightness: tightness,
                budget_slack: slack,
                objective,
            };
            model::generate_random(&params, seeding::derive(base_seed, i as u64))
                .map_err(|e| format!("generator: {e}"))
        })
        .collect()
}

/// A strictly fractional cube point, clear of both faces so every
/// coordinate genuinely participates in the rounding.
fn random_cube_point(n: usize, seed: u64) -> FractionalVector {
    let mut rng = seeding::new_rng(seed);
    FractionalVector((0..n).map(|_| 0.05 + 0.9 * rng.random::<f64>()).collect())
}

fn lib_err(e: fairknap::Error) -> String {
    format!("library error: {e}")
}

/// 1,000 weighted-pipage runs on 50 instances (n <= 12): the rounded
/// vector keeps the input's total weight to 1e-9 and leaves at most one
/// fractional coordinate.
fn weight_conservation() -> Result<String, String> {
    let instances = suite(50, &[8, 10, 12], 2, 0.4, 1.5, ObjectiveKind::Coverage, 101)?;
    let mut max_drift = 0.0f64;
    let mut max_fractional = 0usize;
    let mut runs = 0usize;
    for (i, inst) in instances.iter().enumerate() {
        let x = random_cube_point(inst.n(), seeding::derive(102, i as u64));
        let weights = inst.weights();
        let wx = x.dot(&weights);
        let run_base = seeding::derive(103, i as u64);
        for r in 0..20 {
            let (y, _) = rounding::weighted_pipage_round(inst, &x, seeding::derive(run_base, r))
                .map_err(lib_err)?;
            max_drift = max_drift.max((y.dot(&weights) - wx).abs());
            max_fractional = max_fractional.max(y.fractional_ids(rounding::SNAP_TOL).len());
            runs += 1;
        }
    }
    let detail = format!(
        "{runs} runs: max weight drift {max_drift:.1e}, max fractional coords {max_fractional}"
    );
    if max_drift <= 1e-9 && max_fractional <= 1 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// The two-element example at x = (0.5, 0.5) plus 20 random instances:
/// every empirical marginal over 20,000 weighted roundings sits within
/// 4 standard errors of its x_e.
fn marginal_preservation() -> Result<String, String> {
    let mut cases = vec![(fixtures::two_element(), FractionalVector(vec![0.5, 0.5]))];
    for (i, inst) in suite(20, &[8, 10, 12], 2, 0.4, 1.5, ObjectiveKind::Coverage, 201)?
        .into_iter()
        .enumerate()
    {
        let x = random_cube_point(inst.n(), seeding::derive(202, i as u64));
        cases.push((inst, x));
    }

    let mut worst_z = 0.0f64;
    let mut coords = 0usize;
    for (c, (inst, x)) in cases.iter().enumerate() {
        let stats = rounding::monte_carlo_stats(
            inst,
            &inst.objective,
            x,
            Rounder::Weighted,
            20_000,
            seeding::derive(203, c as u64),
        )
        .map_err(lib_err)?;
        for (e, stat) in stats.empirical_marginals.iter().enumerate() {
            let deviation = (stat.mean() - x.0[e]).abs();
            coords += 1;
            if stat.stderr() > 0.0 {
                worst_z = worst_z.max(deviation / stat.stderr());
            } else if deviation > 1e-12 {
                worst_z = f64::INFINITY;
            }
        }
    }
    let detail = format!(
        "{} cases x 20000 trials, {coords} marginals: worst |mean - x_e| = {worst_z:.2} stderr",
        cases.len()
    );
    if worst_z <= 4.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Rounding does not lose objective value in expectation: the mean exact
/// multilinear value at the rounded output stays within 4 standard errors
/// of F(x), over 5,000 trials on each of 20 instances (n <= 10).
fn expected_objective() -> Result<String, String> {
    let instances = suite(20, &[8, 9, 10], 2, 0.4, 1.5, ObjectiveKind::Coverage, 301)?;
    let mut worst_z = f64::INFINITY;
    for (i, inst) in instances.iter().enumerate() {
        let x = random_cube_point(inst.n(), seeding::derive(302, i as u64));
        let stats = rounding::monte_carlo_stats(
            inst,
            &inst.objective,
            &x,
            Rounder::Weighted,
            5_000,
            seeding::derive(303, i as u64),
        )
        .map_err(lib_err)?;
        let fx = submodular::multilinear_exact(&inst.objective, &x.0).map_err(lib_err)?;
        let mean = stats.multilinear_mean.mean();
        let se = stats.multilinear_mean.stderr();
        let z = if se > 0.0 {
            (mean - fx) / se
        } else if mean >= fx - 1e-12 {
            0.0
        } else {
            f64::NEG_INFINITY
        };
        worst_z = worst_z.min(z);
    }
    let detail =
        format!("20 instances x 5000 trials: min (mean F(y) - F(x))/stderr = {worst_z:.2}");
    if worst_z >= -4.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Rounded coordinates are negatively correlated: for every pair,
/// mean(y_p y_q) exceeds mean(y_p)·mean(y_q) by at most 4 combined
/// standard errors (delta method) over 20,000 trials per instance.
fn negative_correlation() -> Result<String, String> {
    const TRIALS: usize = 20_000;
    let instances = suite(20, &[6, 7, 8], 2, 0.4, 1.5, ObjectiveKind::Coverage, 401)?;
    let mut worst_z = f64::NEG_INFINITY;
    let mut pairs_checked = 0usize;
    for (i, inst) in instances.iter().enumerate() {
        let n = inst.n();
        let x = random_cube_point(n, seeding::derive(402, i as u64));
        let pair_list: Vec<(usize, usize)> = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .collect();
        // Per pair: sums of a = y_p·y_q, b = y_p, c = y_q and their
        // products, enough for the covariance matrix of (a, b, c).
        let mut moments = vec![[0.0f64; 9]; pair_list.len()];
        let trial_base = seeding::derive(403, i as u64);
        for t in 0..TRIALS {
            let (y, _) =
                rounding::weighted_pipage_round(inst, &x, seeding::derive(trial_base, t as u64))
                    .map_err(lib_err)?;
            for (pi, &(p, q)) in pair_list.iter().enumerate() {
                let (b, c) = (y.0[p], y.0[q]);
                let a = b * c;
                let m = &mut moments[pi];
                m[0] += a;
                m[1] += b;
                m[2] += c;
                m[3] += a * a;
                m[4] += b * b;
                m[5] += c * c;
                m[6] += a * b;
                m[7] += a * c;
                m[8] += b * c;
            }
        }
        let nt = TRIALS as f64;
        for m in &moments {
            let (ma, mb, mc) = (m[0] / nt, m[1] / nt, m[2] / nt);
            let excess = ma - mb * mc;
            // Variance of a - b·c via the delta method with gradient
            // (1, -c, -b) against the sample covariance of (a, b, c).
            let var = (m[3] / nt - ma * ma
                + mc * mc * (m[4] / nt - mb * mb)
                + mb * mb * (m[5] / nt - mc * mc)
                - 2.0 * mc * (m[6] / nt - ma * mb)
                - 2.0 * mb * (m[7] / nt - ma * mc)
                + 2.0 * mb * mc * (m[8] / nt - mb * mc))
                / nt;
            pairs_checked += 1;
            if var > 1e-30 {
                worst_z = worst_z.max(excess / var.sqrt());
            } else if excess > 1e-9 {
                worst_z = f64::INFINITY;
            }
        }
    }
    let detail = format!(
        "20 instances x 20000 trials, {pairs_checked} pairs: worst correlation excess = {worst_z:.2} stderr"
    );
    if worst_z <= 4.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// With the objective rescaled so every marginal is at most 1, the lower
/// tail of F at the rounded output obeys the Chernoff-style bound
/// Pr[F(y) <= (1-d)·F(x)] <= exp(-d^2·F(x)/2) + 0.02 for d in {0.3, 0.5}.
fn concentration_bound() -> Result<String, String> {
    const TRIALS: usize = 20_000;
    const DELTAS: [f64; 2] = [0.3, 0.5];
    let instances = suite(10, &[8, 9, 10], 2, 0.4, 1.5, ObjectiveKind::Coverage, 501)?;
    let mut worst_gap = f64::NEG_INFINITY;
    for (i, inst) in instances.iter().enumerate() {
        let unit = inst.objective.scaled(1.0 / inst.objective.max_singleton());
        let x = random_cube_point(inst.n(), seeding::derive(502, i as u64));
        let fx = submodular::multilinear_exact(&unit, &x.0).map_err(lib_err)?;
        let mut tail = [0usize; DELTAS.len()];
        let trial_base = seeding::derive(503, i as u64);
        for t in 0..TRIALS {
            let (y, _) =
                rounding::weighted_pipage_round(inst, &x, seeding::derive(trial_base, t as u64))
                    .map_err(lib_err)?;
            let fy = submodular::multilinear_exact(&unit, &y.0).map_err(lib_err)?;
            for (d, &delta) in DELTAS.iter().enumerate() {
                if fy <= (1.0 - delta) * fx {
                    tail[d] += 1;
                }
            }
        }
        for (d, &delta) in DELTAS.iter().enumerate() {
            let p_hat = tail[d] as f64 / TRIALS as f64;
            let bound = (-delta * delta * fx / 2.0).exp() + 0.02;
            worst_gap = worst_gap.max(p_hat - bound);
        }
    }
    let detail = format!(
        "10 instances x 20000 trials, delta in {{0.3, 0.5}}: max tail excess over bound = {worst_gap:.4}"
    );
    if worst_gap <= 0.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// The multilinear extension is convex along every two-coordinate swap
/// direction (1,000 random centered second differences >= -1e-9) and
/// exactly linear along any single coordinate (200 probes, |..| <= 1e-9).
fn convexity_probes() -> Result<String, String> {
    let instances = suite(10, &[8], 2, 0.4, 1.5, ObjectiveKind::Coverage, 601)?;
    let mut rng = seeding::new_rng(602);
    let mut probe = |single: bool| -> Result<f64, String> {
        let inst = &instances[rng.random_range(0..instances.len())];
        let n = inst.n();
        let x: Vec<f64> = (0..n).map(|_| 0.15 + 0.7 * rng.random::<f64>()).collect();
        let i = rng.random_range(0..n);
        let j = (i + rng.random_range(1..n)) % n;
        let c_i = 0.1 + 0.9 * rng.random::<f64>();
        let c_j = if single {
            0.0
        } else {
            0.1 + 0.9 * rng.random::<f64>()
        };
        let h = 0.05 + 0.05 * rng.random::<f64>();
        fractional::second_difference_along_pair(&inst.objective, &x, i, j, c_i, c_j, h)
            .map_err(lib_err)
    };

    let mut min_pair = f64::INFINITY;
    for _ in 0..1_000 {
        min_pair = min_pair.min(probe(false)?);
    }
    let mut max_single = 0.0f64;
    for _ in 0..200 {
        max_single = max_single.max(probe(true)?.abs());
    }
    let detail = format!(
        "1000 pair probes: min second difference {min_pair:.1e}; 200 single-coordinate probes: max |..| {max_single:.1e}"
    );
    if min_pair >= -1e-9 && max_single <= 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// The oracle optimum stays feasible in its own reduction: truncating with
/// the composition parameters read off the optimum never breaks its
/// feasibility, on 200 instances (n <= 12, k <= 2).
fn optimality_inheritance() -> Result<String, String> {
    let mut checked = 0usize;
    let mut failed = 0usize;
    for i in 0..200usize {
        let params = GeneratorParams {
            n: 8 + (i % 5),
            k: 1 + (i % 2),
            weight_range: (0.5, 2.0),
            bound_tightness: 0.5,
            budget_slack: 1.4,
            objective: ObjectiveKind::Coverage,
        };
        let inst =
            model::generate_random(&params, seeding::derive(701, i as u64)).map_err(lib_err)?;
        let orc = oracle::brute_force_opt(&inst).map_err(lib_err)?;
        let reduced = truncation::truncate(&inst, &orc.params).map_err(lib_err)?;
        let s_star = orc.best_set.to_set(inst.n()).map_err(lib_err)?;
        checked += 1;
        if !model::is_feasible(&reduced.instance, &s_star) {
            failed += 1;
        }
    }
    let detail = format!(
        "{checked} instances: optimum feasible in its own reduction in {}/{checked}",
        checked - failed
    );
    if failed == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Every feasible set of every reduction lifts back: on 50 instances
/// (n <= 10), for every enumerated parameter pair and every feasible
/// reduced set S', the extension is feasible in the original instance and
/// keeps at least half of f(S').
fn feasibility_extension() -> Result<String, String> {
    let mut extensions = 0usize;
    let mut failed = 0usize;
    for i in 0..50usize {
        let params = GeneratorParams {
            n: 7 + (i % 3),
            k: 1 + (i % 2),
            weight_range: (0.5, 2.0),
            bound_tightness: 0.55,
            budget_slack: 1.35,
            objective: ObjectiveKind::Coverage,
        };
        let inst =
            model::generate_random(&params, seeding::derive(801, i as u64)).map_err(lib_err)?;
        let n = inst.n();
        for pair in truncation::enumerate_params(&inst, false).map_err(lib_err)? {
            let reduced = truncation::truncate(&inst, &pair).map_err(lib_err)?;
            for s_bar in oracle::enumerate_feasible(&reduced.instance)
                .map_err(lib_err)?
                .sets()
            {
                let ext = truncation::extend_feasible(&inst, &reduced, &s_bar).map_err(lib_err)?;
                let f_ext = submodular::eval(&inst.objective, &ext.selected).map_err(lib_err)?;
                let f_bar = submodular::eval(&inst.objective, &s_bar.ids()).map_err(lib_err)?;
                let feasible = model::is_feasible(&inst, &ext.to_set(n).map_err(lib_err)?);
                extensions += 1;
                if !feasible || f_ext < f_bar / 2.0 - 1e-9 {
                    failed += 1;
                }
            }
        }
    }
    let detail = format!(
        "50 instances, {extensions} extensions: feasible with f >= f(S')/2 in {}/{extensions}",
        extensions - failed
    );
    if failed == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// End-to-end truncating pipeline versus the oracle on 100 instances
/// (n <= 12, k = 2, epsilon = 0.1): the ratio clears (1-1/e)/2 - 0.1 in at
/// least 45% of instances and averages at least 0.6.
fn truncating_pipeline_ratio() -> Result<String, String> {
    const COUNT: usize = 100;
    let threshold = 0.5 * (1.0 - E_INV) - 0.1;
    let mut ratios = MeanStat::new();
    let mut hits = 0usize;
    for i in 0..COUNT {
        let params = GeneratorParams {
            n: 9 + (i % 4),
            k: 2,
            weight_range: (0.5, 2.0),
            bound_tightness: 0.5,
            budget_slack: 1.4,
            objective: ObjectiveKind::Coverage,
        };
        let inst =
            model::generate_random(&params, seeding::derive(901, i as u64)).map_err(lib_err)?;
        let config = GreedyConfig {
            steps: 12,
            samples_per_gradient: 250,
            seed: seeding::derive(902, i as u64),
            epsilon: 0.1,
        };
        let report = truncation::solve_fksm_truncating(&inst, &config, false).map_err(lib_err)?;
        let opt = oracle::brute_force_opt(&inst).map_err(lib_err)?.best_value;
        if opt <= 0.0 {
            return Err(format!("instance {i}: nonpositive optimum {opt}"));
        }
        let ratio = report.objective / opt;
        ratios.push(ratio);
        if ratio >= threshold {
            hits += 1;
        }
    }
    let freq = hits as f64 / COUNT as f64;
    let detail = format!(
        "{COUNT} instances: freq(ratio >= {threshold:.3}) = {freq:.2}, mean ratio = {:.3}",
        ratios.mean()
    );
    if freq >= 0.45 && ratios.mean() >= 0.6 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Budget-exact pipeline over 200 runs on 20 instances: the budget holds
/// in every run, the mean ratio against the oracle clears 1 - 1/e - 0.15,
/// and per-group rounded sums match the fractional sums in expectation.
///
/// The in-expectation check runs at each instance's own fractional point
/// with 2,000 independent roundings rather than across the 200 one-shot
/// pipeline runs: greedy points sit near polytope vertices, so a single
/// run's group-sum deviation is a two-point distribution whose rare branch
/// (mass a few percent) goes unsampled in 10 runs, making an empirical
/// stderr test at that depth meaningless. At 2,000 draws per point every
/// branch is well represented and the 4-stderr bound is sound.
fn expected_fairness_pipeline() -> Result<String, String> {
    let instances = suite(
        20,
        &[9, 10, 11],
        2,
        0.45,
        1.5,
        ObjectiveKind::Coverage,
        1001,
    )?;
    let mut runs = 0usize;
    let mut budget_breaches = 0usize;
    let mut reconstruction_drift = 0.0f64;
    let mut worst_margin_z = 0.0f64;
    let mut ratios = MeanStat::new();
    for (i, inst) in instances.iter().enumerate() {
        let opt = oracle::brute_force_opt(inst).map_err(lib_err)?.best_value;
        let run_base = seeding::derive(1002, i as u64);
        let mut first_run_sums = Vec::new();
        for r in 0..10 {
            let config = RelaxedConfig {
                greedy: GreedyConfig {
                    steps: 12,
                    samples_per_gradient: 250,
                    seed: seeding::derive(run_base, r),
                    epsilon: 0.1,
                },
                eta: 0.25,
                t_max: 0,
            };
            let report = relaxed::solve_relaxed_fairness(inst, &config).map_err(lib_err)?;
            runs += 1;
            if report.total_weight > inst.budget + FEASIBILITY_TOL {
                budget_breaches += 1;
            }
            if r == 0 {
                first_run_sums = report.fractional_group_sums.clone();
            }
            ratios.push(report.objective / opt);
        }

        // Rebuild run 0's fractional point through the documented seed
        // chain (candidate 0, greedy stream 0) and confirm it is the one
        // the pipeline reported, so the marginal audit below really runs
        // at the pipeline's operating point.
        let greedy_seed = seeding::derive(seeding::derive(seeding::derive(run_base, 0), 0), 0);
        let config = GreedyConfig {
            steps: 12,
            samples_per_gradient: 250,
            seed: greedy_seed,
            epsilon: 0.1,
        };
        let x = fractional::continuous_greedy(inst, &config).map_err(lib_err)?;
        let x_sums = x.group_sums(inst);
        for g in 0..inst.k() {
            reconstruction_drift = reconstruction_drift.max((x_sums[g] - first_run_sums[g]).abs());
        }

        let mut rounded_sums = vec![MeanStat::new(); inst.k()];
        let mc_base = seeding::derive(1003, i as u64);
        for t in 0..2_000u64 {
            let (y, _) = rounding::weighted_pipage_round(inst, &x, seeding::derive(mc_base, t))
                .map_err(lib_err)?;
            for (g, sum) in y.group_sums(inst).into_iter().enumerate() {
                rounded_sums[g].push(sum);
            }
        }
        for (g, stat) in rounded_sums.iter().enumerate() {
            let deviation = (stat.mean() - x_sums[g]).abs();
            if stat.stderr() > 0.0 {
                worst_margin_z = worst_margin_z.max(deviation / stat.stderr());
            } else if deviation > 1e-9 {
                worst_margin_z = f64::INFINITY;
            }
        }
    }
    let target = 1.0 - E_INV - 0.15;
    let detail = format!(
        "{runs} runs: budget kept in {}/{runs}, mean ratio {:.3} (target {target:.3}); group sums at 20 greedy points x 2000 roundings: worst drift {worst_margin_z:.2} stderr",
        runs - budget_breaches,
        ratios.mean()
    );
    if budget_breaches == 0
        && reconstruction_drift <= 1e-9
        && worst_margin_z <= 4.0
        && ratios.mean() >= target
    {
        Ok(detail)
    } else if reconstruction_drift > 1e-9 {
        Err(format!(
            "{detail}; reconstructed fractional point drifted {reconstruction_drift:.1e} from the report"
        ))
    } else {
        Err(detail)
    }
}

/// Fairness-exact pipeline over 200 runs on 20 instances: every run's
/// group counts sit inside their intervals, each instance's mean weight
/// stays within 4 standard errors of the budget (knapsack in expectation),
/// and the mean ratio against the oracle clears 1 - 1/e - 0.15.
fn expected_knapsack_pipeline() -> Result<String, String> {
    let instances = suite(
        20,
        &[9, 10, 11],
        2,
        0.45,
        1.5,
        ObjectiveKind::Coverage,
        1101,
    )?;
    let mut runs = 0usize;
    let mut fairness_breaches = 0usize;
    let mut worst_weight_excess = f64::NEG_INFINITY;
    let mut ratios = MeanStat::new();
    for (i, inst) in instances.iter().enumerate() {
        let opt = oracle::brute_force_opt(inst).map_err(lib_err)?.best_value;
        let mut weights = MeanStat::new();
        let run_base = seeding::derive(1102, i as u64);
        for r in 0..10 {
            let config = GreedyConfig {
                steps: 12,
                samples_per_gradient: 250,
                seed: seeding::derive(run_base, r),
                epsilon: 0.1,
            };
            let report = relaxed::solve_relaxed_knapsack(inst, &config).map_err(lib_err)?;
            runs += 1;
            if !report.violated_groups.is_empty() {
                fairness_breaches += 1;
            }
            weights.push(report.total_weight);
            ratios.push(report.objective / opt);
        }
        let slack = if weights.stderr() > 0.0 {
            4.0 * weights.stderr()
        } else {
            1e-9
        };
        worst_weight_excess = worst_weight_excess.max(weights.mean() - inst.budget - slack);
    }
    let target = 1.0 - E_INV - 0.15;
    let detail = format!(
        "{runs} runs: fairness exact in {}/{runs}, max mean-weight excess over B + 4 stderr = {worst_weight_excess:.3}, mean ratio {:.3} (target {target:.3})",
        runs - fairness_breaches,
        ratios.mean()
    );
    if fairness_breaches == 0 && worst_weight_excess <= 0.0 && ratios.mean() >= target {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Continuous greedy with exact gradients (modular objectives, one sample
/// suffices) lands inside the relaxation polytope and clears the
/// (1 - 1/e - 0.1)·OPT fractional guarantee on all 50 oracle-solvable
/// instances.
fn fractional_guarantee() -> Result<String, String> {
    const COUNT: usize = 50;
    let target = 1.0 - E_INV - 0.1;
    let mut min_ratio = f64::INFINITY;
    let mut outside = 0usize;
    for i in 0..COUNT {
        let params = GeneratorParams {
            n: 10 + (i % 3),
            k: 2,
            weight_range: (0.5, 2.0),
            bound_tightness: 0.4,
            budget_slack: 1.5,
            objective: ObjectiveKind::Modular,
        };
        let inst =
            model::generate_random(&params, seeding::derive(1201, i as u64)).map_err(lib_err)?;
        let config = GreedyConfig {
            steps: 8,
            samples_per_gradient: 1,
            seed: seeding::derive(1202, i as u64),
            epsilon: 0.1,
        };
        let x = fractional::continuous_greedy(&inst, &config).map_err(lib_err)?;
        if !model::in_polytope(&inst, &x, FEASIBILITY_TOL) {
            outside += 1;
        }
        let fx = submodular::multilinear_exact(&inst.objective, &x.0).map_err(lib_err)?;
        let opt = oracle::brute_force_opt(&inst).map_err(lib_err)?.best_value;
        if opt <= 0.0 {
            return Err(format!("instance {i}: nonpositive optimum {opt}"));
        }
        min_ratio = min_ratio.min(fx / opt);
    }
    let detail = format!(
        "{COUNT} instances: min F(x)/OPT = {min_ratio:.3} (target {target:.3}), outside polytope {outside}"
    );
    if min_ratio >= target && outside == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}
