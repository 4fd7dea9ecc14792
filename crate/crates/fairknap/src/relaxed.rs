//! Single-shot pipelines that keep one constraint family exact and the
//! other in expectation.
//!
//! * [`solve_relaxed_fairness`]: weighted pipage rounding conserves the
//!   budget on every run; group counts are preserved in expectation. An
//!   optional enumeration step guesses a small high-value seed set first
//!   and solves the contracted remainder, which caps how much value the
//!   final floor step can drop.
//! * [`solve_relaxed_knapsack`]: group pipage rounding keeps every group
//!   count inside its interval on every run; the budget holds in
//!   expectation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fractional::{continuous_greedy, GreedyConfig};
use crate::model::{self, GroupBound, Instance, IntegralSolution, FEASIBILITY_TOL};
use crate::rounding::{floor_integralize, group_pipage_round, weighted_pipage_round};
use crate::seeding;
use crate::set::ElementSet;
use crate::submodular;
use crate::truncation::fail_on_findings;

/// Seed sets are drawn from this many top-ranked elements (by singleton
/// value); keeps the candidate count polynomial at desk scale.
pub const ENUMERATION_POOL: usize = 8;

/// Which constraint family a relaxed pipeline satisfies exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintMode {
    /// Budget exact every run, fairness in expectation.
    ExpectedFairness,
    /// Fairness exact every run, budget in expectation.
    ExpectedKnapsack,
}

impl std::fmt::Display for ConstraintMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConstraintMode::ExpectedFairness => write!(f, "expected-fairness"),
            ConstraintMode::ExpectedKnapsack => write!(f, "expected-knapsack"),
        }
    }
}

/// Tuning for [`solve_relaxed_fairness`].
#[derive(Clone, Debug)]
pub struct RelaxedConfig {
    pub greedy: GreedyConfig,
    /// Marginal threshold of the enumeration step: after fixing a seed set
    /// `A`, only elements with `marginal(f, A, e) ≤ f(A)·eta` stay.
    pub eta: f64,
    /// Maximum seed-set size; 0 disables the enumeration entirely.
    pub t_max: usize,
}

impl Default for RelaxedConfig {
    fn default() -> Self {
        RelaxedConfig {
            greedy: GreedyConfig::default(),
            eta: 0.25,
            t_max: 2,
        }
    }
}

/// One enumeration candidate: a fixed seed set and the re-indexed instance
/// left after removing it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Contraction {
    /// Fixed elements (original ids, ascending).
    pub seed_set: Vec<usize>,
    /// Residual id `r` corresponds to original id `kept[r]`.
    pub kept: Vec<usize>,
    /// Ground set without the seed set (and, for nonempty seeds, without
    /// high-marginal elements); budget and group bounds shrunk by the seed
    /// set's usage; objective contracted to the marginal function.
    pub residual: Instance,
}

fn feasible_partial(instance: &Instance, a: &ElementSet) -> bool {
    if instance.weight_of(a) > instance.budget + FEASIBILITY_TOL {
        return false;
    }
    let counts = instance.group_counts(a);
    instance
        .bounds
        .iter()
        .all(|b| counts[b.color - 1] <= b.upper)
}

fn contract_instance(instance: &Instance, seed_ids: &[usize], eta: f64) -> Result<Contraction> {
    let n = instance.n();
    let a = ElementSet::from_ids(n, seed_ids)?;
    let f_a = submodular::eval(&instance.objective, seed_ids)?;

    let kept: Vec<usize> = (0..n)
        .filter(|&e| !a.contains(e))
        .filter(|&e| {
            if seed_ids.is_empty() {
                true
            } else {
                // Keep only small-marginal leftovers: anything the seed set
                // has not already nearly saturated would have been guessed.
                submodular::marginal(&instance.objective, seed_ids, e)
                    .map(|m| m <= f_a * eta + 1e-12)
                    .unwrap_or(false)
            }
        })
        .collect();

    let counts = instance.group_counts(&a);
    let bounds = instance
        .bounds
        .iter()
        .map(|b| {
            let used = counts[b.color - 1];
            GroupBound {
                color: b.color,
                lower: b.lower.and_then(|l| (l + 1 > used).then(|| l - used)),
                upper: b.upper - used,
            }
        })
        .collect();

    let objective = instance.objective.contract(&a).restrict(&kept);
    let elements = kept
        .iter()
        .enumerate()
        .map(|(r, &e)| crate::model::Element {
            id: r,
            weight: instance.elements[e].weight,
            color: instance.elements[e].color,
        })
        .collect();

    Ok(Contraction {
        seed_set: seed_ids.to_vec(),
        kept,
        residual: Instance {
            elements,
            bounds,
            budget: instance.budget - instance.weight_of(&a),
            objective,
        },
    })
}

/// Enumerates candidate seed sets: the empty set always, plus every
/// feasible partial solution of size ≤ `t_max` drawn from the
/// [`ENUMERATION_POOL`] highest-singleton-value elements, in ranked
/// lexicographic order. Each candidate carries its contracted residual.
// `!(eta > 0.0)` instead of `eta <= 0.0`: the negated form also rejects NaN.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn enumeration_preprocess(
    instance: &Instance,
    eta: f64,
    t_max: usize,
) -> Result<Vec<Contraction>> {
    if !(eta > 0.0) {
        return Err(Error::InvalidParameter("eta must be > 0".into()));
    }
    let n = instance.n();
    let mut ranked: Vec<usize> = (0..n).collect();
    let singles: Vec<f64> = (0..n)
        .map(|e| submodular::eval(&instance.objective, &[e]))
        .collect::<Result<_>>()?;
    ranked.sort_by(|&a, &b| singles[b].partial_cmp(&singles[a]).unwrap().then(a.cmp(&b)));
    let pool: Vec<usize> = ranked.into_iter().take(ENUMERATION_POOL).collect();

    let mut seed_sets: Vec<Vec<usize>> = vec![Vec::new()];
    let mut current = Vec::new();
    fn combos(
        pool: &[usize],
        start: usize,
        size: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if current.len() == size {
            let mut ids = current.clone();
            ids.sort_unstable();
            out.push(ids);
            return;
        }
        for i in start..pool.len() {
            current.push(pool[i]);
            combos(pool, i + 1, size, current, out);
            current.pop();
        }
    }
    for size in 1..=t_max.min(pool.len()) {
        combos(&pool, 0, size, &mut current, &mut seed_sets);
    }

    seed_sets
        .into_iter()
        .filter(|ids| {
            ElementSet::from_ids(n, ids)
                .map(|a| feasible_partial(instance, &a))
                .unwrap_or(false)
        })
        .map(|ids| contract_instance(instance, &ids, eta))
        .collect()
}

/// Outcome of one relaxed solve run, with enough diagnostics to audit the
/// constraint that only holds in expectation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RelaxedReport {
    pub method: String,
    pub constraint_mode: ConstraintMode,
    pub solution: IntegralSolution,
    pub objective: f64,
    pub seed: u64,
    pub epsilon: f64,
    /// Final per-group counts on the original instance.
    pub group_counts: Vec<usize>,
    pub total_weight: f64,
    /// Per-group sums of the fractional solution (seed set included).
    pub fractional_group_sums: Vec<f64>,
    /// Per-group sums of the rounded vector before flooring (equal to the
    /// counts for the knapsack-exact mode, which never floors).
    pub rounded_group_sums: Vec<f64>,
    /// Colors whose final count fell outside the group interval this run.
    pub violated_groups: Vec<usize>,
    /// Seed set of the winning enumeration candidate (empty when disabled).
    pub seed_set: Vec<usize>,
    /// Index of the winning candidate in enumeration order.
    pub candidate_index: usize,
    pub eta: f64,
    pub t_max: usize,
    pub wall_time_ms: f64,
}

impl RelaxedReport {
    pub fn csv_header() -> &'static str {
        "method,constraint_mode,objective,total_weight,group_counts,fractional_group_sums,rounded_group_sums,violated_groups,seed,candidate_index\n"
    }

    /// One CSV row for this run (vector cells joined with `|`).
    pub fn to_csv_row(&self) -> String {
        fn join<T: std::fmt::Display>(v: &[T]) -> String {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join("|")
        }
        format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            self.method,
            self.constraint_mode,
            self.objective,
            self.total_weight,
            join(&self.group_counts),
            join(&self.fractional_group_sums),
            join(&self.rounded_group_sums),
            join(&self.violated_groups),
            self.seed,
            self.candidate_index
        )
    }
}

fn group_sums_of(instance: &Instance, x: &[f64]) -> Vec<f64> {
    instance
        .bounds
        .iter()
        .map(|b| {
            (0..instance.n())
                .filter(|&e| instance.color_of(e) == b.color)
                .map(|e| x[e])
                .sum()
        })
        .collect()
}

fn violated_groups_of(instance: &Instance, counts: &[usize]) -> Vec<usize> {
    instance
        .bounds
        .iter()
        .filter(|b| counts[b.color - 1] > b.upper || counts[b.color - 1] < b.min_count())
        .map(|b| b.color)
        .collect()
}

/// Budget-exact pipeline: guess a seed set, run continuous greedy on the
/// contracted remainder, round with weighted pipage (conserving the
/// budget), floor the lone fractional survivor, and keep the best candidate
/// (first wins ties). Per-group counts match the fractional sums in
/// expectation; a specific run may dip below a lower bound, recorded in
/// `violated_groups`.
pub fn solve_relaxed_fairness(
    instance: &Instance,
    config: &RelaxedConfig,
) -> Result<RelaxedReport> {
    let started = std::time::Instant::now();
    fail_on_findings(&model::validate(instance))?;

    let candidates = enumeration_preprocess(instance, config.eta, config.t_max)?;
    let n = instance.n();
    // (candidate index, objective, set, fractional sums, pre-floor sums).
    #[allow(clippy::type_complexity)]
    let mut best: Option<(usize, f64, ElementSet, Vec<f64>, Vec<f64>)> = None;
    for (index, candidate) in candidates.iter().enumerate() {
        let candidate_seed = seeding::derive(config.greedy.seed, index as u64);

        // Fractional solve and rounding happen on the residual; an
        // unsatisfiable residual just disqualifies this guess.
        let (residual_x, residual_y, residual_z) = if candidate.residual.n() == 0 {
            (Vec::new(), Vec::new(), Vec::new())
        } else {
            let greedy_config = GreedyConfig {
                seed: seeding::derive(candidate_seed, 0),
                ..config.greedy.clone()
            };
            let x_res = match continuous_greedy(&candidate.residual, &greedy_config) {
                Ok(x) => x,
                Err(Error::Infeasible(_)) => continue,
                Err(e) => return Err(e),
            };
            let (y_res, _) = weighted_pipage_round(
                &candidate.residual,
                &x_res,
                seeding::derive(candidate_seed, 1),
            )?;
            let z_res = floor_integralize(&y_res)?;
            (x_res.0, y_res.0, z_res.selected)
        };

        // Lift to original coordinates: seed set at 1, residual mapped back.
        let mut x_full = vec![0.0; n];
        let mut y_full = vec![0.0; n];
        for &e in &candidate.seed_set {
            x_full[e] = 1.0;
            y_full[e] = 1.0;
        }
        for (r, &original) in candidate.kept.iter().enumerate() {
            x_full[original] = residual_x[r];
            y_full[original] = residual_y[r];
        }
        let mut set = ElementSet::from_ids(n, &candidate.seed_set)?;
        for &r in &residual_z {
            set.insert(candidate.kept[r]);
        }

        let value = submodular::eval(&instance.objective, &set.ids())?;
        if best.as_ref().is_none_or(|(_, b, _, _, _)| value > *b) {
            let x_sums = group_sums_of(instance, &x_full);
            let y_sums = group_sums_of(instance, &y_full);
            best = Some((index, value, set, x_sums, y_sums));
        }
    }

    let (candidate_index, objective, set, fractional_group_sums, rounded_group_sums) =
        best.ok_or_else(|| Error::Internal("the empty seed set always yields a candidate".into()))?;
    let total_weight = instance.weight_of(&set);
    if total_weight > instance.budget + FEASIBILITY_TOL {
        return Err(Error::Internal(
            "budget-exact pipeline exceeded the budget".into(),
        ));
    }
    let counts = instance.group_counts(&set);
    Ok(RelaxedReport {
        method: "relaxed-fairness".into(),
        constraint_mode: ConstraintMode::ExpectedFairness,
        solution: IntegralSolution::from_set(&set),
        objective,
        seed: config.greedy.seed,
        epsilon: config.greedy.epsilon,
        violated_groups: violated_groups_of(instance, &counts),
        group_counts: counts,
        total_weight,
        fractional_group_sums,
        rounded_group_sums,
        seed_set: candidates[candidate_index].seed_set.clone(),
        candidate_index,
        eta: config.eta,
        t_max: config.t_max,
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

/// Fairness-exact pipeline: continuous greedy on the full instance, then
/// group pipage rounding. Group counts land inside their intervals on
/// every run; the budget holds in expectation (`E[w(S)] = w·x ≤ B`).
pub fn solve_relaxed_knapsack(instance: &Instance, config: &GreedyConfig) -> Result<RelaxedReport> {
    let started = std::time::Instant::now();
    fail_on_findings(&model::validate(instance))?;

    let greedy_config = GreedyConfig {
        seed: seeding::derive(config.seed, 0),
        ..config.clone()
    };
    let x = continuous_greedy(instance, &greedy_config)?;
    let sol = group_pipage_round(instance, &x, seeding::derive(config.seed, 1))?;
    let set = sol.to_set(instance.n())?;

    let counts = instance.group_counts(&set);
    let violated = violated_groups_of(instance, &counts);
    if !violated.is_empty() {
        return Err(Error::Internal(format!(
            "fairness-exact pipeline violated groups {violated:?}"
        )));
    }
    Ok(RelaxedReport {
        method: "relaxed-knapsack".into(),
        constraint_mode: ConstraintMode::ExpectedKnapsack,
        solution: sol,
        objective: submodular::eval(&instance.objective, &set.ids())?,
        seed: config.seed,
        epsilon: config.epsilon,
        fractional_group_sums: group_sums_of(instance, &x),
        rounded_group_sums: counts.iter().map(|&c| c as f64).collect(),
        violated_groups: violated,
        group_counts: counts,
        total_weight: instance.weight_of(&set),
        seed_set: Vec::new(),
        candidate_index: 0,
        eta: 0.0,
        t_max: 0,
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}
