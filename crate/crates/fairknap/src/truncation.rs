//! Knapsack truncation: reduce a fair knapsack instance to one with only
//! group *upper* bounds, solve that, and lift the answer back.
//!
//! Guessing, per group, how many elements an optimal solution takes (`γ_i`)
//! and how many of those are among the group's cheapest (`β_i`) lets the
//! lower bounds be dropped: the `γ_i` cheapest elements (`L_i(γ_i)`) become
//! free (weight 0) with quota `β_i`, the rest of the group keeps a reduced
//! weight with quota `γ_i − β_i`, and the budget shrinks by the cost of the
//! free sets. A solution of the reduced instance extends back to a feasible
//! original solution worth at least half its value, so enumerating all
//! `(γ, β)` pairs and keeping the best extension yields the headline
//! `½(1 − 1/e) − ε` guarantee.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fractional::{continuous_greedy, GreedyConfig};
use crate::model::{
    Element, GroupBound, Instance, IntegralSolution, ValidationReport, FEASIBILITY_TOL,
};
use crate::rounding::group_pipage_round;
use crate::seeding;
use crate::set::ElementSet;
use crate::submodular::{self, SetEvaluator, SetFunction};

/// Enumerating `(γ, β)` pairs is exponential in the number of groups;
/// larger instances must opt in explicitly.
pub const GROUP_ENUMERATION_GUARD: usize = 3;
/// Default rounding retries before the drop-repair fallback kicks in.
pub const DEFAULT_MAX_RETRIES: usize = 50;

/// A guess of the optimal per-group composition: `gamma[i]` elements from
/// group `i + 1`, of which `beta[i]` come from the group's cheapest
/// `gamma[i]` elements.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationParams {
    pub gamma: Vec<usize>,
    pub beta: Vec<usize>,
}

impl std::fmt::Display for TruncationParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let join = |v: &[usize]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join("|")
        };
        write!(f, "gamma={} beta={}", join(&self.gamma), join(&self.beta))
    }
}

/// Per-group record of how the reduction transformed weights.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupReduction {
    /// Original color.
    pub color: usize,
    pub gamma: usize,
    pub beta: usize,
    /// The `gamma` smallest-weight elements of the group, ascending by
    /// `(weight, id)`. These become free (weight 0) in the reduction.
    pub l_gamma: Vec<usize>,
    /// Total original weight of `l_gamma`.
    pub l_gamma_weight: f64,
    /// Amount subtracted from each remaining group member's weight:
    /// `(w(L(γ)) − w(L(β))) / (γ − β)`, or 0 when `γ = β`.
    pub unit_reduction: f64,
}

/// The reduced instance (upper bounds only, over `2k` colors) together with
/// the back-map needed to lift solutions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReducedInstance {
    /// Colors `1..=k` hold the free sets with quota `β_i`; colors
    /// `k+1..=2k` hold the remainders with quota `γ_i − β_i`.
    pub instance: Instance,
    pub reductions: Vec<GroupReduction>,
}

fn check_params(instance: &Instance, params: &TruncationParams) -> Result<()> {
    let k = instance.k();
    if params.gamma.len() != k || params.beta.len() != k {
        return Err(Error::InvalidParameter(format!(
            "params must carry one (gamma, beta) per group: expected {k}, got ({}, {})",
            params.gamma.len(),
            params.beta.len()
        )));
    }
    for (i, bound) in instance.bounds.iter().enumerate() {
        let gamma = params.gamma[i];
        let size = instance.groups()[i].len();
        if gamma > bound.upper || gamma > size {
            return Err(Error::InvalidParameter(format!(
                "gamma[{i}] = {gamma} exceeds min(upper = {}, group size = {size})",
                bound.upper
            )));
        }
        if let Some(l) = bound.lower {
            if gamma <= l {
                return Err(Error::InvalidParameter(format!(
                    "gamma[{i}] = {gamma} must exceed the lower bound {l}"
                )));
            }
        }
        if params.beta[i] > gamma {
            return Err(Error::InvalidParameter(format!(
                "beta[{i}] = {} exceeds gamma[{i}] = {gamma}",
                params.beta[i]
            )));
        }
    }
    Ok(())
}

/// Builds the reduced instance for one `(γ, β)` guess. The objective and
/// the ground set are unchanged; weights, colors, bounds, and budget are
/// rewritten. Fails with `ParamsInfeasible` when the free sets alone
/// exceed the budget.
pub fn truncate(instance: &Instance, params: &TruncationParams) -> Result<ReducedInstance> {
    check_params(instance, params)?;
    let n = instance.n();
    let k = instance.k();

    let mut reductions = Vec::with_capacity(k);
    let mut in_l = vec![false; n];
    let mut unit_of = vec![0.0; n];
    let mut free_weight_total = 0.0;
    for (i, bound) in instance.bounds.iter().enumerate() {
        let gamma = params.gamma[i];
        let beta = params.beta[i];
        let sorted = instance.group_sorted_by_weight(bound.color);
        let l_gamma: Vec<usize> = sorted[..gamma].to_vec();
        let w_gamma: f64 = l_gamma.iter().map(|&e| instance.elements[e].weight).sum();
        let w_beta: f64 = l_gamma[..beta]
            .iter()
            .map(|&e| instance.elements[e].weight)
            .sum();
        let unit_reduction = if gamma == beta {
            0.0
        } else {
            (w_gamma - w_beta) / (gamma - beta) as f64
        };
        for &e in &l_gamma {
            in_l[e] = true;
        }
        for &e in &sorted[gamma..] {
            unit_of[e] = unit_reduction;
        }
        free_weight_total += w_gamma;
        reductions.push(GroupReduction {
            color: bound.color,
            gamma,
            beta,
            l_gamma,
            l_gamma_weight: w_gamma,
            unit_reduction,
        });
    }

    let reduced_budget = instance.budget - free_weight_total;
    if reduced_budget < 0.0 {
        return Err(Error::ParamsInfeasible(format!(
            "free sets weigh {free_weight_total}, over the budget {}",
            instance.budget
        )));
    }

    let mut elements = Vec::with_capacity(n);
    for e in 0..n {
        let original = &instance.elements[e];
        let (weight, color) = if in_l[e] {
            (0.0, original.color)
        } else {
            let w = original.weight - unit_of[e];
            if w < -1e-9 {
                return Err(Error::Internal(format!(
                    "reduced weight of element {e} is negative: {w}"
                )));
            }
            (w.max(0.0), original.color + k)
        };
        elements.push(Element {
            id: e,
            weight,
            color,
        });
    }

    let mut bounds = Vec::with_capacity(2 * k);
    for i in 0..k {
        bounds.push(GroupBound {
            color: i + 1,
            lower: None,
            upper: params.beta[i],
        });
    }
    for i in 0..k {
        bounds.push(GroupBound {
            color: k + i + 1,
            lower: None,
            upper: params.gamma[i] - params.beta[i],
        });
    }

    Ok(ReducedInstance {
        instance: Instance {
            elements,
            bounds,
            budget: reduced_budget,
            objective: instance.objective.clone(),
        },
        reductions,
    })
}

/// Lifts a reduced-feasible set back to the original instance: keep its
/// elements outside the free sets, top every group up to `γ_i` with the
/// cheapest free elements, and return whichever of that set and the plain
/// free fill `L(γ)` scores higher. The result is always feasible for the
/// original instance and worth at least half of `f(s_bar)`.
pub fn extend_feasible(
    instance: &Instance,
    reduced: &ReducedInstance,
    s_bar: &ElementSet,
) -> Result<IntegralSolution> {
    if s_bar.ground_size() != instance.n() {
        return Err(Error::DimensionMismatch {
            expected: instance.n(),
            got: s_bar.ground_size(),
        });
    }
    if !crate::model::is_feasible(&reduced.instance, s_bar) {
        return Err(Error::InvalidParameter(
            "extension input is not feasible for the reduced instance".into(),
        ));
    }

    let n = instance.n();
    let mut extended = ElementSet::empty(n);
    let mut fill = ElementSet::empty(n);
    for reduction in &reduced.reductions {
        let mut count = 0usize;
        // Members of the original group that survived outside the free set.
        for e in s_bar.iter() {
            if instance.color_of(e) == reduction.color && !reduction.l_gamma.contains(&e) {
                extended.insert(e);
                count += 1;
            }
        }
        // Cheapest-first top-up from the free set until the guessed count.
        for &e in &reduction.l_gamma {
            if count == reduction.gamma {
                break;
            }
            extended.insert(e);
            count += 1;
        }
        debug_assert_eq!(count, reduction.gamma);
        for &e in &reduction.l_gamma {
            fill.insert(e);
        }
    }

    for (label, set) in [("extension", &extended), ("free fill", &fill)] {
        if !crate::model::is_feasible(instance, set) {
            return Err(Error::Internal(format!(
                "{label} is not feasible for the original instance"
            )));
        }
    }
    if instance.weight_of(&extended) > instance.budget + FEASIBILITY_TOL {
        return Err(Error::Internal(
            "extension exceeded the original budget".into(),
        ));
    }

    let f_extended = submodular::eval(&instance.objective, &extended.ids())?;
    let f_fill = submodular::eval(&instance.objective, &fill.ids())?;
    let winner = if f_extended >= f_fill { extended } else { fill };
    Ok(IntegralSolution::from_set(&winner))
}

fn gamma_range(instance: &Instance, i: usize) -> std::ops::RangeInclusive<usize> {
    let bound = &instance.bounds[i];
    let lo = bound.lower.map_or(0, |l| l + 1);
    let hi = bound.upper.min(instance.groups()[i].len());
    lo..=hi
}

/// Every `(γ, β)` combination in lexicographic order, before budget
/// filtering: `l_i < γ_i ≤ min(u_i, |G_i|)` (from 0 without a lower bound)
/// and `0 ≤ β_i ≤ γ_i`.
pub fn param_grid(instance: &Instance) -> Vec<TruncationParams> {
    let k = instance.k();
    let mut out = Vec::new();
    let mut gamma = vec![0usize; k];
    fn gammas(
        instance: &Instance,
        i: usize,
        gamma: &mut Vec<usize>,
        out: &mut Vec<TruncationParams>,
    ) {
        if i == instance.k() {
            let mut beta = vec![0usize; gamma.len()];
            loop {
                out.push(TruncationParams {
                    gamma: gamma.clone(),
                    beta: beta.clone(),
                });
                // Odometer over β with per-digit cap γ_i, most significant
                // digit first.
                let mut digit = gamma.len();
                loop {
                    if digit == 0 {
                        return;
                    }
                    digit -= 1;
                    if beta[digit] < gamma[digit] {
                        beta[digit] += 1;
                        for b in beta[digit + 1..].iter_mut() {
                            *b = 0;
                        }
                        break;
                    }
                }
            }
        }
        for g in gamma_range(instance, i) {
            gamma[i] = g;
            gammas(instance, i + 1, gamma, out);
        }
    }
    gammas(instance, 0, &mut gamma, &mut out);
    out
}

/// All parameter pairs whose reduction is budget-feasible, in lexicographic
/// order. Refuses instances with more than [`GROUP_ENUMERATION_GUARD`]
/// groups unless `allow_large_k` is set.
pub fn enumerate_params(instance: &Instance, allow_large_k: bool) -> Result<Vec<TruncationParams>> {
    if instance.k() > GROUP_ENUMERATION_GUARD && !allow_large_k {
        return Err(Error::GroupGuard {
            k: instance.k(),
            guard: GROUP_ENUMERATION_GUARD,
        });
    }
    Ok(param_grid(instance)
        .into_iter()
        .filter(|p| truncate(instance, p).is_ok())
        .collect())
}

/// Outcome of one budget-feasible maximization run on a reduced instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BfsmOutcome {
    pub solution: IntegralSolution,
    /// Rounding attempts consumed (1 when the first draw fit the budget).
    pub attempts: usize,
    /// True when no attempt fit and the drop-repair fallback produced the
    /// solution; the repaired set carries no approximation guarantee.
    pub fallback_used: bool,
}

/// Maximizes over a reduced instance (group upper bounds + knapsack):
/// continuous greedy on the polytope with the budget scaled down to
/// `B̄/(1+ε)`, then group pipage rounding, retrying with fresh seeds until
/// the sampled set fits `B̄`. Group quotas hold exactly on every attempt;
/// the scaled budget makes fitting likely. After `max_retries` failures the
/// last sample is repaired by dropping lowest-marginal elements.
pub fn solve_bfsm(
    reduced: &ReducedInstance,
    config: &GreedyConfig,
    max_retries: usize,
) -> Result<BfsmOutcome> {
    let instance = &reduced.instance;
    if instance.bounds.iter().any(|b| b.lower.is_some()) {
        return Err(Error::Internal(
            "budget-feasible maximization expects a reduced instance without lower bounds".into(),
        ));
    }
    if max_retries == 0 {
        return Err(Error::InvalidParameter("max_retries must be >= 1".into()));
    }

    // With no lower bounds the origin is always feasible, so scaling the
    // budget down cannot make the polytope empty.
    let mut scaled = instance.clone();
    scaled.budget = instance.budget / (1.0 + config.epsilon);
    let greedy_config = GreedyConfig {
        seed: seeding::derive(config.seed, 0),
        ..config.clone()
    };
    let x = continuous_greedy(&scaled, &greedy_config)?;

    let mut last = None;
    for attempt in 0..max_retries {
        let sol = group_pipage_round(
            &scaled,
            &x,
            seeding::derive(config.seed, 1 + attempt as u64),
        )?;
        let set = sol.to_set(instance.n())?;
        if instance.weight_of(&set) <= instance.budget + FEASIBILITY_TOL {
            return Ok(BfsmOutcome {
                solution: sol,
                attempts: attempt + 1,
                fallback_used: false,
            });
        }
        last = Some(set);
    }

    // Repair: drop the member whose removal costs the least value until the
    // set fits the unscaled budget. Terminates because ∅ weighs 0 ≤ B̄.
    let mut set = last.expect("max_retries >= 1 guarantees a sample");
    let mut evaluator = instance.objective.evaluator();
    for e in set.iter() {
        evaluator.add(e);
    }
    while instance.weight_of(&set) > instance.budget + FEASIBILITY_TOL {
        let drop = set
            .iter()
            .min_by(|&a, &b| {
                evaluator
                    .remove_loss(a)
                    .partial_cmp(&evaluator.remove_loss(b))
                    .unwrap()
                    .then(a.cmp(&b))
            })
            .expect("positive weight implies a nonempty set");
        set.remove(drop);
        evaluator.remove(drop);
    }
    Ok(BfsmOutcome {
        solution: IntegralSolution::from_set(&set),
        attempts: max_retries,
        fallback_used: true,
    })
}

/// Diagnostics for one enumerated parameter pair.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParamDiagnostic {
    pub params: TruncationParams,
    pub reduced_budget: f64,
    /// Value of the reduced-instance solution under the original objective.
    pub bfsm_objective: f64,
    /// Value of the lifted solution.
    pub extended_objective: f64,
    pub attempts: usize,
    pub fallback_used: bool,
    pub selected: Vec<usize>,
}

/// Result of the full truncation pipeline.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: String,
    pub solution: IntegralSolution,
    pub objective: f64,
    /// The parameter pair whose extension won.
    pub params: TruncationParams,
    pub seed: u64,
    pub epsilon: f64,
    pub wall_time_ms: f64,
    pub per_param: Vec<ParamDiagnostic>,
}

impl SolveReport {
    /// One CSV row per enumerated parameter pair (dot decimals; vector
    /// cells joined with `|`).
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "param_index,gamma,beta,reduced_budget,bfsm_objective,extended_objective,attempts,fallback_used\n",
        );
        let join = |v: &[usize]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join("|")
        };
        for (i, d) in self.per_param.iter().enumerate() {
            out.push_str(&format!(
                "{i},{},{},{},{},{},{},{}\n",
                join(&d.params.gamma),
                join(&d.params.beta),
                d.reduced_budget,
                d.bfsm_objective,
                d.extended_objective,
                d.attempts,
                d.fallback_used
            ));
        }
        out
    }
}

/// Full pipeline: validate, enumerate every budget-feasible `(γ, β)` guess,
/// solve each reduction, lift each answer, and keep the best (first
/// lexicographic winner on ties). Parameter pair `i` derives its seed as
/// `(config.seed, i)`, so reports are reproducible.
pub fn solve_fksm_truncating(
    instance: &Instance,
    config: &GreedyConfig,
    allow_large_k: bool,
) -> Result<SolveReport> {
    let started = std::time::Instant::now();
    fail_on_findings(&crate::model::validate(instance))?;

    let params_list = enumerate_params(instance, allow_large_k)?;
    if params_list.is_empty() {
        return Err(Error::Internal(
            "a validated-feasible instance admits at least one parameter pair".into(),
        ));
    }

    let mut per_param = Vec::with_capacity(params_list.len());
    let mut best: Option<(usize, f64, IntegralSolution)> = None;
    for (index, params) in params_list.iter().enumerate() {
        let reduced = truncate(instance, params)?;
        let pair_config = GreedyConfig {
            seed: seeding::derive(config.seed, index as u64),
            ..config.clone()
        };
        let outcome = solve_bfsm(&reduced, &pair_config, DEFAULT_MAX_RETRIES)?;
        let s_bar = outcome.solution.to_set(instance.n())?;
        let lifted = extend_feasible(instance, &reduced, &s_bar)?;
        let bfsm_objective = submodular::eval(&instance.objective, &outcome.solution.selected)?;
        let extended_objective = submodular::eval(&instance.objective, &lifted.selected)?;
        per_param.push(ParamDiagnostic {
            params: params.clone(),
            reduced_budget: reduced.instance.budget,
            bfsm_objective,
            extended_objective,
            attempts: outcome.attempts,
            fallback_used: outcome.fallback_used,
            selected: lifted.selected.clone(),
        });
        if best
            .as_ref()
            .is_none_or(|(_, b, _)| extended_objective > *b)
        {
            best = Some((index, extended_objective, lifted));
        }
    }

    let (index, objective, solution) = best.expect("at least one parameter pair");
    Ok(SolveReport {
        method: "truncating".into(),
        solution,
        objective,
        params: params_list[index].clone(),
        seed: config.seed,
        epsilon: config.epsilon,
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
        per_param,
    })
}

/// Maps validation findings to errors: structural defects are invalid
/// input, an unsatisfiable constraint system is infeasibility.
pub(crate) fn fail_on_findings(report: &ValidationReport) -> Result<()> {
    if report.is_valid() {
        return Ok(());
    }
    let messages: Vec<String> = report.findings.iter().map(|f| f.message.clone()).collect();
    if report.has_structural() {
        Err(Error::InvalidInstance(messages.join("; ")))
    } else {
        Err(Error::Infeasible(messages.join("; ")))
    }
}
