//! Randomized pipage rounding of fractional solutions.
//!
//! Two rounders with different guarantees:
//!
//! * [`weighted_pipage_round`] conserves the weighted sum `w·y` exactly on
//!   every run and stops with at most one fractional coordinate, so the
//!   knapsack constraint can never be violated; group counts are preserved
//!   only in expectation.
//! * [`group_pipage_round`] produces an integral set whose per-group counts
//!   are inside their intervals on every run and whose per-element marginals
//!   equal `x` exactly in expectation, so the budget holds in expectation.
//!
//! Both schemes repeatedly pick two fractional coordinates and move along a
//! direction that leaves the tracked quantity invariant, branching with the
//! probability that makes each coordinate a martingale. One uniform draw per
//! iteration comes from a counter-based generator, so runs are reproducible
//! and traceable.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FractionalVector, Instance, IntegralSolution, FEASIBILITY_TOL};
use crate::seeding;
use crate::set::ElementSet;
use crate::stats::MeanStat;
use crate::submodular::{self, Objective};

/// Coordinates this close to 0 or 1 snap to the bound after each update,
/// guaranteeing termination despite floating-point dust.
pub const SNAP_TOL: f64 = 1e-12;
/// Coarser snap used when flooring a nearly integral vector.
pub const FLOOR_SNAP_TOL: f64 = 1e-9;

/// Which probabilistic branch an iteration took.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipageBranch {
    /// `y_p` decreased by `δ1` (taken with probability `δ2/(δ1+δ2)`).
    LowerP,
    /// `y_p` increased by `δ2`.
    RaiseP,
}

/// One pairwise update, recorded for reproducibility audits.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PipageIteration {
    pub p: usize,
    pub q: usize,
    pub delta1: f64,
    pub delta2: f64,
    pub branch: PipageBranch,
    /// `(y_p, y_q)` before the update.
    pub before: (f64, f64),
    /// `(y_p, y_q)` after the update and snapping.
    pub after: (f64, f64),
}

/// Full record of a weighted rounding run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RoundingTrace {
    pub iterations: Vec<PipageIteration>,
    pub final_vector: FractionalVector,
}

fn snap(v: &mut f64) {
    if v.abs() <= SNAP_TOL {
        *v = 0.0;
    } else if (*v - 1.0).abs() <= SNAP_TOL {
        *v = 1.0;
    }
}

fn is_fractional(v: f64) -> bool {
    v > 0.0 && v < 1.0
}

/// First two fractional coordinates in ascending id order.
fn first_fractional_pair(y: &[f64]) -> Option<(usize, usize)> {
    let mut first = None;
    for (e, &v) in y.iter().enumerate() {
        if is_fractional(v) {
            match first {
                None => first = Some(e),
                Some(p) => return Some((p, e)),
            }
        }
    }
    None
}

/// Weight-conserving update on the pair `(p, q)`. Moves mass so that
/// `w_p y_p + w_q y_q` is invariant and lands the bound-hitting coordinate
/// exactly on 0 or 1.
fn weighted_step(y: &mut [f64], weights: &[f64], p: usize, q: usize, u: f64) -> PipageIteration {
    // Orient so that a zero-weight coordinate (if only one) sits at p: its
    // moves are free, the other coordinate stays put.
    let (p, q) = if weights[p] != 0.0 && weights[q] == 0.0 {
        (q, p)
    } else {
        (p, q)
    };
    let (wp, wq) = (weights[p], weights[q]);
    let before = (y[p], y[q]);

    enum Rates {
        /// Both weights positive: `q` moves at rate `w_p/w_q` relative to `p`.
        Scaled(f64),
        /// Both weights zero: uniform rates, exchange mass one-for-one.
        Uniform,
        /// `w_p = 0 < w_q`: only `p` may move.
        FreeP,
    }
    let rates = if wp > 0.0 && wq > 0.0 {
        Rates::Scaled(wq / wp)
    } else if wp == 0.0 && wq == 0.0 {
        Rates::Uniform
    } else {
        Rates::FreeP
    };

    let (delta1, delta2) = match rates {
        Rates::Scaled(r) => (y[p].min((1.0 - y[q]) * r), (1.0 - y[p]).min(y[q] * r)),
        Rates::Uniform => (y[p].min(1.0 - y[q]), (1.0 - y[p]).min(y[q])),
        Rates::FreeP => (y[p], 1.0 - y[p]),
    };
    let branch = if u * (delta1 + delta2) < delta2 {
        PipageBranch::LowerP
    } else {
        PipageBranch::RaiseP
    };

    match (&rates, branch) {
        (Rates::Scaled(r), PipageBranch::LowerP) => {
            if y[p] <= (1.0 - y[q]) * r {
                y[q] += y[p] / r;
                y[p] = 0.0;
            } else {
                y[p] -= (1.0 - y[q]) * r;
                y[q] = 1.0;
            }
        }
        (Rates::Scaled(r), PipageBranch::RaiseP) => {
            if 1.0 - y[p] <= y[q] * r {
                y[q] -= (1.0 - y[p]) / r;
                y[p] = 1.0;
            } else {
                y[p] += y[q] * r;
                y[q] = 0.0;
            }
        }
        (Rates::Uniform, PipageBranch::LowerP) => {
            if y[p] <= 1.0 - y[q] {
                y[q] += y[p];
                y[p] = 0.0;
            } else {
                y[p] -= 1.0 - y[q];
                y[q] = 1.0;
            }
        }
        (Rates::Uniform, PipageBranch::RaiseP) => {
            if 1.0 - y[p] <= y[q] {
                y[q] -= 1.0 - y[p];
                y[p] = 1.0;
            } else {
                y[p] += y[q];
                y[q] = 0.0;
            }
        }
        (Rates::FreeP, PipageBranch::LowerP) => y[p] = 0.0,
        (Rates::FreeP, PipageBranch::RaiseP) => y[p] = 1.0,
    }
    snap(&mut y[p]);
    snap(&mut y[q]);

    PipageIteration {
        p,
        q,
        delta1,
        delta2,
        branch,
        before,
        after: (y[p], y[q]),
    }
}

/// Classic (unweighted) update: exchanges mass one-for-one, preserving the
/// plain coordinate sum. Used inside and across groups.
fn classic_step(y: &mut [f64], p: usize, q: usize, u: f64) -> PipageIteration {
    let before = (y[p], y[q]);
    let delta1 = y[p].min(1.0 - y[q]);
    let delta2 = (1.0 - y[p]).min(y[q]);
    let branch = if u * (delta1 + delta2) < delta2 {
        PipageBranch::LowerP
    } else {
        PipageBranch::RaiseP
    };
    match branch {
        PipageBranch::LowerP => {
            if y[p] <= 1.0 - y[q] {
                y[q] += y[p];
                y[p] = 0.0;
            } else {
                y[p] -= 1.0 - y[q];
                y[q] = 1.0;
            }
        }
        PipageBranch::RaiseP => {
            if 1.0 - y[p] <= y[q] {
                y[q] -= 1.0 - y[p];
                y[p] = 1.0;
            } else {
                y[p] += y[q];
                y[q] = 0.0;
            }
        }
    }
    snap(&mut y[p]);
    snap(&mut y[q]);
    PipageIteration {
        p,
        q,
        delta1,
        delta2,
        branch,
        before,
        after: (y[p], y[q]),
    }
}

fn check_cube_input(x: &[f64]) -> Result<()> {
    for (index, &value) in x.iter().enumerate() {
        if !value.is_finite() || !(0.0..=1.0).contains(&value) {
            return Err(Error::OutsideCube { index, value });
        }
    }
    Ok(())
}

/// In-place weighted rounding; shared by the traced entry point and the
/// allocation-light Monte-Carlo loop.
fn weighted_round_in_place(
    weights: &[f64],
    y: &mut [f64],
    seed: u64,
    mut trace: Option<&mut Vec<PipageIteration>>,
) -> Result<()> {
    for v in y.iter_mut() {
        snap(v);
    }
    let n = y.len();
    let mut iteration = 0u64;
    while let Some((p, q)) = first_fractional_pair(y) {
        if iteration as usize >= n {
            return Err(Error::Internal(format!(
                "weighted pipage exceeded {n} iterations"
            )));
        }
        let record = weighted_step(y, weights, p, q, seeding::unit_uniform(seed, iteration));
        if record.delta1 + record.delta2 <= 0.0 {
            // Unreachable for strictly fractional pairs; degenerate guard.
            snap(&mut y[record.p]);
            snap(&mut y[record.q]);
            continue;
        }
        if let Some(t) = trace.as_mut() {
            t.push(record);
        }
        iteration += 1;
    }
    Ok(())
}

/// Rounds `x` to a vector with at most one fractional coordinate while
/// conserving `Σ w_e y_e` exactly (up to float dust) on every run.
/// Deterministic for a fixed seed; the trace records every pair update.
pub fn weighted_pipage_round(
    instance: &Instance,
    x: &FractionalVector,
    seed: u64,
) -> Result<(FractionalVector, RoundingTrace)> {
    if x.len() != instance.n() {
        return Err(Error::DimensionMismatch {
            expected: instance.n(),
            got: x.len(),
        });
    }
    check_cube_input(x)?;
    let mut y = x.0.clone();
    let mut iterations = Vec::new();
    weighted_round_in_place(&instance.weights(), &mut y, seed, Some(&mut iterations))?;
    let final_vector = FractionalVector(y);
    Ok((
        final_vector.clone(),
        RoundingTrace {
            iterations,
            final_vector,
        },
    ))
}

/// Drops the (at most one) fractional coordinate of a nearly integral
/// vector: coordinates within 1e-9 of a bound snap first, the survivor
/// floors to 0. Errors if more than one coordinate is genuinely fractional.
pub fn floor_integralize(y: &FractionalVector) -> Result<IntegralSolution> {
    let mut selected = Vec::new();
    let mut fractional = 0usize;
    for (e, &v) in y.iter().enumerate() {
        if v >= 1.0 - FLOOR_SNAP_TOL {
            selected.push(e);
        } else if v > FLOOR_SNAP_TOL {
            fractional += 1;
        }
    }
    if fractional > 1 {
        return Err(Error::InvalidParameter(format!(
            "flooring needs a nearly integral vector, found {fractional} fractional coordinates"
        )));
    }
    Ok(IntegralSolution { selected })
}

/// In-place group rounding; returns the chosen set.
#[allow(clippy::needless_range_loop)]
fn group_round_in_place(instance: &Instance, y: &mut [f64], seed: u64) -> Result<ElementSet> {
    let n = instance.n();
    for v in y.iter_mut() {
        snap(v);
    }
    let mut iteration = 0u64;
    loop {
        if iteration as usize > n {
            return Err(Error::Internal(format!(
                "group pipage exceeded {n} iterations"
            )));
        }
        // Phase 1: pair fractional coordinates inside the lowest color that
        // still has two; group sums are invariant here.
        let mut pair = None;
        'groups: for bound in &instance.bounds {
            let mut first = None;
            for e in 0..n {
                if instance.color_of(e) == bound.color && is_fractional(y[e]) {
                    match first {
                        None => first = Some(e),
                        Some(p) => {
                            pair = Some((p, e));
                            break 'groups;
                        }
                    }
                }
            }
        }
        // Phase 2: at most one fractional coordinate per group remains; pair
        // leftovers across groups in ascending color order. Each group sum
        // stays strictly inside an integer-width window of its interval, so
        // either rounding of its leftover keeps the count feasible.
        if pair.is_none() {
            let mut leftovers: Vec<usize> = (0..n).filter(|&e| is_fractional(y[e])).collect();
            leftovers.sort_by_key(|&e| (instance.color_of(e), e));
            match leftovers.len() {
                0 => break,
                1 => {
                    // Single survivor: Bernoulli with its current value, the
                    // unique choice keeping E[X_e] = x_e exactly.
                    let e = leftovers[0];
                    let u = seeding::unit_uniform(seed, iteration);
                    y[e] = if u < y[e] { 1.0 } else { 0.0 };
                    break;
                }
                _ => pair = Some((leftovers[0], leftovers[1])),
            }
        }
        let (p, q) = pair.unwrap();
        classic_step(y, p, q, seeding::unit_uniform(seed, iteration));
        iteration += 1;
    }

    let mut set = ElementSet::empty(n);
    for (e, &v) in y.iter().enumerate() {
        if v == 1.0 {
            set.insert(e);
        } else if v != 0.0 {
            return Err(Error::Internal(format!(
                "group pipage left coordinate {e} fractional at {v}"
            )));
        }
    }
    // Fairness is exact by construction; recheck defensively.
    let counts = instance.group_counts(&set);
    for bound in &instance.bounds {
        let c = counts[bound.color - 1];
        if c > bound.upper || c < bound.min_count() {
            return Err(Error::Internal(format!(
                "group pipage violated bounds for color {}: count {c}",
                bound.color
            )));
        }
    }
    Ok(set)
}

/// Rounds a point of the fair knapsack polytope to an integral set whose
/// group counts satisfy every bound on every run, with `E[X_e] = x_e`
/// per element (so the budget holds in expectation). Deterministic per seed.
pub fn group_pipage_round(
    instance: &Instance,
    x: &FractionalVector,
    seed: u64,
) -> Result<IntegralSolution> {
    if x.len() != instance.n() {
        return Err(Error::DimensionMismatch {
            expected: instance.n(),
            got: x.len(),
        });
    }
    if !crate::model::in_polytope(instance, x, FEASIBILITY_TOL) {
        return Err(Error::OutsidePolytope(
            "group rounding input must lie in the fair knapsack polytope".into(),
        ));
    }
    let mut y = x.0.clone();
    for v in y.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    let set = group_round_in_place(instance, &mut y, seed)?;
    Ok(IntegralSolution::from_set(&set))
}

/// Which rounding scheme a Monte-Carlo run exercises.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rounder {
    Weighted,
    Group,
}

impl std::fmt::Display for Rounder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rounder::Weighted => write!(f, "weighted"),
            Rounder::Group => write!(f, "group"),
        }
    }
}

/// Mean product of one coordinate pair over the trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairProduct {
    pub p: usize,
    pub q: usize,
    pub stat: MeanStat,
}

/// Distribution of a group's final count over the trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupCounts {
    pub color: usize,
    /// count -> number of trials ending with that many selected elements.
    pub histogram: BTreeMap<usize, usize>,
    /// Trials whose count fell outside the group's interval.
    pub violations: usize,
}

/// Aggregates of repeated randomized rounding used by the statistical
/// checks: marginal preservation, negative correlation, objective
/// improvement, knapsack conservation, and fairness exactness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundingStats {
    pub rounder: Rounder,
    pub trials: usize,
    pub seed: u64,
    /// The fractional input the statistics compare against.
    pub x: FractionalVector,
    /// Mean of `y_e` (pre-floor for the weighted rounder) per element.
    pub empirical_marginals: Vec<MeanStat>,
    /// Mean of `y_p · y_q` for every pair `p < q`.
    pub pair_products: Vec<PairProduct>,
    /// Mean of `f` at the final integral set.
    pub objective_mean: MeanStat,
    /// Mean of the exact multilinear extension at the rounder output
    /// (nearly integral for the weighted rounder, integral for the group
    /// rounder).
    pub multilinear_mean: MeanStat,
    /// Mean total weight of the final integral set.
    pub weight_mean: MeanStat,
    /// Trials whose final integral set exceeded the budget beyond 1e-9.
    pub knapsack_violations: usize,
    pub fairness_counts: Vec<GroupCounts>,
}

/// Runs `trials` independent rounding passes (trial `t` is seeded by
/// `(seed, t)`) and aggregates the statistics. `f` is evaluated instead of
/// the instance objective so callers can rescale without rebuilding the
/// instance.
pub fn monte_carlo_stats(
    instance: &Instance,
    f: &Objective,
    x: &FractionalVector,
    rounder: Rounder,
    trials: usize,
    seed: u64,
) -> Result<RoundingStats> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let n = instance.n();
    if x.len() != n || f.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if x.len() != n { x.len() } else { f.n() },
        });
    }
    check_cube_input(x)?;
    if rounder == Rounder::Group && !crate::model::in_polytope(instance, x, FEASIBILITY_TOL) {
        return Err(Error::OutsidePolytope(
            "group rounding input must lie in the fair knapsack polytope".into(),
        ));
    }

    let weights = instance.weights();
    let mut marginals = vec![MeanStat::new(); n];
    let mut pairs: Vec<PairProduct> = (0..n)
        .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
        .map(|(p, q)| PairProduct {
            p,
            q,
            stat: MeanStat::new(),
        })
        .collect();
    let mut objective_mean = MeanStat::new();
    let mut multilinear_mean = MeanStat::new();
    let mut weight_mean = MeanStat::new();
    let mut knapsack_violations = 0usize;
    let mut histograms: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); instance.k()];
    let mut violations = vec![0usize; instance.k()];

    let mut y = vec![0.0; n];
    for trial in 0..trials {
        let trial_seed = seeding::derive(seed, trial as u64);
        y.copy_from_slice(x);
        let set = match rounder {
            Rounder::Weighted => {
                weighted_round_in_place(&weights, &mut y, trial_seed, None)?;
                floor_integralize(&FractionalVector(y.clone()))?.to_set(n)?
            }
            Rounder::Group => group_round_in_place(instance, &mut y, trial_seed)?,
        };

        for (e, stat) in marginals.iter_mut().enumerate() {
            stat.push(y[e]);
        }
        for pair in pairs.iter_mut() {
            pair.stat.push(y[pair.p] * y[pair.q]);
        }
        objective_mean.push(submodular::eval(f, &set.ids())?);
        multilinear_mean.push(submodular::multilinear_exact(f, &y)?);
        let w = instance.weight_of(&set);
        weight_mean.push(w);
        if w > instance.budget + FEASIBILITY_TOL {
            knapsack_violations += 1;
        }
        let counts = instance.group_counts(&set);
        for bound in &instance.bounds {
            let c = counts[bound.color - 1];
            *histograms[bound.color - 1].entry(c).or_insert(0) += 1;
            if c > bound.upper || c < bound.min_count() {
                violations[bound.color - 1] += 1;
            }
        }
    }

    Ok(RoundingStats {
        rounder,
        trials,
        seed,
        x: x.clone(),
        empirical_marginals: marginals,
        pair_products: pairs,
        objective_mean,
        multilinear_mean,
        weight_mean,
        knapsack_violations,
        fairness_counts: instance
            .bounds
            .iter()
            .map(|b| GroupCounts {
                color: b.color,
                histogram: std::mem::take(&mut histograms[b.color - 1]),
                violations: violations[b.color - 1],
            })
            .collect(),
    })
}

impl RoundingStats {
    /// CSV rows (dot decimals, fixed column order): one `element` row per
    /// coordinate, one `pair` row per coordinate pair, one `group` row per
    /// color carrying its violation count.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("kind,id_a,id_b,x,mean,stderr,product_of_means,fairness_violations\n");
        for (e, stat) in self.empirical_marginals.iter().enumerate() {
            out.push_str(&format!(
                "element,{e},,{},{},{},,\n",
                self.x[e],
                stat.mean(),
                stat.stderr()
            ));
        }
        for pair in &self.pair_products {
            let product_of_means =
                self.empirical_marginals[pair.p].mean() * self.empirical_marginals[pair.q].mean();
            out.push_str(&format!(
                "pair,{},{},,{},{},{},\n",
                pair.p,
                pair.q,
                pair.stat.mean(),
                pair.stat.stderr(),
                product_of_means
            ));
        }
        for group in &self.fairness_counts {
            let trials: usize = group.histogram.values().sum();
            let mean_count: f64 = group
                .histogram
                .iter()
                .map(|(&count, &t)| count as f64 * t as f64)
                .sum::<f64>()
                / trials.max(1) as f64;
            out.push_str(&format!(
                "group,{},,,{mean_count},,,{}\n",
                group.color, group.violations
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::GroupBound;
    use proptest::prelude::*;

    fn two_element_x() -> FractionalVector {
        FractionalVector(vec![0.5, 0.5])
    }

    #[test]
    fn weighted_two_element_lands_on_the_known_outcomes() {
        // x = (0.5, 0.5), w = (1, 2): δ1 = δ2 = 0.5, so the run ends at
        // (0, 0.75) or (1, 0.25), each preserving w·y = 1.5.
        let inst = fixtures::two_element();
        let mut seen_low = false;
        let mut seen_high = false;
        for seed in 0..32 {
            let (y, trace) = weighted_pipage_round(&inst, &two_element_x(), seed).unwrap();
            let dot = y[0] + 2.0 * y[1];
            assert!((dot - 1.5).abs() <= 1e-9);
            assert_eq!(trace.iterations.len(), 1);
            let it = &trace.iterations[0];
            assert!((it.delta1 - 0.5).abs() <= 1e-12);
            assert!((it.delta2 - 0.5).abs() <= 1e-12);
            if y[0] == 0.0 {
                assert!((y[1] - 0.75).abs() <= 1e-12);
                assert_eq!(it.branch, PipageBranch::LowerP);
                seen_low = true;
            } else {
                assert_eq!(y[0], 1.0);
                assert!((y[1] - 0.25).abs() <= 1e-12);
                assert_eq!(it.branch, PipageBranch::RaiseP);
                seen_high = true;
            }
        }
        assert!(seen_low && seen_high, "32 seeds never split branches");
    }

    #[test]
    fn weighted_leaves_integral_and_single_fractional_inputs_alone() {
        let inst = fixtures::two_element();
        let x = FractionalVector(vec![1.0, 0.0]);
        let (y, trace) = weighted_pipage_round(&inst, &x, 7).unwrap();
        assert_eq!(y.0, vec![1.0, 0.0]);
        assert!(trace.iterations.is_empty());

        let x = FractionalVector(vec![0.3, 1.0]);
        let (y, trace) = weighted_pipage_round(&inst, &x, 7).unwrap();
        assert_eq!(y.0, vec![0.3, 1.0]);
        assert!(trace.iterations.is_empty());
    }

    #[test]
    fn weighted_zero_weight_conventions() {
        // Both weights zero: uniform exchange, sum preserved.
        let mut inst = fixtures::two_element();
        inst.elements[0].weight = 0.0;
        inst.elements[1].weight = 0.0;
        for seed in 0..8 {
            let (y, _) =
                weighted_pipage_round(&inst, &FractionalVector(vec![0.3, 0.4]), seed).unwrap();
            assert!((y[0] + y[1] - 0.7).abs() <= 1e-9);
            assert!(y.fractional_ids(0.0).len() <= 1);
        }

        // Exactly one zero weight: the free coordinate rounds alone, the
        // weighted one never moves.
        let mut inst = fixtures::two_element();
        inst.elements[0].weight = 0.0;
        inst.elements[1].weight = 5.0;
        for seed in 0..8 {
            let (y, trace) =
                weighted_pipage_round(&inst, &FractionalVector(vec![0.3, 0.6]), seed).unwrap();
            assert!(y[0] == 0.0 || y[0] == 1.0);
            assert_eq!(y[1], 0.6);
            assert_eq!(trace.iterations[0].p, 0);
        }

        // Same but with the zero-weight element second: orientation swaps.
        let mut inst = fixtures::two_element();
        inst.elements[0].weight = 5.0;
        inst.elements[1].weight = 0.0;
        for seed in 0..8 {
            let (y, trace) =
                weighted_pipage_round(&inst, &FractionalVector(vec![0.6, 0.3]), seed).unwrap();
            assert!(y[1] == 0.0 || y[1] == 1.0);
            assert_eq!(y[0], 0.6);
            assert_eq!(trace.iterations[0].p, 1);
        }
    }

    #[test]
    fn weighted_rejects_points_outside_the_cube() {
        let inst = fixtures::two_element();
        assert!(matches!(
            weighted_pipage_round(&inst, &FractionalVector(vec![1.5, 0.0]), 0),
            Err(Error::OutsideCube { index: 0, .. })
        ));
        assert!(matches!(
            weighted_pipage_round(&inst, &FractionalVector(vec![0.5]), 0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn floor_examples() {
        let z = floor_integralize(&FractionalVector(vec![1.0, 0.3, 1.0, 0.0])).unwrap();
        assert_eq!(z.selected, vec![0, 2]);

        let z = floor_integralize(&FractionalVector(vec![1.0, 0.0])).unwrap();
        assert_eq!(z.selected, vec![0]);

        // A coordinate within 1e-9 of 1 snaps up rather than flooring away.
        let z = floor_integralize(&FractionalVector(vec![1.0 - 1e-12, 1.0])).unwrap();
        assert_eq!(z.selected, vec![0, 1]);

        assert!(matches!(
            floor_integralize(&FractionalVector(vec![0.5, 0.5])),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn classic_step_example() {
        // (0.3, 0.9): δ1 = 0.1, δ2 = 0.7; branch LowerP has probability
        // 0.875 and yields (0.2, 1.0), the other branch (1.0, 0.2).
        let mut y = vec![0.3, 0.9];
        let it = classic_step(&mut y, 0, 1, 0.5);
        assert!((it.delta1 - 0.1).abs() <= 1e-12);
        assert!((it.delta2 - 0.7).abs() <= 1e-12);
        assert_eq!(it.branch, PipageBranch::LowerP);
        assert!((y[0] - 0.2).abs() <= 1e-12);
        assert_eq!(y[1], 1.0);

        let mut y = vec![0.3, 0.9];
        let it = classic_step(&mut y, 0, 1, 0.9);
        assert_eq!(it.branch, PipageBranch::RaiseP);
        assert_eq!(y[0], 1.0);
        assert!((y[1] - 0.2).abs() <= 1e-12);

        // The threshold sits exactly at δ2/(δ1+δ2) = 0.875.
        let mut y = vec![0.3, 0.9];
        assert_eq!(
            classic_step(&mut y, 0, 1, 0.874).branch,
            PipageBranch::LowerP
        );
        let mut y = vec![0.3, 0.9];
        assert_eq!(
            classic_step(&mut y, 0, 1, 0.876).branch,
            PipageBranch::RaiseP
        );
    }

    #[test]
    fn group_rounding_keeps_chain4_counts_exact() {
        let inst = fixtures::chain4();
        let x = FractionalVector(vec![0.5, 0.5, 0.0, 1.0]);
        for seed in 0..200 {
            let sol = group_pipage_round(&inst, &x, seed).unwrap();
            let set = sol.to_set(4).unwrap();
            assert_eq!(inst.group_counts(&set), vec![1, 1], "seed {seed}");
            assert!(set.contains(3));
        }
    }

    #[test]
    fn group_rounding_is_identity_on_integral_points() {
        let inst = fixtures::chain4();
        let sol =
            group_pipage_round(&inst, &FractionalVector(vec![0.0, 1.0, 0.0, 1.0]), 5).unwrap();
        assert_eq!(sol.selected, vec![1, 3]);
    }

    #[test]
    fn group_rounding_rejects_points_outside_the_polytope() {
        let inst = fixtures::chain4();
        assert!(matches!(
            group_pipage_round(&inst, &FractionalVector(vec![1.0, 1.0, 1.0, 1.0]), 0),
            Err(Error::OutsidePolytope(_))
        ));
        // Below the second group's lower bound.
        assert!(matches!(
            group_pipage_round(&inst, &FractionalVector(vec![0.5, 0.5, 0.5, 0.5]), 0),
            Err(Error::OutsidePolytope(_))
        ));
    }

    #[test]
    fn group_rounding_marginal_preservation_on_a_single_group() {
        // Two elements of one wide group at x = (0.3, 0.9): after the
        // classic step and the Bernoulli leftover, E[X_e] must equal x_e.
        let mut inst = fixtures::two_element();
        inst.bounds = vec![GroupBound {
            color: 1,
            lower: None,
            upper: 2,
        }];
        inst.budget = 10.0;
        let x = FractionalVector(vec![0.3, 0.9]);
        let stats =
            monte_carlo_stats(&inst, &inst.objective, &x, Rounder::Group, 20_000, 11).unwrap();
        for (e, stat) in stats.empirical_marginals.iter().enumerate() {
            let gap = (stat.mean() - x[e]).abs();
            assert!(
                gap <= 4.0 * stat.stderr(),
                "element {e}: mean {} vs {}",
                stat.mean(),
                x[e]
            );
        }
    }

    #[test]
    fn monte_carlo_two_element_marginals_and_conservation() {
        let inst = fixtures::two_element();
        let stats = monte_carlo_stats(
            &inst,
            &inst.objective,
            &two_element_x(),
            Rounder::Weighted,
            20_000,
            3,
        )
        .unwrap();
        assert_eq!(stats.trials, 20_000);
        for stat in &stats.empirical_marginals {
            assert!((stat.mean() - 0.5).abs() <= 4.0 * stat.stderr());
            assert!(stat.stderr().is_finite());
        }
        assert_eq!(stats.knapsack_violations, 0);
        // Pre-floor outputs are (0, 0.75) or (1, 0.25): the pair product
        // is 0 or 0.25, strictly below the product of means in the limit.
        let pair = &stats.pair_products[0];
        assert!(pair.stat.mean() <= 0.25 + 1e-9);
    }

    #[test]
    fn monte_carlo_group_rounder_fairness_is_exact() {
        let inst = fixtures::chain4();
        let x = FractionalVector(vec![0.5, 0.5, 0.0, 1.0]);
        let stats =
            monte_carlo_stats(&inst, &inst.objective, &x, Rounder::Group, 5_000, 9).unwrap();
        for group in &stats.fairness_counts {
            assert_eq!(group.violations, 0, "color {}", group.color);
            assert_eq!(group.histogram.keys().copied().collect::<Vec<_>>(), vec![1]);
        }
        // Outcomes are {e2, e4} (f = 3) or {e1, e4} (f = 2).
        assert!(stats.objective_mean.mean() > 2.0);
        assert!(stats.objective_mean.mean() < 3.0);
        assert_eq!(stats.multilinear_mean.mean(), stats.objective_mean.mean());
    }

    #[test]
    fn monte_carlo_is_deterministic_and_exports_csv() {
        let inst = fixtures::two_element();
        let a = monte_carlo_stats(
            &inst,
            &inst.objective,
            &two_element_x(),
            Rounder::Weighted,
            500,
            42,
        )
        .unwrap();
        let b = monte_carlo_stats(
            &inst,
            &inst.objective,
            &two_element_x(),
            Rounder::Weighted,
            500,
            42,
        )
        .unwrap();
        assert_eq!(a, b);

        let csv = a.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        // Header + 2 elements + 1 pair + 1 group.
        assert_eq!(lines.len(), 5);
        assert_eq!(
            lines[0],
            "kind,id_a,id_b,x,mean,stderr,product_of_means,fairness_violations"
        );
        assert!(lines[1].starts_with("element,0,,0.5,"));
        assert!(lines[3].starts_with("pair,0,1,,"));
        assert!(lines[4].starts_with("group,1,"));

        assert!(matches!(
            monte_carlo_stats(
                &inst,
                &inst.objective,
                &two_element_x(),
                Rounder::Weighted,
                0,
                1
            ),
            Err(Error::InvalidParameter(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Weight conservation, near-integrality, and the iteration budget
        /// hold for arbitrary inputs, including zero weights.
        #[test]
        fn weighted_rounding_invariants(
            x in proptest::collection::vec(0.0f64..=1.0, 6),
            raw_w in proptest::collection::vec(0.0f64..3.0, 6),
            zero_mask in 0u8..64,
            seed in 0u64..1000,
        ) {
            let weights: Vec<f64> = raw_w
                .iter()
                .enumerate()
                .map(|(i, &w)| if zero_mask >> i & 1 == 1 { 0.0 } else { w })
                .collect();
            let mut y = x.clone();
            let mut iters = Vec::new();
            weighted_round_in_place(&weights, &mut y, seed, Some(&mut iters)).unwrap();

            let before: f64 = x.iter().zip(&weights).map(|(a, b)| a * b).sum();
            let after: f64 = y.iter().zip(&weights).map(|(a, b)| a * b).sum();
            prop_assert!((before - after).abs() <= 1e-9);
            prop_assert!(y.iter().filter(|&&v| is_fractional(v)).count() <= 1);
            prop_assert!(iters.len() <= 6);
            for it in &iters {
                prop_assert!(it.after.0 == 0.0 || it.after.0 == 1.0
                    || it.after.1 == 0.0 || it.after.1 == 1.0);
            }
            prop_assert!(y.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }

        /// The classic step preserves the plain sum and integralizes a
        /// coordinate.
        #[test]
        fn classic_step_conserves_the_sum(
            a in 0.001f64..0.999,
            b in 0.001f64..0.999,
            u in 0.0f64..1.0,
        ) {
            let mut y = vec![a, b];
            classic_step(&mut y, 0, 1, u);
            prop_assert!((y[0] + y[1] - (a + b)).abs() <= 1e-12);
            prop_assert!(y[0] == 0.0 || y[0] == 1.0 || y[1] == 0.0 || y[1] == 1.0);
        }
    }
}
