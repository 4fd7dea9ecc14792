//! Exhaustive exact solvers used as ground truth by the statistical suites.
//!
//! Subsets are visited in ascending bitmask order with incremental
//! objective, weight, and group-count maintenance (a binary counter flips
//! the trailing run of bits, so the amortized work per subset is constant).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Instance, IntegralSolution, FEASIBILITY_TOL};
use crate::set::ElementSet;
use crate::submodular::{SetEvaluator, SetFunction};
use crate::truncation::TruncationParams;

/// Exhaustive optimization walks all `2^n` subsets.
pub const OPT_GUARD: usize = 22;
/// Feasible-set enumeration materializes its result list.
pub const ENUMERATION_GUARD: usize = 20;

/// Exact optimum with the composition parameters read off it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleResult {
    pub best_set: IntegralSolution,
    pub best_value: f64,
    /// `gamma[i]` = members of group `i+1` in the optimum; `beta[i]` = how
    /// many of those sit among the group's `gamma[i]` cheapest elements.
    pub params: TruncationParams,
    /// Subsets examined (always `2^n`).
    pub enumerated: usize,
}

struct SubsetWalker<'a> {
    instance: &'a Instance,
    evaluator: crate::submodular::ObjectiveEvaluator<'a>,
    weight: f64,
    counts: Vec<usize>,
    mask: u64,
}

impl<'a> SubsetWalker<'a> {
    fn new(instance: &'a Instance) -> Self {
        SubsetWalker {
            instance,
            evaluator: instance.objective.evaluator(),
            weight: 0.0,
            counts: vec![0; instance.k()],
            mask: 0,
        }
    }

    /// Advances to the next mask, toggling only the bits that change.
    fn step(&mut self) {
        let flipped = self.mask.trailing_ones() as usize;
        for e in 0..flipped {
            self.evaluator.remove(e);
            self.weight -= self.instance.elements[e].weight;
            self.counts[self.instance.color_of(e) - 1] -= 1;
        }
        self.evaluator.add(flipped);
        self.weight += self.instance.elements[flipped].weight;
        self.counts[self.instance.color_of(flipped) - 1] += 1;
        self.mask += 1;
    }

    fn feasible(&self) -> bool {
        self.weight <= self.instance.budget + FEASIBILITY_TOL
            && self.instance.bounds.iter().all(|b| {
                let c = self.counts[b.color - 1];
                c <= b.upper && c >= b.min_count()
            })
    }
}

/// Exact maximum of the instance objective over all feasible sets; ties go
/// to the smallest bitmask, so among equal-value optima the winner avoids
/// value-neutral extra elements where possible. Errors above `n = 22` or
/// when no subset is feasible.
pub fn brute_force_opt(instance: &Instance) -> Result<OracleResult> {
    let n = instance.n();
    if n > OPT_GUARD {
        return Err(Error::SizeGuard {
            what: "exhaustive optimization",
            limit: OPT_GUARD,
            got: n,
        });
    }

    let mut walker = SubsetWalker::new(instance);
    let mut best: Option<(u64, f64)> = None;
    let total = 1u64 << n;
    for mask in 0..total {
        if mask > 0 {
            walker.step();
        }
        debug_assert_eq!(walker.mask, mask);
        if walker.feasible() {
            let value = walker.evaluator.value();
            if best.is_none_or(|(_, b)| value > b) {
                best = Some((mask, value));
            }
        }
    }

    let (best_mask, best_value) =
        best.ok_or_else(|| Error::Infeasible("no feasible set".into()))?;
    let set = ElementSet::from_mask(n, best_mask);
    let counts = instance.group_counts(&set);
    let mut gamma = Vec::with_capacity(instance.k());
    let mut beta = Vec::with_capacity(instance.k());
    for bound in &instance.bounds {
        let g = counts[bound.color - 1];
        let cheapest = instance.group_sorted_by_weight(bound.color);
        let b = cheapest[..g].iter().filter(|&&e| set.contains(e)).count();
        gamma.push(g);
        beta.push(b);
    }

    Ok(OracleResult {
        best_set: IntegralSolution::from_set(&set),
        best_value,
        params: TruncationParams { gamma, beta },
        enumerated: total as usize,
    })
}

/// All feasible subsets of an instance, ascending by bitmask value.
#[derive(Clone, Debug)]
pub struct FeasibleEnumeration {
    pub n: usize,
    pub masks: Vec<u64>,
}

impl FeasibleEnumeration {
    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn sets(&self) -> impl Iterator<Item = ElementSet> + '_ {
        self.masks.iter().map(|&m| ElementSet::from_mask(self.n, m))
    }
}

/// Enumerates every feasible subset. Errors above `n = 20`.
pub fn enumerate_feasible(instance: &Instance) -> Result<FeasibleEnumeration> {
    let n = instance.n();
    if n > ENUMERATION_GUARD {
        return Err(Error::SizeGuard {
            what: "feasible-set enumeration",
            limit: ENUMERATION_GUARD,
            got: n,
        });
    }
    let mut walker = SubsetWalker::new(instance);
    let mut masks = Vec::new();
    for mask in 0..(1u64 << n) {
        if mask > 0 {
            walker.step();
        }
        if walker.feasible() {
            masks.push(mask);
        }
    }
    Ok(FeasibleEnumeration { n, masks })
}
