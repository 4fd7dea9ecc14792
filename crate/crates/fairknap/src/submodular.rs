//! Monotone submodular objectives and their multilinear extension.
//!
//! Three concrete oracle families are provided ([`Objective`]): weighted
//! coverage, modular (additive), and saturating (budget-capped additive).
//! All are normalized (`f(∅) = 0`), monotone, and submodular. Algorithms
//! are generic over [`SetFunction`] so tests can plug in adversarial
//! functions; hot paths go through an incremental [`SetEvaluator`] to keep
//! marginal queries O(cover size) instead of O(n).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding;
use crate::set::ElementSet;
use crate::stats::MeanStat;

/// Coordinates this close to 0 or 1 are treated as integral when
/// conditioning the multilinear extension.
const INTEGRAL_TOL: f64 = 1e-12;

/// Exhaustive multilinear evaluation enumerates `2^s` subsets of the
/// fractional support; refuse beyond this.
pub const MAX_EXACT_SUPPORT: usize = 22;

/// Exhaustive submodularity checking enumerates all `2^n` base sets.
pub const MAX_EXHAUSTIVE_CHECK: usize = 12;

/// A set function oracle over ground set `{0, .., n-1}`.
pub trait SetFunction {
    type Evaluator<'a>: SetEvaluator
    where
        Self: 'a;

    fn ground_size(&self) -> usize;

    /// A fresh incremental evaluator positioned at the empty set.
    fn evaluator(&self) -> Self::Evaluator<'_>;

    fn eval_set(&self, set: &ElementSet) -> f64 {
        let mut ev = self.evaluator();
        for e in set.iter() {
            ev.add(e);
        }
        ev.value()
    }
}

/// Incremental state for one set function: holds a current set `S` and
/// answers value/marginal queries against it.
pub trait SetEvaluator {
    /// `f(S)` for the current set.
    fn value(&self) -> f64;

    fn contains(&self, e: usize) -> bool;

    /// Inserts `e` (caller guarantees `e ∉ S`).
    fn add(&mut self, e: usize);

    /// Deletes `e` (caller guarantees `e ∈ S`).
    fn remove(&mut self, e: usize);

    /// Resets to the empty set.
    fn clear(&mut self);

    /// `f(S ∪ e) - f(S)`; zero when `e ∈ S`.
    fn add_gain(&self, e: usize) -> f64;

    /// `f(S) - f(S \ e)`; zero when `e ∉ S`.
    fn remove_loss(&self, e: usize) -> f64;

    /// `f(S ∪ e) - f(S \ e)`, the quantity whose expectation over
    /// `S ~ D(x)` is the partial derivative of the multilinear extension.
    fn toggle_gap(&self, e: usize) -> f64 {
        if self.contains(e) {
            self.remove_loss(e)
        } else {
            self.add_gain(e)
        }
    }
}

/// The concrete objective families an instance can carry.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Objective {
    /// `f(S)` = total value of universe items covered by at least one
    /// member of `S`. `cover_sets[e]` lists the item indices element `e`
    /// covers.
    Coverage {
        item_values: Vec<f64>,
        cover_sets: Vec<Vec<usize>>,
    },
    /// `f(S) = Σ_{e∈S} values[e]`.
    Modular { values: Vec<f64> },
    /// `f(S) = min(cap, Σ_{e∈S} values[e])`.
    Saturating { values: Vec<f64>, cap: f64 },
}

impl Objective {
    pub fn n(&self) -> usize {
        match self {
            Objective::Coverage { cover_sets, .. } => cover_sets.len(),
            Objective::Modular { values } => values.len(),
            Objective::Saturating { values, .. } => values.len(),
        }
    }

    /// Largest singleton value, `max_e f({e})`; zero on an empty ground set.
    pub fn max_singleton(&self) -> f64 {
        let ev = self.evaluator();
        (0..self.n()).map(|e| ev.add_gain(e)).fold(0.0, f64::max)
    }

    /// The same objective with all values multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Objective {
        match self {
            Objective::Coverage {
                item_values,
                cover_sets,
            } => Objective::Coverage {
                item_values: item_values.iter().map(|v| v * factor).collect(),
                cover_sets: cover_sets.clone(),
            },
            Objective::Modular { values } => Objective::Modular {
                values: values.iter().map(|v| v * factor).collect(),
            },
            Objective::Saturating { values, cap } => Objective::Saturating {
                values: values.iter().map(|v| v * factor).collect(),
                cap: cap * factor,
            },
        }
    }

    /// The contraction `f_A(S) = f(A ∪ S) - f(A)`, valid for `S` disjoint
    /// from `A`. All three families are closed under contraction.
    pub fn contract(&self, a: &ElementSet) -> Objective {
        match self {
            Objective::Coverage {
                item_values,
                cover_sets,
            } => {
                // Items already covered by A contribute nothing extra.
                let mut values = item_values.clone();
                for e in a.iter() {
                    for &item in &cover_sets[e] {
                        values[item] = 0.0;
                    }
                }
                Objective::Coverage {
                    item_values: values,
                    cover_sets: cover_sets.clone(),
                }
            }
            Objective::Modular { values } => Objective::Modular {
                values: values.clone(),
            },
            Objective::Saturating { values, cap } => {
                let used: f64 = a.iter().map(|e| values[e]).sum();
                Objective::Saturating {
                    values: values.clone(),
                    cap: (cap - used).max(0.0),
                }
            }
        }
    }

    /// Re-indexes the oracle onto the sub-ground-set `keep` (old ids, in
    /// order); new element `i` is old element `keep[i]`.
    pub fn restrict(&self, keep: &[usize]) -> Objective {
        match self {
            Objective::Coverage {
                item_values,
                cover_sets,
            } => Objective::Coverage {
                item_values: item_values.clone(),
                cover_sets: keep.iter().map(|&e| cover_sets[e].clone()).collect(),
            },
            Objective::Modular { values } => Objective::Modular {
                values: keep.iter().map(|&e| values[e]).collect(),
            },
            Objective::Saturating { values, cap } => Objective::Saturating {
                values: keep.iter().map(|&e| values[e]).collect(),
                cap: *cap,
            },
        }
    }

    /// Structural problems with the payload for a ground set of size `n`.
    pub(crate) fn payload_findings(&self, n: usize) -> Vec<String> {
        let mut findings = Vec::new();
        let check_values = |values: &[f64], findings: &mut Vec<String>| {
            if values.len() != n {
                findings.push(format!(
                    "objective has {} per-element values but the instance has {} elements",
                    values.len(),
                    n
                ));
            }
            for (e, v) in values.iter().enumerate() {
                if !v.is_finite() || *v < 0.0 {
                    findings.push(format!(
                        "objective value for element {e} is {v}; must be finite and >= 0"
                    ));
                }
            }
        };
        match self {
            Objective::Coverage {
                item_values,
                cover_sets,
            } => {
                if cover_sets.len() != n {
                    findings.push(format!(
                        "objective has {} cover sets but the instance has {} elements",
                        cover_sets.len(),
                        n
                    ));
                }
                for (i, v) in item_values.iter().enumerate() {
                    if !v.is_finite() || *v < 0.0 {
                        findings.push(format!("item value {i} is {v}; must be finite and >= 0"));
                    }
                }
                for (e, cover) in cover_sets.iter().enumerate() {
                    let mut seen = std::collections::HashSet::new();
                    for &item in cover {
                        if item >= item_values.len() {
                            findings.push(format!(
                                "element {e} covers item {item}, outside the {}-item universe",
                                item_values.len()
                            ));
                        }
                        if !seen.insert(item) {
                            findings.push(format!("element {e} lists item {item} twice"));
                        }
                    }
                }
            }
            Objective::Modular { values } => check_values(values, &mut findings),
            Objective::Saturating { values, cap } => {
                check_values(values, &mut findings);
                if !cap.is_finite() || *cap < 0.0 {
                    findings.push(format!("saturating cap is {cap}; must be finite and >= 0"));
                }
            }
        }
        findings
    }
}

/// Incremental evaluator for [`Objective`].
pub struct ObjectiveEvaluator<'a> {
    obj: &'a Objective,
    members: ElementSet,
    /// Coverage: per-item multiplicity of covering members.
    cover_counts: Vec<u32>,
    /// Coverage: cached total value of covered items.
    covered_value: f64,
    /// Modular / saturating: running value sum.
    sum: f64,
}

impl<'a> ObjectiveEvaluator<'a> {
    fn new(obj: &'a Objective) -> Self {
        let items = match obj {
            Objective::Coverage { item_values, .. } => item_values.len(),
            _ => 0,
        };
        ObjectiveEvaluator {
            obj,
            members: ElementSet::empty(obj.n()),
            cover_counts: vec![0; items],
            covered_value: 0.0,
            sum: 0.0,
        }
    }
}

impl SetEvaluator for ObjectiveEvaluator<'_> {
    fn value(&self) -> f64 {
        match self.obj {
            Objective::Coverage { .. } => self.covered_value,
            Objective::Modular { .. } => self.sum,
            Objective::Saturating { cap, .. } => self.sum.min(*cap),
        }
    }

    fn contains(&self, e: usize) -> bool {
        self.members.contains(e)
    }

    fn add(&mut self, e: usize) {
        debug_assert!(!self.members.contains(e));
        match self.obj {
            Objective::Coverage {
                item_values,
                cover_sets,
            } => {
                for &item in &cover_sets[e] {
                    if self.cover_counts[item] == 0 {
                        self.covered_value += item_values[item];
                    }
                    self.cover_counts[item] += 1;
                }
            }
            Objective::Modular { values } | Objective::Saturating { values, .. } => {
                self.sum += values[e];
            }
        }
        self.members.insert(e);
    }

    fn remove(&mut self, e: usize) {
        debug_assert!(self.members.contains(e));
        match self.obj {
            Objective::Coverage {
                item_values,
                cover_sets,
            } => {
                for &item in &cover_sets[e] {
                    self.cover_counts[item] -= 1;
                    if self.cover_counts[item] == 0 {
                        self.covered_value -= item_values[item];
                    }
                }
            }
            Objective::Modular { values } | Objective::Saturating { values, .. } => {
                self.sum -= values[e];
            }
        }
        self.members.remove(e);
    }

    fn clear(&mut self) {
        self.members.clear();
        self.cover_counts.fill(0);
        self.covered_value = 0.0;
        self.sum = 0.0;
    }

    fn add_gain(&self, e: usize) -> f64 {
        if self.members.contains(e) {
            return 0.0;
        }
        match self.obj {
            Objective::Coverage {
                item_values,
                cover_sets,
            } => cover_sets[e]
                .iter()
                .filter(|&&item| self.cover_counts[item] == 0)
                .map(|&item| item_values[item])
                .sum(),
            Objective::Modular { values } => values[e],
            Objective::Saturating { values, cap } => {
                (self.sum + values[e]).min(*cap) - self.sum.min(*cap)
            }
        }
    }

    fn remove_loss(&self, e: usize) -> f64 {
        if !self.members.contains(e) {
            return 0.0;
        }
        match self.obj {
            Objective::Coverage {
                item_values,
                cover_sets,
            } => cover_sets[e]
                .iter()
                .filter(|&&item| self.cover_counts[item] == 1)
                .map(|&item| item_values[item])
                .sum(),
            Objective::Modular { values } => values[e],
            Objective::Saturating { values, cap } => {
                self.sum.min(*cap) - (self.sum - values[e]).min(*cap)
            }
        }
    }
}

impl SetFunction for Objective {
    type Evaluator<'a> = ObjectiveEvaluator<'a>;

    fn ground_size(&self) -> usize {
        self.n()
    }

    fn evaluator(&self) -> ObjectiveEvaluator<'_> {
        ObjectiveEvaluator::new(self)
    }
}

/// `f(S)` with id checking.
pub fn eval(f: &impl SetFunction, ids: &[usize]) -> Result<f64> {
    let set = ElementSet::from_ids(f.ground_size(), ids)?;
    Ok(f.eval_set(&set))
}

/// `f(S ∪ e) - f(S)` with id checking; zero when `e ∈ S`.
pub fn marginal(f: &impl SetFunction, ids: &[usize], e: usize) -> Result<f64> {
    let n = f.ground_size();
    if e >= n {
        return Err(Error::UnknownElement { id: e, n });
    }
    let set = ElementSet::from_ids(n, ids)?;
    let mut ev = f.evaluator();
    for member in set.iter() {
        ev.add(member);
    }
    Ok(ev.add_gain(e))
}

fn check_cube(x: &[f64], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    for (index, &value) in x.iter().enumerate() {
        if !value.is_finite() || !(-1e-9..=1.0 + 1e-9).contains(&value) {
            return Err(Error::OutsideCube { index, value });
        }
    }
    Ok(())
}

/// The multilinear extension `F(x) = E[f(R)]`, `R` including each `e`
/// independently with probability `x_e`, evaluated exactly.
///
/// Integral coordinates are conditioned in or out; the remaining
/// fractional support is enumerated exhaustively, so it must have at most
/// [`MAX_EXACT_SUPPORT`] coordinates.
#[allow(clippy::needless_range_loop)]
pub fn multilinear_exact(f: &impl SetFunction, x: &[f64]) -> Result<f64> {
    let n = f.ground_size();
    check_cube(x, n)?;
    let mut ev = f.evaluator();
    let mut support: Vec<(usize, f64)> = Vec::new();
    for e in 0..n {
        if x[e] >= 1.0 - INTEGRAL_TOL {
            ev.add(e);
        } else if x[e] > INTEGRAL_TOL {
            support.push((e, x[e]));
        }
    }
    if support.len() > MAX_EXACT_SUPPORT {
        return Err(Error::SizeGuard {
            what: "fractional support of exact multilinear evaluation",
            limit: MAX_EXACT_SUPPORT,
            got: support.len(),
        });
    }

    fn recurse(
        ev: &mut impl SetEvaluator,
        support: &[(usize, f64)],
        idx: usize,
        prob: f64,
        acc: &mut f64,
    ) {
        if idx == support.len() {
            *acc += prob * ev.value();
            return;
        }
        let (e, xe) = support[idx];
        recurse(ev, support, idx + 1, prob * (1.0 - xe), acc);
        ev.add(e);
        recurse(ev, support, idx + 1, prob * xe, acc);
        ev.remove(e);
    }

    let mut acc = 0.0;
    recurse(&mut ev, &support, 0, 1.0, &mut acc);
    Ok(acc)
}

/// A Monte-Carlo estimate of the multilinear extension.
#[derive(Clone, Debug)]
pub struct MultilinearEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Estimates `F(x)` by sampling `R ~ D(x)` `samples` times. Deterministic
/// in `(x, samples, seed)`.
#[allow(clippy::needless_range_loop)]
pub fn multilinear_sample(
    f: &impl SetFunction,
    x: &[f64],
    samples: usize,
    seed: u64,
) -> Result<MultilinearEstimate> {
    let n = f.ground_size();
    check_cube(x, n)?;
    if samples == 0 {
        return Err(Error::InvalidParameter(
            "multilinear sampling needs at least one sample".into(),
        ));
    }
    let mut rng = seeding::new_rng(seed);
    let mut ev = f.evaluator();
    let mut stat = MeanStat::new();
    for _ in 0..samples {
        ev.clear();
        for e in 0..n {
            if rng.random::<f64>() < x[e] {
                ev.add(e);
            }
        }
        stat.push(ev.value());
    }
    Ok(MultilinearEstimate {
        value: stat.mean(),
        stderr: stat.stderr(),
        samples,
        seed,
    })
}

/// A sampled estimate of the multilinear gradient.
#[derive(Clone, Debug)]
pub struct GradientEstimate {
    /// `values[e]` estimates `∂F/∂x_e(x) = E[f(R ∪ e) - f(R \ e)]`.
    pub values: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
}

/// Estimates all partial derivatives of `F` at `x` with a coupled
/// estimator: each sampled `R` is shared across coordinates.
#[allow(clippy::needless_range_loop)]
pub fn gradient_estimate(
    f: &impl SetFunction,
    x: &[f64],
    samples: usize,
    seed: u64,
) -> Result<GradientEstimate> {
    let n = f.ground_size();
    check_cube(x, n)?;
    if samples == 0 {
        return Err(Error::InvalidParameter(
            "gradient estimation needs at least one sample".into(),
        ));
    }
    let mut rng = seeding::new_rng(seed);
    let mut ev = f.evaluator();
    let mut stats = vec![MeanStat::new(); n];
    for _ in 0..samples {
        ev.clear();
        for e in 0..n {
            if rng.random::<f64>() < x[e] {
                ev.add(e);
            }
        }
        for e in 0..n {
            stats[e].push(ev.toggle_gap(e));
        }
    }
    Ok(GradientEstimate {
        values: stats.iter().map(MeanStat::mean).collect(),
        stderrs: stats.iter().map(MeanStat::stderr).collect(),
        samples,
        seed,
    })
}

/// How [`check_submodular`] searches for violations.
#[derive(Clone, Copy, Debug)]
pub enum CheckMode {
    /// Every `(S, i, j)` triple; ground set limited to
    /// [`MAX_EXHAUSTIVE_CHECK`] elements.
    Exhaustive,
    /// `probes` random triples.
    Sampled { probes: usize },
}

/// A concrete diminishing-returns violation: adding `element` to
/// `superset` gains strictly more than adding it to `base ⊆ superset`.
#[derive(Clone, Debug)]
pub struct SubmodularityWitness {
    pub base: Vec<usize>,
    pub superset: Vec<usize>,
    pub element: usize,
    pub base_gain: f64,
    pub superset_gain: f64,
}

#[derive(Clone, Debug)]
pub struct SubmodularityCheck {
    pub passed: bool,
    pub witness: Option<SubmodularityWitness>,
    pub probes: usize,
}

/// Tests the diminishing-returns inequality
/// `f(S ∪ j) - f(S) >= f(S ∪ i ∪ j) - f(S ∪ i)` (tolerance 1e-9) either
/// exhaustively or on random triples. Deterministic in the seed.
#[allow(clippy::needless_range_loop)]
pub fn check_submodular(
    f: &impl SetFunction,
    mode: CheckMode,
    seed: u64,
) -> Result<SubmodularityCheck> {
    const TOL: f64 = 1e-9;
    let n = f.ground_size();
    let mut ev = f.evaluator();
    let mut probes = 0usize;

    let witness_from = |s: &ElementSet, i: usize, base_gain: f64, j: usize, sup_gain: f64| {
        let mut superset = s.clone();
        superset.insert(i);
        SubmodularityWitness {
            base: s.ids(),
            superset: superset.ids(),
            element: j,
            base_gain,
            superset_gain: sup_gain,
        }
    };

    match mode {
        CheckMode::Exhaustive => {
            if n > MAX_EXHAUSTIVE_CHECK {
                return Err(Error::SizeGuard {
                    what: "exhaustive submodularity check",
                    limit: MAX_EXHAUSTIVE_CHECK,
                    got: n,
                });
            }
            let mut base_gain = vec![0.0; n];
            for mask in 0u64..(1u64 << n) {
                let s = ElementSet::from_mask(n, mask);
                ev.clear();
                for e in s.iter() {
                    ev.add(e);
                }
                for j in 0..n {
                    if !s.contains(j) {
                        base_gain[j] = ev.add_gain(j);
                    }
                }
                for i in 0..n {
                    if s.contains(i) {
                        continue;
                    }
                    ev.add(i);
                    for j in 0..n {
                        if j == i || s.contains(j) {
                            continue;
                        }
                        probes += 1;
                        let sup_gain = ev.add_gain(j);
                        if base_gain[j] < sup_gain - TOL {
                            let witness = witness_from(&s, i, base_gain[j], j, sup_gain);
                            return Ok(SubmodularityCheck {
                                passed: false,
                                witness: Some(witness),
                                probes,
                            });
                        }
                    }
                    ev.remove(i);
                }
            }
        }
        CheckMode::Sampled { probes: budget } => {
            let mut rng = seeding::new_rng(seed);
            for _ in 0..budget {
                ev.clear();
                let mut s = ElementSet::empty(n);
                for e in 0..n {
                    if rng.random::<f64>() < 0.5 {
                        s.insert(e);
                        ev.add(e);
                    }
                }
                let outside: Vec<usize> = (0..n).filter(|&e| !s.contains(e)).collect();
                if outside.len() < 2 {
                    continue;
                }
                let i = outside[rng.random_range(0..outside.len())];
                let j = loop {
                    let j = outside[rng.random_range(0..outside.len())];
                    if j != i {
                        break j;
                    }
                };
                probes += 1;
                let base_gain = ev.add_gain(j);
                ev.add(i);
                let sup_gain = ev.add_gain(j);
                if base_gain < sup_gain - TOL {
                    let witness = witness_from(&s, i, base_gain, j, sup_gain);
                    return Ok(SubmodularityCheck {
                        passed: false,
                        witness: Some(witness),
                        probes,
                    });
                }
            }
        }
    }
    Ok(SubmodularityCheck {
        passed: true,
        witness: None,
        probes,
    })
}
