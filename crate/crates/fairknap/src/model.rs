//! Problem instances: ground elements, fairness bounds, budget, objective.
//!
//! An instance asks for a subset `S` maximizing its objective subject to
//! `w(S) <= B` and, per color group `G_i`, `l_i < |S ∩ G_i| <= u_i`. The
//! strict integer lower bound is used everywhere as `|S ∩ G_i| >= l_i + 1`;
//! an absent `l_i` means the group has no lower bound.

use std::ops::Deref;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding;
use crate::set::ElementSet;
use crate::submodular::Objective;

/// Absolute tolerance for all feasibility comparisons.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// One ground element.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Element {
    /// Stable ordinal index; must equal the element's position, `0..n`.
    pub id: usize,
    pub weight: f64,
    /// Group index in `1..=k`.
    pub color: usize,
}

/// The fairness interval `(lower, upper]` for one color group.
/// `lower: None` means the group has no lower bound.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GroupBound {
    pub color: usize,
    pub lower: Option<usize>,
    pub upper: usize,
}

impl GroupBound {
    /// Minimum admissible count: `lower + 1`, or 0 without a lower bound.
    pub fn min_count(&self) -> usize {
        self.lower.map_or(0, |l| l + 1)
    }
}

/// A full problem instance. The file representation uses the same field
/// names, with the bounds list stored under `groups`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Instance {
    pub elements: Vec<Element>,
    #[serde(rename = "groups")]
    pub bounds: Vec<GroupBound>,
    pub budget: f64,
    pub objective: Objective,
}

/// An integral solution as a sorted list of selected element ids.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Default)]
pub struct IntegralSolution {
    pub selected: Vec<usize>,
}

impl IntegralSolution {
    pub fn from_set(set: &ElementSet) -> Self {
        IntegralSolution {
            selected: set.ids(),
        }
    }

    pub fn to_set(&self, n: usize) -> Result<ElementSet> {
        ElementSet::from_ids(n, &self.selected)
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }
}

/// A point in `[0, 1]^n`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(transparent)]
pub struct FractionalVector(pub Vec<f64>);

impl Deref for FractionalVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for FractionalVector {
    fn from(coords: Vec<f64>) -> Self {
        FractionalVector(coords)
    }
}

impl FractionalVector {
    pub fn zeros(n: usize) -> Self {
        FractionalVector(vec![0.0; n])
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        self.0.iter().zip(other).map(|(a, b)| a * b).sum()
    }

    /// Coordinate sums per color group, indexed `color - 1`.
    pub fn group_sums(&self, instance: &Instance) -> Vec<f64> {
        let mut sums = vec![0.0; instance.k()];
        for (e, &v) in self.0.iter().enumerate() {
            sums[instance.elements[e].color - 1] += v;
        }
        sums
    }

    /// Ids of coordinates strictly between `tol` and `1 - tol`.
    pub fn fractional_ids(&self, tol: f64) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > tol && v < 1.0 - tol)
            .map(|(e, _)| e)
            .collect()
    }
}

impl Instance {
    pub fn n(&self) -> usize {
        self.elements.len()
    }

    /// Number of color groups.
    pub fn k(&self) -> usize {
        self.bounds.len()
    }

    pub fn weight(&self, e: usize) -> f64 {
        self.elements[e].weight
    }

    pub fn weights(&self) -> Vec<f64> {
        self.elements.iter().map(|e| e.weight).collect()
    }

    pub fn color_of(&self, e: usize) -> usize {
        self.elements[e].color
    }

    /// Member ids per group, indexed `color - 1`.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.k()];
        for el in &self.elements {
            groups[el.color - 1].push(el.id);
        }
        groups
    }

    /// Group members sorted by ascending weight, ties by ascending id.
    pub fn group_sorted_by_weight(&self, color: usize) -> Vec<usize> {
        let mut members: Vec<usize> = self
            .elements
            .iter()
            .filter(|el| el.color == color)
            .map(|el| el.id)
            .collect();
        members.sort_by(|&a, &b| {
            self.weight(a)
                .partial_cmp(&self.weight(b))
                .unwrap()
                .then(a.cmp(&b))
        });
        members
    }

    pub fn weight_of(&self, set: &ElementSet) -> f64 {
        set.iter().map(|e| self.weight(e)).sum()
    }

    /// `|S ∩ G_i|` per group, indexed `color - 1`.
    pub fn group_counts(&self, set: &ElementSet) -> Vec<usize> {
        let mut counts = vec![0; self.k()];
        for e in set.iter() {
            counts[self.color_of(e) - 1] += 1;
        }
        counts
    }

    /// Weight of the cheapest set meeting every group lower bound.
    pub fn min_fill_weight(&self) -> f64 {
        self.bounds
            .iter()
            .map(|b| {
                let need = b.min_count();
                self.group_sorted_by_weight(b.color)
                    .iter()
                    .take(need)
                    .map(|&e| self.weight(e))
                    .sum::<f64>()
            })
            .sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Instance> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Instance> {
        let text = std::fs::read_to_string(path)?;
        Instance::from_json(&text)
    }
}

/// Severity of a validation finding.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum FindingKind {
    /// The instance is malformed (bad ids, colors, bounds, payload).
    Structural,
    /// The instance is well-formed but admits no feasible set.
    Infeasible,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Finding {
    pub kind: FindingKind,
    pub message: String,
}

/// The outcome of [`validate`]: empty findings means valid and feasible.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Default)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn has_structural(&self) -> bool {
        self.findings
            .iter()
            .any(|f| f.kind == FindingKind::Structural)
    }

    pub fn has_infeasible(&self) -> bool {
        self.findings
            .iter()
            .any(|f| f.kind == FindingKind::Infeasible)
    }

    fn push(&mut self, kind: FindingKind, message: String) {
        self.findings.push(Finding { kind, message });
    }
}

/// Checks structural invariants and overall feasibility.
///
/// Structural: ids are `0..n` in order; weights and budget finite and
/// non-negative; bound colors are exactly `1..=k` with every element's
/// color declared and every declared color inhabited; `0 <= l < u <= |G|`
/// where a lower bound is present, `u <= |G|` always; objective payload
/// shaped for `n` elements. Feasibility: the cheapest lower-bound fill
/// (the `l_i + 1` smallest-weight members per bounded group) fits the
/// budget — that fill is feasible iff any set is.
pub fn validate(instance: &Instance) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = instance.n();

    for (pos, el) in instance.elements.iter().enumerate() {
        if el.id != pos {
            report.push(
                FindingKind::Structural,
                format!(
                    "element at position {pos} has id {}; ids must be 0..n in order",
                    el.id
                ),
            );
        }
        if !el.weight.is_finite() || el.weight < 0.0 {
            report.push(
                FindingKind::Structural,
                format!(
                    "element {} has weight {}; must be finite and >= 0",
                    el.id, el.weight
                ),
            );
        }
    }

    if !instance.budget.is_finite() || instance.budget < 0.0 {
        report.push(
            FindingKind::Structural,
            format!("budget {} must be finite and >= 0", instance.budget),
        );
    }

    let k = instance.k();
    let mut colors_ok = true;
    for (i, bound) in instance.bounds.iter().enumerate() {
        if bound.color != i + 1 {
            report.push(
                FindingKind::Structural,
                format!(
                    "bound at position {i} is for color {}; bounds must list colors 1..=k in order",
                    bound.color
                ),
            );
            colors_ok = false;
        }
    }

    for el in &instance.elements {
        if el.color == 0 || el.color > k {
            report.push(
                FindingKind::Structural,
                format!(
                    "element {} has color {} but no bound is declared for it",
                    el.id, el.color
                ),
            );
            colors_ok = false;
        }
    }

    if colors_ok {
        let groups = instance.groups();
        for bound in &instance.bounds {
            let size = groups[bound.color - 1].len();
            if size == 0 {
                report.push(
                    FindingKind::Structural,
                    format!("no elements carry color {}", bound.color),
                );
            }
            if bound.upper > size {
                report.push(
                    FindingKind::Structural,
                    format!(
                        "color {} has upper bound {} but only {size} members",
                        bound.color, bound.upper
                    ),
                );
            }
            if let Some(l) = bound.lower {
                if l >= bound.upper {
                    report.push(
                        FindingKind::Structural,
                        format!(
                            "color {} has lower bound {l} >= upper bound {}; the interval (l, u] is empty",
                            bound.color, bound.upper
                        ),
                    );
                }
            }
        }
    }

    for message in instance.objective.payload_findings(n) {
        report.push(FindingKind::Structural, message);
    }

    if !report.has_structural() {
        let fill = instance.min_fill_weight();
        if fill > instance.budget + FEASIBILITY_TOL {
            report.push(
                FindingKind::Infeasible,
                format!(
                    "cheapest lower-bound fill weighs {fill}, over the budget {}",
                    instance.budget
                ),
            );
        }
    }

    report
}

/// Integral feasibility: `w(S) <= B` (tolerance [`FEASIBILITY_TOL`]) and
/// every group count inside its `(l, u]` interval.
pub fn is_feasible(instance: &Instance, set: &ElementSet) -> bool {
    if instance.weight_of(set) > instance.budget + FEASIBILITY_TOL {
        return false;
    }
    let counts = instance.group_counts(set);
    instance.bounds.iter().all(|b| {
        let c = counts[b.color - 1];
        c >= b.min_count() && c <= b.upper
    })
}

/// Membership in the fractional relaxation: coordinates in
/// `[-tol, 1 + tol]`, `w·x <= B + tol`, and per-group coordinate sums in
/// `[l_i + 1 - tol, u_i + tol]` (no lower constraint where `l` is absent).
///
/// Returns `false` (rather than erroring) on a length mismatch.
pub fn in_polytope(instance: &Instance, x: &FractionalVector, tol: f64) -> bool {
    if x.len() != instance.n() {
        return false;
    }
    if x.iter()
        .any(|&v| !v.is_finite() || v < -tol || v > 1.0 + tol)
    {
        return false;
    }
    let weight: f64 = x
        .iter()
        .enumerate()
        .map(|(e, &v)| instance.weight(e) * v)
        .sum();
    if weight > instance.budget + tol {
        return false;
    }
    let sums = x.group_sums(instance);
    instance.bounds.iter().all(|b| {
        let s = sums[b.color - 1];
        s <= b.upper as f64 + tol && b.lower.is_none_or(|l| s >= (l + 1) as f64 - tol)
    })
}

/// Which objective family the generator should attach.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    Coverage,
    Modular,
    Saturating,
}

/// Knobs for the random instance generator.
#[derive(Clone, Debug)]
pub struct GeneratorParams {
    pub n: usize,
    pub k: usize,
    /// Weights are drawn uniformly from this positive range.
    pub weight_range: (f64, f64),
    /// 0 = loose intervals, 1 = forces `l_i + 1 = u_i = |G_i|`.
    pub bound_tightness: f64,
    /// Budget = slack × (weight of a canonical per-group fill); slack >= 1
    /// guarantees feasibility.
    pub budget_slack: f64,
    pub objective: ObjectiveKind,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            n: 12,
            k: 2,
            weight_range: (0.5, 2.0),
            bound_tightness: 0.3,
            budget_slack: 1.6,
            objective: ObjectiveKind::Coverage,
        }
    }
}

/// Draws a random valid, feasible instance. Deterministic in
/// `(params, seed)`; resamples a bounded number of times if a draw comes
/// out infeasible (possible only with `budget_slack < 1`).
pub fn generate_random(params: &GeneratorParams, seed: u64) -> Result<Instance> {
    if params.k == 0 || params.n < params.k {
        return Err(Error::InvalidParameter(format!(
            "need n >= k >= 1, got n = {}, k = {}",
            params.n, params.k
        )));
    }
    let (w_lo, w_hi) = params.weight_range;
    if !(w_lo.is_finite() && w_hi.is_finite()) || w_lo <= 0.0 || w_hi < w_lo {
        return Err(Error::InvalidParameter(format!(
            "weight range ({w_lo}, {w_hi}) must satisfy 0 < lo <= hi"
        )));
    }
    if !(0.0..=1.0).contains(&params.bound_tightness) {
        return Err(Error::InvalidParameter(format!(
            "bound tightness {} must lie in [0, 1]",
            params.bound_tightness
        )));
    }
    if !params.budget_slack.is_finite() || params.budget_slack <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "budget slack {} must be positive",
            params.budget_slack
        )));
    }

    const ATTEMPTS: u64 = 64;
    for attempt in 0..ATTEMPTS {
        let instance = draw_instance(params, seeding::derive(seed, attempt));
        if validate(&instance).is_valid() {
            return Ok(instance);
        }
    }
    Err(Error::Infeasible(format!(
        "generator drew {ATTEMPTS} infeasible instances; budget slack {} is too small",
        params.budget_slack
    )))
}

fn draw_instance(params: &GeneratorParams, seed: u64) -> Instance {
    let mut rng = seeding::new_rng(seed);
    let (w_lo, w_hi) = params.weight_range;
    let t = params.bound_tightness;
    let n = params.n;
    let k = params.k;

    // Colors: one representative per group first, the rest uniform, so
    // every group is inhabited.
    let colors: Vec<usize> = (0..n)
        .map(|e| {
            if e < k {
                e + 1
            } else {
                rng.random_range(1..=k)
            }
        })
        .collect();
    let weights: Vec<f64> = (0..n)
        .map(|_| w_lo + rng.random::<f64>() * (w_hi - w_lo))
        .collect();

    let mut group_sizes = vec![0usize; k];
    for &c in &colors {
        group_sizes[c - 1] += 1;
    }

    // Interval per group: tightness 1 pins u = |G| and l = u - 1;
    // tightness 0 spreads both uniformly.
    let mut bounds = Vec::with_capacity(k);
    for (i, &size) in group_sizes.iter().enumerate() {
        let upper_span = ((1.0 - t) * (size as f64 - 1.0)).floor() as usize;
        let upper = size - rng.random_range(0..=upper_span);
        let lower = if rng.random::<f64>() < 0.5 + 0.5 * t {
            let lower_span = ((1.0 - t) * (upper as f64 - 1.0)).floor() as usize;
            Some(upper - 1 - rng.random_range(0..=lower_span))
        } else {
            None
        };
        bounds.push(GroupBound {
            color: i + 1,
            lower,
            upper,
        });
    }

    // Budget: slack times the weight of a canonical fill (the minimum
    // count where a lower bound exists, one element otherwise).
    let mut base_fill = 0.0;
    for bound in &bounds {
        let need = bound.lower.map_or(1, |l| l + 1);
        let mut members: Vec<f64> = colors
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == bound.color)
            .map(|(e, _)| weights[e])
            .collect();
        members.sort_by(|a, b| a.partial_cmp(b).unwrap());
        base_fill += members.iter().take(need).sum::<f64>();
    }
    let budget = params.budget_slack * base_fill;

    let objective = match params.objective {
        ObjectiveKind::Coverage => {
            let items = (3 * n / 2).max(3);
            let item_values: Vec<f64> = (0..items).map(|_| 0.5 + rng.random::<f64>()).collect();
            let cover_sets: Vec<Vec<usize>> = (0..n)
                .map(|_| {
                    let size = rng.random_range(1..=3usize.min(items));
                    let mut cover = Vec::with_capacity(size);
                    while cover.len() < size {
                        let item = rng.random_range(0..items);
                        if !cover.contains(&item) {
                            cover.push(item);
                        }
                    }
                    cover.sort_unstable();
                    cover
                })
                .collect();
            Objective::Coverage {
                item_values,
                cover_sets,
            }
        }
        ObjectiveKind::Modular => Objective::Modular {
            values: (0..n).map(|_| 0.5 + 1.5 * rng.random::<f64>()).collect(),
        },
        ObjectiveKind::Saturating => {
            let values: Vec<f64> = (0..n).map(|_| 0.5 + 1.5 * rng.random::<f64>()).collect();
            let cap = 0.6 * values.iter().sum::<f64>();
            Objective::Saturating { values, cap }
        }
    };

    let elements = (0..n)
        .map(|id| Element {
            id,
            weight: weights[id],
            color: colors[id],
        })
        .collect();

    Instance {
        elements,
        bounds,
        budget,
        objective,
    }
}
