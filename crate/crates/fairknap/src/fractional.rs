//! Continuous greedy ascent over the fair knapsack polytope.
//!
//! The polytope `P` has one budget row, per-group sum intervals, and box
//! constraints. Linear maximization over `P` is solved exactly by a small
//! dense simplex ([`lp_max_over_polytope`]); the ascent
//! ([`continuous_greedy`]) repeatedly moves `1/T` of the way toward the
//! best linear direction under the sampled multilinear gradient, so its
//! output is an average of `T` polytope points and stays inside `P` even
//! with lower bounds (which break the usual down-closed shortcut).

use crate::error::{Error, Result};
use crate::lp::{DenseLp, Relation};
use crate::model::{FractionalVector, Instance};
use crate::seeding;
use crate::submodular::{self, SetFunction};

/// Tuning for [`continuous_greedy`].
#[derive(Clone, Debug)]
pub struct GreedyConfig {
    /// Ascent steps `T`; the output is the step-`T` iterate. `T >= ⌈1/ε⌉`
    /// recommended.
    pub steps: usize,
    /// Monte-Carlo samples per gradient estimate.
    pub samples_per_gradient: usize,
    pub seed: u64,
    /// Target slack of the `(1 - 1/e - ε)` fractional guarantee; purely
    /// advisory here (callers pick `steps` and budget scaling from it).
    pub epsilon: f64,
}

impl Default for GreedyConfig {
    fn default() -> Self {
        GreedyConfig {
            steps: 50,
            samples_per_gradient: 10_000,
            seed: 0,
            epsilon: 0.1,
        }
    }
}

impl GreedyConfig {
    pub fn with_seed(seed: u64) -> Self {
        GreedyConfig {
            seed,
            ..GreedyConfig::default()
        }
    }

    // `!(v > 0.0)` instead of `v <= 0.0`: the negated form also rejects NaN.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    fn check(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidParameter("greedy needs steps >= 1".into()));
        }
        if self.samples_per_gradient == 0 {
            return Err(Error::InvalidParameter(
                "greedy needs samples_per_gradient >= 1".into(),
            ));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParameter("epsilon must be > 0".into()));
        }
        Ok(())
    }
}

fn polytope_lp(instance: &Instance) -> DenseLp {
    let n = instance.n();
    let mut rows = Vec::with_capacity(2 * instance.k() + 1);
    rows.push((instance.weights(), Relation::Le, instance.budget));
    for bound in &instance.bounds {
        let indicator: Vec<f64> = (0..n)
            .map(|e| {
                if instance.color_of(e) == bound.color {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        rows.push((indicator.clone(), Relation::Le, bound.upper as f64));
        if let Some(l) = bound.lower {
            rows.push((indicator, Relation::Ge, (l + 1) as f64));
        }
    }
    DenseLp {
        n,
        lb: vec![0.0; n],
        ub: vec![1.0; n],
        rows,
    }
}

/// Exact maximization of `c·x` over the instance's fair knapsack polytope.
pub fn lp_max_over_polytope(instance: &Instance, c: &[f64]) -> Result<FractionalVector> {
    if c.len() != instance.n() {
        return Err(Error::DimensionMismatch {
            expected: instance.n(),
            got: c.len(),
        });
    }
    let (x, _) = polytope_lp(instance).maximize(c)?;
    Ok(FractionalVector(x))
}

/// Continuous greedy: from `x = 0`, take `T` steps `x += v_t / T` where
/// `v_t` maximizes the sampled gradient direction over the polytope.
/// Deterministic in the config seed (step `t` derives seed `(seed, t)`).
pub fn continuous_greedy(instance: &Instance, config: &GreedyConfig) -> Result<FractionalVector> {
    config.check()?;
    let n = instance.n();
    let steps = config.steps as f64;
    let mut x = vec![0.0; n];
    for step in 0..config.steps {
        let grad = submodular::gradient_estimate(
            &instance.objective,
            &x,
            config.samples_per_gradient,
            seeding::derive(config.seed, step as u64),
        )?;
        let v = lp_max_over_polytope(instance, &grad.values)?;
        for e in 0..n {
            x[e] += v[e] / steps;
        }
    }
    // Averaging T box-feasible points can overshoot by float dust only.
    for v in x.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    Ok(FractionalVector(x))
}

/// The centered second difference of `F` along `d = c_i e_i - c_j e_j`:
/// `F(x + h d) - 2 F(x) + F(x - h d)`, computed with exact multilinear
/// evaluation. Non-negative for submodular `f` (within 1e-9); identically
/// zero along a single coordinate (`c_j = 0`) by multilinearity.
// The negated comparisons in the guards also reject NaN parameters.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn second_difference_along_pair(
    f: &impl SetFunction,
    x: &[f64],
    i: usize,
    j: usize,
    c_i: f64,
    c_j: f64,
    h: f64,
) -> Result<f64> {
    let n = f.ground_size();
    for e in [i, j] {
        if e >= n {
            return Err(Error::UnknownElement { id: e, n });
        }
    }
    if i == j {
        return Err(Error::InvalidParameter(
            "second difference needs distinct coordinates (use c_j = 0 for a single-coordinate line)"
                .into(),
        ));
    }
    if !(c_i >= 0.0 && c_j >= 0.0) {
        return Err(Error::InvalidParameter(
            "direction coefficients must be >= 0".into(),
        ));
    }
    if !(h > 0.0) {
        return Err(Error::InvalidParameter("step size must be > 0".into()));
    }

    let probe = |sign: f64| -> Result<f64> {
        let mut p = x.to_vec();
        p[i] += sign * h * c_i;
        p[j] -= sign * h * c_j;
        for (index, v) in p.iter_mut().enumerate() {
            if *v < -1e-12 || *v > 1.0 + 1e-12 {
                return Err(Error::OutsideCube { index, value: *v });
            }
            *v = v.clamp(0.0, 1.0);
        }
        submodular::multilinear_exact(f, &p)
    };

    Ok(probe(1.0)? - 2.0 * submodular::multilinear_exact(f, x)? + probe(-1.0)?)
}
