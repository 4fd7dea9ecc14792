//! A small dense two-phase simplex for linear programs over boxed
//! variables with a handful of inequality rows.
//!
//! The fair knapsack polytope has `n` box constraints but at most `2k + 1`
//! general rows (one budget row, one or two per group), so a dense
//! bounded-variable simplex with an explicitly refactored basis inverse is
//! exact enough and fast enough. Entering/leaving choices follow Bland's
//! rule, which makes the solver deterministic and immune to cycling.

use crate::error::{Error, Result};

const COST_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-11;
const FEAS_TOL: f64 = 1e-8;
const MAX_ITER: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Relation {
    Le,
    Ge,
}

/// `maximize c·x` subject to `rows` and `lb <= x <= ub`, all rows of the
/// form `a·x <= rhs` or `a·x >= rhs`.
pub(crate) struct DenseLp {
    pub n: usize,
    pub lb: Vec<f64>,
    pub ub: Vec<f64>,
    pub rows: Vec<(Vec<f64>, Relation, f64)>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum VarStatus {
    Basic(usize),
    AtLower,
    AtUpper,
}

struct Tableau {
    m: usize,
    ncols: usize,
    /// Column-major constraint matrix, `cols[j][i]` = row `i` coefficient.
    cols: Vec<Vec<f64>>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    b: Vec<f64>,
    status: Vec<VarStatus>,
    basis: Vec<usize>,
    binv: Vec<Vec<f64>>,
}

impl Tableau {
    /// Inverts the current basis matrix by Gauss-Jordan elimination with
    /// partial pivoting. The basis is tiny (`m <= 2k + 1`), so a fresh
    /// factorization per pivot is cheap and numerically self-correcting.
    #[allow(clippy::needless_range_loop)]
    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        let mut mat = vec![vec![0.0; 2 * m]; m];
        for (pos, &var) in self.basis.iter().enumerate() {
            for i in 0..m {
                mat[i][pos] = self.cols[var][i];
            }
        }
        for i in 0..m {
            mat[i][m + i] = 1.0;
        }
        for col in 0..m {
            let pivot_row = (col..m)
                .max_by(|&a, &b| mat[a][col].abs().partial_cmp(&mat[b][col].abs()).unwrap())
                .unwrap();
            if mat[pivot_row][col].abs() < 1e-12 {
                return Err(Error::Internal("singular simplex basis".into()));
            }
            mat.swap(col, pivot_row);
            let pivot = mat[col][col];
            for v in mat[col].iter_mut() {
                *v /= pivot;
            }
            for row in 0..m {
                if row != col {
                    let factor = mat[row][col];
                    if factor != 0.0 {
                        for j in 0..2 * m {
                            mat[row][j] -= factor * mat[col][j];
                        }
                    }
                }
            }
        }
        for i in 0..m {
            for j in 0..m {
                self.binv[i][j] = mat[i][m + j];
            }
        }
        Ok(())
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.status[j] {
            VarStatus::AtLower => self.lb[j],
            VarStatus::AtUpper => self.ub[j],
            VarStatus::Basic(_) => unreachable!(),
        }
    }

    /// Basic variable values implied by the nonbasic assignment.
    #[allow(clippy::needless_range_loop)]
    fn basic_values(&self) -> Vec<f64> {
        let m = self.m;
        let mut rhs = self.b.clone();
        for j in 0..self.ncols {
            if let VarStatus::Basic(_) = self.status[j] {
                continue;
            }
            let v = self.nonbasic_value(j);
            if v != 0.0 {
                for i in 0..m {
                    rhs[i] -= self.cols[j][i] * v;
                }
            }
        }
        (0..m)
            .map(|i| (0..m).map(|t| self.binv[i][t] * rhs[t]).sum())
            .collect()
    }

    /// Runs the primal simplex to optimality for objective `c` (length
    /// `ncols`), maximizing.
    #[allow(clippy::needless_range_loop)]
    fn optimize(&mut self, c: &[f64]) -> Result<()> {
        for _ in 0..MAX_ITER {
            let xb = self.basic_values();

            // Simplex multipliers y = c_B B^-1, reduced costs for nonbasics.
            let m = self.m;
            let mut y = vec![0.0; m];
            for (pos, &var) in self.basis.iter().enumerate() {
                if c[var] != 0.0 {
                    for j in 0..m {
                        y[j] += c[var] * self.binv[pos][j];
                    }
                }
            }

            // Entering variable: Bland's rule, smallest eligible index.
            let mut entering = None;
            for j in 0..self.ncols {
                if matches!(self.status[j], VarStatus::Basic(_)) || self.lb[j] == self.ub[j] {
                    continue;
                }
                let reduced = c[j] - y.iter().zip(&self.cols[j]).map(|(a, b)| a * b).sum::<f64>();
                let eligible = match self.status[j] {
                    VarStatus::AtLower => reduced > COST_TOL,
                    VarStatus::AtUpper => reduced < -COST_TOL,
                    VarStatus::Basic(_) => false,
                };
                if eligible {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else {
                return Ok(());
            };
            let dir: f64 = match self.status[j] {
                VarStatus::AtLower => 1.0,
                VarStatus::AtUpper => -1.0,
                VarStatus::Basic(_) => unreachable!(),
            };

            // Rate of change of each basic variable per unit step of the
            // entering variable.
            let d: Vec<f64> = (0..m)
                .map(|i| (0..m).map(|t| self.binv[i][t] * self.cols[j][t]).sum())
                .collect();

            let mut t_star = self.ub[j] - self.lb[j]; // entering's own span
            let mut leaving: Option<(usize, VarStatus)> = None;
            for i in 0..m {
                let delta = -dir * d[i];
                if delta > PIVOT_TOL {
                    if self.ub[self.basis[i]].is_finite() {
                        let t = (self.ub[self.basis[i]] - xb[i]) / delta;
                        if t < t_star - PIVOT_TOL
                            || (t < t_star + PIVOT_TOL
                                && leaving.is_some_and(|(li, _)| self.basis[i] < self.basis[li]))
                        {
                            t_star = t.max(0.0);
                            leaving = Some((i, VarStatus::AtUpper));
                        }
                    }
                } else if delta < -PIVOT_TOL {
                    let t = (xb[i] - self.lb[self.basis[i]]) / -delta;
                    if t < t_star - PIVOT_TOL
                        || (t < t_star + PIVOT_TOL
                            && leaving.is_some_and(|(li, _)| self.basis[i] < self.basis[li]))
                    {
                        t_star = t.max(0.0);
                        leaving = Some((i, VarStatus::AtLower));
                    }
                }
            }

            match leaving {
                None => {
                    if !t_star.is_finite() {
                        return Err(Error::Internal(
                            "simplex direction unbounded on a bounded polytope".into(),
                        ));
                    }
                    // Bound flip: the entering variable crosses its span.
                    self.status[j] = match self.status[j] {
                        VarStatus::AtLower => VarStatus::AtUpper,
                        VarStatus::AtUpper => VarStatus::AtLower,
                        VarStatus::Basic(_) => unreachable!(),
                    };
                }
                Some((row, exit_to)) => {
                    let out = self.basis[row];
                    self.status[out] = exit_to;
                    self.basis[row] = j;
                    self.status[j] = VarStatus::Basic(row);
                    self.refactor()?;
                }
            }
        }
        Err(Error::Internal("simplex iteration limit exceeded".into()))
    }

    /// Current values of all variables.
    fn values(&self) -> Vec<f64> {
        let xb = self.basic_values();
        (0..self.ncols)
            .map(|j| match self.status[j] {
                VarStatus::Basic(row) => xb[row],
                _ => self.nonbasic_value(j),
            })
            .collect()
    }
}

impl DenseLp {
    /// Solves the program, returning structural variable values and the
    /// objective. Errors with [`Error::Infeasible`] when no point
    /// satisfies the constraints.
    pub(crate) fn maximize(&self, c: &[f64]) -> Result<(Vec<f64>, f64)> {
        debug_assert_eq!(c.len(), self.n);
        let m = self.rows.len();
        let mut cols: Vec<Vec<f64>> = (0..self.n)
            .map(|j| self.rows.iter().map(|(a, _, _)| a[j]).collect())
            .collect();
        let mut lb = self.lb.clone();
        let mut ub = self.ub.clone();
        let b: Vec<f64> = self.rows.iter().map(|(_, _, rhs)| *rhs).collect();

        // One slack per row: +1 for <=, -1 for >=.
        for (i, (_, rel, _)) in self.rows.iter().enumerate() {
            let mut col = vec![0.0; m];
            col[i] = match rel {
                Relation::Le => 1.0,
                Relation::Ge => -1.0,
            };
            cols.push(col);
            lb.push(0.0);
            ub.push(f64::INFINITY);
        }

        // Initial point: structurals at lower bound, slacks basic where
        // that is feasible, otherwise a phase-1 artificial carries the row.
        let mut status = vec![VarStatus::AtLower; self.n + m];
        let mut basis = Vec::with_capacity(m);
        let mut artificials = Vec::new();
        for i in 0..m {
            let residual: f64 = b[i]
                - (0..self.n)
                    .map(|j| self.rows[i].0[j] * self.lb[j])
                    .sum::<f64>();
            let slack_value = match self.rows[i].1 {
                Relation::Le => residual,
                Relation::Ge => -residual,
            };
            if slack_value >= 0.0 {
                basis.push(self.n + i);
            } else {
                let mut col = vec![0.0; m];
                col[i] = residual.signum();
                cols.push(col);
                lb.push(0.0);
                ub.push(f64::INFINITY);
                status.push(VarStatus::AtLower);
                artificials.push(cols.len() - 1);
                basis.push(cols.len() - 1);
            }
        }
        let ncols = cols.len();
        for (pos, &var) in basis.iter().enumerate() {
            status[var] = VarStatus::Basic(pos);
        }

        let mut tab = Tableau {
            m,
            ncols,
            cols,
            lb,
            ub,
            b,
            status,
            basis,
            binv: vec![vec![0.0; m]; m],
        };
        tab.refactor()?;

        if !artificials.is_empty() {
            let mut phase1 = vec![0.0; ncols];
            for &a in &artificials {
                phase1[a] = -1.0;
            }
            tab.optimize(&phase1)?;
            let values = tab.values();
            let infeasibility: f64 = artificials.iter().map(|&a| values[a]).sum();
            if infeasibility > FEAS_TOL {
                return Err(Error::Infeasible(format!(
                    "linear program infeasible (phase-1 residual {infeasibility:.3e})"
                )));
            }
            // Pin artificials at zero for phase 2.
            for &a in &artificials {
                tab.lb[a] = 0.0;
                tab.ub[a] = 0.0;
            }
        }

        let mut full_c = vec![0.0; ncols];
        full_c[..self.n].copy_from_slice(c);
        tab.optimize(&full_c)?;

        let values = tab.values();
        let mut x: Vec<f64> = values[..self.n].to_vec();
        for (j, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lb[j], self.ub[j]);
        }
        let objective = x.iter().zip(c).map(|(a, b)| a * b).sum();
        Ok((x, objective))
    }
}
