//! Linear programming backend contract and a dense revised simplex.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LpError {
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex iteration limit reached")]
    IterationLimit,
    #[error("singular basis")]
    Singular,
}

/// Optimal solution of the current restricted problem.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub objective: f64,
    /// Values of the structural columns, in insertion order.
    pub primal: Vec<f64>,
    /// One dual value per row.
    pub duals: Vec<f64>,
    /// Sum of the artificial variables; positive means the rows are infeasible.
    pub infeasibility: f64,
}

/// Minimization LP over nonnegative columns, built incrementally.
pub trait LpBackend {
    /// Adds a row with coefficients on existing structural columns.
    fn add_row(&mut self, coefs: &[(usize, f64)], sense: Sense, rhs: f64) -> usize;
    /// Adds a structural column with coefficients on existing rows.
    fn add_column(&mut self, cost: f64, coefs: &[(usize, f64)]) -> usize;
    /// Fixes the upper bound of a structural column to zero or lifts it.
    fn set_fixed_to_zero(&mut self, column: usize, fixed: bool);
    fn solve(&mut self) -> Result<LpSolution, LpError>;
    fn row_count(&self) -> usize;
    fn column_count(&self) -> usize;
}

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarKind {
    Structural(usize),
    Slack,
    Artificial,
}

#[derive(Debug, Clone)]
struct Var {
    cost: f64,
    entries: Vec<(usize, f64)>,
    kind: VarKind,
    fixed: bool,
}

/// Dense revised simplex with an explicit basis inverse. Every row carries an
/// artificial variable priced at `big_m`, so the problem is always feasible and
/// rows or columns can be added without losing the current basis.
#[derive(Debug, Clone)]
pub struct DenseSimplex {
    big_m: f64,
    vars: Vec<Var>,
    structural: Vec<usize>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    /// Row-major `m × m` basis inverse.
    inv: Vec<f64>,
    xb: Vec<f64>,
    pivots_since_refactor: usize,
    pub max_iterations: usize,
}

impl DenseSimplex {
    pub fn new(big_m: f64) -> Self {
        Self {
            big_m,
            vars: Vec::new(),
            structural: Vec::new(),
            rhs: Vec::new(),
            basis: Vec::new(),
            inv: Vec::new(),
            xb: Vec::new(),
            pivots_since_refactor: 0,
            max_iterations: 1_000_000,
        }
    }

    fn m(&self) -> usize {
        self.rhs.len()
    }

    fn row_activity(&self, row: usize) -> f64 {
        self.basis
            .iter()
            .zip(&self.xb)
            .map(|(&v, &x)| x * self.vars[v].entries.iter().find(|e| e.0 == row).map_or(0.0, |e| e.1))
            .sum()
    }

    /// `B⁻¹ a` for a sparse column.
    fn ftran(&self, entries: &[(usize, f64)]) -> Vec<f64> {
        let m = self.m();
        let mut out = vec![0.0; m];
        for &(r, a) in entries {
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.inv[i * m + r] * a;
            }
        }
        out
    }

    fn duals(&self) -> Vec<f64> {
        let m = self.m();
        let mut y = vec![0.0; m];
        for (i, &v) in self.basis.iter().enumerate() {
            let c = self.vars[v].cost;
            if c != 0.0 {
                for (j, yj) in y.iter_mut().enumerate() {
                    *yj += c * self.inv[i * m + j];
                }
            }
        }
        y
    }

    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m();
        let mut a = vec![0.0; m * m];
        for (i, &v) in self.basis.iter().enumerate() {
            for &(r, c) in &self.vars[v].entries {
                a[r * m + i] = c;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let p = (col..m)
                .max_by(|&x, &y| a[x * m + col].abs().total_cmp(&a[y * m + col].abs()))
                .ok_or(LpError::Singular)?;
            if a[p * m + col].abs() < 1e-12 {
                return Err(LpError::Singular);
            }
            if p != col {
                for k in 0..m {
                    a.swap(p * m + k, col * m + k);
                    inv.swap(p * m + k, col * m + k);
                }
            }
            let d = a[col * m + col];
            for k in 0..m {
                a[col * m + k] /= d;
                inv[col * m + k] /= d;
            }
            for r in 0..m {
                if r != col {
                    let f = a[r * m + col];
                    if f != 0.0 {
                        for k in 0..m {
                            a[r * m + k] -= f * a[col * m + k];
                            inv[r * m + k] -= f * inv[col * m + k];
                        }
                    }
                }
            }
        }
        self.inv = inv;
        let mut xb = vec![0.0; m];
        for (i, x) in xb.iter_mut().enumerate() {
            *x = (0..m).map(|j| self.inv[i * m + j] * self.rhs[j]).sum::<f64>().max(0.0);
        }
        self.xb = xb;
        self.pivots_since_refactor = 0;
        Ok(())
    }

    fn pivot(&mut self, row: usize, entering: usize, u: &[f64]) {
        let m = self.m();
        let p = u[row];
        let theta = self.xb[row] / p;
        for i in 0..m {
            if i != row {
                self.xb[i] = (self.xb[i] - theta * u[i]).max(0.0);
            }
        }
        self.xb[row] = theta.max(0.0);
        let prow: Vec<f64> = (0..m).map(|k| self.inv[row * m + k] / p).collect();
        for i in 0..m {
            if i != row && u[i] != 0.0 {
                let f = u[i];
                for k in 0..m {
                    self.inv[i * m + k] -= f * prow[k];
                }
            }
        }
        self.inv[row * m..(row + 1) * m].copy_from_slice(&prow);
        self.basis[row] = entering;
        self.pivots_since_refactor += 1;
    }
}

impl LpBackend for DenseSimplex {
    fn add_row(&mut self, coefs: &[(usize, f64)], sense: Sense, rhs: f64) -> usize {
        let row = self.m();
        for &(j, a) in coefs {
            if a != 0.0 {
                self.vars[self.structural[j]].entries.push((row, a));
            }
        }
        self.rhs.push(rhs);
        let value = rhs - self.row_activity(row);
        let mut basic = None;
        if sense != Sense::Eq {
            let sign = if sense == Sense::Le { 1.0 } else { -1.0 };
            self.vars.push(Var { cost: 0.0, entries: vec![(row, sign)], kind: VarKind::Slack, fixed: false });
            if value * sign >= 0.0 {
                basic = Some((self.vars.len() - 1, sign));
            }
        }
        let sign = if value >= 0.0 { 1.0 } else { -1.0 };
        self.vars.push(Var { cost: self.big_m, entries: vec![(row, sign)], kind: VarKind::Artificial, fixed: false });
        let (var, e) = basic.unwrap_or((self.vars.len() - 1, sign));
        // New basis inverse [[B⁻¹, 0], [-r_B B⁻¹ / e, 1 / e]].
        let m = row + 1;
        let r_b: Vec<f64> = self
            .basis
            .iter()
            .map(|&v| self.vars[v].entries.iter().find(|x| x.0 == row).map_or(0.0, |x| x.1))
            .collect();
        let mut inv = vec![0.0; m * m];
        for i in 0..row {
            inv[i * m..i * m + row].copy_from_slice(&self.inv[i * row..(i + 1) * row]);
        }
        for k in 0..row {
            let s: f64 = (0..row).map(|i| r_b[i] * self.inv[i * row + k]).sum();
            inv[row * m + k] = -s / e;
        }
        inv[row * m + row] = 1.0 / e;
        self.inv = inv;
        self.basis.push(var);
        self.xb.push(value / e);
        row
    }

    fn add_column(&mut self, cost: f64, coefs: &[(usize, f64)]) -> usize {
        let j = self.structural.len();
        let entries = coefs.iter().copied().filter(|e| e.1 != 0.0).collect();
        self.vars.push(Var { cost, entries, kind: VarKind::Structural(j), fixed: false });
        self.structural.push(self.vars.len() - 1);
        j
    }

    fn set_fixed_to_zero(&mut self, column: usize, fixed: bool) {
        let v = self.structural[column];
        self.vars[v].fixed = fixed;
    }

    fn solve(&mut self) -> Result<LpSolution, LpError> {
        let m = self.m();
        let mut in_basis = vec![false; self.vars.len()];
        for &v in &self.basis {
            in_basis[v] = true;
        }
        // Fixed basic columns are driven out by pricing them at big M.
        let mut saved = Vec::new();
        for (v, var) in self.vars.iter_mut().enumerate() {
            if var.fixed && in_basis[v] {
                saved.push((v, var.cost));
                var.cost = self.big_m;
            }
        }
        let mut degenerate = 0usize;
        let mut iterations = 0usize;
        let result = loop {
            if iterations >= self.max_iterations {
                break Err(LpError::IterationLimit);
            }
            iterations += 1;
            if self.pivots_since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            let y = self.duals();
            let bland = degenerate > 50;
            let mut entering: Option<(usize, f64)> = None;
            for (v, var) in self.vars.iter().enumerate() {
                if in_basis[v] || var.fixed {
                    continue;
                }
                let d = var.cost - var.entries.iter().map(|&(r, a)| y[r] * a).sum::<f64>();
                if d < -COST_TOL * (1.0 + var.cost.abs()) {
                    if bland {
                        entering = Some((v, d));
                        break;
                    }
                    if entering.is_none_or(|(_, best)| d < best) {
                        entering = Some((v, d));
                    }
                }
            }
            let Some((enter, _)) = entering else { break Ok(()) };
            let u = self.ftran(&self.vars[enter].entries);
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                if u[i] > PIVOT_TOL {
                    let ratio = self.xb[i] / u[i];
                    let better = match leave {
                        None => true,
                        Some((l, best)) => {
                            ratio < best - 1e-12
                                || (ratio <= best + 1e-12
                                    && if bland { self.basis[i] < self.basis[l] } else { u[i] > u[l] })
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((row, ratio)) = leave else { break Err(LpError::Unbounded) };
            if ratio <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            in_basis[self.basis[row]] = false;
            in_basis[enter] = true;
            self.pivot(row, enter, &u);
        };
        for (v, c) in saved {
            self.vars[v].cost = c;
        }
        result?;
        self.refactor()?;
        let duals = self.duals();
        let mut primal = vec![0.0; self.structural.len()];
        let mut objective = 0.0;
        let mut infeasibility = 0.0;
        for (&v, &x) in self.basis.iter().zip(&self.xb) {
            match self.vars[v].kind {
                VarKind::Structural(j) => {
                    primal[j] = x;
                    objective += self.vars[v].cost * x;
                }
                VarKind::Artificial => infeasibility += x,
                VarKind::Slack => {}
            }
        }
        Ok(LpSolution { objective, primal, duals, infeasibility })
    }

    fn row_count(&self) -> usize {
        self.m()
    }

    fn column_count(&self) -> usize {
        self.structural.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lp_with_duals() {
        // min x + 2y  s.t. x + y >= 2, x <= 1.5
        let mut lp = DenseSimplex::new(1e6);
        let x = lp.add_column(1.0, &[]);
        let y = lp.add_column(2.0, &[]);
        lp.add_row(&[(x, 1.0), (y, 1.0)], Sense::Ge, 2.0);
        lp.add_row(&[(x, 1.0)], Sense::Le, 1.5);
        let s = lp.solve().unwrap();
        assert!((s.objective - 2.5).abs() < 1e-9);
        assert!((s.primal[0] - 1.5).abs() < 1e-9 && (s.primal[1] - 0.5).abs() < 1e-9);
        assert!((s.duals[0] - 2.0).abs() < 1e-9 && (s.duals[1] + 1.0).abs() < 1e-9);
        assert_eq!(s.infeasibility, 0.0);
    }

    #[test]
    fn warm_start_after_adding_columns_and_rows() {
        let mut lp = DenseSimplex::new(1e4);
        lp.add_row(&[], Sense::Eq, 1.0);
        let s = lp.solve().unwrap();
        assert!(s.infeasibility > 0.5);
        let a = lp.add_column(5.0, &[(0, 1.0)]);
        assert!((lp.solve().unwrap().objective - 5.0).abs() < 1e-9);
        let b = lp.add_column(3.0, &[(0, 1.0)]);
        assert!((lp.solve().unwrap().objective - 3.0).abs() < 1e-9);
        lp.add_row(&[(a, 1.0)], Sense::Ge, 0.5);
        let s = lp.solve().unwrap();
        assert!((s.objective - 4.0).abs() < 1e-9);
        assert!((s.primal[b] - 0.5).abs() < 1e-9);
        lp.set_fixed_to_zero(b, true);
        let s = lp.solve().unwrap();
        assert!((s.objective - 5.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_rows_keep_artificials() {
        let mut lp = DenseSimplex::new(1e3);
        let x = lp.add_column(1.0, &[]);
        lp.add_row(&[(x, 1.0)], Sense::Le, 1.0);
        lp.add_row(&[(x, 1.0)], Sense::Ge, 2.0);
        let s = lp.solve().unwrap();
        assert!(s.infeasibility > 0.5);
    }
}
