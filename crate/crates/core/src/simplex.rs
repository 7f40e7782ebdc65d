//! Dense two-phase simplex for small linear programs.
//!
//! Minimizes `c·x` subject to `A x {≤, =, ≥} b`, `x ≥ 0`. Bland's rule
//! is used for both entering and leaving variables so degenerate problems
//! terminate; the programs solved here have at most a few hundred columns.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-12;
const COST_TOL: f64 = 1e-13;
const FEAS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<(usize, f64)>,
    relation: Relation,
    rhs: f64,
}

/// A linear program over non-negative variables.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    vars: usize,
    objective: Vec<f64>,
    rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub objective: f64,
    pub x: Vec<f64>,
    pub iterations: usize,
}

impl LinearProgram {
    pub fn new(vars: usize) -> Self {
        LinearProgram {
            vars,
            objective: vec![0.0; vars],
            rows: Vec::new(),
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn set_objective(&mut self, var: usize, coeff: f64) {
        self.objective[var] = coeff;
    }

    /// Adds `Σ coeff·x_var  relation  rhs`. Zero coefficients are dropped.
    pub fn add_constraint(&mut self, coeffs: &[(usize, f64)], relation: Relation, rhs: f64) {
        let coeffs = coeffs
            .iter()
            .copied()
            .filter(|&(v, c)| {
                assert!(v < self.vars, "variable index {v} out of range");
                c != 0.0
            })
            .collect();
        self.rows.push(Row {
            coeffs,
            relation,
            rhs,
        });
    }

    /// Adds `lo ≤ Σ coeff·x ≤ hi` as two rows.
    pub fn add_range(&mut self, coeffs: &[(usize, f64)], lo: f64, hi: f64) {
        self.add_constraint(coeffs, Relation::Ge, lo);
        self.add_constraint(coeffs, Relation::Le, hi);
    }

    /// Checks `x` against every row with absolute tolerance `tol`.
    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.vars || x.iter().any(|&v| v < -tol) {
            return false;
        }
        self.rows.iter().all(|row| {
            let lhs: f64 = row.coeffs.iter().map(|&(v, c)| c * x[v]).sum();
            match row.relation {
                Relation::Le => lhs <= row.rhs + tol,
                Relation::Ge => lhs >= row.rhs - tol,
                Relation::Eq => (lhs - row.rhs).abs() <= tol,
            }
        })
    }

    pub fn minimize(&self, max_iterations: usize) -> Result<LpSolution> {
        Tableau::build(self).solve(&self.objective, max_iterations)
    }
}

struct Tableau {
    /// `m` constraint rows followed by the objective row; last column is the rhs.
    cells: Vec<Vec<f64>>,
    basis: Vec<usize>,
    vars: usize,
    /// Columns `>= first_artificial` are artificial.
    first_artificial: usize,
    cols: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let m = lp.rows.len();
        let slack_count = lp
            .rows
            .iter()
            .filter(|r| r.relation != Relation::Eq)
            .count();
        let art_count = lp
            .rows
            .iter()
            .filter(|r| {
                let flip = r.rhs < 0.0;
                match r.relation {
                    Relation::Eq => true,
                    Relation::Le => flip,
                    Relation::Ge => !flip,
                }
            })
            .count();
        let first_artificial = lp.vars + slack_count;
        let cols = first_artificial + art_count;
        let mut cells = vec![vec![0.0; cols + 1]; m + 1];
        let mut basis = vec![0; m];
        let mut slack = lp.vars;
        let mut art = first_artificial;
        for (i, row) in lp.rows.iter().enumerate() {
            let sign = if row.rhs < 0.0 { -1.0 } else { 1.0 };
            for &(v, c) in &row.coeffs {
                cells[i][v] += sign * c;
            }
            cells[i][cols] = sign * row.rhs;
            let relation = match (row.relation, sign < 0.0) {
                (Relation::Le, true) => Relation::Ge,
                (Relation::Ge, true) => Relation::Le,
                (r, _) => r,
            };
            match relation {
                Relation::Le => {
                    cells[i][slack] = 1.0;
                    basis[i] = slack;
                    slack += 1;
                }
                Relation::Ge => {
                    cells[i][slack] = -1.0;
                    slack += 1;
                    cells[i][art] = 1.0;
                    basis[i] = art;
                    art += 1;
                }
                Relation::Eq => {
                    cells[i][art] = 1.0;
                    basis[i] = art;
                    art += 1;
                }
            }
        }
        Tableau {
            cells,
            basis,
            vars: lp.vars,
            first_artificial,
            cols,
        }
    }

    fn rows(&self) -> usize {
        self.basis.len()
    }

    /// Loads `cost` into the objective row as reduced costs for the current basis.
    fn load_objective(&mut self, cost: &[f64]) {
        let m = self.rows();
        let obj = &mut self.cells[m];
        obj.iter_mut().for_each(|v| *v = 0.0);
        obj[..cost.len()].copy_from_slice(cost);
        for i in 0..m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for j in 0..=self.cols {
                    self.cells[m][j] -= cb * self.cells[i][j];
                }
            }
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.cells[row][col];
        for v in self.cells[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.cells[row].clone();
        for (i, r) in self.cells.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let factor = r[col];
            if factor != 0.0 {
                for (v, pv) in r.iter_mut().zip(&pivot_row) {
                    *v -= factor * pv;
                }
                r[col] = 0.0;
            }
        }
        self.basis[row] = col;
    }

    /// Runs simplex iterations on the loaded objective over columns `< allowed`.
    fn iterate(&mut self, allowed: usize, budget: &mut usize, used: &mut usize) -> Result<()> {
        let m = self.rows();
        loop {
            let entering = (0..allowed).find(|&j| self.cells[m][j] < -COST_TOL);
            let Some(col) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                let a = self.cells[i][col];
                if a > PIVOT_TOL {
                    let ratio = self.cells[i][self.cols] / a;
                    let better = match leave {
                        None => true,
                        Some((r, best)) => {
                            ratio < best - 1e-15 * best.abs().max(1.0)
                                || (ratio <= best + 1e-15 * best.abs().max(1.0)
                                    && self.basis[i] < self.basis[r])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((row, _)) = leave else {
                return Err(Error::Numeric("linear program is unbounded".into()));
            };
            if *budget == 0 {
                return Err(Error::Numeric(format!(
                    "simplex iteration budget exhausted after {used} pivots"
                )));
            }
            *budget -= 1;
            *used += 1;
            self.pivot(row, col);
        }
    }

    fn solve(mut self, cost: &[f64], max_iterations: usize) -> Result<LpSolution> {
        let m = self.rows();
        let mut budget = max_iterations;
        let mut used = 0;
        if self.first_artificial < self.cols {
            let mut phase_one = vec![0.0; self.cols];
            phase_one[self.first_artificial..]
                .iter_mut()
                .for_each(|c| *c = 1.0);
            self.load_objective(&phase_one);
            self.iterate(self.cols, &mut budget, &mut used)?;
            let infeasibility = -self.cells[m][self.cols];
            let scale = 1.0
                + self.cells[..m]
                    .iter()
                    .map(|r| r[self.cols].abs())
                    .fold(0.0, f64::max);
            if infeasibility > FEAS_TOL * scale {
                return Err(Error::Infeasible(format!(
                    "phase one ended with residual {infeasibility:e}"
                )));
            }
            // drive remaining artificials out of the basis
            for i in 0..m {
                if self.basis[i] >= self.first_artificial {
                    let col = (0..self.first_artificial)
                        .filter(|&j| self.cells[i][j].abs() > PIVOT_TOL)
                        .max_by(|&a, &b| self.cells[i][a].abs().total_cmp(&self.cells[i][b].abs()));
                    if let Some(col) = col {
                        self.pivot(i, col);
                    }
                }
            }
        }
        let mut full_cost = vec![0.0; self.cols];
        full_cost[..cost.len()].copy_from_slice(cost);
        self.load_objective(&full_cost);
        self.iterate(self.first_artificial, &mut budget, &mut used)?;
        let mut x = vec![0.0; self.vars];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.vars {
                x[b] = self.cells[i][self.cols].max(0.0);
            }
        }
        let objective = cost.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpSolution {
            objective,
            x,
            iterations: used,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y  s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18  → 36 at (2, 6)
        let mut lp = LinearProgram::new(2);
        lp.set_objective(0, -3.0);
        lp.set_objective(1, -5.0);
        lp.add_constraint(&[(0, 1.0)], Relation::Le, 4.0);
        lp.add_constraint(&[(1, 2.0)], Relation::Le, 12.0);
        lp.add_constraint(&[(0, 3.0), (1, 2.0)], Relation::Le, 18.0);
        let sol = lp.minimize(100).unwrap();
        assert!((sol.objective + 36.0).abs() < 1e-12);
        assert!((sol.x[0] - 2.0).abs() < 1e-12);
        assert!((sol.x[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + 2y + 3z  s.t. x + y + z = 1, y ≥ 0.25, z - x ≥ -0.5
        let mut lp = LinearProgram::new(3);
        lp.set_objective(0, 1.0);
        lp.set_objective(1, 2.0);
        lp.set_objective(2, 3.0);
        lp.add_constraint(&[(0, 1.0), (1, 1.0), (2, 1.0)], Relation::Eq, 1.0);
        lp.add_constraint(&[(1, 1.0)], Relation::Ge, 0.25);
        lp.add_constraint(&[(2, 1.0), (0, -1.0)], Relation::Ge, -0.5);
        let sol = lp.minimize(100).unwrap();
        // x = 0.75 violates z - x ≥ -0.5 with z = 0, so z = 0.125, x = 0.625
        assert!((sol.objective - 1.5).abs() < 1e-12, "{sol:?}");
        assert!(lp.is_feasible(&sol.x, 1e-12));
    }

    #[test]
    fn infeasible_detected() {
        let mut lp = LinearProgram::new(1);
        lp.set_objective(0, 1.0);
        lp.add_constraint(&[(0, 1.0)], Relation::Le, 1.0);
        lp.add_constraint(&[(0, 1.0)], Relation::Ge, 2.0);
        assert!(matches!(lp.minimize(100), Err(Error::Infeasible(_))));
    }

    #[test]
    fn unbounded_detected() {
        let mut lp = LinearProgram::new(1);
        lp.set_objective(0, -1.0);
        lp.add_constraint(&[(0, 1.0)], Relation::Ge, 1.0);
        assert!(matches!(lp.minimize(100), Err(Error::Numeric(_))));
    }

    #[test]
    fn budget_exhaustion() {
        let mut lp = LinearProgram::new(2);
        lp.set_objective(0, -1.0);
        lp.set_objective(1, -1.0);
        lp.add_constraint(&[(0, 1.0), (1, 2.0)], Relation::Le, 4.0);
        lp.add_constraint(&[(0, 3.0), (1, 1.0)], Relation::Le, 6.0);
        assert!(matches!(lp.minimize(0), Err(Error::Numeric(_))));
        assert!(lp.minimize(10).is_ok());
    }

    #[test]
    fn degenerate_vertex_terminates() {
        // classic degenerate example; Bland's rule must not cycle
        let mut lp = LinearProgram::new(4);
        for (v, c) in [(0, -0.75), (1, 150.0), (2, -0.02), (3, 6.0)] {
            lp.set_objective(v, c);
        }
        lp.add_constraint(
            &[(0, 0.25), (1, -60.0), (2, -0.04), (3, 9.0)],
            Relation::Le,
            0.0,
        );
        lp.add_constraint(
            &[(0, 0.5), (1, -90.0), (2, -0.02), (3, 3.0)],
            Relation::Le,
            0.0,
        );
        lp.add_constraint(&[(2, 1.0)], Relation::Le, 1.0);
        let sol = lp.minimize(1000).unwrap();
        assert!((sol.objective + 0.05).abs() < 1e-12, "{sol:?}");
    }
}
