//! Dense two-phase simplex for `max c'x  s.t.  Ax = b, x >= 0`.
//!
//! Pivoting follows Bland's rule (lowest-index entering column, lowest-index
//! leaving basic variable on ratio ties), so the method cannot cycle and the
//! returned vertex is a deterministic function of the input.

use thiserror::Error;

/// Feasibility and pivot tolerance.
pub const LP_TOL: f64 = 1e-9;

const MAX_PIVOTS: usize = 100_000;

#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    /// Equality rows, each of length `num_vars`.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    /// Objective to maximize.
    pub objective: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Basic variable per retained row.
    pub basis: Vec<usize>,
    pub pivots: usize,
}

#[derive(Clone, Copy, Debug, Error, PartialEq, Eq)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex pivot limit exceeded")]
    PivotLimit,
    #[error("inconsistent problem dimensions")]
    Dimension,
}

impl LpProblem {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.b.len()
    }

    fn check(&self) -> Result<(), LpError> {
        let nv = self.num_vars();
        if self.a.len() != self.b.len() || self.a.iter().any(|r| r.len() != nv) {
            return Err(LpError::Dimension);
        }
        let finite = self
            .a
            .iter()
            .flatten()
            .chain(&self.b)
            .chain(&self.objective)
            .all(|v| v.is_finite());
        if !finite {
            return Err(LpError::Dimension);
        }
        Ok(())
    }
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    ncols: usize,
    pivots: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.ncols]
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[col];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[col] = 0.0;
            }
        }
        self.basis[r] = col;
        self.pivots += 1;
    }

    /// Minimizes `cost` over columns accepted by `allowed`.
    fn minimize(&mut self, cost: &[f64], allowed: impl Fn(usize) -> bool) -> Result<(), LpError> {
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(LpError::PivotLimit);
            }
            let mut entering = None;
            for j in (0..self.ncols).filter(|&j| allowed(j)) {
                if self.basis.contains(&j) {
                    continue;
                }
                let reduced = cost[j]
                    - self
                        .rows
                        .iter()
                        .zip(&self.basis)
                        .map(|(row, &bv)| cost[bv] * row[j])
                        .sum::<f64>();
                if reduced < -LP_TOL {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][col];
                if a > LP_TOL {
                    let ratio = self.rhs(i) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - LP_TOL
                                || (ratio <= lr + LP_TOL && self.basis[i] < self.basis[li])
                            {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, col),
                None => return Err(LpError::Unbounded),
            }
        }
    }
}

/// Solves the LP, returning an optimal basic solution.
pub fn lp_solve(p: &LpProblem) -> Result<LpSolution, LpError> {
    p.check()?;
    let nv = p.num_vars();
    let m = p.num_rows();
    let ncols = nv + m;
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let sign = if p.b[i] < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![0.0; ncols + 1];
        for (r, &a) in row.iter_mut().zip(&p.a[i]) {
            *r = sign * a;
        }
        row[nv + i] = 1.0;
        row[ncols] = sign * p.b[i];
        rows.push(row);
    }
    let mut tab = Tableau {
        rows,
        basis: (nv..ncols).collect(),
        ncols,
        pivots: 0,
    };

    // Phase 1: minimize the sum of artificials.
    let mut phase1 = vec![0.0; ncols];
    for c in phase1.iter_mut().skip(nv) {
        *c = 1.0;
    }
    tab.minimize(&phase1, |_| true)?;
    let scale = 1.0 + p.b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let infeasibility: f64 = (0..m)
        .filter(|&i| tab.basis[i] >= nv)
        .map(|i| tab.rhs(i))
        .sum();
    if infeasibility > LP_TOL * scale {
        return Err(LpError::Infeasible);
    }

    // Drive zero-level artificials out of the basis; drop redundant rows.
    let mut i = 0;
    while i < tab.rows.len() {
        if tab.basis[i] >= nv {
            match (0..nv).find(|&j| tab.rows[i][j].abs() > LP_TOL) {
                Some(j) => {
                    tab.pivot(i, j);
                    i += 1;
                }
                None => {
                    tab.rows.remove(i);
                    tab.basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }

    // Phase 2 on the original columns.
    let mut phase2 = vec![0.0; ncols];
    for (c, o) in phase2.iter_mut().zip(&p.objective) {
        *c = -o;
    }
    tab.minimize(&phase2, |j| j < nv)?;

    let mut x = vec![0.0; nv];
    for (r, &bv) in tab.basis.iter().enumerate() {
        if bv < nv {
            let v = tab.rhs(r);
            x[bv] = if v.abs() < LP_TOL { 0.0 } else { v };
        }
    }
    let objective = x.iter().zip(&p.objective).map(|(a, b)| a * b).sum();
    Ok(LpSolution {
        x,
        objective,
        basis: tab.basis,
        pivots: tab.pivots,
    })
}
