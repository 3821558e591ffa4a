//! Dense two-phase simplex over exact rationals with Bland's rule.
//!
//! Only meant for the small equality-constrained systems produced by branch
//! weight feasibility: `A y = b`, `y >= 0`.

use num_traits::{Signed, Zero};

use crate::rational::Rat;

#[derive(Debug, Clone)]
pub(crate) struct FeasibleTableau {
    /// Constraint rows; the last entry of each row is the right-hand side.
    rows: Vec<Vec<Rat>>,
    basis: Vec<usize>,
    vars: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Optimum {
    Unbounded,
    Finite { point: Vec<Rat>, value: Rat },
}

fn pivot(rows: &mut [Vec<Rat>], objective: &mut [Rat], r: usize, c: usize) {
    let p = rows[r][c].clone();
    for x in rows[r].iter_mut() {
        *x /= &p;
    }
    let pivot_row = rows[r].clone();
    let eliminate = |row: &mut Vec<Rat>| {
        let f = row[c].clone();
        if !f.is_zero() {
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x -= &f * y;
            }
        }
    };
    for (i, row) in rows.iter_mut().enumerate() {
        if i != r {
            eliminate(row);
        }
    }
    let mut obj = objective.to_vec();
    eliminate(&mut obj);
    objective.clone_from_slice(&obj);
}

/// Minimizes the objective row in place. `objective[j]` holds reduced costs
/// for columns `0..usable`; the last entry is minus the objective value.
fn run_simplex(rows: &mut [Vec<Rat>], basis: &mut [usize], objective: &mut [Rat], usable: usize) -> bool {
    let rhs = objective.len() - 1;
    loop {
        let Some(enter) = (0..usable).find(|&j| objective[j].is_negative()) else {
            return true;
        };
        let mut leave: Option<(usize, Rat)> = None;
        for (i, row) in rows.iter().enumerate() {
            if row[enter].is_positive() {
                let ratio = &row[rhs] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((l, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*l]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = leave else {
            return false;
        };
        pivot(rows, objective, r, enter);
        basis[r] = enter;
    }
}

impl FeasibleTableau {
    /// Phase one. Returns `None` when `A y = b, y >= 0` has no solution.
    pub(crate) fn new(a: &[Vec<Rat>], b: &[Rat]) -> Option<Self> {
        let m = a.len();
        let n = a.first().map_or(0, Vec::len);
        let width = n + m + 1;
        let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(m);
        for (i, (row, rhs)) in a.iter().zip(b).enumerate() {
            let flip = rhs.is_negative();
            let mut t = vec![Rat::zero(); width];
            for (j, x) in row.iter().enumerate() {
                t[j] = if flip { -x.clone() } else { x.clone() };
            }
            t[n + i] = Rat::from_integer(1.into());
            t[width - 1] = if flip { -rhs.clone() } else { rhs.clone() };
            rows.push(t);
        }
        let mut basis: Vec<usize> = (n..n + m).collect();
        let mut objective = vec![Rat::zero(); width];
        for row in &rows {
            for j in 0..n {
                objective[j] -= &row[j];
            }
            objective[width - 1] -= &row[width - 1];
        }
        run_simplex(&mut rows, &mut basis, &mut objective, n + m);
        if !objective[width - 1].is_zero() {
            return None;
        }

        // Drive artificial variables out of the basis, dropping redundant rows.
        let mut i = 0;
        while i < rows.len() {
            if basis[i] >= n {
                match (0..n).find(|&j| !rows[i][j].is_zero()) {
                    Some(j) => {
                        pivot(&mut rows, &mut objective, i, j);
                        basis[i] = j;
                        i += 1;
                    }
                    None => {
                        rows.remove(i);
                        basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
        for row in rows.iter_mut() {
            let rhs = row[width - 1].clone();
            row.truncate(n);
            row.push(rhs);
        }
        Some(FeasibleTableau { rows, basis, vars: n })
    }

    pub(crate) fn point(&self) -> Vec<Rat> {
        let mut x = vec![Rat::zero(); self.vars];
        for (row, &j) in self.rows.iter().zip(&self.basis) {
            x[j] = row[self.vars].clone();
        }
        x
    }

    /// Minimizes `cost . y` over the feasible set.
    pub(crate) fn minimize(&self, cost: &[Rat]) -> Optimum {
        let mut rows = self.rows.clone();
        let mut basis = self.basis.clone();
        let n = self.vars;
        let mut objective: Vec<Rat> = cost.to_vec();
        objective.push(Rat::zero());
        for (row, &j) in rows.iter().zip(&basis) {
            let cj = cost[j].clone();
            if !cj.is_zero() {
                for (o, x) in objective.iter_mut().zip(row) {
                    *o -= &cj * x;
                }
            }
        }
        if !run_simplex(&mut rows, &mut basis, &mut objective, n) {
            return Optimum::Unbounded;
        }
        let mut point = vec![Rat::zero(); n];
        for (row, &j) in rows.iter().zip(&basis) {
            point[j] = row[n].clone();
        }
        let value = point.iter().zip(cost).fold(Rat::zero(), |acc, (x, c)| acc + x * c);
        Optimum::Finite { point, value }
    }
}
