//! The branch-weight configuration space: null spaces of `D`, feasibility
//! under `w >= L` with a fixed total per time step, and exact lattice counts.
//!
//! A configuration satisfies three families of constraints: `D w = 0`, the
//! weights of every time step sum to `w_T`, and every weight is at least
//! `L`. Counting works on the integer offsets `k` with `w = L + k dw`.

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::complex::BoundaryMatrix;
use crate::error::{Error, Result};
use crate::linalg;
use crate::lp::{FeasibleTableau, Optimum};
use crate::rational::{self, int, Rat};

/// Default cap on search nodes for [`count_lattice_configs`].
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct NullSpaceBasis {
    pub basis_vectors: Vec<Vec<Rat>>,
    pub rank: usize,
    pub nullity: usize,
}

pub fn null_space(d: &BoundaryMatrix) -> NullSpaceBasis {
    let rows = linalg::integer_rows(&d.entries);
    let basis_vectors = linalg::kernel(&rows, d.cols());
    let nullity = basis_vectors.len();
    NullSpaceBasis {
        basis_vectors,
        rank: d.cols() - nullity,
        nullity,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightConfiguration {
    pub simplex_ids: Vec<String>,
    #[serde(serialize_with = "ser_rats")]
    pub values: Vec<Rat>,
    #[serde(serialize_with = "rational::serde_rat::serialize")]
    pub total: Rat,
    #[serde(serialize_with = "rational::serde_rat::serialize")]
    pub lower_bound: Rat,
}

fn ser_rats<S: serde::Serializer>(v: &[Rat], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(rational::format_rational))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub witness: Option<WeightConfiguration>,
    /// Dimension of the feasible polytope (its affine hull).
    pub dimension: Option<usize>,
    pub reason: Option<String>,
}

impl FeasibilityReport {
    fn infeasible(reason: String) -> Self {
        FeasibilityReport {
            feasible: false,
            witness: None,
            dimension: None,
            reason: Some(reason),
        }
    }
}

/// Equality system `E y = b` in the shifted variables `y = w - L >= 0`.
fn shifted_system(d: &BoundaryMatrix, lower: &Rat, total: &Rat) -> (Vec<Vec<Rat>>, Vec<Rat>) {
    let n = d.cols();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for row in &d.entries {
        let sum: i64 = row.iter().sum();
        rows.push(row.iter().map(|&x| int(x)).collect());
        rhs.push(-(lower * int(sum)));
    }
    for (_, cols) in d.layer_groups() {
        let mut r = vec![Rat::zero(); n];
        for &j in &cols {
            r[j] = Rat::one();
        }
        rows.push(r);
        rhs.push(total - lower * int(cols.len() as i64));
    }
    (rows, rhs)
}

/// Decides whether `{D w = 0, step totals = w_T, w >= L}` is non-empty and
/// returns a relative-interior witness and the polytope dimension.
pub fn feasible_region(d: &BoundaryMatrix, lower: &Rat, total: &Rat) -> Result<FeasibilityReport> {
    if !lower.is_positive() || !total.is_positive() {
        return Err(Error::InvalidParameter("L and w_T must be positive".into()));
    }
    let n = d.cols();
    let branches = d.layer_groups().iter().map(|(_, c)| c.len()).max().unwrap_or(0);
    if total < &(lower * int(branches as i64)) {
        return Ok(FeasibilityReport::infeasible(format!(
            "InfeasibleTotal: w_T = {} is below {} branches x L = {}",
            rational::format_rational(total),
            branches,
            rational::format_rational(lower)
        )));
    }
    let (rows, rhs) = shifted_system(d, lower, total);
    let Some(tableau) = FeasibleTableau::new(&rows, &rhs) else {
        return Ok(FeasibilityReport::infeasible(
            "conservation and step totals cannot both hold with w >= L".into(),
        ));
    };

    // A coordinate that cannot leave zero is an implicit equality; averaging
    // the maximizers of every coordinate gives a relative-interior point.
    let mut hull_rows = rows.clone();
    let mut sum = vec![Rat::zero(); n];
    let mut points = 0i64;
    for j in 0..n {
        let mut cost = vec![Rat::zero(); n];
        cost[j] = -Rat::one();
        match tableau.minimize(&cost) {
            Optimum::Finite { point, value } => {
                if value.is_zero() {
                    let mut e = vec![Rat::zero(); n];
                    e[j] = Rat::one();
                    hull_rows.push(e);
                }
                for (s, p) in sum.iter_mut().zip(&point) {
                    *s += p;
                }
                points += 1;
            }
            Optimum::Unbounded => unreachable!("step totals bound every coordinate"),
        }
    }
    let y = if points == 0 {
        tableau.point()
    } else {
        sum.into_iter().map(|s| s / int(points)).collect()
    };
    let dimension = n - linalg::rank(&hull_rows, n);
    Ok(FeasibilityReport {
        feasible: true,
        witness: Some(WeightConfiguration {
            simplex_ids: d.simplex_ids.clone(),
            values: y.into_iter().map(|v| v + lower).collect(),
            total: total.clone(),
            lower_bound: lower.clone(),
        }),
        dimension: Some(dimension),
        reason: None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountOptions {
    pub budget: u64,
    /// Per-column fixed weights; `None` leaves the column free.
    pub pinned: Vec<Option<Rat>>,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions {
            budget: DEFAULT_BUDGET,
            pinned: Vec::new(),
        }
    }
}

/// Number of weight vectors on the lattice `{L, L + dw, ...}` satisfying
/// conservation and the per-step total `w_T`.
pub fn count_lattice_configs(d: &BoundaryMatrix, lower: &Rat, total: &Rat, dw: &Rat) -> Result<u128> {
    count_with(d, lower, total, dw, &CountOptions::default())
}

/// Integer form of a rational, or `None` if it is not integral.
fn integral(r: &Rat) -> Option<i128> {
    if r.denom().is_one() {
        r.numer().to_i128()
    } else {
        None
    }
}

pub fn count_with(d: &BoundaryMatrix, lower: &Rat, total: &Rat, dw: &Rat, opts: &CountOptions) -> Result<u128> {
    if !lower.is_positive() || !total.is_positive() || !dw.is_positive() {
        return Err(Error::InvalidParameter("L, w_T and dw must be positive".into()));
    }
    let n = d.cols();
    let mut constraints: Vec<(Vec<(usize, i128)>, i128)> = Vec::new();
    let mut upper = vec![0i128; n];

    for (_, cols) in d.layer_groups() {
        let Some(k) = integral(&((total - lower * int(cols.len() as i64)) / dw)) else {
            return Ok(0);
        };
        if k < 0 {
            return Ok(0);
        }
        for &j in &cols {
            upper[j] = k;
        }
        constraints.push((cols.iter().map(|&j| (j, 1)).collect(), k));
    }
    let shift = lower / dw;
    for row in &d.entries {
        let terms: Vec<(usize, i128)> = row
            .iter()
            .enumerate()
            .filter(|(_, &x)| x != 0)
            .map(|(j, &x)| (j, x as i128))
            .collect();
        let sum: i64 = row.iter().sum();
        let Some(rhs) = integral(&(-(&shift * int(sum)))) else {
            return Ok(0);
        };
        constraints.push((terms, rhs));
    }

    let mut lower_k = vec![0i128; n];
    for (j, pin) in opts.pinned.iter().enumerate().take(n) {
        if let Some(w) = pin {
            match integral(&((w - lower) / dw)) {
                Some(k) if k >= 0 && k <= upper[j] => {
                    lower_k[j] = k;
                    upper[j] = k;
                }
                _ => return Ok(0),
            }
        }
    }

    let mut search = Search::new(n, constraints, lower_k, upper, opts.budget);
    search.run()
}

/// Depth-first enumeration with interval propagation. Variables are visited
/// in column order, which is time order for boundary matrices.
struct Search {
    lo: Vec<i128>,
    hi: Vec<i128>,
    constraints: Vec<(Vec<(usize, i128)>, i128)>,
    by_var: Vec<Vec<(usize, i128)>>,
    residual: Vec<i128>,
    /// Sum of the largest and smallest possible contributions of the
    /// still-unassigned variables of each constraint.
    rem_max: Vec<i128>,
    rem_min: Vec<i128>,
    nodes: u64,
    budget: u64,
}

impl Search {
    fn new(n: usize, constraints: Vec<(Vec<(usize, i128)>, i128)>, lo: Vec<i128>, hi: Vec<i128>, budget: u64) -> Self {
        let mut by_var = vec![Vec::new(); n];
        let mut residual = Vec::with_capacity(constraints.len());
        let mut rem_max = Vec::with_capacity(constraints.len());
        let mut rem_min = Vec::with_capacity(constraints.len());
        for (r, (terms, rhs)) in constraints.iter().enumerate() {
            let (mut mx, mut mn) = (0, 0);
            for &(j, c) in terms {
                by_var[j].push((r, c));
                let (a, b) = (c * lo[j], c * hi[j]);
                mx += a.max(b);
                mn += a.min(b);
            }
            residual.push(*rhs);
            rem_max.push(mx);
            rem_min.push(mn);
        }
        Search {
            lo,
            hi,
            constraints,
            by_var,
            residual,
            rem_max,
            rem_min,
            nodes: 0,
            budget,
        }
    }

    fn run(&mut self) -> Result<u128> {
        if (0..self.constraints.len()).any(|r| self.residual[r] < self.rem_min[r] || self.residual[r] > self.rem_max[r]) {
            return Ok(0);
        }
        self.visit(0)
    }

    fn visit(&mut self, j: usize) -> Result<u128> {
        if j == self.lo.len() {
            return Ok(u128::from(self.residual.iter().all(|&r| r == 0)));
        }
        let (mut lo, mut hi) = (self.lo[j], self.hi[j]);
        for &(r, c) in &self.by_var[j] {
            let (a, b) = (c * self.lo[j], c * self.hi[j]);
            let others_max = self.rem_max[r] - a.max(b);
            let others_min = self.rem_min[r] - a.min(b);
            // c * x must lie in [residual - others_max, residual - others_min].
            let (p, q) = (self.residual[r] - others_max, self.residual[r] - others_min);
            let (vlo, vhi) = if c > 0 {
                (div_ceil(p, c), div_floor(q, c))
            } else {
                (div_ceil(q, c), div_floor(p, c))
            };
            lo = lo.max(vlo);
            hi = hi.min(vhi);
            if lo > hi {
                return Ok(0);
            }
        }

        let saved_lo = self.lo[j];
        let saved_hi = self.hi[j];
        self.retract(j, saved_lo, saved_hi);
        let mut total: u128 = 0;
        for v in lo..=hi {
            self.nodes += 1;
            if self.nodes > self.budget {
                self.restore(j, saved_lo, saved_hi);
                return Err(Error::BudgetExceeded { budget: self.budget });
            }
            for &(r, c) in &self.by_var[j] {
                self.residual[r] -= c * v;
            }
            let sub = self.visit(j + 1);
            for &(r, c) in &self.by_var[j] {
                self.residual[r] += c * v;
            }
            match sub {
                Ok(count) => total += count,
                Err(e) => {
                    self.restore(j, saved_lo, saved_hi);
                    return Err(e);
                }
            }
        }
        self.restore(j, saved_lo, saved_hi);
        Ok(total)
    }

    /// Removes variable `j` from the remaining-contribution bounds.
    fn retract(&mut self, j: usize, lo: i128, hi: i128) {
        for &(r, c) in &self.by_var[j] {
            let (a, b) = (c * lo, c * hi);
            self.rem_max[r] -= a.max(b);
            self.rem_min[r] -= a.min(b);
        }
    }

    fn restore(&mut self, j: usize, lo: i128, hi: i128) {
        for &(r, c) in &self.by_var[j] {
            let (a, b) = (c * lo, c * hi);
            self.rem_max[r] += a.max(b);
            self.rem_min[r] += a.min(b);
        }
    }
}

fn div_floor(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn div_ceil(a: i128, b: i128) -> i128 {
    -div_floor(-a, b)
}

/// `ln(count)` in nats.
pub fn weight_entropy(count: u128) -> Result<f64> {
    if count == 0 {
        return Err(Error::ZeroMicrostates);
    }
    Ok((count as f64).ln())
}
