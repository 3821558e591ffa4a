//! Two branches over `T` steps: `M_A` never intersects, `M_B` meets at every
//! integer time. Closed-form entropies next to exact counts.

use serde::{Deserialize, Serialize};

use crate::action::{self, FieldEnsembleModel};
use crate::complex::{build_complex, BranchedComplex, Number};
use crate::error::{Error, Result};
use crate::rational::{self, int, Rat};
use crate::templates;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToyModelSpec {
    /// Field entropy per branch per step (nats).
    pub b: f64,
    pub lower_bound: f64,
    pub total_weight: f64,
    pub steps: usize,
    pub dw: f64,
}

impl ToyModelSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(m.to_string()));
        if !(self.b > 0.0 && self.b.is_finite()) {
            return bad("b must be positive");
        }
        if !(self.lower_bound > 0.0 && self.lower_bound.is_finite()) {
            return bad("L must be positive");
        }
        if !(self.total_weight.is_finite() && self.total_weight >= 2.0 * self.lower_bound) {
            return bad("w_T must be at least 2L");
        }
        if self.steps == 0 {
            return bad("T must be at least 1");
        }
        if !(self.dw > 0.0 && self.dw.is_finite()) {
            return bad("dw must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToyEntropies {
    /// `2 b T`.
    pub s_a: f64,
    /// `T ln((w_T - 2L)/dw + 1)`, the lattice count of excess allocations.
    pub s_b_weight: f64,
    /// `T ln(w_T - 2L)`, the continuum form; `None` when `w_T = 2L`.
    pub s_b_weight_continuum: Option<f64>,
    /// `(b T, 2 b T)`.
    pub s_b_field_bounds: (f64, f64),
    pub threshold: f64,
    /// Continuum verdict: `w_T > e^b + 2L`.
    pub collapse_favorable_continuum: bool,
    /// Lattice verdict with the lower field bound.
    pub collapse_favorable_discrete: bool,
}

pub fn collapse_threshold(b: f64, lower_bound: f64) -> f64 {
    b.exp() + 2.0 * lower_bound
}

pub fn toy_entropies(spec: &ToyModelSpec) -> Result<ToyEntropies> {
    spec.validate()?;
    let t = spec.steps as f64;
    let excess = spec.total_weight - 2.0 * spec.lower_bound;
    let s_a = 2.0 * spec.b * t;
    let s_b_weight = t * (excess / spec.dw + 1.0).ln();
    let lo = spec.b * t;
    Ok(ToyEntropies {
        s_a,
        s_b_weight,
        s_b_weight_continuum: (excess > 0.0).then(|| t * excess.ln()),
        s_b_field_bounds: (lo, 2.0 * lo),
        threshold: collapse_threshold(spec.b, spec.lower_bound),
        collapse_favorable_continuum: spec.total_weight > collapse_threshold(spec.b, spec.lower_bound),
        collapse_favorable_discrete: s_b_weight + lo > s_a,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountedToy {
    pub symbol_count: u64,
    /// Counted entropy of `M_A`: pinned weights, independent symbols.
    pub s_a: f64,
    /// `ln` of the number of weight configurations of `M_B`.
    pub s_b_weight: f64,
    /// Counted field entropy of `M_B` under shared symbols at merges.
    pub s_b_field: f64,
}

/// Attaches `L` and `w_T`; `pinned(i)` optionally fixes simplex `i`.
fn with_weights(
    c: &BranchedComplex,
    lower: &Rat,
    total: &Rat,
    pinned: impl Fn(usize) -> Option<Rat>,
) -> Result<BranchedComplex> {
    let mut desc = c.to_description();
    desc.lower_bound = Number::from_rational(lower);
    desc.total_weight = Some(Number::from_rational(total));
    for (i, s) in desc.simplices.iter_mut().enumerate() {
        if let Some(w) = pinned(i) {
            s.weight = Some(Number::from_rational(&w));
        }
    }
    build_complex(&desc)
}

/// Exact microstate counts for both variants of the sample model.
pub fn counted_toy_entropies(spec: &ToyModelSpec, budget: u64) -> Result<CountedToy> {
    spec.validate()?;
    let lower = rational::from_f64(spec.lower_bound)?;
    let total = rational::from_f64(spec.total_weight)?;
    let dw = rational::from_f64(spec.dw)?;
    let field = FieldEnsembleModel::new(spec.b).map_err(|e| Error::InvalidSpec(e.to_string()))?;

    // Non-intersecting branches keep their weights constant. Split the
    // excess as evenly as the lattice allows.
    let excess = ((&total - &lower * int(2)) / &dw).floor();
    let first = &lower + (&excess / int(2)).floor() * &dw;
    let second = &total - &first;
    let m_a_shape = templates::parallel_branches(spec.steps, 2);
    let m_a = with_weights(&m_a_shape, &lower, &total, |i| {
        let branch = &m_a_shape.top_simplices[i].id;
        Some(if branch.starts_with("p0") { first.clone() } else { second.clone() })
    })?;
    let s_a = action::weight_microstate_entropy(&m_a, &dw, budget)? + action::field_entropy(&m_a, &field);

    let m_b = with_weights(&templates::recombining(spec.steps), &lower, &total, |_| None)?;
    Ok(CountedToy {
        symbol_count: field.symbol_count(),
        s_a,
        s_b_weight: action::weight_microstate_entropy(&m_b, &dw, budget)?,
        s_b_field: action::field_entropy(&m_b, &field),
    })
}
