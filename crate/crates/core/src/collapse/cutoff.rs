use num_complex::Complex64;
use serde::Serialize;

use crate::action::path_centroids;
use crate::complex::BranchedComplex;
use crate::error::{Error, Result};
use crate::paths::PathSet;
use crate::propagator::amplitude_sum;

/// Root mean square over layers of the Euclidean distance between two
/// per-layer centroid sequences.
pub fn path_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (x, y) in a.iter().zip(b) {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        total += x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>();
    }
    Ok((total / a.len() as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutoffReport {
    /// Sum over paths within `radius` of the classical path.
    pub z_cut: Complex64,
    /// Uniform-weight sum over every path.
    pub z_full: Complex64,
    pub included: usize,
    pub empty_neighborhood: bool,
}

/// `Σ_{dist(p, p_C) <= radius} w_E e^{i S[p]/ħ}`. The classical path is given
/// as its per-layer centroids; `radius = ∞` disables the cutoff.
pub fn similarity_cutoff_propagator(
    complex: &BranchedComplex,
    paths: &PathSet,
    actions: &[f64],
    classical: &[Vec<f64>],
    radius: f64,
    hbar: f64,
    w_e: f64,
) -> Result<CutoffReport> {
    if actions.len() != paths.len() {
        return Err(Error::DimensionMismatch {
            expected: paths.len(),
            got: actions.len(),
        });
    }
    if radius.is_nan() || radius < 0.0 {
        return Err(Error::InvalidParameter("radius must be non-negative".into()));
    }
    let mut near = Vec::new();
    for (p, &s) in paths.paths.iter().zip(actions) {
        if path_distance(&path_centroids(complex, p), classical)? <= radius {
            near.push(s);
        }
    }
    let z_full = amplitude_sum(&vec![w_e; actions.len()], actions, hbar)?;
    let z_cut = amplitude_sum(&vec![w_e; near.len()], &near, hbar)?;
    Ok(CutoffReport {
        z_cut,
        z_full,
        included: near.len(),
        empty_neighborhood: near.is_empty(),
    })
}
