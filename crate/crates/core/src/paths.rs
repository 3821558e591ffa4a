//! Paths through a layered complex: one top simplex per time step, with
//! consecutive simplices sharing a face.

use serde::Serialize;

use crate::complex::BranchedComplex;
use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;

/// Default cap on enumerated paths.
pub const DEFAULT_PATH_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Path {
    pub simplex_ids: Vec<String>,
    /// Column indices of the simplices in the host complex.
    #[serde(skip)]
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSet {
    pub paths: Vec<Path>,
    pub source_config: Vec<String>,
    pub target_config: Vec<String>,
    /// Simplex ids of the host complex in column order (rows of `A`).
    pub simplex_ids: Vec<String>,
}

impl PathSet {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

/// Successor lists: `next[i]` holds the simplices of the following step that
/// share a face with simplex `i`, in column order.
pub fn successors(complex: &BranchedComplex) -> Vec<Vec<usize>> {
    let n = complex.top_simplices.len();
    let need = complex.n_dim + 1;
    (0..n)
        .map(|i| {
            let s = &complex.top_simplices[i];
            let end = s.layer_span.1;
            let tail: Vec<usize> = s
                .vertex_indices()
                .iter()
                .copied()
                .filter(|&v| complex.vertices[v].layer == end)
                .collect();
            (0..n)
                .filter(|&j| {
                    let t = &complex.top_simplices[j];
                    t.layer_span.0 == end && t.vertex_indices().iter().filter(|v| tail.contains(v)).count() >= need
                })
                .collect()
        })
        .collect()
}

/// Resolves endpoint ids, defaulting to every simplex of the first or last
/// step. Returned indices are in column order.
fn endpoints(complex: &BranchedComplex, ids: Option<&[String]>, step: i64, which: &str) -> Result<Vec<usize>> {
    match ids {
        None => Ok(complex.simplices_in_step(step)),
        Some(ids) => {
            let mut out = Vec::with_capacity(ids.len());
            for id in ids {
                let i = complex
                    .simplex_index(id)
                    .ok_or_else(|| Error::InvalidEndpoints(format!("unknown {which} simplex `{id}`")))?;
                if complex.top_simplices[i].layer_span.0 != step {
                    return Err(Error::InvalidEndpoints(format!(
                        "{which} simplex `{id}` is not in step {step}"
                    )));
                }
                out.push(i);
            }
            out.sort_unstable();
            out.dedup();
            Ok(out)
        }
    }
}

/// Number of paths from `c_i` to `c_f`, by dynamic programming over steps.
/// Saturates at `u128::MAX`.
pub fn count_paths(complex: &BranchedComplex, c_i: Option<&[String]>, c_f: Option<&[String]>) -> Result<u128> {
    let (first, last) = complex.layer_range();
    if complex.top_simplices.is_empty() {
        return Ok(0);
    }
    let sources = endpoints(complex, c_i, first, "source")?;
    let targets = endpoints(complex, c_f, last - 1, "target")?;
    let next = successors(complex);
    let ways = ways_to_target(complex, &next, &targets);
    Ok(sources.iter().fold(0u128, |acc, &s| acc.saturating_add(ways[s])))
}

fn ways_to_target(complex: &BranchedComplex, next: &[Vec<usize>], targets: &[usize]) -> Vec<u128> {
    let n = complex.top_simplices.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(complex.top_simplices[i].layer_span.0));
    let mut ways = vec![0u128; n];
    for &i in &order {
        ways[i] = if targets.contains(&i) {
            1
        } else {
            next[i].iter().fold(0u128, |acc, &j| acc.saturating_add(ways[j]))
        };
    }
    ways
}

/// All paths from `c_i` (first step) to `c_f` (last step) in lexicographic
/// column order. `None` endpoints mean the whole first or last step.
pub fn enumerate_paths(
    complex: &BranchedComplex,
    c_i: Option<&[String]>,
    c_f: Option<&[String]>,
    cap: usize,
) -> Result<PathSet> {
    let (first, last) = complex.layer_range();
    let ids = complex.simplex_ids();
    let empty = |sources: Vec<usize>, targets: Vec<usize>| PathSet {
        paths: Vec::new(),
        source_config: sources.iter().map(|&i| ids[i].clone()).collect(),
        target_config: targets.iter().map(|&i| ids[i].clone()).collect(),
        simplex_ids: ids.clone(),
    };
    if complex.top_simplices.is_empty() {
        return Ok(empty(vec![], vec![]));
    }
    let sources = endpoints(complex, c_i, first, "source")?;
    let targets = endpoints(complex, c_f, last - 1, "target")?;
    let next = successors(complex);
    let ways = ways_to_target(complex, &next, &targets);
    let count = sources.iter().fold(0u128, |acc, &s| acc.saturating_add(ways[s]));
    if count > cap as u128 {
        return Err(Error::PathExplosion { count, cap });
    }

    let mut paths = Vec::with_capacity(count as usize);
    let mut stack: Vec<usize> = Vec::new();
    fn walk(i: usize, next: &[Vec<usize>], ways: &[u128], targets: &[usize], stack: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        stack.push(i);
        if targets.contains(&i) {
            out.push(stack.clone());
        } else {
            for &j in &next[i] {
                if ways[j] > 0 {
                    walk(j, next, ways, targets, stack, out);
                }
            }
        }
        stack.pop();
    }
    let mut raw = Vec::new();
    for &s in &sources {
        if ways[s] > 0 {
            walk(s, &next, &ways, &targets, &mut stack, &mut raw);
        }
    }
    for indices in raw {
        paths.push(Path {
            simplex_ids: indices.iter().map(|&i| ids[i].clone()).collect(),
            indices,
        });
    }
    let mut set = empty(sources, targets);
    set.paths = paths;
    Ok(set)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IncidenceMatrix {
    pub simplex_ids: Vec<String>,
    /// `entries[σ][i]` is 1 when simplex σ lies on path i.
    pub entries: Vec<Vec<u8>>,
}

impl IncidenceMatrix {
    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.entries.first().map_or(0, Vec::len)
    }
}

pub fn incidence_matrix(paths: &PathSet) -> IncidenceMatrix {
    let mut entries = vec![vec![0u8; paths.len()]; paths.simplex_ids.len()];
    for (i, p) in paths.paths.iter().enumerate() {
        for &s in &p.indices {
            entries[s][i] = 1;
        }
    }
    IncidenceMatrix {
        simplex_ids: paths.simplex_ids.clone(),
        entries,
    }
}

/// `w_σ = Σ_i A_σi w_i`.
pub fn simplex_weights_from_paths<T>(a: &IncidenceMatrix, path_weights: &[T]) -> Result<Vec<T>>
where
    T: Clone + PartialOrd + num_traits::Zero,
{
    if path_weights.len() != a.cols() && !(a.rows() == 0 && path_weights.is_empty()) {
        return Err(Error::DimensionMismatch {
            expected: a.cols(),
            got: path_weights.len(),
        });
    }
    if path_weights.iter().any(|w| *w < T::zero()) {
        return Err(Error::NegativePathWeight);
    }
    Ok(a.entries
        .iter()
        .map(|row| {
            row.iter()
                .zip(path_weights)
                .filter(|(&x, _)| x == 1)
                .fold(T::zero(), |acc, (_, w)| acc + w.clone())
        })
        .collect())
}

/// Softmin probabilities `P_i = e^{-k S_i} / Σ_j e^{-k S_j}`.
pub fn path_probabilities(actions: &[f64], k: f64) -> Result<Vec<f64>> {
    if actions.is_empty() {
        return Err(Error::DegenerateEnsemble("no paths".into()));
    }
    if actions.iter().any(|s| !s.is_finite()) || !k.is_finite() || k < 0.0 {
        return Err(Error::InvalidParameter("actions and k must be finite, k >= 0".into()));
    }
    let exponents: Vec<f64> = actions.iter().map(|s| -k * s).collect();
    let max = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let unnormalized: Vec<f64> = exponents.iter().map(|e| (e - max).exp()).collect();
    let z = pairwise_sum(&unnormalized);
    Ok(unnormalized.into_iter().map(|u| u / z).collect())
}
