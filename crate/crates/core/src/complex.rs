//! Layered branched complexes: construction, validation, boundary matrices
//! and time-direction refinement.
//!
//! A complex is a set of top simplices, each spanning exactly one time step
//! (vertices in layers `t` and `t + 1`). Several simplices may meet at a face;
//! that is where branches split and recombine. A face shared by two or more
//! simplices carries the conservation constraint `D w = 0` unless it lies in a
//! single layer with branches on only one side of it (where branches begin or
//! end, i.e. the open temporal boundary).

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rat};

/// A weight or bound as written in a description file: a JSON number or an
/// exact string such as `"3/2"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Float(f64),
    Exact(String),
}

impl Number {
    pub fn to_rational(&self) -> Result<Rat> {
        match self {
            Number::Float(v) => rational::from_f64(*v),
            Number::Exact(s) => rational::parse_rational(s),
        }
    }

    pub fn from_rational(r: &Rat) -> Self {
        match rational::as_integer(r) {
            Some(i) if i.unsigned_abs() < (1u64 << 53) => Number::Float(i as f64),
            _ => Number::Exact(rational::format_rational(r)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexSpec {
    pub id: String,
    pub t: i64,
    #[serde(default)]
    pub x: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimplexSpec {
    pub id: String,
    pub vertices: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<[f64; 2]>,
}

/// The on-disk complex description (JSON).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexDescription {
    pub n_dim: usize,
    pub vertices: Vec<VertexSpec>,
    pub simplices: Vec<SimplexSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_weight: Option<Number>,
    #[serde(rename = "lower_bound_L")]
    pub lower_bound: Number,
}

impl ComplexDescription {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::MalformedDescription(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("description serializes")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub id: String,
    pub layer: i64,
    pub label: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    pub id: String,
    /// Orientation-bearing vertex order as listed in the description.
    pub vertex_ids: Vec<String>,
    pub layer_span: (i64, i64),
    vertex_index: Vec<usize>,
}

impl Simplex {
    /// Indices into [`BranchedComplex::vertices`], in listed order.
    pub fn vertex_indices(&self) -> &[usize] {
        &self.vertex_index
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub id: String,
    /// Canonical order: earlier layers first, then by label.
    pub vertex_ids: Vec<String>,
    pub incident_simplex_ids: Vec<String>,
    /// Index into [`BranchedComplex::simplices`] and the sign of this face in
    /// that simplex's boundary.
    pub incidence: Vec<(usize, i64)>,
    vertex_index: Vec<usize>,
}

impl Face {
    pub fn vertex_indices(&self) -> &[usize] {
        &self.vertex_index
    }
}

/// A validated, immutable layered branched complex.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchedComplex {
    pub n_dim: usize,
    /// Sorted by `(layer, label)`.
    pub vertices: Vec<Vertex>,
    /// Sorted by id in natural order (`s2` before `s10`).
    pub top_simplices: Vec<Simplex>,
    /// Constraint-carrying faces shared by at least two top simplices, in
    /// canonical order.
    pub shared_faces: Vec<Face>,
    pub weights: Vec<Option<Rat>>,
    pub field_values: Vec<Option<Complex64>>,
    pub total_weight: Option<Rat>,
    pub lower_bound: Rat,
}

/// Integer boundary matrix: rows are shared faces, columns are top simplices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryMatrix {
    pub face_ids: Vec<String>,
    pub simplex_ids: Vec<String>,
    /// Start layer of each column's simplex; columns sharing a layer form one
    /// time slice for the total-weight constraint.
    pub column_layers: Vec<i64>,
    pub entries: Vec<Vec<i64>>,
}

/// Compares identifiers so that embedded digit runs order numerically.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (mut ai, mut bi) = (a.char_indices().peekable(), b.char_indices().peekable());
    loop {
        match (ai.peek().copied(), bi.peek().copied()) {
            (None, None) => return a.cmp(b),
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some((sa, ca)), Some((sb, cb))) => {
                if ca.is_ascii_digit() && cb.is_ascii_digit() {
                    let ea = a[sa..].find(|c: char| !c.is_ascii_digit()).map_or(a.len(), |e| sa + e);
                    let eb = b[sb..].find(|c: char| !c.is_ascii_digit()).map_or(b.len(), |e| sb + e);
                    let (da, db) = (a[sa..ea].trim_start_matches('0'), b[sb..eb].trim_start_matches('0'));
                    let ord = da.len().cmp(&db.len()).then_with(|| da.cmp(db));
                    if ord != Ordering::Equal {
                        return ord;
                    }
                    while ai.peek().is_some_and(|&(i, _)| i < ea) {
                        ai.next();
                    }
                    while bi.peek().is_some_and(|&(i, _)| i < eb) {
                        bi.next();
                    }
                } else {
                    if ca != cb {
                        return ca.cmp(&cb);
                    }
                    ai.next();
                    bi.next();
                }
            }
        }
    }
}

fn permutation_sign(seq: &[usize]) -> i64 {
    let mut inversions = 0usize;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::MalformedDescription(msg.into())
}

/// Validates a description and builds the complex, computing face incidence
/// from shared vertex sets.
pub fn build_complex(desc: &ComplexDescription) -> Result<BranchedComplex> {
    let lower_bound = desc.lower_bound.to_rational()?;
    if lower_bound <= Rat::zero() {
        return Err(malformed("lower_bound_L must be positive"));
    }
    let total_weight = desc.total_weight.as_ref().map(Number::to_rational).transpose()?;
    if let Some(total) = &total_weight {
        if *total <= Rat::zero() {
            return Err(malformed("total_weight must be positive"));
        }
    }
    if desc.simplices.is_empty() {
        return Err(malformed("a complex needs at least one top simplex"));
    }

    let mut vertices: Vec<Vertex> = desc
        .vertices
        .iter()
        .map(|v| Vertex {
            id: v.id.clone(),
            layer: v.t,
            label: v.x.clone(),
        })
        .collect();
    vertices.sort_by(|a, b| a.layer.cmp(&b.layer).then_with(|| a.label.cmp(&b.label)));
    for pair in vertices.windows(2) {
        if pair[0].layer == pair[1].layer && pair[0].label == pair[1].label {
            return Err(malformed(format!(
                "vertices `{}` and `{}` share the coordinate (t = {}, x = {:?})",
                pair[0].id, pair[1].id, pair[0].layer, pair[0].label
            )));
        }
    }
    let mut vertex_lookup = HashMap::with_capacity(vertices.len());
    for (i, v) in vertices.iter().enumerate() {
        if vertex_lookup.insert(v.id.as_str(), i).is_some() {
            return Err(malformed(format!("duplicate vertex id `{}`", v.id)));
        }
    }

    let mut specs: Vec<&SimplexSpec> = desc.simplices.iter().collect();
    specs.sort_by(|a, b| natural_cmp(&a.id, &b.id));
    let arity = desc.n_dim + 2;
    let mut seen_ids = HashSet::new();
    let mut simplices = Vec::with_capacity(specs.len());
    let mut weights = Vec::with_capacity(specs.len());
    let mut fields = Vec::with_capacity(specs.len());
    let mut used = vec![false; vertices.len()];
    for spec in &specs {
        if !seen_ids.insert(spec.id.as_str()) {
            return Err(malformed(format!("duplicate simplex id `{}`", spec.id)));
        }
        if spec.vertices.len() != arity {
            return Err(malformed(format!(
                "simplex `{}` lists {} vertices; an ({}+1)-simplex needs {}",
                spec.id,
                spec.vertices.len(),
                desc.n_dim,
                arity
            )));
        }
        let mut index = Vec::with_capacity(arity);
        for vid in &spec.vertices {
            let &vi = vertex_lookup
                .get(vid.as_str())
                .ok_or_else(|| malformed(format!("simplex `{}` references unknown vertex `{vid}`", spec.id)))?;
            if index.contains(&vi) {
                return Err(malformed(format!("simplex `{}` repeats vertex `{vid}`", spec.id)));
            }
            index.push(vi);
        }
        let layers: Vec<i64> = index.iter().map(|&i| vertices[i].layer).collect();
        if layers.windows(2).any(|w| w[0] > w[1]) {
            return Err(malformed(format!(
                "simplex `{}` must list earlier-layer vertices first",
                spec.id
            )));
        }
        let (t0, t1) = (layers[0], layers[arity - 1]);
        if t1 != t0 + 1 {
            return Err(malformed(format!(
                "simplex `{}` spans layers {t0}..{t1}; top simplices span exactly one step",
                spec.id
            )));
        }
        let weight = spec.weight.as_ref().map(Number::to_rational).transpose()?;
        if let Some(w) = &weight {
            if *w < lower_bound {
                return Err(Error::WeightBelowBound {
                    id: spec.id.clone(),
                    weight: rational::format_rational(w),
                    bound: rational::format_rational(&lower_bound),
                });
            }
        }
        for &i in &index {
            used[i] = true;
        }
        weights.push(weight);
        fields.push(spec.field.map(|[re, im]| Complex64::new(re, im)));
        simplices.push(Simplex {
            id: spec.id.clone(),
            vertex_ids: spec.vertices.clone(),
            layer_span: (t0, t1),
            vertex_index: index,
        });
    }
    if let Some(i) = used.iter().position(|u| !u) {
        return Err(Error::DanglingFace(vertices[i].id.clone()));
    }

    let mut incidence: BTreeMap<Vec<usize>, Vec<(usize, i64)>> = BTreeMap::new();
    for (si, s) in simplices.iter().enumerate() {
        for omit in 0..arity {
            let listed: Vec<usize> = s
                .vertex_index
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != omit)
                .map(|(_, &v)| v)
                .collect();
            let sign = if omit % 2 == 0 { 1 } else { -1 } * permutation_sign(&listed);
            let mut key = listed;
            key.sort_unstable();
            incidence.entry(key).or_default().push((si, sign));
        }
    }
    let shared_faces = incidence
        .into_iter()
        .filter(|(key, inc)| {
            if inc.len() < 2 {
                return false;
            }
            let layer = vertices[key[0]].layer;
            if key.iter().any(|&v| vertices[v].layer != layer) {
                return true;
            }
            // A face inside one layer constrains only if branches both enter
            // and leave through it.
            let entering = inc.iter().any(|&(s, _)| simplices[s].layer_span.1 == layer);
            let leaving = inc.iter().any(|&(s, _)| simplices[s].layer_span.0 == layer);
            entering && leaving
        })
        .map(|(key, inc)| Face {
            id: key.iter().map(|&v| vertices[v].id.as_str()).collect::<Vec<_>>().join("|"),
            vertex_ids: key.iter().map(|&v| vertices[v].id.clone()).collect(),
            incident_simplex_ids: inc.iter().map(|&(s, _)| simplices[s].id.clone()).collect(),
            incidence: inc,
            vertex_index: key,
        })
        .collect();

    Ok(BranchedComplex {
        n_dim: desc.n_dim,
        vertices,
        top_simplices: simplices,
        shared_faces,
        weights,
        field_values: fields,
        total_weight,
        lower_bound,
    })
}

impl BranchedComplex {
    pub fn from_json(text: &str) -> Result<Self> {
        build_complex(&ComplexDescription::from_json(text)?)
    }

    pub fn simplex_index(&self, id: &str) -> Option<usize> {
        self.top_simplices.iter().position(|s| s.id == id)
    }

    pub fn simplex_ids(&self) -> Vec<String> {
        self.top_simplices.iter().map(|s| s.id.clone()).collect()
    }

    /// First and last vertex layer.
    pub fn layer_range(&self) -> (i64, i64) {
        let first = self.vertices.first().map_or(0, |v| v.layer);
        let last = self.vertices.last().map_or(0, |v| v.layer);
        (first, last)
    }

    /// Number of time steps spanned by the complex.
    pub fn step_count(&self) -> usize {
        let (a, b) = self.layer_range();
        (b - a) as usize
    }

    /// Indices of top simplices starting at layer `t`.
    pub fn simplices_in_step(&self, t: i64) -> Vec<usize> {
        (0..self.top_simplices.len())
            .filter(|&i| self.top_simplices[i].layer_span.0 == t)
            .collect()
    }

    /// Largest number of top simplices coexisting in a single time step.
    pub fn max_branches(&self) -> usize {
        let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
        for s in &self.top_simplices {
            *counts.entry(s.layer_span.0).or_default() += 1;
        }
        counts.values().copied().max().unwrap_or(0)
    }

    pub fn boundary_matrix(&self) -> BoundaryMatrix {
        boundary_matrix(self)
    }

    /// The full weight vector, if every simplex carries a weight.
    pub fn weight_vector(&self) -> Option<Vec<Rat>> {
        self.weights.iter().cloned().collect()
    }

    /// Sum of assigned weights over each time step (steps with an unweighted
    /// simplex are skipped).
    pub fn layer_totals(&self) -> BTreeMap<i64, Rat> {
        let mut totals: BTreeMap<i64, Option<Rat>> = BTreeMap::new();
        for (s, w) in self.top_simplices.iter().zip(&self.weights) {
            let entry = totals.entry(s.layer_span.0).or_insert_with(|| Some(Rat::zero()));
            *entry = match (entry.take(), w) {
                (Some(acc), Some(w)) => Some(acc + w),
                _ => None,
            };
        }
        totals.into_iter().filter_map(|(t, v)| v.map(|v| (t, v))).collect()
    }

    /// Coarse-grained wave function of one time step: the weighted sum of the
    /// field values of the simplices in that step.
    pub fn step_wave_function(&self, t: i64) -> Option<Complex64> {
        let mut psi = Complex64::zero();
        let mut any = false;
        for i in self.simplices_in_step(t) {
            let (w, phi) = (self.weights[i].as_ref()?, self.field_values[i]?);
            psi += phi * rational::to_f64(w);
            any = true;
        }
        any.then_some(psi)
    }

    pub fn to_description(&self) -> ComplexDescription {
        ComplexDescription {
            n_dim: self.n_dim,
            vertices: self
                .vertices
                .iter()
                .map(|v| VertexSpec {
                    id: v.id.clone(),
                    t: v.layer,
                    x: v.label.clone(),
                })
                .collect(),
            simplices: self
                .top_simplices
                .iter()
                .zip(self.weights.iter().zip(&self.field_values))
                .map(|(s, (w, f))| SimplexSpec {
                    id: s.id.clone(),
                    vertices: s.vertex_ids.clone(),
                    weight: w.as_ref().map(Number::from_rational),
                    field: f.map(|c| [c.re, c.im]),
                })
                .collect(),
            total_weight: self.total_weight.as_ref().map(Number::from_rational),
            lower_bound: Number::from_rational(&self.lower_bound),
        }
    }

    /// Returns a copy with the given weight vector (column order) attached.
    pub fn with_weights(&self, weights: &[Rat]) -> Result<BranchedComplex> {
        if weights.len() != self.top_simplices.len() {
            return Err(Error::DimensionMismatch {
                expected: self.top_simplices.len(),
                got: weights.len(),
            });
        }
        let mut desc = self.to_description();
        for (spec, w) in desc.simplices.iter_mut().zip(weights) {
            spec.weight = Some(Number::from_rational(w));
        }
        build_complex(&desc)
    }
}

/// Signed face/simplex incidence with rows and columns in canonical order.
pub fn boundary_matrix(complex: &BranchedComplex) -> BoundaryMatrix {
    let cols = complex.top_simplices.len();
    let entries = complex
        .shared_faces
        .iter()
        .map(|face| {
            let mut row = vec![0i64; cols];
            for &(s, sign) in &face.incidence {
                row[s] += sign;
            }
            row
        })
        .collect();
    BoundaryMatrix {
        face_ids: complex.shared_faces.iter().map(|f| f.id.clone()).collect(),
        simplex_ids: complex.simplex_ids(),
        column_layers: complex.top_simplices.iter().map(|s| s.layer_span.0).collect(),
        entries,
    }
}

impl BoundaryMatrix {
    /// Builds a matrix directly from integer rows, for use without a complex.
    pub fn from_rows(entries: Vec<Vec<i64>>, column_layers: Vec<i64>) -> Result<Self> {
        let cols = column_layers.len();
        if let Some(row) = entries.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                got: row.len(),
            });
        }
        Ok(BoundaryMatrix {
            face_ids: (0..entries.len()).map(|i| format!("r{i}")).collect(),
            simplex_ids: (0..cols).map(|j| format!("c{j}")).collect(),
            column_layers,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.simplex_ids.len()
    }

    pub fn apply(&self, v: &[Rat]) -> Vec<Rat> {
        self.entries
            .iter()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .filter(|(&d, _)| d != 0)
                    .fold(Rat::zero(), |acc, (&d, x)| acc + rational::int(d) * x)
            })
            .collect()
    }

    /// True when `D v = 0` holds exactly.
    pub fn annihilates(&self, v: &[Rat]) -> bool {
        v.len() == self.cols() && self.apply(v).iter().all(Zero::is_zero)
    }

    /// Distinct column layers in increasing order with their column indices.
    pub fn layer_groups(&self) -> Vec<(i64, Vec<usize>)> {
        let mut groups: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for (j, &t) in self.column_layers.iter().enumerate() {
            groups.entry(t).or_default().push(j);
        }
        groups.into_iter().collect()
    }
}

/// Splits the time step containing `simplex_id` into `parts` sub-steps.
///
/// Every simplex of that step becomes a chain of `parts` simplices carrying
/// the original weight and field; later layers shift by `parts - 1`. Only
/// 0+1-dimensional complexes are supported.
pub fn refine(complex: &BranchedComplex, simplex_id: &str, parts: usize) -> Result<BranchedComplex> {
    let target = complex
        .simplex_index(simplex_id)
        .ok_or_else(|| Error::UnknownSimplex(simplex_id.to_string()))?;
    if parts == 0 {
        return Err(Error::InvalidParameter("refinement needs parts >= 1".into()));
    }
    if parts == 1 {
        return Ok(complex.clone());
    }
    if complex.n_dim != 0 {
        return Err(Error::UnsupportedRefinement(complex.n_dim));
    }
    let t = complex.top_simplices[target].layer_span.0;
    let shift = parts as i64 - 1;
    let desc = complex.to_description();
    let width = parts.to_string().len();

    let mut vertices: Vec<VertexSpec> = desc
        .vertices
        .iter()
        .map(|v| VertexSpec {
            id: v.id.clone(),
            t: if v.t > t { v.t + shift } else { v.t },
            x: v.x.clone(),
        })
        .collect();
    let mut simplices = Vec::with_capacity(desc.simplices.len() + parts);
    let mut ordinal = 0i64;
    for (spec, s) in desc.simplices.iter().zip(&complex.top_simplices) {
        if s.layer_span.0 != t {
            simplices.push(spec.clone());
            continue;
        }
        let (start, end) = (&spec.vertices[0], &spec.vertices[1]);
        let mut chain = vec![start.clone()];
        for j in 1..parts {
            let id = format!("{}~{j:0width$}", spec.id);
            vertices.push(VertexSpec {
                id: id.clone(),
                t: t + j as i64,
                x: vec![ordinal],
            });
            chain.push(id);
        }
        chain.push(end.clone());
        for j in 0..parts {
            simplices.push(SimplexSpec {
                id: format!("{}.{:0width$}", spec.id, j + 1),
                vertices: vec![chain[j].clone(), chain[j + 1].clone()],
                weight: spec.weight.clone(),
                field: spec.field,
            });
        }
        ordinal += 1;
    }
    build_complex(&ComplexDescription {
        n_dim: 0,
        vertices,
        simplices,
        total_weight: desc.total_weight,
        lower_bound: desc.lower_bound,
    })
}
