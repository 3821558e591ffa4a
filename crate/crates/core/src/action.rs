//! Action functionals: lattice actions for demonstration systems, the field
//! microstate model, microstate entropy and the entropic action.

use serde::{Deserialize, Serialize};

use crate::complex::BranchedComplex;
use crate::error::{Error, Result};
use crate::paths::Path;
use crate::rational::Rat;
use crate::weights::{self, CountOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    FreeParticle,
    HarmonicOscillator,
    Entropic,
    Table,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::FreeParticle => "free_particle",
            ModelKind::HarmonicOscillator => "harmonic_oscillator",
            ModelKind::Entropic => "entropic",
            ModelKind::Table => "table",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionModel {
    pub kind: ModelKind,
    #[serde(default = "one")]
    pub m: f64,
    #[serde(default)]
    pub omega: f64,
    #[serde(default = "one")]
    pub eps: f64,
    #[serde(default = "one")]
    pub a: f64,
    #[serde(default = "one")]
    pub alpha: f64,
    /// Field entropy rate used by the entropic kind.
    #[serde(default)]
    pub b: Option<f64>,
    /// Lattice label mapped to position zero.
    #[serde(default)]
    pub center: f64,
    #[serde(default)]
    pub table: Option<Vec<f64>>,
}

fn one() -> f64 {
    1.0
}

impl ActionModel {
    pub fn free_particle(m: f64, eps: f64, a: f64) -> Self {
        ActionModel {
            kind: ModelKind::FreeParticle,
            m,
            omega: 0.0,
            eps,
            a,
            alpha: 1.0,
            b: None,
            center: 0.0,
            table: None,
        }
    }

    pub fn harmonic(m: f64, omega: f64, eps: f64, a: f64) -> Self {
        ActionModel {
            kind: ModelKind::HarmonicOscillator,
            omega,
            ..Self::free_particle(m, eps, a)
        }
    }

    pub fn table(values: Vec<f64>) -> Self {
        ActionModel {
            kind: ModelKind::Table,
            table: Some(values),
            ..Self::free_particle(1.0, 1.0, 1.0)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidModel(what.to_string()));
        if !self.center.is_finite() {
            return bad("center must be finite");
        }
        match self.kind {
            ModelKind::FreeParticle | ModelKind::HarmonicOscillator => {
                if !(self.m > 0.0 && self.m.is_finite()) {
                    return bad("m must be positive");
                }
                if !(self.eps > 0.0 && self.eps.is_finite()) {
                    return bad("eps must be positive");
                }
                if !(self.a > 0.0 && self.a.is_finite()) {
                    return bad("a must be positive");
                }
                if !(self.omega >= 0.0 && self.omega.is_finite()) {
                    return bad("omega must be non-negative");
                }
            }
            ModelKind::Entropic => {
                if !(self.alpha > 0.0 && self.alpha.is_finite()) {
                    return bad("alpha must be positive");
                }
                if !self.b.is_some_and(|b| b > 0.0 && b.is_finite()) {
                    return bad("entropic model needs b > 0");
                }
            }
            ModelKind::Table => match &self.table {
                Some(t) if t.iter().all(|v| v.is_finite()) => {}
                _ => return bad("table model needs finite per-path values"),
            },
        }
        Ok(())
    }

    /// Position of a lattice label.
    pub fn position(&self, label: f64) -> f64 {
        self.a * (label - self.center)
    }

    /// Action of one time step from `x` to `y` (positions).
    pub fn step_action(&self, x: f64, y: f64) -> f64 {
        let kinetic = 0.5 * self.m * (y - x) * (y - x) / self.eps;
        match self.kind {
            ModelKind::HarmonicOscillator => kinetic - 0.5 * self.m * self.omega * self.omega * x * x * self.eps,
            _ => kinetic,
        }
    }

    fn require_lattice(&self) -> Result<()> {
        match self.kind {
            ModelKind::FreeParticle | ModelKind::HarmonicOscillator => Ok(()),
            other => Err(Error::BadModelKind(other.name().into())),
        }
    }
}

/// Time-sliced action of a trajectory of positions `x_0..x_T`.
pub fn lattice_action(trajectory: &[f64], model: &ActionModel) -> Result<f64> {
    model.require_lattice()?;
    model.validate()?;
    if trajectory.len() < 2 {
        return Err(Error::InvalidModel("trajectory needs at least two points".into()));
    }
    Ok(trajectory.windows(2).map(|w| model.step_action(w[0], w[1])).sum())
}

/// Mean label of the vertices of `path` in each layer, one entry per layer
/// from the first to the last.
pub fn path_centroids(complex: &BranchedComplex, path: &Path) -> Vec<Vec<f64>> {
    let mut layers: std::collections::BTreeMap<i64, Vec<usize>> = Default::default();
    for &s in &path.indices {
        for &v in complex.top_simplices[s].vertex_indices() {
            let entry = layers.entry(complex.vertices[v].layer).or_default();
            if !entry.contains(&v) {
                entry.push(v);
            }
        }
    }
    layers
        .into_values()
        .map(|vs| {
            let dim = vs.iter().map(|&v| complex.vertices[v].label.len()).max().unwrap_or(0);
            let mut c = vec![0.0; dim];
            for &v in &vs {
                for (ci, &x) in c.iter_mut().zip(&complex.vertices[v].label) {
                    *ci += x as f64;
                }
            }
            c.iter_mut().for_each(|ci| *ci /= vs.len() as f64);
            c
        })
        .collect()
}

/// Positions of a path under `model`, from the first label component of each
/// layer centroid.
pub fn path_trajectory(complex: &BranchedComplex, path: &Path, model: &ActionModel) -> Vec<f64> {
    path_centroids(complex, path)
        .iter()
        .map(|c| model.position(c.first().copied().unwrap_or(0.0)))
        .collect()
}

/// How branches that meet constrain each other's field symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cohesion {
    /// Simplices entering a shared face must carry the same symbol.
    #[default]
    SharedAtMerges,
    /// No coupling: every simplex chooses its symbol independently.
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldEnsembleModel {
    /// Field entropy per branch per time step, in nats.
    pub b: f64,
    #[serde(default)]
    pub cohesion: Cohesion,
}

impl FieldEnsembleModel {
    pub fn new(b: f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidModel("field entropy rate b must be positive".into()));
        }
        Ok(FieldEnsembleModel {
            b,
            cohesion: Cohesion::SharedAtMerges,
        })
    }

    /// Alphabet size `round(e^b)`, at least 1.
    pub fn symbol_count(&self) -> u64 {
        (self.b.exp().round() as u64).max(1)
    }

    /// Nats per free symbol, `ln(symbol_count)`; differs from `b` by the
    /// rounding of `e^b`.
    pub fn symbol_entropy(&self) -> f64 {
        (self.symbol_count() as f64).ln()
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Number of independent field symbols on the complex: one per top simplex,
/// merged across simplices that enter a common shared face.
pub fn field_symbol_classes(complex: &BranchedComplex, cohesion: Cohesion) -> usize {
    let n = complex.top_simplices.len();
    if cohesion == Cohesion::Free {
        return n;
    }
    let mut parent: Vec<usize> = (0..n).collect();
    for face in &complex.shared_faces {
        let layers: Vec<i64> = face
            .vertex_indices()
            .iter()
            .map(|&v| complex.vertices[v].layer)
            .collect();
        if layers.iter().any(|&l| l != layers[0]) {
            continue;
        }
        let incoming: Vec<usize> = face
            .incidence
            .iter()
            .map(|&(s, _)| s)
            .filter(|&s| complex.top_simplices[s].layer_span.1 == layers[0])
            .collect();
        for w in incoming.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            parent[a.max(b)] = a.min(b);
        }
    }
    (0..n).filter(|&i| find(&mut parent, i) == i).count()
}

/// `ln N_phi`: field microstates of the complex at the model's resolution.
pub fn field_entropy(complex: &BranchedComplex, model: &FieldEnsembleModel) -> f64 {
    field_symbol_classes(complex, model.cohesion) as f64 * model.symbol_entropy()
}

/// `ln N_w`: weight microstates of the complex. Assigned weights are held
/// fixed; the total comes from the complex or from the assigned weights of
/// a fully weighted complex.
pub fn weight_microstate_entropy(complex: &BranchedComplex, dw: &Rat, budget: u64) -> Result<f64> {
    let d = complex.boundary_matrix();
    let total = match (&complex.total_weight, complex.layer_totals().values().next()) {
        (Some(t), _) => t.clone(),
        (None, Some(t)) if complex.weights.iter().all(Option::is_some) => t.clone(),
        _ => {
            return Err(Error::InvalidParameter(
                "weight entropy needs total_weight or a fully weighted complex".into(),
            ))
        }
    };
    let opts = CountOptions {
        budget,
        pinned: complex.weights.clone(),
    };
    let count = weights::count_with(&d, &complex.lower_bound, &total, dw, &opts)?;
    weights::weight_entropy(count)
}

/// `S_en[p] = ln(N_w N_phi)` for a path hosted by `complex`. The path's
/// microstates are those of the host complex: the weight configurations of
/// the complex and its field symbols.
pub fn microstate_entropy(
    path: &Path,
    complex: &BranchedComplex,
    dw: &Rat,
    field: &FieldEnsembleModel,
    budget: u64,
) -> Result<f64> {
    if let Some(&bad) = path.indices.iter().find(|&&i| i >= complex.top_simplices.len()) {
        return Err(Error::UnknownSimplex(format!("column {bad}")));
    }
    for (id, &i) in path.simplex_ids.iter().zip(&path.indices) {
        if complex.top_simplices[i].id != *id {
            return Err(Error::UnknownSimplex(id.clone()));
        }
    }
    Ok(weight_microstate_entropy(complex, dw, budget)? + field_entropy(complex, field))
}

/// `S = -alpha * S_en`.
pub fn entropic_action(s_en: f64, alpha: f64) -> f64 {
    -alpha * s_en
}
