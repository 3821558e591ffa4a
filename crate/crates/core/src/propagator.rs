//! Path sums: the weighted amplitude sum, its entropy-weighted expectation,
//! a transfer-matrix oracle for lattice models, Monte Carlo estimators and
//! the cumulant correction to the factorized expectation.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::action::ActionModel;
use crate::complex::BranchedComplex;
use crate::error::{Error, Result};
use crate::numeric::{log_sum_exp, pairwise_sum, stream_rng, Moments};
use crate::paths::successors;

/// Samples per Monte Carlo block; each block owns one random stream.
pub const BLOCK_SIZE: u64 = 4096;

/// `Σ_i w_i e^{i S_i / ħ}`.
pub fn amplitude_sum(path_weights: &[f64], actions: &[f64], hbar: f64) -> Result<Complex64> {
    if path_weights.len() != actions.len() {
        return Err(Error::DimensionMismatch {
            expected: actions.len(),
            got: path_weights.len(),
        });
    }
    check_hbar(hbar)?;
    let terms: Vec<Complex64> = path_weights
        .iter()
        .zip(actions)
        .map(|(&w, &s)| Complex64::from_polar(w, s / hbar))
        .collect();
    Ok(pairwise_sum(&terms))
}

fn check_hbar(hbar: f64) -> Result<()> {
    if hbar > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter("hbar must be positive".into()))
    }
}

/// Constants of the entropy-weighted sum. `zeta = None` means
/// `1 / |ensemble|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WickParams {
    pub k: f64,
    pub hbar: f64,
    pub w_e: f64,
    pub zeta: Option<f64>,
}

impl Default for WickParams {
    fn default() -> Self {
        WickParams {
            k: 0.0,
            hbar: 1.0,
            w_e: 1.0,
            zeta: None,
        }
    }
}

impl WickParams {
    pub fn zeta_for(&self, ensemble_size: usize) -> f64 {
        self.zeta.unwrap_or(1.0 / ensemble_size.max(1) as f64)
    }
}

/// `ζ Σ_p w_E e^{(i/ħ - k) S_p}`. `ħ = ∞` drops the phase.
pub fn expected_amplitude(actions: &[f64], p: &WickParams) -> Complex64 {
    let zeta = p.zeta_for(actions.len());
    let terms: Vec<Complex64> = actions
        .iter()
        .map(|&s| {
            let phase = if p.hbar.is_infinite() { 0.0 } else { s / p.hbar };
            Complex64::from_polar(p.w_e * (-p.k * s).exp(), phase)
        })
        .collect();
    pairwise_sum(&terms) * zeta
}

/// Kernel `K(source -> sink)` after `steps` applications of the one-step
/// matrix `M_xy = e^{(i/ħ - k) S_step(x, y)}` on `sites` lattice points.
pub fn transfer_matrix_propagator(
    model: &ActionModel,
    sites: usize,
    steps: usize,
    source: usize,
    sink: usize,
    k: f64,
    hbar: f64,
    budget: u64,
) -> Result<Complex64> {
    model.validate()?;
    if !matches!(
        model.kind,
        crate::action::ModelKind::FreeParticle | crate::action::ModelKind::HarmonicOscillator
    ) {
        return Err(Error::BadModelKind(model.kind.name().into()));
    }
    check_hbar(hbar)?;
    if source >= sites || sink >= sites || steps == 0 {
        return Err(Error::InvalidEndpoints(format!(
            "need source, sink < {sites} and steps >= 1"
        )));
    }
    let work = (sites as u128) * (sites as u128) * (steps as u128);
    if work > budget as u128 {
        return Err(Error::BudgetExceeded { budget });
    }
    let m = step_matrix(model, sites, k, hbar);
    let mut v = vec![Complex64::new(0.0, 0.0); sites];
    v[source] = Complex64::new(1.0, 0.0);
    for _ in 0..steps {
        v = (0..sites)
            .map(|y| {
                let terms: Vec<Complex64> = (0..sites).map(|x| v[x] * m[x][y]).collect();
                pairwise_sum(&terms)
            })
            .collect();
    }
    Ok(v[sink])
}

pub fn step_matrix(model: &ActionModel, sites: usize, k: f64, hbar: f64) -> Vec<Vec<Complex64>> {
    (0..sites)
        .map(|x| {
            (0..sites)
                .map(|y| {
                    let s = model.step_action(model.position(x as f64), model.position(y as f64));
                    wick_factor(s, k, hbar)
                })
                .collect()
        })
        .collect()
}

fn wick_factor(s: f64, k: f64, hbar: f64) -> Complex64 {
    let phase = if hbar.is_infinite() { 0.0 } else { s / hbar };
    Complex64::from_polar((-k * s).exp(), phase)
}

/// Draws paths with probability proportional to `e^{-k S}`.
pub trait PathSampler: Sync {
    /// Returns the action of one sampled path.
    fn draw(&self, rng: &mut ChaCha8Rng) -> f64;
    /// `ln Z_P`, the log of `Σ_p e^{-k S_p}`.
    fn log_normalization(&self) -> f64;
}

/// Exact categorical sampling over an enumerated ensemble.
#[derive(Debug, Clone)]
pub struct CategoricalSampler {
    actions: Vec<f64>,
    cumulative: Vec<f64>,
    log_z: f64,
}

impl CategoricalSampler {
    pub fn new(actions: &[f64], k: f64) -> Result<Self> {
        if actions.is_empty() {
            return Err(Error::DegenerateEnsemble("no paths to sample".into()));
        }
        let probs = crate::paths::path_probabilities(actions, k)?;
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let exponents: Vec<f64> = actions.iter().map(|s| -k * s).collect();
        Ok(CategoricalSampler {
            actions: actions.to_vec(),
            cumulative,
            log_z: log_sum_exp(&exponents),
        })
    }
}

impl PathSampler for CategoricalSampler {
    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        let u: f64 = rng.random::<f64>() * self.cumulative[self.cumulative.len() - 1];
        let i = self.cumulative.partition_point(|&c| c <= u).min(self.actions.len() - 1);
        self.actions[i]
    }

    fn log_normalization(&self) -> f64 {
        self.log_z
    }
}

/// Layer-by-layer sampling on a complex whose path action is the sum of
/// per-simplex actions. Transition probabilities come from backward
/// partition functions, so no enumeration is needed.
#[derive(Debug, Clone)]
pub struct AncestralSampler {
    edge_actions: Vec<f64>,
    sources: Vec<usize>,
    next: Vec<Vec<usize>>,
    /// `ln β(σ)`: log of the summed `e^{-k S}` of all completions from σ.
    log_beta: Vec<f64>,
    log_z: f64,
}

impl AncestralSampler {
    /// `sources` and `targets` are column indices in the first and last step.
    pub fn new(
        complex: &BranchedComplex,
        edge_actions: Vec<f64>,
        k: f64,
        sources: &[usize],
        targets: &[usize],
    ) -> Result<Self> {
        let n = complex.top_simplices.len();
        if edge_actions.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: edge_actions.len(),
            });
        }
        let next = successors(complex);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(complex.top_simplices[i].layer_span.0));
        let mut log_beta = vec![f64::NEG_INFINITY; n];
        for &i in &order {
            let own = -k * edge_actions[i];
            log_beta[i] = if targets.contains(&i) {
                own
            } else {
                let tails: Vec<f64> = next[i].iter().map(|&j| log_beta[j]).collect();
                own + log_sum_exp(&tails)
            };
        }
        let starts: Vec<f64> = sources.iter().map(|&s| log_beta[s]).collect();
        let log_z = log_sum_exp(&starts);
        if !log_z.is_finite() {
            return Err(Error::DegenerateEnsemble("no path joins the endpoints".into()));
        }
        Ok(AncestralSampler {
            edge_actions,
            sources: sources.to_vec(),
            next,
            log_beta,
            log_z,
        })
    }

    /// Per-simplex actions from a lattice model: the step action between the
    /// positions of each edge's endpoints.
    pub fn lattice_edge_actions(complex: &BranchedComplex, model: &ActionModel) -> Vec<f64> {
        complex
            .top_simplices
            .iter()
            .map(|s| {
                let pos = |layer: i64| {
                    let vs: Vec<f64> = s
                        .vertex_indices()
                        .iter()
                        .filter(|&&v| complex.vertices[v].layer == layer)
                        .map(|&v| complex.vertices[v].label.first().copied().unwrap_or(0) as f64)
                        .collect();
                    model.position(vs.iter().sum::<f64>() / vs.len() as f64)
                };
                model.step_action(pos(s.layer_span.0), pos(s.layer_span.1))
            })
            .collect()
    }

    fn pick(&self, options: &[usize], rng: &mut ChaCha8Rng) -> usize {
        let logs: Vec<f64> = options.iter().map(|&j| self.log_beta[j]).collect();
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = weights.iter().sum();
        let mut u = rng.random::<f64>() * total;
        for (&j, w) in options.iter().zip(&weights) {
            if u < *w {
                return j;
            }
            u -= w;
        }
        *options
            .iter()
            .zip(&weights)
            .rev()
            .find(|(_, &w)| w > 0.0)
            .map(|(j, _)| j)
            .expect("at least one option has positive weight")
    }

    /// Draws a path as column indices.
    pub fn draw_path(&self, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let mut path = vec![self.pick(&self.sources, rng)];
        loop {
            let cur = *path.last().expect("non-empty");
            let live: Vec<usize> = self.next[cur]
                .iter()
                .copied()
                .filter(|&j| self.log_beta[j].is_finite())
                .collect();
            if live.is_empty() {
                return path;
            }
            path.push(self.pick(&live, rng));
        }
    }

    /// Probability of a path as the product of its transition probabilities.
    pub fn path_probability(&self, path: &[usize]) -> f64 {
        let Some(&first) = path.first() else {
            return 0.0;
        };
        if !self.sources.contains(&first) {
            return 0.0;
        }
        let mut log_p = self.log_beta[first] - self.log_z;
        for w in path.windows(2) {
            if !self.next[w[0]].contains(&w[1]) {
                return 0.0;
            }
            let tails: Vec<f64> = self.next[w[0]].iter().map(|&j| self.log_beta[j]).collect();
            log_p += self.log_beta[w[1]] - log_sum_exp(&tails);
        }
        log_p.exp()
    }

    pub fn path_action(&self, path: &[usize]) -> f64 {
        path.iter().map(|&i| self.edge_actions[i]).sum()
    }
}

impl PathSampler for AncestralSampler {
    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        let path = self.draw_path(rng);
        self.path_action(&path)
    }

    fn log_normalization(&self) -> f64 {
        self.log_z
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: Complex64,
    pub stderr: f64,
    pub stderr_re: f64,
    pub stderr_im: f64,
    pub n_samples: u64,
    pub seed: u64,
    /// `Z_P = Σ_p e^{-k S_p}`.
    pub z_p: f64,
}

/// Importance-sampled `ζ w_E Z_P ⟨e^{i S / ħ}⟩` with paths drawn from
/// `P ∝ e^{-k S}`. Blocks of samples use independent streams and are reduced
/// in block order, so the result does not depend on the thread count.
pub fn monte_carlo_amplitude<S: PathSampler>(
    sampler: &S,
    hbar: f64,
    w_e: f64,
    zeta: f64,
    n: u64,
    seed: u64,
) -> Result<McEstimate> {
    if n == 0 {
        return Err(Error::DegenerateEnsemble("need at least one sample".into()));
    }
    check_hbar(hbar)?;
    let blocks = n.div_ceil(BLOCK_SIZE);
    let partial: Vec<(Moments, Moments)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, b);
            let size = BLOCK_SIZE.min(n - b * BLOCK_SIZE);
            let (mut re, mut im) = (Moments::default(), Moments::default());
            for _ in 0..size {
                let s = sampler.draw(&mut rng);
                let phase = if hbar.is_infinite() { 0.0 } else { s / hbar };
                re.push(phase.cos());
                im.push(phase.sin());
            }
            (re, im)
        })
        .collect();
    let (re, im) = partial
        .into_iter()
        .fold((Moments::default(), Moments::default()), |(a, b), (c, d)| (a.merge(c), b.merge(d)));
    let z_p = sampler.log_normalization().exp();
    let scale = zeta * w_e * z_p;
    let stderr_re = scale.abs() * re.standard_error();
    let stderr_im = scale.abs() * im.standard_error();
    Ok(McEstimate {
        estimate: Complex64::new(re.mean, im.mean) * scale,
        stderr: stderr_re.hypot(stderr_im),
        stderr_re,
        stderr_im,
        n_samples: n,
        seed,
        z_p,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulantReport {
    /// `mean(w e^{iS/ħ})`.
    pub exact: Complex64,
    /// `mean(w) mean(e^{iS/ħ})`.
    pub factorized: Complex64,
    /// `mean(w) e^{i mean(S)/ħ} e^{-Var(S)/(2ħ²)}`.
    pub corrected: Complex64,
    /// Standard error of `exact` (modulus of the per-component errors).
    pub exact_stderr: f64,
    /// `exact - corrected`: what the variance term leaves unexplained.
    pub residual: Complex64,
}

pub fn cumulant_corrected_expectation(weights: &[f64], actions: &[f64], hbar: f64) -> Result<CumulantReport> {
    if weights.len() != actions.len() {
        return Err(Error::DimensionMismatch {
            expected: actions.len(),
            got: weights.len(),
        });
    }
    if weights.len() < 2 {
        return Err(Error::DegenerateEnsemble("need at least two samples".into()));
    }
    check_hbar(hbar)?;
    let n = weights.len() as f64;
    let phases: Vec<Complex64> = actions.iter().map(|&s| Complex64::from_polar(1.0, s / hbar)).collect();
    let weighted: Vec<Complex64> = phases.iter().zip(weights).map(|(p, &w)| p * w).collect();
    let exact = pairwise_sum(&weighted) / n;
    let mean_w = pairwise_sum(weights) / n;
    let factorized = pairwise_sum(&phases) / n * mean_w;
    let mut s_moments = Moments::default();
    actions.iter().for_each(|&s| s_moments.push(s));
    let corrected = Complex64::from_polar(
        mean_w * (-s_moments.variance() / (2.0 * hbar * hbar)).exp(),
        s_moments.mean / hbar,
    );
    let (mut re, mut im) = (Moments::default(), Moments::default());
    for z in &weighted {
        re.push(z.re);
        im.push(z.im);
    }
    Ok(CumulantReport {
        exact,
        factorized,
        corrected,
        exact_stderr: re.standard_error().hypot(im.standard_error()),
        residual: exact - corrected,
    })
}
