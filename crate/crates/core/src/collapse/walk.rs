//! Unbiased weight exchange between outcomes until one outcome holds all
//! the weight above the threshold.
//!
//! Each step picks an ordered pair of live outcomes uniformly and moves
//! `a = min(δ, w_i, w_j)` from one to the other with probability one half
//! each way. Every weight is then a bounded martingale, so by optional
//! stopping outcome `r` wins with probability `w_r / w_T`.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::numeric::stream_rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseState {
    pub outcome_weights: Vec<f64>,
    pub step: u64,
    pub absorbed: Option<usize>,
}

impl CollapseState {
    pub fn new(outcome_weights: Vec<f64>) -> Self {
        CollapseState {
            outcome_weights,
            step: 0,
            absorbed: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkOptions {
    /// Largest weight moved per step.
    pub step_scale: f64,
    /// Outcomes at or below this weight are dead.
    pub threshold: f64,
    pub max_steps: u64,
    /// Strength of the optional bias toward higher allocation entropy.
    /// Zero gives the unbiased walk.
    pub drift: f64,
}

impl Default for WalkOptions {
    fn default() -> Self {
        WalkOptions {
            step_scale: 0.05,
            threshold: 0.0,
            max_steps: 10_000_000,
            drift: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollapseRun {
    pub outcome: usize,
    pub steps: u64,
    /// Weights after every step, starting with the initial state. Empty when
    /// recording is off.
    pub trajectory: Vec<Vec<f64>>,
}

fn validate(weights: &[f64], opts: &WalkOptions) -> Result<()> {
    if weights.len() < 2 {
        return Err(Error::BadInitialState("need at least two outcomes".into()));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::BadInitialState("weights must be finite and non-negative".into()));
    }
    if weights.iter().sum::<f64>() <= 0.0 {
        return Err(Error::BadInitialState("total weight must be positive".into()));
    }
    if !(opts.step_scale > 0.0 && opts.step_scale.is_finite()) {
        return Err(Error::InvalidParameter("step_scale must be positive".into()));
    }
    if !(opts.threshold >= 0.0 && opts.threshold.is_finite()) {
        return Err(Error::InvalidParameter("threshold must be non-negative".into()));
    }
    if !(opts.drift >= 0.0 && opts.drift.is_finite()) {
        return Err(Error::InvalidParameter("drift must be non-negative".into()));
    }
    Ok(())
}

/// Slope of the allocation entropy `ln(w/δ + 1)` by central differences.
fn entropy_gradient(w: f64, delta: f64) -> f64 {
    let s = |x: f64| (x.max(0.0) / delta + 1.0).ln();
    (s(w + delta) - s(w - delta)) / (2.0 * delta)
}

/// Runs the walk with a caller-supplied random source.
pub fn simulate_collapse_with<R: Rng>(
    initial: &CollapseState,
    opts: &WalkOptions,
    rng: &mut R,
    record: bool,
) -> Result<CollapseRun> {
    validate(&initial.outcome_weights, opts)?;
    let mut w = initial.outcome_weights.clone();
    let mut trajectory = Vec::new();
    if record {
        trajectory.push(w.clone());
    }
    let mut alive: Vec<usize> = (0..w.len()).filter(|&r| w[r] > opts.threshold).collect();
    if alive.is_empty() {
        return Err(Error::BadInitialState("every outcome is below the threshold".into()));
    }
    let mut steps = 0u64;
    while alive.len() > 1 {
        if steps >= opts.max_steps {
            return Err(Error::NoAbsorption(opts.max_steps));
        }
        let i = alive[rng.random_range(0..alive.len())];
        let j = loop {
            let j = alive[rng.random_range(0..alive.len())];
            if j != i {
                break j;
            }
        };
        let a = opts.step_scale.min(w[i]).min(w[j]);
        let p_gain = if opts.drift == 0.0 {
            0.5
        } else {
            let g = entropy_gradient(w[i], opts.step_scale) - entropy_gradient(w[j], opts.step_scale);
            (0.5 + opts.drift * g * opts.step_scale).clamp(0.0, 1.0)
        };
        if rng.random::<f64>() < p_gain {
            w[i] += a;
            w[j] -= a;
        } else {
            w[i] -= a;
            w[j] += a;
        }
        steps += 1;
        if record {
            trajectory.push(w.clone());
        }
        alive.retain(|&r| w[r] > opts.threshold);
    }
    Ok(CollapseRun {
        outcome: alive[0],
        steps: initial.step + steps,
        trajectory,
    })
}

/// One recorded walk driven by stream 0 of `seed`.
pub fn simulate_collapse(initial: &CollapseState, opts: &WalkOptions, seed: u64) -> Result<CollapseRun> {
    simulate_collapse_with(initial, opts, &mut stream_rng(seed, 0), true)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BornReport {
    pub n_trials: u64,
    pub seed: u64,
    /// `|ψ_r|²`.
    pub probabilities: Vec<f64>,
    pub counts: Vec<u64>,
    pub frequencies: Vec<f64>,
    /// Three-sigma binomial bands around each probability.
    pub bands: Vec<(f64, f64)>,
    pub within_bands: bool,
    pub chi_square: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Outcome statistics of the walk started from weights `w_T |ψ_r|²`.
/// Trials use per-trial random streams and integer tallies, so the report is
/// independent of the thread count.
pub fn born_statistics(
    components: &[Vec<Complex64>],
    n_trials: u64,
    seed: u64,
    total_weight: f64,
    opts: &WalkOptions,
) -> Result<BornReport> {
    let Some(dim) = components.first().map(Vec::len) else {
        return Err(Error::BadInitialState("no components".into()));
    };
    if let Some(c) = components.iter().find(|c| c.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: c.len(),
        });
    }
    for a in 0..components.len() {
        for b in a + 1..components.len() {
            let overlap = inner(&components[a], &components[b]).norm();
            if overlap > 1e-9 {
                return Err(Error::NonOrthogonalDecomposition { a, b, overlap });
            }
        }
    }
    let probabilities: Vec<f64> = components.iter().map(|c| inner(c, c).re).collect();
    let norm: f64 = probabilities.iter().sum();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::UnnormalizedState(norm));
    }
    if !(total_weight > 0.0 && total_weight.is_finite()) {
        return Err(Error::InvalidParameter("total weight must be positive".into()));
    }

    let outcomes = probabilities.len();
    let counts: Vec<u64> = if outcomes == 1 {
        vec![n_trials]
    } else {
        let initial = CollapseState::new(probabilities.iter().map(|p| p * total_weight).collect());
        validate(&initial.outcome_weights, opts)?;
        (0..n_trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = stream_rng(seed, trial);
                simulate_collapse_with(&initial, opts, &mut rng, false).map(|r| r.outcome)
            })
            .try_fold(
                || vec![0u64; outcomes],
                |mut acc, r| {
                    acc[r?] += 1;
                    Ok::<_, Error>(acc)
                },
            )
            .try_reduce(
                || vec![0u64; outcomes],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    Ok(a)
                },
            )?
    };

    let n = n_trials as f64;
    let frequencies: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    let bands: Vec<(f64, f64)> = probabilities
        .iter()
        .map(|&p| {
            let half = 3.0 * (p * (1.0 - p) / n).sqrt();
            (p - half, p + half)
        })
        .collect();
    let within_bands = frequencies
        .iter()
        .zip(&bands)
        .all(|(f, (lo, hi))| lo <= f && f <= hi);
    let mut chi_square = 0.0;
    let mut cells = 0usize;
    for (&c, &p) in counts.iter().zip(&probabilities) {
        if p > 0.0 {
            let expected = p * n;
            chi_square += (c as f64 - expected).powi(2) / expected;
            cells += 1;
        }
    }
    let degrees_of_freedom = cells.saturating_sub(1);
    let p_value = if degrees_of_freedom == 0 {
        1.0
    } else {
        ChiSquared::new(degrees_of_freedom as f64)
            .map(|d| d.sf(chi_square))
            .unwrap_or(f64::NAN)
    };
    Ok(BornReport {
        n_trials,
        seed,
        probabilities,
        counts,
        frequencies,
        bands,
        within_bands,
        chi_square,
        degrees_of_freedom,
        p_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn basis(probs: &[f64]) -> Vec<Vec<Complex64>> {
        let n = probs.len();
        probs
            .iter()
            .enumerate()
            .map(|(r, p)| {
                let mut v = vec![Complex64::new(0.0, 0.0); n];
                v[r] = Complex64::from_polar(p.sqrt(), r as f64);
                v
            })
            .collect()
    }

    #[test]
    fn already_collapsed_state_absorbs_immediately() {
        let run = simulate_collapse(&CollapseState::new(vec![2.0, 0.0, 0.0]), &WalkOptions::default(), 1).unwrap();
        assert_eq!((run.outcome, run.steps), (0, 0));
    }

    #[test]
    fn rejects_bad_states() {
        let opts = WalkOptions::default();
        assert!(matches!(
            simulate_collapse(&CollapseState::new(vec![1.0]), &opts, 0),
            Err(Error::BadInitialState(_))
        ));
        assert!(matches!(
            simulate_collapse(&CollapseState::new(vec![1.0, -0.5]), &opts, 0),
            Err(Error::BadInitialState(_))
        ));
        let capped = WalkOptions {
            max_steps: 3,
            step_scale: 1e-3,
            ..opts
        };
        assert_eq!(
            simulate_collapse(&CollapseState::new(vec![0.5, 0.5]), &capped, 0),
            Err(Error::NoAbsorption(3))
        );
    }

    #[test]
    fn trajectories_conserve_total_weight() {
        let run = simulate_collapse(&CollapseState::new(vec![0.2, 0.5, 0.3]), &WalkOptions::default(), 9).unwrap();
        for w in &run.trajectory {
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(w.iter().all(|&x| x >= 0.0));
        }
        let last = run.trajectory.last().unwrap();
        assert!((last[run.outcome] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn symmetric_start_is_fair() {
        let r = born_statistics(&basis(&[0.5, 0.5]), 20_000, 11, 1.0, &WalkOptions::default()).unwrap();
        assert!(r.within_bands);
    }

    #[test]
    fn weights_are_martingales() {
        let init = CollapseState::new(vec![0.25, 0.75]);
        let opts = WalkOptions::default();
        let trials = 4000;
        let at = 20usize;
        let mut values = Vec::with_capacity(trials);
        for t in 0..trials as u64 {
            let run = simulate_collapse_with(&init, &opts, &mut stream_rng(3, t), true).unwrap();
            let idx = at.min(run.trajectory.len() - 1);
            values.push(run.trajectory[idx][0]);
        }
        let mean = values.iter().sum::<f64>() / trials as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
        assert!((mean - 0.25).abs() < 4.0 * (var / trials as f64).sqrt());
    }

    #[test]
    fn born_rule_statistics() {
        let single = born_statistics(&basis(&[1.0]), 100, 0, 1.0, &WalkOptions::default()).unwrap();
        assert_eq!(single.frequencies, vec![1.0]);
        let r = born_statistics(&basis(&[0.25, 0.75]), 20_000, 7, 1.0, &WalkOptions::default()).unwrap();
        assert!(r.within_bands, "{r:?}");
        let r = born_statistics(&basis(&[0.5, 1.0 / 3.0, 1.0 / 6.0]), 20_000, 8, 1.0, &WalkOptions::default()).unwrap();
        assert!(r.within_bands, "{r:?}");
    }

    #[test]
    fn born_rejects_invalid_decompositions() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let a = vec![Complex64::new(h, 0.0), Complex64::new(0.0, 0.0)];
        let b = vec![Complex64::new(h * 0.5, 0.0), Complex64::new(h * 0.5, 0.0)];
        assert!(matches!(
            born_statistics(&[a.clone(), b], 10, 0, 1.0, &WalkOptions::default()),
            Err(Error::NonOrthogonalDecomposition { a: 0, b: 1, .. })
        ));
        let c = vec![Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0)];
        assert!(matches!(
            born_statistics(&[a, c], 10, 0, 1.0, &WalkOptions::default()),
            Err(Error::UnnormalizedState(_))
        ));
    }

    #[test]
    fn born_is_thread_count_independent() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| born_statistics(&basis(&[0.2, 0.3, 0.5]), 3000, 5, 1.0, &WalkOptions::default()).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn walk_conserves_weight(ws in prop::collection::vec(0.0f64..3.0, 2..5), seed in any::<u64>()) {
            prop_assume!(ws.iter().sum::<f64>() > 0.1);
            let total: f64 = ws.iter().sum();
            let opts = WalkOptions { step_scale: 0.2, ..WalkOptions::default() };
            let run = simulate_collapse(&CollapseState::new(ws.clone()), &opts, seed).unwrap();
            for w in &run.trajectory {
                prop_assert!((w.iter().sum::<f64>() - total).abs() < 1e-9);
                prop_assert!(w.iter().all(|&x| x >= 0.0));
            }
            prop_assert!(ws[run.outcome] > 0.0);
        }
    }
}
