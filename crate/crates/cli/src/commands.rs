//! One function per subcommand. Each returns a serializable result, an
//! optional CSV table and the exit code.

use std::collections::BTreeMap;

use branchsum::action::{
    entropic_action, lattice_action, microstate_entropy, path_trajectory, ActionModel, FieldEnsembleModel, ModelKind,
};
use branchsum::collapse::{
    born_statistics, counted_toy_entropies, entropy_deficit_scan, log_odds_statistic, simulate_collapse,
    tanh_response, toy_entropies, CollapseState, ToyModelSpec, WalkOptions,
};
use branchsum::complex::{build_complex, Number};
use branchsum::paths::{count_paths, enumerate_paths, incidence_matrix, PathSet};
use branchsum::propagator::{
    amplitude_sum, cumulant_corrected_expectation, expected_amplitude, monte_carlo_amplitude,
    transfer_matrix_propagator, AncestralSampler, CategoricalSampler, McEstimate, WickParams,
};
use branchsum::rational::{self, format_rational, parse_rational, Rat};
use branchsum::weights::{count_with, feasible_region, null_space, weight_entropy, CountOptions, FeasibilityReport};
use branchsum::{templates, BranchedComplex};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::Value;

use crate::config::{Parameters, RunConfig, Subcommand};
use crate::error::{CliError, EXIT_INFEASIBLE, EXIT_OK};

/// A finished computation before formatting.
pub struct Computed {
    pub result: Value,
    /// Header and rows for CSV output; `None` falls back to JSON.
    pub table: Option<(Vec<String>, Vec<Vec<String>>)>,
    /// Extra `# ` lines placed before the CSV header.
    pub notes: Vec<String>,
    pub exit_code: i32,
}

impl Computed {
    fn ok<T: Serialize>(result: &T) -> Result<Self, CliError> {
        Ok(Computed {
            result: to_value(result)?,
            table: None,
            notes: Vec::new(),
            exit_code: EXIT_OK,
        })
    }

    fn with_table(mut self, header: Vec<String>, rows: Vec<Vec<String>>) -> Self {
        self.table = Some((header, rows));
        self
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::config(format!("cannot serialize report: {e}")))
}

fn num(x: f64) -> String {
    serde_json::to_string(&x).unwrap_or_else(|_| "null".into())
}

fn rat(text: &str, what: &str) -> Result<Rat, CliError> {
    parse_rational(text).map_err(|e| CliError::config(format!("{what}: {e}")))
}

pub fn dispatch(cfg: &RunConfig) -> Result<Computed, CliError> {
    validate(&cfg.parameters)?;
    match cfg.subcommand {
        Subcommand::Check => check(cfg),
        Subcommand::Nullspace => nullspace(cfg),
        Subcommand::Count => count(cfg),
        Subcommand::Paths => paths(cfg),
        Subcommand::Propagate => propagate(cfg),
        Subcommand::Toy01 => toy01(cfg),
        Subcommand::Collapse => collapse(cfg),
        Subcommand::Born => born(cfg),
        Subcommand::Deficit => deficit(cfg),
        Subcommand::Nonlinearity => nonlinearity(cfg),
    }
}

/// Range checks shared by every subcommand.
fn validate(p: &Parameters) -> Result<(), CliError> {
    let bad = |m: &str| Err(CliError::config(m));
    if p.budget == 0 {
        return bad("budget must be positive");
    }
    if p.cap == 0 {
        return bad("cap must be positive");
    }
    if !(p.hbar.is_finite() && p.hbar > 0.0) {
        return bad("hbar must be positive and finite");
    }
    if !(p.k.is_finite() && p.k >= 0.0) {
        return bad("k must be non-negative");
    }
    if !p.w_e.is_finite() {
        return bad("w_e must be finite");
    }
    if let Some(z) = p.zeta {
        if !z.is_finite() {
            return bad("zeta must be finite");
        }
    }
    if !(p.b.is_finite() && p.b > 0.0) {
        return bad("b must be positive");
    }
    if !p.alpha.is_finite() {
        return bad("alpha must be finite");
    }
    if p.n_samples == 0 || p.n_trials == 0 {
        return bad("sample and trial counts must be positive");
    }
    if !(p.u0.is_finite() && p.u0 > 0.0) {
        return bad("u0 must be positive");
    }
    if !(p.u_min.is_finite() && p.u_max.is_finite() && p.u_min < p.u_max) || p.u_points < 2 {
        return bad("need u_min < u_max and at least two grid points");
    }
    let dw = rat(&p.dw, "dw")?;
    if dw <= Rat::from_integer(0.into()) {
        return bad("dw must be positive");
    }
    Ok(())
}

/// Reads the input file and applies `--lower-bound` / `--total-weight`.
fn load_complex(cfg: &RunConfig) -> Result<BranchedComplex, CliError> {
    let path = cfg
        .input_path
        .as_ref()
        .ok_or_else(|| CliError::config(format!("{:?} needs --input", cfg.subcommand)))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let c = BranchedComplex::from_json(&text).map_err(|e| CliError::input(e.to_string()))?;
    with_overrides(&c, &cfg.parameters)
}

fn with_overrides(c: &BranchedComplex, p: &Parameters) -> Result<BranchedComplex, CliError> {
    if p.lower_bound.is_none() && p.total_weight.is_none() {
        return Ok(c.clone());
    }
    let mut desc = c.to_description();
    if let Some(l) = &p.lower_bound {
        desc.lower_bound = Number::from_rational(&rat(l, "lower_bound")?);
    }
    if let Some(t) = &p.total_weight {
        desc.total_weight = Some(Number::from_rational(&rat(t, "total_weight")?));
    }
    build_complex(&desc).map_err(|e| CliError::input(e.to_string()))
}

#[derive(Serialize)]
struct CheckResult {
    status: &'static str,
    conservation: bool,
    /// `(D w)_τ` per shared face.
    residual: BTreeMap<String, String>,
    bounds_ok: bool,
    lower_bound: String,
    layer_totals: BTreeMap<i64, String>,
    totals_ok: bool,
}

fn check(cfg: &RunConfig) -> Result<Computed, CliError> {
    let mut c = load_complex(cfg)?;
    if let Some(ws) = &cfg.parameters.weights {
        let ws = ws.iter().map(|w| rat(w, "weights")).collect::<Result<Vec<_>, _>>()?;
        c = c.with_weights(&ws).map_err(|e| CliError::input(e.to_string()))?;
    }
    let w = c
        .weight_vector()
        .ok_or_else(|| CliError::input("check needs a weight on every simplex (file or --weights)"))?;
    let d = c.boundary_matrix();
    let r = d.apply(&w);
    let conservation = r.iter().all(|x| *x == Rat::from_integer(0.into()));
    let bounds_ok = w.iter().all(|x| *x >= c.lower_bound);
    let totals = c.layer_totals();
    let first = totals.values().next().cloned();
    let totals_ok = totals.values().all(|t| Some(t) == first.as_ref())
        && match (&c.total_weight, &first) {
            (Some(wt), Some(f)) => wt == f,
            _ => true,
        };
    let pass = conservation && bounds_ok && totals_ok;
    let result = CheckResult {
        status: if pass { "PASS" } else { "FAIL" },
        conservation,
        residual: d.face_ids.iter().cloned().zip(r.iter().map(format_rational)).collect(),
        bounds_ok,
        lower_bound: format_rational(&c.lower_bound),
        layer_totals: totals.iter().map(|(t, v)| (*t, format_rational(v))).collect(),
        totals_ok,
    };
    let rows = result.residual.iter().map(|(f, v)| vec![f.clone(), v.clone()]).collect();
    let mut out = Computed::ok(&result)?.with_table(vec!["face".into(), "residual".into()], rows);
    out.notes.push(format!("status={}", result.status));
    if !pass {
        out.exit_code = EXIT_INFEASIBLE;
    }
    Ok(out)
}

#[derive(Serialize)]
struct NullspaceResult {
    rank: usize,
    nullity: usize,
    simplex_ids: Vec<String>,
    face_ids: Vec<String>,
    basis: Vec<Vec<String>>,
}

fn nullspace(cfg: &RunConfig) -> Result<Computed, CliError> {
    let c = load_complex(cfg)?;
    let d = c.boundary_matrix();
    let ns = null_space(&d);
    let basis: Vec<Vec<String>> = ns.basis_vectors.iter().map(|v| v.iter().map(format_rational).collect()).collect();
    let result = NullspaceResult {
        rank: ns.rank,
        nullity: ns.nullity,
        simplex_ids: d.simplex_ids.clone(),
        face_ids: d.face_ids.clone(),
        basis: basis.clone(),
    };
    let mut out = Computed::ok(&result)?.with_table(d.simplex_ids.clone(), basis);
    out.notes.push(format!("rank={} nullity={}", ns.rank, ns.nullity));
    Ok(out)
}

#[derive(Serialize)]
struct CountResult {
    rank: usize,
    nullity: usize,
    lower_bound: String,
    total_weight: String,
    dw: String,
    pinned: usize,
    count: u128,
    /// `ln count`; absent when no configuration exists.
    entropy_nats: Option<f64>,
    feasibility: FeasibilityReport,
}

fn count(cfg: &RunConfig) -> Result<Computed, CliError> {
    let c = load_complex(cfg)?;
    let p = &cfg.parameters;
    let total = c
        .total_weight
        .clone()
        .ok_or_else(|| CliError::config("count needs total_weight (input file or --total-weight)"))?;
    let dw = rat(&p.dw, "dw")?;
    let d = c.boundary_matrix();
    let ns = null_space(&d);
    let opts = CountOptions {
        budget: p.budget,
        pinned: c.weights.clone(),
    };
    let n = count_with(&d, &c.lower_bound, &total, &dw, &opts)?;
    let feasibility = feasible_region(&d, &c.lower_bound, &total)?;
    let result = CountResult {
        rank: ns.rank,
        nullity: ns.nullity,
        lower_bound: format_rational(&c.lower_bound),
        total_weight: format_rational(&total),
        dw: format_rational(&dw),
        pinned: c.weights.iter().filter(|w| w.is_some()).count(),
        count: n,
        entropy_nats: weight_entropy(n).ok(),
        feasibility,
    };
    let row = vec![
        n.to_string(),
        result.entropy_nats.map_or_else(String::new, num),
        result.feasibility.feasible.to_string(),
    ];
    let mut out = Computed::ok(&result)?.with_table(
        vec!["count".into(), "entropy_nats".into(), "feasible".into()],
        vec![row],
    );
    if n == 0 {
        out.exit_code = EXIT_INFEASIBLE;
    }
    Ok(out)
}

#[derive(Serialize)]
struct PathsResult {
    count: u128,
    simplex_ids: Vec<String>,
    source_config: Vec<String>,
    target_config: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    paths: Option<Vec<Vec<String>>>,
    /// `A[σ][i]`: rows follow `simplex_ids`, columns the path order.
    incidence: Vec<Vec<u8>>,
}

fn paths(cfg: &RunConfig) -> Result<Computed, CliError> {
    let c = load_complex(cfg)?;
    let n = count_paths(&c, None, None)?;
    let ps = enumerate_paths(&c, None, None, cfg.parameters.cap)?;
    let a = incidence_matrix(&ps);
    let result = PathsResult {
        count: n,
        simplex_ids: a.simplex_ids.clone(),
        source_config: ps.source_config.clone(),
        target_config: ps.target_config.clone(),
        paths: cfg
            .parameters
            .list_paths
            .then(|| ps.paths.iter().map(|p| p.simplex_ids.clone()).collect()),
        incidence: a.entries.clone(),
    };
    let mut header = vec!["simplex_id".to_string()];
    header.extend((0..ps.len()).map(|i| format!("p{i}")));
    let rows = a
        .simplex_ids
        .iter()
        .zip(&a.entries)
        .map(|(id, row)| std::iter::once(id.clone()).chain(row.iter().map(u8::to_string)).collect())
        .collect();
    let mut out = Computed::ok(&result)?.with_table(header, rows);
    out.notes.push(format!("paths={n}"));
    if cfg.parameters.list_paths {
        for (i, p) in ps.paths.iter().enumerate() {
            out.notes.push(format!("p{i}={}", p.simplex_ids.join(" ")));
        }
    }
    Ok(out)
}

fn action_model(p: &Parameters) -> Result<ActionModel, CliError> {
    let model = ActionModel {
        kind: p.model,
        m: p.m,
        omega: p.omega,
        eps: p.eps,
        a: p.a,
        alpha: p.alpha,
        b: Some(p.b),
        center: p.center,
        table: p.table.clone(),
    };
    model.validate().map_err(|e| CliError::config(e.to_string()))?;
    Ok(model)
}

fn path_actions(
    complex: &BranchedComplex,
    ps: &PathSet,
    model: &ActionModel,
    p: &Parameters,
) -> Result<Vec<f64>, CliError> {
    match model.kind {
        ModelKind::FreeParticle | ModelKind::HarmonicOscillator => ps
            .paths
            .iter()
            .map(|path| Ok(lattice_action(&path_trajectory(complex, path, model), model)?))
            .collect(),
        ModelKind::Table => {
            let t = model.table.clone().unwrap_or_default();
            if t.len() != ps.len() {
                return Err(CliError::config(format!(
                    "table model has {} actions for {} paths",
                    t.len(),
                    ps.len()
                )));
            }
            Ok(t)
        }
        ModelKind::Entropic => {
            let dw = rat(&p.dw, "dw")?;
            let field = FieldEnsembleModel::new(p.b)?;
            ps.paths
                .iter()
                .map(|path| {
                    let s = microstate_entropy(path, complex, &dw, &field, p.budget)?;
                    Ok(entropic_action(s, model.alpha))
                })
                .collect()
        }
    }
}

#[derive(Serialize)]
struct Contribution {
    path: String,
    action: f64,
    weight: f64,
    term: Complex64,
}

#[derive(Serialize)]
struct EnsembleReport {
    model: ActionModel,
    n_paths: u128,
    enumerated: bool,
    zeta: f64,
    /// `Σ w_E e^{-k S} e^{iS/ħ}` over the enumerated paths.
    z_exact: Option<Complex64>,
    /// `ζ Σ w_E e^{(i/ħ - k) S}`.
    expected_amplitude: Option<Complex64>,
    /// Lattice kernel `Σ e^{(i/ħ - k) S}` from repeated one-step matrices.
    transfer_matrix: Option<Complex64>,
    monte_carlo: McEstimate,
    cumulant: Option<branchsum::propagator::CumulantReport>,
}

fn propagate(cfg: &RunConfig) -> Result<Computed, CliError> {
    let p = &cfg.parameters;
    let model = action_model(p)?;
    let lattice_kind = matches!(model.kind, ModelKind::FreeParticle | ModelKind::HarmonicOscillator);
    let (complex, from, to) = if cfg.input_path.is_some() {
        (load_complex(cfg)?, None, None)
    } else {
        let sink = p.sink.unwrap_or(p.sites.saturating_sub(1));
        if p.sites == 0 || p.steps == 0 || p.source >= p.sites || sink >= p.sites {
            return Err(CliError::config("need sites, steps >= 1 and source, sink < sites"));
        }
        let c = with_overrides(&templates::lattice(p.sites, p.steps), p)?;
        let from: Vec<String> = (0..p.sites).map(|j| format!("e0_{}_{j}", p.source)).collect();
        let to: Vec<String> = (0..p.sites).map(|i| format!("e{}_{i}_{sink}", p.steps - 1)).collect();
        (c, Some(from), Some(to))
    };
    let n_paths = count_paths(&complex, from.as_deref(), to.as_deref())?;
    let wick = WickParams {
        k: p.k,
        hbar: p.hbar,
        w_e: p.w_e,
        zeta: p.zeta,
    };
    let transfer = if cfg.input_path.is_none() && lattice_kind {
        let sink = p.sink.unwrap_or(p.sites - 1);
        Some(transfer_matrix_propagator(&model, p.sites, p.steps, p.source, sink, p.k, p.hbar, p.budget)?)
    } else {
        None
    };

    let mut contributions = Vec::new();
    let report = if n_paths <= p.cap as u128 {
        let ps = enumerate_paths(&complex, from.as_deref(), to.as_deref(), p.cap)?;
        if ps.is_empty() {
            return Err(CliError {
                code: EXIT_INFEASIBLE,
                message: "no path joins the endpoints".into(),
            });
        }
        let actions = path_actions(&complex, &ps, &model, p)?;
        let weights: Vec<f64> = actions.iter().map(|s| p.w_e * (-p.k * s).exp()).collect();
        let z_exact = amplitude_sum(&weights, &actions, p.hbar)?;
        for ((path, &s), &w) in ps.paths.iter().zip(&actions).zip(&weights) {
            contributions.push(Contribution {
                path: path.simplex_ids.join(" "),
                action: s,
                weight: w,
                term: Complex64::from_polar(w, s / p.hbar),
            });
        }
        let sampler = CategoricalSampler::new(&actions, p.k)?;
        let zeta = wick.zeta_for(actions.len());
        EnsembleReport {
            model,
            n_paths,
            enumerated: true,
            zeta,
            z_exact: Some(z_exact),
            expected_amplitude: Some(expected_amplitude(&actions, &wick)),
            transfer_matrix: transfer,
            monte_carlo: monte_carlo_amplitude(&sampler, p.hbar, p.w_e, zeta, p.n_samples, p.seed)?,
            cumulant: cumulant_corrected_expectation(&weights, &actions, p.hbar).ok(),
        }
    } else {
        if !lattice_kind {
            return Err(branchsum::Error::PathExplosion {
                count: n_paths,
                cap: p.cap,
            }
            .into());
        }
        let ids = complex.simplex_ids();
        let index = |names: &Option<Vec<String>>, step: i64| -> Vec<usize> {
            match names {
                Some(ns) => ns.iter().filter_map(|n| ids.iter().position(|i| i == n)).collect(),
                None => complex.simplices_in_step(step),
            }
        };
        let (first, last) = complex.layer_range();
        let sources = index(&from, first);
        let targets = index(&to, last - 1);
        let edges = AncestralSampler::lattice_edge_actions(&complex, &model);
        let sampler = AncestralSampler::new(&complex, edges, p.k, &sources, &targets)?;
        let zeta = wick.zeta_for(usize::try_from(n_paths).unwrap_or(usize::MAX));
        EnsembleReport {
            model,
            n_paths,
            enumerated: false,
            zeta,
            z_exact: None,
            expected_amplitude: None,
            transfer_matrix: transfer,
            monte_carlo: monte_carlo_amplitude(&sampler, p.hbar, p.w_e, zeta, p.n_samples, p.seed)?,
            cumulant: None,
        }
    };
    let rows = contributions
        .iter()
        .map(|c| vec![c.path.clone(), num(c.action), num(c.weight), num(c.term.re), num(c.term.im)])
        .collect();
    let mut out = Computed::ok(&report)?.with_table(
        ["path", "action", "weight", "re", "im"].map(String::from).to_vec(),
        rows,
    );
    let mc = &report.monte_carlo;
    out.notes.push(format!(
        "monte_carlo re={} im={} stderr={}",
        num(mc.estimate.re),
        num(mc.estimate.im),
        num(mc.stderr)
    ));
    if let Some(z) = report.z_exact {
        out.notes.push(format!("z_exact re={} im={}", num(z.re), num(z.im)));
    }
    Ok(out)
}

#[derive(Serialize)]
struct ToyResult {
    spec: ToyModelSpec,
    entropies: branchsum::collapse::ToyEntropies,
    counted: branchsum::collapse::CountedToy,
    /// Counted verdict: `S_B > S_A` with the lower field bound of `M_B`.
    collapse_favorable_counted: bool,
    verdict: &'static str,
}

fn toy01(cfg: &RunConfig) -> Result<Computed, CliError> {
    let p = &cfg.parameters;
    let f = |s: &Option<String>, default: &str, what: &str| -> Result<f64, CliError> {
        Ok(rational::to_f64(&rat(s.as_deref().unwrap_or(default), what)?))
    };
    let spec = ToyModelSpec {
        b: p.b,
        lower_bound: f(&p.lower_bound, "1", "lower_bound")?,
        total_weight: f(&p.total_weight, "6", "total_weight")?,
        steps: p.steps,
        dw: rational::to_f64(&rat(&p.dw, "dw")?),
    };
    let entropies = toy_entropies(&spec)?;
    let counted = counted_toy_entropies(&spec, p.budget)?;
    let favorable = counted.s_b_weight + counted.s_b_field > counted.s_a;
    let result = ToyResult {
        spec,
        entropies,
        counted,
        collapse_favorable_counted: favorable,
        verdict: if favorable {
            "collapsed state entropically favorable"
        } else {
            "independent branches entropically favorable"
        },
    };
    let e = &result.entropies;
    let c = &result.counted;
    let rows = vec![
        vec!["s_a".into(), num(e.s_a)],
        vec!["s_b_weight".into(), num(e.s_b_weight)],
        vec!["s_b_field_lower".into(), num(e.s_b_field_bounds.0)],
        vec!["s_b_field_upper".into(), num(e.s_b_field_bounds.1)],
        vec!["threshold".into(), num(e.threshold)],
        vec!["counted_s_a".into(), num(c.s_a)],
        vec!["counted_s_b_weight".into(), num(c.s_b_weight)],
        vec!["counted_s_b_field".into(), num(c.s_b_field)],
    ];
    let mut out = Computed::ok(&result)?.with_table(vec!["quantity".into(), "nats".into()], rows);
    out.notes.push(format!("verdict={}", result.verdict));
    Ok(out)
}

fn walk_options(p: &Parameters) -> WalkOptions {
    WalkOptions {
        step_scale: p.step_scale,
        threshold: p.threshold,
        max_steps: p.max_steps,
        drift: p.drift,
    }
}

fn collapse(cfg: &RunConfig) -> Result<Computed, CliError> {
    let p = &cfg.parameters;
    let run = simulate_collapse(&CollapseState::new(p.initial_weights.clone()), &walk_options(p), p.seed)?;
    let mut header = vec!["step".to_string()];
    header.extend((1..=p.initial_weights.len()).map(|r| format!("w_{r}")));
    let rows = run
        .trajectory
        .iter()
        .enumerate()
        .map(|(i, w)| std::iter::once(i.to_string()).chain(w.iter().map(|&x| num(x))).collect())
        .collect();
    let mut out = Computed::ok(&run)?.with_table(header, rows);
    out.notes.push(format!("outcome={} steps={}", run.outcome + 1, run.steps));
    Ok(out)
}

fn born(cfg: &RunConfig) -> Result<Computed, CliError> {
    let p = &cfg.parameters;
    if p.probs.iter().any(|&x| !(x.is_finite() && x >= 0.0)) {
        return Err(CliError::config("probabilities must be non-negative"));
    }
    let r = p.probs.len();
    let components: Vec<Vec<Complex64>> = p
        .probs
        .iter()
        .enumerate()
        .map(|(i, &q)| {
            let mut v = vec![Complex64::new(0.0, 0.0); r];
            v[i] = Complex64::new(q.sqrt(), 0.0);
            v
        })
        .collect();
    let total = rational::to_f64(&rat(p.total_weight.as_deref().unwrap_or("1"), "total_weight")?);
    let report = born_statistics(&components, p.n_trials, p.seed, total, &walk_options(p))?;
    let rows = (0..r)
        .map(|i| {
            vec![
                (i + 1).to_string(),
                num(report.probabilities[i]),
                report.counts[i].to_string(),
                num(report.frequencies[i]),
                num(report.bands[i].0),
                num(report.bands[i].1),
            ]
        })
        .collect();
    let mut out = Computed::ok(&report)?.with_table(
        ["outcome", "probability", "count", "frequency", "band_low", "band_high"]
            .map(String::from)
            .to_vec(),
        rows,
    );
    out.notes.push(format!(
        "chi_square={} dof={} p_value={}",
        num(report.chi_square),
        report.degrees_of_freedom,
        num(report.p_value)
    ));
    Ok(out)
}

fn deficit(cfg: &RunConfig) -> Result<Computed, CliError> {
    let p = &cfg.parameters;
    if p.cluster_size == 0 || p.volumes.is_empty() || p.volumes.contains(&0) {
        return Err(CliError::config("cluster size and volumes must be positive"));
    }
    let scan = entropy_deficit_scan(p.cluster_size, &p.volumes);
    let rows = scan
        .points
        .iter()
        .map(|pt| {
            vec![
                pt.volume.to_string(),
                pt.simplices.to_string(),
                pt.nullity_connected.to_string(),
                pt.nullity_blocked.to_string(),
                pt.deficit.to_string(),
            ]
        })
        .collect();
    let mut out = Computed::ok(&scan)?.with_table(
        ["volume", "simplices", "nullity_connected", "nullity_blocked", "deficit"]
            .map(String::from)
            .to_vec(),
        rows,
    );
    out.notes.push(format!(
        "fit slope={} intercept={} r_squared={}",
        num(scan.fit.slope),
        num(scan.fit.intercept),
        num(scan.fit.r_squared)
    ));
    Ok(out)
}

/// Evenly spaced grid that hits its endpoints, and zero for symmetric ranges,
/// exactly.
pub fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let span = (n - 1) as f64;
    (0..n)
        .map(|i| (lo * (span - i as f64) + hi * i as f64) / span)
        .collect()
}

#[derive(Serialize)]
struct NonlinearityResult {
    u0: f64,
    d0: f64,
    u: Vec<f64>,
    f: Vec<f64>,
    probability: Vec<f64>,
    d: Vec<f64>,
    j: Vec<f64>,
}

fn nonlinearity(cfg: &RunConfig) -> Result<Computed, CliError> {
    let p = &cfg.parameters;
    let u = grid(p.u_min, p.u_max, p.u_points);
    let f: Vec<f64> = u.iter().map(|&x| tanh_response(x, p.u0)).collect();
    // Two-outcome channel whose log-odds shift by 4 f(u).
    let probability: Vec<f64> = f.iter().map(|&fx| 1.0 / (1.0 + (-(p.d0 + 4.0 * fx)).exp())).collect();
    let lo = log_odds_statistic(&probability, &u)?;
    let result = NonlinearityResult {
        u0: p.u0,
        d0: p.d0,
        u,
        f,
        probability,
        d: lo.d,
        j: lo.j,
    };
    let rows = (0..result.u.len())
        .map(|i| vec![num(result.u[i]), num(result.f[i]), num(result.d[i]), num(result.j[i])])
        .collect();
    Ok(Computed::ok(&result)?.with_table(["u", "f", "d", "j"].map(String::from).to_vec(), rows))
}
