//! Acceptance suite. Prints one `[PASS]` or `[FAIL]` line per criterion and
//! exits non-zero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use branchsum::action::{lattice_action, path_trajectory, ActionModel};
use branchsum::collapse::{
    born_statistics, cohesion_pair, collapse_threshold, counted_toy_entropies, entropy_deficit_scan,
    log_odds_statistic, tanh_response, ToyModelSpec, WalkOptions,
};
use branchsum::paths::{enumerate_paths, incidence_matrix, DEFAULT_PATH_CAP};
use branchsum::propagator::{
    amplitude_sum, cumulant_corrected_expectation, expected_amplitude, transfer_matrix_propagator, WickParams,
};
use branchsum::rational::int;
use branchsum::weights::{count_lattice_configs, null_space};
use branchsum::{templates, BoundaryMatrix, BranchedComplex};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, elapsed: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

// AC1
fn merge_split_matrices() -> Outcome {
    let start = Instant::now();
    let c = templates::merge_split();
    let d = c.boundary_matrix();
    let want_d: Vec<Vec<i64>> = vec![
        vec![1, 1, -1, 0, 0, 0],
        vec![0, 0, 1, -1, 0, 0],
        vec![0, 0, 0, 1, -1, -1],
    ];
    ensure(d.entries == want_d, || format!("D = {:?}", d.entries))?;
    let a = incidence_matrix(&enumerate_paths(&c, None, None, DEFAULT_PATH_CAP).map_err(|e| e.to_string())?);
    let want_a: Vec<Vec<u8>> = vec![
        vec![1, 1, 0, 0],
        vec![0, 0, 1, 1],
        vec![1, 1, 1, 1],
        vec![1, 1, 1, 1],
        vec![1, 0, 1, 0],
        vec![0, 1, 0, 1],
    ];
    ensure(a.entries == want_a, || format!("A = {:?}", a.entries))?;
    for row in &d.entries {
        for col in 0..a.cols() {
            let dot: i64 = row.iter().zip(&a.entries).map(|(x, r)| x * r[col] as i64).sum();
            ensure(dot == 0, || "D A != 0".into())?;
        }
    }
    within(Duration::from_secs(1), start.elapsed())?;
    Ok("D is 3x6, A is 6x4, D A = 0".into())
}

/// Rank modulo a prime by Gaussian elimination.
fn rank_mod_p(entries: &[Vec<i64>], cols: usize, p: i64) -> usize {
    let mut m: Vec<Vec<i64>> = entries.iter().map(|r| r.iter().map(|&x| x.rem_euclid(p)).collect()).collect();
    let inv = |a: i64| {
        let (mut r, mut b, mut e) = (1i128, a as i128, (p - 2) as i128);
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p as i128;
            }
            b = b * b % p as i128;
            e >>= 1;
        }
        r as i64
    };
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(rank, piv);
        let iv = inv(m[rank][c]);
        for i in 0..m.len() {
            if i != rank && m[i][c] != 0 {
                let f = (m[i][c] as i128 * iv as i128 % p as i128) as i64;
                for j in 0..cols {
                    m[i][j] = (m[i][j] - (f as i128 * m[rank][j] as i128 % p as i128) as i64).rem_euclid(p);
                }
            }
        }
        rank += 1;
    }
    rank
}

// AC2
fn null_space_correctness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..50 {
        let c = if trial % 2 == 0 {
            templates::random_layered(&mut rng, 40)
        } else {
            templates::random_strip(&mut rng, 40)
        };
        let d = c.boundary_matrix();
        ensure(d.cols() <= 40, || format!("trial {trial}: {} simplices", d.cols()))?;
        let ns = null_space(&d);
        ensure(ns.rank + ns.nullity == d.cols(), || format!("trial {trial}: rank-nullity"))?;
        ensure(ns.basis_vectors.len() == ns.nullity, || format!("trial {trial}: basis size"))?;
        ensure(ns.basis_vectors.iter().all(|v| d.annihilates(v)), || {
            format!("trial {trial}: basis vector not annihilated")
        })?;
        let oracle = rank_mod_p(&d.entries, d.cols(), 1_000_000_007).max(rank_mod_p(&d.entries, d.cols(), 998_244_353));
        ensure(d.cols() - oracle == ns.nullity, || {
            format!("trial {trial}: nullity {} vs oracle {}", ns.nullity, d.cols() - oracle)
        })?;
    }
    within(Duration::from_secs(30), start.elapsed())?;
    Ok(format!("50 complexes in {:?}", start.elapsed()))
}

// AC3
fn cohesion_ordering() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut wins = 0;
    for i in 0..20 {
        let (frequent, rare) = cohesion_pair(&mut rng);
        ensure(frequent.top_simplices.len() == rare.top_simplices.len(), || {
            format!("pair {i}: simplex counts differ")
        })?;
        let nf = null_space(&frequent.boundary_matrix()).nullity;
        let nr = null_space(&rare.boundary_matrix()).nullity;
        if nf > nr {
            wins += 1;
        }
    }
    ensure(wins == 20, || format!("{wins}/20 pairs ordered"))?;
    Ok("20/20 pairs".into())
}

/// Naive oracle: every point of `{L, L+dw, ..., w_T}^n`.
fn naive_count(d: &BoundaryMatrix, lower: i64, total: i64) -> u128 {
    let n = d.cols();
    let groups = d.layer_groups();
    let mut w = vec![lower; n];
    let mut count = 0u128;
    loop {
        let conserved = d.entries.iter().all(|r| r.iter().zip(&w).map(|(a, b)| a * b).sum::<i64>() == 0);
        let totals = groups.iter().all(|(_, cols)| cols.iter().map(|&c| w[c]).sum::<i64>() == total);
        if conserved && totals {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == n {
                return count;
            }
            w[i] += 1;
            if w[i] <= total {
                break;
            }
            w[i] = lower;
            i += 1;
        }
    }
}

// AC4
fn counting_oracle() -> Outcome {
    let fig3 = count_lattice_configs(&templates::merge_split().boundary_matrix(), &int(1), &int(3), &int(1))
        .map_err(|e| e.to_string())?;
    ensure(fig3 == 4, || format!("merge-split instance gave {fig3}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut instances: Vec<BranchedComplex> = vec![
        templates::merge_split(),
        templates::recombining(2),
        templates::recombining(3),
        templates::parallel_branches(3, 2),
        templates::lattice(2, 2),
    ];
    while instances.len() < 40 {
        instances.push(templates::random_layered(&mut rng, 9));
    }
    let mut checked = 0;
    for (i, c) in instances.iter().enumerate() {
        let d = c.boundary_matrix();
        for total in 1..=6i64 {
            let candidates = (total as f64).powi(d.cols() as i32);
            if candidates > 1e6 {
                continue;
            }
            let fast = count_lattice_configs(&d, &int(1), &int(total), &int(1)).map_err(|e| e.to_string())?;
            let slow = naive_count(&d, 1, total);
            ensure(fast == slow, || format!("instance {i}, w_T = {total}: {fast} vs naive {slow}"))?;
            checked += 1;
        }
    }
    ensure(checked >= 100, || format!("only {checked} instances were small enough"))?;
    Ok(format!("merge-split count 4; {checked} instances agree with naive enumeration"))
}

fn lattice_actions(model: &ActionModel, sites: usize, steps: usize, src: usize, dst: usize) -> Vec<f64> {
    let c = templates::lattice(sites, steps);
    let from: Vec<String> = (0..sites).map(|j| format!("e0_{src}_{j}")).collect();
    let to: Vec<String> = (0..sites).map(|i| format!("e{}_{i}_{dst}", steps - 1)).collect();
    let ps = enumerate_paths(&c, Some(&from), Some(&to), DEFAULT_PATH_CAP).expect("paths");
    ps.paths
        .iter()
        .map(|p| lattice_action(&path_trajectory(&c, p, model), model).expect("action"))
        .collect()
}

// AC5
fn transfer_matrix_equivalence() -> Outcome {
    let start = Instant::now();
    let free = ActionModel::free_particle(1.0, 1.0, 0.3);
    let mut harmonic = ActionModel::harmonic(1.0, 0.8, 0.5, 0.3);
    harmonic.center = 2.0;
    let mut worst = 0.0f64;
    let mut cases = 0;
    for model in [&free, &harmonic] {
        for (sites, steps) in [(3, 3), (4, 4), (5, 5), (6, 5), (10, 5)] {
            let actions = lattice_actions(model, sites, steps, 0, sites - 1);
            ensure(actions.len() <= 10_000, || format!("{} paths", actions.len()))?;
            for k in [0.0, 0.1, 1.0] {
                for hbar in [0.5, 1.0] {
                    let w: Vec<f64> = actions.iter().map(|s| (-k * s).exp()).collect();
                    let sum = amplitude_sum(&w, &actions, hbar).map_err(|e| e.to_string())?;
                    let tm = transfer_matrix_propagator(model, sites, steps, 0, sites - 1, k, hbar, 10_000_000)
                        .map_err(|e| e.to_string())?;
                    let rel = (tm - sum).norm() / sum.norm();
                    worst = worst.max(rel);
                    ensure(rel <= 1e-12, || format!("{sites}x{steps} k={k} hbar={hbar}: rel {rel:e}"))?;
                    cases += 1;
                }
            }
        }
    }
    within(Duration::from_secs(60), start.elapsed())?;
    Ok(format!("{cases} cases, worst relative error {worst:.2e}"))
}

// AC6
fn wick_rotation() -> Outcome {
    let model = ActionModel::free_particle(1.0, 1.0, 0.5);
    let actions = lattice_actions(&model, 5, 5, 2, 2);
    for hbar in [0.5, 1.0] {
        let p = WickParams {
            k: 0.0,
            hbar,
            w_e: 1.0,
            zeta: None,
        };
        let e = expected_amplitude(&actions, &p);
        let uniform = amplitude_sum(&vec![1.0; actions.len()], &actions, hbar).map_err(|e| e.to_string())?
            * p.zeta_for(actions.len());
        ensure(e == uniform, || format!("k = 0: {e} vs {uniform}"))?;
    }
    let mut sorted = actions.clone();
    sorted.sort_by(f64::total_cmp);
    let (s_min, gap) = (sorted[0], sorted[1] - sorted[0]);
    ensure(gap > 0.0, || "minimal action is degenerate".into())?;
    let mut last = 0.0;
    let mut ratios = Vec::new();
    for kd in [0.0, 1.0, 5.0, 10.0, 20.0, 30.0, 40.0] {
        let p = WickParams {
            k: kd / gap,
            hbar: 1.0,
            w_e: 1.0,
            zeta: None,
        };
        let total = expected_amplitude(&actions, &p).norm();
        let lead = p.zeta_for(actions.len()) * (-p.k * s_min).exp();
        let ratio = lead / total;
        ratios.push(ratio);
        if kd >= 30.0 {
            ensure((ratio - 1.0).abs() < 1e-6, || format!("k dS = {kd}: ratio {ratio}"))?;
        }
        last = ratio;
    }
    Ok(format!(
        "k = 0 sum exact; ratio at k dS = 40 is {last:.12} (k dS = 0: {:.3e})",
        ratios[0]
    ))
}

// AC7
fn cumulant_validation() -> Outcome {
    let n = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let noise: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let (mu, sigma, hbar) = (0.7, 0.6, 1.0);
    let actions: Vec<f64> = z.iter().map(|x| mu + sigma * x).collect();
    let independent: Vec<f64> = noise.iter().map(|x| (0.3 * x).exp()).collect();
    let r = cumulant_corrected_expectation(&independent, &actions, hbar).map_err(|e| e.to_string())?;
    let err = (r.exact - r.corrected).norm();
    ensure(err < 5.0 * r.exact_stderr, || {
        format!("|exact - corrected| = {err:e} vs 5 stderr = {:e}", 5.0 * r.exact_stderr)
    })?;
    let mut gaps = Vec::new();
    for beta in [0.0, 0.1, 0.2, 0.3, 0.4] {
        // Cov[w, S] grows with beta.
        let w: Vec<f64> = z.iter().zip(&noise).map(|(x, e)| (beta * x + 0.3 * e).exp()).collect();
        let r = cumulant_corrected_expectation(&w, &actions, hbar).map_err(|e| e.to_string())?;
        gaps.push((r.exact - r.factorized).norm());
    }
    ensure(gaps.windows(2).all(|p| p[1] > p[0]), || format!("gaps not increasing: {gaps:?}"))?;
    Ok(format!(
        "residual {:.2} stderr; factorization gaps {:.2e}..{:.2e}",
        err / r.exact_stderr,
        gaps[0],
        gaps[4]
    ))
}

// AC8
fn toy_threshold() -> Outcome {
    let b = std::f64::consts::LN_2;
    let threshold = collapse_threshold(b, 1.0);
    ensure(threshold == 4.0, || format!("threshold {threshold}"))?;
    let dw = 1.0;
    let mut flips = 0;
    for steps in 1..=6usize {
        let mut verdicts = Vec::new();
        for total in 2..=9 {
            let spec = ToyModelSpec {
                b,
                lower_bound: 1.0,
                total_weight: total as f64,
                steps,
                dw,
            };
            let c = counted_toy_entropies(&spec, 10_000_000).map_err(|e| e.to_string())?;
            let t = steps as f64;
            let want_weight = t * ((total as f64 - 2.0) / dw + 1.0).ln();
            ensure((c.s_b_weight - want_weight).abs() < 1e-9, || {
                format!("T={steps} w_T={total}: counted ln N_w {} vs {want_weight}", c.s_b_weight)
            })?;
            ensure((c.s_a - 2.0 * b * t).abs() < 1e-9, || format!("T={steps} w_T={total}: S_A {}", c.s_a))?;
            // Continuum comparison at w_T + dw; the tie at the threshold is
            // excluded because its sign is decided by rounding.
            let shifted = total as f64 + dw;
            if shifted == threshold {
                continue;
            }
            let counted = c.s_b_weight + b * t > c.s_a;
            let continuum = t * (shifted - 2.0).ln() + b * t > 2.0 * b * t;
            ensure(counted == continuum, || format!("T={steps} w_T={total}: verdicts differ"))?;
            ensure(continuum == (shifted > threshold), || "continuum verdict off threshold".into())?;
            verdicts.push(counted);
        }
        ensure(verdicts.first() == Some(&false) && verdicts.last() == Some(&true), || {
            format!("T={steps}: no flip in {verdicts:?}")
        })?;
        flips += 1;
    }
    Ok(format!("threshold 4; counted verdict flips at w_T + dw = 4 for T = 1..6 ({flips} cases)"))
}

// AC9
fn path_count_doubling() -> Outcome {
    for t in 1..=10u32 {
        let n = enumerate_paths(&templates::recombining(t as usize), None, None, DEFAULT_PATH_CAP)
            .map_err(|e| e.to_string())?
            .len();
        ensure(n == 1usize << t, || format!("T={t}: {n} paths"))?;
    }
    Ok("2^T paths for T = 1..10".into())
}

// AC10
fn born_rule() -> Outcome {
    let start = Instant::now();
    let basis = |probs: &[f64]| -> Vec<Vec<Complex64>> {
        (0..probs.len())
            .map(|i| {
                let mut v = vec![Complex64::new(0.0, 0.0); probs.len()];
                v[i] = Complex64::new(probs[i].sqrt(), 0.0);
                v
            })
            .collect()
    };
    let mut summary = Vec::new();
    for (probs, seed) in [(vec![0.25, 0.75], 7u64), (vec![0.5, 1.0 / 3.0, 1.0 / 6.0], 8)] {
        let r = born_statistics(&basis(&probs), 100_000, seed, 1.0, &WalkOptions::default())
            .map_err(|e| e.to_string())?;
        ensure(r.p_value > 0.001, || format!("{probs:?}: p = {}", r.p_value))?;
        summary.push(format!("p = {:.3}", r.p_value));
    }
    within(Duration::from_secs(60), start.elapsed())?;
    Ok(format!("{} in {:?}", summary.join(", "), start.elapsed()))
}

// AC11
fn deficit_linearity() -> Outcome {
    let volumes: Vec<usize> = (2..=10).collect();
    let scan = entropy_deficit_scan(2, &volumes);
    ensure(scan.fit.slope > 0.0 && scan.fit.r_squared > 0.99, || {
        format!("slope {} R^2 {}", scan.fit.slope, scan.fit.r_squared)
    })?;
    Ok(format!("slope {} R^2 {}", scan.fit.slope, scan.fit.r_squared))
}

// AC12
fn nonlinearity_channel() -> Outcome {
    let u0 = 1.5;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut us: Vec<f64> = (0..1000).map(|_| rng.random_range(-50.0..50.0)).collect();
    us.extend([0.0, 1e-8, -1e-8, 1e3, -1e3, 1e6, f64::MAX, -f64::MAX]);
    for &u in &us {
        let f = tanh_response(u, u0);
        ensure(f.abs() <= u0, || format!("|f({u})| = {} > u0", f.abs()))?;
    }
    for u in [0.1 * u0, -0.1 * u0] {
        let dev = (tanh_response(u, u0) - u).abs() / u.abs();
        ensure(dev < 0.0034, || format!("relative deviation {dev} at u = {u}"))?;
    }
    let grid = branchsum_cli::commands::grid(-3.0, 3.0, 61);
    let probs: Vec<f64> = grid
        .iter()
        .map(|&u| 1.0 / (1.0 + (-(0.3 + 4.0 * tanh_response(u, u0))).exp()))
        .collect();
    let lo = log_odds_statistic(&probs, &grid).map_err(|e| e.to_string())?;
    let origin = grid.iter().position(|&u| u == 0.0).ok_or("grid misses the origin")?;
    ensure(lo.j[origin] == 0.0, || format!("J(0) = {}", lo.j[origin]))?;
    let dev = (tanh_response(0.1 * u0, u0) - 0.1 * u0).abs() / (0.1 * u0);
    Ok(format!("bounded on {} points; deviation {:.4}% at 0.1 u0; J(0) = 0", us.len(), 100.0 * dev))
}

// AC13
fn determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_branchsum");
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/merge_split.json");
    let runs: Vec<Vec<&str>> = vec![
        vec!["check", "--input", data, "--weights", "1,1,2,2,1,1"],
        vec!["nullspace", "--input", data],
        vec!["count", "--input", data, "--total-weight", "3"],
        vec!["paths", "--input", data, "--list"],
        vec!["propagate", "--k", "0.2", "--n-samples", "50000", "--seed", "4"],
        vec!["propagate", "--sites", "6", "--steps", "6", "--cap", "100", "--n-samples", "30000", "--seed", "5"],
        vec!["toy01", "--total-weight", "5", "--steps", "3"],
        vec!["collapse", "--format", "json", "--seed", "9"],
        vec!["born", "--p", "0.25,0.75", "--n", "100000", "--seed", "7"],
        vec!["deficit", "--format", "json"],
        vec!["nonlinearity", "--format", "json"],
    ];
    for args in &runs {
        let mut outputs = Vec::new();
        for threads in ["1", "2", "8", "8"] {
            let out = Command::new(exe)
                .args(args)
                .args(["--threads", threads])
                .output()
                .map_err(|e| e.to_string())?;
            ensure(out.status.success(), || {
                format!("{args:?}: exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr))
            })?;
            serde_json::from_slice::<serde_json::Value>(&out.stdout).map_err(|e| format!("{args:?}: {e}"))?;
            outputs.push(out.stdout);
        }
        ensure(outputs.windows(2).all(|w| w[0] == w[1]), || {
            format!("{args:?}: reports differ across thread counts")
        })?;
    }
    Ok(format!("{} subcommand runs identical at 1, 2 and 8 threads", runs.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("AC1  merge-split boundary and incidence matrices", merge_split_matrices),
        ("AC2  null-space correctness on random complexes", null_space_correctness),
        ("AC3  cohesion-entropy ordering", cohesion_ordering),
        ("AC4  counting oracle", counting_oracle),
        ("AC5  transfer matrix equals path enumeration", transfer_matrix_equivalence),
        ("AC6  Wick-rotated sum limits", wick_rotation),
        ("AC7  cumulant correction on Gaussian ensembles", cumulant_validation),
        ("AC8  sample-model collapse threshold", toy_threshold),
        ("AC9  2^T paths on the recombining template", path_count_doubling),
        ("AC10 Born statistics of the collapse walk", born_rule),
        ("AC11 entropy-deficit linearity", deficit_linearity),
        ("AC12 saturating channel", nonlinearity_channel),
        ("AC13 determinism across thread counts", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail} ({elapsed:.2?})"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {name}: {why} ({elapsed:.2?})");
            }
        }
    }
    println!("{} of 13 criteria passed", 13 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
