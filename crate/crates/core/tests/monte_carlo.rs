use branchsum::action::ActionModel;
use branchsum::paths::{enumerate_paths, DEFAULT_PATH_CAP};
use branchsum::propagator::{expected_amplitude, monte_carlo_amplitude, AncestralSampler, CategoricalSampler, WickParams};
use branchsum::templates;

const ACTIONS: [f64; 4] = [0.3, 1.1, 2.0, -0.5];

#[test]
fn merge_split_estimate_is_within_four_sigma() {
    let p = WickParams {
        k: 0.5,
        hbar: 1.0,
        w_e: 1.0,
        zeta: None,
    };
    let exact = expected_amplitude(&ACTIONS, &p);
    let s = CategoricalSampler::new(&ACTIONS, p.k).unwrap();
    let r = monte_carlo_amplitude(&s, p.hbar, p.w_e, p.zeta_for(4), 100_000, 17).unwrap();
    assert!((r.estimate.re - exact.re).abs() < 4.0 * r.stderr_re);
    assert!((r.estimate.im - exact.im).abs() < 4.0 * r.stderr_im);
    let again = monte_carlo_amplitude(&s, p.hbar, p.w_e, p.zeta_for(4), 100_000, 17).unwrap();
    assert_eq!(r, again);
}

#[test]
fn confidence_intervals_are_calibrated() {
    let k = 0.5;
    let exact = expected_amplitude(
        &ACTIONS,
        &WickParams {
            k,
            zeta: Some(1.0),
            ..WickParams::default()
        },
    );
    let s = CategoricalSampler::new(&ACTIONS, k).unwrap();
    let covered = (0..200u64)
        .filter(|&seed| {
            let r = monte_carlo_amplitude(&s, 1.0, 1.0, 1.0, 2_000, seed).unwrap();
            (r.estimate.re - exact.re).abs() <= 1.96 * r.stderr_re
        })
        .count();
    assert!((180..=198).contains(&covered), "coverage {covered}/200");
}

#[test]
fn ancestral_sampler_agrees_with_exact_sum() {
    let c = templates::lattice(3, 4);
    let model = ActionModel::free_particle(1.0, 1.0, 0.6);
    let edges = AncestralSampler::lattice_edge_actions(&c, &model);
    let k = 0.3;
    let sampler = AncestralSampler::new(&c, edges, k, &c.simplices_in_step(0), &c.simplices_in_step(3)).unwrap();
    let ps = enumerate_paths(&c, None, None, DEFAULT_PATH_CAP).unwrap();
    let actions: Vec<f64> = ps.paths.iter().map(|p| sampler.path_action(&p.indices)).collect();
    let p = WickParams {
        k,
        hbar: 1.0,
        w_e: 1.0,
        zeta: Some(1.0),
    };
    let exact = expected_amplitude(&actions, &p);
    let r = monte_carlo_amplitude(&sampler, 1.0, 1.0, 1.0, 200_000, 5).unwrap();
    assert!((r.estimate - exact).norm() < 4.0 * r.stderr, "{} vs {}", r.estimate, exact);
}
