//! Strictness-controlled recovery and the degeneracy threshold against the
//! live backend. The point-mass fixture has closed forms derived by hand:
//! only the pair (0 -> 1) is non-vacuous, so the threshold LP pushes
//! G(0,0) - G(1,0) to its box maximum 1, and for budgets above it
//! P(eps) = (eps - 1)^2 / 2 by symmetric spreading.

use eqscope_conic::ClarabelBackend;
use eqscope_core::{CorrelatedEquilibrium, Observation, ObservationModel, ObservationSet};
use eqscope_identify::*;

fn backend() -> ClarabelBackend {
    ClarabelBackend::default()
}

fn no_info(es: Vec<CorrelatedEquilibrium>) -> ObservationSet {
    ObservationSet::new(
        ObservationModel::NoPayoffInfo,
        es.into_iter()
            .map(|e| Observation { e, v: None, beta: None })
            .collect(),
    )
    .unwrap()
}

fn point_mass_obs() -> ObservationSet {
    no_info(vec![CorrelatedEquilibrium::point_mass(2, 2, 0, 0)])
}

#[test]
fn threshold_of_point_mass_is_one() {
    let eps_star = degeneracy_threshold(&point_mass_obs(), &backend()).unwrap();
    assert!((eps_star - 1.0).abs() < 1e-6, "eps* = {eps_star}");
}

#[test]
fn threshold_of_uniform_is_zero() {
    // paired slacks cancel under the uniform distribution, so no strictness
    // is achievable at zero perturbation
    let eps_star = degeneracy_threshold(&no_info(vec![CorrelatedEquilibrium::uniform(2, 2)]), &backend())
        .unwrap();
    assert!(eps_star.abs() < 1e-7, "eps* = {eps_star}");
}

#[test]
fn p_vanishes_below_threshold_and_grows_above() {
    let obs = point_mass_obs();
    let b = backend();
    let eps_star = degeneracy_threshold(&obs, &b).unwrap();

    let at = |eps: f64| {
        solve_p(&StrictnessInstance { obs: obs.clone(), epsilon: eps }, &b)
            .unwrap()
            .value
    };
    assert!(at(0.0) <= 1e-9);
    assert!(at(0.5) <= 1e-9);
    assert!(at(eps_star * 0.999999) <= 1e-8);
    assert!(at(eps_star * 1.001) > 1e-8);
    // hand-enumerated value at eps = 2
    assert!((at(2.0) - 0.5).abs() < 1e-6);
}

#[test]
fn solution_slacks_account_for_budget() {
    let obs = point_mass_obs();
    let sol = solve_p(&StrictnessInstance { obs, epsilon: 1.5 }, &backend()).unwrap();
    let total: f64 = sol.slacks.iter().map(|&(_, _, _, s)| s).sum();
    assert!((total - 1.5).abs() < 1e-7);
    for &(_, _, _, s) in &sol.slacks {
        assert!(s >= -1e-8);
    }
    for row in &sol.game {
        for &x in row {
            assert!((-1e-8..=1.0 + 1e-8).contains(&x));
        }
    }
}

#[test]
fn envelope_holds_on_point_mass_grid() {
    let obs = point_mass_obs();
    let b = backend();
    let eps0 = 1.5;
    // single-point grid is trivially inside the envelope
    let single = envelope_check(&obs, eps0, &[eps0], &b).unwrap();
    assert!(single.ok);
    let report = envelope_check(&obs, eps0, &[1.5, 2.0, 3.0], &b).unwrap();
    assert!(report.ok, "curve {:?} lower {:?} upper {:?}", report.curve, report.lower, report.upper);
    // P is (eps-1)^2/2 here; check the solved curve against the closed form
    for &(eps, value) in &report.curve {
        let expect = (eps - 1.0) * (eps - 1.0) / 2.0;
        assert!((value - expect).abs() < 1e-6, "P({eps}) = {value}");
    }
    // monotone along the grid
    let mut prev = -1.0;
    for &(_, value) in &report.curve {
        assert!(value >= prev - 1e-8);
        prev = value;
    }
}

#[test]
fn envelope_requires_positive_p0() {
    let err = envelope_check(&point_mass_obs(), 0.5, &[0.5, 1.0], &backend());
    assert!(matches!(err, Err(IdentifyError::Precondition(_))));
}

#[test]
fn p_is_midpoint_convex_on_grid() {
    let obs = point_mass_obs();
    let b = backend();
    let at = |eps: f64| {
        solve_p(&StrictnessInstance { obs: obs.clone(), epsilon: eps }, &b)
            .unwrap()
            .value
    };
    let grid = [0.5, 1.0, 1.5, 2.0, 3.0, 4.0];
    for pair in grid.windows(2) {
        let (a, c) = (pair[0], pair[1]);
        let mid = at((a + c) / 2.0);
        assert!(mid <= (at(a) + at(c)) / 2.0 + 1e-6);
    }
}

#[test]
fn strong_duality_where_slater_holds() {
    let obs = point_mass_obs();
    assert_eq!(check_slater(&obs), vec![true]);
    let sol = solve_p(&StrictnessInstance { obs, epsilon: 2.0 }, &backend()).unwrap();
    let dual = sol.dual_objective.expect("backend reports a dual objective");
    let denom = sol.value.abs().max(1.0);
    assert!((sol.value - dual).abs() / denom < 1e-5, "{} vs {dual}", sol.value);
}

#[test]
fn padding_leaves_p_unchanged() {
    // the same point-mass data embedded in a 2x3 game (extra zero-probability
    // column) pads to 3x3 internally; P must match the 2x2 value
    let mut probs = vec![vec![0.0; 3]; 2];
    probs[0][0] = 1.0;
    let wide = no_info(vec![CorrelatedEquilibrium::new(probs).unwrap()]);
    let b = backend();
    for eps in [0.5, 2.0, 3.0] {
        let narrow = solve_p(
            &StrictnessInstance { obs: point_mass_obs(), epsilon: eps },
            &b,
        )
        .unwrap()
        .value;
        let padded = solve_p(&StrictnessInstance { obs: wide.clone(), epsilon: eps }, &b)
            .unwrap()
            .value;
        assert!((narrow - padded).abs() < 1e-7, "eps {eps}: {narrow} vs {padded}");
        assert_eq!(
            degeneracy_threshold(&wide, &b).unwrap().round() as i64,
            degeneracy_threshold(&point_mass_obs(), &b).unwrap().round() as i64
        );
    }
}

#[test]
fn player2_runs_by_transposition() {
    // a column point mass seen from player 2's side is the row point mass
    // of the transposed observations
    let e = CorrelatedEquilibrium::point_mass(2, 2, 0, 1);
    let obs = no_info(vec![e]);
    let t = transpose_observations(&obs);
    let eps_star = degeneracy_threshold(&t, &backend()).unwrap();
    assert!((eps_star - 1.0).abs() < 1e-6);
}
