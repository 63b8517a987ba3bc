//! Recovery and diameter in coefficient space against the live backend.

use eqscope_conic::ClarabelBackend;
use eqscope_core::Metric;
use eqscope_cournot::*;
use eqscope_identify::diameter::{is_nondecreasing, DiameterOptions, EntryBound};

fn backend() -> ClarabelBackend {
    ClarabelBackend::default()
}

fn noise_free_games(n: usize, l: usize, seed: u64) -> SimulatedGame {
    let params = SimulationParams {
        n,
        alpha: 0.05,
        a_hat: 0.01,
        sigma_game: 0.01,
        sigma_obs: 0.0,
        l,
        n_g: 1,
        seed,
    };
    simulate_cournot(&params).unwrap().into_iter().next().unwrap()
}

#[test]
fn noise_free_linear_recovery_is_exact() {
    let game = noise_free_games(4, 3, 5);
    let price = AffinePrice { alpha: 0.05 };
    let rec = cournot_min_perturbation(
        &game.observations,
        Metric::SumOfSquares,
        1,
        4,
        &price,
        0.05,
        &backend(),
    )
    .unwrap();
    assert!(rec.delta_star < 1e-9, "delta* = {}", rec.delta_star);
    for (rowr, rowt) in rec.model.coeffs.iter().zip(&game.model.coeffs) {
        assert!((rowr[0] - rowt[0]).abs() < 1e-6, "{} vs {}", rowr[0], rowt[0]);
    }
}

#[test]
fn single_observation_pins_linear_costs_per_player() {
    // one FOC equality per player at degree 1: delta* = 0 regardless of data
    let game = noise_free_games(10, 1, 9);
    let price = AffinePrice { alpha: 0.05 };
    let rec = cournot_min_perturbation(
        &game.observations,
        Metric::SumOfSquares,
        1,
        10,
        &price,
        0.05,
        &backend(),
    )
    .unwrap();
    assert!(rec.delta_star < 1e-9);
    // noisy data with several observations needs a positive budget
    let params = SimulationParams {
        n: 10,
        alpha: 0.05,
        a_hat: 0.01,
        sigma_game: 0.01,
        sigma_obs: 0.001,
        l: 5,
        n_g: 1,
        seed: 10,
    };
    let noisy = simulate_cournot(&params).unwrap().into_iter().next().unwrap();
    let rec = cournot_min_perturbation(
        &noisy.observations,
        Metric::SumOfSquares,
        1,
        10,
        &price,
        0.05,
        &backend(),
    )
    .unwrap();
    assert!(rec.delta_star > 1e-8, "noisy delta* = {}", rec.delta_star);
}

#[test]
fn foc_residuals_of_recovered_perturbations() {
    let params = SimulationParams {
        n: 5,
        alpha: 0.05,
        a_hat: 0.01,
        sigma_game: 0.01,
        sigma_obs: 0.001,
        l: 4,
        n_g: 1,
        seed: 21,
    };
    let game = simulate_cournot(&params).unwrap().into_iter().next().unwrap();
    let price = AffinePrice { alpha: 0.05 };
    for degree in [1usize, 2, 3] {
        let rec = cournot_min_perturbation(
            &game.observations,
            Metric::SumOfSquares,
            degree,
            5,
            &price,
            0.05,
            &backend(),
        )
        .unwrap();
        for (ak, o) in rec.perturbed.iter().zip(&game.observations) {
            for i in 0..5 {
                let qi = o.quantities[i];
                let marginal: f64 = (1..=degree)
                    .map(|x| x as f64 * ak[i][x - 1] * qi.powi(x as i32 - 1))
                    .sum();
                let lhs = foc_lhs(&price, &o.quantities, i);
                assert!((marginal - lhs).abs() <= 1e-6, "degree {degree}: {marginal} vs {lhs}");
            }
        }
        // grid convexity oracle over the observed quantity range
        let q_max = game
            .observations
            .iter()
            .flat_map(|o| o.quantities.iter())
            .fold(0.0f64, |a, &b| a.max(b));
        for i in 0..5 {
            for step in 0..=200 {
                let x = 2.0 * q_max * step as f64 / 200.0;
                assert!(
                    rec.model.cost_curvature(i, x) >= -1e-6,
                    "degree {degree} player {i}: c''({x}) < 0"
                );
            }
        }
    }
}

#[test]
fn pinned_system_has_zero_diameter() {
    // distinct quantity profiles with degree 1: each observation pins every
    // perturbed coefficient, and delta = 0 collapses the base to a point
    let game = noise_free_games(3, 2, 33);
    let price = AffinePrice { alpha: 0.05 };
    let report = cournot_diameter(
        &game.observations,
        0.0,
        1,
        Metric::SumOfSquares,
        3,
        &price,
        &backend(),
        &DiameterOptions::default(),
    )
    .unwrap();
    match report.value {
        EntryBound::Finite(v) => assert!(v.abs() < 1e-6, "diameter {v}"),
        other => panic!("expected finite, got {other:?}"),
    }
}

#[test]
fn diameter_shrinks_with_more_observations() {
    let params = SimulationParams {
        n: 4,
        alpha: 0.05,
        a_hat: 0.01,
        sigma_game: 0.01,
        sigma_obs: 0.001,
        l: 8,
        n_g: 1,
        seed: 55,
    };
    let game = simulate_cournot(&params).unwrap().into_iter().next().unwrap();
    let price = AffinePrice { alpha: 0.05 };
    let delta = {
        // budget large enough for the full observation set
        let rec = cournot_min_perturbation(
            &game.observations,
            Metric::SumOfSquares,
            1,
            4,
            &price,
            0.05,
            &backend(),
        )
        .unwrap();
        rec.delta_star + 1e-5
    };
    let mut values = Vec::new();
    for l in [2usize, 4, 8] {
        let report = cournot_diameter(
            &game.observations[..l],
            delta,
            1,
            Metric::SumOfSquares,
            4,
            &price,
            &backend(),
            &DiameterOptions::default(),
        )
        .unwrap();
        values.push(report.value);
    }
    // nested observation sets shrink the consistent set
    values.reverse();
    assert!(is_nondecreasing(&values, 1e-7), "{values:?}");
}

#[test]
fn recovery_rejects_bad_parameters() {
    let price = AffinePrice { alpha: 0.05 };
    let err = cournot_min_perturbation(&[], Metric::SumOfSquares, 1, 3, &price, 0.05, &backend());
    assert!(matches!(err, Err(CournotError::Parameter(_))));
    let obs = [CournotObservation { quantities: vec![1.0, 2.0] }];
    let err = cournot_min_perturbation(&obs, Metric::SumOfSquares, 0, 2, &price, 0.05, &backend());
    assert!(matches!(err, Err(CournotError::Parameter(_))));
    let err = cournot_min_perturbation(&obs, Metric::SumOfSquares, 1, 3, &price, 0.05, &backend());
    assert!(matches!(err, Err(CournotError::Parameter(_))));
}

#[test]
fn maximum_metric_recovery_also_solves() {
    let game = noise_free_games(3, 2, 77);
    let price = AffinePrice { alpha: 0.05 };
    let rec = cournot_min_perturbation(
        &game.observations,
        Metric::Maximum,
        2,
        3,
        &price,
        0.05,
        &backend(),
    )
    .unwrap();
    assert!(rec.delta_star < 1e-7);
}
