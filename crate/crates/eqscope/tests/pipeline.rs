//! End-to-end harness checks: generator consistency, region scans, output
//! determinism, and a CLI smoke pass.

use std::process::Command;

use eqscope::chi::chi_square_delta;
use eqscope::entry::{generate_entry_observations, DofMode, EntryGameParams};
use eqscope::scan::{
    emit_outputs, entry_free_parametrization, scan_region, ScanGrid,
};
use eqscope_conic::ClarabelBackend;
use eqscope_core::{is_correlated_equilibrium, Metric, ObservationModel};
use eqscope_identify::{min_perturbation, ConsistencyInstance, DeltaSpec};

fn params(sigma: f64, sigma_s: f64, l: usize, seed: u64) -> EntryGameParams {
    EntryGameParams {
        gamma1: 5.0,
        gamma2: 5.0,
        theta1: -10.0,
        theta2: -10.0,
        sigma,
        sigma_s,
        l,
        seed,
    }
}

#[test]
fn generated_observations_are_equilibria_in_every_model() {
    for model in [
        ObservationModel::PartialPayoffInfo,
        ObservationModel::PayoffShifterInfo,
        ObservationModel::NoPayoffInfo,
    ] {
        let (set, truth) =
            generate_entry_observations(&params(0.8, 1.5, 25, 2), model, DofMode::Asymmetric)
                .unwrap();
        for (o, gk) in set.observations.iter().zip(&truth.perturbed) {
            assert!(is_correlated_equilibrium(gk, &o.e, 1e-8).unwrap());
        }
    }
}

#[test]
fn shifter_recovery_stays_under_calibrated_budget() {
    // delta* is at most the generator's realized distance, which exceeds
    // the 0.999 quantile only with probability 1e-3 per seed
    let b = ClarabelBackend::default();
    let sigma = 0.4;
    let l = 6;
    let budget = chi_square_delta(DofMode::Asymmetric.dof(l), 0.999, sigma).unwrap();
    let mut violations = 0;
    let seeds = 40;
    for seed in 0..seeds {
        let (set, _) = generate_entry_observations(
            &params(sigma, 1.0, l, 1000 + seed),
            ObservationModel::PayoffShifterInfo,
            DofMode::Asymmetric,
        )
        .unwrap();
        let inst = ConsistencyInstance::new(set, Metric::SumOfSquares, DeltaSpec::Free);
        let rec = min_perturbation(&inst, &b).unwrap();
        if rec.delta_star > budget {
            violations += 1;
        }
    }
    assert!(violations <= 1, "{violations}/{seeds} seeds exceeded the 0.999 budget");
}

#[test]
fn scan_contains_truth_and_brackets_free_optimum() {
    let b = ClarabelBackend::default();
    let p = params(0.0, 0.0, 8, 31);
    let (set, _) = generate_entry_observations(
        &p,
        ObservationModel::PartialPayoffInfo,
        DofMode::Asymmetric,
    )
    .unwrap();
    let grid = ScanGrid {
        gamma1: ScanGrid::linspace(3.0, 7.0, 5),
        theta1: ScanGrid::linspace(-12.0, -8.0, 5),
    };
    let scan = scan_region(&set, &grid, Metric::SumOfSquares, 1e-6, p.seed, &b);
    assert!(scan.diagnostics.is_empty(), "{:?}", scan.diagnostics);
    // the true parameter cell (5, -10) explains the noiseless data exactly
    let (ti, tj) = (2, 2);
    assert!((grid.gamma1[ti] - 5.0).abs() < 1e-12);
    assert!(scan.values[ti][tj] < 1e-8);
    assert!(scan.inside[ti][tj]);

    // inside cells grow with the budget
    let loose = scan_region(&set, &grid, Metric::SumOfSquares, 1.0, p.seed, &b);
    for i in 0..grid.gamma1.len() {
        for j in 0..grid.theta1.len() {
            if scan.inside[i][j] {
                assert!(loose.inside[i][j]);
            }
        }
    }

    // the argmin cell lies within one grid step of the free optimum
    let free = ConsistencyInstance::new(set, Metric::SumOfSquares, DeltaSpec::Free)
        .with_property(entry_free_parametrization());
    let hook = eqscope::scan::entry_structure_hook();
    let rec = eqscope_identify::min_perturbation_with(&free, Some(&hook), &b).unwrap();
    let (g1_opt, t1_opt) = (rec.game.payoff1[1][0], rec.game.payoff1[1][1]);
    let (mut bi, mut bj, mut best) = (0, 0, f64::INFINITY);
    for i in 0..grid.gamma1.len() {
        for j in 0..grid.theta1.len() {
            if scan.values[i][j] < best {
                best = scan.values[i][j];
                bi = i;
                bj = j;
            }
        }
    }
    let step_g = grid.gamma1[1] - grid.gamma1[0];
    let step_t = grid.theta1[1] - grid.theta1[0];
    assert!((grid.gamma1[bi] - g1_opt).abs() <= step_g + 1e-9);
    assert!((grid.theta1[bj] - t1_opt).abs() <= step_t + 1e-9);
}

#[test]
fn emitted_outputs_are_deterministic() {
    let b = ClarabelBackend::default();
    let p = params(0.1, 0.0, 3, 77);
    let (set, _) = generate_entry_observations(
        &p,
        ObservationModel::PartialPayoffInfo,
        DofMode::Asymmetric,
    )
    .unwrap();
    let grid = ScanGrid {
        gamma1: ScanGrid::linspace(4.0, 6.0, 3),
        theta1: ScanGrid::linspace(-11.0, -9.0, 3),
    };
    let dir1 = std::env::temp_dir().join("eqscope_scan_a");
    let dir2 = std::env::temp_dir().join("eqscope_scan_b");
    let scan1 = scan_region(&set, &grid, Metric::SumOfSquares, 0.5, p.seed, &b);
    let scan2 = scan_region(&set, &grid, Metric::SumOfSquares, 0.5, p.seed, &b);
    let (csv1, manifest1) = emit_outputs(&scan1, &dir1).unwrap();
    let (csv2, _) = emit_outputs(&scan2, &dir2).unwrap();
    let a = std::fs::read(&csv1).unwrap();
    let c = std::fs::read(&csv2).unwrap();
    assert_eq!(a, c, "CSV bytes must be identical for the same seed");
    let lines = String::from_utf8(a).unwrap();
    assert_eq!(lines.lines().count(), 1 + 9, "header plus one row per cell");
    assert!(lines.starts_with("gamma1,theta1,delta_star,inside"));
    let manifest = std::fs::read_to_string(manifest1).unwrap();
    assert!(manifest.contains("timings_ms"));
}

#[test]
fn cli_round_trip() {
    let bin = env!("CARGO_BIN_EXE_eqscope");
    let dir = std::env::temp_dir().join("eqscope_cli_test");
    std::fs::create_dir_all(&dir).unwrap();
    let obs = dir.join("obs.json");
    let rec = dir.join("rec.json");

    let status = Command::new(bin)
        .args([
            "simulate-entry",
            "--l",
            "6",
            "--sigma",
            "0.2",
            "--seed",
            "4",
            "--model",
            "partial-payoff",
            "--output",
        ])
        .arg(&obs)
        .status()
        .unwrap();
    assert!(status.success());

    let status = Command::new(bin)
        .args(["recover", "--metric", "d2", "--input"])
        .arg(&obs)
        .arg("--output")
        .arg(&rec)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&rec).unwrap();
    assert!(text.contains("delta_star"));

    // membership of the all-zero game at budget 0 on noisy data: exit 2
    let game = dir.join("zero.json");
    std::fs::write(
        &game,
        r#"{"m1":2,"m2":2,"payoff1":[[0,0],[0,0]],"payoff2":[[0,0],[0,0]]}"#,
    )
    .unwrap();
    let status = Command::new(bin)
        .args(["membership", "--delta", "0", "--metric", "dinf", "--input"])
        .arg(&obs)
        .arg("--game")
        .arg(&game)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    let out = Command::new(bin)
        .args(["calibrate", "--dof", "2", "--level", "0.99"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("9.21034"));
}
