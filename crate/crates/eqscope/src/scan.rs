//! Parameter-region scans for the entry game: each grid cell pins the
//! player-1 parameters, leaves the player-2 parameters free through a
//! linear parametrization, and records the minimum perturbation budget.
//! Cells whose budget exceeds the threshold are outside the consistent
//! region.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use eqscope_conic::{ConicProgram, SolverBackend};
use eqscope_core::{Metric, ObservationSet};
use eqscope_identify::{
    min_perturbation_with, AffineMap, ConsistencyInstance, DeltaSpec, GameExpr, PropertySpec,
};
use serde::Serialize;

/// Inclusive linear axis `lo..=hi` with `steps` points.
#[derive(Debug, Clone, Serialize)]
pub struct ScanGrid {
    pub gamma1: Vec<f64>,
    pub theta1: Vec<f64>,
}

impl ScanGrid {
    pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
        if steps <= 1 {
            return vec![lo];
        }
        (0..steps)
            .map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RegionScan {
    pub gamma1: Vec<f64>,
    pub theta1: Vec<f64>,
    pub budget: f64,
    pub seed: u64,
    /// `values[i][j]` = delta* at `(gamma1[i], theta1[j])`; NaN on error.
    pub values: Vec<Vec<f64>>,
    pub inside: Vec<Vec<bool>>,
    pub timings_ms: Vec<Vec<f64>>,
    pub diagnostics: Vec<String>,
}

/// Structural restriction of the entry game carried by the perturbed games
/// too: stay-out payoffs receive neither shifters nor noise, so the
/// corresponding perturbed entries are pinned to zero.
pub fn entry_structure_hook(
) -> impl Fn(&mut ConicProgram, &GameExpr, &[GameExpr]) + Sync + 'static {
    |p: &mut ConicProgram, _base: &GameExpr, perturbed: &[GameExpr]| {
        for gk in perturbed {
            for (i, j) in [(0usize, 0usize), (0, 1)] {
                p.add_eq(gk.p1.expr(i, j), 0.0);
            }
            for (i, j) in [(0usize, 0usize), (1, 0)] {
                p.add_eq(gk.p2.expr(i, j), 0.0);
            }
        }
    }
}

/// Affine maps fixing `(gamma1, theta1)` numerically and exposing
/// `theta = (gamma2, theta2)` as the two free parameters.
pub fn entry_cell_parametrization(gamma1: f64, theta1: f64) -> PropertySpec {
    let f1 = AffineMap::constant(vec![vec![0.0, 0.0], vec![gamma1, theta1]], 2);
    let mut coeffs2 = vec![vec![vec![0.0; 2]; 2]; 2];
    coeffs2[0][1][0] = 1.0;
    coeffs2[1][1][1] = 1.0;
    let f2 = AffineMap { coeffs: coeffs2, offset: vec![vec![0.0; 2]; 2] };
    PropertySpec::LinearParam { f1, f2 }
}

/// All four entry parameters free: used to locate the unconstrained
/// optimum a scan should bracket.
pub fn entry_free_parametrization() -> PropertySpec {
    let mut coeffs1 = vec![vec![vec![0.0; 4]; 2]; 2];
    coeffs1[1][0][0] = 1.0;
    coeffs1[1][1][1] = 1.0;
    let mut coeffs2 = vec![vec![vec![0.0; 4]; 2]; 2];
    coeffs2[0][1][2] = 1.0;
    coeffs2[1][1][3] = 1.0;
    PropertySpec::LinearParam {
        f1: AffineMap { coeffs: coeffs1, offset: vec![vec![0.0; 2]; 2] },
        f2: AffineMap { coeffs: coeffs2, offset: vec![vec![0.0; 2]; 2] },
    }
}

/// Scans the grid; per-cell failures are recorded and the scan continues.
pub fn scan_region(
    obs: &ObservationSet,
    grid: &ScanGrid,
    metric: Metric,
    budget: f64,
    seed: u64,
    backend: &dyn SolverBackend,
) -> RegionScan {
    let hook = entry_structure_hook();
    let mut values = vec![vec![f64::NAN; grid.theta1.len()]; grid.gamma1.len()];
    let mut inside = vec![vec![false; grid.theta1.len()]; grid.gamma1.len()];
    let mut timings = vec![vec![0.0; grid.theta1.len()]; grid.gamma1.len()];
    let mut diagnostics = Vec::new();
    for (i, &g1) in grid.gamma1.iter().enumerate() {
        for (j, &t1) in grid.theta1.iter().enumerate() {
            let inst = ConsistencyInstance::new(obs.clone(), metric, DeltaSpec::Free)
                .with_property(entry_cell_parametrization(g1, t1));
            let start = Instant::now();
            match min_perturbation_with(&inst, Some(&hook), backend) {
                Ok(rec) => {
                    values[i][j] = rec.delta_star;
                    inside[i][j] = rec.delta_star <= budget;
                }
                Err(e) => diagnostics.push(format!("cell ({g1}, {t1}): {e}")),
            }
            timings[i][j] = start.elapsed().as_secs_f64() * 1e3;
        }
    }
    RegionScan {
        gamma1: grid.gamma1.clone(),
        theta1: grid.theta1.clone(),
        budget,
        seed,
        values,
        inside,
        timings_ms: timings,
        diagnostics,
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    gamma1: &'a [f64],
    theta1: &'a [f64],
    budget: f64,
    seed: u64,
    timings_ms: &'a [Vec<f64>],
    diagnostics: &'a [String],
}

/// Writes `scan.csv` (deterministic bytes for a fixed scan) and
/// `manifest.json` (axes, budget, seed, per-cell wall times) under `dir`.
pub fn emit_outputs(scan: &RegionScan, dir: &Path) -> std::io::Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join("scan.csv");
    let mut csv = std::fs::File::create(&csv_path)?;
    writeln!(csv, "gamma1,theta1,delta_star,inside")?;
    for (i, &g1) in scan.gamma1.iter().enumerate() {
        for (j, &t1) in scan.theta1.iter().enumerate() {
            writeln!(csv, "{:?},{:?},{:?},{}", g1, t1, scan.values[i][j], scan.inside[i][j])?;
        }
    }
    let manifest_path = dir.join("manifest.json");
    let manifest = Manifest {
        gamma1: &scan.gamma1,
        theta1: &scan.theta1,
        budget: scan.budget,
        seed: scan.seed,
        timings_ms: &scan.timings_ms,
        diagnostics: &scan.diagnostics,
    };
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;
    Ok((csv_path, manifest_path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints() {
        let xs = ScanGrid::linspace(-2.0, 2.0, 5);
        assert_eq!(xs, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(ScanGrid::linspace(3.0, 9.0, 1), vec![3.0]);
    }
}
