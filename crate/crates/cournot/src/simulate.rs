//! Equilibrium-observation generator for linear-cost Cournot games with
//! truncated Gaussian heterogeneity and per-observation noise.
//!
//! Randomness is a seedable ChaCha stream split deterministically: the
//! base-coefficient draw of game `g` uses stream `g`, and the noise of
//! observation `k` in game `g` uses stream `n_g + g * l + k`, so any
//! observation can be regenerated independently of iteration order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::CournotError;
use crate::model::{CournotModel, CournotObservation};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SimulationParams {
    pub n: usize,
    pub alpha: f64,
    /// Expected linear cost coefficient before heterogeneity.
    pub a_hat: f64,
    /// Standard deviation of the per-game truncated Gaussian offset.
    pub sigma_game: f64,
    /// Standard deviation of the per-observation truncated offset.
    pub sigma_obs: f64,
    pub l: usize,
    pub n_g: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulatedGame {
    /// Underlying linear-cost model (degree 1).
    pub model: CournotModel,
    /// `perturbed_coeffs[k][i]` = the linear coefficient of player `i` in
    /// perturbed game `k`.
    pub perturbed_coeffs: Vec<Vec<f64>>,
    pub observations: Vec<CournotObservation>,
}

/// Unique equilibrium of the linear-cost, affine-price game: eliminating
/// the aggregate `S = sum q` gives `S = (n - sum a) / (alpha (n + 1))` and
/// then a diagonal solve `alpha q_i = 1 - a_i - alpha S`. The full
/// first-order system must re-substitute with residual at most 1e-10.
pub fn solve_linear_equilibrium(alpha: f64, a: &[f64]) -> Result<Vec<f64>, CournotError> {
    if alpha <= 0.0 {
        return Err(CournotError::Parameter(format!("alpha = {alpha} must be positive")));
    }
    let n = a.len() as f64;
    let total: f64 = a.iter().sum();
    let aggregate = (n - total) / (alpha * (n + 1.0));
    let q: Vec<f64> = a.iter().map(|ai| (1.0 - ai) / alpha - aggregate).collect();
    let sum_q: f64 = q.iter().sum();
    for (qi, ai) in q.iter().zip(a) {
        let residual = (-alpha * qi + 1.0 - alpha * sum_q - ai).abs();
        if residual > 1e-10 {
            return Err(CournotError::Simulation(format!(
                "equilibrium residual {residual:.3e} exceeds 1e-10"
            )));
        }
    }
    Ok(q)
}

fn truncated_noise(rng: &mut ChaCha8Rng, sigma: f64, floor: f64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    let z = Normal::new(0.0, sigma).expect("finite sigma").sample(rng);
    z.max(-floor)
}

pub fn simulate_cournot(params: &SimulationParams) -> Result<Vec<SimulatedGame>, CournotError> {
    if params.n == 0 || params.l == 0 || params.n_g == 0 {
        return Err(CournotError::Parameter("n, l, n_g must be positive".into()));
    }
    if params.a_hat < 0.0 || params.sigma_game < 0.0 || params.sigma_obs < 0.0 {
        return Err(CournotError::Parameter("a_hat and sigmas must be nonnegative".into()));
    }
    let base = ChaCha8Rng::seed_from_u64(params.seed);
    let mut games = Vec::with_capacity(params.n_g);
    for g in 0..params.n_g {
        let mut game_rng = base.clone();
        game_rng.set_stream(g as u64);
        // a_i = a_hat + max(Z_i, -a_hat) keeps costs nondecreasing
        let a: Vec<f64> = (0..params.n)
            .map(|_| params.a_hat + truncated_noise(&mut game_rng, params.sigma_game, params.a_hat))
            .collect();

        let mut perturbed_coeffs = Vec::with_capacity(params.l);
        let mut observations = Vec::with_capacity(params.l);
        for k in 0..params.l {
            let mut obs_rng = base.clone();
            obs_rng.set_stream((params.n_g + g * params.l + k) as u64);
            let mut found = None;
            for _ in 0..100 {
                let ak: Vec<f64> = a
                    .iter()
                    .map(|ai| ai + truncated_noise(&mut obs_rng, params.sigma_obs, *ai))
                    .collect();
                let q = solve_linear_equilibrium(params.alpha, &ak)?;
                if q.iter().all(|&x| x > 0.0) {
                    found = Some((ak, q));
                    break;
                }
            }
            let (ak, q) = found.ok_or_else(|| {
                CournotError::Simulation(format!(
                    "observation {k} of game {g}: no positive equilibrium in 100 redraws"
                ))
            })?;
            perturbed_coeffs.push(ak);
            observations.push(CournotObservation { quantities: q });
        }
        games.push(SimulatedGame {
            model: CournotModel {
                n: params.n,
                alpha: params.alpha,
                degree: 1,
                coeffs: a.iter().map(|&x| vec![x]).collect(),
            },
            perturbed_coeffs,
            observations,
        });
    }
    Ok(games)
}
