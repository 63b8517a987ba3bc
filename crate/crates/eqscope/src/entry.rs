//! Two-player entry game generation: entry payoffs are the monopoly value
//! when the rival stays out and the duopoly value otherwise, staying out
//! pays zero. Perturbations and payoff shifters are added to the entry
//! payoffs only; each perturbed game's equilibrium list (pure profiles plus
//! the mixed one when it exists) is sampled uniformly.
//!
//! Randomness is a seedable ChaCha stream split per observation index:
//! observation `k` draws from stream `k` of the master seed, so single
//! observations can be regenerated in isolation.

use eqscope_core::game::Matrix;
use eqscope_core::{
    CorrelatedEquilibrium, Game, Observation, ObservationModel, ObservationSet,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EntryGameParams {
    /// Monopoly payoffs, nonnegative.
    pub gamma1: f64,
    pub gamma2: f64,
    /// Duopoly payoffs, at most the matching monopoly payoff.
    pub theta1: f64,
    pub theta2: f64,
    /// Unobserved noise standard deviation.
    pub sigma: f64,
    /// Observed payoff-shifter standard deviation (shifter model only).
    pub sigma_s: f64,
    pub l: usize,
    pub seed: u64,
}

impl EntryGameParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.gamma1 < 0.0 || self.gamma2 < 0.0 {
            return Err("monopoly payoffs must be nonnegative".into());
        }
        if self.theta1 > self.gamma1 || self.theta2 > self.gamma2 {
            return Err("duopoly payoffs cannot exceed monopoly payoffs".into());
        }
        if self.sigma < 0.0 || self.sigma_s < 0.0 {
            return Err("standard deviations must be nonnegative".into());
        }
        if self.l == 0 {
            return Err("need at least one observation".into());
        }
        Ok(())
    }
}

/// Whether the unobserved entry-payoff noise of a player is the same for
/// both rival actions (`Symmetric`, 2 noisy entries per observation) or
/// drawn independently (`Asymmetric`, 4 noisy entries per observation).
/// The chi-square budget calibration uses `2 l` or `4 l` degrees of freedom
/// accordingly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DofMode {
    Symmetric,
    Asymmetric,
}

impl DofMode {
    pub fn dof(&self, l: usize) -> usize {
        match self {
            DofMode::Symmetric => 2 * l,
            DofMode::Asymmetric => 4 * l,
        }
    }
}

/// The base entry game: row/column index 0 is "stay out", 1 is "enter".
pub fn entry_game(gamma1: f64, theta1: f64, gamma2: f64, theta2: f64) -> Game {
    Game {
        m1: 2,
        m2: 2,
        payoff1: vec![vec![0.0, 0.0], vec![gamma1, theta1]],
        payoff2: vec![vec![0.0, gamma2], vec![0.0, theta2]],
    }
}

/// Pure Nash profiles plus the strictly mixed equilibrium when the
/// indifference probabilities are interior. Ties count as (weak) equilibria.
pub fn nash_equilibria_2x2(g: &Game) -> Vec<CorrelatedEquilibrium> {
    const TOL: f64 = 1e-12;
    let mut out = Vec::new();
    for i in 0..2usize {
        for j in 0..2usize {
            let best1 = g.payoff1[i][j] >= g.payoff1[1 - i][j] - TOL;
            let best2 = g.payoff2[i][j] >= g.payoff2[i][1 - j] - TOL;
            if best1 && best2 {
                out.push(CorrelatedEquilibrium::point_mass(2, 2, i, j));
            }
        }
    }
    // player 2 mixes to make player 1 indifferent between rows and vice
    // versa; interior solutions only (boundary cases are pure profiles)
    let a = g.payoff1[0][0] - g.payoff1[1][0];
    let b = g.payoff1[0][1] - g.payoff1[1][1];
    let c = g.payoff2[0][0] - g.payoff2[0][1];
    let d = g.payoff2[1][0] - g.payoff2[1][1];
    if (a - b).abs() > TOL && (c - d).abs() > TOL {
        let q = a / (a - b);
        let p = c / (c - d);
        if q > TOL && q < 1.0 - TOL && p > TOL && p < 1.0 - TOL {
            let probs = vec![
                vec![(1.0 - p) * (1.0 - q), (1.0 - p) * q],
                vec![p * (1.0 - q), p * q],
            ];
            out.push(CorrelatedEquilibrium::new(probs).expect("product distribution"));
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct EntryGroundTruth {
    pub game: Game,
    pub perturbed: Vec<Game>,
    pub shifters: Option<Vec<(Matrix, Matrix)>>,
}

fn zero_matrix() -> Matrix {
    vec![vec![0.0; 2]; 2]
}

/// Draws `l` perturbed entry games, samples one equilibrium of each
/// uniformly from its Nash list, and attaches the side information the
/// observation model requires. Only entry payoffs receive shifters and
/// noise; stay-out payoffs stay exactly zero.
pub fn generate_entry_observations(
    params: &EntryGameParams,
    model: ObservationModel,
    dof_mode: DofMode,
) -> Result<(ObservationSet, EntryGroundTruth), String> {
    params.validate()?;
    let game = entry_game(params.gamma1, params.theta1, params.gamma2, params.theta2);
    let noise = Normal::new(0.0, params.sigma).map_err(|e| e.to_string())?;
    let shift = Normal::new(0.0, params.sigma_s).map_err(|e| e.to_string())?;
    let base = ChaCha8Rng::seed_from_u64(params.seed);

    let mut observations = Vec::with_capacity(params.l);
    let mut perturbed = Vec::with_capacity(params.l);
    let mut shifters = Vec::with_capacity(params.l);
    for k in 0..params.l {
        let mut rng = base.clone();
        rng.set_stream(k as u64);

        let (beta1, beta2) = if model == ObservationModel::PayoffShifterInfo {
            let mut b1 = zero_matrix();
            let mut b2 = zero_matrix();
            b1[1][0] = shift.sample(&mut rng);
            b1[1][1] = shift.sample(&mut rng);
            b2[0][1] = shift.sample(&mut rng);
            b2[1][1] = shift.sample(&mut rng);
            (b1, b2)
        } else {
            (zero_matrix(), zero_matrix())
        };

        let (n1, n2): ([f64; 2], [f64; 2]) = match dof_mode {
            DofMode::Asymmetric => (
                [noise.sample(&mut rng), noise.sample(&mut rng)],
                [noise.sample(&mut rng), noise.sample(&mut rng)],
            ),
            DofMode::Symmetric => {
                let z1 = noise.sample(&mut rng);
                let z2 = noise.sample(&mut rng);
                ([z1, z1], [z2, z2])
            }
        };

        let mut gk = game.clone();
        gk.payoff1[1][0] += beta1[1][0] + n1[0];
        gk.payoff1[1][1] += beta1[1][1] + n1[1];
        gk.payoff2[0][1] += beta2[0][1] + n2[0];
        gk.payoff2[1][1] += beta2[1][1] + n2[1];

        let equilibria = nash_equilibria_2x2(&gk);
        debug_assert!(!equilibria.is_empty(), "a 2x2 game always has a Nash profile");
        let e = equilibria[rng.gen_range(0..equilibria.len())].clone();

        let obs = match model {
            ObservationModel::PartialPayoffInfo => Observation {
                v: Some((e.expected_payoff(&gk.payoff1), e.expected_payoff(&gk.payoff2))),
                e,
                beta: None,
            },
            ObservationModel::PayoffShifterInfo => Observation {
                e,
                v: None,
                beta: Some((beta1.clone(), beta2.clone())),
            },
            ObservationModel::NoPayoffInfo => Observation { e, v: None, beta: None },
        };
        observations.push(obs);
        perturbed.push(gk);
        shifters.push((beta1, beta2));
    }
    let set = ObservationSet::new(model, observations).map_err(|e| e.to_string())?;
    let truth = EntryGroundTruth {
        game,
        perturbed,
        shifters: (model == ObservationModel::PayoffShifterInfo).then_some(shifters),
    };
    Ok((set, truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use eqscope_core::is_correlated_equilibrium;

    #[test]
    fn anti_coordination_entry_equilibria() {
        // gamma = 5, theta = -10: one firm enters, the other stays out,
        // plus a mixed profile
        let g = entry_game(5.0, -10.0, 5.0, -10.0);
        let es = nash_equilibria_2x2(&g);
        let has = |i: usize, j: usize| es.iter().any(|e| (e.probs[i][j] - 1.0).abs() < 1e-12);
        assert!(has(1, 0), "enter/out profile");
        assert!(has(0, 1), "out/enter profile");
        assert!(!has(1, 1));
        assert!(!has(0, 0));
        assert_eq!(es.len(), 3, "two pure plus the mixed profile");
    }

    #[test]
    fn matching_pennies_has_only_the_mixed_profile() {
        let g = Game::new(
            vec![vec![1.0, -1.0], vec![-1.0, 1.0]],
            vec![vec![-1.0, 1.0], vec![1.0, -1.0]],
        )
        .unwrap();
        let es = nash_equilibria_2x2(&g);
        assert_eq!(es.len(), 1);
        for row in &es[0].probs {
            for &x in row {
                assert!((x - 0.25).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_noise_observations_reproduce_base_game() {
        let params = EntryGameParams {
            gamma1: 5.0,
            gamma2: 5.0,
            theta1: -10.0,
            theta2: -10.0,
            sigma: 0.0,
            sigma_s: 0.0,
            l: 6,
            seed: 3,
        };
        let (set, truth) =
            generate_entry_observations(&params, ObservationModel::PartialPayoffInfo, DofMode::Asymmetric)
                .unwrap();
        for (o, gk) in set.observations.iter().zip(&truth.perturbed) {
            assert_eq!(gk, &truth.game);
            let (v1, v2) = o.v.unwrap();
            assert!((o.e.expected_payoff(&truth.game.payoff1) - v1).abs() < 1e-12);
            assert!((o.e.expected_payoff(&truth.game.payoff2) - v2).abs() < 1e-12);
        }
    }

    #[test]
    fn noise_touches_entry_payoffs_only() {
        let params = EntryGameParams {
            gamma1: 5.0,
            gamma2: 4.0,
            theta1: -1.0,
            theta2: -2.0,
            sigma: 0.7,
            sigma_s: 1.3,
            l: 20,
            seed: 11,
        };
        let (set, truth) = generate_entry_observations(
            &params,
            ObservationModel::PayoffShifterInfo,
            DofMode::Asymmetric,
        )
        .unwrap();
        for (o, gk) in set.observations.iter().zip(&truth.perturbed) {
            // stay-out rows of the perturbation are identically zero
            assert_eq!(gk.payoff1[0], vec![0.0, 0.0]);
            assert_eq!(gk.payoff2[0][0], 0.0);
            assert_eq!(gk.payoff2[1][0], 0.0);
            let (b1, b2) = o.beta.as_ref().unwrap();
            assert_eq!(b1[0], vec![0.0, 0.0]);
            assert_eq!(b2[0][0], 0.0);
            assert_eq!(b2[1][0], 0.0);
            // every sampled observation is an equilibrium of its generator
            assert!(is_correlated_equilibrium(gk, &o.e, 1e-8).unwrap());
        }
    }

    #[test]
    fn symmetric_mode_repeats_the_player_draw() {
        let params = EntryGameParams {
            gamma1: 2.0,
            gamma2: 2.0,
            theta1: -1.0,
            theta2: -1.0,
            sigma: 0.5,
            sigma_s: 0.0,
            l: 8,
            seed: 17,
        };
        let (_, truth) = generate_entry_observations(
            &params,
            ObservationModel::NoPayoffInfo,
            DofMode::Symmetric,
        )
        .unwrap();
        for gk in &truth.perturbed {
            let d_mono = gk.payoff1[1][0] - truth.game.payoff1[1][0];
            let d_duo = gk.payoff1[1][1] - truth.game.payoff1[1][1];
            assert!((d_mono - d_duo).abs() < 1e-15);
        }
    }
}
