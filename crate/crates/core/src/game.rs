use serde::{Deserialize, Serialize};

use crate::error::CoreError;

/// Dense row-major payoff matrix; index `[i][j]` is (row action i, column action j).
pub type Matrix = Vec<Vec<f64>>;

/// Entries may dip this far below zero before a distribution is rejected;
/// anything in `[-PROB_NEG_TOL, 0)` is clamped to 0.
pub const PROB_NEG_TOL: f64 = 1e-12;
/// Tolerance on the total mass of a distribution; sums within this of 1 are
/// renormalized. Both tolerances absorb solver output noise.
pub const PROB_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub const BOTH: [Player; 2] = [Player::One, Player::Two];

    pub fn index(self) -> usize {
        match self {
            Player::One => 0,
            Player::Two => 1,
        }
    }
}

fn check_matrix(m: &Matrix, m1: usize, m2: usize, what: &'static str) -> Result<(), CoreError> {
    if m.len() != m1 || m.iter().any(|row| row.len() != m2) {
        return Err(CoreError::Shape {
            expected: format!("{m1}x{m2}"),
            got: format!("{}x{}", m.len(), m.first().map_or(0, |r| r.len())),
        });
    }
    if m.iter().flatten().any(|x| !x.is_finite()) {
        return Err(CoreError::NonFinite(what));
    }
    Ok(())
}

/// A finite 2-player game in normal form: one payoff matrix per player,
/// both of shape `m1 x m2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GameRaw")]
pub struct Game {
    pub m1: usize,
    pub m2: usize,
    pub payoff1: Matrix,
    pub payoff2: Matrix,
}

#[derive(Deserialize)]
struct GameRaw {
    m1: usize,
    m2: usize,
    payoff1: Matrix,
    payoff2: Matrix,
}

impl TryFrom<GameRaw> for Game {
    type Error = CoreError;

    fn try_from(raw: GameRaw) -> Result<Self, CoreError> {
        Game::new(raw.payoff1, raw.payoff2).and_then(|g| {
            if g.m1 != raw.m1 || g.m2 != raw.m2 {
                Err(CoreError::Shape {
                    expected: format!("{}x{}", raw.m1, raw.m2),
                    got: format!("{}x{}", g.m1, g.m2),
                })
            } else {
                Ok(g)
            }
        })
    }
}

impl Game {
    pub fn new(payoff1: Matrix, payoff2: Matrix) -> Result<Self, CoreError> {
        let m1 = payoff1.len();
        let m2 = payoff1.first().map_or(0, |r| r.len());
        if m1 == 0 || m2 == 0 {
            return Err(CoreError::Shape {
                expected: "positive dimensions".into(),
                got: format!("{m1}x{m2}"),
            });
        }
        check_matrix(&payoff1, m1, m2, "payoff1")?;
        check_matrix(&payoff2, m1, m2, "payoff2")?;
        Ok(Game { m1, m2, payoff1, payoff2 })
    }

    /// Game with every payoff of both players equal to `c`.
    pub fn constant(m1: usize, m2: usize, c: f64) -> Self {
        Game {
            m1,
            m2,
            payoff1: vec![vec![c; m2]; m1],
            payoff2: vec![vec![c; m2]; m1],
        }
    }

    pub fn payoff(&self, p: Player) -> &Matrix {
        match p {
            Player::One => &self.payoff1,
            Player::Two => &self.payoff2,
        }
    }

    pub fn same_shape(&self, other: &Game) -> bool {
        self.m1 == other.m1 && self.m2 == other.m2
    }
}

/// A correlated equilibrium candidate: a joint distribution over action
/// profiles, stored as an `m1 x m2` matrix of probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CorrelatedEquilibrium {
    pub probs: Matrix,
}

impl CorrelatedEquilibrium {
    /// Validates nonnegativity and total mass, clamping entries in
    /// `[-1e-12, 0)` to zero and renormalizing sums within `1e-9` of 1.
    pub fn new(probs: Matrix) -> Result<Self, CoreError> {
        let m1 = probs.len();
        let m2 = probs.first().map_or(0, |r| r.len());
        check_matrix(&probs, m1, m2, "probs")?;
        let mut probs = probs;
        for row in probs.iter_mut() {
            for x in row.iter_mut() {
                if *x < 0.0 {
                    if *x < -PROB_NEG_TOL {
                        return Err(CoreError::Probability(format!("negative entry {x}")));
                    }
                    *x = 0.0;
                }
            }
        }
        let sum: f64 = probs.iter().flatten().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(CoreError::Probability(format!("entries sum to {sum}")));
        }
        if sum != 1.0 {
            for row in probs.iter_mut() {
                for x in row.iter_mut() {
                    *x /= sum;
                }
            }
        }
        Ok(CorrelatedEquilibrium { probs })
    }

    /// Point mass on action profile `(i, j)`.
    pub fn point_mass(m1: usize, m2: usize, i: usize, j: usize) -> Self {
        let mut probs = vec![vec![0.0; m2]; m1];
        probs[i][j] = 1.0;
        CorrelatedEquilibrium { probs }
    }

    /// Uniform distribution over all action profiles.
    pub fn uniform(m1: usize, m2: usize) -> Self {
        CorrelatedEquilibrium {
            probs: vec![vec![1.0 / (m1 * m2) as f64; m2]; m1],
        }
    }

    pub fn m1(&self) -> usize {
        self.probs.len()
    }

    pub fn m2(&self) -> usize {
        self.probs.first().map_or(0, |r| r.len())
    }

    /// Row-major vectorization, index `i * m2 + j`.
    pub fn vectorized(&self) -> Vec<f64> {
        self.probs.iter().flatten().copied().collect()
    }

    /// Expected payoff `<e, g_p>` of this distribution on one payoff matrix.
    pub fn expected_payoff(&self, payoff: &Matrix) -> f64 {
        self.probs
            .iter()
            .zip(payoff)
            .map(|(er, gr)| er.iter().zip(gr).map(|(e, g)| e * g).sum::<f64>())
            .sum()
    }
}

/// Which side information accompanies each observed equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObservationModel {
    #[serde(rename = "partial_payoff")]
    PartialPayoffInfo,
    #[serde(rename = "shifter")]
    PayoffShifterInfo,
    #[serde(rename = "none")]
    NoPayoffInfo,
}

/// One observed equilibrium plus optional side information.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub e: CorrelatedEquilibrium,
    /// Expected equilibrium payoffs `(v1, v2)` in the partial-payoff model.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<(f64, f64)>,
    /// Observed payoff shifters `(beta1, beta2)` in the shifter model.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<(Matrix, Matrix)>,
}

/// The full input to an identification query: `l >= 1` observations under a
/// declared observation model, dimension-consistent with `m1 x m2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ObservationSetRaw")]
pub struct ObservationSet {
    pub model: ObservationModel,
    #[serde(skip)]
    pub m1: usize,
    #[serde(skip)]
    pub m2: usize,
    pub observations: Vec<Observation>,
}

#[derive(Deserialize)]
struct ObservationSetRaw {
    model: ObservationModel,
    observations: Vec<Observation>,
}

impl TryFrom<ObservationSetRaw> for ObservationSet {
    type Error = CoreError;

    fn try_from(raw: ObservationSetRaw) -> Result<Self, CoreError> {
        ObservationSet::new(raw.model, raw.observations)
    }
}

impl ObservationSet {
    pub fn new(model: ObservationModel, observations: Vec<Observation>) -> Result<Self, CoreError> {
        let first = observations
            .first()
            .ok_or_else(|| CoreError::Model("need at least one observation".into()))?;
        let (m1, m2) = (first.e.m1(), first.e.m2());
        for (k, obs) in observations.iter().enumerate() {
            if obs.e.m1() != m1 || obs.e.m2() != m2 {
                return Err(CoreError::Shape {
                    expected: format!("{m1}x{m2}"),
                    got: format!("{}x{} at observation {k}", obs.e.m1(), obs.e.m2()),
                });
            }
            match model {
                ObservationModel::PartialPayoffInfo if obs.v.is_none() => {
                    return Err(CoreError::Model(format!(
                        "observation {k} lacks payoff info required by the partial-payoff model"
                    )));
                }
                ObservationModel::PayoffShifterInfo => match &obs.beta {
                    None => {
                        return Err(CoreError::Model(format!(
                            "observation {k} lacks the shifter required by the shifter model"
                        )));
                    }
                    Some((b1, b2)) => {
                        check_matrix(b1, m1, m2, "beta1")?;
                        check_matrix(b2, m1, m2, "beta2")?;
                    }
                },
                _ => {}
            }
        }
        Ok(ObservationSet { model, m1, m2, observations })
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }
}
