//! Serializable result envelopes for the CLI.

use eqscope_conic::SolveStatus;
use eqscope_core::{Game, Player};
use eqscope_cournot::{CournotDiameterReport, CournotRecovery};
use eqscope_identify::{BoundReport, DiameterReport, EntryBound, Recovery};
use serde::Serialize;

pub fn status_str(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::Optimal => "optimal",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::Unbounded => "unbounded",
        SolveStatus::NumericalTrouble => "numerical_trouble",
    }
}

/// Finite values appear as numbers; the markers as strings.
#[derive(Serialize)]
#[serde(untagged)]
pub enum BoundValue {
    Finite(f64),
    Marker(&'static str),
}

impl From<EntryBound> for BoundValue {
    fn from(b: EntryBound) -> Self {
        match b {
            EntryBound::Finite(v) => BoundValue::Finite(v),
            EntryBound::CapExceeded(_) => BoundValue::Marker("cap_exceeded"),
            EntryBound::Unbounded => BoundValue::Marker("unbounded"),
            EntryBound::Infeasible => BoundValue::Marker("infeasible"),
        }
    }
}

#[derive(Serialize)]
pub struct RecoveryReport {
    pub delta_star: f64,
    pub game: Game,
    pub perturbed_games: Vec<Game>,
    pub status: &'static str,
}

impl From<&Recovery> for RecoveryReport {
    fn from(r: &Recovery) -> Self {
        RecoveryReport {
            delta_star: r.delta_star,
            game: r.game.clone(),
            perturbed_games: r.perturbed.clone(),
            status: status_str(r.status),
        }
    }
}

#[derive(Serialize)]
pub struct DiameterJson {
    pub value: BoundValue,
    /// `[player, i, j]`, 1-based player index.
    pub argmax: [usize; 3],
    pub per_entry: Vec<Vec<Vec<BoundValue>>>,
    pub diagnostics: Vec<(String, String)>,
}

impl From<&DiameterReport> for DiameterJson {
    fn from(r: &DiameterReport) -> Self {
        let (player, i, j) = r.argmax;
        let p = match player {
            Player::One => 1,
            Player::Two => 2,
        };
        DiameterJson {
            value: r.value.into(),
            argmax: [p, i, j],
            per_entry: r
                .per_entry
                .iter()
                .map(|m| m.iter().map(|row| row.iter().map(|&b| b.into()).collect()).collect())
                .collect(),
            diagnostics: r.diagnostics.clone(),
        }
    }
}

#[derive(Serialize)]
pub struct BoundsJson {
    pub norm2: f64,
    pub norminf: f64,
    pub lhs: [f64; 2],
    pub rhs: f64,
    pub ok: bool,
}

impl BoundsJson {
    pub fn new(norm2: f64, norminf: f64, report: &BoundReport) -> Self {
        BoundsJson {
            norm2,
            norminf,
            lhs: report.lhs,
            rhs: report.rhs,
            ok: report.ok,
        }
    }
}

#[derive(Serialize)]
pub struct DegeneracyJson {
    pub epsilon_star: f64,
    pub p_curve: Vec<(f64, f64)>,
    pub envelope_ok: Option<bool>,
}

#[derive(Serialize)]
pub struct CournotRecoveryJson {
    pub delta_star: f64,
    pub model: eqscope_cournot::CournotModel,
    pub perturbed: Vec<Vec<Vec<f64>>>,
    pub status: &'static str,
}

impl From<&CournotRecovery> for CournotRecoveryJson {
    fn from(r: &CournotRecovery) -> Self {
        CournotRecoveryJson {
            delta_star: r.delta_star,
            model: r.model.clone(),
            perturbed: r.perturbed.clone(),
            status: status_str(r.status),
        }
    }
}

#[derive(Serialize)]
pub struct CournotDiameterJson {
    pub value: BoundValue,
    /// `[player, power]`, 1-based power.
    pub argmax: [usize; 2],
    pub per_coeff: Vec<Vec<BoundValue>>,
}

impl From<&CournotDiameterReport> for CournotDiameterJson {
    fn from(r: &CournotDiameterReport) -> Self {
        CournotDiameterJson {
            value: r.value.into(),
            argmax: [r.argmax.0, r.argmax.1 + 1],
            per_coeff: r
                .per_coeff
                .iter()
                .map(|row| row.iter().map(|&b| b.into()).collect())
                .collect(),
        }
    }
}
