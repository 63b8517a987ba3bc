//! Distances between an underlying game and a batch of perturbed games.

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::game::Game;

/// `SumOfSquares` (d2) sums squared entry differences over both players and
/// all perturbed games; `Maximum` (dinf) takes the largest absolute entry
/// difference over players and perturbed games.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "d2")]
    SumOfSquares,
    #[serde(rename = "dinf")]
    Maximum,
}

pub fn metric_distance(metric: Metric, g: &Game, perturbed: &[Game]) -> Result<f64, CoreError> {
    for gk in perturbed {
        if !g.same_shape(gk) {
            return Err(CoreError::Shape {
                expected: format!("{}x{}", g.m1, g.m2),
                got: format!("{}x{}", gk.m1, gk.m2),
            });
        }
    }
    let diffs = perturbed.iter().flat_map(|gk| {
        [(&g.payoff1, &gk.payoff1), (&g.payoff2, &gk.payoff2)]
            .into_iter()
            .flat_map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x - y))
            })
    });
    Ok(match metric {
        Metric::SumOfSquares => diffs.map(|d| d * d).sum(),
        Metric::Maximum => diffs.map(f64::abs).fold(0.0, f64::max),
    })
}
