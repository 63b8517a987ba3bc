//! The correlated-equilibrium test: every deviation inequality must hold.
//!
//! Player 1 must not gain by switching a recommended row `i` to any `i'`:
//! `sum_j g1(i,j) e(i,j) >= sum_j g1(i',j) e(i,j)`, and symmetrically for
//! player 2 over columns. There are `m1(m1-1) + m2(m2-1)` inequalities.

use crate::error::CoreError;
use crate::game::{CorrelatedEquilibrium, Game};

fn check_shapes(g: &Game, e: &CorrelatedEquilibrium) -> Result<(), CoreError> {
    if g.m1 != e.m1() || g.m2 != e.m2() {
        return Err(CoreError::Shape {
            expected: format!("{}x{}", g.m1, g.m2),
            got: format!("{}x{}", e.m1(), e.m2()),
        });
    }
    Ok(())
}

/// Smallest slack over all deviation inequalities; nonnegative iff `e` is a
/// correlated equilibrium of `g` exactly.
pub fn deviation_margin(g: &Game, e: &CorrelatedEquilibrium) -> Result<f64, CoreError> {
    check_shapes(g, e)?;
    let mut margin = f64::INFINITY;
    for i in 0..g.m1 {
        for i2 in 0..g.m1 {
            if i == i2 {
                continue;
            }
            let slack: f64 = (0..g.m2)
                .map(|j| e.probs[i][j] * (g.payoff1[i][j] - g.payoff1[i2][j]))
                .sum();
            margin = margin.min(slack);
        }
    }
    for j in 0..g.m2 {
        for j2 in 0..g.m2 {
            if j == j2 {
                continue;
            }
            let slack: f64 = (0..g.m1)
                .map(|i| e.probs[i][j] * (g.payoff2[i][j] - g.payoff2[i][j2]))
                .sum();
            margin = margin.min(slack);
        }
    }
    Ok(margin)
}

/// True iff all deviation inequalities hold within additive tolerance `tol`.
pub fn is_correlated_equilibrium(
    g: &Game,
    e: &CorrelatedEquilibrium,
    tol: f64,
) -> Result<bool, CoreError> {
    Ok(deviation_margin(g, e)? >= -tol)
}
