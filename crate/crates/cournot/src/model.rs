//! Model data and the first-order equilibrium constraints.

use eqscope_conic::{ConicProgram, LinExpr, VariableHandle};
use serde::{Deserialize, Serialize};

use crate::error::CournotError;

/// Price family hook: anything that evaluates `P(q)` and its partial
/// derivatives at an observed quantity profile can supply equilibrium
/// constraints.
pub trait PriceModel: Sync {
    fn value(&self, q: &[f64]) -> f64;
    fn gradient(&self, q: &[f64], i: usize) -> f64;
}

/// The affine inverse demand `P(q) = 1 - alpha * sum q` used throughout
/// the simulations.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AffinePrice {
    pub alpha: f64,
}

impl PriceModel for AffinePrice {
    fn value(&self, q: &[f64]) -> f64 {
        1.0 - self.alpha * q.iter().sum::<f64>()
    }

    fn gradient(&self, _q: &[f64], _i: usize) -> f64 {
        -self.alpha
    }
}

/// Cost-side description of a Cournot game: `n` players, price slope
/// `alpha`, and per player the coefficients `a_i(1..=degree)` of the cost
/// polynomial; the constant term is fixed to zero (it moves no decision).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CournotModel {
    pub n: usize,
    pub alpha: f64,
    pub degree: usize,
    /// `coeffs[i][x - 1]` is `a_i(x)`.
    pub coeffs: Vec<Vec<f64>>,
}

impl CournotModel {
    pub fn cost(&self, i: usize, q: f64) -> f64 {
        self.coeffs[i]
            .iter()
            .enumerate()
            .map(|(k, a)| a * q.powi(k as i32 + 1))
            .sum()
    }

    /// Second derivative of player `i`'s cost at `q`.
    pub fn cost_curvature(&self, i: usize, q: f64) -> f64 {
        self.coeffs[i]
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, a)| {
                let x = (k + 1) as f64;
                a * x * (x - 1.0) * q.powi(k as i32 - 1)
            })
            .sum()
    }
}

/// One equilibrium observation: the played quantity profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CournotObservation {
    pub quantities: Vec<f64>,
}

impl CournotObservation {
    pub fn validate(&self, n: usize) -> Result<(), CournotError> {
        if self.quantities.len() != n {
            return Err(CournotError::Parameter(format!(
                "observation has {} quantities, expected {n}",
                self.quantities.len()
            )));
        }
        if self.quantities.iter().any(|q| !q.is_finite() || *q < 0.0) {
            return Err(CournotError::Parameter("quantities must be finite and nonnegative".into()));
        }
        Ok(())
    }
}

/// Marginal-revenue side of the first-order condition at `q` for player
/// `i`: `q_i dP/dq_i + P(q)`.
pub fn foc_lhs(price: &dyn PriceModel, q: &[f64], i: usize) -> f64 {
    q[i] * price.gradient(q, i) + price.value(q)
}

/// Appends the `n` first-order-condition equalities of one observation,
/// linear in the coefficient variables:
/// `sum_x x a_i(x) q_i^{x-1} = q_i dP/dq_i + P(q)`.
pub fn build_foc_constraints(
    p: &mut ConicProgram,
    coeffs: VariableHandle,
    degree: usize,
    obs: &CournotObservation,
    price: &dyn PriceModel,
) {
    let q = &obs.quantities;
    for i in 0..q.len() {
        let mut expr = LinExpr::zero();
        for x in 1..=degree {
            let coef = x as f64 * q[i].powi(x as i32 - 1);
            expr.push(coef, coeffs.entry(i, x - 1));
        }
        p.add_eq(expr, foc_lhs(price, q, i));
    }
}
