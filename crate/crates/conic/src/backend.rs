//! Backend adapter contract: synchronous call-response, one program in,
//! one [`Solution`] out. Backends must be usable from multiple threads on
//! distinct problem instances.

use std::collections::HashMap;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::ir::{ConicProgram, LinExpr, Relation, VariableHandle};
use crate::validate::Diagnostic;

#[derive(Debug, Error)]
pub enum ConicError {
    #[error("invalid program: {0:?}")]
    Invalid(Vec<Diagnostic>),
    #[error("backend failure: {0}")]
    Backend(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalTrouble,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub status: SolveStatus,
    /// Values per variable id, present when the backend produced an iterate.
    pub primal_values: HashMap<usize, Vec<f64>>,
    pub objective_value: f64,
    pub dual_objective_value: Option<f64>,
    /// Backend diagnostic string for non-optimal terminations.
    pub diagnostic: Option<String>,
}

impl Solution {
    pub fn values(&self, h: VariableHandle) -> &[f64] {
        self.primal_values
            .get(&h.id.0)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn scalar(&self, h: VariableHandle) -> f64 {
        self.values(h)[0]
    }

    pub fn matrix(&self, h: VariableHandle, rows: usize, cols: usize) -> Vec<Vec<f64>> {
        let flat = self.values(h);
        (0..rows)
            .map(|i| flat[i * cols..(i + 1) * cols].to_vec())
            .collect()
    }
}

pub trait SolverBackend: Sync + Send {
    fn name(&self) -> &str;

    /// Solves `p`. Programs failing validation are rejected before
    /// submission; backend failures surface as `NumericalTrouble`.
    fn solve(&self, p: &ConicProgram) -> Result<Solution, ConicError>;
}

/// Evaluates an affine expression at a primal point.
pub fn eval_expr(e: &LinExpr, values: &HashMap<usize, Vec<f64>>) -> f64 {
    e.constant
        + e.terms
            .iter()
            .map(|(entry, c)| c * values[&entry.var.0][entry.index])
            .sum::<f64>()
}

/// Evaluates the original (pre-lowering) objective at a primal point.
pub fn eval_objective(p: &ConicProgram, values: &HashMap<usize, Vec<f64>>) -> f64 {
    eval_expr(&p.objective.affine, values)
        + p.objective
            .squares
            .iter()
            .map(|(w, e)| {
                let v = eval_expr(e, values);
                w * v * v
            })
            .sum::<f64>()
}

/// Largest constraint violation of `p` at a primal point; PSD blocks count
/// the negative part of their smallest eigenvalue.
pub fn max_violation(p: &ConicProgram, values: &HashMap<usize, Vec<f64>>) -> f64 {
    let mut worst = 0.0f64;
    for c in &p.linear {
        let v = eval_expr(&c.expr, values);
        let violation = match c.rel {
            Relation::Le => v - c.rhs,
            Relation::Ge => c.rhs - v,
            Relation::Eq => (v - c.rhs).abs(),
        };
        worst = worst.max(violation);
    }
    for c in &p.soc {
        let norm = c
            .vector
            .iter()
            .map(|e| {
                let v = eval_expr(e, values);
                v * v
            })
            .sum::<f64>()
            .sqrt();
        worst = worst.max(norm - eval_expr(&c.bound, values));
    }
    for c in &p.psd {
        let mut m = DMatrix::zeros(c.dim, c.dim);
        let mut k = 0;
        for i in 0..c.dim {
            for j in 0..=i {
                let v = eval_expr(&c.entries[k], values);
                m[(i, j)] = v;
                m[(j, i)] = v;
                k += 1;
            }
        }
        let eig = m.symmetric_eigenvalues();
        let min_eig = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        worst = worst.max(-min_eig);
    }
    worst
}
