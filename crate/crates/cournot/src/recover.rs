//! Perturbation-minimizing recovery of cost coefficients: per-observation
//! first-order equalities on the perturbed coefficient sets, sum-of-squares
//! convexity on the base and perturbed costs, and the metric ball over
//! coefficient differences.

use eqscope_conic::{
    ConicProgram, LinExpr, Objective, Sense, SolveStatus, SolverBackend, VariableHandle,
};
use eqscope_core::Metric;

use crate::error::CournotError;
use crate::model::{build_foc_constraints, CournotModel, CournotObservation, PriceModel};
use crate::sos::build_sos_convexity;

pub(crate) struct CoeffSystem {
    pub base: VariableHandle,
    pub perturbed: Vec<VariableHandle>,
}

/// Shared constraint block: base and per-observation coefficient matrices,
/// FOC equalities on each perturbed set, convexity certificates on all of
/// them, and the metric constraint `d(a^1, ..., a^l | a) <= delta`.
pub(crate) fn assemble_coeff_system(
    p: &mut ConicProgram,
    n: usize,
    degree: usize,
    obs: &[CournotObservation],
    price: &dyn PriceModel,
    metric: Metric,
    delta: &LinExpr,
) -> Result<CoeffSystem, CournotError> {
    if degree == 0 {
        return Err(CournotError::Parameter("degree must be at least 1".into()));
    }
    if obs.is_empty() {
        return Err(CournotError::Parameter("need at least one observation".into()));
    }
    for o in obs {
        o.validate(n)?;
    }
    let base = p.add_matrix(n, degree);
    let perturbed: Vec<VariableHandle> = (0..obs.len()).map(|_| p.add_matrix(n, degree)).collect();
    for (vars, o) in perturbed.iter().zip(obs) {
        build_foc_constraints(p, *vars, degree, o, price);
    }
    for i in 0..n {
        build_sos_convexity(p, base, i, degree);
        for vars in &perturbed {
            build_sos_convexity(p, *vars, i, degree);
        }
    }
    match metric {
        // zero budget: the ball degenerates to equalities (see the
        // game-side builder for the numerical rationale)
        Metric::SumOfSquares if delta.is_constant() && delta.constant == 0.0 => {
            for vars in &perturbed {
                for idx in 0..n * degree {
                    p.add_eq(LinExpr::diff(vars.at(idx), base.at(idx)), 0.0);
                }
            }
        }
        Metric::SumOfSquares => {
            let mut vector = Vec::with_capacity(obs.len() * n * degree + 1);
            for vars in &perturbed {
                for idx in 0..n * degree {
                    vector.push(LinExpr::diff(vars.at(idx), base.at(idx)));
                }
            }
            let mut low = delta.clone().scale(-0.5);
            low.add_const(0.5);
            vector.push(low);
            let mut bound = delta.clone().scale(0.5);
            bound.add_const(0.5);
            p.add_soc(bound, vector);
        }
        Metric::Maximum => {
            for vars in &perturbed {
                for idx in 0..n * degree {
                    let d = LinExpr::diff(vars.at(idx), base.at(idx));
                    let mut upper = d.clone();
                    upper.add(&delta.clone().scale(-1.0), 1.0);
                    p.add_le(upper, 0.0);
                    let mut lower = d;
                    lower.add(delta, 1.0);
                    p.add_ge(lower, 0.0);
                }
            }
        }
    }
    Ok(CoeffSystem { base, perturbed })
}

#[derive(Debug, Clone)]
pub struct CournotRecovery {
    pub delta_star: f64,
    pub model: CournotModel,
    /// Per-observation perturbed coefficient matrices.
    pub perturbed: Vec<Vec<Vec<f64>>>,
    pub status: SolveStatus,
}

/// Minimizes the coefficient-space perturbation budget subject to every
/// observation being a first-order equilibrium of its perturbed convex
/// cost profile.
pub fn cournot_min_perturbation(
    obs: &[CournotObservation],
    metric: Metric,
    degree: usize,
    n: usize,
    price: &dyn PriceModel,
    alpha_for_report: f64,
    backend: &dyn SolverBackend,
) -> Result<CournotRecovery, CournotError> {
    let mut p = ConicProgram::new();
    let delta = p.add_scalar();
    p.add_ge(LinExpr::term(delta.scalar()), 0.0);
    let sys = assemble_coeff_system(
        &mut p,
        n,
        degree,
        obs,
        price,
        metric,
        &LinExpr::term(delta.scalar()),
    )?;
    p.set_objective(Objective {
        sense: Sense::Minimize,
        affine: LinExpr::term(delta.scalar()),
        squares: Vec::new(),
    });
    let sol = backend.solve(&p)?;
    if sol.status != SolveStatus::Optimal {
        return Err(CournotError::solver(sol.status, sol.diagnostic));
    }
    Ok(CournotRecovery {
        delta_star: sol.scalar(delta),
        model: CournotModel {
            n,
            alpha: alpha_for_report,
            degree,
            coeffs: sol.matrix(sys.base, n, degree),
        },
        perturbed: sys
            .perturbed
            .iter()
            .map(|vars| sol.matrix(*vars, n, degree))
            .collect(),
        status: sol.status,
    })
}
