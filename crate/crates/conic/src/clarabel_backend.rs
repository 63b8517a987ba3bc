//! In-process backend built on the Clarabel interior-point solver.
//!
//! Quadratic objectives are lowered to SOCP epigraph form first, so the
//! translation below only ever emits a linear objective. Row layout follows
//! Clarabel's `Ax + s = b, s in K` convention: equalities (zero cone), then
//! scalar inequalities (nonnegative cone), then one block per second-order
//! cone, then one scaled-triangle block per PSD constraint.

use std::collections::HashMap;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

use crate::backend::{eval_objective, max_violation, ConicError, Solution, SolveStatus, SolverBackend};
use crate::ir::{ConicProgram, LinExpr, Relation, Sense};
use crate::lower::lower_quadratic;
use crate::validate::validate;

/// Residual bound promised for `Optimal` solutions; anything worse is
/// downgraded to `NumericalTrouble`.
pub const RESIDUAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct ClarabelBackend {
    name: String,
    eps: f64,
    max_iter: u32,
}

impl Default for ClarabelBackend {
    fn default() -> Self {
        ClarabelBackend { name: "clarabel".into(), eps: 1e-9, max_iter: 500 }
    }
}

impl ClarabelBackend {
    /// Tighter tolerances; used for boundary-sensitive queries and as the
    /// second conforming backend in the agreement suite.
    pub fn high_accuracy() -> Self {
        ClarabelBackend { name: "clarabel-hi".into(), eps: 1e-11, max_iter: 2000 }
    }

    pub fn with_eps(eps: f64) -> Self {
        ClarabelBackend { name: format!("clarabel-eps{eps:e}"), eps, max_iter: 2000 }
    }
}

struct Triplets {
    rows: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    b: Vec<f64>,
}

impl Triplets {
    fn new() -> Self {
        Triplets { rows: Vec::new(), cols: Vec::new(), vals: Vec::new(), b: Vec::new() }
    }

    /// Appends row `s_row = rhs - sign * expr(x)` so that
    /// `s_row = b - A x` holds with `A` row `sign * coefs`.
    fn push_row(&mut self, expr: &LinExpr, sign: f64, rhs: f64, offsets: &[usize]) {
        let row = self.b.len();
        for &(entry, coef) in &expr.terms {
            if coef != 0.0 {
                self.rows.push(row);
                self.cols.push(offsets[entry.var.0] + entry.index);
                self.vals.push(sign * coef);
            }
        }
        self.b.push(rhs - sign * expr.constant);
    }

    fn into_csc(self, nrows: usize, ncols: usize) -> (CscMatrix<f64>, Vec<f64>) {
        let mut order: Vec<usize> = (0..self.vals.len()).collect();
        order.sort_by_key(|&k| (self.cols[k], self.rows[k]));
        let mut colptr = vec![0usize; ncols + 1];
        let mut rowval = Vec::with_capacity(order.len());
        let mut nzval = Vec::with_capacity(order.len());
        for &k in &order {
            colptr[self.cols[k] + 1] += 1;
            rowval.push(self.rows[k]);
            nzval.push(self.vals[k]);
        }
        for c in 0..ncols {
            colptr[c + 1] += colptr[c];
        }
        (CscMatrix::new(nrows, ncols, colptr, rowval, nzval), self.b)
    }
}

impl SolverBackend for ClarabelBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn solve(&self, original: &ConicProgram) -> Result<Solution, ConicError> {
        let diagnostics = validate(original);
        if !diagnostics.is_empty() {
            return Err(ConicError::Invalid(diagnostics));
        }
        let p = lower_quadratic(original);
        let offsets = p.offsets();
        let mut ncols = p.num_entries();
        let dummy = ncols == 0;
        if dummy {
            ncols = 1;
        }

        let mut t = Triplets::new();
        let mut cones: Vec<SupportedConeT<f64>> = Vec::new();

        let n_eq = p.linear.iter().filter(|c| c.rel == Relation::Eq).count();
        if n_eq > 0 {
            cones.push(SupportedConeT::ZeroConeT(n_eq));
            for c in p.linear.iter().filter(|c| c.rel == Relation::Eq) {
                t.push_row(&c.expr, 1.0, c.rhs, &offsets);
            }
        }
        let n_ineq = p.linear.len() - n_eq;
        if n_ineq > 0 {
            cones.push(SupportedConeT::NonnegativeConeT(n_ineq));
            for c in p.linear.iter().filter(|c| c.rel != Relation::Eq) {
                match c.rel {
                    // rhs - expr >= 0
                    Relation::Le => t.push_row(&c.expr, 1.0, c.rhs, &offsets),
                    // expr - rhs >= 0
                    Relation::Ge => t.push_row(&c.expr, -1.0, -c.rhs, &offsets),
                    Relation::Eq => unreachable!(),
                }
            }
        }
        for c in &p.soc {
            cones.push(SupportedConeT::SecondOrderConeT(c.vector.len() + 1));
            t.push_row(&c.bound, -1.0, 0.0, &offsets);
            for e in &c.vector {
                t.push_row(e, -1.0, 0.0, &offsets);
            }
        }
        for c in &p.psd {
            cones.push(SupportedConeT::PSDTriangleConeT(c.dim));
            let mut k = 0;
            for i in 0..c.dim {
                for j in 0..=i {
                    // scaled svec: off-diagonal entries carry sqrt(2)
                    let scale = if i == j { 1.0 } else { std::f64::consts::SQRT_2 };
                    t.push_row(&c.entries[k].clone().scale(scale), -1.0, 0.0, &offsets);
                    k += 1;
                }
            }
        }

        let nrows = t.b.len();
        let (a, b) = t.into_csc(nrows, ncols);
        let pmat = CscMatrix::<f64>::zeros((ncols, ncols));
        let sign = match p.objective.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut q = vec![0.0; ncols];
        for &(entry, coef) in &p.objective.affine.terms {
            q[offsets[entry.var.0] + entry.index] += sign * coef;
        }

        let settings = DefaultSettingsBuilder::default()
            .verbose(false)
            .max_iter(self.max_iter)
            .tol_feas(self.eps)
            .tol_gap_abs(self.eps)
            .tol_gap_rel(self.eps)
            .build()
            .map_err(|e| ConicError::Backend(format!("settings: {e:?}")))?;

        let mut solver = DefaultSolver::new(&pmat, &q, &a, &b, &cones, settings)
            .map_err(|e| ConicError::Backend(format!("setup: {e:?}")))?;
        solver.solve();

        let status = solver.solution.status;
        let x = &solver.solution.x;
        let mut primal_values = HashMap::new();
        if !dummy {
            for (v, &off) in original.variables.iter().zip(&offsets) {
                primal_values.insert(v.id.0, x[off..off + v.len()].to_vec());
            }
        }

        let mapped = match status {
            SolverStatus::Solved | SolverStatus::AlmostSolved => SolveStatus::Optimal,
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
                SolveStatus::Infeasible
            }
            SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => {
                SolveStatus::Unbounded
            }
            _ => SolveStatus::NumericalTrouble,
        };

        let mut solution = match mapped {
            SolveStatus::Optimal => {
                let objective_value = eval_objective(original, &primal_values);
                let dual = sign * solver.info.cost_dual + p.objective.affine.constant;
                Solution {
                    status: SolveStatus::Optimal,
                    primal_values,
                    objective_value,
                    dual_objective_value: Some(dual),
                    diagnostic: match status {
                        SolverStatus::AlmostSolved => Some("almost solved".into()),
                        _ => None,
                    },
                }
            }
            other => Solution {
                status: other,
                primal_values,
                objective_value: f64::NAN,
                dual_objective_value: None,
                diagnostic: Some(format!("{status:?}")),
            },
        };

        if solution.status == SolveStatus::Optimal {
            let violation = max_violation(original, &solution.primal_values);
            if violation > RESIDUAL_TOL {
                solution.status = SolveStatus::NumericalTrouble;
                solution.diagnostic =
                    Some(format!("residual {violation:.3e} exceeds {RESIDUAL_TOL:.1e}"));
            }
        }
        Ok(solution)
    }
}
