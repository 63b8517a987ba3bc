//! Lowering pass: replaces a sum-of-squares objective with its second-order
//! cone epigraph so backends only ever see linear objectives.
//!
//! `min affine + sum w_i sq_i^2` becomes `min affine + r` with the rotated
//! cone written in standard form: `|| (sqrt(w) sq, (1 - r)/2) || <= (1 + r)/2`.

use crate::ir::{ConicProgram, LinExpr, Objective};

/// Returns an equivalent program whose objective has no quadratic part.
/// Programs that are already linear are cloned unchanged.
pub fn lower_quadratic(p: &ConicProgram) -> ConicProgram {
    if p.objective.is_linear() {
        return p.clone();
    }
    let mut lowered = p.clone();
    let r = lowered.add_scalar();

    let mut vector: Vec<LinExpr> = lowered
        .objective
        .squares
        .iter()
        .map(|(w, e)| e.clone().scale(w.sqrt()))
        .collect();
    let mut low = LinExpr::scaled(r.scalar(), -0.5);
    low.add_const(0.5);
    vector.push(low);
    let mut bound = LinExpr::scaled(r.scalar(), 0.5);
    bound.add_const(0.5);
    lowered.add_soc(bound, vector);

    let mut affine = lowered.objective.affine.clone();
    affine.push(1.0, r.scalar());
    lowered.set_objective(Objective {
        sense: lowered.objective.sense,
        affine,
        squares: Vec::new(),
    });
    lowered
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_programs_pass_through() {
        let mut p = ConicProgram::new();
        let x = p.add_scalar();
        p.set_objective(Objective::minimize(LinExpr::term(x.scalar())));
        assert_eq!(lower_quadratic(&p), p);
    }

    #[test]
    fn quadratic_objective_gains_epigraph() {
        let mut p = ConicProgram::new();
        let x = p.add_scalar();
        let mut obj = Objective::minimize(LinExpr::zero());
        obj.squares.push((2.0, LinExpr::term(x.scalar())));
        p.set_objective(obj);
        let lowered = lower_quadratic(&p);
        assert!(lowered.objective.is_linear());
        assert_eq!(lowered.soc.len(), 1);
        assert_eq!(lowered.variables.len(), 2);
        assert_eq!(lowered.soc[0].vector.len(), 2);
    }
}
