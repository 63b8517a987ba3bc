//! Structural checks run before a program is handed to a backend.

use std::fmt;

use crate::ir::{ConicProgram, LinExpr, Sense};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn diag(out: &mut Vec<Diagnostic>, message: String) {
    out.push(Diagnostic { message });
}

fn check_expr(p: &ConicProgram, e: &LinExpr, what: &str, out: &mut Vec<Diagnostic>) {
    if !e.constant.is_finite() {
        diag(out, format!("{what}: non-finite constant"));
    }
    for &(entry, coef) in &e.terms {
        if !coef.is_finite() {
            diag(out, format!("{what}: non-finite coefficient"));
        }
        match p.variables.get(entry.var.0) {
            None => diag(out, format!("{what}: references undeclared variable v{}", entry.var.0)),
            Some(v) => {
                if entry.index >= v.len() {
                    diag(
                        out,
                        format!(
                            "{what}: index {} out of bounds for v{} (len {})",
                            entry.index,
                            entry.var.0,
                            v.len()
                        ),
                    );
                }
            }
        }
    }
}

/// Returns an empty list iff the program invariants hold.
pub fn validate(p: &ConicProgram) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (i, v) in p.variables.iter().enumerate() {
        if v.id.0 != i {
            diag(&mut out, format!("variable at position {i} has id {}", v.id.0));
        }
    }
    for (i, c) in p.linear.iter().enumerate() {
        check_expr(p, &c.expr, &format!("linear constraint {i}"), &mut out);
        if !c.rhs.is_finite() {
            diag(&mut out, format!("linear constraint {i}: non-finite rhs"));
        }
    }
    for (i, c) in p.soc.iter().enumerate() {
        check_expr(p, &c.bound, &format!("soc constraint {i} bound"), &mut out);
        for (k, e) in c.vector.iter().enumerate() {
            check_expr(p, e, &format!("soc constraint {i} component {k}"), &mut out);
        }
    }
    for (i, c) in p.psd.iter().enumerate() {
        if c.entries.len() != c.dim * (c.dim + 1) / 2 {
            diag(
                &mut out,
                format!(
                    "psd constraint {i}: {} entries for dim {} (want {})",
                    c.entries.len(),
                    c.dim,
                    c.dim * (c.dim + 1) / 2
                ),
            );
        }
        for (k, e) in c.entries.iter().enumerate() {
            check_expr(p, e, &format!("psd constraint {i} entry {k}"), &mut out);
        }
    }
    check_expr(p, &p.objective.affine, "objective", &mut out);
    for (i, (w, e)) in p.objective.squares.iter().enumerate() {
        check_expr(p, e, &format!("objective square {i}"), &mut out);
        if !(*w >= 0.0) {
            diag(
                &mut out,
                format!("objective square {i}: weight {w} makes the quadratic non-sum-of-squares"),
            );
        }
    }
    if !p.objective.squares.is_empty() && p.objective.sense == Sense::Maximize {
        diag(&mut out, "maximizing a sum of squares is not convex".to_string());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{Entry, Objective, Relation, VarId};

    #[test]
    fn well_formed_lp_is_clean() {
        let mut p = ConicProgram::new();
        let x = p.add_scalar();
        p.add_linear(LinExpr::term(x.scalar()), Relation::Ge, 3.0);
        p.set_objective(Objective::minimize(LinExpr::term(x.scalar())));
        assert!(validate(&p).is_empty());
    }

    #[test]
    fn undeclared_variable_is_flagged() {
        let mut p = ConicProgram::new();
        let ghost = Entry { var: VarId(7), index: 0 };
        p.add_linear(LinExpr::term(ghost), Relation::Le, 0.0);
        assert_eq!(validate(&p).len(), 1);
    }

    #[test]
    fn negative_square_weight_is_flagged() {
        let mut p = ConicProgram::new();
        let x = p.add_scalar();
        let mut obj = Objective::minimize(LinExpr::zero());
        obj.squares.push((-1.0, LinExpr::term(x.scalar())));
        p.set_objective(obj);
        assert_eq!(validate(&p).len(), 1);
    }
}
