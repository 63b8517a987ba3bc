//! Deterministic textual dump of a program, and the matching parser.
//! Used by golden-file tests; floats are printed with their shortest
//! round-trip representation so parse(dump(p)) is structurally equal to p.

use std::fmt::Write as _;

use crate::ir::{
    ConicProgram, Entry, LinExpr, Objective, PsdConstraint, Relation, Sense, VarId, VarShape,
};

fn write_expr(out: &mut String, e: &LinExpr) {
    out.push('{');
    write!(out, "{:?}", e.constant).unwrap();
    for (entry, coef) in &e.terms {
        write!(out, " + {:?}*v{}[{}]", coef, entry.var.0, entry.index).unwrap();
    }
    out.push('}');
}

pub fn dump(p: &ConicProgram) -> String {
    let mut out = String::from("conic-program\n");
    for v in &p.variables {
        match v.shape {
            VarShape::Scalar => writeln!(out, "var {} scalar", v.id.0).unwrap(),
            VarShape::Matrix { rows, cols } => {
                writeln!(out, "var {} matrix {rows} {cols}", v.id.0).unwrap()
            }
            VarShape::Symmetric { dim } => {
                writeln!(out, "var {} symmetric {dim}", v.id.0).unwrap()
            }
        }
    }
    let sense = match p.objective.sense {
        Sense::Minimize => "min",
        Sense::Maximize => "max",
    };
    let mut line = format!("objective {sense} ");
    write_expr(&mut line, &p.objective.affine);
    out.push_str(&line);
    out.push('\n');
    for (w, e) in &p.objective.squares {
        let mut line = format!("square {w:?} ");
        write_expr(&mut line, e);
        out.push_str(&line);
        out.push('\n');
    }
    for c in &p.linear {
        let rel = match c.rel {
            Relation::Le => "<=",
            Relation::Eq => "==",
            Relation::Ge => ">=",
        };
        let mut line = String::from("lin ");
        write_expr(&mut line, &c.expr);
        write!(line, " {rel} {:?}", c.rhs).unwrap();
        out.push_str(&line);
        out.push('\n');
    }
    for c in &p.soc {
        let mut line = String::from("soc bound ");
        write_expr(&mut line, &c.bound);
        write!(line, " dim {}", c.vector.len()).unwrap();
        out.push_str(&line);
        out.push('\n');
        for e in &c.vector {
            let mut line = String::from("  ");
            write_expr(&mut line, e);
            out.push_str(&line);
            out.push('\n');
        }
    }
    for c in &p.psd {
        writeln!(out, "psd dim {}", c.dim).unwrap();
        for e in &c.entries {
            let mut line = String::from("  ");
            write_expr(&mut line, e);
            out.push_str(&line);
            out.push('\n');
        }
    }
    out.push_str("end\n");
    out
}

fn parse_expr(s: &str) -> Result<LinExpr, String> {
    let s = s.trim();
    let inner = s
        .strip_prefix('{')
        .and_then(|r| r.strip_suffix('}'))
        .ok_or_else(|| format!("expression not braced: {s}"))?;
    let mut parts = inner.split(" + ");
    let constant: f64 = parts
        .next()
        .ok_or("empty expression")?
        .parse()
        .map_err(|e| format!("bad constant: {e}"))?;
    let mut expr = LinExpr::constant(constant);
    for part in parts {
        let (coef, rest) = part
            .split_once("*v")
            .ok_or_else(|| format!("bad term: {part}"))?;
        let coef: f64 = coef.parse().map_err(|e| format!("bad coefficient: {e}"))?;
        let (var, idx) = rest
            .strip_suffix(']')
            .and_then(|r| r.split_once('['))
            .ok_or_else(|| format!("bad entry: {part}"))?;
        let var: usize = var.parse().map_err(|e| format!("bad var id: {e}"))?;
        let index: usize = idx.parse().map_err(|e| format!("bad index: {e}"))?;
        expr.push(coef, Entry { var: VarId(var), index });
    }
    Ok(expr)
}

pub fn parse(text: &str) -> Result<ConicProgram, String> {
    let mut p = ConicProgram::new();
    let mut lines = text.lines().peekable();
    if lines.next() != Some("conic-program") {
        return Err("missing header".into());
    }
    while let Some(line) = lines.next() {
        let line_trimmed = line.trim_end();
        if line_trimmed == "end" {
            return Ok(p);
        }
        let mut words = line_trimmed.split_whitespace();
        match words.next() {
            Some("var") => {
                let _id: usize = words.next().ok_or("var id")?.parse().map_err(|_| "var id")?;
                match words.next() {
                    Some("scalar") => {
                        p.add_scalar();
                    }
                    Some("matrix") => {
                        let r: usize =
                            words.next().ok_or("rows")?.parse().map_err(|_| "rows")?;
                        let c: usize =
                            words.next().ok_or("cols")?.parse().map_err(|_| "cols")?;
                        p.add_matrix(r, c);
                    }
                    Some("symmetric") => {
                        let d: usize = words.next().ok_or("dim")?.parse().map_err(|_| "dim")?;
                        p.add_symmetric(d);
                    }
                    other => return Err(format!("bad var shape: {other:?}")),
                }
            }
            Some("objective") => {
                let sense = match words.next() {
                    Some("min") => Sense::Minimize,
                    Some("max") => Sense::Maximize,
                    other => return Err(format!("bad sense: {other:?}")),
                };
                let brace = line_trimmed
                    .find('{')
                    .ok_or_else(|| "objective without expression".to_string())?;
                let affine = parse_expr(&line_trimmed[brace..])?;
                p.set_objective(Objective { sense, affine, squares: Vec::new() });
            }
            Some("square") => {
                let w: f64 = words
                    .next()
                    .ok_or("square weight")?
                    .parse()
                    .map_err(|_| "square weight")?;
                let brace = line_trimmed.find('{').ok_or("square expression")?;
                let e = parse_expr(&line_trimmed[brace..])?;
                p.objective.squares.push((w, e));
            }
            Some("lin") => {
                let close = line_trimmed.rfind('}').ok_or("lin expression")?;
                let brace = line_trimmed.find('{').ok_or("lin expression")?;
                let expr = parse_expr(&line_trimmed[brace..=close])?;
                let rest = line_trimmed[close + 1..].trim();
                let (rel_s, rhs_s) = rest.split_once(' ').ok_or("lin relation")?;
                let rel = match rel_s {
                    "<=" => Relation::Le,
                    "==" => Relation::Eq,
                    ">=" => Relation::Ge,
                    other => return Err(format!("bad relation {other}")),
                };
                let rhs: f64 = rhs_s.trim().parse().map_err(|_| "lin rhs")?;
                p.add_linear(expr, rel, rhs);
            }
            Some("soc") => {
                let close = line_trimmed.rfind('}').ok_or("soc bound")?;
                let brace = line_trimmed.find('{').ok_or("soc bound")?;
                let bound = parse_expr(&line_trimmed[brace..=close])?;
                let dim: usize = line_trimmed[close + 1..]
                    .trim()
                    .strip_prefix("dim ")
                    .ok_or("soc dim")?
                    .parse()
                    .map_err(|_| "soc dim")?;
                let mut vector = Vec::with_capacity(dim);
                for _ in 0..dim {
                    let row = lines.next().ok_or("soc component missing")?;
                    vector.push(parse_expr(row)?);
                }
                p.add_soc(bound, vector);
            }
            Some("psd") => {
                let dim: usize = line_trimmed
                    .trim()
                    .strip_prefix("psd dim ")
                    .ok_or("psd dim")?
                    .parse()
                    .map_err(|_| "psd dim")?;
                let count = dim * (dim + 1) / 2;
                let mut entries = Vec::with_capacity(count);
                for _ in 0..count {
                    let row = lines.next().ok_or("psd entry missing")?;
                    entries.push(parse_expr(row)?);
                }
                p.add_psd(PsdConstraint { dim, entries });
            }
            Some(other) => return Err(format!("unknown record {other}")),
            None => {}
        }
    }
    Err("missing end marker".into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::LinExpr;
    use proptest::prelude::*;

    #[test]
    fn dump_parse_small_program() {
        let mut p = ConicProgram::new();
        let x = p.add_scalar();
        let g = p.add_matrix(2, 2);
        let s = p.add_symmetric(2);
        p.add_ge(LinExpr::term(x.scalar()), 3.0);
        let mut e = LinExpr::diff(g.entry(0, 0), g.entry(1, 1));
        e.add_const(-0.25);
        p.add_le(e, 0.5);
        p.add_soc(
            LinExpr::term(x.scalar()),
            vec![LinExpr::term(g.entry(0, 1)), LinExpr::constant(2.0)],
        );
        p.add_psd(PsdConstraint::from_variable(s));
        let mut obj = Objective::minimize(LinExpr::term(x.scalar()));
        obj.squares.push((1.5, LinExpr::diff(g.entry(0, 0), g.entry(0, 1))));
        p.set_objective(obj);

        let text = dump(&p);
        let back = parse(&text).unwrap();
        assert_eq!(back, p);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn round_trip_random_programs(
            coefs in proptest::collection::vec(-1e3f64..1e3, 1..12),
            rhs in -10.0f64..10.0,
            sense_max in any::<bool>(),
        ) {
            let mut p = ConicProgram::new();
            let m = p.add_matrix(3, 4);
            let mut expr = LinExpr::constant(rhs * 0.5);
            for (k, &c) in coefs.iter().enumerate() {
                expr.push(c, m.at(k % 12));
            }
            p.add_linear(expr.clone(), Relation::Le, rhs);
            p.add_soc(expr.clone(), vec![LinExpr::constant(1.0), expr.clone()]);
            let obj = if sense_max {
                Objective::maximize(expr)
            } else {
                let mut o = Objective::minimize(LinExpr::zero());
                o.squares.push((0.25, expr));
                o
            };
            p.set_objective(obj);
            let back = parse(&dump(&p)).unwrap();
            prop_assert_eq!(back, p);
        }
    }
}
