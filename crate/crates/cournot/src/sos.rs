//! Convexity of a polynomial cost as a semidefinite constraint: the second
//! derivative must be a sum of squares, witnessed by a PSD Gram matrix
//! whose antidiagonal sums match the coefficients of `c''`.

use eqscope_conic::{ConicProgram, LinExpr, PsdConstraint, VariableHandle};

/// Appends the sum-of-squares convexity certificate for player `i`'s cost
/// of the given degree. Degree <= 1 costs have `c'' = 0` and need nothing.
/// Otherwise a Gram variable `Q` of size `s + 1`, `s = ceil((d - 2) / 2)`,
/// is introduced with `z' Q z = c''(x)` for `z = (1, x, ..., x^s)`; the
/// padding degree present when `d - 2` is odd is matched to zero, so a
/// nonzero odd leading coefficient renders the program infeasible rather
/// than being silently accepted.
pub fn build_sos_convexity(
    p: &mut ConicProgram,
    coeffs: VariableHandle,
    player: usize,
    degree: usize,
) -> Option<VariableHandle> {
    if degree <= 1 {
        return None;
    }
    let s = (degree - 2).div_ceil(2);
    let gram = p.add_symmetric(s + 1);
    for t in 0..=2 * s {
        let mut expr = LinExpr::zero();
        for r in 0..=s.min(t) {
            let c = t - r;
            if c > s || c > r {
                continue;
            }
            let mult = if r == c { 1.0 } else { 2.0 };
            expr.push(mult, gram.entry(r, c));
        }
        // target coefficient of x^t in c'' = sum_{x >= 2} x (x-1) a(x) x^{t-2}
        if t + 2 <= degree {
            let x = (t + 2) as f64;
            expr.push(-(x * (x - 1.0)), coeffs.entry(player, t + 1));
        }
        p.add_eq(expr, 0.0);
    }
    p.add_psd(PsdConstraint::from_variable(gram));
    Some(gram)
}
