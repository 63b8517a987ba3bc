//! Desk-scale vertex enumeration for the correlated-equilibrium polytope
//! `{ e >= 0, sum e = 1, all deviation inequalities }`.
//!
//! Exhaustive basis enumeration: every vertex is the unique solution of the
//! mass-balance equality plus `n - 1` active constraints, so we try all
//! `(n - 1)`-subsets of the inequality rows. Exponential in the outcome
//! count, hence the hard cap; this is a test oracle, not a polytope library.

use crate::error::CoreError;
use crate::game::{CorrelatedEquilibrium, Game};

/// Maximum number of outcomes `m1 * m2` accepted by the oracle.
pub const VERTEX_CAP: usize = 16;

const FEAS_TOL: f64 = 1e-9;
const DEDUPE_TOL: f64 = 1e-8;

/// Solves `a x = b` in place by Gaussian elimination with partial pivoting.
/// Returns `None` when the matrix is numerically singular.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |acc, x| acc.max(x.abs()))
        .max(1.0);
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        if a[pivot][col].abs() < 1e-11 * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// All inequality rows of the CE polytope in `coeffs . x >= 0` form:
/// nonnegativity rows first, then player-1 row deviations, then player-2
/// column deviations, in lexicographic pair order.
fn inequality_rows(g: &Game) -> Vec<Vec<f64>> {
    let n = g.m1 * g.m2;
    let idx = |i: usize, j: usize| i * g.m2 + j;
    let mut rows = Vec::new();
    for t in 0..n {
        let mut row = vec![0.0; n];
        row[t] = 1.0;
        rows.push(row);
    }
    for i in 0..g.m1 {
        for i2 in 0..g.m1 {
            if i == i2 {
                continue;
            }
            let mut row = vec![0.0; n];
            for j in 0..g.m2 {
                row[idx(i, j)] = g.payoff1[i][j] - g.payoff1[i2][j];
            }
            rows.push(row);
        }
    }
    for j in 0..g.m2 {
        for j2 in 0..g.m2 {
            if j == j2 {
                continue;
            }
            let mut row = vec![0.0; n];
            for i in 0..g.m1 {
                row[idx(i, j)] = g.payoff2[i][j] - g.payoff2[i][j2];
            }
            rows.push(row);
        }
    }
    rows
}

/// Advances `combo` to the next lexicographic `k`-combination of `0..m`.
fn next_combination(combo: &mut [usize], m: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < m - k + i {
            combo[i] += 1;
            for t in i + 1..k {
                combo[t] = combo[t - 1] + 1;
            }
            return true;
        }
    }
    false
}

pub fn enumerate_ce_vertices(g: &Game) -> Result<Vec<CorrelatedEquilibrium>, CoreError> {
    let n = g.m1 * g.m2;
    if n > VERTEX_CAP {
        return Err(CoreError::Capacity { actual: n, cap: VERTEX_CAP });
    }
    let rows = inequality_rows(g);
    let mut vertices: Vec<Vec<f64>> = Vec::new();

    let k = n - 1;
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        let mut a = Vec::with_capacity(n);
        a.push(vec![1.0; n]);
        for &r in &combo {
            a.push(rows[r].clone());
        }
        let mut b = vec![0.0; n];
        b[0] = 1.0;
        if let Some(x) = solve_dense(a, b) {
            let feasible = rows
                .iter()
                .all(|row| row.iter().zip(&x).map(|(c, v)| c * v).sum::<f64>() >= -FEAS_TOL);
            if feasible
                && !vertices.iter().any(|v| {
                    v.iter().zip(&x).all(|(a, b)| (a - b).abs() <= DEDUPE_TOL)
                })
            {
                vertices.push(x);
            }
        }
        if !next_combination(&mut combo, rows.len()) {
            break;
        }
    }

    vertices
        .into_iter()
        .map(|v| {
            let probs = (0..g.m1)
                .map(|i| v[i * g.m2..(i + 1) * g.m2].to_vec())
                .collect();
            CorrelatedEquilibrium::new(probs)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ce::is_correlated_equilibrium;
    use proptest::prelude::*;

    fn has_point_mass(vs: &[CorrelatedEquilibrium], i: usize, j: usize) -> bool {
        vs.iter().any(|v| (v.probs[i][j] - 1.0).abs() < 1e-8)
    }

    #[test]
    fn constant_game_gives_full_simplex() {
        let g = Game::constant(2, 2, 3.0);
        let vs = enumerate_ce_vertices(&g).unwrap();
        assert_eq!(vs.len(), 4);
        for i in 0..2 {
            for j in 0..2 {
                assert!(has_point_mass(&vs, i, j));
            }
        }
    }

    #[test]
    fn matching_pennies_single_uniform_vertex() {
        let g = Game::new(
            vec![vec![1.0, -1.0], vec![-1.0, 1.0]],
            vec![vec![-1.0, 1.0], vec![1.0, -1.0]],
        )
        .unwrap();
        let vs = enumerate_ce_vertices(&g).unwrap();
        assert_eq!(vs.len(), 1);
        for row in &vs[0].probs {
            for &x in row {
                assert!((x - 0.25).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn coordination_game_has_pure_nash_vertices() {
        let id = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let g = Game::new(id.clone(), id).unwrap();
        let vs = enumerate_ce_vertices(&g).unwrap();
        assert!(has_point_mass(&vs, 0, 0));
        assert!(has_point_mass(&vs, 1, 1));
    }

    #[test]
    fn cap_is_enforced() {
        let g = Game::constant(5, 4, 0.0);
        assert!(matches!(
            enumerate_ce_vertices(&g),
            Err(CoreError::Capacity { actual: 20, cap: 16 })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn every_vertex_is_a_ce(entries in proptest::collection::vec(-3.0f64..3.0, 8)) {
            let g = Game::new(
                vec![entries[0..2].to_vec(), entries[2..4].to_vec()],
                vec![entries[4..6].to_vec(), entries[6..8].to_vec()],
            ).unwrap();
            let vs = enumerate_ce_vertices(&g).unwrap();
            prop_assert!(!vs.is_empty());
            for v in &vs {
                prop_assert!(is_correlated_equilibrium(&g, v, 1e-8).unwrap());
            }
        }
    }
}
