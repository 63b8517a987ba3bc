//! Recovery-accuracy machinery for the partial-payoff-information model:
//! selecting a square matrix of linearly independent observations, induced
//! norms of its inverse, the per-player recovery bounds they imply, and the
//! near-singular four-equilibrium construction showing those bounds tight.

use eqscope_core::game::Matrix;
use eqscope_core::{
    CorrelatedEquilibrium, Game, Metric, Observation, ObservationModel, ObservationSet,
};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::consistency::{min_perturbation, ConsistencyInstance, DeltaSpec, Recovery};
use crate::error::IdentifyError;
use eqscope_conic::SolverBackend;

/// Condition-estimate threshold beyond which a selected matrix is flagged.
pub const SINGULAR_FLAG_COND: f64 = 1e12;
/// Pivoted-elimination residual below which a candidate adds no rank.
pub const RANK_TOL: f64 = 1e-10;

/// Square matrix whose rows are the vectorized equilibria of a linearly
/// independent subset of the observations (row-major vectorization).
#[derive(Debug, Clone)]
pub struct ObservationMatrix {
    pub e: DMatrix<f64>,
    /// Indices into the observation set, in selection order.
    pub selected: Vec<usize>,
    pub condition_estimate: f64,
    pub singular_flag: bool,
}

/// Greedy pivoted elimination: repeatedly picks the remaining observation
/// with the largest residual after projecting out the span of the rows
/// already chosen. A heuristic, not optimal subset conditioning; linear
/// independence is all the downstream bounds need.
pub fn select_independent_subset(
    obs: &ObservationSet,
) -> Result<ObservationMatrix, IdentifyError> {
    let n = obs.m1 * obs.m2;
    if obs.len() < n {
        return Err(IdentifyError::NotEnoughObservations { need: n, got: obs.len() });
    }
    let rows: Vec<Vec<f64>> = obs
        .observations
        .iter()
        .map(|o| o.e.vectorized())
        .collect();

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut selected = Vec::new();
    let mut remaining: Vec<usize> = (0..rows.len()).collect();
    while selected.len() < n {
        let mut best: Option<(usize, f64, Vec<f64>)> = None;
        for (pos, &cand) in remaining.iter().enumerate() {
            let mut r = rows[cand].clone();
            for b in &basis {
                let dot: f64 = r.iter().zip(b).map(|(x, y)| x * y).sum();
                for (x, y) in r.iter_mut().zip(b) {
                    *x -= dot * y;
                }
            }
            let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            if best.as_ref().is_none_or(|(_, bn, _)| norm > *bn) {
                best = Some((pos, norm, r));
            }
        }
        let (pos, norm, mut residual) = best.expect("remaining nonempty");
        if norm < RANK_TOL {
            return Err(IdentifyError::NotIdentifiable { rank: selected.len(), need: n });
        }
        for x in residual.iter_mut() {
            *x /= norm;
        }
        basis.push(residual);
        selected.push(remaining.remove(pos));
    }

    let e = DMatrix::from_fn(n, n, |r, c| rows[selected[r]][c]);
    let svd = e.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition_estimate = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    Ok(ObservationMatrix {
        e,
        selected,
        condition_estimate,
        singular_flag: condition_estimate > SINGULAR_FLAG_COND,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InducedNorm {
    Two,
    Infinity,
}

/// Induced matrix norm of `E^{-1}`. The 2-norm is the largest singular
/// value of `E^{-1}`, obtained by power iteration on `(E^{-1})' E^{-1}`
/// (applied through LU solves) to relative tolerance 1e-8; the
/// infinity norm is the maximum absolute row sum of the explicit inverse.
pub fn induced_norm_inverse(
    em: &ObservationMatrix,
    which: InducedNorm,
) -> Result<f64, IdentifyError> {
    let n = em.e.nrows();
    let lu = em.e.clone().lu();
    let lu_t = em.e.transpose().lu();
    match which {
        InducedNorm::Infinity => {
            let inv = em.e.clone().try_inverse().ok_or(IdentifyError::Singular)?;
            Ok((0..n)
                .map(|i| (0..n).map(|j| inv[(i, j)].abs()).sum::<f64>())
                .fold(0.0, f64::max))
        }
        InducedNorm::Two => {
            let mut v = DMatrix::from_fn(n, 1, |i, _| 1.0 + (i as f64) / (n as f64));
            let mut lambda = 0.0f64;
            for iter in 0..20_000 {
                let norm = v.norm();
                if norm == 0.0 {
                    return Err(IdentifyError::Singular);
                }
                v /= norm;
                // w = E^{-1} v, u = E^{-T} w, so u = (E^{-1})' E^{-1} v
                let w = lu.solve(&v).ok_or(IdentifyError::Singular)?;
                let u = lu_t.solve(&w).ok_or(IdentifyError::Singular)?;
                let next = v.dot(&u);
                let done = iter > 0 && (next - lambda).abs() <= 1e-8 * next.abs().max(1e-300);
                lambda = next;
                v = u;
                if done {
                    break;
                }
            }
            Ok(lambda.sqrt())
        }
    }
}

/// Per-player recovery bound check. For the sum-of-squares metric the
/// left side is the vectorized 2-norm of the payoff error and the right
/// side `sqrt(2 ||E^{-1}||_2 delta)`; for the maximum metric the left side
/// is the entrywise maximum and the right side `2 ||E^{-1}||_inf delta`.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub lhs: [f64; 2],
    pub rhs: f64,
    pub ok: bool,
}

pub fn verify_recovery_bound(
    true_game: &Game,
    recovered: &Game,
    em: &ObservationMatrix,
    delta: f64,
    metric: Metric,
) -> Result<BoundReport, IdentifyError> {
    let diff_norm = |a: &Matrix, b: &Matrix| -> f64 {
        let diffs = a
            .iter()
            .zip(b)
            .flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x - y));
        match metric {
            Metric::SumOfSquares => diffs.map(|d| d * d).sum::<f64>().sqrt(),
            Metric::Maximum => diffs.map(f64::abs).fold(0.0, f64::max),
        }
    };
    let lhs = [
        diff_norm(&true_game.payoff1, &recovered.payoff1),
        diff_norm(&true_game.payoff2, &recovered.payoff2),
    ];
    let rhs = match metric {
        Metric::SumOfSquares => {
            (2.0 * induced_norm_inverse(em, InducedNorm::Two)? * delta).sqrt()
        }
        Metric::Maximum => 2.0 * induced_norm_inverse(em, InducedNorm::Infinity)? * delta,
    };
    Ok(BoundReport { lhs, rhs, ok: lhs[0] <= rhs + 1e-6 && lhs[1] <= rhs + 1e-6 })
}

/// The tightness construction: four near-uniform equilibria (probability
/// `0.25 + eps` rotating over the four cells of a 2x2 game), player-1
/// payoffs `v = (delta, -delta, delta, -delta)`, player-2 payoffs all zero,
/// and the two rival explanation families with their closed-form maximum
/// distances.
#[derive(Debug, Clone)]
pub struct Example2 {
    pub obs: ObservationSet,
    /// The all-zero explanation and its perturbed games.
    pub game: Game,
    pub perturbed: Vec<Game>,
    /// The far-away explanation (entries of size delta/eps) and its
    /// perturbed games.
    pub game_hat: Game,
    pub perturbed_hat: Vec<Game>,
    /// `d_inf` of the all-zero explanation: `delta / (0.5 + 2 eps / 3)`.
    pub dinf_zero_side: f64,
    /// `d_inf` of the far explanation: `2 delta / (3 - 4 eps)`.
    pub dinf_hat_side: f64,
    /// Closed-form separation credited between the two explanations:
    /// `delta/eps - delta/(0.5 + 2 eps/3)`, a lower bound on the diameter.
    pub separation: f64,
}

/// Player-1 payoff matrix constant along each column: `col0` in the first
/// column, `col1` in the second. Any equilibrium satisfies player 1's
/// deviation constraints on such a game.
fn column_game(col0: f64, col1: f64) -> Game {
    Game {
        m1: 2,
        m2: 2,
        payoff1: vec![vec![col0, col1], vec![col0, col1]],
        payoff2: vec![vec![0.0; 2]; 2],
    }
}

pub fn example2_instance(eps: f64, delta: f64) -> Result<Example2, IdentifyError> {
    if !(0.0 < eps && eps < 0.25) {
        return Err(IdentifyError::Parameter(format!("eps = {eps} not in (0, 0.25)")));
    }
    if delta <= 0.0 {
        return Err(IdentifyError::Parameter(format!("delta = {delta} <= 0")));
    }
    let hi = 0.25 + eps;
    let lo = (0.75 - eps) / 3.0;
    let cells = [(0usize, 0usize), (0, 1), (1, 0), (1, 1)];
    let vs = [delta, -delta, delta, -delta];
    let mut observations = Vec::with_capacity(4);
    for (k, &(i, j)) in cells.iter().enumerate() {
        let mut probs = vec![vec![lo; 2]; 2];
        probs[i][j] = hi;
        observations.push(Observation {
            e: CorrelatedEquilibrium::new(probs).map_err(IdentifyError::Core)?,
            v: Some((vs[k], 0.0)),
            beta: None,
        });
    }
    let obs = ObservationSet::new(ObservationModel::PartialPayoffInfo, observations)
        .map_err(IdentifyError::Core)?;

    // Equilibria k = 1, 3 put column-1 mass 0.5 + 2 eps / 3; k = 2, 4 put
    // that mass on column 2. Payoff c on one column yields expected payoff
    // c (0.5 + 2 eps / 3) on the matching observations.
    let c = delta / (0.5 + 2.0 * eps / 3.0);
    let game = Game::constant(2, 2, 0.0);
    let g13 = column_game(c, 0.0);
    let g24 = column_game(0.0, -c);
    let perturbed = vec![g13.clone(), g24.clone(), g13, g24];

    let ratio = (3.0 - 2.0 * eps) / (3.0 - 4.0 * eps);
    let game_hat = column_game(delta / eps, -delta / eps);
    let gh13 = column_game(delta / eps, -(delta / eps) * ratio);
    let gh24 = column_game((delta / eps) * ratio, -delta / eps);
    let perturbed_hat = vec![gh13.clone(), gh24.clone(), gh13, gh24];

    Ok(Example2 {
        obs,
        game,
        perturbed,
        game_hat,
        perturbed_hat,
        dinf_zero_side: c,
        dinf_hat_side: 2.0 * delta / (3.0 - 4.0 * eps),
        separation: delta / eps - c,
    })
}

/// Sparse-game recovery option: solves the program on the subgame of
/// actions that appear with positive probability in some observation, then
/// fills every unobserved action's payoffs with one less than the smallest
/// recovered payoff, leaving the equilibrium structure intact.
pub fn recover_sparse(
    inst: &ConsistencyInstance,
    backend: &dyn SolverBackend,
) -> Result<Recovery, IdentifyError> {
    let obs = &inst.obs;
    let support_tol = 1e-12;
    let rows: Vec<usize> = (0..obs.m1)
        .filter(|&i| {
            obs.observations
                .iter()
                .any(|o| o.e.probs[i].iter().any(|&x| x > support_tol))
        })
        .collect();
    let cols: Vec<usize> = (0..obs.m2)
        .filter(|&j| {
            obs.observations
                .iter()
                .any(|o| o.e.probs.iter().any(|r| r[j] > support_tol))
        })
        .collect();
    if rows.len() == obs.m1 && cols.len() == obs.m2 {
        return min_perturbation(inst, backend);
    }

    let restrict = |m: &Matrix| -> Matrix {
        rows.iter()
            .map(|&i| cols.iter().map(|&j| m[i][j]).collect())
            .collect()
    };
    let sub_observations: Vec<Observation> = obs
        .observations
        .iter()
        .map(|o| {
            Ok(Observation {
                e: CorrelatedEquilibrium::new(restrict(&o.e.probs))
                    .map_err(IdentifyError::Core)?,
                v: o.v,
                beta: o.beta.as_ref().map(|(b1, b2)| (restrict(b1), restrict(b2))),
            })
        })
        .collect::<Result<_, IdentifyError>>()?;
    let sub_obs = ObservationSet::new(obs.model, sub_observations).map_err(IdentifyError::Core)?;
    let mut sub_inst = inst.clone();
    sub_inst.obs = sub_obs;
    let rec = min_perturbation(&sub_inst, backend)?;

    let floor = rec
        .game
        .payoff1
        .iter()
        .chain(rec.game.payoff2.iter())
        .flatten()
        .fold(f64::INFINITY, |a, &b| a.min(b))
        - 1.0;
    let expand = |sub: &Matrix| -> Matrix {
        let mut full = vec![vec![floor; obs.m2]; obs.m1];
        for (si, &i) in rows.iter().enumerate() {
            for (sj, &j) in cols.iter().enumerate() {
                full[i][j] = sub[si][sj];
            }
        }
        full
    };
    let expand_game = |g: &Game| Game {
        m1: obs.m1,
        m2: obs.m2,
        payoff1: expand(&g.payoff1),
        payoff2: expand(&g.payoff2),
    };
    Ok(Recovery {
        delta_star: rec.delta_star,
        game: expand_game(&rec.game),
        perturbed: rec.perturbed.iter().map(expand_game).collect(),
        status: rec.status,
    })
}

/// Convenience wrapper for the recovery-plus-bound pipeline used by the CLI.
pub fn recover_and_bound(
    inst: &ConsistencyInstance,
    true_game: Option<&Game>,
    delta: f64,
    backend: &dyn SolverBackend,
) -> Result<(Recovery, Option<BoundReport>), IdentifyError> {
    let mut free = inst.clone();
    free.delta = DeltaSpec::Free;
    let rec = min_perturbation(&free, backend)?;
    let report = match true_game {
        Some(g) => {
            let em = select_independent_subset(&inst.obs)?;
            Some(verify_recovery_bound(g, &rec.game, &em, delta, inst.metric)?)
        }
        None => None,
    };
    Ok((rec, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use eqscope_core::is_correlated_equilibrium;

    fn point_mass_obs() -> ObservationSet {
        let cells = [(0, 0), (0, 1), (1, 0), (1, 1)];
        ObservationSet::new(
            ObservationModel::PartialPayoffInfo,
            cells
                .iter()
                .map(|&(i, j)| Observation {
                    e: CorrelatedEquilibrium::point_mass(2, 2, i, j),
                    v: Some((0.0, 0.0)),
                    beta: None,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn point_masses_give_permutation_identity() {
        let em = select_independent_subset(&point_mass_obs()).unwrap();
        let n = 4;
        for r in 0..n {
            let ones: Vec<usize> = (0..n).filter(|&c| (em.e[(r, c)] - 1.0).abs() < 1e-12).collect();
            assert_eq!(ones.len(), 1);
            assert!((0..n).filter(|&c| em.e[(r, c)].abs() > 1e-12).count() == 1);
        }
        assert!(!em.singular_flag);
        assert!((em.condition_estimate - 1.0).abs() < 1e-9);
    }

    #[test]
    fn repeated_uniform_is_not_identifiable() {
        let obs = ObservationSet::new(
            ObservationModel::PartialPayoffInfo,
            (0..4)
                .map(|_| Observation {
                    e: CorrelatedEquilibrium::uniform(2, 2),
                    v: Some((0.0, 0.0)),
                    beta: None,
                })
                .collect(),
        )
        .unwrap();
        match select_independent_subset(&obs) {
            Err(IdentifyError::NotIdentifiable { rank, need }) => {
                assert_eq!(rank, 1);
                assert_eq!(need, 4);
            }
            other => panic!("expected NotIdentifiable, got {other:?}"),
        }
    }

    #[test]
    fn norms_of_identity_and_diagonal() {
        let em = select_independent_subset(&point_mass_obs()).unwrap();
        assert!((induced_norm_inverse(&em, InducedNorm::Two).unwrap() - 1.0).abs() < 1e-7);
        assert!((induced_norm_inverse(&em, InducedNorm::Infinity).unwrap() - 1.0).abs() < 1e-12);

        let diag = ObservationMatrix {
            e: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 0.5])),
            selected: vec![0, 1],
            condition_estimate: 4.0,
            singular_flag: false,
        };
        assert!((induced_norm_inverse(&diag, InducedNorm::Two).unwrap() - 2.0).abs() < 1e-7);
        assert!((induced_norm_inverse(&diag, InducedNorm::Infinity).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn example2_construction_matches_closed_forms() {
        let (eps, delta) = (0.1, 1.0);
        let ex = example2_instance(eps, delta).unwrap();

        // Both explanation families reproduce the observations exactly.
        for (k, o) in ex.obs.observations.iter().enumerate() {
            let (v1, _) = o.v.unwrap();
            for (g, gk) in [(&ex.game, &ex.perturbed[k]), (&ex.game_hat, &ex.perturbed_hat[k])] {
                assert!(is_correlated_equilibrium(gk, &o.e, 1e-12).unwrap());
                assert!((o.e.expected_payoff(&gk.payoff1) - v1).abs() < 1e-9);
                let _ = g;
            }
        }
        assert!((ex.dinf_zero_side - delta / (0.5 + 2.0 * eps / 3.0)).abs() < 1e-15);
        assert!((ex.dinf_hat_side - 2.0 * delta / (3.0 - 4.0 * eps)).abs() < 1e-15);
        // closed-form separation at eps = 0.1, delta = 1
        assert!((ex.separation - 8.235294117647058).abs() < 1e-9);

        // E has full rank and || E^{-1} ||_inf <= C / eps; closed form for
        // the aI + b(J - I) structure gives (4.5 - 2 eps) / (4 eps).
        let em = select_independent_subset(&ex.obs).unwrap();
        let norm_inf = induced_norm_inverse(&em, InducedNorm::Infinity).unwrap();
        let closed = (4.5 - 2.0 * eps) / (4.0 * eps);
        assert!((norm_inf - closed).abs() / closed < 1e-10);
    }

    #[test]
    fn inverse_norm_scaling_in_eps() {
        let at = |eps: f64| {
            let ex = example2_instance(eps, 1.0).unwrap();
            let em = select_independent_subset(&ex.obs).unwrap();
            eps * induced_norm_inverse(&em, InducedNorm::Infinity).unwrap()
        };
        let base = at(0.1);
        for eps in [0.05, 0.01] {
            assert!(at(eps) <= 4.0 * base);
        }
    }

    #[test]
    fn infinity_norm_agrees_with_random_vector_estimate() {
        let ex = example2_instance(0.08, 0.5).unwrap();
        let em = select_independent_subset(&ex.obs).unwrap();
        let norm = induced_norm_inverse(&em, InducedNorm::Infinity).unwrap();
        let inv = em.e.clone().try_inverse().unwrap();
        // sup over sign vectors is attained at one of the 2^4 corners
        let mut best = 0.0f64;
        for mask in 0..16u32 {
            let x = nalgebra::DVector::from_fn(4, |i, _| {
                if mask & (1 << i) != 0 {
                    1.0
                } else {
                    -1.0
                }
            });
            let y = &inv * x;
            best = best.max(y.amax());
        }
        assert!((best - norm).abs() <= 0.05 * norm);
    }
}
