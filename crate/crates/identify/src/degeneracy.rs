//! No-payoff-information analysis for one player's payoff matrix (player 1
//! throughout; run player 2 by transposing the observations). Deviation
//! vectors turn each equilibrium inequality into an inner product
//! `<e~_{ii'}, G> <= 0`; a total strictness budget epsilon spread over those
//! inequalities rules out the all-constant explanations, and P(epsilon)
//! measures the perturbation cost of meeting the budget under payoffs
//! normalized to [0, 1].

use eqscope_conic::{
    ConicProgram, LinExpr, Objective, Sense, SolveStatus, SolverBackend, VariableHandle,
};
use eqscope_core::game::Matrix;
use eqscope_core::{CorrelatedEquilibrium, Observation, ObservationModel, ObservationSet};
use serde::Serialize;

use crate::error::IdentifyError;

/// Deviation vector for the ordered pair `from -> to`: row `from` carries
/// `-e(from, :)`, row `to` carries `+e(from, :)`, every other row is zero,
/// so `<weights, G> <= 0` is exactly the equilibrium inequality for
/// recommending `from` and deviating to `to`.
#[derive(Debug, Clone, PartialEq)]
pub struct TildeVector {
    pub from: usize,
    pub to: usize,
    pub weights: Matrix,
}

impl TildeVector {
    pub fn is_zero(&self) -> bool {
        self.weights.iter().flatten().all(|&x| x == 0.0)
    }

    pub fn dot(&self, g: &Matrix) -> f64 {
        self.weights
            .iter()
            .zip(g)
            .map(|(wr, gr)| wr.iter().zip(gr).map(|(w, x)| w * x).sum::<f64>())
            .sum()
    }
}

/// All ordered pairs `i != i'` in lexicographic order.
pub fn build_tilde_vectors(e: &CorrelatedEquilibrium) -> Vec<TildeVector> {
    let (m1, m2) = (e.m1(), e.m2());
    let mut out = Vec::with_capacity(m1 * (m1 - 1));
    for from in 0..m1 {
        for to in 0..m1 {
            if from == to {
                continue;
            }
            let mut weights = vec![vec![0.0; m2]; m1];
            for j in 0..m2 {
                weights[from][j] = -e.probs[from][j];
                weights[to][j] = e.probs[from][j];
            }
            out.push(TildeVector { from, to, weights });
        }
    }
    out
}

/// Pads each observed equilibrium with zero-probability dummy rows or
/// columns until it is square. Deviation pairs stay restricted to the
/// original action set (a dummy action is never a deviation target), so
/// P(epsilon) and the threshold are unchanged by padding.
fn pad_square(e: &CorrelatedEquilibrium) -> CorrelatedEquilibrium {
    let m = e.m1().max(e.m2());
    if e.m1() == m && e.m2() == m {
        return e.clone();
    }
    let mut probs = vec![vec![0.0; m]; m];
    for (i, row) in e.probs.iter().enumerate() {
        probs[i][..row.len()].copy_from_slice(row);
    }
    CorrelatedEquilibrium { probs }
}

fn require_no_payoff_info(obs: &ObservationSet) -> Result<(), IdentifyError> {
    if obs.model != ObservationModel::NoPayoffInfo {
        return Err(IdentifyError::Precondition(
            "degeneracy analysis runs in the no-payoff-information model".into(),
        ));
    }
    Ok(())
}

/// Observations with players swapped, for running the player-2 program.
pub fn transpose_observations(obs: &ObservationSet) -> ObservationSet {
    let observations = obs
        .observations
        .iter()
        .map(|o| {
            let t: Matrix = (0..obs.m2)
                .map(|j| (0..obs.m1).map(|i| o.e.probs[i][j]).collect())
                .collect();
            Observation {
                e: CorrelatedEquilibrium { probs: t },
                v: o.v.map(|(v1, v2)| (v2, v1)),
                beta: o.beta.as_ref().map(|(b1, b2)| {
                    let tr = |m: &Matrix| -> Matrix {
                        (0..obs.m2)
                            .map(|j| (0..obs.m1).map(|i| m[i][j]).collect())
                            .collect()
                    };
                    (tr(b2), tr(b1))
                }),
            }
        })
        .collect();
    ObservationSet::new(obs.model, observations).expect("transpose preserves validity")
}

/// Strictness-controlled recovery instance: total budget `epsilon` to be
/// split over the non-vacuous equilibrium inequalities, payoffs of the base
/// matrix normalized to [0, 1].
#[derive(Debug, Clone)]
pub struct StrictnessInstance {
    pub obs: ObservationSet,
    pub epsilon: f64,
}

#[derive(Debug, Clone)]
pub struct PSolution {
    pub value: f64,
    /// Base payoff matrix (padded square).
    pub game: Matrix,
    pub perturbed: Vec<Matrix>,
    /// Slack of each (observation, pair) inequality at the optimum.
    pub slacks: Vec<(usize, usize, usize, f64)>,
    pub dual_objective: Option<f64>,
}

struct PProgram {
    program: ConicProgram,
    base: VariableHandle,
    perturbed: Vec<VariableHandle>,
    tildes: Vec<Vec<TildeVector>>,
    m: usize,
}

/// Shared constraint system of P(epsilon): strict-equilibrium equalities
/// with total slack epsilon, box on the base matrix.
fn build_p_program(inst: &StrictnessInstance) -> Result<PProgram, IdentifyError> {
    require_no_payoff_info(&inst.obs)?;
    if inst.epsilon < 0.0 {
        return Err(IdentifyError::Parameter(format!("epsilon = {} < 0", inst.epsilon)));
    }
    let padded: Vec<CorrelatedEquilibrium> =
        inst.obs.observations.iter().map(|o| pad_square(&o.e)).collect();
    let m = padded[0].m1();
    let mut p = ConicProgram::new();
    let base = p.add_matrix(m, m);
    let perturbed: Vec<VariableHandle> =
        (0..padded.len()).map(|_| p.add_matrix(m, m)).collect();
    let orig_m1 = inst.obs.m1;
    let tildes: Vec<Vec<TildeVector>> = padded
        .iter()
        .map(|e| {
            build_tilde_vectors(e)
                .into_iter()
                .filter(|tv| tv.from < orig_m1 && tv.to < orig_m1)
                .collect()
        })
        .collect();

    let mut total = LinExpr::zero();
    for (k, fam) in tildes.iter().enumerate() {
        for tv in fam {
            let mut expr = LinExpr::zero();
            for i in 0..m {
                for j in 0..m {
                    if tv.weights[i][j] != 0.0 {
                        expr.push(tv.weights[i][j], perturbed[k].entry(i, j));
                        total.push(tv.weights[i][j], perturbed[k].entry(i, j));
                    }
                }
            }
            p.add_le(expr, 0.0);
        }
    }
    p.add_eq(total, -inst.epsilon);
    for i in 0..m {
        for j in 0..m {
            p.add_ge(LinExpr::term(base.entry(i, j)), 0.0);
            p.add_le(LinExpr::term(base.entry(i, j)), 1.0);
        }
    }
    Ok(PProgram { program: p, base, perturbed, tildes, m })
}

/// Solves P(epsilon) under the sum-of-squares distance (the metric the
/// duality framework is stated for).
pub fn solve_p(
    inst: &StrictnessInstance,
    backend: &dyn SolverBackend,
) -> Result<PSolution, IdentifyError> {
    let PProgram { mut program, base, perturbed, tildes, m } = build_p_program(inst)?;
    let mut obj = Objective { sense: Sense::Minimize, affine: LinExpr::zero(), squares: Vec::new() };
    for gk in &perturbed {
        for idx in 0..m * m {
            obj.squares.push((1.0, LinExpr::diff(gk.at(idx), base.at(idx))));
        }
    }
    program.set_objective(obj);
    let sol = backend.solve(&program)?;
    if sol.status != SolveStatus::Optimal {
        return Err(IdentifyError::solver(sol.status, sol.diagnostic));
    }
    let game = sol.matrix(base, m, m);
    let perturbed_out: Vec<Matrix> = perturbed.iter().map(|h| sol.matrix(*h, m, m)).collect();
    let mut slacks = Vec::new();
    for (k, fam) in tildes.iter().enumerate() {
        for tv in fam {
            slacks.push((k, tv.from, tv.to, -tv.dot(&perturbed_out[k])));
        }
    }
    Ok(PSolution {
        value: sol.objective_value,
        game,
        perturbed: perturbed_out,
        slacks,
        dual_objective: sol.dual_objective_value,
    })
}

/// The degeneracy threshold: largest total strictness obtainable with zero
/// perturbation, as the single LP over one box-constrained matrix
/// maximizing the total negative deviation slack. Always finite (the
/// feasible polytope is bounded).
pub fn degeneracy_threshold(
    obs: &ObservationSet,
    backend: &dyn SolverBackend,
) -> Result<f64, IdentifyError> {
    require_no_payoff_info(obs)?;
    let padded: Vec<CorrelatedEquilibrium> =
        obs.observations.iter().map(|o| pad_square(&o.e)).collect();
    let m = padded[0].m1();
    let mut p = ConicProgram::new();
    let g = p.add_matrix(m, m);
    let mut total = LinExpr::zero();
    for e in &padded {
        for tv in build_tilde_vectors(e)
            .into_iter()
            .filter(|tv| tv.from < obs.m1 && tv.to < obs.m1)
        {
            let mut expr = LinExpr::zero();
            for i in 0..m {
                for j in 0..m {
                    if tv.weights[i][j] != 0.0 {
                        expr.push(tv.weights[i][j], g.entry(i, j));
                        total.push(tv.weights[i][j], g.entry(i, j));
                    }
                }
            }
            p.add_le(expr, 0.0);
        }
    }
    for idx in 0..m * m {
        p.add_ge(LinExpr::term(g.at(idx)), 0.0);
        p.add_le(LinExpr::term(g.at(idx)), 1.0);
    }
    p.set_objective(Objective::minimize(total));
    let sol = backend.solve(&p)?;
    if sol.status != SolveStatus::Optimal {
        return Err(IdentifyError::solver(sol.status, sol.diagnostic));
    }
    Ok(-sol.objective_value)
}

/// Sufficient condition for strong duality, per observation: the nonzero
/// rows of `e^k` are linearly independent (rank test, tolerance 1e-10).
pub fn check_slater(obs: &ObservationSet) -> Vec<bool> {
    obs.observations
        .iter()
        .map(|o| {
            let mut rows: Vec<Vec<f64>> = o
                .e
                .probs
                .iter()
                .filter(|r| r.iter().any(|&x| x != 0.0))
                .cloned()
                .collect();
            // modified Gram-Schmidt rank test
            let mut rank = 0;
            let total = rows.len();
            let mut basis: Vec<Vec<f64>> = Vec::new();
            for r in rows.iter_mut() {
                for b in &basis {
                    let dot: f64 = r.iter().zip(b).map(|(x, y)| x * y).sum();
                    for (x, y) in r.iter_mut().zip(b) {
                        *x -= dot * y;
                    }
                }
                let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm >= 1e-10 {
                    rank += 1;
                    basis.push(r.iter().map(|x| x / norm).collect());
                }
            }
            rank == total
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeReport {
    pub ok: bool,
    /// `(epsilon, P(epsilon))` over the requested grid.
    pub curve: Vec<(f64, f64)>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Checks the degeneracy-accuracy trade-off envelope on a grid above
/// `epsilon0 > epsilon*`: with `P0 = P(epsilon0)` and `m` the padded
/// dimension, `f(eps) = P0 eps^2 / eps0^2` must lower-bound and
/// `g(eps) = ((sqrt(P0) + sqrt(l) m / 2) eps / eps0 - sqrt(l) m / 2)^2`
/// upper-bound the curve (tolerance 1e-6 each way).
pub fn envelope_check(
    obs: &ObservationSet,
    epsilon0: f64,
    grid: &[f64],
    backend: &dyn SolverBackend,
) -> Result<EnvelopeReport, IdentifyError> {
    require_no_payoff_info(obs)?;
    let p0 = solve_p(&StrictnessInstance { obs: obs.clone(), epsilon: epsilon0 }, backend)?.value;
    // below solver noise the value is a numerical zero
    if p0 <= 1e-9 {
        return Err(IdentifyError::Precondition(format!(
            "P(epsilon0) = {p0} must be positive (epsilon0 above the threshold)"
        )));
    }
    let m = obs.m1.max(obs.m2) as f64;
    let l = obs.len() as f64;
    let half_lm = l.sqrt() * m / 2.0;
    let mut curve = Vec::with_capacity(grid.len());
    let mut lower = Vec::with_capacity(grid.len());
    let mut upper = Vec::with_capacity(grid.len());
    let mut ok = true;
    for &eps in grid {
        if eps < epsilon0 {
            return Err(IdentifyError::Parameter(format!(
                "grid point {eps} below epsilon0 = {epsilon0}"
            )));
        }
        let value =
            solve_p(&StrictnessInstance { obs: obs.clone(), epsilon: eps }, backend)?.value;
        let ratio = eps / epsilon0;
        let f = p0 * ratio * ratio;
        let g = ((p0.sqrt() + half_lm) * ratio - half_lm).powi(2);
        if value < f - 1e-6 || value > g + 1e-6 {
            ok = false;
        }
        curve.push((eps, value));
        lower.push(f);
        upper.push(g);
    }
    Ok(EnvelopeReport { ok, curve, lower, upper })
}
