//! Per-coefficient diameter of the consistent set of cost models: the same
//! pairwise maximization as the payoff-matrix case, transplanted to
//! coefficient space. One program per `(player, power)` pair.

use eqscope_conic::{ConicProgram, LinExpr, Objective, SolveStatus, SolverBackend};
use eqscope_core::Metric;
use eqscope_identify::diameter::{DiameterOptions, EntryBound};

use crate::error::CournotError;
use crate::model::{CournotObservation, PriceModel};
use crate::recover::assemble_coeff_system;

#[derive(Debug, Clone)]
pub struct CournotDiameterReport {
    pub value: EntryBound,
    /// `(player, power - 1)` attaining the maximum.
    pub argmax: (usize, usize),
    /// `per_coeff[i][x - 1]` = pairwise program value for `a_i(x)`.
    pub per_coeff: Vec<Vec<EntryBound>>,
    pub diagnostics: Vec<(String, String)>,
}

fn solve_coeff(
    obs: &[CournotObservation],
    delta: f64,
    metric: Metric,
    degree: usize,
    n: usize,
    price: &dyn PriceModel,
    player: usize,
    power_idx: usize,
    cap: f64,
    backend: &dyn SolverBackend,
) -> Result<(EntryBound, Option<String>), CournotError> {
    let mut p = ConicProgram::new();
    let tilde =
        assemble_coeff_system(&mut p, n, degree, obs, price, metric, &LinExpr::constant(delta))?;
    let hat =
        assemble_coeff_system(&mut p, n, degree, obs, price, metric, &LinExpr::constant(delta))?;
    let gamma = p.add_scalar();
    let mut gap = LinExpr::diff(
        tilde.base.entry(player, power_idx),
        hat.base.entry(player, power_idx),
    );
    gap.push(-1.0, gamma.scalar());
    p.add_ge(gap, 0.0);
    p.set_objective(Objective::maximize(LinExpr::term(gamma.scalar())));
    let sol = backend.solve(&p)?;
    Ok(match sol.status {
        SolveStatus::Optimal if sol.objective_value > cap => {
            (EntryBound::CapExceeded(sol.objective_value), None)
        }
        SolveStatus::Optimal => (EntryBound::Finite(sol.objective_value), None),
        SolveStatus::Unbounded => (EntryBound::Unbounded, None),
        SolveStatus::Infeasible => (EntryBound::Infeasible, None),
        status => (
            EntryBound::Infeasible,
            Some(format!("{status:?}: {}", sol.diagnostic.unwrap_or_default())),
        ),
    })
}

pub fn cournot_diameter(
    obs: &[CournotObservation],
    delta: f64,
    degree: usize,
    metric: Metric,
    n: usize,
    price: &dyn PriceModel,
    backend: &dyn SolverBackend,
    options: &DiameterOptions,
) -> Result<CournotDiameterReport, CournotError> {
    if delta < 0.0 {
        return Err(CournotError::Parameter(format!("delta = {delta} < 0")));
    }
    let coords: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (0..degree).map(move |x| (i, x))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CournotError::Parameter(format!("worker pool: {e}")))?;
    let results: Vec<Result<(EntryBound, Option<String>), CournotError>> = pool.install(|| {
        use rayon::prelude::*;
        coords
            .par_iter()
            .map(|&(i, x)| {
                solve_coeff(obs, delta, metric, degree, n, price, i, x, options.cap, backend)
            })
            .collect()
    });

    let mut per_coeff = vec![vec![EntryBound::Infeasible; degree]; n];
    let mut diagnostics = Vec::new();
    let mut best: Option<(EntryBound, (usize, usize))> = None;
    for (&(i, x), result) in coords.iter().zip(results) {
        let (bound, diag) = result?;
        per_coeff[i][x] = bound;
        if let Some(d) = diag {
            diagnostics.push((format!("player {i} power {}", x + 1), d));
        }
        let better = match &best {
            None => true,
            Some((current, _)) => {
                let (ra, va) = bound.rank();
                let (rb, vb) = current.rank();
                ra > rb || (ra == rb && va > vb)
            }
        };
        if better {
            best = Some((bound, (i, x)));
        }
    }
    let (value, argmax) = best.expect("at least one coefficient");
    Ok(CournotDiameterReport { value, argmax, per_coeff, diagnostics })
}
