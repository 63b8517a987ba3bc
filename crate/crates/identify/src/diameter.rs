//! Consistent-set diameter via per-entry, per-player pairwise maximization:
//! for each payoff entry solve `sup gamma` over two games in the consistent
//! set whose entry difference is at least `gamma`, then take the maximum
//! over all `2 m1 m2` programs. The decomposition realizes the entrywise
//! infinity norm between games exactly, so no separate norm parameter
//! exists.

use eqscope_conic::{ConicProgram, LinExpr, Objective, SolveStatus, SolverBackend};
use eqscope_core::{Game, Metric, ObservationSet, Player};
use serde::Serialize;

use crate::consistency::{assemble_pair_system, ConsistencyInstance, DeltaSpec};
use crate::error::IdentifyError;

/// Outcome of one per-entry program.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum EntryBound {
    /// The consistent set is empty at this budget.
    Infeasible,
    Finite(f64),
    /// Objective exceeded the configured cap; reported distinctly from a
    /// solver unboundedness certificate.
    CapExceeded(f64),
    Unbounded,
}

impl EntryBound {
    /// Total order used for reductions: empty < finite < capped < unbounded.
    pub fn rank(&self) -> (u8, f64) {
        match *self {
            EntryBound::Infeasible => (0, f64::NEG_INFINITY),
            EntryBound::Finite(v) => (1, v),
            EntryBound::CapExceeded(v) => (2, v),
            EntryBound::Unbounded => (3, f64::INFINITY),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, EntryBound::Finite(_))
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            EntryBound::Infeasible => f64::NEG_INFINITY,
            EntryBound::Finite(v) | EntryBound::CapExceeded(v) => v,
            EntryBound::Unbounded => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DiameterOptions {
    /// Objectives above this value are reported as `CapExceeded`.
    pub cap: f64,
    /// Worker-pool width; `None` uses all available cores.
    pub jobs: Option<usize>,
}

impl Default for DiameterOptions {
    fn default() -> Self {
        DiameterOptions { cap: 1e6, jobs: None }
    }
}

#[derive(Debug, Clone)]
pub struct DiameterReport {
    pub value: EntryBound,
    /// Player and entry attaining the maximum.
    pub argmax: (Player, usize, usize),
    /// Witness pair for the attaining entry, when that program was finite.
    pub witnesses: Option<(Game, Game)>,
    /// `per_entry[player][i][j]` = value of the pairwise program for that
    /// payoff entry.
    pub per_entry: Vec<Vec<Vec<EntryBound>>>,
    /// Per-entry solver diagnostics (entry label, message).
    pub diagnostics: Vec<(String, String)>,
}

struct EntryOutcome {
    bound: EntryBound,
    witnesses: Option<(Game, Game)>,
    diagnostic: Option<String>,
}

fn solve_entry(
    inst: &ConsistencyInstance,
    player: usize,
    i: usize,
    j: usize,
    cap: f64,
    backend: &dyn SolverBackend,
) -> Result<EntryOutcome, IdentifyError> {
    let (m1, m2) = (inst.obs.m1, inst.obs.m2);
    let mut p = ConicProgram::new();
    let (tilde, hat) = assemble_pair_system(&mut p, inst)?;
    let gamma = p.add_scalar();
    let mut gap = tilde.side(player).expr(i, j);
    gap.add(&hat.side(player).expr(i, j), -1.0);
    gap.push(-1.0, gamma.scalar());
    p.add_ge(gap, 0.0);
    p.set_objective(Objective::maximize(LinExpr::term(gamma.scalar())));

    let sol = backend.solve(&p)?;
    Ok(match sol.status {
        SolveStatus::Optimal => {
            if sol.objective_value > cap {
                EntryOutcome {
                    bound: EntryBound::CapExceeded(sol.objective_value),
                    witnesses: None,
                    diagnostic: None,
                }
            } else {
                EntryOutcome {
                    bound: EntryBound::Finite(sol.objective_value),
                    witnesses: Some((tilde.to_game(&sol, m1, m2), hat.to_game(&sol, m1, m2))),
                    diagnostic: None,
                }
            }
        }
        SolveStatus::Unbounded => EntryOutcome {
            bound: EntryBound::Unbounded,
            witnesses: None,
            diagnostic: None,
        },
        SolveStatus::Infeasible => EntryOutcome {
            bound: EntryBound::Infeasible,
            witnesses: None,
            diagnostic: None,
        },
        status => EntryOutcome {
            bound: EntryBound::Infeasible,
            witnesses: None,
            diagnostic: Some(format!("{status:?}: {}", sol.diagnostic.unwrap_or_default())),
        },
    })
}

/// Runs the per-entry programs (fanned out over a worker pool) and reduces
/// them in a fixed order: players, then row-major entries.
pub fn diameter(
    obs: &ObservationSet,
    delta: f64,
    metric: Metric,
    backend: &dyn SolverBackend,
    options: &DiameterOptions,
) -> Result<DiameterReport, IdentifyError> {
    if delta < 0.0 {
        return Err(IdentifyError::Parameter(format!("delta = {delta} < 0")));
    }
    let inst = ConsistencyInstance::new(obs.clone(), metric, DeltaSpec::Fixed(delta));
    let (m1, m2) = (obs.m1, obs.m2);
    let entries: Vec<(usize, usize, usize)> = (0..2)
        .flat_map(|p| (0..m1).flat_map(move |i| (0..m2).map(move |j| (p, i, j))))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs.unwrap_or(0))
        .build()
        .map_err(|e| IdentifyError::Precondition(format!("worker pool: {e}")))?;
    let outcomes: Vec<Result<EntryOutcome, IdentifyError>> = pool.install(|| {
        use rayon::prelude::*;
        entries
            .par_iter()
            .map(|&(p, i, j)| solve_entry(&inst, p, i, j, options.cap, backend))
            .collect()
    });

    let mut per_entry = vec![vec![vec![EntryBound::Infeasible; m2]; m1]; 2];
    let mut diagnostics = Vec::new();
    let mut best: Option<(EntryBound, (Player, usize, usize), Option<(Game, Game)>)> = None;
    for (&(p, i, j), outcome) in entries.iter().zip(outcomes) {
        let outcome = outcome?;
        per_entry[p][i][j] = outcome.bound;
        if let Some(d) = outcome.diagnostic {
            diagnostics.push((format!("player {} entry ({i},{j})", p + 1), d));
        }
        let player = if p == 0 { Player::One } else { Player::Two };
        let better = match &best {
            None => true,
            Some((current, _, _)) => {
                let (ra, va) = outcome.bound.rank();
                let (rb, vb) = current.rank();
                ra > rb || (ra == rb && va > vb)
            }
        };
        if better {
            best = Some((outcome.bound, (player, i, j), outcome.witnesses));
        }
    }
    let (value, argmax, witnesses) = best.expect("at least one entry");
    Ok(DiameterReport { value, argmax, witnesses, per_entry, diagnostics })
}

/// True iff `values` is nondecreasing within `tol`, ordering the markers as
/// empty set < finite values < cap exceeded / unbounded.
pub fn is_nondecreasing(values: &[EntryBound], tol: f64) -> bool {
    values.windows(2).all(|w| {
        let (a, b) = (w[0], w[1]);
        match (a, b) {
            (EntryBound::Infeasible, _) => true,
            (_, EntryBound::Infeasible) => false,
            (EntryBound::Finite(x), EntryBound::Finite(y)) => y >= x - tol,
            (_, EntryBound::Unbounded) | (_, EntryBound::CapExceeded(_)) => true,
            (EntryBound::Unbounded, EntryBound::Finite(_)) => false,
            (EntryBound::CapExceeded(_), EntryBound::Finite(_)) => false,
        }
    })
}

/// Regression guard from the nesting of consistent sets: diameters reported
/// over an ascending budget list must be nondecreasing (tolerance 1e-5).
pub fn diameter_monotonicity_check(
    obs: &ObservationSet,
    deltas: &[f64],
    metric: Metric,
    backend: &dyn SolverBackend,
    options: &DiameterOptions,
) -> Result<bool, IdentifyError> {
    if deltas.windows(2).any(|w| w[1] < w[0]) {
        return Err(IdentifyError::Precondition("deltas must be sorted ascending".into()));
    }
    let mut values = Vec::with_capacity(deltas.len());
    for &d in deltas {
        values.push(diameter(obs, d, metric, backend, options)?.value);
    }
    Ok(is_nondecreasing(&values, 1e-5))
}
