//! Constraint systems over the sharp consistent set: deviation inequalities
//! for each observed equilibrium applied to a variable game, the metric
//! ball tying perturbed games to the base game, side-information equalities,
//! and linear-property restrictions. On top of those, the membership,
//! perturbation-minimizing recovery, and property-threshold queries.

use eqscope_conic::{
    ConicProgram, LinExpr, Objective, Sense, SolveStatus, Solution, SolverBackend, VariableHandle,
};
use eqscope_core::game::Matrix;
use eqscope_core::{Game, Metric, ObservationModel, ObservationSet};
#[cfg(test)]
use eqscope_core::Observation;

use crate::error::IdentifyError;

/// A payoff matrix appearing in a constraint system: either a matrix of
/// program variables or a fixed numeric matrix.
#[derive(Clone)]
pub enum MatExpr {
    Var(VariableHandle),
    Const(Matrix),
}

impl MatExpr {
    pub fn expr(&self, i: usize, j: usize) -> LinExpr {
        match self {
            MatExpr::Var(h) => LinExpr::term(h.entry(i, j)),
            MatExpr::Const(m) => LinExpr::constant(m[i][j]),
        }
    }

    /// Pushes `scale * entry(i, j)` onto an expression under construction.
    fn accumulate(&self, out: &mut LinExpr, scale: f64, i: usize, j: usize) {
        if scale == 0.0 {
            return;
        }
        match self {
            MatExpr::Var(h) => {
                out.push(scale, h.entry(i, j));
            }
            MatExpr::Const(m) => {
                out.add_const(scale * m[i][j]);
            }
        }
    }
}

/// Both players' payoff matrices of one game in a constraint system.
#[derive(Clone)]
pub struct GameExpr {
    pub p1: MatExpr,
    pub p2: MatExpr,
}

impl GameExpr {
    pub fn variables(p: &mut ConicProgram, m1: usize, m2: usize) -> Self {
        GameExpr {
            p1: MatExpr::Var(p.add_matrix(m1, m2)),
            p2: MatExpr::Var(p.add_matrix(m1, m2)),
        }
    }

    pub fn fixed(g: &Game) -> Self {
        GameExpr {
            p1: MatExpr::Const(g.payoff1.clone()),
            p2: MatExpr::Const(g.payoff2.clone()),
        }
    }

    pub fn side(&self, player: usize) -> &MatExpr {
        if player == 0 {
            &self.p1
        } else {
            &self.p2
        }
    }

    /// Reads the game out of a solved program.
    pub fn to_game(&self, sol: &Solution, m1: usize, m2: usize) -> Game {
        let take = |m: &MatExpr| match m {
            MatExpr::Var(h) => sol.matrix(*h, m1, m2),
            MatExpr::Const(c) => c.clone(),
        };
        Game {
            m1,
            m2,
            payoff1: take(&self.p1),
            payoff2: take(&self.p2),
        }
    }
}

/// Callback hook for generalized uncertainty sets: may append extra linear
/// or second-order-cone constraints on the perturbations `G^k - G`. The
/// default (no hook) keeps the metric ball only.
pub type UncertaintyHook = dyn Fn(&mut ConicProgram, &GameExpr, &[GameExpr]) + Sync;

/// Appends the deviation inequalities of the observed equilibrium `e`
/// applied to the variable game `gk`: `m1 (m1 - 1)` row-deviation rows then
/// `m2 (m2 - 1)` column-deviation rows, pairs in lexicographic order.
/// Vacuous rows (all-zero coefficients) are kept unless `keep_vacuous` is
/// false, so constraint dumps stay reproducible.
pub fn build_equilibrium_constraints(
    p: &mut ConicProgram,
    gk: &GameExpr,
    e: &eqscope_core::CorrelatedEquilibrium,
    keep_vacuous: bool,
) {
    let (m1, m2) = (e.m1(), e.m2());
    for i in 0..m1 {
        for i2 in 0..m1 {
            if i == i2 {
                continue;
            }
            let mut expr = LinExpr::zero();
            for j in 0..m2 {
                gk.p1.accumulate(&mut expr, e.probs[i][j], i, j);
                gk.p1.accumulate(&mut expr, -e.probs[i][j], i2, j);
            }
            if keep_vacuous || !expr.terms.is_empty() {
                p.add_ge(expr, 0.0);
            }
        }
    }
    for j in 0..m2 {
        for j2 in 0..m2 {
            if j == j2 {
                continue;
            }
            let mut expr = LinExpr::zero();
            for i in 0..m1 {
                gk.p2.accumulate(&mut expr, e.probs[i][j], i, j);
                gk.p2.accumulate(&mut expr, -e.probs[i][j], i, j2);
            }
            if keep_vacuous || !expr.terms.is_empty() {
                p.add_ge(expr, 0.0);
            }
        }
    }
}

/// Appends the metric constraint `d(G^1 - beta^1, ..., G^l - beta^l | G) <= delta`.
/// For the sum-of-squares metric this is a single second-order cone row;
/// for the maximum metric it is the `2 * 2 * l * m1 * m2` box inequalities.
pub fn build_metric_constraint(
    p: &mut ConicProgram,
    base: &GameExpr,
    perturbed: &[GameExpr],
    metric: Metric,
    delta: &LinExpr,
    shifters: Option<&[(Matrix, Matrix)]>,
    m1: usize,
    m2: usize,
) {
    let diff = |k: usize, player: usize, i: usize, j: usize| -> LinExpr {
        let mut expr = LinExpr::zero();
        perturbed[k].side(player).accumulate(&mut expr, 1.0, i, j);
        base.side(player).accumulate(&mut expr, -1.0, i, j);
        if let Some(blocks) = shifters {
            let beta = if player == 0 { &blocks[k].0 } else { &blocks[k].1 };
            expr.add_const(-beta[i][j]);
        }
        expr
    };
    match metric {
        // a zero budget collapses the ball to equalities; emitting them
        // directly avoids a degenerate cone the solver can only satisfy to
        // sqrt(feasibility-tolerance) accuracy
        Metric::SumOfSquares if delta.is_constant() && delta.constant == 0.0 => {
            for k in 0..perturbed.len() {
                for player in 0..2 {
                    for i in 0..m1 {
                        for j in 0..m2 {
                            p.add_eq(diff(k, player, i, j), 0.0);
                        }
                    }
                }
            }
        }
        Metric::SumOfSquares => {
            // sum of squares <= delta written as one standard cone:
            // || (diffs, (1 - delta)/2) || <= (1 + delta)/2
            let mut vector = Vec::with_capacity(2 * perturbed.len() * m1 * m2 + 1);
            for k in 0..perturbed.len() {
                for player in 0..2 {
                    for i in 0..m1 {
                        for j in 0..m2 {
                            vector.push(diff(k, player, i, j));
                        }
                    }
                }
            }
            let mut low = delta.clone().scale(-0.5);
            low.add_const(0.5);
            vector.push(low);
            let mut bound = delta.clone().scale(0.5);
            bound.add_const(0.5);
            p.add_soc(bound, vector);
        }
        Metric::Maximum => {
            for k in 0..perturbed.len() {
                for player in 0..2 {
                    for i in 0..m1 {
                        for j in 0..m2 {
                            let d = diff(k, player, i, j);
                            let mut upper = d.clone();
                            upper.add(&delta.clone().scale(-1.0), 1.0);
                            p.add_le(upper, 0.0);
                            let mut lower = d;
                            lower.add(delta, 1.0);
                            p.add_ge(lower, 0.0);
                        }
                    }
                }
            }
        }
    }
}

/// Appends the partial-payoff-information equalities `<e^k, G_p^k> = v_p^k`
/// for both players and every observation: `2 l` rows.
pub fn build_payoff_info_constraints(
    p: &mut ConicProgram,
    perturbed: &[GameExpr],
    obs: &ObservationSet,
) -> Result<(), IdentifyError> {
    if obs.model != ObservationModel::PartialPayoffInfo {
        return Err(IdentifyError::Precondition(
            "payoff-info constraints need the partial-payoff model".into(),
        ));
    }
    for (k, o) in obs.observations.iter().enumerate() {
        let (v1, v2) = o.v.ok_or_else(|| {
            IdentifyError::Precondition(format!("observation {k} lacks payoff info"))
        })?;
        for (player, v) in [(0usize, v1), (1usize, v2)] {
            let mut expr = LinExpr::zero();
            for i in 0..obs.m1 {
                for j in 0..obs.m2 {
                    perturbed[k]
                        .side(player)
                        .accumulate(&mut expr, o.e.probs[i][j], i, j);
                }
            }
            p.add_eq(expr, v);
        }
    }
    Ok(())
}

/// Affine map from a parameter vector to an `m1 x m2` payoff matrix:
/// `theta -> offset + sum_t coeffs[i][j][t] * theta[t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    pub coeffs: Vec<Vec<Vec<f64>>>,
    pub offset: Matrix,
}

impl AffineMap {
    pub fn dim(&self) -> usize {
        self.coeffs
            .first()
            .and_then(|r| r.first())
            .map_or(0, |c| c.len())
    }

    /// Constant map (no parameter dependence).
    pub fn constant(offset: Matrix, t: usize) -> Self {
        let m1 = offset.len();
        let m2 = offset.first().map_or(0, |r| r.len());
        AffineMap {
            coeffs: vec![vec![vec![0.0; t]; m2]; m1],
            offset,
        }
    }
}

/// Structural restrictions on the base game, each expressible by a
/// tractable number of linear rows.
#[derive(Debug, Clone, PartialEq)]
pub enum PropertySpec {
    ZeroSum,
    /// `|| G1 + G2 ||_1 <= epsilon`.
    EpsZeroSum { epsilon: f64 },
    ExactPotential,
    LinearParam { f1: AffineMap, f2: AffineMap },
}

/// Auxiliary variables introduced by [`attach_property`].
#[derive(Debug, Clone, Default)]
pub struct PropertyVars {
    pub potential: Option<VariableHandle>,
    pub theta: Option<VariableHandle>,
}

/// Appends the linear rows encoding `spec` on the base game `g`.
pub fn attach_property(
    p: &mut ConicProgram,
    spec: &PropertySpec,
    g: &GameExpr,
    m1: usize,
    m2: usize,
) -> PropertyVars {
    let mut vars = PropertyVars::default();
    match spec {
        PropertySpec::ZeroSum => {
            for i in 0..m1 {
                for j in 0..m2 {
                    let mut expr = LinExpr::zero();
                    g.p1.accumulate(&mut expr, 1.0, i, j);
                    g.p2.accumulate(&mut expr, 1.0, i, j);
                    p.add_eq(expr, 0.0);
                }
            }
        }
        PropertySpec::EpsZeroSum { epsilon } => {
            let slack = p.add_matrix(m1, m2);
            let mut total = LinExpr::zero();
            for i in 0..m1 {
                for j in 0..m2 {
                    let mut sum = LinExpr::zero();
                    g.p1.accumulate(&mut sum, 1.0, i, j);
                    g.p2.accumulate(&mut sum, 1.0, i, j);
                    let mut upper = sum.clone();
                    upper.push(-1.0, slack.entry(i, j));
                    p.add_le(upper, 0.0);
                    let mut lower = sum;
                    lower.push(1.0, slack.entry(i, j));
                    p.add_ge(lower, 0.0);
                    total.push(1.0, slack.entry(i, j));
                }
            }
            p.add_le(total, *epsilon);
        }
        PropertySpec::ExactPotential => {
            let phi = p.add_matrix(m1, m2);
            vars.potential = Some(phi);
            for i in 0..m1 {
                for i2 in 0..m1 {
                    if i == i2 {
                        continue;
                    }
                    for j in 0..m2 {
                        let mut expr = LinExpr::diff(phi.entry(i, j), phi.entry(i2, j));
                        g.p1.accumulate(&mut expr, -1.0, i, j);
                        g.p1.accumulate(&mut expr, 1.0, i2, j);
                        p.add_eq(expr, 0.0);
                    }
                }
            }
            for j in 0..m2 {
                for j2 in 0..m2 {
                    if j == j2 {
                        continue;
                    }
                    for i in 0..m1 {
                        let mut expr = LinExpr::diff(phi.entry(i, j), phi.entry(i, j2));
                        g.p2.accumulate(&mut expr, -1.0, i, j);
                        g.p2.accumulate(&mut expr, 1.0, i, j2);
                        p.add_eq(expr, 0.0);
                    }
                }
            }
        }
        PropertySpec::LinearParam { f1, f2 } => {
            let t = f1.dim().max(f2.dim());
            let theta = p.add_matrix(1, t.max(1));
            vars.theta = Some(theta);
            for (player, map) in [(0usize, f1), (1usize, f2)] {
                for i in 0..m1 {
                    for j in 0..m2 {
                        let mut expr = LinExpr::zero();
                        g.side(player).accumulate(&mut expr, 1.0, i, j);
                        for (k, c) in map.coeffs[i][j].iter().enumerate() {
                            if *c != 0.0 {
                                expr.push(-c, theta.entry(0, k));
                            }
                        }
                        p.add_eq(expr, map.offset[i][j]);
                    }
                }
            }
        }
    }
    vars
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaSpec {
    Fixed(f64),
    Free,
}

/// One consistent-set query: observations, metric, perturbation budget
/// (fixed or left as the objective), and an optional property restriction.
#[derive(Clone)]
pub struct ConsistencyInstance {
    pub obs: ObservationSet,
    pub metric: Metric,
    pub delta: DeltaSpec,
    pub property: Option<PropertySpec>,
    /// Emit vacuous (all-zero) deviation rows; kept on for reproducible
    /// constraint dumps.
    pub keep_vacuous: bool,
}

impl ConsistencyInstance {
    pub fn new(obs: ObservationSet, metric: Metric, delta: DeltaSpec) -> Self {
        ConsistencyInstance { obs, metric, delta, property: None, keep_vacuous: true }
    }

    pub fn with_property(mut self, spec: PropertySpec) -> Self {
        self.property = Some(spec);
        self
    }

    fn shifters(&self) -> Option<Vec<(Matrix, Matrix)>> {
        if self.obs.model != ObservationModel::PayoffShifterInfo {
            return None;
        }
        Some(
            self.obs
                .observations
                .iter()
                .map(|o| o.beta.clone().expect("validated shifter model"))
                .collect(),
        )
    }
}

/// Assembles the shared part of every query: perturbed-game variables with
/// their equilibrium constraints, model side information, the metric tie to
/// `base`, and property rows. Returns the perturbed-game handles.
fn assemble(
    p: &mut ConicProgram,
    base: &GameExpr,
    inst: &ConsistencyInstance,
    delta: &LinExpr,
    hook: Option<&UncertaintyHook>,
) -> Result<Vec<GameExpr>, IdentifyError> {
    let (m1, m2) = (inst.obs.m1, inst.obs.m2);
    let perturbed: Vec<GameExpr> = (0..inst.obs.len())
        .map(|_| GameExpr::variables(p, m1, m2))
        .collect();
    for (gk, o) in perturbed.iter().zip(&inst.obs.observations) {
        build_equilibrium_constraints(p, gk, &o.e, inst.keep_vacuous);
    }
    if inst.obs.model == ObservationModel::PartialPayoffInfo {
        build_payoff_info_constraints(p, &perturbed, &inst.obs)?;
    }
    let shifters = inst.shifters();
    build_metric_constraint(
        p,
        base,
        &perturbed,
        inst.metric,
        delta,
        shifters.as_deref(),
        m1,
        m2,
    );
    if let Some(spec) = &inst.property {
        attach_property(p, spec, base, m1, m2);
    }
    if let Some(hook) = hook {
        hook(p, base, &perturbed);
    }
    Ok(perturbed)
}

/// Builds two independent copies of the consistency system sharing one
/// program, both with free base games at the instance's fixed budget.
/// Used by the per-entry diameter programs.
pub fn assemble_pair_system(
    p: &mut ConicProgram,
    inst: &ConsistencyInstance,
) -> Result<(GameExpr, GameExpr), IdentifyError> {
    let DeltaSpec::Fixed(delta) = inst.delta else {
        return Err(IdentifyError::Precondition(
            "pair system needs a fixed delta".into(),
        ));
    };
    let (m1, m2) = (inst.obs.m1, inst.obs.m2);
    let tilde = GameExpr::variables(p, m1, m2);
    assemble(p, &tilde, inst, &LinExpr::constant(delta), None)?;
    let hat = GameExpr::variables(p, m1, m2);
    assemble(p, &hat, inst, &LinExpr::constant(delta), None)?;
    Ok((tilde, hat))
}

fn check_shape(g: &Game, obs: &ObservationSet) -> Result<(), IdentifyError> {
    if g.m1 != obs.m1 || g.m2 != obs.m2 {
        return Err(IdentifyError::Precondition(format!(
            "game is {}x{}, observations are {}x{}",
            g.m1, g.m2, obs.m1, obs.m2
        )));
    }
    Ok(())
}

/// Feasibility of `g` in the consistent set at the instance's fixed budget.
pub fn membership(
    g: &Game,
    inst: &ConsistencyInstance,
    backend: &dyn SolverBackend,
) -> Result<bool, IdentifyError> {
    membership_with(g, inst, None, backend)
}

pub fn membership_with(
    g: &Game,
    inst: &ConsistencyInstance,
    hook: Option<&UncertaintyHook>,
    backend: &dyn SolverBackend,
) -> Result<bool, IdentifyError> {
    check_shape(g, &inst.obs)?;
    let DeltaSpec::Fixed(delta) = inst.delta else {
        return Err(IdentifyError::Precondition(
            "membership needs a fixed delta".into(),
        ));
    };
    if delta < 0.0 {
        return Err(IdentifyError::Parameter(format!("delta = {delta} < 0")));
    }
    let mut p = ConicProgram::new();
    let base = GameExpr::fixed(g);
    assemble(&mut p, &base, inst, &LinExpr::constant(delta), hook)?;
    let sol = backend.solve(&p)?;
    match sol.status {
        SolveStatus::Optimal => Ok(true),
        SolveStatus::Infeasible => Ok(false),
        // a feasibility program cannot be unbounded; anything else is trouble
        status => Err(IdentifyError::solver(status, sol.diagnostic)),
    }
}

/// Result of the perturbation-minimizing recovery program.
#[derive(Debug, Clone)]
pub struct Recovery {
    pub delta_star: f64,
    pub game: Game,
    pub perturbed: Vec<Game>,
    pub status: SolveStatus,
}

/// Recovers the game minimizing the perturbation budget `delta` subject to
/// all consistency constraints; with the sum-of-squares metric the reported
/// optimum is the epigraph value `t` bounding `d2 <= t`.
pub fn min_perturbation(
    inst: &ConsistencyInstance,
    backend: &dyn SolverBackend,
) -> Result<Recovery, IdentifyError> {
    min_perturbation_with(inst, None, backend)
}

pub fn min_perturbation_with(
    inst: &ConsistencyInstance,
    hook: Option<&UncertaintyHook>,
    backend: &dyn SolverBackend,
) -> Result<Recovery, IdentifyError> {
    let (m1, m2) = (inst.obs.m1, inst.obs.m2);
    let mut p = ConicProgram::new();
    let base = GameExpr::variables(&mut p, m1, m2);
    let delta = p.add_scalar();
    p.add_ge(LinExpr::term(delta.scalar()), 0.0);
    let perturbed = assemble(&mut p, &base, inst, &LinExpr::term(delta.scalar()), hook)?;
    p.set_objective(Objective {
        sense: Sense::Minimize,
        affine: LinExpr::term(delta.scalar()),
        squares: Vec::new(),
    });
    let sol = backend.solve(&p)?;
    match sol.status {
        SolveStatus::Optimal => Ok(Recovery {
            delta_star: sol.scalar(delta),
            game: base.to_game(&sol, m1, m2),
            perturbed: perturbed.iter().map(|gk| gk.to_game(&sol, m1, m2)).collect(),
            status: sol.status,
        }),
        SolveStatus::Infeasible => Err(IdentifyError::solver(sol.status, sol.diagnostic)),
        status => Err(IdentifyError::solver(status, sol.diagnostic)),
    }
}

/// Smallest budget at which `g` itself is consistent: the recovery program
/// with the base game pinned to `g` and only the perturbed games free.
pub fn min_budget_for(
    g: &Game,
    inst: &ConsistencyInstance,
    backend: &dyn SolverBackend,
) -> Result<f64, IdentifyError> {
    check_shape(g, &inst.obs)?;
    let mut p = ConicProgram::new();
    let base = GameExpr::fixed(g);
    let delta = p.add_scalar();
    p.add_ge(LinExpr::term(delta.scalar()), 0.0);
    assemble(&mut p, &base, inst, &LinExpr::term(delta.scalar()), None)?;
    p.set_objective(Objective {
        sense: Sense::Minimize,
        affine: LinExpr::term(delta.scalar()),
        squares: Vec::new(),
    });
    let sol = backend.solve(&p)?;
    match sol.status {
        SolveStatus::Optimal => Ok(sol.scalar(delta)),
        status => Err(IdentifyError::solver(status, sol.diagnostic)),
    }
}

/// Least `epsilon` (to absolute tolerance 1e-4, by bisection) such that the
/// property family at `epsilon` admits a consistent game within the given
/// perturbation budget. Requires feasibility monotone in `epsilon`, which
/// holds for the eps-zero-sum family.
pub fn property_threshold(
    inst: &ConsistencyInstance,
    family: &dyn Fn(f64) -> PropertySpec,
    delta_budget: f64,
    backend: &dyn SolverBackend,
) -> Result<f64, IdentifyError> {
    const TOL: f64 = 1e-4;
    const EPS_CAP: f64 = 1e9;

    let fits = |eps: f64| -> Result<bool, IdentifyError> {
        let mut trial = inst.clone();
        trial.delta = DeltaSpec::Free;
        trial.property = Some(family(eps));
        let rec = min_perturbation(&trial, backend)?;
        Ok(rec.delta_star <= delta_budget)
    };

    if fits(0.0)? {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while !fits(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > EPS_CAP {
            return Err(IdentifyError::Bracket(format!(
                "no feasible epsilon up to {EPS_CAP:e} at budget {delta_budget}"
            )));
        }
    }
    while hi - lo > TOL {
        let mid = 0.5 * (lo + hi);
        if fits(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
