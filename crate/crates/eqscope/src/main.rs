//! Command-line front end. Exit code 0 on success, 2 when a query reports
//! infeasibility, 3 on solver trouble, 1 on usage or input errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eqscope_conic::{ClarabelBackend, SolveStatus};
use eqscope_core::{Game, Metric, ObservationModel, ObservationSet};
use eqscope_cournot::{
    cournot_diameter, cournot_min_perturbation, simulate_cournot, AffinePrice,
    CournotObservation, SimulationParams,
};
use eqscope_identify::{
    degeneracy, diameter, membership, min_perturbation, property_threshold,
    select_independent_subset, verify_recovery_bound, ConsistencyInstance, DeltaSpec,
    DiameterOptions, IdentifyError, InducedNorm, PropertySpec, StrictnessInstance,
};
use serde::{Deserialize, Serialize};

use eqscope::chi::chi_square_delta;
use eqscope::entry::{generate_entry_observations, DofMode, EntryGameParams};
use eqscope::report::*;
use eqscope::scan::{emit_outputs, scan_region, ScanGrid};

#[derive(Parser)]
#[command(name = "eqscope", about = "Characterize games consistent with observed equilibria")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for fan-out queries (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    D2,
    Dinf,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Metric {
        match m {
            MetricArg::D2 => Metric::SumOfSquares,
            MetricArg::Dinf => Metric::Maximum,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    PartialPayoff,
    Shifter,
    None,
}

impl From<ModelArg> for ObservationModel {
    fn from(m: ModelArg) -> ObservationModel {
        match m {
            ModelArg::PartialPayoff => ObservationModel::PartialPayoffInfo,
            ModelArg::Shifter => ObservationModel::PayoffShifterInfo,
            ModelArg::None => ObservationModel::NoPayoffInfo,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DofModeArg {
    Sym,
    Asym,
}

#[derive(Clone, Copy, ValueEnum)]
enum PropertyArg {
    ZeroSum,
    Potential,
}

#[derive(Args)]
struct IoArgs {
    #[arg(long)]
    input: PathBuf,
    /// Output path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate perturbed entry-game observations.
    SimulateEntry {
        #[arg(long, default_value_t = 5.0)]
        gamma1: f64,
        #[arg(long, default_value_t = 5.0)]
        gamma2: f64,
        #[arg(long, default_value_t = -10.0)]
        theta1: f64,
        #[arg(long, default_value_t = -10.0)]
        theta2: f64,
        #[arg(long, default_value_t = 0.5)]
        sigma: f64,
        #[arg(long, default_value_t = 0.0)]
        sigma_s: f64,
        #[arg(long, default_value_t = 50)]
        l: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ModelArg::PartialPayoff)]
        model: ModelArg,
        #[arg(long, value_enum, default_value_t = DofModeArg::Asym)]
        dof_mode: DofModeArg,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write the generating game and perturbations.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Perturbation-minimizing recovery, optionally under a property.
    Recover {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long, value_enum, default_value_t = MetricArg::D2)]
        metric: MetricArg,
        #[arg(long, value_enum)]
        property: Option<PropertyArg>,
        /// Eps-zero-sum restriction with the given epsilon.
        #[arg(long, conflicts_with = "property")]
        eps_zero_sum: Option<f64>,
        /// Also check the recovery bounds against this game (JSON path)
        /// at the given budget.
        #[arg(long, requires = "delta")]
        true_game: Option<PathBuf>,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Membership of a game in the consistent set at a fixed budget.
    Membership {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = MetricArg::D2)]
        metric: MetricArg,
    },
    /// Consistent-set diameter at a fixed budget.
    Diameter {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = MetricArg::D2)]
        metric: MetricArg,
        #[arg(long, default_value_t = 1e6)]
        cap: f64,
    },
    /// Least eps-zero-sum threshold within a budget.
    Property {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long)]
        budget: f64,
        #[arg(long, value_enum, default_value_t = MetricArg::D2)]
        metric: MetricArg,
    },
    /// No-payoff-information analysis: threshold, P-curve, envelope.
    Degeneracy {
        #[command(flatten)]
        io: IoArgs,
        /// Strictness grid; P is solved at each value.
        #[arg(long, value_delimiter = ',')]
        grid: Vec<f64>,
        /// Envelope anchor; enables the envelope check when given.
        #[arg(long)]
        epsilon0: Option<f64>,
    },
    /// Cournot subcommands.
    Cournot {
        #[command(subcommand)]
        command: CournotCommand,
    },
    /// Entry-game region scan over (gamma1, theta1).
    Scan {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long)]
        budget: f64,
        #[arg(long, value_enum, default_value_t = MetricArg::D2)]
        metric: MetricArg,
        /// gamma1 axis as lo:hi:steps.
        #[arg(long, default_value = "0:8:9")]
        gamma1: String,
        /// theta1 axis as lo:hi:steps.
        #[arg(long, default_value = "-16:0:9")]
        theta1: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory receiving scan.csv and manifest.json.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Chi-square budget calibration.
    Calibrate {
        #[arg(long)]
        dof: usize,
        #[arg(long, default_value_t = 0.99)]
        level: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
    },
}

#[derive(Subcommand)]
enum CournotCommand {
    Simulate {
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 0.01)]
        a_hat: f64,
        #[arg(long, default_value_t = 0.01)]
        sigma_game: f64,
        #[arg(long, default_value_t = 0.001)]
        sigma_obs: f64,
        #[arg(long, default_value_t = 50)]
        l: usize,
        #[arg(long, default_value_t = 10)]
        n_g: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    Recover {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long, default_value_t = 1)]
        degree: usize,
        #[arg(long, value_enum, default_value_t = MetricArg::D2)]
        metric: MetricArg,
    },
    Diameter {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 1)]
        degree: usize,
        #[arg(long, value_enum, default_value_t = MetricArg::D2)]
        metric: MetricArg,
        #[arg(long, default_value_t = 1e6)]
        cap: f64,
    },
}

/// Cournot observation file: price slope plus quantity profiles.
#[derive(Serialize, Deserialize)]
struct CournotInput {
    n: usize,
    alpha: f64,
    observations: Vec<Vec<f64>>,
}

fn write_json<T: Serialize>(value: &T, output: Option<&PathBuf>) -> Result<(), String> {
    let text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    match output {
        Some(path) => std::fs::write(path, text + "\n").map_err(|e| e.to_string()),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &PathBuf) -> Result<T, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn parse_axis(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("axis {spec} is not lo:hi:steps"));
    }
    let lo: f64 = parts[0].parse().map_err(|_| "bad axis lo")?;
    let hi: f64 = parts[1].parse().map_err(|_| "bad axis hi")?;
    let steps: usize = parts[2].parse().map_err(|_| "bad axis steps")?;
    Ok(ScanGrid::linspace(lo, hi, steps))
}

enum Failure {
    Usage(String),
    Infeasible(String),
    SolverTrouble(String),
}

impl From<String> for Failure {
    fn from(s: String) -> Self {
        Failure::Usage(s)
    }
}

impl From<IdentifyError> for Failure {
    fn from(e: IdentifyError) -> Self {
        match &e {
            IdentifyError::Solver { status: SolveStatus::Infeasible, .. } => {
                Failure::Infeasible(e.to_string())
            }
            IdentifyError::Solver { .. } | IdentifyError::Conic(_) => {
                Failure::SolverTrouble(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<eqscope_cournot::CournotError> for Failure {
    fn from(e: eqscope_cournot::CournotError) -> Self {
        match &e {
            eqscope_cournot::CournotError::Solver { status: SolveStatus::Infeasible, .. } => {
                Failure::Infeasible(e.to_string())
            }
            eqscope_cournot::CournotError::Solver { .. }
            | eqscope_cournot::CournotError::Conic(_) => Failure::SolverTrouble(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let backend = ClarabelBackend::default();
    let jobs = cli.jobs;
    match cli.command {
        Command::SimulateEntry {
            gamma1,
            gamma2,
            theta1,
            theta2,
            sigma,
            sigma_s,
            l,
            seed,
            model,
            dof_mode,
            output,
            truth,
        } => {
            let params = EntryGameParams { gamma1, gamma2, theta1, theta2, sigma, sigma_s, l, seed };
            let dof = match dof_mode {
                DofModeArg::Sym => DofMode::Symmetric,
                DofModeArg::Asym => DofMode::Asymmetric,
            };
            let (set, ground_truth) = generate_entry_observations(&params, model.into(), dof)?;
            write_json(&set, output.as_ref())?;
            if let Some(path) = truth {
                #[derive(Serialize)]
                struct Truth<'a> {
                    game: &'a Game,
                    perturbed: &'a [Game],
                }
                write_json(
                    &Truth { game: &ground_truth.game, perturbed: &ground_truth.perturbed },
                    Some(&path),
                )?;
            }
            Ok(())
        }
        Command::Recover { io, metric, property, eps_zero_sum, true_game, delta } => {
            let obs: ObservationSet = read_json(&io.input)?;
            let mut inst =
                ConsistencyInstance::new(obs, Metric::from(metric), DeltaSpec::Free);
            if let Some(p) = property {
                inst = inst.with_property(match p {
                    PropertyArg::ZeroSum => PropertySpec::ZeroSum,
                    PropertyArg::Potential => PropertySpec::ExactPotential,
                });
            } else if let Some(eps) = eps_zero_sum {
                inst = inst.with_property(PropertySpec::EpsZeroSum { epsilon: eps });
            }
            let rec = min_perturbation(&inst, &backend)?;
            match true_game {
                None => write_json(&RecoveryReport::from(&rec), io.output.as_ref())?,
                Some(path) => {
                    let game: Game = read_json(&path)?;
                    let em = select_independent_subset(&inst.obs)?;
                    let norm2 = eqscope_identify::induced_norm_inverse(&em, InducedNorm::Two)?;
                    let norminf =
                        eqscope_identify::induced_norm_inverse(&em, InducedNorm::Infinity)?;
                    let bound = verify_recovery_bound(
                        &game,
                        &rec.game,
                        &em,
                        delta.expect("clap enforces --delta"),
                        inst.metric,
                    )?;
                    #[derive(Serialize)]
                    struct Combined {
                        recovery: RecoveryReport,
                        bounds: BoundsJson,
                    }
                    write_json(
                        &Combined {
                            recovery: RecoveryReport::from(&rec),
                            bounds: BoundsJson::new(norm2, norminf, &bound),
                        },
                        io.output.as_ref(),
                    )?;
                }
            }
            Ok(())
        }
        Command::Membership { io, game, delta, metric } => {
            let obs: ObservationSet = read_json(&io.input)?;
            let g: Game = read_json(&game)?;
            let inst =
                ConsistencyInstance::new(obs, Metric::from(metric), DeltaSpec::Fixed(delta));
            let member = membership(&g, &inst, &backend)?;
            #[derive(Serialize)]
            struct MemberJson {
                member: bool,
                delta: f64,
            }
            write_json(&MemberJson { member, delta }, io.output.as_ref())?;
            if member {
                Ok(())
            } else {
                Err(Failure::Infeasible("game is outside the consistent set".into()))
            }
        }
        Command::Diameter { io, delta, metric, cap } => {
            let obs: ObservationSet = read_json(&io.input)?;
            let options = DiameterOptions { cap, jobs };
            let report = diameter(&obs, delta, Metric::from(metric), &backend, &options)?;
            write_json(&DiameterJson::from(&report), io.output.as_ref())?;
            Ok(())
        }
        Command::Property { io, budget, metric } => {
            let obs: ObservationSet = read_json(&io.input)?;
            let inst = ConsistencyInstance::new(obs, Metric::from(metric), DeltaSpec::Free);
            let eps = property_threshold(
                &inst,
                &|eps| PropertySpec::EpsZeroSum { epsilon: eps },
                budget,
                &backend,
            )?;
            #[derive(Serialize)]
            struct ThresholdJson {
                epsilon_min: f64,
                budget: f64,
            }
            write_json(&ThresholdJson { epsilon_min: eps, budget }, io.output.as_ref())?;
            Ok(())
        }
        Command::Degeneracy { io, grid, epsilon0 } => {
            let obs: ObservationSet = read_json(&io.input)?;
            let eps_star = degeneracy::degeneracy_threshold(&obs, &backend)?;
            let mut curve = Vec::new();
            for &eps in &grid {
                let sol = degeneracy::solve_p(
                    &StrictnessInstance { obs: obs.clone(), epsilon: eps },
                    &backend,
                )?;
                curve.push((eps, sol.value));
            }
            let envelope_ok = match epsilon0 {
                Some(e0) => {
                    let above: Vec<f64> =
                        grid.iter().copied().filter(|&e| e >= e0).collect();
                    Some(degeneracy::envelope_check(&obs, e0, &above, &backend)?.ok)
                }
                None => None,
            };
            write_json(
                &DegeneracyJson { epsilon_star: eps_star, p_curve: curve, envelope_ok },
                io.output.as_ref(),
            )?;
            Ok(())
        }
        Command::Cournot { command } => match command {
            CournotCommand::Simulate {
                n,
                alpha,
                a_hat,
                sigma_game,
                sigma_obs,
                l,
                n_g,
                seed,
                output,
            } => {
                let params = SimulationParams {
                    n,
                    alpha,
                    a_hat,
                    sigma_game,
                    sigma_obs,
                    l,
                    n_g,
                    seed,
                };
                let games = simulate_cournot(&params)?;
                write_json(&games, output.as_ref())?;
                Ok(())
            }
            CournotCommand::Recover { io, degree, metric } => {
                let input: CournotInput = read_json(&io.input)?;
                let obs: Vec<CournotObservation> = input
                    .observations
                    .iter()
                    .map(|q| CournotObservation { quantities: q.clone() })
                    .collect();
                let price = AffinePrice { alpha: input.alpha };
                let rec = cournot_min_perturbation(
                    &obs,
                    Metric::from(metric),
                    degree,
                    input.n,
                    &price,
                    input.alpha,
                    &backend,
                )?;
                write_json(&CournotRecoveryJson::from(&rec), io.output.as_ref())?;
                Ok(())
            }
            CournotCommand::Diameter { io, delta, degree, metric, cap } => {
                let input: CournotInput = read_json(&io.input)?;
                let obs: Vec<CournotObservation> = input
                    .observations
                    .iter()
                    .map(|q| CournotObservation { quantities: q.clone() })
                    .collect();
                let price = AffinePrice { alpha: input.alpha };
                let options = DiameterOptions { cap, jobs };
                let report = cournot_diameter(
                    &obs,
                    delta,
                    degree,
                    Metric::from(metric),
                    input.n,
                    &price,
                    &backend,
                    &options,
                )?;
                write_json(&CournotDiameterJson::from(&report), io.output.as_ref())?;
                Ok(())
            }
        },
        Command::Scan { io, budget, metric, gamma1, theta1, seed, out_dir } => {
            let obs: ObservationSet = read_json(&io.input)?;
            let grid = ScanGrid { gamma1: parse_axis(&gamma1)?, theta1: parse_axis(&theta1)? };
            let scan = scan_region(&obs, &grid, Metric::from(metric), budget, seed, &backend);
            let (csv, manifest) = emit_outputs(&scan, &out_dir)
                .map_err(|e| Failure::Usage(format!("writing outputs: {e}")))?;
            eprintln!("wrote {} and {}", csv.display(), manifest.display());
            write_json(&scan, io.output.as_ref())?;
            Ok(())
        }
        Command::Calibrate { dof, level, sigma } => {
            let delta = chi_square_delta(dof, level, sigma)?;
            #[derive(Serialize)]
            struct CalibrateJson {
                dof: usize,
                level: f64,
                sigma: f64,
                delta: f64,
            }
            write_json(&CalibrateJson { dof, level, sigma, delta }, None)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Infeasible(msg)) => {
            eprintln!("infeasible: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::SolverTrouble(msg)) => {
            eprintln!("solver trouble: {msg}");
            ExitCode::from(3)
        }
    }
}
