//! Identification machinery over the sharp set of games consistent with
//! observed (perturbed) correlated-equilibrium play: constraint-system
//! builders, perturbation-minimizing recovery, linear-property queries,
//! the consistent-set diameter, recovery-error bounds, and the
//! no-payoff-information degeneracy analysis.

pub mod bounds;
pub mod consistency;
pub mod degeneracy;
pub mod diameter;
pub mod error;

pub use bounds::{
    example2_instance, induced_norm_inverse, select_independent_subset, verify_recovery_bound,
    BoundReport, Example2, InducedNorm, ObservationMatrix,
};
pub use consistency::{
    attach_property, build_equilibrium_constraints, build_metric_constraint,
    build_payoff_info_constraints, membership, membership_with, min_budget_for,
    min_perturbation, min_perturbation_with, property_threshold, AffineMap,
    ConsistencyInstance, DeltaSpec, GameExpr, MatExpr, PropertySpec, Recovery,
};
pub use degeneracy::{
    build_tilde_vectors, check_slater, degeneracy_threshold, envelope_check, solve_p,
    transpose_observations, EnvelopeReport, PSolution, StrictnessInstance, TildeVector,
};
pub use diameter::{
    diameter, diameter_monotonicity_check, is_nondecreasing, DiameterOptions, DiameterReport,
    EntryBound,
};
pub use error::IdentifyError;
