//! Consistent-set queries for n-player Cournot competition with a known
//! affine price and unknown convex polynomial costs. Equilibria are
//! characterized by first-order conditions that are linear in the cost
//! coefficients; convexity of each cost is certified through a
//! sum-of-squares Gram matrix, so every query is a semidefinite program.

pub mod diameter;
pub mod error;
pub mod model;
pub mod recover;
pub mod simulate;
pub mod sos;

pub use diameter::{cournot_diameter, CournotDiameterReport};
pub use error::CournotError;
pub use model::{
    build_foc_constraints, foc_lhs, AffinePrice, CournotModel, CournotObservation, PriceModel,
};
pub use recover::{cournot_min_perturbation, CournotRecovery};
pub use simulate::{simulate_cournot, solve_linear_equilibrium, SimulatedGame, SimulationParams};
pub use sos::build_sos_convexity;
