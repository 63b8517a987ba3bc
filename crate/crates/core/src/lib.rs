//! Domain model for finite 2-player games observed through perturbed
//! correlated-equilibrium play.
//!
//! This crate holds the data types shared by the rest of the workspace
//! (games, equilibria, observation sets, metrics), plus small-instance
//! oracles: an exact correlated-equilibrium check and a vertex enumerator
//! for the CE polytope, both intended for desk-scale validation.

pub mod ce;
pub mod error;
pub mod game;
pub mod metric;
pub mod vertices;

pub use ce::{deviation_margin, is_correlated_equilibrium};
pub use error::CoreError;
pub use game::{
    CorrelatedEquilibrium, Game, Observation, ObservationModel, ObservationSet, Player,
};
pub use metric::{metric_distance, Metric};
pub use vertices::enumerate_ce_vertices;
