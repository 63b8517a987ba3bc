//! Simulation harness and command-line front end: entry-game generation,
//! chi-square budget calibration, parameter-region scans, and JSON/CSV
//! emission for every query in the workspace.

pub mod chi;
pub mod entry;
pub mod report;
pub mod scan;

pub use chi::chi_square_delta;
pub use entry::{
    generate_entry_observations, nash_equilibria_2x2, DofMode, EntryGameParams, EntryGroundTruth,
};
pub use scan::{emit_outputs, entry_structure_hook, scan_region, RegionScan, ScanGrid};
