//! Hybrid lattice Boltzmann driver: BGK or trained-circuit collision on a
//! 16-slot grid, halfway bounce-back walls, benchmark cases and diagnostics.

mod cases;
mod diagnostics;
mod grid;

pub use cases::{
    bgk_backend, init_lid_cavity, init_taylor_green, run, run_from, taylor_green_velocity, Case,
    MassAudit, SimConfig, SimOutput,
};
pub use diagnostics::{
    centerline_profiles, error_fields, fit_decay_rate, peak_speed, taylor_green_decay_rate,
    Centerlines, ErrorFields, FieldSnapshot, FieldStats, ProfilePoint, SPEED_FLOOR,
};
pub use grid::{Backend, Grid, NodeKind, StepStats};
