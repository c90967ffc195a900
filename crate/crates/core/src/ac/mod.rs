//! Exact AC power flow on radial feeders.
//!
//! The sweep solves the complex branch flow equations (Ohm's law per branch,
//! `S_ij = V_i I_ij*`, and power balance per bus) by alternating a backward
//! current accumulation with a forward voltage update. On a tree this yields
//! the unique high-voltage solution, which is also the point at which the
//! second-order cone relaxation of `l_ij = (P_ij² + Q_ij²) / v_i` is tight.
//! [`distflow_residuals`] checks the real-valued DistFlow form of the same
//! equations at that point.

mod residuals;
mod sweep;
mod two_bus;

pub use residuals::{distflow_residuals, DistFlowResiduals};
pub use sweep::{solve_ac_sweep, solve_ac_sweep_with, AcError, AcOptions, AcSolution};
pub use two_bus::{two_bus_closed_form, TwoBusAnalysis, TwoBusError};
