//! Power flow on radial distribution feeders.
//!
//! Two solvers share one network model:
//!
//! * [`lbf`]: the linearized branch flow model. Branch "currents" accumulate
//!   apparent loads up the tree and voltage drops are `|Z| * f`. One backward
//!   and one forward pass, no iteration.
//! * [`ac`]: the exact AC branch flow solution, computed with an iterative
//!   backward/forward sweep and checked against the DistFlow equations.
//!
//! [`analysis`] compares the two (signed per-bus voltage errors and per-branch
//! flow errors), runs parameter sweeps, checks the sign bounds of scaled LBF
//! and times batches of load scenarios.
//!
//! ```
//! use lbf_core::{feeders, parse_matpower_case, build_radial_topology, solve_lbf};
//!
//! let case = parse_matpower_case(feeders::CASE33BW)
//!     .unwrap()
//!     .with_slack_voltage(1.05)
//!     .unwrap();
//! let topo = build_radial_topology(&case).unwrap();
//! let sol = solve_lbf(&topo, &case, 1.0).unwrap();
//! assert_eq!(sol.v.len(), 33);
//! ```

pub mod ac;
pub mod analysis;
pub mod case_io;
pub mod feeders;
pub mod lbf;
pub mod topology;

mod error;

pub use ac::{
    distflow_residuals, solve_ac_sweep, solve_ac_sweep_with, two_bus_closed_form, AcError,
    AcOptions, AcSolution, DistFlowResiduals, TwoBusAnalysis, TwoBusError,
};
pub use analysis::{
    batch_timing, batch_timing_with, check_bounds, compare, run_sweep, run_sweep_with,
    DEFAULT_FLOW_FLOOR,
    BoundCheckResult, CompareError, ErrorReport, SweepError, SweepOptions, SweepPoint,
    SweepSeries, TimingError, TimingOptions, TimingReport,
};
pub use case_io::{
    load_sweep_config, parse_matpower_case, parse_matpower_case_with, write_matpower_case,
    BranchRecord, BusId, BusRecord, ConfigError, NetworkCase, ParseError, ParseOptions,
    SweepConfig, SweepTarget, ValidationError, REFERENCE_SLACK_VOLTAGE_PU,
};
pub use error::Error;
pub use lbf::{apparent_load, solve_lbf, solve_lbf_with_demands, LbfError, LbfSolution};
pub use topology::{build_radial_topology, RadialTopology, TopologyError};
