//! LBF against the AC benchmark.

mod bounds;
mod compare;
mod sweep;
mod timing;

pub use bounds::{check_bounds, BoundCheckResult};
pub use compare::{compare, signed_error_pct, CompareError, ErrorReport, DEFAULT_FLOW_FLOOR};
pub use sweep::{
    apply_load_level, apply_pq_ratio, apply_rx_ratio, run_sweep, run_sweep_with, sweep_point_case,
    SweepError, SweepOptions, SweepPoint, SweepSeries,
};
pub use timing::{
    batch_timing, batch_timing_with, generate_scenarios, TimingError, TimingOptions, TimingReport,
};
