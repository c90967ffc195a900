use serde::Serialize;

use super::ErrorReport;

/// Sign check for scaled LBF: voltages should be lower bounds (error ≤ 0)
/// and defined branch flows upper bounds (error ≥ 0).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheckResult {
    pub all_voltage_errors_nonpositive: bool,
    /// Bus indices with positive voltage error.
    pub voltage_violations: Vec<usize>,
    pub all_flow_errors_nonnegative: bool,
    /// Branch indices with negative (defined) flow error.
    pub flow_violations: Vec<usize>,
    pub a_used: f64,
}

pub fn check_bounds(report: &ErrorReport, a: f64) -> BoundCheckResult {
    let voltage_violations: Vec<usize> = report
        .voltage_error
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0.0)
        .map(|(i, _)| i)
        .collect();
    let flow_violations: Vec<usize> = report
        .flow_error
        .iter()
        .enumerate()
        .filter_map(|(k, e)| e.filter(|&e| e < 0.0).map(|_| k))
        .collect();
    BoundCheckResult {
        all_voltage_errors_nonpositive: voltage_violations.is_empty(),
        voltage_violations,
        all_flow_errors_nonnegative: flow_violations.is_empty(),
        flow_violations,
        a_used: a,
    }
}
