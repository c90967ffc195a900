use serde::Serialize;
use thiserror::Error;

use crate::ac::AcSolution;
use crate::lbf::LbfSolution;

/// Branches whose AC current is below this (p.u.) get no relative flow error.
pub const DEFAULT_FLOW_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompareError {
    #[error("bus count mismatch: lbf {lbf}, ac {ac}")]
    BusCount { lbf: usize, ac: usize },
    #[error("branch count mismatch: lbf {lbf}, ac {ac}")]
    BranchCount { lbf: usize, ac: usize },
    #[error("flow floor must be non-negative, got {0}")]
    FlowFloor(f64),
}

/// Signed LBF errors relative to AC, in percent.
///
/// Voltages compare `V_LBF` with `|V_AC|`; branches compare the LBF flow `f`
/// with the AC current magnitude `sqrt(l)`. Aggregates are means of absolute
/// values over defined entries, or 0 when nothing is defined.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub voltage_error: Vec<f64>,
    pub flow_error: Vec<Option<f64>>,
    pub flow_error_defined: Vec<bool>,
    /// `f_LBF - |I_AC|`, p.u., recorded for every branch.
    pub flow_abs_error: Vec<f64>,
    pub avg_abs_voltage_error: f64,
    pub avg_abs_flow_error: f64,
    pub flow_floor: f64,
}

/// `100 (value - reference) / reference`.
pub fn signed_error_pct(value: f64, reference: f64) -> f64 {
    100.0 * (value - reference) / reference
}

pub fn compare(lbf: &LbfSolution, ac: &AcSolution, flow_floor: f64) -> Result<ErrorReport, CompareError> {
    if lbf.v.len() != ac.v_complex.len() {
        return Err(CompareError::BusCount { lbf: lbf.v.len(), ac: ac.v_complex.len() });
    }
    if lbf.f.len() != ac.i_mag.len() {
        return Err(CompareError::BranchCount { lbf: lbf.f.len(), ac: ac.i_mag.len() });
    }
    if !(flow_floor >= 0.0) {
        return Err(CompareError::FlowFloor(flow_floor));
    }

    let voltage_error: Vec<f64> = lbf
        .v
        .iter()
        .zip(&ac.v_complex)
        .map(|(&v, vac)| signed_error_pct(v, vac.norm()))
        .collect();
    let flow_abs_error: Vec<f64> = lbf.f.iter().zip(&ac.i_mag).map(|(f, i)| f - i).collect();
    let flow_error: Vec<Option<f64>> = lbf
        .f
        .iter()
        .zip(&ac.i_mag)
        .map(|(&f, &i)| (i >= flow_floor && i > 0.0).then(|| signed_error_pct(f, i)))
        .collect();
    let flow_error_defined = flow_error.iter().map(Option::is_some).collect();

    let avg_abs_voltage_error = mean_abs(voltage_error.iter().copied());
    let avg_abs_flow_error = mean_abs(flow_error.iter().flatten().copied());

    Ok(ErrorReport {
        voltage_error,
        flow_error,
        flow_error_defined,
        flow_abs_error,
        avg_abs_voltage_error,
        avg_abs_flow_error,
        flow_floor,
    })
}

fn mean_abs(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, n), v| (s + v.abs(), n + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}
