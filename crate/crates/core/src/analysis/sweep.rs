//! Parameter sweeps: P/Q ratio at buses, r/x ratio on branches, load level.

use serde::Serialize;
use thiserror::Error;

use super::compare::{compare, ErrorReport, DEFAULT_FLOW_FLOOR};
use crate::ac::{solve_ac_sweep_with, AcOptions};
use crate::case_io::{BusId, ConfigError, NetworkCase, SweepConfig, SweepTarget};
use crate::lbf::{solve_lbf, LbfError};
use crate::topology::{build_radial_topology, RadialTopology, TopologyError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Lbf(#[from] LbfError),
    #[error("bus {0} not in case")]
    UnknownBus(BusId),
    #[error("bus {0} is the slack and has no feeding branch")]
    NoFeedingBranch(BusId),
    #[error("{target} value {value} is not a valid ratio")]
    InvalidRatio { target: SweepTarget, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepOptions {
    pub ac: AcOptions,
    pub flow_floor: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { ac: AcOptions::default(), flow_floor: DEFAULT_FLOW_FLOOR }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    pub report: Option<ErrorReport>,
    /// Why the AC benchmark failed at this point.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSeries {
    pub target: SweepTarget,
    pub parameter_values: Vec<f64>,
    pub per_value_reports: Vec<SweepPoint>,
    /// Buses whose feeding branch is traced.
    pub focus_ids: Vec<BusId>,
    pub focus_branches: Vec<usize>,
    /// `focus_series[point][j]`: flow error (%) on `focus_branches[j]`.
    pub focus_series: Vec<Vec<Option<f64>>>,
}

impl SweepSeries {
    /// Flow error trace of one focus element across the sweep.
    pub fn trace(&self, focus_index: usize) -> Vec<Option<f64>> {
        self.focus_series.iter().map(|row| row[focus_index]).collect()
    }

    pub fn failed_points(&self) -> usize {
        self.per_value_reports.iter().filter(|p| p.report.is_none()).count()
    }
}

/// Sets P/Q at `bus` to `ratio` keeping `|P + jQ|` and the sign of Q.
pub fn apply_pq_ratio(case: &mut NetworkCase, bus: usize, ratio: f64) {
    let b = &mut case.buses[bus];
    let d = b.p_load.hypot(b.q_load);
    let sign = if b.q_load < 0.0 { -1.0 } else { 1.0 };
    let norm = ratio.hypot(1.0);
    b.p_load = d * ratio / norm;
    b.q_load = sign * d / norm;
}

/// Sets r/x on `branch` to `ratio` keeping `|Z|` and the sign of x.
pub fn apply_rx_ratio(case: &mut NetworkCase, branch: usize, ratio: f64) {
    let br = &mut case.branches[branch];
    let z = br.z_abs();
    let sign = if br.x < 0.0 { -1.0 } else { 1.0 };
    let norm = ratio.hypot(1.0);
    br.r = z * ratio / norm;
    br.x = sign * z / norm;
}

pub fn apply_load_level(case: &mut NetworkCase, bus: usize, level: f64) {
    let b = &mut case.buses[bus];
    b.p_load *= level;
    b.q_load *= level;
}

pub fn run_sweep(case: &NetworkCase, cfg: &SweepConfig) -> Result<SweepSeries, SweepError> {
    run_sweep_with(case, cfg, &SweepOptions::default())
}

pub fn run_sweep_with(
    case: &NetworkCase,
    cfg: &SweepConfig,
    opts: &SweepOptions,
) -> Result<SweepSeries, SweepError> {
    cfg.validate()?;
    let topo = build_radial_topology(case)?;
    let targets = resolve_buses(&topo, &cfg.node_or_branch_ids)?;
    let focus_buses = resolve_buses(&topo, cfg.focus_ids())?;
    let focus_branches = feeding_branches(&topo, &focus_buses)?;
    let target_branches =
        if cfg.target == SweepTarget::RxRatio { feeding_branches(&topo, &targets)? } else { Vec::new() };
    if matches!(cfg.target, SweepTarget::PqRatio | SweepTarget::RxRatio) {
        if let Some(&value) = cfg.values.iter().find(|v| **v < 0.0) {
            return Err(SweepError::InvalidRatio { target: cfg.target, value });
        }
    }

    let mut points = Vec::with_capacity(cfg.values.len());
    let mut focus_series = Vec::with_capacity(cfg.values.len());
    for &value in &cfg.values {
        let scenario = transformed(case, cfg.target, &targets, &target_branches, value);
        let lbf = solve_lbf(&topo, &scenario, cfg.scaling_a)?;
        let point = match solve_ac_sweep_with(&topo, &scenario, &opts.ac) {
            Ok(ac) => {
                let report = compare(&lbf, &ac, opts.flow_floor).expect("same topology");
                SweepPoint { value, report: Some(report), failure: None }
            }
            Err(e) => SweepPoint { value, report: None, failure: Some(e.to_string()) },
        };
        focus_series.push(
            focus_branches
                .iter()
                .map(|&k| point.report.as_ref().and_then(|r| r.flow_error[k]))
                .collect(),
        );
        points.push(point);
    }

    Ok(SweepSeries {
        target: cfg.target,
        parameter_values: cfg.values.clone(),
        per_value_reports: points,
        focus_ids: cfg.focus_ids().to_vec(),
        focus_branches,
        focus_series,
    })
}

/// The case as modified for one sweep point.
pub fn sweep_point_case(
    case: &NetworkCase,
    topo: &RadialTopology,
    cfg: &SweepConfig,
    value: f64,
) -> Result<NetworkCase, SweepError> {
    let targets = resolve_buses(topo, &cfg.node_or_branch_ids)?;
    let branches = if cfg.target == SweepTarget::RxRatio { feeding_branches(topo, &targets)? } else { Vec::new() };
    Ok(transformed(case, cfg.target, &targets, &branches, value))
}

fn transformed(
    case: &NetworkCase,
    target: SweepTarget,
    buses: &[usize],
    branches: &[usize],
    value: f64,
) -> NetworkCase {
    let mut scenario = case.clone();
    match target {
        SweepTarget::PqRatio => buses.iter().for_each(|&b| apply_pq_ratio(&mut scenario, b, value)),
        SweepTarget::RxRatio => branches.iter().for_each(|&k| apply_rx_ratio(&mut scenario, k, value)),
        SweepTarget::LoadLevel => buses.iter().for_each(|&b| apply_load_level(&mut scenario, b, value)),
    }
    scenario
}

fn feeding_branches(topo: &RadialTopology, buses: &[usize]) -> Result<Vec<usize>, SweepError> {
    buses
        .iter()
        .map(|&b| topo.feeding_branch(b).ok_or(SweepError::NoFeedingBranch(topo.bus_ids[b])))
        .collect()
}

fn resolve_buses(topo: &RadialTopology, ids: &[BusId]) -> Result<Vec<usize>, SweepError> {
    ids.iter()
        .map(|&id| topo.index_of(id).ok_or(SweepError::UnknownBus(id)))
        .collect()
}
