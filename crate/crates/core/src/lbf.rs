//! Linearized branch flow.
//!
//! Each bus draws a current-like quantity equal to its apparent load
//! `d = |P + jQ|`, scaled by `a`. A branch carries the sum over its downstream
//! subtree (KCL), and the voltage magnitude drops by `|Z| * f` across it (KVL).
//! The model is lossless and has no angles, so one backward and one forward
//! pass solve it exactly.
//!
//! Bus shunts are not part of the model. Reactive compensation only enters
//! through a negative `q_load`, and its magnitude still adds to `d`.

use serde::Serialize;
use thiserror::Error;

use crate::case_io::NetworkCase;
use crate::topology::RadialTopology;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LbfError {
    #[error("scaling coefficient a must be positive and finite, got {0}")]
    Scaling(f64),
    #[error("expected {expected} demands, got {found}")]
    DemandLength { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LbfSolution {
    /// Per branch flow, oriented parent→child. Zero for out-of-service branches.
    pub f: Vec<f64>,
    /// Per bus voltage magnitude, p.u.
    pub v: Vec<f64>,
    pub a_used: f64,
    /// Per bus apparent load, p.u. (unscaled).
    pub d: Vec<f64>,
    /// Branches whose net downstream demand is negative, i.e. `f < 0`.
    pub reverse_flow_branches: Vec<usize>,
}

impl LbfSolution {
    /// `slack voltage - v` per bus.
    pub fn voltage_drops(&self, slack_voltage: f64) -> Vec<f64> {
        self.v.iter().map(|v| slack_voltage - v).collect()
    }
}

/// `|P + jQ|`.
pub fn apparent_load(p: f64, q: f64) -> f64 {
    p.hypot(q)
}

pub fn solve_lbf(topo: &RadialTopology, case: &NetworkCase, a: f64) -> Result<LbfSolution, LbfError> {
    let d: Vec<f64> = case.buses.iter().map(|b| apparent_load(b.p_load, b.q_load)).collect();
    solve_lbf_with_demands(topo, case, &d, a)
}

/// LBF with explicit per-bus demands instead of `|P + jQ|` from the case.
pub fn solve_lbf_with_demands(
    topo: &RadialTopology,
    case: &NetworkCase,
    demands: &[f64],
    a: f64,
) -> Result<LbfSolution, LbfError> {
    if !(a.is_finite() && a > 0.0) {
        return Err(LbfError::Scaling(a));
    }
    let n = topo.bus_count();
    if demands.len() != n {
        return Err(LbfError::DemandLength { expected: n, found: demands.len() });
    }

    let mut f = vec![0.0; case.branches.len()];
    let mut subtree: Vec<f64> = demands.iter().map(|d| a * d).collect();
    for &bus in topo.bfs_order.iter().rev() {
        if let Some((parent, k)) = topo.parent[bus] {
            f[k] = subtree[bus];
            subtree[parent] += subtree[bus];
        }
    }

    let mut v = vec![0.0; n];
    v[topo.root] = case.slack_voltage_pu;
    for &bus in &topo.bfs_order {
        if let Some((parent, k)) = topo.parent[bus] {
            v[bus] = v[parent] - case.branches[k].z_abs() * f[k];
        }
    }

    let reverse_flow_branches = f
        .iter()
        .enumerate()
        .filter(|(_, &fk)| fk < 0.0)
        .map(|(k, _)| k)
        .collect();

    Ok(LbfSolution { f, v, a_used: a, d: demands.to_vec(), reverse_flow_branches })
}
