use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use super::residuals::distflow_residuals;
use crate::case_io::{BusId, NetworkCase};
use crate::topology::RadialTopology;

/// Voltage magnitude below which a sweep is declared collapsed, p.u.
pub const COLLAPSE_VOLTAGE_PU: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AcOptions {
    /// Bound on the largest per-iteration change of any complex bus voltage.
    pub tol: f64,
    pub max_iter: usize,
    /// Fraction of each forward-pass update applied, in (0, 1].
    pub damping: f64,
}

impl Default for AcOptions {
    fn default() -> Self {
        AcOptions { tol: 1e-10, max_iter: 100, damping: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AcError {
    #[error("sweep did not converge in {iterations} iterations (last max |dV| = {last_change:e})")]
    NotConverged { iterations: usize, last_change: f64 },
    #[error("voltage collapse at bus {bus} in iteration {iteration} (|V| = {magnitude})")]
    VoltageCollapse { bus: BusId, iteration: usize, magnitude: f64 },
    #[error("invalid sweep options: {0}")]
    Options(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcSolution {
    pub v_complex: Vec<Complex64>,
    /// `|V|²` per bus.
    pub v_mag_sq: Vec<f64>,
    /// Sending-end (parent side) flows per branch, p.u.
    pub branch_p: Vec<f64>,
    pub branch_q: Vec<f64>,
    /// Branch currents, parent→child.
    pub branch_current: Vec<Complex64>,
    /// `|I|²` per branch.
    pub l: Vec<f64>,
    pub i_mag: Vec<f64>,
    pub iterations: usize,
    pub max_residual: f64,
}

impl AcSolution {
    pub fn v_mag(&self) -> Vec<f64> {
        self.v_complex.iter().map(|v| v.norm()).collect()
    }
}

pub fn solve_ac_sweep(
    topo: &RadialTopology,
    case: &NetworkCase,
    tol: f64,
    max_iter: usize,
) -> Result<AcSolution, AcError> {
    solve_ac_sweep_with(topo, case, &AcOptions { tol, max_iter, ..AcOptions::default() })
}

pub fn solve_ac_sweep_with(
    topo: &RadialTopology,
    case: &NetworkCase,
    opts: &AcOptions,
) -> Result<AcSolution, AcError> {
    if !(opts.tol.is_finite() && opts.tol > 0.0) {
        return Err(AcError::Options(format!("tol must be positive, got {}", opts.tol)));
    }
    if opts.max_iter == 0 {
        return Err(AcError::Options("max_iter must be at least 1".into()));
    }
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(AcError::Options(format!("damping must be in (0, 1], got {}", opts.damping)));
    }

    let n = topo.bus_count();
    let load: Vec<Complex64> =
        case.buses.iter().map(|b| Complex64::new(b.p_load, b.q_load)).collect();
    let shunt: Vec<Complex64> =
        case.buses.iter().map(|b| Complex64::new(b.g_shunt, b.b_shunt)).collect();
    let z: Vec<Complex64> = case.branches.iter().map(|br| Complex64::new(br.r, br.x)).collect();
    let slack = Complex64::new(case.slack_voltage_pu, 0.0);

    let mut v = vec![slack; n];
    let mut v_next = vec![slack; n];
    let mut acc = vec![Complex64::default(); n];
    let mut current = vec![Complex64::default(); case.branches.len()];

    let mut iterations = 0;
    let mut last_change = f64::INFINITY;
    while iterations < opts.max_iter {
        iterations += 1;
        backward(topo, &v, &load, &shunt, &mut acc, &mut current);
        v_next[topo.root] = slack;
        for &bus in &topo.bfs_order {
            if let Some((parent, k)) = topo.parent[bus] {
                v_next[bus] = v_next[parent] - z[k] * current[k];
            }
        }
        last_change = 0.0;
        for bus in 0..n {
            let updated = v[bus] + (v_next[bus] - v[bus]) * opts.damping;
            let magnitude = updated.norm();
            if !(magnitude >= COLLAPSE_VOLTAGE_PU) {
                return Err(AcError::VoltageCollapse {
                    bus: topo.bus_ids[bus],
                    iteration: iterations,
                    magnitude,
                });
            }
            last_change = last_change.max((updated - v[bus]).norm());
            v[bus] = updated;
        }
        if last_change < opts.tol {
            break;
        }
    }
    if !(last_change < opts.tol) {
        return Err(AcError::NotConverged { iterations, last_change });
    }

    // currents consistent with the final voltages
    backward(topo, &v, &load, &shunt, &mut acc, &mut current);
    let mut branch_p = vec![0.0; case.branches.len()];
    let mut branch_q = vec![0.0; case.branches.len()];
    for &bus in &topo.bfs_order {
        if let Some((parent, k)) = topo.parent[bus] {
            let s = v[parent] * current[k].conj();
            branch_p[k] = s.re;
            branch_q[k] = s.im;
        }
    }
    let l: Vec<f64> = current.iter().map(|i| i.norm_sqr()).collect();
    let mut sol = AcSolution {
        v_mag_sq: v.iter().map(|v| v.norm_sqr()).collect(),
        v_complex: v,
        branch_p,
        branch_q,
        i_mag: current.iter().map(|i| i.norm()).collect(),
        branch_current: current,
        l,
        iterations,
        max_residual: 0.0,
    };
    sol.max_residual = distflow_residuals(&sol, topo, case).max_abs;
    Ok(sol)
}

/// Branch currents from bus voltages: load current `(S/V)*` plus shunt current
/// `y V`, accumulated from the leaves.
fn backward(
    topo: &RadialTopology,
    v: &[Complex64],
    load: &[Complex64],
    shunt: &[Complex64],
    acc: &mut [Complex64],
    current: &mut [Complex64],
) {
    for bus in 0..v.len() {
        acc[bus] = (load[bus] / v[bus]).conj() + shunt[bus] * v[bus];
    }
    for &bus in topo.bfs_order.iter().rev() {
        if let Some((parent, k)) = topo.parent[bus] {
            current[k] = acc[bus];
            let a = acc[bus];
            acc[parent] += a;
        }
    }
}
