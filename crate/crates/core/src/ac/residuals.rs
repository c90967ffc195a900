use serde::Serialize;

use super::AcSolution;
use crate::case_io::NetworkCase;
use crate::topology::RadialTopology;

/// DistFlow residuals at an AC solution.
///
/// Per bus (zero at the slack, whose injection is free):
///
/// ```text
/// active:   -p_load_j - [ sum_k P_jk - (P_ij - r_ij l_ij) + g_j v_j ]
/// reactive: -q_load_j - [ sum_k Q_jk - (Q_ij - x_ij l_ij) - b_j v_j ]
/// ```
///
/// Per branch:
///
/// ```text
/// voltage_drop:       v_j - [ v_i - 2 (r P + x Q) + (r² + x²) l ]
/// current_definition: l v_i - (P² + Q²)
/// ```
///
/// Shunt reactive power follows the MATPOWER sign (`b > 0` injects), i.e. the
/// shunt consumes `y* v = (g - jb) v`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistFlowResiduals {
    pub active_balance: Vec<f64>,
    pub reactive_balance: Vec<f64>,
    pub voltage_drop: Vec<f64>,
    pub current_definition: Vec<f64>,
    /// Net power delivered by the slack bus, p.u.
    pub slack_p: f64,
    pub slack_q: f64,
    pub max_abs: f64,
}

pub fn distflow_residuals(
    sol: &AcSolution,
    topo: &RadialTopology,
    case: &NetworkCase,
) -> DistFlowResiduals {
    let n = topo.bus_count();
    let m = case.branches.len();
    let mut out_p = vec![0.0; n];
    let mut out_q = vec![0.0; n];
    for &bus in &topo.bfs_order {
        if let Some((parent, k)) = topo.parent[bus] {
            out_p[parent] += sol.branch_p[k];
            out_q[parent] += sol.branch_q[k];
        }
    }

    let mut active_balance = vec![0.0; n];
    let mut reactive_balance = vec![0.0; n];
    let mut voltage_drop = vec![0.0; m];
    let mut current_definition = vec![0.0; m];
    for &bus in &topo.bfs_order {
        let Some((parent, k)) = topo.parent[bus] else { continue };
        let b = &case.buses[bus];
        let br = &case.branches[k];
        let (p, q, l) = (sol.branch_p[k], sol.branch_q[k], sol.l[k]);
        let v = sol.v_mag_sq[bus];
        let vi = sol.v_mag_sq[parent];
        active_balance[bus] = -b.p_load - (out_p[bus] - (p - br.r * l) + b.g_shunt * v);
        reactive_balance[bus] = -b.q_load - (out_q[bus] - (q - br.x * l) - b.b_shunt * v);
        voltage_drop[k] = v - (vi - 2.0 * (br.r * p + br.x * q) + (br.r * br.r + br.x * br.x) * l);
        current_definition[k] = l * vi - (p * p + q * q);
    }

    let root = &case.buses[topo.root];
    let v_root = sol.v_mag_sq[topo.root];
    let slack_p = out_p[topo.root] + root.p_load + root.g_shunt * v_root;
    let slack_q = out_q[topo.root] + root.q_load - root.b_shunt * v_root;

    let max_abs = active_balance
        .iter()
        .chain(&reactive_balance)
        .chain(&voltage_drop)
        .chain(&current_definition)
        .fold(0.0_f64, |acc, r| acc.max(r.abs()));

    DistFlowResiduals {
        active_balance,
        reactive_balance,
        voltage_drop,
        current_definition,
        slack_p,
        slack_q,
        max_abs,
    }
}
