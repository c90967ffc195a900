//! LBF invariants on a random tree, shared by the property suite and the
//! acceptance run.

use lbf_core::{build_radial_topology, solve_lbf, solve_lbf_with_demands, NetworkCase, RadialTopology};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use super::{rel_close, volt_close, RandomTree};

pub const TOL: f64 = 1e-12;

type Check = Result<(), TestCaseError>;

fn setup(tree: &RandomTree) -> (NetworkCase, RadialTopology) {
    let case = tree.case();
    let topo = build_radial_topology(&case).unwrap();
    (case, topo)
}

pub fn kcl_telescoping(tree: &RandomTree, a: f64) -> Check {
    let (case, topo) = setup(tree);
    let sol = solve_lbf(&topo, &case, a).unwrap();
    for k in 0..case.branches.len() {
        let child = k + 1;
        let expected: f64 = (0..tree.bus_count())
            .filter(|&b| tree.in_subtree(b, child))
            .map(|b| case.buses[b].p_load.hypot(case.buses[b].q_load))
            .sum::<f64>()
            * a;
        prop_assert!(rel_close(sol.f[k], expected, TOL), "branch {k}: {} vs {expected}", sol.f[k]);
    }
    let total: f64 = sol.d.iter().sum::<f64>() * a;
    let root_out: f64 = topo.children[topo.root].iter().map(|&(_, k)| sol.f[k]).sum();
    prop_assert!(rel_close(root_out, total, TOL));
    Ok(())
}

pub fn homogeneity(tree: &RandomTree, k: f64) -> Check {
    let (case, topo) = setup(tree);
    let base = solve_lbf(&topo, &case, 1.0).unwrap();
    let scaled_d: Vec<f64> = base.d.iter().map(|d| d * k).collect();
    let scaled = solve_lbf_with_demands(&topo, &case, &scaled_d, 1.0).unwrap();
    let v0 = case.slack_voltage_pu;
    for (fs, fb) in scaled.f.iter().zip(&base.f) {
        prop_assert!(rel_close(*fs, k * fb, TOL));
    }
    for (vs, vb) in scaled.v.iter().zip(&base.v) {
        prop_assert!(volt_close(*vs, v0 - k * (v0 - vb), v0, TOL));
    }
    Ok(())
}

pub fn scaling_is_linear(tree: &RandomTree, a: f64) -> Check {
    let (case, topo) = setup(tree);
    let one = solve_lbf(&topo, &case, 1.0).unwrap();
    let scaled = solve_lbf(&topo, &case, a).unwrap();
    let v0 = case.slack_voltage_pu;
    for (fs, f1) in scaled.f.iter().zip(&one.f) {
        prop_assert!(rel_close(*fs, a * f1, TOL));
    }
    for (vs, v1) in scaled.v.iter().zip(&one.v) {
        prop_assert!(volt_close(*vs, v0 - a * (v0 - v1), v0, TOL));
    }
    Ok(())
}

pub fn superposition(tree: &RandomTree, other: &[f64]) -> Check {
    let (case, topo) = setup(tree);
    let n = tree.bus_count();
    let d1 = solve_lbf(&topo, &case, 1.0).unwrap().d;
    let d2 = other[..n].to_vec();
    let sum: Vec<f64> = d1.iter().zip(&d2).map(|(a, b)| a + b).collect();
    let s1 = solve_lbf_with_demands(&topo, &case, &d1, 1.0).unwrap();
    let s2 = solve_lbf_with_demands(&topo, &case, &d2, 1.0).unwrap();
    let s = solve_lbf_with_demands(&topo, &case, &sum, 1.0).unwrap();
    let v0 = case.slack_voltage_pu;
    for k in 0..s.f.len() {
        prop_assert!(rel_close(s.f[k], s1.f[k] + s2.f[k], TOL));
    }
    for b in 0..n {
        let drops = (v0 - s1.v[b]) + (v0 - s2.v[b]);
        prop_assert!(volt_close(s.v[b], v0 - drops, v0, TOL));
    }
    Ok(())
}

pub fn monotone_voltage(tree: &RandomTree) -> Check {
    let (case, topo) = setup(tree);
    let sol = solve_lbf(&topo, &case, 1.0).unwrap();
    prop_assert!(sol.reverse_flow_branches.is_empty());
    for b in 0..tree.bus_count() {
        if let Some((p, _)) = topo.parent[b] {
            prop_assert!(sol.v[b] <= sol.v[p]);
        }
    }
    Ok(())
}

pub fn path_formula(tree: &RandomTree) -> Check {
    let (case, topo) = setup(tree);
    let sol = solve_lbf(&topo, &case, 1.0).unwrap();
    let v0 = case.slack_voltage_pu;
    for b in 0..tree.bus_count() {
        let mut drop = 0.0;
        let mut cur = b;
        while let Some(p) = tree.parent_of(cur) {
            drop += case.branches[cur - 1].z_abs() * sol.f[cur - 1];
            cur = p;
        }
        prop_assert!(volt_close(sol.v[b], v0 - drop, v0, TOL));
    }
    Ok(())
}

/// Every invariant on one tree.
pub fn all(tree: &RandomTree, a: f64, k: f64, other: &[f64]) -> Check {
    kcl_telescoping(tree, a)?;
    homogeneity(tree, k)?;
    scaling_is_linear(tree, a)?;
    superposition(tree, other)?;
    monotone_voltage(tree)?;
    path_formula(tree)
}
