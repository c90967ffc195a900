#![allow(dead_code)]

use lbf_core::{
    build_radial_topology, feeders, parse_matpower_case_with, BranchRecord, BusId, BusRecord,
    NetworkCase, ParseOptions, RadialTopology,
};
use proptest::prelude::*;

pub fn feeder(source: &str) -> (NetworkCase, RadialTopology) {
    let case = parse_matpower_case_with(source, &ParseOptions::reference_profile()).unwrap();
    let topo = build_radial_topology(&case).unwrap();
    (case, topo)
}

pub fn all_feeders() -> Vec<(&'static str, NetworkCase, RadialTopology)> {
    feeders::ALL
        .iter()
        .map(|(name, src)| {
            let (c, t) = feeder(src);
            (*name, c, t)
        })
        .collect()
}

/// Random radial tree description: per non-root bus its parent position,
/// load, and branch impedance. Bus ids are shuffled and branch orientation is
/// randomized so nothing relies on file order.
#[derive(Debug, Clone)]
pub struct RandomTree {
    pub parents: Vec<usize>,
    pub loads: Vec<(f64, f64)>,
    pub impedances: Vec<(f64, f64)>,
    pub flips: Vec<bool>,
    pub id_offset: u32,
    pub slack_voltage: f64,
}

pub fn random_tree(max_buses: usize) -> impl Strategy<Value = RandomTree> {
    (2..=max_buses)
        .prop_flat_map(|n| {
            let parents = (1..n).map(|i| 0..i).collect::<Vec<_>>();
            (
                parents,
                prop::collection::vec((0.0f64..0.05, 0.0f64..0.04), n),
                prop::collection::vec((1e-3f64..0.05, 1e-3f64..0.05), n - 1),
                prop::collection::vec(any::<bool>(), n - 1),
                1u32..1000,
                0.95f64..1.1,
            )
        })
        .prop_map(|(parents, loads, impedances, flips, id_offset, slack_voltage)| RandomTree {
            parents,
            loads,
            impedances,
            flips,
            id_offset,
            slack_voltage,
        })
}

impl RandomTree {
    pub fn bus_count(&self) -> usize {
        self.loads.len()
    }

    /// Bus ids are a reversed range so file order differs from id order.
    pub fn id(&self, i: usize) -> BusId {
        BusId(self.id_offset + (self.bus_count() - 1 - i) as u32)
    }

    pub fn case(&self) -> NetworkCase {
        let buses = self
            .loads
            .iter()
            .enumerate()
            .map(|(i, &(p, q))| BusRecord {
                id: self.id(i),
                p_load: if i == 0 { 0.0 } else { p },
                q_load: if i == 0 { 0.0 } else { q },
                g_shunt: 0.0,
                b_shunt: 0.0,
                base_kv: 12.66,
            })
            .collect();
        let branches = self
            .parents
            .iter()
            .enumerate()
            .map(|(k, &p)| {
                let (a, b) = (self.id(p), self.id(k + 1));
                let (from_bus, to_bus) = if self.flips[k] { (b, a) } else { (a, b) };
                let (r, x) = self.impedances[k];
                BranchRecord { from_bus, to_bus, r, x, in_service: true }
            })
            .collect();
        let case = NetworkCase {
            name: None,
            base_mva: 1.0,
            buses,
            branches,
            slack_bus_id: self.id(0),
            slack_voltage_pu: self.slack_voltage,
        };
        case.validate().unwrap();
        case
    }

    /// Position-space parent of bus `i` (None for the root).
    pub fn parent_of(&self, i: usize) -> Option<usize> {
        (i > 0).then(|| self.parents[i - 1])
    }

    /// Is `b` in the subtree rooted at `top`, by walking parent links.
    pub fn in_subtree(&self, b: usize, top: usize) -> bool {
        let mut cur = Some(b);
        while let Some(c) = cur {
            if c == top {
                return true;
            }
            cur = self.parent_of(c);
        }
        false
    }
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()) || a == b
}

pub mod lbf_checks;

/// Voltage comparison relative to the feeder's voltage scale, so that deep
/// drops on heavily loaded random trees are not judged against a value near 0.
pub fn volt_close(a: f64, b: f64, v0: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(v0)
}
