//! Shared setup for the criterion benches.

use lbf_core::{
    build_radial_topology, feeders, parse_matpower_case_with, NetworkCase, ParseOptions, RadialTopology,
};

/// Every embedded feeder at the reference slack voltage, with its topology.
pub fn feeders() -> Vec<(&'static str, NetworkCase, RadialTopology)> {
    feeders::ALL
        .iter()
        .map(|(name, src)| {
            let case = parse_matpower_case_with(src, &ParseOptions::reference_profile()).expect("embedded feeder");
            let topo = build_radial_topology(&case).expect("embedded feeder is radial");
            (*name, case, topo)
        })
        .collect()
}
