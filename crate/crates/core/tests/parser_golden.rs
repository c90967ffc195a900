mod common;

use std::fs;
use std::path::Path;

use common::rel_close;
use lbf_core::{
    build_radial_topology, feeders, parse_matpower_case, write_matpower_case, BusId, NetworkCase,
    ParseError, TopologyError, ValidationError,
};

/// Rows of a bracketed table, split on whitespace, read straight from the text.
fn raw_rows(src: &str, table: &str) -> Vec<Vec<f64>> {
    let start = src.find(&format!("mpc.{table} = [")).unwrap();
    let body = &src[start..];
    let body = &body[body.find('\n').unwrap() + 1..body.find("];").unwrap()];
    body.lines()
        .map(|l| l.split('%').next().unwrap().trim().trim_end_matches(';'))
        .filter(|l| !l.is_empty())
        .map(|l| l.split_whitespace().map(|t| t.parse().unwrap()).collect())
        .collect()
}

fn assert_structurally_equal(a: &NetworkCase, b: &NetworkCase) {
    assert_eq!(a.buses.len(), b.buses.len());
    assert_eq!(a.branches.len(), b.branches.len());
    assert_eq!(a.slack_bus_id, b.slack_bus_id);
    assert!(rel_close(a.base_mva, b.base_mva, 1e-15));
    assert!(rel_close(a.slack_voltage_pu, b.slack_voltage_pu, 1e-15));
    for (x, y) in a.buses.iter().zip(&b.buses) {
        assert_eq!(x.id, y.id);
        for (u, v) in [(x.p_load, y.p_load), (x.q_load, y.q_load), (x.g_shunt, y.g_shunt), (x.b_shunt, y.b_shunt)] {
            assert!(rel_close(u, v, 1e-12), "{u} vs {v}");
        }
    }
    for (x, y) in a.branches.iter().zip(&b.branches) {
        assert_eq!((x.from_bus, x.to_bus, x.in_service), (y.from_bus, y.to_bus, y.in_service));
        assert!(rel_close(x.r, y.r, 1e-12) && rel_close(x.x, y.x, 1e-12));
    }
}

#[test]
fn feeders_round_trip() {
    for (name, src) in feeders::ALL {
        let case = parse_matpower_case(src).unwrap();
        assert_eq!(case.name.as_deref(), Some(name));
        let again = parse_matpower_case(&write_matpower_case(&case)).unwrap();
        assert_structurally_equal(&case, &again);
        let thrice = parse_matpower_case(&write_matpower_case(&again)).unwrap();
        assert_structurally_equal(&again, &thrice);
    }
}

#[test]
fn feeder_sizes() {
    let expected = [("case33bw", 33, 37, 32), ("case69", 69, 68, 68), ("case141", 141, 140, 140)];
    for ((name, src), (n2, buses, branches, in_service)) in feeders::ALL.iter().zip(expected) {
        assert_eq!(*name, n2);
        let case = parse_matpower_case(src).unwrap();
        assert_eq!(case.buses.len(), buses, "{name}");
        assert_eq!(case.branches.len(), branches, "{name}");
        assert_eq!(case.in_service_branches().count(), in_service, "{name}");
        assert_eq!(case.slack_bus_id, BusId(1), "{name}");
        assert_eq!(case.base_mva, 10.0);
        build_radial_topology(&case).unwrap();
    }
}

#[test]
fn per_unit_conversion_matches_source_rows() {
    for (name, src) in feeders::ALL {
        let case = parse_matpower_case(src).unwrap();
        let rows = raw_rows(src, "bus");
        assert_eq!(rows.len(), case.buses.len());
        for (row, bus) in rows.iter().zip(&case.buses) {
            let (p_mw, q_mvar) = if name == "case141" {
                let s = row[2] / 1e3;
                (s * 0.85, s * 0.85f64.acos().sin())
            } else {
                (row[2] / 1e3, row[3] / 1e3)
            };
            assert_eq!(bus.id, BusId(row[0] as u32));
            assert!(rel_close(bus.p_load * case.base_mva, p_mw, 1e-12), "{name} bus {}", bus.id);
            assert!(rel_close(bus.q_load * case.base_mva, q_mvar, 1e-12), "{name} bus {}", bus.id);
        }
        let z_base = (rows[0][9] * 1e3).powi(2) / (case.base_mva * 1e6);
        for (row, br) in raw_rows(src, "branch").iter().zip(&case.branches) {
            assert!(rel_close(br.r, row[2] / z_base, 1e-12));
            assert!(rel_close(br.x, row[3] / z_base, 1e-12));
            assert_eq!(br.in_service, row[10] != 0.0);
            let z2 = br.r * br.r + br.x * br.x;
            assert!(rel_close(br.z_abs() * br.z_abs(), z2, 1e-15));
        }
    }
}

#[test]
fn published_33_bus_totals() {
    let case = parse_matpower_case(feeders::CASE33BW).unwrap();
    let (p, q) = case.total_load();
    assert!(rel_close(p * case.base_mva, 3.715, 1e-12));
    assert!(rel_close(q * case.base_mva, 2.3, 1e-12));
}

#[test]
fn main_trunk_depth_of_33_bus_feeder() {
    // Trunk 1-2-...-18 is 17 hops; the laterals at 19-22, 23-25 and 26-33 are shallower.
    let case = parse_matpower_case(feeders::CASE33BW).unwrap();
    let topo = build_radial_topology(&case).unwrap();
    let b18 = topo.index_of(BusId(18)).unwrap();
    assert_eq!(topo.depth[b18], 17);
    assert_eq!(topo.max_depth(), 17);
    assert_eq!(topo.depth[topo.index_of(BusId(33)).unwrap()], 13);
    assert_eq!(topo.depth[topo.index_of(BusId(22)).unwrap()], 5);
}

fn corpus(name: &str) -> Result<NetworkCase, ParseError> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/malformed").join(format!("{name}.m"));
    parse_matpower_case(&fs::read_to_string(path).unwrap())
}

#[test]
fn malformed_corpus() {
    use ParseError as P;
    use ValidationError as V;
    let cases: Vec<(&str, fn(&ParseError) -> bool)> = vec![
        ("ragged_row", |e| matches!(e, P::RaggedRow { line: 6, found: 4, expected: 13 })),
        ("unterminated_matrix", |e| matches!(e, P::Syntax { .. })),
        ("unknown_identifier", |e| matches!(e, P::UnknownIdentifier { name, .. } if name == "kVA")),
        ("unsupported_statement", |e| matches!(e, P::Unsupported { line: 11, .. })),
        ("missing_base_mva", |e| matches!(e, P::Missing("baseMVA"))),
        ("missing_branch", |e| matches!(e, P::Missing("branch"))),
        ("empty_bus_table", |e| matches!(e, P::EmptyTable { table, .. } if table == "bus")),
        ("too_few_columns", |e| matches!(e, P::TooFewColumns { found: 5, .. })),
        ("fractional_bus_id", |e| matches!(e, P::BadInteger { value, .. } if *value == 2.5)),
        ("no_slack", |e| matches!(e, P::Invalid(V::NoSlack))),
        ("two_slacks", |e| matches!(e, P::Invalid(V::MultipleSlack(ids)) if ids == &[BusId(1), BusId(2)])),
        ("duplicate_bus", |e| matches!(e, P::Invalid(V::DuplicateBus(BusId(2))))),
        ("unknown_branch_bus", |e| matches!(e, P::Invalid(V::UnknownBus { branch: 1, bus: BusId(7) }))),
        ("self_loop", |e| matches!(e, P::Invalid(V::SelfLoop { branch: 2, .. }))),
        ("negative_resistance", |e| matches!(e, P::Invalid(V::NegativeResistance { branch: 1, .. }))),
        ("zero_impedance", |e| matches!(e, P::Invalid(V::ZeroImpedance { branch: 1 }))),
        ("zero_base_mva", |e| matches!(e, P::Invalid(V::BaseMva(_)))),
    ];
    assert!(cases.len() >= 10);
    for (name, check) in cases {
        let err = corpus(name).expect_err(name);
        assert!(check(&err), "{name}: unexpected {err:?}");
        assert!(!err.to_string().is_empty());
    }
}

#[test]
fn topology_corpus() {
    let meshed = corpus("meshed_network").unwrap();
    assert_eq!(
        build_radial_topology(&meshed),
        Err(TopologyError::NotRadial(vec![(BusId(2), BusId(3))]))
    );
    let islanded = corpus("islanded_bus").unwrap();
    assert_eq!(build_radial_topology(&islanded), Err(TopologyError::Disconnected(vec![BusId(3)])));
}
