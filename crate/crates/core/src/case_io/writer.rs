use std::fmt::Write;

use super::NetworkCase;

/// Writes the case back out as a struct-literal MATPOWER file in MW/MVAr.
///
/// Only the fields the model carries are meaningful; the remaining columns get
/// MATPOWER defaults. The slack voltage goes into the slack row's `Vm`.
pub fn write_matpower_case(case: &NetworkCase) -> String {
    let name = case
        .name
        .as_deref()
        .filter(|n| n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_'))
        .filter(|n| n.starts_with(|c: char| c.is_ascii_alphabetic()))
        .unwrap_or("network_case");
    let base = case.base_mva;
    let mut out = String::new();
    // writing into a String cannot fail
    let _ = writeln!(out, "function mpc = {name}");
    let _ = writeln!(out, "mpc.version = '2';");
    let _ = writeln!(out, "mpc.baseMVA = {base};");
    let _ = writeln!(out);
    let _ = writeln!(out, "%% bus data");
    let _ = writeln!(out, "%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin");
    let _ = writeln!(out, "mpc.bus = [");
    for bus in &case.buses {
        let (kind, vm) = if bus.id == case.slack_bus_id {
            (3, case.slack_voltage_pu)
        } else {
            (1, 1.0)
        };
        let _ = writeln!(
            out,
            "\t{}\t{kind}\t{}\t{}\t{}\t{}\t1\t{vm}\t0\t{}\t1\t1.1\t0.9;",
            bus.id,
            bus.p_load * base,
            bus.q_load * base,
            bus.g_shunt * base,
            bus.b_shunt * base,
            bus.base_kv,
        );
    }
    let _ = writeln!(out, "];");
    let _ = writeln!(out);
    let _ = writeln!(out, "%% branch data");
    let _ = writeln!(out, "%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus\tangmin\tangmax");
    let _ = writeln!(out, "mpc.branch = [");
    for br in &case.branches {
        let _ = writeln!(
            out,
            "\t{}\t{}\t{}\t{}\t0\t0\t0\t0\t0\t0\t{}\t-360\t360;",
            br.from_bus,
            br.to_bus,
            br.r,
            br.x,
            u8::from(br.in_service),
        );
    }
    let _ = writeln!(out, "];");
    out
}
