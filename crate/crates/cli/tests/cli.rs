use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn lbf(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lbf"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env_remove("LBF_OUT_DIR")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn corpus(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/data/malformed")
        .join(name)
        .display()
        .to_string()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_lbf_row_counts_and_headers() {
    let dir = TempDir::new().unwrap();
    let o = lbf(dir.path(), &["solve", "--case", "builtin:case33bw", "--model", "lbf", "--a", "1.0"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (h, rows) = read_csv(&dir.path().join("case33bw_lbf_bus.csv"));
    assert_eq!(h, ["bus_id", "v_pu"]);
    assert_eq!(rows.len(), 33);
    let (h, rows) = read_csv(&dir.path().join("case33bw_lbf_branch.csv"));
    assert_eq!(h, ["from", "to", "flow"]);
    assert_eq!(rows.len(), 32);
}

#[test]
fn solve_ac_has_angles_and_reference_voltages() {
    let dir = TempDir::new().unwrap();
    let o = lbf(dir.path(), &["solve", "--case", "builtin:case33bw", "--model", "ac", "--reference-profile"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (h, rows) = read_csv(&dir.path().join("case33bw_ac_bus.csv"));
    assert_eq!(h, ["bus_id", "v_pu", "v_angle_rad"]);
    assert_eq!(rows[0], ["1", "1.05000000000", "0"]);
    let v18: f64 = rows[17][1].parse().unwrap();
    assert!((v18 - 0.967881227743).abs() < 1e-6);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();

    let o = lbf(d, &["solve", "--case", "missing.m", "--model", "ac"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("file not found"));

    let o = lbf(d, &["solve", "--case", &corpus("meshed_network.m"), "--model", "lbf"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("network not radial"));

    let o = lbf(d, &["solve", "--case", &corpus("ragged_row.m")]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 6"));

    let o = lbf(d, &["solve", "--case", &corpus("no_slack.m")]);
    assert_eq!(code(&o), 3);

    let o = lbf(d, &["solve", "--case", "builtin:case69", "--model", "ac", "--max-iter", "2"]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("did not converge"));

    let o = lbf(d, &["solve", "--case", "builtin:case33bw", "--a", "-1"]);
    assert_eq!(code(&o), 2);

    let o = lbf(d, &["bench", "--case", "builtin:case33bw", "--scenarios", "0"]);
    assert_eq!(code(&o), 2);

    let o = lbf(d, &["compare", "--case", "builtin:case33bw", "--reference-profile", "--a", "0.9"]);
    assert_eq!(code(&o), 2);

    let o = lbf(d, &["compare", "--case", "builtin:case33bw", "--reference-profile", "--tol", "1e-6"]);
    assert_eq!(code(&o), 2);

    let o = lbf(d, &["solve", "--case", "builtin:case7"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn compare_signed_bounds_at_mlbf_scaling() {
    let dir = TempDir::new().unwrap();
    let o = lbf(dir.path(), &["compare", "--case", "builtin:case33bw", "--reference-profile", "--a", "1.08"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = json(&dir.path().join("case33bw_compare_a1.08_summary.json"));
    assert_eq!(s["all_voltage_errors_nonpositive"], true);
    assert_eq!(s["all_flow_errors_nonnegative"], true);
    assert_eq!(s["bus_count"], 33);
    let (h, rows) = read_csv(&dir.path().join("case33bw_compare_a1.08_bus_errors.csv"));
    assert_eq!(h, ["bus_id", "v_lbf", "v_ac", "voltage_error_pct"]);
    assert!(rows.iter().all(|r| r[3].parse::<f64>().unwrap() <= 0.0));
    let (h, rows) = read_csv(&dir.path().join("case33bw_compare_a1.08_branch_errors.csv"));
    assert_eq!(h, ["branch_id", "f_lbf", "i_ac", "flow_error_pct", "defined"]);
    assert_eq!(rows.len(), 32);
    assert!(rows.iter().all(|r| r[4] == "true" && r[3].parse::<f64>().unwrap() >= 0.0));
}

#[test]
fn reference_profile_compare_emits_both_scalings() {
    let dir = TempDir::new().unwrap();
    let o = lbf(dir.path(), &["compare", "--case", "builtin:case33bw", "--reference-profile"]);
    assert_eq!(code(&o), 0);
    for a in ["1", "1.08"] {
        let s = json(&dir.path().join(format!("case33bw_compare_a{a}_summary.json")));
        assert_eq!(s["slack_voltage_pu"], 1.05);
        assert_eq!(s["tol"], 1e-10);
    }
}

#[test]
fn compare_69_bus_has_negative_flow_errors() {
    let dir = TempDir::new().unwrap();
    let o = lbf(dir.path(), &["compare", "--case", "builtin:case69", "--reference-profile", "--a", "1.0"]);
    assert_eq!(code(&o), 0);
    let s = json(&dir.path().join("case69_compare_a1_summary.json"));
    assert_eq!(s["all_flow_errors_nonnegative"], false);
    assert!(!s["flow_violations"].as_array().unwrap().is_empty());
}

#[test]
fn compare_zero_load_case() {
    let dir = TempDir::new().unwrap();
    let case = dir.path().join("flat.m");
    fs::write(
        &case,
        "function mpc = flat\nmpc.baseMVA = 1;\nmpc.bus = [\n1 3 0 0 0 0 1 1.02 0 11 1 1.1 0.9;\n2 1 0 0 0 0 1 1 0 11 1 1.1 0.9;\n3 1 0 0 0 0 1 1 0 11 1 1.1 0.9;\n];\nmpc.branch = [\n1 2 0.01 0.02 0 0 0 0 0 0 1 -360 360;\n2 3 0.01 0.02 0 0 0 0 0 0 1 -360 360;\n];\n",
    )
    .unwrap();
    let o = lbf(dir.path(), &["compare", "--case", case.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = json(&dir.path().join("flat_compare_a1_summary.json"));
    assert_eq!(s["avg_abs_voltage_error"], 0.0);
    assert_eq!(s["avg_abs_flow_error"], 0.0);
    assert_eq!(s["defined_flow_count"], 0);
    assert_eq!(s["slack_voltage_pu"], 1.02);
    let (_, rows) = read_csv(&dir.path().join("flat_compare_a1_branch_errors.csv"));
    assert!(rows.iter().all(|r| r[3].is_empty() && r[4] == "false"));
}

#[test]
fn sweep_load_level_focus_series() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("load.cfg");
    fs::write(&cfg, "target=load_level\nids=30\nvalues=1.0,1.2,1.4,1.6\nfocus=25,26,27,28,29\n").unwrap();
    let o = lbf(dir.path(), &["sweep", "--case", "builtin:case33bw", "--config", cfg.to_str().unwrap(), "--reference-profile"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (h, rows) = read_csv(&dir.path().join("case33bw_sweep_load_level_focus.csv"));
    assert_eq!(h, ["parameter_value", "element_id", "error_pct"]);
    assert_eq!(rows.len(), 20);
    let mut traces: HashMap<String, Vec<f64>> = HashMap::new();
    for r in &rows {
        traces.entry(r[1].clone()).or_default().push(r[2].parse().unwrap());
    }
    assert_eq!(traces.len(), 5);
    for t in traces.values() {
        assert!(t.windows(2).all(|w| w[1] < w[0]), "{t:?}");
    }
    for i in 0..4 {
        let (_, rows) = read_csv(&dir.path().join(format!("case33bw_sweep_load_level_p{i}_branch_errors.csv")));
        assert_eq!(rows.len(), 32);
    }
}

#[test]
fn sweep_errors() {
    let dir = TempDir::new().unwrap();
    let empty = dir.path().join("empty.cfg");
    fs::write(&empty, "").unwrap();
    let o = lbf(dir.path(), &["sweep", "--case", "builtin:case33bw", "--config", empty.to_str().unwrap()]);
    assert_eq!(code(&o), 2);

    let o = lbf(dir.path(), &["sweep", "--case", "builtin:case33bw", "--config", "absent.cfg"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("file not found"));

    let heavy = dir.path().join("heavy.cfg");
    fs::write(&heavy, "target=load_level ids=18 values=500,1000").unwrap();
    let o = lbf(dir.path(), &["sweep", "--case", "builtin:case33bw", "--config", heavy.to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    let s = json(&dir.path().join("case33bw_sweep_load_level_summary.json"));
    assert!(s["points"].as_array().unwrap().iter().all(|p| p["converged"] == false));
}

#[test]
fn bench_is_deterministic_apart_from_timing() {
    let dir = TempDir::new().unwrap();
    let strip = |mut v: Value| {
        let m = v.as_object_mut().unwrap();
        assert!(m.remove("lbf_seconds").unwrap().as_f64().unwrap() > 0.0);
        assert!(m.remove("ac_seconds").unwrap().as_f64().unwrap() > 0.0);
        v
    };
    let args = ["bench", "--case", "builtin:case33bw", "--scenarios", "100", "--seed", "7", "--threads", "1"];
    assert_eq!(code(&lbf(dir.path(), &args)), 0);
    let first = json(&dir.path().join("case33bw_bench_timing.json"));
    assert_eq!(code(&lbf(dir.path(), &args)), 0);
    let second = json(&dir.path().join("case33bw_bench_timing.json"));
    assert!(first["lbf_seconds"].as_f64() < first["ac_seconds"].as_f64());
    assert_eq!(first["scenario_count"], 100);
    assert_eq!(first["failed_scenarios"].as_array().unwrap().len(), 0);
    assert_eq!(strip(first), strip(second));

    let o = lbf(dir.path(), &["bench", "--case", "builtin:case33bw", "--scenarios", "10", "--threads", "2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&dir.path().join("case33bw_bench_timing.json"))["threads"], 2);
}

#[test]
fn every_output_is_listed_by_exactly_one_manifest() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let cfg = d.join("pq.cfg");
    fs::write(&cfg, "target=pq_ratio ids=30 values=0.25,0.5,1,2 focus=25,26").unwrap();
    let runs: [&[&str]; 4] = [
        &["solve", "--case", "builtin:case69", "--model", "ac"],
        &["compare", "--case", "builtin:case33bw", "--reference-profile"],
        &["sweep", "--case", "builtin:case33bw", "--config", cfg.to_str().unwrap()],
        &["bench", "--case", "builtin:case33bw", "--scenarios", "3"],
    ];
    for args in runs {
        assert_eq!(code(&lbf(d, args)), 0);
    }

    let mut listed: HashMap<PathBuf, usize> = HashMap::new();
    let mut data_files = Vec::new();
    for entry in fs::read_dir(d).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        if name.ends_with("_manifest.json") {
            let m = json(&path);
            assert_eq!(m["tool_version"], env!("CARGO_PKG_VERSION"));
            assert!(m["timestamp"].as_str().unwrap().ends_with('Z'));
            assert!(m["parameters"]["tol"].is_number());
            for out in m["outputs"].as_array().unwrap() {
                let p = PathBuf::from(out.as_str().unwrap());
                *listed.entry(fs::canonicalize(p).unwrap()).or_default() += 1;
            }
        } else if name.ends_with(".csv") || name.ends_with(".json") {
            data_files.push(fs::canonicalize(&path).unwrap());
        }
    }
    assert!(!data_files.is_empty());
    for f in &data_files {
        assert_eq!(listed.get(f), Some(&1), "{}", f.display());
    }
    assert_eq!(listed.len(), data_files.len());
}

#[test]
fn output_dir_from_environment() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_lbf"))
        .args(["solve", "--case", "builtin:case141"])
        .env("LBF_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let (_, rows) = read_csv(&dir.path().join("case141_lbf_bus.csv"));
    assert_eq!(rows.len(), 141);
}

#[test]
fn data_outputs_are_byte_identical_across_runs() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for d in [a.path(), b.path()] {
        assert_eq!(code(&lbf(d, &["compare", "--case", "builtin:case69", "--a", "1.08"])), 0);
    }
    for f in ["case69_compare_a1.08_bus_errors.csv", "case69_compare_a1.08_branch_errors.csv", "case69_compare_a1.08_summary.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}
