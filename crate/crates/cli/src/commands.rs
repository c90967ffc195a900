use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};

use lbf_core::analysis::sweep_point_case;
use lbf_core::{
    build_radial_topology, check_bounds, compare as compare_solutions, feeders, load_sweep_config,
    parse_matpower_case_with, run_sweep_with, solve_ac_sweep_with, solve_lbf, AcOptions, BusId,
    ErrorReport, NetworkCase, ParseOptions, RadialTopology, SweepOptions, TimingOptions,
    TimingReport, REFERENCE_SLACK_VOLTAGE_PU,
};
use serde::Serialize;

use crate::failure::Failure;
use crate::output::{self, OutputDir, BRANCH_ERROR_HEADER, BUS_ERROR_HEADER};
use crate::{AcArgs, BenchArgs, CaseArgs, CompareArgs, Model, SolveArgs, SweepArgs};

const PROFILE_TOL: f64 = 1e-10;
const PROFILE_SCALINGS: [f64; 2] = [1.0, 1.08];

struct Loaded {
    case: NetworkCase,
    topo: RadialTopology,
    /// File stem or builtin name, used to prefix output files.
    stem: String,
    source: String,
}

fn load(args: &CaseArgs) -> Result<Loaded, Failure> {
    let slack = if args.reference_profile { Some(REFERENCE_SLACK_VOLTAGE_PU) } else { args.slack_voltage };
    let opts = ParseOptions { slack_voltage_pu: slack };
    let (text, stem, origin) = match args.case.strip_prefix("builtin:") {
        Some(name) => {
            let text = feeders::by_name(name)
                .ok_or_else(|| Failure::Usage(format!("unknown builtin feeder '{name}'")))?;
            (text.to_string(), name.to_string(), None)
        }
        None => {
            let path = PathBuf::from(&args.case);
            let text = read(&path)?;
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "case".into());
            (text, stem, Some(path))
        }
    };
    let case = parse_matpower_case_with(&text, &opts).map_err(|e| Failure::core(origin.clone(), e))?;
    let topo = build_radial_topology(&case).map_err(|e| Failure::core(origin, e))?;
    Ok(Loaded { case, topo, stem, source: args.case.clone() })
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| match e.kind() {
        ErrorKind::NotFound => Failure::FileNotFound(path.to_path_buf()),
        _ => Failure::Read(path.to_path_buf(), e),
    })
}

fn ac_options(args: &AcArgs, profile: bool) -> AcOptions {
    AcOptions { tol: if profile { PROFILE_TOL } else { args.tol }, max_iter: args.max_iter, damping: args.damping }
}

fn check_profile_scaling(profile: bool, a: f64) -> Result<(), Failure> {
    if profile && !PROFILE_SCALINGS.contains(&a) {
        return Err(Failure::Usage(format!("--reference-profile allows a = 1.0 or 1.08, got {a}")));
    }
    Ok(())
}

#[derive(Serialize, Default)]
struct Parameters {
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
    tol: f64,
    max_iter: usize,
    damping: f64,
    slack_voltage_pu: f64,
    reference_profile: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    flow_floor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep_config: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scenarios: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    multiplier_band: Option<(f64, f64)>,
}

impl Parameters {
    fn new(loaded: &Loaded, ac: &AcOptions, profile: bool) -> Self {
        Parameters {
            tol: ac.tol,
            max_iter: ac.max_iter,
            damping: ac.damping,
            slack_voltage_pu: loaded.case.slack_voltage_pu,
            reference_profile: profile,
            ..Parameters::default()
        }
    }
}

#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'static str,
    case_path: &'a str,
    parameters: Parameters,
    outputs: Vec<String>,
    tool_version: &'static str,
    timestamp: String,
}

fn finish(command: &'static str, loaded: &Loaded, parameters: Parameters, mut out: OutputDir) -> Result<(), Failure> {
    let outputs = out.written().iter().map(|p| p.display().to_string()).collect();
    let manifest = RunManifest {
        command,
        case_path: &loaded.source,
        parameters,
        outputs,
        tool_version: env!("CARGO_PKG_VERSION"),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    };
    let path = out.json("manifest.json", &manifest)?;
    println!("manifest {}", path.display());
    Ok(())
}

pub fn solve(args: &SolveArgs) -> Result<(), Failure> {
    let profile = args.case.reference_profile;
    check_profile_scaling(profile, args.a)?;
    let loaded = load(&args.case)?;
    let ac_opts = ac_options(&args.ac, profile);
    let (case, topo) = (&loaded.case, &loaded.topo);
    let model_name = match args.model {
        Model::Lbf => "lbf",
        Model::Ac => "ac",
    };
    let mut out = OutputDir::new(&args.case.out, format!("{}_{model_name}", loaded.stem))?;
    let mut params = Parameters::new(&loaded, &ac_opts, profile);
    params.model = Some(model_name);

    match args.model {
        Model::Lbf => {
            let sol = solve_lbf(topo, case, args.a).map_err(|e| Failure::core(None, e))?;
            params.a = Some(args.a);
            out.csv("bus.csv", &["bus_id", "v_pu"], output::lbf_bus_rows(case, &sol))?;
            out.csv("branch.csv", &["from", "to", "flow"], output::branch_rows(case, topo, &sol.f))?;
            println!("lbf: {} buses, min |V| {:.6} p.u.", sol.v.len(), sol.v.iter().copied().fold(f64::INFINITY, f64::min));
        }
        Model::Ac => {
            let sol = solve_ac_sweep_with(topo, case, &ac_opts).map_err(|e| Failure::core(None, e))?;
            out.csv("bus.csv", &["bus_id", "v_pu", "v_angle_rad"], output::ac_bus_rows(case, &sol))?;
            out.csv("branch.csv", &["from", "to", "flow"], output::branch_rows(case, topo, &sol.i_mag))?;
            println!("ac: converged in {} iterations, residual {:.2e}", sol.iterations, sol.max_residual);
        }
    }
    finish("solve", &loaded, params, out)
}

#[derive(Serialize)]
struct CompareSummary {
    case: String,
    a: f64,
    tol: f64,
    flow_floor: f64,
    slack_voltage_pu: f64,
    bus_count: usize,
    branch_count: usize,
    defined_flow_count: usize,
    avg_abs_voltage_error: f64,
    avg_abs_flow_error: f64,
    max_abs_voltage_error: f64,
    max_abs_flow_error: f64,
    all_voltage_errors_nonpositive: bool,
    all_flow_errors_nonnegative: bool,
    /// Bus ids with positive voltage error.
    voltage_violations: Vec<BusId>,
    /// 1-based branch rows with negative flow error.
    flow_violations: Vec<usize>,
    ac_iterations: usize,
    ac_max_residual: f64,
    bus_errors_csv: String,
    branch_errors_csv: String,
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn max_abs<'a>(values: impl Iterator<Item = &'a f64>) -> f64 {
    values.fold(0.0, |m, v| m.max(v.abs()))
}

pub fn compare(args: &CompareArgs) -> Result<(), Failure> {
    let profile = args.case.reference_profile;
    let scalings: Vec<f64> = match (args.a, profile) {
        (Some(a), _) => vec![a],
        (None, true) => PROFILE_SCALINGS.to_vec(),
        (None, false) => vec![1.0],
    };
    for &a in &scalings {
        check_profile_scaling(profile, a)?;
    }
    let loaded = load(&args.case)?;
    let ac_opts = ac_options(&args.ac, profile);
    let (case, topo) = (&loaded.case, &loaded.topo);
    let ac = solve_ac_sweep_with(topo, case, &ac_opts).map_err(|e| Failure::core(None, e))?;

    for a in scalings {
        let lbf = solve_lbf(topo, case, a).map_err(|e| Failure::core(None, e))?;
        let report: ErrorReport =
            compare_solutions(&lbf, &ac, args.flow_floor).map_err(|e| Failure::core(None, e))?;
        let bounds = check_bounds(&report, a);
        let mut out = OutputDir::new(&args.case.out, format!("{}_compare_a{a}", loaded.stem))?;
        let bus_csv = out.csv("bus_errors.csv", &BUS_ERROR_HEADER, output::bus_error_rows(case, &lbf, &ac, &report))?;
        let branch_csv =
            out.csv("branch_errors.csv", &BRANCH_ERROR_HEADER, output::branch_error_rows(case, &lbf, &ac, &report))?;
        let summary = CompareSummary {
            case: loaded.source.clone(),
            a,
            tol: ac_opts.tol,
            flow_floor: args.flow_floor,
            slack_voltage_pu: case.slack_voltage_pu,
            bus_count: case.buses.len(),
            branch_count: case.in_service_branches().count(),
            defined_flow_count: report.flow_error_defined.iter().filter(|d| **d).count(),
            avg_abs_voltage_error: report.avg_abs_voltage_error,
            avg_abs_flow_error: report.avg_abs_flow_error,
            max_abs_voltage_error: max_abs(report.voltage_error.iter()),
            max_abs_flow_error: max_abs(report.flow_error.iter().flatten()),
            all_voltage_errors_nonpositive: bounds.all_voltage_errors_nonpositive,
            all_flow_errors_nonnegative: bounds.all_flow_errors_nonnegative,
            voltage_violations: bounds.voltage_violations.iter().map(|&i| case.buses[i].id).collect(),
            flow_violations: bounds.flow_violations.iter().map(|&k| k + 1).collect(),
            ac_iterations: ac.iterations,
            ac_max_residual: ac.max_residual,
            bus_errors_csv: file_name(&bus_csv),
            branch_errors_csv: file_name(&branch_csv),
        };
        out.json("summary.json", &summary)?;
        println!(
            "a = {a}: avg |voltage error| {:.4}%, avg |flow error| {:.4}%, bounds hold: {}",
            summary.avg_abs_voltage_error,
            summary.avg_abs_flow_error,
            summary.all_voltage_errors_nonpositive && summary.all_flow_errors_nonnegative
        );
        let mut params = Parameters::new(&loaded, &ac_opts, profile);
        params.a = Some(a);
        params.flow_floor = Some(args.flow_floor);
        finish("compare", &loaded, params, out)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepPointSummary {
    value: f64,
    converged: bool,
    failure: Option<String>,
    avg_abs_voltage_error: Option<f64>,
    avg_abs_flow_error: Option<f64>,
    bus_errors_csv: Option<String>,
    branch_errors_csv: Option<String>,
}

#[derive(Serialize)]
struct SweepSummary {
    case: String,
    target: String,
    ids: Vec<BusId>,
    values: Vec<f64>,
    a: f64,
    focus_ids: Vec<BusId>,
    /// 1-based branch rows feeding the focus buses.
    focus_branches: Vec<usize>,
    points: Vec<SweepPointSummary>,
    focus_csv: String,
}

pub fn sweep(args: &SweepArgs) -> Result<(), Failure> {
    let profile = args.case.reference_profile;
    let cfg_text = read(&args.config)?;
    let cfg = load_sweep_config(&cfg_text).map_err(|e| Failure::core(args.config.clone(), e))?;
    check_profile_scaling(profile, cfg.scaling_a)?;
    let loaded = load(&args.case)?;
    let ac_opts = ac_options(&args.ac, profile);
    let opts = SweepOptions { ac: ac_opts, flow_floor: args.flow_floor };
    let series = run_sweep_with(&loaded.case, &cfg, &opts).map_err(|e| Failure::core(None, e))?;

    let mut out = OutputDir::new(&args.case.out, format!("{}_sweep_{}", loaded.stem, cfg.target))?;
    let mut points = Vec::new();
    for (i, point) in series.per_value_reports.iter().enumerate() {
        let mut summary = SweepPointSummary {
            value: point.value,
            converged: point.report.is_some(),
            failure: point.failure.clone(),
            avg_abs_voltage_error: None,
            avg_abs_flow_error: None,
            bus_errors_csv: None,
            branch_errors_csv: None,
        };
        if let Some(report) = &point.report {
            let scenario = scenario_solutions(&loaded, &cfg, point.value, &ac_opts)?;
            let (lbf, ac) = (&scenario.1, &scenario.2);
            let bus = out.csv(
                &format!("p{i}_bus_errors.csv"),
                &BUS_ERROR_HEADER,
                output::bus_error_rows(&scenario.0, lbf, ac, report),
            )?;
            let branch = out.csv(
                &format!("p{i}_branch_errors.csv"),
                &BRANCH_ERROR_HEADER,
                output::branch_error_rows(&scenario.0, lbf, ac, report),
            )?;
            summary.avg_abs_voltage_error = Some(report.avg_abs_voltage_error);
            summary.avg_abs_flow_error = Some(report.avg_abs_flow_error);
            summary.bus_errors_csv = Some(file_name(&bus));
            summary.branch_errors_csv = Some(file_name(&branch));
        }
        points.push(summary);
    }

    let mut focus_rows = Vec::new();
    for (point, row) in series.per_value_reports.iter().zip(&series.focus_series) {
        for (id, err) in series.focus_ids.iter().zip(row) {
            focus_rows.push(vec![output::fmt_sig(point.value), id.to_string(), err.map(output::fmt_sig).unwrap_or_default()]);
        }
    }
    let focus_csv = out.csv("focus.csv", &["parameter_value", "element_id", "error_pct"], focus_rows)?;

    let failed = series.failed_points();
    let summary = SweepSummary {
        case: loaded.source.clone(),
        target: cfg.target.to_string(),
        ids: cfg.node_or_branch_ids.clone(),
        values: cfg.values.clone(),
        a: cfg.scaling_a,
        focus_ids: series.focus_ids.clone(),
        focus_branches: series.focus_branches.iter().map(|k| k + 1).collect(),
        points,
        focus_csv: file_name(&focus_csv),
    };
    out.json("summary.json", &summary)?;
    println!("{}: {} points, {failed} failed", cfg.target, series.per_value_reports.len());

    let mut params = Parameters::new(&loaded, &ac_opts, profile);
    params.a = Some(cfg.scaling_a);
    params.flow_floor = Some(args.flow_floor);
    params.sweep_config = Some(args.config.display().to_string());
    finish("sweep", &loaded, params, out)?;
    if failed == series.per_value_reports.len() {
        return Err(Failure::SweepFailed(failed));
    }
    Ok(())
}

/// Both solutions for the transformed case of one sweep point.
fn scenario_solutions(
    loaded: &Loaded,
    cfg: &lbf_core::SweepConfig,
    value: f64,
    ac_opts: &AcOptions,
) -> Result<(NetworkCase, lbf_core::LbfSolution, lbf_core::AcSolution), Failure> {
    let topo = &loaded.topo;
    let case = sweep_point_case(&loaded.case, topo, cfg, value).map_err(|e| Failure::core(None, e))?;
    let lbf = solve_lbf(topo, &case, cfg.scaling_a).map_err(|e| Failure::core(None, e))?;
    let ac = solve_ac_sweep_with(topo, &case, ac_opts).map_err(|e| Failure::core(None, e))?;
    Ok((case, lbf, ac))
}

#[derive(Serialize)]
struct BenchOutput<'a> {
    case: &'a str,
    bus_count: usize,
    a: f64,
    tol: f64,
    multiplier_band: (f64, f64),
    #[serde(flatten)]
    report: TimingReport,
}

pub fn bench(args: &BenchArgs) -> Result<(), Failure> {
    let profile = args.case.reference_profile;
    check_profile_scaling(profile, args.a)?;
    let loaded = load(&args.case)?;
    let ac_opts = ac_options(&args.ac, profile);
    let opts = TimingOptions { threads: args.threads as usize, a: args.a, ac: ac_opts, ..TimingOptions::default() };
    let report = lbf_core::batch_timing_with(&loaded.case, args.scenarios as usize, args.seed, &opts)
        .map_err(|e| Failure::core(None, e))?;
    let mut out = OutputDir::new(&args.case.out, format!("{}_bench", loaded.stem))?;
    println!(
        "{} scenarios: lbf {:.6} s, ac {:.6} s, {} failed",
        report.scenario_count,
        report.lbf_seconds,
        report.ac_seconds,
        report.failed_scenarios.len()
    );
    for (i, reason) in &report.failed_scenarios {
        eprintln!("lbf: scenario {i} excluded from AC timing: {reason}");
    }
    let body = BenchOutput {
        case: &loaded.source,
        bus_count: loaded.case.buses.len(),
        a: args.a,
        tol: ac_opts.tol,
        multiplier_band: opts.multiplier_band,
        report,
    };
    out.json("timing.json", &body)?;
    let mut params = Parameters::new(&loaded, &ac_opts, profile);
    params.a = Some(args.a);
    params.scenarios = Some(args.scenarios as usize);
    params.seed = Some(args.seed);
    params.threads = Some(args.threads as usize);
    params.multiplier_band = Some(opts.multiplier_band);
    finish("bench", &loaded, params, out)
}
