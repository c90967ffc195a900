//! CSV and JSON writers.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use lbf_core::{AcSolution, ErrorReport, LbfSolution, NetworkCase, RadialTopology};
use serde::Serialize;

/// 12 significant digits in plain decimal notation.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (11 - exponent).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Collects every file a command writes so the manifest can list them.
pub struct OutputDir {
    dir: PathBuf,
    prefix: String,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn new(dir: &Path, prefix: String) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(OutputDir { dir: dir.to_path_buf(), prefix, written: Vec::new() })
    }

    pub fn path(&self, suffix: &str) -> PathBuf {
        self.dir.join(format!("{}_{suffix}", self.prefix))
    }

    pub fn csv(&mut self, suffix: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<PathBuf> {
        let path = self.path(suffix);
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush()?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn json<T: Serialize>(&mut self, suffix: &str, value: &T) -> Result<PathBuf> {
        let path = self.path(suffix);
        let text = serde_json::to_string_pretty(value)?;
        fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

pub fn lbf_bus_rows(case: &NetworkCase, sol: &LbfSolution) -> Vec<Vec<String>> {
    case.buses
        .iter()
        .zip(&sol.v)
        .map(|(b, v)| vec![b.id.to_string(), fmt_sig(*v)])
        .collect()
}

pub fn ac_bus_rows(case: &NetworkCase, sol: &AcSolution) -> Vec<Vec<String>> {
    case.buses
        .iter()
        .zip(&sol.v_complex)
        .map(|(b, v)| vec![b.id.to_string(), fmt_sig(v.norm()), fmt_sig(v.arg())])
        .collect()
}

/// In-service branches oriented parent→child, with the given per-branch flow.
pub fn branch_rows(case: &NetworkCase, topo: &RadialTopology, flow: &[f64]) -> Vec<Vec<String>> {
    case.in_service_branches()
        .map(|(k, _)| {
            let (p, c) = topo.endpoints(k).expect("in-service branch");
            vec![case.buses[p].id.to_string(), case.buses[c].id.to_string(), fmt_sig(flow[k])]
        })
        .collect()
}

pub const BUS_ERROR_HEADER: [&str; 4] = ["bus_id", "v_lbf", "v_ac", "voltage_error_pct"];
pub const BRANCH_ERROR_HEADER: [&str; 5] = ["branch_id", "f_lbf", "i_ac", "flow_error_pct", "defined"];

pub fn bus_error_rows(case: &NetworkCase, lbf: &LbfSolution, ac: &AcSolution, r: &ErrorReport) -> Vec<Vec<String>> {
    (0..case.buses.len())
        .map(|i| {
            vec![
                case.buses[i].id.to_string(),
                fmt_sig(lbf.v[i]),
                fmt_sig(ac.v_complex[i].norm()),
                fmt_sig(r.voltage_error[i]),
            ]
        })
        .collect()
}

/// One row per in-service branch; `branch_id` is the 1-based row in the case file.
pub fn branch_error_rows(case: &NetworkCase, lbf: &LbfSolution, ac: &AcSolution, r: &ErrorReport) -> Vec<Vec<String>> {
    case.in_service_branches()
        .map(|(k, _)| {
            vec![
                (k + 1).to_string(),
                fmt_sig(lbf.f[k]),
                fmt_sig(ac.i_mag[k]),
                r.flow_error[k].map(fmt_sig).unwrap_or_default(),
                r.flow_error_defined[k].to_string(),
            ]
        })
        .collect()
}
