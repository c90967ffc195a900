//! Network case model, MATPOWER case reader/writer and sweep configuration.
//!
//! All quantities in a [`NetworkCase`] are per-unit on the system MVA base.
//! Loads are signed: a negative `q_load` is reactive support (a compensator).
//! Shunts are carried separately in `g_shunt` / `b_shunt`, using the MATPOWER
//! sign convention (positive `b_shunt` injects reactive power).

mod matpower;
mod sweep_config;
mod writer;

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub use matpower::{parse_matpower_case, parse_matpower_case_with, ParseError, ParseOptions};
pub use sweep_config::{load_sweep_config, ConfigError, SweepConfig, SweepTarget};
pub use writer::write_matpower_case;

/// Slack voltage magnitude used by the reference study profile.
pub const REFERENCE_SLACK_VOLTAGE_PU: f64 = 1.05;

/// External bus number as it appears in the case file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct BusId(pub u32);

impl fmt::Display for BusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BusRecord {
    pub id: BusId,
    /// Active load, p.u.
    pub p_load: f64,
    /// Reactive load, p.u. Negative values model compensation.
    pub q_load: f64,
    /// Shunt conductance at 1 p.u. voltage, p.u.
    pub g_shunt: f64,
    /// Shunt susceptance at 1 p.u. voltage, p.u.
    pub b_shunt: f64,
    /// Voltage base, kV.
    pub base_kv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchRecord {
    pub from_bus: BusId,
    pub to_bus: BusId,
    /// Series resistance, p.u.
    pub r: f64,
    /// Series reactance, p.u.
    pub x: f64,
    pub in_service: bool,
}

impl BranchRecord {
    /// `|Z| = sqrt(r² + x²)`.
    pub fn z_abs(&self) -> f64 {
        self.r.hypot(self.x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkCase {
    pub name: Option<String>,
    pub base_mva: f64,
    pub buses: Vec<BusRecord>,
    /// Every branch of the file, in file order, including out-of-service ones.
    pub branches: Vec<BranchRecord>,
    pub slack_bus_id: BusId,
    pub slack_voltage_pu: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("baseMVA must be positive and finite, got {0}")]
    BaseMva(f64),
    #[error("no slack (reference) bus")]
    NoSlack,
    #[error("multiple slack buses: {0:?}")]
    MultipleSlack(Vec<BusId>),
    #[error("slack bus {0} is not in the bus table")]
    UnknownSlack(BusId),
    #[error("slack voltage must be positive and finite, got {0}")]
    SlackVoltage(f64),
    #[error("duplicate bus id {0}")]
    DuplicateBus(BusId),
    #[error("branch {branch} references unknown bus {bus}")]
    UnknownBus { branch: usize, bus: BusId },
    #[error("branch {branch} connects bus {bus} to itself")]
    SelfLoop { branch: usize, bus: BusId },
    #[error("branch {branch} has negative resistance {r}")]
    NegativeResistance { branch: usize, r: f64 },
    #[error("in-service branch {branch} has zero impedance")]
    ZeroImpedance { branch: usize },
    #[error("non-finite value in {0}")]
    NonFinite(String),
}

impl NetworkCase {
    /// Checks the model invariants. Branch numbers in errors are 1-based file rows.
    pub fn validate(&self) -> Result<(), ValidationError> {
        if !(self.base_mva.is_finite() && self.base_mva > 0.0) {
            return Err(ValidationError::BaseMva(self.base_mva));
        }
        if !(self.slack_voltage_pu.is_finite() && self.slack_voltage_pu > 0.0) {
            return Err(ValidationError::SlackVoltage(self.slack_voltage_pu));
        }
        let mut seen = HashSet::with_capacity(self.buses.len());
        for bus in &self.buses {
            if !seen.insert(bus.id) {
                return Err(ValidationError::DuplicateBus(bus.id));
            }
            let fields = [bus.p_load, bus.q_load, bus.g_shunt, bus.b_shunt, bus.base_kv];
            if fields.iter().any(|v| !v.is_finite()) {
                return Err(ValidationError::NonFinite(format!("bus {}", bus.id)));
            }
        }
        if !seen.contains(&self.slack_bus_id) {
            return Err(ValidationError::UnknownSlack(self.slack_bus_id));
        }
        for (k, br) in self.branches.iter().enumerate() {
            let branch = k + 1;
            for bus in [br.from_bus, br.to_bus] {
                if !seen.contains(&bus) {
                    return Err(ValidationError::UnknownBus { branch, bus });
                }
            }
            if br.from_bus == br.to_bus {
                return Err(ValidationError::SelfLoop { branch, bus: br.from_bus });
            }
            if !(br.r.is_finite() && br.x.is_finite()) {
                return Err(ValidationError::NonFinite(format!("branch {branch}")));
            }
            if br.r < 0.0 {
                return Err(ValidationError::NegativeResistance { branch, r: br.r });
            }
            if br.in_service && br.r == 0.0 && br.x == 0.0 {
                return Err(ValidationError::ZeroImpedance { branch });
            }
        }
        Ok(())
    }

    pub fn with_slack_voltage(mut self, v: f64) -> Result<Self, ValidationError> {
        if !(v.is_finite() && v > 0.0) {
            return Err(ValidationError::SlackVoltage(v));
        }
        self.slack_voltage_pu = v;
        Ok(self)
    }

    pub fn bus_index(&self, id: BusId) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    pub fn in_service_branches(&self) -> impl Iterator<Item = (usize, &BranchRecord)> {
        self.branches.iter().enumerate().filter(|(_, br)| br.in_service)
    }

    /// Total active and reactive load, p.u.
    pub fn total_load(&self) -> (f64, f64) {
        self.buses
            .iter()
            .fold((0.0, 0.0), |(p, q), b| (p + b.p_load, q + b.q_load))
    }
}
