//! `key=value` sweep configuration.
//!
//! Pairs are separated by whitespace or newlines; `#` starts a comment.
//!
//! ```text
//! target=load_level
//! ids=30
//! values=1.0,1.2,1.4,1.6
//! a=1.0
//! focus=26,27,28,29
//! ```
//!
//! `ids` and `focus` are bus ids. For `rx_ratio` the swept element is the
//! branch feeding each listed bus; `focus` entries likewise select the branch
//! feeding the bus. Without `focus` the swept elements are traced.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use super::BusId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepTarget {
    PqRatio,
    RxRatio,
    LoadLevel,
}

impl FromStr for SweepTarget {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pq_ratio" => Ok(SweepTarget::PqRatio),
            "rx_ratio" => Ok(SweepTarget::RxRatio),
            "load_level" => Ok(SweepTarget::LoadLevel),
            other => Err(ConfigError::UnknownKind(other.to_string())),
        }
    }
}

impl fmt::Display for SweepTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepTarget::PqRatio => "pq_ratio",
            SweepTarget::RxRatio => "rx_ratio",
            SweepTarget::LoadLevel => "load_level",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub target: SweepTarget,
    pub node_or_branch_ids: Vec<BusId>,
    pub values: Vec<f64>,
    pub scaling_a: f64,
    pub focus: Vec<BusId>,
}

impl SweepConfig {
    /// Buses whose feeding branch is traced in the focus series.
    pub fn focus_ids(&self) -> &[BusId] {
        if self.focus.is_empty() {
            &self.node_or_branch_ids
        } else {
            &self.focus
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.values.is_empty() {
            return Err(ConfigError::EmptyValues);
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(ConfigError::NotMonotone);
        }
        let increasing = self.values.windows(2).all(|w| w[1] > w[0]);
        let decreasing = self.values.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) {
            return Err(ConfigError::NotMonotone);
        }
        if !(self.scaling_a.is_finite() && self.scaling_a > 0.0) {
            return Err(ConfigError::Scaling(self.scaling_a));
        }
        if self.node_or_branch_ids.is_empty() {
            return Err(ConfigError::Missing("ids"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("unknown sweep kind `{0}`")]
    UnknownKind(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("expected key=value, got `{0}`")]
    Malformed(String),
    #[error("duplicate key `{0}`")]
    Duplicate(String),
    #[error("missing `{0}`")]
    Missing(&'static str),
    #[error("bad number `{value}` for `{key}`")]
    BadNumber { key: &'static str, value: String },
    #[error("values must not be empty")]
    EmptyValues,
    #[error("values must be finite and strictly monotone")]
    NotMonotone,
    #[error("scaling coefficient a must be positive, got {0}")]
    Scaling(f64),
}

pub fn load_sweep_config(text: &str) -> Result<SweepConfig, ConfigError> {
    let mut target = None;
    let mut ids = None;
    let mut values = None;
    let mut a = None;
    let mut focus = None;

    let pairs = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace);
    for pair in pairs {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| ConfigError::Malformed(pair.to_string()))?;
        let dup = || ConfigError::Duplicate(key.to_string());
        match key {
            "target" => {
                if target.replace(value.parse::<SweepTarget>()?).is_some() {
                    return Err(dup());
                }
            }
            "ids" => {
                if ids.replace(parse_ids("ids", value)?).is_some() {
                    return Err(dup());
                }
            }
            "focus" => {
                if focus.replace(parse_ids("focus", value)?).is_some() {
                    return Err(dup());
                }
            }
            "values" => {
                let parsed = value
                    .split(',')
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse::<f64>()
                            .map_err(|_| ConfigError::BadNumber { key: "values", value: s.to_string() })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if values.replace(parsed).is_some() {
                    return Err(dup());
                }
            }
            "a" => {
                let v = value
                    .parse::<f64>()
                    .map_err(|_| ConfigError::BadNumber { key: "a", value: value.to_string() })?;
                if a.replace(v).is_some() {
                    return Err(dup());
                }
            }
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
    }

    let cfg = SweepConfig {
        target: target.ok_or(ConfigError::Missing("target"))?,
        node_or_branch_ids: ids.ok_or(ConfigError::Missing("ids"))?,
        values: values.ok_or(ConfigError::EmptyValues)?,
        scaling_a: a.unwrap_or(1.0),
        focus: focus.unwrap_or_default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn parse_ids(key: &'static str, value: &str) -> Result<Vec<BusId>, ConfigError> {
    value
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<u32>()
                .map(BusId)
                .map_err(|_| ConfigError::BadNumber { key, value: s.to_string() })
        })
        .collect()
}
