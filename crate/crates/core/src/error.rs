use thiserror::Error;

use crate::ac::{AcError, TwoBusError};
use crate::analysis::{CompareError, SweepError, TimingError};
use crate::case_io::{ConfigError, ParseError, ValidationError};
use crate::lbf::LbfError;
use crate::topology::TopologyError;

/// Any error the library can return.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Lbf(#[from] LbfError),
    #[error(transparent)]
    Ac(#[from] AcError),
    #[error(transparent)]
    TwoBus(#[from] TwoBusError),
    #[error(transparent)]
    Compare(#[from] CompareError),
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error(transparent)]
    Timing(#[from] TimingError),
}
