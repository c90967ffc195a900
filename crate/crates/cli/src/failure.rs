//! Errors and their exit codes.

use std::fmt;
use std::path::PathBuf;

use lbf_core::{AcError, Error, ParseError, SweepError, TimingError};

pub const EXIT_INTERNAL: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_MODEL: u8 = 3;
pub const EXIT_CONVERGENCE: u8 = 4;

#[derive(Debug)]
pub enum Failure {
    FileNotFound(PathBuf),
    Read(PathBuf, std::io::Error),
    Usage(String),
    /// A core error, with the file it came from if any.
    Core(Option<PathBuf>, Error),
    /// Every point of a sweep failed to converge.
    SweepFailed(usize),
    Internal(anyhow::Error),
}

impl Failure {
    pub fn core(path: impl Into<Option<PathBuf>>, e: impl Into<Error>) -> Self {
        Failure::Core(path.into(), e.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::FileNotFound(_) | Failure::Read(..) | Failure::Usage(_) => EXIT_INPUT,
            Failure::Core(_, e) => core_exit_code(e),
            Failure::SweepFailed(_) => EXIT_CONVERGENCE,
            Failure::Internal(_) => EXIT_INTERNAL,
        }
    }
}

fn core_exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(ParseError::Invalid(_)) | Error::Validation(_) | Error::Topology(_) => EXIT_MODEL,
        Error::Parse(_) | Error::Config(_) | Error::Lbf(_) | Error::TwoBus(_) => EXIT_INPUT,
        Error::Ac(AcError::Options(_)) => EXIT_INPUT,
        Error::Ac(_) => EXIT_CONVERGENCE,
        Error::Compare(_) => EXIT_INTERNAL,
        Error::Sweep(s) => match s {
            SweepError::Topology(_) => EXIT_MODEL,
            _ => EXIT_INPUT,
        },
        Error::Timing(t) => match t {
            TimingError::Topology(_) => EXIT_MODEL,
            TimingError::Threads(_) => EXIT_INTERNAL,
            _ => EXIT_INPUT,
        },
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::FileNotFound(p) => write!(f, "file not found: {}", p.display()),
            Failure::Read(p, e) => write!(f, "cannot read {}: {e}", p.display()),
            Failure::Usage(m) => f.write_str(m),
            Failure::Core(Some(p), e) => write!(f, "{}: {e}", p.display()),
            Failure::Core(None, e) => write!(f, "{e}"),
            Failure::SweepFailed(n) => write!(f, "all {n} sweep points failed"),
            Failure::Internal(e) => write!(f, "internal error: {e:#}"),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Internal(e)
    }
}
