use std::fmt;
use std::io;
use std::path::PathBuf;

use davies_gap::Error;

#[derive(Debug)]
pub enum CliError {
    Io { path: Option<PathBuf>, source: io::Error },
    Usage(String),
    Core(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                Error::MalformedDocument(_) => 3,
                Error::DegenerateSpectrum { .. }
                | Error::NonHermitianCoupling { .. }
                | Error::EmptyCouplings(_)
                | Error::UnknownBathKind(_)
                | Error::MissingBathFrequency(_)
                | Error::InvalidParameters(_) => 4,
                Error::NotPrimitive(_)
                | Error::UnknownFrequency(_)
                | Error::SingularVariance(_)
                | Error::Disconnected { .. }
                | Error::VertexNotInTree(_)
                | Error::KernelMismatch(_)
                | Error::DegenerateNormalization { .. }
                | Error::NoValidBound(_) => 5,
                Error::DimensionOverflow { .. } => 6,
                Error::InvalidState(_) | Error::InvalidArguments(_) => 7,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io { path: Some(p), source } => write!(f, "{}: {source}", p.display()),
            CliError::Io { path: None, source } => write!(f, "{source}"),
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}
