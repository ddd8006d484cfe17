use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {}: {source}", path.display())]
    ReadConfig { path: PathBuf, source: io::Error },

    #[error("invalid config {}: {detail}", path.display())]
    Schema { path: PathBuf, detail: String },

    #[error("unknown suite `{0}`; expected spectral, flow, masses, penrose or all")]
    UnknownSuite(String),

    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: io::Error },

    #[error("{0} verification check(s) failed")]
    VerifyFailed(usize),

    #[error(transparent)]
    Core(#[from] qsflow::Error),
}

impl CliError {
    /// 2 for bad input, 3 for a flow blow-up, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        use qsflow::Error as E;
        match self {
            CliError::Schema { .. } | CliError::UnknownSuite(_) => 2,
            CliError::ReadConfig { .. } | CliError::Write { .. } | CliError::VerifyFailed(_) => 1,
            CliError::Core(e) => match e {
                E::BlowUp { .. } => 3,
                E::InvalidBandLimit(_)
                | E::InvalidGrid(_)
                | E::DegenerateField(_)
                | E::OutOfDomain { .. }
                | E::InvalidBackground(_)
                | E::InvalidArea(_)
                | E::InvalidBoundaryData(_)
                | E::InvalidConfig(_)
                | E::InvalidSurface(_)
                | E::ConfigurationMismatch(_) => 2,
                _ => 1,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
