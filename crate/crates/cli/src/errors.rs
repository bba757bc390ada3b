//! Error classification for the exit-code contract: usage errors exit 1,
//! data errors (malformed or inconsistent inputs) exit 2, I/O errors exit 3.

use bugclass_core::corpus::CorpusError;
use bugclass_core::ensemble::EnsembleError;
use bugclass_core::eval::EvalError;
use bugclass_core::nb::NbError;
use bugclass_core::persist::PersistError;
use bugclass_core::syngen::SynGenError;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Io(String),
}

impl CliError {
    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Io(m) => m,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(err: CorpusError) -> CliError {
        match err {
            CorpusError::Io { .. } => CliError::Io(err.to_string()),
            _ => CliError::Data(err.to_string()),
        }
    }
}

impl From<PersistError> for CliError {
    fn from(err: PersistError) -> CliError {
        match err {
            PersistError::Io { .. } => CliError::Io(err.to_string()),
            _ => CliError::Data(err.to_string()),
        }
    }
}

/// Generator specs come straight from flags, so a bad spec is a usage error.
impl From<SynGenError> for CliError {
    fn from(err: SynGenError) -> CliError {
        CliError::Usage(err.to_string())
    }
}

impl From<EnsembleError> for CliError {
    fn from(err: EnsembleError) -> CliError {
        match &err {
            EnsembleError::InvalidPriorityOrder | EnsembleError::MissingKind(_) => {
                CliError::Usage(err.to_string())
            }
            EnsembleError::Nb(NbError::InvalidAlpha(_)) => CliError::Usage(err.to_string()),
            _ => CliError::Data(err.to_string()),
        }
    }
}

impl From<NbError> for CliError {
    fn from(err: NbError) -> CliError {
        match err {
            NbError::InvalidAlpha(_) => CliError::Usage(err.to_string()),
            _ => CliError::Data(err.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(err: EvalError) -> CliError {
        match err {
            EvalError::InvalidFraction(_) => CliError::Usage(err.to_string()),
            _ => CliError::Data(err.to_string()),
        }
    }
}

pub fn io_error(path: &std::path::Path, err: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {err}", path.display()))
}
