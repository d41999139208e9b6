use serde::Serialize;
use thiserror::Error;

/// Failure class; decides the process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorKind {
    Usage,
    NonConvergence,
    Numerical,
    Verification,
    Io,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Usage | Self::Io => 2,
            Self::NonConvergence | Self::Numerical => 3,
            Self::Verification => 4,
        }
    }
}

/// Structured error record, printed as one JSON line on stderr.
#[derive(Debug, Clone, Error, Serialize)]
#[error("{module}: {quantity}: {message}")]
pub struct CliError {
    pub kind: ErrorKind,
    pub module: String,
    pub quantity: String,
    pub message: String,
}

impl CliError {
    pub fn new(kind: ErrorKind, module: &str, quantity: &str, message: impl Into<String>) -> Self {
        Self {
            kind,
            module: module.to_string(),
            quantity: quantity.to_string(),
            message: message.into(),
        }
    }

    pub fn usage(quantity: &str, message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Usage, "cli", quantity, message)
    }

    pub fn io(quantity: &str, err: std::io::Error) -> Self {
        Self::new(ErrorKind::Io, "cli", quantity, err.to_string())
    }

    /// Wraps a library error raised while computing `quantity` in `module`.
    pub fn core(module: &str, quantity: &str, err: osp_thermo::Error) -> Self {
        use osp_thermo::Error as E;
        let kind = match &err {
            E::NonConvergence { .. } => ErrorKind::NonConvergence,
            E::InvalidParams(_) | E::DimensionCap { .. } => ErrorKind::Usage,
            E::Inconsistent { .. } => ErrorKind::Verification,
            E::Pole { .. } | E::KernelCollision { .. } | E::DivisionBlowup { .. } | E::NonPositiveLog(_) => {
                ErrorKind::Numerical
            }
        };
        Self::new(kind, module, quantity, err.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            error: &'a CliError,
        }
        serde_json::to_string(&Record { error: self }).expect("plain record")
    }
}
