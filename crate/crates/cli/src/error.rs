use std::fmt;

/// Command failures carrying the stable exit-code contract:
/// 1 check failure, 2 config error, 3 resource error.
#[derive(Debug)]
pub enum CmdError {
    Check(String),
    Config(String),
    Resource(String),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Check(_) => 1,
            CmdError::Config(_) => 2,
            CmdError::Resource(_) => 3,
        }
    }
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmdError::Check(msg) => write!(f, "check failure: {msg}"),
            CmdError::Config(msg) => write!(f, "config error: {msg}"),
            CmdError::Resource(msg) => write!(f, "resource error: {msg}"),
        }
    }
}

impl std::error::Error for CmdError {}

/// Domain and regime problems are bad configuration; hitting a size cap
/// or the truncation monitor is a resource problem.
pub fn from_core(e: fnls_core::Error) -> CmdError {
    match &e {
        fnls_core::Error::Domain(_) | fnls_core::Error::Regime(_) => {
            CmdError::Config(e.to_string())
        }
        fnls_core::Error::Resource { .. } | fnls_core::Error::Truncation { .. } => {
            CmdError::Resource(e.to_string())
        }
    }
}
