//! Process exit codes and the error type that carries them.

use std::fmt;

use vnc::Error;

pub const OK: u8 = 0;
/// A `check` item or a `compare --tol` bound failed.
pub const CHECK_FAILED: u8 = 1;
/// Invalid arguments, configuration, system definition, or I/O failure.
pub const CONFIG: u8 = 2;
/// No admissible control at some visited state.
pub const CONTROL_UNAVAILABLE: u8 = 3;
/// The integrator produced a non-finite state.
pub const STEP_FAILURE: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Failure { code: CONFIG, message: message.into() }
    }

    pub fn check(message: impl Into<String>) -> Self {
        Failure { code: CHECK_FAILED, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ControlUnavailable(_) => CONTROL_UNAVAILABLE,
            Error::StepFailure { .. } => STEP_FAILURE,
            _ => CONFIG,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::config(format!("I/O error: {e}"))
    }
}
