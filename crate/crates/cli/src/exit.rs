//! Exit codes and the failures that map to them.

use std::process::ExitCode;

use fovkit::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass = 0,
    Parse = 2,
    Disagreement = 3,
    Violation = 4,
    NonCommuting = 5,
    Io = 6,
}

impl Status {
    pub fn code(self) -> u8 {
        self as u8
    }
}

impl From<Status> for ExitCode {
    fn from(status: Status) -> Self {
        ExitCode::from(status.code())
    }
}

/// A command that could not produce a report.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub status: Status,
    pub message: String,
}

impl Failure {
    pub fn parse(message: impl Into<String>) -> Self {
        Self {
            status: Status::Parse,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self {
            status: Status::Io,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::NonCommuting { .. } => Status::NonCommuting,
            // a certificate that fails its own re-check means the bound was not established
            Error::Inconsistency(_) | Error::NotNormalized { .. } => Status::Violation,
            _ => Status::Parse,
        };
        Self {
            status,
            message: e.to_string(),
        }
    }
}
