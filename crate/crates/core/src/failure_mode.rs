use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Five-class execution ground-truth label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureMode {
    Success,
    InstallDep,
    MissingModule,
    MissingData,
    CodeError,
}

impl FailureMode {
    pub const ALL: [FailureMode; 5] = [
        FailureMode::Success,
        FailureMode::InstallDep,
        FailureMode::MissingModule,
        FailureMode::MissingData,
        FailureMode::CodeError,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FailureMode::Success => "success",
            FailureMode::InstallDep => "install_dep",
            FailureMode::MissingModule => "missing_module",
            FailureMode::MissingData => "missing_data",
            FailureMode::CodeError => "code_error",
        }
    }

    /// Aggregation priority; higher wins.
    pub fn priority(self) -> u8 {
        match self {
            FailureMode::InstallDep => 4,
            FailureMode::MissingModule => 3,
            FailureMode::MissingData => 2,
            FailureMode::CodeError => 1,
            FailureMode::Success => 0,
        }
    }

    pub fn is_success(self) -> bool {
        self == FailureMode::Success
    }
}

impl fmt::Display for FailureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FailureModeError {
    #[error("unknown failure mode `{0}`")]
    Unknown(String),
    #[error("no notebook labels to aggregate")]
    Empty,
}

impl FromStr for FailureMode {
    type Err = FailureModeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FailureMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s.trim())
            .ok_or_else(|| FailureModeError::Unknown(s.to_string()))
    }
}

/// Repository label from notebook labels: the highest-priority label wins
/// (install_dep ≻ missing_module ≻ missing_data ≻ code_error ≻ success).
pub fn aggregate_failure_mode<I>(labels: I) -> Result<FailureMode, FailureModeError>
where
    I: IntoIterator,
    I::Item: AsRef<str>,
{
    let mut worst: Option<FailureMode> = None;
    for l in labels {
        let m: FailureMode = l.as_ref().parse()?;
        worst = Some(match worst {
            Some(w) if w.priority() >= m.priority() => w,
            _ => m,
        });
    }
    worst.ok_or(FailureModeError::Empty)
}
