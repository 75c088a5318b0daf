use std::fmt;
use std::process::ExitCode;

use sca_core::Error;

pub const VALIDATION: u8 = 2;
pub const NEVER_SUCCEEDS: u8 = 3;
pub const MISMATCH: u8 = 4;

/// Invalid flag combination detected by the CLI itself.
#[derive(Debug)]
pub struct Usage(pub String);

/// Closed forms and an independent estimate disagree.
#[derive(Debug)]
pub struct Mismatch(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}
impl std::error::Error for Mismatch {}

/// Exit status and one-line message for a failed command.
pub fn classify(err: &anyhow::Error) -> (ExitCode, String) {
    if err.downcast_ref::<Usage>().is_some() {
        return (ExitCode::from(VALIDATION), err.to_string());
    }
    if err.downcast_ref::<Mismatch>().is_some() {
        return (ExitCode::from(MISMATCH), err.to_string());
    }
    match err.downcast_ref::<Error>() {
        Some(Error::NeverSucceeds) => (
            ExitCode::from(NEVER_SUCCEEDS),
            "device never succeeds".into(),
        ),
        Some(Error::InvalidParameter { .. }) | Some(Error::Parse(_)) => {
            (ExitCode::from(VALIDATION), err.to_string())
        }
        _ => (ExitCode::FAILURE, format!("{err:#}")),
    }
}

pub fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.chain().any(|c| {
        let kind = match c.downcast_ref::<std::io::Error>() {
            Some(io) => Some(io.kind()),
            None => c.downcast_ref::<Error>().and_then(Error::io_kind),
        };
        kind == Some(std::io::ErrorKind::BrokenPipe)
    })
}
