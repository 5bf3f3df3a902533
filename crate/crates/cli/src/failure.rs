use std::fmt;

use varireg::Error;

/// A fatal error carrying the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

pub const EXIT_PARSE: i32 = 2;
pub const EXIT_ZERO_VARIATION: i32 = 3;
pub const EXIT_BANDWIDTH: i32 = 4;

impl Failure {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    /// Malformed input, configuration or schema.
    pub fn parse(message: impl Into<String>) -> Self {
        Self::new(EXIT_PARSE, message)
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Self::new(1, format!("{}: {err}", path.display()))
    }

    /// Maps a library error, naming curves by their identifiers.
    pub fn from_lib(err: Error, ids: &[String]) -> Self {
        let name = |i: Option<usize>| match i.and_then(|i| ids.get(i)) {
            Some(id) => format!("curve '{id}'"),
            None => "a curve".to_string(),
        };
        match err {
            Error::ZeroVariation { curve } => Self::new(
                EXIT_ZERO_VARIATION,
                format!("{} has zero total variation", name(curve)),
            ),
            Error::EmptyWindow {
                t,
                bandwidth,
                curve,
            } => Self::new(
                EXIT_BANDWIDTH,
                format!(
                    "{}: no observation within bandwidth {bandwidth} of t = {t}",
                    name(curve)
                ),
            ),
            Error::SingularFit {
                t,
                bandwidth,
                curve,
            } => Self::new(
                EXIT_BANDWIDTH,
                format!(
                    "{}: singular local fit at t = {t} with bandwidth {bandwidth}",
                    name(curve)
                ),
            ),
            Error::AllCandidatesSingular => Self::new(EXIT_BANDWIDTH, err.to_string()),
            Error::InvalidCurve(_)
            | Error::InvalidArgument(_)
            | Error::GridMismatch
            | Error::EmptySample
            | Error::NotRankOne => Self::parse(err.to_string()),
            other => Self::new(1, other.to_string()),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<csv::Error> for Failure {
    fn from(err: csv::Error) -> Self {
        if err.is_io_error() {
            return Self::new(1, err.to_string());
        }
        match err.position() {
            Some(pos) => Self::parse(format!("line {}: {err}", pos.line())),
            None => Self::parse(err.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, Failure>;
