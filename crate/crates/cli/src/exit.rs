//! Exit-status classification.

use std::fmt;
use std::path::Path;

/// Any failure not covered below.
pub const FAILURE: i32 = 1;
/// Bad flags, overrides or configuration values (clap uses 2 as well).
pub const USAGE: i32 = 2;
/// A declared input file does not exist.
pub const MISSING_INPUT: i32 = 3;
/// An input exists but violates its file format.
pub const SCHEMA: i32 = 4;

#[derive(Debug)]
struct Coded {
    code: i32,
    message: String,
}

impl fmt::Display for Coded {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Coded {}

pub fn usage(message: impl Into<String>) -> anyhow::Error {
    Coded { code: USAGE, message: message.into() }.into()
}

pub fn missing_input(path: &Path) -> anyhow::Error {
    Coded { code: MISSING_INPUT, message: format!("input not found: {}", path.display()) }.into()
}

pub fn schema(message: impl Into<String>) -> anyhow::Error {
    Coded { code: SCHEMA, message: message.into() }.into()
}

pub fn code_for(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(c) = cause.downcast_ref::<Coded>() {
            return c.code;
        }
        if let Some(e) = cause.downcast_ref::<agefair_core::Error>() {
            return match e {
                agefair_core::Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => {
                    MISSING_INPUT
                }
                agefair_core::Error::Config(_) => USAGE,
                e if e.is_schema() => SCHEMA,
                _ => FAILURE,
            };
        }
    }
    FAILURE
}
