//! Library half of the `jitshop` command-line tool: instance files, random
//! generation, Gantt export and the solve / cross-check / bench drivers.

pub mod commands;
pub mod format;
pub mod gantt;
pub mod generator;

pub use commands::Algorithm;
pub use format::{read_instance, write_instance, FormatError, InstanceDoc};
pub use generator::{generate, GeneratorError, GeneratorSpec};

use jitshop_core::ErrorKind;

/// Process exit status for an error chain: 2 for malformed input, 3 for a
/// solver precondition, 4 for arithmetic overflow, 1 for anything else.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<jitshop_core::Error>() {
            return core_code(e);
        }
        if let Some(e) = cause.downcast_ref::<FormatError>() {
            return match e {
                FormatError::Parse { .. } | FormatError::UnsupportedVersion(_) => 2,
                FormatError::Io { .. } => 1,
                FormatError::Invalid(inner) => core_code(inner),
            };
        }
        if let Some(e) = cause.downcast_ref::<GeneratorError>() {
            return match e {
                GeneratorError::UnsatisfiableSpec(_) => 2,
                GeneratorError::Invalid(inner) => core_code(inner),
            };
        }
    }
    1
}

fn core_code(e: &jitshop_core::Error) -> i32 {
    match e.kind() {
        ErrorKind::Validation => 2,
        ErrorKind::Precondition => 3,
        ErrorKind::Overflow => 4,
        ErrorKind::Internal => 1,
    }
}
