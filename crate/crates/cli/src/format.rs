//! JSON instance and schedule files.
//!
//! An instance file looks like
//!
//! ```json
//! {
//!   "format": 1,
//!   "machines": 2,
//!   "jobs": [{ "id": "J1", "p": [2, 1], "d": 3, "w": 5 }],
//!   "provenance": { "construction": "ksum-f2", ... }
//! }
//! ```
//!
//! `provenance` is optional. Reading applies the full instance validation.

use std::fs;
use std::path::{Path, PathBuf};

use jitshop_core::reductions::Provenance;
use jitshop_core::{Instance, Job, Schedule};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{origin}:{line}:{column}: {message}")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unsupported format version {0}, expected {FORMAT_VERSION}")]
    UnsupportedVersion(u32),

    #[error(transparent)]
    Invalid(#[from] jitshop_core::Error),
}

/// An instance together with the optional record of how it was generated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceDoc {
    pub instance: Instance,
    pub provenance: Option<Provenance>,
}

impl From<Instance> for InstanceDoc {
    fn from(instance: Instance) -> Self {
        InstanceDoc {
            instance,
            provenance: None,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    format: u32,
    machines: usize,
    jobs: Vec<Job>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<Provenance>,
}

fn parse_error(origin: &str, err: serde_json::Error) -> FormatError {
    FormatError::Parse {
        origin: origin.to_owned(),
        line: err.line(),
        column: err.column(),
        message: err.to_string(),
    }
}

fn read_text(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), FormatError> {
    fs::write(path, text).map_err(|source| FormatError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Parses an instance document. `origin` names the source in error messages.
pub fn parse_instance(text: &str, origin: &str) -> Result<InstanceDoc, FormatError> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| parse_error(origin, e))?;
    if file.format != FORMAT_VERSION {
        return Err(FormatError::UnsupportedVersion(file.format));
    }
    let instance = Instance::new(file.machines, file.jobs)?;
    Ok(InstanceDoc {
        instance,
        provenance: file.provenance,
    })
}

/// Pretty-printed JSON with a trailing newline.
pub fn instance_to_string(doc: &InstanceDoc) -> String {
    let file = InstanceFile {
        format: FORMAT_VERSION,
        machines: doc.instance.machines,
        jobs: doc.instance.jobs.clone(),
        provenance: doc.provenance.clone(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("instance serializes");
    text.push('\n');
    text
}

pub fn read_instance_doc(path: &Path) -> Result<InstanceDoc, FormatError> {
    parse_instance(&read_text(path)?, &path.display().to_string())
}

pub fn read_instance(path: &Path) -> Result<Instance, FormatError> {
    Ok(read_instance_doc(path)?.instance)
}

pub fn write_instance_doc(doc: &InstanceDoc, path: &Path) -> Result<(), FormatError> {
    write_text(path, &instance_to_string(doc))
}

pub fn write_instance(inst: &Instance, path: &Path) -> Result<(), FormatError> {
    write_instance_doc(&InstanceDoc::from(inst.clone()), path)
}

pub fn parse_schedule(text: &str, origin: &str) -> Result<Schedule, FormatError> {
    serde_json::from_str(text).map_err(|e| parse_error(origin, e))
}

pub fn schedule_to_string(sched: &Schedule) -> String {
    let mut text = serde_json::to_string_pretty(sched).expect("schedule serializes");
    text.push('\n');
    text
}

pub fn read_schedule(path: &Path) -> Result<Schedule, FormatError> {
    parse_schedule(&read_text(path)?, &path.display().to_string())
}

pub fn write_schedule(sched: &Schedule, path: &Path) -> Result<(), FormatError> {
    write_text(path, &schedule_to_string(sched))
}

#[cfg(test)]
mod tests {
    use super::*;
    use jitshop_core::reductions::reduce_ksum_to_f2;
    use jitshop_core::{Error, KSumInstance};

    fn f2() -> Instance {
        Instance::from_rows(2, &[(&[2, 1], 3, 5), (&[1, 2], 6, 3)]).unwrap()
    }

    #[test]
    fn round_trip_is_byte_exact() {
        let doc = InstanceDoc::from(f2());
        let text = instance_to_string(&doc);
        let back = parse_instance(&text, "mem").unwrap();
        assert_eq!(back, doc);
        assert_eq!(instance_to_string(&back), text);
    }

    #[test]
    fn provenance_survives() {
        let ks = KSumInstance::new(vec![1, 2, 4], 2, 3).unwrap();
        let red = reduce_ksum_to_f2(&ks).unwrap();
        let doc = InstanceDoc {
            instance: red.instance.clone(),
            provenance: Some(red.provenance.clone()),
        };
        let back = parse_instance(&instance_to_string(&doc), "mem").unwrap();
        assert_eq!(back.provenance, Some(red.provenance));
    }

    #[test]
    fn zero_weight_is_rejected() {
        let text = r#"{"format":1,"machines":2,"jobs":[{"id":"a","p":[1,1],"d":4,"w":0}]}"#;
        match parse_instance(text, "mem").unwrap_err() {
            FormatError::Invalid(Error::NonPositiveValue { value: 0, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn proc_length_must_match_machines() {
        let text = r#"{"format":1,"machines":2,"jobs":[{"id":"a","p":[1,1,1],"d":4,"w":1}]}"#;
        match parse_instance(text, "mem").unwrap_err() {
            FormatError::Invalid(Error::ProcLengthMismatch {
                expected: 2,
                found: 3,
                ..
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_position() {
        let text = "{\"format\":1,\n\"machines\":2,\n\"jobs\":[{\"id\":\"a\",\"p\":[1,1],\"d\":4}]}";
        match parse_instance(text, "x.json").unwrap_err() {
            FormatError::Parse {
                origin,
                line,
                message,
                ..
            } => {
                assert_eq!(origin, "x.json");
                assert_eq!(line, 3);
                assert!(message.contains("`w`"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn version_is_checked() {
        let text = r#"{"format":2,"machines":1,"jobs":[]}"#;
        assert!(matches!(
            parse_instance(text, "mem").unwrap_err(),
            FormatError::UnsupportedVersion(2)
        ));
    }
}
