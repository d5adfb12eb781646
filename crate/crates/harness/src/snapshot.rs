//! Versioned JSON snapshots of a trained model.

use std::path::Path;

use serde::{Deserialize, Serialize};
use vdsom::{ArmModel, Normalizer, SensorimotorModel};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub schema_version: u32,
    /// Arm the training data came from.
    pub arm: ArmModel,
    pub normalizer: Normalizer,
    pub model: SensorimotorModel,
}

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("unsupported snapshot schema version {found} (this build reads version {SCHEMA_VERSION})")]
    UnsupportedVersion { found: u64 },
    #[error("snapshot has no schema_version field")]
    MissingVersion,
    #[error("inconsistent snapshot: {0}")]
    Invalid(String),
}

#[derive(Deserialize)]
struct VersionProbe {
    schema_version: Option<serde_json::Value>,
}

/// Byte offset of a 1-based line/column position reported by the parser.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let start: usize = text.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    (start + column.saturating_sub(1)).min(text.len())
}

fn parse_error(text: &str, e: serde_json::Error) -> SnapshotError {
    SnapshotError::Parse {
        offset: byte_offset(text, e.line(), e.column()),
        message: e.to_string(),
    }
}

impl Snapshot {
    pub fn new(arm: ArmModel, normalizer: Normalizer, model: SensorimotorModel) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            arm,
            normalizer,
            model,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("snapshot serializes")
    }

    /// Checks the version before decoding the rest of the document.
    pub fn from_json(text: &str) -> Result<Self, SnapshotError> {
        let probe: VersionProbe = serde_json::from_str(text).map_err(|e| parse_error(text, e))?;
        let version = probe.schema_version.ok_or(SnapshotError::MissingVersion)?;
        let found = version
            .as_u64()
            .ok_or_else(|| SnapshotError::Invalid(format!("schema_version `{version}` is not an integer")))?;
        if found != SCHEMA_VERSION as u64 {
            return Err(SnapshotError::UnsupportedVersion { found });
        }
        let snap: Self = serde_json::from_str(text).map_err(|e| parse_error(text, e))?;
        snap.check()?;
        Ok(snap)
    }

    fn check(&self) -> Result<(), SnapshotError> {
        let m = &self.model;
        if m.bridge.motor_nodes() != m.motor.node_count() || m.bridge.sensory_nodes() != m.sensory.node_count() {
            return Err(SnapshotError::Invalid("bridge dimensions do not match the maps".into()));
        }
        if m.motor.input_dim() != 2 || m.sensory.input_dim() != 2 {
            return Err(SnapshotError::Invalid("maps must be two-dimensional".into()));
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<(), SnapshotError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, SnapshotError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets() {
        let text = "ab\ncde\nf";
        assert_eq!(byte_offset(text, 1, 1), 0);
        assert_eq!(byte_offset(text, 2, 2), 4);
        assert_eq!(byte_offset(text, 3, 1), 7);
        assert_eq!(byte_offset(text, 9, 9), text.len());
    }

    #[test]
    fn version_checks() {
        assert!(matches!(
            Snapshot::from_json(r#"{"schema_version": 2, "arm": null}"#),
            Err(SnapshotError::UnsupportedVersion { found: 2 })
        ));
        assert!(matches!(Snapshot::from_json(r#"{"arm": 1}"#), Err(SnapshotError::MissingVersion)));
        assert!(matches!(
            Snapshot::from_json(r#"{"schema_version": "one"}"#),
            Err(SnapshotError::Invalid(_))
        ));
        match Snapshot::from_json("{\n  \"schema_version\": 1,\n  \"arm\": [") {
            Err(SnapshotError::Parse { offset, .. }) => assert!(offset >= 30, "{offset}"),
            other => panic!("{other:?}"),
        }
    }
}
