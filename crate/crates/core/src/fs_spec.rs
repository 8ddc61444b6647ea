//! Virtual filesystem description:
//!
//! ```json
//! { "f": { "status": "o" | "c", "contents": [1, 2, 3] } }
//! ```
//!
//! `status` defaults to `"c"` and `contents` to `[]`.

use serde::Deserialize;

use crate::machine::{FileData, FileStatus, FileStatusTable, FileStore};
use crate::syntax::Program;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error("filesystem spec is not valid JSON: {0}")]
    Json(String),
    #[error("filesystem spec must be a JSON object mapping file names to entries")]
    NotAnObject,
    #[error("filesystem spec entry `{key}`: {message}")]
    Entry { key: String, message: String },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EntrySpec {
    #[serde(default = "closed")]
    status: FileStatus,
    #[serde(default)]
    contents: Vec<i64>,
}

fn closed() -> FileStatus {
    FileStatus::Closed
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FsSpec {
    pub store: FileStore,
    pub status: FileStatusTable,
}

impl FsSpec {
    pub fn from_json(text: &str) -> Result<FsSpec, SpecError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| SpecError::Json(e.to_string()))?;
        let serde_json::Value::Object(map) = value else {
            return Err(SpecError::NotAnObject);
        };
        let mut spec = FsSpec::default();
        for (key, entry) in map {
            let parsed: EntrySpec =
                serde_json::from_value(entry).map_err(|e| SpecError::Entry {
                    key: key.clone(),
                    message: e.to_string(),
                })?;
            spec.store
                .insert(key.clone(), FileData::new(parsed.contents));
            spec.status.insert(key, parsed.status);
        }
        Ok(spec)
    }

    /// Adds a closed, empty file for every program file the description omits.
    pub fn with_defaults_for(mut self, program: &Program) -> FsSpec {
        for f in &program.files {
            self.store
                .entry(f.clone())
                .or_insert_with(|| FileData::new(Vec::new()));
            self.status.entry(f.clone()).or_insert(FileStatus::Closed);
        }
        self
    }
}
