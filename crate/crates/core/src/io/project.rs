//! Single-file project persistence in a canonical JSON layout: fixed field
//! order, collections sorted by id (the edit log in append order), integer
//! times only, two-space indentation and a trailing newline.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{Description, EditLogEntry, PendingProposal, Variation, VideoAsset};
use crate::store::Store;
use crate::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectFile {
    pub format_version: u32,
    pub videos: Vec<VideoAsset>,
    pub variations: Vec<Variation>,
    pub descriptions: Vec<Description>,
    pub edit_log: Vec<EditLogEntry>,
    #[serde(default)]
    pub pending_proposals: Vec<PendingProposal>,
}

impl ProjectFile {
    pub fn from_store(store: &Store) -> Self {
        ProjectFile {
            format_version: FORMAT_VERSION,
            videos: store.videos.values().cloned().collect(),
            variations: store.variations.values().cloned().collect(),
            descriptions: store.descriptions.values().cloned().collect(),
            edit_log: store.log.clone(),
            pending_proposals: store.proposals.values().cloned().collect(),
        }
    }
}

pub fn to_canonical_string(store: &Store) -> Result<String> {
    let mut text = serde_json::to_string_pretty(&ProjectFile::from_store(store))
        .map_err(|e| Error::Serialization(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// Parses and fully validates a project document.
pub fn from_str(text: &str) -> Result<Store> {
    let raw: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::InvariantViolation {
            path: format!("$ (line {}, column {})", e.line(), e.column()),
            message: e.to_string(),
        })?;
    let version = raw
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::InvariantViolation {
            path: "format_version".into(),
            message: "missing or not an integer".into(),
        })?;
    if version > FORMAT_VERSION as u64 || version == 0 {
        return Err(Error::VersionUnsupported {
            found: version.min(u32::MAX as u64) as u32,
            supported: FORMAT_VERSION,
        });
    }
    let file: ProjectFile = serde_json::from_value(raw).map_err(|e| Error::InvariantViolation {
        path: "$".into(),
        message: e.to_string(),
    })?;

    let dup = |what: &str, n: usize, unique: usize| -> Result<()> {
        if n != unique {
            return Err(Error::InvariantViolation {
                path: what.into(),
                message: "duplicate ids".into(),
            });
        }
        Ok(())
    };
    let (nv, nvar, nd, np) = (
        file.videos.len(),
        file.variations.len(),
        file.descriptions.len(),
        file.pending_proposals.len(),
    );
    let store = Store::from_parts(
        file.videos,
        file.variations,
        file.descriptions,
        file.edit_log,
        file.pending_proposals,
    );
    dup("videos", nv, store.videos.len())?;
    dup("variations", nvar, store.variations.len())?;
    dup("descriptions", nd, store.descriptions.len())?;
    dup("pending_proposals", np, store.proposals.len())?;
    store.validate()?;
    Ok(store)
}

/// Writes the project atomically (temp file, then rename).
pub fn save_project(store: &Store, path: &Path) -> Result<()> {
    let text = to_canonical_string(store)?;
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "project".into());
    let tmp = dir.join(format!(".{file_name}.tmp"));
    std::fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn load_project(path: &Path) -> Result<Store> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_str(&text)
}
