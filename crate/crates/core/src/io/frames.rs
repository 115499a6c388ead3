//! Frame manifests: one `<ms> <filename>` line per extracted frame, with
//! filenames relative to the manifest's directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::model::FrameRate;
use crate::timing::Frame;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub timestamp_ms: u64,
    pub path: PathBuf,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FrameManifest {
    pub entries: Vec<ManifestEntry>,
}

impl FrameManifest {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut entries: Vec<ManifestEntry> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad =
                |msg: &str| Error::InvalidInput(format!("frame manifest line {}: {msg}", n + 1));
            let (ms, name) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| bad("expected `<ms> <filename>`"))?;
            let timestamp_ms: u64 = ms.parse().map_err(|_| bad("timestamp is not an integer"))?;
            if let Some(prev) = entries.last() {
                if timestamp_ms <= prev.timestamp_ms {
                    return Err(bad("timestamps must increase"));
                }
            }
            entries.push(ManifestEntry {
                timestamp_ms,
                path: base_dir.join(name.trim()),
            });
        }
        Ok(FrameManifest { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.is_file() {
            return Err(Error::MissingMedia(path.to_owned()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Renders with paths relative to `base_dir` where possible.
    pub fn render(&self, base_dir: &Path) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let rel = e.path.strip_prefix(base_dir).unwrap_or(&e.path);
            let _ = writeln!(out, "{} {}", e.timestamp_ms, rel.display());
        }
        out
    }

    /// The frame on screen at `ms`: the last entry at or before it.
    pub fn frame_at(&self, ms: u64) -> Option<&ManifestEntry> {
        let idx = self.entries.partition_point(|e| e.timestamp_ms <= ms);
        idx.checked_sub(1).map(|i| &self.entries[i])
    }

    /// Cadence implied by the median spacing between frames.
    pub fn frame_rate(&self) -> Option<FrameRate> {
        let mut gaps: Vec<u64> = self
            .entries
            .windows(2)
            .map(|w| w[1].timestamp_ms - w[0].timestamp_ms)
            .collect();
        if gaps.is_empty() {
            return None;
        }
        gaps.sort_unstable();
        let median = gaps[gaps.len() / 2];
        FrameRate::new(1000, u32::try_from(median).ok()?)
    }

    /// Decodes every listed image.
    pub fn load_frames(&self) -> Result<Vec<Frame>> {
        self.entries
            .iter()
            .map(|e| {
                if !e.path.is_file() {
                    return Err(Error::MissingMedia(e.path.clone()));
                }
                let image = image::open(&e.path)
                    .map_err(|err| Error::InvalidInput(format!("{}: {err}", e.path.display())))?;
                Ok(Frame {
                    timestamp_ms: e.timestamp_ms,
                    image,
                })
            })
            .collect()
    }
}

pub fn media_type_for(path: &Path) -> &'static str {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("jpg" | "jpeg") => "image/jpeg",
        Some("webp") => "image/webp",
        Some("gif") => "image/gif",
        _ => "image/png",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_lookup() {
        let m = FrameManifest::parse(
            "# frames\n0 f0.png\n1000 f1.png\n\n2000 dir/f 2.png\n",
            Path::new("/m"),
        )
        .unwrap();
        assert_eq!(m.entries.len(), 3);
        assert_eq!(m.entries[2].path, PathBuf::from("/m/dir/f 2.png"));
        assert_eq!(m.frame_at(1500).unwrap().timestamp_ms, 1000);
        assert_eq!(m.frame_at(0).unwrap().timestamp_ms, 0);
        assert_eq!(m.frame_rate(), FrameRate::new(1, 1));
        assert_eq!(
            m.render(Path::new("/m")),
            "0 f0.png\n1000 f1.png\n2000 dir/f 2.png\n"
        );
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(FrameManifest::parse("abc f.png", Path::new(".")).is_err());
        assert!(FrameManifest::parse("1000 a.png\n500 b.png", Path::new(".")).is_err());
        assert!(FrameManifest::parse("1000", Path::new(".")).is_err());
    }
}
