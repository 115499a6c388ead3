use std::collections::HashMap;
use std::path::{Path, PathBuf};

use base64::Engine as _;
use serde::Serialize;

use super::provider::ImagePayload;
use crate::io::frames::{media_type_for, FrameManifest};
use crate::model::{AdSlot, FrameRate, VideoAsset};
use crate::{Error, Result};

/// Spacing of frames sampled for the model.
pub const FRAME_SAMPLE_INTERVAL_MS: u64 = 2000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SlotFrames {
    pub slot: AdSlot,
    /// Sample times, ascending, each below the video duration.
    pub timestamps_ms: Vec<u64>,
    /// Source frame index shown at each sample time.
    pub frame_indices: Vec<u64>,
}

/// Samples every 2 s from each slot start up to (not including) the next
/// slot start, the last slot running to the end of the video. Slots must be
/// sorted by start.
pub fn sample_frame_plan(
    slots: &[AdSlot],
    duration_ms: u64,
    frame_rate: FrameRate,
) -> Vec<SlotFrames> {
    slots
        .iter()
        .enumerate()
        .map(|(i, slot)| {
            let next = slots
                .get(i + 1)
                .map_or(duration_ms, |s| s.start_ms)
                .min(duration_ms);
            let timestamps_ms: Vec<u64> = (slot.start_ms..next)
                .step_by(FRAME_SAMPLE_INTERVAL_MS as usize)
                .collect();
            let frame_indices = timestamps_ms
                .iter()
                .map(|&t| frame_rate.frame_index_at(t))
                .collect();
            SlotFrames {
                slot: *slot,
                timestamps_ms,
                frame_indices,
            }
        })
        .collect()
}

/// Resolves sample times to encoded images through a video's frame
/// manifest. Videos without a manifest yield no images.
pub struct FrameSource {
    manifest: Option<FrameManifest>,
    cache: HashMap<PathBuf, ImagePayload>,
}

impl FrameSource {
    pub fn for_video(video: &VideoAsset) -> Result<Self> {
        let manifest = match &video.media_refs.frame_manifest {
            Some(path) => Some(FrameManifest::load(path)?),
            None => None,
        };
        Ok(FrameSource {
            manifest,
            cache: HashMap::new(),
        })
    }

    pub fn empty() -> Self {
        FrameSource {
            manifest: None,
            cache: HashMap::new(),
        }
    }

    fn load(path: &Path) -> Result<ImagePayload> {
        let bytes = std::fs::read(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingMedia(path.to_owned()),
            _ => Error::io(path, e),
        })?;
        Ok(ImagePayload {
            media_type: media_type_for(path).to_owned(),
            data_base64: base64::engine::general_purpose::STANDARD.encode(bytes),
        })
    }

    /// Images for the given sample times, in order. Consecutive samples that
    /// land on the same frame are sent once.
    pub fn images(&mut self, timestamps_ms: &[u64]) -> Result<Vec<ImagePayload>> {
        let Some(manifest) = &self.manifest else {
            return Ok(Vec::new());
        };
        let mut out = Vec::new();
        let mut last: Option<&Path> = None;
        for &t in timestamps_ms {
            let Some(entry) = manifest.frame_at(t) else {
                continue;
            };
            if last == Some(entry.path.as_path()) {
                continue;
            }
            last = Some(entry.path.as_path());
            if !self.cache.contains_key(&entry.path) {
                self.cache
                    .insert(entry.path.clone(), Self::load(&entry.path)?);
            }
            out.push(self.cache[&entry.path].clone());
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn times(slots: &[(u64, u64)], duration: u64) -> Vec<Vec<u64>> {
        let slots: Vec<AdSlot> = slots.iter().map(|&(s, e)| AdSlot::new(s, e)).collect();
        sample_frame_plan(&slots, duration, FrameRate::default())
            .into_iter()
            .map(|f| f.timestamps_ms)
            .collect()
    }

    #[test]
    fn cadence_examples() {
        assert_eq!(times(&[(0, 1000)], 7000), vec![vec![0, 2000, 4000, 6000]]);
        assert_eq!(times(&[(0, 1000)], 3000), vec![vec![0, 2000]]);
        assert!(times(&[], 3000).is_empty());
        assert_eq!(
            times(&[(1000, 2000), (4500, 6000)], 9000),
            vec![vec![1000, 3000], vec![4500, 6500, 8500]]
        );
    }

    #[test]
    fn frame_indices_follow_rate() {
        let f = sample_frame_plan(
            &[AdSlot::new(0, 1000)],
            5000,
            FrameRate::new(30, 1).unwrap(),
        );
        assert_eq!(f[0].frame_indices, vec![0, 60, 120]);
    }

    #[test]
    fn images_deduplicate_held_frames() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.png"), b"A").unwrap();
        std::fs::write(dir.path().join("b.jpg"), b"B").unwrap();
        let mut src = FrameSource {
            manifest: Some(FrameManifest::parse("0 a.png\n5000 b.jpg\n", dir.path()).unwrap()),
            cache: HashMap::new(),
        };
        let imgs = src.images(&[0, 2000, 4000, 6000]).unwrap();
        assert_eq!(imgs.len(), 2);
        assert_eq!(imgs[0].data_base64, "QQ==");
        assert_eq!(imgs[1].media_type, "image/jpeg");
    }
}
