use image::imageops::{self, FilterType};
use image::{DynamicImage, GrayImage};
use serde::{Deserialize, Serialize};

use super::TimingConfig;
use crate::{Error, Result};

/// One decoded video frame and the instant it is shown.
#[derive(Clone, Debug)]
pub struct Frame {
    pub timestamp_ms: u64,
    pub image: DynamicImage,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneCutList {
    pub cut_times_ms: Vec<u64>,
}

impl SceneCutList {
    pub fn new(cut_times_ms: Vec<u64>, min_cut_gap_ms: u64) -> Result<Self> {
        for w in cut_times_ms.windows(2) {
            if w[1] <= w[0] || w[1] - w[0] < min_cut_gap_ms {
                return Err(Error::InvalidInput(format!(
                    "scene cuts {} and {} are out of order or closer than {min_cut_gap_ms} ms",
                    w[0], w[1]
                )));
            }
        }
        Ok(SceneCutList { cut_times_ms })
    }
}

fn thumbnail(image: &DynamicImage, side: u32) -> GrayImage {
    imageops::resize(&image.to_luma8(), side, side, FilterType::Triangle)
}

/// Mean absolute difference of two equally sized grayscale images, on `[0, 1]`.
pub fn frame_difference(a: &GrayImage, b: &GrayImage) -> f64 {
    debug_assert_eq!(a.dimensions(), b.dimensions());
    let total: u64 = a
        .as_raw()
        .iter()
        .zip(b.as_raw())
        .map(|(x, y)| x.abs_diff(*y) as u64)
        .sum();
    let n = a.as_raw().len().max(1) as f64;
    total as f64 / (n * 255.0)
}

/// Emits a cut at each frame that differs from its predecessor by more than
/// `scene_diff_threshold`, skipping cuts within `min_cut_gap_ms` of the last.
pub fn detect_scene_changes(frames: &[Frame], config: &TimingConfig) -> Result<SceneCutList> {
    config.validate()?;
    if frames.len() < 2 {
        return Err(Error::TooFewFrames(frames.len()));
    }
    if let Some(w) = frames
        .windows(2)
        .find(|w| w[1].timestamp_ms <= w[0].timestamp_ms)
    {
        return Err(Error::InvalidInput(format!(
            "frame timestamps must increase ({} then {})",
            w[0].timestamp_ms, w[1].timestamp_ms
        )));
    }
    let side = config.scene_downsample;
    let mut cuts: Vec<u64> = Vec::new();
    let mut prev = thumbnail(&frames[0].image, side);
    for frame in &frames[1..] {
        let cur = thumbnail(&frame.image, side);
        let diff = frame_difference(&prev, &cur);
        let spaced = cuts
            .last()
            .is_none_or(|&last| frame.timestamp_ms - last >= config.min_cut_gap_ms);
        if diff > config.scene_diff_threshold && spaced {
            cuts.push(frame.timestamp_ms);
        }
        prev = cur;
    }
    Ok(SceneCutList { cut_times_ms: cuts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Luma;

    fn flat(ts: u64, level: u8) -> Frame {
        Frame {
            timestamp_ms: ts,
            image: DynamicImage::ImageLuma8(GrayImage::from_pixel(64, 48, Luma([level]))),
        }
    }

    #[test]
    fn identical_frames_have_no_cuts() {
        let frames: Vec<_> = (0..10).map(|i| flat(i * 1000, 90)).collect();
        let cuts = detect_scene_changes(&frames, &TimingConfig::default()).unwrap();
        assert!(cuts.cut_times_ms.is_empty());
    }

    #[test]
    fn black_to_white_is_one_cut() {
        let frames: Vec<_> = (0..8)
            .map(|i| flat(i * 1000, if i * 1000 >= 3000 { 255 } else { 0 }))
            .collect();
        let cuts = detect_scene_changes(&frames, &TimingConfig::default()).unwrap();
        assert_eq!(cuts.cut_times_ms, vec![3000]);
    }

    #[test]
    fn gradual_fade_stays_below_threshold() {
        // Each step brightens by 25 levels: 25 / 255 ≈ 0.098 < 0.15.
        let frames: Vec<_> = (0..11u64).map(|i| flat(i * 500, (i * 25) as u8)).collect();
        for w in frames.windows(2) {
            let a = w[0].image.to_luma8().get_pixel(0, 0)[0] as f64;
            let b = w[1].image.to_luma8().get_pixel(0, 0)[0] as f64;
            assert!((b - a).abs() / 255.0 < 0.15);
        }
        let cuts = detect_scene_changes(&frames, &TimingConfig::default()).unwrap();
        assert!(cuts.cut_times_ms.is_empty());
    }

    #[test]
    fn cuts_respect_min_gap() {
        let frames: Vec<_> = (0..6u64)
            .map(|i| flat(i * 400, if i % 2 == 0 { 0 } else { 255 }))
            .collect();
        let cuts = detect_scene_changes(&frames, &TimingConfig::default()).unwrap();
        assert_eq!(cuts.cut_times_ms, vec![400, 1600]);
    }

    #[test]
    fn needs_two_frames() {
        let err = detect_scene_changes(&[flat(0, 0)], &TimingConfig::default()).unwrap_err();
        assert_eq!(err.code(), "TooFewFrames");
    }
}
