//! Where descriptions can go: silence, no-speech and scene-change detection,
//! and the slot planner that combines them.

pub mod interval;
mod plan;
mod scene;
mod silence;
mod vad;

use serde::{Deserialize, Serialize};

pub use interval::{intersect, split_long_interval, Interval};
pub use plan::{cut_windows, plan_slots, AdPlan, PlannedSlot, PriorityLevel};
pub use scene::{detect_scene_changes, frame_difference, Frame, SceneCutList};
pub use silence::detect_silence;
pub use vad::{detect_no_speech, zero_crossing_rate, VadProvider};

use crate::{Error, Result};

/// Detector thresholds and planner limits. Durations are milliseconds,
/// levels are dBFS (0 dB = full-scale RMS of 1.0).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TimingConfig {
    pub segment_len_ms: u64,
    pub max_slot_ms: u64,
    pub min_slot_ms: u64,
    pub silence_threshold_dbfs: f64,
    pub silence_window_ms: u64,
    pub silence_hop_ms: u64,
    pub silence_min_ms: u64,
    pub silence_merge_gap_ms: u64,
    pub vad_energy_threshold_dbfs: f64,
    /// Zero crossings per sample; frames outside this band are not speech.
    pub vad_zcr_range: (f64, f64),
    pub vad_frame_ms: u64,
    /// Mean absolute pixel difference on `[0, 1]` above which a cut fires.
    pub scene_diff_threshold: f64,
    /// Side of the square grayscale thumbnail frames are compared at.
    pub scene_downsample: u32,
    pub min_cut_gap_ms: u64,
    pub cut_window_ms: u64,
}

impl Default for TimingConfig {
    fn default() -> Self {
        TimingConfig {
            segment_len_ms: 15_000,
            max_slot_ms: 15_000,
            min_slot_ms: 1_000,
            silence_threshold_dbfs: -40.0,
            silence_window_ms: 30,
            silence_hop_ms: 10,
            silence_min_ms: 300,
            silence_merge_gap_ms: 100,
            vad_energy_threshold_dbfs: -35.0,
            vad_zcr_range: (0.02, 0.35),
            vad_frame_ms: 30,
            scene_diff_threshold: 0.15,
            scene_downsample: 32,
            min_cut_gap_ms: 1_000,
            cut_window_ms: 2_000,
        }
    }
}

impl TimingConfig {
    pub fn validate(&self) -> Result<()> {
        let durations = [
            ("segment_len_ms", self.segment_len_ms),
            ("max_slot_ms", self.max_slot_ms),
            ("min_slot_ms", self.min_slot_ms),
            ("silence_window_ms", self.silence_window_ms),
            ("silence_hop_ms", self.silence_hop_ms),
            ("vad_frame_ms", self.vad_frame_ms),
            ("cut_window_ms", self.cut_window_ms),
        ];
        for (name, v) in durations {
            if v == 0 {
                return Err(Error::InvalidInput(format!("{name} must be positive")));
            }
        }
        if self.min_slot_ms > self.max_slot_ms {
            return Err(Error::InvalidInput(
                "min_slot_ms must not exceed max_slot_ms".into(),
            ));
        }
        if self.scene_downsample == 0 {
            return Err(Error::InvalidInput(
                "scene_downsample must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Mono PCM normalized to `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct AudioTrack {
    pub samples: Vec<f32>,
    pub sample_rate: u32,
}

impl AudioTrack {
    pub fn new(samples: Vec<f32>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidInput("sample rate must be positive".into()));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidInput(format!("sample {i} is not finite")));
        }
        Ok(AudioTrack {
            samples,
            sample_rate,
        })
    }

    pub fn duration_ms(&self) -> u64 {
        self.samples.len() as u64 * 1000 / self.sample_rate as u64
    }

    /// First sample index at or after `ms`.
    pub(crate) fn sample_at(&self, ms: u64) -> usize {
        ((ms as u128 * self.sample_rate as u128).div_ceil(1000) as usize).min(self.samples.len())
    }

    /// Samples covering `[start_ms, end_ms)`.
    pub(crate) fn span(&self, start_ms: u64, end_ms: u64) -> &[f32] {
        &self.samples[self.sample_at(start_ms)..self.sample_at(end_ms)]
    }
}

/// RMS level of a block in dBFS; `-inf` for digital silence or an empty block.
pub fn rms_dbfs(block: &[f32]) -> f64 {
    if block.is_empty() {
        return f64::NEG_INFINITY;
    }
    let mean_sq = block.iter().map(|&s| (s as f64) * (s as f64)).sum::<f64>() / block.len() as f64;
    10.0 * mean_sq.log10()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SignalKind {
    Silence,
    NoSpeech,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalTrack {
    pub kind: SignalKind,
    pub intervals: Vec<Interval>,
}

impl SignalTrack {
    pub fn new(kind: SignalKind, intervals: Vec<Interval>) -> Result<Self> {
        if !interval::is_sorted_disjoint(&intervals) {
            return Err(Error::InvalidInput(format!(
                "{kind:?} intervals must be sorted, disjoint and non-empty"
            )));
        }
        Ok(SignalTrack { kind, intervals })
    }

    pub fn empty(kind: SignalKind) -> Self {
        SignalTrack {
            kind,
            intervals: Vec::new(),
        }
    }
}

/// Everything the planner saw, and the plan it made.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Analysis {
    pub duration_ms: u64,
    pub silence: SignalTrack,
    pub no_speech: SignalTrack,
    pub cuts: SceneCutList,
    pub plan: AdPlan,
}

/// Runs the three detectors and the planner. Fewer than two frames means
/// no scene cuts rather than an error.
pub fn analyze(
    audio: &AudioTrack,
    frames: &[Frame],
    config: &TimingConfig,
    vad: Option<&dyn VadProvider>,
) -> Result<Analysis> {
    let duration_ms = audio.duration_ms();
    let silence = detect_silence(audio, config)?;
    let no_speech = detect_no_speech(audio, config, vad)?;
    let cuts = if frames.len() < 2 {
        SceneCutList::default()
    } else {
        detect_scene_changes(frames, config)?
    };
    let plan = plan_slots(&silence, &no_speech, &cuts, duration_ms, config)?;
    Ok(Analysis {
        duration_ms,
        silence,
        no_speech,
        cuts,
        plan,
    })
}

/// Shared post-processing for the audio detectors: bridge short gaps and
/// drop short runs.
pub(crate) fn tidy(list: Vec<Interval>, config: &TimingConfig) -> Vec<Interval> {
    let merged = interval::bridge_gaps(&interval::normalize(list), config.silence_merge_gap_ms);
    interval::drop_shorter_than(&merged, config.silence_min_ms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = TimingConfig::default();
        c.validate().unwrap();
        assert_eq!(c.segment_len_ms, 15_000);
        assert_eq!(c.max_slot_ms, 15_000);
    }

    #[test]
    fn rms_levels() {
        assert_eq!(rms_dbfs(&[0.0; 8]), f64::NEG_INFINITY);
        assert!((rms_dbfs(&[1.0, -1.0]) - 0.0).abs() < 1e-12);
        assert!((rms_dbfs(&[0.1; 4]) + 20.0).abs() < 1e-6);
    }

    #[test]
    fn audio_rejects_nan() {
        assert!(AudioTrack::new(vec![0.0, f32::NAN], 8000).is_err());
        assert!(AudioTrack::new(vec![0.0], 0).is_err());
    }
}
