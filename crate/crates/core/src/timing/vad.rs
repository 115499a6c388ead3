use super::interval::{self, Interval};
use super::{rms_dbfs, tidy, AudioTrack, SignalKind, SignalTrack, TimingConfig};
use crate::{Error, Result};

/// External voice-activity detector. Returns the spans that contain speech.
pub trait VadProvider: Send + Sync {
    fn name(&self) -> &str;
    fn speech_intervals(&self, audio: &AudioTrack) -> std::result::Result<Vec<Interval>, String>;
}

/// Sign changes between consecutive samples, per sample.
pub fn zero_crossing_rate(block: &[f32]) -> f64 {
    if block.is_empty() {
        return 0.0;
    }
    let crossings = block
        .windows(2)
        .filter(|w| (w[0] >= 0.0) != (w[1] >= 0.0))
        .count();
    crossings as f64 / block.len() as f64
}

fn is_speech_frame(block: &[f32], config: &TimingConfig) -> bool {
    let (lo, hi) = config.vad_zcr_range;
    let zcr = zero_crossing_rate(block);
    rms_dbfs(block) >= config.vad_energy_threshold_dbfs && zcr >= lo && zcr <= hi
}

/// Spans without speech: the complement of the detected speech, tidied the
/// same way as silence.
///
/// Without a provider, a frame counts as speech when it is loud enough and
/// its zero-crossing rate falls inside the configured band.
pub fn detect_no_speech(
    audio: &AudioTrack,
    config: &TimingConfig,
    vad: Option<&dyn VadProvider>,
) -> Result<SignalTrack> {
    config.validate()?;
    let duration = audio.duration_ms();
    if audio.samples.is_empty() || duration == 0 {
        return Err(Error::EmptyAudio);
    }
    let speech = match vad {
        Some(provider) => {
            let raw = provider
                .speech_intervals(audio)
                .map_err(|e| Error::ProviderFailure(format!("{}: {e}", provider.name())))?;
            interval::clip(&interval::normalize(raw), Interval::new(0, duration))
        }
        None => {
            let mut speech = Vec::new();
            let mut start = 0;
            while start < duration {
                let end = (start + config.vad_frame_ms).min(duration);
                let block = audio.span(start, end);
                if !block.is_empty() && is_speech_frame(block, config) {
                    speech.push(Interval::new(start, end));
                }
                start = end;
            }
            interval::normalize(speech)
        }
    };
    Ok(SignalTrack {
        kind: SignalKind::NoSpeech,
        intervals: tidy(interval::complement(&speech, duration), config),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f32::consts::TAU;

    const SR: u32 = 16_000;

    fn tone(ms: u64, freq: f32, amp: f32) -> Vec<f32> {
        let n = (ms * SR as u64 / 1000) as usize;
        (0..n)
            .map(|i| amp * (TAU * freq * i as f32 / SR as f32).sin())
            .collect()
    }

    struct Fixed(Vec<Interval>);

    impl VadProvider for Fixed {
        fn name(&self) -> &str {
            "fixed"
        }
        fn speech_intervals(&self, _: &AudioTrack) -> std::result::Result<Vec<Interval>, String> {
            Ok(self.0.clone())
        }
    }

    struct Broken;

    impl VadProvider for Broken {
        fn name(&self) -> &str {
            "broken"
        }
        fn speech_intervals(&self, _: &AudioTrack) -> std::result::Result<Vec<Interval>, String> {
            Err("model not loaded".into())
        }
    }

    #[test]
    fn zeros_have_no_speech() {
        let audio = AudioTrack::new(vec![0.0; 80_000], SR).unwrap();
        let t = detect_no_speech(&audio, &TimingConfig::default(), None).unwrap();
        assert_eq!(t.intervals, vec![Interval::new(0, 5000)]);
    }

    #[test]
    fn low_tone_is_outside_speech_band() {
        // A 100 Hz sine crosses zero 200 times a second: 200 / 16000 = 0.0125
        // crossings per sample, below the 0.02 lower bound.
        let samples = tone(3000, 100.0, 0.9);
        let zcr = zero_crossing_rate(&samples[..480]);
        assert!((zcr - 0.0125).abs() < 0.0025, "zcr {zcr}");
        let audio = AudioTrack::new(samples, SR).unwrap();
        let t = detect_no_speech(&audio, &TimingConfig::default(), None).unwrap();
        assert_eq!(t.intervals, vec![Interval::new(0, 3000)]);
    }

    #[test]
    fn mid_tone_reads_as_speech() {
        // 440 Hz: 880 / 16000 = 0.055 crossings per sample, inside the band.
        let mut samples = vec![0.0; 32_000];
        samples.extend(tone(2000, 440.0, 0.5));
        samples.extend(vec![0.0; 32_000]);
        let audio = AudioTrack::new(samples, SR).unwrap();
        let t = detect_no_speech(&audio, &TimingConfig::default(), None).unwrap();
        assert_eq!(
            t.intervals,
            vec![Interval::new(0, 2010), Interval::new(3990, 6000)]
        );
    }

    #[test]
    fn provider_speech_is_complemented() {
        let audio = AudioTrack::new(vec![0.0; 160_000], SR).unwrap();
        let vad = Fixed(vec![Interval::new(2000, 5000)]);
        let t = detect_no_speech(&audio, &TimingConfig::default(), Some(&vad)).unwrap();
        assert_eq!(
            t.intervals,
            vec![Interval::new(0, 2000), Interval::new(5000, 10_000)]
        );
    }

    #[test]
    fn provider_failure_surfaces() {
        let audio = AudioTrack::new(vec![0.0; 16_000], SR).unwrap();
        let err = detect_no_speech(&audio, &TimingConfig::default(), Some(&Broken)).unwrap_err();
        assert_eq!(err.code(), "ProviderFailure");
    }
}
