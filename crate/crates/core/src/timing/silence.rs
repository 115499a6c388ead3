use super::{
    interval::Interval, rms_dbfs, tidy, AudioTrack, SignalKind, SignalTrack, TimingConfig,
};
use crate::{Error, Result};

/// Marks every analysis window whose RMS level is below the silence
/// threshold, unions the windows' time spans, bridges short gaps and drops
/// short runs.
///
/// Windows start every `silence_hop_ms` and span `silence_window_ms`; the last
/// windows are truncated at the end of the track.
pub fn detect_silence(audio: &AudioTrack, config: &TimingConfig) -> Result<SignalTrack> {
    config.validate()?;
    let duration = audio.duration_ms();
    if audio.samples.is_empty() || duration == 0 {
        return Err(Error::EmptyAudio);
    }
    let mut silent = Vec::new();
    let mut start = 0;
    while start < duration {
        let end = (start + config.silence_window_ms).min(duration);
        let block = audio.span(start, end);
        if !block.is_empty() && rms_dbfs(block) < config.silence_threshold_dbfs {
            silent.push(Interval::new(start, end));
        }
        start += config.silence_hop_ms;
    }
    Ok(SignalTrack {
        kind: SignalKind::Silence,
        intervals: tidy(silent, config),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f32::consts::TAU;

    const SR: u32 = 16_000;

    fn sine(ms: u64, freq: f32, amp: f32) -> Vec<f32> {
        let n = ms as usize * SR as usize / 1000;
        (0..n)
            .map(|i| amp * (TAU * freq * i as f32 / SR as f32).sin())
            .collect()
    }

    #[test]
    fn zeros_are_one_interval() {
        let audio = AudioTrack::new(vec![0.0; 160_000], SR).unwrap();
        let t = detect_silence(&audio, &TimingConfig::default()).unwrap();
        assert_eq!(t.intervals, vec![Interval::new(0, 10_000)]);
    }

    #[test]
    fn loud_sine_has_no_silence() {
        let audio = AudioTrack::new(sine(10_000, 440.0, 1.0), SR).unwrap();
        let t = detect_silence(&audio, &TimingConfig::default()).unwrap();
        assert!(t.intervals.is_empty());
    }

    /// Independent windowed-RMS oracle: evaluates every hop position with a
    /// direct sum and reports which hop cells are covered by a quiet window.
    fn oracle(samples: &[f32], cfg: &TimingConfig) -> Vec<bool> {
        let dur = samples.len() as u64 * 1000 / SR as u64;
        let mut covered = vec![false; dur as usize];
        let mut s = 0;
        while s < dur {
            let e = (s + cfg.silence_window_ms).min(dur);
            let a = (s * SR as u64 / 1000) as usize;
            let b = (e * SR as u64 / 1000) as usize;
            let energy: f64 = samples[a..b].iter().map(|x| (*x as f64).powi(2)).sum();
            let db = 10.0 * (energy / (b - a) as f64).log10();
            if db < cfg.silence_threshold_dbfs {
                covered[s as usize..e as usize]
                    .iter_mut()
                    .for_each(|c| *c = true);
            }
            s += cfg.silence_hop_ms;
        }
        covered
    }

    #[test]
    fn sine_then_zeros() {
        let mut samples = sine(4_000, 440.0, 0.8);
        samples.extend(std::iter::repeat_n(0.0, 64_000));
        let cfg = TimingConfig::default();
        let audio = AudioTrack::new(samples.clone(), SR).unwrap();
        let t = detect_silence(&audio, &cfg).unwrap();
        assert_eq!(t.intervals.len(), 1);
        let got = t.intervals[0];
        assert!(got.start_ms.abs_diff(4000) <= cfg.silence_window_ms);
        assert!(got.end_ms.abs_diff(8000) <= cfg.silence_window_ms);

        let covered = oracle(&samples, &cfg);
        let first = covered.iter().position(|&c| c).unwrap() as u64;
        let last = covered.iter().rposition(|&c| c).unwrap() as u64 + 1;
        assert_eq!(got, Interval::new(first, last));
    }

    #[test]
    fn short_dip_is_dropped_and_short_gap_bridged() {
        let cfg = TimingConfig::default();
        // 200 ms of silence between tones: shorter than silence_min_ms.
        let mut s = sine(1000, 440.0, 0.5);
        s.extend(std::iter::repeat_n(0.0, 3_200));
        s.extend(sine(1000, 440.0, 0.5));
        let t = detect_silence(&AudioTrack::new(s, SR).unwrap(), &cfg).unwrap();
        assert!(t.intervals.is_empty());

        // 1 s silence, 50 ms blip, 1 s silence: the blip is bridged.
        let mut s = vec![0.0; 16_000];
        s.extend(sine(50, 440.0, 0.5));
        s.extend(std::iter::repeat_n(0.0, 16_000));
        let t = detect_silence(&AudioTrack::new(s, SR).unwrap(), &cfg).unwrap();
        assert_eq!(t.intervals, vec![Interval::new(0, 2050)]);
    }

    #[test]
    fn empty_audio_errors() {
        let audio = AudioTrack::new(vec![], SR).unwrap();
        assert!(matches!(
            detect_silence(&audio, &TimingConfig::default()),
            Err(Error::EmptyAudio)
        ));
    }
}
