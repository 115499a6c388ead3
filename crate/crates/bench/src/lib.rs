//! Seeded inputs for the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use adscribe_core::timing::{AudioTrack, Interval, SceneCutList, SignalKind, SignalTrack};

/// Sorted disjoint intervals covering roughly `density` of `[0, duration_ms)`.
fn random_intervals(rng: &mut ChaCha8Rng, duration_ms: u64, density: f64) -> Vec<Interval> {
    let mut out = Vec::new();
    let mut t = 0;
    while t < duration_ms {
        let len = rng.random_range(200..6_000);
        let gap = (len as f64 * (1.0 - density) / density) as u64 + 1;
        let start = t + rng.random_range(0..gap);
        let end = (start + len).min(duration_ms);
        if start < end {
            out.push(Interval::new(start, end));
        }
        t = end + 1;
    }
    out
}

/// Silence and no-speech tracks plus scene cuts for a video of `duration_ms`.
pub fn signal_fixture(seed: u64, duration_ms: u64) -> (SignalTrack, SignalTrack, SceneCutList) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let silence = SignalTrack::new(
        SignalKind::Silence,
        random_intervals(&mut rng, duration_ms, 0.3),
    )
    .unwrap();
    let no_speech = SignalTrack::new(
        SignalKind::NoSpeech,
        random_intervals(&mut rng, duration_ms, 0.5),
    )
    .unwrap();
    let mut cuts = Vec::new();
    let mut t = rng.random_range(1_000..5_000);
    while t < duration_ms {
        cuts.push(t);
        t += rng.random_range(1_000..20_000);
    }
    (silence, no_speech, SceneCutList::new(cuts, 500).unwrap())
}

/// Mono 16 kHz audio alternating tone and silence.
pub fn audio_fixture(seed: u64, duration_ms: u64) -> AudioTrack {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rate = 16_000u64;
    let mut samples = Vec::with_capacity((duration_ms * rate / 1000) as usize);
    let mut loud = true;
    while (samples.len() as u64) < duration_ms * rate / 1000 {
        let run = rng.random_range(300..4_000) * rate / 1000;
        for i in 0..run {
            let v = if loud {
                0.3 * (2.0 * std::f32::consts::PI * 220.0 * i as f32 / rate as f32).sin()
            } else {
                0.0
            };
            samples.push(v);
        }
        loud = !loud;
    }
    samples.truncate((duration_ms * rate / 1000) as usize);
    AudioTrack::new(samples, rate as u32).unwrap()
}

const WORDS: &[&str] = &[
    "a", "chef", "slices", "onions", "on", "the", "wooden", "board", "while", "steam", "rises",
    "from", "pot", "she", "smiles", "and", "turns", "toward", "window", "light", "falls", "across",
];

/// A sentence of `words` words and a revision of it with about a fifth of
/// the words replaced, dropped or added.
pub fn sentence_pair(seed: u64, words: usize) -> (String, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let old: Vec<&str> = (0..words)
        .map(|_| WORDS[rng.random_range(0..WORDS.len())])
        .collect();
    let mut new = Vec::with_capacity(words);
    for w in &old {
        match rng.random_range(0..15) {
            0 => {}
            1 => new.push(WORDS[rng.random_range(0..WORDS.len())]),
            2 => {
                new.push(w);
                new.push(WORDS[rng.random_range(0..WORDS.len())]);
            }
            _ => new.push(w),
        }
    }
    (old.join(" "), new.join(" "))
}
