use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::timing::AudioTrack;
use crate::{Error, Result};

fn wav_err(path: &Path, e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::InvalidInput(format!("{}: {other}", path.display())),
    }
}

/// Reads a WAV file into a mono track. Multi-channel input is averaged;
/// integer samples are scaled to `[-1, 1]`.
pub fn read_wav(path: &Path) -> Result<AudioTrack> {
    if !path.is_file() {
        return Err(Error::MissingMedia(path.to_owned()));
    }
    let mut reader = WavReader::open(path).map_err(|e| wav_err(path, e))?;
    let spec = reader.spec();
    let channels = spec.channels.max(1) as usize;
    let interleaved: Vec<f32> = match spec.sample_format {
        SampleFormat::Float => reader
            .samples::<f32>()
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| wav_err(path, e))?,
        SampleFormat::Int => {
            let scale = (1i64 << (spec.bits_per_sample - 1)) as f32;
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| v as f32 / scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| wav_err(path, e))?
        }
    };
    let mono = if channels == 1 {
        interleaved
    } else {
        interleaved
            .chunks(channels)
            .map(|frame| frame.iter().sum::<f32>() / channels as f32)
            .collect()
    };
    AudioTrack::new(mono, spec.sample_rate)
}

/// Writes a 16-bit little-endian mono WAV.
pub fn write_wav(path: &Path, audio: &AudioTrack) -> Result<()> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: audio.sample_rate,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut writer = WavWriter::create(path, spec).map_err(|e| wav_err(path, e))?;
    for &s in &audio.samples {
        let v = (s.clamp(-1.0, 1.0) * i16::MAX as f32).round() as i16;
        writer.write_sample(v).map_err(|e| wav_err(path, e))?;
    }
    writer.finalize().map_err(|e| wav_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_16_bit() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.wav");
        let samples: Vec<f32> = (0..480_000)
            .map(|i| ((i % 200) as f32 / 100.0) - 1.0)
            .collect();
        write_wav(&path, &AudioTrack::new(samples.clone(), 16_000).unwrap()).unwrap();
        let back = read_wav(&path).unwrap();
        assert_eq!(back.sample_rate, 16_000);
        assert_eq!(back.duration_ms(), 30_000);
        for (a, b) in samples.iter().zip(&back.samples) {
            assert!((a - b).abs() < 1e-4);
        }
    }

    #[test]
    fn missing_file() {
        let err = read_wav(Path::new("/nonexistent/x.wav")).unwrap_err();
        assert_eq!(err.code(), "MissingMedia");
    }
}
