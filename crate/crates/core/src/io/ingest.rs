use std::path::{Path, PathBuf};
use std::process::Command;

use super::frames::{FrameManifest, ManifestEntry};
use super::wav::read_wav;
use crate::model::{FrameRate, MediaRefs, VideoAsset, VideoId};
use crate::timing::{analyze, Analysis, TimingConfig};
use crate::{Error, Result};

/// Frame cadence requested from the decoder.
pub const INGEST_FPS: u32 = 1;

pub const AUDIO_FILE: &str = "audio.wav";
pub const MANIFEST_FILE: &str = "manifest.txt";

#[derive(Clone, Debug, Default)]
pub struct IngestOptions {
    /// Shell command template with `{in}`, `{out_wav}`, `{out_frames}` and
    /// `{fps}` placeholders. When absent the source must be a directory that
    /// already holds `audio.wav` and `manifest.txt`.
    pub decoder_command: Option<String>,
    pub title: Option<String>,
}

fn shell_quote(path: &Path) -> String {
    let s = path.to_string_lossy();
    format!("'{}'", s.replace('\'', r"'\''"))
}

pub fn render_decoder_command(
    template: &str,
    input: &Path,
    out_wav: &Path,
    out_frames: &Path,
) -> String {
    template
        .replace("{in}", &shell_quote(input))
        .replace("{out_wav}", &shell_quote(out_wav))
        .replace("{out_frames}", &shell_quote(out_frames))
        .replace("{fps}", &INGEST_FPS.to_string())
}

fn is_image(path: &Path) -> bool {
    matches!(
        path.extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref(),
        Some("png" | "jpg" | "jpeg" | "webp" | "bmp")
    )
}

/// Builds a manifest for decoder output: images in name order, one per
/// `1 / INGEST_FPS` seconds.
fn manifest_from_directory(dir: &Path) -> Result<FrameManifest> {
    let mut images: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && is_image(p))
        .collect();
    images.sort();
    Ok(FrameManifest {
        entries: images
            .into_iter()
            .enumerate()
            .map(|(i, path)| ManifestEntry {
                timestamp_ms: i as u64 * 1000 / INGEST_FPS as u64,
                path,
            })
            .collect(),
    })
}

/// Registers a video's media. Either runs the configured decoder into
/// `workdir/<id>/` or adopts a pre-extracted `audio.wav` + `manifest.txt`
/// directory as is. The returned asset has its id set; duration comes from
/// the WAV.
pub fn ingest_media(source: &Path, workdir: &Path, options: &IngestOptions) -> Result<VideoAsset> {
    if !source.exists() {
        return Err(Error::MissingMedia(source.to_owned()));
    }
    let id = VideoId(uuid::Uuid::new_v4().to_string());
    let (wav_path, manifest_path) = match &options.decoder_command {
        None => {
            let wav = source.join(AUDIO_FILE);
            let manifest = source.join(MANIFEST_FILE);
            for p in [&wav, &manifest] {
                if !p.is_file() {
                    return Err(Error::MissingMedia(p.clone()));
                }
            }
            (wav, manifest)
        }
        Some(template) => {
            let out_dir = workdir.join(id.as_str());
            let frames_dir = out_dir.join("frames");
            std::fs::create_dir_all(&frames_dir).map_err(|e| Error::io(&frames_dir, e))?;
            let wav = out_dir.join(AUDIO_FILE);
            let command = render_decoder_command(template, source, &wav, &frames_dir);
            log::info!("running decoder: {command}");
            let output = Command::new("sh")
                .arg("-c")
                .arg(&command)
                .output()
                .map_err(|e| Error::io("sh", e))?;
            if !output.status.success() {
                let mut text = String::from_utf8_lossy(&output.stdout).into_owned();
                text.push_str(&String::from_utf8_lossy(&output.stderr));
                return Err(Error::DecoderFailure {
                    status: output.status.to_string(),
                    output: text,
                });
            }
            if !wav.is_file() {
                return Err(Error::MissingMedia(wav));
            }
            let manifest = frames_dir.join(MANIFEST_FILE);
            if !manifest.is_file() {
                let listing = manifest_from_directory(&frames_dir)?;
                std::fs::write(&manifest, listing.render(&frames_dir))
                    .map_err(|e| Error::io(&manifest, e))?;
            }
            (wav, manifest)
        }
    };

    let audio = read_wav(&wav_path)?;
    let manifest = FrameManifest::load(&manifest_path)?;
    let duration_ms = audio.duration_ms();
    if duration_ms == 0 {
        return Err(Error::EmptyAudio);
    }
    let title = options.title.clone().unwrap_or_else(|| {
        source
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "untitled".into())
    });
    let absolute = |p: PathBuf| std::fs::canonicalize(&p).unwrap_or(p);
    Ok(VideoAsset {
        id,
        title,
        duration_ms,
        frame_rate: manifest.frame_rate().unwrap_or(FrameRate::default()),
        audio_sample_rate: audio.sample_rate,
        media_refs: MediaRefs {
            audio_wav: Some(absolute(wav_path)),
            frame_manifest: Some(absolute(manifest_path)),
        },
    })
}

/// Plans slots for an ingested video from its WAV and frame manifest.
pub fn analyze_video(video: &VideoAsset, config: &TimingConfig) -> Result<Analysis> {
    let wav = video.media_refs.audio_wav.as_ref().ok_or_else(|| {
        Error::MissingMedia(PathBuf::from(format!("<audio of video {}>", video.id)))
    })?;
    analyze_files(wav, video.media_refs.frame_manifest.as_deref(), config)
}

pub fn analyze_files(
    wav: &Path,
    manifest: Option<&Path>,
    config: &TimingConfig,
) -> Result<Analysis> {
    let audio = read_wav(wav)?;
    let frames = match manifest {
        Some(path) => FrameManifest::load(path)?.load_frames()?,
        None => Vec::new(),
    };
    analyze(&audio, &frames, config, None)
}
