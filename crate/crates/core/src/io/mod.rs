//! Persistence, WebVTT interchange and media ingestion.

pub mod frames;
pub mod ingest;
pub mod project;
pub mod wav;
pub mod webvtt;

pub use frames::FrameManifest;
pub use ingest::{analyze_files, analyze_video, ingest_media, IngestOptions};
pub use project::{load_project, save_project};
pub use wav::{read_wav, write_wav};
pub use webvtt::{export_webvtt, import_webvtt};
