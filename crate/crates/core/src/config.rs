//! The TOML configuration file shared by the command line and the service.
//!
//! ```toml
//! [timing]
//! silence_threshold_dbfs = -45.0
//!
//! [ingest]
//! decoder_command = "ffmpeg -i {in} -ac 1 -ar 16000 -c:a pcm_s16le {out_wav} -vf fps={fps} {out_frames}/%05d.png"
//!
//! [generation]
//! batch_size = 5
//!
//! [[provider]]
//! name = "vision"
//! endpoint = "https://models.example.net/v1/complete"
//! api_key_env = "ADSCRIBE_API_KEY"
//! model = "vision-large"
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::genai::{
    GenerationOptions, HttpProvider, MockProvider, ModelProvider, ProviderConfig,
    DEFAULT_BATCH_SIZE,
};
use crate::timing::TimingConfig;
use crate::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    /// See [`crate::io::IngestOptions::decoder_command`].
    pub decoder_command: Option<String>,
    /// Where decoder output goes; defaults to a `media` directory next to
    /// the project file.
    pub workdir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    pub batch_size: usize,
    pub max_tokens: u32,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            batch_size: DEFAULT_BATCH_SIZE,
            max_tokens: 1024,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub timing: TimingConfig,
    pub ingest: IngestConfig,
    pub generation: GenerationConfig,
    #[serde(rename = "provider")]
    pub providers: Vec<ProviderConfig>,
}

impl AppConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: AppConfig =
            toml::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))?;
        config.timing.validate()?;
        if config.generation.batch_size == 0 {
            return Err(Error::InvalidInput(
                "config: generation.batch_size must be at least 1".into(),
            ));
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Loads `path` when given, defaults otherwise.
    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }

    /// Where ingested media for the project at `project` is written.
    pub fn media_dir(&self, project: &Path) -> PathBuf {
        self.ingest.workdir.clone().unwrap_or_else(|| {
            project
                .parent()
                .filter(|p| !p.as_os_str().is_empty())
                .unwrap_or(Path::new("."))
                .join("media")
        })
    }

    /// The named provider, or the first one when no name is given.
    pub fn provider(&self, name: Option<&str>) -> Result<&ProviderConfig> {
        match name {
            Some(n) => self.providers.iter().find(|p| p.name == n),
            None => self.providers.first(),
        }
        .ok_or_else(|| {
            Error::InvalidInput(match name {
                Some(n) => format!("no provider named `{n}` in config"),
                None => "no model provider configured".into(),
            })
        })
    }

    /// Builds the provider to use: the offline mock when `mock` is set,
    /// otherwise the configured HTTP provider. Returns generation options
    /// that match it.
    pub fn make_provider(
        &self,
        name: Option<&str>,
        mock: bool,
    ) -> Result<(Arc<dyn ModelProvider>, GenerationOptions)> {
        let mut options = GenerationOptions {
            batch_size: self.generation.batch_size,
            max_tokens: self.generation.max_tokens,
            ..GenerationOptions::default()
        };
        if mock {
            options.model = "mock".into();
            return Ok((Arc::new(MockProvider::new()), options));
        }
        let cfg = self.provider(name)?;
        options.model.clone_from(&cfg.model);
        options.max_tokens = cfg.max_tokens;
        Ok((Arc::new(HttpProvider::new(cfg.clone())?), options))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_file() {
        let cfg = AppConfig::parse(
            "[timing]\nmin_slot_ms = 1500\n\n[ingest]\ndecoder_command = \"true\"\n\n[[provider]]\nname = \"a\"\nendpoint = \"http://localhost:1/x\"\napi_key_env = \"K\"\nmodel = \"m\"\n",
        )
        .unwrap();
        assert_eq!(cfg.timing.min_slot_ms, 1500);
        assert_eq!(cfg.timing.max_slot_ms, 15_000);
        assert_eq!(cfg.ingest.decoder_command.as_deref(), Some("true"));
        let p = cfg.provider(None).unwrap();
        assert_eq!((p.timeout_secs, p.max_tokens), (120, 1024));
        assert!(cfg.provider(Some("b")).is_err());
    }

    #[test]
    fn rejects_bad_files() {
        assert!(AppConfig::parse("[[provider]]\nname = 1").is_err());
        assert!(AppConfig::parse("[nonsense]\n").is_err());
        assert!(AppConfig::parse("[timing]\nsegment_len_ms = 0\n").is_err());
        assert_eq!(AppConfig::parse("").unwrap(), AppConfig::default());
        assert_eq!(
            AppConfig::default().media_dir(Path::new("p.json")),
            Path::new("./media")
        );
        assert_eq!(
            AppConfig::default().media_dir(Path::new("/x/p.json")),
            Path::new("/x/media")
        );
    }

    #[test]
    fn mock_needs_no_provider_entry() {
        let (p, o) = AppConfig::default().make_provider(None, true).unwrap();
        assert_eq!((p.name(), o.batch_size), ("mock", 5));
        assert!(AppConfig::default().make_provider(None, false).is_err());
    }
}
