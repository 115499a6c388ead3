use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "adscribe",
    version,
    about = "Audio-description authoring from the command line"
)]
pub struct Cli {
    /// Project file to read and update.
    #[arg(long, global = true, default_value = "adscribe.json")]
    pub project: PathBuf,

    /// TOML configuration shared with `serve`.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output style. `structured` prints JSON.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ProviderArgs {
    /// Use the offline mock provider.
    #[arg(long)]
    pub mock: bool,

    /// Name of the `[[provider]]` entry to use (first one by default).
    #[arg(long, conflicts_with = "mock")]
    pub provider: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decode a video (or adopt a pre-extracted media directory) and
    /// register it.
    Ingest {
        source: PathBuf,
        #[arg(long)]
        title: Option<String>,
    },

    /// Register a video with no media, for text-only work.
    AddVideo {
        #[arg(long)]
        title: String,
        #[arg(long)]
        duration_ms: u64,
    },

    /// List videos and their variations.
    List,

    /// Compute description slots from audio and frames.
    Plan {
        /// 16-bit PCM WAV file.
        #[arg(long, required_unless_present = "video", conflicts_with = "video")]
        audio: Option<PathBuf>,
        /// Frame manifest (`<ms> <image path>` per line).
        #[arg(long, requires = "audio")]
        frames: Option<PathBuf>,
        /// Plan an ingested video of the project instead.
        #[arg(long)]
        video: Option<String>,
    },

    /// Generate descriptions with a model, into a new or existing variation.
    Generate {
        /// Existing variation to fill.
        #[arg(long, conflicts_with_all = ["video", "name", "instructions"])]
        variation: Option<String>,
        /// Video to create a new variation for.
        #[arg(long, required_unless_present = "variation", requires = "name")]
        video: Option<String>,
        /// Name of the new variation.
        #[arg(long)]
        name: Option<String>,
        #[arg(long, default_value = "cli")]
        author: String,
        /// Custom instructions for the new variation.
        #[arg(long)]
        instructions: Option<String>,
        /// Slots as `start-end` ms pairs, e.g. `0-3000,5000-8000`. Planned
        /// from the video's media when omitted.
        #[arg(long, value_delimiter = ',')]
        slots: Vec<String>,
        /// Skip automatic tagging afterwards.
        #[arg(long)]
        no_tags: bool,
        #[command(flatten)]
        provider: ProviderArgs,
    },

    /// Ask the model to revise descriptions; answers become pending proposals.
    Revise {
        #[arg(long)]
        variation: String,
        #[arg(long)]
        prompt: String,
        /// Description ids to revise (repeatable).
        #[arg(long = "description", required_unless_present = "all")]
        descriptions: Vec<String>,
        /// Revise every description of the variation.
        #[arg(long, conflicts_with = "descriptions")]
        all: bool,
        /// Label for the prompt, e.g. `Shorten` or `Text on screen`.
        #[arg(long)]
        category: Option<String>,
        #[command(flatten)]
        provider: ProviderArgs,
    },

    /// Accept or reject a pending proposal.
    Resolve {
        #[arg(long)]
        description: String,
        #[arg(long, value_enum)]
        decision: DecisionArg,
    },

    /// Copy a variation into a new child variation.
    Fork {
        #[arg(long)]
        variation: String,
        #[arg(long, default_value = "cli")]
        author: String,
        #[arg(long)]
        name: Option<String>,
    },

    /// Show, set or generate a variation's tags.
    Tags {
        #[arg(long)]
        variation: String,
        /// Predefined tag as `Category=Keyword` (repeatable).
        #[arg(long = "keyword")]
        keywords: Vec<String>,
        /// Free-form tag (repeatable).
        #[arg(long = "custom")]
        custom: Vec<String>,
        /// Ask the model for tags.
        #[arg(long, conflicts_with_all = ["keywords", "custom"])]
        generate: bool,
        #[command(flatten)]
        provider: ProviderArgs,
    },

    /// Show a variation with its descriptions and pending proposals.
    Show {
        #[arg(long)]
        variation: String,
    },

    /// Write a variation as WebVTT.
    Export {
        #[arg(long)]
        variation: String,
        /// Output file; standard output by default.
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Create a variation from a WebVTT file.
    Import {
        file: PathBuf,
        #[arg(long)]
        video: String,
        #[arg(long)]
        name: String,
        #[arg(long, default_value = "cli")]
        author: String,
    },

    /// Edit and similarity metrics of a variation against another.
    Metrics {
        /// The revised variation.
        #[arg(long)]
        variation: String,
        /// The original variation.
        #[arg(long)]
        against: String,
        /// JSON file mapping description ids to `{semantic, stylistic}`
        /// embedding vectors.
        #[arg(long)]
        embeddings: Option<PathBuf>,
    },

    /// Run the HTTP service on the project.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
        #[command(flatten)]
        provider: ProviderArgs,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DecisionArg {
    Accept,
    Reject,
}
