use std::path::PathBuf;

use thiserror::Error;

use crate::model::TagSetViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown video `{0}`")]
    UnknownVideo(String),
    #[error("unknown variation `{0}`")]
    UnknownVariation(String),
    #[error("unknown description `{0}`")]
    UnknownDescription(String),
    #[error("a variation named `{0}` already exists for this video")]
    DuplicateName(String),
    #[error("description text is empty")]
    EmptyText,
    #[error("variation name is empty")]
    EmptyName,
    #[error("slot [{start_ms}, {end_ms}) is outside the video (duration {duration_ms} ms)")]
    OutOfBounds {
        start_ms: u64,
        end_ms: u64,
        duration_ms: u64,
    },
    #[error("ordering violation: {0}")]
    OrderingViolation(String),
    #[error("invalid tag set: {0}")]
    InvalidTagSet(TagSetViolation),
    #[error("variation `{0}` has forks and cannot be deleted")]
    HasChildren(String),

    #[error("audio track is empty")]
    EmptyAudio,
    #[error("need at least two frames, got {0}")]
    TooFewFrames(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("model provider failed: {0}")]
    ProviderFailure(String),
    #[error("could not parse model response: {0}")]
    UnparseableResponse(String),
    #[error("prompt is empty")]
    EmptyPrompt,
    #[error("no pending proposal for description `{0}`")]
    NoPendingProposal(String),

    #[error("vector dimensions differ ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("cosine similarity is undefined for a zero vector")]
    ZeroVector,

    #[error("malformed WebVTT at line {line}, column {column}: {message}")]
    MalformedWebVtt {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("project format version {found} is not supported (max {supported})")]
    VersionUnsupported { found: u32, supported: u32 },
    #[error("invariant violated at {path}: {message}")]
    InvariantViolation { path: String, message: String },
    #[error("decoder failed with status {status}: {output}")]
    DecoderFailure { status: String, output: String },
    #[error("missing media: {0}")]
    MissingMedia(PathBuf),
    #[error("I/O failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("serialization failure: {0}")]
    Serialization(String),
}

impl Error {
    /// Machine-readable name, shared by the HTTP API and the CLI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::UnknownVideo(_) => "UnknownVideo",
            Error::UnknownVariation(_) => "UnknownVariation",
            Error::UnknownDescription(_) => "UnknownDescription",
            Error::DuplicateName(_) => "DuplicateName",
            Error::EmptyText => "EmptyText",
            Error::EmptyName => "EmptyName",
            Error::OutOfBounds { .. } => "OutOfBounds",
            Error::OrderingViolation(_) => "OrderingViolation",
            Error::InvalidTagSet(_) => "InvalidTagSet",
            Error::HasChildren(_) => "HasChildren",
            Error::EmptyAudio => "EmptyAudio",
            Error::TooFewFrames(_) => "TooFewFrames",
            Error::InvalidInput(_) => "InvalidInput",
            Error::ProviderFailure(_) => "ProviderFailure",
            Error::UnparseableResponse(_) => "UnparseableResponse",
            Error::EmptyPrompt => "EmptyPrompt",
            Error::NoPendingProposal(_) => "NoPendingProposal",
            Error::DimensionMismatch(..) => "DimensionMismatch",
            Error::ZeroVector => "ZeroVector",
            Error::MalformedWebVtt { .. } => "MalformedWebVTT",
            Error::VersionUnsupported { .. } => "VersionUnsupported",
            Error::InvariantViolation { .. } => "InvariantViolation",
            Error::DecoderFailure { .. } => "DecoderFailure",
            Error::MissingMedia(_) => "MissingMedia",
            Error::Io { .. } => "IoFailure",
            Error::Serialization(_) => "IoFailure",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
