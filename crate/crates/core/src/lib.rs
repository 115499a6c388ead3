//! Audio-description authoring core: the project model and store, timing
//! analysis, model-backed generation and revision, diffs and metrics, and
//! file formats.

pub mod config;
pub mod error;
pub mod genai;
pub mod io;
pub mod model;
pub mod revision;
pub mod store;
pub mod tags;
pub mod timing;

pub use error::{Error, Result};
pub use model::{
    AdSlot, Author, AuthorKind, Decision, Description, DescriptionId, EditKind, EditLogEntry,
    EditPayload, FrameRate, LogEntryId, PendingProposal, PromptCategory, Timestamp, Variation,
    VariationId, VideoAsset, VideoId,
};
pub use store::{SharedStore, Store};
pub use tags::{TagCategory, TagSet};
