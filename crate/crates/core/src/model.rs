//! Domain types shared by every module.

use std::fmt;
use std::path::PathBuf;

use chrono::{DateTime, SecondsFormat, TimeZone, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use crate::tags::{PredefinedTag, TagCategory, TagSet, TagSetViolation};

/// Longest slot the planner will emit, and the analysis segment length.
pub const MAX_PLANNED_SLOT_MS: u64 = 15_000;

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                $name(s)
            }
        }
    };
}

id_type!(VideoId);
id_type!(VariationId);
id_type!(DescriptionId);
id_type!(LogEntryId);

/// Microsecond-resolution UTC instant, serialized as fixed-width RFC 3339.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(pub i64);

impl Timestamp {
    pub fn from_micros(micros: i64) -> Self {
        Timestamp(micros)
    }

    /// Wall-clock time.
    pub fn now() -> Self {
        Timestamp(Utc::now().timestamp_micros())
    }

    pub fn as_micros(self) -> i64 {
        self.0
    }

    pub fn to_datetime(self) -> DateTime<Utc> {
        Utc.timestamp_micros(self.0)
            .single()
            .unwrap_or(DateTime::<Utc>::MIN_UTC)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(
            &self
                .to_datetime()
                .to_rfc3339_opts(SecondsFormat::Micros, true),
        )
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        DateTime::parse_from_rfc3339(&raw)
            .map(|dt| Timestamp(dt.with_timezone(&Utc).timestamp_micros()))
            .map_err(serde::de::Error::custom)
    }
}

/// Frames per second as a reduced positive fraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameRate {
    pub num: u32,
    pub den: u32,
}

impl FrameRate {
    pub fn new(num: u32, den: u32) -> Option<Self> {
        if num == 0 || den == 0 {
            return None;
        }
        let g = gcd(num, den);
        Some(FrameRate {
            num: num / g,
            den: den / g,
        })
    }

    pub fn fps(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Index of the frame displayed at `ms`.
    pub fn frame_index_at(self, ms: u64) -> u64 {
        (ms as u128 * self.num as u128 / (1000 * self.den as u128)) as u64
    }
}

impl Default for FrameRate {
    fn default() -> Self {
        FrameRate { num: 1, den: 1 }
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MediaRefs {
    pub audio_wav: Option<PathBuf>,
    pub frame_manifest: Option<PathBuf>,
}

impl MediaRefs {
    pub fn is_empty(&self) -> bool {
        self.audio_wav.is_none() && self.frame_manifest.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VideoAsset {
    pub id: VideoId,
    pub title: String,
    pub duration_ms: u64,
    pub frame_rate: FrameRate,
    pub audio_sample_rate: u32,
    pub media_refs: MediaRefs,
}

/// Interval on the video timeline in which one description is voiced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AdSlot {
    pub start_ms: u64,
    pub end_ms: u64,
}

impl AdSlot {
    pub const fn new(start_ms: u64, end_ms: u64) -> Self {
        AdSlot { start_ms, end_ms }
    }

    pub fn len_ms(self) -> u64 {
        self.end_ms.saturating_sub(self.start_ms)
    }

    pub fn check_bounds(self, duration_ms: u64) -> crate::Result<()> {
        if self.start_ms < self.end_ms && self.end_ms <= duration_ms {
            Ok(())
        } else {
            Err(crate::Error::OutOfBounds {
                start_ms: self.start_ms,
                end_ms: self.end_ms,
                duration_ms,
            })
        }
    }

    pub fn overlaps(self, other: AdSlot) -> bool {
        self.start_ms < other.end_ms && other.start_ms < self.end_ms
    }
}

impl fmt::Display for AdSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start_ms, self.end_ms)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AuthorKind {
    Ai,
    Human,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Author {
    pub kind: AuthorKind,
    pub name: String,
}

impl Author {
    pub fn human(name: impl Into<String>) -> Self {
        Author {
            kind: AuthorKind::Human,
            name: name.into(),
        }
    }

    pub fn ai(name: impl Into<String>) -> Self {
        Author {
            kind: AuthorKind::Ai,
            name: name.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Description {
    pub id: DescriptionId,
    pub variation_id: VariationId,
    pub slot: AdSlot,
    pub text: String,
    pub author_kind: AuthorKind,
    pub author_name: String,
    pub created_at: Timestamp,
    pub modified_at: Timestamp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guideline_rationale: Option<String>,
}

/// Non-fatal conditions on a description's slot, reported alongside it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotWarning {
    OverlapsPrevious,
    OverlapsNext,
    ExceedsMaxLength,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variation {
    pub id: VariationId,
    pub video_id: VideoId,
    pub name: String,
    pub author_name: String,
    pub parent_id: Option<VariationId>,
    pub fork_count: u32,
    pub tags: TagSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom_instructions: Option<String>,
    pub created_at: Timestamp,
    /// Descriptions as they stood when this variation was forked. Empty for
    /// variations created from scratch.
    #[serde(default)]
    pub snapshot: Vec<SnapshotEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub description_id: DescriptionId,
    pub slot: AdSlot,
    pub text: String,
}

/// Manually assigned label for a revision prompt.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PromptCategory {
    Simplify,
    Shorten,
    Remove,
    Replace,
    Addition,
    #[serde(rename = "Text on screen")]
    TextOnScreen,
    Correction,
    #[serde(rename = "Description Flow")]
    DescriptionFlow,
    Language,
    #[serde(rename = "Reduce Detail")]
    ReduceDetail,
    Query,
    Miscellaneous,
}

impl PromptCategory {
    pub const ALL: [PromptCategory; 12] = [
        PromptCategory::Simplify,
        PromptCategory::Shorten,
        PromptCategory::Remove,
        PromptCategory::Replace,
        PromptCategory::Addition,
        PromptCategory::TextOnScreen,
        PromptCategory::Correction,
        PromptCategory::DescriptionFlow,
        PromptCategory::Language,
        PromptCategory::ReduceDetail,
        PromptCategory::Query,
        PromptCategory::Miscellaneous,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PromptCategory::Simplify => "Simplify",
            PromptCategory::Shorten => "Shorten",
            PromptCategory::Remove => "Remove",
            PromptCategory::Replace => "Replace",
            PromptCategory::Addition => "Addition",
            PromptCategory::TextOnScreen => "Text on screen",
            PromptCategory::Correction => "Correction",
            PromptCategory::DescriptionFlow => "Description Flow",
            PromptCategory::Language => "Language",
            PromptCategory::ReduceDetail => "Reduce Detail",
            PromptCategory::Query => "Query",
            PromptCategory::Miscellaneous => "Miscellaneous",
        }
    }

    pub fn definition(self) -> &'static str {
        match self {
            PromptCategory::Simplify => {
                "Requests to make the description easier to understand, or remove unnecessary details."
            }
            PromptCategory::Shorten => "Requests to make the description shorter.",
            PromptCategory::Remove => {
                "Requests to remove specific elements (e.g., objects, emotions)."
            }
            PromptCategory::Replace => "Requests to replace a word or phrase with another.",
            PromptCategory::Addition => "Requests to add specific visual details.",
            PromptCategory::TextOnScreen => {
                "Requests to add specific text on screen to description."
            }
            PromptCategory::Correction => {
                "Comments by the user based on any hallucination in the description."
            }
            PromptCategory::DescriptionFlow => {
                "Requests related to order, or structuring text differently."
            }
            PromptCategory::Language => {
                "Requests related to translating or structuring sentences based on language requirements (e.g., active voice, emotional descriptors)."
            }
            PromptCategory::ReduceDetail => "Requests to reduce unnecessary detail on objects.",
            PromptCategory::Query => "Questions asked by describers on elements in the video.",
            PromptCategory::Miscellaneous => {
                "Requests that cannot be categorized in others (e.g., requests to edit timestamps, add new descriptions)."
            }
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(name.trim()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EditKind {
    PromptEvent,
    ManualTextEdit,
    SlotAdjust,
    AddDescription,
    DeleteDescription,
    TagEdit,
    Decision,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EditPayload {
    PromptEvent {
        prompt: String,
        targets: Vec<DescriptionId>,
    },
    ManualTextEdit {
        description_id: DescriptionId,
        old_text: String,
        new_text: String,
        author_name: String,
    },
    SlotAdjust {
        description_id: DescriptionId,
        old_slot: AdSlot,
        new_slot: AdSlot,
    },
    AddDescription {
        description_id: DescriptionId,
        slot: AdSlot,
        text: String,
        author_kind: AuthorKind,
        author_name: String,
    },
    DeleteDescription {
        description_id: DescriptionId,
        slot: AdSlot,
        text: String,
    },
    TagEdit {
        old_tags: TagSet,
        new_tags: TagSet,
    },
    Decision {
        prompt_event_id: LogEntryId,
        description_id: DescriptionId,
        accepted: bool,
        previous_text: String,
        proposed_text: String,
    },
}

impl EditPayload {
    pub fn kind(&self) -> EditKind {
        match self {
            EditPayload::PromptEvent { .. } => EditKind::PromptEvent,
            EditPayload::ManualTextEdit { .. } => EditKind::ManualTextEdit,
            EditPayload::SlotAdjust { .. } => EditKind::SlotAdjust,
            EditPayload::AddDescription { .. } => EditKind::AddDescription,
            EditPayload::DeleteDescription { .. } => EditKind::DeleteDescription,
            EditPayload::TagEdit { .. } => EditKind::TagEdit,
            EditPayload::Decision { .. } => EditKind::Decision,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditLogEntry {
    pub id: LogEntryId,
    pub variation_id: VariationId,
    pub payload: EditPayload,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_category: Option<PromptCategory>,
    pub at: Timestamp,
}

/// A model-suggested replacement awaiting an accept/reject decision.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendingProposal {
    pub description_id: DescriptionId,
    pub prompt_event_id: LogEntryId,
    pub proposed_text: String,
    pub created_at: Timestamp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Decision {
    Accept,
    Reject,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timestamp_serializes_fixed_width() {
        let ts = Timestamp::from_micros(1_700_000_000_000_000);
        let json = serde_json::to_string(&ts).unwrap();
        assert_eq!(json, "\"2023-11-14T22:13:20.000000Z\"");
        let back: Timestamp = serde_json::from_str(&json).unwrap();
        assert_eq!(back, ts);
    }

    #[test]
    fn frame_rate_reduces_and_indexes() {
        let fr = FrameRate::new(60000, 2002).unwrap();
        assert_eq!((fr.num, fr.den), (30000, 1001));
        assert_eq!(FrameRate::new(25, 1).unwrap().frame_index_at(2000), 50);
        assert!(FrameRate::new(0, 1).is_none());
    }

    #[test]
    fn slot_bounds() {
        assert!(AdSlot::new(0, 10).check_bounds(10).is_ok());
        assert!(AdSlot::new(5, 5).check_bounds(10).is_err());
        assert!(AdSlot::new(5, 11).check_bounds(10).is_err());
    }

    #[test]
    fn prompt_categories_round_trip_by_name() {
        for c in PromptCategory::ALL {
            assert_eq!(PromptCategory::from_name(c.name()), Some(c));
        }
        assert_eq!(
            PromptCategory::from_name("text on screen"),
            Some(PromptCategory::TextOnScreen)
        );
    }
}
