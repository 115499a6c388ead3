//! The project store: videos, variations, descriptions, the edit log and
//! pending proposals.
//!
//! [`Store`] is a plain value mutated through `&mut self`; every operation
//! validates before touching state, so a failed call leaves the store as it
//! was. [`SharedStore`] wraps it behind a single-writer commit point for the
//! service and for concurrent callers.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use parking_lot::{Mutex, RwLock, RwLockReadGuard};
use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::model::*;
use crate::{Error, Result};

/// Source of creation/modification times. Always strictly increasing so that
/// lineage order is total even when operations land within one clock tick.
#[derive(Clone, Debug)]
enum Clock {
    System { last: i64 },
    Stepped { next: i64, step: i64 },
}

impl Clock {
    fn now(&mut self) -> Timestamp {
        match self {
            Clock::System { last } => {
                let wall = chrono::Utc::now().timestamp_micros();
                *last = wall.max(*last + 1);
                Timestamp(*last)
            }
            Clock::Stepped { next, step } => {
                let t = *next;
                *next += *step;
                Timestamp(t)
            }
        }
    }
}

#[derive(Clone, Debug)]
enum IdSource {
    Random,
    Seeded(Box<ChaCha8Rng>),
}

impl IdSource {
    fn next(&mut self) -> String {
        let mut bytes = [0u8; 16];
        match self {
            IdSource::Random => rand::rng().fill_bytes(&mut bytes),
            IdSource::Seeded(rng) => rng.fill_bytes(&mut bytes),
        }
        uuid::Builder::from_random_bytes(bytes)
            .into_uuid()
            .to_string()
    }
}

#[derive(Clone, Debug)]
pub struct Store {
    pub(crate) videos: BTreeMap<VideoId, VideoAsset>,
    pub(crate) variations: BTreeMap<VariationId, Variation>,
    pub(crate) descriptions: BTreeMap<DescriptionId, Description>,
    pub(crate) log: Vec<EditLogEntry>,
    pub(crate) proposals: BTreeMap<DescriptionId, PendingProposal>,
    clock: Clock,
    ids: IdSource,
}

impl Default for Store {
    fn default() -> Self {
        Store::new()
    }
}

/// Accept/reject tally for one prompt event.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DecisionStats {
    pub targets: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub pending: usize,
}

impl Store {
    pub fn new() -> Self {
        Store {
            videos: BTreeMap::new(),
            variations: BTreeMap::new(),
            descriptions: BTreeMap::new(),
            log: Vec::new(),
            proposals: BTreeMap::new(),
            clock: Clock::System { last: 0 },
            ids: IdSource::Random,
        }
    }

    /// A store whose ids and timestamps are a pure function of `seed`, for
    /// reproducible runs.
    pub fn deterministic(seed: u64) -> Self {
        let mut store = Store::new();
        store.make_deterministic(seed);
        store
    }

    /// Switches id and clock sources to seeded ones. Timestamps continue
    /// after the latest instant already in the store.
    pub fn make_deterministic(&mut self, seed: u64) {
        let base = self
            .latest_timestamp()
            .map_or(1_700_000_000_000_000, |t| t.0 + 1);
        self.clock = Clock::Stepped {
            next: base,
            step: 1_000,
        };
        self.ids = IdSource::Seeded(Box::new(ChaCha8Rng::seed_from_u64(seed)));
    }

    pub(crate) fn from_parts(
        videos: Vec<VideoAsset>,
        variations: Vec<Variation>,
        descriptions: Vec<Description>,
        log: Vec<EditLogEntry>,
        proposals: Vec<PendingProposal>,
    ) -> Self {
        let mut store = Store {
            videos: videos.into_iter().map(|v| (v.id.clone(), v)).collect(),
            variations: variations.into_iter().map(|v| (v.id.clone(), v)).collect(),
            descriptions: descriptions
                .into_iter()
                .map(|d| (d.id.clone(), d))
                .collect(),
            log,
            proposals: proposals
                .into_iter()
                .map(|p| (p.description_id.clone(), p))
                .collect(),
            clock: Clock::System { last: 0 },
            ids: IdSource::Random,
        };
        if let Some(t) = store.latest_timestamp() {
            store.clock = Clock::System { last: t.0 };
        }
        store
    }

    fn latest_timestamp(&self) -> Option<Timestamp> {
        let variations = self.variations.values().map(|v| v.created_at);
        let descriptions = self
            .descriptions
            .values()
            .flat_map(|d| [d.created_at, d.modified_at]);
        let log = self.log.iter().map(|e| e.at);
        let proposals = self.proposals.values().map(|p| p.created_at);
        variations
            .chain(descriptions)
            .chain(log)
            .chain(proposals)
            .max()
    }

    fn now(&mut self) -> Timestamp {
        self.clock.now()
    }

    /// The store's notion of the present, without advancing its clock. Ages
    /// of stored items should be measured against this, since a
    /// deterministic store runs on a synthetic timeline.
    pub fn current_time(&self) -> Timestamp {
        match &self.clock {
            Clock::System { last } => Timestamp(chrono::Utc::now().timestamp_micros().max(*last)),
            Clock::Stepped { next, .. } => Timestamp(*next),
        }
    }

    fn new_id(&mut self) -> String {
        self.ids.next()
    }

    // ---- queries -------------------------------------------------------

    pub fn videos(&self) -> impl Iterator<Item = &VideoAsset> {
        self.videos.values()
    }

    pub fn video(&self, id: &VideoId) -> Result<&VideoAsset> {
        self.videos
            .get(id)
            .ok_or_else(|| Error::UnknownVideo(id.to_string()))
    }

    pub fn variations(&self) -> impl Iterator<Item = &Variation> {
        self.variations.values()
    }

    pub fn variation(&self, id: &VariationId) -> Result<&Variation> {
        self.variations
            .get(id)
            .ok_or_else(|| Error::UnknownVariation(id.to_string()))
    }

    /// Variations of a video in creation order.
    pub fn variations_of(&self, video: &VideoId) -> Vec<&Variation> {
        let mut out: Vec<_> = self
            .variations
            .values()
            .filter(|v| &v.video_id == video)
            .collect();
        out.sort_by(|a, b| (a.created_at, &a.id).cmp(&(b.created_at, &b.id)));
        out
    }

    pub fn children_of(&self, id: &VariationId) -> Vec<&Variation> {
        self.variations
            .values()
            .filter(|v| v.parent_id.as_ref() == Some(id))
            .collect()
    }

    pub fn description(&self, id: &DescriptionId) -> Result<&Description> {
        self.descriptions
            .get(id)
            .ok_or_else(|| Error::UnknownDescription(id.to_string()))
    }

    /// Descriptions of a variation ordered by slot start.
    pub fn descriptions_of(&self, variation: &VariationId) -> Vec<&Description> {
        let mut out: Vec<_> = self
            .descriptions
            .values()
            .filter(|d| &d.variation_id == variation)
            .collect();
        out.sort_by_key(|d| d.slot.start_ms);
        out
    }

    pub fn log(&self) -> &[EditLogEntry] {
        &self.log
    }

    pub fn log_of(&self, variation: &VariationId) -> Vec<&EditLogEntry> {
        self.log
            .iter()
            .filter(|e| &e.variation_id == variation)
            .collect()
    }

    pub fn pending_proposal(&self, description: &DescriptionId) -> Option<&PendingProposal> {
        self.proposals.get(description)
    }

    pub fn pending_proposals(&self) -> impl Iterator<Item = &PendingProposal> {
        self.proposals.values()
    }

    pub fn video_of_variation(&self, id: &VariationId) -> Result<&VideoAsset> {
        let variation = self.variation(id)?;
        self.video(&variation.video_id)
    }

    pub fn slot_warnings(&self, id: &DescriptionId) -> Result<Vec<SlotWarning>> {
        let desc = self.description(id)?;
        let siblings = self.descriptions_of(&desc.variation_id);
        let idx = siblings
            .iter()
            .position(|d| d.id == desc.id)
            .expect("description is listed under its own variation");
        let mut warnings = Vec::new();
        if idx > 0 && siblings[idx - 1].slot.overlaps(desc.slot) {
            warnings.push(SlotWarning::OverlapsPrevious);
        }
        if let Some(next) = siblings.get(idx + 1) {
            if next.slot.overlaps(desc.slot) {
                warnings.push(SlotWarning::OverlapsNext);
            }
        }
        if desc.slot.len_ms() > MAX_PLANNED_SLOT_MS {
            warnings.push(SlotWarning::ExceedsMaxLength);
        }
        Ok(warnings)
    }

    pub fn prompt_event_stats(&self, event: &LogEntryId) -> Result<DecisionStats> {
        let entry = self
            .log
            .iter()
            .find(|e| &e.id == event)
            .ok_or_else(|| Error::InvalidInput(format!("unknown log entry `{event}`")))?;
        let EditPayload::PromptEvent { targets, .. } = &entry.payload else {
            return Err(Error::InvalidInput(format!(
                "`{event}` is not a prompt event"
            )));
        };
        let mut stats = DecisionStats {
            targets: targets.len(),
            ..DecisionStats::default()
        };
        for e in &self.log {
            if let EditPayload::Decision {
                prompt_event_id,
                accepted,
                ..
            } = &e.payload
            {
                if prompt_event_id == event {
                    if *accepted {
                        stats.accepted += 1;
                    } else {
                        stats.rejected += 1;
                    }
                }
            }
        }
        stats.pending = self
            .proposals
            .values()
            .filter(|p| &p.prompt_event_id == event)
            .count();
        Ok(stats)
    }

    /// Rebuilds a variation's descriptions from its fork-time snapshot and
    /// its own edit log, in timeline order.
    pub fn replay(&self, variation: &VariationId) -> Result<Vec<SnapshotEntry>> {
        let v = self.variation(variation)?;
        let mut state: BTreeMap<DescriptionId, (AdSlot, String)> = v
            .snapshot
            .iter()
            .map(|s| (s.description_id.clone(), (s.slot, s.text.clone())))
            .collect();
        let missing = |id: &DescriptionId| Error::InvariantViolation {
            path: format!("edit_log[{variation}]"),
            message: format!("entry references description `{id}` absent at that point"),
        };
        for entry in self.log.iter().filter(|e| &e.variation_id == variation) {
            match &entry.payload {
                EditPayload::AddDescription {
                    description_id,
                    slot,
                    text,
                    ..
                } => {
                    state.insert(description_id.clone(), (*slot, text.clone()));
                }
                EditPayload::DeleteDescription { description_id, .. } => {
                    state
                        .remove(description_id)
                        .ok_or_else(|| missing(description_id))?;
                }
                EditPayload::ManualTextEdit {
                    description_id,
                    new_text,
                    ..
                } => {
                    let d = state
                        .get_mut(description_id)
                        .ok_or_else(|| missing(description_id))?;
                    d.1 = new_text.clone();
                }
                EditPayload::SlotAdjust {
                    description_id,
                    new_slot,
                    ..
                } => {
                    let d = state
                        .get_mut(description_id)
                        .ok_or_else(|| missing(description_id))?;
                    d.0 = *new_slot;
                }
                EditPayload::Decision {
                    description_id,
                    accepted: true,
                    proposed_text,
                    ..
                } => {
                    let d = state
                        .get_mut(description_id)
                        .ok_or_else(|| missing(description_id))?;
                    d.1 = proposed_text.clone();
                }
                EditPayload::Decision { .. }
                | EditPayload::PromptEvent { .. }
                | EditPayload::TagEdit { .. } => {}
            }
        }
        let mut out: Vec<_> = state
            .into_iter()
            .map(|(description_id, (slot, text))| SnapshotEntry {
                description_id,
                slot,
                text,
            })
            .collect();
        out.sort_by_key(|s| s.slot.start_ms);
        Ok(out)
    }

    /// Current descriptions in the same shape as [`Store::replay`] output.
    pub fn current_entries(&self, variation: &VariationId) -> Vec<SnapshotEntry> {
        self.descriptions_of(variation)
            .into_iter()
            .map(|d| SnapshotEntry {
                description_id: d.id.clone(),
                slot: d.slot,
                text: d.text.clone(),
            })
            .collect()
    }

    // ---- mutations -----------------------------------------------------

    /// Registers a video. A fresh id is assigned when `asset.id` is empty.
    pub fn insert_video(&mut self, mut asset: VideoAsset) -> Result<VideoAsset> {
        if asset.id.0.is_empty() {
            asset.id = VideoId(self.new_id());
        }
        if asset.duration_ms == 0 {
            return Err(Error::InvalidInput(
                "video duration must be positive".into(),
            ));
        }
        if asset.audio_sample_rate == 0 {
            return Err(Error::InvalidInput(
                "audio sample rate must be positive".into(),
            ));
        }
        if self.videos.contains_key(&asset.id) {
            return Err(Error::InvalidInput(format!(
                "video `{}` already exists",
                asset.id
            )));
        }
        self.videos.insert(asset.id.clone(), asset.clone());
        Ok(asset)
    }

    /// Registers a video with no media (text-only project).
    pub fn add_text_only_video(&mut self, title: &str, duration_ms: u64) -> Result<VideoAsset> {
        self.insert_video(VideoAsset {
            id: VideoId(String::new()),
            title: title.to_owned(),
            duration_ms,
            frame_rate: FrameRate::default(),
            audio_sample_rate: 16_000,
            media_refs: MediaRefs::default(),
        })
    }

    fn check_name_free(&self, video: &VideoId, name: &str) -> Result<()> {
        if self
            .variations
            .values()
            .any(|v| &v.video_id == video && v.name == name)
        {
            return Err(Error::DuplicateName(name.to_owned()));
        }
        Ok(())
    }

    pub fn create_variation(
        &mut self,
        video_id: &VideoId,
        name: &str,
        author_name: &str,
        custom_instructions: Option<&str>,
    ) -> Result<Variation> {
        self.video(video_id)?;
        let name = name.trim();
        if name.is_empty() {
            return Err(Error::EmptyName);
        }
        self.check_name_free(video_id, name)?;
        let variation = Variation {
            id: VariationId(self.new_id()),
            video_id: video_id.clone(),
            name: name.to_owned(),
            author_name: author_name.to_owned(),
            parent_id: None,
            fork_count: 0,
            tags: TagSet::default(),
            custom_instructions: custom_instructions
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_owned),
            created_at: self.now(),
            snapshot: Vec::new(),
        };
        self.variations
            .insert(variation.id.clone(), variation.clone());
        Ok(variation)
    }

    /// Copies a variation's descriptions and tags into a new child and bumps
    /// the parent's fork count, in one step.
    pub fn fork_variation(
        &mut self,
        parent_id: &VariationId,
        new_author_name: &str,
        new_name: Option<&str>,
    ) -> Result<Variation> {
        let parent = self.variation(parent_id)?.clone();
        let name = match new_name.map(str::trim).filter(|n| !n.is_empty()) {
            Some(n) => {
                self.check_name_free(&parent.video_id, n)?;
                n.to_owned()
            }
            None => {
                let mut n = parent.fork_count + 1;
                loop {
                    let candidate = format!("{} fork {n}", parent.name);
                    if self.check_name_free(&parent.video_id, &candidate).is_ok() {
                        break candidate;
                    }
                    n += 1;
                }
            }
        };

        let child_id = VariationId(self.new_id());
        let created_at = self.now();
        let sources: Vec<Description> = self
            .descriptions_of(parent_id)
            .into_iter()
            .cloned()
            .collect();
        let mut copies = Vec::with_capacity(sources.len());
        for src in sources {
            copies.push(Description {
                id: DescriptionId(self.new_id()),
                variation_id: child_id.clone(),
                created_at,
                modified_at: created_at,
                ..src
            });
        }
        let child = Variation {
            id: child_id.clone(),
            video_id: parent.video_id.clone(),
            name,
            author_name: new_author_name.to_owned(),
            parent_id: Some(parent_id.clone()),
            fork_count: 0,
            tags: parent.tags.clone(),
            custom_instructions: parent.custom_instructions.clone(),
            created_at,
            snapshot: copies
                .iter()
                .map(|d| SnapshotEntry {
                    description_id: d.id.clone(),
                    slot: d.slot,
                    text: d.text.clone(),
                })
                .collect(),
        };

        self.variations
            .get_mut(parent_id)
            .expect("parent checked above")
            .fork_count += 1;
        for d in copies {
            self.descriptions.insert(d.id.clone(), d);
        }
        self.variations.insert(child_id, child.clone());
        Ok(child)
    }

    /// Deletes a variation that has no forks, with its descriptions, log
    /// entries and proposals.
    pub fn delete_variation(&mut self, id: &VariationId) -> Result<()> {
        let variation = self.variation(id)?.clone();
        if variation.fork_count > 0 {
            return Err(Error::HasChildren(id.to_string()));
        }
        if let Some(parent) = &variation.parent_id {
            if let Some(p) = self.variations.get_mut(parent) {
                p.fork_count -= 1;
            }
        }
        self.variations.remove(id);
        let doomed: Vec<_> = self
            .descriptions
            .values()
            .filter(|d| &d.variation_id == id)
            .map(|d| d.id.clone())
            .collect();
        for d in &doomed {
            self.descriptions.remove(d);
            self.proposals.remove(d);
        }
        self.log.retain(|e| &e.variation_id != id);
        Ok(())
    }

    fn append_log(
        &mut self,
        variation_id: &VariationId,
        payload: EditPayload,
        prompt_category: Option<PromptCategory>,
        at: Timestamp,
    ) -> LogEntryId {
        let id = LogEntryId(self.new_id());
        self.log.push(EditLogEntry {
            id: id.clone(),
            variation_id: variation_id.clone(),
            payload,
            prompt_category,
            at,
        });
        id
    }

    pub fn add_description(
        &mut self,
        variation_id: &VariationId,
        slot: AdSlot,
        text: &str,
        author: &Author,
    ) -> Result<Description> {
        self.add_description_with_rationale(variation_id, slot, text, author, None)
    }

    pub fn add_description_with_rationale(
        &mut self,
        variation_id: &VariationId,
        slot: AdSlot,
        text: &str,
        author: &Author,
        guideline_rationale: Option<String>,
    ) -> Result<Description> {
        let video = self.video_of_variation(variation_id)?;
        slot.check_bounds(video.duration_ms)?;
        let text = checked_text(text)?;
        if let Some(clash) = self
            .descriptions
            .values()
            .find(|d| &d.variation_id == variation_id && d.slot.start_ms == slot.start_ms)
        {
            return Err(Error::OrderingViolation(format!(
                "description `{}` already starts at {} ms",
                clash.id, slot.start_ms
            )));
        }
        let now = self.now();
        let desc = Description {
            id: DescriptionId(self.new_id()),
            variation_id: variation_id.clone(),
            slot,
            text: text.clone(),
            author_kind: author.kind,
            author_name: author.name.clone(),
            created_at: now,
            modified_at: now,
            guideline_rationale,
        };
        self.append_log(
            variation_id,
            EditPayload::AddDescription {
                description_id: desc.id.clone(),
                slot,
                text,
                author_kind: author.kind,
                author_name: author.name.clone(),
            },
            None,
            now,
        );
        self.descriptions.insert(desc.id.clone(), desc.clone());
        Ok(desc)
    }

    pub fn delete_description(&mut self, id: &DescriptionId) -> Result<()> {
        let desc = self.description(id)?.clone();
        let now = self.now();
        self.append_log(
            &desc.variation_id,
            EditPayload::DeleteDescription {
                description_id: desc.id.clone(),
                slot: desc.slot,
                text: desc.text.clone(),
            },
            None,
            now,
        );
        self.descriptions.remove(id);
        self.proposals.remove(id);
        Ok(())
    }

    pub fn edit_description_text(
        &mut self,
        id: &DescriptionId,
        new_text: &str,
        author_name: &str,
    ) -> Result<Description> {
        let desc = self.description(id)?.clone();
        let new_text = checked_text(new_text)?;
        let now = self.now();
        self.append_log(
            &desc.variation_id,
            EditPayload::ManualTextEdit {
                description_id: id.clone(),
                old_text: desc.text.clone(),
                new_text: new_text.clone(),
                author_name: author_name.to_owned(),
            },
            None,
            now,
        );
        let d = self.descriptions.get_mut(id).expect("checked above");
        d.text = new_text;
        d.modified_at = now;
        Ok(d.clone())
    }

    /// Moves a description's slot. The new start must stay strictly between
    /// the neighbouring starts; overlaps are allowed and surface as
    /// [`SlotWarning`]s.
    pub fn adjust_slot(&mut self, id: &DescriptionId, new_slot: AdSlot) -> Result<Description> {
        let desc = self.description(id)?.clone();
        let video = self.video_of_variation(&desc.variation_id)?;
        new_slot.check_bounds(video.duration_ms)?;
        let siblings = self.descriptions_of(&desc.variation_id);
        let idx = siblings.iter().position(|d| d.id == *id).expect("listed");
        if idx > 0 && new_slot.start_ms <= siblings[idx - 1].slot.start_ms {
            return Err(Error::OrderingViolation(format!(
                "start {} ms is not after the previous description's start {} ms",
                new_slot.start_ms,
                siblings[idx - 1].slot.start_ms
            )));
        }
        if let Some(next) = siblings.get(idx + 1) {
            if new_slot.start_ms >= next.slot.start_ms {
                return Err(Error::OrderingViolation(format!(
                    "start {} ms is not before the next description's start {} ms",
                    new_slot.start_ms, next.slot.start_ms
                )));
            }
        }
        let now = self.now();
        self.append_log(
            &desc.variation_id,
            EditPayload::SlotAdjust {
                description_id: id.clone(),
                old_slot: desc.slot,
                new_slot,
            },
            None,
            now,
        );
        let d = self.descriptions.get_mut(id).expect("checked above");
        d.slot = new_slot;
        d.modified_at = now;
        Ok(d.clone())
    }

    pub fn set_tags(&mut self, variation_id: &VariationId, tags: TagSet) -> Result<Variation> {
        let old = self.variation(variation_id)?.tags.clone();
        tags.validate().map_err(Error::InvalidTagSet)?;
        let now = self.now();
        self.append_log(
            variation_id,
            EditPayload::TagEdit {
                old_tags: old,
                new_tags: tags.clone(),
            },
            None,
            now,
        );
        let v = self
            .variations
            .get_mut(variation_id)
            .expect("checked above");
        v.tags = tags;
        Ok(v.clone())
    }

    /// Logs a revision prompt and parks the returned proposals. A newer
    /// proposal for the same description supersedes the older one.
    pub fn record_prompt_event(
        &mut self,
        variation_id: &VariationId,
        prompt: &str,
        targets: &[DescriptionId],
        category: Option<PromptCategory>,
        proposals: Vec<(DescriptionId, String)>,
    ) -> Result<LogEntryId> {
        self.variation(variation_id)?;
        if prompt.trim().is_empty() {
            return Err(Error::EmptyPrompt);
        }
        for t in targets {
            let d = self.description(t)?;
            if &d.variation_id != variation_id {
                return Err(Error::UnknownDescription(t.to_string()));
            }
        }
        for (id, text) in &proposals {
            if !targets.contains(id) {
                return Err(Error::InvalidInput(format!(
                    "proposal for `{id}` which is not a prompt target"
                )));
            }
            checked_text(text)?;
        }
        let now = self.now();
        let event = self.append_log(
            variation_id,
            EditPayload::PromptEvent {
                prompt: prompt.to_owned(),
                targets: targets.to_vec(),
            },
            category,
            now,
        );
        for (description_id, proposed_text) in proposals {
            self.proposals.insert(
                description_id.clone(),
                PendingProposal {
                    description_id,
                    prompt_event_id: event.clone(),
                    proposed_text: proposed_text.trim().to_owned(),
                    created_at: now,
                },
            );
        }
        Ok(event)
    }

    /// Applies or discards the pending proposal for a description. Each
    /// proposal can be resolved once.
    pub fn resolve_proposal(
        &mut self,
        description_id: &DescriptionId,
        decision: Decision,
    ) -> Result<Description> {
        let desc = self.description(description_id)?.clone();
        let proposal = self
            .proposals
            .remove(description_id)
            .ok_or_else(|| Error::NoPendingProposal(description_id.to_string()))?;
        let now = self.now();
        let accepted = decision == Decision::Accept;
        self.append_log(
            &desc.variation_id,
            EditPayload::Decision {
                prompt_event_id: proposal.prompt_event_id,
                description_id: description_id.clone(),
                accepted,
                previous_text: desc.text.clone(),
                proposed_text: proposal.proposed_text.clone(),
            },
            None,
            now,
        );
        let d = self.descriptions.get_mut(description_id).expect("checked");
        if accepted {
            d.text = proposal.proposed_text;
            d.modified_at = now;
        }
        Ok(d.clone())
    }

    /// Drops proposals created before `cutoff`. Returns how many were dropped.
    pub fn expire_proposals(&mut self, cutoff: Timestamp) -> usize {
        let before = self.proposals.len();
        self.proposals.retain(|_, p| p.created_at >= cutoff);
        before - self.proposals.len()
    }

    // ---- validation ----------------------------------------------------

    /// Checks every type invariant, reporting the first violation with a
    /// path into the project structure.
    pub fn validate(&self) -> Result<()> {
        let fail = |path: String, message: String| Err(Error::InvariantViolation { path, message });

        for (id, video) in &self.videos {
            let path = format!("videos[{id}]");
            if video.frame_rate.num == 0 || video.frame_rate.den == 0 {
                return fail(path, "frame_rate must be positive".into());
            }
            if video.audio_sample_rate == 0 {
                return fail(path, "audio_sample_rate must be positive".into());
            }
            if video.duration_ms == 0 && self.variations.values().any(|v| &v.video_id == id) {
                return fail(path, "duration_ms must be positive".into());
            }
        }

        for (id, v) in &self.variations {
            let path = format!("variations[{id}]");
            if !self.videos.contains_key(&v.video_id) {
                return fail(path, format!("unknown video `{}`", v.video_id));
            }
            if v.name.trim().is_empty() {
                return fail(path, "name is empty".into());
            }
            if self
                .variations
                .values()
                .any(|w| w.id != v.id && w.video_id == v.video_id && w.name == v.name)
            {
                return fail(path, format!("name `{}` is not unique", v.name));
            }
            if let Some(p) = &v.parent_id {
                let Some(parent) = self.variations.get(p) else {
                    return fail(path, format!("unknown parent `{p}`"));
                };
                if parent.created_at >= v.created_at {
                    return fail(path, "parent is not older than child".into());
                }
            }
            let children = self.children_of(id).len();
            if v.fork_count as usize != children {
                return fail(
                    format!("{path}.fork_count"),
                    format!(
                        "is {} but {children} variations name it as parent",
                        v.fork_count
                    ),
                );
            }
            if let Err(e) = v.tags.validate() {
                return fail(format!("{path}.tags"), e.to_string());
            }
            // Walk the lineage; more steps than variations means a cycle.
            let mut cursor = v.parent_id.as_ref();
            let mut steps = 0;
            while let Some(p) = cursor {
                steps += 1;
                if steps > self.variations.len() {
                    return fail(format!("{path}.parent_id"), "lineage has a cycle".into());
                }
                cursor = self.variations.get(p).and_then(|x| x.parent_id.as_ref());
            }
        }

        for (id, d) in &self.descriptions {
            let path = format!("descriptions[{id}]");
            let Some(v) = self.variations.get(&d.variation_id) else {
                return fail(path, format!("unknown variation `{}`", d.variation_id));
            };
            if d.text.trim().is_empty() {
                return fail(format!("{path}.text"), "is empty".into());
            }
            let duration = self.videos[&v.video_id].duration_ms;
            if let Err(e) = d.slot.check_bounds(duration) {
                return fail(format!("{path}.slot"), e.to_string());
            }
        }
        for v in self.variations.keys() {
            let list = self.descriptions_of(v);
            for pair in list.windows(2) {
                if pair[0].slot.start_ms >= pair[1].slot.start_ms {
                    return fail(
                        format!("descriptions[{}].slot", pair[1].id),
                        "starts are not strictly increasing within the variation".into(),
                    );
                }
            }
        }

        let mut prompt_events: BTreeMap<&LogEntryId, &VariationId> = BTreeMap::new();
        for (i, e) in self.log.iter().enumerate() {
            let path = format!("edit_log[{i}]");
            if !self.variations.contains_key(&e.variation_id) {
                return fail(path, format!("unknown variation `{}`", e.variation_id));
            }
            if i > 0 && self.log[i - 1].at > e.at {
                return fail(path, "timestamps go backwards".into());
            }
            match &e.payload {
                EditPayload::PromptEvent { .. } => {
                    if prompt_events.insert(&e.id, &e.variation_id).is_some() {
                        return fail(path, format!("duplicate entry id `{}`", e.id));
                    }
                }
                EditPayload::Decision {
                    prompt_event_id, ..
                } if prompt_events.get(prompt_event_id) != Some(&&e.variation_id) => {
                    return fail(
                        path,
                        format!("decision references no prior prompt event `{prompt_event_id}` in this variation"),
                    );
                }
                _ => {}
            }
        }

        for (id, p) in &self.proposals {
            let path = format!("pending_proposals[{id}]");
            let Some(d) = self.descriptions.get(id) else {
                return fail(path, "unknown description".into());
            };
            if prompt_events.get(&p.prompt_event_id) != Some(&&d.variation_id) {
                return fail(path, "references no prompt event of its variation".into());
            }
        }

        for id in self.variations.keys() {
            let replayed = self.replay(id)?;
            if replayed != self.current_entries(id) {
                return fail(
                    format!("edit_log[{id}]"),
                    "replaying snapshot and log does not reproduce the descriptions".into(),
                );
            }
        }
        Ok(())
    }
}

fn checked_text(text: &str) -> Result<String> {
    let t = text.trim();
    if t.is_empty() {
        Err(Error::EmptyText)
    } else {
        Ok(t.to_owned())
    }
}

/// Thread-safe handle to a [`Store`] with a single-writer commit point.
///
/// Readers see only committed states. A commit runs on a private copy and
/// is published (and optionally written to disk) only if it succeeds.
#[derive(Clone)]
pub struct SharedStore {
    inner: Arc<RwLock<Store>>,
    writer: Arc<Mutex<Option<PathBuf>>>,
}

impl SharedStore {
    pub fn new(store: Store) -> Self {
        SharedStore {
            inner: Arc::new(RwLock::new(store)),
            writer: Arc::new(Mutex::new(None)),
        }
    }

    /// Every successful commit is also saved to `path`.
    pub fn with_autosave(store: Store, path: impl Into<PathBuf>) -> Self {
        SharedStore {
            inner: Arc::new(RwLock::new(store)),
            writer: Arc::new(Mutex::new(Some(path.into()))),
        }
    }

    pub fn autosave_path(&self) -> Option<PathBuf> {
        self.writer.lock().clone()
    }

    pub fn read(&self) -> RwLockReadGuard<'_, Store> {
        self.inner.read()
    }

    pub fn commit<T>(&self, f: impl FnOnce(&mut Store) -> Result<T>) -> Result<T> {
        let writer = self.writer.lock();
        let mut draft = self.inner.read().clone();
        let out = f(&mut draft)?;
        if let Some(path) = writer.as_deref() {
            crate::io::project::save_project(&draft, path)?;
        }
        *self.inner.write() = draft;
        Ok(out)
    }

    /// Writes the current state to the autosave path, if any.
    pub fn flush(&self) -> Result<()> {
        let writer = self.writer.lock();
        if let Some(path) = writer.as_deref() {
            crate::io::project::save_project(&self.inner.read(), path)?;
        }
        Ok(())
    }

    pub fn save_to(&self, path: &Path) -> Result<()> {
        let _writer = self.writer.lock();
        crate::io::project::save_project(&self.inner.read(), path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> (Store, VideoId, VariationId) {
        let mut s = Store::deterministic(7);
        let video = s.add_text_only_video("clip", 60_000).unwrap().id;
        let var = s
            .create_variation(&video, "Variation 1", "ai-bot", None)
            .unwrap()
            .id;
        (s, video, var)
    }

    fn add(s: &mut Store, v: &VariationId, start: u64, text: &str) -> DescriptionId {
        s.add_description(
            v,
            AdSlot::new(start, start + 2000),
            text,
            &Author::ai("ai-bot"),
        )
        .unwrap()
        .id
    }

    #[test]
    fn create_variation_fresh() {
        let (s, _, var) = fixture();
        let v = s.variation(&var).unwrap();
        assert_eq!(v.fork_count, 0);
        assert!(v.parent_id.is_none());
        assert!(v.tags.is_empty());
    }

    #[test]
    fn create_variation_duplicate_name() {
        let (mut s, video, _) = fixture();
        let err = s
            .create_variation(&video, "Variation 1", "x", None)
            .unwrap_err();
        assert_eq!(err.code(), "DuplicateName");
        let err = s
            .create_variation(&VideoId::from("nope"), "A", "x", None)
            .unwrap_err();
        assert_eq!(err.code(), "UnknownVideo");
    }

    #[test]
    fn custom_instructions_stored_verbatim() {
        let (mut s, video, _) = fixture();
        let v = s
            .create_variation(&video, "Concise cut", "P5", Some("focus on actions"))
            .unwrap();
        assert_eq!(
            s.variation(&v.id).unwrap().custom_instructions.as_deref(),
            Some("focus on actions")
        );
    }

    #[test]
    fn fork_copies_and_isolates() {
        let (mut s, _, var) = fixture();
        for (i, t) in ["A boy runs.", "A dog barks.", "Rain falls."]
            .iter()
            .enumerate()
        {
            add(&mut s, &var, 1000 + i as u64 * 5000, t);
        }
        let child = s.fork_variation(&var, "P1", None).unwrap();
        assert_eq!(s.variation(&var).unwrap().fork_count, 1);
        assert_eq!(child.name, "Variation 1 fork 1");
        let parent_texts: Vec<_> = s
            .descriptions_of(&var)
            .iter()
            .map(|d| (d.slot, d.text.clone()))
            .collect();
        let child_texts: Vec<_> = s
            .descriptions_of(&child.id)
            .iter()
            .map(|d| (d.slot, d.text.clone()))
            .collect();
        assert_eq!(parent_texts, child_texts);

        let first = s.descriptions_of(&child.id)[0].id.clone();
        s.edit_description_text(&first, "A boy sprints.", "P1")
            .unwrap();
        assert_eq!(s.descriptions_of(&var)[0].text, "A boy runs.");
        assert!(s.variation(&child.id).unwrap().created_at > s.variation(&var).unwrap().created_at);
        s.validate().unwrap();
    }

    #[test]
    fn fork_unknown_parent() {
        let (mut s, _, _) = fixture();
        let err = s
            .fork_variation(&VariationId::from("x"), "a", None)
            .unwrap_err();
        assert_eq!(err.code(), "UnknownVariation");
    }

    #[test]
    fn edit_text_logs_both_strings() {
        let (mut s, _, var) = fixture();
        let id = add(&mut s, &var, 1000, "A boy runs.");
        let before = s.description(&id).unwrap().slot;
        let d = s
            .edit_description_text(&id, "A boy sprints.", "P2")
            .unwrap();
        assert_eq!(d.text, "A boy sprints.");
        assert_eq!(d.slot, before);
        let last = s.log().last().unwrap();
        assert_eq!(
            last.payload,
            EditPayload::ManualTextEdit {
                description_id: id.clone(),
                old_text: "A boy runs.".into(),
                new_text: "A boy sprints.".into(),
                author_name: "P2".into(),
            }
        );
        assert_eq!(
            s.edit_description_text(&id, "   ", "P2")
                .unwrap_err()
                .code(),
            "EmptyText"
        );
    }

    #[test]
    fn adjust_slot_respects_neighbours() {
        let (mut s, _, var) = fixture();
        add(&mut s, &var, 5000, "a");
        let mid = s
            .add_description(&var, AdSlot::new(10_000, 13_000), "b", &Author::ai("x"))
            .unwrap()
            .id;
        add(&mut s, &var, 20_000, "c");
        let d = s.adjust_slot(&mid, AdSlot::new(10_800, 13_800)).unwrap();
        assert_eq!(d.slot, AdSlot::new(10_800, 13_800));
        assert_eq!(
            s.adjust_slot(&mid, AdSlot::new(4000, 6000))
                .unwrap_err()
                .code(),
            "OrderingViolation"
        );
        assert_eq!(
            s.adjust_slot(&mid, AdSlot::new(10_000, 60_001))
                .unwrap_err()
                .code(),
            "OutOfBounds"
        );
        assert_eq!(
            s.description(&mid).unwrap().slot,
            AdSlot::new(10_800, 13_800)
        );
    }

    #[test]
    fn overlapping_manual_slot_is_flagged() {
        let (mut s, _, var) = fixture();
        let a = add(&mut s, &var, 5000, "a");
        let b = add(&mut s, &var, 8000, "b");
        s.adjust_slot(&a, AdSlot::new(5000, 25_000)).unwrap();
        assert_eq!(
            s.slot_warnings(&a).unwrap(),
            vec![SlotWarning::OverlapsNext, SlotWarning::ExceedsMaxLength]
        );
        assert_eq!(
            s.slot_warnings(&b).unwrap(),
            vec![SlotWarning::OverlapsPrevious]
        );
    }

    #[test]
    fn add_inserts_sorted_and_rejects_duplicate_start() {
        let (mut s, _, var) = fixture();
        add(&mut s, &var, 5000, "a");
        add(&mut s, &var, 10_000, "b");
        let mid = add(&mut s, &var, 7500, "m");
        let order: Vec<_> = s
            .descriptions_of(&var)
            .iter()
            .map(|d| d.id.clone())
            .collect();
        assert_eq!(order.iter().position(|d| d == &mid), Some(1));
        let err = s
            .add_description(&var, AdSlot::new(5000, 6000), "dup", &Author::human("h"))
            .unwrap_err();
        assert_eq!(err.code(), "OrderingViolation");
        s.delete_description(&mid).unwrap();
        assert_eq!(s.descriptions_of(&var).len(), 2);
        assert_eq!(
            s.delete_description(&mid).unwrap_err().code(),
            "UnknownDescription"
        );
    }

    #[test]
    fn set_tags_validates() {
        let (mut s, _, var) = fixture();
        let ok = TagSet {
            predefined: vec![
                PredefinedTag::new(TagCategory::Focus, "Main story focus"),
                PredefinedTag::new(TagCategory::DetailLevel, "Low detail"),
            ],
            custom: vec!["Optimistic".into()],
        };
        assert_eq!(s.set_tags(&var, ok.clone()).unwrap().tags, ok);
        let bad = TagSet {
            predefined: vec![
                PredefinedTag::new(TagCategory::Focus, "Main story focus"),
                PredefinedTag::new(TagCategory::Focus, "Character focus"),
            ],
            custom: vec![],
        };
        assert_eq!(s.set_tags(&var, bad).unwrap_err().code(), "InvalidTagSet");
        assert_eq!(s.variation(&var).unwrap().tags, ok);
    }

    #[test]
    fn proposal_resolution_is_single_shot() {
        let (mut s, _, var) = fixture();
        let a = add(&mut s, &var, 1000, "A man walks slowly down the road.");
        let b = add(&mut s, &var, 4000, "A car passes.");
        let ev = s
            .record_prompt_event(
                &var,
                "shorten",
                &[a.clone(), b.clone()],
                Some(PromptCategory::Shorten),
                vec![
                    (a.clone(), "A man walks.".into()),
                    (b.clone(), "Car passes.".into()),
                ],
            )
            .unwrap();
        let d = s.resolve_proposal(&a, Decision::Accept).unwrap();
        assert_eq!(d.text, "A man walks.");
        let d = s.resolve_proposal(&b, Decision::Reject).unwrap();
        assert_eq!(d.text, "A car passes.");
        assert_eq!(
            s.prompt_event_stats(&ev).unwrap(),
            DecisionStats {
                targets: 2,
                accepted: 1,
                rejected: 1,
                pending: 0
            }
        );
        assert_eq!(
            s.resolve_proposal(&a, Decision::Accept).unwrap_err().code(),
            "NoPendingProposal"
        );
        s.validate().unwrap();
    }

    #[test]
    fn delete_variation_rules() {
        let (mut s, _, var) = fixture();
        let child = s.fork_variation(&var, "p", None).unwrap();
        assert_eq!(s.delete_variation(&var).unwrap_err().code(), "HasChildren");
        s.delete_variation(&child.id).unwrap();
        assert_eq!(s.variation(&var).unwrap().fork_count, 0);
        s.delete_variation(&var).unwrap();
        s.validate().unwrap();
    }

    #[test]
    fn replay_reproduces_after_fork_and_edits() {
        let (mut s, _, var) = fixture();
        let a = add(&mut s, &var, 1000, "one");
        add(&mut s, &var, 6000, "two");
        s.edit_description_text(&a, "uno", "h").unwrap();
        let child = s.fork_variation(&var, "h2", None).unwrap();
        let c0 = s.descriptions_of(&child.id)[0].id.clone();
        s.adjust_slot(&c0, AdSlot::new(1500, 3000)).unwrap();
        add(&mut s, &child.id, 9000, "three");
        assert_eq!(s.replay(&child.id).unwrap(), s.current_entries(&child.id));
        assert_eq!(s.replay(&var).unwrap(), s.current_entries(&var));
    }

    #[test]
    fn shared_store_rolls_back_failed_commit() {
        let (s, video, _) = fixture();
        let shared = SharedStore::new(s);
        let err = shared.commit(|s| {
            s.create_variation(&video, "temp", "x", None)?;
            s.create_variation(&video, "temp", "x", None)
        });
        assert!(err.is_err());
        assert_eq!(shared.read().variations_of(&video).len(), 1);
    }
}
