use std::fmt::Write as _;

use serde::Serialize;

use super::frames::{sample_frame_plan, FrameSource, SlotFrames};
use super::prompts::{build_generation_prompt, build_revision_prompt};
use super::provider::{ImagePayload, ModelProvider, ProviderRequest};
use crate::model::{
    AdSlot, Author, Description, DescriptionId, LogEntryId, PromptCategory, VariationId,
};
use crate::store::SharedStore;
use crate::{Error, Result};

pub const DEFAULT_BATCH_SIZE: usize = 5;

/// Heading of the per-batch section appended to the generation prompt.
pub const GENERATION_MARKER: &str = "Time slots to describe:";

const PRIOR_HEADING: &str = "Descriptions from previous API calls:";
const RATIONALE_LABEL: &str = "guidelines not followed:";

#[derive(Clone, Debug)]
pub struct GenerationOptions {
    pub batch_size: usize,
    pub model: String,
    pub max_tokens: u32,
    /// Author name recorded on generated descriptions.
    pub author_name: String,
}

impl Default for GenerationOptions {
    fn default() -> Self {
        GenerationOptions {
            batch_size: DEFAULT_BATCH_SIZE,
            model: "default".into(),
            max_tokens: 1024,
            author_name: "ai".into(),
        }
    }
}

/// One batched generation call before it is put on the wire.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GenerationRequest {
    pub prompt_text: String,
    pub frame_batches: Vec<SlotFrames>,
    pub prior_descriptions: Vec<String>,
}

pub fn render_prior_descriptions(prior: &[String]) -> String {
    let mut out = String::from(PRIOR_HEADING);
    out.push('\n');
    for (i, text) in prior.iter().enumerate() {
        let _ = writeln!(out, "({}) {text}", i + 1);
    }
    out
}

impl GenerationRequest {
    /// Template, then earlier outputs (if any), then the slots of this batch
    /// and the expected answer layout.
    pub fn render(&self) -> String {
        let mut out = self.prompt_text.clone();
        if !out.ends_with('\n') {
            out.push('\n');
        }
        if !self.prior_descriptions.is_empty() {
            out.push('\n');
            out.push_str(&render_prior_descriptions(&self.prior_descriptions));
        }
        out.push('\n');
        out.push_str(GENERATION_MARKER);
        out.push('\n');
        for (i, f) in self.frame_batches.iter().enumerate() {
            let times: Vec<String> = f.timestamps_ms.iter().map(u64::to_string).collect();
            let _ = writeln!(
                out,
                "[{}] {}-{} ms, frames sampled at {} ms",
                i + 1,
                f.slot.start_ms,
                f.slot.end_ms,
                times.join(", ")
            );
        }
        out.push_str(
            "\nThe attached images are these frames, in the order listed. Answer with one line per time slot, \
             starting with its bracketed number, e.g. \"[1] A woman opens the door.\" If you did not follow \
             some general guidelines, add \"Guidelines not followed:\" and the explanation after the description.\n",
        );
        out
    }
}

/// Reads `[n] <start>-<end> ms` lines of a rendered generation prompt.
pub(crate) fn parse_slot_requests(prompt: &str) -> Vec<(usize, u64)> {
    let Some((_, section)) = prompt.rsplit_once(GENERATION_MARKER) else {
        return Vec::new();
    };
    section
        .lines()
        .filter_map(|line| {
            let rest = line.strip_prefix('[')?;
            let (n, rest) = rest.split_once("] ")?;
            let (start, _) = rest.split_once('-')?;
            Some((n.parse().ok()?, start.parse().ok()?))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratedText {
    pub text: String,
    pub rationale: Option<String>,
}

/// Splits a batch answer into `expected` descriptions. Each item starts at a
/// line beginning `[n]`; continuation lines are joined. Text after a
/// "Guidelines not followed:" label is kept verbatim as the rationale.
pub fn parse_generation_response(text: &str, expected: usize) -> Result<Vec<GeneratedText>> {
    let mut items: Vec<Option<String>> = vec![None; expected];
    let mut current: Option<usize> = None;
    for line in text.lines() {
        let trimmed = line.trim_start();
        let numbered = trimmed.strip_prefix('[').and_then(|r| {
            let (n, rest) = r.split_once(']')?;
            Some((n.trim().parse::<usize>().ok()?, rest))
        });
        match numbered {
            Some((n, rest)) if (1..=expected).contains(&n) => {
                current = Some(n - 1);
                let slot = &mut items[n - 1];
                let body = rest.trim_start_matches([':', '.', ' ']).trim();
                match slot {
                    Some(existing) => {
                        existing.push('\n');
                        existing.push_str(body);
                    }
                    None => *slot = Some(body.to_owned()),
                }
            }
            _ => {
                if let Some(i) = current {
                    let entry = items[i].get_or_insert_with(String::new);
                    entry.push('\n');
                    entry.push_str(line.trim_end());
                }
            }
        }
    }
    items
        .into_iter()
        .enumerate()
        .map(|(i, item)| {
            let raw = item.unwrap_or_default();
            let lower = raw.to_lowercase();
            let (body, rationale) = match lower.find(RATIONALE_LABEL) {
                Some(at) => {
                    let rest = raw[at + RATIONALE_LABEL.len()..].trim();
                    (&raw[..at], (!rest.is_empty()).then(|| rest.to_owned()))
                }
                None => (raw.as_str(), None),
            };
            let text = body.split_whitespace().collect::<Vec<_>>().join(" ");
            if text.is_empty() {
                return Err(Error::UnparseableResponse(format!(
                    "no description for slot [{}]",
                    i + 1
                )));
            }
            Ok(GeneratedText { text, rationale })
        })
        .collect()
}

/// Generation stopped at a failing batch; earlier batches are persisted.
#[derive(Debug)]
pub struct PartialFailure {
    pub persisted: Vec<Description>,
    pub batches_completed: usize,
    pub error: Error,
}

impl From<PartialFailure> for Error {
    fn from(p: PartialFailure) -> Self {
        p.error
    }
}

/// Describes every slot of a plan, `batch_size` slots per provider call, in
/// timeline order. Each call carries the texts returned by all earlier calls.
/// Results of each batch are persisted before the next call is made.
pub fn generate_descriptions(
    store: &SharedStore,
    variation_id: &VariationId,
    slots: &[AdSlot],
    provider: &dyn ModelProvider,
    options: &GenerationOptions,
) -> std::result::Result<Vec<Description>, PartialFailure> {
    generate_descriptions_with_progress(
        store,
        variation_id,
        slots,
        provider,
        options,
        &mut |_, _| {},
    )
}

/// [`generate_descriptions`], calling `progress(done, total)` with batch
/// counts before the first call and after each persisted batch.
pub fn generate_descriptions_with_progress(
    store: &SharedStore,
    variation_id: &VariationId,
    slots: &[AdSlot],
    provider: &dyn ModelProvider,
    options: &GenerationOptions,
    progress: &mut dyn FnMut(usize, usize),
) -> std::result::Result<Vec<Description>, PartialFailure> {
    let fail = |persisted: Vec<Description>, batches_completed, error| PartialFailure {
        persisted,
        batches_completed,
        error,
    };
    if options.batch_size == 0 {
        return Err(fail(
            vec![],
            0,
            Error::InvalidInput("batch_size must be at least 1".into()),
        ));
    }
    if slots.is_empty() {
        return Err(fail(
            vec![],
            0,
            Error::InvalidInput("the slot plan is empty".into()),
        ));
    }
    let mut slots = slots.to_vec();
    slots.sort_by_key(|s| s.start_ms);

    let (template, video) = {
        let s = store.read();
        let prepared = s.variation(variation_id).and_then(|v| {
            let video = s.video_of_variation(variation_id)?.clone();
            for slot in &slots {
                slot.check_bounds(video.duration_ms)?;
            }
            Ok((
                build_generation_prompt(v.custom_instructions.as_deref()),
                video,
            ))
        });
        prepared.map_err(|e| fail(vec![], 0, e))?
    };
    let mut frames = FrameSource::for_video(&video).map_err(|e| fail(vec![], 0, e))?;
    let samples = sample_frame_plan(&slots, video.duration_ms, video.frame_rate);
    let author = Author::ai(options.author_name.clone());

    let total = samples.len().div_ceil(options.batch_size);
    progress(0, total);
    let mut persisted: Vec<Description> = Vec::new();
    let mut prior: Vec<String> = Vec::new();
    for (b, batch) in samples.chunks(options.batch_size).enumerate() {
        let request = GenerationRequest {
            prompt_text: template.clone(),
            frame_batches: batch.to_vec(),
            prior_descriptions: prior.clone(),
        };
        let outcome = (|| -> Result<Vec<Description>> {
            let mut images: Vec<ImagePayload> = Vec::new();
            for f in batch {
                images.extend(frames.images(&f.timestamps_ms)?);
            }
            let response = provider.complete(&ProviderRequest {
                model: options.model.clone(),
                prompt: request.render(),
                images,
                max_tokens: options.max_tokens,
            })?;
            let texts = parse_generation_response(&response.text, batch.len())?;
            store.commit(|s| {
                batch
                    .iter()
                    .zip(texts)
                    .map(|(f, g)| {
                        s.add_description_with_rationale(
                            variation_id,
                            f.slot,
                            &g.text,
                            &author,
                            g.rationale,
                        )
                    })
                    .collect()
            })
        })();
        match outcome {
            Ok(descs) => {
                prior.extend(descs.iter().map(|d| d.text.clone()));
                persisted.extend(descs);
                progress(b + 1, total);
            }
            Err(e) => {
                log::warn!("generation batch {} failed: {e}", b + 1);
                return Err(fail(persisted, b, e));
            }
        }
    }
    Ok(persisted)
}

#[derive(Debug)]
pub struct RevisionReport {
    /// The logged prompt event, absent when every call failed.
    pub prompt_event_id: Option<LogEntryId>,
    pub proposals: Vec<(DescriptionId, String)>,
    pub failures: Vec<(DescriptionId, Error)>,
}

/// Asks the provider for a revision of each selected description, one call
/// each, run concurrently. Stored texts are untouched: answers are parked as
/// pending proposals under one logged prompt event.
pub fn revise_descriptions(
    store: &SharedStore,
    variation_id: &VariationId,
    selected: &[DescriptionId],
    user_prompt: &str,
    category: Option<PromptCategory>,
    provider: &dyn ModelProvider,
    options: &GenerationOptions,
) -> Result<RevisionReport> {
    if user_prompt.trim().is_empty() {
        return Err(Error::EmptyPrompt);
    }
    if selected.is_empty() {
        return Err(Error::InvalidInput("no descriptions selected".into()));
    }
    let mut jobs: Vec<(DescriptionId, String, Vec<ImagePayload>)> = Vec::new();
    {
        let s = store.read();
        s.variation(variation_id)?;
        let video = s.video_of_variation(variation_id)?.clone();
        let all = s.descriptions_of(variation_id);
        let slots: Vec<AdSlot> = all.iter().map(|d| d.slot).collect();
        let samples = sample_frame_plan(&slots, video.duration_ms, video.frame_rate);
        let mut frames = FrameSource::for_video(&video)?;
        for id in selected {
            let idx = all
                .iter()
                .position(|d| &d.id == id)
                .ok_or_else(|| Error::UnknownDescription(id.to_string()))?;
            if jobs.iter().any(|(j, _, _)| j == id) {
                continue;
            }
            let prompt = build_revision_prompt(user_prompt, &all[idx].text)?;
            jobs.push((
                id.clone(),
                prompt,
                frames.images(&samples[idx].timestamps_ms)?,
            ));
        }
    }

    let results: Vec<(DescriptionId, Result<String>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .into_iter()
            .map(|(id, prompt, images)| {
                let request = ProviderRequest {
                    model: options.model.clone(),
                    prompt,
                    images,
                    max_tokens: options.max_tokens,
                };
                scope.spawn(move || {
                    let text = provider.complete(&request).and_then(|r| {
                        let t = r.text.trim().to_owned();
                        if t.is_empty() {
                            Err(Error::UnparseableResponse("empty revision".into()))
                        } else {
                            Ok(t)
                        }
                    });
                    (id, text)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("provider call panicked"))
            .collect()
    });

    let mut proposals = Vec::new();
    let mut failures = Vec::new();
    for (id, r) in results {
        match r {
            Ok(t) => proposals.push((id, t)),
            Err(e) => failures.push((id, e)),
        }
    }
    if proposals.is_empty() {
        let (_, first) = failures.swap_remove(0);
        return Err(first);
    }
    let targets: Vec<DescriptionId> = proposals.iter().map(|(id, _)| id.clone()).collect();
    let event = store.commit(|s| {
        s.record_prompt_event(
            variation_id,
            user_prompt.trim(),
            &targets,
            category,
            proposals.clone(),
        )
    })?;
    Ok(RevisionReport {
        prompt_event_id: Some(event),
        proposals,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn response_parsing() {
        let got = parse_generation_response(
            "Here you go.\n[1] A man  walks.\n[2] A dog\nbarks. Guidelines not followed: 42, too short.\n[3]: Rain.",
            3,
        )
        .unwrap();
        assert_eq!(got[0].text, "A man walks.");
        assert_eq!(got[1].text, "A dog barks.");
        assert_eq!(got[1].rationale.as_deref(), Some("42, too short."));
        assert_eq!(got[2].text, "Rain.");
        assert_eq!(
            parse_generation_response("[1] x", 2).unwrap_err().code(),
            "UnparseableResponse"
        );
    }

    #[test]
    fn request_rendering_round_trips_slots() {
        let req = GenerationRequest {
            prompt_text: "T".into(),
            frame_batches: sample_frame_plan(
                &[AdSlot::new(0, 1000), AdSlot::new(5000, 6000)],
                9000,
                Default::default(),
            ),
            prior_descriptions: vec!["a".into(), "b".into()],
        };
        let text = req.render();
        assert!(text.contains(&render_prior_descriptions(&["a".into(), "b".into()])));
        assert_eq!(parse_slot_requests(&text), vec![(1, 0), (2, 5000)]);
    }
}
