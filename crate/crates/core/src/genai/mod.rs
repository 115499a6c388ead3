//! Model-backed authoring: prompt assembly, frame sampling, batched
//! generation, revision proposals and tagging through a pluggable provider.

mod frames;
mod generate;
pub mod prompts;
mod provider;
mod tagging;

pub use frames::{sample_frame_plan, FrameSource, SlotFrames, FRAME_SAMPLE_INTERVAL_MS};
pub use generate::{
    generate_descriptions, generate_descriptions_with_progress, parse_generation_response,
    render_prior_descriptions, revise_descriptions, GeneratedText, GenerationOptions,
    GenerationRequest, PartialFailure, RevisionReport, DEFAULT_BATCH_SIZE, GENERATION_MARKER,
};
pub use prompts::{build_generation_prompt, build_revision_prompt, build_tag_prompt};
pub use provider::{
    HttpProvider, ImagePayload, MockProvider, ModelProvider, ProviderConfig, ProviderRequest,
    ProviderResponse,
};
pub use tagging::{bracketed_lists, generate_tags, parse_tag_response, TagOutcome};

use crate::model::VariationId;
use crate::store::SharedStore;
use crate::Result;

/// Tags a variation from its current descriptions and stores the result.
/// On provider or parse failure the variation's tags are left as they were.
pub fn auto_tag_variation(
    store: &SharedStore,
    variation_id: &VariationId,
    provider: &dyn ModelProvider,
    options: &GenerationOptions,
) -> Result<TagOutcome> {
    let texts: Vec<String> = {
        let s = store.read();
        s.variation(variation_id)?;
        s.descriptions_of(variation_id)
            .iter()
            .map(|d| d.text.clone())
            .collect()
    };
    let outcome = generate_tags(&texts, provider, &options.model, options.max_tokens)?;
    store.commit(|s| s.set_tags(variation_id, outcome.tags.clone()))?;
    Ok(outcome)
}
