use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{FromRequestParts, Path, Query, State};
use axum::http::request::Parts;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use adscribe_core::genai::{
    auto_tag_variation, generate_descriptions_with_progress, revise_descriptions,
};
use adscribe_core::io::{analyze_video, export_webvtt, import_webvtt, ingest_media, IngestOptions};
use adscribe_core::model::SlotWarning;
use adscribe_core::revision::{compare_variations, word_diff, WordDiff};
use adscribe_core::{
    AdSlot, Author, AuthorKind, Decision, Description, DescriptionId, LogEntryId, PromptCategory,
    Store, TagSet, Timestamp, Variation, VariationId, VideoId,
};

use crate::error::{ApiError, ApiResult, JsonBody};
use crate::jobs::JobKind;
use crate::AppState;

type AppRef = State<Arc<AppState>>;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/videos", get(list_videos).post(create_video))
        .route("/videos/{id}", get(get_video))
        .route(
            "/videos/{id}/variations",
            get(list_variations).post(create_variation),
        )
        .route("/videos/{id}/import.vtt", post(import_vtt))
        .route(
            "/variations/{id}",
            get(get_variation).delete(delete_variation),
        )
        .route("/variations/{id}/fork", post(fork_variation))
        .route("/variations/{id}/tags", axum::routing::put(put_tags))
        .route("/variations/{id}/tags/generate", post(generate_tags))
        .route("/variations/{id}/descriptions", post(add_description))
        .route("/variations/{id}/revise", post(revise))
        .route("/variations/{id}/export.vtt", get(export_vtt))
        .route("/variations/{id}/metrics", get(metrics))
        .route(
            "/descriptions/{id}",
            axum::routing::patch(patch_description).delete(delete_description),
        )
        .route("/descriptions/{id}/resolve", post(resolve))
        .route("/jobs/{id}", get(get_job))
        .fallback(|| async { ApiError::not_found("NotFound", "no such endpoint") })
        .with_state(state)
}

/// Query string whose rejections are reported as [`ApiError`]s.
struct QueryParams<T>(T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequestParts<S> for QueryParams<T> {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, ApiError> {
        Query::<T>::from_request_parts(parts, state)
            .await
            .map(|Query(v)| QueryParams(v))
            .map_err(|e| ApiError::bad_request(e.body_text()))
    }
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> ApiResult<T> + Send + 'static,
) -> ApiResult<T> {
    tokio::task::spawn_blocking(f).await.map_err(|e| {
        ApiError::new(
            StatusCode::INTERNAL_SERVER_ERROR,
            "InternalError",
            e.to_string(),
        )
    })?
}

fn spawn_job(
    state: &Arc<AppState>,
    kind: JobKind,
    work: impl FnOnce(&AppState, &str) -> Result<Value, (ApiError, Option<Value>)> + Send + 'static,
) -> String {
    let id = state.jobs.create(kind);
    let (state, job) = (state.clone(), id.clone());
    tokio::task::spawn_blocking(move || {
        let outcome = work(&state, &job);
        if let Err((e, _)) = &outcome {
            log::warn!("job {job} failed: {} ({})", e.message, e.code);
        }
        state.jobs.finish(&job, outcome);
    });
    id
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

// ---- views ---------------------------------------------------------------

#[derive(Serialize)]
struct VariationView {
    #[serde(flatten)]
    variation: Variation,
    parent_name: Option<String>,
    description_count: usize,
}

fn variation_view(s: &Store, v: &Variation) -> VariationView {
    VariationView {
        parent_name: v
            .parent_id
            .as_ref()
            .and_then(|p| s.variation(p).ok())
            .map(|p| p.name.clone()),
        description_count: s.descriptions_of(&v.id).len(),
        variation: v.clone(),
    }
}

#[derive(Serialize)]
struct ProposalView {
    prompt_event_id: LogEntryId,
    proposed_text: String,
    created_at: Timestamp,
    diff: WordDiff,
}

#[derive(Serialize)]
struct DescriptionView {
    #[serde(flatten)]
    description: Description,
    warnings: Vec<SlotWarning>,
    pending_proposal: Option<ProposalView>,
}

fn description_view(s: &Store, d: &Description) -> DescriptionView {
    DescriptionView {
        warnings: s.slot_warnings(&d.id).unwrap_or_default(),
        pending_proposal: s.pending_proposal(&d.id).map(|p| ProposalView {
            prompt_event_id: p.prompt_event_id.clone(),
            proposed_text: p.proposed_text.clone(),
            created_at: p.created_at,
            diff: word_diff(&d.text, &p.proposed_text),
        }),
        description: d.clone(),
    }
}

#[derive(Serialize)]
struct VariationDetail {
    #[serde(flatten)]
    variation: VariationView,
    descriptions: Vec<DescriptionView>,
}

// ---- videos --------------------------------------------------------------

async fn list_videos(State(app): AppRef) -> Response {
    let s = app.store.read();
    Json(s.videos().cloned().collect::<Vec<_>>()).into_response()
}

async fn get_video(State(app): AppRef, Path(id): Path<String>) -> ApiResult<Response> {
    let s = app.store.read();
    Ok(Json(s.video(&VideoId(id))?.clone()).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateVideo {
    /// Media file (or pre-extracted directory) to ingest as a job.
    source: Option<PathBuf>,
    title: Option<String>,
    /// Registers a text-only video of this length instead.
    duration_ms: Option<u64>,
}

async fn create_video(
    State(app): AppRef,
    JsonBody(body): JsonBody<CreateVideo>,
) -> ApiResult<Response> {
    match (body.source, body.duration_ms) {
        (Some(source), None) => {
            let title = body.title;
            let job = spawn_job(&app, JobKind::Ingest, move |app, job| {
                app.jobs.start(job);
                let options = IngestOptions {
                    decoder_command: app.config.ingest.decoder_command.clone(),
                    title,
                };
                ingest_media(&source, &app.media_dir, &options)
                    .and_then(|asset| app.store.commit(|s| s.insert_video(asset)))
                    .map(|asset| to_value(&asset))
                    .map_err(|e| (e.into(), None))
            });
            Ok((StatusCode::ACCEPTED, Json(json!({ "job_id": job }))).into_response())
        }
        (None, Some(duration_ms)) => {
            let title = body.title.unwrap_or_else(|| "untitled".into());
            let video = app
                .store
                .commit(|s| s.add_text_only_video(&title, duration_ms))?;
            Ok((StatusCode::CREATED, Json(video)).into_response())
        }
        _ => Err(ApiError::bad_request(
            "give exactly one of `source` (ingest) or `duration_ms` (text-only video)",
        )),
    }
}

// ---- variations ----------------------------------------------------------

async fn list_variations(State(app): AppRef, Path(id): Path<String>) -> ApiResult<Response> {
    let s = app.store.read();
    let video = VideoId(id);
    s.video(&video)?;
    let views: Vec<_> = s
        .variations_of(&video)
        .into_iter()
        .map(|v| variation_view(&s, v))
        .collect();
    Ok(Json(views).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateVariation {
    name: String,
    author_name: String,
    custom_instructions: Option<String>,
    /// Start a generation job for the new variation.
    #[serde(default)]
    generate: bool,
    /// Slots to describe; planned from the video's media when absent.
    slots: Option<Vec<AdSlot>>,
}

async fn create_variation(
    State(app): AppRef,
    Path(id): Path<String>,
    JsonBody(body): JsonBody<CreateVariation>,
) -> ApiResult<Response> {
    let video_id = VideoId(id);
    let provider = if body.generate {
        let has_audio = app
            .store
            .read()
            .video(&video_id)?
            .media_refs
            .audio_wav
            .is_some();
        if body.slots.is_none() && !has_audio {
            return Err(adscribe_core::Error::InvalidInput(
                "video has no media to plan from; pass `slots`".into(),
            )
            .into());
        }
        Some(app.provider()?)
    } else {
        None
    };
    let variation = app.store.commit(|s| {
        s.create_variation(
            &video_id,
            &body.name,
            &body.author_name,
            body.custom_instructions.as_deref(),
        )
    })?;
    let job_id = provider.map(|(provider, options)| {
        let variation_id = variation.id.clone();
        let slots = body.slots;
        spawn_job(&app, JobKind::Generate, move |app, job| {
            let lock = app.generation_lock(&variation_id);
            let _guard = lock.lock();
            app.jobs.start(job);
            let slots = match slots {
                Some(slots) => slots,
                None => {
                    let video = app
                        .store
                        .read()
                        .video_of_variation(&variation_id)
                        .cloned()
                        .map_err(|e| (e.into(), None))?;
                    analyze_video(&video, &app.config.timing)
                        .map_err(|e| (e.into(), None))?
                        .plan
                        .ad_slots()
                }
            };
            let descriptions = generate_descriptions_with_progress(
                &app.store,
                &variation_id,
                &slots,
                provider.as_ref(),
                &options,
                &mut |done, total| app.jobs.progress(job, done, total),
            )
            .map_err(|p| {
                let partial = json!({
                    "descriptions": p.persisted,
                    "batches_completed": p.batches_completed,
                });
                (ApiError::from(p.error), Some(partial))
            })?;
            let (tags, tag_error) =
                match auto_tag_variation(&app.store, &variation_id, provider.as_ref(), &options) {
                    Ok(t) => (Some(t), None),
                    Err(e) => (None, Some(ApiError::from(e))),
                };
            Ok(json!({
                "descriptions": descriptions,
                "tags": tags,
                "tag_error": tag_error,
            }))
        })
    });
    let s = app.store.read();
    let view = variation_view(&s, s.variation(&variation.id)?);
    Ok((
        StatusCode::CREATED,
        Json(json!({ "variation": view, "job_id": job_id })),
    )
        .into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ForkBody {
    author_name: String,
    name: Option<String>,
}

async fn fork_variation(
    State(app): AppRef,
    Path(id): Path<String>,
    JsonBody(body): JsonBody<ForkBody>,
) -> ApiResult<Response> {
    let parent = VariationId(id);
    let child = app
        .store
        .commit(|s| s.fork_variation(&parent, &body.author_name, body.name.as_deref()))?;
    let s = app.store.read();
    Ok((StatusCode::CREATED, Json(variation_view(&s, &child))).into_response())
}

async fn get_variation(State(app): AppRef, Path(id): Path<String>) -> ApiResult<Response> {
    let s = app.store.read();
    let id = VariationId(id);
    let v = s.variation(&id)?;
    Ok(Json(VariationDetail {
        variation: variation_view(&s, v),
        descriptions: s
            .descriptions_of(&id)
            .into_iter()
            .map(|d| description_view(&s, d))
            .collect(),
    })
    .into_response())
}

async fn delete_variation(State(app): AppRef, Path(id): Path<String>) -> ApiResult<StatusCode> {
    app.store.commit(|s| s.delete_variation(&VariationId(id)))?;
    Ok(StatusCode::NO_CONTENT)
}

async fn put_tags(
    State(app): AppRef,
    Path(id): Path<String>,
    JsonBody(tags): JsonBody<TagSet>,
) -> ApiResult<Response> {
    let v = app.store.commit(|s| s.set_tags(&VariationId(id), tags))?;
    let s = app.store.read();
    Ok(Json(variation_view(&s, &v)).into_response())
}

async fn generate_tags(State(app): AppRef, Path(id): Path<String>) -> ApiResult<Response> {
    let (provider, options) = app.provider()?;
    let id = VariationId(id);
    let outcome = blocking(move || {
        Ok(auto_tag_variation(
            &app.store,
            &id,
            provider.as_ref(),
            &options,
        )?)
    })
    .await?;
    Ok(Json(outcome).into_response())
}

// ---- descriptions --------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AddDescription {
    slot: AdSlot,
    text: String,
    author_name: String,
    #[serde(default = "human")]
    author_kind: AuthorKind,
}

fn human() -> AuthorKind {
    AuthorKind::Human
}

async fn add_description(
    State(app): AppRef,
    Path(id): Path<String>,
    JsonBody(body): JsonBody<AddDescription>,
) -> ApiResult<Response> {
    let author = Author {
        kind: body.author_kind,
        name: body.author_name,
    };
    let d = app
        .store
        .commit(|s| s.add_description(&VariationId(id), body.slot, &body.text, &author))?;
    let s = app.store.read();
    Ok((StatusCode::CREATED, Json(description_view(&s, &d))).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PatchDescription {
    text: Option<String>,
    slot: Option<AdSlot>,
    author_name: String,
}

async fn patch_description(
    State(app): AppRef,
    Path(id): Path<String>,
    JsonBody(body): JsonBody<PatchDescription>,
) -> ApiResult<Response> {
    if body.text.is_none() && body.slot.is_none() {
        return Err(ApiError::bad_request(
            "nothing to change: give `text` and/or `slot`",
        ));
    }
    let id = DescriptionId(id);
    let d = app.store.commit(|s| {
        let mut d = s.description(&id)?.clone();
        if let Some(slot) = body.slot {
            d = s.adjust_slot(&id, slot)?;
        }
        if let Some(text) = &body.text {
            d = s.edit_description_text(&id, text, &body.author_name)?;
        }
        Ok(d)
    })?;
    let s = app.store.read();
    Ok(Json(description_view(&s, &d)).into_response())
}

async fn delete_description(State(app): AppRef, Path(id): Path<String>) -> ApiResult<StatusCode> {
    app.store
        .commit(|s| s.delete_description(&DescriptionId(id)))?;
    Ok(StatusCode::NO_CONTENT)
}

// ---- revision ------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReviseBody {
    prompt: String,
    description_ids: Vec<DescriptionId>,
    category: Option<PromptCategory>,
}

#[derive(Serialize)]
struct ProposalOut {
    description_id: DescriptionId,
    old_text: String,
    proposed_text: String,
    diff: WordDiff,
}

#[derive(Serialize)]
struct FailureOut {
    description_id: DescriptionId,
    error: ApiError,
}

async fn revise(
    State(app): AppRef,
    Path(id): Path<String>,
    JsonBody(body): JsonBody<ReviseBody>,
) -> ApiResult<Response> {
    let (provider, options) = app.provider()?;
    let variation = VariationId(id);
    let worker = app.clone();
    let report = blocking(move || {
        Ok(revise_descriptions(
            &worker.store,
            &variation,
            &body.description_ids,
            &body.prompt,
            body.category,
            provider.as_ref(),
            &options,
        )?)
    })
    .await?;
    let s = app.store.read();
    let proposals: Vec<ProposalOut> = report
        .proposals
        .into_iter()
        .map(|(description_id, proposed_text)| {
            let old_text = s
                .description(&description_id)
                .map(|d| d.text.clone())
                .unwrap_or_default();
            let proposed_text = s
                .pending_proposal(&description_id)
                .map(|p| p.proposed_text.clone())
                .unwrap_or(proposed_text);
            ProposalOut {
                diff: word_diff(&old_text, &proposed_text),
                description_id,
                old_text,
                proposed_text,
            }
        })
        .collect();
    let failures: Vec<FailureOut> = report
        .failures
        .into_iter()
        .map(|(description_id, e)| FailureOut {
            description_id,
            error: e.into(),
        })
        .collect();
    Ok(Json(json!({
        "prompt_event_id": report.prompt_event_id,
        "proposals": proposals,
        "failures": failures,
    }))
    .into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ResolveBody {
    decision: Decision,
}

async fn resolve(
    State(app): AppRef,
    Path(id): Path<String>,
    JsonBody(body): JsonBody<ResolveBody>,
) -> ApiResult<Response> {
    app.expire_proposals()?;
    let d = app
        .store
        .commit(|s| s.resolve_proposal(&DescriptionId(id), body.decision))?;
    let s = app.store.read();
    Ok(Json(description_view(&s, &d)).into_response())
}

// ---- interchange and metrics -----------------------------------------------

async fn export_vtt(State(app): AppRef, Path(id): Path<String>) -> ApiResult<Response> {
    let text = export_webvtt(&app.store.read(), &VariationId(id))?;
    Ok(([(header::CONTENT_TYPE, "text/vtt; charset=utf-8")], text).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ImportParams {
    name: String,
    author_name: String,
}

async fn import_vtt(
    State(app): AppRef,
    Path(id): Path<String>,
    QueryParams(params): QueryParams<ImportParams>,
    body: Bytes,
) -> ApiResult<Response> {
    let text = String::from_utf8(body.to_vec())
        .map_err(|_| ApiError::bad_request("WebVTT body is not UTF-8"))?;
    let video = VideoId(id);
    let v = app
        .store
        .commit(|s| import_webvtt(s, &text, &video, &params.name, &params.author_name))?;
    let s = app.store.read();
    Ok((StatusCode::CREATED, Json(variation_view(&s, &v))).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MetricsParams {
    against: String,
}

/// Metrics of this variation measured against `against` as the original.
async fn metrics(
    State(app): AppRef,
    Path(id): Path<String>,
    QueryParams(params): QueryParams<MetricsParams>,
) -> ApiResult<Response> {
    let report = compare_variations(
        &app.store.read(),
        &VariationId(params.against),
        &VariationId(id),
        &BTreeMap::new(),
    )?;
    Ok(Json(report).into_response())
}

async fn get_job(State(app): AppRef, Path(id): Path<String>) -> ApiResult<Response> {
    let job = app
        .jobs
        .get(&id)
        .ok_or_else(|| ApiError::not_found("UnknownJob", format!("no job `{id}`")))?;
    Ok(Json(job).into_response())
}
