use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;
use serde_json::json;

use adscribe_core::config::AppConfig;
use adscribe_core::genai::{
    auto_tag_variation, generate_descriptions, revise_descriptions, GenerationOptions,
    ModelProvider,
};
use adscribe_core::io::{
    analyze_files, analyze_video, export_webvtt, import_webvtt, ingest_media, load_project,
    IngestOptions,
};
use adscribe_core::revision::{compare_variations, word_diff, Embeddings};
use adscribe_core::tags::{canonical_keyword, PredefinedTag, CATEGORIES};
use adscribe_core::{
    AdSlot, Decision, DescriptionId, Error, PromptCategory, SharedStore, Store, TagSet,
    VariationId, VideoId,
};
use adscribe_service::{start_server, ServerOptions, ServiceError};

use crate::cli::{Cli, Command, DecisionArg, Format, ProviderArgs};
use crate::render;

pub enum Failure {
    /// Bad or missing arguments; exit status 2.
    Usage(String),
    Domain(Error),
    Service(ServiceError),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "error: {m}"),
            Failure::Domain(e) => write!(f, "error[{}]: {e}", e.code()),
            Failure::Service(e) => write!(f, "error[{}]: {e}", e.code()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

type Outcome = Result<(), Failure>;

fn usage(message: impl Into<String>) -> Failure {
    Failure::Usage(message.into())
}

/// Prints `value` as JSON in structured mode, `text()` otherwise.
fn emit<T: Serialize>(format: Format, value: &T, text: impl FnOnce() -> String) {
    match format {
        Format::Structured => println!(
            "{}",
            serde_json::to_string_pretty(value).expect("output is serializable")
        ),
        Format::Text => {
            let t = text();
            if !t.is_empty() {
                println!("{}", t.trim_end());
            }
        }
    }
}

fn open_store(path: &Path) -> Result<Store, Failure> {
    if path.exists() {
        Ok(load_project(path)?)
    } else {
        Ok(Store::new())
    }
}

/// The project behind a writer that saves every commit.
fn open_shared(path: &Path) -> Result<SharedStore, Failure> {
    Ok(SharedStore::with_autosave(open_store(path)?, path))
}

/// The mock when asked for; otherwise a configured provider. Never falls
/// back to the mock silently.
fn provider(
    config: &AppConfig,
    args: &ProviderArgs,
) -> Result<(Arc<dyn ModelProvider>, GenerationOptions), Failure> {
    if !args.mock && config.providers.is_empty() {
        return Err(usage(
            "no model provider configured; pass --mock or add a [[provider]] section to the config",
        ));
    }
    Ok(config.make_provider(args.provider.as_deref(), args.mock)?)
}

fn parse_slot(text: &str) -> Result<AdSlot, Failure> {
    let bad = || {
        usage(format!(
            "slot `{text}` is not of the form <start_ms>-<end_ms>"
        ))
    };
    let (a, b) = text.trim().split_once('-').ok_or_else(bad)?;
    let start = a.trim().parse().map_err(|_| bad())?;
    let end = b.trim().parse().map_err(|_| bad())?;
    Ok(AdSlot::new(start, end))
}

fn parse_category(name: &str) -> Result<PromptCategory, Failure> {
    PromptCategory::from_name(name).ok_or_else(|| {
        let names: Vec<_> = PromptCategory::ALL.iter().map(|c| c.name()).collect();
        usage(format!(
            "unknown category `{name}`; expected one of: {}",
            names.join(", ")
        ))
    })
}

/// `Keyword` or `Category=Keyword`.
fn parse_keyword(text: &str) -> Result<PredefinedTag, Failure> {
    let (category, keyword) = match text.split_once('=') {
        Some((c, k)) => {
            let c = CATEGORIES
                .into_iter()
                .find(|cat| cat.name().eq_ignore_ascii_case(c.trim()))
                .ok_or_else(|| usage(format!("unknown tag category `{}`", c.trim())))?;
            (Some(c), k)
        }
        None => (None, text),
    };
    let (found, canonical) = canonical_keyword(keyword)
        .ok_or_else(|| usage(format!("`{}` is not a predefined keyword", keyword.trim())))?;
    if category.is_some_and(|c| c != found) {
        return Err(usage(format!(
            "`{canonical}` belongs to category `{found}`"
        )));
    }
    Ok(PredefinedTag::new(found, canonical))
}

pub fn run(cli: Cli) -> Outcome {
    let config = AppConfig::load_or_default(cli.config.as_deref())?;
    let format = cli.format;
    let project = cli.project.as_path();

    match cli.command {
        Command::Ingest { source, title } => {
            let store = open_shared(project)?;
            let options = IngestOptions {
                decoder_command: config.ingest.decoder_command.clone(),
                title,
            };
            let asset = ingest_media(&source, &config.media_dir(project), &options)?;
            let asset = store.commit(|s| s.insert_video(asset))?;
            emit(format, &asset, || render::video_line(&asset));
        }

        Command::AddVideo { title, duration_ms } => {
            let store = open_shared(project)?;
            let asset = store.commit(|s| s.add_text_only_video(&title, duration_ms))?;
            emit(format, &asset, || render::video_line(&asset));
        }

        Command::List => {
            let store = open_store(project)?;
            let listing: Vec<_> = store
                .videos()
                .map(|v| json!({"video": v, "variations": store.variations_of(&v.id)}))
                .collect();
            emit(format, &listing, || render::listing(&store));
        }

        Command::Plan {
            audio,
            frames,
            video,
        } => {
            let analysis = match (audio, video) {
                (Some(audio), _) => analyze_files(&audio, frames.as_deref(), &config.timing)?,
                (None, Some(video)) => {
                    let store = open_store(project)?;
                    analyze_video(store.video(&VideoId(video))?, &config.timing)?
                }
                (None, None) => return Err(usage("pass --audio or --video")),
            };
            let out = json!({"duration_ms": analysis.duration_ms, "plan": analysis.plan});
            emit(format, &out, || {
                render::plan_table(&analysis.plan, analysis.duration_ms)
            });
        }

        Command::Generate {
            variation,
            video,
            name,
            author,
            instructions,
            slots,
            no_tags,
            provider: provider_args,
        } => {
            let (provider, options) = provider(&config, &provider_args)?;
            let store = open_shared(project)?;
            let slots: Vec<AdSlot> = slots
                .iter()
                .map(|s| parse_slot(s))
                .collect::<Result<_, _>>()?;
            let target = match (variation, video) {
                (Some(v), _) => {
                    let id = VariationId(v);
                    store.read().variation(&id)?;
                    id
                }
                (None, Some(video)) => {
                    let name = name.ok_or_else(|| usage("--name is required with --video"))?;
                    let video = VideoId(video);
                    store.read().video(&video)?;
                    store
                        .commit(|s| {
                            s.create_variation(&video, &name, &author, instructions.as_deref())
                        })?
                        .id
                }
                (None, None) => return Err(usage("pass --variation or --video")),
            };
            let slots = if slots.is_empty() {
                let video = store.read().video_of_variation(&target)?.clone();
                analyze_video(&video, &config.timing)?.plan.ad_slots()
            } else {
                slots
            };
            let descriptions = match generate_descriptions(
                &store,
                &target,
                &slots,
                provider.as_ref(),
                &options,
            ) {
                Ok(d) => d,
                Err(partial) => {
                    eprintln!(
                        "generation stopped after {} batch(es); {} description(s) were saved to variation {}",
                        partial.batches_completed,
                        partial.persisted.len(),
                        target
                    );
                    return Err(partial.error.into());
                }
            };
            let tags = if no_tags {
                None
            } else {
                match auto_tag_variation(&store, &target, provider.as_ref(), &options) {
                    Ok(t) => Some(t),
                    Err(e) => {
                        eprintln!(
                            "warning: tagging failed, tags left unchanged: [{}] {e}",
                            e.code()
                        );
                        None
                    }
                }
            };
            let out = json!({"variation_id": target, "descriptions": descriptions, "tags": tags});
            emit(format, &out, || {
                render::generated(&target, &descriptions, tags.as_ref())
            });
        }

        Command::Revise {
            variation,
            prompt,
            descriptions,
            all,
            category,
            provider: provider_args,
        } => {
            let category = category.as_deref().map(parse_category).transpose()?;
            let (provider, options) = provider(&config, &provider_args)?;
            let store = open_shared(project)?;
            let variation = VariationId(variation);
            let targets: Vec<DescriptionId> = if all {
                store
                    .read()
                    .descriptions_of(&variation)
                    .iter()
                    .map(|d| d.id.clone())
                    .collect()
            } else {
                descriptions.into_iter().map(DescriptionId).collect()
            };
            let report = revise_descriptions(
                &store,
                &variation,
                &targets,
                &prompt,
                category,
                provider.as_ref(),
                &options,
            )?;
            let s = store.read();
            let proposals: Vec<_> = report
                .proposals
                .iter()
                .map(|(id, proposed)| {
                    let old = s
                        .description(id)
                        .map(|d| d.text.clone())
                        .unwrap_or_default();
                    let proposed = s
                        .pending_proposal(id)
                        .map_or(proposed.clone(), |p| p.proposed_text.clone());
                    json!({
                        "description_id": id,
                        "old_text": old,
                        "proposed_text": proposed,
                        "diff": word_diff(&old, &proposed),
                    })
                })
                .collect();
            for (id, e) in &report.failures {
                eprintln!("warning: no proposal for {id}: [{}] {e}", e.code());
            }
            let failures: Vec<_> = report
                .failures
                .iter()
                .map(|(id, e)| json!({"description_id": id, "code": e.code(), "message": e.to_string()}))
                .collect();
            let out = json!({
                "prompt_event_id": report.prompt_event_id,
                "proposals": proposals,
                "failures": failures,
            });
            emit(format, &out, || render::proposals(&proposals));
        }

        Command::Resolve {
            description,
            decision,
        } => {
            let store = open_shared(project)?;
            let decision = match decision {
                DecisionArg::Accept => Decision::Accept,
                DecisionArg::Reject => Decision::Reject,
            };
            let d = store.commit(|s| s.resolve_proposal(&DescriptionId(description), decision))?;
            emit(format, &d, || d.text.clone());
        }

        Command::Fork {
            variation,
            author,
            name,
        } => {
            let store = open_shared(project)?;
            let child = store
                .commit(|s| s.fork_variation(&VariationId(variation), &author, name.as_deref()))?;
            emit(format, &child, || child.id.to_string());
        }

        Command::Tags {
            variation,
            keywords,
            custom,
            generate,
            provider: provider_args,
        } => {
            let store = open_shared(project)?;
            let id = VariationId(variation);
            store.read().variation(&id)?;
            let mut warnings = Vec::new();
            if generate {
                let (provider, options) = provider(&config, &provider_args)?;
                warnings = auto_tag_variation(&store, &id, provider.as_ref(), &options)?.warnings;
            } else if !keywords.is_empty() || !custom.is_empty() {
                let tags = TagSet {
                    predefined: keywords
                        .iter()
                        .map(|k| parse_keyword(k))
                        .collect::<Result<_, _>>()?,
                    custom,
                };
                store.commit(|s| s.set_tags(&id, tags))?;
            }
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            let tags = store.read().variation(&id)?.tags.clone();
            emit(format, &tags, || render::tags(&tags));
        }

        Command::Show { variation } => {
            let store = open_store(project)?;
            let id = VariationId(variation);
            let v = store.variation(&id)?;
            let descriptions = store.descriptions_of(&id);
            let proposals: Vec<_> = descriptions
                .iter()
                .filter_map(|d| store.pending_proposal(&d.id))
                .collect();
            let out = json!({"variation": v, "descriptions": descriptions, "pending_proposals": proposals});
            emit(format, &out, || render::variation(&store, v));
        }

        Command::Export { variation, out } => {
            let store = open_store(project)?;
            let vtt = export_webvtt(&store, &VariationId(variation))?;
            match out {
                Some(path) => std::fs::write(&path, vtt).map_err(|e| Error::Io {
                    path: path.clone(),
                    source: e,
                })?,
                None => print!("{vtt}"),
            }
        }

        Command::Import {
            file,
            video,
            name,
            author,
        } => {
            let text = std::fs::read_to_string(&file).map_err(|e| Error::Io {
                path: file.clone(),
                source: e,
            })?;
            let store = open_shared(project)?;
            let v = store.commit(|s| import_webvtt(s, &text, &VideoId(video), &name, &author))?;
            emit(format, &v, || v.id.to_string());
        }

        Command::Metrics {
            variation,
            against,
            embeddings,
        } => {
            let embeddings: BTreeMap<DescriptionId, Embeddings> = match embeddings {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| Error::Io {
                        path: path.clone(),
                        source: e,
                    })?;
                    serde_json::from_str(&text)
                        .map_err(|e| Error::InvalidInput(format!("embeddings file: {e}")))?
                }
                None => BTreeMap::new(),
            };
            let store = open_store(project)?;
            let report = compare_variations(
                &store,
                &VariationId(against),
                &VariationId(variation),
                &embeddings,
            )?;
            emit(format, &report, || render::metrics(&report));
        }

        Command::Serve {
            bind,
            provider: provider_args,
        } => {
            if provider_args.provider.is_some() && config.providers.is_empty() {
                return Err(usage(
                    "--provider given but the config defines no providers",
                ));
            }
            let runtime = tokio::runtime::Runtime::new()
                .map_err(|e| Error::InvalidInput(format!("cannot start runtime: {e}")))?;
            runtime.block_on(async {
                let handle = start_server(ServerOptions {
                    project_path: project.to_owned(),
                    bind,
                    config,
                    mock: provider_args.mock,
                    provider_name: provider_args.provider,
                })
                .await
                .map_err(Failure::Service)?;
                eprintln!("listening on http://{}", handle.addr);
                handle.run_until_ctrl_c().await.map_err(Failure::Domain)
            })?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slot_and_keyword_parsing() {
        assert_eq!(parse_slot(" 0 - 3000").ok(), Some(AdSlot::new(0, 3000)));
        assert!(parse_slot("3000").is_err());
        assert_eq!(
            parse_keyword("focus=character FOCUS")
                .ok()
                .map(|t| t.keyword),
            Some("Character focus".to_owned())
        );
        assert!(parse_keyword("Detail Level=Concise").is_err());
        assert!(parse_keyword("nonsense").is_err());
        assert_eq!(
            parse_category("text on screen").ok(),
            Some(PromptCategory::TextOnScreen)
        );
    }
}
