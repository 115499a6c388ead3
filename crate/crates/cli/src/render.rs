//! Plain-text output for the `text` format.

use std::fmt::Write;

use serde_json::Value;

use adscribe_core::genai::TagOutcome;
use adscribe_core::revision::VariationComparison;
use adscribe_core::timing::AdPlan;
use adscribe_core::{AuthorKind, Description, Store, TagSet, Variation, VariationId, VideoAsset};

pub fn video_line(v: &VideoAsset) -> String {
    let media = if v.media_refs.is_empty() {
        "text-only"
    } else {
        "media"
    };
    format!("{}\t{}\t{} ms\t{media}", v.id, v.title, v.duration_ms)
}

pub fn listing(store: &Store) -> String {
    let mut out = String::new();
    for v in store.videos() {
        let _ = writeln!(out, "{}", video_line(v));
        for var in store.variations_of(&v.id) {
            let _ = writeln!(
                out,
                "  {}\t{}\tby {}\tforks: {}\tdescriptions: {}",
                var.id,
                var.name,
                var.author_name,
                var.fork_count,
                store.descriptions_of(&var.id).len()
            );
        }
    }
    out
}

pub fn plan_table(plan: &AdPlan, duration_ms: u64) -> String {
    let mut out = format!(
        "{:>3}  {:>9}  {:>9}  {:>9}  level\n",
        "#", "start_ms", "end_ms", "length_ms"
    );
    for (i, p) in plan.slots.iter().enumerate() {
        let _ = writeln!(
            out,
            "{:>3}  {:>9}  {:>9}  {:>9}  {}",
            i + 1,
            p.slot.start_ms,
            p.slot.end_ms,
            p.slot.len_ms(),
            p.level.label()
        );
    }
    let _ = write!(out, "{} slots over {duration_ms} ms", plan.len());
    out
}

fn description_line(d: &Description) -> String {
    let who = match d.author_kind {
        AuthorKind::Ai => "AI",
        AuthorKind::Human => "HUMAN",
    };
    format!(
        "{}\t{}-{}\t{who}:{}\t{}",
        d.id, d.slot.start_ms, d.slot.end_ms, d.author_name, d.text
    )
}

pub fn tags(tags: &TagSet) -> String {
    let mut out = String::new();
    for t in &tags.predefined {
        let _ = writeln!(out, "{}: {}", t.category, t.keyword);
    }
    for c in &tags.custom {
        let _ = writeln!(out, "custom: {c}");
    }
    if out.is_empty() {
        out.push_str("(no tags)");
    }
    out
}

pub fn generated(
    variation: &VariationId,
    descriptions: &[Description],
    outcome: Option<&TagOutcome>,
) -> String {
    let mut out = format!(
        "variation {variation}: {} descriptions\n",
        descriptions.len()
    );
    for d in descriptions {
        let _ = writeln!(out, "{}", description_line(d));
    }
    if let Some(o) = outcome {
        out.push_str(&tags(&o.tags));
    }
    out
}

/// Word diff in `[-deleted-] {+inserted+}` notation.
fn inline_diff(diff: &Value) -> String {
    let mut parts = Vec::new();
    for op in diff["ops"].as_array().into_iter().flatten() {
        let words: Vec<&str> = op["tokens"]
            .as_array()
            .into_iter()
            .flatten()
            .filter_map(Value::as_str)
            .collect();
        let words = words.join(" ");
        parts.push(match op["op"].as_str() {
            Some("DELETE") => format!("[-{words}-]"),
            Some("INSERT") => format!("{{+{words}+}}"),
            _ => words,
        });
    }
    parts.join(" ")
}

pub fn proposals(proposals: &[Value]) -> String {
    let mut out = String::new();
    for p in proposals {
        let _ = writeln!(out, "{}", p["description_id"].as_str().unwrap_or_default());
        let _ = writeln!(out, "  - {}", p["old_text"].as_str().unwrap_or_default());
        let _ = writeln!(
            out,
            "  + {}",
            p["proposed_text"].as_str().unwrap_or_default()
        );
        let _ = writeln!(out, "  ~ {}", inline_diff(&p["diff"]));
    }
    out
}

pub fn variation(store: &Store, v: &Variation) -> String {
    let mut out = format!(
        "{} ({})\nauthor: {}\nforks: {}\n",
        v.name, v.id, v.author_name, v.fork_count
    );
    if let Some(parent) = &v.parent_id {
        let name = store
            .variation(parent)
            .map(|p| p.name.as_str())
            .unwrap_or("?");
        let _ = writeln!(out, "parent: {name} ({parent})");
    }
    if let Some(i) = &v.custom_instructions {
        let _ = writeln!(out, "instructions: {i}");
    }
    out.push_str(&tags(&v.tags));
    out.push('\n');
    for d in store.descriptions_of(&v.id) {
        let _ = writeln!(out, "{}", description_line(d));
        if let Some(p) = store.pending_proposal(&d.id) {
            let _ = writeln!(out, "  proposal: {}", p.proposed_text);
        }
    }
    out
}

pub fn metrics(report: &VariationComparison) -> String {
    let mut out = format!(
        "{:>3}  {:>13}  {:>13}  {:>8}  {:>4}  {:>4}  {:>4}  {:>7}\n",
        "#", "original", "revised", "distance", "ins", "del", "sub", "lexical"
    );
    for (i, p) in report.pairs.iter().enumerate() {
        let _ = writeln!(
            out,
            "{:>3}  {:>13}  {:>13}  {:>8}  {:>4}  {:>4}  {:>4}  {:>7.3}",
            i + 1,
            format!("{}-{}", p.original_slot.start_ms, p.original_slot.end_ms),
            format!("{}-{}", p.revised_slot.start_ms, p.revised_slot.end_ms),
            p.edits.distance,
            p.edits.insertions,
            p.edits.deletions,
            p.edits.substitutions,
            p.similarity.lexical_ratio
        );
    }
    let m = &report.mean;
    let _ = writeln!(
        out,
        "mean over {} pairs: distance {:.1}, lexical {:.3}",
        m.pairs, m.distance, m.lexical_ratio
    );
    if let Some(c) = m.semantic_cosine {
        let _ = writeln!(out, "semantic cosine {c:.3}");
    }
    if let Some(c) = m.stylistic_cosine {
        let _ = writeln!(out, "stylistic cosine {c:.3}");
    }
    let unmatched = report.unmatched_original.len() + report.unmatched_revised.len();
    if unmatched > 0 {
        let _ = writeln!(
            out,
            "unmatched: {} original, {} revised",
            report.unmatched_original.len(),
            report.unmatched_revised.len()
        );
    }
    out
}
