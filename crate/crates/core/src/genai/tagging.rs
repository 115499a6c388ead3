use serde::Serialize;

use super::prompts::build_tag_prompt;
use super::provider::{ModelProvider, ProviderRequest};
use crate::tags::{canonical_keyword, PredefinedTag, TagSet, MAX_CUSTOM, MAX_PREDEFINED};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TagOutcome {
    pub tags: TagSet,
    /// One line per keyword that was dropped, in list order.
    pub warnings: Vec<String>,
}

/// Items of every `[...]` list in `text`, in order. Items may be bare or
/// quoted with `"` or `'`; quoted items may contain commas and brackets.
pub fn bracketed_lists(text: &str) -> Vec<Vec<String>> {
    let mut lists = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c != '[' {
            continue;
        }
        let mut items = Vec::new();
        let mut item = String::new();
        let mut quote: Option<char> = None;
        let mut closed = false;
        while let Some(c) = chars.next() {
            match quote {
                Some(q) if c == q => quote = None,
                Some(_) if c == '\\' => {
                    if let Some(n) = chars.next() {
                        item.push(n);
                    }
                }
                Some(_) => item.push(c),
                None => match c {
                    '"' | '\'' if item.trim().is_empty() => {
                        item.clear();
                        quote = Some(c);
                    }
                    ',' => items.push(std::mem::take(&mut item)),
                    ']' => {
                        closed = true;
                        break;
                    }
                    _ => item.push(c),
                },
            }
        }
        if !closed {
            break;
        }
        items.push(item);
        let items: Vec<String> = items
            .into_iter()
            .map(|s| s.split_whitespace().collect::<Vec<_>>().join(" "))
            .collect();
        // `[]` and `[ ]` are empty lists, not a single empty item.
        if items.len() == 1 && items[0].is_empty() {
            lists.push(Vec::new());
        } else {
            lists.push(items);
        }
    }
    lists
}

/// Reads the keyword and additional-keyword lists from a tagging answer and
/// keeps only what fits the vocabulary rules, dropping offenders in list
/// order. The result always validates.
pub fn parse_tag_response(text: &str) -> Result<TagOutcome> {
    let lists = bracketed_lists(text);
    let Some(first) = lists.first() else {
        return Err(Error::UnparseableResponse(
            "no bracketed keyword list found".into(),
        ));
    };
    let mut tags = TagSet::default();
    let mut warnings = Vec::new();
    for raw in first {
        if raw.is_empty() {
            warnings.push("dropped empty keyword".into());
            continue;
        }
        let Some((category, keyword)) = canonical_keyword(raw) else {
            warnings.push(format!("dropped unknown keyword `{raw}`"));
            continue;
        };
        if let Some(taken) = tags.predefined.iter().find(|t| t.category == category) {
            warnings.push(format!(
                "dropped `{keyword}`: category `{category}` already has `{}`",
                taken.keyword
            ));
            continue;
        }
        if tags.predefined.len() == MAX_PREDEFINED {
            warnings.push(format!(
                "dropped `{keyword}`: at most {MAX_PREDEFINED} keywords"
            ));
            continue;
        }
        tags.predefined.push(PredefinedTag::new(category, keyword));
    }
    for raw in lists.get(1).into_iter().flatten() {
        if raw.is_empty() {
            warnings.push("dropped empty additional keyword".into());
            continue;
        }
        if tags
            .custom
            .iter()
            .any(|c| c.to_lowercase() == raw.to_lowercase())
        {
            warnings.push(format!("dropped repeated additional keyword `{raw}`"));
            continue;
        }
        if tags.custom.len() == MAX_CUSTOM {
            warnings.push(format!(
                "dropped `{raw}`: at most {MAX_CUSTOM} additional keywords"
            ));
            continue;
        }
        tags.custom.push(raw.clone());
    }
    if lists.len() > 2 {
        warnings.push(format!("ignored {} extra lists", lists.len() - 2));
    }
    debug_assert!(tags.validate().is_ok());
    Ok(TagOutcome { tags, warnings })
}

/// Asks the provider to tag a set of descriptions.
pub fn generate_tags<S: AsRef<str>>(
    descriptions: &[S],
    provider: &dyn ModelProvider,
    model: &str,
    max_tokens: u32,
) -> Result<TagOutcome> {
    let prompt = build_tag_prompt(descriptions)?;
    let response = provider.complete(&ProviderRequest {
        model: model.to_owned(),
        prompt,
        images: Vec::new(),
        max_tokens,
    })?;
    let outcome = parse_tag_response(&response.text)?;
    for w in &outcome.warnings {
        log::warn!("tagging: {w}");
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tags::TagCategory;

    #[test]
    fn two_lists() {
        let out = parse_tag_response(r#"["Concise","Main story focus"] ["Upbeat"]"#).unwrap();
        assert_eq!(out.tags.predefined.len(), 2);
        assert_eq!(out.tags.custom, vec!["Upbeat"]);
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn fifth_keyword_dropped() {
        let out = parse_tag_response(
            "keywords = ['Concise', 'Main story focus', 'With Interpretations', 'Low detail', 'Brief action']\nadditional_keywords = []",
        )
        .unwrap();
        assert_eq!(out.tags.predefined.len(), 4);
        assert_eq!(out.warnings.len(), 1);
        assert!(out.tags.custom.is_empty());
    }

    #[test]
    fn offenders_dropped_in_order() {
        let out = parse_tag_response(r#"["concise", "Complete description", "Nope", "high  detail"] ["a", "A", "b", "c", ""]"#)
            .unwrap();
        assert_eq!(
            out.tags.predefined,
            vec![
                PredefinedTag::new(TagCategory::DescriptionLength, "Concise"),
                PredefinedTag::new(TagCategory::DetailLevel, "High detail"),
            ]
        );
        assert_eq!(out.tags.custom, vec!["a", "b"]);
        assert_eq!(out.warnings.len(), 5);
    }

    #[test]
    fn no_lists() {
        assert_eq!(
            parse_tag_response("no tags here").unwrap_err().code(),
            "UnparseableResponse"
        );
        assert_eq!(
            parse_tag_response("[\"Concise\"").unwrap_err().code(),
            "UnparseableResponse"
        );
    }

    #[test]
    fn quoted_items_keep_commas() {
        assert_eq!(
            bracketed_lists(r#"["a, b", 'c]', d ] []"#),
            vec![vec!["a, b".to_string(), "c]".into(), "d".into()], vec![]]
        );
    }
}
