//! The closed tag vocabulary used to label variations, and tag-set validation.

use std::fmt;

use serde::{Deserialize, Serialize};

/// One of the eight tag categories, in prompt order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TagCategory {
    #[serde(rename = "Description Length")]
    DescriptionLength,
    #[serde(rename = "Focus")]
    Focus,
    #[serde(rename = "Interpretations")]
    Interpretations,
    #[serde(rename = "Detail Level")]
    DetailLevel,
    #[serde(rename = "Action Description")]
    ActionDescription,
    #[serde(rename = "Character Details")]
    CharacterDetails,
    #[serde(rename = "Tagging of Key Visuals/Objects")]
    KeyVisuals,
    #[serde(rename = "Environmental Description")]
    EnvironmentalDescription,
}

pub const CATEGORIES: [TagCategory; 8] = [
    TagCategory::DescriptionLength,
    TagCategory::Focus,
    TagCategory::Interpretations,
    TagCategory::DetailLevel,
    TagCategory::ActionDescription,
    TagCategory::CharacterDetails,
    TagCategory::KeyVisuals,
    TagCategory::EnvironmentalDescription,
];

pub const MAX_PREDEFINED: usize = 4;
pub const MAX_CUSTOM: usize = 2;

impl TagCategory {
    pub fn name(self) -> &'static str {
        match self {
            TagCategory::DescriptionLength => "Description Length",
            TagCategory::Focus => "Focus",
            TagCategory::Interpretations => "Interpretations",
            TagCategory::DetailLevel => "Detail Level",
            TagCategory::ActionDescription => "Action Description",
            TagCategory::CharacterDetails => "Character Details",
            TagCategory::KeyVisuals => "Tagging of Key Visuals/Objects",
            TagCategory::EnvironmentalDescription => "Environmental Description",
        }
    }

    pub fn keywords(self) -> &'static [&'static str] {
        match self {
            TagCategory::DescriptionLength => &["Concise", "Complete description"],
            TagCategory::Focus => &["Main story focus", "Character focus", "Environment focus"],
            TagCategory::Interpretations => &["With Interpretations", "Without Interpretations"],
            TagCategory::DetailLevel => &["Low detail", "Medium detail", "High detail"],
            TagCategory::ActionDescription => &["Detailed action", "Brief action", "No action"],
            TagCategory::CharacterDetails => {
                &["Character-driven", "Action-driven", "Environmental focus"]
            }
            TagCategory::KeyVisuals => &[
                "Key visuals highlighted",
                "Important objects tagged",
                "Minimal object tagging",
            ],
            TagCategory::EnvironmentalDescription => &[
                "Detailed environment",
                "Basic environment",
                "Environment-free",
            ],
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        CATEGORIES.into_iter().find(|c| c.name() == name)
    }
}

impl fmt::Display for TagCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Looks up the category owning `keyword` (exact match). Keywords are unique
/// across categories, so the answer is unambiguous.
pub fn category_of(keyword: &str) -> Option<TagCategory> {
    CATEGORIES
        .into_iter()
        .find(|c| c.keywords().contains(&keyword))
}

/// Case- and whitespace-insensitive lookup returning the canonical spelling.
pub fn canonical_keyword(keyword: &str) -> Option<(TagCategory, &'static str)> {
    let wanted = normalize(keyword);
    CATEGORIES.into_iter().find_map(|c| {
        c.keywords()
            .iter()
            .find(|k| normalize(k) == wanted)
            .map(|k| (c, *k))
    })
}

fn normalize(s: &str) -> String {
    s.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredefinedTag {
    pub category: TagCategory,
    pub keyword: String,
}

impl PredefinedTag {
    pub fn new(category: TagCategory, keyword: impl Into<String>) -> Self {
        PredefinedTag {
            category,
            keyword: keyword.into(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagSet {
    pub predefined: Vec<PredefinedTag>,
    pub custom: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum TagSetViolation {
    TooManyPredefined {
        count: usize,
    },
    TooManyCustom {
        count: usize,
    },
    DuplicateCategory {
        category: TagCategory,
    },
    UnknownKeyword {
        category: TagCategory,
        keyword: String,
    },
    EmptyCustom,
    DuplicateCustom {
        keyword: String,
    },
}

impl fmt::Display for TagSetViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TagSetViolation::TooManyPredefined { count } => {
                write!(f, "{count} predefined keywords (max {MAX_PREDEFINED})")
            }
            TagSetViolation::TooManyCustom { count } => {
                write!(f, "{count} custom keywords (max {MAX_CUSTOM})")
            }
            TagSetViolation::DuplicateCategory { category } => {
                write!(f, "more than one keyword from category `{category}`")
            }
            TagSetViolation::UnknownKeyword { category, keyword } => {
                write!(f, "`{keyword}` is not a keyword of category `{category}`")
            }
            TagSetViolation::EmptyCustom => f.write_str("custom keyword is empty"),
            TagSetViolation::DuplicateCustom { keyword } => {
                write!(f, "custom keyword `{keyword}` repeated")
            }
        }
    }
}

impl TagSet {
    pub fn is_empty(&self) -> bool {
        self.predefined.is_empty() && self.custom.is_empty()
    }

    pub fn validate(&self) -> Result<(), TagSetViolation> {
        if self.predefined.len() > MAX_PREDEFINED {
            return Err(TagSetViolation::TooManyPredefined {
                count: self.predefined.len(),
            });
        }
        let mut seen = Vec::with_capacity(self.predefined.len());
        for tag in &self.predefined {
            if !tag.category.keywords().contains(&tag.keyword.as_str()) {
                return Err(TagSetViolation::UnknownKeyword {
                    category: tag.category,
                    keyword: tag.keyword.clone(),
                });
            }
            if seen.contains(&tag.category) {
                return Err(TagSetViolation::DuplicateCategory {
                    category: tag.category,
                });
            }
            seen.push(tag.category);
        }
        if self.custom.len() > MAX_CUSTOM {
            return Err(TagSetViolation::TooManyCustom {
                count: self.custom.len(),
            });
        }
        for (i, c) in self.custom.iter().enumerate() {
            if c.trim().is_empty() {
                return Err(TagSetViolation::EmptyCustom);
            }
            if self.custom[..i].contains(c) {
                return Err(TagSetViolation::DuplicateCustom { keyword: c.clone() });
            }
        }
        Ok(())
    }

    /// All keywords, predefined first.
    pub fn keywords(&self) -> impl Iterator<Item = &str> {
        self.predefined
            .iter()
            .map(|t| t.keyword.as_str())
            .chain(self.custom.iter().map(String::as_str))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vocabulary_shape() {
        assert_eq!(CATEGORIES.len(), 8);
        let total: usize = CATEGORIES.iter().map(|c| c.keywords().len()).sum();
        assert_eq!(total, 22);
        for c in CATEGORIES {
            for k in c.keywords() {
                assert_eq!(category_of(k), Some(c), "{k} must map to one category");
            }
        }
    }

    #[test]
    fn accepts_focus_detail_and_custom() {
        let tags = TagSet {
            predefined: vec![
                PredefinedTag::new(TagCategory::Focus, "Main story focus"),
                PredefinedTag::new(TagCategory::DetailLevel, "Low detail"),
            ],
            custom: vec!["Optimistic".into()],
        };
        assert_eq!(tags.validate(), Ok(()));
    }

    #[test]
    fn rejects_five_predefined() {
        let tags = TagSet {
            predefined: vec![
                PredefinedTag::new(TagCategory::DescriptionLength, "Concise"),
                PredefinedTag::new(TagCategory::Focus, "Character focus"),
                PredefinedTag::new(TagCategory::DetailLevel, "Low detail"),
                PredefinedTag::new(TagCategory::ActionDescription, "No action"),
                PredefinedTag::new(TagCategory::KeyVisuals, "Minimal object tagging"),
            ],
            custom: vec![],
        };
        assert_eq!(
            tags.validate(),
            Err(TagSetViolation::TooManyPredefined { count: 5 })
        );
    }

    #[test]
    fn rejects_two_focus_keywords() {
        let tags = TagSet {
            predefined: vec![
                PredefinedTag::new(TagCategory::Focus, "Main story focus"),
                PredefinedTag::new(TagCategory::Focus, "Character focus"),
            ],
            custom: vec![],
        };
        assert!(matches!(
            tags.validate(),
            Err(TagSetViolation::DuplicateCategory { .. })
        ));
    }

    #[test]
    fn rejects_keyword_from_wrong_category() {
        let tags = TagSet {
            predefined: vec![PredefinedTag::new(TagCategory::Focus, "Concise")],
            custom: vec![],
        };
        assert!(matches!(
            tags.validate(),
            Err(TagSetViolation::UnknownKeyword { .. })
        ));
    }

    #[test]
    fn canonical_lookup_ignores_case() {
        assert_eq!(
            canonical_keyword("  main STORY focus"),
            Some((TagCategory::Focus, "Main story focus"))
        );
        assert_eq!(canonical_keyword("Upbeat"), None);
    }
}
