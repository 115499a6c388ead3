//! The three model prompts: baseline generation, tagging and revision.
//! Template text is kept exactly as published, including its typography.

use std::fmt::Write as _;

use crate::tags::CATEGORIES;
use crate::{Error, Result};

const GENERATION_INTRO: &str = "You are an AI designed to assist in creating high-quality and contextually rich descriptions for videos aimed at enhancing accessibility for blind and low-vision users. Your task is to generate video descriptions that are descriptive, objective, accurate, and clear while being fast and responsive in their creation. The descriptions should be highly personalized, based on interactive guidance from a human describer who will provide specific guidelines during the process. The input consists of a set of images representing key scenes or frames from the video. You must analyze these images to identify critical visual elements such as settings, characters, actions, emotions, and key objects. Using this analysis, you will construct a narrative that maintains logical continuity across scenes. The descriptions should ensure smooth transitions, providing the BLV user with a comprehensive and immersive understanding of the video's content. The goal is to improve accessibility, making the experience more engaging and inclusive. The descriptions should be customizable to different user preferences, offering an inclusive and personalized experience. If descriptions from previous API calls are available, they should be taken into account to ensure contextual relevance.";

const SPECIFIC_PRIORITY: &str = "Additionally, you should use both General Guidelines and Specific Guidelines when creating the descriptions. While both are important, the Specific Guidelines, which are defined by a human describer, should take priority and be given greater emphasis. For each description you generate, explicitly indicate which general guidelines were not followed and explain why they were ignored in the output. This will enhance explainability and transparency in your decision-making process.";

pub const SPECIFIC_PLACEHOLDER: &str = "{User provided specific guidelines}";

/// The general describing guidelines, in published order.
pub const GENERAL_GUIDELINES: [&str; 42] = [
    "Avoid over-describing and do not include non-essential visual details.",
    "Descriptions should not be opinionated unless the content demands it.",
    "Choose a level of detail based on plot relevance when describing scenes.",
    "Descriptions should be informative and conversational, using present tense and a third-person omniscient perspective.",
    "The vocabulary should reflect the predominant language or accent of the program and should be consistent with the genre and tone while being mindful of the target audience.",
    "Consider historical context and avoid words with negative connotations or bias.",
    "Use vivid verbs rather than bland ones with adverbs.",
    "Use pronouns only when it is clear whom they refer to.",
    "Use comparisons for shapes and sizes with familiar and globally relevant objects.",
    "Maintain consistency in word choice, character qualities, and visual elements across all audio descriptions.",
    "Ensure the tone and vocabulary match the target audience\u{2019}s age range.",
    "Avoid errors in word selection, pronunciation, diction, or enunciation.",
    "Start with general context before adding details.",
    "Describe shape, size, texture, or color only when appropriate to the content.",
    "Use first-person narrative only when required to engage the audience.",
    "Use articles appropriately when introducing or referring to subjects.",
    "Prefer formal speech over colloquialisms unless appropriate for the content.",
    "When introducing new terms, objects, or actions, label them first and then follow with their definitions.",
    "Describe objectively without personal interpretation or commentary, and do not censor content.",
    "Deliver narration steadily and impersonally, but not monotonously, while matching the program's tone.",
    "Adjust the style for emotion and mood according to the program\u{2019}s genre, adding excitement or lightness when appropriate.",
    "For children's content, tailor the language and pacing to suit their comprehension and feedback.",
    "Do not alter, filter, or exclude content\u{2014}describe what you see while ensuring simplicity and succinctness.",
    "Prioritize relevance when describing actions to avoid affecting the user experience.",
    "Include location, time, and weather conditions if they are relevant to the scene or plot.",
    "Focus on key content for learning and enjoyment so that the intention of the program is effectively conveyed.",
    "When describing instructional content, present the sequence of activities first.",
    "For dramatic productions, highlight elements such as style, setting, focus, period, dress, facial features, objects, and aesthetics.",
    "Emphasize the most essential aspects of a scene to help the viewer follow, understand, and appreciate the content.",
    "Audio descriptions should include details about characters, locations, time, circumstances, on-screen actions, and on-screen text when relevant.",
    "Describe only what a sighted viewer can see.",
    "When describing characters, prioritize factual traits such as hair, skin, eye color, build, height, age, and visible disabilities while ensuring consistency. Use person-first language and avoid singling out characters for specific traits unless they are relevant to the story.",
    "If racial, ethnic, or gender identity is not confirmed or established in the plot, do not make assumptions.",
    "When introducing characters for the first time, aim to include a descriptor before the name (e.g., \"a bearded man, Jack\").",
    "Descriptions should convey facial expressions, body language, and reactions.",
    "If race is important to the meaning or intent of the content, describe it using currently accepted terminology.",
    "Avoid identifying characters solely by gender expression unless it provides unique insights not otherwise apparent to visually impaired viewers.",
    "Describe character clothing if it enhances characterization, plot, setting, or genre enjoyment.",
    "If on-screen text is central to understanding, establish a pattern of reading the words aloud and announce when text appears.",
    "In the case of subtitles, read the translation after stating that a subtitle appears.",
    "When shot changes are crucial to understanding a scene, indicate them by describing where the action takes place or where characters are positioned in the new shot.",
    "Provide descriptions before the content rather than after. Keep descriptions between 25 to 50 words in length.",
];

const TAG_INTRO: &str = "You are an AI designed to assist in analyzing the provided list of descriptions and identifying a set of up to four most relevant keywords from the following categories. Your response should consist solely of a Python list of keywords, with no further explanations, formatting, or extra text.";

const TAG_RULES: &str = "You can select a maximum of one keyword from each category, for a total of up to four keywords. Additionally, feel free to include up to two additional keywords that may not be listed, if relevant.\nYou should generate two lists. One list includes the keywords and the other one includes additional_keywords.";

pub const TAG_PLACEHOLDER: &str = "{AI generated initial descriptions}";

const REVISION_TEMPLATE: &str = "You are an advanced AI designed to enhance and refine audio descriptions for videos, specifically aimed at improving accessibility for blind and low-vision (BLV) users. Your task is to customize these descriptions based on input prompt, ensuring they are tailored to the specific needs and preferences of the user.
Your role is to revise the provided descriptions, making necessary adjustments to align with the user's goals\u{2014}whether it's increasing detail, adjusting the tone, improving clarity or something else. Your objective is to ensure that each description not only meets the prompt's requirements but also enhances the overall accessibility and experience for BLV users.

Input Prompt:
{User provided prompt}
Description:
{User provided description to be revised}

You will also be provided with relevant video frames. Use them to enrich the descriptions where necessary.
**Return only the revised description with no introductory text, explanations, or additional commentary.**";

pub const REVISION_PROMPT_PLACEHOLDER: &str = "{User provided prompt}";
pub const REVISION_DESCRIPTION_PLACEHOLDER: &str = "{User provided description to be revised}";

/// Baseline generation prompt. Instructions, when given and non-blank, are
/// placed under "Specific Guidelines:" together with the paragraph that
/// gives them priority.
pub fn build_generation_prompt(custom_instructions: Option<&str>) -> String {
    let mut out = String::from(GENERATION_INTRO);
    out.push_str("\n\n");
    if let Some(instructions) = custom_instructions.map(str::trim).filter(|s| !s.is_empty()) {
        out.push_str(SPECIFIC_PRIORITY);
        out.push_str("\n\nSpecific Guidelines:\n");
        out.push_str(instructions);
        out.push_str("\n\n");
    }
    out.push_str("General Guidelines:\n");
    for (i, g) in GENERAL_GUIDELINES.iter().enumerate() {
        let _ = writeln!(out, "{}. {g}", i + 1);
    }
    out
}

/// Category lines of the tagging prompt, rendered from the vocabulary.
fn tag_vocabulary_block() -> String {
    let mut out = String::new();
    for c in CATEGORIES {
        let _ = writeln!(out, "- {}: [{}]", c.name(), c.keywords().join(", "));
    }
    out
}

/// Tagging prompt with the descriptions listed one per line.
pub fn build_tag_prompt<S: AsRef<str>>(descriptions: &[S]) -> Result<String> {
    if descriptions.is_empty() {
        return Err(Error::InvalidInput(
            "tagging needs at least one description".into(),
        ));
    }
    let listing = descriptions
        .iter()
        .map(|d| d.as_ref().trim())
        .collect::<Vec<_>>()
        .join("\n");
    let mut out = String::from(TAG_INTRO);
    out.push('\n');
    out.push_str(&tag_vocabulary_block());
    out.push('\n');
    out.push_str(TAG_RULES);
    out.push_str("\n\nDescriptions:\n");
    out.push_str(&listing);
    out.push('\n');
    Ok(out)
}

pub fn build_revision_prompt(user_prompt: &str, description: &str) -> Result<String> {
    let (prompt, description) = (user_prompt.trim(), description.trim());
    if prompt.is_empty() {
        return Err(Error::EmptyPrompt);
    }
    if description.is_empty() {
        return Err(Error::EmptyText);
    }
    // Substitute the description first so a prompt containing the second
    // placeholder's text is never expanded.
    let (head, tail) = REVISION_TEMPLATE
        .split_once(REVISION_PROMPT_PLACEHOLDER)
        .expect("template has a prompt slot");
    Ok(format!(
        "{head}{prompt}{}",
        tail.replacen(REVISION_DESCRIPTION_PLACEHOLDER, description, 1)
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_prompt_sections() {
        let plain = build_generation_prompt(None);
        assert!(plain.contains("General Guidelines:\n1. Avoid over-describing"));
        assert!(plain.contains("42. Provide descriptions before the content rather than after. Keep descriptions between 25 to 50 words in length.\n"));
        assert!(!plain.contains("Specific Guidelines"));
        assert!(!plain.contains("\u{2014}\u{2014}"));

        let custom = build_generation_prompt(Some("focus on hands"));
        assert!(custom.contains("should take priority"));
        assert!(custom.contains("Specific Guidelines:\nfocus on hands\n"));
        assert_eq!(build_generation_prompt(Some("   ")), plain);
    }

    #[test]
    fn guidelines_are_numbered_in_order() {
        let p = build_generation_prompt(None);
        let mut last = 0;
        for i in 1..=42 {
            let at = p.find(&format!("\n{i}. ")).unwrap();
            assert!(at > last);
            last = at;
        }
        assert!(!p.contains("\n43. "));
    }

    #[test]
    fn revision_prompt_layout() {
        let p = build_revision_prompt("shorten", "A boy runs across the rooftop at dusk.").unwrap();
        assert!(p.contains(
            "Input Prompt:\nshorten\nDescription:\nA boy runs across the rooftop at dusk.\n"
        ));
        assert!(matches!(
            build_revision_prompt(" ", "x"),
            Err(Error::EmptyPrompt)
        ));
        let tricky = build_revision_prompt(REVISION_DESCRIPTION_PLACEHOLDER, "d").unwrap();
        assert!(tricky.contains(&format!(
            "Input Prompt:\n{REVISION_DESCRIPTION_PLACEHOLDER}\nDescription:\nd\n"
        )));
    }

    #[test]
    fn tag_prompt_lists_vocabulary() {
        let p = build_tag_prompt(&["One.", "Two."]).unwrap();
        assert!(p.contains("- Description Length: [Concise, Complete description]\n"));
        assert!(p.contains("- Environmental Description: [Detailed environment, Basic environment, Environment-free]\n"));
        assert!(p.ends_with("Descriptions:\nOne.\nTwo.\n"));
        assert!(build_tag_prompt::<&str>(&[]).is_err());
    }
}
