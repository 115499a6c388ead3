//! WebVTT export and import of a variation's description track.
//!
//! Export writes a `WEBVTT` line, a `NOTE` block with the variation's
//! metadata, then one cue per description in start order. Import accepts
//! anything export produces plus ordinary WebVTT niceties (cue identifiers,
//! cue settings, `MM:SS.mmm` timings, `STYLE`/`REGION`/`NOTE` blocks, CRLF).

use std::fmt::Write as _;

use crate::model::{AdSlot, Author, Variation, VariationId, VideoId};
use crate::store::Store;
use crate::{Error, Result};

/// Largest time representable with a two-digit hour field.
pub const MAX_TIMESTAMP_MS: u64 = 359_999_999;

pub fn format_timestamp(ms: u64) -> String {
    let h = ms / 3_600_000;
    let m = ms / 60_000 % 60;
    let s = ms / 1000 % 60;
    let frac = ms % 1000;
    format!("{h:02}:{m:02}:{s:02}.{frac:03}")
}

/// Parses `HH:MM:SS.mmm` (hours may have more digits) or `MM:SS.mmm`.
pub fn parse_timestamp(text: &str) -> Option<u64> {
    let (clock, frac) = text.split_once('.')?;
    if frac.len() != 3 || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let parts: Vec<&str> = clock.split(':').collect();
    let (h, m, s) = match parts.as_slice() {
        [h, m, s] if h.len() >= 2 => (*h, *m, *s),
        [m, s] => ("0", *m, *s),
        _ => return None,
    };
    let field = |f: &str, width: Option<usize>| -> Option<u64> {
        if f.is_empty() || !f.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        if width.is_some_and(|w| f.len() != w) {
            return None;
        }
        f.parse().ok()
    };
    let h = field(h, None)?;
    let m = field(m, Some(2))?;
    let s = field(s, Some(2))?;
    if m > 59 || s > 59 {
        return None;
    }
    let ms: u64 = frac.parse().ok()?;
    h.checked_mul(3_600_000)?
        .checked_add(m * 60_000 + s * 1000 + ms)
}

fn one_line(text: &str) -> String {
    text.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .replace("-->", "->")
}

/// Cue payload lines: blank lines would end the cue, and `-->` may not
/// appear in a payload.
fn payload_lines(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| l.trim_end().replace("-->", "->"))
        .filter(|l| !l.trim().is_empty())
        .collect()
}

fn metadata_note(store: &Store, v: &Variation) -> String {
    let mut note = String::from("NOTE\n");
    let _ = writeln!(note, "variation: {}", one_line(&v.name));
    let _ = writeln!(note, "author: {}", one_line(&v.author_name));
    let _ = writeln!(note, "fork_count: {}", v.fork_count);
    if let Some(parent) = &v.parent_id {
        let name = store
            .variation(parent)
            .map(|p| one_line(&p.name))
            .unwrap_or_else(|_| parent.to_string());
        let _ = writeln!(note, "parent: {name}");
    }
    if !v.tags.predefined.is_empty() {
        let tags: Vec<_> = v
            .tags
            .predefined
            .iter()
            .map(|t| one_line(&t.keyword))
            .collect();
        let _ = writeln!(note, "tags: {}", tags.join("; "));
    }
    if !v.tags.custom.is_empty() {
        let tags: Vec<_> = v.tags.custom.iter().map(|t| one_line(t)).collect();
        let _ = writeln!(note, "custom_tags: {}", tags.join("; "));
    }
    note.pop();
    note
}

pub fn export_webvtt(store: &Store, variation_id: &VariationId) -> Result<String> {
    let variation = store.variation(variation_id)?;
    let mut out = String::from("WEBVTT\n");
    out.push('\n');
    out.push_str(&metadata_note(store, variation));
    out.push('\n');
    for d in store.descriptions_of(variation_id) {
        let _ = write!(
            out,
            "\n{} --> {}\n",
            format_timestamp(d.slot.start_ms),
            format_timestamp(d.slot.end_ms)
        );
        for line in payload_lines(&d.text) {
            out.push_str(&line);
            out.push('\n');
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cue {
    pub identifier: Option<String>,
    pub slot: AdSlot,
    pub text: String,
}

fn malformed(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::MalformedWebVtt {
        line,
        column,
        message: message.into(),
    }
}

fn parse_timing(line: &str, line_no: usize) -> Result<AdSlot> {
    let arrow = line
        .find("-->")
        .ok_or_else(|| malformed(line_no, 1, "expected `-->` in cue timing"))?;
    let start_text = line[..arrow].trim();
    let start = parse_timestamp(start_text)
        .ok_or_else(|| malformed(line_no, 1, format!("bad start timestamp `{start_text}`")))?;
    let rest = &line[arrow + 3..];
    let end_col = arrow + 3 + (rest.len() - rest.trim_start().len()) + 1;
    let end_text = rest.split_whitespace().next().unwrap_or("");
    let end = parse_timestamp(end_text)
        .ok_or_else(|| malformed(line_no, end_col, format!("bad end timestamp `{end_text}`")))?;
    if end <= start {
        return Err(malformed(line_no, end_col, "cue ends before it starts"));
    }
    Ok(AdSlot::new(start, end))
}

/// Parses cues, enforcing strictly increasing starts.
pub fn parse_webvtt(text: &str) -> Result<Vec<Cue>> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let lines: Vec<&str> = text
        .lines()
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .collect();
    let header = lines.first().copied().unwrap_or("");
    let header_ok =
        header == "WEBVTT" || header.starts_with("WEBVTT ") || header.starts_with("WEBVTT\t");
    if !header_ok {
        return Err(malformed(1, 1, "file must begin with `WEBVTT`"));
    }

    // Blocks: runs of non-blank lines, remembering each block's first line.
    let mut blocks: Vec<(usize, Vec<&str>)> = Vec::new();
    let mut i = 1;
    while i < lines.len() && !lines[i].trim().is_empty() {
        i += 1;
    }
    while i < lines.len() {
        if lines[i].trim().is_empty() {
            i += 1;
            continue;
        }
        let start = i;
        while i < lines.len() && !lines[i].trim().is_empty() {
            i += 1;
        }
        blocks.push((start, lines[start..i].to_vec()));
    }

    let mut cues: Vec<Cue> = Vec::new();
    for (first, block) in blocks {
        let head = block[0];
        let keyword = head.split([' ', '\t']).next().unwrap_or("");
        if matches!(keyword, "NOTE" | "STYLE" | "REGION") && !head.contains("-->") {
            continue;
        }
        let (identifier, timing_idx) = if head.contains("-->") {
            (None, 0)
        } else {
            (Some(head.to_owned()), 1)
        };
        let Some(timing) = block.get(timing_idx) else {
            return Err(malformed(
                first + 1,
                1,
                "cue identifier without a timing line",
            ));
        };
        let line_no = first + timing_idx + 1;
        let slot = parse_timing(timing, line_no)?;
        let body: Vec<&str> = block[timing_idx + 1..].to_vec();
        if body.is_empty() {
            return Err(malformed(line_no + 1, 1, "cue has no text"));
        }
        if let Some(prev) = cues.last() {
            if slot.start_ms <= prev.slot.start_ms {
                return Err(Error::OrderingViolation(format!(
                    "cue at line {line_no} starts at {} ms, not after {} ms",
                    slot.start_ms, prev.slot.start_ms
                )));
            }
        }
        cues.push(Cue {
            identifier,
            slot,
            text: body.join("\n"),
        });
    }
    Ok(cues)
}

/// Creates a variation whose descriptions mirror the file's cues. Nothing is
/// written unless every cue fits the video.
pub fn import_webvtt(
    store: &mut Store,
    text: &str,
    video_id: &VideoId,
    variation_name: &str,
    author: &str,
) -> Result<Variation> {
    let cues = parse_webvtt(text)?;
    let duration = store.video(video_id)?.duration_ms;
    for c in &cues {
        c.slot.check_bounds(duration)?;
        if c.text.trim().is_empty() {
            return Err(Error::EmptyText);
        }
    }
    let variation = store.create_variation(video_id, variation_name, author, None)?;
    let who = Author::human(author);
    for c in cues {
        store.add_description(&variation.id, c.slot, &c.text, &who)?;
    }
    store.variation(&variation.id).cloned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{PredefinedTag, TagCategory, TagSet};

    fn store_with(texts: &[(u64, u64, &str)]) -> (Store, VideoId, VariationId) {
        let mut s = Store::deterministic(11);
        let video = s.add_text_only_video("clip", 120_000).unwrap().id;
        let v = s
            .create_variation(&video, "Variation 1", "ai-bot", None)
            .unwrap()
            .id;
        for &(a, b, t) in texts {
            s.add_description(&v, AdSlot::new(a, b), t, &Author::ai("ai-bot"))
                .unwrap();
        }
        (s, video, v)
    }

    #[test]
    fn timestamps() {
        assert_eq!(format_timestamp(1000), "00:00:01.000");
        assert_eq!(format_timestamp(3500), "00:00:03.500");
        assert_eq!(format_timestamp(MAX_TIMESTAMP_MS), "99:59:59.999");
        assert_eq!(parse_timestamp("00:00:03.500"), Some(3500));
        assert_eq!(parse_timestamp("01:02.003"), Some(62_003));
        assert_eq!(parse_timestamp("00:60:00.000"), None);
        assert_eq!(parse_timestamp("00:00:01.5"), None);
        assert_eq!(parse_timestamp("0:00:01.500"), None);
    }

    #[test]
    fn single_cue_layout() {
        let (s, _, v) = store_with(&[(1000, 3500, "A dog leaps.")]);
        let vtt = export_webvtt(&s, &v).unwrap();
        assert!(vtt.starts_with("WEBVTT\n\nNOTE\n"));
        assert!(vtt.ends_with("\n\n00:00:01.000 --> 00:00:03.500\nA dog leaps.\n"));
    }

    #[test]
    fn empty_variation_is_header_only() {
        let (s, _, v) = store_with(&[]);
        let vtt = export_webvtt(&s, &v).unwrap();
        assert_eq!(
            vtt,
            "WEBVTT\n\nNOTE\nvariation: Variation 1\nauthor: ai-bot\nfork_count: 0\n"
        );
        assert!(parse_webvtt(&vtt).unwrap().is_empty());
    }

    #[test]
    fn metadata_carries_tags_and_lineage() {
        let (mut s, _, v) = store_with(&[(0, 1000, "x")]);
        s.set_tags(
            &v,
            TagSet {
                predefined: vec![PredefinedTag::new(
                    TagCategory::DescriptionLength,
                    "Concise",
                )],
                custom: vec!["Upbeat".into()],
            },
        )
        .unwrap();
        let child = s.fork_variation(&v, "P3", None).unwrap();
        let vtt = export_webvtt(&s, &child.id).unwrap();
        assert!(vtt.contains("parent: Variation 1\n"));
        assert!(vtt.contains("tags: Concise\ncustom_tags: Upbeat\n"));
        assert!(export_webvtt(&s, &v).unwrap().contains("fork_count: 1\n"));
    }

    #[test]
    fn round_trip_through_import() {
        let (mut s, video, v) = store_with(&[
            (1000, 3500, "A dog leaps."),
            (5000, 9000, "Two kids wave.\nA bus pulls away."),
            (61_000, 62_500, "Title card: The End."),
        ]);
        let vtt = export_webvtt(&s, &v).unwrap();
        let imported = import_webvtt(&mut s, &vtt, &video, "Imported", "P4").unwrap();
        let a: Vec<_> = s
            .descriptions_of(&v)
            .iter()
            .map(|d| (d.slot, d.text.clone()))
            .collect();
        let b: Vec<_> = s
            .descriptions_of(&imported.id)
            .iter()
            .map(|d| (d.slot, d.text.clone()))
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn accepts_identifiers_settings_and_crlf() {
        let text = "\u{feff}WEBVTT - AD track\r\n\r\nSTYLE\r\n::cue { color: red }\r\n\r\nc1\r\n00:01.000 --> 00:02.000 align:start\r\nHello\r\n";
        let cues = parse_webvtt(text).unwrap();
        assert_eq!(
            cues,
            vec![Cue {
                identifier: Some("c1".into()),
                slot: AdSlot::new(1000, 2000),
                text: "Hello".into()
            }]
        );
    }

    #[test]
    fn missing_arrow_is_malformed() {
        let err = parse_webvtt("WEBVTT\n\n00:00:01.000 00:00:02.000\nHi\n").unwrap_err();
        match err {
            Error::MalformedWebVtt { line, column, .. } => assert_eq!((line, column), (4, 1)),
            other => panic!("{other:?}"),
        }
        assert_eq!(
            parse_webvtt("WEBVTT\n\nc1\n").unwrap_err().code(),
            "MalformedWebVTT"
        );
        assert_eq!(parse_webvtt("SRT\n").unwrap_err().code(), "MalformedWebVTT");
    }

    #[test]
    fn bad_end_timestamp_reports_column() {
        let err = parse_webvtt("WEBVTT\n\n00:00:01.000 --> 00:00:0x.000\nHi\n").unwrap_err();
        match err {
            Error::MalformedWebVtt { line, column, .. } => assert_eq!((line, column), (3, 18)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn out_of_order_cues() {
        let text =
            "WEBVTT\n\n00:00:05.000 --> 00:00:06.000\nB\n\n00:00:01.000 --> 00:00:02.000\nA\n";
        assert_eq!(parse_webvtt(text).unwrap_err().code(), "OrderingViolation");
    }

    #[test]
    fn import_is_atomic_on_out_of_bounds() {
        let (mut s, video, _) = store_with(&[]);
        let text =
            "WEBVTT\n\n00:00:01.000 --> 00:00:02.000\nA\n\n00:03:00.000 --> 00:03:01.000\nB\n";
        assert_eq!(
            import_webvtt(&mut s, text, &video, "X", "P")
                .unwrap_err()
                .code(),
            "OutOfBounds"
        );
        assert_eq!(s.variations_of(&video).len(), 1);
    }
}
