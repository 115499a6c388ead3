use adscribe_core::io::project::{from_str, to_canonical_string};
use adscribe_core::io::{export_webvtt, import_webvtt, load_project, save_project};
use adscribe_core::tags::PredefinedTag;
use adscribe_core::{AdSlot, Author, Store, TagCategory, TagSet};

const GOLDEN: &str = include_str!("golden/three_cues.vtt");

fn three_cue_store() -> (Store, adscribe_core::VariationId) {
    let mut s = Store::deterministic(5);
    let video = s.add_text_only_video("kitchen", 4_000_000).unwrap().id;
    let v = s
        .create_variation(&video, "Kitchen AD", "ana", None)
        .unwrap()
        .id;
    let ana = Author::human("ana");
    // Added out of order on purpose: cues are emitted by start time.
    s.add_description(
        &v,
        AdSlot::new(62_250, 69_000),
        "The chef lifts the lid.\nSteam fills the kitchen.",
        &ana,
    )
    .unwrap();
    s.add_description(&v, AdSlot::new(1_000, 3_500), "A dog leaps.", &ana)
        .unwrap();
    s.add_description(
        &v,
        AdSlot::new(3_723_004, 3_725_000),
        "Title card: \u{201c}Fin\u{201d}.",
        &ana,
    )
    .unwrap();
    s.set_tags(
        &v,
        TagSet {
            predefined: vec![
                PredefinedTag::new(TagCategory::DescriptionLength, "Concise"),
                PredefinedTag::new(TagCategory::Focus, "Character focus"),
            ],
            custom: vec!["onions".into()],
        },
    )
    .unwrap();
    (s, v)
}

#[test]
fn three_cue_export_matches_golden_file() {
    let (s, v) = three_cue_store();
    assert_eq!(export_webvtt(&s, &v).unwrap(), GOLDEN);
}

#[test]
fn golden_file_imports_cue_for_cue() {
    let (mut s, v) = three_cue_store();
    let video = s.variation(&v).unwrap().video_id.clone();
    let copy = import_webvtt(&mut s, GOLDEN, &video, "Imported", "bo").unwrap();
    let a = s.descriptions_of(&v);
    let b = s.descriptions_of(&copy.id);
    assert_eq!(a.len(), 3);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!((x.slot, &x.text), (y.slot, &y.text));
    }
    // Re-export differs only in the metadata block.
    let again = export_webvtt(&s, &copy.id).unwrap();
    let cues = |t: &str| t.split_once("\n\n00:").map(|(_, rest)| rest.to_owned());
    assert_eq!(cues(&again), cues(GOLDEN));
}

#[test]
fn project_file_round_trip_is_canonical() {
    let (s, _) = three_cue_store();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    save_project(&s, &path).unwrap();
    let loaded = load_project(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(to_canonical_string(&loaded).unwrap(), text);
    assert_eq!(
        to_canonical_string(&from_str(&text).unwrap()).unwrap(),
        text
    );
}
