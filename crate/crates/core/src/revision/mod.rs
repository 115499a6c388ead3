//! Comparing description texts: word diffs for review, and edit-distance and
//! similarity metrics between an original and a revised variation.

mod diff;
mod metrics;

use std::collections::BTreeMap;

use serde::Serialize;

pub use diff::{tokenize, word_diff, DiffOp, WordDiff};
pub use metrics::{
    cosine_similarity, levenshtein_breakdown, lexical_ratio, similarity_report,
    EditDistanceBreakdown, Embeddings, SimilarityReport,
};

use crate::model::{AdSlot, Decision, Description, DescriptionId, VariationId};
use crate::store::{SharedStore, Store};
use crate::Result;

/// Accepts or rejects the pending proposal for a description, committing
/// through the store's writer.
pub fn resolve_proposal(
    store: &SharedStore,
    description_id: &DescriptionId,
    decision: Decision,
) -> Result<Description> {
    store.commit(|s| s.resolve_proposal(description_id, decision))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlignedPair {
    pub original_id: DescriptionId,
    pub revised_id: DescriptionId,
    pub original_slot: AdSlot,
    pub revised_slot: AdSlot,
    pub edits: EditDistanceBreakdown,
    pub similarity: SimilarityReport,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct MeanMetrics {
    pub pairs: usize,
    pub distance: f64,
    pub insertions: f64,
    pub deletions: f64,
    pub substitutions: f64,
    pub lexical_ratio: f64,
    pub semantic_cosine: Option<f64>,
    pub stylistic_cosine: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VariationComparison {
    pub original: VariationId,
    pub revised: VariationId,
    pub pairs: Vec<AlignedPair>,
    pub unmatched_original: Vec<DescriptionId>,
    pub unmatched_revised: Vec<DescriptionId>,
    pub mean: MeanMetrics,
}

/// Pairs descriptions one-to-one by greatest slot overlap (ties go to the
/// earlier original, then the earlier revision). Slots that share a start
/// but do not overlap still pair.
fn align<'a>(a: &[&'a Description], b: &[&'a Description]) -> Vec<(usize, usize)> {
    let mut candidates = Vec::new();
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            let overlap = x
                .slot
                .end_ms
                .min(y.slot.end_ms)
                .saturating_sub(x.slot.start_ms.max(y.slot.start_ms));
            if overlap > 0 || x.slot.start_ms == y.slot.start_ms {
                candidates.push((overlap, i, j));
            }
        }
    }
    candidates.sort_by(|p, q| q.0.cmp(&p.0).then(p.1.cmp(&q.1)).then(p.2.cmp(&q.2)));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut pairs = Vec::new();
    for (_, i, j) in candidates {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            pairs.push((i, j));
        }
    }
    pairs.sort_unstable();
    pairs
}

fn mean_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        sum += v?;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

/// Per-slot edit and similarity metrics between two variations of the same
/// video. `embeddings` may hold vectors for descriptions of either side.
pub fn compare_variations(
    store: &Store,
    original: &VariationId,
    revised: &VariationId,
    embeddings: &BTreeMap<DescriptionId, Embeddings>,
) -> Result<VariationComparison> {
    store.variation(original)?;
    store.variation(revised)?;
    let a = store.descriptions_of(original);
    let b = store.descriptions_of(revised);
    let matched = align(&a, &b);

    let pairs: Vec<AlignedPair> = matched
        .iter()
        .map(|&(i, j)| AlignedPair {
            original_id: a[i].id.clone(),
            revised_id: b[j].id.clone(),
            original_slot: a[i].slot,
            revised_slot: b[j].slot,
            edits: levenshtein_breakdown(&a[i].text, &b[j].text),
            similarity: similarity_report(
                &a[i].text,
                &b[j].text,
                embeddings.get(&a[i].id),
                embeddings.get(&b[j].id),
            ),
        })
        .collect();

    let n = pairs.len();
    let avg = |f: &dyn Fn(&AlignedPair) -> f64| {
        if n == 0 {
            0.0
        } else {
            pairs.iter().map(f).sum::<f64>() / n as f64
        }
    };
    let mean = MeanMetrics {
        pairs: n,
        distance: avg(&|p| p.edits.distance as f64),
        insertions: avg(&|p| p.edits.insertions as f64),
        deletions: avg(&|p| p.edits.deletions as f64),
        substitutions: avg(&|p| p.edits.substitutions as f64),
        lexical_ratio: avg(&|p| p.similarity.lexical_ratio),
        semantic_cosine: mean_of(pairs.iter().map(|p| p.similarity.semantic_cosine)),
        stylistic_cosine: mean_of(pairs.iter().map(|p| p.similarity.stylistic_cosine)),
    };

    let unmatched = |list: &[&Description], used: Vec<usize>| {
        list.iter()
            .enumerate()
            .filter(|(k, _)| !used.contains(k))
            .map(|(_, d)| d.id.clone())
            .collect()
    };
    Ok(VariationComparison {
        original: original.clone(),
        revised: revised.clone(),
        unmatched_original: unmatched(&a, matched.iter().map(|p| p.0).collect()),
        unmatched_revised: unmatched(&b, matched.iter().map(|p| p.1).collect()),
        pairs,
        mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Author;

    #[test]
    fn compare_fork_after_edits() {
        let mut s = Store::deterministic(3);
        let video = s.add_text_only_video("v", 60_000).unwrap().id;
        let base = s
            .create_variation(&video, "Variation 1", "ai", None)
            .unwrap()
            .id;
        let ai = Author::ai("ai");
        s.add_description(&base, AdSlot::new(1000, 4000), "A boy runs.", &ai)
            .unwrap();
        s.add_description(&base, AdSlot::new(9000, 12_000), "Rain falls.", &ai)
            .unwrap();
        let fork = s.fork_variation(&base, "P1", None).unwrap().id;
        let ids: Vec<_> = s
            .descriptions_of(&fork)
            .iter()
            .map(|d| d.id.clone())
            .collect();
        s.edit_description_text(&ids[0], "A boy sprints.", "P1")
            .unwrap();
        s.adjust_slot(&ids[1], AdSlot::new(9800, 12_800)).unwrap();
        s.add_description(
            &fork,
            AdSlot::new(20_000, 22_000),
            "Night falls.",
            &Author::human("P1"),
        )
        .unwrap();

        let mut emb = BTreeMap::new();
        emb.insert(
            s.descriptions_of(&base)[0].id.clone(),
            Embeddings {
                semantic: Some(vec![1.0, 2.0, 3.0]),
                stylistic: None,
            },
        );
        emb.insert(
            ids[0].clone(),
            Embeddings {
                semantic: Some(vec![4.0, 5.0, 6.0]),
                stylistic: None,
            },
        );
        let cmp = compare_variations(&s, &base, &fork, &emb).unwrap();
        assert_eq!(cmp.pairs.len(), 2);
        assert_eq!(
            cmp.pairs[0].edits,
            levenshtein_breakdown("A boy runs.", "A boy sprints.")
        );
        assert_eq!(cmp.pairs[1].edits.distance, 0);
        assert!((cmp.pairs[0].similarity.semantic_cosine.unwrap() - 0.9746).abs() < 1e-4);
        assert_eq!(cmp.mean.semantic_cosine, None);
        assert_eq!(cmp.unmatched_revised.len(), 1);
        assert!(cmp.unmatched_original.is_empty());
    }
}
