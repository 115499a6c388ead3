use serde::{Deserialize, Serialize};

use super::diff::{lcs_suffix_table, tokenize};
use crate::{Error, Result};

/// Character edit distance with one optimal alignment's operation counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditDistanceBreakdown {
    pub distance: usize,
    pub insertions: usize,
    pub deletions: usize,
    pub substitutions: usize,
}

/// Unit-cost Levenshtein distance over Unicode scalar values.
///
/// The breakdown comes from backtracking the full table from the end,
/// preferring substitution, then deletion, then insertion when several
/// predecessors are optimal.
pub fn levenshtein_breakdown(a: &str, b: &str) -> EditDistanceBreakdown {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let (n, m) = (a.len(), b.len());
    let width = m + 1;
    let mut d = vec![0usize; (n + 1) * width];
    for (j, cell) in d[..width].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=n {
        d[i * width] = i;
        for j in 1..=m {
            let sub = d[(i - 1) * width + j - 1] + usize::from(a[i - 1] != b[j - 1]);
            let del = d[(i - 1) * width + j] + 1;
            let ins = d[i * width + j - 1] + 1;
            d[i * width + j] = sub.min(del).min(ins);
        }
    }

    let mut out = EditDistanceBreakdown {
        distance: d[n * width + m],
        ..Default::default()
    };
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = d[i * width + j];
        if i > 0 && j > 0 {
            let same = a[i - 1] == b[j - 1];
            if d[(i - 1) * width + j - 1] + usize::from(!same) == here {
                if !same {
                    out.substitutions += 1;
                }
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && d[(i - 1) * width + j] + 1 == here {
            out.deletions += 1;
            i -= 1;
        } else {
            out.insertions += 1;
            j -= 1;
        }
    }
    out
}

/// `2·|LCS| / (|a| + |b|)` over whitespace tokens. Two empty texts score 1.
pub fn lexical_ratio(a: &str, b: &str) -> f64 {
    let ta = tokenize(a);
    let tb = tokenize(b);
    let total = ta.len() + tb.len();
    if total == 0 {
        return 1.0;
    }
    let lcs = lcs_suffix_table(&ta, &tb)[0][0];
    2.0 * lcs as f64 / total as f64
}

pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() || u.is_empty() {
        return Err(Error::DimensionMismatch(u.len(), v.len()));
    }
    let dot: f64 = u.iter().zip(v).map(|(x, y)| x * y).sum();
    let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

/// Caller-supplied embeddings for one text.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Embeddings {
    #[serde(default)]
    pub semantic: Option<Vec<f64>>,
    #[serde(default)]
    pub stylistic: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub lexical_ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub semantic_cosine: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stylistic_cosine: Option<f64>,
}

fn paired_cosine(a: Option<&Vec<f64>>, b: Option<&Vec<f64>>) -> Option<f64> {
    match (a, b) {
        (Some(a), Some(b)) => cosine_similarity(a, b).ok(),
        _ => None,
    }
}

/// Lexical ratio plus cosine scores for whichever embedding kinds were given
/// for both texts with matching dimensions.
pub fn similarity_report(
    a: &str,
    b: &str,
    emb_a: Option<&Embeddings>,
    emb_b: Option<&Embeddings>,
) -> SimilarityReport {
    SimilarityReport {
        lexical_ratio: lexical_ratio(a, b),
        semantic_cosine: paired_cosine(
            emb_a.and_then(|e| e.semantic.as_ref()),
            emb_b.and_then(|e| e.semantic.as_ref()),
        ),
        stylistic_cosine: paired_cosine(
            emb_a.and_then(|e| e.stylistic.as_ref()),
            emb_b.and_then(|e| e.stylistic.as_ref()),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kitten_sitting() {
        let b = levenshtein_breakdown("kitten", "sitting");
        assert_eq!(
            b,
            EditDistanceBreakdown {
                distance: 3,
                insertions: 1,
                deletions: 0,
                substitutions: 2
            }
        );
    }

    #[test]
    fn empty_and_identity() {
        let b = levenshtein_breakdown("", "abc");
        assert_eq!((b.distance, b.insertions), (3, 3));
        let b = levenshtein_breakdown("abc", "");
        assert_eq!((b.distance, b.deletions), (3, 3));
        assert_eq!(levenshtein_breakdown("same", "same").distance, 0);
    }

    #[test]
    fn counts_chars_not_bytes() {
        assert_eq!(levenshtein_breakdown("café", "cafe").distance, 1);
    }

    #[test]
    fn lexical_ratio_examples() {
        assert_eq!(lexical_ratio("a b c", "a b c"), 1.0);
        assert_eq!(lexical_ratio("a b", "c d"), 0.0);
        assert_eq!(lexical_ratio("a b c d", "a x c d"), 0.75);
        assert_eq!(lexical_ratio("", ""), 1.0);
        assert_eq!(lexical_ratio("", "a"), 0.0);
    }

    #[test]
    fn cosine_examples() {
        assert!((cosine_similarity(&[2.0, 3.0], &[2.0, 3.0]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        // 32 / (sqrt(14) * sqrt(77)) = 0.974631...
        let c = cosine_similarity(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert!((c - 0.9746).abs() < 1e-4);
        assert_eq!(
            cosine_similarity(&[1.0], &[1.0, 2.0]).unwrap_err().code(),
            "DimensionMismatch"
        );
        assert_eq!(
            cosine_similarity(&[0.0, 0.0], &[1.0, 2.0])
                .unwrap_err()
                .code(),
            "ZeroVector"
        );
    }

    #[test]
    fn report_only_includes_matched_embeddings() {
        let a = Embeddings {
            semantic: Some(vec![1.0, 0.0]),
            stylistic: Some(vec![1.0, 1.0, 1.0]),
        };
        let b = Embeddings {
            semantic: Some(vec![1.0, 0.0]),
            stylistic: Some(vec![1.0, 1.0]),
        };
        let r = similarity_report("x y", "x z", Some(&a), Some(&b));
        assert_eq!(r.lexical_ratio, 0.5);
        assert_eq!(r.semantic_cosine, Some(1.0));
        assert_eq!(r.stylistic_cosine, None);
        assert_eq!(
            similarity_report("x", "x", None, Some(&b)).semantic_cosine,
            None
        );
    }
}
