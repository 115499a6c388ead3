use serde::{Deserialize, Serialize};

/// Splits on whitespace; punctuation stays attached to its word.
pub fn tokenize(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", content = "tokens", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DiffOp {
    Equal(Vec<String>),
    Insert(Vec<String>),
    Delete(Vec<String>),
}

impl DiffOp {
    pub fn tokens(&self) -> &[String] {
        match self {
            DiffOp::Equal(t) | DiffOp::Insert(t) | DiffOp::Delete(t) => t,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordDiff {
    pub ops: Vec<DiffOp>,
}

impl WordDiff {
    /// True when the two texts have the same token stream.
    pub fn is_unchanged(&self) -> bool {
        self.ops.iter().all(|op| matches!(op, DiffOp::Equal(_)))
    }

    /// Token stream of the old text (EQUAL + DELETE).
    pub fn old_tokens(&self) -> Vec<&str> {
        self.ops
            .iter()
            .filter(|op| !matches!(op, DiffOp::Insert(_)))
            .flat_map(|op| op.tokens().iter().map(String::as_str))
            .collect()
    }

    /// Token stream of the new text (EQUAL + INSERT).
    pub fn new_tokens(&self) -> Vec<&str> {
        self.ops
            .iter()
            .filter(|op| !matches!(op, DiffOp::Delete(_)))
            .flat_map(|op| op.tokens().iter().map(String::as_str))
            .collect()
    }

    /// Applies the diff to `old`'s token stream, rebuilding the new text with
    /// single spaces between tokens. Returns `None` if `old` does not match
    /// the diff's EQUAL/DELETE stream.
    pub fn apply(&self, old: &str) -> Option<String> {
        let mut source = tokenize(old).into_iter();
        let mut out: Vec<&str> = Vec::new();
        for op in &self.ops {
            match op {
                DiffOp::Equal(tokens) => {
                    for t in tokens {
                        if source.next()? != t {
                            return None;
                        }
                        out.push(t);
                    }
                }
                DiffOp::Delete(tokens) => {
                    for t in tokens {
                        if source.next()? != t {
                            return None;
                        }
                    }
                }
                DiffOp::Insert(tokens) => out.extend(tokens.iter().map(String::as_str)),
            }
        }
        source.next().is_none().then(|| out.join(" "))
    }
}

/// Length table for the longest common subsequence of every pair of
/// suffixes: `table[i][j] = |LCS(a[i..], b[j..])|`.
pub(crate) fn lcs_suffix_table<T: PartialEq>(a: &[T], b: &[T]) -> Vec<Vec<u32>> {
    let mut table = vec![vec![0u32; b.len() + 1]; a.len() + 1];
    for i in (0..a.len()).rev() {
        for j in (0..b.len()).rev() {
            table[i][j] = if a[i] == b[j] {
                table[i + 1][j + 1] + 1
            } else {
                table[i + 1][j].max(table[i][j + 1])
            };
        }
    }
    table
}

/// Word-level diff from a longest-common-subsequence alignment.
///
/// The walk takes a match as early as possible, so ties resolve toward
/// earlier EQUAL runs. Within each changed region deletions are listed
/// before insertions.
pub fn word_diff(old_text: &str, new_text: &str) -> WordDiff {
    let a = tokenize(old_text);
    let b = tokenize(new_text);
    let table = lcs_suffix_table(&a, &b);

    let mut ops: Vec<DiffOp> = Vec::new();
    let mut dels: Vec<String> = Vec::new();
    let mut ins: Vec<String> = Vec::new();
    let flush = |ops: &mut Vec<DiffOp>, dels: &mut Vec<String>, ins: &mut Vec<String>| {
        if !dels.is_empty() {
            ops.push(DiffOp::Delete(std::mem::take(dels)));
        }
        if !ins.is_empty() {
            ops.push(DiffOp::Insert(std::mem::take(ins)));
        }
    };

    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if i < a.len() && j < b.len() && a[i] == b[j] && table[i][j] == table[i + 1][j + 1] + 1 {
            flush(&mut ops, &mut dels, &mut ins);
            match ops.last_mut() {
                Some(DiffOp::Equal(run)) => run.push(a[i].to_owned()),
                _ => ops.push(DiffOp::Equal(vec![a[i].to_owned()])),
            }
            i += 1;
            j += 1;
        } else if j == b.len() || (i < a.len() && table[i + 1][j] >= table[i][j + 1]) {
            dels.push(a[i].to_owned());
            i += 1;
        } else {
            ins.push(b[j].to_owned());
            j += 1;
        }
    }
    flush(&mut ops, &mut dels, &mut ins);
    WordDiff { ops }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split(' ').map(str::to_owned).collect()
    }

    #[test]
    fn identity() {
        assert_eq!(
            word_diff("a b c", "a b c").ops,
            vec![DiffOp::Equal(toks("a b c"))]
        );
    }

    #[test]
    fn substitution_in_middle() {
        assert_eq!(
            word_diff("a b c", "a x c").ops,
            vec![
                DiffOp::Equal(toks("a")),
                DiffOp::Delete(toks("b")),
                DiffOp::Insert(toks("x")),
                DiffOp::Equal(toks("c")),
            ]
        );
    }

    #[test]
    fn from_empty() {
        assert_eq!(
            word_diff("", "hello").ops,
            vec![DiffOp::Insert(toks("hello"))]
        );
        assert_eq!(word_diff("bye", "").ops, vec![DiffOp::Delete(toks("bye"))]);
        assert!(word_diff("", "").ops.is_empty());
    }

    #[test]
    fn punctuation_stays_attached() {
        let d = word_diff("A boy runs.", "A boy sprints.");
        assert_eq!(
            d.ops,
            vec![
                DiffOp::Equal(toks("A boy")),
                DiffOp::Delete(toks("runs.")),
                DiffOp::Insert(toks("sprints.")),
            ]
        );
    }

    #[test]
    fn apply_checks_source() {
        let d = word_diff("a b c", "a x c");
        assert_eq!(d.apply("a  b\nc").as_deref(), Some("a x c"));
        assert_eq!(d.apply("a q c"), None);
        assert_eq!(d.apply("a b c d"), None);
    }

    #[test]
    fn ties_prefer_earliest_match() {
        // "a" could align with either copy; the first is taken.
        assert_eq!(
            word_diff("a", "a a").ops,
            vec![DiffOp::Equal(toks("a")), DiffOp::Insert(toks("a"))]
        );
    }
}
