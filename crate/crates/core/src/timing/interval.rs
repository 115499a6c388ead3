//! Half-open millisecond intervals and set algebra over sorted disjoint lists.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::AdSlot;

/// `[start_ms, end_ms)` on the video timeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub start_ms: u64,
    pub end_ms: u64,
}

impl Interval {
    pub const fn new(start_ms: u64, end_ms: u64) -> Self {
        Interval { start_ms, end_ms }
    }

    pub fn len_ms(self) -> u64 {
        self.end_ms.saturating_sub(self.start_ms)
    }

    pub fn is_empty(self) -> bool {
        self.end_ms <= self.start_ms
    }

    pub fn intersection(self, other: Interval) -> Option<Interval> {
        let i = Interval::new(
            self.start_ms.max(other.start_ms),
            self.end_ms.min(other.end_ms),
        );
        (!i.is_empty()).then_some(i)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start_ms, self.end_ms)
    }
}

impl From<Interval> for AdSlot {
    fn from(i: Interval) -> Self {
        AdSlot::new(i.start_ms, i.end_ms)
    }
}

impl From<AdSlot> for Interval {
    fn from(s: AdSlot) -> Self {
        Interval::new(s.start_ms, s.end_ms)
    }
}

/// True when the list is sorted, pairwise disjoint and free of empty
/// intervals. Touching neighbours (`a.end == b.start`) count as disjoint.
pub fn is_sorted_disjoint(list: &[Interval]) -> bool {
    list.iter().all(|i| !i.is_empty()) && list.windows(2).all(|w| w[0].end_ms <= w[1].start_ms)
}

/// Sorts, drops empties and merges overlapping or touching intervals.
pub fn normalize(mut list: Vec<Interval>) -> Vec<Interval> {
    list.retain(|i| !i.is_empty());
    list.sort_unstable();
    let mut out: Vec<Interval> = Vec::with_capacity(list.len());
    for i in list {
        match out.last_mut() {
            Some(last) if i.start_ms <= last.end_ms => last.end_ms = last.end_ms.max(i.end_ms),
            _ => out.push(i),
        }
    }
    out
}

/// Intersection of two sorted disjoint lists.
pub fn intersect(a: &[Interval], b: &[Interval]) -> Vec<Interval> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        if let Some(x) = a[i].intersection(b[j]) {
            out.push(x);
        }
        if a[i].end_ms <= b[j].end_ms {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

/// Complement of a sorted disjoint list within `[0, horizon_ms)`.
pub fn complement(list: &[Interval], horizon_ms: u64) -> Vec<Interval> {
    let mut out = Vec::new();
    let mut cursor = 0;
    for i in list {
        let start = i.start_ms.min(horizon_ms);
        if start > cursor {
            out.push(Interval::new(cursor, start));
        }
        cursor = cursor.max(i.end_ms.min(horizon_ms));
    }
    if cursor < horizon_ms {
        out.push(Interval::new(cursor, horizon_ms));
    }
    out
}

/// Restricts a sorted disjoint list to `range`.
pub fn clip(list: &[Interval], range: Interval) -> Vec<Interval> {
    intersect(list, &[range])
}

/// Fills gaps shorter than `max_gap_ms` between consecutive intervals.
pub fn bridge_gaps(list: &[Interval], max_gap_ms: u64) -> Vec<Interval> {
    let mut out: Vec<Interval> = Vec::with_capacity(list.len());
    for &i in list {
        match out.last_mut() {
            Some(last) if i.start_ms.saturating_sub(last.end_ms) < max_gap_ms => {
                last.end_ms = last.end_ms.max(i.end_ms)
            }
            _ => out.push(i),
        }
    }
    out
}

/// Keeps intervals at least `min_ms` long.
pub fn drop_shorter_than(list: &[Interval], min_ms: u64) -> Vec<Interval> {
    list.iter()
        .copied()
        .filter(|i| i.len_ms() >= min_ms)
        .collect()
}

/// Splits an interval at its (floored) midpoint until every piece is at most
/// `max_len_ms` long. The pieces tile the input exactly.
pub fn split_long_interval(interval: Interval, max_len_ms: u64) -> Vec<Interval> {
    let mut out = Vec::new();
    split_into(interval, max_len_ms.max(1), &mut out);
    out
}

fn split_into(interval: Interval, max_len_ms: u64, out: &mut Vec<Interval>) {
    if interval.len_ms() <= max_len_ms {
        out.push(interval);
        return;
    }
    let mid = interval.start_ms + interval.len_ms() / 2;
    split_into(Interval::new(interval.start_ms, mid), max_len_ms, out);
    split_into(Interval::new(mid, interval.end_ms), max_len_ms, out);
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn iv(a: u64, b: u64) -> Interval {
        Interval::new(a, b)
    }

    #[test]
    fn intersect_examples() {
        assert_eq!(intersect(&[iv(0, 5)], &[iv(3, 8)]), vec![iv(3, 5)]);
        assert!(intersect(&[iv(0, 2)], &[iv(5, 8)]).is_empty());
        assert!(intersect(&[iv(0, 5)], &[iv(5, 8)]).is_empty());
    }

    #[test]
    fn split_examples() {
        assert_eq!(
            split_long_interval(iv(0, 12_000), 15_000),
            vec![iv(0, 12_000)]
        );
        assert_eq!(
            split_long_interval(iv(0, 40_000), 15_000),
            vec![
                iv(0, 10_000),
                iv(10_000, 20_000),
                iv(20_000, 30_000),
                iv(30_000, 40_000)
            ]
        );
        assert_eq!(
            split_long_interval(iv(0, 15_001), 15_000),
            vec![iv(0, 7500), iv(7500, 15_001)]
        );
    }

    #[test]
    fn complement_and_bridge() {
        assert_eq!(
            complement(&[iv(2000, 5000)], 10_000),
            vec![iv(0, 2000), iv(5000, 10_000)]
        );
        assert_eq!(complement(&[], 10), vec![iv(0, 10)]);
        assert!(complement(&[iv(0, 10)], 10).is_empty());
        assert_eq!(
            bridge_gaps(&[iv(0, 10), iv(15, 20), iv(40, 50)], 10),
            vec![iv(0, 20), iv(40, 50)]
        );
    }

    fn bitmap(list: &[Interval], horizon: usize) -> Vec<bool> {
        let mut bits = vec![false; horizon];
        for i in list {
            for b in &mut bits[i.start_ms as usize..i.end_ms as usize] {
                *b = true;
            }
        }
        bits
    }

    fn runs(bits: &[bool]) -> Vec<Interval> {
        let mut out = Vec::new();
        let mut start = None;
        for (t, &b) in bits.iter().chain(std::iter::once(&false)).enumerate() {
            match (b, start) {
                (true, None) => start = Some(t as u64),
                (false, Some(s)) => {
                    out.push(iv(s, t as u64));
                    start = None;
                }
                _ => {}
            }
        }
        out
    }

    fn disjoint_list(horizon: u64, n: usize) -> impl Strategy<Value = Vec<Interval>> {
        prop::collection::vec((0..horizon, 1..40u64), 0..n).prop_map(move |raw| {
            normalize(
                raw.into_iter()
                    .map(|(s, l)| iv(s, (s + l).min(horizon)))
                    .collect(),
            )
        })
    }

    proptest! {
        #[test]
        fn intersect_matches_bitmap(a in disjoint_list(600, 50), b in disjoint_list(600, 50)) {
            let got = intersect(&a, &b);
            prop_assert!(is_sorted_disjoint(&got));
            let ba = bitmap(&a, 600);
            let bb = bitmap(&b, 600);
            let both: Vec<bool> = ba.iter().zip(&bb).map(|(x, y)| *x && *y).collect();
            // Adjacent output pieces may touch; compare as point sets.
            prop_assert_eq!(bitmap(&got, 600), both.clone());
            prop_assert_eq!(normalize(got), runs(&both));
        }

        #[test]
        fn complement_matches_bitmap(a in disjoint_list(500, 30)) {
            let got = complement(&a, 500);
            let expect: Vec<bool> = bitmap(&a, 500).into_iter().map(|b| !b).collect();
            prop_assert_eq!(got, runs(&expect));
        }

        #[test]
        fn split_tiles_input(start in 0u64..1_000_000, len in 1u64..600_000) {
            let input = iv(start, start + len);
            let parts = split_long_interval(input, 15_000);
            prop_assert_eq!(parts.first().unwrap().start_ms, input.start_ms);
            prop_assert_eq!(parts.last().unwrap().end_ms, input.end_ms);
            for w in parts.windows(2) {
                prop_assert_eq!(w[0].end_ms, w[1].start_ms);
            }
            prop_assert!(parts.iter().all(|p| p.len_ms() <= 15_000 && p.len_ms() > 0));
            for p in &parts {
                prop_assert_eq!(split_long_interval(*p, 15_000), vec![*p]);
            }
        }
    }
}
