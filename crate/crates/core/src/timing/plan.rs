use serde::{Deserialize, Serialize};

use super::interval::{self, Interval};
use super::{SceneCutList, SignalTrack, TimingConfig};
use crate::model::AdSlot;
use crate::Result;

/// Which combination of signals produced a slot, best first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PriorityLevel {
    /// Silence, no speech and a scene-cut window all overlap.
    #[serde(rename = "L1_ALL3")]
    L1All3,
    #[serde(rename = "L2_SIL_NOSPEECH")]
    L2SilNoSpeech,
    #[serde(rename = "L3_NOSPEECH")]
    L3NoSpeech,
    #[serde(rename = "L4_SILENCE")]
    L4Silence,
    #[serde(rename = "L5_SCENE")]
    L5Scene,
}

impl PriorityLevel {
    pub const ALL: [PriorityLevel; 5] = [
        PriorityLevel::L1All3,
        PriorityLevel::L2SilNoSpeech,
        PriorityLevel::L3NoSpeech,
        PriorityLevel::L4Silence,
        PriorityLevel::L5Scene,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PriorityLevel::L1All3 => "L1_ALL3",
            PriorityLevel::L2SilNoSpeech => "L2_SIL_NOSPEECH",
            PriorityLevel::L3NoSpeech => "L3_NOSPEECH",
            PriorityLevel::L4Silence => "L4_SILENCE",
            PriorityLevel::L5Scene => "L5_SCENE",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannedSlot {
    pub slot: AdSlot,
    pub level: PriorityLevel,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdPlan {
    pub slots: Vec<PlannedSlot>,
}

impl AdPlan {
    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn ad_slots(&self) -> Vec<AdSlot> {
        self.slots.iter().map(|s| s.slot).collect()
    }

    /// Checks the plan invariants: sorted, disjoint, within the video and
    /// every slot length in `[min_slot_ms, max_slot_ms]`.
    pub fn check(
        &self,
        duration_ms: u64,
        config: &TimingConfig,
    ) -> std::result::Result<(), String> {
        for (i, s) in self.slots.iter().enumerate() {
            let len = s.slot.len_ms();
            if len < config.min_slot_ms || len > config.max_slot_ms {
                return Err(format!("slot {i} {} has length {len}", s.slot));
            }
            if s.slot.end_ms > duration_ms {
                return Err(format!("slot {i} {} ends after the video", s.slot));
            }
        }
        for (i, w) in self.slots.windows(2).enumerate() {
            if w[0].slot.end_ms > w[1].slot.start_ms {
                return Err(format!("slots {i} and {} overlap or are unsorted", i + 1));
            }
        }
        Ok(())
    }
}

/// Widens each cut into `[t, t + window)`, clipped to the video, and unions
/// the result.
pub fn cut_windows(cuts: &SceneCutList, duration_ms: u64, window_ms: u64) -> Vec<Interval> {
    interval::normalize(
        cuts.cut_times_ms
            .iter()
            .filter(|&&t| t < duration_ms)
            .map(|&t| Interval::new(t, (t + window_ms).min(duration_ms)))
            .collect(),
    )
}

/// Chooses description slots.
///
/// The timeline is cut into `segment_len_ms` segments. In each segment the
/// five priority levels are evaluated in order and the first that yields any
/// interval of at least `min_slot_ms` contributes all of its intervals.
/// Same-level pieces that touch across a segment boundary are then joined,
/// and anything longer than `max_slot_ms` is split at midpoints.
pub fn plan_slots(
    silence: &SignalTrack,
    no_speech: &SignalTrack,
    cuts: &SceneCutList,
    duration_ms: u64,
    config: &TimingConfig,
) -> Result<AdPlan> {
    config.validate()?;
    let whole = Interval::new(0, duration_ms);
    let sil = interval::clip(&interval::normalize(silence.intervals.clone()), whole);
    let ns = interval::clip(&interval::normalize(no_speech.intervals.clone()), whole);
    let cw = cut_windows(cuts, duration_ms, config.cut_window_ms);
    let sil_ns = interval::intersect(&sil, &ns);
    let all3 = interval::intersect(&sil_ns, &cw);
    let levels: [(PriorityLevel, &[Interval]); 5] = [
        (PriorityLevel::L1All3, &all3),
        (PriorityLevel::L2SilNoSpeech, &sil_ns),
        (PriorityLevel::L3NoSpeech, &ns),
        (PriorityLevel::L4Silence, &sil),
        (PriorityLevel::L5Scene, &cw),
    ];

    let mut chosen: Vec<PlannedSlot> = Vec::new();
    let mut seg_start = 0;
    while seg_start < duration_ms {
        let segment = Interval::new(
            seg_start,
            (seg_start + config.segment_len_ms).min(duration_ms),
        );
        for (level, track) in levels {
            let candidates =
                interval::drop_shorter_than(&interval::clip(track, segment), config.min_slot_ms);
            if !candidates.is_empty() {
                chosen.extend(candidates.into_iter().map(|i| PlannedSlot {
                    slot: i.into(),
                    level,
                }));
                break;
            }
        }
        seg_start = segment.end_ms;
    }

    let mut slots = Vec::with_capacity(chosen.len());
    for piece in coalesce(chosen) {
        for part in interval::split_long_interval(piece.slot.into(), config.max_slot_ms) {
            slots.push(PlannedSlot {
                slot: part.into(),
                level: piece.level,
            });
        }
    }
    Ok(AdPlan { slots })
}

fn coalesce(slots: Vec<PlannedSlot>) -> Vec<PlannedSlot> {
    let mut out: Vec<PlannedSlot> = Vec::with_capacity(slots.len());
    for s in slots {
        match out.last_mut() {
            Some(last) if last.level == s.level && s.slot.start_ms <= last.slot.end_ms => {
                last.slot.end_ms = last.slot.end_ms.max(s.slot.end_ms);
            }
            _ => out.push(s),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timing::SignalKind;

    fn track(kind: SignalKind, list: &[(u64, u64)]) -> SignalTrack {
        SignalTrack::new(
            kind,
            list.iter().map(|&(a, b)| Interval::new(a, b)).collect(),
        )
        .unwrap()
    }

    fn slot(a: u64, b: u64, level: PriorityLevel) -> PlannedSlot {
        PlannedSlot {
            slot: AdSlot::new(a, b),
            level,
        }
    }

    #[test]
    fn all_three_overlap() {
        let plan = plan_slots(
            &track(SignalKind::Silence, &[(0, 6000)]),
            &track(SignalKind::NoSpeech, &[(0, 6000)]),
            &SceneCutList {
                cut_times_ms: vec![1000],
            },
            15_000,
            &TimingConfig::default(),
        )
        .unwrap();
        assert_eq!(plan.slots, vec![slot(1000, 3000, PriorityLevel::L1All3)]);
    }

    #[test]
    fn nothing_in_nothing_out() {
        let plan = plan_slots(
            &SignalTrack::empty(SignalKind::Silence),
            &SignalTrack::empty(SignalKind::NoSpeech),
            &SceneCutList::default(),
            30_000,
            &TimingConfig::default(),
        )
        .unwrap();
        assert!(plan.is_empty());
    }

    #[test]
    fn long_quiet_stretch_is_split_into_quarters() {
        let plan = plan_slots(
            &track(SignalKind::Silence, &[(0, 40_000)]),
            &track(SignalKind::NoSpeech, &[(0, 40_000)]),
            &SceneCutList::default(),
            40_000,
            &TimingConfig::default(),
        )
        .unwrap();
        let l2 = PriorityLevel::L2SilNoSpeech;
        assert_eq!(
            plan.slots,
            vec![
                slot(0, 10_000, l2),
                slot(10_000, 20_000, l2),
                slot(20_000, 30_000, l2),
                slot(30_000, 40_000, l2)
            ]
        );
        plan.check(40_000, &TimingConfig::default()).unwrap();
    }

    #[test]
    fn levels_fall_back_per_segment() {
        // Segment 1 has only speech-free music; segment 2 only a scene cut.
        let plan = plan_slots(
            &SignalTrack::empty(SignalKind::Silence),
            &track(SignalKind::NoSpeech, &[(2000, 5000)]),
            &SceneCutList {
                cut_times_ms: vec![20_000],
            },
            30_000,
            &TimingConfig::default(),
        )
        .unwrap();
        assert_eq!(
            plan.slots,
            vec![
                slot(2000, 5000, PriorityLevel::L3NoSpeech),
                slot(20_000, 22_000, PriorityLevel::L5Scene)
            ]
        );
    }

    #[test]
    fn short_candidates_do_not_win_a_segment() {
        // The 500 ms silence is too short, so no-speech supplies the slot.
        let plan = plan_slots(
            &track(SignalKind::Silence, &[(1000, 1500)]),
            &track(SignalKind::NoSpeech, &[(6000, 9000)]),
            &SceneCutList::default(),
            15_000,
            &TimingConfig::default(),
        )
        .unwrap();
        assert_eq!(
            plan.slots,
            vec![slot(6000, 9000, PriorityLevel::L3NoSpeech)]
        );
    }

    #[test]
    fn deterministic() {
        let args = (
            track(SignalKind::Silence, &[(0, 3000), (14_000, 29_000)]),
            track(SignalKind::NoSpeech, &[(1000, 20_000)]),
            SceneCutList {
                cut_times_ms: vec![500, 16_000],
            },
        );
        let a = plan_slots(&args.0, &args.1, &args.2, 30_000, &TimingConfig::default()).unwrap();
        let b = plan_slots(&args.0, &args.1, &args.2, 30_000, &TimingConfig::default()).unwrap();
        assert_eq!(a, b);
    }
}
