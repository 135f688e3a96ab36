//! CLEAR-MOT event accumulation and metric finalization.
//!
//! Per frame, ground-truth records and track hypotheses are matched within
//! a Euclidean gate. Correspondences persist across frames: a pair from the
//! previous frames is kept while it stays within the gate, and only the
//! remainder is re-matched by a minimum-cost Hungarian solve. A ground
//! truth whose new hypothesis differs from its last one logs an identity
//! switch.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::MetricsError;
use crate::assignment::{self, CostMatrix};
use crate::model::{FrameTime, PersonId, Vec2};

/// One per-frame evaluation event. A `Switch` is also a match (it carries
/// the matched distance and counts toward recall and MOTP).
#[derive(Debug, Clone, PartialEq)]
pub enum MotEvent {
    Match {
        gt: PersonId,
        hyp: u64,
        dist: f64,
    },
    Switch {
        gt: PersonId,
        old_hyp: u64,
        new_hyp: u64,
        dist: f64,
    },
    /// Missed ground truth (false negative).
    Miss { gt: PersonId },
    /// Unmatched hypothesis (false positive).
    FalsePositive { hyp: u64 },
}

/// Streaming accumulator over evaluation frames.
#[derive(Debug, Clone)]
pub struct MotAccumulator {
    gate: f64,
    events: Vec<(FrameTime, MotEvent)>,
    /// Last matched hypothesis per ground truth, persisted across frames.
    correspondences: BTreeMap<PersonId, u64>,
    frames: usize,
    gt_total: usize,
    hyp_total: usize,
    /// Frames in which each ground truth appears, and those in which it was
    /// matched, for coverage/fragmentation metrics.
    gt_presence: BTreeMap<PersonId, Vec<(FrameTime, bool)>>,
    hyp_presence: BTreeMap<u64, usize>,
    /// Frames where a (gt, hyp) pair was within the gate, for IDF1.
    pair_hits: BTreeMap<(PersonId, u64), usize>,
}

impl MotAccumulator {
    /// `gate` is the detection threshold in meters: a ground truth counts
    /// as detected when a hypothesis lies within it.
    pub fn new(gate: f64) -> Self {
        assert!(gate > 0.0);
        Self {
            gate,
            events: Vec::new(),
            correspondences: BTreeMap::new(),
            frames: 0,
            gt_total: 0,
            hyp_total: 0,
            gt_presence: BTreeMap::new(),
            hyp_presence: BTreeMap::new(),
            pair_hits: BTreeMap::new(),
        }
    }

    pub fn gate(&self) -> f64 {
        self.gate
    }

    pub fn events(&self) -> &[(FrameTime, MotEvent)] {
        &self.events
    }

    /// Accumulates one frame of ground truths and hypotheses.
    pub fn accumulate_frame(
        &mut self,
        t: FrameTime,
        gt: &[(PersonId, Vec2)],
        hyp: &[(u64, Vec2)],
    ) -> Result<(), MetricsError> {
        {
            let mut seen = BTreeSet::new();
            for (id, _) in gt {
                if !seen.insert(id.clone()) {
                    return Err(MetricsError::DuplicateId(id.clone()));
                }
            }
            let mut seen = BTreeSet::new();
            for (id, _) in hyp {
                if !seen.insert(*id) {
                    return Err(MetricsError::DuplicateId(alloc::format!("{id}")));
                }
            }
        }
        self.frames += 1;
        self.gt_total += gt.len();
        self.hyp_total += hyp.len();

        // deterministic processing order
        let mut gt_order: Vec<usize> = (0..gt.len()).collect();
        gt_order.sort_by(|&a, &b| gt[a].0.cmp(&gt[b].0));

        let hyp_index_of: BTreeMap<u64, usize> =
            hyp.iter().enumerate().map(|(j, (id, _))| (*id, j)).collect();

        let dist = |i: usize, j: usize| (gt[i].1 - hyp[j].1).norm();

        // keep persisting correspondences still within the gate
        let mut gt_matched: Vec<Option<(usize, f64)>> = alloc::vec![None; gt.len()];
        let mut hyp_taken: Vec<bool> = alloc::vec![false; hyp.len()];
        for &i in &gt_order {
            if let Some(&prev_hyp) = self.correspondences.get(&gt[i].0) {
                if let Some(&j) = hyp_index_of.get(&prev_hyp) {
                    if !hyp_taken[j] && dist(i, j) <= self.gate {
                        gt_matched[i] = Some((j, dist(i, j)));
                        hyp_taken[j] = true;
                    }
                }
            }
        }

        // Hungarian over the remainder
        let free_gt: Vec<usize> = (0..gt.len()).filter(|&i| gt_matched[i].is_none()).collect();
        let free_hyp: Vec<usize> = (0..hyp.len()).filter(|&j| !hyp_taken[j]).collect();
        let costs = CostMatrix::from_fn(free_gt.len(), free_hyp.len(), |r, c| {
            let d = dist(free_gt[r], free_hyp[c]);
            (d <= self.gate).then_some(d)
        })
        .expect("distances are nonnegative");
        for &(r, c) in &assignment::solve(&costs).pairs {
            let (i, j) = (free_gt[r], free_hyp[c]);
            gt_matched[i] = Some((j, dist(i, j)));
            hyp_taken[j] = true;
        }

        // log events
        for &i in &gt_order {
            let gt_id = &gt[i].0;
            match gt_matched[i] {
                Some((j, d)) => {
                    let hyp_id = hyp[j].0;
                    let event = match self.correspondences.get(gt_id) {
                        Some(&old) if old != hyp_id => MotEvent::Switch {
                            gt: gt_id.clone(),
                            old_hyp: old,
                            new_hyp: hyp_id,
                            dist: d,
                        },
                        _ => MotEvent::Match {
                            gt: gt_id.clone(),
                            hyp: hyp_id,
                            dist: d,
                        },
                    };
                    self.correspondences.insert(gt_id.clone(), hyp_id);
                    self.events.push((t, event));
                }
                None => {
                    self.events.push((t, MotEvent::Miss { gt: gt_id.clone() }));
                }
            }
            self.gt_presence
                .entry(gt_id.clone())
                .or_default()
                .push((t, gt_matched[i].is_some()));
        }
        for (j, (hyp_id, _)) in hyp.iter().enumerate() {
            if !hyp_taken[j] {
                self.events.push((t, MotEvent::FalsePositive { hyp: *hyp_id }));
            }
            *self.hyp_presence.entry(*hyp_id).or_default() += 1;
        }

        // pairwise gate hits for the identity metrics
        for (gt_id, gp) in gt {
            for (hyp_id, hp) in hyp {
                if (gp - hp).norm() <= self.gate {
                    *self
                        .pair_hits
                        .entry((gt_id.clone(), *hyp_id))
                        .or_default() += 1;
                }
            }
        }
        Ok(())
    }

    /// Finalizes all accumulated frames into a summary.
    pub fn finalize(&self) -> Result<MotSummary, MetricsError> {
        if self.frames == 0 {
            return Err(MetricsError::EmptyAccumulator);
        }
        if self.gt_total == 0 {
            return Err(MetricsError::NoGroundTruth);
        }

        let mut matches = 0usize;
        let mut switches = 0usize;
        let mut misses = 0usize;
        let mut false_positives = 0usize;
        let mut dist_sum = 0.0;
        for (_, event) in &self.events {
            match event {
                MotEvent::Match { dist, .. } => {
                    matches += 1;
                    dist_sum += dist;
                }
                MotEvent::Switch { dist, .. } => {
                    matches += 1;
                    switches += 1;
                    dist_sum += dist;
                }
                MotEvent::Miss { .. } => misses += 1,
                MotEvent::FalsePositive { .. } => false_positives += 1,
            }
        }

        let gt_total = self.gt_total as f64;
        let mota = 1.0 - (misses + false_positives + switches) as f64 / gt_total;
        let motp = if matches > 0 {
            dist_sum / matches as f64
        } else {
            0.0
        };
        let recall = matches as f64 / gt_total;
        let precision = if matches + false_positives > 0 {
            matches as f64 / (matches + false_positives) as f64
        } else {
            1.0
        };
        let idsr = if recall > 0.0 {
            switches as f64 / recall
        } else {
            0.0
        };

        // coverage-based metrics
        let gt_count = self.gt_presence.len();
        let mut mostly_tracked = 0usize;
        let mut mostly_lost = 0usize;
        let mut fragmentations = 0usize;
        for states in self.gt_presence.values() {
            let covered = states.iter().filter(|(_, m)| *m).count();
            let ratio = covered as f64 / states.len() as f64;
            if ratio >= 0.8 {
                mostly_tracked += 1;
            }
            if ratio <= 0.2 {
                mostly_lost += 1;
            }
            // tracked -> untracked -> tracked transitions over the lifespan
            let mut was_tracked = false;
            let mut in_gap = false;
            for &(_, m) in states {
                if m {
                    if was_tracked && in_gap {
                        fragmentations += 1;
                    }
                    was_tracked = true;
                    in_gap = false;
                } else if was_tracked {
                    in_gap = true;
                }
            }
        }

        let (idtp, _) = self.identity_matching();
        let idfn = self.gt_total - idtp;
        let idfp = self.hyp_total - idtp;
        let idf1 = if 2 * idtp + idfp + idfn > 0 {
            2.0 * idtp as f64 / (2 * idtp + idfp + idfn) as f64
        } else {
            1.0
        };

        Ok(MotSummary {
            frames: self.frames,
            gt_total: self.gt_total,
            matches,
            misses,
            false_positives,
            switches,
            mota,
            motp,
            idf1,
            mostly_tracked,
            mostly_tracked_ratio: mostly_tracked as f64 / gt_count as f64,
            mostly_lost,
            mostly_lost_ratio: mostly_lost as f64 / gt_count as f64,
            fpr: false_positives as f64 / self.frames as f64,
            fnr: misses as f64 / self.frames as f64,
            recall,
            precision,
            idsr,
            fragmentations,
        })
    }

    /// Global gt-trajectory to hyp-trajectory matching maximizing the
    /// number of within-gate frame pairs (IDTP). Returns (IDTP, pairs).
    fn identity_matching(&self) -> (usize, Vec<(PersonId, u64)>) {
        let gt_ids: Vec<&PersonId> = self.gt_presence.keys().collect();
        let hyp_ids: Vec<&u64> = self.hyp_presence.keys().collect();
        if gt_ids.is_empty() || hyp_ids.is_empty() {
            return (0, Vec::new());
        }
        let hits = |i: usize, j: usize| -> usize {
            self.pair_hits
                .get(&(gt_ids[i].clone(), *hyp_ids[j]))
                .copied()
                .unwrap_or(0)
        };
        let max_hits = self.pair_hits.values().copied().max().unwrap_or(0) + 1;
        // minimize (max_hits - hits) <=> maximize hits at full cardinality
        let costs = CostMatrix::from_fn(gt_ids.len(), hyp_ids.len(), |i, j| {
            Some((max_hits - hits(i, j)) as f64)
        })
        .expect("costs are nonnegative");
        let solution = assignment::solve(&costs);
        let mut idtp = 0usize;
        let mut pairs = Vec::new();
        for &(i, j) in &solution.pairs {
            idtp += hits(i, j);
            pairs.push((gt_ids[i].clone(), *hyp_ids[j]));
        }
        (idtp, pairs)
    }
}

/// Finalized CLEAR-MOT and identity metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct MotSummary {
    pub frames: usize,
    /// Total ground-truth records over all frames.
    pub gt_total: usize,
    pub matches: usize,
    pub misses: usize,
    pub false_positives: usize,
    pub switches: usize,
    /// 1 - (FN + FP + IDS) / GT.
    pub mota: f64,
    /// Mean Euclidean distance over matched pairs, meters.
    pub motp: f64,
    pub idf1: f64,
    pub mostly_tracked: usize,
    pub mostly_tracked_ratio: f64,
    pub mostly_lost: usize,
    pub mostly_lost_ratio: f64,
    /// False positives per frame.
    pub fpr: f64,
    /// Misses per frame.
    pub fnr: f64,
    pub recall: f64,
    pub precision: f64,
    /// Identity switches over recall.
    pub idsr: f64,
    pub fragmentations: usize,
}
