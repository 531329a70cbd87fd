//! Scoring tracker output against ground truth, and the exhaustive matching
//! oracle used to cross-check [`crate::matching::step`].

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use crate::simulate::GroundTruth;
use crate::{DetectionSlice, Error, Point, Trajectory};

/// Link and identity counters from [`evaluate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    /// Consecutive-slice correspondences in the ground truth.
    pub total_links: usize,
    /// Links whose two endpoints were matched to the same tracker id.
    pub correct_links: usize,
    /// Times a true object's matched tracker id changed.
    pub id_switches: usize,
    /// True objects seen under two or more tracker ids.
    pub fragmentations: usize,
    /// Tracker ids never matched to any true object.
    pub spurious_tracks: usize,
}

impl EvalReport {
    pub fn is_perfect(&self) -> bool {
        self.correct_links == self.total_links && self.id_switches == 0 && self.fragmentations == 0
    }
}

/// One-to-one nearest-neighbour matching of `truth` to `tracked` within
/// `radius`: closest pairs are committed first. Returns, per truth point,
/// the index of its tracker point.
fn match_slice(truth: &[Point], tracked: &[Point], radius: f64) -> Vec<Option<usize>> {
    let mut pairs = Vec::new();
    for (k, t) in truth.iter().enumerate() {
        for (l, p) in tracked.iter().enumerate() {
            let d = t.distance(p);
            if d <= radius {
                pairs.push((d, k, l));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut out = vec![None; truth.len()];
    let mut used = vec![false; tracked.len()];
    for (_, k, l) in pairs {
        if out[k].is_none() && !used[l] {
            out[k] = Some(l);
            used[l] = true;
        }
    }
    out
}

/// Compares tracker trajectories with the ground truth.
///
/// Within each slice, tracker points are ordered by position (then id)
/// before matching, so the report does not depend on how tracker ids are
/// numbered.
pub fn evaluate(trajectories: &[Trajectory], truth: &GroundTruth, match_radius: f64) -> Result<EvalReport, Error> {
    if !(match_radius.is_finite() && match_radius > 0.0) {
        return Err(Error::InvalidThreshold(match_radius));
    }
    let n_slices = trajectories
        .iter()
        .filter_map(|t| t.last_slice())
        .map(|s| s + 1)
        .chain(core::iter::once(truth.n_slices()))
        .max()
        .unwrap_or(0);

    let mut tracked: Vec<Vec<(Point, u64)>> = vec![Vec::new(); n_slices];
    for t in trajectories {
        for s in &t.samples {
            tracked[s.slice_index].push((s.point, t.object_id.get()));
        }
    }
    for pts in tracked.iter_mut() {
        pts.sort_by(|a, b| {
            a.0.x
                .total_cmp(&b.0.x)
                .then(a.0.y.total_cmp(&b.0.y))
                .then(a.1.cmp(&b.1))
        });
    }

    // true id -> [(slice, matched tracker id)]
    let mut history: BTreeMap<u64, Vec<(usize, Option<u64>)>> = BTreeMap::new();
    let mut matched_tracker_ids = BTreeSet::new();
    for (s, slice_truth) in truth.slices.iter().enumerate() {
        let truth_pts: Vec<Point> = slice_truth.iter().map(|t| t.point).collect();
        let trk_pts: Vec<Point> = tracked[s].iter().map(|p| p.0).collect();
        let m = match_slice(&truth_pts, &trk_pts, match_radius);
        for (t, l) in slice_truth.iter().zip(m) {
            let tid = l.map(|l| tracked[s][l].1);
            if let Some(id) = tid {
                matched_tracker_ids.insert(id);
            }
            history.entry(t.true_id).or_default().push((s, tid));
        }
    }

    let mut report = EvalReport::default();
    for h in history.values() {
        for w in h.windows(2) {
            if w[1].0 != w[0].0 + 1 {
                continue;
            }
            report.total_links += 1;
            if let (Some(a), Some(b)) = (w[0].1, w[1].1) {
                if a == b {
                    report.correct_links += 1;
                }
            }
        }
        let seen: Vec<u64> = h.iter().filter_map(|e| e.1).collect();
        report.id_switches += seen.windows(2).filter(|w| w[0] != w[1]).count();
        if seen.iter().collect::<BTreeSet<_>>().len() >= 2 {
            report.fragmentations += 1;
        }
    }
    report.spurious_tracks = trajectories
        .iter()
        .filter(|t| !matched_tracker_ids.contains(&t.object_id.get()))
        .count();
    Ok(report)
}

/// Largest slice size [`oracle_match`] will enumerate.
pub const ORACLE_LIMIT: usize = 8;

/// Result of the exhaustive oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleMatching {
    /// `(prev index, next index)` pairs whose partners are forced, in
    /// ascending prev order.
    pub pairs: Vec<(usize, usize)>,
    /// Some point has two or more feasible partners.
    pub ambiguous: bool,
    /// Number of feasible partial matchings enumerated (including the empty one).
    pub feasible_matchings: usize,
}

/// Enumerates every partial one-to-one matching between `prev` and `next`
/// whose matched distances are all within `threshold`. A pair is reported
/// when, across all those matchings, each of its points is only ever
/// matched to the other.
pub fn oracle_match(prev: &DetectionSlice, next: &DetectionSlice, threshold: f64) -> Result<OracleMatching, Error> {
    let (q, r) = (prev.len(), next.len());
    if q > ORACLE_LIMIT || r > ORACLE_LIMIT {
        return Err(Error::OracleTooLarge {
            prev: q,
            next: r,
            limit: ORACLE_LIMIT,
        });
    }
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(Error::InvalidThreshold(threshold));
    }

    struct Search<'a> {
        prev: &'a [Point],
        next: &'a [Point],
        threshold: f64,
        current: Vec<(usize, usize)>,
        prev_partners: Vec<u16>,
        next_partners: Vec<u16>,
        count: usize,
    }

    impl Search<'_> {
        fn run(&mut self, i: usize, used: u16) {
            if i == self.prev.len() {
                self.count += 1;
                for &(a, b) in &self.current {
                    self.prev_partners[a] |= 1 << b;
                    self.next_partners[b] |= 1 << a;
                }
                return;
            }
            self.run(i + 1, used);
            for j in 0..self.next.len() {
                if used & (1 << j) == 0 && self.prev[i].distance(&self.next[j]) <= self.threshold {
                    self.current.push((i, j));
                    self.run(i + 1, used | (1 << j));
                    self.current.pop();
                }
            }
        }
    }

    let mut search = Search {
        prev: &prev.points,
        next: &next.points,
        threshold,
        current: Vec::new(),
        prev_partners: vec![0; q],
        next_partners: vec![0; r],
        count: 0,
    };
    search.run(0, 0);

    let ambiguous = search
        .prev_partners
        .iter()
        .chain(&search.next_partners)
        .any(|m| m.count_ones() >= 2);
    let pairs = search
        .prev_partners
        .iter()
        .enumerate()
        .filter(|(_, m)| m.count_ones() == 1)
        .map(|(i, m)| (i, m.trailing_zeros() as usize))
        .filter(|&(i, j)| search.next_partners[j] == 1 << i)
        .collect();
    Ok(OracleMatching {
        pairs,
        ambiguous,
        feasible_matchings: search.count,
    })
}
