use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use super::speed::annotate_speed_in_place;
use super::BinaryDistanceMatrix;
use crate::{AmbiguityPolicy, DetectionSlice, Error, ObjectId, Sample, TrackerConfig, Trajectory};

/// Ids on screen after the most recent slice.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TrackerState {
    active_ids: BTreeSet<ObjectId>,
    previous_assignment: Vec<ObjectId>,
    max_id_ever: u64,
}

impl TrackerState {
    /// Nothing on screen, no ids issued yet.
    pub fn new() -> Self {
        Self::default()
    }

    /// State whose previous slice carried `assignment` (ids must be
    /// distinct), with `max_id_ever` raised to cover them.
    ///
    /// # Panics
    ///
    /// If `assignment` holds a duplicate id.
    pub fn with_assignment(assignment: Vec<ObjectId>, max_id_ever: u64) -> Self {
        let active_ids: BTreeSet<ObjectId> = assignment.iter().copied().collect();
        assert_eq!(active_ids.len(), assignment.len(), "duplicate object id in assignment");
        let max_seen = active_ids.last().map_or(0, |id| id.get());
        TrackerState {
            active_ids,
            previous_assignment: assignment,
            max_id_ever: max_id_ever.max(max_seen),
        }
    }

    /// The set of object numbers currently on screen.
    pub fn active_ids(&self) -> &BTreeSet<ObjectId> {
        &self.active_ids
    }

    /// Id of each point of the previous slice, by point index.
    pub fn previous_assignment(&self) -> &[ObjectId] {
        &self.previous_assignment
    }

    pub fn max_id_ever(&self) -> u64 {
        self.max_id_ever
    }

    fn issue(&mut self) -> ObjectId {
        self.max_id_ever += 1;
        ObjectId::new(self.max_id_ever).expect("id counter is positive after increment")
    }
}

/// Which side of the matrix was multi-valued.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum OcclusionKind {
    /// Several previous points compete for one next point (a column with
    /// two or more entries).
    Merge,
    /// One previous point reaches several next points (a row with two or
    /// more entries).
    Split,
}

/// An ambiguity the tracker could not resolve into one-to-one matches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OcclusionEvent {
    /// Index of the later slice of the pair.
    pub slice_index: usize,
    pub kind: OcclusionKind,
    pub involved_prev_indices: Vec<usize>,
    pub involved_next_indices: Vec<usize>,
}

/// Advances the tracker across one matrix.
///
/// Returns the state describing the matrix's column slice, plus any
/// occlusions found. Merge events are listed before split events, each in
/// ascending index order. Fresh ids go to next-slice points in ascending
/// column order and always continue from `max_id_ever`, so an id is never
/// handed out twice even after its owner has left.
pub fn step(
    state: &TrackerState,
    m: &BinaryDistanceMatrix,
    config: &TrackerConfig,
) -> Result<(TrackerState, Vec<OcclusionEvent>), Error> {
    let prev = &state.previous_assignment;
    if m.rows() != prev.len() {
        return Err(Error::DimensionMismatch {
            expected: prev.len(),
            found: m.rows(),
        });
    }

    let refined;
    let m = match config.policy() {
        AmbiguityPolicy::FlagOnly => m,
        AmbiguityPolicy::NearestNeighborResolve => {
            refined = m.refine_nearest_neighbor();
            &refined
        }
    };

    let (rows, cols) = (m.rows(), m.cols());
    let row_sums = m.row_sums();
    let col_sums = m.col_sums();

    let mut next_ids: Vec<Option<ObjectId>> = vec![None; cols];
    for (i, &rs) in row_sums.iter().enumerate() {
        if rs != 1 {
            continue;
        }
        let j = m.row(i).iter().position(|e| *e).expect("row sum is one");
        if col_sums[j] == 1 {
            next_ids[j] = Some(prev[i]);
        }
    }

    let mut events = Vec::new();
    for (j, &cs) in col_sums.iter().enumerate() {
        if cs >= 2 {
            events.push(OcclusionEvent {
                slice_index: m.next_slice(),
                kind: OcclusionKind::Merge,
                involved_prev_indices: (0..rows).filter(|&i| m.entry(i, j)).collect(),
                involved_next_indices: vec![j],
            });
        }
    }
    for (i, &rs) in row_sums.iter().enumerate() {
        if rs >= 2 {
            events.push(OcclusionEvent {
                slice_index: m.next_slice(),
                kind: OcclusionKind::Split,
                involved_prev_indices: vec![i],
                involved_next_indices: (0..cols).filter(|&j| m.entry(i, j)).collect(),
            });
        }
    }

    // Newcomers (empty columns) and points caught in an occlusion restart.
    let mut next = TrackerState {
        active_ids: BTreeSet::new(),
        previous_assignment: Vec::with_capacity(cols),
        max_id_ever: state.max_id_ever,
    };
    for slot in next_ids {
        let id = match slot {
            Some(id) => id,
            None => next.issue(),
        };
        next.previous_assignment.push(id);
    }
    next.active_ids = next.previous_assignment.iter().copied().collect();
    Ok((next, events))
}

/// Trajectories and occlusions produced by a tracking run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrackOutput {
    /// Sorted by object id.
    pub trajectories: Vec<Trajectory>,
    /// In slice order.
    pub events: Vec<OcclusionEvent>,
}

/// Streaming tracker: feed slices in order with [`Tracker::push`].
#[derive(Debug, Clone)]
pub struct Tracker {
    config: TrackerConfig,
    state: TrackerState,
    last: Option<DetectionSlice>,
    // samples[id - 1]
    samples: Vec<Vec<Sample>>,
    events: Vec<OcclusionEvent>,
}

impl Tracker {
    pub fn new(config: TrackerConfig) -> Self {
        Tracker {
            config,
            state: TrackerState::new(),
            last: None,
            samples: Vec::new(),
            events: Vec::new(),
        }
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    pub fn state(&self) -> &TrackerState {
        &self.state
    }

    /// Occlusions seen so far.
    pub fn events(&self) -> &[OcclusionEvent] {
        &self.events
    }

    /// Matches `slice` against the previous one and returns the ids given to
    /// its points. Slices must arrive with consecutive indices.
    pub fn push(&mut self, slice: &DetectionSlice) -> Result<&[ObjectId], Error> {
        let m = match &self.last {
            Some(prev) => {
                if slice.slice_index != prev.slice_index + 1 {
                    return Err(Error::NonContiguousSlices {
                        expected: prev.slice_index + 1,
                        found: slice.slice_index,
                    });
                }
                BinaryDistanceMatrix::build_points(
                    &prev.points,
                    &slice.points,
                    slice.slice_index,
                    self.config.threshold(),
                )
            }
            // Before the first slice the screen is empty, so every point is
            // a newcomer and ids run 1..=q in point order.
            None => BinaryDistanceMatrix::build_points(&[], &slice.points, slice.slice_index, self.config.threshold()),
        };

        let (state, events) = step(&self.state, &m, &self.config)?;
        self.state = state;
        self.events.extend(events);

        for (id, p) in self.state.previous_assignment.iter().zip(&slice.points) {
            let k = (id.get() - 1) as usize;
            if k >= self.samples.len() {
                self.samples.resize_with(k + 1, Vec::new);
            }
            self.samples[k].push(Sample {
                slice_index: slice.slice_index,
                point: *p,
                speed: None,
            });
        }
        match &mut self.last {
            Some(last) => {
                last.slice_index = slice.slice_index;
                last.points.clear();
                last.points.extend_from_slice(&slice.points);
            }
            None => self.last = Some(slice.clone()),
        }
        Ok(&self.state.previous_assignment)
    }

    /// Assembles speed-annotated trajectories.
    pub fn finish(self) -> TrackOutput {
        let fps = self.config.fps();
        let trajectories = self
            .samples
            .into_iter()
            .enumerate()
            .filter(|(_, s)| !s.is_empty())
            .map(|(k, samples)| {
                let mut t = Trajectory {
                    object_id: ObjectId::new(k as u64 + 1).expect("k + 1 > 0"),
                    samples,
                };
                annotate_speed_in_place(&mut t, fps);
                t
            })
            .collect();
        TrackOutput {
            trajectories,
            events: self.events,
        }
    }
}

/// Runs the tracker over `slices`, which must have consecutive indices.
pub fn track(slices: &[DetectionSlice], config: &TrackerConfig) -> Result<TrackOutput, Error> {
    let mut tracker = Tracker::new(*config);
    for s in slices {
        tracker.push(s)?;
    }
    Ok(tracker.finish())
}
