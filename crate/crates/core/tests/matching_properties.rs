use std::collections::BTreeSet;

use centrack_core::eval::oracle_match;
use centrack_core::matching::{step, track, BinaryDistanceMatrix, TrackerState};
use centrack_core::simulate::{generate, occlusion_free, ScenarioConfig};
use centrack_core::{AmbiguityPolicy, DetectionSlice, ObjectId, Point, TrackerConfig};
use proptest::prelude::*;

fn points(max: usize) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec((0.0f64..40.0, 0.0f64..40.0), 0..=max)
        .prop_map(|v| v.into_iter().map(|(x, y)| Point::new(x, y)).collect())
}

fn ids(n: usize, offset: u64) -> Vec<ObjectId> {
    (0..n as u64)
        .map(|k| ObjectId::new(offset + 3 * k + 1).unwrap())
        .collect()
}

fn policy() -> impl Strategy<Value = AmbiguityPolicy> {
    prop_oneof![
        Just(AmbiguityPolicy::FlagOnly),
        Just(AmbiguityPolicy::NearestNeighborResolve)
    ]
}

proptest! {
    #[test]
    fn entries_follow_recomputed_distance(prev in points(12), next in points(12), t in 0.5f64..20.0) {
        let m = BinaryDistanceMatrix::build(&DetectionSlice::new(0, prev.clone()), &DetectionSlice::new(1, next.clone()), t).unwrap();
        prop_assert_eq!((m.rows(), m.cols()), (prev.len(), next.len()));
        for (i, p) in prev.iter().enumerate() {
            for (j, n) in next.iter().enumerate() {
                let d = ((p.x - n.x).powi(2) + (p.y - n.y).powi(2)).sqrt();
                prop_assert_eq!(m.entry(i, j), d <= t);
                prop_assert!((m.distance(i, j) - d).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn refinement_leaves_at_most_one_per_row(prev in points(8), next in points(8), t in 1.0f64..30.0) {
        let m = BinaryDistanceMatrix::build(&DetectionSlice::new(0, prev), &DetectionSlice::new(1, next), t).unwrap();
        let r = m.refine_nearest_neighbor();
        for (i, (&before, &after)) in m.row_sums().iter().zip(&r.row_sums()).enumerate() {
            prop_assert_eq!(after, before.min(1));
            if before >= 2 {
                let j = (0..r.cols()).find(|&j| r.entry(i, j)).unwrap();
                let best = (0..m.cols()).filter(|&j| m.entry(i, j)).map(|j| m.distance(i, j)).fold(f64::INFINITY, f64::min);
                prop_assert_eq!(m.distance(i, j), best);
            }
        }
    }

    #[test]
    fn ids_are_conserved(prev in points(8), next in points(8), t in 1.0f64..15.0, extra in 0u64..5, pol in policy()) {
        let old_ids = ids(prev.len(), 0);
        let max = old_ids.last().map_or(0, |i| i.get()) + extra;
        let state = TrackerState::with_assignment(old_ids, max);
        let m = BinaryDistanceMatrix::build(&DetectionSlice::new(0, prev), &DetectionSlice::new(1, next.clone()), t).unwrap();
        let cfg = TrackerConfig::new(t).unwrap().with_policy(pol);
        let (new, _) = step(&state, &m, &cfg).unwrap();

        let assigned = new.previous_assignment();
        prop_assert_eq!(assigned.len(), next.len());
        let set: BTreeSet<_> = assigned.iter().copied().collect();
        prop_assert_eq!(set.len(), assigned.len());
        prop_assert_eq!(&set, new.active_ids());
        let mut fresh: Vec<u64> = Vec::new();
        for id in assigned {
            if id.get() <= max {
                prop_assert!(state.active_ids().contains(id));
            } else {
                fresh.push(id.get());
            }
        }
        // fresh ids are consecutive from max + 1, ascending by column
        prop_assert_eq!(fresh, (max + 1..=new.max_id_ever()).collect::<Vec<_>>());
    }

    #[test]
    fn permuting_next_slice_moves_ids_with_points(
        prev in points(7), next in points(7), t in 1.0f64..15.0, seed in any::<u64>(), pol in policy()
    ) {
        use rand::{seq::SliceRandom, SeedableRng};
        let mut perm: Vec<usize> = (0..next.len()).collect();
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let shuffled: Vec<Point> = perm.iter().map(|&k| next[k]).collect();

        let state = TrackerState::with_assignment(ids(prev.len(), 0), 100);
        let cfg = TrackerConfig::new(t).unwrap().with_policy(pol);
        let p = DetectionSlice::new(0, prev);
        let a = step(&state, &BinaryDistanceMatrix::build(&p, &DetectionSlice::new(1, next), t).unwrap(), &cfg).unwrap().0;
        let b = step(&state, &BinaryDistanceMatrix::build(&p, &DetectionSlice::new(1, shuffled), t).unwrap(), &cfg).unwrap().0;
        for (k, &src) in perm.iter().enumerate() {
            let (orig, moved) = (a.previous_assignment()[src], b.previous_assignment()[k]);
            if orig.get() <= 100 {
                prop_assert_eq!(orig, moved);
            } else {
                prop_assert!(moved.get() > 100);
            }
        }
    }

    #[test]
    fn ids_never_reused_over_a_run(raw in prop::collection::vec(points(5), 1..30), t in 1.0f64..10.0, pol in policy()) {
        let slices: Vec<DetectionSlice> = raw.into_iter().enumerate().map(|(s, p)| DetectionSlice::new(s, p)).collect();
        let out = track(&slices, &TrackerConfig::new(t).unwrap().with_policy(pol)).unwrap();
        let total: usize = out.trajectories.iter().map(|t| t.samples.len()).sum();
        prop_assert_eq!(total, slices.iter().map(|s| s.len()).sum::<usize>());
        for (k, tr) in out.trajectories.iter().enumerate() {
            prop_assert!(tr.is_contiguous());
            prop_assert_eq!(tr.object_id.get(), k as u64 + 1);
            prop_assert_eq!(tr.samples.last().unwrap().speed, None);
        }
    }

    // Unambiguous small instances: step agrees with exhaustive enumeration.
    #[test]
    fn step_matches_oracle_when_unambiguous(prev in points(6), next in points(6), t in 1.0f64..12.0, pol in policy()) {
        let p = DetectionSlice::new(0, prev.clone());
        let n = DetectionSlice::new(1, next.clone());
        let oracle = oracle_match(&p, &n, t).unwrap();
        prop_assume!(!oracle.ambiguous);
        let state = TrackerState::with_assignment(ids(prev.len(), 0), 50);
        let cfg = TrackerConfig::new(t).unwrap().with_policy(pol);
        let (new, events) = step(&state, &BinaryDistanceMatrix::build(&p, &n, t).unwrap(), &cfg).unwrap();
        prop_assert!(events.is_empty());
        let mut expected: Vec<Option<ObjectId>> = vec![None; next.len()];
        for (i, j) in oracle.pairs {
            expected[j] = Some(state.previous_assignment()[i]);
        }
        let mut fresh = 50;
        let expected: Vec<ObjectId> = expected.into_iter().map(|e| e.unwrap_or_else(|| { fresh += 1; ObjectId::new(fresh).unwrap() })).collect();
        prop_assert_eq!(new.previous_assignment(), &expected[..]);
    }

    #[test]
    fn oracle_ambiguity_is_row_or_column_sum(prev in points(6), next in points(6), t in 1.0f64..15.0) {
        let p = DetectionSlice::new(0, prev.clone());
        let n = DetectionSlice::new(1, next.clone());
        let oracle = oracle_match(&p, &n, t).unwrap();
        let within = |a: &Point, b: &Point| ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt() <= t;
        let row_multi = prev.iter().any(|a| next.iter().filter(|b| within(a, b)).count() >= 2);
        let col_multi = next.iter().any(|b| prev.iter().filter(|a| within(a, b)).count() >= 2);
        prop_assert_eq!(oracle.ambiguous, row_multi || col_multi);
    }
}

fn scene(seed: u64, rate: f64) -> ScenarioConfig {
    ScenarioConfig {
        screen: (320.0, 240.0),
        n_slices: 150,
        arrival_rate: rate,
        speed_range: (0.5, 3.0),
        heading_jitter: 0.4,
        min_separation: 25.0,
        rng_seed: seed,
        jitter_sigma: 0.0,
        scripted: vec![],
    }
}

#[test]
fn error_free_whenever_occlusion_free() {
    let t = 3.0;
    let mut checked = 0;
    for seed in 0..60 {
        let (det, truth) = generate(&scene(seed, 0.08)).unwrap();
        if !occlusion_free(&truth, t) {
            continue;
        }
        checked += 1;
        for pol in [AmbiguityPolicy::FlagOnly, AmbiguityPolicy::NearestNeighborResolve] {
            let out = track(&det, &TrackerConfig::new(t).unwrap().with_policy(pol)).unwrap();
            assert!(out.events.is_empty(), "seed {seed}");
            // Tracker ids relate to true ids by a bijection, point for point.
            let mut tracker_to_true = std::collections::BTreeMap::new();
            for tr in &out.trajectories {
                for s in &tr.samples {
                    let k = det[s.slice_index].points.iter().position(|p| *p == s.point).unwrap();
                    let tid = truth.slices[s.slice_index][k].true_id;
                    assert_eq!(*tracker_to_true.entry(tr.object_id).or_insert(tid), tid, "seed {seed}");
                }
            }
            assert_eq!(tracker_to_true.len(), truth.tracks().len());
            let distinct: BTreeSet<_> = tracker_to_true.values().collect();
            assert_eq!(distinct.len(), tracker_to_true.len());
        }
    }
    assert!(checked >= 20, "only {checked} occlusion-free scenes");
}

#[test]
fn crossing_pair_separated_by_more_than_threshold() {
    use centrack_core::simulate::ScriptedObject;
    // Two objects on crossing diagonals, passing 20 px apart at closest.
    let cfg = ScenarioConfig {
        arrival_rate: 0.0,
        scripted: vec![
            ScriptedObject {
                start_slice: 0,
                x: 10.0,
                y: 10.0,
                vx: 2.0,
                vy: 2.0,
            },
            ScriptedObject {
                start_slice: 0,
                x: 30.0,
                y: 230.0,
                vx: 2.0,
                vy: -2.0,
            },
        ],
        n_slices: 100,
        ..scene(0, 0.0)
    };
    let (det, truth) = generate(&cfg).unwrap();
    assert!(occlusion_free(&truth, 3.0));
    let out = track(&det, &TrackerConfig::new(3.0).unwrap()).unwrap();
    assert_eq!(out.trajectories.len(), 2);
    let report = centrack_core::eval::evaluate(&out.trajectories, &truth, 1.5).unwrap();
    assert_eq!(report.id_switches, 0);
    assert!(report.is_perfect());
}
