//! Synthetic scenes with ground-truth identities.
//!
//! Objects enter at a screen edge (Poisson arrivals per slice), move in a
//! straight line at constant speed and vanish once they leave the screen.
//! Extra objects with fixed start and velocity can be scripted in, which is
//! how converging pairs are engineered.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::{DetectionSlice, Error, Point};

/// An object with a fixed entry slice, position and velocity (pixels/slice).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct ScriptedObject {
    pub start_slice: usize,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct ScenarioConfig {
    /// (width, height) in pixels; positions live in `[0, width) x [0, height)`.
    pub screen: (f64, f64),
    pub n_slices: usize,
    /// Expected new objects per slice.
    pub arrival_rate: f64,
    /// (min, max) speed in pixels/slice.
    pub speed_range: (f64, f64),
    /// Heading is perpendicular to the entry edge, plus a uniform offset in
    /// `[-heading_jitter, heading_jitter]` radians.
    pub heading_jitter: f64,
    /// Random arrivals closer than this to any live object are dropped.
    pub min_separation: f64,
    pub rng_seed: u64,
    /// Standard deviation of Gaussian noise added to detections (not truth).
    #[cfg_attr(feature = "serde", serde(default))]
    pub jitter_sigma: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub scripted: Vec<ScriptedObject>,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), Error> {
        let (w, h) = self.screen;
        if !(w.is_finite() && h.is_finite() && w > 0.0 && h > 0.0) {
            return Err(Error::InvalidScenario("screen must be positive and finite"));
        }
        if self.n_slices == 0 {
            return Err(Error::InvalidScenario("n_slices must be > 0"));
        }
        if !(self.arrival_rate.is_finite() && self.arrival_rate >= 0.0) {
            return Err(Error::InvalidScenario("arrival_rate must be finite and >= 0"));
        }
        let (lo, hi) = self.speed_range;
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo <= hi) {
            return Err(Error::InvalidScenario("speed_range must satisfy 0 <= min <= max"));
        }
        if !(self.heading_jitter >= 0.0 && self.heading_jitter < FRAC_PI_2) {
            return Err(Error::InvalidScenario("heading_jitter must lie in [0, pi/2)"));
        }
        if !(self.min_separation.is_finite() && self.min_separation >= 0.0) {
            return Err(Error::InvalidScenario("min_separation must be finite and >= 0"));
        }
        if !(self.jitter_sigma.is_finite() && self.jitter_sigma >= 0.0) {
            return Err(Error::InvalidScenario("jitter_sigma must be finite and >= 0"));
        }
        for o in &self.scripted {
            if !(o.vx.is_finite() && o.vy.is_finite()) {
                return Err(Error::InvalidScenario("scripted velocity must be finite"));
            }
            if !inside(o.x, o.y, w, h) {
                return Err(Error::InvalidScenario("scripted object must start on screen"));
            }
        }
        Ok(())
    }
}

fn inside(x: f64, y: f64, w: f64, h: f64) -> bool {
    (0.0..w).contains(&x) && (0.0..h).contains(&y)
}

/// A true position and the identity behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthPoint {
    pub point: Point,
    pub true_id: u64,
}

/// Ground truth: per slice, the true objects in detection order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundTruth {
    pub slices: Vec<Vec<TruthPoint>>,
}

impl GroundTruth {
    pub fn n_slices(&self) -> usize {
        self.slices.len()
    }

    /// Detections carrying the truth positions, without ids.
    pub fn detections(&self) -> Vec<DetectionSlice> {
        self.slices
            .iter()
            .enumerate()
            .map(|(s, pts)| DetectionSlice::new(s, pts.iter().map(|t| t.point).collect()))
            .collect()
    }

    /// Keeps only the objects for which `keep(true_id)` holds.
    pub fn restrict(&self, mut keep: impl FnMut(u64) -> bool) -> GroundTruth {
        GroundTruth {
            slices: self
                .slices
                .iter()
                .map(|pts| pts.iter().copied().filter(|t| keep(t.true_id)).collect())
                .collect(),
        }
    }

    /// Per true id, its `(slice, point)` observations in slice order.
    pub fn tracks(&self) -> BTreeMap<u64, Vec<(usize, Point)>> {
        let mut out: BTreeMap<u64, Vec<(usize, Point)>> = BTreeMap::new();
        for (s, pts) in self.slices.iter().enumerate() {
            for t in pts {
                out.entry(t.true_id).or_default().push((s, t.point));
            }
        }
        out
    }
}

struct Mover {
    id: u64,
    pos: Point,
    vel: (f64, f64),
}

/// Generates detections and their ground truth. A pure function of `config`.
pub fn generate(config: &ScenarioConfig) -> Result<(Vec<DetectionSlice>, GroundTruth), Error> {
    config.validate()?;
    let (w, h) = config.screen;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let arrivals = if config.arrival_rate > 0.0 {
        Some(Poisson::new(config.arrival_rate).map_err(|_| Error::InvalidScenario("arrival_rate out of range"))?)
    } else {
        None
    };
    let noise = if config.jitter_sigma > 0.0 {
        Some(Normal::new(0.0, config.jitter_sigma).map_err(|_| Error::InvalidScenario("bad jitter_sigma"))?)
    } else {
        None
    };

    let mut live: Vec<Mover> = Vec::new();
    let mut next_id = 1u64;
    let mut truth = GroundTruth::default();
    let mut detections = Vec::with_capacity(config.n_slices);

    for s in 0..config.n_slices {
        for o in config.scripted.iter().filter(|o| o.start_slice == s) {
            live.push(Mover {
                id: next_id,
                pos: Point::new(o.x, o.y),
                vel: (o.vx, o.vy),
            });
            next_id += 1;
        }

        let n_new = arrivals.as_ref().map_or(0, |p| p.sample(&mut rng) as usize);
        for _ in 0..n_new {
            let edge: u8 = rng.random_range(0..4);
            let (pos, base) = match edge {
                0 => (Point::new(0.0, rng.random_range(0.0..h)), 0.0),
                1 => (Point::new(last_pixel(w), rng.random_range(0.0..h)), PI),
                2 => (Point::new(rng.random_range(0.0..w), 0.0), FRAC_PI_2),
                _ => (Point::new(rng.random_range(0.0..w), last_pixel(h)), -FRAC_PI_2),
            };
            let (lo, hi) = config.speed_range;
            let speed = if hi > lo { rng.random_range(lo..=hi) } else { lo };
            let heading = if config.heading_jitter > 0.0 {
                base + rng.random_range(-config.heading_jitter..=config.heading_jitter)
            } else {
                base
            };
            let crowded = live.iter().any(|m| m.pos.distance(&pos) < config.min_separation);
            if crowded {
                continue;
            }
            live.push(Mover {
                id: next_id,
                pos,
                vel: (speed * libm::cos(heading), speed * libm::sin(heading)),
            });
            next_id += 1;
        }

        let mut here: Vec<TruthPoint> = live
            .iter()
            .map(|m| TruthPoint {
                point: m.pos,
                true_id: m.id,
            })
            .collect();
        here.shuffle(&mut rng);
        let points = here
            .iter()
            .map(|t| match &noise {
                Some(n) => Point::new(
                    (t.point.x + n.sample(&mut rng)).max(0.0),
                    (t.point.y + n.sample(&mut rng)).max(0.0),
                ),
                None => t.point,
            })
            .collect();
        detections.push(DetectionSlice::new(s, points));
        truth.slices.push(here);

        for m in live.iter_mut() {
            m.pos = Point::new(m.pos.x + m.vel.0, m.pos.y + m.vel.1);
        }
        live.retain(|m| inside(m.pos.x, m.pos.y, w, h));
    }
    Ok((detections, truth))
}

fn last_pixel(extent: f64) -> f64 {
    // Right/bottom entries start on the last pixel centre inside the screen.
    (libm::ceil(extent) - 1.0).max(0.0)
}

/// Why a scene is not occlusion-free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConflictKind {
    /// Two objects within the threshold of each other in one slice.
    Proximity,
    /// An object in slice `s` within the threshold of a different object in
    /// slice `s + 1`.
    CrossSlice,
    /// An object moved further than the threshold between two slices.
    Displacement,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conflict {
    pub slice_index: usize,
    pub kind: ConflictKind,
    /// For `CrossSlice`, `a` is in slice `s` and `b` in slice `s + 1`.
    /// For `Displacement`, `a == b`.
    pub a: u64,
    pub b: u64,
}

/// Every violation of the separation assumptions at threshold `threshold`.
/// `slice_index` is the later slice for cross-slice and displacement
/// conflicts.
pub fn conflicts(truth: &GroundTruth, threshold: f64) -> Vec<Conflict> {
    let mut out = Vec::new();
    for (s, pts) in truth.slices.iter().enumerate() {
        for (k, a) in pts.iter().enumerate() {
            for b in &pts[k + 1..] {
                if a.point.distance(&b.point) <= threshold {
                    out.push(Conflict {
                        slice_index: s,
                        kind: ConflictKind::Proximity,
                        a: a.true_id.min(b.true_id),
                        b: a.true_id.max(b.true_id),
                    });
                }
            }
        }
        if s == 0 {
            continue;
        }
        for a in &truth.slices[s - 1] {
            for b in pts {
                let d = a.point.distance(&b.point);
                if a.true_id == b.true_id {
                    if d > threshold {
                        out.push(Conflict {
                            slice_index: s,
                            kind: ConflictKind::Displacement,
                            a: a.true_id,
                            b: a.true_id,
                        });
                    }
                } else if d <= threshold {
                    out.push(Conflict {
                        slice_index: s,
                        kind: ConflictKind::CrossSlice,
                        a: a.true_id,
                        b: b.true_id,
                    });
                }
            }
        }
    }
    out
}

/// True when objects stay further apart than `threshold` (within a slice
/// and across consecutive slices) and each moves at most `threshold` per
/// slice. Under these conditions every object's row and column in the
/// binary distance matrix holds exactly its own match.
pub fn occlusion_free(truth: &GroundTruth, threshold: f64) -> bool {
    conflicts(truth, threshold).is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn base() -> ScenarioConfig {
        ScenarioConfig {
            screen: (100.0, 80.0),
            n_slices: 10,
            arrival_rate: 0.0,
            speed_range: (1.0, 3.0),
            heading_jitter: 0.3,
            min_separation: 10.0,
            rng_seed: 1,
            jitter_sigma: 0.0,
            scripted: vec![],
        }
    }

    #[test]
    fn no_arrivals_no_objects() {
        let (det, truth) = generate(&base()).unwrap();
        assert_eq!(det.len(), 10);
        assert!(det.iter().all(|d| d.is_empty()));
        assert!(occlusion_free(&truth, 5.0));
    }

    #[test]
    fn scripted_object_lives_fifty_slices() {
        let cfg = ScenarioConfig {
            n_slices: 80,
            scripted: vec![ScriptedObject {
                start_slice: 0,
                x: 0.0,
                y: 10.0,
                vx: 2.0,
                vy: 0.0,
            }],
            ..base()
        };
        let (det, truth) = generate(&cfg).unwrap();
        let present: Vec<usize> = det.iter().filter(|d| !d.is_empty()).map(|d| d.slice_index).collect();
        assert_eq!(present, (0..50).collect::<Vec<_>>());
        assert_eq!(truth.slices[49][0].point, Point::new(98.0, 10.0));
    }

    #[test]
    fn deterministic() {
        let cfg = ScenarioConfig {
            arrival_rate: 0.4,
            n_slices: 60,
            jitter_sigma: 0.2,
            ..base()
        };
        assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
        let other = ScenarioConfig {
            rng_seed: 2,
            ..cfg.clone()
        };
        assert_ne!(generate(&cfg).unwrap().1, generate(&other).unwrap().1);
    }

    #[test]
    fn detections_match_truth_without_noise() {
        let cfg = ScenarioConfig {
            arrival_rate: 0.5,
            n_slices: 40,
            ..base()
        };
        let (det, truth) = generate(&cfg).unwrap();
        assert_eq!(det, truth.detections());
        assert!(det.iter().any(|d| d.len() >= 2));
    }

    #[test]
    fn rejects_invalid_config() {
        assert!(generate(&ScenarioConfig { n_slices: 0, ..base() }).is_err());
        assert!(generate(&ScenarioConfig {
            speed_range: (3.0, 1.0),
            ..base()
        })
        .is_err());
        assert!(generate(&ScenarioConfig {
            speed_range: (-1.0, 1.0),
            ..base()
        })
        .is_err());
        assert!(generate(&ScenarioConfig {
            arrival_rate: -0.1,
            ..base()
        })
        .is_err());
        assert!(generate(&ScenarioConfig {
            heading_jitter: 2.0,
            ..base()
        })
        .is_err());
        let off = ScriptedObject {
            start_slice: 0,
            x: 100.0,
            y: 0.0,
            vx: 0.0,
            vy: 0.0,
        };
        assert!(generate(&ScenarioConfig {
            scripted: vec![off],
            ..base()
        })
        .is_err());
    }

    fn pinned(gap: f64) -> GroundTruth {
        let mk = |x: f64, id| TruthPoint {
            point: Point::new(x, 0.0),
            true_id: id,
        };
        GroundTruth {
            slices: vec![vec![mk(0.0, 1), mk(gap, 2)]; 3],
        }
    }

    #[test]
    fn proximity_violates() {
        assert!(!occlusion_free(&pinned(0.5 * 4.0), 4.0));
        assert!(occlusion_free(&pinned(10.0), 4.0));
        assert!(occlusion_free(&GroundTruth::default(), 4.0));
    }

    #[test]
    fn cross_slice_violates() {
        // 1.5 T apart in-slice, but object 2 lands within T of where 1 was.
        let mk = |x: f64, id| TruthPoint {
            point: Point::new(x, 0.0),
            true_id: id,
        };
        let truth = GroundTruth {
            slices: vec![vec![mk(0.0, 1), mk(6.0, 2)], vec![mk(0.0, 1), mk(3.5, 2)]],
        };
        let c = conflicts(&truth, 4.0);
        assert!(c
            .iter()
            .any(|c| c.kind == ConflictKind::CrossSlice && c.a == 1 && c.b == 2));
    }

    #[test]
    fn displacement_violates() {
        let mk = |x: f64| {
            vec![TruthPoint {
                point: Point::new(x, 0.0),
                true_id: 1,
            }]
        };
        let truth = GroundTruth {
            slices: vec![mk(0.0), mk(5.0)],
        };
        assert_eq!(conflicts(&truth, 4.0)[0].kind, ConflictKind::Displacement);
        assert!(occlusion_free(&truth, 5.0));
    }
}
