use crate::Trajectory;

/// Fills in per-sample speed: distance to the following sample, scaled by
/// `fps` when given (pixels/second), otherwise pixels/slice. The final
/// sample gets no speed.
pub fn annotate_speed(traj: &Trajectory, fps: Option<f64>) -> Trajectory {
    let mut out = traj.clone();
    annotate_speed_in_place(&mut out, fps);
    out
}

pub(crate) fn annotate_speed_in_place(traj: &mut Trajectory, fps: Option<f64>) {
    let scale = fps.unwrap_or(1.0);
    let n = traj.samples.len();
    for k in 0..n {
        traj.samples[k].speed = if k + 1 < n {
            Some(traj.samples[k].point.distance(&traj.samples[k + 1].point) * scale)
        } else {
            None
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{ObjectId, Point, Sample};
    use alloc::vec;

    fn traj(points: &[(f64, f64)]) -> Trajectory {
        Trajectory {
            object_id: ObjectId::new(1).unwrap(),
            samples: points
                .iter()
                .enumerate()
                .map(|(s, &(x, y))| Sample {
                    slice_index: s,
                    point: Point::new(x, y),
                    speed: Some(-1.0),
                })
                .collect(),
        }
    }

    #[test]
    fn pixels_per_slice() {
        let t = annotate_speed(&traj(&[(0.0, 0.0), (3.0, 4.0)]), None);
        assert_eq!(t.samples[0].speed, Some(5.0));
        assert_eq!(t.samples[1].speed, None);
    }

    #[test]
    fn pixels_per_second() {
        let t = annotate_speed(&traj(&[(0.0, 0.0), (3.0, 4.0)]), Some(30.0));
        assert_eq!(t.samples[0].speed, Some(150.0));
    }

    #[test]
    fn single_sample_has_no_speed() {
        let t = annotate_speed(&traj(&[(1.0, 1.0)]), Some(30.0));
        assert_eq!(t.samples.iter().map(|s| s.speed).collect::<vec::Vec<_>>(), vec![None]);
    }
}
