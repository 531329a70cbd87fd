//! CSV files exchanged between the subcommands.
//!
//! Headers are checked exactly. Reported line numbers are 1-based and count
//! the header as line 1.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use centrack_core::simulate::{GroundTruth, TruthPoint};
use centrack_core::{DetectionSlice, ObjectId, Point, Sample, Trajectory};
use csv::StringRecord;

use crate::Error;

pub const DETECTIONS_HEADER: [&str; 3] = ["slice", "x", "y"];
pub const TRUTH_HEADER: [&str; 4] = ["slice", "x", "y", "true_id"];
pub const TRAJECTORIES_HEADER: [&str; 5] = ["object_id", "slice", "x", "y", "speed"];

fn reader<R: Read>(input: R, header: &[&str]) -> Result<csv::Reader<R>, Error> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let found = rdr.headers()?;
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::parse(
            1,
            format!(
                "expected header `{}`, found `{}`",
                header.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    Ok(rdr)
}

fn line_of(rec: &StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

fn field<T: std::str::FromStr>(rec: &StringRecord, k: usize, name: &str) -> Result<T, Error> {
    let raw = rec.get(k).unwrap_or("");
    raw.parse()
        .map_err(|_| Error::parse(line_of(rec), format!("{name}: cannot parse `{raw}`")))
}

fn point(rec: &StringRecord, kx: usize) -> Result<Point, Error> {
    let x: f64 = field(rec, kx, "x")?;
    let y: f64 = field(rec, kx + 1, "y")?;
    Point::try_new(x, y).map_err(|e| Error::parse(line_of(rec), e.to_string()))
}

fn records<R: Read>(rdr: &mut csv::Reader<R>) -> impl Iterator<Item = Result<StringRecord, Error>> + '_ {
    rdr.records().map(|r| {
        r.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::parse(line, e.to_string())
        })
    })
}

/// Groups rows into slices `0..=max_slice`; missing indices become empty
/// slices. Row order within a slice is preserved.
fn into_slices<T>(rows: Vec<(usize, T)>) -> Vec<Vec<T>> {
    let n = rows.iter().map(|r| r.0 + 1).max().unwrap_or(0);
    let mut out: Vec<Vec<T>> = (0..n).map(|_| Vec::new()).collect();
    for (s, v) in rows {
        out[s].push(v);
    }
    out
}

pub fn parse_detections<R: Read>(input: R) -> Result<Vec<DetectionSlice>, Error> {
    let mut rdr = reader(input, &DETECTIONS_HEADER)?;
    let mut rows = Vec::new();
    for rec in records(&mut rdr) {
        let rec = rec?;
        rows.push((field::<usize>(&rec, 0, "slice")?, point(&rec, 1)?));
    }
    Ok(into_slices(rows)
        .into_iter()
        .enumerate()
        .map(|(s, pts)| DetectionSlice::new(s, pts))
        .collect())
}

pub fn read_detections(path: &Path) -> Result<Vec<DetectionSlice>, Error> {
    parse_detections(File::open(path).map_err(Error::io(path))?)
}

pub fn write_detections_to<W: Write>(out: W, slices: &[DetectionSlice]) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DETECTIONS_HEADER)?;
    for s in slices {
        for p in &s.points {
            w.write_record([s.slice_index.to_string(), p.x.to_string(), p.y.to_string()])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_detections(path: &Path, slices: &[DetectionSlice]) -> Result<(), Error> {
    write_detections_to(File::create(path).map_err(Error::io(path))?, slices)
}

pub fn parse_ground_truth<R: Read>(input: R) -> Result<GroundTruth, Error> {
    let mut rdr = reader(input, &TRUTH_HEADER)?;
    let mut rows = Vec::new();
    for rec in records(&mut rdr) {
        let rec = rec?;
        let slice = field::<usize>(&rec, 0, "slice")?;
        let point = point(&rec, 1)?;
        let true_id = field::<u64>(&rec, 3, "true_id")?;
        rows.push((slice, TruthPoint { point, true_id }));
    }
    Ok(GroundTruth {
        slices: into_slices(rows),
    })
}

pub fn read_ground_truth(path: &Path) -> Result<GroundTruth, Error> {
    parse_ground_truth(File::open(path).map_err(Error::io(path))?)
}

pub fn write_ground_truth_to<W: Write>(out: W, truth: &GroundTruth) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRUTH_HEADER)?;
    for (s, pts) in truth.slices.iter().enumerate() {
        for t in pts {
            w.write_record([
                s.to_string(),
                t.point.x.to_string(),
                t.point.y.to_string(),
                t.true_id.to_string(),
            ])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_ground_truth(path: &Path, truth: &GroundTruth) -> Result<(), Error> {
    write_ground_truth_to(File::create(path).map_err(Error::io(path))?, truth)
}

/// Rows sorted by (object id, slice); the speed field of each object's last
/// sample is left empty.
pub fn write_trajectories_to<W: Write>(out: W, trajectories: &[Trajectory]) -> Result<(), Error> {
    let mut sorted: Vec<&Trajectory> = trajectories.iter().collect();
    sorted.sort_by_key(|t| t.object_id);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORIES_HEADER)?;
    for t in sorted {
        let mut samples: Vec<&Sample> = t.samples.iter().collect();
        samples.sort_by_key(|s| s.slice_index);
        for s in samples {
            w.write_record([
                t.object_id.to_string(),
                s.slice_index.to_string(),
                s.point.x.to_string(),
                s.point.y.to_string(),
                s.speed.map(|v| v.to_string()).unwrap_or_default(),
            ])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_trajectories(path: &Path, trajectories: &[Trajectory]) -> Result<(), Error> {
    write_trajectories_to(File::create(path).map_err(Error::io(path))?, trajectories)
}

pub fn parse_trajectories<R: Read>(input: R) -> Result<Vec<Trajectory>, Error> {
    let mut rdr = reader(input, &TRAJECTORIES_HEADER)?;
    let mut by_id: BTreeMap<ObjectId, Vec<Sample>> = BTreeMap::new();
    for rec in records(&mut rdr) {
        let rec = rec?;
        let raw_id: u64 = field(&rec, 0, "object_id")?;
        let id = ObjectId::new(raw_id).ok_or_else(|| Error::parse(line_of(&rec), "object_id must be positive"))?;
        let slice_index: usize = field(&rec, 1, "slice")?;
        let point = point(&rec, 2)?;
        let speed = match rec.get(4).unwrap_or("") {
            "" => None,
            _ => Some(field::<f64>(&rec, 4, "speed")?),
        };
        by_id.entry(id).or_default().push(Sample {
            slice_index,
            point,
            speed,
        });
    }
    Ok(by_id
        .into_iter()
        .map(|(object_id, mut samples)| {
            samples.sort_by_key(|s| s.slice_index);
            Trajectory { object_id, samples }
        })
        .collect())
}

pub fn read_trajectories(path: &Path) -> Result<Vec<Trajectory>, Error> {
    parse_trajectories(File::open(path).map_err(Error::io(path))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj(id: u64, pts: &[(usize, f64, f64, Option<f64>)]) -> Trajectory {
        Trajectory {
            object_id: ObjectId::new(id).unwrap(),
            samples: pts
                .iter()
                .map(|&(s, x, y, v)| Sample {
                    slice_index: s,
                    point: Point::new(x, y),
                    speed: v,
                })
                .collect(),
        }
    }

    fn to_string(t: &[Trajectory]) -> String {
        let mut buf = Vec::new();
        write_trajectories_to(&mut buf, t).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn two_slices_one_point_each() {
        let s = parse_detections("slice,x,y\n0,1.0,2.0\n1,1.5,2.0".as_bytes()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].points, vec![Point::new(1.0, 2.0)]);
        assert_eq!(s[1].points, vec![Point::new(1.5, 2.0)]);
    }

    #[test]
    fn gaps_become_empty_slices() {
        let s = parse_detections("slice,x,y\n0,1,1\n2,1,1\n".as_bytes()).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s[1].is_empty());
        assert_eq!(s[2].slice_index, 2);
    }

    #[test]
    fn unsorted_rows_keep_order_within_slice() {
        let s = parse_detections("slice,x,y\n1,9,9\n0,1,1\n1,3,3\n".as_bytes()).unwrap();
        assert_eq!(s[1].points, vec![Point::new(9.0, 9.0), Point::new(3.0, 3.0)]);
    }

    #[test]
    fn parse_error_names_line() {
        let e = parse_detections("slice,x,y\n0,a,1".as_bytes()).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
        let e = parse_detections("slice,x,y\n0,1,1\n-1,1,1\n".as_bytes()).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
        let e = parse_detections("slice,x,y\n0,1\n".as_bytes()).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
        let e = parse_detections("frame,x,y\n".as_bytes()).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }), "{e}");
        let e = parse_detections("slice,x,y\n0,NaN,1\n".as_bytes()).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
    }

    #[test]
    fn header_only_is_no_slices() {
        assert!(parse_detections("slice,x,y\n".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn trajectory_rows() {
        let out = to_string(&[traj(1, &[(0, 0.0, 0.0, Some(5.0)), (1, 3.0, 4.0, None)])]);
        assert_eq!(out, "object_id,slice,x,y,speed\n1,0,0,0,5\n1,1,3,4,\n");
    }

    #[test]
    fn empty_trajectory_list_is_header_only() {
        assert_eq!(to_string(&[]), "object_id,slice,x,y,speed\n");
    }

    #[test]
    fn trajectories_grouped_by_id() {
        let a = traj(2, &[(0, 1.0, 1.0, Some(1.0)), (1, 2.0, 1.0, None)]);
        let b = traj(1, &[(0, 5.0, 5.0, Some(1.0)), (1, 6.0, 5.0, None)]);
        let out = to_string(&[a.clone(), b.clone()]);
        let ids: Vec<&str> = out.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
        assert_eq!(ids, vec!["1", "1", "2", "2"]);
        assert_eq!(parse_trajectories(out.as_bytes()).unwrap(), vec![b, a]);
    }

    #[test]
    fn full_precision() {
        let x = 0.1 + 0.2;
        let mut buf = Vec::new();
        write_detections_to(&mut buf, &[DetectionSlice::new(0, vec![Point::new(x, 1.0 / 3.0)])]).unwrap();
        let back = parse_detections(&buf[..]).unwrap();
        assert_eq!(back[0].points[0], Point::new(x, 1.0 / 3.0));
    }

    #[test]
    fn truth_round_trip() {
        let truth = GroundTruth {
            slices: vec![
                vec![TruthPoint {
                    point: Point::new(1.25, 2.0),
                    true_id: 3,
                }],
                vec![],
                vec![
                    TruthPoint {
                        point: Point::new(2.0, 2.0),
                        true_id: 3,
                    },
                    TruthPoint {
                        point: Point::new(9.0, 0.0),
                        true_id: 4,
                    },
                ],
            ],
        };
        let mut buf = Vec::new();
        write_ground_truth_to(&mut buf, &truth).unwrap();
        assert!(buf.starts_with(b"slice,x,y,true_id\n"));
        assert_eq!(parse_ground_truth(&buf[..]).unwrap(), truth);
    }
}
