use alloc::vec;
use alloc::vec::Vec;

use crate::{DetectionSlice, Error, Point};

/// Thresholded distance matrix between the points of slice `s` (rows) and
/// slice `s + 1` (columns). Raw Euclidean distances are kept alongside the
/// binary entries for nearest-neighbour refinement.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryDistanceMatrix {
    rows: usize,
    cols: usize,
    next_slice: usize,
    entries: Vec<bool>,
    distances: Vec<f64>,
}

impl BinaryDistanceMatrix {
    /// Builds the matrix for `prev -> next`. Distances equal to `threshold`
    /// count as matches.
    pub fn build(prev: &DetectionSlice, next: &DetectionSlice, threshold: f64) -> Result<Self, Error> {
        check_threshold(threshold)?;
        Ok(Self::build_points(
            &prev.points,
            &next.points,
            next.slice_index,
            threshold,
        ))
    }

    pub(crate) fn build_points(prev: &[Point], next: &[Point], next_slice: usize, threshold: f64) -> Self {
        let rows = prev.len();
        let cols = next.len();
        let mut entries = Vec::with_capacity(rows * cols);
        let mut distances = Vec::with_capacity(rows * cols);
        for p in prev {
            for n in next {
                let d = p.distance(n);
                distances.push(d);
                entries.push(d <= threshold);
            }
        }
        BinaryDistanceMatrix {
            rows,
            cols,
            next_slice,
            entries,
            distances,
        }
    }

    /// Builds a matrix from a row-major table of precomputed distances.
    ///
    /// # Panics
    ///
    /// If `distances.len() != rows * cols`, or any distance is negative or
    /// not finite.
    pub fn from_distances(
        rows: usize,
        cols: usize,
        distances: Vec<f64>,
        threshold: f64,
        next_slice: usize,
    ) -> Result<Self, Error> {
        check_threshold(threshold)?;
        assert_eq!(distances.len(), rows * cols, "distance table has wrong size");
        assert!(
            distances.iter().all(|d| d.is_finite() && *d >= 0.0),
            "distances must be finite and non-negative"
        );
        let entries = distances.iter().map(|d| *d <= threshold).collect();
        Ok(BinaryDistanceMatrix {
            rows,
            cols,
            next_slice,
            entries,
            distances,
        })
    }

    /// Number of points in the earlier slice.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of points in the later slice.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Slice index of the column points.
    pub fn next_slice(&self) -> usize {
        self.next_slice
    }

    pub fn entry(&self, row: usize, col: usize) -> bool {
        assert!(row < self.rows && col < self.cols);
        self.entries[row * self.cols + col]
    }

    pub fn distance(&self, row: usize, col: usize) -> f64 {
        assert!(row < self.rows && col < self.cols);
        self.distances[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[bool] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    pub fn row_sums(&self) -> Vec<usize> {
        if self.cols == 0 {
            return vec![0; self.rows];
        }
        self.entries
            .chunks_exact(self.cols)
            .map(|r| r.iter().filter(|e| **e).count())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<usize> {
        let mut sums = vec![0; self.cols];
        if self.cols == 0 {
            return sums;
        }
        for r in self.entries.chunks_exact(self.cols) {
            for (s, e) in sums.iter_mut().zip(r) {
                *s += usize::from(*e);
            }
        }
        sums
    }

    /// Keeps only the nearest candidate in each row that has several.
    /// Equal distances resolve to the lowest column. Rows with zero or one
    /// entry, and all raw distances, are left untouched.
    pub fn refine_nearest_neighbor(&self) -> Self {
        let mut out = self.clone();
        if self.cols == 0 {
            return out;
        }
        for (i, row) in out.entries.chunks_exact_mut(self.cols).enumerate() {
            if row.iter().filter(|e| **e).count() < 2 {
                continue;
            }
            let dist = &self.distances[i * self.cols..(i + 1) * self.cols];
            let mut best: Option<usize> = None;
            for (j, on) in row.iter().enumerate() {
                if *on && best.is_none_or(|b| dist[j] < dist[b]) {
                    best = Some(j);
                }
            }
            for (j, on) in row.iter_mut().enumerate() {
                *on = Some(j) == best;
            }
        }
        out
    }
}

fn check_threshold(threshold: f64) -> Result<(), Error> {
    if threshold.is_finite() && threshold > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidThreshold(threshold))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn slice(i: usize, pts: &[(f64, f64)]) -> DetectionSlice {
        DetectionSlice::new(i, pts.iter().map(|&(x, y)| Point::new(x, y)).collect())
    }

    fn entries(m: &BinaryDistanceMatrix) -> Vec<Vec<u8>> {
        (0..m.rows())
            .map(|i| m.row(i).iter().map(|e| u8::from(*e)).collect())
            .collect()
    }

    #[test]
    fn single_pair_within_and_beyond() {
        let m = BinaryDistanceMatrix::build(&slice(0, &[(0.0, 0.0)]), &slice(1, &[(1.0, 0.0)]), 2.0).unwrap();
        assert_eq!(entries(&m), vec![vec![1]]);
        let m = BinaryDistanceMatrix::build(&slice(0, &[(0.0, 0.0)]), &slice(1, &[(5.0, 0.0)]), 2.0).unwrap();
        assert_eq!(entries(&m), vec![vec![0]]);
    }

    #[test]
    fn two_by_two() {
        // pairwise distances: (0,0)-(1,0)=1, (0,0)-(9,0)=9, (10,0)-(1,0)=9, (10,0)-(9,0)=1
        let m = BinaryDistanceMatrix::build(
            &slice(0, &[(0.0, 0.0), (10.0, 0.0)]),
            &slice(1, &[(1.0, 0.0), (9.0, 0.0)]),
            3.0,
        )
        .unwrap();
        assert_eq!(entries(&m), vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(m.distance(0, 1), 9.0);
    }

    #[test]
    fn boundary_distance_is_a_match() {
        let m = BinaryDistanceMatrix::build(&slice(0, &[(0.0, 0.0)]), &slice(1, &[(3.0, 4.0)]), 5.0).unwrap();
        assert!(m.entry(0, 0));
    }

    #[test]
    fn empty_slices_give_degenerate_shapes() {
        let m = BinaryDistanceMatrix::build(&slice(0, &[]), &slice(1, &[(1.0, 1.0)]), 1.0).unwrap();
        assert_eq!((m.rows(), m.cols()), (0, 1));
        assert_eq!(m.col_sums(), vec![0]);
        let m = BinaryDistanceMatrix::build(&slice(0, &[(1.0, 1.0)]), &slice(1, &[]), 1.0).unwrap();
        assert_eq!((m.rows(), m.cols()), (1, 0));
        assert_eq!(m.row_sums(), vec![0]);
        assert_eq!(m.refine_nearest_neighbor(), m);
    }

    #[test]
    fn rejects_bad_threshold() {
        let e = BinaryDistanceMatrix::build(&slice(0, &[]), &slice(1, &[]), 0.0);
        assert_eq!(e, Err(Error::InvalidThreshold(0.0)));
    }

    #[test]
    fn refine_keeps_row_minimum() {
        let m = BinaryDistanceMatrix::from_distances(1, 2, vec![2.0, 1.0], 2.0, 1).unwrap();
        assert_eq!(entries(&m), vec![vec![1, 1]]);
        let r = m.refine_nearest_neighbor();
        assert_eq!(entries(&r), vec![vec![0, 1]]);
        assert_eq!(r.distance(0, 0), 2.0);
    }

    #[test]
    fn refine_tie_goes_to_lowest_column() {
        let m = BinaryDistanceMatrix::from_distances(1, 2, vec![1.5, 1.5], 2.0, 1).unwrap();
        assert_eq!(entries(&m.refine_nearest_neighbor()), vec![vec![1, 0]]);
    }

    #[test]
    fn refine_leaves_unique_rows() {
        let m = BinaryDistanceMatrix::from_distances(2, 2, vec![1.0, 9.0, 9.0, 1.0], 3.0, 1).unwrap();
        assert_eq!(m.refine_nearest_neighbor(), m);
    }

    #[test]
    fn sums() {
        let m = BinaryDistanceMatrix::from_distances(2, 3, vec![1.0, 1.0, 5.0, 5.0, 1.0, 5.0], 2.0, 1).unwrap();
        assert_eq!(m.row_sums(), vec![2, 1]);
        assert_eq!(m.col_sums(), vec![1, 2, 0]);
    }
}
