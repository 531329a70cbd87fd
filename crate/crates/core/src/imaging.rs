//! Detection front-end: background difference, binarization and particle
//! analysis (connected components with centroids).
//!
//! Pixel convention: `x` is the column, `y` the row, origin top-left, pixel
//! centres at integer coordinates.

use alloc::vec;
use alloc::vec::Vec;

use crate::{DetectionSlice, Error, Point};

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, Error> {
        check_dims(width, height, pixels.len())?;
        Ok(GrayImage { width, height, pixels })
    }

    /// Image filled with one intensity.
    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self, Error> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.pixels[y * self.width + x] = value;
    }

    fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }
}

/// Foreground mask, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    pixels: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, pixels: Vec<bool>) -> Result<Self, Error> {
        check_dims(width, height, pixels.len())?;
        Ok(BinaryImage { width, height, pixels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[bool] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.pixels[y * self.width + x]
    }

    pub fn count_ones(&self) -> usize {
        self.pixels.iter().filter(|p| **p).count()
    }
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<(), Error> {
    if width == 0 || height == 0 || width.checked_mul(height) != Some(len) {
        return Err(Error::InvalidImage { width, height, len });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Connectivity {
    /// Edge neighbours only.
    Four,
    /// Edge and corner neighbours.
    #[default]
    Eight,
}

impl Connectivity {
    pub fn neighbours(self) -> usize {
        match self {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }
}

/// Inclusive pixel bounds of a blob.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    pub min_x: usize,
    pub min_y: usize,
    pub max_x: usize,
    pub max_y: usize,
}

/// One connected foreground region.
#[derive(Debug, Clone, PartialEq)]
pub struct Blob {
    pub pixel_count: usize,
    /// Mean of member pixel coordinates.
    pub centroid: Point,
    pub bounding_box: BoundingBox,
}

/// Per-pixel `|frame - background|`.
pub fn background_difference(frame: &GrayImage, background: &GrayImage) -> Result<GrayImage, Error> {
    if frame.dims() != background.dims() {
        return Err(Error::ImageSizeMismatch {
            expected: background.dims(),
            found: frame.dims(),
        });
    }
    let pixels = frame
        .pixels
        .iter()
        .zip(&background.pixels)
        .map(|(f, b)| f.abs_diff(*b))
        .collect();
    Ok(GrayImage {
        width: frame.width,
        height: frame.height,
        pixels,
    })
}

/// Foreground where intensity `>= threshold`.
pub fn binarize(img: &GrayImage, threshold: u8) -> BinaryImage {
    BinaryImage {
        width: img.width,
        height: img.height,
        pixels: img.pixels.iter().map(|p| *p >= threshold).collect(),
    }
}

/// Per-pixel median over a stack of frames, usable as a background when no
/// empty frame is available. For an even count the lower median is taken.
pub fn median_background(frames: &[GrayImage]) -> Result<GrayImage, Error> {
    let first = frames.first().ok_or(Error::EmptyStack)?;
    for f in frames {
        if f.dims() != first.dims() {
            return Err(Error::ImageSizeMismatch {
                expected: first.dims(),
                found: f.dims(),
            });
        }
    }
    let mut column = Vec::with_capacity(frames.len());
    let pixels = (0..first.pixels.len())
        .map(|k| {
            column.clear();
            column.extend(frames.iter().map(|f| f.pixels[k]));
            column.sort_unstable();
            column[(column.len() - 1) / 2]
        })
        .collect();
    Ok(GrayImage {
        width: first.width,
        height: first.height,
        pixels,
    })
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn new() -> Self {
        // Slot 0 is the background label.
        DisjointSet { parent: vec![0] }
    }

    fn make(&mut self) -> u32 {
        let l = self.parent.len() as u32;
        self.parent.push(l);
        l
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let up = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = up;
            x = up;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) -> u32 {
        let (ra, rb) = (self.find(a), self.find(b));
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi as usize] = lo;
        lo
    }
}

/// Labels connected foreground regions. Background pixels get 0; regions
/// are numbered from 1 in raster order of their first pixel.
pub fn label_components(img: &BinaryImage, connectivity: Connectivity) -> Vec<u32> {
    let (w, h) = (img.width, img.height);
    let mut labels = vec![0u32; w * h];
    let mut sets = DisjointSet::new();

    // First pass: provisional labels from the already-visited neighbours
    // (left, and the row above).
    for y in 0..h {
        for x in 0..w {
            if !img.pixels[y * w + x] {
                continue;
            }
            let mut current = 0u32;
            let mut visit = |nx: usize, ny: usize, current: &mut u32| {
                let l = labels[ny * w + nx];
                if l != 0 {
                    *current = if *current == 0 { l } else { sets.union(*current, l) };
                }
            };
            if x > 0 {
                visit(x - 1, y, &mut current);
            }
            if y > 0 {
                visit(x, y - 1, &mut current);
                if connectivity == Connectivity::Eight {
                    if x > 0 {
                        visit(x - 1, y - 1, &mut current);
                    }
                    if x + 1 < w {
                        visit(x + 1, y - 1, &mut current);
                    }
                }
            }
            labels[y * w + x] = if current == 0 { sets.make() } else { current };
        }
    }

    // Second pass: resolve to roots and renumber densely in raster order.
    let mut dense = vec![0u32; sets.parent.len()];
    let mut next = 1u32;
    for l in labels.iter_mut() {
        if *l == 0 {
            continue;
        }
        let root = sets.find(*l) as usize;
        if dense[root] == 0 {
            dense[root] = next;
            next += 1;
        }
        *l = dense[root];
    }
    labels
}

/// Connected regions of foreground pixels with at least `min_area` pixels,
/// ordered by the top-left corner of their bounding box (row first), ties
/// broken by raster order of the first pixel.
pub fn connected_components(img: &BinaryImage, connectivity: Connectivity, min_area: usize) -> Vec<Blob> {
    struct Acc {
        count: usize,
        sum_x: u64,
        sum_y: u64,
        bbox: BoundingBox,
    }

    let w = img.width;
    let labels = label_components(img, connectivity);
    let mut accs: Vec<Acc> = Vec::new();
    for (k, &l) in labels.iter().enumerate() {
        if l == 0 {
            continue;
        }
        let (x, y) = (k % w, k / w);
        let idx = (l - 1) as usize;
        if idx == accs.len() {
            accs.push(Acc {
                count: 0,
                sum_x: 0,
                sum_y: 0,
                bbox: BoundingBox {
                    min_x: x,
                    min_y: y,
                    max_x: x,
                    max_y: y,
                },
            });
        }
        let a = &mut accs[idx];
        a.count += 1;
        a.sum_x += x as u64;
        a.sum_y += y as u64;
        a.bbox.min_x = a.bbox.min_x.min(x);
        a.bbox.min_y = a.bbox.min_y.min(y);
        a.bbox.max_x = a.bbox.max_x.max(x);
        a.bbox.max_y = a.bbox.max_y.max(y);
    }

    // accs is already in raster order of first pixel; a stable sort keeps
    // that as the tie-breaker.
    let mut blobs: Vec<Blob> = accs
        .into_iter()
        .filter(|a| a.count >= min_area.max(1))
        .map(|a| Blob {
            pixel_count: a.count,
            centroid: Point::new(a.sum_x as f64 / a.count as f64, a.sum_y as f64 / a.count as f64),
            bounding_box: a.bbox,
        })
        .collect();
    blobs.sort_by_key(|b| (b.bounding_box.min_y, b.bounding_box.min_x));
    blobs
}

/// Parameters of the detection chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DetectParams {
    pub threshold: u8,
    pub connectivity: Connectivity,
    pub min_area: usize,
}

impl DetectParams {
    /// Threshold 40, 8-connectivity, blobs of at least 4 pixels.
    pub const DEFAULT: DetectParams = DetectParams {
        threshold: 40,
        connectivity: Connectivity::Eight,
        min_area: 4,
    };
}

impl Default for DetectParams {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Points of one frame: difference, binarize, label, take blob centroids.
pub fn detect_frame(frame: &GrayImage, background: &GrayImage, params: &DetectParams) -> Result<Vec<Point>, Error> {
    let diff = background_difference(frame, background)?;
    let mask = binarize(&diff, params.threshold);
    Ok(connected_components(&mask, params.connectivity, params.min_area)
        .into_iter()
        .map(|b| b.centroid)
        .collect())
}

/// Runs [`detect_frame`] over a stack; slice `k` comes from `frames[k]`.
pub fn detect_stack(
    frames: &[GrayImage],
    background: &GrayImage,
    params: &DetectParams,
) -> Result<Vec<DetectionSlice>, Error> {
    frames
        .iter()
        .enumerate()
        .map(|(k, f)| detect_frame(f, background, params).map(|pts| DetectionSlice::new(k, pts)))
        .collect()
}
