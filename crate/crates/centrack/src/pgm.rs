//! Portable graymap (PGM) reading and writing, P2 (ASCII) and P5 (binary),
//! maxval at most 255. Sample values are kept as stored; no rescaling to
//! 255 is applied.

use std::fs;
use std::path::Path;

use centrack_core::imaging::GrayImage;

use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmFormat {
    /// `P2`
    Ascii,
    /// `P5`
    Binary,
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.data.get(self.pos) {
            if b == b'#' {
                while self.data.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32, Error> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.data.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Pgm(if self.pos >= self.data.len() {
                format!("truncated: missing {what}")
            } else {
                format!("expected {what}")
            }));
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Pgm(format!("{what} out of range")))
    }
}

pub fn decode(data: &[u8]) -> Result<GrayImage, Error> {
    let format = match data.get(..2) {
        Some(b"P2") => PgmFormat::Ascii,
        Some(b"P5") => PgmFormat::Binary,
        Some(m) => {
            return Err(Error::Pgm(format!(
                "unsupported magic `{}`",
                String::from_utf8_lossy(m)
            )))
        }
        None => return Err(Error::Pgm("truncated: missing magic".into())),
    };
    let mut cur = Cursor { data, pos: 2 };
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let maxval = cur.number("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::Pgm(format!("maxval {maxval} not in 1..=255")));
    }
    if width == 0 || height == 0 {
        return Err(Error::Pgm(format!("empty image {width}x{height}")));
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| Error::Pgm("image too large".into()))?;

    let pixels = match format {
        PgmFormat::Binary => {
            // Exactly one whitespace byte separates maxval from the raster.
            if !data.get(cur.pos).is_some_and(u8::is_ascii_whitespace) {
                return Err(Error::Pgm("missing whitespace after maxval".into()));
            }
            let start = cur.pos + 1;
            let raster = data
                .get(start..start + n)
                .ok_or_else(|| Error::Pgm(format!("truncated: expected {n} bytes of pixel data")))?;
            raster.to_vec()
        }
        PgmFormat::Ascii => (0..n)
            .map(|_| cur.number("pixel value").map(|v| v.min(256) as u16))
            .collect::<Result<Vec<u16>, _>>()?
            .into_iter()
            .map(|v| u8::try_from(v).map_err(|_| Error::Pgm("pixel value exceeds 255".into())))
            .collect::<Result<_, _>>()?,
    };
    if let Some(v) = pixels.iter().find(|&&v| u32::from(v) > maxval) {
        return Err(Error::Pgm(format!("pixel value {v} exceeds maxval {maxval}")));
    }
    Ok(GrayImage::new(width, height, pixels)?)
}

pub fn encode(img: &GrayImage, format: PgmFormat) -> Vec<u8> {
    let (w, h) = (img.width(), img.height());
    match format {
        PgmFormat::Binary => {
            let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
            out.extend_from_slice(img.pixels());
            out
        }
        PgmFormat::Ascii => {
            let mut out = format!("P2\n{w} {h}\n255\n");
            for row in img.pixels().chunks(w) {
                let line: Vec<String> = row.iter().map(u8::to_string).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
            out.into_bytes()
        }
    }
}

pub fn read_pgm(path: &Path) -> Result<GrayImage, Error> {
    decode(&fs::read(path).map_err(Error::io(path))?)
}

/// Writes a binary (P5) PGM.
pub fn write_pgm(img: &GrayImage, path: &Path) -> Result<(), Error> {
    fs::write(path, encode(img, PgmFormat::Binary)).map_err(Error::io(path))
}
