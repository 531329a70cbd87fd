//! Frame stacks named by a printf-style pattern such as `frames/f_%04d.pgm`.

use std::fs;
use std::path::{Path, PathBuf};

use crate::Error;

/// Pattern split around its single `%d` / `%0Nd` placeholder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FramePattern {
    dir: PathBuf,
    prefix: String,
    suffix: String,
    width: Option<usize>,
}

impl FramePattern {
    /// The placeholder must appear exactly once, in the file-name part.
    pub fn parse(pattern: &str) -> Option<FramePattern> {
        let path = Path::new(pattern);
        let name = path.file_name()?.to_str()?;
        let dir = path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or(Path::new("."));
        if dir.to_string_lossy().contains('%') {
            return None;
        }
        let at = name.find('%')?;
        let rest = &name[at + 1..];
        let digits = rest.bytes().take_while(u8::is_ascii_digit).count();
        if rest.as_bytes().get(digits) != Some(&b'd') {
            return None;
        }
        let width = match &rest[..digits] {
            "" => None,
            w => Some(w.trim_start_matches('0').parse().unwrap_or(0)),
        };
        let suffix = &rest[digits + 1..];
        if suffix.contains('%') {
            return None;
        }
        Some(FramePattern {
            dir: dir.to_path_buf(),
            prefix: name[..at].to_string(),
            suffix: suffix.to_string(),
            width,
        })
    }

    /// Frame number encoded in `name`, if it fits the pattern.
    pub fn frame_number(&self, name: &str) -> Option<u64> {
        let mid = name.strip_prefix(&self.prefix)?.strip_suffix(&self.suffix)?;
        if mid.is_empty() || !mid.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        if let Some(w) = self.width {
            if mid.len() < w {
                return None;
            }
        }
        mid.parse().ok()
    }

    /// Matching files, in ascending frame-number order.
    pub fn resolve(&self) -> Result<Vec<PathBuf>, Error> {
        let mut found = Vec::new();
        for entry in fs::read_dir(&self.dir).map_err(Error::io(&self.dir))? {
            let entry = entry.map_err(Error::io(&self.dir))?;
            let name = entry.file_name();
            let Some(name) = name.to_str() else { continue };
            if let Some(n) = self.frame_number(name) {
                found.push((n, name.to_string(), entry.path()));
            }
        }
        found.sort();
        Ok(found.into_iter().map(|f| f.2).collect())
    }

    pub fn path_for(&self, frame: u64) -> PathBuf {
        let n = match self.width {
            Some(w) => format!("{frame:0w$}"),
            None => frame.to_string(),
        };
        self.dir.join(format!("{}{}{}", self.prefix, n, self.suffix))
    }
}
