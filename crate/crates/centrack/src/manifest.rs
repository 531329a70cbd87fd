use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::Error;

#[derive(Debug, Clone, Default, Serialize, PartialEq, Eq)]
pub struct Counts {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slices: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub occlusion_events: Option<usize>,
}

/// Record of one successful run. `parameters` holds values after defaults
/// were applied, so the run can be repeated from the manifest alone.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub parameters: serde_json::Value,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub counts: Counts,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn new(subcommand: &str, parameters: serde_json::Value) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_string(),
            parameters,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            counts: Counts::default(),
            wall_time_s: 0.0,
        }
    }

    pub fn input(&mut self, name: &str, path: &Path) -> &mut Self {
        self.inputs.insert(name.into(), path.display().to_string());
        self
    }

    pub fn output(&mut self, name: &str, path: &Path) -> &mut Self {
        self.outputs.insert(name.into(), path.display().to_string());
        self
    }

    pub fn finish(&mut self, started: Instant) {
        self.wall_time_s = started.elapsed().as_secs_f64();
    }

    /// Writes to `path`, or as one line to stderr when `path` is `None`.
    pub fn emit(&self, path: Option<&Path>) -> Result<(), Error> {
        match path {
            Some(p) => {
                let mut f = std::fs::File::create(p).map_err(Error::io(p))?;
                serde_json::to_writer_pretty(&mut f, self)?;
                f.write_all(b"\n").map_err(Error::io(p))
            }
            None => {
                eprintln!("{}", serde_json::to_string(self)?);
                Ok(())
            }
        }
    }
}
