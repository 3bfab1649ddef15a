use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

use crate::args::RunConfig;
use crate::error::CliError;

/// 17 significant digits: enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Minimal CSV builder; every cell is numeric or a plain identifier.
pub struct Csv {
    buf: String,
    width: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        Self {
            buf,
            width: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.width);
        self.buf.push_str(&cells.join(","));
        self.buf.push('\n');
    }

    pub fn floats(&mut self, values: &[f64]) {
        let cells: Vec<String> = values.iter().map(|&v| fmt_f64(v)).collect();
        self.row(&cells);
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// `<out>.meta.json` next to the artifact.
pub fn meta_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

#[derive(Serialize)]
struct Meta<'a> {
    version: &'static str,
    config: &'a RunConfig,
    wall_time_seconds: f64,
}

pub fn meta_json(cfg: &RunConfig, wall: Duration) -> String {
    to_json(&Meta {
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        wall_time_seconds: wall.as_secs_f64(),
    })
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Header `eps,lambda1,...,lambdam`.
pub fn sweep_header(m: usize) -> Vec<String> {
    std::iter::once("eps".to_string())
        .chain((1..=m).map(|i| format!("lambda{i}")))
        .collect()
}
