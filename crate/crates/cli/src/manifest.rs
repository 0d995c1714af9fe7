use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Per-frame masks and segment records.
    Segment,
    /// Segment, then label every segment with the decision tree.
    Classify,
    /// Weight estimation against labeled calibration images.
    Estimate,
    /// Pipeline timing with frames preloaded.
    Bench,
    /// Write the synthetic test suite.
    Fixture,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Segment => "segment",
            Mode::Classify => "classify",
            Mode::Estimate => "estimate",
            Mode::Bench => "bench",
            Mode::Fixture => "fixture",
        })
    }
}

const FRAME_EXTENSIONS: &[&str] = &["pgm", "ppm", "pnm", "png"];

#[derive(Clone, Debug, PartialEq)]
pub struct RunManifest {
    pub mode: Mode,
    /// Resolved frame files, ordered by file name.
    pub inputs: Vec<PathBuf>,
    pub config_path: Option<PathBuf>,
    pub out_dir: PathBuf,
}

impl RunManifest {
    /// Resolves every input pattern up front and creates the output directory.
    pub fn new(mode: Mode, patterns: &[String], config_path: Option<PathBuf>, out_dir: PathBuf) -> CliResult<Self> {
        if let Some(path) = &config_path {
            if !path.is_file() {
                return Err(CliError::io(path, "config file not found"));
            }
        }
        let inputs = resolve_inputs(patterns)?;
        if inputs.is_empty() && matches!(mode, Mode::Segment | Mode::Classify | Mode::Estimate) {
            return Err(CliError::Config(format!("{mode} mode needs at least one input frame")));
        }
        std::fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
        Ok(RunManifest { mode, inputs, config_path, out_dir })
    }
}

fn is_frame_file(path: &Path) -> bool {
    path.is_file()
        && path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| FRAME_EXTENSIONS.iter().any(|f| f.eq_ignore_ascii_case(e)))
}

/// Expands directories (their frame files, non-recursively), glob patterns
/// and plain paths. The combined list is sorted by file name, then by full
/// path, with duplicates removed.
pub fn resolve_inputs(patterns: &[String]) -> CliResult<Vec<PathBuf>> {
    let mut out = Vec::new();
    for pattern in patterns {
        let path = Path::new(pattern);
        if path.is_dir() {
            let entries = std::fs::read_dir(path).map_err(|e| CliError::io(path, e))?;
            for entry in entries {
                let p = entry.map_err(|e| CliError::io(path, e))?.path();
                if is_frame_file(&p) {
                    out.push(p);
                }
            }
        } else if pattern.contains(['*', '?', '[']) {
            let paths = glob::glob(pattern).map_err(|e| CliError::Config(format!("bad pattern {pattern:?}: {e}")))?;
            let before = out.len();
            for p in paths {
                let p = p.map_err(|e| CliError::Io(e.to_string()))?;
                if p.is_file() {
                    out.push(p);
                }
            }
            if out.len() == before {
                return Err(CliError::io(path, "pattern matched no files"));
            }
        } else if path.is_file() {
            out.push(path.to_path_buf());
        } else {
            return Err(CliError::io(path, "no such file or directory"));
        }
    }
    out.sort_by(|a, b| a.file_name().cmp(&b.file_name()).then_with(|| a.cmp(b)));
    out.dedup();
    Ok(out)
}

/// File stem used to name per-frame outputs.
pub fn frame_stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "frame".into())
}
