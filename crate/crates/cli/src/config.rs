//! Run configuration: pipeline parameters plus driver settings.
//!
//! The file format is flat `key = value` text, one entry per line, with `#`
//! starting a comment. Keys are the [`PipelineConfig`] field names plus the
//! driver keys `stride`, `seed` and `threads`. The short flag spellings
//! (`beta1`, `iters`, ...) are accepted as aliases, with `-` and `_`
//! interchangeable.

use std::fmt::Write as _;
use std::path::Path;

use hmrf_core::fixture::DEFAULT_SEED;
use hmrf_core::pipeline::PipelineConfig;

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub pipeline: PipelineConfig,
    /// Only every `stride`-th input frame is evaluated.
    pub stride: usize,
    pub seed: u64,
    /// Worker threads; `None` uses one per core.
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { pipeline: PipelineConfig::default(), stride: 1, seed: DEFAULT_SEED, threads: None }
    }
}

fn canonical_key(key: &str) -> Option<&'static str> {
    let key = key.trim().trim_start_matches("--").replace('-', "_");
    Some(match key.as_str() {
        "method" => "method",
        "alpha_s" => "alpha_s",
        "alpha_l" => "alpha_l",
        "beta_layer1" | "beta1" => "beta_layer1",
        "beta_layer2" | "beta2" => "beta_layer2",
        "iterations" | "iters" => "iterations",
        "k" => "k",
        "beta_u" => "beta_u",
        "open_radius" => "open_radius",
        "stride" => "stride",
        "seed" => "seed",
        "threads" => "threads",
        _ => return None,
    })
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> CliResult<T>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse().map_err(|e| CliError::Config(format!("{key} = {value:?}: {e}")))
}

impl RunConfig {
    /// Sets one entry by (possibly aliased) name.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let name = canonical_key(key).ok_or_else(|| CliError::Config(format!("unknown key {key:?}")))?;
        let p = &mut self.pipeline;
        match name {
            "method" => p.method = parse(name, value)?,
            "alpha_s" => p.alpha_s = parse(name, value)?,
            "alpha_l" => p.alpha_l = parse(name, value)?,
            "beta_layer1" => p.beta_layer1 = parse(name, value)?,
            "beta_layer2" => p.beta_layer2 = parse(name, value)?,
            "iterations" => p.iterations = parse(name, value)?,
            "k" => p.k = parse(name, value)?,
            "beta_u" => p.beta_u = parse(name, value)?,
            "open_radius" => p.open_radius = parse(name, value)?,
            "stride" => self.stride = parse(name, value)?,
            "seed" => self.seed = parse(name, value)?,
            "threads" => self.threads = Some(parse(name, value)?),
            _ => unreachable!("canonical_key returned {name}"),
        }
        Ok(())
    }

    /// Applies every entry of a config file body on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> CliResult<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`, got {line:?}", n + 1)))?;
            self.set(key, value).map_err(|e| match e {
                CliError::Config(msg) => CliError::Config(format!("line {}: {msg}", n + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> CliResult<()> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.pipeline.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if self.stride == 0 {
            return Err(CliError::Config("stride must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(CliError::Config("threads must be at least 1".into()));
        }
        Ok(())
    }

    /// The configuration in the file format, readable by [`apply_text`](Self::apply_text).
    pub fn to_text(&self) -> String {
        let p = &self.pipeline;
        let mut out = String::new();
        let _ = writeln!(out, "method = {}", p.method);
        let _ = writeln!(out, "alpha_s = {}", p.alpha_s);
        let _ = writeln!(out, "alpha_l = {}", p.alpha_l);
        let _ = writeln!(out, "beta_layer1 = {}", p.beta_layer1);
        let _ = writeln!(out, "beta_layer2 = {}", p.beta_layer2);
        let _ = writeln!(out, "iterations = {}", p.iterations);
        let _ = writeln!(out, "k = {}", p.k);
        let _ = writeln!(out, "beta_u = {}", p.beta_u);
        let _ = writeln!(out, "open_radius = {}", p.open_radius);
        let _ = writeln!(out, "stride = {}", self.stride);
        let _ = writeln!(out, "seed = {}", self.seed);
        if let Some(t) = self.threads {
            let _ = writeln!(out, "threads = {t}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use hmrf_core::pipeline::{Method, ThresholdSpec};

    #[test]
    fn file_entries_and_aliases() {
        let mut cfg = RunConfig::default();
        cfg.apply_text("# comment\nmethod = 2\nbeta1 = 0.5  # trailing\nbeta-layer2=3\nalpha_s = 120\niters = 4\n\nstride = 50\n")
            .unwrap();
        assert_eq!(cfg.pipeline.method, Method::Two);
        assert_eq!(cfg.pipeline.beta_layer1, 0.5);
        assert_eq!(cfg.pipeline.beta_layer2, 3.0);
        assert_eq!(cfg.pipeline.alpha_s, ThresholdSpec::Fixed(120));
        assert_eq!(cfg.pipeline.alpha_l, ThresholdSpec::Auto);
        assert_eq!(cfg.pipeline.iterations, 4);
        assert_eq!(cfg.stride, 50);
    }

    #[test]
    fn text_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.set("k", "5").unwrap();
        cfg.set("threads", "3").unwrap();
        cfg.set("alpha_l", "90").unwrap();
        let mut back = RunConfig::default();
        back.apply_text(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_bad_entries() {
        let mut cfg = RunConfig::default();
        assert!(matches!(cfg.apply_text("bogus = 1"), Err(CliError::Config(_))));
        assert!(matches!(cfg.apply_text("k 3"), Err(CliError::Config(_))));
        assert!(matches!(cfg.set("alpha_s", "300"), Err(CliError::Config(_))));
        assert!(matches!(cfg.set("method", "3"), Err(CliError::Config(_))));
        cfg.set("stride", "0").unwrap();
        assert!(cfg.validate().is_err());
    }
}
