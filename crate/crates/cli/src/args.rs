//! Command-line surface.

use std::path::PathBuf;

use clap::Parser;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::manifest::{Mode, RunManifest};
use crate::modes::ModeOptions;

#[derive(Debug, Parser)]
#[command(name = "hmrf", version, about = "Hierarchical MRF segmentation and classification over frame sequences")]
pub struct Args {
    /// What to run.
    #[arg(value_enum)]
    pub mode: Mode,

    /// Frame files, directories or glob patterns, processed in file-name order.
    pub inputs: Vec<String>,

    /// Output directory, created if absent.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,

    /// Flat `key = value` configuration file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Hierarchy method: 1 (two lattice layers) or 2 (lattice plus segment graph).
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long = "beta1", alias = "beta-layer1")]
    pub beta1: Option<String>,
    #[arg(long = "beta2", alias = "beta-layer2")]
    pub beta2: Option<String>,
    /// ICM sweeps per layer.
    #[arg(long = "iters", alias = "iterations")]
    pub iters: Option<String>,
    /// Neighbors per node in the segment graph.
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long = "beta-u")]
    pub beta_u: Option<String>,
    /// Saturation cut, 0..=255 or `auto`.
    #[arg(long = "alpha-s")]
    pub alpha_s: Option<String>,
    /// Luminance cut, 0..=255 or `auto`.
    #[arg(long = "alpha-l")]
    pub alpha_l: Option<String>,
    #[arg(long = "open-radius")]
    pub open_radius: Option<String>,
    /// Evaluate every n-th frame.
    #[arg(long)]
    pub stride: Option<String>,
    /// Seed for fixture generation and synthetic bench frames.
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub threads: Option<String>,

    /// Trained classifier model (classify).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// CSV of `file,segment_id,label` rows to train the classifier from (classify).
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Directory of `*.truth.pgm` images (estimate); defaults to next to the data.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Weights to score: `start:stop:step` or a comma list (estimate).
    #[arg(long = "beta-grid")]
    pub beta_grid: Option<String>,
    /// Sweep budgets to score, comma separated (estimate).
    #[arg(long = "iter-grid")]
    pub iter_grid: Option<String>,
    /// Timed passes over the frame set (bench).
    #[arg(long, default_value_t = 10)]
    pub repeat: usize,
    /// Write the segment graph of Method II frames as edge lists.
    #[arg(long = "dump-graph")]
    pub dump_graph: bool,
    /// Fixture mode: write a noise-free `scene.ppm`.
    #[arg(long = "zero-noise")]
    pub zero_noise: bool,
}

/// Parses `start:stop:step` (inclusive) or `a,b,c`.
pub fn parse_beta_grid(text: &str) -> CliResult<Vec<f64>> {
    let bad = |msg: &str| CliError::Config(format!("beta grid {text:?}: {msg}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| bad(&e.to_string()));
    let grid: Vec<f64> = if let [start, stop, step] = text.split(':').collect::<Vec<_>>()[..] {
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if !(step > 0.0 && stop >= start) {
            return Err(bad("needs step > 0 and stop >= start"));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        // rounding keeps 0.1-step grids free of representation noise
        (0..=n).map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9).collect()
    } else {
        text.split(',').map(num).collect::<CliResult<_>>()?
    };
    if grid.is_empty() {
        return Err(bad("empty"));
    }
    Ok(grid)
}

pub fn parse_iter_grid(text: &str) -> CliResult<Vec<usize>> {
    text.split(',')
        .map(|s| s.trim().parse().map_err(|e| CliError::Config(format!("iteration grid {text:?}: {e}"))))
        .collect()
}

impl Args {
    /// Defaults, then the config file, then flags.
    pub fn run_config(&self) -> CliResult<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let flags = [
            ("method", &self.method),
            ("beta_layer1", &self.beta1),
            ("beta_layer2", &self.beta2),
            ("iterations", &self.iters),
            ("k", &self.k),
            ("beta_u", &self.beta_u),
            ("alpha_s", &self.alpha_s),
            ("alpha_l", &self.alpha_l),
            ("open_radius", &self.open_radius),
            ("stride", &self.stride),
            ("seed", &self.seed),
            ("threads", &self.threads),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn mode_options(&self) -> CliResult<ModeOptions> {
        Ok(ModeOptions {
            model: self.model.clone(),
            train: self.train.clone(),
            truth_dir: self.truth.clone(),
            beta_grid: self.beta_grid.as_deref().map(parse_beta_grid).transpose()?,
            iteration_grid: self.iter_grid.as_deref().map(parse_iter_grid).transpose()?,
            repeat: self.repeat,
            dump_graph: self.dump_graph,
            zero_noise: self.zero_noise,
        })
    }

    pub fn manifest(&self) -> CliResult<RunManifest> {
        RunManifest::new(self.mode, &self.inputs, self.config.clone(), self.out.clone())
    }
}
