//! Smoothness-weight estimation against labeled images and the
//! weight-versus-sweeps study.
//!
//! Each candidate weight is scored by running ICM from the sign of the data
//! and measuring the mean disagreement with the truth labels. The per-image
//! best weights are averaged and snapped back onto the grid.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imgcore::BinaryMask;
use crate::mrf::{icm, DataField, LabelField, MrfParams};

/// Weight at which the stationarity check runs.
pub const STATIONARITY_BETA: f64 = 1.8;
/// Sweep cap for the stationarity check.
pub const STATIONARITY_CAP: usize = 20;

/// `0.0, 0.1, ..., 4.0`.
pub fn default_beta_grid() -> Vec<f64> {
    (0..=40).map(|i| f64::from(i) / 10.0).collect()
}

/// Mean over sites active in both fields of `((f - t) / 2)^2`, i.e. the
/// fraction of disagreeing sites.
pub fn neg_log_likelihood(result: &LabelField, truth: &LabelField) -> Result<f64> {
    Error::check_dims(truth.dims(), result.dims())?;
    let (mut n, mut disagree) = (0usize, 0usize);
    for (i, (a, b)) in result.labels().iter().zip(truth.labels()).enumerate() {
        if result.is_active_index(i) && truth.is_active_index(i) {
            n += 1;
            disagree += usize::from(a != b);
        }
    }
    Ok(if n == 0 { 0.0 } else { disagree as f64 / n as f64 })
}

/// One (image, weight, sweep budget) evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoreCell {
    pub image: usize,
    pub beta: f64,
    pub iterations: usize,
    pub score: f64,
    /// Flips in the last sweep actually executed (0 once stationary).
    pub last_sweep_flips: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimationReport {
    pub beta_grid: Vec<f64>,
    pub iteration_grid: Vec<usize>,
    /// Image-major, then weight, then sweep budget.
    pub cells: Vec<ScoreCell>,
    /// Per image, the best weight under the largest sweep budget.
    pub per_image_best: Vec<f64>,
    pub beta_star: f64,
    /// Sweeps needed to reach a zero-flip sweep at [`STATIONARITY_BETA`],
    /// per image; `None` if not reached within [`STATIONARITY_CAP`].
    pub stationary_after: Vec<Option<usize>>,
}

impl EstimationReport {
    pub fn image_count(&self) -> usize {
        self.per_image_best.len()
    }

    pub fn score(&self, image: usize, beta_index: usize, iteration_index: usize) -> f64 {
        let (nb, ni) = (self.beta_grid.len(), self.iteration_grid.len());
        self.cells[(image * nb + beta_index) * ni + iteration_index].score
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("image_id,beta,iterations,score,flips_at_stationarity\n");
        for c in &self.cells {
            let _ = writeln!(out, "{},{},{},{:.6},{}", c.image, c.beta, c.iterations, c.score, c.last_sweep_flips);
        }
        out
    }
}

fn initial_field(data: &DataField, truth: &LabelField) -> Result<LabelField> {
    let field = LabelField::from_data_sign(data);
    match truth.active_mask() {
        Some(bits) => field.with_active(&BinaryMask::from_bits(truth.width(), truth.height(), bits.to_vec())?),
        None => Ok(field),
    }
}

fn run_cell(pair: &(DataField, LabelField), beta: f64, iterations: usize) -> Result<(f64, usize)> {
    let (data, truth) = pair;
    let mut field = initial_field(data, truth)?;
    let flips = icm(&mut field, data, &MrfParams::new(beta, iterations)?)?;
    Ok((neg_log_likelihood(&field, truth)?, flips.last().copied().unwrap_or(0)))
}

/// Smallest-weight argmin; `scores` is parallel to `grid`.
fn best_beta(grid: &[f64], scores: impl Iterator<Item = f64>) -> f64 {
    let mut best = (f64::INFINITY, f64::INFINITY);
    for (&beta, score) in grid.iter().zip(scores) {
        if score < best.0 || (score == best.0 && beta < best.1) {
            best = (score, beta);
        }
    }
    best.1
}

fn snap(grid: &[f64], value: f64) -> f64 {
    let mut best = grid[0];
    for &g in grid {
        let (d, db) = ((g - value).abs(), (best - value).abs());
        if d < db || (d == db && g < best) {
            best = g;
        }
    }
    best
}

/// Full score matrix over both grids plus the per-image stationarity check.
pub fn sweep_report(
    pairs: &[(DataField, LabelField)],
    beta_grid: &[f64],
    iteration_grid: &[usize],
) -> Result<EstimationReport> {
    if pairs.is_empty() {
        return Err(Error::InvalidParameter("at least one labeled image is required".into()));
    }
    if beta_grid.is_empty() || iteration_grid.is_empty() {
        return Err(Error::InvalidParameter("weight and sweep grids must be non-empty".into()));
    }
    for &b in beta_grid {
        MrfParams::new(b, 1)?;
    }
    for (data, truth) in pairs {
        Error::check_dims(truth.dims(), data.dims())?;
    }

    let coords: Vec<(usize, f64, usize)> = (0..pairs.len())
        .flat_map(|i| beta_grid.iter().flat_map(move |&b| iteration_grid.iter().map(move |&n| (i, b, n))))
        .collect();
    let cells = coords
        .par_iter()
        .map(|&(image, beta, iterations)| {
            let (score, last_sweep_flips) = run_cell(&pairs[image], beta, iterations)?;
            Ok(ScoreCell { image, beta, iterations, score, last_sweep_flips })
        })
        .collect::<Result<Vec<_>>>()?;

    let deepest = (0..iteration_grid.len()).max_by_key(|&j| (iteration_grid[j], std::cmp::Reverse(j))).unwrap_or(0);
    let (nb, ni) = (beta_grid.len(), iteration_grid.len());
    let per_image_best: Vec<f64> = (0..pairs.len())
        .map(|i| best_beta(beta_grid, (0..nb).map(|b| cells[(i * nb + b) * ni + deepest].score)))
        .collect();
    let mut sorted = per_image_best.clone();
    sorted.sort_by(f64::total_cmp);
    let beta_star = snap(beta_grid, sorted.iter().sum::<f64>() / sorted.len() as f64);

    let stationary_after = pairs
        .par_iter()
        .map(|(data, truth)| {
            let mut field = initial_field(data, truth)?;
            let flips = icm(&mut field, data, &MrfParams::new(STATIONARITY_BETA, STATIONARITY_CAP)?)?;
            Ok(flips.iter().position(|&f| f == 0).map(|p| p + 1))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(EstimationReport {
        beta_grid: beta_grid.to_vec(),
        iteration_grid: iteration_grid.to_vec(),
        cells,
        per_image_best,
        beta_star,
        stationary_after,
    })
}

/// Per-image best weights at a fixed sweep budget and their snapped mean.
pub fn estimate_beta(pairs: &[(DataField, LabelField)], beta_grid: &[f64], iterations: usize) -> Result<EstimationReport> {
    sweep_report(pairs, beta_grid, &[iterations])
}
