//! Timing summaries for bench mode.

use std::fmt::Write as _;

use hmrf_core::pipeline::{FrameResult, Method};
use serde::Serialize;

/// Frames per second reported for the original implementation on a 2.2 GHz
/// dual core at 160x120.
pub fn reference_fps(method: Method) -> f64 {
    match method {
        Method::One => 11.0,
        Method::Two => 6.0,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub samples: usize,
    pub mean_ms: f64,
    pub median_ms: f64,
    pub p95_ms: f64,
}

impl Summary {
    /// `None` for an empty sample. The median of an even sample is the mean
    /// of the two middle values; p95 is nearest-rank.
    pub fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 };
        let rank = ((0.95 * n as f64).ceil() as usize).clamp(1, n);
        Some(Summary { samples: n, mean_ms: v.iter().sum::<f64>() / n as f64, median_ms: median, p95_ms: v[rank - 1] })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StageSummary {
    pub stage: String,
    #[serde(flatten)]
    pub summary: Summary,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub method: String,
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub repeats: usize,
    pub iterations: usize,
    pub total: Summary,
    pub fps: f64,
    pub reference_fps: f64,
    pub stages: Vec<StageSummary>,
}

impl BenchReport {
    /// Aggregates timed runs. Stages keep their order of first appearance.
    pub fn from_runs(
        method: Method,
        dims: (usize, usize),
        frames: usize,
        repeats: usize,
        iterations: usize,
        runs: &[FrameResult],
    ) -> Option<BenchReport> {
        let totals: Vec<f64> = runs.iter().map(|r| r.total_time.as_secs_f64() * 1e3).collect();
        let total = Summary::of(&totals)?;
        let mut names: Vec<&'static str> = Vec::new();
        for r in runs {
            for s in &r.stage_times {
                if !names.contains(&s.stage) {
                    names.push(s.stage);
                }
            }
        }
        let stages = names
            .into_iter()
            .filter_map(|name| {
                let v: Vec<f64> =
                    runs.iter().flat_map(|r| r.stage_times.iter().filter(|s| s.stage == name).map(|s| s.millis())).collect();
                Summary::of(&v).map(|summary| StageSummary { stage: name.to_owned(), summary })
            })
            .collect();
        let fps = if total.mean_ms > 0.0 { 1e3 / total.mean_ms } else { f64::INFINITY };
        Some(BenchReport {
            method: method.to_string(),
            width: dims.0,
            height: dims.1,
            frames,
            repeats,
            iterations,
            total,
            fps,
            reference_fps: reference_fps(method),
            stages,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "method {} on {}x{}, {} frames x {} repeats, {} iterations per layer",
            self.method, self.width, self.height, self.frames, self.repeats, self.iterations
        );
        let _ = writeln!(out, "{:<12} {:>10} {:>10} {:>10}", "stage", "mean ms", "median ms", "p95 ms");
        for s in &self.stages {
            let m = &s.summary;
            let _ = writeln!(out, "{:<12} {:>10.3} {:>10.3} {:>10.3}", s.stage, m.mean_ms, m.median_ms, m.p95_ms);
        }
        let t = &self.total;
        let _ = writeln!(out, "{:<12} {:>10.3} {:>10.3} {:>10.3}", "total", t.mean_ms, t.median_ms, t.p95_ms);
        let _ = writeln!(out, "fps {:.1} (reference {} fps)", self.fps, self.reference_fps);
        out
    }
}
