//! End-to-end per-frame segmentation for both hierarchy methods.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::imgcore::{
    connected_components, histogram, hybrid_channel, morphological_open, otsu_threshold, rgb_to_hsl_planes,
    BinaryMask, Channels, RasterImage, Segment, Threshold,
};
use crate::mrf::{icm, total_energy, DataField, Label, LabelField, MrfParams};
use crate::segraph::{build_knn_graph, graph_energy, icm_graph, merge_segments, SegmentGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    /// Two lattice layers: binary denoising, then a class bit from grayscale.
    One,
    /// One lattice layer followed by a segment-graph layer.
    Two,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::One => "1",
            Method::Two => "2",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" | "I" | "one" => Ok(Method::One),
            "2" | "II" | "two" => Ok(Method::Two),
            other => Err(Error::InvalidParameter(format!("method must be 1 or 2, got {other:?}"))),
        }
    }
}

/// A fixed intensity cut or one derived from the frame's histogram.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ThresholdSpec {
    #[default]
    Auto,
    Fixed(u8),
}

impl fmt::Display for ThresholdSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdSpec::Auto => f.write_str("auto"),
            ThresholdSpec::Fixed(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for ThresholdSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(ThresholdSpec::Auto);
        }
        s.parse()
            .map(ThresholdSpec::Fixed)
            .map_err(|_| Error::InvalidParameter(format!("threshold must be 0..=255 or auto, got {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub method: Method,
    /// Saturation cut.
    pub alpha_s: ThresholdSpec,
    /// Luminance below which a pixel counts as dark foreground.
    pub alpha_l: ThresholdSpec,
    pub beta_layer1: f64,
    pub beta_layer2: f64,
    /// ICM sweeps per lattice layer and for the graph layer.
    pub iterations: usize,
    pub k: usize,
    pub beta_u: f64,
    pub open_radius: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            method: Method::One,
            alpha_s: ThresholdSpec::Auto,
            alpha_l: ThresholdSpec::Auto,
            beta_layer1: 1.8,
            beta_layer2: 1.8,
            iterations: 2,
            k: 3,
            beta_u: 0.02,
            open_radius: 1,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.layer1_params()?;
        self.layer2_params()?;
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if !(self.beta_u.is_finite() && self.beta_u >= 0.0) {
            return Err(Error::InvalidParameter(format!("beta_u must be finite and >= 0, got {}", self.beta_u)));
        }
        if self.open_radius == 0 {
            return Err(Error::InvalidParameter("open_radius must be at least 1".into()));
        }
        Ok(())
    }

    fn layer1_params(&self) -> Result<MrfParams> {
        MrfParams::new(self.beta_layer1, self.iterations)
    }

    fn layer2_params(&self) -> Result<MrfParams> {
        MrfParams::new(self.beta_layer2, self.iterations)
    }
}

#[derive(Clone, Debug)]
pub struct Preprocessed {
    pub mask: BinaryMask,
    pub luminance: RasterImage,
    pub alpha_s: u8,
    pub alpha_l: u8,
}

/// HSL planes, thresholds, hybrid foreground channel and binary opening.
pub fn preprocess(frame: &RasterImage, cfg: &PipelineConfig) -> Result<Preprocessed> {
    frame.require(Channels::Rgb)?;
    let (sat, lum) = rgb_to_hsl_planes(frame)?;
    let alpha_s = match cfg.alpha_s {
        ThresholdSpec::Fixed(v) => v,
        // a flat saturation plane has nothing to separate: nothing passes
        ThresholdSpec::Auto => match otsu_threshold(&histogram(&sat)?) {
            Threshold { value, degenerate: true } => value.saturating_add(1),
            Threshold { value, .. } => value,
        },
    };
    let alpha_l = match cfg.alpha_l {
        ThresholdSpec::Fixed(v) => v,
        ThresholdSpec::Auto => otsu_threshold(&histogram(&lum)?).value,
    };
    let hybrid = hybrid_channel(&sat, &lum, alpha_s, alpha_l)?;
    let mask = morphological_open(&hybrid, cfg.open_radius)?;
    Ok(Preprocessed { mask, luminance: lum, alpha_s, alpha_l })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StageTime {
    pub stage: &'static str,
    pub duration: Duration,
}

impl StageTime {
    pub fn millis(&self) -> f64 {
        self.duration.as_secs_f64() * 1e3
    }
}

/// Back-to-back laps, so the laps always sum to the total.
struct Stopwatch {
    start: Instant,
    last: Instant,
    laps: Vec<StageTime>,
}

impl Stopwatch {
    fn start() -> Self {
        let now = Instant::now();
        Stopwatch { start: now, last: now, laps: Vec::new() }
    }

    fn lap(&mut self, stage: &'static str) {
        let now = Instant::now();
        self.laps.push(StageTime { stage, duration: now - self.last });
        self.last = now;
    }

    fn finish(self) -> (Vec<StageTime>, Duration) {
        (self.laps, self.last - self.start)
    }
}

#[derive(Clone, Debug)]
pub struct FrameResult {
    pub frame_index: usize,
    pub method: Method,
    pub foreground_mask: BinaryMask,
    /// Foreground segments; each carries the class bit as its label.
    pub segments: Vec<Segment>,
    pub stage_times: Vec<StageTime>,
    pub total_time: Duration,
    /// Final energy of each optimized layer, in execution order.
    pub energies: Vec<(&'static str, f64)>,
    /// Segments produced by the lattice layer before any graph merging.
    pub layer1_segment_count: usize,
    pub graph: Option<SegmentGraph>,
    pub alpha_s: u8,
    pub alpha_l: u8,
}

pub fn run_frame(frame_index: usize, frame: &RasterImage, cfg: &PipelineConfig) -> Result<FrameResult> {
    match cfg.method {
        Method::One => run_method1(frame_index, frame, cfg),
        Method::Two => run_method2(frame_index, frame, cfg),
    }
}

struct Builder {
    frame_index: usize,
    method: Method,
    watch: Stopwatch,
    pre: Preprocessed,
    energies: Vec<(&'static str, f64)>,
}

impl Builder {
    fn new(frame_index: usize, method: Method, frame: &RasterImage, cfg: &PipelineConfig) -> Result<Builder> {
        cfg.validate()?;
        let mut watch = Stopwatch::start();
        let pre = preprocess(frame, cfg)?;
        watch.lap("preprocess");
        Ok(Builder { frame_index, method, watch, pre, energies: Vec::new() })
    }

    fn finish(
        self,
        foreground_mask: BinaryMask,
        segments: Vec<Segment>,
        layer1_segment_count: usize,
        graph: Option<SegmentGraph>,
    ) -> FrameResult {
        let (stage_times, total_time) = self.watch.finish();
        FrameResult {
            frame_index: self.frame_index,
            method: self.method,
            foreground_mask,
            segments,
            stage_times,
            total_time,
            energies: self.energies,
            layer1_segment_count,
            graph,
            alpha_s: self.pre.alpha_s,
            alpha_l: self.pre.alpha_l,
        }
    }

    fn empty(self) -> FrameResult {
        let mask = self.pre.mask.clone();
        self.finish(mask, Vec::new(), 0, None)
    }
}

/// Binary lattice layer over the whole frame, seeded from the mask.
fn denoise_mask(mask: &BinaryMask, params: &MrfParams) -> Result<(BinaryMask, f64)> {
    let data = DataField::from_mask(mask);
    let mut field = LabelField::from_mask(mask);
    icm(&mut field, &data, params)?;
    let energy = total_energy(&field, &data, params)?;
    Ok((field.plus_mask(), energy))
}

/// Grayscale lattice layer restricted to `active`, started from the data sign.
fn label_foreground(lum: &RasterImage, active: &BinaryMask, params: &MrfParams) -> Result<(LabelField, DataField, f64)> {
    let data = DataField::from_gray(lum)?;
    let mut field = LabelField::from_data_sign(&data).with_active(active)?;
    icm(&mut field, &data, params)?;
    let energy = total_energy(&field, &data, params)?;
    Ok((field, data, energy))
}

/// Fully structured hierarchy.
pub fn run_method1(frame_index: usize, frame: &RasterImage, cfg: &PipelineConfig) -> Result<FrameResult> {
    let mut b = Builder::new(frame_index, Method::One, frame, cfg)?;
    if b.pre.mask.is_empty() {
        return Ok(b.empty());
    }
    let (foreground, e1) = denoise_mask(&b.pre.mask, &cfg.layer1_params()?)?;
    b.energies.push(("layer1", e1));
    b.watch.lap("layer1");
    if foreground.is_empty() {
        return Ok(b.finish(foreground, Vec::new(), 0, None));
    }
    let (field, _, e2) = label_foreground(&b.pre.luminance, &foreground, &cfg.layer2_params()?)?;
    b.energies.push(("layer2", e2));
    b.watch.lap("layer2");
    let segments = connected_components(&field);
    b.watch.lap("components");
    let n = segments.len();
    Ok(b.finish(foreground, segments, n, None))
}

/// Partially structured hierarchy.
pub fn run_method2(frame_index: usize, frame: &RasterImage, cfg: &PipelineConfig) -> Result<FrameResult> {
    let mut b = Builder::new(frame_index, Method::Two, frame, cfg)?;
    if b.pre.mask.is_empty() {
        return Ok(b.empty());
    }
    let foreground = b.pre.mask.clone();
    let (field, data, e1) = label_foreground(&b.pre.luminance, &foreground, &cfg.layer1_params()?)?;
    b.energies.push(("layer1", e1));
    b.watch.lap("layer1");
    let segments = connected_components(&field);
    b.watch.lap("components");
    let layer1_count = segments.len();
    if layer1_count < 2 {
        return Ok(b.finish(foreground, segments, layer1_count, None));
    }
    let mut graph = build_knn_graph(&segments, &data, cfg.k)?;
    icm_graph(&mut graph, cfg.beta_u, cfg.iterations)?;
    b.energies.push(("graph", graph_energy(&graph, cfg.beta_u)));
    let merged = merge_segments(&graph, &segments)?;
    b.watch.lap("graph");
    Ok(b.finish(foreground, merged, layer1_count, Some(graph)))
}

/// Components of the denoised foreground alone, without any class layer.
pub fn single_layer_segments(frame: &RasterImage, cfg: &PipelineConfig) -> Result<Vec<Segment>> {
    cfg.validate()?;
    let pre = preprocess(frame, cfg)?;
    let (foreground, _) = denoise_mask(&pre.mask, &cfg.layer1_params()?)?;
    let (w, h) = foreground.dims();
    let field = LabelField::uniform(w, h, Label::Plus).with_active(&foreground)?;
    Ok(connected_components(&field))
}
