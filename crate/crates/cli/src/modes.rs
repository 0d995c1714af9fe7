//! Mode drivers behind [`run`].

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use hmrf_core::classify::{classify, train, ClassLabel, ClassModel, Classification};
use hmrf_core::estimate::{default_beta_grid, sweep_report};
use hmrf_core::fixture::{
    generate_scene, generate_sequence, noise_field, synthetic_segments, NoisePattern, SceneObject, SCENE_HEIGHT,
    SCENE_WIDTH,
};
use hmrf_core::imgcore::RasterImage;
use hmrf_core::mrf::{DataField, LabelField};
use hmrf_core::pipeline::{run_frame, FrameResult};
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use crate::bench::BenchReport;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::frames::{
    data_to_gray, label_mask, load_data_field, load_frame, load_truth_field, save, truth_path_for,
};
use crate::manifest::{frame_stem, Mode, RunManifest};
use crate::records::{metrics_row, SegmentRecord, METRICS_HEADER};

/// Frames handed to the worker pool at once; results are written in order
/// after each batch.
const BATCH: usize = 64;

/// Frames generated for bench mode when no inputs are given.
pub const BENCH_SYNTHETIC_FRAMES: usize = 8;

/// Mode-specific settings that are not part of the pipeline configuration.
#[derive(Clone, Debug, Default)]
pub struct ModeOptions {
    /// Trained model to load (classify).
    pub model: Option<PathBuf>,
    /// Labeled-segment table to train from (classify).
    pub train: Option<PathBuf>,
    /// Directory holding truth images (estimate).
    pub truth_dir: Option<PathBuf>,
    pub beta_grid: Option<Vec<f64>>,
    pub iteration_grid: Option<Vec<usize>>,
    /// Timed passes over the frame set (bench).
    pub repeat: usize,
    /// Write the segment graph of every Method II frame.
    pub dump_graph: bool,
    /// Fixture mode writes the clean scene as `scene.ppm`.
    pub zero_noise: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunSummary {
    pub processed: usize,
    pub failed: usize,
    pub outputs: Vec<PathBuf>,
    pub message: String,
}

pub fn run(manifest: &RunManifest, cfg: &RunConfig, opts: &ModeOptions) -> CliResult<RunSummary> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    pool.install(|| match manifest.mode {
        Mode::Segment => segment(manifest, cfg, opts, None),
        Mode::Classify => {
            let model = load_or_train_model(manifest, cfg, opts)?;
            segment(manifest, cfg, opts, Some(&model))
        }
        Mode::Estimate => estimate(manifest, cfg, opts),
        Mode::Bench => bench(manifest, cfg, opts),
        Mode::Fixture => fixture(&manifest.out_dir, cfg.seed, opts.zero_noise).map(|outputs| RunSummary {
            processed: outputs.len(),
            message: format!("wrote {} fixture files", outputs.len()),
            outputs,
            ..RunSummary::default()
        }),
    })
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Inputs selected by the stride, with their position in the sorted list.
fn strided(manifest: &RunManifest, cfg: &RunConfig) -> Vec<(usize, PathBuf)> {
    manifest.inputs.iter().cloned().enumerate().step_by(cfg.stride).collect()
}

struct FrameOutput {
    path: PathBuf,
    dims: (usize, usize),
    result: FrameResult,
    classes: Option<Vec<Classification>>,
}

fn process_frame(index: usize, path: &Path, cfg: &RunConfig, model: Option<&ClassModel>) -> CliResult<FrameOutput> {
    let frame = load_frame(path)?;
    let result = run_frame(index, &frame, &cfg.pipeline).map_err(|e| CliError::io(path, e))?;
    let dims = frame.dims();
    let classes = model.map(|m| result.segments.iter().map(|s| classify(s, m, dims)).collect());
    Ok(FrameOutput { path: path.to_path_buf(), dims, result, classes })
}

fn segment(manifest: &RunManifest, cfg: &RunConfig, opts: &ModeOptions, model: Option<&ClassModel>) -> CliResult<RunSummary> {
    let out = &manifest.out_dir;
    let mask_dir = out.join("masks");
    std::fs::create_dir_all(&mask_dir).map_err(|e| CliError::io(&mask_dir, e))?;
    let graph_dir = out.join("graphs");
    if opts.dump_graph {
        std::fs::create_dir_all(&graph_dir).map_err(|e| CliError::io(&graph_dir, e))?;
    }
    let records_path = out.join("segments.jsonl");
    let metrics_path = out.join("metrics.csv");
    let mut records = create(&records_path)?;
    let mut metrics = csv::Writer::from_writer(create(&metrics_path)?);
    metrics.write_record(METRICS_HEADER).map_err(|e| CliError::io(&metrics_path, e))?;

    let mut summary = RunSummary { outputs: vec![records_path.clone(), metrics_path.clone()], ..RunSummary::default() };
    let frames = strided(manifest, cfg);
    for batch in frames.chunks(BATCH) {
        let results: Vec<_> = batch.par_iter().map(|(i, p)| process_frame(*i, p, cfg, model)).collect();
        for (res, (index, path)) in results.into_iter().zip(batch) {
            let fo = match res {
                Ok(fo) => fo,
                Err(e) => {
                    warn!("frame {index} ({}) skipped: {e}", path.display());
                    summary.failed += 1;
                    continue;
                }
            };
            let name = file_name(&fo.path);
            let stem = frame_stem(&fo.path);
            let mask_path = mask_dir.join(format!("{stem}.pgm"));
            save(&mask_path, &label_mask(fo.dims, &fo.result.segments))?;
            summary.outputs.push(mask_path);
            for (s, seg) in fo.result.segments.iter().enumerate() {
                let class = fo.classes.as_ref().map(|c| &c[s]);
                writeln!(records, "{}", SegmentRecord::new(*index, &name, seg, class).to_line())
                    .map_err(|e| CliError::io(&records_path, e))?;
            }
            metrics.write_record(metrics_row(&name, &fo.result)).map_err(|e| CliError::io(&metrics_path, e))?;
            if let (true, Some(graph)) = (opts.dump_graph, &fo.result.graph) {
                let graph_path = graph_dir.join(format!("{stem}.edges"));
                write_file(&graph_path, graph.to_edge_list())?;
                summary.outputs.push(graph_path);
            }
            info!("frame {index} ({name}): {} segments", fo.result.segments.len());
            summary.processed += 1;
        }
    }
    records.flush().map_err(|e| CliError::io(&records_path, e))?;
    metrics.flush().map_err(|e| CliError::io(&metrics_path, e))?;
    summary.message = format!("{} frames processed, {} failed", summary.processed, summary.failed);
    Ok(summary)
}

#[derive(serde::Deserialize)]
struct TrainRow {
    file: String,
    segment_id: usize,
    label: String,
}

/// Reads `file,segment_id,label` rows (paths relative to the table), runs the
/// configured pipeline on each listed frame and trains on the named segments.
pub fn train_from_table(table: &Path, cfg: &RunConfig) -> CliResult<ClassModel> {
    let base = table.parent().unwrap_or(Path::new("."));
    let mut reader = csv::Reader::from_path(table).map_err(|e| CliError::io(table, e))?;
    let mut by_file: BTreeMap<String, Vec<(usize, ClassLabel)>> = BTreeMap::new();
    for row in reader.deserialize::<TrainRow>() {
        let row = row.map_err(|e| CliError::Config(format!("{}: {e}", table.display())))?;
        let label: ClassLabel = row.label.parse().map_err(|e| CliError::Config(format!("{}: {e}", table.display())))?;
        by_file.entry(row.file).or_default().push((row.segment_id, label));
    }
    let mut examples = Vec::new();
    let mut dims = None;
    for (file, wanted) in by_file {
        let path = base.join(&file);
        let frame = load_frame(&path)?;
        if *dims.get_or_insert(frame.dims()) != frame.dims() {
            return Err(CliError::Config(format!("{file}: training frames must share one size")));
        }
        let result = run_frame(0, &frame, &cfg.pipeline).map_err(|e| CliError::io(&path, e))?;
        for (id, label) in wanted {
            let seg = result
                .segments
                .iter()
                .find(|s| s.id == id)
                .ok_or_else(|| CliError::Config(format!("{file}: no segment {id}")))?;
            examples.push((seg.clone(), label));
        }
    }
    let dims = dims.ok_or_else(|| CliError::Config(format!("{}: no training rows", table.display())))?;
    Ok(train(&examples, dims)?)
}

fn load_or_train_model(manifest: &RunManifest, cfg: &RunConfig, opts: &ModeOptions) -> CliResult<ClassModel> {
    match (&opts.model, &opts.train) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            ClassModel::from_text(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        }
        (None, Some(table)) => {
            let model = train_from_table(table, cfg)?;
            write_file(&manifest.out_dir.join("model.txt"), model.to_text())?;
            Ok(model)
        }
        (Some(_), Some(_)) => Err(CliError::Config("give either --model or --train, not both".into())),
        (None, None) => Err(CliError::Config("classify mode needs a trained model (--model or --train)".into())),
    }
}

#[derive(Serialize)]
struct ImageEstimate {
    image_id: usize,
    file: String,
    best_beta: f64,
    stationary_after: Option<usize>,
}

#[derive(Serialize)]
struct EstimateSummary {
    beta_star: f64,
    beta_grid: Vec<f64>,
    iteration_grid: Vec<usize>,
    images: Vec<ImageEstimate>,
}

fn load_pair(data_path: &Path, truth_dir: Option<&Path>) -> CliResult<(DataField, LabelField)> {
    let truth_path = truth_path_for(data_path, truth_dir).ok_or_else(|| CliError::io(data_path, "no truth pairing"))?;
    Ok((load_data_field(data_path)?, load_truth_field(&truth_path)?))
}

/// Calibration inputs are `*.data.pgm` files; anything else is ignored.
fn estimate(manifest: &RunManifest, cfg: &RunConfig, opts: &ModeOptions) -> CliResult<RunSummary> {
    let mut summary = RunSummary::default();
    let mut pairs = Vec::new();
    let mut files = Vec::new();
    for (index, path) in strided(manifest, cfg) {
        if !file_name(&path).ends_with(".data.pgm") {
            continue;
        }
        match load_pair(&path, opts.truth_dir.as_deref()) {
            Ok(pair) => {
                pairs.push(pair);
                files.push(file_name(&path));
            }
            Err(e) => {
                warn!("image {index} skipped: {e}");
                summary.failed += 1;
            }
        }
    }
    if pairs.is_empty() {
        return Err(CliError::Io("no usable calibration pairs (*.data.pgm with matching *.truth.pgm)".into()));
    }
    let beta_grid = opts.beta_grid.clone().unwrap_or_else(default_beta_grid);
    let iteration_grid = opts.iteration_grid.clone().unwrap_or_else(|| vec![cfg.pipeline.iterations]);
    let report = sweep_report(&pairs, &beta_grid, &iteration_grid)?;

    let csv_path = manifest.out_dir.join("estimation.csv");
    write_file(&csv_path, report.to_csv())?;
    let json_path = manifest.out_dir.join("estimation.json");
    let images = files
        .into_iter()
        .enumerate()
        .map(|(i, file)| ImageEstimate {
            image_id: i,
            file,
            best_beta: report.per_image_best[i],
            stationary_after: report.stationary_after[i],
        })
        .collect();
    let doc = EstimateSummary { beta_star: report.beta_star, beta_grid, iteration_grid, images };
    let json = serde_json::to_string_pretty(&doc).expect("summary always serializes");
    write_file(&json_path, json + "\n")?;

    summary.processed = pairs.len();
    summary.outputs = vec![csv_path, json_path];
    summary.message = format!("{} images, beta* = {}", pairs.len(), report.beta_star);
    Ok(summary)
}

/// Loads every selected frame first so that only the pipeline is timed.
fn bench(manifest: &RunManifest, cfg: &RunConfig, opts: &ModeOptions) -> CliResult<RunSummary> {
    let mut summary = RunSummary::default();
    let frames: Vec<RasterImage> = if manifest.inputs.is_empty() {
        generate_sequence(BENCH_SYNTHETIC_FRAMES, cfg.seed)
    } else {
        strided(manifest, cfg)
            .into_iter()
            .filter_map(|(i, p)| match load_frame(&p) {
                Ok(f) => Some(f),
                Err(e) => {
                    warn!("frame {i} skipped: {e}");
                    summary.failed += 1;
                    None
                }
            })
            .collect()
    };
    let dims = frames.first().map(RasterImage::dims).ok_or_else(|| CliError::Io("no frames to benchmark".into()))?;
    let repeats = opts.repeat.max(1);

    // one untimed pass to settle caches and allocator state
    for (i, f) in frames.iter().enumerate() {
        if let Err(e) = run_frame(i, f, &cfg.pipeline) {
            return Err(CliError::Config(format!("frame {i}: {e}")));
        }
    }
    let mut runs = Vec::with_capacity(frames.len() * repeats);
    for _ in 0..repeats {
        for (i, f) in frames.iter().enumerate() {
            runs.push(run_frame(i, f, &cfg.pipeline)?);
        }
    }
    let report = BenchReport::from_runs(cfg.pipeline.method, dims, frames.len(), repeats, cfg.pipeline.iterations, &runs)
        .ok_or_else(|| CliError::Io("no timed runs".into()))?;

    let json_path = manifest.out_dir.join("bench.json");
    write_file(&json_path, serde_json::to_string_pretty(&report).expect("report always serializes") + "\n")?;
    let text_path = manifest.out_dir.join("bench.txt");
    let text = report.to_text();
    write_file(&text_path, &text)?;
    print!("{text}");

    summary.processed = frames.len();
    summary.outputs = vec![json_path, text_path];
    summary.message = format!("{:.1} fps (reference {} fps)", report.fps, report.reference_fps);
    Ok(summary)
}

/// Object codes in `scene_truth.pgm`.
fn object_code(obj: SceneObject) -> u8 {
    match obj {
        SceneObject::Background => 0,
        SceneObject::LeftLane => 64,
        SceneObject::RightLane => 128,
        SceneObject::Barrel => 192,
        SceneObject::Noise => 255,
    }
}

/// Calibration fields written by [`fixture`]: name, size, flipped share,
/// layout.
pub const CALIBRATION_FIELDS: [(&str, usize, f64, NoisePattern); 5] = [
    ("noise_1pct", 64, 0.01, NoisePattern::Isolated),
    ("noise_10pct", 64, 0.10, NoisePattern::Random),
    ("calib_border_pairs", 48, 0.03, NoisePattern::BorderPairs),
    ("calib_clean", 48, 0.0, NoisePattern::Random),
    ("calib_isolated", 48, 0.02, NoisePattern::Isolated),
];

/// Segments per class used to train the bundled `model.txt`.
const FIXTURE_TRAINING_PER_CLASS: usize = 20;

/// Writes the synthetic suite and returns the written paths:
///
/// * `scene.ppm`: the barrel-and-lanes frame, noisy unless `zero_noise`
/// * `scene_clean.ppm`: the same geometry without noise
/// * `scene_truth.pgm`: object codes (background 0, left lane 64, right lane
///   128, barrel 192, noise 255) of `scene.ppm`
/// * `<name>.data.pgm` / `<name>.truth.pgm` for each calibration field
/// * `model.txt`: a classifier trained on synthetic segments for 160x120
pub fn fixture(out: &Path, seed: u64, zero_noise: bool) -> CliResult<Vec<PathBuf>> {
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut written = Vec::new();
    let mut put = |name: &str, img: &RasterImage| -> CliResult<()> {
        let path = out.join(name);
        save(&path, img)?;
        written.push(path);
        Ok(())
    };

    let scene = generate_scene(seed, !zero_noise);
    let clean = generate_scene(seed, false);
    put("scene.ppm", &scene.image)?;
    put("scene_clean.ppm", &clean.image)?;
    let codes = (0..SCENE_HEIGHT)
        .flat_map(|y| (0..SCENE_WIDTH).map(move |x| (x, y)))
        .map(|(x, y)| object_code(scene.truth(x, y)))
        .collect();
    put("scene_truth.pgm", &RasterImage::gray(SCENE_WIDTH, SCENE_HEIGHT, codes)?)?;

    for (i, (name, size, fraction, pattern)) in CALIBRATION_FIELDS.into_iter().enumerate() {
        let (data, truth) = noise_field(size, size, fraction, pattern, seed.wrapping_add(i as u64));
        put(&format!("{name}.data.pgm"), &data_to_gray(&data))?;
        put(&format!("{name}.truth.pgm"), &truth.to_gray())?;
    }

    let examples = synthetic_segments(FIXTURE_TRAINING_PER_CLASS, 0, seed, (SCENE_WIDTH, SCENE_HEIGHT));
    let model = train(&examples, (SCENE_WIDTH, SCENE_HEIGHT))?;
    let model_path = out.join("model.txt");
    write_file(&model_path, model.to_text())?;
    written.push(model_path);
    Ok(written)
}
