//! Line-delimited segment records and the per-frame metrics table.
//!
//! `segments.jsonl` holds one JSON object per segment with fields in this
//! order: `frame_index`, `file`, `segment_id`, `pixel_count`,
//! `bbox` (`[x_min, y_min, x_max, y_max]`, inclusive), `centroid` (`[x, y]`),
//! `fg`, `class_bit`, `tier_bits` (`fg << 1 | class_bit`), `class_label` and
//! `score`. The last two are `null` outside classify mode.

use hmrf_core::classify::Classification;
use hmrf_core::imgcore::Segment;
use hmrf_core::pipeline::FrameResult;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub frame_index: usize,
    pub file: String,
    pub segment_id: usize,
    pub pixel_count: usize,
    pub bbox: [usize; 4],
    pub centroid: [f64; 2],
    pub fg: u8,
    pub class_bit: u8,
    pub tier_bits: u8,
    pub class_label: Option<String>,
    pub score: Option<f64>,
}

impl SegmentRecord {
    pub fn new(frame_index: usize, file: &str, seg: &Segment, class: Option<&Classification>) -> Self {
        let b = seg.bbox();
        let (cx, cy) = seg.centroid();
        let class_bit = seg.label.bit();
        SegmentRecord {
            frame_index,
            file: file.to_owned(),
            segment_id: seg.id,
            pixel_count: seg.pixel_count(),
            bbox: [b.x_min, b.y_min, b.x_max, b.y_max],
            centroid: [cx, cy],
            fg: 1,
            class_bit,
            tier_bits: 0b10 | class_bit,
            class_label: class.map(|c| c.label.to_string()),
            score: class.map(|c| c.score),
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("records always serialize")
    }
}

pub const METRICS_HEADER: [&str; 11] = [
    "frame_index",
    "file",
    "method",
    "alpha_s",
    "alpha_l",
    "foreground_pixels",
    "layer1_segments",
    "segments",
    "energy_layer1",
    "energy_layer2",
    "energy_graph",
];

/// One metrics row. Layer energies a method does not have are left empty.
pub fn metrics_row(file: &str, result: &FrameResult) -> Vec<String> {
    let energy = |name: &str| {
        result.energies.iter().find(|(n, _)| *n == name).map(|(_, e)| format!("{e:.6}")).unwrap_or_default()
    };
    vec![
        result.frame_index.to_string(),
        file.to_owned(),
        result.method.to_string(),
        result.alpha_s.to_string(),
        result.alpha_l.to_string(),
        result.foreground_mask.count().to_string(),
        result.layer1_segment_count.to_string(),
        result.segments.len().to_string(),
        energy("layer1"),
        energy("layer2"),
        energy("graph"),
    ]
}
