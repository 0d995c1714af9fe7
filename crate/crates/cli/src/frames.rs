//! Frame and field I/O.

use std::path::{Path, PathBuf};

use hmrf_core::imgcore::{pnm, BinaryMask, RasterImage, Segment};
use hmrf_core::mrf::{DataField, LabelField};

use crate::error::{CliError, CliResult};

/// Gray values of the two-tier label mask: background, then foreground with
/// class bit 0 and 1.
pub const MASK_BACKGROUND: u8 = 0;
pub const MASK_CLASS_MINUS: u8 = 128;
pub const MASK_CLASS_PLUS: u8 = 255;

pub fn load_frame(path: &Path) -> CliResult<RasterImage> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    if ext == "png" {
        return load_png(path);
    }
    pnm::load(path).map_err(|e| CliError::io(path, e))
}

#[cfg(feature = "png")]
fn load_png(path: &Path) -> CliResult<RasterImage> {
    let img = image::open(path).map_err(|e| CliError::io(path, e))?.to_rgb8();
    let (w, h) = img.dimensions();
    RasterImage::rgb(w as usize, h as usize, img.into_raw()).map_err(|e| CliError::io(path, e))
}

#[cfg(not(feature = "png"))]
fn load_png(path: &Path) -> CliResult<RasterImage> {
    Err(CliError::io(path, "PNG input needs the `png` feature"))
}

pub fn save(path: &Path, img: &RasterImage) -> CliResult<()> {
    pnm::save(path, img).map_err(|e| CliError::io(path, e))
}

/// Paints each segment with its class shade over a background of zeros.
pub fn label_mask(dims: (usize, usize), segments: &[Segment]) -> RasterImage {
    let (w, h) = dims;
    let mut data = vec![MASK_BACKGROUND; w * h];
    for seg in segments {
        let shade = if seg.label.bit() == 1 { MASK_CLASS_PLUS } else { MASK_CLASS_MINUS };
        for &(x, y) in seg.pixels() {
            data[y * w + x] = shade;
        }
    }
    RasterImage::gray(w, h, data).expect("sized to the frame")
}

/// Observations stored as gray (`v` maps to `2 v / 255 - 1`).
pub fn load_data_field(path: &Path) -> CliResult<DataField> {
    let img = pnm::load(path).map_err(|e| CliError::io(path, e))?;
    DataField::from_gray(&img).map_err(|e| CliError::io(path, e))
}

/// Labels stored as a {0, 255} mask.
pub fn load_truth_field(path: &Path) -> CliResult<LabelField> {
    let img = pnm::load(path).map_err(|e| CliError::io(path, e))?;
    let mask = BinaryMask::from_gray(&img).map_err(|e| CliError::io(path, e))?;
    Ok(LabelField::from_mask(&mask))
}

/// Observations in `{-1, +1}` encoded as 0 and 255. Other values are rounded
/// to the nearest gray level.
pub fn data_to_gray(data: &DataField) -> RasterImage {
    let (w, h) = data.dims();
    let px = data.values().iter().map(|v| ((v + 1.0) * 127.5).round().clamp(0.0, 255.0) as u8).collect();
    RasterImage::gray(w, h, px).expect("sized to the field")
}

/// Truth image paired with a calibration data image: `name.data.pgm` pairs
/// with `name.truth.pgm`, either next to it or in `truth_dir`.
pub fn truth_path_for(data_path: &Path, truth_dir: Option<&Path>) -> Option<PathBuf> {
    let name = data_path.file_name()?.to_str()?;
    let stem = name.strip_suffix(".data.pgm")?;
    let truth_name = format!("{stem}.truth.pgm");
    Some(match truth_dir {
        Some(dir) => dir.join(truth_name),
        None => data_path.with_file_name(truth_name),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use hmrf_core::mrf::Label;

    #[test]
    fn truth_pairing() {
        assert_eq!(truth_path_for(Path::new("d/x.data.pgm"), None), Some(PathBuf::from("d/x.truth.pgm")));
        assert_eq!(
            truth_path_for(Path::new("d/x.data.pgm"), Some(Path::new("t"))),
            Some(PathBuf::from("t/x.truth.pgm"))
        );
        assert_eq!(truth_path_for(Path::new("d/x.pgm"), None), None);
    }

    #[test]
    fn label_mask_shades_by_class_bit() {
        let segs = [
            Segment::from_pixels(0, Label::Plus, vec![(0, 0), (1, 0)]),
            Segment::from_pixels(1, Label::Minus, vec![(2, 1)]),
        ];
        let m = label_mask((3, 2), &segs);
        assert_eq!(m.data(), &[255, 255, 0, 0, 0, 128]);
    }

    #[test]
    fn binary_data_round_trips_through_gray() {
        let data = DataField::new(2, 2, vec![1.0, -1.0, -1.0, 1.0]).unwrap();
        let img = data_to_gray(&data);
        assert_eq!(img.data(), &[255, 0, 0, 255]);
        assert_eq!(DataField::from_gray(&img).unwrap(), data);
    }
}
