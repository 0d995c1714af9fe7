use super::raster::{Channels, RasterImage};
use crate::error::Result;

/// Splits an RGB raster into HSL saturation and lightness planes, both scaled
/// to 0..=255.
///
/// Lightness is `(max + min) / 2` truncated; saturation uses the bi-hexcone
/// definition `(max - min) / (max + min)` for lightness up to one half and
/// `(max - min) / (2 - max - min)` above, rounded to nearest.
pub fn rgb_to_hsl_planes(img: &RasterImage) -> Result<(RasterImage, RasterImage)> {
    img.require(Channels::Rgb)?;
    let n = img.width() * img.height();
    let mut sat = Vec::with_capacity(n);
    let mut lum = Vec::with_capacity(n);
    for px in img.data().chunks_exact(3) {
        let (s, l) = hsl_sat_lum(px[0], px[1], px[2]);
        sat.push(s);
        lum.push(l);
    }
    Ok((
        RasterImage::gray(img.width(), img.height(), sat)?,
        RasterImage::gray(img.width(), img.height(), lum)?,
    ))
}

fn hsl_sat_lum(r: u8, g: u8, b: u8) -> (u8, u8) {
    let max = u32::from(r.max(g).max(b));
    let min = u32::from(r.min(g).min(b));
    let sum = max + min;
    let lum = (sum / 2) as u8;
    if max == min {
        return (0, lum);
    }
    let delta = max - min;
    let denom = if sum <= 255 { sum } else { 510 - sum };
    // round(255 * delta / denom) in integer arithmetic
    let sat = (2 * 255 * delta + denom) / (2 * denom);
    (sat.min(255) as u8, lum)
}
