use super::raster::{BinaryMask, Channels, RasterImage};
use crate::error::{Error, Result};

/// Intensity cut. `degenerate` is set when the plane offered nothing to
/// separate (a single occupied intensity), in which case `value` is that
/// intensity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Threshold {
    pub value: u8,
    pub degenerate: bool,
}

pub fn histogram(plane: &RasterImage) -> Result<[u64; 256]> {
    plane.require(Channels::Gray)?;
    let mut hist = [0u64; 256];
    for &v in plane.data() {
        hist[v as usize] += 1;
    }
    Ok(hist)
}

/// Otsu's criterion over every cut `t` in `1..=255`, where the lower class is
/// `v < t`. When several cuts share the maximal between-class variance (empty
/// bins between two modes) the midpoint of that plateau is returned.
pub fn otsu_threshold(hist: &[u64; 256]) -> Threshold {
    let total: u64 = hist.iter().sum();
    let occupied: Vec<usize> = (0..256).filter(|&v| hist[v] > 0).collect();
    match occupied.as_slice() {
        [] => {
            return Threshold {
                value: 0,
                degenerate: true,
            }
        }
        [only] => {
            return Threshold {
                value: *only as u8,
                degenerate: true,
            }
        }
        _ => {}
    }

    let sum_all: f64 = hist.iter().enumerate().map(|(v, &c)| v as f64 * c as f64).sum();
    let total = total as f64;
    let mut n_below = 0f64;
    let mut sum_below = 0f64;
    let mut best = f64::NEG_INFINITY;
    let mut first = 0usize;
    let mut last = 0usize;
    for t in 1..256 {
        n_below += hist[t - 1] as f64;
        sum_below += (t - 1) as f64 * hist[t - 1] as f64;
        let n_above = total - n_below;
        if n_below == 0.0 || n_above == 0.0 {
            continue;
        }
        // (N*S0 - n0*S)^2 / (n0*n1) is proportional to the between-class variance.
        let diff = total * sum_below - n_below * sum_all;
        let score = diff * diff / (n_below * n_above);
        if score > best {
            best = score;
            first = t;
            last = t;
        } else if score == best {
            last = t;
        }
    }
    Threshold {
        value: ((first + last) / 2) as u8,
        degenerate: false,
    }
}

/// Automatic threshold from the plane's histogram (see [`otsu_threshold`]).
pub fn histogram_peak_threshold(plane: &RasterImage) -> Result<Threshold> {
    Ok(otsu_threshold(&histogram(plane)?))
}

/// Hybrid foreground channel: `max(sat, dark)` compared against `alpha_s`,
/// where `dark` is 255 for pixels with `lum < alpha_l` and 0 otherwise.
pub fn hybrid_channel(
    sat: &RasterImage,
    lum: &RasterImage,
    alpha_s: u8,
    alpha_l: u8,
) -> Result<BinaryMask> {
    sat.require(Channels::Gray)?;
    lum.require(Channels::Gray)?;
    Error::check_dims(sat.dims(), lum.dims())?;
    let bits = sat
        .data()
        .iter()
        .zip(lum.data())
        .map(|(&s, &l)| {
            let dark = if l < alpha_l { 255 } else { 0 };
            s.max(dark) >= alpha_s
        })
        .collect();
    BinaryMask::from_bits(sat.width(), sat.height(), bits)
}
