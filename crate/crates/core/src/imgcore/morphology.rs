//! Binary erosion, dilation and opening with a square structuring element of
//! side `2 * radius + 1`. Pixels outside the image count as background, so
//! erosion never grows a set and the opening equals the unbounded-plane
//! opening restricted to the image.

use super::raster::BinaryMask;
use crate::error::{Error, Result};

/// For each index, whether any / all of `line[i - r ..= i + r]` is set.
/// Out-of-range positions are unset.
fn window_line(line: &[bool], radius: usize, all: bool, out: &mut [bool]) {
    let n = line.len();
    // prefix[i] = number of set entries in line[..i]
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0usize);
    for &b in line {
        prefix.push(prefix.last().unwrap() + usize::from(b));
    }
    let full = 2 * radius + 1;
    for i in 0..n {
        let lo = i.saturating_sub(radius);
        let hi = (i + radius + 1).min(n);
        let set = prefix[hi] - prefix[lo];
        out[i] = if all { set == full } else { set > 0 };
    }
}

fn separable(mask: &BinaryMask, radius: usize, all: bool) -> BinaryMask {
    let (w, h) = mask.dims();
    let src = mask.bits();
    let mut rows = vec![false; w * h];
    for y in 0..h {
        window_line(&src[y * w..(y + 1) * w], radius, all, &mut rows[y * w..(y + 1) * w]);
    }
    let mut out = vec![false; w * h];
    let mut column = vec![false; h];
    let mut result = vec![false; h];
    for x in 0..w {
        for y in 0..h {
            column[y] = rows[y * w + x];
        }
        window_line(&column, radius, all, &mut result);
        for y in 0..h {
            out[y * w + x] = result[y];
        }
    }
    BinaryMask::from_bits(w, h, out).expect("same dimensions")
}

pub fn erode(mask: &BinaryMask, radius: usize) -> BinaryMask {
    separable(mask, radius, true)
}

pub fn dilate(mask: &BinaryMask, radius: usize) -> BinaryMask {
    separable(mask, radius, false)
}

/// Erosion followed by dilation; removes foreground features that cannot
/// contain the structuring element.
pub fn morphological_open(mask: &BinaryMask, radius: usize) -> Result<BinaryMask> {
    if radius == 0 {
        return Err(Error::InvalidParameter("opening radius must be at least 1".into()));
    }
    Ok(dilate(&erode(mask, radius), radius))
}
