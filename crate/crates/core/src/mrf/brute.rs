use super::energy::{total_energy, MrfParams};
use super::field::{DataField, Label, LabelField};
use crate::error::{Error, Result};

pub const MAX_BRUTE_FORCE_SITES: usize = 16;

/// Exhaustive global minimizer over all `2^n` labelings of a small lattice.
///
/// Labelings are enumerated as integers whose bits, most significant first,
/// are the sites in raster order (`Minus` = 0). The first labeling reaching
/// the minimum wins, so ties resolve to the lowest encoding.
pub fn brute_force_minimum(data: &DataField, params: &MrfParams) -> Result<(LabelField, f64)> {
    let (w, h) = data.dims();
    let n = w * h;
    if n > MAX_BRUTE_FORCE_SITES {
        return Err(Error::LatticeTooLarge {
            sites: n,
            max: MAX_BRUTE_FORCE_SITES,
        });
    }
    let mut field = LabelField::uniform(w, h, Label::Minus);
    let mut best: Option<(u32, f64)> = None;
    for code in 0u32..(1 << n) {
        for i in 0..n {
            field.set_index(i, Label::from_bool(code >> (n - 1 - i) & 1 == 1));
        }
        let e = total_energy(&field, data, params)?;
        if best.is_none_or(|(_, b)| e < b) {
            best = Some((code, e));
        }
    }
    let (code, energy) = best.expect("at least the empty labeling");
    for i in 0..n {
        field.set_index(i, Label::from_bool(code >> (n - 1 - i) & 1 == 1));
    }
    Ok((field, energy))
}
