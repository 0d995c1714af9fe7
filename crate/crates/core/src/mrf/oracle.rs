//! Independent, deliberately naive reference computations used by tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::field::{DataField, Label, LabelField};
use crate::imgcore::BinaryMask;

fn active_neighbors(field: &LabelField, x: usize, y: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (dx, dy) in [(0i64, -1i64), (-1, 0), (1, 0), (0, 1)] {
        let nx = x as i64 + dx;
        let ny = y as i64 + dy;
        if nx < 0 || ny < 0 || nx >= field.width() as i64 || ny >= field.height() as i64 {
            continue;
        }
        if field.is_active(nx as usize, ny as usize) {
            out.push((nx as usize, ny as usize));
        }
    }
    out
}

fn pair_weight(field: &LabelField, a: (usize, usize), b: (usize, usize), beta: f64) -> f64 {
    let na = active_neighbors(field, a.0, a.1).len() as f64;
    let nb = active_neighbors(field, b.0, b.1).len() as f64;
    beta * (1.0 / na + 1.0 / nb) / 2.0
}

/// Energy of one site written straight from the formula, using signed
/// coordinates and explicit squared differences.
pub fn naive_site_energy(field: &LabelField, data: &DataField, x: usize, y: usize, label: Label, beta: f64) -> f64 {
    let lam = label.value();
    let d = data.get(x, y);
    let mut prior = 0.0;
    for (nx, ny) in active_neighbors(field, x, y) {
        let f = field.get(nx, ny).value();
        prior += pair_weight(field, (x, y), (nx, ny), beta) * ((lam - f) / 2.0).powi(2);
    }
    ((lam - d) / 2.0).powi(2) + prior
}

/// Likelihoods plus one smoothness term per unordered neighbor pair, found by
/// scanning right and down neighbors only.
pub fn naive_total_energy(field: &LabelField, data: &DataField, beta: f64) -> f64 {
    let mut total = 0.0;
    for y in 0..field.height() {
        for x in 0..field.width() {
            if !field.is_active(x, y) {
                continue;
            }
            let lam = field.get(x, y).value();
            total += ((lam - data.get(x, y)) / 2.0).powi(2);
            for (nx, ny) in [(x + 1, y), (x, y + 1)] {
                if nx < field.width() && ny < field.height() && field.is_active(nx, ny) {
                    let f = field.get(nx, ny).value();
                    total += pair_weight(field, (x, y), (nx, ny), beta) * ((lam - f) / 2.0).powi(2);
                }
            }
        }
    }
    total
}

pub fn random_instance(w: usize, h: usize, seed: u64) -> (LabelField, DataField) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = (0..w * h).map(|_| Label::from_bool(rng.random())).collect();
    let values = (0..w * h).map(|_| rng.random_range(-1.0..=1.0)).collect();
    (LabelField::new(w, h, labels).unwrap(), DataField::new(w, h, values).unwrap())
}

pub fn random_instance_masked(w: usize, h: usize, seed: u64) -> (LabelField, DataField) {
    let (field, data) = random_instance(w, h, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mask = BinaryMask::from_fn(w, h, |_, _| rng.random_bool(0.8));
    (field.with_active(&mask).unwrap(), data)
}
