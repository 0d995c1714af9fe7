use super::field::{DataField, Label, LabelField};
use crate::error::{Error, Result};

/// Smoothness weight and ICM sweep budget.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MrfParams {
    pub beta: f64,
    pub iterations: usize,
}

impl MrfParams {
    pub fn new(beta: f64, iterations: usize) -> Result<Self> {
        let p = Self { beta, iterations };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidParameter(format!("beta must be finite and >= 0, got {}", self.beta)));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidParameter("iterations must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for MrfParams {
    fn default() -> Self {
        Self {
            beta: 1.8,
            iterations: 2,
        }
    }
}

/// Active in-bounds 4-neighbors of `idx`.
#[inline]
fn neighbors(field: &LabelField, idx: usize) -> impl Iterator<Item = usize> + '_ {
    let w = field.width();
    let (x, y) = (idx % w, idx / w);
    let candidates = [
        (x > 0).then(|| idx - 1),
        (x + 1 < w).then(|| idx + 1),
        (y > 0).then(|| idx - w),
        (y + 1 < field.height()).then(|| idx + w),
    ];
    candidates.into_iter().flatten().filter(|&j| field.is_active_index(j))
}

#[inline]
fn neighbor_count(field: &LabelField, idx: usize) -> u32 {
    neighbors(field, idx).count() as u32
}

/// Smoothness term of `idx` under `candidate`: each disagreeing neighbor `j`
/// costs `beta/2 * (1/|N_i| + 1/|N_j|)`, which is `beta/|N|` wherever both
/// sites see the same number of neighbors.
#[inline]
fn prior_energy(idx: usize, candidate: Label, field: &LabelField, beta: f64) -> f64 {
    let labels = field.labels();
    let n_i = neighbor_count(field, idx);
    if n_i == 0 {
        return 0.0;
    }
    let inv_i = 1.0 / f64::from(n_i);
    neighbors(field, idx)
        .filter(|&j| labels[j] != candidate)
        .map(|j| 0.5 * beta * (inv_i + 1.0 / f64::from(neighbor_count(field, j))))
        .sum()
}

#[inline]
fn likelihood(candidate: Label, d: f64) -> f64 {
    let diff = (candidate.value() - d) / 2.0;
    diff * diff
}

#[inline]
pub(crate) fn local_energy(idx: usize, candidate: Label, data: &[f64], field: &LabelField, beta: f64) -> f64 {
    likelihood(candidate, data[idx]) + prior_energy(idx, candidate, field, beta)
}

/// Energy of assigning `candidate` at `(x, y)` given the current neighbors.
pub fn site_energy(
    x: usize,
    y: usize,
    candidate: Label,
    data: &DataField,
    field: &LabelField,
    params: &MrfParams,
) -> Result<f64> {
    Error::check_dims(field.dims(), data.dims())?;
    if x >= field.width() || y >= field.height() {
        return Err(Error::InvalidParameter(format!("site ({x}, {y}) outside the lattice")));
    }
    if !field.is_active(x, y) {
        return Err(Error::InvalidParameter(format!("site ({x}, {y}) is inactive")));
    }
    Ok(local_energy(y * field.width() + x, candidate, data.values(), field, params.beta))
}

/// Likelihood of every active site plus the smoothness cost of every
/// disagreeing neighbor pair, each pair counted once. A single-site change
/// moves this total by exactly the change in that site's [`site_energy`], so
/// ICM never raises it. Unnormalized.
pub fn total_energy(field: &LabelField, data: &DataField, params: &MrfParams) -> Result<f64> {
    Error::check_dims(field.dims(), data.dims())?;
    let values = data.values();
    let labels = field.labels();
    Ok((0..field.len())
        .filter(|&i| field.is_active_index(i))
        .map(|i| likelihood(labels[i], values[i]) + 0.5 * prior_energy(i, labels[i], field, params.beta))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mrf::oracle;
    use proptest::prelude::*;

    fn params(beta: f64) -> MrfParams {
        MrfParams::new(beta, 2).unwrap()
    }

    #[test]
    fn all_agree_is_zero() {
        let field = LabelField::uniform(3, 3, Label::Plus);
        let data = DataField::from_labels(&field);
        assert_eq!(site_energy(1, 1, Label::Plus, &data, &field, &params(1.8)).unwrap(), 0.0);
    }

    #[test]
    fn minority_label_against_four_neighbors() {
        let field = LabelField::uniform(5, 5, Label::Plus);
        let data = DataField::from_labels(&field);
        let e = site_energy(2, 2, Label::Minus, &data, &field, &params(1.8)).unwrap();
        assert!((e - 2.8).abs() < 1e-12, "{e}");
    }

    #[test]
    fn gray_observation_with_two_neighbors() {
        // 2x2 block: every site has exactly two neighbors; (0,0) sees {+1, -1}.
        let field = LabelField::new(2, 2, vec![Label::Plus, Label::Plus, Label::Minus, Label::Minus]).unwrap();
        let data = DataField::new(2, 2, vec![0.5, 1.0, -1.0, -1.0]).unwrap();
        let e = site_energy(0, 0, Label::Plus, &data, &field, &params(1.8)).unwrap();
        let hand = ((1.0f64 - 0.5) / 2.0).powi(2) + (1.8 / 2.0) * (0.0 + 1.0);
        assert!((e - hand).abs() < 1e-12);
        assert!((e - 0.9625).abs() < 1e-12);
    }

    #[test]
    fn border_pairs_share_the_mean_normalization() {
        // 3x1 strip: the middle site has two neighbors, each end has one.
        let field = LabelField::new(3, 1, vec![Label::Plus, Label::Plus, Label::Minus]).unwrap();
        let data = DataField::new(3, 1, vec![1.0, 0.5, -1.0]).unwrap();
        let e = site_energy(1, 0, Label::Plus, &data, &field, &params(1.8)).unwrap();
        let hand = 0.0625 + 0.9 * (0.5 + 1.0);
        assert!((e - hand).abs() < 1e-12);
        // one disagreeing pair, counted once
        let total = total_energy(&field, &data, &params(1.8)).unwrap();
        assert!((total - (0.0625 + 0.9 * 1.5)).abs() < 1e-12);
    }

    #[test]
    fn isolated_site_is_likelihood_only() {
        let field = LabelField::uniform(1, 1, Label::Minus);
        let data = DataField::new(1, 1, vec![1.0]).unwrap();
        assert_eq!(site_energy(0, 0, Label::Minus, &data, &field, &params(1.8)).unwrap(), 1.0);
        assert_eq!(total_energy(&field, &data, &params(1.8)).unwrap(), 1.0);
    }

    #[test]
    fn uniform_agreement_has_zero_total() {
        let field = LabelField::uniform(6, 4, Label::Minus);
        let data = DataField::from_labels(&field);
        assert_eq!(total_energy(&field, &data, &params(1.8)).unwrap(), 0.0);
    }

    #[test]
    fn inactive_site_and_mismatch_rejected() {
        let mask = crate::imgcore::BinaryMask::from_bits(2, 1, vec![true, false]).unwrap();
        let field = LabelField::uniform(2, 1, Label::Plus).with_active(&mask).unwrap();
        let data = DataField::from_labels(&field);
        assert!(site_energy(1, 0, Label::Plus, &data, &field, &params(1.0)).is_err());
        // its active neighbor sees zero active neighbors: likelihood only
        assert_eq!(site_energy(0, 0, Label::Minus, &data, &field, &params(1.0)).unwrap(), 1.0);
        let other = DataField::new(1, 2, vec![0.0, 0.0]).unwrap();
        assert!(total_energy(&field, &other, &params(1.0)).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(MrfParams::new(-0.1, 1).is_err());
        assert!(MrfParams::new(1.0, 0).is_err());
        assert!(MrfParams::new(f64::NAN, 1).is_err());
        assert_eq!(MrfParams::default(), MrfParams::new(1.8, 2).unwrap());
    }

    #[test]
    fn random_instance_matches_naive_sum() {
        let (field, data) = oracle::random_instance(4, 4, 99);
        let p = params(1.3);
        let got = total_energy(&field, &data, &p).unwrap();
        let want = oracle::naive_total_energy(&field, &data, p.beta);
        assert!((got - want).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn total_energy_matches_naive_sum(seed in any::<u64>(), w in 1usize..7, h in 1usize..7, beta in 0.0f64..4.0) {
            let (field, data) = oracle::random_instance_masked(w, h, seed);
            let got = total_energy(&field, &data, &params(beta)).unwrap();
            let want = oracle::naive_total_energy(&field, &data, beta);
            prop_assert!((got - want).abs() < 1e-9);
        }

        #[test]
        fn flip_changes_total_by_site_energy_difference(seed in any::<u64>(), w in 1usize..6, h in 1usize..6, beta in 0.0f64..4.0, pick in any::<usize>()) {
            let (field, data) = oracle::random_instance_masked(w, h, seed);
            let active: Vec<usize> = (0..w * h).filter(|&i| field.is_active_index(i)).collect();
            prop_assume!(!active.is_empty());
            let i = active[pick % active.len()];
            let (x, y) = (i % w, i / w);
            let p = params(beta);
            let cur = field.get(x, y);
            let delta_site = site_energy(x, y, cur.flipped(), &data, &field, &p).unwrap()
                - site_energy(x, y, cur, &data, &field, &p).unwrap();
            let mut flipped = field.clone();
            flipped.set(x, y, cur.flipped());
            let delta_total = total_energy(&flipped, &data, &p).unwrap() - total_energy(&field, &data, &p).unwrap();
            prop_assert!((delta_site - delta_total).abs() < 1e-9);
        }
    }
}
