use super::energy::{local_energy, MrfParams};
use super::field::{DataField, LabelField};
use crate::error::{Error, Result};

/// One asynchronous raster-order pass. Each active site takes whichever label
/// has the lower energy given its current neighbors; on an exact tie the
/// current label stays. Returns the number of flips.
pub fn icm_sweep(field: &mut LabelField, data: &DataField, params: &MrfParams) -> Result<usize> {
    Error::check_dims(field.dims(), data.dims())?;
    params.validate()?;
    Ok(sweep(field, data.values(), params.beta))
}

fn sweep(field: &mut LabelField, values: &[f64], beta: f64) -> usize {
    let mut flips = 0;
    for idx in 0..field.len() {
        if !field.is_active_index(idx) {
            continue;
        }
        let current = field.labels()[idx];
        let other = current.flipped();
        if local_energy(idx, other, values, field, beta) < local_energy(idx, current, values, field, beta) {
            field.set_index(idx, other);
            flips += 1;
        }
    }
    flips
}

/// Runs up to `params.iterations` sweeps, stopping after the first sweep that
/// changes nothing. Returns the flip count of every sweep executed.
pub fn icm(field: &mut LabelField, data: &DataField, params: &MrfParams) -> Result<Vec<usize>> {
    Error::check_dims(field.dims(), data.dims())?;
    params.validate()?;
    let mut history = Vec::with_capacity(params.iterations);
    for _ in 0..params.iterations {
        let flips = sweep(field, data.values(), params.beta);
        history.push(flips);
        if flips == 0 {
            break;
        }
    }
    Ok(history)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgcore::BinaryMask;
    use crate::mrf::oracle;
    use crate::mrf::{total_energy, Label};
    use proptest::prelude::*;

    fn center_noise(beta: f64) -> (LabelField, Vec<usize>) {
        let mut labels = vec![Label::Plus; 25];
        labels[12] = Label::Minus;
        let mut field = LabelField::new(5, 5, labels).unwrap();
        let data = DataField::from_labels(&field);
        let flips = icm_sweep(&mut field, &data, &MrfParams::new(beta, 1).unwrap()).unwrap();
        (field, vec![flips])
    }

    #[test]
    fn uniform_agreement_is_a_fixed_point() {
        let mut field = LabelField::uniform(4, 4, Label::Plus);
        let data = DataField::from_labels(&field);
        assert_eq!(icm_sweep(&mut field, &data, &MrfParams::default()).unwrap(), 0);
    }

    #[test]
    fn isolated_center_flips_only_above_unit_beta() {
        // Oracle: evaluate both labels at every site of the initial field.
        let mut labels = vec![Label::Plus; 25];
        labels[12] = Label::Minus;
        let init = LabelField::new(5, 5, labels).unwrap();
        let data = DataField::from_labels(&init);
        let keep = oracle::naive_site_energy(&init, &data, 2, 2, Label::Minus, 1.8);
        let flip = oracle::naive_site_energy(&init, &data, 2, 2, Label::Plus, 1.8);
        assert!((keep - 1.8).abs() < 1e-12 && (flip - 1.0).abs() < 1e-12);

        let (field, flips) = center_noise(1.8);
        assert_eq!(flips, vec![1]);
        assert!(field.labels().iter().all(|&l| l == Label::Plus));

        let (field, flips) = center_noise(0.5);
        assert_eq!(flips, vec![0]);
        assert_eq!(field.get(2, 2), Label::Minus);
    }

    #[test]
    fn noise_free_input_stops_after_one_sweep() {
        let mask = BinaryMask::from_fn(8, 6, |x, y| x > 2 && y < 4);
        let mut field = LabelField::from_mask(&mask);
        let data = DataField::from_mask(&mask);
        let before = field.clone();
        let history = icm(&mut field, &data, &MrfParams::new(3.0, 5).unwrap()).unwrap();
        assert_eq!(history, vec![0]);
        assert_eq!(field, before);
    }

    #[test]
    fn isolated_shot_noise_is_removed() {
        let (w, h) = (64, 64);
        let mut labels = vec![Label::Plus; w * h];
        // every 10th site on a sparse lattice: no two noise sites are neighbors
        let mut noisy = 0;
        for y in (3..h).step_by(10) {
            for x in (5..w).step_by(10) {
                labels[y * w + x] = Label::Minus;
                noisy += 1;
            }
        }
        assert!(noisy >= 36);
        let mut field = LabelField::new(w, h, labels).unwrap();
        let data = DataField::from_labels(&field);
        let history = icm(&mut field, &data, &MrfParams::default()).unwrap();
        assert_eq!(history, vec![noisy, 0]);
        assert_eq!(field, LabelField::uniform(w, h, Label::Plus));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let mut field = LabelField::uniform(3, 3, Label::Plus);
        let data = DataField::new(3, 2, vec![0.0; 6]).unwrap();
        assert!(icm(&mut field, &data, &MrfParams::default()).is_err());
    }

    proptest! {
        #[test]
        fn sweeps_never_raise_energy(seed in any::<u64>(), w in 1usize..9, h in 1usize..9, beta in 0.0f64..4.0) {
            let (mut field, data) = oracle::random_instance_masked(w, h, seed);
            let p = MrfParams::new(beta, 1).unwrap();
            let mut last = total_energy(&field, &data, &p).unwrap();
            for _ in 0..4 {
                icm_sweep(&mut field, &data, &p).unwrap();
                let e = total_energy(&field, &data, &p).unwrap();
                prop_assert!(e <= last + 1e-9, "{} -> {}", last, e);
                last = e;
            }
        }

        #[test]
        fn inactive_sites_untouched(seed in any::<u64>(), w in 1usize..9, h in 1usize..9) {
            let (mut field, data) = oracle::random_instance_masked(w, h, seed);
            let before = field.clone();
            icm(&mut field, &data, &MrfParams::new(2.5, 3).unwrap()).unwrap();
            for i in 0..field.len() {
                if !field.is_active_index(i) {
                    prop_assert_eq!(field.labels()[i], before.labels()[i]);
                }
            }
        }

        #[test]
        fn converged_field_is_a_local_minimum(seed in any::<u64>(), w in 1usize..5, h in 1usize..5, beta in 0.0f64..4.0) {
            let (mut field, data) = oracle::random_instance(w, h, seed);
            let p = MrfParams::new(beta, 200).unwrap();
            let history = icm(&mut field, &data, &p).unwrap();
            prop_assert_eq!(*history.last().unwrap(), 0);
            let e = total_energy(&field, &data, &p).unwrap();
            for i in 0..field.len() {
                let mut probe = field.clone();
                probe.set_index(i, probe.labels()[i].flipped());
                prop_assert!(total_energy(&probe, &data, &p).unwrap() >= e - 1e-9);
            }
        }

        #[test]
        fn icm_is_deterministic(seed in any::<u64>()) {
            let (field, data) = oracle::random_instance(7, 5, seed);
            let p = MrfParams::new(1.8, 4).unwrap();
            let (mut a, mut b) = (field.clone(), field);
            let ha = icm(&mut a, &data, &p).unwrap();
            let hb = icm(&mut b, &data, &p).unwrap();
            prop_assert_eq!(ha, hb);
            prop_assert_eq!(a, b);
        }
    }
}
