use std::fmt::Write as _;

use super::features::{extract_features, Feature, FeatureVector};
use super::ClassLabel;
use crate::error::{Error, Result};
use crate::imgcore::Segment;

/// Fraction of the smallest per-class mean pixel count below which a segment
/// is rejected as Error before any branch is scored.
pub const DEFAULT_SIZE_FLOOR_FRACTION: f64 = 0.1;

const N_CLASSES: usize = ClassLabel::CLASSES.len();
const N_FEATURES: usize = Feature::ALL.len();

/// `exp(-|mean - value| / mean)`. `mean` must be positive.
pub fn relative_likelihood(mean: f64, value: f64) -> f64 {
    (-(mean - value).abs() / mean).exp()
}

/// Per-class feature means and priors.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassModel {
    means: [[f64; N_FEATURES]; N_CLASSES],
    priors: [f64; N_CLASSES],
    tau: f64,
    min_pixels: f64,
}

impl ClassModel {
    /// `means[c][f]` is indexed by `ClassLabel::CLASSES` and `Feature::ALL`.
    pub fn new(
        means: [[f64; N_FEATURES]; N_CLASSES],
        priors: [f64; N_CLASSES],
        tau: f64,
        min_pixels: f64,
    ) -> Result<ClassModel> {
        let model = ClassModel { means, priors, tau, min_pixels };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        for (c, class) in ClassLabel::CLASSES.iter().enumerate() {
            for f in Feature::ALL {
                let m = self.means[c][f.index()];
                if !(m.is_finite() && m > 0.0) {
                    return Err(Error::InvalidModel(format!(
                        "{class}.{} must be a positive mean, got {m}",
                        f.name()
                    )));
                }
            }
            let p = self.priors[c];
            if !(p.is_finite() && p >= 0.0) {
                return Err(Error::InvalidModel(format!("{class}.prior must be non-negative, got {p}")));
            }
        }
        let sum: f64 = self.priors.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidModel(format!("priors sum to {sum}, expected 1")));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::InvalidModel(format!("tau must lie in (0, 1), got {}", self.tau)));
        }
        if !(self.min_pixels.is_finite() && self.min_pixels >= 0.0) {
            return Err(Error::InvalidModel(format!("min_pixels must be non-negative, got {}", self.min_pixels)));
        }
        Ok(())
    }

    /// Panics on `ClassLabel::Error`, which carries no statistics.
    pub fn mean(&self, class: ClassLabel, feature: Feature) -> f64 {
        self.means[class_index(class)][feature.index()]
    }

    pub fn prior(&self, class: ClassLabel) -> f64 {
        class.index().map_or(0.0, |c| self.priors[c])
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn min_pixels(&self) -> f64 {
        self.min_pixels
    }

    pub fn with_tau(mut self, tau: f64) -> Result<ClassModel> {
        self.tau = tau;
        self.validate()?;
        Ok(self)
    }

    pub fn with_min_pixels(mut self, min_pixels: f64) -> Result<ClassModel> {
        self.min_pixels = min_pixels;
        self.validate()?;
        Ok(self)
    }

    /// Plain-text `key = value` form, one entry per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "tau = {}", self.tau);
        let _ = writeln!(out, "min_pixels = {}", self.min_pixels);
        for (c, class) in ClassLabel::CLASSES.iter().enumerate() {
            let _ = writeln!(out, "{class}.prior = {}", self.priors[c]);
            for f in Feature::ALL {
                let _ = writeln!(out, "{class}.{} = {}", f.name(), self.means[c][f.index()]);
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<ClassModel> {
        let mut means = [[f64::NAN; N_FEATURES]; N_CLASSES];
        let mut priors = [f64::NAN; N_CLASSES];
        let mut tau = (-1.0f64).exp();
        let mut min_pixels = 0.0;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |what: &str| Error::InvalidModel(format!("line {}: {what}: {raw:?}", lineno + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| bad("expected key = value"))?;
            let value: f64 = value.trim().parse().map_err(|_| bad("value is not a number"))?;
            match key.trim() {
                "tau" => tau = value,
                "min_pixels" => min_pixels = value,
                key => {
                    let (class, field) = key.split_once('.').ok_or_else(|| bad("unknown key"))?;
                    let c = class
                        .parse::<ClassLabel>()
                        .ok()
                        .and_then(ClassLabel::index)
                        .ok_or_else(|| bad("unknown class"))?;
                    if field == "prior" {
                        priors[c] = value;
                    } else {
                        let f = Feature::from_name(field).ok_or_else(|| bad("unknown feature"))?;
                        means[c][f.index()] = value;
                    }
                }
            }
        }
        for (c, class) in ClassLabel::CLASSES.iter().enumerate() {
            if priors[c].is_nan() {
                return Err(Error::InvalidModel(format!("missing {class}.prior")));
            }
            if let Some(f) = Feature::ALL.iter().find(|f| means[c][f.index()].is_nan()) {
                return Err(Error::InvalidModel(format!("missing {class}.{}", f.name())));
            }
        }
        ClassModel::new(means, priors, tau, min_pixels)
    }
}

fn class_index(class: ClassLabel) -> usize {
    class.index().expect("Error class has no model statistics")
}

/// Likelihood of `fv` under `class` judged on a single feature.
pub fn class_likelihood(fv: &FeatureVector, class: ClassLabel, model: &ClassModel, feature: Feature) -> f64 {
    relative_likelihood(model.mean(class, feature), feature.value(fv))
}

/// Trains on already-extracted features. Error examples are ignored.
pub fn train_features(examples: &[(FeatureVector, ClassLabel)]) -> Result<ClassModel> {
    let mut sums = [[0.0; N_FEATURES]; N_CLASSES];
    let mut counts = [0usize; N_CLASSES];
    for (fv, label) in examples {
        let Some(c) = label.index() else { continue };
        counts[c] += 1;
        for f in Feature::ALL {
            sums[c][f.index()] += f.value(fv);
        }
    }
    if let Some(c) = counts.iter().position(|&n| n == 0) {
        return Err(Error::MissingClass(ClassLabel::CLASSES[c]));
    }
    let total: usize = counts.iter().sum();
    let mut means = sums;
    let mut priors = [0.0; N_CLASSES];
    for c in 0..N_CLASSES {
        for m in &mut means[c] {
            *m /= counts[c] as f64;
        }
        priors[c] = counts[c] as f64 / total as f64;
    }
    let smallest = means
        .iter()
        .map(|m| m[Feature::PixelCount.index()])
        .fold(f64::INFINITY, f64::min);
    ClassModel::new(means, priors, (-1.0f64).exp(), DEFAULT_SIZE_FLOOR_FRACTION * smallest)
}

pub fn train(examples: &[(Segment, ClassLabel)], frame_dims: (usize, usize)) -> Result<ClassModel> {
    let features: Vec<_> = examples
        .iter()
        .map(|(seg, label)| (extract_features(seg, frame_dims), *label))
        .collect();
    train_features(&features)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fv(pixel_count: usize, area_ratio: f64, aspect: f64, x_frac: f64) -> FeatureVector {
        FeatureVector {
            pixel_count,
            area_ratio,
            length_x: 10,
            length_y: 10,
            aspect,
            centroid_x_frac: x_frac,
            diag_norm: 0.1,
        }
    }

    fn one_per_class() -> Vec<(FeatureVector, ClassLabel)> {
        vec![
            (fv(400, 0.1, 0.5, 0.25), ClassLabel::LeftLane),
            (fv(420, 0.12, 0.5, 0.75), ClassLabel::RightLane),
            (fv(600, 0.9, 0.7, 0.5), ClassLabel::TrafficFixture),
            (fv(2000, 0.8, 2.4, 0.5), ClassLabel::Ramp),
        ]
    }

    #[test]
    fn likelihood_spot_values() {
        assert_eq!(relative_likelihood(3.0, 3.0), 1.0);
        assert!((relative_likelihood(3.0, 6.0) - (-1.0f64).exp()).abs() < 1e-12);
        assert!((relative_likelihood(3.0, 1.5) - (-0.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn single_example_per_class() {
        let examples = one_per_class();
        let model = train_features(&examples).unwrap();
        for (fv, class) in &examples {
            assert_eq!(model.prior(*class), 0.25);
            for f in Feature::ALL {
                assert_eq!(model.mean(*class, f), f.value(fv));
            }
        }
        assert_eq!(model.min_pixels(), 40.0);
    }

    #[test]
    fn duplication_does_not_change_model() {
        let mut examples = one_per_class();
        examples.push((fv(300, 0.2, 0.4, 0.3), ClassLabel::LeftLane));
        let once = train_features(&examples).unwrap();
        let tripled: Vec<_> = examples.iter().cycle().take(examples.len() * 3).copied().collect();
        let thrice = train_features(&tripled).unwrap();
        for c in ClassLabel::CLASSES {
            assert!((once.prior(c) - thrice.prior(c)).abs() < 1e-12);
            for f in Feature::ALL {
                assert!((once.mean(c, f) - thrice.mean(c, f)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn lane_family_prior_is_frequency() {
        let base = one_per_class();
        let mut examples = Vec::new();
        examples.extend(std::iter::repeat_n(base[0], 25));
        examples.extend(std::iter::repeat_n(base[1], 25));
        examples.extend(std::iter::repeat_n(base[2], 75));
        examples.extend(std::iter::repeat_n(base[3], 75));
        let model = train_features(&examples).unwrap();
        let lane = model.prior(ClassLabel::LeftLane) + model.prior(ClassLabel::RightLane);
        assert!((lane - 0.25).abs() < 1e-12);
    }

    #[test]
    fn missing_class_is_named() {
        let mut examples = one_per_class();
        examples.retain(|(_, c)| *c != ClassLabel::Ramp);
        examples.push((fv(3, 1.0, 1.0, 0.5), ClassLabel::Error));
        match train_features(&examples) {
            Err(Error::MissingClass(ClassLabel::Ramp)) => {}
            other => panic!("expected missing Ramp, got {other:?}"),
        }
    }

    #[test]
    fn text_round_trip() {
        let model = train_features(&one_per_class()).unwrap().with_tau(0.3).unwrap();
        let back = ClassModel::from_text(&model.to_text()).unwrap();
        assert_eq!(back, model);
    }

    #[test]
    fn text_rejects_bad_models() {
        let text = train_features(&one_per_class()).unwrap().to_text();
        let zero_mean = text.replace("Ramp.aspect = 2.4", "Ramp.aspect = 0");
        assert!(matches!(ClassModel::from_text(&zero_mean), Err(Error::InvalidModel(_))));
        let missing: String = text.lines().filter(|l| !l.starts_with("Ramp.prior")).map(|l| format!("{l}\n")).collect();
        assert!(ClassModel::from_text(&missing).unwrap_err().to_string().contains("Ramp.prior"));
        assert!(ClassModel::from_text(&format!("{text}Car.aspect = 1\n")).is_err());
        assert!(ClassModel::from_text(&text.replace("tau = ", "tau = 1")).is_err());
    }

    proptest! {
        #[test]
        fn likelihood_depends_only_on_ratio(mean in 0.01f64..100.0, r in 0.0f64..20.0, c in 0.01f64..100.0) {
            let value = mean * r;
            let a = relative_likelihood(mean, value);
            let b = relative_likelihood(mean * c, value * c);
            prop_assert!((a - b).abs() < 1e-9);
            prop_assert!(a > 0.0 && a <= 1.0);
        }

        #[test]
        fn closer_values_never_score_lower(mean in 0.01f64..100.0, value in 0.0f64..200.0, t in 0.0f64..1.0) {
            let closer = value + t * (mean - value);
            prop_assert!(relative_likelihood(mean, closer) >= relative_likelihood(mean, value));
        }
    }
}
