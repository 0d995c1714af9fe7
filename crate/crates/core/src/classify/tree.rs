use super::features::{extract_features, Feature, FeatureVector};
use super::model::{relative_likelihood, ClassModel};
use super::ClassLabel;
use crate::imgcore::Segment;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Classification {
    pub label: ClassLabel,
    /// Likelihood times prior at the deciding branch; 0 when rejected by size.
    pub score: f64,
}

impl Classification {
    fn error(score: f64) -> Classification {
        Classification { label: ClassLabel::Error, score }
    }
}

pub fn classify(seg: &Segment, model: &ClassModel, frame_dims: (usize, usize)) -> Classification {
    classify_features(&extract_features(seg, frame_dims), model)
}

/// Walks the tree: size gate, lane-vs-object on area ratio, then left/right
/// by centroid or fixture/ramp by aspect. Any branch whose winner scores
/// below `tau` times the branch's largest prior yields Error.
pub fn classify_features(fv: &FeatureVector, model: &ClassModel) -> Classification {
    if (fv.pixel_count as f64) < model.min_pixels() {
        return Classification::error(0.0);
    }

    let lanes = [ClassLabel::LeftLane, ClassLabel::RightLane];
    let objects = [ClassLabel::TrafficFixture, ClassLabel::Ramp];
    let lane = family_score(fv, model, &lanes);
    let object = family_score(fv, model, &objects);
    let (score, prior_max, family) = if lane.0 >= object.0 {
        (lane.0, lane.1.max(object.1), lanes)
    } else {
        (object.0, lane.1.max(object.1), objects)
    };
    if score < model.tau() * prior_max {
        return Classification::error(score);
    }

    let family_prior: f64 = family.iter().map(|&c| model.prior(c)).sum();
    let conditional = |c: ClassLabel| model.prior(c) / family_prior;
    let cond_max = conditional(family[0]).max(conditional(family[1]));
    let (label, score) = if family == lanes {
        let side = if fv.centroid_x_frac < 0.5 { lanes[0] } else { lanes[1] };
        let l = relative_likelihood(model.mean(side, Feature::CentroidXFrac), fv.centroid_x_frac);
        (side, l * conditional(side))
    } else {
        let score = |c: ClassLabel| relative_likelihood(model.mean(c, Feature::Aspect), fv.aspect) * conditional(c);
        let (a, b) = (score(objects[0]), score(objects[1]));
        if a >= b { (objects[0], a) } else { (objects[1], b) }
    };
    if score < model.tau() * cond_max {
        return Classification::error(score);
    }
    Classification { label, score }
}

/// Likelihood of the pooled family mean on area ratio, times the family prior.
fn family_score(fv: &FeatureVector, model: &ClassModel, family: &[ClassLabel; 2]) -> (f64, f64) {
    let prior: f64 = family.iter().map(|&c| model.prior(c)).sum();
    let mean = if prior > 0.0 {
        family.iter().map(|&c| model.prior(c) * model.mean(c, Feature::AreaRatio)).sum::<f64>() / prior
    } else {
        family.iter().map(|&c| model.mean(c, Feature::AreaRatio)).sum::<f64>() / 2.0
    };
    (relative_likelihood(mean, fv.area_ratio) * prior, prior)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::train_features;
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

    fn model() -> ClassModel {
        train_features(&[
            (fv(400, 0.1, 0.5, 0.25), ClassLabel::LeftLane),
            (fv(420, 0.12, 0.5, 0.75), ClassLabel::RightLane),
            (fv(600, 0.9, 0.7, 0.5), ClassLabel::TrafficFixture),
            (fv(2000, 0.8, 2.4, 0.5), ClassLabel::Ramp),
        ])
        .unwrap()
    }

    // Independent recomputation of the root decision.
    fn family_oracle(m: &ClassModel, v: f64, a: ClassLabel, b: ClassLabel) -> f64 {
        let (pa, pb) = (m.prior(a), m.prior(b));
        let mean = (pa * m.mean(a, Feature::AreaRatio) + pb * m.mean(b, Feature::AreaRatio)) / (pa + pb);
        (-(v - mean).abs() / mean).exp() * (pa + pb)
    }

    #[test]
    fn thin_left_segment_is_left_lane() {
        let m = model();
        let s = fv(300, 0.03, 0.4, 0.3);
        let lane = family_oracle(&m, 0.03, ClassLabel::LeftLane, ClassLabel::RightLane);
        let object = family_oracle(&m, 0.03, ClassLabel::TrafficFixture, ClassLabel::Ramp);
        assert!(lane > object);
        let out = classify_features(&s, &m);
        assert_eq!(out.label, ClassLabel::LeftLane);
        let expected = (-(0.25 - 0.3f64).abs() / 0.25).exp() * 0.5;
        assert!((out.score - expected).abs() < 1e-12);
    }

    #[test]
    fn thin_right_segment_is_right_lane() {
        assert_eq!(classify_features(&fv(300, 0.1, 0.4, 0.8), &model()).label, ClassLabel::RightLane);
    }

    #[test]
    fn compact_blob_is_fixture() {
        let out = classify_features(&fv(500, 0.85, 0.7, 0.5), &model());
        assert_eq!(out.label, ClassLabel::TrafficFixture);
        assert!((out.score - 0.5).abs() < 1e-12);
    }

    #[test]
    fn wide_blob_is_ramp() {
        assert_eq!(classify_features(&fv(1500, 0.8, 2.0, 0.5), &model()).label, ClassLabel::Ramp);
    }

    #[test]
    fn speck_is_error() {
        let out = classify_features(&fv(3, 1.0, 3.0, 0.9), &model());
        assert_eq!(out, Classification { label: ClassLabel::Error, score: 0.0 });
    }

    #[test]
    fn extreme_aspect_object_is_error() {
        assert_eq!(classify_features(&fv(120, 1.0, 20.0, 0.5), &model()).label, ClassLabel::Error);
    }

    #[test]
    fn implausible_root_is_error() {
        // a very low tau lets everything through; a high one rejects the same segment
        let s = fv(500, 0.5, 0.7, 0.5);
        let strict = model().with_tau(0.99).unwrap();
        assert_eq!(classify_features(&s, &strict).label, ClassLabel::Error);
        let lax = model().with_tau(0.01).unwrap();
        assert_ne!(classify_features(&s, &lax).label, ClassLabel::Error);
    }

    #[test]
    fn root_tie_goes_to_lanes() {
        // area ratio placed where both family scores are equal
        let m = train_features(&[
            (fv(400, 0.5, 0.5, 0.25), ClassLabel::LeftLane),
            (fv(400, 0.5, 0.5, 0.75), ClassLabel::RightLane),
            (fv(400, 0.5, 0.7, 0.5), ClassLabel::TrafficFixture),
            (fv(400, 0.5, 2.4, 0.5), ClassLabel::Ramp),
        ])
        .unwrap();
        assert!(classify_features(&fv(400, 0.5, 0.7, 0.6), &m).label.is_lane());
    }

    proptest! {
        #[test]
        fn all_implausible_branches_give_error(area in 0.0f64..1.0, aspect in 0.05f64..10.0, x in 0.0f64..1.0, tau in 0.05f64..0.95) {
            let m = model().with_tau(tau).unwrap();
            let s = fv(1000, area, aspect, x);
            let lane_l = family_oracle(&m, area, ClassLabel::LeftLane, ClassLabel::RightLane) / 0.5;
            let obj_l = family_oracle(&m, area, ClassLabel::TrafficFixture, ClassLabel::Ramp) / 0.5;
            if lane_l < tau && obj_l < tau {
                prop_assert_eq!(classify_features(&s, &m).label, ClassLabel::Error);
            }
        }

        #[test]
        fn deterministic_and_scored(area in 0.01f64..1.0, aspect in 0.05f64..10.0, x in 0.0f64..1.0, n in 0usize..5000) {
            let m = model();
            let s = fv(n, area, aspect, x);
            let a = classify_features(&s, &m);
            prop_assert_eq!(a, classify_features(&s, &m));
            prop_assert!(a.score >= 0.0 && a.score <= 1.0);
        }
    }
}
