use crate::imgcore::Segment;

/// Geometry features of one segment relative to its frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeatureVector {
    pub pixel_count: usize,
    /// Pixel count over bounding-box area, in `(0, 1]`.
    pub area_ratio: f64,
    pub length_x: usize,
    pub length_y: usize,
    /// `length_x / length_y`.
    pub aspect: f64,
    /// Centroid x over frame width.
    pub centroid_x_frac: f64,
    /// Bounding-box diagonal over frame diagonal.
    pub diag_norm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Feature {
    PixelCount,
    AreaRatio,
    LengthX,
    LengthY,
    Aspect,
    CentroidXFrac,
    DiagNorm,
}

impl Feature {
    pub const ALL: [Feature; 7] = [
        Feature::PixelCount,
        Feature::AreaRatio,
        Feature::LengthX,
        Feature::LengthY,
        Feature::Aspect,
        Feature::CentroidXFrac,
        Feature::DiagNorm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::PixelCount => "pixel_count",
            Feature::AreaRatio => "area_ratio",
            Feature::LengthX => "length_x",
            Feature::LengthY => "length_y",
            Feature::Aspect => "aspect",
            Feature::CentroidXFrac => "centroid_x_frac",
            Feature::DiagNorm => "diag_norm",
        }
    }

    pub fn from_name(name: &str) -> Option<Feature> {
        Self::ALL.iter().copied().find(|f| f.name() == name)
    }

    pub(crate) fn index(self) -> usize {
        self as usize
    }

    pub fn value(self, fv: &FeatureVector) -> f64 {
        match self {
            Feature::PixelCount => fv.pixel_count as f64,
            Feature::AreaRatio => fv.area_ratio,
            Feature::LengthX => fv.length_x as f64,
            Feature::LengthY => fv.length_y as f64,
            Feature::Aspect => fv.aspect,
            Feature::CentroidXFrac => fv.centroid_x_frac,
            Feature::DiagNorm => fv.diag_norm,
        }
    }
}

pub fn extract_features(seg: &Segment, frame_dims: (usize, usize)) -> FeatureVector {
    let (lx, ly) = seg.axis_lengths();
    let (w, h) = frame_dims;
    let diag = |a: usize, b: usize| (a as f64).hypot(b as f64);
    FeatureVector {
        pixel_count: seg.pixel_count(),
        area_ratio: seg.pixel_count() as f64 / seg.bbox().area() as f64,
        length_x: lx,
        length_y: ly,
        aspect: lx as f64 / ly as f64,
        centroid_x_frac: seg.centroid().0 / w as f64,
        diag_norm: diag(lx, ly) / diag(w, h),
    }
}
