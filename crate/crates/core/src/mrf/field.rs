use std::fmt;

use crate::error::{Error, Result};
use crate::imgcore::{BinaryMask, Channels, RasterImage};

/// Binary site label. `Minus` is -1 (background, or the dark class on
/// grayscale layers) and `Plus` is +1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Minus,
    Plus,
}

impl Label {
    pub fn value(self) -> f64 {
        match self {
            Label::Minus => -1.0,
            Label::Plus => 1.0,
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Minus => Label::Plus,
            Label::Plus => Label::Minus,
        }
    }

    /// Sign of an observation; zero maps to `Plus`.
    pub fn from_sign(v: f64) -> Label {
        if v >= 0.0 {
            Label::Plus
        } else {
            Label::Minus
        }
    }

    pub fn from_bool(b: bool) -> Label {
        if b {
            Label::Plus
        } else {
            Label::Minus
        }
    }

    /// 1 for `Plus`, 0 for `Minus`.
    pub fn bit(self) -> u8 {
        u8::from(self == Label::Plus)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Minus => "-1",
            Label::Plus => "+1",
        })
    }
}

/// Hidden layer of a lattice MRF. Sites outside the optional active mask do
/// not take part in optimization and are never touched by ICM.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelField {
    width: usize,
    height: usize,
    labels: Vec<Label>,
    active: Option<Vec<bool>>,
}

impl LabelField {
    pub fn new(width: usize, height: usize, labels: Vec<Label>) -> Result<Self> {
        if labels.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "label field of {width}x{height} needs {} labels, got {}",
                width * height,
                labels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            labels,
            active: None,
        })
    }

    pub fn uniform(width: usize, height: usize, label: Label) -> Self {
        Self {
            width,
            height,
            labels: vec![label; width * height],
            active: None,
        }
    }

    /// Foreground bits become `Plus`, background `Minus`.
    pub fn from_mask(mask: &BinaryMask) -> Self {
        Self {
            width: mask.width(),
            height: mask.height(),
            labels: mask.bits().iter().map(|&b| Label::from_bool(b)).collect(),
            active: None,
        }
    }

    /// Zero-smoothness minimizer: each site takes the sign of its observation.
    pub fn from_data_sign(data: &DataField) -> Self {
        Self {
            width: data.width(),
            height: data.height(),
            labels: data.values().iter().map(|&v| Label::from_sign(v)).collect(),
            active: None,
        }
    }

    pub fn with_active(mut self, active: &BinaryMask) -> Result<Self> {
        Error::check_dims(self.dims(), active.dims())?;
        self.active = Some(active.bits().to_vec());
        Ok(self)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn active_mask(&self) -> Option<&[bool]> {
        self.active.as_deref()
    }

    pub fn get(&self, x: usize, y: usize) -> Label {
        self.labels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, label: Label) {
        self.labels[y * self.width + x] = label;
    }

    pub(crate) fn set_index(&mut self, idx: usize, label: Label) {
        self.labels[idx] = label;
    }

    #[inline]
    pub fn is_active_index(&self, idx: usize) -> bool {
        self.active.as_ref().is_none_or(|a| a[idx])
    }

    pub fn is_active(&self, x: usize, y: usize) -> bool {
        self.is_active_index(y * self.width + x)
    }

    pub fn active_count(&self) -> usize {
        match &self.active {
            Some(a) => a.iter().filter(|&&b| b).count(),
            None => self.labels.len(),
        }
    }

    /// Active `Plus` sites as a mask.
    pub fn plus_mask(&self) -> BinaryMask {
        let bits = (0..self.labels.len())
            .map(|i| self.is_active_index(i) && self.labels[i] == Label::Plus)
            .collect();
        BinaryMask::from_bits(self.width, self.height, bits).expect("same dimensions")
    }

    /// PGM encoding: `Plus` is 255, `Minus` and inactive sites are 0.
    pub fn to_gray(&self) -> RasterImage {
        self.plus_mask().to_gray()
    }
}

/// Observed layer with every value in `[-1, +1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DataField {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl DataField {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "data field of {width}x{height} needs {} values, got {}",
                width * height,
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !(-1.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!("observation {bad} outside [-1, 1]")));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    /// Binary observations: foreground +1, background -1.
    pub fn from_mask(mask: &BinaryMask) -> Self {
        Self {
            width: mask.width(),
            height: mask.height(),
            values: mask.bits().iter().map(|&b| if b { 1.0 } else { -1.0 }).collect(),
        }
    }

    pub fn from_labels(field: &LabelField) -> Self {
        Self {
            width: field.width(),
            height: field.height(),
            values: field.labels().iter().map(|l| l.value()).collect(),
        }
    }

    /// Grayscale observations: `v` in 0..=255 maps to `2 v / 255 - 1`.
    pub fn from_gray(plane: &RasterImage) -> Result<Self> {
        plane.require(Channels::Gray)?;
        Ok(Self {
            width: plane.width(),
            height: plane.height(),
            values: plane.data().iter().map(|&v| normalize_gray(v)).collect(),
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }
}

pub fn normalize_gray(v: u8) -> f64 {
    2.0 * (f64::from(v) / 255.0) - 1.0
}
