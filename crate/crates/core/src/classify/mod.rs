//! Segment classification by a small decision tree whose branches score
//! competing classes with a relative-deviation likelihood times a learned
//! prior.

mod features;
mod model;
mod tree;

pub use features::{extract_features, Feature, FeatureVector};
pub use model::{class_likelihood, relative_likelihood, train, train_features, ClassModel, DEFAULT_SIZE_FLOOR_FRACTION};
pub use tree::{classify, classify_features, Classification};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassLabel {
    LeftLane,
    RightLane,
    TrafficFixture,
    Ramp,
    Error,
}

impl ClassLabel {
    /// The four trainable classes, in tie-breaking order.
    pub const CLASSES: [ClassLabel; 4] = [
        ClassLabel::LeftLane,
        ClassLabel::RightLane,
        ClassLabel::TrafficFixture,
        ClassLabel::Ramp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassLabel::LeftLane => "LeftLane",
            ClassLabel::RightLane => "RightLane",
            ClassLabel::TrafficFixture => "TrafficFixture",
            ClassLabel::Ramp => "Ramp",
            ClassLabel::Error => "Error",
        }
    }

    pub(crate) fn index(self) -> Option<usize> {
        Self::CLASSES.iter().position(|&c| c == self)
    }

    pub fn is_lane(self) -> bool {
        matches!(self, ClassLabel::LeftLane | ClassLabel::RightLane)
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::CLASSES
            .iter()
            .chain(std::iter::once(&ClassLabel::Error))
            .copied()
            .find(|c| c.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown class label {s:?}")))
    }
}
