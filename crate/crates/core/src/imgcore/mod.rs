//! Image substrate: rasters, PNM I/O, HSL planes, thresholding, binary
//! opening and 4-connected component extraction.

mod components;
mod hsl;
pub mod pnm;
mod morphology;
mod raster;
mod threshold;

pub use components::{connected_components, BoundingBox, Segment};
pub use hsl::rgb_to_hsl_planes;
pub use morphology::{dilate, erode, morphological_open};
pub use raster::{BinaryMask, Channels, RasterImage};
pub use threshold::{histogram, histogram_peak_threshold, hybrid_channel, otsu_threshold, Threshold};
