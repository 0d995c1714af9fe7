//! Seeded synthetic inputs: the barrel-and-lanes overlap scene, shot-noise
//! calibration fields and labeled segment generators for the classifier.
//!
//! Object geometry is fixed; the seed only moves noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classify::ClassLabel;
use crate::imgcore::{BinaryMask, RasterImage, Segment};
use crate::mrf::{DataField, Label, LabelField};

pub const SCENE_WIDTH: usize = 160;
pub const SCENE_HEIGHT: usize = 120;
pub const DEFAULT_SEED: u64 = 5;

const GRASS: [u8; 3] = [150, 175, 150];
const LANE: [u8; 3] = [250, 245, 170];
const BARREL: [u8; 3] = [170, 70, 10];
const STRIPE: [u8; 3] = [45, 35, 30];
const BLOB: [u8; 3] = [150, 245, 120];
const MUD: [u8; 3] = [90, 70, 50];
const SPECKLE: [u8; 3] = [230, 60, 60];

const BARREL_X: (usize, usize) = (70, 105);
const BARREL_Y: (usize, usize) = (45, 100);
const STRIPE_ROWS: [(usize, usize); 2] = [(58, 63), (78, 83)];
const LANE_HALF_WIDTH: f64 = 3.0;
const SHOT_NOISE_RATE: f64 = 0.005;

/// Ground-truth owner of a scene pixel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SceneObject {
    Background,
    LeftLane,
    RightLane,
    Barrel,
    Noise,
}

#[derive(Clone, Debug)]
pub struct Scene {
    pub image: RasterImage,
    truth: Vec<SceneObject>,
}

impl Scene {
    pub fn truth(&self, x: usize, y: usize) -> SceneObject {
        self.truth[y * SCENE_WIDTH + x]
    }

    pub fn object_mask(&self, object: SceneObject) -> BinaryMask {
        BinaryMask::from_fn(SCENE_WIDTH, SCENE_HEIGHT, |x, y| self.truth(x, y) == object)
    }
}

fn paint(image: &mut RasterImage, truth: &mut [SceneObject], x: usize, y: usize, color: [u8; 3], obj: SceneObject) {
    image.set_pixel(x, y, &color);
    truth[y * image.width() + x] = obj;
}

fn left_lane_center(y: usize) -> f64 {
    10.0 + 35.0 * (119.0 - y as f64) / 119.0
}

fn right_lane_center(y: usize) -> f64 {
    80.0 + 50.0 * y as f64 / 119.0
}

fn in_barrel(x: usize, y: usize) -> bool {
    (BARREL_X.0..=BARREL_X.1).contains(&x) && (BARREL_Y.0..=BARREL_Y.1).contains(&y)
}

/// A 160x120 frame holding a striped barrel and two lanes, the right lane
/// passing behind the barrel. With `noise` the frame also gets background
/// texture, single-pixel shot noise, bright blobs on the barrel's lower half
/// and dark mud patches on every visible lane piece.
pub fn generate_scene(seed: u64, noise: bool) -> Scene {
    let (w, h) = (SCENE_WIDTH, SCENE_HEIGHT);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut image = RasterImage::filled_rgb(w, h, GRASS);
    let mut truth = vec![SceneObject::Background; w * h];

    if noise {
        for y in 0..h {
            for x in 0..w {
                let jitter: i16 = rng.random_range(-6..=6);
                let px = GRASS.map(|c| (i16::from(c) + jitter) as u8);
                image.set_pixel(x, y, &px);
            }
        }
    }
    for y in 0..h {
        for x in 0..w {
            let xf = x as f64;
            if (xf - left_lane_center(y)).abs() <= LANE_HALF_WIDTH {
                paint(&mut image, &mut truth, x, y, LANE, SceneObject::LeftLane);
            } else if (xf - right_lane_center(y)).abs() <= LANE_HALF_WIDTH {
                paint(&mut image, &mut truth, x, y, LANE, SceneObject::RightLane);
            }
            if in_barrel(x, y) {
                let striped = STRIPE_ROWS.iter().any(|&(a, b)| (a..=b).contains(&y));
                paint(&mut image, &mut truth, x, y, if striped { STRIPE } else { BARREL }, SceneObject::Barrel);
            }
        }
    }
    if !noise {
        return Scene { image, truth };
    }

    // Mud patches on the lane line, sheared to follow it and narrower than
    // the lane so the lane stays connected around them.
    let lanes: [(fn(usize) -> f64, [usize; 3]); 3] = [
        (left_lane_center, [40, 60, 80]),
        (right_lane_center, [8, 20, 32]),
        (right_lane_center, [80, 90, 100]),
    ];
    for (center, rows) in lanes {
        for row in rows {
            let top = (row as i64 + rng.random_range(-2..=2)) as usize;
            for y in top..top + 4 {
                let x0 = center(y).round() as usize - 1;
                for x in x0..x0 + 3 {
                    paint(&mut image, &mut truth, x, y, MUD, SceneObject::Noise);
                }
            }
        }
    }

    // Bright blobs near the bottom of the barrel, in three of six slots.
    let mut slots: Vec<(usize, usize)> = [78, 85, 92].iter().flat_map(|&x| [84, 91].map(|y| (x, y))).collect();
    let mut placed = Vec::new();
    for _ in 0..3 {
        let (x, y) = slots.swap_remove(rng.random_range(0..slots.len()));
        placed.push((x + rng.random_range(0..=1), y + rng.random_range(0..=1)));
    }
    for (x0, y0) in placed {
        for y in y0..y0 + 4 {
            for x in x0..x0 + 4 {
                paint(&mut image, &mut truth, x, y, BLOB, SceneObject::Noise);
            }
        }
    }

    // Single-pixel shot noise: holes in objects, speckles on grass.
    for y in 0..h {
        for x in 0..w {
            if !rng.random_bool(SHOT_NOISE_RATE) {
                continue;
            }
            match truth[y * w + x] {
                SceneObject::Background => paint(&mut image, &mut truth, x, y, SPECKLE, SceneObject::Noise),
                SceneObject::Barrel => paint(&mut image, &mut truth, x, y, BLOB, SceneObject::Noise),
                SceneObject::LeftLane | SceneObject::RightLane => paint(&mut image, &mut truth, x, y, GRASS, SceneObject::Noise),
                SceneObject::Noise => {}
            }
        }
    }
    Scene { image, truth }
}

/// Consecutive noisy scenes with seeds `seed, seed + 1, ...`.
pub fn generate_sequence(count: usize, seed: u64) -> Vec<RasterImage> {
    (0..count as u64).map(|i| generate_scene(seed.wrapping_add(i), true).image).collect()
}

/// How flipped sites are laid out on a calibration field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoisePattern {
    /// No two flipped sites within one pixel of each other (8-neighborhood).
    Isolated,
    /// Horizontally adjacent pairs; every pair touches the left or right border.
    BorderPairs,
    /// Independent flips.
    Random,
}

/// An all-`+1` truth with data `+1` except at flipped sites (`-1`).
/// `fraction` is the target share of flipped sites.
pub fn noise_field(
    width: usize,
    height: usize,
    fraction: f64,
    pattern: NoisePattern,
    seed: u64,
) -> (DataField, LabelField) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = width * height;
    let target = (fraction * n as f64).round() as usize;
    let mut flipped = vec![false; n];
    match pattern {
        NoisePattern::Random => {
            for f in &mut flipped {
                *f = rng.random_bool(fraction);
            }
        }
        NoisePattern::Isolated => {
            let mut count = 0;
            let mut attempts = 0;
            while count < target && attempts < 100 * n {
                attempts += 1;
                let (x, y) = (rng.random_range(0..width), rng.random_range(0..height));
                let clear = (y.saturating_sub(1)..=(y + 1).min(height - 1))
                    .all(|yy| (x.saturating_sub(1)..=(x + 1).min(width - 1)).all(|xx| !flipped[yy * width + xx]));
                if clear {
                    flipped[y * width + x] = true;
                    count += 1;
                }
            }
        }
        NoisePattern::BorderPairs => {
            let mut rows: Vec<usize> = (0..height).step_by(2).collect();
            for i in (1..rows.len()).rev() {
                rows.swap(i, rng.random_range(0..=i));
            }
            for (i, &y) in rows.iter().take(target.div_ceil(2)).enumerate() {
                let x = if i % 2 == 0 { 0 } else { width - 2 };
                flipped[y * width + x] = true;
                flipped[y * width + x + 1] = true;
            }
        }
    }
    let values = flipped.iter().map(|&f| if f { -1.0 } else { 1.0 }).collect();
    let data = DataField::new(width, height, values).expect("sized to the lattice");
    (data, LabelField::uniform(width, height, Label::Plus))
}

/// One synthetic segment of the given class placed in a frame of
/// `frame_dims`. `ClassLabel::Error` yields noise: mostly small specks, some
/// long flat bars.
pub fn synthetic_segment(class: ClassLabel, rng: &mut impl Rng, id: usize, frame_dims: (usize, usize)) -> Segment {
    let (fw, fh) = frame_dims;
    let pixels = match class {
        ClassLabel::LeftLane => diagonal_lane(rng, frame_dims),
        ClassLabel::RightLane => diagonal_lane(rng, frame_dims).into_iter().map(|(x, y)| (fw - 1 - x, y)).collect(),
        ClassLabel::TrafficFixture => {
            let w = rng.random_range(15..=35usize);
            let h = (w as f64 / rng.random_range(0.5..0.85)).round() as usize;
            filled_shape(rng, frame_dims, w, h.min(fh), 0.92, 0.0)
        }
        ClassLabel::Ramp => {
            let w = rng.random_range(50..=90usize);
            let h = (w as f64 / rng.random_range(1.8..3.0)).round() as usize;
            filled_shape(rng, frame_dims, w.min(fw), h, 0.97, 0.15)
        }
        ClassLabel::Error => {
            if rng.random_bool(0.75) {
                speck(rng, frame_dims)
            } else {
                let len = rng.random_range(40..=60usize);
                let thick = rng.random_range(2..=3usize);
                let (x0, y0) = (rng.random_range(0..fw - len), rng.random_range(0..fh - thick));
                (y0..y0 + thick).flat_map(|y| (x0..x0 + len).map(move |x| (x, y))).collect()
            }
        }
    };
    Segment::from_pixels(id, Label::Plus, pixels)
}

/// `per_class` segments of each trainable class plus `noise` Error segments,
/// with ids in generation order.
pub fn synthetic_segments(per_class: usize, noise: usize, seed: u64, frame_dims: (usize, usize)) -> Vec<(Segment, ClassLabel)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plan = ClassLabel::CLASSES
        .iter()
        .flat_map(|&c| std::iter::repeat_n(c, per_class))
        .chain(std::iter::repeat_n(ClassLabel::Error, noise));
    plan.enumerate()
        .map(|(id, class)| (synthetic_segment(class, &mut rng, id, frame_dims), class))
        .collect()
}

/// A band of width 3..=5 rising to the right from the lower-left quarter.
fn diagonal_lane(rng: &mut impl Rng, (fw, fh): (usize, usize)) -> Vec<(usize, usize)> {
    let width = rng.random_range(3..=5usize);
    let y_top = rng.random_range(fh / 8..=fh * 3 / 8);
    let y_bot = rng.random_range(fh * 5 / 6..fh);
    let x_bot = rng.random_range(fw / 32..=fw * 7 / 32);
    let dx = rng.random_range(fw * 5 / 32..=fw * 9 / 32) as f64;
    let mut px = Vec::new();
    for y in y_top..=y_bot {
        let c = x_bot as f64 + dx * (y_bot - y) as f64 / (y_bot - y_top) as f64;
        let x0 = (c - width as f64 / 2.0).round().max(0.0) as usize;
        px.extend((x0..x0 + width).filter(|&x| x < fw).map(|x| (x, y)));
    }
    px
}

/// A `w`x`h` box, optionally narrowing toward the top by `taper` of its width
/// per side, with each pixel kept at probability `fill`. Corners of the
/// bottom row are always kept so the bounding box is exact.
fn filled_shape(rng: &mut impl Rng, (fw, fh): (usize, usize), w: usize, h: usize, fill: f64, taper: f64) -> Vec<(usize, usize)> {
    let h = h.clamp(1, fh);
    let x0 = rng.random_range(0..=fw - w);
    let y0 = rng.random_range(0..=fh - h);
    let mut px = Vec::new();
    for r in 0..h {
        let inset = if h > 1 { (taper * w as f64 * (h - 1 - r) as f64 / (h - 1) as f64).round() as usize } else { 0 };
        for c in inset..w - inset {
            let corner = r == h - 1 && (c == 0 || c == w - 1);
            let top_corner = r == 0 && (c == inset || c == w - 1 - inset);
            if corner || top_corner || rng.random_bool(fill) {
                px.push((x0 + c, y0 + r));
            }
        }
    }
    px
}

/// A random walk of 1..=30 distinct pixels.
fn speck(rng: &mut impl Rng, (fw, fh): (usize, usize)) -> Vec<(usize, usize)> {
    let target = rng.random_range(1..=30usize);
    let mut p = (rng.random_range(0..fw), rng.random_range(0..fh));
    let mut px = vec![p];
    for _ in 0..200 {
        if px.len() == target {
            break;
        }
        let (dx, dy) = [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)][rng.random_range(0..4)];
        let (nx, ny) = (p.0 as i64 + dx, p.1 as i64 + dy);
        if nx < 0 || ny < 0 || nx >= fw as i64 || ny >= fh as i64 {
            continue;
        }
        p = (nx as usize, ny as usize);
        if !px.contains(&p) {
            px.push(p);
        }
    }
    px
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::extract_features;

    #[test]
    fn scene_geometry_is_seed_independent() {
        let a = generate_scene(1, true);
        let b = generate_scene(2, true);
        let clean = generate_scene(1, false);
        assert_ne!(a.image, b.image);
        for y in 0..SCENE_HEIGHT {
            for x in 0..SCENE_WIDTH {
                let t = clean.truth(x, y);
                for noisy in [&a, &b] {
                    let n = noisy.truth(x, y);
                    assert!(n == t || n == SceneObject::Noise, "({x},{y}) {t:?} vs {n:?}");
                }
            }
        }
    }

    #[test]
    fn clean_scene_has_three_objects() {
        let s = generate_scene(DEFAULT_SEED, false);
        for obj in [SceneObject::LeftLane, SceneObject::RightLane, SceneObject::Barrel] {
            assert!(s.object_mask(obj).count() > 200, "{obj:?}");
        }
        assert_eq!(s.object_mask(SceneObject::Noise).count(), 0);
        // the right lane is visible both above and below the barrel
        assert_eq!(s.truth(95, 40), SceneObject::RightLane);
        assert_eq!(s.truth(123, 105), SceneObject::RightLane);
        assert_eq!(s.truth(100, 70), SceneObject::Barrel);
    }

    #[test]
    fn scene_is_reproducible() {
        assert_eq!(generate_scene(9, true).image, generate_scene(9, true).image);
    }

    #[test]
    fn isolated_noise_has_no_touching_flips() {
        let (data, _) = noise_field(64, 64, 0.01, NoisePattern::Isolated, 1);
        let flips: Vec<_> = (0..64)
            .flat_map(|y| (0..64).map(move |x| (x, y)))
            .filter(|&(x, y)| data.get(x, y) < 0.0)
            .collect();
        assert_eq!(flips.len(), 41);
        for (i, a) in flips.iter().enumerate() {
            for b in &flips[i + 1..] {
                assert!(a.0.abs_diff(b.0) > 1 || a.1.abs_diff(b.1) > 1);
            }
        }
    }

    #[test]
    fn border_pairs_touch_the_border() {
        let (data, _) = noise_field(32, 32, 0.02, NoisePattern::BorderPairs, 4);
        let mut count = 0;
        for y in 0..32 {
            for x in 0..32 {
                if data.get(x, y) < 0.0 {
                    count += 1;
                    assert!(x <= 1 || x >= 30);
                }
            }
        }
        assert_eq!(count, 20);
    }

    #[test]
    fn generated_segments_have_class_shapes() {
        let dims = (SCENE_WIDTH, SCENE_HEIGHT);
        for (seg, class) in synthetic_segments(30, 30, 11, dims) {
            let f = extract_features(&seg, dims);
            match class {
                ClassLabel::LeftLane => assert!(f.area_ratio < 0.25 && f.centroid_x_frac < 0.5),
                ClassLabel::RightLane => assert!(f.area_ratio < 0.25 && f.centroid_x_frac > 0.5),
                ClassLabel::TrafficFixture => assert!(f.area_ratio > 0.8 && f.aspect < 0.9),
                ClassLabel::Ramp => assert!(f.area_ratio > 0.65 && f.aspect > 1.7),
                ClassLabel::Error => assert!(f.pixel_count <= 30 || f.aspect > 10.0),
            }
        }
    }
}
