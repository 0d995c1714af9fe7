use crate::mrf::{Label, LabelField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BoundingBox {
    pub x_min: usize,
    pub y_min: usize,
    pub x_max: usize,
    pub y_max: usize,
}

impl BoundingBox {
    pub fn width(&self) -> usize {
        self.x_max - self.x_min + 1
    }

    pub fn height(&self) -> usize {
        self.y_max - self.y_min + 1
    }

    pub fn area(&self) -> usize {
        self.width() * self.height()
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min as f64 && x <= self.x_max as f64 && y >= self.y_min as f64 && y <= self.y_max as f64
    }
}

/// A labeled region with its geometry. Pixels are stored as `(x, y)` in
/// raster order (row-major).
///
/// Segments produced by [`connected_components`] are 4-connected; segments
/// produced by graph merging are unions of such components and need not be.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub id: usize,
    pub label: Label,
    pixels: Vec<(usize, usize)>,
    bbox: BoundingBox,
    centroid: (f64, f64),
}

impl Segment {
    /// Builds a segment from a non-empty pixel list (any order, no duplicates).
    ///
    /// # Panics
    ///
    /// Panics if `pixels` is empty.
    pub fn from_pixels(id: usize, label: Label, mut pixels: Vec<(usize, usize)>) -> Segment {
        assert!(!pixels.is_empty(), "a segment needs at least one pixel");
        pixels.sort_unstable_by_key(|&(x, y)| (y, x));
        let mut bbox = BoundingBox {
            x_min: usize::MAX,
            y_min: usize::MAX,
            x_max: 0,
            y_max: 0,
        };
        let (mut sx, mut sy) = (0f64, 0f64);
        for &(x, y) in &pixels {
            bbox.x_min = bbox.x_min.min(x);
            bbox.y_min = bbox.y_min.min(y);
            bbox.x_max = bbox.x_max.max(x);
            bbox.y_max = bbox.y_max.max(y);
            sx += x as f64;
            sy += y as f64;
        }
        let n = pixels.len() as f64;
        Segment {
            id,
            label,
            pixels,
            bbox,
            centroid: (sx / n, sy / n),
        }
    }

    pub fn pixels(&self) -> &[(usize, usize)] {
        &self.pixels
    }

    pub fn pixel_count(&self) -> usize {
        self.pixels.len()
    }

    pub fn bbox(&self) -> BoundingBox {
        self.bbox
    }

    pub fn centroid(&self) -> (f64, f64) {
        self.centroid
    }

    /// Bounding-box extents `(width, height)`.
    pub fn axis_lengths(&self) -> (usize, usize) {
        (self.bbox.width(), self.bbox.height())
    }

    /// First pixel in raster order; segment ids follow this key.
    pub fn first_pixel(&self) -> (usize, usize) {
        self.pixels[0]
    }
}

/// Maximal 4-connected regions of equal label over the field's active sites.
/// Segment ids follow the raster order of each region's first pixel.
pub fn connected_components(field: &LabelField) -> Vec<Segment> {
    let (w, h) = field.dims();
    let labels = field.labels();
    let mut visited = vec![false; w * h];
    let mut segments = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if visited[start] || !field.is_active_index(start) {
            continue;
        }
        let label = labels[start];
        let mut pixels = Vec::new();
        visited[start] = true;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            pixels.push((x, y));
            let mut visit = |j: usize| {
                if !visited[j] && labels[j] == label && field.is_active_index(j) {
                    visited[j] = true;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        segments.push(Segment::from_pixels(segments.len(), label, pixels));
    }
    segments
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgcore::BinaryMask;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn field_from(rows: &[&str]) -> LabelField {
        let h = rows.len();
        let w = rows[0].len();
        let labels = rows
            .iter()
            .flat_map(|r| r.chars().map(|c| Label::from_bool(c == '#')))
            .collect();
        LabelField::new(w, h, labels).unwrap()
    }

    /// Flood fill over an explicit coordinate set.
    fn oracle_components(sites: &BTreeSet<(usize, usize)>) -> Vec<BTreeSet<(usize, usize)>> {
        let mut left = sites.clone();
        let mut out = Vec::new();
        while let Some(&seed) = left.iter().next() {
            let mut comp = BTreeSet::new();
            let mut frontier = vec![seed];
            while let Some(p) = frontier.pop() {
                if !left.remove(&p) {
                    continue;
                }
                comp.insert(p);
                let (x, y) = p;
                let mut cand = vec![(x + 1, y), (x, y + 1)];
                if x > 0 {
                    cand.push((x - 1, y));
                }
                if y > 0 {
                    cand.push((x, y - 1));
                }
                frontier.extend(cand.into_iter().filter(|c| left.contains(c)));
            }
            out.push(comp);
        }
        out
    }

    #[test]
    fn uniform_field_is_one_segment() {
        let segs = connected_components(&LabelField::uniform(5, 5, Label::Plus));
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].pixel_count(), 25);
        assert_eq!(segs[0].centroid(), (2.0, 2.0));
        assert_eq!(segs[0].axis_lengths(), (5, 5));
    }

    #[test]
    fn checkerboard_has_no_diagonal_links() {
        let segs = connected_components(&field_from(&["#.", ".#"]));
        assert_eq!(segs.len(), 4);
        assert!(segs.iter().all(|s| s.pixel_count() == 1));
        let firsts: Vec<_> = segs.iter().map(|s| s.first_pixel()).collect();
        assert_eq!(firsts, vec![(0, 0), (1, 0), (0, 1), (1, 1)]);
    }

    #[test]
    fn diagonal_blobs_stay_apart() {
        let f = field_from(&["##....", "##....", "..##..", "..##..", "......"]);
        let plus: Vec<_> = connected_components(&f).into_iter().filter(|s| s.label == Label::Plus).collect();
        let sites: BTreeSet<_> = (0..6)
            .flat_map(|x| (0..5).map(move |y| (x, y)))
            .filter(|&(x, y)| f.get(x, y) == Label::Plus)
            .collect();
        let oracle = oracle_components(&sites);
        assert_eq!(plus.len(), 2);
        assert_eq!(oracle.len(), 2);
        for s in &plus {
            let set: BTreeSet<_> = s.pixels().iter().copied().collect();
            assert!(oracle.contains(&set));
        }
    }

    #[test]
    fn inactive_sites_are_skipped() {
        let f = LabelField::uniform(4, 1, Label::Plus)
            .with_active(&BinaryMask::from_bits(4, 1, vec![true, true, false, true]).unwrap())
            .unwrap();
        let segs = connected_components(&f);
        assert_eq!(segs.iter().map(Segment::pixel_count).collect::<Vec<_>>(), vec![2, 1]);
    }

    proptest! {
        #[test]
        fn components_partition_and_respect_invariants(
            (w, h, bits) in (1usize..10, 1usize..10).prop_flat_map(|(w, h)| (Just(w), Just(h), proptest::collection::vec(any::<bool>(), w * h)))
        ) {
            let f = LabelField::new(w, h, bits.iter().map(|&b| Label::from_bool(b)).collect()).unwrap();
            let segs = connected_components(&f);
            let mut seen = BTreeSet::new();
            for (i, s) in segs.iter().enumerate() {
                prop_assert_eq!(s.id, i);
                prop_assert!(s.pixel_count() >= 1);
                prop_assert!(s.pixel_count() <= s.bbox().area());
                let (cx, cy) = s.centroid();
                prop_assert!(s.bbox().contains(cx, cy));
                for &(x, y) in s.pixels() {
                    prop_assert_eq!(f.get(x, y), s.label);
                    prop_assert!(seen.insert((x, y)));
                }
                // each component is one oracle component
                let set: BTreeSet<_> = s.pixels().iter().copied().collect();
                prop_assert_eq!(oracle_components(&set).len(), 1);
            }
            prop_assert_eq!(seen.len(), w * h);
            // raster order of first pixels
            let keys: Vec<_> = segs.iter().map(|s| { let (x, y) = s.first_pixel(); (y, x) }).collect();
            let mut sorted = keys.clone();
            sorted.sort();
            prop_assert_eq!(keys, sorted);
            // maximality: 4-neighbours with equal labels share a segment
            let mut owner = vec![0usize; w * h];
            for s in &segs { for &(x, y) in s.pixels() { owner[y * w + x] = s.id; } }
            for y in 0..h { for x in 0..w {
                if x + 1 < w && f.get(x, y) == f.get(x + 1, y) { prop_assert_eq!(owner[y * w + x], owner[y * w + x + 1]); }
                if y + 1 < h && f.get(x, y) == f.get(x, y + 1) { prop_assert_eq!(owner[y * w + x], owner[(y + 1) * w + x]); }
            }}
        }
    }
}
