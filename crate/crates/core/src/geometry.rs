//! Closed integer polygons on the pixel-corner grid.
//!
//! Pixel `(x, y)` covers the unit square `[x, x+1] x [y, y+1]`. A ring
//! covers a pixel when the pixel center `(x + 0.5, y + 0.5)` lies inside it
//! (even-odd rule). Centers never coincide with integer vertices.

use serde::{Deserialize, Serialize};

use crate::components::{components_from_labels, label_components, Connectivity};
use crate::raster::BinaryPage;

/// A closed ring; the closing edge from the last point back to the first is
/// implicit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ring {
    pub points: Vec<(i64, i64)>,
}

impl Ring {
    pub fn new(points: Vec<(i64, i64)>) -> Self {
        Ring { points }
    }

    /// Axis-aligned rectangle covering `width x height` pixels from `(x, y)`.
    pub fn rectangle(x: i64, y: i64, width: i64, height: i64) -> Self {
        Ring::new(vec![
            (x, y),
            (x + width, y),
            (x + width, y + height),
            (x, y + height),
        ])
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn edges(&self) -> impl Iterator<Item = ((i64, i64), (i64, i64))> + '_ {
        let n = self.points.len();
        (0..n).map(move |i| (self.points[i], self.points[(i + 1) % n]))
    }

    /// Twice the signed area (positive when clockwise in image coordinates).
    pub fn signed_area2(&self) -> i64 {
        self.edges()
            .map(|((x0, y0), (x1, y1))| x0 * y1 - x1 * y0)
            .sum()
    }

    pub fn area(&self) -> f64 {
        self.signed_area2().abs() as f64 / 2.0
    }

    /// Even-odd containment of a real point.
    pub fn contains(&self, px: f64, py: f64) -> bool {
        let mut inside = false;
        for ((x0, y0), (x1, y1)) in self.edges() {
            let (x0, y0, x1, y1) = (x0 as f64, y0 as f64, x1 as f64, y1 as f64);
            if (y0 > py) != (y1 > py) {
                let xi = x0 + (py - y0) * (x1 - x0) / (y1 - y0);
                if px < xi {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn covers_pixel(&self, x: u32, y: u32) -> bool {
        self.contains(x as f64 + 0.5, y as f64 + 0.5)
    }

    pub fn translated(&self, dx: i64, dy: i64) -> Ring {
        Ring::new(self.points.iter().map(|&(x, y)| (x + dx, y + dy)).collect())
    }

    /// Whether two non-adjacent edges cross or overlap.
    pub fn is_self_intersecting(&self) -> bool {
        let edges: Vec<_> = self.edges().collect();
        let n = edges.len();
        for i in 0..n {
            for j in i + 1..n {
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                if segments_cross(edges[i], edges[j]) {
                    return true;
                }
            }
        }
        false
    }
}

fn orient(a: (i64, i64), b: (i64, i64), c: (i64, i64)) -> i64 {
    ((b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)).signum()
}

fn on_segment(a: (i64, i64), b: (i64, i64), p: (i64, i64)) -> bool {
    p.0 >= a.0.min(b.0) && p.0 <= a.0.max(b.0) && p.1 >= a.1.min(b.1) && p.1 <= a.1.max(b.1)
}

/// Proper crossings and collinear overlaps; touching at a shared vertex of
/// the ring (a pinch point) is not counted.
fn segments_cross(s: ((i64, i64), (i64, i64)), t: ((i64, i64), (i64, i64))) -> bool {
    let (a, b) = s;
    let (c, d) = t;
    let (o1, o2, o3, o4) = (
        orient(a, b, c),
        orient(a, b, d),
        orient(c, d, a),
        orient(c, d, b),
    );
    if o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0 {
        return true;
    }
    if o1 == 0 && o2 == 0 {
        // Collinear: overlapping interiors.
        let key = |p: (i64, i64)| if a.0 != b.0 { p.0 } else { p.1 };
        let (s0, s1) = (key(a).min(key(b)), key(a).max(key(b)));
        let (t0, t1) = (key(c).min(key(d)), key(c).max(key(d)));
        return s0.max(t0) < s1.min(t1);
    }
    // A vertex of one segment lying strictly inside the other.
    let strictly =
        |x: (i64, i64), y: (i64, i64), p: (i64, i64)| on_segment(x, y, p) && p != x && p != y;
    (o1 == 0 && strictly(a, b, c))
        || (o2 == 0 && strictly(a, b, d))
        || (o3 == 0 && strictly(c, d, a))
        || (o4 == 0 && strictly(c, d, b))
}

/// Rasterizes the interior of `ring` onto a `width x height` page.
pub fn rasterize_ring(ring: &Ring, width: u32, height: u32) -> BinaryPage {
    let mut page = BinaryPage::new(width, height).expect("non-zero page size");
    fill_ring(ring, &mut page);
    page
}

/// Sets every pixel covered by `ring`.
pub fn fill_ring(ring: &Ring, page: &mut BinaryPage) {
    if ring.points.len() < 3 {
        return;
    }
    let (w, h) = page.size();
    let min_y = ring.points.iter().map(|p| p.1).min().unwrap().max(0);
    let max_y = ring.points.iter().map(|p| p.1).max().unwrap().min(h as i64);
    let mut xs = Vec::new();
    for y in min_y..max_y {
        let yc = y as f64 + 0.5;
        xs.clear();
        for ((x0, y0), (x1, y1)) in ring.edges() {
            let (fy0, fy1) = (y0 as f64, y1 as f64);
            if (fy0 > yc) != (fy1 > yc) {
                xs.push(x0 as f64 + (yc - fy0) * (x1 - x0) as f64 / (fy1 - fy0));
            }
        }
        xs.sort_by(|a, b| a.total_cmp(b));
        for pair in xs.chunks_exact(2) {
            // Centers x + 0.5 in [pair[0], pair[1]).
            let start = (pair[0] - 0.5).ceil().max(0.0) as i64;
            let end = ((pair[1] - 0.5).ceil() as i64).min(w as i64);
            for x in start..end {
                page.set(x as u32, y as u32, true);
            }
        }
    }
}

/// Outer boundary of every 8-connected region of `mask`, traced along pixel
/// edges. Each ring covers its region with holes filled. Diagonal contacts
/// make the ring touch itself at a vertex without crossing.
pub fn trace_outer_rings(mask: &BinaryPage) -> Vec<Ring> {
    let (labels, count) = label_components(mask, Connectivity::Eight);
    components_from_labels(&labels, count)
        .iter()
        .map(|c| {
            let inside = |x: i64, y: i64| {
                x >= 0
                    && y >= 0
                    && (x as u32) < mask.width()
                    && (y as u32) < mask.height()
                    && labels.get(x as u32, y as u32) == c.id
            };
            let start = c
                .pixels()
                .min_by_key(|&(x, y)| (y, x))
                .expect("non-empty component");
            trace_from((start.0 as i64, start.1 as i64), inside)
        })
        .collect()
}

/// Walks the boundary keeping the region on the right, starting at the top
/// left corner of the region's first pixel in raster order.
fn trace_from(start: (i64, i64), inside: impl Fn(i64, i64) -> bool) -> Ring {
    // E, S, W, N in image coordinates (y down); right turn is +1.
    const DIRS: [(i64, i64); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];
    let ahead = |(x, y): (i64, i64), d: usize| -> (bool, bool) {
        let (left, right) = match d {
            0 => ((x, y - 1), (x, y)),
            1 => ((x, y), (x - 1, y)),
            2 => ((x - 1, y), (x - 1, y - 1)),
            _ => ((x - 1, y - 1), (x, y - 1)),
        };
        (inside(left.0, left.1), inside(right.0, right.1))
    };
    let mut points = Vec::new();
    let (mut v, mut d) = (start, 3usize);
    loop {
        let next = match ahead(v, d) {
            (true, _) => (d + 3) % 4,
            (false, true) => d,
            (false, false) => (d + 1) % 4,
        };
        if next != d {
            points.push(v);
        }
        d = next;
        v = (v.0 + DIRS[d].0, v.1 + DIRS[d].1);
        if v == start && d == 3 {
            break;
        }
    }
    Ring::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_covers_exact_pixels() {
        let r = Ring::rectangle(2, 3, 5, 4);
        let p = rasterize_ring(&r, 12, 12);
        assert_eq!(p.foreground_count(), 20);
        assert!(p.get(2, 3) && p.get(6, 6) && !p.get(7, 6) && !p.get(6, 7));
        assert_eq!(r.area(), 20.0);
        assert!(!r.is_self_intersecting());
    }

    #[test]
    fn fill_agrees_with_containment() {
        let r = Ring::new(vec![(1, 1), (14, 3), (9, 8), (12, 14), (2, 11), (5, 6)]);
        let p = rasterize_ring(&r, 16, 16);
        for y in 0..16 {
            for x in 0..16 {
                assert_eq!(p.get(x, y), r.covers_pixel(x, y), "({x},{y})");
            }
        }
    }

    #[test]
    fn clipped_to_page() {
        let p = rasterize_ring(&Ring::rectangle(-3, -3, 6, 6), 4, 4);
        assert_eq!(p.foreground_count(), 9);
    }

    #[test]
    fn bow_tie_self_intersects() {
        let r = Ring::new(vec![(0, 0), (4, 4), (4, 0), (0, 4)]);
        assert!(r.is_self_intersecting());
    }

    /// Foreground plus every background pixel not 4-connected to the border.
    fn fill_holes(mask: &BinaryPage) -> BinaryPage {
        let (w, h) = mask.size();
        let mut outside = vec![false; (w * h) as usize];
        let mut stack: Vec<(u32, u32)> = (0..w)
            .flat_map(|x| [(x, 0), (x, h - 1)])
            .chain((0..h).flat_map(|y| [(0, y), (w - 1, y)]))
            .collect();
        while let Some((x, y)) = stack.pop() {
            let i = (y * w + x) as usize;
            if outside[i] || mask.get(x, y) {
                continue;
            }
            outside[i] = true;
            if x > 0 {
                stack.push((x - 1, y));
            }
            if y > 0 {
                stack.push((x, y - 1));
            }
            if x + 1 < w {
                stack.push((x + 1, y));
            }
            if y + 1 < h {
                stack.push((x, y + 1));
            }
        }
        BinaryPage::from_fn(w, h, |x, y| !outside[(y * w + x) as usize]).unwrap()
    }

    #[test]
    fn traces_square_and_diagonal_pair() {
        let sq =
            BinaryPage::from_fn(6, 6, |x, y| (1..4).contains(&x) && (2..4).contains(&y)).unwrap();
        assert_eq!(
            trace_outer_rings(&sq),
            vec![Ring::new(vec![(1, 2), (4, 2), (4, 4), (1, 4)])]
        );

        let diag = BinaryPage::from_fn(4, 4, |x, y| (x, y) == (1, 1) || (x, y) == (2, 2)).unwrap();
        let rings = trace_outer_rings(&diag);
        assert_eq!(rings.len(), 1);
        assert_eq!(rings[0].area(), 2.0);
        assert!(!rings[0].is_self_intersecting());
    }

    proptest::proptest! {
        #[test]
        fn rings_cover_regions_with_holes_filled(
            w in 1u32..14,
            h in 1u32..14,
            bits in proptest::collection::vec(proptest::bool::weighted(0.55), 196),
        ) {
            let mask = BinaryPage::from_fn(w, h, |x, y| bits[(y * 14 + x) as usize]).unwrap();
            let mut covered = BinaryPage::new(w, h).unwrap();
            for ring in trace_outer_rings(&mask) {
                proptest::prop_assert!(!ring.is_self_intersecting());
                fill_ring(&ring, &mut covered);
            }
            proptest::prop_assert_eq!(covered, fill_holes(&mask));
        }
    }
}
