//! Blob lines: thick strokes striking through the bodies of a text line.
//!
//! A [`BlobLineSet`] holds the labeled blob lines of one page and answers
//! exact Euclidean distance queries from any pixel to the nearest pixel of a
//! given blob line. Queries go through a per-label k-d tree over the label's
//! boundary pixels (the nearest pixel of a set to an outside point always
//! lies on its boundary); full distance fields are available through
//! [`BlobLineSet::distance_field`].

use log::warn;

use crate::components::{label_components, Connectivity, Point};
use crate::geometry::{rasterize_ring, Ring};
use crate::morphology::{squared_distance_transform, stamp_brush, thin, UNREACHABLE};
use crate::raster::{BinaryPage, LabelRaster};
use crate::{Error, Result};

/// Brush diameter of manually drawn blob lines.
pub const DEFAULT_THICKNESS: u32 = 12;

/// Static 2-d tree over integer points, stored as an implicit balanced tree.
#[derive(Debug, Clone)]
struct KdTree {
    points: Vec<(i32, i32)>,
}

impl KdTree {
    fn build(mut points: Vec<(i32, i32)>) -> Self {
        fn rec(pts: &mut [(i32, i32)], depth: usize) {
            if pts.len() <= 1 {
                return;
            }
            let mid = pts.len() / 2;
            if depth.is_multiple_of(2) {
                pts.select_nth_unstable_by_key(mid, |p| (p.0, p.1));
            } else {
                pts.select_nth_unstable_by_key(mid, |p| (p.1, p.0));
            }
            let (left, right) = pts.split_at_mut(mid);
            rec(left, depth + 1);
            rec(&mut right[1..], depth + 1);
        }
        rec(&mut points, 0);
        KdTree { points }
    }

    fn nearest_squared(&self, q: (i32, i32)) -> u64 {
        fn rec(pts: &[(i32, i32)], depth: usize, q: (i32, i32), best: &mut u64) {
            if pts.is_empty() {
                return;
            }
            let mid = pts.len() / 2;
            let p = pts[mid];
            let (dx, dy) = ((p.0 - q.0) as i64, (p.1 - q.1) as i64);
            *best = (*best).min((dx * dx + dy * dy) as u64);
            let diff = if depth.is_multiple_of(2) {
                (q.0 - p.0) as i64
            } else {
                (q.1 - p.1) as i64
            };
            let (near, far) = if diff < 0 {
                (&pts[..mid], &pts[mid + 1..])
            } else {
                (&pts[mid + 1..], &pts[..mid])
            };
            rec(near, depth + 1, q, best);
            if ((diff * diff) as u64) <= *best {
                rec(far, depth + 1, q, best);
            }
        }
        let mut best = UNREACHABLE;
        rec(&self.points, 0, q, &mut best);
        best
    }
}

/// Full-page map of squared distances to one blob line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceField {
    width: u32,
    height: u32,
    squared: Vec<u64>,
}

impl DistanceField {
    pub fn squared(&self, x: u32, y: u32) -> u64 {
        self.squared[y as usize * self.width as usize + x as usize]
    }

    pub fn get(&self, x: u32, y: u32) -> f64 {
        (self.squared(x, y) as f64).sqrt()
    }

    pub fn size(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn squared_values(&self) -> &[u64] {
        &self.squared
    }
}

/// The labeled blob lines of a page.
#[derive(Debug, Clone)]
pub struct BlobLineSet {
    labels: LabelRaster,
    count: usize,
    trees: Vec<KdTree>,
}

impl BlobLineSet {
    /// Blob lines from an already labeled raster; ids are compacted onto
    /// `1..=count` preserving their order.
    pub fn from_label_raster(labels: &LabelRaster) -> Result<Self> {
        let labels = labels.compacted();
        let count = labels.max_label() as usize;
        if count == 0 {
            return Err(Error::NoBlobLines);
        }
        let (w, h) = labels.size();
        let mut boundary: Vec<Vec<(i32, i32)>> = vec![Vec::new(); count];
        for y in 0..h {
            for x in 0..w {
                let l = labels.get(x, y);
                if l == 0 {
                    continue;
                }
                let interior = (-1i64..=1).all(|dy| {
                    (-1i64..=1).all(|dx| {
                        let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                        nx >= 0
                            && ny >= 0
                            && nx < w as i64
                            && ny < h as i64
                            && labels.get(nx as u32, ny as u32) == l
                    })
                });
                if !interior {
                    boundary[l as usize - 1].push((x as i32, y as i32));
                }
            }
        }
        let trees = boundary.into_iter().map(KdTree::build).collect();
        Ok(BlobLineSet {
            labels,
            count,
            trees,
        })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn size(&self) -> (u32, u32) {
        self.labels.size()
    }

    pub fn label_raster(&self) -> &LabelRaster {
        &self.labels
    }

    /// Blob line covering pixel `(x, y)`, or 0.
    pub fn label_at(&self, x: u32, y: u32) -> u32 {
        self.labels.get(x, y)
    }

    fn check_label(&self, label: u32) -> Result<()> {
        if label == 0 || label as usize > self.count {
            return Err(Error::LabelOutOfRange {
                label,
                count: self.count as u32,
            });
        }
        Ok(())
    }

    /// Exact squared distance from pixel `(x, y)` to blob line `label`.
    pub fn pixel_distance_squared(&self, label: u32, x: u32, y: u32) -> Result<u64> {
        self.check_label(label)?;
        if self.labels.get(x, y) == label {
            return Ok(0);
        }
        Ok(self.trees[label as usize - 1].nearest_squared((x as i32, y as i32)))
    }

    pub fn pixel_distance(&self, label: u32, x: u32, y: u32) -> Result<f64> {
        Ok((self.pixel_distance_squared(label, x, y)? as f64).sqrt())
    }

    /// Full distance field of one blob line, by exact distance transform.
    pub fn distance_field(&self, label: u32) -> Result<DistanceField> {
        self.check_label(label)?;
        let (width, height) = self.labels.size();
        Ok(DistanceField {
            width,
            height,
            squared: squared_distance_transform(&self.labels.mask_of(label)),
        })
    }
}

/// Each 8-connected component of the mask becomes one blob line, numbered
/// in raster order of its first pixel.
pub fn build_blob_line_set(mask: &BinaryPage) -> Result<BlobLineSet> {
    let (labels, count) = label_components(mask, Connectivity::Eight);
    if count == 0 {
        return Err(Error::NoBlobLines);
    }
    BlobLineSet::from_label_raster(&labels)
}

/// Distance from a real-valued point to the nearest pixel of blob line
/// `label`. The point is rounded to the nearest pixel first.
pub fn nearest_blob_distance(set: &BlobLineSet, label: u32, point: Point) -> Result<f64> {
    set.check_label(label)?;
    let (w, h) = set.size();
    let (x, y) = (point.x.round(), point.y.round());
    if !(x >= 0.0 && y >= 0.0 && x < w as f64 && y < h as f64) {
        return Err(Error::PointOutOfBounds {
            x: point.x,
            y: point.y,
        });
    }
    set.pixel_distance(label, x as u32, y as u32)
}

/// Longest shortest path (in 8-connected steps) inside the largest connected
/// piece of a skeleton.
fn longest_skeleton_path(skeleton: &BinaryPage) -> Vec<(u32, u32)> {
    let (labels, count) = label_components(skeleton, Connectivity::Eight);
    if count == 0 {
        return Vec::new();
    }
    let mut sizes = vec![0usize; count + 1];
    for &l in labels.labels() {
        sizes[l as usize] += 1;
    }
    // Largest piece, lowest id on ties.
    let best = (1..=count)
        .max_by_key(|&l| (sizes[l], std::cmp::Reverse(l)))
        .unwrap() as u32;
    let (w, h) = labels.size();
    let start = labels.labels().iter().position(|&l| l == best).unwrap();
    let start = ((start % w as usize) as u32, (start / w as usize) as u32);

    let bfs = |from: (u32, u32)| -> (Vec<u32>, (u32, u32)) {
        let mut prev = vec![u32::MAX; (w * h) as usize];
        let idx = |p: (u32, u32)| (p.1 * w + p.0) as usize;
        let mut queue = std::collections::VecDeque::from([from]);
        prev[idx(from)] = idx(from) as u32;
        let mut last = from;
        while let Some(p) = queue.pop_front() {
            last = p;
            for &(dx, dy) in Connectivity::Eight.offsets() {
                let (nx, ny) = (p.0 as i64 + dx as i64, p.1 as i64 + dy as i64);
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                let n = (nx as u32, ny as u32);
                if labels.get(n.0, n.1) == best && prev[idx(n)] == u32::MAX {
                    prev[idx(n)] = idx(p) as u32;
                    queue.push_back(n);
                }
            }
        }
        (prev, last)
    };
    let (_, a) = bfs(start);
    let (prev, b) = bfs(a);
    let mut path = vec![b];
    let mut cur = (b.1 * w + b.0) as usize;
    let target = (a.1 * w + a.0) as usize;
    while cur != target {
        cur = prev[cur] as usize;
        path.push(((cur % w as usize) as u32, (cur / w as usize) as u32));
    }
    path
}

/// One blob line per polygon: skeleton of the interior, pruned to its
/// longest path, stamped with a round brush and clipped to the interior.
/// Blob `i + 1` of the returned raster comes from `polygons[i]`; degenerate
/// polygons are skipped and the remaining ids are compacted.
pub fn skeleton_label_raster(
    polygons: &[Ring],
    page_size: (u32, u32),
    thickness: u32,
) -> Result<LabelRaster> {
    let groups: Vec<&[Ring]> = polygons.iter().map(std::slice::from_ref).collect();
    stamp_groups(&groups, page_size, thickness)
}

/// Like [`skeleton_label_raster`], but every polygon of a group shares one
/// blob id, so a line drawn as several fragments stays a single blob line.
pub fn grouped_skeleton_label_raster(
    lines: &[(u32, Vec<Ring>)],
    page_size: (u32, u32),
    thickness: u32,
) -> Result<LabelRaster> {
    let groups: Vec<&[Ring]> = lines.iter().map(|(_, rings)| rings.as_slice()).collect();
    stamp_groups(&groups, page_size, thickness)
}

fn stamp_groups(groups: &[&[Ring]], page_size: (u32, u32), thickness: u32) -> Result<LabelRaster> {
    let (w, h) = page_size;
    let mut out = LabelRaster::new(w, h)?;
    let mut next = 0u32;
    for (i, rings) in groups.iter().enumerate() {
        let mut stamped = false;
        for ring in rings.iter() {
            if ring.len() < 3 || ring.area() == 0.0 {
                warn!("skipping degenerate polygon in line {i} (zero area)");
                continue;
            }
            let interior = rasterize_ring(ring, w, h);
            if interior.is_blank() {
                warn!("skipping polygon in line {i}: covers no pixel centre inside the page");
                continue;
            }
            let path = longest_skeleton_path(&thin(&interior));
            let mut blob = BinaryPage::new(w, h)?;
            stamp_brush(&mut blob, &path, thickness);
            if !stamped {
                next += 1;
                stamped = true;
            }
            for y in 0..h {
                for x in 0..w {
                    if blob.get(x, y) && interior.get(x, y) && out.get(x, y) == 0 {
                        out.set(x, y, next);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Blob-line mask derived from ground-truth line polygons.
pub fn skeleton_labels_from_polygons(
    polygons: &[Ring],
    page_size: (u32, u32),
    thickness: u32,
) -> Result<BinaryPage> {
    Ok(skeleton_label_raster(polygons, page_size, thickness)?.support())
}
