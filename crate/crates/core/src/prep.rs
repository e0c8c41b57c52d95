//! Data preparation: test-time tiling, curved-line augmentation and a
//! synthetic page generator with exact ground truth.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::extract::{line_polygons, DEFAULT_CLOSING_RADIUS};
use crate::geometry::Ring;
use crate::raster::{BinaryPage, LabelRaster};
use crate::{Error, Result};

/// Sliding-window layout: `window`-sized tiles whose centered `inner`
/// windows partition the page.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TileSpec {
    pub window: u32,
    pub inner: u32,
}

impl Default for TileSpec {
    fn default() -> Self {
        TileSpec {
            window: 350,
            inner: 250,
        }
    }
}

impl TileSpec {
    pub fn validate(&self) -> Result<()> {
        if self.inner == 0 || self.inner > self.window {
            return Err(Error::TileSpec(format!(
                "inner {} must be in 1..={}",
                self.inner, self.window
            )));
        }
        if !(self.window - self.inner).is_multiple_of(2) {
            return Err(Error::TileSpec(format!(
                "window {} minus inner {} must be even",
                self.window, self.inner
            )));
        }
        Ok(())
    }

    /// Rim width around the inner window.
    pub fn margin(&self) -> u32 {
        (self.window - self.inner) / 2
    }

    /// Number of tiles across and down for a page.
    pub fn grid(&self, width: u32, height: u32) -> (u32, u32) {
        (width.div_ceil(self.inner), height.div_ceil(self.inner))
    }

    /// Inner window origins in page coordinates, row by row.
    pub fn offsets(&self, width: u32, height: u32) -> Vec<(u32, u32)> {
        let (nx, ny) = self.grid(width, height);
        (0..ny)
            .flat_map(|j| (0..nx).map(move |i| (i * self.inner, j * self.inner)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tile {
    /// Origin of the inner window in page coordinates.
    pub offset: (u32, u32),
    pub image: BinaryPage,
}

/// Cuts `page` into overlapping tiles. Pixels outside the page are
/// background.
pub fn tile_page(page: &BinaryPage, spec: &TileSpec) -> Result<Vec<Tile>> {
    spec.validate()?;
    let m = spec.margin() as i64;
    spec.offsets(page.width(), page.height())
        .into_iter()
        .map(|(ox, oy)| {
            let image = BinaryPage::from_fn(spec.window, spec.window, |x, y| {
                page.get_or_background(ox as i64 + x as i64 - m, oy as i64 + y as i64 - m)
            })?;
            Ok(Tile {
                offset: (ox, oy),
                image,
            })
        })
        .collect()
}

/// Reassembles a page from per-tile predictions, keeping only each tile's
/// inner window.
pub fn stitch_tiles(tiles: &[Tile], page_size: (u32, u32), spec: &TileSpec) -> Result<BinaryPage> {
    spec.validate()?;
    let (w, h) = page_size;
    let mut out = BinaryPage::new(w, h)?;
    let m = spec.margin();
    for (ox, oy) in spec.offsets(w, h) {
        let tile = tiles
            .iter()
            .find(|t| t.offset == (ox, oy))
            .ok_or(Error::MissingTile { x: ox, y: oy })?;
        tile.image.check_same_size(spec.window, spec.window)?;
        for y in 0..spec.inner.min(h - oy) {
            for x in 0..spec.inner.min(w - ox) {
                out.set(ox + x, oy + y, tile.image.get(x + m, y + m));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileEntry {
    pub x: u32,
    pub y: u32,
    pub file: String,
}

/// JSON description of a tiled page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileManifest {
    pub spec: TileSpec,
    pub width: u32,
    pub height: u32,
    pub tiles: Vec<TileEntry>,
}

impl TileManifest {
    pub fn new(
        spec: TileSpec,
        width: u32,
        height: u32,
        file_name: impl Fn(u32, u32) -> String,
    ) -> Self {
        let tiles = spec
            .offsets(width, height)
            .into_iter()
            .map(|(x, y)| TileEntry {
                x,
                y,
                file: file_name(x, y),
            })
            .collect();
        TileManifest {
            spec,
            width,
            height,
            tiles,
        }
    }
}

/// Bends a horizontal strip by 90 degrees and mirrors the result.
///
/// The rotation grows linearly from 0 at the left edge to 90 degrees at the
/// horizontal midpoint, so the left half of the strip's center line becomes
/// a quarter circle of radius `width / pi`; the right half continues
/// straight down. Output pixels are pulled back through the inverse map with
/// nearest-neighbour sampling. Returns `[warp, horizontal mirror, vertical
/// mirror, both]`.
pub fn augment_warp(strip: &BinaryPage) -> Result<[BinaryPage; 4]> {
    let (w, h) = strip.size();
    if w <= 1 || h <= 1 {
        return Err(Error::DegenerateStrip {
            width: w,
            height: h,
        });
    }
    let (wf, hf) = (w as f64, h as f64);
    let half = wf / 2.0;
    let radius = half / FRAC_PI_2;
    let yc = hf / 2.0;
    // Center of curvature.
    let (cx, cy) = (0.0, yc + radius);
    let out_w = (radius + yc).ceil() as u32;
    let out_h = (cy + (wf - half)).ceil() as u32;

    let source = |px: f64, py: f64| -> Option<(f64, f64)> {
        let (dx, dy) = (px - cx, py - cy);
        if dy <= 0.0 {
            if dx < 0.0 {
                return None;
            }
            let theta = dx.atan2(-dy);
            let rho = dx.hypot(dy);
            Some((radius * theta, radius - rho))
        } else {
            Some((half + dy, radius - dx))
        }
    };
    let warped = BinaryPage::from_fn(out_w, out_h, |x, y| {
        match source(x as f64 + 0.5, y as f64 + 0.5) {
            Some((u, v)) => {
                let (sx, sy) = (u.floor(), (v + yc).floor());
                sx >= 0.0 && sy >= 0.0 && sx < wf && sy < hf && strip.get(sx as u32, sy as u32)
            }
            None => false,
        }
    })?;
    let h_mirror = warped.flip_horizontal();
    let v_mirror = warped.flip_vertical();
    let both = h_mirror.flip_vertical();
    Ok([warped, h_mirror, v_mirror, both])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Orientation {
    Horizontal,
    /// Whole text block rotated about the page center.
    Skewed {
        degrees: f64,
    },
    /// Lines displaced vertically by one period of a sine wave.
    Curved {
        amplitude: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub width: u32,
    pub height: u32,
    pub lines: usize,
    /// Height of a word body.
    pub line_height: u32,
    /// Vertical space between consecutive word bodies.
    pub gap: u32,
    pub margin: u32,
    pub orientation: Orientation,
    /// Expected floating marks per word.
    pub diacritic_density: f64,
    /// Chance that a pair of consecutive lines is joined by a vertical stroke.
    pub bridge_probability: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            width: 600,
            height: 400,
            lines: 5,
            line_height: 16,
            gap: 32,
            margin: 20,
            orientation: Orientation::Horizontal,
            diacritic_density: 0.3,
            bridge_probability: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPage {
    pub page: BinaryPage,
    /// Line id per text pixel.
    pub labels: LabelRaster,
    pub blob_mask: BinaryPage,
    pub polygons: Vec<(u32, Vec<Ring>)>,
    pub bridges: usize,
}

/// One letter blob.
struct Word {
    x0: f64,
    x1: f64,
    /// Top edge ripple: amplitude, angular frequency, phase.
    ripple: (f64, f64, f64),
}

struct Mark {
    x: f64,
    y: f64,
    r: f64,
}

struct Bridge {
    /// Upper line index.
    line: usize,
    x0: f64,
    x1: f64,
}

struct Layout {
    top: f64,
    left: f64,
    block_width: f64,
    pitch: f64,
    body: f64,
    band: f64,
    words: Vec<Vec<Word>>,
    marks: Vec<Vec<Mark>>,
    bridges: Vec<Bridge>,
}

impl Layout {
    fn center(&self, line: usize) -> f64 {
        self.top + line as f64 * self.pitch + self.body / 2.0
    }

    /// Ground-truth line (1-based) at a frame point, and whether it lies on
    /// that line's blob band.
    fn classify(&self, fx: f64, fy: f64) -> (u32, u32) {
        let n = self.words.len();
        let nearest = ((fy - self.top - self.body / 2.0) / self.pitch).round();
        let mut text = 0;
        let mut blob = 0;
        for i in [nearest - 1.0, nearest, nearest + 1.0] {
            if i < 0.0 || i >= n as f64 {
                continue;
            }
            let i = i as usize;
            let c = self.center(i);
            let (top, bottom) = (c - self.body / 2.0, c + self.body / 2.0);
            let words = &self.words[i];
            if blob == 0
                && (fy - c).abs() <= self.band / 2.0
                && fx >= words[0].x0
                && fx < words[words.len() - 1].x1
            {
                blob = i as u32 + 1;
            }
            if text != 0 {
                continue;
            }
            let k = words.partition_point(|w| w.x1 <= fx);
            if let Some(w) = words.get(k).filter(|w| w.x0 <= fx) {
                let (a, om, ph) = w.ripple;
                let edge = top + a * (1.0 + (om * fx + ph).sin()) / 2.0;
                if fy >= edge && fy < bottom {
                    text = i as u32 + 1;
                    continue;
                }
            }
            if self.marks[i]
                .iter()
                .any(|m| (fx - m.x).powi(2) + (fy - m.y).powi(2) <= m.r * m.r)
            {
                text = i as u32 + 1;
            }
        }
        if text == 0 {
            for b in &self.bridges {
                let (c0, c1) = (self.center(b.line), self.center(b.line + 1));
                if fx >= b.x0 && fx < b.x1 && fy >= c0 && fy <= c1 {
                    text = if fy <= (c0 + c1) / 2.0 {
                        b.line as u32 + 1
                    } else {
                        b.line as u32 + 2
                    };
                }
            }
        }
        (text, blob)
    }
}

fn infeasible(msg: impl Into<String>) -> Error {
    Error::InfeasibleSynth(msg.into())
}

/// Block width that fits the page for the orientation, and its amplitude
/// for curved pages.
fn block_width(spec: &SynthSpec, block_height: f64) -> Result<f64> {
    let (aw, ah) = (
        spec.width as f64 - 2.0 * spec.margin as f64,
        spec.height as f64 - 2.0 * spec.margin as f64,
    );
    let (bw, needed_h) = match spec.orientation {
        Orientation::Horizontal => (aw, block_height),
        Orientation::Curved { amplitude } => {
            if !amplitude.is_finite() || amplitude < 0.0 {
                return Err(infeasible("curve amplitude must be non-negative"));
            }
            (aw, block_height + 2.0 * amplitude)
        }
        Orientation::Skewed { degrees } => {
            if !degrees.is_finite() || degrees.abs() >= 90.0 {
                return Err(infeasible(
                    "skew must lie strictly between -90 and 90 degrees",
                ));
            }
            let (s, c) = degrees.to_radians().sin_cos();
            let (s, c) = (s.abs(), c.abs());
            let by_width = (aw - block_height * s) / c;
            let by_height = if s > 0.0 {
                (ah - block_height * c) / s
            } else {
                f64::INFINITY
            };
            (by_width.min(by_height), block_height * c)
        }
    };
    if needed_h > ah {
        return Err(infeasible(format!(
            "{} lines of height {} with gap {} need {needed_h:.0} px, page allows {ah:.0}",
            spec.lines, spec.line_height, spec.gap
        )));
    }
    if bw < 4.0 * spec.line_height as f64 {
        return Err(infeasible(format!(
            "text block would be only {bw:.0} px wide"
        )));
    }
    Ok(bw)
}

/// A deterministic page of word-like blobs with exact ground truth.
pub fn generate_synthetic_page(seed: u64, spec: &SynthSpec) -> Result<SyntheticPage> {
    if spec.lines == 0 {
        return Err(infeasible("at least one line is required"));
    }
    if spec.gap == 0 || spec.line_height < 4 {
        return Err(infeasible(
            "gap must be at least 1 px and line height at least 4 px",
        ));
    }
    if !(0.0..=1.0).contains(&spec.bridge_probability)
        || !spec.diacritic_density.is_finite()
        || spec.diacritic_density < 0.0
    {
        return Err(infeasible(
            "bridge probability must be in [0, 1] and diacritic density non-negative",
        ));
    }
    let body = spec.line_height as f64;
    let gap = spec.gap as f64;
    let block_height = spec.lines as f64 * body + (spec.lines - 1) as f64 * gap;
    let bw = block_width(spec, block_height)?;
    let (pw, ph) = (spec.width as f64, spec.height as f64);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let left = (pw - bw) / 2.0;
    let mut layout = Layout {
        top: (ph - block_height) / 2.0,
        left,
        block_width: bw,
        pitch: body + gap,
        body,
        band: (body / 3.0).max(3.0),
        words: Vec::new(),
        marks: Vec::new(),
        bridges: Vec::new(),
    };
    let mark_r = (body / 8.0).max(1.5);
    let mark_offset = body / 2.0 + gap / 4.0;
    for i in 0..spec.lines {
        let c = layout.center(i);
        let mut words = Vec::new();
        let mut marks = Vec::new();
        let mut x = left + rng.random_range(0.0..body);
        'words: loop {
            // A word is a run of letter blobs separated by narrow gaps.
            let letters = rng.random_range(2..=5);
            let start = x;
            for k in 0..letters {
                let len = rng.random_range(0.4 * body..1.2 * body);
                if x + len > left + bw {
                    if k == 0 {
                        break 'words;
                    }
                    break;
                }
                let ripple = (
                    body / 4.0,
                    rng.random_range(0.2..0.6),
                    rng.random_range(0.0..2.0 * PI),
                );
                words.push(Word {
                    x0: x,
                    x1: x + len,
                    ripple,
                });
                x += len + rng.random_range(2.0..(body / 5.0).max(3.0));
            }
            let end = words.last().map_or(start, |w| w.x1);
            let extra = spec.diacritic_density.fract();
            let count = spec.diacritic_density.floor() as usize + rng.random_bool(extra) as usize;
            for _ in 0..count {
                let above = rng.random_bool(0.7);
                marks.push(Mark {
                    x: rng.random_range(start + mark_r..end - mark_r),
                    y: if above {
                        c - mark_offset
                    } else {
                        c + mark_offset
                    },
                    r: mark_r,
                });
            }
            x = end + rng.random_range(body / 2.0..body);
        }
        if words.is_empty() {
            return Err(infeasible("text block too narrow for a word"));
        }
        layout.words.push(words);
        layout.marks.push(marks);
    }
    for i in 0..spec.lines.saturating_sub(1) {
        if !rng.random_bool(spec.bridge_probability) {
            continue;
        }
        // A stroke through the middle of a word on the upper line that also
        // lands inside a word on the lower line.
        let stroke = (body / 6.0).max(2.0);
        let hit = |words: &[Word], x: f64| {
            words
                .iter()
                .any(|w| w.x0 + 1.0 <= x && x + stroke + 1.0 <= w.x1)
        };
        let candidates: Vec<f64> = layout.words[i]
            .iter()
            .map(|w| (w.x0 + w.x1 - stroke) / 2.0)
            .filter(|&x| hit(&layout.words[i + 1], x))
            .collect();
        if candidates.is_empty() {
            continue;
        }
        let x0 = candidates[rng.random_range(0..candidates.len())];
        layout.bridges.push(Bridge {
            line: i,
            x0,
            x1: x0 + stroke,
        });
    }

    let to_frame = frame_map(spec, &layout);
    let (w, h) = (spec.width, spec.height);
    let mut page = BinaryPage::new(w, h)?;
    let mut labels = LabelRaster::new(w, h)?;
    let mut blob_mask = BinaryPage::new(w, h)?;
    for y in 0..h {
        for x in 0..w {
            let (fx, fy) = to_frame(x as f64 + 0.5, y as f64 + 0.5);
            let (text, blob) = layout.classify(fx, fy);
            if text != 0 {
                page.set(x, y, true);
                labels.set(x, y, text);
            }
            blob_mask.set(x, y, blob != 0);
        }
    }
    let polygons = line_polygons(&labels, spec.lines, DEFAULT_CLOSING_RADIUS);
    Ok(SyntheticPage {
        page,
        labels,
        blob_mask,
        polygons,
        bridges: layout.bridges.len(),
    })
}

/// Page point to frame point.
fn frame_map(spec: &SynthSpec, layout: &Layout) -> Box<dyn Fn(f64, f64) -> (f64, f64)> {
    let (cx, cy) = (spec.width as f64 / 2.0, spec.height as f64 / 2.0);
    match spec.orientation {
        Orientation::Horizontal => Box::new(|x, y| (x, y)),
        Orientation::Skewed { degrees } => {
            let (s, c) = (-degrees.to_radians()).sin_cos();
            Box::new(move |x, y| {
                let (dx, dy) = (x - cx, y - cy);
                (cx + c * dx - s * dy, cy + s * dx + c * dy)
            })
        }
        Orientation::Curved { amplitude } => {
            let (left, period) = (layout.left, layout.block_width);
            Box::new(move |x, y| (x, y - amplitude * (2.0 * PI * (x - left) / period).sin()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blobline::build_blob_line_set;
    use crate::components::{extract_components, Connectivity};
    use crate::extract::touching_blobs;
    use proptest::prelude::*;

    #[test]
    fn tile_counts() {
        let spec = TileSpec::default();
        let n = |w, h| tile_page(&BinaryPage::new(w, h).unwrap(), &spec).unwrap();
        assert_eq!(n(250, 250).len(), 1);
        let two = n(500, 250);
        assert_eq!(
            two.iter().map(|t| t.offset).collect::<Vec<_>>(),
            vec![(0, 0), (250, 0)]
        );
        assert_eq!(n(251, 250).len(), 2);
        assert!(two.iter().all(|t| t.image.size() == (350, 350)));
    }

    #[test]
    fn bad_tile_specs() {
        assert!(TileSpec {
            window: 350,
            inner: 251
        }
        .validate()
        .is_err());
        assert!(TileSpec {
            window: 200,
            inner: 250
        }
        .validate()
        .is_err());
        assert!(TileSpec {
            window: 10,
            inner: 0
        }
        .validate()
        .is_err());
    }

    #[test]
    fn missing_tile_reported() {
        let spec = TileSpec {
            window: 30,
            inner: 20,
        };
        let page = BinaryPage::from_fn(45, 25, |x, y| (x + y) % 3 == 0).unwrap();
        let mut tiles = tile_page(&page, &spec).unwrap();
        tiles.remove(4);
        assert!(matches!(
            stitch_tiles(&tiles, (45, 25), &spec),
            Err(Error::MissingTile { x: 20, y: 20 })
        ));
    }

    proptest! {
        #[test]
        fn inner_windows_partition_page(w in 1u32..120, h in 1u32..120, inner in 1u32..40, rim in 0u32..8) {
            let spec = TileSpec { window: inner + 2 * rim, inner };
            let mut hits = vec![0u8; (w * h) as usize];
            for (ox, oy) in spec.offsets(w, h) {
                for y in oy..(oy + inner).min(h) {
                    for x in ox..(ox + inner).min(w) {
                        hits[(y * w + x) as usize] += 1;
                    }
                }
            }
            prop_assert!(hits.iter().all(|&c| c == 1));
        }

        #[test]
        fn stitch_inverts_tile(w in 1u32..90, h in 1u32..90, seed in any::<u64>()) {
            let spec = TileSpec { window: 36, inner: 24 };
            let page = BinaryPage::from_fn(w, h, |x, y| (seed ^ ((x as u64) << 20 | y as u64)).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 63 == 1).unwrap();
            let mut tiles = tile_page(&page, &spec).unwrap();
            prop_assert_eq!(stitch_tiles(&tiles, (w, h), &spec).unwrap(), page.clone());
            for t in &mut tiles {
                for i in 0..spec.window {
                    for j in 0..spec.margin() {
                        t.image.set(i, j, true);
                        t.image.set(j, i, true);
                    }
                }
            }
            prop_assert_eq!(stitch_tiles(&tiles, (w, h), &spec).unwrap(), page);
        }
    }

    #[test]
    fn warp_blank_and_degenerate() {
        let out = augment_warp(&BinaryPage::new(80, 20).unwrap()).unwrap();
        assert!(out.iter().all(|p| p.is_blank()));
        assert!(matches!(
            augment_warp(&BinaryPage::new(1, 20).unwrap()),
            Err(Error::DegenerateStrip { .. })
        ));
    }

    #[test]
    fn warp_mirrors() {
        let strip = BinaryPage::from_fn(120, 30, |x, y| y % 10 < 4 && x % 7 < 5).unwrap();
        let [warp, hm, vm, both] = augment_warp(&strip).unwrap();
        assert_eq!(hm, warp.flip_horizontal());
        assert_eq!(vm, warp.flip_vertical());
        assert_eq!(both, warp.flip_horizontal().flip_vertical());
    }

    #[test]
    fn center_line_ends_vertical() {
        let strip = BinaryPage::from_fn(200, 31, |_, y| y == 15).unwrap();
        let [warp, ..] = augment_warp(&strip).unwrap();
        let (w, h) = warp.size();
        // Leftmost pixel is the untouched start of the line.
        assert!(warp.get(0, 15));
        // Mean x of the line in the bottom 30 rows and the 30 rows above.
        let warp = &warp;
        let mean_x = |rows: std::ops::Range<u32>| {
            let xs: Vec<u32> = rows
                .flat_map(|y| (0..w).filter(move |&x| warp.get(x, y)))
                .collect();
            assert!(!xs.is_empty());
            (xs.iter().sum::<u32>() as f64 / xs.len() as f64, xs.len())
        };
        let (bottom, _) = mean_x(h - 30..h);
        let (above, _) = mean_x(h - 60..h - 30);
        let angle = ((bottom - above) / 30.0).atan().to_degrees();
        assert!(angle.abs() <= 5.0, "tangent {angle} degrees off vertical");
    }

    #[test]
    fn synth_is_deterministic() {
        let spec = SynthSpec {
            bridge_probability: 0.5,
            ..SynthSpec::default()
        };
        let a = generate_synthetic_page(7, &spec).unwrap();
        let b = generate_synthetic_page(7, &spec).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.page, generate_synthetic_page(8, &spec).unwrap().page);
    }

    #[test]
    fn single_line_page() {
        let spec = SynthSpec {
            lines: 1,
            ..SynthSpec::default()
        };
        let p = generate_synthetic_page(1, &spec).unwrap();
        assert_eq!(p.labels.distinct_labels(), vec![1]);
    }

    #[test]
    fn labels_cover_page() {
        for orientation in [
            Orientation::Horizontal,
            Orientation::Skewed { degrees: 30.0 },
            Orientation::Curved { amplitude: 16.0 },
        ] {
            let spec = SynthSpec {
                orientation,
                ..SynthSpec::default()
            };
            let p = generate_synthetic_page(3, &spec).unwrap();
            assert_eq!(p.labels.support(), p.page);
            assert_eq!(p.labels.distinct_labels(), (1..=5).collect::<Vec<_>>());
            assert_eq!(build_blob_line_set(&p.blob_mask).unwrap().count(), 5);
        }
    }

    #[test]
    fn no_bridges_no_touching() {
        let spec = SynthSpec::default();
        let p = generate_synthetic_page(11, &spec).unwrap();
        let blobs = build_blob_line_set(&p.blob_mask).unwrap();
        let comps = extract_components(&p.page, Connectivity::Eight);
        assert!(comps.iter().all(|c| touching_blobs(c, &blobs).len() <= 1));
        // Every word is crossed by its band, so touching components count words.
        let words = comps
            .iter()
            .filter(|c| touching_blobs(c, &blobs).len() == 1)
            .count();
        assert!(comps.len() >= words && words >= 5);
    }

    #[test]
    fn bridges_join_lines() {
        let spec = SynthSpec {
            bridge_probability: 1.0,
            ..SynthSpec::default()
        };
        let p = generate_synthetic_page(5, &spec).unwrap();
        assert!(p.bridges > 0);
        let blobs = build_blob_line_set(&p.blob_mask).unwrap();
        let comps = extract_components(&p.page, Connectivity::Eight);
        assert!(comps.iter().any(|c| touching_blobs(c, &blobs).len() >= 2));
    }

    #[test]
    fn infeasible_specs() {
        let too_many = SynthSpec {
            lines: 40,
            ..SynthSpec::default()
        };
        assert!(matches!(
            generate_synthetic_page(0, &too_many),
            Err(Error::InfeasibleSynth(_))
        ));
        let none = SynthSpec {
            lines: 0,
            ..SynthSpec::default()
        };
        assert!(generate_synthetic_page(0, &none).is_err());
        let steep = SynthSpec {
            orientation: Orientation::Skewed { degrees: 90.0 },
            ..SynthSpec::default()
        };
        assert!(generate_synthetic_page(0, &steep).is_err());
    }
}
