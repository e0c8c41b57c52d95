//! Binary pages, integer label rasters and their on-disk formats.
//!
//! Foreground (ink) is always `true` in a [`BinaryPage`], whatever the
//! polarity of the source file. Label rasters use `0` for background.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use image::{DynamicImage, GrayImage, ImageBuffer, Luma, Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Gray level separating ink from paper in nominally binary inputs.
pub const MID_GRAY: u8 = 128;

/// How ink is encoded in an image file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarity {
    /// Dark ink on a light background (the usual scan).
    #[default]
    InkDark,
    /// Light ink on a dark background (an inverted binary image).
    InkLight,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryPage {
    width: u32,
    height: u32,
    pixels: Vec<bool>,
}

impl BinaryPage {
    /// An all-background page.
    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(BinaryPage {
            width,
            height,
            pixels: vec![false; width as usize * height as usize],
        })
    }

    pub fn from_pixels(width: u32, height: u32, pixels: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension);
        }
        if pixels.len() != width as usize * height as usize {
            return Err(Error::BufferSize {
                width,
                height,
                actual: pixels.len(),
            });
        }
        Ok(BinaryPage {
            width,
            height,
            pixels,
        })
    }

    /// Builds a page by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Result<Self> {
        let mut page = BinaryPage::new(width, height)?;
        for y in 0..height {
            for x in 0..width {
                if f(x, y) {
                    page.set(x, y, true);
                }
            }
        }
        Ok(page)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn size(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    /// Row-major pixel buffer.
    pub fn pixels(&self) -> &[bool] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.pixels[self.index(x, y)]
    }

    /// Like [`get`](Self::get), but out-of-bounds coordinates read as background.
    #[inline]
    pub fn get_or_background(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as u64) < self.width as u64
            && (y as u64) < self.height as u64
            && self.get(x as u32, y as u32)
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        let i = self.index(x, y);
        self.pixels[i] = value;
    }

    #[inline]
    fn index(&self, x: u32, y: u32) -> usize {
        debug_assert!(x < self.width && y < self.height);
        y as usize * self.width as usize + x as usize
    }

    pub fn foreground_count(&self) -> usize {
        self.pixels.iter().filter(|&&p| p).count()
    }

    pub fn is_blank(&self) -> bool {
        !self.pixels.iter().any(|&p| p)
    }

    /// Iterates `(x, y)` of foreground pixels in raster order.
    pub fn foreground(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.width as usize;
        self.pixels
            .iter()
            .enumerate()
            .filter(|(_, &p)| p)
            .map(move |(i, _)| ((i % w) as u32, (i / w) as u32))
    }

    pub fn inverted(&self) -> BinaryPage {
        BinaryPage {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|p| !p).collect(),
        }
    }

    pub fn flip_horizontal(&self) -> BinaryPage {
        let (w, h) = self.size();
        BinaryPage::from_fn(w, h, |x, y| self.get(w - 1 - x, y)).expect("non-empty")
    }

    pub fn flip_vertical(&self) -> BinaryPage {
        let (w, h) = self.size();
        BinaryPage::from_fn(w, h, |x, y| self.get(x, h - 1 - y)).expect("non-empty")
    }

    pub fn check_same_size(&self, width: u32, height: u32) -> Result<()> {
        if self.size() != (width, height) {
            return Err(Error::DimensionMismatch {
                left_width: self.width,
                left_height: self.height,
                right_width: width,
                right_height: height,
            });
        }
        Ok(())
    }

    /// Gray image with black ink on white paper.
    pub fn to_gray_image(&self) -> GrayImage {
        ImageBuffer::from_fn(self.width, self.height, |x, y| {
            if self.get(x, y) {
                Luma([0u8])
            } else {
                Luma([255u8])
            }
        })
    }
}

/// Per-pixel non-negative integer ids; `0` is background.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelRaster {
    width: u32,
    height: u32,
    labels: Vec<u32>,
}

impl LabelRaster {
    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(LabelRaster {
            width,
            height,
            labels: vec![0; width as usize * height as usize],
        })
    }

    pub fn from_labels(width: u32, height: u32, labels: Vec<u32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension);
        }
        if labels.len() != width as usize * height as usize {
            return Err(Error::BufferSize {
                width,
                height,
                actual: labels.len(),
            });
        }
        Ok(LabelRaster {
            width,
            height,
            labels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn size(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u32 {
        self.labels[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, label: u32) {
        let w = self.width as usize;
        self.labels[y as usize * w + x as usize] = label;
    }

    pub fn max_label(&self) -> u32 {
        self.labels.iter().copied().max().unwrap_or(0)
    }

    /// Distinct non-zero ids in ascending order.
    pub fn distinct_labels(&self) -> Vec<u32> {
        let set: BTreeSet<u32> = self.labels.iter().copied().filter(|&l| l != 0).collect();
        set.into_iter().collect()
    }

    /// Renumbers the non-zero ids onto `1..=K`, preserving their order.
    pub fn compacted(&self) -> LabelRaster {
        let remap: HashMap<u32, u32> = self
            .distinct_labels()
            .into_iter()
            .enumerate()
            .map(|(i, l)| (l, i as u32 + 1))
            .collect();
        LabelRaster {
            width: self.width,
            height: self.height,
            labels: self
                .labels
                .iter()
                .map(|l| if *l == 0 { 0 } else { remap[l] })
                .collect(),
        }
    }

    /// Foreground of all pixels carrying `label`.
    pub fn mask_of(&self, label: u32) -> BinaryPage {
        BinaryPage {
            width: self.width,
            height: self.height,
            pixels: self
                .labels
                .iter()
                .map(|&l| l == label && label != 0)
                .collect(),
        }
    }

    /// Foreground of all labeled pixels.
    pub fn support(&self) -> BinaryPage {
        BinaryPage {
            width: self.width,
            height: self.height,
            pixels: self.labels.iter().map(|&l| l != 0).collect(),
        }
    }
}

/// Reads a grayscale or bilevel PNG/PGM and thresholds it at mid-gray.
pub fn load_binary_page(path: impl AsRef<Path>, polarity: Polarity) -> Result<BinaryPage> {
    let path = path.as_ref();
    let img = image::open(path).map_err(|e| Error::read(path, e))?;
    binary_page_from_image(&img, polarity)
}

pub fn binary_page_from_image(img: &DynamicImage, polarity: Polarity) -> Result<BinaryPage> {
    let gray = img.to_luma8();
    let (w, h) = gray.dimensions();
    let pixels = gray
        .pixels()
        .map(|Luma([v])| match polarity {
            Polarity::InkDark => *v < MID_GRAY,
            Polarity::InkLight => *v >= MID_GRAY,
        })
        .collect();
    BinaryPage::from_pixels(w, h, pixels)
}

/// Writes black ink on white as an 8-bit PNG.
pub fn save_binary_page(page: &BinaryPage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    page.to_gray_image()
        .save(path)
        .map_err(|e| Error::write(path, e))
}

/// On-disk encoding of a label raster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelMode {
    /// 16-bit single channel, value = id.
    #[default]
    Indexed,
    /// RGB, one deterministic color per id, background black.
    DistinctColors,
}

/// Deterministic RGB for a label id. Ids below 2^24 map to pairwise distinct
/// colors and only id 0 maps to black.
pub fn label_color(id: u32) -> [u8; 3] {
    // Multiplication by an odd constant is a bijection modulo 2^24.
    let c = id.wrapping_mul(0x9E_3779) & 0xFF_FFFF;
    [(c >> 16) as u8, (c >> 8) as u8, c as u8]
}

pub fn save_label_raster(
    raster: &LabelRaster,
    path: impl AsRef<Path>,
    mode: LabelMode,
) -> Result<()> {
    let path = path.as_ref();
    match mode {
        LabelMode::Indexed => {
            if let Some(&bad) = raster.labels.iter().find(|&&l| l > u16::MAX as u32) {
                return Err(Error::LabelOverflow(bad));
            }
            let img: ImageBuffer<Luma<u16>, Vec<u16>> = ImageBuffer::from_raw(
                raster.width,
                raster.height,
                raster.labels.iter().map(|&l| l as u16).collect(),
            )
            .expect("buffer size checked at construction");
            img.save(path).map_err(|e| Error::write(path, e))
        }
        LabelMode::DistinctColors => {
            if let Some(&bad) = raster.labels.iter().find(|&&l| l >= 1 << 24) {
                return Err(Error::LabelOverflow(bad));
            }
            let img: RgbImage = ImageBuffer::from_fn(raster.width, raster.height, |x, y| {
                Rgb(label_color(raster.get(x, y)))
            });
            img.save(path).map_err(|e| Error::write(path, e))
        }
    }
}

/// Reads a label raster.
///
/// Single-channel images are read as ids directly. Color images are read as
/// color-coded labels: black is background and every other distinct color
/// becomes an id, numbered in raster order of first appearance.
pub fn load_label_raster(path: impl AsRef<Path>) -> Result<LabelRaster> {
    let path = path.as_ref();
    let img = image::open(path).map_err(|e| Error::read(path, e))?;
    label_raster_from_image(&img)
}

pub fn label_raster_from_image(img: &DynamicImage) -> Result<LabelRaster> {
    let (w, h) = (img.width(), img.height());
    match img {
        DynamicImage::ImageLuma8(g) => {
            LabelRaster::from_labels(w, h, g.pixels().map(|p| p.0[0] as u32).collect())
        }
        DynamicImage::ImageLuma16(g) => {
            LabelRaster::from_labels(w, h, g.pixels().map(|p| p.0[0] as u32).collect())
        }
        other => {
            let rgb = other.to_rgb8();
            let mut ids: HashMap<[u8; 3], u32> = HashMap::new();
            let labels = rgb
                .pixels()
                .map(|p| {
                    if p.0 == [0, 0, 0] {
                        0
                    } else {
                        let next = ids.len() as u32 + 1;
                        *ids.entry(p.0).or_insert(next)
                    }
                })
                .collect();
            LabelRaster::from_labels(w, h, labels)
        }
    }
}

/// Line colors painted over the page: ink of line `id` in its label color,
/// unlabeled ink in black, optional guide mask in light gray, paper white.
pub fn render_overlay(
    page: &BinaryPage,
    labels: &LabelRaster,
    guide: Option<&BinaryPage>,
) -> Result<RgbImage> {
    page.check_same_size(labels.width(), labels.height())?;
    if let Some(g) = guide {
        page.check_same_size(g.width(), g.height())?;
    }
    Ok(ImageBuffer::from_fn(page.width(), page.height(), |x, y| {
        let l = labels.get(x, y);
        if l != 0 {
            Rgb(label_color(l))
        } else if page.get(x, y) {
            Rgb([0, 0, 0])
        } else if guide.is_some_and(|g| g.get(x, y)) {
            Rgb([220, 220, 220])
        } else {
            Rgb([255, 255, 255])
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gray_from_fn(w: u32, h: u32, f: impl Fn(u32, u32) -> u8) -> GrayImage {
        ImageBuffer::from_fn(w, h, |x, y| Luma([f(x, y)]))
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(matches!(BinaryPage::new(0, 5), Err(Error::ZeroDimension)));
        assert!(matches!(LabelRaster::new(3, 0), Err(Error::ZeroDimension)));
    }

    #[test]
    fn all_white_is_blank_and_all_black_is_full() {
        let dir = tempfile::tempdir().unwrap();
        let white = dir.path().join("white.png");
        let black = dir.path().join("black.png");
        gray_from_fn(7, 5, |_, _| 255).save(&white).unwrap();
        gray_from_fn(7, 5, |_, _| 0).save(&black).unwrap();
        assert_eq!(
            load_binary_page(&white, Polarity::InkDark)
                .unwrap()
                .foreground_count(),
            0
        );
        assert_eq!(
            load_binary_page(&black, Polarity::InkDark)
                .unwrap()
                .foreground_count(),
            35
        );
    }

    #[test]
    fn square_fixture_has_nine_pixels() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sq.png");
        gray_from_fn(10, 10, |x, y| {
            if (4..7).contains(&x) && (2..5).contains(&y) {
                0
            } else {
                255
            }
        })
        .save(&path)
        .unwrap();
        let page = load_binary_page(&path, Polarity::InkDark).unwrap();
        assert_eq!(page.foreground_count(), 9);
        assert!(page.get(4, 2) && page.get(6, 4) && !page.get(7, 4));
    }

    #[test]
    fn pgm_input_is_read() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.pgm");
        let mut bytes = b"P5\n3 2\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 255, 0, 255, 255, 10]);
        std::fs::write(&path, bytes).unwrap();
        let page = load_binary_page(&path, Polarity::InkDark).unwrap();
        assert_eq!(page.pixels(), &[true, false, true, false, false, true]);
    }

    #[test]
    fn antialiased_edges_threshold_at_mid_gray() {
        let img =
            DynamicImage::ImageLuma8(gray_from_fn(4, 1, |x, _| [0, 127, 128, 255][x as usize]));
        let page = binary_page_from_image(&img, Polarity::InkDark).unwrap();
        assert_eq!(page.pixels(), &[true, true, false, false]);
    }

    #[test]
    fn missing_file_is_read_error() {
        let err = load_binary_page("/nonexistent/page.png", Polarity::InkDark).unwrap_err();
        assert_eq!(err.code(), "E_READ");
    }

    #[test]
    fn background_only_raster_decodes_blank() {
        let dir = tempfile::tempdir().unwrap();
        let r = LabelRaster::new(6, 4).unwrap();
        for mode in [LabelMode::Indexed, LabelMode::DistinctColors] {
            let path = dir.path().join(format!("{mode:?}.png"));
            save_label_raster(&r, &path, mode).unwrap();
            assert!(load_label_raster(&path)
                .unwrap()
                .labels()
                .iter()
                .all(|&l| l == 0));
        }
    }

    #[test]
    fn distinct_colors_writes_one_color_per_id() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.png");
        let r = LabelRaster::from_labels(3, 2, vec![0, 1, 2, 2, 1, 0]).unwrap();
        save_label_raster(&r, &path, LabelMode::DistinctColors).unwrap();
        let img = image::open(&path).unwrap().to_rgb8();
        let colors: BTreeSet<[u8; 3]> = img.pixels().map(|p| p.0).collect();
        assert_eq!(colors.len(), 3);
        assert!(colors.contains(&[0, 0, 0]));
        // Colors map back onto the same partition.
        let back = load_label_raster(&path).unwrap();
        assert_eq!(back.labels(), r.labels());
    }

    #[test]
    fn label_colors_are_distinct_and_non_black() {
        let mut seen = std::collections::HashSet::new();
        for id in 1..20_000u32 {
            let c = label_color(id);
            assert_ne!(c, [0, 0, 0]);
            assert!(seen.insert(c));
        }
    }

    #[test]
    fn indexed_overflow_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let r = LabelRaster::from_labels(1, 1, vec![70_000]).unwrap();
        assert!(matches!(
            save_label_raster(&r, dir.path().join("o.png"), LabelMode::Indexed),
            Err(Error::LabelOverflow(70_000))
        ));
    }

    #[test]
    fn compaction_is_order_preserving() {
        let r = LabelRaster::from_labels(4, 1, vec![9, 0, 4, 9]).unwrap();
        assert_eq!(r.compacted().labels(), &[2, 0, 1, 2]);
    }

    fn arb_page() -> impl Strategy<Value = BinaryPage> {
        (1u32..24, 1u32..24).prop_flat_map(|(w, h)| {
            proptest::collection::vec(any::<bool>(), (w * h) as usize)
                .prop_map(move |px| BinaryPage::from_pixels(w, h, px).unwrap())
        })
    }

    fn arb_labels() -> impl Strategy<Value = LabelRaster> {
        (1u32..20, 1u32..20).prop_flat_map(|(w, h)| {
            proptest::collection::vec(0u32..2000, (w * h) as usize)
                .prop_map(move |l| LabelRaster::from_labels(w, h, l).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn binary_round_trip(page in arb_page()) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("p.png");
            save_binary_page(&page, &path).unwrap();
            let once = load_binary_page(&path, Polarity::InkDark).unwrap();
            save_binary_page(&once, &path).unwrap();
            let twice = load_binary_page(&path, Polarity::InkDark).unwrap();
            prop_assert_eq!(&once, &page);
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn indexed_round_trip(r in arb_labels()) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("l.png");
            save_label_raster(&r, &path, LabelMode::Indexed).unwrap();
            prop_assert_eq!(load_label_raster(&path).unwrap(), r);
        }

        #[test]
        fn polarity_inverts_foreground(w in 1u32..16, h in 1u32..16, seed in any::<u64>()) {
            let img = gray_from_fn(w, h, |x, y| {
                (seed.wrapping_mul(6364136223846793005).wrapping_add(((y * w + x) as u64).wrapping_mul(1442695040888963407)) >> 56) as u8
            });
            let inv = gray_from_fn(w, h, |x, y| 255 - img.get_pixel(x, y).0[0]);
            let dark = binary_page_from_image(&DynamicImage::ImageLuma8(img), Polarity::InkDark).unwrap();
            let light = binary_page_from_image(&DynamicImage::ImageLuma8(inv), Polarity::InkLight).unwrap();
            prop_assert_eq!(dark, light);
        }
    }
}
