//! Exact Euclidean distance transform and the binary morphology built on it.

use crate::raster::BinaryPage;

/// Marks pixels with no foreground anywhere on the page.
pub const UNREACHABLE: u64 = u64::MAX;

/// Lower envelope of the parabolas `(x - i)^2 + f[i]` over finite `f[i]`.
///
/// Writes `min_i (x - i)^2 + f[i]` into `out`. Intersections are compared in
/// f64, which is exact for the magnitudes of page coordinates; the returned
/// values are evaluated in integers.
fn envelope_1d(f: &[u64], out: &mut [u64], sites: &mut Vec<usize>, bounds: &mut Vec<f64>) {
    sites.clear();
    bounds.clear();
    for (q, &fq) in f.iter().enumerate() {
        if fq == UNREACHABLE {
            continue;
        }
        let hq = fq as i128 + (q as i128) * (q as i128);
        loop {
            let Some(&v) = sites.last() else {
                sites.push(q);
                bounds.push(f64::NEG_INFINITY);
                break;
            };
            let hv = f[v] as i128 + (v as i128) * (v as i128);
            let s = (hq - hv) as f64 / (2 * (q - v)) as f64;
            if s <= *bounds.last().unwrap() {
                sites.pop();
                bounds.pop();
            } else {
                sites.push(q);
                bounds.push(s);
                break;
            }
        }
    }
    if sites.is_empty() {
        out.fill(UNREACHABLE);
        return;
    }
    let mut k = 0;
    for (x, o) in out.iter_mut().enumerate() {
        while k + 1 < sites.len() && bounds[k + 1] < x as f64 {
            k += 1;
        }
        let v = sites[k];
        let d = x as i64 - v as i64;
        *o = (d * d) as u64 + f[v];
    }
}

/// Squared Euclidean distance from every pixel to the nearest foreground
/// pixel, row-major. Exact; `UNREACHABLE` when the page is blank.
pub fn squared_distance_transform(page: &BinaryPage) -> Vec<u64> {
    let (w, h) = (page.width() as usize, page.height() as usize);
    let mut grid: Vec<u64> = page
        .pixels()
        .iter()
        .map(|&p| if p { 0 } else { UNREACHABLE })
        .collect();
    let (mut sites, mut bounds) = (Vec::new(), Vec::new());

    let mut column = vec![0u64; h];
    let mut col_out = vec![0u64; h];
    for x in 0..w {
        for y in 0..h {
            column[y] = grid[y * w + x];
        }
        envelope_1d(&column, &mut col_out, &mut sites, &mut bounds);
        for y in 0..h {
            grid[y * w + x] = col_out[y];
        }
    }
    let mut row_out = vec![0u64; w];
    for y in 0..h {
        let row = &mut grid[y * w..(y + 1) * w];
        envelope_1d(row, &mut row_out, &mut sites, &mut bounds);
        row.copy_from_slice(&row_out);
    }
    grid
}

/// Dilation by the disk `{d : |d| <= radius}`.
pub fn dilate_disk(page: &BinaryPage, radius: f64) -> BinaryPage {
    let r2 = radius * radius;
    let dist = squared_distance_transform(page);
    let pixels = dist
        .iter()
        .map(|&d| d != UNREACHABLE && d as f64 <= r2)
        .collect();
    BinaryPage::from_pixels(page.width(), page.height(), pixels).expect("same size")
}

/// Erosion by the disk `{d : |d| <= radius}`; pixels beyond the page border
/// count as background.
pub fn erode_disk(page: &BinaryPage, radius: f64) -> BinaryPage {
    let padded = pad(page, 1);
    let dist = squared_distance_transform(&padded.inverted());
    let r2 = radius * radius;
    let (w, h) = page.size();
    let pw = padded.width() as usize;
    BinaryPage::from_fn(w, h, |x, y| {
        let d = dist[(y as usize + 1) * pw + x as usize + 1];
        d == UNREACHABLE || d as f64 > r2
    })
    .expect("same size")
}

/// Morphological closing with a disk. The page is padded internally so the
/// border does not erode shapes that touch it.
pub fn close_disk(page: &BinaryPage, radius: f64) -> BinaryPage {
    let margin = radius.ceil() as u32 + 1;
    let padded = pad(page, margin);
    let closed = erode_disk(&dilate_disk(&padded, radius), radius);
    crop(&closed, margin, margin, page.width(), page.height())
}

/// Adds `margin` background pixels on every side.
pub fn pad(page: &BinaryPage, margin: u32) -> BinaryPage {
    let (w, h) = page.size();
    BinaryPage::from_fn(w + 2 * margin, h + 2 * margin, |x, y| {
        x >= margin
            && y >= margin
            && x - margin < w
            && y - margin < h
            && page.get(x - margin, y - margin)
    })
    .expect("non-empty")
}

pub fn crop(page: &BinaryPage, x0: u32, y0: u32, width: u32, height: u32) -> BinaryPage {
    BinaryPage::from_fn(width, height, |x, y| {
        page.get_or_background(x as i64 + x0 as i64, y as i64 + y0 as i64)
    })
    .expect("non-empty")
}

/// Zhang-Suen thinning to an 8-connected, one pixel wide skeleton.
pub fn thin(page: &BinaryPage) -> BinaryPage {
    let (w, h) = page.size();
    let mut img = page.clone();
    let mut to_clear = Vec::new();
    loop {
        let mut changed = false;
        for step in 0..2 {
            to_clear.clear();
            for y in 0..h {
                for x in 0..w {
                    if !img.get(x, y) {
                        continue;
                    }
                    let at = |dx: i64, dy: i64| {
                        img.get_or_background(x as i64 + dx, y as i64 + dy) as u8
                    };
                    // P2..P9 clockwise from north.
                    let n = [
                        at(0, -1),
                        at(1, -1),
                        at(1, 0),
                        at(1, 1),
                        at(0, 1),
                        at(-1, 1),
                        at(-1, 0),
                        at(-1, -1),
                    ];
                    let b: u8 = n.iter().sum();
                    if !(2..=6).contains(&b) {
                        continue;
                    }
                    let a = (0..8).filter(|&i| n[i] == 0 && n[(i + 1) % 8] == 1).count();
                    if a != 1 {
                        continue;
                    }
                    let (p2, p4, p6, p8) = (n[0], n[2], n[4], n[6]);
                    let ok = if step == 0 {
                        p2 * p4 * p6 == 0 && p4 * p6 * p8 == 0
                    } else {
                        p2 * p4 * p8 == 0 && p2 * p6 * p8 == 0
                    };
                    if ok {
                        to_clear.push((x, y));
                    }
                }
            }
            for &(x, y) in &to_clear {
                img.set(x, y, false);
            }
            changed |= !to_clear.is_empty();
        }
        if !changed {
            return img;
        }
    }
}

/// Stamps a round brush of the given diameter centred on each point. Even
/// diameters centre the brush between pixels, so the stroke is exactly
/// `diameter` pixels across.
pub fn stamp_brush(page: &mut BinaryPage, points: &[(u32, u32)], diameter: u32) {
    let d = diameter.max(1) as i64;
    let c = (d - 1) as f64 / 2.0;
    let r2 = (d as f64 / 2.0).powi(2);
    let shift = (d - 1) / 2;
    let offsets: Vec<(i64, i64)> = (0..d)
        .flat_map(|j| (0..d).map(move |i| (i, j)))
        .filter(|&(i, j)| (i as f64 - c).powi(2) + (j as f64 - c).powi(2) <= r2)
        .map(|(i, j)| (i - shift, j - shift))
        .collect();
    let (w, h) = page.size();
    for &(px, py) in points {
        for &(dx, dy) in &offsets {
            let (x, y) = (px as i64 + dx, py as i64 + dy);
            if x >= 0 && y >= 0 && x < w as i64 && y < h as i64 {
                page.set(x as u32, y as u32, true);
            }
        }
    }
}
