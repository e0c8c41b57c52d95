//! Connected component labeling of binary pages.
//!
//! Labeling is the classic two-pass scheme: one raster scan assigns
//! provisional labels and records equivalences in a union-find forest, a
//! second pass resolves every pixel to its root. Final ids follow the raster
//! order of each component's first pixel, starting at 1.

use serde::{Deserialize, Serialize};

use crate::raster::{BinaryPage, LabelRaster};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Connectivity {
    #[serde(rename = "4")]
    Four,
    #[default]
    #[serde(rename = "8")]
    Eight,
}

impl Connectivity {
    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            4 => Some(Connectivity::Four),
            8 => Some(Connectivity::Eight),
            _ => None,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }

    /// Neighbour offsets `(dx, dy)`.
    pub fn offsets(self) -> &'static [(i32, i32)] {
        const FOUR: [(i32, i32); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];
        const EIGHT: [(i32, i32); 8] = [
            (-1, -1),
            (0, -1),
            (1, -1),
            (-1, 0),
            (1, 0),
            (-1, 1),
            (0, 1),
            (1, 1),
        ];
        match self {
            Connectivity::Four => &FOUR,
            Connectivity::Eight => &EIGHT,
        }
    }
}

/// A horizontal run of foreground pixels, `col_start..=col_end` on `row`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Run {
    pub row: u32,
    pub col_start: u32,
    pub col_end: u32,
}

impl Run {
    pub fn len(&self) -> usize {
        (self.col_end - self.col_start + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Inclusive pixel bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BBox {
    pub min_row: u32,
    pub max_row: u32,
    pub min_col: u32,
    pub max_col: u32,
}

impl BBox {
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min_col as f64
            && p.x <= self.max_col as f64
            && p.y >= self.min_row as f64
            && p.y <= self.max_row as f64
    }
}

/// One connected foreground region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub id: u32,
    pub runs: Vec<Run>,
    pub centroid: Point,
    pub bbox: BBox,
    pub area: usize,
}

impl Component {
    /// Member pixels as `(x, y)`, row by row.
    pub fn pixels(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.runs
            .iter()
            .flat_map(|r| (r.col_start..=r.col_end).map(move |x| (x, r.row)))
    }

    fn from_runs(id: u32, runs: Vec<Run>) -> Component {
        let mut area = 0usize;
        let (mut sx, mut sy) = (0f64, 0f64);
        let mut bbox = BBox {
            min_row: u32::MAX,
            max_row: 0,
            min_col: u32::MAX,
            max_col: 0,
        };
        for r in &runs {
            let n = r.len();
            area += n;
            // Sum of an arithmetic series of column indices.
            sx += (r.col_start as f64 + r.col_end as f64) * n as f64 / 2.0;
            sy += r.row as f64 * n as f64;
            bbox.min_row = bbox.min_row.min(r.row);
            bbox.max_row = bbox.max_row.max(r.row);
            bbox.min_col = bbox.min_col.min(r.col_start);
            bbox.max_col = bbox.max_col.max(r.col_end);
        }
        Component {
            id,
            runs,
            centroid: Point::new(sx / area as f64, sy / area as f64),
            bbox,
            area,
        }
    }
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new() -> Self {
        // Slot 0 is the background.
        UnionFind { parent: vec![0] }
    }

    fn make(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        // Keep the smaller root so roots stay the earliest provisional label.
        if ra < rb {
            self.parent[rb as usize] = ra;
        } else if rb < ra {
            self.parent[ra as usize] = rb;
        }
    }
}

/// Labels every foreground pixel with its component id (`1..=K`).
pub fn label_components(page: &BinaryPage, connectivity: Connectivity) -> (LabelRaster, usize) {
    let (w, h) = page.size();
    let mut labels = vec![0u32; w as usize * h as usize];
    let mut uf = UnionFind::new();
    // Already-visited neighbours in raster order.
    let back: &[(i32, i32)] = match connectivity {
        Connectivity::Four => &[(0, -1), (-1, 0)],
        Connectivity::Eight => &[(-1, -1), (0, -1), (1, -1), (-1, 0)],
    };
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            if !page.get(x as u32, y as u32) {
                continue;
            }
            let mut current = 0u32;
            for &(dx, dy) in back {
                let (nx, ny) = (x + dx as i64, y + dy as i64);
                if nx < 0 || ny < 0 || nx >= w as i64 {
                    continue;
                }
                let l = labels[ny as usize * w as usize + nx as usize];
                if l == 0 {
                    continue;
                }
                if current == 0 {
                    current = l;
                } else if l != current {
                    uf.union(current, l);
                }
            }
            if current == 0 {
                current = uf.make();
            }
            labels[y as usize * w as usize + x as usize] = current;
        }
    }

    // Resolve and renumber by first appearance.
    let mut final_id = vec![0u32; uf.parent.len()];
    let mut next = 0u32;
    for l in labels.iter_mut() {
        if *l == 0 {
            continue;
        }
        let root = uf.find(*l);
        if final_id[root as usize] == 0 {
            next += 1;
            final_id[root as usize] = next;
        }
        *l = final_id[root as usize];
    }
    (
        LabelRaster::from_labels(w, h, labels).expect("same size as page"),
        next as usize,
    )
}

/// Groups a label raster into components; ids must be `1..=count`.
pub fn components_from_labels(raster: &LabelRaster, count: usize) -> Vec<Component> {
    let (w, h) = raster.size();
    let mut runs: Vec<Vec<Run>> = vec![Vec::new(); count];
    for y in 0..h {
        let mut x = 0;
        while x < w {
            let l = raster.get(x, y);
            if l == 0 {
                x += 1;
                continue;
            }
            let start = x;
            while x + 1 < w && raster.get(x + 1, y) == l {
                x += 1;
            }
            runs[l as usize - 1].push(Run {
                row: y,
                col_start: start,
                col_end: x,
            });
            x += 1;
        }
    }
    runs.into_iter()
        .enumerate()
        .map(|(i, r)| Component::from_runs(i as u32 + 1, r))
        .collect()
}

/// Connected components in raster order of their top-left-most pixel.
pub fn extract_components(page: &BinaryPage, connectivity: Connectivity) -> Vec<Component> {
    let (raster, count) = label_components(page, connectivity);
    components_from_labels(&raster, count)
}
