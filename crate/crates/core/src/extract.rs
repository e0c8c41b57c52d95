//! The extraction pipeline: components, blob lines, energy, expansion,
//! pixel labels and line polygons.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::blobline::{build_blob_line_set, BlobLineSet};
use crate::components::{components_from_labels, label_components, Component, Connectivity, Point};
use crate::energy::{build_energy_model, build_neighbor_graph, SmoothnessScale, DEFAULT_K};
use crate::geometry::{trace_outer_rings, Ring};
use crate::mincut::{alpha_expansion_traced, AcceptedMove, Labeling, DEFAULT_MAX_SWEEPS};
use crate::morphology::{close_disk, crop};
use crate::raster::{BinaryPage, LabelRaster};
use crate::Result;

pub const DEFAULT_CLOSING_RADIUS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractParams {
    /// Neighbours per component in the smoothness graph.
    pub k: usize,
    pub lambda: SmoothnessScale,
    pub connectivity: Connectivity,
    /// Split components that touch several blob lines pixel by pixel.
    pub split_touching: bool,
    pub max_sweeps: usize,
    /// Disk radius used to close each line before tracing its polygon.
    pub closing_radius: f64,
}

impl Default for ExtractParams {
    fn default() -> Self {
        ExtractParams {
            k: DEFAULT_K,
            lambda: SmoothnessScale::Auto,
            connectivity: Connectivity::Eight,
            split_touching: true,
            max_sweeps: DEFAULT_MAX_SWEEPS,
            closing_radius: DEFAULT_CLOSING_RADIUS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub id: u32,
    pub centroid: Point,
    pub area: usize,
    /// Assigned line; `None` for split components.
    pub line: Option<u32>,
    /// Lines a split component was divided between.
    pub split_into: Vec<u32>,
    pub data_cost: Option<f64>,
    /// Weight of incident graph edges whose ends disagree.
    pub smoothness_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub line_count: usize,
    pub component_count: usize,
    pub split_count: usize,
    pub beta: Option<f64>,
    pub lambda: f64,
    pub initial_energy: f64,
    pub energy: f64,
    pub sweeps: usize,
    pub converged: bool,
    pub moves: Vec<AcceptedMove>,
    pub components: Vec<ComponentReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionResult {
    /// Line id per text pixel, 0 for background.
    pub pixel_labels: LabelRaster,
    /// Rings of each line, ordered by line id; a line may have several.
    pub polygons: Vec<(u32, Vec<Ring>)>,
    pub line_count: usize,
    pub diagnostics: Diagnostics,
}

/// Extracts text lines from `page` guided by a binary blob-line mask.
pub fn extract_lines(
    page: &BinaryPage,
    blob_mask: &BinaryPage,
    params: &ExtractParams,
) -> Result<ExtractionResult> {
    page.check_same_size(blob_mask.width(), blob_mask.height())?;
    let blobs = build_blob_line_set(blob_mask)?;
    extract_lines_with_blobs(page, &blobs, params)
}

/// Same as [`extract_lines`] with blob lines that are already labeled.
pub fn extract_lines_with_blobs(
    page: &BinaryPage,
    blobs: &BlobLineSet,
    params: &ExtractParams,
) -> Result<ExtractionResult> {
    let (bw, bh) = blobs.size();
    page.check_same_size(bw, bh)?;
    let (cc, count) = label_components(page, params.connectivity);
    let components = components_from_labels(&cc, count);

    let mut pixel_labels = LabelRaster::new(bw, bh)?;
    let mut reports: Vec<ComponentReport> = Vec::with_capacity(components.len());
    let mut free: Vec<usize> = Vec::new();
    for (i, c) in components.iter().enumerate() {
        let touching = touching_blobs(c, blobs);
        let mut report = ComponentReport {
            id: c.id,
            centroid: c.centroid,
            area: c.area,
            line: None,
            split_into: Vec::new(),
            data_cost: None,
            smoothness_cost: 0.0,
        };
        if params.split_touching && touching.len() > 1 {
            let ids = split_multiline_component(c, blobs, &touching)?;
            for ((x, y), &l) in c.pixels().zip(&ids) {
                pixel_labels.set(x, y, l);
            }
            report.split_into = ids
                .into_iter()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
        } else {
            free.push(i);
        }
        reports.push(report);
    }

    let free_components: Vec<Component> = free.iter().map(|&i| components[i].clone()).collect();
    let graph = build_neighbor_graph(&free_components, params.k);
    let model = build_energy_model(&free_components, blobs, &graph, params.lambda)?;
    let initial = Labeling::nearest(&model);
    let initial_energy = initial.energy;
    let trace = alpha_expansion_traced(&model, initial, params.max_sweeps)?;
    let assignment = &trace.labeling.assignment;

    let mut smoothness = vec![0.0; free.len()];
    for e in model.edges() {
        if assignment[e.a] != assignment[e.b] {
            smoothness[e.a] += e.weight;
            smoothness[e.b] += e.weight;
        }
    }
    for (slot, &ci) in free.iter().enumerate() {
        let line = assignment[slot] as u32 + 1;
        for (x, y) in components[ci].pixels() {
            pixel_labels.set(x, y, line);
        }
        let r = &mut reports[ci];
        r.line = Some(line);
        r.data_cost = Some(model.data_cost(slot, assignment[slot]));
        r.smoothness_cost = smoothness[slot];
    }

    log::debug!(
        "{} components ({} split), {} lines, energy {} -> {} in {} sweeps",
        components.len(),
        components.len() - free.len(),
        blobs.count(),
        initial_energy,
        trace.labeling.energy,
        trace.sweeps
    );
    let polygons = line_polygons(&pixel_labels, blobs.count(), params.closing_radius);
    Ok(ExtractionResult {
        pixel_labels,
        polygons,
        line_count: blobs.count(),
        diagnostics: Diagnostics {
            line_count: blobs.count(),
            component_count: components.len(),
            split_count: components.len() - free.len(),
            beta: model.beta(),
            lambda: model.lambda(),
            initial_energy,
            energy: trace.labeling.energy,
            sweeps: trace.sweeps,
            converged: trace.converged,
            moves: trace.moves,
            components: reports,
        },
    })
}

/// Blob lines sharing at least one pixel with `component`, ascending.
pub fn touching_blobs(component: &Component, blobs: &BlobLineSet) -> Vec<u32> {
    let set: BTreeSet<u32> = component
        .pixels()
        .map(|(x, y)| blobs.label_at(x, y))
        .filter(|&l| l != 0)
        .collect();
    set.into_iter().collect()
}

/// Line id for each pixel of `component` (in [`Component::pixels`] order):
/// the nearest of `candidates`, ties to the lower id.
pub fn split_multiline_component(
    component: &Component,
    blobs: &BlobLineSet,
    candidates: &[u32],
) -> Result<Vec<u32>> {
    component
        .pixels()
        .map(|(x, y)| {
            let mut best = (u64::MAX, 0u32);
            for &l in candidates {
                let d = blobs.pixel_distance_squared(l, x, y)?;
                best = best.min((d, l));
            }
            Ok(best.1)
        })
        .collect()
}

/// Polygons for lines `1..=line_count`. Each line's pixels are closed with a
/// disk of `radius` and every resulting 8-connected region contributes its
/// outer boundary. Lines without pixels get no rings.
pub fn line_polygons(
    labels: &LabelRaster,
    line_count: usize,
    radius: f64,
) -> Vec<(u32, Vec<Ring>)> {
    // Bounding boxes as (min_x, min_y, max_x, max_y).
    let mut boxes: Vec<Option<(u32, u32, u32, u32)>> = vec![None; line_count + 1];
    let w = labels.width();
    for (i, &l) in labels.labels().iter().enumerate() {
        let Some(slot) = boxes.get_mut(l as usize).filter(|_| l != 0) else {
            continue;
        };
        let (x, y) = (i as u32 % w, i as u32 / w);
        *slot = Some(match *slot {
            None => (x, y, x, y),
            Some((a, b, c, d)) => (a.min(x), b.min(y), c.max(x), d.max(y)),
        });
    }
    (1..=line_count as u32)
        .map(|id| {
            let rings = match boxes[id as usize] {
                None => Vec::new(),
                Some((x0, y0, x1, y1)) => {
                    let (bw, bh) = (x1 - x0 + 1, y1 - y0 + 1);
                    let mask = BinaryPage::from_fn(bw, bh, |x, y| labels.get(x + x0, y + y0) == id)
                        .expect("non-empty box");
                    // A closing never grows past the bounding box.
                    let closed = if radius > 0.0 {
                        close_disk(&mask, radius)
                    } else {
                        crop(&mask, 0, 0, bw, bh)
                    };
                    trace_outer_rings(&closed)
                        .into_iter()
                        .map(|r| r.translated(x0 as i64, y0 as i64))
                        .collect()
                }
            };
            (id, rings)
        })
        .collect()
}
