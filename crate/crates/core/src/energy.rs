//! The labeling energy over connected components.
//!
//! For a labeling `f` of components onto blob lines,
//!
//! ```text
//! E(f) = sum_e D(e, f_e) + sum_{(e,e') in N} w(e,e') * [f_e != f_e']
//! D(e, l)  = distance from the (rounded) centroid of e to the nearest pixel of blob line l
//! w(e, e') = lambda * exp(-beta * |c_e - c_e'|)
//! beta     = 1 / (2 * mean_{(e,e') in N} |c_e - c_e'|)
//! ```
//!
//! `N` is the symmetrized k-nearest-neighbour graph on centroids. Labels are
//! 0-based indices here; label `l` is blob line `l + 1`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::blobline::{nearest_blob_distance, BlobLineSet};
use crate::components::{Component, Point};
use crate::{Error, Result};

pub const DEFAULT_K: usize = 4;

/// Floor applied to the distance between coincident centroids.
pub const MIN_EDGE_DISTANCE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeighborEdge {
    /// Smaller endpoint index.
    pub a: usize,
    pub b: usize,
    /// Centroid distance in pixels.
    pub distance: f64,
}

/// Undirected neighbour graph over component indices.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NeighborGraph {
    pub nodes: usize,
    /// Sorted by `(a, b)`, no duplicates, `a < b`.
    pub edges: Vec<NeighborEdge>,
}

impl NeighborGraph {
    pub fn mean_distance(&self) -> Option<f64> {
        if self.edges.is_empty() {
            None
        } else {
            Some(self.edges.iter().map(|e| e.distance).sum::<f64>() / self.edges.len() as f64)
        }
    }
}

/// Symmetrized k-NN graph: `{i, j}` is an edge when either is among the
/// other's `k` nearest centroids. Distance ties go to the lower index.
pub fn neighbor_graph_from_points(points: &[Point], k: usize) -> NeighborGraph {
    let n = points.len();
    let k = k.max(1).min(n.saturating_sub(1));
    let mut pairs = Vec::with_capacity(n * k);
    let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
    for i in 0..n {
        best.clear();
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = points[i].distance(points[j]);
            if best.len() == k && d >= best[k - 1].0 {
                continue;
            }
            let pos = best.partition_point(|&(bd, bj)| bd < d || (bd == d && bj < j));
            best.insert(pos, (d, j));
            best.truncate(k);
        }
        pairs.extend(best.iter().map(|&(d, j)| (i.min(j), i.max(j), d)));
    }
    pairs.sort_by_key(|x| (x.0, x.1));
    pairs.dedup_by(|x, y| x.0 == y.0 && x.1 == y.1);
    NeighborGraph {
        nodes: n,
        edges: pairs
            .into_iter()
            .map(|(a, b, d)| NeighborEdge {
                a,
                b,
                distance: if d == 0.0 { MIN_EDGE_DISTANCE } else { d },
            })
            .collect(),
    }
}

pub fn build_neighbor_graph(components: &[Component], k: usize) -> NeighborGraph {
    let points: Vec<Point> = components.iter().map(|c| c.centroid).collect();
    neighbor_graph_from_points(&points, k)
}

/// `1 / (2 * mean edge distance)`.
pub fn compute_beta(graph: &NeighborGraph) -> Result<f64> {
    graph
        .mean_distance()
        .map(|m| 1.0 / (2.0 * m))
        .ok_or(Error::BetaUndefined)
}

/// `exp(-beta * distance)`.
pub fn smoothness_cost(beta: f64, distance: f64) -> f64 {
    (-beta * distance).exp()
}

/// Relative weight of the smoothness term.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SmoothnessScale {
    /// Mean gap between each component's best and second-best data cost.
    #[default]
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedEdge {
    pub a: usize,
    pub b: usize,
    pub distance: f64,
    pub weight: f64,
}

/// Data costs and Potts edge weights of one page.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyModel {
    num_components: usize,
    num_labels: usize,
    /// Row-major `num_components x num_labels`.
    data_cost: Vec<f64>,
    edges: Vec<WeightedEdge>,
    beta: Option<f64>,
    lambda: f64,
}

impl EnergyModel {
    /// Assembles a model from explicit costs. `data_cost` is row-major,
    /// edges are `(a, b, weight)` with `a != b`.
    pub fn from_parts(
        num_labels: usize,
        data_cost: Vec<f64>,
        edges: Vec<(usize, usize, f64)>,
    ) -> Self {
        assert!(num_labels >= 1, "at least one label");
        assert_eq!(
            data_cost.len() % num_labels,
            0,
            "data cost matrix is not rectangular"
        );
        let num_components = data_cost.len() / num_labels;
        let edges = edges
            .into_iter()
            .map(|(a, b, weight)| {
                assert!(
                    a != b && a < num_components && b < num_components,
                    "invalid edge ({a}, {b})"
                );
                WeightedEdge {
                    a: a.min(b),
                    b: a.max(b),
                    distance: f64::NAN,
                    weight,
                }
            })
            .collect();
        EnergyModel {
            num_components,
            num_labels,
            data_cost,
            edges,
            beta: None,
            lambda: 1.0,
        }
    }

    pub fn num_components(&self) -> usize {
        self.num_components
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    #[inline]
    pub fn data_cost(&self, component: usize, label: usize) -> f64 {
        self.data_cost[component * self.num_labels + label]
    }

    pub fn data_costs(&self, component: usize) -> &[f64] {
        &self.data_cost[component * self.num_labels..(component + 1) * self.num_labels]
    }

    pub fn edges(&self) -> &[WeightedEdge] {
        &self.edges
    }

    pub fn beta(&self) -> Option<f64> {
        self.beta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub(crate) fn check_labeling(&self, labels: &[usize]) -> Result<()> {
        if labels.len() != self.num_components {
            return Err(Error::IncompleteLabeling {
                expected: self.num_components,
                actual: labels.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= self.num_labels) {
            return Err(Error::InvalidLabel {
                label: bad,
                count: self.num_labels,
            });
        }
        Ok(())
    }

    /// Per-component data-cost argmin, ties to the lower label.
    pub fn nearest_labels(&self) -> Vec<usize> {
        (0..self.num_components)
            .map(|e| {
                let row = self.data_costs(e);
                (0..self.num_labels).fold(0, |best, l| if row[l] < row[best] { l } else { best })
            })
            .collect()
    }

    /// Text table of beta, lambda, data costs and edges.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "components {} labels {}",
            self.num_components, self.num_labels
        );
        match self.beta {
            Some(b) => {
                let _ = writeln!(s, "beta {b:.12}");
            }
            None => {
                let _ = writeln!(s, "beta undefined");
            }
        }
        let _ = writeln!(s, "lambda {:.12}", self.lambda);
        let _ = writeln!(s, "# data");
        for e in 0..self.num_components {
            let row: Vec<String> = self
                .data_costs(e)
                .iter()
                .map(|c| format!("{c:.6}"))
                .collect();
            let _ = writeln!(s, "{e}\t{}", row.join("\t"));
        }
        let _ = writeln!(s, "# edges");
        for e in &self.edges {
            let _ = writeln!(s, "{}\t{}\t{:.6}\t{:.12}", e.a, e.b, e.distance, e.weight);
        }
        s
    }
}

/// Data costs from centroid-to-blob distances and weights
/// `lambda * exp(-beta * d)`. An edgeless graph leaves beta undefined and
/// the model reduces to its data term.
pub fn build_energy_model(
    components: &[Component],
    blobs: &BlobLineSet,
    graph: &NeighborGraph,
    scale: SmoothnessScale,
) -> Result<EnergyModel> {
    let num_labels = blobs.count();
    let mut data_cost = Vec::with_capacity(components.len() * num_labels);
    for c in components {
        for l in 1..=num_labels {
            data_cost.push(nearest_blob_distance(blobs, l as u32, c.centroid)?);
        }
    }
    let lambda = match scale {
        SmoothnessScale::Fixed(v) => v,
        SmoothnessScale::Auto => auto_lambda(&data_cost, num_labels),
    };
    let beta = compute_beta(graph).ok();
    let edges = graph
        .edges
        .iter()
        .map(|e| WeightedEdge {
            a: e.a,
            b: e.b,
            distance: e.distance,
            weight: beta.map_or(0.0, |b| lambda * smoothness_cost(b, e.distance)),
        })
        .collect();
    Ok(EnergyModel {
        num_components: components.len(),
        num_labels,
        data_cost,
        edges,
        beta,
        lambda,
    })
}

/// Mean best-to-second-best data cost gap; 1 when fewer than two labels.
fn auto_lambda(data_cost: &[f64], num_labels: usize) -> f64 {
    if num_labels < 2 || data_cost.is_empty() {
        return 1.0;
    }
    let rows = data_cost.chunks_exact(num_labels);
    let n = rows.len();
    let total: f64 = rows
        .map(|row| {
            let (mut first, mut second) = (f64::INFINITY, f64::INFINITY);
            for &c in row {
                if c < first {
                    second = first;
                    first = c;
                } else if c < second {
                    second = c;
                }
            }
            second - first
        })
        .sum();
    total / n as f64
}

/// `E(f)` evaluated directly.
pub fn total_energy(model: &EnergyModel, labels: &[usize]) -> Result<f64> {
    model.check_labeling(labels)?;
    let data: f64 = labels
        .iter()
        .enumerate()
        .map(|(e, &l)| model.data_cost(e, l))
        .sum();
    let smooth: f64 = model
        .edges
        .iter()
        .filter(|e| labels[e.a] != labels[e.b])
        .map(|e| e.weight)
        .sum();
    Ok(data + smooth)
}
