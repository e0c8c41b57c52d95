//! Minimum s-t cuts and alpha-expansion.
//!
//! [`FlowNetwork::max_flow`] is Dinic's algorithm (shortest augmenting paths
//! in level graphs) on real capacities. [`alpha_expansion`] minimizes an
//! [`EnergyModel`] by repeatedly letting any subset of components switch to a
//! label `alpha`, choosing the best subset with one minimum cut per move.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::energy::{total_energy, EnergyModel};
use crate::Result;

pub const DEFAULT_MAX_SWEEPS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Arc {
    to: usize,
    rev: usize,
    cap: f64,
    /// Capacity given at construction, for reporting.
    original: f64,
}

/// A directed network with real capacities; every arc has a paired reverse
/// arc for residual updates.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    adj: Vec<Vec<Arc>>,
    source: usize,
    sink: usize,
}

/// Result of a max-flow computation.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxFlow {
    pub value: f64,
    /// `true` for nodes on the source side of a minimum cut.
    pub source_side: Vec<bool>,
}

impl FlowNetwork {
    pub fn new(nodes: usize, source: usize, sink: usize) -> Self {
        assert!(
            source < nodes && sink < nodes && source != sink,
            "invalid terminals"
        );
        FlowNetwork {
            adj: vec![Vec::new(); nodes],
            source,
            sink,
        }
    }

    pub fn nodes(&self) -> usize {
        self.adj.len()
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    /// Adds `u -> v` with capacity `cap` and `v -> u` with `rev_cap`.
    pub fn add_edge(&mut self, u: usize, v: usize, cap: f64, rev_cap: f64) {
        assert!(cap >= 0.0 && rev_cap >= 0.0, "negative capacity");
        assert!(u != v, "self loop");
        let (iu, iv) = (self.adj[u].len(), self.adj[v].len());
        self.adj[u].push(Arc {
            to: v,
            rev: iv,
            cap,
            original: cap,
        });
        self.adj[v].push(Arc {
            to: u,
            rev: iu,
            cap: rev_cap,
            original: rev_cap,
        });
    }

    /// Sum of original capacities of arcs leaving the `source_side` set.
    pub fn cut_capacity(&self, source_side: &[bool]) -> f64 {
        self.adj
            .iter()
            .enumerate()
            .filter(|(u, _)| source_side[*u])
            .flat_map(|(_, arcs)| arcs.iter())
            .filter(|a| !source_side[a.to])
            .map(|a| a.original)
            .sum()
    }

    /// Net flow out of each node given the current residual state.
    pub fn net_outflow(&self) -> Vec<f64> {
        self.adj
            .iter()
            .map(|arcs| arcs.iter().map(|a| a.original - a.cap).sum::<f64>())
            .collect()
    }

    fn tolerance(&self) -> f64 {
        let max = self
            .adj
            .iter()
            .flatten()
            .fold(0.0f64, |m, a| m.max(a.original));
        1e-12 * max.max(1.0)
    }

    fn levels(&self, eps: f64) -> Option<Vec<usize>> {
        let mut level = vec![usize::MAX; self.adj.len()];
        level[self.source] = 0;
        let mut queue = VecDeque::from([self.source]);
        while let Some(u) = queue.pop_front() {
            for a in &self.adj[u] {
                if a.cap > eps && level[a.to] == usize::MAX {
                    level[a.to] = level[u] + 1;
                    queue.push_back(a.to);
                }
            }
        }
        (level[self.sink] != usize::MAX).then_some(level)
    }

    fn augment(
        &mut self,
        u: usize,
        pushed: f64,
        level: &[usize],
        next: &mut [usize],
        eps: f64,
    ) -> f64 {
        if u == self.sink {
            return pushed;
        }
        while next[u] < self.adj[u].len() {
            let a = self.adj[u][next[u]];
            if a.cap > eps && level[a.to] == level[u] + 1 {
                let got = self.augment(a.to, pushed.min(a.cap), level, next, eps);
                if got > 0.0 {
                    self.adj[u][next[u]].cap -= got;
                    self.adj[a.to][a.rev].cap += got;
                    return got;
                }
            }
            next[u] += 1;
        }
        0.0
    }

    /// Maximum flow from source to sink and a minimum cut. The network keeps
    /// its residual state afterwards.
    pub fn max_flow(&mut self) -> MaxFlow {
        let eps = self.tolerance();
        let mut value = 0.0;
        while let Some(level) = self.levels(eps) {
            let mut next = vec![0usize; self.adj.len()];
            loop {
                let f = self.augment(self.source, f64::INFINITY, &level, &mut next, eps);
                if f <= 0.0 {
                    break;
                }
                value += f;
            }
        }
        // Source side: reachable in the residual graph.
        let mut source_side = vec![false; self.adj.len()];
        source_side[self.source] = true;
        let mut queue = VecDeque::from([self.source]);
        while let Some(u) = queue.pop_front() {
            for a in &self.adj[u] {
                if a.cap > eps && !source_side[a.to] {
                    source_side[a.to] = true;
                    queue.push_back(a.to);
                }
            }
        }
        MaxFlow { value, source_side }
    }
}

/// An assignment of every component to a label index, with its energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Labeling {
    pub assignment: Vec<usize>,
    pub energy: f64,
}

impl Labeling {
    pub fn new(model: &EnergyModel, assignment: Vec<usize>) -> Result<Self> {
        let energy = total_energy(model, &assignment)?;
        Ok(Labeling { assignment, energy })
    }

    /// Nearest-blob labeling: data-cost argmin, ties to the lower label.
    pub fn nearest(model: &EnergyModel) -> Self {
        Labeling::new(model, model.nearest_labels()).expect("argmin labeling is complete")
    }
}

/// The labeling produced by the best expansion of `current` to `alpha`.
///
/// Each component is a binary variable: keep its label (source side) or take
/// `alpha` (sink side). Unary and pairwise terms are those of the Potts
/// energy restricted to this move; pairwise terms are regular because the
/// Potts weight obeys the triangle inequality.
pub fn expansion_move(model: &EnergyModel, current: &[usize], alpha: usize) -> Vec<usize> {
    let n = model.num_components();
    // keep[p] = cost if p keeps its label, take[p] = cost if p takes alpha.
    let mut keep: Vec<f64> = (0..n).map(|p| model.data_cost(p, current[p])).collect();
    let mut take: Vec<f64> = (0..n).map(|p| model.data_cost(p, alpha)).collect();
    let (source, sink) = (n, n + 1);
    let mut net = FlowNetwork::new(n + 2, source, sink);
    for e in model.edges() {
        let (p, q, w) = (e.a, e.b, e.weight);
        if w == 0.0 {
            continue;
        }
        let (lp, lq) = (current[p], current[q]);
        // E(x_p, x_q) with 0 = keep, 1 = take alpha.
        let a = if lp != lq { w } else { 0.0 };
        let b = if lp != alpha { w } else { 0.0 };
        let c = if alpha != lq { w } else { 0.0 };
        // E = A + (C - A) x_p + (D - C) x_q + (B + C - A - D) (1 - x_p) x_q, D = 0.
        keep[p] += a;
        take[p] += c;
        take[q] -= c;
        let pair = b + c - a;
        if pair > 0.0 {
            // Cut when p keeps (source side) and q takes alpha (sink side).
            net.add_edge(p, q, pair, 0.0);
        }
    }
    for p in 0..n {
        let m = keep[p].min(take[p]);
        // Cutting source->p puts p on the sink side (take), p->sink keeps.
        net.add_edge(source, p, take[p] - m, 0.0);
        net.add_edge(p, sink, keep[p] - m, 0.0);
    }
    let cut = net.max_flow();
    (0..n)
        .map(|p| {
            if cut.source_side[p] {
                current[p]
            } else {
                alpha
            }
        })
        .collect()
}

/// One accepted expansion move.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcceptedMove {
    pub sweep: usize,
    pub alpha: usize,
    pub energy_before: f64,
    pub energy_after: f64,
}

/// Full record of an alpha-expansion run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionTrace {
    pub labeling: Labeling,
    pub moves: Vec<AcceptedMove>,
    pub sweeps: usize,
    /// True when the last sweep accepted no move.
    pub converged: bool,
}

fn improvement_tolerance(energy: f64) -> f64 {
    1e-9 * energy.abs().max(1.0)
}

/// Alpha-expansion from `initial`, sweeping labels in ascending order until a
/// sweep accepts no move or `max_sweeps` sweeps have run. A move is accepted
/// only if it strictly lowers the energy.
pub fn alpha_expansion_traced(
    model: &EnergyModel,
    initial: Labeling,
    max_sweeps: usize,
) -> Result<ExpansionTrace> {
    let mut current = Labeling::new(model, initial.assignment)?;
    let mut moves = Vec::new();
    let mut sweeps = 0;
    let mut converged = false;
    if model.num_labels() < 2 {
        return Ok(ExpansionTrace {
            labeling: current,
            moves,
            sweeps,
            converged: true,
        });
    }
    while sweeps < max_sweeps {
        sweeps += 1;
        let mut accepted = 0;
        for alpha in 0..model.num_labels() {
            let proposal = expansion_move(model, &current.assignment, alpha);
            if proposal == current.assignment {
                continue;
            }
            let energy = total_energy(model, &proposal)?;
            if energy < current.energy - improvement_tolerance(current.energy) {
                moves.push(AcceptedMove {
                    sweep: sweeps,
                    alpha,
                    energy_before: current.energy,
                    energy_after: energy,
                });
                current = Labeling {
                    assignment: proposal,
                    energy,
                };
                accepted += 1;
            }
        }
        if accepted == 0 {
            converged = true;
            break;
        }
    }
    Ok(ExpansionTrace {
        labeling: current,
        moves,
        sweeps,
        converged,
    })
}

pub fn alpha_expansion(
    model: &EnergyModel,
    initial: Labeling,
    max_sweeps: usize,
) -> Result<Labeling> {
    Ok(alpha_expansion_traced(model, initial, max_sweeps)?.labeling)
}
