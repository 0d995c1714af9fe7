//! Unstructured second layer: a directed k-nearest-neighbor graph over
//! segments whose node labels are relaxed by ICM under a size- and
//! distance-weighted Potts prior, followed by merging of agreeing neighbors.
//!
//! The prior of node `i` with label `f_i` is
//!
//! ```text
//! Σ_{i' in kNN(i)} ((f_i - f_i') / 2)^2 · (S_i / S_i') · (D_ii' / D_max(i))
//! ```
//!
//! with `S` the pixel count, `D` the centroid distance and `D_max(i)` the
//! largest distance among node `i`'s own neighbors.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::imgcore::Segment;
use crate::mrf::{DataField, Label};

/// Centroid distances are floored here so coincident centroids keep the
/// prior finite.
pub const MIN_DISTANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct GraphNode {
    pub segment_id: usize,
    pub label: Label,
    pub pixel_count: usize,
    pub centroid: (f64, f64),
    /// Mean normalized gray over the segment, in `[-1, 1]`.
    pub mean_gray: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    /// Index of the neighbor in [`SegmentGraph::nodes`].
    pub target: usize,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SegmentGraph {
    nodes: Vec<GraphNode>,
    edges: Vec<Vec<Edge>>,
    d_max: Vec<f64>,
}

impl SegmentGraph {
    /// Connects every node to its `min(k, n - 1)` nearest nodes by centroid
    /// distance, ties going to the lower segment id.
    pub fn from_nodes(nodes: Vec<GraphNode>, k: usize) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidParameter("segment graph needs at least one segment".into()));
        }
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if let Some(n) = nodes.iter().find(|n| n.pixel_count == 0) {
            return Err(Error::InvalidParameter(format!("segment {} has no pixels", n.segment_id)));
        }
        let mut edges = Vec::with_capacity(nodes.len());
        let mut d_max = Vec::with_capacity(nodes.len());
        for (i, a) in nodes.iter().enumerate() {
            let mut cand: Vec<Edge> = nodes
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(j, b)| {
                    let d = (a.centroid.0 - b.centroid.0).hypot(a.centroid.1 - b.centroid.1);
                    Edge {
                        target: j,
                        distance: d.max(MIN_DISTANCE),
                    }
                })
                .collect();
            cand.sort_by(|x, y| {
                x.distance
                    .total_cmp(&y.distance)
                    .then(nodes[x.target].segment_id.cmp(&nodes[y.target].segment_id))
            });
            cand.truncate(k);
            d_max.push(cand.iter().map(|e| e.distance).fold(0.0, f64::max));
            edges.push(cand);
        }
        Ok(Self { nodes, edges, d_max })
    }

    pub fn nodes(&self) -> &[GraphNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn neighbors(&self, node: usize) -> &[Edge] {
        &self.edges[node]
    }

    pub fn d_max(&self, node: usize) -> f64 {
        self.d_max[node]
    }

    pub fn set_label(&mut self, node: usize, label: Label) {
        self.nodes[node].label = label;
    }

    /// Plain-text dump, one directed edge per line:
    /// `node_id neighbor_id distance s_ratio` (segment ids, `S_i / S_i'`).
    pub fn to_edge_list(&self) -> String {
        let mut out = String::from("# node_id neighbor_id distance s_ratio\n");
        for (i, node) in self.nodes.iter().enumerate() {
            for e in &self.edges[i] {
                let other = &self.nodes[e.target];
                let ratio = node.pixel_count as f64 / other.pixel_count as f64;
                writeln!(out, "{} {} {:.6} {:.6}", node.segment_id, other.segment_id, e.distance, ratio)
                    .expect("writing to a String");
            }
        }
        out
    }
}

/// Builds the graph over `segments`, taking each node's observation as the
/// mean of `observations` over its pixels.
pub fn build_knn_graph(segments: &[Segment], observations: &DataField, k: usize) -> Result<SegmentGraph> {
    let nodes = segments
        .iter()
        .map(|s| {
            let sum: f64 = s.pixels().iter().map(|&(x, y)| observations.get(x, y)).sum();
            GraphNode {
                segment_id: s.id,
                label: s.label,
                pixel_count: s.pixel_count(),
                centroid: s.centroid(),
                mean_gray: sum / s.pixel_count() as f64,
            }
        })
        .collect();
    SegmentGraph::from_nodes(nodes, k)
}

pub fn node_prior_energy(graph: &SegmentGraph, node: usize, candidate: Label) -> f64 {
    let me = &graph.nodes[node];
    let d_max = graph.d_max[node];
    graph.edges[node]
        .iter()
        .filter(|e| graph.nodes[e.target].label != candidate)
        .map(|e| {
            let other = &graph.nodes[e.target];
            // ((±2)/2)^2 = 1 for a disagreeing pair
            (me.pixel_count as f64 / other.pixel_count as f64) * (e.distance / d_max)
        })
        .sum()
}

fn node_energy(graph: &SegmentGraph, node: usize, candidate: Label, beta_u: f64) -> f64 {
    let diff = (candidate.value() - graph.nodes[node].mean_gray) / 2.0;
    diff * diff + beta_u * node_prior_energy(graph, node, candidate)
}

/// Sum over nodes of likelihood plus `beta_u` times the prior at the current
/// labels.
pub fn graph_energy(graph: &SegmentGraph, beta_u: f64) -> f64 {
    (0..graph.len()).map(|i| node_energy(graph, i, graph.nodes[i].label, beta_u)).sum()
}

/// Asynchronous ICM over nodes in ascending segment-id order, keeping the
/// incumbent label on ties. Returns flips per executed sweep.
pub fn icm_graph(graph: &mut SegmentGraph, beta_u: f64, iterations: usize) -> Result<Vec<usize>> {
    if !(beta_u >= 0.0 && beta_u.is_finite()) {
        return Err(Error::InvalidParameter(format!("beta_u must be finite and >= 0, got {beta_u}")));
    }
    if iterations == 0 {
        return Err(Error::InvalidParameter("iterations must be at least 1".into()));
    }
    let mut order: Vec<usize> = (0..graph.len()).collect();
    order.sort_by_key(|&i| (graph.nodes[i].segment_id, i));
    let mut history = Vec::new();
    for _ in 0..iterations {
        let mut flips = 0;
        for &i in &order {
            let current = graph.nodes[i].label;
            let other = current.flipped();
            if node_energy(graph, i, other, beta_u) < node_energy(graph, i, current, beta_u) {
                graph.nodes[i].label = other;
                flips += 1;
            }
        }
        history.push(flips);
        if flips == 0 {
            break;
        }
    }
    Ok(history)
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Unions segments joined by a kNN edge (either direction) whose nodes carry
/// the same final label. Merged segments take that label and may be
/// non-contiguous. Output ids follow the raster order of each segment's first
/// pixel.
pub fn merge_segments(graph: &SegmentGraph, segments: &[Segment]) -> Result<Vec<Segment>> {
    if graph.len() != segments.len() {
        return Err(Error::InvalidParameter(format!(
            "graph has {} nodes but {} segments were given",
            graph.len(),
            segments.len()
        )));
    }
    if let Some((n, s)) = graph.nodes.iter().zip(segments).find(|(n, s)| n.segment_id != s.id) {
        return Err(Error::InvalidParameter(format!(
            "graph node for segment {} paired with segment {}",
            n.segment_id, s.id
        )));
    }
    let mut parent: Vec<usize> = (0..graph.len()).collect();
    for (i, edges) in graph.edges.iter().enumerate() {
        for e in edges {
            if graph.nodes[i].label == graph.nodes[e.target].label {
                let (a, b) = (find(&mut parent, i), find(&mut parent, e.target));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); graph.len()];
    for i in 0..graph.len() {
        let root = find(&mut parent, i);
        groups[root].push(i);
    }
    let mut merged: Vec<Segment> = groups
        .into_iter()
        .filter(|g| !g.is_empty())
        .map(|g| {
            let label = graph.nodes[g[0]].label;
            let pixels = g.iter().flat_map(|&i| segments[i].pixels().iter().copied()).collect();
            Segment::from_pixels(0, label, pixels)
        })
        .collect();
    merged.sort_by_key(|s| {
        let (x, y) = s.first_pixel();
        (y, x)
    });
    for (id, s) in merged.iter_mut().enumerate() {
        s.id = id;
    }
    Ok(merged)
}
