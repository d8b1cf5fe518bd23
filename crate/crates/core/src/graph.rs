//! Sparse undirected weighted graphs and the quantities derived from them:
//! degrees, the combinatorial Laplacian `L = D - W`, and the Gershgorin discs
//! of `B = A + mu*L` under a diagonal similarity transform.
//!
//! Adjacency is stored in compressed sparse row form with every row sorted
//! by neighbor index, so neighbor iteration is O(deg) and always visits
//! neighbors in ascending order.

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};
use crate::sampler::SamplingState;

/// Node index, 0-based and contiguous.
pub type NodeId = usize;

/// Undirected weighted graph in CSR layout.
///
/// Construct with [`Graph::from_edges`] for a validated graph. The
/// `*_unchecked` constructors admit anything (including asymmetric or
/// disconnected inputs) so that [`validate`] has something to report on.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    weights: Vec<f64>,
    degrees: Vec<f64>,
}

impl Graph {
    /// Builds and validates an undirected graph from an edge list. Each
    /// `(i, j, w)` is stored in both directions. Duplicate pairs are rejected.
    pub fn from_edges(node_count: usize, edges: &[(NodeId, NodeId, f64)]) -> Result<Self> {
        let graph = Self::from_edges_unchecked(node_count, edges)?;
        graph.check()?;
        Ok(graph)
    }

    /// Like [`Graph::from_edges`] but skips validation. Indices are still
    /// bounds-checked since the CSR layout depends on them.
    pub fn from_edges_unchecked(node_count: usize, edges: &[(NodeId, NodeId, f64)]) -> Result<Self> {
        let mut entries = Vec::with_capacity(edges.len() * 2);
        for &(i, j, w) in edges {
            entries.push((i, j, w));
            if i != j {
                entries.push((j, i, w));
            }
        }
        Self::from_directed_entries(node_count, entries)
    }

    /// Builds a graph from raw adjacency entries `(row, col, weight)` exactly
    /// as given. Nothing forces symmetry; [`validate`] will flag it.
    pub fn from_directed_entries(
        node_count: usize,
        mut entries: Vec<(NodeId, NodeId, f64)>,
    ) -> Result<Self> {
        if let Some(&(i, j, _)) = entries.iter().find(|(i, j, _)| *i >= node_count || *j >= node_count) {
            return Err(Error::arg(format!(
                "edge ({i}, {j}) references a node outside 0..{node_count}"
            )));
        }
        entries.sort_by_key(|e| (e.0, e.1));
        if let Some(pair) = entries.windows(2).find(|p| (p[0].0, p[0].1) == (p[1].0, p[1].1)) {
            return Err(Error::arg(format!(
                "duplicate edge ({}, {})",
                pair[0].0, pair[0].1
            )));
        }

        let mut offsets = vec![0usize; node_count + 1];
        for &(i, _, _) in &entries {
            offsets[i + 1] += 1;
        }
        for i in 0..node_count {
            offsets[i + 1] += offsets[i];
        }
        let targets: Vec<NodeId> = entries.iter().map(|e| e.1).collect();
        let weights: Vec<f64> = entries.iter().map(|e| e.2).collect();
        let degrees = (0..node_count)
            .map(|i| weights[offsets[i]..offsets[i + 1]].iter().sum())
            .collect();
        Ok(Graph {
            offsets,
            targets,
            weights,
            degrees,
        })
    }

    pub fn node_count(&self) -> usize {
        self.degrees.len()
    }

    /// Number of undirected edges `M` (each stored twice).
    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    /// Neighbors of `i` and the connecting weights, ascending by neighbor index.
    pub fn neighbors(&self, i: NodeId) -> impl ExactSizeIterator<Item = (NodeId, f64)> + '_ {
        let range = self.offsets[i]..self.offsets[i + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    pub fn neighbor_indices(&self, i: NodeId) -> &[NodeId] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Weight of edge `(i, j)`, or `None` when absent.
    pub fn weight(&self, i: NodeId, j: NodeId) -> Option<f64> {
        let row = self.neighbor_indices(i);
        row.binary_search(&j)
            .ok()
            .map(|k| self.weights[self.offsets[i] + k])
    }

    /// Weighted degrees `d_i = sum_j w_ij`.
    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn degree(&self, i: NodeId) -> f64 {
        self.degrees[i]
    }

    pub fn max_degree(&self) -> f64 {
        self.degrees.iter().copied().fold(0.0, f64::max)
    }

    /// Undirected edges `(i, j, w)` with `i < j`, in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        (0..self.node_count()).flat_map(move |i| {
            self.neighbors(i)
                .filter(move |&(j, _)| j > i)
                .map(move |(j, w)| (i, j, w))
        })
    }

    /// Returns an error for the first validation issue found.
    pub fn check(&self) -> Result<()> {
        match validate(self).issues.into_iter().next() {
            Some(issue) => Err(Error::InvalidGraph(issue)),
            None => Ok(()),
        }
    }
}

/// A single structural problem found by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum ValidationIssue {
    TooFewNodes { node_count: usize },
    SelfLoop { node: NodeId },
    NonPositiveWeight { i: NodeId, j: NodeId, weight: f64 },
    Asymmetric { i: NodeId, j: NodeId },
    Disconnected { reached: usize, first_unreached: NodeId },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::TooFewNodes { node_count } => {
                write!(f, "graph has {node_count} node(s); at least 2 are required")
            }
            ValidationIssue::SelfLoop { node } => write!(f, "self-loop on node {node}"),
            ValidationIssue::NonPositiveWeight { i, j, weight } => {
                write!(f, "edge ({i}, {j}) has non-positive or non-finite weight {weight}")
            }
            ValidationIssue::Asymmetric { i, j } => {
                write!(f, "edge ({i}, {j}) has no matching reverse entry of equal weight")
            }
            ValidationIssue::Disconnected {
                reached,
                first_unreached,
            } => write!(
                f,
                "graph is disconnected: only {reached} node(s) reachable from node 0, node {first_unreached} is not"
            ),
        }
    }
}

/// Outcome of [`validate`]. Empty `issues` means the graph is usable.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub symmetric: bool,
    pub positive_weights: bool,
    pub no_self_loops: bool,
    pub connected: bool,
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Checks symmetry, positivity, absence of self-loops and connectivity
/// (one BFS from node 0). Graphs with fewer than two nodes are rejected
/// because an isolated node has zero degree.
pub fn validate(graph: &Graph) -> ValidationReport {
    let n = graph.node_count();
    let mut report = ValidationReport {
        symmetric: true,
        positive_weights: true,
        no_self_loops: true,
        connected: true,
        issues: Vec::new(),
    };
    if n < 2 {
        report.connected = false;
        report.issues.push(ValidationIssue::TooFewNodes { node_count: n });
        return report;
    }
    for i in 0..n {
        for (j, w) in graph.neighbors(i) {
            if i == j {
                if report.no_self_loops {
                    report.issues.push(ValidationIssue::SelfLoop { node: i });
                }
                report.no_self_loops = false;
                continue;
            }
            if !(w > 0.0 && w.is_finite()) {
                if report.positive_weights {
                    report
                        .issues
                        .push(ValidationIssue::NonPositiveWeight { i, j, weight: w });
                }
                report.positive_weights = false;
            }
            if graph.weight(j, i) != Some(w) {
                if report.symmetric {
                    report.issues.push(ValidationIssue::Asymmetric { i, j });
                }
                report.symmetric = false;
            }
        }
    }

    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut reached = 1;
    while let Some(k) = queue.pop_front() {
        for &t in graph.neighbor_indices(k) {
            if !seen[t] {
                seen[t] = true;
                reached += 1;
                queue.push_back(t);
            }
        }
    }
    if reached < n {
        report.connected = false;
        let first_unreached = seen.iter().position(|s| !s).unwrap_or(0);
        report.issues.push(ValidationIssue::Disconnected {
            reached,
            first_unreached,
        });
    }
    report
}

/// Matrix-free combinatorial Laplacian `L = D - W` of a validated graph.
#[derive(Debug, Clone, Copy)]
pub struct LaplacianOperator<'g> {
    graph: &'g Graph,
}

/// Validates `graph` and wraps it as a Laplacian operator.
pub fn build_laplacian(graph: &Graph) -> Result<LaplacianOperator<'_>> {
    graph.check()?;
    Ok(LaplacianOperator { graph })
}

impl<'g> LaplacianOperator<'g> {
    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn dim(&self) -> usize {
        self.graph.node_count()
    }

    pub fn diagonal(&self) -> &'g [f64] {
        self.graph.degrees()
    }

    /// `out = L x`. Each row is reduced in ascending neighbor order, so the
    /// result is bit-for-bit reproducible.
    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.dim(), "vector length must match node count");
        assert_eq!(out.len(), self.dim(), "output length must match node count");
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = self.graph.degree(i) * x[i];
            for (j, w) in self.graph.neighbors(i) {
                acc -= w * x[j];
            }
            *o = acc;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.apply_into(x, &mut out);
        out
    }

    /// Quadratic form `x^T L x = sum_{(i,j) in E} w_ij (x_i - x_j)^2`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.graph
            .edges()
            .map(|(i, j, w)| w * (x[i] - x[j]).powi(2))
            .sum()
    }
}

/// One Gershgorin disc of `C = S B S^-1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disc {
    pub center: f64,
    pub radius: f64,
}

impl Disc {
    pub fn left_end(&self) -> f64 {
        self.center - self.radius
    }

    pub fn right_end(&self) -> f64 {
        self.center + self.radius
    }
}

/// Per-node Gershgorin discs of the similarity-transformed coefficient matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscView {
    pub discs: Vec<Disc>,
}

impl DiscView {
    pub fn left_ends(&self) -> Vec<f64> {
        self.discs.iter().map(Disc::left_end).collect()
    }

    pub fn min_left_end(&self) -> f64 {
        self.discs
            .iter()
            .map(Disc::left_end)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_right_end(&self) -> f64 {
        self.discs
            .iter()
            .map(Disc::right_end)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Radius of disc `i` in `C = S B S^-1`: `s_i * mu * sum_j w_ij / s_j`.
pub(crate) fn scaled_radius(graph: &Graph, scale: &[f64], i: NodeId, mu: f64) -> f64 {
    scale[i] * mu * weighted_inverse_scale_sum(graph, scale, i)
}

/// `sum_{j in N_i} w_ij / s_j`, reduced in ascending neighbor order.
pub(crate) fn weighted_inverse_scale_sum(graph: &Graph, scale: &[f64], i: NodeId) -> f64 {
    graph.neighbors(i).map(|(j, w)| w / scale[j]).sum()
}

/// Gershgorin discs of `S (A + mu L) S^-1` for the given sampling state.
/// Centers are `a_ii + mu d_i` regardless of the scale factors.
pub fn disc_view(graph: &Graph, state: &SamplingState, mu: f64) -> Result<DiscView> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::Domain(format!("mu must be positive, got {mu}")));
    }
    let n = graph.node_count();
    if state.scale.len() != n || state.sampled.len() != n {
        return Err(Error::arg(format!(
            "sampling state has length {} but graph has {n} nodes",
            state.scale.len()
        )));
    }
    if let Some((i, s)) = state
        .scale
        .iter()
        .enumerate()
        .find(|(_, s)| !(**s > 0.0 && s.is_finite()))
    {
        return Err(Error::Domain(format!("scale factor of node {i} is {s}; must be positive")));
    }
    let discs = (0..n)
        .map(|i| Disc {
            center: state.indicator(i) + mu * graph.degree(i),
            radius: scaled_radius(graph, &state.scale, i, mu),
        })
        .collect();
    Ok(DiscView { discs })
}

/// Upper bound on every eigenvalue of `A + mu L` for any sampling pattern.
pub fn eigen_upper_bound(graph: &Graph, mu: f64) -> f64 {
    1.0 + 2.0 * mu * graph.max_degree()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn k2_laplacian_products() {
        let g = Graph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let l = build_laplacian(&g).unwrap();
        assert_eq!(l.apply(&[1.0, 1.0]), vec![0.0, 0.0]);
        assert_eq!(l.apply(&[1.0, -1.0]), vec![2.0, -2.0]);
    }

    #[test]
    fn path_diagonal() {
        let g = path(4);
        let l = build_laplacian(&g).unwrap();
        assert_eq!(l.diagonal(), &[1.0, 2.0, 2.0, 1.0]);
    }

    #[test]
    fn neighbors_sorted_ascending() {
        let g = Graph::from_edges(4, &[(3, 0, 1.0), (0, 2, 2.0), (1, 0, 0.5)]).unwrap();
        assert_eq!(g.neighbor_indices(0), &[1, 2, 3]);
        assert_eq!(g.weight(2, 0), Some(2.0));
        assert_eq!(g.weight(1, 2), None);
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn validate_reports() {
        assert!(validate(&path(5)).is_valid());

        let disjoint = Graph::from_edges_unchecked(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        let r = validate(&disjoint);
        assert!(!r.connected);
        assert_eq!(
            r.issues,
            vec![ValidationIssue::Disconnected {
                reached: 2,
                first_unreached: 2
            }]
        );

        let negative = Graph::from_edges_unchecked(3, &[(0, 1, -0.5), (1, 2, 1.0)]).unwrap();
        let r = validate(&negative);
        assert!(!r.positive_weights);
        assert!(matches!(
            r.issues[0],
            ValidationIssue::NonPositiveWeight { weight, .. } if weight == -0.5
        ));

        let looped = Graph::from_edges_unchecked(2, &[(0, 1, 1.0), (1, 1, 1.0)]).unwrap();
        assert!(!validate(&looped).no_self_loops);

        let asym = Graph::from_directed_entries(2, vec![(0, 1, 1.0), (1, 0, 2.0)]).unwrap();
        assert!(!validate(&asym).symmetric);

        let single = Graph::from_edges_unchecked(1, &[]).unwrap();
        assert_eq!(
            validate(&single).issues,
            vec![ValidationIssue::TooFewNodes { node_count: 1 }]
        );
    }

    #[test]
    fn build_laplacian_rejects_invalid() {
        let disjoint = Graph::from_edges_unchecked(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        let err = build_laplacian(&disjoint).unwrap_err();
        assert!(err.to_string().contains("node 2"), "{err}");
        assert!(Graph::from_edges(3, &[(0, 1, 1.0), (1, 2, 0.0)]).is_err());
    }

    #[test]
    fn duplicate_and_out_of_range_edges() {
        assert!(Graph::from_edges(3, &[(0, 1, 1.0), (1, 0, 1.0)]).is_err());
        assert!(Graph::from_edges(2, &[(0, 2, 1.0)]).is_err());
    }

    #[test]
    fn disc_view_unsampled_and_single_sample() {
        let g = path(6);
        let mut state = SamplingState::new(6, 0.0);
        let view = disc_view(&g, &state, 0.3).unwrap();
        assert!(view.left_ends().iter().all(|&l| l == 0.0));

        state.sampled[2] = true;
        let ends = disc_view(&g, &state, 0.3).unwrap().left_ends();
        for (i, l) in ends.iter().enumerate() {
            assert_eq!(*l, if i == 2 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn disc_view_four_node_walkthrough() {
        // nodes 1..4 in the walkthrough are 0..3 here
        let g = path(4);
        let mut state = SamplingState::new(4, 0.2);
        state.sampled[2] = true;
        state.scale[2] = 1.4;
        let view = disc_view(&g, &state, 1.0).unwrap();
        assert!((view.discs[2].left_end() - 0.2).abs() < 1e-12);
        assert_eq!(view.discs[2].center, 3.0);
    }

    #[test]
    fn disc_view_rejects_bad_scale() {
        let g = path(3);
        let mut state = SamplingState::new(3, 0.0);
        state.scale[1] = 0.0;
        assert!(matches!(disc_view(&g, &state, 1.0), Err(Error::Domain(_))));
        state.scale[1] = 1.0;
        assert!(disc_view(&g, &state, 0.0).is_err());
    }

    #[test]
    fn upper_bounds() {
        assert_eq!(eigen_upper_bound(&path(5), 1.0), 5.0);
        assert!((eigen_upper_bound(&path(5), 0.01) - 1.04).abs() < 1e-15);
        let star = Graph::from_edges(5, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (0, 4, 1.0)]).unwrap();
        assert_eq!(eigen_upper_bound(&star, 1.0), 9.0);
    }
}
