//! Sampling by Gershgorin disc alignment.
//!
//! Two operations move the discs of `B = A + mu L`:
//!
//! * **shifting**: sampling node `i` sets `a_ii = 1`, moving disc `i` right by one;
//! * **scaling**: a diagonal similarity transform `S B S^-1` multiplies row
//!   `i`'s radius by `s_i` and divides node `i`'s contribution to each
//!   neighbor's radius by `s_i`. Centers and eigenvalues are unchanged.
//!
//! [`bfis`] walks the graph breadth-first and, per node, picks `s_k` so the
//! disc's left end sits exactly at a threshold `T`, sampling the node first
//! when that would need `s_k < 1`. [`bs_bfis`] bisects `T` against a budget.

use std::collections::VecDeque;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{disc_view, weighted_inverse_scale_sum, Graph, NodeId};

/// Mutable state of one BFIS run: the diagonals of `A` and `S`, the set of
/// enqueued nodes and the threshold being aligned to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingState {
    pub sampled: Vec<bool>,
    pub scale: Vec<f64>,
    pub visited: Vec<bool>,
    pub threshold: f64,
}

impl SamplingState {
    /// No samples, unit scales, nothing visited.
    pub fn new(node_count: usize, threshold: f64) -> Self {
        SamplingState {
            sampled: vec![false; node_count],
            scale: vec![1.0; node_count],
            visited: vec![false; node_count],
            threshold,
        }
    }

    /// Unit-scale state with the given nodes sampled.
    pub fn from_sample_set(node_count: usize, nodes: &[NodeId]) -> Result<Self> {
        let mut state = Self::new(node_count, 0.0);
        for &i in nodes {
            if i >= node_count {
                return Err(Error::arg(format!("sample index {i} out of range 0..{node_count}")));
            }
            if state.sampled[i] {
                return Err(Error::arg(format!("sample index {i} listed twice")));
            }
            state.sampled[i] = true;
            state.visited[i] = true;
        }
        Ok(state)
    }

    pub fn len(&self) -> usize {
        self.sampled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sampled.is_empty()
    }

    /// `a_ii` as a real.
    pub fn indicator(&self, i: NodeId) -> f64 {
        if self.sampled[i] {
            1.0
        } else {
            0.0
        }
    }

    pub fn sample_count(&self) -> usize {
        self.sampled.iter().filter(|&&s| s).count()
    }

    /// Sampled node indices in ascending order.
    pub fn sampled_nodes(&self) -> Vec<NodeId> {
        self.sampled
            .iter()
            .enumerate()
            .filter_map(|(i, &s)| s.then_some(i))
            .collect()
    }
}

/// Scale factor that puts the left end of disc `i` exactly at `threshold`:
///
/// `s_i = (a_ii + mu d_i - T) / (mu * sum_{j in N_i} w_ij / s_j)`
///
/// A result below one (possibly negative) means alignment needs the node to
/// be sampled; it is returned as-is rather than treated as an error.
pub fn scale_factor(
    graph: &Graph,
    scale: &[f64],
    i: NodeId,
    sampled: bool,
    threshold: f64,
    mu: f64,
) -> Result<f64> {
    let denom = mu * weighted_inverse_scale_sum(graph, scale, i);
    if !(denom > 0.0 && denom.is_finite()) {
        return Err(Error::Domain(format!(
            "node {i} has no usable neighbors (scale-factor denominator {denom})"
        )));
    }
    let a = if sampled { 1.0 } else { 0.0 };
    Ok((a + mu * graph.degree(i) - threshold) / denom)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BfisResult {
    pub state: SamplingState,
    pub sample_count: usize,
    /// Nodes in dequeue order.
    pub order: Vec<NodeId>,
    /// Nodes that were sampled but still needed `s < 1` after the recompute.
    /// Their neighbors' discs expand, so the post-hoc lower bound is only
    /// guaranteed when this is empty.
    pub sub_unit_after_sampling: Vec<NodeId>,
}

fn check_common(graph: &Graph, start: NodeId, mu: f64) -> Result<()> {
    if start >= graph.node_count() {
        return Err(Error::arg(format!(
            "start node {start} out of range 0..{}",
            graph.node_count()
        )));
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::arg(format!("mu must be positive, got {mu}")));
    }
    Ok(())
}

/// Breadth First Iterative Sampling at a fixed threshold.
///
/// Visits every node once in FIFO order from `start`, enqueueing neighbors in
/// ascending index order. For each dequeued node `k`, `s_k` is computed with
/// `a_kk = 0`; if it is below one the node is sampled and `s_k` recomputed
/// once. Right after node `k` is processed its left end equals `threshold`.
pub fn bfis(graph: &Graph, threshold: f64, start: NodeId, mu: f64) -> Result<BfisResult> {
    graph.check()?;
    check_common(graph, start, mu)?;
    check_threshold(threshold)?;
    Ok(bfis_unchecked(graph, threshold, start, mu))
}

fn check_threshold(threshold: f64) -> Result<()> {
    if !(0.0..1.0).contains(&threshold) {
        return Err(Error::arg(format!("threshold must lie in [0, 1), got {threshold}")));
    }
    Ok(())
}

pub(crate) fn bfis_unchecked(graph: &Graph, threshold: f64, start: NodeId, mu: f64) -> BfisResult {
    let n = graph.node_count();
    let mut state = SamplingState::new(n, threshold);
    let mut order = Vec::with_capacity(n);
    let mut sub_unit = Vec::new();
    let mut queue = VecDeque::with_capacity(n);

    queue.push_back(start);
    state.visited[start] = true;
    while let Some(k) = queue.pop_front() {
        order.push(k);
        // denominators are positive on a validated graph with positive scales
        let inv_sum = mu * weighted_inverse_scale_sum(graph, &state.scale, k);
        let base = mu * graph.degree(k) - threshold;
        let mut s = base / inv_sum;
        if s < 1.0 {
            state.sampled[k] = true;
            s = (1.0 + base) / inv_sum;
            if s < 1.0 {
                sub_unit.push(k);
            }
        }
        state.scale[k] = s;
        for &t in graph.neighbor_indices(k) {
            if !state.visited[t] {
                state.visited[t] = true;
                queue.push_back(t);
            }
        }
    }

    let sample_count = state.sample_count();
    BfisResult {
        state,
        sample_count,
        order,
        sub_unit_after_sampling: sub_unit,
    }
}

/// Output of the threshold bisection.
#[derive(Debug, Clone, PartialEq)]
pub struct BsBfisResult {
    /// The BFIS run at the returned threshold.
    pub run: BfisResult,
    /// Largest threshold found whose BFIS run met the budget.
    pub threshold: f64,
    pub start: NodeId,
    /// Bisection steps taken.
    pub iterations: usize,
    /// BFIS invocations including the final one at the returned threshold.
    pub bfis_calls: usize,
    /// `(T, m)` for every bisection step.
    pub trace: Vec<(f64, usize)>,
}

impl BsBfisResult {
    pub fn state(&self) -> &SamplingState {
        &self.run.state
    }

    pub fn sample_count(&self) -> usize {
        self.run.sample_count
    }
}

fn check_budget(graph: &Graph, budget: usize) -> Result<()> {
    if budget == 0 || budget > graph.node_count() {
        return Err(Error::arg(format!(
            "sample budget must lie in 1..={}, got {budget}",
            graph.node_count()
        )));
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::arg(format!("epsilon must be positive, got {epsilon}")));
    }
    Ok(())
}

/// Binary search on `T` in `[0, 1]` for the largest threshold whose BFIS
/// run samples at most `budget` nodes. The returned state comes from one
/// more BFIS run at the final `left` end of the bracket.
pub fn bs_bfis(
    graph: &Graph,
    budget: usize,
    epsilon: f64,
    start: NodeId,
    mu: f64,
) -> Result<BsBfisResult> {
    graph.check()?;
    check_common(graph, start, mu)?;
    check_budget(graph, budget)?;
    check_epsilon(epsilon)?;
    Ok(bs_bfis_unchecked(graph, budget, epsilon, start, mu))
}

fn bs_bfis_unchecked(
    graph: &Graph,
    budget: usize,
    epsilon: f64,
    start: NodeId,
    mu: f64,
) -> BsBfisResult {
    let (mut left, mut right) = (0.0_f64, 1.0_f64);
    let mut trace = Vec::new();
    while right - left > epsilon {
        let t = 0.5 * (left + right);
        let m = bfis_unchecked(graph, t, start, mu).sample_count;
        trace.push((t, m));
        if m > budget {
            right = t;
        } else {
            left = t;
        }
    }
    BsBfisResult {
        run: bfis_unchecked(graph, left, start, mu),
        threshold: left,
        start,
        iterations: trace.len(),
        bfis_calls: trace.len() + 1,
        trace,
    }
}

/// Runs [`bs_bfis`] from every start node and keeps the largest threshold,
/// lowest start index on ties. Starts are evaluated in parallel.
pub fn best_start_bs_bfis(
    graph: &Graph,
    budget: usize,
    epsilon: f64,
    mu: f64,
) -> Result<BsBfisResult> {
    graph.check()?;
    check_common(graph, 0, mu)?;
    check_budget(graph, budget)?;
    check_epsilon(epsilon)?;
    let best = (0..graph.node_count())
        .into_par_iter()
        .map(|start| bs_bfis_unchecked(graph, budget, epsilon, start, mu))
        .reduce_with(|a, b| {
            // max threshold, then min start: associative, so the parallel
            // reduction is deterministic
            if b.threshold > a.threshold || (b.threshold == a.threshold && b.start < a.start) {
                b
            } else {
                a
            }
        })
        .expect("graph has at least two nodes");
    Ok(best)
}

/// How the BFS root is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StartPolicy {
    BruteForce,
    Index(NodeId),
    /// Uniform over nodes, drawn from the run seed.
    Random,
}

impl std::str::FromStr for StartPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brute-force" => Ok(StartPolicy::BruteForce),
            "random" => Ok(StartPolicy::Random),
            _ => s
                .strip_prefix("index:")
                .and_then(|n| n.parse().ok())
                .map(StartPolicy::Index)
                .ok_or_else(|| {
                    Error::arg(format!(
                        "bad start policy {s:?}; expected brute-force, random or index:<n>"
                    ))
                }),
        }
    }
}

impl std::fmt::Display for StartPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StartPolicy::BruteForce => write!(f, "brute-force"),
            StartPolicy::Index(i) => write!(f, "index:{i}"),
            StartPolicy::Random => write!(f, "random"),
        }
    }
}

/// Dispatches to [`bs_bfis`] or [`best_start_bs_bfis`] per `policy`.
pub fn bs_bfis_with_policy(
    graph: &Graph,
    budget: usize,
    epsilon: f64,
    mu: f64,
    policy: StartPolicy,
    seed: u64,
) -> Result<BsBfisResult> {
    match policy {
        StartPolicy::BruteForce => best_start_bs_bfis(graph, budget, epsilon, mu),
        StartPolicy::Index(i) => bs_bfis(graph, budget, epsilon, i, mu),
        StartPolicy::Random => {
            use rand::Rng;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let start = rng.random_range(0..graph.node_count().max(1));
            bs_bfis(graph, budget, epsilon, start, mu)
        }
    }
}

/// Pads an under-budget state with the `budget - m` unsampled nodes whose
/// discs have the smallest left ends (ties by index). Returns the nodes added.
pub fn top_up(graph: &Graph, state: &mut SamplingState, budget: usize, mu: f64) -> Result<Vec<NodeId>> {
    check_budget(graph, budget)?;
    let m = state.sample_count();
    if m >= budget {
        return Ok(Vec::new());
    }
    let ends = disc_view(graph, state, mu)?.left_ends();
    let mut candidates: Vec<NodeId> = (0..graph.node_count()).filter(|&i| !state.sampled[i]).collect();
    candidates.sort_by(|&a, &b| ends[a].total_cmp(&ends[b]).then(a.cmp(&b)));
    candidates.truncate(budget - m);
    for &i in &candidates {
        state.sampled[i] = true;
        state.visited[i] = true;
    }
    Ok(candidates)
}

/// Uniformly random `budget`-subset without replacement, unit scales.
pub fn random_sample(node_count: usize, budget: usize, seed: u64) -> Result<SamplingState> {
    if budget == 0 || budget > node_count {
        return Err(Error::arg(format!(
            "sample budget must lie in 1..={node_count}, got {budget}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes = index::sample(&mut rng, node_count, budget).into_vec();
    nodes.sort_unstable();
    SamplingState::from_sample_set(node_count, &nodes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    fn cycle(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn scale_factor_zero_threshold() {
        let g = path(2);
        let s = scale_factor(&g, &[1.0, 1.0], 0, true, 0.0, 1.0).unwrap();
        assert_eq!(s, 2.0);
    }

    #[test]
    fn scale_factor_walkthrough() {
        // walkthrough nodes 1..4 are 0..3
        let g = path(4);
        let mut scale = vec![1.0; 4];
        let s3 = scale_factor(&g, &scale, 2, true, 0.2, 1.0).unwrap();
        assert!((s3 - 1.4).abs() < 1e-15);
        scale[2] = s3;
        let s2 = scale_factor(&g, &scale, 1, false, 0.2, 1.0).unwrap();
        let expected = 1.8 / (1.0 + 1.0 / 1.4);
        assert!((s2 - expected).abs() < 1e-15);
        assert!(s2 > 1.0 && s2 < s3);
        assert!((s2 - 1.05).abs() < 1e-9);
        // unscaled left end of node 2 already clears T
        let left: f64 = 2.0 - (1.0 + 1.0 / 1.4);
        assert!((left - 0.2857142857142857).abs() < 1e-12);
    }

    #[test]
    fn scale_factor_negative_is_returned() {
        let g = path(3);
        let s = scale_factor(&g, &[1.0; 3], 0, false, 0.5, 0.1).unwrap();
        assert!(s < 0.0);
    }

    #[test]
    fn bfis_four_node_path() {
        let g = path(4);
        let r = bfis(&g, 0.01, 1, 1.0).unwrap();
        assert_eq!(r.state.sampled_nodes(), vec![1]);
        assert_eq!(r.order, vec![1, 0, 2, 3]);
        assert!(r.sub_unit_after_sampling.is_empty());
    }

    #[test]
    fn bfis_zero_threshold_samples_nothing() {
        for start in 0..5 {
            let r = bfis(&cycle(5), 0.0, start, 0.7).unwrap();
            assert_eq!(r.sample_count, 0);
            assert!(r.state.scale.iter().all(|&s| s == 1.0));
        }
    }

    #[test]
    fn bfis_aligns_each_node_on_processing() {
        let g = path(9);
        let (t, mu) = (0.3, 0.5);
        let r = bfis(&g, t, 4, mu).unwrap();
        // replay: after node k is processed, its left end is exactly T
        let mut scale = vec![1.0; 9];
        for &k in &r.order {
            scale[k] = r.state.scale[k];
            let a = if r.state.sampled[k] { 1.0 } else { 0.0 };
            let left = a + mu * (g.degree(k) - scale[k] * weighted_inverse_scale_sum(&g, &scale, k));
            assert!((left - t).abs() < 1e-10, "node {k}: {left}");
        }
        let ends = disc_view(&g, &r.state, mu).unwrap().left_ends();
        assert!(ends.iter().all(|&l| l >= t - 1e-10));
    }

    #[test]
    fn bfis_rejects_bad_arguments() {
        let g = path(3);
        assert!(bfis(&g, 1.0, 0, 1.0).is_err());
        assert!(bfis(&g, -0.1, 0, 1.0).is_err());
        assert!(bfis(&g, 0.5, 3, 1.0).is_err());
        assert!(bfis(&g, 0.5, 0, 0.0).is_err());
    }

    #[test]
    fn bs_bfis_iteration_bound() {
        let g = path(30);
        let r = bs_bfis(&g, 6, 1e-4, 0, 1.0).unwrap();
        assert_eq!(r.iterations, 14);
        assert_eq!(r.bfis_calls, 15);
        assert!(r.sample_count() <= 6);
        assert!(r.threshold >= 0.0 && r.threshold < 1.0);
    }

    #[test]
    fn bs_bfis_full_budget_approaches_one() {
        let g = path(7);
        let r = bs_bfis(&g, 7, 1e-4, 3, 0.5).unwrap();
        assert!(r.threshold >= 1.0 - 1e-4 && r.threshold < 1.0);
        let ends = disc_view(&g, r.state(), 0.5).unwrap().left_ends();
        assert!(ends.iter().all(|&l| l >= r.threshold - 1e-10));
    }

    #[test]
    fn bs_bfis_budget_range() {
        let g = path(4);
        assert!(bs_bfis(&g, 0, 1e-4, 0, 1.0).is_err());
        assert!(bs_bfis(&g, 5, 1e-4, 0, 1.0).is_err());
        assert!(bs_bfis(&g, 2, 0.0, 0, 1.0).is_err());
    }

    #[test]
    fn best_start_cycle_ties_to_zero() {
        let g = cycle(12);
        let best = best_start_bs_bfis(&g, 3, 1e-4, 1.0).unwrap();
        assert_eq!(best.start, 0);
        for start in 0..12 {
            let r = bs_bfis(&g, 3, 1e-4, start, 1.0).unwrap();
            assert_eq!(r.threshold, best.threshold);
        }
    }

    #[test]
    fn best_start_matches_enumeration() {
        let g = path(4);
        let best = best_start_bs_bfis(&g, 1, 1e-4, 1.0).unwrap();
        let mut expected = (f64::NEG_INFINITY, 0);
        for start in 0..4 {
            let r = bs_bfis(&g, 1, 1e-4, start, 1.0).unwrap();
            if r.threshold > expected.0 {
                expected = (r.threshold, start);
            }
        }
        assert_eq!((best.threshold, best.start), expected);
    }

    #[test]
    fn start_policy_parsing() {
        assert_eq!("brute-force".parse::<StartPolicy>().unwrap(), StartPolicy::BruteForce);
        assert_eq!("index:7".parse::<StartPolicy>().unwrap(), StartPolicy::Index(7));
        assert_eq!("random".parse::<StartPolicy>().unwrap(), StartPolicy::Random);
        assert!("index:x".parse::<StartPolicy>().is_err());
        assert_eq!(StartPolicy::Index(3).to_string(), "index:3");
    }

    #[test]
    fn top_up_fills_budget() {
        let g = path(10);
        let mut state = bfis(&g, 0.02, 0, 1.0).unwrap().state;
        let before = state.sample_count();
        let added = top_up(&g, &mut state, before + 2, 1.0).unwrap();
        assert_eq!(added.len(), 2);
        assert_eq!(state.sample_count(), before + 2);
        assert!(top_up(&g, &mut state, before + 2, 1.0).unwrap().is_empty());
    }

    #[test]
    fn random_sample_contract() {
        let full = random_sample(8, 8, 99).unwrap();
        assert!(full.sampled.iter().all(|&s| s));
        assert_eq!(random_sample(50, 7, 3).unwrap(), random_sample(50, 7, 3).unwrap());
        assert_eq!(random_sample(50, 7, 3).unwrap().sample_count(), 7);
        assert!(random_sample(5, 0, 1).is_err());
        assert!(random_sample(5, 6, 1).is_err());
    }

    #[test]
    fn random_sample_inclusion_frequency() {
        let (n, k, trials) = (10, 3, 10_000);
        let mut counts = vec![0usize; n];
        for seed in 0..trials {
            for i in random_sample(n, k, seed).unwrap().sampled_nodes() {
                counts[i] += 1;
            }
        }
        let p = 0.3;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        for c in counts {
            let freq = c as f64 / trials as f64;
            assert!((freq - p).abs() <= 3.0 * sigma, "frequency {freq}");
        }
    }
}
