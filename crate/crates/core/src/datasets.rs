//! Graph construction from located, valued nodes and the synthetic datasets
//! used by the experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::delaunay::delaunay_edges;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::reconstruct::GraphSignal;

/// A station: external id, planar location and observed value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: String,
    pub location: [f64; 2],
    pub value: f64,
}

/// Bandwidths of the geometric and signal Gaussian kernels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightParams {
    pub sigma_l: f64,
    pub sigma_x: f64,
}

impl Default for WeightParams {
    fn default() -> Self {
        WeightParams {
            sigma_l: 5.0,
            sigma_x: 3.0,
        }
    }
}

/// `exp(-|l_i - l_j|^2 / sigma_l^2) * exp(-|x_i - x_j|^2 / sigma_x^2)`
pub fn bilateral_weight(a: &NodeRecord, b: &NodeRecord, params: WeightParams) -> f64 {
    let dl = (a.location[0] - b.location[0]).powi(2) + (a.location[1] - b.location[1]).powi(2);
    let dx = (a.value - b.value).powi(2);
    (-dl / params.sigma_l.powi(2)).exp() * (-dx / params.sigma_x.powi(2)).exp()
}

/// Weights every edge with [`bilateral_weight`] and validates the result.
pub fn bilateral_weights(nodes: &[NodeRecord], edges: &[(NodeId, NodeId)], params: WeightParams) -> Result<Graph> {
    if !(params.sigma_l > 0.0 && params.sigma_x > 0.0) {
        return Err(Error::arg(format!(
            "kernel bandwidths must be positive, got sigma_l={} sigma_x={}",
            params.sigma_l, params.sigma_x
        )));
    }
    let weighted: Vec<_> = edges
        .iter()
        .map(|&(i, j)| {
            if i >= nodes.len() || j >= nodes.len() {
                return Err(Error::arg(format!("edge ({i}, {j}) references a missing node")));
            }
            Ok((i, j, bilateral_weight(&nodes[i], &nodes[j], params)))
        })
        .collect::<Result<_>>()?;
    Graph::from_edges(nodes.len(), &weighted)
}

/// Delaunay edges over node locations, weighted bilaterally.
pub fn delaunay_graph(nodes: &[NodeRecord], params: WeightParams) -> Result<Graph> {
    let points: Vec<[f64; 2]> = nodes.iter().map(|n| n.location).collect();
    let edges = delaunay_edges(&points)?;
    bilateral_weights(nodes, &edges, params)
}

/// Unweighted path `0 - 1 - ... - (n-1)`.
pub fn gen_line_graph(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::arg(format!("line graph needs at least 2 nodes, got {n}")));
    }
    let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
    Graph::from_edges(n, &edges)
}

/// Node records for a line graph: location `(i, 0)`, value 0.
pub fn line_records(n: usize) -> Vec<NodeRecord> {
    (0..n)
        .map(|i| NodeRecord {
            id: i.to_string(),
            location: [i as f64, 0.0],
            value: 0.0,
        })
        .collect()
}

/// Width and height of the box the synthetic stations are drawn in, in
/// degree-like units comparable to a continental longitude/latitude span.
pub const CLIMATE_BOX: [f64; 2] = [60.0, 25.0];

/// Smooth "temperature" field: a latitude gradient plus two long-wave
/// undulations, roughly 0..30 over [`CLIMATE_BOX`].
pub fn climate_field(location: [f64; 2]) -> f64 {
    let [lon, lat] = location;
    28.0 - 0.9 * lat + 3.0 * (lon / 9.0).sin() + 2.0 * (lat / 6.0 + lon / 14.0).cos()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClimateLike {
    pub nodes: Vec<NodeRecord>,
    pub graph: Graph,
    pub signal: GraphSignal,
}

/// Synthetic stand-in for a station network: `n` uniform locations in
/// [`CLIMATE_BOX`], values from [`climate_field`], Delaunay edges and
/// bilateral weights.
pub fn gen_climate_like(n: usize, seed: u64, params: WeightParams) -> Result<ClimateLike> {
    if n < 3 {
        return Err(Error::arg(format!("need at least 3 stations, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes: Vec<NodeRecord> = (0..n)
        .map(|i| {
            let location = [
                rng.random::<f64>() * CLIMATE_BOX[0],
                rng.random::<f64>() * CLIMATE_BOX[1],
            ];
            NodeRecord {
                id: format!("S{i:04}"),
                location,
                value: climate_field(location),
            }
        })
        .collect();
    let graph = delaunay_graph(&nodes, params)?;
    let signal = GraphSignal::new(nodes.iter().map(|r| r.value).collect())?;
    Ok(ClimateLike { nodes, graph, signal })
}
