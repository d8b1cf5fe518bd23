//! CSV interchange for graphs, sample sets and sweep tables.
//!
//! * nodes: `id,loc_x,loc_y,value`
//! * edges: `src,dst,weight` (ids from the node file; `(a,b)` and `(b,a)` are the same edge)
//! * samples: `node_id,scale_factor,sampled` plus a JSON metadata sidecar
//!
//! All writes go to a temporary file in the target directory that is then
//! renamed into place.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::datasets::NodeRecord;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::sampler::SamplingState;
use crate::spectral::{SweepConfig, SweepRow};

/// Writes `bytes` to `path` atomically.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("metadata serializes");
    bytes.push(b'\n');
    atomic_write(path, &bytes)
}

fn csv_bytes<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for row in rows {
        w.serialize(row).expect("in-memory csv write");
    }
    w.into_inner().expect("in-memory csv flush")
}

fn parse_error(path: &Path, err: &csv::Error) -> Error {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    let message = match err.kind() {
        csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
        _ => err.to_string(),
    };
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    }
}

fn open_csv(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<(u64, T)>> {
    let mut reader = open_csv(path)?;
    let mut rows = Vec::new();
    for result in reader.deserialize::<T>() {
        match result {
            Ok(row) => rows.push(row),
            Err(e) if matches!(e.kind(), csv::ErrorKind::Io(_)) => {
                let csv::ErrorKind::Io(io) = e.into_kind() else { unreachable!() };
                return Err(Error::io(path, io));
            }
            Err(e) => return Err(parse_error(path, &e)),
        }
    }
    // header is line 1
    Ok(rows.into_iter().enumerate().map(|(k, r)| (k as u64 + 2, r)).collect())
}

#[derive(Debug, Serialize, Deserialize)]
struct NodeRow {
    id: String,
    loc_x: f64,
    loc_y: f64,
    value: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeRow {
    src: String,
    dst: String,
    weight: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct SampleRow {
    node_id: String,
    scale_factor: f64,
    sampled: u8,
}

/// Reads a node file. Ids must be unique and all numbers finite.
pub fn load_nodes_csv(path: &Path) -> Result<Vec<NodeRecord>> {
    let rows: Vec<(u64, NodeRow)> = read_rows(path)?;
    let mut seen: HashMap<String, u64> = HashMap::with_capacity(rows.len());
    let mut nodes = Vec::with_capacity(rows.len());
    for (line, r) in rows {
        let bad = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        if let Some(first) = seen.insert(r.id.clone(), line) {
            return Err(bad(format!("duplicate node id {:?} (first on line {first})", r.id)));
        }
        if !(r.loc_x.is_finite() && r.loc_y.is_finite() && r.value.is_finite()) {
            return Err(bad(format!("node {:?} has a non-finite field", r.id)));
        }
        nodes.push(NodeRecord {
            id: r.id,
            location: [r.loc_x, r.loc_y],
            value: r.value,
        });
    }
    Ok(nodes)
}

/// Maps external ids to 0-based indices in file order.
pub fn node_index(nodes: &[NodeRecord]) -> HashMap<&str, NodeId> {
    nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect()
}

/// Reads an edge file against `nodes` and validates the resulting graph.
/// Repeated pairs with the same weight are merged; differing weights are an error.
pub fn load_edges_csv(path: &Path, nodes: &[NodeRecord]) -> Result<Graph> {
    let index = node_index(nodes);
    let rows: Vec<(u64, EdgeRow)> = read_rows(path)?;
    let mut weights: HashMap<(NodeId, NodeId), (f64, u64)> = HashMap::with_capacity(rows.len());
    let mut order = Vec::with_capacity(rows.len());
    for (line, r) in rows {
        let bad = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let lookup = |id: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| bad(format!("unknown node id {id:?}")))
        };
        let (a, b) = (lookup(&r.src)?, lookup(&r.dst)?);
        let key = (a.min(b), a.max(b));
        match weights.get(&key) {
            Some(&(w, first)) if w != r.weight => {
                return Err(bad(format!(
                    "edge {:?}-{:?} has weight {} but line {first} gave {w}",
                    r.src, r.dst, r.weight
                )))
            }
            Some(_) => {}
            None => {
                weights.insert(key, (r.weight, line));
                order.push(key);
            }
        }
    }
    let edges: Vec<_> = order.iter().map(|k| (k.0, k.1, weights[k].0)).collect();
    Graph::from_edges(nodes.len(), &edges)
}

pub fn write_nodes_csv(path: &Path, nodes: &[NodeRecord]) -> Result<()> {
    atomic_write(
        path,
        &csv_bytes(nodes.iter().map(|n| NodeRow {
            id: n.id.clone(),
            loc_x: n.location[0],
            loc_y: n.location[1],
            value: n.value,
        })),
    )
}

pub fn write_edges_csv(path: &Path, graph: &Graph, nodes: &[NodeRecord]) -> Result<()> {
    if nodes.len() != graph.node_count() {
        return Err(Error::arg("node list does not match graph"));
    }
    atomic_write(
        path,
        &csv_bytes(graph.edges().map(|(i, j, w)| EdgeRow {
            src: nodes[i].id.clone(),
            dst: nodes[j].id.clone(),
            weight: w,
        })),
    )
}

pub fn write_samples_csv(path: &Path, nodes: &[NodeRecord], state: &SamplingState) -> Result<()> {
    if nodes.len() != state.len() {
        return Err(Error::arg("node list does not match sampling state"));
    }
    atomic_write(
        path,
        &csv_bytes(nodes.iter().enumerate().map(|(i, n)| SampleRow {
            node_id: n.id.clone(),
            scale_factor: state.scale[i],
            sampled: state.sampled[i] as u8,
        })),
    )
}

/// Reads a sample file. Nodes absent from the file are unsampled with unit scale.
pub fn load_samples_csv(path: &Path, nodes: &[NodeRecord]) -> Result<SamplingState> {
    let index = node_index(nodes);
    let mut state = SamplingState::new(nodes.len(), 0.0);
    for (line, r) in read_rows::<SampleRow>(path)? {
        let bad = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let i = *index
            .get(r.node_id.as_str())
            .ok_or_else(|| bad(format!("unknown node id {:?}", r.node_id)))?;
        if r.sampled > 1 {
            return Err(bad(format!("sampled must be 0 or 1, got {}", r.sampled)));
        }
        state.scale[i] = r.scale_factor;
        state.sampled[i] = r.sampled == 1;
        state.visited[i] = true;
    }
    Ok(state)
}

/// Metadata written next to a sample file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMetadata {
    pub method: String,
    pub budget: usize,
    pub sample_count: usize,
    pub threshold: Option<f64>,
    pub mu: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub start_policy: String,
    pub start_node: Option<String>,
    pub bfis_calls: Option<usize>,
    pub sub_unit_after_sampling: usize,
    pub top_up: Vec<String>,
}

#[derive(Debug, Serialize)]
struct SweepCsvRow<'a> {
    k: usize,
    t_hat: f64,
    start: NodeId,
    samples_bfis: usize,
    lambda_min_bfis: f64,
    lambda_min_random_mean: f64,
    cond_bfis: f64,
    cond_random_mean: f64,
    mse_bfis: f64,
    mse_random_mean: f64,
    trial_count: usize,
    mu: f64,
    epsilon: f64,
    sigma: f64,
    seed: u64,
    start_policy: &'a str,
    solver_tol: f64,
}

/// Sweep table with the full configuration repeated on every row.
pub fn sweep_csv_bytes(rows: &[SweepRow], config: &SweepConfig) -> Vec<u8> {
    let policy = config.start.to_string();
    csv_bytes(rows.iter().map(|r| SweepCsvRow {
        k: r.k,
        t_hat: r.t_hat,
        start: r.start,
        samples_bfis: r.samples_bfis,
        lambda_min_bfis: r.lambda_min_bfis,
        lambda_min_random_mean: r.lambda_min_random_mean,
        cond_bfis: r.cond_bfis,
        cond_random_mean: r.cond_random_mean,
        mse_bfis: r.mse_bfis,
        mse_random_mean: r.mse_random_mean,
        trial_count: r.trial_count,
        mu: config.mu,
        epsilon: config.epsilon,
        sigma: config.noise_sigma,
        seed: config.seed,
        start_policy: &policy,
        solver_tol: config.solver_tol,
    }))
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow], config: &SweepConfig) -> Result<()> {
    atomic_write(path, &sweep_csv_bytes(rows, config))
}

#[derive(Debug, Serialize)]
struct EstimateRow<'a> {
    node_id: &'a str,
    value: f64,
    estimate: f64,
    sampled: u8,
}

/// Reconstruction output: truth, estimate and sample flag per node.
pub fn write_estimate_csv(
    path: &Path,
    nodes: &[NodeRecord],
    estimate: &[f64],
    sampled: &[bool],
) -> Result<()> {
    atomic_write(
        path,
        &csv_bytes(nodes.iter().enumerate().map(|(i, n)| EstimateRow {
            node_id: &n.id,
            value: n.value,
            estimate: estimate[i],
            sampled: sampled[i] as u8,
        })),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn two_node_bundle() {
        let dir = tempfile::tempdir().unwrap();
        let nodes = write(dir.path(), "n.csv", "id,loc_x,loc_y,value\na,0,0,1.5\nb,1,0,2\n");
        let edges = write(dir.path(), "e.csv", "src,dst,weight\na,b,0.5\n");
        let nodes = load_nodes_csv(&nodes).unwrap();
        let g = load_edges_csv(&edges, &nodes).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.weight(1, 0), Some(0.5));
    }

    #[test]
    fn unknown_id_is_named_with_line() {
        let dir = tempfile::tempdir().unwrap();
        let nodes = write(dir.path(), "n.csv", "id,loc_x,loc_y,value\na,0,0,1\nb,1,0,2\n");
        let edges = write(dir.path(), "e.csv", "src,dst,weight\na,b,1\nb,zz,1\n");
        let nodes = load_nodes_csv(&nodes).unwrap();
        let err = load_edges_csv(&edges, &nodes).unwrap_err().to_string();
        assert!(err.contains("\"zz\"") && err.contains(":3:"), "{err}");
    }

    #[test]
    fn duplicate_edges() {
        let dir = tempfile::tempdir().unwrap();
        let nodes = write(dir.path(), "n.csv", "id,loc_x,loc_y,value\na,0,0,1\nb,1,0,2\n");
        let nodes = load_nodes_csv(&nodes).unwrap();
        let same = write(dir.path(), "e1.csv", "src,dst,weight\na,b,1\nb,a,1\n");
        assert_eq!(load_edges_csv(&same, &nodes).unwrap().edge_count(), 1);
        let conflict = write(dir.path(), "e2.csv", "src,dst,weight\na,b,1\nb,a,2\n");
        assert!(load_edges_csv(&conflict, &nodes).is_err());
    }

    #[test]
    fn malformed_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "n.csv", "id,loc_x,loc_y,value\na,0,0,1\nb,x,0,2\n");
        let err = load_nodes_csv(&p).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let p = write(dir.path(), "d.csv", "id,loc_x,loc_y,value\na,0,0,1\na,1,0,2\n");
        assert!(load_nodes_csv(&p).unwrap_err().to_string().contains("duplicate"));
        assert!(matches!(load_nodes_csv(&dir.path().join("missing.csv")), Err(Error::Io { .. })));
    }

    #[test]
    fn disconnected_edges_fail_validation() {
        let dir = tempfile::tempdir().unwrap();
        let nodes = write(dir.path(), "n.csv", "id,loc_x,loc_y,value\na,0,0,1\nb,1,0,2\nc,2,0,0\n");
        let edges = write(dir.path(), "e.csv", "src,dst,weight\na,b,1\n");
        let nodes = load_nodes_csv(&nodes).unwrap();
        assert!(matches!(load_edges_csv(&edges, &nodes), Err(Error::InvalidGraph(_))));
    }
}
