#![allow(dead_code)]

use gda_core::Graph;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Weight uniform in (0, 1].
pub fn unit_weight(rng: &mut ChaCha8Rng) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Connected graph on `n` nodes: a random spanning tree over a shuffled
/// labelling plus up to `extra` random chords, weights in (0, 1].
pub fn random_connected(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> Graph {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut seen = std::collections::HashSet::new();
    let mut edges = Vec::new();
    let mut push = |a: usize, b: usize, w: f64, edges: &mut Vec<(usize, usize, f64)>| {
        let key = (a.min(b), a.max(b));
        if a != b && seen.insert(key) {
            edges.push((key.0, key.1, w));
        }
    };
    for i in 1..n {
        let j = rng.random_range(0..i);
        let w = unit_weight(rng);
        push(perm[i], perm[j], w, &mut edges);
    }
    for _ in 0..extra {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        let w = unit_weight(rng);
        push(a, b, w, &mut edges);
    }
    Graph::from_edges(n, &edges).unwrap()
}

pub fn path(n: usize) -> Graph {
    gda_core::datasets::gen_line_graph(n).unwrap()
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<[f64; 2]> {
    (0..n).map(|_| [rng.random::<f64>() * 100.0, rng.random::<f64>() * 100.0]).collect()
}

/// Twice the signed area of (a, b, c).
fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn strictly_inside_circumcircle(a: [f64; 2], b: [f64; 2], c: [f64; 2], p: [f64; 2]) -> bool {
    let (a, b, c) = if orient(a, b, c) > 0.0 { (a, b, c) } else { (a, c, b) };
    let row = |q: [f64; 2]| {
        let (x, y) = (q[0] - p[0], q[1] - p[1]);
        (x, y, x * x + y * y)
    };
    let (ax, ay, a2) = row(a);
    let (bx, by, b2) = row(b);
    let (cx, cy, c2) = row(c);
    let det = ax * (by * c2 - b2 * cy) - ay * (bx * c2 - b2 * cx) + a2 * (bx * cy - by * cx);
    det > 0.0
}

/// Delaunay edges by enumeration: every non-degenerate triple whose
/// circumcircle contains no other point contributes its three edges.
/// O(n^4); points are assumed to be in general position.
pub fn brute_force_delaunay(points: &[[f64; 2]]) -> Vec<(usize, usize)> {
    let n = points.len();
    let mut edges = std::collections::BTreeSet::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (a, b, c) = (points[i], points[j], points[k]);
                if orient(a, b, c).abs() < 1e-12 {
                    continue;
                }
                let empty = (0..n)
                    .filter(|&m| m != i && m != j && m != k)
                    .all(|m| !strictly_inside_circumcircle(a, b, c, points[m]));
                if empty {
                    edges.insert((i, j));
                    edges.insert((i, k));
                    edges.insert((j, k));
                }
            }
        }
    }
    edges.into_iter().collect()
}

/// Dense `(A + mu L) x = A y` solved by LU.
pub fn dense_glr(graph: &Graph, nodes: &[usize], values: &[f64], mu: f64) -> Vec<f64> {
    let n = graph.node_count();
    let mut sampled = vec![false; n];
    let mut rhs = nalgebra::DVector::zeros(n);
    for (&i, &v) in nodes.iter().zip(values) {
        sampled[i] = true;
        rhs[i] += v;
    }
    let b = gda_core::spectral::dense_coefficient_matrix(graph, &sampled, mu);
    b.lu().solve(&rhs).unwrap().iter().copied().collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
