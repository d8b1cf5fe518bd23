//! Noisy sampling and Laplacian-regularized reconstruction.
//!
//! Minimizing `||H x - y||^2 + mu x^T L x` gives the normal equations
//! `(H^T H + mu L) x = H^T y`. `H^T H` is the 0/1 diagonal indicator of the
//! sample set, so the whole system is applied matrix-free and solved with
//! conjugate gradient.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_laplacian, Graph, LaplacianOperator, NodeId};

/// A real value per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSignal(pub Vec<f64>);

impl GraphSignal {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::arg(format!("signal entry {i} is not finite")));
        }
        Ok(GraphSignal(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// Samples `y = H x + n` taken at the ordered node set `nodes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub nodes: Vec<NodeId>,
    pub values: Vec<f64>,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Observation {
    /// `H^T y` as a length-`n` vector, zero off the sample set.
    pub fn back_projection(&self, n: usize) -> Vec<f64> {
        let mut b = vec![0.0; n];
        for (&i, &v) in self.nodes.iter().zip(&self.values) {
            b[i] = v;
        }
        b
    }

    /// Diagonal of `H^T H`.
    pub fn indicator(&self, n: usize) -> Vec<f64> {
        let mut a = vec![0.0; n];
        for &i in &self.nodes {
            a[i] = 1.0;
        }
        a
    }
}

fn check_sample_set(nodes: &[NodeId], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &i in nodes {
        if i >= n {
            return Err(Error::arg(format!("sample index {i} out of range 0..{n}")));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::arg(format!("sample index {i} listed twice")));
        }
    }
    Ok(())
}

/// Draws `y_k = x[nodes_k] + n_k`, `n_k ~ N(0, sigma^2)` i.i.d.
///
/// Noise comes from a ChaCha8 stream seeded with `seed`, mapped through the
/// ziggurat standard normal of `rand_distr`; both are platform independent.
pub fn observe(x: &GraphSignal, nodes: &[NodeId], noise_sigma: f64, seed: u64) -> Result<Observation> {
    check_sample_set(nodes, x.len())?;
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::arg(format!("noise sigma must be non-negative, got {noise_sigma}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = nodes
        .iter()
        .map(|&i| {
            let z: f64 = StandardNormal.sample(&mut rng);
            x.0[i] + noise_sigma * z
        })
        .collect();
    Ok(Observation {
        nodes: nodes.to_vec(),
        values,
        noise_sigma,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub mu: f64,
    /// Relative residual target.
    pub tol: f64,
    /// `None` means `10 * N`.
    pub max_iter: Option<usize>,
    /// Jacobi preconditioning with `diag(A) + mu * d`.
    pub jacobi: bool,
}

impl SolveOptions {
    pub fn new(mu: f64) -> Self {
        SolveOptions {
            mu,
            tol: 1e-8,
            max_iter: None,
            jacobi: false,
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::arg(format!("mu must be positive, got {}", self.mu)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::arg(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == Some(0) {
            return Err(Error::arg("max_iter must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub estimate: GraphSignal,
    pub iterations: usize,
    /// Relative residual of the returned iterate, recomputed from scratch.
    /// Absolute when `H^T y = 0`.
    pub residual: f64,
}

struct System<'a> {
    lap: LaplacianOperator<'a>,
    indicator: Vec<f64>,
    mu: f64,
}

impl System<'_> {
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.lap.apply_into(x, out);
        for ((o, &a), &xi) in out.iter_mut().zip(&self.indicator).zip(x) {
            *o = a * xi + self.mu * *o;
        }
    }

    fn residual(&self, x: &[f64], b: &[f64], scratch: &mut [f64]) -> Vec<f64> {
        self.apply(x, scratch);
        b.iter().zip(scratch.iter()).map(|(bi, ai)| bi - ai).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `(H^T H + mu L) x = H^T y` by (optionally Jacobi-preconditioned)
/// conjugate gradient from a zero initial guess.
pub fn glr_solve(graph: &Graph, obs: &Observation, opts: &SolveOptions) -> Result<SolveReport> {
    opts.check()?;
    let lap = build_laplacian(graph)?;
    let n = graph.node_count();
    check_sample_set(&obs.nodes, n)?;
    if obs.nodes.len() != obs.values.len() {
        return Err(Error::arg(format!(
            "observation has {} nodes but {} values",
            obs.nodes.len(),
            obs.values.len()
        )));
    }
    if obs.nodes.is_empty() {
        return Err(Error::Singular(
            "no samples: H^T H + mu L reduces to mu L, which has the constant vector in its null space".into(),
        ));
    }

    let system = System {
        lap,
        indicator: obs.indicator(n),
        mu: opts.mu,
    };
    let b = obs.back_projection(n);
    let b_norm = norm(&b);
    let scale = if b_norm > 0.0 { b_norm } else { 1.0 };
    let max_iter = opts.max_iter.unwrap_or(10 * n);
    let inv_diag: Option<Vec<f64>> = opts.jacobi.then(|| {
        (0..n)
            .map(|i| 1.0 / (system.indicator[i] + opts.mu * graph.degree(i)))
            .collect()
    });
    let precondition = |r: &[f64]| -> Vec<f64> {
        match &inv_diag {
            Some(d) => r.iter().zip(d).map(|(ri, di)| ri * di).collect(),
            None => r.to_vec(),
        }
    };

    let mut x = vec![0.0; n];
    let mut ap = vec![0.0; n];
    let mut r = b.clone();
    let mut iterations = 0;

    // outer loop restarts from the true residual if the recurrence drifted
    loop {
        let mut z = precondition(&r);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        while norm(&r) / scale > opts.tol && iterations < max_iter {
            system.apply(&p, &mut ap);
            let pap = dot(&p, &ap);
            if !(pap > 0.0 && pap.is_finite()) {
                break;
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            z = precondition(&r);
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
            iterations += 1;
        }
        r = system.residual(&x, &b, &mut ap);
        let residual = norm(&r) / scale;
        if residual <= opts.tol {
            return Ok(SolveReport {
                estimate: GraphSignal(x),
                iterations,
                residual,
            });
        }
        if iterations >= max_iter || rz == 0.0 {
            return Err(Error::NotConverged {
                iterations,
                residual,
            });
        }
    }
}

/// Mean squared error `(1/N) sum (x_hat_i - x_i)^2`.
pub fn mse(estimate: &GraphSignal, truth: &GraphSignal) -> Result<f64> {
    if estimate.len() != truth.len() {
        return Err(Error::arg(format!(
            "length mismatch: {} vs {}",
            estimate.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::arg("mse of empty signals"));
    }
    let sum: f64 = estimate
        .0
        .iter()
        .zip(&truth.0)
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    Ok(sum / truth.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn noiseless_observation_is_exact() {
        let x = GraphSignal::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let obs = observe(&x, &[3, 1], 0.0, 5).unwrap();
        assert_eq!(obs.values, vec![4.0, 2.0]);
    }

    #[test]
    fn observation_deterministic_and_validated() {
        let x = GraphSignal::new(vec![0.0; 6]).unwrap();
        let a = observe(&x, &[0, 2, 4], 1.0, 17).unwrap();
        let b = observe(&x, &[0, 2, 4], 1.0, 17).unwrap();
        assert_eq!(a, b);
        assert!(observe(&x, &[0, 0], 1.0, 1).is_err());
        assert!(observe(&x, &[6], 1.0, 1).is_err());
        assert!(observe(&x, &[1], -1.0, 1).is_err());
    }

    #[test]
    fn unit_noise_variance() {
        let n = 100_000;
        let x = GraphSignal::new(vec![0.0; n]).unwrap();
        let nodes: Vec<_> = (0..n).collect();
        let obs = observe(&x, &nodes, 1.0, 2024).unwrap();
        let mean = obs.values.iter().sum::<f64>() / n as f64;
        let var = obs.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((0.98..=1.02).contains(&var), "variance {var}");
    }

    #[test]
    fn constant_signal_full_sampling() {
        let g = path(7);
        let x = GraphSignal::new(vec![3.25; 7]).unwrap();
        let obs = observe(&x, &(0..7).collect::<Vec<_>>(), 0.0, 0).unwrap();
        for mu in [0.01, 1.0, 50.0] {
            let rep = glr_solve(&g, &obs, &SolveOptions::new(mu)).unwrap();
            for v in rep.estimate.values() {
                assert!((v - 3.25).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn small_mu_full_sampling_is_identity() {
        let g = path(5);
        let x = GraphSignal::new(vec![1.0, -2.0, 0.5, 4.0, 3.0]).unwrap();
        let obs = observe(&x, &[0, 1, 2, 3, 4], 0.0, 0).unwrap();
        let rep = glr_solve(&g, &obs, &SolveOptions::new(1e-9)).unwrap();
        for (a, b) in rep.estimate.values().iter().zip(x.values()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn four_node_path_matches_hand_solution() {
        // (A + 0.01 L) x = (1, 0, 0, 0) with A = diag(1, 0, 1, 0); solved
        // exactly by elimination: x3 = x2, x1 solves the 2x2 block.
        let g = path(4);
        let obs = Observation {
            nodes: vec![0, 2],
            values: vec![1.0, 0.0],
            noise_sigma: 0.0,
            seed: 0,
        };
        let mut opts = SolveOptions::new(0.01);
        opts.tol = 1e-12;
        let x = glr_solve(&g, &obs, &opts).unwrap().estimate;
        // rows: 1.01 x0 - .01 x1 = 1; -.01 x0 + .02 x1 - .01 x2 = 0;
        //       -.01 x1 + 1.02 x2 - .01 x3 = 0; x3 = x2
        // => x2 = x1/101, x1 = (x0 + x2)/2 => x1 = 101 x0 / 201
        let x0 = 1.0 / (1.01 - 0.01 * 101.0 / 201.0);
        let x1 = 101.0 * x0 / 201.0;
        let x2 = x1 / 101.0;
        let expected = [x0, x1, x2, x2];
        for (a, b) in x.values().iter().zip(expected) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn jacobi_agrees() {
        let g = path(30);
        let x = GraphSignal::new((0..30).map(|i| (i as f64 * 0.3).sin()).collect()).unwrap();
        let obs = observe(&x, &[0, 7, 15, 22, 29], 0.2, 9).unwrap();
        let plain = glr_solve(&g, &obs, &SolveOptions::new(0.05)).unwrap();
        let mut opts = SolveOptions::new(0.05);
        opts.jacobi = true;
        let pre = glr_solve(&g, &obs, &opts).unwrap();
        for (a, b) in plain.estimate.values().iter().zip(pre.estimate.values()) {
            assert!((a - b).abs() < 1e-5);
        }
        assert!(pre.residual <= 1e-8);
    }

    #[test]
    fn solve_errors() {
        let g = path(4);
        let empty = Observation {
            nodes: vec![],
            values: vec![],
            noise_sigma: 0.0,
            seed: 0,
        };
        assert!(matches!(
            glr_solve(&g, &empty, &SolveOptions::new(1.0)),
            Err(Error::Singular(_))
        ));

        let g = path(200);
        let obs = Observation {
            nodes: vec![0],
            values: vec![1.0],
            noise_sigma: 0.0,
            seed: 0,
        };
        let mut opts = SolveOptions::new(0.01);
        opts.max_iter = Some(2);
        assert!(matches!(
            glr_solve(&g, &obs, &opts),
            Err(Error::NotConverged { iterations: 2, .. })
        ));
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let g = path(4);
        let obs = Observation {
            nodes: vec![1],
            values: vec![0.0],
            noise_sigma: 0.0,
            seed: 0,
        };
        let rep = glr_solve(&g, &obs, &SolveOptions::new(1.0)).unwrap();
        assert_eq!(rep.estimate.values(), &[0.0; 4]);
        assert_eq!(rep.iterations, 0);
    }

    #[test]
    fn mse_values() {
        let x = GraphSignal(vec![1.0, 2.0]);
        assert_eq!(mse(&x, &x).unwrap(), 0.0);
        assert_eq!(mse(&GraphSignal(vec![2.0, 3.0]), &x).unwrap(), 1.0);
        assert_eq!(mse(&GraphSignal(vec![3.0, 4.0]), &GraphSignal(vec![0.0, 0.0])).unwrap(), 12.5);
        assert!(mse(&x, &GraphSignal(vec![1.0])).is_err());
    }
}
