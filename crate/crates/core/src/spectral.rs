//! Dense spectral oracle and experiment harness.
//!
//! Nothing in the sampling path computes eigenvalues. This module exists to
//! check the sampler's claims against a full eigendecomposition of
//! `B = A + mu L` and to run the budget sweeps that compare against random
//! sampling.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{disc_view, eigen_upper_bound, Graph, NodeId};
use crate::reconstruct::{glr_solve, mse, observe, GraphSignal, SolveOptions};
use crate::sampler::{bs_bfis_with_policy, random_sample, BfisResult, SamplingState, StartPolicy};

/// Largest graph the dense oracle will materialize by default.
pub const DEFAULT_DENSE_CAP: usize = 2000;

/// Eigenvalues at or below this are reported as numerically singular.
pub const SINGULAR_EPS: f64 = 1e-10;

/// Tolerance for the left-end checks of a freshly aligned state.
pub const ALIGNMENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `lambda_max / lambda_min`, infinite when `lambda_min <= 1e-10`.
    pub condition_number: f64,
    /// Smallest disc left end of `S B S^-1`.
    pub gershgorin_min_left: f64,
    /// Largest disc right end of `S B S^-1`.
    pub gershgorin_max_right: f64,
    /// `1 + 2 mu d_max`.
    pub upper_bound: f64,
}

impl SpectralReport {
    pub fn is_singular(&self) -> bool {
        self.lambda_min <= SINGULAR_EPS
    }
}

/// `A + mu L` as a dense matrix.
pub fn dense_coefficient_matrix(graph: &Graph, sampled: &[bool], mu: f64) -> DMatrix<f64> {
    let n = graph.node_count();
    let mut b = DMatrix::zeros(n, n);
    for i in 0..n {
        b[(i, i)] = if sampled[i] { 1.0 } else { 0.0 } + mu * graph.degree(i);
        for (j, w) in graph.neighbors(i) {
            b[(i, j)] -= mu * w;
        }
    }
    b
}

fn check_dense(graph: &Graph, cap: usize) -> Result<()> {
    let n = graph.node_count();
    if n > cap {
        return Err(Error::TooLargeForDense { n, cap });
    }
    Ok(())
}

/// Sorted eigenvalues of `A + mu L`.
pub fn dense_spectrum(graph: &Graph, sampled: &[bool], mu: f64) -> Vec<f64> {
    let b = dense_coefficient_matrix(graph, sampled, mu);
    let mut eig: Vec<f64> = b.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Extreme eigenvalues of `A + mu L` plus the Gershgorin envelope of
/// `S (A + mu L) S^-1` for the state's scale factors.
pub fn dense_extreme_eigs(graph: &Graph, state: &SamplingState, mu: f64) -> Result<SpectralReport> {
    dense_extreme_eigs_capped(graph, state, mu, DEFAULT_DENSE_CAP)
}

pub fn dense_extreme_eigs_capped(
    graph: &Graph,
    state: &SamplingState,
    mu: f64,
    cap: usize,
) -> Result<SpectralReport> {
    check_dense(graph, cap)?;
    let discs = disc_view(graph, state, mu)?;
    let eig = dense_spectrum(graph, &state.sampled, mu);
    let lambda_min = eig[0];
    let lambda_max = eig[eig.len() - 1];
    let condition_number = if lambda_min <= SINGULAR_EPS {
        f64::INFINITY
    } else {
        lambda_max / lambda_min
    };
    Ok(SpectralReport {
        lambda_min,
        lambda_max,
        condition_number,
        gershgorin_min_left: discs.min_left_end(),
        gershgorin_max_right: discs.max_right_end(),
        upper_bound: eigen_upper_bound(graph, mu),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    /// Largest gap between matching sorted eigenvalues of `B` and
    /// `S B S^-1`, counting any imaginary part of the latter as error.
    pub max_discrepancy: f64,
}

/// Compares the spectrum of `B` (symmetric solver) with that of the
/// non-symmetric `S B S^-1` (general Schur-based solver).
pub fn verify_similarity_invariance(
    graph: &Graph,
    state: &SamplingState,
    mu: f64,
) -> Result<SimilarityReport> {
    check_dense(graph, DEFAULT_DENSE_CAP)?;
    if let Some((i, s)) = state.scale.iter().enumerate().find(|(_, s)| !(**s > 0.0 && s.is_finite())) {
        return Err(Error::Domain(format!("scale factor of node {i} is {s}; must be positive")));
    }
    let b = dense_coefficient_matrix(graph, &state.sampled, mu);
    if state.scale.iter().all(|&s| s == 1.0) {
        return Ok(SimilarityReport { max_discrepancy: 0.0 });
    }
    let n = graph.node_count();
    let c = DMatrix::from_fn(n, n, |i, j| state.scale[i] * b[(i, j)] / state.scale[j]);

    let mut reference: Vec<f64> = b.symmetric_eigenvalues().iter().copied().collect();
    reference.sort_by(f64::total_cmp);
    let mut transformed: Vec<(f64, f64)> = c
        .complex_eigenvalues()
        .iter()
        .map(|z| (z.re, z.im))
        .collect();
    transformed.sort_by(|a, b| a.0.total_cmp(&b.0));

    let max_discrepancy = reference
        .iter()
        .zip(&transformed)
        .map(|(r, (re, im))| (r - re).abs().max(im.abs()))
        .fold(0.0, f64::max);
    Ok(SimilarityReport { max_discrepancy })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub threshold: f64,
    pub min_left_end: f64,
    /// Nodes whose left end is below `threshold - 1e-10`.
    pub violations: Vec<NodeId>,
    /// Whether a sampled node still needed a scale below one. When true the
    /// "all left ends stay at or above T" guarantee does not apply.
    pub sub_unit_after_sampling: bool,
}

impl AlignmentReport {
    /// The conditional guarantee: no sub-unit scale implies no violations.
    pub fn guarantee_holds(&self) -> bool {
        self.sub_unit_after_sampling || self.violations.is_empty()
    }
}

/// Recomputes the discs of a finished BFIS run and checks them against `threshold`.
pub fn verify_disc_alignment(
    graph: &Graph,
    run: &BfisResult,
    threshold: f64,
    mu: f64,
) -> Result<AlignmentReport> {
    let view = disc_view(graph, &run.state, mu)?;
    let violations = view
        .discs
        .iter()
        .enumerate()
        .filter(|(_, d)| d.left_end() < threshold - ALIGNMENT_TOL)
        .map(|(i, _)| i)
        .collect();
    Ok(AlignmentReport {
        threshold,
        min_left_end: view.min_left_end(),
        violations,
        sub_unit_after_sampling: !run.sub_unit_after_sampling.is_empty(),
    })
}

/// Parameters of a budget sweep; embedded in every output row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub budgets: Vec<usize>,
    pub trials: usize,
    pub noise_sigma: f64,
    pub epsilon: f64,
    pub mu: f64,
    pub seed: u64,
    pub start: StartPolicy,
    pub solver_tol: f64,
}

impl SweepConfig {
    pub fn new(budgets: Vec<usize>, seed: u64) -> Self {
        SweepConfig {
            budgets,
            trials: 100,
            noise_sigma: 1.0,
            epsilon: 1e-4,
            mu: 0.01,
            seed,
            start: StartPolicy::BruteForce,
            solver_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: usize,
    pub t_hat: f64,
    pub start: NodeId,
    pub samples_bfis: usize,
    pub lambda_min_bfis: f64,
    pub lambda_min_random_mean: f64,
    pub cond_bfis: f64,
    pub cond_random_mean: f64,
    /// Mean over `trial_count` noise draws on the BFIS sample set.
    pub mse_bfis: f64,
    /// Mean over `trial_count` random sample sets, each with its own noise draw.
    pub mse_random_mean: f64,
    pub trial_count: usize,
}

/// Per-trial seed. Trial `t` at budget `k` uses the same noise seed for
/// the BFIS set and the `t`-th random set.
fn trial_seed(base: u64, k: usize, t: usize) -> u64 {
    base ^ ((k as u64) << 32) ^ (t as u64)
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    sum / count as f64
}

fn reconstruction_mse(
    graph: &Graph,
    truth: &GraphSignal,
    nodes: &[NodeId],
    config: &SweepConfig,
    noise_seed: u64,
) -> Result<f64> {
    let obs = observe(truth, nodes, config.noise_sigma, noise_seed)?;
    let mut opts = SolveOptions::new(config.mu);
    opts.tol = config.solver_tol;
    let estimate = glr_solve(graph, &obs, &opts)?.estimate;
    mse(&estimate, truth)
}

/// BS-BFIS against random sampling over a list of budgets.
///
/// Per budget: run BS-BFIS with the configured start policy, take the dense
/// `lambda_min` of its coefficient matrix, then draw `trials` random sample
/// sets of the same size. Reconstruction MSE is averaged over `trials` noise
/// draws for both. Trials run in parallel and are reduced in index order.
pub fn budget_sweep(graph: &Graph, truth: &GraphSignal, config: &SweepConfig) -> Result<Vec<SweepRow>> {
    check_dense(graph, DEFAULT_DENSE_CAP)?;
    if config.trials == 0 {
        return Err(Error::arg("trials must be at least 1"));
    }
    if truth.len() != graph.node_count() {
        return Err(Error::arg(format!(
            "signal has {} entries but graph has {} nodes",
            truth.len(),
            graph.node_count()
        )));
    }

    let mut rows = Vec::with_capacity(config.budgets.len());
    for &k in &config.budgets {
        let bs = bs_bfis_with_policy(graph, k, config.epsilon, config.mu, config.start, config.seed)?;
        let bfis_nodes = bs.state().sampled_nodes();
        let spec = dense_extreme_eigs(graph, bs.state(), config.mu)?;

        let trials: Vec<(f64, f64, f64, f64)> = (0..config.trials)
            .into_par_iter()
            .map(|t| -> Result<_> {
                let seed = trial_seed(config.seed, k, t);
                let random = random_sample(graph.node_count(), k, seed)?;
                let report = dense_extreme_eigs(graph, &random, config.mu)?;
                let random_nodes = random.sampled_nodes();
                let noise_seed = seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
                let mse_random = reconstruction_mse(graph, truth, &random_nodes, config, noise_seed)?;
                let mse_bfis = reconstruction_mse(graph, truth, &bfis_nodes, config, noise_seed)?;
                Ok((report.lambda_min, report.condition_number, mse_random, mse_bfis))
            })
            .collect::<Result<_>>()?;

        rows.push(SweepRow {
            k,
            t_hat: bs.threshold,
            start: bs.start,
            samples_bfis: bs.sample_count(),
            lambda_min_bfis: spec.lambda_min,
            lambda_min_random_mean: mean(trials.iter().map(|t| t.0)),
            cond_bfis: spec.condition_number,
            cond_random_mean: mean(trials.iter().map(|t| t.1)),
            mse_bfis: mean(trials.iter().map(|t| t.3)),
            mse_random_mean: mean(trials.iter().map(|t| t.2)),
            trial_count: config.trials,
        });
    }
    Ok(rows)
}

/// Outcome of [`verify_suite`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<VerifyCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: impl Into<String>, passed: bool, detail: String) {
        self.checks.push(VerifyCheck {
            name: name.into(),
            passed,
            detail,
        });
    }
}

/// Runs the invariant checks on one graph for each budget: disc alignment,
/// Gershgorin sandwich, upper bound, similarity invariance and the
/// `lambda_min >= T_hat` consequence.
pub fn verify_suite(
    graph: &Graph,
    budgets: &[usize],
    epsilon: f64,
    mu: f64,
    start: StartPolicy,
    seed: u64,
) -> Result<VerifyReport> {
    const TOL: f64 = 1e-8;
    let mut report = VerifyReport { checks: Vec::new() };
    let lap = crate::graph::build_laplacian(graph)?;

    let ones = vec![1.0; graph.node_count()];
    let row_sum = lap.apply(&ones).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    report.push("laplacian-row-sums", row_sum <= 1e-12, format!("max |L 1| = {row_sum:e}"));

    let empty = SamplingState::new(graph.node_count(), 0.0);
    let base = dense_extreme_eigs(graph, &empty, mu)?;
    report.push(
        "unsampled-singular",
        base.gershgorin_min_left == 0.0 && base.lambda_min.abs() <= 1e-8,
        format!("min left end {}, lambda_min {:e}", base.gershgorin_min_left, base.lambda_min),
    );

    for &k in budgets {
        let bs = bs_bfis_with_policy(graph, k, epsilon, mu, start, seed)?;
        let align = verify_disc_alignment(graph, &bs.run, bs.threshold, mu)?;
        report.push(
            format!("k={k} budget"),
            bs.sample_count() <= k,
            format!("{} samples, T_hat {:.6}", bs.sample_count(), bs.threshold),
        );
        report.push(
            format!("k={k} disc-alignment"),
            align.guarantee_holds(),
            format!(
                "min left end {:.6}, {} violation(s), sub-unit scale after sampling: {}",
                align.min_left_end,
                align.violations.len(),
                align.sub_unit_after_sampling
            ),
        );
        let spec = dense_extreme_eigs(graph, bs.state(), mu)?;
        report.push(
            format!("k={k} gershgorin-sandwich"),
            spec.gershgorin_min_left <= spec.lambda_min + TOL
                && spec.lambda_max <= spec.gershgorin_max_right + TOL
                && spec.lambda_max <= spec.upper_bound + TOL,
            format!(
                "[{:.6}, {:.6}] within [{:.6}, {:.6}], bound {:.6}",
                spec.lambda_min, spec.lambda_max, spec.gershgorin_min_left, spec.gershgorin_max_right, spec.upper_bound
            ),
        );
        report.push(
            format!("k={k} lambda-min-bound"),
            align.sub_unit_after_sampling || spec.lambda_min >= bs.threshold - 1e-6,
            format!("lambda_min {:.6} vs T_hat {:.6}", spec.lambda_min, bs.threshold),
        );
        let sim = verify_similarity_invariance(graph, bs.state(), mu)?;
        report.push(
            format!("k={k} similarity-invariance"),
            sim.max_discrepancy <= TOL,
            format!("max discrepancy {:e}", sim.max_discrepancy),
        );
    }
    Ok(report)
}
