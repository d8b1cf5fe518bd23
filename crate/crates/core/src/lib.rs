//! Graph sampling by Gershgorin disc alignment.
//!
//! Given a budget of `K` samples on a connected weighted graph, choose the
//! sampled nodes so that the coefficient matrix `A + mu L` of the
//! Laplacian-regularized reconstruction `(A + mu L) x = H^T y` has a large,
//! certified lower bound on its smallest eigenvalue. The bound is the
//! smallest left end of the Gershgorin discs of `S (A + mu L) S^-1` for a
//! diagonal `S` built alongside the sample set, so no eigenvalue is ever
//! computed while sampling.
//!
//! | module | contents |
//! |--------|----------|
//! | [`graph`] | CSR graph, validation, Laplacian operator, disc view |
//! | [`sampler`] | scale factors, BFIS, bisection over the threshold, random baseline |
//! | [`reconstruct`] | noisy observation and conjugate-gradient reconstruction |
//! | [`spectral`] | dense eigenvalue oracle, invariant checks, budget sweeps |
//! | [`delaunay`], [`datasets`], [`io`] | graph construction and file formats |

pub mod datasets;
pub mod delaunay;
pub mod error;
pub mod graph;
pub mod io;
pub mod reconstruct;
pub mod sampler;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{build_laplacian, disc_view, eigen_upper_bound, validate, Graph, NodeId};
pub use reconstruct::{glr_solve, mse, observe, GraphSignal, Observation, SolveOptions};
pub use sampler::{
    best_start_bs_bfis, bfis, bs_bfis, random_sample, scale_factor, BfisResult, BsBfisResult, SamplingState,
    StartPolicy,
};
