use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use gda_core::datasets::{delaunay_graph, gen_climate_like, gen_line_graph, line_records, NodeRecord, WeightParams};
use gda_core::io::{
    load_edges_csv, load_nodes_csv, load_samples_csv, write_edges_csv, write_estimate_csv, write_json,
    write_nodes_csv, write_samples_csv, write_sweep_csv, SampleMetadata,
};
use gda_core::sampler::{bs_bfis_with_policy, random_sample, top_up, SamplingState, StartPolicy};
use gda_core::spectral::{budget_sweep, verify_suite, SweepConfig};
use gda_core::{glr_solve, mse, observe, Error, Graph, GraphSignal, Result, SolveOptions};

/// Environment variable holding the worker thread count.
const THREADS_ENV: &str = "GDA_THREADS";

#[derive(Parser)]
#[command(name = "gda", version, about = "Graph sampling by Gershgorin disc alignment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a graph bundle (nodes.csv + edges.csv) from CSV input or a generator
    Build(BuildArgs),
    /// Choose a sample set with BS-BFIS (or at random)
    Sample(SampleArgs),
    /// Simulate noisy observations on a sample set and reconstruct the signal
    Reconstruct(ReconstructArgs),
    /// Compare BS-BFIS against random sampling over a list of budgets
    Sweep(SweepArgs),
    /// Check the eigenvalue-bound invariants on a graph; exits 1 on violation
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GraphInput {
    /// Node CSV (id,loc_x,loc_y,value)
    #[arg(long)]
    in_nodes: Option<PathBuf>,
    /// Edge CSV (src,dst,weight); Delaunay + bilateral weights when omitted
    #[arg(long, requires = "in_nodes")]
    in_edges: Option<PathBuf>,
    /// Generate an unweighted path of this many nodes instead
    #[arg(long, conflicts_with_all = ["in_nodes", "climate"])]
    line: Option<usize>,
    /// Generate a synthetic station network of this many nodes instead
    #[arg(long, conflicts_with = "in_nodes")]
    climate: Option<usize>,
    /// Seed for the climate-like generator
    #[arg(long, default_value_t = 0)]
    graph_seed: u64,
    #[arg(long, default_value_t = 5.0)]
    sigma_l: f64,
    #[arg(long, default_value_t = 3.0)]
    sigma_x: f64,
}

struct LoadedGraph {
    nodes: Vec<NodeRecord>,
    graph: Graph,
    source: String,
}

impl GraphInput {
    fn load(&self) -> Result<LoadedGraph> {
        let params = WeightParams {
            sigma_l: self.sigma_l,
            sigma_x: self.sigma_x,
        };
        if let Some(n) = self.line {
            return Ok(LoadedGraph {
                nodes: line_records(n),
                graph: gen_line_graph(n)?,
                source: format!("line:{n}"),
            });
        }
        if let Some(n) = self.climate {
            let data = gen_climate_like(n, self.graph_seed, params)?;
            return Ok(LoadedGraph {
                nodes: data.nodes,
                graph: data.graph,
                source: format!("climate-like:{n}:seed={}", self.graph_seed),
            });
        }
        let Some(nodes_path) = &self.in_nodes else {
            return Err(Error::InvalidArgument(
                "no graph given: pass --in-nodes [--in-edges], --line <n> or --climate <n>".into(),
            ));
        };
        let nodes = load_nodes_csv(nodes_path)?;
        let (graph, source) = match &self.in_edges {
            Some(edges) => (load_edges_csv(edges, &nodes)?, format!("csv:{}", edges.display())),
            None => (
                delaunay_graph(&nodes, params)?,
                format!("delaunay:{}", nodes_path.display()),
            ),
        };
        Ok(LoadedGraph { nodes, graph, source })
    }
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    input: GraphInput,
    /// Output directory for nodes.csv and edges.csv
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SamplerArgs {
    /// Sample budget K
    #[arg(long)]
    k: usize,
    /// Laplacian weight mu
    #[arg(long, default_value_t = 0.01)]
    mu: f64,
    /// Bisection precision on the threshold
    #[arg(long, default_value_t = 1e-4)]
    epsilon: f64,
    /// brute-force | index:<n> | random
    #[arg(long, default_value = "brute-force")]
    start: StartPolicy,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sample K nodes uniformly at random instead of running BS-BFIS
    #[arg(long)]
    random: bool,
    /// Pad an under-budget BS-BFIS result up to K samples
    #[arg(long)]
    top_up: bool,
}

impl SamplerArgs {
    fn run(&self, loaded: &LoadedGraph) -> Result<(SamplingState, SampleMetadata)> {
        let g = &loaded.graph;
        if self.random {
            let state = random_sample(g.node_count(), self.k, self.seed)?;
            let meta = SampleMetadata {
                method: "random".into(),
                budget: self.k,
                sample_count: state.sample_count(),
                threshold: None,
                mu: self.mu,
                epsilon: self.epsilon,
                seed: self.seed,
                start_policy: "n/a".into(),
                start_node: None,
                bfis_calls: None,
                sub_unit_after_sampling: 0,
                top_up: Vec::new(),
            };
            return Ok((state, meta));
        }
        let result = bs_bfis_with_policy(g, self.k, self.epsilon, self.mu, self.start, self.seed)?;
        let mut state = result.state().clone();
        let added = if self.top_up {
            top_up(g, &mut state, self.k, self.mu)?
        } else {
            Vec::new()
        };
        let meta = SampleMetadata {
            method: "bs-bfis".into(),
            budget: self.k,
            sample_count: state.sample_count(),
            threshold: Some(result.threshold),
            mu: self.mu,
            epsilon: self.epsilon,
            seed: self.seed,
            start_policy: self.start.to_string(),
            start_node: Some(loaded.nodes[result.start].id.clone()),
            bfis_calls: Some(result.bfis_calls),
            sub_unit_after_sampling: result.run.sub_unit_after_sampling.len(),
            top_up: added.iter().map(|&i| loaded.nodes[i].id.clone()).collect(),
        };
        Ok((state, meta))
    }
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    input: GraphInput,
    #[command(flatten)]
    sampler: SamplerArgs,
    /// Output directory for samples.csv and samples.json
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReconstructArgs {
    #[command(flatten)]
    input: GraphInput,
    /// Sample file from `gda sample`
    #[arg(long)]
    samples: PathBuf,
    /// Standard deviation of the additive Gaussian noise
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.01)]
    mu: f64,
    /// Relative residual target for conjugate gradient
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Iteration cap (default 10 N)
    #[arg(long)]
    max_iter: Option<usize>,
    /// Use a Jacobi preconditioner
    #[arg(long)]
    jacobi: bool,
    /// Output directory for estimate.csv and reconstruct.json
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    input: GraphInput,
    /// Comma-separated budgets
    #[arg(long, value_delimiter = ',', required = true)]
    k: Vec<usize>,
    /// Random-sampling trials per budget
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.01)]
    mu: f64,
    #[arg(long, default_value_t = 1e-4)]
    epsilon: f64,
    #[arg(long, default_value = "brute-force")]
    start: StartPolicy,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: GraphInput,
    /// Comma-separated budgets (default: N/10, N/4, N/2)
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    #[arg(long, default_value_t = 0.01)]
    mu: f64,
    #[arg(long, default_value_t = 1e-4)]
    epsilon: f64,
    #[arg(long, default_value = "brute-force")]
    start: StartPolicy,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Serialize)]
struct BuildMetadata<'a> {
    source: &'a str,
    node_count: usize,
    edge_count: usize,
    sigma_l: f64,
    sigma_x: f64,
}

#[derive(Serialize)]
struct ReconstructMetadata {
    mse: f64,
    iterations: usize,
    residual: f64,
    sample_count: usize,
    mu: f64,
    sigma: f64,
    seed: u64,
    tol: f64,
    max_iter: usize,
    jacobi: bool,
}

fn build(args: &BuildArgs) -> Result<()> {
    let loaded = args.input.load()?;
    write_nodes_csv(&args.out.join("nodes.csv"), &loaded.nodes)?;
    write_edges_csv(&args.out.join("edges.csv"), &loaded.graph, &loaded.nodes)?;
    write_json(
        &args.out.join("graph.json"),
        &BuildMetadata {
            source: &loaded.source,
            node_count: loaded.graph.node_count(),
            edge_count: loaded.graph.edge_count(),
            sigma_l: args.input.sigma_l,
            sigma_x: args.input.sigma_x,
        },
    )?;
    println!(
        "wrote {} nodes, {} edges to {}",
        loaded.graph.node_count(),
        loaded.graph.edge_count(),
        args.out.display()
    );
    Ok(())
}

fn sample(args: &SampleArgs) -> Result<()> {
    let loaded = args.input.load()?;
    let (state, meta) = args.sampler.run(&loaded)?;
    write_samples_csv(&args.out.join("samples.csv"), &loaded.nodes, &state)?;
    write_json(&args.out.join("samples.json"), &meta)?;
    let ids: Vec<&str> = state
        .sampled_nodes()
        .into_iter()
        .map(|i| loaded.nodes[i].id.as_str())
        .collect();
    match meta.threshold {
        Some(t) => println!(
            "T_hat = {t:.6}  samples = {}  start = {}",
            meta.sample_count,
            meta.start_node.as_deref().unwrap_or("?")
        ),
        None => println!("samples = {}", meta.sample_count),
    }
    println!("sampled: {}", ids.join(" "));
    if meta.sub_unit_after_sampling > 0 {
        eprintln!(
            "warning: {} sampled node(s) still needed a scale factor below 1; the lower-bound guarantee does not apply",
            meta.sub_unit_after_sampling
        );
    }
    Ok(())
}

fn reconstruct(args: &ReconstructArgs) -> Result<()> {
    let loaded = args.input.load()?;
    let state = load_samples_csv(&args.samples, &loaded.nodes)?;
    let truth = GraphSignal::new(loaded.nodes.iter().map(|n| n.value).collect())?;
    let obs = observe(&truth, &state.sampled_nodes(), args.sigma, args.seed)?;
    let opts = SolveOptions {
        mu: args.mu,
        tol: args.tol,
        max_iter: args.max_iter,
        jacobi: args.jacobi,
    };
    let report = glr_solve(&loaded.graph, &obs, &opts)?;
    let err = mse(&report.estimate, &truth)?;
    write_estimate_csv(
        &args.out.join("estimate.csv"),
        &loaded.nodes,
        report.estimate.values(),
        &state.sampled,
    )?;
    write_json(
        &args.out.join("reconstruct.json"),
        &ReconstructMetadata {
            mse: err,
            iterations: report.iterations,
            residual: report.residual,
            sample_count: obs.nodes.len(),
            mu: args.mu,
            sigma: args.sigma,
            seed: args.seed,
            tol: args.tol,
            max_iter: args.max_iter.unwrap_or(10 * loaded.graph.node_count()),
            jacobi: args.jacobi,
        },
    )?;
    println!(
        "mse = {err:.6}  iterations = {}  residual = {:.3e}",
        report.iterations, report.residual
    );
    Ok(())
}

fn sweep(args: &SweepArgs) -> Result<()> {
    let loaded = args.input.load()?;
    let truth = GraphSignal::new(loaded.nodes.iter().map(|n| n.value).collect())?;
    let config = SweepConfig {
        budgets: args.k.clone(),
        trials: args.trials,
        noise_sigma: args.sigma,
        epsilon: args.epsilon,
        mu: args.mu,
        seed: args.seed,
        start: args.start,
        solver_tol: args.tol,
    };
    let rows = budget_sweep(&loaded.graph, &truth, &config)?;
    write_sweep_csv(&args.out, &rows, &config)?;
    println!(
        "{:>5} {:>9} {:>12} {:>12} {:>10} {:>10}",
        "K", "T_hat", "lmin_bfis", "lmin_rand", "mse_bfis", "mse_rand"
    );
    for r in &rows {
        println!(
            "{:>5} {:>9.5} {:>12.6} {:>12.6} {:>10.5} {:>10.5}",
            r.k, r.t_hat, r.lambda_min_bfis, r.lambda_min_random_mean, r.mse_bfis, r.mse_random_mean
        );
    }
    Ok(())
}

fn verify(args: &VerifyArgs) -> Result<bool> {
    let loaded = args.input.load()?;
    let n = loaded.graph.node_count();
    let budgets = if args.k.is_empty() {
        let mut ks: Vec<usize> = [n / 10, n / 4, n / 2].into_iter().map(|k| k.max(1)).collect();
        ks.dedup();
        ks
    } else {
        args.k.clone()
    };
    let report = verify_suite(&loaded.graph, &budgets, args.epsilon, args.mu, args.start, args.seed)?;
    for check in &report.checks {
        println!(
            "[{}] {}: {}",
            if check.passed { "PASS" } else { "FAIL" },
            check.name,
            check.detail
        );
    }
    Ok(report.passed())
}

fn configure_threads() -> Result<()> {
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let threads: usize = value
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("{THREADS_ENV} must be a thread count, got {value:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<bool> {
    configure_threads()?;
    match &cli.command {
        Command::Build(a) => build(a).map(|_| true),
        Command::Sample(a) => sample(a).map(|_| true),
        Command::Reconstruct(a) => reconstruct(a).map(|_| true),
        Command::Sweep(a) => sweep(a).map(|_| true),
        Command::Verify(a) => verify(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
