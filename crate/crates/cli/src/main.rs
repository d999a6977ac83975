//! Command-line driver: instance generation, core-set construction, LP
//! estimation, solving, two-pass streaming, experiment orchestration, and
//! the self-check suite.
//!
//! Exit codes: 0 ok, 2 configuration error (including bad flags), 3 I/O
//! error, 4 verification failure.

mod config;
mod experiment;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ExperimentConfig, SolverChoice};
use coreset::estimate::{est_cc, est_maxcut, gamma_original, EstMode};
use coreset::graph::{
    gen_planted_cc, gen_random_graph, read_edge_list, read_stream, to_stream, to_stream_signed,
    write_edge_list, write_stream, AnyGraph, StreamOrder,
};
use coreset::lp::{GraphView, SignedView};
use coreset::sampling::{
    edge_sample, importance_scores, importance_scores_signed, vertex_sample,
    vertex_sample_signed, ImportanceParams, Problem,
};
use coreset::solvers::{cc_exact, cc_local_search, maxcut_exact, maxcut_local_search};
use coreset::streaming::{measure_avg_degree, two_pass_run, TwoPassConfig};

#[derive(Debug)]
enum CliError {
    Config(String),
    Io(String),
    Verification(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Verification(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Verification(m) => write!(f, "verification failure: {m}"),
        }
    }
}

fn io_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Io(e.to_string())
}

fn cfg_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Config(e.to_string())
}

#[derive(Parser)]
#[command(
    name = "coreset",
    about = "Core-set and two-pass streaming approximation for MaxCut and max-agreement correlation clustering",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random graph or a planted signed instance.
    Generate(GenerateArgs),
    /// Vertex-sample (and optionally edge-sample) a graph into a core-set.
    Coreset(CoresetArgs),
    /// Run the seed-set LP estimator on a graph.
    Estimate(EstimateArgs),
    /// Solve an instance exactly or by local search.
    Solve(SolveArgs),
    /// Run the two-pass streaming pipeline over an edge stream.
    Stream(StreamArgs),
    /// Run the end-to-end baseline-vs-pipeline experiment.
    Experiment(ExperimentArgs),
    /// Run the invariant self-check suites; exits 4 on any failure.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Instance kind: "graph" (unweighted) or "cc" (signed, planted).
    #[arg(long, default_value = "graph")]
    kind: String,
    #[arg(long)]
    n: usize,
    /// Average degree exponent for plain graphs: expected degree n^x.
    #[arg(long, default_value_t = 0.5)]
    delta_exp: f64,
    /// Planted cluster count (signed instances).
    #[arg(long, default_value_t = 3)]
    clusters: usize,
    /// Sign-flip probability (signed instances).
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also write the edge stream, in the given order
    /// (sorted|shuffled|insert-delete-mix), next to the graph.
    #[arg(long)]
    stream_order: Option<String>,
}

#[derive(Args)]
struct CoresetArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0.25)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    c_const: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Skip the edge-sampling pass.
    #[arg(long)]
    no_edge_sample: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0.25)]
    epsilon: f64,
    /// Uniform seed probability; defaults to the 16 log n / (eps^2 Delta) rule.
    #[arg(long)]
    gamma: Option<f64>,
    /// Cluster budget for signed instances.
    #[arg(long, default_value_t = 2)]
    clusters: usize,
    /// "exhaustive" or "sampled:<T>".
    #[arg(long, default_value = "exhaustive")]
    mode: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    input: PathBuf,
    /// exact | local-search[:restarts]
    #[arg(long, default_value = "local-search:20")]
    solver: String,
    /// Cluster budget for signed instances.
    #[arg(long, default_value_t = 3)]
    clusters: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct StreamArgs {
    /// Graph file to stream (mutually exclusive with --from-stream).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Replay an existing stream file.
    #[arg(long)]
    from_stream: Option<PathBuf>,
    /// sorted | shuffled | insert-delete-mix (when streaming a graph file).
    #[arg(long, default_value = "shuffled")]
    order: String,
    #[arg(long, default_value_t = 0.25)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.016)]
    c_const: f64,
    #[arg(long, default_value = "local-search:20")]
    solver: String,
    /// Cluster budget for signed streams.
    #[arg(long, default_value_t = 3)]
    clusters: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Flat key = value config file; all keys can be overridden with --set.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. --set n=1024 --set pipeline=streaming.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Lower trial counts for a faster pass.
    #[arg(long)]
    quick: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Coreset(a) => cmd_coreset(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Stream(a) => cmd_stream(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn parse_order(s: &str) -> Result<StreamOrder, CliError> {
    match s {
        "sorted" => Ok(StreamOrder::Sorted),
        "shuffled" => Ok(StreamOrder::Shuffled),
        "insert-delete-mix" => Ok(StreamOrder::InsertDeleteMix),
        other => Err(CliError::Config(format!("unknown stream order '{other}'"))),
    }
}

fn parse_mode(s: &str) -> Result<EstMode, CliError> {
    if s == "exhaustive" {
        return Ok(EstMode::Exhaustive);
    }
    if let Some(t) = s.strip_prefix("sampled:") {
        let t = t
            .parse()
            .map_err(|e| CliError::Config(format!("bad sample count '{t}': {e}")))?;
        return Ok(EstMode::Sampled { t });
    }
    Err(CliError::Config(format!("unknown mode '{s}'")))
}

fn cmd_generate(a: GenerateArgs) -> Result<(), CliError> {
    eprintln!("rng seed: {}", a.seed);
    let g = match a.kind.as_str() {
        "graph" => AnyGraph::Plain(gen_random_graph(a.n, a.delta_exp, a.seed).map_err(cfg_err)?),
        "cc" => AnyGraph::Signed(
            gen_planted_cc(a.n, a.clusters, a.noise, a.seed).map_err(cfg_err)?,
        ),
        other => return Err(CliError::Config(format!("unknown kind '{other}'"))),
    };
    write_edge_list(&g, &a.out).map_err(io_err)?;
    if let Some(order) = &a.stream_order {
        let order = parse_order(order)?;
        let (events, n) = match &g {
            AnyGraph::Plain(g) => (to_stream(g, order, a.seed ^ 0x5), g.n()),
            AnyGraph::Signed(g) => (to_stream_signed(g, order, a.seed ^ 0x5), g.n()),
        };
        let mut stream_path = a.out.clone().into_os_string();
        stream_path.push(".stream");
        write_stream(&events, n, Path::new(&stream_path)).map_err(io_err)?;
    }
    let (n, m, delta) = match &g {
        AnyGraph::Plain(g) => (g.n(), g.num_edges(), g.avg_degree()),
        AnyGraph::Signed(g) => (g.n(), g.num_edges(), g.avg_degree()),
    };
    println!(
        "{}",
        serde_json::json!({"n": n, "edges": m, "avg_degree": delta, "seed": a.seed, "path": a.out})
    );
    Ok(())
}

fn cmd_coreset(a: CoresetArgs) -> Result<(), CliError> {
    eprintln!("rng seed: {}", a.seed);
    match read_edge_list(&a.input).map_err(io_err)? {
        AnyGraph::Plain(g) => {
            let params = ImportanceParams::maxcut(g.n(), g.avg_degree(), a.epsilon, a.c_const);
            let probs = importance_scores(&g, &params);
            let h = vertex_sample(&g, &params, &probs, a.seed).map_err(cfg_err)?;
            let h = if a.no_edge_sample || h.is_empty() {
                h
            } else {
                edge_sample(&h, a.epsilon, a.seed ^ 0xed9e).map_err(cfg_err)?
            };
            coreset::sampling::write_coreset(&h, &a.out).map_err(io_err)?;
            println!(
                "{}",
                serde_json::json!({
                    "vertices": h.len(),
                    "edges": h.edges.len(),
                    "total_weight": h.total_weight(),
                    "seed": a.seed,
                    "path": a.out,
                })
            );
        }
        AnyGraph::Signed(g) => {
            let params = ImportanceParams::cc(g.n(), g.avg_degree(), a.epsilon, a.c_const);
            let probs = importance_scores_signed(&g, &params);
            let h = vertex_sample_signed(&g, &params, &probs, a.seed).map_err(cfg_err)?;
            let json = serde_json::to_string_pretty(&h).expect("serializable");
            std::fs::write(&a.out, json).map_err(io_err)?;
            println!(
                "{}",
                serde_json::json!({
                    "vertices": h.len(),
                    "edges": h.edges.len(),
                    "seed": a.seed,
                    "path": a.out,
                })
            );
        }
    }
    Ok(())
}

fn cmd_estimate(a: EstimateArgs) -> Result<(), CliError> {
    eprintln!("rng seed: {}", a.seed);
    let mode = parse_mode(&a.mode)?;
    match read_edge_list(&a.input).map_err(io_err)? {
        AnyGraph::Plain(g) => {
            let view = GraphView::from_graph(&g);
            let gamma = match a.gamma {
                Some(v) => {
                    if !(0.0..=1.0).contains(&v) {
                        return Err(CliError::Config(format!("gamma = {v} outside [0, 1]")));
                    }
                    vec![v; g.n()]
                }
                None => gamma_original(g.n(), a.epsilon, g.avg_degree(), Default::default()),
            };
            let res = est_maxcut(&view, &gamma, a.seed, mode).map_err(cfg_err)?;
            println!("{}", res.to_json());
        }
        AnyGraph::Signed(g) => {
            let view = SignedView::from_graph(&g);
            let gamma = match a.gamma {
                Some(v) => vec![v; g.n()],
                None => gamma_original(g.n(), a.epsilon, g.avg_degree(), Default::default()),
            };
            let res = est_cc(&view, &gamma, a.clusters, a.seed, mode).map_err(cfg_err)?;
            println!("{}", res.to_json());
        }
    }
    Ok(())
}

fn cmd_solve(a: SolveArgs) -> Result<(), CliError> {
    eprintln!("rng seed: {}", a.seed);
    let solver: SolverChoice = a.solver.parse().map_err(CliError::Config)?;
    match read_edge_list(&a.input).map_err(io_err)? {
        AnyGraph::Plain(g) => {
            let view = GraphView::from_graph(&g);
            let (cut, value) = match solver {
                SolverChoice::Exact => maxcut_exact(&view).map_err(cfg_err)?,
                SolverChoice::LocalSearch { restarts } => {
                    maxcut_local_search(&view, restarts, a.seed)
                }
                SolverChoice::Est => {
                    return Err(CliError::Config(
                        "use the estimate subcommand for LP estimation".into(),
                    ))
                }
            };
            let sides: Vec<u8> = cut.side.iter().map(|&b| b as u8).collect();
            println!(
                "{}",
                serde_json::json!({"value": value, "assignment": sides, "solver": a.solver, "seed": a.seed})
            );
        }
        AnyGraph::Signed(g) => {
            let view = SignedView::from_graph(&g);
            let (cl, value) = match solver {
                SolverChoice::Exact => cc_exact(&view, a.clusters).map_err(cfg_err)?,
                SolverChoice::LocalSearch { restarts } => {
                    cc_local_search(&view, a.clusters, restarts, a.seed)
                }
                SolverChoice::Est => {
                    return Err(CliError::Config(
                        "use the estimate subcommand for LP estimation".into(),
                    ))
                }
            };
            println!(
                "{}",
                serde_json::json!({"value": value, "labels": cl.label, "solver": a.solver, "seed": a.seed})
            );
        }
    }
    Ok(())
}

fn cmd_stream(a: StreamArgs) -> Result<(), CliError> {
    eprintln!("rng seed: {}", a.seed);
    let solver: SolverChoice = a.solver.parse().map_err(CliError::Config)?;
    let (n, events, signed) = match (&a.input, &a.from_stream) {
        (Some(path), None) => match read_edge_list(path).map_err(io_err)? {
            AnyGraph::Plain(g) => {
                let order = parse_order(&a.order)?;
                (g.n(), to_stream(&g, order, a.seed ^ 0x5), false)
            }
            AnyGraph::Signed(g) => {
                let order = parse_order(&a.order)?;
                (g.n(), to_stream_signed(&g, order, a.seed ^ 0x5), true)
            }
        },
        (None, Some(path)) => {
            let (n, events) = read_stream(path).map_err(io_err)?;
            let signed = events
                .first()
                .is_some_and(|e| matches!(e.payload, coreset::graph::EdgePayload::Signed(..)));
            (n, events, signed)
        }
        _ => {
            return Err(CliError::Config(
                "provide exactly one of --input or --from-stream".into(),
            ))
        }
    };
    let delta = measure_avg_degree(&events, n);
    if delta <= 0.0 {
        return Err(CliError::Config("stream has no net edges".into()));
    }
    let mut cfg = TwoPassConfig::maxcut(a.epsilon, a.c_const, solver.to_stream_solver());
    if signed {
        cfg.problem = Problem::Cc;
        cfg.cc_k = a.clusters;
    }
    let report = two_pass_run(n, delta, &events, &cfg, a.seed).map_err(cfg_err)?;
    println!("{}", report.to_json());
    Ok(())
}

fn cmd_experiment(a: ExperimentArgs) -> Result<(), CliError> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(io_err)?;
            ExperimentConfig::from_text(&text).map_err(CliError::Config)?
        }
        None => ExperimentConfig::default(),
    };
    for kv in &a.sets {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        cfg.set(k.trim(), v.trim()).map_err(CliError::Config)?;
    }
    cfg.validate().map_err(CliError::Config)?;
    eprintln!("rng seed: {}", cfg.rng_seed);
    let report = experiment::run_experiment(&cfg).map_err(CliError::Config)?;
    let json_path = format!("{}.json", cfg.output);
    let csv_path = format!("{}.csv", cfg.output);
    let cfg_path = format!("{}.config", cfg.output);
    std::fs::write(
        &json_path,
        serde_json::to_string_pretty(&report).expect("serializable"),
    )
    .map_err(io_err)?;
    std::fs::write(&csv_path, report.to_csv().map_err(io_err)?).map_err(io_err)?;
    // The effective config, replayable as-is.
    std::fs::write(&cfg_path, cfg.to_text()).map_err(io_err)?;
    println!(
        "{}",
        serde_json::json!({
            "trials": report.rows.len(),
            "mean_ratio": report.mean_ratio,
            "min_ratio": report.min_ratio,
            "max_ratio": report.max_ratio,
            "json": json_path,
            "csv": csv_path,
        })
    );
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<(), CliError> {
    let mut results = coreset::verify::run_all(a.quick);
    results.push(coreset::verify::check_full_seed_exactness(if a.quick {
        10
    } else {
        30
    }));
    let mut failed = 0;
    for r in &results {
        println!(
            "{}: {} — {}",
            r.name,
            if r.passed { "ok" } else { "FAILED" },
            r.detail
        );
        if !r.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        return Err(CliError::Verification(format!("{failed} suite(s) failed")));
    }
    println!("all {} suites passed", results.len());
    Ok(())
}
