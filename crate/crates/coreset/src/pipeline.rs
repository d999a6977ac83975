//! Offline core-set pipeline: importance-score vertex sampling followed by
//! edge sparsification, then a solver on the result. The reported value is
//! rescaled by Delta^2 so it estimates the objective on the original graph.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimate::{est_cc, est_maxcut, gamma_coreset, EstMode, EstimateError};
use crate::graph::{Graph, SignedGraph};
use crate::lp::{GraphView, SignedView};
use crate::sampling::{
    edge_sample, importance_scores, importance_scores_signed, vertex_sample,
    vertex_sample_signed, ImportanceParams, SamplingError,
};
use crate::solvers::{cc_exact, cc_local_search, maxcut_exact, maxcut_local_search, SolverError};
use crate::streaming::{StreamSolver, EST_SOLVER_LIMIT, EXACT_SOLVER_LIMIT};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error("core-set with {got} vertices too large for solver (limit {limit})")]
    CoresetTooLarge { got: usize, limit: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineReport {
    pub value: f64,
    pub coreset_vertices: usize,
    pub coreset_edges: usize,
    pub rng_seed: u64,
}

/// Vertex-samples `g` at the importance scores, edge-samples the result,
/// solves, and rescales by Delta^2.
pub fn offline_maxcut_pipeline(
    g: &Graph,
    params: &ImportanceParams,
    solver: StreamSolver,
    rng_seed: u64,
) -> Result<PipelineReport, PipelineError> {
    let probs = importance_scores(g, params);
    let h = vertex_sample(g, params, &probs, rng_seed)?;
    let h = if h.is_empty() {
        h
    } else {
        edge_sample(&h, params.epsilon, rng_seed ^ 0xed9e)?
    };
    let delta = g.avg_degree();
    let view = GraphView::from_coreset(&h);
    let value = match solver {
        StreamSolver::Exact => {
            if h.len() > EXACT_SOLVER_LIMIT {
                return Err(PipelineError::CoresetTooLarge {
                    got: h.len(),
                    limit: EXACT_SOLVER_LIMIT,
                });
            }
            maxcut_exact(&view)?.1
        }
        StreamSolver::LocalSearch { restarts } => maxcut_local_search(&view, restarts, rng_seed).1,
        StreamSolver::Est => {
            if h.len() > EST_SOLVER_LIMIT {
                return Err(PipelineError::CoresetTooLarge {
                    got: h.len(),
                    limit: EST_SOLVER_LIMIT,
                });
            }
            let gamma = gamma_coreset(&h, params.epsilon, delta, g.n(), params.log_base);
            let expected: f64 = gamma.iter().sum();
            let mode = if expected <= 16.0 {
                EstMode::Exhaustive
            } else {
                EstMode::Sampled { t: 2048 }
            };
            est_maxcut(&view, &gamma, rng_seed ^ 0xe57, mode)?.value
        }
    };
    Ok(PipelineReport {
        value: delta * delta * value,
        coreset_vertices: h.len(),
        coreset_edges: h.edges.len(),
        rng_seed,
    })
}

/// Signed-graph pipeline (no edge sparsification step; the vertex-sampled
/// instance is solved directly).
pub fn offline_cc_pipeline(
    g: &SignedGraph,
    params: &ImportanceParams,
    k: usize,
    solver: StreamSolver,
    rng_seed: u64,
) -> Result<PipelineReport, PipelineError> {
    let probs = importance_scores_signed(g, params);
    let h = vertex_sample_signed(g, params, &probs, rng_seed)?;
    let delta = g.avg_degree();
    let view = SignedView::from_coreset(&h);
    let value = match solver {
        StreamSolver::Exact => cc_exact(&view, k)?.1,
        StreamSolver::LocalSearch { restarts } => cc_local_search(&view, k, restarts, rng_seed).1,
        StreamSolver::Est => {
            if h.len() > EST_SOLVER_LIMIT {
                return Err(PipelineError::CoresetTooLarge {
                    got: h.len(),
                    limit: EST_SOLVER_LIMIT,
                });
            }
            let base = 16.0 * params.log_base.log(g.n() as f64)
                / (params.epsilon * params.epsilon * delta);
            let gamma: Vec<f64> = h.vertices.iter().map(|&(_, p)| (base / p).min(1.0)).collect();
            est_cc(&view, &gamma, k, rng_seed ^ 0xe57, EstMode::Sampled { t: 1024 })?.value
        }
    };
    Ok(PipelineReport {
        value: delta * delta * value,
        coreset_vertices: h.len(),
        coreset_edges: h.edges.len(),
        rng_seed,
    })
}
