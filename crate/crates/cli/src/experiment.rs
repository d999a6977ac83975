//! End-to-end experiment harness: per trial, generate an instance, solve a
//! baseline on the full input, run the chosen pipeline, and report ratios,
//! runtimes and space counters. Trials run in a worker pool with seeds
//! derived as `rng_seed ^ trial`, and rows are emitted in trial order.

use std::time::Instant;

use coreset::graph::{gen_planted_cc, gen_random_graph, to_stream, StreamOrder};
use coreset::lp::{GraphView, SignedView};
use coreset::pipeline::{offline_cc_pipeline, offline_maxcut_pipeline};
use coreset::sampling::{ImportanceParams, Problem};
use coreset::solvers::{cc_exact, cc_local_search, maxcut_exact, maxcut_local_search};
use coreset::streaming::{two_pass_run, SpaceCounters, TwoPassConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Pipeline, SolverChoice};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    pub coreset_vertices: usize,
    pub coreset_edges: usize,
    pub baseline_value: f64,
    pub pipeline_value: f64,
    pub ratio: f64,
    pub baseline_ms: f64,
    pub pipeline_ms: f64,
    pub stored_items: usize,
    pub space: SpaceCounters,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rows: Vec<TrialRow>,
    pub mean_ratio: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

impl ExperimentReport {
    pub fn aggregate(config: ExperimentConfig, rows: Vec<TrialRow>) -> Self {
        let mean_ratio = rows.iter().map(|r| r.ratio).sum::<f64>() / rows.len().max(1) as f64;
        let min_ratio = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
        let max_ratio = rows
            .iter()
            .map(|r| r.ratio)
            .fold(f64::NEG_INFINITY, f64::max);
        ExperimentReport {
            config,
            rows,
            mean_ratio,
            min_ratio,
            max_ratio,
        }
    }

    /// CSV rows; the column list is documented in docs/report_columns.md.
    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "trial",
            "seed",
            "coreset_vertices",
            "coreset_edges",
            "baseline_value",
            "pipeline_value",
            "ratio",
            "baseline_ms",
            "pipeline_ms",
            "stored_items",
            "s_entries",
            "e_prime_edges",
            "cm_counters",
            "sampler_cells",
            "aux_counters",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.trial.to_string(),
                r.seed.to_string(),
                r.coreset_vertices.to_string(),
                r.coreset_edges.to_string(),
                format!("{}", r.baseline_value),
                format!("{}", r.pipeline_value),
                format!("{}", r.ratio),
                format!("{}", r.baseline_ms),
                format!("{}", r.pipeline_ms),
                r.stored_items.to_string(),
                r.space.s_entries.to_string(),
                r.space.e_prime_edges.to_string(),
                r.space.cm_counters.to_string(),
                r.space.sampler_cells.to_string(),
                r.space.aux_counters.to_string(),
            ])?;
        }
        let bytes = w.into_inner().expect("in-memory writer");
        Ok(String::from_utf8(bytes).expect("utf8 csv"))
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, String> {
    let rows: Result<Vec<TrialRow>, String> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| run_trial(cfg, trial).map_err(|e| format!("trial {trial}: {e}")))
        .collect();
    let mut rows = rows?;
    rows.sort_by_key(|r| r.trial);
    Ok(ExperimentReport::aggregate(cfg.clone(), rows))
}

fn run_trial(cfg: &ExperimentConfig, trial: usize) -> Result<TrialRow, String> {
    let seed = cfg.rng_seed ^ trial as u64;
    match cfg.problem {
        Problem::MaxCut => run_maxcut_trial(cfg, trial, seed),
        Problem::Cc => run_cc_trial(cfg, trial, seed),
    }
}

fn run_maxcut_trial(cfg: &ExperimentConfig, trial: usize, seed: u64) -> Result<TrialRow, String> {
    let g = gen_random_graph(cfg.n, cfg.delta_exp, seed).map_err(|e| e.to_string())?;
    let delta = g.avg_degree();
    let view = GraphView::from_graph(&g);

    let t0 = Instant::now();
    let baseline = match cfg.solver {
        SolverChoice::Exact => maxcut_exact(&view).map_err(|e| e.to_string())?.1,
        SolverChoice::LocalSearch { restarts } => maxcut_local_search(&view, restarts, seed).1,
        SolverChoice::Est => {
            let gamma =
                coreset::estimate::gamma_original(cfg.n, cfg.epsilon, delta, Default::default());
            let expected: f64 = gamma.iter().sum();
            let mode = if expected <= 16.0 {
                coreset::estimate::EstMode::Exhaustive
            } else {
                coreset::estimate::EstMode::Sampled { t: 2048 }
            };
            coreset::estimate::est_maxcut(&view, &gamma, seed, mode)
                .map_err(|e| e.to_string())?
                .value
        }
    };
    let baseline_ms = t0.elapsed().as_secs_f64() * 1e3;

    let params = ImportanceParams::maxcut(cfg.n, delta, cfg.epsilon, cfg.c_const);
    let t1 = Instant::now();
    let (value, vertices, edges, space) = match cfg.pipeline {
        Pipeline::Offline => {
            let rep = offline_maxcut_pipeline(&g, &params, cfg.solver.to_stream_solver(), seed)
                .map_err(|e| e.to_string())?;
            let space = SpaceCounters {
                s_entries: rep.coreset_vertices,
                e_prime_edges: rep.coreset_edges,
                ..Default::default()
            };
            (rep.value, rep.coreset_vertices, rep.coreset_edges, space)
        }
        Pipeline::Streaming => {
            let events = to_stream(&g, StreamOrder::Shuffled, seed ^ 0x57);
            let tp = TwoPassConfig::maxcut(cfg.epsilon, cfg.c_const, cfg.solver.to_stream_solver());
            let rep = two_pass_run(cfg.n, delta, &events, &tp, seed).map_err(|e| e.to_string())?;
            (
                rep.value,
                rep.coreset_vertices,
                rep.coreset_edges,
                rep.space,
            )
        }
    };
    let pipeline_ms = t1.elapsed().as_secs_f64() * 1e3;

    Ok(TrialRow {
        trial,
        seed,
        coreset_vertices: vertices,
        coreset_edges: edges,
        baseline_value: baseline,
        pipeline_value: value,
        ratio: if baseline.abs() > 0.0 { value / baseline } else { 1.0 },
        baseline_ms,
        pipeline_ms,
        stored_items: space.stored_items(),
        space,
    })
}

fn run_cc_trial(cfg: &ExperimentConfig, trial: usize, seed: u64) -> Result<TrialRow, String> {
    let g =
        gen_planted_cc(cfg.n, cfg.clusters, cfg.noise, seed).map_err(|e| e.to_string())?;
    let delta = g.avg_degree();
    let view = SignedView::from_graph(&g);
    let k = cfg.clusters.max(2);

    let t0 = Instant::now();
    let baseline = match cfg.solver {
        SolverChoice::Exact => cc_exact(&view, k).map_err(|e| e.to_string())?.1,
        SolverChoice::LocalSearch { restarts } => cc_local_search(&view, k, restarts, seed).1,
        SolverChoice::Est => {
            let gamma =
                coreset::estimate::gamma_original(cfg.n, cfg.epsilon, delta, Default::default());
            coreset::estimate::est_cc(
                &view,
                &gamma,
                k,
                seed,
                coreset::estimate::EstMode::Sampled { t: 1024 },
            )
            .map_err(|e| e.to_string())?
            .value
        }
    };
    let baseline_ms = t0.elapsed().as_secs_f64() * 1e3;

    let params = ImportanceParams::cc(cfg.n, delta, cfg.epsilon, cfg.c_const);
    let t1 = Instant::now();
    let (value, vertices, edges, space) = match cfg.pipeline {
        Pipeline::Offline => {
            let rep = offline_cc_pipeline(&g, &params, k, cfg.solver.to_stream_solver(), seed)
                .map_err(|e| e.to_string())?;
            let space = SpaceCounters {
                s_entries: rep.coreset_vertices,
                e_prime_edges: rep.coreset_edges,
                ..Default::default()
            };
            (rep.value, rep.coreset_vertices, rep.coreset_edges, space)
        }
        Pipeline::Streaming => {
            let events =
                coreset::graph::to_stream_signed(&g, StreamOrder::Shuffled, seed ^ 0x57);
            let mut tp =
                TwoPassConfig::maxcut(cfg.epsilon, cfg.c_const, cfg.solver.to_stream_solver());
            tp.problem = Problem::Cc;
            tp.cc_k = k;
            let rep = two_pass_run(cfg.n, delta, &events, &tp, seed).map_err(|e| e.to_string())?;
            (
                rep.value,
                rep.coreset_vertices,
                rep.coreset_edges,
                rep.space,
            )
        }
    };
    let pipeline_ms = t1.elapsed().as_secs_f64() * 1e3;

    Ok(TrialRow {
        trial,
        seed,
        coreset_vertices: vertices,
        coreset_edges: edges,
        baseline_value: baseline,
        pipeline_value: value,
        ratio: if baseline.abs() > 0.0 { value / baseline } else { 1.0 },
        baseline_ms,
        pipeline_ms,
        stored_items: space.stored_items(),
        space,
    })
}
