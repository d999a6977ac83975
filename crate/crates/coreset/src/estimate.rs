//! LP-based estimation of MaxCut and correlation-clustering values from a
//! sampled seed set: seed drawing, rho construction per seed partition,
//! per-partition LP solves, and the sampling-condition checker.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{build_cc_lp, build_maxcut_lp, GraphView, LpError, SignedView};
use crate::sampling::{CoresetGraph, LogBase};

#[derive(Debug, Error)]
pub enum EstimateError {
    #[error("seed of size {got} too large for exhaustive mode (limit {limit})")]
    SeedTooLarge { got: usize, limit: String },
    #[error("gamma[{0}] = 0 for a seed member")]
    ZeroGamma(usize),
    #[error("gamma[{i}] = {g} outside [0, 1]")]
    BadGamma { i: usize, g: f64 },
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Exhaustive-mode cap on the seed size for MaxCut (2^{|S|-1} partitions).
pub const MAXCUT_SEED_LIMIT: usize = 22;
/// Exhaustive-mode cap on k^{|S|} for correlation clustering.
pub const CC_ENUM_LIMIT: f64 = 2e6;

/// A drawn seed set together with the probabilities used to draw it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSet {
    pub ids: Vec<usize>,
    pub gamma: Vec<f64>,
}

/// Independent Bernoulli(gamma_i) inclusion per vertex, in id order.
/// Vertices with gamma_i = 1 are always included.
pub fn draw_seed(gamma: &[f64], rng_seed: u64) -> Result<SeedSet, EstimateError> {
    for (i, &g) in gamma.iter().enumerate() {
        if !(0.0..=1.0).contains(&g) {
            return Err(EstimateError::BadGamma { i, g });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let ids = (0..gamma.len())
        .filter(|&i| rng.gen::<f64>() < gamma[i] || gamma[i] >= 1.0)
        .collect();
    Ok(SeedSet {
        ids,
        gamma: gamma.to_vec(),
    })
}

/// rho_i = sum over neighbors j of i that lie in A of w_ij / gamma_j.
pub fn rho_from_partition(
    view: &GraphView,
    a: &[usize],
    gamma: &[f64],
) -> Result<Vec<f64>, EstimateError> {
    let mut in_a = vec![false; view.n];
    for &j in a {
        if gamma[j] <= 0.0 {
            return Err(EstimateError::ZeroGamma(j));
        }
        in_a[j] = true;
    }
    Ok((0..view.n)
        .map(|i| {
            view.adj[i]
                .iter()
                .filter(|&&(j, _)| in_a[j])
                .map(|&(j, w)| w / gamma[j])
                .sum()
        })
        .collect())
}

/// CC variant: rho_{il} = sum over neighbors j in A_l of eta_ij / gamma_j.
pub fn rho_cc_from_labeling(
    view: &SignedView,
    seed: &[usize],
    labels: &[usize],
    k: usize,
    gamma: &[f64],
) -> Result<Vec<Vec<f64>>, EstimateError> {
    let mut label_of = vec![usize::MAX; view.n];
    for (&j, &l) in seed.iter().zip(labels) {
        if gamma[j] <= 0.0 {
            return Err(EstimateError::ZeroGamma(j));
        }
        label_of[j] = l;
    }
    Ok((0..view.n)
        .map(|i| {
            let mut row = vec![0.0; k];
            for &(j, eta) in &view.adj[i] {
                let l = label_of[j];
                if l != usize::MAX {
                    row[l] += eta / gamma[j];
                }
            }
            row
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstMode {
    Exhaustive,
    Sampled { t: usize },
}

/// Result of an estimation run. `best_partition` holds one label per seed
/// member (0/1 sides for MaxCut).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateResult {
    pub value: f64,
    pub seed_ids: Vec<usize>,
    pub best_partition: Vec<usize>,
    pub partitions_evaluated: usize,
    pub mode: EstMode,
    pub rng_seed: u64,
}

impl EstimateResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }
}

const LP_TOL: f64 = 1e-7;

/// Candidate ordering: larger value wins, ties broken by the smaller
/// (lexicographically first) partition encoding so parallel reduction order
/// cannot change the reported argmax.
fn better(a: &(f64, u64), b: &(f64, u64)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Est: draw a seed via gamma, and for every partition of the seed (the
/// first member's side is fixed, halving the enumeration) solve the
/// estimation LP with the induced rho; return the maximum.
pub fn est_maxcut(
    view: &GraphView,
    gamma: &[f64],
    rng_seed: u64,
    mode: EstMode,
) -> Result<EstimateResult, EstimateError> {
    let seed = draw_seed(gamma, rng_seed)?;
    let s = seed.ids.len();
    let free = s.saturating_sub(1);
    let (codes, evaluated): (Vec<u64>, usize) = match mode {
        EstMode::Exhaustive => {
            if s > MAXCUT_SEED_LIMIT {
                return Err(EstimateError::SeedTooLarge {
                    got: s,
                    limit: MAXCUT_SEED_LIMIT.to_string(),
                });
            }
            let count = 1u64 << free;
            ((0..count).collect(), count as usize)
        }
        EstMode::Sampled { t } => {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed ^ 0x5eed_5a17);
            let codes = (0..t)
                .map(|_| {
                    if free >= 64 {
                        rng.gen::<u64>()
                    } else {
                        rng.gen_range(0..(1u64 << free))
                    }
                })
                .collect();
            (codes, t)
        }
    };
    let solve_one = |&code: &u64| -> Result<(f64, u64), EstimateError> {
        // Seed member 0 is always on the A side; bit i of the code places
        // seed member i+1.
        let a: Vec<usize> = seed
            .ids
            .iter()
            .enumerate()
            .filter(|&(pos, _)| pos == 0 || code >> (pos - 1) & 1 == 1)
            .map(|(_, &id)| id)
            .collect();
        let rho = rho_from_partition(view, &a, gamma)?;
        let lp = build_maxcut_lp(view, &rho)?;
        let sol = lp.solve(LP_TOL)?;
        Ok((sol.objective, code))
    };
    let best = if codes.len() > 16 {
        codes
            .par_iter()
            .map(solve_one)
            .try_reduce(
                || (f64::NEG_INFINITY, u64::MAX),
                |a, b| Ok(if better(&a, &b) { a } else { b }),
            )?
    } else {
        let mut acc = (f64::NEG_INFINITY, u64::MAX);
        for c in &codes {
            let cand = solve_one(c)?;
            if better(&cand, &acc) {
                acc = cand;
            }
        }
        acc
    };
    let (value, code) = if codes.is_empty() {
        (0.0, 0)
    } else {
        best
    };
    let best_partition: Vec<usize> = (0..s)
        .map(|pos| {
            if pos == 0 {
                1
            } else {
                (code >> (pos - 1) & 1) as usize
            }
        })
        .collect();
    Ok(EstimateResult {
        value,
        seed_ids: seed.ids,
        best_partition,
        partitions_evaluated: evaluated,
        mode,
        rng_seed,
    })
}

/// Est_C: as [`est_maxcut`] but maximizing over k-labelings of the seed
/// (the first member's label is fixed to 0).
pub fn est_cc(
    view: &SignedView,
    gamma: &[f64],
    k: usize,
    rng_seed: u64,
    mode: EstMode,
) -> Result<EstimateResult, EstimateError> {
    let k = k.max(1);
    let seed = draw_seed(gamma, rng_seed)?;
    let s = seed.ids.len();
    let free = s.saturating_sub(1);
    let count_exhaustive = (k as f64).powi(free as i32);
    let (codes, evaluated): (Vec<u64>, usize) = match mode {
        EstMode::Exhaustive => {
            if (k as f64).powi(s as i32) > CC_ENUM_LIMIT {
                return Err(EstimateError::SeedTooLarge {
                    got: s,
                    limit: format!("k^|S| <= {CC_ENUM_LIMIT}"),
                });
            }
            let count = count_exhaustive as u64;
            ((0..count).collect(), count as usize)
        }
        EstMode::Sampled { t } => {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed ^ 0x5eed_5a17);
            let cap = count_exhaustive.min(u64::MAX as f64) as u64;
            let codes = (0..t).map(|_| rng.gen_range(0..cap.max(1))).collect();
            (codes, t)
        }
    };
    let decode = |code: u64| -> Vec<usize> {
        let mut labels = vec![0usize; s];
        let mut c = code;
        for l in labels.iter_mut().skip(1) {
            *l = (c % k as u64) as usize;
            c /= k as u64;
        }
        labels
    };
    let solve_one = |&code: &u64| -> Result<(f64, u64), EstimateError> {
        let labels = decode(code);
        let rho = rho_cc_from_labeling(view, &seed.ids, &labels, k, gamma)?;
        let lp = build_cc_lp(view, k, &rho)?;
        let sol = lp.solve(LP_TOL)?;
        Ok((sol.objective, code))
    };
    let best = if codes.len() > 16 {
        codes
            .par_iter()
            .map(solve_one)
            .try_reduce(
                || (f64::NEG_INFINITY, u64::MAX),
                |a, b| Ok(if better(&a, &b) { a } else { b }),
            )?
    } else {
        let mut acc = (f64::NEG_INFINITY, u64::MAX);
        for c in &codes {
            let cand = solve_one(c)?;
            if better(&cand, &acc) {
                acc = cand;
            }
        }
        acc
    };
    let (value, code) = if codes.is_empty() { (0.0, 0) } else { best };
    Ok(EstimateResult {
        value,
        seed_ids: seed.ids,
        best_partition: decode(code),
        partitions_evaluated: evaluated,
        mode,
        rng_seed,
    })
}

/// Uniform seed probabilities for estimating on the original graph:
/// min(1, 16 log n / (eps^2 Delta)).
pub fn gamma_original(n: usize, epsilon: f64, delta: f64, log_base: LogBase) -> Vec<f64> {
    let g = (16.0 * log_base.log(n as f64) / (epsilon * epsilon * delta)).min(1.0);
    vec![g; n]
}

/// Seed probabilities for estimating on a core-set: the uniform rate divided
/// by each vertex's retention probability, clamped to 1.
pub fn gamma_coreset(
    coreset: &CoresetGraph,
    epsilon: f64,
    delta: f64,
    n: usize,
    log_base: LogBase,
) -> Vec<f64> {
    let base = 16.0 * log_base.log(n as f64) / (epsilon * epsilon * delta);
    coreset
        .vertices
        .iter()
        .map(|&(_, p)| (base / p).min(1.0))
        .collect()
}

/// Outcome of the per-edge sampling condition
/// `w_ij <= W eps^2 / (8 k^2 log n) * gamma_i gamma_j / sum_u gamma_u`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionReport {
    pub holds: bool,
    /// First violating edge as (u, v, w, bound).
    pub violator: Option<(usize, usize, f64, f64)>,
}

fn check_condition_edges(
    n: usize,
    edges: impl Iterator<Item = (usize, usize, f64)>,
    w_total: f64,
    gamma: &[f64],
    epsilon: f64,
    k: usize,
    log_base: LogBase,
) -> ConditionReport {
    let gamma_sum: f64 = gamma.iter().sum();
    let kk = (k * k) as f64;
    let coeff = w_total * epsilon * epsilon / (8.0 * kk * log_base.log(n as f64));
    for (u, v, w) in edges {
        if w == 0.0 {
            continue;
        }
        let bound = coeff * gamma[u] * gamma[v] / gamma_sum;
        if w > bound {
            return ConditionReport {
                holds: false,
                violator: Some((u, v, w, bound)),
            };
        }
    }
    ConditionReport {
        holds: true,
        violator: None,
    }
}

/// MaxCut condition check (k = 1).
pub fn check_condition(
    view: &GraphView,
    gamma: &[f64],
    epsilon: f64,
    log_base: LogBase,
) -> ConditionReport {
    let edges = (0..view.n).flat_map(|i| {
        view.adj[i]
            .iter()
            .filter(move |&&(j, _)| j > i)
            .map(move |&(j, w)| (i, j, w))
    });
    check_condition_edges(view.n, edges, view.total_weight, gamma, epsilon, 1, log_base)
}

/// CC condition check; the bound shrinks by k^2.
pub fn check_condition_cc(
    view: &SignedView,
    gamma: &[f64],
    epsilon: f64,
    k: usize,
    log_base: LogBase,
) -> ConditionReport {
    let edges = (0..view.n).flat_map(|i| {
        view.adj[i]
            .iter()
            .filter(move |&&(j, _)| j > i)
            .map(move |&(j, eta)| (i, j, eta.abs()))
    });
    check_condition_edges(view.n, edges, view.total_weight, gamma, epsilon, k, log_base)
}
