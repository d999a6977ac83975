//! Importance scores, the vertex- and edge-sample core-set procedures, and
//! the double-sampling strategy-equivalence machinery.
//!
//! All sampling routines draw one uniform variate per vertex (or edge) in id
//! order from a seeded generator, so runs are reproducible given the seed.

use std::collections::HashMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError, SignedGraph};

#[derive(Debug, Error)]
pub enum SamplingError {
    #[error("retention probability p[{i}] = {p} outside [h_i, min(1, 2 h_i)] = [{lo}, {hi}]")]
    ProbabilityOutOfBand { i: usize, p: f64, lo: f64, hi: f64 },
    #[error("probability vector length {got} does not match vertex count {want}")]
    LengthMismatch { got: usize, want: usize },
    #[error("q[{i}] = {q} exceeds p[{i}] = {p}")]
    QAboveP { i: usize, q: f64, p: f64 },
    #[error("probability out of range: {0}")]
    BadProbability(f64),
    #[error("exact distribution only supported for n <= {max}, got {got}")]
    TooManyVertices { got: usize, max: usize },
    #[error("empty core-set")]
    EmptyCoreset,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("metadata error: {0}")]
    Metadata(String),
}

/// Base used for every `log` appearing in score and threshold formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LogBase {
    #[default]
    Natural,
    Base2,
}

impl LogBase {
    #[inline]
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Base2 => x.log2(),
        }
    }
}

/// Which objective the score threshold is calibrated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Problem {
    MaxCut,
    Cc,
}

/// Parameters of the importance score.
///
/// `alpha_eps` is derived: eps^4 / (C log n) for MaxCut and eps^8 / (C log n)
/// for correlation clustering, with `C` the configurable absolute constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImportanceParams {
    pub epsilon: f64,
    pub c_const: f64,
    pub problem: Problem,
    pub n: usize,
    pub delta: f64,
    pub alpha_eps: f64,
    pub log_base: LogBase,
    /// When set, the CC score floor uses eps*Delta/k instead of eps*Delta.
    pub cc_floor_k: Option<usize>,
}

impl ImportanceParams {
    pub fn new(
        problem: Problem,
        n: usize,
        delta: f64,
        epsilon: f64,
        c_const: f64,
        log_base: LogBase,
    ) -> Self {
        let exp = match problem {
            Problem::MaxCut => 4,
            Problem::Cc => 8,
        };
        let alpha_eps = epsilon.powi(exp) / (c_const * log_base.log(n as f64));
        ImportanceParams {
            epsilon,
            c_const,
            problem,
            n,
            delta,
            alpha_eps,
            log_base,
            cc_floor_k: None,
        }
    }

    pub fn maxcut(n: usize, delta: f64, epsilon: f64, c_const: f64) -> Self {
        Self::new(Problem::MaxCut, n, delta, epsilon, c_const, LogBase::Natural)
    }

    pub fn cc(n: usize, delta: f64, epsilon: f64, c_const: f64) -> Self {
        Self::new(Problem::Cc, n, delta, epsilon, c_const, LogBase::Natural)
    }

    /// Degree floor inside the score: eps*Delta, or eps*Delta/k when the CC
    /// per-cluster variant is switched on.
    pub fn degree_floor(&self) -> f64 {
        match (self.problem, self.cc_floor_k) {
            (Problem::Cc, Some(k)) if k > 0 => self.epsilon * self.delta / k as f64,
            _ => self.epsilon * self.delta,
        }
    }
}

/// Importance score h_i = min{1, max{d_i, eps*Delta} / (Delta^2 alpha_eps)}.
pub fn importance_score(d_i: f64, params: &ImportanceParams) -> f64 {
    let numer = d_i.max(params.degree_floor());
    (numer / (params.delta * params.delta * params.alpha_eps)).min(1.0)
}

/// Scores for every vertex of a plain graph.
pub fn importance_scores(g: &Graph, params: &ImportanceParams) -> Vec<f64> {
    g.degrees()
        .iter()
        .map(|&d| importance_score(d, params))
        .collect()
}

/// Scores for every vertex of a signed graph (degrees are sums of |eta|).
pub fn importance_scores_signed(g: &SignedGraph, params: &ImportanceParams) -> Vec<f64> {
    g.degrees()
        .iter()
        .map(|&d| importance_score(d, params))
        .collect()
}

/// A vertex-sampled weighted graph carrying original ids and retention
/// probabilities. Edge weights are `1/(p_u p_v Delta^2)` times the original
/// edge weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoresetGraph {
    /// Retained vertices as (original id, retention probability).
    pub vertices: Vec<(usize, f64)>,
    /// Edges over positions into `vertices`, with reweighted weights.
    pub edges: Vec<(usize, usize, f64)>,
    /// Provenance: parameters of the run that produced this core-set.
    pub provenance: CoresetProvenance,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CoresetProvenance {
    pub source_n: usize,
    pub delta: f64,
    pub epsilon: f64,
    pub rng_seed: u64,
    pub edge_sampled: bool,
}

impl CoresetGraph {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Total edge weight W.
    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2).sum()
    }

    /// Weighted degrees, indexed by position into `vertices`.
    pub fn degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.vertices.len()];
        for &(u, v, w) in &self.edges {
            d[u] += w;
            d[v] += w;
        }
        d
    }
}

/// Signed counterpart of [`CoresetGraph`]; each edge keeps its scaled
/// (c+, c-) channel weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedCoresetGraph {
    pub vertices: Vec<(usize, f64)>,
    pub edges: Vec<(usize, usize, f64, f64)>,
    pub provenance: CoresetProvenance,
}

impl SignedCoresetGraph {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Total |eta| weight.
    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|&(_, _, cp, cm)| (cp - cm).abs()).sum()
    }

    pub fn c_minus_total(&self) -> f64 {
        self.edges.iter().map(|&(_, _, _, cm)| cm).sum()
    }
}

fn check_band(
    probs: &[f64],
    scores: &[f64],
) -> Result<(), SamplingError> {
    if probs.len() != scores.len() {
        return Err(SamplingError::LengthMismatch {
            got: probs.len(),
            want: scores.len(),
        });
    }
    const SLACK: f64 = 1e-12;
    for (i, (&p, &h)) in probs.iter().zip(scores).enumerate() {
        let hi = (2.0 * h).min(1.0);
        if p < h - SLACK || p > hi + SLACK {
            return Err(SamplingError::ProbabilityOutOfBand { i, p, lo: h, hi });
        }
    }
    Ok(())
}

/// Keeps each vertex independently with probability `probs[i]` and reweights
/// induced edges to `w/(p_u p_v Delta^2)`. Probabilities are validated
/// against the importance-score band `[h_i, min(1, 2 h_i)]`.
pub fn vertex_sample(
    g: &Graph,
    params: &ImportanceParams,
    probs: &[f64],
    rng_seed: u64,
) -> Result<CoresetGraph, SamplingError> {
    check_band(probs, &importance_scores(g, params))?;
    Ok(vertex_sample_unchecked(g, probs, rng_seed))
}

/// As [`vertex_sample`] but without the band validation (for experiments).
pub fn vertex_sample_unchecked(g: &Graph, probs: &[f64], rng_seed: u64) -> CoresetGraph {
    let delta = g.avg_degree();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut keep = vec![false; g.n()];
    let mut pos = vec![usize::MAX; g.n()];
    let mut vertices = Vec::new();
    for i in 0..g.n() {
        let u: f64 = rng.gen();
        if u < probs[i] {
            keep[i] = true;
            pos[i] = vertices.len();
            vertices.push((i, probs[i]));
        }
    }
    let dd = delta * delta;
    let edges = g
        .edges()
        .iter()
        .filter(|&&(u, v, _)| keep[u] && keep[v])
        .map(|&(u, v, w)| (pos[u], pos[v], w / (probs[u] * probs[v] * dd)))
        .collect();
    CoresetGraph {
        vertices,
        edges,
        provenance: CoresetProvenance {
            source_n: g.n(),
            delta,
            epsilon: 0.0,
            rng_seed,
            edge_sampled: false,
        },
    }
}

/// Signed-graph vertex sampling; channel weights are scaled by
/// `1/(p_u p_v Delta^2)`.
pub fn vertex_sample_signed(
    g: &SignedGraph,
    params: &ImportanceParams,
    probs: &[f64],
    rng_seed: u64,
) -> Result<SignedCoresetGraph, SamplingError> {
    check_band(probs, &importance_scores_signed(g, params))?;
    Ok(vertex_sample_signed_unchecked(g, probs, rng_seed))
}

pub fn vertex_sample_signed_unchecked(
    g: &SignedGraph,
    probs: &[f64],
    rng_seed: u64,
) -> SignedCoresetGraph {
    let delta = g.avg_degree();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut keep = vec![false; g.n()];
    let mut pos = vec![usize::MAX; g.n()];
    let mut vertices = Vec::new();
    for i in 0..g.n() {
        let u: f64 = rng.gen();
        if u < probs[i] {
            keep[i] = true;
            pos[i] = vertices.len();
            vertices.push((i, probs[i]));
        }
    }
    let dd = delta * delta;
    let edges = g
        .edges()
        .iter()
        .filter(|&&(u, v, _, _)| keep[u] && keep[v])
        .map(|&(u, v, cp, cm)| {
            let scale = 1.0 / (probs[u] * probs[v] * dd);
            (pos[u], pos[v], cp * scale, cm * scale)
        })
        .collect();
    SignedCoresetGraph {
        vertices,
        edges,
        provenance: CoresetProvenance {
            source_n: g.n(),
            delta,
            epsilon: 0.0,
            rng_seed,
            edge_sampled: false,
        },
    }
}

/// Default numerator constant of the edge keep probability.
pub const EDGE_SAMPLE_CONST: f64 = 8.0;

/// Sparsifies a core-set: weights are rescaled to sum to |S'|, each edge is
/// kept independently with probability `min(1, c * w~ / eps^2)`, kept edges
/// are reweighted to `w/p_e` (the rescaling cancels, so expected total
/// weight matches the input).
pub fn edge_sample(h: &CoresetGraph, epsilon: f64, rng_seed: u64) -> Result<CoresetGraph, SamplingError> {
    edge_sample_with_constant(h, epsilon, EDGE_SAMPLE_CONST, rng_seed)
}

pub fn edge_sample_with_constant(
    h: &CoresetGraph,
    epsilon: f64,
    c: f64,
    rng_seed: u64,
) -> Result<CoresetGraph, SamplingError> {
    if h.is_empty() {
        return Err(SamplingError::EmptyCoreset);
    }
    let w_total = h.total_weight();
    let scale = if w_total > 0.0 {
        h.len() as f64 / w_total
    } else {
        0.0
    };
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut edges = Vec::new();
    for &(u, v, w) in &h.edges {
        let p_e = (c * w * scale / (epsilon * epsilon)).min(1.0);
        let coin: f64 = rng.gen();
        if coin < p_e {
            edges.push((u, v, w / p_e));
        }
    }
    let mut out = h.clone();
    out.edges = edges;
    out.provenance.epsilon = epsilon;
    out.provenance.edge_sampled = true;
    Ok(out)
}

/// Conditional probability P(v in S' | v not in S) that makes strategy B
/// reproduce strategy A's joint distribution: (p - q)/(1 - q). At p = 1 this
/// is identically 1 (the vertex is deterministically in S'); at q = 1 the
/// conditional is vacuous and also reported as 1.
pub fn p_star(p: f64, q: f64) -> Result<f64, SamplingError> {
    if !(0.0..=1.0).contains(&p) || p == 0.0 {
        return Err(SamplingError::BadProbability(p));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(SamplingError::BadProbability(q));
    }
    if q > p {
        return Err(SamplingError::QAboveP { i: 0, q, p });
    }
    if q >= 1.0 {
        return Ok(1.0);
    }
    Ok((p - q) / (1.0 - q))
}

/// A nested pair of vertex sets with S contained in S'.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSample {
    pub s: Vec<usize>,
    pub s_prime: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    A,
    B,
}

/// Draws a nested pair (S, S') by one of the two equivalent strategies.
///
/// Strategy A includes v in S' w.p. p_v and then promotes members of S' into
/// S w.p. q_v/p_v. Strategy B draws S first w.p. q_v, then fills S' with
/// members of S plus non-members kept w.p. p*.
pub fn double_sample(
    strategy: Strategy,
    p: &[f64],
    q: &[f64],
    rng_seed: u64,
) -> Result<PairSample, SamplingError> {
    if p.len() != q.len() {
        return Err(SamplingError::LengthMismatch {
            got: q.len(),
            want: p.len(),
        });
    }
    for (i, (&pv, &qv)) in p.iter().zip(q).enumerate() {
        if !(0.0..=1.0).contains(&pv) {
            return Err(SamplingError::BadProbability(pv));
        }
        if !(0.0..=1.0).contains(&qv) {
            return Err(SamplingError::BadProbability(qv));
        }
        if qv > pv {
            return Err(SamplingError::QAboveP { i, q: qv, p: pv });
        }
    }
    let n = p.len();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut s = Vec::new();
    let mut s_prime = Vec::new();
    match strategy {
        Strategy::A => {
            let mut in_sp = vec![false; n];
            for v in 0..n {
                if rng.gen::<f64>() < p[v] {
                    in_sp[v] = true;
                    s_prime.push(v);
                }
            }
            for v in 0..n {
                if in_sp[v] {
                    let promote = if p[v] > 0.0 { q[v] / p[v] } else { 0.0 };
                    if rng.gen::<f64>() < promote {
                        s.push(v);
                    }
                }
            }
        }
        Strategy::B => {
            let mut in_s = vec![false; n];
            for v in 0..n {
                if rng.gen::<f64>() < q[v] {
                    in_s[v] = true;
                    s.push(v);
                }
            }
            for v in 0..n {
                if in_s[v] {
                    s_prime.push(v);
                } else {
                    let pv_star = if p[v] == 0.0 {
                        0.0
                    } else {
                        p_star(p[v], q[v])?
                    };
                    if rng.gen::<f64>() < pv_star {
                        s_prime.push(v);
                    }
                }
            }
        }
    }
    Ok(PairSample { s, s_prime })
}

/// Exact joint distribution of (S, S') as a table over bitmask pairs.
#[derive(Debug, Clone)]
pub struct PairDistribution {
    pub n: usize,
    probs: HashMap<(u32, u32), f64>,
}

impl PairDistribution {
    pub fn prob(&self, s_mask: u32, sp_mask: u32) -> f64 {
        self.probs.get(&(s_mask, sp_mask)).copied().unwrap_or(0.0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(u32, u32), &f64)> {
        self.probs.iter()
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    /// Largest entrywise difference against another table.
    pub fn max_diff(&self, other: &PairDistribution) -> f64 {
        let mut keys: Vec<(u32, u32)> = self.probs.keys().copied().collect();
        keys.extend(other.probs.keys().copied());
        keys.sort_unstable();
        keys.dedup();
        keys.iter()
            .map(|&(s, sp)| (self.prob(s, sp) - other.prob(s, sp)).abs())
            .fold(0.0, f64::max)
    }
}

pub const PAIR_DISTRIBUTION_MAX_N: usize = 12;

/// Exact probabilities of every (S, S') pair under a strategy, by per-vertex
/// independence. Only masks with S contained in S' get entries; the table
/// sums to 1 within 1e-12.
pub fn pair_distribution_exact(
    strategy: Strategy,
    p: &[f64],
    q: &[f64],
) -> Result<PairDistribution, SamplingError> {
    let n = p.len();
    if n > PAIR_DISTRIBUTION_MAX_N {
        return Err(SamplingError::TooManyVertices {
            got: n,
            max: PAIR_DISTRIBUTION_MAX_N,
        });
    }
    if q.len() != n {
        return Err(SamplingError::LengthMismatch { got: q.len(), want: n });
    }
    for (i, (&pv, &qv)) in p.iter().zip(q).enumerate() {
        if qv > pv {
            return Err(SamplingError::QAboveP { i, q: qv, p: pv });
        }
    }
    // Per-vertex probabilities of the three cases (in both, in S' only, out).
    let mut cases = Vec::with_capacity(n);
    for v in 0..n {
        let (both, sp_only, out) = match strategy {
            Strategy::A => {
                let both = p[v] * if p[v] > 0.0 { q[v] / p[v] } else { 0.0 };
                let sp_only = p[v] - both;
                (both, sp_only, 1.0 - p[v])
            }
            Strategy::B => {
                let both = q[v];
                let pv_star = if q[v] >= 1.0 {
                    1.0
                } else {
                    (p[v] - q[v]) / (1.0 - q[v])
                };
                let sp_only = (1.0 - q[v]) * pv_star;
                (both, sp_only, (1.0 - q[v]) * (1.0 - pv_star))
            }
        };
        cases.push((both, sp_only, out));
    }
    let mut probs = HashMap::new();
    for sp_mask in 0u32..(1 << n) {
        // Enumerate submasks of sp_mask, including 0.
        let mut s_mask = sp_mask;
        loop {
            let mut pr = 1.0;
            for (v, &(both, sp_only, out)) in cases.iter().enumerate() {
                let bit = 1u32 << v;
                pr *= if s_mask & bit != 0 {
                    both
                } else if sp_mask & bit != 0 {
                    sp_only
                } else {
                    out
                };
            }
            if pr != 0.0 {
                probs.insert((s_mask, sp_mask), pr);
            }
            if s_mask == 0 {
                break;
            }
            s_mask = (s_mask - 1) & sp_mask;
        }
    }
    Ok(PairDistribution { n, probs })
}

/// Sidecar metadata stored next to a serialized core-set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoresetMetadata {
    pub retention: Vec<(usize, f64)>,
    pub delta: f64,
    pub epsilon: f64,
    pub rng_seed: u64,
    pub edge_sampled: bool,
}

/// Writes a core-set as an edge-list file plus a `<path>.meta.json` sidecar
/// recording p_i, Delta, eps and the seed.
pub fn write_coreset(h: &CoresetGraph, path: &Path) -> Result<(), SamplingError> {
    let g = coreset_as_graph(h)?;
    crate::graph::write_edge_list(&crate::graph::AnyGraph::Plain(g), path)?;
    let meta = CoresetMetadata {
        retention: h.vertices.clone(),
        delta: h.provenance.delta,
        epsilon: h.provenance.epsilon,
        rng_seed: h.provenance.rng_seed,
        edge_sampled: h.provenance.edge_sampled,
    };
    let meta_path = sidecar_path(path);
    std::fs::write(meta_path, serde_json::to_string_pretty(&meta).unwrap())?;
    Ok(())
}

pub fn read_coreset(path: &Path) -> Result<CoresetGraph, SamplingError> {
    let g = match crate::graph::read_edge_list(path)? {
        crate::graph::AnyGraph::Plain(g) => g,
        _ => return Err(SamplingError::Metadata("expected a plain graph".into())),
    };
    let meta_path = sidecar_path(path);
    let meta: CoresetMetadata = serde_json::from_str(&std::fs::read_to_string(meta_path)?)
        .map_err(|e| SamplingError::Metadata(e.to_string()))?;
    if meta.retention.len() != g.n() {
        return Err(SamplingError::Metadata(format!(
            "metadata lists {} vertices, edge list has {}",
            meta.retention.len(),
            g.n()
        )));
    }
    Ok(CoresetGraph {
        vertices: meta.retention,
        edges: g.edges().to_vec(),
        provenance: CoresetProvenance {
            source_n: 0,
            delta: meta.delta,
            epsilon: meta.epsilon,
            rng_seed: meta.rng_seed,
            edge_sampled: meta.edge_sampled,
        },
    })
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".meta.json");
    std::path::PathBuf::from(os)
}

/// Positions-indexed view of a core-set as a plain weighted graph.
pub fn coreset_as_graph(h: &CoresetGraph) -> Result<Graph, SamplingError> {
    Ok(Graph::new(h.vertices.len(), h.edges.clone())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gen_random_graph;

    #[test]
    fn score_clamps_at_one() {
        let params = ImportanceParams::maxcut(16, 4.0, 0.5, 1.0);
        // alpha = 0.0625 / ln 16
        assert!((params.alpha_eps - 0.0625 / 16.0f64.ln()).abs() < 1e-12);
        // d = 0 -> floor eps*Delta = 2; 2 / (16 * alpha) > 1 -> clamped.
        assert_eq!(importance_score(0.0, &params), 1.0);
        // Any d >= Delta^2 alpha also clamps.
        let thr = params.delta * params.delta * params.alpha_eps;
        assert_eq!(importance_score(thr, &params), 1.0);
        assert_eq!(importance_score(thr * 3.0, &params), 1.0);
    }

    #[test]
    fn score_matches_direct_formula() {
        let params = ImportanceParams::maxcut(1_000_000, 1000.0, 0.2, 1.0);
        let d: f64 = 100.0;
        let expect = ((d.max(0.2 * 1000.0)) / (1000.0 * 1000.0 * params.alpha_eps)).min(1.0);
        assert_eq!(importance_score(d, &params), expect);
    }

    #[test]
    fn score_monotone_in_degree() {
        let params = ImportanceParams::maxcut(256, 16.0, 0.3, 1.0);
        let mut prev = 0.0;
        for d in 0..200 {
            let h = importance_score(d as f64, &params);
            assert!(h >= prev && h <= 1.0);
            prev = h;
        }
    }

    #[test]
    fn cc_floor_switch() {
        let mut params = ImportanceParams::cc(256, 16.0, 0.3, 1.0);
        let base = importance_score(0.0, &params);
        params.cc_floor_k = Some(4);
        let with_k = importance_score(0.0, &params);
        assert!(with_k <= base);
    }

    #[test]
    fn all_ones_keeps_everything() {
        let g = gen_random_graph(32, 0.7, 1).unwrap();
        let h = vertex_sample_unchecked(&g, &vec![1.0; g.n()], 9);
        assert_eq!(h.len(), g.n());
        let dd = g.avg_degree() * g.avg_degree();
        for &(_, _, w) in &h.edges {
            assert!((w - 1.0 / dd).abs() < 1e-12);
        }
        assert_eq!(h.edges.len(), g.num_edges());
    }

    #[test]
    fn band_validation_rejects() {
        let g = gen_random_graph(16, 0.9, 2).unwrap();
        let params = ImportanceParams::maxcut(g.n(), g.avg_degree(), 0.5, 1.0);
        let err = vertex_sample(&g, &params, &vec![0.0001; g.n()], 0);
        assert!(matches!(err, Err(SamplingError::ProbabilityOutOfBand { .. })));
    }

    #[test]
    fn expected_sample_size_and_weight() {
        // E[|S'|] = sum p_i and E[W] = m / Delta^2 on a fixed graph.
        let g = gen_random_graph(50, 0.6, 11).unwrap();
        let p = vec![0.3; g.n()];
        let trials = 10_000;
        let mut size_sum = 0.0;
        let mut w_sum = 0.0;
        for t in 0..trials {
            let h = vertex_sample_unchecked(&g, &p, t);
            size_sum += h.len() as f64;
            w_sum += h.total_weight();
        }
        let mean_size = size_sum / trials as f64;
        let expect_size: f64 = p.iter().sum();
        // Binomial sd per trial ~ sqrt(n p (1-p)); 3 sigma of the mean.
        let sd = (g.n() as f64 * 0.3 * 0.7).sqrt() / (trials as f64).sqrt();
        assert!(
            (mean_size - expect_size).abs() <= 3.0 * sd,
            "mean size {mean_size} vs {expect_size}"
        );

        let dd = g.avg_degree() * g.avg_degree();
        let expect_w = g.num_edges() as f64 / dd;
        // Per-trial variance of W: sum over edges of w^2 p^2(1-p^2) plus
        // cross terms; bound loosely by direct empirical sd instead.
        let mut var = 0.0;
        for t in 0..trials {
            let h = vertex_sample_unchecked(&g, &p, t);
            var += (h.total_weight() - w_sum / trials as f64).powi(2);
        }
        let emp_sd = (var / trials as f64).sqrt() / (trials as f64).sqrt();
        let mean_w = w_sum / trials as f64;
        assert!(
            (mean_w - expect_w).abs() <= 3.0 * emp_sd.max(1e-6),
            "mean W {mean_w} vs {expect_w} (3sd = {})",
            3.0 * emp_sd
        );
    }

    #[test]
    fn edge_sample_keep_all_when_eps_small() {
        let g = gen_random_graph(20, 0.8, 3).unwrap();
        let h = vertex_sample_unchecked(&g, &vec![1.0; g.n()], 0);
        let w_total = h.total_weight();
        let min_w = h.edges.iter().map(|e| e.2).fold(f64::INFINITY, f64::min);
        // eps^2 <= 8 * min rescaled weight makes every keep probability 1.
        let eps = (8.0 * min_w * h.len() as f64 / w_total).sqrt() * 0.99;
        let out = edge_sample(&h, eps, 5).unwrap();
        assert_eq!(out.edges, h.edges);
    }

    #[test]
    fn edge_sample_single_edge_kept() {
        let h = CoresetGraph {
            vertices: vec![(0, 1.0), (1, 1.0)],
            edges: vec![(0, 1, 0.5)],
            provenance: CoresetProvenance::default(),
        };
        for seed in 0..20 {
            let out = edge_sample(&h, 0.3, seed).unwrap();
            assert_eq!(out.edges.len(), 1);
            assert!((out.edges[0].2 - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn edge_sample_preserves_expected_weight() {
        let g = gen_random_graph(40, 0.9, 7).unwrap();
        let h = vertex_sample_unchecked(&g, &vec![0.9; g.n()], 1);
        let w0 = h.total_weight();
        let trials = 10_000;
        let mut ws = Vec::with_capacity(trials);
        for t in 0..trials {
            ws.push(edge_sample(&h, 0.05, t as u64).unwrap().total_weight());
        }
        let mean: f64 = ws.iter().sum::<f64>() / trials as f64;
        let var: f64 = ws.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / trials as f64;
        let sd_of_mean = var.sqrt() / (trials as f64).sqrt();
        assert!(
            (mean - w0).abs() <= 3.0 * sd_of_mean.max(1e-9),
            "mean {mean} vs {w0}"
        );
    }

    #[test]
    fn p_star_values() {
        // Hand evaluation: (0.5 - 0.25) / (1 - 0.25) = 1/3; the B-side
        // marginal q + (1-q) p* then equals p exactly.
        assert!((p_star(0.5, 0.25).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(p_star(0.7, 0.7).unwrap(), 0.0);
        assert_eq!(p_star(1.0, 0.3).unwrap(), 1.0);
        assert_eq!(p_star(1.0, 1.0).unwrap(), 1.0);
        assert!(p_star(0.4, 0.5).is_err());
    }

    #[test]
    fn p_star_preserves_marginal() {
        for &(p, q) in &[(0.5, 0.25), (0.9, 0.1), (0.3, 0.29), (1.0, 0.4)] {
            let ps = p_star(p, q).unwrap();
            assert!((q + (1.0 - q) * ps - p).abs() < 1e-12);
        }
    }

    #[test]
    fn double_sample_degenerate_cases() {
        let p = vec![0.6, 0.8, 1.0, 0.4];
        // q = p: S = S'.
        for seed in 0..50 {
            let pair = double_sample(Strategy::A, &p, &p, seed).unwrap();
            assert_eq!(pair.s, pair.s_prime);
            let pair = double_sample(Strategy::B, &p, &p, seed).unwrap();
            assert_eq!(pair.s, pair.s_prime);
        }
        // q = 0: S empty.
        let q0 = vec![0.0; 4];
        for seed in 0..50 {
            let a = double_sample(Strategy::A, &p, &q0, seed).unwrap();
            assert!(a.s.is_empty());
            let b = double_sample(Strategy::B, &p, &q0, seed).unwrap();
            assert!(b.s.is_empty());
        }
    }

    #[test]
    fn nested_invariant() {
        let p = vec![0.9, 0.5, 0.7, 1.0, 0.2];
        let q = vec![0.3, 0.5, 0.1, 0.4, 0.0];
        for seed in 0..100 {
            for strat in [Strategy::A, Strategy::B] {
                let pair = double_sample(strat, &p, &q, seed).unwrap();
                for v in &pair.s {
                    assert!(pair.s_prime.contains(v));
                }
            }
        }
    }

    #[test]
    fn single_vertex_table_hand_values() {
        // Strategy A with p = 0.5, q = 0.25: out with prob 1-p, in S' only
        // with prob p - q, in both with prob q.
        let p = [0.5];
        let q = [0.25];
        let table = pair_distribution_exact(Strategy::A, &p, &q).unwrap();
        assert!((table.prob(0, 0) - 0.5).abs() < 1e-15);
        assert!((table.prob(0, 1) - 0.25).abs() < 1e-15);
        assert!((table.prob(1, 1) - 0.25).abs() < 1e-15);
        let table_b = pair_distribution_exact(Strategy::B, &p, &q).unwrap();
        assert!(table.max_diff(&table_b) < 1e-15);
    }

    #[test]
    fn tables_sum_to_one() {
        let p = [0.9, 0.3, 0.55, 1.0, 0.25, 0.66];
        let q = [0.1, 0.3, 0.5, 0.7, 0.0, 0.33];
        for strat in [Strategy::A, Strategy::B] {
            let t = pair_distribution_exact(strat, &p, &q).unwrap();
            assert!((t.total() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn strategies_identical_n6() {
        let p = [0.9, 0.3, 0.55, 1.0, 0.25, 0.66];
        let q = [0.1, 0.3, 0.5, 0.7, 0.0, 0.33];
        let a = pair_distribution_exact(Strategy::A, &p, &q).unwrap();
        let b = pair_distribution_exact(Strategy::B, &p, &q).unwrap();
        assert!(a.max_diff(&b) < 1e-12);
    }

    #[test]
    fn coreset_io_roundtrip() {
        let g = gen_random_graph(24, 0.8, 13).unwrap();
        let h = vertex_sample_unchecked(&g, &vec![0.8; g.n()], 21);
        let dir = std::env::temp_dir().join(format!("coreset-sidecar-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("h.txt");
        write_coreset(&h, &path).unwrap();
        let back = read_coreset(&path).unwrap();
        assert_eq!(back.vertices, h.vertices);
        assert_eq!(back.edges.len(), h.edges.len());
        for (a, b) in back.edges.iter().zip(&h.edges) {
            assert_eq!((a.0, a.1), (b.0, b.1));
            assert!((a.2 - b.2).abs() < 1e-9);
        }
    }
}
