//! Graph and stream representations, generators, and edge-list file I/O.
//!
//! Vertices are dense integer ids `0..n-1` and `n` is declared up front.
//! All graphs are immutable after construction and safe to share across
//! threads; generators are single-threaded per call with an explicit seed.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used when validating cached weighted-degree sums.
pub const DEGREE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("vertex id {id} out of range (n = {n})")]
    VertexOutOfRange { id: usize, n: usize },
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate undirected edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("negative edge weight {w} on ({u}, {v})")]
    NegativeWeight { u: usize, v: usize, w: f64 },
    #[error("signed edge ({u}, {v}) has both c+ = {cp} and c- = {cm} nonzero")]
    BothSigns { u: usize, v: usize, cp: f64, cm: f64 },
    #[error("signed edge ({u}, {v}) weight outside [0, 1]: c+ = {cp}, c- = {cm}")]
    SignedWeightRange { u: usize, v: usize, cp: f64, cm: f64 },
    #[error("parameter out of range: {0}")]
    BadParameter(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("delete of edge ({0}, {1}) that is not currently present")]
    UnmatchedDelete(usize, usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Undirected graph with nonnegative edge weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    degrees: Vec<f64>,
}

impl Graph {
    /// Builds a graph from an edge list, validating ids, loops and duplicates.
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self, GraphError> {
        let mut seen = HashSet::with_capacity(edges.len());
        let mut degrees = vec![0.0; n];
        let mut canon = Vec::with_capacity(edges.len());
        for (u, v, w) in edges {
            if u >= n {
                return Err(GraphError::VertexOutOfRange { id: u, n });
            }
            if v >= n {
                return Err(GraphError::VertexOutOfRange { id: v, n });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if w < 0.0 || !w.is_finite() {
                return Err(GraphError::NegativeWeight { u, v, w });
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(GraphError::DuplicateEdge(key.0, key.1));
            }
            degrees[u] += w;
            degrees[v] += w;
            canon.push((key.0, key.1, w));
        }
        Ok(Graph {
            n,
            edges: canon,
            degrees,
        })
    }

    /// Builds an unweighted graph (all weights 1) from vertex pairs.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self, GraphError> {
        Self::new(n, pairs.iter().map(|&(u, v)| (u, v, 1.0)).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Weighted degree d_i.
    pub fn degree(&self, i: usize) -> f64 {
        self.degrees[i]
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// Average degree: (sum of degrees) / n, each edge counted from both ends.
    pub fn avg_degree(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.degrees.iter().sum::<f64>() / self.n as f64
    }

    /// Total edge weight (each edge counted once).
    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2).sum()
    }

    /// Recomputes degrees from the edge list and checks the cache.
    pub fn validate_degrees(&self) -> bool {
        let mut fresh = vec![0.0; self.n];
        for &(u, v, w) in &self.edges {
            fresh[u] += w;
            fresh[v] += w;
        }
        fresh
            .iter()
            .zip(&self.degrees)
            .all(|(a, b)| (a - b).abs() <= DEGREE_TOL)
    }

    /// Adjacency lists as (neighbor, weight), in edge-list order.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v, w) in &self.edges {
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        adj
    }
}

/// Signed graph for max-agreement correlation clustering.
///
/// Each edge carries weights `c_plus` and `c_minus`, at most one of them
/// nonzero, both in [0, 1]. The derived signed weight is
/// `eta = c_plus - c_minus` and the degree of a vertex is the sum of |eta|
/// over incident edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedGraph {
    n: usize,
    edges: Vec<(usize, usize, f64, f64)>,
    degrees: Vec<f64>,
    c_plus_total: f64,
    c_minus_total: f64,
}

impl SignedGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize, f64, f64)>) -> Result<Self, GraphError> {
        let mut seen = HashSet::with_capacity(edges.len());
        let mut degrees = vec![0.0; n];
        let mut canon = Vec::with_capacity(edges.len());
        let (mut cp_total, mut cm_total) = (0.0, 0.0);
        for (u, v, cp, cm) in edges {
            if u >= n {
                return Err(GraphError::VertexOutOfRange { id: u, n });
            }
            if v >= n {
                return Err(GraphError::VertexOutOfRange { id: v, n });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if cp > 0.0 && cm > 0.0 {
                return Err(GraphError::BothSigns { u, v, cp, cm });
            }
            if !(0.0..=1.0).contains(&cp) || !(0.0..=1.0).contains(&cm) {
                return Err(GraphError::SignedWeightRange { u, v, cp, cm });
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(GraphError::DuplicateEdge(key.0, key.1));
            }
            let eta = cp - cm;
            degrees[u] += eta.abs();
            degrees[v] += eta.abs();
            cp_total += cp;
            cm_total += cm;
            canon.push((key.0, key.1, cp, cm));
        }
        Ok(SignedGraph {
            n,
            edges: canon,
            degrees,
            c_plus_total: cp_total,
            c_minus_total: cm_total,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges as (u, v, c_plus, c_minus).
    pub fn edges(&self) -> &[(usize, usize, f64, f64)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// eta weights per edge: c_plus - c_minus.
    pub fn eta_edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.edges.iter().map(|&(u, v, cp, cm)| (u, v, cp - cm))
    }

    /// CC degree: sum of |eta| over incident edges.
    pub fn degree(&self, i: usize) -> f64 {
        self.degrees[i]
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn avg_degree(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.degrees.iter().sum::<f64>() / self.n as f64
    }

    /// Sum of c_plus over edges.
    pub fn c_plus_total(&self) -> f64 {
        self.c_plus_total
    }

    /// Sum of c_minus over edges.
    pub fn c_minus_total(&self) -> f64 {
        self.c_minus_total
    }
}

/// One turnstile stream update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreamEvent {
    pub op: StreamOp,
    pub u: usize,
    pub v: usize,
    pub payload: EdgePayload,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StreamOp {
    Insert,
    Delete,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EdgePayload {
    Weight(f64),
    Signed(f64, f64),
}

impl EdgePayload {
    /// Magnitude contributed to each endpoint's degree.
    pub fn magnitude(&self) -> f64 {
        match *self {
            EdgePayload::Weight(w) => w,
            EdgePayload::Signed(cp, cm) => (cp - cm).abs(),
        }
    }
}

/// Replay order produced by [`to_stream`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamOrder {
    Sorted,
    Shuffled,
    /// Shuffled inserts plus extra phantom edges that are inserted and later
    /// deleted, exercising the turnstile path.
    InsertDeleteMix,
}

/// Generates an Erdős–Rényi graph whose expected average degree is
/// `n^delta_exp`. Deterministic given the seed.
pub fn gen_random_graph(n: usize, delta_exp: f64, rng_seed: u64) -> Result<Graph, GraphError> {
    if n < 2 {
        return Err(GraphError::BadParameter(format!("n = {n} < 2")));
    }
    if !(delta_exp > 0.0 && delta_exp <= 1.0) {
        return Err(GraphError::BadParameter(format!(
            "delta_exp = {delta_exp} outside (0, 1]"
        )));
    }
    let p = (n as f64).powf(delta_exp) / (n as f64 - 1.0);
    let p = p.min(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut edges = Vec::new();
    if p >= 1.0 {
        for u in 0..n {
            for v in (u + 1)..n {
                edges.push((u, v, 1.0));
            }
        }
        return Graph::new(n, edges);
    }
    // Geometric skipping over the C(n,2) pair enumeration.
    let q = 1.0 - p;
    let total = n * (n - 1) / 2;
    let mut idx = 0usize;
    loop {
        let u01: f64 = rng.gen::<f64>();
        let skip = (u01.max(f64::MIN_POSITIVE).ln() / q.ln()).floor() as usize;
        idx = match idx.checked_add(skip) {
            Some(x) => x,
            None => break,
        };
        if idx >= total {
            break;
        }
        let (u, v) = pair_from_index(n, idx);
        edges.push((u, v, 1.0));
        idx += 1;
    }
    Graph::new(n, edges)
}

/// Maps a linear index over the upper-triangular pair enumeration
/// (0,1), (0,2), ..., (0,n-1), (1,2), ... to the pair itself.
fn pair_from_index(n: usize, mut idx: usize) -> (usize, usize) {
    let mut u = 0usize;
    let mut row = n - 1;
    while idx >= row {
        idx -= row;
        u += 1;
        row -= 1;
    }
    (u, u + 1 + idx)
}

/// Generates a complete signed graph with a planted k-partition.
///
/// Intra-cluster edges get c_plus = 1 and inter-cluster edges c_minus = 1;
/// each edge's sign is flipped with probability `noise`. The planted cluster
/// of vertex i is `i % k`.
pub fn gen_planted_cc(
    n: usize,
    k: usize,
    noise: f64,
    rng_seed: u64,
) -> Result<SignedGraph, GraphError> {
    if k < 1 || k > n {
        return Err(GraphError::BadParameter(format!(
            "k = {k} outside [1, n = {n}]"
        )));
    }
    if !(0.0..=1.0).contains(&noise) {
        return Err(GraphError::BadParameter(format!(
            "noise = {noise} outside [0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for u in 0..n {
        for v in (u + 1)..n {
            let same = u % k == v % k;
            let flip = rng.gen::<f64>() < noise;
            if same != flip {
                edges.push((u, v, 1.0, 0.0));
            } else {
                edges.push((u, v, 0.0, 1.0));
            }
        }
    }
    SignedGraph::new(n, edges)
}

/// Turns a graph into a stream of events; replaying the stream reconstructs
/// the graph exactly. The insert/delete mix adds phantom edges (absent from
/// the graph) that are inserted and always deleted again later.
pub fn to_stream(g: &Graph, order: StreamOrder, rng_seed: u64) -> Vec<StreamEvent> {
    let base: Vec<StreamEvent> = g
        .edges()
        .iter()
        .map(|&(u, v, w)| StreamEvent {
            op: StreamOp::Insert,
            u,
            v,
            payload: EdgePayload::Weight(w),
        })
        .collect();
    stream_with_order(base, g.n(), |u, v| {
        g.edges()
            .iter()
            .any(|&(a, b, _)| (a, b) == (u.min(v), u.max(v)))
    }, |_u, _v| EdgePayload::Weight(1.0), order, rng_seed)
}

/// Signed-graph variant of [`to_stream`].
pub fn to_stream_signed(g: &SignedGraph, order: StreamOrder, rng_seed: u64) -> Vec<StreamEvent> {
    let base: Vec<StreamEvent> = g
        .edges()
        .iter()
        .map(|&(u, v, cp, cm)| StreamEvent {
            op: StreamOp::Insert,
            u,
            v,
            payload: EdgePayload::Signed(cp, cm),
        })
        .collect();
    stream_with_order(base, g.n(), |u, v| {
        g.edges()
            .iter()
            .any(|&(a, b, _, _)| (a, b) == (u.min(v), u.max(v)))
    }, |_u, _v| EdgePayload::Signed(1.0, 0.0), order, rng_seed)
}

fn stream_with_order(
    mut events: Vec<StreamEvent>,
    n: usize,
    edge_exists: impl Fn(usize, usize) -> bool,
    phantom_payload: impl Fn(usize, usize) -> EdgePayload,
    order: StreamOrder,
    rng_seed: u64,
) -> Vec<StreamEvent> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    match order {
        StreamOrder::Sorted => {
            events.sort_by_key(|e| (e.u, e.v));
            events
        }
        StreamOrder::Shuffled => {
            events.shuffle(&mut rng);
            events
        }
        StreamOrder::InsertDeleteMix => {
            let m = events.len();
            let extra = (m / 4).max(1);
            let mut phantoms = Vec::new();
            let mut tries = 0;
            if n >= 2 {
                while phantoms.len() < extra && tries < 50 * extra {
                    tries += 1;
                    let u = rng.gen_range(0..n);
                    let v = rng.gen_range(0..n);
                    if u == v {
                        continue;
                    }
                    let (u, v) = (u.min(v), u.max(v));
                    if edge_exists(u, v) || phantoms.iter().any(|&(a, b)| (a, b) == (u, v)) {
                        continue;
                    }
                    phantoms.push((u, v));
                }
            }
            for &(u, v) in &phantoms {
                events.push(StreamEvent {
                    op: StreamOp::Insert,
                    u,
                    v,
                    payload: phantom_payload(u, v),
                });
            }
            events.shuffle(&mut rng);
            // Splice each phantom's delete in at a position after its insert.
            for &(u, v) in &phantoms {
                let ins_pos = events
                    .iter()
                    .position(|e| e.op == StreamOp::Insert && (e.u, e.v) == (u, v))
                    .expect("phantom insert present");
                let del = StreamEvent {
                    op: StreamOp::Delete,
                    u,
                    v,
                    payload: phantom_payload(u, v),
                };
                let pos = rng.gen_range(ins_pos + 1..=events.len());
                events.insert(pos, del);
            }
            events
        }
    }
}

/// Replays a stream of plain-weight events into a graph.
pub fn replay_stream(n: usize, events: &[StreamEvent]) -> Result<Graph, GraphError> {
    let mut live: Vec<(usize, usize, f64)> = Vec::new();
    for ev in events {
        let (u, v) = (ev.u.min(ev.v), ev.u.max(ev.v));
        let w = match ev.payload {
            EdgePayload::Weight(w) => w,
            EdgePayload::Signed(..) => {
                return Err(GraphError::BadParameter(
                    "signed payload in plain stream".into(),
                ))
            }
        };
        match ev.op {
            StreamOp::Insert => live.push((u, v, w)),
            StreamOp::Delete => {
                let pos = live
                    .iter()
                    .position(|&(a, b, x)| (a, b) == (u, v) && (x - w).abs() <= DEGREE_TOL)
                    .ok_or(GraphError::UnmatchedDelete(u, v))?;
                live.remove(pos);
            }
        }
    }
    live.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    Graph::new(n, live)
}

/// Replays a stream of signed events into a signed graph.
pub fn replay_stream_signed(n: usize, events: &[StreamEvent]) -> Result<SignedGraph, GraphError> {
    let mut live: Vec<(usize, usize, f64, f64)> = Vec::new();
    for ev in events {
        let (u, v) = (ev.u.min(ev.v), ev.u.max(ev.v));
        let (cp, cm) = match ev.payload {
            EdgePayload::Signed(cp, cm) => (cp, cm),
            EdgePayload::Weight(_) => {
                return Err(GraphError::BadParameter(
                    "plain payload in signed stream".into(),
                ))
            }
        };
        match ev.op {
            StreamOp::Insert => live.push((u, v, cp, cm)),
            StreamOp::Delete => {
                let pos = live
                    .iter()
                    .position(|&(a, b, p, m)| {
                        (a, b) == (u, v)
                            && (p - cp).abs() <= DEGREE_TOL
                            && (m - cm).abs() <= DEGREE_TOL
                    })
                    .ok_or(GraphError::UnmatchedDelete(u, v))?;
                live.remove(pos);
            }
        }
    }
    live.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    SignedGraph::new(n, live)
}

/// Either flavour of graph, as read back from disk.
#[derive(Debug, Clone)]
pub enum AnyGraph {
    Plain(Graph),
    Signed(SignedGraph),
}

/// Writes the edge-list text format: a header line `graph <n>` or
/// `signed <n>`, then one `u v w` or `u v c+ c-` line per edge.
pub fn write_edge_list(g: &AnyGraph, path: &Path) -> Result<(), GraphError> {
    let mut out = String::new();
    match g {
        AnyGraph::Plain(g) => {
            writeln_fmt(&mut out, format_args!("graph {}", g.n()));
            for &(u, v, w) in g.edges() {
                writeln_fmt(&mut out, format_args!("{u} {v} {w}"));
            }
        }
        AnyGraph::Signed(g) => {
            writeln_fmt(&mut out, format_args!("signed {}", g.n()));
            for &(u, v, cp, cm) in g.edges() {
                writeln_fmt(&mut out, format_args!("{u} {v} {cp} {cm}"));
            }
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn writeln_fmt(out: &mut String, args: std::fmt::Arguments<'_>) {
    out.write_fmt(args).expect("string write");
    out.push('\n');
}

/// Reads the edge-list text format; reports malformed lines with their
/// 1-based line number.
pub fn read_edge_list(path: &Path) -> Result<AnyGraph, GraphError> {
    let text = std::fs::read_to_string(path)?;
    parse_edge_list(&text)
}

pub fn parse_edge_list(text: &str) -> Result<AnyGraph, GraphError> {
    let mut lines = text.lines().enumerate();
    let (hline, header) = loop {
        match lines.next() {
            Some((i, l)) if !l.trim().is_empty() => break (i + 1, l.trim()),
            Some(_) => continue,
            None => {
                return Err(GraphError::Parse {
                    line: 1,
                    msg: "empty file".into(),
                })
            }
        }
    };
    let mut parts = header.split_whitespace();
    let kind = parts.next().unwrap_or_default();
    let n: usize = parts
        .next()
        .ok_or(GraphError::Parse {
            line: hline,
            msg: "missing vertex count in header".into(),
        })?
        .parse()
        .map_err(|e| GraphError::Parse {
            line: hline,
            msg: format!("bad vertex count: {e}"),
        })?;
    match kind {
        "graph" => {
            let mut edges = Vec::new();
            for (i, line) in lines {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() != 3 {
                    return Err(GraphError::Parse {
                        line: i + 1,
                        msg: format!("expected 'u v w', got {} tokens", toks.len()),
                    });
                }
                edges.push((
                    parse_tok(toks[0], i + 1)?,
                    parse_tok(toks[1], i + 1)?,
                    parse_tok_f(toks[2], i + 1)?,
                ));
            }
            Graph::new(n, edges).map(AnyGraph::Plain)
        }
        "signed" => {
            let mut edges = Vec::new();
            for (i, line) in lines {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() != 4 {
                    return Err(GraphError::Parse {
                        line: i + 1,
                        msg: format!("expected 'u v c+ c-', got {} tokens", toks.len()),
                    });
                }
                edges.push((
                    parse_tok(toks[0], i + 1)?,
                    parse_tok(toks[1], i + 1)?,
                    parse_tok_f(toks[2], i + 1)?,
                    parse_tok_f(toks[3], i + 1)?,
                ));
            }
            SignedGraph::new(n, edges).map(AnyGraph::Signed)
        }
        other => Err(GraphError::Parse {
            line: hline,
            msg: format!("unknown header kind '{other}'"),
        }),
    }
}

fn parse_tok(tok: &str, line: usize) -> Result<usize, GraphError> {
    tok.parse().map_err(|e| GraphError::Parse {
        line,
        msg: format!("bad vertex id '{tok}': {e}"),
    })
}

fn parse_tok_f(tok: &str, line: usize) -> Result<f64, GraphError> {
    tok.parse().map_err(|e| GraphError::Parse {
        line,
        msg: format!("bad weight '{tok}': {e}"),
    })
}

/// Writes a stream file: one `I u v w` / `D u v w` line per event
/// (5 tokens with both channel weights for signed payloads).
pub fn write_stream(events: &[StreamEvent], n: usize, path: &Path) -> Result<(), GraphError> {
    let mut out = String::new();
    writeln_fmt(&mut out, format_args!("stream {n}"));
    for ev in events {
        let op = match ev.op {
            StreamOp::Insert => 'I',
            StreamOp::Delete => 'D',
        };
        match ev.payload {
            EdgePayload::Weight(w) => {
                writeln_fmt(&mut out, format_args!("{op} {} {} {w}", ev.u, ev.v))
            }
            EdgePayload::Signed(cp, cm) => {
                writeln_fmt(&mut out, format_args!("{op} {} {} {cp} {cm}", ev.u, ev.v))
            }
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Reads a stream file written by [`write_stream`]. Returns (n, events).
pub fn read_stream(path: &Path) -> Result<(usize, Vec<StreamEvent>), GraphError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (hline, header) = lines.next().ok_or(GraphError::Parse {
        line: 1,
        msg: "empty file".into(),
    })?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some("stream") {
        return Err(GraphError::Parse {
            line: hline + 1,
            msg: "expected 'stream <n>' header".into(),
        });
    }
    let n: usize = parts
        .next()
        .ok_or(GraphError::Parse {
            line: hline + 1,
            msg: "missing vertex count".into(),
        })?
        .parse()
        .map_err(|e| GraphError::Parse {
            line: hline + 1,
            msg: format!("bad vertex count: {e}"),
        })?;
    let mut events = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let op = match toks[0] {
            "I" => StreamOp::Insert,
            "D" => StreamOp::Delete,
            other => {
                return Err(GraphError::Parse {
                    line: i + 1,
                    msg: format!("unknown op '{other}'"),
                })
            }
        };
        let payload = match toks.len() {
            4 => EdgePayload::Weight(parse_tok_f(toks[3], i + 1)?),
            5 => EdgePayload::Signed(parse_tok_f(toks[3], i + 1)?, parse_tok_f(toks[4], i + 1)?),
            k => {
                return Err(GraphError::Parse {
                    line: i + 1,
                    msg: format!("expected 4 or 5 tokens, got {k}"),
                })
            }
        };
        events.push(StreamEvent {
            op,
            u: parse_tok(toks[1], i + 1)?,
            v: parse_tok(toks[2], i + 1)?,
            payload,
        });
    }
    Ok((n, events))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k3() -> Graph {
        Graph::from_pairs(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn triangle_avg_degree_is_two() {
        assert_eq!(k3().avg_degree(), 2.0);
    }

    #[test]
    fn path_avg_degree() {
        let p3 = Graph::from_pairs(3, &[(0, 1), (1, 2)]).unwrap();
        assert!((p3.avg_degree() - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn signed_single_edge_avg_degree() {
        let g = SignedGraph::new(2, vec![(0, 1, 1.0, 0.0)]).unwrap();
        assert_eq!(g.avg_degree(), 1.0);
        assert_eq!(g.c_plus_total(), 1.0);
        assert_eq!(g.c_minus_total(), 0.0);
    }

    #[test]
    fn cached_degrees_match_recomputation() {
        let g = gen_random_graph(64, 0.7, 11).unwrap();
        assert!(g.validate_degrees());
    }

    #[test]
    fn rejects_self_loop_and_duplicates() {
        assert!(matches!(
            Graph::from_pairs(2, &[(0, 0)]),
            Err(GraphError::SelfLoop(0))
        ));
        assert!(matches!(
            Graph::from_pairs(3, &[(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge(0, 1))
        ));
    }

    #[test]
    fn rejects_both_signs() {
        assert!(matches!(
            SignedGraph::new(2, vec![(0, 1, 1.0, 0.5)]),
            Err(GraphError::BothSigns { .. })
        ));
    }

    #[test]
    fn n2_generator_gives_single_edge() {
        let g = gen_random_graph(2, 1.0, 7).unwrap();
        assert_eq!(g.num_edges(), 1);
        assert_eq!(g.avg_degree(), 1.0);
    }

    #[test]
    fn generator_deterministic() {
        let a = gen_random_graph(128, 0.5, 42).unwrap();
        let b = gen_random_graph(128, 0.5, 42).unwrap();
        assert_eq!(a.edges(), b.edges());
    }

    #[test]
    fn generator_degree_concentration() {
        // Monte-Carlo mean of generated average degrees: n = 4096, delta 0.5.
        let mut within = 0;
        for seed in 0..20 {
            let g = gen_random_graph(4096, 0.5, seed).unwrap();
            let d = g.avg_degree();
            if (d - 64.0).abs() <= 6.4 {
                within += 1;
            }
        }
        assert!(within >= 19, "only {within}/20 seeds within 10% of 64");
    }

    #[test]
    fn planted_cc_noise_zero_all_plus() {
        let g = gen_planted_cc(5, 1, 0.0, 3).unwrap();
        assert_eq!(g.num_edges(), 10);
        assert!(g.edges().iter().all(|&(_, _, cp, cm)| cp == 1.0 && cm == 0.0));
    }

    #[test]
    fn planted_cc_k_equals_n_all_minus() {
        let g = gen_planted_cc(5, 5, 0.0, 3).unwrap();
        assert!(g.edges().iter().all(|&(_, _, cp, cm)| cp == 0.0 && cm == 1.0));
    }

    #[test]
    fn empty_graph_empty_stream() {
        let g = Graph::new(4, vec![]).unwrap();
        assert!(to_stream(&g, StreamOrder::Sorted, 0).is_empty());
    }

    #[test]
    fn k3_sorted_stream_is_three_inserts() {
        let ev = to_stream(&k3(), StreamOrder::Sorted, 0);
        assert_eq!(ev.len(), 3);
        assert!(ev.iter().all(|e| e.op == StreamOp::Insert));
    }

    #[test]
    fn stream_replay_reconstructs() {
        let g = gen_random_graph(64, 0.6, 5).unwrap();
        for order in [
            StreamOrder::Sorted,
            StreamOrder::Shuffled,
            StreamOrder::InsertDeleteMix,
        ] {
            let ev = to_stream(&g, order, 99);
            let back = replay_stream(g.n(), &ev).unwrap();
            assert_eq!(back.edges(), g.edges(), "order {order:?}");
        }
    }

    #[test]
    fn signed_stream_replay_reconstructs() {
        let g = gen_planted_cc(12, 3, 0.2, 8).unwrap();
        let ev = to_stream_signed(&g, StreamOrder::InsertDeleteMix, 17);
        let back = replay_stream_signed(g.n(), &ev).unwrap();
        assert_eq!(back.edges(), g.edges());
    }

    #[test]
    fn edge_list_roundtrip() {
        let dir = std::env::temp_dir().join(format!("coreset-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("k3.txt");
        write_edge_list(&AnyGraph::Plain(k3()), &path).unwrap();
        match read_edge_list(&path).unwrap() {
            AnyGraph::Plain(g) => assert_eq!(g, k3()),
            _ => panic!("expected plain graph"),
        }
        let sg = gen_planted_cc(6, 2, 0.1, 4).unwrap();
        let spath = dir.join("s6.txt");
        write_edge_list(&AnyGraph::Signed(sg.clone()), &spath).unwrap();
        match read_edge_list(&spath).unwrap() {
            AnyGraph::Signed(g) => assert_eq!(g, sg),
            _ => panic!("expected signed graph"),
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_edge_list("graph 3\n0 0 1\n").unwrap_err();
        assert!(matches!(err, GraphError::SelfLoop(0)), "{err}");
        let err = parse_edge_list("signed 3\n0 1 1.0 0.5\n").unwrap_err();
        assert!(matches!(err, GraphError::BothSigns { .. }), "{err}");
        let err = parse_edge_list("graph 3\n0 x 1\n").unwrap_err();
        match err {
            GraphError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn stream_file_roundtrip() {
        let g = gen_random_graph(16, 0.8, 2).unwrap();
        let ev = to_stream(&g, StreamOrder::InsertDeleteMix, 3);
        let dir = std::env::temp_dir().join(format!("coreset-stream-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("s.txt");
        write_stream(&ev, g.n(), &path).unwrap();
        let (n, back) = read_stream(&path).unwrap();
        assert_eq!(n, g.n());
        assert_eq!(back, ev);
    }
}
