//! Self-check suites run by the `verify` CLI command: quick versions of the
//! cross-module invariants (distribution equality of the two sampling
//! strategies, LP soundness and duality, edge-sample cut preservation,
//! sketch contracts, and the cluster-budget inequality).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::estimate::{est_maxcut, EstMode};
use crate::graph::{gen_planted_cc, gen_random_graph};
use crate::lp::{build_maxcut_lp, dual_maxcut_optimum, GraphView, SignedView};
use crate::sampling::{
    edge_sample, pair_distribution_exact, CoresetGraph, CoresetProvenance, Strategy,
};
use crate::sketch::{CountMinSketch, L1Sampler};
use crate::solvers::{cc_exact, cut_value, maxcut_exact, CutAssignment};

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn pass(name: &'static str, detail: String) -> Self {
        CheckResult {
            name,
            passed: true,
            detail,
        }
    }
    fn fail(name: &'static str, detail: String) -> Self {
        CheckResult {
            name,
            passed: false,
            detail,
        }
    }
}

/// Runs every suite; `quick` lowers trial counts.
pub fn run_all(quick: bool) -> Vec<CheckResult> {
    vec![
        check_double_sampling(if quick { 20 } else { 100 }),
        check_lp_soundness(if quick { 60 } else { 300 }),
        check_strong_duality(if quick { 15 } else { 50 }),
        check_edge_sample_cuts(if quick { 40 } else { 200 }),
        check_countmin(if quick { 200 } else { 1000 }),
        // The 0.05 TV band needs >= ~12k draws before estimation noise
        // alone stays inside it.
        check_l1_sampler(if quick { 12_000 } else { 40_000 }),
        check_cluster_budget(if quick { 60 } else { 200 }),
    ]
}

pub fn check_double_sampling(trials: u64) -> CheckResult {
    const NAME: &str = "double-sampling strategy equivalence";
    let mut rng = ChaCha8Rng::seed_from_u64(0xd0b1);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let n = rng.gen_range(1..=8);
        let p: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
        let q: Vec<f64> = p.iter().map(|&pv| rng.gen_range(0.0..=pv)).collect();
        let a = match pair_distribution_exact(Strategy::A, &p, &q) {
            Ok(t) => t,
            Err(e) => return CheckResult::fail(NAME, e.to_string()),
        };
        let b = pair_distribution_exact(Strategy::B, &p, &q).unwrap();
        worst = worst.max(a.max_diff(&b));
        if (a.total() - 1.0).abs() > 1e-12 || (b.total() - 1.0).abs() > 1e-12 {
            return CheckResult::fail(NAME, "table does not sum to 1".into());
        }
    }
    if worst <= 1e-12 {
        CheckResult::pass(NAME, format!("{trials} trials, max entry diff {worst:.2e}"))
    } else {
        CheckResult::fail(NAME, format!("max entry diff {worst:.2e} > 1e-12"))
    }
}

pub fn check_lp_soundness(trials: u64) -> CheckResult {
    const NAME: &str = "estimation-LP soundness vs exact MaxCut";
    let mut rng = ChaCha8Rng::seed_from_u64(0x50d);
    for t in 0..trials {
        let n = rng.gen_range(3..=10);
        let g = match gen_random_graph(n, rng.gen_range(0.4..1.0), t) {
            Ok(g) => g,
            Err(e) => return CheckResult::fail(NAME, e.to_string()),
        };
        let view = GraphView::from_graph(&g);
        let (_, opt) = maxcut_exact(&view).unwrap();
        let rho: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..4.0)).collect();
        let sol = match build_maxcut_lp(&view, &rho).and_then(|lp| lp.solve(1e-7)) {
            Ok(s) => s,
            Err(e) => return CheckResult::fail(NAME, e.to_string()),
        };
        if sol.objective > opt + 1e-6 {
            return CheckResult::fail(
                NAME,
                format!("trial {t}: LP {} > MaxCut {opt}", sol.objective),
            );
        }
    }
    CheckResult::pass(NAME, format!("{trials} random (graph, rho) instances"))
}

pub fn check_strong_duality(trials: u64) -> CheckResult {
    const NAME: &str = "strong duality of the estimation LP";
    let mut rng = ChaCha8Rng::seed_from_u64(0xd0a1);
    let mut worst: f64 = 0.0;
    for t in 0..trials {
        let n = rng.gen_range(2..=10);
        let g = gen_random_graph(n, rng.gen_range(0.4..1.0), t ^ 0xff).unwrap();
        let view = GraphView::from_graph(&g);
        let rho: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..3.0)).collect();
        let primal = match build_maxcut_lp(&view, &rho).and_then(|lp| lp.solve(1e-7)) {
            Ok(s) => s.objective,
            Err(e) => return CheckResult::fail(NAME, e.to_string()),
        };
        let dual = match dual_maxcut_optimum(&view, &rho, 1e-7) {
            Ok((d, _)) => d,
            Err(e) => return CheckResult::fail(NAME, e.to_string()),
        };
        worst = worst.max((primal - dual).abs());
    }
    if worst <= 1e-6 {
        CheckResult::pass(NAME, format!("{trials} instances, max gap {worst:.2e}"))
    } else {
        CheckResult::fail(NAME, format!("max gap {worst:.2e} > 1e-6"))
    }
}

/// Fixed weighted core-set with skewed retention probabilities so the edge
/// sampler's keep probabilities actually fall below 1.
pub fn edge_sample_fixture(seed: u64) -> CoresetGraph {
    let n = 16usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probs: Vec<f64> = (0..n)
        .map(|i| if i % 2 == 0 { 1.0 } else { 0.06 })
        .collect();
    let delta = 4.0;
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen::<f64>() < 0.75 {
                edges.push((u, v, 1.0 / (probs[u] * probs[v] * delta * delta)));
            }
        }
    }
    CoresetGraph {
        vertices: (0..n).map(|i| (i, probs[i])).collect(),
        edges,
        provenance: CoresetProvenance::default(),
    }
}

/// Largest cut deviation between a core-set and its edge-sampled version,
/// over all 2^{k-1} cuts.
pub fn max_cut_deviation(h: &CoresetGraph, h2: &CoresetGraph) -> f64 {
    let k = h.vertices.len();
    let va = GraphView::from_coreset(h);
    let vb = GraphView::from_coreset(h2);
    let mut worst: f64 = 0.0;
    for mask in 0u64..(1 << (k - 1)) {
        let side: Vec<bool> = (0..k).map(|i| mask >> i & 1 == 1).collect();
        let cut = CutAssignment { side };
        let a = cut_value(&va, &cut).unwrap();
        let b = cut_value(&vb, &cut).unwrap();
        worst = worst.max((a - b).abs());
    }
    worst
}

pub fn check_edge_sample_cuts(trials: u64) -> CheckResult {
    const NAME: &str = "edge-sample cut preservation";
    let eps = 0.25;
    let h = edge_sample_fixture(0x5eed);
    let w = h.total_weight();
    let mut ok = 0u64;
    for t in 0..trials {
        let h2 = match edge_sample(&h, eps, t) {
            Ok(h2) => h2,
            Err(e) => return CheckResult::fail(NAME, e.to_string()),
        };
        if max_cut_deviation(&h, &h2) <= eps * w {
            ok += 1;
        }
    }
    let frac = ok as f64 / trials as f64;
    if frac >= 0.95 {
        CheckResult::pass(NAME, format!("{ok}/{trials} trials within eps*W"))
    } else {
        CheckResult::fail(NAME, format!("only {ok}/{trials} trials within eps*W"))
    }
}

pub fn check_countmin(trials: u64) -> CheckResult {
    const NAME: &str = "CountMin overestimate bound";
    let n = 2000;
    let k = 100;
    let mut ok = 0u64;
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(t);
        let mut cm = CountMinSketch::new(k, 0.01, n, t ^ 0xabcd);
        let mut exact = vec![0.0; n];
        let mut norm = 0.0;
        for _ in 0..10_000 {
            let i = (n as f64 * rng.gen::<f64>().powi(3)) as usize % n;
            cm.update(i, 1.0).unwrap();
            exact[i] += 1.0;
            norm += 1.0;
        }
        let probe = rng.gen_range(0..n);
        if cm.query(probe).unwrap() - exact[probe] <= norm / k as f64 {
            ok += 1;
        }
    }
    let frac = ok as f64 / trials as f64;
    if frac >= 0.99 {
        CheckResult::pass(NAME, format!("{ok}/{trials} point queries within ||x||/k"))
    } else {
        CheckResult::fail(NAME, format!("only {ok}/{trials} within ||x||/k"))
    }
}

pub fn check_l1_sampler(draws: u64) -> CheckResult {
    const NAME: &str = "l1-sampler distribution accuracy";
    let dim = 100usize;
    for turnstile in [false, true] {
        let mut counts = vec![0usize; dim];
        let mut got = 0usize;
        for seed in 0..draws {
            let mut s = if turnstile {
                L1Sampler::new_turnstile(dim, 0.1, 0.1, seed)
            } else {
                L1Sampler::new_reservoir(dim, 0.1, 0.1, seed)
            };
            for i in 0..dim {
                s.update(i, 2.0).unwrap();
            }
            if turnstile {
                s.update(3, 1.0).unwrap();
                s.update(3, -1.0).unwrap();
            }
            if let Some((i, _)) = s.sample() {
                counts[i] += 1;
                got += 1;
            }
        }
        if got < (draws / 2) as usize {
            return CheckResult::fail(NAME, format!("too many sampler failures: {got}/{draws}"));
        }
        let tv: f64 = counts
            .iter()
            .map(|&c| (c as f64 / got as f64 - 1.0 / dim as f64).abs())
            .sum::<f64>()
            / 2.0;
        if tv > 0.05 {
            return CheckResult::fail(
                NAME,
                format!("turnstile={turnstile}: TV {tv:.4} > 0.05"),
            );
        }
    }
    CheckResult::pass(NAME, format!("{draws} draws per backend, TV <= 0.05"))
}

pub fn check_cluster_budget(trials: u64) -> CheckResult {
    const NAME: &str = "cluster-budget ratio and trivial bound";
    let eps = 1.0 / 3.0;
    let k = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(0xcc);
    for t in 0..trials {
        let n = rng.gen_range(4..=8);
        let noise: f64 = rng.gen_range(0.0..0.6);
        let g = gen_planted_cc(n, rng.gen_range(1..=n), noise, t).unwrap();
        let view = SignedView::from_graph(&g);
        let (_, opt_full) = match cc_exact(&view, n) {
            Ok(v) => v,
            Err(e) => return CheckResult::fail(NAME, e.to_string()),
        };
        let (_, opt_k) = cc_exact(&view, k).unwrap();
        if opt_k < (1.0 - eps) * opt_full - 1e-9 {
            return CheckResult::fail(
                NAME,
                format!("trial {t}: opt_{k} = {opt_k} < (1-eps) * {opt_full}"),
            );
        }
        let trivial = view.c_plus_total.max(view.c_minus_total);
        if opt_full < trivial - 1e-9 {
            return CheckResult::fail(NAME, format!("trial {t}: optimum below max(C+, C-)"));
        }
    }
    CheckResult::pass(NAME, format!("{trials} signed instances"))
}

/// Quick full-seed sanity of the estimator used by `verify`.
pub fn check_full_seed_exactness(trials: u64) -> CheckResult {
    const NAME: &str = "full-seed estimator exactness";
    for t in 0..trials {
        let g = gen_random_graph(8, 0.7, t).unwrap();
        let view = GraphView::from_graph(&g);
        let (_, opt) = maxcut_exact(&view).unwrap();
        let res = match est_maxcut(&view, &vec![1.0; 8], t, EstMode::Exhaustive) {
            Ok(r) => r,
            Err(e) => return CheckResult::fail(NAME, e.to_string()),
        };
        if (res.value - opt).abs() > 1e-6 {
            return CheckResult::fail(NAME, format!("trial {t}: est {} != {opt}", res.value));
        }
    }
    CheckResult::pass(NAME, format!("{trials} instances"))
}
