//! Exact brute-force oracles and single-move local search for MaxCut and
//! max-agreement correlation clustering.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::SignedGraph;
use crate::lp::{GraphView, SignedView};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),
    #[error("assignment length {got} does not match vertex count {want}")]
    LengthMismatch { got: usize, want: usize },
}

/// Two-sided cut assignment, one bit per vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutAssignment {
    pub side: Vec<bool>,
}

/// Cluster labels in [0, k).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clustering {
    pub label: Vec<usize>,
}

/// Sum of weights of edges crossing the cut.
pub fn cut_value(view: &GraphView, cut: &CutAssignment) -> Result<f64, SolverError> {
    if cut.side.len() != view.n {
        return Err(SolverError::LengthMismatch {
            got: cut.side.len(),
            want: view.n,
        });
    }
    let mut total = 0.0;
    for i in 0..view.n {
        for &(j, w) in &view.adj[i] {
            if j > i && cut.side[i] != cut.side[j] {
                total += w;
            }
        }
    }
    Ok(total)
}

pub const MAXCUT_EXACT_LIMIT: usize = 28;

/// Global MaxCut optimum by Gray-code enumeration with vertex n-1 fixed to
/// side 0. Ties prefer the lexicographically smallest mask.
pub fn maxcut_exact(view: &GraphView) -> Result<(CutAssignment, f64), SolverError> {
    maxcut_exact_with_limit(view, MAXCUT_EXACT_LIMIT)
}

pub fn maxcut_exact_with_limit(
    view: &GraphView,
    limit: usize,
) -> Result<(CutAssignment, f64), SolverError> {
    let n = view.n;
    if n > limit {
        return Err(SolverError::TooLarge(format!("n = {n} > limit {limit}")));
    }
    if n == 0 {
        return Ok((CutAssignment { side: vec![] }, 0.0));
    }
    let free = n - 1;
    let mut side = vec![false; n];
    let mut value = 0.0;
    let mut best_value = 0.0;
    let mut best_mask: u64 = 0;
    let mut mask: u64 = 0;
    for step in 1u64..(1u64 << free) {
        let flip = step.trailing_zeros() as usize;
        // Delta from flipping `flip`: crossing edges become internal and
        // vice versa.
        let mut delta = 0.0;
        for &(j, w) in &view.adj[flip] {
            if side[j] != side[flip] {
                delta -= w;
            } else {
                delta += w;
            }
        }
        side[flip] = !side[flip];
        mask ^= 1 << flip;
        value += delta;
        if value > best_value + 1e-15 || (value >= best_value - 1e-15 && mask < best_mask) {
            if value > best_value {
                best_value = value;
            }
            best_mask = mask;
        }
    }
    let side: Vec<bool> = (0..n).map(|i| best_mask >> i & 1 == 1).collect();
    let cut = CutAssignment { side };
    let v = cut_value(view, &cut)?;
    Ok((cut, v))
}

/// Best-improvement single-flip hill climbing over seeded random restarts.
/// Moves are accepted only on strict improvement (> 1e-12) so the search
/// terminates at a 1-flip local optimum.
pub fn maxcut_local_search(
    view: &GraphView,
    restarts: usize,
    rng_seed: u64,
) -> (CutAssignment, f64) {
    let n = view.n;
    let mut best: Option<(Vec<bool>, f64)> = None;
    for r in 0..restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed ^ r as u64);
        let mut side: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
        // gain[i]: cut-value change from flipping i.
        let mut gain = vec![0.0; n];
        let mut value = 0.0;
        for i in 0..n {
            for &(j, w) in &view.adj[i] {
                if side[i] != side[j] {
                    gain[i] -= w;
                    if j > i {
                        value += w;
                    }
                } else {
                    gain[i] += w;
                }
            }
        }
        loop {
            let mut best_i = usize::MAX;
            let mut best_gain = 1e-12;
            for i in 0..n {
                if gain[i] > best_gain {
                    best_gain = gain[i];
                    best_i = i;
                }
            }
            if best_i == usize::MAX {
                break;
            }
            let i = best_i;
            value += gain[i];
            side[i] = !side[i];
            gain[i] = -gain[i];
            for &(j, w) in &view.adj[i] {
                if side[j] != side[i] {
                    // Edge now crossing: flipping j would uncross it.
                    gain[j] -= 2.0 * w;
                } else {
                    gain[j] += 2.0 * w;
                }
            }
        }
        match &best {
            Some((_, bv)) if *bv >= value => {}
            _ => best = Some((side, value)),
        }
    }
    let (side, value) = best.unwrap_or((vec![false; n], 0.0));
    (CutAssignment { side }, value)
}

/// MAX-AGREE score of a clustering: C- + sum over edges of eta when the
/// endpoints share a cluster.
pub fn cc_value(view: &SignedView, cl: &Clustering) -> Result<f64, SolverError> {
    if cl.label.len() != view.n {
        return Err(SolverError::LengthMismatch {
            got: cl.label.len(),
            want: view.n,
        });
    }
    let mut total = view.c_minus_total;
    for i in 0..view.n {
        for &(j, eta) in &view.adj[i] {
            if j > i && cl.label[i] == cl.label[j] {
                total += eta;
            }
        }
    }
    Ok(total)
}

/// Unsimplified MAX-AGREE score straight from the definition:
/// sum of c+ over same-cluster edges plus c- over split edges.
pub fn cc_value_definition(g: &SignedGraph, cl: &Clustering) -> Result<f64, SolverError> {
    if cl.label.len() != g.n() {
        return Err(SolverError::LengthMismatch {
            got: cl.label.len(),
            want: g.n(),
        });
    }
    let mut total = 0.0;
    for &(u, v, cp, cm) in g.edges() {
        if cl.label[u] == cl.label[v] {
            total += cp;
        } else {
            total += cm;
        }
    }
    Ok(total)
}

pub const CC_EXACT_LIMIT: f64 = 2e6;

/// Number of canonical labelings of n items with at most k labels (vertex 0
/// fixed to label 0, labels first used in increasing order).
pub fn canonical_labeling_count(n: usize, k: usize) -> f64 {
    // f(remaining, used): used labels so far; each position picks one of
    // min(used + 1, k) options.
    fn f(remaining: usize, used: usize, k: usize, memo: &mut Vec<Vec<f64>>) -> f64 {
        if remaining == 0 {
            return 1.0;
        }
        if memo[remaining][used] >= 0.0 {
            return memo[remaining][used];
        }
        let mut total = (used as f64) * f(remaining - 1, used, k, memo);
        if used < k {
            total += f(remaining - 1, used + 1, k, memo);
        }
        memo[remaining][used] = total;
        total
    }
    if n == 0 {
        return 1.0;
    }
    let mut memo = vec![vec![-1.0; k + 1]; n];
    f(n - 1, 1, k, &mut memo)
}

/// Exact optimum over clusterings with at most k clusters, enumerating
/// canonical labelings (vertex 0 labeled 0, labels first used in increasing
/// order). The enumeration count must stay within the limit.
pub fn cc_exact(view: &SignedView, k: usize) -> Result<(Clustering, f64), SolverError> {
    let n = view.n;
    let k = k.min(n.max(1));
    let work = canonical_labeling_count(n, k);
    if work > CC_EXACT_LIMIT {
        return Err(SolverError::TooLarge(format!(
            "{work} canonical labelings > {CC_EXACT_LIMIT}"
        )));
    }
    if n == 0 {
        return Ok((Clustering { label: vec![] }, view.c_minus_total));
    }
    let mut label = vec![0usize; n];
    let mut best_label = label.clone();
    let mut best = cc_value(view, &Clustering { label: label.clone() })?;
    // Depth-first over restricted-growth strings bounded by k.
    fn rec(
        view: &SignedView,
        k: usize,
        i: usize,
        max_used: usize,
        label: &mut Vec<usize>,
        best: &mut f64,
        best_label: &mut Vec<usize>,
    ) {
        if i == view.n {
            let v = cc_value_fast(view, label);
            if v > *best + 1e-15 {
                *best = v;
                best_label.clone_from(label);
            }
            return;
        }
        let top = (max_used + 1).min(k - 1);
        for l in 0..=top {
            label[i] = l;
            rec(view, k, i + 1, max_used.max(l), label, best, best_label);
        }
        label[i] = 0;
    }
    fn cc_value_fast(view: &SignedView, label: &[usize]) -> f64 {
        let mut total = view.c_minus_total;
        for i in 0..view.n {
            for &(j, eta) in &view.adj[i] {
                if j > i && label[i] == label[j] {
                    total += eta;
                }
            }
        }
        total
    }
    rec(view, k, 1, 0, &mut label, &mut best, &mut best_label);
    Ok((Clustering { label: best_label }, best))
}

/// Best-improvement single-vertex relabeling over seeded restarts.
pub fn cc_local_search(
    view: &SignedView,
    k: usize,
    restarts: usize,
    rng_seed: u64,
) -> (Clustering, f64) {
    let n = view.n;
    let k = k.max(1);
    let mut best: Option<(Vec<usize>, f64)> = None;
    for r in 0..restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed ^ r as u64);
        let mut label: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let mut value = cc_value(view, &Clustering { label: label.clone() }).unwrap();
        loop {
            let mut best_move: Option<(usize, usize, f64)> = None;
            for i in 0..n {
                // eta mass toward each label among i's neighbors.
                let mut toward = vec![0.0; k];
                for &(j, eta) in &view.adj[i] {
                    toward[label[j]] += eta;
                }
                let cur = toward[label[i]];
                for l in 0..k {
                    if l == label[i] {
                        continue;
                    }
                    let gain = toward[l] - cur;
                    if gain > 1e-12
                        && best_move.map_or(true, |(_, _, g)| gain > g)
                    {
                        best_move = Some((i, l, gain));
                    }
                }
            }
            match best_move {
                Some((i, l, gain)) => {
                    label[i] = l;
                    value += gain;
                }
                None => break,
            }
        }
        match &best {
            Some((_, bv)) if *bv >= value => {}
            _ => best = Some((label, value)),
        }
    }
    let (label, value) = best.unwrap_or((vec![0; n], view.c_minus_total));
    (Clustering { label }, value)
}

/// Compares the unrestricted CC optimum with the optimum over ceil(1/eps)
/// clusters; the ratio never drops below 1 - eps.
pub fn k_restriction_check(
    view: &SignedView,
    epsilon: f64,
) -> Result<(f64, f64, f64), SolverError> {
    let k = (1.0 / epsilon).ceil() as usize;
    let (_, opt_full) = cc_exact(view, view.n)?;
    let (_, opt_k) = cc_exact(view, k)?;
    let ratio = if opt_full.abs() < 1e-15 {
        1.0
    } else {
        opt_k / opt_full
    };
    Ok((opt_full, opt_k, ratio))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_planted_cc, gen_random_graph, Graph, SignedGraph};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn view(g: &Graph) -> GraphView {
        GraphView::from_graph(g)
    }

    #[test]
    fn cut_values_small() {
        let k3 = Graph::from_pairs(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let v = view(&k3);
        let all_one_side = CutAssignment { side: vec![false; 3] };
        assert_eq!(cut_value(&v, &all_one_side).unwrap(), 0.0);
        let split = CutAssignment { side: vec![true, false, false] };
        assert_eq!(cut_value(&v, &split).unwrap(), 2.0);
    }

    #[test]
    fn c5_maxcut_is_four() {
        let c5 = Graph::from_pairs(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        let (_, v) = maxcut_exact(&view(&c5)).unwrap();
        assert_eq!(v, 4.0);
    }

    #[test]
    fn k4_and_p3_exact() {
        let k4 = Graph::from_pairs(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        assert_eq!(maxcut_exact(&view(&k4)).unwrap().1, 4.0);
        let p3 = Graph::from_pairs(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(maxcut_exact(&view(&p3)).unwrap().1, 2.0);
    }

    #[test]
    fn exact_dominates_random_cuts() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for seed in 0..50 {
            let g = gen_random_graph(12, 0.7, seed).unwrap();
            let v = view(&g);
            let (_, opt) = maxcut_exact(&v).unwrap();
            for _ in 0..20 {
                let cut = CutAssignment {
                    side: (0..12).map(|_| rng.gen()).collect(),
                };
                assert!(cut_value(&v, &cut).unwrap() <= opt + 1e-12);
            }
        }
    }

    #[test]
    fn exact_matches_naive_enumerator() {
        // Independent oracle: direct max over all 2^n assignments.
        fn naive(view: &GraphView) -> f64 {
            let n = view.n;
            let mut best = 0.0f64;
            for mask in 0u32..(1 << n) {
                let cut = CutAssignment {
                    side: (0..n).map(|i| mask >> i & 1 == 1).collect(),
                };
                best = best.max(cut_value(view, &cut).unwrap());
            }
            best
        }
        for seed in 0..30 {
            let g = gen_random_graph(8, 0.8, seed).unwrap();
            let v = view(&g);
            let (_, fast) = maxcut_exact(&v).unwrap();
            assert_eq!(fast, naive(&v), "seed {seed}");
        }
    }

    #[test]
    fn exact_rejects_oversize() {
        let g = gen_random_graph(40, 0.5, 0).unwrap();
        assert!(matches!(
            maxcut_exact(&view(&g)),
            Err(SolverError::TooLarge(_))
        ));
    }

    #[test]
    fn local_search_matches_exact_small() {
        for seed in 0..20 {
            let g = gen_random_graph(10, 0.8, seed).unwrap();
            let v = view(&g);
            let (_, opt) = maxcut_exact(&v).unwrap();
            let (_, ls) = maxcut_local_search(&v, 50, seed);
            assert!((ls - opt).abs() < 1e-9, "seed {seed}: ls {ls} opt {opt}");
        }
    }

    #[test]
    fn local_search_is_locally_optimal_and_deterministic() {
        let g = gen_random_graph(64, 0.7, 3).unwrap();
        let v = view(&g);
        let (cut, val) = maxcut_local_search(&v, 5, 123);
        let (cut2, val2) = maxcut_local_search(&v, 5, 123);
        assert_eq!(cut, cut2);
        assert_eq!(val, val2);
        // No single flip improves.
        for i in 0..v.n {
            let mut flipped = cut.clone();
            flipped.side[i] = !flipped.side[i];
            assert!(cut_value(&v, &flipped).unwrap() <= val + 1e-9);
        }
    }

    #[test]
    fn cc_values_small() {
        let allplus = gen_planted_cc(4, 1, 0.0, 0).unwrap();
        let sv = SignedView::from_graph(&allplus);
        let one = Clustering { label: vec![0; 4] };
        assert_eq!(cc_value(&sv, &one).unwrap(), sv.c_plus_total);
        let allminus = gen_planted_cc(4, 4, 0.0, 0).unwrap();
        let sv = SignedView::from_graph(&allminus);
        let singletons = Clustering { label: (0..4).collect() };
        assert_eq!(cc_value(&sv, &singletons).unwrap(), sv.c_minus_total);
    }

    #[test]
    fn signed_triangle_optimum_two() {
        let g = SignedGraph::new(
            3,
            vec![(0, 1, 1.0, 0.0), (1, 2, 1.0, 0.0), (0, 2, 0.0, 1.0)],
        )
        .unwrap();
        let sv = SignedView::from_graph(&g);
        let (_, v) = cc_exact(&sv, 2).unwrap();
        assert_eq!(v, 2.0);
        let (_, v3) = cc_exact(&sv, 3).unwrap();
        assert_eq!(v3, 2.0);
    }

    #[test]
    fn cc_value_forms_agree() {
        for seed in 0..30 {
            let g = gen_planted_cc(7, 3, 0.4, seed).unwrap();
            let sv = SignedView::from_graph(&g);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cl = Clustering {
                label: (0..7).map(|_| rng.gen_range(0..3)).collect(),
            };
            let a = cc_value(&sv, &cl).unwrap();
            let b = cc_value_definition(&g, &cl).unwrap();
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn planted_instance_recovered() {
        let g = gen_planted_cc(6, 2, 0.0, 5).unwrap();
        let sv = SignedView::from_graph(&g);
        let (_, v) = cc_exact(&sv, 2).unwrap();
        assert_eq!(v, g.num_edges() as f64);
    }

    #[test]
    fn k_equals_n_matches_unrestricted_sweep() {
        for seed in 0..10 {
            let g = gen_planted_cc(6, 3, 0.5, seed).unwrap();
            let sv = SignedView::from_graph(&g);
            let (_, vn) = cc_exact(&sv, 6).unwrap();
            let best_k = (1..=6)
                .map(|k| cc_exact(&sv, k).unwrap().1)
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((vn - best_k).abs() < 1e-12);
        }
    }

    #[test]
    fn labeling_counts_match_enumeration() {
        // Bell numbers for k = n, k^(n-1) when k >= n never binds early.
        assert_eq!(canonical_labeling_count(3, 3), 5.0); // Bell(3)
        assert_eq!(canonical_labeling_count(4, 4), 15.0); // Bell(4)
        assert_eq!(canonical_labeling_count(8, 8), 4140.0); // Bell(8)
        assert_eq!(canonical_labeling_count(4, 2), 8.0);
        // Oversize instances still rejected.
        let g = gen_planted_cc(24, 3, 0.2, 1).unwrap();
        let sv = SignedView::from_graph(&g);
        assert!(matches!(cc_exact(&sv, 24), Err(SolverError::TooLarge(_))));
    }

    #[test]
    fn cc_local_search_matches_exact_small() {
        for seed in 0..15 {
            let g = gen_planted_cc(7, 3, 0.3, seed).unwrap();
            let sv = SignedView::from_graph(&g);
            let (_, opt) = cc_exact(&sv, 3).unwrap();
            let (_, ls) = cc_local_search(&sv, 3, 60, seed);
            assert!((ls - opt).abs() < 1e-9, "seed {seed}: {ls} vs {opt}");
        }
    }

    #[test]
    fn cc_local_search_locally_optimal() {
        let g = gen_planted_cc(12, 3, 0.25, 7).unwrap();
        let sv = SignedView::from_graph(&g);
        let (cl, val) = cc_local_search(&sv, 3, 10, 9);
        for i in 0..12 {
            for l in 0..3 {
                if l == cl.label[i] {
                    continue;
                }
                let mut moved = cl.clone();
                moved.label[i] = l;
                assert!(cc_value(&sv, &moved).unwrap() <= val + 1e-9);
            }
        }
    }

    #[test]
    fn k_restriction_small_cases() {
        let allplus = gen_planted_cc(5, 1, 0.0, 0).unwrap();
        let sv = SignedView::from_graph(&allplus);
        let (_, _, ratio) = k_restriction_check(&sv, 1.0).unwrap();
        assert_eq!(ratio, 1.0);
        // eps small enough that ceil(1/eps) >= n.
        let g = gen_planted_cc(5, 2, 0.3, 1).unwrap();
        let sv = SignedView::from_graph(&g);
        let (_, _, ratio) = k_restriction_check(&sv, 0.15).unwrap();
        assert!((ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trivial_lower_bound() {
        for seed in 0..20 {
            let g = gen_planted_cc(6, 2, 0.4, seed).unwrap();
            let sv = SignedView::from_graph(&g);
            let (_, opt) = cc_exact(&sv, 6).unwrap();
            assert!(opt >= sv.c_plus_total.max(sv.c_minus_total) - 1e-12);
        }
    }
}
