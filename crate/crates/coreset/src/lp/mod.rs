//! Estimation linear programs for MaxCut and correlation clustering, their
//! duals, a dense simplex solver, and rounding of fractional solutions.

mod simplex;

use num::rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, SignedGraph};
use crate::sampling::{CoresetGraph, SignedCoresetGraph};

pub use simplex::LpNum;

#[derive(Debug, Error)]
pub enum LpError {
    #[error("model malformed: {0}")]
    Malformed(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("simplex iteration limit exceeded")]
    IterationLimit,
    #[error("internal solver error: {0}")]
    Internal(String),
    #[error("row {0} of the fractional assignment sums to {1}, expected 1")]
    RowSum(usize, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LpConstraint {
    pub terms: Vec<(usize, f64)>,
    pub op: Relation,
    pub rhs: f64,
}

/// A linear program in maximization form: box-bounded variables, sparse
/// linear constraints, linear objective. Minimization problems are encoded
/// by negating the objective.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LpModel {
    /// (lower, upper) per variable; lower must be finite, upper may be +inf.
    pub bounds: Vec<(f64, f64)>,
    pub objective: Vec<f64>,
    pub constraints: Vec<LpConstraint>,
}

impl LpModel {
    pub fn num_vars(&self) -> usize {
        self.bounds.len()
    }

    pub fn validate(&self) -> Result<(), LpError> {
        if self.objective.len() != self.bounds.len() {
            return Err(LpError::Malformed(format!(
                "{} objective coefficients for {} variables",
                self.objective.len(),
                self.bounds.len()
            )));
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !lo.is_finite() {
                return Err(LpError::Malformed(format!("variable {j} has no finite lower bound")));
            }
            if hi < lo {
                return Err(LpError::Malformed(format!("variable {j} bounds inverted")));
            }
        }
        for (r, c) in self.constraints.iter().enumerate() {
            if !c.rhs.is_finite() {
                return Err(LpError::Malformed(format!("row {r} rhs not finite")));
            }
            for &(j, a) in &c.terms {
                if j >= self.bounds.len() {
                    return Err(LpError::Malformed(format!(
                        "row {r} references undeclared variable {j}"
                    )));
                }
                if !a.is_finite() {
                    return Err(LpError::Malformed(format!("row {r} coefficient not finite")));
                }
            }
        }
        Ok(())
    }

    /// Largest constraint or bound violation of an assignment.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            worst = worst.max(lo - x[j]);
            if hi.is_finite() {
                worst = worst.max(x[j] - hi);
            }
        }
        for c in &self.constraints {
            let lhs: f64 = c.terms.iter().map(|&(j, a)| a * x[j]).sum();
            let v = match c.op {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(v);
        }
        worst
    }

    /// Debug dump in an LP text format (fixed 12-decimal precision):
    /// `Maximize / obj: ... / Subject To / rN: ... / Bounds / ... / End`.
    pub fn to_lp_text(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        s.push_str("Maximize\n obj:");
        for (j, &c) in self.objective.iter().enumerate() {
            if c != 0.0 {
                let _ = write!(s, " {}{:.12} x{}", if c >= 0.0 { "+" } else { "-" }, c.abs(), j);
            }
        }
        s.push_str("\nSubject To\n");
        for (r, c) in self.constraints.iter().enumerate() {
            let _ = write!(s, " r{r}:");
            for &(j, a) in &c.terms {
                let _ = write!(s, " {}{:.12} x{}", if a >= 0.0 { "+" } else { "-" }, a.abs(), j);
            }
            let op = match c.op {
                Relation::Le => "<=",
                Relation::Ge => ">=",
                Relation::Eq => "=",
            };
            let _ = writeln!(s, " {op} {:.12}", c.rhs);
        }
        s.push_str("Bounds\n");
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if hi.is_finite() {
                let _ = writeln!(s, " {:.12} <= x{j} <= {:.12}", lo, hi);
            } else {
                let _ = writeln!(s, " x{j} >= {:.12}", lo);
            }
        }
        s.push_str("End\n");
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub values: Vec<f64>,
    pub objective: f64,
}

/// Solves a model with the dense f64 simplex. On `Optimal` the assignment is
/// primal feasible within `tol`.
pub fn solve_lp(model: &LpModel, tol: f64) -> Result<LpSolution, LpError> {
    let res = simplex::solve_model::<f64>(model)?;
    if res.status == LpStatus::Optimal {
        let v = model.violation(&res.values);
        if v > tol {
            return Err(LpError::Internal(format!(
                "reported optimum violates constraints by {v}
{}",
                model.to_lp_text()
            )));
        }
    }
    Ok(LpSolution {
        status: res.status,
        values: res.values,
        objective: res.objective,
    })
}

/// Exact-rational solve for small regression fixtures.
pub struct LpSolutionExact {
    pub status: LpStatus,
    pub values: Vec<BigRational>,
    pub objective: BigRational,
}

pub fn solve_lp_exact(model: &LpModel) -> Result<LpSolutionExact, LpError> {
    let res = simplex::solve_model::<BigRational>(model)?;
    Ok(LpSolutionExact {
        status: res.status,
        values: res.values,
        objective: res.objective,
    })
}

/// Weighted-graph view shared by the LP builders: adjacency, degrees, total
/// edge weight.
#[derive(Debug, Clone)]
pub struct GraphView {
    pub n: usize,
    pub adj: Vec<Vec<(usize, f64)>>,
    pub degrees: Vec<f64>,
    pub total_weight: f64,
}

impl GraphView {
    pub fn from_graph(g: &Graph) -> Self {
        GraphView {
            n: g.n(),
            adj: g.adjacency(),
            degrees: g.degrees().to_vec(),
            total_weight: g.total_weight(),
        }
    }

    /// Positions-indexed view of a core-set.
    pub fn from_coreset(h: &CoresetGraph) -> Self {
        let n = h.vertices.len();
        let mut adj = vec![Vec::new(); n];
        for &(u, v, w) in &h.edges {
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        GraphView {
            n,
            adj,
            degrees: h.degrees(),
            total_weight: h.total_weight(),
        }
    }

    pub fn weighted_neighbor_sum(&self, i: usize, x: &[f64]) -> f64 {
        self.adj[i].iter().map(|&(j, w)| w * x[j]).sum()
    }
}

/// Signed view: eta adjacency, |eta| degrees, per-vertex c- sums.
#[derive(Debug, Clone)]
pub struct SignedView {
    pub n: usize,
    /// (neighbor, eta).
    pub adj: Vec<Vec<(usize, f64)>>,
    /// Sum of |eta| per vertex.
    pub degrees: Vec<f64>,
    /// Sum of c- per vertex.
    pub d_minus: Vec<f64>,
    pub c_minus_total: f64,
    pub c_plus_total: f64,
    pub total_weight: f64,
}

impl SignedView {
    pub fn from_graph(g: &SignedGraph) -> Self {
        let n = g.n();
        let mut adj = vec![Vec::new(); n];
        let mut d_minus = vec![0.0; n];
        for &(u, v, cp, cm) in g.edges() {
            let eta = cp - cm;
            adj[u].push((v, eta));
            adj[v].push((u, eta));
            d_minus[u] += cm;
            d_minus[v] += cm;
        }
        SignedView {
            n,
            adj,
            degrees: g.degrees().to_vec(),
            d_minus,
            c_minus_total: g.c_minus_total(),
            c_plus_total: g.c_plus_total(),
            total_weight: g.degrees().iter().sum::<f64>() / 2.0,
        }
    }

    pub fn from_coreset(h: &SignedCoresetGraph) -> Self {
        let n = h.vertices.len();
        let mut adj = vec![Vec::new(); n];
        let mut d_minus = vec![0.0; n];
        let mut degrees = vec![0.0; n];
        let (mut cm_total, mut cp_total) = (0.0, 0.0);
        for &(u, v, cp, cm) in &h.edges {
            let eta = cp - cm;
            adj[u].push((v, eta));
            adj[v].push((u, eta));
            d_minus[u] += cm;
            d_minus[v] += cm;
            degrees[u] += eta.abs();
            degrees[v] += eta.abs();
            cm_total += cm;
            cp_total += cp;
        }
        let total_weight = degrees.iter().sum::<f64>() / 2.0;
        SignedView {
            n,
            adj,
            degrees,
            d_minus,
            c_minus_total: cm_total,
            c_plus_total: cp_total,
            total_weight,
        }
    }

    pub fn eta_neighbor_sum(&self, i: usize, col: impl Fn(usize) -> f64) -> f64 {
        self.adj[i].iter().map(|&(j, eta)| eta * col(j)).sum()
    }
}

/// The MaxCut estimation LP for a guess vector rho: variables x_i in [0,1]
/// and slack pairs s_i, t_i >= 0, objective
/// `sum_i x_i (d_i - rho_i) - s_i - t_i`, constraints
/// `rho_i - t_i <= sum_j w_ij x_j <= rho_i + s_i`.
#[derive(Debug, Clone)]
pub struct EstimationLpMaxcut {
    pub n: usize,
    pub rho: Vec<f64>,
    pub model: LpModel,
}

impl EstimationLpMaxcut {
    pub fn x_index(i: usize) -> usize {
        i
    }
    pub fn s_index(&self, i: usize) -> usize {
        self.n + i
    }
    pub fn t_index(&self, i: usize) -> usize {
        2 * self.n + i
    }

    pub fn solve(&self, tol: f64) -> Result<LpSolution, LpError> {
        solve_lp(&self.model, tol)
    }
}

pub fn build_maxcut_lp(view: &GraphView, rho: &[f64]) -> Result<EstimationLpMaxcut, LpError> {
    let n = view.n;
    if rho.len() != n {
        return Err(LpError::Dimension(format!(
            "rho has {} entries for {} vertices",
            rho.len(),
            n
        )));
    }
    let mut bounds = Vec::with_capacity(3 * n);
    let mut objective = Vec::with_capacity(3 * n);
    for i in 0..n {
        bounds.push((0.0, 1.0));
        objective.push(view.degrees[i] - rho[i]);
    }
    for _ in 0..(2 * n) {
        bounds.push((0.0, f64::INFINITY));
        objective.push(-1.0);
    }
    let mut constraints = Vec::with_capacity(2 * n);
    for i in 0..n {
        let base: Vec<(usize, f64)> = view.adj[i].iter().map(|&(j, w)| (j, w)).collect();
        // sum_j w_ij x_j - s_i <= rho_i
        let mut up = base.clone();
        up.push((n + i, -1.0));
        constraints.push(LpConstraint {
            terms: up,
            op: Relation::Le,
            rhs: rho[i],
        });
        // sum_j w_ij x_j + t_i >= rho_i
        let mut lo = base;
        lo.push((2 * n + i, 1.0));
        constraints.push(LpConstraint {
            terms: lo,
            op: Relation::Ge,
            rhs: rho[i],
        });
    }
    Ok(EstimationLpMaxcut {
        n,
        rho: rho.to_vec(),
        model: LpModel {
            bounds,
            objective,
            constraints,
        },
    })
}

/// Objective of the MaxCut estimation LP at a given x with the slack pair
/// set optimally (s_i + t_i = |rho_i - sum_j w_ij x_j|). Concave piecewise
/// linear in x; used as a cross-check oracle against the simplex.
pub fn maxcut_lp_objective_at(view: &GraphView, rho: &[f64], x: &[f64]) -> f64 {
    (0..view.n)
        .map(|i| {
            let nb = view.weighted_neighbor_sum(i, x);
            x[i] * (view.degrees[i] - rho[i]) - (rho[i] - nb).abs()
        })
        .sum()
}

/// The CC estimation LP for a guess matrix rho (n x k). Variables x_{il} on
/// the per-vertex simplex plus slack pairs; the objective is scaled so the
/// optimum reports the clustering score with each edge counted once.
#[derive(Debug, Clone)]
pub struct EstimationLpCC {
    pub n: usize,
    pub k: usize,
    pub rho: Vec<Vec<f64>>,
    pub model: LpModel,
}

impl EstimationLpCC {
    pub fn x_index(&self, i: usize, l: usize) -> usize {
        i * self.k + l
    }

    pub fn solve(&self, tol: f64) -> Result<LpSolution, LpError> {
        solve_lp(&self.model, tol)
    }
}

pub fn build_cc_lp(view: &SignedView, k: usize, rho: &[Vec<f64>]) -> Result<EstimationLpCC, LpError> {
    if k < 1 {
        return Err(LpError::Dimension("k < 1".into()));
    }
    let n = view.n;
    if rho.len() != n || rho.iter().any(|r| r.len() != k) {
        return Err(LpError::Dimension(format!(
            "rho must be {n} x {k}"
        )));
    }
    let nk = n * k;
    let mut bounds = Vec::with_capacity(3 * nk);
    let mut objective = Vec::with_capacity(3 * nk);
    // The natural objective counts each edge from both endpoints; halve it
    // so the optimum equals the edge-based clustering score.
    for i in 0..n {
        for l in 0..k {
            bounds.push((0.0, 1.0));
            objective.push(0.5 * (rho[i][l] + view.d_minus[i]));
        }
    }
    for _ in 0..(2 * nk) {
        bounds.push((0.0, f64::INFINITY));
        objective.push(-0.5);
    }
    let mut constraints = Vec::with_capacity(2 * nk + n);
    for i in 0..n {
        for l in 0..k {
            let base: Vec<(usize, f64)> = view.adj[i]
                .iter()
                .map(|&(j, eta)| (j * k + l, eta))
                .collect();
            let s = nk + i * k + l;
            let t = 2 * nk + i * k + l;
            let mut up = base.clone();
            up.push((s, -1.0));
            constraints.push(LpConstraint {
                terms: up,
                op: Relation::Le,
                rhs: rho[i][l],
            });
            let mut lo = base;
            lo.push((t, 1.0));
            constraints.push(LpConstraint {
                terms: lo,
                op: Relation::Ge,
                rhs: rho[i][l],
            });
        }
    }
    for i in 0..n {
        constraints.push(LpConstraint {
            terms: (0..k).map(|l| (i * k + l, 1.0)).collect(),
            op: Relation::Eq,
            rhs: 1.0,
        });
    }
    Ok(EstimationLpCC {
        n,
        k,
        rho: rho.to_vec(),
        model: LpModel {
            bounds,
            objective,
            constraints,
        },
    })
}

/// Dual of the MaxCut estimation LP, encoded as a maximization of the
/// negated dual objective. The dual minimizes `sum_i u_i + rho_i z_i`
/// subject to `u_i + sum_j w_ij z_j >= d_i - rho_i`, `u_i >= 0`,
/// `-1 <= z_i <= 1`; use [`dual_maxcut_optimum`] to get the minimum back.
pub fn build_dual_maxcut(view: &GraphView, rho: &[f64]) -> Result<LpModel, LpError> {
    let n = view.n;
    if rho.len() != n {
        return Err(LpError::Dimension(format!(
            "rho has {} entries for {} vertices",
            rho.len(),
            n
        )));
    }
    // Variables: z_0..z_{n-1} in [-1, 1], then u_0..u_{n-1} >= 0.
    let mut bounds = Vec::with_capacity(2 * n);
    let mut objective = Vec::with_capacity(2 * n);
    for i in 0..n {
        bounds.push((-1.0, 1.0));
        objective.push(-rho[i]);
    }
    for _ in 0..n {
        bounds.push((0.0, f64::INFINITY));
        objective.push(-1.0);
    }
    let mut constraints = Vec::with_capacity(n);
    for i in 0..n {
        let mut terms: Vec<(usize, f64)> = view.adj[i].iter().map(|&(j, w)| (j, w)).collect();
        terms.push((n + i, 1.0));
        constraints.push(LpConstraint {
            terms,
            op: Relation::Ge,
            rhs: view.degrees[i] - rho[i],
        });
    }
    Ok(LpModel {
        bounds,
        objective,
        constraints,
    })
}

/// Solves the dual and returns its minimum (primal-matching) value together
/// with the optimal z vector.
pub fn dual_maxcut_optimum(view: &GraphView, rho: &[f64], tol: f64) -> Result<(f64, Vec<f64>), LpError> {
    let model = build_dual_maxcut(view, rho)?;
    let sol = solve_lp(&model, tol)?;
    if sol.status != LpStatus::Optimal {
        return Err(LpError::Internal(format!("dual status {:?}", sol.status)));
    }
    Ok((-sol.objective, sol.values[..view.n].to_vec()))
}

/// Best choice of u_i for a fixed dual vector z:
/// `max{0, d_i - rho_i - sum_j w_ij z_j}`.
pub fn dual_optimal_u(view: &GraphView, rho: &[f64], z: &[f64]) -> Vec<f64> {
    (0..view.n)
        .map(|i| {
            let nb = view.weighted_neighbor_sum(i, z);
            (view.degrees[i] - rho[i] - nb).max(0.0)
        })
        .collect()
}

/// MaxCut quadratic form Q(x) = sum_i x_i (d_i - sum_j w_ij x_j).
pub fn quadratic_value(view: &GraphView, x: &[f64]) -> f64 {
    (0..view.n)
        .map(|i| x[i] * (view.degrees[i] - view.weighted_neighbor_sum(i, x)))
        .sum()
}

/// CC quadratic form, scaled to the edge-based clustering score:
/// `1/2 sum_{i,l} x_il (d-_i + sum_j eta_ij x_jl)`.
pub fn cc_quadratic_value(view: &SignedView, x: &[Vec<f64>]) -> f64 {
    let k = x.first().map_or(0, Vec::len);
    let mut total = 0.0;
    for i in 0..view.n {
        for l in 0..k {
            let nb = view.eta_neighbor_sum(i, |j| x[j][l]);
            total += x[i][l] * (view.d_minus[i] + nb);
        }
    }
    0.5 * total
}

const INTEGRAL_EPS: f64 = 1e-9;

/// Rounds a fractional x to a 0/1 cut without decreasing Q: fractional
/// coordinates are fixed one by one (in index order) to the boundary value
/// maximizing Q given the others; on indifference the vertex goes to side 0.
pub fn round_to_cut(view: &GraphView, x: &[f64]) -> (Vec<bool>, f64) {
    let mut y = x.to_vec();
    for i in 0..view.n {
        if y[i] <= INTEGRAL_EPS {
            y[i] = 0.0;
        } else if y[i] >= 1.0 - INTEGRAL_EPS {
            y[i] = 1.0;
        } else {
            // Q is linear in y_i with slope d_i - 2 sum_j w_ij y_j.
            let slope = view.degrees[i] - 2.0 * view.weighted_neighbor_sum(i, &y);
            y[i] = if slope > 0.0 { 1.0 } else { 0.0 };
        }
    }
    let assignment: Vec<bool> = y.iter().map(|&v| v >= 0.5).collect();
    let value = quadratic_value(view, &y);
    (assignment, value)
}

/// CC analog: each fractional row moves (in index order) to the simplex
/// vertex maximizing the form; ties pick the smallest label.
pub fn round_to_clustering(
    view: &SignedView,
    k: usize,
    x: &[Vec<f64>],
) -> Result<(Vec<usize>, f64), LpError> {
    let mut y: Vec<Vec<f64>> = x.to_vec();
    for (i, row) in y.iter().enumerate() {
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-7 {
            return Err(LpError::RowSum(i, sum));
        }
    }
    for i in 0..view.n {
        let integral = y[i]
            .iter()
            .all(|&v| v <= INTEGRAL_EPS || v >= 1.0 - INTEGRAL_EPS);
        if integral {
            for v in y[i].iter_mut() {
                *v = if *v >= 0.5 { 1.0 } else { 0.0 };
            }
            continue;
        }
        // Linear in row i with per-label slope d-_i + 2 sum_j eta_ij y_jl;
        // d-_i is common, so compare the neighbor sums.
        let mut best_l = 0;
        let mut best = f64::NEG_INFINITY;
        for l in 0..k {
            let nb = view.eta_neighbor_sum(i, |j| y[j][l]);
            if nb > best {
                best = nb;
                best_l = l;
            }
        }
        for (l, v) in y[i].iter_mut().enumerate() {
            *v = if l == best_l { 1.0 } else { 0.0 };
        }
    }
    let labels: Vec<usize> = y
        .iter()
        .map(|row| row.iter().position(|&v| v >= 0.5).unwrap_or(0))
        .collect();
    let value = cc_quadratic_value(view, &y);
    Ok((labels, value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p3_view() -> GraphView {
        GraphView::from_graph(&Graph::from_pairs(3, &[(0, 1), (1, 2)]).unwrap())
    }

    fn k2_view() -> GraphView {
        GraphView::from_graph(&Graph::from_pairs(2, &[(0, 1)]).unwrap())
    }

    #[test]
    fn solve_box_max() {
        let model = LpModel {
            bounds: vec![(0.0, 1.0)],
            objective: vec![1.0],
            constraints: vec![],
        };
        let sol = solve_lp(&model, 1e-7).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn solve_zero_objective() {
        let model = LpModel {
            bounds: vec![(0.0, 5.0), (0.0, 5.0)],
            objective: vec![0.0, 0.0],
            constraints: vec![LpConstraint {
                terms: vec![(0, 1.0), (1, 1.0)],
                op: Relation::Le,
                rhs: 3.0,
            }],
        };
        let sol = solve_lp(&model, 1e-7).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!(sol.objective.abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let infeasible = LpModel {
            bounds: vec![(0.0, 1.0)],
            objective: vec![1.0],
            constraints: vec![LpConstraint {
                terms: vec![(0, 1.0)],
                op: Relation::Ge,
                rhs: 2.0,
            }],
        };
        assert_eq!(solve_lp(&infeasible, 1e-7).unwrap().status, LpStatus::Infeasible);
        let unbounded = LpModel {
            bounds: vec![(0.0, f64::INFINITY)],
            objective: vec![1.0],
            constraints: vec![],
        };
        assert_eq!(solve_lp(&unbounded, 1e-7).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn maxcut_lp_shape_and_p3_optimum() {
        let view = p3_view();
        // rho from the optimal cut A = {1}.
        let lp = build_maxcut_lp(&view, &[1.0, 0.0, 1.0]).unwrap();
        assert_eq!(lp.model.num_vars(), 9);
        assert_eq!(lp.model.constraints.len(), 6);
        let sol = lp.solve(1e-7).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 2.0).abs() < 1e-7, "got {}", sol.objective);
    }

    #[test]
    fn maxcut_lp_single_vertex() {
        let view = GraphView::from_graph(&Graph::new(1, vec![]).unwrap());
        let lp = build_maxcut_lp(&view, &[0.0]).unwrap();
        let sol = lp.solve(1e-7).unwrap();
        assert!(sol.objective.abs() < 1e-9);
    }

    #[test]
    fn maxcut_lp_k2_exact_rho() {
        let view = k2_view();
        // Exact guess for the cut {0} | {1}: rho_0 = 0, rho_1 = 1.
        let lp = build_maxcut_lp(&view, &[0.0, 1.0]).unwrap();
        let sol = lp.solve(1e-7).unwrap();
        assert!((sol.objective - 1.0).abs() < 1e-7);
        // Exact-rational mode agrees.
        let exact = solve_lp_exact(&lp.model).unwrap();
        assert_eq!(exact.status, LpStatus::Optimal);
        assert!((exact.objective.to_f64() - 1.0).abs() < 1e-12);
        // A guess that matches no cut still never beats the optimum; for
        // rho = (1,1) every term is nonpositive and the optimum is 0.
        let lp = build_maxcut_lp(&view, &[1.0, 1.0]).unwrap();
        let sol = lp.solve(1e-7).unwrap();
        assert!(sol.objective.abs() < 1e-7);
    }

    #[test]
    fn lp_evaluator_cross_checks_simplex() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..30 {
            let g = crate::graph::gen_random_graph(8, 0.7, seed).unwrap();
            let view = GraphView::from_graph(&g);
            let rho: Vec<f64> = (0..8).map(|_| rng.gen_range(-2.0..4.0)).collect();
            let lp = build_maxcut_lp(&view, &rho).unwrap();
            let sol = lp.solve(1e-7).unwrap();
            let direct = maxcut_lp_objective_at(&view, &rho, &sol.values[..8]);
            assert!(
                (direct - sol.objective).abs() < 1e-6,
                "evaluator {direct} vs simplex {}",
                sol.objective
            );
            // Any x is a lower bound on the optimum.
            let x: Vec<f64> = (0..8).map(|_| rng.gen::<f64>()).collect();
            assert!(maxcut_lp_objective_at(&view, &rho, &x) <= sol.objective + 1e-7);
            // Feasibility witness: objective at x = 0 is -sum 2|rho|.
            let lb: f64 = rho.iter().map(|r| -2.0 * r.abs()).sum();
            assert!(sol.objective >= lb - 1e-9);
        }
    }

    #[test]
    fn cc_lp_two_vertices_positive_edge() {
        let g = SignedGraph::new(2, vec![(0, 1, 1.0, 0.0)]).unwrap();
        let view = SignedView::from_graph(&g);
        // Exact rho for both vertices in cluster 0.
        let rho = vec![vec![1.0, 0.0], vec![1.0, 0.0]];
        let lp = build_cc_lp(&view, 2, &rho).unwrap();
        assert_eq!(lp.model.num_vars(), 3 * 4);
        let eq_rows = lp
            .model
            .constraints
            .iter()
            .filter(|c| c.op == Relation::Eq)
            .count();
        assert_eq!(eq_rows, 2);
        let sol = lp.solve(1e-7).unwrap();
        assert!((sol.objective - 1.0).abs() < 1e-7, "got {}", sol.objective);
    }

    #[test]
    fn cc_lp_k1_degenerate() {
        let g = crate::graph::gen_planted_cc(4, 2, 0.0, 1).unwrap();
        let view = SignedView::from_graph(&g);
        let rho: Vec<Vec<f64>> = (0..4)
            .map(|i| vec![view.eta_neighbor_sum(i, |_| 1.0)])
            .collect();
        let lp = build_cc_lp(&view, 1, &rho).unwrap();
        let sol = lp.solve(1e-7).unwrap();
        // With k = 1 every x_{i1} = 1; optimum = 1/2 sum_i (rho_i + d-_i)
        // minus nothing (slacks zero because rho is exact).
        let expect: f64 = (0..4)
            .map(|i| 0.5 * (rho[i][0] + view.d_minus[i]))
            .sum();
        assert!((sol.objective - expect).abs() < 1e-7);
    }

    #[test]
    fn dual_strong_duality_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for seed in 0..50 {
            let n = rng.gen_range(2..=12);
            let g = crate::graph::gen_random_graph(n, 0.8, seed).unwrap();
            let view = GraphView::from_graph(&g);
            let rho: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..3.0)).collect();
            let primal = build_maxcut_lp(&view, &rho).unwrap().solve(1e-7).unwrap();
            let (dual, z) = dual_maxcut_optimum(&view, &rho, 1e-7).unwrap();
            assert!(
                (primal.objective - dual).abs() < 1e-6,
                "primal {} vs dual {dual}",
                primal.objective
            );
            // The optimal u given z is max{0, d - rho - sum w z}.
            let model = build_dual_maxcut(&view, &rho).unwrap();
            let sol = solve_lp(&model, 1e-7).unwrap();
            let u_opt = dual_optimal_u(&view, &rho, &z);
            let direct: f64 = (0..n).map(|i| u_opt[i] + rho[i] * z[i]).sum();
            assert!((direct - dual).abs() < 1e-6);
            let _ = sol;
        }
    }

    #[test]
    fn dual_empty_graph_zero() {
        let view = GraphView::from_graph(&Graph::new(3, vec![]).unwrap());
        let (dual, _) = dual_maxcut_optimum(&view, &[0.0; 3], 1e-7).unwrap();
        assert!(dual.abs() < 1e-9);
    }

    #[test]
    fn quadratic_values() {
        let view = k2_view();
        assert_eq!(quadratic_value(&view, &[0.0, 0.0]), 0.0);
        assert_eq!(quadratic_value(&view, &[1.0, 0.0]), 1.0);
        assert!((quadratic_value(&view, &[0.5, 0.5]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rounding_monotone_and_stable() {
        let view = k2_view();
        let (a, v) = round_to_cut(&view, &[0.5, 0.5]);
        assert_eq!(v, 1.0);
        assert_ne!(a[0], a[1]);
        // Integral x returned unchanged.
        let (a, v) = round_to_cut(&view, &[1.0, 1.0]);
        assert_eq!(a, vec![true, true]);
        assert_eq!(v, 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for seed in 0..100 {
            let g = crate::graph::gen_random_graph(10, 0.7, seed).unwrap();
            let view = GraphView::from_graph(&g);
            let x: Vec<f64> = (0..10).map(|_| rng.gen::<f64>()).collect();
            let qx = quadratic_value(&view, &x);
            let (_, qy) = round_to_cut(&view, &x);
            assert!(qy >= qx - 1e-9, "Q dropped from {qx} to {qy}");
        }
    }

    #[test]
    fn clustering_rounding_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for seed in 0..60 {
            let g = crate::graph::gen_planted_cc(8, 3, 0.3, seed).unwrap();
            let view = SignedView::from_graph(&g);
            let k = 3;
            let x: Vec<Vec<f64>> = (0..8)
                .map(|_| {
                    let raw: Vec<f64> = (0..k).map(|_| rng.gen::<f64>() + 0.01).collect();
                    let s: f64 = raw.iter().sum();
                    raw.into_iter().map(|v| v / s).collect()
                })
                .collect();
            let qx = cc_quadratic_value(&view, &x);
            let (_, qy) = round_to_clustering(&view, k, &x).unwrap();
            assert!(qy >= qx - 1e-9);
        }
    }

    #[test]
    fn clustering_rounding_k1_and_integral() {
        let g = crate::graph::gen_planted_cc(5, 2, 0.0, 2).unwrap();
        let view = SignedView::from_graph(&g);
        let x: Vec<Vec<f64>> = vec![vec![1.0]; 5];
        let (labels, v) = round_to_clustering(&view, 1, &x).unwrap();
        assert!(labels.iter().all(|&l| l == 0));
        let eta_sum: f64 = view.c_plus_total - view.c_minus_total;
        assert!((v - (view.c_minus_total + eta_sum)).abs() < 1e-9);
        // Bad row sums rejected.
        let bad = vec![vec![0.7, 0.7], vec![0.5, 0.5], vec![1.0, 0.0], vec![1.0, 0.0], vec![1.0, 0.0]];
        assert!(matches!(
            round_to_clustering(&view, 2, &bad),
            Err(LpError::RowSum(0, _))
        ));
    }

    #[test]
    fn lp_text_dump_contains_sections() {
        let view = k2_view();
        let lp = build_maxcut_lp(&view, &[1.0, 1.0]).unwrap();
        let text = lp.model.to_lp_text();
        for needle in ["Maximize", "Subject To", "Bounds", "End"] {
            assert!(text.contains(needle), "missing {needle} in dump");
        }
    }
}
