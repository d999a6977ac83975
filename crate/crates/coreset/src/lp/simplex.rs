//! Dense two-phase simplex over a generic scalar.
//!
//! The f64 instantiation is the workhorse; the exact-rational instantiation
//! backs small regression fixtures. Pivoting starts with Dantzig's rule and
//! falls back to Bland's rule after a stall budget so cycling cannot occur.

use num::rational::BigRational;
use num::{FromPrimitive, Signed, Zero};

use super::{LpError, LpModel, LpStatus, Relation};

/// Scalar the simplex runs over.
pub trait LpNum:
    Clone
    + PartialOrd
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    /// Pivot tolerance; exact scalars return zero.
    fn eps() -> Self;
    fn abs_val(&self) -> Self;
    fn is_zero_val(&self) -> bool;
}

impl LpNum for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn eps() -> Self {
        1e-9
    }
    fn abs_val(&self) -> Self {
        self.abs()
    }
    fn is_zero_val(&self) -> bool {
        self.abs() <= 1e-9
    }
}

impl LpNum for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        num::One::one()
    }
    fn from_f64(x: f64) -> Self {
        <BigRational as FromPrimitive>::from_f64(x).expect("finite coefficient")
    }
    fn to_f64(&self) -> f64 {
        num::ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn eps() -> Self {
        Zero::zero()
    }
    fn abs_val(&self) -> Self {
        Signed::abs(self)
    }
    fn is_zero_val(&self) -> bool {
        Zero::is_zero(self)
    }
}

pub struct SimplexResult<T> {
    pub status: LpStatus,
    /// Values in the model's original variable space.
    pub values: Vec<T>,
    pub objective: T,
}

struct Tableau<T> {
    rows: Vec<Vec<T>>,
    obj: Vec<T>,
    basis: Vec<usize>,
    ncols: usize,
    iterations: usize,
}

const STALL_BUDGET: usize = 2_000;
const MAX_ITER: usize = 200_000;

impl<T: LpNum> Tableau<T> {
    fn rhs(&self, r: usize) -> &T {
        &self.rows[r][self.ncols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.rows[r][c].clone();
        for x in self.rows[r].iter_mut() {
            *x = x.clone() / piv.clone();
        }
        let pivot_row = self.rows[r].clone();
        for (rr, row) in self.rows.iter_mut().enumerate() {
            if rr == r {
                continue;
            }
            let factor = row[c].clone();
            if factor.is_zero_val() {
                continue;
            }
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                *x = x.clone() - factor.clone() * p.clone();
            }
        }
        let factor = self.obj[c].clone();
        if !factor.is_zero_val() {
            for (x, p) in self.obj.iter_mut().zip(&pivot_row) {
                *x = x.clone() - factor.clone() * p.clone();
            }
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations on the current objective row until no
    /// reduced cost is positive. Columns at or beyond `col_limit` are
    /// ineligible to enter.
    fn optimize(&mut self, col_limit: usize) -> Result<LpStatus, LpError> {
        loop {
            self.iterations += 1;
            if self.iterations > MAX_ITER {
                return Err(LpError::IterationLimit);
            }
            let bland = self.iterations > STALL_BUDGET;
            let eps = T::eps();
            let mut entering = None;
            if bland {
                for j in 0..col_limit {
                    if self.obj[j] > eps {
                        entering = Some(j);
                        break;
                    }
                }
            } else {
                let mut best = eps.clone();
                for j in 0..col_limit {
                    if self.obj[j] > best {
                        best = self.obj[j].clone();
                        entering = Some(j);
                    }
                }
            }
            let Some(j) = entering else {
                return Ok(LpStatus::Optimal);
            };
            // Ratio test; ties broken by smallest basic variable index.
            let mut leave: Option<(usize, T)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][j];
                if *a > eps {
                    let ratio = self.rhs(r).clone() / a.clone();
                    match &leave {
                        None => leave = Some((r, ratio)),
                        Some((br, bratio)) => {
                            if ratio < *bratio
                                || (ratio == *bratio && self.basis[r] < self.basis[*br])
                            {
                                leave = Some((r, ratio));
                            }
                        }
                    }
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, j),
                None => return Ok(LpStatus::Unbounded),
            }
        }
    }
}

/// Solves `model` (a maximization) over scalar T.
pub fn solve_model<T: LpNum>(model: &LpModel) -> Result<SimplexResult<T>, LpError> {
    model.validate()?;
    let nv = model.num_vars();

    // Shift every variable to y_j = x_j - lo_j >= 0 and collect rows.
    let mut rows: Vec<(Vec<T>, Relation, T)> = Vec::new();
    let mut shift = Vec::with_capacity(nv);
    for j in 0..nv {
        let (lo, hi) = model.bounds[j];
        shift.push(lo);
        if hi.is_finite() {
            let mut coeffs = vec![T::zero(); nv];
            coeffs[j] = T::one();
            rows.push((coeffs, Relation::Le, T::from_f64(hi - lo)));
        }
    }
    for c in &model.constraints {
        let mut coeffs = vec![T::zero(); nv];
        let mut rhs = c.rhs;
        for &(j, a) in &c.terms {
            coeffs[j] = coeffs[j].clone() + T::from_f64(a);
            rhs -= a * shift[j];
        }
        rows.push((coeffs, c.op, T::from_f64(rhs)));
    }

    // Normalize so every rhs is nonnegative.
    for (coeffs, rel, rhs) in rows.iter_mut() {
        if *rhs < T::zero() {
            for x in coeffs.iter_mut() {
                *x = -x.clone();
            }
            *rhs = -rhs.clone();
            *rel = match *rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let nrows = rows.len();
    let n_slack = rows
        .iter()
        .filter(|(_, rel, _)| !matches!(rel, Relation::Eq))
        .count();
    let n_art = rows
        .iter()
        .filter(|(_, rel, _)| !matches!(rel, Relation::Le))
        .count();
    let art_start = nv + n_slack;
    let ncols = nv + n_slack + n_art;

    let mut tab = Tableau {
        rows: Vec::with_capacity(nrows),
        obj: vec![T::zero(); ncols + 1],
        basis: vec![0; nrows],
        ncols,
        iterations: 0,
    };

    let mut slack_at = nv;
    let mut art_at = art_start;
    for (r, (coeffs, rel, rhs)) in rows.into_iter().enumerate() {
        let mut row = vec![T::zero(); ncols + 1];
        for (j, x) in coeffs.into_iter().enumerate() {
            row[j] = x;
        }
        row[ncols] = rhs;
        match rel {
            Relation::Le => {
                row[slack_at] = T::one();
                tab.basis[r] = slack_at;
                slack_at += 1;
            }
            Relation::Ge => {
                row[slack_at] = -T::one();
                slack_at += 1;
                row[art_at] = T::one();
                tab.basis[r] = art_at;
                art_at += 1;
            }
            Relation::Eq => {
                row[art_at] = T::one();
                tab.basis[r] = art_at;
                art_at += 1;
            }
        }
        tab.rows.push(row);
    }

    // Phase 1: maximize -sum(artificials).
    if n_art > 0 {
        for j in art_start..ncols {
            tab.obj[j] = -T::one();
        }
        // Zero out the reduced costs of the basic artificials.
        for r in 0..nrows {
            if tab.basis[r] >= art_start {
                let row = tab.rows[r].clone();
                for (x, p) in tab.obj.iter_mut().zip(&row) {
                    *x = x.clone() + p.clone();
                }
            }
        }
        let status = tab.optimize(ncols)?;
        if status == LpStatus::Unbounded {
            return Err(LpError::Internal("phase 1 unbounded".into()));
        }
        let phase1 = -tab.obj[ncols].clone();
        let feas_tol = T::from_f64(1e-7);
        if phase1 < -feas_tol.clone() {
            return Ok(SimplexResult {
                status: LpStatus::Infeasible,
                values: Vec::new(),
                objective: T::zero(),
            });
        }
        // Drive remaining artificials out of the basis where possible.
        for r in 0..nrows {
            if tab.basis[r] >= art_start {
                let eps = T::eps();
                let col = (0..art_start).find(|&j| tab.rows[r][j].abs_val() > eps);
                if let Some(j) = col {
                    tab.pivot(r, j);
                }
            }
        }
    }

    // Phase 2: the real objective.
    for x in tab.obj.iter_mut() {
        *x = T::zero();
    }
    for j in 0..nv {
        tab.obj[j] = T::from_f64(model.objective[j]);
    }
    for r in 0..nrows {
        let b = tab.basis[r];
        if b >= art_start {
            continue;
        }
        let c = tab.obj[b].clone();
        if c.is_zero_val() {
            continue;
        }
        let row = tab.rows[r].clone();
        for (x, p) in tab.obj.iter_mut().zip(&row) {
            *x = x.clone() - c.clone() * p.clone();
        }
    }
    let status = tab.optimize(art_start)?;
    if status == LpStatus::Unbounded {
        return Ok(SimplexResult {
            status,
            values: Vec::new(),
            objective: T::zero(),
        });
    }

    let mut values = vec![T::zero(); nv];
    for r in 0..nrows {
        if tab.basis[r] < nv {
            values[tab.basis[r]] = tab.rhs(r).clone();
        }
    }
    for (j, v) in values.iter_mut().enumerate() {
        *v = v.clone() + T::from_f64(shift[j]);
    }
    let mut objective = T::zero();
    for (j, v) in values.iter().enumerate() {
        objective = objective + T::from_f64(model.objective[j]) * v.clone();
    }
    Ok(SimplexResult {
        status: LpStatus::Optimal,
        values,
        objective,
    })
}
