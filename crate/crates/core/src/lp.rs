//! Dense two-phase primal simplex.
//!
//! The threshold problems solved here have a few dozen variables and at most
//! a few hundred rows, so a dense tableau is plenty. The entering column is
//! the lowest-index improving one (Bland); the leaving row comes from a Harris
//! two-pass ratio test, which avoids tiny pivots on degenerate rows. Every
//! choice is a deterministic function of the input.

use crate::error::{IhwError, Result};

const PIVOT_TOL: f64 = 1e-9;
const FEASIBILITY_TOL: f64 = 1e-8;
const HARRIS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `maximize objective·x` subject to linear constraints and box bounds.
///
/// Variables default to `[0, +inf)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
    bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            constraints: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    /// Sparse form of [`add_constraint`](Self::add_constraint).
    pub fn add_sparse(&mut self, terms: &[(usize, f64)], relation: Relation, rhs: f64) {
        let mut coeffs = vec![0.0; self.num_vars()];
        for &(j, a) in terms {
            coeffs[j] += a;
        }
        self.add_constraint(coeffs, relation, rhs);
    }

    pub fn set_bounds(&mut self, var: usize, lo: f64, hi: f64) {
        self.bounds[var] = (lo, hi);
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(IhwError::DimensionMismatch("objective is not finite".into()));
        }
        if self.bounds.len() != n {
            return Err(IhwError::DimensionMismatch(format!(
                "{} bounds for {n} variables",
                self.bounds.len()
            )));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(IhwError::DimensionMismatch(format!(
                    "constraint {i} has {} coefficients for {n} variables",
                    c.coeffs.len()
                )));
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|a| !a.is_finite()) {
                return Err(IhwError::DimensionMismatch(format!(
                    "constraint {i} is not finite"
                )));
            }
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(IhwError::DimensionMismatch(format!(
                    "variable {j} has invalid bounds [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Empty unless `status` is optimal.
    pub primal: Vec<f64>,
    pub objective_value: f64,
}

impl LpSolution {
    fn without_point(status: LpStatus) -> Self {
        let objective_value = match status {
            LpStatus::Unbounded => f64::INFINITY,
            _ => f64::NAN,
        };
        LpSolution {
            status,
            primal: Vec::new(),
            objective_value,
        }
    }
}

/// How an original variable is rebuilt from nonnegative tableau columns.
struct VarMap {
    offset: f64,
    cols: Vec<(usize, f64)>,
}

/// Solves the LP; returns the first optimal vertex reached.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    if lp.bounds.iter().any(|&(lo, hi)| lo > hi) {
        return Ok(LpSolution::without_point(LpStatus::Infeasible));
    }

    // Shift and split variables so every tableau column is >= 0.
    let mut maps = Vec::with_capacity(lp.num_vars());
    let mut ncols = 0;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for &(lo, hi) in &lp.bounds {
        if lo.is_finite() {
            if hi.is_finite() {
                bound_rows.push((ncols, hi - lo));
            }
            maps.push(VarMap {
                offset: lo,
                cols: vec![(ncols, 1.0)],
            });
            ncols += 1;
        } else if hi.is_finite() {
            maps.push(VarMap {
                offset: hi,
                cols: vec![(ncols, -1.0)],
            });
            ncols += 1;
        } else {
            maps.push(VarMap {
                offset: 0.0,
                cols: vec![(ncols, 1.0), (ncols + 1, -1.0)],
            });
            ncols += 2;
        }
    }
    let mut cost = vec![0.0; ncols];
    for (c, map) in lp.objective.iter().zip(&maps) {
        for &(col, sign) in &map.cols {
            cost[col] += c * sign;
        }
    }

    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::new();
    for con in &lp.constraints {
        let mut coeffs = vec![0.0; ncols];
        let mut rhs = con.rhs;
        for (a, map) in con.coeffs.iter().zip(&maps) {
            if *a == 0.0 {
                continue;
            }
            rhs -= a * map.offset;
            for &(col, sign) in &map.cols {
                coeffs[col] += a * sign;
            }
        }
        rows.push((coeffs, con.relation, rhs));
    }
    for (col, width) in bound_rows {
        let mut coeffs = vec![0.0; ncols];
        coeffs[col] = 1.0;
        rows.push((coeffs, Relation::Le, width));
    }

    // Equilibrate, drop empty rows and make every right-hand side nonnegative.
    let mut kept = Vec::with_capacity(rows.len());
    for (mut coeffs, mut rel, mut rhs) in rows {
        let scale = coeffs.iter().fold(0.0f64, |s, a| s.max(a.abs()));
        if scale == 0.0 {
            let ok = match rel {
                Relation::Le => rhs >= -FEASIBILITY_TOL,
                Relation::Ge => rhs <= FEASIBILITY_TOL,
                Relation::Eq => rhs.abs() <= FEASIBILITY_TOL,
            };
            if !ok {
                return Ok(LpSolution::without_point(LpStatus::Infeasible));
            }
            continue;
        }
        coeffs.iter_mut().for_each(|a| *a /= scale);
        rhs /= scale;
        if rhs < 0.0 {
            coeffs.iter_mut().for_each(|a| *a = -*a);
            rhs = -rhs;
            rel = match rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
        kept.push((coeffs, rel, rhs));
    }

    let mut tableau = Tableau::build(ncols, &kept, cost);
    if !tableau.phase_one()? {
        return Ok(LpSolution::without_point(LpStatus::Infeasible));
    }
    if !tableau.phase_two()? {
        return Ok(LpSolution::without_point(LpStatus::Unbounded));
    }

    let to_primal = |y: &[f64]| -> Vec<f64> {
        maps.iter()
            .zip(&lp.bounds)
            .map(|(map, &(lo, hi))| {
                let x = map.offset + map.cols.iter().map(|&(col, sign)| sign * y[col]).sum::<f64>();
                x.clamp(lo, hi)
            })
            .collect()
    };
    let mut primal = to_primal(&tableau.basic_solution());
    if let Err(err) = check_feasible(lp, &primal) {
        // Accumulated pivoting error: re-solve the final basis from the
        // original rows.
        let refined = tableau.refined_solution().map(|y| to_primal(&y));
        match refined {
            Some(x) if check_feasible(lp, &x).is_ok() => primal = x,
            _ => return Err(err),
        }
    }
    let objective_value = lp.objective.iter().zip(&primal).map(|(c, x)| c * x).sum();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        primal,
        objective_value,
    })
}

fn check_feasible(lp: &LinearProgram, x: &[f64]) -> Result<()> {
    for (i, con) in lp.constraints.iter().enumerate() {
        let mut lhs = 0.0;
        let mut scale = con.rhs.abs();
        for (a, v) in con.coeffs.iter().zip(x) {
            lhs += a * v;
            scale = scale.max((a * v).abs()).max(a.abs());
        }
        let tol = FEASIBILITY_TOL * scale.max(1.0);
        let ok = match con.relation {
            Relation::Le => lhs <= con.rhs + tol,
            Relation::Ge => lhs >= con.rhs - tol,
            Relation::Eq => (lhs - con.rhs).abs() <= tol,
        };
        if !ok {
            return Err(IhwError::NumericalFailure(format!(
                "constraint {i} violated at the returned vertex: lhs {lhs}, rhs {}",
                con.rhs
            )));
        }
    }
    Ok(())
}

struct Tableau {
    /// Row-major constraint rows, each `width` long with the rhs last.
    cells: Vec<f64>,
    /// Reduced costs with `-objective` in the last slot.
    reduced: Vec<f64>,
    width: usize,
    nrows: usize,
    basis: Vec<usize>,
    cost: Vec<f64>,
    first_artificial: usize,
    /// Rows as built, and the built row behind each current row.
    original: Vec<f64>,
    row_ids: Vec<usize>,
}

impl Tableau {
    fn build(nstruct: usize, rows: &[(Vec<f64>, Relation, f64)], mut cost: Vec<f64>) -> Self {
        let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let first_artificial = nstruct + n_slack;
        let ncols = first_artificial + n_art;
        let width = ncols + 1;
        let nrows = rows.len();
        let mut cells = vec![0.0; nrows * width];
        let mut basis = Vec::with_capacity(nrows);
        let (mut slack, mut art) = (nstruct, first_artificial);
        for (i, (coeffs, rel, rhs)) in rows.iter().enumerate() {
            let row = &mut cells[i * width..(i + 1) * width];
            row[..nstruct].copy_from_slice(coeffs);
            row[ncols] = *rhs;
            match rel {
                Relation::Le => {
                    row[slack] = 1.0;
                    basis.push(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -1.0;
                    slack += 1;
                    row[art] = 1.0;
                    basis.push(art);
                    art += 1;
                }
                Relation::Eq => {
                    row[art] = 1.0;
                    basis.push(art);
                    art += 1;
                }
            }
        }
        cost.resize(ncols, 0.0);
        Tableau {
            original: cells.clone(),
            row_ids: (0..nrows).collect(),
            cells,
            reduced: vec![0.0; width],
            width,
            nrows,
            basis,
            cost,
            first_artificial,
        }
    }

    fn ncols(&self) -> usize {
        self.width - 1
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.cells[i * self.width..(i + 1) * self.width]
    }

    fn price(&mut self, cost: &[f64]) {
        let w = self.width;
        self.reduced = cost.to_vec();
        self.reduced.push(0.0);
        for i in 0..self.nrows {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (r, a) in self.reduced.iter_mut().zip(&self.cells[i * w..(i + 1) * w]) {
                    *r -= cb * a;
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let w = self.width;
        let inv = 1.0 / self.cells[r * w + e];
        for v in &mut self.cells[r * w..(r + 1) * w] {
            *v *= inv;
        }
        self.cells[r * w + e] = 1.0;
        let pivot_row: Vec<f64> = self.row(r).to_vec();
        for i in 0..self.nrows {
            if i == r {
                continue;
            }
            let f = self.cells[i * w + e];
            if f != 0.0 {
                let row = &mut self.cells[i * w..(i + 1) * w];
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
                row[e] = 0.0;
                if row[w - 1] < 0.0 && row[w - 1] > -FEASIBILITY_TOL {
                    row[w - 1] = 0.0;
                }
            }
        }
        let f = self.reduced[e];
        if f != 0.0 {
            for (v, p) in self.reduced.iter_mut().zip(&pivot_row) {
                *v -= f * p;
            }
            self.reduced[e] = 0.0;
        }
        self.basis[r] = e;
    }

    /// Runs the simplex over columns `< col_limit`. Returns false if unbounded.
    fn iterate(&mut self, col_limit: usize) -> Result<bool> {
        let w = self.width;
        let max_iter = 1000 + 50 * (self.nrows + w);
        for _ in 0..max_iter {
            let Some(e) = (0..col_limit).find(|&j| self.reduced[j] > PIVOT_TOL) else {
                return Ok(true);
            };
            // Harris two-pass ratio test: bound the step with a small
            // feasibility slack, then take the largest pivot within it.
            let mut step = f64::INFINITY;
            for i in 0..self.nrows {
                let a = self.cells[i * w + e];
                if a > PIVOT_TOL {
                    let rhs = self.cells[i * w + w - 1].max(0.0);
                    step = step.min((rhs + HARRIS_TOL) / a);
                }
            }
            if step == f64::INFINITY {
                return Ok(false);
            }
            let mut leave: Option<usize> = None;
            for i in 0..self.nrows {
                let a = self.cells[i * w + e];
                if a > PIVOT_TOL && self.cells[i * w + w - 1].max(0.0) / a <= step {
                    leave = match leave {
                        Some(best) => {
                            let b = self.cells[best * w + e];
                            if a > b || a == b && self.basis[i] < self.basis[best] {
                                Some(i)
                            } else {
                                Some(best)
                            }
                        }
                        None => Some(i),
                    };
                }
            }
            let r = leave.expect("a row attains the Harris bound");
            self.pivot(r, e);
        }
        Err(IhwError::NumericalFailure(format!(
            "no convergence after {max_iter} pivots"
        )))
    }

    /// Finds a feasible basis; false if the LP is infeasible.
    fn phase_one(&mut self) -> Result<bool> {
        let ncols = self.ncols();
        if self.first_artificial == ncols {
            return Ok(true);
        }
        let phase_cost: Vec<f64> = (0..ncols)
            .map(|j| if j >= self.first_artificial { -1.0 } else { 0.0 })
            .collect();
        self.price(&phase_cost);
        self.iterate(ncols)?;
        let infeasibility = self.reduced[ncols];
        let scale = (0..self.nrows).map(|i| self.row(i)[ncols]).fold(1.0, f64::max);
        if infeasibility > FEASIBILITY_TOL * scale {
            return Ok(false);
        }

        // Drive remaining (zero-valued) artificials out of the basis.
        let mut i = 0;
        while i < self.nrows {
            if self.basis[i] >= self.first_artificial {
                let row = self.row(i);
                let entering = (0..self.first_artificial)
                    .filter(|j| row[*j].abs() > PIVOT_TOL)
                    .max_by(|a, b| row[*a].abs().total_cmp(&row[*b].abs()));
                match entering {
                    Some(e) => self.pivot(i, e),
                    None => {
                        self.remove_row(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        Ok(true)
    }

    fn remove_row(&mut self, i: usize) {
        let w = self.width;
        self.cells.drain(i * w..(i + 1) * w);
        self.basis.remove(i);
        self.row_ids.remove(i);
        self.nrows -= 1;
    }

    /// Optimizes the real objective; false if unbounded.
    fn phase_two(&mut self) -> Result<bool> {
        let cost = self.cost.clone();
        self.price(&cost);
        self.iterate(self.first_artificial)
    }

    /// Basic solution from `B y_B = b` on the original rows (Gaussian
    /// elimination with partial pivoting); None if `B` is singular.
    fn refined_solution(&self) -> Option<Vec<f64>> {
        let (n, w) = (self.nrows, self.width);
        let mut a: Vec<Vec<f64>> = self
            .row_ids
            .iter()
            .map(|&r| {
                let row = &self.original[r * w..(r + 1) * w];
                let mut v: Vec<f64> = self.basis.iter().map(|&b| row[b]).collect();
                v.push(row[w - 1]);
                v
            })
            .collect();
        for col in 0..n {
            let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
            if a[pivot][col].abs() < 1e-14 {
                return None;
            }
            a.swap(col, pivot);
            for i in col + 1..n {
                let f = a[i][col] / a[col][col];
                if f != 0.0 {
                    for k in col..=n {
                        a[i][k] -= f * a[col][k];
                    }
                }
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let tail: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
            x[i] = (a[i][n] - tail) / a[i][i];
        }
        let mut y = vec![0.0; self.ncols()];
        for (&b, v) in self.basis.iter().zip(x) {
            y[b] = v.max(0.0);
        }
        Some(y)
    }

    fn basic_solution(&self) -> Vec<f64> {
        let mut y = vec![0.0; self.ncols()];
        for (i, &b) in self.basis.iter().enumerate() {
            y[b] = self.row(i)[self.width - 1].max(0.0);
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_upper_bound() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add_constraint(vec![1.0], Relation::Le, 3.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.primal[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_face() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.add_constraint(vec![1.0, 1.0], Relation::Le, 1.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add_constraint(vec![1.0], Relation::Ge, 2.0);
        lp.add_constraint(vec![1.0], Relation::Le, 1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_ray() {
        let mut lp = LinearProgram::new(vec![1.0, 0.0]);
        lp.add_constraint(vec![1.0, -1.0], Relation::Le, 1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn free_and_negative_bounds() {
        // maximize -x - y with x free, y <= -1, x >= y + 0.5
        let mut lp = LinearProgram::new(vec![-1.0, -1.0]);
        lp.set_bounds(0, f64::NEG_INFINITY, f64::INFINITY);
        lp.set_bounds(1, f64::NEG_INFINITY, -1.0);
        lp.add_constraint(vec![1.0, -1.0], Relation::Ge, 0.5);
        lp.add_constraint(vec![0.0, 1.0], Relation::Ge, -4.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.primal[0] + 3.5).abs() < 1e-9 && (sol.primal[1] + 4.0).abs() < 1e-9);
        assert!((sol.objective_value - 7.5).abs() < 1e-9, "{sol:?}");
    }

    #[test]
    fn equality_with_redundant_row() {
        let mut lp = LinearProgram::new(vec![1.0, 2.0]);
        lp.add_constraint(vec![1.0, 1.0], Relation::Eq, 1.0);
        lp.add_constraint(vec![2.0, 2.0], Relation::Eq, 2.0);
        let sol = solve_lp(&lp).unwrap();
        assert!((sol.objective_value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.add_constraint(vec![1.0], Relation::Le, 1.0);
        assert!(matches!(solve_lp(&lp), Err(IhwError::DimensionMismatch(_))));
    }

    /// Best objective over all vertices of {x in box, constraints} by
    /// enumerating every choice of `n` active hyperplanes.
    pub(crate) fn vertex_enumeration(lp: &LinearProgram) -> Option<f64> {
        let n = lp.num_vars();
        let mut planes: Vec<(Vec<f64>, f64)> = lp
            .constraints()
            .iter()
            .map(|c| (c.coeffs.clone(), c.rhs))
            .collect();
        for (j, &(lo, hi)) in lp.bounds().iter().enumerate() {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            if lo.is_finite() {
                planes.push((e.clone(), lo));
            }
            if hi.is_finite() {
                planes.push((e, hi));
            }
        }
        let mut best: Option<f64> = None;
        let mut pick = Vec::new();
        combos(planes.len(), n, 0, &mut pick, &mut |idx| {
            let a: Vec<Vec<f64>> = idx.iter().map(|&k| planes[k].0.clone()).collect();
            let b: Vec<f64> = idx.iter().map(|&k| planes[k].1).collect();
            if let Some(x) = solve_dense(a, b) {
                if feasible(lp, &x) {
                    let v: f64 = lp.objective().iter().zip(&x).map(|(c, x)| c * x).sum();
                    best = Some(best.map_or(v, |b: f64| b.max(v)));
                }
            }
        });
        best
    }

    fn combos(n: usize, k: usize, start: usize, pick: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if pick.len() == k {
            f(pick);
            return;
        }
        for i in start..n {
            pick.push(i);
            combos(n, k, i + 1, pick, f);
            pick.pop();
        }
    }

    fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
        let n = b.len();
        for c in 0..n {
            let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
            if a[p][c].abs() < 1e-10 {
                return None;
            }
            a.swap(c, p);
            b.swap(c, p);
            for r in 0..n {
                if r != c {
                    let f = a[r][c] / a[c][c];
                    for k in c..n {
                        a[r][k] -= f * a[c][k];
                    }
                    b[r] -= f * b[c];
                }
            }
        }
        Some((0..n).map(|i| b[i] / a[i][i]).collect())
    }

    fn feasible(lp: &LinearProgram, x: &[f64]) -> bool {
        let tol = 1e-7;
        lp.bounds().iter().zip(x).all(|(&(lo, hi), &v)| v >= lo - tol && v <= hi + tol)
            && lp.constraints().iter().all(|c| {
                let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
                match c.relation {
                    Relation::Le => lhs <= c.rhs + tol,
                    Relation::Ge => lhs >= c.rhs - tol,
                    Relation::Eq => (lhs - c.rhs).abs() <= tol,
                }
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn matches_vertex_enumeration(
            n in 1usize..=4,
            rows in prop::collection::vec((prop::collection::vec(-3.0f64..3.0, 4), 0.0f64..5.0, 0u8..3), 1..6),
            obj in prop::collection::vec(-2.0f64..2.0, 4),
        ) {
            let mut lp = LinearProgram::new(obj[..n].to_vec());
            for j in 0..n {
                lp.set_bounds(j, 0.0, 4.0);
            }
            for (a, b, kind) in rows {
                let rel = match kind { 0 => Relation::Le, 1 => Relation::Ge, _ => Relation::Eq };
                lp.add_constraint(a[..n].to_vec(), rel, b);
            }
            let sol = solve_lp(&lp).unwrap();
            match vertex_enumeration(&lp) {
                Some(best) => {
                    prop_assert_eq!(sol.status, LpStatus::Optimal);
                    prop_assert!((sol.objective_value - best).abs() < 1e-6, "{} vs {}", sol.objective_value, best);
                }
                None => prop_assert_eq!(sol.status, LpStatus::Infeasible),
            }
        }
    }
}
