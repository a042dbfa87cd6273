//! Complex-Hermitian modeling on top of the real solver.
//!
//! A Hermitian PSD variable `J` of side `n` is stored as a real PSD block `Y`
//! of side `2n` and read back as `J = (Y11 + Y22)/2 + i (Y21 - Y12)/2`; this
//! map sends PSD to PSD and is onto, so the realified program is exact.

use num_complex::Complex64;

use super::ipm::{self, ConicProgram, ConicResult, Constraint, RMat, Sense, Status, SymEntry};
use crate::error::{Error, Result};
use crate::linalg::{c, CMat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Free(usize),
    /// Real symmetric block entry with `r <= c`.
    Entry { block: usize, r: usize, c: usize },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinExpr {
    pub terms: Vec<(Atom, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(v: f64) -> Self {
        Self {
            terms: Vec::new(),
            constant: v,
        }
    }

    pub fn atom(a: Atom, v: f64) -> Self {
        Self {
            terms: vec![(a, v)],
            constant: 0.0,
        }
    }

    pub fn add_scaled(&mut self, other: &LinExpr, s: f64) {
        if s == 0.0 {
            return;
        }
        self.terms.extend(other.terms.iter().map(|&(a, v)| (a, v * s)));
        self.constant += other.constant * s;
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = Self::zero();
        out.add_scaled(self, s);
        out
    }

    pub fn plus(&self, other: &LinExpr) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, 1.0);
        out
    }

    pub fn minus(&self, other: &LinExpr) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, -1.0);
        out
    }

    /// Merges duplicate atoms and drops zeros.
    pub fn compact(&mut self) {
        self.terms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(Atom, f64)> = Vec::with_capacity(self.terms.len());
        for &(a, v) in &self.terms {
            match out.last_mut() {
                Some(last) if last.0 == a => last.1 += v,
                _ => out.push((a, v)),
            }
        }
        out.retain(|t| t.1 != 0.0);
        self.terms = out;
    }
}

/// `re + i im`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CExpr {
    pub re: LinExpr,
    pub im: LinExpr,
}

impl CExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(z: Complex64) -> Self {
        Self {
            re: LinExpr::constant(z.re),
            im: LinExpr::constant(z.im),
        }
    }

    pub fn real(e: LinExpr) -> Self {
        Self { re: e, im: LinExpr::zero() }
    }

    /// `self += z * other`.
    pub fn add_mul(&mut self, other: &CExpr, z: Complex64) {
        self.re.add_scaled(&other.re, z.re);
        self.re.add_scaled(&other.im, -z.im);
        self.im.add_scaled(&other.im, z.re);
        self.im.add_scaled(&other.re, z.im);
    }

    pub fn conj(&self) -> Self {
        Self {
            re: self.re.clone(),
            im: self.im.scaled(-1.0),
        }
    }
}

/// Dense complex matrix of affine expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatExpr {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<CExpr>,
}

impl CMatExpr {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![CExpr::zero(); rows * cols],
        }
    }

    pub fn from_const(m: &CMat) -> Self {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                *out.at_mut(i, j) = CExpr::constant(m[(i, j)]);
            }
        }
        out
    }

    pub fn at(&self, i: usize, j: usize) -> &CExpr {
        &self.data[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut CExpr {
        &mut self.data[i * self.cols + j]
    }

    /// `self += z * other`.
    pub fn add_mul(&mut self, other: &CMatExpr, z: Complex64) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            a.add_mul(b, z);
        }
    }

    pub fn add_const(&mut self, m: &CMat, s: f64) {
        for i in 0..self.rows {
            for j in 0..self.cols {
                let z = m[(i, j)] * s;
                let e = self.at_mut(i, j);
                e.re.constant += z.re;
                e.im.constant += z.im;
            }
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = Self::zeros(self.rows, self.cols);
        out.add_mul(self, c(s, 0.0));
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *out.at_mut(j, i) = self.at(i, j).conj();
            }
        }
        out
    }

    /// `self (x) m` for a constant right factor.
    pub fn kron_const(&self, m: &CMat) -> Self {
        let (p, q) = (m.nrows(), m.ncols());
        let mut out = Self::zeros(self.rows * p, self.cols * q);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let e = self.at(i, j);
                for a in 0..p {
                    for b in 0..q {
                        let z = m[(a, b)];
                        if z != c(0.0, 0.0) {
                            out.at_mut(i * p + a, j * q + b).add_mul(e, z);
                        }
                    }
                }
            }
        }
        out
    }

    /// `(self + self^dagger)/2`.
    pub fn herm_part(&self) -> Self {
        let mut out = self.scaled(0.5);
        out.add_mul(&self.adjoint(), c(0.5, 0.0));
        out
    }

    /// Block matrix from a grid of equally shaped blocks.
    pub fn blocks(grid: &[Vec<CMatExpr>]) -> Self {
        let br = grid[0][0].rows;
        let bc = grid[0][0].cols;
        let mut out = Self::zeros(br * grid.len(), bc * grid[0].len());
        for (gi, row) in grid.iter().enumerate() {
            for (gj, blk) in row.iter().enumerate() {
                for i in 0..br {
                    for j in 0..bc {
                        *out.at_mut(gi * br + i, gj * bc + j) = blk.at(i, j).clone();
                    }
                }
            }
        }
        out
    }

    /// `sum_{i,i'} self_{(i,a),(i',b)} w_{i,i'}` over the first tensor factor of side `n`.
    pub fn contract_input(&self, n: usize, w: &CMat) -> Self {
        let m = self.rows / n;
        let mut out = Self::zeros(m, m);
        for i in 0..n {
            for k in 0..n {
                let z = w[(i, k)];
                if z == c(0.0, 0.0) {
                    continue;
                }
                for a in 0..m {
                    for b in 0..m {
                        let e = self.at(i * m + a, k * m + b).clone();
                        out.at_mut(a, b).add_mul(&e, z);
                    }
                }
            }
        }
        out
    }

    /// Real pairing `Re tr(H * self)` with a constant `H`.
    pub fn re_trace_with(&self, h: &CMat) -> LinExpr {
        let mut out = LinExpr::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                // tr(H E) = sum_{i,j} H_{j,i} E_{i,j}
                let z = h[(j, i)];
                if z == c(0.0, 0.0) {
                    continue;
                }
                let e = self.at(i, j);
                out.add_scaled(&e.re, z.re);
                out.add_scaled(&e.im, -z.im);
            }
        }
        out
    }

    pub fn trace_re(&self) -> LinExpr {
        let mut out = LinExpr::zero();
        for i in 0..self.rows.min(self.cols) {
            out.add_scaled(&self.at(i, i).re, 1.0);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HermVar {
    pub block: usize,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RealVar {
    pub block: usize,
    pub n: usize,
}

/// Row indices of a matrix equality, used to rebuild its multiplier matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MatEq {
    pub rows: usize,
    pub cols: usize,
    pub hermitian: bool,
    /// `(i, j, re_row, im_row)`; missing rows are `None`.
    pub index: Vec<(usize, usize, Option<usize>, Option<usize>)>,
}

#[derive(Debug, Clone)]
pub struct Model {
    blocks: Vec<usize>,
    n_free: usize,
    constraints: Vec<Constraint>,
    objective: LinExpr,
    sense: Sense,
    trace_bounds: Vec<Option<f64>>,
    free_bound: Option<f64>,
}

impl Default for Model {
    fn default() -> Self {
        Self::new()
    }
}

impl HermVar {
    pub fn entry(&self, p: usize, q: usize) -> CExpr {
        let n = self.n;
        let b = self.block;
        let at = |r: usize, c: usize, v: f64| {
            let (r, c) = if r <= c { (r, c) } else { (c, r) };
            LinExpr::atom(Atom::Entry { block: b, r, c }, v)
        };
        let re = at(p, q, 0.5).plus(&at(n + p, n + q, 0.5));
        let im = if p == q {
            LinExpr::zero()
        } else {
            at(n + p, q, 0.5).minus(&at(p, n + q, 0.5))
        };
        CExpr { re, im }
    }

    pub fn expr(&self) -> CMatExpr {
        let mut out = CMatExpr::zeros(self.n, self.n);
        for p in 0..self.n {
            for q in 0..self.n {
                *out.at_mut(p, q) = self.entry(p, q);
            }
        }
        out
    }
}

impl RealVar {
    pub fn entry(&self, r: usize, c: usize) -> LinExpr {
        let (r, c) = if r <= c { (r, c) } else { (c, r) };
        LinExpr::atom(Atom::Entry { block: self.block, r, c }, 1.0)
    }
}

impl Model {
    pub fn new() -> Self {
        Self {
            blocks: Vec::new(),
            n_free: 0,
            constraints: Vec::new(),
            objective: LinExpr::zero(),
            sense: Sense::Feasibility,
            trace_bounds: Vec::new(),
            free_bound: None,
        }
    }

    pub fn herm_psd(&mut self, n: usize) -> HermVar {
        self.blocks.push(2 * n);
        self.trace_bounds.push(None);
        HermVar {
            block: self.blocks.len() - 1,
            n,
        }
    }

    pub fn real_psd(&mut self, n: usize) -> RealVar {
        self.blocks.push(n);
        self.trace_bounds.push(None);
        RealVar {
            block: self.blocks.len() - 1,
            n,
        }
    }

    /// A scalar constrained to be nonnegative.
    pub fn nonneg(&mut self) -> LinExpr {
        let v = self.real_psd(1);
        v.entry(0, 0)
    }

    pub fn free(&mut self) -> LinExpr {
        self.n_free += 1;
        LinExpr::atom(Atom::Free(self.n_free - 1), 1.0)
    }

    /// Declares `tr J <= t` for a Hermitian variable (used only for certified bounds).
    pub fn bound_trace(&mut self, v: HermVar, t: f64) {
        self.trace_bounds[v.block] = Some(2.0 * t);
    }

    pub fn bound_real_trace(&mut self, v: RealVar, t: f64) {
        self.trace_bounds[v.block] = Some(t);
    }

    pub fn bound_free(&mut self, t: f64) {
        self.free_bound = Some(t);
    }

    pub fn n_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// `expr = rhs`; returns the row index.
    pub fn eq(&mut self, expr: &LinExpr, rhs: f64) -> usize {
        let mut e = expr.clone();
        e.compact();
        let mut con = Constraint {
            free: Vec::new(),
            entries: Vec::new(),
            rhs: rhs - e.constant,
        };
        for &(a, v) in &e.terms {
            match a {
                Atom::Free(i) => con.free.push((i, v)),
                Atom::Entry { block, r, c } => {
                    let coef = if r == c { v } else { 0.5 * v };
                    con.entries.push((block, SymEntry::new(r, c, coef)));
                }
            }
        }
        self.constraints.push(con);
        self.constraints.len() - 1
    }

    /// Entrywise equality of a matrix expression with a constant. With
    /// `hermitian`, both sides are assumed Hermitian and only the upper
    /// triangle is constrained.
    pub fn eq_matrix(&mut self, expr: &CMatExpr, target: &CMat, hermitian: bool) -> MatEq {
        let mut index = Vec::new();
        for i in 0..expr.rows {
            for j in 0..expr.cols {
                if hermitian && j < i {
                    continue;
                }
                let e = expr.at(i, j);
                let t = target[(i, j)];
                let re = self.eq_nontrivial(&e.re, t.re);
                let im = if hermitian && i == j { None } else { self.eq_nontrivial(&e.im, t.im) };
                index.push((i, j, re, im));
            }
        }
        MatEq {
            rows: expr.rows,
            cols: expr.cols,
            hermitian,
            index,
        }
    }

    fn eq_nontrivial(&mut self, e: &LinExpr, rhs: f64) -> Option<usize> {
        let mut e = e.clone();
        e.compact();
        if e.terms.is_empty() {
            // constant row: keep it only when it is violated, so infeasibility surfaces
            if (e.constant - rhs).abs() > 1e-12 * (1.0 + rhs.abs()) {
                return Some(self.eq(&e, rhs));
            }
            return None;
        }
        Some(self.eq(&e, rhs))
    }

    /// Introduces a Hermitian PSD slack equal to `expr` (assumed Hermitian).
    pub fn psd(&mut self, expr: &CMatExpr) -> (HermVar, MatEq) {
        let v = self.herm_psd(expr.rows);
        let mut diff = expr.clone();
        diff.add_mul(&v.expr(), c(-1.0, 0.0));
        let eq = self.eq_matrix(&diff, &CMat::zeros(expr.rows, expr.rows), true);
        (v, eq)
    }

    pub fn maximize(&mut self, e: &LinExpr) {
        self.objective = e.clone();
        self.sense = Sense::Maximize;
    }

    pub fn minimize(&mut self, e: &LinExpr) {
        self.objective = e.clone();
        self.sense = Sense::Minimize;
    }

    pub fn program(&self) -> ConicProgram {
        let mut prog = ConicProgram::new(self.blocks.clone(), self.n_free, self.sense);
        prog.constraints = self.constraints.clone();
        prog.trace_bounds = self.trace_bounds.clone();
        prog.free_bound = self.free_bound;
        if self.sense != Sense::Feasibility {
            let mut e = self.objective.clone();
            e.compact();
            for &(a, v) in &e.terms {
                match a {
                    Atom::Free(i) => prog.objective_free.push((i, v)),
                    Atom::Entry { block, r, c } => {
                        let coef = if r == c { v } else { 0.5 * v };
                        prog.objective.push((block, SymEntry::new(r, c, coef)));
                    }
                }
            }
        }
        prog
    }

    pub fn solve(&self) -> Result<Solution> {
        let prog = self.program();
        let res = ipm::solve(&prog)?;
        Ok(Solution {
            constant: self.objective.constant,
            prog,
            res,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    constant: f64,
    pub prog: ConicProgram,
    pub res: ConicResult,
}

impl Solution {
    pub fn status(&self) -> Status {
        self.res.status
    }

    pub fn is_optimal(&self) -> bool {
        self.res.status == Status::Optimal
    }

    /// Objective value including the affine constant.
    pub fn value(&self) -> f64 {
        self.res.value + self.constant
    }

    pub fn eval(&self, e: &LinExpr) -> f64 {
        e.constant
            + e.terms
                .iter()
                .map(|&(a, v)| {
                    v * match a {
                        Atom::Free(i) => self.res.free[i],
                        Atom::Entry { block, r, c } => self.res.primal[block][(r, c)],
                    }
                })
                .sum::<f64>()
    }

    pub fn herm(&self, v: HermVar) -> CMat {
        let y = &self.res.primal[v.block];
        let n = v.n;
        let m = CMat::from_fn(n, n, |p, q| {
            c(
                0.5 * (y[(p, q)] + y[(n + p, n + q)]),
                0.5 * (y[(n + p, q)] - y[(p, n + q)]),
            )
        });
        crate::linalg::herm(&m)
    }

    pub fn real(&self, v: RealVar) -> RMat {
        self.res.primal[v.block].clone()
    }

    pub fn dual(&self, row: usize) -> f64 {
        self.res.dual[row]
    }

    /// Multiplier matrix `H` of a matrix equality, normalized so that the
    /// Lagrangian term reads `Re tr(H expr)`.
    pub fn dual_matrix(&self, eq: &MatEq) -> CMat {
        self.multiplier_matrix(eq, &self.res.dual)
    }

    pub fn farkas_matrix(&self, eq: &MatEq) -> Option<CMat> {
        self.res.farkas.as_ref().map(|y| self.multiplier_matrix(eq, y))
    }

    fn multiplier_matrix(&self, eq: &MatEq, y: &[f64]) -> CMat {
        let get = |r: Option<usize>| r.map_or(0.0, |i| y[i]);
        let mut h = CMat::zeros(eq.cols, eq.rows);
        for &(i, j, re, im) in &eq.index {
            let (yr, yi) = (get(re), get(im));
            if eq.hermitian {
                if i == j {
                    h[(i, i)] = c(yr, 0.0);
                } else {
                    h[(j, i)] = c(yr / 2.0, -yi / 2.0);
                    h[(i, j)] = c(yr / 2.0, yi / 2.0);
                }
            } else {
                h[(j, i)] = c(yr, -yi);
            }
        }
        h
    }

    /// Upper bound (maximization) or lower bound (minimization) on the value
    /// that holds for the returned multipliers regardless of solver accuracy.
    pub fn certified_bound(&self) -> Option<f64> {
        self.res.certified_bound(&self.prog).map(|b| b + self.constant)
    }
}

/// Errors unless the solve finished optimally.
pub fn require_optimal(sol: &Solution, what: &str) -> Result<()> {
    if sol.is_optimal() {
        Ok(())
    } else {
        Err(Error::Numerical(format!("{what}: solver status {:?} ({})", sol.status(), sol.res.message)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eye, lambda_max, random_hermitian};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn max_eigenvalue_via_density_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2, 3, 4] {
            let a = random_hermitian(&mut rng, n);
            let mut m = Model::new();
            let x = m.herm_psd(n);
            m.bound_trace(x, 1.0);
            m.eq(&x.expr().trace_re(), 1.0);
            m.maximize(&x.expr().re_trace_with(&a));
            let sol = m.solve().unwrap();
            assert!(sol.is_optimal(), "{}", sol.res.message);
            assert!((sol.value() - lambda_max(&a)).abs() < 1e-7);
            let ub = sol.certified_bound().unwrap();
            assert!(ub >= lambda_max(&a) - 1e-12 && ub <= lambda_max(&a) + 1e-7);
        }
    }

    #[test]
    fn hermitian_equality_dual_reconstruction() {
        // max Re tr(A X) s.t. X = B (Hermitian); the multiplier of X = B is A.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let a = random_hermitian(&mut rng, 2);
        let g = random_hermitian(&mut rng, 2);
        let b = &g * &g + eye(2);
        let mut m = Model::new();
        let x = m.herm_psd(2);
        let eq = m.eq_matrix(&x.expr(), &b, true);
        m.maximize(&x.expr().re_trace_with(&a));
        let sol = m.solve().unwrap();
        assert!(sol.is_optimal());
        let h = sol.dual_matrix(&eq);
        assert!(crate::linalg::frobenius(&(h - &a)) < 1e-6);
    }
}
