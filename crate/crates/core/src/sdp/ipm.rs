//! Homogeneous self-dual interior point method for real symmetric cones.
//!
//! Standard form, with `X_b` symmetric PSD blocks and free scalars `x_f`:
//!
//! ```text
//!   minimize   <C, X> + c_f' x_f
//!   subject to A(X) + F x_f = b,   X >= 0
//!   dual:      maximize b'y  s.t.  F'y = c_f,  S = C - A*y >= 0
//! ```
//!
//! Maximization problems are negated internally; the reported dual then
//! satisfies `A*y - C >= 0` and the value is `b'y`.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

/// One upper-triangular entry of a symmetric coefficient matrix; `v` sits at
/// both `(r, c)` and `(c, r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymEntry {
    pub r: usize,
    pub c: usize,
    pub v: f64,
}

impl SymEntry {
    pub fn new(r: usize, c: usize, v: f64) -> Self {
        if r <= c {
            Self { r, c, v }
        } else {
            Self { r: c, c: r, v }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Constraint {
    pub free: Vec<(usize, f64)>,
    /// `(block, entry)` pairs; duplicates are summed.
    pub entries: Vec<(usize, SymEntry)>,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
    Feasibility,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicProgram {
    pub blocks: Vec<usize>,
    pub n_free: usize,
    pub sense: Sense,
    pub objective: Vec<(usize, SymEntry)>,
    pub objective_free: Vec<(usize, f64)>,
    pub constraints: Vec<Constraint>,
    /// Known a-priori bounds on `tr X_b`, used by [`ConicResult::certified_bound`].
    pub trace_bounds: Vec<Option<f64>>,
    /// Known bound on `max |x_f|`.
    pub free_bound: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct ConicResult {
    pub status: Status,
    pub value: f64,
    pub primal: Vec<RMat>,
    pub free: Vec<f64>,
    /// Multipliers, one per original constraint.
    pub dual: Vec<f64>,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    /// Farkas ray `y` with `b'y = 1`, `A*y <= 0`, `F'y = 0` when infeasible.
    pub farkas: Option<Vec<f64>>,
    pub message: String,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub max_iter: usize,
    pub tol_feas: f64,
    pub tol_gap: f64,
    pub tol_infeas: f64,
    pub max_side: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            tol_feas: 1e-9,
            tol_gap: 1e-9,
            tol_infeas: 1e-9,
            max_side: 400,
        }
    }
}

impl ConicProgram {
    pub fn new(blocks: Vec<usize>, n_free: usize, sense: Sense) -> Self {
        let nb = blocks.len();
        Self {
            blocks,
            n_free,
            sense,
            objective: Vec::new(),
            objective_free: Vec::new(),
            constraints: Vec::new(),
            trace_bounds: vec![None; nb],
            free_bound: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |b: usize, e: &SymEntry| -> Result<()> {
            let side = *self
                .blocks
                .get(b)
                .ok_or_else(|| Error::Dimension(format!("block {b} does not exist")))?;
            if e.c >= side {
                return Err(Error::Dimension(format!("entry ({}, {}) outside block {b} of side {side}", e.r, e.c)));
            }
            if !e.v.is_finite() {
                return Err(Error::InvalidArgument("non-finite coefficient".into()));
            }
            Ok(())
        };
        for (b, e) in &self.objective {
            check(*b, e)?;
        }
        for con in &self.constraints {
            for (b, e) in &con.entries {
                check(*b, e)?;
            }
            if con.free.iter().any(|&(i, v)| i >= self.n_free || !v.is_finite()) || !con.rhs.is_finite() {
                return Err(Error::InvalidArgument("malformed constraint".into()));
            }
        }
        if self.objective_free.iter().any(|&(i, _)| i >= self.n_free) {
            return Err(Error::Dimension("objective references a missing free variable".into()));
        }
        if self.sense == Sense::Feasibility && (!self.objective.is_empty() || !self.objective_free.is_empty()) {
            return Err(Error::InvalidArgument("feasibility programs carry no objective".into()));
        }
        if self.trace_bounds.len() != self.blocks.len() {
            return Err(Error::Dimension("one trace bound slot per block".into()));
        }
        Ok(())
    }

    /// Plain-text dump:
    ///
    /// ```text
    /// sense <minimize|maximize|feasibility>
    /// blocks <n> <side_1> ... <side_n>
    /// free <n_free>
    /// obj_free <i> <value>            (one line per term)
    /// obj <block> <row> <col> <value> (upper triangle; symmetric)
    /// con <index> rhs <value>
    ///   f <i> <value>
    ///   e <block> <row> <col> <value>
    /// ```
    ///
    /// Indices are zero-based; an entry `e b r c v` contributes `v` at both
    /// `(r, c)` and `(c, r)` of the coefficient matrix of block `b`.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let sense = match self.sense {
            Sense::Minimize => "minimize",
            Sense::Maximize => "maximize",
            Sense::Feasibility => "feasibility",
        };
        let _ = writeln!(s, "sense {sense}");
        let _ = write!(s, "blocks {}", self.blocks.len());
        for b in &self.blocks {
            let _ = write!(s, " {b}");
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "free {}", self.n_free);
        for (i, v) in &self.objective_free {
            let _ = writeln!(s, "obj_free {i} {v:.17e}");
        }
        for (b, e) in &self.objective {
            let _ = writeln!(s, "obj {b} {} {} {:.17e}", e.r, e.c, e.v);
        }
        for (k, con) in self.constraints.iter().enumerate() {
            let _ = writeln!(s, "con {k} rhs {:.17e}", con.rhs);
            for (i, v) in &con.free {
                let _ = writeln!(s, "  f {i} {v:.17e}");
            }
            for (b, e) in &con.entries {
                let _ = writeln!(s, "  e {b} {} {} {:.17e}", e.r, e.c, e.v);
            }
        }
        s
    }

    /// `A*y` per block, as dense symmetric matrices.
    pub fn adjoint(&self, y: &[f64]) -> Vec<RMat> {
        let mut out: Vec<RMat> = self.blocks.iter().map(|&n| RMat::zeros(n, n)).collect();
        for (con, &yi) in self.constraints.iter().zip(y) {
            for (b, e) in &con.entries {
                add_sym(&mut out[*b], e, yi);
            }
        }
        out
    }

    /// `F'y`.
    pub fn free_adjoint(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_free];
        for (con, &yi) in self.constraints.iter().zip(y) {
            for &(i, v) in &con.free {
                out[i] += v * yi;
            }
        }
        out
    }

    /// Dense objective matrices per block.
    pub fn objective_blocks(&self) -> Vec<RMat> {
        let mut out: Vec<RMat> = self.blocks.iter().map(|&n| RMat::zeros(n, n)).collect();
        for (b, e) in &self.objective {
            add_sym(&mut out[*b], e, 1.0);
        }
        out
    }

    pub fn evaluate(&self, con: &Constraint, x: &[RMat], xf: &[f64]) -> f64 {
        let mut s: f64 = con.free.iter().map(|&(i, v)| v * xf[i]).sum();
        for (b, e) in &con.entries {
            s += entry_dot(e, &x[*b]);
        }
        s
    }

    pub fn objective_value(&self, x: &[RMat], xf: &[f64]) -> f64 {
        let mut s: f64 = self.objective_free.iter().map(|&(i, v)| v * xf[i]).sum();
        for (b, e) in &self.objective {
            s += entry_dot(e, &x[*b]);
        }
        s
    }
}

impl ConicResult {
    /// A bound on the optimal value that holds for any multiplier vector,
    /// valid because of the declared trace and free-variable bounds. For
    /// maximization it is an upper bound, for minimization a lower bound.
    pub fn certified_bound(&self, prog: &ConicProgram) -> Option<f64> {
        certified_bound(prog, &self.dual)
    }
}

/// Weak-duality bound from an arbitrary multiplier vector `y`.
pub fn certified_bound(prog: &ConicProgram, y: &[f64]) -> Option<f64> {
    let sign = if prog.sense == Sense::Minimize { -1.0 } else { 1.0 };
    let aty = prog.adjoint(y);
    let c = prog.objective_blocks();
    let mut bound: f64 = prog.constraints.iter().zip(y).map(|(k, yi)| k.rhs * yi).sum::<f64>() * sign;
    for (b, (a, cb)) in aty.iter().zip(&c).enumerate() {
        // max: Z = A*y - C should be PSD; min uses S = C - A*y, i.e. Z = -(A*y - C) with sign flip.
        let z = if sign > 0.0 { a - cb } else { cb - a };
        let lmin = sym_lambda_min(&z);
        if lmin < 0.0 {
            bound += -lmin * prog.trace_bounds[b]?;
        }
    }
    let fty = prog.free_adjoint(y);
    let mut cf = vec![0.0; prog.n_free];
    for &(i, v) in &prog.objective_free {
        cf[i] += v;
    }
    let viol: f64 = fty.iter().zip(&cf).map(|(a, c)| (a - c).abs()).sum();
    if viol > 0.0 {
        if viol > 1e-300 {
            bound += viol * prog.free_bound?;
        }
    }
    Some(bound * sign)
}

pub(crate) fn sym_lambda_min(m: &RMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |a, &v| a.min(v))
}

#[inline]
fn add_sym(m: &mut RMat, e: &SymEntry, s: f64) {
    m[(e.r, e.c)] += s * e.v;
    if e.r != e.c {
        m[(e.c, e.r)] += s * e.v;
    }
}

#[inline]
fn entry_dot(e: &SymEntry, x: &RMat) -> f64 {
    if e.r == e.c {
        e.v * x[(e.r, e.r)]
    } else {
        e.v * (x[(e.r, e.c)] + x[(e.c, e.r)])
    }
}

fn dot(a: &RMat, b: &RMat) -> f64 {
    a.dot(b)
}

/// Internal row: free part and per-block entries.
#[derive(Clone)]
struct Row {
    free: Vec<(usize, f64)>,
    blocks: Vec<(usize, Vec<SymEntry>)>,
}

struct Data {
    sizes: Vec<usize>,
    nf: usize,
    rows: Vec<Row>,
    b: RVec,
    c: Vec<RMat>,
    cf: RVec,
    by_block: Vec<Vec<(usize, usize)>>,
}

impl Data {
    fn p(&self) -> usize {
        self.rows.len()
    }

    fn a_apply(&self, x: &[RMat], xf: &RVec) -> RVec {
        RVec::from_iterator(
            self.p(),
            self.rows.iter().map(|row| {
                let mut s: f64 = row.free.iter().map(|&(i, v)| v * xf[i]).sum();
                for (b, es) in &row.blocks {
                    s += es.iter().map(|e| entry_dot(e, &x[*b])).sum::<f64>();
                }
                s
            }),
        )
    }

    fn at_apply(&self, y: &RVec) -> Vec<RMat> {
        let mut out: Vec<RMat> = self.sizes.iter().map(|&n| RMat::zeros(n, n)).collect();
        for (row, &yi) in self.rows.iter().zip(y.iter()) {
            if yi == 0.0 {
                continue;
            }
            for (b, es) in &row.blocks {
                for e in es {
                    add_sym(&mut out[*b], e, yi);
                }
            }
        }
        out
    }

    fn ft_apply(&self, y: &RVec) -> RVec {
        let mut out = RVec::zeros(self.nf);
        for (row, &yi) in self.rows.iter().zip(y.iter()) {
            for &(i, v) in &row.free {
                out[i] += v * yi;
            }
        }
        out
    }

    /// `M_ij = <A_i, W A_j W>` summed over blocks.
    fn schur(&self, w: &[RMat]) -> RMat {
        let p = self.p();
        let mut m = RMat::zeros(p, p);
        for (b, list) in self.by_block.iter().enumerate() {
            let n = self.sizes[b];
            let wb = &w[b];
            for &(i, ki) in list {
                let es = &self.rows[i].blocks[ki].1;
                let g = congruence_sparse(wb, es, n);
                for &(j, kj) in list {
                    let ej = &self.rows[j].blocks[kj].1;
                    m[(i, j)] += ej.iter().map(|e| entry_dot(e, &g)).sum::<f64>();
                }
            }
        }
        m
    }
}

/// `W A W` for sparse symmetric `A`.
fn congruence_sparse(w: &RMat, es: &[SymEntry], n: usize) -> RMat {
    // K = W P W with P upper part (half weight on the diagonal); W A W = K + K'.
    let mut pw = RMat::zeros(n, n);
    let mut used = vec![false; n];
    for e in es {
        let v = if e.r == e.c { 0.5 * e.v } else { e.v };
        for k in 0..n {
            pw[(e.r, k)] += v * w[(e.c, k)];
        }
        used[e.r] = true;
    }
    let mut k = RMat::zeros(n, n);
    for r in 0..n {
        if used[r] {
            k.ger(1.0, &w.column(r), &pw.row(r).transpose(), 1.0);
        }
    }
    &k + k.transpose()
}

struct Scaling {
    lx: Vec<RMat>,
    ls: Vec<RMat>,
    r: Vec<RMat>,
    rinv: Vec<RMat>,
    w: Vec<RMat>,
    lambda: Vec<Vec<f64>>,
}

fn nt_scaling(x: &[RMat], s: &[RMat]) -> Option<Scaling> {
    let mut out = Scaling {
        lx: Vec::new(),
        ls: Vec::new(),
        r: Vec::new(),
        rinv: Vec::new(),
        w: Vec::new(),
        lambda: Vec::new(),
    };
    for (xb, sb) in x.iter().zip(s) {
        let lx = xb.clone().cholesky()?.l();
        let ls = sb.clone().cholesky()?.l();
        let svd = (ls.transpose() * &lx).svd(true, true);
        let u = svd.u?;
        let vt = svd.v_t?;
        let sig = svd.singular_values;
        if sig.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return None;
        }
        let n = sig.len();
        let _ = u;
        let v = vt.transpose();
        let mut r = &lx * &v;
        for k in 0..n {
            let f = 1.0 / sig[k].sqrt();
            r.column_mut(k).scale_mut(f);
        }
        // R^{-1} = Sigma^{1/2} V' Lx^{-1}
        let lx_inv = lx.clone().try_inverse()?;
        let mut rinv = &vt * lx_inv;
        for k in 0..n {
            let f = sig[k].sqrt();
            rinv.row_mut(k).scale_mut(f);
        }
        let w = &r * r.transpose();
        out.lambda.push(sig.iter().copied().collect());
        out.lx.push(lx);
        out.ls.push(ls);
        out.r.push(r);
        out.rinv.push(rinv);
        out.w.push(w);
    }
    Some(out)
}

/// Largest step keeping `L L' + a dX` PSD, capped at 1e30.
fn max_step(l: &RMat, d: &RMat) -> f64 {
    let n = l.nrows();
    let linv = match l.clone().solve_lower_triangular(&RMat::identity(n, n)) {
        Some(m) => m,
        None => return 0.0,
    };
    let t = &linv * d * linv.transpose();
    let t = (&t + t.transpose()) * 0.5;
    let lmin = sym_lambda_min(&t);
    if lmin >= 0.0 {
        1e30
    } else {
        -1.0 / lmin
    }
}

struct Kkt {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    mat: RMat,
}

impl Kkt {
    fn build(m: &RMat, data: &Data) -> Option<Self> {
        let p = data.p();
        let nf = data.nf;
        let scale = (0..p).map(|i| m[(i, i)].abs()).fold(1e-300f64, f64::max);
        let delta = 1e-13 * scale.max(1.0);
        let mut mat = RMat::zeros(p + nf, p + nf);
        mat.view_mut((0, 0), (p, p)).copy_from(m);
        for (i, row) in data.rows.iter().enumerate() {
            for &(j, v) in &row.free {
                mat[(i, p + j)] += v;
                mat[(p + j, i)] += v;
            }
        }
        let exact = mat.clone();
        for i in 0..p {
            mat[(i, i)] += delta;
        }
        for j in 0..nf {
            mat[(p + j, p + j)] -= delta;
        }
        let lu = mat.lu();
        if !lu.is_invertible() {
            return None;
        }
        Some(Self { lu, mat: exact })
    }

    fn solve(&self, rhs: &RVec) -> Option<RVec> {
        let mut x = self.lu.solve(rhs)?;
        for _ in 0..3 {
            let r = rhs - &self.mat * &x;
            let dx = self.lu.solve(&r)?;
            x += dx;
        }
        if x.iter().all(|v| v.is_finite()) {
            Some(x)
        } else {
            None
        }
    }
}

struct Iterate {
    x: Vec<RMat>,
    s: Vec<RMat>,
    xf: RVec,
    y: RVec,
    tau: f64,
    kappa: f64,
}

struct Direction {
    dx: Vec<RMat>,
    ds: Vec<RMat>,
    dxf: RVec,
    dy: RVec,
    dtau: f64,
    dkappa: f64,
}

fn presolve(prog: &ConicProgram) -> Result<(Vec<usize>, Option<Vec<f64>>)> {
    // In-order Cholesky on the Gram matrix to drop dependent rows.
    let p = prog.constraints.len();
    let data = raw_data(prog, &(0..p).collect::<Vec<_>>(), &vec![1.0; p]);
    let ident: Vec<RMat> = prog.blocks.iter().map(|&n| RMat::identity(n, n) * std::f64::consts::FRAC_1_SQRT_2).collect();
    // W = I/sqrt2 gives <A_i, A_j>/2; rescale below.
    let mut g = data.schur(&ident) * 2.0;
    for i in 0..p {
        for j in 0..p {
            let fi = &data.rows[i].free;
            let fj = &data.rows[j].free;
            let mut s = 0.0;
            for &(a, va) in fi {
                for &(b, vb) in fj {
                    if a == b {
                        s += va * vb;
                    }
                }
            }
            g[(i, j)] += s;
        }
    }
    let mut keep: Vec<usize> = Vec::new();
    let mut l = RMat::zeros(p, p);
    for i in 0..p {
        let gii = g[(i, i)];
        if gii <= 0.0 {
            if prog.constraints[i].rhs.abs() > 1e-12 {
                let mut y = vec![0.0; p];
                y[i] = 1.0 / prog.constraints[i].rhs;
                return Ok((keep, Some(y)));
            }
            continue;
        }
        let k = keep.len();
        let mut li = vec![0.0; k];
        for (a, &ka) in keep.iter().enumerate() {
            let mut s = g[(ka, i)];
            for t in 0..a {
                s -= l[(a, t)] * li[t];
            }
            li[a] = s / l[(a, a)];
        }
        let d = gii - li.iter().map(|v| v * v).sum::<f64>();
        if d > 1e-11 * gii {
            for (t, v) in li.iter().enumerate() {
                l[(k, t)] = *v;
            }
            l[(k, k)] = d.sqrt();
            keep.push(i);
        } else {
            // coefficients c with a_i ~ sum c_a a_{keep[a]}: solve L' c = li
            let mut cvec = li.clone();
            for a in (0..k).rev() {
                let mut s = cvec[a];
                for t in a + 1..k {
                    s -= l[(t, a)] * cvec[t];
                }
                cvec[a] = s / l[(a, a)];
            }
            let pred: f64 = keep.iter().zip(&cvec).map(|(&ka, c)| c * prog.constraints[ka].rhs).sum();
            let bi = prog.constraints[i].rhs;
            let cn: f64 = cvec.iter().map(|v| v.abs()).sum::<f64>();
            let bscale = 1.0 + bi.abs() + cn * prog.constraints.iter().map(|c| c.rhs.abs()).fold(0.0, f64::max);
            let gap = bi - pred;
            if gap.abs() > 1e-8 * bscale {
                let mut y = vec![0.0; p];
                y[i] = 1.0 / gap;
                for (&ka, c) in keep.iter().zip(&cvec) {
                    y[ka] = -c / gap;
                }
                return Ok((keep, Some(y)));
            }
        }
    }
    Ok((keep, None))
}

fn raw_data(prog: &ConicProgram, rows: &[usize], scale: &[f64]) -> Data {
    let nb = prog.blocks.len();
    let mut out_rows = Vec::with_capacity(rows.len());
    let mut b = RVec::zeros(rows.len());
    for (k, &i) in rows.iter().enumerate() {
        let con = &prog.constraints[i];
        let s = scale[k];
        let mut per: Vec<Vec<SymEntry>> = vec![Vec::new(); nb];
        for (blk, e) in &con.entries {
            per[*blk].push(SymEntry { v: e.v * s, ..*e });
        }
        let mut blocks = Vec::new();
        for (blk, mut es) in per.into_iter().enumerate() {
            if es.is_empty() {
                continue;
            }
            es.sort_by(|a, b| (a.r, a.c).cmp(&(b.r, b.c)));
            let mut merged: Vec<SymEntry> = Vec::with_capacity(es.len());
            for e in es {
                match merged.last_mut() {
                    Some(last) if last.r == e.r && last.c == e.c => last.v += e.v,
                    _ => merged.push(e),
                }
            }
            merged.retain(|e| e.v != 0.0);
            if !merged.is_empty() {
                blocks.push((blk, merged));
            }
        }
        let mut free: Vec<(usize, f64)> = Vec::new();
        for &(j, v) in &con.free {
            match free.iter_mut().find(|(a, _)| *a == j) {
                Some(t) => t.1 += v * s,
                None => free.push((j, v * s)),
            }
        }
        free.retain(|(_, v)| *v != 0.0);
        b[k] = con.rhs * s;
        out_rows.push(Row { free, blocks });
    }
    let mut by_block = vec![Vec::new(); nb];
    for (i, row) in out_rows.iter().enumerate() {
        for (k, (blk, _)) in row.blocks.iter().enumerate() {
            by_block[*blk].push((i, k));
        }
    }
    let mut c: Vec<RMat> = prog.blocks.iter().map(|&n| RMat::zeros(n, n)).collect();
    for (blk, e) in &prog.objective {
        add_sym(&mut c[*blk], e, 1.0);
    }
    let mut cf = RVec::zeros(prog.n_free);
    for &(i, v) in &prog.objective_free {
        cf[i] += v;
    }
    Data {
        sizes: prog.blocks.clone(),
        nf: prog.n_free,
        rows: out_rows,
        b,
        c,
        cf,
        by_block,
    }
}

fn row_norm(row: &Row) -> f64 {
    let mut s: f64 = row.free.iter().map(|(_, v)| v * v).sum();
    for (_, es) in &row.blocks {
        for e in es {
            s += if e.r == e.c { e.v * e.v } else { 2.0 * e.v * e.v };
        }
    }
    s.sqrt()
}

pub fn solve(prog: &ConicProgram) -> Result<ConicResult> {
    solve_with(prog, &SolverOptions::default())
}

pub fn solve_with(prog: &ConicProgram, opts: &SolverOptions) -> Result<ConicResult> {
    prog.validate()?;
    let total: usize = prog.blocks.iter().sum();
    if total > opts.max_side {
        return Err(Error::Budget(format!("stacked side {total} exceeds cap {}", opts.max_side)));
    }
    let p_all = prog.constraints.len();
    let (keep, farkas) = presolve(prog)?;
    if let Some(y) = farkas {
        return Ok(infeasible_result(prog, y, 0, "inconsistent linear equalities"));
    }
    // Row scaling to unit norm.
    let unit = raw_data(prog, &keep, &vec![1.0; keep.len()]);
    let scales: Vec<f64> = unit.rows.iter().map(|r| 1.0 / row_norm(r).max(1e-300)).collect();
    let mut data = raw_data(prog, &keep, &scales);
    let sign = if prog.sense == Sense::Maximize { -1.0 } else { 1.0 };
    for cb in data.c.iter_mut() {
        *cb *= sign;
    }
    data.cf *= sign;
    let bscale = data.b.amax().max(1.0);
    let cscale = data
        .c
        .iter()
        .map(|m| m.amax())
        .fold(data.cf.amax(), f64::max)
        .max(1.0);
    data.b /= bscale;
    for cb in data.c.iter_mut() {
        *cb /= cscale;
    }
    data.cf /= cscale;

    let out = hsde(&data, opts);
    let (status, it, iters, msg, stats) = out;

    // Unscale: X = bscale X', y_i = s_i cscale y'_i, value = bscale cscale v'.
    let primal: Vec<RMat> = it.x.iter().map(|m| m * (bscale / it.tau)).collect();
    let free: Vec<f64> = it.xf.iter().map(|v| v * bscale / it.tau).collect();
    let mut dual = vec![0.0; p_all];
    for (k, &i) in keep.iter().enumerate() {
        dual[i] = it.y[k] * scales[k] * cscale / it.tau * sign;
    }
    match status {
        Status::Infeasible => {
            let by: f64 = it.y.dot(&data.b);
            let mut y = vec![0.0; p_all];
            for (k, &i) in keep.iter().enumerate() {
                y[i] = it.y[k] * scales[k] * bscale / (by * bscale);
            }
            // normalize so b'y = 1 in original data
            let bty: f64 = prog.constraints.iter().zip(&y).map(|(c, v)| c.rhs * v).sum();
            if bty.abs() > 0.0 {
                y.iter_mut().for_each(|v| *v /= bty);
            }
            return Ok(infeasible_result(prog, y, iters, &msg));
        }
        Status::Unbounded => {
            return Ok(ConicResult {
                status,
                value: if prog.sense == Sense::Maximize { f64::INFINITY } else { f64::NEG_INFINITY },
                primal: it.x.iter().map(|m| m.clone()).collect(),
                free: it.xf.iter().copied().collect(),
                dual,
                gap: f64::NAN,
                primal_residual: stats.0,
                dual_residual: stats.1,
                iterations: iters,
                farkas: None,
                message: msg,
            });
        }
        _ => {}
    }
    let pobj = prog.objective_value(&primal, &free);
    let dobj: f64 = prog.constraints.iter().zip(&dual).map(|(c, y)| c.rhs * y).sum();
    let value = if prog.sense == Sense::Feasibility { 0.0 } else { pobj };
    Ok(ConicResult {
        status,
        value,
        primal,
        free,
        dual,
        gap: (pobj - dobj).abs(),
        primal_residual: stats.0,
        dual_residual: stats.1,
        iterations: iters,
        farkas: None,
        message: msg,
    })
}

fn infeasible_result(prog: &ConicProgram, y: Vec<f64>, iterations: usize, msg: &str) -> ConicResult {
    ConicResult {
        status: Status::Infeasible,
        value: match prog.sense {
            Sense::Maximize => f64::NEG_INFINITY,
            Sense::Minimize => f64::INFINITY,
            Sense::Feasibility => f64::NAN,
        },
        primal: prog.blocks.iter().map(|&n| RMat::zeros(n, n)).collect(),
        free: vec![0.0; prog.n_free],
        dual: vec![0.0; prog.constraints.len()],
        gap: f64::NAN,
        primal_residual: f64::NAN,
        dual_residual: f64::NAN,
        iterations,
        farkas: Some(y),
        message: msg.to_string(),
    }
}

/// Independent check of a Farkas ray: returns the violation `b'y - tr_bound * max(0, lambda_max(A*y)) - |F'y| bound`.
/// Positive values certify infeasibility when trace bounds are known; with no
/// bounds, the returned pair is `(b'y, max_b lambda_max(A*y)_b, |F'y|_inf)`.
pub fn farkas_check(prog: &ConicProgram, y: &[f64]) -> (f64, f64, f64) {
    let bty: f64 = prog.constraints.iter().zip(y).map(|(c, v)| c.rhs * v).sum();
    let aty = prog.adjoint(y);
    let lmax = aty
        .iter()
        .map(|m| -sym_lambda_min(&(-m)))
        .fold(f64::NEG_INFINITY, f64::max);
    let fty = prog.free_adjoint(y).iter().fold(0.0f64, |a, v| a.max(v.abs()));
    (bty, lmax, fty)
}

type Stats = (f64, f64);

fn hsde(data: &Data, opts: &SolverOptions) -> (Status, Iterate, usize, String, Stats) {
    let p = data.p();
    let nf = data.nf;
    let nu: f64 = data.sizes.iter().sum::<usize>() as f64 + 1.0;
    let mut it = Iterate {
        x: data.sizes.iter().map(|&n| RMat::identity(n, n)).collect(),
        s: data.sizes.iter().map(|&n| RMat::identity(n, n)).collect(),
        xf: RVec::zeros(nf),
        y: RVec::zeros(p),
        tau: 1.0,
        kappa: 1.0,
    };
    let bnorm = data.b.norm();
    let cnorm = (data.c.iter().map(|m| m.norm_squared()).sum::<f64>() + data.cf.norm_squared()).sqrt();
    let mut last_stats = (f64::INFINITY, f64::INFINITY);
    let mut best: Option<(f64, Iterate)> = None;

    for iter in 0..opts.max_iter {
        let ax = data.a_apply(&it.x, &it.xf);
        let r1 = &ax - &data.b * it.tau;
        let aty = data.at_apply(&it.y);
        let r2: Vec<RMat> = (0..data.sizes.len())
            .map(|b| &data.c[b] * it.tau - &aty[b] - &it.s[b])
            .collect();
        let r3 = &data.cf * it.tau - data.ft_apply(&it.y);
        let cx: f64 = data.c.iter().zip(&it.x).map(|(c, x)| dot(c, x)).sum::<f64>() + data.cf.dot(&it.xf);
        let by = data.b.dot(&it.y);
        let r4 = by - cx - it.kappa;
        let xs: f64 = it.x.iter().zip(&it.s).map(|(x, s)| dot(x, s)).sum();
        let mu = (xs + it.tau * it.kappa) / nu;

        let pres = r1.norm() / it.tau / (1.0 + bnorm);
        let dres = (r2.iter().map(|m| m.norm_squared()).sum::<f64>() + r3.norm_squared()).sqrt() / it.tau / (1.0 + cnorm);
        let pobj = cx / it.tau;
        let dobj = by / it.tau;
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        last_stats = (pres, dres);
        if pres <= opts.tol_feas && dres <= opts.tol_feas && gap <= opts.tol_gap {
            return (Status::Optimal, it, iter, "optimal".into(), last_stats);
        }
        let merit = pres.max(dres).max(gap);
        if best.as_ref().map_or(true, |(m, _)| merit < *m) {
            best = Some((
                merit,
                Iterate {
                    x: it.x.clone(),
                    s: it.s.clone(),
                    xf: it.xf.clone(),
                    y: it.y.clone(),
                    tau: it.tau,
                    kappa: it.kappa,
                },
            ));
        }
        // Infeasibility tests on the unnormalized iterate.
        if by > 0.0 {
            let yn = &it.y / by;
            let atyn = data.at_apply(&yn);
            let lmax = atyn.iter().map(|m| -sym_lambda_min(&(-m))).fold(f64::NEG_INFINITY, f64::max);
            let fty = data.ft_apply(&yn).amax();
            if lmax.max(0.0) <= opts.tol_infeas && fty <= opts.tol_infeas && it.tau <= 1e-3 * it.kappa.max(1.0) {
                return (Status::Infeasible, it, iter, "primal infeasible".into(), last_stats);
            }
        }
        if cx < 0.0 {
            let r = data.a_apply(&it.x, &it.xf).norm() / -cx;
            if r <= opts.tol_infeas && it.tau <= 1e-3 * it.kappa.max(1.0) {
                return (Status::Unbounded, it, iter, "dual infeasible".into(), last_stats);
            }
        }

        let sc = match nt_scaling(&it.x, &it.s) {
            Some(s) => s,
            None => break,
        };
        let m = data.schur(&sc.w);
        let kkt = match Kkt::build(&m, data) {
            Some(k) => k,
            None => break,
        };
        let wcw: Vec<RMat> = sc.w.iter().zip(&data.c).map(|(w, c)| w * c * w).collect();
        let g = data.a_apply(&wcw, &RVec::zeros(nf));
        let c_wcw: f64 = data.c.iter().zip(&wcw).map(|(c, x)| dot(c, x)).sum();
        let wr2w: Vec<RMat> = sc.w.iter().zip(&r2).map(|(w, r)| w * r * w).collect();
        let a_wr2w = data.a_apply(&wr2w, &RVec::zeros(nf));
        let wcw_r2: f64 = wcw.iter().zip(&r2).map(|(a, b)| dot(a, b)).sum();

        let mut rhs_v = RVec::zeros(p + nf);
        rhs_v.rows_mut(0, p).copy_from(&(&data.b + &g));
        rhs_v.rows_mut(p, nf).copy_from(&data.cf);
        let v = match kkt.solve(&rhs_v) {
            Some(v) => v,
            None => break,
        };
        let bg = &data.b - &g;

        let direction = |rc: &[RMat], rk: f64, eta: f64| -> Option<Direction> {
            let mut rur = Vec::with_capacity(rc.len());
            for (b, rcb) in rc.iter().enumerate() {
                let lam = &sc.lambda[b];
                let n = lam.len();
                let u = RMat::from_fn(n, n, |i, j| 2.0 * rcb[(i, j)] / (lam[i] + lam[j]));
                rur.push(&sc.r[b] * u * sc.r[b].transpose());
            }
            let a_rur = data.a_apply(&rur, &RVec::zeros(nf));
            let p0 = -(&r1 * eta) - &a_rur + &a_wr2w * eta;
            let q0 = &r3 * eta;
            let mut rhs_u = RVec::zeros(p + nf);
            rhs_u.rows_mut(0, p).copy_from(&p0);
            rhs_u.rows_mut(p, nf).copy_from(&q0);
            let u = kkt.solve(&rhs_u)?;
            let c_rur: f64 = data.c.iter().zip(&rur).map(|(c, x)| dot(c, x)).sum();
            let uy = u.rows(0, p);
            let uf = u.rows(p, nf);
            let vy = v.rows(0, p);
            let vf = v.rows(p, nf);
            let num = -eta * r4 + c_rur - eta * wcw_r2 + rk / it.tau - bg.dot(&uy) + data.cf.dot(&uf);
            let den = bg.dot(&vy) - data.cf.dot(&vf) + c_wcw + it.kappa / it.tau;
            if !(den.abs() > 1e-300) {
                return None;
            }
            let dtau = num / den;
            let dy = &uy + &vy * dtau;
            let dxf = &uf + &vf * dtau;
            let atdy = data.at_apply(&dy);
            let ds: Vec<RMat> = (0..rc.len())
                .map(|b| -&atdy[b] + &data.c[b] * dtau + &r2[b] * eta)
                .collect();
            let dx: Vec<RMat> = (0..rc.len())
                .map(|b| {
                    let t = &rur[b] - &sc.w[b] * &ds[b] * &sc.w[b];
                    (&t + t.transpose()) * 0.5
                })
                .collect();
            let dkappa = (rk - it.kappa * dtau) / it.tau;
            Some(Direction {
                dx,
                ds,
                dxf,
                dy,
                dtau,
                dkappa,
            })
        };

        let step_len = |d: &Direction| -> f64 {
            let mut a = 1e30f64;
            for b in 0..d.dx.len() {
                a = a.min(max_step(&sc.lx[b], &d.dx[b]));
                a = a.min(max_step(&sc.ls[b], &d.ds[b]));
            }
            if d.dtau < 0.0 {
                a = a.min(-it.tau / d.dtau);
            }
            if d.dkappa < 0.0 {
                a = a.min(-it.kappa / d.dkappa);
            }
            a
        };

        // Predictor.
        let rc_aff: Vec<RMat> = sc
            .lambda
            .iter()
            .map(|l| RMat::from_diagonal(&RVec::from_iterator(l.len(), l.iter().map(|v| -v * v))))
            .collect();
        let aff = match direction(&rc_aff, -it.tau * it.kappa, 1.0) {
            Some(d) => d,
            None => break,
        };
        let a_aff = step_len(&aff).min(1.0);
        let xs_aff: f64 = (0..aff.dx.len())
            .map(|b| dot(&(&it.x[b] + &aff.dx[b] * a_aff), &(&it.s[b] + &aff.ds[b] * a_aff)))
            .sum();
        let mu_aff = (xs_aff + (it.tau + a_aff * aff.dtau) * (it.kappa + a_aff * aff.dkappa)) / nu;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // Corrector.
        let rc: Vec<RMat> = (0..aff.dx.len())
            .map(|b| {
                let dxt = &sc.rinv[b] * &aff.dx[b] * sc.rinv[b].transpose();
                let dst = sc.r[b].transpose() * &aff.ds[b] * &sc.r[b];
                let corr = (&dxt * &dst + &dst * &dxt) * 0.5;
                let l = &sc.lambda[b];
                let mut base = RMat::from_diagonal(&RVec::from_iterator(l.len(), l.iter().map(|v| sigma * mu - v * v)));
                base -= corr;
                base
            })
            .collect();
        let rk = sigma * mu - it.tau * it.kappa - aff.dtau * aff.dkappa;
        let dir = match direction(&rc, rk, 1.0 - sigma) {
            Some(d) => d,
            None => break,
        };
        let amax = step_len(&dir);
        let alpha = (0.98 * amax).min(1.0);
        if !(alpha > 1e-12) {
            break;
        }
        for b in 0..dir.dx.len() {
            it.x[b] += &dir.dx[b] * alpha;
            it.s[b] += &dir.ds[b] * alpha;
            let xb = (&it.x[b] + it.x[b].transpose()) * 0.5;
            let sb = (&it.s[b] + it.s[b].transpose()) * 0.5;
            it.x[b] = xb;
            it.s[b] = sb;
        }
        it.xf += &dir.dxf * alpha;
        it.y += &dir.dy * alpha;
        it.tau += alpha * dir.dtau;
        it.kappa += alpha * dir.dkappa;
        // Rescale the homogeneous iterate when tau and kappa drift.
        let norm = it.tau + it.kappa;
        if !(norm.is_finite()) {
            break;
        }
        if norm > 1e6 || norm < 1e-6 {
            let f = 1.0 / norm;
            for b in 0..it.x.len() {
                it.x[b] *= f;
                it.s[b] *= f;
            }
            it.xf *= f;
            it.y *= f;
            it.tau *= f;
            it.kappa *= f;
        }
    }
    // Fallback: accept the best iterate at reduced accuracy.
    if let Some((merit, b)) = best {
        if merit <= 1e-7 {
            return (Status::Optimal, b, opts.max_iter, format!("reduced accuracy {merit:.2e}"), last_stats);
        }
        return (Status::NumericalFailure, b, opts.max_iter, format!("stalled at merit {merit:.2e}"), last_stats);
    }
    (Status::NumericalFailure, it, opts.max_iter, "no progress".into(), last_stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_prog(costs: &[f64], sense: Sense) -> ConicProgram {
        let n = costs.len();
        let mut p = ConicProgram::new(vec![n], 0, sense);
        for (i, &c) in costs.iter().enumerate() {
            p.objective.push((0, SymEntry::new(i, i, c)));
        }
        p.constraints.push(Constraint {
            free: vec![],
            entries: (0..n).map(|i| (0, SymEntry::new(i, i, 1.0))).collect(),
            rhs: 1.0,
        });
        p.trace_bounds[0] = Some(1.0);
        p
    }

    #[test]
    fn trace_minimization() {
        let p = diag_prog(&[1.0, 2.0], Sense::Minimize);
        let r = solve(&p).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert!((r.value - 1.0).abs() < 1e-7);
        assert!((r.primal[0][(0, 0)] - 1.0).abs() < 1e-6);
        let lb = r.certified_bound(&p).unwrap();
        assert!(lb <= r.value + 1e-9 && lb >= 1.0 - 1e-7);
    }

    #[test]
    fn infeasible_trace() {
        let mut p = ConicProgram::new(vec![2], 0, Sense::Feasibility);
        p.constraints.push(Constraint {
            free: vec![],
            entries: vec![(0, SymEntry::new(0, 0, 1.0)), (0, SymEntry::new(1, 1, 1.0))],
            rhs: -1.0,
        });
        let r = solve(&p).unwrap();
        assert_eq!(r.status, Status::Infeasible);
        let (bty, lmax, _) = farkas_check(&p, r.farkas.as_ref().unwrap());
        assert!((bty - 1.0).abs() < 1e-9);
        assert!(lmax <= 1e-8);
    }

    #[test]
    fn free_variable_lp() {
        // min t s.t. t - x = 0, x + y = 2, with x, y >= 0 as 1x1 blocks; optimum 0.
        let mut p = ConicProgram::new(vec![1, 1], 1, Sense::Minimize);
        p.objective_free.push((0, 1.0));
        p.constraints.push(Constraint {
            free: vec![(0, 1.0)],
            entries: vec![(0, SymEntry::new(0, 0, -1.0))],
            rhs: 0.0,
        });
        p.constraints.push(Constraint {
            free: vec![],
            entries: vec![(0, SymEntry::new(0, 0, 1.0)), (1, SymEntry::new(0, 0, 1.0))],
            rhs: 2.0,
        });
        let r = solve(&p).unwrap();
        assert_eq!(r.status, Status::Optimal, "{}", r.message);
        assert!(r.value.abs() < 1e-7);
    }

    #[test]
    fn unbounded_detected() {
        // min -x with x >= 0 and no constraints beyond x - y = 0.
        let mut p = ConicProgram::new(vec![1, 1], 0, Sense::Minimize);
        p.objective.push((0, SymEntry::new(0, 0, -1.0)));
        p.constraints.push(Constraint {
            free: vec![],
            entries: vec![(0, SymEntry::new(0, 0, 1.0)), (1, SymEntry::new(0, 0, -1.0))],
            rhs: 0.0,
        });
        let r = solve(&p).unwrap();
        assert_eq!(r.status, Status::Unbounded);
    }

    #[test]
    fn dependent_rows_are_dropped() {
        let mut p = diag_prog(&[3.0, 1.0], Sense::Minimize);
        let dup = p.constraints[0].clone();
        p.constraints.push(Constraint { rhs: 2.0, entries: dup.entries.iter().map(|(b, e)| (*b, SymEntry { v: 2.0 * e.v, ..*e })).collect(), free: vec![] });
        let r = solve(&p).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert!((r.value - 1.0).abs() < 1e-7);
        p.constraints[1].rhs = 3.0;
        let r = solve(&p).unwrap();
        assert_eq!(r.status, Status::Infeasible);
    }

    #[test]
    fn dump_lists_every_constraint() {
        let p = diag_prog(&[1.0, 2.0], Sense::Maximize);
        let s = p.dump();
        assert!(s.starts_with("sense maximize\nblocks 1 2\n"));
        assert_eq!(s.matches("\ncon ").count(), 1);
    }
}
