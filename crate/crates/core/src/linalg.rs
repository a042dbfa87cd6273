//! Dense complex linear algebra used throughout the crate.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. The real pairing on tuples is
//! `<H, X> = Re sum_j tr(H_j X_j)`, which is bilinear and sees every real-linear
//! functional on `M_m^d`. Choi matrices use the input-first convention
//! `J = sum_ij E_ij (x) phi(E_ij)`, so `phi(A) = Tr_in[J (A^T (x) I)]`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type RMat = DMatrix<f64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(n: usize) -> CMat {
    CMat::zeros(n, n)
}

/// Matrix unit `E_{ij}` (zero-based) of side `n`.
pub fn unit(n: usize, i: usize, j: usize) -> CMat {
    let mut m = zeros(n);
    m[(i, j)] = ONE;
    m
}

pub fn from_real(rows: &[&[f64]]) -> CMat {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    CMat::from_fn(n, m, |i, j| c(rows[i][j], 0.0))
}

pub fn pauli_x() -> CMat {
    from_real(&[&[0.0, 1.0], &[1.0, 0.0]])
}

pub fn pauli_y() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMat {
    from_real(&[&[1.0, 0.0], &[0.0, -1.0]])
}

pub fn dagger(a: &CMat) -> CMat {
    a.adjoint()
}

/// Hermitian part `(A + A^dagger)/2`.
pub fn herm(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

/// Skew part in Hermitian form `(A - A^dagger)/(2i)`.
pub fn skew_herm(a: &CMat) -> CMat {
    (a - a.adjoint()) * c(0.0, -0.5)
}

pub fn trace(a: &CMat) -> Complex64 {
    a.trace()
}

/// Bilinear real pairing `Re tr(A B)`.
pub fn re_tr_prod(a: &CMat, b: &CMat) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for k in 0..a.ncols() {
            s += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    s
}

pub fn hermitian_deviation(a: &CMat) -> f64 {
    op_norm(&(a - a.adjoint()))
}

pub fn is_hermitian(a: &CMat, tol: f64) -> bool {
    a.is_square() && hermitian_deviation(a) <= tol * op_norm(a).max(1.0)
}

pub fn op_norm(a: &CMat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0f64, |m, &s| m.max(s))
}

pub fn trace_norm(a: &CMat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().svd(false, false).singular_values.iter().sum()
}

pub fn frobenius(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Kronecker product `A (x) B`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Which tensor factor a partial trace removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Factor {
    Input,
    Output,
}

/// Partial trace of `M` acting on `C^n (x) C^m` over the named factor.
pub fn partial_trace(m: &CMat, factor: Factor, dims: (usize, usize)) -> Result<CMat> {
    let (n, k) = dims;
    if m.nrows() != n * k || m.ncols() != n * k {
        return Err(Error::Dimension(format!(
            "partial trace of {}x{} over dims ({n}, {k})",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(match factor {
        Factor::Input => CMat::from_fn(k, k, |a, b| (0..n).map(|i| m[(i * k + a, i * k + b)]).sum()),
        Factor::Output => CMat::from_fn(n, n, |i, j| (0..k).map(|a| m[(i * k + a, j * k + a)]).sum()),
    })
}

/// Partial transpose on the output factor of `C^n (x) C^m`.
pub fn partial_transpose_output(m: &CMat, dims: (usize, usize)) -> CMat {
    let (n, k) = dims;
    CMat::from_fn(n * k, n * k, |r, s| {
        let (i, a) = (r / k, r % k);
        let (j, b) = (s / k, s % k);
        m[(i * k + b, j * k + a)]
    })
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_spectrum(m: &CMat) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("{}x{} is not square", m.nrows(), m.ncols())));
    }
    let dev = hermitian_deviation(m);
    if dev > 1e-8 * op_norm(m).max(1.0) {
        return Err(Error::NotHermitian(dev));
    }
    Ok(spectrum_unchecked(m))
}

pub(crate) fn spectrum_unchecked(m: &CMat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut ev: Vec<f64> = herm(m).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

pub fn lambda_max(m: &CMat) -> f64 {
    spectrum_unchecked(m).last().copied().unwrap_or(0.0)
}

pub fn lambda_min(m: &CMat) -> f64 {
    spectrum_unchecked(m).first().copied().unwrap_or(0.0)
}

/// Eigen-decomposition of the Hermitian part, ascending.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let e = herm(m).symmetric_eigen();
    let mut idx: Vec<usize> = (0..e.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let vals = idx.iter().map(|&i| e.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(m.nrows(), idx.len(), |r, k| e.eigenvectors[(r, idx[k])]);
    (vals, vecs)
}

/// Applies `f` to the spectrum of a Hermitian matrix.
pub fn hermitian_fn(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = eigh(m);
    let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&v| c(f(v), 0.0)),
    ));
    &vecs * d * vecs.adjoint()
}

/// Projection onto the PSD cone in the Frobenius norm.
pub fn psd_part(m: &CMat) -> CMat {
    hermitian_fn(m, |v| v.max(0.0))
}

pub fn direct_sum(a: &CMat, b: &CMat) -> CMat {
    let (n, m) = (a.nrows(), b.nrows());
    let mut out = zeros(n + m);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((n, n), (m, m)).copy_from(b);
    out
}

pub fn block_diag(blocks: &[CMat]) -> CMat {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = zeros(n);
    let mut off = 0;
    for b in blocks {
        let k = b.nrows();
        out.view_mut((off, off), (k, k)).copy_from(b);
        off += k;
    }
    out
}

/// Side-doubling real embedding `A + iB -> [[A, -B], [B, A]]`.
pub fn realify(m: &CMat) -> RMat {
    let n = m.nrows();
    let mut out = RMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            out[(i, j)] = z.re;
            out[(n + i, n + j)] = z.re;
            out[(n + i, j)] = z.im;
            out[(i, n + j)] = -z.im;
        }
    }
    out
}

/// Inverse of [`realify`], averaging the two redundant copies.
pub fn derealify(r: &RMat) -> CMat {
    let n = r.nrows() / 2;
    CMat::from_fn(n, n, |i, j| {
        c(
            0.5 * (r[(i, j)] + r[(n + i, n + j)]),
            0.5 * (r[(n + i, j)] - r[(i, n + j)]),
        )
    })
}

/// A d-tuple of n x n complex matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixTuple {
    entries: Vec<CMat>,
    selfadjoint: bool,
    pub label: Option<String>,
}

impl MatrixTuple {
    pub fn new(entries: Vec<CMat>) -> Result<Self> {
        Self::build(entries, false)
    }

    /// A tuple flagged selfadjoint; each entry must be Hermitian.
    pub fn selfadjoint(entries: Vec<CMat>) -> Result<Self> {
        Self::build(entries, true)
    }

    fn build(entries: Vec<CMat>, selfadjoint: bool) -> Result<Self> {
        let n = entries
            .first()
            .ok_or_else(|| Error::InvalidArgument("a tuple needs d >= 1 entries".into()))?
            .nrows();
        if n == 0 {
            return Err(Error::InvalidArgument("matrix side must be >= 1".into()));
        }
        for (j, e) in entries.iter().enumerate() {
            if e.nrows() != n || e.ncols() != n {
                return Err(Error::Dimension(format!(
                    "entry {j} is {}x{}, expected {n}x{n}",
                    e.nrows(),
                    e.ncols()
                )));
            }
            if selfadjoint {
                let dev = hermitian_deviation(e);
                if dev > 1e-12 * op_norm(e).max(1.0) {
                    return Err(Error::NotHermitian(dev));
                }
            }
        }
        let entries = if selfadjoint {
            entries.iter().map(herm).collect()
        } else {
            entries
        };
        Ok(Self {
            entries,
            selfadjoint,
            label: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn d(&self) -> usize {
        self.entries.len()
    }

    pub fn n(&self) -> usize {
        self.entries[0].nrows()
    }

    pub fn is_selfadjoint(&self) -> bool {
        self.selfadjoint
    }

    pub fn entries(&self) -> &[CMat] {
        &self.entries
    }

    pub fn get(&self, j: usize) -> &CMat {
        &self.entries[j]
    }

    pub fn zero(d: usize, n: usize, selfadjoint: bool) -> Self {
        Self {
            entries: vec![zeros(n); d],
            selfadjoint,
            label: None,
        }
    }

    pub fn scaled(&self, r: f64) -> Self {
        self.map(|m| m.scale(r))
    }

    /// Applies `f` entrywise, keeping the selfadjoint flag.
    pub fn map(&self, f: impl Fn(&CMat) -> CMat) -> Self {
        Self {
            entries: self.entries.iter().map(f).collect(),
            selfadjoint: self.selfadjoint,
            label: self.label.clone(),
        }
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.d() != other.d() {
            return Err(Error::Dimension(format!("direct sum of d={} and d={}", self.d(), other.d())));
        }
        Ok(Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| direct_sum(a, b))
                .collect(),
            selfadjoint: self.selfadjoint && other.selfadjoint,
            label: None,
        })
    }

    pub fn direct_sum_all(parts: &[Self]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty direct sum".into()))?;
        let d = first.d();
        if parts.iter().any(|p| p.d() != d) {
            return Err(Error::Dimension("direct sum of tuples with different d".into()));
        }
        let entries = (0..d)
            .map(|j| block_diag(&parts.iter().map(|p| p.entries[j].clone()).collect::<Vec<_>>()))
            .collect();
        Ok(Self {
            entries,
            selfadjoint: parts.iter().all(|p| p.selfadjoint),
            label: None,
        })
    }

    /// Conjugation `V^dagger X_j V` by an `n x m` matrix.
    pub fn compress(&self, v: &CMat) -> Self {
        self.map(|x| v.adjoint() * x * v)
    }

    /// `<H, X> = Re sum_j tr(H_j X_j)`.
    pub fn pairing(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(h, x)| re_tr_prod(h, x))
            .sum()
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.entries.iter().all(|m| m.iter().all(|z| z.norm() <= tol))
    }

    pub fn max_abs(&self) -> f64 {
        self.entries
            .iter()
            .flat_map(|m| m.iter())
            .fold(0.0f64, |a, z| a.max(z.norm()))
    }

    /// Whether all entries are normal and mutually commuting.
    pub fn is_commuting_normal(&self, tol: f64) -> bool {
        let scale = self.max_abs().max(1.0);
        let small = |m: &CMat| m.iter().all(|z| z.norm() <= tol * scale * scale);
        self.entries.iter().enumerate().all(|(i, a)| {
            small(&(a * a.adjoint() - a.adjoint() * a))
                && self.entries[i + 1..]
                    .iter()
                    .all(|b| small(&(a * b - b * a)) && small(&(a * b.adjoint() - b.adjoint() * a)))
        })
    }

    /// Embeds `T` into the selfadjoint coordinates `(Re T_j, Im T_j)`.
    pub fn selfadjoint_coordinates(&self) -> Self {
        selfadjoint_coordinates(self)
    }
}

/// Sum of operator norms of the entrywise differences.
pub fn tuple_metric(a: &MatrixTuple, b: &MatrixTuple) -> Result<f64> {
    if a.d() != b.d() || a.n() != b.n() {
        return Err(Error::Dimension(format!(
            "metric between (d={}, n={}) and (d={}, n={})",
            a.d(),
            a.n(),
            b.d(),
            b.n()
        )));
    }
    Ok(a.entries
        .iter()
        .zip(&b.entries)
        .map(|(x, y)| op_norm(&(x - y)))
        .sum())
}

/// `((T_j + T_j^dagger)/2, (T_j - T_j^dagger)/(2i))`, interleaved per coordinate.
pub fn selfadjoint_coordinates(t: &MatrixTuple) -> MatrixTuple {
    let mut out = Vec::with_capacity(2 * t.d());
    for m in t.entries() {
        out.push(herm(m));
        out.push(skew_herm(m));
    }
    MatrixTuple {
        entries: out,
        selfadjoint: true,
        label: t.label.clone(),
    }
}

/// Recombines selfadjoint coordinates `H_1 + i H_2` into a complex tuple.
pub fn from_selfadjoint_coordinates(s: &MatrixTuple) -> Result<MatrixTuple> {
    if s.d() % 2 != 0 {
        return Err(Error::Dimension("selfadjoint coordinates come in pairs".into()));
    }
    let entries = s
        .entries
        .chunks(2)
        .map(|p| &p[0] + &p[1] * I)
        .collect();
    MatrixTuple::new(entries)
}

/// `Re(sum_j X_j (x) A_j)`, side `m p`.
pub fn re_tensor_pencil(x: &MatrixTuple, a: &MatrixTuple) -> Result<CMat> {
    if x.d() != a.d() {
        return Err(Error::Dimension(format!("pencil with d={} and d={}", x.d(), a.d())));
    }
    let side = x.n() * a.n();
    let mut s = CMat::zeros(side, side);
    for (xj, aj) in x.entries.iter().zip(&a.entries) {
        s += kron(xj, aj);
    }
    Ok(herm(&s))
}

/// A Choi matrix of a map `M_n -> M_m`, input factor first.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    pub block: CMat,
    pub in_dim: usize,
    pub out_dim: usize,
}

impl ChoiMatrix {
    pub fn new(block: CMat, in_dim: usize, out_dim: usize) -> Result<Self> {
        if block.nrows() != in_dim * out_dim || !block.is_square() {
            return Err(Error::Dimension(format!(
                "Choi block {}x{} for dims ({in_dim}, {out_dim})",
                block.nrows(),
                block.ncols()
            )));
        }
        Ok(Self {
            block,
            in_dim,
            out_dim,
        })
    }

    /// Choi matrix of an arbitrary linear map given as a closure.
    pub fn of_map(in_dim: usize, out_dim: usize, f: impl Fn(&CMat) -> CMat) -> Self {
        let mut block = CMat::zeros(in_dim * out_dim, in_dim * out_dim);
        for i in 0..in_dim {
            for j in 0..in_dim {
                let img = f(&unit(in_dim, i, j));
                block
                    .view_mut((i * out_dim, j * out_dim), (out_dim, out_dim))
                    .copy_from(&img);
            }
        }
        Self {
            block,
            in_dim,
            out_dim,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::of_map(n, n, |a| a.clone())
    }

    /// The completely depolarizing map `X -> tr(X)/n I_m`.
    pub fn depolarizing(n: usize, m: usize) -> Self {
        Self::of_map(n, m, |a| eye(m) * (a.trace() / c(n as f64, 0.0)))
    }

    pub fn apply(&self, a: &CMat) -> Result<CMat> {
        apply_choi(self, a)
    }

    pub fn apply_tuple(&self, t: &MatrixTuple) -> Result<MatrixTuple> {
        let entries = t.entries().iter().map(|a| self.apply(a)).collect::<Result<Vec<_>>>()?;
        Ok(MatrixTuple {
            entries,
            selfadjoint: t.is_selfadjoint(),
            label: None,
        })
    }

    /// `Tr_in J`; equals the image of the identity.
    pub fn unit_image(&self) -> CMat {
        partial_trace(&self.block, Factor::Input, (self.in_dim, self.out_dim)).expect("dims checked")
    }

    pub fn min_eigenvalue(&self) -> f64 {
        lambda_min(&self.block)
    }

    /// Unitality defect `||Tr_in J - I||_op`.
    pub fn unitality_defect(&self) -> f64 {
        op_norm(&(self.unit_image() - eye(self.out_dim)))
    }

    /// Clips negative eigenvalues and renormalizes so that `Tr_in J = I` exactly.
    pub fn repaired_unital(&self) -> Result<Self> {
        let psd = psd_part(&self.block);
        let p = partial_trace(&psd, Factor::Input, (self.in_dim, self.out_dim))?;
        if lambda_min(&p) <= 1e-14 {
            return Err(Error::Numerical("Choi matrix has a singular unit image".into()));
        }
        let s = hermitian_fn(&p, |v| 1.0 / v.sqrt());
        let lift = kron(&eye(self.in_dim), &s);
        Ok(Self {
            block: herm(&(&lift * psd * &lift)),
            in_dim: self.in_dim,
            out_dim: self.out_dim,
        })
    }

    /// Kraus operators `K_l` (`m x n`) with `phi(A) = sum_l K_l A K_l^dagger`.
    pub fn kraus(&self) -> Vec<CMat> {
        let (vals, vecs) = eigh(&self.block);
        let (n, m) = (self.in_dim, self.out_dim);
        let top = vals.iter().fold(0.0f64, |a, &v| a.max(v));
        vals.iter()
            .enumerate()
            .filter(|(_, &v)| v > 1e-13 * top.max(1.0))
            .map(|(l, &v)| {
                let col = vecs.column(l);
                let s = v.sqrt();
                CMat::from_fn(m, n, |a, i| col[i * m + a] * s)
            })
            .collect()
    }
}

/// `phi_J(A) = Tr_in[J (A^T (x) I_m)]`.
pub fn apply_choi(j: &ChoiMatrix, a: &CMat) -> Result<CMat> {
    let (n, m) = (j.in_dim, j.out_dim);
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::Dimension(format!(
            "Choi input dim {n} applied to {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let mut out = CMat::zeros(m, m);
    for i in 0..n {
        for k in 0..n {
            let w = a[(i, k)];
            if w == ZERO {
                continue;
            }
            out += j.block.view((i * m, k * m), (m, m)) * w;
        }
    }
    Ok(out)
}

pub fn random_complex<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> CMat {
    CMat::from_fn(n, m, |_, _| {
        c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    herm(&random_complex(rng, n, n))
}

/// Haar-distributed unitary via QR with phase correction.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let z = random_complex(rng, n, n);
    let qr = z.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut q = q;
    for k in 0..n {
        let d = r[(k, k)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            q[(i, k)] *= ph;
        }
    }
    q
}

/// Random isometry `C^m -> C^n` (`n x m`, `n >= m`).
pub fn random_isometry<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> CMat {
    haar_unitary(rng, n).columns(0, m).into_owned()
}

/// Random unital Choi matrix with full-rank block, `M_n -> M_m`.
pub fn random_unital_choi<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> ChoiMatrix {
    let g = random_complex(rng, n * m, n * m);
    let block = &g * g.adjoint() + eye(n * m).scale(0.1);
    ChoiMatrix::new(block, n, m)
        .and_then(|j| j.repaired_unital())
        .expect("positive definite block")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: &CMat, b: &CMat, tol: f64) -> bool {
        frobenius(&(a - b)) <= tol
    }

    #[test]
    fn kron_identity_and_block_placement() {
        assert_eq!(kron(&eye(2), &eye(3)), eye(6));
        let k = kron(&unit(2, 0, 1), &eye(2));
        assert!(close(&k.view((0, 2), (2, 2)).into_owned(), &eye(2), 0.0));
        assert_eq!(k.view((0, 0), (2, 2)).into_owned(), zeros(2));
        assert_eq!(k.view((2, 0), (2, 2)).into_owned(), zeros(2));
    }

    #[test]
    fn kron_spectrum_is_pairwise_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..5 {
            let a = random_hermitian(&mut rng, 3);
            let b = random_hermitian(&mut rng, 3);
            let sa = hermitian_spectrum(&a).unwrap();
            let sb = hermitian_spectrum(&b).unwrap();
            let mut prods: Vec<f64> = sa.iter().flat_map(|x| sb.iter().map(move |y| x * y)).collect();
            prods.sort_by(|a, b| a.total_cmp(b));
            let sk = hermitian_spectrum(&kron(&a, &b)).unwrap();
            for (p, q) in prods.iter().zip(&sk) {
                assert_abs_diff_eq!(p, q, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn partial_trace_cases() {
        let pt = partial_trace(&eye(4), Factor::Input, (2, 2)).unwrap();
        assert!(close(&pt, &eye(2).scale(2.0), 1e-15));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random_hermitian(&mut rng, 2);
        let sigma = random_hermitian(&mut rng, 3);
        let pt = partial_trace(&kron(&rho, &sigma), Factor::Input, (2, 3)).unwrap();
        assert!(close(&pt, &(&sigma * rho.trace()), 1e-12));
        let pt = partial_trace(&kron(&rho, &sigma), Factor::Output, (2, 3)).unwrap();
        assert!(close(&pt, &(&rho * sigma.trace()), 1e-12));
        let m = random_hermitian(&mut rng, 6);
        // direct summation oracle over the diagonal
        let direct: Complex64 = (0..6).map(|i| m[(i, i)]).sum();
        let pt = partial_trace(&m, Factor::Input, (2, 3)).unwrap();
        assert!((pt.trace() - direct).norm() <= 1e-12);
        assert!(partial_trace(&m, Factor::Input, (2, 2)).is_err());
    }

    #[test]
    fn choi_identity_and_depolarizing() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_complex(&mut rng, 3, 3);
        let id = ChoiMatrix::identity(3);
        assert!(close(&apply_choi(&id, &a).unwrap(), &a, 1e-14));
        let dep = ChoiMatrix::depolarizing(3, 2);
        let img = apply_choi(&dep, &unit(3, 0, 0)).unwrap();
        assert!(close(&img, &eye(2).scale(1.0 / 3.0), 1e-15));
        let j = random_unital_choi(&mut rng, 3, 2);
        assert!(close(&apply_choi(&j, &eye(3)).unwrap(), &eye(2), 1e-10));
        assert!(j.min_eigenvalue() > 0.0);
        assert!(apply_choi(&j, &eye(2)).is_err());
    }

    #[test]
    fn choi_trace_duality() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let j = random_unital_choi(&mut rng, 3, 2);
            let a = random_complex(&mut rng, 3, 3);
            let h = random_complex(&mut rng, 2, 2);
            let lhs = (apply_choi(&j, &a).unwrap() * &h).trace();
            let rhs = (&j.block * kron(&a.transpose(), &h)).trace();
            assert!((lhs - rhs).norm() <= 1e-10);
        }
    }

    #[test]
    fn kraus_reproduces_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let j = random_unital_choi(&mut rng, 2, 3);
        let a = random_complex(&mut rng, 2, 2);
        let ks = j.kraus();
        let via: CMat = ks.iter().map(|k| k * &a * k.adjoint()).fold(zeros(3), |s, t| s + t);
        assert!(close(&via, &apply_choi(&j, &a).unwrap(), 1e-10));
    }

    #[test]
    fn spectra() {
        assert_eq!(hermitian_spectrum(&eye(3)).unwrap(), vec![1.0, 1.0, 1.0]);
        let s = hermitian_spectrum(&pauli_x()).unwrap();
        assert_abs_diff_eq!(s[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s[1], 1.0, epsilon = 1e-14);
        let z = unit(2, 0, 1).scale(2.0);
        let s = hermitian_spectrum(&herm(&z)).unwrap();
        assert_abs_diff_eq!(s[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s[1], 1.0, epsilon = 1e-14);
        assert!(hermitian_spectrum(&z).is_err());
    }

    #[test]
    fn metric_examples() {
        let t = MatrixTuple::new(vec![pauli_x(), pauli_z()]).unwrap();
        assert_eq!(tuple_metric(&t, &t).unwrap(), 0.0);
        let a = MatrixTuple::new(vec![eye(2), zeros(2)]).unwrap();
        let b = MatrixTuple::zero(2, 2, false);
        assert_abs_diff_eq!(tuple_metric(&a, &b).unwrap(), 1.0, epsilon = 1e-14);
        let z = MatrixTuple::new(vec![unit(2, 0, 1).scale(2.0)]).unwrap();
        let zero = MatrixTuple::zero(1, 2, false);
        assert_abs_diff_eq!(tuple_metric(&z, &zero).unwrap(), 2.0, epsilon = 1e-14);
        assert!(tuple_metric(&z, &MatrixTuple::zero(1, 3, false)).is_err());
    }

    #[test]
    fn selfadjoint_coordinate_examples() {
        let t = MatrixTuple::new(vec![pauli_x()]).unwrap();
        let s = selfadjoint_coordinates(&t);
        assert!(close(s.get(0), &pauli_x(), 0.0));
        assert!(close(s.get(1), &zeros(2), 0.0));
        let z = MatrixTuple::new(vec![unit(2, 0, 1).scale(2.0)]).unwrap();
        let s = selfadjoint_coordinates(&z);
        assert!(close(s.get(0), &(unit(2, 0, 1) + unit(2, 1, 0)), 1e-15));
        let expect = unit(2, 0, 1) * (-I) + unit(2, 1, 0) * I;
        assert!(close(s.get(1), &expect, 1e-15));
        let back = from_selfadjoint_coordinates(&s).unwrap();
        assert!(tuple_metric(&back, &z).unwrap() <= 1e-14);
    }

    #[test]
    fn pencil_examples() {
        let a = MatrixTuple::new(vec![unit(2, 0, 1).scale(2.0)]).unwrap();
        let x0 = MatrixTuple::zero(1, 1, false);
        assert_eq!(re_tensor_pencil(&x0, &a).unwrap(), zeros(2));
        let x1 = MatrixTuple::new(vec![eye(1)]).unwrap();
        let s = hermitian_spectrum(&re_tensor_pencil(&x1, &a).unwrap()).unwrap();
        assert_abs_diff_eq!(s[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s[1], 1.0, epsilon = 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = MatrixTuple::new(vec![random_complex(&mut rng, 2, 2)]).unwrap();
        let p1 = re_tensor_pencil(&x.scaled(-1.7), &a).unwrap();
        let p2 = re_tensor_pencil(&x, &a).unwrap() * c(-1.7, 0.0);
        assert!(close(&p1, &p2, 1e-13));
    }

    #[test]
    fn realify_roundtrip_and_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = random_complex(&mut rng, 3, 3);
        let p = &g * g.adjoint();
        let r = realify(&p);
        assert!(close(&derealify(&r), &p, 1e-14));
        let ev = r.symmetric_eigenvalues();
        assert!(ev.iter().all(|&v| v >= -1e-12));
        let h = random_hermitian(&mut rng, 3);
        let lhs = (&realify(&h) * &r).trace();
        assert_abs_diff_eq!(lhs, 2.0 * re_tr_prod(&h, &p), epsilon = 1e-10);
    }

    #[test]
    fn partial_transpose_of_product_is_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random_hermitian(&mut rng, 2);
        let b = random_hermitian(&mut rng, 3);
        let pt = partial_transpose_output(&kron(&a, &b), (2, 3));
        assert!(close(&pt, &kron(&a, &b.transpose()), 1e-14));
    }
}
