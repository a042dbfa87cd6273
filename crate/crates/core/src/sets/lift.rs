//! Semidefinite lifts of representable sets.
//!
//! Every representable node has a homogenized cone
//! `K(S) = {(P, Z) : P >= 0, Z in P^{1/2} S P^{1/2}}` at each level `m`; with
//! `P = I` this is level `m` of `S`. Lifts emit `Z` as affine expressions in
//! a [`Model`] together with a handle that turns a solution back into a
//! [`ConeCert`], which [`verify`] re-checks with dense linear algebra only.

use crate::error::{Error, Result};
use crate::linalg::{c, eye, frobenius, herm, lambda_min, ChoiMatrix, CMat, MatrixTuple};
use crate::sdp::{CMatExpr, HermVar, Model, Solution};

use super::{clifford, FreeConvexSet, Node, Primitive};

/// Output of [`lift`].
#[derive(Debug, Clone)]
pub struct Lifted {
    pub z: Vec<CMatExpr>,
    pub handle: Handle,
    /// Bound on the magnitude of every free variable introduced, if one exists.
    pub free_bound: Option<f64>,
}

#[derive(Debug, Clone)]
pub enum Handle {
    Choi { n: usize, m: usize, parts: Vec<(Vec<usize>, HermVar)> },
    Pencil,
    Contraction,
    Scaled(Box<Handle>),
    Product(Box<Handle>, Box<Handle>),
    Hull { p1: HermVar, left: Box<Handle>, right: Box<Handle> },
    Base(Box<Handle>),
    /// An outer relaxation; its certificates do not certify membership.
    Relaxed(Box<Handle>),
}

/// Exact lifts represent the set; outer lifts represent a superset, used
/// only for upper bounds on supports and for refutations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Outer,
}

/// Certificate that `(P, Z)` lies in the cone of a set.
#[derive(Debug, Clone, PartialEq)]
pub enum ConeCert {
    /// Choi matrix of a CP map with `Tr_in J = P` and `phi(T_j) = Z_j`.
    Choi(ChoiMatrix),
    /// Checked directly from `(P, Z)`.
    Pencil,
    Contraction,
    Scaled(Box<ConeCert>),
    Product(Box<ConeCert>, Box<ConeCert>),
    Hull { p1: CMat, left: Box<ConeCert>, right: Box<ConeCert> },
    Base(Box<ConeCert>),
    Relaxed(Box<ConeCert>),
}

/// Whether `set` has an exact semidefinite lift at level `m`.
pub fn representable(set: &FreeConvexSet, m: usize) -> bool {
    match set.node() {
        Node::MatrixRange(_) | Node::FreeSpectrahedron(_) => true,
        Node::Primitive(Primitive::ContractionSet) => true,
        Node::Primitive(Primitive::BallMin(n)) | Node::Primitive(Primitive::BallMax(n)) => m == 1 || *n <= 1,
        Node::MinOver(k, s) | Node::MaxOver(k, s) => m <= *k && representable(s, m),
        Node::Scaled(_, s) => representable(s, m),
        Node::CartesianProduct(a, b) | Node::HullProduct(a, b) => representable(a, m) && representable(b, m),
    }
}

/// Connected components of the joint sparsity pattern of a tuple.
pub fn block_partition(t: &MatrixTuple) -> Vec<Vec<usize>> {
    let n = t.n();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let scale = t.max_abs().max(1e-300);
    for m in t.entries() {
        for i in 0..n {
            for j in 0..n {
                if i != j && m[(i, j)].norm() > 1e-15 * scale {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_of[r] == usize::MAX {
            root_of[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_of[r]].push(i);
    }
    groups
}

fn submatrix(a: &CMat, s: &[usize]) -> CMat {
    CMat::from_fn(s.len(), s.len(), |i, j| a[(s[i], s[j])])
}

/// Free `m x m` matrix of variables; Hermitian when asked.
pub fn free_matrix(model: &mut Model, m: usize, hermitian: bool) -> CMatExpr {
    let mut out = CMatExpr::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            if hermitian {
                if j < i {
                    continue;
                }
                let re = model.free();
                if i == j {
                    out.at_mut(i, i).re = re;
                } else {
                    let im = model.free();
                    out.at_mut(i, j).re = re.clone();
                    out.at_mut(i, j).im = im.clone();
                    out.at_mut(j, i).re = re;
                    out.at_mut(j, i).im = im.scaled(-1.0);
                }
            } else {
                out.at_mut(i, j).re = model.free();
                out.at_mut(i, j).im = model.free();
            }
        }
    }
    out
}

fn merge_bound(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    Some(a?.max(b?))
}

/// Whether an outer relaxation exists at level `m`.
pub fn outer_representable(set: &FreeConvexSet, m: usize) -> bool {
    match set.node() {
        Node::MinOver(_, s) => representable(s, 1) || outer_representable(s, m),
        Node::Primitive(Primitive::BallMin(_)) => true,
        Node::MaxOver(k, s) => m <= *k && outer_representable(s, m),
        Node::Scaled(_, s) => outer_representable(s, m),
        Node::CartesianProduct(a, b) | Node::HullProduct(a, b) => outer_representable(a, m) && outer_representable(b, m),
        _ => representable(set, m),
    }
}

/// Lifts `set` at level `m` with homogenizing matrix `p` (`tr p <= p_trace`).
pub fn lift(model: &mut Model, set: &FreeConvexSet, m: usize, p: &CMatExpr, p_trace: f64) -> Result<Lifted> {
    lift_mode(model, set, m, p, p_trace, Mode::Exact)
}

/// Lift of a superset: k-minimal envelopes beyond their level are replaced
/// by Schmidt-number or polytope relaxations.
pub fn lift_outer(model: &mut Model, set: &FreeConvexSet, m: usize, p: &CMatExpr, p_trace: f64) -> Result<Lifted> {
    lift_mode(model, set, m, p, p_trace, Mode::Outer)
}

fn relaxed(l: Lifted) -> Lifted {
    Lifted {
        z: l.z,
        handle: Handle::Relaxed(Box::new(l.handle)),
        free_bound: l.free_bound,
    }
}

pub fn lift_mode(model: &mut Model, set: &FreeConvexSet, m: usize, p: &CMatExpr, p_trace: f64, mode: Mode) -> Result<Lifted> {
    let lift = |model: &mut Model, s: &FreeConvexSet, m: usize, p: &CMatExpr, t: f64| lift_mode(model, s, m, p, t, mode);
    if mode == Mode::Outer {
        match set.node() {
            Node::MinOver(k, base) if m > *k => {
                return Ok(relaxed(crate::kcert::relaxation_lift(model, base, *k, m, p, p_trace)?));
            }
            Node::Primitive(Primitive::BallMin(n)) if m > 1 && *n > 1 => {
                let base = FreeConvexSet::matrix_range(clifford(*n));
                return Ok(relaxed(crate::kcert::relaxation_lift(model, &base, 1, m, p, p_trace)?));
            }
            _ => {}
        }
    }
    match set.node() {
        Node::MatrixRange(t) => Ok(lift_range(model, t, m, p, p_trace)),
        Node::FreeSpectrahedron(a) => {
            let hermitian = a.is_selfadjoint();
            let z: Vec<CMatExpr> = (0..a.d()).map(|_| free_matrix(model, m, hermitian)).collect();
            let pn = a.n();
            let mut pencil = p.kron_const(&eye(pn));
            for (zj, aj) in z.iter().zip(a.entries()) {
                pencil.add_mul(&zj.kron_const(aj).herm_part(), c(-1.0, 0.0));
            }
            model.psd(&pencil);
            Ok(Lifted {
                z,
                handle: Handle::Pencil,
                free_bound: None,
            })
        }
        Node::Primitive(Primitive::ContractionSet) => {
            let z = free_matrix(model, m, false);
            let block = CMatExpr::blocks(&[vec![p.clone(), z.clone()], vec![z.adjoint(), p.clone()]]);
            let (slack, _) = model.psd(&block);
            model.bound_trace(slack, 2.0 * p_trace);
            Ok(Lifted {
                z: vec![z],
                handle: Handle::Contraction,
                free_bound: Some(p_trace.max(1.0)),
            })
        }
        Node::Primitive(Primitive::BallMin(n)) | Node::Primitive(Primitive::BallMax(n)) => {
            if m > 1 && *n > 1 {
                return Err(Error::NotRepresentable(format!(
                    "{} at level {m} has no finite semidefinite lift",
                    set.describe()
                )));
            }
            Ok(lift_range(model, &clifford(*n), m, p, p_trace))
        }
        Node::MinOver(k, s) | Node::MaxOver(k, s) => {
            if m > *k {
                return Err(Error::NotRepresentable(format!(
                    "{} at level {m} exceeds its envelope level",
                    set.describe()
                )));
            }
            let l = lift(model, s, m, p, p_trace)?;
            Ok(Lifted {
                z: l.z,
                handle: Handle::Base(Box::new(l.handle)),
                free_bound: l.free_bound,
            })
        }
        Node::Scaled(r, s) => {
            let l = lift(model, s, m, p, p_trace)?;
            Ok(Lifted {
                z: l.z.iter().map(|e| e.scaled(*r)).collect(),
                handle: Handle::Scaled(Box::new(l.handle)),
                free_bound: l.free_bound,
            })
        }
        Node::CartesianProduct(a, b) => {
            let la = lift(model, a, m, p, p_trace)?;
            let lb = lift(model, b, m, p, p_trace)?;
            let mut z = la.z;
            z.extend(lb.z);
            Ok(Lifted {
                z,
                handle: Handle::Product(Box::new(la.handle), Box::new(lb.handle)),
                free_bound: merge_bound(la.free_bound, lb.free_bound),
            })
        }
        Node::HullProduct(a, b) => {
            let p1 = model.herm_psd(m);
            model.bound_trace(p1, p_trace);
            let mut rest = p.clone();
            rest.add_mul(&p1.expr(), c(-1.0, 0.0));
            let (p2, _) = model.psd(&rest);
            model.bound_trace(p2, p_trace);
            let la = lift(model, a, m, &p1.expr(), p_trace)?;
            let lb = lift(model, b, m, &p2.expr(), p_trace)?;
            let mut z = la.z;
            z.extend(lb.z);
            Ok(Lifted {
                z,
                handle: Handle::Hull {
                    p1,
                    left: Box::new(la.handle),
                    right: Box::new(lb.handle),
                },
                free_bound: merge_bound(la.free_bound, lb.free_bound),
            })
        }
    }
}

fn lift_range(model: &mut Model, t: &MatrixTuple, m: usize, p: &CMatExpr, p_trace: f64) -> Lifted {
    let n = t.n();
    let mut z = vec![CMatExpr::zeros(m, m); t.d()];
    let mut unit = CMatExpr::zeros(m, m);
    let mut parts = Vec::new();
    for s in block_partition(t) {
        let j = model.herm_psd(s.len() * m);
        model.bound_trace(j, p_trace);
        let je = j.expr();
        unit.add_mul(&je.contract_input(s.len(), &eye(s.len())), c(1.0, 0.0));
        for (zj, tj) in z.iter_mut().zip(t.entries()) {
            // phi(A) = Tr_in[J (A^T (x) I)] contracts J against A entrywise
            let w = submatrix(tj, &s);
            zj.add_mul(&je.contract_input(s.len(), &w), c(1.0, 0.0));
        }
        parts.push((s, j));
    }
    unit.add_mul(p, c(-1.0, 0.0));
    model.eq_matrix(&unit, &CMat::zeros(m, m), true);
    Lifted {
        z,
        handle: Handle::Choi { n, m, parts },
        free_bound: Some(0.0),
    }
}

impl Handle {
    pub fn extract(&self, sol: &Solution) -> ConeCert {
        match self {
            Handle::Choi { n, m, parts } => {
                let mut full = CMat::zeros(n * m, n * m);
                for (s, v) in parts {
                    let js = sol.herm(*v);
                    for (si, &i) in s.iter().enumerate() {
                        for (sk, &k) in s.iter().enumerate() {
                            full.view_mut((i * m, k * m), (*m, *m))
                                .copy_from(&js.view((si * m, sk * m), (*m, *m)));
                        }
                    }
                }
                ConeCert::Choi(ChoiMatrix::new(full, *n, *m).expect("shape"))
            }
            Handle::Pencil => ConeCert::Pencil,
            Handle::Contraction => ConeCert::Contraction,
            Handle::Scaled(h) => ConeCert::Scaled(Box::new(h.extract(sol))),
            Handle::Product(a, b) => ConeCert::Product(Box::new(a.extract(sol)), Box::new(b.extract(sol))),
            Handle::Hull { p1, left, right } => ConeCert::Hull {
                p1: sol.herm(*p1),
                left: Box::new(left.extract(sol)),
                right: Box::new(right.extract(sol)),
            },
            Handle::Base(h) => ConeCert::Base(Box::new(h.extract(sol))),
            Handle::Relaxed(h) => ConeCert::Relaxed(Box::new(h.extract(sol))),
        }
    }
}

impl ConeCert {
    /// `wa * a + wb * b` for certificates of the same shape (`wa, wb >= 0`).
    pub fn combine(a: &ConeCert, wa: f64, b: &ConeCert, wb: f64) -> Result<ConeCert> {
        use ConeCert::*;
        Ok(match (a, b) {
            (Choi(x), Choi(y)) => {
                if (x.in_dim, x.out_dim) != (y.in_dim, y.out_dim) {
                    return Err(Error::Dimension("Choi certificates of different shape".into()));
                }
                Choi(ChoiMatrix::new(
                    &x.block * c(wa, 0.0) + &y.block * c(wb, 0.0),
                    x.in_dim,
                    x.out_dim,
                )?)
            }
            (Pencil, Pencil) => Pencil,
            (Contraction, Contraction) => Contraction,
            (Scaled(x), Scaled(y)) => Scaled(Box::new(Self::combine(x, wa, y, wb)?)),
            (Base(x), Base(y)) => Base(Box::new(Self::combine(x, wa, y, wb)?)),
            (Relaxed(x), Relaxed(y)) => Relaxed(Box::new(Self::combine(x, wa, y, wb)?)),
            (Product(x1, x2), Product(y1, y2)) => Product(
                Box::new(Self::combine(x1, wa, y1, wb)?),
                Box::new(Self::combine(x2, wa, y2, wb)?),
            ),
            (
                Hull { p1: p, left: l, right: r },
                Hull { p1: q, left: l2, right: r2 },
            ) => Hull {
                p1: p * c(wa, 0.0) + q * c(wb, 0.0),
                left: Box::new(Self::combine(l, wa, l2, wb)?),
                right: Box::new(Self::combine(r, wa, r2, wb)?),
            },
            _ => return Err(Error::InvalidArgument("certificates of different shape".into())),
        })
    }

    /// Same certificate with every Choi matrix replaced by its nearest
    /// PSD matrix (eigenvalue clipping); leaves everything else alone.
    pub fn clipped(&self) -> ConeCert {
        use ConeCert::*;
        match self {
            Choi(j) => Choi(ChoiMatrix {
                block: crate::linalg::psd_part(&herm(&j.block)),
                ..j.clone()
            }),
            Scaled(x) => Scaled(Box::new(x.clipped())),
            Base(x) => Base(Box::new(x.clipped())),
            Relaxed(x) => Relaxed(Box::new(x.clipped())),
            Product(a, b) => Product(Box::new(a.clipped()), Box::new(b.clipped())),
            Hull { p1, left, right } => Hull {
                p1: herm(p1),
                left: Box::new(left.clipped()),
                right: Box::new(right.clipped()),
            },
            other => other.clone(),
        }
    }

    pub fn is_relaxed(&self) -> bool {
        use ConeCert::*;
        match self {
            Relaxed(_) => true,
            Scaled(x) | Base(x) => x.is_relaxed(),
            Product(a, b) => a.is_relaxed() || b.is_relaxed(),
            Hull { left, right, .. } => left.is_relaxed() || right.is_relaxed(),
            _ => false,
        }
    }

    /// The single Choi matrix when the tree is a (possibly wrapped) range.
    pub fn as_choi(&self) -> Option<&ChoiMatrix> {
        match self {
            ConeCert::Choi(j) => Some(j),
            ConeCert::Scaled(x) | ConeCert::Base(x) => x.as_choi(),
            _ => None,
        }
    }
}

/// A point of level `m` and its certificate, with `P = I`.
pub fn center(set: &FreeConvexSet, m: usize) -> Result<(Vec<CMat>, ConeCert)> {
    let cen = set.center();
    let z: Vec<CMat> = cen.iter().map(|&v| eye(m) * v).collect();
    Ok((z, center_cert(set, m, 1.0)?))
}

fn center_cert(set: &FreeConvexSet, m: usize, w: f64) -> Result<ConeCert> {
    Ok(match set.node() {
        Node::MatrixRange(t) => {
            let n = t.n();
            ConeCert::Choi(ChoiMatrix::new(eye(n * m) * c(w / n as f64, 0.0), n, m)?)
        }
        Node::Primitive(Primitive::BallMin(k)) | Node::Primitive(Primitive::BallMax(k)) => {
            let n = clifford(*k).n();
            ConeCert::Choi(ChoiMatrix::new(eye(n * m) * c(w / n as f64, 0.0), n, m)?)
        }
        Node::FreeSpectrahedron(_) => ConeCert::Pencil,
        Node::Primitive(Primitive::ContractionSet) => ConeCert::Contraction,
        Node::MinOver(_, s) | Node::MaxOver(_, s) => ConeCert::Base(Box::new(center_cert(s, m, w)?)),
        Node::Scaled(_, s) => ConeCert::Scaled(Box::new(center_cert(s, m, w)?)),
        Node::CartesianProduct(a, b) => ConeCert::Product(Box::new(center_cert(a, m, w)?), Box::new(center_cert(b, m, w)?)),
        Node::HullProduct(a, b) => ConeCert::Hull {
            p1: eye(m) * c(w / 2.0, 0.0),
            left: Box::new(center_cert(a, m, w / 2.0)?),
            right: Box::new(center_cert(b, m, w / 2.0)?),
        },
    })
}

/// Largest violation of the cone conditions for `(P, Z)` under `cert`:
/// negative eigenvalues and equality residuals, measured absolutely.
pub fn verify(set: &FreeConvexSet, p: &CMat, z: &[CMat], cert: &ConeCert) -> Result<f64> {
    if z.len() != set.d() {
        return Err(Error::Dimension(format!("point has {} coordinates, set has {}", z.len(), set.d())));
    }
    let m = p.nrows();
    let choi_check = |t: &MatrixTuple, j: &ChoiMatrix| -> Result<f64> {
        if j.in_dim != t.n() || j.out_dim != m {
            return Err(Error::Dimension("Choi certificate has the wrong shape".into()));
        }
        let mut worst = (-j.min_eigenvalue()).max(0.0);
        worst = worst.max(frobenius(&(j.unit_image() - p)));
        for (tj, zj) in t.entries().iter().zip(z) {
            worst = worst.max(frobenius(&(j.apply(tj)? - zj)));
        }
        Ok(worst)
    };
    let bad = || Error::InvalidArgument(format!("certificate does not match the shape of {}", set.describe()));
    match (set.node(), cert) {
        (Node::MatrixRange(t), ConeCert::Choi(j)) => choi_check(t, j),
        (Node::Primitive(Primitive::BallMin(n)), ConeCert::Choi(j))
        | (Node::Primitive(Primitive::BallMax(n)), ConeCert::Choi(j)) => choi_check(&clifford(*n), j),
        (Node::FreeSpectrahedron(a), ConeCert::Pencil) => {
            let mut pen = crate::linalg::kron(p, &eye(a.n()));
            for (zj, aj) in z.iter().zip(a.entries()) {
                pen -= herm(&crate::linalg::kron(zj, aj));
            }
            Ok((-lambda_min(&herm(&pen))).max(0.0))
        }
        (Node::Primitive(Primitive::ContractionSet), ConeCert::Contraction) => {
            let mut b = CMat::zeros(2 * m, 2 * m);
            b.view_mut((0, 0), (m, m)).copy_from(p);
            b.view_mut((m, m), (m, m)).copy_from(p);
            b.view_mut((0, m), (m, m)).copy_from(&z[0]);
            b.view_mut((m, 0), (m, m)).copy_from(&z[0].adjoint());
            Ok((-lambda_min(&herm(&b))).max(0.0))
        }
        (Node::MinOver(k, s), ConeCert::Base(x)) | (Node::MaxOver(k, s), ConeCert::Base(x)) => {
            if m > *k {
                return Err(bad());
            }
            verify(s, p, z, x)
        }
        (Node::Scaled(r, s), ConeCert::Scaled(x)) => {
            let zs: Vec<CMat> = z.iter().map(|a| a * c(1.0 / r, 0.0)).collect();
            Ok(verify(s, p, &zs, x)? * r.max(1.0))
        }
        (Node::CartesianProduct(a, b), ConeCert::Product(x, y)) => {
            let (za, zb) = z.split_at(a.d());
            Ok(verify(a, p, za, x)?.max(verify(b, p, zb, y)?))
        }
        (Node::HullProduct(a, b), ConeCert::Hull { p1, left, right }) => {
            let (za, zb) = z.split_at(a.d());
            let p2 = p - p1;
            let mut worst = (-lambda_min(&herm(p1))).max(0.0).max((-lambda_min(&herm(&p2))).max(0.0));
            worst = worst.max(crate::linalg::hermitian_deviation(p1));
            worst = worst.max(verify(a, p1, za, left)?);
            Ok(worst.max(verify(b, &p2, zb, right)?))
        }
        _ => Err(bad()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_x, pauli_z, unit};

    #[test]
    fn partition_finds_blocks() {
        let t = MatrixTuple::new(vec![unit(4, 0, 1), unit(4, 2, 3)]).unwrap();
        assert_eq!(block_partition(&t), vec![vec![0, 1], vec![2, 3]]);
        let d = MatrixTuple::new(vec![CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]))]).unwrap();
        assert_eq!(block_partition(&d).len(), 3);
    }

    #[test]
    fn centers_verify() {
        let sets = [
            FreeConvexSet::ando(),
            FreeConvexSet::contraction_set(),
            FreeConvexSet::matrix_range(MatrixTuple::selfadjoint(vec![pauli_x(), pauli_z()]).unwrap()),
            FreeConvexSet::free_spectrahedron(MatrixTuple::selfadjoint(vec![pauli_x(), pauli_z()]).unwrap()),
        ];
        for s in sets {
            for m in 1..=3 {
                let (z, cert) = center(&s, m).unwrap();
                assert!(verify(&s, &eye(m), &z, &cert).unwrap() < 1e-12, "{}", s.describe());
            }
            let h = FreeConvexSet::hull_product(&s, &FreeConvexSet::contraction_set().clone()).ok();
            if let Some(h) = h {
                let (z, cert) = center(&h, 2).unwrap();
                assert!(verify(&h, &eye(2), &z, &cert).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn lift_support_of_ando_hull_matches_components() {
        // support of W(2E12) x1 W(2E12) at level 1 along (1, 0) is 1
        let a = FreeConvexSet::contraction_set();
        let h = FreeConvexSet::hull_product(&a, &a).unwrap();
        let mut model = Model::new();
        let l = lift(&mut model, &h, 1, &CMatExpr::from_const(&eye(1)), 1.0).unwrap();
        let obj = l.z[0].re_trace_with(&eye(1));
        model.maximize(&obj);
        if let Some(b) = l.free_bound {
            model.bound_free(b);
        }
        let sol = model.solve().unwrap();
        assert!(sol.is_optimal());
        assert!((sol.value() - 1.0).abs() < 1e-7, "{}", sol.value());
        let cert = l.handle.extract(&sol);
        let z: Vec<CMat> = l.z.iter().map(|e| eval_matrix(&sol, e)).collect();
        assert!(verify(&h, &eye(1), &z, &cert).unwrap() < 1e-7);
    }
}

/// Evaluates a matrix expression at a solution.
pub fn eval_matrix(sol: &Solution, e: &CMatExpr) -> CMat {
    CMat::from_fn(e.rows, e.cols, |i, j| {
        let x = e.at(i, j);
        c(sol.eval(&x.re), sol.eval(&x.im))
    })
}
