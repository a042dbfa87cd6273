//! Representation trees for matrix convex sets.

pub mod catalog;
pub mod expr;
pub mod geometry;
pub mod lift;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, unit, CMat, MatrixTuple};

pub use geometry::{geometry, recoordinatize, GeometryReport, Recoordinatization};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "name", content = "n")]
pub enum Primitive {
    /// All contractions, i.e. the minimal set over the closed unit disk.
    ContractionSet,
    /// Minimal set over the real Euclidean ball in `n` selfadjoint coordinates.
    BallMin(usize),
    /// Maximal set over the real Euclidean ball.
    BallMax(usize),
}

/// Known closed form of level one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Level1 {
    /// Centered disk of the given radius (one complex coordinate).
    Disk(f64),
    /// Centered Euclidean ball in `n` selfadjoint coordinates.
    Ball(usize, f64),
}

impl Level1 {
    fn scaled(self, r: f64) -> Self {
        match self {
            Level1::Disk(a) => Level1::Disk(a * r),
            Level1::Ball(n, a) => Level1::Ball(n, a * r),
        }
    }
}

/// Structural facts that the rewrite rules may rely on.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnvelopeFlags {
    /// The set equals its minimal envelope over this level.
    pub min_level: Option<usize>,
    /// The set equals its maximal envelope over this level.
    pub max_level: Option<usize>,
    /// Polar rewrites to this primitive rather than a free spectrahedron.
    pub polar_primitive: Option<Primitive>,
    pub level1: Option<Level1>,
}

impl EnvelopeFlags {
    fn swapped(self) -> Self {
        Self {
            min_level: self.max_level,
            max_level: self.min_level,
            polar_primitive: None,
            level1: self.level1.map(|l| match l {
                Level1::Disk(r) => Level1::Disk(1.0 / r),
                Level1::Ball(n, r) => Level1::Ball(n, 1.0 / r),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    MatrixRange(MatrixTuple),
    FreeSpectrahedron(MatrixTuple),
    MinOver(usize, FreeConvexSet),
    MaxOver(usize, FreeConvexSet),
    Scaled(f64, FreeConvexSet),
    CartesianProduct(FreeConvexSet, FreeConvexSet),
    HullProduct(FreeConvexSet, FreeConvexSet),
    Primitive(Primitive),
}

#[derive(Debug, Clone, PartialEq)]
struct SetData {
    node: Node,
    d: usize,
    selfadjoint: bool,
    flags: EnvelopeFlags,
    note: Option<String>,
}

/// An immutable, cheaply clonable matrix convex set.
#[derive(Clone, PartialEq)]
pub struct FreeConvexSet(Arc<SetData>);

impl fmt::Debug for FreeConvexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}

/// Anticommuting selfadjoint unitaries whose level-one range is the unit ball.
pub fn clifford(n: usize) -> MatrixTuple {
    let x = crate::linalg::pauli_x();
    let y = crate::linalg::pauli_y();
    let z = crate::linalg::pauli_z();
    let id = crate::linalg::eye(2);
    if n == 1 {
        return MatrixTuple::selfadjoint(vec![z]).expect("hermitian");
    }
    // Jordan-Wigner: gamma_{2q} = Z..Z X I..I, gamma_{2q+1} = Z..Z Y I..I
    let qubits = n.div_ceil(2);
    let mut out = Vec::with_capacity(n);
    for g in 0..n {
        let q = g / 2;
        let mut m = CMat::identity(1, 1);
        for k in 0..qubits {
            let f = if k < q {
                &z
            } else if k == q {
                if g % 2 == 0 {
                    &x
                } else {
                    &y
                }
            } else {
                &id
            };
            m = m.kronecker(f);
        }
        out.push(m);
    }
    // Prefer (sigma_x, sigma_z) for n = 2 so the catalog example reads naturally.
    if n == 2 {
        out = vec![x, z];
    }
    MatrixTuple::selfadjoint(out).expect("hermitian").with_label(format!("clifford{n}"))
}

/// `2 E_12`, whose matrix range is the maximal set over the disk.
pub fn ando_tuple() -> MatrixTuple {
    MatrixTuple::new(vec![unit(2, 0, 1) * c(2.0, 0.0)]).expect("shape").with_label("ando")
}

impl FreeConvexSet {
    fn make(node: Node, d: usize, selfadjoint: bool, flags: EnvelopeFlags) -> Self {
        Self(Arc::new(SetData {
            node,
            d,
            selfadjoint,
            flags,
            note: None,
        }))
    }

    pub fn with_note(self, note: impl Into<String>) -> Self {
        let mut data = (*self.0).clone();
        data.note = Some(note.into());
        Self(Arc::new(data))
    }

    pub fn with_flags(self, f: impl FnOnce(&mut EnvelopeFlags)) -> Self {
        let mut data = (*self.0).clone();
        f(&mut data.flags);
        Self(Arc::new(data))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn d(&self) -> usize {
        self.0.d
    }

    pub fn is_selfadjoint(&self) -> bool {
        self.0.selfadjoint
    }

    /// Real dimension of level one.
    pub fn real_dim(&self) -> usize {
        if self.0.selfadjoint {
            self.0.d
        } else {
            2 * self.0.d
        }
    }

    pub fn flags(&self) -> EnvelopeFlags {
        self.0.flags
    }

    pub fn note(&self) -> Option<&str> {
        self.0.note.as_deref()
    }

    pub fn matrix_range(t: MatrixTuple) -> Self {
        let n = t.n();
        let mut flags = EnvelopeFlags {
            min_level: Some(n),
            ..Default::default()
        };
        if t.is_commuting_normal(1e-12) {
            flags.min_level = Some(1);
            if simplex_spectrum(&t) {
                // over a simplex the minimal and maximal sets coincide
                flags.max_level = Some(1);
            }
        }
        if t.is_selfadjoint() && t.d() == 1 {
            flags.min_level = Some(1);
            flags.max_level = Some(1);
        }
        if t.is_selfadjoint() && t.d() >= 2 && is_clifford_family(&t) {
            flags.level1 = Some(Level1::Ball(t.d(), 1.0));
        }
        if !t.is_selfadjoint() && t.d() == 1 && n == 2 {
            let m = t.get(0);
            let tr = m.trace();
            let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
            let s = crate::linalg::op_norm(m).max(1.0);
            if crate::linalg::op_norm(m) > 0.0 && tr.norm() <= 1e-14 * s && det.norm() <= 1e-14 * s * s {
                // nilpotent 2x2 is a multiple of E_12 up to unitary conjugation:
                // level one is the disk of radius |T|/2 and the set is maximal over it
                let r = crate::linalg::op_norm(m) / 2.0;
                flags.level1 = Some(Level1::Disk(r));
                flags.max_level = Some(1);
                if (r - 1.0).abs() <= 1e-12 {
                    flags.polar_primitive = Some(Primitive::ContractionSet);
                }
            }
        }
        let (d, sa) = (t.d(), t.is_selfadjoint());
        Self::make(Node::MatrixRange(t), d, sa, flags)
    }

    pub fn free_spectrahedron(a: MatrixTuple) -> Self {
        let p = a.n();
        let mut flags = EnvelopeFlags {
            max_level: Some(p),
            ..Default::default()
        };
        if a.is_commuting_normal(1e-12) {
            flags.max_level = Some(1);
        }
        if a.is_selfadjoint() && a.d() == 1 {
            flags.min_level = Some(1);
            flags.max_level = Some(1);
        }
        let (d, sa) = (a.d(), a.is_selfadjoint());
        Self::make(Node::FreeSpectrahedron(a), d, sa, flags)
    }

    pub fn primitive(p: Primitive) -> Self {
        match p {
            Primitive::ContractionSet => Self::make(
                Node::Primitive(p),
                1,
                false,
                EnvelopeFlags {
                    min_level: Some(1),
                    max_level: None,
                    polar_primitive: None,
                    level1: Some(Level1::Disk(1.0)),
                },
            ),
            Primitive::BallMin(n) => Self::make(
                Node::Primitive(p),
                n,
                true,
                EnvelopeFlags {
                    min_level: Some(1),
                    max_level: if n <= 1 { Some(1) } else { None },
                    polar_primitive: None,
                    level1: Some(Level1::Ball(n, 1.0)),
                },
            ),
            Primitive::BallMax(n) => Self::make(
                Node::Primitive(p),
                n,
                true,
                EnvelopeFlags {
                    min_level: if n <= 1 { Some(1) } else { None },
                    max_level: Some(1),
                    polar_primitive: None,
                    level1: Some(Level1::Ball(n, 1.0)),
                },
            ),
        }
    }

    pub fn contraction_set() -> Self {
        Self::primitive(Primitive::ContractionSet)
    }

    /// `W(2 E_12)`: the maximal set over the disk; its polar is the contraction set.
    pub fn ando() -> Self {
        Self::matrix_range(ando_tuple())
    }

    pub fn is_bounded_hint(&self) -> bool {
        !matches!(self.node(), Node::FreeSpectrahedron(_))
    }

    pub fn min_over(k: usize, base: &FreeConvexSet) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("envelope level k must be >= 1".into()));
        }
        let f = base.flags();
        if f.min_level.is_some_and(|m| m <= k) {
            return Ok(base.clone());
        }
        match base.node() {
            Node::MinOver(k2, inner) => return Self::min_over(k.min(*k2), inner),
            Node::MaxOver(k2, inner) if k <= *k2 => return Self::min_over(k, inner),
            Node::Scaled(r, inner) => return Self::scale(*r, &Self::min_over(k, inner)?),
            Node::HullProduct(a, b) => {
                return Self::hull_product(&Self::min_over(k, a)?, &Self::min_over(k, b)?);
            }
            _ => {}
        }
        if k == 1 {
            match f.level1 {
                Some(Level1::Disk(r)) => return Self::scale(r, &Self::contraction_set()),
                Some(Level1::Ball(n, r)) => return Self::scale(r, &Self::primitive(Primitive::BallMin(n))),
                None => {}
            }
        }
        Ok(Self::make(
            Node::MinOver(k, base.clone()),
            base.d(),
            base.is_selfadjoint(),
            EnvelopeFlags {
                min_level: Some(k),
                max_level: None,
                polar_primitive: None,
                level1: f.level1,
            },
        ))
    }

    pub fn max_over(k: usize, base: &FreeConvexSet) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("envelope level k must be >= 1".into()));
        }
        let f = base.flags();
        if f.max_level.is_some_and(|m| m <= k) {
            return Ok(base.clone());
        }
        match base.node() {
            Node::MaxOver(k2, inner) => return Self::max_over(k.min(*k2), inner),
            Node::MinOver(k2, inner) if k <= *k2 => return Self::max_over(k, inner),
            Node::Scaled(r, inner) => return Self::scale(*r, &Self::max_over(k, inner)?),
            Node::CartesianProduct(a, b) => {
                return Self::cartesian_product(&Self::max_over(k, a)?, &Self::max_over(k, b)?);
            }
            _ => {}
        }
        if k == 1 {
            match f.level1 {
                Some(Level1::Disk(r)) => return Self::scale(r, &Self::ando()),
                Some(Level1::Ball(n, r)) => return Self::scale(r, &Self::primitive(Primitive::BallMax(n))),
                None => {}
            }
        }
        Ok(Self::make(
            Node::MaxOver(k, base.clone()),
            base.d(),
            base.is_selfadjoint(),
            EnvelopeFlags {
                min_level: None,
                max_level: Some(k),
                polar_primitive: None,
                level1: f.level1,
            },
        ))
    }

    pub fn scale(r: f64, base: &FreeConvexSet) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidArgument(format!("scale factor must be positive, got {r}")));
        }
        if (r - 1.0).abs() <= 4.0 * f64::EPSILON {
            return Ok(base.clone());
        }
        if let Node::Scaled(r2, inner) = base.node() {
            return Self::scale(r * r2, inner);
        }
        let mut flags = base.flags();
        flags.level1 = flags.level1.map(|l| l.scaled(r));
        flags.polar_primitive = None;
        Ok(Self::make(Node::Scaled(r, base.clone()), base.d(), base.is_selfadjoint(), flags))
    }

    fn check_pair(a: &FreeConvexSet, b: &FreeConvexSet) -> Result<()> {
        if a.is_selfadjoint() != b.is_selfadjoint() {
            return Err(Error::InvalidArgument(
                "products need both factors in the same coordinate kind (selfadjoint or complex)".into(),
            ));
        }
        Ok(())
    }

    pub fn cartesian_product(a: &FreeConvexSet, b: &FreeConvexSet) -> Result<Self> {
        Self::check_pair(a, b)?;
        let (fa, fb) = (a.flags(), b.flags());
        let flags = EnvelopeFlags {
            min_level: None,
            max_level: match (fa.max_level, fb.max_level) {
                (Some(x), Some(y)) => Some(x.max(y)),
                _ => None,
            },
            polar_primitive: None,
            level1: None,
        };
        Ok(Self::make(
            Node::CartesianProduct(a.clone(), b.clone()),
            a.d() + b.d(),
            a.is_selfadjoint(),
            flags,
        ))
    }

    pub fn hull_product(a: &FreeConvexSet, b: &FreeConvexSet) -> Result<Self> {
        Self::check_pair(a, b)?;
        if let (Node::MatrixRange(t), Node::MatrixRange(r)) = (a.node(), b.node()) {
            return Ok(Self::matrix_range(box_sum(t, r)?));
        }
        let (fa, fb) = (a.flags(), b.flags());
        let flags = EnvelopeFlags {
            min_level: match (fa.min_level, fb.min_level) {
                (Some(x), Some(y)) => Some(x.max(y)),
                _ => None,
            },
            max_level: None,
            polar_primitive: None,
            level1: None,
        };
        Ok(Self::make(
            Node::HullProduct(a.clone(), b.clone()),
            a.d() + b.d(),
            a.is_selfadjoint(),
            flags,
        ))
    }

    /// Structural polar. Zero must be interior to level one for the result to
    /// be meaningful; [`FreeConvexSet::polar`] checks that numerically.
    pub fn polar_unchecked(&self) -> Result<Self> {
        if let Some(p) = self.flags().polar_primitive {
            return Ok(Self::primitive(p));
        }
        let f = self.flags();
        let out = match self.node() {
            Node::MatrixRange(t) => {
                let mut s = Self::free_spectrahedron(t.clone());
                let mut data = (*s.0).clone();
                data.flags = merge_flags(data.flags, f.swapped());
                s.0 = Arc::new(data);
                s
            }
            Node::FreeSpectrahedron(a) => {
                let mut s = Self::matrix_range(a.clone());
                let mut data = (*s.0).clone();
                data.flags = merge_flags(data.flags, f.swapped());
                s.0 = Arc::new(data);
                s
            }
            Node::MinOver(k, s) => Self::max_over(*k, &s.polar_unchecked()?)?,
            Node::MaxOver(k, s) => Self::min_over(*k, &s.polar_unchecked()?)?,
            Node::Scaled(r, s) => Self::scale(1.0 / r, &s.polar_unchecked()?)?,
            Node::CartesianProduct(a, b) => Self::hull_product_raw(&a.polar_unchecked()?, &b.polar_unchecked()?)?,
            Node::HullProduct(a, b) => Self::cartesian_product(&a.polar_unchecked()?, &b.polar_unchecked()?)?,
            Node::Primitive(Primitive::ContractionSet) => Self::ando(),
            Node::Primitive(Primitive::BallMin(n)) => Self::primitive(Primitive::BallMax(*n)),
            Node::Primitive(Primitive::BallMax(n)) => Self::primitive(Primitive::BallMin(*n)),
        };
        Ok(out)
    }

    /// Hull product without the box-sum rewrite, so polar stays an involution.
    fn hull_product_raw(a: &FreeConvexSet, b: &FreeConvexSet) -> Result<Self> {
        Self::check_pair(a, b)?;
        let (fa, fb) = (a.flags(), b.flags());
        let flags = EnvelopeFlags {
            min_level: match (fa.min_level, fb.min_level) {
                (Some(x), Some(y)) => Some(x.max(y)),
                _ => None,
            },
            ..Default::default()
        };
        Ok(Self::make(
            Node::HullProduct(a.clone(), b.clone()),
            a.d() + b.d(),
            a.is_selfadjoint(),
            flags,
        ))
    }

    /// Polar dual after checking that zero is interior to level one.
    pub fn polar(&self) -> Result<Self> {
        let g = geometry::quick_inner_radius(self)?;
        if !(g > 1e-9) {
            return Err(Error::Precondition(format!(
                "polar requires 0 in the interior of level one (certified inner radius {g:.3e})"
            )));
        }
        self.polar_unchecked()
    }

    /// Closed-form level-one center, used as the gauge origin.
    pub fn center(&self) -> Vec<num_complex::Complex64> {
        match self.node() {
            Node::MatrixRange(t) => {
                let n = t.n() as f64;
                t.entries().iter().map(|m| m.trace() / n).collect()
            }
            Node::FreeSpectrahedron(_) | Node::Primitive(_) => vec![c(0.0, 0.0); self.d()],
            Node::MinOver(_, s) | Node::MaxOver(_, s) => s.center(),
            Node::Scaled(r, s) => s.center().into_iter().map(|z| z * *r).collect(),
            Node::CartesianProduct(a, b) => {
                let mut v = a.center();
                v.extend(b.center());
                v
            }
            Node::HullProduct(a, b) => {
                let mut v: Vec<_> = a.center().into_iter().map(|z| z * 0.5).collect();
                v.extend(b.center().into_iter().map(|z| z * 0.5));
                v
            }
        }
    }

    pub fn describe(&self) -> String {
        match self.node() {
            Node::MatrixRange(t) => format!("W({})", tuple_name(t)),
            Node::FreeSpectrahedron(a) => format!("D({})", tuple_name(a)),
            Node::MinOver(k, s) => format!("Wmin_{k}({})", s.describe()),
            Node::MaxOver(k, s) => format!("Wmax_{k}({})", s.describe()),
            Node::Scaled(r, s) => format!("{r}*{}", s.describe()),
            Node::CartesianProduct(a, b) => format!("({} x {})", a.describe(), b.describe()),
            Node::HullProduct(a, b) => format!("({} x1 {})", a.describe(), b.describe()),
            Node::Primitive(Primitive::ContractionSet) => "Contractions".into(),
            Node::Primitive(Primitive::BallMin(n)) => format!("BallMin({n})"),
            Node::Primitive(Primitive::BallMax(n)) => format!("BallMax({n})"),
        }
    }

    /// Splits a tuple into the coordinate ranges of the two product factors.
    pub fn split_point(&self, x: &MatrixTuple) -> Option<(MatrixTuple, MatrixTuple)> {
        match self.node() {
            Node::CartesianProduct(a, _) | Node::HullProduct(a, _) => {
                let (l, r) = x.entries().split_at(a.d());
                let mk = |v: &[CMat]| {
                    if x.is_selfadjoint() {
                        MatrixTuple::selfadjoint(v.to_vec())
                    } else {
                        MatrixTuple::new(v.to_vec())
                    }
                };
                Some((mk(l).ok()?, mk(r).ok()?))
            }
            _ => None,
        }
    }

    /// Checks that a point has the set's coordinate shape.
    pub fn check_point(&self, x: &MatrixTuple) -> Result<()> {
        if x.d() != self.d() {
            return Err(Error::Dimension(format!("point has d = {}, set has d = {}", x.d(), self.d())));
        }
        if self.is_selfadjoint() {
            for m in x.entries() {
                let dev = crate::linalg::hermitian_deviation(m);
                if dev > 1e-9 * crate::linalg::op_norm(m).max(1.0) {
                    return Err(Error::NotHermitian(dev));
                }
            }
        }
        Ok(())
    }
}

/// Selfadjoint unitaries that pairwise anticommute; level one is then the unit ball.
fn is_clifford_family(t: &MatrixTuple) -> bool {
    let n = t.n();
    let id = CMat::identity(n, n);
    let e = t.entries();
    for i in 0..e.len() {
        if crate::linalg::frobenius(&(&e[i] * &e[i] - &id)) > 1e-12 {
            return false;
        }
        for j in i + 1..e.len() {
            if crate::linalg::frobenius(&(&e[i] * &e[j] + &e[j] * &e[i])) > 1e-12 {
                return false;
            }
        }
    }
    true
}

/// Joint eigenvalues of a commuting normal tuple, in real coordinates, are
/// affinely independent.
fn simplex_spectrum(t: &MatrixTuple) -> bool {
    let n = t.n();
    // a generic real combination separates distinct joint eigenvalues
    let mut h = CMat::zeros(n, n);
    for (j, a) in t.entries().iter().enumerate() {
        let (p, q) = ((2.0 + j as f64).sqrt(), (3.0 + 2.0 * j as f64).ln());
        h += crate::linalg::herm(a) * c(p, 0.0) + crate::linalg::skew_herm(a) * c(q, 0.0);
    }
    let (_, u) = crate::linalg::eigh(&crate::linalg::herm(&h));
    let mut pts: Vec<Vec<f64>> = Vec::new();
    let diag: Vec<CMat> = t.entries().iter().map(|a| u.adjoint() * a * &u).collect();
    for m in &diag {
        let off = m - CMat::from_diagonal(&m.diagonal());
        if crate::linalg::frobenius(&off) > 1e-10 * (1.0 + crate::linalg::frobenius(m)) {
            return false;
        }
    }
    for i in 0..n {
        let p: Vec<f64> = diag
            .iter()
            .flat_map(|m| if t.is_selfadjoint() { vec![m[(i, i)].re] } else { vec![m[(i, i)].re, m[(i, i)].im] })
            .collect();
        if !pts.iter().any(|q| q.iter().zip(&p).all(|(x, y)| (x - y).abs() <= 1e-9)) {
            pts.push(p);
        }
    }
    if pts.len() < 2 {
        return true;
    }
    let dim = pts[0].len();
    if pts.len() > dim + 1 {
        return false;
    }
    let m = nalgebra::DMatrix::from_fn(pts.len() - 1, dim, |i, j| pts[i + 1][j] - pts[0][j]);
    m.rank(1e-9) == pts.len() - 1
}

fn merge_flags(a: EnvelopeFlags, b: EnvelopeFlags) -> EnvelopeFlags {
    let pick = |x: Option<usize>, y: Option<usize>| match (x, y) {
        (Some(p), Some(q)) => Some(p.min(q)),
        (p, q) => p.or(q),
    };
    EnvelopeFlags {
        min_level: pick(a.min_level, b.min_level),
        max_level: pick(a.max_level, b.max_level),
        polar_primitive: a.polar_primitive.or(b.polar_primitive),
        level1: a.level1.or(b.level1),
    }
}

fn tuple_name(t: &MatrixTuple) -> String {
    t.label
        .clone()
        .unwrap_or_else(|| format!("d={},n={}", t.d(), t.n()))
}

/// `T box R = (T_1 + 0, ..., T_d + 0, 0 + R_1, ..., 0 + R_k)`, block diagonal.
pub fn box_sum(t: &MatrixTuple, r: &MatrixTuple) -> Result<MatrixTuple> {
    let (nt, nr) = (t.n(), r.n());
    let zt = CMat::zeros(nt, nt);
    let zr = CMat::zeros(nr, nr);
    let mut out = Vec::with_capacity(t.d() + r.d());
    for m in t.entries() {
        out.push(crate::linalg::direct_sum(m, &zr));
    }
    for m in r.entries() {
        out.push(crate::linalg::direct_sum(&zt, m));
    }
    let label = format!("box({}, {})", tuple_name(t), tuple_name(r));
    let res = if t.is_selfadjoint() && r.is_selfadjoint() {
        MatrixTuple::selfadjoint(out)?
    } else {
        MatrixTuple::new(out)?
    };
    Ok(res.with_label(label))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_x, pauli_z};

    #[test]
    fn polar_rewrites() {
        let w = FreeConvexSet::matrix_range(ando_tuple());
        let p = w.polar_unchecked().unwrap();
        // the polar of the Ando range is recognized as the contraction set
        assert!(matches!(p.node(), Node::Primitive(Primitive::ContractionSet)));
        let t = MatrixTuple::selfadjoint(vec![pauli_x(), pauli_z()]).unwrap();
        let fs = FreeConvexSet::matrix_range(t).polar_unchecked().unwrap();
        assert!(matches!(fs.node(), Node::FreeSpectrahedron(_)));
        assert_eq!(p.polar_unchecked().unwrap(), w);
        let c = FreeConvexSet::contraction_set();
        assert_eq!(c.polar_unchecked().unwrap().polar_unchecked().unwrap(), c);
        let prod = FreeConvexSet::cartesian_product(&c, &c).unwrap();
        let pp = prod.polar_unchecked().unwrap();
        assert!(matches!(pp.node(), Node::HullProduct(_, _)));
        assert_eq!(pp.polar_unchecked().unwrap(), prod);
    }

    #[test]
    fn envelope_collapses() {
        let t = MatrixTuple::selfadjoint(vec![pauli_x(), pauli_z()]).unwrap();
        let w = FreeConvexSet::matrix_range(t);
        let m3 = FreeConvexSet::min_over(3, &w).unwrap();
        assert_eq!(m3, w);
        let m1 = FreeConvexSet::min_over(1, &w).unwrap();
        assert_eq!(FreeConvexSet::min_over(1, &m1).unwrap(), m1);
        let mx = FreeConvexSet::max_over(1, &w).unwrap();
        assert_eq!(FreeConvexSet::min_over(1, &mx).unwrap(), m1);
        let s = FreeConvexSet::scale(2.0, &FreeConvexSet::scale(0.5, &w).unwrap()).unwrap();
        assert_eq!(s, w);
        assert!(FreeConvexSet::min_over(0, &w).is_err());
        assert!(FreeConvexSet::scale(0.0, &w).is_err());
    }

    #[test]
    fn ando_is_max_one_and_hull_rewrites() {
        let a = FreeConvexSet::ando();
        assert_eq!(FreeConvexSet::max_over(1, &a).unwrap(), a);
        let h = FreeConvexSet::hull_product(&a, &a).unwrap();
        match h.node() {
            Node::MatrixRange(t) => {
                assert_eq!(t.n(), 4);
                assert_eq!(t.get(1)[(2, 3)], c(2.0, 0.0));
            }
            other => panic!("expected matrix range, got {other:?}"),
        }
        assert_eq!(FreeConvexSet::min_over(1, &a).unwrap(), FreeConvexSet::contraction_set());
    }

    #[test]
    fn simplex_ranges_are_maximal() {
        let d = |v: Vec<num_complex::Complex64>| CMat::from_diagonal(&nalgebra::DVector::from_vec(v));
        let tri = MatrixTuple::new(vec![d(vec![c(1.0, 0.0), c(-0.5, 0.8), c(-0.5, -0.8)])]).unwrap();
        assert_eq!(FreeConvexSet::matrix_range(tri).flags().max_level, Some(1));
        // a square is not a simplex
        let sq = MatrixTuple::new(vec![d(vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)])]).unwrap();
        assert_eq!(FreeConvexSet::matrix_range(sq).flags().max_level, None);
        // conjugating by a unitary keeps the spectrum
        let u = crate::linalg::haar_unitary(&mut <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1), 3);
        let tri = MatrixTuple::new(vec![&u * d(vec![c(1.0, 0.0), c(-0.5, 0.8), c(-0.5, -0.8)]) * u.adjoint()]).unwrap();
        assert_eq!(FreeConvexSet::matrix_range(tri).flags().max_level, Some(1));
    }

    #[test]
    fn clifford_anticommutes() {
        for n in 1..=5 {
            let t = clifford(n);
            for i in 0..n {
                let sq = t.get(i) * t.get(i);
                assert!(crate::linalg::frobenius(&(sq - CMat::identity(t.n(), t.n()))) < 1e-14);
                for j in i + 1..n {
                    let ac = t.get(i) * t.get(j) + t.get(j) * t.get(i);
                    assert!(crate::linalg::frobenius(&ac) < 1e-14);
                }
            }
        }
    }
}
