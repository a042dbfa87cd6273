//! k-envelope certificates.
//!
//! `W^min_k(C)` membership at level `m > k` is a separability-type question:
//! inner certificates are explicit matrix convex combinations of level-k
//! members, outer refutations come from Schmidt-number relaxations of the
//! Choi matrix. `W^max_k(C)` membership is refuted by a compression to level
//! `k` that leaves `C`, and certified by checking level-k supports on a net.

mod inner;
mod maxover;
mod relax;

pub use inner::{min_membership_inner, min_support_lower, InnerResult};
pub use maxover::{max_membership_certify, max_membership_refute, CertifyResult};
pub use relax::{outer_vertices, partial_transpose_expr, relaxation_lift, trace_output_expr, vertex_tuple};

use serde_json::{json, Value};

use crate::config::{Budget, Tolerances};
use crate::error::{Error, Result};
use crate::io::{matrix_to_json, tuple_to_json};
use crate::linalg::{c, eye, frobenius, op_norm, CMat, ChoiMatrix, MatrixTuple};
use crate::oracles::membership::gauge_with;
use crate::oracles::{Certificate, MembershipVerdict, SupportFunctional, Verdict};
use crate::sdp::{CMatExpr, LinExpr, Model, Status};
use crate::sets::lift::{self, Lifted};
use crate::sets::{FreeConvexSet, Node};

/// `X = sum_i V_i^* X^(i) V_i` with `sum_i V_i^* V_i = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinDecomposition {
    pub k: usize,
    /// `k x m` blocks.
    pub isometries: Vec<CMat>,
    /// Level-k members, one per block.
    pub members: Vec<MatrixTuple>,
    pub member_certs: Vec<MembershipVerdict>,
    pub notes: Vec<String>,
}

impl MinDecomposition {
    pub fn reconstruct(&self) -> Vec<CMat> {
        let d = self.members[0].d();
        let m = self.isometries[0].ncols();
        let mut out = vec![CMat::zeros(m, m); d];
        for (v, x) in self.isometries.iter().zip(&self.members) {
            for (o, xj) in out.iter_mut().zip(x.entries()) {
                *o += v.adjoint() * xj * v;
            }
        }
        out
    }

    /// `(unitality defect, reconstruction error)` against `target`.
    pub fn residuals(&self, target: &MatrixTuple) -> (f64, f64) {
        let m = self.isometries[0].ncols();
        let mut s = CMat::zeros(m, m);
        for v in &self.isometries {
            s += v.adjoint() * v;
        }
        let unit = op_norm(&(s - eye(m)));
        let rec = self
            .reconstruct()
            .iter()
            .zip(target.entries())
            .map(|(a, b)| op_norm(&(a - b)))
            .fold(0.0, f64::max);
        (unit, rec)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "k": self.k,
            "summands": self.isometries.len(),
            "isometries": self.isometries.iter().map(matrix_to_json).collect::<Vec<_>>(),
            "members": self.members.iter().map(tuple_to_json).collect::<Vec<_>>(),
            "member_certificates": self.member_certs.iter().map(|v| v.to_json()).collect::<Vec<_>>(),
            "notes": self.notes,
        })
    }
}

/// A refutation of `W^min_k` membership through a relaxation of the
/// Schmidt-number-k Choi cone: the functional separates the point from every
/// image allowed by the relaxation.
#[derive(Debug, Clone, PartialEq)]
pub struct KWitness {
    pub k: usize,
    pub family: String,
    pub functional: SupportFunctional,
    pub point_value: f64,
    /// Certified upper bound on the functional over the relaxation.
    pub relaxed_upper: f64,
}

impl KWitness {
    pub fn violation(&self) -> f64 {
        self.point_value - self.relaxed_upper
    }

    pub fn to_json(&self) -> Value {
        json!({
            "k": self.k,
            "family": self.family,
            "functional": self.functional.to_json(),
            "point_value": self.point_value,
            "relaxed_upper": self.relaxed_upper,
            "violation": self.violation(),
        })
    }
}

/// Net-based IN certificate for a maximal envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct NetCover {
    pub k: usize,
    pub dim: usize,
    pub points: usize,
    pub covering_radius: f64,
    pub lipschitz: f64,
    pub min_slack: f64,
    pub exact: bool,
}

impl NetCover {
    pub fn to_json(&self) -> Value {
        json!({
            "k": self.k,
            "dim": self.dim,
            "points": self.points,
            "covering_radius": self.covering_radius,
            "lipschitz": self.lipschitz,
            "min_slack": self.min_slack,
            "exact": self.exact,
        })
    }
}

/// Outcome of [`ucp_image_feasible`].
#[derive(Debug, Clone)]
pub enum UcpImage {
    Feasible(ChoiMatrix),
    Infeasible(MembershipVerdict),
    Undecided(MembershipVerdict),
}

/// Is `X` the image of `T` under a UCP map?
pub fn ucp_image_feasible(t: &MatrixTuple, x: &MatrixTuple, budget: &Budget) -> Result<UcpImage> {
    if t.d() != x.d() {
        return Err(Error::Dimension(format!("tuples have d = {} and {}", t.d(), x.d())));
    }
    let set = FreeConvexSet::matrix_range(t.clone());
    let v = crate::oracles::membership(&set, x, budget)?;
    Ok(match v.verdict {
        Verdict::In => match &v.certificate {
            Certificate::Cone(cc) => match cc.as_choi() {
                Some(j) => UcpImage::Feasible(j.clone()),
                None => UcpImage::Undecided(v),
            },
            _ => UcpImage::Undecided(v),
        },
        Verdict::Out => UcpImage::Infeasible(v),
        Verdict::Undecided => UcpImage::Undecided(v),
    })
}

/// Side of the Choi space for a base at level `m`, when the base is a range.
fn choi_input(base: &FreeConvexSet) -> Option<usize> {
    match base.node() {
        Node::MatrixRange(t) => Some(t.n()),
        Node::Scaled(_, s) => choi_input(s),
        _ => None,
    }
}

fn relaxed_family(base: &FreeConvexSet, k: usize, m: usize) -> String {
    match choi_input(base) {
        Some(n) => relax::family(n, m, k).to_string(),
        None if k == 1 => "polytope containing level one".into(),
        None => "base set".into(),
    }
}

/// Certified support of the relaxation along `g`.
fn relaxed_support(base: &FreeConvexSet, k: usize, g: &SupportFunctional) -> Result<Option<f64>> {
    let m = g.level();
    let mut model = Model::new();
    let l = relaxation_lift(&mut model, base, k, m, &CMatExpr::from_const(&eye(m)), m as f64)?;
    let mut obj = LinExpr::zero();
    for (z, h) in l.z.iter().zip(&g.entries) {
        obj.add_scaled(&z.re_trace_with(h), 1.0);
    }
    model.maximize(&obj);
    if let Some(b) = l.free_bound {
        model.bound_free(b);
    }
    let sol = model.solve()?;
    if !sol.is_optimal() {
        return Ok(None);
    }
    let v = sol.value();
    Ok(Some(match sol.certified_bound() {
        Some(b) => b.max(v),
        None => v + crate::oracles::support::slack(v),
    }))
}

/// Outer test: a separating functional over a Schmidt-number relaxation.
/// `Ok(None)` means the relaxation contains the point (no claim).
pub fn min_membership_outer(base: &FreeConvexSet, k: usize, x: &MatrixTuple, tol: &Tolerances) -> Result<(Option<KWitness>, f64)> {
    let m = x.n();
    let cen = base.center();
    let origin: Vec<CMat> = cen.iter().map(|&z| eye(m) * z).collect();
    let dir: Vec<CMat> = x.entries().iter().zip(&origin).map(|(a, b)| a - b).collect();
    if dir.iter().map(frobenius).fold(0.0, f64::max) <= tol.structural {
        return Ok((None, f64::INFINITY));
    }
    let build = |model: &mut Model, m: usize| -> Result<Lifted> {
        relaxation_lift(model, base, k, m, &CMatExpr::from_const(&eye(m)), m as f64)
    };
    let g = gauge_with(&origin, &dir, 2.0, base.is_selfadjoint(), build)?;
    if g.status != Status::Optimal || g.s >= 1.0 {
        return Ok((None, g.s));
    }
    let Some(sep) = g.separator else { return Ok((None, g.s)) };
    let sep = sep.normalized();
    let point_value = sep.pair(x.entries());
    let Some(upper) = relaxed_support(base, k, &sep)? else { return Ok((None, g.s)) };
    if point_value - upper >= tol.verdict_margin {
        return Ok((
            Some(KWitness {
                k,
                family: relaxed_family(base, k, m),
                functional: sep,
                point_value,
                relaxed_upper: upper,
            }),
            g.s,
        ));
    }
    Ok((None, g.s))
}

/// Re-verifies a k-witness by recomputing the relaxed support.
pub fn verify_kwitness(base: &FreeConvexSet, w: &KWitness, x: &MatrixTuple, tol: &Tolerances) -> Result<bool> {
    let pv = w.functional.pair(x.entries());
    let up = relaxed_support(base, w.k, &w.functional)?;
    Ok(matches!(up, Some(u) if pv - u >= tol.verdict_margin * 0.5))
}

/// Membership in `W^min_k(base)` at level `m > k`.
pub fn min_membership(base: &FreeConvexSet, k: usize, x: &MatrixTuple, budget: &Budget, tol: &Tolerances) -> Result<MembershipVerdict> {
    let (outer, s_outer) = match min_membership_outer(base, k, x, tol) {
        Ok(r) => r,
        Err(Error::NotRepresentable(_)) => (None, f64::NAN),
        Err(e) => return Err(e),
    };
    if let Some(w) = outer {
        return Ok(MembershipVerdict {
            verdict: Verdict::Out,
            margin: w.violation(),
            note: format!("{} relaxation refutes", w.family),
            certificate: Certificate::KWitness(w),
        });
    }
    match min_membership_inner(base, k, x, budget, tol)? {
        InnerResult::Found(d) => Ok(MembershipVerdict {
            verdict: Verdict::In,
            margin: 0.0,
            note: format!("matrix convex combination of {} level-{k} members", d.members.len()),
            certificate: Certificate::Decomposition(d),
        }),
        InnerResult::NotFound { best_gauge, note } => Ok(MembershipVerdict::undecided(
            best_gauge,
            s_outer,
            format!("inner gauge {best_gauge:.6}, relaxed gauge {s_outer:.6}; {note}"),
        )),
    }
}

/// Membership in `W^max_k(base)` at level `m > k`.
pub fn max_membership(base: &FreeConvexSet, k: usize, x: &MatrixTuple, budget: &Budget, tol: &Tolerances) -> Result<MembershipVerdict> {
    if let Some(v) = max_membership_refute(base, k, x, budget, tol)? {
        return Ok(v);
    }
    match max_membership_certify(base, k, x, budget, tol)? {
        CertifyResult::In(v) => Ok(v),
        CertifyResult::Undecided(note) => Ok(MembershipVerdict::undecided(f64::NAN, f64::NAN, note)),
    }
}

/// Scalar multiple of the identity at level `m`.
pub(crate) fn scalar_point(cen: &[num_complex::Complex64], m: usize) -> Vec<CMat> {
    cen.iter().map(|&z| eye(m) * z).collect()
}

pub(crate) fn as_tuple(z: Vec<CMat>, selfadjoint: bool) -> Result<MatrixTuple> {
    if selfadjoint {
        MatrixTuple::selfadjoint(z.iter().map(crate::linalg::herm).collect())
    } else {
        MatrixTuple::new(z)
    }
}

pub(crate) fn shrink_toward(z: &[CMat], cen: &[num_complex::Complex64], t: f64) -> Vec<CMat> {
    z.iter()
        .zip(cen)
        .map(|(a, &w)| {
            let m = a.nrows();
            &eye(m) * w + (a - eye(m) * w) * c(t, 0.0)
        })
        .collect()
}

pub fn cone_verdict_ok(set: &FreeConvexSet, x: &MatrixTuple, cert: &lift::ConeCert) -> bool {
    lift::verify(set, &eye(x.n()), x.entries(), cert).is_ok_and(|r| r <= crate::oracles::membership::IN_RESIDUAL)
}
