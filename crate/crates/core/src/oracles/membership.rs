//! Membership with certificates.
//!
//! Representable sets go through a gauge program: starting at the set's
//! center `c`, find the largest `s` with `c + s (X - c)` in the set. `s >= 1`
//! gives a lift certificate for `X`; `s < 1` gives a separating functional
//! from the multipliers of the line constraints.

use crate::config::{Budget, Tolerances};
use crate::error::{Error, Result};
use crate::linalg::{c, eye, frobenius, herm, kron, lambda_max, ChoiMatrix, CMat, MatrixTuple};
use crate::sdp::{CExpr, CMatExpr, Model, Status};
use crate::sets::lift::{self, lift_mode, ConeCert, Lifted, Mode};
use crate::sets::{clifford, FreeConvexSet, Node, Primitive};

use super::support::{support, support_sdp};
use super::{Certificate, MembershipVerdict, Separator, SupportFunctional, Verdict};

/// IN certificates may carry this much residual.
pub const IN_RESIDUAL: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct GaugeResult {
    /// Largest step along the direction (`+inf` if unbounded, `-inf` if the
    /// line misses the set).
    pub s: f64,
    pub status: Status,
    /// The point `origin + s dir` and its certificate.
    pub point: Option<Vec<CMat>>,
    pub cert: Option<ConeCert>,
    /// `G` with `<G, dir> = 1`; the set lies in `<G, .> <= <G, origin> + s`.
    pub separator: Option<SupportFunctional>,
}

pub fn gauge(set: &FreeConvexSet, origin: &[CMat], dir: &[CMat], cap: f64) -> Result<GaugeResult> {
    gauge_mode(set, origin, dir, cap, Mode::Exact)
}

/// Maximizes `s` subject to `origin + s dir` in the lift (at `P = I`), with
/// `s <= cap` when `cap` is finite.
pub fn gauge_mode(set: &FreeConvexSet, origin: &[CMat], dir: &[CMat], cap: f64, mode: Mode) -> Result<GaugeResult> {
    if origin.len() != set.d() || dir.len() != set.d() {
        return Err(Error::Dimension("gauge origin and direction must have d entries".into()));
    }
    gauge_with(origin, dir, cap, set.is_selfadjoint(), |model, m| {
        lift_mode(model, set, m, &CMatExpr::from_const(&eye(m)), m as f64, mode)
    })
}

/// Gauge over an arbitrary lift builder.
pub fn gauge_with(
    origin: &[CMat],
    dir: &[CMat],
    cap: f64,
    selfadjoint: bool,
    build: impl FnOnce(&mut Model, usize) -> Result<Lifted>,
) -> Result<GaugeResult> {
    let m = origin[0].nrows();
    let mut model = Model::new();
    let l = build(&mut model, m)?;
    let s = model.free();
    if cap.is_finite() {
        let t = model.nonneg();
        model.eq(&s.plus(&t), cap);
    }
    let sc = CExpr::real(s.clone());
    let mut rows = Vec::with_capacity(origin.len());
    for ((z, o), dj) in l.z.iter().zip(origin).zip(dir) {
        let mut e = z.clone();
        for a in 0..m {
            for b in 0..m {
                if dj[(a, b)] != c(0.0, 0.0) {
                    e.at_mut(a, b).add_mul(&sc, -dj[(a, b)]);
                }
            }
        }
        rows.push(model.eq_matrix(&e, o, selfadjoint));
    }
    model.maximize(&s);
    if cap.is_finite() {
        model.bound_free(l.free_bound.unwrap_or(0.0).max(cap.abs()));
    }
    let sol = model.solve()?;
    let status = sol.status();
    let mut out = GaugeResult {
        s: f64::NAN,
        status,
        point: None,
        cert: None,
        separator: None,
    };
    match status {
        Status::Optimal => {}
        Status::Unbounded => {
            out.s = f64::INFINITY;
            return Ok(out);
        }
        Status::Infeasible => {
            out.s = f64::NEG_INFINITY;
            return Ok(out);
        }
        _ => return Ok(out),
    }
    out.s = sol.value();
    out.point = Some(l.z.iter().map(|e| lift::eval_matrix(&sol, e)).collect());
    out.cert = Some(l.handle.extract(&sol));
    let h: Vec<CMat> = rows.iter().map(|r| sol.dual_matrix(r)).collect();
    let h = SupportFunctional::new(h)?;
    let along = h.pair(dir);
    if along.abs() > 1e-12 {
        out.separator = Some(h.scaled(1.0 / along));
    }
    Ok(out)
}

fn cone_in(cert: ConeCert, margin: f64, note: &str) -> MembershipVerdict {
    MembershipVerdict {
        verdict: Verdict::In,
        certificate: Certificate::Cone(cert),
        margin,
        note: note.into(),
    }
}

fn failed(e: &Error) -> MembershipVerdict {
    MembershipVerdict::undecided(f64::NAN, f64::NAN, format!("solver failure: {e}"))
}

/// Certified OUT from a candidate functional, or `None` if the margin is too small.
pub fn separate(
    set: &FreeConvexSet,
    x: &MatrixTuple,
    g: &SupportFunctional,
    budget: &Budget,
    tol: &Tolerances,
) -> Result<Option<MembershipVerdict>> {
    let g = g.normalized();
    if g.dual_norm() == 0.0 {
        return Ok(None);
    }
    let point_value = g.pair(x.entries());
    let up = support(set, &g, budget)?;
    let margin = point_value - up.upper;
    if margin >= tol.verdict_margin && up.upper.is_finite() {
        return Ok(Some(MembershipVerdict {
            verdict: Verdict::Out,
            certificate: Certificate::Separator(Separator {
                functional: g,
                point_value,
                support_upper: up.upper,
            }),
            margin,
            note: "separating functional".into(),
        }));
    }
    Ok(None)
}

/// Same as [`separate`] but bounding the support through an outer lift.
fn separate_outer(set: &FreeConvexSet, x: &MatrixTuple, g: &SupportFunctional, tol: &Tolerances) -> Result<Option<MembershipVerdict>> {
    let g = g.normalized();
    let point_value = g.pair(x.entries());
    let up = support_sdp(set, &g, Mode::Outer)?;
    let margin = point_value - up.upper;
    if margin >= tol.verdict_margin && up.upper.is_finite() {
        return Ok(Some(MembershipVerdict {
            verdict: Verdict::Out,
            certificate: Certificate::Separator(Separator {
                functional: g,
                point_value,
                support_upper: up.upper,
            }),
            margin,
            note: "separating functional over an outer relaxation".into(),
        }));
    }
    Ok(None)
}

/// Gauge-based decision for sets with a lift at the point's level.
pub fn gauge_membership(set: &FreeConvexSet, x: &MatrixTuple, budget: &Budget, tol: &Tolerances, mode: Mode) -> Result<MembershipVerdict> {
    let m = x.n();
    let (origin, center_cert) = lift::center(set, m)?;
    let dir: Vec<CMat> = x.entries().iter().zip(&origin).map(|(a, b)| a - b).collect();
    if dir.iter().map(frobenius).fold(0.0, f64::max) <= tol.structural && mode == Mode::Exact {
        return Ok(cone_in(center_cert, f64::INFINITY, "point is the center"));
    }
    let g = gauge_mode(set, &origin, &dir, 2.0, mode)?;
    if g.status != Status::Optimal {
        return Ok(MembershipVerdict::undecided(f64::NAN, f64::NAN, format!("gauge program ended with {:?}", g.status)));
    }
    let s = g.s;
    if mode == Mode::Exact && s >= 1.0 - 1e-8 {
        let cert = g.cert.expect("optimal gauge has a certificate");
        let combined = ConeCert::combine(&cert, 1.0 / s, &center_cert, 1.0 - 1.0 / s)?;
        for candidate in [combined.clone(), combined.clipped()] {
            let r = lift::verify(set, &eye(m), x.entries(), &candidate)?;
            if r <= IN_RESIDUAL {
                return Ok(cone_in(candidate, s - 1.0, "gauge program"));
            }
        }
    }
    if s < 1.0 {
        if let Some(sep) = &g.separator {
            let out = match mode {
                Mode::Exact => separate(set, x, sep, budget, tol)?,
                Mode::Outer => separate_outer(set, x, sep, tol)?,
            };
            if let Some(v) = out {
                return Ok(v);
            }
        }
    }
    Ok(MembershipVerdict::undecided(
        s,
        s,
        format!("gauge {s:.9} within the verdict margin of 1"),
    ))
}

fn pencil_membership(a: &MatrixTuple, x: &MatrixTuple, tol: &Tolerances) -> Result<MembershipVerdict> {
    let mut pen = CMat::zeros(x.n() * a.n(), x.n() * a.n());
    for (xj, aj) in x.entries().iter().zip(a.entries()) {
        pen += kron(xj, aj);
    }
    let pen = herm(&pen);
    let (vals, vecs) = crate::linalg::eigh(&pen);
    let top = *vals.last().expect("nonempty pencil");
    if top <= 1.0 + tol.spectral {
        return Ok(cone_in(ConeCert::Pencil, 1.0 - top, "pencil eigenvalue"));
    }
    if top >= 1.0 + tol.verdict_margin {
        return Ok(MembershipVerdict {
            verdict: Verdict::Out,
            certificate: Certificate::PencilVector {
                vector: vecs.column(vals.len() - 1).iter().cloned().collect(),
                eigenvalue: top,
            },
            margin: top - 1.0,
            note: "pencil eigenvalue above 1".into(),
        });
    }
    Ok(MembershipVerdict::undecided(top, top, "pencil eigenvalue within the verdict margin of 1"))
}

fn contraction_membership(x: &CMat, tol: &Tolerances) -> MembershipVerdict {
    let svd = x.clone().svd(true, true);
    let (i, &sigma) = svd
        .singular_values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    if sigma <= 1.0 + tol.spectral {
        return cone_in(ConeCert::Contraction, 1.0 - sigma, "operator norm");
    }
    let u = svd.u.expect("u").column(i).into_owned();
    let v = svd.v_t.expect("v_t").row(i).adjoint();
    // Re tr(v u* X) = u* X v = sigma
    let h = &v * u.adjoint();
    let verdict = if sigma >= 1.0 + tol.verdict_margin { Verdict::Out } else { Verdict::Undecided };
    MembershipVerdict {
        verdict,
        certificate: Certificate::Separator(Separator {
            functional: SupportFunctional { entries: vec![h] },
            point_value: sigma,
            support_upper: 1.0,
        }),
        margin: sigma - 1.0,
        note: "operator norm above 1".into(),
    }
}

/// Decides `X in S_m` with certificates.
pub fn membership(set: &FreeConvexSet, x: &MatrixTuple, budget: &Budget) -> Result<MembershipVerdict> {
    membership_tol(set, x, budget, &Tolerances::default())
}

pub fn membership_tol(set: &FreeConvexSet, x: &MatrixTuple, budget: &Budget, tol: &Tolerances) -> Result<MembershipVerdict> {
    set.check_point(x)?;
    let m = x.n();
    match set.node() {
        Node::FreeSpectrahedron(a) => pencil_membership(a, x, tol),
        Node::Primitive(Primitive::ContractionSet) => Ok(contraction_membership(x.get(0), tol)),
        Node::Scaled(r, s) => {
            let inner = membership_tol(s, &x.scaled(1.0 / r), budget, tol)?;
            Ok(MembershipVerdict {
                verdict: inner.verdict,
                margin: inner.margin,
                note: inner.note.clone(),
                certificate: Certificate::Scaled(*r, Box::new(inner.certificate)),
            })
        }
        Node::CartesianProduct(a, b) => {
            let (xa, xb) = set.split_point(x).expect("product split");
            let va = membership_tol(a, &xa, budget, tol)?;
            if va.is_out() {
                return Ok(factor_out(true, va));
            }
            let vb = membership_tol(b, &xb, budget, tol)?;
            if vb.is_out() {
                return Ok(factor_out(false, vb));
            }
            if va.is_in() && vb.is_in() {
                return Ok(MembershipVerdict {
                    verdict: Verdict::In,
                    margin: va.margin.min(vb.margin),
                    note: "both factors".into(),
                    certificate: Certificate::Product(Box::new(va.certificate), Box::new(vb.certificate)),
                });
            }
            Ok(MembershipVerdict::undecided(f64::NAN, f64::NAN, format!("factors: {} / {}", va.note, vb.note)))
        }
        Node::MinOver(k, s) | Node::MaxOver(k, s) if m <= *k => {
            let inner = membership_tol(s, x, budget, tol)?;
            Ok(MembershipVerdict {
                verdict: inner.verdict,
                margin: inner.margin,
                note: format!("level {m} <= {k}: {}", inner.note),
                certificate: Certificate::Envelope(Box::new(inner.certificate)),
            })
        }
        Node::MinOver(k, s) => crate::kcert::min_membership(s, *k, x, budget, tol),
        Node::MaxOver(k, s) => crate::kcert::max_membership(s, *k, x, budget, tol),
        Node::Primitive(Primitive::BallMin(n)) if m > 1 => {
            crate::kcert::min_membership(&FreeConvexSet::matrix_range(clifford(*n)), 1, x, budget, tol)
        }
        Node::Primitive(Primitive::BallMax(n)) if m > 1 => {
            crate::kcert::max_membership(&FreeConvexSet::matrix_range(clifford(*n)), 1, x, budget, tol)
        }
        Node::MatrixRange(t) if t.n() == m && t.entries().iter().zip(x.entries()).all(|(a, b)| frobenius(&(a - b)) <= tol.structural) => {
            Ok(cone_in(ConeCert::Choi(ChoiMatrix::identity(m)), 0.0, "the point is the generating tuple"))
        }
        _ if lift::representable(set, m) => match gauge_membership(set, x, budget, tol, Mode::Exact) {
            Ok(v) => Ok(v),
            Err(Error::Numerical(e)) => Ok(failed(&Error::Numerical(e))),
            Err(e) => Err(e),
        },
        _ if lift::outer_representable(set, m) => {
            let v = gauge_membership(set, x, budget, tol, Mode::Outer)?;
            if v.is_out() {
                return Ok(v);
            }
            Ok(MembershipVerdict::undecided(f64::NAN, f64::NAN, "no inner certificate; outer relaxation contains the point"))
        }
        _ => Ok(MembershipVerdict::undecided(f64::NAN, f64::NAN, format!("no oracle for {} at level {m}", set.describe()))),
    }
}

fn factor_out(left: bool, v: MembershipVerdict) -> MembershipVerdict {
    MembershipVerdict {
        verdict: Verdict::Out,
        margin: v.margin,
        note: format!("{} factor: {}", if left { "left" } else { "right" }, v.note),
        certificate: Certificate::Factor { left, inner: Box::new(v.certificate) },
    }
}

/// Numerical radius of a square matrix (support of its numerical range).
pub fn numerical_radius(a: &CMat) -> f64 {
    // w(A) = max over angles of lambda_max(Re(e^{i t} A)); refine on a grid
    let f = |t: f64| lambda_max(&herm(&(a * c(t.cos(), t.sin()))));
    let n = 720;
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 0..n {
        let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
        let v = f(t);
        if v > best.1 {
            best = (t, v);
        }
    }
    let (mut lo, mut hi) = (best.0 - 0.01, best.0 + 0.01);
    for _ in 0..60 {
        let a1 = lo + (hi - lo) / 3.0;
        let a2 = hi - (hi - lo) / 3.0;
        if f(a1) < f(a2) {
            lo = a1;
        } else {
            hi = a2;
        }
    }
    f(0.5 * (lo + hi)).max(best.1).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_x, pauli_z, unit};

    fn ando() -> FreeConvexSet {
        FreeConvexSet::ando()
    }

    #[test]
    fn ando_examples() {
        let b = Budget::quick();
        let x = MatrixTuple::new(vec![unit(2, 0, 1) * c(2.0, 0.0)]).unwrap();
        assert!(membership(&ando(), &x, &b).unwrap().is_in());
        let y = MatrixTuple::new(vec![unit(2, 0, 1) * c(3.0, 0.0)]).unwrap();
        let v = membership(&ando(), &y, &b).unwrap();
        assert!(v.is_out(), "{v:?}");
        // 2E12 is in the set at distance 1, and the numerical radius gap is 0.5
        assert!(v.margin >= 0.5 - 1e-6 && v.margin <= 1.0 + 1e-6, "{}", v.margin);
    }

    #[test]
    fn spectrahedron_examples() {
        let b = Budget::quick();
        let s = FreeConvexSet::free_spectrahedron(MatrixTuple::new(vec![unit(2, 0, 1) * c(2.0, 0.0)]).unwrap());
        let one = MatrixTuple::new(vec![eye(1)]).unwrap();
        let v = membership(&s, &one, &b).unwrap();
        assert!(v.is_in() && v.margin.abs() < 1e-12);
        let v = membership(&s, &one.scaled(1.2), &b).unwrap();
        assert!(v.is_out());
    }

    #[test]
    fn pauli_range_boundary_and_outside() {
        let b = Budget::quick();
        let s = FreeConvexSet::matrix_range(MatrixTuple::selfadjoint(vec![pauli_x(), pauli_z()]).unwrap());
        let inside = MatrixTuple::selfadjoint(vec![eye(1) * c(0.6, 0.0), eye(1) * c(0.8, 0.0)]).unwrap();
        assert!(membership(&s, &inside, &b).unwrap().is_in());
        let outside = inside.scaled(1.01);
        assert!(membership(&s, &outside, &b).unwrap().is_out());
    }

    #[test]
    fn numerical_radius_of_nilpotent() {
        assert!((numerical_radius(&(unit(2, 0, 1) * c(3.0, 0.0))) - 1.5).abs() < 1e-9);
    }
}
