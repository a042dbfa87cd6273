//! Independent re-verification of emitted certificates.
//!
//! Choi, pencil, contraction and decomposition certificates are checked by
//! direct evaluation (eigenvalues, products, partial traces). Separators are
//! checked by recomputing the support bound with a fresh solve.

use crate::config::{Budget, Tolerances};
use crate::error::Result;
use crate::kcert::{max_membership_certify, verify_kwitness, CertifyResult};
use crate::linalg::{lambda_max, ChoiMatrix, CMat, MatrixTuple};
use crate::sets::{clifford, FreeConvexSet, Node, Primitive};

use super::contains::{pencil, structural, unscale};
use super::support::{slack, support};
use super::{Certificate, MembershipVerdict, ScaleBounds, ScaleWitness, Separator, Verdict};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub ok: bool,
    pub detail: String,
}

impl Check {
    pub fn pass(detail: impl Into<String>) -> Self {
        Self { ok: true, detail: detail.into() }
    }

    pub fn fail(detail: impl Into<String>) -> Self {
        Self { ok: false, detail: detail.into() }
    }

    pub fn and(self, other: Check) -> Check {
        if !self.ok {
            return self;
        }
        if !other.ok {
            return other;
        }
        Check::pass(format!("{}; {}", self.detail, other.detail))
    }
}

/// Re-checks a membership verdict for `x` in `set`.
pub fn verify_membership(set: &FreeConvexSet, x: &MatrixTuple, v: &MembershipVerdict, budget: &Budget) -> Result<Check> {
    if v.verdict == Verdict::Undecided {
        return Ok(Check::pass("undecided: nothing claimed"));
    }
    check_cert(set, x, &v.certificate, v.verdict, budget)
}

fn separator_ok(set: &FreeConvexSet, x: &MatrixTuple, s: &Separator, budget: &Budget) -> Result<Check> {
    let tol = Tolerances::default();
    let pv = s.functional.pair(x.entries());
    if (pv - s.point_value).abs() > 1e-9 * (1.0 + pv.abs()) {
        return Ok(Check::fail(format!("pairing {pv} differs from the recorded {}", s.point_value)));
    }
    let up = support(set, &s.functional, budget)?.upper;
    if up > s.support_upper + slack(s.support_upper) {
        return Ok(Check::fail(format!("recomputed support {up} exceeds the recorded {}", s.support_upper)));
    }
    if pv - up.max(s.support_upper) < 0.5 * tol.verdict_margin {
        return Ok(Check::fail(format!("separation {} below the margin", pv - up)));
    }
    Ok(Check::pass(format!("separator: {pv:.6} > {up:.6}")))
}

fn choi_ok(j: &ChoiMatrix) -> Check {
    let side = (j.in_dim * j.out_dim) as f64;
    if j.min_eigenvalue() < -1e-9 * side {
        return Check::fail(format!("Choi matrix has eigenvalue {:.3e}", j.min_eigenvalue()));
    }
    if j.unitality_defect() > 1e-8 {
        return Check::fail(format!("Choi matrix unitality defect {:.3e}", j.unitality_defect()));
    }
    Check::pass("Choi matrix PSD and unital")
}

fn check_cert(set: &FreeConvexSet, x: &MatrixTuple, cert: &Certificate, verdict: Verdict, budget: &Budget) -> Result<Check> {
    let tol = Tolerances::default();
    let claim_in = verdict == Verdict::In;
    Ok(match (cert, set.node()) {
        (Certificate::Cone(cc), _) if claim_in => {
            if crate::kcert::cone_verdict_ok(set, x, cc) {
                Check::pass("lift certificate reproduces the point")
            } else {
                Check::fail("lift certificate residual too large")
            }
        }
        (Certificate::Scaled(r, inner), Node::Scaled(q, s)) if (r - q).abs() <= 1e-15 * r.abs().max(1.0) => {
            check_cert(s, &x.scaled(1.0 / r), inner, verdict, budget)?
        }
        (Certificate::Envelope(inner), Node::MinOver(k, s)) if x.n() <= *k => check_cert(s, x, inner, verdict, budget)?,
        (Certificate::Envelope(inner), Node::MaxOver(k, s)) if x.n() <= *k || claim_in => check_cert(s, x, inner, verdict, budget)?,
        (Certificate::Product(a, b), Node::CartesianProduct(l, r)) if claim_in => {
            let (xa, xb) = set.split_point(x).expect("product split");
            check_cert(l, &xa, a, verdict, budget)?.and(check_cert(r, &xb, b, verdict, budget)?)
        }
        (Certificate::Factor { left, inner }, Node::CartesianProduct(l, r)) if !claim_in => {
            let (xa, xb) = set.split_point(x).expect("product split");
            if *left {
                check_cert(l, &xa, inner, verdict, budget)?
            } else {
                check_cert(r, &xb, inner, verdict, budget)?
            }
        }
        (Certificate::Separator(s), _) if !claim_in => separator_ok(set, x, s, budget)?,
        (Certificate::PencilVector { vector, eigenvalue }, Node::FreeSpectrahedron(a)) if !claim_in => {
            let p = pencil(x, a);
            let v = CMat::from_column_slice(vector.len(), 1, vector);
            let num = (v.adjoint() * &p * &v)[(0, 0)].re;
            let den = (v.adjoint() * &v)[(0, 0)].re;
            let q = num / den;
            if q >= 1.0 + 0.5 * tol.verdict_margin && (q - eigenvalue).abs() <= 1e-8 * (1.0 + eigenvalue.abs()) {
                Check::pass(format!("pencil Rayleigh quotient {q:.9}"))
            } else {
                Check::fail(format!("pencil Rayleigh quotient {q:.9} (recorded {eigenvalue:.9})"))
            }
        }
        (Certificate::Decomposition(d), _) if claim_in => {
            let base = match set.node() {
                Node::MinOver(k, s) if *k == d.k => s.clone(),
                Node::Primitive(Primitive::BallMin(n)) if d.k == 1 => FreeConvexSet::matrix_range(clifford(*n)),
                _ => return Ok(Check::fail("decomposition attached to a set that is not a minimal envelope")),
            };
            let (unit, rec) = d.residuals(x);
            if unit > 1e-8 || rec > 1e-6 {
                return Ok(Check::fail(format!("decomposition residuals {unit:.3e} / {rec:.3e}")));
            }
            let mut out = Check::pass(format!("decomposition of {} members, residuals {unit:.1e} / {rec:.1e}", d.members.len()));
            for (m, c) in d.members.iter().zip(&d.member_certs) {
                if m.n() > d.k {
                    return Ok(Check::fail("decomposition member above level k"));
                }
                out = out.and(verify_membership(&base, m, c, budget)?);
                if !out.ok || !c.is_in() {
                    return Ok(Check::fail("a member is not certified inside the base"));
                }
            }
            out
        }
        (Certificate::KWitness(w), _) if !claim_in => {
            let base = match set.node() {
                Node::MinOver(k, s) if *k == w.k => s.clone(),
                Node::Primitive(Primitive::BallMin(n)) if w.k == 1 => FreeConvexSet::matrix_range(clifford(*n)),
                _ => return Ok(Check::fail("k-witness attached to a set that is not a minimal envelope")),
            };
            if verify_kwitness(&base, w, x, &tol)? {
                Check::pass(format!("{} relaxation separates", w.family))
            } else {
                Check::fail("k-witness does not separate on recomputation")
            }
        }
        (Certificate::Compression { choi, image_out }, _) if !claim_in => {
            let (k, base) = match set.node() {
                Node::MaxOver(k, s) => (*k, s.clone()),
                Node::Primitive(Primitive::BallMax(n)) => (1, FreeConvexSet::matrix_range(clifford(*n))),
                _ => return Ok(Check::fail("compression attached to a set that is not a maximal envelope")),
            };
            if choi.out_dim != k || choi.in_dim != x.n() {
                return Ok(Check::fail("compression has the wrong shape"));
            }
            let y = choi.apply_tuple(x)?;
            let y = if base.is_selfadjoint() { y.map(crate::linalg::herm) } else { y };
            let y = if base.is_selfadjoint() { MatrixTuple::selfadjoint(y.entries().to_vec())? } else { y };
            choi_ok(choi).and(verify_membership(&base, &y, image_out, budget)?).and(if image_out.is_out() {
                Check::pass("image outside the base")
            } else {
                Check::fail("image verdict is not OUT")
            })
        }
        (Certificate::NetCover(n), Node::MaxOver(k, s)) if claim_in && n.k == *k => {
            match max_membership_certify(s, *k, x, budget, &tol)? {
                CertifyResult::In(v) if v.margin >= 0.0 => Check::pass(format!("net of {} points re-run, slack {:.3e}", n.points, v.margin)),
                _ => Check::fail("net certificate does not reproduce"),
            }
        }
        (Certificate::NetCover(n), Node::Primitive(Primitive::BallMax(d))) if claim_in && n.k == 1 => {
            match max_membership_certify(&FreeConvexSet::matrix_range(clifford(*d)), 1, x, budget, &tol)? {
                CertifyResult::In(v) if v.margin >= 0.0 => Check::pass("net re-run"),
                _ => Check::fail("net certificate does not reproduce"),
            }
        }
        (Certificate::Gap { .. }, _) => Check::fail("a gap report certifies nothing"),
        _ => Check::fail(format!("certificate kind does not match {} for a {:?} claim", set.describe(), verdict)),
    })
}

/// Re-checks a containment verdict `s1 ⊆ s2`.
pub fn verify_containment(s1: &FreeConvexSet, s2: &FreeConvexSet, v: &MembershipVerdict, budget: &Budget) -> Result<Check> {
    if v.verdict == Verdict::Undecided {
        return Ok(Check::pass("undecided: nothing claimed"));
    }
    match (&v.certificate, s1.node(), s2.node()) {
        (Certificate::Structural(_), _, _) => Ok(match structural(s1, s2, budget)? {
            Some(r) if v.is_in() => Check::pass(r),
            _ => Check::fail("structural rule does not apply"),
        }),
        (Certificate::Polar(inner), Node::FreeSpectrahedron(a), Node::FreeSpectrahedron(b)) => {
            let wa = FreeConvexSet::matrix_range(a.clone());
            let c = verify_membership(&wa, b, inner, budget)?;
            Ok(if c.ok && inner.verdict == v.verdict { c } else { Check::fail("polar verdict does not match") })
        }
        (Certificate::Separator(s), _, _) if v.is_out() => {
            let a = support(s1, &s.functional, budget)?;
            let b = support(s2, &s.functional, budget)?;
            if a.lower < s.point_value - slack(s.point_value) || b.upper > s.support_upper + slack(s.support_upper) {
                return Ok(Check::fail("recomputed supports do not reproduce the gap"));
            }
            Ok(if s.point_value - s.support_upper >= 5e-7 {
                Check::pass(format!("support gap {:.3e}", s.point_value - s.support_upper))
            } else {
                Check::fail("support gap below the margin")
            })
        }
        (_, Node::MatrixRange(t), _) => verify_membership(s2, t, v, budget),
        _ => Ok(Check::fail("certificate kind does not match the containment pair")),
    }
}

/// Re-checks the witnesses attached to inclusion bounds for `s1 ⊆ C s2`.
pub fn verify_scale_bounds(s1: &FreeConvexSet, s2: &FreeConvexSet, b: &ScaleBounds, budget: &Budget) -> Result<Check> {
    if b.lower > b.upper + 1e-6 {
        return Ok(Check::fail(format!("lower {} exceeds upper {}", b.lower, b.upper)));
    }
    let (r1, a1) = unscale(s1);
    let (r2, a2) = unscale(s2);
    let f = r1 / r2;
    let mut out = Check::pass(format!("bounds [{:.6}, {:.6}]", b.lower, b.upper));
    if let Some(w) = &b.lower_witness {
        out = out.and(check_witness(a1, a2, w, b.lower / f, true, budget)?);
    }
    if let Some(w) = &b.upper_witness {
        out = out.and(check_witness(a1, a2, w, b.upper / f, false, budget)?);
    }
    Ok(out)
}

/// Checks one witness of a bound `claim` on `min {C : S1 ⊆ C S2}`.
pub fn verify_scale_witness(
    s1: &FreeConvexSet,
    s2: &FreeConvexSet,
    w: &ScaleWitness,
    claim: f64,
    is_lower: bool,
    budget: &Budget,
) -> Result<Check> {
    let (r1, a1) = unscale(s1);
    let (r2, a2) = unscale(s2);
    check_witness(a1, a2, w, claim * r2 / r1, is_lower, budget)
}

fn check_witness(s1: &FreeConvexSet, s2: &FreeConvexSet, w: &ScaleWitness, claim: f64, is_lower: bool, budget: &Budget) -> Result<Check> {
    let close = |a: f64, b: f64, rel: f64| (a - b).abs() <= rel * (1.0 + a.abs());
    Ok(match w {
        ScaleWitness::Ratio { functional, point, point_value, support_upper } => {
            let pv = functional.pair(point);
            let up = support(s2, functional, budget)?.upper;
            let x = MatrixTuple::new(point.clone())?;
            let x = if s1.is_selfadjoint() { MatrixTuple::selfadjoint(x.entries().iter().map(crate::linalg::herm).collect())? } else { x };
            let inside = crate::oracles::membership(s1, &x, budget)?;
            if !close(pv, *point_value, 1e-9) {
                Check::fail("ratio witness pairing mismatch")
            } else if up > support_upper + slack(*support_upper) {
                Check::fail(format!("ratio witness support {up} above the recorded {support_upper}"))
            } else if inside.is_out() {
                Check::fail("ratio witness point is outside the first set")
            } else if is_lower && claim > pv / support_upper + 1e-9 {
                Check::fail("claimed lower bound exceeds the witnessed ratio")
            } else {
                Check::pass(format!("ratio {:.6}", pv / support_upper))
            }
        }
        ScaleWitness::Choi { choi, scale } => match (s1.node(), s2.node()) {
            (Node::MatrixRange(t1), Node::MatrixRange(t2)) => {
                let img = choi.apply_tuple(t2)?;
                let err = img
                    .entries()
                    .iter()
                    .zip(t1.entries())
                    .map(|(a, b)| crate::linalg::frobenius(&(a * crate::linalg::c(*scale, 0.0) - b)))
                    .fold(0.0, f64::max);
                if err <= 1e-6 * (1.0 + scale) && claim >= scale - 1e-9 {
                    choi_ok(choi).and(Check::pass(format!("Choi image residual {err:.1e}")))
                } else {
                    Check::fail(format!("Choi image residual {err:.3e}"))
                }
            }
            _ => Check::fail("Choi witness needs two matrix ranges"),
        },
        ScaleWitness::Pencil { eigenvalue } => match (s1.node(), s2.node()) {
            (Node::MatrixRange(t), Node::FreeSpectrahedron(a)) => {
                let lam = lambda_max(&pencil(t, a)).max(0.0);
                if close(lam, *eigenvalue, 1e-9) && close(lam, claim, 1e-9) {
                    Check::pass(format!("pencil eigenvalue {lam:.9}"))
                } else {
                    Check::fail(format!("pencil eigenvalue {lam} vs recorded {eigenvalue}"))
                }
            }
            _ => Check::fail("pencil witness needs a range and a spectrahedron"),
        },
        ScaleWitness::WitnessTuple { tuple, blocks, choi, scale } => {
            let Node::MatrixRange(t) = s1.node() else { return Ok(Check::fail("witness tuple needs a range")) };
            let img = choi.apply_tuple(tuple)?;
            let err = img
                .entries()
                .iter()
                .zip(t.entries())
                .map(|(a, b)| crate::linalg::frobenius(&(a * crate::linalg::c(*scale, 0.0) - b)))
                .fold(0.0, f64::max);
            if err > 1e-6 * (1.0 + scale) || claim < scale - 1e-9 {
                return Ok(Check::fail(format!("witness tuple image residual {err:.3e}")));
            }
            // each diagonal block of A must lie in the base at its level
            let base = match s2.node() {
                Node::MinOver(_, b) => b.clone(),
                _ => s2.clone(),
            };
            let mut off = 0;
            let mut out = choi_ok(choi);
            for &bl in blocks {
                let part: Vec<CMat> = tuple.entries().iter().map(|a| a.view((off, off), (bl, bl)).into_owned()).collect();
                let part = if tuple.is_selfadjoint() { MatrixTuple::selfadjoint(part)? } else { MatrixTuple::new(part)? };
                let v = crate::oracles::membership(&base, &part, budget)?;
                if !v.is_in() {
                    return Ok(Check::fail("a witness block is not certified inside the base"));
                }
                off += bl;
            }
            if off != tuple.n() {
                return Ok(Check::fail("witness blocks do not tile the tuple"));
            }
            out.detail = format!("{}; {} blocks inside the base", out.detail, blocks.len());
            out
        }
        ScaleWitness::Probe { scale, verdict } => {
            let Node::MatrixRange(t) = s1.node() else { return Ok(Check::fail("probe witness needs a range")) };
            let c = verify_membership(s2, &t.scaled(1.0 / scale), verdict, budget)?;
            let consistent = if is_lower { verdict.is_out() && claim <= scale + 1e-12 } else { verdict.is_in() && claim >= scale - 1e-12 };
            if c.ok && consistent {
                c
            } else {
                Check::fail(format!("probe at {scale}: {}", c.detail))
            }
        }
        ScaleWitness::Structural(r) => Check::pass(format!("structural: {r}")),
        ScaleWitness::Sandwich { beta, gamma } => {
            if !is_lower && claim >= beta * gamma - 1e-12 {
                Check::pass(format!("product of upper bounds {beta:.6} x {gamma:.6}"))
            } else {
                Check::fail("sandwich witness only bounds from above")
            }
        }
        ScaleWitness::Radii { formula, value } => {
            if (is_lower && claim <= value + 1e-12) || (!is_lower && claim >= value - 1e-12) {
                Check::pass(format!("radii bound {formula}"))
            } else {
                Check::fail("radii bound inconsistent with the claim")
            }
        }
    })
}
