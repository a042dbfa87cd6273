//! Containment `S1 ⊆ S2` and the inclusion constant `min {C : S1 ⊆ C S2}`.

use crate::config::{Budget, Tolerances};
use crate::error::{Error, Result};
use crate::linalg::{c, herm, kron, lambda_max, CMat, MatrixTuple};
use crate::sdp::Status;
use crate::sets::{FreeConvexSet, Node};

use super::membership::{gauge, membership};
use super::support::support;
use super::sweep::{sweep, Eval};
use super::{Certificate, MembershipVerdict, ScaleBounds, ScaleWitness, Separator, SupportFunctional, Verdict};

fn structural_in(reason: impl Into<String>) -> MembershipVerdict {
    let reason = reason.into();
    MembershipVerdict {
        verdict: Verdict::In,
        certificate: Certificate::Structural(reason.clone()),
        margin: 0.0,
        note: reason,
    }
}

/// Peels scalings: `S = r * base`.
pub(crate) fn unscale(s: &FreeConvexSet) -> (f64, &FreeConvexSet) {
    match s.node() {
        Node::Scaled(r, b) => {
            let (q, inner) = unscale(b);
            (r * q, inner)
        }
        _ => (1.0, s),
    }
}

/// `0 in S_1`, certified.
pub(crate) fn zero_inside(s: &FreeConvexSet, budget: &Budget) -> Result<bool> {
    let z = MatrixTuple::zero(s.d(), 1, s.is_selfadjoint());
    Ok(membership(s, &z, budget)?.is_in())
}

/// Inclusions that hold for every matrix convex set.
pub(crate) fn structural(s1: &FreeConvexSet, s2: &FreeConvexSet, budget: &Budget) -> Result<Option<String>> {
    if s1 == s2 {
        return Ok(Some("identical sets".into()));
    }
    let rule = match (s1.node(), s2.node()) {
        (Node::MinOver(_, a), _) if a == s2 => Some("a minimal envelope lies inside its base"),
        (_, Node::MaxOver(_, b)) if b == s1 => Some("a set lies inside its maximal envelope"),
        (Node::MinOver(_, a), Node::MaxOver(_, b)) if a == b => Some("minimal envelope inside maximal envelope"),
        (Node::MinOver(k, a), Node::MinOver(l, b)) if a == b && k <= l => Some("minimal envelopes grow with k"),
        (Node::MaxOver(k, a), Node::MaxOver(l, b)) if a == b && k >= l => Some("maximal envelopes shrink with k"),
        _ => None,
    };
    if let Some(r) = rule {
        return Ok(Some(r.into()));
    }
    let (r1, b1) = unscale(s1);
    let (r2, b2) = unscale(s2);
    if b1 == b2 && r1 <= r2 && (r1 != 1.0 || r2 != 1.0) && zero_inside(b1, budget)? {
        return Ok(Some(format!("{r1} S inside {r2} S with 0 in S")));
    }
    Ok(None)
}

/// Decides `S1 ⊆ S2`.
pub fn contains(s1: &FreeConvexSet, s2: &FreeConvexSet, budget: &Budget) -> Result<MembershipVerdict> {
    if s1.d() != s2.d() {
        return Err(Error::Dimension(format!("sets have d = {} and {}", s1.d(), s2.d())));
    }
    if let Some(reason) = structural(s1, s2, budget)? {
        return Ok(structural_in(reason));
    }
    match (s1.node(), s2.node()) {
        // W(T) ⊆ S iff T in S
        (Node::MatrixRange(t), _) => {
            let mut v = membership(s2, t, budget)?;
            v.note = format!("generating tuple: {}", v.note);
            if !matches!(v.verdict, Verdict::Undecided) {
                return Ok(v);
            }
        }
        // D_A ⊆ D_B iff W(B) ⊆ W(A) when 0 is in both ranges
        (Node::FreeSpectrahedron(a), Node::FreeSpectrahedron(b)) => {
            let wa = FreeConvexSet::matrix_range(a.clone());
            let v = membership(&wa, b, budget)?;
            let note = format!("polar side, B in W(A): {}", v.note);
            match v.verdict {
                Verdict::In => {
                    return Ok(MembershipVerdict {
                        verdict: Verdict::In,
                        margin: v.margin,
                        note,
                        certificate: Certificate::Polar(Box::new(v)),
                    })
                }
                Verdict::Out => {
                    let wb = FreeConvexSet::matrix_range(b.clone());
                    if zero_inside(&wa, budget)? && zero_inside(&wb, budget)? {
                        return Ok(MembershipVerdict {
                            verdict: Verdict::Out,
                            margin: v.margin,
                            note,
                            certificate: Certificate::Polar(Box::new(v)),
                        });
                    }
                }
                Verdict::Undecided => {}
            }
        }
        _ => {}
    }
    gap_sweep(s1, s2, budget)
}

/// Subgradient of `h_S` at `H` from an achiever: `X^*` entrywise.
fn achiever_dir(z: &[CMat], w: f64) -> SupportFunctional {
    SupportFunctional {
        entries: z.iter().map(|x| x.adjoint() * c(w, 0.0)).collect(),
    }
}

fn add_dir(a: Option<SupportFunctional>, b: Option<SupportFunctional>) -> Option<SupportFunctional> {
    match (a, b) {
        (Some(a), Some(b)) => Some(SupportFunctional {
            entries: a.entries.iter().zip(&b.entries).map(|(x, y)| x + y).collect(),
        }),
        (a, b) => a.or(b),
    }
}

/// Largest certified `h_1(H) - h_2(H)` over dual-unit functionals.
fn gap_sweep(s1: &FreeConvexSet, s2: &FreeConvexSet, budget: &Budget) -> Result<MembershipVerdict> {
    let tol = Tolerances::default();
    let eval = |h: &SupportFunctional| -> Result<Eval> {
        let a = support(s1, h, budget)?;
        let b = support(s2, h, budget)?;
        if !a.lower.is_finite() || !b.upper.is_finite() {
            return Ok((f64::NEG_INFINITY, None));
        }
        let dir = add_dir(a.achiever.as_deref().map(|z| achiever_dir(z, 1.0)), b.achiever.as_deref().map(|z| achiever_dir(z, -1.0)));
        Ok((a.lower - b.upper, dir))
    };
    let r = sweep(s1.d(), s1.is_selfadjoint() && s2.is_selfadjoint(), budget, &[], eval)?;
    if r.value >= tol.verdict_margin {
        let h = r.functional.expect("positive gap has a functional");
        let a = support(s1, &h, budget)?;
        let b = support(s2, &h, budget)?;
        return Ok(MembershipVerdict {
            verdict: Verdict::Out,
            margin: a.lower - b.upper,
            note: format!("support gap {:.6e} at level {}", a.lower - b.upper, r.level),
            certificate: Certificate::Separator(Separator {
                functional: h,
                point_value: a.lower,
                support_upper: b.upper,
            }),
        });
    }
    Ok(MembershipVerdict::undecided(
        r.value,
        f64::INFINITY,
        format!("largest certified support gap {:.3e} over levels 1..={}", r.value, budget.level_cap),
    ))
}

/// Pencil `Re sum_j T_j ⊗ A_j`.
pub(crate) fn pencil(t: &MatrixTuple, a: &MatrixTuple) -> CMat {
    let mut p = CMat::zeros(t.n() * a.n(), t.n() * a.n());
    for (x, y) in t.entries().iter().zip(a.entries()) {
        p += kron(x, y);
    }
    herm(&p)
}

/// Bounds on `min {C > 0 : S1 ⊆ C S2}`.
pub fn inclusion_scale(s1: &FreeConvexSet, s2: &FreeConvexSet, budget: &Budget) -> Result<ScaleBounds> {
    if s1.d() != s2.d() {
        return Err(Error::Dimension(format!("sets have d = {} and {}", s1.d(), s2.d())));
    }
    let mut b = ScaleBounds::new("inclusion");
    b.lower = 0.0;
    if s1 == s2 {
        b.lower = 1.0;
        b.lower_upper(1.0, Some(ScaleWitness::Structural("identical sets".into())));
        return Ok(b);
    }
    let (r1, a1) = unscale(s1);
    let (r2, a2) = unscale(s2);
    if r1 != 1.0 || r2 != 1.0 {
        let mut inner = inclusion_scale(a1, a2, budget)?;
        let f = r1 / r2;
        inner.lower *= f;
        inner.upper *= f;
        inner.notes.push(format!("scalings factor out: {r1} / {r2}"));
        return Ok(inner);
    }
    match (s1.node(), s2.node()) {
        (Node::MatrixRange(t1), Node::MatrixRange(_)) => range_in_range(&mut b, t1, s2, budget)?,
        (Node::MatrixRange(t), Node::FreeSpectrahedron(a)) => {
            // X in C D_A iff lambda_max(pencil(X, A)) <= C, and W(T) ⊆ C D_A iff T is
            let lam = lambda_max(&pencil(t, a)).max(0.0);
            b.lower = lam;
            b.lower_witness = Some(ScaleWitness::Pencil { eigenvalue: lam });
            b.lower_upper(lam, Some(ScaleWitness::Pencil { eigenvalue: lam }));
        }
        (Node::FreeSpectrahedron(a), Node::FreeSpectrahedron(bb)) => {
            // D_A ⊆ C D_B iff B in C W(A), given 0 in W(A)
            let wa = FreeConvexSet::matrix_range(a.clone());
            if !zero_inside(&wa, budget)? {
                return Err(Error::Precondition("0 must lie in W(A) for the polar reduction".into()));
            }
            let mut inner = inclusion_scale(&FreeConvexSet::matrix_range(bb.clone()), &wa, budget)?;
            inner.notes.push("decided on the polar side: W(B) ⊆ C W(A)".into());
            return Ok(inner);
        }
        (Node::MatrixRange(t), _) => {
            ratio_sweep(&mut b, s1, s2, budget)?;
            point_bisection(&mut b, t, s2, budget)?;
        }
        _ => {
            ratio_sweep(&mut b, s1, s2, budget)?;
            if contains(s1, s2, budget)?.is_in() {
                b.lower_upper(1.0, Some(ScaleWitness::Structural("containment certified".into())));
            }
            if !b.upper.is_finite() {
                b.notes.push("no certified upper bound for this pair".into());
            }
        }
    }
    Ok(b)
}

/// Exact SDP for two ranges: the largest `s` with `s T1 in W(T2)`.
fn range_in_range(b: &mut ScaleBounds, t1: &MatrixTuple, s2: &FreeConvexSet, budget: &Budget) -> Result<()> {
    let m = t1.n();
    let origin = vec![CMat::zeros(m, m); t1.d()];
    let g = gauge(s2, &origin, t1.entries(), f64::INFINITY)?;
    match g.status {
        Status::Optimal => {}
        Status::Unbounded => {
            b.lower_upper(0.0, Some(ScaleWitness::Structural("the first set is {0}".into())));
            return Ok(());
        }
        s => return Err(Error::Precondition(format!("inclusion SDP ended with {s:?}; is 0 inside the second range?"))),
    }
    let s = g.s;
    if !(s > 1e-9) {
        return Err(Error::Precondition(format!("zero-not-interior: gauge {s:.3e} of the first range in the second")));
    }
    if let Some(j) = g.cert.as_ref().and_then(|cc| cc.as_choi()) {
        b.lower_upper(1.0 / s, Some(ScaleWitness::Choi { choi: j.clone(), scale: 1.0 / s }));
    }
    if let Some(sep) = g.separator {
        let sep = sep.normalized();
        let pv = sep.pair(t1.entries());
        let up = support(s2, &sep, budget)?.upper;
        if up > 0.0 {
            b.raise_lower(
                pv / up,
                Some(ScaleWitness::Ratio { functional: sep, point: t1.entries().to_vec(), point_value: pv, support_upper: up }),
            );
        }
    }
    Ok(())
}

/// Lower bound `max_H h_1(H) / h_2(H)` with certified sides.
pub(crate) fn ratio_sweep(b: &mut ScaleBounds, s1: &FreeConvexSet, s2: &FreeConvexSet, budget: &Budget) -> Result<()> {
    let eval = |h: &SupportFunctional| -> Result<Eval> {
        let a = support(s1, h, budget)?;
        let q = support(s2, h, budget)?;
        if !(a.lower.is_finite() && q.upper.is_finite() && q.upper > 1e-12) {
            return Ok((f64::NEG_INFINITY, None));
        }
        let v = a.lower / q.upper;
        let dir = add_dir(
            a.achiever.as_deref().map(|z| achiever_dir(z, 1.0 / q.upper)),
            q.achiever.as_deref().map(|z| achiever_dir(z, -v / q.upper)),
        );
        Ok((v, dir))
    };
    let r = sweep(s1.d(), s1.is_selfadjoint() && s2.is_selfadjoint(), budget, &[], eval)?;
    if let Some(h) = r.functional {
        let a = support(s1, &h, budget)?;
        let q = support(s2, &h, budget)?;
        if let Some(z) = a.achiever {
            if q.upper > 1e-12 {
                // record the exact pairing; the solver's lower value may carry slack
                let pv = h.pair(&z);
                b.raise_lower(
                    pv.min(a.lower) / q.upper,
                    Some(ScaleWitness::Ratio { functional: h, point: z, point_value: pv, support_upper: q.upper }),
                );
            }
        }
        b.notes.push(format!(
            "ratio sweep: best {:.6} at level {} ({} support pairs)",
            r.value, r.level, r.evaluations
        ));
    }
    Ok(())
}

/// For `S1 = W(T)`: `W(T) ⊆ C S2` iff `T / C in S2`; bisect on `C`.
pub(crate) fn point_bisection(b: &mut ScaleBounds, t: &MatrixTuple, s2: &FreeConvexSet, budget: &Budget) -> Result<()> {
    let probe = |cc: f64| -> Result<MembershipVerdict> { membership(s2, &t.scaled(1.0 / cc), budget) };
    let mut hi = (b.lower * 1.05).max(1e-3);
    let mut found = false;
    for _ in 0..40 {
        let v = probe(hi)?;
        if v.is_in() {
            b.lower_upper(hi, Some(ScaleWitness::Probe { scale: hi, verdict: Box::new(v) }));
            found = true;
            break;
        }
        if v.is_out() {
            record_out(b, t, hi, &v);
        }
        hi *= 2.0;
    }
    if !found {
        b.notes.push("bisection found no certified upper bound".into());
        return Ok(());
    }
    let mut lo = b.lower;
    let mut hi = b.upper;
    while hi - lo > 1e-3 * hi {
        let mid = 0.5 * (lo + hi);
        let v = probe(mid)?;
        match v.verdict {
            Verdict::In => {
                b.lower_upper(mid, Some(ScaleWitness::Probe { scale: mid, verdict: Box::new(v) }));
                hi = mid;
            }
            Verdict::Out => {
                record_out(b, t, mid, &v);
                lo = mid;
            }
            Verdict::Undecided => {
                b.notes.push(format!("bisection stopped: T/{mid:.6} undecided ({})", v.note));
                break;
            }
        }
    }
    Ok(())
}

fn record_out(b: &mut ScaleBounds, t: &MatrixTuple, cc: f64, v: &MembershipVerdict) {
    let w = match &v.certificate {
        Certificate::Separator(s) => Some((s.functional.clone(), s.support_upper)),
        Certificate::KWitness(w) => Some((w.functional.clone(), w.relaxed_upper)),
        _ => None,
    };
    match w {
        Some((h, up)) if up > 0.0 => {
            let pv = h.pair(t.entries());
            b.raise_lower(
                pv / up,
                Some(ScaleWitness::Ratio { functional: h, point: t.entries().to_vec(), point_value: pv, support_upper: up }),
            );
        }
        _ => b.raise_lower(cc, Some(ScaleWitness::Probe { scale: cc, verdict: Box::new(v.clone()) })),
    }
}
