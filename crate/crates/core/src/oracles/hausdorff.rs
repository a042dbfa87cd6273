//! Graded Hausdorff distance in the summed operator-norm metric.
//!
//! The dual norm of `sum_j |X_j|_op` is `max_j |H_j|_tr`, so the distance at
//! level `m` is the largest support gap over dual-unit functionals. Swept gaps
//! give lower bounds; upper bounds come from scaling sandwiches.

use serde_json::{json, Value};

use crate::config::Budget;
use crate::error::{Error, Result};
use crate::sets::FreeConvexSet;

use super::contains::inclusion_scale;
use super::support::{level1_support, support};
use super::sweep::{sweep, Eval};
use super::SupportFunctional;

#[derive(Debug, Clone, PartialEq)]
pub struct HausdorffBounds {
    pub lower: f64,
    pub upper: f64,
    pub lower_functional: Option<SupportFunctional>,
    pub lower_level: usize,
    pub notes: Vec<String>,
}

impl HausdorffBounds {
    pub fn to_json(&self) -> Value {
        json!({
            "lower": self.lower,
            "upper": if self.upper.is_finite() { json!(self.upper) } else { json!("inf") },
            "lower_level": self.lower_level,
            "lower_functional": self.lower_functional.as_ref().map(|h| h.to_json()),
            "notes": self.notes,
        })
    }
}

/// Bound on `sup_{X in S} sum_j |X_j|_op` from level-one supports.
pub fn metric_radius(set: &FreeConvexSet) -> Result<f64> {
    let dim = set.real_dim();
    let mut total = 0.0;
    if set.is_selfadjoint() {
        // |X_j| is the larger of the two coordinate supports
        for j in 0..dim {
            let mut u = vec![0.0; dim];
            u[j] = 1.0;
            let p = level1_support(set, &u)?;
            u[j] = -1.0;
            let q = level1_support(set, &u)?;
            total += p.max(q);
        }
    } else {
        // |X_j| <= 2 w(X_j); the numerical radius is bounded on an angle net
        let n = 16;
        let widen = 1.0 / (std::f64::consts::PI / n as f64).cos();
        for j in 0..dim / 2 {
            let mut w: f64 = 0.0;
            for i in 0..n {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                let mut u = vec![0.0; dim];
                u[2 * j] = t.cos();
                u[2 * j + 1] = t.sin();
                w = w.max(level1_support(set, &u)?);
            }
            total += 2.0 * w * widen;
        }
    }
    Ok(total)
}

/// `dist(C, D) <= M max(|1/a - 1|, |b - 1|)` for `a D ⊆ C ⊆ b D`.
pub fn dist_from_scaling(a: f64, b: f64, m: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && m > 0.0) {
        return Err(Error::InvalidArgument(format!("need a, b, M > 0 (got {a}, {b}, {m})")));
    }
    Ok(m * (1.0 / a - 1.0).abs().max((b - 1.0).abs()))
}

/// Lower and upper bounds on the graded Hausdorff distance.
pub fn hausdorff(s1: &FreeConvexSet, s2: &FreeConvexSet, budget: &Budget) -> Result<HausdorffBounds> {
    if s1.d() != s2.d() {
        return Err(Error::Dimension(format!("sets have d = {} and {}", s1.d(), s2.d())));
    }
    let mut out = HausdorffBounds {
        lower: 0.0,
        upper: f64::INFINITY,
        lower_functional: None,
        lower_level: 0,
        notes: Vec::new(),
    };
    if s1 == s2 {
        out.upper = 0.0;
        out.notes.push("identical sets".into());
        return Ok(out);
    }
    let eval = |h: &SupportFunctional| -> Result<Eval> {
        let a = support(s1, h, budget)?;
        let b = support(s2, h, budget)?;
        let g1 = a.lower - b.upper;
        let g2 = b.lower - a.upper;
        let grad = |z: &Option<Vec<crate::linalg::CMat>>, w: f64| {
            z.as_ref().map(|z| SupportFunctional { entries: z.iter().map(|x| x.adjoint() * crate::linalg::c(w, 0.0)).collect() })
        };
        let (v, dir) = if g1 >= g2 {
            (g1, grad(&a.achiever, 1.0).or(grad(&b.achiever, -1.0)))
        } else {
            (g2, grad(&b.achiever, 1.0).or(grad(&a.achiever, -1.0)))
        };
        Ok((if v.is_nan() { f64::NEG_INFINITY } else { v }, dir))
    };
    let r = sweep(s1.d(), s1.is_selfadjoint() && s2.is_selfadjoint(), budget, &[], eval)?;
    if r.value > 0.0 {
        out.lower = r.value;
        out.lower_functional = r.functional;
        out.lower_level = r.level;
    }
    // sandwich a S2 ⊆ S1 ⊆ b S2 with b and 1/a the certified upper bounds
    let scale = |a: &FreeConvexSet, b: &FreeConvexSet| match inclusion_scale(a, b, budget) {
        Ok(s) => Ok(Some(s)),
        Err(Error::Precondition(_)) => Ok(None),
        Err(e) => Err(e),
    };
    let (m1, m2) = (metric_radius(s1)?, metric_radius(s2)?);
    let m = m1.max(m2);
    if let (Some(fwd), Some(bwd)) = (scale(s1, s2)?, scale(s2, s1)?) {
        if fwd.upper.is_finite() && bwd.upper.is_finite() {
            out.upper = if m > 0.0 { dist_from_scaling(1.0 / bwd.upper.max(f64::MIN_POSITIVE), fwd.upper.max(f64::MIN_POSITIVE), m)? } else { 0.0 };
            out.notes.push(format!(
                "sandwich: S1 ⊆ [{:.6}, {:.6}] S2, S2 ⊆ [{:.6}, {:.6}] S1, M = {m:.6}",
                fwd.lower, fwd.upper, bwd.lower, bwd.upper
            ));
        }
    }
    // 0 in both sets: every point is within its own norm of 0
    if m.is_finite() && m < out.upper && contains_zero(s1, budget)? && contains_zero(s2, budget)? {
        out.upper = m;
        out.notes.push(format!("0 lies in both sets: upper bound max(M1, M2) = {m:.6}"));
    }
    if !out.upper.is_finite() {
        out.notes.push("no certified scaling sandwich; upper bound is infinite".into());
    }
    Ok(out)
}

/// `0 in S_1`, which puts 0 in every level.
fn contains_zero(set: &FreeConvexSet, budget: &Budget) -> Result<bool> {
    let z = crate::linalg::MatrixTuple::zero(set.d(), 1, set.is_selfadjoint());
    Ok(super::membership(set, &z, budget)?.is_in())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversion_closed_form() {
        assert_eq!(dist_from_scaling(1.0, 1.0, 3.0).unwrap(), 0.0);
        // C = [-1, 1], D = [-0.8, 0.8]: a = b = 1.25, true distance 0.2
        assert!((dist_from_scaling(1.25, 1.25, 1.0).unwrap() - 0.25).abs() < 1e-15);
        assert!(dist_from_scaling(0.0, 1.0, 1.0).is_err());
    }
}
