//! The scaling constants `alpha_k`, `beta_k`, `gamma_k` with certified bounds,
//! their profiles over `k`, and the scale/distance conversions.
//!
//! `beta_k(C) = inf {r >= 1 : C ⊆ r MinOver(k, C)}`,
//! `gamma_k(C) = inf {r >= 1 : MaxOver(k, C) ⊆ r C}`,
//! `alpha_k(C) = inf {r >= 1 : MaxOver(k, C) ⊆ r MinOver(k, C)}`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::Budget;
use crate::error::{Error, Result};
use crate::linalg::{herm, CMat, MatrixTuple};
use crate::oracles::contains::{point_bisection, unscale};
use crate::oracles::decode::bounds_from_json;
use crate::oracles::{
    inclusion_scale, membership, support, verify_scale_witness, Check, ScaleBounds, ScaleWitness, SupportFunctional,
};
use crate::sets::{clifford, geometry, FreeConvexSet, GeometryReport, Node, Primitive};

pub use crate::oracles::dist_from_scaling;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstantName {
    Alpha,
    Beta,
    Gamma,
}

impl ConstantName {
    pub fn as_str(self) -> &'static str {
        match self {
            ConstantName::Alpha => "alpha",
            ConstantName::Beta => "beta",
            ConstantName::Gamma => "gamma",
        }
    }
}

impl std::str::FromStr for ConstantName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(ConstantName::Alpha),
            "beta" => Ok(ConstantName::Beta),
            "gamma" => Ok(ConstantName::Gamma),
            other => Err(Error::InvalidArgument(format!("unknown constant `{other}` (alpha, beta, gamma)"))),
        }
    }
}

/// `a = 1 + d eps / delta`: if `dist(C, D) < eps` and the `delta`-ball lies in
/// both level-one sets, then `C ⊆ a D` and `D ⊆ a C`.
pub fn scaling_from_dist(eps: f64, delta: f64, d: usize) -> Result<f64> {
    if !(eps > 0.0 && delta > 0.0 && d >= 1) {
        return Err(Error::InvalidArgument(format!("need eps, delta > 0 and d >= 1 (got {eps}, {delta}, {d})")));
    }
    Ok(1.0 + d as f64 * eps / delta)
}

fn require_zero_interior(c: &FreeConvexSet) -> Result<GeometryReport> {
    let g = geometry(c)?;
    if !g.zero_interior {
        return Err(Error::Precondition(format!(
            "zero-not-interior: certified inner radius {:.3e} for {}",
            g.inner_radius,
            c.describe()
        )));
    }
    if !g.bounding_radius.is_finite() {
        return Err(Error::Precondition(format!("{} is unbounded at level one", c.describe())));
    }
    Ok(g)
}

/// `alpha_1 <= n M / delta` from `delta B ⊆ C_1 ⊆ M B` and the ball constant
/// `MaxOver(1, B^n) ⊆ n MinOver(1, B^n)` in `n` real coordinates.
fn radii_bound(c: &FreeConvexSet, g: &GeometryReport) -> ScaleWitness {
    let n = c.real_dim();
    let value = n as f64 * g.bounding_radius / g.inner_radius;
    ScaleWitness::Radii {
        formula: format!("n M / delta = {n} * {:.6} / {:.6}", g.bounding_radius, g.inner_radius),
        value,
    }
}

fn radii_value(w: &ScaleWitness) -> f64 {
    match w {
        ScaleWitness::Radii { value, .. } => *value,
        _ => f64::INFINITY,
    }
}

fn absorb(b: &mut ScaleBounds, inc: ScaleBounds, label: &str) {
    b.raise_lower(inc.lower, inc.lower_witness);
    b.lower_upper(inc.upper, inc.upper_witness);
    b.notes.extend(inc.notes.into_iter().map(|n| format!("{label}: {n}")));
}

fn finish(b: &mut ScaleBounds) {
    // definitional floor r >= 1
    if b.lower < 1.0 {
        b.lower = 1.0;
        b.lower_witness = None;
    }
}

/// Witness tuple `A`: a direct sum of certified points of `C` at levels at most `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessTupleUpper {
    pub tuple: MatrixTuple,
    pub blocks: Vec<usize>,
    /// `C ⊆ scale W(A)`, so `beta_k(C) <= scale`.
    pub scale: f64,
    pub witness: ScaleWitness,
}

fn certified_point(c: &FreeConvexSet, z: &[CMat], budget: &Budget) -> Result<Option<MatrixTuple>> {
    let x = if c.is_selfadjoint() {
        MatrixTuple::selfadjoint(z.iter().map(herm).collect())?
    } else {
        MatrixTuple::new(z.to_vec())?
    };
    // 0 is interior, so a slight shrink moves boundary points inside
    for shrink in [1.0, 1.0 - 1e-6, 1.0 - 1e-4] {
        let y = x.scaled(shrink);
        if membership(c, &y, budget)?.is_in() {
            return Ok(Some(y));
        }
    }
    Ok(None)
}

/// Samples support maximizers of `C = W(T)` at levels `1..=k`, forms their
/// direct sum `A` and solves `min {r : C ⊆ r W(A)}` exactly.
pub fn witness_tuple_upper(c: &FreeConvexSet, k: usize, samples: usize, budget: &Budget) -> Result<WitnessTupleUpper> {
    let Node::MatrixRange(t) = c.node() else {
        return Err(Error::Precondition("witness tuples need a matrix range".into()));
    };
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed ^ 0x5eed_7u64);
    let mut parts: Vec<MatrixTuple> = Vec::new();
    if t.n() <= k {
        parts.push(t.clone());
    }
    let mut drawn = 0;
    let mut target = samples.max(2);
    loop {
        while drawn < target {
            let m = 1 + drawn % k.min(t.n());
            drawn += 1;
            let h = SupportFunctional::random(&mut rng, c.d(), m, c.is_selfadjoint());
            let s = support(c, &h, budget)?;
            if let Some(z) = s.achiever {
                if let Some(x) = certified_point(c, &z, budget)? {
                    parts.push(x);
                }
            }
        }
        if !parts.is_empty() {
            let a = MatrixTuple::direct_sum_all(&parts)?;
            let a = if c.is_selfadjoint() { MatrixTuple::selfadjoint(a.entries().to_vec())? } else { a };
            match inclusion_scale(c, &FreeConvexSet::matrix_range(a.clone()), budget) {
                Ok(inc) if inc.upper.is_finite() => {
                    if let Some(ScaleWitness::Choi { choi, scale }) = inc.upper_witness {
                        let blocks = parts.iter().map(|p| p.n()).collect();
                        return Ok(WitnessTupleUpper {
                            witness: ScaleWitness::WitnessTuple { tuple: a.clone(), blocks, choi, scale },
                            tuple: a,
                            blocks: parts.iter().map(|p| p.n()).collect(),
                            scale,
                        });
                    }
                }
                Ok(_) | Err(Error::Precondition(_)) => {}
                Err(e) => return Err(e),
            }
        }
        // degenerate A (flat level one): retry once with more directions
        if target >= 4 * samples.max(2) {
            return Err(Error::Precondition(format!("{drawn} sampled directions gave a degenerate witness tuple")));
        }
        target *= 2;
    }
}

/// Certified bounds on `beta_k(C)`.
pub fn beta(c: &FreeConvexSet, k: usize, budget: &Budget) -> Result<ScaleBounds> {
    let g = require_zero_interior(c)?;
    beta_with(c, k, &g, budget)
}

fn beta_with(c: &FreeConvexSet, k: usize, g: &GeometryReport, budget: &Budget) -> Result<ScaleBounds> {
    let mut b = ScaleBounds::new("beta_k");
    let min = FreeConvexSet::min_over(k, c)?;
    if &min == c {
        b.lower_upper(1.0, Some(ScaleWitness::Structural(format!("the set equals its minimal envelope over level {k}"))));
        return Ok(b);
    }
    absorb(&mut b, inclusion_scale(c, &min, budget)?, "inclusion");
    if b.upper > b.lower * (1.0 + 1e-3) && matches!(c.node(), Node::MatrixRange(_)) {
        match witness_tuple_upper(c, k, budget.witness_samples, budget) {
            Ok(w) => {
                b.notes.push(format!("witness tuple: {} blocks, total size {}, scale {:.6}", w.blocks.len(), w.tuple.n(), w.scale));
                b.lower_upper(w.scale, Some(w.witness));
            }
            Err(Error::Precondition(m)) => b.notes.push(format!("witness tuple skipped: {m}")),
            Err(e) => return Err(e),
        }
    }
    let r = radii_bound(c, g);
    b.lower_upper(radii_value(&r), Some(r));
    finish(&mut b);
    Ok(b)
}

/// Both gamma pipelines and their merge.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaPipelines {
    /// `MaxOver(k, C)` against `C`.
    pub direct: ScaleBounds,
    /// `beta_k` of the polar.
    pub dual: Option<ScaleBounds>,
    pub merged: ScaleBounds,
    /// Lower of each pipeline is at most the upper of the other plus 0.05.
    pub agree: bool,
}

/// Bounds on `gamma_k(C)` from the direct and dual pipelines.
pub fn gamma_pipelines(c: &FreeConvexSet, k: usize, budget: &Budget) -> Result<GammaPipelines> {
    let g = require_zero_interior(c)?;
    gamma_with(c, k, &g, budget)
}

fn gamma_with(c: &FreeConvexSet, k: usize, g: &GeometryReport, budget: &Budget) -> Result<GammaPipelines> {
    let mut direct = ScaleBounds::new("gamma_k");
    let max = FreeConvexSet::max_over(k, c)?;
    if &max == c {
        direct.lower_upper(1.0, Some(ScaleWitness::Structural(format!("the set equals its maximal envelope over level {k}"))));
    } else {
        absorb(&mut direct, inclusion_scale(&max, c, budget)?, "direct");
        let r = radii_bound(c, g);
        direct.lower_upper(radii_value(&r), Some(r));
    }
    finish(&mut direct);

    let dual = match c.polar() {
        Ok(p) => match require_zero_interior(&p) {
            Ok(gp) => {
                let mut b = beta_with(&p, k, &gp, budget)?;
                b.target = "gamma_k".into();
                b.notes.push(format!("dual pipeline: beta_{k} of the polar {}", p.describe()));
                Some(b)
            }
            Err(e) => {
                direct.notes.push(format!("dual pipeline skipped: {e}"));
                None
            }
        },
        Err(e) => {
            direct.notes.push(format!("dual pipeline skipped: {e}"));
            None
        }
    };

    let mut merged = direct.clone();
    let mut agree = true;
    if let Some(d) = &dual {
        agree = direct.lower <= d.upper + 0.05 && d.lower <= direct.upper + 0.05;
        merged.raise_lower(d.lower, d.lower_witness.clone());
        merged.lower_upper(d.upper, d.upper_witness.clone());
        merged.notes.extend(d.notes.iter().cloned());
        merged.notes.push(format!(
            "pipelines: direct [{:.6}, {:.6}], dual [{:.6}, {:.6}]{}",
            direct.lower,
            direct.upper,
            d.lower,
            d.upper,
            if agree { "" } else { "; DISAGREE beyond 0.05" }
        ));
    }
    Ok(GammaPipelines { direct, dual, merged, agree })
}

/// Merged bounds on `gamma_k(C)`.
pub fn gamma(c: &FreeConvexSet, k: usize, budget: &Budget) -> Result<ScaleBounds> {
    Ok(gamma_pipelines(c, k, budget)?.merged)
}

/// Lower bound from a known point of the maximal set: for the ball pair,
/// the anticommuting tuple against the minimal set.
fn point_lower(b: &mut ScaleBounds, max: &FreeConvexSet, min: &FreeConvexSet, budget: &Budget) -> Result<()> {
    let (r1, m1) = unscale(max);
    let (r2, m2) = unscale(min);
    let (Node::Primitive(Primitive::BallMax(n)), Node::Primitive(Primitive::BallMin(n2))) = (m1.node(), m2.node()) else {
        return Ok(());
    };
    if n != n2 {
        return Ok(());
    }
    let t = clifford(*n);
    let mut probe = ScaleBounds::new("inclusion");
    probe.lower = 0.0;
    point_bisection(&mut probe, &t, m2, budget)?;
    let f = r1 / r2;
    if let Some(w) = probe.lower_witness {
        // the point lies in BallMax(n), so only the lower side transfers
        b.raise_lower(probe.lower * f, Some(w));
        b.notes.push(format!("point witness {}: scale >= {:.6}", t.label.as_deref().unwrap_or("tuple"), probe.lower * f));
    }
    Ok(())
}

/// All three constants at one level.
#[derive(Debug, Clone, PartialEq)]
pub struct Constants {
    pub k: usize,
    pub alpha: ScaleBounds,
    pub beta: ScaleBounds,
    pub gamma: GammaPipelines,
}

/// `alpha_k`, `beta_k`, `gamma_k` together; alpha is intersected with
/// `max(beta, gamma) <= alpha <= beta gamma`.
pub fn constants(c: &FreeConvexSet, k: usize, budget: &Budget) -> Result<Constants> {
    let g = require_zero_interior(c)?;
    let beta = beta_with(c, k, &g, budget)?;
    let gamma = gamma_with(c, k, &g, budget)?;
    let mut a = ScaleBounds::new("alpha_k");
    let max = FreeConvexSet::max_over(k, c)?;
    let min = FreeConvexSet::min_over(k, c)?;
    if max == min {
        a.lower_upper(1.0, Some(ScaleWitness::Structural("minimal and maximal envelopes coincide".into())));
    } else {
        absorb(&mut a, inclusion_scale(&max, &min, budget)?, "direct");
        point_lower(&mut a, &max, &min, budget)?;
    }
    let gm = &gamma.merged;
    if beta.lower > a.lower {
        a.raise_lower(beta.lower, beta.lower_witness.clone());
        a.notes.push("lower bound from beta".into());
    }
    if gm.lower > a.lower {
        a.raise_lower(gm.lower, gm.lower_witness.clone());
        a.notes.push("lower bound from gamma".into());
    }
    let prod = beta.upper * gm.upper;
    if prod < a.upper {
        a.lower_upper(prod, Some(ScaleWitness::Sandwich { beta: beta.upper, gamma: gm.upper }));
    }
    let r = radii_bound(c, &g);
    a.lower_upper(radii_value(&r), Some(r));
    finish(&mut a);
    Ok(Constants { k, alpha: a, beta, gamma })
}

pub fn alpha(c: &FreeConvexSet, k: usize, budget: &Budget) -> Result<ScaleBounds> {
    Ok(constants(c, k, budget)?.alpha)
}

/// Inclusions a witness for a level-`k` constant of `c` may refer to.
fn constant_pairs(c: &FreeConvexSet, k: usize) -> Result<Vec<(FreeConvexSet, FreeConvexSet)>> {
    let max = FreeConvexSet::max_over(k, c)?;
    let min = FreeConvexSet::min_over(k, c)?;
    let mut pairs = vec![(c.clone(), min.clone()), (max.clone(), c.clone()), (max, min)];
    if let Ok(p) = c.polar() {
        pairs.push((p.clone(), FreeConvexSet::min_over(k, &p)?));
    }
    Ok(pairs)
}

fn check_bounds(pairs: &[(FreeConvexSet, FreeConvexSet)], b: &ScaleBounds, budget: &Budget) -> Result<Check> {
    if b.lower > b.upper + 1e-6 {
        return Ok(Check::fail(format!("{}: lower {} above upper {}", b.target, b.lower, b.upper)));
    }
    let mut out = Check::pass(b.target.clone());
    for (w, claim, is_lower) in [(&b.lower_witness, b.lower, true), (&b.upper_witness, b.upper, false)] {
        let Some(w) = w else { continue };
        let mut ok = None;
        for (s1, s2) in pairs {
            let r = verify_scale_witness(s1, s2, w, claim, is_lower, budget)?;
            if r.ok {
                ok = Some(r);
                break;
            }
            ok.get_or_insert(r);
        }
        let r = ok.expect("at least one pair");
        out = out.and(Check { ok: r.ok, detail: format!("{} {}: {}", b.target, if is_lower { "lower" } else { "upper" }, r.detail) });
    }
    Ok(out)
}

/// Re-checks the witnesses of one level-`k` constant bound.
pub fn verify_constant_bounds(c: &FreeConvexSet, k: usize, b: &ScaleBounds, budget: &Budget) -> Result<Check> {
    check_bounds(&constant_pairs(c, k)?, b, budget)
}

/// Re-checks every witness of a [`Constants`] triple against the inclusion
/// it claims to bound.
pub fn verify_constants(c: &FreeConvexSet, t: &Constants, budget: &Budget) -> Result<Check> {
    let pairs = constant_pairs(c, t.k)?;
    let mut out = Check::pass(format!("k = {}", t.k));
    let sandwich = t.alpha.lower + 1e-6 >= t.beta.lower.max(t.gamma.merged.lower)
        && t.alpha.upper <= t.beta.upper * t.gamma.merged.upper * (1.0 + 1e-6);
    out = out.and(if sandwich { Check::pass("sandwich holds") } else { Check::fail("sandwich violated") });
    for b in [&t.beta, &t.gamma.merged, &t.alpha] {
        out = out.and(check_bounds(&pairs, b, budget)?);
    }
    Ok(out)
}

impl Constants {
    pub fn to_json(&self) -> Value {
        json!({
            "k": self.k,
            "alpha": self.alpha.to_json(),
            "beta": self.beta.to_json(),
            "gamma": {
                "direct": self.gamma.direct.to_json(),
                "dual": self.gamma.dual.as_ref().map(ScaleBounds::to_json),
                "merged": self.gamma.merged.to_json(),
                "agree": self.gamma.agree,
            },
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let field = |o: &Value, k: &str| o.get(k).cloned().ok_or_else(|| Error::Parse(format!("constants: missing `{k}`")));
        let g = field(v, "gamma")?;
        let dual = match g.get("dual") {
            None | Some(Value::Null) => None,
            Some(d) => Some(bounds_from_json(d)?),
        };
        Ok(Self {
            k: field(v, "k")?.as_u64().ok_or_else(|| Error::Parse("constants: `k` must be an integer".into()))? as usize,
            alpha: bounds_from_json(&field(v, "alpha")?)?,
            beta: bounds_from_json(&field(v, "beta")?)?,
            gamma: GammaPipelines {
                direct: bounds_from_json(&field(&g, "direct")?)?,
                dual,
                merged: bounds_from_json(&field(&g, "merged")?)?,
                agree: field(&g, "agree")?.as_bool().unwrap_or(false),
            },
        })
    }
}

/// Bounds on one constant for `k = 1..=k_max`, with the monotone regularization.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantProfile {
    pub name: ConstantName,
    /// Raw per-k bounds, index 0 is `k = 1`.
    pub rows: Vec<ScaleBounds>,
    /// `max_{j >= k}` of raw lower bounds (valid since the constant is non-increasing).
    pub lower: Vec<f64>,
    /// `min_{j <= k}` of raw upper bounds.
    pub upper: Vec<f64>,
}

impl ConstantProfile {
    pub fn from_rows(name: ConstantName, rows: Vec<ScaleBounds>) -> Self {
        let n = rows.len();
        let mut lower = vec![1.0; n];
        let mut upper = vec![f64::INFINITY; n];
        let mut acc = f64::NEG_INFINITY;
        for i in (0..n).rev() {
            acc = acc.max(rows[i].lower);
            lower[i] = acc;
        }
        let mut acc = f64::INFINITY;
        for i in 0..n {
            acc = acc.min(rows[i].upper);
            upper[i] = acc;
        }
        Self { name, rows, lower, upper }
    }

    /// Regularized profile is non-increasing and each lower sits below its upper.
    pub fn consistent(&self) -> bool {
        let mono = self.lower.windows(2).all(|w| w[1] <= w[0] + 1e-12) && self.upper.windows(2).all(|w| w[1] <= w[0] + 1e-12);
        mono && self.lower.iter().zip(&self.upper).all(|(l, u)| *l <= u + 1e-6)
    }

    /// `(lower, upper)` at the largest computed `k`; the upper bound also bounds
    /// the limit, the lower one is only an estimate of it.
    pub fn limit_estimate(&self) -> (f64, f64) {
        (*self.lower.last().unwrap_or(&1.0), *self.upper.last().unwrap_or(&f64::INFINITY))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,lower,upper,raw_lower,raw_upper\n");
        for (i, r) in self.rows.iter().enumerate() {
            s.push_str(&format!("{},{},{},{},{}\n", i + 1, self.lower[i], self.upper[i], r.lower, r.upper));
        }
        s
    }

    pub fn to_json(&self) -> Value {
        let (l, u) = self.limit_estimate();
        let inf = |x: f64| if x.is_finite() { json!(x) } else { json!("inf") };
        json!({
            "name": self.name.as_str(),
            "rows": self.rows.iter().enumerate().map(|(i, r)| json!({
                "k": i + 1,
                "lower": self.lower[i],
                "upper": inf(self.upper[i]),
                "raw": r.to_json(),
            })).collect::<Vec<_>>(),
            "limit_estimate": {"lower": l, "upper": inf(u)},
        })
    }
}

/// Profiles of all three constants for `k = 1..=k_max`.
pub fn profiles(c: &FreeConvexSet, k_max: usize, budget: &Budget) -> Result<[ConstantProfile; 3]> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be >= 1".into()));
    }
    let per_k = (1..=k_max).map(|k| constants(c, k, budget)).collect::<Result<Vec<_>>>()?;
    let pick = |f: &dyn Fn(&Constants) -> ScaleBounds| per_k.iter().map(f).collect::<Vec<_>>();
    Ok([
        ConstantProfile::from_rows(ConstantName::Alpha, pick(&|t| t.alpha.clone())),
        ConstantProfile::from_rows(ConstantName::Beta, pick(&|t| t.beta.clone())),
        ConstantProfile::from_rows(ConstantName::Gamma, pick(&|t| t.gamma.merged.clone())),
    ])
}

/// Profile of one constant.
pub fn limit_profile(c: &FreeConvexSet, name: ConstantName, k_max: usize, budget: &Budget) -> Result<ConstantProfile> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be >= 1".into()));
    }
    let rows = (1..=k_max)
        .map(|k| match name {
            ConstantName::Beta => beta(c, k, budget),
            ConstantName::Gamma => gamma(c, k, budget),
            ConstantName::Alpha => alpha(c, k, budget),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConstantProfile::from_rows(name, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions() {
        assert!((scaling_from_dist(1e-12, 1.0, 3).unwrap() - 1.0).abs() < 1e-11);
        assert_eq!(scaling_from_dist(0.1, 0.5, 2).unwrap(), 1.4);
        assert!(scaling_from_dist(0.0, 1.0, 1).is_err());
        assert!(scaling_from_dist(0.1, 1.0, 0).is_err());
    }

    #[test]
    fn regularized_profile() {
        let mk = |l: f64, u: f64| {
            let mut b = ScaleBounds::new("beta_k");
            b.lower = l;
            b.upper = u;
            b
        };
        let p = ConstantProfile::from_rows(ConstantName::Beta, vec![mk(1.5, 3.0), mk(1.7, 2.0), mk(1.2, 2.5)]);
        assert_eq!(p.lower, vec![1.7, 1.7, 1.2]);
        assert_eq!(p.upper, vec![3.0, 2.0, 2.0]);
        assert!(p.consistent());
        assert_eq!(p.to_csv().lines().count(), 4);
    }

    #[test]
    fn contraction_set_is_minimal() {
        let b = beta(&FreeConvexSet::contraction_set(), 1, &Budget::quick()).unwrap();
        assert_eq!((b.lower, b.upper), (1.0, 1.0));
    }
}
