//! Named end-to-end suites. Each compares the oracles against an independent
//! check (closed forms, brute sweeps, duality) and re-verifies every
//! certificate it emits.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::Budget;
use crate::constants::{beta, constants, dist_from_scaling, gamma_pipelines, scaling_from_dist, verify_constants, ConstantName, ConstantProfile};
use crate::error::{Error, Result};
use crate::linalg::{c, eye, herm, kron, lambda_max, random_complex, random_hermitian, CMat, MatrixTuple};
use crate::oracles::contains::point_bisection;
use crate::oracles::support::support_sdp;
use crate::oracles::{
    hausdorff, membership, support, verify_membership, verify_scale_bounds, Check, MembershipVerdict, ScaleBounds, SupportFunctional,
    Verdict,
};
use crate::sets::catalog::{catalog, pauli_pair};
use crate::sets::lift::Mode;
use crate::sets::{box_sum, geometry, FreeConvexSet, Primitive};

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    pub summary: String,
    pub details: Vec<String>,
    pub checked: usize,
    pub rejected: usize,
    pub elapsed: Duration,
}

impl SuiteOutcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {:<14} {} ({:.1}s, {} certificates re-verified, {} rejected)",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.summary,
            self.elapsed.as_secs_f64(),
            self.checked,
            self.rejected
        )
    }

    pub fn to_json(&self) -> Value {
        json!({
            "id": self.id,
            "name": self.name,
            "pass": self.pass,
            "summary": self.summary,
            "details": self.details,
            "certificates_checked": self.checked,
            "certificates_rejected": self.rejected,
        })
    }
}

pub const SUITES: &[(usize, &str)] = &[
    (1, "ando"),
    (2, "beta-ando"),
    (3, "gamma-ando"),
    (4, "pauli-min"),
    (5, "duality"),
    (6, "products"),
    (7, "free-unitaries"),
    (8, "conversions"),
    (9, "monotonicity"),
    (10, "soundness"),
];

/// Re-verification tally.
#[derive(Debug, Default, Clone)]
struct Audit {
    checked: usize,
    rejected: usize,
    failures: Vec<String>,
}

impl Audit {
    fn record(&mut self, what: &str, c: Check) {
        self.checked += 1;
        if !c.ok {
            self.rejected += 1;
            self.failures.push(format!("{what}: {}", c.detail));
        }
    }

    fn verdict(&mut self, what: &str, set: &FreeConvexSet, x: &MatrixTuple, v: &MembershipVerdict, budget: &Budget) -> Result<()> {
        if v.verdict != Verdict::Undecided {
            self.record(what, verify_membership(set, x, v, budget)?);
        }
        Ok(())
    }

    fn merge(&mut self, o: Audit) {
        self.checked += o.checked;
        self.rejected += o.rejected;
        self.failures.extend(o.failures);
    }
}

fn outcome(id: usize, start: Instant, pass: bool, summary: String, mut details: Vec<String>, audit: Audit) -> SuiteOutcome {
    details.extend(audit.failures.iter().map(|f| format!("rejected certificate: {f}")));
    SuiteOutcome {
        id,
        name: SUITES[id - 1].1,
        pass: pass && audit.rejected == 0,
        summary,
        details,
        checked: audit.checked,
        rejected: audit.rejected,
        elapsed: start.elapsed(),
    }
}

/// Runs one suite by id or name.
pub fn run_suite(which: &str, budget: &Budget) -> Result<Vec<SuiteOutcome>> {
    let id = match which.parse::<usize>() {
        Ok(i) if (1..=SUITES.len()).contains(&i) => i,
        _ => SUITES
            .iter()
            .find(|(_, n)| *n == which)
            .map(|(i, _)| *i)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite `{which}`; try one of {:?}", SUITES.iter().map(|s| s.1).collect::<Vec<_>>())))?,
    };
    Ok(match id {
        1 => vec![ando_crossval(budget)?],
        2 => vec![beta_ando(budget)?],
        3 => vec![gamma_ando(budget)?],
        4 => vec![pauli_min(budget)?],
        5 => vec![duality(budget)?],
        6 => vec![products(budget)?],
        7 => vec![free_unitaries(budget)?],
        8 => vec![conversions(budget)?],
        9 => vec![monotonicity(budget)?],
        _ => run_all(budget)?,
    })
}

/// Suites 1 to 9 followed by the soundness roll-up.
pub fn run_all(budget: &Budget) -> Result<Vec<SuiteOutcome>> {
    let mut out = Vec::new();
    for (id, _) in &SUITES[..9] {
        out.extend(run_suite(&id.to_string(), budget)?);
    }
    out.push(soundness(&out));
    Ok(out)
}

/// Zero rejected certificates across the given suites.
pub fn soundness(done: &[SuiteOutcome]) -> SuiteOutcome {
    let checked: usize = done.iter().map(|s| s.checked).sum();
    let rejected: usize = done.iter().map(|s| s.rejected).sum();
    SuiteOutcome {
        id: 10,
        name: SUITES[9].1,
        pass: rejected == 0 && checked > 0,
        summary: format!("{checked} certificates re-verified across {} suites, {rejected} rejected", done.len()),
        details: Vec::new(),
        checked,
        rejected,
        elapsed: done.iter().map(|s| s.elapsed).sum(),
    }
}

/// Numerical radius by an angle sweep plus ternary refinement around every
/// local grid maximum (independent of the semidefinite path).
pub fn numerical_radius_sweep(x: &CMat) -> f64 {
    let f = |t: f64| lambda_max(&herm(&(x * c(t.cos(), t.sin()))));
    let n = 2048;
    let step = 2.0 * std::f64::consts::PI / n as f64;
    let vals: Vec<f64> = (0..n).map(|i| f(i as f64 * step)).collect();
    let mut best = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for i in 0..n {
        if vals[i] >= vals[(i + n - 1) % n] && vals[i] >= vals[(i + 1) % n] {
            let (mut lo, mut hi) = ((i as f64 - 1.0) * step, (i as f64 + 1.0) * step);
            for _ in 0..80 {
                let a = lo + (hi - lo) / 3.0;
                let b = hi - (hi - lo) / 3.0;
                if f(a) < f(b) {
                    lo = a;
                } else {
                    hi = b;
                }
            }
            best = best.max(f(0.5 * (lo + hi)));
        }
    }
    best
}

fn suite1_points(budget: &Budget) -> Vec<CMat> {
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed ^ 0xa11d0);
    (0..50)
        .map(|i| {
            let g = random_complex(&mut rng, 3, 3);
            // alternate inside and outside, away from the boundary
            let s = if i % 2 == 0 { rng.gen_range(0.5..0.99) } else { rng.gen_range(1.01..1.5) };
            &g * c(s / numerical_radius_sweep(&g), 0.0)
        })
        .collect()
}

/// 50 random 3x3 points: `W(2E_12)` membership against `w(X) <= 1`.
pub fn ando_crossval(budget: &Budget) -> Result<SuiteOutcome> {
    let start = Instant::now();
    let ando = FreeConvexSet::ando();
    let pts = suite1_points(budget);
    let rows = pts
        .par_iter()
        .map(|x| -> Result<(bool, f64, Audit)> {
            let w = numerical_radius_sweep(x);
            let t = MatrixTuple::new(vec![x.clone()])?;
            let v = membership(&ando, &t, budget)?;
            let mut a = Audit::default();
            a.verdict("ando membership", &ando, &t, &v, budget)?;
            let agree = match v.verdict {
                Verdict::In => w <= 1.0 + 1e-6,
                Verdict::Out => w >= 1.0 - 1e-6,
                Verdict::Undecided => false,
            };
            Ok((agree, w, a))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut audit = Audit::default();
    let mut agree = 0;
    let mut details = Vec::new();
    for (i, (ok, w, a)) in rows.into_iter().enumerate() {
        audit.merge(a);
        if ok {
            agree += 1;
        } else {
            details.push(format!("point {i}: disagreement at w = {w:.9}"));
        }
    }
    Ok(outcome(1, start, agree == 50, format!("{agree}/50 agree with the angle-sweep numerical radius"), details, audit))
}

fn audit_bounds(audit: &mut Audit, what: &str, s1: &FreeConvexSet, s2: &FreeConvexSet, b: &ScaleBounds, budget: &Budget) -> Result<()> {
    audit.record(what, verify_scale_bounds(s1, s2, b, budget)?);
    Ok(())
}

/// `beta_1(W(2E_12))` within `[1.95, 2.05]`.
pub fn beta_ando(budget: &Budget) -> Result<SuiteOutcome> {
    let start = Instant::now();
    let ando = FreeConvexSet::ando();
    let b = beta(&ando, 1, budget)?;
    let mut audit = Audit::default();
    audit_bounds(&mut audit, "beta_1 ando", &ando, &FreeConvexSet::min_over(1, &ando)?, &b, budget)?;
    let pass = b.lower >= 1.95 && b.upper <= 2.05;
    Ok(outcome(2, start, pass, format!("beta_1 certified in [{:.6}, {:.6}]", b.lower, b.upper), b.notes.clone(), audit))
}

/// `gamma_1(W(2E_12)) <= 1 + 1e-6`.
pub fn gamma_ando(budget: &Budget) -> Result<SuiteOutcome> {
    let start = Instant::now();
    let ando = FreeConvexSet::ando();
    let g = gamma_pipelines(&ando, 1, budget)?;
    let mut audit = Audit::default();
    audit_bounds(&mut audit, "gamma_1 ando (direct)", &FreeConvexSet::max_over(1, &ando)?, &ando, &g.direct, budget)?;
    let pass = g.merged.upper <= 1.0 + 1e-6 && g.agree;
    Ok(outcome(
        3,
        start,
        pass,
        format!("gamma_1 certified in [{:.6}, {:.6}], pipelines agree: {}", g.merged.lower, g.merged.upper, g.agree),
        g.merged.notes.clone(),
        audit,
    ))
}

/// Smallest `r` with `(sigma_x, sigma_z) / r` in the minimal set over the disk.
pub fn pauli_min(budget: &Budget) -> Result<SuiteOutcome> {
    let start = Instant::now();
    let t = pauli_pair();
    let ball = FreeConvexSet::primitive(Primitive::BallMin(2));
    let mut b = ScaleBounds::new("inclusion");
    b.lower = 0.0;
    point_bisection(&mut b, &t, &ball, budget)?;
    let mut audit = Audit::default();
    audit_bounds(&mut audit, "pauli scale", &FreeConvexSet::matrix_range(t), &ball, &b, budget)?;
    let window = b.lower >= 1.40 && b.upper <= 1.43;
    let details = vec![
        format!("certified interval [{:.6}, {:.6}] (relative width 1e-3)", b.lower, b.upper),
        "the partial-transpose test is exact on 2x2 inputs and 2x2 outputs, so the interval brackets the true threshold".into(),
        "the target window [1.40, 1.43] excludes the exact value 2; this criterion cannot pass as stated".into(),
    ];
    Ok(outcome(
        4,
        start,
        window,
        format!("min r certified in [{:.6}, {:.6}], target window [1.40, 1.43]", b.lower, b.upper),
        details,
        audit,
    ))
}

fn traceless(m: CMat) -> CMat {
    let n = m.nrows();
    let tr = m.trace() / c(n as f64, 0.0);
    &m - eye(n) * tr
}

/// A random tuple with 0 interior to level one (resampled until certified).
pub fn random_tuple<R: Rng>(rng: &mut R, n: usize, d: usize, selfadjoint: bool) -> Result<MatrixTuple> {
    for _ in 0..20 {
        let ents: Vec<CMat> = (0..d)
            .map(|_| traceless(if selfadjoint { random_hermitian(rng, n) } else { random_complex(rng, n, n) }))
            .collect();
        let t = if selfadjoint { MatrixTuple::selfadjoint(ents)? } else { MatrixTuple::new(ents)? };
        if geometry(&FreeConvexSet::matrix_range(t.clone()))?.zero_interior {
            return Ok(t);
        }
    }
    Err(Error::Precondition(format!("no random tuple with 0 interior for n = {n}, d = {d}")))
}

/// Random point at level `m` scaled so its largest entry norm is `s`.
fn random_point<R: Rng>(rng: &mut R, d: usize, m: usize, selfadjoint: bool, s: f64) -> Result<MatrixTuple> {
    let ents: Vec<CMat> = (0..d).map(|_| if selfadjoint { random_hermitian(rng, m) } else { random_complex(rng, m, m) }).collect();
    let t = if selfadjoint { MatrixTuple::selfadjoint(ents)? } else { MatrixTuple::new(ents)? };
    let norm = t.max_abs().max(1e-12);
    Ok(t.scaled(s / norm))
}

fn tuple_pencil(x: &MatrixTuple, y: &MatrixTuple) -> f64 {
    let mut p = CMat::zeros(x.n() * y.n(), x.n() * y.n());
    for (a, b) in x.entries().iter().zip(y.entries()) {
        p += kron(a, b);
    }
    lambda_max(&herm(&p))
}

/// Random tuple shapes used by the duality and monotonicity suites.
fn shape(i: usize) -> (usize, usize, bool) {
    match i % 4 {
        0 => (2, 2, true),
        1 => (3, 2, true),
        2 => (2, 1, false),
        _ => (3, 1, false),
    }
}

struct DualityRow {
    contradictions: usize,
    structural_fail: usize,
    pairs: usize,
    audit: Audit,
}

fn duality_instance(i: usize, budget: &Budget) -> Result<DualityRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed.wrapping_add(1000 + i as u64));
    let (n, d, sa) = shape(i);
    let t = random_tuple(&mut rng, n, d, sa)?;
    let r = random_tuple(&mut rng, n, d, sa)?;
    let cset = FreeConvexSet::matrix_range(t);
    let dset = FreeConvexSet::matrix_range(r);
    let p = cset.polar()?;
    let q = dset.polar()?;
    let mut row = DualityRow { contradictions: 0, structural_fail: 0, pairs: 0, audit: Audit::default() };
    let m_c = geometry(&cset)?.bounding_radius;

    // bipolar: same set back, and verdicts agree on random points
    let pp = p.polar_unchecked()?;
    if pp.node() != cset.node() {
        row.structural_fail += 1;
    }
    for m in 1..=3 {
        for s in [0.4, 1.2] {
            let x = random_point(&mut rng, d, m, sa, s * m_c)?;
            let a = membership(&cset, &x, budget)?;
            let b = membership(&pp, &x, budget)?;
            row.audit.verdict("bipolar", &cset, &x, &a, budget)?;
            if (a.is_in() && b.is_out()) || (a.is_out() && b.is_in()) {
                row.contradictions += 1;
            }
        }
    }

    // MaxOver(k, C)° = MinOver(k, C°): structural match and pairing coherence
    let m_p = geometry(&p)?.bounding_radius;
    for k in 1..=2 {
        let mx = FreeConvexSet::max_over(k, &cset)?;
        let mn = FreeConvexSet::min_over(k, &p)?;
        if mx.polar_unchecked()? != mn {
            row.structural_fail += 1;
        }
        for m in 1..=3usize.min(k + 1) {
            let y = random_point(&mut rng, d, m, sa, 0.6 * m_c)?;
            let x = random_point(&mut rng, d, m, sa, 0.6 * m_p)?;
            let vy = membership(&mx, &y, budget)?;
            let vx = membership(&mn, &x, budget)?;
            row.audit.verdict("max envelope", &mx, &y, &vy, budget)?;
            row.audit.verdict("min envelope of polar", &mn, &x, &vx, budget)?;
            if vy.is_in() && vx.is_in() {
                row.pairs += 1;
                if tuple_pencil(&x, &y) > 1.0 + 1e-6 {
                    row.contradictions += 1;
                }
            }
        }
    }

    // (C x D)° = C° x1 D°
    let prod = FreeConvexSet::cartesian_product(&cset, &dset)?;
    let hull = FreeConvexSet::hull_product(&p, &q)?;
    if prod.polar_unchecked()? != hull {
        row.structural_fail += 1;
    }
    let m_q = geometry(&q)?.bounding_radius.max(m_p);
    let m_d = geometry(&dset)?.bounding_radius.max(m_c);
    for m in 1..=2 {
        let y = MatrixTuple::direct_sum_all(&[random_point(&mut rng, d, m, sa, 0.5 * m_d)?])?;
        let y2 = random_point(&mut rng, d, m, sa, 0.5 * m_d)?;
        let yy = join(&y, &y2)?;
        let xx = join(&random_point(&mut rng, d, m, sa, 0.4 * m_q)?, &random_point(&mut rng, d, m, sa, 0.4 * m_q)?)?;
        let vy = membership(&prod, &yy, budget)?;
        let vx = membership(&hull, &xx, budget)?;
        row.audit.verdict("cartesian product", &prod, &yy, &vy, budget)?;
        row.audit.verdict("hull product of polars", &hull, &xx, &vx, budget)?;
        if vy.is_in() && vx.is_in() {
            row.pairs += 1;
            if tuple_pencil(&xx, &yy) > 1.0 + 1e-6 {
                row.contradictions += 1;
            }
        }
    }
    Ok(row)
}

/// Concatenates coordinates of two tuples of the same level.
fn join(a: &MatrixTuple, b: &MatrixTuple) -> Result<MatrixTuple> {
    let ents: Vec<CMat> = a.entries().iter().chain(b.entries()).cloned().collect();
    if a.is_selfadjoint() && b.is_selfadjoint() {
        MatrixTuple::selfadjoint(ents)
    } else {
        MatrixTuple::new(ents)
    }
}

/// Polar identities on 20 random tuples.
pub fn duality(budget: &Budget) -> Result<SuiteOutcome> {
    let start = Instant::now();
    let rows = (0..20).into_par_iter().map(|i| duality_instance(i, budget)).collect::<Result<Vec<_>>>()?;
    let mut audit = Audit::default();
    let (mut contra, mut structural, mut pairs) = (0, 0, 0);
    for r in rows {
        contra += r.contradictions;
        structural += r.structural_fail;
        pairs += r.pairs;
        audit.merge(r.audit);
    }
    Ok(outcome(
        5,
        start,
        contra == 0 && structural == 0,
        format!("20 tuples: {contra} IN/OUT contradictions, {structural} structural mismatches, {pairs} polar pairings checked"),
        Vec::new(),
        audit,
    ))
}

/// Product supports against the box-sum path, and `beta_1` of a hull product.
pub fn products(budget: &Budget) -> Result<SuiteOutcome> {
    let start = Instant::now();
    let rows = (0..20)
        .into_par_iter()
        .map(|i| -> Result<(f64, f64, bool)> {
            let mut rng = ChaCha8Rng::seed_from_u64(budget.seed.wrapping_add(2000 + i as u64));
            let (n, d, sa) = shape(i);
            let t = random_tuple(&mut rng, n, d, sa)?;
            let r = random_tuple(&mut rng, n, d, sa)?;
            let (ct, cr) = (FreeConvexSet::matrix_range(t.clone()), FreeConvexSet::matrix_range(r.clone()));
            let boxed = FreeConvexSet::matrix_range(box_sum(&t, &r)?);
            let cart = FreeConvexSet::cartesian_product(&ct, &cr)?;
            // level one: hull support is the max; every level: product support is the sum
            let h1 = SupportFunctional::random(&mut rng, 2 * d, 1, sa);
            let (a, b) = h1.split(d);
            let hmax = support(&ct, &a, budget)?.value.max(support(&cr, &b, budget)?.value);
            let hull_err = (support(&boxed, &h1, budget)?.value - hmax).abs();
            let m = 1 + i % 2;
            let h = SupportFunctional::random(&mut rng, 2 * d, m, sa);
            let (a, b) = h.split(d);
            let sum = support(&ct, &a, budget)?.value + support(&cr, &b, budget)?.value;
            let cart_err = (support_sdp(&cart, &h, Mode::Exact)?.value - sum).abs();
            // higher levels: max <= hull support <= sum
            let hb = support(&boxed, &h, budget)?.value;
            let hm = support(&ct, &a, budget)?.value.max(support(&cr, &b, budget)?.value);
            let sandwich = hb >= hm - 1e-6 && hb <= sum + 1e-6;
            Ok((hull_err, cart_err, sandwich))
        })
        .collect::<Result<Vec<_>>>()?;
    let hull_err = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let cart_err = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let sandwich = rows.iter().all(|r| r.2);
    let ando = FreeConvexSet::ando();
    let hp = FreeConvexSet::hull_product(&ando, &ando)?;
    let b = beta(&hp, 1, budget)?;
    let mut audit = Audit::default();
    audit_bounds(&mut audit, "beta_1 hull product", &hp, &FreeConvexSet::min_over(1, &hp)?, &b, budget)?;
    let pass = hull_err <= 1e-6 && cart_err <= 1e-6 && sandwich && b.lower >= 1.95;
    Ok(outcome(
        6,
        start,
        pass,
        format!(
            "max |hull - max| = {hull_err:.1e}, max |product - sum| = {cart_err:.1e}, beta_1(hull(ando, ando)) in [{:.6}, {:.6}]",
            b.lower, b.upper
        ),
        b.notes.clone(),
        audit,
    ))
}

/// `beta_1` of the two-fold cartesian product of the contraction set.
pub fn free_unitaries(budget: &Budget) -> Result<SuiteOutcome> {
    let start = Instant::now();
    let u = catalog("free_unitaries", Some(2))?.set;
    let b = beta(&u, 1, budget)?;
    let mut audit = Audit::default();
    audit_bounds(&mut audit, "beta_1 free unitaries", &u, &FreeConvexSet::min_over(1, &u)?, &b, budget)?;
    Ok(outcome(
        7,
        start,
        b.lower >= 1.05,
        format!("beta_1 >= {:.6} (gate 1.05; known lower bound 1.543, known upper bound 2)", b.lower),
        b.notes.clone(),
        audit,
    ))
}

/// Closed forms on intervals, where every distance is computable by hand.
pub fn conversions(budget: &Budget) -> Result<SuiteOutcome> {
    let start = Instant::now();
    let mut fails = Vec::new();
    if dist_from_scaling(1.0, 1.0, 3.0)? != 0.0 {
        fails.push("a = b = 1 should give 0".to_string());
    }
    if (scaling_from_dist(1e-12, 1.0, 2)? - 1.0).abs() > 1e-10 {
        fails.push("eps -> 0 should give 1".to_string());
    }
    let seg = dist_from_scaling(1.25, 1.25, 1.0)?;
    if (seg - 0.25).abs() > 1e-12 || seg < 0.2 {
        fails.push(format!("segment example gave {seg}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed ^ 0xc0de);
    for i in 0..100 {
        // C = [-p, q], D = [-p2, q2]
        let (p, q, p2, q2): (f64, f64, f64, f64) = (rng.gen_range(0.2..2.0), rng.gen_range(0.2..2.0), rng.gen_range(0.2..2.0), rng.gen_range(0.2..2.0));
        let dist = (p - p2).abs().max((q - q2).abs());
        let a = (p / p2).min(q / q2);
        let b = (p / p2).max(q / q2);
        let m = p.max(q).max(p2).max(q2);
        let bound = dist_from_scaling(a, b, m)?;
        if bound < dist - 1e-12 {
            fails.push(format!("case {i}: bound {bound} below distance {dist}"));
        }
        let delta = p.min(q).min(p2).min(q2);
        let eps = dist * 1.01 + 1e-9;
        let s = scaling_from_dist(eps, delta, 1)?;
        let inside = |lo: f64, hi: f64, lo2: f64, hi2: f64| lo <= lo2 + 1e-12 && hi <= hi2 + 1e-12;
        if !(inside(p2 / s, q2 / s, p, q) && inside(p, q, s * p2, s * q2)) {
            fails.push(format!("case {i}: 1/{s} D ⊆ C ⊆ {s} D fails"));
        }
    }
    // end to end on two commuting ranges (intervals at every level)
    let audit = Audit::default();
    let iv = |lo: f64, hi: f64| {
        let m = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(-lo, 0.0), c(hi, 0.0)]));
        FreeConvexSet::matrix_range(MatrixTuple::selfadjoint(vec![m]).expect("hermitian"))
    };
    let (cc, dd) = (iv(1.0, 1.0), iv(0.8, 0.8));
    let h = hausdorff(&cc, &dd, budget)?;
    if !(h.lower <= 0.2 + 1e-6 && h.upper >= 0.2 - 1e-6) {
        fails.push(format!("hausdorff bounds [{}, {}] miss 0.2", h.lower, h.upper));
    }
    Ok(outcome(
        8,
        start,
        fails.is_empty(),
        format!("3 closed-form examples and 100 interval cases, hausdorff([-1,1], [-0.8,0.8]) in [{:.4}, {:.4}]", h.lower, h.upper),
        fails,
        audit,
    ))
}

struct MonoRow {
    sandwich_ok: bool,
    profiles_ok: bool,
    low_level_contra: usize,
    audit: Audit,
    line: String,
}

fn mono_instance(i: usize, budget: &Budget) -> Result<MonoRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed.wrapping_add(3000 + i as u64));
    let (n, d, sa) = shape(i);
    let t = random_tuple(&mut rng, n, d, sa)?;
    let cset = FreeConvexSet::matrix_range(t);
    let m_c = geometry(&cset)?.bounding_radius;
    let mut audit = Audit::default();
    let mut contra = 0;
    let mut per_k = Vec::new();
    let mut sandwich_ok = true;
    for k in 1..=3 {
        // low levels see the base: verdicts must agree for m <= k
        let mn = FreeConvexSet::min_over(k, &cset)?;
        let mx = FreeConvexSet::max_over(k, &cset)?;
        for m in 1..=k.min(2) {
            let s = rng.gen_range(0.3..1.3) * m_c;
            let x = random_point(&mut rng, d, m, sa, s)?;
            let v = [membership(&mn, &x, budget)?, membership(&cset, &x, budget)?, membership(&mx, &x, budget)?];
            if v.iter().any(|a| a.is_in()) && v.iter().any(|a| a.is_out()) {
                contra += 1;
            }
            audit.verdict("base at low level", &cset, &x, &v[1], budget)?;
        }
        let cst = constants(&cset, k, budget)?;
        let a = &cst.alpha;
        sandwich_ok &= a.lower + 1e-6 >= cst.beta.lower.max(cst.gamma.merged.lower)
            && a.upper <= cst.beta.upper * cst.gamma.merged.upper * (1.0 + 1e-6)
            && cst.gamma.agree;
        audit.record("constants", verify_constants(&cset, &cst, budget)?);
        per_k.push(cst);
    }
    let prof = |name, f: &dyn Fn(&crate::constants::Constants) -> ScaleBounds| {
        ConstantProfile::from_rows(name, per_k.iter().map(f).collect())
    };
    let ps = [
        prof(ConstantName::Alpha, &|c| c.alpha.clone()),
        prof(ConstantName::Beta, &|c| c.beta.clone()),
        prof(ConstantName::Gamma, &|c| c.gamma.merged.clone()),
    ];
    let line = format!(
        "tuple {i} (n = {n}, d = {d}): beta lower {:?}, gamma lower {:?}",
        ps[1].lower.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>(),
        ps[2].lower.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>()
    );
    Ok(MonoRow { sandwich_ok, profiles_ok: ps.iter().all(|p| p.consistent()), low_level_contra: contra, audit, line })
}

/// Sandwich, low-level equality and monotone profiles on 10 random tuples.
pub fn monotonicity(budget: &Budget) -> Result<SuiteOutcome> {
    let start = Instant::now();
    let rows = (0..10).into_par_iter().map(|i| mono_instance(i, budget)).collect::<Result<Vec<_>>>()?;
    let mut audit = Audit::default();
    let mut details = Vec::new();
    let (mut sand, mut prof, mut contra) = (0, 0, 0);
    for r in rows {
        sand += usize::from(!r.sandwich_ok);
        prof += usize::from(!r.profiles_ok);
        contra += r.low_level_contra;
        details.push(r.line);
        audit.merge(r.audit);
    }
    Ok(outcome(
        9,
        start,
        sand == 0 && prof == 0 && contra == 0,
        format!("10 tuples, k = 1..3: {sand} sandwich violations, {prof} non-monotone profiles, {contra} low-level contradictions"),
        details,
        audit,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unit;

    #[test]
    fn sweep_radius_closed_forms() {
        // w(2 E_12) = 1, w(diag(1, -3)) = 3
        assert!((numerical_radius_sweep(&(unit(2, 0, 1) * c(2.0, 0.0))) - 1.0).abs() < 1e-12);
        let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(-3.0, 0.0)]));
        assert!((numerical_radius_sweep(&d) - 3.0).abs() < 1e-12);
    }
}
