//! Inner certificates for minimal envelopes.
//!
//! Points of `W^min_k(C)_m` are `sum_i V_i^* X_i V_i` with `X_i` in `C_k`.
//! Supports are bounded below by a seesaw over the stacked isometry and the
//! members; membership is certified by column generation over a pool of
//! members whose direct sum `A` has `X` in `W(A)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{Budget, Tolerances};
use crate::error::Result;
use crate::linalg::{c, eye, frobenius, herm, op_norm, random_isometry, ChoiMatrix, CMat, MatrixTuple};
use crate::oracles::membership::gauge;
use crate::oracles::{membership, support, SupportFunctional};
use crate::sdp::Status;
use crate::sets::lift::ConeCert;
use crate::sets::FreeConvexSet;

use super::{as_tuple, scalar_point, shrink_toward, MinDecomposition};

/// One seesaw run.
#[derive(Debug, Clone)]
struct Seesaw {
    value: f64,
    point: Vec<CMat>,
    members: Vec<Vec<CMat>>,
}

fn rows(v: &CMat, i: usize, k: usize) -> CMat {
    v.rows(i * k, k).into_owned()
}

/// Closest isometry (polar factor).
fn polar(g: &CMat) -> CMat {
    let svd = g.clone().svd(true, true);
    svd.u.expect("u") * svd.v_t.expect("v_t")
}

fn seesaw(base: &FreeConvexSet, k: usize, h: &SupportFunctional, budget: &Budget, v0: CMat) -> Result<Option<Seesaw>> {
    let m = h.level();
    let blocks = v0.nrows() / k;
    let cen = base.center();
    let mut v = v0;
    let mut best: Option<Seesaw> = None;
    for _ in 0..budget.seesaw_iters.max(1) * 2 {
        let mut members = Vec::with_capacity(blocks);
        for i in 0..blocks {
            let vi = rows(&v, i, k);
            let f: Vec<CMat> = h.entries.iter().map(|hj| &vi * hj * vi.adjoint()).collect();
            if f.iter().map(frobenius).fold(0.0, f64::max) < 1e-14 {
                members.push(scalar_point(&cen, k));
                continue;
            }
            let sv = support(base, &SupportFunctional { entries: f }, budget)?;
            match sv.achiever {
                Some(a) => members.push(a),
                None => return Ok(best),
            }
        }
        let mut point = vec![CMat::zeros(m, m); h.d()];
        for (i, x) in members.iter().enumerate() {
            let vi = rows(&v, i, k);
            for (p, xj) in point.iter_mut().zip(x) {
                *p += vi.adjoint() * xj * &vi;
            }
        }
        let value = h.pair(&point);
        let improved = best.as_ref().map_or(true, |b| value > b.value + 1e-10);
        if improved {
            best = Some(Seesaw { value, point, members: members.clone() });
        } else {
            break;
        }
        // ascent step on V for the convexified objective
        let mut g = CMat::zeros(v.nrows(), m);
        let mut shift = 0.0;
        for (j, hj) in h.entries.iter().enumerate() {
            let xb = crate::linalg::block_diag(&members.iter().map(|x| x[j].clone()).collect::<Vec<_>>());
            g += &xb * &v * hj + xb.adjoint() * &v * hj.adjoint();
            shift += op_norm(&xb) * op_norm(hj);
        }
        g += &v * c(2.0 * shift, 0.0);
        v = polar(&g);
    }
    Ok(best)
}

/// Certified lower bound on the support of `W^min_k(base)` at the level of
/// `h`, with the point attaining it.
pub fn min_support_lower(base: &FreeConvexSet, k: usize, h: &SupportFunctional, budget: &Budget) -> Result<Option<(f64, Vec<CMat>)>> {
    let m = h.level();
    if m <= k {
        let sv = support(base, h, budget)?;
        return Ok(sv.achiever.map(|a| (sv.lower, a)));
    }
    Ok(best_seesaw(base, k, h, budget)?.map(|s| (s.value - 1e-9 * (1.0 + s.value.abs()), s.point)))
}

fn best_seesaw(base: &FreeConvexSet, k: usize, h: &SupportFunctional, budget: &Budget) -> Result<Option<Seesaw>> {
    let m = h.level();
    let n0 = m.div_ceil(k);
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed ^ 0x5eed);
    let mut starts = Vec::new();
    // eigenbasis of the Hermitian part of the summed functional
    let mut sum = CMat::zeros(m, m);
    for hj in &h.entries {
        sum += herm(hj);
    }
    let (_, u) = crate::linalg::eigh(&sum);
    let mut v = CMat::zeros(n0 * k, m);
    v.view_mut((0, 0), (m, m)).copy_from(&u.adjoint());
    starts.push(v);
    for _ in 0..2 {
        starts.push(random_isometry(&mut rng, 2 * n0 * k, m));
    }
    let mut best: Option<Seesaw> = None;
    for v0 in starts {
        if let Some(s) = seesaw(base, k, h, budget, v0)? {
            if best.as_ref().map_or(true, |b| s.value > b.value) {
                best = Some(s);
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone)]
pub enum InnerResult {
    Found(MinDecomposition),
    NotFound { best_gauge: f64, note: String },
}

/// Choi matrix of `B -> tr(B restricted to the first k coordinates)/k I_m`.
fn center_choi(n: usize, k: usize, m: usize) -> ChoiMatrix {
    ChoiMatrix::of_map(n, m, |b| {
        let mut t = c(0.0, 0.0);
        for i in 0..k {
            t += b[(i, i)];
        }
        eye(m) * (t / c(k as f64, 0.0))
    })
}

/// Searches for a matrix convex combination of level-k members of `base`
/// equal to `x`. The pool starts at the center and grows by pricing along the
/// separators of the current hull.
pub fn min_membership_inner(base: &FreeConvexSet, k: usize, x: &MatrixTuple, budget: &Budget, _tol: &Tolerances) -> Result<InnerResult> {
    let m = x.n();
    let sa = base.is_selfadjoint();
    let cen = base.center();
    let origin = scalar_point(&cen, m);
    let dir: Vec<CMat> = x.entries().iter().zip(&origin).map(|(a, b)| a - b).collect();
    let mut pool: Vec<Vec<CMat>> = vec![scalar_point(&cen, k)];
    let mut cap = m * m + 1;
    let mut notes = Vec::new();
    let mut escalated = false;
    let mut best_s = f64::NEG_INFINITY;
    let mut price = SupportFunctional::new(dir.iter().map(|a| a.adjoint()).collect())?.normalized();
    let rounds = 4 * budget.seesaw_iters.max(1);
    for round in 0..rounds {
        // pricing: members of the best combination along the current functional
        let mut added = 0;
        if let Some(sw) = best_seesaw(base, k, &price, budget)? {
            for mem in sw.members {
                let mem = shrink_toward(&mem, &cen, 1.0 - 1e-7);
                let dup = pool.iter().any(|p| p.iter().zip(&mem).map(|(a, b)| frobenius(&(a - b))).fold(0.0, f64::max) < 1e-7);
                if !dup {
                    pool.push(mem);
                    added += 1;
                }
            }
        }
        let parts: Vec<MatrixTuple> = pool.iter().map(|p| as_tuple(p.clone(), sa)).collect::<Result<_>>()?;
        let a = MatrixTuple::direct_sum_all(&parts)?;
        let set_a = FreeConvexSet::matrix_range(a.clone());
        let g = gauge(&set_a, &origin, &dir, 2.0)?;
        if g.status != Status::Optimal {
            notes.push(format!("round {round}: hull gauge ended with {:?}", g.status));
            break;
        }
        best_s = best_s.max(g.s);
        let cert = g.cert.clone().expect("optimal gauge");
        let ConeCert::Choi(jstar) = &cert else { unreachable!("ranges lift to Choi matrices") };
        if g.s >= 1.0 - 1e-8 {
            let s = g.s;
            let jc = center_choi(a.n(), k, m);
            let block = &jstar.block * c(1.0 / s, 0.0) + &jc.block * c(1.0 - 1.0 / s, 0.0);
            if let Some(dec) = decompose(base, k, x, &pool, &ChoiMatrix::new(block, a.n(), m)?, budget, &notes)? {
                return Ok(InnerResult::Found(dec));
            }
        }
        if added == 0 && round > 0 {
            break;
        }
        let Some(sep) = g.separator else { break };
        price = sep.normalized();
        if pool.len() > cap + 1 {
            if !escalated && g.s < 1.0 {
                escalated = true;
                cap *= 2;
                notes.push(format!("pool cap raised to {cap}"));
            }
            // keep the members carrying the most weight
            let weights: Vec<f64> = (0..pool.len())
                .map(|l| (l * k..(l + 1) * k).map(|i| jstar.block.view((i * m, i * m), (m, m)).trace().re).sum())
                .collect();
            let mut order: Vec<usize> = (1..pool.len()).collect();
            order.sort_by(|&p, &q| weights[q].total_cmp(&weights[p]));
            order.truncate(cap);
            order.sort();
            let mut kept = vec![pool[0].clone()];
            kept.extend(order.into_iter().map(|l| pool[l].clone()));
            pool = kept;
        }
    }
    Ok(InnerResult::NotFound {
        best_gauge: best_s,
        note: format!("pool of {} members{}", pool.len(), if notes.is_empty() { String::new() } else { format!("; {}", notes.join("; ")) }),
    })
}

/// Kraus blocks of a unital map from `W(+ pool)` give the decomposition.
fn decompose(
    base: &FreeConvexSet,
    k: usize,
    x: &MatrixTuple,
    pool: &[Vec<CMat>],
    j: &ChoiMatrix,
    budget: &Budget,
    notes: &[String],
) -> Result<Option<MinDecomposition>> {
    let Ok(j) = j.repaired_unital() else { return Ok(None) };
    let mut isometries = Vec::new();
    let mut members = Vec::new();
    let mut used = vec![false; pool.len()];
    for kr in j.kraus() {
        for (l, mem) in pool.iter().enumerate() {
            let blk = kr.columns(l * k, k).adjoint();
            if frobenius(&blk) < 1e-12 {
                continue;
            }
            used[l] = true;
            isometries.push(blk);
            members.push(as_tuple(mem.clone(), base.is_selfadjoint())?);
        }
    }
    let mut certs = Vec::new();
    let mut cert_of = vec![None; pool.len()];
    for (l, mem) in pool.iter().enumerate() {
        if !used[l] {
            continue;
        }
        let v = membership(base, &as_tuple(mem.clone(), base.is_selfadjoint())?, budget)?;
        if !v.is_in() {
            return Ok(None);
        }
        cert_of[l] = Some(v);
    }
    for kr in j.kraus() {
        for l in 0..pool.len() {
            if frobenius(&kr.columns(l * k, k).into_owned()) < 1e-12 {
                continue;
            }
            certs.push(cert_of[l].clone().expect("used member has a certificate"));
        }
    }
    let dec = MinDecomposition {
        k,
        isometries,
        members,
        member_certs: certs,
        notes: notes.to_vec(),
    };
    let (unit, rec) = dec.residuals(x);
    if unit <= 1e-8 && rec <= 1e-6 {
        Ok(Some(dec))
    } else {
        Ok(None)
    }
}
