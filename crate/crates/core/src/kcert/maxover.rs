//! Maximal envelopes: refutation by compressions, certification on a net.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{Budget, Tolerances};
use crate::error::Result;
use crate::linalg::{c, op_norm, random_unital_choi, CMat, MatrixTuple};
use crate::oracles::membership::gauge;
use crate::oracles::support::support_sdp;
use crate::oracles::{membership, support, Certificate, MembershipVerdict, SupportFunctional, Verdict};
use crate::sdp::Status;
use crate::sets::lift::{self, Mode};
use crate::sets::{geometry, FreeConvexSet};

use super::{scalar_point, NetCover};

/// Looks for a UCP map `phi: M_m -> M_k` with `phi(X)` outside `base`.
pub fn max_membership_refute(
    base: &FreeConvexSet,
    k: usize,
    x: &MatrixTuple,
    budget: &Budget,
    _tol: &Tolerances,
) -> Result<Option<MembershipVerdict>> {
    let m = x.n();
    let range = FreeConvexSet::matrix_range(x.clone());
    let cen = base.center();
    let origin = scalar_point(&cen, k);
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed ^ 0x3a3a);
    let starts = (budget.sweep_starts / 4).max(2);
    for _ in 0..starts {
        let mut phi = random_unital_choi(&mut rng, m, k);
        let mut last = f64::INFINITY;
        for _ in 0..budget.seesaw_iters.max(1) {
            let y = phi.apply_tuple(x)?;
            let v = membership(base, &y, budget)?;
            if v.is_out() {
                return Ok(Some(MembershipVerdict {
                    verdict: Verdict::Out,
                    margin: v.margin,
                    note: format!("compression to level {k} leaves the base"),
                    certificate: Certificate::Compression { choi: phi, image_out: Box::new(v) },
                }));
            }
            if !lift::representable(base, k) {
                break;
            }
            // steer the compression along the separator of its current image
            let dir: Vec<CMat> = y.entries().iter().zip(&origin).map(|(a, b)| a - b).collect();
            let g = gauge(base, &origin, &dir, f64::INFINITY)?;
            if g.status != Status::Optimal || g.s >= last - 1e-9 {
                break;
            }
            last = g.s;
            let Some(sep) = g.separator else { break };
            let sv = support_sdp(&range, &sep.normalized(), Mode::Exact)?;
            match sv.achiever_cert.as_ref().and_then(|cc| cc.as_choi()) {
                Some(j) => phi = j.repaired_unital()?,
                None => break,
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone)]
pub enum CertifyResult {
    In(MembershipVerdict),
    Undecided(String),
}

/// Orthonormal real basis of level-k functionals (Frobenius inner product).
fn functional_basis(k: usize, d: usize, selfadjoint: bool) -> Vec<SupportFunctional> {
    let mut mats = Vec::new();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..k {
        for j in 0..k {
            if selfadjoint {
                if i == j {
                    mats.push(crate::linalg::unit(k, i, i));
                } else if i < j {
                    mats.push((crate::linalg::unit(k, i, j) + crate::linalg::unit(k, j, i)) * c(r, 0.0));
                    mats.push((crate::linalg::unit(k, i, j) - crate::linalg::unit(k, j, i)) * c(0.0, r));
                }
            } else {
                mats.push(crate::linalg::unit(k, i, j));
                mats.push(crate::linalg::unit(k, i, j) * c(0.0, 1.0));
            }
        }
    }
    let mut out = Vec::new();
    for slot in 0..d {
        for b in &mats {
            let entries = (0..d).map(|s| if s == slot { b.clone() } else { CMat::zeros(k, k) }).collect();
            out.push(SupportFunctional { entries });
        }
    }
    out
}

fn combine(basis: &[SupportFunctional], u: &[f64]) -> SupportFunctional {
    let mut entries: Vec<CMat> = basis[0].entries.iter().map(|e| CMat::zeros(e.nrows(), e.ncols())).collect();
    for (b, &w) in basis.iter().zip(u) {
        if w == 0.0 {
            continue;
        }
        for (e, be) in entries.iter_mut().zip(&b.entries) {
            *e += be * c(w, 0.0);
        }
    }
    SupportFunctional { entries }
}

/// Points of the cube surface `{|u|_inf = 1}` on a grid of spacing `2/q`.
fn cube_surface(dim: usize, q: usize) -> Vec<Vec<f64>> {
    let free = dim - 1;
    let total = (q + 1).pow(free as u32);
    let mut out = Vec::with_capacity(2 * dim * total);
    for face in 0..dim {
        for sign in [1.0, -1.0] {
            for code in 0..total {
                let mut rest = code;
                let u = (0..dim)
                    .map(|a| {
                        if a == face {
                            sign
                        } else {
                            let i = rest % (q + 1);
                            rest /= q + 1;
                            -1.0 + 2.0 * i as f64 / q as f64
                        }
                    })
                    .collect();
                out.push(u);
            }
        }
    }
    out
}

/// Certifies `X` in `W^max_k(base)` by checking `h_{W(X)} <= h_base` on all
/// level-k functionals: first the exact shortcut `X in base`, then a net.
pub fn max_membership_certify(
    base: &FreeConvexSet,
    k: usize,
    x: &MatrixTuple,
    budget: &Budget,
    _tol: &Tolerances,
) -> Result<CertifyResult> {
    if lift::representable(base, x.n()) || lift::outer_representable(base, x.n()) {
        let v = membership(base, x, budget)?;
        if v.is_in() {
            return Ok(CertifyResult::In(MembershipVerdict {
                verdict: Verdict::In,
                margin: v.margin,
                note: "point lies in the base".into(),
                certificate: Certificate::Envelope(Box::new(v.certificate)),
            }));
        }
    }
    let factor = if base.is_selfadjoint() { 1 } else { 2 };
    let dim = base.d() * k * k * factor;
    if dim > budget.net_dim_cap {
        return Ok(CertifyResult::Undecided(format!(
            "net over level-{k} functionals needs real dimension {dim} > cap {}",
            budget.net_dim_cap
        )));
    }
    let basis = functional_basis(k, base.d(), base.is_selfadjoint());
    // Lipschitz constants in the Frobenius norm of the functional
    let gb = geometry(base)?;
    let mb = if base.is_selfadjoint() { gb.bounding_radius } else { 2.0 * gb.bounding_radius };
    let lip_base = if k == 1 { gb.bounding_radius } else { mb * ((k * base.d()) as f64).sqrt() };
    let lip_x = (k as f64).sqrt() * x.entries().iter().map(|a| op_norm(a).powi(2)).sum::<f64>().sqrt();
    let lip = lip_base + lip_x;
    let range = FreeConvexSet::matrix_range(x.clone());
    let (points, radius, exact): (Vec<Vec<f64>>, f64, bool) = if dim == 1 {
        (vec![vec![1.0], vec![-1.0]], 0.0, true)
    } else {
        let q = (budget.net_density as f64).powf(1.0 / (dim - 1) as f64).ceil().max(2.0) as usize;
        let h = 2.0 / q as f64;
        (cube_surface(dim, q), 0.5 * h * ((dim - 1) as f64).sqrt(), false)
    };
    let mut min_slack = f64::INFINITY;
    for u in &points {
        let f = combine(&basis, u);
        let hb = support(base, &f, budget)?;
        let hx = support(&range, &f, budget)?;
        let slack = hb.lower - hx.upper;
        min_slack = min_slack.min(slack);
        if slack < lip * radius - 1e-12 {
            return Ok(CertifyResult::Undecided(format!(
                "net slack {slack:.3e} below the Lipschitz correction {:.3e}",
                lip * radius
            )));
        }
    }
    let cover = NetCover {
        k,
        dim,
        points: points.len(),
        covering_radius: radius,
        lipschitz: lip,
        min_slack,
        exact,
    };
    Ok(CertifyResult::In(MembershipVerdict {
        verdict: Verdict::In,
        margin: min_slack - lip * radius,
        note: format!("level-{k} supports dominated on a net of {} points", cover.points),
        certificate: Certificate::NetCover(cover),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_surface_counts() {
        let pts = cube_surface(2, 4);
        assert_eq!(pts.len(), 4 * 5);
        assert!(pts.iter().all(|u| u.iter().fold(0.0f64, |a, b| a.max(b.abs())) == 1.0));
        assert_eq!(cube_surface(3, 2).len(), 6 * 9);
    }
}
