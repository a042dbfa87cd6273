//! Multi-start ascent over dual-unit functionals.
//!
//! Support functions are convex, so differences and ratios of them need a
//! global search. Each start runs conditional-gradient steps whose direction
//! comes from support achievers; starts and levels run in parallel and merge
//! by index.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::Budget;
use crate::error::Result;
use crate::linalg::{c, CMat};

use super::SupportFunctional;

/// Value and ascent direction of the swept objective at a functional.
pub type Eval = (f64, Option<SupportFunctional>);

#[derive(Debug, Clone)]
pub struct SweepResult {
    /// Best certified objective value (`-inf` if nothing evaluated).
    pub value: f64,
    pub functional: Option<SupportFunctional>,
    pub level: usize,
    /// Best value per level, index 0 is level 1.
    pub per_level: Vec<f64>,
    pub evaluations: usize,
}

/// Starting functionals at level `m`: pseudo-random, coordinate and seeded.
pub fn starts(d: usize, m: usize, selfadjoint: bool, budget: &Budget, seeds: &[SupportFunctional]) -> Vec<SupportFunctional> {
    let total = budget.sweep_starts.max(1);
    let n_coord = total / 4;
    let n_seed = (total / 4).min(seeds.iter().filter(|s| s.level() == m).count());
    let n_rand = total - n_coord - n_seed;
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed.wrapping_mul(0x9e37_79b9).wrapping_add(m as u64));
    let mut out: Vec<SupportFunctional> = (0..n_rand).map(|_| SupportFunctional::random(&mut rng, d, m, selfadjoint)).collect();
    // coordinate directions: one slot, a rank-one or off-diagonal pattern
    let phases = if selfadjoint { vec![c(1.0, 0.0), c(-1.0, 0.0)] } else { vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)] };
    let mut coords = Vec::new();
    for slot in 0..d {
        for &ph in &phases {
            let mut h = CMat::zeros(m, m);
            if m == 1 || selfadjoint {
                h[(0, 0)] = ph;
                if m > 1 {
                    h[(m - 1, m - 1)] = -ph;
                }
            } else {
                h[(m - 1, 0)] = ph;
            }
            let entries = (0..d).map(|s| if s == slot { h.clone() } else { CMat::zeros(m, m) }).collect();
            coords.push(SupportFunctional { entries }.normalized());
        }
    }
    out.extend(coords.into_iter().take(n_coord));
    out.extend(seeds.iter().filter(|s| s.level() == m).take(n_seed).map(|s| s.normalized()));
    out
}

/// Extreme point of the dual unit ball maximizing the Frobenius pairing with
/// `g`: in each slot the top singular pair (top eigenvector for Hermitian sets).
fn linear_max(g: &SupportFunctional, selfadjoint: bool) -> SupportFunctional {
    let entries = g
        .entries
        .iter()
        .map(|gj| {
            if gj.norm() <= 1e-14 {
                return CMat::zeros(gj.nrows(), gj.ncols());
            }
            if selfadjoint {
                let (vals, vecs) = crate::linalg::eigh(&crate::linalg::herm(gj));
                let n = vals.len();
                let (i, sign) = if vals[n - 1] >= -vals[0] { (n - 1, 1.0) } else { (0, -1.0) };
                let w = vecs.column(i);
                w * w.adjoint() * c(sign, 0.0)
            } else {
                let svd = gj.clone().svd(true, true);
                let (i, _) = svd.singular_values.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty");
                let u = svd.u.expect("u").column(i).into_owned();
                let v = svd.v_t.expect("v_t").row(i).adjoint();
                u * v.adjoint()
            }
        })
        .collect();
    SupportFunctional { entries }
}

fn ascend<F>(eval: &F, h0: SupportFunctional, iters: usize, selfadjoint: bool) -> Result<(f64, SupportFunctional, usize)>
where
    F: Fn(&SupportFunctional) -> Result<Eval>,
{
    let mut h = h0;
    let (mut best, mut dir) = eval(&h)?;
    let mut calls = 1;
    for _ in 0..iters {
        let Some(g) = dir.take() else { break };
        if !best.is_finite() {
            break;
        }
        // conditional-gradient step toward the extreme point picked by the subgradient
        let s = linear_max(&g, selfadjoint);
        let mut moved = false;
        for gamma in [1.0, 0.5, 0.2, 0.05] {
            let mix: Vec<CMat> = h.entries.iter().zip(&s.entries).map(|(a, b)| a * c(1.0 - gamma, 0.0) + b * c(gamma, 0.0)).collect();
            let cand = SupportFunctional { entries: mix }.normalized();
            if cand.dual_norm() == 0.0 {
                continue;
            }
            let (v, d) = eval(&cand)?;
            calls += 1;
            if v > best + 1e-12 {
                best = v;
                h = cand;
                dir = d;
                moved = true;
                break;
            }
        }
        if !moved {
            break;
        }
    }
    Ok((best, h, calls))
}

/// Maximizes `eval` over dual-unit functionals at levels `1..=budget.level_cap`.
/// `seeds` adds starting functionals (matched by level).
pub fn sweep<F>(d: usize, selfadjoint: bool, budget: &Budget, seeds: &[SupportFunctional], eval: F) -> Result<SweepResult>
where
    F: Fn(&SupportFunctional) -> Result<Eval> + Sync,
{
    sweep_levels(d, selfadjoint, budget, seeds, 1..=budget.level_cap.max(1), eval)
}

pub fn sweep_levels<F>(
    d: usize,
    selfadjoint: bool,
    budget: &Budget,
    seeds: &[SupportFunctional],
    levels: impl IntoIterator<Item = usize>,
    eval: F,
) -> Result<SweepResult>
where
    F: Fn(&SupportFunctional) -> Result<Eval> + Sync,
{
    let levels: Vec<usize> = levels.into_iter().collect();
    let tasks: Vec<(usize, SupportFunctional)> = levels
        .iter()
        .flat_map(|&m| starts(d, m, selfadjoint, budget, seeds).into_iter().map(move |h| (m, h)))
        .collect();
    let results: Vec<Result<(usize, f64, SupportFunctional, usize)>> = tasks
        .into_par_iter()
        .map(|(m, h)| ascend(&eval, h, budget.sweep_iters, selfadjoint).map(|(v, h, n)| (m, v, h, n)))
        .collect();
    let mut out = SweepResult {
        value: f64::NEG_INFINITY,
        functional: None,
        level: 0,
        per_level: vec![f64::NEG_INFINITY; levels.iter().copied().max().unwrap_or(0)],
        evaluations: 0,
    };
    for r in results {
        let (m, v, h, n) = r?;
        out.evaluations += n;
        if v > out.per_level[m - 1] {
            out.per_level[m - 1] = v;
        }
        if v > out.value {
            out.value = v;
            out.functional = Some(h);
            out.level = m;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_largest_coordinate() {
        // maximize <H, diag(3, 1)> over trace-norm-one Hermitian H: value 3
        let target = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(3.0, 0.0), c(1.0, 0.0)]));
        let b = Budget::quick();
        let r = sweep_levels(1, true, &b, &[], [2], |h| {
            let v = h.pair(std::slice::from_ref(&target));
            Ok((v, Some(SupportFunctional { entries: vec![target.clone()] })))
        })
        .unwrap();
        assert!(r.value > 2.9, "{}", r.value);
        assert!(r.value <= 3.0 + 1e-12);
    }

    #[test]
    fn deterministic_merge() {
        let b = Budget::quick();
        let f = |h: &SupportFunctional| Ok((h.entries[0][(0, 0)].re, None));
        let a = sweep(1, true, &b, &[], f).unwrap();
        let a2 = sweep(1, true, &b, &[], f).unwrap();
        assert_eq!(a.value, a2.value);
        assert_eq!(a.functional, a2.functional);
    }
}
