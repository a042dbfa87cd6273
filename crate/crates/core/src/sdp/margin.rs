//! Strict-feasibility margin: the largest `t` with `X_b - t I ⪰ 0` in every
//! block for some feasible point.

use crate::error::Result;

use super::ipm::{solve, ConicProgram, Constraint, RMat, Sense, Status, SymEntry};

#[derive(Debug, Clone)]
pub struct Margin {
    pub status: Status,
    /// Optimal `t`, capped at `cap`; negative means no PSD-feasible point.
    pub margin: f64,
    /// Feasible point attaining the margin, one matrix per original block.
    pub witness: Vec<RMat>,
    pub free: Vec<f64>,
    /// `|margin| <= 1e-7`: feasible at best on the boundary of the cone.
    pub boundary: bool,
}

/// Solves `max t` over `X_b = Y_b + t I`, `Y_b ⪰ 0`, `t <= cap`, subject to the
/// constraints of `prog` (its objective is ignored).
pub fn feasibility_margin(prog: &ConicProgram, cap: f64) -> Result<Margin> {
    prog.validate()?;
    let nb = prog.blocks.len();
    let t = prog.n_free;
    let mut blocks = prog.blocks.clone();
    blocks.push(1);
    let mut q = ConicProgram::new(blocks, prog.n_free + 1, Sense::Maximize);
    for c in &prog.constraints {
        // <A, t I> = t * (sum of diagonal coefficients)
        let shift: f64 = c.entries.iter().filter(|(_, e)| e.r == e.c).map(|(_, e)| e.v).sum();
        let mut c2 = c.clone();
        if shift != 0.0 {
            c2.free.push((t, shift));
        }
        q.constraints.push(c2);
    }
    q.constraints.push(Constraint { free: vec![(t, 1.0)], entries: vec![(nb, SymEntry::new(0, 0, 1.0))], rhs: cap });
    q.objective_free.push((t, 1.0));
    let r = solve(&q)?;
    let tv = r.free.get(t).copied().unwrap_or(f64::NAN);
    let witness = r
        .primal
        .iter()
        .take(nb)
        .map(|y| y + RMat::identity(y.nrows(), y.ncols()) * tv)
        .collect();
    Ok(Margin {
        status: r.status,
        margin: tv,
        witness,
        free: r.free.iter().take(prog.n_free).copied().collect(),
        boundary: r.status == Status::Optimal && tv.abs() <= 1e-7,
    })
}
