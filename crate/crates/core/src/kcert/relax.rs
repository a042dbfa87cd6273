//! Outer relaxations of `W^min_k(base)` at levels above `k`.

use num_complex::Complex64;

use crate::error::Result;
use crate::linalg::{c, eye, CMat, MatrixTuple};
use crate::oracles::level1_support;
use crate::sdp::{CMatExpr, Model};
use crate::sets::lift::{lift_mode, Handle, Lifted, Mode};
use crate::sets::{FreeConvexSet, Level1, Node, Primitive};

/// Polygon sides used for disks inside products.
const PRODUCT_SIDES: usize = 8;
/// Polygon sides for a lone disk.
const DISK_SIDES: usize = 32;
/// Largest vertex count accepted for a polytope relaxation.
const MAX_VERTICES: usize = 256;

/// Output partial transpose of a Choi expression (input side `n`).
pub fn partial_transpose_expr(j: &CMatExpr, n: usize) -> CMatExpr {
    let m = j.rows / n;
    let mut out = CMatExpr::zeros(j.rows, j.cols);
    for i in 0..n {
        for k in 0..n {
            for a in 0..m {
                for b in 0..m {
                    *out.at_mut(i * m + b, k * m + a) = j.at(i * m + a, k * m + b).clone();
                }
            }
        }
    }
    out
}

/// `Tr_out J` as an `n x n` expression.
pub fn trace_output_expr(j: &CMatExpr, n: usize) -> CMatExpr {
    let m = j.rows / n;
    let mut out = CMatExpr::zeros(n, n);
    for i in 0..n {
        for k in 0..n {
            for a in 0..m {
                let e = j.at(i * m + a, k * m + a).clone();
                out.at_mut(i, k).add_mul(&e, c(1.0, 0.0));
            }
        }
    }
    out
}

/// Which Schmidt-number test a relaxation imposes.
pub fn family(n: usize, m: usize, k: usize) -> &'static str {
    if k >= n.min(m) {
        "none (Schmidt constraint vacuous)"
    } else if k == 1 {
        "partial transpose"
    } else {
        "reduction criterion"
    }
}

/// Full Choi lift of `W(T)` at level `m` with a Schmidt-number-`k` relaxation.
fn schmidt_relaxed_range(model: &mut Model, t: &MatrixTuple, k: usize, m: usize, p: &CMatExpr, p_trace: f64) -> Lifted {
    let n = t.n();
    let jv = model.herm_psd(n * m);
    model.bound_trace(jv, p_trace);
    let je = jv.expr();
    let mut unit = je.contract_input(n, &eye(n));
    unit.add_mul(p, c(-1.0, 0.0));
    model.eq_matrix(&unit, &CMat::zeros(m, m), true);
    if k < n.min(m) {
        if k == 1 {
            let (v, _) = model.psd(&partial_transpose_expr(&je, n));
            model.bound_trace(v, p_trace);
        } else {
            let kf = k as f64;
            // I_n (x) P, input factor first
            let mut a = CMatExpr::blocks(
                &(0..n)
                    .map(|i| (0..n).map(|l| if i == l { p.scaled(kf) } else { CMatExpr::zeros(m, m) }).collect())
                    .collect::<Vec<_>>(),
            );
            a.add_mul(&je, c(-1.0, 0.0));
            let (v, _) = model.psd(&a);
            model.bound_trace(v, kf * n as f64 * p_trace);
            let mut b = trace_output_expr(&je, n).kron_const(&eye(m)).scaled(kf);
            b.add_mul(&je, c(-1.0, 0.0));
            let (v, _) = model.psd(&b);
            model.bound_trace(v, kf * m as f64 * p_trace);
        }
    }
    let z = t.entries().iter().map(|tj| je.contract_input(n, tj)).collect();
    Lifted {
        z,
        handle: Handle::Choi {
            n,
            m,
            parts: vec![((0..n).collect(), jv)],
        },
        free_bound: Some(0.0),
    }
}

/// Vertices of a polytope containing level one of `set` (points of `C^d`).
pub fn outer_vertices(set: &FreeConvexSet, sides: usize) -> Result<Vec<Vec<Complex64>>> {
    if let Some(l) = set.flags().level1 {
        match l {
            Level1::Disk(r) => return Ok(polygon(r, sides)),
            Level1::Ball(1, r) => return Ok(vec![vec![c(r, 0.0)], vec![c(-r, 0.0)]]),
            Level1::Ball(..) => {}
        }
    }
    match set.node() {
        Node::Primitive(Primitive::ContractionSet) => Ok(polygon(1.0, sides)),
        Node::Scaled(r, s) => Ok(outer_vertices(s, sides)?
            .into_iter()
            .map(|v| v.into_iter().map(|z| z * *r).collect())
            .collect()),
        Node::MinOver(_, s) | Node::MaxOver(_, s) => outer_vertices(s, sides),
        Node::MatrixRange(t) if t.is_commuting_normal(1e-12) => Ok(joint_eigenvalues(t)),
        Node::CartesianProduct(a, b) => {
            let va = outer_vertices(a, PRODUCT_SIDES)?;
            let vb = outer_vertices(b, PRODUCT_SIDES)?;
            if va.len() * vb.len() <= MAX_VERTICES {
                return Ok(va
                    .iter()
                    .flat_map(|x| vb.iter().map(move |y| x.iter().chain(y).cloned().collect()))
                    .collect());
            }
            bounding_box(set)
        }
        _ => bounding_box(set),
    }
}

fn polygon(r: f64, sides: usize) -> Vec<Vec<Complex64>> {
    // circumscribed regular polygon
    let rr = r / (std::f64::consts::PI / sides as f64).cos();
    (0..sides)
        .map(|i| {
            let t = 2.0 * std::f64::consts::PI * i as f64 / sides as f64;
            vec![c(rr * t.cos(), rr * t.sin())]
        })
        .collect()
}

fn joint_eigenvalues(t: &MatrixTuple) -> Vec<Vec<Complex64>> {
    // a generic real combination of the Hermitian parts diagonalizes a commuting normal family
    let n = t.n();
    let mut g = CMat::zeros(n, n);
    for (j, m) in t.entries().iter().enumerate() {
        let w = 1.0 + 0.6180339887 * j as f64;
        g += crate::linalg::herm(m) * c(w, 0.0) + crate::linalg::skew_herm(m) * c(0.0, -0.41 * w);
    }
    let (_, u) = crate::linalg::eigh(&crate::linalg::herm(&g));
    (0..n)
        .map(|i| {
            let v = u.column(i);
            t.entries().iter().map(|m| (v.adjoint() * m * v)[(0, 0)]).collect()
        })
        .collect()
}

/// Axis box from level-one supports along the real coordinates.
fn bounding_box(set: &FreeConvexSet) -> Result<Vec<Vec<Complex64>>> {
    let dim = set.real_dim();
    let mut lo = vec![0.0; dim];
    let mut hi = vec![0.0; dim];
    for i in 0..dim {
        let mut u = vec![0.0; dim];
        u[i] = 1.0;
        hi[i] = level1_support(set, &u)?;
        u[i] = -1.0;
        lo[i] = -level1_support(set, &u)?;
    }
    let mut out = Vec::with_capacity(1 << dim);
    for mask in 0..(1usize << dim) {
        let x: Vec<f64> = (0..dim).map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] }).collect();
        let v = if set.is_selfadjoint() {
            x.iter().map(|&a| c(a, 0.0)).collect()
        } else {
            x.chunks(2).map(|p| c(p[0], p[1])).collect()
        };
        out.push(v);
    }
    Ok(out)
}

/// Diagonal tuple whose range is the minimal set over the polytope.
pub fn vertex_tuple(vertices: &[Vec<Complex64>], selfadjoint: bool) -> Result<MatrixTuple> {
    let d = vertices[0].len();
    let entries: Vec<CMat> = (0..d)
        .map(|j| CMat::from_diagonal(&nalgebra::DVector::from_iterator(vertices.len(), vertices.iter().map(|v| v[j]))))
        .collect();
    if selfadjoint {
        MatrixTuple::selfadjoint(entries)
    } else {
        MatrixTuple::new(entries)
    }
}

/// Lift of a superset of `W^min_k(base)` at level `m > k`.
pub fn relaxation_lift(model: &mut Model, base: &FreeConvexSet, k: usize, m: usize, p: &CMatExpr, p_trace: f64) -> Result<Lifted> {
    match base.node() {
        Node::MatrixRange(t) => return Ok(schmidt_relaxed_range(model, t, k, m, p, p_trace)),
        Node::Primitive(Primitive::BallMin(n)) | Node::Primitive(Primitive::BallMax(n)) if k == 1 => {
            return Ok(schmidt_relaxed_range(model, &crate::sets::clifford(*n), 1, m, p, p_trace));
        }
        Node::Scaled(r, s) => {
            let l = relaxation_lift(model, s, k, m, p, p_trace)?;
            return Ok(Lifted {
                z: l.z.iter().map(|e| e.scaled(*r)).collect(),
                handle: Handle::Scaled(Box::new(l.handle)),
                free_bound: l.free_bound,
            });
        }
        _ => {}
    }
    if k == 1 {
        let v = outer_vertices(base, DISK_SIDES)?;
        let t = vertex_tuple(&v, base.is_selfadjoint())?;
        return lift_mode(model, &FreeConvexSet::matrix_range(t), m, p, p_trace, Mode::Exact);
    }
    // the envelope sits inside its base
    lift_mode(model, base, m, p, p_trace, Mode::Outer)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_transpose_matches_dense() {
        let mut model = Model::new();
        let v = model.herm_psd(4);
        let e = v.expr();
        let pt = partial_transpose_expr(&e, 2);
        // entry ((0,1),(1,0)) of J^Gamma is entry ((0,0),(1,1)) of J
        assert_eq!(pt.at(1, 2), e.at(0, 3));
        assert_eq!(trace_output_expr(&e, 2).rows, 2);
    }

    #[test]
    fn polygon_contains_disk() {
        // the apothem of the circumscribed polygon is the disk radius
        let v = polygon(2.0, 8);
        let mid = (v[0][0] + v[1][0]) * 0.5;
        assert!((mid.norm() - 2.0).abs() < 1e-12);
    }
}
