//! Level-one geometry: inner and bounding radii, recoordinatization.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, herm, re_tr_prod, skew_herm, CMat, MatrixTuple};
use crate::oracles::{gauge, level1_support};

use super::{FreeConvexSet, Level1};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    /// Certified radius of a Euclidean ball around 0 inside level one.
    pub inner_radius: f64,
    /// Certified radius of a Euclidean ball around 0 containing level one.
    pub bounding_radius: f64,
    /// Uncorrected minimum of the sampled supports (an upper estimate of the true inner radius).
    pub inner_estimate: f64,
    /// Uncorrected maximum of the sampled supports (a lower estimate of the true bounding radius).
    pub bounding_estimate: f64,
    /// Unit directions used, in real level-one coordinates.
    pub directions: Vec<Vec<f64>>,
    /// Support values along `directions`.
    pub supports: Vec<f64>,
    pub method: String,
    pub zero_interior: bool,
}

/// Unit directions in `R^dim`: an even circle net for `dim = 2`, otherwise
/// coordinate directions plus a low-discrepancy sample of the sphere.
pub fn direction_net(dim: usize, count: usize) -> Vec<Vec<f64>> {
    match dim {
        0 => Vec::new(),
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        _ => {
            let mut out = Vec::with_capacity(count + 2 * dim);
            for i in 0..dim {
                for s in [1.0, -1.0] {
                    let mut v = vec![0.0; dim];
                    v[i] = s;
                    out.push(v);
                }
            }
            // Halton points pushed through the Gaussian quantile, then normalized
            let primes = [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
            let mut k = 1u32;
            while out.len() < count + 2 * dim {
                let mut v: Vec<f64> = (0..dim)
                    .map(|j| {
                        let u = halton(k, primes[j % primes.len()]);
                        probit(u.clamp(1e-9, 1.0 - 1e-9))
                    })
                    .collect();
                let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                k += 1;
                if nrm < 1e-9 {
                    continue;
                }
                v.iter_mut().for_each(|x| *x /= nrm);
                out.push(v);
            }
            out
        }
    }
}

fn halton(mut i: u32, b: u32) -> f64 {
    let (mut f, mut r) = (1.0, 0.0);
    while i > 0 {
        f /= b as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

fn probit(p: f64) -> f64 {
    // Acklam's rational approximation; accuracy is irrelevant here, only spread
    let a = [-39.696_830_286_653_76, 220.946_098_424_520_5, -275.928_510_446_969, 138.357_751_867_269, -30.664_798_066_147_16, 2.506_628_277_459_239];
    let b = [-54.476_098_798_224_06, 161.585_836_858_040_9, -155.698_979_859_886_6, 66.801_311_887_719_72, -13.280_681_552_885_72];
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = q * q;
        return q * (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5])
            / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let t = (-2.0 * r.ln()).sqrt();
    let v = (2.515517 + 0.802853 * t + 0.010328 * t * t) / (1.0 + 1.432788 * t + 0.189269 * t * t + 0.001308 * t * t * t);
    if q < 0.0 {
        -(t - v)
    } else {
        t - v
    }
}

/// Level-one point of a set from real coordinates.
pub fn point_from_real(set: &FreeConvexSet, x: &[f64]) -> Vec<CMat> {
    if set.is_selfadjoint() {
        x.iter().map(|&v| CMat::from_element(1, 1, c(v, 0.0))).collect()
    } else {
        x.chunks(2).map(|p| CMat::from_element(1, 1, c(p[0], p[1]))).collect()
    }
}

/// Inner and bounding radii of level one around the origin.
pub fn geometry(set: &FreeConvexSet) -> Result<GeometryReport> {
    let dim = set.real_dim();
    if let Some(l) = set.flags().level1 {
        let r = match l {
            Level1::Disk(r) | Level1::Ball(_, r) => r,
        };
        return Ok(GeometryReport {
            inner_radius: r,
            bounding_radius: r,
            inner_estimate: r,
            bounding_estimate: r,
            directions: Vec::new(),
            supports: Vec::new(),
            method: "closed form".into(),
            zero_interior: r > 1e-9,
        });
    }
    let count = if dim == 2 { 360 } else { 64 * set.d() };
    let dirs = direction_net(dim, count);
    let supports = dirs.iter().map(|u| level1_support(set, u)).collect::<Result<Vec<f64>>>()?;
    let smin = supports.iter().cloned().fold(f64::INFINITY, f64::min);
    let smax = supports.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !smax.is_finite() {
        return Ok(GeometryReport {
            inner_radius: 0.0,
            bounding_radius: f64::INFINITY,
            inner_estimate: smin,
            bounding_estimate: smax,
            directions: dirs,
            supports,
            method: "unbounded".into(),
            zero_interior: false,
        });
    }
    let (inner, bound, method) = match dim {
        1 => (smin.max(0.0), smax.max(0.0), "exact interval".to_string()),
        2 => {
            // every unit vector is within eps of the net, h is M-Lipschitz
            let eps = 2.0 * (std::f64::consts::PI / (2.0 * count as f64)).sin();
            let m = smax / (1.0 - eps);
            ((smin - m * eps).max(0.0), m, format!("circle net of {count}, mesh {eps:.2e}"))
        }
        _ => {
            // box from coordinate supports; cross-polytope from gauges along the axes
            let mut bsq = 0.0;
            let mut axis_min = f64::INFINITY;
            for i in 0..dim {
                let (p, n) = (supports[2 * i], supports[2 * i + 1]);
                bsq += p.max(n).max(0.0).powi(2);
                for s in [1.0, -1.0] {
                    let mut u = vec![0.0; dim];
                    u[i] = s;
                    let dir = point_from_real(set, &u);
                    let zero: Vec<CMat> = dir.iter().map(|_| CMat::zeros(1, 1)).collect();
                    let g = gauge(set, &zero, &dir, f64::INFINITY)?;
                    axis_min = axis_min.min(g.s.max(0.0));
                }
            }
            (
                axis_min / (dim as f64).sqrt(),
                bsq.sqrt(),
                "coordinate box and axis cross-polytope".to_string(),
            )
        }
    };
    Ok(GeometryReport {
        inner_radius: inner,
        bounding_radius: bound,
        inner_estimate: smin,
        bounding_estimate: smax,
        directions: dirs,
        supports,
        method,
        zero_interior: inner > 1e-9,
    })
}

/// Certified inner radius only; cheaper paths for sets with a closed form.
pub(crate) fn quick_inner_radius(set: &FreeConvexSet) -> Result<f64> {
    Ok(geometry(set)?.inner_radius)
}

/// `T' = A (T - c)` in real selfadjoint coordinates, with the affine hull of
/// level one reduced to full dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Recoordinatization {
    pub tuple: MatrixTuple,
    /// Real coordinates of the center that is sent to 0.
    pub center: Vec<f64>,
    /// `r x D` linear part.
    pub map: DMatrix<f64>,
    /// `D x r` right inverse on the affine hull.
    pub inverse: DMatrix<f64>,
    pub original_dim: usize,
    pub reduced_dim: usize,
}

fn real_coordinates(t: &MatrixTuple) -> Vec<CMat> {
    if t.is_selfadjoint() {
        t.entries().to_vec()
    } else {
        t.entries().iter().flat_map(|m| [herm(m), skew_herm(m)]).collect()
    }
}

/// Recoordinatizes a tuple so that 0 is interior to level one. The center is
/// the image of the maximally mixed state, which lies in the relative interior.
pub fn recoordinatize(t: &MatrixTuple) -> Result<Recoordinatization> {
    let n = t.n();
    let h = real_coordinates(t);
    let dim = h.len();
    let center: Vec<f64> = h.iter().map(|m| m.trace().re / n as f64).collect();
    let centered: Vec<CMat> = h
        .iter()
        .zip(&center)
        .map(|(m, &cv)| m - CMat::identity(n, n) * c(cv, 0.0))
        .collect();
    let gram = DMatrix::from_fn(dim, dim, |i, j| re_tr_prod(&centered[i], &centered[j]));
    let eig = gram.clone().symmetric_eigen();
    let scale = eig.eigenvalues.iter().cloned().fold(0.0, f64::max).max(1e-300);
    let keep: Vec<usize> = (0..dim).filter(|&i| eig.eigenvalues[i] > 1e-12 * scale).collect();
    if keep.is_empty() {
        return Err(Error::Precondition("level one is a single point; nothing to recoordinatize".into()));
    }
    let r = keep.len();
    // rows of `map` are normalized eigenvectors, so the new generators are
    // orthonormal in the Hilbert-Schmidt inner product
    let mut map = DMatrix::zeros(r, dim);
    let mut inverse = DMatrix::zeros(dim, r);
    for (row, &i) in keep.iter().enumerate() {
        let v: DVector<f64> = eig.eigenvectors.column(i).into();
        let s = eig.eigenvalues[i].sqrt();
        for k in 0..dim {
            map[(row, k)] = v[k] / s;
            inverse[(k, row)] = v[k] * s;
        }
    }
    let entries: Vec<CMat> = (0..r)
        .map(|row| {
            let mut acc = CMat::zeros(n, n);
            for k in 0..dim {
                acc += &centered[k] * c(map[(row, k)], 0.0);
            }
            herm(&acc)
        })
        .collect();
    let tuple = MatrixTuple::selfadjoint(entries)?.with_label(format!(
        "recoordinatized({})",
        t.label.clone().unwrap_or_else(|| "T".into())
    ));
    Ok(Recoordinatization {
        tuple,
        center,
        map,
        inverse,
        original_dim: dim,
        reduced_dim: r,
    })
}

impl Recoordinatization {
    /// Transports a point of the original coordinates. Returns the image and
    /// the Hilbert-Schmidt size of the component that leaves the affine hull.
    pub fn forward(&self, x: &MatrixTuple) -> Result<(MatrixTuple, f64)> {
        let h = real_coordinates(x);
        if h.len() != self.original_dim {
            return Err(Error::Dimension("point has the wrong number of coordinates".into()));
        }
        let m = x.n();
        let centered: Vec<CMat> = h
            .iter()
            .zip(&self.center)
            .map(|(a, &cv)| a - CMat::identity(m, m) * c(cv, 0.0))
            .collect();
        let out: Vec<CMat> = (0..self.reduced_dim)
            .map(|row| {
                let mut acc = CMat::zeros(m, m);
                for (k, ck) in centered.iter().enumerate() {
                    acc += ck * c(self.map[(row, k)], 0.0);
                }
                herm(&acc)
            })
            .collect();
        // residual: centered - inverse * out
        let mut resid = 0.0f64;
        for (k, ck) in centered.iter().enumerate() {
            let mut back = CMat::zeros(m, m);
            for (row, o) in out.iter().enumerate() {
                back += o * c(self.inverse[(k, row)], 0.0);
            }
            resid = resid.max(crate::linalg::frobenius(&(ck - back)));
        }
        Ok((MatrixTuple::selfadjoint(out)?, resid))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_x, pauli_z, unit};

    #[test]
    fn pauli_disk_radii() {
        let s = FreeConvexSet::matrix_range(MatrixTuple::selfadjoint(vec![pauli_x(), pauli_z()]).unwrap());
        let g = geometry(&s).unwrap();
        assert!((g.inner_radius - 1.0).abs() < 0.01 && (g.bounding_radius - 1.0).abs() < 0.01, "{g:?}");
    }

    #[test]
    fn recoordinatize_reduces_flat_tuple() {
        // (E11, E11) has a segment as level one
        let t = MatrixTuple::selfadjoint(vec![unit(2, 0, 0), unit(2, 0, 0)]).unwrap();
        let r = recoordinatize(&t).unwrap();
        assert_eq!((r.original_dim, r.reduced_dim), (2, 1));
        let (img, res) = r.forward(&t).unwrap();
        assert!(res < 1e-12);
        assert!(crate::linalg::frobenius(&(img.get(0) - r.tuple.get(0))) < 1e-12);
    }
}
