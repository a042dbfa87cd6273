//! Named example sets.

use crate::error::{Error, Result};
use crate::linalg::{c, pauli_x, pauli_z, unit, MatrixTuple};

use super::{ando_tuple, clifford, FreeConvexSet, Primitive};

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub set: FreeConvexSet,
    /// Generating tuple when the set is a matrix range.
    pub tuple: Option<MatrixTuple>,
    pub description: String,
}

pub const NAMES: &[&str] = &[
    "ando",
    "matrix_units_pair",
    "free_unitaries",
    "pauli",
    "clifford",
    "contractions",
    "ball_min",
    "ball_max",
];

/// `(E_12, E_34)` in `M_4`.
pub fn matrix_units_pair() -> MatrixTuple {
    MatrixTuple::new(vec![unit(4, 0, 1), unit(4, 2, 3)]).expect("shape").with_label("matrix_units_pair")
}

pub fn pauli_pair() -> MatrixTuple {
    MatrixTuple::selfadjoint(vec![pauli_x(), pauli_z()]).expect("hermitian").with_label("pauli")
}

/// Looks up a catalog entry; `n` parameterizes the families.
pub fn catalog(name: &str, n: Option<usize>) -> Result<CatalogEntry> {
    let n = n.unwrap_or(2);
    if n == 0 {
        return Err(Error::InvalidArgument("catalog parameter n must be >= 1".into()));
    }
    let entry = |set: FreeConvexSet, tuple: Option<MatrixTuple>, description: &str| CatalogEntry {
        name: name.to_string(),
        set,
        tuple,
        description: description.to_string(),
    };
    Ok(match name {
        "ando" => entry(
            FreeConvexSet::ando(),
            Some(ando_tuple()),
            "W(2E12): tuples of numerical radius at most 1; the maximal set over the unit disk",
        ),
        "matrix_units_pair" => {
            let t = matrix_units_pair();
            entry(FreeConvexSet::matrix_range(t.clone()), Some(t), "W(E12, E34)")
        }
        "free_unitaries" => {
            let mut set = FreeConvexSet::contraction_set();
            for _ in 1..n {
                set = FreeConvexSet::cartesian_product(&set, &FreeConvexSet::contraction_set())?;
            }
            entry(set, None, "W(U^[n]): n-fold cartesian product of the contraction set")
        }
        "pauli" => {
            let t = pauli_pair();
            entry(FreeConvexSet::matrix_range(t.clone()), Some(t), "W(sigma_x, sigma_z); level one is the unit disk of R^2")
        }
        "clifford" => {
            let t = clifford(n);
            entry(FreeConvexSet::matrix_range(t.clone()), Some(t), "matrix range of n anticommuting selfadjoint unitaries")
        }
        "contractions" => entry(FreeConvexSet::contraction_set(), None, "all contractions (minimal set over the disk)"),
        "ball_min" => entry(
            FreeConvexSet::primitive(Primitive::BallMin(n)),
            None,
            "minimal matrix convex set over the real unit ball of R^n",
        ),
        "ball_max" => entry(
            FreeConvexSet::primitive(Primitive::BallMax(n)),
            None,
            "maximal matrix convex set over the real unit ball of R^n",
        ),
        other => return Err(Error::UnknownCatalog(other.to_string())),
    })
}

/// The scaled Ando generator `r * 2E_12`, handy in tests.
pub fn scaled_ando(r: f64) -> MatrixTuple {
    MatrixTuple::new(vec![unit(2, 0, 1) * c(2.0 * r, 0.0)]).expect("shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::Node;

    #[test]
    fn catalog_examples() {
        let a = catalog("ando", None).unwrap();
        assert_eq!(a.tuple.unwrap().get(0)[(0, 1)], c(2.0, 0.0));
        let p = catalog("matrix_units_pair", None).unwrap();
        assert_eq!(p.set.d(), 2);
        let u = catalog("free_unitaries", Some(2)).unwrap();
        match u.set.node() {
            Node::CartesianProduct(l, r) => {
                assert_eq!(l, &FreeConvexSet::contraction_set());
                assert_eq!(r, &FreeConvexSet::contraction_set());
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(catalog("nope", None), Err(Error::UnknownCatalog(_))));
    }
}
