//! Set expression files: a JSON tree mirroring [`Node`].
//!
//! ```json
//! {"type": "min_over", "k": 1, "base": {"type": "matrix_range", "tuple": {"file": "pauli.tuple.json"}}}
//! ```
//!
//! Node types: `matrix_range`, `free_spectrahedron` (both take `tuple`, inline
//! or `{"file": path}`), `min_over`/`max_over` (`k`, `base`), `scaled` (`r`,
//! `base`), `polar` (`base`), `cartesian`/`hull` (`left`, `right`),
//! `primitive` (`name` in `contraction_set`, `ball_min`, `ball_max`; `n`),
//! `catalog` (`name`, optional `n`).

use std::path::Path;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::io::{tuple_from_json, tuple_to_json};
use crate::linalg::MatrixTuple;

use super::{catalog::catalog, FreeConvexSet, Node, Primitive};

fn field<'a>(v: &'a Value, k: &str) -> Result<&'a Value> {
    v.get(k).ok_or_else(|| Error::Parse(format!("set expression node is missing `{k}`")))
}

fn uint(v: &Value, k: &str) -> Result<usize> {
    field(v, k)?
        .as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| Error::Parse(format!("`{k}` must be a nonnegative integer")))
}

fn tuple_of(v: &Value, base_dir: Option<&Path>) -> Result<MatrixTuple> {
    if let Some(f) = v.get("file").and_then(Value::as_str) {
        let p = match base_dir {
            Some(d) => d.join(f),
            None => f.into(),
        };
        return crate::io::load_tuple(&p);
    }
    tuple_from_json(v)
}

/// Parses a set expression; relative tuple paths resolve against `base_dir`.
pub fn parse_set(v: &Value, base_dir: Option<&Path>) -> Result<FreeConvexSet> {
    let ty = field(v, "type")?
        .as_str()
        .ok_or_else(|| Error::Parse("`type` must be a string".into()))?;
    let sub = |k: &str| parse_set(field(v, k)?, base_dir);
    match ty {
        "matrix_range" => Ok(FreeConvexSet::matrix_range(tuple_of(field(v, "tuple")?, base_dir)?)),
        "free_spectrahedron" => Ok(FreeConvexSet::free_spectrahedron(tuple_of(field(v, "tuple")?, base_dir)?)),
        "min_over" => FreeConvexSet::min_over(uint(v, "k")?, &sub("base")?),
        "max_over" => FreeConvexSet::max_over(uint(v, "k")?, &sub("base")?),
        "scaled" => {
            let r = field(v, "r")?.as_f64().ok_or_else(|| Error::Parse("`r` must be a number".into()))?;
            FreeConvexSet::scale(r, &sub("base")?)
        }
        "polar" => sub("base")?.polar(),
        "cartesian" => FreeConvexSet::cartesian_product(&sub("left")?, &sub("right")?),
        "hull" => FreeConvexSet::hull_product(&sub("left")?, &sub("right")?),
        "primitive" => {
            let name = field(v, "name")?.as_str().unwrap_or_default();
            let p = match name {
                "contraction_set" => Primitive::ContractionSet,
                "ball_min" => Primitive::BallMin(uint(v, "n")?),
                "ball_max" => Primitive::BallMax(uint(v, "n")?),
                other => return Err(Error::Parse(format!("unknown primitive `{other}`"))),
            };
            Ok(FreeConvexSet::primitive(p))
        }
        "catalog" => {
            let name = field(v, "name")?.as_str().unwrap_or_default();
            let n = v.get("n").and_then(Value::as_u64).map(|x| x as usize);
            Ok(catalog(name, n)?.set)
        }
        other => Err(Error::Parse(format!("unknown set expression type `{other}`"))),
    }
}

pub fn load_set(path: &Path) -> Result<FreeConvexSet> {
    let v = crate::io::read_json(path)?;
    parse_set(&v, path.parent())
}

/// Serializes a set with tuples inlined.
pub fn set_to_json(s: &FreeConvexSet) -> Value {
    match s.node() {
        Node::MatrixRange(t) => json!({"type": "matrix_range", "tuple": tuple_to_json(t)}),
        Node::FreeSpectrahedron(a) => json!({"type": "free_spectrahedron", "tuple": tuple_to_json(a)}),
        Node::MinOver(k, b) => json!({"type": "min_over", "k": k, "base": set_to_json(b)}),
        Node::MaxOver(k, b) => json!({"type": "max_over", "k": k, "base": set_to_json(b)}),
        Node::Scaled(r, b) => json!({"type": "scaled", "r": r, "base": set_to_json(b)}),
        Node::CartesianProduct(a, b) => json!({"type": "cartesian", "left": set_to_json(a), "right": set_to_json(b)}),
        Node::HullProduct(a, b) => json!({"type": "hull", "left": set_to_json(a), "right": set_to_json(b)}),
        Node::Primitive(Primitive::ContractionSet) => json!({"type": "primitive", "name": "contraction_set"}),
        Node::Primitive(Primitive::BallMin(n)) => json!({"type": "primitive", "name": "ball_min", "n": n}),
        Node::Primitive(Primitive::BallMax(n)) => json!({"type": "primitive", "name": "ball_max", "n": n}),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_roundtrip() {
        let v = json!({"type": "hull", "left": {"type": "catalog", "name": "contractions"},
                       "right": {"type": "scaled", "r": 2.0, "base": {"type": "primitive", "name": "contraction_set"}}});
        let s = parse_set(&v, None).unwrap();
        assert_eq!(s.d(), 2);
        assert_eq!(parse_set(&set_to_json(&s), None).unwrap(), s);
        assert!(parse_set(&json!({"type": "nope"}), None).is_err());
        assert!(parse_set(&json!({"type": "min_over", "k": 0, "base": {"type": "catalog", "name": "ando"}}), None).is_err());
    }
}
