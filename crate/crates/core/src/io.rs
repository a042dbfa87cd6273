//! JSON encodings: a matrix is a list of rows of `[re, im]` pairs, a tuple is
//! `{"label", "d", "n", "selfadjoint", "matrices"}`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, ChoiMatrix, MatrixTuple};

pub fn matrix_to_json(m: &CMat) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect()))
            .collect(),
    )
}

pub fn matrix_from_json(v: &Value) -> Result<CMat> {
    let rows = v.as_array().ok_or_else(|| Error::Parse("matrix must be a list of rows".into()))?;
    let nr = rows.len();
    if nr == 0 {
        return Err(Error::Parse("matrix has no rows".into()));
    }
    let mut out: Option<CMat> = None;
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().ok_or_else(|| Error::Parse(format!("row {i} is not a list")))?;
        let m = out.get_or_insert_with(|| CMat::zeros(nr, row.len()));
        if row.len() != m.ncols() {
            return Err(Error::Parse(format!("row {i} has {} entries, expected {}", row.len(), m.ncols())));
        }
        for (j, e) in row.iter().enumerate() {
            let z = match e {
                Value::Number(x) => c(x.as_f64().unwrap_or(f64::NAN), 0.0),
                Value::Array(p) if p.len() == 2 => c(
                    p[0].as_f64().ok_or_else(|| Error::Parse("non-numeric entry".into()))?,
                    p[1].as_f64().ok_or_else(|| Error::Parse("non-numeric entry".into()))?,
                ),
                _ => return Err(Error::Parse(format!("entry ({i},{j}) must be [re, im]"))),
            };
            m[(i, j)] = z;
        }
    }
    Ok(out.expect("nonempty"))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TupleFile {
    #[serde(default)]
    label: Option<String>,
    #[serde(default)]
    d: Option<usize>,
    #[serde(default)]
    n: Option<usize>,
    #[serde(default)]
    selfadjoint: bool,
    matrices: Vec<Value>,
}

pub fn tuple_to_json(t: &MatrixTuple) -> Value {
    json!({
        "label": t.label.clone().unwrap_or_default(),
        "d": t.d(),
        "n": t.n(),
        "selfadjoint": t.is_selfadjoint(),
        "matrices": t.entries().iter().map(matrix_to_json).collect::<Vec<_>>(),
    })
}

pub fn tuple_from_json(v: &Value) -> Result<MatrixTuple> {
    let f: TupleFile = serde_json::from_value(v.clone())?;
    let mats = f.matrices.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
    if let Some(d) = f.d {
        if d != mats.len() {
            return Err(Error::Parse(format!("declared d = {d} but {} matrices given", mats.len())));
        }
    }
    if let (Some(n), Some(first)) = (f.n, mats.first()) {
        if n != first.nrows() {
            return Err(Error::Parse(format!("declared n = {n} but matrices have side {}", first.nrows())));
        }
    }
    let t = if f.selfadjoint {
        MatrixTuple::selfadjoint(mats)?
    } else {
        MatrixTuple::new(mats)?
    };
    Ok(match f.label {
        Some(l) if !l.is_empty() => t.with_label(l),
        _ => t,
    })
}

pub fn choi_to_json(j: &ChoiMatrix) -> Value {
    json!({"in_dim": j.in_dim, "out_dim": j.out_dim, "block": matrix_to_json(&j.block)})
}

pub fn choi_from_json(v: &Value) -> Result<ChoiMatrix> {
    let get = |k: &str| {
        v.get(k)
            .and_then(Value::as_u64)
            .map(|x| x as usize)
            .ok_or_else(|| Error::Parse(format!("Choi matrix needs `{k}`")))
    };
    let block = matrix_from_json(v.get("block").ok_or_else(|| Error::Parse("Choi matrix needs `block`".into()))?)?;
    ChoiMatrix::new(block, get("in_dim")?, get("out_dim")?)
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn load_tuple(path: &Path) -> Result<MatrixTuple> {
    tuple_from_json(&read_json(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_y, unit};

    #[test]
    fn tuple_roundtrip() {
        let t = MatrixTuple::new(vec![unit(2, 0, 1) * c(2.0, 0.0), pauli_y()]).unwrap().with_label("t");
        let back = tuple_from_json(&tuple_to_json(&t)).unwrap();
        assert_eq!(back, t);
        assert!(tuple_from_json(&json!({"d": 2, "matrices": [[[1.0]]]})).is_err());
    }
}
