//! Certificates back from their JSON encodings, so a stored report can be
//! re-verified without the process that produced it.

use serde_json::Value;

use crate::error::{Error, Result};
use crate::io::{choi_from_json, matrix_from_json, tuple_from_json};
use crate::kcert::{KWitness, MinDecomposition, NetCover};
use crate::linalg::{c, CMat};
use crate::sets::lift::ConeCert;

use super::{Certificate, MembershipVerdict, ScaleBounds, ScaleWitness, Separator, SupportFunctional, Verdict};

fn get<'a>(v: &'a Value, k: &str) -> Result<&'a Value> {
    v.get(k).ok_or_else(|| Error::Parse(format!("certificate is missing `{k}`")))
}

fn num(v: &Value, k: &str) -> Result<f64> {
    let x = get(v, k)?;
    match x {
        Value::String(s) if s == "inf" => Ok(f64::INFINITY),
        Value::String(s) if s == "-inf" => Ok(f64::NEG_INFINITY),
        _ => x.as_f64().ok_or_else(|| Error::Parse(format!("`{k}` must be a number"))),
    }
}

fn uint(v: &Value, k: &str) -> Result<usize> {
    get(v, k)?.as_u64().map(|x| x as usize).ok_or_else(|| Error::Parse(format!("`{k}` must be an integer")))
}

fn text(v: &Value, k: &str) -> Result<String> {
    Ok(get(v, k)?.as_str().ok_or_else(|| Error::Parse(format!("`{k}` must be a string")))?.to_string())
}

fn list<'a>(v: &'a Value, k: &str) -> Result<&'a Vec<Value>> {
    get(v, k)?.as_array().ok_or_else(|| Error::Parse(format!("`{k}` must be a list")))
}

fn kind(v: &Value) -> Result<String> {
    text(v, "kind")
}

fn matrices(v: &Value, k: &str) -> Result<Vec<CMat>> {
    list(v, k)?.iter().map(matrix_from_json).collect()
}

fn strings(v: &Value, k: &str) -> Vec<String> {
    v.get(k)
        .and_then(Value::as_array)
        .map(|a| a.iter().filter_map(|s| s.as_str().map(String::from)).collect())
        .unwrap_or_default()
}

pub fn functional_from_json(v: &Value) -> Result<SupportFunctional> {
    SupportFunctional::new(matrices(v, "entries")?)
}

pub fn cone_cert_from_json(v: &Value) -> Result<ConeCert> {
    let inner = |k: &str| cone_cert_from_json(get(v, k)?).map(Box::new);
    Ok(match kind(v)?.as_str() {
        "choi" => ConeCert::Choi(choi_from_json(get(v, "choi")?)?),
        "pencil" => ConeCert::Pencil,
        "contraction" => ConeCert::Contraction,
        "scaled" => ConeCert::Scaled(inner("inner")?),
        "base" => ConeCert::Base(inner("inner")?),
        "relaxed" => ConeCert::Relaxed(inner("inner")?),
        "product" => ConeCert::Product(inner("left")?, inner("right")?),
        "hull" => ConeCert::Hull { p1: matrix_from_json(get(v, "p1")?)?, left: inner("left")?, right: inner("right")? },
        other => return Err(Error::Parse(format!("unknown cone certificate `{other}`"))),
    })
}

pub fn verdict_from_json(v: &Value) -> Result<MembershipVerdict> {
    let verdict: Verdict = serde_json::from_value(get(v, "verdict")?.clone())?;
    Ok(MembershipVerdict {
        verdict,
        certificate: certificate_from_json(get(v, "certificate")?)?,
        margin: num(v, "margin")?,
        note: v.get("note").and_then(Value::as_str).unwrap_or_default().to_string(),
    })
}

fn decomposition_from_json(v: &Value) -> Result<MinDecomposition> {
    Ok(MinDecomposition {
        k: uint(v, "k")?,
        isometries: matrices(v, "isometries")?,
        members: list(v, "members")?.iter().map(tuple_from_json).collect::<Result<_>>()?,
        member_certs: list(v, "member_certificates")?.iter().map(verdict_from_json).collect::<Result<_>>()?,
        notes: strings(v, "notes"),
    })
}

fn kwitness_from_json(v: &Value) -> Result<KWitness> {
    Ok(KWitness {
        k: uint(v, "k")?,
        family: text(v, "family")?,
        functional: functional_from_json(get(v, "functional")?)?,
        point_value: num(v, "point_value")?,
        relaxed_upper: num(v, "relaxed_upper")?,
    })
}

fn net_from_json(v: &Value) -> Result<NetCover> {
    Ok(NetCover {
        k: uint(v, "k")?,
        dim: uint(v, "dim")?,
        points: uint(v, "points")?,
        covering_radius: num(v, "covering_radius")?,
        lipschitz: num(v, "lipschitz")?,
        min_slack: num(v, "min_slack")?,
        exact: get(v, "exact")?.as_bool().unwrap_or(false),
    })
}

pub fn certificate_from_json(v: &Value) -> Result<Certificate> {
    let inner = |k: &str| certificate_from_json(get(v, k)?).map(Box::new);
    Ok(match kind(v)?.as_str() {
        "cone" => Certificate::Cone(cone_cert_from_json(get(v, "cone")?)?),
        "decomposition" => Certificate::Decomposition(decomposition_from_json(get(v, "decomposition")?)?),
        "net_cover" => Certificate::NetCover(net_from_json(get(v, "net")?)?),
        "separator" => Certificate::Separator(Separator {
            functional: functional_from_json(get(v, "functional")?)?,
            point_value: num(v, "point_value")?,
            support_upper: num(v, "support_upper")?,
        }),
        "pencil_vector" => Certificate::PencilVector {
            vector: list(v, "vector")?
                .iter()
                .map(|z| match z.as_array().map(|p| (p.first().and_then(Value::as_f64), p.get(1).and_then(Value::as_f64))) {
                    Some((Some(re), Some(im))) => Ok(c(re, im)),
                    _ => Err(Error::Parse("pencil vector entries must be [re, im]".into())),
                })
                .collect::<Result<_>>()?,
            eigenvalue: num(v, "eigenvalue")?,
        },
        "k_witness" => Certificate::KWitness(kwitness_from_json(get(v, "witness")?)?),
        "compression" => Certificate::Compression {
            choi: choi_from_json(get(v, "choi")?)?,
            image_out: Box::new(verdict_from_json(get(v, "image")?)?),
        },
        "scaled" => Certificate::Scaled(num(v, "r")?, inner("inner")?),
        "envelope" => Certificate::Envelope(inner("inner")?),
        "product" => Certificate::Product(inner("left")?, inner("right")?),
        "factor" => Certificate::Factor { left: get(v, "left")?.as_bool().unwrap_or(false), inner: inner("inner")? },
        "structural" => Certificate::Structural(text(v, "reason")?),
        "polar" => Certificate::Polar(Box::new(verdict_from_json(get(v, "verdict")?)?)),
        "gap" => Certificate::Gap { lower: num(v, "lower")?, upper: num(v, "upper")?, detail: text(v, "detail")? },
        other => return Err(Error::Parse(format!("unknown certificate `{other}`"))),
    })
}

pub fn witness_from_json(v: &Value) -> Result<ScaleWitness> {
    Ok(match kind(v)?.as_str() {
        "ratio" => ScaleWitness::Ratio {
            functional: functional_from_json(get(v, "functional")?)?,
            point: matrices(v, "point")?,
            point_value: num(v, "point_value")?,
            support_upper: num(v, "support_upper")?,
        },
        "choi" => ScaleWitness::Choi { choi: choi_from_json(get(v, "choi")?)?, scale: num(v, "scale")? },
        "pencil" => ScaleWitness::Pencil { eigenvalue: num(v, "eigenvalue")? },
        "witness_tuple" => ScaleWitness::WitnessTuple {
            tuple: tuple_from_json(get(v, "tuple")?)?,
            blocks: list(v, "blocks")?.iter().filter_map(Value::as_u64).map(|x| x as usize).collect(),
            choi: choi_from_json(get(v, "choi")?)?,
            scale: num(v, "scale")?,
        },
        "probe" => ScaleWitness::Probe { scale: num(v, "scale")?, verdict: Box::new(verdict_from_json(get(v, "verdict")?)?) },
        "structural" => ScaleWitness::Structural(text(v, "reason")?),
        "sandwich" => ScaleWitness::Sandwich { beta: num(v, "beta_upper")?, gamma: num(v, "gamma_upper")? },
        "radii" => ScaleWitness::Radii { formula: text(v, "formula")?, value: num(v, "value")? },
        other => return Err(Error::Parse(format!("unknown scale witness `{other}`"))),
    })
}

pub fn bounds_from_json(v: &Value) -> Result<ScaleBounds> {
    let w = |k: &str| match v.get(k) {
        None | Some(Value::Null) => Ok(None),
        Some(x) => witness_from_json(x).map(Some),
    };
    Ok(ScaleBounds {
        target: text(v, "target")?,
        lower: num(v, "lower")?,
        upper: num(v, "upper")?,
        lower_witness: w("lower_witness")?,
        upper_witness: w("upper_witness")?,
        notes: strings(v, "notes"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Budget;
    use crate::linalg::MatrixTuple;
    use crate::oracles::{inclusion_scale, membership, witness_json};
    use crate::sets::FreeConvexSet;

    #[test]
    fn verdicts_roundtrip() {
        let b = Budget::quick();
        let ando = FreeConvexSet::ando();
        for r in [0.4, 1.3] {
            let x = MatrixTuple::new(vec![crate::linalg::unit(2, 0, 1) * c(2.0 * r, 0.0)]).unwrap();
            let v = membership(&ando, &x, &b).unwrap();
            assert_eq!(verdict_from_json(&v.to_json()).unwrap(), v);
        }
        let s = inclusion_scale(&ando, &FreeConvexSet::contraction_set(), &b).unwrap();
        let back = bounds_from_json(&s.to_json()).unwrap();
        assert_eq!(back.lower, s.lower);
        assert_eq!(back.upper_witness.as_ref().map(witness_json), s.upper_witness.as_ref().map(witness_json));
    }
}
