//! Versioned JSON reports and their standalone re-verification.
//!
//! A report is `{schema, query, inputs, result, config}`. Keys are emitted in
//! sorted order and wall time goes to a `<out>.timing.json` sidecar, so equal
//! inputs and config give byte-identical reports.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde_json::{json, Value};

use crate::config::{Budget, Tolerances};
use crate::constants::{verify_constant_bounds, verify_constants, Constants};
use crate::error::{Error, Result};
use crate::io::{tuple_from_json, tuple_to_json};
use crate::oracles::decode::{bounds_from_json, functional_from_json, verdict_from_json};
use crate::oracles::{plot_level1, support, verify_containment, verify_membership, verify_scale_bounds, Check};
use crate::sets::expr::{parse_set, set_to_json};
use crate::sets::{box_sum, FreeConvexSet};

pub const SCHEMA: &str = "freeconvex/1";

/// Budget and tolerances as run, recorded verbatim into every report.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub budget: Budget,
    pub tol: Tolerances,
}

impl RunConfig {
    pub fn to_json(&self) -> Value {
        json!({"budget": self.budget, "tolerances": self.tol})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let get = |k: &str| v.get(k).cloned().ok_or_else(|| Error::Parse(format!("report config is missing `{k}`")));
        Ok(Self { budget: serde_json::from_value(get("budget")?)?, tol: serde_json::from_value(get("tolerances")?)? })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub query: String,
    pub inputs: Value,
    pub result: Value,
    pub config: RunConfig,
}

impl Report {
    pub fn new(query: impl Into<String>, inputs: Value, result: Value, config: &RunConfig) -> Self {
        Self { query: query.into(), inputs, result, config: config.clone() }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": SCHEMA,
            "query": self.query,
            "inputs": self.inputs,
            "result": self.result,
            "config": self.config.to_json(),
        })
    }

    pub fn to_string_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("json values serialize");
        s.push('\n');
        s
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        match v.get("schema").and_then(Value::as_str) {
            Some(SCHEMA) => {}
            other => return Err(Error::Parse(format!("unsupported report schema {other:?}, expected {SCHEMA}"))),
        }
        let get = |k: &str| v.get(k).cloned().ok_or_else(|| Error::Parse(format!("report is missing `{k}`")));
        Ok(Self {
            query: get("query")?.as_str().unwrap_or_default().to_string(),
            inputs: get("inputs")?,
            result: get("result")?,
            config: RunConfig::from_json(&get("config")?)?,
        })
    }

    /// Writes the report and its timing sidecar.
    pub fn write(&self, out: &Path, wall: Duration) -> Result<()> {
        std::fs::write(out, self.to_string_pretty())?;
        let timing = json!({"schema": SCHEMA, "wall_time_seconds": wall.as_secs_f64()});
        std::fs::write(timing_path(out), serde_json::to_string_pretty(&timing)? + "\n")?;
        Ok(())
    }
}

pub fn timing_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".timing.json");
    PathBuf::from(s)
}

fn input<'a>(r: &'a Report, k: &str) -> Result<&'a Value> {
    r.inputs.get(k).ok_or_else(|| Error::Parse(format!("report inputs are missing `{k}`")))
}

fn set_input(r: &Report, k: &str) -> Result<FreeConvexSet> {
    parse_set(input(r, k)?, None)
}

fn result_field<'a>(r: &'a Report, k: &str) -> Result<&'a Value> {
    r.result.get(k).ok_or_else(|| Error::Parse(format!("report result is missing `{k}`")))
}

/// Equal up to `1e-9` relative error in every number.
fn close(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap_or(f64::NAN), y.as_f64().unwrap_or(f64::NAN));
            (x - y).abs() <= 1e-9 * (1.0 + x.abs().max(y.abs()))
        }
        (Value::Array(x), Value::Array(y)) => x.len() == y.len() && x.iter().zip(y).all(|(p, q)| close(p, q)),
        (Value::Object(x), Value::Object(y)) => x.len() == y.len() && x.iter().all(|(k, p)| y.get(k).is_some_and(|q| close(p, q))),
        _ => a == b,
    }
}

fn same(what: &str, stored: &Value, recomputed: Value) -> Check {
    if close(stored, &recomputed) {
        Check::pass(format!("{what} recomputed within 1e-9"))
    } else {
        Check::fail(format!("{what} differs on recomputation"))
    }
}

/// Re-checks every certificate a report carries against its inputs.
pub fn verify_report(r: &Report) -> Result<Check> {
    let budget = &r.config.budget;
    match r.query.as_str() {
        "membership" => {
            let set = set_input(r, "set")?;
            let x = tuple_from_json(input(r, "point")?)?;
            verify_membership(&set, &x, &verdict_from_json(&r.result)?, budget)
        }
        "contains" => {
            let (a, b) = (set_input(r, "left")?, set_input(r, "right")?);
            verify_containment(&a, &b, &verdict_from_json(&r.result)?, budget)
        }
        "scale" => {
            let (a, b) = (set_input(r, "left")?, set_input(r, "right")?);
            verify_scale_bounds(&a, &b, &bounds_from_json(&r.result)?, budget)
        }
        "hausdorff" => {
            let (a, b) = (set_input(r, "left")?, set_input(r, "right")?);
            let lower = result_field(r, "lower")?.as_f64().unwrap_or(0.0);
            match r.result.get("lower_functional") {
                None | Some(Value::Null) => Ok(Check::pass("no lower-bound functional to check; upper bound rests on scaling witnesses")),
                Some(h) => {
                    // a certified gap in either direction supports the lower bound
                    let h = functional_from_json(h)?;
                    let (sa, sb) = (support(&a, &h, budget)?, support(&b, &h, budget)?);
                    let gap = (sa.lower - sb.upper).max(sb.lower - sa.upper);
                    Ok(if gap >= lower - 1e-6 {
                        Check::pass(format!("support gap {gap:.9} covers the lower bound {lower:.9}"))
                    } else {
                        Check::fail(format!("support gap {gap:.9} below the claimed lower bound {lower:.9}"))
                    })
                }
            }
        }
        "constants" => {
            let set = set_input(r, "set")?;
            verify_constants(&set, &Constants::from_json(result_field(r, "constants")?)?, budget)
        }
        "profile" => {
            let set = set_input(r, "set")?;
            let mut out = Check::pass("profile");
            for p in result_field(r, "profiles")?.as_array().into_iter().flatten() {
                for row in p.get("rows").and_then(Value::as_array).into_iter().flatten() {
                    let k = row.get("k").and_then(Value::as_u64).unwrap_or(1) as usize;
                    let raw = bounds_from_json(row.get("raw").ok_or_else(|| Error::Parse("profile row without `raw`".into()))?)?;
                    out = out.and(verify_constant_bounds(&set, k, &raw, budget)?);
                }
            }
            Ok(out)
        }
        "polar" => Ok(same("polar", &r.result, set_to_json(&set_input(r, "set")?.polar()?))),
        "boxsum" => {
            let t = box_sum(&tuple_from_json(input(r, "left")?)?, &tuple_from_json(input(r, "right")?)?)?;
            Ok(same("box sum", &r.result, tuple_to_json(&t)))
        }
        "plot-range" => {
            let set = set_input(r, "set")?;
            let coords: (usize, usize) = serde_json::from_value(input(r, "coords")?.clone())?;
            let res = input(r, "resolution")?.as_u64().unwrap_or(360) as usize;
            let poly = plot_level1(&set, coords, res)?;
            Ok(same("polygon", result_field(r, "polygon")?, json!(poly)))
        }
        "catalog" | "suite" => Ok(Check::pass(format!("{} reports carry no certificates", r.query))),
        other => Err(Error::Parse(format!("unknown report query `{other}`"))),
    }
}
