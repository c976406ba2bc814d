//! JSON interchange: groupoid files with an optional `mu` block, functions
//! `{element: [re, im]}`, matrices as rows of `[re, im]`, and witness files.

use crate::algebra::GroupoidFunction;
use crate::cartan::{CartanOperator, CbapWitness};
use crate::error::{Error, Result};
use crate::fell::GroupoidRep;
use crate::groupoid::{validate_capped, FiniteGroupoid, RawGroupoid};
use crate::linalg::{c, CMat, C64};
use crate::measure::{full_support_uniform, UnitWeight, Weight};
use crate::multiplier::WeakAmenabilityWitness;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum WeightValue {
    Number(f64),
    Text(String),
}

impl WeightValue {
    pub fn to_weight(&self) -> Result<Weight> {
        match self {
            WeightValue::Number(x) => Ok(Weight::Float(*x)),
            WeightValue::Text(s) => Weight::parse(s),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GroupoidFile {
    #[serde(flatten)]
    pub groupoid: RawGroupoid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<BTreeMap<String, WeightValue>>,
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

pub fn from_value<T: for<'de> Deserialize<'de>>(v: Value) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::InvalidInput(e.to_string()))
}

/// Validated groupoid and its weight (uniform when `mu` is absent).
pub fn groupoid_from_file(file: &GroupoidFile, max_elements: usize) -> Result<(FiniteGroupoid, UnitWeight)> {
    let g = validate_capped(&file.groupoid, max_elements)?;
    let w = match &file.mu {
        None => full_support_uniform(&g)?,
        Some(mu) => {
            for k in mu.keys() {
                if g.index_of(k).map_or(true, |a| !g.is_unit(a)) {
                    return Err(Error::InvalidInput(format!("mu names {k}, which is not a unit")));
                }
            }
            let vals = g
                .units()
                .iter()
                .map(|&x| mu.get(g.name(x)).map_or(Ok(Weight::Float(0.0)), WeightValue::to_weight))
                .collect::<Result<Vec<_>>>()?;
            UnitWeight::new(&g, &vals)?
        }
    };
    Ok((g, w))
}

pub fn groupoid_file(g: &FiniteGroupoid, w: Option<&UnitWeight>) -> GroupoidFile {
    let mu = w.map(|w| {
        g.units()
            .iter()
            .enumerate()
            .map(|(k, &x)| {
                let v = match w.mu_exact(g, x) {
                    Some(r) if *r.denom() == 1 => WeightValue::Text(r.numer().to_string()),
                    Some(r) => WeightValue::Text(format!("{}/{}", r.numer(), r.denom())),
                    None => WeightValue::Number(w.values()[k]),
                };
                (g.name(x).to_string(), v)
            })
            .collect()
    });
    GroupoidFile { groupoid: g.to_raw(), mu }
}

pub fn complex_from_value(v: &Value) -> Result<C64> {
    match v {
        Value::Number(n) => Ok(c(n.as_f64().unwrap_or(f64::NAN), 0.0)),
        Value::Array(a) if a.len() == 2 => {
            let re = a[0].as_f64().ok_or_else(|| Error::InvalidInput("complex entry must be [re, im]".into()))?;
            let im = a[1].as_f64().ok_or_else(|| Error::InvalidInput("complex entry must be [re, im]".into()))?;
            Ok(c(re, im))
        }
        _ => Err(Error::InvalidInput(format!("bad complex value {v}"))),
    }
}

pub fn complex_to_value(z: C64) -> Value {
    json!([z.re, z.im])
}

/// `{element: [re, im]}`; missing elements are 0.
pub fn function_from_value(g: &FiniteGroupoid, v: &Value) -> Result<GroupoidFunction> {
    let obj = v.as_object().ok_or_else(|| Error::InvalidInput("function must be an object".into()))?;
    let mut f = GroupoidFunction::zeros(g.len());
    for (k, z) in obj {
        let a = g.index_of(k).ok_or_else(|| Error::InvalidInput(format!("unknown element {k}")))?;
        f.values[a] = complex_from_value(z)?;
    }
    Ok(f)
}

pub fn function_to_value(g: &FiniteGroupoid, f: &GroupoidFunction) -> Value {
    let m: serde_json::Map<String, Value> =
        (0..g.len()).map(|a| (g.name(a).to_string(), complex_to_value(f.values[a]))).collect();
    Value::Object(m)
}

pub fn matrix_from_value(v: &Value) -> Result<CMat> {
    let rows = v.as_array().ok_or_else(|| Error::InvalidInput("matrix must be an array of rows".into()))?;
    let entries = rows
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| Error::InvalidInput("matrix row must be an array".into()))?
                .iter()
                .map(complex_from_value)
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let m = entries.len();
    let n = entries.first().map_or(0, Vec::len);
    if entries.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch("ragged matrix".into()));
    }
    Ok(CMat::from_fn(m, n, |i, j| entries[i][j]))
}

pub fn matrix_to_value(m: &CMat) -> Value {
    Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| complex_to_value(m[(i, j)])).collect())).collect())
}

/// `{"c": C, "phis": [function, ...]}`.
pub fn wa_witness_from_value(g: &FiniteGroupoid, v: &Value) -> Result<WeakAmenabilityWitness> {
    let c = v.get("c").and_then(Value::as_f64).ok_or_else(|| Error::InvalidInput("witness needs a numeric c".into()))?;
    let phis = v
        .get("phis")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::InvalidInput("witness needs phis".into()))?
        .iter()
        .map(|p| function_from_value(g, p))
        .collect::<Result<_>>()?;
    Ok(WeakAmenabilityWitness { phis, c })
}

pub fn wa_witness_to_value(g: &FiniteGroupoid, w: &WeakAmenabilityWitness) -> Value {
    json!({"c": w.c, "phis": w.phis.iter().map(|p| function_to_value(g, p)).collect::<Vec<_>>()})
}

/// An operator as `{"pairs": [[g, h], ...]}` (T = Σ Θ_{g,h}) or `{"dense": matrix}`.
pub fn operator_from_value(g: &FiniteGroupoid, v: &Value) -> Result<CartanOperator> {
    if let Some(pairs) = v.get("pairs").and_then(Value::as_array) {
        let pairs = pairs
            .iter()
            .map(|p| match p.as_array().map(Vec::as_slice) {
                Some([a, b]) => Ok((function_from_value(g, a)?, function_from_value(g, b)?)),
                _ => Err(Error::InvalidInput("pair must be [g, h]".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(CartanOperator::from_pairs(g, pairs));
    }
    if let Some(d) = v.get("dense") {
        let m = matrix_from_value(d)?;
        if m.shape() != (g.len(), g.len()) {
            return Err(Error::DimensionMismatch(format!("dense operator has shape {:?}", m.shape())));
        }
        return Ok(CartanOperator::from_dense(m));
    }
    Err(Error::InvalidInput("operator needs pairs or dense".into()))
}

pub fn operator_to_value(g: &FiniteGroupoid, t: &CartanOperator) -> Value {
    if t.pairs.is_empty() {
        json!({"dense": matrix_to_value(&t.dense)})
    } else {
        json!({"pairs": t.pairs.iter().map(|(a, b)| json!([function_to_value(g, a), function_to_value(g, b)])).collect::<Vec<_>>()})
    }
}

/// `{"c": C, "ops": [operator, ...]}`.
pub fn cbap_witness_from_value(g: &FiniteGroupoid, v: &Value) -> Result<CbapWitness> {
    let c = v.get("c").and_then(Value::as_f64).ok_or_else(|| Error::InvalidInput("witness needs a numeric c".into()))?;
    let ops = v
        .get("ops")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::InvalidInput("witness needs ops".into()))?
        .iter()
        .map(|o| operator_from_value(g, o))
        .collect::<Result<_>>()?;
    Ok(CbapWitness { ops, c })
}

pub fn cbap_witness_to_value(g: &FiniteGroupoid, w: &CbapWitness) -> Value {
    json!({"c": w.c, "ops": w.ops.iter().map(|t| operator_to_value(g, t)).collect::<Vec<_>>()})
}

/// `{"dim": d, "pi": {element: matrix}}`; missing elements map to 0.
pub fn rep_from_value(g: &FiniteGroupoid, v: &Value) -> Result<GroupoidRep> {
    let dim = v.get("dim").and_then(Value::as_u64).ok_or_else(|| Error::InvalidInput("representation needs dim".into()))? as usize;
    let obj = v.get("pi").and_then(Value::as_object).ok_or_else(|| Error::InvalidInput("representation needs pi".into()))?;
    let mut pi = vec![CMat::zeros(dim, dim); g.len()];
    for (k, m) in obj {
        let a = g.index_of(k).ok_or_else(|| Error::InvalidInput(format!("unknown element {k}")))?;
        let m = matrix_from_value(m)?;
        if m.shape() != (dim, dim) {
            return Err(Error::DimensionMismatch(format!("pi({k}) has shape {:?}", m.shape())));
        }
        pi[a] = m;
    }
    Ok(GroupoidRep { dim, pi })
}

pub fn rep_to_value(g: &FiniteGroupoid, rep: &GroupoidRep) -> Value {
    let pi: serde_json::Map<String, Value> = (0..g.len()).map(|a| (g.name(a).to_string(), matrix_to_value(&rep.pi[a]))).collect();
    json!({"dim": rep.dim, "pi": pi})
}
