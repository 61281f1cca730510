//! The versioned JSON schema shared by the CLI, reports, and certificates.
//!
//! Field elements are strings "n" / "n/d" over the rationals and plain
//! numbers over a prime field; every top-level document carries
//! `"schema": "gpb-theta/1"`. Encoding is canonical (sorted structure,
//! reduced fractions), so identical values serialize to identical bytes.

use crate::bundles::{MarkedLine, PolyMatrixHom, SplitBundle};
use crate::field::{Field, FieldError, FieldSpec, PrimeField, Rationals};
use crate::gpb::{Gpb, Slope, Structure};
use crate::matrix::{Matrix, Subspace};
use crate::poly::{MultiPoly, UniPoly};
use crate::stability::{SearchParams, StabilityStatus, StabilityVerdict, SubGpbCertificate};
use crate::theta::{ThetaLineSpec, ThetaPolynomial};
use num::rational::Ratio;
use serde_json::{json, Map, Value};
use thiserror::Error;

pub const SCHEMA: &str = "gpb-theta/1";

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("missing or malformed field: {0}")]
    Missing(String),
    #[error("schema mismatch: expected {SCHEMA:?}, got {0:?}")]
    Schema(String),
    #[error("document is for field {got:?}, not the requested {want:?}")]
    FieldSpec { want: FieldSpec, got: FieldSpec },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("invalid value: {0}")]
    Invalid(String),
    #[error(transparent)]
    Parse(#[from] serde_json::Error),
}

fn get<'v>(v: &'v Value, key: &str) -> Result<&'v Value, JsonError> {
    v.get(key).ok_or_else(|| JsonError::Missing(key.to_string()))
}

fn as_array<'v>(v: &'v Value, what: &str) -> Result<&'v Vec<Value>, JsonError> {
    v.as_array()
        .ok_or_else(|| JsonError::Missing(format!("{what}: expected an array")))
}

fn as_i64(v: &Value, what: &str) -> Result<i64, JsonError> {
    v.as_i64()
        .ok_or_else(|| JsonError::Missing(format!("{what}: expected an integer")))
}

pub fn check_schema(v: &Value) -> Result<(), JsonError> {
    match v.get("schema").and_then(Value::as_str) {
        Some(s) if s == SCHEMA => Ok(()),
        Some(s) => Err(JsonError::Schema(s.to_string())),
        None => Err(JsonError::Missing("schema".into())),
    }
}

pub fn field_spec_to_json(spec: &FieldSpec) -> Value {
    serde_json::to_value(spec).expect("FieldSpec serializes")
}

pub fn field_spec_from_json(v: &Value) -> Result<FieldSpec, JsonError> {
    Ok(serde_json::from_value(v.clone())?)
}

fn check_field<F: Field>(field: &F, v: &Value) -> Result<(), JsonError> {
    let got = field_spec_from_json(get(v, "field")?)?;
    if got != field.spec() {
        return Err(JsonError::FieldSpec {
            want: field.spec(),
            got,
        });
    }
    Ok(())
}

pub fn slope_to_json(s: &Slope) -> Value {
    if *s.denom() == 1 {
        Value::String(s.numer().to_string())
    } else {
        Value::String(format!("{}/{}", s.numer(), s.denom()))
    }
}

pub fn slope_from_json(v: &Value) -> Result<Slope, JsonError> {
    let s = v
        .as_str()
        .ok_or_else(|| JsonError::Missing("slope: expected a string".into()))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<i64>()
            .map_err(|e| JsonError::Invalid(format!("slope {s:?}: {e}")))
    };
    match s.split_once('/') {
        None => Ok(Ratio::from_integer(parse(s)?)),
        Some((n, d)) => Ok(Ratio::new(parse(n)?, parse(d)?)),
    }
}

fn matrix_to_json<F: Field>(m: &Matrix<F>) -> Value {
    let f = m.field();
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array(m.row(i).iter().map(|e| f.elem_to_json(e)).collect()))
            .collect(),
    )
}

fn matrix_from_json<F: Field>(field: &F, v: &Value, cols_hint: usize) -> Result<Matrix<F>, JsonError> {
    let rows_v = as_array(v, "matrix")?;
    let mut rows = Vec::with_capacity(rows_v.len());
    for row_v in rows_v {
        let row: Result<Vec<_>, _> = as_array(row_v, "matrix row")?
            .iter()
            .map(|e| field.elem_from_json(e))
            .collect();
        rows.push(row?);
    }
    if rows.is_empty() {
        return Ok(Matrix::zeros(field.clone(), 0, cols_hint));
    }
    Ok(Matrix::from_rows(field.clone(), rows))
}

pub fn marked_line_to_json<F: Field>(line: &MarkedLine<F>) -> Value {
    let f = line.field();
    json!({
        "field": field_spec_to_json(&f.spec()),
        "pairs": line
            .pairs()
            .iter()
            .map(|(a, b)| Value::Array(vec![f.elem_to_json(a), f.elem_to_json(b)]))
            .collect::<Vec<_>>(),
    })
}

pub fn marked_line_from_json<F: Field>(field: &F, v: &Value) -> Result<MarkedLine<F>, JsonError> {
    check_field(field, v)?;
    let mut pairs = Vec::new();
    for pair in as_array(get(v, "pairs")?, "pairs")? {
        let pq = as_array(pair, "pair")?;
        if pq.len() != 2 {
            return Err(JsonError::Invalid("pair must have two points".into()));
        }
        pairs.push((field.elem_from_json(&pq[0])?, field.elem_from_json(&pq[1])?));
    }
    MarkedLine::new(field.clone(), pairs).map_err(|e| JsonError::Invalid(e.to_string()))
}

pub fn split_bundle_to_json(b: &SplitBundle) -> Value {
    Value::Array(b.twists().iter().map(|d| json!(d)).collect())
}

pub fn split_bundle_from_json(v: &Value) -> Result<SplitBundle, JsonError> {
    let twists: Result<Vec<i64>, _> = as_array(v, "splitting_type")?
        .iter()
        .map(|x| as_i64(x, "twist"))
        .collect();
    SplitBundle::new(twists?).map_err(|e| JsonError::Invalid(e.to_string()))
}

pub fn gpb_to_json<F: Field>(v: &Gpb<F>) -> Value {
    let f = v.field();
    let structure = match v.structure() {
        Structure::Graphs(glues) => json!({
            "kind": "graphs",
            "data": glues.iter().map(matrix_to_json).collect::<Vec<_>>(),
        }),
        Structure::Subspaces(subs) => json!({
            "kind": "subspaces",
            "data": subs.iter().map(|s| matrix_to_json(s.basis())).collect::<Vec<_>>(),
        }),
    };
    json!({
        "schema": SCHEMA,
        "field": field_spec_to_json(&f.spec()),
        "splitting_type": split_bundle_to_json(v.bundle()),
        "pairs": marked_line_to_json(v.line())["pairs"].clone(),
        "structure": structure,
    })
}

pub fn gpb_from_json<F: Field>(field: &F, v: &Value) -> Result<Gpb<F>, JsonError> {
    check_schema(v)?;
    check_field(field, v)?;
    let bundle = split_bundle_from_json(get(v, "splitting_type")?)?;
    let line_doc = json!({
        "field": field_spec_to_json(&field.spec()),
        "pairs": get(v, "pairs")?.clone(),
    });
    let line = marked_line_from_json(field, &line_doc)?;
    let structure_v = get(v, "structure")?;
    let kind = get(structure_v, "kind")?
        .as_str()
        .ok_or_else(|| JsonError::Missing("structure.kind".into()))?;
    let data = as_array(get(structure_v, "data")?, "structure.data")?;
    let structure = match kind {
        "graphs" => {
            let glues: Result<Vec<_>, _> = data
                .iter()
                .map(|m| matrix_from_json(field, m, bundle.rank()))
                .collect();
            Structure::Graphs(glues?)
        }
        "subspaces" => {
            let subs: Result<Vec<_>, JsonError> = data
                .iter()
                .map(|m| Ok(Subspace::from_rows(&matrix_from_json(field, m, 2 * bundle.rank())?)))
                .collect();
            Structure::Subspaces(subs?)
        }
        other => return Err(JsonError::Invalid(format!("unknown structure kind {other:?}"))),
    };
    Gpb::new(bundle, line, structure).map_err(|e| JsonError::Invalid(e.to_string()))
}

fn unipoly_to_json<F: Field>(p: &UniPoly<F>) -> Value {
    let f = p.field();
    Value::Array(p.coeffs().iter().map(|c| f.elem_to_json(c)).collect())
}

pub fn poly_matrix_hom_to_json<F: Field>(h: &PolyMatrixHom<F>) -> Value {
    json!({
        "source": split_bundle_to_json(h.source()),
        "target": split_bundle_to_json(h.target()),
        "entries": (0..h.target().rank())
            .map(|j| {
                Value::Array(
                    (0..h.source().rank())
                        .map(|k| unipoly_to_json(h.entry(j, k)))
                        .collect(),
                )
            })
            .collect::<Vec<_>>(),
    })
}

pub fn poly_matrix_hom_from_json<F: Field>(
    field: &F,
    v: &Value,
) -> Result<PolyMatrixHom<F>, JsonError> {
    let source = split_bundle_from_json(get(v, "source")?)?;
    let target = split_bundle_from_json(get(v, "target")?)?;
    let entries_v = as_array(get(v, "entries")?, "entries")?;
    let mut entries = Vec::with_capacity(entries_v.len());
    for (j, row_v) in entries_v.iter().enumerate() {
        let row_arr = as_array(row_v, "entries row")?;
        let mut row = Vec::with_capacity(row_arr.len());
        for (k, coeffs_v) in row_arr.iter().enumerate() {
            let coeffs: Result<Vec<_>, _> = as_array(coeffs_v, "entry coefficients")?
                .iter()
                .map(|c| field.elem_from_json(c))
                .collect();
            let bound = crate::bundles::entry_bound(&source, &target, j, k).max(-1);
            row.push(
                UniPoly::new(field.clone(), coeffs?, bound)
                    .map_err(|e| JsonError::Invalid(e.to_string()))?,
            );
        }
        entries.push(row);
    }
    PolyMatrixHom::new(field.clone(), source, target, entries)
        .map_err(|e| JsonError::Invalid(e.to_string()))
}

pub fn certificate_to_json<F: Field>(c: &SubGpbCertificate<F>) -> Value {
    json!({
        "schema": SCHEMA,
        "inclusion": poly_matrix_hom_to_json(&c.inclusion),
        "induced": c.induced.iter().map(|s| matrix_to_json(s.basis())).collect::<Vec<_>>(),
        "claimed_slope": slope_to_json(&c.claimed_slope),
    })
}

pub fn certificate_from_json<F: Field>(
    field: &F,
    v: &Value,
) -> Result<SubGpbCertificate<F>, JsonError> {
    check_schema(v)?;
    let inclusion = poly_matrix_hom_from_json(field, get(v, "inclusion")?)?;
    let ambient = 2 * inclusion.source().rank();
    let induced: Result<Vec<_>, JsonError> = as_array(get(v, "induced")?, "induced")?
        .iter()
        .map(|m| Ok(Subspace::from_rows(&matrix_from_json(field, m, ambient)?)))
        .collect();
    Ok(SubGpbCertificate {
        inclusion,
        induced: induced?,
        claimed_slope: slope_from_json(get(v, "claimed_slope")?)?,
    })
}

pub fn verdict_to_json<F: Field>(verdict: &StabilityVerdict<F>) -> Value {
    json!({
        "status": serde_json::to_value(verdict.status).expect("status serializes"),
        "witness": verdict.witness.as_ref().map(certificate_to_json).unwrap_or(Value::Null),
        "search_params": serde_json::to_value(&verdict.search_params).expect("params serialize"),
    })
}

pub fn verdict_from_json<F: Field>(
    field: &F,
    v: &Value,
) -> Result<StabilityVerdict<F>, JsonError> {
    let status: StabilityStatus = serde_json::from_value(get(v, "status")?.clone())?;
    let witness = match get(v, "witness")? {
        Value::Null => None,
        w => Some(certificate_from_json(field, w)?),
    };
    let search_params: SearchParams = serde_json::from_value(get(v, "search_params")?.clone())?;
    Ok(StabilityVerdict {
        status,
        witness,
        search_params,
    })
}

pub fn theta_line_to_json<F: Field>(field: &F, l: &ThetaLineSpec<F>) -> Value {
    json!({
        "lambda": l.lambda.iter().map(|x| field.elem_to_json(x)).collect::<Vec<_>>(),
        "degree": l.degree,
    })
}

pub fn theta_line_from_json<F: Field>(field: &F, v: &Value) -> Result<ThetaLineSpec<F>, JsonError> {
    let lambda: Result<Vec<_>, _> = as_array(get(v, "lambda")?, "lambda")?
        .iter()
        .map(|x| field.elem_from_json(x))
        .collect();
    let l = ThetaLineSpec::new(field, lambda?)
        .map_err(|e| JsonError::Invalid(e.to_string()))?;
    let degree = as_i64(get(v, "degree")?, "degree")?;
    if degree != l.degree {
        return Err(JsonError::Invalid(format!(
            "degree {degree} does not match 1 - g = {}",
            l.degree
        )));
    }
    Ok(l)
}

pub fn multi_poly_to_json<F: Field>(p: &MultiPoly<F>) -> Value {
    let f = p.field();
    json!({
        "variables": p.nvars(),
        "terms": p
            .terms()
            .map(|(exps, coeff)| {
                Value::Array(vec![
                    Value::Array(exps.iter().map(|e| json!(e)).collect()),
                    f.elem_to_json(coeff),
                ])
            })
            .collect::<Vec<_>>(),
    })
}

pub fn theta_polynomial_to_json<F: Field>(t: &ThetaPolynomial<F>) -> Value {
    let mut doc = Map::new();
    doc.insert("schema".into(), json!(SCHEMA));
    if let Value::Object(inner) = multi_poly_to_json(&t.expanded) {
        doc.extend(inner);
    }
    doc.insert(
        "product_form".into(),
        Value::Array(t.factors.iter().map(unipoly_to_json).collect()),
    );
    Value::Object(doc)
}

/// Runtime dispatch between the two supported fields.
#[derive(Debug, Clone)]
pub enum AnyField {
    Rationals(Rationals),
    Prime(PrimeField),
}

pub fn open_field(spec: &FieldSpec) -> Result<AnyField, FieldError> {
    match spec {
        FieldSpec::Rationals { .. } => Ok(AnyField::Rationals(Rationals)),
        FieldSpec::PrimeField { characteristic } => {
            Ok(AnyField::Prime(PrimeField::new(*characteristic)?))
        }
    }
}
