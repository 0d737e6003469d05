//! JSON file formats. Every `*_to_json` writer emits a canonical,
//! pretty-printed document ending in a newline, so loading and re-saving a
//! canonical file reproduces it byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::assemblage::{label_text, lhs_bound, Assemblage, Pvms, SteeringFunctional};
use crate::entangle::{Realization, TripartiteState};
use crate::error::{Error, Result};
use crate::exact::{format_rational, parse_rational, Rational};
use crate::linalg::{c, qc, CMat, CVec, QMatrix};
use crate::polytope::{BoxVector, Entries};
use crate::scenario::SequentialScenario;

pub fn read(path: &Path) -> Result<String> {
    Ok(fs::read_to_string(path)?)
}

pub fn write(path: &Path, text: &str) -> Result<()> {
    Ok(fs::write(path, text)?)
}

fn parse<T: DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| {
        // serde reports the missing or mistyped field in its message.
        Error::schema(what, e.to_string())
    })
}

pub fn pretty(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

pub fn scenario_from_json(text: &str) -> Result<SequentialScenario> {
    parse(text, "scenario")
}

pub fn scenario_to_json(s: &SequentialScenario) -> String {
    pretty(s)
}

#[derive(Serialize, Deserialize)]
struct BoxFile {
    scenario: SequentialScenario,
    mode: String,
    entries: Vec<Value>,
}

fn rational_value(v: &Value, field: &str) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s).map_err(|_| Error::schema(field, format!("`{s}` is not a rational"))),
        Value::Number(n) => parse_rational(&n.to_string()).map_err(|_| Error::schema(field, format!("`{n}` is not a rational"))),
        other => Err(Error::schema(field, format!("expected a rational string, found {other}"))),
    }
}

fn float_value(v: &Value, field: &str) -> Result<f64> {
    let x = match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().parse::<f64>().ok().or_else(|| parse_rational(s).ok().map(|q| crate::exact::to_f64(&q))),
        _ => None,
    };
    match x {
        Some(x) if x.is_finite() => Ok(x),
        _ => Err(Error::schema(field, format!("expected a finite number, found {v}"))),
    }
}

fn float_json(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

pub fn box_from_json(text: &str) -> Result<BoxVector> {
    let f: BoxFile = parse(text, "box")?;
    let entries = match f.mode.as_str() {
        "rational" => Entries::Rational(f.entries.iter().map(|v| rational_value(v, "entries")).collect::<Result<_>>()?),
        "float" => Entries::Float(f.entries.iter().map(|v| float_value(v, "entries")).collect::<Result<_>>()?),
        m => return Err(Error::schema("mode", format!("expected `rational` or `float`, found `{m}`"))),
    };
    BoxVector::new(f.scenario, entries)
}

pub fn box_to_value(p: &BoxVector) -> Value {
    let (mode, entries): (&str, Vec<Value>) = match p.entries() {
        Entries::Rational(v) => ("rational", v.iter().map(|q| Value::String(format_rational(q))).collect()),
        Entries::Float(v) => ("float", v.iter().map(|&x| float_json(x)).collect()),
    };
    json!({ "scenario": p.scenario(), "mode": mode, "entries": entries })
}

pub fn box_to_json(p: &BoxVector) -> String {
    pretty(&box_to_value(p))
}

pub fn rationals_to_value(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(|q| Value::String(format_rational(q))).collect())
}

/// A functional on boxes: `{"entries":["1","-1",...]}`.
pub fn box_functional_from_json(text: &str) -> Result<Vec<Rational>> {
    #[derive(Deserialize)]
    struct File {
        entries: Vec<Value>,
    }
    let f: File = parse(text, "functional")?;
    f.entries.iter().map(|v| rational_value(v, "entries")).collect()
}

fn complex_float(v: &Value, field: &str) -> Result<crate::linalg::C64> {
    match v.as_array().map(|a| a.as_slice()) {
        Some([re, im]) => Ok(c(float_value(re, field)?, float_value(im, field)?)),
        _ => Err(Error::schema(field, format!("expected [re, im], found {v}"))),
    }
}

fn complex_exact(v: &Value, field: &str) -> Result<Option<crate::linalg::QComplex>> {
    match v.as_array().map(|a| a.as_slice()) {
        Some([Value::String(re), Value::String(im)]) => {
            let re = parse_rational(re).map_err(|_| Error::schema(field, format!("`{re}` is not a rational")))?;
            let im = parse_rational(im).map_err(|_| Error::schema(field, format!("`{im}` is not a rational")))?;
            Ok(Some(qc(re, im)))
        }
        Some([_, _]) => Ok(None),
        _ => Err(Error::schema(field, format!("expected [re, im], found {v}"))),
    }
}

fn rows_of<'a>(v: &'a Value, field: &str) -> Result<Vec<&'a Vec<Value>>> {
    let rows = v.as_array().ok_or_else(|| Error::schema(field, "expected an array of rows"))?;
    let n = rows.len();
    rows.iter()
        .map(|r| match r.as_array() {
            Some(r) if r.len() == n => Ok(r),
            _ => Err(Error::schema(field, format!("expected a square {n}x{n} matrix"))),
        })
        .collect()
}

pub fn matrix_from_value(v: &Value, field: &str) -> Result<CMat> {
    let rows = rows_of(v, field)?;
    let n = rows.len();
    let mut m = CMat::zeros(n, n);
    for (i, r) in rows.iter().enumerate() {
        for (j, z) in r.iter().enumerate() {
            m[(i, j)] = complex_float(z, field)?;
        }
    }
    Ok(m)
}

fn exact_matrix_from_value(v: &Value, field: &str) -> Result<Option<QMatrix>> {
    let rows = rows_of(v, field)?;
    let n = rows.len();
    let mut m = QMatrix::zeros(n);
    for (i, r) in rows.iter().enumerate() {
        for (j, z) in r.iter().enumerate() {
            match complex_exact(z, field)? {
                Some(q) => m.set(i, j, q),
                None => return Ok(None),
            }
        }
    }
    Ok(Some(m))
}

pub fn matrix_to_value(m: &CMat) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| json!([float_json(m[(i, j)].re), float_json(m[(i, j)].im)])).collect()))
            .collect(),
    )
}

fn exact_matrix_to_value(m: &QMatrix) -> Value {
    let n = m.dim();
    Value::Array(
        (0..n)
            .map(|i| {
                Value::Array(
                    (0..n)
                        .map(|j| {
                            let z = m.get(i, j);
                            json!([format_rational(&z.re), format_rational(&z.im)])
                        })
                        .collect(),
                )
            })
            .collect(),
    )
}

#[derive(Serialize, Deserialize)]
struct AssemblageFile {
    dim_c: usize,
    entries: BTreeMap<String, Value>,
}

fn entry_values(entries: &BTreeMap<String, Value>) -> Result<Vec<&Value>> {
    for key in entries.keys() {
        if !(0..16).any(|k| label_text(k) == *key) {
            return Err(Error::schema(format!("entries.{key}"), "unknown label, expected `a,b,x,y` with binary values"));
        }
    }
    (0..16)
        .map(|k| {
            let key = label_text(k);
            entries.get(&key).ok_or_else(|| Error::schema(format!("entries.{key}"), "missing entry"))
        })
        .collect()
}

/// Float entries, plus exact ones when every number is a rational string.
fn parse_entries(entries: &BTreeMap<String, Value>, dim_c: usize) -> Result<(Vec<CMat>, Option<Vec<QMatrix>>)> {
    let values = entry_values(entries)?;
    let mut floats = Vec::with_capacity(16);
    let mut exact = Some(Vec::with_capacity(16));
    for (k, v) in values.iter().enumerate() {
        let field = format!("entries.{}", label_text(k));
        let m = matrix_from_value(v, &field)?;
        if m.nrows() != dim_c {
            return Err(Error::schema(field, format!("expected a {dim_c}x{dim_c} matrix")));
        }
        floats.push(m);
        if let Some(list) = exact.as_mut() {
            match exact_matrix_from_value(v, &field)? {
                Some(q) => list.push(q),
                None => exact = None,
            }
        }
    }
    Ok((floats, exact))
}

fn entries_to_value(floats: &[CMat], exact: Option<&[QMatrix]>) -> Value {
    let mut map = serde_json::Map::new();
    for k in 0..16 {
        let v = match exact {
            Some(q) => exact_matrix_to_value(&q[k]),
            None => matrix_to_value(&floats[k]),
        };
        map.insert(label_text(k), v);
    }
    Value::Object(map)
}

pub fn assemblage_from_json(text: &str) -> Result<Assemblage> {
    let f: AssemblageFile = parse(text, "assemblage")?;
    let (floats, exact) = parse_entries(&f.entries, f.dim_c)?;
    match exact {
        Some(q) => Assemblage::exact(f.dim_c, q),
        None => Assemblage::new(f.dim_c, floats),
    }
}

pub fn assemblage_to_value(s: &Assemblage) -> Value {
    json!({ "dim_c": s.dim_c(), "entries": entries_to_value(s.entries(), s.exact_entries()) })
}

pub fn assemblage_to_json(s: &Assemblage) -> String {
    pretty(&assemblage_to_value(s))
}

pub fn functional_to_value(f: &SteeringFunctional) -> Value {
    let bound = lhs_bound(f);
    let mut v = json!({
        "dim_c": f.dim_c,
        "entries": entries_to_value(&f.rho, f.exact.as_deref()),
        "lhs_bound": float_json(f.lhs_bound),
    });
    if let Some(s) = bound.exact {
        v["lhs_bound_exact"] = Value::String(s.to_string());
    }
    v
}

pub fn functional_to_json(f: &SteeringFunctional) -> String {
    pretty(&functional_to_value(f))
}

/// Reads the normalized states of a functional; the bound is recomputed.
pub fn functional_from_json(text: &str) -> Result<SteeringFunctional> {
    #[derive(Deserialize)]
    struct File {
        dim_c: usize,
        entries: BTreeMap<String, Value>,
    }
    let f: File = parse(text, "functional")?;
    if f.dim_c == 0 {
        return Err(Error::schema("dim_c", "must be at least 1"));
    }
    let (rho, exact) = parse_entries(&f.entries, f.dim_c)?;
    let mut out = SteeringFunctional {
        dim_c: f.dim_c,
        rho,
        exact,
        lhs_bound: 0.0,
    };
    out.lhs_bound = lhs_bound(&out).value;
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct StateFile {
    dims: [usize; 3],
    amplitudes: Vec<Value>,
}

pub fn state_from_value(v: &Value) -> Result<TripartiteState> {
    let f: StateFile = serde_json::from_value(v.clone()).map_err(|e| Error::schema("state", e.to_string()))?;
    let amps = f.amplitudes.iter().map(|z| complex_float(z, "amplitudes")).collect::<Result<Vec<_>>>()?;
    TripartiteState::new(f.dims, CVec::from_vec(amps))
}

pub fn state_from_json(text: &str) -> Result<TripartiteState> {
    let v: Value = parse(text, "state")?;
    state_from_value(&v)
}

pub fn state_to_value(s: &TripartiteState) -> Value {
    let amps: Vec<Value> = s.amplitudes().iter().map(|z| json!([float_json(z.re), float_json(z.im)])).collect();
    json!({ "dims": s.dims(), "amplitudes": amps })
}

pub fn state_to_json(s: &TripartiteState) -> String {
    pretty(&state_to_value(s))
}

/// `[[P_{0|0}, P_{1|0}], [P_{0|1}, P_{1|1}]]`.
pub fn pvms_from_value(v: &Value, field: &str) -> Result<Pvms> {
    let get = |x: usize, a: usize| -> Result<CMat> {
        let m = v.get(x).and_then(|s| s.get(a)).ok_or_else(|| Error::schema(field, "expected [[P_0|0, P_1|0], [P_0|1, P_1|1]]"))?;
        matrix_from_value(m, &format!("{field}[{x}][{a}]"))
    };
    Ok([[get(0, 0)?, get(0, 1)?], [get(1, 0)?, get(1, 1)?]])
}

pub fn pvms_to_value(p: &Pvms) -> Value {
    json!([
        [matrix_to_value(&p[0][0]), matrix_to_value(&p[0][1])],
        [matrix_to_value(&p[1][0]), matrix_to_value(&p[1][1])]
    ])
}

/// `{"state": {...}, "pvms_a": [...], "pvms_b": [...]}`.
pub fn realization_from_json(text: &str) -> Result<Realization> {
    let v: Value = parse(text, "realization")?;
    let field = |name: &str| v.get(name).ok_or_else(|| Error::schema(name, "missing field"));
    Ok(Realization {
        state: state_from_value(field("state")?)?,
        pvms_a: pvms_from_value(field("pvms_a")?, "pvms_a")?,
        pvms_b: pvms_from_value(field("pvms_b")?, "pvms_b")?,
    })
}

pub fn realization_to_value(r: &Realization) -> Value {
    json!({
        "state": state_to_value(&r.state),
        "pvms_a": pvms_to_value(&r.pvms_a),
        "pvms_b": pvms_to_value(&r.pvms_b),
    })
}

pub fn realization_to_json(r: &Realization) -> String {
    pretty(&realization_to_value(r))
}

/// `{"p": matrix, "q": matrix}`.
pub fn projection_pair_from_json(text: &str) -> Result<(CMat, CMat)> {
    let v: Value = parse(text, "projections")?;
    let get = |name: &str| v.get(name).ok_or_else(|| Error::schema(name, "missing field")).and_then(|m| matrix_from_value(m, name));
    Ok((get("p")?, get("q")?))
}

pub fn real_matrix_to_value(m: &nalgebra::DMatrix<f64>) -> Value {
    Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| float_json(m[(i, j)])).collect())).collect())
}
