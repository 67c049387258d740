//! JSON encodings of fields, forms and power series.
//!
//! Output is deterministic: object keys are sorted and every float is written
//! with 17 significant digits.

use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::exterior::{BasisLabel, PolyvectorForm};
use crate::functional::TPolynomial;
use crate::omega::{ComplexForm, FormLabel};
use crate::torus_field::{FourierScalar, Freq, TorusSpec};

/// A float as a JSON number with 17 significant digits (null if not finite).
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let x = if x == 0.0 { 0.0 } else { x };
    serde_json::from_str(&format!("{x:.16e}")).expect("formatted float is valid JSON")
}

pub fn complex(c: Complex64) -> Value {
    json!({"re": num(c.re), "im": num(c.im)})
}

/// Pretty-printed with a trailing newline.
pub fn to_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values are serializable");
    s.push('\n');
    s
}

fn modes(f: &FourierScalar) -> Value {
    Value::Array(
        f.nonzero_modes()
            .into_iter()
            .map(|(k, c)| json!({"a": k.a, "b": k.b, "re": num(c.re), "im": num(c.im)}))
            .collect(),
    )
}

pub fn scalar_to_json(f: &FourierScalar) -> Value {
    let spec = f.spec();
    json!({"n": spec.n, "K": spec.k, "modes": modes(f)})
}

pub fn form_to_json(x: &PolyvectorForm) -> Value {
    let spec = x.spec();
    let terms: Vec<Value> = x
        .terms()
        .iter()
        .filter(|(_, f)| !f.is_zero())
        .map(|(l, f)| json!({"I": l.i.indices(), "J": l.j.indices(), "field": modes(f)}))
        .collect();
    json!({"n": spec.n, "K": spec.k, "terms": terms})
}

pub fn complex_form_to_json(w: &ComplexForm) -> Value {
    let spec = w.spec();
    let terms: Vec<Value> = w
        .terms()
        .iter()
        .filter(|(_, f)| !f.is_zero())
        .map(|(l, f)| json!({"H": l.h.indices(), "A": l.a.indices(), "field": modes(f)}))
        .collect();
    json!({"n": spec.n, "K": spec.k, "terms": terms})
}

pub fn tpoly_to_json(p: &TPolynomial) -> Value {
    json!({
        "n": p.spec.n,
        "K": p.spec.k,
        "order": p.order(),
        "coeffs": p.coeffs.iter().map(form_to_json).collect::<Vec<_>>(),
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModeJson {
    a: Vec<i32>,
    b: Vec<i32>,
    re: f64,
    im: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScalarJson {
    n: usize,
    #[serde(rename = "K")]
    k: usize,
    modes: Vec<ModeJson>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TermJson {
    #[serde(rename = "I")]
    i: Vec<usize>,
    #[serde(rename = "J")]
    j: Vec<usize>,
    field: Vec<ModeJson>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FormJson {
    n: usize,
    #[serde(rename = "K")]
    k: usize,
    terms: Vec<TermJson>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ComplexTermJson {
    #[serde(rename = "H")]
    h: Vec<usize>,
    #[serde(rename = "A")]
    a: Vec<usize>,
    field: Vec<ModeJson>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ComplexFormJson {
    n: usize,
    #[serde(rename = "K")]
    k: usize,
    terms: Vec<ComplexTermJson>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TPolyJson {
    n: usize,
    #[serde(rename = "K")]
    k: usize,
    order: usize,
    coeffs: Vec<Value>,
}

fn build_scalar(spec: TorusSpec, modes: &[ModeJson]) -> Result<FourierScalar> {
    let mut f = FourierScalar::zero(spec);
    for m in modes {
        let k = Freq::new(m.a.clone(), m.b.clone());
        if k.a.len() != spec.n || k.b.len() != spec.n {
            return Err(Error::Invalid(format!("frequency {k:?} does not have length n = {}", spec.n)));
        }
        let c = f.get(&k) + Complex64::new(m.re, m.im);
        f.set(&k, c)?;
    }
    Ok(f)
}

pub fn scalar_from_value(v: Value) -> Result<FourierScalar> {
    let s: ScalarJson = serde_json::from_value(v)?;
    build_scalar(TorusSpec::new(s.n, s.k)?, &s.modes)
}

pub fn form_from_value(v: Value) -> Result<PolyvectorForm> {
    let s: FormJson = serde_json::from_value(v)?;
    let spec = TorusSpec::new(s.n, s.k)?;
    let mut x = PolyvectorForm::zero(spec);
    for t in &s.terms {
        let l = BasisLabel::from_indices(&t.i, &t.j, spec.n)?;
        x.add_term(l, &build_scalar(spec, &t.field)?)?;
    }
    Ok(x)
}

pub fn complex_form_from_value(v: Value) -> Result<ComplexForm> {
    let s: ComplexFormJson = serde_json::from_value(v)?;
    let spec = TorusSpec::new(s.n, s.k)?;
    let mut w = ComplexForm::zero(spec);
    for t in &s.terms {
        let l = FormLabel::from_indices(&t.h, &t.a, spec.n)?;
        w.add_term(l, &build_scalar(spec, &t.field)?)?;
    }
    Ok(w)
}

pub fn tpoly_from_value(v: Value) -> Result<TPolynomial> {
    let s: TPolyJson = serde_json::from_value(v)?;
    let spec = TorusSpec::new(s.n, s.k)?;
    if s.coeffs.len() != s.order + 1 {
        return Err(Error::Invalid(format!("order {} needs {} coefficients, got {}", s.order, s.order + 1, s.coeffs.len())));
    }
    let coeffs = s.coeffs.into_iter().map(form_from_value).collect::<Result<Vec<_>>>()?;
    TPolynomial::new(spec, coeffs)
}

/// Object with the given (key, value) pairs; keys come out sorted.
pub fn object(pairs: Vec<(&str, Value)>) -> Value {
    let mut m = Map::new();
    for (k, v) in pairs {
        m.insert(k.to_string(), v);
    }
    Value::Object(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_17_digits() {
        assert_eq!(num(0.1).to_string(), "1.0000000000000001e-1");
        assert_eq!(num(-2.0).to_string(), "-2.0000000000000000e+0");
        assert_eq!(num(-0.0).to_string(), "0.0000000000000000e+0");
        assert_eq!(num(f64::NAN), Value::Null);
        let back: f64 = serde_json::from_value(num(std::f64::consts::PI)).unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn form_roundtrip_and_order() {
        let spec = TorusSpec::new(2, 1).unwrap();
        let mut x = PolyvectorForm::zero(spec);
        let f = FourierScalar::mode(spec, &Freq::new(vec![1, 0], vec![0, -1]), Complex64::new(0.25, -3.0)).unwrap();
        let g = FourierScalar::constant(spec, Complex64::new(1.0, 0.0));
        x.add_term(BasisLabel::from_indices(&[1, 2], &[2], 2).unwrap(), &f).unwrap();
        x.add_term(BasisLabel::from_indices(&[], &[1], 2).unwrap(), &g).unwrap();
        let v = form_to_json(&x);
        let terms = v["terms"].as_array().unwrap();
        assert_eq!(terms[0]["J"], json!([1]));
        assert_eq!(terms[1]["I"], json!([1, 2]));
        let back = form_from_value(v.clone()).unwrap();
        assert_eq!(back, x);
        assert_eq!(to_string(&form_to_json(&back)), to_string(&v));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let v = json!({"n": 1, "K": 0, "terms": [], "extra": 1});
        assert!(form_from_value(v).is_err());
        let v = json!({"n": 1, "K": 0, "modes": [{"a": [0], "b": [0], "re": 1.0, "im": 0.0, "x": 0}]});
        assert!(scalar_from_value(v).is_err());
    }

    #[test]
    fn bad_indices_are_rejected() {
        let v = json!({"n": 2, "K": 0, "terms": [{"I": [2, 1], "J": [], "field": []}]});
        assert!(form_from_value(v).is_err());
        let v = json!({"n": 1, "K": 0, "modes": [{"a": [1], "b": [0], "re": 1.0, "im": 0.0}]});
        assert!(scalar_from_value(v).is_err());
    }
}
