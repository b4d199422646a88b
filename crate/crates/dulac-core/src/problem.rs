//! Problem documents and the canonical JSON forms for scalars, series,
//! and polynomials.
//!
//! Canonical form: objects are emitted with alphabetically ordered keys
//! (serde_json's default map), scalars in their canonical text syntax,
//! two-space pretty printing, trailing newline. Re-emitting a parsed
//! document is byte-identical.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde_json::{json, Map, Value};

use crate::bigfloat::{bf_to_dec, bf_zero, dec_to_rat, rat_to_bf, BigC, Dir, DEFAULT_PREC};
use crate::error::{Error, Result};
use crate::logpoly::LogPoly;
use crate::poly::{Monomial, PolyN2};
use crate::scalar::{rat_to_string, GaussRat, Scalar};
use crate::series::{DulacSeries, EXACT};

#[derive(Clone, Debug)]
pub struct OdeOptions {
    /// Working precision in bits for big-float computations.
    pub prec: usize,
    /// Free-parameter values for resonant orders, keyed by order.
    pub params: BTreeMap<u32, Scalar>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { prec: DEFAULT_PREC, params: BTreeMap::new() }
    }
}

#[derive(Clone, Debug)]
pub struct OdeProblem {
    pub name: String,
    pub f: PolyN2,
    pub seed: DulacSeries,
    pub options: OdeOptions,
}

// ---------------------------------------------------------------------------
// Scalar JSON
// ---------------------------------------------------------------------------

pub fn scalar_to_json(s: &Scalar) -> Value {
    match s {
        Scalar::Exact(g) => {
            if g.im.is_zero() {
                Value::String(rat_to_string(&g.re))
            } else {
                json!({ "im": rat_to_string(&g.im), "re": rat_to_string(&g.re) })
            }
        }
        Scalar::Big(b) => {
            if b.im.is_zero() {
                Value::String(bf_to_dec(&b.re))
            } else {
                json!({ "im": bf_to_dec(&b.im), "re": bf_to_dec(&b.re) })
            }
        }
    }
}

fn real_from_str(s: &str, prec: usize) -> Result<Scalar> {
    Scalar::parse_real(s, prec)
}

pub fn scalar_from_json(v: &Value, prec: usize) -> Result<Scalar> {
    match v {
        Value::String(s) => real_from_str(s, prec),
        Value::Number(n) => {
            // Integers are accepted as a convenience; anything with a
            // fractional part must be written as a string to keep the
            // representation explicit.
            if let Some(i) = n.as_i64() {
                Ok(Scalar::from_int(i))
            } else {
                Err(Error::Schema(format!(
                    "non-integer numeric scalar {n}; write it as a string"
                )))
            }
        }
        Value::Object(o) => {
            let re = o.get("re").ok_or_else(|| Error::Schema("scalar object needs `re`".into()))?;
            let im = o.get("im").ok_or_else(|| Error::Schema("scalar object needs `im`".into()))?;
            let re = scalar_from_json(re, prec)?;
            let im = scalar_from_json(im, prec)?;
            match (&re, &im) {
                (Scalar::Exact(a), Scalar::Exact(b)) => {
                    if !a.im.is_zero() || !b.im.is_zero() {
                        return Err(Error::Schema("nested complex scalar".into()));
                    }
                    Ok(Scalar::Exact(GaussRat::new(a.re.clone(), b.re.clone())))
                }
                _ => {
                    let rb = re.to_bigc(prec);
                    let ib = im.to_bigc(prec);
                    Ok(Scalar::Big(BigC::new(rb.re, ib.re, prec)))
                }
            }
        }
        _ => Err(Error::Schema(format!("malformed scalar {v}"))),
    }
}

// ---------------------------------------------------------------------------
// Series JSON: { "trunc": N, "terms": [ {"k":…, "p":[…]} ] }
// ---------------------------------------------------------------------------

pub fn series_to_json(s: &DulacSeries) -> Value {
    let terms: Vec<Value> = s
        .terms()
        .map(|(k, p)| {
            let coeffs: Vec<Value> = p.coeffs().iter().map(scalar_to_json).collect();
            json!({ "k": k, "p": coeffs })
        })
        .collect();
    let mut obj = Map::new();
    obj.insert("terms".into(), Value::Array(terms));
    if s.trunc() != EXACT {
        obj.insert("trunc".into(), json!(s.trunc()));
    }
    Value::Object(obj)
}

pub fn series_from_json(v: &Value, prec: usize) -> Result<DulacSeries> {
    let o = v.as_object().ok_or_else(|| Error::Schema("series must be an object".into()))?;
    let trunc = match o.get("trunc") {
        None => EXACT,
        Some(t) => t
            .as_u64()
            .filter(|&t| t < EXACT as u64)
            .ok_or_else(|| Error::Schema("`trunc` must be a nonnegative integer".into()))?
            as u32,
    };
    let terms = o
        .get("terms")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Schema("series needs a `terms` array".into()))?;
    let mut out = Vec::new();
    for t in terms {
        let k = t
            .get("k")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Schema("term needs nonnegative integer `k`".into()))?
            as u32;
        if k > trunc {
            return Err(Error::Schema(format!(
                "term order {k} beyond truncation {trunc}"
            )));
        }
        let p = t
            .get("p")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Schema("term needs coefficient array `p`".into()))?;
        let coeffs = p
            .iter()
            .map(|c| scalar_from_json(c, prec))
            .collect::<Result<Vec<_>>>()?;
        out.push((k, LogPoly::from_coeffs(coeffs)));
    }
    Ok(DulacSeries::from_terms(out, trunc))
}

// ---------------------------------------------------------------------------
// Polynomial JSON: array of monomials {"c":…, "x":…, "t":…, "y":[…]}
// ---------------------------------------------------------------------------

pub fn poly_to_json(f: &PolyN2) -> Value {
    let monos: Vec<Value> = f
        .monomials()
        .iter()
        .map(|m| {
            let mut obj = Map::new();
            obj.insert("c".into(), scalar_to_json(&m.coeff));
            if m.t_pow != 0 {
                obj.insert("t".into(), json!(m.t_pow));
            }
            obj.insert("x".into(), json!(m.x_pow));
            obj.insert("y".into(), json!(m.y_pows));
            Value::Object(obj)
        })
        .collect();
    Value::Array(monos)
}

pub fn poly_from_json(v: &Value, n: usize, prec: usize) -> Result<PolyN2> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::Schema("`F` must be an array of monomials".into()))?;
    let mut monomials = Vec::with_capacity(arr.len());
    for m in arr {
        let coeff = scalar_from_json(
            m.get("c").ok_or_else(|| Error::Schema("monomial needs `c`".into()))?,
            prec,
        )?;
        let x_pow = m
            .get("x")
            .map(|x| {
                x.as_u64()
                    .ok_or_else(|| Error::Schema("`x` exponent must be a nonnegative integer".into()))
            })
            .transpose()?
            .unwrap_or(0) as u32;
        let t_pow = m
            .get("t")
            .map(|x| {
                x.as_u64()
                    .ok_or_else(|| Error::Schema("`t` exponent must be a nonnegative integer".into()))
            })
            .transpose()?
            .unwrap_or(0) as u32;
        let y = m
            .get("y")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Schema("monomial needs `y` exponent array".into()))?;
        if y.len() != n + 1 {
            return Err(Error::Schema(format!(
                "y exponent list has length {}, expected {} for order {n}",
                y.len(),
                n + 1
            )));
        }
        let y_pows = y
            .iter()
            .map(|q| {
                q.as_u64().map(|q| q as u32).ok_or_else(|| {
                    Error::Schema("y exponents must be nonnegative integers".into())
                })
            })
            .collect::<Result<Vec<_>>>()?;
        monomials.push(Monomial { coeff, x_pow, t_pow, y_pows });
    }
    Ok(PolyN2::new(n, monomials))
}

// ---------------------------------------------------------------------------
// Problem documents
// ---------------------------------------------------------------------------

pub fn problem_to_json(p: &OdeProblem) -> Value {
    let mut obj = Map::new();
    obj.insert("F".into(), poly_to_json(&p.f));
    obj.insert("name".into(), Value::String(p.name.clone()));
    if p.options.prec != DEFAULT_PREC || !p.options.params.is_empty() {
        let mut opts = Map::new();
        if !p.options.params.is_empty() {
            let mut params = Map::new();
            for (k, v) in &p.options.params {
                params.insert(k.to_string(), scalar_to_json(v));
            }
            opts.insert("params".into(), Value::Object(params));
        }
        if p.options.prec != DEFAULT_PREC {
            opts.insert("prec".into(), json!(p.options.prec));
        }
        obj.insert("options".into(), Value::Object(opts));
    }
    obj.insert("order".into(), json!(p.f.n()));
    obj.insert("seed".into(), series_to_json(&p.seed));
    Value::Object(obj)
}

pub fn parse_problem(doc: &Value) -> Result<OdeProblem> {
    let o = doc
        .as_object()
        .ok_or_else(|| Error::Schema("problem must be an object".into()))?;
    let name = o
        .get("name")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Schema("problem needs a string `name`".into()))?
        .to_string();
    let n = o
        .get("order")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Schema("problem needs integer `order`".into()))? as usize;
    if n < 1 {
        return Err(Error::Schema("equation order must be at least 1".into()));
    }
    let mut options = OdeOptions::default();
    if let Some(opts) = o.get("options") {
        let opts = opts
            .as_object()
            .ok_or_else(|| Error::Schema("`options` must be an object".into()))?;
        if let Some(prec) = opts.get("prec") {
            options.prec = prec
                .as_u64()
                .filter(|&p| (32..=1 << 20).contains(&p))
                .ok_or_else(|| Error::Schema("`prec` must be an integer in [32, 2^20]".into()))?
                as usize;
        }
        if let Some(params) = opts.get("params") {
            let params = params
                .as_object()
                .ok_or_else(|| Error::Schema("`params` must be an object".into()))?;
            for (k, v) in params {
                let order: u32 = k
                    .parse()
                    .map_err(|_| Error::Schema(format!("param key `{k}` is not an order")))?;
                options.params.insert(order, scalar_from_json(v, options.prec)?);
            }
        }
    }
    let f = poly_from_json(
        o.get("F").ok_or_else(|| Error::Schema("problem needs `F`".into()))?,
        n,
        options.prec,
    )?;
    if f.is_zero() {
        return Err(Error::Schema("F is identically zero".into()));
    }
    if f.monomials().iter().any(|m| m.t_pow != 0) {
        return Err(Error::Schema("raw problems must not carry t exponents".into()));
    }
    let seed = series_from_json(
        o.get("seed").ok_or_else(|| Error::Schema("problem needs `seed`".into()))?,
        options.prec,
    )?;
    Ok(OdeProblem { name, f, seed, options })
}

pub fn parse_problem_str(doc: &str) -> Result<OdeProblem> {
    let v: Value = serde_json::from_str(doc)?;
    parse_problem(&v)
}

/// Canonical text of a JSON value: two-space pretty print plus newline.
pub fn canonical_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Parses scalar text that may also be a bare big-float promotion of an
/// exact value; used for CLI `--param k=value` arguments.
pub fn parse_param(text: &str, prec: usize) -> Result<Scalar> {
    Scalar::parse_real(text, prec)
}

/// Big-float value of a rational at the problem precision (helper for
/// option plumbing).
pub fn rat_to_scalar_big(r: &crate::scalar::Rat, prec: usize) -> Scalar {
    Scalar::Big(BigC::new(rat_to_bf(r, prec, Dir::Near), bf_zero(), prec))
}

/// Parses a decimal string to a big scalar (helper kept close to the
/// scalar syntax definition).
pub fn big_scalar_from_dec(s: &str, prec: usize) -> Result<Scalar> {
    let r = dec_to_rat(s)?;
    Ok(rat_to_scalar_big(&r, prec))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The Abel document from the external interface definition.
    pub const ABEL_DOC: &str = r#"
    { "name": "abel2", "order": 1,
      "F": [ {"c":"1","x":0,"y":[1,1]}, {"c":"-1","x":0,"y":[2,0]},
             {"c":"1","x":2,"y":[1,0]}, {"c":"1","x":0,"y":[0,0]} ],
      "seed": { "trunc": 2, "terms": [ {"k":0,"p":["1"]}, {"k":2,"p":["0","-1"]} ] } }
    "#;

    #[test]
    fn abel_document_parses() {
        let p = parse_problem_str(ABEL_DOC).unwrap();
        assert_eq!(p.name, "abel2");
        assert_eq!(p.f.n(), 1);
        assert_eq!(p.f.num_monomials(), 4);
        assert_eq!(p.seed.trunc(), 2);
        assert_eq!(p.seed.coeff(0), LogPoly::one());
        assert_eq!(
            p.seed.coeff(2),
            LogPoly::from_coeffs(vec![Scalar::zero(), Scalar::from_int(-1)])
        );
    }

    #[test]
    fn arity_mismatch_rejected() {
        let doc = r#"{ "name": "bad", "order": 2,
          "F": [ {"c":"1","x":0,"y":[1,0]} ],
          "seed": { "trunc": 0, "terms": [] } }"#;
        match parse_problem_str(doc) {
            Err(Error::Schema(msg)) => assert!(msg.contains("length 2")),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn zero_f_rejected() {
        let doc = r#"{ "name": "bad", "order": 1, "F": [],
          "seed": { "trunc": 0, "terms": [] } }"#;
        match parse_problem_str(doc) {
            Err(Error::Schema(msg)) => assert!(msg.contains("identically zero")),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn round_trip_byte_identical() {
        let p = parse_problem_str(ABEL_DOC).unwrap();
        let emitted = canonical_json(&problem_to_json(&p));
        let p2 = parse_problem_str(&emitted).unwrap();
        let emitted2 = canonical_json(&problem_to_json(&p2));
        assert_eq!(emitted, emitted2);
    }

    #[test]
    fn scalar_forms_round_trip() {
        for text in ["1", "-7/3", "0"] {
            let s = scalar_from_json(&Value::String(text.into()), 128).unwrap();
            assert!(s.is_exact());
            let v = scalar_to_json(&s);
            let s2 = scalar_from_json(&v, 128).unwrap();
            assert_eq!(s, s2);
        }
        // complex exact
        let v = json!({"re": "1/2", "im": "-3"});
        let s = scalar_from_json(&v, 128).unwrap();
        assert_eq!(scalar_to_json(&s), json!({"im": "-3", "re": "1/2"}));
        // big float decimal
        let s = scalar_from_json(&Value::String("2.5e-1".into()), 128).unwrap();
        assert!(!s.is_exact());
        let v = scalar_to_json(&s);
        let s2 = scalar_from_json(&v, 128).unwrap();
        assert_eq!(s, s2);
        assert_eq!(scalar_to_json(&s2), v);
    }

    #[test]
    fn series_exact_vs_truncated() {
        let s = DulacSeries::monomial(1, LogPoly::one(), EXACT);
        let v = series_to_json(&s);
        assert!(v.get("trunc").is_none());
        let s2 = series_from_json(&v, 128).unwrap();
        assert!(s2.is_exact_poly());
        let s = DulacSeries::monomial(1, LogPoly::one(), 9);
        let v = series_to_json(&s);
        assert_eq!(v.get("trunc").unwrap(), &json!(9));
    }

    #[test]
    fn params_in_options() {
        let doc = r#"{ "name": "p", "order": 1,
          "F": [ {"c":"1","x":0,"y":[0,1]} ],
          "options": { "params": { "3": "1" }, "prec": 128 },
          "seed": { "trunc": 0, "terms": [ {"k":0,"p":["3/2"]} ] } }"#;
        let p = parse_problem_str(doc).unwrap();
        assert_eq!(p.options.prec, 128);
        assert_eq!(p.options.params.get(&3), Some(&Scalar::from_int(1)));
        // round trip keeps options
        let emitted = canonical_json(&problem_to_json(&p));
        let p2 = parse_problem_str(&emitted).unwrap();
        assert_eq!(p2.options.prec, 128);
        assert_eq!(p2.options.params.get(&3), Some(&Scalar::from_int(1)));
    }
}
