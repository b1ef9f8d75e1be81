//! JSON documents for fields, matrices, expressions, words, canonical forms,
//! classification reports and verdicts.
//!
//! Objects are built as `serde_json::Value`, whose maps keep keys sorted,
//! so serialized output is canonically ordered.

use serde_json::{json, Map, Value};

use crate::classify::ClassifyReport;
use crate::error::{Error, Result};
use crate::field::{format_scalar, parse_scalar, Field, Hom, RingHom, Scalar};
use crate::mapexpr::{CanonicalForm, Eps, Lambda, MapAtom, MapExpr, ScalarCharacter};
use crate::matrix::{ElementaryGen, Matrix};
use crate::slword::{GlFactorization, TransvectionWord};
use crate::verify::Verdict;

fn bad(msg: impl Into<String>) -> Error {
    Error::Document(msg.into())
}

fn get<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| bad(format!("missing key \"{key}\"")))
}

fn get_str<'a>(v: &'a Value, key: &str) -> Result<&'a str> {
    get(v, key)?.as_str().ok_or_else(|| bad(format!("\"{key}\" must be a string")))
}

fn get_i64(v: &Value, key: &str) -> Result<i64> {
    get(v, key)?.as_i64().ok_or_else(|| bad(format!("\"{key}\" must be an integer")))
}

fn get_usize(v: &Value, key: &str) -> Result<usize> {
    get(v, key)?.as_u64().map(|x| x as usize).ok_or_else(|| bad(format!("\"{key}\" must be a nonnegative integer")))
}

fn get_array<'a>(v: &'a Value, key: &str) -> Result<&'a Vec<Value>> {
    get(v, key)?.as_array().ok_or_else(|| bad(format!("\"{key}\" must be an array")))
}

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text)
        .map_err(|e| Error::Parse { position: e.column(), message: format!("line {}: {e}", e.line()) })
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

pub fn field_to_json(f: Field) -> Value {
    match f {
        Field::Rational => json!({"kind": "rational"}),
        Field::Quadratic(d) => json!({"kind": "quadratic", "d": d}),
    }
}

pub fn field_from_json(v: &Value) -> Result<Field> {
    match get_str(v, "kind")? {
        "rational" => Ok(Field::Rational),
        "quadratic" => Field::quadratic(get_i64(v, "d")?),
        other => Err(bad(format!("unknown field kind \"{other}\""))),
    }
}

/// `rational` or `quadratic:<d>`, as on the command line.
pub fn parse_field_descriptor(text: &str) -> Result<Field> {
    if text == "rational" {
        return Ok(Field::Rational);
    }
    let d = text
        .strip_prefix("quadratic:")
        .and_then(|d| d.parse::<i64>().ok())
        .ok_or_else(|| Error::InvalidField(format!("expected rational or quadratic:<d>, got \"{text}\"")))?;
    Field::quadratic(d)
}

fn scalar_from_json(v: &Value, field: Field) -> Result<Scalar> {
    match v {
        Value::String(s) => parse_scalar(s, field),
        Value::Number(n) if n.is_i64() => Ok(field.int(n.as_i64().expect("checked"))),
        _ => Err(bad(format!("scalar must be a string, got {v}"))),
    }
}

fn scalar_json(x: &Scalar) -> Value {
    Value::String(format_scalar(x))
}

pub fn matrix_to_json(m: &Matrix) -> Value {
    let entries: Vec<Value> = m.rows().iter().map(|r| Value::Array(r.iter().map(scalar_json).collect())).collect();
    json!({"field": field_to_json(m.field()), "n": m.n(), "entries": entries})
}

pub fn matrix_from_json(v: &Value) -> Result<Matrix> {
    let field = field_from_json(get(v, "field")?)?;
    let n = get_usize(v, "n")?;
    let rows = get_array(v, "entries")?;
    if rows.len() != n {
        return Err(Error::DimensionMismatch(format!("matrix document has {} rows, n = {n}", rows.len())));
    }
    let mut data = Vec::with_capacity(n);
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().ok_or_else(|| bad(format!("row {i} must be an array")))?;
        if row.len() != n {
            return Err(Error::DimensionMismatch(format!("row {i} has {} entries, n = {n}", row.len())));
        }
        let parsed = row.iter().enumerate().map(|(j, x)| {
            scalar_from_json(x, field).map_err(|e| match e {
                Error::Parse { position, message } => {
                    Error::Parse { position, message: format!("entry ({}, {}) {x}: {message}", i + 1, j + 1) }
                }
                other => other,
            })
        });
        data.push(parsed.collect::<Result<Vec<_>>>()?);
    }
    Matrix::from_rows(field, data)
}

fn hom_from_name(s: &str) -> Result<Hom> {
    match s {
        "id" => Ok(Hom::Identity),
        "conj" => Ok(Hom::Conjugation),
        other => Err(Error::UnregisteredHom(other.to_string())),
    }
}

pub fn character_to_json(c: &ScalarCharacter) -> Value {
    Value::Array(c.factors().map(|(h, p)| json!({"phi": h.name(), "pow": p})).collect())
}

pub fn character_from_json(v: &Value) -> Result<ScalarCharacter> {
    let items = v.as_array().ok_or_else(|| bad("character must be an array of {phi, pow}"))?;
    let factors = items
        .iter()
        .map(|f| Ok((hom_from_name(get_str(f, "phi")?)?, get_i64(f, "pow")?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScalarCharacter::from_factors(factors))
}

fn table_json(table: &[(Scalar, Scalar)]) -> Value {
    Value::Array(table.iter().map(|(x, y)| json!([format_scalar(x), format_scalar(y)])).collect())
}

fn lambda_json(l: &Lambda) -> Value {
    match l {
        Lambda::Character(c) => character_to_json(c),
        Lambda::Sampled(t) => json!({"sampled": table_json(t)}),
    }
}

fn phi_json(phi: &RingHom) -> Value {
    match phi {
        RingHom::Sampled(t) => json!({"sampled": table_json(t)}),
        other => Value::String(other.registered().expect("registered").name().to_string()),
    }
}

fn eps_name(e: Eps) -> &'static str {
    match e {
        Eps::Plain => "plain",
        Eps::Cofactor => "cofactor",
    }
}

pub fn expr_to_json(e: &MapExpr) -> Value {
    let atoms: Vec<Value> = e
        .atoms()
        .iter()
        .map(|a| match a {
            MapAtom::Conj(c) => json!({"atom": "conj", "R": matrix_to_json(c.matrix())}),
            MapAtom::Cof => json!({"atom": "cof"}),
            MapAtom::Hom(h) => json!({"atom": "hom", "phi": h.name()}),
            MapAtom::DetScale(c) => json!({"atom": "detscale", "lambda": character_to_json(c)}),
            MapAtom::TrivialDet { chars, zero_pad, one_pad } => json!({
                "atom": "trivialdet",
                "chars": chars.iter().map(character_to_json).collect::<Vec<_>>(),
                "zeroPad": zero_pad,
                "onePad": one_pad,
            }),
        })
        .collect();
    json!({"n": e.n(), "field": field_to_json(e.field()), "atoms": atoms, "order": "apply-last-first"})
}

pub fn expr_from_json(v: &Value) -> Result<MapExpr> {
    let n = get_usize(v, "n")?;
    let field = field_from_json(get(v, "field")?)?;
    if let Some(order) = v.get("order") {
        if order != "apply-last-first" {
            return Err(bad(format!("unsupported order {order}")));
        }
    }
    let mut atoms = Vec::new();
    for a in get_array(v, "atoms")? {
        let atom = match get_str(a, "atom")? {
            "conj" => {
                let r = matrix_from_json(get(a, "R")?)?;
                if r.field() != field {
                    return Err(Error::FieldMismatch(format!(
                        "conjugator over {}, expression over {field}",
                        r.field()
                    )));
                }
                MapAtom::conj(r)?
            }
            "cof" => MapAtom::Cof,
            "hom" => MapAtom::Hom(hom_from_name(get_str(a, "phi")?)?),
            "detscale" => MapAtom::DetScale(character_from_json(get(a, "lambda")?)?),
            "trivialdet" => MapAtom::TrivialDet {
                chars: get_array(a, "chars")?.iter().map(character_from_json).collect::<Result<_>>()?,
                zero_pad: get_usize(a, "zeroPad")?,
                one_pad: get_usize(a, "onePad")?,
            },
            other => return Err(bad(format!("unknown atom \"{other}\""))),
        };
        atoms.push(atom);
    }
    MapExpr::new(n, field, atoms)
}

pub fn gen_to_json(g: &ElementaryGen) -> Value {
    match g {
        ElementaryGen::Transvection { i, j, k } => json!({"type": "P", "i": i, "j": j, "k": format_scalar(k)}),
        ElementaryGen::DiagUnit { i, k } => json!({"type": "D", "i": i, "k": format_scalar(k)}),
        ElementaryGen::Swap { i, j } => json!({"type": "S", "i": i, "j": j}),
    }
}

pub fn word_to_json(w: &TransvectionWord) -> Value {
    json!({"gens": w.gens.iter().map(gen_to_json).collect::<Vec<_>>()})
}

/// The word of a GL factorization, led by `D_1(det)` unless `det = 1`.
pub fn factorization_to_json(f: &GlFactorization) -> Value {
    let mut gens = Vec::new();
    if !f.det_scalar.is_one() {
        gens.push(gen_to_json(&ElementaryGen::DiagUnit { i: 1, k: f.det_scalar.clone() }));
    }
    gens.extend(f.word.gens.iter().map(gen_to_json));
    json!({"gens": gens})
}

pub fn word_from_json(v: &Value, field: Field) -> Result<Vec<ElementaryGen>> {
    get_array(v, "gens")?
        .iter()
        .map(|g| {
            Ok(match get_str(g, "type")? {
                "P" => ElementaryGen::Transvection {
                    i: get_usize(g, "i")?,
                    j: get_usize(g, "j")?,
                    k: scalar_from_json(get(g, "k")?, field)?,
                },
                "D" => ElementaryGen::DiagUnit { i: get_usize(g, "i")?, k: scalar_from_json(get(g, "k")?, field)? },
                "S" => ElementaryGen::Swap { i: get_usize(g, "i")?, j: get_usize(g, "j")? },
                other => return Err(bad(format!("unknown generator type \"{other}\""))),
            })
        })
        .collect()
}

/// `{"class", "phi", "lambda", "eps", "R"}`, or `{"class", "chars",
/// "zeroPad", "onePad"}` for trivial forms.
pub fn form_to_json(form: &CanonicalForm) -> Value {
    let mut m = Map::new();
    m.insert("class".into(), json!(form.class_name()));
    match form {
        CanonicalForm::Trivial { chars, zero_pad, one_pad } => {
            m.insert("chars".into(), Value::Array(chars.iter().map(lambda_json).collect()));
            m.insert("zeroPad".into(), json!(zero_pad));
            m.insert("onePad".into(), json!(one_pad));
        }
        CanonicalForm::Degenerate { lambda, phi, r, eps } => {
            m.insert("phi".into(), phi_json(phi));
            m.insert("lambda".into(), lambda_json(lambda));
            m.insert("eps".into(), json!(eps_name(*eps)));
            m.insert("R".into(), matrix_to_json(r));
        }
        CanonicalForm::NonDegenerate { phi, r, eps } => {
            m.insert("phi".into(), phi_json(phi));
            m.insert("lambda".into(), json!([]));
            m.insert("eps".into(), json!(eps_name(*eps)));
            m.insert("R".into(), matrix_to_json(r));
        }
    }
    Value::Object(m)
}

pub fn report_to_json(r: &ClassifyReport) -> Value {
    let Value::Object(mut m) = form_to_json(&r.form) else { unreachable!("forms are objects") };
    m.insert("s".into(), json!(r.s));
    m.insert("l".into(), json!(r.l));
    m.insert("preConjugator".into(), matrix_to_json(&r.pre_conjugator));
    m.insert("verified".into(), json!(r.verified));
    m.insert(
        "probeLog".into(),
        Value::Array(
            r.probe_log.iter().map(|(a, b)| json!({"A": matrix_to_json(a), "image": matrix_to_json(b)})).collect(),
        ),
    );
    Value::Object(m)
}

pub fn verdict_to_json(v: &Verdict) -> Value {
    let cx = match &v.counterexample {
        None => Value::Null,
        Some((a, b)) => json!({"A": matrix_to_json(a), "B": b.as_ref().map(matrix_to_json)}),
    };
    json!({"pass": v.pass, "counterexample": cx, "samples": v.samples, "seed": v.seed})
}
