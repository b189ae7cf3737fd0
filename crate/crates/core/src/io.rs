//! JSON quiver files, representation files, and the textual forms of series
//! and HN types.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::ff::FMat;
use crate::flow::{CMat, CRep};
use crate::hn::HNType;
use crate::quiver::{DimensionVector, Quiver, StabilityParam};
use crate::replab::{CensusReport, FFRep};
use crate::series::TruncatedSeries;
use crate::supermixed::{validate_supermixed, SymmetricStructure};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrowSpec {
    pub name: String,
    pub tail: String,
    pub head: String,
}

/// Involutions and signs keyed by vertex and arrow name. Missing involution
/// entries mean "fixed", missing signs mean `+1`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetricSpec {
    #[serde(default)]
    pub vertex_involution: BTreeMap<String, String>,
    #[serde(default)]
    pub arrow_involution: BTreeMap<String, String>,
    #[serde(default)]
    pub vertex_signs: BTreeMap<String, i8>,
    #[serde(default)]
    pub arrow_signs: BTreeMap<String, i8>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Defaults {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuiverFile {
    pub vertices: Vec<String>,
    #[serde(default)]
    pub arrows: Vec<ArrowSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetric: Option<SymmetricSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defaults: Option<Defaults>,
}

#[derive(Debug, Clone)]
pub struct ParsedQuiver {
    pub quiver: Quiver,
    pub symmetric: Option<SymmetricStructure>,
    pub defaults: Defaults,
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column()))
}

pub fn parse_quiver_file(text: &str) -> Result<ParsedQuiver> {
    let file: QuiverFile = serde_json::from_str(text).map_err(json_error)?;
    file.build()
}

impl QuiverFile {
    pub fn build(&self) -> Result<ParsedQuiver> {
        let arrows: Vec<(&str, &str, &str)> = self
            .arrows
            .iter()
            .map(|a| (a.name.as_str(), a.tail.as_str(), a.head.as_str()))
            .collect();
        let vertices: Vec<&str> = self.vertices.iter().map(String::as_str).collect();
        let quiver = Quiver::new(&vertices, &arrows).map_err(|e| Error::Parse(e.to_string()))?;
        let symmetric = self.symmetric.as_ref().map(|s| s.resolve(&quiver)).transpose()?;
        if let Some(s) = &symmetric {
            validate_supermixed(&quiver, s).map_err(|v| Error::Parse(format!("symmetric structure: {}", v.join("; "))))?;
        }
        let defaults = self.defaults.clone().unwrap_or_default();
        if let Some(d) = &defaults.dim {
            quiver.check_len(d.len()).map_err(|e| Error::Parse(format!("defaults.dim: {e}")))?;
        }
        if let Some(t) = &defaults.theta {
            quiver.check_len(t.len()).map_err(|e| Error::Parse(format!("defaults.theta: {e}")))?;
        }
        Ok(ParsedQuiver {
            quiver,
            symmetric,
            defaults,
        })
    }

    pub fn from_quiver(q: &Quiver, s: Option<&SymmetricStructure>) -> Self {
        let symmetric = s.map(|s| {
            let v = |i: usize| q.vertices()[i].clone();
            let a = |i: usize| q.arrows()[i].name.clone();
            SymmetricSpec {
                vertex_involution: s.vertex_involution.iter().enumerate().map(|(i, &j)| (v(i), v(j))).collect(),
                arrow_involution: s.arrow_involution.iter().enumerate().map(|(i, &j)| (a(i), a(j))).collect(),
                vertex_signs: s.vertex_signs.iter().enumerate().map(|(i, &e)| (v(i), e)).collect(),
                arrow_signs: s.arrow_signs.iter().enumerate().map(|(i, &e)| (a(i), e)).collect(),
            }
        });
        QuiverFile {
            vertices: q.vertices().to_vec(),
            arrows: q
                .arrows()
                .iter()
                .map(|a| ArrowSpec {
                    name: a.name.clone(),
                    tail: q.vertices()[a.tail].clone(),
                    head: q.vertices()[a.head].clone(),
                })
                .collect(),
            symmetric,
            defaults: None,
        }
    }
}

impl SymmetricSpec {
    pub fn resolve(&self, q: &Quiver) -> Result<SymmetricStructure> {
        let vertex = |name: &str, what: &str| {
            q.vertex_index(name)
                .ok_or_else(|| Error::Parse(format!("symmetric.{what}: unknown vertex {name:?}")))
        };
        let arrow = |name: &str, what: &str| {
            q.arrow_index(name)
                .ok_or_else(|| Error::Parse(format!("symmetric.{what}: unknown arrow {name:?}")))
        };
        let mut s = SymmetricStructure {
            vertex_involution: (0..q.num_vertices()).collect(),
            arrow_involution: (0..q.arrows().len()).collect(),
            vertex_signs: vec![1; q.num_vertices()],
            arrow_signs: vec![1; q.arrows().len()],
        };
        for (k, v) in &self.vertex_involution {
            s.vertex_involution[vertex(k, "vertex_involution")?] = vertex(v, "vertex_involution")?;
        }
        for (k, v) in &self.arrow_involution {
            s.arrow_involution[arrow(k, "arrow_involution")?] = arrow(v, "arrow_involution")?;
        }
        for (k, &e) in &self.vertex_signs {
            s.vertex_signs[vertex(k, "vertex_signs")?] = e;
        }
        for (k, &e) in &self.arrow_signs {
            s.arrow_signs[arrow(k, "arrow_signs")?] = e;
        }
        Ok(s)
    }
}

/// `"p/q"`, or `"p"` for integers.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
            let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(p, q))
        }
        None => Ok(BigRational::from_integer(BigInt::from_str(s).map_err(|_| bad())?)),
    }
}

/// `[[exp,"p/q"],...]` over the nonzero coefficients.
pub fn series_to_json(s: &TruncatedSeries) -> Value {
    Value::Array(
        s.terms()
            .map(|(k, c)| Value::Array(vec![Value::from(k), Value::from(format_rational(c))]))
            .collect(),
    )
}

pub fn series_from_json(v: &Value, degree: u32) -> Result<TruncatedSeries> {
    let bad = || Error::Parse(format!("expected [[exponent, \"p/q\"], ...], got {v}"));
    let items = v.as_array().ok_or_else(bad)?;
    let mut terms = Vec::new();
    for item in items {
        let pair = item.as_array().filter(|p| p.len() == 2).ok_or_else(bad)?;
        let k = pair[0].as_u64().and_then(|k| u32::try_from(k).ok()).ok_or_else(bad)?;
        let c = parse_rational(pair[1].as_str().ok_or_else(bad)?)?;
        terms.push((k, c));
    }
    TruncatedSeries::from_terms(degree, terms).map_err(|e| Error::Parse(e.to_string()))
}

fn parse_vector(s: &str) -> Result<DimensionVector> {
    let inner = s
        .trim()
        .strip_prefix('(')
        .and_then(|x| x.strip_suffix(')'))
        .ok_or_else(|| Error::Parse(format!("expected (d1,...,dn), got {s:?}")))?;
    parse_list::<u32>(inner).map(DimensionVector)
}

/// Comma-separated list, as used for `--dim` and `--theta`.
pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|x| x.trim().parse::<T>().map_err(|_| Error::Parse(format!("bad list entry {x:?} in {s:?}"))))
        .collect()
}

impl FromStr for HNType {
    type Err = Error;

    /// Parses `"(1,0) > (0,1)"`. Slope ordering is not checked here.
    fn from_str(s: &str) -> Result<Self> {
        let pieces = s.split('>').map(parse_vector).collect::<Result<Vec<_>>>()?;
        if pieces.iter().any(|p| p.len() != pieces[0].len()) {
            return Err(Error::Parse(format!("pieces of {s:?} differ in length")));
        }
        Ok(HNType(pieces))
    }
}

pub fn census_to_json(r: &CensusReport) -> Value {
    let entries: Vec<Value> = r
        .entries
        .iter()
        .map(|e| {
            serde_json::json!({
                "hn_type": e.hn_type.to_string(),
                "observed": e.observed.to_string(),
                "predicted": e.predicted.to_string(),
            })
        })
        .collect();
    serde_json::json!({
        "field": r.field,
        "dims": r.dims,
        "theta": r.theta,
        "entries": entries,
        "total": r.total.to_string(),
        "matches": r.matches,
    })
}

pub fn census_from_json(v: &Value) -> Result<CensusReport> {
    let bad = |what: &str| Error::Parse(format!("census report: bad or missing {what}"));
    let count = |x: &Value, what: &str| x.as_str().and_then(|s| s.parse::<u128>().ok()).ok_or_else(|| bad(what));
    let entries = v["entries"]
        .as_array()
        .ok_or_else(|| bad("entries"))?
        .iter()
        .map(|e| {
            Ok(crate::replab::CensusEntry {
                hn_type: e["hn_type"].as_str().ok_or_else(|| bad("hn_type"))?.parse()?,
                observed: count(&e["observed"], "observed")?,
                predicted: count(&e["predicted"], "predicted")?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CensusReport {
        field: v["field"].as_u64().and_then(|f| u32::try_from(f).ok()).ok_or_else(|| bad("field"))?,
        dims: serde_json::from_value(v["dims"].clone()).map_err(|_| bad("dims"))?,
        theta: serde_json::from_value(v["theta"].clone()).map_err(|_| bad("theta"))?,
        entries,
        total: count(&v["total"], "total")?,
        matches: v["matches"].as_bool().ok_or_else(|| bad("matches"))?,
    })
}

/// A matrix entry: a real number or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn complex(self) -> Complex64 {
        match self {
            Entry::Real(x) => Complex64::new(x, 0.0),
            Entry::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

/// A representation file: per-arrow row-major matrices keyed by arrow name.
/// Missing arrows are zero maps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<u32>,
    pub maps: BTreeMap<String, Vec<Vec<Entry>>>,
}

impl RepFile {
    pub fn parse(text: &str) -> Result<RepFile> {
        serde_json::from_str(text).map_err(json_error)
    }

    fn resolve_dims(&self, q: &Quiver, dims: Option<&DimensionVector>) -> Result<DimensionVector> {
        let d = match (&self.dims, dims) {
            (Some(a), Some(b)) if a[..] != b[..] => {
                return Err(Error::Parse(format!("file dimension vector {a:?} differs from {b}")))
            }
            (Some(a), _) => DimensionVector(a.clone()),
            (None, Some(b)) => b.clone(),
            (None, None) => return Err(Error::Parse("no dimension vector given".into())),
        };
        q.check_len(d.len()).map_err(|e| Error::Parse(e.to_string()))?;
        for name in self.maps.keys() {
            if q.arrow_index(name).is_none() {
                return Err(Error::Parse(format!("maps: unknown arrow {name:?}")));
            }
        }
        Ok(d)
    }

    fn matrix(&self, q: &Quiver, d: &DimensionVector, arrow: usize) -> Result<Option<&Vec<Vec<Entry>>>> {
        let a = &q.arrows()[arrow];
        let Some(m) = self.maps.get(&a.name) else {
            return Ok(None);
        };
        let (h, t) = (d[a.head] as usize, d[a.tail] as usize);
        let ok = if h == 0 { m.is_empty() || m.iter().all(|r| r.is_empty()) } else { m.len() == h && m.iter().all(|r| r.len() == t) };
        if !ok {
            return Err(Error::Parse(format!("arrow {}: expected a {h}x{t} matrix", a.name)));
        }
        Ok(Some(m))
    }

    pub fn to_crep(&self, q: &Quiver, dims: Option<&DimensionVector>) -> Result<CRep> {
        let d = self.resolve_dims(q, dims)?;
        let mut maps = Vec::new();
        for (i, a) in q.arrows().iter().enumerate() {
            let (h, t) = (d[a.head] as usize, d[a.tail] as usize);
            let m = match self.matrix(q, &d, i)? {
                Some(m) => CMat::from_fn(h, t, |r, c| m[r][c].complex()),
                None => CMat::zeros(h, t),
            };
            maps.push(m);
        }
        CRep::new(q, d, maps)
    }

    pub fn to_ffrep(&self, q: &Quiver, dims: Option<&DimensionVector>, field: u32) -> Result<FFRep> {
        if let Some(f) = self.field {
            if f != field {
                return Err(Error::Parse(format!("file field {f} differs from {field}")));
            }
        }
        let d = self.resolve_dims(q, dims)?;
        let mut maps = Vec::new();
        for (i, a) in q.arrows().iter().enumerate() {
            let (h, t) = (d[a.head] as usize, d[a.tail] as usize);
            let m = match self.matrix(q, &d, i)? {
                Some(m) => {
                    let rows = m
                        .iter()
                        .map(|row| row.iter().map(|&e| integer_entry(e, field, &a.name)).collect::<Result<Vec<_>>>())
                        .collect::<Result<Vec<_>>>()?;
                    if h == 0 {
                        FMat::zeros(0, t)
                    } else {
                        FMat::from_rows(&rows, t, field)?
                    }
                }
                None => FMat::zeros(h, t),
            };
            maps.push(m);
        }
        FFRep::new(q, field, d, maps)
    }

    pub fn from_ffrep(q: &Quiver, r: &FFRep) -> RepFile {
        RepFile {
            dims: Some(r.dims.0.clone()),
            field: Some(r.field),
            maps: q
                .arrows()
                .iter()
                .zip(&r.maps)
                .map(|(a, m)| {
                    let rows = m.to_rows().into_iter().map(|row| row.into_iter().map(|x| Entry::Real(x as f64)).collect()).collect();
                    (a.name.clone(), rows)
                })
                .collect(),
        }
    }
}

fn integer_entry(e: Entry, field: u32, arrow: &str) -> Result<u32> {
    match e {
        Entry::Real(x) if x.fract() == 0.0 && x.abs() < 1e15 => Ok((x as i64).rem_euclid(field as i64) as u32),
        _ => Err(Error::Parse(format!("arrow {arrow}: entries over F_{field} must be integers"))),
    }
}

pub fn theta_from(q: &Quiver, v: Vec<i64>) -> Result<StabilityParam> {
    q.check_len(v.len())?;
    Ok(StabilityParam(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::replab::Lab;
    use crate::supermixed::example_quiver;

    #[test]
    fn minimal_file() {
        let p = parse_quiver_file(r#"{"vertices":["1","2"],"arrows":[{"name":"a","tail":"1","head":"2"}]}"#).unwrap();
        assert_eq!(p.quiver.num_vertices(), 2);
        assert_eq!(p.quiver.arrows().len(), 1);
        assert!(p.symmetric.is_none());
    }

    #[test]
    fn unknown_vertex_names_arrow() {
        let e = parse_quiver_file(r#"{"vertices":["1"],"arrows":[{"name":"beta","tail":"1","head":"7"}]}"#).unwrap_err();
        assert!(matches!(&e, Error::Parse(m) if m.contains("beta")), "{e}");
    }

    #[test]
    fn syntax_error_has_position() {
        let e = parse_quiver_file("{\n  \"vertices\": [\"1\",\n}").unwrap_err();
        assert!(matches!(&e, Error::Parse(m) if m.contains("line 3")), "{e}");
    }

    #[test]
    fn symmetric_round_trip() {
        let (q, s) = example_quiver();
        let text = serde_json::to_string_pretty(&QuiverFile::from_quiver(&q, Some(&s))).unwrap();
        let p = parse_quiver_file(&text).unwrap();
        assert_eq!(p.symmetric, Some(s));
        assert_eq!(p.quiver, q);
    }

    #[test]
    fn symmetric_violations_reported() {
        let (q, mut s) = example_quiver();
        s.vertex_signs[0] = -1;
        let text = serde_json::to_string(&QuiverFile::from_quiver(&q, Some(&s))).unwrap();
        let e = parse_quiver_file(&text).unwrap_err();
        assert!(e.to_string().contains("vertex 1"), "{e}");
    }

    #[test]
    fn series_json() {
        let s = TruncatedSeries::from_integers(4, &[1, 0, 1]);
        assert_eq!(series_to_json(&s).to_string(), r#"[[0,"1"],[2,"1"]]"#);
        let half = TruncatedSeries::from_terms(4, [(3, BigRational::new(1.into(), 2.into()))]).unwrap();
        assert_eq!(series_to_json(&half).to_string(), r#"[[3,"1/2"]]"#);
        assert_eq!(series_from_json(&series_to_json(&half), 4).unwrap(), half);
        assert!(series_from_json(&serde_json::json!([[1, 2]]), 4).is_err());
    }

    #[test]
    fn hn_type_text() {
        let t = HNType(vec![DimensionVector(vec![1, 0]), DimensionVector(vec![0, 1])]);
        assert_eq!(t.to_string(), "(1,0) > (0,1)");
        assert_eq!("(1,0) > (0,1)".parse::<HNType>().unwrap(), t);
        assert!("(1,0) > 0,1".parse::<HNType>().is_err());
        assert!("(1,0) > (0,1,2)".parse::<HNType>().is_err());
    }

    #[test]
    fn census_round_trip() {
        let q = Quiver::kronecker(2);
        let r = Lab::new(&q, 2)
            .unwrap()
            .census(&DimensionVector(vec![1, 1]), &StabilityParam(vec![1, -1]))
            .unwrap();
        let v = census_to_json(&r);
        assert_eq!(census_from_json(&v).unwrap(), r);
        let text = serde_json::to_string(&v).unwrap();
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(census_from_json(&back).unwrap(), r);
    }

    #[test]
    fn rep_files() {
        let q = Quiver::one_loop();
        let f = RepFile::parse(r#"{"dims":[2],"maps":{"a1":[[0,1],[0,[0,0]]]}}"#).unwrap();
        let c = f.to_crep(&q, None).unwrap();
        assert_eq!(c.maps[0][(0, 1)], Complex64::new(1.0, 0.0));
        let r = f.to_ffrep(&q, None, 3).unwrap_err();
        assert!(matches!(r, Error::Parse(_)));
        let f = RepFile::parse(r#"{"maps":{"a1":[[0,-1],[4,0]]}}"#).unwrap();
        let r = f.to_ffrep(&q, Some(&DimensionVector(vec![2])), 3).unwrap();
        assert_eq!(r.maps[0].to_rows(), vec![vec![0, 2], vec![1, 0]]);
        assert_eq!(RepFile::from_ffrep(&q, &r).to_ffrep(&q, None, 3).unwrap(), r);
        assert!(RepFile::parse(r#"{"maps":{"zz":[[1]]}}"#).unwrap().to_crep(&q, Some(&DimensionVector(vec![1]))).is_err());
        assert!(RepFile::parse(r#"{"maps":{"a1":[[1]]}}"#).unwrap().to_crep(&q, Some(&DimensionVector(vec![2]))).is_err());
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("-3/6").unwrap(), BigRational::new((-1).into(), 2.into()));
        assert_eq!(format_rational(&parse_rational("4/2").unwrap()), "2");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(parse_list::<i64>("1,-1").unwrap(), vec![1, -1]);
    }
}
