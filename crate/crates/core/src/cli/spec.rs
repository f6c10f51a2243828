//! JSON system-specification files: `{"kind": …, "system": …, "task": …}`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_rational::Ratio;
use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;

use super::CliError;
use crate::barnsley::{BarnsleySystem, Branch};
use crate::linalg::matrix_from_rows;
use crate::selfaffine::AffineIfs;
use crate::selfsimilar::{SimilarIfs, SimilarMap};
use crate::symbolic::Subshift;
use crate::thermo::Potential;

/// A number written as a JSON number, `"p/q"` or a decimal string. Strings
/// and integers are also kept as exact rationals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num {
    pub value: f64,
    pub exact: Option<Ratio<i128>>,
}

fn parse_decimal(s: &str) -> Option<Ratio<i128>> {
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let mut numer: i128 = 0;
    let mut denom: i128 = 1;
    for c in int.chars().chain(frac.chars()) {
        numer = numer.checked_mul(10)?.checked_add(c.to_digit(10)? as i128)?;
    }
    for _ in frac.chars() {
        denom = denom.checked_mul(10)?;
    }
    Some(Ratio::new(if negative { -numer } else { numer }, denom))
}

fn parse_rational(s: &str) -> Option<Ratio<i128>> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p = parse_decimal(p.trim())?;
            let q = parse_decimal(q.trim())?;
            if q == Ratio::from_integer(0) {
                return None;
            }
            Some(p / q)
        }
        None => parse_decimal(s),
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct NumVisitor;

        impl Visitor<'_> for NumVisitor {
            type Value = Num;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number, a \"p/q\" string or a decimal string")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Num, E> {
                Ok(Num {
                    value: v as f64,
                    exact: Some(Ratio::from_integer(v as i128)),
                })
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Num, E> {
                Ok(Num {
                    value: v as f64,
                    exact: Some(Ratio::from_integer(v as i128)),
                })
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Num, E> {
                Ok(Num { value: v, exact: None })
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Num, E> {
                let r = parse_rational(v).ok_or_else(|| E::invalid_value(de::Unexpected::Str(v), &self))?;
                Ok(Num {
                    value: *r.numer() as f64 / *r.denom() as f64,
                    exact: Some(r),
                })
            }
        }

        deserializer.deserialize_any(NumVisitor)
    }
}

fn values(v: &[Num]) -> Vec<f64> {
    v.iter().map(|n| n.value).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Similar,
    Affine,
    Barnsley,
    Sft,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Similar => "similar",
            Kind::Affine => "affine",
            Kind::Barnsley => "barnsley",
            Kind::Sft => "sft",
        })
    }
}

/// Task parameters; command-line flags take precedence.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Task {
    pub n: Option<usize>,
    pub n_max: Option<usize>,
    pub count: Option<usize>,
    pub seed: Option<u64>,
    pub scales: Option<Vec<Num>>,
    pub tolerance: Option<f64>,
    pub trials: Option<usize>,
    pub depth: Option<usize>,
    pub s_grid: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    kind: Kind,
    system: serde_json::Value,
    #[serde(default)]
    task: Task,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Translation {
    Line(Num),
    Vector(Vec<Num>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimilarMapSpec {
    /// Signed slope on the line; the contraction ratio otherwise.
    ratio: Num,
    translation: Translation,
    #[serde(default)]
    angle: Option<f64>,
    #[serde(default)]
    reflect: bool,
    #[serde(default)]
    orthogonal: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimilarSpec {
    #[serde(default)]
    maps: Option<Vec<SimilarMapSpec>>,
    #[serde(default)]
    ratios: Option<Vec<Num>>,
    #[serde(default)]
    weights: Option<Vec<Num>>,
    #[serde(default)]
    labels: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AffineMapSpec {
    linear: Vec<Vec<Num>>,
    translation: Vec<Num>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AffineSpec {
    maps: Vec<AffineMapSpec>,
    #[serde(default)]
    weights: Option<Vec<Num>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BranchSpec {
    gamma: Num,
    v: Num,
    a: Num,
    lambda: Num,
    t: Num,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BarnsleySpec {
    partition: Vec<Num>,
    branches: Vec<BranchSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SftSpec {
    transition: Vec<Vec<i64>>,
    #[serde(default)]
    potential: Option<Vec<Num>>,
}

/// Similarity ratios, with the maps when they were given.
#[derive(Debug, Clone)]
pub struct SimilarSystem {
    pub ratios: Vec<f64>,
    pub ifs: Option<SimilarIfs>,
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct AffineSystem {
    pub ifs: AffineIfs,
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct SftSystem {
    pub sft: Subshift,
    pub potential: Option<Potential>,
}

#[derive(Debug, Clone)]
pub enum System {
    Similar(SimilarSystem),
    Affine(AffineSystem),
    Barnsley(BarnsleySystem),
    Sft(SftSystem),
}

impl System {
    pub fn kind(&self) -> Kind {
        match self {
            System::Similar(_) => Kind::Similar,
            System::Affine(_) => Kind::Affine,
            System::Barnsley(_) => Kind::Barnsley,
            System::Sft(_) => Kind::Sft,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpecFile {
    pub system: System,
    pub task: Task,
}

fn at(path: impl Into<String>) -> impl FnOnce(crate::Error) -> CliError {
    let path = path.into();
    move |e| CliError::from(e).at(path)
}

fn decode<T: for<'de> Deserialize<'de>>(value: serde_json::Value, prefix: &str) -> Result<T, CliError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." { prefix.to_string() } else { format!("{prefix}.{inner}") };
        CliError::validation(Some(path), e.into_inner().to_string())
    })
}

fn build_similar(spec: SimilarSpec) -> Result<SimilarSystem, CliError> {
    let weights = spec.weights.as_deref().map(values);
    let Some(maps) = spec.maps else {
        let ratios = spec
            .ratios
            .ok_or_else(|| CliError::validation(Some("system".into()), "either `maps` or `ratios` is required"))?;
        if spec.labels.is_some() {
            return Err(CliError::validation(Some("system.labels".into()), "labels need `maps`"));
        }
        return Ok(SimilarSystem {
            ratios: values(&ratios),
            ifs: None,
            weights,
        });
    };
    if spec.ratios.is_some() {
        return Err(CliError::validation(Some("system.ratios".into()), "give either `maps` or `ratios`, not both"));
    }
    let on_line = maps.iter().all(|m| matches!(m.translation, Translation::Line(_)));
    let ifs = if on_line {
        let exact: Option<Vec<(Ratio<i128>, Ratio<i128>)>> = maps
            .iter()
            .map(|m| match m.translation {
                Translation::Line(t) => Some((m.ratio.exact?, t.exact?)),
                Translation::Vector(_) => None,
            })
            .collect();
        for (i, m) in maps.iter().enumerate() {
            if let Translation::Line(t) = m.translation {
                SimilarMap::line(m.ratio.value, t.value).map_err(at(format!("system.maps[{i}]")))?;
            }
        }
        match exact {
            Some(params) => SimilarIfs::line_exact(&params),
            None => SimilarIfs::line(
                &maps
                    .iter()
                    .map(|m| match m.translation {
                        Translation::Line(t) => (m.ratio.value, t.value),
                        Translation::Vector(_) => unreachable!(),
                    })
                    .collect::<Vec<_>>(),
            ),
        }
        .map_err(at("system.maps"))?
    } else {
        let mut built = Vec::with_capacity(maps.len());
        for (i, m) in maps.iter().enumerate() {
            let path = format!("system.maps[{i}]");
            let Translation::Vector(t) = &m.translation else {
                return Err(CliError::validation(Some(path), "all maps must have the same dimension"));
            };
            let t = values(t);
            let map = match &m.orthogonal {
                Some(rows) => matrix_from_rows(rows)
                    .and_then(|o| SimilarMap::new(m.ratio.value, o, DVector::from_vec(t))),
                None if t.len() == 2 => {
                    SimilarMap::planar(m.ratio.value, m.angle.unwrap_or(0.0), m.reflect, [t[0], t[1]])
                }
                None => Err(crate::Error::Invalid("maps outside the plane need `orthogonal`".into())),
            }
            .map_err(at(path))?;
            built.push(map);
        }
        SimilarIfs::new(built).map_err(at("system.maps"))?
    };
    let ifs = match spec.labels {
        Some(labels) => ifs.with_labels(labels).map_err(at("system.labels"))?,
        None => ifs,
    };
    Ok(SimilarSystem {
        ratios: ifs.ratios(),
        ifs: Some(ifs),
        weights,
    })
}

fn build_affine(spec: AffineSpec) -> Result<AffineSystem, CliError> {
    let mut parts = Vec::with_capacity(spec.maps.len());
    for (i, m) in spec.maps.iter().enumerate() {
        let rows: Vec<Vec<f64>> = m.linear.iter().map(|r| values(r)).collect();
        let linear = matrix_from_rows(&rows).map_err(at(format!("system.maps[{i}].linear")))?;
        parts.push((linear, values(&m.translation)));
    }
    for (i, (linear, t)) in parts.iter().enumerate() {
        crate::selfaffine::AffineMap::new(linear.clone(), DVector::from_column_slice(t))
            .map_err(at(format!("system.maps[{i}]")))?;
    }
    let ifs = AffineIfs::from_parts(&parts).map_err(at("system.maps"))?;
    Ok(AffineSystem {
        ifs,
        weights: spec.weights.as_deref().map(values),
    })
}

fn build_barnsley(spec: BarnsleySpec) -> Result<BarnsleySystem, CliError> {
    let branches = spec
        .branches
        .iter()
        .map(|b| Branch {
            gamma: b.gamma.value,
            v: b.v.value,
            a: b.a.value,
            lambda: b.lambda.value,
            t: b.t.value,
        })
        .collect();
    BarnsleySystem::new(values(&spec.partition), branches).map_err(at("system"))
}

fn build_sft(spec: SftSpec) -> Result<SftSystem, CliError> {
    let sft = Subshift::from_integers(&spec.transition).map_err(at("system.transition"))?;
    let potential = match spec.potential {
        Some(p) => Some(Potential::new(values(&p)).map_err(at("system.potential"))?),
        None => None,
    };
    if let Some(p) = &potential {
        if p.values().len() != sft.size() {
            return Err(CliError::validation(
                Some("system.potential".into()),
                format!("expected {} values, found {}", sft.size(), p.values().len()),
            ));
        }
    }
    Ok(SftSystem { sft, potential })
}

/// Parses and validates a specification document.
pub fn parse_spec(text: &str) -> Result<SpecFile, CliError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let raw: RawSpec = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        CliError::validation((path != ".").then_some(path), e.into_inner().to_string())
    })?;
    let system = match raw.kind {
        Kind::Similar => System::Similar(build_similar(decode(raw.system, "system")?)?),
        Kind::Affine => System::Affine(build_affine(decode(raw.system, "system")?)?),
        Kind::Barnsley => System::Barnsley(build_barnsley(decode(raw.system, "system")?)?),
        Kind::Sft => System::Sft(build_sft(decode(raw.system, "system")?)?),
    };
    Ok(SpecFile { system, task: raw.task })
}

/// Matrix rows as stored in an affine spec, for the validate report.
pub fn describe_matrix(m: &DMatrix<f64>) -> String {
    let rows: Vec<String> = m
        .row_iter()
        .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "))
        .collect();
    format!("[[{}]]", rows.join("], ["))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_in_three_spellings() {
        let v: Vec<Num> = serde_json::from_str(r#"[0.35, "7/20", "0.35", 2, "-1/3"]"#).unwrap();
        assert_eq!(v[0].exact, None);
        assert_eq!(v[1].exact, Some(Ratio::new(7, 20)));
        assert_eq!(v[2].exact, v[1].exact);
        assert_eq!(v[3].exact, Some(Ratio::from_integer(2)));
        assert!((v[4].value + 1.0 / 3.0).abs() < 1e-16);
        assert!(serde_json::from_str::<Num>(r#""1/0""#).is_err());
        assert!(serde_json::from_str::<Num>(r#""abc""#).is_err());
    }

    #[test]
    fn exact_line_systems() {
        let spec = parse_spec(
            r#"{"kind":"similar","system":{"maps":[
                {"ratio":"1/3","translation":0},{"ratio":"1/3","translation":1},{"ratio":"1/3","translation":3}]}}"#,
        )
        .unwrap();
        let System::Similar(s) = spec.system else { panic!() };
        assert!(s.ifs.unwrap().exact().is_some());
    }

    #[test]
    fn field_paths_in_errors() {
        let e = parse_spec(r#"{"kind":"similar","system":{"maps":[{"ratio":"x","translation":0}]}}"#).unwrap_err();
        assert_eq!(e.path(), Some("system.maps[0].ratio"));
        let e = parse_spec(r#"{"kind":"similar","system":{"maps":[{"ratio":0.5,"translation":0},{"ratio":1.5,"translation":1}]}}"#)
            .unwrap_err();
        assert_eq!(e.path(), Some("system.maps[1]"));
        let e = parse_spec(r#"{"kind":"cantor","system":{}}"#).unwrap_err();
        assert_eq!(e.path(), Some("kind"));
        let e = parse_spec(r#"{"kind":"sft","system":{"transition":[[1,1],[1,0]]},"task":{"m":3}}"#).unwrap_err();
        assert_eq!(e.path(), Some("task.m"));
        assert_eq!(e.exit_code(), 2);
    }
}
