//! JSON instance and solution files.
//!
//! Instance files carry costs either as JSON integers (solved exactly) or as
//! JSON floats (solved with a tolerance). The mode is decided by the numbers
//! themselves: one non-integer literal anywhere makes the whole matrix float.
//!
//! ```json
//! {
//!   "format": "mmdc-instance",
//!   "version": 1,
//!   "s": 1,
//!   "t": 1,
//!   "alpha": [1], "alpha_cap": [1], "beta": [1], "beta_cap": [1],
//!   "costs": [[5]]
//! }
//! ```
//!
//! Pair indices in solution files are zero-based `[i, j]`.

use std::path::Path;

use mmdc_core::reduction::Certificate;
use mmdc_core::{MmdcInstance, MmdcSolution, Weight};
use serde::{Deserialize, Serialize};
use serde_json::{Number, Value};
use thiserror::Error;

pub const INSTANCE_FORMAT: &str = "mmdc-instance";
pub const SOLUTION_FORMAT: &str = "mmdc-solution";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("expected format {expected:?}, found {found:?}")]
    WrongFormat {
        expected: &'static str,
        found: String,
    },
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),
    #[error("declared {what} = {declared} but the data has {actual}")]
    SizeMismatch {
        what: &'static str,
        declared: usize,
        actual: usize,
    },
    #[error("{0} is not a representable number")]
    BadNumber(String),
    #[error(transparent)]
    Instance(#[from] mmdc_core::model::InstanceError),
}

/// Number conversions for the two cost modes.
pub trait JsonWeight: Weight {
    fn to_json(self) -> Value;
    fn from_json(n: &Number) -> Option<Self>;
}

impl JsonWeight for i64 {
    fn to_json(self) -> Value {
        Value::from(self)
    }

    fn from_json(n: &Number) -> Option<Self> {
        n.as_i64()
    }
}

impl JsonWeight for f64 {
    fn to_json(self) -> Value {
        Number::from_f64(self).map_or(Value::Null, Value::Number)
    }

    fn from_json(n: &Number) -> Option<Self> {
        n.as_f64().filter(|x| x.is_finite())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_size: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points_a: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points_b: Option<Vec<[f64; 2]>>,
}

impl Metadata {
    pub fn is_empty(&self) -> bool {
        self == &Metadata::default()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceDoc {
    format: String,
    version: u32,
    s: usize,
    t: usize,
    alpha: Vec<usize>,
    alpha_cap: Vec<usize>,
    beta: Vec<usize>,
    beta_cap: Vec<usize>,
    costs: Vec<Vec<Number>>,
    #[serde(default, skip_serializing_if = "Metadata::is_empty")]
    metadata: Metadata,
}

/// An instance in whichever numeric mode its file declared.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyInstance {
    Int(MmdcInstance<i64>),
    Float(MmdcInstance<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceFile {
    pub instance: AnyInstance,
    pub metadata: Metadata,
}

fn check_header(format: &str, expected: &'static str, version: u32) -> Result<(), FormatError> {
    if format != expected {
        return Err(FormatError::WrongFormat {
            expected,
            found: format.to_string(),
        });
    }
    if version != FORMAT_VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    Ok(())
}

fn convert_costs<W: JsonWeight>(rows: &[Vec<Number>]) -> Result<Vec<Vec<W>>, FormatError> {
    rows.iter()
        .map(|row| {
            row.iter()
                .map(|n| W::from_json(n).ok_or_else(|| FormatError::BadNumber(n.to_string())))
                .collect()
        })
        .collect()
}

impl InstanceFile {
    pub fn new(instance: AnyInstance) -> Self {
        Self {
            instance,
            metadata: Metadata::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let doc: InstanceDoc = serde_json::from_str(text)?;
        check_header(&doc.format, INSTANCE_FORMAT, doc.version)?;
        for (what, declared, actual) in [
            ("s", doc.s, doc.alpha.len()),
            ("t", doc.t, doc.beta.len()),
            ("s", doc.s, doc.costs.len()),
        ] {
            if declared != actual {
                return Err(FormatError::SizeMismatch {
                    what,
                    declared,
                    actual,
                });
            }
        }
        let integral = doc.costs.iter().flatten().all(|n| n.as_i64().is_some());
        let instance = if integral {
            AnyInstance::Int(MmdcInstance::new(
                doc.alpha,
                doc.alpha_cap,
                doc.beta,
                doc.beta_cap,
                convert_costs(&doc.costs)?,
            )?)
        } else {
            AnyInstance::Float(MmdcInstance::new(
                doc.alpha,
                doc.alpha_cap,
                doc.beta,
                doc.beta_cap,
                convert_costs(&doc.costs)?,
            )?)
        };
        Ok(Self {
            instance,
            metadata: doc.metadata,
        })
    }

    pub fn read(path: &Path) -> Result<Self, FormatError> {
        Self::parse(&read_text(path)?)
    }

    pub fn to_json(&self) -> String {
        let (s, t, alpha, alpha_cap, beta, beta_cap, costs) = match &self.instance {
            AnyInstance::Int(x) => parts(x),
            AnyInstance::Float(x) => parts(x),
        };
        let doc = InstanceDoc {
            format: INSTANCE_FORMAT.into(),
            version: FORMAT_VERSION,
            s,
            t,
            alpha,
            alpha_cap,
            beta,
            beta_cap,
            costs,
            metadata: self.metadata.clone(),
        };
        let mut out =
            serde_json::to_string_pretty(&doc).expect("instance documents always serialize");
        out.push('\n');
        out
    }
}

type Parts = (
    usize,
    usize,
    Vec<usize>,
    Vec<usize>,
    Vec<usize>,
    Vec<usize>,
    Vec<Vec<Number>>,
);

fn parts<W: JsonWeight>(x: &MmdcInstance<W>) -> Parts {
    let costs = x
        .cost_rows()
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|w| match w.to_json() {
                    Value::Number(n) => n,
                    _ => unreachable!("instance costs are finite"),
                })
                .collect()
        })
        .collect();
    (
        x.s(),
        x.t(),
        x.alpha().to_vec(),
        x.alpha_cap().to_vec(),
        x.beta().to_vec(),
        x.beta_cap().to_vec(),
        costs,
    )
}

pub fn read_text(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverInfo {
    pub name: String,
    pub version: String,
    /// `hungarian` or `oracle`.
    pub method: String,
}

impl SolverInfo {
    pub fn new(method: &str) -> Self {
        Self {
            name: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            method: method.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub seconds: f64,
}

/// Certificate block; weights are raw JSON numbers in the instance's mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateDoc {
    pub gadget_size: usize,
    pub matching_weight: Value,
    pub main_weight: Value,
    pub nonmain_weight: Value,
    pub main_edges: usize,
    pub xy_edges: usize,
    pub gamma: Value,
    pub gamma_prime: Value,
    pub gamma_double_prime: Value,
    pub forbidden: Value,
    pub penalty: String,
    pub transposed: bool,
    #[serde(default)]
    pub label_updates: u64,
    #[serde(default)]
    pub augmentations: u64,
}

impl CertificateDoc {
    pub fn from_certificate<W: JsonWeight>(
        c: &Certificate<W>,
        label_updates: u64,
        augmentations: u64,
    ) -> Self {
        Self {
            gadget_size: c.gadget_size,
            matching_weight: c.matching_weight.to_json(),
            main_weight: c.main_weight.to_json(),
            nonmain_weight: c.nonmain_weight.to_json(),
            main_edges: c.main_edges,
            xy_edges: c.xy_edges,
            gamma: c.gamma.to_json(),
            gamma_prime: c.gamma_prime.to_json(),
            gamma_double_prime: c.gamma_double_prime.to_json(),
            forbidden: c.forbidden.to_json(),
            penalty: c.penalty.name().into(),
            transposed: c.transposed,
            label_updates,
            augmentations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub format: String,
    pub version: u32,
    pub pairs: Vec<[usize; 2]>,
    pub cost: Value,
    pub deg_a: Vec<usize>,
    pub deg_b: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateDoc>,
    pub solver: SolverInfo,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl SolutionFile {
    pub fn from_solution<W: JsonWeight>(sol: &MmdcSolution<W>, solver: SolverInfo) -> Self {
        Self {
            format: SOLUTION_FORMAT.into(),
            version: FORMAT_VERSION,
            pairs: sol.pairs.iter().map(|&(i, j)| [i, j]).collect(),
            cost: sol.cost.to_json(),
            deg_a: sol.deg_a.clone(),
            deg_b: sol.deg_b.clone(),
            certificate: None,
            solver,
            timing: None,
        }
    }

    /// The pair set, degrees and cost in the instance's numeric mode.
    pub fn to_solution<W: JsonWeight>(&self) -> Result<MmdcSolution<W>, FormatError> {
        let cost = match &self.cost {
            Value::Number(n) => {
                W::from_json(n).ok_or_else(|| FormatError::BadNumber(n.to_string()))?
            }
            other => return Err(FormatError::BadNumber(other.to_string())),
        };
        Ok(MmdcSolution {
            pairs: self.pairs.iter().map(|p| (p[0], p[1])).collect(),
            deg_a: self.deg_a.clone(),
            deg_b: self.deg_b.clone(),
            cost,
            certificate: None,
        })
    }

    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let doc: SolutionFile = serde_json::from_str(text)?;
        check_header(&doc.format, SOLUTION_FORMAT, doc.version)?;
        Ok(doc)
    }

    pub fn read(path: &Path) -> Result<Self, FormatError> {
        Self::parse(&read_text(path)?)
    }

    pub fn to_json(&self) -> String {
        let mut out =
            serde_json::to_string_pretty(self).expect("solution documents always serialize");
        out.push('\n');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRIVIAL: &str = r#"{"format": "mmdc-instance", "version": 1, "s": 1, "t": 1,
        "alpha": [1], "alpha_cap": [1], "beta": [1], "beta_cap": [1], "costs": [[5]]}"#;

    #[test]
    fn integer_costs_select_integer_mode() {
        let f = InstanceFile::parse(TRIVIAL).unwrap();
        assert!(matches!(f.instance, AnyInstance::Int(ref x) if x.cost(0, 0) == 5));
    }

    #[test]
    fn one_float_makes_the_matrix_float() {
        let text = TRIVIAL.replace("[[5]]", "[[5.0]]");
        let f = InstanceFile::parse(&text).unwrap();
        assert!(matches!(f.instance, AnyInstance::Float(ref x) if x.cost(0, 0) == 5.0));
        // and it stays float after a round trip
        assert_eq!(InstanceFile::parse(&f.to_json()).unwrap(), f);
    }

    #[test]
    fn header_and_shape_errors() {
        let wrong = TRIVIAL.replace("mmdc-instance", "something");
        assert!(matches!(
            InstanceFile::parse(&wrong),
            Err(FormatError::WrongFormat { .. })
        ));
        let version = TRIVIAL.replace("\"version\": 1", "\"version\": 9");
        assert!(matches!(
            InstanceFile::parse(&version),
            Err(FormatError::UnsupportedVersion(9))
        ));
        let size = TRIVIAL.replace("\"s\": 1", "\"s\": 2");
        assert!(matches!(
            InstanceFile::parse(&size),
            Err(FormatError::SizeMismatch { .. })
        ));
        let negative = TRIVIAL.replace("[[5]]", "[[-5]]");
        assert!(matches!(
            InstanceFile::parse(&negative),
            Err(FormatError::Instance(_))
        ));
        assert!(matches!(
            InstanceFile::parse("{"),
            Err(FormatError::Json(_))
        ));
    }

    #[test]
    fn floats_keep_full_precision() {
        let x = MmdcInstance::new(
            vec![1],
            vec![1],
            vec![1],
            vec![1],
            vec![vec![std::f64::consts::PI / 7.0]],
        )
        .unwrap();
        let f = InstanceFile::new(AnyInstance::Float(x));
        assert_eq!(InstanceFile::parse(&f.to_json()).unwrap(), f);
    }

    #[test]
    fn metadata_round_trips() {
        let x = MmdcInstance::new(vec![0], vec![1], vec![0], vec![1], vec![vec![0.5]]).unwrap();
        let mut f = InstanceFile::new(AnyInstance::Float(x));
        f.metadata = Metadata {
            generator: Some("euclidean".into()),
            seed: Some(3),
            box_size: Some(10.0),
            points_a: Some(vec![[0.1, 0.2]]),
            points_b: Some(vec![[0.3, 0.4]]),
        };
        assert_eq!(InstanceFile::parse(&f.to_json()).unwrap(), f);
    }
}
