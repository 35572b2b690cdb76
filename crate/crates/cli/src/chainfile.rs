//! Chain files: JSON documents with keys `states`, `pi`, `P` and `product`.
//!
//! Numeric entries may be JSON numbers or strings. Strings hold either a
//! decimal (`"0.05"`) or an integer ratio (`"1/6"`), so printed matrices can
//! be transcribed verbatim. A ratio `a/b` becomes `a as f64 / b as f64`, the
//! correctly rounded value whenever `a` and `b` are exactly representable.

use std::fs;
use std::path::Path;

use serde_json::{Map, Value};

use revchain::composition::ProductSpec;
use revchain::{TargetDistribution, TransitionMatrix};

use crate::error::CliError;
use crate::report::{num_matrix, num_vec};

#[derive(Debug, Clone)]
pub struct ChainFile {
    pub states: Option<Vec<String>>,
    pub pi: TargetDistribution,
    pub p: Option<TransitionMatrix>,
    pub product: Option<ProductSpec>,
}

impl ChainFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        let doc: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        Self::from_value(&doc).map_err(|e| e.context(&path.display().to_string()))
    }

    pub fn from_value(doc: &Value) -> Result<Self, CliError> {
        let obj = doc
            .as_object()
            .ok_or_else(|| CliError::Parse("top level must be an object".into()))?;
        for key in obj.keys() {
            if !matches!(key.as_str(), "states" | "pi" | "P" | "product") {
                return Err(CliError::Parse(format!("unknown key \"{key}\"")));
            }
        }
        let states = match obj.get("states") {
            None | Some(Value::Null) => None,
            Some(Value::Array(items)) => Some(
                items
                    .iter()
                    .enumerate()
                    .map(|(i, v)| match v {
                        Value::String(s) => Ok(s.clone()),
                        Value::Number(n) => Ok(n.to_string()),
                        _ => Err(CliError::Parse(format!("states[{i}] must be a string"))),
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            Some(_) => return Err(CliError::Parse("states must be an array".into())),
        };
        let pi_raw = parse_vector(
            obj.get("pi")
                .ok_or_else(|| CliError::Parse("missing key \"pi\"".into()))?,
            "pi",
        )?;
        let mut pi = TargetDistribution::new(pi_raw).map_err(|e| CliError::field("pi", e))?;
        if let Some(labels) = &states {
            pi = pi
                .with_labels(labels.clone())
                .map_err(|e| CliError::field("states", e))?;
        }
        let p = match obj.get("P") {
            None | Some(Value::Null) => None,
            Some(v) => {
                let rows = parse_matrix(v, "P")?;
                if rows.len() != pi.len() {
                    return Err(CliError::Validation(format!(
                        "P has {} rows but pi has {} entries",
                        rows.len(),
                        pi.len()
                    )));
                }
                Some(TransitionMatrix::from_rows(&rows).map_err(|e| CliError::field("P", e))?)
            }
        };
        let product = match obj.get("product") {
            None | Some(Value::Null) => None,
            Some(Value::Array(items)) => {
                let sizes = items
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        v.as_u64().map(|s| s as usize).ok_or_else(|| {
                            CliError::Parse(format!("product[{i}] must be a positive integer"))
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let spec = ProductSpec::new(sizes).map_err(|e| CliError::field("product", e))?;
                if spec.n() != pi.len() {
                    return Err(CliError::Validation(format!(
                        "product sizes multiply to {} but pi has {} entries",
                        spec.n(),
                        pi.len()
                    )));
                }
                Some(spec)
            }
            Some(_) => return Err(CliError::Parse("product must be an array".into())),
        };
        Ok(Self {
            states,
            pi,
            p,
            product,
        })
    }

    pub fn matrix(&self) -> Result<&TransitionMatrix, CliError> {
        self.p
            .as_ref()
            .ok_or_else(|| CliError::Parse("missing key \"P\"".into()))
    }

    pub fn product(&self) -> Result<&ProductSpec, CliError> {
        self.product
            .as_ref()
            .ok_or_else(|| CliError::Parse("missing key \"product\"".into()))
    }

    /// Serializes with the same keys; numbers carry 17 significant digits,
    /// so re-parsing reproduces every entry bit for bit.
    pub fn to_value(&self) -> Value {
        let mut obj = Map::new();
        if let Some(states) = &self.states {
            obj.insert(
                "states".into(),
                Value::Array(states.iter().cloned().map(Value::String).collect()),
            );
        }
        obj.insert("pi".into(), num_vec(self.pi.probs()));
        if let Some(p) = &self.p {
            obj.insert("P".into(), num_matrix(&p.rows()));
        }
        if let Some(prod) = &self.product {
            obj.insert(
                "product".into(),
                Value::Array(prod.sizes().iter().map(|&s| Value::from(s)).collect()),
            );
        }
        Value::Object(obj)
    }

    pub fn with_matrix(&self, p: TransitionMatrix) -> Self {
        Self {
            p: Some(p),
            ..self.clone()
        }
    }
}

/// Parses `"a/b"`, a decimal string, or a JSON number.
pub fn parse_number(v: &Value, field: &str) -> Result<f64, CliError> {
    let value = match v {
        Value::Number(n) => n
            .to_string()
            .parse::<f64>()
            .map_err(|e| CliError::Parse(format!("{field}: {e}")))?,
        Value::String(s) => parse_scalar(s).map_err(|e| CliError::Parse(format!("{field}: {e}")))?,
        other => {
            return Err(CliError::Parse(format!(
                "{field}: expected a number or a string like \"1/6\", found {other}"
            )))
        }
    };
    if !value.is_finite() {
        return Err(CliError::Parse(format!("{field}: {value} is not finite")));
    }
    Ok(value)
}

pub fn parse_scalar(text: &str) -> Result<f64, String> {
    let s = text.trim();
    if let Some((a, b)) = s.split_once('/') {
        let num: i64 = a
            .trim()
            .parse()
            .map_err(|_| format!("bad numerator in \"{text}\""))?;
        let den: i64 = b
            .trim()
            .parse()
            .map_err(|_| format!("bad denominator in \"{text}\""))?;
        if den == 0 {
            return Err(format!("zero denominator in \"{text}\""));
        }
        Ok(num as f64 / den as f64)
    } else {
        s.parse::<f64>().map_err(|_| format!("cannot parse \"{text}\" as a number"))
    }
}

pub fn parse_vector(v: &Value, field: &str) -> Result<Vec<f64>, CliError> {
    let items = v
        .as_array()
        .ok_or_else(|| CliError::Parse(format!("{field} must be an array")))?;
    items
        .iter()
        .enumerate()
        .map(|(i, x)| parse_number(x, &format!("{field}[{i}]")))
        .collect()
}

pub fn parse_matrix(v: &Value, field: &str) -> Result<Vec<Vec<f64>>, CliError> {
    let rows = v
        .as_array()
        .ok_or_else(|| CliError::Parse(format!("{field} must be an array of rows")))?;
    rows.iter()
        .enumerate()
        .map(|(i, row)| parse_vector(row, &format!("{field}[{i}]")))
        .collect()
}

/// Reads `@path` from a file, otherwise parses the text itself. Accepts a
/// JSON value or, for vectors, a bare comma-separated list.
pub fn inline_or_file(arg: &str) -> Result<Value, CliError> {
    let text = match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{path}: {e}")))?,
        None => arg.to_string(),
    };
    let trimmed = text.trim();
    if trimmed.starts_with('[') || trimmed.starts_with('{') {
        serde_json::from_str(trimmed).map_err(|e| CliError::Parse(format!("{arg}: {e}")))
    } else {
        Ok(Value::Array(
            trimmed
                .split(',')
                .map(|s| Value::String(s.trim().to_string()))
                .collect(),
        ))
    }
}
