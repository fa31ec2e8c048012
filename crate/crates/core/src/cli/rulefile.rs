//! On-disk form of a quadrature rule (CSV or JSON).
//!
//! Every float is written with 17 significant digits, so reading a file
//! back and writing it again reproduces the same bytes.

use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::measure::{Flavor, MeasureSpec};
use crate::quadrature::QuadratureRule;

pub const SCHEMA_VERSION: u32 = 1;

/// Format `x` with 17 significant digits in scientific notation.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn ser17<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    let raw = RawValue::from_string(fmt17(*x)).map_err(serde::ser::Error::custom)?;
    raw.serialize(s)
}

pub(crate) fn ser17_opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => ser17(v, s),
        None => s.serialize_none(),
    }
}

pub(crate) fn ser17_plain<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    ser17(x, s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureRecord {
    #[serde(serialize_with = "ser17")]
    pub h: f64,
    #[serde(serialize_with = "ser17")]
    pub s: f64,
    pub flavor: Flavor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleRow {
    pub index: usize,
    #[serde(serialize_with = "ser17")]
    pub node: f64,
    #[serde(serialize_with = "ser17")]
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleFileRecord {
    pub schema_version: u32,
    pub measure: MeasureRecord,
    pub order: usize,
    pub rows: Vec<RuleRow>,
}

#[derive(Debug, thiserror::Error)]
pub enum RuleFileError {
    #[error("malformed rule file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl RuleFileRecord {
    pub fn from_rule(rule: &QuadratureRule, measure: &MeasureSpec) -> Self {
        let rows = rule
            .iter()
            .enumerate()
            .map(|(index, (node, weight))| RuleRow {
                index,
                node,
                weight,
            })
            .collect();
        Self {
            schema_version: SCHEMA_VERSION,
            measure: MeasureRecord {
                h: measure.h(),
                s: measure.s(),
                flavor: measure.flavor(),
            },
            order: rule.order(),
            rows,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("rule record serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, RuleFileError> {
        let record: Self = serde_json::from_str(text)?;
        record.validate()?;
        Ok(record)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# schema_version={}\n", self.schema_version));
        out.push_str(&format!(
            "# h={},s={},flavor={},order={}\n",
            fmt17(self.measure.h),
            fmt17(self.measure.s),
            self.measure.flavor.as_str(),
            self.order
        ));
        out.push_str("index,node,weight\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{}\n",
                row.index,
                fmt17(row.node),
                fmt17(row.weight)
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, RuleFileError> {
        let mut meta = std::collections::HashMap::new();
        for line in text.lines().filter_map(|l| l.strip_prefix('#')) {
            for pair in line.split(',') {
                if let Some((k, v)) = pair.trim().split_once('=') {
                    meta.insert(k.trim().to_string(), v.trim().to_string());
                }
            }
        }
        let get = |key: &str| {
            meta.get(key)
                .ok_or_else(|| RuleFileError::Malformed(format!("missing `{key}`")))
        };
        let num = |key: &str| -> Result<f64, RuleFileError> {
            get(key)?
                .parse()
                .map_err(|_| RuleFileError::Malformed(format!("bad `{key}`")))
        };
        let schema_version = get("schema_version")?
            .parse()
            .map_err(|_| RuleFileError::Malformed("bad `schema_version`".into()))?;
        let flavor = get("flavor")?
            .parse()
            .map_err(|e: crate::Error| RuleFileError::Malformed(e.to_string()))?;
        let order = get("order")?
            .parse()
            .map_err(|_| RuleFileError::Malformed("bad `order`".into()))?;

        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let rows = reader.deserialize().collect::<Result<Vec<RuleRow>, _>>()?;
        let record = Self {
            schema_version,
            measure: MeasureRecord {
                h: num("h")?,
                s: num("s")?,
                flavor,
            },
            order,
            rows,
        };
        record.validate()?;
        Ok(record)
    }

    fn validate(&self) -> Result<(), RuleFileError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(RuleFileError::Malformed(format!(
                "unsupported schema_version {}",
                self.schema_version
            )));
        }
        if self.rows.len() != self.order {
            return Err(RuleFileError::Malformed(format!(
                "{} rows for order {}",
                self.rows.len(),
                self.order
            )));
        }
        if let Some(row) = self.rows.iter().enumerate().find(|(i, r)| r.index != *i) {
            return Err(RuleFileError::Malformed(format!(
                "row {} has index {}",
                row.0, row.1.index
            )));
        }
        Ok(())
    }
}
