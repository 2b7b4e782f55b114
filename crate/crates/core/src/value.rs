//! Scalar attribute values and their kinds.

use std::collections::BTreeMap;
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize, Serializer};

/// The five scalar kinds an attribute may declare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    Text,
    Integer,
    Decimal,
    Boolean,
    Date,
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ValueKind::Text => "text",
            ValueKind::Integer => "integer",
            ValueKind::Decimal => "decimal",
            ValueKind::Boolean => "boolean",
            ValueKind::Date => "date",
        };
        f.write_str(s)
    }
}

/// A single attribute value.
#[derive(Debug, Clone, PartialEq)]
pub enum AttrValue {
    Text(String),
    Integer(i64),
    Decimal(f64),
    Boolean(bool),
    Date(NaiveDate),
}

/// Attribute map, keyed bytewise.
pub type AttrMap = BTreeMap<String, AttrValue>;

impl AttrValue {
    pub fn kind(&self) -> ValueKind {
        match self {
            AttrValue::Text(_) => ValueKind::Text,
            AttrValue::Integer(_) => ValueKind::Integer,
            AttrValue::Decimal(_) => ValueKind::Decimal,
            AttrValue::Boolean(_) => ValueKind::Boolean,
            AttrValue::Date(_) => ValueKind::Date,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            AttrValue::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_integer(&self) -> Option<i64> {
        match self {
            AttrValue::Integer(i) => Some(*i),
            _ => None,
        }
    }

    pub fn text(s: impl Into<String>) -> Self {
        AttrValue::Text(s.into())
    }

    /// Decode a JSON value, using the declared kind when one is known.
    ///
    /// Dates travel as `YYYY-MM-DD` strings, so a string is only read as a
    /// date when the schema says so. Without a hint the natural JSON type
    /// decides. Returns `None` for nulls, arrays and objects.
    pub fn from_json(value: &serde_json::Value, hint: Option<ValueKind>) -> Option<AttrValue> {
        use serde_json::Value as J;
        match (value, hint) {
            (J::String(s), Some(ValueKind::Date)) => match parse_date(s) {
                Some(d) => Some(AttrValue::Date(d)),
                None => Some(AttrValue::Text(s.clone())),
            },
            (J::String(s), _) => Some(AttrValue::Text(s.clone())),
            (J::Bool(b), _) => Some(AttrValue::Boolean(*b)),
            (J::Number(n), Some(ValueKind::Decimal)) => n.as_f64().map(AttrValue::Decimal),
            (J::Number(n), _) => match n.as_i64() {
                Some(i) => Some(AttrValue::Integer(i)),
                None => n.as_f64().map(AttrValue::Decimal),
            },
            _ => None,
        }
    }
}

impl fmt::Display for AttrValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrValue::Text(s) => f.write_str(s),
            AttrValue::Integer(i) => write!(f, "{i}"),
            // Display for f64 never uses exponent notation.
            AttrValue::Decimal(d) => write!(f, "{d}"),
            AttrValue::Boolean(b) => write!(f, "{b}"),
            AttrValue::Date(d) => write!(f, "{}", d.format("%Y-%m-%d")),
        }
    }
}

impl Serialize for AttrValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            AttrValue::Text(s) => serializer.serialize_str(s),
            AttrValue::Integer(i) => serializer.serialize_i64(*i),
            AttrValue::Decimal(d) => serializer.serialize_f64(*d),
            AttrValue::Boolean(b) => serializer.serialize_bool(*b),
            AttrValue::Date(d) => serializer.collect_str(&d.format("%Y-%m-%d")),
        }
    }
}

/// Strict `YYYY-MM-DD`.
pub fn parse_date(s: &str) -> Option<NaiveDate> {
    let b = s.as_bytes();
    if b.len() != 10 || b[4] != b'-' || b[7] != b'-' {
        return None;
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d").ok()
}

pub fn format_date(d: NaiveDate) -> String {
    d.format("%Y-%m-%d").to_string()
}
