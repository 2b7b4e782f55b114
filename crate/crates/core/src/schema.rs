//! Layered ontology schema.
//!
//! The schema is an ordered stack of layers. Layer 0 is always the INNEO base
//! layer returned by [`base_schema`]; further layers may only add new classes
//! and predicates, never redeclare existing names. Entities and edges are
//! checked against the merged view with [`Schema::validate_entity`] and
//! [`Schema::validate_edge`], which report problems instead of failing.
//!
//! Subclass conformance is a single hard-wired level: `KnowledgeArea` is
//! accepted wherever `Knowledge` is expected.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::value::{AttrMap, AttrValue, ValueKind};

pub const BASE_LAYER_ID: &str = "inneo";
pub const KNOWLEDGE: &str = "Knowledge";
pub const KNOWLEDGE_AREA: &str = "KnowledgeArea";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeSpec {
    pub name: String,
    pub kind: ValueKind,
    pub required: bool,
}

impl AttributeSpec {
    pub fn required(name: &str, kind: ValueKind) -> Self {
        AttributeSpec { name: name.to_string(), kind, required: true }
    }

    pub fn optional(name: &str, kind: ValueKind) -> Self {
        AttributeSpec { name: name.to_string(), kind, required: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassDef {
    pub name: String,
    #[serde(rename = "abstract", default)]
    pub is_abstract: bool,
    #[serde(rename = "attributes", default)]
    pub attribute_specs: Vec<AttributeSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredicateDef {
    pub name: String,
    pub domain: String,
    pub range: String,
    #[serde(rename = "attributes", default)]
    pub attribute_specs: Vec<AttributeSpec>,
}

/// One additive schema layer. Its JSON form is the layer definition file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerDef {
    pub layer_id: String,
    #[serde(default)]
    pub classes: Vec<ClassDef>,
    #[serde(default)]
    pub predicates: Vec<PredicateDef>,
}

impl LayerDef {
    pub fn empty(layer_id: &str) -> Self {
        LayerDef { layer_id: layer_id.to_string(), classes: Vec::new(), predicates: Vec::new() }
    }

    pub fn from_json(text: &str) -> Result<Self, SchemaError> {
        serde_json::from_str(text).map_err(|e| SchemaError::LayerParse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("layer serialization is infallible")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("layer `{0}` is already registered")]
    DuplicateLayer(String),
    #[error("name `{0}` is already declared")]
    NameCollision(String),
    #[error("predicate `{predicate}` references unknown class `{class}`")]
    DanglingReference { predicate: String, class: String },
    #[error("invalid name `{0}`")]
    InvalidName(String),
    #[error("layer definition parse error: {0}")]
    LayerParse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ViolationCode {
    UnknownClass,
    AbstractClassInstantiation,
    MissingRequiredAttribute,
    UndeclaredAttribute,
    ValueKindMismatch,
    NonFiniteDecimal,
    UnknownPredicate,
    DomainMismatch,
    RangeMismatch,
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub message: String,
    pub name: String,
}

/// Outcome of a validation call. `ok` holds exactly when `violations` is empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        ValidationReport { ok: violations.is_empty(), violations }
    }

    pub fn has(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }

    pub fn codes(&self) -> Vec<ViolationCode> {
        self.violations.iter().map(|v| v.code).collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok {
            return f.write_str("ok");
        }
        let parts: Vec<String> =
            self.violations.iter().map(|v| format!("{}: {}", v.code, v.message)).collect();
        f.write_str(&parts.join("; "))
    }
}

/// Merged, immutable schema.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schema {
    layers: Vec<LayerDef>,
    #[serde(skip)]
    classes: BTreeMap<String, ClassDef>,
    #[serde(skip)]
    predicates: BTreeMap<String, PredicateDef>,
}

fn is_class_token(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic()) && chars.all(|c| c.is_ascii_alphanumeric())
}

fn is_attribute_token(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// The INNEO base layer: the ten ontology classes plus `KnowledgeArea`, and
/// the base predicate vocabulary.
pub fn base_layer() -> LayerDef {
    use ValueKind::*;
    let req = AttributeSpec::required;
    let opt = AttributeSpec::optional;
    let class = |name: &str, is_abstract: bool, attribute_specs: Vec<AttributeSpec>| ClassDef {
        name: name.to_string(),
        is_abstract,
        attribute_specs,
    };
    let classes = vec![
        class("InnovationEcosystem", false, vec![req("name", Text)]),
        class(KNOWLEDGE, true, vec![]),
        class("Organization", false, vec![req("name", Text), opt("country", Text)]),
        class("Event", false, vec![req("name", Text), opt("date", Date)]),
        class("Connector", false, vec![req("name", Text)]),
        class(
            "Funding",
            false,
            vec![req("funder", Text), req("year", Integer), opt("amount", Decimal)],
        ),
        class(
            "Patent",
            false,
            vec![req("title", Text), opt("number", Text), opt("filing_date", Date)],
        ),
        class("Talent", false, vec![req("name", Text)]),
        class(
            "Project",
            false,
            vec![req("title", Text), opt("start_date", Date), opt("end_date", Date)],
        ),
        class("Article", false, vec![req("title", Text), opt("year", Integer), opt("venue", Text)]),
        class(KNOWLEDGE_AREA, false, vec![req("code", Text), opt("scheme", Text)]),
    ];

    let pred = |name: &str, domain: &str, range: &str| PredicateDef {
        name: name.to_string(),
        domain: domain.to_string(),
        range: range.to_string(),
        attribute_specs: Vec::new(),
    };
    let mut awarded = pred("awardedTo", "Funding", "Organization");
    awarded.attribute_specs.push(req("year", Integer));
    let predicates = vec![
        pred("belongsTo", "Organization", "InnovationEcosystem"),
        pred("employs", "Organization", "Talent"),
        pred("authorOf", "Talent", "Article"),
        pred("inventorOf", "Talent", "Patent"),
        pred("applicantOf", "Organization", "Patent"),
        pred("participatesIn", "Organization", "Project"),
        pred("resultOf", "Patent", "Project"),
        pred("articleResultOf", "Article", "Project"),
        awarded,
        pred("finances", "Funding", "Project"),
        pred("createsEvent", "Organization", "Event"),
        pred("createsConnector", "Organization", "Connector"),
        pred("attracts", "Event", "Organization"),
        pred("connects", "Connector", "Organization"),
        pred("cites", "Patent", "Article"),
        pred("patentClassifiedIn", "Patent", KNOWLEDGE),
        pred("articleClassifiedIn", "Article", KNOWLEDGE),
        pred("projectClassifiedIn", "Project", KNOWLEDGE),
        pred("talentClassifiedIn", "Talent", KNOWLEDGE),
        pred("orgClassifiedIn", "Organization", KNOWLEDGE),
        pred("broaderThan", KNOWLEDGE, KNOWLEDGE),
    ];
    LayerDef { layer_id: BASE_LAYER_ID.to_string(), classes, predicates }
}

pub fn base_schema() -> Schema {
    Schema::empty()
        .register_layer(base_layer())
        .expect("base layer is self-consistent")
}

impl Default for Schema {
    fn default() -> Self {
        base_schema()
    }
}

impl Schema {
    fn empty() -> Self {
        Schema { layers: Vec::new(), classes: BTreeMap::new(), predicates: BTreeMap::new() }
    }

    pub fn layers(&self) -> &[LayerDef] {
        &self.layers
    }

    pub fn class(&self, name: &str) -> Option<&ClassDef> {
        self.classes.get(name)
    }

    pub fn predicate(&self, name: &str) -> Option<&PredicateDef> {
        self.predicates.get(name)
    }

    pub fn class_names(&self) -> impl Iterator<Item = &str> {
        self.classes.keys().map(String::as_str)
    }

    pub fn predicate_names(&self) -> impl Iterator<Item = &str> {
        self.predicates.keys().map(String::as_str)
    }

    /// Serialized layer stack; used to compare schemas.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("schema serialization is infallible")
    }

    /// Return a new schema with `layer` appended. `self` is left untouched.
    pub fn register_layer(&self, layer: LayerDef) -> Result<Schema, SchemaError> {
        if self.layers.iter().any(|l| l.layer_id == layer.layer_id) {
            return Err(SchemaError::DuplicateLayer(layer.layer_id));
        }
        if layer.layer_id.is_empty() || layer.layer_id.chars().any(char::is_whitespace) {
            return Err(SchemaError::InvalidName(layer.layer_id));
        }

        let mut classes = self.classes.clone();
        let mut predicates = self.predicates.clone();
        let mut declared: BTreeSet<&str> = BTreeSet::new();

        for class in &layer.classes {
            if !is_class_token(&class.name) {
                return Err(SchemaError::InvalidName(class.name.clone()));
            }
            check_attribute_specs(&class.attribute_specs)?;
            if classes.contains_key(&class.name) || !declared.insert(&class.name) {
                return Err(SchemaError::NameCollision(class.name.clone()));
            }
            classes.insert(class.name.clone(), class.clone());
        }

        declared.clear();
        for p in &layer.predicates {
            if !is_class_token(&p.name) {
                return Err(SchemaError::InvalidName(p.name.clone()));
            }
            check_attribute_specs(&p.attribute_specs)?;
            if predicates.contains_key(&p.name) || !declared.insert(&p.name) {
                return Err(SchemaError::NameCollision(p.name.clone()));
            }
            for class in [&p.domain, &p.range] {
                if !classes.contains_key(class) {
                    return Err(SchemaError::DanglingReference {
                        predicate: p.name.clone(),
                        class: class.clone(),
                    });
                }
            }
            predicates.insert(p.name.clone(), p.clone());
        }

        let mut layers = self.layers.clone();
        layers.push(layer);
        Ok(Schema { layers, classes, predicates })
    }

    /// Does an instance of `actual` satisfy a slot typed `expected`?
    pub fn conforms(&self, actual: &str, expected: &str) -> bool {
        actual == expected || (actual == KNOWLEDGE_AREA && expected == KNOWLEDGE)
    }

    pub fn validate_entity(&self, class_name: &str, attributes: &AttrMap) -> ValidationReport {
        let mut violations = Vec::new();
        match self.classes.get(class_name) {
            None => violations.push(Violation {
                code: ViolationCode::UnknownClass,
                message: format!("class `{class_name}` is not declared"),
                name: class_name.to_string(),
            }),
            Some(class) => {
                if class.is_abstract {
                    violations.push(Violation {
                        code: ViolationCode::AbstractClassInstantiation,
                        message: format!("class `{class_name}` is abstract"),
                        name: class_name.to_string(),
                    });
                }
                check_attributes(class_name, &class.attribute_specs, attributes, &mut violations);
            }
        }
        ValidationReport::from_violations(violations)
    }

    pub fn validate_edge(
        &self,
        predicate: &str,
        src_class: &str,
        dst_class: &str,
        attributes: &AttrMap,
    ) -> ValidationReport {
        let mut violations = Vec::new();
        match self.predicates.get(predicate) {
            None => violations.push(Violation {
                code: ViolationCode::UnknownPredicate,
                message: format!("predicate `{predicate}` is not declared"),
                name: predicate.to_string(),
            }),
            Some(p) => {
                if !self.conforms(src_class, &p.domain) {
                    violations.push(Violation {
                        code: ViolationCode::DomainMismatch,
                        message: format!(
                            "`{predicate}` expects a `{}` source, got `{src_class}`",
                            p.domain
                        ),
                        name: src_class.to_string(),
                    });
                }
                if !self.conforms(dst_class, &p.range) {
                    violations.push(Violation {
                        code: ViolationCode::RangeMismatch,
                        message: format!(
                            "`{predicate}` expects a `{}` target, got `{dst_class}`",
                            p.range
                        ),
                        name: dst_class.to_string(),
                    });
                }
                check_attributes(predicate, &p.attribute_specs, attributes, &mut violations);
            }
        }
        ValidationReport::from_violations(violations)
    }

    /// Declared kind of an attribute on a class or predicate, if any.
    pub fn attribute_kind(&self, owner: &str, attribute: &str) -> Option<ValueKind> {
        let specs = self
            .classes
            .get(owner)
            .map(|c| &c.attribute_specs)
            .or_else(|| self.predicates.get(owner).map(|p| &p.attribute_specs))?;
        specs.iter().find(|s| s.name == attribute).map(|s| s.kind)
    }
}

fn check_attribute_specs(specs: &[AttributeSpec]) -> Result<(), SchemaError> {
    let mut seen = BTreeSet::new();
    for spec in specs {
        if !is_attribute_token(&spec.name) {
            return Err(SchemaError::InvalidName(spec.name.clone()));
        }
        if !seen.insert(spec.name.as_str()) {
            return Err(SchemaError::NameCollision(spec.name.clone()));
        }
    }
    Ok(())
}

fn check_attributes(
    owner: &str,
    specs: &[AttributeSpec],
    attributes: &AttrMap,
    out: &mut Vec<Violation>,
) {
    for spec in specs.iter().filter(|s| s.required) {
        if !attributes.contains_key(&spec.name) {
            out.push(Violation {
                code: ViolationCode::MissingRequiredAttribute,
                message: format!("`{owner}` requires attribute `{}`", spec.name),
                name: spec.name.clone(),
            });
        }
    }
    for (name, value) in attributes {
        match specs.iter().find(|s| &s.name == name) {
            None => out.push(Violation {
                code: ViolationCode::UndeclaredAttribute,
                message: format!("`{owner}` does not declare attribute `{name}`"),
                name: name.clone(),
            }),
            Some(spec) if spec.kind != value.kind() => out.push(Violation {
                code: ViolationCode::ValueKindMismatch,
                message: format!(
                    "attribute `{name}` of `{owner}` must be {}, got {}",
                    spec.kind,
                    value.kind()
                ),
                name: name.clone(),
            }),
            Some(_) => {
                if let AttrValue::Decimal(d) = value {
                    if !d.is_finite() {
                        out.push(Violation {
                            code: ViolationCode::NonFiniteDecimal,
                            message: format!("attribute `{name}` must be finite"),
                            name: name.clone(),
                        });
                    }
                }
            }
        }
    }
}
