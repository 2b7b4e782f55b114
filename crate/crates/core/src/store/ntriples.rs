//! N-Triples export for linked-data interop. Edge attributes are not
//! exported; JSONL is the lossless format.

use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};

use super::{GraphSnapshot, StoreError};
use crate::value::AttrValue;

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

/// Everything except the RFC 3986 unreserved set.
const NOT_UNRESERVED: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'.').remove(b'_').remove(b'~');

fn check_base_iri(base: &str) -> Result<(), StoreError> {
    let bad = || StoreError::InvalidBaseIri(base.to_string());
    let (scheme, rest) = base.split_once(':').ok_or_else(bad)?;
    let scheme_ok = scheme.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        && scheme.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
    let body_ok = !rest.is_empty()
        && !base
            .chars()
            .any(|c| c <= ' ' || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\'));
    if scheme_ok && body_ok && base.ends_with('/') {
        Ok(())
    } else {
        Err(bad())
    }
}

pub(crate) fn entity_iri(base: &str, class_name: &str, id: &str) -> String {
    format!("{base}{class_name}/{}", utf8_percent_encode(id, NOT_UNRESERVED))
}

fn escape_literal(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 || c == '\u{7f}' => out.push_str(&format!("\\u{:04X}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

fn literal(value: &AttrValue) -> String {
    let lexical = escape_literal(&value.to_string());
    let datatype = match value {
        AttrValue::Text(_) => return format!("\"{lexical}\""),
        AttrValue::Integer(_) => "integer",
        AttrValue::Decimal(_) => "decimal",
        AttrValue::Boolean(_) => "boolean",
        AttrValue::Date(_) => "date",
    };
    format!("\"{lexical}\"^^<{XSD}{datatype}>")
}

/// One triple per line, lines sorted bytewise.
pub fn export_ntriples(snapshot: &GraphSnapshot, base_iri: &str) -> Result<String, StoreError> {
    check_base_iri(base_iri)?;
    let mut lines = Vec::new();
    for e in snapshot.entities() {
        let subject = entity_iri(base_iri, &e.class_name, &e.id);
        lines.push(format!("<{subject}> <{RDF_TYPE}> <{base_iri}{}> .", e.class_name));
        for (name, value) in &e.attributes {
            lines.push(format!("<{subject}> <{base_iri}attr/{name}> {} .", literal(value)));
        }
    }
    for e in snapshot.edges() {
        let (Some(src), Some(dst)) = (snapshot.class_of(&e.src), snapshot.class_of(&e.dst)) else {
            continue;
        };
        lines.push(format!(
            "<{}> <{base_iri}{}> <{}> .",
            entity_iri(base_iri, src, &e.src),
            e.predicate,
            entity_iri(base_iri, dst, &e.dst)
        ));
    }
    lines.sort_unstable();
    lines.dedup();
    let mut out = String::new();
    for line in lines {
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}
