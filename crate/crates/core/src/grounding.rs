//! Mediation between knowledge-base fragments and wire messages.
//!
//! Lowering renders string templates over the input model's nodes into a
//! flat field map. Lifting maps response fields onto literal output nodes,
//! mints fresh IRIs for output-only object nodes and instantiates the output
//! model.
//!
//! The fragment handed to lowering is exactly the instantiated input model,
//! never the graph reachable from the bound instances.

use std::collections::BTreeMap;
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::{local_name, ServiceAnnotation, TemplateNode};
use crate::store::{ExtractError, Fragment, KbView};
use crate::term::{check_lexical, vocab, Binding, Pattern, Term, Triple};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundingError {
    #[error("lowering template {0:?} is malformed")]
    BadTemplate(String),
    #[error("lowering placeholder {{{0}}} does not name an input node")]
    UnknownPlaceholder(String),
    #[error("lifting target {0:?} is not an open output-only literal node")]
    BadLiftTarget(String),
    #[error("output literal node {0:?} has no lifting field")]
    UnliftedNode(String),
    #[error("node {0:?} is not bound")]
    Unbound(String),
    #[error("literal node {node:?} is bound to non-literal {found}")]
    NotALiteral { node: String, found: String },
    #[error("response is missing field {0:?}")]
    MissingField(String),
    #[error("response field {field:?}: {reason}")]
    Coercion { field: String, reason: String },
    #[error(transparent)]
    Extract(#[from] ExtractError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Segment {
    Text(String),
    Node(String),
}

/// A lowering template: literal text with `{node}` placeholders. `{{` and
/// `}}` stand for literal braces.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Template(Vec<Segment>);

impl Template {
    pub fn parse(text: &str) -> Result<Template, GroundingError> {
        let bad = || GroundingError::BadTemplate(text.to_string());
        let mut segments = Vec::new();
        let mut buf = String::new();
        let mut chars = text.chars().peekable();
        while let Some(c) = chars.next() {
            match c {
                '{' if chars.peek() == Some(&'{') => {
                    chars.next();
                    buf.push('{');
                }
                '}' if chars.peek() == Some(&'}') => {
                    chars.next();
                    buf.push('}');
                }
                '{' => {
                    let mut name = String::new();
                    loop {
                        match chars.next() {
                            Some('}') => break,
                            Some('{') | None => return Err(bad()),
                            Some(c) => name.push(c),
                        }
                    }
                    if name.is_empty() {
                        return Err(bad());
                    }
                    if !buf.is_empty() {
                        segments.push(Segment::Text(std::mem::take(&mut buf)));
                    }
                    segments.push(Segment::Node(name));
                }
                '}' => return Err(bad()),
                c => buf.push(c),
            }
        }
        if !buf.is_empty() {
            segments.push(Segment::Text(buf));
        }
        Ok(Template(segments))
    }

    pub fn placeholders(&self) -> impl Iterator<Item = &str> {
        self.0.iter().filter_map(|s| match s {
            Segment::Node(n) => Some(n.as_str()),
            Segment::Text(_) => None,
        })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.0
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            match s {
                Segment::Text(t) => f.write_str(&t.replace('{', "{{").replace('}', "}}"))?,
                Segment::Node(n) => write!(f, "{{{n}}}")?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundingSpec {
    /// Request field name to value template.
    pub lowering: IndexMap<String, Template>,
    /// Response field name to output node name.
    pub lifting: IndexMap<String, String>,
}

/// A flat map of field names to wire strings. Field order is canonical
/// (sorted), which makes equal messages compare and serialize identically.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SyntacticMessage(BTreeMap<String, String>);

impl SyntacticMessage {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, field: impl Into<String>, value: impl Into<String>) -> Self {
        self.0.insert(field.into(), value.into());
        self
    }

    pub fn insert(&mut self, field: impl Into<String>, value: impl Into<String>) {
        self.0.insert(field.into(), value.into());
    }

    pub fn get(&self, field: &str) -> Option<&str> {
        self.0.get(field).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("string map serializes")
    }

    /// Parses a flat JSON object whose values are all strings.
    pub fn from_json(text: &str) -> Result<Self, String> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let serde_json::Value::Object(map) = value else {
            return Err("expected a JSON object".into());
        };
        let mut out = SyntacticMessage::new();
        for (k, v) in map {
            match v {
                serde_json::Value::String(s) => out.insert(k, s),
                other => return Err(format!("field {k:?} is not a string: {other}")),
            }
        }
        Ok(out)
    }
}

impl FromIterator<(String, String)> for SyntacticMessage {
    fn from_iter<I: IntoIterator<Item = (String, String)>>(iter: I) -> Self {
        SyntacticMessage(iter.into_iter().collect())
    }
}

/// Patterns of the input model: its triples plus one type pattern per open
/// object node, in file order.
pub fn input_patterns(a: &ServiceAnnotation) -> Vec<Pattern> {
    let m = &a.input;
    let rdf_type = Term::Iri(vocab::RDF_TYPE.to_string());
    let mut out: Vec<Pattern> = m
        .nodes
        .values()
        .filter(|n| n.is_open() && !n.is_literal())
        .map(|n| {
            Pattern::new(
                Term::Var(n.name.clone()),
                rdf_type.clone(),
                Term::Iri(n.classification.iri().to_string()),
            )
        })
        .collect();
    out.extend(m.triples.iter().map(|t| {
        Pattern::new(
            m.term_for_node(&t.subject),
            Term::Iri(t.predicate.clone()),
            m.term_for_object(&t.object),
        )
    }));
    out
}

/// The exact input-model fragment under `bind`, checked against the view.
pub fn extract_input_fragment(
    a: &ServiceAnnotation,
    bind: &Binding,
    kb: &KbView<'_>,
) -> Result<Fragment, GroundingError> {
    for n in a.input.nodes.values().filter(|n| n.is_open()) {
        if !bind.contains(&n.name) {
            return Err(GroundingError::Unbound(n.name.clone()));
        }
    }
    Ok(kb.extract(&input_patterns(a), bind)?)
}

fn node_value(node: &TemplateNode, bind: &Binding) -> Result<String, GroundingError> {
    let term = match node.constant() {
        Some(c) => c.clone(),
        None => bind
            .get(&node.name)
            .cloned()
            .ok_or_else(|| GroundingError::Unbound(node.name.clone()))?,
    };
    match (&term, node.is_literal()) {
        (Term::Literal { lexical, .. }, true) => Ok(lexical.clone()),
        (Term::Iri(i), false) => Ok(i.clone()),
        (Term::Literal { lexical, .. }, false) => Ok(lexical.clone()),
        (other, true) => Err(GroundingError::NotALiteral {
            node: node.name.clone(),
            found: other.to_string(),
        }),
        (Term::Var(_), false) => Err(GroundingError::Unbound(node.name.clone())),
    }
}

/// Renders every lowering template. Literal nodes contribute their lexical
/// form, object nodes their IRI.
pub fn lower(
    _fragment: &Fragment,
    a: &ServiceAnnotation,
    bind: &Binding,
) -> Result<SyntacticMessage, GroundingError> {
    let mut msg = SyntacticMessage::new();
    for (field, template) in &a.grounding.lowering {
        let mut value = String::new();
        for seg in template.segments() {
            match seg {
                Segment::Text(t) => value.push_str(t),
                Segment::Node(n) => {
                    let node = a
                        .input
                        .node(n)
                        .ok_or_else(|| GroundingError::UnknownPlaceholder(n.clone()))?;
                    value.push_str(&node_value(node, bind)?);
                }
            }
        }
        msg.insert(field.clone(), value);
    }
    Ok(msg)
}

/// Deterministic IRI for an output-only object node of one service call.
pub fn fresh_instance(base: &str, node: &str, service: &str, call_id: u64) -> String {
    format!("{base}{}/{node}/{call_id}", local_name(service))
}

/// Turns a response into output-model triples.
///
/// Output-only object nodes get fresh IRIs, lifted literal nodes get the
/// response value with their declared datatype, shared nodes keep their input
/// bindings. Fresh instances also receive a type assertion.
pub fn lift(
    resp: &SyntacticMessage,
    a: &ServiceAnnotation,
    bind: &Binding,
    call_id: u64,
    fresh_base: &str,
) -> Result<(Fragment, Binding), GroundingError> {
    let mut out = bind.clone();
    let mut fresh = Vec::new();
    for node in a.output.nodes.values() {
        if !node.is_open() || a.input.nodes.contains_key(&node.name) || node.is_literal() {
            continue;
        }
        let iri = fresh_instance(fresh_base, &node.name, &a.service, call_id);
        out.insert(node.name.clone(), Term::Iri(iri));
        fresh.push(node);
    }
    for (field, target) in &a.grounding.lifting {
        let value = resp
            .get(field)
            .ok_or_else(|| GroundingError::MissingField(field.clone()))?;
        let datatype = a.output.nodes[target].classification.iri().to_string();
        check_lexical(value, &datatype).map_err(|e| GroundingError::Coercion {
            field: field.clone(),
            reason: e.to_string(),
        })?;
        out.insert(target.clone(), Term::literal(value, datatype));
    }

    let m = &a.output;
    let mut fragment = Fragment::new();
    for t in &m.triples {
        let p = Pattern::new(
            m.term_for_node(&t.subject),
            Term::Iri(t.predicate.clone()),
            m.term_for_object(&t.object),
        )
        .apply(&out);
        if let Some(v) = p.variables().first() {
            return Err(GroundingError::Unbound(v.to_string()));
        }
        let triple = p.to_triple().map_err(|e| GroundingError::Coercion {
            field: t.subject.clone(),
            reason: e.to_string(),
        })?;
        fragment.insert(triple);
    }
    for node in fresh {
        let subject = out.get(&node.name).expect("fresh node bound").clone();
        fragment.insert(
            Triple::new(
                subject,
                Term::Iri(vocab::RDF_TYPE.to_string()),
                Term::Iri(node.classification.iri().to_string()),
            )
            .expect("well-shaped type triple"),
        );
    }
    Ok((fragment, out))
}
