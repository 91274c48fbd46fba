//! Service annotations built from instance models.
//!
//! A service is described by two A-box templates over the semantic model:
//! the input model (the fragment that must exist in the knowledge base before
//! the service can be called) and the output model (the triples the call
//! produces). Nodes with the same name in both models are the same instance;
//! that shared identity is what relates outputs to inputs.
//!
//! The concrete syntax is JSON:
//!
//! ```json
//! {
//!   "service": "ts:StockQuote",
//!   "prefixes": { "ts": "http://example.org/stock#" },
//!   "endpoint": { "kind": "mock", "name": "stockquote" },
//!   "inputModel": {
//!     "nodes": [ { "name": "ts", "class": "ts:TickerSymbol" },
//!                { "name": "sym", "datatype": "xsd:string" } ],
//!     "triples": [ [ "ts", "ts:tickerString", "sym" ] ]
//!   },
//!   "outputModel": { "nodes": [ ... ], "triples": [ ... ] },
//!   "grounding": { "lowering": { "symbol": "{sym}" }, "lifting": { "price": "val" } }
//! }
//! ```
//!
//! A triple object is a node name, a literal `{"value": .., "datatype": ..}`
//! or a fixed IRI `{"iri": ..}`. Prefixed names are accepted wherever an IRI
//! is and are expanded at parse time.

use std::collections::BTreeSet;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grounding::{GroundingError, GroundingSpec, Template};
use crate::runtime::EndpointRef;
use crate::store::Store;
use crate::term::{check_lexical, is_absolute_iri, vocab, Term};
use crate::turtle::Prefixes;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Classification {
    Class(String),
    Datatype(String),
}

impl Classification {
    pub fn iri(&self) -> &str {
        match self {
            Classification::Class(c) | Classification::Datatype(c) => c,
        }
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Classification::Datatype(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NodeMode {
    Open,
    Constant(Term),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TemplateNode {
    pub name: String,
    pub classification: Classification,
    pub mode: NodeMode,
}

impl TemplateNode {
    pub fn is_open(&self) -> bool {
        self.mode == NodeMode::Open
    }

    pub fn is_literal(&self) -> bool {
        self.classification.is_literal()
    }

    pub fn constant(&self) -> Option<&Term> {
        match &self.mode {
            NodeMode::Constant(t) => Some(t),
            NodeMode::Open => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TemplateObject {
    Node(String),
    Term(Term),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TemplateTriple {
    pub subject: String,
    pub predicate: String,
    pub object: TemplateObject,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InstanceModel {
    pub nodes: IndexMap<String, TemplateNode>,
    pub triples: Vec<TemplateTriple>,
}

impl InstanceModel {
    pub fn node(&self, name: &str) -> Option<&TemplateNode> {
        self.nodes.get(name)
    }

    pub fn names(&self) -> BTreeSet<String> {
        self.nodes.keys().cloned().collect()
    }

    /// The term a template position stands for: a variable named after an
    /// open node, the constant of a constant node, or a fixed term.
    pub fn term_for_node(&self, name: &str) -> Term {
        match self.nodes.get(name).map(|n| &n.mode) {
            Some(NodeMode::Constant(t)) => t.clone(),
            _ => Term::Var(name.to_string()),
        }
    }

    pub fn term_for_object(&self, o: &TemplateObject) -> Term {
        match o {
            TemplateObject::Node(n) => self.term_for_node(n),
            TemplateObject::Term(t) => t.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceAnnotation {
    pub service: String,
    pub prefixes: Prefixes,
    pub endpoint: EndpointRef,
    pub input: InstanceModel,
    pub output: InstanceModel,
    pub grounding: GroundingSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnnotationError {
    #[error("malformed annotation: {0}")]
    Syntax(String),
    #[error("duplicate node name {0:?} in the {1} model")]
    DuplicateNode(String, &'static str),
    #[error("triple references undeclared node {0:?}")]
    UndeclaredNode(String),
    #[error("node {0:?} is declared differently in the input and output models")]
    ConflictingNode(String),
    #[error("node {0:?} must have exactly one of `class` or `datatype`")]
    Classification(String),
    #[error("node {0:?} is not connected to any triple of its model")]
    DisconnectedNode(String),
    #[error("literal node {0:?} cannot be the subject of a triple")]
    LiteralSubject(String),
    #[error("open literal input node {0:?} must be the object of an input triple")]
    UnreachableLiteral(String),
    #[error("bad constant for node {node:?}: {reason}")]
    BadConstant { node: String, reason: String },
    #[error("undeclared prefix {0:?}")]
    UndeclaredPrefix(String),
    #[error("relative IRI {0:?}")]
    RelativeIri(String),
    #[error(transparent)]
    Grounding(#[from] GroundingError),
}

// Wire representation.

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct RawAnnotation {
    service: String,
    #[serde(default)]
    prefixes: IndexMap<String, String>,
    endpoint: EndpointRef,
    input_model: RawModel,
    output_model: RawModel,
    #[serde(default)]
    grounding: RawGrounding,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    #[serde(default)]
    nodes: Vec<RawNode>,
    #[serde(default)]
    triples: Vec<(String, String, RawObject)>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    class: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    datatype: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    constant: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawObject {
    Node(String),
    Literal { value: String, datatype: String },
    Iri { iri: String },
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrounding {
    #[serde(default)]
    lowering: IndexMap<String, String>,
    #[serde(default)]
    lifting: IndexMap<String, String>,
}

fn expand(name: &str, prefixes: &Prefixes) -> Result<String, AnnotationError> {
    if let Some(inner) = name.strip_prefix('<').and_then(|n| n.strip_suffix('>')) {
        return if is_absolute_iri(inner) {
            Ok(inner.to_string())
        } else {
            Err(AnnotationError::RelativeIri(inner.to_string()))
        };
    }
    if let Some((prefix, local)) = name.split_once(':') {
        if let Some(ns) = prefixes.get(prefix) {
            return Ok(format!("{ns}{local}"));
        }
        // Undeclared prefixes are typos unless the name is plainly a full IRI.
        let full = local.starts_with("//") || prefix == "urn";
        if full && is_absolute_iri(name) {
            return Ok(name.to_string());
        }
        return Err(AnnotationError::UndeclaredPrefix(prefix.to_string()));
    }
    Err(AnnotationError::RelativeIri(name.to_string()))
}

/// Standard vocabulary prefixes available in every annotation unless
/// overridden.
fn default_prefixes() -> Prefixes {
    let mut p = Prefixes::new();
    p.insert("rdf".into(), vocab::RDF.into());
    p.insert("rdfs".into(), vocab::RDFS.into());
    p.insert("owl".into(), vocab::OWL.into());
    p.insert("xsd".into(), vocab::XSD.into());
    p
}

pub fn parse_annotation(text: &str) -> Result<ServiceAnnotation, AnnotationError> {
    let raw: RawAnnotation =
        serde_json::from_str(text).map_err(|e| AnnotationError::Syntax(e.to_string()))?;
    let declared: Prefixes = raw.prefixes.clone();
    let mut scope = default_prefixes();
    scope.extend(raw.prefixes);

    let service = expand(&raw.service, &scope)?;
    let input = build_model(raw.input_model, &scope, "input")?;
    let output = build_model(raw.output_model, &scope, "output")?;
    for (name, node) in &output.nodes {
        if let Some(other) = input.nodes.get(name) {
            if other != node {
                return Err(AnnotationError::ConflictingNode(name.clone()));
            }
        }
    }
    for (name, node) in &input.nodes {
        if node.is_open()
            && node.is_literal()
            && !input
                .triples
                .iter()
                .any(|t| t.object == TemplateObject::Node(name.clone()))
        {
            return Err(AnnotationError::UnreachableLiteral(name.clone()));
        }
    }

    let mut lowering = IndexMap::new();
    for (field, template) in raw.grounding.lowering {
        let t = Template::parse(&template)?;
        for n in t.placeholders() {
            if !input.nodes.contains_key(n) {
                return Err(GroundingError::UnknownPlaceholder(n.to_string()).into());
            }
        }
        lowering.insert(field, t);
    }
    let mut lifting = IndexMap::new();
    for (field, target) in raw.grounding.lifting {
        match output.nodes.get(&target) {
            Some(n) if n.is_open() && n.is_literal() && !input.nodes.contains_key(&target) => {}
            _ => return Err(GroundingError::BadLiftTarget(target).into()),
        }
        lifting.insert(field, target);
    }
    for (name, node) in &output.nodes {
        if node.is_open()
            && node.is_literal()
            && !input.nodes.contains_key(name)
            && !lifting.values().any(|t| t == name)
        {
            return Err(GroundingError::UnliftedNode(name.clone()).into());
        }
    }

    Ok(ServiceAnnotation {
        service,
        prefixes: declared,
        endpoint: raw.endpoint,
        input,
        output,
        grounding: GroundingSpec { lowering, lifting },
    })
}

fn build_model(
    raw: RawModel,
    scope: &Prefixes,
    which: &'static str,
) -> Result<InstanceModel, AnnotationError> {
    let mut nodes = IndexMap::new();
    for rn in raw.nodes {
        let classification = match (&rn.class, &rn.datatype) {
            (Some(c), None) => Classification::Class(expand(c, scope)?),
            (None, Some(d)) => Classification::Datatype(expand(d, scope)?),
            _ => return Err(AnnotationError::Classification(rn.name)),
        };
        let mode = match rn.constant {
            None => NodeMode::Open,
            Some(c) => NodeMode::Constant(match &classification {
                Classification::Class(_) => Term::Iri(expand(&c, scope)?),
                Classification::Datatype(dt) => {
                    check_lexical(&c, dt).map_err(|e| AnnotationError::BadConstant {
                        node: rn.name.clone(),
                        reason: e.to_string(),
                    })?;
                    Term::literal(c, dt.clone())
                }
            }),
        };
        if rn.name.is_empty() {
            return Err(AnnotationError::Syntax("empty node name".into()));
        }
        if nodes.contains_key(&rn.name) {
            return Err(AnnotationError::DuplicateNode(rn.name, which));
        }
        nodes.insert(
            rn.name.clone(),
            TemplateNode {
                name: rn.name,
                classification,
                mode,
            },
        );
    }
    let mut triples = Vec::new();
    for (s, p, o) in raw.triples {
        let subject = nodes
            .get(&s)
            .ok_or_else(|| AnnotationError::UndeclaredNode(s.clone()))?;
        if subject.is_literal() {
            return Err(AnnotationError::LiteralSubject(s));
        }
        let predicate = expand(&p, scope)?;
        let object = match o {
            RawObject::Node(n) => {
                if !nodes.contains_key(&n) {
                    return Err(AnnotationError::UndeclaredNode(n));
                }
                TemplateObject::Node(n)
            }
            RawObject::Literal { value, datatype } => {
                let dt = expand(&datatype, scope)?;
                TemplateObject::Term(Term::literal(value, dt))
            }
            RawObject::Iri { iri } => TemplateObject::Term(Term::Iri(expand(&iri, scope)?)),
        };
        triples.push(TemplateTriple {
            subject: s,
            predicate,
            object,
        });
    }
    if nodes.len() > 1 {
        for name in nodes.keys() {
            let used = triples
                .iter()
                .any(|t| &t.subject == name || t.object == TemplateObject::Node(name.clone()));
            if !used {
                return Err(AnnotationError::DisconnectedNode(name.clone()));
            }
        }
    }
    Ok(InstanceModel { nodes, triples })
}

impl ServiceAnnotation {
    /// Writes the annotation in its JSON file format, with all IRIs expanded.
    pub fn to_json(&self) -> String {
        let raw = RawAnnotation {
            service: self.service.clone(),
            prefixes: self.prefixes.clone(),
            endpoint: self.endpoint.clone(),
            input_model: raw_model(&self.input),
            output_model: raw_model(&self.output),
            grounding: RawGrounding {
                lowering: self
                    .grounding
                    .lowering
                    .iter()
                    .map(|(k, v)| (k.clone(), v.to_string()))
                    .collect(),
                lifting: self.grounding.lifting.clone(),
            },
        };
        serde_json::to_string_pretty(&raw).expect("annotation serializes")
    }

    /// Local part of the service IRI (after the last `#` or `/`).
    pub fn local_name(&self) -> &str {
        local_name(&self.service)
    }
}

pub(crate) fn local_name(iri: &str) -> &str {
    iri.rsplit(['#', '/', ':'])
        .next()
        .filter(|s| !s.is_empty())
        .unwrap_or(iri)
}

fn raw_model(m: &InstanceModel) -> RawModel {
    RawModel {
        nodes: m
            .nodes
            .values()
            .map(|n| {
                let (class, datatype) = match &n.classification {
                    Classification::Class(c) => (Some(format!("<{c}>")), None),
                    Classification::Datatype(d) => (None, Some(format!("<{d}>"))),
                };
                let constant = n.constant().map(|t| match t {
                    Term::Iri(i) => format!("<{i}>"),
                    Term::Literal { lexical, .. } => lexical.clone(),
                    Term::Var(v) => unreachable!("constant variable {v}"),
                });
                RawNode {
                    name: n.name.clone(),
                    class,
                    datatype,
                    constant,
                }
            })
            .collect(),
        triples: m
            .triples
            .iter()
            .map(|t| {
                let o = match &t.object {
                    TemplateObject::Node(n) => RawObject::Node(n.clone()),
                    TemplateObject::Term(Term::Literal { lexical, datatype }) => {
                        RawObject::Literal {
                            value: lexical.clone(),
                            datatype: format!("<{datatype}>"),
                        }
                    }
                    TemplateObject::Term(Term::Iri(i)) => RawObject::Iri {
                        iri: format!("<{i}>"),
                    },
                    TemplateObject::Term(Term::Var(v)) => unreachable!("variable object {v}"),
                };
                (t.subject.clone(), format!("<{}>", t.predicate), o)
            })
            .collect(),
    }
}

/// Node names occurring in both models.
pub fn shared_nodes(a: &ServiceAnnotation) -> BTreeSet<String> {
    a.input
        .names()
        .intersection(&a.output.names())
        .cloned()
        .collect()
}

/// Output node names that are not input node names, constants included.
pub fn output_only_names(a: &ServiceAnnotation) -> BTreeSet<String> {
    a.output
        .names()
        .difference(&a.input.names())
        .cloned()
        .collect()
}

/// Input node names that are not output node names.
pub fn input_only_names(a: &ServiceAnnotation) -> BTreeSet<String> {
    a.input
        .names()
        .difference(&a.output.names())
        .cloned()
        .collect()
}

/// Open output-only nodes: the ones that receive new values on every call.
pub fn output_only_nodes(a: &ServiceAnnotation) -> BTreeSet<String> {
    output_only_names(a)
        .into_iter()
        .filter(|n| a.output.nodes[n].is_open())
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Checks an annotation against the semantic model loaded in `kb`.
pub fn validate(a: &ServiceAnnotation, kb: &Store) -> ValidationReport {
    let mut report = ValidationReport::default();
    for (which, model) in [("input", &a.input), ("output", &a.output)] {
        for node in model.nodes.values() {
            check_node(node, which, kb, &mut report);
        }
        for t in &model.triples {
            check_triple(t, model, which, kb, &mut report);
        }
    }

    if a.output.nodes.is_empty() {
        report.warnings.push("output model is empty".into());
    }
    if shared_nodes(a).is_empty() {
        report
            .warnings
            .push("input and output models share no nodes (pure producer)".into());
    }
    let produced = a
        .output
        .triples
        .iter()
        .filter(|t| !a.input.triples.contains(t))
        .count();
    if produced == 0 {
        report.warnings.push("no produced triples".into());
    }
    for t in &a.output.triples {
        if let Some(reason) = crate::compiler::head_drop_reason(t, &a.output) {
            report.warnings.push(format!(
                "output triple ({} <{}> {}) is not part of the rule head: {reason}",
                t.subject,
                t.predicate,
                object_label(&t.object)
            ));
        }
    }
    report
}

fn object_label(o: &TemplateObject) -> String {
    match o {
        TemplateObject::Node(n) => n.clone(),
        TemplateObject::Term(t) => t.to_string(),
    }
}

fn check_node(node: &TemplateNode, which: &str, kb: &Store, report: &mut ValidationReport) {
    match &node.classification {
        Classification::Class(c) => {
            if !kb.is_known_class(c) {
                report
                    .errors
                    .push(format!("{which} node {:?}: unknown class <{c}>", node.name));
            }
            if let Some(Term::Iri(i)) = node.constant() {
                let types = kb.type_of(i);
                if !types.is_empty() && !types.contains(c) {
                    report.errors.push(format!(
                        "{which} node {:?}: constant <{i}> is not an instance of <{c}>",
                        node.name
                    ));
                }
            }
        }
        Classification::Datatype(d) => {
            if !vocab::is_datatype(d) {
                report.errors.push(format!(
                    "{which} node {:?}: unknown datatype <{d}>",
                    node.name
                ));
            }
        }
    }
}

fn check_triple(
    t: &TemplateTriple,
    model: &InstanceModel,
    which: &str,
    kb: &Store,
    report: &mut ValidationReport,
) {
    let p = &t.predicate;
    if !kb.is_known_property(p) {
        report.errors.push(format!(
            "{which} triple on {:?}: unknown property <{p}>",
            t.subject
        ));
        return;
    }
    if p == vocab::RDF_TYPE {
        return;
    }
    let subject = &model.nodes[&t.subject];
    let subject_class = subject.classification.iri();
    for d in kb.domains_of(p) {
        if !kb.is_subclass_of(subject_class, &d) {
            report.errors.push(format!(
                "{which} triple ({} <{p}> ..): subject class <{subject_class}> violates domain <{d}>",
                t.subject
            ));
        }
    }
    let object_shape: Option<(bool, String)> = match &t.object {
        TemplateObject::Node(n) => {
            let node = &model.nodes[n];
            Some((node.is_literal(), node.classification.iri().to_string()))
        }
        TemplateObject::Term(Term::Literal { datatype, .. }) => Some((true, datatype.clone())),
        TemplateObject::Term(Term::Iri(i)) => {
            // A fixed IRI object is checked against its known types, if any.
            let types = kb.type_of(i);
            for r in kb.ranges_of(p) {
                if !types.is_empty() && !types.contains(&r) {
                    report.errors.push(format!(
                        "{which} triple ({} <{p}> <{i}>): object violates range <{r}>",
                        t.subject
                    ));
                }
            }
            None
        }
        TemplateObject::Term(Term::Var(_)) => None,
    };
    if let Some((is_literal, iri)) = object_shape {
        for r in kb.ranges_of(p) {
            let ok = match (is_literal, vocab::is_datatype(&r)) {
                (true, true) => r == vocab::RDFS_LITERAL || r == iri,
                (false, false) => kb.is_subclass_of(&iri, &r),
                _ => false,
            };
            if !ok {
                report.errors.push(format!(
                    "{which} triple ({} <{p}> ..): object <{iri}> violates range <{r}>",
                    t.subject
                ));
            }
        }
    }
}
