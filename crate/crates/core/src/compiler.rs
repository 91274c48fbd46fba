//! Compiles a service annotation into a Horn rule.
//!
//! The body is the input model: one type atom per open object node, then the
//! input triples, then the service built-in. The head is the output model
//! minus type statements and minus triples that mention no open node.
//! Open nodes become variables named after the node; constants are inlined.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::sync::Arc;

use crate::annotation::{
    output_only_nodes, InstanceModel, ServiceAnnotation, TemplateObject, TemplateTriple,
};
use crate::term::{vocab, Pattern, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Builtin {
    pub service: String,
    /// Open input nodes, in file order.
    pub inputs: Vec<String>,
    /// Open output-only nodes, in file order.
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Atom {
    Triple(Pattern),
    Type { var: String, class: String },
    Builtin(Builtin),
}

impl Atom {
    pub fn variables(&self) -> Vec<String> {
        match self {
            Atom::Triple(p) => p.variables().into_iter().map(String::from).collect(),
            Atom::Type { var, .. } => vec![var.clone()],
            Atom::Builtin(b) => b.inputs.iter().chain(&b.outputs).cloned().collect(),
        }
    }

    /// The goal pattern this atom poses, if it is not the built-in.
    pub fn as_pattern(&self) -> Option<Pattern> {
        match self {
            Atom::Triple(p) => Some(p.clone()),
            Atom::Type { var, class } => Some(Pattern::new(
                Term::Var(var.clone()),
                Term::Iri(vocab::RDF_TYPE.to_string()),
                Term::Iri(class.clone()),
            )),
            Atom::Builtin(_) => None,
        }
    }
}

/// `body -> head`. The head holds triple patterns only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub id: String,
    pub body: Vec<Atom>,
    pub head: Vec<Pattern>,
    pub annotation: Arc<ServiceAnnotation>,
}

impl Rule {
    pub fn builtin(&self) -> Option<&Builtin> {
        self.body.iter().find_map(|a| match a {
            Atom::Builtin(b) => Some(b),
            _ => None,
        })
    }

    /// Variables bound by the body before the built-in runs.
    pub fn body_variables(&self) -> BTreeSet<String> {
        self.body
            .iter()
            .filter(|a| !matches!(a, Atom::Builtin(_)))
            .flat_map(|a| a.variables())
            .collect()
    }

    pub fn head_variables(&self) -> BTreeSet<String> {
        self.head
            .iter()
            .flat_map(|p| p.variables().into_iter().map(String::from))
            .collect()
    }

    /// One line per atom; see the README for the format.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "rule <{}>", self.id);
        for a in &self.body {
            match a {
                Atom::Type { var, class } => {
                    let _ = writeln!(out, "  body type ?{var} <{class}>");
                }
                Atom::Triple(p) => {
                    let _ = writeln!(out, "  body triple {p}");
                }
                Atom::Builtin(b) => {
                    let vars = |vs: &[String]| {
                        vs.iter()
                            .map(|v| format!("?{v}"))
                            .collect::<Vec<_>>()
                            .join(" ")
                    };
                    let _ = writeln!(
                        out,
                        "  body builtin <{}> in({}) out({})",
                        b.service,
                        vars(&b.inputs),
                        vars(&b.outputs)
                    );
                }
            }
        }
        for p in &self.head {
            let _ = writeln!(out, "  head triple {p}");
        }
        out
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}

/// Why an output triple is left out of the head, if it is.
pub(crate) fn head_drop_reason(t: &TemplateTriple, output: &InstanceModel) -> Option<&'static str> {
    if t.predicate == vocab::RDF_TYPE {
        return Some("type statements never appear in a rule head");
    }
    let open = |name: &str| output.node(name).is_some_and(|n| n.is_open());
    let object_open = matches!(&t.object, TemplateObject::Node(n) if open(n));
    if !open(&t.subject) && !object_open {
        return Some("it mentions no open node");
    }
    None
}

/// Drops type statements and triples without an open node; the rest become
/// patterns over the output model's node variables.
pub fn head_filter(triples: &[TemplateTriple], output: &InstanceModel) -> Vec<Pattern> {
    triples
        .iter()
        .filter(|t| head_drop_reason(t, output).is_none())
        .map(|t| {
            Pattern::new(
                output.term_for_node(&t.subject),
                Term::Iri(t.predicate.clone()),
                output.term_for_object(&t.object),
            )
        })
        .collect()
}

/// Compiles a validated annotation. Pure: equal annotations give equal rules.
pub fn compile(a: &ServiceAnnotation) -> Rule {
    compile_shared(Arc::new(a.clone()))
}

pub fn compile_shared(a: Arc<ServiceAnnotation>) -> Rule {
    let input = &a.input;
    let mut body = Vec::new();
    for n in input.nodes.values() {
        // Literal nodes get no type atom; the built-in checks their datatype.
        if n.is_open() && !n.is_literal() {
            body.push(Atom::Type {
                var: n.name.clone(),
                class: n.classification.iri().to_string(),
            });
        }
    }
    for t in &input.triples {
        body.push(Atom::Triple(Pattern::new(
            input.term_for_node(&t.subject),
            Term::Iri(t.predicate.clone()),
            input.term_for_object(&t.object),
        )));
    }
    let inputs = input
        .nodes
        .values()
        .filter(|n| n.is_open())
        .map(|n| n.name.clone())
        .collect();
    let only = output_only_nodes(&a);
    let outputs = a
        .output
        .nodes
        .keys()
        .filter(|n| only.contains(*n))
        .cloned()
        .collect();
    body.push(Atom::Builtin(Builtin {
        service: a.service.clone(),
        inputs,
        outputs,
    }));
    let head = head_filter(&a.output.triples, &a.output);
    Rule {
        id: a.service.clone(),
        body,
        head,
        annotation: a,
    }
}
