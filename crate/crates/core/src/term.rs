//! Terms, triples and patterns.
//!
//! A [`Term`] is the single atom shared by stored triples, query patterns and
//! variable bindings. Stored triples never contain variables; patterns may hold
//! a variable in any position.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Well-known vocabulary IRIs. Comparisons are byte-exact after prefix expansion.
pub mod vocab {
    pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
    pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
    pub const OWL: &str = "http://www.w3.org/2002/07/owl#";
    pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

    pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
    pub const RDF_PROPERTY: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#Property";

    pub const RDFS_SUBCLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
    pub const RDFS_SUBPROPERTY_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subPropertyOf";
    pub const RDFS_DOMAIN: &str = "http://www.w3.org/2000/01/rdf-schema#domain";
    pub const RDFS_RANGE: &str = "http://www.w3.org/2000/01/rdf-schema#range";
    pub const RDFS_CLASS: &str = "http://www.w3.org/2000/01/rdf-schema#Class";
    pub const RDFS_DATATYPE: &str = "http://www.w3.org/2000/01/rdf-schema#Datatype";
    pub const RDFS_LITERAL: &str = "http://www.w3.org/2000/01/rdf-schema#Literal";

    pub const OWL_CLASS: &str = "http://www.w3.org/2002/07/owl#Class";
    pub const OWL_OBJECT_PROPERTY: &str = "http://www.w3.org/2002/07/owl#ObjectProperty";
    pub const OWL_DATATYPE_PROPERTY: &str = "http://www.w3.org/2002/07/owl#DatatypeProperty";

    pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
    pub const XSD_BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";
    pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
    pub const XSD_INT: &str = "http://www.w3.org/2001/XMLSchema#int";
    pub const XSD_LONG: &str = "http://www.w3.org/2001/XMLSchema#long";
    pub const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
    pub const XSD_DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
    pub const XSD_FLOAT: &str = "http://www.w3.org/2001/XMLSchema#float";

    /// Object of an `rdf:type` statement that declares vocabulary rather than
    /// typing an individual.
    pub fn is_declaration_class(iri: &str) -> bool {
        matches!(
            iri,
            RDFS_CLASS
                | OWL_CLASS
                | RDF_PROPERTY
                | OWL_OBJECT_PROPERTY
                | OWL_DATATYPE_PROPERTY
                | RDFS_DATATYPE
        )
    }

    pub fn is_datatype(iri: &str) -> bool {
        iri.starts_with(XSD) || iri == RDFS_LITERAL
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("relative IRI <{0}>: IRIs must be absolute")]
    RelativeIri(String),
    #[error("empty variable name")]
    EmptyVariable,
    #[error("{position} must be an IRI, found {found}")]
    NotAnIri {
        position: &'static str,
        found: String,
    },
    #[error("variable {0} in a ground triple")]
    VariableInTriple(String),
    #[error("literal {lexical:?} is not a valid {datatype}")]
    BadLexical { lexical: String, datatype: String },
}

/// An IRI, a typed literal or a variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(String),
    Literal { lexical: String, datatype: String },
    Var(String),
}

impl Term {
    pub fn iri(iri: impl Into<String>) -> Result<Term, TermError> {
        let iri = iri.into();
        if !is_absolute_iri(&iri) {
            return Err(TermError::RelativeIri(iri));
        }
        Ok(Term::Iri(iri))
    }

    /// Builds an IRI term without checking that it is absolute.
    pub fn iri_unchecked(iri: impl Into<String>) -> Term {
        Term::Iri(iri.into())
    }

    pub fn literal(lexical: impl Into<String>, datatype: impl Into<String>) -> Term {
        Term::Literal {
            lexical: lexical.into(),
            datatype: datatype.into(),
        }
    }

    /// Plain literal, typed as `xsd:string`.
    pub fn string(lexical: impl Into<String>) -> Term {
        Term::literal(lexical, vocab::XSD_STRING)
    }

    pub fn var(name: impl Into<String>) -> Result<Term, TermError> {
        let name = name.into();
        if name.is_empty() {
            return Err(TermError::EmptyVariable);
        }
        Ok(Term::Var(name))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_ground(&self) -> bool {
        !self.is_var()
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(i) => Some(i),
            _ => None,
        }
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(i) => write!(f, "<{i}>"),
            Term::Literal { lexical, datatype } => {
                write!(f, "\"{}\"^^<{}>", escape_string(lexical), datatype)
            }
            Term::Var(v) => write!(f, "?{v}"),
        }
    }
}

pub(crate) fn escape_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

/// An IRI is absolute when it starts with a scheme followed by `:`.
pub fn is_absolute_iri(iri: &str) -> bool {
    let Some(colon) = iri.find(':') else {
        return false;
    };
    let scheme = &iri[..colon];
    let mut chars = scheme.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
}

/// Checks that `lexical` is a well-formed value of `datatype`.
///
/// Only the numeric and boolean XSD types are checked; every other datatype
/// accepts any lexical form.
pub fn check_lexical(lexical: &str, datatype: &str) -> Result<(), TermError> {
    let ok = match datatype {
        vocab::XSD_INTEGER | vocab::XSD_INT | vocab::XSD_LONG => {
            let digits = lexical.strip_prefix(['+', '-']).unwrap_or(lexical);
            !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
        }
        vocab::XSD_DECIMAL => {
            let body = lexical.strip_prefix(['+', '-']).unwrap_or(lexical);
            let (int, frac) = body.split_once('.').unwrap_or((body, ""));
            (!int.is_empty() || !frac.is_empty())
                && int.bytes().all(|b| b.is_ascii_digit())
                && frac.bytes().all(|b| b.is_ascii_digit())
        }
        vocab::XSD_DOUBLE | vocab::XSD_FLOAT => {
            matches!(lexical, "INF" | "+INF" | "-INF" | "NaN")
                || (lexical.parse::<f64>().is_ok()
                    && !lexical.eq_ignore_ascii_case("inf")
                    && !lexical.to_ascii_lowercase().contains("infinity")
                    && !lexical.eq_ignore_ascii_case("nan"))
        }
        vocab::XSD_BOOLEAN => matches!(lexical, "true" | "false" | "1" | "0"),
        _ => true,
    };
    if ok {
        Ok(())
    } else {
        Err(TermError::BadLexical {
            lexical: lexical.to_string(),
            datatype: datatype.to_string(),
        })
    }
}

/// A ground statement. Subject and predicate are IRIs; the object is an IRI or
/// a literal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    subject: Term,
    predicate: Term,
    object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Result<Triple, TermError> {
        for t in [&subject, &predicate, &object] {
            if let Term::Var(v) = t {
                return Err(TermError::VariableInTriple(v.clone()));
            }
        }
        if !matches!(subject, Term::Iri(_)) {
            return Err(TermError::NotAnIri {
                position: "subject",
                found: subject.to_string(),
            });
        }
        if !matches!(predicate, Term::Iri(_)) {
            return Err(TermError::NotAnIri {
                position: "predicate",
                found: predicate.to_string(),
            });
        }
        Ok(Triple {
            subject,
            predicate,
            object,
        })
    }

    pub fn subject(&self) -> &Term {
        &self.subject
    }

    pub fn predicate(&self) -> &Term {
        &self.predicate
    }

    pub fn object(&self) -> &Term {
        &self.object
    }

    pub fn subject_iri(&self) -> &str {
        self.subject.as_iri().expect("triple subject is an IRI")
    }

    pub fn predicate_iri(&self) -> &str {
        self.predicate.as_iri().expect("triple predicate is an IRI")
    }

    pub fn as_pattern(&self) -> Pattern {
        Pattern::new(
            self.subject.clone(),
            self.predicate.clone(),
            self.object.clone(),
        )
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

/// A triple shape with variables allowed in any position.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl Pattern {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Pattern {
        Pattern {
            subject,
            predicate,
            object,
        }
    }

    pub fn terms(&self) -> [&Term; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    /// Variable names in left-to-right order, without repeats.
    pub fn variables(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for t in self.terms() {
            if let Term::Var(v) = t {
                if !out.contains(&v.as_str()) {
                    out.push(v);
                }
            }
        }
        out
    }

    pub fn is_ground(&self) -> bool {
        self.terms().iter().all(|t| t.is_ground())
    }

    /// Substitutes bound variables; unbound ones are kept.
    pub fn apply(&self, binding: &Binding) -> Pattern {
        Pattern::new(
            binding.resolve(&self.subject),
            binding.resolve(&self.predicate),
            binding.resolve(&self.object),
        )
    }

    /// Converts to a triple when fully ground and well-shaped.
    pub fn to_triple(&self) -> Result<Triple, TermError> {
        Triple::new(
            self.subject.clone(),
            self.predicate.clone(),
            self.object.clone(),
        )
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.subject, self.predicate, self.object)
    }
}

/// Variable name to ground term.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Binding(BTreeMap<String, Term>);

impl Binding {
    pub fn new() -> Binding {
        Binding::default()
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.0.get(var)
    }

    pub fn contains(&self, var: &str) -> bool {
        self.0.contains_key(var)
    }

    /// Binds `var`; panics if `value` is a variable.
    pub fn insert(&mut self, var: impl Into<String>, value: Term) {
        assert!(value.is_ground(), "bindings hold ground terms only");
        self.0.insert(var.into(), value);
    }

    pub fn with(mut self, var: impl Into<String>, value: Term) -> Binding {
        self.insert(var, value);
        self
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Term)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn resolve(&self, term: &Term) -> Term {
        match term {
            Term::Var(v) => self.0.get(v).cloned().unwrap_or_else(|| term.clone()),
            t => t.clone(),
        }
    }

    /// Restriction to the given variable names.
    pub fn project<'a>(&self, vars: impl IntoIterator<Item = &'a str>) -> Binding {
        let mut out = Binding::new();
        for v in vars {
            if let Some(t) = self.0.get(v) {
                out.0.insert(v.to_string(), t.clone());
            }
        }
        out
    }
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("true");
        }
        let mut first = true;
        for (k, v) in &self.0 {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "?{k}={v}")?;
        }
        Ok(())
    }
}
