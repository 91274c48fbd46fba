//! In-memory triple store.
//!
//! The store keeps three kinds of content apart:
//!
//! * data triples (the A-box), in insertion order;
//! * schema axioms (`rdfs:subClassOf`, `rdfs:subPropertyOf`, `rdfs:domain`,
//!   `rdfs:range`);
//! * vocabulary declarations (`x a owl:Class`, `p a rdf:Property`, ...).
//!
//! `rdf:type` statements about individuals are data, but they are answered
//! through [`KbView::type_of`], so asserted and inferred types look the same to
//! [`KbView::match_pattern`]. Domain and range typing is computed per query
//! and never materialized.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use indexmap::IndexSet;
use thiserror::Error;

use crate::term::{vocab, Binding, Pattern, Term, TermError, Triple};
use crate::turtle::{self, Prefixes, SyntaxError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AxiomKind {
    SubClassOf,
    SubPropertyOf,
    Domain,
    Range,
}

impl AxiomKind {
    pub fn from_predicate(iri: &str) -> Option<AxiomKind> {
        match iri {
            vocab::RDFS_SUBCLASS_OF => Some(AxiomKind::SubClassOf),
            vocab::RDFS_SUBPROPERTY_OF => Some(AxiomKind::SubPropertyOf),
            vocab::RDFS_DOMAIN => Some(AxiomKind::Domain),
            vocab::RDFS_RANGE => Some(AxiomKind::Range),
            _ => None,
        }
    }

    pub fn predicate(self) -> &'static str {
        match self {
            AxiomKind::SubClassOf => vocab::RDFS_SUBCLASS_OF,
            AxiomKind::SubPropertyOf => vocab::RDFS_SUBPROPERTY_OF,
            AxiomKind::Domain => vocab::RDFS_DOMAIN,
            AxiomKind::Range => vocab::RDFS_RANGE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SchemaAxiom {
    pub kind: AxiomKind,
    pub left: String,
    pub right: String,
}

impl SchemaAxiom {
    pub fn new(kind: AxiomKind, left: impl Into<String>, right: impl Into<String>) -> Self {
        SchemaAxiom {
            kind,
            left: left.into(),
            right: right.into(),
        }
    }
}

/// A duplicate-free set of ground triples, kept in insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Fragment(IndexSet<Triple>);

impl Fragment {
    pub fn new() -> Fragment {
        Fragment::default()
    }

    /// Returns true when the triple was not already present.
    pub fn insert(&mut self, t: Triple) -> bool {
        self.0.insert(t)
    }

    pub fn extend(&mut self, other: &Fragment) {
        for t in other.iter() {
            self.0.insert(t.clone());
        }
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.0.contains(t)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.0.iter()
    }

    /// Truncates back to the first `len` triples.
    pub fn truncate(&mut self, len: usize) {
        self.0.truncate(len);
    }
}

impl FromIterator<Triple> for Fragment {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        Fragment(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a Fragment {
    type Item = &'a Triple;
    type IntoIter = indexmap::set::Iter<'a, Triple>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoreError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("schema statement {0} must relate two IRIs")]
    BadAxiom(String),
    #[error(transparent)]
    Term(#[from] TermError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error("required triple missing from the knowledge base: {0}")]
    Missing(Box<Triple>),
    #[error("pattern {0} is not ground under the binding")]
    Unground(Box<Pattern>),
    #[error("pattern instantiates to an ill-formed triple: {0}")]
    IllFormed(#[from] TermError),
}

/// Counts of new content from a load.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadSummary {
    pub triples: usize,
    pub axioms: usize,
    pub declarations: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Store {
    triples: IndexSet<Triple>,
    axioms: IndexSet<SchemaAxiom>,
    declarations: IndexSet<(String, String)>,
    prefixes: Prefixes,
    // IRIs in order of first appearance as subject or object.
    nodes: IndexSet<String>,
    by_subject: HashMap<Term, Vec<usize>>,
    by_predicate: HashMap<Term, Vec<usize>>,
    by_object: HashMap<Term, Vec<usize>>,
    superclasses: HashMap<String, Vec<String>>,
    superproperties: HashMap<String, Vec<String>>,
    domains: HashMap<String, Vec<String>>,
    ranges: HashMap<String, Vec<String>>,
}

impl Store {
    pub fn new() -> Store {
        Store::default()
    }

    /// Loads a Turtle-subset document. Loading the same text twice adds nothing
    /// the second time.
    pub fn load_turtle(&mut self, text: &str) -> Result<LoadSummary, StoreError> {
        let doc = turtle::parse_with_prefixes(text, self.prefixes.clone())?;
        // Validate the whole document before touching the store.
        for t in &doc.triples {
            if AxiomKind::from_predicate(t.predicate_iri()).is_some()
                && t.object().as_iri().is_none()
            {
                return Err(StoreError::BadAxiom(t.to_string()));
            }
        }
        self.prefixes = doc.prefixes;
        let mut summary = LoadSummary::default();
        for t in doc.triples {
            self.insert_statement(t, &mut summary);
        }
        Ok(summary)
    }

    /// Adds ground triples; returns how many were not already present.
    ///
    /// Schema and declaration statements are routed the same way as in
    /// [`Store::load_turtle`].
    pub fn add_triples(&mut self, fragment: &Fragment) -> Result<usize, StoreError> {
        for t in fragment {
            if AxiomKind::from_predicate(t.predicate_iri()).is_some()
                && t.object().as_iri().is_none()
            {
                return Err(StoreError::BadAxiom(t.to_string()));
            }
        }
        let mut summary = LoadSummary::default();
        for t in fragment {
            self.insert_statement(t.clone(), &mut summary);
        }
        Ok(summary.triples + summary.axioms + summary.declarations)
    }

    fn insert_statement(&mut self, t: Triple, summary: &mut LoadSummary) {
        let pred = t.predicate_iri();
        if let Some(kind) = AxiomKind::from_predicate(pred) {
            let right = t.object().as_iri().expect("checked by caller");
            if self.add_axiom(SchemaAxiom::new(kind, t.subject_iri(), right)) {
                summary.axioms += 1;
            }
            return;
        }
        if pred == vocab::RDF_TYPE {
            if let Some(class) = t.object().as_iri() {
                if vocab::is_declaration_class(class) {
                    if self
                        .declarations
                        .insert((t.subject_iri().to_string(), class.to_string()))
                    {
                        summary.declarations += 1;
                    }
                    return;
                }
            }
        }
        if self.insert_data(t) {
            summary.triples += 1;
        }
    }

    fn insert_data(&mut self, t: Triple) -> bool {
        if self.triples.contains(&t) {
            return false;
        }
        let idx = self.triples.len();
        self.nodes.insert(t.subject_iri().to_string());
        if let Some(o) = t.object().as_iri() {
            self.nodes.insert(o.to_string());
        }
        self.by_subject
            .entry(t.subject().clone())
            .or_default()
            .push(idx);
        self.by_predicate
            .entry(t.predicate().clone())
            .or_default()
            .push(idx);
        self.by_object
            .entry(t.object().clone())
            .or_default()
            .push(idx);
        self.triples.insert(t);
        true
    }

    /// Returns true when the axiom is new.
    pub fn add_axiom(&mut self, axiom: SchemaAxiom) -> bool {
        if self.axioms.contains(&axiom) {
            return false;
        }
        let map = match axiom.kind {
            AxiomKind::SubClassOf => &mut self.superclasses,
            AxiomKind::SubPropertyOf => &mut self.superproperties,
            AxiomKind::Domain => &mut self.domains,
            AxiomKind::Range => &mut self.ranges,
        };
        map.entry(axiom.left.clone())
            .or_default()
            .push(axiom.right.clone());
        self.axioms.insert(axiom);
        true
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn triples(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    pub fn axioms(&self) -> impl Iterator<Item = &SchemaAxiom> {
        self.axioms.iter()
    }

    pub fn prefixes(&self) -> &Prefixes {
        &self.prefixes
    }

    /// A read view with no overlay.
    pub fn view(&self) -> KbView<'_> {
        KbView {
            store: self,
            overlay: &[],
        }
    }

    /// A read view that also sees `overlay` as if it were stored.
    pub fn view_with<'a>(&'a self, overlay: &'a [Triple]) -> KbView<'a> {
        KbView {
            store: self,
            overlay,
        }
    }

    pub fn match_pattern(&self, p: &Pattern) -> Vec<Binding> {
        self.view().match_pattern(p)
    }

    pub fn type_of(&self, iri: &str) -> BTreeSet<String> {
        self.view().type_of(iri)
    }

    pub fn extract(&self, patterns: &[Pattern], b: &Binding) -> Result<Fragment, ExtractError> {
        self.view().extract(patterns, b)
    }

    /// Reflexive-transitive closure of `rdfs:subClassOf`. Unknown IRIs are
    /// their own sole superclass.
    pub fn is_subclass_of(&self, sub: &str, sup: &str) -> bool {
        sub == sup || closure(&self.superclasses, sub).contains(sup)
    }

    pub fn is_subproperty_of(&self, sub: &str, sup: &str) -> bool {
        sub == sup || closure(&self.superproperties, sub).contains(sup)
    }

    /// All superclasses, including `class` itself.
    pub fn superclasses_of(&self, class: &str) -> Vec<String> {
        closure(&self.superclasses, class).into_iter().collect()
    }

    /// Domains of `property` and of its superproperties.
    pub fn domains_of(&self, property: &str) -> Vec<String> {
        self.lookup_via_superproperties(&self.domains, property)
    }

    /// Ranges of `property` and of its superproperties.
    pub fn ranges_of(&self, property: &str) -> Vec<String> {
        self.lookup_via_superproperties(&self.ranges, property)
    }

    fn lookup_via_superproperties(
        &self,
        map: &HashMap<String, Vec<String>>,
        p: &str,
    ) -> Vec<String> {
        let mut out = IndexSet::new();
        for q in closure(&self.superproperties, p) {
            if let Some(cs) = map.get(&q) {
                out.extend(cs.iter().cloned());
            }
        }
        out.into_iter().collect()
    }

    /// Whether `iri` is known as a class: declared, used in a class axiom, or
    /// the object of an `rdf:type` statement.
    pub fn is_known_class(&self, iri: &str) -> bool {
        self.declarations
            .iter()
            .any(|(s, k)| s == iri && matches!(k.as_str(), vocab::RDFS_CLASS | vocab::OWL_CLASS))
            || self.axioms.iter().any(|a| match a.kind {
                AxiomKind::SubClassOf => a.left == iri || a.right == iri,
                AxiomKind::Domain | AxiomKind::Range => a.right == iri,
                AxiomKind::SubPropertyOf => false,
            })
            || self
                .by_object
                .get(&Term::Iri(iri.to_string()))
                .is_some_and(|idx| {
                    idx.iter()
                        .any(|&i| self.triples[i].predicate_iri() == vocab::RDF_TYPE)
                })
    }

    /// Whether `iri` is known as a property: declared, used in a property
    /// axiom, or used as a predicate.
    pub fn is_known_property(&self, iri: &str) -> bool {
        iri == vocab::RDF_TYPE
            || self.declarations.iter().any(|(s, k)| {
                s == iri
                    && matches!(
                        k.as_str(),
                        vocab::RDF_PROPERTY
                            | vocab::OWL_OBJECT_PROPERTY
                            | vocab::OWL_DATATYPE_PROPERTY
                    )
            })
            || self.axioms.iter().any(|a| match a.kind {
                AxiomKind::SubPropertyOf => a.left == iri || a.right == iri,
                AxiomKind::Domain | AxiomKind::Range => a.left == iri,
                AxiomKind::SubClassOf => false,
            })
            || self.by_predicate.contains_key(&Term::Iri(iri.to_string()))
    }
}

fn closure(edges: &HashMap<String, Vec<String>>, start: &str) -> IndexSet<String> {
    let mut seen = IndexSet::new();
    seen.insert(start.to_string());
    let mut queue = VecDeque::from([start.to_string()]);
    while let Some(c) = queue.pop_front() {
        if let Some(next) = edges.get(&c) {
            for n in next {
                if seen.insert(n.clone()) {
                    queue.push_back(n.clone());
                }
            }
        }
    }
    seen
}

/// Extends `b` so that `pattern` becomes `triple`, honouring repeated variables.
pub(crate) fn bind_to_triple(pattern: &Pattern, triple: &Triple, b: &Binding) -> Option<Binding> {
    let mut out = b.clone();
    for (p, t) in
        pattern
            .terms()
            .into_iter()
            .zip([triple.subject(), triple.predicate(), triple.object()])
    {
        match p {
            Term::Var(v) => match out.get(v) {
                Some(bound) if bound != t => return None,
                Some(_) => {}
                None => out.insert(v.clone(), t.clone()),
            },
            ground if ground != t => return None,
            _ => {}
        }
    }
    Some(out)
}

/// Read access to a store plus an optional overlay of triples derived during
/// the current resolution branch.
#[derive(Clone, Copy)]
pub struct KbView<'a> {
    store: &'a Store,
    overlay: &'a [Triple],
}

impl<'a> KbView<'a> {
    pub fn store(&self) -> &'a Store {
        self.store
    }

    fn overlay_only(&self) -> impl Iterator<Item = &'a Triple> {
        let store = self.store;
        self.overlay
            .iter()
            .filter(move |t| !store.triples.contains(*t))
    }

    /// Asserted types, their superclasses, and types inferred from the
    /// domain/range of every property `iri` participates in.
    pub fn type_of(&self, iri: &str) -> BTreeSet<String> {
        let node = Term::Iri(iri.to_string());
        let mut direct: IndexSet<String> = IndexSet::new();
        let store = self.store;
        let as_subject = store
            .by_subject
            .get(&node)
            .into_iter()
            .flatten()
            .map(|&i| &store.triples[i])
            .chain(self.overlay_only().filter(|t| t.subject() == &node));
        for t in as_subject {
            let p = t.predicate_iri();
            if p == vocab::RDF_TYPE {
                if let Some(c) = t.object().as_iri() {
                    direct.insert(c.to_string());
                }
            } else {
                direct.extend(store.domains_of(p));
            }
        }
        let as_object = store
            .by_object
            .get(&node)
            .into_iter()
            .flatten()
            .map(|&i| &store.triples[i])
            .chain(self.overlay_only().filter(|t| t.object() == &node));
        for t in as_object {
            let p = t.predicate_iri();
            if p != vocab::RDF_TYPE {
                direct.extend(store.ranges_of(p));
            }
        }
        let mut out = BTreeSet::new();
        for c in direct {
            out.extend(closure(&store.superclasses, &c));
        }
        out
    }

    pub fn is_instance_of(&self, iri: &str, class: &str) -> bool {
        self.type_of(iri).contains(class)
    }

    /// Whether the triple is stored, in the overlay, or an inferable type.
    pub fn contains(&self, t: &Triple) -> bool {
        if t.predicate_iri() == vocab::RDF_TYPE {
            return match t.object().as_iri() {
                Some(c) => self.is_instance_of(t.subject_iri(), c),
                None => false,
            };
        }
        self.store.triples.contains(t) || self.overlay.contains(t)
    }

    /// All bindings of the pattern's variables that yield a stored, overlaid or
    /// type-inferable triple. Duplicate-free; ordered by data insertion order,
    /// with `rdf:type` answers after other predicates when the predicate is a
    /// variable.
    pub fn match_pattern(&self, p: &Pattern) -> Vec<Binding> {
        self.match_under(p, &Binding::new())
    }

    /// As [`KbView::match_pattern`], extending an existing binding.
    pub fn match_under(&self, p: &Pattern, b: &Binding) -> Vec<Binding> {
        let p = p.apply(b);
        let rdf_type = Term::Iri(vocab::RDF_TYPE.to_string());
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        match &p.predicate {
            Term::Iri(iri) if iri == vocab::RDF_TYPE => {
                self.match_types(&p, b, &mut out, &mut seen);
            }
            Term::Iri(_) | Term::Var(_) => {
                for t in self.candidates(&p) {
                    if t.predicate() == &rdf_type {
                        continue;
                    }
                    if let Some(nb) = bind_to_triple(&p, t, b) {
                        if seen.insert(nb.clone()) {
                            out.push(nb);
                        }
                    }
                }
                if let Term::Var(v) = &p.predicate {
                    let with_pred = b.clone().with(v.clone(), rdf_type.clone());
                    let typed = p.apply(&with_pred);
                    self.match_types(&typed, &with_pred, &mut out, &mut seen);
                }
            }
            Term::Literal { .. } => {}
        }
        out
    }

    fn candidates(&self, p: &Pattern) -> Vec<&'a Triple> {
        let store = self.store;
        let indexed = [
            (&p.subject, &store.by_subject),
            (&p.predicate, &store.by_predicate),
            (&p.object, &store.by_object),
        ]
        .into_iter()
        .filter(|(t, _)| t.is_ground())
        .map(|(t, index)| index.get(t).map_or(&[][..], |v| v.as_slice()))
        .min_by_key(|l| l.len());
        let mut out: Vec<&Triple> = match indexed {
            Some(list) => list.iter().map(|&i| &store.triples[i]).collect(),
            None => store.triples.iter().collect(),
        };
        out.extend(self.overlay_only());
        out
    }

    fn match_types(
        &self,
        p: &Pattern,
        b: &Binding,
        out: &mut Vec<Binding>,
        seen: &mut HashSet<Binding>,
    ) {
        let subjects: Vec<String> = match &p.subject {
            Term::Iri(s) => vec![s.clone()],
            Term::Var(_) => {
                let mut nodes: IndexSet<String> = self.store.nodes.clone();
                for t in self.overlay {
                    nodes.insert(t.subject_iri().to_string());
                    if let Some(o) = t.object().as_iri() {
                        nodes.insert(o.to_string());
                    }
                }
                nodes.into_iter().collect()
            }
            Term::Literal { .. } => return,
        };
        for s in subjects {
            let types = match &p.object {
                Term::Iri(c) => {
                    if self.is_instance_of(&s, c) {
                        vec![c.clone()]
                    } else {
                        vec![]
                    }
                }
                Term::Var(_) => self.type_of(&s).into_iter().collect(),
                Term::Literal { .. } => return,
            };
            for c in types {
                let t = Triple::new(
                    Term::Iri(s.clone()),
                    Term::Iri(vocab::RDF_TYPE.to_string()),
                    Term::Iri(c),
                )
                .expect("well-shaped type triple");
                if let Some(nb) = bind_to_triple(p, &t, b) {
                    if seen.insert(nb.clone()) {
                        out.push(nb);
                    }
                }
            }
        }
    }

    /// Instantiates every pattern under `b` and returns exactly those triples,
    /// each verified to be present or type-inferable. Nothing else is added.
    pub fn extract(&self, patterns: &[Pattern], b: &Binding) -> Result<Fragment, ExtractError> {
        let mut out = Fragment::new();
        for p in patterns {
            let ground = p.apply(b);
            if !ground.is_ground() {
                return Err(ExtractError::Unground(Box::new(ground)));
            }
            let t = ground.to_triple()?;
            if !self.contains(&t) {
                return Err(ExtractError::Missing(Box::new(t)));
            }
            out.insert(t);
        }
        Ok(out)
    }
}
