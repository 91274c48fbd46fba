//! Semantic service resolution.
//!
//! Services are annotated with an input and an output instance model over a
//! shared ontology. Each annotation compiles to a Horn rule whose body ends in
//! a built-in that calls the service. Queries against the knowledge base are
//! answered by backward chaining; when stored facts do not suffice, the
//! resolver selects services whose output models match, satisfies their
//! input models (possibly by calling other services first), invokes them and
//! lifts the responses back into triples.

pub mod annotation;
pub mod cli;
pub mod compiler;
pub mod engine;
pub mod grounding;
pub mod runtime;
pub mod session;
pub mod store;
pub mod term;
pub mod turtle;

pub use annotation::{
    parse_annotation, validate, AnnotationError, ServiceAnnotation, ValidationReport,
};
pub use compiler::{compile, Atom, Builtin, Rule};
pub use engine::{Limits, Resolver, ResolverConfig, SolveOutcome, TraceEvent};
pub use grounding::SyntacticMessage;
pub use runtime::{Connector, ConnectorError, EndpointRef, MockService, Runtime};
pub use session::Session;
pub use store::{Fragment, KbView, Store};
pub use term::{Binding, Pattern, Term, Triple};
