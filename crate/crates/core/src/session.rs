//! A knowledge base, a rule set and a runtime, used together.
//!
//! Queries take a read lock on the store for the whole solve. Asserting the
//! derived triples afterwards takes the write lock, so concurrent queries never
//! observe a half-asserted result.

use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock, RwLockReadGuard};

use thiserror::Error;

use crate::annotation::{
    parse_annotation, validate, AnnotationError, ServiceAnnotation, ValidationReport,
};
use crate::compiler::{compile_shared, Rule};
use crate::engine::{EngineError, Resolver, ResolverConfig, SolveOutcome};
use crate::runtime::{ConnectorError, MockFile, MockService, Runtime};
use crate::store::{LoadSummary, Store, StoreError};
use crate::term::{Pattern, Term};
use crate::turtle::{self, SyntaxError};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Annotation(#[from] AnnotationError),
    #[error("annotation {service} is invalid: {}", errors.join("; "))]
    Invalid {
        service: String,
        errors: Vec<String>,
    },
    #[error("service {0} is already annotated")]
    DuplicateService(String),
    #[error("bad query: {0}")]
    Query(#[from] SyntaxError),
    #[error("bad mock file: {0}")]
    Mock(String),
    #[error(transparent)]
    Connector(#[from] ConnectorError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

fn read(path: &Path) -> Result<String, SessionError> {
    std::fs::read_to_string(path).map_err(|source| SessionError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Result of adding one annotation.
#[derive(Debug, Clone)]
pub struct Added {
    pub rule: Rule,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct QueryResult {
    pub outcome: SolveOutcome,
    /// Triples newly added to the store, when the query asserted.
    pub asserted: Option<usize>,
}

#[derive(Debug, Default)]
pub struct Session {
    store: RwLock<Store>,
    annotations: Vec<Arc<ServiceAnnotation>>,
    rules: Vec<Rule>,
    pub runtime: Runtime,
    resolver: Resolver,
}

impl Session {
    pub fn new(config: ResolverConfig) -> Session {
        Session {
            resolver: Resolver::new(config),
            ..Session::default()
        }
    }

    pub fn config(&self) -> &crate::engine::ResolverConfig {
        &self.resolver.config
    }

    pub fn config_mut(&mut self) -> &mut crate::engine::ResolverConfig {
        &mut self.resolver.config
    }

    pub fn store(&self) -> RwLockReadGuard<'_, Store> {
        self.store.read().unwrap_or_else(|e| e.into_inner())
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn annotations(&self) -> &[Arc<ServiceAnnotation>] {
        &self.annotations
    }

    pub fn load_kb(&self, text: &str) -> Result<LoadSummary, SessionError> {
        let mut store = self.store.write().unwrap_or_else(|e| e.into_inner());
        Ok(store.load_turtle(text)?)
    }

    pub fn load_kb_file(&self, path: &Path) -> Result<LoadSummary, SessionError> {
        self.load_kb(&read(path)?)
    }

    /// Parses, validates against the loaded ontology, and compiles.
    pub fn add_annotation(&mut self, text: &str) -> Result<Added, SessionError> {
        let a = parse_annotation(text)?;
        let ValidationReport { errors, warnings } = validate(&a, &self.store());
        if !errors.is_empty() {
            return Err(SessionError::Invalid {
                service: a.service,
                errors,
            });
        }
        if self.annotations.iter().any(|x| x.service == a.service) {
            return Err(SessionError::DuplicateService(a.service));
        }
        let a = Arc::new(a);
        let rule = compile_shared(Arc::clone(&a));
        self.annotations.push(a);
        self.rules.push(rule.clone());
        Ok(Added { rule, warnings })
    }

    pub fn add_annotation_file(&mut self, path: &Path) -> Result<Added, SessionError> {
        self.add_annotation(&read(path)?)
    }

    pub fn add_mock(&mut self, m: MockService) -> Result<(), SessionError> {
        Ok(self.runtime.mocks.register(m)?)
    }

    /// Registers every mock in a mock file; returns how many.
    pub fn add_mocks(&mut self, text: &str) -> Result<usize, SessionError> {
        let mocks = MockFile::parse(text).map_err(SessionError::Mock)?;
        let n = mocks.len();
        for m in mocks {
            self.add_mock(m)?;
        }
        Ok(n)
    }

    pub fn add_mock_file(&mut self, path: &Path) -> Result<usize, SessionError> {
        self.add_mocks(&read(path)?)
    }

    /// Parses a query with the prefixes of the loaded documents; bare names
    /// resolve against the empty prefix.
    pub fn parse_query(&self, text: &str) -> Result<Vec<Pattern>, SessionError> {
        let parsed = turtle::parse_query(text, self.store().prefixes())?;
        Ok(parsed
            .into_iter()
            .map(|[s, p, o]: [Term; 3]| Pattern::new(s, p, o))
            .collect())
    }

    pub fn solve(&self, query: &[Pattern]) -> Result<SolveOutcome, SessionError> {
        let store = self.store();
        Ok(self
            .resolver
            .solve(&store, &self.rules, &self.runtime, query)?)
    }

    /// Solves, then optionally adds the derived triples to the store.
    pub fn query(&self, query: &[Pattern], assert: bool) -> Result<QueryResult, SessionError> {
        let outcome = self.solve(query)?;
        let asserted = if assert {
            let mut store = self.store.write().unwrap_or_else(|e| e.into_inner());
            Some(store.add_triples(&outcome.derived)?)
        } else {
            None
        };
        Ok(QueryResult { outcome, asserted })
    }

    pub fn query_text(&self, text: &str, assert: bool) -> Result<QueryResult, SessionError> {
        let q = self.parse_query(text)?;
        self.query(&q, assert)
    }
}
