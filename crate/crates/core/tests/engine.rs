mod common;

use std::collections::HashMap;
use std::time::Duration;

use proptest::prelude::*;

use common::*;
use semres::engine::{memo_key, trace_to_jsonl, unify, Limits, TraceEvent};
use semres::runtime::{Connector, ConnectorError, EndpointRef};
use semres::term::{Binding, Pattern, Term};
use semres::{ResolverConfig, SyntacticMessage};

fn stock_session() -> semres::Session {
    session(
        &["stock.ttl", "stock-individuals.ttl"],
        &["stockquote.mock.json"],
        &["stockquote.json"],
    )
}

fn config(max_depth: usize, timeout: Duration) -> ResolverConfig {
    ResolverConfig {
        limits: Limits { max_depth, timeout },
        ..ResolverConfig::default()
    }
}

#[test]
fn stored_facts_come_before_service_results() {
    let s = stock_session();
    s.load_kb(
        r#"@prefix : <http://example.org/stock#> .
           :t1 :hasPrice :known ."#,
    )
    .unwrap();
    let r = s.query_text("t1 hasPrice ?p", false).unwrap();
    assert_eq!(r.outcome.bindings.len(), 2);
    assert_eq!(r.outcome.bindings[0].get("p"), Some(&iri(STOCK, "known")));
    assert_eq!(r.outcome.invoked_services().len(), 1);
}

#[test]
fn fact_only_goal_invokes_nothing() {
    let s = stock_session();
    let r = s.query_text("t1 tickerString ?s", false).unwrap();
    assert_eq!(r.outcome.bindings.len(), 1);
    assert!(r.outcome.invoked_services().is_empty());
    assert!(r.outcome.derived.is_empty());
}

#[test]
fn solve_leaves_the_store_alone_and_reinvokes() {
    let s = stock_session();
    let before = s.store().len();
    let first = s.query_text("t1 hasPrice ?p", false).unwrap();
    let second = s.query_text("t1 hasPrice ?p", false).unwrap();
    assert_eq!(s.store().len(), before);
    assert_eq!(first.outcome.invoked_services().len(), 1);
    assert_eq!(second.outcome.invoked_services().len(), 1);
    // Each call mints its own instance.
    assert_ne!(first.outcome.bindings[0], second.outcome.bindings[0]);
}

#[test]
fn bound_price_value_filters_results() {
    let s = stock_session();
    // Prefixes declared by loaded documents apply to queries.
    let r = s
        .query_text(r#"?m numericalValue "150.0"^^xsd:double"#, false)
        .unwrap();
    assert_eq!(r.outcome.bindings.len(), 1);
    let miss = s
        .query_text(
            r#"?m numericalValue "99.0"^^<http://www.w3.org/2001/XMLSchema#double>"#,
            false,
        )
        .unwrap();
    assert!(miss.outcome.bindings.is_empty());
    // The call was still made; its answer did not fit the goal.
    assert_eq!(miss.outcome.invoked_services().len(), 1);
}

#[test]
fn service_failure_prunes_the_branch() {
    let s = stock_session();
    s.load_kb(
        r#"@prefix : <http://example.org/stock#> .
           :bad a :TickerSymbol ; :tickerString "FAIL" ."#,
    )
    .unwrap();
    let r = s.query_text("bad hasPrice ?p", false).unwrap();
    assert!(r.outcome.bindings.is_empty());
    let failed: Vec<_> = r
        .outcome
        .trace
        .iter()
        .filter_map(|e| match e {
            TraceEvent::BuiltinReturned {
                ok: false, error, ..
            } => error.clone(),
            _ => None,
        })
        .collect();
    assert_eq!(failed.len(), 1);
    assert!(failed[0].contains("failure"), "{}", failed[0]);
    assert!(r.outcome.derived.is_empty());
}

#[test]
fn zero_timeout_fails_every_call() {
    let s = session_with(
        config(16, Duration::ZERO),
        &["stock.ttl", "stock-individuals.ttl"],
        &["stockquote.mock.json"],
        &["stockquote.json"],
    );
    let r = s.query_text("t1 hasPrice ?p", false).unwrap();
    assert!(r.outcome.bindings.is_empty());
    assert!(r.outcome.trace.iter().any(|e| matches!(
        e,
        TraceEvent::BuiltinReturned { ok: false, error: Some(m), .. } if m.contains("timed out")
    )));
}

#[test]
fn depth_limit_cuts_rule_expansion() {
    // At depth limit 1 the rule body goals are facts-only.
    let s = session_with(
        config(1, Duration::from_secs(5)),
        &["cyclic.ttl"],
        &["cyclic.mock.json"],
        &["cyclic-a.json", "cyclic-b.json"],
    );
    let r = s.query_text("?x p ?y", false).unwrap();
    assert_eq!(r.outcome.bindings.len(), 1);
    assert!(r
        .outcome
        .trace
        .iter()
        .any(|e| matches!(e, TraceEvent::DepthCut { depth: 1, .. })));
    assert!(!r
        .outcome
        .trace
        .iter()
        .any(|e| matches!(e, TraceEvent::MemoHit { .. })));

    let deep = session_with(
        config(16, Duration::from_secs(5)),
        &["cyclic.ttl"],
        &["cyclic.mock.json"],
        &["cyclic-a.json", "cyclic-b.json"],
    );
    let r = deep.query_text("?x p ?y", false).unwrap();
    assert!(r
        .outcome
        .trace
        .iter()
        .any(|e| matches!(e, TraceEvent::MemoHit { .. })));
}

#[test]
fn trace_is_a_well_nested_tree() {
    let s = session(
        &["stock.ttl", "company.ttl"],
        &["company-ticker.mock.json", "stockquote.mock.json"],
        &["company-ticker.json", "stockquote.json"],
    );
    let r = s.query_text("?t hasPrice ?p", false).unwrap();
    let mut parent: HashMap<u64, Option<u64>> = HashMap::new();
    let mut depth: HashMap<u64, usize> = HashMap::new();
    for e in &r.outcome.trace {
        if let TraceEvent::Goal {
            goal,
            parent: p,
            depth: d,
            ..
        } = e
        {
            if let Some(p) = p {
                assert!(
                    parent.contains_key(p),
                    "parent {p} opened after child {goal}"
                );
                assert_eq!(depth[p] + 1, *d);
            } else {
                assert_eq!(*d, 0);
            }
            parent.insert(*goal, *p);
            depth.insert(*goal, *d);
        } else {
            assert!(
                parent.contains_key(&e.goal_id()),
                "event before its goal: {e:?}"
            );
        }
    }
    // Every invocation is answered.
    let invoked = r
        .outcome
        .trace
        .iter()
        .filter(|e| matches!(e, TraceEvent::BuiltinInvoked { .. }))
        .count();
    let returned = r
        .outcome
        .trace
        .iter()
        .filter(|e| matches!(e, TraceEvent::BuiltinReturned { .. }))
        .count();
    assert_eq!(invoked, returned);
}

#[test]
fn trace_serializes_as_json_lines() {
    let s = stock_session();
    let r = s.query_text("t1 hasPrice ?p", false).unwrap();
    let text = trace_to_jsonl(&r.outcome.trace);
    let parsed: Vec<TraceEvent> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(parsed, r.outcome.trace);
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["kind"], "goal");
    assert!(text.contains(r#""kind":"builtinInvoked""#));
    assert!(!text.contains("elapsedMicros"));
}

#[test]
fn timing_is_recorded_when_enabled() {
    let mut s = stock_session();
    s.config_mut().trace_timing = true;
    let r = s.query_text("t1 hasPrice ?p", false).unwrap();
    assert!(r.outcome.trace.iter().any(|e| matches!(
        e,
        TraceEvent::BuiltinReturned {
            elapsed_micros: Some(_),
            ..
        }
    )));
}

#[test]
fn fresh_base_is_configurable() {
    let mut s = stock_session();
    s.config_mut().fresh_base = "http://example.org/made/".into();
    let r = s.query_text("t1 hasPrice ?p", false).unwrap();
    let p = r.outcome.bindings[0]
        .get("p")
        .unwrap()
        .as_iri()
        .unwrap()
        .to_string();
    assert!(
        p.starts_with("http://example.org/made/StockQuote/mv/"),
        "{p}"
    );
}

/// Records every request and answers from a fixed table.
struct Recording {
    answers: HashMap<String, SyntacticMessage>,
    seen: std::sync::Mutex<Vec<SyntacticMessage>>,
}

impl Connector for Recording {
    fn invoke(
        &self,
        endpoint: &EndpointRef,
        msg: &SyntacticMessage,
        _timeout: Duration,
    ) -> Result<SyntacticMessage, ConnectorError> {
        self.seen.lock().unwrap().push(msg.clone());
        let EndpointRef::Mock { name } = endpoint else {
            return Err(ConnectorError::InvalidEndpoint("mock only".into()));
        };
        self.answers
            .get(name)
            .cloned()
            .ok_or_else(|| ConnectorError::UnknownService(name.clone()))
    }
}

#[test]
fn custom_connector_plugs_into_the_resolver() {
    let s = stock_session();
    let conn = Recording {
        answers: HashMap::from([(
            "stockquote".to_string(),
            SyntacticMessage::new().with("price", "not a number"),
        )]),
        seen: Default::default(),
    };
    let resolver = semres::Resolver::new(ResolverConfig::default());
    let q = s.parse_query("t1 hasPrice ?p").unwrap();
    let out = resolver.solve(&s.store(), s.rules(), &conn, &q).unwrap();
    // The lexical form does not fit xsd:double, so lifting fails.
    assert!(out.bindings.is_empty());
    assert_eq!(
        conn.seen.lock().unwrap().clone(),
        vec![SyntacticMessage::new().with("symbol", "SAP")]
    );
    assert!(out.trace.iter().any(|e| matches!(
        e,
        TraceEvent::BuiltinReturned { ok: false, error: Some(m), .. } if m.contains("lifting")
    )));
}

fn term() -> impl Strategy<Value = Term> {
    prop_oneof![
        (0u8..3).prop_map(|i| Term::Iri(format!("http://e/n{i}"))),
        (0u8..3).prop_map(|i| Term::Var(format!("v{i}"))),
    ]
}

fn pattern() -> impl Strategy<Value = Pattern> {
    (term(), term(), term()).prop_map(|(s, p, o)| Pattern::new(s, p, o))
}

proptest! {
    #[test]
    fn unify_is_symmetric_and_sound(a in pattern(), b in pattern()) {
        let ab = unify(&a, &b, &Binding::new());
        let ba = unify(&b, &a, &Binding::new());
        prop_assert_eq!(&ab, &ba);
        if let Some(u) = ab {
            // Ground positions agree after applying the unifier.
            for (x, y) in a.apply(&u).terms().into_iter().zip(b.apply(&u).terms()) {
                if x.is_ground() && y.is_ground() {
                    prop_assert_eq!(x, y);
                }
            }
        }
    }

    #[test]
    fn memo_key_ignores_variable_names(a in pattern(), shift in 1u8..5) {
        let rename = |t: &Term| match t {
            Term::Var(v) => Term::Var(format!("{v}_{shift}")),
            g => g.clone(),
        };
        let b = Pattern::new(rename(&a.subject), rename(&a.predicate), rename(&a.object));
        prop_assert_eq!(memo_key(&a), memo_key(&b));
    }
}
