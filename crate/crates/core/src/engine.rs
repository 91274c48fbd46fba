//! Backward-chaining resolution with service built-ins.
//!
//! A goal is answered first from the knowledge base (stored triples plus
//! inferred types), then by every rule whose head has an atom unifiable with
//! it, in rule load order. A rule's body is solved left to right in the
//! rule's own variable namespace; the built-in comes last, when every input
//! variable is ground. Its lifted triples join the branch-local overlay, so
//! later goals on the same branch (and enclosing rule bodies) see them. This
//! is how one service's output feeds another's input.
//!
//! Termination: a goal at `max_depth` is answered from facts only, and a goal
//! alpha-equivalent to one already in progress on the current path is not
//! expanded again.

use std::collections::{BTreeMap, HashSet};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::ServiceAnnotation;
use crate::compiler::{Atom, Builtin, Rule};
use crate::grounding::{self, GroundingError};
use crate::runtime::{Connector, ConnectorError};
use crate::store::{bind_to_triple, Fragment, KbView, Store};
use crate::term::{check_lexical, vocab, Binding, Pattern, Term, Triple};

pub const DEFAULT_MAX_DEPTH: usize = 16;
pub const DEFAULT_FRESH_BASE: &str = "urn:semres:instance:";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_depth: usize,
    /// Per service call.
    pub timeout: Duration,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_depth: DEFAULT_MAX_DEPTH,
            timeout: Duration::from_secs(10),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ResolverConfig {
    pub limits: Limits,
    /// Prefix of minted instance IRIs.
    pub fresh_base: String,
    /// Record elapsed time on `builtinReturned` events. Off by default so
    /// traces are byte-stable.
    pub trace_timing: bool,
}

impl Default for ResolverConfig {
    fn default() -> Self {
        ResolverConfig {
            limits: Limits::default(),
            fresh_base: DEFAULT_FRESH_BASE.to_string(),
            trace_timing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum TraceEvent {
    #[serde(rename_all = "camelCase")]
    Goal {
        goal: u64,
        parent: Option<u64>,
        depth: usize,
        pattern: String,
    },
    #[serde(rename_all = "camelCase")]
    RuleSelected { goal: u64, rule: String },
    #[serde(rename_all = "camelCase")]
    BuiltinInvoked {
        goal: u64,
        service: String,
        call: u64,
        request: BTreeMap<String, String>,
    },
    #[serde(rename_all = "camelCase")]
    BuiltinReturned {
        goal: u64,
        service: String,
        call: u64,
        ok: bool,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        error: Option<String>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        elapsed_micros: Option<u64>,
    },
    #[serde(rename_all = "camelCase")]
    FactMatched { goal: u64, triple: String },
    #[serde(rename_all = "camelCase")]
    DepthCut { goal: u64, depth: usize },
    #[serde(rename_all = "camelCase")]
    MemoHit { goal: u64, key: String },
}

impl TraceEvent {
    pub fn goal_id(&self) -> u64 {
        match self {
            TraceEvent::Goal { goal, .. }
            | TraceEvent::RuleSelected { goal, .. }
            | TraceEvent::BuiltinInvoked { goal, .. }
            | TraceEvent::BuiltinReturned { goal, .. }
            | TraceEvent::FactMatched { goal, .. }
            | TraceEvent::DepthCut { goal, .. }
            | TraceEvent::MemoHit { goal, .. } => *goal,
        }
    }
}

/// Line-delimited JSON, one event per line.
pub fn trace_to_jsonl(events: &[TraceEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&serde_json::to_string(e).expect("trace event serializes"));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("max depth must be at least 1")]
    InvalidLimits,
    #[error("built-in {service} called with unbound input {var}")]
    UnboundInput { service: String, var: String },
}

/// Why a built-in call pruned its branch.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuiltinError {
    #[error("input {var} = {found} does not fit its declaration")]
    Guard { var: String, found: String },
    #[error("input extraction failed: {0}")]
    Extract(GroundingError),
    #[error("lowering failed: {0}")]
    Lower(GroundingError),
    #[error("connector: {0}")]
    Connector(#[from] ConnectorError),
    #[error("lifting failed: {0}")]
    Lift(GroundingError),
}

#[derive(Debug, Clone, Default)]
pub struct SolveOutcome {
    /// Distinct bindings of the query variables, in discovery order.
    pub bindings: Vec<Binding>,
    /// Triples produced by the service calls behind the returned bindings.
    pub derived: Fragment,
    pub trace: Vec<TraceEvent>,
}

impl SolveOutcome {
    pub fn invoked_services(&self) -> Vec<&str> {
        self.trace
            .iter()
            .filter_map(|e| match e {
                TraceEvent::BuiltinInvoked { service, .. } => Some(service.as_str()),
                _ => None,
            })
            .collect()
    }
}

/// Resolves queries. Holds the call counter used for fresh instance IRIs, so
/// instances minted by successive solves never collide.
#[derive(Debug, Default)]
pub struct Resolver {
    pub config: ResolverConfig,
    calls: AtomicU64,
}

impl Resolver {
    pub fn new(config: ResolverConfig) -> Resolver {
        Resolver {
            config,
            calls: AtomicU64::new(0),
        }
    }

    fn next_call(&self) -> u64 {
        self.calls.fetch_add(1, Ordering::Relaxed) + 1
    }

    /// Solves a conjunction of patterns. The knowledge base is not modified.
    pub fn solve(
        &self,
        kb: &Store,
        rules: &[Rule],
        connector: &dyn Connector,
        query: &[Pattern],
    ) -> Result<SolveOutcome, EngineError> {
        if self.config.limits.max_depth == 0 {
            return Err(EngineError::InvalidLimits);
        }
        let mut search = Search {
            resolver: self,
            kb,
            rules,
            connector,
            trace: Vec::new(),
            next_goal: 0,
            active: Vec::new(),
        };
        let atoms: Vec<Atom> = query.iter().cloned().map(Atom::Triple).collect();
        let solutions = search.solve_conj(&atoms, Binding::new(), Vec::new(), 0, None)?;

        let mut vars: Vec<&str> = Vec::new();
        for p in query {
            for v in p.variables() {
                if !vars.contains(&v) {
                    vars.push(v);
                }
            }
        }
        let mut seen = HashSet::new();
        let mut outcome = SolveOutcome::default();
        for (b, overlay) in solutions {
            let projected = b.project(vars.iter().copied());
            if seen.insert(projected.clone()) {
                outcome.bindings.push(projected);
                for t in overlay {
                    outcome.derived.insert(t);
                }
            }
        }
        outcome.trace = search.trace;
        Ok(outcome)
    }

    /// Runs one service call for `rule` under `bind`: extract the input
    /// fragment, lower it, invoke, lift. Returns the binding extended with the
    /// output nodes and the lifted fragment.
    pub fn eval_builtin(
        &self,
        rule: &Rule,
        bind: &Binding,
        kb: &KbView<'_>,
        connector: &dyn Connector,
        call_id: u64,
    ) -> Result<Result<(Binding, Fragment), BuiltinError>, EngineError> {
        let builtin = rule.builtin().expect("compiled rules carry a built-in");
        let a: &ServiceAnnotation = &rule.annotation;
        for var in &builtin.inputs {
            let Some(value) = bind.get(var) else {
                return Err(EngineError::UnboundInput {
                    service: builtin.service.clone(),
                    var: var.clone(),
                });
            };
            if let Err(e) = guard(a, var, value) {
                return Ok(Err(e));
            }
        }
        Ok(self.call_service(a, builtin, bind, kb, connector, call_id))
    }

    fn call_service(
        &self,
        a: &ServiceAnnotation,
        builtin: &Builtin,
        bind: &Binding,
        kb: &KbView<'_>,
        connector: &dyn Connector,
        call_id: u64,
    ) -> Result<(Binding, Fragment), BuiltinError> {
        let input = bind.project(builtin.inputs.iter().map(String::as_str));
        let fragment =
            grounding::extract_input_fragment(a, &input, kb).map_err(BuiltinError::Extract)?;
        let request = grounding::lower(&fragment, a, &input).map_err(BuiltinError::Lower)?;
        let response = connector.invoke(&a.endpoint, &request, self.config.limits.timeout)?;
        let (lifted, out) = grounding::lift(&response, a, &input, call_id, &self.config.fresh_base)
            .map_err(BuiltinError::Lift)?;
        Ok((out, lifted))
    }
}

/// Literal inputs must carry their declared datatype; object inputs must be
/// IRIs.
fn guard(a: &ServiceAnnotation, var: &str, value: &Term) -> Result<(), BuiltinError> {
    let node = &a.input.nodes[var];
    let ok = match value {
        Term::Literal { lexical, datatype } => {
            node.is_literal()
                && datatype == node.classification.iri()
                && check_lexical(lexical, datatype).is_ok()
        }
        Term::Iri(_) => !node.is_literal(),
        Term::Var(_) => false,
    };
    if ok {
        Ok(())
    } else {
        Err(BuiltinError::Guard {
            var: var.to_string(),
            found: value.to_string(),
        })
    }
}

/// Canonical form of a goal: variables renamed `?0`, `?1`, ... in order of
/// first occurrence, ground terms verbatim.
pub fn memo_key(goal: &Pattern) -> String {
    let mut names: Vec<&str> = Vec::new();
    let parts: Vec<String> = goal
        .terms()
        .into_iter()
        .map(|t| match t {
            Term::Var(v) => {
                let idx = names.iter().position(|n| n == v).unwrap_or_else(|| {
                    names.push(v);
                    names.len() - 1
                });
                format!("?{idx}")
            }
            ground => ground.to_string(),
        })
        .collect();
    parts.join(" ")
}

/// Most general unifier of two flat patterns in one variable namespace,
/// extending `bind`.
///
/// Bindings hold ground terms only: variables unified with a ground term are
/// bound, while a variable that is unified only with other variables stays
/// unbound (the equality still constrains every ground term in its class).
/// Returns `None` on a clash.
pub fn unify(a: &Pattern, b: &Pattern, bind: &Binding) -> Option<Binding> {
    unify_pairs(
        a.terms()
            .into_iter()
            .map(|t| (0u8, t))
            .zip(b.terms().into_iter().map(|t| (0u8, t))),
        bind,
        0,
    )
}

/// Unifies a goal (caller namespace) with a rule head atom (rule namespace)
/// and returns the ground bindings this forces on the rule's variables.
pub fn unify_goal_with_head(goal: &Pattern, head: &Pattern) -> Option<Binding> {
    unify_pairs(
        goal.terms()
            .into_iter()
            .map(|t| (0u8, t))
            .zip(head.terms().into_iter().map(|t| (1u8, t))),
        &Binding::new(),
        1,
    )
}

/// Union-find over (namespace, variable) keys. Pre-existing bindings in
/// `bind` belong to namespace 0. The result holds ground bindings for the
/// variables of namespace `keep`, plus everything already in `bind` when
/// `keep` is 0.
fn unify_pairs<'t>(
    pairs: impl Iterator<Item = ((u8, &'t Term), (u8, &'t Term))>,
    bind: &Binding,
    keep: u8,
) -> Option<Binding> {
    type Key<'t> = (u8, &'t str);
    let mut parent: BTreeMap<Key<'t>, Key<'t>> = BTreeMap::new();
    let mut value: BTreeMap<Key<'t>, Term> = BTreeMap::new();

    fn find<'t>(parent: &mut BTreeMap<Key<'t>, Key<'t>>, k: Key<'t>) -> Key<'t> {
        let mut root = k;
        while let Some(&p) = parent.get(&root) {
            if p == root {
                break;
            }
            root = p;
        }
        parent.insert(k, root);
        root
    }

    let assign = |parent: &mut BTreeMap<Key<'t>, Key<'t>>,
                  value: &mut BTreeMap<Key<'t>, Term>,
                  k: Key<'t>,
                  t: &Term|
     -> bool {
        let r = find(parent, k);
        match value.get(&r) {
            Some(existing) => existing == t,
            None => {
                value.insert(r, t.clone());
                true
            }
        }
    };

    for ((sa, ta), (sb, tb)) in pairs {
        let resolve = |ns: u8, t: &'t Term| -> Result<Term, Key<'t>> {
            match t {
                Term::Var(v) if ns == 0 && bind.contains(v) => Ok(bind.get(v).unwrap().clone()),
                Term::Var(v) => Err((ns, v.as_str())),
                g => Ok(g.clone()),
            }
        };
        match (resolve(sa, ta), resolve(sb, tb)) {
            (Ok(x), Ok(y)) => {
                if x != y {
                    return None;
                }
            }
            (Err(k), Ok(g)) | (Ok(g), Err(k)) => {
                if !assign(&mut parent, &mut value, k, &g) {
                    return None;
                }
            }
            (Err(k1), Err(k2)) => {
                let r1 = find(&mut parent, k1);
                let r2 = find(&mut parent, k2);
                if r1 != r2 {
                    let v1 = value.get(&r1).cloned();
                    let v2 = value.get(&r2).cloned();
                    match (v1, v2) {
                        (Some(x), Some(y)) if x != y => return None,
                        (None, Some(y)) => {
                            value.insert(r1, y);
                        }
                        _ => {}
                    }
                    parent.insert(r2, r1);
                }
            }
        }
    }

    let mut out = if keep == 0 {
        bind.clone()
    } else {
        Binding::new()
    };
    let keys: Vec<Key<'t>> = parent
        .keys()
        .copied()
        .chain(value.keys().copied())
        .collect();
    for k in keys {
        if k.0 != keep {
            continue;
        }
        let r = find(&mut parent, k);
        if let Some(v) = value.get(&r) {
            out.insert(k.1, v.clone());
        }
    }
    Some(out)
}

type Solution = (Binding, Vec<Triple>);

/// What a selected rule contributes towards the goal.
#[derive(Debug, Clone)]
enum Produces {
    /// The head atom at this index.
    Head(usize),
    /// The type of this fresh output node.
    FreshType(String),
}

struct Search<'a> {
    resolver: &'a Resolver,
    kb: &'a Store,
    rules: &'a [Rule],
    connector: &'a dyn Connector,
    trace: Vec<TraceEvent>,
    next_goal: u64,
    active: Vec<String>,
}

impl Search<'_> {
    fn solve_conj(
        &mut self,
        atoms: &[Atom],
        bind: Binding,
        overlay: Vec<Triple>,
        depth: usize,
        parent: Option<u64>,
    ) -> Result<Vec<Solution>, EngineError> {
        let Some((first, rest)) = atoms.split_first() else {
            return Ok(vec![(bind, overlay)]);
        };
        let partial = match first {
            Atom::Builtin(_) => unreachable!("built-ins are evaluated by expand_rule"),
            atom => {
                let goal = atom.as_pattern().expect("non-builtin atom");
                self.solve_goal(&goal, &bind, &overlay, depth, parent)?
            }
        };
        let mut out = Vec::new();
        for (b, ov) in partial {
            out.extend(self.solve_conj(rest, b, ov, depth, parent)?);
        }
        Ok(out)
    }

    fn solve_goal(
        &mut self,
        goal: &Pattern,
        bind: &Binding,
        overlay: &[Triple],
        depth: usize,
        parent: Option<u64>,
    ) -> Result<Vec<Solution>, EngineError> {
        let id = self.next_goal;
        self.next_goal += 1;
        let applied = goal.apply(bind);
        self.trace.push(TraceEvent::Goal {
            goal: id,
            parent,
            depth,
            pattern: applied.to_string(),
        });

        let mut out = Vec::new();
        let view = self.kb.view_with(overlay);
        for b in view.match_under(goal, bind) {
            self.trace.push(TraceEvent::FactMatched {
                goal: id,
                triple: applied.apply(&b).to_string(),
            });
            out.push((b, overlay.to_vec()));
        }

        let candidates = self.candidates(&applied);
        if candidates.is_empty() {
            return Ok(out);
        }
        if depth >= self.resolver.config.limits.max_depth {
            self.trace.push(TraceEvent::DepthCut { goal: id, depth });
            return Ok(out);
        }
        let key = memo_key(&applied);
        if self.active.contains(&key) {
            self.trace.push(TraceEvent::MemoHit { goal: id, key });
            return Ok(out);
        }

        self.active.push(key);
        let result = self.expand_rules(goal, bind, overlay, depth, id, candidates);
        self.active.pop();
        out.extend(result?);
        Ok(out)
    }

    /// Rules that can produce the goal, with the bindings the goal forces on
    /// their variables. A head atom produces the triples it unifies with. A
    /// fresh output node produces its type (its class and every superclass),
    /// since lifting asserts it; that is how a body type goal reaches a
    /// service creating such instances.
    fn candidates(&self, goal: &Pattern) -> Vec<(usize, Produces, Binding)> {
        let fresh_type_goal = match (&goal.subject, &goal.predicate, &goal.object) {
            (Term::Var(_), Term::Iri(p), Term::Iri(c)) if p == vocab::RDF_TYPE => Some(c),
            _ => None,
        };
        let mut out = Vec::new();
        for (ri, r) in self.rules.iter().enumerate() {
            for (hi, h) in r.head.iter().enumerate() {
                if let Some(pre) = unify_goal_with_head(goal, h) {
                    out.push((ri, Produces::Head(hi), pre));
                }
            }
            let Some(class) = fresh_type_goal else {
                continue;
            };
            let builtin = r.builtin().expect("compiled rules carry a built-in");
            for v in &builtin.outputs {
                let node = &r.annotation.output.nodes[v];
                if !node.is_literal() && self.kb.is_subclass_of(node.classification.iri(), class) {
                    out.push((ri, Produces::FreshType(v.clone()), Binding::new()));
                }
            }
        }
        out
    }

    fn expand_rules(
        &mut self,
        goal: &Pattern,
        bind: &Binding,
        overlay: &[Triple],
        depth: usize,
        id: u64,
        candidates: Vec<(usize, Produces, Binding)>,
    ) -> Result<Vec<Solution>, EngineError> {
        let mut out = Vec::new();
        for (ri, produces, pre) in candidates {
            let rule = &self.rules[ri];
            let builtin = rule.builtin().expect("compiled rules carry a built-in");
            // Fresh instances never equal an existing term.
            if builtin
                .outputs
                .iter()
                .any(|v| pre.contains(v) && !rule.annotation.output.nodes[v].is_literal())
            {
                continue;
            }
            self.trace.push(TraceEvent::RuleSelected {
                goal: id,
                rule: rule.id.clone(),
            });
            let body: Vec<Atom> = rule
                .body
                .iter()
                .filter(|a| !matches!(a, Atom::Builtin(_)))
                .cloned()
                .collect();
            let body_solutions =
                self.solve_conj(&body, pre.clone(), overlay.to_vec(), depth + 1, Some(id))?;
            for (rb, ov) in body_solutions {
                let Some((after, lifted)) = self.fire(rule, builtin, &rb, &ov, id)? else {
                    continue;
                };
                // Output literals fixed by the goal must match what came back.
                if builtin
                    .outputs
                    .iter()
                    .any(|v| pre.get(v).is_some_and(|p| after.get(v) != Some(p)))
                {
                    continue;
                }
                let produced = match &produces {
                    Produces::Head(hi) => rule.head[*hi].apply(&after).to_triple(),
                    Produces::FreshType(v) => Triple::new(
                        after
                            .get(v)
                            .expect("fired rules bind their outputs")
                            .clone(),
                        goal.predicate.clone(),
                        goal.object.clone(),
                    ),
                };
                let Ok(triple) = produced else {
                    continue;
                };
                let Some(caller) = bind_to_triple(goal, &triple, bind) else {
                    continue;
                };
                let mut branch = ov;
                for t in lifted.iter() {
                    if !branch.contains(t) {
                        branch.push(t.clone());
                    }
                }
                out.push((caller, branch));
            }
        }
        Ok(out)
    }

    fn fire(
        &mut self,
        rule: &Rule,
        builtin: &Builtin,
        bind: &Binding,
        overlay: &[Triple],
        goal: u64,
    ) -> Result<Option<(Binding, Fragment)>, EngineError> {
        let call = self.resolver.next_call();
        let input = bind.project(builtin.inputs.iter().map(String::as_str));
        let request = grounding::lower(&Fragment::new(), &rule.annotation, &input)
            .map(|m| {
                m.iter()
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .collect()
            })
            .unwrap_or_default();
        self.trace.push(TraceEvent::BuiltinInvoked {
            goal,
            service: builtin.service.clone(),
            call,
            request,
        });
        let started = Instant::now();
        let view = self.kb.view_with(overlay);
        // Pre-bound literal outputs are compared after the call, not passed in.
        let result = self
            .resolver
            .eval_builtin(rule, &input, &view, self.connector, call)?;
        let elapsed_micros = self
            .resolver
            .config
            .trace_timing
            .then(|| started.elapsed().as_micros() as u64);
        match result {
            Ok((out, lifted)) => {
                self.trace.push(TraceEvent::BuiltinReturned {
                    goal,
                    service: builtin.service.clone(),
                    call,
                    ok: true,
                    error: None,
                    elapsed_micros,
                });
                let mut merged = bind.clone();
                for v in &builtin.outputs {
                    if let Some(t) = out.get(v) {
                        merged.insert(v.clone(), t.clone());
                    }
                }
                Ok(Some((merged, lifted)))
            }
            Err(e) => {
                self.trace.push(TraceEvent::BuiltinReturned {
                    goal,
                    service: builtin.service.clone(),
                    call,
                    ok: false,
                    error: Some(e.to_string()),
                    elapsed_micros,
                });
                Ok(None)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iri(s: &str) -> Term {
        Term::Iri(format!("http://e/{s}"))
    }

    fn var(s: &str) -> Term {
        Term::Var(s.into())
    }

    #[test]
    fn unify_binds_variable() {
        let a = Pattern::new(var("x"), iri("p"), iri("o"));
        let b = Pattern::new(iri("s"), iri("p"), iri("o"));
        let u = unify(&a, &b, &Binding::new()).unwrap();
        assert_eq!(u, Binding::new().with("x", iri("s")));
        assert_eq!(unify(&b, &a, &Binding::new()), Some(u));
    }

    #[test]
    fn unify_predicate_clash() {
        let a = Pattern::new(iri("s"), iri("p"), var("y"));
        let b = Pattern::new(iri("s"), iri("q"), iri("o"));
        assert_eq!(unify(&a, &b, &Binding::new()), None);
        assert_eq!(unify(&b, &a, &Binding::new()), None);
    }

    #[test]
    fn unify_repeated_variable() {
        let a = Pattern::new(var("x"), iri("p"), var("x"));
        let b = Pattern::new(iri("s"), iri("p"), iri("o"));
        assert_eq!(unify(&a, &b, &Binding::new()), None);
        let c = Pattern::new(iri("s"), iri("p"), iri("s"));
        assert_eq!(
            unify(&a, &c, &Binding::new()),
            Some(Binding::new().with("x", iri("s")))
        );
    }

    #[test]
    fn unify_through_variable_chains() {
        // ?x = ?y, ?y = s  =>  ?x = s
        let a = Pattern::new(var("x"), var("x"), iri("o"));
        let b = Pattern::new(var("y"), iri("s"), iri("o"));
        let u = unify(&a, &b, &Binding::new()).unwrap();
        assert_eq!(u.get("x"), Some(&iri("s")));
        assert_eq!(u.get("y"), Some(&iri("s")));
    }

    #[test]
    fn unify_respects_existing_binding() {
        let a = Pattern::new(var("x"), iri("p"), iri("o"));
        let b = Pattern::new(iri("s"), iri("p"), iri("o"));
        let bound = Binding::new().with("x", iri("t"));
        assert_eq!(unify(&a, &b, &bound), None);
    }

    #[test]
    fn goal_head_namespaces_are_separate() {
        // Goal variable `p` and rule variable `p` are different variables.
        let goal = Pattern::new(iri("t1"), iri("hasPrice"), var("p"));
        let head = Pattern::new(var("p"), iri("hasPrice"), var("mv"));
        let pre = unify_goal_with_head(&goal, &head).unwrap();
        assert_eq!(pre, Binding::new().with("p", iri("t1")));
        let clash = Pattern::new(var("ts"), iri("other"), var("mv"));
        assert!(unify_goal_with_head(&goal, &clash).is_none());
    }

    #[test]
    fn memo_keys() {
        let p = iri("p");
        let k = |s: Term, o: Term| memo_key(&Pattern::new(s, p.clone(), o));
        assert_eq!(k(var("a"), var("b")), k(var("x"), var("y")));
        assert_ne!(k(var("a"), var("a")), k(var("x"), var("y")));
        assert_ne!(k(iri("s"), var("a")), k(var("a"), iri("s")));
        assert_eq!(k(var("a"), var("b")), "?0 <http://e/p> ?1");
    }

    #[test]
    fn zero_depth_is_rejected() {
        let r = Resolver::new(ResolverConfig {
            limits: Limits {
                max_depth: 0,
                ..Limits::default()
            },
            ..ResolverConfig::default()
        });
        let rt = crate::runtime::Runtime::new();
        assert_eq!(
            r.solve(&Store::new(), &[], &rt, &[]).unwrap_err(),
            EngineError::InvalidLimits
        );
    }
}
