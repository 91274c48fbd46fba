//! Shared helpers for the integration tests: fixture loading, an independent
//! brute-force entailment checker, and seeded random scenario generators.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::PathBuf;

use rand::rngs::StdRng;
use rand::RngExt;

use semres::session::Session;
use semres::store::{AxiomKind, Fragment, Store};
use semres::term::{Pattern, Term, Triple};
use semres::ResolverConfig;

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
pub const XSD_DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
pub const STOCK: &str = "http://example.org/stock#";
pub const PEOPLE: &str = "http://example.org/people#";

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn session(kb: &[&str], mocks: &[&str], annotations: &[&str]) -> Session {
    session_with(ResolverConfig::default(), kb, mocks, annotations)
}

pub fn session_with(
    config: ResolverConfig,
    kb: &[&str],
    mocks: &[&str],
    annotations: &[&str],
) -> Session {
    let mut s = Session::new(config);
    for f in kb {
        s.load_kb(&read_fixture(f)).unwrap();
    }
    for f in mocks {
        s.add_mocks(&read_fixture(f)).unwrap();
    }
    for f in annotations {
        s.add_annotation(&read_fixture(f)).unwrap();
    }
    s
}

pub fn iri(ns: &str, local: &str) -> Term {
    Term::Iri(format!("{ns}{local}"))
}

pub fn triple(s: Term, p: Term, o: Term) -> Triple {
    Triple::new(s, p, o).unwrap()
}

/// Naive entailment: a plain triple set plus its own RDFS type closure
/// (asserted types, domains and ranges through superproperties, and
/// superclasses), recomputed from the raw schema statements.
pub struct Oracle {
    data: HashSet<Triple>,
    sub_class: HashMap<String, Vec<String>>,
    sub_prop: HashMap<String, Vec<String>>,
    domain: HashMap<String, Vec<String>>,
    range: HashMap<String, Vec<String>>,
}

fn reach(edges: &HashMap<String, Vec<String>>, start: &str) -> HashSet<String> {
    let mut seen = HashSet::from([start.to_string()]);
    let mut stack = vec![start.to_string()];
    while let Some(x) = stack.pop() {
        for y in edges.get(&x).into_iter().flatten() {
            if seen.insert(y.clone()) {
                stack.push(y.clone());
            }
        }
    }
    seen
}

impl Oracle {
    pub fn new(kb: &Store, derived: &Fragment) -> Oracle {
        let mut o = Oracle {
            data: kb.triples().cloned().collect(),
            sub_class: HashMap::new(),
            sub_prop: HashMap::new(),
            domain: HashMap::new(),
            range: HashMap::new(),
        };
        o.data.extend(derived.iter().cloned());
        for a in kb.axioms() {
            let map = match a.kind {
                AxiomKind::SubClassOf => &mut o.sub_class,
                AxiomKind::SubPropertyOf => &mut o.sub_prop,
                AxiomKind::Domain => &mut o.domain,
                AxiomKind::Range => &mut o.range,
            };
            map.entry(a.left.clone()).or_default().push(a.right.clone());
        }
        o
    }

    pub fn types(&self, node: &str) -> HashSet<String> {
        let mut direct = HashSet::new();
        for t in &self.data {
            let p = t.predicate_iri();
            let object_is_node = t.object().as_iri() == Some(node);
            if t.subject_iri() == node && p == RDF_TYPE {
                if let Some(c) = t.object().as_iri() {
                    direct.insert(c.to_string());
                }
                continue;
            }
            if p == RDF_TYPE {
                continue;
            }
            for q in reach(&self.sub_prop, p) {
                if t.subject_iri() == node {
                    direct.extend(self.domain.get(&q).into_iter().flatten().cloned());
                }
                if object_is_node {
                    direct.extend(self.range.get(&q).into_iter().flatten().cloned());
                }
            }
        }
        direct
            .iter()
            .flat_map(|c| reach(&self.sub_class, c))
            .collect()
    }

    pub fn holds(&self, t: &Triple) -> bool {
        if t.predicate_iri() == RDF_TYPE {
            return match t.object().as_iri() {
                Some(c) => self.types(t.subject_iri()).contains(c),
                None => false,
            };
        }
        self.data.contains(t)
    }

    /// Whether every pattern of a conjunctive query is ground and entailed
    /// under `b`.
    pub fn satisfies(&self, query: &[Pattern], b: &semres::Binding) -> Result<(), String> {
        for p in query {
            let g = p.apply(b);
            let t = g.to_triple().map_err(|e| format!("{g}: {e}"))?;
            if !self.holds(&t) {
                return Err(format!("not entailed: {t}"));
            }
        }
        Ok(())
    }
}

/// A random knowledge base, annotations over it, mock tables and queries,
/// all as source text so they go through the public parsers.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub kb: String,
    pub annotations: Vec<String>,
    pub mocks: String,
    pub queries: Vec<String>,
}

pub const RNS: &str = "http://example.org/r#";
const CLASSES: usize = 4;
const OBJ_PROPS: usize = 3;
const DATA_PROPS: usize = 2;
const INDIVIDUALS: usize = 5;
const VALUES: usize = 3;

/// Builds a scenario with up to `max_services` annotated services.
///
/// Each service reads a string through a data property of its input node and
/// produces a fresh node linked by an object property, carrying a string of
/// its own. Services can therefore feed each other. Mock tables cover most
/// inputs; the rest either fail or have no handler.
pub fn random_scenario(rng: &mut StdRng, max_services: usize) -> Scenario {
    let mut kb = String::from(
        "@prefix : <http://example.org/r#> .\n\
         @prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n\
         @prefix owl: <http://www.w3.org/2002/07/owl#> .\n",
    );
    for c in 0..CLASSES {
        kb.push_str(&format!(":C{c} a owl:Class .\n"));
    }
    for i in 0..CLASSES {
        for j in i + 1..CLASSES {
            if rng.random_bool(0.3) {
                kb.push_str(&format!(":C{i} rdfs:subClassOf :C{j} .\n"));
            }
        }
    }
    let mut dom_rng = Vec::new();
    for p in 0..OBJ_PROPS {
        let d = rng.random_range(0..CLASSES);
        let r = rng.random_range(0..CLASSES);
        dom_rng.push((d, r));
        kb.push_str(&format!(
            ":p{p} a owl:ObjectProperty ; rdfs:domain :C{d} ; rdfs:range :C{r} .\n"
        ));
    }
    for d in 0..DATA_PROPS {
        kb.push_str(&format!(":d{d} a owl:DatatypeProperty .\n"));
    }
    for i in 0..INDIVIDUALS {
        if rng.random_bool(0.8) {
            kb.push_str(&format!(":i{i} a :C{} .\n", rng.random_range(0..CLASSES)));
        }
        for d in 0..DATA_PROPS {
            if rng.random_bool(0.5) {
                kb.push_str(&format!(
                    ":i{i} :d{d} \"v{}\" .\n",
                    rng.random_range(0..VALUES)
                ));
            }
        }
        if rng.random_bool(0.5) {
            let p = rng.random_range(0..OBJ_PROPS);
            let j = rng.random_range(0..INDIVIDUALS);
            kb.push_str(&format!(":i{i} :p{p} :i{j} .\n"));
        }
    }

    let n = rng.random_range(0..=max_services);
    let mut annotations = Vec::new();
    let mut mocks = Vec::new();
    for k in 0..n {
        let q = rng.random_range(0..OBJ_PROPS);
        let (x_class, y_class) = dom_rng[q];
        let din = rng.random_range(0..DATA_PROPS);
        let dout = rng.random_range(0..DATA_PROPS);
        annotations.push(format!(
            r#"{{
  "service": "r:S{k}",
  "prefixes": {{"r": "{RNS}"}},
  "endpoint": {{"kind": "mock", "name": "m{k}"}},
  "inputModel": {{
    "nodes": [{{"name": "x", "class": "r:C{x_class}"}}, {{"name": "s", "datatype": "xsd:string"}}],
    "triples": [["x", "r:d{din}", "s"]]
  }},
  "outputModel": {{
    "nodes": [{{"name": "x", "class": "r:C{x_class}"}}, {{"name": "y", "class": "r:C{y_class}"}},
              {{"name": "z", "datatype": "xsd:string"}}],
    "triples": [["x", "r:p{q}", "y"], ["y", "r:d{dout}", "z"]]
  }},
  "grounding": {{"lowering": {{"in": "{{s}}"}}, "lifting": {{"out": "z"}}}}
}}"#
        ));
        let mut handlers = Vec::new();
        let mut failures = Vec::new();
        for v in 0..VALUES {
            match rng.random_range(0..6) {
                0 => failures.push(format!(r#"{{"in": "v{v}"}}"#)),
                1 => {}
                _ => handlers.push(format!(
                    r#"{{"request": {{"in": "v{v}"}}, "response": {{"out": "v{}"}}}}"#,
                    (v + k + 1) % VALUES
                )),
            }
        }
        mocks.push(format!(
            r#"{{"name": "m{k}", "handlers": [{}], "failures": [{}]}}"#,
            handlers.join(", "),
            failures.join(", ")
        ));
    }

    let mut queries = Vec::new();
    for _ in 0..3 {
        let p = rng.random_range(0..OBJ_PROPS);
        let d = rng.random_range(0..DATA_PROPS);
        let q = match rng.random_range(0..5) {
            0 => format!("?a p{p} ?b"),
            1 => format!("i{} p{p} ?b", rng.random_range(0..INDIVIDUALS)),
            2 => format!("?a d{d} ?v"),
            3 => format!("?a a C{}", rng.random_range(0..CLASSES)),
            _ => format!("?a p{p} ?b . ?b d{d} ?v"),
        };
        queries.push(q);
    }

    Scenario {
        kb,
        annotations,
        mocks: format!("[{}]", mocks.join(",\n")),
        queries,
    }
}

/// Loads a scenario into a fresh session.
pub fn load_scenario(sc: &Scenario, config: ResolverConfig) -> Session {
    let mut s = Session::new(config);
    s.load_kb(&sc.kb).unwrap();
    s.add_mocks(&sc.mocks).unwrap();
    for a in &sc.annotations {
        s.add_annotation(a).unwrap_or_else(|e| panic!("{e}\n{a}"));
    }
    s
}

/// Random acyclic `rdfs:subClassOf` graph over `n` classes, as edges
/// `(sub, sup)` with `sub` ordered before `sup` in a random permutation.
pub fn random_dag(rng: &mut StdRng, n: usize, density: f64) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(density) {
                edges.push((order[i], order[j]));
            }
        }
    }
    edges
}

/// Reachability by repeated relaxation (Warshall), independent of the
/// store's breadth-first closure.
pub fn warshall(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut m = vec![vec![false; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = true;
    }
    for &(a, b) in edges {
        m[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if m[i][k] {
                for j in 0..n {
                    if m[k][j] {
                        m[i][j] = true;
                    }
                }
            }
        }
    }
    m
}

/// Groups bindings by their textual form so tests can compare sets.
pub fn binding_strings(bs: &[semres::Binding]) -> BTreeSet<String> {
    bs.iter().map(|b| b.to_string()).collect()
}

pub fn counts<'a>(items: impl IntoIterator<Item = &'a str>) -> BTreeMap<&'a str, usize> {
    let mut m = BTreeMap::new();
    for i in items {
        *m.entry(i).or_default() += 1;
    }
    m
}

/// A random annotation that satisfies every structural rule of the format:
/// connected models, literal nodes only as objects, every open input
/// referenced by a lowering template, every open output-only literal lifted.
/// Includes type statements and constant-only triples in the output model.
pub fn random_annotation(rng: &mut StdRng, k: usize) -> String {
    struct N {
        name: String,
        decl: String,
        literal: bool,
        open: bool,
    }
    let object_node = |rng: &mut StdRng, name: String, may_be_constant: bool| {
        let open = !(may_be_constant && rng.random_bool(0.2));
        let class = rng.random_range(0..CLASSES);
        let decl = if open {
            format!(r#"{{"name": "{name}", "class": "r:C{class}"}}"#)
        } else {
            format!(
                r#"{{"name": "{name}", "class": "r:C{class}", "constant": "r:i{}"}}"#,
                rng.random_range(0..INDIVIDUALS)
            )
        };
        N {
            name,
            decl,
            literal: false,
            open,
        }
    };
    let literal_node = |rng: &mut StdRng, name: String| {
        let open = !rng.random_bool(0.2);
        let (dt, value) = if rng.random_bool(0.5) {
            ("xsd:string", "\"w\"")
        } else {
            ("xsd:integer", "\"7\"")
        };
        let decl = if open {
            format!(r#"{{"name": "{name}", "datatype": "{dt}"}}"#)
        } else {
            format!(r#"{{"name": "{name}", "datatype": "{dt}", "constant": {value}}}"#)
        };
        N {
            name,
            decl,
            literal: true,
            open,
        }
    };
    // Connects object nodes into a tree and hangs each literal off one of them.
    let connect = |rng: &mut StdRng, objs: &[&N], lits: &[&N]| -> Vec<String> {
        let mut triples = Vec::new();
        for i in 1..objs.len() {
            let j = rng.random_range(0..i);
            let p = rng.random_range(0..OBJ_PROPS);
            let (s, o) = if rng.random_bool(0.5) { (j, i) } else { (i, j) };
            triples.push(format!(
                r#"["{}", "r:p{p}", "{}"]"#,
                objs[s].name, objs[o].name
            ));
        }
        for l in lits {
            let s = rng.random_range(0..objs.len());
            let d = rng.random_range(0..DATA_PROPS);
            triples.push(format!(r#"["{}", "r:d{d}", "{}"]"#, objs[s].name, l.name));
        }
        triples
    };

    let n_in = rng.random_range(1..=3);
    let input_objs: Vec<N> = (0..n_in)
        .map(|i| object_node(rng, format!("a{i}"), i > 0))
        .collect();
    let input_lits: Vec<N> = (0..rng.random_range(0..=2))
        .map(|i| literal_node(rng, format!("l{i}")))
        .collect();
    let in_triples = connect(
        rng,
        &input_objs.iter().collect::<Vec<_>>(),
        &input_lits.iter().collect::<Vec<_>>(),
    );

    let shared: Vec<&N> = input_objs.iter().filter(|_| rng.random_bool(0.5)).collect();
    let out_objs: Vec<N> = (0..rng.random_range(0..=2))
        .map(|i| object_node(rng, format!("o{i}"), true))
        .collect();
    let out_lits: Vec<N> = if shared.is_empty() && out_objs.is_empty() {
        Vec::new()
    } else {
        (0..rng.random_range(0..=2))
            .map(|i| literal_node(rng, format!("z{i}")))
            .collect()
    };
    let all_out_objs: Vec<&N> = shared.iter().copied().chain(out_objs.iter()).collect();
    let mut out_triples = if all_out_objs.is_empty() {
        Vec::new()
    } else {
        connect(rng, &all_out_objs, &out_lits.iter().collect::<Vec<_>>())
    };
    if !all_out_objs.is_empty() && rng.random_bool(0.5) {
        let n = all_out_objs[rng.random_range(0..all_out_objs.len())];
        out_triples.push(format!(
            r#"["{}", "rdf:type", {{"iri": "r:C{}"}}]"#,
            n.name,
            rng.random_range(0..CLASSES)
        ));
    }
    if let Some(c) = all_out_objs.iter().find(|n| !n.open) {
        if rng.random_bool(0.5) {
            out_triples.push(format!(r#"["{}", "r:p0", {{"iri": "r:i0"}}]"#, c.name));
        }
    }

    let lowering: Vec<String> = input_objs
        .iter()
        .chain(&input_lits)
        .filter(|n| n.open)
        .enumerate()
        .map(|(i, n)| format!(r#""f{i}": "<{{{}}}>""#, n.name))
        .collect();
    let lifting: Vec<String> = out_lits
        .iter()
        .filter(|n| n.open)
        .enumerate()
        .map(|(i, n)| format!(r#""g{i}": "{}""#, n.name))
        .collect();
    let decls = |ns: Vec<&N>| {
        ns.iter()
            .map(|n| n.decl.clone())
            .collect::<Vec<_>>()
            .join(", ")
    };
    format!(
        r#"{{
  "service": "r:Gen{k}",
  "prefixes": {{"r": "{RNS}"}},
  "endpoint": {{"kind": "mock", "name": "gen{k}"}},
  "inputModel": {{"nodes": [{}], "triples": [{}]}},
  "outputModel": {{"nodes": [{}], "triples": [{}]}},
  "grounding": {{"lowering": {{{}}}, "lifting": {{{}}}}}
}}"#,
        decls(input_objs.iter().chain(&input_lits).collect()),
        in_triples.join(", "),
        decls(all_out_objs.iter().copied().chain(&out_lits).collect()),
        out_triples.join(", "),
        lowering.join(", "),
        lifting.join(", ")
    )
}
