//! Generators and brute-force oracles shared by the property suites and the
//! acceptance run. Nothing here calls the code under test except to build
//! inputs.

#![allow(dead_code)]

use std::collections::BTreeSet;

use oak_core::interval::Interval;
use oak_core::kmap::{Instance, InstanceRole, KnowledgeItem, KnowledgeKind, Provenance, StateRef, Transformation};
use oak_core::query::{Filter, GraphPattern, PatternTerm, Solution, TriplePattern};
use oak_core::rdf::{BlankNode, Graph, Iri, Literal, Subject, Term, Triple};
use oak_core::vocab::{agricomo, agrikmaps, xsd};
use proptest::prelude::*;
use proptest::sample::{select, subsequence};

pub const EX: &str = "http://example.org/t#";

pub fn ex(local: &str) -> Iri {
    Iri::new(format!("{EX}{local}")).unwrap()
}

// ---------------------------------------------------------------------------
// query oracle: a deliberately small term universe so every variable
// assignment can be enumerated

pub fn nodes() -> Vec<Term> {
    let mut out: Vec<Term> = ["a", "b", "c", "d", "e"].iter().map(|l| Term::Iri(ex(l))).collect();
    out.push(Term::Blank(BlankNode::new("n0").unwrap()));
    out
}

pub fn predicates() -> Vec<Term> {
    ["p", "q", "r"].iter().map(|l| Term::Iri(ex(l))).collect()
}

pub fn literals() -> Vec<Term> {
    vec![
        Term::Literal(Literal::string("alpha")),
        Term::Literal(Literal::string("beta")),
        Term::Literal(Literal::typed("7", xsd::integer())),
    ]
}

/// Every term that can occur in a generated graph.
pub fn universe() -> Vec<Term> {
    let mut u = nodes();
    u.extend(predicates());
    u.extend(literals());
    u
}

pub fn small_triple() -> impl Strategy<Value = Triple> {
    let objects: Vec<Term> = nodes().into_iter().chain(predicates()).chain(literals()).collect();
    (select(nodes()), select(predicates()), select(objects)).prop_map(|(s, p, o)| {
        let p = p.as_iri().unwrap().clone();
        Triple::new(Subject::try_from(s).unwrap(), p, o)
    })
}

pub fn small_graph() -> impl Strategy<Value = Graph> {
    prop::collection::vec(small_triple(), 0..=200).prop_map(|ts| ts.into_iter().collect())
}

const VARS: [&str; 3] = ["x", "y", "z"];

fn pattern_term(constants: Vec<Term>) -> impl Strategy<Value = PatternTerm> {
    prop_oneof![
        3 => select(VARS.to_vec()).prop_map(PatternTerm::var),
        2 => select(constants).prop_map(PatternTerm::Term),
    ]
}

fn triple_pattern() -> impl Strategy<Value = TriplePattern> {
    // constants occasionally come from the wrong position to exercise empty matches
    let subjects: Vec<Term> = nodes().into_iter().chain(literals().into_iter().take(1)).collect();
    let preds: Vec<Term> = predicates().into_iter().chain(nodes().into_iter().take(1)).collect();
    (pattern_term(subjects), pattern_term(preds), pattern_term(universe()))
        .prop_map(|(s, p, o)| TriplePattern::new(s, p, o))
}

/// Random basic graph patterns: 1–4 triple patterns over at most three
/// variables, with optional filters, projection and limit.
pub fn small_bgp() -> impl Strategy<Value = GraphPattern> {
    (prop::collection::vec(triple_pattern(), 1..=4), any::<u64>(), prop::option::of(0usize..6)).prop_map(
        |(patterns, seed, limit)| {
            let mut p = GraphPattern::new(patterns);
            let vars = p.variables();
            let pick = |n: u64| vars[(n as usize) % vars.len()].clone();
            if !vars.is_empty() {
                match seed % 5 {
                    0 => p.filters.push(Filter::Contains {
                        var: pick(seed >> 3),
                        needle: String::from(["a", "b", "t#c", "lph"][(seed >> 8) as usize % 4]),
                    }),
                    1 => {
                        let u = universe();
                        p.filters.push(Filter::Equals {
                            var: pick(seed >> 3),
                            value: PatternTerm::Term(u[(seed >> 8) as usize % u.len()].clone()),
                        })
                    }
                    2 => p
                        .filters
                        .push(Filter::Equals { var: pick(seed >> 3), value: PatternTerm::Var(pick(seed >> 13)) }),
                    _ => {}
                }
                if seed & (1 << 20) != 0 {
                    let keep: Vec<String> = vars
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| seed & (1 << (21 + i)) != 0)
                        .map(|(_, v)| v.clone())
                        .collect();
                    if !keep.is_empty() {
                        p.select = Some(keep);
                    }
                }
            }
            if seed & (1 << 30) != 0 {
                p.limit = limit;
            }
            p
        },
    )
}

fn bind(t: &PatternTerm, vars: &[String], values: &[&Term]) -> Term {
    match t {
        PatternTerm::Term(t) => t.clone(),
        PatternTerm::Var(v) => values[vars.iter().position(|x| x == v).unwrap()].clone(),
    }
}

/// Nested enumeration of every assignment of the pattern's variables to the
/// term universe, keeping those whose instantiated patterns are all in `g`.
pub fn brute_force(p: &GraphPattern, g: &Graph) -> Vec<Vec<Term>> {
    let vars = p.variables();
    let u = universe();
    let mut rows = BTreeSet::new();
    let n = vars.len() as u32;
    for code in 0..u.len().pow(n) {
        let values: Vec<&Term> = (0..n).map(|i| &u[(code / u.len().pow(i)) % u.len()]).collect();
        let holds = p.patterns.iter().all(|tp| {
            let (s, pr, o) = (
                bind(&tp.subject, &vars, &values),
                bind(&tp.predicate, &vars, &values),
                bind(&tp.object, &vars, &values),
            );
            match Triple::from_terms(s, pr, o) {
                Ok(t) => g.contains(&t),
                Err(_) => false,
            }
        });
        let value_of = |v: &str| values[vars.iter().position(|x| x == v).unwrap()];
        let passes = p.filters.iter().all(|f| match f {
            Filter::Contains { var, needle } => value_of(var).str_value().contains(needle.as_str()),
            Filter::Equals { var, value } => {
                let rhs = match value {
                    PatternTerm::Var(v) => value_of(v),
                    PatternTerm::Term(t) => t,
                };
                value_of(var) == rhs
            }
        });
        if holds && passes {
            rows.insert(p.selected().iter().map(|v| value_of(v).clone()).collect::<Vec<_>>());
        }
    }
    let mut out: Vec<Vec<Term>> = rows.into_iter().collect();
    if let Some(l) = p.limit {
        out.truncate(l);
    }
    out
}

pub fn as_rows(p: &GraphPattern, solutions: &[Solution]) -> Vec<Vec<Term>> {
    let sel = p.selected();
    solutions.iter().map(|s| sel.iter().map(|v| s[v].clone()).collect()).collect()
}

// ---------------------------------------------------------------------------
// turtle round-trip: graphs with awkward lexical content

fn local_name() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-zA-Z][a-zA-Z0-9_]{0,8}",
        "[a-z]{1,4}[-.][a-z0-9]{1,4}",
        "[0-9][a-z]{0,3}",
        "[a-z]{1,3}%[0-9A-F]{2}",
        Just(String::new()),
    ]
}

fn iri() -> impl Strategy<Value = Iri> {
    let namespaces = vec![EX, agricomo::NS, agrikmaps::NS, "http://other.example/path/", "urn:x:"];
    (select(namespaces), local_name()).prop_map(|(ns, l)| Iri::new(format!("{ns}{l}")).unwrap())
}

fn literal() -> impl Strategy<Value = Literal> {
    prop_oneof![
        "[ -~]{0,12}".prop_map(Literal::string),
        "[a-zé\"\\\\\n\t\r' ]{0,10}".prop_map(Literal::string),
        ("\\PC{0,6}", "[a-z]{2}(-[A-Z]{2})?").prop_map(|(s, l)| Literal::lang(s, l).unwrap()),
        "-?[0-9]{1,5}".prop_map(|s| Literal::typed(s, xsd::integer())),
        "[0-9]{1,3}\\.[0-9]{1,3}".prop_map(|s| Literal::typed(s, xsd::decimal())),
        "[0-9]\\.[0-9]{1,3}[eE]-?[0-9]".prop_map(|s| Literal::typed(s, xsd::double())),
        select(vec!["true", "false"]).prop_map(|s| Literal::typed(s, xsd::boolean())),
        ("[a-z0-9 ]{0,6}", iri()).prop_map(|(s, d)| Literal::typed(s, d)),
    ]
}

fn blank() -> impl Strategy<Value = BlankNode> {
    (0u8..4).prop_map(|i| BlankNode::new(format!("b{i}")).unwrap())
}

fn subject() -> impl Strategy<Value = Subject> {
    prop_oneof![3 => iri().prop_map(Subject::from), 1 => blank().prop_map(Subject::from)]
}

fn object() -> impl Strategy<Value = Term> {
    prop_oneof![
        3 => iri().prop_map(Term::from),
        1 => blank().prop_map(Term::from),
        3 => literal().prop_map(Term::from),
    ]
}

pub fn rich_triple() -> impl Strategy<Value = Triple> {
    (subject(), iri(), object()).prop_map(|(s, p, o)| Triple::new(s, p, o))
}

pub fn rich_graph() -> impl Strategy<Value = Graph> {
    prop::collection::vec(rich_triple(), 0..40).prop_map(|ts| ts.into_iter().collect())
}

// ---------------------------------------------------------------------------
// knowledge items: built valid by construction, independently of `validate`

fn c(local: &str) -> Iri {
    agricomo::term(local)
}

fn k(local: &str) -> Iri {
    agrikmaps::term(local)
}

const CONCEPTS: [&str; 6] = ["SoilPH", "NDVI", "GDD", "CropYield", "LAI", "Rainfall"];
const DATA_TRANSFORMS: [&str; 4] =
    ["Transformation_SoilPH_Max", "Transformation_SoilPH_Min", "Transformation_SoilPH_Avg", "Transformation_NDVI_Avg"];
const ALGORITHMS: [&str; 5] = ["Algorithm_DTR", "Algorithm_LR", "Algorithm_RF", "Algorithm_GBRT", "Algorithm_KMeans"];
const METRICS: [&str; 3] = ["R2", "RMSE", "Accuracy"];

#[derive(Debug, Clone)]
struct AttributeDraft {
    concept: usize,
    label: Option<String>,
    transforms: Vec<usize>,
    states: Vec<(String, Option<(i32, i32, u8)>, Option<String>)>,
}

fn attribute_draft() -> impl Strategy<Value = AttributeDraft> {
    let state = (
        "[A-Za-z][a-z ]{0,8}[a-z]",
        prop::option::of((-20i32..150, 0i32..60, 0u8..4)),
        prop::option::of(select(vec!["pH", "mm", "%"]).prop_map(String::from)),
    );
    (
        0..CONCEPTS.len(),
        prop::option::of("[A-Za-z][a-zA-Z0-9 ]{0,10}"),
        subsequence((0..DATA_TRANSFORMS.len()).collect::<Vec<_>>(), 0..=3),
        prop::collection::vec(state, 0..3),
    )
        .prop_map(|(concept, label, transforms, states)| AttributeDraft { concept, label, transforms, states })
}

fn interval(lo: i32, width: i32, shape: u8) -> Interval {
    let (lo, hi) = (f64::from(lo) / 10.0, f64::from(lo + width) / 10.0);
    match shape {
        0 => Interval::closed(lo, hi),
        1 => Interval::below(hi),
        2 => Interval::above(lo),
        _ => Interval { lo_open: true, ..Interval::closed(lo, hi) },
    }
}

/// Random valid knowledge items of every kind.
pub fn valid_item() -> impl Strategy<Value = KnowledgeItem> {
    (
        select(KnowledgeKind::ALL.to_vec()),
        1u32..1000,
        "[A-Za-z][A-Za-z0-9 ]{0,14}",
        prop::collection::vec(attribute_draft(), 1..3),
        prop::collection::vec(attribute_draft(), 1..3),
        subsequence((0..4).collect::<Vec<usize>>(), 1..=4),
        prop::option::of(prop::option::of("[A-Za-z .,0-9]{1,20}")),
        prop::option::of("[A-Z]{2,6}"),
        prop::collection::vec((0..METRICS.len(), -1000i32..1000), 0..3),
    )
        .prop_map(|(kind, seq, label, inputs, outputs, algos, article, dataset, evals)| {
            build_item(kind, seq, label.trim().to_string(), inputs, outputs, algos, article, dataset, evals)
        })
}

#[allow(clippy::too_many_arguments)]
fn build_item(
    kind: KnowledgeKind,
    seq: u32,
    label: String,
    inputs: Vec<AttributeDraft>,
    outputs: Vec<AttributeDraft>,
    algos: Vec<usize>,
    article: Option<Option<String>>,
    dataset: Option<String>,
    evals: Vec<(usize, i32)>,
) -> KnowledgeItem {
    let model_class = kind.model_class();
    let iri = k(&format!("{}_{seq:03}", model_class.local_name()));
    let mut model = Instance::new(iri.clone(), model_class, InstanceRole::Model);
    model.label = Some(label.clone());
    let mut instances = vec![model];
    let mut transformations: Vec<Transformation> = Vec::new();
    let mut states = Vec::new();
    let (in_role, out_role) = match kind {
        KnowledgeKind::Regression | KnowledgeKind::Classification => (InstanceRole::Condition, InstanceRole::Target),
        KnowledgeKind::Clustering => (InstanceRole::Condition, InstanceRole::Cluster),
        KnowledgeKind::AssociationRule => (InstanceRole::Antecedent, InstanceRole::Consequent),
    };
    let mut n = 0;
    for (role, drafts) in [(in_role, inputs), (out_role, outputs)] {
        for d in drafts {
            n += 1;
            let inst_iri = k(&format!("{}_{seq:03}_{n}", CONCEPTS[d.concept]));
            let mut inst = Instance::new(inst_iri.clone(), c(CONCEPTS[d.concept]), role);
            inst.label = d.label;
            for t in d.transforms {
                let t_iri = c(DATA_TRANSFORMS[t]);
                if !transformations.iter().any(|x| x.iri == t_iri) {
                    transformations.push(Transformation::data(t_iri.clone()));
                }
                inst.transformations.push(t_iri);
            }
            for (j, (slabel, range, unit)) in d.states.into_iter().enumerate() {
                let s_iri = k(&format!("{}_S{j}", inst_iri.local_name()));
                inst.states.push(s_iri.clone());
                states.push(StateRef {
                    iri: s_iri,
                    label: slabel,
                    interval: range.map(|(lo, w, s)| interval(lo, w, s)),
                    unit,
                });
            }
            instances.push(inst);
        }
    }
    for a in algos {
        transformations.push(Transformation::algorithm(c(ALGORITHMS[a]), kind));
    }
    if let Some(name) = dataset {
        let mut d = Instance::new(k(&format!("Dataset_{name}")), agricomo::dataset(), InstanceRole::Dataset);
        d.label = Some(name);
        instances.push(d);
    }
    for (i, (m, score)) in evals.into_iter().enumerate() {
        let mut e = Instance::new(k(&format!("{}_{seq:03}_E{i}", METRICS[m])), c(METRICS[m]), InstanceRole::Evaluation);
        e.value = Some(f64::from(score) / 7.0);
        instances.push(e);
    }
    let provenance = article.map(|citation| Provenance { iri: k(&format!("Article_{seq:03}")), citation });
    let mut item =
        KnowledgeItem { iri, kind, label, instances, transformations, states, relations: Vec::new(), provenance };
    item.sync_relations();
    item
}
