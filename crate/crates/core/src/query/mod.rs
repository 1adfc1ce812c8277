//! Keyword search and the SPARQL subset: segmentation, pattern compilation,
//! basic-graph-pattern evaluation and item summaries.

mod sparql;
mod summary;

pub use sparql::{parse_sparql, to_sparql};
pub use summary::{summarize, ConceptRef, EvaluationSummary, ItemSummary, LabeledRef, StateSummary};

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::kmap::KmapError;
use crate::ontology::{EntryKind, Ontology};
use crate::rdf::{Graph, Iri, Term};
use crate::vocab::{agricomo, rdf};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum PatternTerm {
    Var(String),
    Term(Term),
}

impl PatternTerm {
    pub fn var(name: &str) -> Self {
        PatternTerm::Var(name.to_string())
    }

    pub fn iri(iri: Iri) -> Self {
        PatternTerm::Term(Term::Iri(iri))
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            PatternTerm::Var(v) => Some(v),
            PatternTerm::Term(_) => None,
        }
    }
}

impl fmt::Display for PatternTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternTerm::Var(v) => write!(f, "?{v}"),
            PatternTerm::Term(t) => write!(f, "{t}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub predicate: PatternTerm,
    pub object: PatternTerm,
}

impl TriplePattern {
    pub fn new(subject: PatternTerm, predicate: PatternTerm, object: PatternTerm) -> Self {
        TriplePattern { subject, predicate, object }
    }

    pub fn positions(&self) -> [&PatternTerm; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.positions().into_iter().filter_map(PatternTerm::as_var)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Filter {
    /// `CONTAINS(STR(?var), "needle")`, case-sensitive.
    Contains { var: String, needle: String },
    /// `?var = value`, term equality.
    Equals { var: String, value: PatternTerm },
}

impl Filter {
    pub fn vars(&self) -> Vec<&str> {
        match self {
            Filter::Contains { var, .. } => alloc::vec![var.as_str()],
            Filter::Equals { var, value } => core::iter::once(var.as_str()).chain(value.as_var()).collect(),
        }
    }

    fn accepts(&self, row: &BTreeMap<&str, &Term>) -> bool {
        match self {
            Filter::Contains { var, needle } => {
                row.get(var.as_str()).is_some_and(|t| t.str_value().contains(needle.as_str()))
            }
            Filter::Equals { var, value } => {
                let rhs = match value {
                    PatternTerm::Var(v) => row.get(v.as_str()).copied(),
                    PatternTerm::Term(t) => Some(t),
                };
                matches!((row.get(var.as_str()), rhs), (Some(a), Some(b)) if *a == b)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct GraphPattern {
    pub patterns: Vec<TriplePattern>,
    pub filters: Vec<Filter>,
    pub limit: Option<usize>,
    /// Projection; `None` selects every variable in order of appearance.
    pub select: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("variable names must not be empty")]
    EmptyVariable,
    #[error("variable ?{0} is not used in any triple pattern")]
    UnboundVariable(String),
}

impl GraphPattern {
    pub fn new(patterns: Vec<TriplePattern>) -> Self {
        GraphPattern { patterns, ..GraphPattern::default() }
    }

    /// Variables of the triple patterns in order of first appearance.
    pub fn variables(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for v in self.patterns.iter().flat_map(TriplePattern::vars) {
            if !out.iter().any(|x| x == v) {
                out.push(v.to_string());
            }
        }
        out
    }

    pub fn selected(&self) -> Vec<String> {
        self.select.clone().unwrap_or_else(|| self.variables())
    }

    pub fn validate(&self) -> Result<(), PatternError> {
        let vars = self.variables();
        let all = self.filters.iter().flat_map(Filter::vars).chain(self.select.iter().flatten().map(String::as_str));
        for v in all.chain(vars.iter().map(String::as_str)) {
            if v.is_empty() {
                return Err(PatternError::EmptyVariable);
            }
            if !vars.iter().any(|x| x == v) {
                return Err(PatternError::UnboundVariable(v.to_string()));
            }
        }
        Ok(())
    }
}

/// A row of the result: selected variable → bound term.
pub type Solution = BTreeMap<String, Term>;

fn unbound(p: &TriplePattern, bound: &BTreeSet<&str>) -> usize {
    p.positions().iter().filter(|t| t.as_var().is_some_and(|v| !bound.contains(v))).count()
}

fn constant(t: &PatternTerm) -> Option<&Term> {
    match t {
        PatternTerm::Term(t) => Some(t),
        PatternTerm::Var(_) => None,
    }
}

/// Greedy join order: fewest unbound positions given the variables already
/// bound, then fewest triples matching the pattern's constants.
pub fn plan(p: &GraphPattern, g: &Graph) -> Vec<usize> {
    let counts: Vec<usize> =
        p.patterns.iter().map(|t| g.count(constant(&t.subject), constant(&t.predicate), constant(&t.object))).collect();
    let mut bound = BTreeSet::new();
    let mut left: Vec<usize> = (0..p.patterns.len()).collect();
    let mut order = Vec::new();
    while !left.is_empty() {
        let (pos, &best) = left
            .iter()
            .enumerate()
            .min_by_key(|(_, &i)| (unbound(&p.patterns[i], &bound), counts[i], i))
            .expect("non-empty");
        left.remove(pos);
        bound.extend(p.patterns[best].vars());
        order.push(best);
    }
    order
}

pub fn evaluate(p: &GraphPattern, g: &Graph) -> Vec<Solution> {
    evaluate_in_order(p, g, &plan(p, g))
}

/// Evaluates the patterns joined in the given order. Every order yields the
/// same solutions; [`evaluate`] picks a cheap one.
pub fn evaluate_in_order(p: &GraphPattern, g: &Graph, order: &[usize]) -> Vec<Solution> {
    let mut rows: Vec<BTreeMap<&str, &Term>> = alloc::vec![BTreeMap::new()];
    for &i in order {
        let tp = &p.patterns[i];
        let mut next = Vec::new();
        for row in &rows {
            let resolve = |t: &'_ PatternTerm| -> Option<Term> {
                match t {
                    PatternTerm::Term(t) => Some(t.clone()),
                    PatternTerm::Var(v) => row.get(v.as_str()).map(|t| (*t).clone()),
                }
            };
            let (s, pr, o) = (resolve(&tp.subject), resolve(&tp.predicate), resolve(&tp.object));
            'triples: for t in g.matches(s.as_ref(), pr.as_ref(), o.as_ref()) {
                let mut r = row.clone();
                for (pat, term) in tp.positions().into_iter().zip([t.subject, t.predicate, t.object]) {
                    if let PatternTerm::Var(v) = pat {
                        match r.get(v.as_str()) {
                            Some(existing) if *existing != term => continue 'triples,
                            Some(_) => {}
                            None => {
                                r.insert(v.as_str(), term);
                            }
                        }
                    }
                }
                next.push(r);
            }
        }
        rows = next;
        if rows.is_empty() {
            break;
        }
    }
    let selected = p.selected();
    let mut keyed: Vec<(Vec<Option<Term>>, Solution)> = rows
        .into_iter()
        .filter(|r| p.filters.iter().all(|f| f.accepts(r)))
        .map(|r| {
            let key: Vec<Option<Term>> = selected.iter().map(|v| r.get(v.as_str()).map(|t| (*t).clone())).collect();
            let sol: Solution =
                selected.iter().filter_map(|v| r.get(v.as_str()).map(|t| (v.clone(), (*t).clone()))).collect();
            (key, sol)
        })
        .collect();
    keyed.sort();
    keyed.dedup();
    let mut out: Vec<Solution> = keyed.into_iter().map(|(_, s)| s).collect();
    if let Some(limit) = p.limit {
        out.truncate(limit);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    ConceptAsObject,
    ConceptAsSubject,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuerySpec {
    pub relation: Iri,
    pub concept: Iri,
    /// Classes are matched through the type of the linked instance,
    /// individuals (algorithms) directly.
    pub concept_is_class: bool,
    pub direction: Direction,
    pub raw_text: String,
    pub limit: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QueryError {
    #[error("the query is empty")]
    EmptyQuery,
    #[error("`{0}` is not a known relation keyword (try predict, uses, algorithm or dataset)")]
    NoRelationKeyword(String),
    #[error("no ontology concept matches `{0}`")]
    UnknownConcept(String),
    #[error(transparent)]
    Item(#[from] KmapError),
}

/// The verb table: first query token → relation.
pub fn relation_keyword(word: &str) -> Option<(Iri, Direction)> {
    let rel = match word.to_lowercase().as_str() {
        "predict" | "predicts" => agricomo::predicts(),
        "uses" | "condition" => agricomo::has_condition(),
        "algorithm" | "with" => agricomo::has_algorithm(),
        "dataset" | "on" => agricomo::has_dataset(),
        _ => return None,
    };
    Some((rel, Direction::ConceptAsObject))
}

/// Splits a keyword query into a relation and a concept.
pub fn segment_query(text: &str, o: &Ontology) -> Result<QuerySpec, QueryError> {
    let mut words = text.split_whitespace();
    let verb = words.next().ok_or(QueryError::EmptyQuery)?;
    let (relation, direction) =
        relation_keyword(verb).ok_or_else(|| QueryError::NoRelationKeyword(verb.to_string()))?;
    let rest: Vec<&str> = words.collect();
    let name = rest.join(" ");
    let concept = o
        .resolve_where(&name, |e| e.kind != EntryKind::Property)
        .into_iter()
        .next()
        .ok_or_else(|| QueryError::UnknownConcept(name.clone()))?;
    let concept_is_class = o.entry(&concept).is_some_and(|e| e.kind == EntryKind::Class);
    Ok(QuerySpec { relation, concept, concept_is_class, direction, raw_text: text.to_string(), limit: None })
}

/// Builds the basic graph pattern selecting `?m` for a query spec.
pub fn compile_pattern(q: &QuerySpec) -> GraphPattern {
    let m = || PatternTerm::var("m");
    let t = || PatternTerm::var("t");
    let ty = || PatternTerm::iri(rdf::type_());
    let rel = PatternTerm::iri(q.relation.clone());
    let concept = PatternTerm::iri(q.concept.clone());
    let mut patterns = alloc::vec![TriplePattern::new(m(), ty(), PatternTerm::iri(agricomo::knowledge_model()))];
    match (q.concept_is_class, q.direction) {
        (true, Direction::ConceptAsObject) => {
            patterns.push(TriplePattern::new(m(), rel, t()));
            patterns.push(TriplePattern::new(t(), ty(), concept));
        }
        (true, Direction::ConceptAsSubject) => {
            patterns.push(TriplePattern::new(t(), rel, m()));
            patterns.push(TriplePattern::new(t(), ty(), concept));
        }
        (false, Direction::ConceptAsObject) => patterns.push(TriplePattern::new(m(), rel, concept)),
        (false, Direction::ConceptAsSubject) => patterns.push(TriplePattern::new(concept, rel, m())),
    }
    GraphPattern { patterns, filters: Vec::new(), limit: q.limit, select: Some(alloc::vec![String::from("m")]) }
}

/// IRIs of the knowledge models answering a keyword query.
pub fn find_items(g: &Graph, o: &Ontology, text: &str) -> Result<Vec<Iri>, QueryError> {
    let spec = segment_query(text, o)?;
    Ok(evaluate(&compile_pattern(&spec), g)
        .into_iter()
        .filter_map(|s| s.get("m").and_then(Term::as_iri).cloned())
        .collect())
}

/// Segment → compile → evaluate → summarize.
pub fn search(g: &Graph, o: &Ontology, text: &str) -> Result<Vec<ItemSummary>, QueryError> {
    find_items(g, o, text)?.iter().map(|m| summarize(g, o, m).map_err(QueryError::from)).collect()
}
