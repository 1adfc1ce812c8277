//! The AgriComO layer: entries with their explanation attributes, a label
//! index for concept resolution, state classification and category counts.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::interval::{to_grid, Interval};
use crate::kmap::{KnowledgeKind, StateRef};
use crate::rdf::{Graph, Iri, Term};
use crate::vocab::{agricomo, dc, owl, rdf, rdfs, skos};

/// The eight catalogue categories entries are counted under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum StatCategory {
    AgronomicIndex,
    AgroclimaticIndex,
    VegetationIndex,
    EcologicalIndex,
    PretrainModel,
    MiningAlgorithm,
    EvaluationMetric,
    DataTransformation,
}

impl StatCategory {
    pub const ALL: [StatCategory; 8] = [
        StatCategory::AgronomicIndex,
        StatCategory::AgroclimaticIndex,
        StatCategory::VegetationIndex,
        StatCategory::EcologicalIndex,
        StatCategory::PretrainModel,
        StatCategory::MiningAlgorithm,
        StatCategory::EvaluationMetric,
        StatCategory::DataTransformation,
    ];

    /// Row name as printed in the catalogue statistics.
    pub fn title(self) -> &'static str {
        match self {
            StatCategory::AgronomicIndex => "Agronomic Indices",
            StatCategory::AgroclimaticIndex => "Agroclimatic Indices",
            StatCategory::VegetationIndex => "Vegetation Indices",
            StatCategory::EcologicalIndex => "Ecological Indices",
            StatCategory::PretrainModel => "Pretrain Models",
            StatCategory::MiningAlgorithm => "Mining Algorithms",
            StatCategory::EvaluationMetric => "Evaluation Metrics",
            StatCategory::DataTransformation => "Data Transformations",
        }
    }

    pub fn class(self) -> Iri {
        match self {
            StatCategory::AgronomicIndex => agricomo::agronomic_index(),
            StatCategory::AgroclimaticIndex => agricomo::agroclimatic_index(),
            StatCategory::VegetationIndex => agricomo::vegetation_index(),
            StatCategory::EcologicalIndex => agricomo::ecological_index(),
            StatCategory::PretrainModel => agricomo::pretrain_model(),
            StatCategory::MiningAlgorithm => agricomo::mining_algorithm(),
            StatCategory::EvaluationMetric => agricomo::evaluation_metric(),
            StatCategory::DataTransformation => agricomo::data_transformation(),
        }
    }

    pub fn from_class(class: &Iri) -> Option<Self> {
        Self::ALL.into_iter().find(|c| &c.class() == class)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum EntryKind {
    Class,
    Individual,
    Property,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OntologyEntry {
    pub iri: Iri,
    pub kind: EntryKind,
    pub label: String,
    pub comment: String,
    /// `rdfs:subClassOf` for classes, the AgriComO type for individuals.
    pub superclass: Option<Iri>,
    pub category: Option<StatCategory>,
    pub aliases: Vec<String>,
    /// Formula or code identifier (`dc:identifier`).
    pub identifier: Option<String>,
    pub defined_by: Option<String>,
    pub see_also: Vec<String>,
    /// Mining kinds an algorithm applies to.
    pub applies_to: Vec<KnowledgeKind>,
    pub value_range: Option<Interval>,
    pub unit: Option<String>,
    /// Decimal places used when classifying values into states.
    pub precision: u32,
    /// Ordered by lower bound.
    pub states: Vec<StateRef>,
}

impl OntologyEntry {
    pub fn is_transformation(&self) -> bool {
        matches!(self.category, Some(StatCategory::DataTransformation | StatCategory::MiningAlgorithm))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OntologyError {
    #[error("`{iri}` is missing mandatory attribute {attribute}")]
    MissingMandatoryAttribute { iri: Iri, attribute: &'static str },
    #[error("superclass `{superclass}` of `{iri}` is not defined")]
    UnresolvedSuperclass { iri: Iri, superclass: Iri },
    #[error("`{iri}` has an invalid {attribute}: {reason}")]
    InvalidAttribute { iri: Iri, attribute: &'static str, reason: String },
    #[error("states `{first}` and `{second}` of `{iri}` overlap")]
    OverlappingStates { iri: Iri, first: Iri, second: Iri },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("`{0}` defines no states")]
    NoStates(Iri),
    #[error("{value} lies outside the value range {range} of `{iri}`")]
    OutOfRange { iri: Iri, value: String, range: String },
    #[error("{value} falls between the states of `{iri}`")]
    Unclassified { iri: Iri, value: String },
}

/// Lowercases and drops spaces, underscores and hyphens.
pub fn normalize_label(s: &str) -> String {
    s.chars().filter(|c| !matches!(c, ' ' | '_' | '-') && !c.is_whitespace()).flat_map(char::to_lowercase).collect()
}

#[derive(Debug, Clone, Default)]
pub struct Ontology {
    graph: Graph,
    entries: BTreeMap<Iri, OntologyEntry>,
    label_index: BTreeMap<String, BTreeSet<Iri>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CategoryCount {
    pub category: StatCategory,
    pub title: &'static str,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stats {
    /// One row per category, in catalogue order.
    pub categories: Vec<CategoryCount>,
    /// Sum over the categories.
    pub total: usize,
    /// Entries outside every category (structural classes, properties, states).
    pub structural: usize,
}

impl Stats {
    pub fn count(&self, category: StatCategory) -> usize {
        self.categories.iter().find(|c| c.category == category).map_or(0, |c| c.count)
    }
}

fn text(g: &Graph, s: &Term, p: &Iri) -> Option<String> {
    let mut values: Vec<&str> = g.objects(s, p).map(Term::str_value).filter(|v| !v.trim().is_empty()).collect();
    values.sort();
    values.first().map(|v| v.trim().to_string())
}

fn texts(g: &Graph, s: &Term, p: &Iri) -> Vec<String> {
    let mut values: Vec<String> = g.objects(s, p).map(|t| t.str_value().trim().to_string()).collect();
    values.sort();
    values.dedup();
    values
}

fn iris(g: &Graph, s: &Term, p: &Iri) -> Vec<Iri> {
    g.objects(s, p).filter_map(|t| t.as_iri().cloned()).collect()
}

fn invalid(iri: &Iri, attribute: &'static str, reason: impl Into<String>) -> OntologyError {
    OntologyError::InvalidAttribute { iri: iri.clone(), attribute, reason: reason.into() }
}

/// Walks `rdf:type` and `rdfs:subClassOf` upwards to the nearest category class.
fn category_of(g: &Graph, iri: &Iri) -> Option<StatCategory> {
    let mut seen = BTreeSet::new();
    let mut frontier = alloc::vec![iri.clone()];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for node in frontier {
            if !seen.insert(node.clone()) {
                continue;
            }
            let t = Term::Iri(node.clone());
            let mut parents = iris(g, &t, &rdf::type_());
            parents.extend(iris(g, &t, &rdfs::sub_class_of()));
            parents.sort();
            if let Some(c) = parents.iter().find_map(StatCategory::from_class) {
                return Some(c);
            }
            next.extend(parents);
        }
        frontier = next;
    }
    None
}

impl Ontology {
    pub fn empty() -> Self {
        Ontology::default()
    }

    /// All triples of the loaded documents.
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, iri: &Iri) -> Option<&OntologyEntry> {
        self.entries.get(iri)
    }

    pub fn entries(&self) -> impl Iterator<Item = &OntologyEntry> {
        self.entries.values()
    }

    pub fn label(&self, iri: &Iri) -> Option<&str> {
        self.entries.get(iri).map(|e| e.label.as_str())
    }

    /// Finds the entry whose local name is `local`.
    pub fn by_local_name(&self, local: &str) -> Option<&OntologyEntry> {
        self.entries.get(&Iri::new(alloc::format!("{}{local}", agricomo::NS)).ok()?)
    }

    pub fn label_index(&self) -> &BTreeMap<String, BTreeSet<Iri>> {
        &self.label_index
    }

    /// Best matches for a free-text name: every exact normalized match if any,
    /// otherwise every prefix match, otherwise every substring match. Each
    /// group is ordered by IRI.
    pub fn resolve_concept(&self, name: &str) -> Vec<Iri> {
        self.resolve_where(name, |_| true)
    }

    /// [`resolve_concept`](Self::resolve_concept) restricted to entries passing `keep`.
    pub fn resolve_where(&self, name: &str, keep: impl Fn(&OntologyEntry) -> bool) -> Vec<Iri> {
        let needle = normalize_label(name);
        if needle.is_empty() {
            return Vec::new();
        }
        let mut tiers: [BTreeSet<&Iri>; 3] = Default::default();
        for (key, iris) in &self.label_index {
            let tier = if *key == needle {
                0
            } else if key.starts_with(&needle) {
                1
            } else if key.contains(&needle) {
                2
            } else {
                continue;
            };
            tiers[tier].extend(iris.iter().filter(|i| keep(&self.entries[*i])));
        }
        tiers.into_iter().find(|t| !t.is_empty()).map_or_else(Vec::new, |t| t.into_iter().cloned().collect())
    }

    /// Counts per category in catalogue order.
    pub fn stats(&self) -> Stats {
        let categories: Vec<CategoryCount> = StatCategory::ALL
            .into_iter()
            .map(|c| CategoryCount {
                category: c,
                title: c.title(),
                count: self.entries.values().filter(|e| e.category == Some(c)).count(),
            })
            .collect();
        let total = categories.iter().map(|c| c.count).sum();
        Stats { categories, total, structural: self.entries.len() - total }
    }

    /// The state whose band contains `value` rounded to the entry's precision.
    pub fn classify_state<'a>(&self, entry: &'a OntologyEntry, value: f64) -> Result<&'a StateRef, ClassifyError> {
        classify_state(entry, value)
    }
}

pub fn classify_state(entry: &OntologyEntry, value: f64) -> Result<&StateRef, ClassifyError> {
    if entry.states.is_empty() {
        return Err(ClassifyError::NoStates(entry.iri.clone()));
    }
    let out_of_range =
        |range: String| ClassifyError::OutOfRange { iri: entry.iri.clone(), value: value.to_string(), range };
    if !value.is_finite() {
        return Err(out_of_range(String::from("finite values")));
    }
    if let Some(range) = &entry.value_range {
        if !range.contains(value) {
            return Err(out_of_range(range.describe(entry.precision)));
        }
    }
    let g = to_grid(value, entry.precision);
    entry
        .states
        .iter()
        .find(|s| {
            let (lo, hi) = s.interval.map_or((i64::MIN, i64::MAX), |i| i.grid(entry.precision));
            lo <= g && g <= hi
        })
        .ok_or_else(|| ClassifyError::Unclassified { iri: entry.iri.clone(), value: value.to_string() })
}

fn entry_kind(types: &[Iri]) -> EntryKind {
    if types.iter().any(|t| t == &owl::class()) {
        EntryKind::Class
    } else if types.iter().any(|t| t == &owl::object_property() || t == &owl::datatype_property()) {
        EntryKind::Property
    } else {
        EntryKind::Individual
    }
}

fn read_entry(g: &Graph, iri: &Iri) -> Result<OntologyEntry, OntologyError> {
    let s = Term::Iri(iri.clone());
    let missing = |attribute| OntologyError::MissingMandatoryAttribute { iri: iri.clone(), attribute };
    let label = text(g, &s, &rdfs::label()).ok_or_else(|| missing("rdfs:label"))?;
    let comment = text(g, &s, &rdfs::comment()).ok_or_else(|| missing("rdfs:comment"))?;
    let types = iris(g, &s, &rdf::type_());
    let kind = entry_kind(&types);
    let superclass = match kind {
        EntryKind::Class => iris(g, &s, &rdfs::sub_class_of()).into_iter().min(),
        EntryKind::Individual => types.iter().filter(|t| t.in_namespace(agricomo::NS)).min().cloned(),
        EntryKind::Property => None,
    };
    let mut applies_to = Vec::new();
    for t in iris(g, &s, &agricomo::applies_to()) {
        let k = KnowledgeKind::from_category_class(&t)
            .ok_or_else(|| invalid(iri, "appliesTo", alloc::format!("`{t}` is not a mining kind")))?;
        applies_to.push(k);
    }
    applies_to.sort();
    applies_to.dedup();
    let value_range = match text(g, &s, &agricomo::has_value_range()) {
        Some(v) => Some(Interval::decode(&v).map_err(|e| invalid(iri, "hasValueRange", e.to_string()))?),
        None => None,
    };
    let precision = match text(g, &s, &agricomo::has_precision()) {
        Some(v) => v.parse::<u32>().ok().filter(|p| *p <= 9).ok_or_else(|| invalid(iri, "hasPrecision", v))?,
        None => 1,
    };
    Ok(OntologyEntry {
        iri: iri.clone(),
        kind,
        label,
        comment,
        superclass,
        category: category_of(g, iri),
        aliases: texts(g, &s, &skos::alt_label()),
        identifier: text(g, &s, &dc::identifier()),
        defined_by: text(g, &s, &rdfs::is_defined_by()),
        see_also: texts(g, &s, &rdfs::see_also()),
        applies_to,
        value_range,
        unit: text(g, &s, &agricomo::has_unit()),
        precision,
        states: Vec::new(),
    })
}

fn read_states(g: &Graph, entry: &mut OntologyEntry) -> Result<(), OntologyError> {
    let s = Term::Iri(entry.iri.clone());
    let mut states = Vec::new();
    for st in iris(g, &s, &agricomo::has_state()) {
        let t = Term::Iri(st.clone());
        let label = text(g, &t, &rdfs::label())
            .ok_or_else(|| OntologyError::MissingMandatoryAttribute { iri: st.clone(), attribute: "rdfs:label" })?;
        let interval = match text(g, &t, &agricomo::has_interval()) {
            Some(v) => Some(Interval::decode(&v).map_err(|e| invalid(&st, "hasInterval", e.to_string()))?),
            None => None,
        };
        states.push(StateRef { iri: st, label, interval, unit: text(g, &t, &agricomo::has_unit()) });
    }
    let p = entry.precision;
    let bounds = |s: &StateRef| s.interval.map_or((i64::MIN, i64::MAX), |i| i.grid(p));
    states.sort_by(|a, b| bounds(a).cmp(&bounds(b)).then_with(|| a.iri.cmp(&b.iri)));
    for pair in states.windows(2) {
        if bounds(&pair[0]).1 >= bounds(&pair[1]).0 {
            return Err(OntologyError::OverlappingStates {
                iri: entry.iri.clone(),
                first: pair[0].iri.clone(),
                second: pair[1].iri.clone(),
            });
        }
    }
    entry.states = states;
    Ok(())
}

/// Builds the ontology from Turtle graphs. Every AgriComO subject becomes an
/// entry and must carry a label and a comment.
pub fn load_ontology(documents: &[Graph]) -> Result<Ontology, OntologyError> {
    let mut graph = Graph::new();
    for d in documents {
        graph.absorb(d);
    }
    let subjects: BTreeSet<Iri> = graph
        .subjects()
        .into_iter()
        .filter_map(|s| s.as_iri().cloned())
        .filter(|i| i.in_namespace(agricomo::NS))
        .collect();
    let mut entries = BTreeMap::new();
    for iri in &subjects {
        let mut entry = read_entry(&graph, iri)?;
        read_states(&graph, &mut entry)?;
        entries.insert(iri.clone(), entry);
    }
    for e in entries.values() {
        if let Some(sup) = &e.superclass {
            if !entries.contains_key(sup) {
                return Err(OntologyError::UnresolvedSuperclass { iri: e.iri.clone(), superclass: sup.clone() });
            }
        }
    }
    let mut label_index: BTreeMap<String, BTreeSet<Iri>> = BTreeMap::new();
    for e in entries.values() {
        let keys = [e.label.as_str(), e.iri.local_name()].into_iter().chain(e.aliases.iter().map(String::as_str));
        for k in keys {
            let n = normalize_label(k);
            if !n.is_empty() {
                label_index.entry(n).or_default().insert(e.iri.clone());
            }
        }
    }
    Ok(Ontology { graph, entries, label_index })
}

impl fmt::Display for EntryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntryKind::Class => "class",
            EntryKind::Individual => "individual",
            EntryKind::Property => "property",
        })
    }
}
