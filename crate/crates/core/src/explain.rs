//! Explanations of repository and ontology entities for three audiences in
//! three forms.
//!
//! Retrieval is one-way: repository entities are resolved through the
//! ontology, ontology entities only through the ontology. Every lookup goes
//! through a [`Retriever`] that records it, so the discipline can be audited.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cell::RefCell;

use serde::Serialize;
use thiserror::Error;

use crate::kmap::{self, is_relation_predicate, InstanceRole, KmapError, KnowledgeItem};
use crate::ontology::{EntryKind, Ontology, OntologyEntry};
use crate::rdf::{Graph, Iri, Term, Triple};
use crate::vocab::{agricomo, agrikmaps, dc, rdf, rdfs, skos};

const TEMPLATES_V1: &str = include_str!("../templates/natural.v1.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Audience {
    Manager,
    DataScientist,
    Agronomist,
}

impl Audience {
    pub const ALL: [Audience; 3] = [Audience::Manager, Audience::DataScientist, Audience::Agronomist];

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_lowercase().replace(['-', '_', ' '], "").as_str() {
            "manager" => Some(Audience::Manager),
            "datascientist" => Some(Audience::DataScientist),
            "agronomist" => Some(Audience::Agronomist),
            _ => None,
        }
    }

    fn sees(self, section: Section) -> bool {
        match section {
            Section::Definition | Section::References => true,
            Section::Overview => matches!(self, Audience::Manager | Audience::DataScientist),
            Section::Attributes => self == Audience::DataScientist,
            Section::States | Section::Processing => self == Audience::Agronomist,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExplanationForm {
    Formal,
    Natural,
    Graphic,
}

impl ExplanationForm {
    pub const ALL: [ExplanationForm; 3] = [ExplanationForm::Formal, ExplanationForm::Natural, ExplanationForm::Graphic];

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_lowercase().as_str() {
            "formal" | "triples" => Some(ExplanationForm::Formal),
            "natural" | "text" => Some(ExplanationForm::Natural),
            "graphic" | "graph" => Some(ExplanationForm::Graphic),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Section {
    Definition,
    Overview,
    Attributes,
    States,
    Processing,
    References,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Sentence {
    pub text: String,
    /// Triples the sentence was generated from.
    pub sources: Vec<Triple>,
    /// Entities the sentence links to.
    pub entities: Vec<Iri>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Paragraph {
    pub section: Section,
    pub sentences: Vec<Sentence>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Model,
    Instance,
    Transformation,
    State,
    Concept,
    Dataset,
    Article,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphNode {
    pub id: Iri,
    pub label: String,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct GraphEdge {
    pub source: Iri,
    pub target: Iri,
    pub label: String,
}

/// Node/edge payload for graph views.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphPayload {
    pub version: u32,
    pub root: Iri,
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

pub const GRAPH_PAYLOAD_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExplanationBody {
    #[serde(rename = "triples")]
    Formal(Vec<Triple>),
    #[serde(rename = "paragraphs")]
    Text(Vec<Paragraph>),
    Graph(GraphPayload),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Explanation {
    pub subject: Iri,
    pub label: String,
    pub form: ExplanationForm,
    pub audience: Audience,
    #[serde(flatten)]
    pub body: ExplanationBody,
    /// `rdfs:isDefinedBy` and `rdfs:seeAlso` references.
    pub sources: Vec<String>,
}

impl Explanation {
    pub fn paragraphs(&self) -> &[Paragraph] {
        match &self.body {
            ExplanationBody::Text(p) => p,
            _ => &[],
        }
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        for p in self.paragraphs() {
            for s in &p.sentences {
                if !out.is_empty() {
                    out.push('\n');
                }
                out.push_str(&s.text);
            }
        }
        out
    }

    /// Entities linked from the explanation.
    pub fn mentions(&self) -> BTreeSet<Iri> {
        match &self.body {
            ExplanationBody::Text(ps) => {
                ps.iter().flat_map(|p| &p.sentences).flat_map(|s| s.entities.iter().cloned()).collect()
            }
            ExplanationBody::Formal(ts) => ts
                .iter()
                .flat_map(|t| t.subject.as_iri().cloned().into_iter().chain(t.object.as_iri().cloned()))
                .collect(),
            ExplanationBody::Graph(g) => g.nodes.iter().map(|n| n.id.clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExplainError {
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
    #[error("`{entity}` is typed by `{concept}`, which the ontology does not define")]
    UnexplainedConcept { entity: Iri, concept: Iri },
    #[error("graph depth must be at least 1")]
    InvalidDepth,
    #[error(transparent)]
    Item(#[from] KmapError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Layer {
    Repository,
    Ontology,
}

impl Layer {
    pub fn of(iri: &Iri) -> Layer {
        if iri.in_namespace(agricomo::NS) {
            Layer::Ontology
        } else {
            Layer::Repository
        }
    }
}

/// One recorded lookup: made while expanding an entity of layer `from`,
/// reading data of layer `to`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Lookup {
    pub from: Layer,
    pub to: Layer,
    pub key: Iri,
}

/// Instrumented access to the repository graph and the ontology.
pub struct Retriever<'a> {
    repo: &'a Graph,
    onto: &'a Ontology,
    log: RefCell<Vec<Lookup>>,
}

impl<'a> Retriever<'a> {
    pub fn new(repo: &'a Graph, onto: &'a Ontology) -> Self {
        Retriever { repo, onto, log: RefCell::new(Vec::new()) }
    }

    fn record(&self, from: Layer, to: Layer, key: &Iri) {
        self.log.borrow_mut().push(Lookup { from, to, key: key.clone() });
    }

    pub fn lookups(&self) -> Vec<Lookup> {
        self.log.borrow().clone()
    }

    /// Lookups that flowed from an ontology entity back into the repository.
    pub fn reverse_lookups(&self) -> usize {
        self.log.borrow().iter().filter(|l| l.from == Layer::Ontology && l.to == Layer::Repository).count()
    }

    fn repo_triples(&self, from: Layer, s: &Iri) -> Vec<Triple> {
        self.record(from, Layer::Repository, s);
        self.repo.matches(Some(&Term::Iri(s.clone())), None, None).map(|t| t.to_triple()).collect()
    }

    fn repo_has(&self, from: Layer, s: &Iri) -> bool {
        self.record(from, Layer::Repository, s);
        self.repo.has_subject(&Term::Iri(s.clone()))
    }

    fn repo_item(&self, from: Layer, model: &Iri) -> Result<KnowledgeItem, KmapError> {
        self.record(from, Layer::Repository, model);
        kmap::from_triples(self.repo, model)
    }

    fn entry(&self, from: Layer, iri: &Iri) -> Option<&'a OntologyEntry> {
        self.record(from, Layer::Ontology, iri);
        self.onto.entry(iri)
    }

    fn onto_triples(&self, from: Layer, s: &Iri) -> Vec<Triple> {
        self.record(from, Layer::Ontology, s);
        self.onto.graph().matches(Some(&Term::Iri(s.clone())), None, None).map(|t| t.to_triple()).collect()
    }
}

struct Templates(BTreeMap<&'static str, &'static str>);

impl Templates {
    fn v1() -> Self {
        let map = TEMPLATES_V1
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .filter_map(|l| l.split_once(": "))
            .collect();
        Templates(map)
    }

    fn fill(&self, key: &str, values: &[(&str, &str)]) -> String {
        let template = self.0.get(key).copied().unwrap_or_else(|| panic!("template `{key}` is missing"));
        let mut out = String::from(template);
        for (name, value) in values {
            out = out.replace(&format!("{{{name}}}"), value);
        }
        out
    }
}

/// Version of the template file in use.
pub fn template_version() -> &'static str {
    Templates::v1().0.get("version").copied().unwrap_or("1")
}

fn find(ts: &[Triple], p: &Iri) -> Vec<Triple> {
    ts.iter().filter(|t| &t.predicate == p).cloned().collect()
}

fn list(words: &[String]) -> String {
    match words {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

struct Writer<'t> {
    templates: &'t Templates,
    audience: Audience,
    paragraphs: Vec<Paragraph>,
}

impl Writer<'_> {
    fn say(&mut self, section: Section, key: &str, values: &[(&str, &str)], sources: Vec<Triple>, entities: Vec<Iri>) {
        if !self.audience.sees(section) {
            return;
        }
        let sentence = Sentence { text: self.templates.fill(key, values), sources, entities };
        match self.paragraphs.iter_mut().find(|p| p.section == section) {
            Some(p) => p.sentences.push(sentence),
            None => self.paragraphs.push(Paragraph { section, sentences: alloc::vec![sentence] }),
        }
    }

    fn finish(mut self) -> Vec<Paragraph> {
        self.paragraphs.sort_by_key(|p| p.section);
        self.paragraphs
    }
}

fn label_of(r: &Retriever, from: Layer, iri: &Iri) -> String {
    if Layer::of(iri) == Layer::Ontology {
        return r.entry(from, iri).map_or_else(|| iri.local_name().to_string(), |e| e.label.clone());
    }
    find(&r.repo_triples(from, iri), &rdfs::label())
        .first()
        .map_or_else(|| iri.local_name().to_string(), |t| t.object.str_value().to_string())
}

/// Definition, overview, attributes, states and references of an ontology entry.
fn entry_paragraphs(r: &Retriever, entry: &OntologyEntry, audience: Audience, templates: &Templates) -> Vec<Paragraph> {
    let from = Layer::Ontology;
    let ts = r.onto_triples(from, &entry.iri);
    let mut w = Writer { templates, audience, paragraphs: Vec::new() };
    let label = entry.label.as_str();
    let label_src = find(&ts, &rdfs::label());
    let me = || alloc::vec![entry.iri.clone()];

    match (&entry.superclass, entry.kind) {
        (Some(sup), kind) => {
            let sup_label = label_of(r, from, sup);
            let (key, p) = match kind {
                EntryKind::Class => ("definition.class", rdfs::sub_class_of()),
                _ => ("definition.individual", rdf::type_()),
            };
            let mut src = label_src.clone();
            src.extend(ts.iter().filter(|t| t.predicate == p && t.object.as_iri() == Some(sup)).cloned());
            w.say(
                Section::Definition,
                key,
                &[("label", label), ("superclass", &sup_label)],
                src,
                alloc::vec![entry.iri.clone(), sup.clone()],
            );
        }
        (None, EntryKind::Property) => {
            w.say(Section::Definition, "definition.property", &[("label", label)], label_src.clone(), me())
        }
        (None, _) => w.say(Section::Definition, "definition.root", &[("label", label)], label_src.clone(), me()),
    }
    w.say(Section::Definition, "comment", &[("comment", &entry.comment)], find(&ts, &rdfs::comment()), me());
    if !entry.aliases.is_empty() {
        w.say(
            Section::Definition,
            "aliases",
            &[("aliases", &list(&entry.aliases))],
            find(&ts, &skos::alt_label()),
            me(),
        );
    }

    if let Some(cat) = entry.category {
        let class = cat.class();
        let mut src = ts.clone();
        src.retain(|t| t.predicate == rdf::type_() || t.predicate == rdfs::sub_class_of());
        w.say(Section::Overview, "category", &[("category", cat.title())], src, alloc::vec![entry.iri.clone(), class]);
    }
    if !entry.applies_to.is_empty() {
        let tasks: Vec<Iri> = entry.applies_to.iter().map(|k| k.category_class()).collect();
        let names: Vec<String> = tasks.iter().map(|t| label_of(r, from, t)).collect();
        let mut entities = me();
        entities.extend(tasks);
        w.say(
            Section::Overview,
            "applies_to",
            &[("tasks", &list(&names))],
            find(&ts, &agricomo::applies_to()),
            entities,
        );
    }

    if let Some(f) = &entry.identifier {
        w.say(Section::Attributes, "formula", &[("formula", f)], find(&ts, &dc::identifier()), me());
    }
    if let Some(range) = &entry.value_range {
        let text = range.describe(entry.precision);
        let src = find(&ts, &agricomo::has_value_range());
        w.say(Section::Attributes, "range", &[("range", &text)], src.clone(), me());
        w.say(Section::States, "range", &[("range", &text)], src, me());
    }
    if let Some(u) = &entry.unit {
        let src = find(&ts, &agricomo::has_unit());
        w.say(Section::Attributes, "unit", &[("unit", u)], src.clone(), me());
        w.say(Section::States, "unit", &[("unit", u)], src, me());
    }
    if !entry.states.is_empty() {
        let count = entry.states.len().to_string();
        w.say(Section::States, "states", &[("count", &count)], find(&ts, &agricomo::has_state()), me());
        for s in &entry.states {
            let sts = r.onto_triples(from, &s.iri);
            let range = s.interval.map_or_else(|| String::from("unbounded"), |i| i.describe(entry.precision));
            let mut src = find(&sts, &rdfs::label());
            src.extend(find(&sts, &agricomo::has_interval()));
            w.say(Section::States, "state", &[("label", &s.label), ("range", &range)], src, alloc::vec![s.iri.clone()]);
        }
    }

    if let Some(d) = &entry.defined_by {
        w.say(Section::References, "defined_by", &[("source", d)], find(&ts, &rdfs::is_defined_by()), me());
    }
    for (s, t) in entry.see_also.iter().zip(find(&ts, &rdfs::see_also())) {
        w.say(Section::References, "see_also", &[("source", s)], alloc::vec![t], me());
    }
    w.finish()
}

/// Natural-language rendering of an ontology entry for one audience.
pub fn render_natural(o: &Ontology, entry: &OntologyEntry, audience: Audience) -> Vec<Paragraph> {
    let empty = Graph::new();
    let r = Retriever::new(&empty, o);
    entry_paragraphs(&r, entry, audience, &Templates::v1())
}

/// The AgriComO class of a repository instance (excluding structural types).
fn concept_of(r: &Retriever, iri: &Iri, ts: &[Triple]) -> Result<Iri, ExplainError> {
    let concept = ts
        .iter()
        .filter(|t| t.predicate == rdf::type_())
        .filter_map(|t| t.object.as_iri())
        .filter(|c| c.in_namespace(agricomo::NS) && **c != agricomo::knowledge_model())
        .min()
        .cloned();
    let concept = concept.ok_or_else(|| ExplainError::UnknownEntity(iri.to_string()))?;
    if r.entry(Layer::Repository, &concept).is_none() {
        return Err(ExplainError::UnexplainedConcept { entity: iri.clone(), concept });
    }
    Ok(concept)
}

fn relation(s: &Iri, p: Iri, o: &Iri) -> Triple {
    Triple::new(s.clone(), p, o.clone())
}

fn item_paragraphs(
    r: &Retriever,
    item: &KnowledgeItem,
    audience: Audience,
    templates: &Templates,
) -> Result<Vec<Paragraph>, ExplainError> {
    let from = Layer::Repository;
    let m = &item.iri;
    let mut w = Writer { templates, audience, paragraphs: Vec::new() };
    let model = item.model().expect("reconstructed items have a model");
    let class_label = label_of(r, from, &model.concept);
    w.say(
        Section::Definition,
        "item.definition",
        &[("label", &item.label), ("class", &class_label)],
        alloc::vec![
            Triple::new(m.clone(), rdfs::label(), crate::rdf::Literal::string(item.label.clone())),
            Triple::new(m.clone(), rdf::type_(), model.concept.clone()),
        ],
        alloc::vec![m.clone(), model.concept.clone()],
    );

    let (inputs, outputs): (Vec<_>, Vec<_>) = item
        .instances
        .iter()
        .filter(|i| i.role.carries_values())
        .partition(|i| matches!(i.role, InstanceRole::Condition | InstanceRole::Antecedent));
    let describe_group = |w: &mut Writer, key: &str, slot: &str, group: &[&kmap::Instance]| {
        if group.is_empty() {
            return;
        }
        let names: Vec<String> = group.iter().map(|i| label_of(r, from, &i.concept)).collect();
        let sources =
            group.iter().map(|i| relation(m, i.role.link_predicate().expect("attribute role"), &i.iri)).collect();
        let mut entities = alloc::vec![m.clone()];
        for i in group {
            entities.push(i.iri.clone());
            entities.push(i.concept.clone());
        }
        w.say(Section::Overview, key, &[(slot, &list(&names))], sources, entities);
    };
    describe_group(&mut w, "item.inputs", "inputs", &inputs);
    let out_key = format!("item.outputs.{}", item.kind.name());
    describe_group(&mut w, &out_key, "outputs", &outputs);

    let algos: Vec<&Iri> = item.algorithms().map(|t| &t.iri).collect();
    if !algos.is_empty() {
        let names: Vec<String> = algos.iter().map(|a| label_of(r, from, a)).collect();
        let sources = algos.iter().map(|a| relation(m, agricomo::has_algorithm(), a)).collect();
        let mut entities = alloc::vec![m.clone()];
        entities.extend(algos.iter().map(|a| (*a).clone()));
        w.say(Section::Overview, "item.algorithms", &[("algorithms", &list(&names))], sources, entities);
    }
    for d in item.instances_with(InstanceRole::Dataset) {
        let name = d.label.clone().unwrap_or_else(|| d.iri.local_name().to_string());
        w.say(
            Section::Overview,
            "item.dataset",
            &[("dataset", &name)],
            alloc::vec![relation(m, agricomo::has_dataset(), &d.iri)],
            alloc::vec![m.clone(), d.iri.clone()],
        );
    }
    for e in item.instances_with(InstanceRole::Evaluation) {
        let metric = label_of(r, from, &e.concept);
        let value = e.value.map_or_else(|| String::from("an unrecorded value"), |v| v.to_string());
        let mut src = alloc::vec![relation(m, agricomo::has_evaluation(), &e.iri)];
        src.extend(find(&r.repo_triples(from, &e.iri), &agricomo::has_value()));
        w.say(
            Section::Overview,
            "item.evaluation",
            &[("metric", &metric), ("value", &value)],
            src,
            alloc::vec![m.clone(), e.iri.clone(), e.concept.clone()],
        );
    }

    // algorithm and concept details for data scientists
    for a in &algos {
        if let Some(e) = r.entry(from, a) {
            let ts = r.onto_triples(from, a);
            let mut src = find(&ts, &rdfs::comment());
            let task = item.kind.category_class();
            let mut entities = alloc::vec![(*a).clone()];
            let applies: Vec<Triple> =
                find(&ts, &agricomo::applies_to()).into_iter().filter(|t| t.object.as_iri() == Some(&task)).collect();
            let task_label = if applies.is_empty() { String::new() } else { label_of(r, from, &task) };
            if !applies.is_empty() {
                src.extend(applies);
                entities.push(task);
            }
            let key = if task_label.is_empty() { "item.algorithm" } else { "item.algorithm.task" };
            w.say(
                Section::Attributes,
                key,
                &[("algorithm", &e.label), ("task", &task_label), ("comment", &e.comment)],
                src,
                entities,
            );
        }
    }
    for inst in inputs.iter().chain(&outputs) {
        instance_details(r, &mut w, inst)?;
    }

    if let Some(p) = &item.provenance {
        let name = p.citation.clone().unwrap_or_else(|| p.iri.local_name().to_string());
        w.say(
            Section::References,
            "item.article",
            &[("article", &name)],
            alloc::vec![relation(m, agricomo::defined_in(), &p.iri)],
            alloc::vec![m.clone(), p.iri.clone()],
        );
    }
    Ok(w.finish())
}

/// Concept, transformations and states of one attribute instance.
fn instance_details(r: &Retriever, w: &mut Writer, inst: &kmap::Instance) -> Result<(), ExplainError> {
    let from = Layer::Repository;
    let entry = r
        .entry(from, &inst.concept)
        .ok_or_else(|| ExplainError::UnexplainedConcept { entity: inst.iri.clone(), concept: inst.concept.clone() })?;
    let name = inst.label.clone().unwrap_or_else(|| inst.iri.local_name().to_string());
    let comment_src = find(&r.onto_triples(from, &inst.concept), &rdfs::comment());
    w.say(
        Section::Attributes,
        "instance.concept",
        &[("concept", &entry.label), ("comment", &entry.comment)],
        comment_src,
        alloc::vec![inst.iri.clone(), inst.concept.clone()],
    );
    if let Some(f) = &entry.identifier {
        let src = find(&r.onto_triples(from, &inst.concept), &dc::identifier());
        w.say(Section::Attributes, "formula", &[("formula", f)], src, alloc::vec![inst.concept.clone()]);
    }
    for t in &inst.transformations {
        let Some(te) = r.entry(from, t) else {
            return Err(ExplainError::UnexplainedConcept { entity: inst.iri.clone(), concept: t.clone() });
        };
        let mut src = alloc::vec![Triple::new(inst.iri.clone(), agricomo::has_transformation(), t.clone())];
        src.extend(find(&r.onto_triples(from, t), &rdfs::comment()));
        let values =
            [("instance", name.as_str()), ("transformation", te.label.as_str()), ("comment", te.comment.as_str())];
        w.say(
            Section::Processing,
            "instance.transformation",
            &values,
            src.clone(),
            alloc::vec![inst.iri.clone(), t.clone()],
        );
        w.say(Section::Attributes, "instance.transformation", &values, src, alloc::vec![inst.iri.clone(), t.clone()]);
    }
    for s in &inst.states {
        let sts = r.repo_triples(from, s);
        let label = find(&sts, &rdfs::label())
            .first()
            .map_or_else(|| s.local_name().to_string(), |t| t.object.str_value().to_string());
        let range = find(&sts, &agricomo::has_interval())
            .first()
            .and_then(|t| crate::interval::Interval::decode(t.object.str_value()).ok())
            .map_or_else(|| String::from("unbounded"), |i| i.describe(entry.precision));
        let mut src = alloc::vec![Triple::new(inst.iri.clone(), agricomo::has_state(), s.clone())];
        src.extend(sts.into_iter().filter(|t| t.predicate == rdfs::label() || t.predicate == agricomo::has_interval()));
        w.say(
            Section::Processing,
            "instance.state",
            &[("instance", &name), ("state", &label), ("range", &range)],
            src,
            alloc::vec![inst.iri.clone(), s.clone()],
        );
    }
    Ok(())
}

fn plain_instance_paragraphs(
    r: &Retriever,
    iri: &Iri,
    audience: Audience,
    templates: &Templates,
) -> Result<Vec<Paragraph>, ExplainError> {
    let from = Layer::Repository;
    let ts = r.repo_triples(from, iri);
    let concept = concept_of(r, iri, &ts)?;
    let entry = r.entry(from, &concept).expect("checked by concept_of");
    let mut w = Writer { templates, audience, paragraphs: Vec::new() };
    let name = find(&ts, &rdfs::label())
        .first()
        .map_or_else(|| iri.local_name().to_string(), |t| t.object.str_value().to_string());
    let mut src = find(&ts, &rdf::type_());
    src.retain(|t| t.object.as_iri() == Some(&concept));
    w.say(
        Section::Definition,
        "instance.definition",
        &[("label", &name), ("concept", &entry.label)],
        src,
        alloc::vec![iri.clone(), concept.clone()],
    );
    w.say(
        Section::Definition,
        "comment",
        &[("comment", &entry.comment)],
        find(&r.onto_triples(from, &concept), &rdfs::comment()),
        alloc::vec![concept.clone()],
    );
    if let Some(v) = find(&ts, &agricomo::has_value()).first() {
        w.say(
            Section::Overview,
            "instance.value",
            &[("instance", &name), ("value", v.object.str_value())],
            alloc::vec![v.clone()],
            alloc::vec![iri.clone()],
        );
    }
    let inst = kmap::Instance {
        iri: iri.clone(),
        concept: concept.clone(),
        role: InstanceRole::Condition,
        label: None,
        value: None,
        transformations: find(&ts, &agricomo::has_transformation())
            .iter()
            .filter_map(|t| t.object.as_iri().cloned())
            .collect(),
        states: find(&ts, &agricomo::has_state()).iter().filter_map(|t| t.object.as_iri().cloned()).collect(),
    };
    instance_details(r, &mut w, &inst)?;
    Ok(w.finish())
}

fn node_kind(r: &Retriever, from: Layer, iri: &Iri) -> NodeKind {
    if Layer::of(iri) == Layer::Ontology {
        return match r.entry(from, iri) {
            Some(e) if e.is_transformation() => NodeKind::Transformation,
            Some(e) if e.superclass.as_ref() == Some(&agricomo::state()) => NodeKind::State,
            _ => NodeKind::Concept,
        };
    }
    let types: Vec<Iri> =
        find(&r.repo_triples(from, iri), &rdf::type_()).iter().filter_map(|t| t.object.as_iri().cloned()).collect();
    if types.contains(&agricomo::knowledge_model()) {
        NodeKind::Model
    } else if types.contains(&agricomo::dataset()) {
        NodeKind::Dataset
    } else if types.contains(&agricomo::article()) {
        NodeKind::Article
    } else if types.contains(&agricomo::state()) {
        NodeKind::State
    } else {
        NodeKind::Instance
    }
}

/// Outgoing edges followed by graph views. Repository nodes follow the
/// relation vocabulary plus a `type` edge to their concept; ontology nodes
/// follow the relation vocabulary and `rdfs:subClassOf`, within the ontology.
fn graph_edges(r: &Retriever, iri: &Iri) -> Vec<GraphEdge> {
    let from = Layer::of(iri);
    let ts = match from {
        Layer::Repository => r.repo_triples(from, iri),
        Layer::Ontology => r.onto_triples(from, iri),
    };
    let is_model =
        ts.iter().any(|t| t.predicate == rdf::type_() && t.object.as_iri() == Some(&agricomo::knowledge_model()));
    let mut out: Vec<GraphEdge> = ts
        .iter()
        .filter(|t| {
            is_relation_predicate(&t.predicate)
                || t.predicate == rdfs::sub_class_of()
                || (from == Layer::Repository
                    && !is_model
                    && t.predicate == rdf::type_()
                    && t.object.as_iri().is_some_and(|c| c.in_namespace(agricomo::NS)))
        })
        .filter_map(|t| {
            let target = t.object.as_iri()?.clone();
            let label =
                if t.predicate == rdf::type_() { String::from("type") } else { t.predicate.local_name().to_string() };
            Some(GraphEdge { source: iri.clone(), target, label })
        })
        .collect();
    out.sort();
    out
}

fn graph_payload(r: &Retriever, root: &Iri, depth: u32) -> Result<GraphPayload, ExplainError> {
    if depth == 0 {
        return Err(ExplainError::InvalidDepth);
    }
    let mut seen = BTreeSet::from([root.clone()]);
    let mut order = alloc::vec![root.clone()];
    let mut edges = BTreeSet::new();
    let mut queue = VecDeque::from([(root.clone(), 0)]);
    while let Some((node, d)) = queue.pop_front() {
        if d == depth {
            continue;
        }
        for e in graph_edges(r, &node) {
            if seen.insert(e.target.clone()) {
                order.push(e.target.clone());
                queue.push_back((e.target.clone(), d + 1));
            }
            edges.insert(e);
        }
    }
    let nodes = order
        .iter()
        .map(|n| {
            let from = Layer::of(n);
            GraphNode { id: n.clone(), label: label_of(r, from, n), kind: node_kind(r, from, n) }
        })
        .collect();
    Ok(GraphPayload { version: GRAPH_PAYLOAD_VERSION, root: root.clone(), nodes, edges: edges.into_iter().collect() })
}

fn exists(r: &Retriever, iri: &Iri) -> bool {
    match Layer::of(iri) {
        Layer::Ontology => r.entry(Layer::Ontology, iri).is_some(),
        Layer::Repository => r.repo_has(Layer::Repository, iri),
    }
}

/// Nodes within `depth` hops of `uri`, with labelled edges.
pub fn render_graph(g: &Graph, o: &Ontology, uri: &Iri, depth: u32) -> Result<GraphPayload, ExplainError> {
    let r = Retriever::new(g, o);
    if !exists(&r, uri) {
        return Err(ExplainError::UnknownEntity(uri.to_string()));
    }
    graph_payload(&r, uri, depth)
}

/// Default hop count for graphic explanations.
pub const DEFAULT_GRAPH_DEPTH: u32 = 1;

pub fn explain_entity(
    g: &Graph,
    o: &Ontology,
    uri: &Iri,
    audience: Audience,
    form: ExplanationForm,
) -> Result<Explanation, ExplainError> {
    let r = Retriever::new(g, o);
    explain_with(&r, uri, audience, form)
}

/// Like [`explain_entity`], also returning every lookup made.
pub fn explain_traced(
    g: &Graph,
    o: &Ontology,
    uri: &Iri,
    audience: Audience,
    form: ExplanationForm,
) -> (Result<Explanation, ExplainError>, Vec<Lookup>) {
    let r = Retriever::new(g, o);
    let result = explain_with(&r, uri, audience, form);
    (result, r.lookups())
}

fn explain_with(
    r: &Retriever,
    uri: &Iri,
    audience: Audience,
    form: ExplanationForm,
) -> Result<Explanation, ExplainError> {
    if !exists(r, uri) {
        return Err(ExplainError::UnknownEntity(uri.to_string()));
    }
    let templates = Templates::v1();
    let layer = Layer::of(uri);
    let label = label_of(r, layer, uri);
    match layer {
        Layer::Ontology => {
            let entry = r.entry(layer, uri).expect("checked by exists");
            let mut sources: Vec<String> = entry.defined_by.iter().cloned().collect();
            sources.extend(entry.see_also.iter().cloned());
            let body = match form {
                ExplanationForm::Formal => {
                    let mut ts = r.onto_triples(layer, uri);
                    for s in &entry.states {
                        ts.extend(r.onto_triples(layer, &s.iri));
                    }
                    ExplanationBody::Formal(ts)
                }
                ExplanationForm::Natural => ExplanationBody::Text(entry_paragraphs(r, entry, audience, &templates)),
                ExplanationForm::Graphic => ExplanationBody::Graph(graph_payload(r, uri, DEFAULT_GRAPH_DEPTH)?),
            };
            Ok(Explanation { subject: uri.clone(), label, form, audience, body, sources })
        }
        Layer::Repository => {
            let own = r.repo_triples(layer, uri);
            let is_model = own
                .iter()
                .any(|t| t.predicate == rdf::type_() && t.object.as_iri() == Some(&agricomo::knowledge_model()));
            let item = if is_model { Some(r.repo_item(layer, uri)?) } else { None };
            if item.is_none() {
                concept_of(r, uri, &own)?;
            }
            let mut sources = Vec::new();
            if let Some(p) = item.as_ref().and_then(|i| i.provenance.as_ref()) {
                sources.push(p.citation.clone().unwrap_or_else(|| p.iri.to_string()));
            }
            let body = match form {
                ExplanationForm::Formal => {
                    let mut ts = Vec::new();
                    match &item {
                        Some(item) => {
                            for member in item.members() {
                                ts.extend(r.repo_triples(layer, &member));
                            }
                        }
                        None => ts = own,
                    }
                    ts.sort();
                    ts.dedup();
                    ExplanationBody::Formal(ts)
                }
                ExplanationForm::Natural => ExplanationBody::Text(match &item {
                    Some(item) => item_paragraphs(r, item, audience, &templates)?,
                    None => plain_instance_paragraphs(r, uri, audience, &templates)?,
                }),
                ExplanationForm::Graphic => ExplanationBody::Graph(graph_payload(r, uri, DEFAULT_GRAPH_DEPTH)?),
            };
            Ok(Explanation { subject: uri.clone(), label, form, audience, body, sources })
        }
    }
}

/// Explanation subjects shipped with a repository: every AgriKMaps subject
/// and every ontology entry.
pub fn explainable_entities(g: &Graph, o: &Ontology) -> Vec<Iri> {
    let mut out: BTreeSet<Iri> = g
        .subjects()
        .into_iter()
        .filter_map(|s| s.as_iri().cloned())
        .filter(|i| i.in_namespace(agrikmaps::NS))
        .collect();
    out.extend(o.entries().map(|e| e.iri.clone()));
    out.into_iter().collect()
}
