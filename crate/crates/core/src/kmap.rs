//! Knowledge items: one mined result as instances, transformations, states and
//! relations, with validation and conversion to and from triples.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::interval::Interval;
use crate::rdf::{Graph, Iri, Literal, Term, Triple};
use crate::vocab::{agricomo, agrikmaps, owl, rdf, rdfs, xsd};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum KnowledgeKind {
    Classification,
    Regression,
    Clustering,
    AssociationRule,
}

impl KnowledgeKind {
    pub const ALL: [KnowledgeKind; 4] = [
        KnowledgeKind::Classification,
        KnowledgeKind::Regression,
        KnowledgeKind::Clustering,
        KnowledgeKind::AssociationRule,
    ];

    /// The ontology class of a model of this kind, e.g. `AgriComO:Regressor`.
    pub fn model_class(self) -> Iri {
        match self {
            KnowledgeKind::Classification => agricomo::classifier(),
            KnowledgeKind::Regression => agricomo::regressor(),
            KnowledgeKind::Clustering => agricomo::clusterer(),
            KnowledgeKind::AssociationRule => agricomo::association_rule_model(),
        }
    }

    /// The data-mining concept an algorithm is categorised under.
    pub fn category_class(self) -> Iri {
        match self {
            KnowledgeKind::Classification => agricomo::classification(),
            KnowledgeKind::Regression => agricomo::regression(),
            KnowledgeKind::Clustering => agricomo::clustering(),
            KnowledgeKind::AssociationRule => agricomo::association_rule(),
        }
    }

    pub fn from_model_class(class: &Iri) -> Option<Self> {
        Self::ALL.into_iter().find(|k| &k.model_class() == class)
    }

    pub fn from_category_class(class: &Iri) -> Option<Self> {
        Self::ALL.into_iter().find(|k| &k.category_class() == class)
    }

    pub fn name(self) -> &'static str {
        match self {
            KnowledgeKind::Classification => "classification",
            KnowledgeKind::Regression => "regression",
            KnowledgeKind::Clustering => "clustering",
            KnowledgeKind::AssociationRule => "association_rule",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let norm: String = s.chars().filter(|c| c.is_alphanumeric()).flat_map(char::to_lowercase).collect();
        match norm.as_str() {
            "classification" => Some(KnowledgeKind::Classification),
            "regression" => Some(KnowledgeKind::Regression),
            "clustering" => Some(KnowledgeKind::Clustering),
            "associationrule" => Some(KnowledgeKind::AssociationRule),
            _ => None,
        }
    }
}

impl fmt::Display for KnowledgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum InstanceRole {
    Model,
    Condition,
    Target,
    Dataset,
    Evaluation,
    Antecedent,
    Consequent,
    Cluster,
}

impl InstanceRole {
    pub const ALL: [InstanceRole; 8] = [
        InstanceRole::Model,
        InstanceRole::Condition,
        InstanceRole::Target,
        InstanceRole::Dataset,
        InstanceRole::Evaluation,
        InstanceRole::Antecedent,
        InstanceRole::Consequent,
        InstanceRole::Cluster,
    ];

    /// Predicate linking the model to an instance of this role.
    pub fn link_predicate(self) -> Option<Iri> {
        match self {
            InstanceRole::Model => None,
            InstanceRole::Condition => Some(agricomo::has_condition()),
            InstanceRole::Target => Some(agricomo::predicts()),
            InstanceRole::Dataset => Some(agricomo::has_dataset()),
            InstanceRole::Evaluation => Some(agricomo::has_evaluation()),
            InstanceRole::Antecedent => Some(agricomo::has_antecedent()),
            InstanceRole::Consequent => Some(agricomo::has_consequent()),
            InstanceRole::Cluster => Some(agricomo::has_cluster()),
        }
    }

    pub fn from_link_predicate(p: &Iri) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.link_predicate().as_ref() == Some(p))
    }

    /// Attribute roles carry transformations and states; the model, dataset
    /// and evaluations do not.
    pub fn carries_values(self) -> bool {
        !matches!(self, InstanceRole::Model | InstanceRole::Dataset | InstanceRole::Evaluation)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Instance {
    pub iri: Iri,
    pub concept: Iri,
    pub role: InstanceRole,
    pub label: Option<String>,
    /// Numeric value, used by evaluation instances for their score.
    pub value: Option<f64>,
    pub transformations: Vec<Iri>,
    pub states: Vec<Iri>,
}

impl Instance {
    pub fn new(iri: Iri, concept: Iri, role: InstanceRole) -> Self {
        Instance { iri, concept, role, label: None, value: None, transformations: Vec::new(), states: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum TransformationKind {
    MiningAlgorithm,
    DataTransformation,
}

/// A reference to an ontology transformation used by an item. Domain and
/// range descriptions live on the ontology entry, not here.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Transformation {
    pub iri: Iri,
    pub kind: TransformationKind,
    pub category: Option<KnowledgeKind>,
}

impl Transformation {
    pub fn algorithm(iri: Iri, category: KnowledgeKind) -> Self {
        Transformation { iri, kind: TransformationKind::MiningAlgorithm, category: Some(category) }
    }

    pub fn data(iri: Iri) -> Self {
        Transformation { iri, kind: TransformationKind::DataTransformation, category: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateRef {
    pub iri: Iri,
    pub label: String,
    pub interval: Option<Interval>,
    pub unit: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Relation {
    pub subject: Iri,
    pub predicate: Iri,
    pub object: Iri,
}

impl Relation {
    pub fn new(subject: Iri, predicate: Iri, object: Iri) -> Self {
        Relation { subject, predicate, object }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub iri: Iri,
    pub citation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KnowledgeItem {
    pub iri: Iri,
    pub kind: KnowledgeKind,
    pub label: String,
    pub instances: Vec<Instance>,
    pub transformations: Vec<Transformation>,
    pub states: Vec<StateRef>,
    pub relations: Vec<Relation>,
    pub provenance: Option<Provenance>,
}

/// Object properties a knowledge item may use.
pub fn relation_vocabulary() -> [Iri; 11] {
    [
        agricomo::has_algorithm(),
        agricomo::has_condition(),
        agricomo::predicts(),
        agricomo::has_transformation(),
        agricomo::has_state(),
        agricomo::has_dataset(),
        agricomo::defined_in(),
        agricomo::has_evaluation(),
        agricomo::has_antecedent(),
        agricomo::has_consequent(),
        agricomo::has_cluster(),
    ]
}

/// Literal-valued properties carrying scores, state bands and units.
pub fn value_properties() -> [Iri; 3] {
    [agricomo::has_value(), agricomo::has_interval(), agricomo::has_unit()]
}

pub fn is_relation_predicate(p: &Iri) -> bool {
    relation_vocabulary().iter().any(|r| r == p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ViolationCode {
    MissingModel,
    MultipleModels,
    ModelIriMismatch,
    ModelClassMismatch,
    ModelLabelMismatch,
    EmptyLabel,
    MissingCondition,
    MissingTarget,
    UnexpectedTarget,
    MissingAntecedent,
    MissingConsequent,
    RoleNotAllowed,
    MissingAlgorithm,
    AlgorithmCategoryMismatch,
    MissingCategory,
    UnexpectedCategory,
    ForeignNamespace,
    ValuesOnIneligibleInstance,
    UnknownTransformation,
    UnreferencedTransformation,
    UnknownState,
    UnreferencedState,
    InvalidInterval,
    InvalidValue,
    DuplicateIri,
    UnknownPredicate,
    LinkMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.code, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KmapError {
    #[error("knowledge item is invalid: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidItem(Vec<Violation>),
    #[error("`{0}` is not typed as AgriComO:KnowledgeModel")]
    NotAKnowledgeModel(Iri),
    #[error("`{0}` is referenced but not described")]
    DanglingReference(Iri),
    #[error("`{iri}` is malformed: {reason}")]
    Malformed { iri: Iri, reason: String },
}

impl KnowledgeItem {
    pub fn model(&self) -> Option<&Instance> {
        self.instances.iter().find(|i| i.role == InstanceRole::Model)
    }

    pub fn instances_with(&self, role: InstanceRole) -> impl Iterator<Item = &Instance> {
        self.instances.iter().filter(move |i| i.role == role)
    }

    pub fn algorithms(&self) -> impl Iterator<Item = &Transformation> {
        self.transformations.iter().filter(|t| t.kind == TransformationKind::MiningAlgorithm)
    }

    /// The relation set implied by instance links, algorithms and provenance.
    pub fn derived_relations(&self) -> BTreeSet<Relation> {
        let mut out = BTreeSet::new();
        for inst in &self.instances {
            if let Some(p) = inst.role.link_predicate() {
                out.insert(Relation::new(self.iri.clone(), p, inst.iri.clone()));
            }
            for t in &inst.transformations {
                out.insert(Relation::new(inst.iri.clone(), agricomo::has_transformation(), t.clone()));
            }
            for s in &inst.states {
                out.insert(Relation::new(inst.iri.clone(), agricomo::has_state(), s.clone()));
            }
        }
        for t in self.algorithms() {
            out.insert(Relation::new(self.iri.clone(), agricomo::has_algorithm(), t.iri.clone()));
        }
        if let Some(p) = &self.provenance {
            out.insert(Relation::new(self.iri.clone(), agricomo::defined_in(), p.iri.clone()));
        }
        out
    }

    /// Replaces `relations` with the derived set.
    pub fn sync_relations(&mut self) {
        self.relations = self.derived_relations().into_iter().collect();
    }

    /// Sorts every list so that items equal up to ordering compare equal.
    pub fn normalized(&self) -> KnowledgeItem {
        let mut k = self.clone();
        for i in &mut k.instances {
            i.transformations.sort();
            i.transformations.dedup();
            i.states.sort();
            i.states.dedup();
        }
        k.instances.sort_by(|a, b| (a.role, &a.iri).cmp(&(b.role, &b.iri)));
        k.transformations.sort_by(|a, b| a.iri.cmp(&b.iri));
        k.states.sort_by(|a, b| a.iri.cmp(&b.iri));
        k.relations.sort();
        k.relations.dedup();
        k
    }

    pub fn equivalent(&self, other: &KnowledgeItem) -> bool {
        self.normalized() == other.normalized()
    }

    /// Every IRI minted for this item: model, instances, states and article.
    pub fn members(&self) -> BTreeSet<Iri> {
        let mut out: BTreeSet<Iri> = self.instances.iter().map(|i| i.iri.clone()).collect();
        out.insert(self.iri.clone());
        out.extend(self.states.iter().map(|s| s.iri.clone()));
        out.extend(self.provenance.iter().map(|p| p.iri.clone()));
        out
    }
}

struct Checker {
    out: Vec<Violation>,
}

impl Checker {
    fn flag(&mut self, code: ViolationCode, message: String) {
        self.out.push(Violation { code, message });
    }
}

/// Returns every invariant violation; an empty list means the item is valid.
pub fn validate(item: &KnowledgeItem) -> Vec<Violation> {
    use ViolationCode::*;
    let mut c = Checker { out: Vec::new() };
    let count = |role| item.instances_with(role).count();

    // model
    match count(InstanceRole::Model) {
        0 => c.flag(MissingModel, "the item has no model instance".into()),
        1 => {}
        n => c.flag(MultipleModels, format!("the item has {n} model instances; exactly one is required")),
    }
    if let Some(model) = item.model() {
        if model.iri != item.iri {
            c.flag(ModelIriMismatch, format!("model instance `{}` differs from item IRI `{}`", model.iri, item.iri));
        }
        if model.concept != item.kind.model_class() {
            c.flag(ModelClassMismatch, format!("a {} item must be typed `{}`", item.kind, item.kind.model_class()));
        }
        if model.label.as_deref().is_some_and(|l| l != item.label) {
            c.flag(ModelLabelMismatch, "the model instance label differs from the item label".into());
        }
    }
    if item.label.trim().is_empty() {
        c.flag(EmptyLabel, "the item label is empty".into());
    }

    // arity per kind
    let (conditions, targets) = (count(InstanceRole::Condition), count(InstanceRole::Target));
    let (antecedents, consequents) = (count(InstanceRole::Antecedent), count(InstanceRole::Consequent));
    let clusters = count(InstanceRole::Cluster);
    match item.kind {
        KnowledgeKind::Regression | KnowledgeKind::Classification => {
            if conditions == 0 {
                c.flag(MissingCondition, format!("a {} item needs at least one condition", item.kind));
            }
            if targets == 0 {
                c.flag(MissingTarget, format!("a {} item needs at least one target", item.kind));
            }
            if antecedents + consequents + clusters > 0 {
                c.flag(
                    RoleNotAllowed,
                    format!("a {} item cannot have antecedents, consequents or clusters", item.kind),
                );
            }
            if item.algorithms().next().is_none() {
                c.flag(MissingAlgorithm, format!("a {} item needs at least one mining algorithm", item.kind));
            }
        }
        KnowledgeKind::Clustering => {
            if conditions == 0 {
                c.flag(MissingCondition, "a clustering item needs at least one condition".into());
            }
            if targets > 0 {
                c.flag(UnexpectedTarget, "a clustering item has no targets".into());
            }
            if antecedents + consequents > 0 {
                c.flag(RoleNotAllowed, "a clustering item cannot have antecedents or consequents".into());
            }
        }
        KnowledgeKind::AssociationRule => {
            if antecedents == 0 {
                c.flag(MissingAntecedent, "an association rule needs at least one antecedent".into());
            }
            if consequents == 0 {
                c.flag(MissingConsequent, "an association rule needs at least one consequent".into());
            }
            if targets > 0 {
                c.flag(UnexpectedTarget, "an association rule has no targets".into());
            }
            if conditions + clusters > 0 {
                c.flag(RoleNotAllowed, "an association rule cannot have conditions or clusters".into());
            }
        }
    }

    // transformations
    let mut transformation_iris = BTreeSet::new();
    for t in &item.transformations {
        if !transformation_iris.insert(&t.iri) {
            c.flag(DuplicateIri, format!("transformation `{}` is listed twice", t.iri));
        }
        if !t.iri.in_namespace(agricomo::NS) {
            c.flag(ForeignNamespace, format!("transformation `{}` is not an AgriComO entity", t.iri));
        }
        match (t.kind, t.category) {
            (TransformationKind::MiningAlgorithm, None) => {
                c.flag(MissingCategory, format!("algorithm `{}` has no category", t.iri))
            }
            (TransformationKind::MiningAlgorithm, Some(cat)) if cat != item.kind => c.flag(
                AlgorithmCategoryMismatch,
                format!("algorithm `{}` is a {cat} algorithm but the item is {}", t.iri, item.kind),
            ),
            (TransformationKind::DataTransformation, Some(_)) => {
                c.flag(UnexpectedCategory, format!("data transformation `{}` cannot have a category", t.iri))
            }
            _ => {}
        }
    }

    // instances
    let state_iris: BTreeSet<&Iri> = item.states.iter().map(|s| &s.iri).collect();
    let mut seen = BTreeSet::new();
    let mut used_transformations = BTreeSet::new();
    let mut used_states = BTreeSet::new();
    for inst in &item.instances {
        if !seen.insert(&inst.iri) {
            c.flag(DuplicateIri, format!("instance `{}` is listed twice", inst.iri));
        }
        if !inst.iri.in_namespace(agrikmaps::NS) {
            c.flag(ForeignNamespace, format!("instance `{}` is not in the AgriKMaps namespace", inst.iri));
        }
        if !inst.concept.in_namespace(agricomo::NS) {
            c.flag(ForeignNamespace, format!("concept `{}` is not an AgriComO class", inst.concept));
        }
        if !inst.role.carries_values() && !(inst.transformations.is_empty() && inst.states.is_empty()) {
            c.flag(
                ValuesOnIneligibleInstance,
                format!("only attribute instances carry transformations or states, not `{}`", inst.iri),
            );
        }
        if inst.value.is_some_and(|v| !v.is_finite()) {
            c.flag(InvalidValue, format!("instance `{}` has a non-finite value", inst.iri));
        }
        for t in &inst.transformations {
            used_transformations.insert(t);
            match item.transformations.iter().find(|x| &x.iri == t) {
                Some(x) if x.kind == TransformationKind::DataTransformation => {}
                Some(_) => c.flag(UnknownTransformation, format!("`{t}` is an algorithm, not a data transformation")),
                None => {
                    c.flag(UnknownTransformation, format!("instance `{}` uses unlisted transformation `{t}`", inst.iri))
                }
            }
        }
        for s in &inst.states {
            used_states.insert(s);
            if !state_iris.contains(s) {
                c.flag(UnknownState, format!("instance `{}` refers to unlisted state `{s}`", inst.iri));
            }
        }
    }
    for t in item.transformations.iter().filter(|t| t.kind == TransformationKind::DataTransformation) {
        if !used_transformations.contains(&t.iri) {
            c.flag(UnreferencedTransformation, format!("data transformation `{}` is not used by any instance", t.iri));
        }
    }

    // states
    let mut seen_states = BTreeSet::new();
    for s in &item.states {
        if !seen_states.insert(&s.iri) || seen.contains(&s.iri) {
            c.flag(DuplicateIri, format!("state `{}` is listed twice", s.iri));
        }
        if !s.iri.in_namespace(agrikmaps::NS) {
            c.flag(ForeignNamespace, format!("state `{}` is not in the AgriKMaps namespace", s.iri));
        }
        if !used_states.contains(&s.iri) {
            c.flag(UnreferencedState, format!("state `{}` is not referenced by any instance", s.iri));
        }
        if s.interval.is_some_and(|i| !i.is_valid()) {
            c.flag(InvalidInterval, format!("state `{}` has an interval with lo > hi", s.iri));
        }
        if s.label.trim().is_empty() {
            c.flag(EmptyLabel, format!("state `{}` has an empty label", s.iri));
        }
    }
    if let Some(p) = &item.provenance {
        if !p.iri.in_namespace(agrikmaps::NS) {
            c.flag(ForeignNamespace, format!("article `{}` is not in the AgriKMaps namespace", p.iri));
        }
    }

    // relations
    for r in &item.relations {
        if !is_relation_predicate(&r.predicate) {
            c.flag(UnknownPredicate, format!("`{}` is not in the relation vocabulary", r.predicate));
        }
    }
    let listed: BTreeSet<Relation> = item.relations.iter().cloned().collect();
    let derived = item.derived_relations();
    for r in derived.difference(&listed) {
        c.flag(
            LinkMismatch,
            format!("relation ({}, {}, {}) is implied but not listed", r.subject, r.predicate.local_name(), r.object),
        );
    }
    for r in listed.difference(&derived).filter(|r| is_relation_predicate(&r.predicate)) {
        c.flag(
            LinkMismatch,
            format!("relation ({}, {}, {}) has no matching link", r.subject, r.predicate.local_name(), r.object),
        );
    }
    c.out
}

fn literal(s: &str) -> Term {
    Term::Literal(Literal::string(s))
}

/// Emits the triples describing `item`. Output order is deterministic.
pub fn to_triples(item: &KnowledgeItem) -> Result<Vec<Triple>, KmapError> {
    let violations = validate(item);
    if !violations.is_empty() {
        return Err(KmapError::InvalidItem(violations));
    }
    let mut out = BTreeSet::new();
    let ty = rdf::type_;
    for inst in &item.instances {
        out.insert(Triple::new(inst.iri.clone(), ty(), owl::named_individual()));
        out.insert(Triple::new(inst.iri.clone(), ty(), inst.concept.clone()));
        if inst.role == InstanceRole::Model {
            out.insert(Triple::new(inst.iri.clone(), ty(), agricomo::knowledge_model()));
            out.insert(Triple::new(inst.iri.clone(), rdfs::label(), literal(&item.label)));
            continue;
        }
        if let Some(label) = &inst.label {
            out.insert(Triple::new(inst.iri.clone(), rdfs::label(), literal(label)));
        }
        if let Some(v) = inst.value {
            out.insert(Triple::new(
                inst.iri.clone(),
                agricomo::has_value(),
                Literal::typed(format!("{v}"), xsd::double()),
            ));
        }
    }
    for s in &item.states {
        out.insert(Triple::new(s.iri.clone(), ty(), owl::named_individual()));
        out.insert(Triple::new(s.iri.clone(), ty(), agricomo::state()));
        out.insert(Triple::new(s.iri.clone(), rdfs::label(), literal(&s.label)));
        if let Some(i) = &s.interval {
            out.insert(Triple::new(s.iri.clone(), agricomo::has_interval(), literal(&i.encode())));
        }
        if let Some(u) = &s.unit {
            out.insert(Triple::new(s.iri.clone(), agricomo::has_unit(), literal(u)));
        }
    }
    if let Some(p) = &item.provenance {
        out.insert(Triple::new(p.iri.clone(), ty(), owl::named_individual()));
        out.insert(Triple::new(p.iri.clone(), ty(), agricomo::article()));
        if let Some(c) = &p.citation {
            out.insert(Triple::new(p.iri.clone(), rdfs::label(), literal(c)));
        }
    }
    for r in &item.relations {
        out.insert(Triple::new(r.subject.clone(), r.predicate.clone(), r.object.clone()));
    }
    Ok(out.into_iter().collect())
}

fn malformed(iri: &Iri, reason: impl Into<String>) -> KmapError {
    KmapError::Malformed { iri: iri.clone(), reason: reason.into() }
}

fn string_of(g: &Graph, subject: &Term, p: &Iri) -> Option<String> {
    g.objects(subject, p).find_map(|t| t.as_literal()).map(|l| l.lexical().to_string())
}

fn iri_objects(g: &Graph, subject: &Term, p: &Iri) -> Vec<Iri> {
    g.objects(subject, p).filter_map(|t| t.as_iri().cloned()).collect()
}

/// The single AgriComO class of an instance, ignoring the structural types.
fn concept_of(g: &Graph, iri: &Iri) -> Result<Iri, KmapError> {
    let term = Term::Iri(iri.clone());
    if !g.has_subject(&term) {
        return Err(KmapError::DanglingReference(iri.clone()));
    }
    let classes: Vec<Iri> = iri_objects(g, &term, &rdf::type_())
        .into_iter()
        .filter(|c| c.in_namespace(agricomo::NS) && c != &agricomo::knowledge_model())
        .collect();
    match classes.as_slice() {
        [one] => Ok(one.clone()),
        [] => Err(KmapError::DanglingReference(iri.clone())),
        _ => Err(malformed(iri, "more than one concept class")),
    }
}

/// Rebuilds the knowledge item rooted at `model` from the graph.
///
/// AgriComO references (algorithms, transformations, classes) are not checked
/// here; they belong to the ontology layer.
pub fn from_triples(g: &Graph, model: &Iri) -> Result<KnowledgeItem, KmapError> {
    let m = Term::Iri(model.clone());
    if !g.is_type(&m, &agricomo::knowledge_model()) {
        return Err(KmapError::NotAKnowledgeModel(model.clone()));
    }
    let model_class = concept_of(g, model)?;
    let kind = KnowledgeKind::from_model_class(&model_class)
        .ok_or_else(|| malformed(model, format!("`{model_class}` is not a model class")))?;
    let label = string_of(g, &m, &rdfs::label()).ok_or_else(|| malformed(model, "missing rdfs:label"))?;

    let mut model_inst = Instance::new(model.clone(), model_class, InstanceRole::Model);
    model_inst.label = Some(label.clone());
    let mut instances = alloc::vec![model_inst];
    let mut transformations: BTreeMap<Iri, Transformation> = BTreeMap::new();
    let mut states: BTreeMap<Iri, StateRef> = BTreeMap::new();
    let mut relations = BTreeSet::new();
    let mut provenance = None;

    for t in g.matches(Some(&m), None, None) {
        let p = t.predicate.as_iri().expect("predicate");
        let Some(o) = t.object.as_iri() else { continue };
        if p == &agricomo::has_algorithm() {
            transformations.insert(o.clone(), Transformation::algorithm(o.clone(), kind));
        } else if p == &agricomo::defined_in() {
            let term = Term::Iri(o.clone());
            if !g.is_type(&term, &agricomo::article()) {
                return Err(KmapError::DanglingReference(o.clone()));
            }
            provenance = Some(Provenance { iri: o.clone(), citation: string_of(g, &term, &rdfs::label()) });
        } else if let Some(role) = InstanceRole::from_link_predicate(p) {
            let term = Term::Iri(o.clone());
            let mut inst = Instance::new(o.clone(), concept_of(g, o)?, role);
            inst.label = string_of(g, &term, &rdfs::label());
            inst.value = match string_of(g, &term, &agricomo::has_value()) {
                Some(v) => Some(v.parse().map_err(|_| malformed(o, "hasValue is not numeric"))?),
                None => None,
            };
            inst.transformations = iri_objects(g, &term, &agricomo::has_transformation());
            inst.states = iri_objects(g, &term, &agricomo::has_state());
            for tr in &inst.transformations {
                transformations.entry(tr.clone()).or_insert_with(|| Transformation::data(tr.clone()));
                relations.insert(Relation::new(o.clone(), agricomo::has_transformation(), tr.clone()));
            }
            for s in &inst.states {
                relations.insert(Relation::new(o.clone(), agricomo::has_state(), s.clone()));
                if states.contains_key(s) {
                    continue;
                }
                let st = Term::Iri(s.clone());
                if !g.is_type(&st, &agricomo::state()) {
                    return Err(KmapError::DanglingReference(s.clone()));
                }
                let interval = match string_of(g, &st, &agricomo::has_interval()) {
                    Some(text) => Some(Interval::decode(&text).map_err(|e| malformed(s, e.to_string()))?),
                    None => None,
                };
                states.insert(
                    s.clone(),
                    StateRef {
                        iri: s.clone(),
                        label: string_of(g, &st, &rdfs::label()).unwrap_or_default(),
                        interval,
                        unit: string_of(g, &st, &agricomo::has_unit()),
                    },
                );
            }
            instances.push(inst);
        } else {
            continue;
        }
        relations.insert(Relation::new(model.clone(), p.clone(), o.clone()));
    }

    Ok(KnowledgeItem {
        iri: model.clone(),
        kind,
        label,
        instances,
        transformations: transformations.into_values().collect(),
        states: states.into_values().collect(),
        relations: relations.into_iter().collect(),
        provenance,
    })
}

/// IRIs of every knowledge model in the graph, sorted.
pub fn knowledge_models(g: &Graph) -> Vec<Iri> {
    let ty = Term::Iri(rdf::type_());
    let km = Term::Iri(agricomo::knowledge_model());
    let mut out: Vec<Iri> = g.matches(None, Some(&ty), Some(&km)).filter_map(|t| t.subject.as_iri().cloned()).collect();
    out.sort();
    out
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn regressor_004() -> KnowledgeItem {
        let k = |s: &str| agrikmaps::term(s);
        let c = |s: &str| agricomo::term(s);
        let mut model = Instance::new(k("Regressor_004"), agricomo::regressor(), InstanceRole::Model);
        model.label = Some("Regressor 004".into());
        let mut condition = Instance::new(k("SoilPH_004"), c("SoilPH"), InstanceRole::Condition);
        condition.transformations =
            ["Transformation_SoilPH_Max", "Transformation_SoilPH_Min", "Transformation_SoilPH_Avg"].map(c).to_vec();
        let target = Instance::new(k("SoilPH_004x"), c("SoilPH"), InstanceRole::Target);
        let mut dataset = Instance::new(k("Dataset_CONSUS_001"), agricomo::dataset(), InstanceRole::Dataset);
        dataset.label = Some("CONSUS 001".into());
        let mut transformations: Vec<Transformation> =
            ["Algorithm_DTR", "Algorithm_LR", "Algorithm_RF", "Algorithm_GBRT"]
                .map(|a| Transformation::algorithm(c(a), KnowledgeKind::Regression))
                .to_vec();
        transformations.extend(condition.transformations.iter().cloned().map(Transformation::data));
        let mut item = KnowledgeItem {
            iri: k("Regressor_004"),
            kind: KnowledgeKind::Regression,
            label: "Regressor 004".into(),
            instances: alloc::vec![model, condition, target, dataset],
            transformations,
            states: Vec::new(),
            relations: Vec::new(),
            provenance: Some(Provenance { iri: k("Article_004"), citation: None }),
        };
        item.sync_relations();
        item
    }

    pub fn minimal_clustering() -> KnowledgeItem {
        let mut model = Instance::new(agrikmaps::term("Clusterer_001"), agricomo::clusterer(), InstanceRole::Model);
        model.label = Some("Clusterer 001".into());
        let cond = Instance::new(agrikmaps::term("NDVI_001"), agricomo::term("NDVI"), InstanceRole::Condition);
        let mut item = KnowledgeItem {
            iri: agrikmaps::term("Clusterer_001"),
            kind: KnowledgeKind::Clustering,
            label: "Clusterer 001".into(),
            instances: alloc::vec![model, cond],
            transformations: Vec::new(),
            states: Vec::new(),
            relations: Vec::new(),
            provenance: None,
        };
        item.sync_relations();
        item
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn codes(item: &KnowledgeItem) -> Vec<ViolationCode> {
        validate(item).into_iter().map(|v| v.code).collect()
    }

    #[test]
    fn regressor_004_is_valid() {
        assert_eq!(validate(&regressor_004()), []);
    }

    #[test]
    fn empty_targets_flagged() {
        let mut item = regressor_004();
        item.instances.retain(|i| i.role != InstanceRole::Target);
        item.sync_relations();
        assert_eq!(codes(&item), [ViolationCode::MissingTarget]);
    }

    #[test]
    fn clustering_algorithm_in_regression_flagged() {
        let mut item = regressor_004();
        item.transformations.retain(|t| t.kind == TransformationKind::DataTransformation);
        item.transformations
            .push(Transformation::algorithm(agricomo::term("Algorithm_KMeans"), KnowledgeKind::Clustering));
        item.sync_relations();
        assert_eq!(codes(&item), [ViolationCode::AlgorithmCategoryMismatch]);
    }

    #[test]
    fn emits_regressor_edges() {
        let triples = to_triples(&regressor_004()).unwrap();
        let has = |s: &str, p: Iri, o: Iri| triples.contains(&Triple::new(agrikmaps::term(s), p, o));
        assert!(has("SoilPH_004", agricomo::has_transformation(), agricomo::term("Transformation_SoilPH_Max")));
        assert!(has("Regressor_004", agricomo::defined_in(), agrikmaps::term("Article_004")));
        assert!(has("Regressor_004", rdf::type_(), agricomo::knowledge_model()));
    }

    #[test]
    fn minimal_clustering_triple_count() {
        // model: NamedIndividual, Clusterer, KnowledgeModel, label = 4
        // condition: NamedIndividual, NDVI = 2
        // relation: hasCondition = 1
        let expected = 4 + 2 + 1;
        assert_eq!(to_triples(&minimal_clustering()).unwrap().len(), expected);
    }

    #[test]
    fn invalid_item_cannot_be_emitted() {
        let mut item = regressor_004();
        item.instances.retain(|i| i.role != InstanceRole::Condition);
        assert!(matches!(to_triples(&item), Err(KmapError::InvalidItem(_))));
    }

    #[test]
    fn round_trip_regressor() {
        let item = regressor_004();
        let g: Graph = to_triples(&item).unwrap().into_iter().collect();
        let back = from_triples(&g, &item.iri).unwrap();
        assert_eq!(back.kind, KnowledgeKind::Regression);
        assert_eq!(back.algorithms().count(), 4);
        assert!(back.equivalent(&item), "{:#?}\n{:#?}", back.normalized(), item.normalized());
    }

    #[test]
    fn missing_type_is_not_a_model() {
        let item = regressor_004();
        let g: Graph = to_triples(&item)
            .unwrap()
            .into_iter()
            .filter(|t| !(t.predicate == rdf::type_() && t.object == Term::Iri(agricomo::knowledge_model())))
            .collect();
        assert_eq!(from_triples(&g, &item.iri), Err(KmapError::NotAKnowledgeModel(item.iri.clone())));
    }

    #[test]
    fn untyped_instance_is_dangling() {
        let item = regressor_004();
        let target = agrikmaps::term("SoilPH_004x");
        let g: Graph = to_triples(&item).unwrap().into_iter().filter(|t| t.subject.as_iri() != Some(&target)).collect();
        assert_eq!(from_triples(&g, &item.iri), Err(KmapError::DanglingReference(target)));
    }

    #[test]
    fn values_only_on_conditions_and_targets() {
        let mut item = regressor_004();
        let t = agricomo::term("Transformation_SoilPH_Max");
        item.instances.iter_mut().find(|i| i.role == InstanceRole::Dataset).unwrap().transformations.push(t);
        item.sync_relations();
        assert_eq!(codes(&item), [ViolationCode::ValuesOnIneligibleInstance]);
    }
}
