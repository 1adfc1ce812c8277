//! The knowledge wrapper: manifest → knowledge item → triples → Turtle.
//!
//! Wrapping runs six steps: identify the model, identify concepts, generate
//! instances, identify transformations, generate states, generate the script.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::interval::Interval;
use crate::kmap::{
    self, Instance, InstanceRole, KmapError, KnowledgeItem, KnowledgeKind, Provenance, StateRef, Transformation,
    Violation,
};
use crate::ontology::{EntryKind, Ontology, OntologyEntry, StatCategory};
use crate::rdf::{serialize_turtle, Graph, Iri, Triple};
use crate::vocab::{agricomo, agrikmaps};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Processed,
    Factual,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateSpec {
    pub label: String,
    /// `None` means unbounded below (open).
    pub lo: Option<f64>,
    /// `None` means unbounded above (open).
    pub hi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttributeSpec {
    pub concept_name: String,
    pub transformation_names: Vec<String>,
    pub state_specs: Vec<StateSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationSpec {
    pub metric_name: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProvenanceSpec {
    pub article_id: String,
    pub citation_text: Option<String>,
}

/// Declarative description of one mined result. For clustering, `targets`
/// lists clusters; for association rules, `conditions` are antecedents and
/// `targets` consequents.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KnowledgeManifest {
    pub title: String,
    pub kind: KnowledgeKind,
    pub source_kind: SourceKind,
    pub algorithms: Vec<String>,
    pub conditions: Vec<AttributeSpec>,
    pub targets: Vec<AttributeSpec>,
    pub dataset_name: Option<String>,
    pub evaluation: Vec<EvaluationSpec>,
    pub provenance: Option<ProvenanceSpec>,
}

impl KnowledgeManifest {
    pub fn roles(&self) -> (InstanceRole, InstanceRole) {
        match self.kind {
            KnowledgeKind::Regression | KnowledgeKind::Classification => {
                (InstanceRole::Condition, InstanceRole::Target)
            }
            KnowledgeKind::Clustering => (InstanceRole::Condition, InstanceRole::Cluster),
            KnowledgeKind::AssociationRule => (InstanceRole::Antecedent, InstanceRole::Consequent),
        }
    }

    fn has_states(&self) -> bool {
        self.conditions.iter().chain(&self.targets).any(|a| !a.state_specs.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {reason}")]
pub struct SchemaError {
    pub path: String,
    pub reason: String,
}

fn schema(path: impl Into<String>, reason: impl Into<String>) -> SchemaError {
    SchemaError { path: path.into(), reason: reason.into() }
}

struct Fields<'a> {
    path: String,
    map: &'a Map<String, Value>,
}

impl<'a> Fields<'a> {
    fn open(value: &'a Value, path: &str, allowed: &[&str]) -> Result<Self, SchemaError> {
        let map = value.as_object().ok_or_else(|| schema(path_or_root(path), "expected an object"))?;
        if let Some(k) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(schema(join(path, k), "unknown field"));
        }
        Ok(Fields { path: path.into(), map })
    }

    fn at(&self, key: &str) -> String {
        join(&self.path, key)
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        self.map.get(key).filter(|v| !v.is_null())
    }

    fn string(&self, key: &str) -> Result<String, SchemaError> {
        self.opt_string(key)?.ok_or_else(|| schema(self.at(key), "required"))
    }

    fn opt_string(&self, key: &str) -> Result<Option<String>, SchemaError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) if !s.trim().is_empty() => Ok(Some(s.trim().to_string())),
            Some(Value::String(_)) => Err(schema(self.at(key), "must not be empty")),
            Some(_) => Err(schema(self.at(key), "expected a string")),
        }
    }

    fn number(&self, key: &str) -> Result<Option<f64>, SchemaError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .as_f64()
                .filter(|f| f.is_finite())
                .map(Some)
                .ok_or_else(|| schema(self.at(key), "expected a finite number")),
        }
    }

    fn list(&self, key: &str) -> Result<&'a [Value], SchemaError> {
        match self.get(key) {
            None => Ok(&[]),
            Some(Value::Array(a)) => Ok(a),
            Some(_) => Err(schema(self.at(key), "expected a list")),
        }
    }

    fn strings(&self, key: &str) -> Result<Vec<String>, SchemaError> {
        self.list(key)?
            .iter()
            .enumerate()
            .map(|(i, v)| match v.as_str().map(str::trim) {
                Some(s) if !s.is_empty() => Ok(s.to_string()),
                _ => Err(schema(format!("{}[{i}]", self.at(key)), "expected a non-empty string")),
            })
            .collect()
    }
}

fn path_or_root(path: &str) -> &str {
    if path.is_empty() {
        "$"
    } else {
        path
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn attributes(f: &Fields, key: &str) -> Result<Vec<AttributeSpec>, SchemaError> {
    let mut out = Vec::new();
    for (i, v) in f.list(key)?.iter().enumerate() {
        let path = format!("{}[{i}]", f.at(key));
        let a = Fields::open(v, &path, &["concept_name", "transformation_names", "state_specs"])?;
        let mut state_specs = Vec::new();
        for (j, s) in a.list("state_specs")?.iter().enumerate() {
            let sp = format!("{}[{j}]", a.at("state_specs"));
            let s = Fields::open(s, &sp, &["label", "lo", "hi"])?;
            let spec = StateSpec { label: s.string("label")?, lo: s.number("lo")?, hi: s.number("hi")? };
            if let (Some(lo), Some(hi)) = (spec.lo, spec.hi) {
                if lo > hi {
                    return Err(schema(sp, "lo exceeds hi"));
                }
            }
            state_specs.push(spec);
        }
        out.push(AttributeSpec {
            concept_name: a.string("concept_name")?,
            transformation_names: a.strings("transformation_names")?,
            state_specs,
        });
    }
    Ok(out)
}

const FIELDS: [&str; 10] = [
    "title",
    "kind",
    "source_kind",
    "algorithms",
    "conditions",
    "targets",
    "dataset_name",
    "evaluation",
    "provenance",
    "seq",
];

/// Parses a `.kmf.json` manifest and checks the per-kind arity rules.
pub fn parse_manifest(document: &str) -> Result<KnowledgeManifest, SchemaError> {
    let value: Value = serde_json::from_str(document).map_err(|e| schema("$", e.to_string()))?;
    manifest_from_value(&value)
}

pub fn manifest_from_value(value: &Value) -> Result<KnowledgeManifest, SchemaError> {
    let f = Fields::open(value, "", &FIELDS)?;
    let kind_text = f.string("kind")?;
    let kind = KnowledgeKind::parse(&kind_text).ok_or_else(|| schema("kind", "not one of 4"))?;
    let source_kind = match f.opt_string("source_kind")?.as_deref() {
        None | Some("processed") => SourceKind::Processed,
        Some("factual") => SourceKind::Factual,
        Some(_) => return Err(schema("source_kind", "expected `processed` or `factual`")),
    };
    let mut evaluation = Vec::new();
    for (i, v) in f.list("evaluation")?.iter().enumerate() {
        let e = Fields::open(v, &format!("evaluation[{i}]"), &["metric_name", "score"])?;
        let score = e.number("score")?.ok_or_else(|| schema(e.at("score"), "required"))?;
        evaluation.push(EvaluationSpec { metric_name: e.string("metric_name")?, score });
    }
    let provenance = match f.get("provenance") {
        None => None,
        Some(v) => {
            let p = Fields::open(v, "provenance", &["article_id", "citation_text"])?;
            Some(ProvenanceSpec { article_id: p.string("article_id")?, citation_text: p.opt_string("citation_text")? })
        }
    };
    let m = KnowledgeManifest {
        title: f.string("title")?,
        kind,
        source_kind,
        algorithms: f.strings("algorithms")?,
        conditions: attributes(&f, "conditions")?,
        targets: attributes(&f, "targets")?,
        dataset_name: f.opt_string("dataset_name")?,
        evaluation,
        provenance,
    };
    let required = |ok: bool, path: &str| if ok { Ok(()) } else { Err(schema(path, "required")) };
    match kind {
        KnowledgeKind::Regression | KnowledgeKind::Classification => {
            required(!m.algorithms.is_empty(), "algorithms")?;
            required(!m.conditions.is_empty(), "conditions")?;
            required(!m.targets.is_empty(), "targets")?;
        }
        KnowledgeKind::Clustering => required(!m.conditions.is_empty(), "conditions")?,
        KnowledgeKind::AssociationRule => {
            required(!m.conditions.is_empty(), "conditions")?;
            required(!m.targets.is_empty(), "targets")?;
        }
    }
    if source_kind == SourceKind::Factual && !m.has_states() {
        return Err(schema("state_specs", "required for factual items"));
    }
    Ok(m)
}

/// An optional `seq` field lets a manifest pin its sequence number.
pub fn manifest_seq(document: &str) -> Option<u32> {
    let v: Value = serde_json::from_str(document).ok()?;
    v.get("seq")?.as_u64().and_then(|n| u32::try_from(n).ok())
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WrapError {
    #[error("no ontology concept matches `{0}`")]
    UnknownConcept(String),
    #[error("no ontology transformation matches `{0}`")]
    UnknownTransformation(String),
    #[error("wrapped item is invalid: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidItem(Vec<Violation>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WrapStep {
    pub step: u8,
    pub name: &'static str,
    pub entities: Vec<Iri>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WrapReport {
    pub item: KnowledgeItem,
    pub triples: Vec<Triple>,
    pub turtle: String,
    /// Exactly six entries, steps 1 to 6 in order.
    pub step_log: Vec<WrapStep>,
}

/// Replaces every character that cannot appear in a simple local name.
pub fn local_name_for(text: &str) -> String {
    text.trim().chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect()
}

fn camel(label: &str) -> String {
    label
        .split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(|w| {
            let mut cs = w.chars();
            let first = cs.next().map(|c| c.to_ascii_uppercase());
            first.into_iter().chain(cs).collect::<String>()
        })
        .collect()
}

/// Mints `base`, then `basex`, `basex2`, … until unused.
fn mint(base: &str, used: &mut BTreeSet<String>) -> Iri {
    let mut local = String::from(base);
    let mut n = 1;
    while used.contains(&local) {
        local = if n == 1 { format!("{base}x") } else { format!("{base}x{n}") };
        n += 1;
    }
    used.insert(local.clone());
    agrikmaps::term(&local)
}

fn first<'a>(o: &'a Ontology, name: &str, keep: impl Fn(&OntologyEntry) -> bool) -> Option<&'a OntologyEntry> {
    o.resolve_where(name, keep).first().and_then(|iri| o.entry(iri))
}

fn is_attribute_class(e: &OntologyEntry) -> bool {
    e.kind == EntryKind::Class
        && matches!(
            e.category,
            Some(
                StatCategory::AgronomicIndex
                    | StatCategory::AgroclimaticIndex
                    | StatCategory::VegetationIndex
                    | StatCategory::EcologicalIndex
            )
        )
}

/// Runs the six wrapping steps. Pure: equal inputs give byte-identical Turtle.
pub fn wrap(m: &KnowledgeManifest, o: &Ontology, seq: u32) -> Result<WrapReport, WrapError> {
    let mut used = BTreeSet::new();
    let mut log = Vec::new();

    // 1) identify the model and its algorithms
    let model_class = m.kind.model_class();
    let model_iri = mint(&format!("{}_{seq:03}", model_class.local_name()), &mut used);
    let mut transformations: Vec<Transformation> = Vec::new();
    for name in &m.algorithms {
        let e = first(o, name, |e| e.category == Some(StatCategory::MiningAlgorithm))
            .ok_or_else(|| WrapError::UnknownTransformation(name.clone()))?;
        let category = if e.applies_to.contains(&m.kind) { Some(m.kind) } else { e.applies_to.first().copied() };
        if !transformations.iter().any(|t| t.iri == e.iri) {
            transformations.push(Transformation {
                iri: e.iri.clone(),
                kind: kmap::TransformationKind::MiningAlgorithm,
                category,
            });
        }
    }
    let mut step1 = alloc::vec![model_iri.clone()];
    step1.extend(transformations.iter().map(|t| t.iri.clone()));
    log.push(WrapStep { step: 1, name: "identify the model", entities: step1 });

    // 2) identify concepts
    let (in_role, out_role) = m.roles();
    let attributes: Vec<(InstanceRole, &AttributeSpec)> =
        m.conditions.iter().map(|a| (in_role, a)).chain(m.targets.iter().map(|a| (out_role, a))).collect();
    let mut concepts = Vec::new();
    for (_, a) in &attributes {
        let e = first(o, &a.concept_name, is_attribute_class)
            .ok_or_else(|| WrapError::UnknownConcept(a.concept_name.clone()))?;
        concepts.push(e);
    }
    let mut metrics = Vec::new();
    for ev in &m.evaluation {
        let e = first(o, &ev.metric_name, |e| e.category == Some(StatCategory::EvaluationMetric))
            .ok_or_else(|| WrapError::UnknownConcept(ev.metric_name.clone()))?;
        metrics.push(e);
    }
    let mut step2: Vec<Iri> = concepts.iter().chain(&metrics).map(|e| e.iri.clone()).collect();
    if m.dataset_name.is_some() {
        step2.push(agricomo::dataset());
    }
    log.push(WrapStep { step: 2, name: "identify concepts", entities: step2 });

    // 3) generate instances
    let mut model = Instance::new(model_iri.clone(), model_class, InstanceRole::Model);
    model.label = Some(m.title.clone());
    let mut instances = alloc::vec![model];
    for ((role, _), concept) in attributes.iter().zip(&concepts) {
        let iri = mint(&format!("{}_{seq:03}", concept.iri.local_name()), &mut used);
        instances.push(Instance::new(iri, concept.iri.clone(), *role));
    }
    for (ev, metric) in m.evaluation.iter().zip(&metrics) {
        let mut inst = Instance::new(
            mint(&format!("{}_{seq:03}", metric.iri.local_name()), &mut used),
            metric.iri.clone(),
            InstanceRole::Evaluation,
        );
        inst.label = Some(format!("{} {}", metric.label, ev.score));
        inst.value = Some(ev.score);
        instances.push(inst);
    }
    if let Some(name) = &m.dataset_name {
        let mut inst = Instance::new(
            mint(&format!("Dataset_{}", local_name_for(name)), &mut used),
            agricomo::dataset(),
            InstanceRole::Dataset,
        );
        inst.label = Some(name.clone());
        instances.push(inst);
    }
    let provenance = m.provenance.as_ref().map(|p| Provenance {
        iri: mint(&format!("Article_{}", local_name_for(&p.article_id)), &mut used),
        citation: p.citation_text.clone(),
    });
    let mut step3: Vec<Iri> = instances.iter().map(|i| i.iri.clone()).collect();
    step3.extend(provenance.iter().map(|p| p.iri.clone()));
    log.push(WrapStep { step: 3, name: "generate instances", entities: step3 });

    // 4) identify transformations
    let mut step4 = Vec::new();
    for (idx, (_, a)) in attributes.iter().enumerate() {
        for name in &a.transformation_names {
            let e = first(o, name, |e| e.category == Some(StatCategory::DataTransformation))
                .ok_or_else(|| WrapError::UnknownTransformation(name.clone()))?;
            let inst = &mut instances[idx + 1];
            if !inst.transformations.contains(&e.iri) {
                inst.transformations.push(e.iri.clone());
            }
            if !transformations.iter().any(|t| t.iri == e.iri) {
                transformations.push(Transformation::data(e.iri.clone()));
            }
            step4.push(e.iri.clone());
        }
    }
    log.push(WrapStep { step: 4, name: "identify transformations", entities: step4 });

    // 5) generate states
    let mut states = Vec::new();
    for (idx, ((_, a), concept)) in attributes.iter().zip(&concepts).enumerate() {
        let inst = &mut instances[idx + 1];
        for spec in &a.state_specs {
            let iri = mint(&format!("{}_{}", inst.iri.local_name(), camel(&spec.label)), &mut used);
            let interval = match (spec.lo, spec.hi) {
                (Some(lo), Some(hi)) => Some(Interval::closed(lo, hi)),
                (None, Some(hi)) => Some(Interval::below(hi)),
                (Some(lo), None) => Some(Interval::above(lo)),
                (None, None) => None,
            };
            inst.states.push(iri.clone());
            states.push(StateRef { iri, label: spec.label.clone(), interval, unit: concept.unit.clone() });
        }
    }
    log.push(WrapStep { step: 5, name: "generate states", entities: states.iter().map(|s| s.iri.clone()).collect() });

    // 6) generate the script
    let mut item = KnowledgeItem {
        iri: model_iri,
        kind: m.kind,
        label: m.title.clone(),
        instances,
        transformations,
        states,
        relations: Vec::new(),
        provenance,
    };
    item.sync_relations();
    let triples = kmap::to_triples(&item).map_err(|e| match e {
        KmapError::InvalidItem(v) => WrapError::InvalidItem(v),
        other => unreachable!("to_triples only reports invalid items: {other}"),
    })?;
    let graph: Graph = triples.iter().cloned().collect();
    let turtle = serialize_turtle(&graph);
    let mut step6: Vec<Iri> = triples.iter().filter_map(|t| t.subject.as_iri().cloned()).collect();
    step6.dedup();
    log.push(WrapStep { step: 6, name: "generate scripts", entities: step6 });

    Ok(WrapReport { item, triples, turtle, step_log: log })
}

/// Inserts the report's triples; returns how many were new.
pub fn ingest(report: &WrapReport, g: &mut Graph) -> usize {
    g.extend(report.triples.iter().cloned())
}
