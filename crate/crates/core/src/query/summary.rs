use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::Serialize;

use crate::kmap::{from_triples, InstanceRole, KmapError, KnowledgeKind};
use crate::ontology::Ontology;
use crate::rdf::{Graph, Iri};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabeledRef {
    pub iri: Iri,
    pub label: String,
}

/// An attribute instance together with the concept it instantiates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConceptRef {
    pub instance: Iri,
    pub role: InstanceRole,
    pub concept: Iri,
    pub label: String,
    pub transformations: Vec<LabeledRef>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateSummary {
    pub iri: Iri,
    pub label: String,
    pub range: Option<String>,
    pub instance: Iri,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationSummary {
    pub metric: LabeledRef,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ItemSummary {
    pub iri: Iri,
    pub label: String,
    pub kind: KnowledgeKind,
    pub algorithms: Vec<LabeledRef>,
    /// Conditions, or antecedents for association rules.
    pub conditions: Vec<ConceptRef>,
    /// Targets, clusters, or consequents.
    pub targets: Vec<ConceptRef>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<LabeledRef>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provenance: Option<LabeledRef>,
    pub states: Vec<StateSummary>,
    pub evaluations: Vec<EvaluationSummary>,
}

fn ontology_ref(o: &Ontology, iri: &Iri) -> LabeledRef {
    LabeledRef { iri: iri.clone(), label: o.label(iri).unwrap_or(iri.local_name()).to_string() }
}

/// Summarizes a stored item; labels come from the ontology, or from the
/// item's own `rdfs:label` for minted individuals.
pub fn summarize(g: &Graph, o: &Ontology, model: &Iri) -> Result<ItemSummary, KmapError> {
    let mut item = from_triples(g, model)?;
    item = item.normalized();
    let attribute = |role: InstanceRole| {
        item.instances_with(role).map(move |i| ConceptRef {
            instance: i.iri.clone(),
            role,
            concept: i.concept.clone(),
            label: ontology_ref(o, &i.concept).label,
            transformations: i.transformations.iter().map(|t| ontology_ref(o, t)).collect(),
        })
    };
    let conditions = attribute(InstanceRole::Condition).chain(attribute(InstanceRole::Antecedent)).collect();
    let targets = attribute(InstanceRole::Target)
        .chain(attribute(InstanceRole::Cluster))
        .chain(attribute(InstanceRole::Consequent))
        .collect();
    let dataset = item.instances_with(InstanceRole::Dataset).next().map(|d| LabeledRef {
        iri: d.iri.clone(),
        label: d.label.clone().unwrap_or_else(|| d.iri.local_name().to_string()),
    });
    let provenance = item.provenance.as_ref().map(|p| LabeledRef {
        iri: p.iri.clone(),
        label: p.citation.clone().unwrap_or_else(|| p.iri.local_name().to_string()),
    });
    let mut states = Vec::new();
    for inst in &item.instances {
        for s in &inst.states {
            if let Some(st) = item.states.iter().find(|x| &x.iri == s) {
                let digits = o.entry(&inst.concept).map_or(1, |e| e.precision);
                states.push(StateSummary {
                    iri: st.iri.clone(),
                    label: st.label.clone(),
                    range: st.interval.map(|i| i.describe(digits)),
                    instance: inst.iri.clone(),
                });
            }
        }
    }
    let evaluations = item
        .instances_with(InstanceRole::Evaluation)
        .map(|e| EvaluationSummary { metric: ontology_ref(o, &e.concept), value: e.value })
        .collect();
    Ok(ItemSummary {
        iri: item.iri.clone(),
        label: item.label.clone(),
        kind: item.kind,
        algorithms: item.algorithms().map(|t| ontology_ref(o, &t.iri)).collect(),
        conditions,
        targets,
        dataset,
        provenance,
        states,
        evaluations,
    })
}
